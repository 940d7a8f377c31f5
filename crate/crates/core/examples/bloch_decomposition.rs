// Periodizing z_1 on a ring of length L1 block-diagonalizes the operator
// into the fibers at τ = k/L1.

use magnonspec::spectral::bloch_check;
use magnonspec::symbols::heisenberg_symbols;

pub fn run_example() -> magnonspec::Result<f64> {
    let mut worst: f64 = 0.0;
    for (n, l1, l) in [(2, 2, 12), (2, 4, 12), (2, 8, 12), (3, 4, 8)] {
        let (phi, psi) = heisenberg_symbols(1.0, 1.3, n);
        let d = bloch_check(&phi, &psi, l1, l)?;
        println!("N={n} L1={l1} L={l}: discrepancy {d:.3e}");
        worst = worst.max(d);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    assert!(run_example().expect("bloch example") <= 1e-10);
}
