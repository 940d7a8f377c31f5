// The N-magnon XXZ Hamiltonian, built by hopping occupied sites, equals the
// Toeplitz-plus-potential operator with φ = -2aχ_S and ψ = 2bχ_S.

use std::sync::Arc;

use magnonspec::lattice::TruncationBox;
use magnonspec::operators::{build_heisenberg_direct, compress_potential, compress_toeplitz, IndexSet};
use magnonspec::symbols::heisenberg_symbols;

pub fn run_example() -> magnonspec::Result<f64> {
    let mut worst: f64 = 0.0;
    for (n, a, b) in [(2, 1.0, 1.0), (3, 1.0, 1.0), (2, 1.0, 0.7), (4, 0.5, 2.0)] {
        let bx = TruncationBox::full(n, -6..=6, 5);
        let index = Arc::new(IndexSet::from_box(&bx)?);
        let (phi, psi) = heisenberg_symbols(a, b, n);
        let direct = build_heisenberg_direct(n, a, b, &bx)?;
        let split = compress_toeplitz(&phi, &index)?.plus(&compress_potential(&psi, &index)?)?;
        let diff = direct.matrix.max_abs_diff(&split.matrix);
        println!("N={n} a={a} b={b}: {} configurations, max |direct - split| = {diff:e}", index.len());
        worst = worst.max(diff);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    let worst = run_example().expect("equivalence check");
    assert_eq!(worst, 0.0);
}
