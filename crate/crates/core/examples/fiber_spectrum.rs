// Fibers H(τ) of the two-magnon chain: eigenvalues, the scattering band
// Σ_2(τ, ·) and the bound state below it.

use magnonspec::spectral::{eig_dense, essential_spectrum_fiber, fiber_hamiltonian, heisenberg_band_n2};
use magnonspec::symbols::{heisenberg_symbols, FiberParameter};

pub fn run_example() -> magnonspec::Result<Vec<(f64, f64, f64)>> {
    let (a, b) = (1.0, 1.6);
    let (phi, psi) = heisenberg_symbols(a, b, 2);
    let mut rows = Vec::new();
    for k in 0..=4 {
        let tau = FiberParameter::new(k as f64 / 8.0);
        let spectrum = eig_dense(&fiber_hamiltonian(tau, &phi, &psi, 120)?)?;
        let band = essential_spectrum_fiber(tau, &phi, &psi, 128, 1)?;
        let (lo, hi) = band.hull().expect("band samples");
        let analytic = heisenberg_band_n2(a, b, tau, FiberParameter::new(0.0));
        let lowest = spectrum.values()[0];
        println!(
            "tau={:.3}  band [{lo:.4}, {hi:.4}]  lowest eigenvalue {lowest:.6}{}  (Σ_2 at τ'=0: {analytic:.4})",
            tau.value(),
            if lowest < lo - 1e-6 { "  <- bound state" } else { "" }
        );
        rows.push((tau.value(), lowest, lo));
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("fiber example");
}
