// Three magnons: the continuum of one fiber against ∪_j ∪_τ' Σ_j(τ, τ').

use magnonspec::spectral::{eigensystem, essential_spectrum_fiber, fiber_hamiltonian, ContinuumFilter};
use magnonspec::symbols::{heisenberg_symbols, FiberParameter};

pub fn run_example() -> magnonspec::Result<f64> {
    let (phi, psi) = heisenberg_symbols(1.0, 1.0, 3);
    let tau = FiberParameter::new(0.0);
    let ess = essential_spectrum_fiber(tau, &phi, &psi, 64, 40)?;
    let (lo, hi) = ess.hull().expect("band samples");
    let op = fiber_hamiltonian(tau, &phi, &psi, 40)?;
    let es = eigensystem(&op.matrix)?;
    let filter = ContinuumFilter::default();
    let continuum = filter.continuum(&op.index, &es);
    let bound = filter.bound(&op.index, &es);
    let d = continuum.hausdorff_to_interval(lo, hi)?;
    println!("essential spectrum hull [{lo:.4}, {hi:.4}]");
    println!("{} continuum states, Hausdorff distance to the hull {d:.4}", continuum.len());
    println!("{} boundary-localized states, lowest {:?}", bound.len(), bound.min());
    Ok(d)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("essential spectrum example");
}
