use std::sync::Arc;

use magnonspec::lattice::TruncationBox;
use magnonspec::operators::{IndexSet, OperatorSpec};
use magnonspec::spectral::{
    eig_dense, eig_lanczos, eigensystem, essential_spectrum_fiber, fiber_hamiltonian, fiber_spec, full_spectrum_union,
    hausdorff, ContinuumFilter, LanczosOptions, Which,
};
use magnonspec::symbols::heisenberg_symbols;

#[test]
fn finite_sections_fill_the_band_monotonically() {
    let (phi, psi) = heisenberg_symbols(1.0, 1.0, 2);
    let mut prev = f64::INFINITY;
    for l in [25, 50, 100, 200, 400] {
        let op = fiber_hamiltonian(0.0.into(), &phi, &psi, l).unwrap();
        let d = eig_dense(&op).unwrap().hausdorff_to_interval(0.0, 16.0).unwrap();
        assert!(d <= prev, "L={l}: {d} > {prev}");
        prev = d;
    }
    assert!(prev < 0.05);
}

#[test]
fn three_magnon_continuum_matches_essential_spectrum() {
    let (phi, psi) = heisenberg_symbols(1.0, 1.0, 3);
    let ess = essential_spectrum_fiber(0.0.into(), &phi, &psi, 64, 60).unwrap();
    let (lo, hi) = ess.hull().unwrap();
    let op = fiber_hamiltonian(0.0.into(), &phi, &psi, 60).unwrap();
    let es = eigensystem(&op.matrix).unwrap();
    let continuum = ContinuumFilter::default().continuum(&op.index, &es);
    let d = continuum.hausdorff_to_interval(lo, hi).unwrap();
    assert!(d <= 0.15, "hull [{lo}, {hi}], distance {d}");
}

#[test]
fn union_is_stable_under_grid_doubling() {
    let (phi, psi) = heisenberg_symbols(1.0, 1.0, 2);
    let coarse = full_spectrum_union(&phi, &psi, 16, 40).unwrap();
    let fine = full_spectrum_union(&phi, &psi, 32, 40).unwrap();
    // |d/dτ| of the band edges is at most 2π·8 on a grid of spacing 1/16
    assert!(hausdorff(&coarse, &fine).unwrap() <= 2.0 * std::f64::consts::PI * 8.0 / 16.0);
}

#[test]
fn eigenvalues_respect_the_gershgorin_bound() {
    for (n, a, b) in [(2, 1.0, 1.0), (3, 0.7, 1.3), (2, -1.0, 0.4)] {
        let (phi, psi) = heisenberg_symbols(a, b, n);
        let index = Arc::new(IndexSet::from_box(&TruncationBox::full(n, -5..=5, 5)).unwrap());
        let spec = OperatorSpec::new(phi, psi, index).unwrap();
        let r = spec.gershgorin_bound();
        let s = eig_dense(&spec.assemble().unwrap()).unwrap();
        assert!(s.values().iter().all(|v| v.abs() <= r + 1e-12));
    }
}

#[test]
fn bound_state_energy_matches_the_exponential_ansatz() {
    // τ = 0 fiber: 4b on the contact site, 8b in the bulk, hopping -4a.
    // ψ_z = x^z gives x = a/b and E = 4b - 4a²/b.
    for (a, b) in [(1.0, 1.6), (1.0, 2.0), (0.5, 1.0)] {
        let (phi, psi) = heisenberg_symbols(a, b, 2);
        let op = fiber_hamiltonian(0.0.into(), &phi, &psi, 200).unwrap();
        let lowest = eig_dense(&op).unwrap().values()[0];
        let expected = 4.0 * b - 4.0 * a * a / b;
        assert!((lowest - expected).abs() < 1e-10, "a={a} b={b}: {lowest} vs {expected}");
    }
}

#[test]
fn lanczos_matches_dense_on_a_fiber() {
    let (phi, psi) = heisenberg_symbols(1.0, 1.6, 2);
    let spec = fiber_spec(0.3.into(), &phi, &psi, 300).unwrap();
    let dense = eig_dense(&spec.assemble().unwrap()).unwrap();
    let opts = LanczosOptions::default();
    let low = eig_lanczos(|x, y| spec.apply_into(x, y), spec.dim(), 2, Which::Smallest, opts).unwrap();
    let high = eig_lanczos(|x, y| spec.apply_into(x, y), spec.dim(), 1, Which::Largest, opts).unwrap();
    assert!((low.values()[0] - dense.values()[0]).abs() < 1e-8);
    assert!((low.values()[1] - dense.values()[1]).abs() < 1e-8);
    assert!((high.values()[0] - dense.max().unwrap()).abs() < 1e-8);
}
