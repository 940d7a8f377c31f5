//! Eigenvalue computations and the band formulas for fibers and their
//! essential spectra.
//!
//! For `T^<_φ + V^<_ψ` on `Z^N_<` the partial Fourier transform in the first
//! gap coordinate gives the fibers
//! `H(τ) = T^{N-1}_{μ(τ)φ} + V^{N-1}_{μ(0)ψ}` on `(N*)^{N-1}`. The spectrum of
//! the full operator is the union of `σ(H(τ))` over the torus, and the
//! essential spectrum of each fiber is the union over `j` and `τ'` of the
//! spectra `Σ_j(τ, τ')` of the `(N-2)`-dimensional operators obtained by one
//! more Fourier transform in the `j`-th gap.

use std::sync::Arc;

use faer::complex_native::c64;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    compress_potential, compress_toeplitz, CompressedOperator, DenseMatrix, IndexSet, OperatorSpec,
    HERMITIAN_TOL,
};
use crate::symbols::{full_fourier, mu, nu_j, pullback_theta_inv, FiberParameter, ShiftSymbol};

/// Default number of points of a uniform torus grid.
pub const DEFAULT_GRID: usize = 64;

/// Sorted list of real spectral values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    values: Vec<f64>,
    pub meta: String,
}

impl SpectrumSet {
    pub fn new(mut values: Vec<f64>, meta: impl Into<String>) -> Self {
        assert!(values.iter().all(|v| v.is_finite()), "spectral values must be finite");
        values.sort_by(f64::total_cmp);
        Self { values, meta: meta.into() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Smallest closed interval containing every value.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.min()?, self.max()?))
    }

    pub fn merged<'a, I>(sets: I, meta: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = &'a SpectrumSet>,
    {
        let values = sets.into_iter().flat_map(|s| s.values.iter().copied()).collect();
        Self::new(values, meta)
    }

    /// Distance from `x` to the nearest value.
    pub fn distance_to(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < x);
        let mut d = f64::INFINITY;
        if i < self.values.len() {
            d = d.min(self.values[i] - x);
        }
        if i > 0 {
            d = d.min(x - self.values[i - 1]);
        }
        d
    }

    /// Hausdorff distance between this finite set and the interval `[lo, hi]`.
    pub fn hausdorff_to_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Empty("spectrum set"));
        }
        let outside = self
            .values
            .iter()
            .map(|&v| if v < lo { lo - v } else if v > hi { v - hi } else { 0.0 })
            .fold(0.0, f64::max);
        // farthest interval point from the set: an endpoint or a midpoint of a gap
        let mut inside = self.distance_to(lo).max(self.distance_to(hi));
        for w in self.values.windows(2) {
            let (a, b) = (w[0].max(lo), w[1].min(hi));
            if b > a {
                inside = inside.max(0.5 * (b - a));
            }
        }
        Ok(outside.max(inside))
    }
}

/// Symmetrized Hausdorff distance between two finite sets.
pub fn hausdorff(a: &SpectrumSet, b: &SpectrumSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("spectrum set"));
    }
    let one_way = |x: &SpectrumSet, y: &SpectrumSet| x.values.iter().map(|&v| y.distance_to(v)).fold(0.0, f64::max);
    Ok(one_way(a, b).max(one_way(b, a)))
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    n: usize,
    // column-major: vector i occupies vectors[i*n..(i+1)*n]
    vectors: Vec<Complex64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// `⟨v_i, f⟩` for every eigenvector.
    pub fn coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| inner(self.vector(i), f)).collect()
    }

    /// `Σ_i c_i v_i`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.n];
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vector(i)) {
                *o += c * v;
            }
        }
        out
    }

    pub fn spectrum(&self, meta: impl Into<String>) -> SpectrumSet {
        SpectrumSet::new(self.values.clone(), meta)
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix, ascending.
pub fn eigensystem(m: &DenseMatrix) -> Result<Eigensystem> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.size();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    if m.is_real() {
        let a = Mat::<f64>::from_fn(n, n, |i, k| m.get(i, k).re);
        let eig = a.selfadjoint_eigendecomposition(Side::Lower);
        let s = eig.s().column_vector();
        let u = eig.u();
        for i in 0..n {
            values.push(s.read(i));
            vectors.extend((0..n).map(|r| Complex64::new(u.read(r, i), 0.0)));
        }
    } else {
        let a = Mat::<c64>::from_fn(n, n, |i, k| {
            let v = m.get(i, k);
            c64::new(v.re, v.im)
        });
        let eig = a.selfadjoint_eigendecomposition(Side::Lower);
        let s = eig.s().column_vector();
        let u = eig.u();
        for i in 0..n {
            values.push(s.read(i).re);
            vectors.extend((0..n).map(|r| {
                let v = u.read(r, i);
                Complex64::new(v.re, v.im)
            }));
        }
    }
    Ok(Eigensystem { values, n, vectors })
}

fn eigenvalues_only(m: &DenseMatrix) -> Result<Vec<f64>> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.size();
    let mut values = if m.is_real() {
        Mat::<f64>::from_fn(n, n, |i, k| m.get(i, k).re).selfadjoint_eigenvalues(Side::Lower)
    } else {
        Mat::<c64>::from_fn(n, n, |i, k| {
            let v = m.get(i, k);
            c64::new(v.re, v.im)
        })
        .selfadjoint_eigenvalues(Side::Lower)
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn eig_dense(op: &CompressedOperator) -> Result<SpectrumSet> {
    Ok(SpectrumSet::new(eigenvalues_only(&op.matrix)?, op.label.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 600, tol: 1e-8, seed: 0x5eed }
    }
}

/// Extremal Ritz values of a Hermitian action with full reorthogonalization.
///
/// `apply(f, out)` must write `A f` into `out`. Convergence is declared when
/// the residual estimate `β_m |s_{m,i}|` of each wanted Ritz pair drops below
/// `tol · max(1, ‖T_m‖)`.
pub fn eig_lanczos<F>(apply: F, dim: usize, k: usize, which: Which, opts: LanczosOptions) -> Result<SpectrumSet>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    if k == 0 || k >= dim {
        return Err(Error::InvalidConfig(format!("need 0 < k < dim, got k={k}, dim={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_unit = |basis: &[Vec<Complex64>]| -> Option<Vec<Complex64>> {
        for _ in 0..8 {
            let mut v: Vec<Complex64> =
                (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            orthogonalize(&mut v, basis);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let cap = opts.max_iter.min(dim);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![Complex64::default(); dim];
    let mut v = random_unit(&basis).ok_or(Error::Empty("Krylov start vector"))?;
    loop {
        apply(&v, &mut w);
        let a = inner(&v, &w).re;
        basis.push(v);
        alpha.push(a);
        // w -= a v_m + β_{m-1} v_{m-1}, then full reorthogonalization
        orthogonalize(&mut w, &basis);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = basis.len();

        let (ritz, last_row) = tridiagonal_eigen(&alpha, &beta);
        let scale = ritz.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let wanted: Vec<usize> = match which {
            Which::Smallest => (0..k.min(m)).collect(),
            Which::Largest => (m.saturating_sub(k)..m).collect(),
        };
        let worst = wanted.iter().map(|&i| b * last_row[i].abs()).fold(0.0, f64::max);
        let breakdown = b <= 1e-12 * scale;

        if m >= k && (worst <= opts.tol * scale || m == dim) {
            let vals = wanted.iter().map(|&i| ritz[i]).collect();
            return Ok(SpectrumSet::new(vals, format!("lanczos k={k} m={m}")));
        }
        if m >= cap {
            return Err(Error::NoConvergence { iterations: m, residual: worst });
        }
        if breakdown {
            // invariant subspace found; continue in its orthogonal complement
            beta.push(0.0);
            match random_unit(&basis) {
                Some(next) => v = next,
                None => return Err(Error::NoConvergence { iterations: m, residual: worst }),
            }
        } else {
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
    }
}

fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let c = inner(q, w);
        for (x, y) in w.iter_mut().zip(q) {
            *x -= c * y;
        }
    }
}

/// Eigenvalues of the symmetric tridiagonal `T` and the last component of
/// each normalized eigenvector.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, k| {
        if i == k {
            alpha[i]
        } else if i.abs_diff(k) == 1 {
            beta[i.min(k)]
        } else {
            0.0
        }
    });
    let eig = t.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    ((0..m).map(|i| s.read(i)).collect(), (0..m).map(|i| u.read(m - 1, i)).collect())
}

fn check_pair(phi: &ShiftSymbol, psi: &ShiftSymbol) -> Result<usize> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), got: psi.dim() });
    }
    Ok(phi.dim())
}

/// Matrix-free fiber `T^{N-1}_{μ(τ)φ} + V^{N-1}_{μ(0)ψ}` on `{1..gap_max}^{N-1}`.
pub fn fiber_spec(tau: FiberParameter, phi: &ShiftSymbol, psi: &ShiftSymbol, gap_max: i64) -> Result<OperatorSpec> {
    let n = check_pair(phi, psi)?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!("fiber Hamiltonians need N >= 2, got {n}")));
    }
    let index = Arc::new(IndexSet::fiber(n - 1, gap_max)?);
    OperatorSpec::new(mu(tau, phi)?, mu(FiberParameter::new(0.0), psi)?, index)
}

/// Dense fiber Hamiltonian. The potential symbol is always taken at `τ = 0`.
pub fn fiber_hamiltonian(
    tau: FiberParameter,
    phi: &ShiftSymbol,
    psi: &ShiftSymbol,
    gap_max: i64,
) -> Result<CompressedOperator> {
    let spec = fiber_spec(tau, phi, psi, gap_max)?;
    let mut op = spec.assemble()?;
    op.ensure_hermitian()?;
    op.label = format!("fiber tau={} L={gap_max}", tau.value());
    Ok(op)
}

/// Eigenvalues of the fiber at `τ`; for `N = 1` the fiber is the scalar
/// `(Fφ)(τ) + (Fψ)(0)`.
pub fn fiber_eigenvalues(tau: FiberParameter, phi: &ShiftSymbol, psi: &ShiftSymbol, gap_max: i64) -> Result<Vec<f64>> {
    if check_pair(phi, psi)? == 1 {
        let v = full_fourier(phi, &[tau])? + full_fourier(psi, &[FiberParameter::new(0.0)])?;
        return Ok(vec![v.re]);
    }
    Ok(eig_dense(&fiber_hamiltonian(tau, phi, psi, gap_max)?)?.values)
}

/// `Σ_j(τ, τ')`: spectrum of `T^{N-2}_{ν_j(τ')μ(τ)φ} + V^{N-2}_{ν_j(0)μ(0)ψ}`.
///
/// For `N = 2` the operator acts on a one-point space and the result is a
/// singleton.
pub fn sigma_j(
    j: usize,
    tau: FiberParameter,
    tau_prime: FiberParameter,
    phi: &ShiftSymbol,
    psi: &ShiftSymbol,
    gap_max: i64,
) -> Result<SpectrumSet> {
    let n = check_pair(phi, psi)?;
    if n < 2 || j < 2 || j > n {
        return Err(Error::IndexOutOfRange { j, lo: 2, hi: n });
    }
    let zero = FiberParameter::new(0.0);
    let hop = nu_j(j, tau_prime, &mu(tau, phi)?)?;
    let pot = nu_j(j, zero, &mu(zero, psi)?)?;
    let meta = format!("Sigma_{j}(tau={}, tau'={})", tau.value(), tau_prime.value());
    if n == 2 {
        return Ok(SpectrumSet::new(vec![(hop.get(&[]) + pot.get(&[])).re], meta));
    }
    let index = Arc::new(IndexSet::fiber(n - 2, gap_max)?);
    let op = compress_toeplitz(&hop, &index)?.plus(&compress_potential(&pot, &index)?)?;
    Ok(SpectrumSet::new(eigenvalues_only(&op.matrix)?, meta))
}

/// Closed form of `Σ_2(τ, τ')` for the two-magnon XXZ chain:
/// `8b − 4a cos(2πτ') − 4a cos(2π(τ − τ'))`.
pub fn heisenberg_band_n2(a: f64, b: f64, tau: FiberParameter, tau_prime: FiberParameter) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    8.0 * b - 4.0 * a * (two_pi * tau_prime.value()).cos() - 4.0 * a * (two_pi * (tau.value() - tau_prime.value())).cos()
}

/// One row per `(j, τ')` grid point: the band values `Σ_j(τ, τ')`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaSample {
    pub j: usize,
    pub tau_prime: f64,
    pub values: Vec<f64>,
}

pub fn sigma_sweep(
    tau: FiberParameter,
    phi: &ShiftSymbol,
    psi: &ShiftSymbol,
    grid_size: usize,
    gap_max: i64,
) -> Result<Vec<SigmaSample>> {
    let n = check_pair(phi, psi)?;
    if grid_size == 0 {
        return Err(Error::InvalidConfig("grid size must be positive".into()));
    }
    let jobs: Vec<(usize, usize)> = (2..=n).flat_map(|j| (0..grid_size).map(move |k| (j, k))).collect();
    jobs.par_iter()
        .map(|&(j, k)| {
            let tp = FiberParameter::grid(k, grid_size);
            let s = sigma_j(j, tau, tp, phi, psi, gap_max)?;
            Ok(SigmaSample { j, tau_prime: tp.value(), values: s.values })
        })
        .collect()
}

/// `∪_{j=2}^{N} ∪_{τ'} Σ_j(τ, τ')` sampled on a uniform `τ'` grid.
pub fn essential_spectrum_fiber(
    tau: FiberParameter,
    phi: &ShiftSymbol,
    psi: &ShiftSymbol,
    grid_size: usize,
    gap_max: i64,
) -> Result<SpectrumSet> {
    let rows = sigma_sweep(tau, phi, psi, grid_size, gap_max)?;
    let values = rows.into_iter().flat_map(|r| r.values).collect();
    Ok(SpectrumSet::new(values, format!("essential spectrum of fiber tau={}", tau.value())))
}

/// Eigenvalues of one fiber of a torus sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSample {
    pub tau: f64,
    pub values: Vec<f64>,
}

pub fn fiber_sweep(phi: &ShiftSymbol, psi: &ShiftSymbol, grid_size: usize, gap_max: i64) -> Result<Vec<FiberSample>> {
    check_pair(phi, psi)?;
    if grid_size == 0 {
        return Err(Error::InvalidConfig("grid size must be positive".into()));
    }
    (0..grid_size)
        .into_par_iter()
        .map(|k| {
            let tau = FiberParameter::grid(k, grid_size);
            Ok(FiberSample { tau: tau.value(), values: fiber_eigenvalues(tau, phi, psi, gap_max)? })
        })
        .collect()
}

/// `∪_τ σ(H(τ))` over a uniform grid.
pub fn full_spectrum_union(phi: &ShiftSymbol, psi: &ShiftSymbol, grid_size: usize, gap_max: i64) -> Result<SpectrumSet> {
    let rows = fiber_sweep(phi, psi, grid_size, gap_max)?;
    let values = rows.into_iter().flat_map(|r| r.values).collect();
    Ok(SpectrumSet::new(values, format!("union of {grid_size} fibers")))
}

/// Periodized operator on `Z_{L1} × {1..L}^{N-1}` against the union of the
/// fibers at `τ = k/L1`.
///
/// Returns the largest difference between the two sorted eigenvalue lists
/// (an upper bound on their Hausdorff distance). The discrete Fourier
/// transform in `z_1` block-diagonalizes the periodized operator, so the
/// result is zero up to round-off.
pub fn bloch_check(phi: &ShiftSymbol, psi: &ShiftSymbol, l1: i64, gap_max: i64) -> Result<f64> {
    let n = check_pair(phi, psi)?;
    if l1 < 1 {
        return Err(Error::InvalidConfig(format!("ring length must be >= 1, got {l1}")));
    }
    let ring = Arc::new(IndexSet::ring_cross_fiber(n, l1, gap_max)?);
    let op = compress_toeplitz(&pullback_theta_inv(phi), &ring)?
        .plus(&compress_potential(&pullback_theta_inv(psi), &ring)?)?;
    let whole = eigenvalues_only(&op.matrix)?;

    let mut fibers = Vec::with_capacity(whole.len());
    for k in 0..l1 {
        let tau = FiberParameter::grid(k as usize, l1 as usize);
        fibers.extend(fiber_eigenvalues(tau, phi, psi, gap_max)?);
    }
    fibers.sort_by(f64::total_cmp);
    if fibers.len() != whole.len() {
        return Err(Error::DimensionMismatch { expected: whole.len(), got: fibers.len() });
    }
    Ok(whole.iter().zip(&fibers).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Localization filter separating bound states from continuum states.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumFilter {
    /// Fraction of window sites, closest to a gap boundary, that form the boundary layer.
    pub boundary_fraction: f64,
    /// States with at least this much mass in the boundary layer count as bound.
    pub mass_threshold: f64,
}

impl Default for ContinuumFilter {
    fn default() -> Self {
        Self { boundary_fraction: 0.1, mass_threshold: 0.9 }
    }
}

impl ContinuumFilter {
    /// Mask of the sites forming the boundary layer.
    ///
    /// Sites are ranked by `min_j (z_j - 1)`; the layer is every site strictly
    /// closer to the boundary than the site at the `boundary_fraction` quantile,
    /// so sites at equal distance are never split.
    pub fn boundary_layer(&self, index: &IndexSet) -> Vec<bool> {
        let domain = index.domain();
        let dist: Vec<i64> = index.points().iter().map(|p| domain.boundary_distance(p)).collect();
        let mut sorted = dist.clone();
        sorted.sort_unstable();
        let rank = ((self.boundary_fraction * dist.len() as f64).ceil() as usize).clamp(1, dist.len());
        let cut = sorted[rank - 1];
        let strict = dist.iter().filter(|&&d| d < cut).count();
        if strict == 0 {
            dist.iter().map(|&d| d <= cut).collect()
        } else {
            dist.iter().map(|&d| d < cut).collect()
        }
    }

    /// Eigenvalues whose eigenvectors are not concentrated in the boundary layer.
    pub fn continuum(&self, index: &IndexSet, es: &Eigensystem) -> SpectrumSet {
        let layer = self.boundary_layer(index);
        let values = (0..es.dim())
            .filter(|&i| {
                let mass: f64 = es.vector(i).iter().zip(&layer).filter(|(_, &b)| b).map(|(v, _)| v.norm_sqr()).sum();
                mass < self.mass_threshold
            })
            .map(|i| es.values[i])
            .collect();
        SpectrumSet::new(values, "continuum part")
    }

    /// Complement of [`Self::continuum`].
    pub fn bound(&self, index: &IndexSet, es: &Eigensystem) -> SpectrumSet {
        let layer = self.boundary_layer(index);
        let values = (0..es.dim())
            .filter(|&i| {
                let mass: f64 = es.vector(i).iter().zip(&layer).filter(|(_, &b)| b).map(|(v, _)| v.norm_sqr()).sum();
                mass >= self.mass_threshold
            })
            .map(|i| es.values[i])
            .collect();
        SpectrumSet::new(values, "bound part")
    }
}
