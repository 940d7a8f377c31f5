//! Functional calculus, unitary evolution and non-propagation measurements.
//!
//! For an energy window `κ` whose support avoids the bands `∪ Σ_j(τ, τ')`,
//! states in the range of `κ(H)` carry vanishing weight in the regions
//! `Ω_j(n) = {z_j ≥ n}` as `n` grows, uniformly in time. The quantities here
//! measure that on finite compressions:
//!
//! - `‖χ_{Ω_j(n)} κ(H)‖` via [`DenseCalculus::nonprop_norm`],
//! - `sup_t ‖χ_{Ω_j(n)} e^{-itH} f‖ / ‖f‖` via [`DenseCalculus::nonprop_dynamical`].

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{indicator_project, CompressedOperator, DenseMatrix, IndexSet, OperatorSpec, DENSE_LIMIT};
use crate::spectral::{eigensystem, inner, norm, Eigensystem, SpectrumSet};

/// Default relative mass below which an eigencomponent is left out of a spectral support.
pub const DEFAULT_EPS_MASS: f64 = 1e-8;

/// Chebyshev terms are dropped once the Bessel coefficients fall below this.
pub const CHEBYSHEV_CUTOFF: f64 = 1e-12;

/// Default sampling times `0, 0.5, …, 50`.
pub fn default_t_grid() -> Vec<f64> {
    (0..=100).map(|k| 0.5 * k as f64).collect()
}

/// C¹ piecewise-cubic bump: zero outside `[lo, hi]`, one on the middle half,
/// smoothstep ramps in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!("energy window needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn around(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let ramp = 0.25 * (self.hi - self.lo);
        let s = if x < self.lo + ramp {
            (x - self.lo) / ramp
        } else if x > self.hi - ramp {
            (self.hi - x) / ramp
        } else {
            return 1.0;
        };
        s * s * (3.0 - 2.0 * s)
    }

    /// Support does not meet `[a, b]`.
    pub fn avoids(&self, a: f64, b: f64) -> bool {
        self.hi <= a || self.lo >= b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    norm: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        let norm = norm(&amplitudes);
        Self { amplitudes, norm }
    }

    /// Gaussian-free random state with uniformly distributed real and
    /// imaginary parts in `[-1/2, 1/2)`.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![Complex64::default(); dim];
        v[i] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Lattice points where gap `j` is at least `n`, for the operator's domain.
pub fn omega_mask(index: &IndexSet, j: usize, n: i64) -> Result<Vec<bool>> {
    let domain = index.domain();
    index
        .points()
        .iter()
        .map(|p| {
            domain
                .gap(p, j)
                .map(|g| g >= n)
                .ok_or(Error::IndexOutOfRange { j, lo: 2, hi: domain.dim() + 1 })
        })
        .collect()
}

/// Dense functional calculus on one compression, sharing a single
/// eigendecomposition across all measurements.
#[derive(Debug, Clone)]
pub struct DenseCalculus {
    pub op: Arc<CompressedOperator>,
    pub eig: Eigensystem,
}

impl DenseCalculus {
    pub fn new(op: CompressedOperator) -> Result<Self> {
        if op.size() > DENSE_LIMIT {
            return Err(Error::DenseLimit { size: op.size(), limit: DENSE_LIMIT });
        }
        let eig = eigensystem(&op.matrix)?;
        Ok(Self { op: Arc::new(op), eig })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn spectrum(&self) -> SpectrumSet {
        self.eig.spectrum(self.op.label.clone())
    }

    /// `κ(H) = U κ(Λ) U*` as a dense operator.
    pub fn functional_calculus<F: Fn(f64) -> f64>(&self, kappa: F) -> CompressedOperator {
        let n = self.dim();
        let weights: Vec<(usize, f64)> =
            self.eig.values.iter().enumerate().map(|(i, &l)| (i, kappa(l))).filter(|(_, w)| *w != 0.0).collect();
        let mut m = DenseMatrix::zeros(n);
        for &(i, w) in &weights {
            let v = self.eig.vector(i);
            for r in 0..n {
                let vr = v[r] * w;
                if vr.norm() == 0.0 {
                    continue;
                }
                for (c, vc) in v.iter().enumerate() {
                    m.add_at(r, c, vr * vc.conj());
                }
            }
        }
        CompressedOperator { index: Arc::clone(&self.op.index), matrix: m, label: format!("kappa({})", self.op.label) }
    }

    /// `κ(H) g` without forming `κ(H)`.
    pub fn apply_function<F: Fn(f64) -> f64>(&self, kappa: F, g: &[Complex64]) -> StateVector {
        let coeffs: Vec<Complex64> =
            self.eig.coefficients(g).into_iter().zip(&self.eig.values).map(|(c, &l)| c * kappa(l)).collect();
        StateVector::new(self.eig.synthesize(&coeffs))
    }

    /// `max_λ |κ(λ)|`, the operator norm of `κ(H)`.
    pub fn function_norm<F: Fn(f64) -> f64>(&self, kappa: F) -> f64 {
        self.eig.values.iter().map(|&l| kappa(l).abs()).fold(0.0, f64::max)
    }

    pub fn evolve(&self, f: &StateVector, t: f64) -> StateVector {
        if t == 0.0 {
            return f.clone();
        }
        let coeffs: Vec<Complex64> = self
            .eig
            .coefficients(f.amplitudes())
            .into_iter()
            .zip(&self.eig.values)
            .map(|(c, &l)| c * Complex64::from_polar(1.0, -t * l))
            .collect();
        StateVector::new(self.eig.synthesize(&coeffs))
    }

    /// Eigenvalues carrying more than `eps_mass · ‖f‖²` of the weight of `f`.
    pub fn spectral_support(&self, f: &StateVector, eps_mass: f64) -> SpectrumSet {
        let total = f.norm() * f.norm();
        let values = self
            .eig
            .coefficients(f.amplitudes())
            .iter()
            .zip(&self.eig.values)
            .filter(|(c, _)| c.norm_sqr() > eps_mass * total)
            .map(|(_, &l)| l)
            .collect();
        SpectrumSet::new(values, "spectral support")
    }

    /// `‖χ κ(H)‖` for the region mask `keep`.
    ///
    /// With `K` the eigenvectors where `κ ≠ 0`, `χ κ(H) = (χ U_K κ_K) U_K*` and
    /// `U_K*` is a coisometry, so the norm is the largest singular value of the
    /// `n × |K|` matrix `χ U_K κ_K`, read off its `|K| × |K|` Gram matrix.
    pub fn projected_norm<F: Fn(f64) -> f64>(&self, keep: &[bool], kappa: F) -> f64 {
        let active: Vec<(usize, f64)> =
            self.eig.values.iter().enumerate().map(|(i, &l)| (i, kappa(l))).filter(|(_, w)| *w != 0.0).collect();
        if active.is_empty() {
            return 0.0;
        }
        let rows: Vec<usize> = keep.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        if rows.is_empty() {
            return 0.0;
        }
        let cols: Vec<Vec<Complex64>> = active
            .iter()
            .map(|&(i, w)| {
                let v = self.eig.vector(i);
                rows.iter().map(|&r| v[r] * w).collect()
            })
            .collect();
        let k = cols.len();
        let gram = DenseMatrix::from_fn(k, |a, b| inner(&cols[a], &cols[b]));
        let gram = DenseMatrix::from_fn(k, |a, b| 0.5 * (gram.get(a, b) + gram.get(b, a).conj()));
        let top = eigensystem(&gram).map(|e| e.values.last().copied().unwrap_or(0.0)).unwrap_or(0.0);
        top.max(0.0).sqrt()
    }

    /// `‖χ_{Ω_j(n)} κ(H)‖`.
    pub fn nonprop_norm<F: Fn(f64) -> f64>(&self, j: usize, n: i64, kappa: F) -> Result<f64> {
        let keep = omega_mask(&self.op.index, j, n)?;
        Ok(self.projected_norm(&keep, kappa))
    }

    /// `max_{t ∈ t_grid} ‖χ_{Ω_j(n)} e^{-itH} f‖ / ‖f‖`.
    pub fn nonprop_dynamical(&self, j: usize, n: i64, f: &StateVector, t_grid: &[f64]) -> Result<f64> {
        Ok(self.dynamical_trace(j, n, f, t_grid)?.into_iter().map(|(_, r)| r).fold(0.0, f64::max))
    }

    /// `(t, ‖χ_{Ω_j(n)} e^{-itH} f‖ / ‖f‖)` for every sampled time.
    pub fn dynamical_trace(&self, j: usize, n: i64, f: &StateVector, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        if f.norm() == 0.0 {
            return Err(Error::Empty("initial state has zero norm"));
        }
        let keep = omega_mask(&self.op.index, j, n)?;
        Ok(t_grid
            .par_iter()
            .map(|&t| {
                let psi = self.evolve(f, t);
                let inside: f64 = psi.amplitudes().iter().zip(&keep).filter(|(_, &b)| b).map(|(v, _)| v.norm_sqr()).sum();
                (t, inside.sqrt() / f.norm())
            })
            .collect())
    }
}

pub fn functional_calculus(op: &CompressedOperator, kappa: &EnergyWindow) -> Result<CompressedOperator> {
    Ok(DenseCalculus::new(op.clone())?.functional_calculus(|x| kappa.eval(x)))
}

/// `e^{-itH} f`: dense eigendecomposition below the dense limit.
pub fn evolve(op: &CompressedOperator, f: &StateVector, t: f64) -> Result<StateVector> {
    if f.len() != op.size() {
        return Err(Error::DimensionMismatch { expected: op.size(), got: f.len() });
    }
    Ok(DenseCalculus::new(op.clone())?.evolve(f, t))
}

pub fn spectral_support(f: &StateVector, op: &CompressedOperator, eps_mass: f64) -> Result<SpectrumSet> {
    Ok(DenseCalculus::new(op.clone())?.spectral_support(f, eps_mass))
}

pub fn nonprop_norm(op: &CompressedOperator, j: usize, n: i64, kappa: &EnergyWindow) -> Result<f64> {
    DenseCalculus::new(op.clone())?.nonprop_norm(j, n, |x| kappa.eval(x))
}

pub fn nonprop_dynamical(op: &CompressedOperator, j: usize, n: i64, f: &StateVector, t_grid: &[f64]) -> Result<f64> {
    DenseCalculus::new(op.clone())?.nonprop_dynamical(j, n, f, t_grid)
}

/// `J_0(x), …, J_kmax(x)` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; kmax + 1];
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = {
        let m = kmax.max(ax as usize) + 20 + (40.0 * (kmax.max(ax as usize) as f64 + 1.0)).sqrt() as usize;
        m + (m % 2)
    };
    let mut seq = vec![0.0; start + 2];
    seq[start] = 1e-300;
    for k in (1..=start).rev() {
        seq[k - 1] = 2.0 * k as f64 / ax * seq[k] - seq[k + 1];
        if seq[k - 1].abs() > 1e250 {
            for v in seq.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm: f64 = seq[0] + 2.0 * seq.iter().skip(2).step_by(2).sum::<f64>();
    let mut out: Vec<f64> = seq.into_iter().take(kmax + 1).map(|v| v / norm).collect();
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `e^{-itH} f` by Chebyshev expansion of `e^{-itx}` on `[-R, R]`, `R` the
/// Gershgorin bound of the operator. Only uses the matrix-free action.
pub fn evolve_chebyshev(spec: &OperatorSpec, f: &StateVector, t: f64) -> Result<StateVector> {
    let n = spec.dim();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let radius = spec.gershgorin_bound() * 1.01 + 1e-12;
    let x = t * radius;
    let kmax = (x.abs() as usize) + 40;
    let mut bessel = bessel_j_sequence(x, kmax + 40);
    // cut once past the turning point
    let mut terms = bessel.len();
    for k in (x.abs() as usize + 1)..bessel.len() {
        if bessel[k].abs() < CHEBYSHEV_CUTOFF && bessel.get(k + 1).is_none_or(|b| b.abs() < CHEBYSHEV_CUTOFF) {
            terms = k;
            break;
        }
    }
    bessel.truncate(terms);

    let scaled = |v: &[Complex64], out: &mut [Complex64]| {
        spec.apply_into(v, out);
        out.iter_mut().for_each(|o| *o /= radius);
    };
    let mut prev = f.amplitudes().to_vec();
    let mut cur = vec![Complex64::default(); n];
    scaled(&prev, &mut cur);
    let mut acc: Vec<Complex64> = prev.iter().map(|v| v * bessel[0]).collect();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut phase = minus_i;
    if bessel.len() > 1 {
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += 2.0 * phase * bessel[1] * c;
        }
    }
    let mut next = vec![Complex64::default(); n];
    for &jk in bessel.iter().skip(2) {
        scaled(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = 2.0 * *nx - p;
        }
        phase *= minus_i;
        let coef = 2.0 * phase * jk;
        for (a, v) in acc.iter_mut().zip(&next) {
            *a += coef * v;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(StateVector::new(acc))
}

/// Projection of a state onto a region mask.
pub fn project_state(index: &IndexSet, keep: &[bool], f: &StateVector) -> StateVector {
    let lookup: std::collections::HashMap<&[i64], bool> =
        index.points().iter().map(|p| p.as_slice()).zip(keep.iter().copied()).collect();
    StateVector::new(indicator_project(index, |p| lookup[p], f.amplitudes()))
}
