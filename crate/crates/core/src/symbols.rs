//! Finitely supported symbols on `Z^d` and the partial Fourier maps that
//! turn a symbol on `Z^N` into fiber symbols.
//!
//! Coordinates carry labels. A symbol on `Z^N` has labels `1..=N`; after the
//! first variable is Fourier-summed away by [`mu`] the labels are `2..=N`, and
//! [`nu_j`] removes label `j`. This lets callers address "the j-th variable"
//! the same way regardless of how many variables were already summed out.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{theta_inv_raw, theta_raw};

/// Entries with magnitude below this are dropped after arithmetic.
pub const ZERO_CUTOFF: f64 = 1e-15;

/// Point on the torus `T = [0, 1)`, reduced mod 1 on construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FiberParameter(f64);

impl FiberParameter {
    pub fn new(tau: f64) -> Self {
        let mut t = tau.rem_euclid(1.0);
        if t >= 1.0 {
            t = 0.0;
        }
        Self(t)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `k / size`, the k-th point of a uniform grid.
    pub fn grid(k: usize, size: usize) -> Self {
        Self::new(k as f64 / size as f64)
    }
}

impl From<f64> for FiberParameter {
    fn from(t: f64) -> Self {
        Self::new(t)
    }
}

/// `e_z(τ) = exp(-2πi z τ)`.
pub fn character(z: i64, tau: f64) -> Complex64 {
    // reduce the phase before scaling to keep large |z| accurate
    let phase = ((z as f64) * tau).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * phase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSymbol {
    labels: Vec<usize>,
    entries: BTreeMap<Vec<i64>, Complex64>,
}

impl ShiftSymbol {
    /// The zero symbol on `Z^dim` with labels `1..=dim`.
    pub fn zero(dim: usize) -> Self {
        Self { labels: (1..=dim).collect(), entries: BTreeMap::new() }
    }

    pub fn with_labels(labels: Vec<usize>) -> Self {
        Self { labels, entries: BTreeMap::new() }
    }

    /// Dimension-zero symbol holding a single scalar.
    pub fn scalar(value: Complex64) -> Self {
        let mut s = Self::zero(0);
        s.add_entry(Vec::new(), value);
        s
    }

    /// Unit mass at the origin of `Z^dim`.
    pub fn delta(dim: usize) -> Self {
        let mut s = Self::zero(dim);
        s.add_entry(vec![0; dim], Complex64::new(1.0, 0.0));
        s
    }

    /// Characteristic function `χ_M` of a finite set.
    pub fn indicator<I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let mut s = Self::zero(dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            s.entries.insert(p, Complex64::new(1.0, 0.0));
        }
        Ok(s)
    }

    /// The `2d` signed unit vectors `±e_i` of `Z^d`, each with the given value.
    pub fn signed_units(dim: usize, value: f64) -> Self {
        let mut s = Self::zero(dim);
        for i in 0..dim {
            for sign in [1, -1] {
                let mut p = vec![0; dim];
                p[i] = sign;
                s.add_entry(p, Complex64::new(value, 0.0));
            }
        }
        s
    }

    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut s = Self::zero(dim);
        for (p, v) in entries {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            s.add_entry(p, v);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, point: &[i64]) -> Complex64 {
        self.entries.get(point).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.entries.iter()
    }

    /// Adds `value` at `point`, removing the entry if it cancels to zero.
    pub fn add_entry(&mut self, point: Vec<i64>, value: Complex64) {
        debug_assert_eq!(point.len(), self.dim());
        match self.entries.entry(point) {
            Entry::Vacant(slot) => {
                if value.norm() >= ZERO_CUTOFF {
                    slot.insert(value);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += value;
                if slot.get().norm() < ZERO_CUTOFF {
                    slot.remove();
                }
            }
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = Self::with_labels(self.labels.clone());
        for (p, v) in &self.entries {
            out.add_entry(p.clone(), v * factor);
        }
        out
    }

    pub fn scaled_real(&self, factor: f64) -> Self {
        self.scaled(Complex64::new(factor, 0.0))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut out = self.clone();
        for (p, v) in &other.entries {
            out.add_entry(p.clone(), *v);
        }
        Ok(out)
    }

    /// `Σ_η ρ(η)`, i.e. the Fourier transform at the origin.
    pub fn total(&self) -> Complex64 {
        self.entries.values().sum()
    }

    /// `Σ_η |ρ(η)|`.
    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).sum()
    }

    /// Largest violation of `ρ(-η) = conj(ρ(η))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(p, v)| {
                let neg: Vec<i64> = p.iter().map(|x| -x).collect();
                (self.get(&neg) - v.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_real(&self) -> bool {
        self.entries.values().all(|v| v.im == 0.0)
    }

    /// Support is closed under `η ↦ -η`.
    pub fn has_symmetric_support(&self) -> bool {
        self.entries.keys().all(|p| {
            let neg: Vec<i64> = p.iter().map(|x| -x).collect();
            self.entries.contains_key(&neg)
        })
    }

    /// Parses the plain-text literal format: one `z_1 … z_d re im` row per
    /// line, `#` starts a comment. The dimension is read off the first row.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if tokens.len() < 2 {
                return Err(err("expected `z_1 ... z_d re im`".into()));
            }
            let d = tokens.len() - 2;
            match dim {
                None => dim = Some(d),
                Some(expected) if expected != d => {
                    return Err(err(format!("row has dimension {d}, earlier rows {expected}")))
                }
                _ => {}
            }
            let point = tokens[..d]
                .iter()
                .map(|t| t.parse::<i64>().map_err(|e| err(format!("bad coordinate {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let re: f64 = tokens[d].parse().map_err(|e| err(format!("bad real part: {e}")))?;
            let im: f64 = tokens[d + 1].parse().map_err(|e| err(format!("bad imaginary part: {e}")))?;
            rows.push((point, Complex64::new(re, im)));
        }
        let dim = dim.ok_or(Error::Empty("symbol file has no entries"))?;
        Self::from_entries(dim, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, v) in &self.entries {
            for z in p {
                let _ = write!(out, "{z} ");
            }
            let _ = writeln!(out, " {:.17e} {:.17e}", v.re, v.im);
        }
        out
    }
}

/// `φ = -2a χ_S` and `ψ = 2b χ_S` on `Z^N`, `S` the signed unit vectors.
pub fn heisenberg_symbols(a: f64, b: f64, n: usize) -> (ShiftSymbol, ShiftSymbol) {
    (ShiftSymbol::signed_units(n, -2.0 * a), ShiftSymbol::signed_units(n, 2.0 * b))
}

/// `ρ ∘ θ^{-1}`: the entry at `ζ` is `ρ(θ^{-1} ζ)`, so the support moves to `θ(supp ρ)`.
pub fn pullback_theta_inv(rho: &ShiftSymbol) -> ShiftSymbol {
    let mut out = ShiftSymbol::with_labels(rho.labels.clone());
    for (p, v) in &rho.entries {
        out.entries.insert(theta_raw(p), *v);
    }
    debug_assert!(out.entries.keys().all(|z| rho.get(&theta_inv_raw(z)) == out.get(z)));
    out
}

/// `[μ(τ)ρ](z_2, …, z_N) = Σ_{z_1} e^{-2πi z_1 τ} (ρ ∘ θ^{-1})(z_1, z_2, …, z_N)`.
pub fn mu(tau: FiberParameter, rho: &ShiftSymbol) -> Result<ShiftSymbol> {
    if rho.dim() < 2 {
        return Err(Error::InvalidConfig(format!(
            "mu needs a symbol of dimension >= 2, got {}",
            rho.dim()
        )));
    }
    let pulled = pullback_theta_inv(rho);
    let mut out = ShiftSymbol::with_labels(rho.labels[1..].to_vec());
    for (z, v) in &pulled.entries {
        out.add_entry(z[1..].to_vec(), character(z[0], tau.value()) * v);
    }
    Ok(out)
}

/// Fourier-sums the coordinate labelled `j` of `rho` at dual value `τ'`.
pub fn nu_j(j: usize, tau: FiberParameter, rho: &ShiftSymbol) -> Result<ShiftSymbol> {
    let pos = rho.labels.iter().position(|&l| l == j).ok_or_else(|| Error::IndexOutOfRange {
        j,
        lo: rho.labels.first().copied().unwrap_or(0),
        hi: rho.labels.last().copied().unwrap_or(0),
    })?;
    let mut labels = rho.labels.clone();
    labels.remove(pos);
    let mut out = ShiftSymbol::with_labels(labels);
    for (z, v) in &rho.entries {
        let mut rest = z.clone();
        let zj = rest.remove(pos);
        out.add_entry(rest, character(zj, tau.value()) * v);
    }
    Ok(out)
}

/// `Σ_η ρ(η) e^{-2πi η·τ}`.
pub fn full_fourier(rho: &ShiftSymbol, taus: &[FiberParameter]) -> Result<Complex64> {
    if taus.len() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: taus.len() });
    }
    Ok(rho
        .entries
        .iter()
        .map(|(p, v)| {
            let phase: Complex64 = p.iter().zip(taus).map(|(&z, t)| character(z, t.value())).product();
            v * phase
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn heisenberg_symbol_values() {
        let (phi, psi) = heisenberg_symbols(1.0, 1.0, 2);
        for p in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(phi.get(&p), c(-2.0, 0.0));
            assert_eq!(psi.get(&p), c(2.0, 0.0));
        }
        assert_eq!(phi.support_len(), 4);
        assert!(phi.is_hermitian(0.0) && psi.is_hermitian(0.0));

        let (phi, psi) = heisenberg_symbols(0.0, 0.0, 3);
        assert!(phi.is_empty() && psi.is_empty());

        let (phi, psi) = heisenberg_symbols(1.0, 0.0, 1);
        assert_eq!(phi.get(&[1]), c(-2.0, 0.0));
        assert_eq!(phi.get(&[-1]), c(-2.0, 0.0));
        assert!(psi.is_empty());
    }

    #[test]
    fn pullback_moves_support_through_theta() {
        let (phi, _) = heisenberg_symbols(1.0, 1.0, 2);
        let pulled = pullback_theta_inv(&phi);
        let mut support: Vec<_> = pulled.iter().map(|(p, _)| p.clone()).collect();
        support.sort();
        let mut expected = vec![vec![1, -1], vec![-1, 1], vec![0, 1], vec![0, -1]];
        expected.sort();
        assert_eq!(support, expected);
        assert!(pulled.iter().all(|(_, v)| *v == c(-2.0, 0.0)));

        assert!(pullback_theta_inv(&ShiftSymbol::zero(3)).is_empty());

        let (phi1, _) = heisenberg_symbols(0.7, 0.0, 1);
        assert_eq!(pullback_theta_inv(&phi1), phi1);
    }

    #[test]
    fn mu_heisenberg_two_magnons() {
        let (phi, psi) = heisenberg_symbols(1.0, 1.0, 2);
        for tau in [0.0, 0.1, 0.37, 0.5, 0.93] {
            let m = mu(FiberParameter::new(tau), &phi).unwrap();
            assert_eq!(m.labels(), &[2]);
            let e = Complex64::from_polar(1.0, 2.0 * PI * tau);
            assert!(close(m.get(&[1]), -2.0 * (e + 1.0)));
            assert!(close(m.get(&[-1]), -2.0 * (e.conj() + 1.0)));
            assert!(m.is_hermitian(1e-14));
        }
        let m0 = mu(FiberParameter::new(0.0), &psi).unwrap();
        assert!(close(m0.get(&[1]), c(4.0, 0.0)));
        assert!(close(m0.get(&[-1]), c(4.0, 0.0)));
        assert!(mu(FiberParameter::new(0.0), &ShiftSymbol::delta(1)).is_err());
    }

    #[test]
    fn mu_at_half_kills_the_heisenberg_hopping() {
        let (phi, _) = heisenberg_symbols(1.0, 1.0, 2);
        let m = mu(FiberParameter::new(0.5), &phi).unwrap();
        assert!(m.is_empty(), "{m:?}");
    }

    #[test]
    fn nu_two_magnon_band_function() {
        let (phi, _) = heisenberg_symbols(1.0, 1.0, 2);
        for (tau, taup) in [(0.0, 0.0), (0.2, 0.7), (0.5, 0.25), (0.9, 0.1)] {
            let m = mu(FiberParameter::new(tau), &phi).unwrap();
            let s = nu_j(2, FiberParameter::new(taup), &m).unwrap();
            assert_eq!(s.dim(), 0);
            let expected = -4.0 * (2.0 * PI * taup).cos() - 4.0 * (2.0 * PI * (tau - taup)).cos();
            assert!(close(s.get(&[]), c(expected, 0.0)), "{tau} {taup}: {:?}", s.get(&[]));
        }
    }

    #[test]
    fn nu_single_point_and_zero() {
        let s = ShiftSymbol::from_entries(2, [(vec![3, -2], c(1.5, -0.5))])
            .unwrap()
            .scaled_real(1.0);
        let mut relabeled = ShiftSymbol::with_labels(vec![2, 3]);
        for (p, v) in s.iter() {
            relabeled.add_entry(p.clone(), *v);
        }
        let out = nu_j(3, FiberParameter::new(0.0), &relabeled).unwrap();
        assert_eq!(out.labels(), &[2]);
        assert_eq!(out.get(&[3]), c(1.5, -0.5));
        assert_eq!(out.support_len(), 1);

        let zero = ShiftSymbol::with_labels(vec![2]);
        let out = nu_j(2, FiberParameter::new(0.3), &zero).unwrap();
        assert_eq!(out.get(&[]), c(0.0, 0.0));

        assert!(nu_j(4, FiberParameter::new(0.0), &relabeled).is_err());
    }

    #[test]
    fn full_fourier_examples() {
        let (phi, psi) = heisenberg_symbols(1.0, 1.0, 1);
        for tau in [0.0, 0.125, 0.5, 0.8] {
            let v = full_fourier(&phi, &[FiberParameter::new(tau)]).unwrap();
            assert!(close(v, c(-4.0 * (2.0 * PI * tau).cos(), 0.0)));
        }
        assert!(close(full_fourier(&psi, &[FiberParameter::new(0.0)]).unwrap(), c(4.0, 0.0)));
        assert_eq!(full_fourier(&ShiftSymbol::zero(2), &[0.3.into(), 0.1.into()]).unwrap(), c(0.0, 0.0));
        assert!(full_fourier(&phi, &[]).is_err());
    }

    #[test]
    fn fiber_parameter_reduces_mod_one() {
        assert_eq!(FiberParameter::new(1.0).value(), 0.0);
        assert!((FiberParameter::new(-0.25).value() - 0.75).abs() < 1e-15);
        assert!((FiberParameter::new(2.5).value() - 0.5).abs() < 1e-15);
        assert_eq!(FiberParameter::new(-1e-18).value(), 0.0);
    }

    #[test]
    fn cancellation_drops_entries() {
        let mut s = ShiftSymbol::zero(1);
        s.add_entry(vec![2], c(1.0, 0.0));
        s.add_entry(vec![3], c(5.0, 0.0));
        s.add_entry(vec![2], c(-1.0, 0.0));
        assert_eq!(s.support_len(), 1);
        assert_eq!(s.get(&[3]), c(5.0, 0.0));
    }

    #[test]
    fn text_format_round_trip() {
        let text = "# two-magnon hopping\n1 0 -2 0\n-1 0  -2 0 # left\n0 1 -2 0.5\n\n0 -1 -2 -0.5\n";
        let s = ShiftSymbol::parse(text).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.get(&[0, 1]), c(-2.0, 0.5));
        assert!(s.is_hermitian(0.0));
        assert_eq!(ShiftSymbol::parse(&s.to_text()).unwrap(), s);

        assert!(matches!(ShiftSymbol::parse("1 2 3\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(ShiftSymbol::parse("# nothing\n").is_err());
        assert!(ShiftSymbol::parse("x 1 0\n").is_err());
    }
}
