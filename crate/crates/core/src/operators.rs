//! Finite compressions of Toeplitz operators `T^E_φ`, potentials `V^E_ψ`,
//! Cayley-graph Laplacians and the direct magnon hopping operator.
//!
//! A compression is the principal submatrix of the infinite operator on a
//! finite [`IndexSet`]. Matrix elements are exact: `⟨δ_ξ, T^E_φ δ_ξ'⟩ = φ(ξ - ξ')`,
//! and the potential diagonal uses membership in the infinite set `E`, never
//! in the window. All truncation error therefore shows up in spectra, not in
//! matrix elements.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{enumerate_box, gap_tuples, is_strictly_increasing, TruncationBox, DEFAULT_SIZE_CAP};
use crate::symbols::ShiftSymbol;

/// Largest index set that is assembled as a dense matrix.
pub const DENSE_LIMIT: usize = 4000;

/// Relative tolerance for the Hermiticity check on assembled matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// The subset `E` of the group the operators are compressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeDomain {
    /// `Z^N_<`, points stored as ordered configurations `(x_1, …, x_N)`.
    FullOrdered { n: usize },
    /// `(N*)^d`, points are gap tuples `(z_2, …, z_{d+1})`.
    Fiber { dim: usize },
    /// All of `Z^d`.
    WholeGroup { dim: usize },
    /// `Z_{l1} × (N*)^{N-1}`: gap picture with the first coordinate periodized.
    RingCrossFiber { n: usize, l1: i64 },
}

impl LatticeDomain {
    pub fn dim(&self) -> usize {
        match *self {
            Self::FullOrdered { n } | Self::RingCrossFiber { n, .. } => n,
            Self::Fiber { dim } | Self::WholeGroup { dim } => dim,
        }
    }

    /// Membership in the infinite set `E` (after ring reduction).
    pub fn contains(&self, p: &[i64]) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match *self {
            Self::FullOrdered { .. } => is_strictly_increasing(p),
            Self::Fiber { .. } => p.iter().all(|&z| z >= 1),
            Self::WholeGroup { .. } => true,
            Self::RingCrossFiber { l1, .. } => (0..l1).contains(&p[0]) && p[1..].iter().all(|&z| z >= 1),
        }
    }

    /// Brings a group element to its canonical representative.
    pub fn reduce(&self, p: &mut [i64]) {
        if let Self::RingCrossFiber { l1, .. } = *self {
            p[0] = p[0].rem_euclid(l1);
        }
    }

    /// The gap `y_j - y_{j-1}` (equivalently `z_j`) of a point, `j` counted
    /// from 1 as in the full problem. `None` when the domain has no such gap.
    pub fn gap(&self, p: &[i64], j: usize) -> Option<i64> {
        match *self {
            Self::FullOrdered { n } if (2..=n).contains(&j) => Some(p[j - 1] - p[j - 2]),
            Self::Fiber { dim } if (2..=dim + 1).contains(&j) => Some(p[j - 2]),
            Self::RingCrossFiber { n, .. } if (2..=n).contains(&j) => Some(p[j - 1]),
            _ => None,
        }
    }

    /// Distance of a point to the boundary of `E` measured in gaps:
    /// `min_j (z_j - 1)`. Zero for domains without gaps.
    pub fn boundary_distance(&self, p: &[i64]) -> i64 {
        let hi = match *self {
            Self::FullOrdered { n } | Self::RingCrossFiber { n, .. } => n,
            Self::Fiber { dim } => dim + 1,
            Self::WholeGroup { .. } => return 0,
        };
        (2..=hi).filter_map(|j| self.gap(p, j)).map(|g| g - 1).min().unwrap_or(0)
    }
}

/// Enumerated finite window inside a [`LatticeDomain`].
#[derive(Debug, Clone)]
pub struct IndexSet {
    domain: LatticeDomain,
    points: Vec<Vec<i64>>,
    lookup: HashMap<Vec<i64>, usize>,
}

impl IndexSet {
    pub fn new(domain: LatticeDomain, points: Vec<Vec<i64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("index set"));
        }
        if points.len() > DEFAULT_SIZE_CAP {
            return Err(Error::TooLarge { size: points.len(), cap: DEFAULT_SIZE_CAP });
        }
        let mut lookup = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !domain.contains(p) {
                return Err(Error::InvalidConfig(format!("{p:?} is not a point of {domain:?}")));
            }
            if lookup.insert(p.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("{p:?} listed twice")));
            }
        }
        Ok(Self { domain, points, lookup })
    }

    /// Ordered configurations of a full box, or gap tuples of a fiber box.
    pub fn from_box(b: &TruncationBox) -> Result<Self> {
        let domain = match b.first_range {
            Some(_) => LatticeDomain::FullOrdered { n: b.n },
            None => LatticeDomain::Fiber { dim: b.n - 1 },
        };
        Self::new(domain, enumerate_box(b)?)
    }

    /// Fiber window `{1, …, gap_max}^dim`.
    pub fn fiber(dim: usize, gap_max: i64) -> Result<Self> {
        if dim == 0 {
            return Self::new(LatticeDomain::Fiber { dim: 0 }, vec![Vec::new()]);
        }
        Self::from_box(&TruncationBox::fiber(dim + 1, gap_max))
    }

    /// Product of integer intervals in `Z^d`, lexicographic.
    pub fn whole_group(ranges: &[std::ops::RangeInclusive<i64>]) -> Result<Self> {
        let mut points: Vec<Vec<i64>> = vec![Vec::new()];
        for r in ranges {
            if r.is_empty() {
                return Err(Error::InvalidConfig(format!("empty range {r:?}")));
            }
            let mut next = Vec::with_capacity(points.len() * (r.end() - r.start() + 1) as usize);
            for p in &points {
                for x in r.clone() {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            points = next;
            if points.len() > DEFAULT_SIZE_CAP {
                return Err(Error::TooLarge { size: points.len(), cap: DEFAULT_SIZE_CAP });
            }
        }
        Self::new(LatticeDomain::WholeGroup { dim: ranges.len() }, points)
    }

    /// `Z_{l1} × {1, …, gap_max}^{n-1}` in gap coordinates.
    pub fn ring_cross_fiber(n: usize, l1: i64, gap_max: i64) -> Result<Self> {
        if n < 1 || l1 < 1 || gap_max < 1 {
            return Err(Error::InvalidConfig(format!(
                "ring box needs n >= 1, l1 >= 1, gap_max >= 1 (got {n}, {l1}, {gap_max})"
            )));
        }
        let gaps = gap_tuples(n - 1, gap_max);
        let mut points = Vec::with_capacity(l1 as usize * gaps.len());
        for z1 in 0..l1 {
            for g in &gaps {
                let mut p = vec![z1];
                p.extend_from_slice(g);
                points.push(p);
            }
        }
        Self::new(LatticeDomain::RingCrossFiber { n, l1 }, points)
    }

    pub fn domain(&self) -> LatticeDomain {
        self.domain
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        self.lookup.get(p).copied()
    }

    /// `ξ - η` reduced into the domain's canonical form.
    fn shifted(&self, xi: &[i64], eta: &[i64]) -> Vec<i64> {
        let mut p: Vec<i64> = xi.iter().zip(eta).map(|(x, e)| x - e).collect();
        self.domain.reduce(&mut p);
        p
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::default(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                m.data[i * n + k] = f(i, k);
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_fn(rows.len(), |i, k| Complex64::new(rows[i][k], 0.0))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.data[i * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, v: Complex64) {
        self.data[i * self.n + k] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, k: usize, v: Complex64) {
        self.data[i * self.n + k] += v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |A_ik - conj(A_ki)|` relative to `max |A_ik|` (absolute when `A = 0`).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in i..self.n {
                worst = worst.max((self.get(i, k) - self.get(k, i).conj()).norm());
            }
        }
        let scale = self.max_abs();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    pub fn matvec(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(f).map(|(a, x)| a * x).sum()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    /// Principal submatrix on the given rows/columns.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, k| self.get(idx[i], idx[k]))
    }

    /// Writes `i k re im` triplets (0-based, row-major) for the nonzero entries.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            for k in 0..self.n {
                let v = self.get(i, k);
                if v.re != 0.0 || v.im != 0.0 {
                    writeln!(out, "{i} {k} {:.16e} {:.16e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// A finite Hermitian compression together with the lattice points it lives on.
#[derive(Debug, Clone)]
pub struct CompressedOperator {
    pub index: Arc<IndexSet>,
    pub matrix: DenseMatrix,
    pub label: String,
}

impl CompressedOperator {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn domain(&self) -> LatticeDomain {
        self.index.domain()
    }

    /// Entrywise sum; both operators must live on the same index set.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.index.points() != other.index.points() {
            return Err(Error::InvalidConfig("operators live on different index sets".into()));
        }
        Ok(Self {
            index: Arc::clone(&self.index),
            matrix: self.matrix.add(&other.matrix),
            label: format!("{} + {}", self.label, other.label),
        })
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let d = self.matrix.hermitian_defect();
        if d > HERMITIAN_TOL {
            return Err(Error::NotHermitian(d));
        }
        Ok(())
    }

    /// `max_i |A_ii| + Σ_{k≠i} |A_ik|`, an upper bound on the spectral radius.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.size())
            .map(|i| self.matrix.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn check_dim(symbol: &ShiftSymbol, index: &IndexSet) -> Result<()> {
    if symbol.dim() != index.domain().dim() {
        return Err(Error::DimensionMismatch { expected: index.domain().dim(), got: symbol.dim() });
    }
    Ok(())
}

fn check_dense(index: &IndexSet) -> Result<()> {
    if index.len() > DENSE_LIMIT {
        return Err(Error::DenseLimit { size: index.len(), limit: DENSE_LIMIT });
    }
    Ok(())
}

/// `T^E_φ` compressed: entry `(i, k)` is `φ(ξ_i - ξ_k)`.
pub fn compress_toeplitz(phi: &ShiftSymbol, index: &Arc<IndexSet>) -> Result<CompressedOperator> {
    check_dim(phi, index)?;
    check_dense(index)?;
    let mut m = DenseMatrix::zeros(index.len());
    for (i, xi) in index.points().iter().enumerate() {
        for (eta, v) in phi.iter() {
            if let Some(k) = index.index_of(&index.shifted(xi, eta)) {
                m.add_at(i, k, *v);
            }
        }
    }
    Ok(CompressedOperator { index: Arc::clone(index), matrix: m, label: "toeplitz".into() })
}

/// Diagonal of `V^E_ψ`: `Σ_η ψ(η) [ξ - η ∈ E]` at every window point.
pub fn potential_diagonal(psi: &ShiftSymbol, index: &IndexSet) -> Result<Vec<Complex64>> {
    check_dim(psi, index)?;
    let domain = index.domain();
    Ok(index
        .points()
        .iter()
        .map(|xi| {
            psi.iter()
                .filter(|(eta, _)| domain.contains(&index.shifted(xi, eta)))
                .map(|(_, v)| *v)
                .sum()
        })
        .collect())
}

pub fn compress_potential(psi: &ShiftSymbol, index: &Arc<IndexSet>) -> Result<CompressedOperator> {
    check_dense(index)?;
    let diag = potential_diagonal(psi, index)?;
    let mut m = DenseMatrix::zeros(index.len());
    for (i, v) in diag.into_iter().enumerate() {
        m.set(i, i, v);
    }
    Ok(CompressedOperator { index: Arc::clone(index), matrix: m, label: "potential".into() })
}

/// Laplacian of the subgraph of the Cayley graph `(Z^d, M)` induced by `E`:
/// `(Δf)(ξ) = Σ_{η ∈ M, ξ-η ∈ E} [f(ξ-η) - f(ξ)]`.
///
/// Built by walking graph edges, independently of the Toeplitz constructors.
pub fn cayley_laplacian(generators: &ShiftSymbol, index: &Arc<IndexSet>) -> Result<CompressedOperator> {
    check_dim(generators, index)?;
    check_dense(index)?;
    let moves: HashSet<Vec<i64>> = generators.iter().map(|(p, _)| p.clone()).collect();
    if moves.iter().any(|p| !moves.contains(&p.iter().map(|x| -x).collect::<Vec<_>>())) {
        return Err(Error::NotSymmetric);
    }
    if moves.iter().any(|p| p.iter().all(|&x| x == 0)) {
        return Err(Error::InvalidConfig("generating set contains the origin".into()));
    }
    let domain = index.domain();
    let n = index.len();
    let mut lap = DenseMatrix::zeros(n);
    for (i, vertex) in index.points().iter().enumerate() {
        let mut degree = 0i64;
        for step in &moves {
            let mut nb: Vec<i64> = vertex.iter().zip(step).map(|(v, s)| v - s).collect();
            domain.reduce(&mut nb);
            if !domain.contains(&nb) {
                continue;
            }
            degree += 1;
            if let Some(k) = index.index_of(&nb) {
                lap.add_at(i, k, Complex64::new(1.0, 0.0));
            }
        }
        lap.add_at(i, i, Complex64::new(-(degree as f64), 0.0));
    }
    Ok(CompressedOperator { index: Arc::clone(index), matrix: lap, label: "cayley laplacian".into() })
}

/// The `N`-magnon XXZ Hamiltonian assembled directly from its hopping rule:
/// every occupied site `x` with an empty neighbour `y = x ± 1` contributes
/// `-2a` towards the configuration with `x` moved to `y`, and `+2b` on the
/// diagonal.
pub fn build_heisenberg_direct(n: usize, a: f64, b: f64, bx: &TruncationBox) -> Result<CompressedOperator> {
    if n != bx.n || bx.first_range.is_none() {
        return Err(Error::InvalidConfig("direct Hamiltonian needs a full box of matching N".into()));
    }
    let index = Arc::new(IndexSet::from_box(bx)?);
    check_dense(&index)?;
    let mut h = DenseMatrix::zeros(index.len());
    for (i, config) in index.points().iter().enumerate() {
        let occupied: HashSet<i64> = config.iter().copied().collect();
        for &x in config {
            for y in [x - 1, x + 1] {
                if occupied.contains(&y) {
                    continue;
                }
                h.add_at(i, i, Complex64::new(2.0 * b, 0.0));
                let mut hopped: Vec<i64> = config.iter().map(|&s| if s == x { y } else { s }).collect();
                hopped.sort_unstable();
                if let Some(k) = index.index_of(&hopped) {
                    h.add_at(i, k, Complex64::new(-2.0 * a, 0.0));
                }
            }
        }
    }
    Ok(CompressedOperator { index, matrix: h, label: format!("heisenberg direct N={n} a={a} b={b}") })
}

/// Matrix-free `T^E_φ + V^E_ψ` on an index set.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub toeplitz: ShiftSymbol,
    pub potential: ShiftSymbol,
    pub index: Arc<IndexSet>,
    diagonal: Vec<Complex64>,
    // (target index, amplitude) per row
    hops: Vec<Vec<(usize, Complex64)>>,
}

impl OperatorSpec {
    pub fn new(toeplitz: ShiftSymbol, potential: ShiftSymbol, index: Arc<IndexSet>) -> Result<Self> {
        check_dim(&toeplitz, &index)?;
        let diagonal = potential_diagonal(&potential, &index)?;
        let hops = index
            .points()
            .iter()
            .map(|xi| {
                toeplitz
                    .iter()
                    .filter_map(|(eta, v)| index.index_of(&index.shifted(xi, eta)).map(|k| (k, *v)))
                    .collect()
            })
            .collect();
        Ok(Self { toeplitz, potential, index, diagonal, hops })
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: f.len() });
        }
        let mut out = vec![Complex64::default(); f.len()];
        self.apply_into(f, &mut out);
        Ok(out)
    }

    /// `out = (T + V) f`, lengths assumed to match.
    pub fn apply_into(&self, f: &[Complex64], out: &mut [Complex64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = self.diagonal[i] * f[i];
            for &(k, v) in &self.hops[i] {
                acc += v * f[k];
            }
            *slot = acc;
        }
    }

    pub fn assemble(&self) -> Result<CompressedOperator> {
        compress_toeplitz(&self.toeplitz, &self.index)?.plus(&compress_potential(&self.potential, &self.index)?)
    }

    /// `max_ξ |V(ξ)| + Σ_η |φ(η)|`.
    pub fn gershgorin_bound(&self) -> f64 {
        let diag = self.diagonal.iter().map(|v| v.norm()).fold(0.0, f64::max);
        diag + self.toeplitz.l1_norm()
    }
}

/// Zeroes the entries whose lattice point fails `keep`.
pub fn indicator_project<F>(index: &IndexSet, keep: F, f: &[Complex64]) -> Vec<Complex64>
where
    F: Fn(&[i64]) -> bool,
{
    index
        .points()
        .iter()
        .zip(f)
        .map(|(p, v)| if keep(p) { *v } else { Complex64::default() })
        .collect()
}
