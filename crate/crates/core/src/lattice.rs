//! Points of the strictly ordered lattice `Z^N_<`, the gap-coordinate
//! picture `Z × (N*)^{N-1}` obtained from it, and finite windows on both.
//!
//! The map [`theta`] sends `(x_1, …, x_N)` to `(x_1, x_2 - x_1, …, x_N - x_{N-1})`.
//! It is a group automorphism of `Z^N` carrying the ordered configurations
//! exactly onto the tuples whose trailing entries are all at least one.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Largest index set [`enumerate_box`] will produce unless told otherwise.
pub const DEFAULT_SIZE_CAP: usize = 200_000;

/// A strictly increasing integer tuple `x_1 < … < x_N`.
///
/// Doubles as a finite `N`-element subset of `Z` (the support of a magnon
/// configuration).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedConfig(Vec<i64>);

impl OrderedConfig {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidConfig("ordered configuration needs N >= 1".into()));
        }
        if !is_strictly_increasing(&coords) {
            return Err(Error::InvalidConfig(format!("{coords:?} is not strictly increasing")));
        }
        Ok(Self(coords))
    }

    /// Builds a configuration from an unordered set of distinct sites.
    pub fn from_sites(mut sites: Vec<i64>) -> Result<Self> {
        sites.sort_unstable();
        Self::new(sites)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }
}

/// A point `(z_1, …, z_N)` of `Z × (N*)^{N-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapCoord(Vec<i64>);

impl GapCoord {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidConfig("gap coordinate needs N >= 1".into()));
        }
        if coords[1..].iter().any(|&z| z < 1) {
            return Err(Error::InvalidConfig(format!("{coords:?} has a gap below 1")));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }
}

pub fn is_strictly_increasing(xs: &[i64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// `θ(y_1, …, y_N) = (y_1, y_2 - y_1, …, y_N - y_{N-1})` on plain tuples.
pub fn theta_raw(ys: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(ys.len());
    if let Some(&first) = ys.first() {
        out.push(first);
    }
    out.extend(ys.windows(2).map(|w| w[1] - w[0]));
    out
}

/// `θ^{-1}(z_1, …, z_N) = (z_1, z_1 + z_2, …, z_1 + … + z_N)` on plain tuples.
pub fn theta_inv_raw(zs: &[i64]) -> Vec<i64> {
    zs.iter()
        .scan(0i64, |acc, &z| {
            *acc += z;
            Some(*acc)
        })
        .collect()
}

pub fn theta(xi: &OrderedConfig) -> GapCoord {
    GapCoord(theta_raw(&xi.0))
}

pub fn theta_inv(zeta: &GapCoord) -> OrderedConfig {
    OrderedConfig(theta_inv_raw(&zeta.0))
}

/// Finite window in gap coordinates.
///
/// With `first_range` set the window is `{z : z_1 ∈ first_range, 1 ≤ z_j ≤ gap_max}`
/// and enumerates ordered configurations; without it the window is the fiber
/// index set `{1, …, gap_max}^{N-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationBox {
    pub n: usize,
    pub first_range: Option<RangeInclusive<i64>>,
    pub gap_max: i64,
}

impl TruncationBox {
    pub fn full(n: usize, first_range: RangeInclusive<i64>, gap_max: i64) -> Self {
        Self { n, first_range: Some(first_range), gap_max }
    }

    pub fn fiber(n: usize, gap_max: i64) -> Self {
        Self { n, first_range: None, gap_max }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("box dimension N must be >= 1".into()));
        }
        if self.gap_max < 1 {
            return Err(Error::InvalidConfig(format!("gap_max {} must be >= 1", self.gap_max)));
        }
        if let Some(r) = &self.first_range {
            if r.is_empty() {
                return Err(Error::InvalidConfig(format!("empty z_1 range {r:?}")));
            }
        } else if self.n < 2 {
            return Err(Error::InvalidConfig("fiber boxes need N >= 2".into()));
        }
        Ok(())
    }

    /// Number of points the box enumerates, saturating on overflow.
    pub fn size(&self) -> usize {
        let gaps = (self.gap_max.max(0) as usize)
            .checked_pow((self.n.saturating_sub(1)) as u32)
            .unwrap_or(usize::MAX);
        match &self.first_range {
            Some(r) => {
                let width = (r.end() - r.start() + 1).max(0) as usize;
                width.saturating_mul(gaps)
            }
            None => gaps,
        }
    }
}

/// All tuples of `{1, …, max}^dim` in lexicographic order.
pub(crate) fn gap_tuples(dim: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if max < 1 {
        return out;
    }
    let mut cur = vec![1i64; dim];
    loop {
        out.push(cur.clone());
        // odometer, last coordinate fastest
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < max {
                cur[k] += 1;
                break;
            }
            cur[k] = 1;
        }
    }
}

pub fn enumerate_box(b: &TruncationBox) -> Result<Vec<Vec<i64>>> {
    enumerate_box_capped(b, DEFAULT_SIZE_CAP)
}

/// Lexicographic (in gap coordinates) enumeration of a box.
///
/// Full boxes yield ordered configurations `θ^{-1}(z)`, fiber boxes yield the
/// gap tuples `(z_2, …, z_N)` themselves.
pub fn enumerate_box_capped(b: &TruncationBox, cap: usize) -> Result<Vec<Vec<i64>>> {
    b.validate()?;
    let size = b.size();
    if size > cap {
        return Err(Error::TooLarge { size, cap });
    }
    let gaps = gap_tuples(b.n - 1, b.gap_max);
    match &b.first_range {
        None => Ok(gaps),
        Some(r) => {
            let mut out = Vec::with_capacity(size);
            for z1 in r.clone() {
                for g in &gaps {
                    let mut z = Vec::with_capacity(b.n);
                    z.push(z1);
                    z.extend_from_slice(g);
                    out.push(theta_inv_raw(&z));
                }
            }
            Ok(out)
        }
    }
}

/// `Ω_j(n) = {y ∈ Z^N_< : y_j - y_{j-1} ≥ n}`, with `j` counted from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaRegion {
    pub j: usize,
    pub n: i64,
}

pub fn region_omega(big_n: usize, j: usize, n: i64) -> Result<OmegaRegion> {
    if big_n < 2 || j < 2 || j > big_n {
        return Err(Error::IndexOutOfRange { j, lo: 2, hi: big_n });
    }
    Ok(OmegaRegion { j, n })
}

impl OmegaRegion {
    pub fn contains(&self, xi: &OrderedConfig) -> bool {
        let x = xi.coords();
        x[self.j - 1] - x[self.j - 2] >= self.n
    }

    /// Same predicate read in gap coordinates: `z_j ≥ n`.
    pub fn contains_gap(&self, zeta: &GapCoord) -> bool {
        zeta.coords()[self.j - 1] >= self.n
    }
}
