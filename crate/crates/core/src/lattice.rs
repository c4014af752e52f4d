//! Rectangular index sets `1 <= u <= n` in up to three dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Extents `n = (n_1, ..., n_d)` of the observation window `1 <= u <= n`.
///
/// Storage order everywhere in the crate is row-major: the last axis varies
/// fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LatticeShape {
    extents: Vec<usize>,
}

impl LatticeShape {
    pub fn new(extents: impl Into<Vec<usize>>) -> Result<Self> {
        let extents = extents.into();
        if extents.is_empty() || extents.len() > MAX_DIM {
            return Err(Error::InvalidShape(format!(
                "dimension must be between 1 and {MAX_DIM}, got {}",
                extents.len()
            )));
        }
        if let Some(axis) = extents.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("extent of axis {} is zero", axis + 1)));
        }
        Ok(Self { extents })
    }

    /// Cube `(n, ..., n)` in `dim` dimensions.
    pub fn cube(dim: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Number of sites `n_1 * ... * n_d`.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.extents)
    }

    /// Flat position of the 1-based site `u`, if it lies in the window.
    pub fn offset_of(&self, site: &[i64]) -> Option<usize> {
        if site.len() != self.dim() {
            return None;
        }
        let mut offset = 0usize;
        for (&u, &n) in site.iter().zip(&self.extents) {
            if u < 1 || u as usize > n {
                return None;
            }
            offset = offset * n + (u as usize - 1);
        }
        Some(offset)
    }

    /// 1-based site at flat position `offset`.
    pub fn site_of(&self, mut offset: usize) -> Vec<i64> {
        let mut site = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.extents[axis];
            site[axis] = (offset % n) as i64 + 1;
            offset /= n;
        }
        site
    }

    /// All sites in storage order.
    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |k| self.site_of(k))
    }
}

impl TryFrom<Vec<usize>> for LatticeShape {
    type Error = Error;

    fn try_from(extents: Vec<usize>) -> Result<Self> {
        Self::new(extents)
    }
}

impl From<LatticeShape> for Vec<usize> {
    fn from(shape: LatticeShape) -> Self {
        shape.extents
    }
}

impl std::fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.extents.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

pub(crate) fn strides(extents: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; extents.len()];
    for axis in (0..extents.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * extents[axis + 1];
    }
    strides
}

/// Sup norm `|j|_inf` of an integer vector.
pub fn sup_norm(lag: &[i64]) -> i64 {
    lag.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Every integer vector in the box `|j|_inf <= radius` of the given dimension,
/// in lexicographic order.
pub fn box_sites(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let side = (2 * radius + 1) as usize;
    let count = side.pow(dim as u32);
    (0..count)
        .map(|mut k| {
            let mut site = vec![0i64; dim];
            for axis in (0..dim).rev() {
                site[axis] = (k % side) as i64 - radius;
                k /= side;
            }
            site
        })
        .collect()
}
