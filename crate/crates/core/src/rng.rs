//! Replicable random streams and innovation lattices.
//!
//! Every draw is addressed by `(StreamKey, site)`: the ChaCha8 key is built
//! from the stream key and the block counter from the lattice site. The value
//! of the innovation at a site therefore does not depend on which window was
//! sampled, in which order replicates ran, or on which thread.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{strides, LatticeShape};

/// Sub-stream identifiers.
pub mod lanes {
    /// Innovations `xi_u` driving the field.
    pub const INNOVATIONS: u32 = 0;
    /// Anything else a check needs (e.g. independent comparison noise).
    pub const AUXILIARY: u32 = 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replicate_id: u64,
    pub lane: u32,
}

impl StreamKey {
    pub const fn new(master_seed: u64, replicate_id: u64, lane: u32) -> Self {
        Self { master_seed, replicate_id, lane }
    }

    /// Innovation stream of replicate `replicate_id`.
    pub const fn innovations(master_seed: u64, replicate_id: u64) -> Self {
        Self::new(master_seed, replicate_id, lanes::INNOVATIONS)
    }

    pub const fn with_lane(self, lane: u32) -> Self {
        Self { lane, ..self }
    }

    /// Key of the `offset`-th replicate counted from this one.
    pub const fn replicate(self, offset: u64) -> Self {
        Self { replicate_id: self.replicate_id.wrapping_add(offset), ..self }
    }

    fn seed_bytes(&self) -> [u8; 32] {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.replicate_id.to_le_bytes());
        seed[16..20].copy_from_slice(&self.lane.to_le_bytes());
        // domain tag so keys never coincide with a plain byte seed
        seed[24..32].copy_from_slice(b"latspec1");
        seed
    }
}

/// Coordinates must satisfy `|u_i| < SITE_BIAS`.
pub const SITE_BIAS: i64 = 1 << 20;
const SITE_BITS: u32 = 21;

/// Deterministic generator for one [`StreamKey`].
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

pub fn make_stream(key: StreamKey) -> RandomStream {
    RandomStream { rng: ChaCha8Rng::from_seed(key.seed_bytes()) }
}

impl RandomStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        word_to_open_unit(self.next_u64())
    }

    pub fn next_standard_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }

    /// Position the stream so the next word is the one owned by `site`.
    fn seek_site(&mut self, site: &[i64]) -> Result<()> {
        let code = site_code(site)?;
        self.rng.set_word_pos(u128::from(code) * 2);
        Ok(())
    }
}

fn site_code(site: &[i64]) -> Result<u64> {
    let mut code = 0u64;
    for &u in site {
        if u.abs() >= SITE_BIAS {
            return Err(Error::InvalidShape(format!(
                "site coordinate {u} exceeds the addressable range ±{SITE_BIAS}"
            )));
        }
        code = (code << SITE_BITS) | (u + SITE_BIAS) as u64;
    }
    Ok(code)
}

fn word_to_open_unit(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9). Frozen: changing it changes every stream.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Marginal law of the i.i.d. innovations `xi_u`. All laws are centered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "kebab-case", deny_unknown_fields)]
#[derive(Default)]
pub enum InnovationSpec {
    #[default]
    StandardNormal,
    Rademacher,
    CenteredUniform { half_width: f64 },
}


impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CenteredUniform { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                Err(Error::Config(format!("uniform half_width must be positive, got {half_width}")))
            }
            _ => Ok(()),
        }
    }

    /// `sigma^2 = E xi^2`.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::StandardNormal | Self::Rademacher => 1.0,
            Self::CenteredUniform { half_width } => half_width * half_width / 3.0,
        }
    }

    /// Map one random word to one innovation.
    fn draw(&self, word: u64) -> f64 {
        match *self {
            Self::StandardNormal => inverse_normal_cdf(word_to_open_unit(word)),
            Self::Rademacher => {
                if word >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::CenteredUniform { half_width } => half_width * (2.0 * word_to_open_unit(word) - 1.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::StandardNormal => "standard-normal",
            Self::Rademacher => "rademacher",
            Self::CenteredUniform { .. } => "centered-uniform",
        }
    }
}

/// Innovations over the box `lo <= u < lo + extents`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationLattice {
    spec: InnovationSpec,
    lo: Vec<i64>,
    extents: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl InnovationLattice {
    /// Sample the box with lower corner `lo` and the given extents.
    pub fn sample_window(
        stream: &mut RandomStream,
        spec: InnovationSpec,
        lo: &[i64],
        extents: &[usize],
    ) -> Result<Self> {
        if lo.len() != extents.len() || extents.is_empty() {
            return Err(Error::InvalidShape("window corner and extents differ in dimension".into()));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidShape("window extent is zero".into()));
        }
        for (&l, &n) in lo.iter().zip(extents) {
            site_code(&[l])?;
            site_code(&[l + n as i64 - 1])?;
        }
        let dim = extents.len();
        let row_len = extents[dim - 1];
        let rows: usize = extents[..dim - 1].iter().product();
        let mut values = Vec::with_capacity(rows * row_len);
        let mut site = lo.to_vec();
        for row in 0..rows {
            let mut rest = row;
            for axis in (0..dim - 1).rev() {
                site[axis] = lo[axis] + (rest % extents[axis]) as i64;
                rest /= extents[axis];
            }
            site[dim - 1] = lo[dim - 1];
            stream.seek_site(&site)?;
            values.extend((0..row_len).map(|_| spec.draw(stream.next_u64())));
        }
        Ok(Self { spec, lo: lo.to_vec(), strides: strides(extents), extents: extents.to_vec(), values })
    }

    pub fn spec(&self) -> InnovationSpec {
        self.spec
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
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

    pub fn offset_of(&self, site: &[i64]) -> Option<usize> {
        if site.len() != self.lo.len() {
            return None;
        }
        let mut offset = 0usize;
        for (((&s, &lo), &n), &stride) in site.iter().zip(&self.lo).zip(&self.extents).zip(&self.strides) {
            let rel = s - lo;
            if rel < 0 || rel as usize >= n {
                return None;
            }
            offset += rel as usize * stride;
        }
        Some(offset)
    }

    pub fn get(&self, site: &[i64]) -> Option<f64> {
        self.offset_of(site).map(|k| self.values[k])
    }

    /// Like [`get`](Self::get) but reports the missing site.
    pub fn value(&self, site: &[i64]) -> Result<f64> {
        self.get(site).ok_or_else(|| Error::MissingInnovation { site: site.to_vec() })
    }

    /// Does the window contain the box `lo <= u < lo + extents`?
    pub fn covers(&self, lo: &[i64], extents: &[usize]) -> bool {
        lo.len() == self.lo.len()
            && (0..lo.len()).all(|a| {
                lo[a] >= self.lo[a] && lo[a] + extents[a] as i64 <= self.lo[a] + self.extents[a] as i64
            })
    }
}

/// I.i.d. innovations over the grid `1 <= u <= n` widened by `halo[i]` on both
/// sides of axis `i`.
pub fn sample_innovations(
    stream: &mut RandomStream,
    spec: InnovationSpec,
    shape: &LatticeShape,
    halo: &[usize],
) -> Result<InnovationLattice> {
    if halo.len() != shape.dim() {
        return Err(Error::InvalidShape(format!(
            "halo has {} axes but shape has {}",
            halo.len(),
            shape.dim()
        )));
    }
    let lo: Vec<i64> = halo.iter().map(|&h| 1 - h as i64).collect();
    let extents: Vec<usize> = shape.extents().iter().zip(halo).map(|(&n, &h)| n + 2 * h).collect();
    InnovationLattice::sample_window(stream, spec, &lo, &extents)
}
