//! Laws of large numbers for rotated averages of column Fourier sums.
//!
//! With `D_{j,k}` the martingale differences of the field and
//! `Y_j = n_2^{-1/2} sum_k e^{i k t_2} D_{j,k}`, the rotated average
//! `n_1^{-1} sum_j e^{i j t_1} Y_j` (or its plain counterpart without the
//! rotation) should vanish in `L_1` as `n_1` grows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeShape;
use crate::models::FieldModel;
use crate::par::try_map_indexed;
use crate::projection::{difference_field, paired_series, pairing_halo};
use crate::rng::{make_stream, sample_innovations, StreamKey};
use crate::spectral::FrequencyPoint;
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rotation {
    /// Weights `e^{i j t_1}`.
    Fourier,
    /// Unit weights.
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnPoint {
    pub n1: usize,
    pub n2: usize,
    pub estimate: Estimate,
}

/// Monte Carlo estimates of `E|n_1^{-1} sum_{j=1}^{n_1} w_j Y_{n_2, j}|` along
/// the ladder of `n_1`. Ladder step `i`, replicate `r` uses
/// `key.replicate((i << 32) | r)`.
#[allow(clippy::too_many_arguments)]
pub fn lln_rotated_average(
    model: &FieldModel,
    t: &FrequencyPoint,
    n1_ladder: &[usize],
    n2: usize,
    replicates: u64,
    key: StreamKey,
    rotation: Rotation,
    parallel: bool,
) -> Result<Vec<LlnPoint>> {
    if t.dim() != 2 {
        return Err(Error::InvalidFrequency("the rotated average is defined for two-dimensional fields".into()));
    }
    if rotation == Rotation::Fourier {
        FrequencyPoint::new(vec![t.coords()[0]])?
            .ensure_generic()
            .map_err(|_| Error::NonGenericFrequency {
                coords: t.coords().to_vec(),
                reason: format!("rotation frequency t1 = {} is not generic", t.coords()[0]),
            })?;
    }
    if replicates < 2 {
        return Err(Error::InvalidPlan("need at least two replicates".into()));
    }
    let series = paired_series(model, t, model.halo())?;
    let halo = pairing_halo(model, &series);
    let (t1, t2) = (t.coords()[0], t.coords()[1]);
    n1_ladder
        .iter()
        .enumerate()
        .map(|(step, &n1)| {
            let shape = LatticeShape::new(vec![n1, n2])?;
            let col_phase: Vec<Complex64> = (1..=n2).map(|k| Complex64::from_polar(1.0, k as f64 * t2)).collect();
            let row_weight: Vec<Complex64> = (1..=n1)
                .map(|j| match rotation {
                    Rotation::Fourier => Complex64::from_polar(1.0, j as f64 * t1),
                    Rotation::Plain => Complex64::new(1.0, 0.0),
                })
                .collect();
            let samples = try_map_indexed(replicates, parallel, |r| {
                let k = key.replicate(((step as u64) << 32) | r);
                let xi = sample_innovations(&mut make_stream(k), model.innovation(), &shape, &[halo, halo])?;
                let d = difference_field(&series, &shape, &xi)?;
                let total: Complex64 = d
                    .chunks_exact(n2)
                    .zip(&row_weight)
                    .map(|(row, w)| w * row.iter().zip(&col_phase).map(|(x, p)| x * p).sum::<Complex64>())
                    .sum();
                Ok::<_, Error>(total.norm() / (n1 as f64 * (n2 as f64).sqrt()))
            })?;
            Ok(LlnPoint { n1, n2, estimate: Estimate::from_samples(&samples) })
        })
        .collect()
}
