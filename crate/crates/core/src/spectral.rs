//! Fourier sums, periodograms, Fejér kernels and covariance-series densities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{box_sites, LatticeShape, MAX_DIM};
use crate::models::{analytic_covariance, dot, FieldModel, LatticeSample};
use crate::numeric::{CompensatedSum, ComplexCompensatedSum};

const TWO_PI: f64 = 2.0 * PI;

/// Coordinates closer than this to `p*pi/q` (with `q <= GENERIC_MAX_DENOMINATOR`)
/// are treated as lying in the exceptional set of the almost-everywhere limit
/// theorems.
pub const GENERIC_TOLERANCE: f64 = 1e-6;
pub const GENERIC_MAX_DENOMINATOR: i64 = 12;

/// Default generic frequencies in two dimensions. Coordinates are drawn from
/// `1.0`, `sqrt(2) - 0.3`, `pi / golden^2` and a few other irrational values.
pub const GENERIC_FREQUENCIES_2D: [[f64; 2]; 5] = [
    [1.0, 1.114_213_562_373_095],
    [1.114_213_562_373_095, -1.1999816148643266],
    [-1.1999816148643266, 1.0],
    [2.23606797749979, 0.5772156649015329],
    [-0.5772156649015329, -2.23606797749979],
];

/// A frequency `t` in `[-pi, pi)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyPoint {
    coords: Vec<f64>,
    generic: bool,
}

impl FrequencyPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidFrequency(format!(
                "frequency must have 1 to {MAX_DIM} coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(x) = coords.iter().find(|x| !(x.is_finite() && (-PI..PI).contains(*x))) {
            return Err(Error::InvalidFrequency(format!("coordinate {x} is outside [-pi, pi)")));
        }
        let generic = coords.iter().all(|&x| non_generic_reason(x).is_none());
        Ok(Self { coords, generic })
    }

    /// Like [`new`](Self::new) but refuses points in the exceptional set.
    pub fn generic(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let point = Self::new(coords)?;
        point.ensure_generic()?;
        Ok(point)
    }

    /// Wrap arbitrary real coordinates into `[-pi, pi)`.
    pub fn wrapped(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| wrap_angle(x)).collect::<Vec<_>>())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_generic(&self) -> bool {
        self.generic
    }

    pub fn ensure_generic(&self) -> Result<()> {
        for &x in &self.coords {
            if let Some(reason) = non_generic_reason(x) {
                return Err(Error::NonGenericFrequency { coords: self.coords.clone(), reason });
            }
        }
        Ok(())
    }

    pub fn negated(&self) -> Self {
        Self::wrapped(&self.coords.iter().map(|x| -x).collect::<Vec<_>>()).expect("finite")
    }
}

impl TryFrom<Vec<f64>> for FrequencyPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<FrequencyPoint> for Vec<f64> {
    fn from(t: FrequencyPoint) -> Self {
        t.coords
    }
}

fn non_generic_reason(x: f64) -> Option<String> {
    (1..=GENERIC_MAX_DENOMINATOR).find_map(|q| {
        let p = (x * q as f64 / PI).round();
        ((x - p * PI / q as f64).abs() < GENERIC_TOLERANCE).then(|| {
            if p == 0.0 {
                "coordinate is zero".to_string()
            } else {
                format!("coordinate {x} is within {GENERIC_TOLERANCE} of {p}*pi/{q}")
            }
        })
    })
}

/// Reduce an angle to `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TWO_PI) - PI;
    if y >= PI {
        y - TWO_PI
    } else {
        y
    }
}

/// `S_n(t)` together with what it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSum {
    pub value: Complex64,
    pub shape: LatticeShape,
    pub t: FrequencyPoint,
}

/// Phases `e^{i u t}` for `u = 1..=n`, computed directly for each `u`.
fn axis_phases(n: usize, t: f64) -> Vec<Complex64> {
    (1..=n).map(|u| Complex64::from_polar(1.0, u as f64 * t)).collect()
}

/// `S_n(t) = sum_{1 <= u <= n} e^{i u.t} X_u` by direct compensated summation.
pub fn fourier_sum_values(values: &[f64], shape: &LatticeShape, t: &FrequencyPoint) -> Complex64 {
    assert_eq!(values.len(), shape.len(), "values do not fill the shape");
    assert_eq!(shape.dim(), t.dim(), "frequency dimension does not match the shape");
    let phases: Vec<Vec<Complex64>> =
        shape.extents().iter().zip(t.coords()).map(|(&n, &x)| axis_phases(n, x)).collect();
    let ext = shape.extents();
    let mut acc = ComplexCompensatedSum::new();
    match shape.dim() {
        1 => {
            for (x, p) in values.iter().zip(&phases[0]) {
                acc.add(p * x);
            }
        }
        2 => {
            for (r, row) in values.chunks_exact(ext[1]).enumerate() {
                let pr = phases[0][r];
                for (x, p) in row.iter().zip(&phases[1]) {
                    acc.add(pr * p * x);
                }
            }
        }
        _ => {
            let plane = ext[1] * ext[2];
            for (a, slab) in values.chunks_exact(plane).enumerate() {
                for (b, row) in slab.chunks_exact(ext[2]).enumerate() {
                    let pab = phases[0][a] * phases[1][b];
                    for (x, p) in row.iter().zip(&phases[2]) {
                        acc.add(pab * p * x);
                    }
                }
            }
        }
    }
    acc.value()
}

pub fn fourier_sum(sample: &LatticeSample, t: &FrequencyPoint) -> FourierSum {
    FourierSum { value: fourier_sum_values(&sample.values, &sample.shape, t), shape: sample.shape.clone(), t: t.clone() }
}

/// `S_n` at every Fourier frequency `(2 pi k_1 / n_1, ..., 2 pi k_d / n_d)`,
/// `0 <= k < n`, stored row-major in `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGrid {
    pub shape: LatticeShape,
    pub values: Vec<Complex64>,
}

impl FourierGrid {
    /// Frequency of grid index `k`, wrapped into `[-pi, pi)`.
    pub fn frequency(&self, k: &[usize]) -> FrequencyPoint {
        let coords: Vec<f64> =
            k.iter().zip(self.shape.extents()).map(|(&k, &n)| TWO_PI * k as f64 / n as f64).collect();
        FrequencyPoint::wrapped(&coords).expect("finite")
    }

    /// `(k, S_n)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(flat, v)| {
            let k = self.shape.site_of(flat).into_iter().map(|u| (u - 1) as usize).collect();
            (k, *v)
        })
    }
}

/// FFT evaluation of [`fourier_sum`] on the Fourier grid.
///
/// The unnormalized inverse transform supplies `e^{+i m w}` for `m = u - 1`;
/// one extra phase `e^{i w}` per axis restores the 1-based index.
pub fn fourier_sum_grid(sample: &LatticeSample) -> FourierGrid {
    fourier_grid_values(&sample.values, &sample.shape)
}

pub fn fourier_grid_values(values: &[f64], shape: &LatticeShape) -> FourierGrid {
    assert_eq!(values.len(), shape.len(), "values do not fill the shape");
    let mut data: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let ext = shape.extents();
    let strides = shape.strides();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..shape.dim() {
        let n = ext[axis];
        let stride = strides[axis];
        let fft = planner.plan_fft_inverse(n);
        let shift: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(1.0, TWO_PI * k as f64 / n as f64)).collect();
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let outer = shape.len() / (n * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + m * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, z) in line.iter().enumerate() {
                    data[base + k * stride] = z * shift[k];
                }
            }
        }
    }
    FourierGrid { shape: shape.clone(), values: data }
}

/// `I_n(t) = |S_n(t)|^2 / ((2 pi)^d n_1 ... n_d)`.
pub fn periodogram(sample: &LatticeSample, t: &FrequencyPoint) -> f64 {
    periodogram_from_sum(fourier_sum_values(&sample.values, &sample.shape, t), &sample.shape)
}

pub fn periodogram_from_sum(s: Complex64, shape: &LatticeShape) -> f64 {
    s.norm_sqr() / (TWO_PI.powi(shape.dim() as i32) * shape.len() as f64)
}

/// Fejér kernel `K_n(x) = sum_{|j| < n} (1 - |j|/n) e^{ijx}`.
pub fn fejer_kernel(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "Fejér kernel order must be positive");
    let nf = n as f64;
    let x = wrap_angle(x);
    if x.abs() < 1e-7 {
        // removable singularity at 2 pi Z
        return nf * (1.0 - (nf * nf - 1.0) * x * x / 12.0);
    }
    let ratio = (nf * x / 2.0).sin() / (x / 2.0).sin();
    ratio * ratio / nf
}

/// `8 * max(n_i)` midpoints per axis.
pub fn default_quadrature_resolution(shape: &LatticeShape) -> Vec<usize> {
    let m = 8 * shape.extents().iter().copied().max().unwrap_or(1);
    vec![m; shape.dim()]
}

/// `(n_1 ... n_d)^{-1} E|S_n(t)|^2 = int K_{n_1}(x_1) ... K_{n_d}(x_d) f(x - t) dx`
/// by the midpoint rule on a tensor grid over `[-pi, pi)^d`, with `f` extended
/// periodically.
pub fn fejer_smoothed_variance<F>(
    f: F,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    resolution: &[usize],
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = shape.dim();
    if t.dim() != d || resolution.len() != d {
        return Err(Error::InvalidShape("shape, frequency and resolution differ in dimension".into()));
    }
    if resolution.contains(&0) {
        return Err(Error::InvalidShape("quadrature resolution must be positive".into()));
    }
    // per-axis nodes x_k - t and kernel weights K_n(x_k) * h
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
        .map(|a| {
            let m = resolution[a];
            let h = TWO_PI / m as f64;
            (0..m)
                .map(|k| {
                    let x = -PI + (k as f64 + 0.5) * h;
                    (wrap_angle(x - t.coords()[a]), fejer_kernel(shape.extents()[a], x) * h)
                })
                .unzip()
        })
        .collect();
    let total: usize = resolution.iter().product();
    let mut acc = CompensatedSum::new();
    let mut point = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut weight = 1.0;
        for a in 0..d {
            point[a] = axes[a].0[idx[a]];
            weight *= axes[a].1[idx[a]];
        }
        let value = f(&point);
        if !value.is_finite() {
            return Err(Error::InvalidDensity(format!("density is not finite at {point:?}")));
        }
        if value < -1e-12 {
            return Err(Error::InvalidDensity(format!("density is negative ({value}) at {point:?}")));
        }
        acc.add(weight * value);
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < resolution[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(acc.value())
}

/// `(2 pi)^{-d} sum_{|u|_inf <= radius} gamma(u) e^{-i u.t}`, real and
/// imaginary parts.
pub fn spectral_density_partial_sum_complex(model: &FieldModel, t: &FrequencyPoint, radius: usize) -> Complex64 {
    let d = t.dim();
    let mut acc = ComplexCompensatedSum::new();
    for u in box_sites(d, radius as i64) {
        let gamma = analytic_covariance(model, &u);
        if gamma != 0.0 {
            acc.add(Complex64::from_polar(gamma, -dot(&u, t.coords())));
        }
    }
    acc.value() / TWO_PI.powi(d as i32)
}

/// Real part of [`spectral_density_partial_sum_complex`]; the imaginary part
/// vanishes because `gamma(-u) = gamma(u)`.
pub fn spectral_density_partial_sum(model: &FieldModel, t: &FrequencyPoint, radius: usize) -> f64 {
    spectral_density_partial_sum_complex(model, t, radius).re
}

/// Lag range beyond which `gamma` vanishes for finite-kernel models.
pub fn covariance_range(model: &FieldModel) -> Option<usize> {
    match model {
        FieldModel::Iid(_) => Some(0),
        FieldModel::Linear { kernel, .. } => Some(2 * kernel.radius() as usize),
        FieldModel::Volterra { kernel, .. } => Some(2 * kernel.radius() as usize),
        FieldModel::GaussianColumns { .. } => None,
    }
}
