//! Generative field models and their closed-form second-order quantities.
//!
//! Kernels are finitely supported, so every sum here is exact.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{sup_norm, LatticeShape, MAX_DIM};
use crate::rng::{make_stream, sample_innovations, InnovationLattice, InnovationSpec, StreamKey, SITE_BIAS};
use crate::spectral::FrequencyPoint;

/// Finitely supported coefficients `a_j` of a linear field.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientKernel {
    dim: usize,
    terms: Vec<(Vec<i64>, f64)>,
}

impl CoefficientKernel {
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        check_dim(dim)?;
        let mut seen = HashMap::new();
        for (lag, coeff) in &terms {
            check_lag(dim, lag)?;
            if !coeff.is_finite() {
                return Err(Error::InvalidKernel(format!("coefficient at lag {lag:?} is not finite")));
            }
            if seen.insert(lag.clone(), ()).is_some() {
                return Err(Error::InvalidKernel(format!("lag {lag:?} listed twice")));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<i64>, f64)] {
        &self.terms
    }

    /// `a_lag`, zero off the support.
    pub fn coefficient(&self, lag: &[i64]) -> f64 {
        self.terms.iter().find(|(j, _)| j.as_slice() == lag).map_or(0.0, |(_, a)| *a)
    }

    /// Largest `|j|_inf` over the support.
    pub fn radius(&self) -> i64 {
        self.terms.iter().map(|(j, _)| sup_norm(j)).max().unwrap_or(0)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a * a).sum()
    }
}

/// One entry `a_{u,v}` of a second-order Volterra kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraEntry {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub coeff: f64,
}

/// Coefficients `a_{u,v}` with `a_{u,u} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraKernel {
    dim: usize,
    entries: Vec<VolterraEntry>,
}

impl VolterraKernel {
    pub fn new(dim: usize, entries: Vec<VolterraEntry>) -> Result<Self> {
        check_dim(dim)?;
        let mut seen = HashMap::new();
        for e in &entries {
            check_lag(dim, &e.u)?;
            check_lag(dim, &e.v)?;
            if e.u == e.v {
                return Err(Error::InvalidKernel(format!(
                    "diagonal Volterra entry a[{:?},{:?}] is not allowed",
                    e.u, e.v
                )));
            }
            if !e.coeff.is_finite() {
                return Err(Error::InvalidKernel(format!("coefficient a[{:?},{:?}] is not finite", e.u, e.v)));
            }
            if seen.insert((e.u.clone(), e.v.clone()), ()).is_some() {
                return Err(Error::InvalidKernel(format!("pair ({:?},{:?}) listed twice", e.u, e.v)));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[VolterraEntry] {
        &self.entries
    }

    pub fn coefficient(&self, u: &[i64], v: &[i64]) -> f64 {
        self.entries
            .iter()
            .find(|e| e.u.as_slice() == u && e.v.as_slice() == v)
            .map_or(0.0, |e| e.coeff)
    }

    pub fn radius(&self) -> i64 {
        self.entries.iter().map(|e| sup_norm(&e.u).max(sup_norm(&e.v))).max().unwrap_or(0)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidKernel(format!("dimension must be between 1 and {MAX_DIM}, got {dim}")));
    }
    Ok(())
}

fn check_lag(dim: usize, lag: &[i64]) -> Result<()> {
    if lag.len() != dim {
        return Err(Error::InvalidKernel(format!("lag {lag:?} does not have {dim} coordinates")));
    }
    if lag.iter().any(|x| x.abs() >= SITE_BIAS / 4) {
        return Err(Error::InvalidKernel(format!("lag {lag:?} is too far from the origin")));
    }
    Ok(())
}

/// Generative description of a stationary, centered field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldModel {
    /// `X_u = xi_u`.
    Iid(InnovationSpec),
    /// `X_k = sum_j a_{k-j} xi_j`.
    Linear { kernel: CoefficientKernel, innovation: InnovationSpec },
    /// `X_k = sum_{u,v} a_{u,v} xi_{k-u} xi_{k-v}`.
    Volterra { kernel: VolterraKernel, innovation: InnovationSpec },
    /// Independent columns, each a stationary Gaussian AR(1) along the first
    /// axis: `X_{k} = phi X_{k - e_1} + xi_k` with standard normal `xi`.
    GaussianColumns { phi: f64 },
}

impl FieldModel {
    pub fn linear(kernel: CoefficientKernel, innovation: InnovationSpec) -> Self {
        Self::Linear { kernel, innovation }
    }

    pub fn volterra(kernel: VolterraKernel, innovation: InnovationSpec) -> Self {
        Self::Volterra { kernel, innovation }
    }

    pub fn gaussian_columns(phi: f64) -> Result<Self> {
        if !(phi > -1.0 && phi < 1.0) {
            return Err(Error::InvalidKernel(format!("AR coefficient must lie in (-1, 1), got {phi}")));
        }
        Ok(Self::GaussianColumns { phi })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Iid(_) => "iid",
            Self::Linear { .. } => "linear",
            Self::Volterra { .. } => "volterra",
            Self::GaussianColumns { .. } => "gaussian-columns",
        }
    }

    /// Dimension fixed by the kernel, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Linear { kernel, .. } => Some(kernel.dim()),
            Self::Volterra { kernel, .. } => Some(kernel.dim()),
            Self::Iid(_) | Self::GaussianColumns { .. } => None,
        }
    }

    pub fn innovation(&self) -> InnovationSpec {
        match self {
            Self::Iid(spec) => *spec,
            Self::Linear { innovation, .. } | Self::Volterra { innovation, .. } => *innovation,
            Self::GaussianColumns { .. } => InnovationSpec::StandardNormal,
        }
    }

    /// Halo needed around the observation window to evaluate the field.
    pub fn halo(&self) -> usize {
        match self {
            Self::Linear { kernel, .. } => kernel.radius() as usize,
            Self::Volterra { kernel, .. } => kernel.radius() as usize,
            Self::Iid(_) | Self::GaussianColumns { .. } => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation().validate()?;
        if let Self::GaussianColumns { phi } = self {
            Self::gaussian_columns(*phi)?;
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::InvalidShape(format!(
                "{} model is {d}-dimensional but the lattice has {dim} axes",
                self.kind_name()
            ))),
            _ => Ok(()),
        }
    }

    /// `gamma(0) = E X_0^2`.
    pub fn variance(&self) -> f64 {
        let dim = self.dim().unwrap_or(1);
        analytic_covariance(self, &vec![0; dim])
    }
}

/// One realization `X_u`, `1 <= u <= n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSample {
    pub shape: LatticeShape,
    pub values: Vec<f64>,
    pub model: FieldModel,
    pub key: StreamKey,
}

impl LatticeSample {
    /// `(site, value)` pairs in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.shape.sites().zip(self.values.iter().copied())
    }
}

pub fn simulate(model: &FieldModel, shape: &LatticeShape, key: StreamKey) -> Result<LatticeSample> {
    model.validate()?;
    model.check_dim(shape.dim())?;
    let halo = vec![model.halo(); shape.dim()];
    let innovations = sample_innovations(&mut make_stream(key), model.innovation(), shape, &halo)?;
    let values = evaluate_field(model, shape, &innovations)?;
    Ok(LatticeSample { shape: shape.clone(), values, model: model.clone(), key })
}

/// Lattice offsets of the grid sites `1 <= u <= n` in storage order.
pub(crate) fn grid_offsets(shape: &LatticeShape, innovations: &InnovationLattice) -> Result<Vec<usize>> {
    let ones = vec![1i64; shape.dim()];
    if !innovations.covers(&ones, shape.extents()) {
        return Err(Error::MissingInnovation { site: ones });
    }
    let dim = shape.dim();
    let ext = shape.extents();
    let strides = innovations.strides();
    let base = innovations.offset_of(&ones).expect("covered");
    let mut out = Vec::with_capacity(shape.len());
    let mut idx = vec![0usize; dim];
    for _ in 0..shape.len() {
        out.push(base + idx.iter().zip(strides).map(|(i, s)| i * s).sum::<usize>());
        for axis in (0..dim).rev() {
            idx[axis] += 1;
            if idx[axis] < ext[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(out)
}

/// Signed lattice offset of the displacement `delta`.
pub(crate) fn displacement(innovations: &InnovationLattice, delta: &[i64]) -> isize {
    delta.iter().zip(innovations.strides()).map(|(&d, &s)| d as isize * s as isize).sum()
}

/// Field values over the grid computed from a pre-sampled innovation window.
pub fn evaluate_field(
    model: &FieldModel,
    shape: &LatticeShape,
    innovations: &InnovationLattice,
) -> Result<Vec<f64>> {
    model.check_dim(shape.dim())?;
    let halo = model.halo() as i64;
    let lo: Vec<i64> = vec![1 - halo; shape.dim()];
    let ext: Vec<usize> = shape.extents().iter().map(|&n| n + 2 * halo as usize).collect();
    if !innovations.covers(&lo, &ext) {
        return Err(Error::MissingInnovation { site: lo });
    }
    let offsets = grid_offsets(shape, innovations)?;
    let xi = innovations.values();
    let at = |base: usize, shift: isize| xi[(base as isize + shift) as usize];
    let values = match model {
        FieldModel::Iid(_) => offsets.iter().map(|&k| xi[k]).collect(),
        FieldModel::Linear { kernel, .. } => {
            let shifts: Vec<(isize, f64)> = kernel
                .terms()
                .iter()
                .map(|(j, a)| (-displacement(innovations, j), *a))
                .collect();
            offsets
                .iter()
                .map(|&k| shifts.iter().map(|&(s, a)| a * at(k, s)).sum())
                .collect()
        }
        FieldModel::Volterra { kernel, .. } => {
            let shifts: Vec<(isize, isize, f64)> = kernel
                .entries()
                .iter()
                .map(|e| (-displacement(innovations, &e.u), -displacement(innovations, &e.v), e.coeff))
                .collect();
            offsets
                .iter()
                .map(|&k| shifts.iter().map(|&(su, sv, a)| a * at(k, su) * at(k, sv)).sum())
                .collect()
        }
        FieldModel::GaussianColumns { phi } => {
            // AR(1) along axis 0, started from the stationary law.
            let n0 = shape.extents()[0];
            let column_len: usize = shape.extents()[1..].iter().product();
            let mut values = vec![0.0; shape.len()];
            let scale = 1.0 / (1.0 - phi * phi).sqrt();
            for c in 0..column_len {
                let mut prev = scale * xi[offsets[c]];
                values[c] = prev;
                for r in 1..n0 {
                    let k = r * column_len + c;
                    prev = phi * prev + xi[offsets[k]];
                    values[k] = prev;
                }
            }
            values
        }
    };
    Ok(values)
}

/// `gamma(lag) = cov(X_{u+lag}, X_u)` in closed form.
///
/// Panics if a kernel model is given a lag of the wrong dimension.
pub fn analytic_covariance(model: &FieldModel, lag: &[i64]) -> f64 {
    if let Some(d) = model.dim() {
        assert_eq!(d, lag.len(), "lag dimension does not match the model");
    }
    let is_zero = lag.iter().all(|&x| x == 0);
    match model {
        FieldModel::Iid(spec) => {
            if is_zero {
                spec.variance()
            } else {
                0.0
            }
        }
        FieldModel::Linear { kernel, innovation } => {
            let mut shifted = vec![0i64; lag.len()];
            let sum: f64 = kernel
                .terms()
                .iter()
                .map(|(j, a)| {
                    for (s, (&x, &l)) in shifted.iter_mut().zip(j.iter().zip(lag)) {
                        *s = x + l;
                    }
                    a * kernel.coefficient(&shifted)
                })
                .sum();
            innovation.variance() * sum
        }
        FieldModel::Volterra { kernel, innovation } => {
            let shift = |x: &[i64]| -> Vec<i64> { x.iter().zip(lag).map(|(a, b)| a + b).collect() };
            let sum: f64 = kernel
                .entries()
                .iter()
                .map(|e| {
                    let (u, v) = (shift(&e.u), shift(&e.v));
                    e.coeff * (kernel.coefficient(&u, &v) + kernel.coefficient(&v, &u))
                })
                .sum();
            innovation.variance().powi(2) * sum
        }
        FieldModel::GaussianColumns { phi } => {
            if lag[1..].iter().any(|&x| x != 0) {
                0.0
            } else {
                phi.powi(lag[0].unsigned_abs() as i32) / (1.0 - phi * phi)
            }
        }
    }
}

/// `A(t) = sum_j a_j e^{-i j.t}`.
pub fn transfer_function(kernel: &CoefficientKernel, t: &FrequencyPoint) -> Complex64 {
    assert_eq!(kernel.dim(), t.dim(), "frequency dimension does not match the kernel");
    kernel
        .terms()
        .iter()
        .map(|(j, a)| Complex64::from_polar(*a, -dot(j, t.coords())))
        .sum()
}

pub(crate) fn dot(j: &[i64], t: &[f64]) -> f64 {
    j.iter().zip(t).map(|(&a, &b)| a as f64 * b).sum()
}

/// Spectral density `f(t)` normalized so that `gamma(u) = int e^{iu.x} f(x) dx`
/// over `[-pi, pi)^d`.
pub fn analytic_spectral_density(model: &FieldModel, t: &FrequencyPoint) -> Result<f64> {
    model.check_dim(t.dim())?;
    let d = t.dim() as i32;
    let norm = (2.0 * PI).powi(d);
    match model {
        FieldModel::Iid(spec) => Ok(spec.variance() / norm),
        FieldModel::Linear { kernel, innovation } => {
            Ok(innovation.variance() * transfer_function(kernel, t).norm_sqr() / norm)
        }
        FieldModel::GaussianColumns { phi } => {
            let t1 = t.coords()[0];
            let ar = 1.0 / (2.0 * PI * (1.0 - 2.0 * phi * t1.cos() + phi * phi));
            Ok(ar / (2.0 * PI).powi(d - 1))
        }
        FieldModel::Volterra { .. } => Err(Error::UnsupportedModel(
            "no closed-form density for Volterra fields; use the projection estimator \
             (projection::spectral_density_projection_mc or projection::spectral_density_symbolic)"
                .into(),
        )),
    }
}
