//! Projection operators, the martingale-difference series `D_0(t)` and the
//! approximating martingale `M_n(t)`.
//!
//! Fields built from finitely many independent centered innovations are finite
//! sums of monomials `c * xi_{s_1} ... xi_{s_k}` with distinct sites. For such a
//! monomial the conditional expectation `E_c` (given the innovations at sites
//! `<= c` coordinate-wise) is the monomial itself when every site is `<= c`,
//! and zero otherwise: at least one factor is then independent of the
//! conditioning and has mean zero. The projection
//! `P_0 = sum_{e in {0,1}^d} (-1)^{|e|} E_{-e}` is applied term by term with
//! this rule, which makes every quantity below exact.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{box_sites, sup_norm, LatticeShape};
use crate::models::{dot, evaluate_field, grid_offsets, displacement, FieldModel, LatticeSample};
use crate::numeric::ComplexCompensatedSum;
use crate::par::try_map_indexed;
use crate::rng::{make_stream, InnovationLattice, StreamKey};
use crate::spectral::{fourier_sum_values, FrequencyPoint};
use crate::stats::Estimate;

/// `coeff * prod xi_s` over distinct `sites`, kept in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub sites: Vec<Vec<i64>>,
}

impl Monomial {
    pub fn new(coeff: f64, mut sites: Vec<Vec<i64>>) -> Self {
        sites.sort();
        Self { coeff, sites }
    }

    pub fn degree(&self) -> usize {
        self.sites.len()
    }

    /// Are all sites `<= c` coordinate-wise?
    pub fn measurable_at(&self, c: &[i64]) -> bool {
        self.sites.iter().all(|s| s.iter().zip(c).all(|(a, b)| a <= b))
    }
}

/// The monomials making up `X_j`.
pub fn expand_field(model: &FieldModel, j: &[i64]) -> Result<Vec<Monomial>> {
    let sub = |x: &[i64]| -> Vec<i64> { j.iter().zip(x).map(|(a, b)| a - b).collect() };
    match model {
        FieldModel::Iid(_) => Ok(vec![Monomial::new(1.0, vec![j.to_vec()])]),
        FieldModel::Linear { kernel, .. } => {
            Ok(kernel.terms().iter().map(|(m, a)| Monomial::new(*a, vec![sub(m)])).collect())
        }
        FieldModel::Volterra { kernel, .. } => Ok(kernel
            .entries()
            .iter()
            .map(|e| Monomial::new(e.coeff, vec![sub(&e.u), sub(&e.v)]))
            .collect()),
        FieldModel::GaussianColumns { .. } => Err(Error::UnsupportedModel(
            "projections of Gaussian-column fields have no finite symbolic form".into(),
        )),
    }
}

/// `E_c` applied to a monomial list.
pub fn conditional_expectation(monomials: &[Monomial], c: &[i64]) -> Vec<Monomial> {
    monomials.iter().filter(|m| m.measurable_at(c)).cloned().collect()
}

/// Merge equal site sets and drop vanishing coefficients.
fn canonicalize(monomials: impl IntoIterator<Item = Monomial>) -> Vec<Monomial> {
    let mut merged: BTreeMap<Vec<Vec<i64>>, f64> = BTreeMap::new();
    for m in monomials {
        *merged.entry(m.sites).or_insert(0.0) += m.coeff;
    }
    merged.into_iter().filter(|(_, c)| *c != 0.0).map(|(sites, coeff)| Monomial { coeff, sites }).collect()
}

/// `P_0 X_j` as an exact monomial list.
pub fn project_p0(model: &FieldModel, j: &[i64]) -> Result<Vec<Monomial>> {
    if let Some(d) = model.dim() {
        if d != j.len() {
            return Err(Error::InvalidShape(format!("lag {j:?} does not match a {d}-dimensional model")));
        }
    }
    let d = j.len();
    let field = expand_field(model, j)?;
    let mut out = Vec::new();
    for corner in 0u32..(1 << d) {
        let c: Vec<i64> = (0..d).map(|a| -i64::from((corner >> a) & 1)).collect();
        let sign = if corner.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out.extend(
            conditional_expectation(&field, &c)
                .into_iter()
                .map(|m| Monomial { coeff: sign * m.coeff, ..m }),
        );
    }
    Ok(canonicalize(out))
}

/// `E|sum of monomials|^2` for distinct monomials in i.i.d. centered
/// innovations with variance `sigma2`.
pub fn second_moment(monomials: &[Monomial], sigma2: f64) -> f64 {
    canonicalize(monomials.iter().cloned())
        .iter()
        .map(|m| m.coeff * m.coeff * sigma2.powi(m.degree() as i32))
        .sum()
}

/// `sum_j E|P_0 X_j|^2`, which equals `E X_0^2`.
pub fn parseval_sum(model: &FieldModel, dim: usize) -> Result<f64> {
    let sigma2 = model.innovation().variance();
    let mut total = 0.0;
    for j in box_sites(dim, model.halo() as i64) {
        total += second_moment(&project_p0(model, &j)?, sigma2);
    }
    Ok(total)
}

/// One term `coeff * prod xi_s` of `D_0^{(l)}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub coeff: Complex64,
    pub sites: Vec<Vec<i64>>,
}

/// `D_0^{(l)}(t) = sum_{|j|_inf <= l} e^{-i j.t} P_0 X_j` in symbolic form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSeries {
    model: FieldModel,
    t: FrequencyPoint,
    truncation: usize,
    terms: Vec<SeriesTerm>,
}

impl ProjectionSeries {
    pub fn new(model: &FieldModel, t: &FrequencyPoint, truncation: usize) -> Result<Self> {
        model.check_dim(t.dim())?;
        // P_0 X_j vanishes once |j|_inf exceeds the kernel radius.
        let radius = truncation.min(model.halo()) as i64;
        let mut merged: BTreeMap<Vec<Vec<i64>>, Complex64> = BTreeMap::new();
        for j in box_sites(t.dim(), radius) {
            let phase = Complex64::from_polar(1.0, -dot(&j, t.coords()));
            for m in project_p0(model, &j)? {
                *merged.entry(m.sites).or_default() += phase * m.coeff;
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::default())
            .map(|(sites, coeff)| SeriesTerm { coeff, sites })
            .collect();
        Ok(Self { model: model.clone(), t: t.clone(), truncation, terms })
    }

    /// Truncation equal to the kernel radius, where `D_0^{(l)} = D_0`.
    pub fn exact(model: &FieldModel, t: &FrequencyPoint) -> Result<Self> {
        Self::new(model, t, model.halo())
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn frequency(&self) -> &FrequencyPoint {
        &self.t
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    /// Largest `|s|_inf` over all sites in the series.
    pub fn reach(&self) -> usize {
        self.terms.iter().flat_map(|t| t.sites.iter()).map(|s| sup_norm(s) as usize).max().unwrap_or(0)
    }

    /// `E|D_0^{(l)}(t)|^2` computed symbolically.
    pub fn second_moment(&self) -> f64 {
        let sigma2 = self.model.innovation().variance();
        self.terms.iter().map(|t| t.coeff.norm_sqr() * sigma2.powi(t.sites.len() as i32)).sum()
    }

    /// `D_k^{(l)}(t)`, the series translated by `shift`, on the given innovations.
    pub fn evaluate_at(&self, innovations: &InnovationLattice, shift: &[i64]) -> Result<Complex64> {
        let mut acc = ComplexCompensatedSum::new();
        let mut site = vec![0i64; shift.len()];
        for term in &self.terms {
            let mut product = 1.0;
            for s in &term.sites {
                for (x, (a, b)) in site.iter_mut().zip(s.iter().zip(shift)) {
                    *x = a + b;
                }
                product *= innovations.value(&site)?;
            }
            acc.add(term.coeff * product);
        }
        Ok(acc.value())
    }
}

/// `D_0^{(l)}(t)` on a given innovation configuration.
pub fn d0_truncated(series: &ProjectionSeries, innovations: &InnovationLattice) -> Result<Complex64> {
    series.evaluate_at(innovations, &vec![0; series.t.dim()])
}

/// `f(t) = (2 pi)^{-d} E|D_0(t)|^2` with the expectation taken symbolically.
pub fn spectral_density_symbolic(model: &FieldModel, t: &FrequencyPoint) -> Result<f64> {
    let series = ProjectionSeries::exact(model, t)?;
    Ok(series.second_moment() / (2.0 * PI).powi(t.dim() as i32))
}

/// Innovation window `[-reach, reach]^d` around the origin.
fn origin_window(series: &ProjectionSeries, key: StreamKey) -> Result<InnovationLattice> {
    let d = series.t.dim();
    let reach = series.reach() as i64;
    InnovationLattice::sample_window(
        &mut make_stream(key),
        series.model.innovation(),
        &vec![-reach; d],
        &vec![2 * reach as usize + 1; d],
    )
}

/// Monte Carlo estimate of `(2 pi)^{-d} E|D_0^{(l)}(t)|^2`.
///
/// Replicate `r` draws its innovations from `key.replicate(r)`.
pub fn spectral_density_projection_mc(
    model: &FieldModel,
    t: &FrequencyPoint,
    truncation: usize,
    replicates: u64,
    key: StreamKey,
) -> Result<Estimate> {
    if replicates < 2 {
        return Err(Error::InvalidPlan("need at least two replicates".into()));
    }
    let series = ProjectionSeries::new(model, t, truncation)?;
    let norm = (2.0 * PI).powi(t.dim() as i32);
    let samples = try_map_indexed(replicates, true, |r| {
        let window = origin_window(&series, key.replicate(r))?;
        Ok::<_, Error>(d0_truncated(&series, &window)?.norm_sqr() / norm)
    })?;
    Ok(Estimate::from_samples(&samples))
}

/// `M_n(t)` for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSum {
    pub value: Complex64,
    pub shape: LatticeShape,
    pub t: FrequencyPoint,
    pub truncation: usize,
}

/// The martingale-difference series paired with `S_n(t)`.
///
/// `S_n(t) = sum_k sum_m e^{i(k+m).t} P_k X_{k+m}`, so the differences whose
/// rotated sum tracks `S_n(t)` carry the phase `e^{+i m.t}`; that is the
/// series `D_k(-t)`. For real fields `D_k(-t)` is the complex conjugate of
/// `D_k(t)`, so both have the same second moment.
pub fn paired_series(model: &FieldModel, t: &FrequencyPoint, truncation: usize) -> Result<ProjectionSeries> {
    ProjectionSeries::new(model, &t.negated(), truncation)
}

/// Halo that covers both the field and its paired martingale differences.
pub fn pairing_halo(model: &FieldModel, series: &ProjectionSeries) -> usize {
    model.halo().max(series.reach())
}

/// `sum_{1 <= j <= n} e^{i j.t} D_j` computed from shared innovations.
pub(crate) fn rotated_martingale(
    series: &ProjectionSeries,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    innovations: &InnovationLattice,
) -> Result<Complex64> {
    let reach = series.reach() as i64;
    let lo = vec![1 - reach; shape.dim()];
    let ext: Vec<usize> = shape.extents().iter().map(|&n| n + 2 * reach as usize).collect();
    if !innovations.covers(&lo, &ext) {
        return Err(Error::MissingInnovation { site: lo });
    }
    let offsets = grid_offsets(shape, innovations)?;
    let xi = innovations.values();
    let mut acc = ComplexCompensatedSum::new();
    let mut products = vec![0.0; shape.len()];
    for term in &series.terms {
        let shifts: Vec<isize> = term.sites.iter().map(|s| displacement(innovations, s)).collect();
        for (p, &k) in products.iter_mut().zip(&offsets) {
            *p = shifts.iter().map(|&s| xi[(k as isize + s) as usize]).product();
        }
        acc.add(term.coeff * fourier_sum_values(&products, shape, t));
    }
    Ok(acc.value())
}

/// `D_j` at every grid site `1 <= j <= n`, in storage order.
pub fn difference_field(
    series: &ProjectionSeries,
    shape: &LatticeShape,
    innovations: &InnovationLattice,
) -> Result<Vec<Complex64>> {
    let reach = series.reach() as i64;
    let lo = vec![1 - reach; shape.dim()];
    let ext: Vec<usize> = shape.extents().iter().map(|&n| n + 2 * reach as usize).collect();
    if !innovations.covers(&lo, &ext) {
        return Err(Error::MissingInnovation { site: lo });
    }
    let offsets = grid_offsets(shape, innovations)?;
    let xi = innovations.values();
    let mut out = vec![Complex64::default(); shape.len()];
    for term in &series.terms {
        let shifts: Vec<isize> = term.sites.iter().map(|s| displacement(innovations, s)).collect();
        for (d, &k) in out.iter_mut().zip(&offsets) {
            let p: f64 = shifts.iter().map(|&s| xi[(k as isize + s) as usize]).product();
            *d += term.coeff * p;
        }
    }
    Ok(out)
}

pub(crate) fn paired_window(
    model: &FieldModel,
    series: &ProjectionSeries,
    shape: &LatticeShape,
    key: StreamKey,
) -> Result<InnovationLattice> {
    let halo = pairing_halo(model, series);
    crate::rng::sample_innovations(&mut make_stream(key), model.innovation(), shape, &vec![halo; shape.dim()])
}

/// `M_n(t)` drawn from the innovation stream `key`, the same stream
/// [`simulate`](crate::models::simulate) uses for `S_n(t)`.
pub fn martingale_sum(
    model: &FieldModel,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    truncation: usize,
    key: StreamKey,
) -> Result<MartingaleSum> {
    model.check_dim(shape.dim())?;
    let series = paired_series(model, t, truncation)?;
    let innovations = paired_window(model, &series, shape, key)?;
    let value = rotated_martingale(&series, shape, t, &innovations)?;
    Ok(MartingaleSum { value, shape: shape.clone(), t: t.clone(), truncation })
}

/// [`martingale_sum`] for the innovations behind an existing sample.
pub fn martingale_sum_paired(
    sample: &LatticeSample,
    t: &FrequencyPoint,
    truncation: usize,
    key: StreamKey,
) -> Result<MartingaleSum> {
    if sample.key != key {
        return Err(Error::InvalidPairing(format!(
            "sample was drawn from {:?} but the martingale was requested for {:?}",
            sample.key, key
        )));
    }
    martingale_sum(&sample.model, &sample.shape, t, truncation, key)
}

/// `S_n(t)` and `M_n(t)` from one shared innovation draw.
pub fn paired_sums(
    model: &FieldModel,
    series: &ProjectionSeries,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    key: StreamKey,
) -> Result<(Complex64, Complex64)> {
    let innovations = paired_window(model, series, shape, key)?;
    let values = evaluate_field(model, shape, &innovations)?;
    let s = fourier_sum_values(&values, shape, t);
    let m = rotated_martingale(series, shape, t, &innovations)?;
    Ok((s, m))
}

/// Monte Carlo estimate of `(n_1 ... n_d)^{-1} E|S_n(t) - M_n(t)|^2`.
pub fn martingale_approx_error(
    model: &FieldModel,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    truncation: usize,
    replicates: u64,
    key: StreamKey,
) -> Result<Estimate> {
    if replicates < 2 {
        return Err(Error::InvalidPlan("need at least two replicates".into()));
    }
    model.check_dim(shape.dim())?;
    let series = paired_series(model, t, truncation)?;
    let n = shape.len() as f64;
    let samples = try_map_indexed(replicates, true, |r| {
        let (s, m) = paired_sums(model, &series, shape, t, key.replicate(r))?;
        Ok::<_, Error>((s - m).norm_sqr() / n)
    })?;
    Ok(Estimate::from_samples(&samples))
}
