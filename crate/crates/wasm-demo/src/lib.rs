//! Three operations exported to the demo page. All grids are row-major
//! `n x n` arrays of `f64`.

use std::f64::consts::PI;

use latspec::harness::spectral_density;
use latspec::spectral::{
    covariance_range, default_quadrature_resolution, fejer_smoothed_variance, fourier_grid_values,
    periodogram_from_sum, spectral_density_partial_sum,
};
use latspec::{
    simulate, CoefficientKernel, FieldModel, FrequencyPoint, InnovationSpec, LatticeShape, StreamKey, VolterraEntry,
    VolterraKernel,
};
use wasm_bindgen::prelude::*;

const MAX_SIDE: usize = 512;

fn model(kind: &str, phi: f64) -> Result<FieldModel, String> {
    let innovation = InnovationSpec::StandardNormal;
    let model = match kind {
        "iid" => FieldModel::Iid(innovation),
        "linear" => FieldModel::linear(
            CoefficientKernel::new(2, vec![(vec![0, 0], 1.0), (vec![1, 0], 0.5), (vec![0, 1], -0.3)])
                .map_err(|e| e.to_string())?,
            innovation,
        ),
        "volterra" => FieldModel::volterra(
            VolterraKernel::new(
                2,
                vec![
                    VolterraEntry { u: vec![0, 0], v: vec![1, 0], coeff: 1.0 },
                    VolterraEntry { u: vec![1, 1], v: vec![0, 1], coeff: 0.5 },
                ],
            )
            .map_err(|e| e.to_string())?,
            innovation,
        ),
        "gaussian-columns" => FieldModel::gaussian_columns(phi).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown model {other:?}")),
    };
    Ok(model)
}

fn square(n: usize) -> Result<LatticeShape, String> {
    if n == 0 || n > MAX_SIDE {
        return Err(format!("side must be in 1..={MAX_SIDE}"));
    }
    LatticeShape::cube(2, n).map_err(|e| e.to_string())
}

pub fn field(kind: &str, n: usize, seed: u64, phi: f64) -> Result<Vec<f64>, String> {
    let sample = simulate(&model(kind, phi)?, &square(n)?, StreamKey::innovations(seed, 0)).map_err(|e| e.to_string())?;
    Ok(sample.values)
}

/// Periodogram at the Fourier frequencies, shifted so zero sits at the centre.
pub fn periodogram(kind: &str, n: usize, seed: u64, phi: f64) -> Result<Vec<f64>, String> {
    let shape = square(n)?;
    let values = field(kind, n, seed, phi)?;
    let grid = fourier_grid_values(&values, &shape);
    let mut out = vec![0.0; n * n];
    for (k, s) in grid.iter() {
        let row = (k[0] + n / 2) % n;
        let col = (k[1] + n / 2) % n;
        out[row * n + col] = periodogram_from_sum(s, &shape);
    }
    Ok(out)
}

/// `f(t1, t2)` and its Fejer smoothing at lattice side `n` along `t1`, for
/// `points` values of `t1` in `[-pi, pi)`. Returns `[f..., smoothed...]`.
pub fn density_slice(kind: &str, t2: f64, n: usize, points: usize, phi: f64) -> Result<Vec<f64>, String> {
    let model = model(kind, phi)?;
    let shape = square(n.min(32))?;
    let t2 = latspec::spectral::wrap_angle(t2);
    let f = |x: &[f64]| {
        let t = FrequencyPoint::new(x.to_vec()).expect("wrapped node");
        match covariance_range(&model) {
            Some(r) if matches!(model, FieldModel::Volterra { .. }) => spectral_density_partial_sum(&model, &t, r),
            _ => spectral_density(&model, &t).expect("closed form"),
        }
    };
    let resolution = default_quadrature_resolution(&shape);
    let mut exact = Vec::with_capacity(points);
    let mut smoothed = Vec::with_capacity(points);
    for k in 0..points {
        let t1 = -PI + 2.0 * PI * k as f64 / points as f64;
        let t = FrequencyPoint::new(vec![t1, t2]).map_err(|e| e.to_string())?;
        exact.push(f(t.coords()));
        let v = fejer_smoothed_variance(f, &shape, &t, &resolution).map_err(|e| e.to_string())?;
        smoothed.push(v / (4.0 * PI * PI));
    }
    exact.extend(smoothed);
    Ok(exact)
}

#[wasm_bindgen(js_name = simulateField)]
pub fn simulate_field(kind: &str, n: usize, seed: u64, phi: f64) -> Result<Vec<f64>, JsError> {
    field(kind, n, seed, phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = periodogramGrid)]
pub fn periodogram_grid(kind: &str, n: usize, seed: u64, phi: f64) -> Result<Vec<f64>, JsError> {
    periodogram(kind, n, seed, phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = densitySlice)]
pub fn density_slice_js(kind: &str, t2: f64, n: usize, points: usize, phi: f64) -> Result<Vec<f64>, JsError> {
    density_slice(kind, t2, n, points, phi).map_err(|e| JsError::new(&e))
}
