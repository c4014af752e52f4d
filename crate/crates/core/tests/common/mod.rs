#![allow(dead_code)]

use latspec::models::{CoefficientKernel, FieldModel, VolterraEntry, VolterraKernel};
use latspec::rng::InnovationSpec;
use latspec::spectral::{FrequencyPoint, GENERIC_FREQUENCIES_2D};

pub fn linear_test_model() -> FieldModel {
    FieldModel::linear(
        CoefficientKernel::new(2, vec![(vec![0, 0], 1.0), (vec![1, 0], 0.5), (vec![0, 1], -0.3)]).unwrap(),
        InnovationSpec::StandardNormal,
    )
}

pub fn volterra_test_model() -> FieldModel {
    FieldModel::volterra(
        VolterraKernel::new(
            2,
            vec![
                VolterraEntry { u: vec![0, 0], v: vec![1, 0], coeff: 1.0 },
                VolterraEntry { u: vec![1, 1], v: vec![0, 1], coeff: 0.5 },
            ],
        )
        .unwrap(),
        InnovationSpec::StandardNormal,
    )
}

pub fn volterra_single_pair() -> FieldModel {
    FieldModel::volterra(
        VolterraKernel::new(2, vec![VolterraEntry { u: vec![0, 0], v: vec![1, 0], coeff: 1.0 }]).unwrap(),
        InnovationSpec::StandardNormal,
    )
}

pub fn iid() -> FieldModel {
    FieldModel::Iid(InnovationSpec::StandardNormal)
}

pub fn generic_frequencies() -> Vec<FrequencyPoint> {
    GENERIC_FREQUENCIES_2D.iter().map(|t| FrequencyPoint::generic(t.to_vec()).unwrap()).collect()
}
