//! Modulus reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusKind {
    UpperBound,
    LowerBound,
    DiscreteEstimate,
}

/// `c_f = sup_E |f|`, `r_f = inf_E |f|` and the winding number, when they apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_f: Option<f64>,
    pub r_f: Option<f64>,
    pub n: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub z0: Option<f64>,
    pub p: Option<f64>,
    pub grid: Option<usize>,
    pub paths: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub value: f64,
    pub kind: ModulusKind,
    pub constants: Constants,
    pub inputs: Inputs,
}

impl ModulusReport {
    pub fn new(value: f64, kind: ModulusKind, inputs: Inputs) -> Self {
        ModulusReport {
            value,
            kind,
            constants: Constants::default(),
            inputs,
        }
    }
}
