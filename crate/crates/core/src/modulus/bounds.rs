//! Upper bounds from weighted explicit densities, the winding lower bound and
//! their comparison.

use serde::{Deserialize, Serialize};

use super::density::{ball_chain_density, tube_density, ExplicitDensity};
use super::report::{Constants, Inputs, ModulusKind, ModulusReport};
use crate::analysis::winding_number;
use crate::construct::{distortion_field, DistortionField, RadialMap, RadialProfile};
use crate::error::{Error, Result};

/// `ln int K rho^2`, or with `hoelder_split` the bound
/// `||K||_{L^p(B)} (int rho^{2p/(p-1)})^{(p-1)/p}` over the density's fixed ball.
pub fn ln_weighted_energy(density: &ExplicitDensity, field: &DistortionField, p: f64, hoelder_split: bool) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if !hoelder_split {
        return Ok(density.ln_integral(field, 2.0, 1.0));
    }
    if p == 1.0 {
        return Err(Error::invalid("the Hoelder split needs p > 1"));
    }
    let s = 2.0 * p / (p - 1.0);
    let ln_rho = density.ln_integral(&DistortionField::default(), s, 0.0) / s * 2.0;
    Ok(field.ln_lp_norm(p, density.fixed_ball().ln()) + ln_rho)
}

pub fn weighted_energy(density: &ExplicitDensity, field: &DistortionField, p: f64, hoelder_split: bool) -> Result<ModulusReport> {
    let ln = ln_weighted_energy(density, field, p, hoelder_split)?;
    Ok(ModulusReport::new(
        ln.exp(),
        ModulusKind::UpperBound,
        Inputs {
            z0: Some(density.z0()),
            p: Some(p),
            ..Inputs::default()
        },
    ))
}

/// `n(z0)^2 / ln(c_f / r_f)` with `c_f = m(1)`, `r_f = m(z0)`.
pub fn winding_lower_bound<P: RadialProfile + ?Sized>(map: &P, z0: f64) -> Result<ModulusReport> {
    let n = winding_number(map, z0)?;
    let ln_c = map.ln_modulus(0.0);
    let ln_r = map.ln_modulus(z0.ln());
    let value = if n == 0 { 0.0 } else { (n as f64).powi(2) / (ln_c - ln_r) };
    Ok(ModulusReport {
        value,
        kind: ModulusKind::LowerBound,
        constants: Constants {
            c_f: Some(ln_c.exp()),
            r_f: Some(ln_r.exp()),
            n: Some(n),
        },
        inputs: Inputs {
            z0: Some(z0),
            ..Inputs::default()
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusInequality {
    pub z0: f64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

impl ModulusInequality {
    pub fn from_bounds(z0: f64, p: f64, lower: f64, upper: f64) -> Self {
        ModulusInequality {
            z0,
            p,
            lower,
            upper,
            holds: lower <= upper,
        }
    }
}

/// Winding lower bound against `int K rho^2` for the ball chain (`p > 1`) or the tube (`p = 1`).
pub fn check_modulus_inequality(map: &RadialMap, z0: f64, p: f64) -> Result<ModulusInequality> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    let lower = winding_lower_bound(map, z0)?.value;
    let density = if p > 1.0 { ball_chain_density(z0)? } else { tube_density(z0)? };
    let upper = weighted_energy(&density, &distortion_field(map), p, false)?.value;
    Ok(ModulusInequality::from_bounds(z0, p, lower, upper))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p: f64,
    pub z0: Vec<f64>,
    pub bounds: Vec<f64>,
    pub slope: f64,
}

/// Split ball-chain bound at `z0 = 2^{-k}` and the least-squares slope of `ln bound` on `ln z0`.
pub fn ball_chain_scaling(field: &DistortionField, p: f64, ks: impl IntoIterator<Item = u32>) -> Result<ScalingFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in ks {
        let z0 = 0.5f64.powi(k as i32);
        xs.push(z0.ln());
        ys.push(ln_weighted_energy(&ball_chain_density(z0)?, field, p, true)?);
    }
    if xs.len() < 2 {
        return Err(Error::invalid("scaling fit needs at least two radii"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ScalingFit {
        p,
        z0: xs.iter().map(|x| x.exp()).collect(),
        bounds: ys.iter().map(|y| y.exp()).collect(),
        slope: sxy / sxx,
    })
}
