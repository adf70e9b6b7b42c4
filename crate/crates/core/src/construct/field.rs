//! Radial, piecewise-constant distortion `K(t)`.

use serde::{Deserialize, Serialize};

use crate::num::{log_add_exp, log_sub_exp};

use super::radial::RadialMap;

/// One annulus `[ln r, ln R]` carrying `ln K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStage {
    pub ln_r: f64,
    pub ln_outer: f64,
    pub ln_k: f64,
}

/// `K = K_n` on `A_n` and 1 elsewhere; stages sorted by decreasing radius.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DistortionField {
    pub stages: Vec<FieldStage>,
}

pub fn distortion_field(map: &RadialMap) -> DistortionField {
    DistortionField {
        stages: map
            .blocks()
            .iter()
            .map(|b| FieldStage {
                ln_r: b.annulus.ln_inner(),
                ln_outer: b.annulus.ln_outer(),
                ln_k: b.ln_distortion_annulus(),
            })
            .collect(),
    }
}

impl DistortionField {
    pub fn ln_k(&self, ln_t: f64) -> f64 {
        let k = self.stages.partition_point(|s| s.ln_r > ln_t);
        match self.stages.get(k) {
            Some(s) if ln_t <= s.ln_outer => s.ln_k,
            _ => 0.0,
        }
    }

    /// `K` at a point; 1 at the origin.
    pub fn k_at(&self, re: f64, im: f64) -> f64 {
        let t = re.hypot(im);
        if t == 0.0 {
            1.0
        } else {
            self.ln_k(t.ln()).exp()
        }
    }

    /// `ln int_{B(0, e^{ln_ball})} K^p`, exact up to rounding.
    pub fn ln_integral_kp(&self, p: f64, ln_ball: f64) -> f64 {
        let pi = std::f64::consts::PI.ln();
        let mut acc = pi + 2.0 * ln_ball;
        for s in &self.stages {
            if s.ln_r >= ln_ball || s.ln_k == 0.0 {
                continue;
            }
            let hi = s.ln_outer.min(ln_ball);
            let ln_area = pi + log_sub_exp(2.0 * hi, 2.0 * s.ln_r);
            let ln_excess = log_sub_exp(p * s.ln_k, 0.0);
            acc = log_add_exp(acc, ln_area + ln_excess);
        }
        acc
    }

    /// `ln ||K||_{L^p(B(0, e^{ln_ball}))}`.
    pub fn ln_lp_norm(&self, p: f64, ln_ball: f64) -> f64 {
        self.ln_integral_kp(p, ln_ball) / p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{Annulus, BlockParams};
    use crate::construct::compose_radial;

    fn std_block(ln_r: f64, alpha: f64, q: f64) -> BlockParams {
        BlockParams::new(Annulus::standard(ln_r).unwrap(), alpha, q).unwrap()
    }

    #[test]
    fn single_rotation_field() {
        let f = distortion_field(&compose_radial(vec![std_block(-1.0, 1.0, 1.0)]).unwrap());
        let golden_sq = ((5f64.sqrt() + 1.0) / 2.0).powi(2);
        assert!((f.ln_k(-0.5).exp() - golden_sq).abs() < 1e-13);
        assert_eq!(f.ln_k(0.5), 0.0);
        assert_eq!(f.ln_k(-1.5), 0.0);
    }

    #[test]
    fn conformal_map_has_unit_field() {
        let f = distortion_field(&RadialMap::identity());
        assert_eq!(f.k_at(0.3, 0.1), 1.0);
        let pi = std::f64::consts::PI;
        assert!((f.ln_integral_kp(2.0, 0.0).exp() - pi).abs() < 1e-15);
    }

    #[test]
    fn two_stages_keep_their_own_values() {
        let a = std_block(-2.0, 3.0, 2.0);
        let b = std_block(-6.0, 7.0, 1.5);
        let f = distortion_field(&compose_radial(vec![a, b]).unwrap());
        assert_eq!(f.ln_k(-1.5), a.ln_distortion_annulus());
        assert_eq!(f.ln_k(-5.5), b.ln_distortion_annulus());
        assert_eq!(f.ln_k(-3.5), 0.0);
    }

    #[test]
    fn clipped_integral() {
        let f = distortion_field(&compose_radial(vec![std_block(-1.0, 1.0, 1.0)]).unwrap());
        let k = f.ln_k(-0.5).exp();
        let pi = std::f64::consts::PI;
        let half = (-0.5f64).exp();
        let expect = pi * (-2f64).exp() + pi * k * (half * half - (-2f64).exp());
        assert!((f.ln_integral_kp(1.0, -0.5).exp() - expect).abs() < 1e-13 * expect);
    }
}
