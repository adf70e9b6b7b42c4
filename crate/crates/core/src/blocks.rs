//! The two building-block maps and their closed-form differentials.
//!
//! A block acts on the annulus `r <= |z| <= R`:
//! identity outside, `z |z/R|^{q-1} e^{i a log(|z|/R)}` on the annulus and
//! the similarity `z (r/R)^{q-1} e^{i a log(r/R)}` inside. Circles `|z| = r`
//! and `|z| = R` belong to the annulus branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{LogReal, Positive};

pub type ComplexPoint = Complex64;

pub(crate) fn check_point(z: ComplexPoint) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite point {z}")))
    }
}

/// `r < |z| < R`, radii held as logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus {
    ln_inner: f64,
    ln_outer: f64,
}

impl Annulus {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        let a = Positive::new(r_inner)?;
        let b = Positive::new(r_outer)?;
        Self::from_ln(a.ln(), b.ln())
    }

    pub fn from_ln(ln_inner: f64, ln_outer: f64) -> Result<Self> {
        if !(ln_inner.is_finite() && ln_outer.is_finite() && ln_inner < ln_outer) {
            return Err(Error::invalid(format!(
                "annulus needs 0 < r < R (ln r = {ln_inner}, ln R = {ln_outer})"
            )));
        }
        Ok(Annulus { ln_inner, ln_outer })
    }

    /// The paper's stage annulus `[r, e r]`.
    pub fn standard(ln_inner: f64) -> Result<Self> {
        Self::from_ln(ln_inner, ln_inner + 1.0)
    }

    pub fn ln_inner(&self) -> f64 {
        self.ln_inner
    }
    pub fn ln_outer(&self) -> f64 {
        self.ln_outer
    }
    pub fn r_inner(&self) -> f64 {
        self.ln_inner.exp()
    }
    pub fn r_outer(&self) -> f64 {
        self.ln_outer.exp()
    }
    /// `ln(R/r)`.
    pub fn ln_ratio(&self) -> f64 {
        self.ln_outer - self.ln_inner
    }
}

/// One stage `(A, alpha, q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockParams {
    pub annulus: Annulus,
    pub alpha: LogReal,
    pub q: f64,
}

impl BlockParams {
    pub fn new(annulus: Annulus, alpha: f64, q: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
        Self::from_log(annulus, LogReal::from_f64(alpha), q)
    }

    pub fn from_log(annulus: Annulus, alpha: LogReal, q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::invalid(format!("q must be finite and >= 1, got {q}")));
        }
        Ok(BlockParams { annulus, alpha, q })
    }

    pub fn rotation(annulus: Annulus, alpha: f64) -> Result<Self> {
        Self::new(annulus, alpha, 1.0)
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64()
    }

    /// `ln(|q+1+ia| + |q-1+ia|)`, stable for astronomically large `a`.
    pub fn ln_coefficient_sum(&self) -> f64 {
        let la = self.alpha.ln_abs();
        let lq = (self.q + 1.0).ln();
        let m = la.max(lq);
        let a = (la - m).exp();
        let b1 = (lq - m).exp();
        let b2 = b1 * ((self.q - 1.0) / (self.q + 1.0));
        m + (b1.hypot(a) + b2.hypot(a)).ln()
    }

    /// `ln K` on the annulus: `(|q+1+ia|+|q-1+ia|)^2 / (4q)`.
    pub fn ln_distortion_annulus(&self) -> f64 {
        let v = 2.0 * self.ln_coefficient_sum() - 4f64.ln() - self.q.ln();
        v.max(0.0)
    }

    pub fn distortion_annulus(&self) -> f64 {
        self.ln_distortion_annulus().exp()
    }

    /// Signed log-radius exponent `ln(rho/R)` clamped to the annulus.
    fn branch_u(&self, ln_t: f64) -> Option<f64> {
        if ln_t > self.annulus.ln_outer {
            None
        } else if ln_t >= self.annulus.ln_inner {
            Some(ln_t - self.annulus.ln_outer)
        } else {
            Some(self.annulus.ln_inner - self.annulus.ln_outer)
        }
    }

    fn on_annulus(&self, ln_t: f64) -> bool {
        ln_t <= self.annulus.ln_outer && ln_t >= self.annulus.ln_inner
    }
}

fn apply(block: &BlockParams, z: ComplexPoint) -> Result<ComplexPoint> {
    check_point(z)?;
    let t = z.norm();
    if t == 0.0 {
        return Ok(z);
    }
    let ln_t = t.ln();
    let Some(u) = block.branch_u(ln_t) else {
        return Ok(z);
    };
    let twist = block.alpha.scale(u).to_f64();
    if !twist.is_finite() {
        return Err(Error::OutOfRange(format!("rotation angle exp({})", block.alpha.scale(u).ln_abs())));
    }
    let scale = ((block.q - 1.0) * u).exp();
    Ok(z * Complex64::from_polar(scale, twist))
}

/// Pure rotation block; requires `q = 1`.
pub fn rotation_block_eval(block: &BlockParams, z: ComplexPoint) -> Result<ComplexPoint> {
    if block.q != 1.0 {
        return Err(Error::invalid(format!("rotation block needs q = 1, got {}", block.q)));
    }
    apply(block, z)
}

pub fn stretch_block_eval(block: &BlockParams, z: ComplexPoint) -> Result<ComplexPoint> {
    apply(block, z)
}

fn nonzero_ln(z: ComplexPoint) -> Result<f64> {
    check_point(z)?;
    let t = z.norm();
    if t == 0.0 {
        return Err(Error::invalid("differential undefined at z = 0"));
    }
    Ok(t.ln())
}

/// `ln(|∂φ| + |∂̄φ|)`.
pub fn ln_differential_norm(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    let ln_t = nonzero_ln(z)?;
    Ok(match block.branch_u(ln_t) {
        None => 0.0,
        Some(u) if block.on_annulus(ln_t) => {
            (block.q - 1.0) * u + block.ln_coefficient_sum() - std::f64::consts::LN_2
        }
        Some(u) => (block.q - 1.0) * u,
    })
}

pub fn ln_jacobian(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    let ln_t = nonzero_ln(z)?;
    Ok(match block.branch_u(ln_t) {
        None => 0.0,
        Some(u) if block.on_annulus(ln_t) => block.q.ln() + 2.0 * (block.q - 1.0) * u,
        Some(u) => 2.0 * (block.q - 1.0) * u,
    })
}

pub fn ln_distortion(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    let ln_t = nonzero_ln(z)?;
    Ok(if block.on_annulus(ln_t) {
        block.ln_distortion_annulus()
    } else {
        0.0
    })
}

/// `|∂φ| + |∂̄φ|` (saturates to `inf`).
pub fn block_differential_norm(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    ln_differential_norm(block, z).map(f64::exp)
}

pub fn block_jacobian(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    ln_jacobian(block, z).map(f64::exp)
}

pub fn block_distortion(block: &BlockParams, z: ComplexPoint) -> Result<f64> {
    ln_distortion(block, z).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialSample {
    pub op_norm: f64,
    pub jacobian: f64,
    pub distortion: f64,
}

pub fn closed_form_sample(block: &BlockParams, z: ComplexPoint) -> Result<DifferentialSample> {
    Ok(DifferentialSample {
        op_norm: block_differential_norm(block, z)?,
        jacobian: block_jacobian(block, z)?,
        distortion: block_distortion(block, z)?,
    })
}

/// Central-difference differential of an arbitrary evaluator.
pub fn fd_oracle<F>(map_eval: F, z: ComplexPoint, rel_step: f64) -> Result<DifferentialSample>
where
    F: Fn(ComplexPoint) -> Result<ComplexPoint>,
{
    check_point(z)?;
    if !(rel_step > 0.0 && rel_step <= 1e-3) {
        return Err(Error::invalid(format!("rel_step must lie in (0, 1e-3], got {rel_step}")));
    }
    let scale = z.norm().max(f64::MIN_POSITIVE);
    let h = rel_step * scale;
    let fx = (map_eval(z + h)? - map_eval(z - h)?) / (2.0 * h);
    let fy = (map_eval(z + Complex64::i() * h)? - map_eval(z - Complex64::i() * h)?) / (2.0 * h);
    let dz = 0.5 * (fx - Complex64::i() * fy);
    let dzbar = 0.5 * (fx + Complex64::i() * fy);
    let op_norm = dz.norm() + dzbar.norm();
    let jacobian = fx.re * fy.im - fx.im * fy.re;
    if !(jacobian.abs() > 1e-12 * op_norm * op_norm) {
        return Err(Error::Degenerate {
            re: z.re,
            im: z.im,
            jacobian,
        });
    }
    Ok(DifferentialSample {
        op_norm,
        jacobian,
        distortion: op_norm * op_norm / jacobian,
    })
}

/// [`fd_oracle`] on a block, refusing points within two steps of a breakpoint circle.
pub fn fd_oracle_block(block: &BlockParams, z: ComplexPoint, rel_step: f64) -> Result<DifferentialSample> {
    check_point(z)?;
    let t = z.norm();
    let guard = 2.0 * rel_step * t;
    for b in [block.annulus.r_inner(), block.annulus.r_outer()] {
        if (t - b).abs() <= guard {
            return Err(Error::invalid(format!("|z| = {t} within the excluded zone of breakpoint {b}")));
        }
    }
    fd_oracle(|w| stretch_block_eval(block, w), z, rel_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn unit_block(alpha: f64, q: f64) -> BlockParams {
        BlockParams::new(Annulus::new(1.0 / E, 1.0).unwrap(), alpha, q).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let b = unit_block(1.0, 1.0);
        assert_eq!(rotation_block_eval(&b, c(2.0, 0.0)).unwrap(), c(2.0, 0.0));
        let w = rotation_block_eval(&b, c(1.0 / E, 0.0)).unwrap();
        assert!((w - c(0.19877, -0.30956)).norm() < 1e-5, "{w}");
        let id = unit_block(0.0, 1.0);
        assert_eq!(rotation_block_eval(&id, c(0.5, 0.1)).unwrap(), c(0.5, 0.1));
        assert_eq!(rotation_block_eval(&b, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(rotation_block_eval(&b, c(f64::NAN, 0.0)).is_err());
        assert!(rotation_block_eval(&unit_block(1.0, 2.0), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn stretch_examples() {
        let b = unit_block(0.0, 2.0);
        let w = stretch_block_eval(&b, c(1.0 / E, 0.0)).unwrap();
        assert!((w.re - (-2f64).exp()).abs() < 1e-15 && w.im == 0.0);
        let far = c(2.0, 0.0);
        assert_eq!(stretch_block_eval(&unit_block(3.0, 5.0), far).unwrap(), far);
    }

    #[test]
    fn differential_examples() {
        let b = unit_block(1.0, 1.0);
        assert_eq!(block_differential_norm(&b, c(1.5, 0.0)).unwrap(), 1.0);
        let mid = c(0.6, 0.0);
        let golden = (5f64.sqrt() + 1.0) / 2.0;
        assert!((block_differential_norm(&b, mid).unwrap() - golden).abs() < 1e-14);
        let s = unit_block(0.0, 2.0);
        assert!((block_differential_norm(&s, c(0.1, 0.0)).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(block_differential_norm(&b, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn jacobian_examples() {
        for z in [c(0.1, 0.0), c(0.5, 0.2), c(3.0, 0.0)] {
            assert!((block_jacobian(&unit_block(7.0, 1.0), z).unwrap() - 1.0).abs() < 1e-15);
        }
        let s = unit_block(0.0, 2.0);
        assert!((block_jacobian(&s, c(1.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((block_jacobian(&s, c(0.1, 0.0)).unwrap() - (-2f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(block_distortion(&unit_block(0.0, 1.0), c(0.6, 0.0)).unwrap(), 1.0);
        let golden_sq = ((5f64.sqrt() + 1.0) / 2.0).powi(2);
        let k = block_distortion(&unit_block(1.0, 1.0), c(0.6, 0.0)).unwrap();
        assert!((k - golden_sq).abs() < 1e-13);
        let k = block_distortion(&unit_block(10.0, 3.0), c(0.6, 0.0)).unwrap();
        let direct = (Complex64::new(4.0, 10.0).norm() + Complex64::new(2.0, 10.0).norm()).powi(2) / 12.0;
        assert!((k - direct).abs() < 1e-12 * direct);
        assert!((k - 36.64).abs() < 0.01 && k <= 400.0 / 3.0);
        assert_eq!(block_distortion(&unit_block(10.0, 3.0), c(0.1, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn huge_alpha_stays_finite_in_logs() {
        let a = Annulus::from_ln(-1e9, -1e9 + 1.0).unwrap();
        let b = BlockParams::from_log(a, LogReal::from_parts(false, 5e8), 1e9).unwrap();
        let lk = b.ln_distortion_annulus();
        // K ~ (2a)^2 / (4q) = a^2 / q
        assert!((lk - (1e9 - 1e9f64.ln())).abs() < 1e-6 * 1e9);
        assert!(lk.is_finite());
    }

    #[test]
    fn fd_oracle_identity() {
        let s = fd_oracle(Ok, c(0.3, -0.7), 1e-6).unwrap();
        for v in [s.op_norm, s.jacobian, s.distortion] {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fd_oracle_rejections() {
        let b = unit_block(1.0, 1.0);
        assert!(fd_oracle_block(&b, c(1.0, 0.0), 1e-6).is_err());
        assert!(fd_oracle(Ok, c(1.0, 0.0), 0.1).is_err());
        let collapse = |z: ComplexPoint| Ok(Complex64::new(z.re, 0.0));
        assert!(matches!(fd_oracle(collapse, c(1.0, 1.0), 1e-6), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn fd_oracle_matches_rotation_and_stretch() {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        for (alpha, q) in [(1.0, 1.0), (3.0, 2.0)] {
            let b = unit_block(alpha, q);
            let z = Complex64::from_polar(0.6, 0.4);
            let fd = fd_oracle_block(&b, z, 1e-6).unwrap();
            let cf = closed_form_sample(&b, z).unwrap();
            assert!(rel(fd.op_norm, cf.op_norm) < 1e-5);
            assert!(rel(fd.jacobian, cf.jacobian) < 1e-5);
            assert!(rel(fd.distortion, cf.distortion) < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn rotation_preserves_circles(t in 1e-3f64..3.0, th in 0.0f64..6.3, alpha in -20.0f64..20.0) {
            let b = unit_block(alpha, 1.0);
            let w = rotation_block_eval(&b, Complex64::from_polar(t, th)).unwrap();
            prop_assert!((w.norm() - t).abs() <= 1e-12);
        }

        #[test]
        fn identity_outside(t in 1.0f64..10.0, th in 0.0f64..6.3, alpha in -20.0f64..20.0, q in 1.0f64..6.0) {
            let b = unit_block(alpha, q);
            let z = Complex64::from_polar(t * (1.0 + 1e-12), th);
            let w = stretch_block_eval(&b, z).unwrap();
            prop_assert!((w - z).norm() <= 1e-15 * z.norm());
        }

        #[test]
        fn stretch_q1_is_rotation(t in 1e-3f64..3.0, th in 0.0f64..6.3, alpha in -20.0f64..20.0) {
            let b = unit_block(alpha, 1.0);
            let z = Complex64::from_polar(t, th);
            let a = stretch_block_eval(&b, z).unwrap();
            let r = rotation_block_eval(&b, z).unwrap();
            prop_assert!((a - r).norm() <= 1e-15 * z.norm());
        }

        #[test]
        fn continuous_across_breakpoints(th in 0.0f64..6.3, alpha in -20.0f64..20.0, q in 1.0f64..6.0) {
            let b = unit_block(alpha, q);
            let d = 1e-9;
            for edge in [1.0 / E, 1.0] {
                let lo = stretch_block_eval(&b, Complex64::from_polar(edge - d, th)).unwrap();
                let hi = stretch_block_eval(&b, Complex64::from_polar(edge + d, th)).unwrap();
                let lip = (q + alpha.abs() + 1.0) * 2.0;
                prop_assert!((lo - hi).norm() <= lip * 2.0 * d + 1e-15);
            }
        }

        #[test]
        fn op_norm_squared_is_k_times_j(t in 0.37f64..0.99, alpha in -50.0f64..50.0, q in 1.0f64..10.0) {
            let b = unit_block(alpha, q);
            let z = Complex64::new(t, 0.0);
            let s = closed_form_sample(&b, z).unwrap();
            let lhs = s.op_norm * s.op_norm;
            let rhs = s.distortion * s.jacobian;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
            prop_assert!(s.distortion >= 1.0);
            if 2.0 <= q + 1.0 && q + 1.0 <= alpha.abs() {
                prop_assert!(s.distortion <= 4.0 * alpha * alpha / q);
            }
        }
    }
}
