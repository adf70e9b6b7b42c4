//! Pointwise evaluation, rotation statistics and bound verification.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{check_point, ComplexPoint};
use crate::construct::{DistortionField, RadialMap, RadialProfile};
use crate::error::{Error, Result};
use crate::num::LogReal;

const TAU: f64 = std::f64::consts::TAU;

/// `f(t e^{i th}) = m(t) e^{i(th + tau(t))}`.
pub fn eval_map<P: RadialProfile + ?Sized>(map: &P, z: ComplexPoint) -> Result<ComplexPoint> {
    check_point(z)?;
    let t = z.norm();
    if t == 0.0 {
        return Ok(z);
    }
    let ln_t = t.ln();
    let tau = map.rotation(ln_t);
    let angle = tau.to_f64();
    if !angle.is_finite() {
        return Err(Error::OutOfRange(format!("rotation exp({}) at |z| = {t}", tau.ln_abs())));
    }
    Ok(z * Complex64::from_polar((map.ln_modulus(ln_t) - ln_t).exp(), angle))
}

fn check_unit_radius(ln_r: f64) -> Result<()> {
    if ln_r.is_nan() || ln_r > 0.0 || ln_r == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("radius exp({ln_r}) must lie in (0, 1]")));
    }
    Ok(())
}

/// `tau(r) - tau(1)` at `r = e^{ln_r}`.
pub fn lifted_rotation_ln<P: RadialProfile + ?Sized>(map: &P, ln_r: f64) -> Result<LogReal> {
    check_unit_radius(ln_r)?;
    Ok(map.rotation(ln_r).sub(map.rotation(0.0)))
}

pub fn lifted_rotation<P: RadialProfile + ?Sized>(map: &P, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius {r} must lie in (0, 1]")));
    }
    Ok(lifted_rotation_ln(map, r.ln())?.to_f64())
}

/// `floor(|tau(z0)| / 2 pi)`, saturating at `u64::MAX`.
pub fn winding_number_ln<P: RadialProfile + ?Sized>(map: &P, ln_z0: f64) -> Result<u64> {
    if !(ln_z0 < 0.0) {
        return Err(Error::invalid("winding number needs 0 < |z0| < 1"));
    }
    let turns = lifted_rotation_ln(map, ln_z0)?.to_f64().abs() / TAU;
    Ok(if turns >= u64::MAX as f64 { u64::MAX } else { turns.floor() as u64 })
}

pub fn winding_number<P: RadialProfile + ?Sized>(map: &P, z0_mod: f64) -> Result<u64> {
    if !(z0_mod > 0.0 && z0_mod < 1.0) {
        return Err(Error::invalid(format!("winding number needs 0 < |z0| < 1, got {z0_mod}")));
    }
    winding_number_ln(map, z0_mod.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub modulus: f64,
    pub rotation: f64,
    pub distortion: f64,
}

/// Radial samples along a decreasing log grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralTrace {
    pub samples: Vec<TraceSample>,
}

pub fn spiral_trace(map: &RadialMap, field: &DistortionField, rmin: f64, rmax: f64, points: usize) -> Result<SpiralTrace> {
    if !(rmin > 0.0 && rmin < rmax && rmax <= 1.0) {
        return Err(Error::invalid(format!("need 0 < rmin < rmax <= 1, got [{rmin}, {rmax}]")));
    }
    if points < 2 {
        return Err(Error::invalid("trace needs at least 2 points"));
    }
    let (hi, lo) = (rmax.ln(), rmin.ln());
    let mut samples = Vec::with_capacity(points);
    for k in 0..points {
        let ln_t = hi + (lo - hi) * k as f64 / (points - 1) as f64;
        samples.push(TraceSample {
            t: ln_t.exp(),
            modulus: map.ln_modulus(ln_t).exp(),
            rotation: lifted_rotation_ln(map, ln_t)?.to_f64(),
            distortion: field.ln_k(ln_t).exp(),
        });
    }
    Ok(SpiralTrace { samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralRate {
    pub ratios: Vec<f64>,
    /// `max` of the ratios from index `k` on.
    pub tail_max: Vec<f64>,
    /// Tail maximum over the second half of the tested radii.
    pub limsup_estimate: f64,
    pub depth: usize,
}

/// Ratios `|tau(r)| / g(r)`; `ln_rate` returns `ln g`.
pub fn spiral_rate<P, G>(map: &P, ln_radii: &[f64], ln_rate: G) -> Result<SpiralRate>
where
    P: RadialProfile + ?Sized,
    G: Fn(f64) -> f64,
{
    if ln_radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be strictly decreasing"));
    }
    let mut ratios = Vec::with_capacity(ln_radii.len());
    for &lr in ln_radii {
        let lg = ln_rate(lr);
        if !lg.is_finite() {
            return Err(Error::invalid(format!("rate function vanishes or blows up at exp({lr})")));
        }
        ratios.push((lifted_rotation_ln(map, lr)?.ln_abs() - lg).exp());
    }
    let mut tail_max = ratios.clone();
    for k in (0..tail_max.len().saturating_sub(1)).rev() {
        tail_max[k] = tail_max[k].max(tail_max[k + 1]);
    }
    let limsup_estimate = tail_max.get(ratios.len() / 2).copied().unwrap_or(0.0);
    Ok(SpiralRate {
        ratios,
        tail_max,
        limsup_estimate,
        depth: map.depth(),
    })
}

/// `ln ||K||_{L^p(B(0, ball_radius))}`.
pub fn ln_distortion_lp_norm(field: &DistortionField, p: f64, ball_radius: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if !(ball_radius > 0.0 && ball_radius.is_finite()) {
        return Err(Error::invalid(format!("ball radius must be positive, got {ball_radius}")));
    }
    Ok(field.ln_lp_norm(p, ball_radius.ln()))
}

/// `||K||_{L^p(B(0, ball_radius))}`; `inf` if not representable.
pub fn distortion_lp_norm(field: &DistortionField, p: f64, ball_radius: f64) -> Result<f64> {
    ln_distortion_lp_norm(field, p, ball_radius).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVerdict {
    Consistent,
    Violated,
    TendsToZero,
    DoesNotVanish,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub radii: Vec<f64>,
    pub ln_radii: Vec<f64>,
    pub ratios: Vec<f64>,
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    pub verdict: BoundVerdict,
    pub depth: usize,
    /// `r |tau| / sqrt(ln 1/r)` for the `L^1` check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corollary_ratios: Option<Vec<f64>>,
}

fn ln_log_inv_modulus<P: RadialProfile + ?Sized>(map: &P, ln_r: f64) -> Result<f64> {
    let lm = map.ln_modulus(ln_r);
    if !(lm < 0.0) {
        return Err(Error::invalid(format!("m(r) >= 1 at r = exp({ln_r})")));
    }
    Ok((-lm).ln())
}

fn check_radii(ln_radii: &[f64]) -> Result<()> {
    if ln_radii.is_empty() {
        return Err(Error::invalid("no radii to test"));
    }
    ln_radii.iter().try_for_each(|&r| check_unit_radius(r))
}

fn fitted(ratios: &[f64]) -> f64 {
    ratios.iter().copied().fold(0.0, f64::max)
}

/// Ratios `|tau(r)| / (r^{-1/p} sqrt(ln 1/m(r)))`.
///
/// Violated when the second half of the ratios is nondecreasing and ends
/// above everything seen in the first half.
pub fn verify_main_p<P: RadialProfile + ?Sized>(map: &P, p: f64, ln_radii: &[f64]) -> Result<BoundReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("main_p check needs p > 1, got {p}")));
    }
    check_radii(ln_radii)?;
    let mut ratios = Vec::with_capacity(ln_radii.len());
    for &lr in ln_radii {
        let bound = -lr / p + 0.5 * ln_log_inv_modulus(map, lr)?;
        ratios.push((lifted_rotation_ln(map, lr)?.ln_abs() - bound).exp());
    }
    let n = ratios.len();
    let half = n / 2;
    let tail = &ratios[half..];
    let first_max = fitted(&ratios[..half]);
    let grows = tail.len() >= 2 && tail.windows(2).all(|w| w[1] >= w[0]) && ratios[n - 1] > first_max;
    Ok(BoundReport {
        radii: ln_radii.iter().map(|r| r.exp()).collect(),
        ln_radii: ln_radii.to_vec(),
        fitted_c: fitted(&ratios),
        verdict: if grows { BoundVerdict::Violated } else { BoundVerdict::Consistent },
        ratios,
        depth: map.depth(),
        corollary_ratios: None,
    })
}

/// Default vanishing threshold for [`verify_main_1`].
pub const MAIN_1_THRESHOLD: f64 = 0.05;

/// Ratios `r |tau(r)| / sqrt(ln 1/m(r))` plus the `sqrt(ln 1/r)` variant.
///
/// Tends to zero when the second half of the variant sequence is
/// nonincreasing and ends at or below `threshold`.
pub fn verify_main_1<P: RadialProfile + ?Sized>(map: &P, ln_radii: &[f64], threshold: f64) -> Result<BoundReport> {
    check_radii(ln_radii)?;
    let mut ratios = Vec::with_capacity(ln_radii.len());
    let mut corollary = Vec::with_capacity(ln_radii.len());
    for &lr in ln_radii {
        if !(lr < 0.0) {
            return Err(Error::invalid("main_1 check needs r < 1"));
        }
        let lt = lifted_rotation_ln(map, lr)?.ln_abs();
        ratios.push((lr + lt - 0.5 * ln_log_inv_modulus(map, lr)?).exp());
        corollary.push((lr + lt - 0.5 * (-lr).ln()).exp());
    }
    let n = corollary.len();
    let tail = &corollary[n / 2..];
    let vanishing = tail.windows(2).all(|w| w[1] <= w[0]) && corollary[n - 1] <= threshold;
    Ok(BoundReport {
        radii: ln_radii.iter().map(|r| r.exp()).collect(),
        ln_radii: ln_radii.to_vec(),
        fitted_c: fitted(&ratios),
        verdict: if vanishing { BoundVerdict::TendsToZero } else { BoundVerdict::DoesNotVanish },
        ratios,
        depth: map.depth(),
        corollary_ratios: Some(corollary),
    })
}

/// Pair sampling for the Hölder-from-below statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub pairs: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub seed: u64,
    /// Multiplicative constant `C` in `|f(x) - f(y)| >= C |x - y|^a`.
    pub constant: f64,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler {
            pairs: 10_000,
            delta_min: 1e-6,
            delta_max: 1e-2,
            seed: 7,
            constant: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `sup ln|f(x)-f(y)| / ln|x-y|`.
    pub statistic: f64,
    /// `ln(1/C) / ln(1/delta_min)`.
    pub slack: f64,
    pub pairs: usize,
    pub regions: usize,
    pub worst_pair: [f64; 4],
}

impl HolderReport {
    pub fn consistent_with(&self, exponent: f64) -> bool {
        self.statistic <= exponent + self.slack
    }
}

/// Annuli and gaps `[ln lo, ln hi]` (`lo = -inf` for the core disc) that are
/// at least `delta_min` across in radius and whose images stay in range.
fn sample_regions(map: &RadialMap, delta_min: f64) -> Vec<(f64, f64)> {
    let ld = delta_min.ln();
    let mut out = Vec::new();
    let blocks = map.blocks();
    for (i, b) in blocks.iter().enumerate() {
        out.push((b.annulus.ln_inner(), b.annulus.ln_outer()));
        let below = blocks.get(i + 1).map_or(f64::NEG_INFINITY, |n| n.annulus.ln_outer());
        out.push((below, b.annulus.ln_inner()));
    }
    if blocks.is_empty() {
        out.push((f64::NEG_INFINITY, 0.0));
    }
    out.retain(|&(lo, hi)| hi >= ld && map.ln_modulus(lo.max(ld - 2.0)) > -600.0 && map.rotation(hi).to_f64().is_finite());
    out
}

/// Empirical Hölder-from-below exponent.
pub fn holder_lower_exponent(map: &RadialMap, sampler: &PairSampler) -> Result<HolderReport> {
    let PairSampler {
        pairs,
        delta_min,
        delta_max,
        seed,
        constant,
    } = *sampler;
    if !(delta_min > 0.0 && delta_min < delta_max && delta_max < 1.0) {
        return Err(Error::invalid("need 0 < delta_min < delta_max < 1"));
    }
    if !(constant > 0.0) || pairs == 0 {
        return Err(Error::invalid("need a positive constant and at least one pair"));
    }
    let regions = sample_regions(map, delta_min);
    if regions.is_empty() {
        return Err(Error::invalid("no representable region at the requested scales"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (la, lb) = (delta_min.ln(), delta_max.ln());
    let mut stat = f64::NEG_INFINITY;
    let mut worst = [0.0; 4];
    for _ in 0..pairs {
        let (lo, hi) = regions[rng.gen_range(0..regions.len())];
        let (a2, b2) = ((2.0 * lo).exp(), (2.0 * hi).exp());
        let t = (a2 + rng.gen::<f64>() * (b2 - a2)).sqrt();
        let x = Complex64::from_polar(t, rng.gen_range(0.0..TAU));
        let delta = rng.gen_range(la..lb).exp();
        let y = x + Complex64::from_polar(delta, rng.gen_range(0.0..TAU));
        let d = (x - y).norm();
        if d == 0.0 {
            return Err(Error::invalid("coincident pair"));
        }
        let df = (eval_map(map, x)? - eval_map(map, y)?).norm();
        let s = df.ln() / d.ln();
        if s > stat {
            stat = s;
            worst = [x.re, x.im, y.re, y.im];
        }
    }
    Ok(HolderReport {
        statistic: stat,
        slack: (1.0 / constant).ln() / (1.0 / delta_min).ln(),
        pairs,
        regions: regions.len(),
        worst_pair: worst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcCheck {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `(K - 1/K) / 2`.
    pub bound_coefficient: f64,
    /// `alpha sqrt(4 + alpha^2) / 2`.
    pub closed_form: f64,
    pub spiral_coefficient: f64,
    pub holds: bool,
}

/// Coefficient check for the spiral `z e^{i alpha log|z|}`.
pub fn qc_rotation_check(alpha: f64) -> Result<QcCheck> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let root = (4.0 + alpha * alpha).sqrt();
    let k = ((root + alpha) / 2.0).powi(2);
    let bound = 0.5 * (k - 1.0 / k);
    Ok(QcCheck {
        alpha,
        k,
        bound_coefficient: bound,
        closed_form: alpha * root / 2.0,
        spiral_coefficient: alpha,
        holds: alpha <= bound,
    })
}

/// Image of a circle or ray in log-polar form: `(ln |f|, arg f)` per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageCurve {
    pub kind: CurveKind,
    /// `ln t` of a circle, or the ray's angle.
    pub param: f64,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Circle,
    Ray,
}

/// Largest rotation whose angle modulo `2 pi` still carries information.
const ANGLE_LIMIT: f64 = 1e15;

/// Images of the circles `|z| = e^{ln_t}` and of `rays` equally spaced rays
/// down to `e^{ln_min}`. Samples whose rotation is too large to reduce
/// modulo `2 pi` are dropped.
pub fn image_curves<P: RadialProfile + ?Sized>(
    map: &P,
    circles: &[f64],
    rays: usize,
    ln_min: f64,
    samples: usize,
) -> Result<Vec<ImageCurve>> {
    if samples < 2 || !(ln_min < 0.0) {
        return Err(Error::invalid("need at least 2 samples and a minimum radius below 1"));
    }
    let point = |ln_t: f64, th: f64| -> Option<[f64; 2]> {
        let tau = map.rotation(ln_t).to_f64();
        (tau.abs() < ANGLE_LIMIT).then(|| [map.ln_modulus(ln_t) + 0.0, (th + tau).rem_euclid(TAU)])
    };
    let mut out = Vec::with_capacity(circles.len() + rays);
    for &ln_t in circles {
        check_unit_radius(ln_t)?;
        let points = (0..samples)
            .filter_map(|k| point(ln_t, TAU * k as f64 / (samples - 1) as f64))
            .collect();
        out.push(ImageCurve {
            kind: CurveKind::Circle,
            param: ln_t,
            points,
        });
    }
    for j in 0..rays {
        let th = TAU * j as f64 / rays as f64;
        let points = (0..samples)
            .filter_map(|k| point(ln_min * k as f64 / (samples - 1) as f64, th))
            .collect();
        out.push(ImageCurve {
            kind: CurveKind::Ray,
            param: th,
            points,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{rotation_block_eval, Annulus, BlockParams};
    use crate::construct::{
        build_submain_1, build_submain_p, compose_radial, distortion_field, BuildOptions, Gauge, Phi, TargetModulus,
    };
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn std_block(ln_r: f64, alpha: f64, q: f64) -> BlockParams {
        BlockParams::new(Annulus::standard(ln_r).unwrap(), alpha, q).unwrap()
    }

    fn theorem2(depth: usize) -> (RadialMap, Gauge, TargetModulus) {
        let t = TargetModulus::new(Phi::power(5.0).unwrap(), 2.0).unwrap();
        let g = Gauge::compression(t.clone());
        (build_submain_p(&t, &g, &BuildOptions::new(depth)).unwrap(), g, t)
    }

    #[test]
    fn eval_examples() {
        let id = RadialMap::identity();
        let z = Complex64::new(1.0, 1.0);
        assert_eq!(eval_map(&id, z).unwrap(), z);
        assert_eq!(eval_map(&id, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let b = std_block(-1.0, 1.0, 1.0);
        let m = compose_radial(vec![b]).unwrap();
        let z = Complex64::new(1.0 / E, 0.0);
        assert!((eval_map(&m, z).unwrap() - rotation_block_eval(&b, z).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn worked_map_at_r1() {
        let b = BlockParams::from_log(
            Annulus::standard(-8.0).unwrap(),
            LogReal::from_f64(8f64.powf(-0.25) * 40f64.sqrt() * 4f64.exp()),
            33.0,
        )
        .unwrap();
        let m = compose_radial(vec![b]).unwrap();
        assert_eq!(m.ln_modulus(-8.0), -40.0);
        let w = eval_map(&m, Complex64::new((-8f64).exp(), 0.0)).unwrap();
        assert!((w.norm() - (-40f64).exp()).abs() < 1e-13 * (-40f64).exp());
        let tau = lifted_rotation(&m, (-8f64).exp()).unwrap();
        assert!((tau + 205.32).abs() < 0.01);
    }

    #[test]
    fn rotation_and_winding() {
        let id = RadialMap::identity();
        assert_eq!(lifted_rotation(&id, 0.3).unwrap(), 0.0);
        assert_eq!(winding_number(&id, 0.3).unwrap(), 0);
        let m = compose_radial(vec![std_block(-1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(lifted_rotation(&m, 1.0 / E).unwrap(), -1.0);
        let m = compose_radial(vec![std_block(-1.0, 4.0 * PI, 1.0)]).unwrap();
        assert_eq!(winding_number(&m, (-1f64).exp()).unwrap(), 2);
        let m = compose_radial(vec![std_block(-1.0, 4.0 * PI - 0.01, 1.0)]).unwrap();
        assert_eq!(winding_number(&m, (-1f64).exp()).unwrap(), 1);
        assert!(winding_number(&m, 1.0).is_err());
        assert!(lifted_rotation(&m, 0.0).is_err());
    }

    #[test]
    fn huge_windings_saturate() {
        let (m, _, _) = theorem2(6);
        let lr = *m.ln_radii().last().unwrap();
        assert_eq!(winding_number_ln(&m, lr).unwrap(), u64::MAX);
    }

    #[test]
    fn lp_norm_examples() {
        let f = distortion_field(&RadialMap::identity());
        for p in [1.0, 2.0, 3.5] {
            assert!((distortion_lp_norm(&f, p, 1.0).unwrap() - PI.powf(1.0 / p)).abs() < 1e-14);
        }
        let f = distortion_field(&compose_radial(vec![std_block(-1.0, 1.0, 1.0)]).unwrap());
        let v = distortion_lp_norm(&f, 1.0, 1.0).unwrap();
        let golden_sq = ((5f64.sqrt() + 1.0) / 2.0).powi(2);
        let expect = PI * ((-2f64).exp() + golden_sq * (1.0 - (-2f64).exp()));
        assert!((v - expect).abs() < 1e-13 * expect);
        assert!((v - 7.537).abs() < 1e-3);
        assert!(distortion_lp_norm(&f, 0.5, 1.0).is_err());
    }

    #[test]
    fn spiral_rate_examples() {
        let id = RadialMap::identity();
        let r = spiral_rate(&id, &[-1.0, -2.0], |_| 0.0).unwrap();
        assert!(r.ratios.iter().all(|&x| x == 0.0));
        assert!(spiral_rate(&id, &[-1.0], |_| f64::NEG_INFINITY).is_err());

        let g = Gauge::log_pow(0.25).unwrap();
        let m = build_submain_1(1.0, &g, &BuildOptions::new(6)).unwrap();
        let rate = |lr: f64| g.ln_h(lr).unwrap() - lr + 0.5 * (-lr).ln();
        let r = spiral_rate(&m, &m.ln_radii(), rate).unwrap();
        assert!(r.ratios.iter().all(|&x| x >= 1.0));

        // equality at stage 1, so allow rounding of the logarithms
        let (m, g, _) = theorem2(8);
        let rate = |lr: f64| -lr / 2.0 + 0.5 * (-m.ln_modulus(lr)).ln() + g.ln_h(lr).unwrap();
        let r = spiral_rate(&m, &m.ln_radii(), rate).unwrap();
        assert!(r.ratios.iter().all(|&x| x >= 1.0 - 1e-14), "{:?}", r.ratios);
    }

    #[test]
    fn main_p_examples() {
        let rep = verify_main_p(&RadialMap::identity(), 2.0, &[-1.0, -2.0, -3.0]).unwrap();
        assert!(rep.ratios.iter().all(|&x| x == 0.0));
        assert_eq!(rep.verdict, BoundVerdict::Consistent);

        let (m, _, _) = theorem2(20);
        let rep = verify_main_p(&m, 2.0, &m.ln_radii()).unwrap();
        assert_eq!(rep.verdict, BoundVerdict::Consistent);
        assert!(rep.fitted_c.is_finite() && rep.fitted_c > 0.0);

        struct Runaway;
        impl RadialProfile for Runaway {
            fn ln_modulus(&self, ln_t: f64) -> f64 {
                ln_t
            }
            fn rotation(&self, ln_t: f64) -> LogReal {
                // tau = r^{-2/p} with p = 2
                LogReal::from_parts(true, -ln_t)
            }
        }
        let radii: Vec<f64> = (1..=12).map(|k| -2.0 * k as f64).collect();
        let rep = verify_main_p(&Runaway, 2.0, &radii).unwrap();
        assert_eq!(rep.verdict, BoundVerdict::Violated);
        assert!(verify_main_p(&m, 1.0, &m.ln_radii()).is_err());
    }

    #[test]
    fn main_p_rejects_expanding_modulus() {
        struct Flat;
        impl RadialProfile for Flat {
            fn ln_modulus(&self, _: f64) -> f64 {
                0.0
            }
            fn rotation(&self, _: f64) -> LogReal {
                LogReal::ZERO
            }
        }
        assert!(verify_main_p(&Flat, 2.0, &[-1.0]).is_err());
    }

    #[test]
    fn main_1_examples() {
        let rep = verify_main_1(&RadialMap::identity(), &[-1.0, -2.0], MAIN_1_THRESHOLD).unwrap();
        assert!(rep.ratios.iter().all(|&x| x == 0.0));

        struct Hyperbolic;
        impl RadialProfile for Hyperbolic {
            fn ln_modulus(&self, ln_t: f64) -> f64 {
                ln_t
            }
            fn rotation(&self, ln_t: f64) -> LogReal {
                // tau = c sqrt(ln 1/r) / r, c = 0.3
                LogReal::from_parts(true, 0.3f64.ln() + 0.5 * (-ln_t).ln() - ln_t)
            }
        }
        let radii: Vec<f64> = (1..=10).map(|k| -3.0 * k as f64).collect();
        let rep = verify_main_1(&Hyperbolic, &radii, MAIN_1_THRESHOLD).unwrap();
        assert_eq!(rep.verdict, BoundVerdict::DoesNotVanish);
        for v in rep.corollary_ratios.unwrap() {
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_curves_are_circles_and_rays() {
        let c = image_curves(&RadialMap::identity(), &[-1.0], 4, -3.0, 9).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c[0].points.iter().all(|p| p[0] == -1.0));
        assert!(c[2].points.iter().all(|p| (p[1] - PI / 2.0).abs() < 1e-15));
        assert!(image_curves(&RadialMap::identity(), &[1.0], 0, -3.0, 9).is_err());
    }

    #[test]
    fn qc_examples() {
        let c = qc_rotation_check(1.0).unwrap();
        assert!((c.bound_coefficient - 5f64.sqrt() / 2.0).abs() < 1e-12 && c.holds);
        let c = qc_rotation_check(1e-6).unwrap();
        assert!((c.bound_coefficient / 1e-6 - 1.0).abs() < 1e-6);
        let c = qc_rotation_check(5.0).unwrap();
        assert!((c.bound_coefficient - 5.0 * 29f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((c.k - 26.963).abs() < 1e-3);
        assert!(qc_rotation_check(0.0).is_err());
    }

    #[test]
    fn holder_identity_is_one() {
        let rep = holder_lower_exponent(&RadialMap::identity(), &PairSampler { pairs: 500, ..Default::default() }).unwrap();
        assert!((rep.statistic - 1.0).abs() < 1e-9, "{}", rep.statistic);
        assert_eq!(rep.slack, 0.0);
    }

    #[test]
    fn holder_is_deterministic() {
        let m = build_submain_1(1.0, &Gauge::log_pow(0.25).unwrap(), &BuildOptions::new(4)).unwrap();
        let s = PairSampler { pairs: 300, ..Default::default() };
        assert_eq!(holder_lower_exponent(&m, &s).unwrap(), holder_lower_exponent(&m, &s).unwrap());
    }

    #[test]
    fn min_modulus_on_circles() {
        let (m, _, _) = theorem2(3);
        for lt in [-0.5, -2.5, -3.5, -6.0] {
            let t: f64 = (lt as f64).exp();
            let mut lo = f64::INFINITY;
            for k in 0..360 {
                let z = Complex64::from_polar(t, TAU * k as f64 / 360.0);
                lo = lo.min(eval_map(&m, z).unwrap().norm());
            }
            let mt = m.ln_modulus(lt).exp();
            assert!((lo - mt).abs() <= 1e-12 * mt.max(1e-300) + 1e-300);
        }
    }

    proptest! {
        #[test]
        fn shrinking_radii_never_raises_fitted_c(cut in 0usize..19) {
            let (m, _, _) = theorem2(20);
            let radii = m.ln_radii();
            let full = verify_main_p(&m, 2.0, &radii).unwrap().fitted_c;
            let part = verify_main_p(&m, 2.0, &radii[cut..]).unwrap().fitted_c;
            prop_assert!(part <= full);
        }
    }

    #[test]
    fn lifted_rotation_is_continuous_on_grid() {
        let m = compose_radial(vec![std_block(-1.0, 30.0, 2.0), std_block(-4.0, 300.0, 1.5)]).unwrap();
        let mut prev = lifted_rotation_ln(&m, 0.0).unwrap().to_f64();
        for k in 1..10_000 {
            let lt = -8.0 * k as f64 / 9_999.0;
            let v = lifted_rotation_ln(&m, lt).unwrap().to_f64();
            assert!((v - prev).abs() < PI);
            prev = v;
        }
    }
}
