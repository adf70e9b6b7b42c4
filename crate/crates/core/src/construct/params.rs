//! Parameter rules for the stage sequence, and co-constructed builds.

use crate::blocks::{Annulus, BlockParams};
use crate::error::{Error, Result};
use crate::num::{LogReal, Positive};

use super::radial::{MapMeta, RadialMap, Theorem};
use super::schedule::{LambdaSeq, RadiusSchedule, SchedulePicker};
use super::target::{Gauge, TargetModulus};

/// How to pick `alpha_n` for pure rotation stages.
#[derive(Clone, Debug, PartialEq)]
pub enum RotationRule {
    /// `alpha_n = h(r_n) / r_n`.
    Stage1(Gauge),
    /// Explicit `alpha_n`.
    Custom(Vec<LogReal>),
}

fn block(ln_r: f64, ln_alpha: f64, q: f64) -> Result<BlockParams> {
    BlockParams::from_log(Annulus::standard(ln_r)?, LogReal::from_parts(false, ln_alpha), q)
}

fn stage1_ln_alpha(gauge: &Gauge, ln_r: f64) -> Result<f64> {
    Ok(gauge.ln_h(ln_r)? - ln_r)
}

pub fn params_pure_rotation(schedule: &RadiusSchedule, rule: &RotationRule) -> Result<Vec<BlockParams>> {
    schedule.validate()?;
    let mut out = Vec::with_capacity(schedule.len());
    for (i, &ln_r) in schedule.ln_radii.iter().enumerate() {
        let alpha = match rule {
            RotationRule::Stage1(g) => LogReal::from_parts(false, stage1_ln_alpha(g, ln_r)?),
            RotationRule::Custom(list) => *list
                .get(i)
                .ok_or_else(|| Error::invalid(format!("custom alpha list has {} entries, need {}", list.len(), schedule.len())))?,
        };
        if alpha.signum() < 0 || alpha.ln_abs() < 0.0 || alpha.is_zero() {
            return Err(Error::constraint(i + 1, format!("alpha = {:?} < 1", alpha)));
        }
        out.push(BlockParams::from_log(Annulus::standard(ln_r)?, alpha, 1.0)?);
    }
    Ok(out)
}

/// One stage of the `L^p` rule given `ln s_{n-1}`.
struct SubmainP<'a> {
    target: &'a TargetModulus,
    gauge: &'a Gauge,
}

#[derive(Clone, Copy, Debug)]
struct StageP {
    q: f64,
    ln_alpha: f64,
    ln_h: f64,
}

impl SubmainP<'_> {
    fn stage(&self, ln_r: f64, ln_s_prev: f64, stage: usize) -> Result<StageP> {
        self.target.check_corridor(ln_r, stage)?;
        let ln_phi = self.target.ln_phi(ln_r)?;
        let q = 1.0 + ln_r + ln_s_prev - ln_phi;
        let ln_h = self.gauge.ln_h(ln_r)?;
        let ln_alpha = ln_h + 0.5 * (-ln_phi).ln() - ln_r / self.target.p;
        Ok(StageP { q, ln_alpha, ln_h })
    }

    fn admissible(&self, s: &StageP, ln_r: f64, stage: usize) -> Result<()> {
        if !(s.q >= 1.0) {
            return Err(Error::constraint(stage, format!("q = {} < 1", s.q)));
        }
        if s.q.ln() > s.ln_alpha {
            return Err(Error::constraint(
                stage,
                format!("q = {} > alpha = exp({}); radius exp({ln_r}) is not small enough", s.q, s.ln_alpha),
            ));
        }
        let half_g = 0.5 * self.target.ln_compression(ln_r)?;
        if s.ln_h < half_g {
            return Err(Error::constraint(stage, "gauge h < sqrt(g): h decays too fast"));
        }
        Ok(())
    }
}

fn check_ansatz(ln_r: f64, ln_s_prev: f64, stage: usize) -> Result<()> {
    if stage > 1 && !(ln_r < ln_s_prev) {
        return Err(Error::constraint(
            stage,
            format!("ansatz fails: r = exp({ln_r}) >= s = exp({ln_s_prev})"),
        ));
    }
    Ok(())
}

fn check_gauge_monotone(prev: &mut Option<f64>, ln_g: f64, stage: usize) -> Result<()> {
    if let Some(p) = *prev {
        if !(ln_g < p) {
            return Err(Error::constraint(stage, "compression gauge g is not decreasing along the schedule"));
        }
    }
    *prev = Some(ln_g);
    Ok(())
}

/// `L^p` rule on a given schedule; fails on the first inadmissible stage.
pub fn params_submain_p(schedule: &RadiusSchedule, target: &TargetModulus, gauge: &Gauge) -> Result<Vec<BlockParams>> {
    schedule.validate()?;
    let rule = SubmainP { target, gauge };
    let mut ln_s = 0.0;
    let mut g_prev = None;
    let mut out = Vec::with_capacity(schedule.len());
    for (i, &ln_r) in schedule.ln_radii.iter().enumerate() {
        let n = i + 1;
        check_ansatz(ln_r, ln_s, n)?;
        let s = rule.stage(ln_r, ln_s, n)?;
        rule.admissible(&s, ln_r, n)?;
        check_gauge_monotone(&mut g_prev, target.ln_compression(ln_r)?, n)?;
        out.push(block(ln_r, s.ln_alpha, s.q)?);
        ln_s -= s.q - 1.0;
    }
    Ok(out)
}

fn submain_1_stage(ln_r: f64, beta: f64, gauge: &Gauge) -> Result<(f64, f64, f64)> {
    let l = -ln_r;
    let q = beta * l;
    let ln_h = gauge.ln_h(ln_r)?;
    let ln_alpha = ln_h - ln_r + 0.5 * q.ln();
    Ok((q, ln_alpha, ln_h))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be >= 1, got {beta}")));
    }
    Ok(())
}

/// `L^1` rule: `q_n = beta ln(1/r_n)`, `alpha_n = (h/r_n) sqrt(q_n)`.
pub fn params_submain_1(schedule: &RadiusSchedule, beta: f64, gauge: &Gauge) -> Result<Vec<BlockParams>> {
    check_beta(beta)?;
    schedule.validate()?;
    let mut ln_s = 0.0;
    let mut out = Vec::with_capacity(schedule.len());
    for (i, &ln_r) in schedule.ln_radii.iter().enumerate() {
        let n = i + 1;
        check_ansatz(ln_r, ln_s, n)?;
        let (q, ln_alpha, _) = submain_1_stage(ln_r, beta, gauge)?;
        if !(q >= 1.0) {
            return Err(Error::constraint(n, format!("q = {q} < 1")));
        }
        if !(q.ln() < ln_alpha) {
            return Err(Error::constraint(n, format!("q = {q} >= alpha = exp({ln_alpha})")));
        }
        out.push(block(ln_r, ln_alpha, q)?);
        ln_s -= q - 1.0;
    }
    Ok(out)
}

/// `ln alpha_n <= ln sqrt(beta) + ln h(r_n) + ln(1/r_n)/(1 - eps)` per stage.
pub fn growth_estimate(blocks: &[BlockParams], beta: f64, gauge: &Gauge, epsilon: f64) -> Result<Vec<bool>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    blocks
        .iter()
        .map(|b| {
            let ln_r = b.annulus.ln_inner();
            let rhs = 0.5 * beta.ln() + gauge.ln_h(ln_r)? - ln_r / (1.0 - epsilon);
            Ok(b.alpha.ln_abs() <= rhs)
        })
        .collect()
}

/// Shared knobs for co-constructed builds.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub lambda: LambdaSeq,
    pub depth: usize,
    pub safety: f64,
}

impl BuildOptions {
    pub fn new(depth: usize) -> Self {
        BuildOptions {
            lambda: LambdaSeq::default(),
            depth,
            safety: 0.5,
        }
    }

    fn picker(&self) -> Result<SchedulePicker> {
        if self.depth == 0 {
            return Err(Error::invalid("depth must be >= 1"));
        }
        SchedulePicker::new(self.lambda.clone(), self.safety)
    }
}

fn thinning_ok(ln_h: f64, p: f64, n: usize) -> bool {
    2.0 * p * ln_h <= -2.0 * (n as f64).ln()
}

/// Co-constructs radii and `L^p`-rule parameters.
pub fn build_submain_p(target: &TargetModulus, gauge: &Gauge, opts: &BuildOptions) -> Result<RadialMap> {
    let rule = SubmainP { target, gauge };
    let mut picker = opts.picker()?;
    let mut g_prev = None;
    let mut blocks = Vec::with_capacity(opts.depth);
    for n in 1..=opts.depth {
        let ln_s = picker.ln_inner_scale();
        if ln_s < target.phi.ln_r_min() {
            return Err(Error::invalid(format!("phi table does not reach stage {n}")));
        }
        let ln_r = picker.next(|ln_r| {
            let s = rule.stage(ln_r, ln_s, n)?;
            Ok(s.q.ln() <= s.ln_alpha && thinning_ok(s.ln_h, target.p, n))
        })?;
        let s = rule.stage(ln_r, ln_s, n)?;
        rule.admissible(&s, ln_r, n)?;
        check_gauge_monotone(&mut g_prev, target.ln_compression(ln_r)?, n)?;
        blocks.push(block(ln_r, s.ln_alpha, s.q)?);
        picker.commit_q(s.q);
    }
    let meta = MapMeta {
        theorem: Theorem::SubmainP,
        p: Some(target.p),
        beta: None,
        epsilon: None,
        depth: blocks.len(),
        rule: None,
        phi: Some(target.phi.to_string()),
        gauge: Some(gauge.descriptor()),
    };
    RadialMap::new(blocks, meta)
}

/// Co-constructs radii and `L^1`-rule parameters.
pub fn build_submain_1(beta: f64, gauge: &Gauge, opts: &BuildOptions) -> Result<RadialMap> {
    check_beta(beta)?;
    let mut picker = opts.picker()?;
    let mut blocks = Vec::with_capacity(opts.depth);
    for n in 1..=opts.depth {
        let ln_r = picker.next(|ln_r| {
            let (q, ln_alpha, ln_h) = submain_1_stage(ln_r, beta, gauge)?;
            Ok(q >= 1.0 && q.ln() < ln_alpha && thinning_ok(ln_h, 1.0, n))
        })?;
        let (q, ln_alpha, _) = submain_1_stage(ln_r, beta, gauge)?;
        blocks.push(block(ln_r, ln_alpha, q)?);
        picker.commit_q(q);
    }
    let meta = MapMeta {
        theorem: Theorem::Submain1,
        p: Some(1.0),
        beta: Some(beta),
        epsilon: None,
        depth: blocks.len(),
        rule: None,
        phi: None,
        gauge: Some(gauge.descriptor()),
    };
    RadialMap::new(blocks, meta)
}

/// Co-constructs a pure rotation map with `alpha_n = h(r_n)/r_n`.
pub fn build_rotation(gauge: &Gauge, opts: &BuildOptions) -> Result<RadialMap> {
    let mut picker = opts.picker()?;
    let mut blocks = Vec::with_capacity(opts.depth);
    for n in 1..=opts.depth {
        let ln_r = picker.next(|ln_r| {
            let ln_a = stage1_ln_alpha(gauge, ln_r)?;
            Ok(ln_a >= 0.0 && thinning_ok(gauge.ln_h(ln_r)?, 1.0, n))
        })?;
        blocks.push(block(ln_r, stage1_ln_alpha(gauge, ln_r)?, 1.0)?);
        picker.commit_q(1.0);
    }
    let mut meta = MapMeta::custom(blocks.len());
    meta.rule = Some("rotation".into());
    meta.gauge = Some(gauge.descriptor());
    RadialMap::new(blocks, meta)
}

/// `alpha_n = r_n^{-1/p} sqrt(ln 1/phi(r_n))`, the borderline pure-rotation choice.
pub fn critical_rotation_alphas(schedule: &RadiusSchedule, target: &TargetModulus) -> Result<Vec<LogReal>> {
    schedule
        .ln_radii
        .iter()
        .map(|&ln_r| {
            let lp = target.ln_phi(ln_r)?;
            Ok(LogReal::positive(Positive::from_ln(0.5 * (-lp).ln() - ln_r / target.p)))
        })
        .collect()
}
