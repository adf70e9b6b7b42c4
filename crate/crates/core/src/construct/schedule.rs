//! Radius schedules picked from a decreasing source sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decreasing source sequence `lambda_k`, stored as logarithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSeq {
    Explicit { ln_values: Vec<f64> },
    /// `ln lambda_k = ln_first - step * k`, `k = 0, 1, ...`.
    Exponential { ln_first: f64, step: f64 },
}

impl Default for LambdaSeq {
    /// `lambda_k = e^{-k}`, `k >= 1`.
    fn default() -> Self {
        LambdaSeq::Exponential {
            ln_first: -1.0,
            step: 1.0,
        }
    }
}

impl LambdaSeq {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut ln_values = Vec::with_capacity(values.len());
        for &v in values {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("lambda values must be positive, got {v}")));
            }
            ln_values.push(v.ln());
        }
        Self::from_ln(ln_values)
    }

    pub fn from_ln(ln_values: Vec<f64>) -> Result<Self> {
        if ln_values.is_empty() {
            return Err(Error::invalid("lambda sequence is empty"));
        }
        if ln_values.iter().any(|v| !v.is_finite()) || ln_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("lambda sequence must be strictly decreasing"));
        }
        Ok(LambdaSeq::Explicit { ln_values })
    }

    pub fn exponential(ln_first: f64, step: f64) -> Result<Self> {
        if !(ln_first.is_finite() && step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("exponential lambda needs a finite start and a positive step"));
        }
        Ok(LambdaSeq::Exponential { ln_first, step })
    }

    pub fn ln_at(&self, k: usize) -> Option<f64> {
        match self {
            LambdaSeq::Explicit { ln_values } => ln_values.get(k).copied(),
            LambdaSeq::Exponential { ln_first, step } => Some(ln_first - step * k as f64),
        }
    }

    /// Smallest index whose member lies strictly below `ln_bound`.
    fn first_below(&self, ln_bound: f64, from: usize) -> Option<usize> {
        match self {
            LambdaSeq::Explicit { ln_values } => {
                let k = ln_values.partition_point(|&v| v >= ln_bound);
                (k.max(from) < ln_values.len()).then(|| k.max(from))
            }
            LambdaSeq::Exponential { ln_first, step } => {
                let guess = ((ln_first - ln_bound) / step).floor().max(0.0);
                let mut k = if guess >= 1e15 { return None } else { guess as usize };
                k = k.saturating_sub(1).max(from);
                while self.ln_at(k)? >= ln_bound {
                    k += 1;
                }
                Some(k)
            }
        }
    }
}

/// `r_1 > r_2 > ... > r_N`, with `R_n = e r_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub ln_radii: Vec<f64>,
    pub source_indices: Option<Vec<usize>>,
}

impl RadiusSchedule {
    /// A hand-specified schedule; checks the base spacing constraints.
    pub fn from_ln(ln_radii: Vec<f64>) -> Result<Self> {
        let s = RadiusSchedule {
            ln_radii,
            source_indices: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_radii(radii: &[f64]) -> Result<Self> {
        let mut v = Vec::with_capacity(radii.len());
        for &r in radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid(format!("radius must be positive, got {r}")));
            }
            v.push(r.ln());
        }
        Self::from_ln(v)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&first) = self.ln_radii.first() else {
            return Err(Error::invalid("schedule is empty"));
        };
        if !(first < -1.0) {
            return Err(Error::invalid(format!("r_1 = exp({first}) must be < 1/e")));
        }
        for (i, w) in self.ln_radii.windows(2).enumerate() {
            if !(w[1] < w[0] - 1.0 - std::f64::consts::LN_2) {
                return Err(Error::invalid(format!(
                    "r_{} = exp({}) must be < r_{}/(2e)",
                    i + 2,
                    w[1],
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ln_radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_radii.is_empty()
    }
}

/// Stage-by-stage radius picker used during co-construction.
///
/// Each stage returns the first unused `lambda_k` below
/// `safety/e` (stage 1), `safety r_{n-1}/(2e)` and `safety s_{n-1}`,
/// where `ln s_{n-1} = -(q_1 + ... + q_{n-1} - (n-1))`, that also passes
/// the caller's extra predicate.
#[derive(Clone, Debug)]
pub struct SchedulePicker {
    seq: LambdaSeq,
    ln_safety: f64,
    ln_radii: Vec<f64>,
    indices: Vec<usize>,
    ln_s: f64,
}

impl SchedulePicker {
    pub fn new(seq: LambdaSeq, safety: f64) -> Result<Self> {
        if !(safety > 0.0 && safety < 1.0) {
            return Err(Error::invalid(format!("safety must lie in (0, 1), got {safety}")));
        }
        Ok(SchedulePicker {
            seq,
            ln_safety: safety.ln(),
            ln_radii: Vec::new(),
            indices: Vec::new(),
            ln_s: 0.0,
        })
    }

    /// `ln s_n` after the recorded `q` history.
    pub fn ln_inner_scale(&self) -> f64 {
        self.ln_s
    }

    pub fn stage(&self) -> usize {
        self.ln_radii.len() + 1
    }

    fn ln_bound(&self) -> f64 {
        let base = match self.ln_radii.last() {
            None => -1.0,
            Some(&prev) => prev - 1.0 - std::f64::consts::LN_2,
        };
        self.ln_safety + base.min(self.ln_s)
    }

    /// Picks the next radius. `extra` must be monotone (false then true) in
    /// decreasing radius for the gallop phase to find the first passing member.
    pub fn next<F>(&mut self, mut extra: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<bool>,
    {
        let stage = self.stage();
        let from = self.indices.last().map_or(0, |k| k + 1);
        let exhausted = || Error::invalid(format!("lambda sequence exhausted at stage {stage}"));
        let start = self.seq.first_below(self.ln_bound(), from).ok_or_else(exhausted)?;
        let ok = |k: usize, extra: &mut F| -> Result<Option<bool>> {
            match self.seq.ln_at(k) {
                None => Ok(None),
                Some(v) => extra(v).map(Some),
            }
        };
        let mut found = None;
        let mut k = start;
        for _ in 0..64 {
            match ok(k, &mut extra)? {
                None => return Err(exhausted()),
                Some(true) => {
                    found = Some(k);
                    break;
                }
                Some(false) => k += 1,
            }
        }
        if found.is_none() {
            let mut lo = k - 1;
            let mut step = 1usize;
            let hi = loop {
                let cand = k.checked_add(step).ok_or_else(exhausted)?;
                match ok(cand, &mut extra)? {
                    Some(true) => break cand,
                    Some(false) => {
                        lo = cand;
                        step = step.checked_mul(2).ok_or_else(exhausted)?;
                        if step as u64 > 1u64 << 50 {
                            return Err(exhausted());
                        }
                    }
                    None => {
                        // explicit list: fall back to a linear scan of what is left
                        let mut j = lo + 1;
                        loop {
                            match ok(j, &mut extra)? {
                                Some(true) => break,
                                Some(false) => j += 1,
                                None => return Err(exhausted()),
                            }
                        }
                        break j;
                    }
                }
            };
            let mut hi = hi;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid, &mut extra)? == Some(true) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            found = Some(hi);
        }
        let k = found.expect("picked");
        let v = self.seq.ln_at(k).expect("index in range");
        self.ln_radii.push(v);
        self.indices.push(k);
        Ok(v)
    }

    /// Records `q_n` for the stage just picked.
    pub fn commit_q(&mut self, q: f64) {
        self.ln_s -= q - 1.0;
    }

    pub fn finish(self) -> RadiusSchedule {
        RadiusSchedule {
            ln_radii: self.ln_radii,
            source_indices: Some(self.indices),
        }
    }
}

/// Picks `depth` radii; the ansatz applies to the stages covered by `q_history`.
pub fn build_schedule(lambda_seq: &LambdaSeq, q_history: &[f64], depth: usize, safety: f64) -> Result<RadiusSchedule> {
    if depth == 0 {
        return Err(Error::invalid("depth must be >= 1"));
    }
    let mut picker = SchedulePicker::new(lambda_seq.clone(), safety)?;
    for n in 0..depth {
        picker.next(|_| Ok(true))?;
        if let Some(&q) = q_history.get(n) {
            if !(q >= 1.0) {
                return Err(Error::invalid(format!("q history entry {q} < 1")));
            }
            picker.commit_q(q);
        }
    }
    Ok(picker.finish())
}
