//! Series certificates for `K in L^p` and `Df in L^1`.

use serde::{Deserialize, Serialize};

use crate::blocks::BlockParams;
use crate::num::{log_add_exp, log_sub_exp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Evidence behind a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Every term is at most `constant / n^2`, with the constant fixed in advance.
    PSeries { constant: f64 },
    /// Consecutive-term ratios over the second half stay at or below `rho <= 0.8`.
    Ratio { rho: f64 },
    /// Second-half terms never drop below the first term.
    TermFloor { floor: f64 },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub ln_terms: Vec<f64>,
    pub terms: Vec<f64>,
    pub ln_partial_sums: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    pub witness: Witness,
}

impl SeriesReport {
    fn from_ln_terms(ln_terms: Vec<f64>, ln_domination: Option<f64>) -> Self {
        let mut ln_partial_sums = Vec::with_capacity(ln_terms.len());
        let mut acc = f64::NEG_INFINITY;
        for &t in &ln_terms {
            acc = log_add_exp(acc, t);
            ln_partial_sums.push(acc);
        }
        let (verdict, witness) = judge(&ln_terms, ln_domination);
        SeriesReport {
            terms: ln_terms.iter().map(|t| t.exp()).collect(),
            partial_sums: ln_partial_sums.iter().map(|t| t.exp()).collect(),
            ln_terms,
            ln_partial_sums,
            verdict,
            witness,
        }
    }

    /// `ln` of the total, `-inf` for an empty series.
    pub fn ln_sum(&self) -> f64 {
        self.ln_partial_sums.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Largest tail ratio accepted as a ratio-test witness.
pub const RATIO_MAX: f64 = 0.8;

fn judge(ln_terms: &[f64], ln_domination: Option<f64>) -> (Verdict, Witness) {
    let n = ln_terms.len();
    if n == 0 {
        return (Verdict::Converges, Witness::PSeries { constant: 0.0 });
    }
    if let Some(ln_c) = ln_domination {
        let dominated = ln_terms
            .iter()
            .enumerate()
            .all(|(i, &t)| t <= ln_c - 2.0 * ((i + 1) as f64).ln());
        if dominated {
            return (Verdict::Converges, Witness::PSeries { constant: ln_c.exp() });
        }
    }
    if n >= 2 {
        let from = (n / 2).saturating_sub(1);
        let rho = (from..n - 1)
            .map(|i| ln_terms[i + 1] - ln_terms[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if rho <= RATIO_MAX.ln() {
            return (Verdict::Converges, Witness::Ratio { rho: rho.exp() });
        }
        let first = ln_terms[0];
        if first.is_finite() && ln_terms[n / 2..].iter().all(|&t| t >= first) {
            return (Verdict::Diverges, Witness::TermFloor { floor: first.exp() });
        }
    }
    (Verdict::Inconclusive, Witness::None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub p: f64,
    pub depth: usize,
    /// `|A_n| alpha_n`.
    pub sobolev: SeriesReport,
    /// `|A_n| alpha_n^{2p} / q_n^p`.
    pub distortion: SeriesReport,
    /// `|A_n| K_n^p`, the exact stage contributions to `int K^p`.
    pub exact: SeriesReport,
    /// `(ln(1/m(r_n)) / q_n)^p`; lies in `[1, 2^p]` for the `L^p` rule.
    pub reduction_ratios: Vec<f64>,
    pub reduction_in_range: bool,
    pub verdict: Verdict,
}

/// `ln |A|` for an annulus.
pub fn ln_annulus_area(b: &BlockParams) -> f64 {
    std::f64::consts::PI.ln() + 2.0 * b.annulus.ln_inner() + (2.0 * b.annulus.ln_ratio()).exp_m1().ln()
}

/// `pi (e^2 - 1)`, the area of `A_n` in units of `r_n^2` for standard stages.
pub fn ln_standard_area_factor() -> f64 {
    std::f64::consts::PI.ln() + 2f64.exp_m1().ln()
}

pub fn series_certificate(blocks: &[BlockParams], p: f64) -> ConvergenceReport {
    let p = p.max(1.0);
    let mut sob = Vec::with_capacity(blocks.len());
    let mut dist = Vec::with_capacity(blocks.len());
    let mut exact = Vec::with_capacity(blocks.len());
    let mut ratios = Vec::with_capacity(blocks.len());
    let mut ln_s = 0.0;
    for b in blocks {
        let la = ln_annulus_area(b);
        let ln_alpha = b.alpha.ln_abs();
        sob.push(la + ln_alpha);
        dist.push(la + 2.0 * p * ln_alpha - p * b.q.ln());
        exact.push(la + p * b.ln_distortion_annulus());
        ln_s += (b.q - 1.0) * (b.annulus.ln_inner() - b.annulus.ln_outer());
        let ln_m = ln_s + b.annulus.ln_inner();
        ratios.push((-ln_m / b.q).powf(p));
    }
    let base = ln_standard_area_factor();
    let lp_c = base + p * 2f64.ln();
    let exact_c = base + p * 8f64.ln();
    let distortion = SeriesReport::from_ln_terms(dist, Some(lp_c));
    let hi = 2f64.powf(p) * (1.0 + 1e-12);
    let reduction_in_range = ratios.iter().all(|&r| (1.0 - 1e-12..=hi).contains(&r));
    ConvergenceReport {
        p,
        depth: blocks.len(),
        sobolev: SeriesReport::from_ln_terms(sob, None),
        verdict: distortion.verdict,
        distortion,
        exact: SeriesReport::from_ln_terms(exact, Some(exact_c)),
        reduction_ratios: ratios,
        reduction_in_range,
    }
}

/// `ln(pi R_1^2 - sum |A_n|)`, the unit-weight part of `int_{B(0,R_1)} K^p`.
pub fn ln_gap_area(blocks: &[BlockParams]) -> f64 {
    let Some(last) = blocks.last() else {
        return f64::NEG_INFINITY;
    };
    let pi = std::f64::consts::PI.ln();
    // gaps between consecutive stages plus the core disc
    let mut acc = pi + 2.0 * last.annulus.ln_inner();
    for w in blocks.windows(2) {
        let hi = 2.0 * w[0].annulus.ln_inner();
        let lo = 2.0 * w[1].annulus.ln_outer();
        if hi > lo {
            acc = log_add_exp(acc, pi + log_sub_exp(hi, lo));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::Annulus;
    use crate::num::LogReal;

    fn blk(ln_r: f64, ln_alpha: f64, q: f64) -> BlockParams {
        BlockParams::from_log(Annulus::standard(ln_r).unwrap(), LogReal::from_parts(false, ln_alpha), q).unwrap()
    }

    #[test]
    fn empty_converges() {
        let c = series_certificate(&[], 2.0);
        assert_eq!(c.verdict, Verdict::Converges);
        assert_eq!(c.distortion.ln_sum(), f64::NEG_INFINITY);
        assert_eq!(ln_gap_area(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn increasing_terms_diverge() {
        // alpha_n = r^{-1/p} * const: terms grow like n
        let blocks: Vec<_> = (1..=6).map(|n| blk(-3.0 * n as f64, 1.5 * n as f64 + (n as f64).ln(), 1.0)).collect();
        let c = series_certificate(&blocks, 2.0);
        assert_eq!(c.verdict, Verdict::Diverges);
        assert!(matches!(c.distortion.witness, Witness::TermFloor { .. }));
    }

    #[test]
    fn partial_sums_nondecreasing() {
        let blocks: Vec<_> = (1..=6).map(|n| blk(-3.0 * n as f64, 2.0, 1.5)).collect();
        let c = series_certificate(&blocks, 1.5);
        for s in [&c.sobolev, &c.distortion, &c.exact] {
            assert!(s.ln_partial_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn flat_terms_are_inconclusive_without_domination() {
        let ln_terms = vec![0.0, 0.0, -1e-3, -1e-3];
        let (v, _) = judge(&ln_terms, None);
        assert_eq!(v, Verdict::Inconclusive);
    }

    #[test]
    fn gap_area_direct() {
        let blocks = vec![blk(-2.0, 1.0, 1.0), blk(-5.0, 1.0, 1.0)];
        let pi = std::f64::consts::PI;
        let expect = pi * ((-4f64).exp() - (-8f64).exp()) + pi * (-10f64).exp();
        assert!((ln_gap_area(&blocks).exp() - expect).abs() < 1e-15);
    }
}
