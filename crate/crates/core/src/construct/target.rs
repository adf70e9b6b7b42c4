//! Target moduli `phi` and gauge functions `h`, evaluated on log-radii.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target modulus profile `phi(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    /// `phi(r) = r^k`.
    Power { k: f64 },
    /// Log-log linear interpolation through `(ln r, ln phi)` knots, sorted by `ln r`.
    Table { ln_r: Vec<f64>, ln_phi: Vec<f64> },
}

impl Phi {
    pub fn power(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("phi exponent must be positive, got {k}")));
        }
        Ok(Phi::Power { k })
    }

    /// Knots `(r, phi(r))`; `phi` must be strictly increasing.
    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("phi table needs at least two rows"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ln_r = Vec::with_capacity(knots.len());
        let mut ln_phi = Vec::with_capacity(knots.len());
        for (r, p) in knots {
            if !(r > 0.0 && p > 0.0 && r.is_finite() && p.is_finite()) {
                return Err(Error::invalid(format!("phi table row ({r}, {p}) must be positive")));
            }
            ln_r.push(r.ln());
            ln_phi.push(p.ln());
        }
        for w in 0..ln_r.len() - 1 {
            if !(ln_r[w + 1] > ln_r[w] && ln_phi[w + 1] > ln_phi[w]) {
                return Err(Error::invalid("phi table must be strictly increasing"));
            }
        }
        Ok(Phi::Table { ln_r, ln_phi })
    }

    /// Reads a headerless or `r,phi`-headed CSV.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut knots = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::invalid("phi table rows must have two columns"));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(r), Ok(p)) => knots.push((r, p)),
                _ if knots.is_empty() => continue,
                _ => return Err(Error::invalid(format!("bad phi table row {:?}", rec))),
            }
        }
        Self::table(knots)
    }

    pub fn ln_phi(&self, ln_r: f64) -> Result<f64> {
        match self {
            Phi::Power { k } => Ok(k * ln_r),
            Phi::Table { ln_r: xs, ln_phi: ys } => {
                let (lo, hi) = (xs[0], xs[xs.len() - 1]);
                if !(ln_r >= lo && ln_r <= hi) {
                    return Err(Error::invalid(format!(
                        "radius exp({ln_r}) outside the phi table range [exp({lo}), exp({hi})]"
                    )));
                }
                let i = xs.partition_point(|&x| x <= ln_r).clamp(1, xs.len() - 1);
                let w = (ln_r - xs[i - 1]) / (xs[i] - xs[i - 1]);
                Ok(ys[i - 1] + w * (ys[i] - ys[i - 1]))
            }
        }
    }

    /// Smallest log-radius the profile is defined at.
    pub fn ln_r_min(&self) -> f64 {
        match self {
            Phi::Power { .. } => f64::NEG_INFINITY,
            Phi::Table { ln_r, .. } => ln_r[0],
        }
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Power { k } => write!(f, "r^{k}"),
            Phi::Table { ln_r, .. } => write!(f, "table({} rows)", ln_r.len()),
        }
    }
}

/// Target modulus together with the integrability exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetModulus {
    pub phi: Phi,
    pub p: f64,
}

impl TargetModulus {
    pub fn new(phi: Phi, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        Ok(TargetModulus { phi, p })
    }

    pub fn ln_phi(&self, ln_r: f64) -> Result<f64> {
        self.phi.ln_phi(ln_r)
    }

    /// `ln g(r)` with `g(r) = r^{2/p} ln(1/phi(r))`, the tightest compression gauge.
    pub fn ln_compression(&self, ln_r: f64) -> Result<f64> {
        let lp = self.ln_phi(ln_r)?;
        if lp >= 0.0 {
            return Err(Error::invalid(format!("phi(exp({ln_r})) >= 1")));
        }
        Ok(2.0 / self.p * ln_r + (-lp).ln())
    }

    /// `phi(r) < r^4`.
    pub fn check_corridor(&self, ln_r: f64, stage: usize) -> Result<()> {
        let lp = self.ln_phi(ln_r)?;
        if lp < 4.0 * ln_r {
            Ok(())
        } else {
            Err(Error::constraint(
                stage,
                format!("phi(r) >= r^4 at r = exp({ln_r}); target leaves the compression corridor"),
            ))
        }
    }
}

/// Gauge `h`, decreasing to 0 as `r -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gauge {
    /// `h(r) = (ln 1/r)^{-a}`.
    LogPow { a: f64 },
    /// `h(r) = max(sqrt(g(r)), (ln 1/r)^{-a})` for the target's compression gauge `g`.
    Compression { target: TargetModulus, a: f64 },
}

impl Gauge {
    pub fn log_pow(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!(
                "gauge (ln 1/r)^-a needs a > 0 so that h -> 0, got a = {a}"
            )));
        }
        Ok(Gauge::LogPow { a })
    }

    pub fn compression(target: TargetModulus) -> Self {
        Gauge::Compression { target, a: 0.25 }
    }

    /// `ln h(r)`; needs `r < 1`.
    pub fn ln_h(&self, ln_r: f64) -> Result<f64> {
        if !(ln_r < 0.0) {
            return Err(Error::invalid(format!("gauge needs r < 1, got exp({ln_r})")));
        }
        let l = (-ln_r).ln();
        match self {
            Gauge::LogPow { a } => Ok(-a * l),
            Gauge::Compression { target, a } => {
                let half_g = 0.5 * target.ln_compression(ln_r)?;
                Ok(half_g.max(-a * l))
            }
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Gauge::LogPow { a } => format!("logpow:{a}"),
            Gauge::Compression { a, .. } => format!("max(sqrt(g),logpow:{a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_and_table() {
        let p = Phi::power(5.0).unwrap();
        assert_eq!(p.ln_phi(-2.0).unwrap(), -10.0);
        assert!(Phi::power(0.0).is_err());
        let t = Phi::table(vec![(1e-3, 1e-15), (1e-1, 1e-5)]).unwrap();
        let mid = t.ln_phi((1e-2f64).ln()).unwrap();
        assert!((mid - (1e-10f64).ln()).abs() < 1e-12);
        assert!(t.ln_phi((1e-4f64).ln()).is_err());
        assert!(Phi::table(vec![(1e-3, 1e-5), (1e-1, 1e-15)]).is_err());
    }

    #[test]
    fn corridor() {
        let bad = TargetModulus::new(Phi::power(3.0).unwrap(), 2.0).unwrap();
        assert!(matches!(bad.check_corridor(-10.0, 1), Err(Error::Constraint { .. })));
        let ok = TargetModulus::new(Phi::power(5.0).unwrap(), 2.0).unwrap();
        ok.check_corridor(-10.0, 1).unwrap();
    }

    #[test]
    fn gauges() {
        assert!(Gauge::log_pow(0.0).is_err());
        let h = Gauge::log_pow(0.25).unwrap();
        assert!((h.ln_h(-8.0).unwrap() - (-0.25 * 8f64.ln())).abs() < 1e-15);
        assert!(h.ln_h(0.5).is_err());
        let t = TargetModulus::new(Phi::power(5.0).unwrap(), 2.0).unwrap();
        let g = Gauge::compression(t.clone());
        // at r = e^-2 the sqrt(g) branch wins: sqrt(e^-2 * 10)
        let v = g.ln_h(-2.0).unwrap().exp();
        assert!((v - (10.0 * (-2f64).exp()).sqrt()).abs() < 1e-14);
        // deep down the log-power branch wins
        assert!((g.ln_h(-50.0).unwrap() - (-0.25 * 50f64.ln())).abs() < 1e-15);
        for lr in [-3.0, -8.0, -40.0, -1e6] {
            assert!(g.ln_h(lr).unwrap() >= 0.5 * t.ln_compression(lr).unwrap());
        }
    }
}
