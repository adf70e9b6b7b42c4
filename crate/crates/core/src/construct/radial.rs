//! Exact piecewise-radial representation of an iterated block composition.

use serde::{Deserialize, Serialize};

use crate::blocks::{Annulus, BlockParams};
use crate::error::{Error, Result};
use crate::num::LogReal;

/// Which theorem's rule produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    SubmainP,
    Submain1,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<String>,
}

impl MapMeta {
    pub fn custom(depth: usize) -> Self {
        MapMeta {
            theorem: Theorem::Custom,
            p: None,
            beta: None,
            epsilon: None,
            depth,
            rule: None,
            phi: None,
            gauge: None,
        }
    }
}

/// Radial profile `t -> (m(t), tau(t))` of a map `t e^{i th} -> m(t) e^{i(th + tau(t))}`.
pub trait RadialProfile {
    /// `ln m(t)`.
    fn ln_modulus(&self, ln_t: f64) -> f64;
    /// Lifted rotation `tau(t)`, with `tau(1) = 0`.
    fn rotation(&self, ln_t: f64) -> LogReal;
    fn depth(&self) -> usize {
        0
    }
}

/// Where a radius sits relative to the stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `t > R_1`.
    Outer,
    /// On `A_n` (0-based index).
    Stage(usize),
    /// Between `A_n` and `A_{n+1}`, or below the last stage.
    Gap(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialMap {
    blocks: Vec<BlockParams>,
    /// `ln s_n`, `n = 0..=N`.
    ln_s: Vec<f64>,
    /// `theta_n`, `n = 0..=N`.
    theta: Vec<LogReal>,
    pub meta: MapMeta,
}

pub fn compose_radial(blocks: Vec<BlockParams>) -> Result<RadialMap> {
    let depth = blocks.len();
    RadialMap::new(blocks, MapMeta::custom(depth))
}

impl RadialMap {
    pub fn new(blocks: Vec<BlockParams>, mut meta: MapMeta) -> Result<Self> {
        if let Some(b) = blocks.first() {
            if b.annulus.ln_outer() > 0.0 {
                return Err(Error::invalid("outermost annulus must lie in the unit disc so that f(1) = 1"));
            }
        }
        for (i, w) in blocks.windows(2).enumerate() {
            if !(w[1].annulus.ln_outer() <= w[0].annulus.ln_inner()) {
                return Err(Error::invalid(format!(
                    "annuli {} and {} overlap or are not decreasing",
                    i + 1,
                    i + 2
                )));
            }
        }
        let mut ln_s = Vec::with_capacity(blocks.len() + 1);
        let mut theta = Vec::with_capacity(blocks.len() + 1);
        ln_s.push(0.0);
        theta.push(LogReal::ZERO);
        for b in &blocks {
            let u = b.annulus.ln_inner() - b.annulus.ln_outer();
            let s = ln_s.last().unwrap() + (b.q - 1.0) * u;
            let th = theta.last().unwrap().add(b.alpha.scale(u));
            ln_s.push(s);
            theta.push(th);
        }
        meta.depth = blocks.len();
        Ok(RadialMap {
            blocks,
            ln_s,
            theta,
            meta,
        })
    }

    pub fn identity() -> Self {
        RadialMap::new(Vec::new(), MapMeta::custom(0)).expect("empty map")
    }

    pub fn blocks(&self) -> &[BlockParams] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `ln s_n`, the inner scale after `n` stages.
    pub fn ln_inner_scale(&self, n: usize) -> f64 {
        self.ln_s[n]
    }

    /// `theta_n`, the inner twist after `n` stages.
    pub fn inner_twist(&self, n: usize) -> LogReal {
        self.theta[n]
    }

    /// Stage radii `ln r_n`.
    pub fn ln_radii(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.annulus.ln_inner()).collect()
    }

    pub fn region(&self, ln_t: f64) -> Region {
        // blocks are sorted by decreasing radius
        let k = self.blocks.partition_point(|b| b.annulus.ln_inner() > ln_t);
        // blocks[..k] have r > t, blocks[k] (if any) has r <= t
        if k < self.blocks.len() && ln_t <= self.blocks[k].annulus.ln_outer() {
            Region::Stage(k)
        } else if k == 0 {
            Region::Outer
        } else {
            Region::Gap(k - 1)
        }
    }

    /// Same blocks with rotation removed.
    pub fn stretch_component(&self) -> RadialMap {
        self.with_blocks(|b| BlockParams {
            alpha: LogReal::ZERO,
            ..*b
        })
    }

    /// Same blocks with `q = 1`.
    pub fn rotation_component(&self) -> RadialMap {
        self.with_blocks(|b| BlockParams { q: 1.0, ..*b })
    }

    fn with_blocks(&self, f: impl Fn(&BlockParams) -> BlockParams) -> RadialMap {
        let blocks = self.blocks.iter().map(f).collect();
        RadialMap::new(blocks, self.meta.clone()).expect("same geometry")
    }

    /// The stages' annuli.
    pub fn annuli(&self) -> impl Iterator<Item = &Annulus> {
        self.blocks.iter().map(|b| &b.annulus)
    }
}

impl RadialProfile for RadialMap {
    fn ln_modulus(&self, ln_t: f64) -> f64 {
        match self.region(ln_t) {
            Region::Outer => ln_t,
            Region::Gap(n) => self.ln_s[n + 1] + ln_t,
            Region::Stage(n) => {
                let b = &self.blocks[n];
                self.ln_s[n] + ln_t + (b.q - 1.0) * (ln_t - b.annulus.ln_outer())
            }
        }
    }

    fn rotation(&self, ln_t: f64) -> LogReal {
        match self.region(ln_t) {
            Region::Outer => LogReal::ZERO,
            Region::Gap(n) => self.theta[n + 1],
            Region::Stage(n) => {
                let b = &self.blocks[n];
                self.theta[n].add(b.alpha.scale(ln_t - b.annulus.ln_outer()))
            }
        }
    }

    fn depth(&self) -> usize {
        self.blocks.len()
    }
}
