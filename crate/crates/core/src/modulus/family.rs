//! Discrete path families.
//!
//! A member of a family is a bundle of parallel strands with equal weights;
//! its line integral is the strand average. One-strand bundles are plain
//! polylines.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::GridGeometry;
use crate::error::{Error, Result};

/// Polyline with at least two vertices and positive length.
pub type Polyline = Vec<Complex64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub strands: Vec<Polyline>,
}

impl Path {
    pub fn new(strands: Vec<Polyline>) -> Result<Self> {
        if strands.is_empty() {
            return Err(Error::invalid("path needs at least one strand"));
        }
        for s in &strands {
            if s.len() < 2 {
                return Err(Error::invalid("polyline needs at least two vertices"));
            }
            if s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::invalid("polyline has a non-finite vertex"));
            }
            if polyline_length(s) <= 0.0 {
                return Err(Error::invalid("polyline has zero length"));
            }
        }
        Ok(Path { strands })
    }

    pub fn single(polyline: Polyline) -> Result<Self> {
        Self::new(vec![polyline])
    }

    /// Strand-averaged line integral of `rho`.
    pub fn integral(&self, rho: impl Fn(&[Complex64]) -> f64) -> f64 {
        self.strands.iter().map(|s| rho(s)).sum::<f64>() / self.strands.len() as f64
    }

    /// Merged `(cell, weighted length)` row of the path constraint.
    pub fn cell_row(&self, grid: &GridGeometry) -> Result<Vec<(u32, f64)>> {
        let w = 1.0 / self.strands.len() as f64;
        let mut row = Vec::new();
        for s in &self.strands {
            for seg in s.windows(2) {
                grid.segment_cells(seg[0], seg[1], w, &mut row)?;
            }
        }
        row.sort_unstable_by_key(|c| c.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
        for (c, l) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += l,
                _ => merged.push((c, l)),
            }
        }
        Ok(merged)
    }
}

pub fn polyline_length(p: &[Complex64]) -> f64 {
    p.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    RingRadial { r_inner: f64, r_outer: f64, count: usize, strands: usize },
    SegmentToRay { z0: f64, count: usize, strands: usize },
    Custom { name: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFamily {
    pub paths: Vec<Path>,
    pub descriptor: FamilyDescriptor,
    /// Names of the connected sets, when known.
    pub endpoints: Option<(String, String)>,
}

impl PathFamily {
    pub fn custom(name: &str, paths: Vec<Path>) -> Self {
        PathFamily {
            paths,
            descriptor: FamilyDescriptor::Custom { name: name.to_string() },
            endpoints: None,
        }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Keeps every `k`-th path starting from the first.
    pub fn every(&self, k: usize) -> PathFamily {
        let k = k.max(1);
        PathFamily {
            paths: self.paths.iter().step_by(k).cloned().collect(),
            descriptor: FamilyDescriptor::Custom {
                name: format!("every {k}th path"),
            },
            endpoints: self.endpoints.clone(),
        }
    }

    /// `(lower-left, upper-right)` of all vertices.
    pub fn bbox(&self) -> Option<(Complex64, Complex64)> {
        let mut it = self.paths.iter().flat_map(|p| p.strands.iter().flatten());
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), z| {
            (
                Complex64::new(lo.re.min(z.re), lo.im.min(z.im)),
                Complex64::new(hi.re.max(z.re), hi.im.max(z.im)),
            )
        }))
    }
}

fn check_count(count: usize, strands: usize) -> Result<()> {
    if count == 0 || strands == 0 {
        return Err(Error::invalid("path and strand counts must be positive"));
    }
    Ok(())
}

/// `count` sector bundles of radial segments joining `|z| = r_inner` to `|z| = r_outer`.
pub fn ring_radial(r_inner: f64, r_outer: f64, count: usize, strands: usize) -> Result<PathFamily> {
    if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
        return Err(Error::invalid(format!("ring needs 0 < r < R, got {r_inner}, {r_outer}")));
    }
    check_count(count, strands)?;
    let sector = TAU / count as f64;
    let paths = (0..count)
        .map(|k| {
            let bundle = (0..strands)
                .map(|s| {
                    let th = sector * (k as f64 + (s as f64 + 0.5) / strands as f64);
                    vec![Complex64::from_polar(r_inner, th), Complex64::from_polar(r_outer, th)]
                })
                .collect();
            Path::new(bundle)
        })
        .collect::<Result<_>>()?;
    Ok(PathFamily {
        paths,
        descriptor: FamilyDescriptor::RingRadial { r_inner, r_outer, count, strands },
        endpoints: Some((format!("|z| = {r_inner}"), format!("|z| = {r_outer}"))),
    })
}

/// Upper half circles from `[z0, 1]` to `(-inf, 0]`, radii binned evenly in `log r`.
pub fn segment_to_ray(z0: f64, count: usize, strands: usize) -> Result<PathFamily> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(Error::invalid(format!("z0 must lie in (0, 1), got {z0}")));
    }
    check_count(count, strands)?;
    let span = -z0.ln();
    let bin = span / count as f64;
    let vertices = 256;
    let paths = (0..count)
        .map(|k| {
            let bundle = (0..strands)
                .map(|s| {
                    let r = (z0.ln() + bin * (k as f64 + (s as f64 + 0.5) / strands as f64)).exp();
                    (0..=vertices)
                        .map(|v| Complex64::from_polar(r, PI * v as f64 / vertices as f64))
                        .collect()
                })
                .collect();
            Path::new(bundle)
        })
        .collect::<Result<_>>()?;
    Ok(PathFamily {
        paths,
        descriptor: FamilyDescriptor::SegmentToRay { z0, count, strands },
        endpoints: Some((format!("[{z0}, 1]"), "(-inf, 0]".to_string())),
    })
}

/// Continuum modulus of the full generator families.
pub fn ring_modulus(r_inner: f64, r_outer: f64) -> f64 {
    TAU / (r_outer / r_inner).ln()
}

pub fn half_circle_modulus(z0: f64) -> f64 {
    (1.0 / z0).ln() / PI
}
