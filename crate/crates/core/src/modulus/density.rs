//! The proofs' explicit admissible densities and grid densities.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::{ln_lens_area, ln_lens_ring_area, ln_stadium_area, segment_box, segment_disc};
use crate::construct::DistortionField;
use crate::error::{Error, Result};
use crate::num::{log_add_exp, log_sub_exp};

/// Axis-aligned cell grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub x0: f64,
    pub y0: f64,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeometry {
    pub fn new(x0: f64, y0: f64, cell: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite() && x0.is_finite() && y0.is_finite()) || nx == 0 || ny == 0 {
            return Err(Error::invalid("grid needs a positive cell size and at least one cell"));
        }
        Ok(GridGeometry { x0, y0, cell, nx, ny })
    }

    /// Square grid of `n x n` cells covering `[lo, hi]`.
    pub fn covering(lo: Complex64, hi: Complex64, n: usize) -> Result<Self> {
        let side = (hi.re - lo.re).max(hi.im - lo.im);
        if !(side > 0.0) {
            return Err(Error::invalid("degenerate bounding box"));
        }
        let mid = 0.5 * (lo + hi);
        let side = side * (1.0 + 1e-9);
        Self::new(mid.re - side / 2.0, mid.im - side / 2.0, side / n as f64, n, n)
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }

    pub fn center(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        Complex64::new(
            self.x0 + (i as f64 + 0.5) * self.cell,
            self.y0 + (j as f64 + 0.5) * self.cell,
        )
    }

    /// Appends `(cell, length)` for every cell the segment crosses.
    pub fn segment_cells(&self, p: Complex64, q: Complex64, weight: f64, out: &mut Vec<(u32, f64)>) -> Result<()> {
        let to_grid = |z: Complex64| ((z.re - self.x0) / self.cell, (z.im - self.y0) / self.cell);
        let (px, py) = to_grid(p);
        let (qx, qy) = to_grid(q);
        let (nx, ny) = (self.nx as f64, self.ny as f64);
        for v in [px, qx] {
            if !(0.0..=nx).contains(&v) {
                return Err(Error::invalid(format!("path vertex outside the grid box: {p} -> {q}")));
            }
        }
        for v in [py, qy] {
            if !(0.0..=ny).contains(&v) {
                return Err(Error::invalid(format!("path vertex outside the grid box: {p} -> {q}")));
            }
        }
        let len = (q - p).norm();
        if len == 0.0 {
            return Ok(());
        }
        let mut ts = vec![0.0, 1.0];
        for (a, b) in [(px, qx), (py, qy)] {
            if a != b {
                let (lo, hi) = (a.min(b).ceil() as i64, a.max(b).floor() as i64);
                for k in lo..=hi {
                    let t = (k as f64 - a) / (b - a);
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        for w in ts.windows(2) {
            let dt = w[1] - w[0];
            if dt <= 0.0 {
                continue;
            }
            let tm = 0.5 * (w[0] + w[1]);
            let i = ((px + tm * (qx - px)).floor() as usize).min(self.nx - 1);
            let j = ((py + tm * (qy - py)).floor() as usize).min(self.ny - 1);
            out.push(((j * self.nx + i) as u32, weight * dt * len));
        }
        Ok(())
    }
}

/// Nonnegative cell values with an optional weight per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub grid: GridGeometry,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<f64>>,
}

impl GridDensity {
    pub fn new(grid: GridGeometry, values: Vec<f64>, weight: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.cells() || weight.as_ref().is_some_and(|w| w.len() != grid.cells()) {
            return Err(Error::invalid("grid density size mismatch"));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("grid density values must be finite and nonnegative"));
        }
        Ok(GridDensity { grid, values, weight })
    }

    /// Midpoint rule `sum rho^2 w h^2`.
    pub fn energy(&self) -> f64 {
        let a = self.grid.cell_area();
        match &self.weight {
            None => self.values.iter().map(|v| v * v * a).sum(),
            Some(w) => self.values.iter().zip(w).map(|(v, w)| v * v * w * a).sum(),
        }
    }

    /// Attaches `K` sampled at cell centres as the weight.
    pub fn with_weight(mut self, field: &DistortionField) -> Self {
        let g = self.grid;
        self.weight = Some((0..g.cells()).map(|i| {
            let c = g.center(i);
            field.k_at(c.re, c.im)
        }).collect());
        self
    }

    pub fn line_integral(&self, polyline: &[Complex64]) -> Result<f64> {
        let mut cells = Vec::new();
        for w in polyline.windows(2) {
            self.grid.segment_cells(w[0], w[1], 1.0, &mut cells)?;
        }
        Ok(cells.iter().map(|&(c, l)| self.values[c as usize] * l).sum())
    }
}

/// Piece of a density support.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Support {
    /// `B(c_out, c_out)` minus the tangent `B(c_in, c_in)` if present.
    Lens { ln_c_out: f64, ln_c_in: Option<f64> },
    Stadium { z0: f64 },
}

impl Support {
    fn ln_area_in_disc(&self, ln_t: f64) -> f64 {
        match *self {
            Support::Lens { ln_c_out, ln_c_in: None } => ln_lens_area(ln_t, ln_c_out),
            Support::Lens {
                ln_c_out,
                ln_c_in: Some(ln_c_in),
            } => ln_lens_ring_area(ln_t, ln_c_out, ln_c_in),
            Support::Stadium { z0 } => ln_stadium_area(ln_t, z0),
        }
    }

    fn ln_area(&self) -> f64 {
        match *self {
            Support::Lens { ln_c_out, ln_c_in } => {
                let outer = PI.ln() + 2.0 * ln_c_out;
                match ln_c_in {
                    None => outer,
                    Some(ci) => log_sub_exp(outer, PI.ln() + 2.0 * ci),
                }
            }
            Support::Stadium { z0 } => (2.0 * z0 * (1.0 - z0) + PI * z0 * z0).ln(),
        }
    }

    /// `ln int_piece K^kappa`.
    fn ln_k_integral(&self, field: &DistortionField, kappa: f64) -> f64 {
        let mut acc = self.ln_area();
        for s in &field.stages {
            if s.ln_k == 0.0 {
                continue;
            }
            let hi = self.ln_area_in_disc(s.ln_outer);
            let lo = self.ln_area_in_disc(s.ln_r);
            if !(hi > lo) {
                continue;
            }
            let ring = log_sub_exp(hi, lo);
            acc = log_add_exp(acc, ring + log_sub_exp(kappa * s.ln_k, 0.0));
        }
        acc
    }
}

/// Explicit densities from the modulus estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplicitDensity {
    /// `rho = 2 / r_j` on `B_j \ B_{j-1}`, `B_j = B(2^j z0, 2^j z0)`, `j = 0..=n`.
    BallChain { z0: f64, n: u32 },
    /// `rho = 1 / z0` on `{dist(z, [z0, 1]) < z0}`.
    Tube { z0: f64 },
}

fn check_z0(z0: f64) -> Result<()> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(Error::invalid(format!("z0 must lie in (0, 1), got {z0}")));
    }
    Ok(())
}

pub fn ball_chain_density(z0: f64) -> Result<ExplicitDensity> {
    check_z0(z0)?;
    let mut n = 0u32;
    while z0 * 2f64.powi(n as i32) < 1.0 {
        n += 1;
    }
    Ok(ExplicitDensity::BallChain { z0, n })
}

pub fn tube_density(z0: f64) -> Result<ExplicitDensity> {
    check_z0(z0)?;
    Ok(ExplicitDensity::Tube { z0 })
}

impl ExplicitDensity {
    pub fn z0(&self) -> f64 {
        match *self {
            ExplicitDensity::BallChain { z0, .. } | ExplicitDensity::Tube { z0 } => z0,
        }
    }

    /// Radius of a fixed origin-centred ball containing the support for every `z0`.
    pub fn fixed_ball(&self) -> f64 {
        match self {
            ExplicitDensity::BallChain { .. } => 4.0,
            ExplicitDensity::Tube { .. } => 2.0,
        }
    }

    fn pieces(&self) -> Vec<(f64, Support)> {
        match *self {
            ExplicitDensity::BallChain { z0, n } => (0..=n)
                .map(|j| {
                    let ln_c = z0.ln() + j as f64 * LN_2;
                    let rho = 2.0 / ln_c.exp();
                    let ln_c_in = (j > 0).then(|| ln_c - LN_2);
                    (rho, Support::Lens { ln_c_out: ln_c, ln_c_in })
                })
                .collect(),
            ExplicitDensity::Tube { z0 } => vec![(1.0 / z0, Support::Stadium { z0 })],
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        match *self {
            ExplicitDensity::BallChain { z0, n } => (0..=n)
                .find_map(|j| {
                    let c = z0 * 2f64.powi(j as i32);
                    ((z - c).norm() < c).then_some(2.0 / c)
                })
                .unwrap_or(0.0),
            ExplicitDensity::Tube { z0 } => {
                let x = z.re.clamp(z0, 1.0);
                if (z - x).norm() < z0 {
                    1.0 / z0
                } else {
                    0.0
                }
            }
        }
    }

    /// Exact `int rho^2`.
    pub fn energy(&self) -> f64 {
        match *self {
            ExplicitDensity::BallChain { n, .. } => PI * (4.0 + 3.0 * n as f64),
            ExplicitDensity::Tube { z0 } => 2.0 * (1.0 - z0) / z0 + PI,
        }
    }

    /// `ln sum_pieces rho^s int_piece K^kappa`.
    pub fn ln_integral(&self, field: &DistortionField, s: f64, kappa: f64) -> f64 {
        self.pieces()
            .iter()
            .map(|(rho, piece)| s * rho.ln() + piece.ln_k_integral(field, kappa))
            .fold(f64::NEG_INFINITY, log_add_exp)
    }

    /// Exact line integral along a polyline.
    pub fn line_integral(&self, polyline: &[Complex64]) -> f64 {
        polyline.windows(2).map(|w| self.segment_integral(w[0], w[1])).sum()
    }

    fn segment_integral(&self, p: Complex64, q: Complex64) -> f64 {
        let len = (q - p).norm();
        match *self {
            ExplicitDensity::BallChain { z0, n } => {
                let mut prev = 0.0;
                let mut acc = 0.0;
                for j in 0..=n {
                    let c = z0 * 2f64.powi(j as i32);
                    let inside = segment_disc(p, q, Complex64::new(c, 0.0), c).map_or(0.0, |(a, b)| b - a);
                    acc += (2.0 / c) * (inside - prev).max(0.0) * len;
                    prev = prev.max(inside);
                }
                acc
            }
            ExplicitDensity::Tube { z0 } => {
                let parts = [
                    segment_box(p, q, Complex64::new(z0, -z0), Complex64::new(1.0, z0)),
                    segment_disc(p, q, Complex64::new(z0, 0.0), z0),
                    segment_disc(p, q, Complex64::new(1.0, 0.0), z0),
                ];
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (a, b) in parts.into_iter().flatten() {
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                if hi > lo {
                    (hi - lo) * len / z0
                } else {
                    0.0
                }
            }
        }
    }

    /// Midpoint-rule rasterisation on an `n x n` grid over the support's box.
    pub fn rasterize(&self, n: usize) -> Result<GridDensity> {
        let (lo, hi) = match *self {
            ExplicitDensity::BallChain { z0, n: m } => {
                let c = z0 * 2f64.powi(m as i32);
                (Complex64::new(0.0, -c), Complex64::new(2.0 * c, c))
            }
            ExplicitDensity::Tube { z0 } => (Complex64::new(0.0, -z0), Complex64::new(1.0 + z0, z0)),
        };
        let g = GridGeometry::covering(lo, hi, n)?;
        let values = (0..g.cells()).map(|i| self.value(g.center(i))).collect();
        GridDensity::new(g, values, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{compose_radial, distortion_field, RadialMap};
    use crate::blocks::{Annulus, BlockParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chain_lengths() {
        assert_eq!(ball_chain_density(0.25).unwrap(), ExplicitDensity::BallChain { z0: 0.25, n: 2 });
        assert_eq!(ball_chain_density(0.5).unwrap(), ExplicitDensity::BallChain { z0: 0.5, n: 1 });
        assert!(ball_chain_density(1.0).is_err());
        assert!((ball_chain_density(0.25).unwrap().energy() - 10.0 * PI).abs() < 1e-13);
        assert!((ball_chain_density(0.5).unwrap().energy() - 7.0 * PI).abs() < 1e-13);
        assert!((tube_density(0.5).unwrap().energy() - (2.0 + PI)).abs() < 1e-13);
        assert!((tube_density(1.0 - 1e-9).unwrap().energy() - PI).abs() < 1e-8);
    }

    #[test]
    fn unit_field_integral_is_energy() {
        let f = distortion_field(&RadialMap::identity());
        for d in [ball_chain_density(0.25).unwrap(), ball_chain_density(0.01).unwrap(), tube_density(0.3).unwrap()] {
            let e = d.ln_integral(&f, 2.0, 1.0).exp();
            assert!((e - d.energy()).abs() < 1e-12 * e, "{d:?}");
        }
    }

    #[test]
    fn weighted_integral_matches_quadrature() {
        let b = BlockParams::new(Annulus::new(0.05, 0.05 * std::f64::consts::E).unwrap(), 4.0, 2.0).unwrap();
        let f = distortion_field(&compose_radial(vec![b]).unwrap());
        for d in [ball_chain_density(0.0625).unwrap(), tube_density(0.1).unwrap()] {
            let exact = d.ln_integral(&f, 2.0, 1.0).exp();
            let g = d.rasterize(2000).unwrap().with_weight(&f);
            let approx = g.energy();
            assert!((approx - exact).abs() < 1e-2 * exact, "{d:?}: {approx} vs {exact}");
        }
    }

    fn random_polyline(rng: &mut ChaCha8Rng, z0: f64) -> Vec<Complex64> {
        let mut pts = vec![Complex64::new(rng.gen_range(z0..=1.0), 0.0)];
        for _ in 0..rng.gen_range(0..4) {
            pts.push(Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        }
        pts.push(Complex64::new(rng.gen_range(-2.0..=0.0), 0.0));
        pts
    }

    #[test]
    fn admissible_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for z0 in [0.03, 0.25, 0.5, 0.7] {
            let ball = ball_chain_density(z0).unwrap();
            let tube = tube_density(z0).unwrap();
            for _ in 0..100 {
                let path = random_polyline(&mut rng, z0);
                assert!(ball.line_integral(&path) >= 1.0 - 1e-6);
                assert!(tube.line_integral(&path) >= 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn straight_escape_is_tight_for_tube() {
        let t = tube_density(0.25).unwrap();
        let v = t.line_integral(&[Complex64::new(0.6, 0.0), Complex64::new(0.6, 3.0)]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cell_lengths_sum_to_segment_length() {
        let g = GridGeometry::new(-1.0, -1.0, 0.1, 20, 20).unwrap();
        let mut out = Vec::new();
        let (p, q) = (Complex64::new(-0.93, 0.31), Complex64::new(0.77, -0.88));
        g.segment_cells(p, q, 1.0, &mut out).unwrap();
        let total: f64 = out.iter().map(|c| c.1).sum();
        assert!((total - (q - p).norm()).abs() < 1e-14);
        assert!(g.segment_cells(p, Complex64::new(5.0, 0.0), 1.0, &mut out).is_err());
    }
}
