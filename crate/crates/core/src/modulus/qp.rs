//! Grid minimisation of `sum w rho^2 h^2` under one `>= 1` constraint per path,
//! by dual coordinate ascent (Hildreth).

use serde::{Deserialize, Serialize};

use super::density::{GridDensity, GridGeometry};
use super::family::PathFamily;
use super::report::{Inputs, ModulusKind, ModulusReport};
use crate::construct::DistortionField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-4,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    /// Largest relative shortfall `max(0, 1 - L rho)` of the unscaled iterate.
    pub violation: f64,
    pub dual_bound: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModulus {
    pub report: ModulusReport,
    pub stats: SolverStats,
    /// Feasible minimiser, rescaled so every path has integral `>= 1`.
    pub density: GridDensity,
}

/// Grid resolution plus an optional weight `K`.
pub fn discrete_modulus(family: &PathFamily, grid_n: usize, weight: Option<&DistortionField>) -> Result<DiscreteModulus> {
    discrete_modulus_with(family, grid_n, weight, &SolverOptions::default())
}

pub fn discrete_modulus_with(
    family: &PathFamily,
    grid_n: usize,
    weight: Option<&DistortionField>,
    opts: &SolverOptions,
) -> Result<DiscreteModulus> {
    if grid_n == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    let inputs = Inputs {
        z0: None,
        p: None,
        grid: Some(grid_n),
        paths: Some(family.len()),
    };
    let Some((lo, hi)) = family.bbox() else {
        let g = GridGeometry::new(-1.0, -1.0, 2.0 / grid_n as f64, grid_n, grid_n)?;
        return Ok(DiscreteModulus {
            report: ModulusReport::new(0.0, ModulusKind::DiscreteEstimate, inputs),
            stats: SolverStats {
                iterations: 0,
                violation: 0.0,
                dual_bound: 0.0,
                gap: 0.0,
            },
            density: GridDensity::new(g, vec![0.0; g.cells()], None)?,
        });
    };
    let side = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let pad = side / grid_n as f64;
    let pad_c = num_complex::Complex64::new(pad, pad);
    let grid = GridGeometry::covering(lo - pad_c, hi + pad_c, grid_n)?;

    let rows = family.paths.iter().map(|p| p.cell_row(&grid)).collect::<Result<Vec<_>>>()?;
    let cell_area = grid.cell_area();
    let mut area = vec![cell_area; grid.cells()];
    let weights = weight.map(|f| {
        (0..grid.cells())
            .map(|i| {
                let c = grid.center(i);
                f.k_at(c.re, c.im)
            })
            .collect::<Vec<_>>()
    });
    if let Some(w) = &weights {
        for (a, w) in area.iter_mut().zip(w) {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("weight must be positive and finite, got {w}")));
            }
            *a *= w;
        }
    }
    let gkk: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|&(c, l)| l * l / area[c as usize]).sum())
        .collect();

    let mut rho = vec![0.0; grid.cells()];
    let mut lambda = vec![0.0; rows.len()];
    let dot = |r: &[(u32, f64)], rho: &[f64]| r.iter().map(|&(c, l)| l * rho[c as usize]).sum::<f64>();
    let energy = |rho: &[f64]| rho.iter().zip(&area).map(|(r, a)| a * r * r).sum::<f64>();

    let mut sweeps = 0;
    loop {
        for (k, r) in rows.iter().enumerate() {
            let delta = 2.0 * (1.0 - dot(r, &rho)) / gkk[k];
            let next = (lambda[k] + delta).max(0.0);
            let step = next - lambda[k];
            if step != 0.0 {
                for &(c, l) in r {
                    rho[c as usize] += step * l / (2.0 * area[c as usize]);
                }
                lambda[k] = next;
            }
        }
        sweeps += 1;
        // rho tracks sum lambda L / 2A up to drift; recompute occasionally
        if sweeps % 64 == 0 {
            rho.iter_mut().for_each(|v| *v = 0.0);
            for (k, r) in rows.iter().enumerate() {
                for &(c, l) in r {
                    rho[c as usize] += lambda[k] * l / (2.0 * area[c as usize]);
                }
            }
        }
        let e = energy(&rho);
        let dual = lambda.iter().sum::<f64>() - e;
        let min_int = rows.iter().map(|r| dot(r, &rho)).fold(f64::INFINITY, f64::min);
        let primal = if min_int > 0.0 { e / (min_int * min_int) } else { f64::INFINITY };
        let gap = (primal - dual) / primal;
        if gap <= opts.tolerance || sweeps >= opts.max_sweeps {
            if gap > opts.tolerance {
                return Err(Error::NonConvergence { iterations: sweeps, gap });
            }
            let scale = 1.0 / min_int;
            let values: Vec<f64> = rho.iter().map(|v| (v * scale).max(0.0)).collect();
            let density = GridDensity::new(grid, values, weights)?;
            return Ok(DiscreteModulus {
                report: ModulusReport::new(primal, ModulusKind::DiscreteEstimate, inputs),
                stats: SolverStats {
                    iterations: sweeps,
                    violation: (1.0 - min_int).max(0.0),
                    dual_bound: dual,
                    gap,
                },
                density,
            });
        }
    }
}
