//! File formats: map JSON, trace and density CSV, report JSON.
//!
//! Every writer goes through `<path>.partial` and renames on success, so a
//! failed write leaves nothing behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{BoundReport, SpiralTrace, TraceSample};
use crate::blocks::{Annulus, BlockParams};
use crate::construct::{MapMeta, RadialMap};
use crate::error::{Error, Result};
use crate::modulus::{GridDensity, GridGeometry};
use crate::num::LogReal;

pub const MAP_FORMAT: &str = "spiralfd.radial_map";

/// One stage. Log fields are authoritative; plain values are for people and
/// become `null` when they overflow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub ln_r: f64,
    #[serde(rename = "ln_R")]
    pub ln_outer: f64,
    /// `null` for `alpha = 0`.
    pub ln_alpha: Option<f64>,
    pub alpha_negative: bool,
    pub q: f64,
    pub r: Option<f64>,
    #[serde(rename = "R")]
    pub outer: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "ln_K")]
    pub ln_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub format: String,
    pub meta: MapMeta,
    #[serde(rename = "blocks")]
    pub stages: Vec<StageRecord>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl MapFile {
    pub fn from_map(map: &RadialMap) -> Self {
        let stages = map
            .blocks()
            .iter()
            .map(|b| StageRecord {
                ln_r: b.annulus.ln_inner(),
                ln_outer: b.annulus.ln_outer(),
                ln_alpha: (!b.alpha.is_zero()).then(|| b.alpha.ln_abs()),
                alpha_negative: b.alpha.signum() < 0,
                q: b.q,
                r: finite(b.annulus.r_inner()),
                outer: finite(b.annulus.r_outer()),
                alpha: finite(b.alpha.to_f64()),
                ln_k: b.ln_distortion_annulus(),
            })
            .collect();
        MapFile {
            format: MAP_FORMAT.to_string(),
            meta: map.meta.clone(),
            stages,
        }
    }

    pub fn to_map(&self) -> Result<RadialMap> {
        if self.format != MAP_FORMAT {
            return Err(Error::invalid(format!("not a radial map file (format {:?})", self.format)));
        }
        let blocks = self
            .stages
            .iter()
            .map(|s| {
                let alpha = match s.ln_alpha {
                    None => LogReal::ZERO,
                    Some(l) if l.is_finite() => LogReal::from_parts(s.alpha_negative, l),
                    Some(l) => return Err(Error::invalid(format!("ln_alpha must be finite, got {l}"))),
                };
                BlockParams::from_log(Annulus::from_ln(s.ln_r, s.ln_outer)?, alpha, s.q)
            })
            .collect::<Result<Vec<_>>>()?;
        RadialMap::new(blocks, self.meta.clone())
    }
}

pub fn map_to_json(map: &RadialMap) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MapFile::from_map(map))?)
}

pub fn map_from_json(text: &str) -> Result<RadialMap> {
    serde_json::from_str::<MapFile>(text)?.to_map()
}

pub fn read_map(path: &Path) -> Result<RadialMap> {
    map_from_json(&fs::read_to_string(path)?)
}

pub fn write_map(map: &RadialMap, path: &Path) -> Result<()> {
    let text = map_to_json(map)?;
    write_atomic(path, |w| Ok(writeln!(w, "{text}")?))
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Writes through `<path>.partial`, renaming only after `body` succeeds.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let tmp = partial_path(path);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(path, |w| Ok(writeln!(w, "{text}")?))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn write_rows<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    write_atomic(path, |w| {
        let mut c = csv::Writer::from_writer(w);
        for r in rows {
            c.serialize(r)?;
        }
        c.flush()?;
        Ok(())
    })
}

/// `t,modulus,rotation,distortion`.
pub fn write_trace(trace: &SpiralTrace, path: &Path) -> Result<()> {
    write_rows(path, &trace.samples)
}

pub fn read_trace(path: &Path) -> Result<SpiralTrace> {
    let mut r = csv::Reader::from_path(path)?;
    let samples = r.deserialize::<TraceSample>().collect::<std::result::Result<_, _>>()?;
    Ok(SpiralTrace { samples })
}

/// Sidecar metadata for a density CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub grid: GridGeometry,
    pub csv: String,
    pub energy: f64,
    pub weighted: bool,
}

#[derive(Serialize, Deserialize)]
struct DensityRow {
    x: f64,
    y: f64,
    rho: f64,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// `x,y,rho` at cell centres plus a JSON sidecar next to it.
pub fn write_grid_density(density: &GridDensity, csv_path: &Path) -> Result<PathBuf> {
    let g = density.grid;
    write_rows(
        csv_path,
        density.values.iter().enumerate().map(|(i, &rho)| {
            let c = g.center(i);
            DensityRow { x: c.re, y: c.im, rho }
        }),
    )?;
    let side = sidecar_path(csv_path);
    let meta = GridSidecar {
        grid: g,
        csv: csv_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        energy: density.energy(),
        weighted: density.weight.is_some(),
    };
    if let Err(e) = write_json(&meta, &side) {
        let _ = fs::remove_file(csv_path);
        return Err(e);
    }
    Ok(side)
}

pub fn read_grid_density(csv_path: &Path) -> Result<GridDensity> {
    let meta: GridSidecar = read_json(&sidecar_path(csv_path))?;
    let mut r = csv::Reader::from_path(csv_path)?;
    let values = r
        .deserialize::<DensityRow>()
        .map(|row| row.map(|d| d.rho))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    GridDensity::new(meta.grid, values, None)
}

#[derive(Serialize)]
struct StageRow {
    stage: usize,
    ln_r: f64,
    #[serde(rename = "ln_R")]
    ln_outer: f64,
    q: f64,
    ln_alpha: f64,
    alpha_sign: i8,
    #[serde(rename = "ln_K")]
    ln_k: f64,
}

/// Per-stage table of a map.
pub fn export_map_stages(map: &RadialMap, path: &Path) -> Result<()> {
    write_rows(
        path,
        map.blocks().iter().enumerate().map(|(i, b)| StageRow {
            stage: i + 1,
            ln_r: b.annulus.ln_inner(),
            ln_outer: b.annulus.ln_outer(),
            q: b.q,
            ln_alpha: b.alpha.ln_abs(),
            alpha_sign: b.alpha.signum(),
            ln_k: b.ln_distortion_annulus(),
        }),
    )
}

#[derive(Serialize)]
struct BoundRow {
    radius: f64,
    ln_radius: f64,
    ratio: f64,
    corollary_ratio: Option<f64>,
}

pub fn export_bound(report: &BoundReport, path: &Path) -> Result<()> {
    write_rows(
        path,
        report.ratios.iter().enumerate().map(|(i, &ratio)| BoundRow {
            radius: report.radii[i],
            ln_radius: report.ln_radii[i],
            ratio,
            corollary_ratio: report.corollary_ratios.as_ref().map(|c| c[i]),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::spiral_trace;
    use crate::construct::{build_submain_p, distortion_field, BuildOptions, Gauge, Phi, TargetModulus};
    use crate::modulus::{ball_chain_density, ExplicitDensity};
    use proptest::prelude::*;

    fn theorem2(depth: usize) -> RadialMap {
        let t = TargetModulus::new(Phi::power(5.0).unwrap(), 2.0).unwrap();
        build_submain_p(&t, &Gauge::compression(t.clone()), &BuildOptions::new(depth)).unwrap()
    }

    #[test]
    fn deep_map_round_trip_is_lossless() {
        let m = theorem2(20);
        let text = map_to_json(&m).unwrap();
        assert!(text.contains("\"ln_R\"") && text.contains("null"));
        let back = map_from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_foreign_json() {
        assert!(map_from_json(r#"{"format":"other","meta":{"theorem":"custom","depth":0},"blocks":[]}"#).is_err());
        assert!(map_from_json("[]").is_err());
    }

    #[test]
    fn trace_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = theorem2(3);
        let tr = spiral_trace(&m, &distortion_field(&m), 1e-6, 1.0, 50).unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&tr, &p).unwrap();
        let head = fs::read_to_string(&p).unwrap();
        assert!(head.starts_with("t,modulus,rotation,distortion\n"));
        assert_eq!(read_trace(&p).unwrap(), tr);
        assert!(!partial_path(&p).exists());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        let r = write_atomic(&p, |w| {
            writeln!(w, "half")?;
            Err(Error::invalid("boom"))
        });
        assert!(r.is_err());
        assert!(!p.exists() && !partial_path(&p).exists());
    }

    #[test]
    fn density_csv_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let g = ball_chain_density(0.25).unwrap().rasterize(16).unwrap();
        let p = dir.path().join("rho.csv");
        let side = write_grid_density(&g, &p).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("x,y,rho\n"));
        let meta: GridSidecar = read_json(&side).unwrap();
        assert_eq!(meta.grid.nx, 16);
        assert_eq!(read_grid_density(&p).unwrap(), g);
        let d: ExplicitDensity = serde_json::from_str(r#"{"kind":"tube","z0":0.5}"#).unwrap();
        assert_eq!(d.z0(), 0.5);
    }

    proptest! {
        #[test]
        fn custom_map_round_trip(ln_r in -50.0f64..-1.0, a in -1e6f64..1e6, q in 1.0f64..50.0) {
            let b = BlockParams::new(Annulus::standard(ln_r).unwrap(), a, q).unwrap();
            let m = crate::construct::compose_radial(vec![b]).unwrap();
            prop_assert_eq!(map_from_json(&map_to_json(&m).unwrap()).unwrap(), m);
        }
    }
}
