//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    image_curves, ln_distortion_lp_norm, qc_rotation_check, spiral_trace, verify_main_1, verify_main_p, BoundReport,
    CurveKind, MAIN_1_THRESHOLD,
};
use crate::construct::{
    build_rotation, build_submain_1, build_submain_p, distortion_field, series_certificate, BuildOptions, Gauge,
    LambdaSeq, Phi, RadialMap, TargetModulus, Verdict,
};
use crate::error::{Error, Result};
use crate::io;
use crate::modulus::{
    ball_chain_density, check_modulus_inequality, discrete_modulus_with, half_circle_modulus, ring_modulus, ring_radial,
    segment_to_ray, tube_density, weighted_energy, ModulusReport, SolverOptions, SolverStats,
};

#[derive(Debug, Parser)]
#[command(name = "spiralfd", version, about = "Spiraling maps of finite distortion")]
pub struct Cli {
    /// JSON object of flag values for the subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a map and write its JSON.
    Build(BuildArgs),
    /// Sample modulus, rotation and distortion along a radius.
    Trace(TraceArgs),
    /// Print L^p norms of the distortion.
    Distortion(DistortionArgs),
    /// Discrete modulus of a path family, or an explicit-density bound.
    Modulus(ModulusArgs),
    /// Check rotation bounds, the qc identity or the modulus inequality.
    Verify(VerifyArgs),
    /// Convert an artifact to plot-ready CSV.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum TheoremArg {
    SubmainP,
    #[value(name = "submain_1")]
    Submain1,
    Rotation,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value = "submain_p")]
    pub theorem: TheoremArg,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Recorded with the map; used by the growth estimate.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Decreasing lambda values, one per line.
    #[arg(long, value_name = "PATH")]
    pub lambda_file: Option<PathBuf>,
    /// `r^k` or `table:PATH`.
    #[arg(long, default_value = "r^5")]
    pub phi: String,
    /// `default` or `logpow:a`.
    #[arg(long, default_value = "default")]
    pub gauge: String,
    #[arg(long, default_value_t = 0.5)]
    pub safety: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TraceArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub rmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = false)]
pub struct DistortionArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Repeatable.
    #[arg(long, default_values_t = [1.0])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub ball: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ring,
    Segray,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    Ball,
    Tube,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ModulusArgs {
    #[arg(long, value_enum, conflicts_with = "density")]
    pub family: Option<FamilyArg>,
    /// Explicit density instead of a discrete family.
    #[arg(long, value_enum)]
    pub density: Option<DensityArg>,
    #[arg(long, default_value_t = 0.25)]
    pub z0: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value_t = 720)]
    pub paths: usize,
    #[arg(long, default_value_t = 16)]
    pub strands: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r_inner: f64,
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub r_outer: f64,
    /// Weight by the distortion of this map.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Hoelder split for explicit densities.
    #[arg(long)]
    pub split: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the density as `x,y,rho` CSV plus a JSON sidecar.
    #[arg(long)]
    pub density_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CheckArg {
    MainP,
    #[value(name = "main_1")]
    Main1,
    Qc,
    Modeq,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: CheckArg,
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Defaults to the map's own exponent.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.0625)]
    pub z0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = MAIN_1_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ViewArg {
    Stages,
    Curves,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ExportArgs {
    /// Map JSON or bound report JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// For maps: stage table or log-polar image curves.
    #[arg(long, value_enum, default_value = "stages")]
    pub view: ViewArg,
    #[arg(long, default_value_t = 24)]
    pub curves: usize,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::Json(_) | Error::Csv(_) => 2,
        Error::NonConvergence { .. } => 3,
        Error::Constraint { .. } => 4,
        Error::Io(_) | Error::OutOfRange(_) | Error::Degenerate { .. } => 1,
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

pub fn error_json(kind: &str, message: String, exit_code: u8) -> String {
    serde_json::to_string(&ErrorJson {
        error: kind,
        message,
        exit_code,
    })
    .unwrap_or_else(|_| format!("{{\"error\":\"{kind}\"}}"))
}

/// Splices `--config` values in front of the subcommand's own flags.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut out = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = Some(PathBuf::from(it.next().ok_or_else(|| Error::invalid("--config needs a path"))?));
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            out.push(a);
        }
    }
    let Some(path) = config else { return Ok(out) };
    let value: serde_json::Value = io::read_json(&path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::invalid("config file must hold a JSON object"))?;
    let mut extra = Vec::new();
    for (k, v) in obj {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => extra.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                for item in items {
                    extra.push(flag.clone().into());
                    extra.push(scalar(item)?.into());
                }
            }
            other => {
                extra.push(flag.into());
                extra.push(scalar(other)?.into());
            }
        }
    }
    // program name, subcommand, then config flags
    let at = out.len().min(2);
    out.splice(at..at, extra);
    Ok(out)
}

fn scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::invalid(format!("unsupported config value {v}"))),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, |w| Ok(writeln!(w, "{text}")?)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?, out)
}

pub fn parse_phi(spec: &str) -> Result<Phi> {
    if let Some(k) = spec.strip_prefix("r^") {
        let k: f64 = k.parse().map_err(|_| Error::invalid(format!("bad exponent in --phi {spec}")))?;
        Phi::power(k)
    } else if let Some(path) = spec.strip_prefix("table:") {
        Phi::from_csv(Path::new(path))
    } else {
        Err(Error::invalid(format!("--phi must be r^k or table:PATH, got {spec}")))
    }
}

/// `None` for `default`.
pub fn parse_gauge(spec: &str) -> Result<Option<Gauge>> {
    if spec == "default" {
        Ok(None)
    } else if let Some(a) = spec.strip_prefix("logpow:") {
        let a: f64 = a.parse().map_err(|_| Error::invalid(format!("bad exponent in --gauge {spec}")))?;
        Gauge::log_pow(a).map(Some)
    } else {
        Err(Error::invalid(format!("--gauge must be default or logpow:a, got {spec}")))
    }
}

fn read_lambda(path: &Path) -> Result<LambdaSeq> {
    let text = std::fs::read_to_string(path)?;
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|_| Error::invalid(format!("bad lambda value {l:?}"))))
        .collect::<Result<Vec<_>>>()?;
    LambdaSeq::from_values(&values)
}

pub fn build(a: &BuildArgs) -> Result<RadialMap> {
    if a.depth == 0 {
        return Err(Error::invalid("--depth must be >= 1"));
    }
    if !(a.safety > 0.0 && a.safety <= 1.0) {
        return Err(Error::invalid("--safety must lie in (0, 1]"));
    }
    let mut opts = BuildOptions::new(a.depth);
    opts.safety = a.safety;
    if let Some(p) = &a.lambda_file {
        opts.lambda = read_lambda(p)?;
    }
    let gauge = parse_gauge(&a.gauge)?;
    let default_gauge = || Gauge::log_pow(0.25);
    let mut map = match a.theorem {
        TheoremArg::SubmainP => {
            let target = TargetModulus::new(parse_phi(&a.phi)?, a.p)?;
            let g = gauge.unwrap_or_else(|| Gauge::compression(target.clone()));
            build_submain_p(&target, &g, &opts)?
        }
        TheoremArg::Submain1 => build_submain_1(a.beta, &gauge.map_or_else(default_gauge, Ok)?, &opts)?,
        TheoremArg::Rotation => build_rotation(&gauge.map_or_else(default_gauge, Ok)?, &opts)?,
    };
    if let Some(eps) = a.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("--epsilon must be positive"));
        }
        map.meta.epsilon = Some(eps);
    }
    Ok(map)
}

#[derive(Serialize)]
struct NormLine {
    p: f64,
    ball: f64,
    ln_norm: f64,
    norm: f64,
    certificate: Verdict,
}

#[derive(Serialize)]
struct ModulusOut {
    #[serde(flatten)]
    report: ModulusReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<SolverStats>,
    /// Continuum value for the full generator family.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<f64>,
}

fn modulus(a: &ModulusArgs) -> Result<()> {
    let field = a.map.as_deref().map(io::read_map).transpose()?.map(|m| distortion_field(&m));
    if let Some(d) = a.density {
        let density = match d {
            DensityArg::Ball => ball_chain_density(a.z0)?,
            DensityArg::Tube => tube_density(a.z0)?,
        };
        let report = weighted_energy(&density, &field.clone().unwrap_or_default(), a.p, a.split)?;
        if let Some(path) = &a.density_out {
            let mut g = density.rasterize(a.grid)?;
            if let Some(f) = &field {
                g = g.with_weight(f);
            }
            io::write_grid_density(&g, path)?;
        }
        return emit_json(&ModulusOut { report, solver: None, oracle: None }, a.out.as_deref());
    }
    let Some(kind) = a.family else {
        return Err(Error::invalid("modulus needs --family or --density"));
    };
    let (family, oracle) = match kind {
        FamilyArg::Ring => (
            ring_radial(a.r_inner, a.r_outer, a.paths, a.strands)?,
            ring_modulus(a.r_inner, a.r_outer),
        ),
        FamilyArg::Segray => (segment_to_ray(a.z0, a.paths, a.strands)?, half_circle_modulus(a.z0)),
    };
    if !(a.tolerance > 0.0) || a.max_sweeps == 0 {
        return Err(Error::invalid("--tolerance and --max-sweeps must be positive"));
    }
    let opts = SolverOptions {
        tolerance: a.tolerance,
        max_sweeps: a.max_sweeps,
    };
    let out = discrete_modulus_with(&family, a.grid, field.as_ref(), &opts)?;
    if let Some(path) = &a.density_out {
        io::write_grid_density(&out.density, path)?;
    }
    let mut report = out.report;
    if kind == FamilyArg::Segray {
        report.inputs.z0 = Some(a.z0);
    }
    emit_json(
        &ModulusOut {
            report,
            solver: Some(out.stats),
            oracle: (field.is_none()).then_some(oracle),
        },
        a.out.as_deref(),
    )
}

fn need_map(map: &Option<PathBuf>) -> Result<RadialMap> {
    let p = map.as_deref().ok_or_else(|| Error::invalid("this check needs --map"))?;
    io::read_map(p)
}

fn verify(a: &VerifyArgs) -> Result<()> {
    let out = a.out.as_deref();
    match a.check {
        CheckArg::Qc => emit_json(&qc_rotation_check(a.alpha)?, out),
        CheckArg::MainP => {
            let map = need_map(&a.map)?;
            let p = a.p.or(map.meta.p).unwrap_or(2.0);
            let rep: BoundReport = verify_main_p(&map, p, &map.ln_radii())?;
            emit_json(&rep, out)
        }
        CheckArg::Main1 => {
            let map = need_map(&a.map)?;
            emit_json(&verify_main_1(&map, &map.ln_radii(), a.threshold)?, out)
        }
        CheckArg::Modeq => {
            let map = need_map(&a.map)?;
            let p = a.p.or(map.meta.p).unwrap_or(2.0);
            emit_json(&check_modulus_inequality(&map, a.z0, p)?, out)
        }
    }
}

#[derive(Serialize)]
struct CurveRow {
    curve: usize,
    kind: CurveKind,
    param: f64,
    ln_modulus: f64,
    angle: f64,
}

fn export(a: &ExportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("format").and_then(|f| f.as_str()) == Some(io::MAP_FORMAT) {
        let map = io::map_from_json(&text)?;
        return match a.view {
            ViewArg::Stages => io::export_map_stages(&map, &a.output),
            ViewArg::Curves => {
                let ln_min = map.blocks().last().map_or(-5.0, |b| b.annulus.ln_inner() - 1.0);
                let circles: Vec<f64> = (1..=a.curves).map(|k| ln_min * k as f64 / a.curves as f64).collect();
                let curves = image_curves(&map, &circles, a.curves, ln_min, a.samples)?;
                let rows = curves.iter().enumerate().flat_map(|(i, c)| {
                    c.points.iter().map(move |p| CurveRow {
                        curve: i,
                        kind: c.kind,
                        param: c.param,
                        ln_modulus: p[0],
                        angle: p[1],
                    })
                });
                io::write_atomic(&a.output, |w| {
                    let mut c = csv::Writer::from_writer(w);
                    for r in rows {
                        c.serialize(r)?;
                    }
                    c.flush()?;
                    Ok(())
                })
            }
        };
    }
    if value.get("ratios").is_some() {
        let rep: BoundReport = serde_json::from_value(value)?;
        return io::export_bound(&rep, &a.output);
    }
    Err(Error::invalid("export understands map JSON and bound reports"))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Build(a) => {
            let map = build(a)?;
            emit(&io::map_to_json(&map)?, a.out.as_deref())
        }
        Command::Trace(a) => {
            let map = io::read_map(&a.map)?;
            let tr = spiral_trace(&map, &distortion_field(&map), a.rmin, a.rmax, a.points)?;
            match &a.out {
                Some(p) => io::write_trace(&tr, p),
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for s in &tr.samples {
                        w.serialize(s)?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Distortion(a) => {
            let map = io::read_map(&a.map)?;
            let field = distortion_field(&map);
            for &p in &a.p {
                let ln_norm = ln_distortion_lp_norm(&field, p, a.ball)?;
                let line = NormLine {
                    p,
                    ball: a.ball,
                    ln_norm,
                    norm: ln_norm.exp(),
                    certificate: series_certificate(map.blocks(), p).exact.verdict,
                };
                println!("{}", serde_json::to_string(&line)?);
            }
            Ok(())
        }
        Command::Modulus(a) => modulus(a),
        Command::Verify(a) => verify(a),
        Command::Export(a) => export(a),
    }
}

/// Parses, runs and reports; returns the process exit status.
pub fn main_with_args(args: Vec<OsString>) -> u8 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", error_json(e.kind(), e.to_string(), code));
            return code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", error_json("invalid_input", e.kind().to_string(), 2));
            let _ = e.print();
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", error_json(e.kind(), e.to_string(), code));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn phi_and_gauge_specs() {
        assert_eq!(parse_phi("r^5").unwrap(), Phi::power(5.0).unwrap());
        assert!(parse_phi("r5").is_err());
        assert!(parse_gauge("default").unwrap().is_none());
        assert_eq!(parse_gauge("logpow:0.5").unwrap(), Some(Gauge::log_pow(0.5).unwrap()));
        assert!(parse_gauge("logpow:-1").is_err());
    }

    #[test]
    fn config_is_spliced_before_flags() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.json");
        std::fs::write(&good, r#"{"depth": 3, "theorem": "submain_1", "lambda_file": null}"#).unwrap();
        let out = expand_config(args(&format!("spiralfd build --config {} --depth 5", good.display()))).unwrap();
        let s: Vec<_> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(s[..2], ["spiralfd", "build"]);
        let Command::Build(b) = Cli::try_parse_from(out).unwrap().command else { panic!() };
        assert_eq!((b.depth, b.theorem), (5, TheoremArg::Submain1));

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"split": true}"#).unwrap();
        let out = expand_config(args(&format!("spiralfd build --config {}", bad.display()))).unwrap();
        assert!(Cli::try_parse_from(out).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::NonConvergence { iterations: 1, gap: 1.0 }), 3);
        assert_eq!(exit_code(&Error::constraint(1, "x")), 4);
    }

    #[test]
    fn unknown_flags_rejected() {
        assert!(Cli::try_parse_from(args("spiralfd build --bogus 1")).is_err());
        assert!(Cli::try_parse_from(args("spiralfd modulus --family ring --density ball")).is_err());
    }
}
