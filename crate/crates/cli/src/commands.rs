use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;
use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;
use dsm_core::aperture::{aperture_decay_profile, ApertureExpansion};
use dsm_core::bie::farfield_matrix_bie;
use dsm_core::disk::farfield_matrix_analytic;
use dsm_core::farfield::{load_farfield, save_farfield, spectral_norm, ApertureArc, FarFieldMatrix};
use dsm_core::geometry::make_shape;
use dsm_core::imaging::{envelope_slope, imaging_grid, radial_profile, ImagingGrid};
use dsm_core::params::WaveParams;
use dsm_core::special::Point2;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::output::{with_extension, write_csv, write_grid_csv, write_json, write_pgm};
use crate::{
    BackendArg, ConvergenceArgs, DecayArgs, DecayMode, GenerateArgs, NoiseArgs, ReconstructArgs, TWO_PI,
};

const CONVERGENCE_NODES: [usize; 4] = [60, 120, 180, 240];
const CONVERGENCE_K: [f64; 3] = [2.0, 4.0, 6.0];

fn usage(message: String) -> CliError {
    CliError::usage(anyhow!(message))
}

fn run_config<A: Serialize>(command: &str, args: &A, threads: Option<usize>) -> CliResult<Value> {
    Ok(json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "args": serde_json::to_value(args)?,
    }))
}

fn load(path: &Path) -> CliResult<FarFieldMatrix> {
    load_farfield(path).map_err(|e| CliError::from(e).context(format!("reading {}", path.display())))
}

fn save(f: &FarFieldMatrix, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_farfield(f, path).map_err(|e| CliError::usage(e).context(format!("writing {}", path.display())))
}

/// `a:b`, 1-based and inclusive, as a 0-based half-open range.
fn parse_index_range(text: &str, len: usize, which: &str) -> CliResult<Range<usize>> {
    let bad = || usage(format!("--{which} expects a:b with 1 <= a <= b <= {len}, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b || b > len {
        return Err(bad());
    }
    Ok(a - 1..b)
}

pub fn generate(args: &GenerateArgs, threads: Option<usize>) -> CliResult<()> {
    let p = &args.physics;
    let params = WaveParams::new(p.k, p.n, p.eta, p.lambda)?;
    let translation = Point2::new(args.tx, args.ty);
    let curve = make_shape(&args.shape, args.scale, translation)?;
    let mut f = match args.backend {
        BackendArg::Analytic => {
            if curve.name() != "disk" || args.scale != 1.0 || translation != Point2::zeros() {
                return Err(usage(format!(
                    "the analytic backend covers only the unit disk at the origin (got shape `{}`, scale {}, translation ({}, {}))",
                    args.shape, args.scale, args.tx, args.ty
                )));
            }
            farfield_matrix_analytic(&params, args.ndir)?
        }
        BackendArg::Bie => farfield_matrix_bie(&curve, &params, args.ndir, args.nodes)?,
    };
    f.meta_mut().config = Some(run_config("generate", args, threads)?.to_string());
    save(&f, &args.output)
}

pub fn noise(args: &NoiseArgs, threads: Option<usize>) -> CliResult<()> {
    let f = load(&args.input)?;
    let noisy = f.add_noise(args.delta, args.seed)?;
    let mut config = run_config("noise", args, threads)?;
    if let Some(previous) = &f.meta().config {
        config["input_config"] = serde_json::from_str(previous).unwrap_or_else(|_| Value::String(previous.clone()));
    }
    let mut noisy = noisy;
    noisy.meta_mut().config = Some(config.to_string());
    save(&noisy, &args.output)
}

pub fn convergence(args: &ConvergenceArgs, threads: Option<usize>) -> CliResult<()> {
    let config = run_config("convergence", args, threads)?;
    let disk = make_shape("disk", 1.0, Point2::zeros())?;
    let mut rows = Vec::new();
    for k in CONVERGENCE_K {
        let params = WaveParams::reference(k);
        let exact = farfield_matrix_analytic(&params, args.ndir)?;
        for m in CONVERGENCE_NODES {
            let f = farfield_matrix_bie(&disk, &params, args.ndir, m)?;
            rows.push(vec![k, m as f64, spectral_norm(&(exact.entries() - f.entries()))]);
        }
    }
    match &args.output {
        Some(path) => write_csv(path, &config, "k,M,error", &rows),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "# config: {config}")?;
            writeln!(out, "k,M,error")?;
            for r in &rows {
                writeln!(out, "{},{},{:e}", r[0], r[1], r[2])?;
            }
            Ok(())
        }
    }
}

pub fn reconstruct(args: &ReconstructArgs, threads: Option<usize>) -> CliResult<()> {
    let started = Instant::now();
    let mut f = load(&args.input)?;
    if args.receivers.is_some() || args.sources.is_some() {
        let rx = match &args.receivers {
            Some(t) => parse_index_range(t, f.receiver_angles().len(), "receivers")?,
            None => 0..f.receiver_angles().len(),
        };
        let sx = match &args.sources {
            Some(t) => parse_index_range(t, f.source_angles().len(), "sources")?,
            None => 0..f.source_angles().len(),
        };
        f = f.restrict_aperture(rx, sx)?;
    }
    let grid = ImagingGrid::new(args.xmin, args.xmax, args.ymin, args.ymax, args.nx, args.ny)?;
    let result = imaging_grid(&f, &grid, true)?;
    let elapsed = started.elapsed().as_secs_f64();

    let config = run_config("reconstruct", args, threads)?;
    write_grid_csv(&with_extension(&args.output, "csv"), &config, &result)?;
    write_pgm(&with_extension(&args.output, "pgm"), &config, &result)?;
    let summary = json!({
        "config": config,
        "input_config": f.meta().config.as_deref().map(|c| serde_json::from_str::<Value>(c).unwrap_or(Value::String(c.to_string()))),
        "backend": f.meta().backend.as_str(),
        "receivers": f.receiver_angles().len(),
        "sources": f.source_angles().len(),
        "noise": f.meta().noise.map(|n| json!({"delta": n.delta, "seed": n.seed})),
        "max_value": result.max_value,
        "argmax": [result.argmax.x, result.argmax.y],
        "wall_time_seconds": elapsed,
    });
    write_json(&with_extension(&args.output, "json"), &summary)
}

fn radii(r_min: f64, r_max: f64, samples: usize) -> CliResult<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(usage(format!("need 0 < r-min < r-max, got {r_min} and {r_max}")));
    }
    if samples < 16 {
        return Err(usage(format!("--samples must be at least 16, got {samples}")));
    }
    let h = (r_max - r_min) / (samples - 1) as f64;
    Ok((0..samples).map(|i| r_min + h * i as f64).collect())
}

pub fn decay(args: &DecayArgs, threads: Option<usize>) -> CliResult<()> {
    let config = run_config("decay", args, threads)?;
    let summary = match args.mode {
        DecayMode::Imaging => {
            let f = match &args.input {
                Some(path) => load(path)?,
                None if args.synthetic => FarFieldMatrix::identity(args.k.unwrap_or(TWO_PI), args.ndir)?,
                None => farfield_matrix_analytic(&WaveParams::reference(args.k.unwrap_or(TWO_PI)), args.ndir)?,
            };
            let dir = Point2::new(args.dir_x, args.dir_y);
            if !(dir.norm() > 0.0 && dir.norm().is_finite()) {
                return Err(usage("--dir-x/--dir-y must give a nonzero direction".into()));
            }
            let (r_min, r_max) = (args.r_min.unwrap_or(5.0), args.r_max.unwrap_or(20.0));
            radii(r_min, r_max, args.samples)?;
            let profile = radial_profile(&f, &dir.normalize(), r_min, r_max, args.samples);
            let slope = envelope_slope(&profile, 2.0 * PI / f.k())?;
            let rows: Vec<Vec<f64>> = profile.iter().map(|&(r, v)| vec![r, v]).collect();
            write_csv(&with_extension(&args.output, "csv"), &config, "r,value", &rows)?;
            json!({ "config": config, "mode": "imaging", "k": f.k(), "slope": slope })
        }
        DecayMode::Aperture => {
            let k = args.k.unwrap_or(1.0);
            let arcs = ApertureArc::wrapped(args.alpha, args.beta)?;
            let exp = ApertureExpansion::new(arcs, k, args.truncation)?;
            let rs = radii(args.r_min.unwrap_or(20.0), args.r_max.unwrap_or(200.0), args.samples)?;
            let profile = aperture_decay_profile(&exp, args.phi, &rs)?;
            let window = 2.0 * PI / k;
            let value: Vec<(f64, f64)> = profile.iter().map(|p| (p.0, p.1)).collect();
            let deriv: Vec<(f64, f64)> = profile.iter().map(|p| (p.0, p.2)).collect();
            let slope = envelope_slope(&value, window)?;
            let slope_derivative = envelope_slope(&deriv, window)?;
            let rows: Vec<Vec<f64>> = profile.iter().map(|&(r, v, d)| vec![r, v, d]).collect();
            write_csv(&with_extension(&args.output, "csv"), &config, "r,value,derivative", &rows)?;
            json!({
                "config": config,
                "mode": "aperture",
                "k": k,
                "slope": slope,
                "slope_derivative": slope_derivative,
            })
        }
    };
    write_json(&with_extension(&args.output, "json"), &summary)
}
