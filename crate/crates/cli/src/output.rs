//! CSV, PGM and JSON writers. Every file carries the run configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dsm_core::imaging::ImagingResult;
use serde_json::Value;

use crate::error::CliResult;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `prefix` with its extension replaced by `ext`.
pub fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut p = prefix.to_path_buf();
    p.set_extension(ext);
    p
}

fn config_comment(config: &Value) -> String {
    format!("# config: {config}")
}

/// Rows written after a `# config` comment and a header line.
pub fn write_csv(path: &Path, config: &Value, header: &str, rows: &[Vec<f64>]) -> CliResult<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", config_comment(config))?;
    writeln!(w, "{header}")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_csv(path: &Path, config: &Value, result: &ImagingResult) -> CliResult<()> {
    let g = &result.grid;
    let rows: Vec<Vec<f64>> = (0..g.ny)
        .flat_map(|i| (0..g.nx).map(move |j| (i, j)))
        .map(|(i, j)| vec![g.x(j), g.y(i), result.values[(i, j)]])
        .collect();
    write_csv(path, config, "x,y,value", &rows)
}

/// Binary 8-bit PGM, top row at `y_max`, values scaled by the grid maximum.
pub fn write_pgm(path: &Path, config: &Value, result: &ImagingResult) -> CliResult<()> {
    let g = &result.grid;
    let max = result.values.iter().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut w = create(path)?;
    writeln!(w, "P5")?;
    writeln!(w, "{}", config_comment(config))?;
    writeln!(w, "{} {}", g.nx, g.ny)?;
    writeln!(w, "255")?;
    let mut bytes = Vec::with_capacity(g.nx * g.ny);
    for i in (0..g.ny).rev() {
        for j in 0..g.nx {
            bytes.push((result.values[(i, j)] * scale).round().clamp(0.0, 255.0) as u8);
        }
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
