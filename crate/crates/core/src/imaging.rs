//! Direct sampling indicator `W(z) = |⟨φ_z^m, F φ_z^s⟩|²` and its decay
//! diagnostics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::farfield::FarFieldMatrix;
use crate::special::Point2;

const MIN_DECAY_SAMPLES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("imaging functional vanishes on the whole grid; cannot normalize")]
    DegenerateField,
    #[error("insufficient samples for decay fit: {0}")]
    InsufficientSamples(String),
    #[error("invalid radial range [{r_min}, {r_max}]: need 0 < r_min and r_max > 2 r_min")]
    InvalidRange { r_min: f64, r_max: f64 },
    #[error("decay profile has a non-positive envelope value at r = {0}")]
    NonPositiveEnvelope(f64),
}

/// Tensor grid over `[x_min, x_max] × [y_min, y_max]` with endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ImagingGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self, ImagingError> {
        let grid = ImagingGrid { x_min, x_max, y_min, y_max, nx, ny };
        grid.validate()?;
        Ok(grid)
    }

    /// `[-half, half]²` with `n × n` points.
    pub fn square(half: f64, n: usize) -> Result<Self, ImagingError> {
        ImagingGrid::new(-half, half, -half, half, n, n)
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(ImagingError::InvalidGrid(format!(
                "bounds [{}, {}] x [{}, {}] must be finite and increasing",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(ImagingError::InvalidGrid(format!("need at least 2x2 points, got {}x{}", self.nx, self.ny)));
        }
        Ok(())
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * j as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * i as f64 / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.x(j), self.y(i))
    }
}

/// Values are stored `ny × nx`: row `i` is `y(i)`, column `j` is `x(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingResult {
    pub grid: ImagingGrid,
    pub values: DMatrix<f64>,
    pub max_value: f64,
    pub argmax: Point2,
    pub normalized: bool,
}

/// `(e^{−ik x̂_j·z})_j`.
pub fn phi_vector(z: &Point2, angles: &[f64], k: f64) -> DVector<Complex64> {
    DVector::from_iterator(
        angles.len(),
        angles.iter().map(|t| Complex64::from_polar(1.0, -k * (t.cos() * z.x + t.sin() * z.y))),
    )
}

/// `|Σ_ij conj(φ^m_i) F_ij φ^s_j|²`, plain ℓ² pairing with no quadrature weights.
pub fn imaging_value(f: &FarFieldMatrix, z: &Point2) -> f64 {
    let k = f.k();
    let pm = phi_vector(z, f.receiver_angles(), k);
    let ps = phi_vector(z, f.source_angles(), k);
    pm.dotc(&(f.entries() * ps)).norm_sqr()
}

pub fn imaging_grid(f: &FarFieldMatrix, grid: &ImagingGrid, normalize: bool) -> Result<ImagingResult, ImagingError> {
    grid.validate()?;
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|i| (0..grid.nx).map(|j| imaging_value(f, &grid.point(i, j))).collect())
        .collect();
    let mut values = DMatrix::from_fn(grid.ny, grid.nx, |i, j| rows[i][j]);
    let (mut max_value, mut arg) = (f64::NEG_INFINITY, (0, 0));
    for i in 0..grid.ny {
        for j in 0..grid.nx {
            if values[(i, j)] > max_value {
                max_value = values[(i, j)];
                arg = (i, j);
            }
        }
    }
    if normalize {
        if max_value <= 0.0 {
            return Err(ImagingError::DegenerateField);
        }
        values /= max_value;
    }
    Ok(ImagingResult { grid: *grid, values, max_value, argmax: grid.point(arg.0, arg.1), normalized: normalize })
}

/// Radial samples and the indicator along `z = r·direction`.
pub fn radial_profile(f: &FarFieldMatrix, direction: &Point2, r_min: f64, r_max: f64, samples: usize) -> Vec<(f64, f64)> {
    let d = direction.normalize();
    (0..samples)
        .map(|s| {
            let r = r_min + (r_max - r_min) * s as f64 / (samples - 1).max(1) as f64;
            (r, imaging_value(f, &(d * r)))
        })
        .collect()
}

/// Least-squares slope of `log W` against `log r` for the running maxima of
/// `W` over consecutive windows one wavelength wide.
pub fn decay_exponent(
    f: &FarFieldMatrix,
    direction: &Point2,
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> Result<f64, ImagingError> {
    if !(r_min > 0.0 && r_max > 2.0 * r_min && r_max.is_finite()) {
        return Err(ImagingError::InvalidRange { r_min, r_max });
    }
    if samples < MIN_DECAY_SAMPLES {
        return Err(ImagingError::InsufficientSamples(format!("{samples} < {MIN_DECAY_SAMPLES}")));
    }
    let profile = radial_profile(f, direction, r_min, r_max, samples);
    envelope_slope(&profile, 2.0 * PI / f.k())
}

/// Fits `log v ≈ a + s log r` to per-window maxima of `(r, v)` samples and
/// returns `s`. Samples must be sorted by `r`.
pub fn envelope_slope(profile: &[(f64, f64)], window: f64) -> Result<f64, ImagingError> {
    let envelope = envelope(profile, window);
    if envelope.len() < 2 {
        return Err(ImagingError::InsufficientSamples(format!(
            "{} envelope window(s); widen the range or refine the window",
            envelope.len()
        )));
    }
    if let Some(&(r, _)) = envelope.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(ImagingError::NonPositiveEnvelope(r));
    }
    let pts: Vec<(f64, f64)> = envelope.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Maximum of each full window `[r₀ + wℓ, r₀ + w(ℓ+1))`; a trailing partial
/// window is dropped.
pub fn envelope(profile: &[(f64, f64)], window: f64) -> Vec<(f64, f64)> {
    let Some(&(r0, _)) = profile.first() else {
        return Vec::new();
    };
    let r_end = profile.last().unwrap().0;
    let full = ((r_end - r0) / window).floor() as usize;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; full];
    for &(r, v) in profile {
        let w = ((r - r0) / window).floor() as usize;
        if w < full && best[w].is_none_or(|(_, b)| v > b) {
            best[w] = Some((r, v));
        }
    }
    best.into_iter().flatten().collect()
}
