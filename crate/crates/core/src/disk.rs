//! Separation-of-variables far field for the unit disk.
//!
//! Inside, `u = Σ b_p J_p(k√n r) e^{ip(θ−φ)}`; outside, the scattered field is
//! `Σ a_p H_p(kr) e^{ip(θ−φ)}`. Matching the two transmission conditions on
//! `r = 1` gives a 2×2 system per mode whose solution for `a_p` is below.

use std::f64::consts::E;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::farfield::{equidistant_angles, Backend, FarFieldError, FarFieldMatrix, FarFieldMeta};
use crate::params::{ParamsError, WaveParams};
use crate::special::{bessel_j_upto, derivative_from_sequence, hankel1_upto, SpecialError};

const TAIL_RATIO: f64 = 1e-14;
const TAIL_FLOOR: f64 = 1e-300;
const MAX_TRUNCATION: usize = 2000;

#[derive(Debug, Error)]
pub enum DiskError {
    #[error("mode {p}: denominator {magnitude:e} is numerically zero (k may be an interior eigenvalue)")]
    SingularDenominator { p: usize, magnitude: f64 },
    #[error("truncation did not converge below P = {0}")]
    TruncationNotReached(usize),
    #[error("need at least 2 directions, got {0}")]
    TooFewDirections(usize),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    FarField(#[from] FarFieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Start at `max(⌈ek⌉ + 20, 30)` and extend until the last coefficient is
    /// negligible.
    Auto,
    Fixed(usize),
}

/// Bessel data at `k` and `k√n` for orders `0..=pmax` (plus one extra order
/// for the derivatives).
struct ModeTables {
    jk: Vec<Complex64>,
    hk: Vec<Complex64>,
    jkn: Vec<Complex64>,
}

impl ModeTables {
    fn new(pmax: usize, params: &WaveParams) -> Result<Self, DiskError> {
        let k = Complex64::new(params.k, 0.0);
        let top = (pmax + 1) as u32;
        Ok(ModeTables {
            jk: bessel_j_upto(top, k)?,
            hk: hankel1_upto(top, k)?,
            jkn: bessel_j_upto(top, params.interior_wave_number())?,
        })
    }

    fn coefficient(&self, p: usize, params: &WaveParams) -> Result<Complex64, DiskError> {
        let k = params.k;
        let lk = params.lambda * params.interior_wave_number();
        let jn = self.jkn[p];
        let djn = derivative_from_sequence(&self.jkn, p);
        let (j, dj) = (self.jk[p], derivative_from_sequence(&self.jk, p));
        let (h, dh) = (self.hk[p], derivative_from_sequence(&self.hk, p));
        let num = lk * j * djn - jn * (k * dj + params.eta * j);
        let den = lk * h * djn - jn * (k * dh + params.eta * h);
        if den.norm() < TAIL_FLOOR {
            return Err(DiskError::SingularDenominator { p, magnitude: den.norm() });
        }
        Ok(-num / den)
    }
}

/// `a_p` for one mode. `a_{-p} = a_p`.
pub fn mode_coefficient(p: usize, params: &WaveParams) -> Result<Complex64, DiskError> {
    params.validate()?;
    ModeTables::new(p, params)?.coefficient(p, params)
}

/// Coefficients `a_0..=a_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    a: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn compute(params: &WaveParams, truncation: Truncation) -> Result<Self, DiskError> {
        params.validate()?;
        match truncation {
            Truncation::Fixed(p) => Self::up_to(p, params),
            Truncation::Auto => {
                let mut p = ((params.k * E).ceil() as usize + 20).max(30);
                loop {
                    let coeffs = Self::up_to(p, params)?;
                    if coeffs.tail_is_negligible() {
                        return Ok(coeffs);
                    }
                    p += 10;
                    if p > MAX_TRUNCATION {
                        return Err(DiskError::TruncationNotReached(MAX_TRUNCATION));
                    }
                }
            }
        }
    }

    fn up_to(p: usize, params: &WaveParams) -> Result<Self, DiskError> {
        let tables = ModeTables::new(p, params)?;
        let a = (0..=p).map(|q| tables.coefficient(q, params)).collect::<Result<_, _>>()?;
        Ok(ModeCoefficients { a })
    }

    fn tail_is_negligible(&self) -> bool {
        let last = self.a.last().map_or(0.0, |z| z.norm());
        let max = self.a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // the null scatterer leaves only rounding noise in every mode
        last <= TAIL_RATIO * max || last <= TAIL_FLOOR.sqrt()
    }

    pub fn truncation(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.a
    }

    /// `(4/i)[a_0 + 2 Σ a_p cos(p(θ−φ))]`.
    pub fn far_field(&self, theta: f64, phi: f64) -> Complex64 {
        self.far_field_at_difference(theta - phi)
    }

    fn far_field_at_difference(&self, d: f64) -> Complex64 {
        let tail: Complex64 = self.a.iter().enumerate().skip(1).map(|(p, a)| a * (p as f64 * d).cos()).sum();
        Complex64::new(0.0, -4.0) * (self.a[0] + 2.0 * tail)
    }
}

pub fn farfield_disk(theta: f64, phi: f64, params: &WaveParams, truncation: Truncation) -> Result<Complex64, DiskError> {
    Ok(ModeCoefficients::compute(params, truncation)?.far_field(theta, phi))
}

/// `F_ij = u∞(θ_i, θ_j)` on `n` equidistant directions.
pub fn farfield_matrix_analytic(params: &WaveParams, n: usize) -> Result<FarFieldMatrix, DiskError> {
    farfield_matrix_analytic_with(params, n, Truncation::Auto)
}

pub fn farfield_matrix_analytic_with(
    params: &WaveParams,
    n: usize,
    truncation: Truncation,
) -> Result<FarFieldMatrix, DiskError> {
    if n < 2 {
        return Err(DiskError::TooFewDirections(n));
    }
    let coeffs = ModeCoefficients::compute(params, truncation)?;
    // fold i−j into 0..=n/2 so the matrix is exactly circulant and symmetric
    let column: Vec<Complex64> = (0..=n / 2)
        .map(|d| coeffs.far_field_at_difference(2.0 * std::f64::consts::PI * d as f64 / n as f64))
        .collect();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let d = (i + n - j) % n;
        column[d.min(n - d)]
    });
    let angles = equidistant_angles(n);
    let mut meta = FarFieldMeta::new(Backend::Analytic);
    meta.truncation = Some(coeffs.truncation());
    Ok(FarFieldMatrix::new(*params, angles.clone(), angles, entries, meta)?)
}
