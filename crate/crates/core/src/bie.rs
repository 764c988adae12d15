//! Boundary integral forward solver.
//!
//! With `u = SL_{k√n} ψ₁` inside and `u^s = SL_k ψ₂` outside, the transmission
//! conditions become
//!
//! ```text
//! S_{k√n} ψ₁ − S_k ψ₂                                = u^i
//! λ(½I + K'_{k√n}) ψ₁ + (½I − K'_k − η S_k) ψ₂      = ∂_ν u^i + η u^i
//! ```
//!
//! Both operators are discretized with the trigonometric Nyström rule on
//! equispaced parameter nodes: the kernels are split as
//! `A(t,s) = A₁(t,s) ln(4 sin²((t−s)/2)) + A₂(t,s)`, the logarithmic part is
//! integrated exactly against the trigonometric interpolant of `A₁ ψ`, and
//! `A₂` with the trapezoidal rule.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::farfield::{equidistant_angles, Backend, FarFieldError, FarFieldMatrix, FarFieldMeta};
use crate::geometry::{BoundaryFrame, GeometryError, ParametricCurve};
use crate::params::{ParamsError, WaveParams};
use crate::special::{bessel_j_upto, hankel1_upto, Point2, SpecialError};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MIN_NODES: usize = 16;

#[derive(Debug, Error)]
pub enum BieError {
    #[error("node count must be even and at least {MIN_NODES}, got {0}")]
    InvalidNodeCount(usize),
    #[error("need at least 2 directions, got {0}")]
    TooFewDirections(usize),
    #[error("nodes {i} and {j} coincide; the curve is not simple")]
    CoincidentNodes { i: usize, j: usize },
    #[error("singular boundary system (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("right-hand side has {got} rows, system has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    FarField(#[from] FarFieldError),
}

/// Equispaced nodes `θ_m = 2πm/M` with cached frames.
#[derive(Debug, Clone)]
pub struct Discretization {
    curve: ParametricCurve,
    nodes: Vec<f64>,
    frames: Vec<BoundaryFrame>,
    /// `x''·ν / |x'|` at each node.
    curvature: Vec<f64>,
    log_weights: Vec<f64>,
}

impl Discretization {
    pub fn new(curve: &ParametricCurve, m: usize) -> Result<Self, BieError> {
        if m < MIN_NODES || m % 2 != 0 {
            return Err(BieError::InvalidNodeCount(m));
        }
        let nodes = equidistant_angles(m);
        let frames = nodes.iter().map(|&t| curve.frame_at(t)).collect::<Result<Vec<_>, _>>()?;
        let curvature = nodes
            .iter()
            .zip(&frames)
            .map(|(&t, f)| curve.second_derivative(t).dot(&f.normal) / f.jacobian)
            .collect();
        Ok(Discretization { curve: curve.clone(), nodes, frames, curvature, log_weights: log_weights(m) })
    }

    pub fn curve(&self) -> &ParametricCurve {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn frames(&self) -> &[BoundaryFrame] {
        &self.frames
    }

    fn trapezoid_weight(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    fn log_weight(&self, i: usize, j: usize) -> f64 {
        let m = self.len();
        self.log_weights[(i + m - j) % m]
    }
}

/// `R_d` with `∫₀^{2π} ln(4 sin²((t_i − s)/2)) f(s) ds ≈ Σ_j R_{i−j} f(t_j)`.
fn log_weights(m: usize) -> Vec<f64> {
    let n = m / 2;
    let mf = m as f64;
    (0..m)
        .map(|d| {
            let sum: f64 = (1..n).map(|k| (2.0 * PI * (k * d) as f64 / mf).cos() / k as f64).sum();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            -4.0 * PI / mf * sum - 4.0 * PI / (mf * mf) * sign
        })
        .collect()
}

/// Nyström matrices of the single-layer `S_τ` and adjoint double-layer `K'_τ`.
pub fn layer_operators(disc: &Discretization, tau: Complex64) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), BieError> {
    let m = disc.len();
    let h = disc.trapezoid_weight();
    let inv4pi = 1.0 / (4.0 * PI);
    let i4 = Complex64::new(0.0, 0.25);
    let rows: Vec<Vec<(Complex64, Complex64)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let fi = &disc.frames[i];
            (0..m)
                .map(|j| {
                    let fj = &disc.frames[j];
                    let sj = fj.jacobian;
                    if i == j {
                        let s2 = (i4 - (EULER_GAMMA + (tau * sj / 2.0).ln()) / (2.0 * PI)) * sj;
                        let s = disc.log_weight(i, i) * (-inv4pi * sj) + h * s2;
                        let k = Complex64::new(h * inv4pi * disc.curvature[i], 0.0);
                        return Ok((s, k));
                    }
                    let diff: Point2 = fi.point - fj.point;
                    let r = diff.norm();
                    if r == 0.0 {
                        return Err(BieError::CoincidentNodes { i, j });
                    }
                    let z = tau * r;
                    let jv = bessel_j_upto(1, z)?;
                    let hv = hankel1_upto(1, z)?;
                    let ln4s2 = (4.0 * ((disc.nodes[i] - disc.nodes[j]) / 2.0).sin().powi(2)).ln();
                    let proj = diff.dot(&fi.normal) / r;

                    let s1 = -inv4pi * jv[0] * sj;
                    let s2 = i4 * hv[0] * sj - s1 * ln4s2;
                    let k1 = inv4pi * tau * jv[1] * proj * sj;
                    let k2 = Complex64::new(0.0, -0.25) * tau * hv[1] * proj * sj - k1 * ln4s2;
                    let w = disc.log_weight(i, j);
                    Ok((w * s1 + h * s2, w * k1 + h * k2))
                })
                .collect::<Result<Vec<_>, BieError>>()
        })
        .collect::<Result<_, _>>()?;
    let s = DMatrix::from_fn(m, m, |i, j| rows[i][j].0);
    let k = DMatrix::from_fn(m, m, |i, j| rows[i][j].1);
    Ok((s, k))
}

/// The `2M × 2M` block collocation matrix.
pub fn assemble_system(disc: &Discretization, params: &WaveParams) -> Result<DMatrix<Complex64>, BieError> {
    params.validate()?;
    let m = disc.len();
    let (s_in, k_in) = layer_operators(disc, params.interior_wave_number())?;
    let (s_out, k_out) = layer_operators(disc, Complex64::new(params.k, 0.0))?;
    let half = DMatrix::<Complex64>::identity(m, m) * Complex64::new(0.5, 0.0);
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    a.view_mut((0, 0), (m, m)).copy_from(&s_in);
    a.view_mut((0, m), (m, m)).copy_from(&(-&s_out));
    a.view_mut((m, 0), (m, m)).copy_from(&((&half + &k_in) * params.lambda));
    a.view_mut((m, m), (m, m)).copy_from(&(&half - &k_out - &s_out * params.eta));
    Ok(a)
}

/// Plane wave `e^{ik x·ŷ}` and its normal derivative at the nodes.
pub fn incident_trace(disc: &Discretization, phi: f64, k: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = Point2::new(phi.cos(), phi.sin());
    disc.frames
        .iter()
        .map(|f| {
            let u = Complex64::from_polar(1.0, k * f.point.dot(&d));
            (u, Complex64::new(0.0, k * f.normal.dot(&d)) * u)
        })
        .unzip()
}

fn right_hand_side(disc: &Discretization, params: &WaveParams, phi: f64) -> Vec<Complex64> {
    let (u, du) = incident_trace(disc, phi, params.k);
    let flux = du.iter().zip(&u).map(|(du, u)| du + params.eta * u);
    u.iter().copied().chain(flux).collect()
}

/// Interior and exterior densities for one incident direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
    pub incident_angle: f64,
}

/// LU factorization of the boundary system, reused for every incident angle.
pub struct FactorizedSystem {
    disc: Discretization,
    params: WaveParams,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl FactorizedSystem {
    pub fn new(disc: &Discretization, params: &WaveParams) -> Result<Self, BieError> {
        let a = assemble_system(disc, params)?;
        Self::from_matrix(disc, params, a)
    }

    fn from_matrix(disc: &Discretization, params: &WaveParams, a: DMatrix<Complex64>) -> Result<Self, BieError> {
        let lu = a.lu();
        let diag: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > f64::EPSILON * max) {
            let condition = if min > 0.0 { max / min } else { f64::INFINITY };
            return Err(BieError::Singular { condition });
        }
        Ok(FactorizedSystem { disc: disc.clone(), params: *params, lu })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Solves for all columns of `rhs` at once.
    pub fn solve(&self, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, BieError> {
        let expected = 2 * self.disc.len();
        if rhs.nrows() != expected {
            return Err(BieError::DimensionMismatch { expected, got: rhs.nrows() });
        }
        self.lu.solve(rhs).ok_or(BieError::Singular { condition: f64::INFINITY })
    }

    pub fn solve_densities(&self, phi: f64) -> Result<DensityPair, BieError> {
        let b = DVector::from_vec(right_hand_side(&self.disc, &self.params, phi));
        let x = self.lu.solve(&b).ok_or(BieError::Singular { condition: f64::INFINITY })?;
        let m = self.disc.len();
        Ok(DensityPair {
            psi1: x.rows(0, m).iter().copied().collect(),
            psi2: x.rows(m, m).iter().copied().collect(),
            incident_angle: phi,
        })
    }

    /// Columns are the stacked densities `(ψ₁, ψ₂)` for each angle.
    pub fn solve_many(&self, phis: &[f64]) -> Result<DMatrix<Complex64>, BieError> {
        let m = self.disc.len();
        let mut b = DMatrix::zeros(2 * m, phis.len());
        for (c, &phi) in phis.iter().enumerate() {
            b.set_column(c, &DVector::from_vec(right_hand_side(&self.disc, &self.params, phi)));
        }
        self.solve(&b)
    }
}

pub fn solve_densities(system: &FactorizedSystem, phi: f64) -> Result<DensityPair, BieError> {
    system.solve_densities(phi)
}

/// `u∞(x̂) = ∫ e^{−ik x̂·w} ψ₂(w) ds(w)` by the trapezoidal rule.
pub fn farfield_from_density(disc: &Discretization, psi2: &[Complex64], theta: f64, k: f64) -> Complex64 {
    let xhat = Point2::new(theta.cos(), theta.sin());
    let sum: Complex64 = disc
        .frames
        .iter()
        .zip(psi2)
        .map(|(f, psi)| Complex64::from_polar(f.jacobian, -k * xhat.dot(&f.point)) * psi)
        .sum();
    sum * disc.trapezoid_weight()
}

/// Far-field matrix on `n` equidistant directions from `m` boundary nodes.
pub fn farfield_matrix_bie(
    curve: &ParametricCurve,
    params: &WaveParams,
    n: usize,
    m: usize,
) -> Result<FarFieldMatrix, BieError> {
    if n < 2 {
        return Err(BieError::TooFewDirections(n));
    }
    let disc = Discretization::new(curve, m)?;
    let system = FactorizedSystem::new(&disc, params)?;
    let angles = equidistant_angles(n);
    let densities = system.solve_many(&angles)?;
    // F = E · Ψ₂ with E_im = h |x'_m| e^{−ik x̂_i·x_m}
    let h = disc.trapezoid_weight();
    let e = DMatrix::from_fn(n, m, |i, j| {
        let f = &disc.frames[j];
        let xhat = Point2::new(angles[i].cos(), angles[i].sin());
        Complex64::from_polar(h * f.jacobian, -params.k * xhat.dot(&f.point))
    });
    let entries = e * densities.rows(m, m);
    let mut meta = FarFieldMeta::new(Backend::Bie);
    meta.nodes = Some(m);
    Ok(FarFieldMatrix::new(*params, angles.clone(), angles, entries, meta)?)
}
