//! Plane-wave integrals over arcs of the unit circle.
//!
//! Over the full circle, `∫ e^{ik x·ŷ} ds(ŷ) = 2π J₀(k|x|)`. Over an arc
//! `[α, β]` the Jacobi–Anger expansion gives, with `φ` the polar angle of `x`,
//!
//! ```text
//! (β−α) J₀(k|x|) + 4 Σ_{ℓ≥1} (i^ℓ/ℓ) J_ℓ(k|x|) cos(ℓ(α+β−2φ)/2) sin(ℓ(β−α)/2)
//! ```
//!
//! which is truncated at `ℓ = L`. A composite Gauss–Legendre rule serves as
//! the independent reference.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::farfield::ApertureArc;
use crate::special::{bessel_j, bessel_j_upto, derivative_from_sequence, Point2, SpecialError};

const GL_ORDER: usize = 16;
const MIN_QUADRATURE_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApertureError {
    #[error("expansion needs at least one arc")]
    NoArcs,
    #[error("truncation must be at least 1")]
    ZeroTruncation,
    #[error("wave number must be positive and finite, got {0}")]
    WaveNumber(f64),
    #[error("radii must be positive and ascending")]
    InvalidRadii,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// `2π J₀(k|x − z|)`.
pub fn funk_hecke_full(k: f64, x: &Point2, z: &Point2) -> Result<Complex64, ApertureError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ApertureError::WaveNumber(k));
    }
    Ok(2.0 * PI * bessel_j(0, Complex64::new(k * (x - z).norm(), 0.0))?)
}

/// Nodes and weights of the 16-point Gauss–Legendre rule on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for m in 2..=n {
                        let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// Composite Gauss–Legendre value of `∫_α^β e^{ik x·ŷ(θ)} dθ`, using at least
/// `max(nodes, 64)` nodes and enough panels to resolve the oscillation.
pub fn aperture_integral_quadrature(arc: &ApertureArc, k: f64, x: &Point2, nodes: usize) -> Complex64 {
    let len = arc.length();
    let by_nodes = nodes.max(MIN_QUADRATURE_NODES).div_ceil(GL_ORDER);
    let by_phase = (k * x.norm() * len).ceil() as usize + 1;
    let panels = by_nodes.max(by_phase);
    let h = len / panels as f64;
    let rule = gauss_legendre();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = arc.alpha() + h * (p as f64 + 0.5);
        for &(t, w) in rule {
            let theta = mid + 0.5 * h * t;
            sum += w * Complex64::from_polar(1.0, k * (x.x * theta.cos() + x.y * theta.sin()));
        }
    }
    sum * (0.5 * h)
}

/// Truncation `⌈e k r / 2⌉ + 10`, beyond which `J_ℓ(kr)` is negligible.
pub fn tail_rule(k: f64, r: f64) -> usize {
    (E * k * r / 2.0).ceil() as usize + 10
}

/// Truncated arc expansion for a union of arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureExpansion {
    arcs: Vec<ApertureArc>,
    k: f64,
    truncation: usize,
}

impl ApertureExpansion {
    pub fn new(arcs: Vec<ApertureArc>, k: f64, truncation: usize) -> Result<Self, ApertureError> {
        if arcs.is_empty() {
            return Err(ApertureError::NoArcs);
        }
        if truncation == 0 {
            return Err(ApertureError::ZeroTruncation);
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(ApertureError::WaveNumber(k));
        }
        Ok(ApertureExpansion { arcs, k, truncation })
    }

    pub fn arcs(&self) -> &[ApertureArc] {
        &self.arcs
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Coefficients `c_0..=c_L` with value `Σ c_ℓ J_ℓ(k r)` at polar angle `φ`.
    fn coefficients(&self, phi: f64) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.truncation + 1];
        for arc in &self.arcs {
            let (a, b) = (arc.alpha(), arc.beta());
            c[0] += b - a;
            let mut il = Complex64::new(1.0, 0.0);
            for (l, cl) in c.iter_mut().enumerate().skip(1) {
                il *= Complex64::i();
                let lf = l as f64;
                *cl += il * (4.0 / lf * (lf * (a + b - 2.0 * phi) / 2.0).cos() * (lf * (b - a) / 2.0).sin());
            }
        }
        c
    }

    /// Value and radial derivative at `x = r(cos φ, sin φ)`.
    fn value_and_derivative(&self, r: f64, phi: f64) -> Result<(Complex64, Complex64), ApertureError> {
        let c = self.coefficients(phi);
        let j = bessel_j_upto(self.truncation as u32 + 1, Complex64::new(self.k * r, 0.0))?;
        let value = c.iter().zip(&j).map(|(c, j)| c * j).sum();
        let deriv: Complex64 =
            c.iter().enumerate().map(|(l, c)| c * derivative_from_sequence(&j, l)).sum::<Complex64>() * self.k;
        Ok((value, deriv))
    }
}

pub fn aperture_integral_series(exp: &ApertureExpansion, x: &Point2) -> Result<Complex64, ApertureError> {
    let phi = x.y.atan2(x.x);
    Ok(exp.value_and_derivative(x.norm(), phi)?.0)
}

/// `(r, |value|, |∂_r value|)` along the ray at polar angle `φ`.
pub fn aperture_decay_profile(
    exp: &ApertureExpansion,
    phi: f64,
    radii: &[f64],
) -> Result<Vec<(f64, f64, f64)>, ApertureError> {
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ApertureError::InvalidRadii);
    }
    radii
        .iter()
        .map(|&r| {
            let (v, d) = exp.value_and_derivative(r, phi)?;
            Ok((r, v.norm(), d.norm()))
        })
        .collect()
}
