//! Closed boundary curves with analytic derivatives.
//!
//! Four reference shapes are provided (disk, kite, peanut, star). A curve is
//! the raw shape composed with a uniform scale and a translation. Orientation
//! is fixed once at construction from the signed area, so every
//! [`BoundaryFrame`] carries the outward normal regardless of the parameter
//! direction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::special::Point2;

const TWO_PI: f64 = 2.0 * PI;
const ORIENTATION_SAMPLES: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unknown shape `{0}` (expected disk, kite, peanut or star)")]
    UnknownShape(String),
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("degenerate curve: |x'(θ)| = {speed:e} at θ = {theta}")]
    Degenerate { theta: f64, speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Disk,
    Kite,
    Peanut,
    Star,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Disk, Shape::Kite, Shape::Peanut, Shape::Star];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Kite => "kite",
            Shape::Peanut => "peanut",
            Shape::Star => "star",
        }
    }

    /// Position and first two derivatives of the unscaled shape.
    fn raw(self, t: f64) -> [Point2; 3] {
        let (s, c) = t.sin_cos();
        match self {
            Shape::Disk => [Point2::new(c, s), Point2::new(-s, c), Point2::new(-c, -s)],
            Shape::Kite => {
                let (s2, c2) = (2.0 * t).sin_cos();
                [
                    Point2::new(-1.5 * s, c + 0.65 * c2 - 0.65),
                    Point2::new(-1.5 * c, -s - 1.3 * s2),
                    Point2::new(1.5 * s, -c - 2.6 * c2),
                ]
            }
            Shape::Peanut => {
                // r = 2 sqrt(g), g = sin^2/2 + cos^2/10 = 0.1 + 0.4 sin^2
                let g = 0.1 + 0.4 * s * s;
                let dg = 0.4 * (2.0 * t).sin();
                let ddg = 0.8 * (2.0 * t).cos();
                let sq = g.sqrt();
                let r = 2.0 * sq;
                let dr = dg / sq;
                let ddr = ddg / sq - dg * dg / (2.0 * g * sq);
                radial(r, dr, ddr, s, c)
            }
            Shape::Star => {
                let (s5, c5) = (5.0 * t).sin_cos();
                radial(0.5 + 0.075 * c5, -0.375 * s5, -1.875 * c5, s, c)
            }
        }
    }
}

fn radial(r: f64, dr: f64, ddr: f64, s: f64, c: f64) -> [Point2; 3] {
    let e = Point2::new(c, s);
    let e_perp = Point2::new(-s, c);
    [e * r, e * dr + e_perp * r, e * (ddr - r) + e_perp * (2.0 * dr)]
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disk" | "circle" => Ok(Shape::Disk),
            "kite" => Ok(Shape::Kite),
            "peanut" => Ok(Shape::Peanut),
            "star" => Ok(Shape::Star),
            other => Err(GeometryError::UnknownShape(other.to_string())),
        }
    }
}

/// Point, unit tangent, unit outward normal and speed `|x'(θ)|` at one
/// parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub point: Point2,
    pub tangent: Point2,
    pub normal: Point2,
    pub jacobian: f64,
}

/// A 2π-periodic closed curve `θ ↦ scale · shape(±θ) + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    shape: Shape,
    scale: f64,
    translation: Point2,
    reversed: bool,
    /// +1 when `(x₂', -x₁')` already points outward, -1 otherwise.
    orientation: f64,
}

impl ParametricCurve {
    pub fn new(shape: Shape, scale: f64, translation: Point2) -> Result<Self, GeometryError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeometryError::InvalidScale(scale));
        }
        let mut curve = ParametricCurve { shape, scale, translation, reversed: false, orientation: 1.0 };
        curve.fix_orientation();
        Ok(curve)
    }

    fn fix_orientation(&mut self) {
        self.orientation = if signed_area(self, ORIENTATION_SAMPLES) < 0.0 { -1.0 } else { 1.0 };
    }

    pub fn name(&self) -> &'static str {
        self.shape.name()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn translation(&self) -> Point2 {
        self.translation
    }

    /// Same point set traversed with `θ ↦ -θ`.
    pub fn reversed(&self) -> Self {
        let mut curve = ParametricCurve { reversed: !self.reversed, ..self.clone() };
        curve.fix_orientation();
        curve
    }

    pub fn translated(&self, by: Point2) -> Self {
        ParametricCurve { translation: self.translation + by, ..self.clone() }
    }

    fn derivatives(&self, theta: f64) -> [Point2; 3] {
        if self.reversed {
            let [x, dx, ddx] = self.shape.raw(-theta);
            [x * self.scale + self.translation, -dx * self.scale, ddx * self.scale]
        } else {
            let [x, dx, ddx] = self.shape.raw(theta);
            [x * self.scale + self.translation, dx * self.scale, ddx * self.scale]
        }
    }

    pub fn position(&self, theta: f64) -> Point2 {
        self.derivatives(theta)[0]
    }

    pub fn derivative(&self, theta: f64) -> Point2 {
        self.derivatives(theta)[1]
    }

    pub fn second_derivative(&self, theta: f64) -> Point2 {
        self.derivatives(theta)[2]
    }

    pub fn frame_at(&self, theta: f64) -> Result<BoundaryFrame, GeometryError> {
        let theta = theta.rem_euclid(TWO_PI);
        let [point, d, _] = self.derivatives(theta);
        let speed = d.norm();
        if speed < 1e-14 {
            return Err(GeometryError::Degenerate { theta, speed });
        }
        let tangent = d / speed;
        let normal = Point2::new(tangent.y, -tangent.x) * self.orientation;
        Ok(BoundaryFrame { point, tangent, normal, jacobian: speed })
    }

    /// Even-odd test against the polygon through `samples` boundary points.
    pub fn contains(&self, p: &Point2, samples: usize) -> bool {
        let pts: Vec<Point2> =
            (0..samples).map(|i| self.position(TWO_PI * i as f64 / samples as f64)).collect();
        let mut inside = false;
        let mut j = pts.len() - 1;
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Largest distance from the translation centre to the boundary.
    pub fn radius_estimate(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| (self.position(TWO_PI * i as f64 / samples as f64) - self.translation).norm())
            .fold(0.0, f64::max)
    }
}

/// Builds one of the reference shapes by name.
pub fn make_shape(name: &str, scale: f64, translation: Point2) -> Result<ParametricCurve, GeometryError> {
    ParametricCurve::new(name.parse()?, scale, translation)
}

/// Trapezoidal value of `½ ∮ (x₁ x₂' − x₂ x₁') dθ`; positive for
/// counter-clockwise traversal.
pub fn signed_area(curve: &ParametricCurve, samples: usize) -> f64 {
    let samples = samples.max(16);
    let h = TWO_PI / samples as f64;
    let sum: f64 = (0..samples)
        .map(|i| {
            let [x, d, _] = curve.derivatives(h * i as f64);
            x.x * d.y - x.y * d.x
        })
        .sum();
    0.5 * h * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn origin() -> Point2 {
        Point2::new(0.0, 0.0)
    }

    #[test]
    fn disk_frame_at_zero_and_pi() {
        let disk = make_shape("disk", 1.0, origin()).unwrap();
        let f = disk.frame_at(0.0).unwrap();
        assert_abs_diff_eq!(f.point, Point2::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(f.normal, Point2::new(1.0, 0.0), epsilon = 1e-15);
        let f = disk.frame_at(PI).unwrap();
        assert_abs_diff_eq!(f.normal, Point2::new(-1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn reference_points() {
        let kite = make_shape("kite", 1.0, origin()).unwrap();
        assert_abs_diff_eq!(kite.position(0.0), Point2::new(0.0, 1.0), epsilon = 1e-15);
        let peanut = make_shape("peanut", 1.0, origin()).unwrap();
        assert_abs_diff_eq!(peanut.position(PI / 2.0), Point2::new(0.0, 2.0f64.sqrt()), epsilon = 1e-15);
        let star = make_shape("star", 1.0, origin()).unwrap();
        assert_abs_diff_eq!(star.frame_at(0.0).unwrap().point, Point2::new(0.575, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn unknown_shape_and_bad_scale() {
        assert!(matches!(make_shape("blob", 1.0, origin()), Err(GeometryError::UnknownShape(_))));
        assert!(matches!(make_shape("disk", 0.0, origin()), Err(GeometryError::InvalidScale(_))));
    }

    #[test]
    fn areas() {
        let disk = make_shape("disk", 1.0, origin()).unwrap();
        assert_abs_diff_eq!(signed_area(&disk, 256), PI, epsilon = 1e-10);
        let big = make_shape("disk", 2.0, origin()).unwrap();
        assert_abs_diff_eq!(signed_area(&big, 256), 4.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(signed_area(&disk.reversed(), 256), -PI, epsilon = 1e-10);
    }

    #[test]
    fn reversed_curve_keeps_outward_normal() {
        let kite = make_shape("kite", 1.0, origin()).unwrap();
        let rev = kite.reversed();
        for i in 0..32 {
            let t = TWO_PI * i as f64 / 32.0;
            let a = kite.frame_at(t).unwrap();
            let b = rev.frame_at(-t).unwrap();
            assert_abs_diff_eq!(a.point, b.point, epsilon = 1e-14);
            assert_abs_diff_eq!(a.normal, b.normal, epsilon = 1e-14);
        }
    }

    #[test]
    fn point_in_curve() {
        let star = make_shape("star", 1.0, Point2::new(1.0, -0.5)).unwrap();
        assert!(star.contains(&Point2::new(1.0, -0.5), 1024));
        assert!(!star.contains(&Point2::new(1.7, -0.5), 1024));
        let kite = make_shape("kite", 1.0, origin()).unwrap();
        // the dent sits at (0, -1); the tip at (0, 1)
        assert!(kite.contains(&Point2::new(0.0, -0.5), 1024));
        assert!(!kite.contains(&Point2::new(0.0, 1.2), 1024));
    }
}
