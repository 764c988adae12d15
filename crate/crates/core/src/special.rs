//! Integer-order cylinder functions of complex argument and the 2D Helmholtz
//! kernels built on them.
//!
//! `J_p` uses the ascending series near the origin and Miller's backward
//! recurrence elsewhere, normalized with `e^{-iz} = J_0 + 2 Σ (-i)^m J_m`,
//! which stays well conditioned in the closed upper half plane.
//! `H_p^(1)` goes through the modified Bessel function `K_p(-iz)`: ascending
//! series for `|z| <= 2`, Steed/Temme continued fraction beyond, then forward
//! recurrence in the order (stable for the dominant solution).

use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;
use thiserror::Error;

/// Largest supported argument modulus.
pub const MAX_ARGUMENT: f64 = 200.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 2.0;
const RESCALE_THRESHOLD: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;
const CF2_MAX_ITER: usize = 20_000;

pub type Point2 = Vector2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("argument {0} outside the supported range |z| <= {MAX_ARGUMENT}")]
    OutOfRange(Complex64),
    #[error("argument {0} lies in the lower half plane (Im z < 0)")]
    LowerHalfPlane(Complex64),
    #[error("logarithmic singularity at z = 0")]
    Singular,
    #[error("non-finite argument {0}")]
    NonFinite(Complex64),
}

/// Which cylinder function a derivative is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderKind {
    J,
    H1,
}

fn check_argument(z: Complex64) -> Result<(), SpecialError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SpecialError::NonFinite(z));
    }
    if z.norm() > MAX_ARGUMENT {
        return Err(SpecialError::OutOfRange(z));
    }
    Ok(())
}

/// `J_p(z)` for integer `p >= 0`.
pub fn bessel_j(p: u32, z: Complex64) -> Result<Complex64, SpecialError> {
    check_argument(z)?;
    if z.norm() < SERIES_RADIUS {
        return Ok(j_series(p, z));
    }
    Ok(bessel_j_upto(p, z)?[p as usize])
}

/// `J_0(z), ..., J_pmax(z)` in one backward sweep.
pub fn bessel_j_upto(pmax: u32, z: Complex64) -> Result<Vec<Complex64>, SpecialError> {
    check_argument(z)?;
    if z.norm() < SERIES_RADIUS {
        return Ok((0..=pmax).map(|p| j_series(p, z)).collect());
    }
    // J_p(conj z) = conj J_p(z); the normalization below wants Im z >= 0.
    if z.im < 0.0 {
        let mut v = j_miller(pmax, z.conj());
        v.iter_mut().for_each(|c| *c = c.conj());
        return Ok(v);
    }
    let mut v = j_miller(pmax, z);
    if z.im == 0.0 {
        v.iter_mut().for_each(|c| c.im = 0.0);
    }
    Ok(v)
}

fn j_series(p: u32, z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return if p == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let half = z * 0.5;
    let mut lead = Complex64::new(1.0, 0.0);
    for j in 1..=p {
        lead *= half / j as f64;
    }
    let q = -half * half;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + p) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// Starting order for the backward recurrence: far enough that the
/// contamination by the dominant solution is below double precision at every
/// requested order.
fn miller_start(pmax: u32, a: f64) -> usize {
    // log of (e a / 2m)^m, the envelope of J_m / (Y_m)^{-1} growth
    let g = |m: f64| m * (std::f64::consts::E * a / (2.0 * m)).ln();
    let reference = g((pmax as f64).max(1.0)).min(0.0);
    let mut n = (pmax as f64).max(a).ceil() + 10.0;
    while 2.0 * (g(n) - reference) > -42.0 {
        n += 2.0;
    }
    let n = n as usize + 10;
    n + (n & 1)
}

fn j_miller(pmax: u32, z: Complex64) -> Vec<Complex64> {
    let pmax = pmax as usize;
    let start = miller_start(pmax as u32, z.norm());
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; pmax + 1];
    let mut next = zero;
    let mut cur = Complex64::new(1e-30, 0.0);
    let mut norm = zero;
    // (-i)^m cycles with period four
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let inv_z = z.inv();
    for m in (1..=start).rev() {
        norm += 2.0 * phase[m % 4] * cur;
        if m <= pmax {
            out[m] = cur;
        }
        let prev = 2.0 * m as f64 * inv_z * cur - next;
        next = cur;
        cur = prev;
        if cur.norm() > RESCALE_THRESHOLD {
            cur *= RESCALE_FACTOR;
            next *= RESCALE_FACTOR;
            norm *= RESCALE_FACTOR;
            for v in out.iter_mut().skip(m) {
                *v *= RESCALE_FACTOR;
            }
        }
    }
    norm += cur;
    out[0] = cur;
    let scale = (-Complex64::i() * z).exp() / norm;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// `(K_0(w), K_1(w))` for `Re w >= 0`, `w != 0`.
fn k01(w: Complex64) -> (Complex64, Complex64) {
    if w.norm() <= SERIES_RADIUS {
        k01_series(w)
    } else {
        k01_continued_fraction(w)
    }
}

fn k01_series(w: Complex64) -> (Complex64, Complex64) {
    let q = w * w * 0.25;
    let log_half = (w * 0.5).ln();
    // I_0, I_1 and the digamma-weighted companions
    let mut t0 = Complex64::new(1.0, 0.0); // q^k / (k!)^2
    let mut t1 = Complex64::new(1.0, 0.0); // q^k / (k! (k+1)!)
    let mut i0 = t0;
    let mut i1 = t1;
    let mut harmonic = 0.0;
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = t1 * (-2.0 * EULER_GAMMA + 1.0);
    for k in 1..100u32 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += t0;
        i1 += t1;
        s0 += t0 * harmonic;
        let psi_sum = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0);
        s1 += t1 * psi_sum;
        if t0.norm() < 1e-18 * i0.norm() && t1.norm() < 1e-18 * i1.norm() {
            break;
        }
    }
    let i1 = i1 * w * 0.5;
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = w.inv() + log_half * i1 - w * 0.25 * s1;
    (k0, k1)
}

fn k01_continued_fraction(w: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let a1 = 0.25;
    let mut b = 2.0 * (one + w);
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 1..CF2_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + a * d).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * w)).sqrt() * (-w).exp() / s;
    let k1 = k0 * (w + 0.5 - h) / w;
    (k0, k1)
}

/// `H_p^(1)(z)` for integer `p >= 0`, `Im z >= 0`, `z != 0`.
pub fn hankel1(p: u32, z: Complex64) -> Result<Complex64, SpecialError> {
    Ok(hankel1_upto(p, z)?[p as usize])
}

/// `H_0^(1)(z), ..., H_pmax^(1)(z)`.
pub fn hankel1_upto(pmax: u32, z: Complex64) -> Result<Vec<Complex64>, SpecialError> {
    check_argument(z)?;
    if z.norm() == 0.0 {
        return Err(SpecialError::Singular);
    }
    if z.im < 0.0 {
        return Err(SpecialError::LowerHalfPlane(z));
    }
    let w = -Complex64::i() * z;
    let (k0, k1) = k01(w);
    let mut ks = Vec::with_capacity(pmax as usize + 1);
    ks.push(k0);
    if pmax >= 1 {
        ks.push(k1);
    }
    let inv_w = w.inv();
    for m in 1..pmax as usize {
        let next = ks[m - 1] + 2.0 * m as f64 * inv_w * ks[m];
        ks.push(next);
    }
    // H_p(z) = (2 / pi) (-i)^{p+1} K_p(-iz)
    let mut factor = Complex64::new(0.0, -2.0 / PI);
    Ok(ks
        .into_iter()
        .map(|kp| {
            let h = factor * kp;
            factor *= -Complex64::i();
            h
        })
        .collect())
}

/// `Y_p(z) = (H_p^(1)(z) - J_p(z)) / i`.
pub fn bessel_y(p: u32, z: Complex64) -> Result<Complex64, SpecialError> {
    let h = hankel1(p, z)?;
    let j = bessel_j(p, z)?;
    Ok((h - j) * Complex64::new(0.0, -1.0))
}

/// `C_p'(z) = (C_{p-1}(z) - C_{p+1}(z)) / 2` with `C_{-1} = -C_1`.
pub fn cyl_derivative(kind: CylinderKind, p: u32, z: Complex64) -> Result<Complex64, SpecialError> {
    let values = match kind {
        CylinderKind::J => bessel_j_upto(p + 1, z)?,
        CylinderKind::H1 => hankel1_upto(p + 1, z)?,
    };
    Ok(derivative_from_sequence(&values, p as usize))
}

/// Derivative of order `p` from a precomputed sequence `C_0..C_{p+1}`.
pub fn derivative_from_sequence(values: &[Complex64], p: usize) -> Complex64 {
    if p == 0 {
        -values[1]
    } else {
        0.5 * (values[p - 1] - values[p + 1])
    }
}

/// Radiating fundamental solution `Φ_k(x, y) = (i/4) H_0^(1)(k|x - y|)`.
pub fn fundamental_solution(k: f64, x: &Point2, y: &Point2) -> Result<Complex64, SpecialError> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(SpecialError::Singular);
    }
    let h0 = hankel1(0, Complex64::new(k * r, 0.0))?;
    Ok(Complex64::new(0.0, 0.25) * h0)
}

/// Kernel of the adjoint double-layer operator: `∂_{ν(x)} Φ_τ(x, y)`.
pub fn normal_derivative_kernel(
    tau: Complex64,
    x: &Point2,
    normal_x: &Point2,
    y: &Point2,
) -> Result<Complex64, SpecialError> {
    let diff = x - y;
    let r = diff.norm();
    if r == 0.0 {
        return Err(SpecialError::Singular);
    }
    let h1 = hankel1(1, tau * r)?;
    Ok(Complex64::new(0.0, -0.25) * tau * h1 * (diff.dot(normal_x) / r))
}
