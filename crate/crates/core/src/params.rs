//! Physical parameters of one scattering configuration and the `a+bi`
//! literal format used on the command line and in far-field files.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("wave number must be positive and finite, got {0}")]
    WaveNumber(f64),
    #[error("refractive index must satisfy Im n >= 0, got {0}")]
    RefractiveIndex(Complex64),
    #[error("boundary conductivity must satisfy Im eta >= 0, got {0}")]
    Conductivity(Complex64),
    #[error("second boundary coefficient lambda must be nonzero")]
    ZeroLambda,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("cannot parse complex literal `{0}` (expected a, a+bi, a-bi or bi)")]
    ComplexLiteral(String),
}

/// Wave number `k` and constant coefficients `(n, η, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub k: f64,
    pub n: Complex64,
    pub eta: Complex64,
    pub lambda: Complex64,
}

impl WaveParams {
    pub fn new(k: f64, n: Complex64, eta: Complex64, lambda: Complex64) -> Result<Self, ParamsError> {
        let params = WaveParams { k, n, eta, lambda };
        params.validate()?;
        Ok(params)
    }

    /// Configuration of the full-aperture reference examples:
    /// `n = 4 + i`, `η = 2 + i`, `λ = 2`.
    pub fn reference(k: f64) -> Self {
        WaveParams {
            k,
            n: Complex64::new(4.0, 1.0),
            eta: Complex64::new(2.0, 1.0),
            lambda: Complex64::new(2.0, 0.0),
        }
    }

    /// `n = 1`, `η = 0`, `λ = 1`: no scatterer at all.
    pub fn null_scatterer(k: f64) -> Self {
        WaveParams {
            k,
            n: Complex64::new(1.0, 0.0),
            eta: Complex64::new(0.0, 0.0),
            lambda: Complex64::new(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(ParamsError::WaveNumber(self.k));
        }
        if !(finite(self.n) && finite(self.eta) && finite(self.lambda)) {
            return Err(ParamsError::NonFinite);
        }
        if self.n.im < 0.0 {
            return Err(ParamsError::RefractiveIndex(self.n));
        }
        if self.eta.im < 0.0 {
            return Err(ParamsError::Conductivity(self.eta));
        }
        if self.lambda.norm() == 0.0 {
            return Err(ParamsError::ZeroLambda);
        }
        Ok(())
    }

    /// Principal square root of `n`; `Im √n >= 0` whenever `Im n >= 0`.
    pub fn sqrt_n(&self) -> Complex64 {
        // -0.0 would select the other branch
        Complex64::new(self.n.re, if self.n.im == 0.0 { 0.0 } else { self.n.im }).sqrt()
    }

    /// Interior wave number `k √n`.
    pub fn interior_wave_number(&self) -> Complex64 {
        self.k * self.sqrt_n()
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi` (no spaces). Exponents are allowed in
/// both parts, e.g. `4.0e0+1.0e0i`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParamsError> {
    let err = || ParamsError::ComplexLiteral(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let parse_imag = |t: &str| -> Result<f64, ParamsError> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| err()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| err())?;
            Ok(Complex64::new(re, parse_imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, parse_imag(body)?)),
    }
}

/// `re±imi` with 17 significant digits in each part.
pub fn format_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cli_literals() {
        assert_eq!(parse_complex("4+1i").unwrap(), Complex64::new(4.0, 1.0));
        assert_eq!(parse_complex("2-0.5i").unwrap(), Complex64::new(2.0, -0.5));
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("-3i").unwrap(), Complex64::new(0.0, -3.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("1e-3-2.5e+2i").unwrap(), Complex64::new(1e-3, -250.0));
        assert!(parse_complex("4 + 1i").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn format_round_trips_bitwise() {
        for z in [
            Complex64::new(0.1, -0.2),
            Complex64::new(std::f64::consts::PI, 1e-300),
            Complex64::new(-123456.789, 0.0),
        ] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn validation() {
        let ok = WaveParams::reference(2.0);
        assert!(ok.validate().is_ok());
        assert!(WaveParams { k: 0.0, ..ok }.validate().is_err());
        assert!(WaveParams { n: Complex64::new(4.0, -1.0), ..ok }.validate().is_err());
        assert!(WaveParams { eta: Complex64::new(1.0, -1e-3), ..ok }.validate().is_err());
        assert!(WaveParams { lambda: Complex64::new(0.0, 0.0), ..ok }.validate().is_err());
    }

    #[test]
    fn principal_root_has_nonnegative_imaginary_part() {
        for n in [Complex64::new(4.0, 1.0), Complex64::new(-2.0, -0.0), Complex64::new(-1.0, 3.0)] {
            let p = WaveParams { n, ..WaveParams::reference(1.0) };
            assert!(p.sqrt_n().im >= 0.0);
        }
    }
}
