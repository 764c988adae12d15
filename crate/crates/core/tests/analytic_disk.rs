//! Unit-disk series against frozen multiprecision references
//! (`tests/oracle/gen_reference.py`).

use std::f64::consts::PI;

use dsm_core::disk::{
    farfield_disk, farfield_matrix_analytic, farfield_matrix_analytic_with, mode_coefficient, ModeCoefficients,
    Truncation,
};
use dsm_core::farfield::Backend;
use dsm_core::params::WaveParams;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm()
}

#[test]
fn coefficients_match_oracle() {
    let p = WaveParams::reference(2.0);
    let a0 = mode_coefficient(0, &p).unwrap();
    let a3 = mode_coefficient(3, &p).unwrap();
    assert!(close(a0, c(-0.26839783041901558, 0.10928626527939287), 1e-12), "{a0}");
    assert!(close(a3, c(-0.14428414470280385, -0.046017103168637772), 1e-12), "{a3}");
}

#[test]
fn series_matches_oracle() {
    let u = farfield_disk(0.4, 0.4, &WaveParams::reference(2.0), Truncation::Fixed(60)).unwrap();
    assert!(close(u, c(-4.2757089350980238, 12.276070137443414), 1e-12), "{u}");
    let u = farfield_disk(2.25, 1.0, &WaveParams::reference(2.0 * PI), Truncation::Fixed(60)).unwrap();
    assert!(close(u, c(0.30036592416243302, 5.6247291039867563), 1e-11), "{u}");
    let auto = farfield_disk(2.25, 1.0, &WaveParams::reference(2.0 * PI), Truncation::Auto).unwrap();
    assert!(close(auto, u, 1e-13));
}

#[test]
fn null_scatterer_vanishes() {
    for k in [2.0, 2.0 * PI] {
        let f = farfield_matrix_analytic(&WaveParams::null_scatterer(k), 64).unwrap();
        assert!(f.entries().iter().all(|z| z.norm() <= 1e-14));
    }
}

#[test]
fn matrix_structure() {
    let f = farfield_matrix_analytic(&WaveParams::reference(4.0), 64).unwrap();
    let e = f.entries();
    assert_eq!(f.meta().backend, Backend::Analytic);
    assert!(f.meta().truncation.is_some());
    for i in 0..64 {
        for j in 0..64 {
            assert!((e[(i, j)] - e[(j, i)]).norm() <= 1e-12);
            assert!((e[(i, j)] - e[((i + 1) % 64, (j + 1) % 64)]).norm() <= 1e-12);
        }
    }
}

#[test]
fn doubling_truncation_is_invisible() {
    for k in [2.0, 4.0, 6.0, 2.0 * PI] {
        let p = WaveParams::reference(k);
        let f = farfield_matrix_analytic(&p, 64).unwrap();
        let big = farfield_matrix_analytic_with(&p, 64, Truncation::Fixed(2 * f.meta().truncation.unwrap())).unwrap();
        let diff = (f.entries() - big.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12, "k = {k}: {diff:e}");
    }
}

#[test]
fn auto_truncation_meets_tail_invariant() {
    for k in [0.5, 2.0, 6.0, 12.0] {
        let c = ModeCoefficients::compute(&WaveParams::reference(k), Truncation::Auto).unwrap();
        let a = c.coefficients();
        let max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(a.last().unwrap().norm() <= 1e-14 * max);
        assert!(c.truncation() >= ((k * std::f64::consts::E).ceil() as usize + 20).max(30));
    }
}

proptest! {
    #[test]
    fn depends_only_on_angle_difference(theta in 0.0f64..6.3, phi in 0.0f64..6.3, shift in -3.0f64..3.0) {
        let p = WaveParams::reference(3.0);
        let c = ModeCoefficients::compute(&p, Truncation::Auto).unwrap();
        let a = c.far_field(theta, phi);
        let b = c.far_field(theta + shift, phi + shift);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
