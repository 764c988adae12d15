use std::f64::consts::PI;

use dsm_core::disk::farfield_matrix_analytic;
use dsm_core::farfield::{spectral_norm, FarFieldMatrix};
use dsm_core::imaging::{
    decay_exponent, imaging_grid, imaging_value, phi_vector, ImagingError, ImagingGrid,
};
use dsm_core::params::WaveParams;
use dsm_core::special::Point2;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn disk_data(k: f64, n: usize) -> FarFieldMatrix {
    farfield_matrix_analytic(&WaveParams::reference(k), n).unwrap()
}

#[test]
fn phi_vector_properties() {
    let angles: Vec<f64> = (0..64).map(|i| 2.0 * PI * i as f64 / 64.0).collect();
    let phi = phi_vector(&Point2::new(0.3, -1.7), &angles, 2.0 * PI);
    assert!(phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    assert!((phi.norm_squared() - 64.0).abs() < 1e-12);
    let x = Point2::new(0.3, -1.7);
    let expected = Complex64::from_polar(1.0, -2.0 * PI * (angles[5].cos() * x.x + angles[5].sin() * x.y));
    assert!((phi[5] - expected).norm() < 1e-15);
}

#[test]
fn zero_data_gives_zero_and_refuses_normalization() {
    let f = disk_data(2.0, 16);
    let zero = f.with_entries(DMatrix::zeros(16, 16)).unwrap();
    let grid = ImagingGrid::square(1.0, 5).unwrap();
    let raw = imaging_grid(&zero, &grid, false).unwrap();
    assert!(raw.values.iter().all(|v| *v == 0.0));
    assert_eq!(imaging_grid(&zero, &grid, true), Err(ImagingError::DegenerateField));
}

#[test]
fn interior_point_beats_far_point() {
    let f = disk_data(2.0 * PI, 64);
    assert!(imaging_value(&f, &Point2::new(0.2, 0.1)) > imaging_value(&f, &Point2::new(2.8, -2.5)));
}

#[test]
fn normalized_grid_peaks_at_one() {
    let f = disk_data(2.0 * PI, 64);
    let r = imaging_grid(&f, &ImagingGrid::square(3.0, 41).unwrap(), true).unwrap();
    let max = r.values.iter().copied().fold(0.0, f64::max);
    assert_eq!(max, 1.0);
    assert!(r.values.iter().all(|v| *v >= 0.0));
    assert!((imaging_value(&f, &r.argmax) - r.max_value).abs() <= 1e-12 * r.max_value);
}

#[test]
fn global_scale_keeps_argmax() {
    let f = disk_data(2.0 * PI, 64).add_noise(0.1, 4).unwrap();
    let scaled = f.with_entries(f.entries() * Complex64::new(2.0 * PI / 64.0, 0.0)).unwrap();
    let grid = ImagingGrid::square(3.0, 61).unwrap();
    let a = imaging_grid(&f, &grid, true).unwrap();
    let b = imaging_grid(&scaled, &grid, true).unwrap();
    assert_eq!(a.argmax, b.argmax);
}

#[test]
fn hermitian_congruence_for_symmetric_data() {
    let f = disk_data(2.0 * PI, 64);
    let adj = f.with_entries(f.entries().adjoint()).unwrap();
    for z in [Point2::new(0.1, 0.4), Point2::new(-1.3, 2.2), Point2::new(2.0, 0.0)] {
        let (a, b) = (imaging_value(&f, &z), imaging_value(&adj, &z));
        assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn identity_data_has_flat_decay() {
    let f = FarFieldMatrix::identity(2.0 * PI, 64).unwrap();
    let s = decay_exponent(&f, &Point2::new(1.0, 0.0), 5.0, 20.0, 400).unwrap();
    assert!(s.abs() < 1e-10, "{s}");
}

#[test]
fn decay_argument_checks() {
    let f = disk_data(2.0, 16);
    let dir = Point2::new(0.0, 1.0);
    assert!(matches!(decay_exponent(&f, &dir, 5.0, 20.0, 15), Err(ImagingError::InsufficientSamples(_))));
    assert!(matches!(decay_exponent(&f, &dir, 5.0, 9.0, 100), Err(ImagingError::InvalidRange { .. })));
    // one wavelength at k = 0.2 exceeds the range
    let slow = farfield_matrix_analytic(&WaveParams::reference(0.2), 16).unwrap();
    assert!(matches!(decay_exponent(&slow, &dir, 5.0, 20.0, 100), Err(ImagingError::InsufficientSamples(_))));
}

#[test]
fn limited_aperture_decays() {
    let f = disk_data(2.0 * PI, 512).restrict_aperture(0..256, 0..512).unwrap();
    let s = decay_exponent(&f, &Point2::new(0.0, 1.0), 5.0, 20.0, 1500).unwrap();
    assert!((-3.0..=-0.75).contains(&s), "{s}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn global_phase_invariance(alpha in 0.0f64..6.3, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let f = disk_data(2.0, 32);
        let g = f.with_entries(f.entries() * Complex64::from_polar(1.0, alpha)).unwrap();
        let z = Point2::new(x, y);
        let (a, b) = (imaging_value(&f, &z), imaging_value(&g, &z));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn noise_stability_bound(seed in 0u64..1000, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let f = disk_data(2.0 * PI, 32);
        let g = f.add_noise(0.1, seed).unwrap();
        let z = Point2::new(x, y);
        let lhs = (imaging_value(&g, &z).sqrt() - imaging_value(&f, &z).sqrt()).abs();
        let rhs = 32.0 * spectral_norm(&(g.entries() - f.entries()));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
