use std::io::Cursor;

use dsm_core::disk::farfield_matrix_analytic;
use dsm_core::farfield::{
    read_farfield, spectral_norm, write_farfield, Backend, FarFieldMatrix, FormatError,
};
use dsm_core::params::{format_complex, parse_complex, WaveParams};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn reference(n: usize) -> FarFieldMatrix {
    farfield_matrix_analytic(&WaveParams::reference(2.0), n).unwrap()
}

fn to_text(f: &FarFieldMatrix) -> String {
    let mut buf = Vec::new();
    write_farfield(f, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn text_round_trip_is_bit_exact() {
    let mut f = reference(16).add_noise(0.1, 9).unwrap().restrict_aperture(2..12, 0..16).unwrap();
    f.meta_mut().config = Some(r#"{"command":"noise","seed":9}"#.into());
    let back = read_farfield(Cursor::new(to_text(&f))).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.meta().backend, Backend::Analytic);
}

#[test]
fn header_layout() {
    let text = to_text(&reference(4));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# dsm-farfield v1");
    assert!(lines.contains(&"backend = analytic"));
    assert!(lines.contains(&"delta = none"));
    let entries_at = lines.iter().position(|l| *l == "# entries").unwrap();
    assert_eq!(lines.len() - entries_at - 1, 4);
    assert_eq!(lines[entries_at + 1].split_whitespace().count(), 8);
}

#[test]
fn truncated_file_names_missing_section() {
    let text = to_text(&reference(8));
    let cut = text.find("# entries").unwrap();
    match read_farfield(Cursor::new(&text[..cut])) {
        Err(FormatError::MissingSection(s)) => assert!(s.contains("entries"), "{s}"),
        other => panic!("unexpected {other:?}"),
    }
    let lines: Vec<&str> = text.lines().collect();
    let short = lines[..lines.len() - 3].join("\n");
    match read_farfield(Cursor::new(short)) {
        Err(FormatError::Parse { message, .. }) => assert!(message.contains("truncated"), "{message}"),
        other => panic!("unexpected {other:?}"),
    }
    let no_sources: String = text.lines().filter(|l| !l.starts_with("sources")).map(|l| format!("{l}\n")).collect();
    match read_farfield(Cursor::new(no_sources)) {
        Err(FormatError::MissingSection(s)) => assert!(s.contains("sources")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn version_mismatch_is_explicit() {
    let text = to_text(&reference(4)).replacen("v1", "v2", 1);
    assert!(matches!(read_farfield(Cursor::new(text)), Err(FormatError::UnsupportedVersion(v)) if v == "v2"));
}

#[test]
fn bad_number_reports_line() {
    let text = to_text(&reference(4));
    let lines: Vec<&str> = text.lines().collect();
    let at = lines.iter().position(|l| l.starts_with("k =")).unwrap();
    let broken = text.replacen(lines[at], "k = two", 1);
    match read_farfield(Cursor::new(broken)) {
        Err(FormatError::Parse { line, .. }) => assert_eq!(line, at + 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invariant_violation_on_read() {
    let text = to_text(&reference(4)).replace("k = 2.0000000000000000e0", "k = -2.0000000000000000e0");
    assert!(matches!(read_farfield(Cursor::new(text)), Err(FormatError::Invariant(_))));
}

#[test]
fn noise_perturbation_has_unit_spectral_norm() {
    let f = reference(32);
    let delta = 0.1;
    let g = f.add_noise(delta, 2024).unwrap();
    let e = f.entries().zip_map(g.entries(), |a, b| (b / a - 1.0) / delta);
    assert!((spectral_norm(&e) - 1.0).abs() < 1e-10);
}

#[test]
fn noise_coarse_bound() {
    let f = reference(64);
    for delta in [0.05, 0.1, 0.2] {
        let g = f.add_noise(delta, 3).unwrap();
        let fmax = f.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(spectral_norm(&(g.entries() - f.entries())) <= delta * fmax * 64.0);
    }
}

#[test]
fn noise_and_restriction_do_not_commute() {
    let f = reference(16);
    let a = f.add_noise(0.1, 5).unwrap().restrict_aperture(0..8, 0..16).unwrap();
    let b = f.restrict_aperture(0..8, 0..16).unwrap().add_noise(0.1, 5).unwrap();
    assert_ne!(a.entries(), b.entries());
}

#[test]
fn typical_aperture_shapes() {
    let f = reference(64);
    assert_eq!(f.restrict_aperture(0..32, 0..64).unwrap().entries().shape(), (32, 64));
    assert_eq!(f.restrict_aperture(0..32, 15..64).unwrap().entries().shape(), (32, 49));
    assert_eq!(f.restrict_aperture(0..64, 0..64).unwrap(), {
        let mut g = f.clone();
        g.meta_mut().receiver_arc = Some((0.0, f.receiver_angles()[63]));
        g.meta_mut().source_arc = Some((0.0, f.source_angles()[63]));
        g
    });
}

#[test]
fn complex_literal_rejects_garbage() {
    for bad in ["4+", "1+2", "i4", "1..2i", "nan+"] {
        assert!(parse_complex(bad).is_err(), "{bad}");
    }
}

type RangePair = (std::ops::Range<usize>, std::ops::Range<usize>);

fn nested_range() -> impl Strategy<Value = RangePair> {
    (0usize..32)
        .prop_flat_map(|a| (Just(a), a + 1..=32))
        .prop_flat_map(|(a, b)| (Just(a..b), 0..b - a))
        .prop_flat_map(|(outer, c)| {
            let len = outer.len();
            (Just(outer), Just(c), c + 1..=len)
        })
        .prop_map(|(outer, c, d)| (outer, c..d))
}

proptest! {
    #[test]
    fn nested_restrictions_compose((outer_r, inner_r) in nested_range(), (outer_s, inner_s) in nested_range()) {
        let f = reference(32);
        let outer = f.restrict_aperture(outer_r.clone(), outer_s.clone()).unwrap();
        let nested = outer.restrict_aperture(inner_r.clone(), inner_s.clone()).unwrap();
        let compose = |o: &std::ops::Range<usize>, i: &std::ops::Range<usize>| o.start + i.start..o.start + i.end;
        let direct = f.restrict_aperture(compose(&outer_r, &inner_r), compose(&outer_s, &inner_s)).unwrap();
        prop_assert_eq!(nested, direct);
    }

    #[test]
    fn complex_format_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let z = Complex64::new(re, im);
        prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn arbitrary_entries_round_trip(vals in proptest::collection::vec(-1e3f64..1e3, 24)) {
        let entries = DMatrix::from_fn(3, 4, |i, j| Complex64::new(vals[2 * (4 * i + j)], vals[2 * (4 * i + j) + 1]));
        let f = reference(4).restrict_aperture(0..3, 0..4).unwrap().with_entries(entries).unwrap();
        let back = read_farfield(Cursor::new(to_text(&f))).unwrap();
        prop_assert_eq!(back, f);
    }
}
