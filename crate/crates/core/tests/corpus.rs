mod common;

use std::collections::HashSet;

use hexpack::concat::{brute_density_check, ConcatenationSpec};
use hexpack::eisenstein::EisensteinInt;

#[test]
fn valid_specs_meet_their_guarantees() {
    let specs = common::corpus("valid");
    assert!(specs.len() >= 8);
    for path in specs {
        common::check_spec(&path).unwrap();
    }
}

#[test]
fn invalid_specs_are_refused() {
    let specs = common::corpus("invalid");
    assert!(!specs.is_empty());
    for path in specs {
        let spec = ConcatenationSpec::from_file(&path).unwrap();
        let violations = spec.validate().unwrap();
        assert!(!violations.is_empty(), "{}", path.display());
        assert!(spec.build().is_err());
    }
}

#[test]
fn corpus_densities_match_cell_volume() {
    for name in ["hex", "skew2", "rep4_q4", "rep3_q3"] {
        let path = common::corpus("valid")
            .into_iter()
            .find(|p| p.file_stem().unwrap() == name)
            .unwrap();
        let built = ConcatenationSpec::from_file(&path).unwrap().build().unwrap();
        let window = if built.n() <= 2 { 8 } else { 6 };
        let check = brute_density_check(&built.packing, window);
        assert!(check.relative_error.abs() < 0.15, "{name}: {check:?}");
    }
}

/// Points of `C + 2 Z[ω]^4` for the quaternary repetition code, built
/// directly from `F_4 = Z[ω]/(2)` without the library's construction.
#[test]
fn quaternary_repetition_by_hand() {
    let digits = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let mut points = Vec::new();
    for &(a0, b0) in &digits {
        let shifts = -2..=2;
        for x in shifts.clone().flat_map(|a| shifts.clone().map(move |b| (a, b))) {
            for y in shifts.clone().flat_map(|a| shifts.clone().map(move |b| (a, b))) {
                for z in shifts.clone().flat_map(|a| shifts.clone().map(move |b| (a, b))) {
                    for w in [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)] {
                        let coords = [x, y, z, w].map(|(a, b)| EisensteinInt::new(a0 + 2 * a, b0 + 2 * b));
                        points.push(coords);
                    }
                }
            }
        }
    }
    let mut best = i64::MAX;
    let origin = [EisensteinInt::ZERO; 4];
    for p in &points {
        if *p != origin {
            best = best.min(p.iter().map(|z| z.norm()).sum());
        }
    }
    assert_eq!(best, 4);
    let unique: HashSet<_> = points.iter().collect();
    assert_eq!(unique.len(), points.len());

    let path = common::corpus("valid")
        .into_iter()
        .find(|p| p.file_stem().unwrap() == "rep4_q4")
        .unwrap();
    let built = ConcatenationSpec::from_file(&path).unwrap().build().unwrap();
    let report = built.verify().unwrap();
    assert_eq!(report.d2_measured, best as i128);
    // 4 cosets of 2 Z[ω]^4, whose covolume is (4 √3/2)^4
    let det = (4.0 * 3f64.sqrt() / 2.0f64).powi(4) / 4.0;
    assert!((built.det_per_point() - det).abs() < 1e-9 * det);
}
