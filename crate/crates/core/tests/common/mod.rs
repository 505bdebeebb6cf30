#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hexpack::concat::ConcatenationSpec;
use hexpack::lattice::{augment, complexify, IntegerLattice, DEFAULT_ENUMERATION_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus(kind: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(kind);
    let mut specs: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    specs.sort();
    specs
}

/// Builds and exhaustively checks one valid spec.
pub fn check_spec(path: &Path) -> Result<String, String> {
    let name = path.file_stem().unwrap().to_string_lossy().into_owned();
    let spec = ConcatenationSpec::from_file(path).map_err(|e| format!("{name}: {e}"))?;
    let violations = spec.validate().map_err(|e| format!("{name}: {e}"))?;
    if !violations.is_empty() {
        return Err(format!("{name}: unexpected violations {violations:?}"));
    }
    let built = spec.build().map_err(|e| format!("{name}: {e}"))?;
    let report = built.verify().map_err(|e| format!("{name}: {e}"))?;
    let product: usize = report.code_sizes.iter().product();
    if report.d2_measured < report.d2_required {
        return Err(format!("{name}: d_E² {} < {}", report.d2_measured, report.d2_required));
    }
    if built.points_per_cell() != product || !report.distinct_cosets {
        return Err(format!(
            "{name}: {} cosets, distinct {}, expected {product}",
            built.points_per_cell(),
            report.distinct_cosets
        ));
    }
    if report.lambda_measured < report.lambda_lower - 1e-9 {
        return Err(format!(
            "{name}: λ {} < {}",
            report.lambda_measured, report.lambda_lower
        ));
    }
    Ok(format!(
        "{name}: n={} Q={} ℓ={} M={:?} d²={}≥{} λ={:.6}≥{:.6}",
        report.n,
        report.q,
        report.ell,
        report.code_sizes,
        report.d2_measured,
        report.d2_required,
        report.lambda_measured,
        report.lambda_lower
    ))
}

pub fn random_full_rank(rng: &mut ChaCha8Rng, n: usize) -> IntegerLattice {
    loop {
        let basis: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        if let Ok(l) = IntegerLattice::new(basis) {
            if l.is_full_rank() {
                return l;
            }
        }
    }
}

/// Rank `n-1` lattice inside the zero-sum hyperplane of `R^n`.
pub fn random_zero_sum(rng: &mut ChaCha8Rng, n: usize) -> IntegerLattice {
    loop {
        let basis: Vec<Vec<i64>> = (0..n - 1)
            .map(|_| {
                let mut row: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(-3..=3)).collect();
                row.push(-row.iter().sum::<i64>());
                row
            })
            .collect();
        if let Ok(l) = IntegerLattice::new(basis) {
            if l.gram_det_squared().is_ok_and(|d| d > 0) {
                return l;
            }
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Distance and determinant identities for `P + ωP` on one random base.
pub fn complexify_instance(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (seed % 3) as usize;
    let base = random_full_rank(&mut rng, n);
    let packing = complexify(&base).map_err(|e| e.to_string())?;
    let d_base = base.shortest_vector().map_err(|e| e.to_string())?.squared as f64;
    let d_cx = packing
        .min_distance_certified(DEFAULT_ENUMERATION_CAP)
        .map_err(|e| e.to_string())?
        .squared as f64;
    if rel(d_cx, d_base) > 1e-9 {
        return Err(format!("seed {seed}: d_E² {d_cx} vs {d_base} for {:?}", base.basis()));
    }
    let det_p = base.gram_det().map_err(|e| e.to_string())?;
    let expected = (3f64.sqrt() / 2.0).powi(n as i32) * det_p * det_p;
    let explicit = packing.exact_period_det().map_err(|e| e.to_string())?;
    if rel(explicit, expected) > 1e-9 || rel(packing.period_det(), expected) > 1e-9 {
        return Err(format!(
            "seed {seed}: det {explicit} / {} vs {expected}",
            packing.period_det()
        ));
    }
    Ok(())
}

/// `n · det²(augment(L, χ)) = χ² · det²(L)`, exactly.
pub fn augment_instance(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let n = 2 + (seed % 3) as usize;
    let lattice = random_zero_sum(&mut rng, n);
    let chi = loop {
        let c: i64 = rng.gen_range(-5..=5);
        if c != 0 {
            break c;
        }
    };
    let aug = augment(&lattice, chi).map_err(|e| e.to_string())?;
    let lhs = n as i128 * aug.gram_det_squared().map_err(|e| e.to_string())?;
    let rhs = (chi as i128).pow(2) * lattice.gram_det_squared().map_err(|e| e.to_string())?;
    if lhs != rhs {
        return Err(format!(
            "seed {seed}: {lhs} != {rhs} for χ={chi}, {:?}",
            lattice.basis()
        ));
    }
    Ok(())
}
