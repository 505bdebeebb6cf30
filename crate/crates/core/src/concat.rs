//! Code/lattice concatenation `C_0 + t C_1 + ... + t^{ℓ-1} C_{ℓ-1} + t^ℓ 𝒫`
//! over a prime ideal `(t)` of `Z[ω]`, with exhaustive verification.
//!
//! # Spec files
//!
//! A concatenation is described by a plain-text file; `#` starts a comment.
//!
//! ```text
//! prime 2
//! levels 1
//! basis
//! 1 0 0 0
//! 0 1 0 0
//! 0 0 1 0
//! 0 0 0 1
//! end
//! code repetition 4 4
//! ```
//!
//! There must be one `code` line per level, `C_0` first. A code line is one of
//! `code repetition n Q`, `code greedy n Q d` or `code file PATH`, where a
//! relative path is resolved against the spec file's directory and the file
//! uses the [`QaryCode::to_text`] format.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::coding::{greedy_gv_code, repetition_code, QaryCode};
use crate::eisenstein::{split_prime, EisensteinInt, PrimeIdealInfo, SQRT3_OVER_2};
use crate::lattice::{complexify, density_metrics, EmbeddedPacking, IntegerLattice, DEFAULT_ENUMERATION_CAP};
use crate::{Error, Result};

/// Default ceiling on `∏ M_i`.
pub const DEFAULT_COSET_CAP: u128 = 4096;

#[derive(Debug, Clone)]
pub struct ConcatenationSpec {
    pub info: PrimeIdealInfo,
    pub levels: usize,
    pub codes: Vec<QaryCode>,
    pub base: IntegerLattice,
}

/// A failed hypothesis of the concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Offending code, if the violation concerns one.
    pub code: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.code {
            Some(i) => write!(f, "C_{i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ConcatenationSpec {
    pub fn new(p: u64, levels: usize, codes: Vec<QaryCode>, base: IntegerLattice) -> Result<Self> {
        Ok(Self {
            info: split_prime(p)?,
            levels,
            codes,
            base,
        })
    }

    pub fn n(&self) -> usize {
        self.base.ambient_dim()
    }

    /// Every unmet hypothesis, with both sides of each failed inequality.
    pub fn validate(&self) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        let n = self.n();
        let q = self.info.q;
        if !self.base.is_full_rank() {
            out.push(Violation {
                code: None,
                message: format!("base lattice has rank {} < {n}", self.base.rank()),
            });
            return Ok(out);
        }
        if self.codes.len() != self.levels {
            out.push(Violation {
                code: None,
                message: format!("{} codes given for {} levels", self.codes.len(), self.levels),
            });
        }
        let base_d2 = self.base.shortest_vector()?.squared;
        for (i, c) in self.codes.iter().enumerate().take(self.levels) {
            let mut bad = |message: String| out.push(Violation { code: Some(i), message });
            if c.alphabet_size() != q {
                bad(format!("alphabet size {} != Q = {q}", c.alphabet_size()));
            }
            if c.length() != n {
                bad(format!("length {} != n = {n}", c.length()));
            }
            if !c.contains_zero() {
                bad("zero codeword missing".to_string());
            }
            let need = (q as i128)
                .checked_pow((self.levels - i) as u32)
                .and_then(|x| x.checked_mul(base_d2))
                .ok_or(Error::Overflow("distance requirement"))?;
            if let Some(d) = c.min_distance() {
                if (d as i128) < need {
                    bad(format!("d_H {d} < {need}"));
                }
            }
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<ConcatenatedPacking> {
        self.build_with_cap(DEFAULT_COSET_CAP)
    }

    pub fn build_with_cap(&self, cap: u128) -> Result<ConcatenatedPacking> {
        let violations = self.validate()?;
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidSpec(msgs.join("; ")));
        }
        let sizes: Vec<usize> = self.codes.iter().map(QaryCode::size).collect();
        let cells: u128 = sizes.iter().map(|&m| m as u128).product();
        if cells > cap {
            return Err(Error::CapExceeded {
                what: "coset count ∏M_i",
                size: cells,
                cap,
            });
        }
        let n = self.n();
        let t = self.info.t;
        let t_pows = (0..=self.levels)
            .map(|i| t.checked_pow(i as u32))
            .collect::<Result<Vec<_>>>()?;

        let base_packing = complexify(&self.base)?;
        let base_d2 = self.base.shortest_vector()?.squared;
        let base_metrics = density_metrics((base_d2 as f64).sqrt(), base_packing.period_det(), 2 * n as u32)?;
        let period = base_packing.scale_by(t_pows[self.levels])?;

        // Mixed-radix walk over codeword tuples, C_0 varying slowest.
        let mut reps = Vec::with_capacity(cells as usize);
        let mut idx = vec![0usize; self.levels];
        for _ in 0..cells {
            let mut v = vec![EisensteinInt::ZERO; n];
            for (i, c) in self.codes.iter().enumerate() {
                for (x, &s) in v.iter_mut().zip(&c.codewords()[idx[i]]) {
                    let term = self.info.rep(s as usize).checked_mul(t_pows[i])?;
                    *x = x.checked_add(term)?;
                }
            }
            reps.push(v);
            for i in (0..self.levels).rev() {
                idx[i] += 1;
                if idx[i] < sizes[i] {
                    break;
                }
                idx[i] = 0;
            }
        }

        let log2_cells: f64 = sizes.iter().map(|&m| (m as f64).log2()).sum();
        let packing = EmbeddedPacking::from_parts(period.generators().to_vec(), reps)?;
        Ok(ConcatenatedPacking {
            q: self.info.q,
            levels: self.levels,
            code_sizes: sizes,
            base_d2,
            base_exponent: base_metrics.exponent,
            lambda_lower: base_metrics.exponent + log2_cells / (2 * n) as f64,
            packing,
        })
    }

    /// Parses the spec format described in the module docs. Relative code
    /// paths resolve against `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let mut prime = None;
        let mut levels = None;
        let mut basis: Option<Vec<Vec<i64>>> = None;
        let mut codes = Vec::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
            tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
                .parse()
                .map_err(|_| Error::parse(line, format!("bad {what}")))
        }

        while let Some((ln, line)) = lines.next() {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("prime") => prime = Some(num::<u64>(ln, tok.next(), "prime")?),
                Some("levels") => levels = Some(num::<usize>(ln, tok.next(), "level count")?),
                Some("basis") => {
                    let mut rows = Vec::new();
                    loop {
                        let (rl, row) = lines
                            .next()
                            .ok_or_else(|| Error::parse(ln, "basis block without `end`"))?;
                        if row == "end" {
                            break;
                        }
                        let r = row
                            .split_whitespace()
                            .map(|t| t.parse().map_err(|_| Error::parse(rl, format!("bad entry {t:?}"))))
                            .collect::<Result<Vec<i64>>>()?;
                        rows.push(r);
                    }
                    basis = Some(rows);
                }
                Some("code") => {
                    let code = match tok.next() {
                        Some("repetition") => {
                            let n = num(ln, tok.next(), "length")?;
                            repetition_code(n, num(ln, tok.next(), "alphabet size")?)?
                        }
                        Some("greedy") => {
                            let n = num(ln, tok.next(), "length")?;
                            let q = num(ln, tok.next(), "alphabet size")?;
                            greedy_gv_code(n, q, num(ln, tok.next(), "distance")?)?
                        }
                        Some("file") => {
                            let rest = line.splitn(3, char::is_whitespace).nth(2).unwrap_or("").trim();
                            if rest.is_empty() {
                                return Err(Error::parse(ln, "missing code path"));
                            }
                            QaryCode::from_text(&std::fs::read_to_string(dir.join(rest))?)?
                        }
                        other => return Err(Error::parse(ln, format!("unknown code kind {other:?}"))),
                    };
                    codes.push(code);
                }
                Some(other) => return Err(Error::parse(ln, format!("unknown directive {other:?}"))),
                None => {}
            }
        }
        let prime = prime.ok_or_else(|| Error::parse(0, "missing `prime`"))?;
        let levels = levels.ok_or_else(|| Error::parse(0, "missing `levels`"))?;
        let basis = basis.ok_or_else(|| Error::parse(0, "missing `basis` block"))?;
        Self::new(prime, levels, codes, IntegerLattice::new(basis)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// A built concatenation: the packing itself plus its density accounting.
#[derive(Debug, Clone)]
pub struct ConcatenatedPacking {
    pub q: u64,
    pub levels: usize,
    pub code_sizes: Vec<usize>,
    /// `d_E²` of the base lattice, hence of its complexification.
    pub base_d2: i128,
    /// `λ` of the complexified base.
    pub base_exponent: f64,
    /// Guaranteed exponent `λ(𝒫) + (1/2n) Σ log₂ M_i`.
    pub lambda_lower: f64,
    pub packing: EmbeddedPacking,
}

/// Exhaustive measurements of a built packing.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructReport {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: u64,
    pub ell: usize,
    #[serde(rename = "M_list")]
    pub code_sizes: Vec<usize>,
    #[serde(rename = "d_E2_measured")]
    pub d2_measured: i128,
    /// `Q^ℓ d_E²(𝒫)`.
    #[serde(rename = "d_E2_required")]
    pub d2_required: i128,
    pub det_per_point: f64,
    pub lambda_lower: f64,
    pub lambda_measured: f64,
    pub distinct_cosets: bool,
}

impl ConcatenatedPacking {
    pub fn n(&self) -> usize {
        self.packing.complex_dim()
    }

    pub fn points_per_cell(&self) -> usize {
        self.packing.points_per_cell()
    }

    pub fn det_per_point(&self) -> f64 {
        self.packing.det_per_point()
    }

    pub fn required_d2(&self) -> i128 {
        (self.q as i128).pow(self.levels as u32) * self.base_d2
    }

    /// Whether the coset representatives are pairwise incongruent modulo the
    /// period lattice, i.e. the cell really holds `∏ M_i` points.
    pub fn cosets_distinct(&self) -> bool {
        let ech = Echelon::new(&self.packing);
        let mut seen = std::collections::HashSet::new();
        self.packing
            .coset_reps()
            .iter()
            .all(|r| seen.insert(ech.reduce(&ech.columns(r))))
    }

    /// Certified exhaustive `d_E²` and the exponent it implies.
    pub fn verify(&self) -> Result<ConstructReport> {
        let d = self.packing.min_distance_certified(DEFAULT_ENUMERATION_CAP)?;
        let metrics = density_metrics(d.length(), self.det_per_point(), 2 * self.n() as u32)?;
        Ok(ConstructReport {
            n: self.n(),
            q: self.q,
            ell: self.levels,
            code_sizes: self.code_sizes.clone(),
            d2_measured: d.squared,
            d2_required: self.required_d2(),
            det_per_point: self.det_per_point(),
            lambda_lower: self.lambda_lower,
            lambda_measured: metrics.exponent,
            distinct_cosets: self.cosets_distinct(),
        })
    }
}

/// Outcome of counting packing points in a box.
#[derive(Debug, Clone, Serialize)]
pub struct DensityCheck {
    pub window: u32,
    pub count: u64,
    pub volume: f64,
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Counts points of `packing` in the closed box `[-window, window]^{2n}`
/// and compares points per unit volume with `1 / det_per_point`.
pub fn brute_density_check(packing: &EmbeddedPacking, window: u32) -> DensityCheck {
    let ech = Echelon::new(packing);
    let n = packing.complex_dim();
    let w = window as i64;
    let mut count = 0u64;
    for rep in packing.coset_reps() {
        let mut partial = ech.columns(rep);
        count += ech.count(0, &mut partial, w);
    }
    let volume = (2.0 * window as f64).powi(2 * n as i32);
    let measured = count as f64 / volume;
    let expected = 1.0 / packing.det_per_point();
    DensityCheck {
        window,
        count,
        volume,
        measured,
        expected,
        relative_error: (measured - expected) / expected,
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -(-a).div_euclid(b)
}

/// Row echelon basis of a period lattice in `Z^{2n}`, with columns ordered
/// `b_0, a_0, b_1, a_1, ...` for coordinates `a_i + b_i ω`. Row `k` has its
/// positive pivot in column `k` and zeros before it, so fixing coefficients
/// in order fixes coordinates in order.
struct Echelon {
    rows: Vec<Vec<i128>>,
}

impl Echelon {
    fn new(packing: &EmbeddedPacking) -> Self {
        let mut rows: Vec<Vec<i128>> = packing.generators().iter().map(|g| Self::columns_of(g)).collect();
        let m = rows.len();
        for k in 0..m {
            loop {
                let live: Vec<usize> = (k..m).filter(|&i| rows[i][k] != 0).collect();
                let &piv = live
                    .iter()
                    .min_by_key(|&&i| rows[i][k].abs())
                    .expect("period generators are independent");
                rows.swap(k, piv);
                if live.len() == 1 {
                    break;
                }
                for i in k + 1..m {
                    let f = rows[i][k].div_euclid(rows[k][k]);
                    if f != 0 {
                        let pivot_row = rows[k].clone();
                        for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                            *x -= f * y;
                        }
                    }
                }
            }
            if rows[k][k] < 0 {
                rows[k].iter_mut().for_each(|x| *x = -*x);
            }
        }
        Self { rows }
    }

    fn columns_of(v: &[EisensteinInt]) -> Vec<i128> {
        v.iter().flat_map(|x| [x.b as i128, x.a as i128]).collect()
    }

    fn columns(&self, v: &[EisensteinInt]) -> Vec<i128> {
        Self::columns_of(v)
    }

    /// Canonical representative of `v` modulo the lattice.
    fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut r = v.to_vec();
        for (k, row) in self.rows.iter().enumerate() {
            let f = r[k].div_euclid(row[k]);
            for (x, y) in r.iter_mut().zip(row) {
                *x -= f * y;
            }
        }
        r
    }

    /// Inclusive integer range allowed for column `k`, given the already
    /// fixed `b` partner when `k` is an `a` column.
    fn column_range(k: usize, fixed: &[i128], w: i64) -> (i128, i128) {
        let w = w as i128;
        if k.is_multiple_of(2) {
            // |(√3/2) b| <= w
            let lim = (w as f64 / SQRT3_OVER_2).floor() as i128;
            (-lim, lim)
        } else {
            // |2a - b| <= 2w
            let b = fixed[k - 1];
            (ceil_div(b - 2 * w, 2), (b + 2 * w).div_euclid(2))
        }
    }

    /// Number of points `partial + Σ_{j>=k} c_j row_j` in the box; `partial`
    /// starts as the coset offset and carries the coefficients fixed so far.
    fn count(&self, k: usize, partial: &mut [i128], w: i64) -> u64 {
        let (lo, hi) = Self::column_range(k, partial, w);
        let h = self.rows[k][k];
        let s = partial[k];
        // lo <= s + c h <= hi
        let c_lo = ceil_div(lo - s, h);
        let c_hi = (hi - s).div_euclid(h);
        if c_lo > c_hi {
            return 0;
        }
        if k + 1 == self.rows.len() {
            return (c_hi - c_lo + 1) as u64;
        }
        let row = &self.rows[k];
        let mut total = 0;
        for c in c_lo..=c_hi {
            for j in k..partial.len() {
                partial[j] += c * row[j];
            }
            total += self.count(k + 1, partial, w);
            for j in k..partial.len() {
                partial[j] -= c * row[j];
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::QaryCode;

    fn standard(n: usize) -> IntegerLattice {
        IntegerLattice::standard(n).unwrap()
    }

    #[test]
    fn empty_concatenation_is_the_base() {
        let base = IntegerLattice::new(vec![vec![1, -1], vec![0, 2]]).unwrap();
        let spec = ConcatenationSpec::new(2, 0, vec![], base.clone()).unwrap();
        assert!(spec.validate().unwrap().is_empty());
        let built = spec.build().unwrap();
        let cp = complexify(&base).unwrap();
        assert_eq!(built.packing.generators(), cp.generators());
        assert_eq!(built.points_per_cell(), 1);
        assert!((built.det_per_point() - cp.period_det()).abs() < 1e-12);
        assert_eq!(built.lambda_lower, built.base_exponent);
        let report = built.verify().unwrap();
        assert_eq!(report.d2_measured, 2);
        assert!((report.lambda_measured - built.lambda_lower).abs() < 1e-12);
    }

    #[test]
    fn quaternary_repetition_level() {
        let spec = ConcatenationSpec::new(2, 1, vec![repetition_code(4, 4).unwrap()], standard(4)).unwrap();
        assert!(spec.validate().unwrap().is_empty());
        let built = spec.build().unwrap();
        assert_eq!(built.points_per_cell(), 4);
        // det(2·𝒫) = 4^4 (√3/2)^4
        let det = 256.0 * SQRT3_OVER_2.powi(4);
        assert!((built.packing.period_det() - det).abs() < 1e-9);
        assert!((built.det_per_point() - det / 4.0).abs() < 1e-9);
        let report = built.verify().unwrap();
        assert_eq!(report.d2_measured, 4);
        assert!(report.distinct_cosets);
        assert!(report.lambda_measured >= report.lambda_lower - 1e-9);
    }

    #[test]
    fn ternary_repetition_level() {
        let spec = ConcatenationSpec::new(3, 1, vec![repetition_code(3, 3).unwrap()], standard(3)).unwrap();
        assert_eq!(spec.info.t, EisensteinInt::new(1, -1));
        let report = spec.build().unwrap().verify().unwrap();
        assert!(report.d2_measured >= 3);
        assert_eq!(report.code_sizes, vec![3]);
    }

    #[test]
    fn violations_are_reported() {
        let weak = QaryCode::new(4, vec![vec![0, 0, 0, 0], vec![1, 1, 1, 0]]).unwrap();
        let spec = ConcatenationSpec::new(2, 1, vec![weak], standard(4)).unwrap();
        let v = spec.validate().unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "C_0: d_H 3 < 4");
        assert!(matches!(spec.build(), Err(Error::InvalidSpec(_))));

        let shifted = QaryCode::new(4, vec![vec![1, 1, 1, 1], vec![2, 2, 2, 2]]).unwrap();
        let spec = ConcatenationSpec::new(2, 1, vec![shifted], standard(4)).unwrap();
        assert!(spec.validate().unwrap()[0].message.contains("zero codeword"));

        let spec = ConcatenationSpec::new(2, 1, vec![], standard(4)).unwrap();
        assert_eq!(spec.validate().unwrap().len(), 1);

        let spec = ConcatenationSpec::new(3, 1, vec![repetition_code(4, 4).unwrap()], standard(4)).unwrap();
        assert!(spec.validate().unwrap()[0].message.contains("alphabet size"));
    }

    #[test]
    fn coset_cap() {
        let spec = ConcatenationSpec::new(2, 1, vec![repetition_code(4, 4).unwrap()], standard(4)).unwrap();
        assert!(matches!(spec.build_with_cap(3), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn density_counts() {
        let z1 = complexify(&standard(1)).unwrap();
        let hex = brute_density_check(&z1, 10);
        assert!((hex.expected - 1.0 / SQRT3_OVER_2).abs() < 1e-12);
        assert!(hex.relative_error.abs() < 0.1, "{hex:?}");

        // Points of Z[ω] with (a - b/2, (√3/2) b) in [-1, 1]^2: b = 0 gives
        // a ∈ {-1, 0, 1}; b = ±1 gives a - b/2 = ±1/2 twice each.
        assert_eq!(brute_density_check(&z1, 1).count, 7);

        let z2 = crate::lattice::EmbeddedPacking::from_parts(
            vec![vec![EisensteinInt::ONE], vec![EisensteinInt::OMEGA]],
            vec![vec![EisensteinInt::ZERO]],
        )
        .unwrap();
        assert_eq!(brute_density_check(&z2, 10).count, brute_density_check(&z1, 10).count);

        let spec = ConcatenationSpec::new(2, 1, vec![repetition_code(4, 4).unwrap()], standard(4)).unwrap();
        let built = spec.build().unwrap();
        let check = brute_density_check(&built.packing, 6);
        assert!(check.relative_error.abs() < 0.15, "{check:?}");
    }

    #[test]
    fn spec_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let code = greedy_gv_code(4, 3, 3).unwrap();
        std::fs::write(dir.path().join("tetra.code"), code.to_text()).unwrap();
        let text =
            "# ternary\nprime 3\nlevels 1\nbasis\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nend\ncode file tetra.code\n";
        std::fs::write(dir.path().join("spec.txt"), text).unwrap();
        let spec = ConcatenationSpec::from_file(&dir.path().join("spec.txt")).unwrap();
        assert_eq!(spec.codes[0], code);
        assert_eq!(spec.levels, 1);
        assert!(spec.validate().unwrap().is_empty());

        assert!(ConcatenationSpec::parse("prime 2\nlevels 0\nbasis\n1\n", Path::new(".")).is_err());
        assert!(ConcatenationSpec::parse("prime 4\nlevels 0\nbasis\n1\nend\n", Path::new(".")).is_err());
        assert!(ConcatenationSpec::parse("bogus\n", Path::new(".")).is_err());
    }
}
