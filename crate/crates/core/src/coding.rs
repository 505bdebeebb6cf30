//! `Q`-ary codes over residue alphabets and the Gilbert–Varshamov machinery.
//!
//! Codewords are stored as index vectors into a residue alphabet so a code
//! can be bound to any prime ideal of the matching norm.

use std::fmt::Write as _;

use crate::{Error, Result};

/// Upper limit on `Q^n` for exhaustive greedy construction.
pub const GREEDY_SPACE_LIMIT: u64 = 1 << 20;

fn check_alphabet(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::invalid(format!("alphabet size must be >= 2, got {q}")));
    }
    Ok(())
}

fn check_unit(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("relative distance {rho} outside [0, 1]")));
    }
    Ok(())
}

/// `Q`-ary entropy `H_Q(ρ) = ρ log_Q(Q-1) - ρ log_Q ρ - (1-ρ) log_Q(1-ρ)`,
/// extended continuously to `ρ ∈ {0, 1}`.
pub fn entropy(q: u64, rho: f64) -> Result<f64> {
    check_alphabet(q)?;
    check_unit(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    Ok(entropy_from_log2(q, rho.log2()))
}

/// `H_Q(2^x)` for `x <= 0`. Taking the exponent rather than `ρ` keeps full
/// relative precision when `ρ` is far below the smallest normal double.
pub fn entropy_from_log2(q: u64, log2_rho: f64) -> f64 {
    debug_assert!(log2_rho <= 0.0);
    let rho = log2_rho.exp2();
    if rho == 0.0 {
        return 0.0;
    }
    let qf = q as f64;
    let log2_q = qf.log2();
    let head = rho * ((qf - 1.0).log2() - log2_rho) / log2_q;
    let tail = if rho < 1.0 {
        (1.0 - rho) * (-rho).ln_1p() / qf.ln()
    } else {
        0.0
    };
    head - tail
}

/// `H_Q` clipped to 1 on `[(Q-1)/Q, 1]`.
pub fn clipped_entropy(q: u64, rho: f64) -> Result<f64> {
    check_alphabet(q)?;
    check_unit(rho)?;
    if rho >= (q - 1) as f64 / q as f64 {
        Ok(1.0)
    } else {
        entropy(q, rho)
    }
}

/// Asymptotic Gilbert–Varshamov rate `1 - H_Q(ρ)` on `0 < ρ < (Q-1)/Q`.
pub fn gv_rate(q: u64, rho: f64) -> Result<f64> {
    check_alphabet(q)?;
    let edge = (q - 1) as f64 / q as f64;
    if !(rho > 0.0 && rho < edge) {
        return Err(Error::invalid(format!(
            "GV bound needs 0 < ρ < (Q-1)/Q = {edge}, got {rho}"
        )));
    }
    Ok(1.0 - entropy(q, rho)?)
}

/// Finite GV guarantee `Q^n / Σ_{j<d} C(n,j)(Q-1)^j` on the size of a
/// maximal code with minimum distance `d`.
pub fn gv_volume_bound(n: usize, q: u64, d: usize) -> f64 {
    let qf = q as f64;
    let mut binom = 1.0;
    let mut ball = 0.0;
    for j in 0..d.min(n + 1) {
        if j > 0 {
            binom *= (n + 1 - j) as f64 / j as f64;
        }
        ball += binom * (qf - 1.0).powi(j as i32);
    }
    qf.powi(n as i32) / ball
}

pub fn hamming_distance(u: &[u32], v: &[u32]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

/// A code over the alphabet `{0, ..., Q-1}` of residue indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaryCode {
    length: usize,
    alphabet_size: u64,
    codewords: Vec<Vec<u32>>,
    min_distance: Option<usize>,
}

impl QaryCode {
    /// Validates the words and computes the minimum distance exhaustively.
    pub fn new(alphabet_size: u64, codewords: Vec<Vec<u32>>) -> Result<Self> {
        check_alphabet(alphabet_size)?;
        let length = codewords
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("a code needs at least one codeword"))?;
        if length == 0 {
            return Err(Error::invalid("codewords must be nonempty"));
        }
        for (i, w) in codewords.iter().enumerate() {
            if w.len() != length {
                return Err(Error::invalid(format!(
                    "codeword {i} has length {}, expected {length}",
                    w.len()
                )));
            }
            if let Some(&s) = w.iter().find(|&&s| s as u64 >= alphabet_size) {
                return Err(Error::invalid(format!(
                    "codeword {i} has symbol {s} >= {alphabet_size}"
                )));
            }
        }
        let min_distance = pairwise_min_distance(&codewords);
        if min_distance == Some(0) {
            return Err(Error::invalid("codewords must be distinct"));
        }
        Ok(Self {
            length,
            alphabet_size,
            codewords,
            min_distance,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    pub fn codewords(&self) -> &[Vec<u32>] {
        &self.codewords
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    /// Minimum Hamming distance; `None` for a single-word code.
    pub fn min_distance(&self) -> Option<usize> {
        self.min_distance
    }

    pub fn contains_zero(&self) -> bool {
        self.codewords.iter().any(|w| w.iter().all(|&s| s == 0))
    }

    pub fn relative_distance(&self) -> Option<f64> {
        self.min_distance.map(|d| d as f64 / self.length as f64)
    }

    pub fn rate(&self) -> f64 {
        (self.size() as f64).ln() / (self.alphabet_size as f64).ln() / self.length as f64
    }

    /// Plain-text form: a header `n Q M d` and one line of space-separated
    /// indices per codeword. `d` is written as 0 for a single-word code.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.length,
            self.alphabet_size,
            self.size(),
            self.min_distance.unwrap_or(0)
        );
        for w in &self.codewords {
            let line: Vec<String> = w.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let h: Vec<u64> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse(hline, format!("bad header field {t:?}")))
            })
            .collect::<Result<_>>()?;
        let [n, q, m, d] = h[..] else {
            return Err(Error::parse(hline, "header must be `n Q M d`"));
        };
        let mut words = Vec::with_capacity(m as usize);
        for (ln, l) in lines {
            let w: Vec<u32> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad symbol {t:?}"))))
                .collect::<Result<_>>()?;
            if w.len() as u64 != n {
                return Err(Error::parse(ln, format!("expected {n} symbols, found {}", w.len())));
            }
            words.push(w);
        }
        if words.len() as u64 != m {
            return Err(Error::parse(
                hline,
                format!("header promises {m} codewords, found {}", words.len()),
            ));
        }
        let code = Self::new(q, words)?;
        let stored = code.min_distance.unwrap_or(0) as u64;
        if stored != d {
            return Err(Error::parse(
                hline,
                format!("header distance {d} but codewords have {stored}"),
            ));
        }
        Ok(code)
    }
}

#[cfg(feature = "parallel")]
fn pairwise_min_distance(words: &[Vec<u32>]) -> Option<usize> {
    use rayon::prelude::*;
    (0..words.len())
        .into_par_iter()
        .filter_map(|i| words[..i].iter().map(|w| hamming_distance(w, &words[i])).min())
        .min()
}

#[cfg(not(feature = "parallel"))]
fn pairwise_min_distance(words: &[Vec<u32>]) -> Option<usize> {
    (0..words.len())
        .filter_map(|i| words[..i].iter().map(|w| hamming_distance(w, &words[i])).min())
        .min()
}

/// The code `{ j·(1, ..., 1) : 0 <= j < Q }`.
pub fn repetition_code(n: usize, q: u64) -> Result<QaryCode> {
    if n == 0 {
        return Err(Error::invalid("repetition code needs n >= 1"));
    }
    check_alphabet(q)?;
    QaryCode::new(q, (0..q as u32).map(|j| vec![j; n]).collect())
}

/// Lexicographic greedy code: scan `{0..Q}^n` in lexicographic order starting
/// from the zero word and keep every word at distance `>= d` from all kept
/// words. The result is maximal, hence meets the finite GV bound.
pub fn greedy_gv_code(n: usize, q: u64, d: usize) -> Result<QaryCode> {
    check_alphabet(q)?;
    if d == 0 || d > n {
        return Err(Error::invalid(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    let space = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if space > GREEDY_SPACE_LIMIT as u128 {
        return Err(Error::CapExceeded {
            what: "greedy search space Q^n",
            size: space,
            cap: GREEDY_SPACE_LIMIT as u128,
        });
    }
    let mut kept: Vec<Vec<u32>> = Vec::new();
    let mut word = vec![0u32; n];
    for _ in 0..space {
        if kept.iter().all(|w| hamming_distance(w, &word) >= d) {
            kept.push(word.clone());
        }
        for s in word.iter_mut().rev() {
            *s += 1;
            if (*s as u64) < q {
                break;
            }
            *s = 0;
        }
    }
    QaryCode::new(q, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook form of the entropy, evaluated term by term.
    fn entropy_direct(q: f64, r: f64) -> f64 {
        r * (q - 1.0).log(q) - r * r.log(q) - (1.0 - r) * (1.0 - r).log(q)
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(2, 0.5).unwrap() - 1.0).abs() < 1e-15);
        for q in [3u64, 4, 9] {
            let qf = q as f64;
            assert!((entropy(q, (qf - 1.0) / qf).unwrap() - 1.0).abs() < 1e-15, "q={q}");
        }
        let h = entropy(4, 0.25).unwrap();
        assert!((h - entropy_direct(4.0, 0.25)).abs() < 1e-12);
        assert!((gv_rate(4, 0.25).unwrap() - (1.0 - h)).abs() < 1e-15);
        assert_eq!(entropy(4, 0.0).unwrap(), 0.0);
        assert!((entropy(4, 1.0).unwrap() - 3f64.log(4.0)).abs() < 1e-15);
        assert_eq!(entropy(2, 1.0).unwrap(), 0.0);
        assert!(entropy(4, -0.1).is_err());
        assert!(entropy(4, 1.1).is_err());
        assert!(entropy(1, 0.5).is_err());
    }

    #[test]
    fn entropy_from_log_handles_subnormal_arguments() {
        assert_eq!(entropy_from_log2(4, -2000.0), 0.0);
        let tiny = entropy_from_log2(4, -1000.0);
        // ρ log_Q((Q-1)/ρ) + ρ log_Q e to first order in ρ
        let rho = (-1000f64).exp2();
        let expect = rho * (3f64.log2() + 1000.0) / 2.0 + rho / 4f64.ln();
        assert!((tiny - expect).abs() <= 1e-14 * expect);
    }

    #[test]
    fn clipped_entropy_examples() {
        assert_eq!(clipped_entropy(4, 1.0).unwrap(), 1.0);
        assert_eq!(clipped_entropy(4, 0.75).unwrap(), 1.0);
        assert_eq!(clipped_entropy(4, 1.0 / 16.0).unwrap(), entropy(4, 1.0 / 16.0).unwrap());
    }

    #[test]
    fn gv_rate_examples() {
        assert!((gv_rate(4, 1e-15).unwrap() - 1.0).abs() < 1e-13);
        assert!(gv_rate(4, 0.75 - 1e-9).unwrap().abs() < 1e-12);
        let r = gv_rate(4, 0.3049).unwrap();
        assert!((r - (1.0 - entropy_direct(4.0, 0.3049))).abs() < 1e-12);
        assert!(gv_rate(4, 0.0).is_err());
        assert!(gv_rate(4, 0.75).is_err());
    }

    #[test]
    fn entropy_is_unimodal() {
        for q in [2u64, 3, 4, 25] {
            let peak = (q - 1) as f64 / q as f64;
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            for w in grid.windows(2) {
                let (h0, h1) = (entropy(q, w[0]).unwrap(), entropy(q, w[1]).unwrap());
                if w[1] <= peak {
                    assert!(h1 > h0, "q={q} increasing at {}", w[0]);
                } else if w[0] >= peak {
                    assert!(h1 < h0, "q={q} decreasing at {}", w[0]);
                }
            }
            for &r in &grid[1..1000] {
                let (h, c) = (entropy(q, r).unwrap(), clipped_entropy(q, r).unwrap());
                assert!(c >= h);
                assert_eq!(c == h, r < peak || (r - peak).abs() < 1e-15, "q={q} r={r}");
            }
        }
    }

    #[test]
    fn repetition_codes() {
        let c = repetition_code(3, 2).unwrap();
        assert_eq!(c.codewords(), &[vec![0, 0, 0], vec![1, 1, 1]]);
        assert_eq!(c.min_distance(), Some(3));
        let c = repetition_code(4, 4).unwrap();
        assert_eq!((c.size(), c.min_distance()), (4, Some(4)));
        assert!(c.contains_zero());
        let c = repetition_code(1, 5).unwrap();
        assert_eq!((c.size(), c.min_distance()), (5, Some(1)));
    }

    #[test]
    fn greedy_codes() {
        let c = greedy_gv_code(3, 2, 3).unwrap();
        assert_eq!(c.codewords(), &[vec![0, 0, 0], vec![1, 1, 1]]);
        assert!(gv_volume_bound(3, 2, 3) > 1.0);

        let full = greedy_gv_code(3, 3, 1).unwrap();
        assert_eq!(full.size(), 27);

        let c = greedy_gv_code(4, 4, 4).unwrap();
        assert!(c.size() >= 4);
        assert!(c.min_distance().unwrap() >= 4);
        assert!(c.contains_zero());

        for (n, q, d) in [(5, 2, 3), (4, 3, 2), (6, 2, 4), (3, 4, 2), (5, 3, 3)] {
            let c = greedy_gv_code(n, q, d).unwrap();
            assert!(c.size() as f64 >= gv_volume_bound(n, q, d).floor(), "({n},{q},{d})");
            assert!(c.min_distance().unwrap_or(n) >= d);
            assert!(c.contains_zero());
        }
        assert!(greedy_gv_code(3, 2, 0).is_err());
        assert!(greedy_gv_code(3, 2, 4).is_err());
        assert!(matches!(greedy_gv_code(30, 4, 3), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn code_validation() {
        assert!(QaryCode::new(2, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(QaryCode::new(2, vec![vec![0, 2]]).is_err());
        assert!(QaryCode::new(2, vec![vec![0, 1], vec![0]]).is_err());
        let single = QaryCode::new(3, vec![vec![0, 0]]).unwrap();
        assert_eq!(single.min_distance(), None);
    }

    #[test]
    fn text_format() {
        let c = greedy_gv_code(4, 3, 3).unwrap();
        let text = c.to_text();
        assert!(text.starts_with(&format!("4 3 {} 3\n", c.size())));
        assert_eq!(QaryCode::from_text(&text).unwrap(), c);

        assert!(QaryCode::from_text("3 2 2 2\n0 0 0\n1 1 1\n").is_err());
        assert!(QaryCode::from_text("3 2 3 3\n0 0 0\n1 1 1\n").is_err());
        assert!(QaryCode::from_text("3 2 2\n").is_err());
        assert!(QaryCode::from_text("3 2 2 3\n0 0 0\n1 x 1\n").is_err());
    }
}
