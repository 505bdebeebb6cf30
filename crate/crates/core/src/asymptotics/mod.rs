//! Closed-form asymptotic density-exponent bounds.
//!
//! Every family combines a lattice family with a tower of `ℓ` Gilbert–Varshamov
//! codes over a residue field of size `Q`. A bound is reported as a lattice
//! term plus a codes term. All logarithms are base 2 unless written `ln`.
//!
//! Curve-family bounds take `q = p^r` with `r` even. Such `q` easily exceeds
//! the double range, so it is only ever handled through `log₂ q` and `ln q`.

mod extended;
mod search;

pub use extended::{
    congruence_bound_extended, principal_bound_extended, ring_of_integers_bound_extended, ExtendedReport,
    EXTENDED_DIGITS,
};
pub use search::{
    max_rt_congruence, max_rt_principal, search_congruence, search_congruence_with, search_principal,
    search_principal_with, GridRow, Refinement, SearchConfig, SearchResult, StageSummary, YGrid,
};

use std::f64::consts::{E, LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::coding::entropy_from_log2;
use crate::numeric::{is_prime, CompensatedSum};
use crate::{Error, Result};

/// Reference exponent of Xing's construction at `Q = 4`, `z = 0.3049`. The formula
/// behind it is not reproduced here; the value is stored, not computed.
#[allow(clippy::excessive_precision)]
pub const XING_REFERENCE: f64 = -1.265_321_814_152_094_106_508_248_991_58;
pub const XING_REFERENCE_TEXT: &str = "-1.26532181415209410650824899158";

pub fn xing_reference_constant() -> f64 {
    XING_REFERENCE
}

/// Below this, `log₂(1 ± 1/q)` is dropped.
const CORRECTION_FLOOR_LOG2: f64 = -70.0;

/// Slack allowed when checking `Q^ℓ c² <= (Q-1)/Q` in log space.
const LEVEL_SLACK: f64 = 1e-12;

/// `q = p^r`, kept as logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub r: u32,
    pub log2_q: f64,
    pub ln_q: f64,
}

impl PrimePower {
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::invalid("exponent r must be positive"));
        }
        Ok(Self {
            p,
            r,
            log2_q: r as f64 * (p as f64).log2(),
            ln_q: r as f64 * (p as f64).ln(),
        })
    }

    /// Curve families need `√q` to be an integer.
    pub fn require_even(&self) -> Result<()> {
        if !self.r.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "q = {}^{} must be an even prime power",
                self.p, self.r
            )));
        }
        Ok(())
    }

    /// `q` as a double, when it is one.
    pub fn value(&self) -> Option<f64> {
        let v = (self.p as f64).powi(self.r as i32);
        v.is_finite().then_some(v)
    }

    pub fn log2_q_minus_1(&self) -> f64 {
        self.log2_q + log2_one_plus(-1.0, self.log2_q)
    }

    pub fn log2_q_plus_1(&self) -> f64 {
        self.log2_q + log2_one_plus(1.0, self.log2_q)
    }

    /// `(√q / (√q - 1)) log₂ q`.
    pub fn sqrt_ratio_log2_q(&self) -> f64 {
        // √q/(√q-1) = 1/(1 - 2^{-log₂q/2})
        self.log2_q / -(-0.5 * self.log2_q * std::f64::consts::LN_2).exp_m1()
    }
}

/// `log₂(1 + sign·2^{-log2_q})`, or 0 once the correction is negligible.
fn log2_one_plus(sign: f64, log2_q: f64) -> f64 {
    if -log2_q < CORRECTION_FLOOR_LOG2 {
        0.0
    } else {
        (sign * (-log2_q).exp2()).ln_1p() * LOG2_E
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RingOfIntegers,
    General,
    Principal,
    Congruence,
    RtPrincipal,
    RtCongruence,
}

/// A density-exponent lower bound split into its two contributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: Family,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q_norm: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub ell: u32,
    /// Minimum-distance coefficient `c` in `d_E >= c √n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub lattice_term: f64,
    pub codes_term: f64,
    pub lambda_lower: f64,
}

impl BoundReport {
    fn new(family: Family, q_norm: Option<u64>, ell: u32, lattice_term: f64, codes_term: f64) -> Self {
        Self {
            family,
            q_norm,
            p: None,
            r: None,
            y: None,
            ell,
            c: None,
            lattice_term,
            codes_term,
            lambda_lower: lattice_term + codes_term,
        }
    }

    fn with_q(mut self, pp: &PrimePower) -> Self {
        self.p = Some(pp.p);
        self.r = Some(pp.r);
        self
    }
}

/// Whether `Q` is the norm of a prime ideal of `Z[ω]`: a prime `p ≢ 2 (mod 3)`
/// or the square of a prime `p ≡ 2 (mod 3)`.
pub fn is_prime_ideal_norm(q: u64) -> bool {
    if is_prime(q) {
        return q % 3 != 2;
    }
    let s = (q as f64).sqrt().round() as u64;
    s * s == q && is_prime(s) && s % 3 == 2
}

fn check_norm(q: u64) -> Result<()> {
    if !is_prime_ideal_norm(q) {
        return Err(Error::invalid(format!("{q} is not the norm of a prime ideal of Z[ω]")));
    }
    Ok(())
}

/// Largest `ℓ >= 0` with `Q^ℓ c² <= (Q-1)/Q`, from `log₂ c²`. `None` if even
/// `ℓ = 0` fails.
pub fn code_levels(q_norm: u64, log2_c2: f64) -> Option<u32> {
    let lq = (q_norm as f64).log2();
    let cap = ((q_norm - 1) as f64).log2() - lq;
    let fits = |l: i64| l as f64 * lq + log2_c2 <= cap + LEVEL_SLACK;
    let mut ell = ((cap - log2_c2) / lq).floor() as i64;
    while fits(ell + 1) {
        ell += 1;
    }
    while ell >= 0 && !fits(ell) {
        ell -= 1;
    }
    u32::try_from(ell).ok()
}

fn levels_or_warn(q_norm: u64, log2_c2: f64, what: &str) -> u32 {
    code_levels(q_norm, log2_c2).unwrap_or_else(|| {
        log::warn!("{what}: Q c² exceeds (Q-1)/Q, no code levels fit; using ℓ = 0");
        0
    })
}

/// `½ log₂Q · Σ_{i<ℓ} (1 - H_Q(Q^{ℓ-i} c²))`.
fn codes_term(q_norm: u64, ell: u32, log2_c2: f64) -> f64 {
    let lq = (q_norm as f64).log2();
    let cap = ((q_norm - 1) as f64).log2() - lq;
    let sum: CompensatedSum = (0..ell)
        .map(|i| {
            let x = (ell - i) as f64 * lq + log2_c2;
            assert!(x <= cap + LEVEL_SLACK, "entropy argument above (Q-1)/Q");
            1.0 - entropy_from_log2(q_norm, x.min(cap))
        })
        .collect();
    0.5 * lq * sum.value()
}

/// Concatenation over the ring of integers: `ℓ` levels, codes at relative
/// distances `Q^{-i}` with entropy clipped to 1 from `(Q-1)/Q` on.
pub fn ring_of_integers_bound(q_norm: u64, ell: u32) -> Result<BoundReport> {
    check_norm(q_norm)?;
    let lq = (q_norm as f64).log2();
    let cap = ((q_norm - 1) as f64).log2() - lq;
    let lattice = -1.0 + 0.5 * (2.0 * PI * E).log2() - 0.25 * 3f64.log2() - 0.5 * ell as f64 * lq;
    let sum: CompensatedSum = (0..ell)
        .map(|i| {
            let x = -(i as f64) * lq;
            if x >= cap {
                0.0
            } else {
                1.0 - entropy_from_log2(q_norm, x)
            }
        })
        .collect();
    Ok(BoundReport::new(
        Family::RingOfIntegers,
        Some(q_norm),
        ell,
        lattice,
        0.5 * lq * sum.value(),
    ))
}

/// Concatenation on top of any lattice family with `d_E >= c √n` and
/// `(1/n) log₂ det → delta`.
pub fn general_concat_bound(q_norm: u64, c2: f64, delta: f64) -> Result<BoundReport> {
    check_norm(q_norm)?;
    if !(c2 > 0.0 && c2 <= 1.0) {
        return Err(Error::invalid(format!("c² must lie in (0, 1], got {c2}")));
    }
    if !delta.is_finite() {
        return Err(Error::invalid("delta must be finite"));
    }
    let log2_c2 = c2.log2();
    let ell = levels_or_warn(q_norm, log2_c2, "general bound");
    let lattice = 0.5 * (c2 * PI * E / (2.0 * 3f64.sqrt())).log2() - delta;
    let mut report = BoundReport::new(
        Family::General,
        Some(q_norm),
        ell,
        lattice,
        codes_term(q_norm, ell, log2_c2),
    );
    report.c = Some(c2.sqrt());
    Ok(report)
}

/// `delta` of the augmented principal lattices.
pub fn principal_delta(pp: &PrimePower) -> f64 {
    pp.sqrt_ratio_log2_q() - pp.log2_q_minus_1()
}

/// `delta` of the augmented congruence lattices at divisor ratio `y`.
pub fn congruence_delta(pp: &PrimePower, y: f64) -> f64 {
    principal_delta(pp) + 0.5 * y * LOG2_E
}

/// Lattice-only exponent of the augmented principal lattices (real dimension,
/// no `-¼ log₂3`).
pub fn rt_principal_baseline(pp: &PrimePower) -> Result<f64> {
    pp.require_even()?;
    Ok(0.5 * (PI * E).log2() - 0.5 * pp.log2_q_plus_1() + pp.log2_q_minus_1() - pp.sqrt_ratio_log2_q())
}

fn check_y(y: f64) -> Result<()> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::invalid(format!("y must lie in (0, 1], got {y}")));
    }
    Ok(())
}

/// Lattice-only exponent of the augmented congruence lattices.
pub fn rt_congruence_baseline(pp: &PrimePower, y: f64) -> Result<f64> {
    pp.require_even()?;
    check_y(y)?;
    Ok(CongruenceFamily::new(4, pp).y_free + 0.25 * 3f64.log2() + y_terms(y))
}

/// Augmented principal lattices over `F_q` followed by `ℓ` code levels,
/// with `c² = 2/(q+1)`.
pub fn principal_bound(q_norm: u64, pp: &PrimePower) -> Result<BoundReport> {
    check_norm(q_norm)?;
    let lattice = rt_principal_baseline(pp)? - 0.25 * 3f64.log2();
    let log2_c2 = 1.0 - pp.log2_q_plus_1();
    let ell = levels_or_warn(q_norm, log2_c2, "principal bound");
    let mut report = BoundReport::new(
        Family::Principal,
        Some(q_norm),
        ell,
        lattice,
        codes_term(q_norm, ell, log2_c2),
    )
    .with_q(pp);
    report.c = Some((0.5 * log2_c2).exp2());
    Ok(report)
}

fn y_terms(y: f64) -> f64 {
    0.5 * y.log2() + 0.5 * (1.0 - y) * LOG2_E
}

/// The `y`-independent part of a congruence bound, precomputed for sweeps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CongruenceFamily {
    q_norm: u64,
    log2_ln_q: f64,
    y_free: f64,
}

impl CongruenceFamily {
    pub(crate) fn new(q_norm: u64, pp: &PrimePower) -> Self {
        let log2_ln_q = pp.ln_q.log2();
        let y_free = 0.5 * (PI / 2.0).log2() - 0.5 * log2_ln_q - pp.sqrt_ratio_log2_q() + pp.log2_q_minus_1()
            - 0.25 * 3f64.log2();
        Self {
            q_norm,
            log2_ln_q,
            y_free,
        }
    }

    /// `(ℓ, lattice term, codes term, log₂ c²)` at `y`. Searches pass
    /// `warn = false` since starved grid corners are expected there.
    pub(crate) fn eval(&self, y: f64, warn: bool) -> (u32, f64, f64, f64) {
        let log2_c2 = y.log2() - self.log2_ln_q;
        let ell = if warn {
            levels_or_warn(self.q_norm, log2_c2, "congruence bound")
        } else {
            code_levels(self.q_norm, log2_c2).unwrap_or(0)
        };
        (
            ell,
            self.y_free + y_terms(y),
            codes_term(self.q_norm, ell, log2_c2),
            log2_c2,
        )
    }
}

/// Augmented congruence lattices with divisor ratio `y/(2 ln q)` followed
/// by `ℓ` code levels, with `c² = y / ln q`.
pub fn congruence_bound(q_norm: u64, pp: &PrimePower, y: f64) -> Result<BoundReport> {
    check_norm(q_norm)?;
    pp.require_even()?;
    check_y(y)?;
    let (ell, lattice, codes, log2_c2) = CongruenceFamily::new(q_norm, pp).eval(y, true);
    let mut report = BoundReport::new(Family::Congruence, Some(q_norm), ell, lattice, codes).with_q(pp);
    report.y = Some(y);
    report.c = Some((0.5 * log2_c2).exp2());
    Ok(report)
}

/// Both columns of the componential table at `Q = 4`, `q = 11^94`,
/// `y = 2.5·10^-10`.
#[derive(Debug, Clone, Serialize)]
pub struct Table1 {
    pub principal: BoundReport,
    pub congruence: BoundReport,
}

pub const TABLE1_Y: f64 = 1.0 / 4_000_000_000.0;

pub fn table1() -> Result<Table1> {
    let pp = PrimePower::new(11, 94)?;
    Ok(Table1 {
        principal: principal_bound(4, &pp)?,
        congruence: congruence_bound(4, &pp, TABLE1_Y)?,
    })
}
