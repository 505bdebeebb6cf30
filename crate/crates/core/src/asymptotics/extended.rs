//! The ring, principal and congruence bounds in multiprecision arithmetic.
//!
//! This is an independent evaluation: `q = p^r` is formed exactly, every
//! logarithm is taken directly and `ℓ` is re-derived by exact comparison.
//! Only the double-precision `ℓ` is reused, as a starting guess.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::Serialize;

use super::{code_levels, is_prime_ideal_norm, Family, PrimePower};
use crate::{Error, Result};

/// Significant digits in extended output.
pub const EXTENDED_DIGITS: usize = 30;

const PREC: usize = 1024;
const RM: RoundingMode = RoundingMode::ToEven;

/// A bound with every real field rendered to [`EXTENDED_DIGITS`] digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedReport {
    pub family: Family,
    #[serde(rename = "Q")]
    pub q_norm: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    pub ell: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    pub lattice_term: String,
    pub codes_term: String,
    pub lambda_lower: String,
}

fn int(v: u64) -> BigFloat {
    BigFloat::from_u64(v, PREC)
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, PREC, RM)
}

fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, PREC, RM)
}

fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, PREC, RM)
}

fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, PREC, RM)
}

fn half(a: &BigFloat) -> BigFloat {
    div(a, &int(2))
}

fn power(base: u64, exp: u32) -> BigFloat {
    int(base).powi(exp as usize, PREC, RM)
}

fn sqrt(a: &BigFloat) -> BigFloat {
    a.sqrt(PREC, RM)
}

struct Ctx {
    cc: Consts,
}

impl Ctx {
    fn new() -> Result<Self> {
        Ok(Self {
            cc: Consts::new().map_err(|e| Error::invalid(format!("multiprecision setup: {e:?}")))?,
        })
    }

    fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(PREC, RM, &mut self.cc)
    }

    fn log2(&mut self, a: &BigFloat) -> BigFloat {
        a.log2(PREC, RM, &mut self.cc)
    }

    fn pi(&mut self) -> BigFloat {
        self.cc.pi(PREC, RM)
    }

    fn e(&mut self) -> BigFloat {
        self.cc.e(PREC, RM)
    }

    fn quarter_log2_3(&mut self) -> BigFloat {
        let l = self.log2(&int(3));
        div(&l, &int(4))
    }

    /// `Q^ℓ c² <= (Q-1)/Q`, compared exactly.
    fn fits(q_norm: u64, ell: i64, c2: &BigFloat) -> bool {
        if ell < 0 {
            return true;
        }
        let lhs = mul(&power(q_norm, ell as u32), c2);
        let rhs = div(&int(q_norm - 1), &int(q_norm));
        lhs <= rhs
    }

    fn levels(q_norm: u64, c2: &BigFloat, guess: Option<u32>) -> u32 {
        let mut ell = guess.map_or(-1, i64::from);
        while Self::fits(q_norm, ell + 1, c2) {
            ell += 1;
        }
        while ell >= 0 && !Self::fits(q_norm, ell, c2) {
            ell -= 1;
        }
        if ell < 0 {
            log::warn!("extended bound: no code levels fit; using ℓ = 0");
        }
        ell.max(0) as u32
    }

    /// `H_Q(ρ)` for `0 < ρ <= (Q-1)/Q`.
    fn entropy(&mut self, q_norm: u64, rho: &BigFloat) -> BigFloat {
        let one = int(1);
        let rest = sub(&one, rho);
        let ln_qm1 = self.ln(&int(q_norm - 1));
        let ln_rho = self.ln(rho);
        let ln_rest = self.ln(&rest);
        let num = sub(&mul(rho, &sub(&ln_qm1, &ln_rho)), &mul(&rest, &ln_rest));
        let ln_q = self.ln(&int(q_norm));
        div(&num, &ln_q)
    }

    /// `½ log₂Q · Σ_{i<ℓ} (1 - H_Q(Q^{ℓ-i} c²))`.
    fn codes_term(&mut self, q_norm: u64, ell: u32, c2: &BigFloat) -> BigFloat {
        let mut sum = BigFloat::from_u64(0, PREC);
        for i in 0..ell {
            let rho = mul(&power(q_norm, ell - i), c2);
            let h = self.entropy(q_norm, &rho);
            sum = add(&sum, &sub(&int(1), &h));
        }
        let lq = self.log2(&int(q_norm));
        mul(&half(&lq), &sum)
    }

    /// `½ log₂(πe) - ½ log₂(q+1) + log₂(q-1) - (√q/(√q-1)) log₂q`, i.e. the
    /// principal lattice exponent before the `-¼ log₂3`.
    fn principal_lattice(&mut self, q: &BigFloat, sqrt_q: &BigFloat) -> BigFloat {
        let one = int(1);
        let pe = mul(&self.pi(), &self.e());
        let a = half(&self.log2(&pe));
        let b = half(&self.log2(&add(q, &one)));
        let c = self.log2(&sub(q, &one));
        let ratio = div(sqrt_q, &sub(sqrt_q, &one));
        let d = mul(&ratio, &self.log2(q));
        sub(&add(&sub(&a, &b), &c), &d)
    }

    fn render(&mut self, x: &BigFloat) -> Result<String> {
        let s = x
            .format(Radix::Dec, RM, &mut self.cc)
            .map_err(|e| Error::invalid(format!("multiprecision format: {e:?}")))?;
        round_decimal(&s, EXTENDED_DIGITS)
    }
}

/// Rounds a decimal string `[-]d.ddd…e±x` to `digits` significant digits
/// (half away from zero) and renders it without an exponent when the
/// magnitude allows.
fn round_decimal(s: &str, digits: usize) -> Result<String> {
    let bad = || Error::invalid(format!("unexpected number format {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (mant, exp) = body.split_once(['e', 'E']).ok_or_else(bad)?;
    let mut exp: i64 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut ds: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    if ds.iter().any(|&d| d > 9) {
        return Err(bad());
    }
    exp += int_part.len() as i64 - 1;
    while ds.len() > 1 && ds[0] == 0 {
        ds.remove(0);
        exp -= 1;
    }
    if ds.iter().all(|&d| d == 0) {
        return Ok("0".into());
    }
    ds.resize(ds.len().max(digits + 1), 0);
    let round_up = ds[digits] >= 5;
    ds.truncate(digits);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.truncate(digits);
                exp += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let text: String = ds.iter().map(|d| (d + b'0') as char).collect();
    let sign = if neg { "-" } else { "" };
    let out = if (0..digits as i64).contains(&exp) {
        let (a, b) = text.split_at(exp as usize + 1);
        if b.is_empty() {
            a.to_string()
        } else {
            format!("{a}.{b}")
        }
    } else if (-6..0).contains(&exp) {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), text)
    } else {
        format!("{}.{}e{}", &text[..1], &text[1..], exp)
    };
    Ok(format!("{sign}{out}"))
}

fn check_norm(q_norm: u64) -> Result<()> {
    if !is_prime_ideal_norm(q_norm) {
        return Err(Error::invalid(format!(
            "{q_norm} is not the norm of a prime ideal of Z[ω]"
        )));
    }
    Ok(())
}

/// Parses `y` as a decimal (`2.5e-10`) or a fraction (`1/4000000000`).
fn parse_y(ctx: &mut Ctx, y: &str) -> Result<BigFloat> {
    let bad = || Error::invalid(format!("cannot parse y = {y:?}"));
    let dec = |ctx: &mut Ctx, s: &str| -> Result<BigFloat> {
        s.trim().parse::<f64>().map_err(|_| bad())?;
        let v = BigFloat::parse(s.trim(), Radix::Dec, PREC, RM, &mut ctx.cc);
        if v.is_nan() {
            return Err(bad());
        }
        Ok(v)
    };
    let v = match y.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (dec(ctx, n)?, dec(ctx, d)?);
            div(&n, &d)
        }
        None => dec(ctx, y)?,
    };
    if !(v.is_positive() && v <= int(1)) {
        return Err(Error::invalid(format!("y must lie in (0, 1], got {y}")));
    }
    Ok(v)
}

pub fn ring_of_integers_bound_extended(q_norm: u64, ell: u32) -> Result<ExtendedReport> {
    check_norm(q_norm)?;
    let mut ctx = Ctx::new()?;
    let two_pi_e = mul(&mul(&int(2), &ctx.pi()), &ctx.e());
    let lq = ctx.log2(&int(q_norm));
    let mut lattice = sub(&half(&ctx.log2(&two_pi_e)), &int(1));
    let quarter = ctx.quarter_log2_3();
    lattice = sub(&lattice, &quarter);
    lattice = sub(&lattice, &mul(&half(&int(ell as u64)), &lq));
    let threshold = div(&int(q_norm - 1), &int(q_norm));
    let mut sum = BigFloat::from_u64(0, PREC);
    for i in 0..ell {
        let rho = div(&int(1), &power(q_norm, i));
        if rho < threshold {
            let h = ctx.entropy(q_norm, &rho);
            sum = add(&sum, &sub(&int(1), &h));
        }
    }
    let codes = mul(&half(&lq), &sum);
    let total = add(&lattice, &codes);
    Ok(ExtendedReport {
        family: Family::RingOfIntegers,
        q_norm,
        p: None,
        r: None,
        y: None,
        ell,
        c: None,
        lattice_term: ctx.render(&lattice)?,
        codes_term: ctx.render(&codes)?,
        lambda_lower: ctx.render(&total)?,
    })
}

pub fn principal_bound_extended(q_norm: u64, p: u64, r: u32) -> Result<ExtendedReport> {
    check_norm(q_norm)?;
    let pp = PrimePower::new(p, r)?;
    pp.require_even()?;
    let mut ctx = Ctx::new()?;
    let q = power(p, r);
    let sqrt_q = power(p, r / 2);
    let c2 = div(&int(2), &add(&q, &int(1)));
    let guess = code_levels(q_norm, 1.0 - pp.log2_q_plus_1());
    let ell = Ctx::levels(q_norm, &c2, guess);
    let base = ctx.principal_lattice(&q, &sqrt_q);
    let quarter = ctx.quarter_log2_3();
    let lattice = sub(&base, &quarter);
    let codes = ctx.codes_term(q_norm, ell, &c2);
    let total = add(&lattice, &codes);
    let c = sqrt(&c2);
    Ok(ExtendedReport {
        family: Family::Principal,
        q_norm,
        p: Some(p),
        r: Some(r),
        y: None,
        ell,
        c: Some(ctx.render(&c)?),
        lattice_term: ctx.render(&lattice)?,
        codes_term: ctx.render(&codes)?,
        lambda_lower: ctx.render(&total)?,
    })
}

/// `y` is given as text so that fractions such as `1/4000000000` are
/// carried exactly.
pub fn congruence_bound_extended(q_norm: u64, p: u64, r: u32, y: &str) -> Result<ExtendedReport> {
    check_norm(q_norm)?;
    let pp = PrimePower::new(p, r)?;
    pp.require_even()?;
    let mut ctx = Ctx::new()?;
    let yv = parse_y(&mut ctx, y)?;
    let one = int(1);
    let q = power(p, r);
    let sqrt_q = power(p, r / 2);
    let ln_q = ctx.ln(&q);
    let c2 = div(&yv, &ln_q);
    let guess = code_levels(q_norm, y_as_f64(y)?.log2() - pp.ln_q.log2());
    let ell = Ctx::levels(q_norm, &c2, guess);

    // ½log₂(π/2) - ½log₂(ln q) - (√q/(√q-1))log₂q + log₂(q-1)
    //   + ½log₂y + ((1-y)/2)log₂e - ¼log₂3
    let half_pi = half(&ctx.pi());
    let mut lattice = half(&ctx.log2(&half_pi));
    lattice = sub(&lattice, &half(&ctx.log2(&ln_q)));
    let ratio = div(&sqrt_q, &sub(&sqrt_q, &one));
    lattice = sub(&lattice, &mul(&ratio, &ctx.log2(&q)));
    lattice = add(&lattice, &ctx.log2(&sub(&q, &one)));
    lattice = add(&lattice, &half(&ctx.log2(&yv)));
    let e = ctx.e();
    let log2_e = ctx.log2(&e);
    lattice = add(&lattice, &mul(&half(&sub(&one, &yv)), &log2_e));
    let quarter = ctx.quarter_log2_3();
    lattice = sub(&lattice, &quarter);

    let codes = ctx.codes_term(q_norm, ell, &c2);
    let total = add(&lattice, &codes);
    let c = sqrt(&c2);
    Ok(ExtendedReport {
        family: Family::Congruence,
        q_norm,
        p: Some(p),
        r: Some(r),
        y: Some(ctx.render(&yv)?),
        ell,
        c: Some(ctx.render(&c)?),
        lattice_term: ctx.render(&lattice)?,
        codes_term: ctx.render(&codes)?,
        lambda_lower: ctx.render(&total)?,
    })
}

fn y_as_f64(y: &str) -> Result<f64> {
    let bad = || Error::invalid(format!("cannot parse y = {y:?}"));
    match y.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            Ok(n / d)
        }
        None => y.trim().parse().map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(s: &str) -> f64 {
        s.parse().unwrap()
    }

    #[test]
    fn rounding() {
        assert_eq!(round_decimal("1.2345e+0", 3).unwrap(), "1.23");
        assert_eq!(round_decimal("-9.9996e+1", 4).unwrap(), "-100.0");
        assert_eq!(round_decimal("1.5e-10", 3).unwrap(), "1.50e-10");
        assert_eq!(round_decimal("2.5e-3", 2).unwrap(), "0.0025");
    }

    #[test]
    fn agrees_with_double_precision() {
        let r = ring_of_integers_bound_extended(4, 1000).unwrap();
        assert!((value(&r.lambda_lower) - -1.271_967_675_122_136_2).abs() < 1e-12);
        let b = principal_bound_extended(4, 59, 28).unwrap();
        assert_eq!(b.ell, 81);
        assert!((value(&b.lambda_lower) - -1.265_321_822_829_659_4).abs() < 1e-12);
        let b = congruence_bound_extended(4, 11, 94, "1/4000000000").unwrap();
        assert_eq!(b.ell, 19);
        assert!((value(&b.lambda_lower) - -1.265_321_814_042_733_8).abs() < 1e-12);
        assert_eq!(b.y.as_deref(), Some("2.50000000000000000000000000000e-10"));
        assert!(congruence_bound_extended(4, 11, 94, "2").is_err());
        assert!(congruence_bound_extended(4, 11, 94, "x").is_err());
    }
}
