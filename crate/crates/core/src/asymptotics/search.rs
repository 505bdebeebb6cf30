//! Grid searches over `(Q, q = p^r[, y])`.
//!
//! Each pair is evaluated independently (in parallel with the `parallel`
//! feature), results are collected in grid order and reduced sequentially,
//! so the outcome never depends on scheduling. Ties within `1e-12` go to the
//! lexicographically smallest `(Q, p, r, y)`.

use serde::{Deserialize, Serialize};

use super::{congruence_bound, principal_bound, rt_congruence_baseline, rt_principal_baseline, BoundReport};
use super::{CongruenceFamily, Family, PrimePower};
use crate::eisenstein::residue_field_size;
use crate::numeric::primes_up_to;
use crate::{Error, Result};

const TIE: f64 = 1e-12;

/// Pairs handed to the thread pool at once when rows are streamed out.
const CHUNK: usize = 512;

/// An inclusive `y` grid `start, start + step, ..., <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YGrid(pub f64, pub f64, pub f64);

impl YGrid {
    /// Grid points. Decimal steps are generated as `k / 10^m` so the points
    /// are the correctly rounded decimals rather than accumulated sums.
    pub fn points(&self) -> Vec<f64> {
        let YGrid(start, end, step) = *self;
        if let Some(m) = (0..=20).find(|&m| {
            let s = step * 10f64.powi(m);
            (s - s.round()).abs() < 1e-9 * s.max(1.0) && s.round() >= 1.0
        }) {
            let scale = 10f64.powi(m);
            let lo = (start * scale).round() as i64;
            let hi = (end * scale).round() as i64;
            let stride = (step * scale).round() as i64;
            return (lo..=hi).step_by(stride as usize).map(|k| k as f64 / scale).collect();
        }
        let n = ((end - start) / step + 1e-9).floor() as i64;
        (0..=n).map(|k| start + k as f64 * step).collect()
    }

    fn validate(&self) -> Result<()> {
        let YGrid(start, end, step) = *self;
        if !(step > 0.0) || !(start > 0.0) || !(end <= 1.0) || start > end {
            return Err(Error::invalid(format!(
                "y grid [{start}, {end}] step {step} must satisfy 0 < start <= end <= 1, step > 0"
            )));
        }
        Ok(())
    }
}

/// Decade-down continuation after the fixed `y` grids: around the running
/// best `y = m·10^e` scan `[10^{e-1}, 2·10^e]` in steps of `10^{e-2}`, until a
/// stage gains less than `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Refinement {
    pub tolerance: f64,
    pub max_stages: u32,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_stages: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    /// `Q` runs over norms of prime ideals above primes up to this limit.
    #[serde(rename = "prime_limit_Q")]
    pub prime_limit_norm: u64,
    pub prime_limit_q: u64,
    /// Inclusive range of even exponents `r`.
    pub r_range: [u32; 2],
    #[serde(default)]
    pub y_schedule: Vec<YGrid>,
    #[serde(default)]
    pub refine: Option<Refinement>,
}

impl SearchConfig {
    pub fn reference_principal() -> Self {
        Self {
            prime_limit_norm: 100,
            prime_limit_q: 100,
            r_range: [2, 250],
            y_schedule: Vec::new(),
            refine: None,
        }
    }

    pub fn reference_congruence() -> Self {
        Self {
            prime_limit_norm: 60,
            prime_limit_q: 60,
            r_range: [2, 100],
            y_schedule: vec![YGrid(0.1, 1.0, 0.01), YGrid(0.01, 0.2, 1e-4)],
            refine: Some(Refinement::default()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(0, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.r_range;
        if lo == 0 || lo % 2 != 0 || hi % 2 != 0 || lo > hi {
            return Err(Error::invalid(format!(
                "r_range [{lo}, {hi}] must be even, positive and ordered"
            )));
        }
        for g in &self.y_schedule {
            g.validate()?;
        }
        if let Some(r) = self.refine {
            if !(r.tolerance > 0.0) {
                return Err(Error::invalid("refinement tolerance must be positive"));
            }
        }
        Ok(())
    }

    fn pairs(&self) -> Result<Vec<(u64, PrimePower)>> {
        let mut norms: Vec<u64> = primes_up_to(self.prime_limit_norm)
            .into_iter()
            .map(residue_field_size)
            .collect::<Result<_>>()?;
        norms.sort_unstable();
        norms.dedup();
        let qs = primes_up_to(self.prime_limit_q)
            .into_iter()
            .flat_map(|p| (self.r_range[0]..=self.r_range[1]).step_by(2).map(move |r| (p, r)))
            .map(|(p, r)| PrimePower::new(p, r))
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<_> = norms.iter().flat_map(|&q| qs.iter().map(move |pp| (q, *pp))).collect();
        if pairs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(pairs)
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    #[serde(rename = "Q")]
    pub q_norm: u64,
    pub p: u64,
    pub r: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub ell: u32,
    pub lambda_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub grid: YGrid,
    pub evaluations: u64,
    pub best_lambda: f64,
    pub best_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best: BoundReport,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSummary>,
}

type Sink<'a> = Option<&'a mut dyn FnMut(&GridRow)>;

fn map_ordered<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether `cand` replaces `best` under the tie rule. Candidates arrive in
/// increasing key order, so within the tie band the incumbent wins.
fn beats(cand: f64, best: f64) -> bool {
    cand > best + TIE
}

pub fn search_principal(cfg: &SearchConfig) -> Result<SearchResult> {
    search_principal_with(cfg, None)
}

/// Principal-lattice search, streaming every evaluation to `sink` in grid order.
pub fn search_principal_with(cfg: &SearchConfig, mut sink: Sink<'_>) -> Result<SearchResult> {
    cfg.validate()?;
    let pairs = cfg.pairs()?;
    let mut best: Option<BoundReport> = None;
    for chunk in pairs.chunks(CHUNK.max(pairs.len() / 64)) {
        let reports = map_ordered(chunk, |(q_norm, pp)| principal_bound(*q_norm, pp));
        for rep in reports {
            let rep = rep?;
            if let Some(s) = sink.as_mut() {
                s(&GridRow {
                    q_norm: rep.q_norm.unwrap_or(0),
                    p: rep.p.unwrap_or(0),
                    r: rep.r.unwrap_or(0),
                    y: None,
                    ell: rep.ell,
                    lambda_lower: rep.lambda_lower,
                });
            }
            if best.as_ref().is_none_or(|b| beats(rep.lambda_lower, b.lambda_lower)) {
                best = Some(rep);
            }
        }
    }
    Ok(SearchResult {
        best: best.ok_or(Error::EmptyGrid)?,
        evaluations: pairs.len() as u64,
        stages: Vec::new(),
    })
}

pub fn search_congruence(cfg: &SearchConfig) -> Result<SearchResult> {
    search_congruence_with(cfg, None)
}

/// Best `(index into ys, λ)` for one pair.
fn sweep(family: &CongruenceFamily, ys: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &y) in ys.iter().enumerate() {
        let (_, lattice, codes, _) = family.eval(y, false);
        let lam = lattice + codes;
        if beats(lam, best.1) {
            best = (k, lam);
        }
    }
    best
}

/// Congruence-lattice search over the configured `y` grids, then the
/// optional decade-down refinement. Every stage scans all pairs.
pub fn search_congruence_with(cfg: &SearchConfig, mut sink: Sink<'_>) -> Result<SearchResult> {
    cfg.validate()?;
    if cfg.y_schedule.is_empty() {
        return Err(Error::invalid("congruence search needs a nonempty y_schedule"));
    }
    let pairs = cfg.pairs()?;
    let families: Vec<CongruenceFamily> = pairs.iter().map(|(q, pp)| CongruenceFamily::new(*q, pp)).collect();
    let indexed: Vec<usize> = (0..pairs.len()).collect();

    let mut best: Option<(usize, f64, f64)> = None;
    let mut stages = Vec::new();
    let mut evaluations = 0u64;

    let mut run_stage = |grid: YGrid, sink: &mut Sink<'_>| -> Result<(usize, f64, f64)> {
        let ys = grid.points();
        if ys.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut stage_best: Option<(usize, f64, f64)> = None;
        let chunk_len = if sink.is_some() { CHUNK } else { indexed.len() };
        for chunk in indexed.chunks(chunk_len) {
            if let Some(s) = sink.as_mut() {
                let rows = map_ordered(chunk, |&i| {
                    ys.iter()
                        .map(|&y| {
                            let (ell, lattice, codes, _) = families[i].eval(y, false);
                            (ell, lattice + codes)
                        })
                        .collect::<Vec<_>>()
                });
                for (&i, row) in chunk.iter().zip(rows) {
                    let (q_norm, pp) = pairs[i];
                    for (&y, (ell, lam)) in ys.iter().zip(row) {
                        s(&GridRow {
                            q_norm,
                            p: pp.p,
                            r: pp.r,
                            y: Some(y),
                            ell,
                            lambda_lower: lam,
                        });
                    }
                }
            }
            let sweeps = map_ordered(chunk, |&i| sweep(&families[i], &ys));
            for (&i, (k, lam)) in chunk.iter().zip(sweeps) {
                if stage_best.is_none_or(|b| beats(lam, b.1)) {
                    stage_best = Some((i, lam, ys[k]));
                }
            }
        }
        let sb = stage_best.ok_or(Error::EmptyGrid)?;
        let n = (ys.len() * pairs.len()) as u64;
        evaluations += n;
        stages.push(StageSummary {
            grid,
            evaluations: n,
            best_lambda: sb.1,
            best_y: sb.2,
        });
        Ok(sb)
    };
    // Returns the gain of the stage over the running best.
    let absorb = |best: &mut Option<(usize, f64, f64)>, sb: (usize, f64, f64)| -> f64 {
        let gain = best.map_or(f64::INFINITY, |b| sb.1 - b.1);
        if best.is_none_or(|b| beats(sb.1, b.1)) {
            *best = Some(sb);
        }
        gain
    };

    for &grid in &cfg.y_schedule {
        let sb = run_stage(grid, &mut sink)?;
        absorb(&mut best, sb);
    }
    if let Some(refine) = cfg.refine {
        for _ in 0..refine.max_stages {
            let y = best.expect("at least one stage ran").2;
            let e = (y.log10() + 1e-12).floor() as i32;
            let grid = YGrid(10f64.powi(e - 1), 2.0 * 10f64.powi(e), 10f64.powi(e - 2));
            let sb = run_stage(grid, &mut sink)?;
            if absorb(&mut best, sb) < refine.tolerance {
                break;
            }
        }
    }

    let (i, _, y) = best.ok_or(Error::EmptyGrid)?;
    let (q_norm, pp) = pairs[i];
    Ok(SearchResult {
        best: congruence_bound(q_norm, &pp, y)?,
        evaluations,
        stages,
    })
}

fn even_prime_powers(prime_limit: u64, r_range: [u32; 2]) -> Result<Vec<PrimePower>> {
    let qs: Vec<PrimePower> = primes_up_to(prime_limit)
        .into_iter()
        .flat_map(|p| (r_range[0]..=r_range[1]).filter(|r| r % 2 == 0).map(move |r| (p, r)))
        .map(|(p, r)| PrimePower::new(p, r))
        .collect::<Result<_>>()?;
    if qs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(qs)
}

fn baseline_report(family: Family, pp: &PrimePower, y: Option<f64>, lambda: f64) -> BoundReport {
    BoundReport {
        family,
        q_norm: None,
        p: Some(pp.p),
        r: Some(pp.r),
        y,
        ell: 0,
        c: None,
        lattice_term: lambda,
        codes_term: 0.0,
        lambda_lower: lambda,
    }
}

/// Best lattice-only principal exponent over even powers of primes.
pub fn max_rt_principal(prime_limit: u64, r_range: [u32; 2]) -> Result<BoundReport> {
    let mut best: Option<BoundReport> = None;
    for pp in even_prime_powers(prime_limit, r_range)? {
        let lam = rt_principal_baseline(&pp)?;
        if best.as_ref().is_none_or(|b| beats(lam, b.lambda_lower)) {
            best = Some(baseline_report(Family::RtPrincipal, &pp, None, lam));
        }
    }
    best.ok_or(Error::EmptyGrid)
}

/// Best lattice-only congruence exponent at fixed `y`.
pub fn max_rt_congruence(prime_limit: u64, r_range: [u32; 2], y: f64) -> Result<BoundReport> {
    let mut best: Option<BoundReport> = None;
    for pp in even_prime_powers(prime_limit, r_range)? {
        let lam = rt_congruence_baseline(&pp, y)?;
        if best.as_ref().is_none_or(|b| beats(lam, b.lambda_lower)) {
            best = Some(baseline_report(Family::RtCongruence, &pp, Some(y), lam));
        }
    }
    best.ok_or(Error::EmptyGrid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_grids_are_exact() {
        let g = YGrid(0.1, 1.0, 0.01).points();
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[90], 1.0);
        assert_eq!(g[17], 0.27);
        assert_eq!(YGrid(0.01, 0.2, 1e-4).points().len(), 1901);
        assert_eq!(YGrid(1.0, 1.0, 1.0).points(), vec![1.0]);
        let g = YGrid(1e-11, 2e-10, 1e-12).points();
        assert_eq!(g.len(), 191);
        assert_eq!(g[15], 2.5e-11);
    }

    #[test]
    fn config_validation_and_toml() {
        let cfg = SearchConfig::from_toml(
            "prime_limit_Q = 10\nprime_limit_q = 10\nr_range = [2, 4]\ny_schedule = [[0.5, 1.0, 0.1]]\n",
        )
        .unwrap();
        assert_eq!(cfg.y_schedule, vec![YGrid(0.5, 1.0, 0.1)]);
        assert!(SearchConfig::from_toml("prime_limit_Q = 10\nprime_limit_q = 10\nr_range = [3, 4]\n").is_err());
        assert!(
            SearchConfig::from_toml("prime_limit_Q = 10\nprime_limit_q = 10\nr_range = [2, 4]\nbogus = 1\n").is_err()
        );
        let mut cfg = SearchConfig::reference_principal();
        cfg.prime_limit_norm = 1;
        assert!(matches!(search_principal(&cfg), Err(Error::EmptyGrid)));
    }

    #[test]
    fn singleton_principal_grid() {
        let cfg = SearchConfig {
            prime_limit_norm: 2,
            prime_limit_q: 11,
            r_range: [94, 94],
            y_schedule: vec![],
            refine: None,
        };
        let mut rows = Vec::new();
        let res = search_principal_with(&cfg, Some(&mut |r: &GridRow| rows.push(*r))).unwrap();
        assert_eq!(rows.len(), 5);
        let direct = principal_bound(4, &PrimePower::new(11, 94).unwrap()).unwrap();
        assert_eq!(rows[4].lambda_lower, direct.lambda_lower);
        assert!(res.best.lambda_lower >= direct.lambda_lower);
    }

    #[test]
    fn fixed_y_congruence_grid() {
        let cfg = SearchConfig {
            prime_limit_norm: 3,
            prime_limit_q: 5,
            r_range: [2, 6],
            y_schedule: vec![YGrid(1.0, 1.0, 1.0)],
            refine: None,
        };
        let mut count = 0;
        let res = search_congruence_with(
            &cfg,
            Some(&mut |r: &GridRow| {
                assert_eq!(r.y, Some(1.0));
                count += 1;
            }),
        )
        .unwrap();
        assert_eq!(count, 2 * 3 * 3);
        assert_eq!(res.best.y, Some(1.0));
        assert_eq!(res.evaluations, 18);
        assert_eq!(search_congruence(&cfg).unwrap(), res);
    }

    #[test]
    fn baseline_optima() {
        let b = max_rt_principal(100, [2, 250]).unwrap();
        assert_eq!((b.p, b.r), (Some(3), Some(2)));
        assert!((b.lambda_lower - -1.87).abs() < 0.01);
        let b = max_rt_congruence(60, [2, 100], 1.0).unwrap();
        assert_eq!((b.p, b.r), (Some(47), Some(2)));
        assert!((b.lambda_lower - -1.39).abs() < 0.01);
    }
}
