//! Integer lattices, their complexifications `P + ωP ⊂ Z[ω]^n ≅ R^{2n}`, and
//! packing-density metrics.
//!
//! Squared lengths are integers both for sublattices of `Z^n` and for
//! subsets of `Z[ω]^n` (the squared modulus of `a + bω` is its norm), so every
//! minimum-distance search below works in exact arithmetic. Floating point is
//! only used to size enumeration boxes.

use std::collections::HashSet;
use std::f64::consts::{E, LOG2_E, PI};

use serde::Serialize;

use crate::eisenstein::{EisensteinInt, SQRT3_OVER_2};
use crate::numeric::{apply, bareiss_det, invert};
use crate::{Error, Result};

/// Default ceiling on the number of coefficient vectors a single distance
/// search may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 50_000_000;

const BOX_SLACK: f64 = 1e-7;

/// A lattice in `Z^n` given by integer basis rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerLattice {
    ambient_dim: usize,
    basis: Vec<Vec<i64>>,
}

/// Result of a minimum-distance enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinDistance {
    /// Smallest nonzero squared length found (exact).
    pub squared: i128,
    /// Whether the enumeration box provably contained every shorter vector.
    pub certified: bool,
    /// Coefficient bound that would have been sufficient for certification.
    pub required_bound: i64,
}

impl MinDistance {
    pub fn length(&self) -> f64 {
        (self.squared as f64).sqrt()
    }
}

impl IntegerLattice {
    pub fn new(basis: Vec<Vec<i64>>) -> Result<Self> {
        let ambient_dim = basis
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("lattice basis is empty"))?;
        if ambient_dim == 0 || basis.iter().any(|r| r.len() != ambient_dim) {
            return Err(Error::invalid("basis rows must share a positive length"));
        }
        if basis.len() > ambient_dim {
            return Err(Error::invalid("rank exceeds ambient dimension"));
        }
        let lattice = Self { ambient_dim, basis };
        if lattice.gram_det_squared()? <= 0 {
            return Err(Error::DegenerateBasis);
        }
        Ok(lattice)
    }

    /// The standard lattice `Z^n`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect())
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim
    }

    pub fn gram(&self) -> Vec<Vec<i128>> {
        self.basis
            .iter()
            .map(|u| {
                self.basis
                    .iter()
                    .map(|v| u.iter().zip(v).map(|(&x, &y)| x as i128 * y as i128).sum())
                    .collect()
            })
            .collect()
    }

    /// `det(G)` for the Gram matrix `G`, i.e. the squared covolume.
    pub fn gram_det_squared(&self) -> Result<i128> {
        bareiss_det(&self.gram())
    }

    /// Covolume `√det(G)`.
    pub fn gram_det(&self) -> Result<f64> {
        let d = self.gram_det_squared()?;
        if d <= 0 {
            return Err(Error::DegenerateBasis);
        }
        Ok((d as f64).sqrt())
    }

    /// Exhaustive search over coefficient vectors in `[-bound, bound]^rank`.
    pub fn min_distance(&self, bound: i64) -> Result<MinDistance> {
        if bound < 1 {
            return Err(Error::invalid("coefficient bound must be at least 1"));
        }
        let search = DistanceSearch::new(self.basis.clone(), Metric::Euclidean)?;
        search.lattice_min(bound)
    }

    /// Minimum distance with the enumeration box sized from a certified
    /// coefficient bound.
    pub fn shortest_vector(&self) -> Result<MinDistance> {
        let search = DistanceSearch::reduced(self.basis.clone(), Metric::Euclidean)?;
        search.certified_min(&[vec![0; self.ambient_dim]], DEFAULT_ENUMERATION_CAP)
    }
}

/// Basis `{e_i - e_{i+1}}` of the root lattice `A_{n-1} = {x ∈ Z^n : Σx_i = 0}`.
pub fn root_lattice_a(n: usize) -> Result<IntegerLattice> {
    if n < 2 {
        return Err(Error::invalid("A_{n-1} needs n >= 2"));
    }
    IntegerLattice::new(
        (0..n - 1)
            .map(|i| {
                let mut row = vec![0; n];
                row[i] = 1;
                row[i + 1] = -1;
                row
            })
            .collect(),
    )
}

/// Appends `(0, ..., 0, χ)` to a rank-`(n-1)` lattice lying in the zero-sum
/// hyperplane of `R^n`.
///
/// The new row sits at distance `|χ|/√n` from the hyperplane, so the
/// covolume is multiplied by exactly that factor.
pub fn augment(lattice: &IntegerLattice, chi: i64) -> Result<IntegerLattice> {
    if chi == 0 {
        return Err(Error::invalid("augmentation needs χ ≠ 0"));
    }
    let n = lattice.ambient_dim();
    if lattice.rank() + 1 != n {
        return Err(Error::invalid(format!(
            "augmentation needs rank n-1 = {}, got {}",
            n - 1,
            lattice.rank()
        )));
    }
    if let Some(row) = lattice.basis().iter().position(|r| r.iter().sum::<i64>() != 0) {
        return Err(Error::invalid(format!("basis row {row} has nonzero coordinate sum")));
    }
    let mut basis = lattice.basis().to_vec();
    let mut extra = vec![0; n];
    extra[n - 1] = chi;
    basis.push(extra);
    IntegerLattice::new(basis)
}

/// A periodic point set in `Z[ω]^n ⊂ R^{2n}`: a union of translates of a
/// period lattice. A plain lattice has the single coset representative 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPacking {
    complex_dim: usize,
    generators: Vec<Vec<EisensteinInt>>,
    coset_reps: Vec<Vec<EisensteinInt>>,
    period_det: f64,
}

impl EmbeddedPacking {
    /// Builds a packing from explicit period generators and coset
    /// representatives, computing the period covolume exactly.
    pub fn from_parts(generators: Vec<Vec<EisensteinInt>>, coset_reps: Vec<Vec<EisensteinInt>>) -> Result<Self> {
        let complex_dim = generators
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("no generators"))?;
        if generators.len() != 2 * complex_dim || generators.iter().chain(&coset_reps).any(|g| g.len() != complex_dim) {
            return Err(Error::invalid("need 2n generators of complex length n"));
        }
        if coset_reps.is_empty() {
            return Err(Error::invalid("at least one coset representative is required"));
        }
        let mut packing = Self {
            complex_dim,
            generators,
            coset_reps,
            period_det: 0.0,
        };
        packing.period_det = packing.exact_period_det()?;
        Ok(packing)
    }

    pub fn complex_dim(&self) -> usize {
        self.complex_dim
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim
    }

    pub fn generators(&self) -> &[Vec<EisensteinInt>] {
        &self.generators
    }

    pub fn coset_reps(&self) -> &[Vec<EisensteinInt>] {
        &self.coset_reps
    }

    pub fn points_per_cell(&self) -> usize {
        self.coset_reps.len()
    }

    /// Covolume of the period lattice.
    pub fn period_det(&self) -> f64 {
        self.period_det
    }

    /// Volume per point: period covolume over the number of cosets.
    pub fn det_per_point(&self) -> f64 {
        self.period_det / self.coset_reps.len() as f64
    }

    pub fn real_basis(&self) -> Vec<Vec<f64>> {
        self.generators.iter().map(|g| embed_vector(g)).collect()
    }

    /// `2·G` for the real Gram matrix `G` of the generators; always integral.
    pub fn twice_gram(&self) -> Vec<Vec<i128>> {
        self.generators
            .iter()
            .map(|u| self.generators.iter().map(|v| twice_inner(u, v)).collect())
            .collect()
    }

    /// Recomputes the period covolume from the explicit generators.
    pub fn exact_period_det(&self) -> Result<f64> {
        let d2 = bareiss_det(&self.twice_gram())?;
        if d2 <= 0 {
            return Err(Error::DegenerateBasis);
        }
        // det(2G) = 2^{2n} det(G)
        Ok((d2 as f64).sqrt() / 2f64.powi(self.complex_dim as i32))
    }

    /// Multiplies every complex coordinate by `t`.
    pub fn scale_by(&self, t: EisensteinInt) -> Result<Self> {
        let scale =
            |v: &Vec<EisensteinInt>| -> Result<Vec<EisensteinInt>> { v.iter().map(|&x| x.checked_mul(t)).collect() };
        let generators = self.generators.iter().map(scale).collect::<Result<Vec<_>>>()?;
        let coset_reps = self.coset_reps.iter().map(scale).collect::<Result<Vec<_>>>()?;
        let norm = t.checked_norm()? as f64;
        Ok(Self {
            complex_dim: self.complex_dim,
            generators,
            coset_reps,
            period_det: self.period_det * norm.powi(self.complex_dim as i32),
        })
    }

    /// Exhaustive search with lattice coefficients within `bound` of the
    /// nearest translate, over every reduced difference of coset
    /// representatives.
    pub fn min_distance(&self, bound: i64) -> Result<MinDistance> {
        if bound < 1 {
            return Err(Error::invalid("coefficient bound must be at least 1"));
        }
        let search = self.search()?;
        let diffs = search.reduced_differences(&self.flat_reps());
        search.boxed_min(&diffs, bound)
    }

    /// Certified minimum distance; each difference gets the tightest box
    /// that provably contains every shorter vector.
    pub fn min_distance_certified(&self, cap: u128) -> Result<MinDistance> {
        let search = DistanceSearch::reduced(self.generators.iter().map(|g| flatten(g)).collect(), Metric::Eisenstein)?;
        let diffs = search.reduced_differences(&self.flat_reps());
        search.certified_min(&diffs, cap)
    }

    fn search(&self) -> Result<DistanceSearch> {
        DistanceSearch::new(self.generators.iter().map(|g| flatten(g)).collect(), Metric::Eisenstein)
    }

    fn flat_reps(&self) -> Vec<Vec<i64>> {
        self.coset_reps.iter().map(|r| flatten(r)).collect()
    }
}

/// `P + ωP` as a lattice in `R^{2n}`, generated by `{p_i} ∪ {ω p_i}`.
///
/// The cached covolume is `(√3/2)^n det(P)²`; [`EmbeddedPacking::exact_period_det`]
/// recomputes it from the explicit generators.
pub fn complexify(base: &IntegerLattice) -> Result<EmbeddedPacking> {
    if !base.is_full_rank() {
        return Err(Error::invalid("complexify needs a full-rank lattice"));
    }
    let n = base.ambient_dim();
    let real: Vec<Vec<EisensteinInt>> = base
        .basis()
        .iter()
        .map(|row| row.iter().map(|&x| EisensteinInt::new(x, 0)).collect())
        .collect();
    let imag: Vec<Vec<EisensteinInt>> = base
        .basis()
        .iter()
        .map(|row| row.iter().map(|&x| EisensteinInt::new(0, x)).collect())
        .collect();
    let det_p_squared = base.gram_det_squared()? as f64;
    Ok(EmbeddedPacking {
        complex_dim: n,
        generators: real.into_iter().chain(imag).collect(),
        coset_reps: vec![vec![EisensteinInt::ZERO; n]],
        period_det: SQRT3_OVER_2.powi(n as i32) * det_p_squared,
    })
}

/// Like [`complexify`] but also recomputes the covolume from the explicit
/// `R^{2n}` Gram matrix and checks agreement to `rel_tol`.
pub fn complexify_verified(base: &IntegerLattice, rel_tol: f64) -> Result<EmbeddedPacking> {
    let packing = complexify(base)?;
    let explicit = packing.exact_period_det()?;
    let cached = packing.period_det();
    if (explicit - cached).abs() > rel_tol * cached {
        return Err(Error::invalid(format!(
            "complexified determinant mismatch: cached {cached}, explicit {explicit}"
        )));
    }
    Ok(packing)
}

pub fn embed_vector(v: &[EisensteinInt]) -> Vec<f64> {
    v.iter().flat_map(|x| x.to_point()).collect()
}

fn twice_inner(u: &[EisensteinInt], v: &[EisensteinInt]) -> i128 {
    u.iter().zip(v).map(|(x, y)| x.twice_inner(*y) as i128).sum()
}

fn flatten(v: &[EisensteinInt]) -> Vec<i64> {
    v.iter().flat_map(|x| [x.a, x.b]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    /// Plain coordinates in `Z^n`.
    Euclidean,
    /// Interleaved `(a, b)` pairs of `a + bω`; squared length is the norm sum.
    Eisenstein,
}

impl Metric {
    fn squared_norm(self, v: &[i64]) -> i128 {
        match self {
            Metric::Euclidean => v.iter().map(|&x| x as i128 * x as i128).sum(),
            Metric::Eisenstein => v
                .chunks_exact(2)
                .map(|c| {
                    let (a, b) = (c[0] as i128, c[1] as i128);
                    a * a - a * b + b * b
                })
                .sum(),
        }
    }

    fn inner(self, u: &[i64], v: &[i64]) -> f64 {
        match self {
            Metric::Euclidean => u.iter().zip(v).map(|(&x, &y)| x as f64 * y as f64).sum(),
            Metric::Eisenstein => {
                let twice: i128 = u
                    .chunks_exact(2)
                    .zip(v.chunks_exact(2))
                    .map(|(x, y)| EisensteinInt::new(x[0], x[1]).twice_inner(EisensteinInt::new(y[0], y[1])) as i128)
                    .sum();
                twice as f64 / 2.0
            }
        }
    }
}

/// One enumeration box: lattice coefficients in `lo..=hi` added to `offset`.
#[derive(Debug, Clone)]
struct SearchBox {
    offset: Vec<i64>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SearchBox {
    fn volume(&self) -> u128 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1).max(0) as u128)
            .product()
    }
}

struct DistanceSearch {
    gens: Vec<Vec<i64>>,
    metric: Metric,
    gram_inv: Vec<Vec<f64>>,
}

impl DistanceSearch {
    fn new(gens: Vec<Vec<i64>>, metric: Metric) -> Result<Self> {
        let gram: Vec<Vec<f64>> = gens
            .iter()
            .map(|u| gens.iter().map(|v| metric.inner(u, v)).collect())
            .collect();
        let gram_inv = invert(&gram).ok_or(Error::DegenerateBasis)?;
        Ok(Self { gens, metric, gram_inv })
    }

    /// Same lattice, LLL-reduced first so that certified boxes stay small.
    fn reduced(gens: Vec<Vec<i64>>, metric: Metric) -> Result<Self> {
        Self::new(lll(gens, metric), metric)
    }

    fn rank(&self) -> usize {
        self.gens.len()
    }

    /// Real coordinates of `v` (assumed in the span) w.r.t. the generators.
    fn coordinates(&self, v: &[i64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.gens.iter().map(|g| self.metric.inner(g, v)).collect();
        apply(&self.gram_inv, &rhs)
    }

    /// Per-coordinate radius of the coefficient region containing every
    /// vector of squared length at most `squared`.
    fn radii(&self, squared: i128) -> Vec<f64> {
        (0..self.rank())
            .map(|j| (squared as f64 * self.gram_inv[j][j]).max(0.0).sqrt())
            .collect()
    }

    fn add_scaled(&self, v: &mut [i64], j: usize, k: i64) {
        for (x, g) in v.iter_mut().zip(&self.gens[j]) {
            *x += k * g;
        }
    }

    /// Reduces every pairwise difference of `reps` into the fundamental
    /// parallelepiped (up to rounding on its faces) and removes duplicates.
    /// The zero difference is always first.
    fn reduced_differences(&self, reps: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let dim = reps.first().map_or(0, Vec::len);
        let zero = vec![0; dim];
        let mut seen = HashSet::new();
        seen.insert(zero.clone());
        let mut out = vec![zero];
        let reduced: Vec<Vec<i64>> = reps.iter().map(|r| self.reduce(r)).collect();
        for (i, u) in reduced.iter().enumerate() {
            for (j, v) in reduced.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d: Vec<i64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
                let d = self.reduce(&d);
                if seen.insert(d.clone()) {
                    out.push(d);
                }
            }
        }
        out
    }

    fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let coords = self.coordinates(v);
        let mut r = v.to_vec();
        for (j, c) in coords.iter().enumerate() {
            let k = c.floor() as i64;
            if k != 0 {
                self.add_scaled(&mut r, j, -k);
            }
        }
        r
    }

    fn lattice_min(&self, bound: i64) -> Result<MinDistance> {
        let zero = vec![0; self.gens[0].len()];
        self.boxed_min(&[zero], bound)
    }

    fn boxed_min(&self, diffs: &[Vec<i64>], bound: i64) -> Result<MinDistance> {
        let boxes: Vec<SearchBox> = diffs
            .iter()
            .map(|d| {
                let centre: Vec<i64> = self.coordinates(d).iter().map(|c| (-c).round() as i64).collect();
                SearchBox {
                    offset: d.clone(),
                    lo: centre.iter().map(|c| c - bound).collect(),
                    hi: centre.iter().map(|c| c + bound).collect(),
                }
            })
            .collect();
        let squared = self.min_over(&boxes)?;
        // A box certifies if it covers the whole region where a vector at
        // least as short as the result could live.
        let radii = self.radii(squared);
        let mut required = 0i64;
        for d in diffs {
            let coords = self.coordinates(d);
            for (j, c) in coords.iter().enumerate() {
                let centre = (-c).round();
                let need = ((centre + c).abs() + radii[j] - BOX_SLACK).ceil().max(0.0) as i64;
                required = required.max(need);
            }
        }
        Ok(MinDistance {
            squared,
            certified: bound >= required,
            required_bound: required,
        })
    }

    fn certified_min(&self, diffs: &[Vec<i64>], cap: u128) -> Result<MinDistance> {
        // Any generator is a lattice vector, and any nonzero difference is a
        // point difference, so either bounds the minimum from above.
        let mut upper = self
            .gens
            .iter()
            .map(|g| self.metric.squared_norm(g))
            .min()
            .expect("nonempty basis");
        for d in diffs.iter().skip(1) {
            upper = upper.min(self.metric.squared_norm(d));
        }
        let radii = self.radii(upper);
        let mut boxes = Vec::with_capacity(diffs.len());
        let mut required = 0i64;
        for d in diffs {
            let coords = self.coordinates(d);
            let lo: Vec<i64> = coords
                .iter()
                .zip(&radii)
                .map(|(c, r)| (-c - r - BOX_SLACK).ceil() as i64)
                .collect();
            let hi: Vec<i64> = coords
                .iter()
                .zip(&radii)
                .map(|(c, r)| (-c + r + BOX_SLACK).floor() as i64)
                .collect();
            for (j, c) in coords.iter().enumerate() {
                let centre = (-c).round() as i64;
                required = required.max((centre - lo[j]).max(hi[j] - centre));
            }
            boxes.push(SearchBox {
                offset: d.clone(),
                lo,
                hi,
            });
        }
        let total: u128 = boxes.iter().map(SearchBox::volume).sum();
        if total > cap {
            return Err(Error::CapExceeded {
                what: "distance enumeration",
                size: total,
                cap,
            });
        }
        let squared = self.min_over(&boxes)?.min(upper);
        Ok(MinDistance {
            squared,
            certified: true,
            required_bound: required.max(1),
        })
    }

    fn min_over(&self, boxes: &[SearchBox]) -> Result<i128> {
        let total: u128 = boxes.iter().map(SearchBox::volume).sum();
        if total > DEFAULT_ENUMERATION_CAP.saturating_mul(20) {
            return Err(Error::CapExceeded {
                what: "distance enumeration",
                size: total,
                cap: DEFAULT_ENUMERATION_CAP * 20,
            });
        }
        let best = map_min(boxes, |b| self.box_min(b));
        best.ok_or_else(|| Error::invalid("enumeration found no nonzero vector"))
    }

    /// Odometer walk over one box, updating the point incrementally.
    fn box_min(&self, b: &SearchBox) -> Option<i128> {
        let k = self.rank();
        if b.lo.iter().zip(&b.hi).any(|(l, h)| l > h) {
            return None;
        }
        let mut x = b.lo.clone();
        let mut v = b.offset.clone();
        for (j, &xj) in x.iter().enumerate().take(k) {
            self.add_scaled(&mut v, j, xj);
        }
        let mut best: Option<i128> = None;
        loop {
            let s = self.metric.squared_norm(&v);
            if s > 0 && best.is_none_or(|m| s < m) {
                best = Some(s);
            }
            let mut j = 0;
            loop {
                if j == k {
                    return best;
                }
                if x[j] < b.hi[j] {
                    x[j] += 1;
                    self.add_scaled(&mut v, j, 1);
                    break;
                }
                self.add_scaled(&mut v, j, b.lo[j] - b.hi[j]);
                x[j] = b.lo[j];
                j += 1;
            }
        }
    }
}

/// Gram–Schmidt coefficients `μ` and squared lengths `B` from inner products only.
fn gram_schmidt(b: &[Vec<i64>], metric: Metric) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut m = metric.inner(&b[i], &b[j]);
            for l in 0..j {
                m -= mu[j][l] * mu[i][l] * norms[l];
            }
            mu[i][j] = m / norms[j];
        }
        norms[i] = metric.inner(&b[i], &b[i]) - (0..i).map(|l| mu[i][l] * mu[i][l] * norms[l]).sum::<f64>();
    }
    (mu, norms)
}

/// LLL reduction with `δ = 0.99` of independent integer vectors.
fn lll(mut b: Vec<Vec<i64>>, metric: Metric) -> Vec<Vec<i64>> {
    const DELTA: f64 = 0.99;
    let n = b.len();
    let mut k = 1;
    // the ranks here are tiny, so Gram–Schmidt is simply recomputed
    let mut steps = 0;
    while k < n && steps < 100_000 {
        steps += 1;
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&b, metric);
            let q = mu[k][j].round() as i64;
            if q != 0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (mu, norms) = gram_schmidt(&b, metric);
        if norms[k] >= (DELTA - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    b
}

#[cfg(feature = "parallel")]
fn map_min<T: Sync>(items: &[T], f: impl Fn(&T) -> Option<i128> + Sync + Send) -> Option<i128> {
    use rayon::prelude::*;
    items.par_iter().filter_map(f).min()
}

#[cfg(not(feature = "parallel"))]
fn map_min<T>(items: &[T], f: impl Fn(&T) -> Option<i128>) -> Option<i128> {
    items.iter().filter_map(f).min()
}

/// Main Stirling term `-(N/2) log₂(N/(2πe)) - ½ log₂(Nπ)` of `log₂ V_N`.
pub fn stirling_log2_unit_ball_volume(n: u32) -> f64 {
    let n = n as f64;
    -0.5 * n * (n / (2.0 * PI * E)).log2() - 0.5 * (n * PI).log2()
}

/// `ε_N = stirling - log₂ V_N`, which satisfies `0 < ε_N < log₂(e)/(6N)`.
///
/// Computed as `log₂(e)·ρ(N/2)`, where `ρ(x) = ln Γ(x+1) - (x ln x - x + ½ ln 2πx)`
/// is the Stirling remainder: from its asymptotic series for `x ≥ 10`, and
/// from the exact factorial product below that.
pub fn stirling_correction(n: u32) -> f64 {
    assert!(n >= 1, "unit ball volume needs N >= 1");
    LOG2_E * stirling_remainder(n)
}

fn stirling_remainder(n: u32) -> f64 {
    let x = n as f64 / 2.0;
    if x >= 10.0 {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        inv / 12.0
            * (1.0
                - inv2 / 30.0 * (1.0 - inv2 * (2.0 / 7.0) * (1.0 - inv2 * (3.0 / 4.0) * (1.0 - inv2 * (140.0 / 99.0)))))
    } else {
        ln_gamma_half_integer(n) - (x * x.ln() - x + 0.5 * (2.0 * PI * x).ln())
    }
}

/// `ln Γ(N/2 + 1)` by direct products, for small `N`.
fn ln_gamma_half_integer(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        (1..=n / 2).map(|k| (k as f64).ln()).sum()
    } else {
        // Γ(m + 3/2) = √π · Π_{k=0}^{m} (k + 1/2)
        let m = (n - 1) / 2;
        0.5 * PI.ln() + (0..=m).map(|k| (k as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// `log₂ V_N` for the volume `V_N` of the unit ball in `R^N`.
pub fn log2_unit_ball_volume(n: u32) -> f64 {
    stirling_log2_unit_ball_volume(n) - stirling_correction(n)
}

pub fn unit_ball_volume(n: u32) -> f64 {
    log2_unit_ball_volume(n).exp2()
}

/// Density `Δ`, center density `δ` and density exponent `λ` of a packing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMetrics {
    pub density: f64,
    pub center_density: f64,
    pub exponent: f64,
    pub log2_density: f64,
}

/// `Δ = (d_E/2)^N V_N / det`, evaluated in log space.
pub fn density_metrics(min_distance: f64, det: f64, dim: u32) -> Result<DensityMetrics> {
    if !(min_distance > 0.0) || !(det > 0.0) || dim == 0 {
        return Err(Error::invalid("density needs d_E > 0, det > 0 and N >= 1"));
    }
    let n = dim as f64;
    let log2_center = n * (min_distance / 2.0).log2() - det.log2();
    let log2_density = log2_center + log2_unit_ball_volume(dim);
    Ok(DensityMetrics {
        density: log2_density.exp2(),
        center_density: log2_center.exp2(),
        exponent: log2_density / n,
        log2_density,
    })
}
