//! Small numerical kernels shared by the lattice and bound modules.

use crate::{Error, Result};

/// Neumaier's variant of Kahan summation.
///
/// The running compensation also captures the low-order bits lost when a
/// summand is larger in magnitude than the partial sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// All primes `p <= limit` in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&p| is_prime(p)).collect()
}

/// Exact determinant of a square integer matrix by Bareiss fraction-free
/// elimination. Every intermediate value is a minor of the input, so the
/// only failure mode is genuine overflow of `i128`.
pub fn bareiss_det(matrix: &[Vec<i128>]) -> Result<i128> {
    let n = matrix.len();
    if n == 0 {
        return Ok(1);
    }
    let mut m: Vec<Vec<i128>> = matrix.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return Ok(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let lhs = m[i][j].checked_mul(m[k][k]).ok_or(Error::Overflow("bareiss_det"))?;
                let rhs = m[i][k].checked_mul(m[k][j]).ok_or(Error::Overflow("bareiss_det"))?;
                let num = lhs.checked_sub(rhs).ok_or(Error::Overflow("bareiss_det"))?;
                m[i][j] = num / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Inverse of a symmetric positive-definite matrix by Gauss–Jordan
/// elimination with partial pivoting. Returns `None` for singular input.
pub fn invert(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    let pivot = a[col].clone();
                    for (x, p) in a[row].iter_mut().zip(&pivot) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `matrix * x = rhs` using a precomputed inverse.
pub(crate) fn apply(inverse: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    inverse
        .iter()
        .map(|row| row.iter().zip(rhs).map(|(a, b)| a * b).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = xs.iter().sum();
        let comp: CompensatedSum = xs.iter().copied().collect();
        assert_eq!(naive, 0.0);
        assert_eq!(comp.value(), 2.0);
    }

    #[test]
    fn primes() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(100).len(), 25);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1));
        assert!(!is_prime(91));
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(bareiss_det(&m).unwrap(), 4);
        let m = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(bareiss_det(&m).unwrap(), -1);
        let m = vec![vec![1, 2], vec![2, 4]];
        assert_eq!(bareiss_det(&m).unwrap(), 0);
    }

    #[test]
    fn inverse_of_hexagonal_gram() {
        let g = vec![vec![1.0, -0.5], vec![-0.5, 1.0]];
        let inv = invert(&g).unwrap();
        assert!((inv[0][0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((inv[0][1] - 2.0 / 3.0).abs() < 1e-14);
        assert!(invert(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_none());
    }
}
