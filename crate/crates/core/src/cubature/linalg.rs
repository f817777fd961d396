//! Dense symmetric matrices and a jittered Cholesky solve.

use crate::error::{Error, Result};
use crate::real::{Compensated, Real};

/// Dense symmetric matrix, row-major, full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    /// Builds the matrix from its rows; only `j ≤ i` entries of `row(i)` are
    /// read and mirrored.
    pub fn from_lower_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let mut data = vec![T::zero(); n * n];
        for (i, row) in rows.iter().enumerate() {
            for j in 0..=i {
                data[i * n + j] = row[j];
                data[j * n + i] = row[j];
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ A y` with compensated accumulation.
    pub fn quad_form(&self, x: &[T], y: &[T]) -> T {
        let mut acc = Compensated::new();
        for (i, xi) in x.iter().enumerate() {
            for (a, yj) in self.row(i).iter().zip(y) {
                acc.add(*xi * *a * *yj);
            }
        }
        acc.value()
    }
}

/// Four-way unrolled dot product.
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        s[0] = s[0] + a[k] * b[k];
        s[1] = s[1] + a[k + 1] * b[k + 1];
        s[2] = s[2] + a[k + 2] * b[k + 2];
        s[3] = s[3] + a[k + 3] * b[k + 3];
    }
    let mut tail = T::zero();
    for k in 4 * chunks..a.len() {
        tail = tail + a[k] * b[k];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// Lower Cholesky factor of `A + jitter·I`, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
    pub jitter: T,
}

impl<T: Real> Cholesky<T> {
    /// Plain factorization of `a + jitter·I`; `None` on a non-positive pivot.
    pub fn try_new(a: &SymMatrix<T>, jitter: T) -> Option<Self> {
        let n = a.n;
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let s = dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let v = a.get(i, j) - s;
                if i == j {
                    let pivot = v + jitter;
                    if !(pivot > T::zero()) {
                        return None;
                    }
                    l[i * n + i] = pivot.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Some(Self { n, l, jitter })
    }

    /// Factorization with jitter `start`, multiplied by ten up to
    /// `escalations` times.
    pub fn with_jitter(a: &SymMatrix<T>, start: T, escalations: usize) -> Result<Self> {
        let mut jitter = start;
        for attempt in 0..=escalations {
            if let Some(c) = Self::try_new(a, jitter) {
                return Ok(c);
            }
            if attempt < escalations {
                jitter = jitter * T::lit(10.0);
            }
        }
        Err(Error::Factorization {
            jitter: jitter.to_f(),
        })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

fn normalize<T: Real>(v: &mut [T]) -> T {
    let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if norm > T::zero() {
        v.iter_mut().for_each(|x| *x = *x / norm);
    }
    norm
}

/// Largest eigenvalue by power iteration and smallest (of the jittered
/// matrix) by inverse iteration with the factor; returns their ratio.
pub fn condition_estimate<T: Real>(a: &SymMatrix<T>, chol: &Cholesky<T>, iters: usize) -> T {
    let n = a.n;
    if n == 0 {
        return T::one();
    }
    // a fixed, non-symmetric start avoids orthogonality to the top vector
    let start: Vec<T> = (0..n)
        .map(|i| T::one() + T::of(i % 7) * T::lit(0.1))
        .collect();
    let mut v = start.clone();
    normalize(&mut v);
    let mut top = T::zero();
    for _ in 0..iters {
        let mut w = a.mul_vec(&v);
        top = normalize(&mut w);
        v = w;
    }
    let mut u = start;
    normalize(&mut u);
    let mut inv = T::zero();
    for _ in 0..iters {
        let mut w = chol.solve(&u);
        inv = normalize(&mut w);
        u = w;
    }
    (top + chol.jitter) * inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> SymMatrix<f64> {
        // Hilbert-like but well conditioned: 1/(1+|i−j|) + n on the diagonal
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        1.0 / (1.0 + (i as f64 - j as f64).abs())
                            + if i == j { n as f64 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        SymMatrix::from_lower_rows(rows)
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = spd(9);
        let x: Vec<f64> = (0..9).map(|i| i as f64 - 3.5).collect();
        let b = a.mul_vec(&x);
        let c = Cholesky::try_new(&a, 0.0).unwrap();
        for (u, v) in c.solve(&b).iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn jitter_rescues_singular_matrix() {
        // rank one: all ones
        let a = SymMatrix::from_lower_rows(vec![vec![1.0; 3]; 3]);
        assert!(Cholesky::try_new(&a, 0.0).is_none());
        let c = Cholesky::with_jitter(&a, 1e-12, 3).unwrap();
        assert!(c.jitter >= 1e-12);
        let neg = SymMatrix::from_lower_rows(vec![vec![-1.0]]);
        assert!(matches!(
            Cholesky::with_jitter(&neg, 1e-12, 3),
            Err(Error::Factorization { .. })
        ));
    }

    #[test]
    fn condition_of_diagonal() {
        let a =
            SymMatrix::<f64>::from_lower_rows(vec![vec![4.0], vec![0.0, 1.0], vec![0.0, 0.0, 0.5]]);
        let c = Cholesky::try_new(&a, 0.0).unwrap();
        assert!((condition_estimate(&a, &c, 200) - 8.0).abs() < 1e-6);
    }
}
