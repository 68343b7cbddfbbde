//! Dense complex linear algebra: vectors, matrices, LU solves.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Inner product, conjugate-linear in the first argument.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Row-major square complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::default(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Column `j` as a fresh vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |a_ij - conj(a_ji)| over all pairs.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Subtract `shift` from the diagonal, returning a new matrix.
    /// The matrix with `shift` added to every diagonal entry.
    pub fn shifted(&self, shift: f64) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            let v = out.get(i, i) + shift;
            out.set(i, i, v);
        }
        out
    }

    /// Add the rank-one term `v v^H`.
    pub fn add_outer(&mut self, v: &[Complex64]) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let t = v[i] * v[j].conj();
                self.data[i * self.n + j] += t;
            }
        }
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<LuFactors> {
        let n = self.n;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for col in 0..n {
            let mut best = col;
            let mut best_mag = lu[col * n + col].norm();
            for r in col + 1..n {
                let mag = lu[r * n + col].norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best != col {
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
            }
            let pivot = lu[col * n + col];
            let mag = pivot.norm();
            min_pivot = min_pivot.min(mag);
            max_pivot = max_pivot.max(mag);
            if mag == 0.0 {
                return Err(Error::IllConditioned { ratio: 0.0 });
            }
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                for j in col + 1..n {
                    let sub = factor * lu[col * n + j];
                    lu[r * n + j] -= sub;
                }
            }
        }
        let ratio = min_pivot / max_pivot;
        if ratio < 1e-14 {
            return Err(Error::IllConditioned { ratio });
        }
        Ok(LuFactors { n, lu, perm, pivot_ratio: ratio })
    }
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    pub pivot_ratio: f64,
}

impl LuFactors {
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert_eq!(rhs.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }
}
