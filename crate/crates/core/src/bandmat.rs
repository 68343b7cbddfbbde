//! Real banded LU factorization without pivoting.
//!
//! The implicit time-stepping matrices are symmetric with positive diagonal
//! in the well-posed regime, so plain Doolittle elimination inside the band
//! is adequate; the factorization monitors the smallest pivot magnitude and
//! refuses when it underflows the diagonal scale, which is how an indefinite
//! stiff potential manifests.

use crate::error::{Error, Result};

/// Square band matrix: row `i` holds columns `i - kl ..= i + ku`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>, // row-major, width kl + ku + 1
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Multiply by a vector (used by tests to validate factorizations).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Factor in place. The pivot floor is relative to the largest diagonal
    /// entry of the unfactored matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let mut diag_scale = 0.0_f64;
        for i in 0..n {
            diag_scale = diag_scale.max(self.get(i, i).abs());
        }
        let floor = 1e-12 * diag_scale.max(1.0);

        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let pivot = self.get(k, k);
            min_pivot = min_pivot.min(pivot.abs());
            if pivot.abs() <= floor {
                return Err(Error::SingularTimeStep { min_pivot: pivot.abs() });
            }
            let i_hi = (k + self.kl).min(n - 1);
            let j_hi = (k + self.ku).min(n - 1);
            // elimination stays inside the band: j - i <= ku - 1 and
            // i - j <= kl - 1 throughout this double loop
            for i in (k + 1)..=i_hi {
                let m = self.get(i, k) / pivot;
                self.set(i, k, m);
                for j in (k + 1)..=j_hi {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        self.add(i, j, -m * v);
                    }
                }
            }
        }
        Ok(BandLu { mat: self, min_pivot })
    }
}

/// Factored form; solves share the band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    min_pivot: f64,
}

impl BandLu {
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn n(&self) -> usize {
        self.mat.n
    }

    /// Solve in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.mat.n;
        assert_eq!(b.len(), n);
        // forward: L has unit diagonal
        for i in 1..n {
            let lo = i.saturating_sub(self.mat.kl);
            let mut acc = b[i];
            for j in lo..i {
                acc -= self.mat.data[self.mat.slot(i, j)] * b[j];
            }
            b[i] = acc;
        }
        // backward
        for i in (0..n).rev() {
            let hi = (i + self.mat.ku).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=hi {
                acc -= self.mat.data[self.mat.slot(i, j)] * b[j];
            }
            b[i] = acc / self.mat.data[self.mat.slot(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_round_trips() {
        let n = 64;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.5);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.matvec(&x_true);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn wide_band_solve_round_trips() {
        let n = 40;
        let kl = 7;
        let mut a = BandMatrix::zeros(n, kl, kl);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + kl).min(n - 1) {
                let v = if i == j { 20.0 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) };
                a.set(i, j, v);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 - 0.03 * i as f64).collect();
        let mut b = a.matvec(&x_true);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-11, "entry {i}: {}", b[i]);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 0.0);
        a.set(2, 2, 1.0);
        assert!(matches!(a.factor(), Err(Error::SingularTimeStep { .. })));
    }

    #[test]
    fn indefinite_but_regular_matrix_factors() {
        let n = 8;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, if i % 2 == 0 { 3.0 } else { -3.0 });
            if i > 0 {
                a.set(i, i - 1, 0.5);
            }
            if i + 1 < n {
                a.set(i, i + 1, 0.5);
            }
        }
        let x_true = vec![1.0; n];
        let mut b = a.matvec(&x_true);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        for v in &b {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(lu.min_pivot() > 2.0);
    }
}
