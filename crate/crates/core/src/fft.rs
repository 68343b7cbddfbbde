//! Radix-2 fast Fourier transform on torus sample grids.
//!
//! Forward transform produces analysis coefficients
//! `c_hat(k) = (1/M) sum_j c(j/M) e^{-2 pi i j k / M}` with bins stored in
//! the usual order `k = 0, 1, ..., M/2-1, -M/2, ..., -1`; the inverse
//! reconstructs samples exactly (up to rounding) for any input.

use num_complex::Complex64;

pub fn is_power_of_two(m: usize) -> bool {
    m >= 2 && m & (m - 1) == 0
}

/// In-place transform without normalization. `inverse` flips the twiddle sign.
fn transform(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    debug_assert!(is_power_of_two(n));

    // bit reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            data.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        for start in (0..n).step_by(len) {
            for j in 0..len / 2 {
                // direct trig per butterfly keeps twiddle error at machine level
                let w = Complex64::from_polar(1.0, ang * j as f64);
                let a = data[start + j];
                let b = data[start + j + len / 2] * w;
                data[start + j] = a + b;
                data[start + j + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Forward transform of samples to normalized coefficients, one axis.
pub fn forward(data: &mut [Complex64]) {
    let n = data.len();
    transform(data, false);
    let scale = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Inverse transform of normalized coefficients back to samples, one axis.
pub fn inverse(data: &mut [Complex64]) {
    transform(data, true);
}

/// Forward transform of an `m x m` row-major grid (both axes).
pub fn forward_2d(data: &mut [Complex64], m: usize) {
    debug_assert_eq!(data.len(), m * m);
    for row in data.chunks_mut(m) {
        forward(row);
    }
    let mut col = vec![Complex64::default(); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        forward(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
}

/// Map a signed frequency to its storage bin, valid for |k| <= m/2.
pub fn bin(k: i64, m: usize) -> usize {
    let m = m as i64;
    debug_assert!(2 * k.abs() <= m);
    (k.rem_euclid(m)) as usize
}
