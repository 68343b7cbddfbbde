//! Shifted cell operator on the torus and its band structure.
//!
//! For quasi-momentum `theta` the operator
//!
//! ```text
//! A(theta) psi = -(div + 2 i pi theta) . ( sigma(y) (grad + 2 i pi theta) psi ) + c(y) psi
//! ```
//!
//! acts on periodic functions. In the plane-wave basis `e^{2 pi i k . y}` its
//! matrix entries are
//!
//! ```text
//! A[k, k'] = 4 pi^2 (k + theta) . sigma_hat(k - k') (k' + theta) + c_hat(k - k')
//! ```
//!
//! which is Hermitian because `sigma` is real symmetric and `c` real. Bands
//! `lambda_n(theta)` are the sorted eigenvalues; the module also provides
//! finite-difference band derivatives and a damped Newton search for interior
//! critical points of a simple band.

use crate::basis::WaveBasis;
use crate::error::{Error, Result};
use crate::fields::{validate_coercivity, MatrixField, PeriodicField};
use crate::jacobi::hermitian_eigen;
use crate::linalg::{norm, CMatrix};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Fourier coefficients of one field over the offset window `|q|_inf <= half`.
#[derive(Debug, Clone)]
pub(crate) struct OffsetTable {
    dim: usize,
    half: i64,
    data: Vec<Complex64>,
}

impl OffsetTable {
    pub(crate) fn build(field: &PeriodicField, half: i64) -> Result<Self> {
        let m = field.resolution();
        if 2 * half > m as i64 {
            return Err(Error::CutoffExceedsResolution {
                cutoff: half / 2,
                m,
                needed: half,
            });
        }
        let dim = field.dim();
        let side = (2 * half + 1) as usize;
        let mut data = vec![Complex64::default(); side.pow(dim as u32)];
        match dim {
            1 => {
                for q in -half..=half {
                    data[(q + half) as usize] = field.fourier([q, 0]);
                }
            }
            _ => {
                for q0 in -half..=half {
                    for q1 in -half..=half {
                        data[(q0 + half) as usize * side + (q1 + half) as usize] =
                            field.fourier([q0, q1]);
                    }
                }
            }
        }
        Ok(OffsetTable { dim, half, data })
    }

    #[inline]
    pub(crate) fn get(&self, q: [i64; 2]) -> Complex64 {
        if q[0].abs() > self.half || (self.dim == 2 && q[1].abs() > self.half) {
            return Complex64::default();
        }
        match self.dim {
            1 => self.data[(q[0] + self.half) as usize],
            _ => {
                let side = (2 * self.half + 1) as usize;
                self.data[(q[0] + self.half) as usize * side + (q[1] + self.half) as usize]
            }
        }
    }
}

/// Assembled Hermitian matrix of the shifted cell operator at one
/// quasi-momentum, together with the coefficient spectra needed to apply
/// the first-order (corrector) operators in the same basis.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    basis: WaveBasis,
    theta: [f64; 2],
    matrix: CMatrix,
    sigma_hat: Vec<OffsetTable>, // [s11] in 1D, [s11, s12, s22] in 2D
}

impl BlochOperator {
    pub fn assemble(
        sigma: &MatrixField,
        c: &PeriodicField,
        cutoff: i64,
        theta: [f64; 2],
    ) -> Result<Self> {
        let dim = sigma.dim();
        assert_eq!(c.dim(), dim, "sigma and c must share a dimension");
        validate_coercivity(sigma)?;
        let basis = WaveBasis::new(dim, cutoff)?;
        let window = 2 * cutoff;

        let mut sigma_hat = Vec::new();
        match dim {
            1 => sigma_hat.push(OffsetTable::build(sigma.entry(0, 0), window)?),
            _ => {
                sigma_hat.push(OffsetTable::build(sigma.entry(0, 0), window)?);
                sigma_hat.push(OffsetTable::build(sigma.entry(0, 1), window)?);
                sigma_hat.push(OffsetTable::build(sigma.entry(1, 1), window)?);
            }
        }
        let c_hat = OffsetTable::build(c, window)?;

        let k = basis.len();
        let mut matrix = CMatrix::zeros(k);
        let points = basis.points();
        for (i, ki) in points.iter().enumerate() {
            let si = [ki[0] as f64 + theta[0], ki[1] as f64 + theta[1]];
            for (j, kj) in points.iter().enumerate() {
                let q = [ki[0] - kj[0], ki[1] - kj[1]];
                let sj = [kj[0] as f64 + theta[0], kj[1] as f64 + theta[1]];
                let mut quad = Complex64::default();
                for a in 0..dim {
                    for b in 0..dim {
                        let tab = sigma_table(&sigma_hat, dim, a, b);
                        quad += tab.get(q) * (si[a] * sj[b]);
                    }
                }
                matrix.set(i, j, FOUR_PI_SQ * quad + c_hat.get(q));
            }
        }

        let dev = matrix.hermitian_deviation();
        let scale = matrix.frobenius().max(1.0);
        if dev > 1e-12 * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }

        Ok(BlochOperator { basis, theta, matrix, sigma_hat })
    }

    pub fn basis(&self) -> &WaveBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn theta(&self) -> [f64; 2] {
        self.theta
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub(crate) fn sigma_table(&self, a: usize, b: usize) -> &OffsetTable {
        sigma_table(&self.sigma_hat, self.dim(), a, b)
    }

    pub fn solve_spectrum(&self) -> Result<Spectrum> {
        let eig = hermitian_eigen(&self.matrix)?;
        let k = self.basis.len();
        let mut vectors = eig.vectors;

        // phase convention: largest-modulus coefficient real and positive,
        // ties broken by the first such index
        for col in 0..k {
            let mut best = 0;
            let mut best_mag = 0.0;
            for row in 0..k {
                let mag = vectors.get(row, col).norm();
                if mag > best_mag {
                    best_mag = mag;
                    best = row;
                }
            }
            if best_mag > 0.0 {
                let lead = vectors.get(best, col);
                let rot = lead.conj() / best_mag;
                for row in 0..k {
                    let v = vectors.get(row, col) * rot;
                    vectors.set(row, col, v);
                }
            }
        }

        // certify the eigen residual for every returned column
        let fro = self.matrix.frobenius();
        let mut residuals = Vec::with_capacity(k);
        for col in 0..k {
            let v = vectors.column(col);
            let av = self.matrix.matvec(&v);
            let r: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y * eig.values[col]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if r > 1e-10 * fro.max(1.0) {
                return Err(Error::EigensolveStalled { sweeps: 0, off: r });
            }
            residuals.push(r);
        }

        Ok(Spectrum {
            values: eig.values,
            vectors,
            residuals,
            basis: self.basis.clone(),
            theta: self.theta,
        })
    }

    /// `(A - lambda) x - rhs` residual, relative to `|rhs|` when nonzero.
    pub fn shifted_residual(&self, lambda: f64, x: &[Complex64], rhs: &[Complex64]) -> f64 {
        let ax = self.matrix.matvec(x);
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += (ax[i] - lambda * x[i] - rhs[i]).norm_sqr();
        }
        let res = acc.sqrt();
        let scale = norm(rhs);
        if scale > 0.0 {
            res / scale
        } else {
            res
        }
    }

    /// First-order coupling operator along axis `axis`:
    /// `L_a w = e_a . sigma (grad + 2 i pi theta) w + (div + 2 i pi theta) (sigma e_a w)`.
    pub fn first_order_apply(&self, axis: usize, w: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        let points = self.basis.points();
        let theta = self.theta;
        let mut out = vec![Complex64::default(); w.len()];
        for (i, ki) in points.iter().enumerate() {
            let mi = [ki[0] as f64 + theta[0], ki[1] as f64 + theta[1]];
            let mut acc = Complex64::default();
            for (j, kj) in points.iter().enumerate() {
                if w[j].norm_sqr() == 0.0 {
                    continue;
                }
                let q = [ki[0] - kj[0], ki[1] - kj[1]];
                let mj = [kj[0] as f64 + theta[0], kj[1] as f64 + theta[1]];
                let mut coef = Complex64::default();
                for a in 0..dim {
                    coef += self.sigma_table(axis, a).get(q) * mj[a]
                        + self.sigma_table(a, axis).get(q) * mi[a];
                }
                acc += coef * w[j];
            }
            out[i] = Complex64::new(0.0, TWO_PI) * acc;
        }
        out
    }

    /// Multiplication by the coefficient entry `sigma_ab` as a convolution
    /// in the plane-wave basis.
    pub fn sigma_multiply(&self, a: usize, b: usize, w: &[Complex64]) -> Vec<Complex64> {
        let tab = self.sigma_table(a, b);
        let points = self.basis.points();
        let mut out = vec![Complex64::default(); w.len()];
        for (i, ki) in points.iter().enumerate() {
            let mut acc = Complex64::default();
            for (j, kj) in points.iter().enumerate() {
                acc += tab.get([ki[0] - kj[0], ki[1] - kj[1]]) * w[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Weighted pairing `sum_{m,m'} conj(f_m) sigma_hat_ab(m - m') g_m'`,
    /// the exact integral of `conj(f) sigma_ab g` over the torus.
    pub fn sigma_weighted_inner(
        &self,
        a: usize,
        b: usize,
        f: &[Complex64],
        g: &[Complex64],
    ) -> Complex64 {
        table_inner(self.sigma_table(a, b), &self.basis, f, g)
    }

    /// Component of the shifted gradient: `((d/dy_a) + 2 i pi theta_a) w`.
    pub fn shifted_gradient(&self, axis: usize, w: &[Complex64]) -> Vec<Complex64> {
        let theta = self.theta;
        self.basis
            .points()
            .iter()
            .zip(w)
            .map(|(k, &v)| Complex64::new(0.0, TWO_PI * (k[axis] as f64 + theta[axis])) * v)
            .collect()
    }
}

fn sigma_table<'a>(tables: &'a [OffsetTable], dim: usize, a: usize, b: usize) -> &'a OffsetTable {
    match dim {
        1 => &tables[0],
        _ => match (a, b) {
            (0, 0) => &tables[0],
            (1, 1) => &tables[2],
            _ => &tables[1],
        },
    }
}

pub(crate) fn table_inner(
    tab: &OffsetTable,
    basis: &WaveBasis,
    f: &[Complex64],
    g: &[Complex64],
) -> Complex64 {
    let points = basis.points();
    let mut acc = Complex64::default();
    for (i, ki) in points.iter().enumerate() {
        if f[i].norm_sqr() == 0.0 {
            continue;
        }
        let mut row = Complex64::default();
        for (j, kj) in points.iter().enumerate() {
            let q = [ki[0] - kj[0], ki[1] - kj[1]];
            row += tab.get(q) * g[j];
        }
        acc += f[i].conj() * row;
    }
    acc
}

/// Full eigendecomposition at one quasi-momentum: sorted values, phase-fixed
/// orthonormal vectors, certified residuals.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: CMatrix,
    residuals: Vec<f64>,
    basis: WaveBasis,
    theta: [f64; 2],
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Band eigenvalue, 1-based.
    pub fn value(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Extract band `n` (1-based) as an owned eigenpair.
    pub fn pair(&self, n: usize) -> BlochEigenpair {
        BlochEigenpair {
            band: n,
            theta: self.theta,
            lambda: self.values[n - 1],
            coeffs: self.vectors.column(n - 1),
            residual: self.residuals[n - 1],
            basis: self.basis.clone(),
        }
    }

    /// Distance to the band below (None for the lowest band).
    pub fn gap_below(&self, n: usize) -> Option<f64> {
        (n >= 2).then(|| self.values[n - 1] - self.values[n - 2])
    }

    /// Distance to the band above (None at the top of the computed range).
    pub fn gap_above(&self, n: usize) -> Option<f64> {
        (n < self.values.len()).then(|| self.values[n] - self.values[n - 1])
    }
}

/// One band eigenpair: `A(theta) psi = lambda psi`, unit L2 norm,
/// phase-fixed coefficients.
#[derive(Debug, Clone)]
pub struct BlochEigenpair {
    band: usize,
    theta: [f64; 2],
    lambda: f64,
    coeffs: Vec<Complex64>,
    residual: f64,
    basis: WaveBasis,
}

impl BlochEigenpair {
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn theta(&self) -> [f64; 2] {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn basis(&self) -> &WaveBasis {
        &self.basis
    }

    pub fn coefficient(&self, k: [i64; 2]) -> Complex64 {
        self.basis
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Gauge rotation: multiply the eigenfunction by a unit-modulus phase.
    /// Downstream effective quantities must not depend on this.
    pub fn rotated(&self, phase: Complex64) -> BlochEigenpair {
        let scale = phase / phase.norm();
        BlochEigenpair {
            band: self.band,
            theta: self.theta,
            lambda: self.lambda,
            coeffs: self.coeffs.iter().map(|&c| c * scale).collect(),
            residual: self.residual,
            basis: self.basis.clone(),
        }
    }

    /// Evaluate the eigenfunction at a point of the torus.
    pub fn eval(&self, y: [f64; 2]) -> Complex64 {
        let mut acc = Complex64::default();
        for (k, c) in self.basis.points().iter().zip(&self.coeffs) {
            let phase = TWO_PI * (k[0] as f64 * y[0] + k[1] as f64 * y[1]);
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }
}

/// Memoizing band evaluator: one owner of the coefficient fields, repeated
/// spectra at nearby quasi-momenta (finite differences, Newton steps) are
/// solved once each.
pub struct BandSolver {
    sigma: MatrixField,
    c: PeriodicField,
    cutoff: i64,
    cache: Mutex<HashMap<(u64, u64), Arc<Spectrum>>>,
}

impl BandSolver {
    pub fn new(sigma: MatrixField, c: PeriodicField, cutoff: i64) -> Self {
        BandSolver { sigma, c, cutoff, cache: Mutex::new(HashMap::new()) }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn operator(&self, theta: [f64; 2]) -> Result<BlochOperator> {
        BlochOperator::assemble(&self.sigma, &self.c, self.cutoff, theta)
    }

    pub fn spectrum(&self, theta: [f64; 2]) -> Result<Arc<Spectrum>> {
        let key = (theta[0].to_bits(), theta[1].to_bits());
        if let Some(s) = self.cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let spectrum = Arc::new(self.operator(theta)?.solve_spectrum()?);
        self.cache.lock().unwrap().insert(key, spectrum.clone());
        Ok(spectrum)
    }

    pub fn lambda(&self, n: usize, theta: [f64; 2]) -> Result<f64> {
        Ok(self.spectrum(theta)?.value(n))
    }

    /// Band value with a simplicity check against the neighboring bands.
    pub fn lambda_simple(&self, n: usize, theta: [f64; 2], gap_tol: f64) -> Result<f64> {
        let s = self.spectrum(theta)?;
        let gap = [s.gap_below(n), s.gap_above(n)]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        if gap < gap_tol {
            return Err(Error::BandCrossing { band: n, gap, tol: gap_tol });
        }
        Ok(s.value(n))
    }
}

/// Central-difference band gradient with one Richardson refinement.
pub fn band_gradient(
    solver: &BandSolver,
    n: usize,
    theta: [f64; 2],
    h: f64,
    gap_tol: f64,
) -> Result<[f64; 2]> {
    let dim = solver.dim();
    let mut grad = [0.0; 2];
    for a in 0..dim {
        let diff = |step: f64| -> Result<f64> {
            let mut plus = theta;
            plus[a] += step;
            let mut minus = theta;
            minus[a] -= step;
            Ok((solver.lambda_simple(n, plus, gap_tol)?
                - solver.lambda_simple(n, minus, gap_tol)?)
                / (2.0 * step))
        };
        let d_h = diff(h)?;
        let d_h2 = diff(h / 2.0)?;
        grad[a] = (4.0 * d_h2 - d_h) / 3.0;
    }
    Ok(grad)
}

/// Central-difference band Hessian; one Richardson refinement when
/// `richardson` is set.
pub fn band_hessian(
    solver: &BandSolver,
    n: usize,
    theta: [f64; 2],
    h: f64,
    gap_tol: f64,
    richardson: bool,
) -> Result<[[f64; 2]; 2]> {
    let dim = solver.dim();
    let at = |t: [f64; 2]| solver.lambda_simple(n, t, gap_tol);
    let entry = |step: f64| -> Result<[[f64; 2]; 2]> {
        let mut hess = [[0.0; 2]; 2];
        let center = at(theta)?;
        for a in 0..dim {
            let mut plus = theta;
            plus[a] += step;
            let mut minus = theta;
            minus[a] -= step;
            hess[a][a] = (at(plus)? - 2.0 * center + at(minus)?) / (step * step);
        }
        if dim == 2 {
            let eval_pm = |s0: f64, s1: f64| -> Result<f64> {
                at([theta[0] + s0, theta[1] + s1])
            };
            let cross = (eval_pm(step, step)? - eval_pm(step, -step)?
                - eval_pm(-step, step)?
                + eval_pm(-step, -step)?)
                / (4.0 * step * step);
            hess[0][1] = cross;
            hess[1][0] = cross;
        }
        Ok(hess)
    };
    let h_full = entry(h)?;
    if !richardson {
        return Ok(h_full);
    }
    let h_half = entry(h / 2.0)?;
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = (4.0 * h_half[a][b] - h_full[a][b]) / 3.0;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Minimum,
    Maximum,
    Saddle,
}

/// Certified interior critical point of one band.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub theta: [f64; 2],
    pub band: usize,
    pub lambda: f64,
    pub grad_norm: f64,
    pub gap_below: Option<f64>,
    pub gap_above: Option<f64>,
    pub hessian: [[f64; 2]; 2],
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub grad_tol: f64,
    pub gap_tol: f64,
    /// FD step for gradients and Newton Hessians.
    pub fd_step: f64,
    /// FD step for the certified Hessian reported on the result.
    pub hessian_step: f64,
    pub max_iters: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grad_tol: 1e-8,
            gap_tol: 1e-6,
            fd_step: 1e-3,
            hessian_step: 1e-2,
            max_iters: 60,
        }
    }
}

fn wrap_half(x: f64) -> f64 {
    let w = x - x.round();
    // round() sends 0.5 to 1, keeping the representative in [-1/2, 1/2)
    if w == 0.5 {
        -0.5
    } else {
        w
    }
}

/// Damped Newton search for a critical point of band `n` from a seed
/// quasi-momentum. The result carries the certificate data: gradient norm,
/// spectral gaps, and the (non-degenerate) Hessian classification.
pub fn find_critical_point(
    solver: &BandSolver,
    n: usize,
    seed: [f64; 2],
    opts: &SearchOptions,
) -> Result<CriticalPoint> {
    let dim = solver.dim();
    let mut theta = seed;
    if dim == 1 {
        theta[1] = 0.0;
    }

    let grad_norm_at = |t: [f64; 2]| -> Result<([f64; 2], f64)> {
        let g = band_gradient(solver, n, t, opts.fd_step, opts.gap_tol)?;
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        Ok((g, gn))
    };

    let (mut grad, mut gnorm) = grad_norm_at(theta)?;
    let mut converged = gnorm <= opts.grad_tol;
    let mut iters = 0;

    while !converged {
        if iters >= opts.max_iters {
            return Err(Error::SearchStalled { iters, grad_norm: gnorm });
        }
        iters += 1;

        let hess = band_hessian(solver, n, theta, opts.fd_step, opts.gap_tol, false)?;
        let step = newton_step(dim, &hess, &grad)
            .ok_or(Error::SearchStalled { iters, grad_norm: gnorm })?;

        // damped line search on the gradient norm, halving until it decreases
        let mut t = 1.0;
        loop {
            let trial = [theta[0] + t * step[0], theta[1] + t * step[1]];
            let (g_trial, gn_trial) = grad_norm_at(trial)?;
            if gn_trial < gnorm || gn_trial <= opts.grad_tol {
                theta = trial;
                grad = g_trial;
                gnorm = gn_trial;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return Err(Error::SearchStalled { iters, grad_norm: gnorm });
            }
        }
        converged = gnorm <= opts.grad_tol;
    }

    // certification at the converged point
    let spectrum = solver.spectrum(theta)?;
    let lambda = spectrum.value(n);
    let gap_below = spectrum.gap_below(n);
    let gap_above = spectrum.gap_above(n);
    for gap in [gap_below, gap_above].into_iter().flatten() {
        if gap < opts.gap_tol {
            return Err(Error::BandCrossing { band: n, gap, tol: opts.gap_tol });
        }
    }

    let hessian = band_hessian(solver, n, theta, opts.hessian_step, opts.gap_tol, true)?;
    let (e1, e2) = hessian_eigenvalues(dim, &hessian);
    let scale = e1.abs().max(e2.abs()).max(1.0);
    let degeneracy_tol = 1e-6 * scale;
    if e1.abs() < degeneracy_tol || (dim == 2 && e2.abs() < degeneracy_tol) {
        return Err(Error::DegenerateCriticalPoint { eig: e1.abs().min(e2.abs()) });
    }
    let classification = match dim {
        1 => {
            if e1 > 0.0 {
                Classification::Minimum
            } else {
                Classification::Maximum
            }
        }
        _ => {
            if e1 > 0.0 && e2 > 0.0 {
                Classification::Minimum
            } else if e1 < 0.0 && e2 < 0.0 {
                Classification::Maximum
            } else {
                Classification::Saddle
            }
        }
    };

    let mut canonical = [wrap_half(theta[0]), wrap_half(theta[1])];
    if dim == 1 {
        canonical[1] = 0.0;
    }

    Ok(CriticalPoint {
        theta: canonical,
        band: n,
        lambda,
        grad_norm: gnorm,
        gap_below,
        gap_above,
        hessian,
        classification,
    })
}

fn newton_step(dim: usize, hess: &[[f64; 2]; 2], grad: &[f64; 2]) -> Option<[f64; 2]> {
    match dim {
        1 => {
            if hess[0][0].abs() < 1e-300 {
                None
            } else {
                Some([-grad[0] / hess[0][0], 0.0])
            }
        }
        _ => {
            let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
            if det.abs() < 1e-300 {
                return None;
            }
            Some([
                -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det,
                -(hess[0][0] * grad[1] - hess[1][0] * grad[0]) / det,
            ])
        }
    }
}

fn hessian_eigenvalues(dim: usize, h: &[[f64; 2]; 2]) -> (f64, f64) {
    match dim {
        1 => (h[0][0], h[0][0]),
        _ => {
            let mid = 0.5 * (h[0][0] + h[1][1]);
            let rad = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[1][0]).sqrt();
            (mid - rad, mid + rad)
        }
    }
}
