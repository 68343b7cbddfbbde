//! Coefficient fields: periodic (fast variable), two-scale, and macroscopic.
//!
//! A `PeriodicField` keeps both its samples on a power-of-two torus grid and
//! the discrete Fourier coefficients of those samples, so spectral assembly
//! and pointwise evaluation stay consistent with each other by construction.

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, Var};
use crate::fft;
use num_complex::Complex64;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Real scalar field on the unit torus, sampled on an `m^dim` grid.
#[derive(Debug, Clone)]
pub struct PeriodicField {
    dim: usize,
    m: usize,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl PeriodicField {
    pub fn from_samples(dim: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::BadDimension { dim });
        }
        if !fft::is_power_of_two(m) {
            return Err(Error::BadResolution { m });
        }
        let expect = m.pow(dim as u32);
        assert_eq!(values.len(), expect, "sample count mismatch");
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { context: format!("grid node {i}") });
            }
        }
        let mut coeffs: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        match dim {
            1 => fft::forward(&mut coeffs),
            _ => fft::forward_2d(&mut coeffs, m),
        }
        Ok(PeriodicField { dim, m, values, coeffs })
    }

    pub fn from_fn(dim: usize, m: usize, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let nodes: Vec<f64> = match dim {
            1 => (0..m).map(|j| f([j as f64 / m as f64, 0.0])).collect(),
            _ => {
                let mut v = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        v.push(f([i as f64 / m as f64, j as f64 / m as f64]));
                    }
                }
                v
            }
        };
        Self::from_samples(dim, m, nodes)
    }

    pub fn from_expr(src: &str, dim: usize, m: usize) -> Result<Self> {
        let expr = Expr::parse(src)?;
        if expr.uses_slow() {
            return Err(Error::ExprBadVariable { var: "x1/x2".to_string() });
        }
        if dim == 1 && expr.uses_var(Var::Y2) {
            return Err(Error::ExprBadVariable { var: "y2".to_string() });
        }
        // evaluation failures surface as non-finite samples below
        Self::from_fn(dim, m, |y| {
            expr.eval(&Bindings { x: None, y: Some(y) }).unwrap_or(f64::NAN)
        })
    }

    pub fn constant(value: f64, dim: usize, m: usize) -> Result<Self> {
        Self::from_fn(dim, m, |_| value)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Fourier coefficient at signed frequency `k`; zero outside the
    /// resolved band `|k_i| <= m/2`.
    pub fn fourier(&self, k: [i64; 2]) -> Complex64 {
        let half = (self.m / 2) as i64;
        if k[0].abs() > half || (self.dim == 2 && k[1].abs() > half) {
            return Complex64::default();
        }
        if self.dim == 1 {
            if k[1] != 0 {
                return Complex64::default();
            }
            self.coeffs[fft::bin(k[0], self.m)]
        } else {
            self.coeffs[fft::bin(k[0], self.m) * self.m + fft::bin(k[1], self.m)]
        }
    }

    /// Largest `|k|_inf` carrying spectral mass above a relative floor.
    pub fn bandwidth(&self) -> i64 {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0;
        }
        let floor = 1e-13 * peak;
        let half = (self.m / 2) as i64;
        let mut bw = 0i64;
        match self.dim {
            1 => {
                for k in -half..half {
                    if self.fourier([k, 0]).norm() > floor {
                        bw = bw.max(k.abs());
                    }
                }
            }
            _ => {
                for k0 in -half..half {
                    for k1 in -half..half {
                        if self.fourier([k0, k1]).norm() > floor {
                            bw = bw.max(k0.abs().max(k1.abs()));
                        }
                    }
                }
            }
        }
        bw
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point
    /// (exact for band-limited fields).
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        let m = self.m as i64;
        let half = m / 2;
        let mut acc = Complex64::default();
        match self.dim {
            1 => {
                for b in 0..self.m {
                    let f = if (b as i64) < half { b as i64 } else { b as i64 - m };
                    acc += self.coeffs[b] * Complex64::from_polar(1.0, TWO_PI * f as f64 * y[0]);
                }
            }
            _ => {
                for b0 in 0..self.m {
                    let f0 = if (b0 as i64) < half { b0 as i64 } else { b0 as i64 - m };
                    let w0 = Complex64::from_polar(1.0, TWO_PI * f0 as f64 * y[0]);
                    for b1 in 0..self.m {
                        let f1 = if (b1 as i64) < half { b1 as i64 } else { b1 as i64 - m };
                        acc += self.coeffs[b0 * self.m + b1]
                            * w0
                            * Complex64::from_polar(1.0, TWO_PI * f1 as f64 * y[1]);
                    }
                }
            }
        }
        acc.re
    }

    /// Shift the field by a constant (used to re-gauge the potential).
    pub fn add_constant(&self, delta: f64) -> PeriodicField {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v += delta;
        }
        out.coeffs[0] += delta;
        out
    }
}

/// Symmetric matrix-valued periodic field (the diffusion coefficient).
/// One entry in 1D; upper triangle `[s11, s12, s22]` in 2D.
#[derive(Debug, Clone)]
pub struct MatrixField {
    dim: usize,
    entries: Vec<PeriodicField>,
}

impl MatrixField {
    pub fn identity(dim: usize, m: usize) -> Result<Self> {
        let one = PeriodicField::constant(1.0, dim, m)?;
        match dim {
            1 => Ok(MatrixField { dim, entries: vec![one] }),
            2 => {
                let zero = PeriodicField::constant(0.0, dim, m)?;
                Ok(MatrixField { dim, entries: vec![one.clone(), zero, one] })
            }
            _ => Err(Error::BadDimension { dim }),
        }
    }

    /// Scalar field times the identity matrix.
    pub fn isotropic(field: PeriodicField) -> Self {
        let dim = field.dim();
        match dim {
            1 => MatrixField { dim, entries: vec![field] },
            _ => {
                let zero = PeriodicField::constant(0.0, dim, field.resolution())
                    .expect("resolution already validated");
                MatrixField { dim, entries: vec![field.clone(), zero, field] }
            }
        }
    }

    /// Build from the upper triangle; symmetry holds by construction.
    pub fn from_upper(dim: usize, entries: Vec<PeriodicField>) -> Result<Self> {
        let expect = if dim == 1 { 1 } else { 3 };
        if dim != 1 && dim != 2 {
            return Err(Error::BadDimension { dim });
        }
        assert_eq!(entries.len(), expect, "need {expect} entries for dim {dim}");
        let m = entries[0].resolution();
        assert!(entries.iter().all(|e| e.resolution() == m && e.dim() == dim));
        Ok(MatrixField { dim, entries })
    }

    /// Build from all four 2D entries, rejecting a non-symmetric pair.
    pub fn from_full(
        s11: PeriodicField,
        s12: PeriodicField,
        s21: PeriodicField,
        s22: PeriodicField,
    ) -> Result<Self> {
        for (node, (a, b)) in s12.values().iter().zip(s21.values()).enumerate() {
            let dev = (a - b).abs();
            if dev > 1e-12 {
                return Err(Error::NonSymmetricMatrix { node, deviation: dev });
            }
        }
        MatrixField::from_upper(2, vec![s11, s12, s22])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.entries[0].resolution()
    }

    pub fn entry(&self, a: usize, b: usize) -> &PeriodicField {
        debug_assert!(a < self.dim && b < self.dim);
        match self.dim {
            1 => &self.entries[0],
            _ => match (a, b) {
                (0, 0) => &self.entries[0],
                (1, 1) => &self.entries[2],
                _ => &self.entries[1],
            },
        }
    }

    pub fn eval_matrix(&self, y: [f64; 2]) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for a in 0..self.dim {
            for b in 0..self.dim {
                out[a][b] = self.entry(a, b).eval(y);
            }
        }
        out
    }

    pub fn bandwidth(&self) -> i64 {
        self.entries.iter().map(|e| e.bandwidth()).max().unwrap_or(0)
    }
}

/// Smallest eigenvalue of the diffusion matrix over the sample grid;
/// fails unless strictly positive.
pub fn validate_coercivity(sigma: &MatrixField) -> Result<f64> {
    let m = sigma.resolution();
    let count = m.pow(sigma.dim() as u32);
    let mut nu = f64::INFINITY;
    for idx in 0..count {
        let min_eig = match sigma.dim() {
            1 => sigma.entries[0].values()[idx],
            _ => {
                let a = sigma.entries[0].values()[idx];
                let b = sigma.entries[1].values()[idx];
                let c = sigma.entries[2].values()[idx];
                let mid = 0.5 * (a + c);
                let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
                mid - rad
            }
        };
        nu = nu.min(min_eig);
    }
    if !(nu > 0.0) {
        return Err(Error::NonCoercive { nu });
    }
    Ok(nu)
}

/// Field over slow-times-fast variables, stored as one periodic field per
/// macroscopic grid node.
#[derive(Debug, Clone)]
pub struct TwoScaleField {
    dim: usize,
    p: usize,
    fields: Vec<PeriodicField>,
}

impl TwoScaleField {
    pub fn from_expr(src: &str, dim: usize, p: usize, m: usize) -> Result<Self> {
        let expr = Expr::parse(src)?;
        if dim == 1 && (expr.uses_var(Var::X2) || expr.uses_var(Var::Y2)) {
            return Err(Error::ExprBadVariable { var: "x2/y2".to_string() });
        }
        let nodes = macro_node_count(dim, p);
        let mut fields = Vec::with_capacity(nodes);
        for idx in 0..nodes {
            let x = macro_node_coords(dim, p, idx);
            let f = PeriodicField::from_fn(dim, m, |y| {
                expr.eval(&Bindings { x: Some(x), y: Some(y) }).unwrap_or(f64::NAN)
            })?;
            fields.push(f);
        }
        Ok(TwoScaleField { dim, p, fields })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn macro_cells(&self) -> usize {
        self.p
    }

    pub fn at_node(&self, idx: usize) -> &PeriodicField {
        &self.fields[idx]
    }
}

pub fn macro_node_count(dim: usize, p: usize) -> usize {
    (p + 1).pow(dim as u32)
}

pub fn macro_node_coords(dim: usize, p: usize, idx: usize) -> [f64; 2] {
    match dim {
        1 => [idx as f64 / p as f64, 0.0],
        _ => {
            let side = p + 1;
            [(idx / side) as f64 / p as f64, (idx % side) as f64 / p as f64]
        }
    }
}

pub fn macro_node_is_boundary(dim: usize, p: usize, idx: usize) -> bool {
    match dim {
        1 => idx == 0 || idx == p,
        _ => {
            let side = p + 1;
            let i = idx / side;
            let j = idx % side;
            i == 0 || i == p || j == 0 || j == p
        }
    }
}

/// Complex-valued field on the macroscopic grid over the unit box,
/// `p` cells (`p+1` nodes) per axis.
#[derive(Debug, Clone)]
pub struct MacroField {
    dim: usize,
    p: usize,
    values: Vec<Complex64>,
}

impl MacroField {
    pub fn zeros(dim: usize, p: usize) -> Self {
        MacroField { dim, p, values: vec![Complex64::default(); macro_node_count(dim, p)] }
    }

    /// State field: samples a real profile and verifies the homogeneous
    /// boundary condition.
    pub fn state_from_expr(src: &str, dim: usize, p: usize) -> Result<Self> {
        let expr = Expr::parse(src)?;
        if expr.uses_fast() {
            return Err(Error::ExprBadVariable { var: "y1/y2".to_string() });
        }
        if dim == 1 && expr.uses_var(Var::X2) {
            return Err(Error::ExprBadVariable { var: "x2".to_string() });
        }
        let mut f = Self::zeros(dim, p);
        for idx in 0..f.values.len() {
            let x = macro_node_coords(dim, p, idx);
            let v = expr.eval(&Bindings { x: Some(x), y: None })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { context: format!("macro node {idx}") });
            }
            f.values[idx] = Complex64::new(v, 0.0);
        }
        f.validate_dirichlet()?;
        Ok(f)
    }

    /// Coefficient data on the macro grid (no boundary constraint).
    pub fn data(dim: usize, p: usize, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), macro_node_count(dim, p));
        MacroField { dim, p, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn node_coords(&self, idx: usize) -> [f64; 2] {
        macro_node_coords(self.dim, self.p, idx)
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        macro_node_is_boundary(self.dim, self.p, idx)
    }

    pub fn validate_dirichlet(&self) -> Result<()> {
        for idx in 0..self.values.len() {
            if self.is_boundary(idx) {
                let mag = self.values[idx].norm();
                if mag > 1e-12 {
                    return Err(Error::BoundaryViolation { value: mag });
                }
            }
        }
        Ok(())
    }

    /// Discrete L2 norm squared, trapezoid-free (boundary values vanish
    /// for states, so the plain scaled sum is the natural quadrature).
    pub fn l2_norm_sq(&self) -> f64 {
        let h = 1.0 / self.p as f64;
        let w = h.powi(self.dim as i32);
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// H1 norm squared with the gradient by forward differences.
    pub fn h1_norm_sq(&self) -> f64 {
        let p = self.p;
        let h = 1.0 / p as f64;
        let w = h.powi(self.dim as i32);
        let mut grad = 0.0;
        match self.dim {
            1 => {
                for i in 0..p {
                    grad += (self.values[i + 1] - self.values[i]).norm_sqr() / (h * h);
                }
            }
            _ => {
                let side = p + 1;
                for i in 0..side {
                    for j in 0..side {
                        let v = self.values[i * side + j];
                        if i + 1 < side {
                            grad += (self.values[(i + 1) * side + j] - v).norm_sqr() / (h * h);
                        }
                        if j + 1 < side {
                            grad += (self.values[i * side + j + 1] - v).norm_sqr() / (h * h);
                        }
                    }
                }
            }
        }
        self.l2_norm_sq() + grad * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_field_has_expected_coefficients() {
        let f = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, 64).unwrap();
        assert_relative_eq!(f.fourier([1, 0]).re, 1.0, epsilon = 1e-13);
        assert_relative_eq!(f.fourier([-1, 0]).re, 1.0, epsilon = 1e-13);
        assert!(f.fourier([0, 0]).norm() < 1e-13);
        assert!(f.fourier([2, 0]).norm() < 1e-13);
        assert_eq!(f.bandwidth(), 1);
        // interpolant is exact off-grid for band-limited data
        assert_relative_eq!(f.eval([0.3, 0.0]), 2.0 * (TWO_PI * 0.3).cos(), epsilon = 1e-12);
    }

    #[test]
    fn conjugate_symmetry_for_real_fields() {
        let f = PeriodicField::from_expr("cos(2*pi*y1) + sin(4*pi*y1)", 1, 128).unwrap();
        for k in 0..=10 {
            let a = f.fourier([k, 0]);
            let b = f.fourier([-k, 0]).conj();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn non_finite_samples_rejected() {
        let r = PeriodicField::from_fn(1, 8, |y| 1.0 / (y[0] - 0.25));
        assert!(matches!(r, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn resolution_must_be_power_of_two() {
        assert!(matches!(
            PeriodicField::constant(1.0, 1, 48),
            Err(Error::BadResolution { .. })
        ));
    }

    #[test]
    fn periodic_field_rejects_slow_variables() {
        assert!(PeriodicField::from_expr("x1", 1, 8).is_err());
        assert!(PeriodicField::from_expr("y2", 1, 8).is_err());
    }

    #[test]
    fn coercivity_validation() {
        let good = MatrixField::isotropic(PeriodicField::from_expr("2+cos(2*pi*y1)", 1, 64).unwrap());
        let nu = validate_coercivity(&good).unwrap();
        assert_relative_eq!(nu, 1.0, epsilon = 1e-12);

        let bad = MatrixField::isotropic(
            PeriodicField::from_expr("0.5+cos(2*pi*y1)", 1, 64).unwrap(),
        );
        assert!(matches!(validate_coercivity(&bad), Err(Error::NonCoercive { .. })));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = 16;
        let a = PeriodicField::constant(1.0, 2, m).unwrap();
        let b = PeriodicField::from_expr("cos(2*pi*y1)", 2, m).unwrap();
        let c = PeriodicField::from_expr("cos(2*pi*y2)", 2, m).unwrap();
        assert!(matches!(
            MatrixField::from_full(a.clone(), b.clone(), c, a.clone()),
            Err(Error::NonSymmetricMatrix { .. })
        ));
        assert!(MatrixField::from_full(a.clone(), b.clone(), b, a).is_ok());
    }

    #[test]
    fn two_dimensional_coercivity_accounts_for_off_diagonal() {
        let m = 16;
        let one = PeriodicField::constant(1.0, 2, m).unwrap();
        let off = PeriodicField::constant(0.9, 2, m).unwrap();
        let sigma = MatrixField::from_upper(2, vec![one.clone(), off, one]).unwrap();
        let nu = validate_coercivity(&sigma).unwrap();
        assert_relative_eq!(nu, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn two_scale_field_separates_variables() {
        let d = TwoScaleField::from_expr("(1+x1)*cos(2*pi*y1)", 1, 4, 32).unwrap();
        // at x = 0.5 the fast field is 1.5 cos(2 pi y)
        let f = d.at_node(2);
        assert_relative_eq!(f.fourier([1, 0]).re, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn macro_state_checks_boundary() {
        let v = MacroField::state_from_expr("sin(pi*x1)", 1, 64).unwrap();
        assert!(v.validate_dirichlet().is_ok());
        assert!(matches!(
            MacroField::state_from_expr("1+x1", 1, 8),
            Err(Error::BoundaryViolation { .. })
        ));
    }

    #[test]
    fn macro_norms_match_analytic_values() {
        let p = 512;
        let v = MacroField::state_from_expr("sin(pi*x1)", 1, p).unwrap();
        // int sin^2(pi x) = 1/2; int (pi cos(pi x))^2 = pi^2/2
        assert_relative_eq!(v.l2_norm_sq(), 0.5, epsilon = 1e-3);
        assert_relative_eq!(
            v.h1_norm_sq(),
            0.5 + 0.5 * std::f64::consts::PI.powi(2),
            epsilon = 1e-2
        );
    }

    #[test]
    fn gauge_shift_moves_only_the_mean() {
        let f = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, 64).unwrap();
        let g = f.add_constant(-0.5);
        assert_relative_eq!(g.mean(), -0.5, epsilon = 1e-13);
        assert_relative_eq!(g.fourier([1, 0]).re, 1.0, epsilon = 1e-13);
        assert_relative_eq!(g.eval([0.1, 0.0]), f.eval([0.1, 0.0]) - 0.5, epsilon = 1e-12);
    }
}
