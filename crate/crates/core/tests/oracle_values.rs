//! Frozen reference values for the cosine-potential test problems.
//!
//! The constants below were computed independently of this crate (dense
//! plane-wave assembly + LAPACK `eigh` in numpy, cross-checked against
//! scipy.special.mathieu_a for the ground eigenvalue) and are frozen here.
//! The tests assert that the in-repo solver chain reproduces them.

use bloch_homog::bloch::BlochOperator;
use bloch_homog::correctors::{solve_on_complement, zeta_rhs};
use bloch_homog::effective::{g_star, sigma_star_formula};
use bloch_homog::fields::{MatrixField, PeriodicField};
use num_complex::Complex64;

/// pi^2 * a_0(1/pi^2), ground eigenvalue of -psi'' + 2cos(2 pi y) psi on the torus.
const COS_POTENTIAL_LAMBDA1: f64 = -5.060384199840864e-2;
/// Second eigenvalue at theta = 0 for the same potential.
const COS_POTENTIAL_LAMBDA2: f64 = 3.946997454866958e1;
/// Ground eigenvalue at the edge point theta = 1/2.
const COS_POTENTIAL_LAMBDA1_EDGE: f64 = 8.857098951311457;
/// Effective diffusion (band curvature / 8 pi^2) for the cosine potential.
const COS_POTENTIAL_SIGMA_STAR: f64 = 9.948897573758271e-1;
/// Noise average integral cos(2 pi y) |psi_1|^2 dy for the cosine potential.
const COS_POTENTIAL_G_STAR: f64 = -5.054722578716368e-2;
/// First Fourier coefficient of the phase-fixed ground state.
const COS_POTENTIAL_PSI_HAT_1: f64 = -2.5285737923e-2;

fn cos_potential(m: usize) -> (MatrixField, PeriodicField) {
    let sigma = MatrixField::identity(1, m).unwrap();
    let c = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, m).unwrap();
    (sigma, c)
}

fn variable_sigma(m: usize) -> (MatrixField, PeriodicField) {
    let sigma =
        MatrixField::isotropic(PeriodicField::from_expr("2+cos(2*pi*y1)", 1, m).unwrap());
    let c = PeriodicField::constant(0.0, 1, m).unwrap();
    (sigma, c)
}

#[test]
fn ground_eigenvalue_matches_mathieu_reference() {
    let (sigma, c) = cos_potential(256);
    let op = BlochOperator::assemble(&sigma, &c, 32, [0.0, 0.0]).unwrap();
    let spectrum = op.solve_spectrum().unwrap();
    assert!(
        (spectrum.value(1) - COS_POTENTIAL_LAMBDA1).abs() < 1e-9,
        "lambda_1(0) = {:.15e}, reference {:.15e}",
        spectrum.value(1),
        COS_POTENTIAL_LAMBDA1
    );
    assert!((spectrum.value(2) - COS_POTENTIAL_LAMBDA2).abs() < 1e-6);
}

#[test]
fn ground_eigenvalue_stable_under_cutoff_doubling() {
    let (sigma, c) = cos_potential(512);
    let coarse = BlochOperator::assemble(&sigma, &c, 32, [0.0, 0.0])
        .unwrap()
        .solve_spectrum()
        .unwrap();
    let fine = BlochOperator::assemble(&sigma, &c, 64, [0.0, 0.0])
        .unwrap()
        .solve_spectrum()
        .unwrap();
    assert!(
        (coarse.value(1) - fine.value(1)).abs() < 1e-8,
        "cutoff 32 vs 64: {:.3e}",
        (coarse.value(1) - fine.value(1)).abs()
    );
}

#[test]
fn edge_point_eigenvalue_matches_reference() {
    let (sigma, c) = cos_potential(512);
    let op = BlochOperator::assemble(&sigma, &c, 64, [0.5, 0.0]).unwrap();
    let spectrum = op.solve_spectrum().unwrap();
    assert!((spectrum.value(1) - COS_POTENTIAL_LAMBDA1_EDGE).abs() < 1e-8);
}

#[test]
fn ground_state_phase_convention_matches_reference() {
    let (sigma, c) = cos_potential(256);
    let op = BlochOperator::assemble(&sigma, &c, 32, [0.0, 0.0]).unwrap();
    let pair = op.solve_spectrum().unwrap().pair(1);
    let k0 = pair.coefficient([0, 0]);
    let k1 = pair.coefficient([1, 0]);
    let km1 = pair.coefficient([-1, 0]);
    assert!((k0.re - 9.9936040129e-1).abs() < 1e-8 && k0.im.abs() < 1e-12);
    assert!((k1.re - COS_POTENTIAL_PSI_HAT_1).abs() < 1e-8);
    assert!((km1.re - COS_POTENTIAL_PSI_HAT_1).abs() < 1e-8);
}

#[test]
fn corrector_solve_agrees_with_spectral_inversion_oracle() {
    let (sigma, c) = cos_potential(512);
    let op = BlochOperator::assemble(&sigma, &c, 64, [0.0, 0.0]).unwrap();
    let spectrum = op.solve_spectrum().unwrap();
    let pair = spectrum.pair(1);
    let rhs = zeta_rhs(&op, &pair, 0);
    let zeta = solve_on_complement(&op, &pair, &rhs).unwrap();

    // Oracle: invert on the orthogonal complement through the full
    // eigendecomposition, x = sum_{m != n} <v_m, rhs> / (lambda_m - lambda_n) v_m.
    let k = op.basis().len();
    let mut oracle = vec![Complex64::new(0.0, 0.0); k];
    for m in 1..=k {
        if m == 1 {
            continue;
        }
        let vm = spectrum.pair(m);
        let num: Complex64 = vm
            .coeffs()
            .iter()
            .zip(rhs.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let w = num / (spectrum.value(m) - spectrum.value(1));
        for (o, vc) in oracle.iter_mut().zip(vm.coeffs()) {
            *o += w * vc;
        }
    }
    let diff: f64 = zeta
        .iter()
        .zip(oracle.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(diff < 1e-8, "deflated solve vs spectral inversion: {:.3e}", diff);

    // residual of the corrector equation itself
    let res = op.shifted_residual(pair.lambda(), &zeta, &rhs);
    assert!(res < 1e-8, "corrector residual {:.3e}", res);
}

#[test]
fn effective_diffusion_matches_frozen_reference() {
    let (sigma, c) = cos_potential(512);
    let op = BlochOperator::assemble(&sigma, &c, 64, [0.0, 0.0]).unwrap();
    let pair = op.solve_spectrum().unwrap().pair(1);
    let rhs = zeta_rhs(&op, &pair, 0);
    let zeta = solve_on_complement(&op, &pair, &rhs).unwrap();
    let ss = sigma_star_formula(&op, &pair, &[zeta]).unwrap();
    assert!(
        (ss[0][0] - COS_POTENTIAL_SIGMA_STAR).abs() < 1e-8,
        "sigma* = {:.15e}",
        ss[0][0]
    );
}

#[test]
fn noise_average_matches_frozen_reference() {
    let (sigma, c) = cos_potential(512);
    let g = PeriodicField::from_expr("cos(2*pi*y1)", 1, 512).unwrap();
    let op = BlochOperator::assemble(&sigma, &c, 64, [0.0, 0.0]).unwrap();
    let pair = op.solve_spectrum().unwrap().pair(1);
    let gs = g_star(&g, &pair).unwrap();
    assert!((gs - COS_POTENTIAL_G_STAR).abs() < 1e-8, "g* = {:.15e}", gs);
}

#[test]
fn variable_coefficient_effective_diffusion_is_harmonic_mean() {
    let (sigma, c) = variable_sigma(512);
    let op = BlochOperator::assemble(&sigma, &c, 64, [0.0, 0.0]).unwrap();
    let pair = op.solve_spectrum().unwrap().pair(1);
    // with zero potential the ground state is the constant function
    for (i, k) in op.basis().points().iter().enumerate() {
        if k[0] == 0 {
            assert!((pair.coeffs()[i].re - 1.0).abs() < 1e-12);
        } else {
            assert!(pair.coeffs()[i].norm() < 1e-12);
        }
    }
    let rhs = zeta_rhs(&op, &pair, 0);
    let zeta = solve_on_complement(&op, &pair, &rhs).unwrap();
    let ss = sigma_star_formula(&op, &pair, &[zeta]).unwrap();
    assert!(
        (ss[0][0] - 3.0_f64.sqrt()).abs() < 1e-9,
        "harmonic mean sqrt(3) expected, got {:.15e}",
        ss[0][0]
    );
}
