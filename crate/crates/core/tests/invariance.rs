//! Structural invariances of the cell problem and the effective model:
//! shifting the potential by a constant moves the band value and nothing
//! else, translating the cell changes eigenvector phases and nothing
//! observable, gauge rotation of the eigenvector cancels everywhere, and a
//! separable two-dimensional problem reproduces the one-dimensional data.

use bloch_homog::bloch::{BandSolver, BlochOperator};
use bloch_homog::correctors::build_corrector_set;
use bloch_homog::effective::sigma_star_formula;
use bloch_homog::fields::{MatrixField, PeriodicField};
use num_complex::Complex64;

fn cosine_problem(m: usize, shift: f64) -> (MatrixField, PeriodicField) {
    let sigma = MatrixField::identity(1, m).unwrap();
    let c = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, m)
        .unwrap()
        .add_constant(shift);
    (sigma, c)
}

fn sigma_star_of(op: &BlochOperator, band: usize) -> f64 {
    let pair = op.solve_spectrum().unwrap().pair(band);
    let set = build_corrector_set(op, &pair).unwrap();
    let zetas: Vec<Vec<Complex64>> = (0..1).map(|k| set.zeta(k).to_vec()).collect();
    sigma_star_formula(op, &pair, &zetas).unwrap()[0][0]
}

#[test]
fn constant_potential_shift_moves_only_the_eigenvalue() {
    let m = 64;
    let delta = 3.7;
    let (sigma, c0) = cosine_problem(m, 0.0);
    let (_, c1) = cosine_problem(m, delta);
    let op0 = BlochOperator::assemble(&sigma, &c0, 16, [0.0, 0.0]).unwrap();
    let op1 = BlochOperator::assemble(&sigma, &c1, 16, [0.0, 0.0]).unwrap();

    let s0 = op0.solve_spectrum().unwrap();
    let s1 = op1.solve_spectrum().unwrap();
    for n in 1..=6 {
        assert!(
            (s1.value(n) - s0.value(n) - delta).abs() < 1e-10,
            "band {n} must shift by exactly the constant"
        );
    }

    let p0 = s0.pair(1);
    let p1 = s1.pair(1);
    for (a, b) in p0.coeffs().iter().zip(p1.coeffs()) {
        assert!((a - b).norm() < 1e-9, "eigenvector must be unchanged");
    }

    let star0 = sigma_star_of(&op0, 1);
    let star1 = sigma_star_of(&op1, 1);
    assert!((star0 - star1).abs() < 1e-9, "effective tensor must be unchanged");
}

#[test]
fn translating_the_cell_preserves_bands_and_tensor() {
    let m = 64;
    let sigma = MatrixField::identity(1, m).unwrap();
    let c = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, m).unwrap();
    // quarter-period translation: 2 cos(2 pi (y + 1/4)) = -2 sin(2 pi y)
    let c_shift = PeriodicField::from_expr("0 - 2*sin(2*pi*y1)", 1, m).unwrap();

    let op = BlochOperator::assemble(&sigma, &c, 16, [0.0, 0.0]).unwrap();
    let op_shift = BlochOperator::assemble(&sigma, &c_shift, 16, [0.0, 0.0]).unwrap();

    let s = op.solve_spectrum().unwrap();
    let st = op_shift.solve_spectrum().unwrap();
    for n in 1..=6 {
        assert!(
            (s.value(n) - st.value(n)).abs() < 1e-9,
            "band {n} changed under translation"
        );
    }

    // eigenvector coefficients pick up the phase e^{2 pi i k / 4}
    let pair = s.pair(1);
    let pair_t = st.pair(1);
    for (i, &k) in pair.basis().points().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * k[0] as f64);
        let expect = pair.coeffs()[i] * phase;
        let got = pair_t.coeffs()[i];
        assert!(
            (got.norm() - expect.norm()).abs() < 1e-9,
            "modulus of coefficient {i} changed"
        );
        if expect.norm() > 1e-8 {
            // compare up to the single global phase fixed by normalization
            let rel = got / expect;
            let rel0 = pair_t.coeffs()[pair.basis().index_of([0, 0]).unwrap()]
                / pair.coeffs()[pair.basis().index_of([0, 0]).unwrap()];
            assert!((rel - rel0).norm() < 1e-8, "coefficient {i} phase inconsistent");
        }
    }

    assert!((sigma_star_of(&op, 1) - sigma_star_of(&op_shift, 1)).abs() < 1e-9);
}

#[test]
fn gauge_rotation_cancels_in_the_effective_tensor() {
    let m = 64;
    let (sigma, c) = cosine_problem(m, 0.0);
    let op = BlochOperator::assemble(&sigma, &c, 16, [0.0, 0.0]).unwrap();
    let pair = op.solve_spectrum().unwrap().pair(1);
    let rotated = pair.rotated(Complex64::from_polar(1.0, 1.234));

    let set = build_corrector_set(&op, &pair).unwrap();
    let set_rot = build_corrector_set(&op, &rotated).unwrap();

    let zetas: Vec<Vec<Complex64>> = vec![set.zeta(0).to_vec()];
    let zetas_rot: Vec<Vec<Complex64>> = vec![set_rot.zeta(0).to_vec()];
    let plain = sigma_star_formula(&op, &pair, &zetas).unwrap()[0][0];
    let rot = sigma_star_formula(&op, &rotated, &zetas_rot).unwrap()[0][0];
    assert!((plain - rot).abs() < 1e-10, "gauge must cancel: {plain} vs {rot}");
    assert!((set.hessian()[0][0] - set_rot.hessian()[0][0]).abs() < 1e-9);
}

#[test]
fn separable_two_dimensional_problem_reproduces_one_dimensional_data() {
    let m = 32;
    let kc = 6;
    let sigma1 = MatrixField::identity(1, m).unwrap();
    let c1 = PeriodicField::from_expr("2*cos(2*pi*y1)", 1, m).unwrap();
    let op1 = BlochOperator::assemble(&sigma1, &c1, kc, [0.0, 0.0]).unwrap();
    let pair1 = op1.solve_spectrum().unwrap().pair(1);
    let set1 = build_corrector_set(&op1, &pair1).unwrap();
    let zetas1 = vec![set1.zeta(0).to_vec()];
    let star1 = sigma_star_formula(&op1, &pair1, &zetas1).unwrap()[0][0];

    let sigma2 = MatrixField::identity(2, m).unwrap();
    let c2 = PeriodicField::from_expr("2*cos(2*pi*y1) + 2*cos(2*pi*y2)", 2, m).unwrap();
    let op2 = BlochOperator::assemble(&sigma2, &c2, kc, [0.0, 0.0]).unwrap();
    let pair2 = op2.solve_spectrum().unwrap().pair(1);
    assert!(
        (pair2.lambda() - 2.0 * pair1.lambda()).abs() < 1e-9,
        "ground energy must add across axes"
    );
    let set2 = build_corrector_set(&op2, &pair2).unwrap();
    let zetas2: Vec<Vec<Complex64>> = (0..2).map(|k| set2.zeta(k).to_vec()).collect();
    let star2 = sigma_star_formula(&op2, &pair2, &zetas2).unwrap();
    assert!((star2[0][0] - star1).abs() < 1e-8, "diagonal entry differs from 1D value");
    assert!((star2[1][1] - star1).abs() < 1e-8);
    assert!(star2[0][1].abs() < 1e-9, "separable problem has no cross coupling");
}

#[test]
fn critical_point_search_is_translation_invariant_in_theta_seed() {
    let m = 64;
    let (sigma, c) = cosine_problem(m, 0.0);
    let solver = BandSolver::new(sigma.clone(), c.clone(), 16);
    let opts = bloch_homog::bloch::SearchOptions::default();
    let from_left = bloch_homog::bloch::find_critical_point(&solver, 1, [-0.12, 0.0], &opts)
        .unwrap();
    let from_right = bloch_homog::bloch::find_critical_point(&solver, 1, [0.09, 0.0], &opts)
        .unwrap();
    assert!((from_left.theta[0] - from_right.theta[0]).abs() < 1e-9);
    assert!((from_left.lambda - from_right.lambda).abs() < 1e-11);
}
