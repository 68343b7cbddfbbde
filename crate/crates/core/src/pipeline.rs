//! End-to-end assembly: configuration text in, effective model out.
//!
//! The stages are: build coefficient fields from expressions, locate the
//! critical quasimomentum of the requested band, solve for the correctors
//! there, and assemble the effective model. In gauge-shift mode the cell
//! potential is then re-centered so the located band value is zero, which
//! removes the stiff phase from the fine solution; the shift changes
//! neither the critical point nor the eigenfunction nor the effective
//! tensor, so only the spectral data is recomputed.

use crate::bloch::{
    find_critical_point, BandSolver, BlochEigenpair, BlochOperator, CriticalPoint,
};
use crate::config::RunConfig;
use crate::correctors::{build_corrector_set, CorrectorSet};
use crate::effective::{build_effective_model, EffectiveModel};
use crate::error::Result;
use crate::fields::{MacroField, MatrixField, PeriodicField, TwoScaleField};
use crate::spde::{run_coupled, FieldPath, FineProblem, NoisePath, PhaseMode};

/// The coefficient fields of one run, built from configured expressions.
/// After the pipeline has run in gauge-shift mode, `c` holds the shifted
/// potential actually used by the time integrator.
#[derive(Debug, Clone)]
pub struct Problem {
    pub sigma: MatrixField,
    pub c: PeriodicField,
    pub d: TwoScaleField,
    pub g: PeriodicField,
    pub v0: MacroField,
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    let dim = cfg.dim;
    let m = cfg.resolution;
    let sigma = if dim == 1 {
        MatrixField::isotropic(PeriodicField::from_expr(&cfg.sigma_exprs[0], dim, m)?)
    } else {
        MatrixField::from_upper(
            dim,
            vec![
                PeriodicField::from_expr(&cfg.sigma_exprs[0], dim, m)?,
                PeriodicField::from_expr(&cfg.sigma_exprs[1], dim, m)?,
                PeriodicField::from_expr(&cfg.sigma_exprs[2], dim, m)?,
            ],
        )?
    };
    let c = PeriodicField::from_expr(&cfg.c_expr, dim, m)?;
    let d = TwoScaleField::from_expr(&cfg.d_expr, dim, cfg.cells, m)?;
    let g = PeriodicField::from_expr(&cfg.g_expr, dim, m)?;
    let v0 = MacroField::state_from_expr(&cfg.v0_expr, dim, cfg.cells)?;
    Ok(Problem { sigma, c, d, g, v0 })
}

/// Everything the downstream consumers need: the (possibly re-centered)
/// problem, the located critical point, spectral data there, correctors and
/// the effective model.
pub struct Pipeline {
    pub problem: Problem,
    pub solver: BandSolver,
    pub op: BlochOperator,
    pub point: CriticalPoint,
    pub pair: BlochEigenpair,
    pub set: CorrectorSet,
    pub model: EffectiveModel,
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<Pipeline> {
    let mut problem = build_problem(cfg)?;
    let opts = cfg.search_options();

    let solver = BandSolver::new(problem.sigma.clone(), problem.c.clone(), cfg.cutoff);
    let point = find_critical_point(&solver, cfg.band, cfg.theta_seed, &opts)?;

    let solver = if cfg.phase_mode == PhaseMode::GaugeShift {
        problem.c = problem.c.add_constant(-point.lambda);
        BandSolver::new(problem.sigma.clone(), problem.c.clone(), cfg.cutoff)
    } else {
        solver
    };

    let op = solver.operator(point.theta)?;
    let spectrum = solver.spectrum(point.theta)?;
    let pair = spectrum.pair(cfg.band);
    let set = build_corrector_set(&op, &pair)?;
    let model = build_effective_model(
        &op,
        &solver,
        &pair,
        &set,
        &problem.g,
        &problem.d,
        opts.hessian_step,
    )?;
    Ok(Pipeline { problem, solver, op, point, pair, set, model })
}

/// Run the coupled fine/homogenized pair at one scale under one seed, using
/// the pipeline's fields, model and the configured time grid.
pub fn simulate_scale(
    pl: &Pipeline,
    cfg: &RunConfig,
    eps_inv: u64,
    seed: u64,
) -> Result<(FieldPath, FieldPath)> {
    let fine = FineProblem::build(
        &pl.problem.sigma,
        &pl.problem.c,
        &pl.problem.d,
        &pl.problem.g,
        eps_inv,
        cfg.cells,
    )?;
    let path = NoisePath::sample(seed, cfg.dt, cfg.t_final)?;
    run_coupled(&fine, &pl.model, &pl.problem.v0, &path, &cfg.snapshot_times)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(extra: &str) -> RunConfig {
        let text = format!(
            "cutoff = 8\nresolution = 64\ncells = 128\neps = 1/4, 1/8\n\
             dt = 1e-3\nt_final = 0.01\n{extra}"
        );
        RunConfig::parse(&text).unwrap()
    }

    #[test]
    fn free_case_produces_the_identity_model() {
        let cfg = base_config("");
        let pl = run_pipeline(&cfg).unwrap();
        assert!(pl.point.lambda.abs() < 1e-10);
        assert!((pl.model.sigma[0][0] - 1.0).abs() < 1e-8);
        assert!(pl.model.g.abs() < 1e-12);
        assert!(pl.point.grad_norm < 1e-8);
    }

    #[test]
    fn gauge_shift_recenters_the_band_value() {
        let cfg = base_config("c = 2*cos(2*pi*y1)\n");
        let pl = run_pipeline(&cfg).unwrap();
        // the located value is kept as found, the model sees the shift
        assert!(pl.point.lambda < -0.01);
        assert!(pl.model.lambda.abs() < 1e-8);
        let mean_shifted = pl.problem.c.mean();
        assert!((mean_shifted - (0.0 - pl.point.lambda)).abs() < 1e-12);
    }

    #[test]
    fn paper_mode_keeps_the_potential_untouched() {
        let cfg = base_config("c = 2*cos(2*pi*y1)\nphase_mode = paper\n");
        let pl = run_pipeline(&cfg).unwrap();
        assert!((pl.model.lambda - pl.point.lambda).abs() < 1e-12);
        assert!(pl.problem.c.mean().abs() < 1e-12);
    }

    #[test]
    fn simulation_runs_and_records_snapshots() {
        let cfg = base_config("c = 2*cos(2*pi*y1)\ng = 0.5*cos(2*pi*y1)\n");
        let pl = run_pipeline(&cfg).unwrap();
        let (u, v) = simulate_scale(&pl, &cfg, 8, 5).unwrap();
        assert_eq!(u.snapshot_times(), &[0.01]);
        assert_eq!(u.l2_sq().len(), 11);
        assert!(u.snapshot(0).1.l2_norm() > 0.1);
        assert!(v.snapshot(0).1.l2_norm() > 0.1);
    }
}
