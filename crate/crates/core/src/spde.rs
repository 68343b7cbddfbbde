//! Time integration of the fine-scale and homogenized stochastic equations.
//!
//! Both equations have the form
//!
//! ```text
//! du + ( -div(s grad u) + q(x) u ) dt + g(x) u dW = 0
//! ```
//!
//! on the unit box with Dirichlet boundary, driven by one scalar Brownian
//! motion (Ito form). The integrator is IMEX Euler-Maruyama: the stiff
//! deterministic part is implicit, the noise explicit,
//!
//! ```text
//! (I + dt L) u_{m+1} = (1 - g dW_m) u_m,
//! ```
//!
//! so one real banded factorization of `I + dt L` is shared by every step
//! (the state is complex; the operator is real, so a step is two real
//! solves). Spatial discretization is second-order centered differences with
//! the conductivity averaged at half-nodes, which keeps the matrix symmetric.
//!
//! For the fine problem the coefficients oscillate at scale `eps`: the
//! potential is `eps^{-2} c(x/eps) + d(x, x/eps)` and the grid is required to
//! be commensurate with the cell (`P` a multiple of `1/eps`) so coefficient
//! samples land on exact rational points of the torus.

use crate::bandmat::{BandLu, BandMatrix};
use crate::bloch::BlochEigenpair;
use crate::effective::{Definiteness, EffectiveModel};
use crate::error::{Error, Result};
use crate::fields::{macro_node_count, MacroField, MatrixField, PeriodicField, TwoScaleField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// How the stiff phase of the fine solution is handled when comparing it
/// with the homogenized one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// Pre-shift the potential so the band value at the critical point is
    /// zero; no phase factor at all.
    GaugeShift,
    /// Real damping factor `exp(-lambda t / eps^2)` from the parabolic
    /// leading-order balance.
    Parabolic,
    /// Literal oscillatory factor `exp(i lambda t / eps^2)`.
    Paper,
}

impl PhaseMode {
    /// The factor multiplying the homogenized ansatz at time `t`.
    pub fn factor(&self, lambda: f64, eps_inv: u64, t: f64) -> Complex64 {
        let rate = lambda * (eps_inv * eps_inv) as f64;
        match self {
            PhaseMode::GaugeShift => Complex64::new(1.0, 0.0),
            PhaseMode::Parabolic => Complex64::new((-rate * t).exp(), 0.0),
            PhaseMode::Paper => Complex64::from_polar(1.0, rate * t),
        }
    }
}

/// One sampled Brownian path at fixed step size.
#[derive(Debug, Clone)]
pub struct NoisePath {
    seed: u64,
    dt: f64,
    increments: Vec<f64>,
}

impl NoisePath {
    /// Draw `t_final/dt` Gaussian increments of variance `dt` from a
    /// counter-based generator seeded by `seed`. Sample moments are checked
    /// against the exact law within five standard errors.
    pub fn sample(seed: u64, dt: f64, t_final: f64) -> Result<NoisePath> {
        assert!(dt > 0.0 && t_final > 0.0, "time grid must be positive");
        let steps_f = t_final / dt;
        let steps = steps_f.round();
        if (steps_f - steps).abs() > 1e-9 * steps_f.max(1.0) || steps < 1.0 {
            return Err(Error::SnapshotOffGrid { t: t_final, dt });
        }
        let steps = steps as usize;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sqrt_dt = dt.sqrt();
        let increments: Vec<f64> = (0..steps)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * sqrt_dt
            })
            .collect();
        let path = NoisePath { seed, dt, increments };
        path.validate_moments()?;
        Ok(path)
    }

    fn validate_moments(&self) -> Result<()> {
        let n = self.increments.len();
        if n < 2 {
            return Ok(());
        }
        let nf = n as f64;
        let mean = self.increments.iter().sum::<f64>() / nf;
        let mean_se = (self.dt / nf).sqrt();
        if mean.abs() > 5.0 * mean_se {
            return Err(Error::NoiseMoments {
                what: "mean".to_string(),
                sigmas: mean.abs() / mean_se,
            });
        }
        let var = self.increments.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (nf - 1.0);
        let var_se = self.dt * (2.0 / (nf - 1.0)).sqrt();
        if (var - self.dt).abs() > 5.0 * var_se {
            return Err(Error::NoiseMoments {
                what: "variance".to_string(),
                sigmas: (var - self.dt).abs() / var_se,
            });
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.increments.len() as f64
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// The same Brownian path on a grid coarsened by `factor`: consecutive
    /// increments are summed, which is exact in law and pathwise consistent.
    pub fn coarsen(&self, factor: usize) -> Result<NoisePath> {
        if factor == 0 || self.increments.len() % factor != 0 {
            return Err(Error::BadCoarsening { steps: self.increments.len(), factor });
        }
        let increments: Vec<f64> = self
            .increments
            .chunks(factor)
            .map(|c| c.iter().sum())
            .collect();
        Ok(NoisePath { seed: self.seed, dt: self.dt * factor as f64, increments })
    }
}

/// Modulate a macroscopic profile by the cell eigenfunction at scale `eps`:
/// node-wise `scale * exp(2 i pi theta . x / eps) * psi(x/eps) * field(x)`.
pub fn modulate(
    pair: &BlochEigenpair,
    field: &MacroField,
    eps_inv: u64,
    scale: Complex64,
) -> Result<MacroField> {
    let dim = field.dim();
    assert_eq!(dim, pair.basis().dim(), "dimension mismatch");
    let p = field.cells();
    if eps_inv == 0 || p % (eps_inv as usize) != 0 {
        return Err(Error::IncommensurateGrid { p, eps_inv });
    }
    let theta = pair.theta();
    let side = p + 1;
    let nodes = macro_node_count(dim, p);
    let mut values = Vec::with_capacity(nodes);
    for idx in 0..nodes {
        let (i, j) = match dim {
            1 => (idx, 0usize),
            _ => (idx / side, idx % side),
        };
        let y = cell_coord(dim, p, eps_inv, i, j);
        let x = [i as f64 / p as f64, j as f64 / p as f64];
        let psi = pair.eval(y);
        let arg = TWO_PI * eps_inv as f64 * (theta[0] * x[0] + theta[1] * x[1]);
        let phase = Complex64::from_polar(1.0, arg);
        values.push(scale * phase * psi * field.values()[idx]);
    }
    Ok(MacroField::data(dim, p, values))
}

/// Well-prepared initial data: the modulated macroscopic profile, after
/// checking that the profile itself satisfies the boundary condition.
pub fn prepare_initial_data(
    pair: &BlochEigenpair,
    v0: &MacroField,
    eps_inv: u64,
) -> Result<MacroField> {
    v0.validate_dirichlet()?;
    let u0 = modulate(pair, v0, eps_inv, Complex64::new(1.0, 0.0))?;
    u0.validate_dirichlet()?;
    Ok(u0)
}

/// Exact torus coordinate of grid node `(i, j)` scaled by `1/eps`: integer
/// arithmetic keeps commensurate samples on exact rational points.
fn cell_coord(dim: usize, p: usize, eps_inv: u64, i: usize, j: usize) -> [f64; 2] {
    let p64 = p as u64;
    let y0 = ((i as u64 * eps_inv) % p64) as f64 / p as f64;
    let y1 = if dim == 2 { ((j as u64 * eps_inv) % p64) as f64 / p as f64 } else { 0.0 };
    [y0, y1]
}

/// Half-node torus coordinate `((i + 1/2) h * eps_inv) mod 1` along one axis.
fn cell_coord_half(p: usize, eps_inv: u64, i: usize) -> f64 {
    let two_p = 2 * p as u64;
    (((2 * i as u64 + 1) * eps_inv) % two_p) as f64 / (2.0 * p as f64)
}

/// Grid samples of one equation's coefficients: conductivity at half-nodes
/// (cross entry at nodes), potential and noise amplitude at nodes.
#[derive(Debug, Clone)]
struct DiscreteCoefficients {
    dim: usize,
    p: usize,
    s11_half: Vec<f64>,
    s22_half: Vec<f64>,
    s12_node: Vec<f64>,
    pot: Vec<f64>,
    g: Vec<f64>,
}

/// The fine-scale problem: oscillating coefficients sampled on a grid
/// commensurate with the cell.
#[derive(Debug, Clone)]
pub struct FineProblem {
    eps_inv: u64,
    coeffs: DiscreteCoefficients,
}

/// Fewest grid cells per oscillation period accepted by the sampler.
pub const MIN_CELLS_PER_PERIOD: usize = 16;

impl FineProblem {
    pub fn build(
        sigma: &MatrixField,
        c: &PeriodicField,
        d: &TwoScaleField,
        g: &PeriodicField,
        eps_inv: u64,
        p: usize,
    ) -> Result<FineProblem> {
        let dim = sigma.dim();
        assert!(
            c.dim() == dim && d.dim() == dim && g.dim() == dim,
            "coefficient dimensions must agree"
        );
        assert_eq!(d.macro_cells(), p, "slow grid of d must match the solver grid");
        if eps_inv == 0 || p % (eps_inv as usize) != 0 {
            return Err(Error::IncommensurateGrid { p, eps_inv });
        }
        let cells = p / eps_inv as usize;
        if cells < MIN_CELLS_PER_PERIOD {
            return Err(Error::ScaleUnderResolved { eps_inv, cells, min: MIN_CELLS_PER_PERIOD });
        }

        let side = p + 1;
        let eps_sq = (eps_inv * eps_inv) as f64;
        let nodes = macro_node_count(dim, p);

        let mut pot = Vec::with_capacity(nodes);
        let mut g_node = Vec::with_capacity(nodes);
        for idx in 0..nodes {
            let (i, j) = match dim {
                1 => (idx, 0usize),
                _ => (idx / side, idx % side),
            };
            let y = cell_coord(dim, p, eps_inv, i, j);
            pot.push(eps_sq * c.eval(y) + d.at_node(idx).eval(y));
            g_node.push(g.eval(y));
        }

        let (s11_half, s22_half, s12_node) = if dim == 1 {
            let s11: Vec<f64> = (0..p)
                .map(|i| sigma.entry(0, 0).eval([cell_coord_half(p, eps_inv, i), 0.0]))
                .collect();
            (s11, Vec::new(), Vec::new())
        } else {
            // s11 at ((i+1/2)h, jh), s22 at (ih, (j+1/2)h), s12 at nodes
            let mut s11 = Vec::with_capacity(p * side);
            for i in 0..p {
                let y0 = cell_coord_half(p, eps_inv, i);
                for j in 0..side {
                    let y1 = cell_coord(dim, p, eps_inv, 0, j)[1];
                    s11.push(sigma.entry(0, 0).eval([y0, y1]));
                }
            }
            let mut s22 = Vec::with_capacity(side * p);
            for i in 0..side {
                let y0 = cell_coord(dim, p, eps_inv, i, 0)[0];
                for j in 0..p {
                    let y1 = cell_coord_half(p, eps_inv, j);
                    s22.push(sigma.entry(1, 1).eval([y0, y1]));
                }
            }
            let s12: Vec<f64> = (0..nodes)
                .map(|idx| {
                    let (i, j) = (idx / side, idx % side);
                    let y = cell_coord(dim, p, eps_inv, i, j);
                    sigma.entry(0, 1).eval(y)
                })
                .collect();
            (s11, s22, s12)
        };

        Ok(FineProblem {
            eps_inv,
            coeffs: DiscreteCoefficients { dim, p, s11_half, s22_half, s12_node, pot, g: g_node },
        })
    }

    pub fn eps_inv(&self) -> u64 {
        self.eps_inv
    }

    pub fn cells(&self) -> usize {
        self.coeffs.p
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim
    }

    /// Node samples of the noise amplitude (used by invariance tests).
    pub fn noise_samples(&self) -> &[f64] {
        &self.coeffs.g
    }

    /// Node samples of the zeroth-order coefficient.
    pub fn potential_samples(&self) -> &[f64] {
        &self.coeffs.pot
    }

    pub fn stepper(&self, dt: f64) -> Result<ImexStepper> {
        ImexStepper::from_coefficients(&self.coeffs, dt)
    }
}

/// Implicit-explicit stepper holding the factored operator `I + dt L`.
pub struct ImexStepper {
    dim: usize,
    p: usize,
    dt: f64,
    lu: BandLu,
    interior: Vec<usize>,
    g_interior: Vec<f64>,
}

impl ImexStepper {
    fn from_coefficients(co: &DiscreteCoefficients, dt: f64) -> Result<ImexStepper> {
        assert!(dt > 0.0, "time step must be positive");
        let p = co.p;
        let h = 1.0 / p as f64;
        let inv_h2 = 1.0 / (h * h);
        let side = p + 1;

        let (interior, matrix) = match co.dim {
            1 => {
                let n = p - 1;
                let mut a = BandMatrix::zeros(n, 1, 1);
                let interior: Vec<usize> = (1..p).collect();
                for (row, &node) in interior.iter().enumerate() {
                    let i = node;
                    let flux = (co.s11_half[i - 1] + co.s11_half[i]) * inv_h2;
                    a.set(row, row, 1.0 + dt * (flux + co.pot[i]));
                    if i > 1 {
                        a.set(row, row - 1, -dt * co.s11_half[i - 1] * inv_h2);
                    }
                    if i + 1 < p {
                        a.set(row, row + 1, -dt * co.s11_half[i] * inv_h2);
                    }
                }
                (interior, a)
            }
            _ => {
                let nx = p - 1;
                let n = nx * nx;
                let band = p;
                let mut a = BandMatrix::zeros(n, band, band);
                let mut interior = Vec::with_capacity(n);
                for i in 1..p {
                    for j in 1..p {
                        interior.push(i * side + j);
                    }
                }
                let unknown = |i: usize, j: usize| (i - 1) * nx + (j - 1);
                let s11 = |i: usize, j: usize| co.s11_half[i * side + j]; // at (i+1/2, j)
                let s22 = |i: usize, j: usize| co.s22_half[i * p + j]; // at (i, j+1/2)
                let s12 = |i: usize, j: usize| co.s12_node[i * side + j];
                let quarter = 0.25 * inv_h2;
                for i in 1..p {
                    for j in 1..p {
                        let row = unknown(i, j);
                        let flux = (s11(i - 1, j) + s11(i, j) + s22(i, j - 1) + s22(i, j))
                            * inv_h2;
                        a.set(row, row, 1.0 + dt * (flux + co.pot[i * side + j]));
                        if i > 1 {
                            a.set(row, unknown(i - 1, j), -dt * s11(i - 1, j) * inv_h2);
                        }
                        if i + 1 < p {
                            a.set(row, unknown(i + 1, j), -dt * s11(i, j) * inv_h2);
                        }
                        if j > 1 {
                            a.set(row, unknown(i, j - 1), -dt * s22(i, j - 1) * inv_h2);
                        }
                        if j + 1 < p {
                            a.set(row, unknown(i, j + 1), -dt * s22(i, j) * inv_h2);
                        }
                        // mixed derivative, node-centered and symmetric
                        if i + 1 < p && j + 1 < p {
                            let w = (s12(i + 1, j) + s12(i, j + 1)) * quarter;
                            a.set(row, unknown(i + 1, j + 1), -dt * w);
                        }
                        if i + 1 < p && j > 1 {
                            let w = (s12(i + 1, j) + s12(i, j - 1)) * quarter;
                            a.set(row, unknown(i + 1, j - 1), dt * w);
                        }
                        if i > 1 && j + 1 < p {
                            let w = (s12(i - 1, j) + s12(i, j + 1)) * quarter;
                            a.set(row, unknown(i - 1, j + 1), dt * w);
                        }
                        if i > 1 && j > 1 {
                            let w = (s12(i - 1, j) + s12(i, j - 1)) * quarter;
                            a.set(row, unknown(i - 1, j - 1), -dt * w);
                        }
                    }
                }
                (interior, a)
            }
        };

        let lu = matrix.factor()?;
        let g_interior: Vec<f64> = interior.iter().map(|&node| co.g[node]).collect();
        Ok(ImexStepper { dim: co.dim, p, dt, lu, interior, g_interior })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn min_pivot(&self) -> f64 {
        self.lu.min_pivot()
    }

    /// Advance the state by one step under increment `dw`. Boundary nodes
    /// are untouched (they stay exactly zero for admissible initial data).
    pub fn step(&self, state: &mut MacroField, dw: f64) {
        assert_eq!(state.dim(), self.dim);
        assert_eq!(state.cells(), self.p);
        let n = self.interior.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        {
            let values = state.values();
            for (row, &node) in self.interior.iter().enumerate() {
                let load = (1.0 - self.g_interior[row] * dw) * values[node];
                re[row] = load.re;
                im[row] = load.im;
            }
        }
        self.lu.solve(&mut re);
        self.lu.solve(&mut im);
        let values = state.values_mut();
        for (row, &node) in self.interior.iter().enumerate() {
            values[node] = Complex64::new(re[row], im[row]);
        }
    }
}

/// Stepper for the homogenized equation: constant tensor, macroscopic
/// zeroth-order data, constant noise amplitude. Refuses a tensor that is
/// not positive definite.
pub fn effective_stepper(model: &EffectiveModel, p: usize, dt: f64) -> Result<ImexStepper> {
    if model.definiteness != Definiteness::PositiveDefinite {
        let e1 = model.min_eigenvalue;
        let e2 = model.sigma[0][0] + model.sigma[1][1] - e1;
        return Err(Error::NotPositiveDefinite { e1, e2 });
    }
    let dim = model.dim;
    assert_eq!(
        model.d.cells(),
        p,
        "macroscopic data grid must match the solver grid"
    );
    let side = p + 1;
    let nodes = macro_node_count(dim, p);
    let pot: Vec<f64> = model.d.values().iter().map(|v| v.re).collect();
    let g = vec![model.g; nodes];
    let (s11_half, s22_half, s12_node) = match dim {
        1 => (vec![model.sigma[0][0]; p], Vec::new(), Vec::new()),
        _ => (
            vec![model.sigma[0][0]; p * side],
            vec![model.sigma[1][1]; side * p],
            vec![model.sigma[0][1]; nodes],
        ),
    };
    let coeffs = DiscreteCoefficients { dim, p, s11_half, s22_half, s12_node, pot, g };
    ImexStepper::from_coefficients(&coeffs, dt)
}

/// A stored trajectory: snapshots at requested times plus per-step norms.
#[derive(Debug, Clone)]
pub struct FieldPath {
    dt: f64,
    l2_sq: Vec<f64>,
    h1_sq: Vec<f64>,
    snap_times: Vec<f64>,
    snapshots: Vec<MacroField>,
}

impl FieldPath {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Squared L2 norm after each step; index 0 is the initial state.
    pub fn l2_sq(&self) -> &[f64] {
        &self.l2_sq
    }

    /// Squared H1 seminorm (forward differences) after each step.
    pub fn h1_sq(&self) -> &[f64] {
        &self.h1_sq
    }

    pub fn snapshot_times(&self) -> &[f64] {
        &self.snap_times
    }

    pub fn snapshots(&self) -> &[MacroField] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> (f64, &MacroField) {
        (self.snap_times[i], &self.snapshots[i])
    }

    pub fn sup_l2_sq(&self) -> f64 {
        self.l2_sq.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Left-endpoint Riemann sum of the squared H1 seminorm in time.
    pub fn h1_time_integral(&self) -> f64 {
        let steps = self.h1_sq.len() - 1;
        self.h1_sq[..steps].iter().sum::<f64>() * self.dt
    }
}

fn snapshot_steps(path: &NoisePath, times: &[f64]) -> Result<Vec<usize>> {
    let dt = path.dt();
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        let m = (t / dt).round();
        if (t - m * dt).abs() > 1e-9 * t.max(dt) || m < 0.0 {
            return Err(Error::SnapshotOffGrid { t, dt });
        }
        let m = m as usize;
        if m > path.steps() {
            return Err(Error::SnapshotOffGrid { t, dt });
        }
        steps.push(m);
    }
    Ok(steps)
}

struct PathRecorder {
    wanted: Vec<usize>,
    times: Vec<f64>,
    path: FieldPath,
}

impl PathRecorder {
    fn new(dt: f64, wanted: Vec<usize>, times: Vec<f64>) -> Self {
        PathRecorder {
            wanted,
            times,
            path: FieldPath {
                dt,
                l2_sq: Vec::new(),
                h1_sq: Vec::new(),
                snap_times: Vec::new(),
                snapshots: Vec::new(),
            },
        }
    }

    fn record(&mut self, step: usize, state: &MacroField) -> Result<()> {
        let l2 = state.l2_norm_sq();
        let h1 = state.h1_norm_sq();
        if !l2.is_finite() || !h1.is_finite() {
            return Err(Error::NonFiniteSample { context: format!("trajectory at step {step}") });
        }
        self.path.l2_sq.push(l2);
        self.path.h1_sq.push(h1);
        for (w, &t) in self.wanted.iter().zip(&self.times) {
            if *w == step {
                self.path.snap_times.push(t);
                self.path.snapshots.push(state.clone());
            }
        }
        Ok(())
    }

    fn finish(self) -> FieldPath {
        self.path
    }
}

/// March the fine and homogenized equations under the same increments.
/// Initial data is the well-prepared modulation of `v0`; snapshots are taken
/// at the requested times for both trajectories.
pub fn run_coupled(
    fine: &FineProblem,
    model: &EffectiveModel,
    v0: &MacroField,
    path: &NoisePath,
    snapshot_times: &[f64],
) -> Result<(FieldPath, FieldPath)> {
    let p = fine.cells();
    assert_eq!(v0.cells(), p, "initial profile grid must match the solver grid");
    let wanted = snapshot_steps(path, snapshot_times)?;

    let mut u = prepare_initial_data(&model.psi, v0, fine.eps_inv())?;
    let mut v = v0.clone();
    let fine_stepper = fine.stepper(path.dt())?;
    let eff_stepper = effective_stepper(model, p, path.dt())?;

    let mut ru = PathRecorder::new(path.dt(), wanted.clone(), snapshot_times.to_vec());
    let mut rv = PathRecorder::new(path.dt(), wanted, snapshot_times.to_vec());
    ru.record(0, &u)?;
    rv.record(0, &v)?;
    for (m, &dw) in path.increments().iter().enumerate() {
        fine_stepper.step(&mut u, dw);
        eff_stepper.step(&mut v, dw);
        ru.record(m + 1, &u)?;
        rv.record(m + 1, &v)?;
    }
    Ok((ru.finish(), rv.finish()))
}
