use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expression parse error at {pos}: {msg}")]
    ExprParse { pos: usize, msg: String },

    #[error("expression uses variable `{var}` which is not available here")]
    ExprBadVariable { var: String },

    #[error("field sample at {context} is not finite")]
    NonFiniteSample { context: String },

    #[error("grid resolution {m} must be a power of two and at least 2")]
    BadResolution { m: usize },

    #[error("dimension {dim} is not supported (must be 1 or 2)")]
    BadDimension { dim: usize },

    #[error("diffusion matrix is not symmetric: |s12 - s21| = {deviation:.3e} at grid node {node}")]
    NonSymmetricMatrix { node: usize, deviation: f64 },

    #[error("diffusion matrix is not uniformly elliptic: min eigenvalue {nu:.6e}")]
    NonCoercive { nu: f64 },

    #[error("cutoff {cutoff} exceeds field resolution {m}: offsets up to {needed} would be truncated")]
    CutoffExceedsResolution { cutoff: i64, m: usize, needed: i64 },

    #[error("assembled operator is not Hermitian: max deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    EigensolveStalled { sweeps: usize, off: f64 },

    #[error("band {band} is not simple at this quasi-momentum: gap {gap:.3e} below tolerance {tol:.3e}")]
    BandCrossing { band: usize, gap: f64, tol: f64 },

    #[error("critical point search did not converge after {iters} iterations (|grad| = {grad_norm:.3e})")]
    SearchStalled { iters: usize, grad_norm: f64 },

    #[error("critical point is degenerate: Hessian eigenvalue {eig:.3e} below tolerance")]
    DegenerateCriticalPoint { eig: f64 },

    #[error("solvability violated: |<psi, rhs>| = {inner:.3e} exceeds {tol:.3e}")]
    NotSolvable { inner: f64, tol: f64 },

    #[error("deflated system is ill-conditioned: pivot ratio {ratio:.3e}")]
    IllConditioned { ratio: f64 },

    #[error("corrector residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("quantity expected real has imaginary part {imag:.3e} (tolerance {tol:.3e})")]
    SpuriousImaginaryPart { imag: f64, tol: f64 },

    #[error("effective diffusion is not positive definite (eigenvalues {e1:.6e}, {e2:.6e}); refusing to simulate")]
    NotPositiveDefinite { e1: f64, e2: f64 },

    #[error("effective tensor routes disagree: relative gap {gap:.3e} exceeds {tol:.3e}")]
    RouteMismatch { gap: f64, tol: f64 },

    #[error("time-step operator is singular or indefinite: minimum pivot {min_pivot:.3e}")]
    SingularTimeStep { min_pivot: f64 },

    #[error("initial profile violates the homogeneous boundary condition: |v0| = {value:.3e} at boundary node")]
    BoundaryViolation { value: f64 },

    #[error("grid with {p} cells per axis is incommensurate with scale 1/{eps_inv}")]
    IncommensurateGrid { p: usize, eps_inv: u64 },

    #[error("scale separation 1/{eps_inv} under-resolved: only {cells} grid cells per period (need >= {min})")]
    ScaleUnderResolved { eps_inv: u64, cells: usize, min: usize },

    #[error("noise increments fail the moment check: {what} off by {sigmas:.1} standard errors")]
    NoiseMoments { what: String, sigmas: f64 },

    #[error("step count {steps} is not divisible by coarsening factor {factor}")]
    BadCoarsening { steps: usize, factor: usize },

    #[error("ensemble of {n} paths is too small (need at least {min})")]
    EnsembleTooSmall { n: usize, min: usize },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("snapshot time {t} does not lie on the step grid (dt = {dt})")]
    SnapshotOffGrid { t: f64, dt: f64 },
}
