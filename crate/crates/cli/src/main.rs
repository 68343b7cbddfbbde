//! Command line driver.
//!
//! Every subcommand reads one configuration file, writes its results under
//! an output directory, and finishes with a `manifest.json` naming the files
//! it produced. Numeric output is plain CSV with full-precision floats, so
//! reruns of the same configuration are byte-identical.
//!
//! Exit codes: 0 on success, 1 when a computation refuses to proceed or a
//! verification verdict fails, 2 for configuration and I/O problems.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use bloch_homog::bloch::{find_critical_point, BandSolver};
use bloch_homog::config::RunConfig;
use bloch_homog::correctors::weak_identity_residuals;
use bloch_homog::pipeline::{build_problem, run_pipeline, simulate_scale};
use bloch_homog::spde::FieldPath;
use bloch_homog::verify::convergence_sweep;
use bloch_homog::Error;

#[derive(Parser)]
#[command(name = "bloch-homog", version, about = "Bloch-wave homogenization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (key = value lines)
    #[arg(long)]
    config: PathBuf,

    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Replace the configured seed list with this single seed
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: BLOCH_HOMOG_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Band surfaces over a quasi-momentum grid
    Bands(Common),
    /// Locate and certify the critical point of the configured band
    Critical(Common),
    /// First and second correctors at the critical point
    Correctors(Common),
    /// Effective coefficients and their cross-checks
    Effective(Common),
    /// Coupled fine and homogenized trajectories per scale and seed
    Simulate(Common),
    /// Full convergence study with pass/fail verdicts
    Verify(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands(_) => "bands",
            Command::Critical(_) => "critical",
            Command::Correctors(_) => "correctors",
            Command::Effective(_) => "effective",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Bands(c)
            | Command::Critical(c)
            | Command::Correctors(c)
            | Command::Effective(c)
            | Command::Simulate(c)
            | Command::Verify(c) => c,
        }
    }
}

/// Problems before any computation starts (bad flags, unreadable files,
/// invalid configuration) exit 2; refusals from the toolkit exit 1 and
/// leave an error manifest behind.
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn io_fail(context: &str, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let common = cli.command.common();

    let text = match fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    if let Err(msg) = init_threads(common.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if let Err(e) = fs::create_dir_all(&common.out) {
        eprintln!("error: cannot create {}: {e}", common.out.display());
        return ExitCode::from(2);
    }

    match dispatch(name, &cfg, &common.out) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            let _ = write_error_manifest(&common.out, name, &cfg.raw, &e.to_string());
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(flag: Option<usize>) -> std::result::Result<(), String> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BLOCH_HOMOG_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .map_err(|_| format!("BLOCH_HOMOG_THREADS is not a thread count: `{v}`"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("thread count must be positive".into());
        }
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(name: &str, cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    match name {
        "bands" => cmd_bands(cfg, out),
        "critical" => cmd_critical(cfg, out),
        "correctors" => cmd_correctors(cfg, out),
        "effective" => cmd_effective(cfg, out),
        "simulate" => cmd_simulate(cfg, out),
        "verify" => cmd_verify(cfg, out),
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------- output

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    version: &'static str,
    command: &'a str,
    config: &'a str,
    outputs: Vec<String>,
    summary: T,
}

fn write_json(path: &Path, value: &impl Serialize) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Usage(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_fail(&path.display().to_string(), e))
}

fn write_manifest(
    out: &Path,
    command: &str,
    raw: &str,
    outputs: Vec<String>,
    summary: impl Serialize,
) -> std::result::Result<(), Failure> {
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: raw,
        outputs,
        summary,
    };
    write_json(&out.join("manifest.json"), &manifest)
}

fn write_error_manifest(out: &Path, command: &str, raw: &str, error: &str) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct ErrorManifest<'a> {
        version: &'static str,
        command: &'a str,
        config: &'a str,
        error: &'a str,
    }
    let m = ErrorManifest {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: raw,
        error,
    };
    let mut text = serde_json::to_string_pretty(&m).expect("error manifest serializes");
    text.push('\n');
    fs::write(out.join("manifest.json"), text)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    path: PathBuf,
    buf: String,
}

impl Csv {
    fn new(out: &Path, name: &str, header: &str) -> Csv {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { path: out.join(name), buf }
    }

    fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    fn finish(self) -> std::result::Result<String, Failure> {
        fs::write(&self.path, self.buf).map_err(|e| io_fail(&self.path.display().to_string(), e))?;
        Ok(self
            .path
            .file_name()
            .expect("csv path has a file name")
            .to_string_lossy()
            .into_owned())
    }
}

/// Dump a coefficient vector on the plane-wave basis as k1,k2,re,im rows.
fn coeff_csv(
    out: &Path,
    name: &str,
    points: &[[i64; 2]],
    coeffs: &[Complex64],
) -> std::result::Result<String, Failure> {
    let mut csv = Csv::new(out, name, "k1,k2,re,im");
    for (k, c) in points.iter().zip(coeffs) {
        csv.row(&[k[0].to_string(), k[1].to_string(), fmt(c.re), fmt(c.im)]);
    }
    csv.finish()
}

/// Dump a macroscopic state as node,x1[,x2],re,im rows, optionally under a
/// leading time column.
fn state_rows(csv: &mut Csv, t: Option<f64>, field: &bloch_homog::fields::MacroField) {
    let dim = field.dim();
    for (idx, v) in field.values().iter().enumerate() {
        let x = field.node_coords(idx);
        let mut row = Vec::with_capacity(6);
        if let Some(t) = t {
            row.push(fmt(t));
        }
        row.push(idx.to_string());
        row.push(fmt(x[0]));
        if dim == 2 {
            row.push(fmt(x[1]));
        }
        row.push(fmt(v.re));
        row.push(fmt(v.im));
        csv.row(&row);
    }
}

fn state_header(dim: usize, with_time: bool) -> &'static str {
    match (with_time, dim) {
        (true, 2) => "t,node,x1,x2,re,im",
        (true, _) => "t,node,x1,re,im",
        (false, 2) => "node,x1,x2,re,im",
        (false, _) => "node,x1,re,im",
    }
}

// ---------------------------------------------------------------- commands

fn cmd_bands(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let problem = build_problem(cfg)?;
    let solver = BandSolver::new(problem.sigma, problem.c, cfg.cutoff);
    let n = cfg.theta_grid;
    let step = 1.0 / n as f64;

    let thetas: Vec<[f64; 2]> = if cfg.dim == 1 {
        (0..=n).map(|i| [-0.5 + i as f64 * step, 0.0]).collect()
    } else {
        let mut grid = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                grid.push([-0.5 + i as f64 * step, -0.5 + j as f64 * step]);
            }
        }
        grid
    };

    let mut csv = Csv::new(out, "bands.csv", "theta1,theta2,band,lambda");
    for theta in &thetas {
        let spectrum = solver.spectrum(*theta)?;
        for band in 1..=cfg.n_bands.min(spectrum.len()) {
            csv.row(&[
                fmt(theta[0]),
                fmt(theta[1]),
                band.to_string(),
                fmt(spectrum.value(band)),
            ]);
        }
    }
    let file = csv.finish()?;

    #[derive(Serialize)]
    struct Summary {
        dim: usize,
        theta_points: usize,
        bands: usize,
    }
    write_manifest(
        out,
        "bands",
        &cfg.raw,
        vec![file],
        Summary { dim: cfg.dim, theta_points: thetas.len(), bands: cfg.n_bands },
    )?;
    Ok(0)
}

fn cmd_critical(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let problem = build_problem(cfg)?;
    let solver = BandSolver::new(problem.sigma, problem.c, cfg.cutoff);
    let point = find_critical_point(&solver, cfg.band, cfg.theta_seed, &cfg.search_options())?;
    write_json(&out.join("critical.json"), &point)?;

    #[derive(Serialize)]
    struct Summary {
        band: usize,
        theta: Vec<f64>,
        lambda: f64,
        grad_norm: f64,
    }
    write_manifest(
        out,
        "critical",
        &cfg.raw,
        vec!["critical.json".into()],
        Summary {
            band: point.band,
            theta: point.theta[..cfg.dim].to_vec(),
            lambda: point.lambda,
            grad_norm: point.grad_norm,
        },
    )?;
    Ok(0)
}

fn cmd_correctors(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let pl = run_pipeline(cfg)?;
    let points = pl.op.basis().points();
    let dim = cfg.dim;

    let mut outputs = vec![coeff_csv(out, "psi.csv", points, pl.pair.coeffs())?];
    for k in 0..dim {
        outputs.push(coeff_csv(out, &format!("zeta_{}.csv", k + 1), points, pl.set.zeta(k))?);
    }
    for k in 0..dim {
        for l in k..dim {
            outputs.push(coeff_csv(
                out,
                &format!("chi_{}{}.csv", k + 1, l + 1),
                points,
                pl.set.chi(k, l),
            )?);
        }
    }

    // residual bookkeeping: how well each corrector satisfies its equation
    // and how orthogonal it stays to the eigenfunction
    let lambda = pl.pair.lambda();
    let mut zeta_residuals = Vec::new();
    let mut zeta_orth = Vec::new();
    for k in 0..dim {
        let rhs = bloch_homog::correctors::zeta_rhs(&pl.op, &pl.pair, k);
        zeta_residuals.push(pl.op.shifted_residual(lambda, pl.set.zeta(k), &rhs));
        let inner: Complex64 = pl
            .pair
            .coeffs()
            .iter()
            .zip(pl.set.zeta(k))
            .map(|(p, z)| p.conj() * z)
            .sum();
        zeta_orth.push(inner.norm());
    }
    let extra: Vec<Vec<Complex64>> = (0..dim)
        .flat_map(|k| (k..dim).map(move |l| (k, l)))
        .map(|(k, l)| pl.set.chi(k, l).to_vec())
        .collect();
    let weak = weak_identity_residuals(&pl.op, &pl.pair, pl.set.zetas(), 0.125, &extra);

    let hess = pl.set.hessian();
    #[derive(Serialize)]
    struct CorrectorReport {
        band: usize,
        dim: usize,
        theta: Vec<f64>,
        lambda: f64,
        hessian: Vec<Vec<f64>>,
        zeta_residuals: Vec<f64>,
        zeta_orthogonality: Vec<f64>,
        weak_identity_cell: f64,
        weak_identity_corrector: f64,
    }
    let report = CorrectorReport {
        band: pl.set.band(),
        dim,
        theta: pl.set.theta()[..dim].to_vec(),
        lambda,
        hessian: (0..dim).map(|k| hess[k][..dim].to_vec()).collect(),
        zeta_residuals,
        zeta_orthogonality: zeta_orth,
        weak_identity_cell: weak.cell,
        weak_identity_corrector: weak.corrector,
    };
    write_json(&out.join("correctors.json"), &report)?;
    outputs.insert(0, "correctors.json".into());

    write_manifest(out, "correctors", &cfg.raw, outputs, &report)?;
    Ok(0)
}

fn cmd_effective(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let pl = run_pipeline(cfg)?;
    let model = &pl.model;
    let dim = cfg.dim;

    #[derive(Serialize)]
    struct EffectiveReport {
        band: usize,
        dim: usize,
        theta: Vec<f64>,
        lambda_critical: f64,
        lambda_model: f64,
        sigma: Vec<Vec<f64>>,
        g: f64,
        definiteness: bloch_homog::effective::Definiteness,
        min_eigenvalue: f64,
        provenance: bloch_homog::effective::Provenance,
    }
    let report = EffectiveReport {
        band: model.band,
        dim,
        theta: model.theta[..dim].to_vec(),
        lambda_critical: pl.point.lambda,
        lambda_model: model.lambda,
        sigma: (0..dim).map(|k| model.sigma[k][..dim].to_vec()).collect(),
        g: model.g,
        definiteness: model.definiteness,
        min_eigenvalue: model.min_eigenvalue,
        provenance: model.provenance,
    };
    write_json(&out.join("effective.json"), &report)?;

    let mut csv = Csv::new(out, "d_star.csv", state_header(dim, false));
    state_rows(&mut csv, None, &model.d);
    let d_file = csv.finish()?;

    write_manifest(
        out,
        "effective",
        &cfg.raw,
        vec!["effective.json".into(), d_file],
        &report,
    )?;
    Ok(0)
}

fn cmd_simulate(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let pl = run_pipeline(cfg)?;

    #[derive(Serialize)]
    struct RunSummary {
        eps_inv: u64,
        seed: u64,
        fine_sup_l2_sq: f64,
        fine_final_l2: f64,
        homog_final_l2: f64,
    }
    let mut outputs = Vec::new();
    let mut runs = Vec::new();

    for &seed in &cfg.seeds {
        let mut homog_written = false;
        for &eps_inv in &cfg.eps_inv {
            let (fine, homog) = simulate_scale(&pl, cfg, eps_inv, seed)?;

            let tag = format!("1over{eps_inv}_seed{seed}");
            let mut csv =
                Csv::new(out, &format!("fine_{tag}.csv"), state_header(cfg.dim, true));
            for (i, snap) in fine.snapshots().iter().enumerate() {
                state_rows(&mut csv, Some(fine.snapshot_times()[i]), snap);
            }
            outputs.push(csv.finish()?);

            outputs.push(norms_csv(out, &format!("norms_{tag}.csv"), &fine, &homog)?);

            // the homogenized path depends on the seed but not on the scale
            if !homog_written {
                let mut csv = Csv::new(
                    out,
                    &format!("homog_seed{seed}.csv"),
                    state_header(cfg.dim, true),
                );
                for (i, snap) in homog.snapshots().iter().enumerate() {
                    state_rows(&mut csv, Some(homog.snapshot_times()[i]), snap);
                }
                outputs.push(csv.finish()?);
                homog_written = true;
            }

            let last = fine.snapshots().len() - 1;
            runs.push(RunSummary {
                eps_inv,
                seed,
                fine_sup_l2_sq: fine.sup_l2_sq(),
                fine_final_l2: fine.snapshot(last).1.l2_norm(),
                homog_final_l2: homog.snapshot(last).1.l2_norm(),
            });
        }
    }

    #[derive(Serialize)]
    struct Summary {
        runs: Vec<RunSummary>,
    }
    write_manifest(out, "simulate", &cfg.raw, outputs, Summary { runs })?;
    Ok(0)
}

fn norms_csv(
    out: &Path,
    name: &str,
    fine: &FieldPath,
    homog: &FieldPath,
) -> std::result::Result<String, Failure> {
    let mut csv = Csv::new(out, name, "step,t,fine_l2_sq,fine_h1_sq,homog_l2_sq,homog_h1_sq");
    let dt = fine.dt();
    for (m, (((fl, fh), hl), hh)) in fine
        .l2_sq()
        .iter()
        .zip(fine.h1_sq())
        .zip(homog.l2_sq())
        .zip(homog.h1_sq())
        .enumerate()
    {
        csv.row(&[
            m.to_string(),
            fmt(m as f64 * dt),
            fmt(*fl),
            fmt(*fh),
            fmt(*hl),
            fmt(*hh),
        ]);
    }
    csv.finish()
}

fn cmd_verify(cfg: &RunConfig, out: &Path) -> std::result::Result<u8, Failure> {
    let report = convergence_sweep(cfg)?;

    write_json(&out.join("report.json"), &report)?;
    let mut outputs = vec!["report.json".into()];

    let mut csv = Csv::new(out, "factorization.csv", "eps_inv,seed,t,error");
    for row in &report.factorization {
        for (t, err) in row.times.iter().zip(&row.errors) {
            csv.row(&[row.eps_inv.to_string(), row.seed.to_string(), fmt(*t), fmt(*err)]);
        }
    }
    outputs.push(csv.finish()?);

    let mut csv = Csv::new(out, "pairing.csv", "eps_inv,value_re,value_im,limit_re,limit_im,error");
    for row in &report.pairing {
        csv.row(&[
            row.eps_inv.to_string(),
            fmt(row.value_re),
            fmt(row.value_im),
            fmt(row.limit_re),
            fmt(row.limit_im),
            fmt(row.error),
        ]);
    }
    outputs.push(csv.finish()?);

    if !report.energy.is_empty() {
        let mut csv = Csv::new(out, "energy.csv", "eps_inv,statistic,bound_factor");
        for row in &report.energy {
            csv.row(&[row.eps_inv.to_string(), fmt(row.statistic), fmt(row.bound_factor)]);
        }
        outputs.push(csv.finish()?);
    }

    #[derive(Serialize)]
    struct Summary<'a> {
        verdicts: &'a bloch_homog::verify::Verdicts,
        empirical_rate: Option<f64>,
        incomplete: &'a Option<String>,
    }
    write_manifest(
        out,
        "verify",
        &cfg.raw,
        outputs,
        Summary {
            verdicts: &report.verdicts,
            empirical_rate: report.empirical_rate,
            incomplete: &report.incomplete,
        },
    )?;

    // readable one-line verdicts on stdout
    let mut line = std::io::stdout().lock();
    let v = &report.verdicts;
    let _ = writeln!(line, "factorization monotone: {}", yesno(v.factorization_monotone));
    let _ = writeln!(line, "final error below tolerance: {}", yesno(v.final_error_small));
    if v.energy_checked {
        let _ = writeln!(line, "energy uniform: {}", yesno(v.energy_uniform));
        let _ = writeln!(line, "energy bounded: {}", yesno(v.energy_bounded));
    }
    let _ = writeln!(line, "overall: {}", yesno(v.all));

    if report.incomplete.is_some() || !report.verdicts.all {
        return Ok(1);
    }
    Ok(0)
}

fn yesno(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}
