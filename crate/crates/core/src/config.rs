//! Run configuration: a small `key = value` format with strict validation.
//!
//! Lines are either blank, full-line comments starting with `#`, or a single
//! `key = value` assignment. Unknown keys, duplicate keys, malformed values
//! and inconsistent combinations are rejected with the offending line
//! number. The raw text is kept verbatim so output manifests can echo the
//! exact input that produced them.

use crate::bloch::SearchOptions;
use crate::error::{Error, Result};
use crate::spde::PhaseMode;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Verbatim configuration text, echoed into manifests.
    pub raw: String,
    pub dim: usize,
    /// Upper-triangle conductivity expressions in `y`: s11, s12, s22.
    pub sigma_exprs: [String; 3],
    pub c_expr: String,
    pub d_expr: String,
    pub g_expr: String,
    pub v0_expr: String,
    pub cutoff: i64,
    pub resolution: usize,
    pub cells: usize,
    pub band: usize,
    pub theta_seed: [f64; 2],
    /// Inverse scale parameters, sorted so the scales decrease.
    pub eps_inv: Vec<u64>,
    pub dt: f64,
    pub t_final: f64,
    pub seeds: Vec<u64>,
    pub snapshot_times: Vec<f64>,
    pub phase_mode: PhaseMode,
    pub theta_grid: usize,
    pub n_bands: usize,
    pub grad_tol: f64,
    pub gap_tol: f64,
    pub fd_step: f64,
    pub hessian_step: f64,
    /// Acceptable max/min ratio of the energy statistic across scales.
    pub energy_factor: f64,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

struct Assignments<'a> {
    entries: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Assignments<'a> {
    fn collect(text: &'a str) -> Result<Self> {
        let known = [
            "dim", "sigma", "sigma11", "sigma12", "sigma22", "c", "d", "g", "v0", "cutoff",
            "resolution", "cells", "band", "theta_seed", "eps", "dt", "t_final", "seeds",
            "snapshot_times", "phase_mode", "theta_grid", "n_bands", "grad_tol", "gap_tol",
            "fd_step", "hessian_step", "energy_factor",
        ];
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| bad(line, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if !known.contains(&key) {
                return Err(bad(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(bad(line, format!("empty value for `{key}`")));
            }
            if entries.iter().any(|(_, k, _)| *k == key) {
                return Err(bad(line, format!("duplicate key `{key}`")));
            }
            entries.push((line, key, value));
        }
        Ok(Assignments { entries })
    }

    fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(line, _, v)| (*line, *v))
    }
}

fn parse_scalar<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| bad(line, format!("cannot parse value of `{key}`: `{value}`")))
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<T>()
                .map_err(|_| bad(line, format!("cannot parse element `{tok}` of `{key}`")))
        })
        .collect()
}

/// One scale entry: either `1/<n>` or the bare inverse `<n>`.
fn parse_eps_entry(line: usize, tok: &str) -> Result<u64> {
    let tok = tok.trim();
    let body = match tok.strip_prefix("1/") {
        Some(rest) => rest.trim(),
        None => tok,
    };
    let inv: u64 = body
        .parse()
        .map_err(|_| bad(line, format!("scale entry `{tok}` is not `1/<integer>`")))?;
    if inv == 0 {
        return Err(bad(line, "scale entry must be positive"));
    }
    Ok(inv)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let asg = Assignments::collect(text)?;

        let dim = match asg.get("dim") {
            Some((line, v)) => {
                let d: usize = parse_scalar(line, "dim", v)?;
                if d != 1 && d != 2 {
                    return Err(bad(line, "dim must be 1 or 2"));
                }
                d
            }
            None => 1,
        };

        let sigma_exprs = {
            let iso = asg.get("sigma");
            let parts = [asg.get("sigma11"), asg.get("sigma12"), asg.get("sigma22")];
            if let Some((line, v)) = iso {
                if parts.iter().any(Option::is_some) {
                    return Err(bad(line, "`sigma` excludes the per-entry sigma keys"));
                }
                [v.to_string(), "0".to_string(), v.to_string()]
            } else {
                if dim == 1 {
                    for (part, name) in parts[1..].iter().zip(["sigma12", "sigma22"]) {
                        if let Some((line, _)) = part {
                            return Err(bad(*line, format!("`{name}` needs dim = 2")));
                        }
                    }
                }
                [
                    parts[0].map_or("1".to_string(), |(_, v)| v.to_string()),
                    parts[1].map_or("0".to_string(), |(_, v)| v.to_string()),
                    parts[2].map_or("1".to_string(), |(_, v)| v.to_string()),
                ]
            }
        };

        let expr_or = |key: &str, default: &str| -> String {
            asg.get(key).map_or(default.to_string(), |(_, v)| v.to_string())
        };
        let c_expr = expr_or("c", "0");
        let d_expr = expr_or("d", "0");
        let g_expr = expr_or("g", "0");
        let v0_expr = expr_or(
            "v0",
            if dim == 1 { "sin(pi*x1)" } else { "sin(pi*x1)*sin(pi*x2)" },
        );

        let cutoff = match asg.get("cutoff") {
            Some((line, v)) => {
                let k: i64 = parse_scalar(line, "cutoff", v)?;
                if k < 1 {
                    return Err(bad(line, "cutoff must be at least 1"));
                }
                k
            }
            None => 32,
        };

        let resolution = match asg.get("resolution") {
            Some((line, v)) => {
                let m: usize = parse_scalar(line, "resolution", v)?;
                if m < 2 || !m.is_power_of_two() {
                    return Err(bad(line, "resolution must be a power of two, at least 2"));
                }
                m
            }
            None => 256,
        };

        let cells = match asg.get("cells") {
            Some((line, v)) => {
                let p: usize = parse_scalar(line, "cells", v)?;
                if p < 2 {
                    return Err(bad(line, "cells must be at least 2"));
                }
                p
            }
            None => 2048,
        };

        let band = match asg.get("band") {
            Some((line, v)) => {
                let b: usize = parse_scalar(line, "band", v)?;
                if b < 1 {
                    return Err(bad(line, "band index is one-based"));
                }
                b
            }
            None => 1,
        };

        let theta_seed = match asg.get("theta_seed") {
            Some((line, v)) => {
                let comps: Vec<f64> = parse_list(line, "theta_seed", v)?;
                match (dim, comps.as_slice()) {
                    (1, [t]) => [*t, 0.0],
                    (2, [t0, t1]) => [*t0, *t1],
                    _ => {
                        return Err(bad(
                            line,
                            format!("theta_seed needs exactly {dim} component(s)"),
                        ))
                    }
                }
            }
            None => [0.0, 0.0],
        };

        let (eps_line, eps_inv) = match asg.get("eps") {
            Some((line, v)) => {
                let list: Vec<u64> = v
                    .split(',')
                    .map(|tok| parse_eps_entry(line, tok))
                    .collect::<Result<_>>()?;
                (line, list)
            }
            None => (0, vec![8, 16, 32]),
        };
        let mut eps_inv = eps_inv;
        eps_inv.sort_unstable();
        if eps_inv.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad(eps_line, "duplicate scale in `eps`"));
        }
        for &inv in &eps_inv {
            if cells % inv as usize != 0 {
                return Err(Error::IncommensurateGrid { p: cells, eps_inv: inv });
            }
        }

        let dt = match asg.get("dt") {
            Some((line, v)) => {
                let dt: f64 = parse_scalar(line, "dt", v)?;
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(bad(line, "dt must be positive and finite"));
                }
                dt
            }
            None => 1e-4,
        };

        let (t_line, t_final) = match asg.get("t_final") {
            Some((line, v)) => {
                let t: f64 = parse_scalar(line, "t_final", v)?;
                if !(t > 0.0) || !t.is_finite() {
                    return Err(bad(line, "t_final must be positive and finite"));
                }
                (line, t)
            }
            None => (0, 0.1),
        };
        let steps = (t_final / dt).round();
        if steps < 1.0 || (t_final / dt - steps).abs() > 1e-9 * (t_final / dt).max(1.0) {
            return Err(bad(t_line, "t_final must be an integer number of dt steps"));
        }

        let seeds = match asg.get("seeds") {
            Some((line, v)) => {
                let s: Vec<u64> = parse_list(line, "seeds", v)?;
                if s.is_empty() {
                    return Err(bad(line, "at least one seed is required"));
                }
                s
            }
            None => vec![42],
        };

        let snapshot_times = match asg.get("snapshot_times") {
            Some((line, v)) => {
                let times: Vec<f64> = parse_list(line, "snapshot_times", v)?;
                for &t in &times {
                    if !(t >= 0.0) || t > t_final * (1.0 + 1e-12) {
                        return Err(bad(line, format!("snapshot time {t} outside [0, t_final]")));
                    }
                    let m = (t / dt).round();
                    if (t - m * dt).abs() > 1e-9 * t.max(dt) {
                        return Err(bad(line, format!("snapshot time {t} is not on the dt grid")));
                    }
                }
                times
            }
            None => vec![t_final],
        };

        let phase_mode = match asg.get("phase_mode") {
            Some((line, v)) => match v {
                "gauge-shift" => PhaseMode::GaugeShift,
                "parabolic" => PhaseMode::Parabolic,
                "paper" => PhaseMode::Paper,
                other => {
                    return Err(bad(
                        line,
                        format!("phase_mode `{other}` is not gauge-shift | parabolic | paper"),
                    ))
                }
            },
            None => PhaseMode::GaugeShift,
        };

        let theta_grid = match asg.get("theta_grid") {
            Some((line, v)) => {
                let n: usize = parse_scalar(line, "theta_grid", v)?;
                if n < 2 {
                    return Err(bad(line, "theta_grid must be at least 2"));
                }
                n
            }
            None => 32,
        };

        let n_bands = match asg.get("n_bands") {
            Some((line, v)) => {
                let n: usize = parse_scalar(line, "n_bands", v)?;
                if n < 1 {
                    return Err(bad(line, "n_bands must be at least 1"));
                }
                n
            }
            None => 4,
        };

        let positive = |key: &str, default: f64| -> Result<f64> {
            match asg.get(key) {
                Some((line, v)) => {
                    let x: f64 = parse_scalar(line, key, v)?;
                    if !(x > 0.0) || !x.is_finite() {
                        return Err(bad(line, format!("{key} must be positive and finite")));
                    }
                    Ok(x)
                }
                None => Ok(default),
            }
        };
        let defaults = SearchOptions::default();
        let grad_tol = positive("grad_tol", defaults.grad_tol)?;
        let gap_tol = positive("gap_tol", defaults.gap_tol)?;
        let fd_step = positive("fd_step", defaults.fd_step)?;
        let hessian_step = positive("hessian_step", defaults.hessian_step)?;
        let energy_factor = positive("energy_factor", 10.0)?;

        Ok(RunConfig {
            raw: text.to_string(),
            dim,
            sigma_exprs,
            c_expr,
            d_expr,
            g_expr,
            v0_expr,
            cutoff,
            resolution,
            cells,
            band,
            theta_seed,
            eps_inv,
            dt,
            t_final,
            seeds,
            snapshot_times,
            phase_mode,
            theta_grid,
            n_bands,
            grad_tol,
            gap_tol,
            fd_step,
            hessian_step,
            energy_factor,
        })
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            grad_tol: self.grad_tol,
            gap_tol: self.gap_tol,
            fd_step: self.fd_step,
            hessian_step: self.hessian_step,
            ..SearchOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.dim, 1);
        assert_eq!(cfg.cutoff, 32);
        assert_eq!(cfg.resolution, 256);
        assert_eq!(cfg.cells, 2048);
        assert_eq!(cfg.eps_inv, vec![8, 16, 32]);
        assert_eq!(cfg.seeds, vec![42]);
        assert_eq!(cfg.snapshot_times, vec![0.1]);
        assert_eq!(cfg.phase_mode, PhaseMode::GaugeShift);
        assert_eq!(cfg.v0_expr, "sin(pi*x1)");
        assert_eq!(cfg.sigma_exprs, ["1", "0", "1"]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# a comment\n\n  c = 2*cos(2*pi*y1)\n").unwrap();
        assert_eq!(cfg.c_expr, "2*cos(2*pi*y1)");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let err = RunConfig::parse("dim = 1\nbogus = 3\n").unwrap_err();
        match err {
            Error::Config { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("bogus"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = RunConfig::parse("dt = 1e-3\ndt = 1e-4\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
    }

    #[test]
    fn scales_accept_fractions_and_sort_descending() {
        let cfg = RunConfig::parse("eps = 1/32, 1/8, 1/16\ncells = 64\n").unwrap();
        assert_eq!(cfg.eps_inv, vec![8, 16, 32]);
    }

    #[test]
    fn incommensurate_scale_is_flagged_at_parse_time() {
        let err = RunConfig::parse("eps = 1/3\ncells = 64\n").unwrap_err();
        assert!(matches!(err, Error::IncommensurateGrid { p: 64, eps_inv: 3 }));
    }

    #[test]
    fn fractional_step_count_is_rejected() {
        let err = RunConfig::parse("dt = 3e-4\nt_final = 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn off_grid_snapshot_is_rejected() {
        let err =
            RunConfig::parse("dt = 1e-3\nt_final = 0.1\nsnapshot_times = 0.0505\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
    }

    #[test]
    fn isotropic_shorthand_excludes_entry_keys() {
        let err = RunConfig::parse("dim = 2\nsigma = 1\nsigma12 = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
    }

    #[test]
    fn matrix_entries_need_two_dimensions() {
        let err = RunConfig::parse("sigma22 = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }

    #[test]
    fn theta_seed_arity_must_match_dim() {
        assert!(RunConfig::parse("theta_seed = 0.1, 0.2\n").is_err());
        let cfg = RunConfig::parse("dim = 2\ntheta_seed = 0.1, -0.2\n").unwrap();
        assert_eq!(cfg.theta_seed, [0.1, -0.2]);
    }

    #[test]
    fn raw_text_is_kept_verbatim() {
        let text = "# hello\ncutoff = 8\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.raw, text);
    }
}
