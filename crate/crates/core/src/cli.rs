//! Command-line front end. Every verb writes one payload (JSON or CSV) to
//! stdout and a run manifest to stderr or a file.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::conjecture::{deviation, folded_ratio, write_curve_csv, Backend, GridSpec};
use crate::ensemble::{
    decays, offdiagonal_decay, run_ensemble_with_progress, write_histogram_csv, EnsembleConfig, GeneralStatePair,
};
use crate::error::{ChargeError, Result};
use crate::exact::{charge_exact_capped, DEFAULT_DEGREE_CAP};
use crate::monodromy::ChargeEvaluator;
use crate::output::{fmt_num, round_json};
use crate::poles::{classify_physical_strip, curve_solutions, find_poles, hyperbola_residual, write_poles_csv};
use crate::spin_algebra::RepIndex;
use crate::state::SpinState;
use crate::thermo::{gibbs_average, write_densities_csv};

pub const MANIFEST_SCHEMA: &str = "run-manifest/1";

#[derive(Debug, Parser)]
#[command(name = "hcharges", version, about = "Conserved charges of periodic product states of the Heisenberg chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Numeric,
    Auto,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Numeric => Backend::Numeric,
            BackendArg::Auto => Backend::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Substate as a string of 1 (up) and 2 (down).
    #[arg(long, value_parser = parse_state)]
    pub psi: SpinState,
    #[arg(long)]
    pub jj: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact rational charge or numeric values on a list of spectral points.
    Charge {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, conflicts_with = "numeric")]
        exact: bool,
        #[arg(long)]
        numeric: bool,
        /// Comma-separated points or `lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        degree_cap: usize,
    },
    /// Poles of the exact charge.
    Poles {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Maximal relative deviation from the large-μ approximation.
    Deviation {
        #[command(flatten)]
        state: StateArgs,
        /// `lo:hi:points[:refinement]`.
        #[arg(long, allow_hyphen_values = true, default_value = "-10:10:2001:10")]
        grid: String,
        #[arg(long, value_enum, default_value = "auto")]
        backend: BackendArg,
        /// Print the charge curves on the grid as CSV instead.
        #[arg(long)]
        curves: bool,
    },
    /// Deviation statistics over seeded random substates.
    Ensemble {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        jj: u32,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, allow_hyphen_values = true, default_value = "-10:10:2001:10")]
        grid: String,
        #[arg(long, value_enum, default_value = "auto")]
        backend: BackendArg,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// `csv` prints the histogram.
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Infinite-temperature average of the charge.
    Gibbs {
        #[arg(long)]
        jj: u32,
        #[arg(long, allow_hyphen_values = true)]
        mu_grid: String,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// String and hole densities from the string-charge relations.
    Densities {
        #[arg(long)]
        jj: u32,
        #[arg(long, allow_hyphen_values = true, default_value = "-5:5:101")]
        mu_grid: String,
    },
    /// Solutions of (μ²/(μ²+1))^M = 1.
    Curve {
        #[arg(long = "M")]
        m: usize,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Norms of repeated mixed-index monodromy products.
    Decay {
        #[arg(long, value_parser = parse_state)]
        psi_m: SpinState,
        #[arg(long, value_parser = parse_state)]
        psi_n: SpinState,
        #[arg(long)]
        jj: u32,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        mu: f64,
    },
}

fn parse_state(s: &str) -> std::result::Result<SpinState, String> {
    s.parse().map_err(|e: ChargeError| e.to_string())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| ChargeError::Parse(format!("not a number: {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| ChargeError::Parse(format!("not a count: {s:?}")))
}

/// `lo:hi:points[:refinement]`.
pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => GridSpec::new(parse_f64(lo)?, parse_f64(hi)?, parse_usize(n)?, 1),
        [lo, hi, n, r] => GridSpec::new(parse_f64(lo)?, parse_f64(hi)?, parse_usize(n)?, parse_usize(r)?),
        _ => Err(ChargeError::Parse(format!("grid must be lo:hi:points[:refinement], got {s:?}"))),
    }
}

/// A comma-separated list or a `lo:hi:n` grid.
pub fn parse_mu_list(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        Ok(parse_grid(s)?.nodes())
    } else {
        s.split(',').filter(|p| !p.trim().is_empty()).map(parse_f64).collect()
    }
}

/// What a verb produced: the stdout payload and the seed it used.
#[derive(Debug)]
pub struct Payload {
    pub body: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: Option<u64>,
    pub library_version: &'static str,
    pub timestamp: u64,
    pub output_digests: Vec<OutputDigest>,
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub stream: &'static str,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(arguments: Vec<String>, payload: &Payload) -> Self {
        let command = arguments.iter().skip(1).find(|a| !a.starts_with('-')).cloned().unwrap_or_default();
        let digest = Sha256::digest(payload.body.as_bytes());
        RunManifest {
            schema: MANIFEST_SCHEMA,
            command,
            arguments: arguments.into_iter().skip(1).collect(),
            seed: payload.seed,
            library_version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            output_digests: vec![OutputDigest {
                stream: "stdout",
                sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            }],
        }
    }
}

fn to_json(v: impl Serialize) -> Result<String> {
    let mut v = serde_json::to_value(v).map_err(|e| ChargeError::Invariant(e.to_string()))?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| ChargeError::Invariant(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| ChargeError::Invariant(e.to_string()))
}

fn rows_csv(header: [&str; 2], rows: &[(f64, f64)]) -> Result<String> {
    csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header)?;
        for &(a, b) in rows {
            w.write_record([fmt_num(a), fmt_num(b)])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn rep(jj: u32) -> Result<RepIndex> {
    RepIndex::new(jj)
}

fn progress(quiet: bool) -> impl Fn(&str) + Sync {
    move |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    }
}

/// Runs a parsed command and returns its payload.
pub fn execute(cli: &Cli) -> Result<Payload> {
    let say = progress(cli.quiet);
    let body = match &cli.command {
        Command::Charge { state, exact: _, numeric, mu, out, degree_cap } => {
            let jj = rep(state.jj)?;
            let mus = mu.as_deref().map(parse_mu_list).transpose()?;
            if *numeric {
                let ev = ChargeEvaluator::new(jj);
                let mus = mus.unwrap_or_else(|| vec![0.0]);
                let rows = mus.iter().map(|&m| Ok((m, ev.charge_real(&state.psi, m)?))).collect::<Result<Vec<_>>>()?;
                match out {
                    Format::Csv => rows_csv(["mu", "X"], &rows)?,
                    Format::Json => to_json(json!({
                        "schema": "charge-values/1",
                        "psi": state.psi.to_string(),
                        "jj": state.jj,
                        "backend": "numeric",
                        "values": rows.iter().map(|(m, x)| json!({"mu": m, "X": x})).collect::<Vec<_>>(),
                    }))?,
                }
            } else {
                let rc = charge_exact_capped(&state.psi, jj, *degree_cap)?;
                match out {
                    Format::Json => {
                        let mut v = serde_json::to_value(rc.to_json()).map_err(|e| ChargeError::Invariant(e.to_string()))?;
                        v["psi"] = Value::String(state.psi.to_string());
                        v["display"] = Value::String(rc.to_string());
                        if let Some(mus) = &mus {
                            v["values"] = mus.iter().map(|&m| json!({"mu": m, "X": rc.eval_f64(m)})).collect();
                        }
                        to_json(v)?
                    }
                    Format::Csv => {
                        let mus = mus.unwrap_or_else(|| vec![0.0]);
                        let rows: Vec<(f64, f64)> = mus.iter().map(|&m| (m, rc.eval_f64(m))).collect();
                        rows_csv(["mu", "X"], &rows)?
                    }
                }
            }
        }
        Command::Poles { state, out } => {
            let jj = rep(state.jj)?;
            let ps = find_poles(&charge_exact_capped(&state.psi, jj, DEFAULT_DEGREE_CAP)?)?;
            match out {
                Format::Csv => csv_string(|buf| write_poles_csv(&ps, buf))?,
                Format::Json => {
                    let poles: Vec<Value> = ps
                        .roots
                        .iter()
                        .zip(&ps.multiplicities)
                        .map(|(z, k)| {
                            json!({
                                "re_mu": z.re,
                                "im_mu": z.im,
                                "multiplicity": k,
                                "on_hyperbola_residual": (state.jj == 1).then(|| hyperbola_residual(*z)),
                            })
                        })
                        .collect();
                    to_json(json!({
                        "schema": "pole-set/1",
                        "psi": state.psi.to_string(),
                        "jj": state.jj,
                        "root_residual": ps.residual,
                        "total_with_multiplicity": ps.total(),
                        "poles": poles,
                        "physical_strip": classify_physical_strip(&ps),
                    }))?
                }
            }
        }
        Command::Deviation { state, grid, backend, curves } => {
            let jj = rep(state.jj)?;
            let grid = parse_grid(grid)?;
            if *curves {
                csv_string(|buf| write_curve_csv(&state.psi, jj, &grid.nodes(), (*backend).into(), buf))?
            } else {
                let d = deviation(&state.psi, jj, &grid, (*backend).into())?;
                to_json(json!({
                    "schema": "deviation/1",
                    "psi": state.psi.to_string(),
                    "jj": state.jj,
                    "r": folded_ratio(&state.psi),
                    "grid": grid,
                    "delta": d.delta,
                    "argmax": d.argmax,
                    "excluded": d.excluded,
                }))?
            }
        }
        Command::Ensemble { m, jj, count, seed, grid, backend, threads, bins, out } => {
            let mut cfg = EnsembleConfig::new(*m, *jj, *count, *seed);
            cfg.grid = parse_grid(grid)?;
            cfg.backend = (*backend).into();
            cfg.parallelism = *threads;
            cfg.bins = *bins;
            let step = (*count / 10).max(1);
            let report = run_ensemble_with_progress(&cfg, |done| {
                if done % step == 0 || done == *count {
                    say(&format!("ensemble: {done}/{count} states"));
                }
            })?;
            let body = match out {
                Format::Json => to_json(&report)?,
                Format::Csv => csv_string(|buf| write_histogram_csv(&report, buf))?,
            };
            return Ok(Payload { body, seed: Some(*seed) });
        }
        Command::Gibbs { jj, mu_grid, out } => {
            let j = rep(*jj)?;
            let rows: Vec<(f64, f64)> = parse_mu_list(mu_grid)?.into_iter().map(|m| (m, gibbs_average(j, m))).collect();
            match out {
                Format::Csv => rows_csv(["mu", "average"], &rows)?,
                Format::Json => to_json(json!({
                    "schema": "gibbs-average/1",
                    "jj": jj,
                    "values": rows.iter().map(|(m, a)| json!({"mu": m, "average": a})).collect::<Vec<_>>(),
                }))?,
            }
        }
        Command::Densities { jj, mu_grid } => {
            let j = rep(*jj)?;
            let mus = parse_mu_list(mu_grid)?;
            csv_string(|buf| write_densities_csv(j, &mus, buf))?
        }
        Command::Curve { m, out } => {
            let cs = curve_solutions(*m)?;
            let upper = cs.upper_branch();
            let rows: Vec<Value> = cs
                .k
                .iter()
                .zip(&cs.mu_sq)
                .zip(&upper)
                .map(|((k, t), z)| json!({"k": k, "mu_sq_re": t.re, "mu_sq_im": t.im, "mu_re": z.re, "mu_im": z.im}))
                .collect();
            match out {
                Format::Json => to_json(json!({"schema": "curve-solutions/1", "M": m, "solutions": rows}))?,
                Format::Csv => csv_string(|buf| {
                    let mut w = csv::Writer::from_writer(buf);
                    w.write_record(["k", "mu_sq_re", "mu_sq_im", "mu_re", "mu_im"])?;
                    for ((k, t), z) in cs.k.iter().zip(&cs.mu_sq).zip(&upper) {
                        w.write_record([k.to_string(), fmt_num(t.re), fmt_num(t.im), fmt_num(z.re), fmt_num(z.im)])?;
                    }
                    w.flush()?;
                    Ok(())
                })?,
            }
        }
        Command::Decay { psi_m, psi_n, jj, repeats, mu } => {
            let pair = GeneralStatePair::new(psi_m.clone(), psi_n.clone())?;
            let norms = offdiagonal_decay(&pair, rep(*jj)?, *mu, *repeats)?;
            to_json(json!({
                "schema": "decay/1",
                "psi_m": psi_m.to_string(),
                "psi_n": psi_n.to_string(),
                "jj": jj,
                "mu": mu,
                "norms": norms,
                "decays": decays(&norms),
            }))?
        }
    };
    Ok(Payload { body, seed: None })
}

/// Exit code for a failed run: 2 for malformed input, 3 otherwise.
pub fn exit_code(e: &ChargeError) -> u8 {
    match e {
        ChargeError::InvalidInput(_) | ChargeError::Parse(_) => 2,
        _ => 3,
    }
}

/// Parses `args`, runs the verb, prints the payload and the manifest.
pub fn run(args: Vec<String>) -> ExitCode {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let payload = match execute(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let manifest = RunManifest::new(args, &payload);
    let written = std::io::stdout().write_all(payload.body.as_bytes()).map_err(ChargeError::from).and_then(|_| {
        let text = serde_json::to_string(&manifest).map_err(|e| ChargeError::Invariant(e.to_string()))?;
        match &cli.manifest {
            Some(path) => std::fs::write(path, text + "\n").map_err(ChargeError::from),
            None => {
                eprintln!("{text}");
                Ok(())
            }
        }
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Payload> {
        let cli = Cli::try_parse_from(std::iter::once("hcharges").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1:1:5").unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-10:10:2001:10").unwrap().refinement, 10);
        assert!(parse_grid("1:2").is_err());
        assert_eq!(parse_mu_list("0,1.5,-2").unwrap(), vec![0.0, 1.5, -2.0]);
        assert!(parse_mu_list("x").is_err());
    }

    #[test]
    fn gibbs_verb() {
        let p = run_args(&["gibbs", "--jj", "1", "--mu-grid", "0", "--out", "csv"]).unwrap();
        assert_eq!(p.body, format!("mu,average\n0,{}\n", fmt_num(1.0 / (4.0 * std::f64::consts::PI))));
    }

    #[test]
    fn empty_state_is_a_parse_error() {
        let e = Cli::try_parse_from(["hcharges", "charge", "--psi", "", "--jj", "1"]).unwrap_err();
        assert!(e.use_stderr());
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn math_errors_map_to_three() {
        let e = run_args(&["charge", "--psi", "1111212", "--jj", "3", "--degree-cap", "10"]).unwrap_err();
        assert_eq!(exit_code(&e), 3);
        let e = run_args(&["gibbs", "--jj", "0", "--mu-grid", "0"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn manifest_digest_is_stable() {
        let a = run_args(&["ensemble", "--M", "6", "--jj", "1", "--count", "3", "--seed", "7", "--grid", "-5:5:51:2", "-q"]).unwrap();
        let b = run_args(&["ensemble", "--M", "6", "--jj", "1", "--count", "3", "--seed", "7", "--grid", "-5:5:51:2", "-q"]).unwrap();
        assert_eq!(a.body, b.body);
        let ma = RunManifest::new(vec!["hcharges".into(), "ensemble".into()], &a);
        let mb = RunManifest::new(vec!["hcharges".into(), "ensemble".into()], &b);
        assert_eq!(ma.output_digests[0].sha256, mb.output_digests[0].sha256);
        assert_eq!(ma.command, "ensemble");
        assert_eq!(ma.seed, Some(7));
    }
}
