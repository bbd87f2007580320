//! `arip` — command-line front end for the sparse-approximation toolkit.
//!
//! Subcommands cover the asymptotic deviation bounds (`bounds`), the
//! phase-transition and stability level curves (`transition`), the
//! per-algorithm factor sets (`factors`), the greedy solvers on concrete
//! data (`recover`), empirical success grids (`experiment`), and finite
//! aRIP constants (`rip-exact`, `rip-estimate`).
//!
//! Exit codes: 0 success, 1 usage, 2 domain/numeric error, 3 I/O error.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use arip::asymptotic::{bound_l, bound_u, PhasePoint};
use arip::experiment::{success_grid, SignalKind};
use arip::factors::{
    factors_for, iht_factors_with_omega, romp_condition, romp_threshold, stability_ratio,
    AlgorithmId, BoundsProvider, FiniteBounds, FiniteMode, FixedBounds, GaussianBounds,
};
use arip::finite::{estimate_arip_lower, exact_arip, FiniteAripBounds, ProblemSize, Provenance};
use arip::greedy::{cosamp, iht, subspace_pursuit, RecoveryOptions, RecoveryResult, Termination};
use arip::transition::{
    log_spaced, stability_level_curve, transition_curve, LevelKind, TransitionTable,
};

use io::{deliver, fmt_float, json_string, read_matrix, read_vector, Envelope, Format, Table, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl From<arip::Error> for CliError {
    fn from(e: arip::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "arip",
    version,
    about = "Asymmetric restricted-isometry bounds, greedy sparse recovery, and phase-transition curves for Gaussian matrices",
    after_help = "Matrix/vector files are plain text: a 'rows cols' header line, then row-major \
                  whitespace-separated decimals. Grid subcommands parallelize internally; set \
                  RAYON_NUM_THREADS to bound the worker count. Every subcommand is deterministic \
                  given its full flag set (including seeds)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Write the output to this path instead of stdout (a directory for
    /// multi-file outputs).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(format!("unknown format '{other}' (csv or json)")),
    }
}

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    AlgorithmId::from_str(s).map_err(|e| e.to_string())
}

fn parse_signal(s: &str) -> Result<SignalKind, String> {
    match s {
        "sign" => Ok(SignalKind::Sign),
        "gaussian" => Ok(SignalKind::Gaussian),
        other => Err(format!("unknown signal kind '{other}' (sign or gaussian)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic deviation bounds L(delta, rho), U(delta, rho) at a
    /// point or over a grid (cross product of the two lists).
    Bounds {
        /// Undersampling ratio(s) delta in (0, 1], comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        /// Oversampling ratio(s) rho in (0, 1), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Phase-transition curves rho_star(delta) where the convergence
    /// factor reaches the target (default 1), or stability level curves.
    Transition {
        /// Algorithms (cosamp, sp, iht, l1), comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_algorithm,
              default_value = "cosamp,sp,iht,l1")]
        alg: Vec<AlgorithmId>,
        /// Explicit delta list, comma separated.
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        /// Log-spaced delta grid LO:HI:COUNT (default 1e-3:1:50).
        #[arg(long)]
        delta_grid: Option<String>,
        /// Level value for the convergence factor.
        #[arg(long, default_value_t = 1.0)]
        target: f64,
        /// Solve for this level of the stability ratio xi/(1-mu) instead
        /// of a convergence-factor level.
        #[arg(long, conflicts_with = "target")]
        stability_level: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence/stability factor set for one algorithm, from
    /// asymptotic bounds (--delta/--rho), a concrete matrix (--matrix
    /// --k --bounds), or the ideal isometry (--ideal).
    Factors {
        #[arg(long, value_parser = parse_algorithm)]
        alg: AlgorithmId,
        #[arg(long, requires = "rho")]
        delta: Option<f64>,
        #[arg(long, requires = "delta")]
        rho: Option<f64>,
        /// Matrix file for finite-instance bounds.
        #[arg(long, requires = "k")]
        matrix: Option<PathBuf>,
        /// Sparsity for finite-instance bounds.
        #[arg(long)]
        k: Option<usize>,
        /// How to obtain finite bounds: exact enumeration or a Monte
        /// Carlo lower estimate.
        #[arg(long, default_value = "exact")]
        bounds: String,
        /// Trials for the Monte Carlo estimate.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use zero deviations (the ideal isometry).
        #[arg(long)]
        ideal: bool,
        /// Problem size for the romp guarantee threshold.
        #[arg(long)]
        n: Option<usize>,
        /// Explicit IHT relaxation weight in (0, 2) (default: balanced).
        #[arg(long)]
        omega: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a greedy solver on a measurement matrix and data vector;
    /// emits the recovery result as JSON.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_algorithm)]
        alg: AlgorithmId,
        #[arg(long)]
        omega: Option<f64>,
        /// Skip the final least-squares refit of IHT.
        #[arg(long)]
        no_debias: bool,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Absolute residual-norm stopping threshold (default
        /// 1e-10 * ||y||).
        #[arg(long)]
        residual_tolerance: Option<f64>,
        #[arg(long)]
        stall_factor: Option<f64>,
        /// Write the JSON to this path instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical success-rate grid over (delta, rho) cells at fixed n.
    Experiment {
        #[arg(long, value_parser = parse_algorithm)]
        alg: AlgorithmId,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        /// Measurements per cell; k = round(rho n), N = round(n / delta).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "sign", value_parser = parse_signal)]
        signal: SignalKind,
        /// Noise norm as a fraction of ||Ax||.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Relative-error threshold counted as success (default: the
        /// exact-recovery tolerance 1e-6; required reading for noisy
        /// runs).
        #[arg(long)]
        success_threshold: Option<f64>,
        #[arg(long, value_parser = parse_algorithm, hide = true)]
        _unused: Option<AlgorithmId>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact aRIP constants of a matrix file by exhaustive enumeration.
    RipExact {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte-Carlo lower estimates of the aRIP constants of a matrix
    /// file.
    RipEstimate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds { delta, rho, output } => cmd_bounds(&delta, &rho, &output),
        Command::Transition { alg, delta, delta_grid, target, stability_level, output } => {
            cmd_transition(&alg, delta, delta_grid, target, stability_level, &output)
        }
        Command::Factors {
            alg,
            delta,
            rho,
            matrix,
            k,
            bounds,
            trials,
            seed,
            ideal,
            n,
            omega,
            output,
        } => cmd_factors(alg, delta, rho, matrix, k, &bounds, trials, seed, ideal, n, omega, &output),
        Command::Recover {
            matrix,
            y,
            k,
            alg,
            omega,
            no_debias,
            max_iterations,
            residual_tolerance,
            stall_factor,
            out,
        } => cmd_recover(
            &matrix,
            &y,
            k,
            alg,
            omega,
            no_debias,
            max_iterations,
            residual_tolerance,
            stall_factor,
            out.as_deref(),
        ),
        Command::Experiment {
            alg,
            delta,
            rho,
            n,
            trials,
            seed,
            signal,
            noise,
            success_threshold,
            _unused: _,
            output,
        } => cmd_experiment(alg, &delta, &rho, n, trials, seed, signal, noise, success_threshold, &output),
        Command::RipExact { matrix, order, output } => {
            let a = read_matrix(&matrix)?;
            let b = exact_arip(&a, order)?;
            emit_rip("rip-exact", &matrix, order, None, &b, &output)
        }
        Command::RipEstimate { matrix, order, trials, seed, output } => {
            let a = read_matrix(&matrix)?;
            let b = estimate_arip_lower(&a, order, trials, seed)?;
            emit_rip("rip-estimate", &matrix, order, Some((trials, seed)), &b, &output)
        }
    }
}

fn cmd_bounds(deltas: &[f64], rhos: &[f64], output: &OutputArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &delta in deltas {
        for &rho in rhos {
            let at = PhasePoint::new(delta, rho)?;
            let l = bound_l(at)
                .map_err(|e| CliError::Numeric(format!("lower-bound solver: {e}")))?;
            let u = bound_u(at)
                .map_err(|e| CliError::Numeric(format!("upper-bound solver: {e}")))?;
            rows.push(vec![Value::Float(delta), Value::Float(rho), Value::Float(l), Value::Float(u)]);
        }
    }
    let table = Table { columns: vec!["delta", "rho", "L", "U"], rows };
    let envelope = Envelope::new("bounds")
        .param("delta", join_floats(deltas))
        .param("rho", join_floats(rhos))
        .param("format", fmt_name(output.format));
    deliver(output.out.as_deref(), &envelope.render(output.format, &table))
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn transition_table_rows(table: &TransitionTable) -> Table {
    Table {
        columns: vec!["delta", "rho_star", "oversampling", "residual"],
        rows: table
            .points
            .iter()
            .map(|p| {
                vec![
                    Value::Float(p.delta),
                    Value::Float(p.rho_star),
                    Value::Float(p.oversampling),
                    Value::Float(p.residual),
                ]
            })
            .collect(),
    }
}

fn transition_json(tables: &[TransitionTable]) -> String {
    let mut out = String::from("{\"curves\":[");
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let kind = match t.kind {
            LevelKind::MuLevel => "mu-level",
            LevelKind::StabilityLevel => "stability-level",
        };
        out.push_str(&format!(
            "{{\"algorithm\":{},\"kind\":{},\"target\":{},\"points\":{},\"failures\":[",
            json_string(t.algorithm.name()),
            json_string(kind),
            fmt_float(t.target),
            transition_table_rows(t).to_json()
        ));
        for (j, (delta, reason)) in t.failures.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"delta\":{},\"reason\":{}}}",
                fmt_float(*delta),
                json_string(reason)
            ));
        }
        out.push_str("]}");
    }
    out.push_str("]}");
    out
}

fn parse_grid_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("bad grid spec '{spec}', expected LO:HI:COUNT")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad grid lower bound '{}': {e}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad grid upper bound '{}': {e}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| CliError::Usage(format!("bad grid count '{}': {e}", parts[2])))?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(CliError::Usage(format!(
            "grid spec '{spec}' needs 0 < LO < HI and COUNT >= 2"
        )));
    }
    Ok(log_spaced(lo, hi, count))
}

fn cmd_transition(
    algs: &[AlgorithmId],
    delta: Option<Vec<f64>>,
    delta_grid: Option<String>,
    target: f64,
    stability_level: Option<f64>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let deltas = match (delta, delta_grid) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--delta and --delta-grid are mutually exclusive".into()))
        }
        (Some(mut d), None) => {
            d.sort_by(f64::total_cmp);
            d
        }
        (None, Some(spec)) => parse_grid_spec(&spec)?,
        (None, None) => log_spaced(1e-3, 1.0, 50),
    };

    let mut tables = Vec::new();
    for &alg in algs {
        let table = match stability_level {
            Some(level) => stability_level_curve(alg, &deltas, level)?,
            None => transition_curve(alg, &deltas, target)?,
        };
        tables.push(table);
    }

    let envelope_for = |alg: Option<AlgorithmId>| {
        let mut e = Envelope::new("transition")
            .param("alg", algs.iter().map(|a| a.name()).collect::<Vec<_>>().join(","))
            .param("deltas", deltas.len())
            .param("delta_min", deltas[0])
            .param("delta_max", deltas[deltas.len() - 1]);
        e = match stability_level {
            Some(level) => e.param("stability_level", level),
            None => e.param("target", target),
        };
        if let Some(a) = alg {
            e = e.param("curve", a.name());
        }
        e.param("format", fmt_name(output.format))
    };

    match &output.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
            for t in &tables {
                let path = dir.join(format!("transition_{}.csv", t.algorithm.name()));
                let rendered =
                    envelope_for(Some(t.algorithm)).render_csv(&transition_table_rows(t).to_csv());
                deliver(Some(&path), &rendered)?;
            }
            let json = envelope_for(None).render_json(&transition_json(&tables));
            deliver(Some(&dir.join("transition.json")), &json)
        }
        None => match output.format {
            Format::Json => {
                deliver(None, &envelope_for(None).render_json(&transition_json(&tables)))
            }
            Format::Csv => {
                for t in &tables {
                    let rendered = envelope_for(Some(t.algorithm))
                        .render_csv(&transition_table_rows(t).to_csv());
                    deliver(None, &rendered)?;
                }
                Ok(())
            }
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_factors(
    alg: AlgorithmId,
    delta: Option<f64>,
    rho: Option<f64>,
    matrix: Option<PathBuf>,
    k: Option<usize>,
    bounds_mode: &str,
    trials: usize,
    seed: u64,
    ideal: bool,
    n: Option<usize>,
    omega: Option<f64>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let mut envelope = Envelope::new("factors").param("alg", alg.name());

    // ROMP with no bounds source: report the size-dependent threshold.
    let have_bounds = ideal || matrix.is_some() || delta.is_some();
    if alg == AlgorithmId::Romp && !have_bounds {
        let n = n.ok_or_else(|| {
            CliError::Usage("--alg romp needs --n (and optionally a bounds source)".into())
        })?;
        let threshold = romp_threshold(n)?;
        let table = Table {
            columns: vec!["algorithm", "mu_r", "threshold", "satisfied"],
            rows: vec![vec![
                Value::Str("romp".into()),
                Value::Absent,
                Value::Float(threshold),
                Value::Absent,
            ]],
        };
        envelope = envelope.param("n", n).param("format", fmt_name(output.format));
        return deliver(output.out.as_deref(), &envelope.render(output.format, &table));
    }

    // Resolve the bounds provider.
    enum Source {
        Ideal(FixedBounds),
        Gaussian(GaussianBounds),
        Finite { matrix: DMatrix<f64>, size: ProblemSize, mode: FiniteMode },
    }
    let source = if ideal {
        envelope = envelope.param("bounds", "ideal");
        Source::Ideal(FixedBounds::ideal())
    } else if let Some(path) = &matrix {
        let k = k.ok_or_else(|| CliError::Usage("--matrix needs --k".into()))?;
        let a = read_matrix(path)?;
        let size = ProblemSize::new(k, a.nrows(), a.ncols())?;
        let mode = match bounds_mode {
            "exact" => FiniteMode::Exact,
            "estimate" => FiniteMode::Estimate { trials, seed },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown bounds mode '{other}' (exact or estimate)"
                )))
            }
        };
        envelope = envelope
            .param("matrix", path.display())
            .param("k", k)
            .param("bounds", bounds_mode);
        if matches!(mode, FiniteMode::Estimate { .. }) {
            envelope = envelope.param("trials", trials).param("seed", seed);
        }
        Source::Finite { matrix: a, size, mode }
    } else if let (Some(d), Some(r)) = (delta, rho) {
        let at = PhasePoint::new(d, r)?;
        envelope = envelope.param("delta", d).param("rho", r);
        Source::Gaussian(GaussianBounds::new(at))
    } else {
        return Err(CliError::Usage(
            "factors needs a bounds source: --delta/--rho, --matrix/--k, or --ideal".into(),
        ));
    };

    fn factor_rows(
        alg: AlgorithmId,
        omega: Option<f64>,
        n: Option<usize>,
        provider: &impl BoundsProvider,
    ) -> Result<Table, CliError> {
        if alg == AlgorithmId::Romp {
            let n = n.ok_or_else(|| CliError::Usage("--alg romp needs --n".into()))?;
            let c = romp_condition(provider, n)?;
            return Ok(Table {
                columns: vec!["algorithm", "mu_r", "threshold", "satisfied"],
                rows: vec![vec![
                    Value::Str("romp".into()),
                    Value::Float(c.mu_r),
                    Value::Float(c.threshold),
                    Value::Bool(c.satisfied),
                ]],
            });
        }
        if n.is_some() {
            return Err(CliError::Usage("--n is only meaningful with --alg romp".into()));
        }
        let f = match (alg, omega) {
            (AlgorithmId::Iht, Some(w)) => iht_factors_with_omega(provider, w)?,
            (_, Some(_)) => {
                return Err(CliError::Usage("--omega is only meaningful with --alg iht".into()))
            }
            (alg, None) => factors_for(alg, provider)?,
        };
        let ratio = match stability_ratio(&f) {
            Ok(r) => Value::Float(r),
            Err(_) => Value::Marker("undefined"),
        };
        Ok(Table {
            columns: vec!["algorithm", "mu", "xi", "kappa", "omega_star", "stability_ratio"],
            rows: vec![vec![
                Value::Str(f.algorithm.name().into()),
                Value::Float(f.mu),
                Value::Float(f.xi),
                f.kappa.map_or(Value::Absent, Value::Float),
                f.omega_star.map_or(Value::Absent, Value::Float),
                ratio,
            ]],
        })
    }

    let table = match &source {
        Source::Ideal(p) => factor_rows(alg, omega, n, p)?,
        Source::Gaussian(p) => factor_rows(alg, omega, n, p)?,
        Source::Finite { matrix, size, mode } => {
            let provider = FiniteBounds::new(matrix, *size, *mode)?;
            factor_rows(alg, omega, n, &provider)?
        }
    };
    if let Some(w) = omega {
        envelope = envelope.param("omega", w);
    }
    if let Some(n) = n {
        envelope = envelope.param("n", n);
    }
    envelope = envelope.param("format", fmt_name(output.format));
    deliver(output.out.as_deref(), &envelope.render(output.format, &table))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::ResidualZero => "residual-zero",
        Termination::Stalled => "stalled",
        Termination::MaxIterations => "max-iterations",
    }
}

fn recovery_json(r: &RecoveryResult) -> String {
    let estimate: Vec<String> = r.estimate.iter().map(|v| fmt_float(*v)).collect();
    let support: Vec<String> = r.support.iter().map(|i| i.to_string()).collect();
    let trace: Vec<String> = r.residual_trace.iter().map(|v| fmt_float(*v)).collect();
    format!(
        "{{\"estimate\":[{}],\"support\":[{}],\"iterations\":{},\"residual_trace\":[{}],\"termination\":{}}}",
        estimate.join(","),
        support.join(","),
        r.iterations,
        trace.join(","),
        json_string(termination_name(r.termination))
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_recover(
    matrix: &Path,
    y_path: &Path,
    k: usize,
    alg: AlgorithmId,
    omega: Option<f64>,
    no_debias: bool,
    max_iterations: Option<usize>,
    residual_tolerance: Option<f64>,
    stall_factor: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let a = read_matrix(matrix)?;
    let y = read_vector(y_path)?;
    let mut opts = RecoveryOptions::for_sparsity(k);
    if let Some(w) = omega {
        opts.omega = w;
    }
    opts.debias = !no_debias;
    if let Some(m) = max_iterations {
        opts.max_iterations = m;
    }
    if residual_tolerance.is_some() {
        opts.residual_tolerance = residual_tolerance;
    }
    if let Some(s) = stall_factor {
        opts.stall_factor = s;
    }

    let result = match alg {
        AlgorithmId::Cosamp => cosamp(&a, &y, k, &opts)?,
        AlgorithmId::Sp => subspace_pursuit(&a, &y, k, &opts)?,
        AlgorithmId::Iht => iht(&a, &y, k, &opts)?,
        other => {
            return Err(CliError::Usage(format!(
                "no solver for '{other}'; recover supports cosamp, sp, iht"
            )))
        }
    };

    let mut envelope = Envelope::new("recover")
        .param("matrix", matrix.display())
        .param("y", y_path.display())
        .param("k", k)
        .param("alg", alg.name())
        .param("omega", opts.omega)
        .param("debias", opts.debias)
        .param("max_iterations", opts.max_iterations)
        .param("stall_factor", opts.stall_factor);
    if let Some(tol) = opts.residual_tolerance {
        envelope = envelope.param("residual_tolerance", tol);
    }
    deliver(out, &envelope.render_json(&recovery_json(&result)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    alg: AlgorithmId,
    deltas: &[f64],
    rhos: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
    signal: SignalKind,
    noise: f64,
    success_threshold: Option<f64>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    if noise > 0.0 && success_threshold.is_none() {
        return Err(CliError::Usage(
            "noisy runs need an explicit --success-threshold (exact recovery is unattainable)"
                .into(),
        ));
    }
    let opts = RecoveryOptions::for_sparsity(((rhos.iter().cloned().fold(0.0, f64::max) * n as f64)
        .round() as usize)
        .max(1));
    let grid = success_grid(alg, deltas, rhos, n, trials, seed, signal, noise, &opts, success_threshold)?;

    let table = Table {
        columns: vec!["delta", "rho", "k", "n", "N", "trials", "successes"],
        rows: grid
            .cells
            .iter()
            .map(|c| {
                vec![
                    Value::Float(c.delta),
                    Value::Float(c.rho),
                    Value::Int(c.sparsity as i64),
                    Value::Int(c.measurements as i64),
                    Value::Int(c.ambient_dim as i64),
                    Value::Int(c.trials as i64),
                    Value::Int(c.successes as i64),
                ]
            })
            .collect(),
    };

    let mut envelope = Envelope::new("experiment")
        .param("alg", alg.name())
        .param("delta", join_floats(deltas))
        .param("rho", join_floats(rhos))
        .param("n", n)
        .param("trials", trials)
        .param("seed", seed)
        .param("signal", if signal == SignalKind::Sign { "sign" } else { "gaussian" })
        .param("noise", noise);
    if let Some(t) = success_threshold {
        envelope = envelope.param("success_threshold", t);
    }
    envelope = envelope.param("format", fmt_name(output.format));

    match output.format {
        Format::Csv => deliver(output.out.as_deref(), &envelope.render_csv(&table.to_csv())),
        Format::Json => {
            let mut payload = format!("{{\"cells\":{},\"skipped\":[", table.to_json());
            for (i, s) in grid.skipped.iter().enumerate() {
                if i > 0 {
                    payload.push(',');
                }
                payload.push_str(&format!(
                    "{{\"delta\":{},\"rho\":{},\"reason\":{}}}",
                    fmt_float(s.delta),
                    fmt_float(s.rho),
                    json_string(&s.reason)
                ));
            }
            payload.push_str("]}");
            deliver(output.out.as_deref(), &envelope.render_json(&payload))
        }
    }
}

fn emit_rip(
    name: &'static str,
    matrix: &Path,
    order: usize,
    estimate: Option<(usize, u64)>,
    b: &FiniteAripBounds,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let provenance = match b.provenance {
        Provenance::Exact => "exact",
        Provenance::MonteCarloLower => "monte-carlo-lower",
    };
    let table = Table {
        columns: vec!["order", "L", "U", "provenance"],
        rows: vec![vec![
            Value::Int(b.order as i64),
            Value::Float(b.l),
            Value::Float(b.u),
            Value::Str(provenance.into()),
        ]],
    };
    let mut envelope = Envelope::new(name)
        .param("matrix", matrix.display())
        .param("order", order);
    if let Some((trials, seed)) = estimate {
        envelope = envelope.param("trials", trials).param("seed", seed);
    }
    envelope = envelope.param("format", fmt_name(output.format));
    deliver(output.out.as_deref(), &envelope.render(output.format, &table))
}
