//! Command-line front end for the temporal-rac workbench.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a solver fails.

pub mod plot;
pub mod strategy_file;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use temporal_rac::certify::{linear_grid, sweep_and_fit, LpOptions, SweepReport};
use temporal_rac::classical::{
    audit_bounds, majority_strategy, max_f_deterministic, max_k_deterministic,
};
use temporal_rac::optimizer::{seesaw_maximize, OptimizerConfig};
use temporal_rac::rac::{f_from_k, success_probability, temporal_to_rac};
use temporal_rac::temporal::correlation_table;

use plot::{render_svg, CurveSpec};
use strategy_file::StrategyFile;

pub const SEED_ENV: &str = "TEMPORAL_RAC_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "temporal-rac",
    version,
    about = "Random access codes, temporal inequalities and certified min-entropy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the correlation table, K and F of a strategy file.
    Evaluate { file: PathBuf },
    /// Seesaw maximization of K.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        /// Defaults to $TEMPORAL_RAC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the best strategy as a strategy file.
        #[arg(long)]
        strategy_out: Option<PathBuf>,
        /// Write per-restart K values as CSV.
        #[arg(long)]
        restarts_out: Option<PathBuf>,
    },
    /// Exact classical maxima of K and F.
    ClassicalBound {
        #[arg(long)]
        n: usize,
    },
    /// LP sweep of the guessing probability over a K grid (CSV on stdout).
    Certify {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        k_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        no_arrow_constraints: bool,
        /// Constrain K >= k instead of K = k.
        #[arg(long)]
        geq_k: bool,
        /// Write the fit summary CSV here instead of stderr.
        #[arg(long)]
        fit_out: Option<PathBuf>,
    },
    /// Compare quoted classical bounds with the exhaustive oracle.
    Audit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Render two CSV columns as an SVG line plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "k")]
        x: String,
        #[arg(long, default_value = "min_entropy")]
        y: String,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Solver(_) => 2,
        }
    }

    fn core(context: impl fmt::Display, e: temporal_rac::Error) -> Self {
        let msg = format!("{context}: {e}");
        match e {
            temporal_rac::Error::Solver(_) => Failure::Solver(msg),
            _ => Failure::Invalid(msg),
        }
    }

    fn io(context: impl fmt::Display, e: std::io::Error) -> Self {
        Failure::Invalid(format!("{context}: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Solver(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs the CLI with process stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("error: invalid arguments");
            let _ = writeln!(err, "{first}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::Evaluate { file } => evaluate(&file, out),
        Command::Optimize {
            n,
            restarts,
            seed,
            strategy_out,
            restarts_out,
        } => resolve_seed(seed).and_then(|seed| {
            optimize(
                n,
                restarts,
                seed,
                strategy_out.as_deref(),
                restarts_out.as_deref(),
                out,
            )
        }),
        Command::ClassicalBound { n } => classical_bound(n, out),
        Command::Certify {
            n,
            k_min,
            k_max,
            steps,
            no_arrow_constraints,
            geq_k,
            fit_out,
        } => {
            let options = LpOptions {
                arrow_of_time: !no_arrow_constraints,
                k_at_least: geq_k,
            };
            certify(
                n,
                k_min,
                k_max,
                steps,
                options,
                fit_out.as_deref(),
                out,
                err,
            )
        }
        Command::Audit { n, csv } => audit(n, csv, out),
        Command::Plot {
            csv,
            out: svg,
            x,
            y,
        } => plot(&csv, &svg, &x, &y),
    };
    match result {
        Ok(()) => match out.flush() {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing output: {e}");
                1
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Invalid(format!(
                "{SEED_ENV}={v:?} is not an unsigned 64-bit integer"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn emit(out: &mut dyn Write, text: impl fmt::Display) -> Outcome {
    write!(out, "{text}").map_err(|e| Failure::io("writing output", e))
}

fn fmt_vec(v: temporal_rac::BlochVector) -> String {
    format!("{:.6} {:.6} {:.6}", v.x, v.y, v.z)
}

fn evaluate(file: &Path, out: &mut dyn Write) -> Outcome {
    let shown = file.display();
    let parsed = StrategyFile::read(file).map_err(|e| Failure::Invalid(format!("{shown}: {e}")))?;
    let strategy = parsed.to_strategy().map_err(|e| Failure::core(&shown, e))?;
    let table = correlation_table(&strategy).map_err(|e| Failure::core(&shown, e))?;
    let n = strategy.n();
    let mut s = format!("n {n}\nC (rows A_i, columns B_j)\n");
    for i in 0..table.rows() {
        let row: Vec<String> = table.row(i).iter().map(|c| format!("{c:.6}")).collect();
        s.push_str(&format!("A_{} {}\n", i + 1, row.join(" ")));
    }
    let k = table.k_value();
    let f = success_probability(&temporal_to_rac(&strategy));
    s.push_str(&format!("K {k:.6}\nF {f:.6}\n"));
    emit(out, s)
}

fn optimize(
    n: usize,
    restarts: usize,
    seed: u64,
    strategy_out: Option<&Path>,
    restarts_out: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let config = OptimizerConfig {
        restarts,
        ..OptimizerConfig::new(n, seed)
    };
    let report =
        seesaw_maximize(&config).map_err(|e| Failure::core(format!("optimize --n {n}"), e))?;
    let mut s = format!(
        "n {n}\nseed {seed}\nrestarts {restarts}\nbest_K {:.6}\nF {:.6}\nbest_restart {}\nsweeps {}\n",
        report.best_k,
        f_from_k(n, report.best_k),
        report.restart_index,
        report.sweeps_used
    );
    for (i, a) in report.strategy.alice_axes().iter().enumerate() {
        s.push_str(&format!("alice_{} {}\n", i + 1, fmt_vec(*a)));
    }
    for (j, b) in report.strategy.bob_axes().iter().enumerate() {
        s.push_str(&format!("bob_{} {}\n", j + 1, fmt_vec(*b)));
    }
    if let Some(path) = strategy_out {
        StrategyFile::from_strategy(&report.strategy)
            .write(path)
            .map_err(|e| Failure::io(path.display(), e))?;
    }
    if let Some(path) = restarts_out {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        let write_err = |e: csv::Error| Failure::Invalid(format!("{}: {e}", path.display()));
        w.write_record(["restart", "k", "sweeps", "converged"])
            .map_err(write_err)?;
        for (r, o) in report.restarts.iter().enumerate() {
            w.write_record([
                r.to_string(),
                format!("{:.6}", o.k),
                o.sweeps.to_string(),
                o.converged.to_string(),
            ])
            .map_err(write_err)?;
        }
        w.flush().map_err(|e| Failure::io(path.display(), e))?;
    }
    emit(out, s)
}

fn classical_bound(n: usize, out: &mut dyn Write) -> Outcome {
    let context = format!("classical-bound --n {n}");
    let (k, assignment) = max_k_deterministic(n).map_err(|e| Failure::core(&context, e))?;
    let signs = |v: &[i8]| {
        v.iter()
            .map(|&x| if x > 0 { "+" } else { "-" })
            .collect::<String>()
    };
    let mut s = format!("n {n}\nK_max {k:.6}\n");
    if n <= 4 {
        let (f, _) = max_f_deterministic(n).map_err(|e| Failure::core(&context, e))?;
        s.push_str(&format!("F_max {f:.6}\n"));
    } else {
        let f = majority_strategy(n)
            .map_err(|e| Failure::core(&context, e))?
            .success_probability();
        s.push_str(&format!("F_max_lower_bound {f:.6}\n"));
    }
    if n <= 10 {
        s.push_str(&format!(
            "alice {}\nbob {}\n",
            signs(&assignment.alice_values),
            signs(&assignment.bob_values)
        ));
    }
    emit(out, s)
}

#[allow(clippy::too_many_arguments)]
fn certify(
    n: usize,
    k_min: f64,
    k_max: f64,
    steps: usize,
    options: LpOptions,
    fit_out: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let grid = linear_grid(k_min, k_max, steps).map_err(|e| {
        Failure::core(
            format!("certify --k-min {k_min} --k-max {k_max} --steps {steps}"),
            e,
        )
    })?;
    let report: SweepReport = sweep_and_fit(n, &grid, options).map_err(|e| {
        Failure::core(
            format!("certify --n {n} --k-min {k_min} --k-max {k_max}"),
            e,
        )
    })?;
    let summary = format!(
        "{}oracle_anchor_line {:.6} {:.6}\nclaimed_anchor_line {:.6} {:.6}\nmonotone {}\n",
        report.fit_csv(),
        report.oracle_anchor_line.alpha,
        report.oracle_anchor_line.beta,
        report.claimed_anchor_line.alpha,
        report.claimed_anchor_line.beta,
        report.monotone
    );
    match fit_out {
        Some(path) => {
            std::fs::write(path, report.fit_csv()).map_err(|e| Failure::io(path.display(), e))?
        }
        None => err
            .write_all(summary.as_bytes())
            .map_err(|e| Failure::io("stderr", e))?,
    }
    emit(out, report.sweep_csv())
}

fn audit(n: usize, csv: bool, out: &mut dyn Write) -> Outcome {
    let report = audit_bounds(n).map_err(|e| Failure::core(format!("audit --n {n}"), e))?;
    if csv {
        emit(out, report.to_csv())
    } else {
        emit(out, &report)
    }
}

fn plot(csv_path: &Path, svg: &Path, x: &str, y: &str) -> Outcome {
    let shown = csv_path.display();
    let invalid = |m: String| Failure::Invalid(format!("{shown}: {m}"));
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| invalid(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| invalid(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("no column named {name:?}")))
    };
    let (xi, yi) = (column(x)?, column(y)?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(e.to_string()))?;
        let field = |idx: usize, name: &str| -> Result<f64, Failure> {
            let raw = record.get(idx).unwrap_or("");
            raw.trim().parse().map_err(|_| {
                invalid(format!(
                    "row {}: {name} value {raw:?} is not a number",
                    line + 2
                ))
            })
        };
        points.push((field(xi, x)?, field(yi, y)?));
    }
    let spec = CurveSpec::new(points, x, y, svg).map_err(invalid)?;
    std::fs::write(&spec.output, render_svg(&spec)).map_err(|e| Failure::io(svg.display(), e))
}
