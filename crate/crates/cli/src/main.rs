mod input;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use tablecount::counting::{
    bekessy_estimate, exact_count_01, exact_count_dp, fisher_yates_count, lowrank_01_count,
    lowrank_asymptotic_count, lowrank_column_sets_count, lowrank_weighted_count,
    mc_estimate_count, mc_weighted_count, variance_ratio_report, weighted_fy_count,
    weighted_variance_ratio_report, LowRankOptions, PairingRoute, DEFAULT_EXACT_BUDGET,
};
use tablecount::permanent::{permanent_exact, SquareMatrix, DEFAULT_PERMANENT_LIMIT};
use tablecount::polynomial::DEFAULT_TERM_CAP;
use tablecount::rng::DEFAULT_SEED;
use tablecount::symmetric_lowrank::{
    build_e_tilde, build_h_tilde, verify_coefficients, ApproxKind, ApproxSymmetricPoly,
};
use tablecount::{Error, Margins, Result, WeightMatrix};

const SEED_ENV: &str = "TABLECOUNT_SEED";

/// Count contingency tables with prescribed row and column sums.
#[derive(Parser)]
#[command(name = "tablecount", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Row sums, comma separated.
    #[arg(long, global = true)]
    rows: Option<String>,
    /// Column sums, comma separated.
    #[arg(long, global = true)]
    cols: Option<String>,
    /// JSON {"rows", "cols", "weights"?} or two-line CSV.
    #[arg(long, global = true)]
    margins_file: Option<PathBuf>,
    /// Weight matrix as JSON or CSV.
    #[arg(long, global = true)]
    weights_file: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0.3)]
    epsilon: f64,
    /// Monte Carlo samples, or sampled forms for the low-rank commands.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Master seed [default: $TABLECOUNT_SEED, else 24301].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    repeats: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_TERM_CAP)]
    term_cap: usize,
    /// Largest permanent size computed exactly.
    #[arg(long, global = true, default_value_t = DEFAULT_PERMANENT_LIMIT)]
    perm_cap: usize,
    /// State budget of the exact counters.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_BUDGET)]
    exact_budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Route::Auto)]
    route: Route,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Auto,
    Reduced,
    Direct,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complete,
    Elementary,
}

const DEFAULT_MC_SAMPLES: usize = 10_000;

#[derive(Subcommand)]
enum Command {
    /// Exact number of tables.
    Count,
    /// Exact number of 0-1 tables.
    Count01,
    /// N! / (prod r_i! prod c_j!), exactly.
    Fy,
    /// Bekessy asymptotic estimate.
    Bekessy,
    /// Monte Carlo estimate from random block-matrix permanents.
    Estimate,
    /// Monte Carlo estimate of the weighted sum over tables of prod w^d.
    Weighted {
        /// Also compute the exact sum of prod w^d / d! through one permanent.
        #[arg(long)]
        fy: bool,
    },
    /// Low-rank asymptotic count; uses the weights when given.
    Lowrank {
        /// Largest accepted numerical rank of the weight matrix.
        #[arg(long, default_value_t = 4)]
        rank_bound: usize,
    },
    /// Low-rank asymptotic count of 0-1 tables.
    Lowrank01,
    /// Low-rank count of tables whose column sums lie in given sets.
    LowrankColsets {
        /// Admissible sums per column: `0,1,2;1,3;0,2`.
        #[arg(long)]
        sets: String,
    },
    /// Build an approximation of h_r or e_r and check every coefficient.
    VerifyCoeffs {
        #[arg(long, value_enum, default_value_t = Kind::Complete)]
        kind: Kind,
        /// Degree r.
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Number of variables n.
        #[arg(long, default_value_t = 4)]
        vars: usize,
        /// Check a saved approximation instead of building one.
        #[arg(long)]
        load: Option<PathBuf>,
        /// Save the approximation as JSON.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Write the expanded polynomial in canonical text form.
        #[arg(long)]
        dump_poly: Option<PathBuf>,
    },
    /// Second-moment ratio of the Monte Carlo estimator against its bounds.
    Variance,
    /// Exact count next to every approximation.
    Compare,
    /// Permanent of a square matrix file.
    Permanent {
        #[arg(long)]
        matrix_file: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Count01 => "count01",
            Command::Fy => "fy",
            Command::Bekessy => "bekessy",
            Command::Estimate => "estimate",
            Command::Weighted { .. } => "weighted",
            Command::Lowrank { .. } => "lowrank",
            Command::Lowrank01 => "lowrank01",
            Command::LowrankColsets { .. } => "lowrank-colsets",
            Command::VerifyCoeffs { .. } => "verify-coeffs",
            Command::Variance => "variance",
            Command::Compare => "compare",
            Command::Permanent { .. } => "permanent",
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

impl Opts {
    fn seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV} is not a u64: `{s}`"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    fn epsilon(&self) -> Result<f64> {
        if self.epsilon > 0.0 && self.epsilon < 1.0 {
            Ok(self.epsilon)
        } else {
            Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )))
        }
    }

    fn mc_samples(&self) -> Result<usize> {
        let s = self.samples.unwrap_or(DEFAULT_MC_SAMPLES);
        if s < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 samples, got {s}")));
        }
        Ok(s)
    }

    fn route(&self) -> PairingRoute {
        match self.route {
            Route::Auto => PairingRoute::Auto,
            Route::Reduced => PairingRoute::Reduced,
            Route::Direct => PairingRoute::Direct,
        }
    }

    fn lowrank_options(&self, rank_bound: usize) -> LowRankOptions {
        LowRankOptions {
            route: self.route(),
            term_cap: self.term_cap,
            repeats: self.repeats,
            samples: self.samples,
            rank_bound,
        }
    }

    /// Margins from the flags or the margins file, plus any weights.
    fn inputs(&self) -> Result<(Margins, Option<WeightMatrix>)> {
        let (margins, mut weights) = match (&self.margins_file, &self.rows, &self.cols) {
            (Some(path), None, None) => input::margins_file(path)?,
            (None, Some(r), Some(c)) => (
                Margins::new(input::parse_list(r, "row")?, input::parse_list(c, "column")?)?,
                None,
            ),
            (Some(_), _, _) => {
                return Err(Error::InvalidParameter(
                    "give either --margins-file or --rows/--cols".into(),
                ))
            }
            _ => return Err(Error::InvalidParameter("--rows and --cols are required".into())),
        };
        if let Some(path) = &self.weights_file {
            weights = Some(WeightMatrix::new(input::matrix_file(path)?)?);
        }
        if let Some(w) = &weights {
            w.check_shape(&margins)?;
        }
        Ok((margins, weights))
    }

    fn margins(&self) -> Result<Margins> {
        self.inputs().map(|(m, _)| m)
    }

    fn weights(&self) -> Result<(Margins, WeightMatrix)> {
        match self.inputs()? {
            (m, Some(w)) => Ok((m, w)),
            _ => Err(Error::InvalidParameter("this command needs --weights-file".into())),
        }
    }
}

fn margins_echo(m: &Margins) -> Value {
    json!({ "rows": m.rows(), "cols": m.cols() })
}

fn run(command: &Command, opts: &Opts) -> Result<(Value, Value)> {
    let seed = opts.seed()?;
    match command {
        Command::Count => {
            let m = opts.margins()?;
            let count = exact_count_dp(&m, opts.exact_budget)?;
            Ok((margins_echo(&m), json!({ "count": count.to_string() })))
        }
        Command::Count01 => {
            let m = opts.margins()?;
            let count = exact_count_01(&m, opts.exact_budget)?;
            Ok((margins_echo(&m), json!({ "count": count.to_string() })))
        }
        Command::Fy => {
            let m = opts.margins()?;
            let v = fisher_yates_count(&m);
            let text = v.to_string();
            Ok((
                margins_echo(&m),
                json!({ "value": text, "approx": tablecount::Scalar::to_f64(&v) }),
            ))
        }
        Command::Bekessy => {
            let m = opts.margins()?;
            Ok((margins_echo(&m), json!({ "value": bekessy_estimate(&m) })))
        }
        Command::Estimate => {
            let m = opts.margins()?;
            let est = mc_estimate_count(&m, opts.mc_samples()?, seed, opts.perm_cap)?;
            Ok((margins_echo(&m), to_value(&est)))
        }
        Command::Weighted { fy } => {
            let (m, w) = opts.weights()?;
            let est = mc_weighted_count(&m, &w, opts.mc_samples()?, seed, opts.perm_cap)?;
            let mut result = json!({ "estimate": to_value(&est) });
            if *fy {
                let exact = weighted_fy_count(&m, &w, opts.perm_cap)?;
                result["weighted_fy"] = json!(exact);
            }
            let mut echo = margins_echo(&m);
            echo["weights"] = json!(w.rows());
            Ok((echo, result))
        }
        Command::Lowrank { rank_bound } => {
            let (m, w) = opts.inputs()?;
            let eps = opts.epsilon()?;
            let options = opts.lowrank_options(*rank_bound);
            let mut echo = margins_echo(&m);
            let result = match &w {
                Some(w) => {
                    echo["weights"] = json!(w.rows());
                    lowrank_weighted_count(&m, w, eps, seed, &options)?
                }
                None => lowrank_asymptotic_count(&m, eps, seed, &options)?,
            };
            Ok((echo, to_value(&result)))
        }
        Command::Lowrank01 => {
            let m = opts.margins()?;
            let result = lowrank_01_count(&m, opts.epsilon()?, seed, &opts.lowrank_options(4))?;
            Ok((margins_echo(&m), to_value(&result)))
        }
        Command::LowrankColsets { sets } => {
            let rows = match &opts.rows {
                Some(r) => input::parse_list(r, "row")?,
                None => return Err(Error::InvalidParameter("--rows is required".into())),
            };
            let sets = input::parse_sets(sets)?;
            let result = lowrank_column_sets_count(
                &rows,
                &sets,
                opts.epsilon()?,
                seed,
                &opts.lowrank_options(4),
            )?;
            Ok((json!({ "rows": rows, "sets": sets }), to_value(&result)))
        }
        Command::VerifyCoeffs {
            kind,
            degree,
            vars,
            load,
            save,
            dump_poly,
        } => {
            let approx = match load {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
                    })?;
                    ApproxSymmetricPoly::from_json(&text)?
                }
                None => match kind {
                    Kind::Complete => build_h_tilde(*degree, *vars, opts.epsilon()?, seed, opts.samples)?,
                    Kind::Elementary => build_e_tilde(*degree, *vars, opts.epsilon()?, seed, opts.samples)?,
                },
            };
            let write = |path: &PathBuf, text: String| {
                std::fs::write(path, text).map_err(|e| {
                    Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
                })
            };
            if let Some(path) = save {
                write(path, approx.to_json())?;
            }
            if let Some(path) = dump_poly {
                write(path, approx.expand(opts.term_cap)?.to_canonical_text())?;
            }
            let report = verify_coefficients(&approx, opts.term_cap)?;
            let echo = json!({
                "kind": match approx.kind { ApproxKind::Complete => "complete", ApproxKind::Elementary => "elementary" },
                "degree": approx.r,
                "vars": approx.num_vars,
                "epsilon": approx.epsilon,
            });
            let mut result = to_value(&report);
            result["passed"] = json!(report.passed());
            result["samples"] = json!(approx.samples());
            Ok((echo, result))
        }
        Command::Variance => {
            let (m, w) = opts.inputs()?;
            let samples = opts.mc_samples()?;
            let report = match &w {
                Some(w) => weighted_variance_ratio_report(&m, w, samples, seed, opts.perm_cap)?,
                None => variance_ratio_report(&m, samples, seed, opts.perm_cap)?,
            };
            Ok((margins_echo(&m), to_value(&report)))
        }
        Command::Compare => compare(opts, seed),
        Command::Permanent { matrix_file } => {
            let rows = input::matrix_file(matrix_file)?;
            let n = rows.len();
            let matrix = SquareMatrix::from_rows(rows)?;
            let value = permanent_exact(&matrix, opts.perm_cap)?;
            Ok((json!({ "size": n }), json!({ "permanent": value })))
        }
    }
}

fn compare(opts: &Opts, seed: u64) -> Result<(Value, Value)> {
    let m = opts.margins()?;
    let start = Instant::now();
    let exact = exact_count_dp(&m, opts.exact_budget)?;
    let exact_ms = ms(start);
    let exact_f = tablecount::Scalar::to_f64(&tablecount::Rational::from_integer(exact.clone().into()));
    let rel = |v: f64| (v / exact_f - 1.0).abs();
    let mut rows = vec![json!({
        "method": "exact",
        "value": exact.to_string(),
        "rel_error": 0.0,
        "elapsed_ms": exact_ms,
    })];
    let mut push = |method: &str, outcome: Result<f64>, start: Instant| {
        let elapsed = ms(start);
        rows.push(match outcome {
            Ok(v) => json!({ "method": method, "value": v, "rel_error": rel(v), "elapsed_ms": elapsed }),
            Err(e) => json!({ "method": method, "error": e.to_string(), "elapsed_ms": elapsed }),
        });
    };
    let t = Instant::now();
    push("fy", Ok(tablecount::Scalar::to_f64(&fisher_yates_count(&m))), t);
    let t = Instant::now();
    push("bekessy", Ok(bekessy_estimate(&m)), t);
    let t = Instant::now();
    let samples = opts.mc_samples()?;
    push("montecarlo", mc_estimate_count(&m, samples, seed, opts.perm_cap).map(|e| e.mean), t);
    let t = Instant::now();
    let eps = opts.epsilon()?;
    push(
        "lowrank",
        lowrank_asymptotic_count(&m, eps, seed, &opts.lowrank_options(4)).map(|r| r.value),
        t,
    );
    Ok((margins_echo(&m), json!({ "methods": rows })))
}

fn render_table(report: &Value) -> String {
    fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    flatten(&key, v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    if let Some(methods) = report["result"]["methods"].as_array() {
        let mut s = format!("{:<12} {:>24} {:>12} {:>12}\n", "method", "value", "rel_error", "ms");
        for row in methods {
            let value = match &row["value"] {
                Value::String(v) => v.clone(),
                Value::Null => row["error"].as_str().unwrap_or("").to_string(),
                v => v.to_string(),
            };
            s += &format!(
                "{:<12} {:>24} {:>12} {:>12}\n",
                row["method"].as_str().unwrap_or(""),
                value,
                row["rel_error"].as_f64().map_or(String::from("-"), |e| format!("{e:.6}")),
                row["elapsed_ms"].as_f64().map_or(String::new(), |t| format!("{t:.3}"))
            );
        }
        return s;
    }
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail("usage", first.trim_start_matches("error: "), 2);
        }
    };
    let start = Instant::now();
    match run(&cli.command, &cli.opts) {
        Ok((input, result)) => {
            let mut report = Map::new();
            report.insert("command".into(), json!(cli.command.name()));
            report.insert("input".into(), input);
            report.insert("result".into(), result);
            report.insert("seed".into(), json!(cli.opts.seed().unwrap_or(DEFAULT_SEED)));
            report.insert("elapsed_ms".into(), json!(ms(start)));
            let report = Value::Object(report);
            match cli.opts.output {
                Output::Json => println!("{report}"),
                Output::Table => print!("{}", render_table(&report)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), &e.to_string(), if e.is_resource() { 3 } else { 2 }),
    }
}
