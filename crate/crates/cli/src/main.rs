//! `grover-stop`: stopping rules, searches, orbit traces, tables and experiments.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 not applicable, 64 usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use grover_stopping::report::{self, RuleStatus, DEFAULT_EPSILON};
use grover_stopping::{
    angles_of, certify, construct_rule, default_horizon, error_threshold, minimal_odd_l, pad_instance,
    run_discrimination, Error, Hypothesis, ProblemInstance, RuleMode, SearchMode,
};
use serde_json::json;

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_APPLICABLE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "grover-stop", version, about = "Grover stopping rules for |S| = M versus |S| = K")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Triple {
    /// Database size
    #[arg(long = "N")]
    n: u64,
    /// Smaller hypothesis size
    #[arg(long = "M")]
    m: u64,
    /// Larger hypothesis size
    #[arg(long = "K")]
    k: u64,
}

impl Triple {
    fn instance(&self) -> Result<ProblemInstance, Failure> {
        ProblemInstance::new(self.n, self.m, self.k).map_err(Failure::input)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Relaxed,
}

#[derive(Subcommand)]
enum Command {
    /// Constructive stopping rule with its certificate.
    Rule {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Build p, s, l even when the applicability flags fail.
        #[arg(long)]
        best_effort: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest odd l meeting a tolerance.
    Search {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Score threshold; defaults to sin²(2π·epsilon).
        #[arg(long)]
        tol: Option<f64>,
        /// Largest l to scan; defaults to 10× the closed-form bound.
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, value_enum, default_value = "relaxed")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Torus orbit trace as CSV.
    Orbit {
        #[command(flatten)]
        triple: Triple,
        #[arg(long = "l-max")]
        l_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iteration table over a grid of triples.
    Table {
        /// Comma list or ranges (`a..b[:step]`) of database sizes.
        #[arg(long = "N", required_unless_present = "triples")]
        n: Option<String>,
        #[arg(long = "M", required_unless_present = "triples")]
        m: Option<String>,
        #[arg(long = "K", required_unless_present = "triples")]
        k: Option<String>,
        /// File of `N,M,K` lines instead of ranges.
        #[arg(long, conflicts_with_all = ["n", "m", "k"])]
        triples: Option<PathBuf>,
        /// Reduce triples by their common divisor and drop repeats.
        #[arg(long)]
        reduced: bool,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo discrimination on the full register, under both hypotheses.
    Experiment {
        #[command(flatten)]
        triple: Triple,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pad (M, K, N) with artificial elements to bring K'/M' towards one.
    Pad {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "M")]
        m: u64,
        /// Integer ratio K = a·M.
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        a: Option<u64>,
        #[arg(long = "K")]
        k: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Instances whose minimal l is large compared to the closed-form bound.
    Diagnose {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "M")]
        m: String,
        #[arg(long = "K")]
        k: String,
        /// Ratio l_minimal / l_bound above which an instance is listed.
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(out: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Failure::input)?;
    writeln!(w).and_then(|_| w.flush()).map_err(Failure::input)
}

fn check_epsilon(epsilon: f64) -> Result<(), Failure> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Failure::input(Error::BadEpsilon(epsilon)))
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Rule {
            triple,
            epsilon,
            best_effort,
            out,
        } => {
            check_epsilon(epsilon)?;
            let mode = if best_effort { RuleMode::BestEffort } else { RuleMode::Strict };
            let rep = report::rule_report(&triple.instance()?, epsilon, mode);
            emit_json(&out, &rep)?;
            Ok(match (rep.status, mode) {
                (RuleStatus::Certified, _) | (RuleStatus::Uncertified, RuleMode::BestEffort) => 0,
                _ => EXIT_NOT_APPLICABLE,
            })
        }
        Command::Search {
            triple,
            epsilon,
            tol,
            horizon,
            mode,
            out,
        } => {
            check_epsilon(epsilon)?;
            let inst = triple.instance()?;
            let threshold = tol.unwrap_or_else(|| error_threshold(epsilon));
            let horizon = horizon.unwrap_or_else(|| default_horizon(&inst));
            let mode = match mode {
                Mode::Strict => SearchMode::Strict,
                Mode::Relaxed => SearchMode::Relaxed,
            };
            let rep = minimal_odd_l(&angles_of::<f64>(&inst), threshold, horizon, mode);
            emit_json(&out, &json!({ "instance": inst, "search": rep }))?;
            Ok(0)
        }
        Command::Orbit { triple, l_max, out } => {
            let rows = report::orbit_trace(&triple.instance()?, l_max).map_err(Failure::input)?;
            let w = open_out(&out)?;
            report::write_csv(&rows, w).map_err(Failure::input)?;
            Ok(0)
        }
        Command::Table {
            n,
            m,
            k,
            triples,
            reduced,
            epsilon,
            format,
            out,
        } => {
            check_epsilon(epsilon)?;
            let mut instances = match triples {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                    report::parse_triples(&text).map_err(Failure::input)?
                }
                None => {
                    let parse = |s: Option<String>| report::parse_values(&s.unwrap_or_default()).map_err(Failure::input);
                    report::grid(&parse(n)?, &parse(m)?, &parse(k)?)
                }
            };
            if reduced {
                instances = report::dedup_reduced(&instances);
            }
            if instances.is_empty() {
                return Err(Failure::input("grid contains no valid (N, M, K) triple"));
            }
            let rows = report::build_table(&instances, epsilon);
            match format {
                Format::Csv => report::write_table_csv(&rows, open_out(&out)?).map_err(Failure::input)?,
                Format::Json => emit_json(&out, &rows)?,
            }
            Ok(0)
        }
        Command::Experiment {
            triple,
            l,
            trials,
            seed,
            epsilon,
            out,
        } => {
            check_epsilon(epsilon)?;
            let inst = triple.instance()?;
            let outcomes = [Hypothesis::Small, Hypothesis::Large]
                .into_iter()
                .map(|truth| run_discrimination::<f64>(&inst, truth, l, trials, seed, epsilon))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::input)?;
            emit_json(&out, &outcomes)?;
            Ok(0)
        }
        Command::Pad {
            n,
            m,
            a,
            k,
            epsilon,
            out,
        } => {
            let k = match (a, k) {
                (Some(a), _) => m.checked_mul(a).ok_or_else(|| Failure::input(Error::BadRatio))?,
                (None, Some(k)) => k,
                (None, None) => unreachable!("clap requires --a or --K"),
            };
            match pad_instance::<f64>(m, k, n, epsilon) {
                Ok(pad) => {
                    let rule = construct_rule::<f64>(&pad.padded, RuleMode::Strict).ok();
                    let certificate = rule.as_ref().map(|r| certify(r, &pad.padded, epsilon));
                    emit_json(&out, &json!({ "padding": pad, "rule": rule, "certificate": certificate }))?;
                    Ok(0)
                }
                Err(e @ Error::PremiseViolated { .. }) => {
                    emit_json(&out, &json!({ "error": "premise", "message": e.to_string() }))?;
                    Ok(EXIT_NOT_APPLICABLE)
                }
                Err(e) => Err(Failure::input(e)),
            }
        }
        Command::Diagnose {
            n,
            m,
            k,
            threshold,
            epsilon,
            out,
        } => {
            check_epsilon(epsilon)?;
            let ms = report::parse_values(&m).map_err(Failure::input)?;
            let ks = report::parse_values(&k).map_err(Failure::input)?;
            emit_json(&out, &report::diagnose(n, &ms, &ks, threshold, epsilon))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
