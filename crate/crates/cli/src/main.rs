use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use lpdecode::channel::{ChannelModel, CostVector};
use lpdecode::codes::{builtin_code, parse_alist, ParityCheckMatrix};
use lpdecode::decoder::{DecodeError, DecodeOutcome, Formulation, LpDecoder};
use lpdecode::exec::Execution;
use lpdecode::sim::{self, CompareOptions, FormulationChoice, SimConfig, SimError};

#[derive(Parser)]
#[command(name = "lpdecode", version, about = "LP decoding of binary linear codes")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Repeat for more log output (-v info, -vv debug, -vvv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Run trials and cost samples on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and generated constraint counts for both relaxations.
    Counts {
        /// alist file, or builtin:NAME
        #[arg(long)]
        code: String,
    },
    /// Solve both relaxations on sampled cost vectors and compare them.
    Compare {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 100)]
        num_gammas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample costs from [0.1, 5] instead of [-5, 5].
        #[arg(long)]
        positive_only: bool,
    },
    /// Decode one cost vector.
    Decode {
        #[arg(long)]
        code: String,
        /// Comma-separated costs, or a file holding them.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value = "feldman")]
        formulation: Formulation,
    },
    /// Monte Carlo frame and bit error rates over a channel.
    Simulate {
        #[arg(long)]
        code: String,
        /// bsc:P or awgn:SIGMA
        #[arg(long)]
        channel: ChannelModel,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "feldman")]
        formulation: FormulationChoice,
        /// Include per-trial wall-clock times (output is then not reproducible).
        #[arg(long)]
        timing: bool,
        /// Embed per-trial records in JSON output.
        #[arg(long)]
        records: bool,
    },
}

enum Failure {
    Input(String),
    SolverCap(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_iteration_limit() {
            Failure::SolverCap(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<DecodeError> for Failure {
    fn from(e: DecodeError) -> Self {
        SimError::from(e).into()
    }
}

fn load_code(spec: &str) -> Result<(String, ParityCheckMatrix), Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let h = builtin_code(name).map_err(|e| Failure::Input(e.to_string()))?;
        return Ok((name.to_string(), h));
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::Input(format!("{spec}: {e}")))?;
    let h = parse_alist(&text).map_err(|e| Failure::Input(format!("{spec}: {e}")))?;
    let name = Path::new(spec).file_stem().map_or(spec.into(), |s| s.to_string_lossy().into_owned());
    Ok((name, h))
}

fn parse_gamma(arg: &str) -> Result<CostVector, Failure> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Failure::Input(format!("bad cost {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    CostVector::new(values).map_err(|e| Failure::Input(e.to_string()))
}

fn decode_csv(out: &DecodeOutcome) -> String {
    let point: Vec<String> = out.point.iter().map(|x| x.to_string()).collect();
    let codeword = out
        .codeword
        .as_ref()
        .map_or(String::new(), |w| w.iter().map(|b| b.to_string()).collect());
    format!(
        "formulation,objective,integral,ml_certified,iterations,codeword,point\n{},{},{},{},{},{},{}\n",
        out.formulation,
        out.objective,
        out.integral,
        out.ml_certified,
        out.iterations,
        codeword,
        point.join(" ")
    )
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let json = matches!(cli.format, Format::Json);
    match &cli.command {
        Command::Counts { code } => {
            let (name, h) = load_code(code)?;
            let r = sim::counts_report(&name, &h)?;
            Ok(if json { r.to_json() } else { r.to_csv() })
        }
        Command::Compare { code, num_gammas, seed, positive_only } => {
            let (name, h) = load_code(code)?;
            let opts = CompareOptions {
                num_gammas: *num_gammas,
                seed: *seed,
                positive_only: *positive_only,
                execution,
            };
            let r = sim::compare(&name, &h, &opts)?;
            info!("max objective gap {:e}", r.max_objective_gap);
            Ok(if json { r.to_json() } else { r.to_csv() })
        }
        Command::Decode { code, gamma, formulation } => {
            let (_, h) = load_code(code)?;
            let gamma = parse_gamma(gamma)?;
            let out = LpDecoder::new(&h, *formulation)?.decode(&gamma)?;
            Ok(if json { out.to_json() } else { decode_csv(&out) })
        }
        Command::Simulate { code, channel, trials, seed, formulation, timing, records } => {
            let (name, h) = load_code(code)?;
            let cfg = SimConfig {
                channel: *channel,
                trials: *trials,
                seed: *seed,
                formulations: *formulation,
                execution,
            };
            let r = sim::simulate(&name, &h, &cfg)?;
            for s in &r.summaries {
                info!("{}: FER {} ({} of {})", s.formulation, s.fer, s.frame_errors, s.trials);
            }
            Ok(if json { r.to_json(*records) } else { r.records_csv(*timing) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let (text, code) = match run(&cli) {
        Ok(mut text) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            (text, ExitCode::SUCCESS)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::SolverCap(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpdecode::lpsolver::SolverError;

    #[test]
    fn iteration_cap_maps_to_solver_failure() {
        let cap: Failure = DecodeError::Solver(SolverError::IterationLimit(10)).into();
        assert!(matches!(cap, Failure::SolverCap(_)));
        let other: Failure = DecodeError::GammaLength { expected: 4, found: 3 }.into();
        assert!(matches!(other, Failure::Input(_)));
    }

    #[test]
    fn gamma_accepts_commas_and_whitespace() {
        let g = parse_gamma("1, -2.5\n3").ok().unwrap();
        assert_eq!(g.as_slice(), &[1.0, -2.5, 3.0]);
        assert!(parse_gamma("1,x").is_err());
    }
}
