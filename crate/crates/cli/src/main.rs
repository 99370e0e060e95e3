//! Command-line surface for the channel calculus: load channels, binary
//! operations and measures from JSON files, evaluate parameters, apply
//! operations, run equivalence/degradation/distance tests, and run the
//! built-in invariant suites.
//!
//! Exit codes: 0 on success (including negative test answers such as
//! "not degraded"), 1 on domain or I/O errors, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blackwell_kit::analysis::{
    continuity_probe, is_degraded, noisiness_lower_bound, tv_class_distance, NoisinessBudget,
    ProbeParam,
};
use blackwell_kit::files::{
    canonical_float, format_significant, parse_binary_op, parse_channel, write_channel,
    write_measure,
};
use blackwell_kit::selftest;
use blackwell_kit::{
    bhattacharyya, capacity, channel_distance, code_error, compose, equivalent, interpolate,
    map_error, mutual_information, optimal_code_error, polar_minus, polar_plus, BlackwellMeasure,
    Channel, Code, Distribution, Error,
};

/// Display precision for plain-text and TSV numeric output.
const DISPLAY_DIGITS: usize = 12;

#[derive(Parser)]
#[command(name = "blackwell-kit", version, about = "Calculus of discrete memoryless channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    /// `name: value` lines.
    #[default]
    Text,
    /// Tab-separated `name<TAB>value` lines.
    Tsv,
    /// A single JSON object with full-precision numbers.
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scalar channel parameter
    Param {
        #[command(subcommand)]
        kind: ParamCommand,
    },
    /// Apply a channel operation and emit the resulting channel file
    Op {
        #[command(subcommand)]
        kind: OpCommand,
    },
    /// Compute the Blackwell measure of a channel and emit the measure file
    Blackwell {
        channel: PathBuf,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether two channels are equivalent
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether the first channel is degraded from the second
    Degraded {
        candidate: PathBuf,
        reference: PathBuf,
        /// Write the garbling witness channel here when feasible
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances between two channels
    Dist {
        kind: DistKind,
        first: PathBuf,
        second: PathBuf,
        /// Largest label alphabet for the noisiness search (default |X| + 2)
        #[arg(long)]
        m_max: Option<usize>,
        /// Random priors per label-alphabet size in the noisiness search
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Overrides BLACKWELL_KIT_SEED and the default seed 0
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb a channel and report the observed parameter deviation
    Probe {
        param: ProbeKind,
        channel: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suites of every module
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ParamCommand {
    /// Channel capacity with certified bounds
    Capacity {
        channel: PathBuf,
        /// Stop once the bracket width is below this
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mutual information under a prior (uniform unless --prior is given)
    MutualInformation {
        channel: PathBuf,
        /// Comma-separated input weights, e.g. 0.3,0.7
        #[arg(long)]
        prior: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MAP decoding error under a prior (uniform unless --prior is given)
    MapError {
        channel: PathBuf,
        #[arg(long)]
        prior: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bhattacharyya parameter
    Bhattacharyya {
        channel: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ML error of a code. Words are comma-separated; symbols are
    /// digits, or dash-separated for alphabets past 9 (e.g. 10-2-0)
    CodeError {
        channel: PathBuf,
        #[arg(long)]
        code: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal (n, M)-code error by exhaustive search
    OptimalCodeError {
        channel: PathBuf,
        #[arg(long)]
        blocklength: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OpCommand {
    /// Channel sum (transmitter picks which channel to use)
    Sum {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Channel product (both channels used at once)
    Product {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Composition: outer applied to the output of inner
    Compose {
        outer: PathBuf,
        inner: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interpolation [alpha W1, (1 - alpha) W2]
    Interpolate {
        alpha: f64,
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minus polar transform driven by a binary operation file
    PolarMinus {
        channel: PathBuf,
        operation: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plus polar transform driven by a binary operation file
    PolarPlus {
        channel: PathBuf,
        operation: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    /// Max-row total variation between the matrices
    Matrix,
    /// Total variation between the Blackwell measures
    Tv,
    /// Certified lower bound on the noisiness distance
    Noisiness,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Capacity,
    MutualInformation,
    MapError,
    Bhattacharyya,
}

enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
}

/// Renders `name: value` / TSV / JSON from one key-value list.
fn render(format: Format, fields: &[(&str, Value)]) -> String {
    let mut out = String::new();
    match format {
        Format::Text | Format::Tsv => {
            let sep = if format == Format::Tsv { "\t" } else { ": " };
            for (name, value) in fields {
                let rendered = match value {
                    Value::Num(x) => format_significant(*x, DISPLAY_DIGITS),
                    Value::Int(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                };
                out.push_str(&format!("{name}{sep}{rendered}\n"));
            }
        }
        Format::Json => {
            out.push('{');
            for (i, (name, value)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let rendered = match value {
                    Value::Num(x) => canonical_float(*x),
                    Value::Int(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                };
                out.push_str(&format!("\"{name}\":{rendered}"));
            }
            out.push_str("}\n");
        }
    }
    out
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_channel(path: &Path) -> Result<Channel, Error> {
    parse_channel(&read_file(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_prior(arg: Option<&str>, input_size: usize) -> Result<Distribution, Error> {
    match arg {
        None => Ok(Distribution::uniform(input_size)),
        Some(s) => {
            let weights: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse()).collect();
            let weights =
                weights.map_err(|e| Error::Parse(format!("prior weights '{s}': {e}")))?;
            Distribution::new(weights)
        }
    }
}

fn parse_code_words(arg: &str) -> Result<Vec<Vec<usize>>, Error> {
    arg.split(',')
        .map(|word| {
            let word = word.trim();
            if word.is_empty() {
                return Err(Error::Parse("empty codeword".into()));
            }
            if word.contains('-') {
                word.split('-')
                    .map(|t| {
                        t.parse()
                            .map_err(|e| Error::Parse(format!("codeword symbol '{t}': {e}")))
                    })
                    .collect()
            } else {
                word.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as usize)
                            .ok_or_else(|| Error::Parse(format!("codeword symbol '{c}'")))
                    })
                    .collect()
            }
        })
        .collect()
}

/// --seed beats BLACKWELL_KIT_SEED beats 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Error> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("BLACKWELL_KIT_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|e| Error::Parse(format!("BLACKWELL_KIT_SEED '{text}': {e}"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Param { kind } => run_param(kind)?,
        Command::Op { kind } => run_op(kind)?,
        Command::Blackwell { channel, out } => {
            let w = load_channel(&channel)?;
            let measure = BlackwellMeasure::from_channel(&w);
            emit(out.as_ref(), &write_measure(&measure))?;
        }
        Command::Equiv {
            first,
            second,
            format,
            out,
        } => {
            let answer = equivalent(&load_channel(&first)?, &load_channel(&second)?)?;
            emit(
                out.as_ref(),
                &render(format, &[("equivalent", Value::Bool(answer))]),
            )?;
        }
        Command::Degraded {
            candidate,
            reference,
            witness_out,
            format,
            out,
        } => {
            let outcome = is_degraded(&load_channel(&candidate)?, &load_channel(&reference)?)?;
            let text = match outcome.witness() {
                Some(witness) => {
                    if let Some(path) = witness_out {
                        write_file(&path, &write_channel(&witness.intermediate))?;
                    }
                    render(
                        format,
                        &[
                            ("degraded", Value::Bool(true)),
                            ("residual", Value::Num(witness.residual)),
                        ],
                    )
                }
                None => render(format, &[("degraded", Value::Bool(false))]),
            };
            emit(out.as_ref(), &text)?;
        }
        Command::Dist {
            kind,
            first,
            second,
            m_max,
            samples,
            seed,
            format,
            out,
        } => {
            let w1 = load_channel(&first)?;
            let w2 = load_channel(&second)?;
            let text = match kind {
                DistKind::Matrix => {
                    let d = channel_distance(&w1, &w2)?;
                    render(format, &[("matrix-distance", Value::Num(d))])
                }
                DistKind::Tv => {
                    let d = tv_class_distance(&w1, &w2)?;
                    render(format, &[("tv-distance", Value::Num(d))])
                }
                DistKind::Noisiness => {
                    let budget = NoisinessBudget {
                        m_max: m_max.unwrap_or(w1.input_size() + 2),
                        samples,
                        seed: resolve_seed(seed)?,
                    };
                    let est = noisiness_lower_bound(&w1, &w2, &budget)?;
                    render(
                        format,
                        &[
                            ("noisiness-lower-bound", Value::Num(est.lower_bound)),
                            ("m-max", Value::Int(est.m_max_used as u64)),
                            ("priors-sampled", Value::Int(est.priors_sampled as u64)),
                        ],
                    )
                }
            };
            emit(out.as_ref(), &text)?;
        }
        Command::Probe {
            param,
            channel,
            radius,
            samples,
            seed,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let param = match param {
                ProbeKind::Capacity => ProbeParam::Capacity,
                ProbeKind::MutualInformation => ProbeParam::SymmetricMutualInformation,
                ProbeKind::MapError => ProbeParam::SymmetricMapError,
                ProbeKind::Bhattacharyya => ProbeParam::Bhattacharyya,
            };
            let report = continuity_probe(&w, param, radius, samples, resolve_seed(seed)?)?;
            emit(
                out.as_ref(),
                &render(
                    format,
                    &[
                        ("max-param-deviation", Value::Num(report.max_param_deviation)),
                        (
                            "max-channel-distance",
                            Value::Num(report.max_channel_distance),
                        ),
                        ("samples", Value::Int(report.samples as u64)),
                    ],
                ),
            )?;
        }
        Command::Selftest { seed } => {
            let report = selftest::run(resolve_seed(seed)?);
            print!("{}", report.render());
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_param(kind: ParamCommand) -> Result<(), Error> {
    let (text, out) = match kind {
        ParamCommand::Capacity {
            channel,
            tol,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let result = capacity(&w, tol)?;
            (
                render(
                    format,
                    &[
                        ("capacity", Value::Num(result.value)),
                        ("lower", Value::Num(result.lower_bound)),
                        ("upper", Value::Num(result.upper_bound)),
                        ("gap", Value::Num(result.upper_bound - result.lower_bound)),
                        ("iterations", Value::Int(result.iterations)),
                    ],
                ),
                out,
            )
        }
        ParamCommand::MutualInformation {
            channel,
            prior,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let p = parse_prior(prior.as_deref(), w.input_size())?;
            let value = mutual_information(&p, &w)?;
            (
                render(format, &[("mutual-information", Value::Num(value))]),
                out,
            )
        }
        ParamCommand::MapError {
            channel,
            prior,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let p = parse_prior(prior.as_deref(), w.input_size())?;
            let value = map_error(&p, &w)?;
            (render(format, &[("map-error", Value::Num(value))]), out)
        }
        ParamCommand::Bhattacharyya {
            channel,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            (
                render(format, &[("bhattacharyya", Value::Num(bhattacharyya(&w)))]),
                out,
            )
        }
        ParamCommand::CodeError {
            channel,
            code,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let words = parse_code_words(&code)?;
            let blocklength = words.first().map(|w| w.len()).unwrap_or(0);
            let code = Code::new(blocklength, words)?;
            let value = code_error(&code, &w)?;
            (render(format, &[("code-error", Value::Num(value))]), out)
        }
        ParamCommand::OptimalCodeError {
            channel,
            blocklength,
            size,
            format,
            out,
        } => {
            let w = load_channel(&channel)?;
            let value = optimal_code_error(blocklength, size, &w)?;
            (
                render(format, &[("optimal-code-error", Value::Num(value))]),
                out,
            )
        }
    };
    emit(out.as_ref(), &text)
}

fn run_op(kind: OpCommand) -> Result<(), Error> {
    let (result, out) = match kind {
        OpCommand::Sum { first, second, out } => (
            blackwell_kit::channel_sum(&load_channel(&first)?, &load_channel(&second)?),
            out,
        ),
        OpCommand::Product { first, second, out } => (
            blackwell_kit::channel_product(&load_channel(&first)?, &load_channel(&second)?),
            out,
        ),
        OpCommand::Compose { outer, inner, out } => (
            compose(&load_channel(&outer)?, &load_channel(&inner)?)?,
            out,
        ),
        OpCommand::Interpolate {
            alpha,
            first,
            second,
            out,
        } => (
            interpolate(alpha, &load_channel(&first)?, &load_channel(&second)?)?,
            out,
        ),
        OpCommand::PolarMinus {
            channel,
            operation,
            out,
        } => {
            let op = parse_binary_op(&read_file(&operation)?)?;
            (polar_minus(&load_channel(&channel)?, &op)?, out)
        }
        OpCommand::PolarPlus {
            channel,
            operation,
            out,
        } => {
            let op = parse_binary_op(&read_file(&operation)?)?;
            (polar_plus(&load_channel(&channel)?, &op)?, out)
        }
    };
    emit(out.as_ref(), &write_channel(&result))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
