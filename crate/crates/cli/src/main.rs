use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use wline::isometries::IsometryDescriptor;
use wline::json::{descriptor_from_json, measure_from_json, measure_to_json, measures_to_json};
use wline::metric::wasserstein_distance;
use wline::report::to_csv;
use wline::sampling::trial_rng;
use wline::suites::{run_suite, SUITES};
use wline::unit_interval::{qn_elements, random_mn_element, slice_extremal_pair};
use wline::{Measure, TwoPointParam};

#[derive(Parser)]
#[command(name = "wline", version, about = "Wasserstein geometry of measures on the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Wasserstein distance between two measure files.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Apply an isometry descriptor to a measure and print the image.
    ///
    /// Pass a descriptor file and a measure file, or `--q` and a measure
    /// file for the exotic flow.
    Apply {
        #[arg(num_args = 1..=2, required = true)]
        files: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
    },
    /// Run a verification suite and emit its CSV report.
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a JSON array of generated measures.
    Generate {
        #[command(subcommand)]
        kind: Generate,
    },
    /// List the registered verification suites.
    Suites,
}

#[derive(Subcommand)]
enum Generate {
    /// The finite set Q_n.
    Qn {
        #[arg(long)]
        n: u32,
    },
    /// A random element of M_n.
    MnRandom {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The pair realizing the diameter of the slice at barycenter t.
    SliceExtremal {
        #[arg(long)]
        t: f64,
    },
    /// The two-point measure with chart coordinates (x, sigma, p).
    TwoPoint {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Scope(String),
    #[error("{0}")]
    UnknownSuite(String),
    #[error("verification failed")]
    Failed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Failed => 1,
            Self::Input(_) => 2,
            Self::Scope(_) => 3,
            Self::UnknownSuite(_) => 4,
        }
    }
}

impl From<wline::Error> for CliError {
    fn from(e: wline::Error) -> Self {
        use wline::Error as E;
        match e {
            E::DomainMismatch | E::ScopeMismatch(_) | E::InvalidIntervalIsometry { .. } => Self::Scope(e.to_string()),
            E::UnknownSuite(_) => Self::UnknownSuite(e.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<Measure<f64>, CliError> {
    measure_from_json(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Decimal text with 15 significant digits, switching to exponent form
/// outside `[1e-5, 1e15)`.
fn significant15(x: f64) -> String {
    let sci = format!("{x:.14e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if x != 0.0 && !(-5..15).contains(&exp) {
        return sci;
    }
    let exp = if x == 0.0 { 0 } else { exp };
    format!("{x:.prec$}", prec = (14 - exp) as usize)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dist { a, b, p } => {
            let (mu, nu) = (load_measure(&a)?, load_measure(&b)?);
            println!("{}", significant15(wasserstein_distance(&mu, &nu, p)?));
        }
        Command::Apply { files, q } => {
            let (iso, measure) = match (q, files.as_slice()) {
                (Some(q), [m]) => (IsometryDescriptor::Exotic { q }, m),
                (None, [d, m]) => {
                    let iso = descriptor_from_json(&read(d)?).map_err(|e| CliError::Input(format!("{}: {e}", d.display())))?;
                    (iso, m)
                }
                _ => return Err(CliError::Input("expected DESCRIPTOR MEASURE, or --q Q MEASURE".into())),
            };
            let mu = load_measure(measure)?;
            println!("{}", measure_to_json(&iso.apply(&mu)?));
        }
        Command::Verify { suite, trials, seed, out } => {
            let reports = run_suite(&suite, trials, seed)?;
            let csv = to_csv(&reports);
            match out {
                Some(path) => {
                    fs::write(&path, csv).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    for r in &reports {
                        println!("{}", r.summary_line());
                    }
                }
                None => {
                    print!("{csv}");
                    for r in &reports {
                        eprintln!("{}", r.summary_line());
                    }
                }
            }
            if !reports.iter().all(|r| r.passed) {
                return Err(CliError::Failed);
            }
        }
        Command::Generate { kind } => {
            let measures = match kind {
                Generate::Qn { n } => {
                    if n > 16 {
                        return Err(CliError::Input(format!("--n {n} is above 16")));
                    }
                    qn_elements(n)?
                }
                Generate::MnRandom { n, seed } => vec![random_mn_element(&mut trial_rng(seed, 0), n)?],
                Generate::SliceExtremal { t } => {
                    let (a, b) = slice_extremal_pair(t)?;
                    vec![a, b]
                }
                Generate::TwoPoint { x, sigma, p } => vec![TwoPointParam::new(x, sigma, p)?.to_discrete()?.to_measure()],
            };
            println!("{}", measures_to_json(&measures));
        }
        Command::Suites => {
            for s in SUITES {
                println!("{}\t{}", s.id, s.default_trials);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
