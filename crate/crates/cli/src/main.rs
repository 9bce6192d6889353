//! `kissing`: cosine-set simulation, search, verification and reference
//! configurations from the command line.
//!
//! Exit codes: 0 success or Pass, 1 Fail, 2 I/O or unreadable input,
//! 3 invalid configuration or mixed arithmetic modes, 4 corrupt checkpoint.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kissing_core::game::{train_loop, Game, TrainState};
use kissing_core::io::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use kissing_core::io::config::RunConfig;
use kissing_core::io::gram_file::{self, format_gram, parse_gram, GramData};
use kissing_core::io::report::CosineReport;
use kissing_core::io::vectors::{self, format_vectors, parse_vectors, VectorData};
use kissing_core::io::{read_text, sniff_kind, write_text};
use kissing_core::refconfigs::{generate, ingest, GeneratorId};
use kissing_core::simulate::{simulate_cosine_set, SimulationOptions};
use kissing_core::verify::{verify_gram, verify_vectors, Certificate};
use kissing_core::{ArithMode, Error, GramState, Rational, Result, Scalar, Tolerances};

const THREADS_VAR: &str = "KISSING_THREADS";

#[derive(Parser)]
#[command(name = "kissing", version, about = "Kissing configurations via Gram-matrix completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rational,
    Float,
}

impl From<Mode> for ArithMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Rational => ArithMode::Rational,
            Mode::Float => ArithMode::Float,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Vectors,
    Gram,
}

#[derive(Subcommand)]
enum Command {
    /// Discover the cosine set of a dimension by tangent-sphere simulation.
    SimulateCosines {
        #[arg(long)]
        dim: usize,
        /// Vector file with the starting centers.
        #[arg(long)]
        seed_file: Option<PathBuf>,
        /// Number of sphere placements.
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        exploration: f64,
    },
    /// Run the fill/correct search described by a configuration file.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Stop after this many episodes in total, as if interrupted.
        #[arg(long, hide = true)]
        stop_after: Option<u64>,
    },
    /// Certify a Gram or vector file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Scale vectors to unit norm before checking.
        #[arg(long)]
        normalize: bool,
        /// Also write the certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Write a reference configuration.
    Generate {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "vectors")]
        format: OutputFormat,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } => 2,
        Error::InvalidConfig(_)
        | Error::MixedModeEntries(_)
        | Error::UnknownGenerator(_)
        | Error::InvalidSeed(_)
        | Error::ParseScalar(_) => 3,
        Error::CorruptCheckpoint(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|_| match cli.command {
        Command::SimulateCosines { dim, seed_file, budget, out, rng_seed, exploration } => {
            simulate(dim, seed_file.as_deref(), budget, &out, rng_seed, exploration)
        }
        Command::Search { config, resume, stop_after } => search(&config, resume.as_deref(), stop_after),
        Command::Verify { input, mode, normalize, certificate } => {
            verify(&input, mode.map(Into::into), normalize, certificate.as_deref())
        }
        Command::Generate { name, out, format } => generate_file(&name, &out, format),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Validates the thread-count variable. The engine runs on one thread so
/// that runs stay bit-reproducible; the value is accepted for compatibility.
fn threads() -> Result<()> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(()),
            _ => Err(Error::InvalidConfig(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(()),
    }
}

fn simulate(
    dim: usize,
    seed_file: Option<&Path>,
    budget: usize,
    out: &Path,
    rng_seed: u64,
    exploration: f64,
) -> Result<u8> {
    if dim == 0 {
        return Err(Error::InvalidConfig("--dim must be at least 1".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidConfig("--budget must be at least 1".into()));
    }
    let seed = match seed_file {
        Some(path) => {
            let config = ingest(vectors::read_vector_file(path)?)?;
            if config.dim != dim {
                return Err(Error::InvalidConfig(format!(
                    "seed file has dimension {}, expected {dim}",
                    config.dim
                )));
            }
            config.vectors
        }
        None => Vec::new(),
    };
    let options = SimulationOptions { budget, exploration, rng_seed };
    let set = simulate_cosine_set(dim, &seed, &options)?;
    let report = CosineReport::from_set(&set);
    write_text(out, &report.to_text())?;
    println!(
        "dim {dim}: cosine set {{{}}} from {} episodes (largest configuration {}, converged {})",
        report.set().join(", "),
        set.episodes,
        set.best_count,
        set.converged
    );
    Ok(0)
}

fn search(config_path: &Path, resume: Option<&Path>, stop_after: Option<u64>) -> Result<u8> {
    let config = RunConfig::read(config_path)?;
    match config.game.mode {
        ArithMode::Float => run_search::<f64>(&config, resume, stop_after),
        ArithMode::Rational => run_search::<Rational>(&config, resume, stop_after),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn run_search<S: Scalar>(config: &RunConfig, resume: Option<&Path>, stop_after: Option<u64>) -> Result<u8> {
    let game: Game<S> = Game::from_config(config)?;
    let echo = config.echo();
    let seed = config.game.rng_seed;
    let state = match resume {
        Some(path) => {
            let ckpt: Checkpoint<S> = read_checkpoint(path)?;
            if ckpt.config_echo != echo || ckpt.rng_seed != seed {
                return Err(Error::InvalidConfig(
                    "checkpoint was written for a different configuration".into(),
                ));
            }
            ckpt.state
        }
        None => TrainState::new(&game),
    };
    let out = &config.output;
    let mut log = match &out.log {
        Some(path) => {
            let file = if resume.is_some() {
                File::options().create(true).append(true).open(path)
            } else {
                File::create(path)
            };
            let mut w = BufWriter::new(file.map_err(|e| io_err(path, e))?);
            if resume.is_none() {
                for line in echo.lines() {
                    writeln!(w, "# {line}").map_err(|e| io_err(path, e))?;
                }
            }
            Some((path.clone(), w))
        }
        None => None,
    };
    let every = config.game.checkpoint_every.max(1);
    let save = |state: &TrainState<S>| -> Result<()> {
        match &out.checkpoint {
            Some(path) => write_checkpoint(
                path,
                &Checkpoint { config_echo: echo.clone(), rng_seed: seed, state: state.clone() },
            ),
            None => Ok(()),
        }
    };
    let final_state = train_loop(&game, state, |state, result| {
        if let Some((path, w)) = log.as_mut() {
            writeln!(
                w,
                "episode={} reward={} best={} rounds={:?} edges={} time_ms={}",
                state.next_episode - 1,
                result.team_reward,
                state.best_reward(),
                result.per_round_sizes,
                state.tree.edge_count(),
                result.wall_time.as_millis()
            )
            .map_err(|e| io_err(path, e))?;
        }
        if state.next_episode % every == 0 {
            save(state)?;
        }
        Ok(match stop_after {
            Some(k) if state.next_episode >= k => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        })
    })?;
    save(&final_state)?;
    if let Some((path, mut w)) = log {
        w.flush().map_err(|e| io_err(&path, e))?;
    }

    let Some(best) = &final_state.best else {
        println!("no episodes played");
        return Ok(0);
    };
    let cert = verify_gram(&best.state, &config.tolerances);
    if let Some(path) = &out.gram {
        write_text(path, &format_gram(&best.state))?;
    }
    if let Some(path) = &out.vectors {
        write_text(path, &format_vectors(best.state.dim(), &best.state.reconstruct_vectors()))?;
    }
    if let Some(path) = &out.certificate {
        write_text(path, &cert.to_text())?;
    }
    println!(
        "best reward {} (episode {}) after {} episodes; certificate {}",
        best.reward,
        best.episode,
        final_state.next_episode,
        if cert.verdict.is_pass() { "pass" } else { "fail" }
    );
    Ok(if cert.verdict.is_pass() { 0 } else { 1 })
}

fn to_rational_gram(g: GramState<f64>) -> Result<GramState<Rational>> {
    g.try_convert(|x| Rational::from_f64_checked(*x))
}

fn certify_file(input: &Path, mode: Option<ArithMode>, normalize: bool) -> Result<Certificate> {
    let tol = Tolerances::default();
    let text = read_text(input)?;
    match sniff_kind(&text) {
        Some(gram_file::KIND) => {
            let data = parse_gram(&text)?;
            Ok(match (data, mode) {
                (GramData::Float(g), None | Some(ArithMode::Float)) => verify_gram(&g, &tol),
                (GramData::Float(g), Some(ArithMode::Rational)) => verify_gram(&to_rational_gram(g)?, &tol),
                (GramData::Rational(g), Some(ArithMode::Float)) => verify_gram(&g.to_float(), &tol),
                (GramData::Rational(g), _) => verify_gram(&g, &tol),
            })
        }
        Some(vectors::KIND) => {
            let data = parse_vectors(&text)?;
            let mode = mode.unwrap_or(data.mode());
            if normalize {
                let config = ingest(data)?;
                return match mode {
                    ArithMode::Float => Ok(verify_gram(&config.float_gram(), &tol)),
                    ArithMode::Rational => match &config.exact_gram {
                        Some(g) => Ok(verify_gram(g, &tol)),
                        None => Err(Error::MixedModeEntries(
                            "normalized Gram entries are not all rational".into(),
                        )),
                    },
                };
            }
            match (data, mode) {
                (VectorData::Float { dim, vectors }, ArithMode::Float) => verify_vectors(dim, &vectors, &tol),
                (VectorData::Rational { dim, vectors }, ArithMode::Rational) => verify_vectors(dim, &vectors, &tol),
                (VectorData::Rational { dim, vectors }, ArithMode::Float) => {
                    let v: Vec<Vec<f64>> = vectors.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
                    verify_vectors(dim, &v, &tol)
                }
                (VectorData::Float { dim, vectors }, ArithMode::Rational) => {
                    let v = vectors
                        .iter()
                        .map(|r| r.iter().map(|x| Rational::from_f64_checked(*x)).collect())
                        .collect::<Result<Vec<Vec<Rational>>>>()?;
                    verify_vectors(dim, &v, &tol)
                }
            }
        }
        _ => Err(Error::Parse { line: 1, msg: "not a kiss-gram or kiss-vectors file".into() }),
    }
}

fn verify(input: &Path, mode: Option<ArithMode>, normalize: bool, certificate: Option<&Path>) -> Result<u8> {
    let cert = certify_file(input, mode, normalize)?;
    let text = cert.to_text();
    print!("{text}");
    if let Some(path) = certificate {
        write_text(path, &text)?;
    }
    Ok(if cert.verdict.is_pass() { 0 } else { 1 })
}

fn generate_file(name: &str, out: &Path, format: OutputFormat) -> Result<u8> {
    let id: GeneratorId = name.parse()?;
    let config = generate(&id)?;
    let text = match (format, &config.exact_gram) {
        (OutputFormat::Vectors, _) => format_vectors(config.dim, &config.vectors),
        (OutputFormat::Gram, Some(g)) => format_gram(g),
        (OutputFormat::Gram, None) => format_gram(&config.float_gram()),
    };
    write_text(out, &text)?;
    println!("{id}: {} vectors in dimension {}", config.count(), config.dim);
    Ok(0)
}
