mod config;
mod report;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use vne_core::dataio::{
    export_requests, export_summary, export_trace, read_summary, read_topology, read_virtual,
    read_workload, write_topology, write_workload, ParseError, WorkloadFile,
};
use vne_core::mepde::validate;
use vne_core::netmodel::VNRequest;
use vne_core::simulator::{long_term_metrics, run, SimConfig, SimError};
use vne_core::workload::{
    generate_workload, waxman_substrate, WaxmanParams, WorkloadParams, SUBSTRATE_CPU_CHOICES,
};

use config::{RunConfig, SolverFlags};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {message}")]
    Output { path: String, message: String },
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
}

#[derive(Parser, Debug)]
#[command(name = "vne", version, about = "Virtual network embedding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Random seed. Falls back to a config file, then VNE_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

/// Default seed taken from the environment.
fn env_seed() -> Result<u64, CliError> {
    match std::env::var("VNE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("VNE_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(0),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Waxman substrate topology.
    GenSubstrate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        links: usize,
        /// Link bandwidth range, inclusive.
        #[arg(long, default_value = "50:100", value_parser = parse_range)]
        bw: (u64, u64),
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.2)]
        beta: f64,
        #[command(flatten)]
        seed: SeedArg,
        /// Output file; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate a stream of virtual network requests.
    GenWorkload {
        #[arg(long, default_value_t = 1000)]
        requests: usize,
        /// Virtual network size range, inclusive.
        #[arg(long, default_value = "2:20", value_parser = parse_range)]
        size: (u64, u64),
        #[arg(long, default_value_t = 0.5)]
        connectivity: f64,
        #[arg(long, default_value = "1:50", value_parser = parse_range)]
        bw: (u64, u64),
        /// Mean arrivals per time unit.
        #[arg(long, default_value_t = 0.1)]
        rate: f64,
        #[arg(long, default_value = "300:700", value_parser = parse_range)]
        lifetime: (u64, u64),
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Embed a single virtual network.
    Solve {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        vn: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Replay a workload against a substrate.
    Simulate {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        workload: PathBuf,
        /// Directory for trace.csv, requests.csv and summary.toml.
        #[arg(long)]
        out_dir: PathBuf,
        /// End of the averaging window; defaults to the last event.
        #[arg(long)]
        until: Option<f64>,
        /// Record wall-clock solve times. Makes the outputs
        /// non-reproducible.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Compare simulation summaries side by side.
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("{lo} exceeds {hi}"));
    }
    Ok((lo, hi))
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    f(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes to `out`, or to standard output when no path is given.
fn emit(
    out: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

/// Prints without panicking when the reader has gone away.
fn print_quietly(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

/// Seed echo goes to stderr when the artifact itself is on stdout.
fn echo_seed(seed: u64, artifact_on_stdout: bool) {
    if artifact_on_stdout {
        eprintln!("seed = {seed}");
    } else {
        println!("seed = {seed}");
    }
}

/// Exit code of a successful command: 0, or 1 for a rejected request.
fn execute(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::GenSubstrate {
            nodes,
            links,
            bw,
            alpha,
            beta,
            seed,
            out,
        } => {
            let seed = match seed.seed {
                Some(s) => s,
                None => env_seed()?,
            };
            let params = WaxmanParams {
                alpha,
                beta,
                ..WaxmanParams::new(nodes, links)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sn = waxman_substrate(&params, &SUBSTRATE_CPU_CHOICES, bw.0..=bw.1, &mut rng)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            emit(out.as_deref(), |mut w| write_topology(&mut w, &sn))?;
            echo_seed(seed, out.is_none());
            Ok(0)
        }
        Command::GenWorkload {
            requests,
            size,
            connectivity,
            bw,
            rate,
            lifetime,
            seed,
            out,
        } => {
            let seed = match seed.seed {
                Some(s) => s,
                None => env_seed()?,
            };
            let params = WorkloadParams {
                request_count: requests,
                vn_size_min: size.0 as usize,
                vn_size_max: size.1 as usize,
                connectivity,
                bw_min: bw.0,
                bw_max: bw.1,
                arrival_rate: rate,
                lifetime_min: lifetime.0 as f64,
                lifetime_max: lifetime.1 as f64,
                seed,
                ..WorkloadParams::default()
            };
            let requests =
                generate_workload(&params).map_err(|e| CliError::Usage(e.to_string()))?;
            let wl = WorkloadFile { seed, requests };
            emit(out.as_deref(), |mut w| write_workload(&mut w, &wl))?;
            echo_seed(seed, out.is_none());
            Ok(0)
        }
        Command::Solve {
            topology,
            vn,
            solver,
            seed,
        } => {
            let cfg = RunConfig::resolve(&solver, seed.seed, env_seed()?)?;
            let sn = parse(&topology, read_topology)?;
            let vn = parse(&vn, read_virtual)?;
            let req = VNRequest::new(vn, 0.0, 1.0).map_err(|e| CliError::Usage(e.to_string()))?;
            let solver = cfg.solver();
            let started = Instant::now();
            let out = solver.solve(&sn, &req, cfg.seed);
            let took = started.elapsed();
            let mut text = String::new();
            let _ = writeln!(text, "solver = {}", solver.name());
            let _ = writeln!(text, "seed = {}", cfg.seed);
            let accepted = match out.mapping.as_ref().filter(|_| out.success) {
                Some(ch) if validate(ch, &sn, &req.vn).is_empty() => {
                    let _ = writeln!(text, "accepted = true");
                    for (v, h) in ch.mapping.hosts.iter().enumerate() {
                        let _ = writeln!(text, "host {v} -> {h}");
                    }
                    for (l, r) in ch.mapping.routes.iter().enumerate() {
                        let path = r
                            .as_ref()
                            .map(|p| p.nodes.iter().map(ToString::to_string).collect::<Vec<_>>());
                        let _ = writeln!(
                            text,
                            "route {l} -> [{}]",
                            path.unwrap_or_default().join(" ")
                        );
                    }
                    let obj = ch.objectives.expect("accepted mappings are evaluated");
                    let _ = writeln!(text, "cost = {}", obj.cost);
                    let _ = writeln!(text, "fragmentation = {:.6}", obj.fragmentation);
                    true
                }
                Some(ch) => {
                    let _ = writeln!(text, "accepted = false");
                    let _ = writeln!(
                        text,
                        "reason = invalid mapping ({} violations)",
                        validate(ch, &sn, &req.vn).len()
                    );
                    false
                }
                None => {
                    let _ = writeln!(text, "accepted = false");
                    let reason = out.rejection.map_or("unknown", |r| r.as_str());
                    let _ = writeln!(text, "reason = {reason}");
                    false
                }
            };
            let _ = writeln!(text, "time_ms = {:.3}", took.as_secs_f64() * 1e3);
            print_quietly(&text);
            Ok(if accepted { 0 } else { 1 })
        }
        Command::Simulate {
            topology,
            workload,
            out_dir,
            until,
            timing,
            solver,
            seed,
        } => {
            let cfg = RunConfig::resolve(&solver, seed.seed, env_seed()?)?;
            if let Some(t) = until {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "--until must be positive, got {t}"
                    )));
                }
            }
            let mut sn = parse(&topology, read_topology)?;
            let wl = parse(&workload, read_workload)?;
            let solver = cfg.solver();
            let sim = SimConfig {
                seed: cfg.seed,
                fragmentation: cfg.params.fragmentation,
            };
            let trace = run(&mut sn, &wl.requests, solver.as_ref(), &sim)?;
            let summary = long_term_metrics(&trace, until);

            fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let trace_path = out_dir.join("trace.csv");
            export_trace(create(&trace_path)?, &trace).map_err(csv_err(&trace_path))?;
            let requests_path = out_dir.join("requests.csv");
            export_requests(create(&requests_path)?, &trace, timing)
                .map_err(csv_err(&requests_path))?;
            let summary_path = out_dir.join("summary.toml");
            emit(Some(&summary_path), |mut w| {
                export_summary(&mut w, &summary, timing)
            })?;

            println!("solver = {}", summary.solver);
            println!("seed = {}", summary.seed);
            println!("accepted = {}/{}", summary.accepted, summary.requests);
            println!("summary = {}", summary_path.display());
            Ok(0)
        }
        Command::Report { summaries } => {
            let mut rows = Vec::new();
            for p in &summaries {
                let s = read_summary(&read(p)?).map_err(|e| CliError::Config {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                rows.push((p.display().to_string(), s));
            }
            print!("{}", report::render(&rows));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
