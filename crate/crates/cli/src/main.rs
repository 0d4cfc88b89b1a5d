//! `pst`: simulate, certify and construct perfect state transfer on graphs.
//!
//! Exit codes: 0 affirmative result, 1 well-formed negative result, 2 bad input.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pst::certifier::{certify, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL};
use pst::evolution::{default_samples, fidelity_trace, max_fidelity, write_trace_csv};
use pst::format::to_canonical_json;
use pst::io::GraphFile;
use pst::paths::{p3_instance, path_scan, qt_product_check, ScanConfig};
use pst::products::{product_from_certified, product_pst, Factor};
use pst::synthesis::{synthesize, SynthesisConfig};
use pst::{build_hamiltonian, decompose, Graph, Potential, PstError, SpectralDecomposition};

#[derive(Parser)]
#[command(name = "pst", version, about = "Perfect state transfer on graphs with a vertex potential")]
struct Cli {
    /// Graph JSON file: {"n": .., "edges": [[i, j], ..], "potential": [..]}
    #[arg(short, long, global = true)]
    graph: Option<PathBuf>,

    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum transfer fidelity over [0, t-max]
    Simulate {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        /// Grid size; default spacing is π / (10 · eigenvalue spread)
        #[arg(long)]
        samples: Option<usize>,
        /// CSV file for the sampled fidelity trace
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Decide transfer exactly from the spectrum
    Certify {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEN)]
        max_den: u64,
        #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
        tol: f64,
    },
    /// The P3 instance with parameters k > l >= 0 of opposite parity
    P3 {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        l: i64,
    },
    /// Construct a potential transferring between two non-adjacent twins
    SynthTwin {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = SynthesisConfig::default().d_max)]
        d_max: i64,
        #[arg(long, default_value_t = SynthesisConfig::default().seeds)]
        seeds: usize,
        #[arg(long, default_value_t = SynthesisConfig::default().tol)]
        tol: f64,
    },
    /// Cartesian product of the --graph instance with a second one
    Product {
        /// Second factor's graph file
        #[arg(long)]
        with: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        from2: usize,
        #[arg(long)]
        to2: usize,
        /// Shared transfer time; certified times are used when omitted
        #[arg(long)]
        time: Option<f64>,
    },
    /// Random mirror-symmetric potentials on P_n, endpoint to endpoint
    PathScan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long = "box", default_value_t = 3.0)]
        sample_box: f64,
        /// Draw unconstrained potentials instead of mirrored ones
        #[arg(long)]
        asymmetric: bool,
    },
}

enum Failure {
    Input(String),
    Negative(String),
}

impl From<PstError> for Failure {
    fn from(e: PstError) -> Self {
        match e {
            PstError::InvalidInput(_)
            | PstError::Parity { .. }
            | PstError::Domain(_)
            | PstError::NotTwins { .. }
            | PstError::DimensionMismatch { .. }
            | PstError::Io(_)
            | PstError::Json(_) => Failure::Input(e.to_string()),
            _ => Failure::Negative(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load(path: Option<&Path>) -> Result<(Graph, Potential), Failure> {
    let path = path.ok_or_else(|| Failure::Input("--graph is required for this command".into()))?;
    let file = GraphFile::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(file.into_parts()?)
}

fn spectrum(g: &Graph, q: &Potential) -> Result<SpectralDecomposition, Failure> {
    Ok(decompose(&build_hamiltonian(g, q)?, 1e-10)?)
}

fn check_pair(g: &Graph, u: usize, v: usize) -> Result<(), Failure> {
    for x in [u, v] {
        if x >= g.n() {
            return Err(Failure::Input(format!("vertex {x} out of range for {} vertices", g.n())));
        }
    }
    Ok(())
}

/// JSON text plus whether the result is affirmative.
fn run(cli: &Cli) -> Result<(String, bool), Failure> {
    let graph = cli.graph.as_deref();
    match &cli.command {
        Command::Simulate {
            from,
            to,
            t_max,
            samples,
            trace_out,
        } => {
            let (g, q) = load(graph)?;
            check_pair(&g, *from, *to)?;
            let d = spectrum(&g, &q)?;
            let samples = samples.unwrap_or_else(|| default_samples(&d, *t_max));
            let rec = max_fidelity(&d, *from, *to, *t_max, samples)?;
            if let Some(path) = trace_out {
                let trace = fidelity_trace(&d, *from, *to, *t_max, samples);
                let mut w = BufWriter::new(File::create(path)?);
                write_trace_csv(&mut w, &trace)?;
                w.flush()?;
            }
            Ok((to_canonical_json(&rec)?, true))
        }
        Command::Certify {
            from,
            to,
            max_den,
            tol,
        } => {
            let (g, q) = load(graph)?;
            check_pair(&g, *from, *to)?;
            if from == to {
                return Err(Failure::Input("--from and --to must differ".into()));
            }
            let cert = certify(&spectrum(&g, &q)?, *from, *to, *max_den, *tol)?;
            Ok((to_canonical_json(&cert)?, cert.is_certified()))
        }
        Command::P3 { k, l } => {
            let inst = p3_instance(*k, *l)?;
            let report = json!({
                "k": inst.k,
                "l": inst.l,
                "q": inst.q,
                "t": inst.t,
                "qt": qt_product_check(&inst),
                "potential": inst.potential().values(),
            });
            Ok((to_canonical_json(&report)?, true))
        }
        Command::SynthTwin {
            from,
            to,
            d_max,
            seeds,
            tol,
        } => {
            let (g, _) = load(graph)?;
            check_pair(&g, *from, *to)?;
            let config = SynthesisConfig {
                d_max: *d_max,
                seeds: *seeds,
                tol: *tol,
                base_seed: cli.seed,
                ..SynthesisConfig::default()
            };
            match synthesize(&g, *from, *to, &config) {
                Ok(res) => Ok((to_canonical_json(&res)?, true)),
                Err(PstError::SynthesisFailure { attempts }) => {
                    let report = json!({ "status": "failed", "attempts": attempts });
                    Ok((to_canonical_json(&report)?, false))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Product {
            with,
            from,
            to,
            from2,
            to2,
            time,
        } => {
            let (g1, q1) = load(graph)?;
            let (g2, q2) = load(Some(with))?;
            check_pair(&g1, *from, *to)?;
            check_pair(&g2, *from2, *to2)?;
            let f1 = Factor {
                graph: &g1,
                potential: &q1,
                source: *from,
                target: *to,
            };
            let f2 = Factor {
                graph: &g2,
                potential: &q2,
                source: *from2,
                target: *to2,
            };
            let inst = match time {
                Some(t) => product_pst(&f1, &f2, *t)?,
                None => product_from_certified(&f1, &f2)?,
            };
            Ok((to_canonical_json(&inst)?, true))
        }
        Command::PathScan {
            n,
            trials,
            t_max,
            sample_box,
            asymmetric,
        } => {
            let config = ScanConfig {
                trials: *trials,
                t_max: *t_max,
                seed: cli.seed,
                sample_box: *sample_box,
                symmetric_only: !asymmetric,
                ..ScanConfig::default()
            };
            let report = path_scan(*n, &config)?;
            let affirmative = report.below_threshold && report.all_refused;
            Ok((to_canonical_json(&report)?, affirmative))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, affirmative)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if affirmative { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Negative(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
