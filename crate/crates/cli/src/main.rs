//! `detflow` command-line tool.
//!
//! Exit codes: 0 success, 1 violation or verification failure, 2 usage or
//! parse error. Errors go to stderr as one JSON object per line.

mod bench;
mod dot;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use detflow::builder::{random_network, GenParams};
use detflow::network::{cut_names, NetworkError};
use detflow::oracle::{brute_force_capacity_with_limit, max_li_paths, verify_paths, DEFAULT_ENUMERATION_LIMIT};
use detflow::solver::PathSet;
use detflow::{capacity, LayeredNetwork, ResultFile, SolverConfig};

#[derive(Parser)]
#[command(
    name = "detflow",
    version,
    about = "Unicast capacity of layered deterministic relay networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the capacity with the path-augmentation solver.
    Capacity {
        file: PathBuf,
        /// Include the linearly independent path set.
        #[arg(long)]
        paths: bool,
        /// Include work counters.
        #[arg(long)]
        counters: bool,
        /// Use the older backward trigger (may undercount).
        #[arg(long)]
        legacy_backward: bool,
        /// Allow one same-layer rewiring per input per iteration (may undercount).
        #[arg(long)]
        legacy_same_layer: bool,
    },
    /// Compute the capacity by enumerating every cut.
    Oracle {
        file: PathBuf,
        /// Maximum number of intermediate nodes to enumerate over.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
        /// Also run the exhaustive path search (8 nodes at most) and fail if
        /// the two disagree.
        #[arg(long)]
        path_search: bool,
    },
    /// Check a result file against a network.
    Verify { network: PathBuf, result: PathBuf },
    /// Generate a random network.
    Gen(GenArgs),
    /// Time the solver on random networks and write CSV.
    Bench {
        /// Layer counts to run, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 4, 5])]
        sizes: Vec<usize>,
        /// Networks per size.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 2)]
        field: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout if absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Render a network, and optionally a result's paths, as Graphviz DOT.
    ExportDot { network: PathBuf, result: Option<PathBuf> },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 4)]
    layers: usize,
    /// Maximum nodes per relay layer.
    #[arg(long, default_value_t = 3)]
    nodes: usize,
    /// Maximum signal levels per node.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 2)]
    field: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A failed command: exit code plus the JSON line for stderr.
struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl Failure {
    fn usage(kind: &str, message: impl ToString) -> Self {
        Failure {
            code: 2,
            body: json!({ "error": kind, "message": message.to_string() }),
        }
    }

    fn violation(kind: &str, message: impl ToString) -> Self {
        Failure {
            code: 1,
            body: json!({ "error": kind, "message": message.to_string() }),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        body: json!({ "error": "io", "path": path.display().to_string(), "message": e.to_string() }),
    })
}

fn load_network(path: &Path) -> Result<LayeredNetwork, Failure> {
    let text = read(path)?;
    LayeredNetwork::from_json(&text).map_err(|e| match e {
        detflow::Error::Network(NetworkError::Invalid(errors)) => Failure {
            code: 2,
            body: json!({
                "error": "invalid_network",
                "path": path.display().to_string(),
                "message": format!("{} structural error(s)", errors.len()),
                "details": errors.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            }),
        },
        other => Failure {
            code: 2,
            body: json!({ "error": "parse", "path": path.display().to_string(), "message": other.to_string() }),
        },
    })
}

fn load_result(path: &Path) -> Result<ResultFile, Failure> {
    let text = read(path)?;
    ResultFile::from_json(&text).map_err(|e| Failure {
        code: 2,
        body: json!({ "error": "parse", "path": path.display().to_string(), "message": e.to_string() }),
    })
}

fn result_paths(net: &LayeredNetwork, result: &ResultFile) -> Result<PathSet, Failure> {
    PathSet::from_refs(net, result.paths.as_deref().unwrap_or_default())
        .map_err(|e| Failure::violation("unknown_edge", e))
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Failure::violation("io", e))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Capacity {
            file,
            paths,
            counters,
            legacy_backward,
            legacy_same_layer,
        } => {
            let net = load_network(&file)?;
            let cfg = SolverConfig {
                legacy_backward,
                legacy_same_layer,
                audit: false,
            };
            let sol = capacity(&net, cfg).map_err(|e| Failure::violation("internal", e))?;
            let result = ResultFile {
                capacity: sol.capacity,
                paths: paths.then(|| sol.paths.to_refs(&net)),
                counters: counters.then(|| sol.counters.to_map()),
                argmin_cut: None,
            };
            emit(&result.to_json())
        }
        Command::Oracle {
            file,
            limit,
            path_search,
        } => {
            let net = load_network(&file)?;
            let r = brute_force_capacity_with_limit(&net, limit).map_err(|e| Failure::usage("too_large", e))?;
            if path_search {
                let paths = max_li_paths(&net).map_err(|e| Failure::usage("too_large", e))?;
                if paths != r.capacity {
                    return Err(Failure {
                        code: 1,
                        body: json!({
                            "error": "oracle_disagreement",
                            "message": format!("cut enumeration gives {}, path search gives {paths}", r.capacity),
                        }),
                    });
                }
            }
            let result = ResultFile {
                capacity: r.capacity,
                paths: None,
                counters: Some([("cuts_examined".to_string(), r.cuts_examined)].into()),
                argmin_cut: Some(cut_names(&net, &r.argmin_cut)),
            };
            emit(&result.to_json())
        }
        Command::Verify { network, result } => {
            let net = load_network(&network)?;
            let result = load_result(&result)?;
            let paths = result_paths(&net, &result)?;
            verify_paths(&net, &paths).map_err(|v| Failure::violation("violation", v))?;
            if result.capacity != paths.len() {
                return Err(Failure::violation(
                    "violation",
                    format!(
                        "capacity mismatch: claimed {}, {} paths given",
                        result.capacity,
                        paths.len()
                    ),
                ));
            }
            emit(&json!({ "ok": true, "paths": paths.len() }).to_string())
        }
        Command::Gen(g) => {
            let params = GenParams {
                layers: g.layers,
                max_nodes_per_layer: g.nodes,
                max_levels_per_node: g.levels,
                edge_density: g.density,
                field: g.field,
                seed: g.seed,
            };
            let net = random_network(&params).map_err(|e| Failure::usage("bad_params", e))?;
            emit(&net.to_json())
        }
        Command::Bench {
            sizes,
            trials,
            nodes,
            levels,
            density,
            field,
            seed,
            csv,
        } => {
            let plan = bench::Plan {
                sizes,
                trials,
                nodes,
                levels,
                density,
                field,
                seed,
            };
            let rows = bench::run(&plan).map_err(|e| Failure::usage("bad_params", e))?;
            let text = bench::to_csv(&rows);
            match csv {
                Some(path) => fs::write(&path, text).map_err(|e| Failure {
                    code: 2,
                    body: json!({ "error": "io", "path": path.display().to_string(), "message": e.to_string() }),
                }),
                None => {
                    let mut out = std::io::stdout().lock();
                    out.write_all(text.as_bytes()).map_err(|e| Failure::violation("io", e))
                }
            }
        }
        Command::ExportDot { network, result } => {
            let net = load_network(&network)?;
            let paths = match result {
                Some(path) => Some(result_paths(&net, &load_result(&path)?)?),
                None => None,
            };
            let mut out = std::io::stdout().lock();
            out.write_all(dot::render(&net, paths.as_ref()).as_bytes())
                .map_err(|e| Failure::violation("io", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim_end() }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
