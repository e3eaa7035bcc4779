use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sliding_opt::harness::{self, GraphReport, Method, Metric, RunConfig};
use sliding_opt::network::{Graph, Topology};
use sliding_opt::Error;

#[derive(Parser)]
#[command(name = "sliding-opt", version, about = "Zeroth-order sliding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its trace as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config entry, e.g. `--set seed=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Add the theoretical bound column (zosa and mzosa).
        #[arg(long)]
        with_bound: bool,
        /// Output path; defaults to the config's out_path, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare methods over several seeds.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "zosa,gd,zogd")]
        methods: Vec<String>,
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long, default_value = "gap_at_budget")]
        metric: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a graph's Laplacian spectrum and condition number.
    InspectGraph {
        #[arg(long, default_value = "star")]
        topology: String,
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// Edge list for `--topology custom`.
        #[arg(long)]
        graph_file: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            overrides,
            with_bound,
            out,
        } => {
            let cfg = RunConfig::load(&config, &overrides)?;
            let report = harness::run_with(&cfg, None, with_bound)?;
            let out = out.or_else(|| cfg.out_path.clone().map(PathBuf::from));
            emit(&report.trace.to_csv(), out)
        }
        Command::Bench {
            config,
            methods,
            seeds,
            metric,
            overrides,
            out,
        } => {
            let base = RunConfig::load(&config, &overrides)?;
            let metric: Metric = metric.parse()?;
            let seeds = harness::parse_seeds(&seeds)?;
            let configs = methods
                .iter()
                .map(|m| {
                    let method: Method = m.trim().parse()?;
                    let mut c = base.clone();
                    c.method = method;
                    c.validate()?;
                    Ok(c)
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let table = harness::compare(&configs, metric, &seeds)?;
            emit(&table.to_csv(), out)
        }
        Command::InspectGraph { topology, m, graph_file } => {
            let topology: Topology = topology.parse()?;
            let graph = match (topology, graph_file) {
                (Topology::Custom, Some(path)) => Graph::from_edge_list(&std::fs::read_to_string(path)?, None)?,
                (Topology::Custom, None) => {
                    return Err(Error::Config {
                        field: "--graph-file".into(),
                        message: "required for --topology custom".into(),
                    })
                }
                (t, _) => Graph::build(t, m)?,
            };
            emit(&GraphReport::new(graph)?.to_text(), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
