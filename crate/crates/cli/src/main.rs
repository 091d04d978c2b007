use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use corridor_sim::output::{write_run, RunSummary};
use corridor_sim::sweep::{read_aggregate, run_sweep, write_sweep, SweepSpec};
use corridor_sim::{presets, report, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "corridor-sim",
    version,
    about = "mmWave and DSRC downlink simulation on a vehicle corridor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `presets`).
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> anyhow::Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => {
                ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(name)) => Ok(presets::preset(name)?),
            (None, None) => bail!("one of --config or --preset is required"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write packets/flows/summary/sinr CSVs.
    Run {
        #[command(flatten)]
        source: Source,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, env = "CORRIDOR_SIM_OUT")]
        out: Option<PathBuf>,
        /// Skip packets.csv.
        #[arg(long)]
        no_packets: bool,
    },
    /// Run a scenario over several values of one parameter and seeds.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// cv_count, max_speed, offered_rate, packet_size or radio.tech
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. `20,40` or `35mph,55mph`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Seeds per value (base seed, base seed + 1, ...).
        #[arg(long, default_value_t = 5)]
        seeds: u32,
        #[arg(long, env = "CORRIDOR_SIM_OUT")]
        out: Option<PathBuf>,
    },
    /// Print tables from a sweep's aggregate.csv.
    Report { aggregate: PathBuf },
    /// List built-in scenarios, or print one as TOML.
    Presets { name: Option<String> },
}

fn out_dir(out: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    out.or_else(|| cfg.output.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.scenario.name))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            source,
            seed,
            out,
            no_packets,
        } => {
            let mut cfg = source.load()?;
            if let Some(s) = seed {
                cfg.scenario.seed = s;
            }
            if no_packets {
                cfg.output.write_packets = false;
            }
            let dir = out_dir(out, &cfg);
            let result = corridor_sim::run(&cfg)?;
            write_run(&result, &dir)?;
            let s = RunSummary::from_run(&result);
            let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
            println!(
                "{}: loss {}%  delay {} ms  throughput {} Kbps  -> {}",
                s.run_id,
                show(s.loss_pct),
                show(s.mean_delay_ms),
                show(s.throughput_kbps),
                dir.display()
            );
        }
        Command::Sweep {
            source,
            axis,
            values,
            seeds,
            out,
        } => {
            if seeds == 0 {
                bail!("--seeds must be at least 1");
            }
            let cfg = source.load()?;
            let spec = SweepSpec {
                axis: axis.clone(),
                values,
                seeds,
            };
            let dir = out.unwrap_or_else(|| {
                PathBuf::from("out").join(format!("{}-sweep-{axis}", cfg.scenario.name))
            });
            let result = run_sweep(&cfg, &spec)?;
            let (_, agg) = write_sweep(&axis, &result, &dir)?;
            print!("{}", report::render(&result.aggregate));
            println!("wrote {}", agg.display());
        }
        Command::Report { aggregate } => {
            let rows = read_aggregate(&aggregate)?;
            print!("{}", report::render(&rows));
        }
        Command::Presets { name } => match name {
            Some(n) => print!("{}", presets::preset(&n)?.to_toml()),
            None => {
                for p in presets::PRESETS {
                    println!("{:<20} {}", p.name, p.summary);
                }
            }
        },
    }
    Ok(())
}
