use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spinguide::acceptance;
use spinguide::guidance::GuidanceMode;
use spinguide::scenarios::{builtin_presets, preset, run_scenario, ScenarioConfig, UnitSystem};
use spinguide_cli::{parse_config, svg, write_bundle};

#[derive(Parser)]
#[command(
    name = "spinguide",
    version,
    about = "Spin-guided trajectories of Gaussian packets in the plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Spin {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in preset or a config file and write an output bundle.
    Run {
        /// Preset name (see `list-presets`).
        preset: Option<String>,
        #[arg(long, value_name = "PATH", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Output directory [default: out/<scenario>].
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run a single guidance mode instead of the scenario's list.
        #[arg(long, value_enum)]
        spin: Option<Spin>,
        /// Also write paths.svg and speed.svg.
        #[arg(long)]
        svg: bool,
        /// Report in SI units for an electron.
        #[arg(long)]
        si: bool,
    },
    /// List the built-in presets.
    ListPresets,
    /// Run the acceptance checks.
    Verify {
        /// Run only these criteria.
        #[arg(long = "only", value_name = "ID")]
        only: Vec<u32>,
    },
    /// Re-render the plots of an existing output directory.
    Plot { dir: PathBuf },
}

fn load(preset_name: Option<String>, config: Option<PathBuf>) -> Result<ScenarioConfig> {
    match (preset_name, config) {
        (Some(name), None) => match preset(&name) {
            Some(cfg) => Ok(cfg),
            None => Err(anyhow!("unknown preset `{name}`; try `spinguide list-presets`")),
        },
        (None, Some(path)) => Ok(parse_config(&path)?),
        _ => Err(anyhow!("give either a preset name or --config PATH")),
    }
}

fn run(
    preset_name: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    spin: Option<Spin>,
    svg: bool,
    si: bool,
) -> Result<bool> {
    let mut cfg = load(preset_name, config)?;
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    match spin {
        Some(Spin::On) => cfg = cfg.with_mode(GuidanceMode::SPIN_ON),
        Some(Spin::Off) => cfg = cfg.with_mode(GuidanceMode::SPIN_OFF),
        None => {}
    }
    if si && cfg.units == UnitSystem::Dimensionless {
        cfg = cfg.into_si();
    }
    cfg.validate()?;
    let out = out.unwrap_or_else(|| Path::new("out").join(&cfg.name));
    let result = run_scenario(&cfg).with_context(|| format!("scenario {} failed", cfg.name))?;
    let bundle = write_bundle(&result, &out, svg)?;
    for gate in &result.gates {
        println!(
            "{} {} [{}]: {}",
            if gate.passed { "PASS" } else { "FAIL" },
            gate.gate,
            gate.run,
            gate.detail
        );
    }
    println!(
        "{}: {} trajectories, {} node aborts, written to {}",
        cfg.name,
        result.trajectories().count(),
        result.node_aborts(),
        bundle.dir.display()
    );
    Ok(result.passed())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            preset,
            config,
            out,
            seed,
            spin,
            svg,
            si,
        } => run(preset, config, out, seed, spin, svg, si),
        Command::ListPresets => {
            for p in builtin_presets() {
                println!("{:<6} {}", p.name, p.description);
            }
            Ok(true)
        }
        Command::Verify { only } => {
            let outcomes = if only.is_empty() {
                acceptance::run_all()
            } else {
                let mut v = Vec::new();
                for id in only {
                    match acceptance::run_criterion(id) {
                        Some(o) => v.push(o),
                        None => bail!("no criterion {id}"),
                    }
                }
                v
            };
            for o in &outcomes {
                println!("{}", o.line());
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed} of {} criteria passed", outcomes.len());
            Ok(passed == outcomes.len())
        }
        Command::Plot { dir } => {
            for p in svg::plot_dir(&dir)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
