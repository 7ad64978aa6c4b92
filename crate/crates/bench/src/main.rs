use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use msmrta::{load_map, run_mission, Rational64, Scenario};
use msmrta_bench::sweep::{load_csv, run_sweep, save_csv, SweepConfig};
use msmrta_bench::{gen_map, gen_scenario, render_plot, ObstacleStyle};

#[derive(Parser)]
#[command(name = "msmrta", version, about = "Multi-stage multi-robot task assignment for search and rescue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mission and write the JSON report.
    Run {
        scenario: PathBuf,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Use exact rational arithmetic for the weighted stages.
        #[arg(long)]
        exact: bool,
    },
    /// Run a planning-time sweep and write CSV rows.
    Bench {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        parallel: Option<usize>,
        /// Also render the SVG chart to this path.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Generate a map file.
    Genmap {
        #[arg(long, default_value_t = 20)]
        width: usize,
        #[arg(long, default_value_t = 20)]
        height: usize,
        #[arg(long, default_value = "rooms")]
        style: ObstacleStyle,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a scenario file for an existing map.
    Genscenario {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        robots: usize,
        #[arg(long)]
        victims: usize,
        #[arg(long, default_value_t = msmrta_bench::scengen::DEFAULT_KINDS)]
        kinds: usize,
        #[arg(long, default_value_t = msmrta::pipeline::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render sweep CSV as an SVG chart.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(scenario: &Path, out: Option<&Path>, seed: Option<u64>, psi: Option<f64>, beta: Option<f64>, exact: bool) -> Result<()> {
    let mut s = Scenario::load(scenario)?;
    s.seed = seed.unwrap_or(s.seed);
    s.psi = psi.unwrap_or(s.psi);
    s.beta = beta.unwrap_or(s.beta);
    s.validate()?;
    let (json, summary) = if exact {
        let r = run_mission::<Rational64>(&s)?;
        (r.to_json(), (r.scouting.found.len(), r.partial, r.planning.total_travel_cost, r.timing.planning_time_us))
    } else {
        let r = run_mission::<f64>(&s)?;
        (r.to_json(), (r.scouting.found.len(), r.partial, r.planning.total_travel_cost, r.timing.planning_time_us))
    };
    match out {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    let (found, partial, travel, us) = summary;
    eprintln!(
        "found {found}/{} victims{}, travel cost {travel}, planning {us} us",
        s.victims.len(),
        if partial { " (partial scouting)" } else { "" }
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            seed,
            psi,
            beta,
            exact,
        } => run(&scenario, out.as_deref(), seed, psi, beta, exact),
        Command::Bench {
            config,
            out,
            seed,
            reps,
            psi,
            beta,
            parallel,
            plot,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.repetitions = reps.unwrap_or(cfg.repetitions);
            cfg.psi = psi.or(cfg.psi);
            cfg.beta = beta.or(cfg.beta);
            cfg.parallel = parallel.unwrap_or(cfg.parallel);
            let base = config.parent().unwrap_or(Path::new("."));
            let Some(out) = out.or_else(|| cfg.output.as_ref().map(|p| base.join(p))) else {
                bail!("no output path: pass --out or set `output` in the sweep config");
            };
            let rows = run_sweep(&cfg, base)?;
            save_csv(&rows, &out)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!("{} rows written to {} ({failed} flagged)", rows.len(), out.display());
            if let Some(plot) = plot {
                render_plot(&rows, &plot)?;
            }
            Ok(())
        }
        Command::Genmap {
            width,
            height,
            style,
            seed,
            out,
        } => {
            let map = gen_map(width, height, style, seed)?;
            write_text(&out, &map.to_text())
        }
        Command::Genscenario {
            map,
            robots,
            victims,
            kinds,
            seed,
            psi,
            beta,
            out,
        } => {
            let text = std::fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let grid = load_map(&text)?;
            let mut s = gen_scenario(&grid, robots, victims, kinds, seed)?;
            s.psi = psi.unwrap_or(s.psi);
            s.beta = beta.unwrap_or(s.beta);
            s.validate()?;
            let map_path = std::fs::canonicalize(&map)?;
            let file = s.to_file(Some(map_path.to_string_lossy().into_owned()));
            write_text(&out, &serde_json::to_string_pretty(&file)?)
        }
        Command::Plot { csv, out } => {
            let rows = load_csv(&csv)?;
            render_plot(&rows, &out)?;
            Ok(())
        }
    }
}
