//! `gridfire`: synthesize fixtures, run scenario batches, assess line risk
//! and print summaries.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use gridfire_core::fire::{BurnRaster, IgnitionSpec};
use gridfire_core::fixtures::{ieee30_network, reference_acre_rows, reference_mile_rows, FIXTURE_SEASON_LABELS};
use gridfire_core::landscape::{load_landscape, synth_landscape, SynthSpec};
use gridfire_core::report::{
    read_results, read_risk, read_season_table, seasonal_extremes, summer_winter_ratio, write_results,
    write_season_table, RunMetadata, StudyReport, ACRES_TABLE_FILE, MILES_TABLE_FILE, RISK_FILE,
};
use gridfire_core::scenario::{build_matrix, run_batch, StudyInputs};
use gridfire_core::weather::{load_weather, synth_weather};
use gridfire_core::{assess_results, assess_tables, load_network, FuelCatalog};

use config::Loaded;

#[derive(Parser, Debug)]
#[command(name = "gridfire", version, about = "Wildfire risk assessment for transmission lines")]
struct Cli {
    /// TOML study configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for scenario batches.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output (and default input) directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the IEEE 30-bus fixture, a synthetic landscape and weather year, and reference tables.
    Synth,
    /// Run every (line, season, ignition) scenario and write results.csv.
    Simulate {
        /// Also write each scenario's arrival-time grid under <out>/burns.
        #[arg(long)]
        dump_burns: bool,
    },
    /// Turn scenario results (or season tables) into line losses and risk rankings.
    Assess {
        /// Scenario results file; defaults to the configured results path.
        #[arg(long, conflicts_with = "from_tables")]
        results: Option<PathBuf>,
        /// Assess per-season acre and mile tables directly.
        #[arg(long, num_args = 2, value_names = ["ACRES_CSV", "MILES_CSV"])]
        from_tables: Option<Vec<PathBuf>>,
    },
    /// Print the ranking, seasonal extremes and summer/winter ratio of an assessment.
    Report {
        /// Directory written by `assess`; defaults to --out.
        dir: Option<PathBuf>,
        /// Number of lines to list.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for broken engine invariants, 2 for everything the caller can fix.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<gridfire_core::Error>() {
        Some(inner) if !inner.is_input_error() => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let mut loaded = Loaded::read(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        loaded.config.study.seed = seed;
    }
    if cli.workers == 0 {
        bail!("--workers must be at least 1");
    }
    match &cli.command {
        Command::Synth => synth(&loaded, &cli.out),
        Command::Simulate { dump_burns } => simulate(&loaded, &cli.out, cli.workers, *dump_burns),
        Command::Assess { results, from_tables } => assess(&loaded, &cli.out, results.as_deref(), from_tables.as_deref()),
        Command::Report { dir, top } => report(dir.as_deref().unwrap_or(&cli.out), *top),
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn synth(loaded: &Loaded, out: &Path) -> anyhow::Result<()> {
    let cfg = &loaded.config;
    let seed = cfg.study.seed;
    create_dir(out)?;
    let catalog = FuelCatalog::default();
    let mut spec = SynthSpec::foothills(cfg.synth.ncols, cfg.synth.nrows, cfg.synth.cell_size, seed);
    spec.origin = cfg.synth.origin();
    let land = synth_landscape(&spec, &catalog)?;
    let landscape_dir = loaded.resolve(&cfg.paths.landscape, out, "landscape");
    create_dir(&landscape_dir)?;
    land.write(&landscape_dir)?;
    catalog.write(&loaded.resolve(&cfg.paths.fuels, out, "fuels.csv"))?;
    ieee30_network(land.geometry())?.write(&loaded.resolve(&cfg.paths.network, out, "network.json"))?;
    synth_weather(cfg.study.year, seed)?.write(&loaded.resolve(&cfg.paths.weather, out, "weather.csv"))?;
    let labels: Vec<String> = FIXTURE_SEASON_LABELS.iter().map(|s| s.to_string()).collect();
    write_season_table(&out.join("table1.csv"), &labels, &reference_acre_rows())?;
    write_season_table(&out.join("table2.csv"), &labels, &reference_mile_rows())?;
    println!("wrote fixture study to {}", out.display());
    Ok(())
}

fn load_catalog(loaded: &Loaded, out: &Path) -> anyhow::Result<FuelCatalog> {
    let path = loaded.resolve(&loaded.config.paths.fuels, out, "fuels.csv");
    if loaded.config.paths.fuels.is_none() && !path.exists() {
        return Ok(FuelCatalog::default());
    }
    Ok(FuelCatalog::load(&path)?)
}

fn simulate(loaded: &Loaded, out: &Path, workers: usize, dump_burns: bool) -> anyhow::Result<()> {
    let cfg = &loaded.config;
    let started = Instant::now();
    let study = cfg.study_config()?;
    let catalog = load_catalog(loaded, out)?;
    let land = load_landscape(&loaded.resolve(&cfg.paths.landscape, out, "landscape"), &catalog)?;
    let network = load_network(&loaded.resolve(&cfg.paths.network, out, "network.json"))?;
    let weather = load_weather(&loaded.resolve(&cfg.paths.weather, out, "weather.csv"))?;

    let mut specs = build_matrix(&network, land.geometry(), &study)?;
    if let Some(lines) = &cfg.study.lines {
        for id in lines {
            if !network.ignitable_lines().iter().any(|b| b.id == *id) {
                bail!("configured line {id} is not an ignitable line of the network");
            }
        }
        specs.retain(|s| lines.contains(&s.line_id));
    }

    let burns_dir = out.join("burns");
    if dump_burns {
        create_dir(&burns_dir)?;
    }
    let header = land.header();
    let dump_errors = Mutex::new(Vec::new());
    let dump = |n: usize, spec: &IgnitionSpec, burn: &BurnRaster| {
        let name = format!(
            "scenario_{n:04}_line{}_season{}_ign{}.asc",
            spec.line_id,
            spec.season_index + 1,
            spec.ignition_index
        );
        if let Err(e) = burn.write_arrival(&header, &burns_dir.join(name)) {
            dump_errors.lock().unwrap().push(e.to_string());
        }
    };
    let hook: Option<gridfire_core::scenario::BurnHook<'_>> = if dump_burns { Some(&dump) } else { None };

    let inputs = StudyInputs {
        landscape: &land,
        catalog: &catalog,
        weather: &weather,
        network: &network,
    };
    let batch = run_batch(&specs, &inputs, &study, workers, hook)?;
    if let Some(e) = dump_errors.into_inner().unwrap().first() {
        bail!("writing burn grids: {e}");
    }

    create_dir(out)?;
    let results_path = loaded.resolve(&cfg.paths.results, out, "results.csv");
    write_results(&results_path, &cfg.season_labels()?, &batch.results)?;
    let meta = RunMetadata {
        command: "simulate".into(),
        config_hash: cfg.hash(),
        seed: cfg.study.seed,
        workers,
        scenarios: batch.results.len(),
        elapsed_secs: started.elapsed().as_secs_f64(),
        warnings: batch.warnings.clone(),
    };
    meta.write(&out.join("simulate_meta.json"))?;
    println!(
        "{} scenarios, {} warnings, {:.1} s -> {}",
        batch.results.len(),
        batch.warnings.len(),
        meta.elapsed_secs,
        results_path.display()
    );
    Ok(())
}

fn assess(loaded: &Loaded, out: &Path, results: Option<&Path>, tables: Option<&[PathBuf]>) -> anyhow::Result<()> {
    let cfg = &loaded.config;
    let started = Instant::now();
    let (labels, risks, scenarios) = match tables {
        Some([acres, miles]) => {
            let (labels, acre_rows) = read_season_table(acres)?;
            let (mile_labels, mile_rows) = read_season_table(miles)?;
            if labels != mile_labels {
                bail!("acre and mile tables have different season columns");
            }
            (labels, assess_tables(&acre_rows, &mile_rows, &cfg.costs)?, 0)
        }
        Some(_) => bail!("--from-tables takes exactly two files"),
        None => {
            let labels = cfg.season_labels()?;
            let path = match results {
                Some(p) => p.to_path_buf(),
                None => loaded.resolve(&cfg.paths.results, out, "results.csv"),
            };
            let rows = read_results(&path, &labels)?;
            let network = load_network(&loaded.resolve(&cfg.paths.network, out, "network.json"))?;
            let risks = assess_results(&rows, &network, labels.len(), &cfg.costs)?;
            (labels, risks, rows.len())
        }
    };
    let meta = RunMetadata {
        command: "assess".into(),
        config_hash: cfg.hash(),
        seed: cfg.study.seed,
        workers: 1,
        scenarios,
        elapsed_secs: started.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    };
    let report = StudyReport::from_risks(labels, risks, meta)?;
    report.write(out)?;
    let top = &report.risks[0];
    println!(
        "assessed {} lines; highest risk: line {} (M = {:.3}) -> {}",
        report.risks.len(),
        top.line_id,
        top.metric,
        out.display()
    );
    Ok(())
}

fn report(dir: &Path, top: usize) -> anyhow::Result<()> {
    let (labels, acres) = read_season_table(&dir.join(ACRES_TABLE_FILE))?;
    let (_, miles) = read_season_table(&dir.join(MILES_TABLE_FILE))?;
    let risks = read_risk(&dir.join(RISK_FILE))?;

    println!("Top {} lines by risk metric", top.min(risks.len()));
    println!("{:>4}  {:>4}  {:>8}  {:>16}", "rank", "line", "metric", "WFL ($)");
    for r in risks.iter().take(top) {
        println!("{:>4}  {:>4}  {:>8.4}  {:>16.0}", r.rank, r.line_id, r.metric, r.wfl);
    }

    for (title, rows) in [("Burned area (acres)", &acres), ("Affected line length (miles)", &miles)] {
        println!();
        println!("{title} by season");
        println!("{:<8}  {:>10}  {:>18}  {:>18}", "season", "mean", "max (line)", "min (line)");
        for e in seasonal_extremes(&labels, rows)? {
            println!(
                "{:<8}  {:>10.2}  {:>10.2} ({:>4})  {:>10.2} ({:>4})",
                e.label, e.mean, e.max.1, e.max.0, e.min.1, e.min.0
            );
        }
    }
    println!();
    match summer_winter_ratio(&labels, &acres) {
        Ok(r) => println!("Summer/winter mean burned-area ratio: {r:.2}"),
        Err(e) => println!("Summer/winter mean burned-area ratio: n/a ({e})"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let input = anyhow::Error::new(gridfire_core::Error::Topology("x".into()));
        let broken = anyhow::Error::new(gridfire_core::Error::Invariant("x".into())).context("running batch");
        assert_eq!(exit_code(&input), 2);
        assert_eq!(exit_code(&broken), 3);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), 2);
    }
}
