use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use brickworld::batch::{run_batch, summarize};
use brickworld::config::apply_config;
use brickworld::export::{
    batch_csv, queue_dump, read_summary_csv, summary_csv, weights_csv, write_file, write_report,
};
use brickworld::{build_trial, load_config, preset, run_trial, TrialConfig, TrialReport};
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Parser)]
#[command(name = "brickworld", version, about = "Tribes of learning animats stacking bricks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print its summary.
    Run {
        #[command(flatten)]
        setup: Setup,
        /// Directory for timeseries, summary, obituary and histogram CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run many trials, optionally over a grid of settings.
    Batch {
        #[command(flatten)]
        setup: Setup,
        /// Trials per grid point; seeds count up from --seed.
        #[arg(long, default_value_t = 10)]
        count: u32,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Grid axis as `key=v1,v2,...`; repeat for a cartesian product.
        #[arg(long = "sweep", value_name = "KEY=VALUES")]
        sweeps: Vec<String>,
        /// Directory for summary.csv and batch.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate summary CSVs from earlier runs.
    Analyze {
        /// summary.csv files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Write the aggregate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a trial up to a time and dump decision queues and weights.
    Dump {
        #[command(flatten)]
        setup: Setup,
        /// Stop at this simulated second (default: trial end).
        #[arg(long)]
        at: Option<f64>,
        /// Only this animat id (default: every living animat).
        #[arg(long)]
        animat: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Setup {
    /// Plain-text key=value config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset such as probreas, socstruct, rolediff, us, sf or si.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u32>,
    /// Extra `key=value` overrides applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Setup {
    fn config(&self) -> Result<TrialConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                load_config(&text).with_context(|| format!("in {}", path.display()))?
            }
            (None, Some(name)) => preset(name)?,
            (None, None) => load_config("")?,
        };
        if !self.overrides.is_empty() {
            c = apply_config(c, &self.overrides.join("\n")).context("in --set")?;
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_report(r: &TrialReport) {
    println!("seed {} ran {:.0} s", r.seed, r.duration);
    for t in &r.tribes {
        println!(
            "  tribe {} [{} x={} {:?}{}] mean score {:.1} normalized {:.1} ADF {:.1} SDF {:.1} towers {}",
            t.tribe,
            t.authority,
            t.obedience,
            t.selection,
            if t.memory { " memory" } else { "" },
            t.mean_score,
            t.normalized_score,
            t.mean_adf,
            t.mean_sdf,
            t.towers_completed
        );
    }
    match (r.winner, r.solo_time) {
        (_, Some(s)) => println!("  reached the target at {s:.0} s"),
        (Some(w), _) => println!("  winner: tribe {w}"),
        (None, _) if r.tribes.len() > 1 => println!("  tie"),
        _ => {}
    }
}

/// Expands `key=a,b` axes into one override text per grid point.
fn grid(sweeps: &[String]) -> Result<Vec<String>> {
    let mut points = vec![String::new()];
    for s in sweeps {
        let Some((key, values)) = s.split_once('=') else {
            bail!("sweep `{s}` is not key=v1,v2,...");
        };
        let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            bail!("sweep `{s}` has no values");
        }
        points = points
            .iter()
            .flat_map(|p| values.iter().map(move |v| format!("{p}{}={v}\n", key.trim())))
            .collect();
    }
    Ok(points)
}

fn batch(setup: &Setup, count: u32, threads: Option<usize>, sweeps: &[String], out: Option<&Path>) -> Result<()> {
    let base = setup.config()?;
    let mut configs = Vec::new();
    for point in grid(sweeps)? {
        let c = apply_config(base.clone(), &point)?;
        c.validate()?;
        for k in 0..count {
            let mut c = c.clone();
            c.seed = base.seed.wrapping_add(k);
            configs.push(c);
        }
    }
    info!("running {} trials", configs.len());
    let (entries, summary) = run_batch(&configs, threads);
    for e in &entries {
        match &e.result {
            Ok(r) => println!(
                "trial {} seed {}: winner {}",
                e.index,
                e.seed,
                r.winner.map_or("none".to_string(), |w| w.to_string())
            ),
            Err(err) => println!("trial {} seed {}: failed: {err}", e.index, e.seed),
        }
    }
    let table = batch_csv(&summary);
    print!("\n{table}");
    if let Some(dir) = out {
        let ok: Vec<&TrialReport> = entries.iter().filter_map(|e| e.result.as_ref().ok()).collect();
        write_file(&dir.join("summary.csv"), &summary_csv(ok))?;
        write_file(&dir.join("batch.csv"), &table)?;
    }
    Ok(())
}

fn analyze(files: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut reports = Vec::new();
    for f in files {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        reports.extend(read_summary_csv(&text).with_context(|| format!("in {}", f.display()))?);
    }
    let refs: Vec<&TrialReport> = reports.iter().collect();
    let table = batch_csv(&summarize(&refs, refs.len()));
    match out {
        Some(path) => write_file(path, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn dump(setup: &Setup, at: Option<f64>, animat: Option<u32>, out: &Path) -> Result<()> {
    let c = setup.config()?;
    let stop = at.unwrap_or(c.trial_length).min(c.trial_length);
    let mut trial = build_trial(&c)?;
    while !trial.finished() && trial.world.now() < stop {
        trial.step(&mut |_| {})?;
    }
    let mut written = 0;
    for a in &trial.world.animats {
        if animat.is_some_and(|id| id != a.id.0) {
            continue;
        }
        let layout = &trial.tribes[a.tribe].inputs;
        let id = a.id.0;
        write_file(&out.join(format!("queues_{id}.tsv")), &queue_dump(a, layout))?;
        write_file(&out.join(format!("weights_action_{id}.csv")), &weights_csv(&a.brain.action))?;
        write_file(&out.join(format!("weights_signal_{id}.csv")), &weights_csv(&a.brain.signal))?;
        written += 1;
    }
    if written == 0 {
        bail!("no living animat matched at {:.0} s", trial.world.now());
    }
    println!("dumped {written} animat(s) at {:.0} s to {}", trial.world.now(), out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { setup, out } => {
            let r = run_trial(&setup.config()?)?;
            print_report(&r);
            if let Some(dir) = out {
                write_report(&dir, &r)?;
            }
        }
        Command::Batch {
            setup,
            count,
            threads,
            sweeps,
            out,
        } => batch(&setup, count, threads, &sweeps, out.as_deref())?,
        Command::Analyze { files, out } => analyze(&files, out.as_deref())?,
        Command::Dump {
            setup,
            at,
            animat,
            out,
        } => dump(&setup, at, animat, &out)?,
    }
    Ok(())
}
