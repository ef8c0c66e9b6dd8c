use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavegen_core::io::{load_config, write_file, Axes, PipelineConfig, PRESET_NAMES};
use cavegen_core::pipeline::{
    preview, run_bench, run_pipeline, validate_run, with_threads, PreviewKind, RunOptions, StageSelector,
};
use cavegen_core::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Procedural cave generator: graph skeleton, tunnel mesh, baked textures.
#[derive(Parser)]
#[command(name = "cavegen", version)]
struct Cli {
    /// Worker thread cap for every stage. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages and write artifacts plus a manifest.
    Generate {
        /// Config file, or the name of a bundled preset.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated contiguous stages, e.g. `graph` or `mesh,texture`.
        #[arg(long)]
        stages: Option<String>,
        /// Continue from the manifest in the output directory.
        #[arg(long)]
        resume: bool,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write meshes in generator coordinates (+Z up) instead of +Y up.
        #[arg(long)]
        z_up: bool,
    },
    /// Cheap look at the skeleton or the material, without running stages.
    Preview {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        z_up: bool,
    },
    /// Time the benchmark presets and write a report.
    Bench {
        /// Preset names; all sixteen when omitted.
        #[arg(long = "preset", num_args = 1..)]
        presets: Vec<String>,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        /// JSON report path. The text table goes next to it with a `.txt` extension.
        #[arg(long, default_value = "bench_report.json")]
        report: PathBuf,
        /// Where the preset runs write their artifacts.
        #[arg(long, default_value = "bench_out")]
        work_dir: PathBuf,
    },
    /// Audit manifest digests and check the meshed chunks.
    Validate {
        /// Run output directory.
        #[arg(long, conflicts_with = "config")]
        out: Option<PathBuf>,
        /// Config whose `output_dir` holds the run.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the findings as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Graph,
    Texture,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_threads(threads, move || execute(cli.command)).and_then(|r| r) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate {
            config,
            stages,
            resume,
            out,
            z_up,
        } => {
            let cfg = load_config(&config)?;
            let selector = match stages {
                Some(s) => StageSelector::parse(&s, resume)?,
                None => StageSelector { stages: None, resume },
            };
            let outcome = run_pipeline(&cfg, &selector, &RunOptions { out_dir: out, z_up })?;
            let names: Vec<&str> = outcome.stages_run.iter().map(|s| s.name()).collect();
            log::info!(
                "ran [{}] into {}; {} files written",
                names.join(", "),
                outcome.out_dir.display(),
                outcome.files.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Preview { config, kind, out, z_up } => {
            let cfg = load_config(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let kind = match kind {
                Kind::Graph => PreviewKind::Graph,
                Kind::Texture => PreviewKind::Texture,
            };
            for f in preview(&cfg, kind, &dir, Axes::from_z_up(z_up))? {
                log::info!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            presets,
            reps,
            report,
            work_dir,
        } => {
            let presets = if presets.is_empty() {
                PRESET_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                presets
            };
            let r = run_bench(&presets, reps, &work_dir)?;
            let json = serde_json::to_string_pretty(&r).expect("report serializes");
            write_file(&report, format!("{json}\n").as_bytes())?;
            let table = r.table();
            let txt = report.with_extension("txt");
            write_file(&txt, table.as_bytes())?;
            log::info!("benchmark table (mean total seconds):\n{table}");
            log::info!("wrote {} and {}", report.display(), txt.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { out, config, report } => {
            let dir = match (out, config) {
                (Some(d), _) => d,
                (None, Some(c)) => load_config(&c)?.output_dir,
                (None, None) => PipelineConfig::default().output_dir,
            };
            validate(&dir, report.as_deref())
        }
    }
}

fn validate(dir: &Path, report: Option<&Path>) -> Result<ExitCode> {
    let v = validate_run(dir)?;
    if let Some(path) = report {
        let json = serde_json::to_string_pretty(&v).expect("report serializes");
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    for (rel, reason) in &v.stale {
        log::error!("stale artifact {rel}: {reason}");
    }
    if let Some(m) = &v.mesh {
        log::info!(
            "mesh: {} triangles, {} components, euler characteristic {}, closed manifold: {}",
            m.triangle_count,
            m.components,
            m.euler_characteristic,
            m.is_closed_manifold()
        );
    }
    if let Some((rel, reason)) = v.stale.first() {
        return Err(Error::StaleArtifact {
            path: dir.join(rel),
            reason: reason.clone(),
        });
    }
    if !v.is_ok() {
        return Err(Error::Contract("meshed chunks do not form a closed oriented manifold".into()));
    }
    log::info!("{} is consistent", dir.display());
    Ok(ExitCode::SUCCESS)
}
