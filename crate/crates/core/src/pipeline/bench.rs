use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{run_pipeline, RunOptions, StageSelector};
use crate::error::{Error, Result};
use crate::io::{preset, unknown_preset, Stage, PRESET_NAMES};

pub const TABLE_ROWS: [&str; 4] = ["Single (no chunks)", "Multi (no chunks)", "Single (4 division)", "Multi (4 division)"];
pub const TABLE_COLUMNS: [&str; 4] = ["50N(1K)", "50N(4K)", "250N(1K)", "250N(4K)"];

/// Row and column of a preset in the 4x4 benchmark table.
pub fn table_cell(name: &str) -> Option<(usize, usize)> {
    if !PRESET_NAMES.contains(&name) {
        return None;
    }
    let multi = name.starts_with("multi");
    let div4 = name.contains("_div4_");
    let row = usize::from(multi) + 2 * usize::from(div4);
    let col = 2 * usize::from(name.contains("_250n_")) + usize::from(name.ends_with("_4k"));
    Some((row, col))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        Self {
            mean: samples.iter().sum::<f64>() / n,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub preset: String,
    pub row: usize,
    pub column: usize,
    pub repetitions: u32,
    /// Wall-clock seconds per stage.
    pub stages: BTreeMap<String, Stats>,
    pub total: Stats,
    /// Bytes of the last repetition's artifacts by stage.
    pub artifact_bytes: BTreeMap<String, u64>,
    pub chunks: usize,
    pub texture_resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hardware {
    pub os: String,
    pub arch: String,
    pub cpu_model: Option<String>,
    pub logical_cpus: usize,
    pub worker_threads: usize,
    pub memory_bytes: Option<u64>,
}

impl Hardware {
    pub fn detect() -> Self {
        let cpuinfo = std::fs::read_to_string("/proc/cpuinfo").unwrap_or_default();
        let cpu_model = cpuinfo
            .lines()
            .find(|l| l.starts_with("model name"))
            .and_then(|l| l.split_once(':'))
            .map(|(_, v)| v.trim().to_string());
        let memory_bytes = std::fs::read_to_string("/proc/meminfo").ok().and_then(|m| {
            let line = m.lines().find(|l| l.starts_with("MemTotal:"))?;
            let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
            Some(kb * 1024)
        });
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            cpu_model,
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            worker_threads: rayon::current_num_threads(),
            memory_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub tool_version: String,
    pub hardware: Hardware,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub entries: Vec<BenchEntry>,
    /// Observations printed under the table. Nothing here is asserted.
    pub notes: Vec<String>,
}

impl BenchReport {
    pub fn entry(&self, row: usize, column: usize) -> Option<&BenchEntry> {
        self.entries.iter().find(|e| e.row == row && e.column == column)
    }

    /// Aligned text table: rows are layouts, columns node count and
    /// texture resolution, cells the mean total seconds.
    pub fn table(&self) -> String {
        let w0 = TABLE_ROWS.iter().map(|r| r.len()).max().unwrap_or(0).max("Parameters".len());
        let cells: Vec<Vec<String>> = (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| self.entry(r, c).map_or("-".to_string(), |e| format_secs(e.total.mean)))
                    .collect()
            })
            .collect();
        let w = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain(TABLE_COLUMNS.iter().map(|c| c.len()))
            .max()
            .unwrap_or(0);
        let mut s = String::new();
        let _ = write!(s, "{:<w0$}", "Parameters");
        for c in TABLE_COLUMNS {
            let _ = write!(s, "  {c:>w$}");
        }
        s.push('\n');
        let _ = writeln!(s, "{}", "-".repeat(w0 + 4 * (w + 2)));
        for (r, row) in TABLE_ROWS.iter().enumerate() {
            let _ = write!(s, "{row:<w0$}");
            for cell in &cells[r] {
                let _ = write!(s, "  {cell:>w$}");
            }
            s.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// `MMmSS.SSs`, the table's minutes-and-seconds style with sub-second
/// precision.
pub fn format_secs(secs: f64) -> String {
    let m = (secs / 60.0).floor();
    format!("{:02}m{:05.2}s", m as u64, secs - 60.0 * m)
}

/// Runs each preset `repetitions` times in `work_dir/<preset>` and collects
/// per-stage timings.
pub fn run_bench(presets: &[String], repetitions: u32, work_dir: &Path) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(Error::config("reps", "must be at least 1"));
    }
    let mut configs = Vec::new();
    for name in presets {
        let c = preset(name).ok_or_else(|| unknown_preset(name))?;
        configs.push(c);
    }
    let mut entries = Vec::new();
    for config in configs {
        let name = config.preset_name.clone().expect("presets are named");
        let (row, column) = table_cell(&name).expect("preset is in the table");
        let out: PathBuf = work_dir.join(&name);
        let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut totals = Vec::new();
        let mut last = None;
        for rep in 0..repetitions {
            log::info!("bench {name} repetition {}/{repetitions}", rep + 1);
            let outcome = run_pipeline(
                &config,
                &StageSelector::all(),
                &RunOptions {
                    out_dir: Some(out.clone()),
                    z_up: false,
                },
            )?;
            let mut total = 0.0;
            for s in Stage::ALL {
                let t = outcome.manifest.timings.get(s.name()).copied().unwrap_or(0.0);
                samples.entry(s.name().to_string()).or_default().push(t);
                total += t;
            }
            totals.push(total);
            last = Some(outcome);
        }
        let last = last.expect("at least one repetition");
        let mut artifact_bytes: BTreeMap<String, u64> = BTreeMap::new();
        for rel in last.manifest.artifacts.keys() {
            let bytes = std::fs::metadata(out.join(rel)).map_or(0, |m| m.len());
            let kind = if rel.starts_with("textures/") {
                "textures"
            } else if rel.starts_with("mesh/") {
                "mesh"
            } else if rel.starts_with("stage/") {
                "checkpoint"
            } else {
                "graph"
            };
            *artifact_bytes.entry(kind.to_string()).or_default() += bytes;
        }
        let chunks = last.manifest.artifacts.keys().filter(|r| r.starts_with("stage/chunk_")).count();
        entries.push(BenchEntry {
            preset: name,
            row,
            column,
            repetitions,
            stages: samples.iter().map(|(k, v)| (k.clone(), Stats::of(v))).collect(),
            total: Stats::of(&totals),
            artifact_bytes,
            chunks,
            texture_resolution: config.texture_resolution,
        });
    }
    let mut report = BenchReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        hardware: Hardware::detect(),
        rows: TABLE_ROWS.map(String::from).to_vec(),
        columns: TABLE_COLUMNS.map(String::from).to_vec(),
        entries,
        notes: Vec::new(),
    };
    report.notes = chunking_notes(&report);
    Ok(report)
}

/// Compares texture-stage time of each chunked preset with its unchunked
/// twin.
fn chunking_notes(report: &BenchReport) -> Vec<String> {
    let mut notes = Vec::new();
    for row in 2..4 {
        for col in 0..4 {
            let (Some(chunked), Some(whole)) = (report.entry(row, col), report.entry(row - 2, col)) else {
                continue;
            };
            let t = |e: &BenchEntry| e.stages.get("texture").map_or(0.0, |s| s.mean);
            let (a, b) = (t(chunked), t(whole));
            notes.push(format!(
                "{} texture stage {:.2}s vs {} {:.2}s: chunked is {}",
                chunked.preset,
                a,
                whole.preset,
                b,
                if a > b { "slower" } else { "not slower" }
            ));
        }
    }
    notes
}
