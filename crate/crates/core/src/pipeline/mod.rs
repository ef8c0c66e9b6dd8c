//! Stage orchestration: graph, mesh and texture stages with resume,
//! previews and the preset benchmark.

mod bench;
mod preview;
mod run;

pub use bench::{format_secs, run_bench, table_cell, BenchEntry, BenchReport, Hardware, Stats, TABLE_COLUMNS, TABLE_ROWS};
pub use preview::{graph_line_set, preview, proof_sheet, PreviewKind, PROOF_SHEET_SIZE};
pub use run::{
    config_differences, read_chunks, read_graph, run_pipeline, validate_run, weld_chunks, DecimationSummary,
    MeshSummary, RunOptions, RunOutcome, RunValidation, StageSelector, AXES_FILE, CHUNK_INDEX_FILE, GRAPH_FILE,
    MESH_REPORT_FILE,
};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `None`. Results do not depend on the worker count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::ResourceLimit(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
