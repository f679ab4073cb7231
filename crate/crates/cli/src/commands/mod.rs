mod bench;
mod degrade;
mod eval;
mod preview;

pub use bench::{run_bench, BenchReport, ThreadRun};
pub(crate) use bench::bench;
pub use degrade::{degrade, replay, DegradeSummary};
pub use eval::{eval, CropReport, EvalReport, FlickerReport};
pub use preview::{contact_sheet, preview};

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempdeg_core::{Clip, Error as CoreError};

use crate::error::{CliError, CliResult};

/// Runs `f` inside a worker pool of `threads` workers (0 = one per core).
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// SHA-256 over the exact in-memory sample bits, hex encoded.
pub fn clip_hash(clip: &Clip) -> String {
    let mut h = Sha256::new();
    for frame in clip.frames() {
        for v in frame.data() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a clip, naming the path in I/O errors.
pub(crate) fn load_clip(path: &Path) -> CliResult<Clip> {
    tempdeg_core::vio::read_clip(path).map_err(|e| match e {
        CoreError::Io(io) => CoreError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))).into(),
        other => other.into(),
    })
}

/// Uses every frame when the clip is shorter than the requested sample count.
pub(crate) fn sample_count(requested: usize, frames: usize) -> usize {
    if requested > frames {
        println!("note: sampling all {frames} frames ({requested} requested)");
    }
    requested.min(frames)
}

/// Writes `text` to a file that must not exist yet.
pub(crate) fn write_new(path: &Path, text: &[u8]) -> CliResult<()> {
    let mut f = File::create_new(path)?;
    f.write_all(text)?;
    Ok(())
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
