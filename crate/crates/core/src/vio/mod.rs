//! Frame-sequence directories and YUV4MPEG2 streams.

mod frames;
mod y4m;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub use frames::{
    decode_png_frame, encode_png_frame, frame_file_name, list_frames, read_frames, write_frames, FrameDirReader,
    MAX_FRAME_PIXELS,
};
pub use y4m::{
    parse_header, read_y4m, rgb_to_ycbcr, write_y4m, ycbcr_to_rgb, FrameRate, Y4mHeader, Y4mReader, Y4mWriter,
};

use crate::clip::Clip;
use crate::error::Result;

fn is_y4m(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
}

/// Reads a `.y4m` file or a frame directory.
pub fn read_clip(path: &Path) -> Result<Clip> {
    if is_y4m(path) {
        read_y4m(BufReader::new(File::open(path)?))
    } else {
        read_frames(path)
    }
}

/// Writes a `.y4m` file (which must not exist yet) or a frame directory.
pub fn write_clip(clip: &Clip, path: &Path, rate: FrameRate) -> Result<()> {
    if is_y4m(path) {
        write_y4m(clip, rate, BufWriter::new(File::create_new(path)?))?;
        Ok(())
    } else {
        write_frames(clip, path)
    }
}
