use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};

use png::{BitDepth, ColorType, Transformations};

use crate::clip::{byte_to_unit, frame_to_bytes, Clip, Frame, ShapeViolation, CHANNELS};
use crate::error::{Error, Result};

/// Largest frame, in pixels, either reader will decode.
pub const MAX_FRAME_PIXELS: usize = 1 << 25;

const NAME_DIGITS: usize = 6;
const EXTENSION: &str = "png";

/// `000042.png` for index 42.
pub fn frame_file_name(index: usize) -> String {
    format!("{index:0NAME_DIGITS$}.{EXTENSION}")
}

fn parse_index(name: &str) -> Option<usize> {
    let stem = name.strip_suffix(".png")?;
    (stem.len() == NAME_DIGITS && stem.bytes().all(|b| b.is_ascii_digit()))
        .then(|| stem.parse().ok())
        .flatten()
}

fn sequence_error(dir: &Path, reason: impl Into<String>) -> Error {
    Error::Sequence {
        dir: dir.to_path_buf(),
        reason: reason.into(),
    }
}

/// Lists the frame files of `dir` in index order, checking the indices are exactly `0..n`.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut indexed = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if !name.ends_with(".png") {
            continue;
        }
        let index = parse_index(name)
            .ok_or_else(|| sequence_error(dir, format!("{name} is not a 6-digit frame name")))?;
        indexed.push((index, entry.path()));
    }
    if indexed.is_empty() {
        return Err(sequence_error(dir, "no frame images"));
    }
    indexed.sort();
    for (expected, (index, _)) in indexed.iter().enumerate() {
        if *index != expected {
            return Err(sequence_error(
                dir,
                format!("missing frame {}", frame_file_name(expected)),
            ));
        }
    }
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

/// Decodes an 8-bit (or lower) grayscale, RGB or palette PNG without transparency.
pub fn decode_png_frame(bytes: &[u8]) -> Result<Frame> {
    decode_png(BufReader::new(Cursor::new(bytes)))
}

fn decode_png<R: io::BufRead + io::Seek>(reader: R) -> Result<Frame> {
    let limits = png::Limits {
        bytes: MAX_FRAME_PIXELS * 4,
    };
    let mut decoder = png::Decoder::new_with_limits(reader, limits);
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let (width, height) = reader.info().size();
    let (width, height) = (width as usize, height as usize);
    if width.saturating_mul(height) > MAX_FRAME_PIXELS {
        return Err(Error::Unsupported(format!("{width}x{height} frame exceeds the size limit")));
    }
    let (color, depth) = reader.output_color_type();
    if depth != BitDepth::Eight {
        return Err(Error::Unsupported(format!("{}-bit PNG samples", depth as u8)));
    }
    if !matches!(color, ColorType::Rgb | ColorType::Grayscale) {
        return Err(Error::Unsupported(format!("PNG color type {color:?}")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Unsupported("PNG frame too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    let line = info.line_size;
    let mut data = Vec::with_capacity(width * height * CHANNELS);
    for row in buf.chunks_exact(line).take(height) {
        match color {
            ColorType::Rgb => data.extend(row[..width * CHANNELS].iter().copied().map(byte_to_unit)),
            _ => data.extend(row[..width].iter().flat_map(|&g| [byte_to_unit(g); CHANNELS])),
        }
    }
    Ok(Frame::new(height, width, data)?)
}

fn png_error(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) if io.kind() != io::ErrorKind::UnexpectedEof => Error::Io(io),
        other => Error::Stream(format!("PNG: {other}")),
    }
}

/// Streams frames from a sequence directory, decoding one image per `next()`.
pub struct FrameDirReader {
    paths: std::vec::IntoIter<PathBuf>,
    index: usize,
    dims: Option<(usize, usize)>,
}

impl FrameDirReader {
    pub fn open(dir: &Path) -> Result<Self> {
        Ok(Self {
            paths: list_frames(dir)?.into_iter(),
            index: 0,
            dims: None,
        })
    }

    /// Frames not yet read.
    pub fn remaining(&self) -> usize {
        self.paths.len()
    }
}

impl Iterator for FrameDirReader {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.paths.next()?;
        let index = self.index;
        self.index += 1;
        Some((|| {
            let frame = decode_png(BufReader::new(File::open(&path)?))?;
            let dims = (frame.height(), frame.width());
            let (expected_h, expected_w) = *self.dims.get_or_insert(dims);
            if dims != (expected_h, expected_w) {
                return Err(ShapeViolation::NonUniform {
                    frame: index,
                    expected_h,
                    expected_w,
                    found_h: dims.0,
                    found_w: dims.1,
                }
                .into());
            }
            Ok(frame)
        })())
    }
}

pub fn read_frames(dir: &Path) -> Result<Clip> {
    let frames = FrameDirReader::open(dir)?.collect::<Result<Vec<_>>>()?;
    Ok(Clip::new(frames)?)
}

/// Creates `dir` if needed and refuses to write into a non-empty directory.
pub(crate) fn prepare_empty_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    if fs::read_dir(dir)?.next().is_some() {
        return Err(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{} is not empty", dir.display()),
        )
        .into());
    }
    Ok(())
}

pub fn encode_png_frame(frame: &Frame, out: impl Write) -> Result<()> {
    let mut encoder = png::Encoder::new(out, frame.width() as u32, frame.height() as u32);
    encoder.set_color(ColorType::Rgb);
    encoder.set_depth(BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(png_write_error)?;
    writer.write_image_data(&frame_to_bytes(frame)).map_err(png_write_error)?;
    writer.finish().map_err(png_write_error)?;
    Ok(())
}

fn png_write_error(e: png::EncodingError) -> Error {
    match e {
        png::EncodingError::IoError(io) => Error::Io(io),
        other => Error::Unsupported(format!("PNG encoding: {other}")),
    }
}

/// Writes `000000.png`, `000001.png`, ... into an empty or new directory.
pub fn write_frames(clip: &Clip, dir: &Path) -> Result<()> {
    prepare_empty_dir(dir)?;
    for (t, frame) in clip.frames().iter().enumerate() {
        let file = File::create_new(dir.join(frame_file_name(t)))?;
        let mut out = BufWriter::new(file);
        encode_png_frame(frame, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::clip_to_bytes;

    fn clip(t: usize, h: usize, w: usize) -> Clip {
        Clip::new(
            (0..t)
                .map(|k| Frame::from_fn(h, w, |x, y| [((x * 37 + k * 11) % 256) as f32 / 255.0, (y % 256) as f32 / 255.0, 0.5]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = clip(3, 7, 9);
        write_frames(&c, dir.path()).unwrap();
        let mut names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names, ["000000.png", "000001.png", "000002.png"]);
        let back = read_frames(dir.path()).unwrap();
        assert_eq!(clip_to_bytes(&back), clip_to_bytes(&c));
    }

    #[test]
    fn refuses_non_empty_target() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("keep.txt"), b"x").unwrap();
        assert!(matches!(write_frames(&clip(1, 2, 2), dir.path()), Err(Error::Io(_))));
    }

    #[test]
    fn gaps_are_sequence_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(&clip(5, 3, 3), dir.path()).unwrap();
        fs::remove_file(dir.path().join("000003.png")).unwrap();
        assert!(matches!(read_frames(dir.path()), Err(Error::Sequence { .. })));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(read_frames(empty.path()), Err(Error::Sequence { .. })));
    }

    #[test]
    fn mixed_sizes_are_shape_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(&clip(2, 3, 3), dir.path()).unwrap();
        let mut bytes = Vec::new();
        encode_png_frame(&Frame::filled(4, 3, [0.0; 3]), &mut bytes).unwrap();
        fs::write(dir.path().join("000002.png"), bytes).unwrap();
        assert!(matches!(
            read_frames(dir.path()),
            Err(Error::Shape(ShapeViolation::NonUniform { frame: 2, .. }))
        ));
    }

    #[test]
    fn grayscale_and_garbage() {
        let mut bytes = Vec::new();
        let mut enc = png::Encoder::new(&mut bytes, 2, 1);
        enc.set_color(ColorType::Grayscale);
        enc.set_depth(BitDepth::Eight);
        enc.write_header().unwrap().write_image_data(&[0, 255]).unwrap();
        let f = decode_png_frame(&bytes).unwrap();
        assert_eq!(f.pixel(1, 0), [1.0; 3]);
        assert!(decode_png_frame(b"\x89PNG\r\n\x1a\nnope").is_err());
        assert!(decode_png_frame(&bytes[..bytes.len() / 2]).is_err());
    }

    #[test]
    fn names_are_zero_padded() {
        assert_eq!(frame_file_name(3), "000003.png");
        assert_eq!(parse_index("000123.png"), Some(123));
        assert_eq!(parse_index("12.png"), None);
        assert_eq!(parse_index("00001a.png"), None);
    }
}
