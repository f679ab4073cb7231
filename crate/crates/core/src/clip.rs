//! Pixel data model: RGB frames in the normalized `[0, 1]` domain and clips
//! of uniformly sized frames.
//!
//! Samples are stored row-major with interleaved channels (`r g b r g b ...`).
//! All values are immutable once constructed; operators build new frames.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of interleaved channels per pixel.
pub const CHANNELS: usize = 3;

/// First invariant a frame list violates.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapeViolation {
    #[error("clip must contain at least one frame")]
    Empty,
    #[error("frame {frame} has a zero dimension ({height}x{width})")]
    ZeroDimension {
        frame: usize,
        height: usize,
        width: usize,
    },
    #[error("frame {frame} holds {found} samples, expected {expected}")]
    DataLength {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("frame {frame} is {found_h}x{found_w}, expected {expected_h}x{expected_w} like frame 0")]
    NonUniform {
        frame: usize,
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },
    #[error("frame {frame} sample {index} = {value} is outside [0, 1]")]
    OutOfRange { frame: usize, index: usize, value: f32 },
    #[error("byte buffer holds {found} bytes, expected {expected}")]
    ByteLength { expected: usize, found: usize },
}

/// `(T, H, W)` of a clip; the channel count is always [`CHANNELS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClipShape {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

impl ClipShape {
    pub fn new(frames: usize, height: usize, width: usize) -> Self {
        Self {
            frames,
            height,
            width,
        }
    }

    /// Samples in one frame, or `None` on overflow.
    pub fn frame_len(&self) -> Option<usize> {
        self.height.checked_mul(self.width)?.checked_mul(CHANNELS)
    }

    /// Samples in the whole clip, or `None` on overflow.
    pub fn total_len(&self) -> Option<usize> {
        self.frame_len()?.checked_mul(self.frames)
    }
}

impl std::fmt::Display for ClipShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}x{}", self.frames, self.height, self.width, CHANNELS)
    }
}

/// One RGB frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Frame {
    /// Builds a frame, checking the sample count and value range.
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self, ShapeViolation> {
        let frame = Self {
            height,
            width,
            data,
        };
        frame.check(0)?;
        Ok(frame)
    }

    /// A frame filled with a single color.
    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for _ in 0..height * width {
            data.extend_from_slice(&rgb);
        }
        Self::from_parts(height, width, data)
    }

    /// Builds a frame by evaluating `f(x, y)` per pixel. Values are clamped to `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).iter().map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Self::from_parts(height, width, data)
    }

    /// Internal constructor for operator outputs whose invariants hold by construction.
    pub(crate) fn from_parts(height: usize, width: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * CHANNELS);
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// One interleaved row of `3 * width` samples.
    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * CHANNELS;
        &self.data[y * stride..(y + 1) * stride]
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn check(&self, frame: usize) -> Result<(), ShapeViolation> {
        if self.height == 0 || self.width == 0 {
            return Err(ShapeViolation::ZeroDimension {
                frame,
                height: self.height,
                width: self.width,
            });
        }
        let expected = self.height * self.width * CHANNELS;
        if self.data.len() != expected {
            return Err(ShapeViolation::DataLength {
                frame,
                expected,
                found: self.data.len(),
            });
        }
        // `!(0..=1).contains` also rejects NaN.
        if let Some((index, &value)) = self
            .data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ShapeViolation::OutOfRange {
                frame,
                index,
                value,
            });
        }
        Ok(())
    }
}

/// Checks every clip invariant over a frame list and reports the first violation.
pub fn validate(frames: &[Frame]) -> Result<(), ShapeViolation> {
    let first = frames.first().ok_or(ShapeViolation::Empty)?;
    for (t, frame) in frames.iter().enumerate() {
        if frame.height != first.height || frame.width != first.width {
            return Err(ShapeViolation::NonUniform {
                frame: t,
                expected_h: first.height,
                expected_w: first.width,
                found_h: frame.height,
                found_w: frame.width,
            });
        }
        frame.check(t)?;
    }
    Ok(())
}

/// An ordered, non-empty sequence of equally sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
}

impl Clip {
    pub fn new(frames: Vec<Frame>) -> Result<Self, ShapeViolation> {
        validate(&frames)?;
        Ok(Self { frames })
    }

    pub(crate) fn from_frames(frames: Vec<Frame>) -> Self {
        debug_assert!(validate(&frames).is_ok());
        Self { frames }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false: a clip holds at least one frame.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn shape(&self) -> ClipShape {
        ClipShape::new(self.len(), self.height(), self.width())
    }

    pub(crate) fn expect_shape(&self, shape: ClipShape, what: &str) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::mismatch(format!(
                "{what} expects a {shape} clip, got {}",
                self.shape()
            )));
        }
        Ok(())
    }
}

/// Maps one byte to the normalized domain.
#[inline]
pub fn byte_to_unit(b: u8) -> f32 {
    b as f32 / 255.0
}

/// Quantizes one sample: `clamp(round(v * 255), 0, 255)`, ties away from zero.
#[inline]
pub fn unit_to_byte(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn frame_from_bytes(height: usize, width: usize, raw: &[u8]) -> Result<Frame, ShapeViolation> {
    if height == 0 || width == 0 {
        return Err(ShapeViolation::ZeroDimension {
            frame: 0,
            height,
            width,
        });
    }
    let expected = height * width * CHANNELS;
    if raw.len() != expected {
        return Err(ShapeViolation::ByteLength {
            expected,
            found: raw.len(),
        });
    }
    Ok(Frame::from_parts(
        height,
        width,
        raw.iter().copied().map(byte_to_unit).collect(),
    ))
}

pub fn frame_to_bytes(frame: &Frame) -> Vec<u8> {
    frame.data.iter().copied().map(unit_to_byte).collect()
}

/// Decodes a packed `T x H x W x 3` byte buffer.
pub fn clip_from_bytes(raw: &[u8], frames: usize, height: usize, width: usize) -> Result<Clip> {
    let shape = ClipShape::new(frames, height, width);
    let expected = shape
        .total_len()
        .ok_or_else(|| Error::param(format!("clip shape {shape} overflows")))?;
    if raw.len() != expected {
        return Err(ShapeViolation::ByteLength {
            expected,
            found: raw.len(),
        }
        .into());
    }
    if frames == 0 {
        return Err(ShapeViolation::Empty.into());
    }
    if expected == 0 {
        return Err(ShapeViolation::ZeroDimension {
            frame: 0,
            height,
            width,
        }
        .into());
    }
    let frame_len = expected / frames;
    let frames = raw
        .chunks_exact(frame_len)
        .map(|chunk| frame_from_bytes(height, width, chunk))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Clip::from_frames(frames))
}

/// Encodes a clip as a packed `T x H x W x 3` byte buffer.
pub fn clip_to_bytes(clip: &Clip) -> Vec<u8> {
    let mut out = Vec::with_capacity(clip.shape().total_len().unwrap_or(0));
    for frame in &clip.frames {
        out.extend(frame.data.iter().copied().map(unit_to_byte));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_endpoints() {
        let clip = clip_from_bytes(&[0, 128, 255], 1, 1, 1).unwrap();
        assert_eq!(clip.frame(0).data()[0], 0.0);
        assert!((clip.frame(0).data()[1] as f64 - 128.0 / 255.0).abs() < 1e-7);
        assert!((clip.frame(0).data()[1] as f64 - 0.50196).abs() < 1e-5);
        assert_eq!(clip.frame(0).data()[2], 1.0);
    }

    #[test]
    fn export_rounding() {
        assert_eq!(unit_to_byte(1.0), 255);
        assert_eq!(unit_to_byte(0.5), 128);
        assert_eq!(unit_to_byte(1.2), 255);
        assert_eq!(unit_to_byte(-0.3), 0);
        assert_eq!(unit_to_byte(0.0), 0);
    }

    #[test]
    fn every_byte_survives_the_round_trip() {
        for b in 0..=255u8 {
            assert_eq!(unit_to_byte(byte_to_unit(b)), b);
        }
    }

    #[test]
    fn byte_length_mismatch() {
        let err = clip_from_bytes(&[0; 11], 1, 2, 2).unwrap_err();
        assert!(matches!(
            err,
            Error::Shape(ShapeViolation::ByteLength {
                expected: 12,
                found: 11
            })
        ));
        assert!(clip_from_bytes(&[], 0, 2, 2).is_err());
        assert!(clip_from_bytes(&[], 2, 0, 2).is_err());
        assert!(clip_from_bytes(&[], usize::MAX, usize::MAX, 2).is_err());
    }

    #[test]
    fn canonical_geometry_is_valid() {
        let frames = vec![Frame::filled(480, 832, [0.2, 0.5, 1.0]); 49];
        assert_eq!(validate(&frames), Ok(()));
        let clip = Clip::new(frames).unwrap();
        assert_eq!(clip.shape(), ClipShape::new(49, 480, 832));
    }

    #[test]
    fn non_uniform_dimensions() {
        let mut frames = vec![Frame::filled(480, 16, [0.0; 3]); 3];
        frames[1] = Frame::filled(479, 16, [0.0; 3]);
        assert!(matches!(
            validate(&frames),
            Err(ShapeViolation::NonUniform {
                frame: 1,
                found_h: 479,
                ..
            })
        ));
    }

    #[test]
    fn empty_and_out_of_range() {
        assert_eq!(validate(&[]), Err(ShapeViolation::Empty));
        assert!(matches!(
            Frame::new(1, 1, vec![0.0, 1.5, 0.0]),
            Err(ShapeViolation::OutOfRange { index: 1, .. })
        ));
        assert!(Frame::new(1, 1, vec![0.0, f32::NAN, 0.0]).is_err());
        assert!(matches!(
            Frame::new(1, 2, vec![0.0; 3]),
            Err(ShapeViolation::DataLength { expected: 6, .. })
        ));
        assert!(matches!(
            Frame::new(0, 2, vec![]),
            Err(ShapeViolation::ZeroDimension { .. })
        ));
    }

    proptest! {
        #[test]
        fn bytes_are_a_fixed_point(
            (t, h, w, raw) in (1usize..4, 1usize..5, 1usize..7).prop_flat_map(|(t, h, w)| {
                (Just(t), Just(h), Just(w), proptest::collection::vec(any::<u8>(), t * h * w * 3))
            })
        ) {
            let clip = clip_from_bytes(&raw, t, h, w).unwrap();
            let bytes = clip_to_bytes(&clip);
            prop_assert_eq!(&bytes, &raw);
            prop_assert_eq!(clip_from_bytes(&bytes, t, h, w).unwrap(), clip);
        }
    }
}
