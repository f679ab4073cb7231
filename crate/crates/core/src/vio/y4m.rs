use std::io::{BufRead, Read, Write};

use super::frames::MAX_FRAME_PIXELS;
use crate::clip::{byte_to_unit, unit_to_byte, Clip, Frame, CHANNELS};
use crate::error::{Error, Result};

const MAGIC: &str = "YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";
const MAX_LINE: usize = 1024;

/// Frames per second as a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::param(format!("frame rate {num}:{den} must be positive")));
        }
        Ok(Self { num, den })
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        Self { num: 24, den: 1 }
    }
}

/// Parsed stream header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub rate: FrameRate,
}

impl Y4mHeader {
    pub fn to_line(&self) -> String {
        format!(
            "{MAGIC} W{} H{} F{}:{} Ip A1:1 C444\n",
            self.width, self.height, self.rate.num, self.rate.den
        )
    }

    fn payload_len(&self) -> usize {
        self.width * self.height * CHANNELS
    }
}

/// Full-range Rec.601 RGB to YCbCr, rounded half away from zero.
#[inline]
pub fn rgb_to_ycbcr([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    [y, cb, cr].map(to_byte)
}

/// Inverse of [`rgb_to_ycbcr`] up to one quantization step.
#[inline]
pub fn ycbcr_to_rgb([y, cb, cr]: [u8; 3]) -> [u8; 3] {
    let (y, cb, cr) = (y as f64, cb as f64 - 128.0, cr as f64 - 128.0);
    let r = y + 1.402 * cr;
    let g = y - 0.344136 * cb - 0.714136 * cr;
    let b = y + 1.772 * cb;
    [r, g, b].map(to_byte)
}

fn to_byte(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn parse_rate(v: &str) -> Option<FrameRate> {
    let (n, d) = v.split_once(':')?;
    FrameRate::new(n.parse().ok()?, d.parse().ok()?).ok()
}

fn parse_dim(v: &str) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::Stream(format!("bad y4m dimension {v:?}"))),
    }
}

/// Parses the header line (without its newline).
pub fn parse_header(line: &str) -> Result<Y4mHeader> {
    let mut tokens = line.split(' ');
    if tokens.next() != Some(MAGIC) {
        return Err(Error::Stream("missing YUV4MPEG2 signature".into()));
    }
    let (mut width, mut height, mut rate, mut chroma) = (None, None, None, None);
    for tok in tokens.filter(|t| !t.is_empty()) {
        let (tag, value) = tok.split_at(1);
        match tag {
            "W" => width = Some(parse_dim(value)?),
            "H" => height = Some(parse_dim(value)?),
            "F" => rate = Some(parse_rate(value).ok_or_else(|| Error::Stream(format!("bad frame rate {value:?}")))?),
            "I" => {
                if value != "p" && value != "?" {
                    return Err(Error::Unsupported(format!("interlacing mode {value:?}")));
                }
            }
            "C" => chroma = Some(value.to_string()),
            // Aspect ratio and extension tags do not affect decoding.
            "A" | "X" => {}
            _ => return Err(Error::Stream(format!("unknown y4m header token {tok:?}"))),
        }
    }
    let (Some(width), Some(height)) = (width, height) else {
        return Err(Error::Stream("y4m header lacks W or H".into()));
    };
    match chroma.as_deref() {
        Some("444") => {}
        other => {
            return Err(Error::Unsupported(format!(
                "y4m chroma {}, only C444 is supported",
                other.unwrap_or("420jpeg (default)")
            )))
        }
    }
    if width.checked_mul(height).is_none_or(|p| p > MAX_FRAME_PIXELS) {
        return Err(Error::Unsupported(format!("{width}x{height} frame exceeds the size limit")));
    }
    Ok(Y4mHeader {
        width,
        height,
        rate: rate.unwrap_or_default(),
    })
}

/// Reads one `\n`-terminated line of at most [`MAX_LINE`] bytes; `None` at clean EOF.
fn read_line<R: BufRead>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let n = r.by_ref().take(MAX_LINE as u64 + 1).read_until(b'\n', &mut line)?;
    if n == 0 {
        return Ok(None);
    }
    if line.last() != Some(&b'\n') {
        return Err(Error::Stream(if line.len() > MAX_LINE {
            "y4m header line too long".into()
        } else {
            "y4m stream ends inside a header line".into()
        }));
    }
    line.pop();
    Ok(Some(line))
}

/// Streaming C444 reader; each `next()` decodes exactly one frame.
pub struct Y4mReader<R> {
    inner: R,
    header: Y4mHeader,
    payload: Vec<u8>,
    index: usize,
    done: bool,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let line = read_line(&mut inner)?.ok_or_else(|| Error::Stream("empty y4m stream".into()))?;
        let line = std::str::from_utf8(&line).map_err(|_| Error::Stream("y4m header is not ASCII".into()))?;
        let header = parse_header(line)?;
        Ok(Self {
            inner,
            header,
            payload: Vec::new(),
            index: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &Y4mHeader {
        &self.header
    }

    fn read_frame(&mut self) -> Result<Option<Frame>> {
        let Some(line) = read_line(&mut self.inner)? else {
            return Ok(None);
        };
        if !(line.starts_with(FRAME_TAG) && matches!(line.get(FRAME_TAG.len()), None | Some(b' '))) {
            return Err(Error::Stream(format!("frame {} lacks the FRAME marker", self.index)));
        }
        let len = self.header.payload_len();
        self.payload.resize(len, 0);
        self.inner.read_exact(&mut self.payload).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Stream(format!("frame {} is truncated", self.index)),
            _ => Error::Io(e),
        })?;
        let plane = self.header.width * self.header.height;
        let (ys, rest) = self.payload.split_at(plane);
        let (cbs, crs) = rest.split_at(plane);
        let mut data = Vec::with_capacity(len);
        for i in 0..plane {
            data.extend(ycbcr_to_rgb([ys[i], cbs[i], crs[i]]).map(byte_to_unit));
        }
        self.index += 1;
        Ok(Some(Frame::new(self.header.height, self.header.width, data)?))
    }
}

impl<R: BufRead> Iterator for Y4mReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.read_frame().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

pub fn read_y4m<R: BufRead>(reader: R) -> Result<Clip> {
    let frames = Y4mReader::new(reader)?.collect::<Result<Vec<_>>>()?;
    if frames.is_empty() {
        return Err(Error::EmptyClip);
    }
    Ok(Clip::new(frames)?)
}

/// Streaming C444 writer.
pub struct Y4mWriter<W> {
    inner: W,
    header: Y4mHeader,
    payload: Vec<u8>,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, height: usize, width: usize, rate: FrameRate) -> Result<Self> {
        let header = Y4mHeader { width, height, rate };
        inner.write_all(header.to_line().as_bytes())?;
        Ok(Self {
            inner,
            header,
            payload: Vec::new(),
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if (frame.height(), frame.width()) != (self.header.height, self.header.width) {
            return Err(Error::mismatch(format!(
                "frame is {}x{}, stream is {}x{}",
                frame.height(),
                frame.width(),
                self.header.height,
                self.header.width
            )));
        }
        let plane = self.header.width * self.header.height;
        self.payload.resize(plane * CHANNELS, 0);
        for (i, px) in frame.data().chunks_exact(CHANNELS).enumerate() {
            let [y, cb, cr] = rgb_to_ycbcr([unit_to_byte(px[0]), unit_to_byte(px[1]), unit_to_byte(px[2])]);
            self.payload[i] = y;
            self.payload[plane + i] = cb;
            self.payload[2 * plane + i] = cr;
        }
        self.inner.write_all(FRAME_TAG)?;
        self.inner.write_all(b"\n")?;
        self.inner.write_all(&self.payload)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn write_y4m<W: Write>(clip: &Clip, rate: FrameRate, out: W) -> Result<W> {
    let mut writer = Y4mWriter::new(out, clip.height(), clip.width(), rate)?;
    for frame in clip.frames() {
        writer.write_frame(frame)?;
    }
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::frame_to_bytes;

    #[test]
    fn header_line() {
        let h = Y4mHeader {
            width: 832,
            height: 480,
            rate: FrameRate::new(24, 1).unwrap(),
        };
        assert_eq!(h.to_line(), "YUV4MPEG2 W832 H480 F24:1 Ip A1:1 C444\n");
        assert_eq!(parse_header(h.to_line().trim_end()).unwrap(), h);
    }

    #[test]
    fn conversion_error_is_at_most_one_step() {
        let mut worst = 0;
        for r in 0..=255u8 {
            for g in 0..=255u8 {
                for b in 0..=255u8 {
                    let back = ycbcr_to_rgb(rgb_to_ycbcr([r, g, b]));
                    for (x, y) in back.iter().zip([r, g, b]) {
                        worst = worst.max(x.abs_diff(y));
                    }
                }
            }
        }
        assert!(worst <= 1, "worst error {worst}");
    }

    #[test]
    fn gray_is_a_fixed_point() {
        for v in 0..=255u8 {
            assert_eq!(rgb_to_ycbcr([v; 3]), [v, 128, 128]);
            assert_eq!(ycbcr_to_rgb([v, 128, 128]), [v; 3]);
        }
    }

    #[test]
    fn round_trip_within_a_step() {
        let clip = Clip::new(
            (0..3)
                .map(|t| Frame::from_fn(5, 7, |x, y| [x as f32 / 6.0, y as f32 / 4.0, t as f32 / 2.0]))
                .collect(),
        )
        .unwrap();
        let bytes = write_y4m(&clip, FrameRate::default(), Vec::new()).unwrap();
        let back = read_y4m(&bytes[..]).unwrap();
        assert_eq!(back.shape(), clip.shape());
        for (a, b) in back.frames().iter().zip(clip.frames()) {
            for (x, y) in frame_to_bytes(a).iter().zip(frame_to_bytes(b)) {
                assert!(x.abs_diff(y) <= 1);
            }
        }
    }

    #[test]
    fn malformed_streams() {
        assert!(matches!(read_y4m(&b"YUV4MPEG2 W2 H2 F24:1 C420jpeg\n"[..]), Err(Error::Unsupported(_))));
        assert!(matches!(read_y4m(&b"YUV4MPEG2 W2 H2 F24:1\n"[..]), Err(Error::Unsupported(_))));
        assert!(matches!(read_y4m(&b"YUV4MPEG2 W2 H2 C444\nFRAME\n\x00\x01"[..]), Err(Error::Stream(_))));
        assert!(matches!(read_y4m(&b"YUV4MPEG2 W2 H2 C444\nFRAMX\n"[..]), Err(Error::Stream(_))));
        assert!(matches!(read_y4m(&b"YUV4MPEG2 W2 H2 C444\n"[..]), Err(Error::EmptyClip)));
        assert!(matches!(read_y4m(&b"MPEG W2 H2 C444\n"[..]), Err(Error::Stream(_))));
        assert!(read_y4m(&b"YUV4MPEG2 W0 H2 C444\n"[..]).is_err());
        assert!(read_y4m(&b"YUV4MPEG2 W99999999 H99999999 C444\n"[..]).is_err());
        let long = format!("YUV4MPEG2 {}\n", "X".repeat(4000));
        assert!(read_y4m(long.as_bytes()).is_err());
    }

    #[test]
    fn frame_parameters_are_tolerated() {
        let mut bytes = b"YUV4MPEG2 W1 H1 F30000:1001 It A1:1 C444 XYSCSS=444\n".to_vec();
        assert!(read_y4m(&bytes[..]).is_err());
        bytes = b"YUV4MPEG2 W1 H1 F30000:1001 Ip A1:1 C444 XYSCSS=444\nFRAME Ixyz\n\x80\x80\x80".to_vec();
        let clip = read_y4m(&bytes[..]).unwrap();
        assert_eq!(frame_to_bytes(clip.frame(0)), vec![128, 128, 128]);
    }
}
