use std::fs::File;
use std::io::{BufWriter, Write};

use tempdeg_core::metrics::uniform_frame_indices;
use tempdeg_core::vio::encode_png_frame;
use tempdeg_core::{Clip, Error as CoreError, Frame};

use super::{load_clip, sample_count, with_pool};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

const THUMB_MAX_WIDTH: usize = 160;
const GAP: usize = 4;
const GLYPH_SCALE: usize = 2;
const LABEL_HEIGHT: usize = 5 * GLYPH_SCALE + 4;
const BACKGROUND: [f32; 3] = [0.1, 0.1, 0.1];
const INK: [f32; 3] = [1.0, 1.0, 1.0];

/// 3x5 digit glyphs, one row per entry, most significant bit on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b001, 0b001, 0b001],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

struct Canvas {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        let data = (0..width * height).flat_map(|_| BACKGROUND).collect();
        Self { width, height, data }
    }

    fn put(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        if x < self.width && y < self.height {
            let i = (y * self.width + x) * 3;
            self.data[i..i + 3].copy_from_slice(&rgb);
        }
    }

    /// Draws `text` (digits only) with its top-left corner at `(x, y)`, clipped to `max_x`.
    fn label(&mut self, text: &str, x: usize, y: usize, max_x: usize) {
        let mut cx = x;
        for d in text.bytes().map(|b| (b - b'0') as usize) {
            for (row, bits) in DIGITS[d].iter().enumerate() {
                for col in 0..3 {
                    if bits & (0b100 >> col) == 0 {
                        continue;
                    }
                    for dy in 0..GLYPH_SCALE {
                        for dx in 0..GLYPH_SCALE {
                            let px = cx + col * GLYPH_SCALE + dx;
                            if px < max_x {
                                self.put(px, y + row * GLYPH_SCALE + dy, INK);
                            }
                        }
                    }
                }
            }
            cx += 4 * GLYPH_SCALE;
        }
    }

    fn blit(&mut self, thumb: &Thumb, x: usize, y: usize) {
        for ty in 0..thumb.height {
            for tx in 0..thumb.width {
                let i = (ty * thumb.width + tx) * 3;
                self.put(x + tx, y + ty, [thumb.data[i], thumb.data[i + 1], thumb.data[i + 2]]);
            }
        }
    }
}

struct Thumb {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

/// Box-averages `factor x factor` blocks; partial blocks at the edges average what they cover.
fn thumbnail(frame: &Frame, factor: usize) -> Thumb {
    let (h, w) = (frame.height(), frame.width());
    let (th, tw) = (h.div_ceil(factor), w.div_ceil(factor));
    let mut data = Vec::with_capacity(th * tw * 3);
    for ty in 0..th {
        for tx in 0..tw {
            let mut acc = [0.0f32; 3];
            let mut n = 0.0f32;
            for y in ty * factor..((ty + 1) * factor).min(h) {
                for x in tx * factor..((tx + 1) * factor).min(w) {
                    let p = frame.pixel(x, y);
                    for c in 0..3 {
                        acc[c] += p[c];
                    }
                    n += 1.0;
                }
            }
            data.extend(acc.map(|v| (v / n).clamp(0.0, 1.0)));
        }
    }
    Thumb {
        width: tw,
        height: th,
        data,
    }
}

/// A labeled grid: one column per sampled index, the clean frame above the degraded one.
pub fn contact_sheet(clean: &Clip, degraded: &Clip, indices: &[usize]) -> CliResult<Frame> {
    if clean.shape() != degraded.shape() {
        return Err(CoreError::ShapeMismatch(format!(
            "clean clip is {}, degraded clip is {}",
            clean.shape(),
            degraded.shape()
        ))
        .into());
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= clean.len()) {
        return Err(CliError::config(format!("frame {i} is outside the clip")));
    }
    let factor = clean.width().div_ceil(THUMB_MAX_WIDTH).max(1);
    let (tw, th) = (clean.width().div_ceil(factor), clean.height().div_ceil(factor));
    let width = GAP + indices.len() * (tw + GAP);
    let height = GAP + LABEL_HEIGHT + 2 * (th + GAP);
    let mut canvas = Canvas::new(width, height);
    for (col, &t) in indices.iter().enumerate() {
        let x = GAP + col * (tw + GAP);
        canvas.label(&t.to_string(), x, GAP, x + tw);
        let top = GAP + LABEL_HEIGHT;
        canvas.blit(&thumbnail(clean.frame(t), factor), x, top);
        canvas.blit(&thumbnail(degraded.frame(t), factor), x, top + th + GAP);
    }
    Ok(Frame::new(height, width, canvas.data).map_err(CoreError::from)?)
}

/// Writes a PNG contact sheet of `samples` uniformly spaced frames.
pub fn preview(cfg: &RunConfig) -> CliResult<Frame> {
    let clean = load_clip(cfg.require(&cfg.reference, "reference")?)?;
    let degraded = load_clip(cfg.require(&cfg.test, "test")?)?;
    let output = cfg.require(&cfg.output, "output")?;
    let indices = uniform_frame_indices(clean.len(), sample_count(cfg.samples, clean.len()))?;
    let sheet = with_pool(cfg.threads, || contact_sheet(&clean, &degraded, &indices))??;
    let mut out = BufWriter::new(File::create_new(output)?);
    encode_png_frame(&sheet, &mut out)?;
    out.flush()?;
    println!("seed: none (preview is deterministic)");
    println!(
        "preview: {} frames {:?}, {}x{} sheet written to {}",
        indices.len(),
        indices,
        sheet.width(),
        sheet.height(),
        output.display()
    );
    Ok(sheet)
}
