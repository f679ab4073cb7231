//! Procedural test clips: a color gradient under panning multi-octave value
//! noise whose amplitude falls with frequency, plus faint stripes. All seeded.

use rayon::prelude::*;

use crate::clip::{Clip, ClipShape, Frame};
use crate::error::{Error, Result};
use crate::trajectory::{derive_stream, smoothstep, Stream};

struct Octave {
    cell: f64,
    amplitude: f32,
    cols: usize,
    values: Vec<[f32; 3]>,
}

impl Octave {
    fn new(stream: &mut Stream, cell: f64, amplitude: f32, height: usize, reach: f64) -> Self {
        let cols = (reach / cell).ceil() as usize + 2;
        let rows = ((height as f64 + reach) / cell).ceil() as usize + 2;
        let values = (0..rows * cols)
            .map(|_| [(); 3].map(|_| stream.next_unit() as f32 - 0.5))
            .collect();
        Self {
            cell,
            amplitude,
            cols,
            values,
        }
    }

    fn sample(&self, x: f64, y: f64) -> [f32; 3] {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let (i, j) = (gx.floor() as usize, gy.floor() as usize);
        let (fx, fy) = (smoothstep(gx - i as f64) as f32, smoothstep(gy - j as f64) as f32);
        let at = |r: usize, c: usize| self.values[r * self.cols + c];
        let (a, b, c, d) = (at(j, i), at(j, i + 1), at(j + 1, i), at(j + 1, i + 1));
        let mut out = [0.0; 3];
        for k in 0..3 {
            let top = a[k] + (b[k] - a[k]) * fx;
            let bottom = c[k] + (d[k] - c[k]) * fx;
            out[k] = self.amplitude * (top + (bottom - top) * fy);
        }
        out
    }
}

/// A deterministic textured clip that pans by a seeded velocity each frame.
pub fn synthetic_clip(seed: u64, shape: ClipShape) -> Result<Clip> {
    let ClipShape {
        frames,
        height,
        width,
    } = shape;
    if frames == 0 || height == 0 || width == 0 {
        return Err(Error::param(format!("degenerate synthetic shape {shape}")));
    }
    let mut stream = derive_stream(seed, 0, "synth");
    let vx = stream.uniform(0.5, 2.0);
    let vy = stream.uniform(0.25, 1.0);
    let stripe_period = stream.uniform(5.0, 9.0);
    let stripe_angle = stream.uniform(0.0, std::f64::consts::PI);
    let tint = [(); 3].map(|_| stream.uniform(0.3, 0.7) as f32);
    let reach = width as f64 + (vx + vy) * frames as f64;
    let octaves = [(96.0, 0.6), (32.0, 0.3), (12.0, 0.15), (5.0, 0.08)]
        .map(|(cell, amplitude)| Octave::new(&mut stream, cell, amplitude, height, reach));
    let (sa, ca) = stripe_angle.sin_cos();
    let frames = (0..frames)
        .into_par_iter()
        .map(|t| {
            let (ox, oy) = (vx * t as f64, vy * t as f64);
            Frame::from_fn(height, width, |x, y| {
                let (px, py) = (x as f64 + ox, y as f64 + oy);
                let phase = (px * ca + py * sa) / stripe_period * std::f64::consts::TAU;
                let stripe = 0.03 * phase.sin() as f32;
                let ramp = 0.25 * (x as f32 / width as f32 - 0.5);
                let mut rgb = [0.0f32; 3];
                for (k, v) in rgb.iter_mut().enumerate() {
                    *v = tint[k] + ramp + stripe;
                }
                for o in &octaves {
                    let n = o.sample(px, py);
                    for k in 0..3 {
                        rgb[k] += n[k];
                    }
                }
                rgb
            })
        })
        .collect();
    Ok(Clip::new(frames)?)
}
