//! Direct-summation reference implementations used to check the optimized
//! operators in `tempdeg-core`.
//!
//! Everything here works in `f64` on the clamp-extended image: a pixel
//! outside the frame takes the value of the nearest edge pixel.

use tempdeg_core::Frame;

/// Pixel `(x, y)` of the clamp-extended image.
pub fn extended_pixel(frame: &Frame, x: i64, y: i64) -> [f64; 3] {
    let xc = x.clamp(0, frame.width() as i64 - 1) as usize;
    let yc = y.clamp(0, frame.height() as i64 - 1) as usize;
    frame.pixel(xc, yc).map(f64::from)
}

/// Bilinear interpolation of the clamp-extended image at a real position.
pub fn extended_bilinear(frame: &Frame, x: f64, y: f64) -> [f64; 3] {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as i64, y0 as i64);
    let corners = [
        (xi, yi, (1.0 - fx) * (1.0 - fy)),
        (xi + 1, yi, fx * (1.0 - fy)),
        (xi, yi + 1, (1.0 - fx) * fy),
        (xi + 1, yi + 1, fx * fy),
    ];
    let mut out = [0.0; 3];
    for (cx, cy, w) in corners {
        let p = extended_pixel(frame, cx, cy);
        for c in 0..3 {
            out[c] += w * p[c];
        }
    }
    out
}

/// Motion blur as the mean of `⌈len⌉` unit-spaced bilinear samples along
/// `(cos θ, sin θ)`, centered on each output pixel. Row-major RGB.
pub fn blur_oracle(frame: &Frame, theta_deg: f64, len: f64) -> Vec<f64> {
    let n = len.ceil() as usize;
    let (sin, cos) = theta_deg.to_radians().sin_cos();
    let center = (n as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(frame.height() * frame.width() * 3);
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            let mut acc = [0.0; 3];
            for i in 0..n {
                let o = i as f64 - center;
                let p = extended_bilinear(frame, x as f64 + o * cos, y as f64 + o * sin);
                for c in 0..3 {
                    acc[c] += p[c];
                }
            }
            out.extend(acc.map(|v| v / n as f64));
        }
    }
    out
}

/// Backward warp `Y(u) = X(u + d(u))` for an interleaved `(dx, dy)` field. Row-major RGB.
pub fn warp_oracle(frame: &Frame, field: &[f32]) -> Vec<f64> {
    let w = frame.width();
    let mut out = Vec::with_capacity(frame.height() * w * 3);
    for y in 0..frame.height() {
        for x in 0..w {
            let k = (y * w + x) * 2;
            let (dx, dy) = (f64::from(field[k]), f64::from(field[k + 1]));
            out.extend(extended_bilinear(frame, x as f64 + dx, y as f64 + dy));
        }
    }
    out
}

/// Largest absolute difference between a frame and reference values.
pub fn max_abs_error(frame: &Frame, reference: &[f64]) -> f64 {
    assert_eq!(frame.data().len(), reference.len(), "size mismatch");
    frame
        .data()
        .iter()
        .zip(reference)
        .map(|(&a, &b)| (f64::from(a) - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_hits_lattice_points_and_clamps() {
        let f = Frame::from_fn(2, 3, |x, y| [x as f32 * 0.25, y as f32 * 0.5, 0.125]);
        assert_eq!(extended_bilinear(&f, 2.0, 1.0), [0.5, 0.5, 0.125]);
        assert_eq!(extended_bilinear(&f, -4.0, 7.5), extended_bilinear(&f, 0.0, 1.0));
        let mid = extended_bilinear(&f, 0.5, 0.5);
        assert!((mid[0] - 0.125).abs() < 1e-12 && (mid[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unit_blur_and_zero_warp_reproduce_the_frame() {
        let f = Frame::from_fn(3, 4, |x, y| [(x * y) as f32 / 6.0, 0.5, x as f32 / 3.0]);
        assert_eq!(max_abs_error(&f, &blur_oracle(&f, 37.0, 1.0)), 0.0);
        assert_eq!(max_abs_error(&f, &warp_oracle(&f, &[0.0; 24])), 0.0);
    }
}
