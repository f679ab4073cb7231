use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Global parameter bounds every preset must respect.
pub mod bounds {
    /// Blur kernel length, pixels.
    pub const BLUR_LENGTH_PX: (f64, f64) = (3.0, 20.0);
    /// Side of an `n x n` warp control grid.
    pub const GRID_POINTS: (usize, usize) = (4, 12);
    /// Warp amplitude as a fraction of `min(H, W)`.
    pub const WARP_AMPLITUDE: (f64, f64) = (0.05, 0.3);
    pub const MORPH_STRENGTH_MAX: f64 = 0.6;
    pub const TEMPORAL_FACTOR: (f64, f64) = (1.5, 3.5);
}

/// Named strength tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Light,
    Medium,
    Strong,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Light, Preset::Medium, Preset::Strong];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Light => "light",
            Preset::Medium => "medium",
            Preset::Strong => "strong",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "light" => Ok(Preset::Light),
            "medium" => Ok(Preset::Medium),
            "strong" => Ok(Preset::Strong),
            other => Err(Error::Param(format!(
                "unknown preset {other:?} (expected light, medium or strong)"
            ))),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        lo <= self.lo && self.lo <= self.hi && self.hi <= hi
    }
}

/// Parameter table for one preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetSpec {
    pub temporal_op_count: usize,
    pub blur_length_px: Range,
    /// Half-width of the orientation wobble around a random base angle, degrees.
    pub blur_wobble_deg: f64,
    /// Inclusive range of `n` for an `n x n` warp control grid.
    pub grid_points: (usize, usize),
    pub warp_amplitude: Range,
    pub morph_strength: Range,
    pub p_drop: Range,
    pub max_run: usize,
    pub s_temp: Range,
    pub s_spat: Range,
    /// Box-filter width applied to every smooth trajectory.
    pub smooth_window: usize,
    /// Sinusoid cycles per clip for blur length and morph weight.
    pub sinusoid_cycles: f64,
    /// Lattice knots for the blur orientation trajectory.
    pub lattice_points: usize,
}

impl PresetSpec {
    /// Names every field that leaves the global bounds.
    pub fn global_bound_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (blo, bhi) = bounds::BLUR_LENGTH_PX;
        if !self.blur_length_px.within(blo, bhi) {
            out.push(format!("blur length {:?} outside [{blo}, {bhi}]", self.blur_length_px));
        }
        let (glo, ghi) = bounds::GRID_POINTS;
        let (g0, g1) = self.grid_points;
        if !(glo <= g0 && g0 <= g1 && g1 <= ghi) {
            out.push(format!("grid {g0}..{g1} outside {glo}..{ghi}"));
        }
        let (alo, ahi) = bounds::WARP_AMPLITUDE;
        if !self.warp_amplitude.within(alo, ahi) {
            out.push(format!("warp amplitude {:?} outside [{alo}, {ahi}]", self.warp_amplitude));
        }
        if !self.morph_strength.within(0.0, bounds::MORPH_STRENGTH_MAX) {
            out.push(format!("morph strength {:?} above {}", self.morph_strength, bounds::MORPH_STRENGTH_MAX));
        }
        let (tlo, thi) = bounds::TEMPORAL_FACTOR;
        if !self.s_temp.within(tlo, thi) {
            out.push(format!("temporal factor {:?} outside [{tlo}, {thi}]", self.s_temp));
        }
        if !self.p_drop.within(0.0, 0.999) {
            out.push(format!("drop probability {:?} outside [0, 1)", self.p_drop));
        }
        if self.s_spat.lo < 1.0 {
            out.push(format!("spatial factor {:?} below 1", self.s_spat));
        }
        out
    }
}

/// The built-in parameter table for `preset`.
pub fn preset_spec(preset: Preset) -> PresetSpec {
    let common = |temporal_op_count, blur, grid, amp, morph, p_drop, max_run, s_temp, s_spat| PresetSpec {
        temporal_op_count,
        blur_length_px: blur,
        blur_wobble_deg: 30.0,
        grid_points: grid,
        warp_amplitude: amp,
        morph_strength: morph,
        p_drop,
        max_run,
        s_temp,
        s_spat,
        smooth_window: 5,
        sinusoid_cycles: 1.0,
        lattice_points: 4,
    };
    match preset {
        Preset::Light => common(
            2,
            Range::new(3.0, 8.0),
            (12, 12),
            Range::new(0.05, 0.12),
            Range::new(0.05, 0.2),
            Range::new(0.02, 0.05),
            1,
            Range::new(1.5, 2.0),
            Range::new(1.25, 1.5),
        ),
        Preset::Medium => common(
            3,
            Range::new(6.0, 14.0),
            (8, 8),
            Range::new(0.10, 0.20),
            Range::new(0.15, 0.40),
            Range::new(0.05, 0.10),
            2,
            Range::new(2.0, 2.8),
            Range::new(1.5, 2.0),
        ),
        Preset::Strong => common(
            4,
            Range::new(10.0, 20.0),
            (4, 6),
            Range::new(0.20, 0.30),
            Range::new(0.30, 0.60),
            Range::new(0.10, 0.20),
            3,
            Range::new(2.8, 3.5),
            Range::new(2.0, 2.5),
        ),
    }
}
