use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::protocol::{relative_gain, CropBox, Gain};
use crate::error::{Error, Result};

/// Metric id to score.
pub type CropScores = BTreeMap<String, f64>;

/// One detected crop and its externally computed quality scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarEntry {
    pub frame_index: usize,
    #[serde(rename = "box")]
    pub bbox: CropBox,
    pub scores: CropScores,
}

impl SidecarEntry {
    fn key(&self) -> (usize, [u64; 4]) {
        let b = self.bbox;
        (self.frame_index, [b.x, b.y, b.w, b.h].map(f64::to_bits))
    }
}

/// Parses a score sidecar: a JSON array of `{frame_index, box, scores}` objects.
pub fn parse_sidecar(text: &str) -> Result<Vec<SidecarEntry>> {
    let entries: Vec<SidecarEntry> = serde_json::from_str(text).map_err(|e| Error::Sidecar(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for e in &entries {
        let b = e.bbox;
        if ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) || b.w <= 0.0 || b.h <= 0.0 {
            return Err(Error::Sidecar(format!("frame {}: degenerate box {b:?}", e.frame_index)));
        }
        if let Some((id, v)) = e.scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sidecar(format!("frame {}: score {id} is {v}", e.frame_index)));
        }
        if !seen.insert(e.key()) {
            return Err(Error::Sidecar(format!("frame {}: duplicate box {b:?}", e.frame_index)));
        }
    }
    Ok(entries)
}

/// Input and output scores for the same `(frame_index, box)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedCrop {
    pub frame_index: usize,
    #[serde(rename = "box")]
    pub bbox: CropBox,
    pub score_in: CropScores,
    pub score_out: CropScores,
}

/// Matches input and output crops by `(frame_index, box)`; both files must hold the same keys and metric ids.
pub fn pair_sidecars(input: &[SidecarEntry], output: &[SidecarEntry]) -> Result<Vec<PairedCrop>> {
    let outputs: BTreeMap<_, &SidecarEntry> = output.iter().map(|e| (e.key(), e)).collect();
    if input.len() != output.len() {
        return Err(Error::Sidecar(format!(
            "input sidecar has {} crops, output has {}",
            input.len(),
            output.len()
        )));
    }
    input
        .iter()
        .map(|a| {
            let b = outputs.get(&a.key()).ok_or_else(|| {
                Error::Sidecar(format!("frame {}: box {:?} missing from output", a.frame_index, a.bbox))
            })?;
            if !a.scores.keys().eq(b.scores.keys()) {
                return Err(Error::Sidecar(format!(
                    "frame {}: metric ids differ between input and output",
                    a.frame_index
                )));
            }
            Ok(PairedCrop {
                frame_index: a.frame_index,
                bbox: a.bbox,
                score_in: a.scores.clone(),
                score_out: b.scores.clone(),
            })
        })
        .collect()
}

/// Relative gain per metric over the crops whose frame is in `frames`.
pub fn metric_gains(pairs: &[PairedCrop], frames: &[usize]) -> Result<BTreeMap<String, Gain>> {
    let wanted: BTreeSet<usize> = frames.iter().copied().collect();
    let mut series: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for p in pairs.iter().filter(|p| wanted.contains(&p.frame_index)) {
        for (id, &v) in &p.score_in {
            let slot = series.entry(id).or_default();
            slot.0.push(v);
            slot.1.push(p.score_out[id]);
        }
    }
    series
        .into_iter()
        .map(|(id, (a, b))| Ok((id.to_string(), relative_gain(&a, &b)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const INPUT: &str = r#"[
        {"frame_index": 0, "box": {"x": 10, "y": 10, "w": 100, "h": 50}, "scores": {"fiqa": 0.5, "sharp": 2.0}},
        {"frame_index": 3, "box": {"x": 1, "y": 2, "w": 3, "h": 4}, "scores": {"fiqa": 1.0, "sharp": 4.0}},
        {"frame_index": 5, "box": {"x": 1, "y": 2, "w": 3, "h": 4}, "scores": {"fiqa": 9.0, "sharp": 9.0}}
    ]"#;
    const OUTPUT: &str = r#"[
        {"frame_index": 3, "box": {"x": 1, "y": 2, "w": 3, "h": 4}, "scores": {"fiqa": 0.9, "sharp": 4.0}},
        {"frame_index": 0, "box": {"x": 10, "y": 10, "w": 100, "h": 50}, "scores": {"fiqa": 0.687, "sharp": 3.0}},
        {"frame_index": 5, "box": {"x": 1, "y": 2, "w": 3, "h": 4}, "scores": {"fiqa": 0.0, "sharp": 0.0}}
    ]"#;

    #[test]
    fn pairs_and_gains() {
        let pairs = pair_sidecars(&parse_sidecar(INPUT).unwrap(), &parse_sidecar(OUTPUT).unwrap()).unwrap();
        assert_eq!(pairs.len(), 3);
        let gains = metric_gains(&pairs, &[0, 3]).unwrap();
        assert!((gains["fiqa"].percent - (37.4 - 10.0) / 2.0).abs() < 1e-9);
        assert!((gains["sharp"].percent - 25.0).abs() < 1e-9);
        assert_eq!(gains["fiqa"].used, 2);
    }

    #[test]
    fn malformed_sidecars() {
        for bad in [
            "{}",
            "[{\"frame_index\": 0}]",
            "[{\"frame_index\": 0, \"box\": {\"x\": 0, \"y\": 0, \"w\": 0, \"h\": 1}, \"scores\": {}}]",
            "[{\"frame_index\": 0, \"box\": {\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}, \"scores\": {}, \"extra\": 1}]",
            "[{\"frame_index\": -1, \"box\": {\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}, \"scores\": {}}]",
        ] {
            assert!(matches!(parse_sidecar(bad), Err(Error::Sidecar(_))), "{bad}");
        }
        let dup = "[{\"frame_index\": 0, \"box\": {\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}, \"scores\": {}},\
                    {\"frame_index\": 0, \"box\": {\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}, \"scores\": {}}]";
        assert!(parse_sidecar(dup).is_err());
    }

    #[test]
    fn unpaired_crops_are_rejected() {
        let a = parse_sidecar(INPUT).unwrap();
        let mut b = parse_sidecar(OUTPUT).unwrap();
        b[0].bbox.x += 1.0;
        assert!(matches!(pair_sidecars(&a, &b), Err(Error::Sidecar(_))));
        assert!(pair_sidecars(&a, &b[..2]).is_err());
        let mut c = parse_sidecar(OUTPUT).unwrap();
        c[0].scores.remove("sharp");
        assert!(pair_sidecars(&a, &c).is_err());
    }
}
