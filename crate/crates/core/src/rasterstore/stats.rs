//! Per-band normalization statistics and z-score application.

use std::path::Path;

use super::{read_patch, BandStat, DatasetManifest, RasterPatch, Split};
use crate::error::{Error, Result};

const STD_FLOOR: f64 = 1e-6;

/// Streaming mean/std over all pixels of each band across a split.
/// Accumulation is in f64; population variance; std floored at 1e-6.
pub fn compute_band_stats(
    root: &Path,
    manifest: &DatasetManifest,
    split: Split,
) -> Result<Vec<BandStat>> {
    let paths = manifest.splits.get(split);
    if paths.is_empty() {
        return Err(Error::config(format!("split {split:?} is empty")));
    }
    let mut sums: Vec<f64> = Vec::new();
    let mut sumsqs: Vec<f64> = Vec::new();
    let mut count = 0u64;
    for rel in paths {
        let patch = read_patch(&root.join(rel))?;
        if sums.is_empty() {
            sums = vec![0.0; patch.n_bands()];
            sumsqs = vec![0.0; patch.n_bands()];
        } else if sums.len() != patch.n_bands() {
            return Err(Error::shape(format!(
                "patch {rel} has {} bands, expected {}",
                patch.n_bands(),
                sums.len()
            )));
        }
        for b in 0..patch.n_bands() {
            for &v in patch.band(b) {
                sums[b] += v as f64;
                sumsqs[b] += (v as f64) * (v as f64);
            }
        }
        count += (patch.height * patch.width) as u64;
    }
    Ok(sums
        .iter()
        .zip(&sumsqs)
        .map(|(&s, &s2)| {
            let mean = s / count as f64;
            let var = (s2 / count as f64 - mean * mean).max(0.0);
            BandStat {
                mean,
                std: var.sqrt().max(STD_FLOOR),
            }
        })
        .collect())
}

/// Per-band z-score: `(x - mean_b) / std_b`.
pub fn normalize(patch: &RasterPatch, band_stats: &[BandStat]) -> Result<RasterPatch> {
    if band_stats.len() != patch.n_bands() {
        return Err(Error::shape(format!(
            "{} band stats for {} bands",
            band_stats.len(),
            patch.n_bands()
        )));
    }
    let mut out = patch.clone();
    for b in 0..patch.n_bands() {
        let BandStat { mean, std } = band_stats[b];
        for v in out.band_mut(b) {
            *v = ((*v as f64 - mean) / std) as f32;
        }
    }
    Ok(out)
}
