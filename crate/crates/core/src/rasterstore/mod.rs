//! Raster patch data model, on-disk formats, per-band statistics, and the
//! synthetic multi-band dataset generator.

mod format;
mod stats;
mod synth;

pub use format::{read_patch, write_patch};
pub use stats::{compute_band_stats, normalize};
pub use synth::{generate_synthetic_dataset, GeneratorArgs};

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Sensor modality of a single band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    Ms,
    Sar,
}

impl Modality {
    pub fn code(self) -> u8 {
        match self {
            Modality::Ms => 0,
            Modality::Sar => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Modality::Ms),
            1 => Some(Modality::Sar),
            _ => None,
        }
    }
}

/// Per-band metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandMeta {
    pub band_id: u16,
    pub modality: Modality,
    pub nominal_resolution_m: u16,
}

/// One multi-band image patch, the unit of training data.
///
/// `data` is band-major `B x H x W`, row-major within a band.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterPatch {
    pub bands: Vec<BandMeta>,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
    pub label_map: Option<Vec<u16>>,
    pub class_label: Option<u16>,
}

impl RasterPatch {
    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let len = self.height * self.width;
        &self.data[b * len..(b + 1) * len]
    }

    pub fn band_mut(&mut self, b: usize) -> &mut [f32] {
        let len = self.height * self.width;
        &mut self.data[b * len..(b + 1) * len]
    }

    pub fn ms_band_ids(&self) -> Vec<u16> {
        self.bands
            .iter()
            .filter(|b| b.modality == Modality::Ms)
            .map(|b| b.band_id)
            .collect()
    }

    pub fn sar_band_ids(&self) -> Vec<u16> {
        self.bands
            .iter()
            .filter(|b| b.modality == Modality::Sar)
            .map(|b| b.band_id)
            .collect()
    }

    /// Index into `bands` for a given band id.
    pub fn band_index(&self, band_id: u16) -> Option<usize> {
        self.bands.iter().position(|b| b.band_id == band_id)
    }

    /// Check the structural invariants; used on write and after ingest.
    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.n_bands() * self.height * self.width {
            return Err(Error::shape(format!(
                "data length {} does not match {} bands x {} x {}",
                self.data.len(),
                self.n_bands(),
                self.height,
                self.width
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &self.bands {
            if !seen.insert(b.band_id) {
                return Err(Error::shape(format!("duplicate band_id {}", b.band_id)));
            }
        }
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite pixel at flat index {i}")));
        }
        if let Some(lm) = &self.label_map {
            if lm.len() != self.height * self.width {
                return Err(Error::shape(format!(
                    "label_map length {} does not match {}x{}",
                    lm.len(),
                    self.height,
                    self.width
                )));
            }
        }
        Ok(())
    }
}

/// Per-band first moments used for z-score normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandStat {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Pretrain,
    ProbeTrain,
    ProbeTest,
}

/// Patch paths of the three disjoint splits, relative to the manifest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SplitPaths {
    pub pretrain: Vec<String>,
    pub probe_train: Vec<String>,
    pub probe_test: Vec<String>,
}

impl SplitPaths {
    pub fn get(&self, split: Split) -> &[String] {
        match split {
            Split::Pretrain => &self.pretrain,
            Split::ProbeTrain => &self.probe_train,
            Split::ProbeTest => &self.probe_test,
        }
    }
}

/// Dataset index: patch paths, class count, normalization stats, splits,
/// and an echo of the generator arguments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub patches: Vec<String>,
    pub n_classes: usize,
    pub band_stats: Vec<BandStat>,
    pub splits: SplitPaths,
    pub generator: GeneratorArgs,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: DatasetManifest = serde_json::from_str(&text)?;
        for s in &m.band_stats {
            if s.std <= 0.0 {
                return Err(Error::config(format!("band std {} must be > 0", s.std)));
            }
        }
        Ok(m)
    }

    /// Resolve a manifest-relative patch path against the manifest directory.
    pub fn resolve(&self, root: &Path, rel: &str) -> PathBuf {
        root.join(rel)
    }
}

/// Human-readable band labels for the default 10 MS + 2 SAR schema.
pub fn band_label(bands: &[BandMeta], band_id: u16) -> String {
    const MS10: [&str; 10] = [
        "Blue", "Green", "Red", "RE5", "RE6", "RE7", "NIR", "NNIR", "SWIR1", "SWIR2",
    ];
    let n_ms = bands.iter().filter(|b| b.modality == Modality::Ms).count();
    match bands.iter().find(|b| b.band_id == band_id) {
        Some(meta) if meta.modality == Modality::Ms => {
            if n_ms == 10 {
                MS10[band_id as usize].to_string()
            } else {
                format!("MS{band_id}")
            }
        }
        Some(meta) => {
            let sar_rank = bands
                .iter()
                .filter(|b| b.modality == Modality::Sar && b.band_id < meta.band_id)
                .count();
            format!("SAR{}", sar_rank + 1)
        }
        None => format!("B{band_id}"),
    }
}
