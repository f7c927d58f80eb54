//! View construction: one patch in, two raw (pre-augmentation) views out.
//!
//! Four policies cover the training variants: cross-modal single channel,
//! cross-modal three channel, fixed RGB vs SAR+spectral, and MS-only single
//! channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rasterstore::{Modality, RasterPatch};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    SingleChannel,
    ThreeChannel,
    RgbS1S2,
    MsOnlySingle,
}

impl PolicyKind {
    pub fn channels(self) -> usize {
        match self {
            PolicyKind::SingleChannel | PolicyKind::MsOnlySingle => 1,
            PolicyKind::ThreeChannel | PolicyKind::RgbS1S2 => 3,
        }
    }

    pub fn flag_name(self) -> &'static str {
        match self {
            PolicyKind::SingleChannel => "single",
            PolicyKind::ThreeChannel => "three",
            PolicyKind::RgbS1S2 => "rgb-s1s2",
            PolicyKind::MsOnlySingle => "ms-only",
        }
    }

    pub fn from_flag(s: &str) -> Option<Self> {
        match s {
            "single" => Some(PolicyKind::SingleChannel),
            "three" => Some(PolicyKind::ThreeChannel),
            "rgb-s1s2" => Some(PolicyKind::RgbS1S2),
            "ms-only" => Some(PolicyKind::MsOnlySingle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub kind: PolicyKind,
    /// MS band ids treated as R, G, B by the RgbS1S2 policy.
    pub rgb_band_ids: [u16; 3],
}

impl SamplingPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        SamplingPolicy {
            kind,
            rgb_band_ids: [2, 1, 0],
        }
    }

    fn validate_for(&self, patch: &RasterPatch) -> Result<()> {
        let ms = patch.ms_band_ids();
        let sar = patch.sar_band_ids();
        if ms.len() < 3 {
            return Err(Error::config(format!(
                "policy {:?} needs >= 3 MS bands, patch has {}",
                self.kind,
                ms.len()
            )));
        }
        let needs_sar = matches!(
            self.kind,
            PolicyKind::SingleChannel | PolicyKind::ThreeChannel | PolicyKind::RgbS1S2
        );
        if needs_sar && sar.is_empty() {
            return Err(Error::config(format!(
                "policy {:?} needs a SAR band, patch has none",
                self.kind
            )));
        }
        if self.kind == PolicyKind::RgbS1S2 {
            let [r, g, b] = self.rgb_band_ids;
            if r == g || g == b || r == b {
                return Err(Error::config("rgb_band_ids must be distinct"));
            }
            for id in self.rgb_band_ids {
                if !ms.contains(&id) {
                    return Err(Error::config(format!("rgb band id {id} is not an MS band")));
                }
            }
            if ms.len() < 5 {
                return Err(Error::config(
                    "rgb-s1s2 needs two non-RGB MS bands; patch has too few MS bands",
                ));
            }
        }
        Ok(())
    }
}

/// A selected channel: which band it came from and that band's modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedBand {
    pub band_id: u16,
    pub modality: Modality,
}

/// Full provenance of one draw; replaying it reproduces the views exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSelection {
    pub v1_band_ids: Vec<SelectedBand>,
    pub v2_band_ids: Vec<SelectedBand>,
    pub rng_seed: u64,
}

/// A raw view: `channels x H x W`, channels copied from the named bands.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

fn selected(patch: &RasterPatch, band_id: u16) -> SelectedBand {
    let idx = patch.band_index(band_id).expect("band id valid");
    SelectedBand {
        band_id,
        modality: patch.bands[idx].modality,
    }
}

fn materialize(patch: &RasterPatch, picks: &[SelectedBand]) -> View {
    let hw = patch.height * patch.width;
    let mut data = Vec::with_capacity(picks.len() * hw);
    for p in picks {
        let idx = patch.band_index(p.band_id).expect("band id valid");
        data.extend_from_slice(patch.band(idx));
    }
    View {
        channels: picks.len(),
        height: patch.height,
        width: patch.width,
        data,
    }
}

/// Draw the two raw views for a patch under a policy. Pure in
/// `(patch, policy, seed)`; the two views never alias storage.
pub fn sample_views(
    patch: &RasterPatch,
    policy: &SamplingPolicy,
    seed: u64,
) -> Result<(View, View, ViewSelection)> {
    policy.validate_for(patch)?;
    let ms = patch.ms_band_ids();
    let sar = patch.sar_band_ids();
    let mut rng = StreamRng::new(seed);

    let (v1_ids, v2_ids): (Vec<u16>, Vec<u16>) = match policy.kind {
        PolicyKind::SingleChannel => {
            let v1 = ms[rng.index(ms.len())];
            let v2 = sar[rng.index(sar.len())];
            (vec![v1], vec![v2])
        }
        PolicyKind::MsOnlySingle => {
            // Independent draws; coincidence allowed.
            let v1 = ms[rng.index(ms.len())];
            let v2 = ms[rng.index(ms.len())];
            (vec![v1], vec![v2])
        }
        PolicyKind::ThreeChannel => {
            let picks = rng.distinct_indices(ms.len(), 3);
            let v1: Vec<u16> = picks.iter().map(|&i| ms[i]).collect();
            // Both polarizations in random order, third a copy of either.
            let v2 = if sar.len() >= 2 {
                let first = rng.index(2);
                let (a, b) = (sar[first], sar[1 - first]);
                let dup = if rng.index(2) == 0 { a } else { b };
                vec![a, b, dup]
            } else {
                vec![sar[0], sar[0], sar[0]]
            };
            (v1, v2)
        }
        PolicyKind::RgbS1S2 => {
            let v1 = policy.rgb_band_ids.to_vec();
            let s = sar[rng.index(sar.len())];
            let non_rgb: Vec<u16> = ms
                .iter()
                .copied()
                .filter(|id| !policy.rgb_band_ids.contains(id))
                .collect();
            let picks = rng.distinct_indices(non_rgb.len(), 2);
            (v1, vec![s, non_rgb[picks[0]], non_rgb[picks[1]]])
        }
    };

    let selection = ViewSelection {
        v1_band_ids: v1_ids.iter().map(|&id| selected(patch, id)).collect(),
        v2_band_ids: v2_ids.iter().map(|&id| selected(patch, id)).collect(),
        rng_seed: seed,
    };
    let view1 = materialize(patch, &selection.v1_band_ids);
    let view2 = materialize(patch, &selection.v2_band_ids);
    Ok((view1, view2, selection))
}

/// Rebuild both views from recorded provenance.
pub fn views_from_selection(patch: &RasterPatch, selection: &ViewSelection) -> (View, View) {
    (
        materialize(patch, &selection.v1_band_ids),
        materialize(patch, &selection.v2_band_ids),
    )
}

/// A fixed band set used by evaluation, with a human-readable name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSet {
    pub name: String,
    pub band_ids: Vec<u16>,
}

/// Fixed evaluation band sets for a patch schema.
///
/// Single-channel policies probe every band as a singleton set. Three-channel
/// policies probe RGB, the three red-edge bands, and the SAR triple with the
/// first polarization duplicated — skipping sets the schema cannot supply.
pub fn enumerate_eval_bandsets(
    policy: &SamplingPolicy,
    schema: &[crate::rasterstore::BandMeta],
) -> Vec<BandSet> {
    let ms: Vec<u16> = schema
        .iter()
        .filter(|b| b.modality == Modality::Ms)
        .map(|b| b.band_id)
        .collect();
    let sar: Vec<u16> = schema
        .iter()
        .filter(|b| b.modality == Modality::Sar)
        .map(|b| b.band_id)
        .collect();
    match policy.kind.channels() {
        1 => {
            let mut sets = Vec::new();
            for &id in ms.iter().chain(&sar) {
                sets.push(BandSet {
                    name: crate::rasterstore::band_label(schema, id),
                    band_ids: vec![id],
                });
            }
            sets
        }
        _ => {
            let mut sets = Vec::new();
            if ms.len() >= 3 {
                sets.push(BandSet {
                    name: "RGB".to_string(),
                    band_ids: vec![ms[2], ms[1], ms[0]],
                });
            }
            if ms.len() >= 6 {
                sets.push(BandSet {
                    name: "RE5/6/7".to_string(),
                    band_ids: vec![ms[3], ms[4], ms[5]],
                });
            }
            if !sar.is_empty() {
                let s1 = sar[0];
                let s2 = *sar.get(1).unwrap_or(&sar[0]);
                sets.push(BandSet {
                    name: "SAR1/2/1".to_string(),
                    band_ids: vec![s1, s2, s1],
                });
            }
            sets
        }
    }
}
