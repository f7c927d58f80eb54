//! Synthetic multi-band dataset generator.
//!
//! Each patch is a partition of the frame into a background region plus up
//! to three overlaid shapes (ellipse, rectangle, half-plane slab), every
//! region carrying a class. MS bands render a per-class spectral signature
//! with additive Gaussian noise; SAR bands render a per-class level through
//! log1p with multiplicative mean-one Gamma speckle, so the two modalities
//! share geometry but differ in statistics.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{
    compute_band_stats, write_patch, BandMeta, DatasetManifest, Modality, RasterPatch, Split,
    SplitPaths,
};
use crate::error::{Error, Result};
use crate::rng::{domain, StreamRng};

/// Arguments echoed verbatim into the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorArgs {
    pub n_patches: usize,
    pub n_classes: usize,
    pub size: usize,
    pub n_ms: usize,
    pub n_sar: usize,
    pub seed: u64,
}

const MS_NOISE_SIGMA: f64 = 0.1;
const SPECKLE_SHAPE: f64 = 4.0;
const MIN_SIGNATURE_DIST: f64 = 0.5;
const MAX_REJECTIONS: usize = 1000;

// Overlay shapes stay small so the background region keeps a strict pixel
// majority: union of 3 shapes at <= 15% each is under half the frame.
const SHAPE_AREA_MIN: f64 = 0.04;
const SHAPE_AREA_MAX: f64 = 0.15;

fn validate(args: &GeneratorArgs) -> Result<()> {
    if args.n_patches < 1 {
        return Err(Error::config("n_patches must be >= 1; empty dataset refused"));
    }
    if !(2..=16).contains(&args.n_classes) {
        return Err(Error::config(format!(
            "n_classes {} outside [2, 16]",
            args.n_classes
        )));
    }
    if ![16, 32, 64].contains(&args.size) {
        return Err(Error::config(format!("size {} not in {{16, 32, 64}}", args.size)));
    }
    if args.n_ms < 3 {
        return Err(Error::config(format!("n_ms {} must be >= 3", args.n_ms)));
    }
    if !(1..=2).contains(&args.n_sar) {
        return Err(Error::config(format!("n_sar {} not in {{1, 2}}", args.n_sar)));
    }
    Ok(())
}

/// Class signatures in MS space, rejection-sampled for pairwise separation.
fn sample_signatures(args: &GeneratorArgs) -> Result<Vec<Vec<f64>>> {
    let mut rng = StreamRng::from_parts(&[args.seed, domain::CLASS_SIGNATURES]);
    let mut sigs: Vec<Vec<f64>> = Vec::with_capacity(args.n_classes);
    for _ in 0..args.n_classes {
        let mut attempts = 0;
        loop {
            let cand: Vec<f64> = (0..args.n_ms).map(|_| rng.unit_f64()).collect();
            let ok = sigs.iter().all(|s| {
                let d2: f64 = s.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() >= MIN_SIGNATURE_DIST
            });
            if ok {
                sigs.push(cand);
                break;
            }
            attempts += 1;
            if attempts >= MAX_REJECTIONS {
                return Err(Error::config(format!(
                    "could not separate {} class signatures in {} MS bands by {}",
                    args.n_classes, args.n_ms, MIN_SIGNATURE_DIST
                )));
            }
        }
    }
    Ok(sigs)
}

/// Per-(class, polarization) SAR backscatter levels, strictly positive.
fn sample_sar_levels(args: &GeneratorArgs) -> Vec<Vec<f64>> {
    let mut rng = StreamRng::from_parts(&[args.seed, domain::SAR_LEVELS]);
    (0..args.n_classes)
        .map(|_| (0..args.n_sar).map(|_| rng.range_f64(0.5, 4.0)).collect())
        .collect()
}

enum Shape {
    Ellipse { cx: f64, cy: f64, a: f64, b: f64 },
    Rect { top: f64, left: f64, h: f64, w: f64 },
    /// Half-plane `nx*x + ny*y <= c`, with `c` the exact area-fraction
    /// quantile of the projection over the frame.
    HalfPlane { nx: f64, ny: f64, c: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Ellipse { cx, cy, a, b } => {
                let dx = (x - cx) / a;
                let dy = (y - cy) / b;
                dx * dx + dy * dy <= 1.0
            }
            Shape::Rect { top, left, h, w } => {
                x >= left && x < left + w && y >= top && y < top + h
            }
            Shape::HalfPlane { nx, ny, c } => nx * x + ny * y <= c,
        }
    }
}

fn draw_shape(rng: &mut StreamRng, size: usize) -> Shape {
    let s = size as f64;
    let kind = rng.index(3);
    let frac = rng.range_f64(SHAPE_AREA_MIN, SHAPE_AREA_MAX);
    let area = frac * s * s;
    match kind {
        0 => {
            let aspect = rng.range_f64(0.5, 2.0);
            let a = (area * aspect / std::f64::consts::PI).sqrt();
            let b = area / (std::f64::consts::PI * a);
            let cx = rng.range_f64(0.15 * s, 0.85 * s);
            let cy = rng.range_f64(0.15 * s, 0.85 * s);
            Shape::Ellipse { cx, cy, a, b }
        }
        1 => {
            let aspect = rng.range_f64(0.5, 2.0);
            let w = (area * aspect).sqrt().min(s);
            let h = (area / w).min(s);
            let left = rng.range_f64(0.0, s - w);
            let top = rng.range_f64(0.0, s - h);
            Shape::Rect { top, left, h, w }
        }
        _ => {
            let phi = rng.range_f64(0.0, std::f64::consts::TAU);
            let (nx, ny) = (phi.cos(), phi.sin());
            // Exact quantile of the projection keeps slab area on target.
            let mut proj: Vec<f64> = Vec::with_capacity(size * size);
            for y in 0..size {
                for x in 0..size {
                    proj.push(nx * (x as f64 + 0.5) + ny * (y as f64 + 0.5));
                }
            }
            proj.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let k = ((frac * (size * size) as f64) as usize).min(proj.len() - 1);
            Shape::HalfPlane { nx, ny, c: proj[k] }
        }
    }
}

/// Paint the class label map for one patch. Returns `(label_map, majority)`.
fn paint_labels(args: &GeneratorArgs, patch_idx: usize) -> (Vec<u16>, u16) {
    let k = args.n_classes;
    // Background classes follow a per-block shuffled round-robin so the
    // dataset-level class distribution is uniform and tightly balanced.
    let block = (patch_idx / k) as u64;
    let mut sched = StreamRng::from_parts(&[args.seed, domain::CLASS_SCHEDULE, block]);
    let mut perm: Vec<u16> = (0..k as u16).collect();
    sched.shuffle(&mut perm);
    let background = perm[patch_idx % k];

    let mut rng = StreamRng::from_parts(&[args.seed, domain::PATCH_GEOMETRY, patch_idx as u64]);
    let n_shapes = rng.index(4); // 0..=3 overlays, 1–4 regions total
    let mut shapes: Vec<(Shape, u16)> = Vec::with_capacity(n_shapes);
    for _ in 0..n_shapes {
        let shape = draw_shape(&mut rng, args.size);
        // Shape classes are drawn among the non-background classes.
        let off = rng.index(k - 1) as u16;
        let class = if off >= background { off + 1 } else { off };
        shapes.push((shape, class));
    }

    let size = args.size;
    let mut labels = vec![background; size * size];
    for (shape, class) in &shapes {
        for y in 0..size {
            for x in 0..size {
                if shape.contains(x as f64 + 0.5, y as f64 + 0.5) {
                    labels[y * size + x] = *class;
                }
            }
        }
    }

    let mut counts = vec![0usize; k];
    for &l in &labels {
        counts[l as usize] += 1;
    }
    let majority = counts
        .iter()
        .enumerate()
        .max_by_key(|(i, &c)| (c, std::cmp::Reverse(*i)))
        .map(|(i, _)| i as u16)
        .unwrap();
    (labels, majority)
}

fn default_band_meta(n_ms: usize, n_sar: usize) -> Vec<BandMeta> {
    // For the canonical 10-band MS schema, resolutions follow the usual
    // 10m/20m split; otherwise the first three bands are 10m.
    const MS10_RES: [u16; 10] = [10, 10, 10, 20, 20, 20, 10, 20, 20, 20];
    let mut bands = Vec::with_capacity(n_ms + n_sar);
    for i in 0..n_ms {
        let res = if n_ms == 10 {
            MS10_RES[i]
        } else if i < 3 {
            10
        } else {
            20
        };
        bands.push(BandMeta {
            band_id: i as u16,
            modality: Modality::Ms,
            nominal_resolution_m: res,
        });
    }
    for j in 0..n_sar {
        bands.push(BandMeta {
            band_id: (n_ms + j) as u16,
            modality: Modality::Sar,
            nominal_resolution_m: 10,
        });
    }
    bands
}

fn render_patch(
    args: &GeneratorArgs,
    patch_idx: usize,
    signatures: &[Vec<f64>],
    sar_levels: &[Vec<f64>],
) -> RasterPatch {
    let size = args.size;
    let (labels, majority) = paint_labels(args, patch_idx);
    let mut noise = StreamRng::from_parts(&[args.seed, domain::PATCH_NOISE, patch_idx as u64]);

    let n_bands = args.n_ms + args.n_sar;
    let mut data = Vec::with_capacity(n_bands * size * size);
    for b in 0..args.n_ms {
        for &l in &labels {
            let v = signatures[l as usize][b] + MS_NOISE_SIGMA * noise.normal_f64();
            data.push(v as f32);
        }
    }
    for p in 0..args.n_sar {
        for &l in &labels {
            let level = sar_levels[l as usize][p];
            let v = level.ln_1p() * noise.speckle_f64(SPECKLE_SHAPE);
            data.push(v as f32);
        }
    }

    RasterPatch {
        bands: default_band_meta(args.n_ms, args.n_sar),
        height: size,
        width: size,
        data,
        label_map: Some(labels),
        class_label: Some(majority),
    }
}

/// Split boundaries: 50% pretrain, 25% probe_train, 25% probe_test.
/// Pretrain is never empty.
fn split_of(idx: usize, n: usize) -> Split {
    let a = (n + 1) / 2;
    let b = a + (n - a + 1) / 2;
    if idx < a {
        Split::Pretrain
    } else if idx < b {
        Split::ProbeTrain
    } else {
        Split::ProbeTest
    }
}

/// Generate the dataset under `out_dir` and write `manifest.json` there.
/// Bit-identical output for identical arguments.
pub fn generate_synthetic_dataset(out_dir: &Path, args: GeneratorArgs) -> Result<DatasetManifest> {
    validate(&args)?;
    let signatures = sample_signatures(&args)?;
    let sar_levels = sample_sar_levels(&args);

    let patches_dir = out_dir.join("patches");
    std::fs::create_dir_all(&patches_dir)?;

    let mut patch_paths = Vec::with_capacity(args.n_patches);
    let mut splits = SplitPaths::default();
    for idx in 0..args.n_patches {
        let patch = render_patch(&args, idx, &signatures, &sar_levels);
        let rel = format!("patches/p{idx:05}.rsp");
        write_patch(&patch, &out_dir.join(&rel))?;
        match split_of(idx, args.n_patches) {
            Split::Pretrain => splits.pretrain.push(rel.clone()),
            Split::ProbeTrain => splits.probe_train.push(rel.clone()),
            Split::ProbeTest => splits.probe_test.push(rel.clone()),
        }
        patch_paths.push(rel);
    }

    let mut manifest = DatasetManifest {
        patches: patch_paths,
        n_classes: args.n_classes,
        band_stats: Vec::new(),
        splits,
        generator: args,
    };
    manifest.band_stats = compute_band_stats(out_dir, &manifest, Split::Pretrain)?;
    manifest.save(&out_dir.join("manifest.json"))?;
    Ok(manifest)
}
