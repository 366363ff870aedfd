//! The stage-1 augmentation engine: mask-level copy-paste, rule-based
//! weather simulation, CutMix, and the weak/strong policies reused later
//! by test-time training.
//!
//! Copy-paste works in two directions. Task-related objects paste onto
//! task-unrelated backgrounds to vary context; task-unrelated distractors
//! paste onto task-related images to imitate occlusion, capped at a
//! fraction of the image area so the true object stays majority-visible.

pub mod pipeline;
pub mod policy;
pub mod weather;

pub use pipeline::{AugResources, BatchItem, Pipeline, PipelineSpec, StageSpec};
pub use policy::{apply_policy, AugPolicy, PolicyKind, WEAK_TRANSLATE_FRACTION};
pub use weather::{
    fog_blend_weight, glare_amplitude, sunshine_gain, weather, WeatherCondition, WeatherKind,
};

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    apply_color, composite, in_frame_weight, png, resize, resize_mask, warp_affine, AffineParams,
    ColorParams, Image, Mask,
};
use crate::rng::Stream;

/// A cut-out object: image, its foreground weights, and its class when the
/// class belongs to the task's label set.
#[derive(Debug, Clone)]
pub struct BankEntry {
    pub image: Image,
    pub mask: Mask,
    /// `Some` for task-related objects, `None` for task-unrelated ones.
    pub class_id: Option<usize>,
}

impl BankEntry {
    pub fn task_related(&self) -> bool {
        self.class_id.is_some()
    }
}

/// A collection of cut-out objects for copy-paste augmentation.
#[derive(Debug, Clone)]
pub struct ObjectBank {
    entries: Vec<BankEntry>,
    num_classes: usize,
    related: Vec<usize>,
    unrelated: Vec<usize>,
}

impl ObjectBank {
    pub fn new(entries: Vec<BankEntry>, num_classes: usize) -> Result<Self> {
        for (i, entry) in entries.iter().enumerate() {
            if entry.image.height() != entry.mask.height()
                || entry.image.width() != entry.mask.width()
            {
                return Err(Error::contract(format!(
                    "bank entry {i}: image and mask dimensions differ"
                )));
            }
            if entry.mask.total_weight() <= 0.0 {
                return Err(Error::contract(format!(
                    "bank entry {i}: empty cutout (mask has zero total weight)"
                )));
            }
            if let Some(c) = entry.class_id {
                if c >= num_classes {
                    return Err(Error::contract(format!(
                        "bank entry {i}: class id {c} outside [0, {num_classes})"
                    )));
                }
            }
        }
        let related = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.task_related())
            .map(|(i, _)| i)
            .collect();
        let unrelated = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.task_related())
            .map(|(i, _)| i)
            .collect();
        Ok(ObjectBank {
            entries,
            num_classes,
            related,
            unrelated,
        })
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn related_indices(&self) -> &[usize] {
        &self.related
    }

    pub fn unrelated_indices(&self) -> &[usize] {
        &self.unrelated
    }

    /// Persist as paired image/mask PNGs plus an index manifest.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut index = Vec::with_capacity(self.entries.len());
        for (i, entry) in self.entries.iter().enumerate() {
            let image = format!("obj_{i:05}.png");
            let mask = format!("obj_{i:05}_mask.png");
            png::write_image(dir.join(&image), &entry.image)?;
            png::write_mask(dir.join(&mask), &entry.mask)?;
            index.push(BankIndexEntry {
                image,
                mask,
                class_id: entry.class_id,
                task_related: entry.task_related(),
            });
        }
        let index = BankIndex {
            version: 1,
            num_classes: self.num_classes,
            entries: index,
        };
        let path = dir.join("index.json");
        let text = serde_json::to_string_pretty(&index).expect("bank index serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("index.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let index: BankIndex =
            serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
        let mut entries = Vec::with_capacity(index.entries.len());
        for rec in index.entries {
            entries.push(BankEntry {
                image: png::read_image(dir.join(&rec.image))?,
                mask: png::read_mask(dir.join(&rec.mask))?,
                class_id: rec.class_id,
            });
        }
        ObjectBank::new(entries, index.num_classes)
    }
}

#[derive(Serialize, Deserialize)]
struct BankIndex {
    version: u32,
    num_classes: usize,
    entries: Vec<BankIndexEntry>,
}

#[derive(Serialize, Deserialize)]
struct BankIndexEntry {
    image: String,
    mask: String,
    class_id: Option<usize>,
    task_related: bool,
}

/// Draw moderate affine jitter for copy-paste, scaled by `strength` in
/// [0, 1].
pub fn sample_affine(rng: &mut Stream, strength: f64) -> AffineParams {
    let s = strength;
    AffineParams {
        rotation: rng.random_range(-0.45..0.45) * s,
        scale_x: 1.0 + rng.random_range(-0.25..0.25) * s,
        scale_y: 1.0 + rng.random_range(-0.25..0.25) * s,
        shear: rng.random_range(-0.15..0.15) * s,
        translate_x: 0.0,
        translate_y: 0.0,
        flip_h: rng.random_bool(0.5 * s),
        flip_v: false,
    }
}

/// Draw moderate color jitter, scaled by `strength` in [0, 1].
pub fn sample_color(rng: &mut Stream, strength: f64) -> ColorParams {
    let s = strength;
    ColorParams {
        brightness_delta: rng.random_range(-0.15..0.15) * s,
        contrast_gain: 1.0 + rng.random_range(-0.3..0.4) * s,
        saturation_gain: 1.0 + rng.random_range(-0.3..0.4) * s,
        hue_shift: rng.random_range(-0.35..0.35) * s,
    }
}

fn prepare_object(
    entry: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
) -> Result<(Image, Mask)> {
    let (img, mask) = warp_affine(&entry.image, &entry.mask, affine)?;
    Ok((apply_color(&img, color)?, mask))
}

/// Paste a task-related object at an explicit offset onto a background.
/// Deterministic inner form of [`copy_paste_context`].
pub fn copy_paste_context_at(
    bg: &Image,
    obj: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    offset: (i64, i64),
) -> Result<(Image, usize)> {
    let class = obj
        .class_id
        .ok_or_else(|| Error::contract("context paste requires a task-related object"))?;
    let (img, mask) = prepare_object(obj, affine, color)?;
    Ok((composite(&img, &mask, bg, offset)?, class))
}

/// Copy the foreground weights into a zeroed background-sized mask at the
/// paste offset, tracking where the object landed.
fn place_mask(mask: &Mask, bg_h: usize, bg_w: usize, offset: (i64, i64)) -> Mask {
    let mut placed = Mask::from_parts(bg_h, bg_w, vec![0.0; bg_h * bg_w]);
    for fy in 0..mask.height() {
        let by = fy as i64 + offset.0;
        if by < 0 || by >= bg_h as i64 {
            continue;
        }
        for fx in 0..mask.width() {
            let bx = fx as i64 + offset.1;
            if bx < 0 || bx >= bg_w as i64 {
                continue;
            }
            placed.set(by as usize, bx as usize, mask.get(fy, fx));
        }
    }
    placed
}

/// Context paste that also returns the object's mask placed in the output
/// frame, for callers that keep tracking the foreground.
pub(crate) fn context_paste_placed(
    bg_pool_unrelated: &[Image],
    obj: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    rng: &mut Stream,
) -> Result<(Image, Mask, usize)> {
    if bg_pool_unrelated.is_empty() {
        return Err(Error::config(
            "augment.backgrounds",
            "empty task-unrelated background pool",
        ));
    }
    let class = obj
        .class_id
        .ok_or_else(|| Error::contract("context paste requires a task-related object"))?;
    let (img, mask) = prepare_object(obj, affine, color)?;
    let bg = &bg_pool_unrelated[rng.random_range(0..bg_pool_unrelated.len())];
    let total = mask.total_weight();
    let (bh, bw) = (bg.height() as i64, bg.width() as i64);
    let (fh, fw) = (mask.height() as i64, mask.width() as i64);
    let mut offset = ((bh - fh) / 2, (bw - fw) / 2);
    if total > 0.0 {
        for _ in 0..32 {
            let cand = (
                rng.random_range(-fh / 2..=bh - fh / 2),
                rng.random_range(-fw / 2..=bw - fw / 2),
            );
            if in_frame_weight(&mask, bg.height(), bg.width(), cand) >= 0.5 * total {
                offset = cand;
                break;
            }
        }
    }
    let out = composite(&img, &mask, bg, offset)?;
    let placed = place_mask(&mask, bg.height(), bg.width(), offset);
    Ok((out, placed, class))
}

/// Paste a task-related object onto a random task-unrelated background at
/// a uniformly drawn offset keeping at least half the object's mask weight
/// in frame. Returns the composite and the object's class.
pub fn copy_paste_context(
    bg_pool_unrelated: &[Image],
    obj: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    rng: &mut Stream,
) -> Result<(Image, usize)> {
    context_paste_placed(bg_pool_unrelated, obj, affine, color, rng)
        .map(|(img, _, class)| (img, class))
}

/// Deterministic inner form of [`copy_paste_occlusion`].
pub fn copy_paste_occlusion_at(
    base: (&Image, usize),
    distractor: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    coverage_cap: f64,
    offset: (i64, i64),
) -> Result<(Image, usize)> {
    let (img, mask) = prepare_occluder(base.0, distractor, affine, color, coverage_cap)?;
    Ok((composite(&img, &mask, base.0, offset)?, base.1))
}

/// Paste a task-unrelated distractor onto a task-related image so that its
/// in-frame mask weight covers at most `coverage_cap` of the image area.
/// The label is unchanged.
pub fn copy_paste_occlusion(
    base: (&Image, usize),
    distractor: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    coverage_cap: f64,
    rng: &mut Stream,
) -> Result<(Image, usize)> {
    let (img, mask) = prepare_occluder(base.0, distractor, affine, color, coverage_cap)?;
    let (bh, bw) = (base.0.height() as i64, base.0.width() as i64);
    let (fh, fw) = (mask.height() as i64, mask.width() as i64);
    let offset = (
        rng.random_range(-fh / 2..=bh - fh / 2),
        rng.random_range(-fw / 2..=bw - fw / 2),
    );
    Ok((composite(&img, &mask, base.0, offset)?, base.1))
}

/// Warp and jitter the distractor, then shrink it until its total mask
/// weight fits under `coverage_cap` of the base area.
fn prepare_occluder(
    base: &Image,
    distractor: &BankEntry,
    affine: &AffineParams,
    color: &ColorParams,
    coverage_cap: f64,
) -> Result<(Image, Mask)> {
    if distractor.task_related() {
        return Err(Error::contract(
            "occlusion paste requires a task-unrelated distractor",
        ));
    }
    if !(coverage_cap > 0.0 && coverage_cap <= 0.6) {
        return Err(Error::contract(format!(
            "coverage_cap {coverage_cap} outside (0, 0.6]"
        )));
    }
    let (mut img, mut mask) = prepare_object(distractor, affine, color)?;
    let budget = coverage_cap * (base.height() * base.width()) as f64;
    let weight = mask.total_weight();
    if weight > budget {
        let f = (budget / weight).sqrt();
        let nh = ((mask.height() as f64 * f).round() as usize).max(crate::imaging::MIN_SIDE);
        let nw = ((mask.width() as f64 * f).round() as usize).max(crate::imaging::MIN_SIDE);
        img = resize(&img, nh, nw)?;
        mask = resize_mask(&mask, nh, nw)?;
        // Rounding can leave the shrunk mask slightly over budget; finish
        // with an exact weight scale.
        let weight = mask.total_weight();
        if weight > budget {
            let scale = (budget / weight) as f32;
            mask = Mask::from_parts(
                mask.height(),
                mask.width(),
                mask.data().iter().map(|&v| v * scale).collect(),
            );
        }
    }
    Ok((img, mask))
}

/// CutMix parameters; `alpha` shapes the Beta draw for the mixing ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutMixParams {
    pub alpha: f64,
    pub rng_seed: u64,
}

impl Default for CutMixParams {
    fn default() -> Self {
        CutMixParams {
            alpha: 1.0,
            rng_seed: 0,
        }
    }
}

/// Replace a rectangle of `a` with the same region of `b`; the mixed label
/// reflects the surviving area exactly. Deterministic inner form of
/// [`cutmix`] with an explicit ratio and rectangle center.
pub fn cutmix_at(
    a: (&Image, &[f64]),
    b: (&Image, &[f64]),
    lambda: f64,
    center: (usize, usize),
) -> Result<(Image, Vec<f64>)> {
    let (img_a, label_a) = a;
    let (img_b, label_b) = b;
    if img_a.height() != img_b.height() || img_a.width() != img_b.width() {
        return Err(Error::contract("cutmix requires equal image dimensions"));
    }
    if label_a.len() != label_b.len() {
        return Err(Error::contract("cutmix requires equal label lengths"));
    }
    let (h, w) = (img_a.height(), img_a.width());
    let cut = (1.0 - lambda.clamp(0.0, 1.0)).sqrt();
    let rh = (cut * h as f64).round() as i64;
    let rw = (cut * w as f64).round() as i64;
    let (cy, cx) = (center.0 as i64, center.1 as i64);
    let y0 = (cy - rh / 2).clamp(0, h as i64);
    let y1 = (cy - rh / 2 + rh).clamp(0, h as i64);
    let x0 = (cx - rw / 2).clamp(0, w as i64);
    let x1 = (cx - rw / 2 + rw).clamp(0, w as i64);
    let mut out = img_a.clone();
    for y in y0..y1 {
        for x in x0..x1 {
            for c in 0..crate::imaging::CHANNELS {
                out.set(y as usize, x as usize, c, img_b.get(y as usize, x as usize, c));
            }
        }
    }
    let area = ((y1 - y0) * (x1 - x0)) as f64;
    let lam_actual = 1.0 - area / (h * w) as f64;
    let label = label_a
        .iter()
        .zip(label_b)
        .map(|(la, lb)| lam_actual * la + (1.0 - lam_actual) * lb)
        .collect();
    Ok((out, label))
}

/// Mix two labeled images by pasting a Beta-drawn rectangle of `b` into
/// `a`. The mixed label uses the realized (clipped) rectangle area.
pub fn cutmix(
    a: (&Image, &[f64]),
    b: (&Image, &[f64]),
    params: &CutMixParams,
) -> Result<(Image, Vec<f64>)> {
    if params.alpha <= 0.0 {
        return Err(Error::contract(format!(
            "cutmix alpha {} must be positive",
            params.alpha
        )));
    }
    let mut rng = <Stream as rand::SeedableRng>::seed_from_u64(params.rng_seed);
    let beta = Beta::new(params.alpha, params.alpha).expect("positive alpha");
    let lambda: f64 = beta.sample(&mut rng);
    let center = (
        rng.random_range(0..a.0.height()),
        rng.random_range(0..a.0.width()),
    );
    cutmix_at(a, b, lambda, center)
}
