//! The synthetic benchmark: a C-class shape dataset with ground-truth
//! masks, an in-distribution test split, and six out-of-distribution test
//! splits that each perturb exactly one nuisance factor — shape geometry,
//! pose, context (background), texture (fill), occlusion, or weather.
//!
//! Generation is deterministic per (seed, split, index), so parallel and
//! sequential passes produce identical datasets, and splits draw from
//! disjoint seed streams.

pub mod io;
pub mod shapes;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::augment::{BankEntry, ObjectBank, WeatherCondition, WeatherKind};
use crate::error::{Error, Result};
use crate::exec;
use crate::imaging::{Image, Mask, CHANNELS, MIN_SIDE};
use crate::rng::{self, Stream};
use shapes::{
    blob_polygon, class_polygon, render_polygon, render_texture, render_texture_blend,
    texture_at, transform_polygon, Placement, Texture, NO_WOBBLE,
};

/// The six nuisance factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nuisance {
    Shape,
    Pose,
    Context,
    Texture,
    Occlusion,
    Weather,
}

impl Nuisance {
    pub const ALL: [Nuisance; 6] = [
        Nuisance::Shape,
        Nuisance::Pose,
        Nuisance::Context,
        Nuisance::Texture,
        Nuisance::Occlusion,
        Nuisance::Weather,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Nuisance::Shape => "shape",
            Nuisance::Pose => "pose",
            Nuisance::Context => "context",
            Nuisance::Texture => "texture",
            Nuisance::Occlusion => "occlusion",
            Nuisance::Weather => "weather",
        }
    }
}

/// Split tag carried by every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SampleTag {
    Iid,
    Shape,
    Pose,
    Context,
    Texture,
    Occlusion,
    Weather,
}

impl From<Nuisance> for SampleTag {
    fn from(n: Nuisance) -> Self {
        match n {
            Nuisance::Shape => SampleTag::Shape,
            Nuisance::Pose => SampleTag::Pose,
            Nuisance::Context => SampleTag::Context,
            Nuisance::Texture => SampleTag::Texture,
            Nuisance::Occlusion => SampleTag::Occlusion,
            Nuisance::Weather => SampleTag::Weather,
        }
    }
}

/// Per-nuisance perturbation magnitude in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NuisanceStrengths {
    pub shape: f64,
    pub pose: f64,
    pub context: f64,
    pub texture: f64,
    pub occlusion: f64,
    pub weather: f64,
}

impl Default for NuisanceStrengths {
    fn default() -> Self {
        NuisanceStrengths {
            shape: 0.9,
            pose: 0.9,
            context: 0.9,
            texture: 0.9,
            occlusion: 0.9,
            weather: 0.9,
        }
    }
}

impl NuisanceStrengths {
    pub fn uniform(s: f64) -> Self {
        NuisanceStrengths {
            shape: s,
            pose: s,
            context: s,
            texture: s,
            occlusion: s,
            weather: s,
        }
    }

    pub fn get(&self, n: Nuisance) -> f64 {
        match n {
            Nuisance::Shape => self.shape,
            Nuisance::Pose => self.pose,
            Nuisance::Context => self.context,
            Nuisance::Texture => self.texture,
            Nuisance::Occlusion => self.occlusion,
            Nuisance::Weather => self.weather,
        }
    }
}

fn default_num_classes() -> usize {
    5
}
fn default_image_side() -> usize {
    32
}
fn default_train_size() -> usize {
    2000
}
fn default_test_size() -> usize {
    500
}

/// Benchmark recipe: sizes, seed, and shift strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "default_num_classes")]
    pub num_classes: usize,
    #[serde(default = "default_image_side")]
    pub image_side: usize,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size_per_split: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub nuisance_strengths: NuisanceStrengths,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            num_classes: default_num_classes(),
            image_side: default_image_side(),
            train_size: default_train_size(),
            test_size_per_split: default_test_size(),
            rng_seed: 0,
            nuisance_strengths: NuisanceStrengths::default(),
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=shapes::CLASS_NAMES.len()).contains(&self.num_classes) {
            return Err(Error::config(
                "benchmark.num_classes",
                format!(
                    "{} outside [2, {}]",
                    self.num_classes,
                    shapes::CLASS_NAMES.len()
                ),
            ));
        }
        if self.image_side < MIN_SIDE {
            return Err(Error::config(
                "benchmark.image_side",
                format!("{} below minimum side {MIN_SIDE}", self.image_side),
            ));
        }
        for (field, size) in [
            ("benchmark.train_size", self.train_size),
            ("benchmark.test_size_per_split", self.test_size_per_split),
        ] {
            if size == 0 || size % self.num_classes != 0 {
                return Err(Error::config(
                    field,
                    format!(
                        "{size} must be a positive multiple of num_classes so splits stay balanced"
                    ),
                ));
            }
        }
        for n in Nuisance::ALL {
            let s = self.nuisance_strengths.get(n);
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::config(
                    format!("benchmark.nuisance_strengths.{}", n.name()),
                    format!("{s} outside [0, 1]"),
                ));
            }
        }
        Ok(())
    }
}

/// One generated sample. The mask covers the rendered object exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub mask: Mask,
    pub label: usize,
    pub tag: SampleTag,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub samples: Vec<Sample>,
}

impl LabeledSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }
}

/// The whole benchmark: train, in-distribution test, one test split per
/// nuisance.
#[derive(Debug, Clone)]
pub struct GeneratedBench {
    pub train: LabeledSet,
    pub iid_test: LabeledSet,
    pub ood_tests: Vec<(Nuisance, LabeledSet)>,
}

/// Latent parameters of one sample before rasterization.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLatent {
    pub class: usize,
    pub placement: Placement,
    pub fill: Texture,
    pub bg: Texture,
    /// Held-out fill blended in by the texture nuisance.
    pub fill_blend: Option<(Texture, f64)>,
    /// Held-out background blended in by the context nuisance.
    pub bg_blend: Option<(Texture, f64)>,
    pub occluder: Option<OccluderLatent>,
    pub weather: Option<(WeatherKind, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccluderLatent {
    pub polygon: Vec<(f64, f64)>,
    pub placement: Placement,
    pub color: Texture,
}

fn pick<const N: usize>(rng: &mut Stream, options: [[f64; 3]; N]) -> [f64; 3] {
    options[rng.random_range(0..N)]
}

fn jitter_rgb(rng: &mut Stream, rgb: [f64; 3], amount: f64) -> [f64; 3] {
    [
        (rgb[0] + rng.random_range(-amount..amount)).clamp(0.0, 1.0),
        (rgb[1] + rng.random_range(-amount..amount)).clamp(0.0, 1.0),
        (rgb[2] + rng.random_range(-amount..amount)).clamp(0.0, 1.0),
    ]
}

/// In-distribution fills: warm, bright solids.
fn iid_fill(rng: &mut Stream) -> Texture {
    let base = pick(
        rng,
        [
            [0.85, 0.25, 0.20],
            [0.90, 0.55, 0.15],
            [0.85, 0.78, 0.20],
            [0.80, 0.35, 0.55],
            [0.95, 0.45, 0.40],
        ],
    );
    Texture::Solid {
        rgb: jitter_rgb(rng, base, 0.06),
    }
}

/// In-distribution backgrounds: cool, dark solids and vertical gradients.
fn iid_background(rng: &mut Stream) -> Texture {
    let base = pick(
        rng,
        [
            [0.10, 0.15, 0.30],
            [0.12, 0.25, 0.22],
            [0.18, 0.18, 0.22],
            [0.08, 0.20, 0.35],
            [0.15, 0.28, 0.15],
        ],
    );
    let rgb = jitter_rgb(rng, base, 0.05);
    if rng.random_bool(0.5) {
        Texture::Solid { rgb }
    } else {
        Texture::GradientV {
            top: rgb,
            bottom: jitter_rgb(rng, rgb, 0.10),
        }
    }
}

/// Held-out fills for the texture shift: cool, patterned.
fn heldout_fill(rng: &mut Stream) -> Texture {
    match rng.random_range(0..3) {
        0 => Texture::Stripes {
            a: [0.15, 0.60, 0.85],
            b: [0.10, 0.30, 0.50],
            period: rng.random_range(1.8..3.2),
            angle: rng.random_range(0.0..std::f64::consts::PI),
        },
        1 => Texture::Checker {
            a: [0.20, 0.75, 0.50],
            b: [0.10, 0.35, 0.30],
            period: rng.random_range(2..4),
        },
        _ => Texture::Noise {
            base: [0.30, 0.60, 0.70],
            amp: 0.5,
            seed: rng.random(),
        },
    }
}

/// Held-out backgrounds for the context shift: bright, busy.
fn heldout_background(rng: &mut Stream) -> Texture {
    match rng.random_range(0..3) {
        0 => Texture::Checker {
            a: [0.95, 0.90, 0.30],
            b: [0.30, 0.80, 0.90],
            period: rng.random_range(3..6),
        },
        1 => Texture::Stripes {
            a: [0.95, 0.95, 0.85],
            b: [0.85, 0.40, 0.10],
            period: rng.random_range(2.5..4.5),
            angle: rng.random_range(0.0..std::f64::consts::PI),
        },
        _ => Texture::Noise {
            base: [0.75, 0.70, 0.60],
            amp: 0.45,
            seed: rng.random(),
        },
    }
}

/// Base-distribution latent: canonical geometry, in-distribution textures.
pub fn base_latent(class: usize, side: usize, rng: &mut Stream) -> SampleLatent {
    let s = side as f64;
    let placement = Placement {
        center: (
            s / 2.0 + rng.random_range(-0.08..0.08) * s,
            s / 2.0 + rng.random_range(-0.08..0.08) * s,
        ),
        radius: rng.random_range(0.26..0.36) * s,
        rotation: rng.random_range(-0.35..0.35),
        elong: (1.0, 1.0),
        wobble: NO_WOBBLE,
    };
    let fill = iid_fill(rng);
    let bg = iid_background(rng);
    SampleLatent {
        class,
        placement,
        fill,
        bg,
        fill_blend: None,
        bg_blend: None,
        occluder: None,
        weather: None,
    }
}

/// Perturb exactly one nuisance factor, scaled by `strength`. At strength
/// zero the rendered sample is identical to the unperturbed one.
pub fn apply_nuisance(
    latent: &mut SampleLatent,
    nuisance: Nuisance,
    strength: f64,
    rng: &mut Stream,
) {
    let s = strength.clamp(0.0, 1.0);
    match nuisance {
        Nuisance::Shape => {
            let mut wobble = NO_WOBBLE;
            for slot in &mut wobble {
                *slot = (
                    s * rng.random_range(0.06..0.20),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
            }
            latent.placement.wobble = wobble;
            latent.placement.elong = (
                1.0 + s * rng.random_range(-0.35..0.35),
                1.0 + s * rng.random_range(-0.35..0.35),
            );
        }
        Nuisance::Pose => {
            // Extra rotation pushed outside the +-0.35 rad training band.
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            latent.placement.rotation += sign * s * rng.random_range(0.6..1.5);
        }
        Nuisance::Context => {
            latent.bg_blend = Some((heldout_background(rng), s));
        }
        Nuisance::Texture => {
            latent.fill_blend = Some((heldout_fill(rng), s));
        }
        Nuisance::Occlusion => {
            if s > 0.0 {
                let polygon = blob_polygon(rng, 9);
                let obj = &latent.placement;
                let placement = Placement {
                    center: (
                        obj.center.0 + rng.random_range(-0.5..0.5) * obj.radius,
                        obj.center.1 + rng.random_range(-0.5..0.5) * obj.radius,
                    ),
                    radius: obj.radius * (0.30 + 0.45 * s),
                    rotation: rng.random_range(0.0..std::f64::consts::TAU),
                    elong: (1.0, 1.0),
                    wobble: NO_WOBBLE,
                };
                let gray = rng.random_range(0.35..0.75);
                let color = Texture::Solid {
                    rgb: [gray, gray * 0.9, gray * 1.05],
                };
                latent.occluder = Some(OccluderLatent {
                    polygon,
                    placement,
                    color,
                });
            }
        }
        Nuisance::Weather => {
            if s > 0.0 {
                let condition =
                    WeatherCondition::ALL[rng.random_range(0..WeatherCondition::ALL.len())];
                let severity = 3 + ((2.0 * s).round() as u8).min(2);
                let kind = WeatherKind::new(condition, severity).expect("severity in 3..=5");
                latent.weather = Some((kind, rng.random()));
            }
        }
    }
}

/// Rasterize a latent into an image and the object's exact coverage mask.
pub fn render_latent(latent: &SampleLatent, side: usize) -> (Image, Mask) {
    let bg = match &latent.bg_blend {
        Some((tex, w)) => render_texture_blend(&latent.bg, tex, *w, side, side),
        None => render_texture(&latent.bg, side, side),
    };
    let poly = transform_polygon(&class_polygon(latent.class), &latent.placement);
    let mask = render_polygon(&poly, side, side);
    let mut data = Vec::with_capacity(side * side * CHANNELS);
    for y in 0..side {
        for x in 0..side {
            let m = mask.get(y, x);
            let fill = match &latent.fill_blend {
                Some((tex, w)) => {
                    let a = texture_at(&latent.fill, y, x, side);
                    let b = texture_at(tex, y, x, side);
                    [
                        (1.0 - w) * a[0] + w * b[0],
                        (1.0 - w) * a[1] + w * b[1],
                        (1.0 - w) * a[2] + w * b[2],
                    ]
                }
                None => texture_at(&latent.fill, y, x, side),
            };
            for c in 0..CHANNELS {
                data.push(m * fill[c] as f32 + (1.0 - m) * bg.get(y, x, c));
            }
        }
    }
    let mut image = Image::from_parts(side, side, data);

    if let Some(occ) = &latent.occluder {
        let opoly = transform_polygon(&occ.polygon, &occ.placement);
        let omask = render_polygon(&opoly, side, side);
        for y in 0..side {
            for x in 0..side {
                let m = omask.get(y, x);
                if m == 0.0 {
                    continue;
                }
                let rgb = texture_at(&occ.color, y, x, side);
                for c in 0..CHANNELS {
                    let v = m * rgb[c] as f32 + (1.0 - m) * image.get(y, x, c);
                    image.set(y, x, c, v);
                }
            }
        }
    }

    if let Some((kind, seed)) = latent.weather {
        let mut wrng = Stream::seed_from_u64(seed);
        image = crate::augment::weather(&image, kind, &mut wrng);
    }

    (image, mask)
}

fn split_stream_name(split: &str) -> String {
    format!("benchmark/{split}")
}

fn generate_split(
    spec: &BenchSpec,
    split: &str,
    size: usize,
    nuisance: Option<Nuisance>,
) -> LabeledSet {
    let name = split_stream_name(split);
    let samples = exec::map_indexed(size, |i| {
        let mut rng = rng::indexed(spec.rng_seed, &name, i as u64);
        let class = i % spec.num_classes;
        let mut latent = base_latent(class, spec.image_side, &mut rng);
        let tag = match nuisance {
            Some(n) => {
                apply_nuisance(&mut latent, n, spec.nuisance_strengths.get(n), &mut rng);
                SampleTag::from(n)
            }
            None => SampleTag::Iid,
        };
        let (image, mask) = render_latent(&latent, spec.image_side);
        Sample {
            image,
            mask,
            label: class,
            tag,
        }
    });
    LabeledSet { samples }
}

/// Generate the whole benchmark from a spec. Deterministic under the seed.
pub fn generate(spec: &BenchSpec) -> Result<GeneratedBench> {
    spec.validate()?;
    let train = generate_split(spec, "train", spec.train_size, None);
    let iid_test = generate_split(spec, "iid_test", spec.test_size_per_split, None);
    let ood_tests = Nuisance::ALL
        .into_iter()
        .map(|n| {
            (
                n,
                generate_split(
                    spec,
                    &format!("ood_{}", n.name()),
                    spec.test_size_per_split,
                    Some(n),
                ),
            )
        })
        .collect();
    Ok(GeneratedBench {
        train,
        iid_test,
        ood_tests,
    })
}

/// Task-unrelated background images for context copy-paste: a broad range
/// of textures beyond either benchmark palette.
pub fn unrelated_backgrounds(count: usize, side: usize, seed: u64) -> Vec<Image> {
    exec::map_indexed(count, |i| {
        let mut rng = rng::indexed(seed, "unrelated-bg", i as u64);
        let rgb = [
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
        ];
        let tex = match rng.random_range(0..5) {
            0 => Texture::Solid { rgb },
            1 => Texture::GradientV {
                top: rgb,
                bottom: [
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                ],
            },
            2 => Texture::Checker {
                a: rgb,
                b: [
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                ],
                period: rng.random_range(2..8),
            },
            3 => Texture::Stripes {
                a: rgb,
                b: [
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                ],
                period: rng.random_range(2.0..6.0),
                angle: rng.random_range(0.0..std::f64::consts::PI),
            },
            _ => Texture::Noise {
                base: rgb,
                amp: rng.random_range(0.2..0.6),
                seed: rng.random(),
            },
        };
        render_texture(&tex, side, side)
    })
}

/// Task-unrelated distractor blobs with their masks, for occlusion
/// copy-paste.
pub fn distractor_bank(
    count: usize,
    side: usize,
    seed: u64,
    num_classes: usize,
) -> Result<ObjectBank> {
    let entries = exec::map_indexed(count, |i| {
        let mut rng = rng::indexed(seed, "distractors", i as u64);
        let vertices = rng.random_range(7..12);
        let polygon = blob_polygon(&mut rng, vertices);
        let s = side as f64;
        let placement = Placement {
            center: (
                s / 2.0 + rng.random_range(-0.15..0.15) * s,
                s / 2.0 + rng.random_range(-0.15..0.15) * s,
            ),
            radius: rng.random_range(0.18..0.32) * s,
            rotation: rng.random_range(0.0..std::f64::consts::TAU),
            elong: (1.0, 1.0),
            wobble: NO_WOBBLE,
        };
        let poly = transform_polygon(&polygon, &placement);
        let mask = render_polygon(&poly, side, side);
        let rgb = [
            rng.random_range(0.2..0.9),
            rng.random_range(0.2..0.9),
            rng.random_range(0.2..0.9),
        ];
        let mut data = Vec::with_capacity(side * side * CHANNELS);
        for y in 0..side {
            for x in 0..side {
                let m = mask.get(y, x);
                for &v in &rgb {
                    data.push(m * v as f32);
                }
            }
        }
        BankEntry {
            image: Image::from_parts(side, side, data),
            mask,
            class_id: None,
        }
    });
    ObjectBank::new(entries, num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> BenchSpec {
        BenchSpec {
            num_classes: 5,
            image_side: 32,
            train_size: 50,
            test_size_per_split: 25,
            rng_seed: 11,
            nuisance_strengths: NuisanceStrengths::default(),
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = small_spec();
        spec.num_classes = 1;
        let err = spec.validate().unwrap_err();
        assert!(err.to_string().contains("benchmark.num_classes"));

        let mut spec = small_spec();
        spec.train_size = 7;
        assert!(spec.validate().is_err());

        let mut spec = small_spec();
        spec.nuisance_strengths.weather = 1.5;
        let err = spec.validate().unwrap_err();
        assert!(err.to_string().contains("nuisance_strengths.weather"));
    }

    #[test]
    fn splits_are_balanced_by_construction() {
        let bench = generate(&small_spec()).unwrap();
        assert_eq!(bench.train.len(), 50);
        assert_eq!(bench.iid_test.len(), 25);
        assert_eq!(bench.ood_tests.len(), 6);
        let mut counts = vec![0usize; 5];
        for s in &bench.train.samples {
            counts[s.label] += 1;
        }
        assert!(counts.iter().all(|&c| c == 10));
    }

    #[test]
    fn generation_is_deterministic_and_parallel_invariant() {
        let spec = small_spec();
        let a = generate(&spec).unwrap();
        let b = crate::exec::run_sequential(|| generate(&spec).unwrap());
        assert_eq!(a.train.samples, b.train.samples);
        assert_eq!(a.iid_test.samples, b.iid_test.samples);
        for ((na, sa), (nb, sb)) in a.ood_tests.iter().zip(&b.ood_tests) {
            assert_eq!(na, nb);
            assert_eq!(sa.samples, sb.samples);
        }
    }

    #[test]
    fn zero_strength_ood_splits_match_base_renders() {
        // With all strengths at zero every OOD sample renders identically
        // to its unperturbed base draw.
        let mut spec = small_spec();
        spec.nuisance_strengths = NuisanceStrengths::uniform(0.0);
        for n in Nuisance::ALL {
            let split = format!("ood_{}", n.name());
            let perturbed = generate_split(&spec, &split, 10, Some(n));
            for (i, sample) in perturbed.samples.iter().enumerate() {
                let mut rng = rng::indexed(spec.rng_seed, &split_stream_name(&split), i as u64);
                let latent = base_latent(i % spec.num_classes, spec.image_side, &mut rng);
                let (image, mask) = render_latent(&latent, spec.image_side);
                assert_eq!(sample.image, image, "nuisance {n:?} sample {i}");
                assert_eq!(sample.mask, mask);
            }
        }
    }

    #[test]
    fn each_nuisance_touches_exactly_its_own_factor() {
        let mut rng = crate::rng::stream(3, "bookkeeping");
        for n in Nuisance::ALL {
            let base = base_latent(2, 32, &mut rng);
            let mut perturbed = base.clone();
            apply_nuisance(&mut perturbed, n, 0.8, &mut rng);
            // Fields other than the nuisance's own stay equal.
            assert_eq!(base.class, perturbed.class);
            if n != Nuisance::Shape {
                assert_eq!(base.placement.wobble, perturbed.placement.wobble);
                assert_eq!(base.placement.elong, perturbed.placement.elong);
            }
            if n != Nuisance::Pose {
                assert_eq!(base.placement.rotation, perturbed.placement.rotation);
            } else {
                assert!(
                    (perturbed.placement.rotation - base.placement.rotation).abs() > 0.3,
                    "pose shift moved rotation outside the training band"
                );
            }
            assert_eq!(base.placement.center, perturbed.placement.center);
            assert_eq!(base.placement.radius, perturbed.placement.radius);
            assert_eq!(base.fill, perturbed.fill);
            assert_eq!(base.bg, perturbed.bg);
            assert_eq!(perturbed.fill_blend.is_some(), n == Nuisance::Texture);
            assert_eq!(perturbed.bg_blend.is_some(), n == Nuisance::Context);
            assert_eq!(perturbed.occluder.is_some(), n == Nuisance::Occlusion);
            assert_eq!(perturbed.weather.is_some(), n == Nuisance::Weather);
        }
    }

    #[test]
    fn mask_blends_fill_over_background_exactly() {
        let mut rng = crate::rng::stream(4, "mask-exact");
        let latent = base_latent(1, 32, &mut rng);
        let (image, mask) = render_latent(&latent, 32);
        for y in 0..32 {
            for x in 0..32 {
                let m = mask.get(y, x);
                if m == 1.0 {
                    let fill = texture_at(&latent.fill, y, x, 32);
                    for c in 0..CHANNELS {
                        assert!((image.get(y, x, c) - fill[c] as f32).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn weather_split_uses_high_severity() {
        let mut rng = crate::rng::stream(5, "weather-sev");
        for s in [0.1, 0.5, 1.0] {
            let mut latent = base_latent(0, 32, &mut rng);
            apply_nuisance(&mut latent, Nuisance::Weather, s, &mut rng);
            let (kind, _) = latent.weather.unwrap();
            assert!(kind.severity >= 3, "strength {s} gave severity below 3");
            assert!(kind.severity <= 5);
        }
    }

    #[test]
    fn distractor_bank_entries_are_task_unrelated() {
        let bank = distractor_bank(8, 32, 7, 5).unwrap();
        assert_eq!(bank.entries().len(), 8);
        assert!(bank.entries().iter().all(|e| e.class_id.is_none()));
        assert!(bank.entries().iter().all(|e| e.mask.total_weight() > 0.0));
    }

    #[test]
    fn backgrounds_are_deterministic() {
        let a = unrelated_backgrounds(5, 32, 9);
        let b = unrelated_backgrounds(5, 32, 9);
        assert_eq!(a, b);
    }
}
