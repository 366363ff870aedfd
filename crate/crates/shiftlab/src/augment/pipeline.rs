//! A declarative augmentation pipeline: an ordered list of stages, each
//! firing with its own probability. Per-sample stages run data-parallel
//! over the batch; CutMix pairs samples within the batch and must come
//! last. Every draw flows from the per-batch seed, so a batch augments
//! identically no matter how the work is scheduled.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{
    apply_policy, context_paste_placed, copy_paste_occlusion, cutmix_at, sample_affine,
    sample_color, weather, AugPolicy, BankEntry, ObjectBank, WeatherCondition, WeatherKind,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::imaging::{Image, Mask};
use crate::rng::Stream;

/// One pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageSpec {
    /// Paste the sample's own object onto a random unrelated background.
    CopyPasteContext { prob: f64 },
    /// Paste a random unrelated distractor over the sample.
    CopyPasteOcclusion { prob: f64, coverage_cap: f64 },
    Weather {
        prob: f64,
        severity_min: u8,
        severity_max: u8,
    },
    Weak {
        prob: f64,
    },
    Strong {
        prob: f64,
        op_count: usize,
        magnitude: u8,
    },
    CutMix {
        prob: f64,
        alpha: f64,
    },
}

impl StageSpec {
    fn prob(&self) -> f64 {
        match self {
            StageSpec::CopyPasteContext { prob }
            | StageSpec::CopyPasteOcclusion { prob, .. }
            | StageSpec::Weather { prob, .. }
            | StageSpec::Weak { prob }
            | StageSpec::Strong { prob, .. }
            | StageSpec::CutMix { prob, .. } => *prob,
        }
    }

    fn needs_resources(&self) -> bool {
        matches!(
            self,
            StageSpec::CopyPasteContext { .. } | StageSpec::CopyPasteOcclusion { .. }
        )
    }
}

/// The declarative pipeline document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub stages: Vec<StageSpec>,
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, stage) in self.stages.iter().enumerate() {
            let field = |name: &str| format!("pipeline.stages[{i}].{name}");
            let prob = stage.prob();
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::config(field("prob"), format!("{prob} outside [0, 1]")));
            }
            match stage {
                StageSpec::CopyPasteOcclusion { coverage_cap, .. } => {
                    if !(*coverage_cap > 0.0 && *coverage_cap <= 0.6) {
                        return Err(Error::config(
                            field("coverage_cap"),
                            format!("{coverage_cap} outside (0, 0.6]"),
                        ));
                    }
                }
                StageSpec::Weather {
                    severity_min,
                    severity_max,
                    ..
                } => {
                    if !(1..=5).contains(severity_min)
                        || !(1..=5).contains(severity_max)
                        || severity_min > severity_max
                    {
                        return Err(Error::config(
                            field("severity_min"),
                            format!("severity range {severity_min}..={severity_max} invalid"),
                        ));
                    }
                }
                StageSpec::Strong { magnitude, .. } => {
                    if *magnitude > 10 {
                        return Err(Error::config(
                            field("magnitude"),
                            format!("{magnitude} outside [0, 10]"),
                        ));
                    }
                }
                StageSpec::CutMix { alpha, .. } => {
                    if *alpha <= 0.0 {
                        return Err(Error::config(field("alpha"), "alpha must be positive"));
                    }
                    if i + 1 != self.stages.len() {
                        return Err(Error::config(
                            field("op"),
                            "cutmix mixes across the batch and must be the last stage",
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Weak-only recipe: flips and small translations.
    pub fn weak_only() -> Self {
        PipelineSpec {
            stages: vec![StageSpec::Weak { prob: 1.0 }],
        }
    }

    /// Weak + strong policy + CutMix.
    pub fn auto_cutmix(stage_prob: f64, op_count: usize, magnitude: u8, alpha: f64) -> Self {
        PipelineSpec {
            stages: vec![
                StageSpec::Weak { prob: 1.0 },
                StageSpec::Strong {
                    prob: stage_prob,
                    op_count,
                    magnitude,
                },
                StageSpec::CutMix {
                    prob: stage_prob,
                    alpha,
                },
            ],
        }
    }

    /// The full strong recipe: copy-paste both ways, weather, weak, strong
    /// policy and CutMix.
    pub fn strong_full(
        stage_prob: f64,
        coverage_cap: f64,
        severity_range: (u8, u8),
        op_count: usize,
        magnitude: u8,
        alpha: f64,
    ) -> Self {
        PipelineSpec {
            stages: vec![
                StageSpec::CopyPasteContext { prob: stage_prob },
                StageSpec::CopyPasteOcclusion {
                    prob: stage_prob,
                    coverage_cap,
                },
                StageSpec::Weather {
                    prob: stage_prob,
                    severity_min: severity_range.0,
                    severity_max: severity_range.1,
                },
                StageSpec::Weak { prob: 1.0 },
                StageSpec::Strong {
                    prob: stage_prob,
                    op_count,
                    magnitude,
                },
                StageSpec::CutMix {
                    prob: stage_prob,
                    alpha,
                },
            ],
        }
    }
}

/// Shared material the copy-paste stages draw from.
#[derive(Debug)]
pub struct AugResources {
    pub bank: ObjectBank,
    /// Task-unrelated backgrounds for context pastes.
    pub backgrounds: Vec<Image>,
}

/// One input sample, borrowed from the training set.
#[derive(Debug, Clone, Copy)]
pub struct BatchItem<'a> {
    pub image: &'a Image,
    pub mask: &'a Mask,
    pub label: usize,
}

/// An immutable, shareable pipeline: spec + resources.
#[derive(Debug, Clone)]
pub struct Pipeline {
    spec: PipelineSpec,
    resources: Option<Arc<AugResources>>,
}

impl Pipeline {
    pub fn new(spec: PipelineSpec, resources: Option<Arc<AugResources>>) -> Result<Self> {
        spec.validate()?;
        if resources.is_none() && spec.stages.iter().any(StageSpec::needs_resources) {
            return Err(Error::config(
                "pipeline.stages",
                "copy-paste stages need an object bank and background pool",
            ));
        }
        if let Some(res) = &resources {
            if spec
                .stages
                .iter()
                .any(|s| matches!(s, StageSpec::CopyPasteContext { .. }))
                && res.backgrounds.is_empty()
            {
                return Err(Error::config(
                    "augment.backgrounds",
                    "empty task-unrelated background pool",
                ));
            }
            if spec
                .stages
                .iter()
                .any(|s| matches!(s, StageSpec::CopyPasteOcclusion { .. }))
                && res.bank.unrelated_indices().is_empty()
            {
                return Err(Error::config(
                    "augment.bank",
                    "occlusion stage needs task-unrelated bank entries",
                ));
            }
        }
        Ok(Pipeline { spec, resources })
    }

    pub fn spec(&self) -> &PipelineSpec {
        &self.spec
    }

    /// Augment a batch. Returns one (image, soft label) per input, in
    /// input order. Pure function of (inputs, seed).
    pub fn apply_batch(
        &self,
        items: &[BatchItem<'_>],
        num_classes: usize,
        seed: u64,
    ) -> Vec<(Image, Vec<f64>)> {
        let n = items.len();
        let mut rng = Stream::seed_from_u64(seed);
        let sample_seeds: Vec<u64> = (0..n).map(|_| rng.random()).collect();

        let mut out: Vec<(Image, Vec<f64>)> = exec::map_indexed(n, |i| {
            let item = &items[i];
            let mut srng = Stream::seed_from_u64(sample_seeds[i]);
            let mut img = item.image.clone();
            let mut mask = item.mask.clone();
            for stage in &self.spec.stages {
                self.apply_sample_stage(stage, &mut img, &mut mask, item.label, &mut srng);
            }
            let mut label = vec![0.0; num_classes];
            label[item.label] = 1.0;
            (img, label)
        });

        // CutMix runs after the per-sample stages, pairing against the
        // pre-mix snapshots so the result is order-independent.
        for stage in &self.spec.stages {
            if let StageSpec::CutMix { prob, alpha } = stage {
                let sources = out.clone();
                let beta = Beta::new(*alpha, *alpha).expect("validated alpha");
                for (i, slot) in out.iter_mut().enumerate() {
                    let fire = rng.random_bool(*prob);
                    let partner = rng.random_range(0..n.max(1));
                    let lambda: f64 = beta.sample(&mut rng);
                    let center = (
                        rng.random_range(0..slot.0.height()),
                        rng.random_range(0..slot.0.width()),
                    );
                    if !fire || i == partner {
                        continue;
                    }
                    let (src_img, src_label) = &sources[partner];
                    *slot = cutmix_at((&slot.0, &slot.1), (src_img, src_label), lambda, center)
                        .expect("batch images share dimensions");
                }
            }
        }
        out
    }

    fn apply_sample_stage(
        &self,
        stage: &StageSpec,
        img: &mut Image,
        mask: &mut Mask,
        label: usize,
        rng: &mut Stream,
    ) {
        if !rng.random_bool(stage.prob()) {
            return;
        }
        match stage {
            StageSpec::CopyPasteContext { .. } => {
                let res = self.resources.as_ref().expect("validated at construction");
                let affine = sample_affine(rng, 1.0);
                let color = sample_color(rng, 1.0);
                let entry = BankEntry {
                    image: img.clone(),
                    mask: mask.clone(),
                    class_id: Some(label),
                };
                if let Ok((pasted, placed, _)) =
                    context_paste_placed(&res.backgrounds, &entry, &affine, &color, rng)
                {
                    *img = pasted;
                    *mask = placed;
                }
            }
            StageSpec::CopyPasteOcclusion { coverage_cap, .. } => {
                let res = self.resources.as_ref().expect("validated at construction");
                let unrelated = res.bank.unrelated_indices();
                let pick = unrelated[rng.random_range(0..unrelated.len())];
                let distractor = &res.bank.entries()[pick];
                let affine = sample_affine(rng, 1.0);
                let color = sample_color(rng, 1.0);
                if let Ok((pasted, _)) = copy_paste_occlusion(
                    (&*img, label),
                    distractor,
                    &affine,
                    &color,
                    *coverage_cap,
                    rng,
                ) {
                    *img = pasted;
                }
            }
            StageSpec::Weather {
                severity_min,
                severity_max,
                ..
            } => {
                let condition =
                    WeatherCondition::ALL[rng.random_range(0..WeatherCondition::ALL.len())];
                let severity = rng.random_range(*severity_min..=*severity_max);
                let kind = WeatherKind::new(condition, severity).expect("validated severity");
                *img = weather(img, kind, rng);
            }
            StageSpec::Weak { .. } => {
                let seed = rng.random();
                *img = apply_policy(img, &AugPolicy::weak(seed));
            }
            StageSpec::Strong {
                op_count,
                magnitude,
                ..
            } => {
                let seed = rng.random();
                *img = apply_policy(img, &AugPolicy::strong(*op_count, *magnitude, seed));
            }
            StageSpec::CutMix { .. } => {}
        }
    }
}
