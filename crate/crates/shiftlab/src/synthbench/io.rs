//! On-disk form of a split: `images/` and `masks/` PNG directories plus a
//! line-oriented manifest, one JSON record per sample:
//!
//! ```text
//! {"image":"images/000000.png","mask":"masks/000000.png","label":2,"nuisance":"IID"}
//! ```
//!
//! [`import_images`] reads the images only and never materializes the
//! label field; the test-time training entry point goes through it so
//! ground truth cannot leak into adaptation.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{png, Image};
use crate::synthbench::{LabeledSet, Sample, SampleTag};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub image: String,
    pub mask: String,
    pub label: usize,
    pub nuisance: SampleTag,
}

/// Manifest view that ignores any label-like fields. Used by the
/// contamination-guarded import path.
#[derive(Debug, Clone, Deserialize)]
struct UnlabeledRecord {
    image: String,
}

/// Write a split to `dir`. Returns the manifest records in order.
pub fn export(set: &LabeledSet, dir: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let dir = dir.as_ref();
    let images_dir = dir.join("images");
    let masks_dir = dir.join("masks");
    fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;
    fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;
    let mut records = Vec::with_capacity(set.len());
    for (i, sample) in set.samples.iter().enumerate() {
        let image = format!("images/{i:06}.png");
        let mask = format!("masks/{i:06}.png");
        png::write_image(dir.join(&image), &sample.image)?;
        png::write_mask(dir.join(&mask), &sample.mask)?;
        records.push(ManifestRecord {
            image,
            mask,
            label: sample.label,
            nuisance: sample.tag,
        });
    }
    let path = dir.join(MANIFEST_NAME);
    let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for rec in &records {
        let line = serde_json::to_string(rec).expect("manifest record serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(records)
}

fn read_manifest_lines(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_NAME);
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    BufReader::new(file)
        .lines()
        .map(|l| l.map_err(|e| Error::io(&path, e)))
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true))
        .collect()
}

/// Read a full labeled split back.
pub fn import(dir: impl AsRef<Path>) -> Result<LabeledSet> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST_NAME);
    let mut samples = Vec::new();
    for line in read_manifest_lines(dir)? {
        let rec: ManifestRecord =
            serde_json::from_str(&line).map_err(|e| Error::format(&manifest, e.to_string()))?;
        samples.push(Sample {
            image: png::read_image(dir.join(&rec.image))?,
            mask: png::read_mask(dir.join(&rec.mask))?,
            label: rec.label,
            tag: rec.nuisance,
        });
    }
    Ok(LabeledSet { samples })
}

/// Read only the images of a split, in manifest order. Labels and masks in
/// the manifest are never parsed, so callers cannot observe them.
pub fn import_images(dir: impl AsRef<Path>) -> Result<Vec<Image>> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST_NAME);
    let mut images = Vec::new();
    for line in read_manifest_lines(dir)? {
        let rec: UnlabeledRecord =
            serde_json::from_str(&line).map_err(|e| Error::format(&manifest, e.to_string()))?;
        images.push(png::read_image(dir.join(&rec.image))?);
    }
    Ok(images)
}
