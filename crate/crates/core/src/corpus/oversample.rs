//! Training-split oversampling by duplication of positive samples.

use std::collections::HashMap;

use thiserror::Error;

use super::manifest::{Category, CorpusManifest, Split};

pub const DEFAULT_TARGET_RATIO: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum OversampleError {
    #[error("target ratio must lie strictly between 0 and 1, got {0}")]
    BadRatio(f64),
    #[error("train split has no positive samples for {0}")]
    NoPositives(Category),
}

/// Positive count that makes positives `target_ratio` of the split, rounded
/// half away from zero.
pub fn oversample_target(negatives: usize, target_ratio: f64) -> usize {
    (negatives as f64 * target_ratio / (1.0 - target_ratio)).round() as usize
}

/// Duplicates train positives of `category` round-robin, in manifest order,
/// until they reach the target share. Other splits are left untouched and
/// duplicates are appended after the existing samples.
pub fn oversample(
    manifest: &CorpusManifest,
    category: Category,
    target_ratio: f64,
) -> Result<CorpusManifest, OversampleError> {
    if !(target_ratio > 0.0 && target_ratio < 1.0) {
        return Err(OversampleError::BadRatio(target_ratio));
    }
    let positives: Vec<usize> = manifest
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.split == Split::Train && s.label(category))
        .map(|(i, _)| i)
        .collect();
    if positives.is_empty() {
        return Err(OversampleError::NoPositives(category));
    }
    let negatives = manifest.counts(Split::Train, category).negative;
    let target = oversample_target(negatives, target_ratio);

    let mut out = manifest.clone();
    if target <= positives.len() {
        return Ok(out);
    }
    let mut next_copy: HashMap<&str, u32> = HashMap::new();
    for s in &manifest.samples {
        let entry = next_copy.entry(s.id.as_str()).or_insert(1);
        *entry = (*entry).max(s.copy + 1);
    }
    for k in 0..target - positives.len() {
        let original = &manifest.samples[positives[k % positives.len()]];
        let copy = next_copy.get_mut(original.id.as_str()).expect("id seen");
        let mut dup = original.clone();
        dup.copy = *copy;
        *copy += 1;
        out.samples.push(dup);
    }
    Ok(out)
}
