//! PASCAL-style localisation scoring.
//!
//! An image counts as correctly localised for class k when its top-scored
//! predicted box for k overlaps some ground-truth box of class k with
//! IoU strictly greater than 0.5. CorLoc is the percentage of such images
//! among those containing k.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{BoxSet, GroundTruth};
use crate::error::{Error, Result};
use crate::geom::BoundingBox;

pub const PASCAL_THRESHOLD: f64 = 0.5;

/// Intersection over union; 0 for disjoint or empty boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub images: usize,
    pub correct: usize,
    pub corloc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanKind {
    /// Average of per-class CorLoc values.
    #[default]
    Unweighted,
    /// Pooled over all (image, class) pairs.
    ImageWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: BTreeMap<usize, ClassScore>,
    pub mean_corloc: f64,
    /// Predictions for classes absent from the image's ground truth.
    pub ignored_predictions: usize,
}

impl EvalReport {
    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{:>6}  {:>7}  {:>7}  {:>7}", "class", "images", "correct", "corloc").unwrap();
        for (k, c) in &self.per_class {
            writeln!(s, "{:>6}  {:>7}  {:>7}  {:>7.1}", k, c.images, c.correct, c.corloc).unwrap();
        }
        writeln!(s, "{:>6}  {:>7}  {:>7}  {:>7.1}", "mean", "", "", self.mean_corloc).unwrap();
        if self.ignored_predictions > 0 {
            writeln!(s, "ignored {} predictions for absent classes", self.ignored_predictions).unwrap();
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

/// Scores `predictions` against `gt` with the unweighted class mean.
pub fn corloc(predictions: &BoxSet, gt: &GroundTruth) -> Result<EvalReport> {
    corloc_with(predictions, gt, MeanKind::Unweighted)
}

pub fn corloc_with(predictions: &BoxSet, gt: &GroundTruth, mean: MeanKind) -> Result<EvalReport> {
    let unknown: Vec<String> = predictions
        .keys()
        .filter(|id| !gt.boxes.contains_key(*id))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownIds(unknown));
    }

    let mut per_class: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut ignored = 0;
    let empty = Vec::new();
    for (id, truth) in &gt.boxes {
        let preds = predictions.get(id).unwrap_or(&empty);
        let mut classes: Vec<usize> = truth.iter().map(|b| b.class).collect();
        classes.sort_unstable();
        classes.dedup();
        ignored += preds.iter().filter(|p| !classes.contains(&p.class)).count();
        for k in classes {
            let entry = per_class.entry(k).or_default();
            entry.0 += 1;
            // first of equal scores wins
            let top = preds
                .iter()
                .filter(|p| p.class == k)
                .fold(None::<&BoundingBox>, |best, p| match best {
                    Some(b) if b.score >= p.bbox.score => Some(b),
                    _ => Some(&p.bbox),
                });
            let hit = top.is_some_and(|t| {
                truth
                    .iter()
                    .filter(|g| g.class == k)
                    .any(|g| iou(t, &g.bbox) > PASCAL_THRESHOLD)
            });
            if hit {
                entry.1 += 1;
            }
        }
    }

    let per_class: BTreeMap<usize, ClassScore> = per_class
        .into_iter()
        .map(|(k, (images, correct))| {
            let corloc = 100.0 * correct as f64 / images as f64;
            (
                k,
                ClassScore {
                    images,
                    correct,
                    corloc,
                },
            )
        })
        .collect();
    let mean_corloc = if per_class.is_empty() {
        0.0
    } else {
        match mean {
            MeanKind::Unweighted => per_class.values().map(|c| c.corloc).sum::<f64>() / per_class.len() as f64,
            MeanKind::ImageWeighted => {
                let (i, c) = per_class
                    .values()
                    .fold((0, 0), |(i, c), s| (i + s.images, c + s.correct));
                100.0 * c as f64 / i as f64
            }
        }
    };
    Ok(EvalReport {
        per_class,
        mean_corloc,
        ignored_predictions: ignored,
    })
}
