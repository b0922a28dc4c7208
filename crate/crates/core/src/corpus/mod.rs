//! Documents, corpora and ground truth.
//!
//! A document is one image reduced to a bag of quantised visual words with
//! continuous pixel locations. Locations live in the closed rectangle
//! `[0, width] × [0, height]`.

mod io;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::geom::BoundingBox;

pub use io::{
    load_boxes, load_corpus, load_ground_truth, parse_boxes, parse_corpus, parse_ground_truth, save_boxes, save_corpus,
    save_ground_truth, scan_vocab_size, write_boxes, write_corpus, write_ground_truth, BoxRecord, DocBoxes,
    DocumentRecord,
};
pub use synth::{generate_synthetic, SynthConfig, Synthetic, TrueGaussian};

/// Image-level weak labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels {
    /// No annotation at all; every class may or may not be present.
    Unlabelled,
    /// The exact set of classes present (possibly empty).
    Labelled(BTreeSet<usize>),
}

impl Labels {
    pub fn labelled<I: IntoIterator<Item = usize>>(it: I) -> Self {
        Labels::Labelled(it.into_iter().collect())
    }

    pub fn is_unlabelled(&self) -> bool {
        matches!(self, Labels::Unlabelled)
    }

    pub fn contains(&self, class: usize) -> bool {
        match self {
            Labels::Unlabelled => false,
            Labels::Labelled(s) => s.contains(&class),
        }
    }

    /// Present classes; empty for unlabelled documents.
    pub fn classes(&self) -> impl Iterator<Item = usize> + '_ {
        let set = match self {
            Labels::Unlabelled => None,
            Labels::Labelled(s) => Some(s),
        };
        set.into_iter().flatten().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub word: usize,
    pub x: f64,
    pub y: f64,
}

impl Observation {
    pub fn new(word: usize, x: f64, y: f64) -> Self {
        Self { word, x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub labels: Labels,
    pub observations: Vec<Observation>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.width as f64 * self.height as f64
    }

    pub fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            id: self.id.clone(),
            w: self.width as i64,
            h: self.height as i64,
            labels: match &self.labels {
                Labels::Unlabelled => None,
                Labels::Labelled(s) => Some(s.iter().map(|&c| c as i64).collect()),
            },
            words: self.observations.iter().map(|o| (o.word as i64, o.x, o.y)).collect(),
        }
    }

    /// Normalised word histogram (sums to 1, or all zero when empty).
    pub fn histogram(&self, vocab_size: usize) -> Vec<f64> {
        let mut h = vec![0.0; vocab_size];
        if self.observations.is_empty() {
            return h;
        }
        let w = 1.0 / self.observations.len() as f64;
        for o in &self.observations {
            h[o.word] += w;
        }
        h
    }
}

/// A single invariant violation found by [`validate_document`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveSize { width: i64, height: i64 },
    WordOutOfRange { index: usize, word: i64 },
    LocationOutOfBounds { index: usize, x: f64, y: f64 },
    LabelOutOfRange { label: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveSize { width, height } => {
                write!(f, "image size {width}x{height} is not positive")
            }
            Violation::WordOutOfRange { index, word } => {
                write!(f, "word {index} has id {word} outside the vocabulary")
            }
            Violation::LocationOutOfBounds { index, x, y } => {
                write!(f, "word {index} location ({x}, {y}) is outside the image")
            }
            Violation::LabelOutOfRange { label } => write!(f, "label {label} is out of range"),
        }
    }
}

/// Checks every document invariant and reports all violations.
pub fn validate_document(
    doc: &DocumentRecord,
    vocab_size: usize,
    num_classes: usize,
) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if doc.w <= 0 || doc.h <= 0 || doc.w > u32::MAX as i64 || doc.h > u32::MAX as i64 {
        out.push(Violation::NonPositiveSize {
            width: doc.w,
            height: doc.h,
        });
    }
    let (w, h) = (doc.w as f64, doc.h as f64);
    for (index, &(word, x, y)) in doc.words.iter().enumerate() {
        if word < 0 || word as u64 >= vocab_size as u64 {
            out.push(Violation::WordOutOfRange { index, word });
        }
        let inside = x.is_finite() && y.is_finite() && (0.0..=w).contains(&x) && (0.0..=h).contains(&y);
        if !inside {
            out.push(Violation::LocationOutOfBounds { index, x, y });
        }
    }
    for &label in doc.labels.iter().flatten() {
        if label < 0 || label as u64 >= num_classes as u64 {
            out.push(Violation::LabelOutOfRange { label });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

impl TryFrom<DocumentRecord> for Document {
    type Error = Vec<Violation>;

    /// Conversion checks structure only; range checks need the corpus sizes.
    fn try_from(r: DocumentRecord) -> std::result::Result<Self, Self::Error> {
        validate_document(&r, usize::MAX, usize::MAX)?;
        Ok(Document {
            id: r.id,
            width: r.w as u32,
            height: r.h as u32,
            labels: match r.labels {
                None => Labels::Unlabelled,
                Some(v) => Labels::Labelled(v.into_iter().map(|c| c as usize).collect()),
            },
            observations: r
                .words
                .into_iter()
                .map(|(v, x, y)| Observation::new(v as usize, x, y))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocab_size: usize,
    pub num_classes: usize,
}

impl Corpus {
    /// Builds a corpus, validating every document and id uniqueness.
    pub fn new(documents: Vec<Document>, vocab_size: usize, num_classes: usize) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::Config("vocabulary size must be positive".into()));
        }
        let mut seen = HashSet::new();
        for d in &documents {
            validate_document(&d.to_record(), vocab_size, num_classes).map_err(|violations| {
                Error::InvalidDocument {
                    id: d.id.clone(),
                    violations,
                }
            })?;
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        Ok(Self {
            documents,
            vocab_size,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_words(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    /// Sub-corpus keeping documents for which `keep` holds, in order.
    pub fn filter(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| keep(d)).cloned().collect(),
            vocab_size: self.vocab_size,
            num_classes: self.num_classes,
        }
    }
}

/// A class-tagged box, used for both ground truth and predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassBox {
    pub class: usize,
    pub bbox: BoundingBox,
}

/// Boxes per document id.
pub type BoxSet = BTreeMap<String, Vec<ClassBox>>;

/// Ground-truth object boxes per document id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub boxes: BoxSet,
}

impl GroundTruth {
    /// Checks class indices and, for documents present in `corpus`, that
    /// boxes lie inside the image.
    pub fn validate(&self, num_classes: usize, corpus: Option<&Corpus>) -> Result<()> {
        let dims: BTreeMap<&str, (f64, f64)> = corpus
            .map(|c| {
                c.documents
                    .iter()
                    .map(|d| (d.id.as_str(), (d.width as f64, d.height as f64)))
                    .collect()
            })
            .unwrap_or_default();
        for (id, boxes) in &self.boxes {
            for b in boxes {
                if b.class >= num_classes {
                    return Err(Error::LabelOutOfRange {
                        label: b.class,
                        classes: num_classes,
                    });
                }
                if !b.bbox.is_valid() {
                    return Err(Error::Config(format!("degenerate ground-truth box in `{id}`")));
                }
                if let Some(&(w, h)) = dims.get(id.as_str()) {
                    let bb = b.bbox;
                    if bb.x0 < 0.0 || bb.y0 < 0.0 || bb.x1 > w || bb.y1 > h {
                        return Err(Error::Config(format!("ground-truth box in `{id}` leaves the image")));
                    }
                }
            }
        }
        Ok(())
    }
}
