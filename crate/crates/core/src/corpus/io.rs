//! Line-delimited JSON corpus and box files.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_document, BoxSet, ClassBox, Corpus, Document, GroundTruth};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::geom::BoundingBox;

/// One corpus line: `{"id":..,"w":..,"h":..,"labels":[..]|null,"words":[[v,x,y],..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub id: String,
    pub w: i64,
    pub h: i64,
    pub labels: Option<Vec<i64>>,
    pub words: Vec<(i64, f64, f64)>,
}

/// One box inside a ground-truth or prediction line. `s` is only present
/// on predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub c: usize,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocBoxes {
    pub id: String,
    pub boxes: Vec<BoxRecord>,
}

impl From<BoxRecord> for ClassBox {
    fn from(r: BoxRecord) -> Self {
        ClassBox {
            class: r.c,
            bbox: BoundingBox::new(r.x0, r.y0, r.x1, r.y1).with_score(r.s.unwrap_or(0.0)),
        }
    }
}

impl BoxRecord {
    pub fn from_class_box(b: &ClassBox, with_score: bool) -> Self {
        BoxRecord {
            c: b.class,
            x0: b.bbox.x0,
            y0: b.bbox.y0,
            x1: b.bbox.x1,
            y1: b.bbox.y1,
            s: with_score.then_some(b.bbox.score),
        }
    }
}

fn lines<R: Read>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    BufReader::new(reader).lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Parses a corpus from a reader; `origin` only labels error messages.
pub fn parse_corpus<R: Read>(reader: R, origin: &Path, vocab_size: usize, num_classes: usize) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines(reader) {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            line,
            msg: e.to_string(),
        })?;
        if let Err(violations) = validate_document(&record, vocab_size, num_classes) {
            return Err(Error::InvalidDocument {
                id: record.id,
                violations,
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        let doc = Document::try_from(record).expect("validated above");
        documents.push(doc);
    }
    Corpus::new(documents, vocab_size, num_classes)
}

pub fn load_corpus(path: &Path, vocab_size: usize, num_classes: usize) -> Result<Corpus> {
    let f = std::fs::File::open(path)?;
    parse_corpus(f, path, vocab_size, num_classes)
}

/// Smallest vocabulary size covering every word id in a corpus file.
/// Negative ids are left for validation to report.
pub fn scan_vocab_size<R: Read>(reader: R, origin: &Path) -> Result<usize> {
    let mut size = 0;
    for (line, text) in lines(reader) {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            line,
            msg: e.to_string(),
        })?;
        for &(v, _, _) in &record.words {
            if v >= 0 {
                size = size.max(v as usize + 1);
            }
        }
    }
    Ok(size)
}

pub fn write_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for d in &corpus.documents {
        let line = serde_json::to_string(&d.to_record()).expect("record serialises");
        writeln!(out, "{line}").unwrap();
    }
    out
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    write_atomic(path, write_corpus(corpus).as_bytes())?;
    Ok(())
}

/// Parses a box file (ground truth or predictions) into per-document boxes.
pub fn parse_boxes<R: Read>(reader: R, origin: &Path) -> Result<BoxSet> {
    let mut out = BoxSet::new();
    for (line, text) in lines(reader) {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: DocBoxes = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            line,
            msg: e.to_string(),
        })?;
        if out.contains_key(&rec.id) {
            return Err(Error::DuplicateId(rec.id));
        }
        out.insert(rec.id, rec.boxes.into_iter().map(ClassBox::from).collect());
    }
    Ok(out)
}

pub fn parse_ground_truth<R: Read>(reader: R, origin: &Path) -> Result<GroundTruth> {
    Ok(GroundTruth {
        boxes: parse_boxes(reader, origin)?,
    })
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    parse_ground_truth(std::fs::File::open(path)?, path)
}

pub fn load_boxes(path: &Path) -> Result<BoxSet> {
    parse_boxes(std::fs::File::open(path)?, path)
}

/// Renders boxes as one line per document, in id order.
pub fn write_boxes(boxes: &BoxSet, with_score: bool) -> String {
    let mut out = String::new();
    for (id, list) in boxes {
        let rec = DocBoxes {
            id: id.clone(),
            boxes: list.iter().map(|b| BoxRecord::from_class_box(b, with_score)).collect(),
        };
        writeln!(out, "{}", serde_json::to_string(&rec).expect("record serialises")).unwrap();
    }
    out
}

pub fn write_ground_truth(gt: &GroundTruth) -> String {
    write_boxes(&gt.boxes, false)
}

pub fn save_ground_truth(gt: &GroundTruth, path: &Path) -> Result<()> {
    write_atomic(path, write_ground_truth(gt).as_bytes())?;
    Ok(())
}

pub fn save_boxes(boxes: &BoxSet, with_score: bool, path: &Path) -> Result<()> {
    write_atomic(path, write_boxes(boxes, with_score).as_bytes())?;
    Ok(())
}
