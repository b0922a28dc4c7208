//! Browser bindings: train on a synthetic corpus, then inspect documents and
//! scores from JavaScript. Every view is returned as a JSON string.

use serde_json::{json, Value};
use topicloc::corpus::{generate_synthetic, ClassBox, SynthConfig, Synthetic};
use topicloc::eval::corloc;
use topicloc::inference::{fit_observed, FitOptions, FitResult};
use topicloc::localise::{document_heatmaps, localise_corpus, localise_document, LocaliseParams, Method};
use topicloc::priors::{HyperParams, Settings};
use topicloc::{Error, Result};
use wasm_bindgen::prelude::*;

/// A generated corpus and the model trained on it.
#[wasm_bindgen]
pub struct Session {
    syn: Synthetic,
    fit: FitResult,
}

fn method(name: &str) -> Result<LocaliseParams> {
    Ok(LocaliseParams::with_method(name.parse::<Method>()?))
}

fn boxes_json(boxes: &[ClassBox]) -> Value {
    boxes
        .iter()
        .map(|b| json!({"c": b.class, "x0": b.bbox.x0, "y0": b.bbox.y0, "x1": b.bbox.x1, "y1": b.bbox.y1, "s": b.bbox.score}))
        .collect()
}

impl Session {
    pub fn train(seed: u32, docs: usize, unlabelled_fraction: f64, spatial: bool) -> Result<Session> {
        let syn = generate_synthetic(&SynthConfig {
            num_documents: docs,
            unlabelled_fraction,
            seed: seed as u64,
            ..Default::default()
        })?;
        let settings = Settings {
            num_bg: 2,
            spatial_enabled: spatial,
            ..Default::default()
        };
        let hyper = HyperParams::from_corpus(&syn.corpus, settings)?;
        let opts = FitOptions::serial();
        let fit = fit_observed(&syn.corpus, &hyper, seed as u64, opts, |_| {})?;
        Ok(Session { syn, fit })
    }

    /// Words coloured by their most likely topic, predicted and true boxes,
    /// and one heat map per localised class.
    pub fn document_view(&self, index: usize, method_name: &str) -> Result<String> {
        let doc = self
            .syn
            .corpus
            .documents
            .get(index)
            .ok_or_else(|| Error::Config(format!("no document {index}")))?;
        let st = &self.fit.states[index];
        let hyper = &self.fit.model.hyper;
        let params = method(method_name)?;
        let words: Vec<Value> = doc
            .observations
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let row = st.row(i);
                let top = (0..row.len()).fold(0, |best, k| if row[k] > row[best] { k } else { best });
                json!([o.x, o.y, top, row[top]])
            })
            .collect();
        let heatmaps: Vec<Value> = document_heatmaps(hyper, doc, st, &params)
            .into_iter()
            .map(|hm| json!({"c": hm.class, "cols": hm.cols, "rows": hm.rows, "cell": hm.cell_size, "grid": hm.grid}))
            .collect();
        let predicted = localise_document(hyper, doc, st, &params)?;
        let labels: Option<Vec<usize>> = (!doc.labels.is_unlabelled()).then(|| doc.labels.classes().collect());
        Ok(json!({
            "id": doc.id,
            "width": doc.width,
            "height": doc.height,
            "labels": labels,
            "num_classes": hyper.num_classes,
            "num_topics": hyper.num_topics(),
            "words": words,
            "predicted": boxes_json(&predicted),
            "truth": boxes_json(&self.syn.ground_truth.boxes[&doc.id]),
            "heatmaps": heatmaps,
        })
        .to_string())
    }

    pub fn evaluate_json(&self, method_name: &str) -> Result<String> {
        let params = method(method_name)?;
        let boxes = localise_corpus(&self.fit.model.hyper, &self.syn.corpus, &self.fit.states, &params)?;
        Ok(corloc(&boxes, &self.syn.ground_truth)?.to_json())
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Session {
    /// Generates a corpus (3 classes, 2 background topics) and trains on it.
    #[wasm_bindgen(constructor)]
    pub fn new(
        seed: u32,
        docs: usize,
        unlabelled_fraction: f64,
        spatial: bool,
    ) -> std::result::Result<Session, JsError> {
        Session::train(seed, docs, unlabelled_fraction, spatial).map_err(js)
    }

    #[wasm_bindgen(js_name = numDocuments)]
    pub fn num_documents(&self) -> usize {
        self.syn.corpus.len()
    }

    #[wasm_bindgen(js_name = elboTrace)]
    pub fn elbo_trace(&self) -> Vec<f64> {
        self.fit.model.trace.clone()
    }

    /// `method` is `"gaussian"` or `"sampling"`.
    pub fn document(&self, index: usize, method: &str) -> std::result::Result<String, JsError> {
        self.document_view(index, method).map_err(js)
    }

    /// CorLoc report over the whole corpus.
    pub fn evaluate(&self, method: &str) -> std::result::Result<String, JsError> {
        self.evaluate_json(method).map_err(js)
    }
}
