//! Bounding boxes from per-document variational state.
//!
//! Two strategies: a single box per class from the location posterior's
//! two-sigma ellipse, or several boxes per class from non-maximum
//! suppression over a responsibility heat map.

mod heatmap;
mod nms;

use std::str::FromStr;

use crate::corpus::{BoxSet, ClassBox, Corpus, Document, Labels};
use crate::error::{Error, Result};
use crate::geom::BoundingBox;
use crate::inference::{single_class_corpus, ImageState, NormalWishart};
use crate::priors::HyperParams;

pub use heatmap::{build_heatmap, HeatMap};
pub use nms::{nms_boxes, suppress, NmsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gaussian,
    Sampling,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Method::Gaussian),
            "sampling" => Ok(Method::Sampling),
            other => Err(Error::Config(format!("unknown localisation method `{other}`"))),
        }
    }
}

/// Which covariance defines the two-sigma ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceEstimate {
    /// E[Σ] = W⁻¹ / (ν − 3).
    #[default]
    PosteriorMean,
    /// (E[Λ])⁻¹ = (νW)⁻¹.
    PrecisionMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocaliseParams {
    pub method: Method,
    pub cell_size: u32,
    pub nms: NmsParams,
    /// Window sizes as multiples of the class's two-sigma box.
    pub scale_factors: Vec<f64>,
    pub covariance: CovarianceEstimate,
    /// Minimum expected topic proportion for an unlabelled document to be
    /// treated as containing a class.
    pub presence_threshold: f64,
}

impl Default for LocaliseParams {
    fn default() -> Self {
        Self {
            method: Method::Gaussian,
            cell_size: 5,
            nms: NmsParams::default(),
            scale_factors: vec![0.5, 1.0, 1.5],
            covariance: CovarianceEstimate::PosteriorMean,
            presence_threshold: 0.05,
        }
    }
}

impl LocaliseParams {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Default::default()
        }
    }
}

fn two_sigma_extents(nw: &NormalWishart, cov: CovarianceEstimate) -> Result<(f64, f64)> {
    let sigma = match cov {
        CovarianceEstimate::PosteriorMean => nw.expected_covariance()?,
        CovarianceEstimate::PrecisionMean => nw.precision_mean_covariance()?,
    };
    Ok((2.0 * sigma[(0, 0)].sqrt(), 2.0 * sigma[(1, 1)].sqrt()))
}

/// Axis-aligned bound of the two-sigma ellipse around the posterior mean,
/// before clamping.
pub fn unclamped_gaussian_box(nw: &NormalWishart, cov: CovarianceEstimate) -> Result<BoundingBox> {
    let (hx, hy) = two_sigma_extents(nw, cov)?;
    let (mx, my) = (nw.mean[0], nw.mean[1]);
    Ok(BoundingBox::new(mx - hx, my - hy, mx + hx, my + hy))
}

/// [`unclamped_gaussian_box`] with its centre pulled inside the image and
/// the box clamped to it.
pub fn gaussian_box(nw: &NormalWishart, width: f64, height: f64, cov: CovarianceEstimate) -> Result<BoundingBox> {
    let (hx, hy) = two_sigma_extents(nw, cov)?;
    let mx = nw.mean[0].clamp(0.0, width);
    let my = nw.mean[1].clamp(0.0, height);
    Ok(BoundingBox::new(mx - hx, my - hy, mx + hx, my + hy).clamp_to(width, height))
}

/// Classes to localise: the labels, or for unlabelled documents every class
/// whose expected proportion E[θ_k] exceeds the presence threshold.
pub fn classes_to_localise(hyper: &HyperParams, doc: &Document, state: &ImageState, threshold: f64) -> Vec<usize> {
    match &doc.labels {
        Labels::Labelled(set) => set.iter().copied().collect(),
        Labels::Unlabelled => {
            let total: f64 = state.theta.iter().sum();
            (0..hyper.num_classes)
                .filter(|&k| state.theta[k] / total > threshold)
                .collect()
        }
    }
}

/// Window sizes for heat-map search derived from the class's own Gaussian.
fn window_scales(nw: &NormalWishart, params: &LocaliseParams) -> Result<Vec<(f64, f64)>> {
    let (hx, hy) = two_sigma_extents(nw, params.covariance)?;
    Ok(params
        .scale_factors
        .iter()
        .map(|f| (2.0 * hx * f, 2.0 * hy * f))
        .collect())
}

/// Boxes for every present class of one document. The Gaussian method
/// yields exactly one box per class; sampling yields up to `max_boxes`.
/// Heat maps of different classes never suppress each other.
pub fn localise_document(
    hyper: &HyperParams,
    doc: &Document,
    state: &ImageState,
    params: &LocaliseParams,
) -> Result<Vec<ClassBox>> {
    let (w, h) = (doc.width as f64, doc.height as f64);
    let mut out = Vec::new();
    for class in classes_to_localise(hyper, doc, state, params.presence_threshold) {
        let nw = &state.nw[class];
        match params.method {
            Method::Gaussian => {
                let bbox = gaussian_box(nw, w, h, params.covariance)?.with_score(state.mass(class));
                out.push(ClassBox { class, bbox });
            }
            Method::Sampling => {
                let hm = build_heatmap(doc, &state.column(class), class, params.cell_size);
                let scales = window_scales(nw, params)?;
                out.extend(
                    nms_boxes(&hm, &scales, &params.nms)
                        .into_iter()
                        .map(|bbox| ClassBox { class, bbox }),
                );
            }
        }
    }
    Ok(out)
}

/// Smoothed heat maps for the classes [`localise_document`] would report.
pub fn document_heatmaps(
    hyper: &HyperParams,
    doc: &Document,
    state: &ImageState,
    params: &LocaliseParams,
) -> Vec<HeatMap> {
    classes_to_localise(hyper, doc, state, params.presence_threshold)
        .into_iter()
        .map(|k| build_heatmap(doc, &state.column(k), k, params.cell_size))
        .collect()
}

pub fn localise_corpus(
    hyper: &HyperParams,
    corpus: &Corpus,
    states: &[ImageState],
    params: &LocaliseParams,
) -> Result<BoxSet> {
    corpus
        .documents
        .iter()
        .zip(states)
        .map(|(d, s)| Ok((d.id.clone(), localise_document(hyper, d, s, params)?)))
        .collect()
}

/// Merges the outputs of independently trained single-class members; member
/// `c` reports class `c`.
pub fn localise_independent(
    members: &[(&HyperParams, &[ImageState])],
    corpus: &Corpus,
    params: &LocaliseParams,
) -> Result<BoxSet> {
    let mut out: BoxSet = corpus.documents.iter().map(|d| (d.id.clone(), Vec::new())).collect();
    for (class, (hyper, states)) in members.iter().enumerate() {
        let sub = single_class_corpus(corpus, class);
        for (doc, st) in sub.documents.iter().zip(states.iter()) {
            let boxes = localise_document(hyper, doc, st, params)?;
            out.get_mut(&doc.id)
                .expect("same documents")
                .extend(boxes.into_iter().map(|b| ClassBox { class, bbox: b.bbox }));
        }
    }
    Ok(out)
}
