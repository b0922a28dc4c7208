//! Weakly supervised object localisation with a Bayesian joint topic model.
//!
//! Images are bags of (visual word, location) observations. Every object
//! class owns a foreground topic with a per-image Gaussian location model,
//! and a pool of background topics with uniform location explains away
//! clutter. Image-level labels constrain which foreground topics each image
//! may use. Variational message passing fits the model, after which boxes
//! are read off either the per-image Gaussians or responsibility heat maps.
//!
//! Module map:
//!
//! - [`corpus`]: documents, corpus/ground-truth files, synthetic generator
//! - [`priors`]: hyper-parameters, label encoding, appearance and spatial priors
//! - [`inference`]: the variational engine, ELBO, training and held-out inference
//! - [`localise`]: Gaussian boxes, heat maps and non-maximum suppression
//! - [`eval`]: IoU and CorLoc scoring

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod geom;
pub mod inference;
pub mod localise;
pub mod priors;
pub mod special;

pub use corpus::{Corpus, Document, GroundTruth, Labels, Observation, SynthConfig};
pub use error::{Error, Result};
pub use eval::{corloc, iou, EvalReport};
pub use geom::BoundingBox;
pub use inference::{fit, infer_heldout, FitOptions, GlobalState, ImageState, Model};
pub use localise::{localise_document, LocaliseParams, Method};
pub use priors::HyperParams;
