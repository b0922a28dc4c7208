//! Variational message passing for the joint topic model.
//!
//! The posterior is approximated by
//! `q(π) · Π_j q(θ_j) · Π_{j,k∈fg} q(μ_jk, Λ_jk) · Π_{i,j} q(y_ij)`,
//! with Dirichlet, Normal-Wishart and categorical factors. One training
//! sweep updates, per document, the responsibilities, then θ, then the
//! location posteriors; the appearance Dirichlets are then re-estimated
//! from all documents.

mod elbo;
mod fit;
mod invariants;
mod model_io;
mod nw;
mod vmp;

use serde::{Deserialize, Serialize};

use crate::priors::HyperParams;

pub use elbo::{compute_elbo, document_elbo, elbo_terms, kl_dirichlet, ElboTerms};
pub use fit::{
    fit, fit_independent, fit_observed, infer_heldout, infer_heldout_with, refine_document, single_class_corpus,
    FitOptions, FitResult, IndependentFit, Sweep,
};
pub use invariants::{check_invariants, COUNT_TOL, ROW_SUM_TOL};
pub use model_io::{load_model, model_to_string, parse_model, save_model, ModelFile, ModelKind};
pub use nw::{is_spd, spatial_predictive, update_nw, NormalWishart, MIN_MASS};
pub use vmp::{
    admissible_mask, init_image_state, init_state, update_appearance, update_image_nw, update_responsibilities,
    update_theta, AppearanceExpectations,
};

/// Parameters of the appearance Dirichlets q(π_k) = Dir(pi[k]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalState {
    /// One row of `vocab_size` per topic, foreground classes first.
    pub pi: Vec<Vec<f64>>,
}

impl GlobalState {
    pub fn num_topics(&self) -> usize {
        self.pi.len()
    }

    pub fn expectations(&self) -> AppearanceExpectations {
        AppearanceExpectations::new(self)
    }
}

/// Variational state of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageState {
    /// Dirichlet parameters of q(θ_j); zero on excluded topics.
    pub theta: Vec<f64>,
    /// Row-major `N_j × K` responsibilities.
    pub resp: Vec<f64>,
    /// Location posterior per foreground topic.
    pub nw: Vec<NormalWishart>,
    pub alpha: Vec<f64>,
}

impl ImageState {
    pub fn num_topics(&self) -> usize {
        self.alpha.len()
    }

    pub fn num_words(&self) -> usize {
        self.resp.len() / self.num_topics()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.num_topics();
        &self.resp[i * k..(i + 1) * k]
    }

    /// Responsibilities of every word for `topic`.
    pub fn column(&self, topic: usize) -> Vec<f64> {
        self.resp
            .iter()
            .skip(topic)
            .step_by(self.num_topics())
            .copied()
            .collect()
    }

    pub fn is_admissible(&self, topic: usize) -> bool {
        self.alpha[topic] > 0.0
    }

    /// Total responsibility mass of `topic`.
    pub fn mass(&self, topic: usize) -> f64 {
        self.column(topic).iter().sum()
    }
}

/// A trained model: fixed parameters, appearance posteriors and the ELBO
/// trace (entry 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub hyper: HyperParams,
    pub global: GlobalState,
    pub trace: Vec<f64>,
}
