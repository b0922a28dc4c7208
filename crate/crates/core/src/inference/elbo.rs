//! Evidence lower bound of the factored posterior.

use nalgebra::Vector2;

use super::fit::map_docs;
use super::{AppearanceExpectations, GlobalState, ImageState};
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::priors::HyperParams;
use crate::special::{digamma, ln_gamma};

/// KL(Dir(q) ‖ Dir(p)) restricted to the entries where `keep` holds.
pub fn kl_dirichlet(q: &[f64], p: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
    let idx: Vec<usize> = (0..q.len()).filter(|&i| keep(i)).collect();
    let q_sum: f64 = idx.iter().map(|&i| q[i]).sum();
    let p_sum: f64 = idx.iter().map(|&i| p[i]).sum();
    let psi_q = digamma(q_sum);
    let mut kl = ln_gamma(q_sum) - ln_gamma(p_sum);
    for &i in &idx {
        kl += ln_gamma(p[i]) - ln_gamma(q[i]) + (q[i] - p[i]) * (digamma(q[i]) - psi_q);
    }
    kl
}

/// ELBO split into the corpus-level appearance term and one term per
/// document.
#[derive(Debug, Clone, PartialEq)]
pub struct ElboTerms {
    /// −Σ_k KL(q(π_k) ‖ p(π_k)).
    pub appearance: f64,
    pub documents: Vec<f64>,
}

impl ElboTerms {
    pub fn total(&self) -> f64 {
        self.appearance + self.documents.iter().sum::<f64>()
    }
}

/// Contribution of one document:
/// `E[ln p(y,x,l | θ,π,μ,Λ)] − E[ln q(y)] − KL(q(θ)) − Σ_k KL(q(μ_k,Λ_k))`.
pub fn document_elbo(doc: &Document, hyper: &HyperParams, elog: &AppearanceExpectations, state: &ImageState) -> f64 {
    let k = state.num_topics();
    let c = hyper.num_classes;
    let spatial = hyper.settings.spatial_enabled;
    let adm: Vec<usize> = (0..k).filter(|&t| state.is_admissible(t)).collect();
    let psi_total = digamma(adm.iter().map(|&t| state.theta[t]).sum());
    let log_uniform = -doc.area().ln();

    let mut value = -kl_dirichlet(&state.theta, &state.alpha, |t| state.alpha[t] > 0.0);
    if spatial {
        for t in adm.iter().copied().filter(|&t| t < c) {
            value -= state.nw[t].kl_from(&hyper.nw_prior);
        }
    }
    for (i, obs) in doc.observations.iter().enumerate() {
        let row = state.row(i);
        let loc = Vector2::new(obs.x, obs.y);
        for &t in &adm {
            let r = row[t];
            if r <= 0.0 {
                continue;
            }
            let sp = if spatial && t < c {
                state.nw[t].expected_log_gaussian(loc)
            } else {
                log_uniform
            };
            let e_theta = digamma(state.theta[t]) - psi_total;
            value += r * (e_theta + elog.get(obs.word, t) + sp - r.ln());
        }
    }
    value
}

pub fn elbo_terms(
    corpus: &Corpus,
    global: &GlobalState,
    states: &[ImageState],
    hyper: &HyperParams,
    parallel: bool,
) -> Result<ElboTerms> {
    let elog = global.expectations();
    let appearance: f64 = -global
        .pi
        .iter()
        .zip(&hyper.pi0)
        .map(|(q, p)| kl_dirichlet(q, p, |_| true))
        .sum::<f64>();
    let documents = map_docs(&corpus.documents, states, parallel, |d, s| {
        document_elbo(d, hyper, &elog, s)
    });
    let terms = ElboTerms { appearance, documents };
    if !terms.total().is_finite() {
        return Err(Error::Numerical("non-finite ELBO".into()));
    }
    Ok(terms)
}

pub fn compute_elbo(corpus: &Corpus, global: &GlobalState, states: &[ImageState], hyper: &HyperParams) -> Result<f64> {
    Ok(elbo_terms(corpus, global, states, hyper, false)?.total())
}
