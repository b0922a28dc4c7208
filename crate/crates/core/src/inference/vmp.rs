use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::nw::update_nw;
use super::{GlobalState, ImageState};
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::priors::{encode_alpha, HyperParams, PRIOR_FLOOR};
use crate::special::digamma;

/// E[ln π_kv] = ψ(pi_kv) − ψ(Σ_v pi_kv), stored word-major.
#[derive(Debug, Clone)]
pub struct AppearanceExpectations {
    topics: usize,
    table: Vec<f64>,
}

impl AppearanceExpectations {
    pub fn new(global: &GlobalState) -> Self {
        let k = global.pi.len();
        let nv = global.pi.first().map_or(0, Vec::len);
        let mut table = vec![0.0; k * nv];
        for (t, row) in global.pi.iter().enumerate() {
            let total = digamma(row.iter().sum());
            for (v, &p) in row.iter().enumerate() {
                table[v * k + t] = digamma(p) - total;
            }
        }
        Self { topics: k, table }
    }

    #[inline]
    pub fn get(&self, word: usize, topic: usize) -> f64 {
        self.table[word * self.topics + topic]
    }
}

pub fn admissible_mask(alpha: &[f64]) -> Vec<bool> {
    alpha.iter().map(|&a| a > 0.0).collect()
}

fn mix_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a over the id, then a splitmix64 finaliser.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Initial state of one document: responsibilities uniform over admissible
/// topics, perturbed multiplicatively and renormalised; locations at the
/// prior. The random stream depends only on `seed` and the document id.
pub fn init_image_state(doc: &Document, hyper: &HyperParams, seed: u64) -> Result<ImageState> {
    let alpha = encode_alpha(&doc.labels, hyper)?;
    let k = alpha.len();
    let mask = admissible_mask(&alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &doc.id));
    let jitter = hyper.settings.init_jitter;
    let mut resp = vec![0.0; doc.len() * k];
    for row in resp.chunks_mut(k) {
        for (t, r) in row.iter_mut().enumerate() {
            if mask[t] {
                *r = 1.0 + jitter * rng.random::<f64>();
            }
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|r| *r /= s);
    }
    let mut state = ImageState {
        theta: vec![0.0; k],
        resp,
        nw: vec![hyper.nw_prior; hyper.num_classes],
        alpha,
    };
    update_theta(&mut state);
    Ok(state)
}

/// Initial global and per-document state. `pi = pi0 + jitter · floor · U(0,1)`.
pub fn init_state(corpus: &Corpus, hyper: &HyperParams, seed: u64) -> Result<(GlobalState, Vec<ImageState>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = hyper.settings.init_jitter * PRIOR_FLOOR;
    let pi = hyper
        .pi0
        .iter()
        .map(|row| row.iter().map(|&p| p + amp * rng.random::<f64>()).collect())
        .collect();
    let states = corpus
        .documents
        .iter()
        .map(|d| init_image_state(d, hyper, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok((GlobalState { pi }, states))
}

/// θ_k = α_k + Σ_i resp_ik.
pub fn update_theta(state: &mut ImageState) {
    let k = state.num_topics();
    state.theta.copy_from_slice(&state.alpha);
    for row in state.resp.chunks(k) {
        for (t, r) in state.theta.iter_mut().zip(row) {
            *t += r;
        }
    }
}

/// Recomputes the responsibilities of every word in `doc` in log space.
///
/// Score of topic k for word i is
/// `spatial_k(l_i) + E[ln π_{k,x_i}] + E[ln θ_k]`, where the spatial term is
/// the Student-t predictive for foreground topics and the uniform image
/// density for background topics (and for every topic when the spatial
/// model is disabled). Excluded topics are pinned to zero.
pub fn update_responsibilities(
    doc: &Document,
    hyper: &HyperParams,
    elog: &AppearanceExpectations,
    state: &mut ImageState,
) -> Result<()> {
    let k = state.num_topics();
    let c = hyper.num_classes;
    let adm: Vec<usize> = (0..k).filter(|&t| state.is_admissible(t)).collect();
    let theta_total: f64 = adm.iter().map(|&t| state.theta[t]).sum();
    let psi_total = digamma(theta_total);
    let mut elog_theta = vec![0.0; k];
    for &t in &adm {
        let th = state.theta[t];
        if !(th > 0.0) {
            return Err(Error::Numerical(format!("theta[{t}] = {th} for admissible topic")));
        }
        elog_theta[t] = digamma(th) - psi_total;
    }
    let log_uniform = -doc.area().ln();
    let spatial = hyper.settings.spatial_enabled;

    let mut scores = vec![0.0; adm.len()];
    for (i, obs) in doc.observations.iter().enumerate() {
        let loc = Vector2::new(obs.x, obs.y);
        let mut max = f64::NEG_INFINITY;
        for (s, &t) in scores.iter_mut().zip(&adm) {
            let sp = if spatial && t < c {
                state.nw[t].predictive_log_density(loc)
            } else {
                log_uniform
            };
            *s = sp + elog.get(obs.word, t) + elog_theta[t];
            max = max.max(*s);
        }
        if !max.is_finite() {
            return Err(Error::Numerical(format!(
                "no finite responsibility score for word {i} of `{}`",
                doc.id
            )));
        }
        let mut total = 0.0;
        for s in scores.iter_mut() {
            *s = (*s - max).exp();
            total += *s;
        }
        let row = &mut state.resp[i * k..(i + 1) * k];
        row.fill(0.0);
        for (&s, &t) in scores.iter().zip(&adm) {
            row[t] = s / total;
        }
    }
    Ok(())
}

/// Location posteriors of every admissible foreground topic.
pub fn update_image_nw(doc: &Document, hyper: &HyperParams, state: &mut ImageState) -> Result<()> {
    let points: Vec<[f64; 2]> = doc.observations.iter().map(|o| [o.x, o.y]).collect();
    for t in 0..hyper.num_classes {
        if state.is_admissible(t) {
            let w = state.column(t);
            state.nw[t] = update_nw(&hyper.nw_prior, &points, &w)?;
        }
    }
    Ok(())
}

/// π_vk = π⁰_vk + Σ_ij 1[x_ij = v] resp_ijk, accumulated in document id
/// order so the result does not depend on how the corpus is arranged.
pub fn update_appearance(corpus: &Corpus, states: &[ImageState], hyper: &HyperParams) -> GlobalState {
    let mut pi = hyper.pi0.clone();
    let k = pi.len();
    let mut order: Vec<usize> = (0..corpus.documents.len()).collect();
    order.sort_by(|&a, &b| corpus.documents[a].id.cmp(&corpus.documents[b].id));
    for j in order {
        let (doc, st) = (&corpus.documents[j], &states[j]);
        for (obs, row) in doc.observations.iter().zip(st.resp.chunks(k)) {
            for (t, &r) in row.iter().enumerate() {
                pi[t][obs.word] += r;
            }
        }
    }
    GlobalState { pi }
}
