use super::elbo::elbo_terms;
use super::invariants::check_invariants;
use super::vmp::{
    init_image_state, init_state, update_appearance, update_image_nw, update_responsibilities, update_theta,
};
use super::{AppearanceExpectations, GlobalState, ImageState, Model};
use crate::corpus::{Corpus, Document, Labels};
use crate::error::{Error, Result};
use crate::priors::{HyperParams, Settings};

/// Execution options that do not change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    /// Run per-document updates on the rayon pool. Results are bit-identical
    /// to serial execution.
    pub parallel: bool,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            parallel: cfg!(feature = "parallel"),
            threads: None,
        }
    }
}

impl FitOptions {
    pub fn serial() -> Self {
        Self {
            parallel: false,
            threads: None,
        }
    }
}

/// Snapshot handed to a [`fit_observed`] observer after every sweep
/// (iteration 0 is the initial state).
pub struct Sweep<'a> {
    pub iteration: usize,
    pub elbo: f64,
    pub global: &'a GlobalState,
    pub states: &'a [ImageState],
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Model,
    pub states: Vec<ImageState>,
}

pub(crate) fn map_docs<R, F>(docs: &[Document], states: &[ImageState], parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&Document, &ImageState) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return docs.par_iter().zip(states.par_iter()).map(|(d, s)| f(d, s)).collect();
    }
    let _ = parallel;
    docs.iter().zip(states).map(|(d, s)| f(d, s)).collect()
}

fn for_each_doc<F>(docs: &[Document], states: &mut [ImageState], parallel: bool, f: F) -> Result<()>
where
    F: Fn(&Document, &mut ImageState) -> Result<()> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        let results: Vec<Result<()>> = docs
            .par_iter()
            .zip(states.par_iter_mut())
            .map(|(d, s)| f(d, s))
            .collect();
        return results.into_iter().collect();
    }
    let _ = parallel;
    docs.iter().zip(states.iter_mut()).try_for_each(|(d, s)| f(d, s))
}

fn with_pool<T: Send>(opts: &FitOptions, job: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let (true, Some(n)) = (opts.parallel, opts.threads) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        return Ok(pool.install(job));
    }
    let _ = opts;
    Ok(job())
}

fn check_training_input(corpus: &Corpus, hyper: &HyperParams) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    if let Some(d) = corpus.documents.iter().find(|d| d.is_empty()) {
        return Err(Error::Config(format!("document `{}` has no observations", d.id)));
    }
    if hyper.vocab_size != corpus.vocab_size {
        return Err(Error::VocabMismatch {
            model: hyper.vocab_size,
            corpus: corpus.vocab_size,
        });
    }
    if hyper.num_classes != corpus.num_classes || hyper.pi0.len() != hyper.num_topics() {
        return Err(Error::Config("hyper-parameters do not match the corpus classes".into()));
    }
    Ok(())
}

/// One per-document sweep: responsibilities, θ, then location posteriors.
fn local_sweep(
    doc: &Document,
    hyper: &HyperParams,
    elog: &AppearanceExpectations,
    state: &mut ImageState,
) -> Result<()> {
    update_responsibilities(doc, hyper, elog, state)?;
    update_theta(state);
    update_image_nw(doc, hyper, state)
}

/// Trains with default execution options.
pub fn fit(corpus: &Corpus, hyper: &HyperParams, seed: u64) -> Result<Model> {
    Ok(fit_observed(corpus, hyper, seed, FitOptions::default(), |_| {})?.model)
}

/// Full training loop; `observer` sees the state after every sweep.
pub fn fit_observed(
    corpus: &Corpus,
    hyper: &HyperParams,
    seed: u64,
    opts: FitOptions,
    mut observer: impl FnMut(&Sweep<'_>) + Send,
) -> Result<FitResult> {
    check_training_input(corpus, hyper)?;
    with_pool(&opts, move || {
        let par = opts.parallel;
        let (mut global, mut states) = init_state(corpus, hyper, seed)?;
        let mut elbo = elbo_terms(corpus, &global, &states, hyper, par)?.total();
        let mut trace = vec![elbo];
        observer(&Sweep {
            iteration: 0,
            elbo,
            global: &global,
            states: &states,
        });
        let s = &hyper.settings;
        for iteration in 1..=s.iterations {
            let elog = global.expectations();
            for_each_doc(&corpus.documents, &mut states, par, |d, st| {
                local_sweep(d, hyper, &elog, st)
            })?;
            global = update_appearance(corpus, &states, hyper);
            if cfg!(debug_assertions) {
                check_invariants(corpus, hyper, &global, &states)?;
            }
            let prev = elbo;
            elbo = elbo_terms(corpus, &global, &states, hyper, par)?.total();
            trace.push(elbo);
            observer(&Sweep {
                iteration,
                elbo,
                global: &global,
                states: &states,
            });
            if s.early_stop && ((elbo - prev) / prev.abs()).abs() < s.tolerance {
                break;
            }
        }
        Ok(FitResult {
            model: Model {
                hyper: hyper.clone(),
                global,
                trace,
            },
            states,
        })
    })?
}

/// Iterates per-document updates with the appearance posteriors frozen
/// until no responsibility moves by more than `tol`, or `max_sweeps`.
/// Returns the number of sweeps run.
pub fn refine_document(
    doc: &Document,
    hyper: &HyperParams,
    elog: &AppearanceExpectations,
    state: &mut ImageState,
    max_sweeps: usize,
    tol: f64,
) -> Result<usize> {
    for sweep in 1..=max_sweeps {
        let before = state.resp.clone();
        local_sweep(doc, hyper, elog, state)?;
        let delta = before
            .iter()
            .zip(&state.resp)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if delta < tol {
            return Ok(sweep);
        }
    }
    Ok(max_sweeps)
}

/// Held-out inference: fresh per-document states refined against the
/// model's fixed appearance posteriors.
pub fn infer_heldout(model: &Model, corpus: &Corpus, seed: u64) -> Result<Vec<ImageState>> {
    infer_heldout_with(model, corpus, seed, FitOptions::default())
}

pub fn infer_heldout_with(model: &Model, corpus: &Corpus, seed: u64, opts: FitOptions) -> Result<Vec<ImageState>> {
    let hyper = &model.hyper;
    if hyper.vocab_size != corpus.vocab_size {
        return Err(Error::VocabMismatch {
            model: hyper.vocab_size,
            corpus: corpus.vocab_size,
        });
    }
    if corpus.num_classes != hyper.num_classes {
        return Err(Error::Config(format!(
            "corpus has {} classes, model has {}",
            corpus.num_classes, hyper.num_classes
        )));
    }
    let elog = model.global.expectations();
    let sweeps = hyper.settings.heldout_sweeps;
    with_pool(&opts, || {
        let mut states = corpus
            .documents
            .iter()
            .map(|d| init_image_state(d, hyper, seed))
            .collect::<Result<Vec<_>>>()?;
        for_each_doc(&corpus.documents, &mut states, opts.parallel, |d, st| {
            refine_document(d, hyper, &elog, st, sweeps, 1e-6).map(|_| ())
        })?;
        Ok(states)
    })?
}

/// Independent-learning ablation: one single-foreground-topic model per
/// class. Member `c` sees every document; only documents labelled with
/// class `c` may use its foreground topic.
#[derive(Debug, Clone)]
pub struct IndependentFit {
    pub members: Vec<FitResult>,
}

/// Relabels `corpus` for the class-`c` member of an independent fit.
pub fn single_class_corpus(corpus: &Corpus, class: usize) -> Corpus {
    let mut out = corpus.clone();
    out.num_classes = 1;
    for d in &mut out.documents {
        if let Labels::Labelled(set) = &d.labels {
            d.labels = if set.contains(&class) {
                Labels::labelled([0])
            } else {
                Labels::labelled([])
            };
        }
    }
    out
}

pub fn fit_independent(corpus: &Corpus, settings: &Settings, seed: u64, opts: FitOptions) -> Result<IndependentFit> {
    let members = (0..corpus.num_classes)
        .map(|c| {
            let sub = single_class_corpus(corpus, c);
            let hyper = HyperParams::from_corpus(&sub, settings.clone())?;
            fit_observed(&sub, &hyper, seed.wrapping_add(c as u64), opts, |_| {})
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndependentFit { members })
}
