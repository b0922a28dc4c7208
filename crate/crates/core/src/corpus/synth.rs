//! Forward sampler for the generative model, used to build corpora with
//! known answers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{ClassBox, Corpus, Document, GroundTruth, Labels, Observation};
use crate::error::{Error, Result};
use crate::geom::BoundingBox;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub num_bg_topics: usize,
    pub num_documents: usize,
    pub words_per_document: usize,
    pub vocab_size: usize,
    pub width: u32,
    pub height: u32,
    /// Symmetric Dirichlet concentration for the true topic appearances.
    /// Small values give sparse, well separated topics.
    pub appearance_sharpness: f64,
    /// Object standard deviation as a fraction of the image side.
    pub fg_cov_scale: f64,
    /// Probability that each class is present in a document.
    pub label_density: f64,
    /// Fraction of documents (rounded down) whose labels are withheld.
    pub unlabelled_fraction: f64,
    /// Symmetric Dirichlet concentration for per-document topic proportions
    /// over the available topics.
    pub theta_concentration: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_classes: 3,
            num_bg_topics: 2,
            num_documents: 200,
            words_per_document: 100,
            vocab_size: 200,
            width: 200,
            height: 160,
            appearance_sharpness: 0.05,
            fg_cov_scale: 0.12,
            label_density: 0.5,
            unlabelled_fraction: 0.0,
            theta_concentration: 5.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.num_bg_topics == 0 {
            return bad("at least one background topic is required");
        }
        if self.num_documents == 0 || self.words_per_document == 0 || self.vocab_size == 0 {
            return bad("document, word and vocabulary counts must be positive");
        }
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        if !(self.appearance_sharpness > 0.0) || !(self.theta_concentration > 0.0) {
            return bad("concentrations must be positive");
        }
        if !(self.fg_cov_scale >= 0.0) || !self.fg_cov_scale.is_finite() {
            return bad("foreground covariance scale must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.label_density) {
            return bad("label density must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.unlabelled_fraction) {
            return bad("unlabelled fraction must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Generating Gaussian of one object (axis-aligned).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueGaussian {
    pub class: usize,
    pub mean: (f64, f64),
    pub sd: (f64, f64),
}

impl TrueGaussian {
    /// Two-standard-deviation box, clamped to the image.
    pub fn two_sigma_box(&self, width: f64, height: f64) -> BoundingBox {
        BoundingBox::new(
            self.mean.0 - 2.0 * self.sd.0,
            self.mean.1 - 2.0 * self.sd.1,
            self.mean.0 + 2.0 * self.sd.0,
            self.mean.1 + 2.0 * self.sd.1,
        )
        .clamp_to(width, height)
    }
}

/// Generator output: the corpus plus everything that produced it.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub ground_truth: GroundTruth,
    /// True appearance distributions, foreground classes first.
    pub topics: Vec<Vec<f64>>,
    /// Per document topic proportions (zero for unavailable topics).
    pub thetas: Vec<Vec<f64>>,
    /// Per document generating topic of every observation.
    pub assignments: Vec<Vec<usize>>,
    pub gaussians: Vec<Vec<TrueGaussian>>,
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        // every gamma draw underflowed; fall back to a single random atom
        let i = rng.random_range(0..v.len());
        v[i] = 1.0;
    }
    v
}

fn categorical<R: Rng>(rng: &mut R, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Samples a corpus from the generative process. Deterministic in `cfg.seed`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Synthetic> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c = cfg.num_classes;
    let k = c + cfg.num_bg_topics;
    let (w, h) = (cfg.width as f64, cfg.height as f64);

    let topics: Vec<Vec<f64>> = (0..k)
        .map(|_| dirichlet(&mut rng, &vec![cfg.appearance_sharpness; cfg.vocab_size]))
        .collect();

    let mut order: Vec<usize> = (0..cfg.num_documents).collect();
    order.shuffle(&mut rng);
    let n_unlabelled = (cfg.unlabelled_fraction * cfg.num_documents as f64 + 1e-9).floor() as usize;
    let mut unlabelled = vec![false; cfg.num_documents];
    for &j in order.iter().take(n_unlabelled) {
        unlabelled[j] = true;
    }

    let width = (cfg.num_documents.max(1) as f64).log10().floor() as usize + 1;
    let mut documents = Vec::with_capacity(cfg.num_documents);
    let mut gt = GroundTruth::default();
    let mut thetas = Vec::with_capacity(cfg.num_documents);
    let mut assignments = Vec::with_capacity(cfg.num_documents);
    let mut gaussians = Vec::with_capacity(cfg.num_documents);

    for (j, &hide) in unlabelled.iter().enumerate() {
        let id = format!("doc{j:0width$}");
        let present: Vec<usize> = (0..c).filter(|_| rng.random::<f64>() < cfg.label_density).collect();

        let mut alpha = vec![0.0; k];
        for &cl in &present {
            alpha[cl] = cfg.theta_concentration;
        }
        for a in alpha.iter_mut().skip(c) {
            *a = cfg.theta_concentration;
        }
        let support: Vec<usize> = (0..k).filter(|&t| alpha[t] > 0.0).collect();
        let sub = dirichlet(&mut rng, &support.iter().map(|&t| alpha[t]).collect::<Vec<_>>());
        let mut theta = vec![0.0; k];
        for (&t, &p) in support.iter().zip(&sub) {
            theta[t] = p;
        }

        let objs: Vec<TrueGaussian> = present
            .iter()
            .map(|&cl| TrueGaussian {
                class: cl,
                mean: (w * rng.random_range(0.25..=0.75), h * rng.random_range(0.25..=0.75)),
                sd: (
                    cfg.fg_cov_scale * w * rng.random_range(0.6..=1.0),
                    cfg.fg_cov_scale * h * rng.random_range(0.6..=1.0),
                ),
            })
            .collect();

        let mut observations = Vec::with_capacity(cfg.words_per_document);
        let mut assign = Vec::with_capacity(cfg.words_per_document);
        for _ in 0..cfg.words_per_document {
            let t = categorical(&mut rng, &theta);
            let word = categorical(&mut rng, &topics[t]);
            let (x, y) = if t < c {
                let g = objs.iter().find(|g| g.class == t).expect("present class");
                sample_truncated(&mut rng, g, w, h)
            } else {
                (rng.random_range(0.0..=w), rng.random_range(0.0..=h))
            };
            observations.push(Observation::new(word, x, y));
            assign.push(t);
        }

        gt.boxes.insert(
            id.clone(),
            objs.iter()
                .map(|g| ClassBox {
                    class: g.class,
                    bbox: g.two_sigma_box(w, h),
                })
                .collect(),
        );
        documents.push(Document {
            id,
            width: cfg.width,
            height: cfg.height,
            labels: if hide {
                Labels::Unlabelled
            } else {
                Labels::labelled(present)
            },
            observations,
        });
        thetas.push(theta);
        assignments.push(assign);
        gaussians.push(objs);
    }

    Ok(Synthetic {
        corpus: Corpus::new(documents, cfg.vocab_size, c)?,
        ground_truth: gt,
        topics,
        thetas,
        assignments,
        gaussians,
    })
}

fn sample_truncated<R: Rng>(rng: &mut R, g: &TrueGaussian, w: f64, h: f64) -> (f64, f64) {
    for _ in 0..64 {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let (x, y) = (g.mean.0 + g.sd.0 * zx, g.mean.1 + g.sd.1 * zy);
        if (0.0..=w).contains(&x) && (0.0..=h).contains(&y) {
            return (x, y);
        }
    }
    (g.mean.0.clamp(0.0, w), g.mean.1.clamp(0.0, h))
}
