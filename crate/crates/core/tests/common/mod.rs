#![allow(dead_code)]

pub mod toy;

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use topicloc::corpus::{generate_synthetic, BoxSet, GroundTruth, SynthConfig, Synthetic};
use topicloc::eval::corloc;
use topicloc::inference::{fit_independent, fit_observed, FitOptions, FitResult, NormalWishart};
use topicloc::localise::{localise_corpus, localise_independent, LocaliseParams, Method};
use topicloc::priors::{HyperParams, Settings};
use topicloc::BoundingBox;

// ---- Student-t oracle ----

/// Λ ~ Wishart(W, ν) by the Bartlett decomposition.
fn sample_wishart(rng: &mut impl Rng, chol_w: &Matrix2<f64>, dof: f64) -> Matrix2<f64> {
    let c1: f64 = ChiSquared::new(dof).unwrap().sample(rng);
    let c2: f64 = ChiSquared::new(dof - 1.0).unwrap().sample(rng);
    let n: f64 = StandardNormal.sample(rng);
    let a = Matrix2::new(c1.sqrt(), 0.0, n, c2.sqrt());
    let la = chol_w * a;
    la * la.transpose()
}

fn gaussian_density(x: Vector2<f64>, mu: Vector2<f64>, prec: &Matrix2<f64>) -> f64 {
    let d = x - mu;
    let q = (d.transpose() * prec * d)[(0, 0)];
    prec.determinant().sqrt() / (2.0 * PI) * (-0.5 * q).exp()
}

/// Mean of N(x | μ, Λ⁻¹) over (μ, Λ) ~ NW.
pub fn monte_carlo_predictive(nw: &NormalWishart, x: [f64; 2], samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chol_w = nw.scale.cholesky().unwrap().l();
    let x = Vector2::new(x[0], x[1]);
    let mut acc = 0.0;
    for _ in 0..samples {
        let lambda = sample_wishart(&mut rng, &chol_w, nw.dof);
        let cov_chol = (lambda * nw.beta).try_inverse().unwrap().cholesky().unwrap().l();
        let z = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let mu = nw.mean + cov_chol * z;
        acc += gaussian_density(x, mu, &lambda);
    }
    acc / samples as f64
}

pub fn student_t_settings() -> Vec<(NormalWishart, [f64; 2])> {
    let nw =
        |m: [f64; 2], w: Matrix2<f64>, beta, dof| NormalWishart::new(Vector2::new(m[0], m[1]), w, beta, dof).unwrap();
    vec![
        (
            nw([50.0, 40.0], Matrix2::new(0.004, 0.0, 0.0, 0.006), 1.0, 5.0),
            [60.0, 35.0],
        ),
        (
            nw([120.0, 80.0], Matrix2::new(0.0008, 0.0003, 0.0003, 0.0012), 12.5, 14.0),
            [110.0, 95.0],
        ),
        (
            nw([10.0, 10.0], Matrix2::new(0.05, -0.02, -0.02, 0.03), 3.0, 2.5),
            [12.0, 9.0],
        ),
    ]
}

// ---- IoU oracle ----

/// Boxes with corners on a quarter-pixel lattice inside a 64×64 image.
pub fn random_lattice_box(rng: &mut impl Rng) -> BoundingBox {
    let mut pick = || {
        let a = rng.random_range(0..=256u32);
        let b = rng.random_range(0..=256u32);
        (a.min(b) as f64 / 4.0, a.max(b).max(a.min(b) + 1) as f64 / 4.0)
    };
    let (x0, x1) = pick();
    let (y0, y1) = pick();
    BoundingBox::new(x0, y0, x1, y1)
}

/// IoU by counting quarter-pixel cells covered by each box.
pub fn raster_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inside = |bx: &BoundingBox, x: f64, y: f64| x > bx.x0 && x < bx.x1 && y > bx.y0 && y < bx.y1;
    let (mut inter, mut union) = (0u64, 0u64);
    for i in 0..260 {
        for j in 0..260 {
            let (x, y) = ((i as f64 + 0.5) / 4.0, (j as f64 + 0.5) / 4.0);
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as u64;
            union += (ia || ib) as u64;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

// ---- synthetic scenarios ----

pub fn settings() -> Settings {
    Settings {
        num_bg: 2,
        ..Default::default()
    }
}

pub fn recovery_config(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        ..Default::default()
    }
}

pub fn ssl_config(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        unlabelled_fraction: 0.9,
        ..Default::default()
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Learned foreground appearance (posterior counts minus prior) against
/// the generating topics.
pub fn foreground_cosines(fit: &FitResult, syn: &Synthetic) -> Vec<f64> {
    let hyper = &fit.model.hyper;
    (0..hyper.num_classes)
        .map(|k| {
            let learned: Vec<f64> = fit.model.global.pi[k]
                .iter()
                .zip(&hyper.pi0[k])
                .map(|(q, p)| q - p)
                .collect();
            cosine(&learned, &syn.topics[k])
        })
        .collect()
}

pub fn train(syn: &Synthetic, settings: &Settings, seed: u64) -> FitResult {
    let hyper = HyperParams::from_corpus(&syn.corpus, settings.clone()).unwrap();
    fit_observed(&syn.corpus, &hyper, seed, FitOptions::default(), |_| {}).unwrap()
}

pub fn corloc_of(fit: &FitResult, syn: &Synthetic, method: Method) -> f64 {
    let boxes = localise_corpus(
        &fit.model.hyper,
        &syn.corpus,
        &fit.states,
        &LocaliseParams::with_method(method),
    )
    .unwrap();
    corloc(&boxes, &syn.ground_truth).unwrap().mean_corloc
}

/// Labelled-subset CorLoc of a run on every document versus a run on the
/// labelled documents alone.
pub fn ssl_pair(seed: u64) -> (f64, f64) {
    let syn = generate_synthetic(&ssl_config(seed)).unwrap();
    let settings = settings();
    let labelled = syn.corpus.filter(|d| !d.labels.is_unlabelled());
    let gt = GroundTruth {
        boxes: syn
            .ground_truth
            .boxes
            .iter()
            .filter(|(id, _)| labelled.documents.iter().any(|d| &d.id == *id))
            .map(|(id, b)| (id.clone(), b.clone()))
            .collect(),
    };
    let params = LocaliseParams::with_method(Method::Sampling);
    let score = |corpus: &topicloc::Corpus| {
        let hyper = HyperParams::from_corpus(corpus, settings.clone()).unwrap();
        let fit = fit_observed(corpus, &hyper, seed, FitOptions::default(), |_| {}).unwrap();
        let boxes: BoxSet = localise_corpus(&hyper, corpus, &fit.states, &params)
            .unwrap()
            .into_iter()
            .filter(|(id, _)| gt.boxes.contains_key(id))
            .collect();
        corloc(&boxes, &gt).unwrap().mean_corloc
    };
    (score(&syn.corpus), score(&labelled))
}

/// Joint versus independent-learning CorLoc on a multi-label corpus.
pub fn joint_vs_independent(seed: u64) -> (f64, f64) {
    let syn = generate_synthetic(&recovery_config(seed)).unwrap();
    let settings = settings();
    let params = LocaliseParams::with_method(Method::Gaussian);
    let joint = train(&syn, &settings, seed);
    let joint_boxes = localise_corpus(&joint.model.hyper, &syn.corpus, &joint.states, &params).unwrap();
    let il = fit_independent(&syn.corpus, &settings, seed, FitOptions::default()).unwrap();
    let members: Vec<_> = il
        .members
        .iter()
        .map(|m| (&m.model.hyper, m.states.as_slice()))
        .collect();
    let il_boxes = localise_independent(&members, &syn.corpus, &params).unwrap();
    (
        corloc(&joint_boxes, &syn.ground_truth).unwrap().mean_corloc,
        corloc(&il_boxes, &syn.ground_truth).unwrap().mean_corloc,
    )
}

/// Spatial versus no-spatial Our-Gaussian CorLoc.
pub fn spatial_vs_flat(seed: u64) -> (f64, f64) {
    let syn = generate_synthetic(&recovery_config(seed)).unwrap();
    let on = settings();
    let off = Settings {
        spatial_enabled: false,
        ..settings()
    };
    let a = corloc_of(&train(&syn, &on, seed), &syn, Method::Gaussian);
    let b = corloc_of(&train(&syn, &off, seed), &syn, Method::Gaussian);
    (a, b)
}
