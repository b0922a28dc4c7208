//! Two-word, two-topic instance with reference values from
//! `oracles/toy_vmp.py`.

#![allow(clippy::excessive_precision)]

use nalgebra::{Matrix2, Vector2};
use topicloc::corpus::{Corpus, Document, Labels, Observation};
use topicloc::inference::{
    compute_elbo, update_nw, update_responsibilities, update_theta, GlobalState, ImageState, NormalWishart,
};
use topicloc::priors::{HyperParams, Settings};

pub struct Toy {
    pub corpus: Corpus,
    pub hyper: HyperParams,
    pub global: GlobalState,
    pub state: ImageState,
}

pub fn toy() -> Toy {
    let doc = Document {
        id: "toy".into(),
        width: 100,
        height: 80,
        labels: Labels::labelled([0]),
        observations: vec![Observation::new(0, 30.0, 40.0), Observation::new(1, 70.0, 20.0)],
    };
    let corpus = Corpus::new(vec![doc], 2, 1).unwrap();
    let prior = NormalWishart::new(
        Vector2::new(50.0, 40.0),
        Matrix2::new(0.004, 0.001, 0.001, 0.006),
        1.0,
        5.0,
    )
    .unwrap();
    let hyper = HyperParams {
        settings: Settings {
            num_bg: 1,
            ..Default::default()
        },
        num_classes: 1,
        vocab_size: 2,
        pi0: vec![vec![0.7, 0.2], vec![0.3, 0.9]],
        nw_prior: prior,
    };
    let global = GlobalState {
        pi: vec![vec![2.5, 1.2], vec![0.8, 3.1]],
    };
    let nw = NormalWishart::new(
        Vector2::new(45.0, 35.0),
        Matrix2::new(0.002, -0.0005, -0.0005, 0.003),
        3.0,
        7.0,
    )
    .unwrap();
    let state = ImageState {
        theta: vec![1.9, 2.1],
        resp: vec![0.6, 0.4, 0.3, 0.7],
        nw: vec![nw],
        alpha: vec![1.0, 1.0],
    };
    Toy {
        corpus,
        hyper,
        global,
        state,
    }
}

pub const RESP: [f64; 4] = [
    0.938_956_072_616_720_367_74,
    0.061_043_927_383_279_632_259,
    0.062_434_063_926_050_499_349,
    0.937_565_936_073_949_500_65,
];

pub fn sweep(t: &mut Toy) {
    let doc = &t.corpus.documents[0];
    update_responsibilities(doc, &t.hyper, &t.global.expectations(), &mut t.state).unwrap();
    update_theta(&mut t.state);
    let pts: Vec<[f64; 2]> = doc.observations.iter().map(|o| [o.x, o.y]).collect();
    t.state.nw[0] = update_nw(&t.hyper.nw_prior, &pts, &t.state.column(0)).unwrap();
}

pub const THETA: [f64; 2] = [2.001_390_136_542_770_867_1, 1.998_609_863_457_229_132_9];

/// beta, dof, mean, scale (00, 01, 11)
pub const NW: [f64; 7] = [
    2.001_390_136_542_770_867_1,
    6.001_390_136_542_770_867_1,
    41.240_868_107_756_480_041,
    39.376_093_018_686_501_884,
    0.002_100_576_037_542_919_043_1,
    0.000_841_780_680_451_903_728_13,
    0.005_385_095_239_880_989_794_2,
];

pub const ELBO: f64 = -20.980_204_318_364_430_699;

pub const FIVE_POINTS: [[f64; 2]; 5] = [[12.0, 30.0], [25.0, 41.0], [33.0, 28.0], [40.0, 52.0], [18.0, 47.0]];
pub const FIVE_WEIGHTS: [f64; 5] = [0.9, 0.35, 0.6, 0.05, 0.75];
pub const FIVE_NW: [f64; 7] = [
    3.65,
    7.65,
    28.726_027_397_260_273_973,
    37.260_273_972_602_739_726,
    0.000_932_893_025_839_680_343_27,
    -0.000_064_608_736_176_484_728_208,
    0.002_727_669_060_095_328_934_3,
];

pub fn nw_values(nw: &NormalWishart) -> [f64; 7] {
    [
        nw.beta,
        nw.dof,
        nw.mean[0],
        nw.mean[1],
        nw.scale[(0, 0)],
        nw.scale[(0, 1)],
        nw.scale[(1, 1)],
    ]
}

pub fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Largest relative deviation from the reference over every quantity.
pub fn worst_relative_error() -> f64 {
    let mut t = toy();
    let doc = &t.corpus.documents[0];
    update_responsibilities(doc, &t.hyper, &t.global.expectations(), &mut t.state).unwrap();
    let mut worst = t
        .state
        .resp
        .iter()
        .zip(RESP)
        .map(|(g, w)| rel(*g, w))
        .fold(0.0, f64::max);
    let mut t = toy();
    sweep(&mut t);
    worst = t
        .state
        .theta
        .iter()
        .zip(THETA)
        .map(|(g, w)| rel(*g, w))
        .fold(worst, f64::max);
    worst = nw_values(&t.state.nw[0])
        .iter()
        .zip(NW)
        .map(|(g, w)| rel(*g, w))
        .fold(worst, f64::max);
    let elbo = compute_elbo(&t.corpus, &t.global, std::slice::from_ref(&t.state), &t.hyper).unwrap();
    worst = worst.max(rel(elbo, ELBO));
    let nw = update_nw(&t.hyper.nw_prior, &FIVE_POINTS, &FIVE_WEIGHTS).unwrap();
    nw_values(&nw)
        .iter()
        .zip(FIVE_NW)
        .map(|(g, w)| rel(*g, w))
        .fold(worst, f64::max)
}
