//! Fixed model parameters: label encoding, appearance priors and the
//! spatial Normal-Wishart prior.

use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Labels};
use crate::error::{Error, Result};
use crate::inference::NormalWishart;

/// Pseudo-count floor added to every appearance prior entry.
pub const PRIOR_FLOOR: f64 = 1e-2;

/// Tunable knobs. Everything data-dependent lives in [`HyperParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub num_bg: usize,
    pub alpha_fg_present: f64,
    pub alpha_bg: f64,
    /// Foreground concentration for unlabelled documents.
    pub alpha_ssl: f64,
    pub iterations: usize,
    /// Stop once the relative ELBO change drops below `tolerance`.
    pub early_stop: bool,
    pub tolerance: f64,
    /// Sweep cap for per-document held-out inference.
    pub heldout_sweeps: usize,
    pub spatial_enabled: bool,
    pub appearance_prior_enabled: bool,
    /// Total pseudo-count mass of the differential-histogram prior;
    /// `None` means `vocab_size / 100`.
    pub prior_scale: Option<f64>,
    /// L1-normalise document histograms before averaging.
    pub normalise_histograms: bool,
    /// Amplitude of the random initial perturbation.
    pub init_jitter: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            num_bg: 20,
            alpha_fg_present: 1.0,
            alpha_bg: 1.0,
            alpha_ssl: 0.1,
            iterations: 100,
            early_stop: true,
            tolerance: 1e-6,
            heldout_sweeps: 100,
            spatial_enabled: true,
            appearance_prior_enabled: true,
            prior_scale: None,
            normalise_histograms: true,
            init_jitter: 0.5,
        }
    }
}

/// All fixed parameters of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub settings: Settings,
    pub num_classes: usize,
    pub vocab_size: usize,
    /// Appearance pseudo-counts, one row of `vocab_size` per topic,
    /// foreground classes first.
    pub pi0: Vec<Vec<f64>>,
    pub nw_prior: NormalWishart,
}

impl HyperParams {
    /// Builds hyper-parameters from corpus statistics.
    pub fn from_corpus(corpus: &Corpus, settings: Settings) -> Result<Self> {
        let pi0 = compute_appearance_prior(corpus, &settings)?;
        Self::with_appearance_prior(corpus, settings, pi0)
    }

    /// Like [`HyperParams::from_corpus`] but with externally supplied
    /// foreground rows (one per class).
    pub fn with_injected_prior(corpus: &Corpus, settings: Settings, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != corpus.num_classes || rows.iter().any(|r| r.len() != corpus.vocab_size) {
            return Err(Error::Config(format!(
                "injected prior must be {} rows of {} values",
                corpus.num_classes, corpus.vocab_size
            )));
        }
        let mut pi0 = rows;
        for row in pi0.iter_mut() {
            for x in row.iter_mut() {
                if !(*x >= 0.0 && x.is_finite()) {
                    return Err(Error::Config("injected prior entries must be non-negative".into()));
                }
                *x += PRIOR_FLOOR;
            }
        }
        pi0.extend((0..settings.num_bg).map(|_| vec![PRIOR_FLOOR; corpus.vocab_size]));
        Self::with_appearance_prior(corpus, settings, pi0)
    }

    fn with_appearance_prior(corpus: &Corpus, settings: Settings, pi0: Vec<Vec<f64>>) -> Result<Self> {
        validate_settings(&settings)?;
        Ok(Self {
            nw_prior: default_nw_prior(corpus)?,
            num_classes: corpus.num_classes,
            vocab_size: corpus.vocab_size,
            pi0,
            settings,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_classes + self.settings.num_bg
    }

    pub fn is_foreground(&self, topic: usize) -> bool {
        topic < self.num_classes
    }
}

fn validate_settings(s: &Settings) -> Result<()> {
    let pos = |x: f64| x > 0.0 && x.is_finite();
    if s.num_bg == 0 {
        return Err(Error::Config("at least one background topic is required".into()));
    }
    if !pos(s.alpha_fg_present) || !pos(s.alpha_bg) || !pos(s.alpha_ssl) {
        return Err(Error::Config("alpha values must be positive".into()));
    }
    if let Some(p) = s.prior_scale {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::Config("prior scale must be non-negative".into()));
        }
    }
    if !(s.init_jitter >= 0.0) || !(s.tolerance >= 0.0) {
        return Err(Error::Config("jitter and tolerance must be non-negative".into()));
    }
    Ok(())
}

/// Dirichlet concentration over all K topics for a document's labels.
///
/// Labelled documents get `alpha_fg_present` on present classes and 0 on
/// absent ones; unlabelled documents get `alpha_ssl` on every class.
/// Background entries are always `alpha_bg`.
pub fn encode_alpha(labels: &Labels, hyper: &HyperParams) -> Result<Vec<f64>> {
    let c = hyper.num_classes;
    let s = &hyper.settings;
    let mut alpha = vec![0.0; c + s.num_bg];
    match labels {
        Labels::Unlabelled => alpha[..c].fill(s.alpha_ssl),
        Labels::Labelled(set) => {
            for &k in set {
                if k >= c {
                    return Err(Error::LabelOutOfRange { label: k, classes: c });
                }
                alpha[k] = s.alpha_fg_present;
            }
        }
    }
    alpha[c..].fill(s.alpha_bg);
    Ok(alpha)
}

/// Appearance pseudo-counts π⁰, one row per topic.
///
/// Foreground row k is `s · max(0, mean_hist(docs labelled k) − mean_hist(all docs))`
/// plus [`PRIOR_FLOOR`]; background rows are the floor alone.
pub fn compute_appearance_prior(corpus: &Corpus, settings: &Settings) -> Result<Vec<Vec<f64>>> {
    let nv = corpus.vocab_size;
    let c = corpus.num_classes;
    let mut rows = vec![vec![PRIOR_FLOOR; nv]; c + settings.num_bg];
    if !settings.appearance_prior_enabled || c == 0 {
        return Ok(rows);
    }
    let scale = settings.prior_scale.unwrap_or(nv as f64 / 100.0);

    let hist = |d: &crate::corpus::Document| -> Vec<f64> {
        if settings.normalise_histograms {
            d.histogram(nv)
        } else {
            let mut h = vec![0.0; nv];
            for o in &d.observations {
                h[o.word] += 1.0;
            }
            h
        }
    };

    let mut overall = vec![0.0; nv];
    let mut class_sum = vec![vec![0.0; nv]; c];
    let mut class_n = vec![0usize; c];
    for d in &corpus.documents {
        let h = hist(d);
        add(&mut overall, &h);
        for k in d.labels.classes() {
            add(&mut class_sum[k], &h);
            class_n[k] += 1;
        }
    }
    if let Some(k) = class_n.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(k));
    }
    let n_all = corpus.len() as f64;
    for k in 0..c {
        let nk = class_n[k] as f64;
        for v in 0..nv {
            let diff = class_sum[k][v] / nk - overall[v] / n_all;
            rows[k][v] += scale * diff.max(0.0);
        }
    }
    Ok(rows)
}

fn add(acc: &mut [f64], h: &[f64]) {
    acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
}

/// Spatial prior: centred on the mean image, with the prior-expected
/// two-sigma box covering half of the mean image area. β⁰ = 1, ν⁰ = 5.
pub fn default_nw_prior(corpus: &Corpus) -> Result<NormalWishart> {
    if corpus.is_empty() {
        return Err(Error::Config("cannot build a spatial prior for an empty corpus".into()));
    }
    let n = corpus.len() as f64;
    let w = corpus.documents.iter().map(|d| d.width as f64).sum::<f64>() / n;
    let h = corpus.documents.iter().map(|d| d.height as f64).sum::<f64>() / n;
    let beta = 1.0;
    let dof = 5.0;
    // E[Σ] = W⁻¹/(ν−3) = diag(w², h²)/32 gives a (w/√2)×(h/√2) two-sigma box.
    let cov_scale = dof - 3.0;
    let scale = Matrix2::new(32.0 / (w * w * cov_scale), 0.0, 0.0, 32.0 / (h * h * cov_scale));
    NormalWishart::new(Vector2::new(0.5 * w, 0.5 * h), scale, beta, dof)
}

/// Reads an injected prior file: one whitespace-separated row of
/// `vocab_size` non-negative reals per class.
pub fn load_prior_rows(path: &Path, num_classes: usize, vocab_size: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        if row.len() != vocab_size || row.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: format!("expected {vocab_size} non-negative values"),
            });
        }
        rows.push(row);
    }
    if rows.len() != num_classes {
        return Err(Error::Config(format!(
            "prior file has {} rows, expected {num_classes}",
            rows.len()
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Observation};

    fn doc(id: &str, labels: Labels, words: &[usize]) -> Document {
        Document {
            id: id.into(),
            width: 100,
            height: 100,
            labels,
            observations: words.iter().map(|&v| Observation::new(v, 1.0, 1.0)).collect(),
        }
    }

    fn hyper(c: usize, bg: usize) -> HyperParams {
        let corpus = Corpus::new(vec![doc("a", Labels::labelled(0..c), &[0])], 1, c).unwrap();
        HyperParams::from_corpus(
            &corpus,
            Settings {
                num_bg: bg,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn alpha_labelled() {
        let h = hyper(3, 2);
        assert_eq!(
            encode_alpha(&Labels::labelled([0, 2]), &h).unwrap(),
            [1.0, 0.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(encode_alpha(&Labels::labelled([0, 1, 2]), &h).unwrap(), [1.0; 5]);
    }

    #[test]
    fn alpha_unlabelled() {
        let h = hyper(3, 2);
        assert_eq!(
            encode_alpha(&Labels::Unlabelled, &h).unwrap(),
            [0.1, 0.1, 0.1, 1.0, 1.0]
        );
    }

    #[test]
    fn alpha_rejects_unknown_class() {
        let h = hyper(3, 2);
        assert!(matches!(
            encode_alpha(&Labels::labelled([3]), &h),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn differential_histogram_prior() {
        // class-0 documents use only word 7, the rest only word 3.
        let mut docs = Vec::new();
        for i in 0..4 {
            docs.push(doc(&format!("p{i}"), Labels::labelled([0]), &[7, 7, 7]));
            docs.push(doc(&format!("n{i}"), Labels::labelled([]), &[3, 3, 3]));
        }
        let corpus = Corpus::new(docs, 10, 1).unwrap();
        let s = Settings {
            num_bg: 2,
            prior_scale: Some(4.0),
            ..Default::default()
        };
        let rows = compute_appearance_prior(&corpus, &s).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0][7] - PRIOR_FLOOR - 0.5 * 4.0).abs() < 1e-12);
        assert_eq!(rows[0][3], PRIOR_FLOOR);
        assert!(rows[1].iter().chain(&rows[2]).all(|&x| x == PRIOR_FLOOR));
    }

    #[test]
    fn identical_histograms_give_flat_prior() {
        let docs = vec![
            doc("a", Labels::labelled([0]), &[1, 2]),
            doc("b", Labels::labelled([1]), &[2, 1]),
        ];
        let corpus = Corpus::new(docs, 3, 2).unwrap();
        let rows = compute_appearance_prior(&corpus, &Settings::default()).unwrap();
        assert!(rows.iter().flatten().all(|&x| (x - PRIOR_FLOOR).abs() < 1e-15));
    }

    #[test]
    fn zero_scale_gives_floor_rows() {
        let docs = vec![
            doc("a", Labels::labelled([0]), &[1]),
            doc("b", Labels::labelled([]), &[2]),
        ];
        let corpus = Corpus::new(docs, 3, 1).unwrap();
        let s = Settings {
            prior_scale: Some(0.0),
            ..Default::default()
        };
        let rows = compute_appearance_prior(&corpus, &s).unwrap();
        assert!(rows[0].iter().all(|&x| x == PRIOR_FLOOR));
    }

    #[test]
    fn class_without_documents_is_an_error() {
        let corpus = Corpus::new(vec![doc("a", Labels::labelled([0]), &[1])], 3, 2).unwrap();
        assert!(matches!(
            compute_appearance_prior(&corpus, &Settings::default()),
            Err(Error::EmptyClass(1))
        ));
        let s = Settings {
            appearance_prior_enabled: false,
            ..Default::default()
        };
        assert!(compute_appearance_prior(&corpus, &s).is_ok());
    }

    #[test]
    fn nw_prior_centre_and_coverage() {
        let corpus = Corpus::new(vec![doc("a", Labels::labelled([]), &[0])], 1, 0).unwrap();
        let nw = default_nw_prior(&corpus).unwrap();
        assert_eq!((nw.mean[0], nw.mean[1]), (50.0, 50.0));
        assert_eq!((nw.beta, nw.dof), (1.0, 5.0));
        // closed form E[Σ] = W⁻¹ / (ν − D − 1)
        let inv = nw.scale.try_inverse().unwrap();
        let cov = inv / (nw.dof - 3.0);
        let area = 4.0 * cov[(0, 0)].sqrt() * 4.0 * cov[(1, 1)].sqrt();
        assert!((area / (100.0 * 100.0) - 0.5).abs() < 0.01 * 0.5);
    }
}
