mod common;

use topicloc::corpus::{generate_synthetic, SynthConfig};

#[test]
fn label_density_is_binomial() {
    let cfg = SynthConfig {
        num_documents: 4000,
        words_per_document: 1,
        vocab_size: 5,
        label_density: 0.3,
        seed: 12,
        ..Default::default()
    };
    let syn = generate_synthetic(&cfg).unwrap();
    let n = cfg.num_documents as f64;
    let mut per_class = [0usize; 3];
    let mut by_count = [0usize; 4];
    for d in &syn.corpus.documents {
        let present: Vec<usize> = d.labels.classes().collect();
        by_count[present.len()] += 1;
        for c in present {
            per_class[c] += 1;
        }
    }
    let p = cfg.label_density;
    for count in per_class {
        let sd = (n * p * (1.0 - p)).sqrt();
        assert!((count as f64 - n * p).abs() < 4.0 * sd, "{count}");
    }
    // number of present classes ~ Binomial(3, p)
    let pmf = [
        (1.0 - p).powi(3),
        3.0 * p * (1.0 - p).powi(2),
        3.0 * p * p * (1.0 - p),
        p.powi(3),
    ];
    for (got, q) in by_count.iter().zip(pmf) {
        let sd = (n * q * (1.0 - q)).sqrt();
        assert!((*got as f64 - n * q).abs() < 4.0 * sd, "{by_count:?}");
    }
}

#[test]
fn half_density_presence_rate() {
    let cfg = SynthConfig {
        num_classes: 4,
        num_documents: 1000,
        words_per_document: 1,
        label_density: 0.5,
        seed: 1,
        ..Default::default()
    };
    let syn = generate_synthetic(&cfg).unwrap();
    let se = (0.25f64 / 1000.0).sqrt();
    for c in 0..4 {
        let rate = syn.corpus.documents.iter().filter(|d| d.labels.contains(c)).count() as f64 / 1000.0;
        assert!((rate - 0.5).abs() < 3.0 * se, "class {c}: {rate}");
    }
}

#[test]
fn observations_stay_inside_and_boxes_match_objects() {
    let syn = generate_synthetic(&SynthConfig {
        num_documents: 50,
        seed: 2,
        ..Default::default()
    })
    .unwrap();
    for (j, doc) in syn.corpus.documents.iter().enumerate() {
        let (w, h) = (doc.width as f64, doc.height as f64);
        assert!(doc
            .observations
            .iter()
            .all(|o| (0.0..=w).contains(&o.x) && (0.0..=h).contains(&o.y)));
        let gt = &syn.ground_truth.boxes[&doc.id];
        assert_eq!(gt.len(), syn.gaussians[j].len());
        for (b, g) in gt.iter().zip(&syn.gaussians[j]) {
            assert_eq!(b.class, g.class);
            let (x, y) = g.mean;
            assert!(b.bbox.x0 <= x && x <= b.bbox.x1 && b.bbox.y0 <= y && y <= b.bbox.y1);
        }
        assert!(syn.assignments[j].iter().all(|&z| syn.thetas[j][z] > 0.0));
    }
}

#[test]
fn training_recovers_foreground_appearance() {
    let syn = generate_synthetic(&common::recovery_config(0)).unwrap();
    let fit = common::train(&syn, &common::settings(), 0);
    for (k, cos) in common::foreground_cosines(&fit, &syn).into_iter().enumerate() {
        assert!(cos > 0.9, "class {k}: cosine {cos:.3}");
    }
}

#[test]
fn vanishing_covariance_collapses_objects_to_their_means() {
    let worst = |scale: f64| {
        let syn = generate_synthetic(&SynthConfig {
            num_documents: 30,
            fg_cov_scale: scale,
            seed: 8,
            ..Default::default()
        })
        .unwrap();
        let mut worst = 0.0f64;
        for (j, doc) in syn.corpus.documents.iter().enumerate() {
            for (o, &z) in doc.observations.iter().zip(&syn.assignments[j]) {
                if let Some(g) = syn.gaussians[j].iter().find(|g| g.class == z) {
                    worst = worst.max(((o.x - g.mean.0).powi(2) + (o.y - g.mean.1).powi(2)).sqrt());
                }
            }
        }
        worst
    };
    let d: Vec<f64> = [0.05, 0.005, 0.0005, 0.0].into_iter().map(worst).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert_eq!(d[3], 0.0);
}

#[test]
fn topic_frequencies_approach_theta() {
    let mean_tv = |words: usize| {
        let mut total = 0.0;
        let mut n = 0;
        for seed in 0..5 {
            let syn = generate_synthetic(&SynthConfig {
                num_documents: 40,
                words_per_document: words,
                seed,
                ..Default::default()
            })
            .unwrap();
            for (theta, z) in syn.thetas.iter().zip(&syn.assignments) {
                let mut freq = vec![0.0; theta.len()];
                z.iter().for_each(|&t| freq[t] += 1.0 / words as f64);
                total += 0.5 * freq.iter().zip(theta).map(|(a, b)| (a - b).abs()).sum::<f64>();
                n += 1;
            }
        }
        total / n as f64
    };
    let tv: Vec<f64> = [10, 100, 1000].into_iter().map(mean_tv).collect();
    assert!(tv.windows(2).all(|w| w[1] < 0.6 * w[0]), "{tv:?}");
}
