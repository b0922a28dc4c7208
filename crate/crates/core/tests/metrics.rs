mod common;

use std::collections::BTreeMap;

use common::{random_lattice_box, raster_iou};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topicloc::corpus::{BoxSet, ClassBox, GroundTruth};
use topicloc::eval::{corloc, corloc_with, MeanKind};
use topicloc::{iou, BoundingBox, Error};

#[test]
fn iou_matches_pixel_count_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = random_lattice_box(&mut rng);
        let b = random_lattice_box(&mut rng);
        worst = worst.max((iou(&a, &b) - raster_iou(&a, &b)).abs());
    }
    assert!(worst < 1e-3, "worst deviation {worst}");
}

#[test]
fn hand_computed_iou() {
    let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
    assert!((iou(&a, &BoundingBox::new(5.0, 0.0, 15.0, 10.0)) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(iou(&a, &a), 1.0);
    assert_eq!(iou(&a, &BoundingBox::new(20.0, 20.0, 30.0, 30.0)), 0.0);
    // touching edges share no area
    assert_eq!(iou(&a, &BoundingBox::new(10.0, 0.0, 20.0, 10.0)), 0.0);
}

fn cb(class: usize, b: BoundingBox) -> ClassBox {
    ClassBox { class, bbox: b }
}

#[test]
fn iou_of_exactly_half_is_not_a_hit() {
    let truth = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
    // 10×5 box inside the truth: IoU = 50/100
    let half = BoundingBox::new(0.0, 0.0, 10.0, 5.0);
    assert_eq!(iou(&truth, &half), 0.5);
    let gt = GroundTruth {
        boxes: BTreeMap::from([("a".to_string(), vec![cb(0, truth)])]),
    };
    let pred: BoxSet = BTreeMap::from([("a".to_string(), vec![cb(0, half)])]);
    assert_eq!(corloc(&pred, &gt).unwrap().mean_corloc, 0.0);
}

#[test]
fn unknown_prediction_ids_are_listed() {
    let gt = GroundTruth::default();
    let pred: BoxSet = BTreeMap::from([("ghost".to_string(), vec![])]);
    match corloc(&pred, &gt) {
        Err(Error::UnknownIds(ids)) => assert_eq!(ids, ["ghost"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn weighted_and_unweighted_means_differ() {
    let t = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
    let miss = BoundingBox::new(50.0, 50.0, 60.0, 60.0);
    // class 0: 1 of 1 correct; class 1: 0 of 3
    let gt = GroundTruth {
        boxes: BTreeMap::from([
            ("a".to_string(), vec![cb(0, t), cb(1, t)]),
            ("b".to_string(), vec![cb(1, t)]),
            ("c".to_string(), vec![cb(1, t)]),
        ]),
    };
    let pred: BoxSet = BTreeMap::from([
        ("a".to_string(), vec![cb(0, t), cb(1, miss)]),
        ("b".to_string(), vec![cb(1, miss)]),
    ]);
    assert_eq!(corloc(&pred, &gt).unwrap().mean_corloc, 50.0);
    assert_eq!(
        corloc_with(&pred, &gt, MeanKind::ImageWeighted).unwrap().mean_corloc,
        25.0
    );
}

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (0.0..90.0f64, 0.0..90.0f64, 0.5..40.0f64, 0.5..40.0f64)
        .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h))
}

fn arb_scene() -> impl Strategy<Value = (GroundTruth, BoxSet)> {
    let doc = (
        prop::collection::vec((0..3usize, arb_box()), 1..3),
        prop::collection::vec((0..3usize, arb_box(), 0.0..1.0f64), 0..6),
    );
    prop::collection::vec(doc, 1..8).prop_map(|docs| {
        let mut gt = GroundTruth::default();
        let mut pred = BoxSet::new();
        for (j, (truth, guesses)) in docs.into_iter().enumerate() {
            let id = format!("d{j}");
            gt.boxes
                .insert(id.clone(), truth.into_iter().map(|(c, b)| cb(c, b)).collect());
            pred.insert(
                id,
                guesses.into_iter().map(|(c, b, s)| cb(c, b.with_score(s))).collect(),
            );
        }
        (gt, pred)
    })
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
        let ab = iou(&a, &b);
        prop_assert_eq!(ab, iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iou_is_invariant_to_translation_and_scale(a in arb_box(), b in arb_box(), dx in -50.0..50.0f64, s in 0.1..10.0f64) {
        let t = |x: &BoundingBox| BoundingBox::new(s * (x.x0 + dx), s * x.y0, s * (x.x1 + dx), s * x.y1);
        prop_assert!((iou(&a, &b) - iou(&t(&a), &t(&b))).abs() < 1e-9);
    }

    #[test]
    fn corloc_ignores_score_transforms((gt, pred) in arb_scene()) {
        let base = corloc(&pred, &gt).unwrap();
        let squashed: BoxSet = pred
            .iter()
            .map(|(id, bs)| {
                let moved = bs.iter().map(|c| cb(c.class, c.bbox.with_score((3.0 * c.bbox.score).exp() + 7.0))).collect();
                (id.clone(), moved)
            })
            .collect();
        prop_assert_eq!(&base, &corloc(&squashed, &gt).unwrap());
    }

    #[test]
    fn corloc_is_order_invariant((gt, pred) in arb_scene(), rot in 0..8usize) {
        // BoxSet is keyed by id, so reorder documents by renaming them
        let ids: Vec<String> = gt.boxes.keys().cloned().collect();
        let n = ids.len();
        let rename = |id: &String| {
            let i = ids.iter().position(|x| x == id).unwrap();
            format!("r{}", (i + rot) % n)
        };
        let gt2 = GroundTruth { boxes: gt.boxes.iter().map(|(k, v)| (rename(k), v.clone())).collect() };
        let pred2: BoxSet = pred.iter().map(|(k, v)| (rename(k), v.clone())).collect();
        prop_assert_eq!(corloc(&pred, &gt).unwrap(), corloc(&pred2, &gt2).unwrap());
    }
}
