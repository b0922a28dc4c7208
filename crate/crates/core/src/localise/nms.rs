use super::heatmap::HeatMap;
use crate::eval::iou;
use crate::geom::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsParams {
    pub max_boxes: usize,
    pub iou_thresh: f64,
    /// Window score is `mass / area^area_exponent`.
    pub area_exponent: f64,
}

impl Default for NmsParams {
    fn default() -> Self {
        Self {
            max_boxes: 3,
            iou_thresh: 0.5,
            area_exponent: 0.25,
        }
    }
}

/// Scores windows of every scale centred on every local maximum of the
/// heat map, then keeps them greedily in score order, dropping any window
/// whose IoU with an already kept one exceeds the threshold.
pub fn nms_boxes(hm: &HeatMap, scales: &[(f64, f64)], params: &NmsParams) -> Vec<BoundingBox> {
    let mut candidates = Vec::new();
    for (c, r) in hm.local_maxima() {
        let (cx, cy) = hm.cell_center(c, r);
        for &(w, h) in scales {
            let b = BoundingBox::centered(cx, cy, w, h).clamp_to(hm.width, hm.height);
            if !b.is_valid() {
                continue;
            }
            let mass = hm.mass_in(b.x0, b.y0, b.x1, b.y1);
            let score = mass / b.area().powf(params.area_exponent);
            candidates.push(b.with_score(score));
        }
    }
    suppress(candidates, params.iou_thresh, params.max_boxes)
}

/// Greedy suppression over scored boxes; stable for equal scores.
pub fn suppress(mut candidates: Vec<BoundingBox>, iou_thresh: f64, max_boxes: usize) -> Vec<BoundingBox> {
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut kept: Vec<BoundingBox> = Vec::new();
    for cand in candidates {
        if kept.len() >= max_boxes {
            break;
        }
        if kept.iter().all(|k| iou(k, &cand) <= iou_thresh) {
            kept.push(cand);
        }
    }
    kept
}
