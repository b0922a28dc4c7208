use super::nw::is_spd;
use super::{GlobalState, ImageState};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::priors::HyperParams;

/// Tolerance on the sum of each responsibility row.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Relative tolerance on total appearance counts.
pub const COUNT_TOL: f64 = 1e-6;

/// Structural invariants of a training state: every responsibility row sums
/// to one with excluded topics exactly zero, the appearance posteriors hold
/// exactly one count per observation on top of the prior, and every location
/// posterior has an SPD scale matrix.
pub fn check_invariants(
    corpus: &Corpus,
    hyper: &HyperParams,
    global: &GlobalState,
    states: &[ImageState],
) -> Result<()> {
    let bad = |msg: String| Err(Error::Numerical(msg));
    for (doc, st) in corpus.documents.iter().zip(states) {
        for i in 0..st.num_words() {
            let row = st.row(i);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return bad(format!("`{}` word {i}: responsibilities sum to {sum}", doc.id));
            }
            if let Some(t) = (0..row.len()).find(|&t| !st.is_admissible(t) && row[t] != 0.0) {
                return bad(format!("`{}` word {i}: excluded topic {t} has mass {}", doc.id, row[t]));
            }
        }
        if let Some(k) = st.nw.iter().position(|nw| !is_spd(&nw.scale)) {
            return bad(format!("`{}` topic {k}: scale matrix is not SPD", doc.id));
        }
    }
    let added: f64 = global
        .pi
        .iter()
        .zip(&hyper.pi0)
        .flat_map(|(q, p)| q.iter().zip(p).map(|(a, b)| a - b))
        .sum();
    let words = corpus.total_words() as f64;
    if words > 0.0 && ((added - words) / words).abs() > COUNT_TOL {
        return bad(format!("appearance holds {added} counts for {words} words"));
    }
    Ok(())
}
