use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::textprep::DocTermMatrix;

/// Rows wider than this are randomly projected before anchor search.
pub const PROJECTION_THRESHOLD: usize = 2000;
pub const PROJECTION_DIM: usize = 1000;

/// Terms eligible as anchors: at least `min_docs` documents and a non-zero
/// co-occurrence row.
pub fn anchor_candidates(dtm: &DocTermMatrix, q: &CooccurrenceMatrix, min_docs: usize) -> Vec<usize> {
    dtm.doc_frequencies()
        .iter()
        .enumerate()
        .filter(|&(i, &df)| df >= min_docs.max(1) && q.word_prob[i] > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Greedy furthest-point anchor selection on row-normalised `Q`.
///
/// The first anchor is the candidate furthest from the candidate centroid.
/// The origin then moves to that anchor, and each further anchor is the
/// candidate with the largest residual after projecting out the directions
/// already chosen, i.e. the point furthest from their affine span.
pub fn find_anchors(
    q: &CooccurrenceMatrix,
    k: usize,
    seed: u64,
    candidates: &[usize],
) -> Result<Vec<usize>> {
    if k < 2 || k > q.n_terms() {
        return Err(Error::Config(format!(
            "topic count must lie in 2..={}, got {k}",
            q.n_terms()
        )));
    }
    if k > candidates.len() {
        return Err(Error::TooFewCandidates {
            requested: k,
            available: candidates.len(),
        });
    }
    let qbar = q.row_normalized();
    let mut rows = qbar.select(Axis(0), candidates);
    if rows.ncols() > PROJECTION_THRESHOLD {
        rows = rows.dot(&projection(rows.ncols(), PROJECTION_DIM, seed));
    }
    let picks = furthest_points(rows, k);
    Ok(picks.into_iter().map(|p| candidates[p]).collect())
}

fn projection(from: usize, to: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (to as f64).sqrt();
    Array2::from_shape_simple_fn((from, to), || {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * scale
    })
}

fn argmax_excluding(norms: &[f64], chosen: &[usize]) -> usize {
    let mut best = usize::MAX;
    for (i, &n) in norms.iter().enumerate() {
        if !chosen.contains(&i) && (best == usize::MAX || n > norms[best]) {
            best = i;
        }
    }
    best
}

fn sq_norms(rows: &Array2<f64>) -> Vec<f64> {
    rows.rows().into_iter().map(|r| r.dot(&r)).collect()
}

fn furthest_points(mut rows: Array2<f64>, k: usize) -> Vec<usize> {
    let centroid = rows.mean_axis(Axis(0)).expect("at least one candidate");
    let centred = &rows - &centroid;
    let first = argmax_excluding(&sq_norms(&centred), &[]);
    let origin = rows.row(first).to_owned();
    rows -= &origin;

    let mut chosen = vec![first];
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(k);
    while chosen.len() < k {
        let next = argmax_excluding(&sq_norms(&rows), &chosen);
        chosen.push(next);
        let mut u = rows.row(next).to_owned();
        // Two passes of modified Gram-Schmidt keep the basis orthogonal in
        // floating point.
        for _ in 0..2 {
            for b in &basis {
                let c = u.dot(b);
                u.scaled_add(-c, b);
            }
        }
        let norm = u.dot(&u).sqrt();
        if norm <= f64::EPSILON {
            log::warn!("anchor {} adds no new direction; remaining picks are arbitrary", chosen.len());
            continue;
        }
        u /= norm;
        let coef = rows.dot(&u);
        for (mut row, c) in rows.rows_mut().into_iter().zip(coef.iter()) {
            row.scaled_add(-c, &u);
        }
        basis.push(u);
    }
    chosen
}
