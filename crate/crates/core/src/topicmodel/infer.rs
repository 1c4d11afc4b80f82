use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::textprep::DocTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferOptions {
    pub max_iter: usize,
    /// Convergence threshold on the per-token log-likelihood change.
    pub tol: f64,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            max_iter: 1000,
            tol: 1e-7,
        }
    }
}

/// Per-token multinomial log-likelihood of a document under `theta`.
pub fn doc_log_likelihood(cols: &[u32], counts: &[u32], beta: &Array2<f64>, theta: &[f64]) -> f64 {
    let n: f64 = counts.iter().map(|&c| f64::from(c)).sum();
    if n == 0.0 {
        return 0.0;
    }
    let mut ll = 0.0;
    for (&i, &w) in cols.iter().zip(counts) {
        let p: f64 = theta
            .iter()
            .enumerate()
            .map(|(k, t)| t * beta[[k, i as usize]])
            .sum();
        ll += f64::from(w) * p.ln();
    }
    ll / n
}

/// Maximum-likelihood topic proportions for one document, by
/// exponentiated gradient on the simplex. Returns `(theta, converged)`.
pub fn infer_doc_topics(
    cols: &[u32],
    counts: &[u32],
    beta: &Array2<f64>,
    opts: &InferOptions,
) -> (Vec<f64>, bool) {
    let k = beta.nrows();
    let uniform = vec![1.0 / k as f64; k];
    let n: f64 = counts.iter().map(|&c| f64::from(c)).sum();
    if n == 0.0 || k == 1 {
        return (uniform, true);
    }
    let sub = Array2::from_shape_fn((k, cols.len()), |(t, j)| beta[[t, cols[j] as usize]]);
    let w = Array1::from_iter(counts.iter().map(|&c| f64::from(c) / n));
    let objective = |theta: &Array1<f64>| -> f64 {
        theta
            .dot(&sub)
            .iter()
            .zip(&w)
            .map(|(p, w)| w * p.ln())
            .sum()
    };

    let mut theta = Array1::from_vec(uniform);
    let mut f = objective(&theta);
    let mut eta = 1.0;
    for _ in 0..opts.max_iter {
        let mix = theta.dot(&sub);
        let grad = sub.dot(&(&w / &mix));
        let mut step = None;
        for _ in 0..60 {
            let mut next = Array1::from_shape_fn(k, |t| theta[t] * (eta * grad[t]).exp());
            next /= next.sum();
            let fn_ = objective(&next);
            if fn_ >= f {
                step = Some((next, fn_));
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
        }
        let Some((next, fn_)) = step else {
            return (theta.to_vec(), true);
        };
        let delta = fn_ - f;
        theta = next;
        f = fn_;
        if delta < opts.tol {
            return (theta.to_vec(), true);
        }
    }
    (theta.to_vec(), false)
}

/// Infer θ for every document; rows are placed by index so the result does
/// not depend on thread scheduling.
pub fn infer_theta(dtm: &DocTermMatrix, beta: &Array2<f64>, opts: &InferOptions) -> (Array2<f64>, usize) {
    let k = beta.nrows();
    let rows: Vec<(Vec<f64>, bool)> = (0..dtm.n_docs())
        .into_par_iter()
        .map(|d| {
            let (cols, counts) = dtm.row(d);
            infer_doc_topics(cols, counts, beta, opts)
        })
        .collect();
    let mut theta = Array2::zeros((dtm.n_docs(), k));
    let mut unconverged = 0;
    for (d, (row, ok)) in rows.into_iter().enumerate() {
        theta.row_mut(d).assign(&Array1::from_vec(row));
        unconverged += usize::from(!ok);
    }
    if unconverged > 0 {
        log::warn!("inference: {unconverged} documents hit the iteration cap");
    }
    (theta, unconverged)
}
