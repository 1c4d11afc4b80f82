use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use super::CooccurrenceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoverOptions {
    pub max_iter: usize,
    /// Stop once the duality gap falls below `tol` times the row's squared norm.
    pub tol: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            max_iter: 3000,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub beta: Array2<f64>,
    /// `coef[i]` are word i's mixing weights over the anchors.
    pub coef: Array2<f64>,
    pub unconverged: usize,
    pub max_residual: f64,
}

/// Express every normalised `Q` row as a convex combination of anchor rows,
/// then turn the weights into topic-word distributions by Bayes' rule.
pub fn recover_topic_word(
    q: &CooccurrenceMatrix,
    anchors: &[usize],
    opts: &RecoverOptions,
) -> Result<Recovery> {
    let v = q.n_terms();
    let k = anchors.len();
    let mut seen = anchors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if k == 0 || seen.len() != k || seen.last().is_some_and(|&a| a >= v) {
        return Err(Error::Model(format!("invalid anchor set {anchors:?}")));
    }
    let qbar = q.row_normalized();
    let x = qbar.select(Axis(0), anchors);
    let h = x.dot(&x.t());
    let b = x.dot(&qbar.t());

    let solved: Vec<(Array1<f64>, bool, f64)> = (0..v)
        .into_par_iter()
        .map(|i| {
            if let Some(pos) = anchors.iter().position(|&a| a == i) {
                let mut e = Array1::zeros(k);
                e[pos] = 1.0;
                return (e, true, 0.0);
            }
            let row = qbar.row(i);
            simplex_least_squares(&h, b.column(i), row.dot(&row), opts)
        })
        .collect();

    let mut coef = Array2::zeros((v, k));
    let mut unconverged = 0;
    let mut max_residual = 0.0f64;
    for (i, (c, converged, residual)) in solved.into_iter().enumerate() {
        coef.row_mut(i).assign(&c);
        unconverged += usize::from(!converged);
        max_residual = max_residual.max(residual);
    }
    if unconverged > 0 {
        log::warn!(
            "recovery: {unconverged} words hit the iteration cap (max residual {max_residual:.3e})"
        );
    }

    let mut beta = Array2::zeros((k, v));
    for i in 0..v {
        for t in 0..k {
            beta[[t, i]] = coef[[i, t]] * q.word_prob[i];
        }
    }
    for mut row in beta.rows_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.mapv_inplace(|x| x / s);
        } else {
            row.fill(1.0 / v as f64);
        }
    }
    Ok(Recovery {
        beta,
        coef,
        unconverged,
        max_residual,
    })
}

/// Minimise `cᵀHc − 2cᵀb + yy` over the simplex by exponentiated gradient
/// with an adaptive step. Returns `(c, converged, residual norm)`.
fn simplex_least_squares(
    h: &Array2<f64>,
    b: ArrayView1<f64>,
    yy: f64,
    opts: &RecoverOptions,
) -> (Array1<f64>, bool, f64) {
    let k = b.len();
    let objective = |c: &Array1<f64>| c.dot(&h.dot(c)) - 2.0 * c.dot(&b) + yy;
    let mut c = Array1::from_elem(k, 1.0 / k as f64);
    let mut f = objective(&c);
    let mut eta = 1.0;
    let threshold = opts.tol * yy.max(f64::MIN_POSITIVE);
    for _ in 0..opts.max_iter {
        let grad = (h.dot(&c) - b) * 2.0;
        let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = c.dot(&grad) - gmin;
        if gap <= threshold {
            return (c, true, f.max(0.0).sqrt());
        }
        let scale = grad.iter().map(|g| (g - gmin).abs()).fold(0.0, f64::max);
        let mut accepted = false;
        for _ in 0..60 {
            let mut next = Array1::from_shape_fn(k, |t| c[t] * (-eta * (grad[t] - gmin) / scale).exp());
            let z = next.sum();
            next /= z;
            let fn_ = objective(&next);
            if fn_ <= f {
                c = next;
                f = fn_;
                eta *= 1.5;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            return (c, true, f.max(0.0).sqrt());
        }
    }
    (c, false, f.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn anchors_are_unit_vectors() {
        let q = array![
            [0.10, 0.00, 0.05],
            [0.00, 0.20, 0.05],
            [0.05, 0.05, 0.50],
        ];
        let c = CooccurrenceMatrix::from_matrix(q);
        let r = recover_topic_word(&c, &[1, 0], &RecoverOptions::default()).unwrap();
        assert_eq!(r.coef.row(1).to_vec(), [1.0, 0.0]);
        assert_eq!(r.coef.row(0).to_vec(), [0.0, 1.0]);
        for row in r.beta.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_mixture_is_recovered() {
        // Row 2 is exactly 0.3·row0 + 0.7·row1 after normalisation.
        let a = array![0.6, 0.2, 0.2];
        let b = array![0.1, 0.5, 0.4];
        let m = &a * 0.3 + &b * 0.7;
        let mut q = Array2::zeros((3, 3));
        q.row_mut(0).assign(&a);
        q.row_mut(1).assign(&(&b * 2.0));
        q.row_mut(2).assign(&(&m * 0.5));
        let c = CooccurrenceMatrix::from_matrix(q);
        let r = recover_topic_word(&c, &[0, 1], &RecoverOptions::default()).unwrap();
        assert!((r.coef[[2, 0]] - 0.3).abs() < 1e-4, "{}", r.coef);
        assert!((r.coef[[2, 1]] - 0.7).abs() < 1e-4);
    }

    #[test]
    fn single_topic_is_word_marginal() {
        let q = array![[0.1, 0.2], [0.2, 0.5]];
        let c = CooccurrenceMatrix::from_matrix(q);
        let r = recover_topic_word(&c, &[1], &RecoverOptions::default()).unwrap();
        let p: f64 = c.word_prob.iter().sum();
        assert!((r.beta[[0, 0]] - c.word_prob[0] / p).abs() < 1e-12);
        assert!((r.beta[[0, 1]] - c.word_prob[1] / p).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_anchors() {
        let c = CooccurrenceMatrix::from_matrix(Array2::eye(3));
        let o = RecoverOptions::default();
        assert!(recover_topic_word(&c, &[0, 0], &o).is_err());
        assert!(recover_topic_word(&c, &[0, 3], &o).is_err());
        assert!(recover_topic_word(&c, &[], &o).is_err());
    }
}
