use ndarray::{Array2, ArrayView1};

use super::infer::{doc_log_likelihood, infer_doc_topics, InferOptions};
use crate::textprep::DocTermMatrix;

/// Split a document's tokens into alternating halves: even-numbered tokens
/// (in term order) are observed, odd-numbered ones are held out.
fn split_tokens(cols: &[u32], counts: &[u32]) -> [(Vec<u32>, Vec<u32>); 2] {
    let mut halves: [(Vec<u32>, Vec<u32>); 2] = Default::default();
    let mut position = 0u64;
    for (&t, &c) in cols.iter().zip(counts) {
        let c = u64::from(c);
        let first = (c + 1 - position % 2) / 2;
        for (half, n) in [(0, first), (1, c - first)] {
            if n > 0 {
                halves[half].0.push(t);
                halves[half].1.push(n as u32);
            }
        }
        position += c;
    }
    halves
}

/// Document-completion held-out likelihood: θ is inferred from half of each
/// document and the other half is scored. Returns the mean log-likelihood
/// per scored token.
pub fn held_out_log_likelihood(beta: &Array2<f64>, dtm: &DocTermMatrix, opts: &InferOptions) -> f64 {
    let mut total = 0.0;
    let mut tokens = 0.0;
    for d in 0..dtm.n_docs() {
        let (cols, counts) = dtm.row(d);
        let [(oc, on), (hc, hn)] = split_tokens(cols, counts);
        if hc.is_empty() {
            continue;
        }
        let (theta, _) = infer_doc_topics(&oc, &on, beta, opts);
        let n: f64 = hn.iter().map(|&c| f64::from(c)).sum();
        total += doc_log_likelihood(&hc, &hn, beta, &theta) * n;
        tokens += n;
    }
    if tokens == 0.0 {
        0.0
    } else {
        total / tokens
    }
}

pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let denom = (a.dot(&a) * b.dot(&b)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        a.dot(&b) / denom
    }
}

/// Greedy one-to-one matching of topics (rows) by cosine similarity:
/// repeatedly pair the most similar unmatched rows. Returns `(row_a, row_b,
/// cosine)` in the order matched.
pub fn match_topics(a: &Array2<f64>, b: &Array2<f64>) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nrows() * b.nrows());
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            pairs.push((i, j, cosine(a.row(i), b.row(j))));
        }
    }
    pairs.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    let mut used_a = vec![false; a.nrows()];
    let mut used_b = vec![false; b.nrows()];
    let mut out = Vec::new();
    for (i, j, s) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j, s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn split_alternates() {
        let [(oc, on), (hc, hn)] = split_tokens(&[0, 1, 2], &[3, 1, 2]);
        // Token stream 0 0 0 1 2 2 → observed 0 0 2, held out 0 1 2.
        assert_eq!((oc, on), (vec![0, 2], vec![2, 1]));
        assert_eq!((hc, hn), (vec![0, 1, 2], vec![1, 1, 1]));
    }

    #[test]
    fn greedy_matching() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = array![[0.0, 0.9, 0.1], [0.8, 0.0, 0.2]];
        let m = match_topics(&a, &b);
        assert_eq!(m.iter().map(|&(i, j, _)| (i, j)).collect::<Vec<_>>(), [(1, 0), (0, 1)]);
    }

    #[test]
    fn true_model_scores_better_than_flat() {
        let beta = array![[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]];
        let flat = Array2::from_elem((2, 4), 0.25);
        let dtm = DocTermMatrix::from_triplets(2, 4, [(0, 0, 4), (0, 1, 4), (1, 2, 3), (1, 3, 5)]).unwrap();
        let o = InferOptions::default();
        assert!(held_out_log_likelihood(&beta, &dtm, &o) > held_out_log_likelihood(&flat, &dtm, &o));
    }
}
