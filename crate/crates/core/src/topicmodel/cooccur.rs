use ndarray::Array2;

use crate::error::{Error, Result};
use crate::textprep::DocTermMatrix;

/// Expected word-pair co-occurrence probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    pub q: Array2<f64>,
    pub word_prob: Vec<f64>,
    /// Documents that contributed to `q`.
    pub used_docs: usize,
    /// Documents with fewer than two tokens.
    pub skipped_docs: usize,
}

impl CooccurrenceMatrix {
    /// Wrap an existing matrix; `word_prob` becomes its row sums.
    pub fn from_matrix(q: Array2<f64>) -> Self {
        let word_prob = row_sums(&q);
        CooccurrenceMatrix {
            q,
            word_prob,
            used_docs: 0,
            skipped_docs: 0,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.q.nrows()
    }

    /// Rows scaled to sum to one; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Array2<f64> {
        let mut qbar = self.q.clone();
        for (mut row, &p) in qbar.rows_mut().into_iter().zip(&self.word_prob) {
            if p > 0.0 {
                row.mapv_inplace(|x| x / p);
            }
        }
        qbar
    }
}

fn row_sums(q: &Array2<f64>) -> Vec<f64> {
    q.rows().into_iter().map(|r| r.iter().sum()).collect()
}

/// Average over documents of `(w wᵀ − diag w) / (n (n − 1))`.
///
/// Accumulation runs over documents in index order so the result is
/// bit-for-bit reproducible.
pub fn build_cooccurrence(dtm: &DocTermMatrix) -> Result<CooccurrenceMatrix> {
    let v = dtm.n_terms();
    let mut q = Array2::<f64>::zeros((v, v));
    let (mut used, mut skipped) = (0usize, 0usize);
    for d in 0..dtm.n_docs() {
        let n = dtm.doc_lengths()[d] as f64;
        if n < 2.0 {
            skipped += 1;
            continue;
        }
        used += 1;
        let norm = n * (n - 1.0);
        let (cols, counts) = dtm.row(d);
        for (&i, &wi) in cols.iter().zip(counts) {
            let wi = f64::from(wi);
            for (&j, &wj) in cols.iter().zip(counts) {
                let wj = f64::from(wj);
                let pair = if i == j { wi * wj - wi } else { wi * wj };
                q[[i as usize, j as usize]] += pair / norm;
            }
        }
    }
    if used == 0 {
        return Err(Error::DegenerateCorpus);
    }
    if skipped > 0 {
        log::info!("co-occurrence: skipped {skipped} documents with fewer than 2 tokens");
    }
    q.mapv_inplace(|x| x / used as f64);
    let word_prob = row_sums(&q);
    Ok(CooccurrenceMatrix {
        q,
        word_prob,
        used_docs: used,
        skipped_docs: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dtm(n_docs: usize, n_terms: usize, t: &[(usize, usize, u32)]) -> DocTermMatrix {
        DocTermMatrix::from_triplets(n_docs, n_terms, t.iter().copied()).unwrap()
    }

    #[test]
    fn single_pair() {
        let c = build_cooccurrence(&dtm(1, 2, &[(0, 0, 1), (0, 1, 1)])).unwrap();
        assert_eq!(c.q, ndarray::array![[0.0, 0.5], [0.5, 0.0]]);
        assert_eq!(c.word_prob, [0.5, 0.5]);
    }

    #[test]
    fn repeated_word() {
        let c = build_cooccurrence(&dtm(1, 1, &[(0, 0, 2)])).unwrap();
        assert_eq!(c.q[[0, 0]], 1.0);
    }

    #[test]
    fn short_docs_are_skipped() {
        let c = build_cooccurrence(&dtm(3, 2, &[(0, 0, 1), (1, 0, 1), (1, 1, 1)])).unwrap();
        assert_eq!((c.used_docs, c.skipped_docs), (1, 2));
        assert!(matches!(
            build_cooccurrence(&dtm(2, 2, &[(0, 0, 1)])),
            Err(Error::DegenerateCorpus)
        ));
    }

    #[test]
    fn normalized_and_symmetric() {
        let c = build_cooccurrence(&dtm(
            3,
            4,
            &[(0, 0, 3), (0, 2, 1), (1, 1, 2), (1, 3, 5), (1, 0, 1), (2, 2, 4)],
        ))
        .unwrap();
        assert!((c.q.sum() - 1.0).abs() < 1e-12);
        assert_eq!(c.q, c.q.t());
        let qbar = c.row_normalized();
        for row in qbar.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}
