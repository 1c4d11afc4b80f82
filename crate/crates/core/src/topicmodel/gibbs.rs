use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::DocTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsOptions {
    pub alpha: f64,
    pub eta: f64,
    pub iterations: usize,
}

impl GibbsOptions {
    /// alpha = 50/K, eta = 0.01, 1000 sweeps.
    pub fn defaults_for(k: usize) -> Self {
        GibbsOptions {
            alpha: 50.0 / k as f64,
            eta: 0.01,
            iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub beta: Array2<f64>,
    pub theta: Array2<f64>,
    /// Final topic of every token, tokens ordered by document then term.
    pub assignments: Vec<u32>,
}

/// Collapsed Gibbs sampling for LDA over the tokens of `dtm`.
pub fn sample_lda(dtm: &DocTermMatrix, k: usize, opts: &GibbsOptions, seed: u64) -> Result<GibbsState> {
    if k == 0 {
        return Err(Error::Config("topic count must be at least 1".into()));
    }
    if !(opts.alpha > 0.0 && opts.eta > 0.0) || opts.iterations == 0 {
        return Err(Error::Config(
            "gibbs needs alpha > 0, eta > 0 and at least one iteration".into(),
        ));
    }
    let (d_count, v) = (dtm.n_docs(), dtm.n_terms());
    let mut tokens: Vec<(u32, u32)> = Vec::new();
    for (d, t, c) in dtm.triplets() {
        tokens.extend(std::iter::repeat_n((d as u32, t as u32), c as usize));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<u32> = (0..tokens.len()).map(|_| rng.random_range(0..k as u32)).collect();
    let mut n_dk = vec![0u32; d_count * k];
    let mut n_kw = vec![0u32; k * v];
    let mut n_k = vec![0u32; k];
    for (&(d, w), &t) in tokens.iter().zip(&z) {
        n_dk[d as usize * k + t as usize] += 1;
        n_kw[t as usize * v + w as usize] += 1;
        n_k[t as usize] += 1;
    }

    let v_eta = v as f64 * opts.eta;
    let mut p = vec![0.0f64; k];
    for _ in 0..opts.iterations {
        for (&(d, w), zt) in tokens.iter().zip(z.iter_mut()) {
            let (d, w, old) = (d as usize, w as usize, *zt as usize);
            n_dk[d * k + old] -= 1;
            n_kw[old * v + w] -= 1;
            n_k[old] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (f64::from(n_dk[d * k + t]) + opts.alpha) * (f64::from(n_kw[t * v + w]) + opts.eta)
                    / (f64::from(n_k[t]) + v_eta);
                p[t] = total;
            }
            let u = rng.random::<f64>() * total;
            let new = p.iter().position(|&c| u < c).unwrap_or(k - 1);
            n_dk[d * k + new] += 1;
            n_kw[new * v + w] += 1;
            n_k[new] += 1;
            *zt = new as u32;
        }
    }

    let beta = Array2::from_shape_fn((k, v), |(t, w)| {
        (f64::from(n_kw[t * v + w]) + opts.eta) / (f64::from(n_k[t]) + v_eta)
    });
    let k_alpha = k as f64 * opts.alpha;
    let theta = Array2::from_shape_fn((d_count, k), |(d, t)| {
        (f64::from(n_dk[d * k + t]) + opts.alpha) / (dtm.doc_lengths()[d] as f64 + k_alpha)
    });
    Ok(GibbsState {
        beta,
        theta,
        assignments: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DocTermMatrix {
        DocTermMatrix::from_triplets(
            4,
            4,
            [(0, 0, 5), (0, 1, 4), (1, 0, 3), (1, 1, 6), (2, 2, 5), (2, 3, 5), (3, 2, 4), (3, 3, 4)],
        )
        .unwrap()
    }

    #[test]
    fn single_topic() {
        let opts = GibbsOptions { alpha: 1.0, eta: 0.01, iterations: 3 };
        let s = sample_lda(&toy(), 1, &opts, 1).unwrap();
        assert!(s.theta.iter().all(|&t| t == 1.0));
        let sums = toy().column_sums();
        let n: u64 = sums.iter().sum();
        for (w, &c) in sums.iter().enumerate() {
            let expected = (c as f64 + 0.01) / (n as f64 + 0.04);
            assert!((s.beta[[0, w]] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let opts = GibbsOptions { alpha: 0.5, eta: 0.1, iterations: 20 };
        let a = sample_lda(&toy(), 2, &opts, 42).unwrap();
        let b = sample_lda(&toy(), 2, &opts, 42).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.beta, b.beta);
    }

    #[test]
    fn rows_on_simplex() {
        let s = sample_lda(&toy(), 3, &GibbsOptions::defaults_for(3), 5).unwrap();
        for row in s.beta.rows().into_iter().chain(s.theta.rows()) {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rejects_bad_priors() {
        let bad = GibbsOptions { alpha: 0.0, eta: 0.1, iterations: 1 };
        assert!(sample_lda(&toy(), 2, &bad, 0).is_err());
    }
}
