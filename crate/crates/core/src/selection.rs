//! C_v topic coherence and choosing the number of topics.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::textprep::{DocTermMatrix, TokenizedDocument};
use crate::topicmodel::{anchor_candidates, build_cooccurrence, spectral_topics, top_term_indices, SpectralOptions};

pub const DEFAULT_WINDOW: usize = 110;
pub const DEFAULT_TOP_N: usize = 10;
pub const NPMI_EPSILON: f64 = 1e-12;

/// Boolean sliding-window document frequencies for a fixed word list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowStats {
    pub words: Vec<String>,
    pub n_windows: u64,
    /// Windows containing `words[i]`.
    pub counts: Vec<u64>,
    /// Row-major `|words|²` matrix of windows containing both words.
    pub joint: Vec<u64>,
}

impl WindowStats {
    pub fn prob(&self, i: usize) -> f64 {
        self.ratio(self.counts[i])
    }

    pub fn joint_prob(&self, i: usize, j: usize) -> f64 {
        self.ratio(self.joint[i * self.words.len() + j])
    }

    fn ratio(&self, c: u64) -> f64 {
        if self.n_windows == 0 {
            0.0
        } else {
            c as f64 / self.n_windows as f64
        }
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    /// Set bits `lo..hi`.
    fn set_range(&mut self, lo: usize, hi: usize) {
        for i in lo..hi {
            self.0[i / 64] |= 1 << (i % 64);
        }
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    fn count_and(&self, other: &Bits) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| u64::from((a & b).count_ones()))
            .sum()
    }
}

/// Slide a window of `window` tokens over each document's bigram stream.
///
/// Every token position starts one window, truncated at the end of the
/// document, so a document of n tokens contributes n windows whatever its
/// length.
pub fn sliding_window_stats(docs: &[TokenizedDocument], window: usize, words: &[String]) -> Result<WindowStats> {
    if window == 0 {
        return Err(Error::Config("coherence window must be at least 1".into()));
    }
    let u = words.len();
    let index: HashMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let zero = || (0u64, vec![0u64; u], vec![0u64; u * u]);
    let (n_windows, counts, joint) = docs
        .par_iter()
        .fold(zero, |(mut n, mut counts, mut joint), doc| {
            let len = doc.bigrams.len();
            n += len as u64;
            let mut present: BTreeMap<usize, Bits> = BTreeMap::new();
            for (pos, tok) in doc.bigrams.iter().enumerate() {
                if let Some(&w) = index.get(tok.as_str()) {
                    // Windows starting in (pos − window, pos] contain this token.
                    let lo = (pos + 1).saturating_sub(window);
                    present.entry(w).or_insert_with(|| Bits::new(len)).set_range(lo, pos + 1);
                }
            }
            let present: Vec<(usize, Bits)> = present.into_iter().collect();
            for (a, (i, bi)) in present.iter().enumerate() {
                let c = bi.count();
                counts[*i] += c;
                joint[i * u + i] += c;
                for (j, bj) in &present[a + 1..] {
                    let both = bi.count_and(bj);
                    joint[i * u + j] += both;
                    joint[j * u + i] += both;
                }
            }
            (n, counts, joint)
        })
        .reduce(zero, |a, b| {
            let add = |x: Vec<u64>, y: Vec<u64>| x.into_iter().zip(y).map(|(p, q)| p + q).collect();
            (a.0 + b.0, add(a.1, b.1), add(a.2, b.2))
        });
    Ok(WindowStats {
        words: words.to_vec(),
        n_windows,
        counts,
        joint,
    })
}

/// Normalised pointwise mutual information with additive smoothing `eps`.
///
/// Conventions: a word that never occurs, or a pair that never co-occurs,
/// scores −1; a pair occurring in every window scores 1. Results are clamped
/// to [−1, 1].
pub fn npmi(p_i: f64, p_j: f64, p_ij: f64, eps: f64) -> f64 {
    if p_i <= 0.0 || p_j <= 0.0 || p_ij <= 0.0 {
        return -1.0;
    }
    let denom = -(p_ij + eps).ln();
    if denom <= f64::EPSILON {
        return 1.0;
    }
    (((p_ij + eps) / (p_i * p_j)).ln() / denom).clamp(-1.0, 1.0)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// C_v of one word set: each word's NPMI vector against the whole set is
/// compared by cosine with the sum of all vectors, and the similarities are
/// averaged.
pub fn cv_topic(stats: &WindowStats, members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let vectors: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| {
            members
                .iter()
                .map(|&j| npmi(stats.prob(i), stats.prob(j), stats.joint_prob(i, j), NPMI_EPSILON))
                .collect()
        })
        .collect();
    let mut total = vec![0.0; members.len()];
    for v in &vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    vectors.iter().map(|v| cosine(v, &total)).sum::<f64>() / members.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceScores {
    pub mean: f64,
    pub per_topic: Vec<f64>,
}

/// Mean C_v over topics, using each topic's `top_n` highest-β terms.
pub fn cv_coherence(
    beta: &Array2<f64>,
    terms: &[String],
    docs: &[TokenizedDocument],
    top_n: usize,
    window: usize,
) -> Result<CoherenceScores> {
    if beta.ncols() != terms.len() {
        return Err(Error::Model("topic-word matrix and vocabulary disagree in size".into()));
    }
    if top_n == 0 || beta.nrows() == 0 {
        return Err(Error::Config("coherence needs top_n >= 1 and at least one topic".into()));
    }
    let tops = top_term_indices(beta, terms, top_n);
    let mut union: Vec<usize> = tops.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let words: Vec<String> = union.iter().map(|&i| terms[i].clone()).collect();
    let stats = sliding_window_stats(docs, window, &words)?;
    let slot = |term: usize| union.binary_search(&term).expect("term is in the union");

    let per_topic: Vec<f64> = tops
        .iter()
        .enumerate()
        .map(|(k, top)| {
            let members: Vec<usize> = top.iter().map(|&t| slot(t)).filter(|&s| stats.counts[s] > 0).collect();
            if members.len() < top.len() {
                log::warn!(
                    "topic {k}: only {} of its top {} terms occur in the reference corpus",
                    members.len(),
                    top.len()
                );
            }
            cv_topic(&stats, &members)
        })
        .collect();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceScores { mean, per_topic })
}

/// Coherence curve over candidate topic counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub per_k: BTreeMap<usize, f64>,
    pub window_size: usize,
    pub top_n: usize,
    pub chosen_k: usize,
}

impl CoherenceReport {
    pub fn new(per_k: BTreeMap<usize, f64>, window_size: usize, top_n: usize) -> Result<Self> {
        let chosen_k = argmax_smallest(&per_k).ok_or_else(|| Error::Config("empty K grid".into()))?;
        Ok(CoherenceReport {
            per_k,
            window_size,
            top_n,
            chosen_k,
        })
    }

    /// `K,score` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,score\n");
        for (k, s) in &self.per_k {
            let _ = writeln!(out, "{k},{s}");
        }
        out
    }

    pub fn from_csv(text: &str, window_size: usize, top_n: usize, location: &Path) -> Result<Self> {
        let mut per_k = BTreeMap::new();
        for (i, line) in text.lines().enumerate().skip(1).filter(|(_, l)| !l.is_empty()) {
            let bad = |why: &str| Error::parse("coherence csv", format!("{}:{}", location.display(), i + 1), why);
            let (k, s) = line.split_once(',').ok_or_else(|| bad("expected K,score"))?;
            per_k.insert(
                k.trim().parse().map_err(|_| bad("bad K"))?,
                s.trim().parse().map_err(|_| bad("bad score"))?,
            );
        }
        Self::new(per_k, window_size, top_n)
    }
}

fn argmax_smallest(per_k: &BTreeMap<usize, f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&k, &s) in per_k {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((k, s));
        }
    }
    best.map(|(k, _)| k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub window: usize,
    pub top_n: usize,
    pub spectral: SpectralOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            window: DEFAULT_WINDOW,
            top_n: DEFAULT_TOP_N,
            spectral: SpectralOptions::default(),
        }
    }
}

/// The K grid `min, min+step, …, ≤ max`.
pub fn k_grid(min: usize, max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || min > max {
        return Err(Error::Config(format!("empty K grid {min}..={max} step {step}")));
    }
    Ok((min..=max).step_by(step).collect())
}

/// Fit a spectral model for every K and score it by C_v. The co-occurrence
/// matrix is shared across K; fits run in parallel but results are
/// collected in grid order.
pub fn sweep_k(
    dtm: &DocTermMatrix,
    docs: &[TokenizedDocument],
    terms: &[String],
    k_values: &[usize],
    seed: u64,
    opts: &SweepOptions,
) -> Result<CoherenceReport> {
    if k_values.is_empty() {
        return Err(Error::Config("K grid is empty".into()));
    }
    let q = build_cooccurrence(dtm)?;
    let candidates = anchor_candidates(dtm, &q, opts.spectral.anchor_min_docs);
    let scores: Vec<(usize, f64)> = k_values
        .par_iter()
        .map(|&k| {
            let (_, recovery) = spectral_topics(&q, &candidates, k, seed, &opts.spectral)?;
            let cv = cv_coherence(&recovery.beta, terms, docs, opts.top_n, opts.window)?;
            log::info!("K={k}: C_v {:.4}", cv.mean);
            Ok((k, cv.mean))
        })
        .collect::<Result<_>>()?;
    CoherenceReport::new(scores.into_iter().collect(), opts.window, opts.top_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            doc_id: String::new(),
            stems: vec![],
            bigrams: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn words(w: &[&str]) -> Vec<String> {
        w.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn short_doc_window_count() {
        let s = sliding_window_stats(&[doc(&["a", "b", "c", "d", "e"])], 110, &words(&["a"])).unwrap();
        assert_eq!(s.n_windows, 5);
        assert_eq!(s.counts, [1]);
    }

    #[test]
    fn toy_corpus_hand_tally() {
        // Window 2; windows are [s, s+2) truncated:
        //   d0 = a b a : {a,b} {b,a} {a}      → a 3, b 2, ab 2
        //   d1 = b c   : {b,c} {c}            → b 1, c 2, bc 1
        //   d2 = c     : {c}                  → c 1
        let docs = [doc(&["a", "b", "a"]), doc(&["b", "c"]), doc(&["c"])];
        let s = sliding_window_stats(&docs, 2, &words(&["a", "b", "c"])).unwrap();
        assert_eq!(s.n_windows, 6);
        assert_eq!(s.counts, [3, 3, 3]);
        assert_eq!(s.joint, [3, 2, 0, 2, 3, 1, 0, 1, 3]);
    }

    #[test]
    fn joint_equals_marginal_when_always_together() {
        // Every window holding x also holds y.
        let docs = [doc(&["y", "x", "y"]), doc(&["y", "x", "y", "y"])];
        let s = sliding_window_stats(&docs, 3, &words(&["x", "y"])).unwrap();
        assert_eq!(s.joint_prob(0, 1), s.prob(0));
        assert_eq!(s.joint_prob(1, 1), s.prob(1));
    }

    #[test]
    fn npmi_boundaries() {
        assert!((npmi(0.5, 0.5, 0.5, NPMI_EPSILON) - 1.0).abs() < 1e-10);
        assert_eq!(npmi(0.5, 0.5, 0.0, NPMI_EPSILON), -1.0);
        assert!(npmi(0.5, 0.5, 0.25, NPMI_EPSILON).abs() < 1e-10);
        assert_eq!(npmi(0.0, 0.5, 0.0, NPMI_EPSILON), -1.0);
        assert_eq!(npmi(1.0, 1.0, 1.0, NPMI_EPSILON), 1.0);
    }

    #[test]
    fn cooccurring_topic_scores_high() {
        let mut docs: Vec<_> = (0..20).map(|_| doc(&["p", "q", "r"])).collect();
        docs.extend((0..80).map(|_| doc(&["z", "z", "z"])));
        let terms = words(&["p", "q", "r", "z"]);
        let beta = ndarray::array![[0.3, 0.3, 0.3, 0.1]];
        let cv = cv_coherence(&beta, &terms, &docs, 3, 110).unwrap();
        assert!(cv.mean > 0.95, "{cv:?}");
    }

    #[test]
    fn report_picks_smallest_best() {
        let r = CoherenceReport::new([(5, 0.4), (10, 0.6), (15, 0.6)].into(), 110, 10).unwrap();
        assert_eq!(r.chosen_k, 10);
        let back = CoherenceReport::from_csv(&r.to_csv(), 110, 10, Path::new("c.csv")).unwrap();
        assert_eq!(back, r);
        assert!(CoherenceReport::new(BTreeMap::new(), 110, 10).is_err());
    }

    #[test]
    fn grid() {
        assert_eq!(k_grid(5, 50, 5).unwrap().len(), 10);
        assert_eq!(k_grid(5, 5, 5).unwrap(), [5]);
        assert!(k_grid(10, 5, 5).is_err());
    }

    proptest! {
        #[test]
        fn npmi_in_bounds(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            let (pi, pj) = (a.max(1e-9), b.max(1e-9));
            let pij = c * pi.min(pj);
            let x = npmi(pi, pj, pij, NPMI_EPSILON);
            prop_assert!((-1.0..=1.0).contains(&x));
        }
    }
}
