//! Topic models: spectral anchor-word recovery and a collapsed Gibbs LDA baseline.

mod anchors;
mod cooccur;
mod eval;
mod gibbs;
mod infer;
mod recover;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use anchors::{anchor_candidates, find_anchors, PROJECTION_DIM, PROJECTION_THRESHOLD};
pub use cooccur::{build_cooccurrence, CooccurrenceMatrix};
pub use eval::{cosine, held_out_log_likelihood, match_topics};
pub use gibbs::{sample_lda, GibbsOptions, GibbsState};
pub use infer::{doc_log_likelihood, infer_doc_topics, infer_theta, InferOptions};
pub use recover::{recover_topic_word, RecoverOptions, Recovery};

use crate::error::{Error, Result};
use crate::textprep::{DocTermMatrix, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Gibbs,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Method::Spectral),
            "gibbs" | "lda" => Ok(Method::Gibbs),
            other => Err(Error::Config(format!("unknown fit method {other:?}"))),
        }
    }
}

/// Solver diagnostics recorded alongside a model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    #[serde(default)]
    pub skipped_docs: usize,
    #[serde(default)]
    pub unconverged_words: usize,
    #[serde(default)]
    pub max_residual: f64,
    #[serde(default)]
    pub unconverged_docs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsOptions>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    /// K×V topic-word distributions.
    pub beta: Array2<f64>,
    /// D×K document-topic proportions.
    pub theta: Array2<f64>,
    /// Anchor term per topic; empty for Gibbs fits.
    pub anchors: Vec<usize>,
    pub seed: u64,
    pub method: Method,
    pub stats: FitStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    /// Minimum document frequency for an anchor candidate.
    pub anchor_min_docs: usize,
    pub recover: RecoverOptions,
    pub infer: InferOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            anchor_min_docs: 1,
            recover: RecoverOptions::default(),
            infer: InferOptions::default(),
        }
    }
}

/// Topic-word matrix and anchors from a precomputed co-occurrence matrix.
/// Lets a K sweep share one `Q`.
pub fn spectral_topics(
    q: &CooccurrenceMatrix,
    candidates: &[usize],
    k: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<(Vec<usize>, Recovery)> {
    let anchors = find_anchors(q, k, seed, candidates)?;
    let recovery = recover_topic_word(q, &anchors, &opts.recover)?;
    Ok((anchors, recovery))
}

pub fn fit_spectral(dtm: &DocTermMatrix, k: usize, seed: u64) -> Result<TopicModel> {
    fit_spectral_with(dtm, k, seed, &SpectralOptions::default())
}

pub fn fit_spectral_with(
    dtm: &DocTermMatrix,
    k: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<TopicModel> {
    if k < 2 {
        return Err(Error::Config(format!("spectral fit needs K >= 2, got {k}")));
    }
    let q = build_cooccurrence(dtm)?;
    let candidates = anchor_candidates(dtm, &q, opts.anchor_min_docs);
    let (anchors, recovery) = spectral_topics(&q, &candidates, k, seed, opts)?;
    let (theta, unconverged_docs) = infer_theta(dtm, &recovery.beta, &opts.infer);
    Ok(TopicModel {
        k,
        beta: recovery.beta,
        theta,
        anchors,
        seed,
        method: Method::Spectral,
        stats: FitStats {
            skipped_docs: q.skipped_docs,
            unconverged_words: recovery.unconverged,
            max_residual: recovery.max_residual,
            unconverged_docs,
            gibbs: None,
        },
    })
}

pub fn fit_lda_gibbs(dtm: &DocTermMatrix, k: usize, opts: &GibbsOptions, seed: u64) -> Result<TopicModel> {
    let state = sample_lda(dtm, k, opts, seed)?;
    Ok(TopicModel {
        k,
        beta: state.beta,
        theta: state.theta,
        anchors: Vec::new(),
        seed,
        method: Method::Gibbs,
        stats: FitStats {
            gibbs: Some(*opts),
            ..FitStats::default()
        },
    })
}

/// Column means of θ: how much of the corpus each topic accounts for.
pub fn relative_frequency(theta: &Array2<f64>) -> Vec<f64> {
    let d = theta.nrows() as f64;
    theta
        .columns()
        .into_iter()
        .map(|c| c.iter().sum::<f64>() / d)
        .collect()
}

/// The `n` most probable terms of each topic; equal weights are ordered
/// lexicographically.
pub fn top_terms(beta: &Array2<f64>, terms: &[String], n: usize) -> Vec<Vec<String>> {
    top_term_indices(beta, terms, n)
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| terms[i].clone()).collect())
        .collect()
}

pub fn top_term_indices(beta: &Array2<f64>, terms: &[String], n: usize) -> Vec<Vec<usize>> {
    beta.rows()
        .into_iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| terms[a].cmp(&terms[b])));
            idx.truncate(n);
            idx
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelMeta {
    k: usize,
    n_terms: usize,
    n_docs: usize,
    seed: u64,
    method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_docs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_total: Option<usize>,
    stats: FitStats,
}

fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::with_capacity(m.len() * 12);
    for row in m.rows() {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

fn parse_matrix_csv(text: &str, rows: usize, cols: usize, path: &Path) -> Result<Array2<f64>> {
    let mut values = Vec::with_capacity(rows * cols);
    let mut n_rows = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        n_rows += 1;
        let before = values.len();
        for field in line.split(',') {
            values.push(field.trim().parse::<f64>().map_err(|e| {
                Error::parse("matrix", format!("{}:{}", path.display(), i + 1), e)
            })?);
        }
        if values.len() - before != cols {
            return Err(Error::parse(
                "matrix",
                format!("{}:{}", path.display(), i + 1),
                format!("expected {cols} columns"),
            ));
        }
    }
    if n_rows != rows {
        return Err(Error::parse("matrix", path.display().to_string(), format!("expected {rows} rows")));
    }
    Ok(Array2::from_shape_vec((rows, cols), values).expect("shape checked"))
}

impl TopicModel {
    pub fn n_terms(&self) -> usize {
        self.beta.ncols()
    }

    pub fn n_docs(&self) -> usize {
        self.theta.nrows()
    }

    pub fn relative_frequency(&self) -> Vec<f64> {
        relative_frequency(&self.theta)
    }

    /// Artifact files in write order.
    pub fn artifact_paths(dir: &Path) -> [PathBuf; 4] {
        ["beta.csv", "theta.csv", "anchors.txt", "meta.json"].map(|f| dir.join(f))
    }

    /// Write `beta.csv`, `theta.csv`, `anchors.txt` and `meta.json` into `dir`.
    pub fn save(&self, dir: &Path, vocab: &Vocabulary) -> Result<Vec<PathBuf>> {
        if vocab.len() != self.n_terms() {
            return Err(Error::Model(format!(
                "vocabulary has {} terms but the model has {}",
                vocab.len(),
                self.n_terms()
            )));
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let [beta_p, theta_p, anchors_p, meta_p] = Self::artifact_paths(dir);
        let write = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| Error::io(p, e));
        write(&beta_p, &matrix_csv(&self.beta))?;
        write(&theta_p, &matrix_csv(&self.theta))?;
        let mut anchors = String::new();
        for &a in &self.anchors {
            let _ = writeln!(anchors, "{a}\t{}", vocab.terms[a]);
        }
        write(&anchors_p, &anchors)?;
        let meta = ModelMeta {
            k: self.k,
            n_terms: self.n_terms(),
            n_docs: self.n_docs(),
            seed: self.seed,
            method: self.method,
            min_docs: Some(vocab.min_doc_threshold),
            min_total: Some(vocab.min_total_threshold),
            stats: self.stats.clone(),
        };
        write(&meta_p, &(serde_json::to_string_pretty(&meta)? + "\n"))?;
        Ok(vec![beta_p, theta_p, anchors_p, meta_p])
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let [beta_p, theta_p, anchors_p, meta_p] = Self::artifact_paths(dir);
        let read = |p: &Path| {
            if !p.exists() {
                return Err(Error::MissingArtifact(p.to_path_buf()));
            }
            std::fs::read_to_string(p).map_err(|e| Error::io(p, e))
        };
        let meta: ModelMeta = serde_json::from_str(&read(&meta_p)?)?;
        let beta = parse_matrix_csv(&read(&beta_p)?, meta.k, meta.n_terms, &beta_p)?;
        let theta = parse_matrix_csv(&read(&theta_p)?, meta.n_docs, meta.k, &theta_p)?;
        let anchors = read(&anchors_p)?
            .lines()
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.split('\t').next().unwrap_or_default().parse::<usize>().map_err(|e| {
                    Error::parse("anchors", format!("{}:{}", anchors_p.display(), i + 1), e)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TopicModel {
            k: meta.k,
            beta,
            theta,
            anchors,
            seed: meta.seed,
            method: meta.method,
            stats: meta.stats,
        })
    }
}
