use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::TokenizedDocument;
use crate::error::{Error, Result};

/// Trimmed bigram vocabulary, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub doc_freq: Vec<usize>,
    pub total_freq: Vec<usize>,
    pub min_doc_threshold: usize,
    pub min_total_threshold: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_parts(
        terms: Vec<String>,
        doc_freq: Vec<usize>,
        total_freq: Vec<usize>,
        min_doc_threshold: usize,
        min_total_threshold: usize,
    ) -> Result<Self> {
        if terms.len() != doc_freq.len() || terms.len() != total_freq.len() {
            return Err(Error::Config("vocabulary columns differ in length".into()));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms,
            doc_freq,
            total_freq,
            min_doc_threshold,
            min_total_threshold,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// TSV with a `term doc_freq total_freq` header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("term\tdoc_freq\ttotal_freq\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                self.terms[i], self.doc_freq[i], self.total_freq[i]
            );
        }
        out
    }

    pub fn from_tsv(
        text: &str,
        min_doc_threshold: usize,
        min_total_threshold: usize,
        location: &Path,
    ) -> Result<Self> {
        let (mut terms, mut df, mut tf) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| Error::parse("vocabulary", format!("{}:{}", location.display(), i + 1), why);
            let mut cols = line.split('\t');
            let (Some(t), Some(d), Some(c), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad("expected 3 columns"));
            };
            terms.push(t.to_string());
            df.push(d.parse().map_err(|_| bad("bad doc_freq"))?);
            tf.push(c.parse().map_err(|_| bad("bad total_freq"))?);
        }
        Self::from_parts(terms, df, tf, min_doc_threshold, min_total_threshold)
    }
}

/// Keep a bigram iff it appears in at least `min_docs` documents and at
/// least `min_total` times overall.
pub fn build_vocabulary(
    docs: &[TokenizedDocument],
    min_docs: usize,
    min_total: usize,
) -> Result<Vocabulary> {
    if min_docs == 0 || min_total == 0 {
        return Err(Error::Config("trim thresholds must be at least 1".into()));
    }
    let counts: HashMap<&str, (usize, usize)> = docs
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&str, (usize, usize)>, doc| {
            let mut seen = HashSet::new();
            for b in &doc.bigrams {
                let entry = acc.entry(b.as_str()).or_default();
                entry.1 += 1;
                if seen.insert(b.as_str()) {
                    entry.0 += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, (d, t)) in b {
                let e = a.entry(k).or_default();
                e.0 += d;
                e.1 += t;
            }
            a
        });
    let kept: BTreeMap<&str, (usize, usize)> = counts
        .into_iter()
        .filter(|(_, (d, t))| *d >= min_docs && *t >= min_total)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_docs,
            min_total,
        });
    }
    let mut terms = Vec::with_capacity(kept.len());
    let mut doc_freq = Vec::with_capacity(kept.len());
    let mut total_freq = Vec::with_capacity(kept.len());
    for (term, (d, t)) in kept {
        terms.push(term.to_string());
        doc_freq.push(d);
        total_freq.push(t);
    }
    Vocabulary::from_parts(terms, doc_freq, total_freq, min_docs, min_total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `n_docs` documents containing `bigram`, with `total` occurrences spread over them.
    fn docs_with(bigram: &str, n_docs: usize, total: usize) -> Vec<TokenizedDocument> {
        (0..n_docs)
            .map(|d| {
                let reps = total / n_docs + usize::from(d < total % n_docs);
                TokenizedDocument {
                    doc_id: format!("{bigram}{d}"),
                    stems: vec![],
                    bigrams: vec![bigram.to_string(); reps],
                }
            })
            .collect()
    }

    fn trim(n_docs: usize, total: usize) -> Result<Vocabulary> {
        let mut docs = docs_with("x_y", n_docs, total);
        docs.extend(docs_with("keep_me", 100, 300));
        build_vocabulary(&docs, 90, 200)
    }

    #[test]
    fn fails_doc_threshold() {
        assert_eq!(trim(89, 500).unwrap().terms, ["keep_me"]);
    }

    #[test]
    fn fails_total_threshold() {
        assert_eq!(trim(100, 150).unwrap().terms, ["keep_me"]);
    }

    #[test]
    fn boundary_is_inclusive() {
        let v = trim(90, 200).unwrap();
        assert_eq!(v.terms, ["keep_me", "x_y"]);
        assert_eq!(v.doc_freq, [100, 90]);
        assert_eq!(v.total_freq, [300, 200]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let docs = docs_with("a_b", 3, 3);
        assert!(matches!(
            build_vocabulary(&docs, 90, 200),
            Err(Error::EmptyVocabulary { .. })
        ));
        assert!(matches!(build_vocabulary(&docs, 0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn tsv_round_trip() {
        let v = trim(90, 200).unwrap();
        let back = Vocabulary::from_tsv(&v.to_tsv(), 90, 200, Path::new("v.tsv")).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.index_of("x_y"), Some(1));
    }
}
