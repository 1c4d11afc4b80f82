use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{TokenizedDocument, Vocabulary};
use crate::error::{Error, Result};

/// Sparse document-term counts in compressed row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    n_docs: usize,
    n_terms: usize,
    row_offsets: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
    doc_lengths: Vec<u64>,
}

impl DocTermMatrix {
    /// Build from `(doc, term, count)` triplets; duplicates are summed and
    /// zero counts dropped.
    pub fn from_triplets(
        n_docs: usize,
        n_terms: usize,
        triplets: impl IntoIterator<Item = (usize, usize, u32)>,
    ) -> Result<Self> {
        let mut cells: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (d, t, c) in triplets {
            if d >= n_docs || t >= n_terms {
                return Err(Error::Model(format!(
                    "triplet ({d}, {t}) outside {n_docs}x{n_terms}"
                )));
            }
            *cells.entry((d, t)).or_default() += c;
        }
        let mut row_offsets = vec![0; n_docs + 1];
        let mut cols = Vec::with_capacity(cells.len());
        let mut counts = Vec::with_capacity(cells.len());
        let mut doc_lengths = vec![0u64; n_docs];
        for ((d, t), c) in cells.into_iter().filter(|(_, c)| *c > 0) {
            row_offsets[d + 1] += 1;
            cols.push(t as u32);
            counts.push(c);
            doc_lengths[d] += u64::from(c);
        }
        for d in 0..n_docs {
            row_offsets[d + 1] += row_offsets[d];
        }
        Ok(DocTermMatrix {
            n_docs,
            n_terms,
            row_offsets,
            cols,
            counts,
            doc_lengths,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }

    /// Term indices and counts of document `d`, terms ascending.
    pub fn row(&self, d: usize) -> (&[u32], &[u32]) {
        let range = self.row_offsets[d]..self.row_offsets[d + 1];
        (&self.cols[range.clone()], &self.counts[range])
    }

    /// Documents with no in-vocabulary terms.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.n_docs)
            .filter(|&d| self.doc_lengths[d] == 0)
            .collect()
    }

    /// `(doc, term, count)` in ascending doc then term order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n_docs).flat_map(move |d| {
            let (cols, counts) = self.row(d);
            cols.iter()
                .zip(counts)
                .map(move |(&t, &c)| (d, t as usize, c))
        })
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n_terms];
        for (&t, &c) in self.cols.iter().zip(&self.counts) {
            sums[t as usize] += u64::from(c);
        }
        sums
    }

    /// Number of documents containing each term.
    pub fn doc_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0usize; self.n_terms];
        for &t in &self.cols {
            df[t as usize] += 1;
        }
        df
    }

    /// `D V NNZ` header followed by one `d t c` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 * (self.nnz() + 1));
        let _ = writeln!(out, "{} {} {}", self.n_docs, self.n_terms, self.nnz());
        for (d, t, c) in self.triplets() {
            let _ = writeln!(out, "{d} {t} {c}");
        }
        out
    }

    pub fn from_text(text: &str, location: &Path) -> Result<Self> {
        let err = |line: usize, why: &str| {
            Error::parse("dtm", format!("{}:{}", location.display(), line), why)
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(1, "bad header"))?;
        let [n_docs, n_terms, nnz] = dims[..] else {
            return Err(err(1, "header must be `D V NNZ`"));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<u64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(i + 1, "bad triplet"))?;
            let [d, t, c] = f[..] else {
                return Err(err(i + 1, "expected `d t c`"));
            };
            if c == 0 {
                return Err(err(i + 1, "explicit zero entry"));
            }
            triplets.push((d as usize, t as usize, c as u32));
        }
        if triplets.len() != nnz {
            return Err(err(1, "NNZ does not match entry count"));
        }
        Self::from_triplets(n_docs, n_terms, triplets)
    }
}

/// Count in-vocabulary bigrams per document. Documents without any are kept
/// as empty rows (see [`DocTermMatrix::empty_rows`]).
pub fn build_dtm(docs: &[TokenizedDocument], vocab: &Vocabulary) -> Result<DocTermMatrix> {
    if vocab.is_empty() {
        return Err(Error::Config("cannot build a DTM over an empty vocabulary".into()));
    }
    let triplets = docs.iter().enumerate().flat_map(|(d, doc)| {
        doc.bigrams
            .iter()
            .filter_map(|b| vocab.index_of(b))
            .map(move |t| (d, t, 1))
    });
    DocTermMatrix::from_triplets(docs.len(), vocab.len(), triplets)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PrepMeta {
    min_docs: usize,
    min_total: usize,
    n_docs: usize,
    n_terms: usize,
    empty_docs: usize,
}

/// Vocabulary, matrix and document ids stored under a common path prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedCorpus {
    pub vocab: Vocabulary,
    pub dtm: DocTermMatrix,
    pub doc_ids: Vec<String>,
}

impl PreparedCorpus {
    pub fn build(docs: &[TokenizedDocument], min_docs: usize, min_total: usize) -> Result<Self> {
        let vocab = super::build_vocabulary(docs, min_docs, min_total)?;
        let dtm = build_dtm(docs, &vocab)?;
        Ok(PreparedCorpus {
            vocab,
            dtm,
            doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
        })
    }

    /// The files written by [`save`](Self::save), in a fixed order.
    pub fn paths(prefix: &Path) -> [PathBuf; 4] {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        [
            with(".vocab.tsv"),
            with(".dtm"),
            with(".docs.tsv"),
            with(".meta.json"),
        ]
    }

    pub fn save(&self, prefix: &Path) -> Result<Vec<PathBuf>> {
        let [vocab_p, dtm_p, docs_p, meta_p] = Self::paths(prefix);
        let write = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| Error::io(p, e));
        write(&vocab_p, &self.vocab.to_tsv())?;
        write(&dtm_p, &self.dtm.to_text())?;
        let mut docs = String::from("doc_id\tlength\n");
        for (id, len) in self.doc_ids.iter().zip(self.dtm.doc_lengths()) {
            let _ = writeln!(docs, "{id}\t{len}");
        }
        write(&docs_p, &docs)?;
        let meta = PrepMeta {
            min_docs: self.vocab.min_doc_threshold,
            min_total: self.vocab.min_total_threshold,
            n_docs: self.dtm.n_docs(),
            n_terms: self.dtm.n_terms(),
            empty_docs: self.dtm.empty_rows().len(),
        };
        write(&meta_p, &(serde_json::to_string_pretty(&meta)? + "\n"))?;
        Ok(vec![vocab_p, dtm_p, docs_p, meta_p])
    }

    pub fn load(prefix: &Path) -> Result<Self> {
        let [vocab_p, dtm_p, docs_p, meta_p] = Self::paths(prefix);
        let read = |p: &Path| {
            if !p.exists() {
                return Err(Error::MissingArtifact(p.to_path_buf()));
            }
            std::fs::read_to_string(p).map_err(|e| Error::io(p, e))
        };
        let meta: PrepMeta = serde_json::from_str(&read(&meta_p)?)?;
        let vocab = Vocabulary::from_tsv(&read(&vocab_p)?, meta.min_docs, meta.min_total, &vocab_p)?;
        let dtm = DocTermMatrix::from_text(&read(&dtm_p)?, &dtm_p)?;
        let doc_ids: Vec<String> = read(&docs_p)?
            .lines()
            .skip(1)
            .filter(|l| !l.is_empty())
            .map(|l| l.split('\t').next().unwrap_or_default().to_string())
            .collect();
        if vocab.len() != dtm.n_terms() || doc_ids.len() != dtm.n_docs() {
            return Err(Error::parse(
                "prepared corpus",
                prefix.display().to_string(),
                "vocabulary, matrix and document list disagree in size",
            ));
        }
        Ok(PreparedCorpus {
            vocab,
            dtm,
            doc_ids,
        })
    }
}
