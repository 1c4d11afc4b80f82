//! Article and profile ingestion from a Forem-style REST API.

mod crawl;
mod lang;
mod markup;
mod transport;

use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crawl::{CrawlConfig, CrawlOutcome, CrawlStats, Crawler};
pub use lang::{detect_language, LanguageDetector, TrigramDetector, TrigramProfile, UNDETERMINED};
pub use markup::strip_markup;
pub use transport::{FixtureTransport, HttpTransport, Response, Transport, TransportError};

/// One forum post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub url: String,
    pub title: String,
    pub body_html: String,
    pub tags: Vec<String>,
    pub author_username: String,
    pub published_at: DateTime<Utc>,
    pub word_count: usize,
    pub language: String,
}

impl Article {
    /// Build an article, deriving `word_count` and `language` from the
    /// stripped body and normalising tags to unique lowercase strings.
    pub fn new(
        id: impl Into<String>,
        url: impl Into<String>,
        title: impl Into<String>,
        body_html: impl Into<String>,
        tags: impl IntoIterator<Item = impl AsRef<str>>,
        author_username: impl Into<String>,
        published_at: DateTime<Utc>,
    ) -> Self {
        let body_html = body_html.into();
        let text = strip_markup(&body_html);
        let mut seen = HashSet::new();
        let tags = tags
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .collect();
        Article {
            id: id.into(),
            url: url.into(),
            title: title.into(),
            word_count: text.split_whitespace().count(),
            language: detect_language(&text),
            body_html,
            tags,
            author_username: author_username.into(),
            published_at,
        }
    }

    /// Plain text of the body.
    pub fn text(&self) -> String {
        strip_markup(&self.body_html)
    }
}

/// A user profile payload as fetched, before parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawUserProfile {
    pub username: String,
    pub profile_html_or_json: String,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub source: String,
    pub articles_fetched: usize,
    pub articles_after_dedup: usize,
    pub articles_after_language_filter: usize,
    pub created_at: DateTime<Utc>,
}

/// Keep the first article for each exact `(url, title)` pair.
pub fn dedupe_articles(articles: Vec<Article>) -> Vec<Article> {
    let mut seen: HashSet<(String, String)> = HashSet::with_capacity(articles.len());
    articles
        .into_iter()
        .filter(|a| seen.insert((a.url.clone(), a.title.clone())))
        .collect()
}

/// Deduplicate and keep articles in `language`, recording the counts.
pub fn filter_corpus(
    fetched: Vec<Article>,
    language: &str,
    source: &str,
    created_at: DateTime<Utc>,
) -> (Vec<Article>, CorpusManifest) {
    let articles_fetched = fetched.len();
    let deduped = dedupe_articles(fetched);
    let articles_after_dedup = deduped.len();
    let kept: Vec<Article> = deduped
        .into_iter()
        .filter(|a| a.language == language)
        .collect();
    let manifest = CorpusManifest {
        source: source.to_string(),
        articles_fetched,
        articles_after_dedup,
        articles_after_language_filter: kept.len(),
        created_at,
    };
    (kept, manifest)
}

/// Write records as JSON lines.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read JSON lines, skipping blank lines.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            Error::parse("json line", format!("{}:{}", path.display(), i + 1), e)
        })?;
        records.push(record);
    }
    Ok(records)
}
