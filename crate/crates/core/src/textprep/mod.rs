//! Tokenisation, stemming and bigram document-term matrices.

mod dtm;
mod stopwords;
mod vocab;

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

pub use dtm::{build_dtm, DocTermMatrix, PreparedCorpus};
pub use stopwords::{is_stopword, STOPWORDS_EN};
pub use vocab::{build_vocabulary, Vocabulary};

/// Default trim: a bigram must occur in this many documents...
pub const DEFAULT_MIN_DOCS: usize = 90;
/// ...and this many times overall.
pub const DEFAULT_MIN_TOTAL: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub stems: Vec<String>,
    pub bigrams: Vec<String>,
}

impl TokenizedDocument {
    /// Normalise, stem and pair up `text`.
    pub fn from_text(doc_id: impl Into<String>, text: &str) -> Self {
        let stems: Vec<String> = normalize_tokens(text).iter().map(|t| stem(t)).collect();
        let bigrams = make_bigrams(&stems);
        TokenizedDocument {
            doc_id: doc_id.into(),
            stems,
            bigrams,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '\''
}

/// Lowercase word tokens with punctuation, pure numbers and stopwords removed.
///
/// Hyphens and apostrophes survive inside a word (`pixel-perfect`, `don't`);
/// every other non-alphanumeric character separates tokens.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !is_word_char(c) && !matches!(c, '’' | '‘'))
        .map(|piece| piece.replace(['’', '‘'], "'"))
        .map(|piece| {
            piece
                .trim_matches(|c: char| c == '-' || c == '\'')
                .to_lowercase()
        })
        .filter(|t| t.chars().any(char::is_alphabetic))
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Snowball English (Porter2) stem of a lowercase token.
pub fn stem(token: &str) -> String {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER
        .get_or_init(|| Stemmer::create(Algorithm::English))
        .stem(token)
        .into_owned()
}

/// Adjacent pairs joined with `_`.
pub fn make_bigrams(stems: &[String]) -> Vec<String> {
    stems.windows(2).map(|w| format!("{}_{}", w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_tokens("Working from home, 100% better!"),
            ["working", "home", "better"]
        );
        assert_eq!(normalize_tokens("Use S3 buckets"), ["use", "s3", "buckets"]);
        assert!(normalize_tokens("").is_empty());
    }

    #[test]
    fn normalize_punctuation_rules() {
        assert_eq!(normalize_tokens("node.js rocks"), ["node", "js", "rocks"]);
        assert_eq!(normalize_tokens("pixel-perfect -- video"), ["pixel-perfect", "video"]);
        assert_eq!(normalize_tokens("I don’t care, it's 3.14"), ["care"]);
        assert_eq!(normalize_tokens("(quoted) 'words'"), ["quoted", "words"]);
        assert_eq!(normalize_tokens("2020-01-01 e3"), ["e3"]);
    }

    #[test]
    fn stem_examples() {
        assert_eq!(stem("developers"), "develop");
        assert_eq!(stem("a"), "a");
        assert_eq!(stem("languages"), "languag");
    }

    #[test]
    fn bigram_examples() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(make_bigrams(&s(&["work", "home", "help"])), ["work_home", "home_help"]);
        assert!(make_bigrams(&s(&["solo"])).is_empty());
        assert!(make_bigrams(&[]).is_empty());
    }

    #[test]
    fn working_from_home_is_work_home() {
        let doc = TokenizedDocument::from_text("d", "working from home");
        assert_eq!(doc.bigrams, ["work_home"]);
    }

    proptest! {
        #[test]
        fn bigram_count_and_shape(text in "[a-zA-Z0-9 ,.!'-]{0,200}") {
            let doc = TokenizedDocument::from_text("d", &text);
            prop_assert_eq!(doc.bigrams.len(), doc.stems.len().saturating_sub(1));
            for (i, b) in doc.bigrams.iter().enumerate() {
                prop_assert!(!b.contains(char::is_whitespace));
                prop_assert_eq!(b, &format!("{}_{}", doc.stems[i], doc.stems[i + 1]));
            }
        }
    }
}
