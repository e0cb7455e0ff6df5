//! Corpus ingestion: loading, normalization, tokenization, stopword
//! filtering, and vocabulary construction.
//!
//! A document is one line-group (a couplet or stanza): one JSONL record or
//! one non-blank line of a plain-text corpus.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "ur-Latn")]
    UrduRoman,
    #[serde(rename = "en")]
    English,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::UrduRoman => "ur-Latn",
            Language::English => "en",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, CorpusError> {
        match s {
            "ur-Latn" | "ur" => Ok(Language::UrduRoman),
            "en" => Ok(Language::English),
            other => Err(CorpusError::UnknownLanguage(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    #[serde(rename = "lang")]
    pub language: Language,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: Language,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    PlainLines,
}

#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    /// Characters kept when they appear inside a token but stripped at its
    /// edges are everything non-alphanumeric; interior apostrophes and
    /// hyphens survive so contractions and Romanized spellings stay whole.
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { lowercase: true }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSONL record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("duplicate document id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },
    #[error("document {id:?} has empty text")]
    EmptyText { id: String },
    #[error("unknown language code {0:?} (expected \"ur-Latn\" or \"en\")")]
    UnknownLanguage(String),
    #[error("stopword list language {stops:?} does not match document language {doc:?}")]
    LanguageMismatch { stops: Language, doc: Language },
    #[error("vocabulary is empty: every word fell below min_count={min_count}")]
    EmptyVocabulary { min_count: usize },
    #[error("no documents provided")]
    NoDocuments,
}

/// Load a corpus file. JSONL records need `id`, `text`, `lang`; plain-text
/// corpora get one document per non-blank line with ids `line-<n>`.
pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    default_language: Language,
) -> Result<Vec<RawDocument>, CorpusError> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut docs = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    match format {
        CorpusFormat::Jsonl => {
            for (idx, line) in content.lines().enumerate() {
                let lineno = idx + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let doc: RawDocument = serde_json::from_str(line).map_err(|e| {
                    CorpusError::MalformedRecord {
                        line: lineno,
                        message: e.to_string(),
                    }
                })?;
                if doc.text.trim().is_empty() {
                    return Err(CorpusError::EmptyText { id: doc.id });
                }
                if !seen.insert(doc.id.clone()) {
                    return Err(CorpusError::DuplicateId {
                        id: doc.id,
                        line: lineno,
                    });
                }
                docs.push(doc);
            }
        }
        CorpusFormat::PlainLines => {
            for (idx, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                docs.push(RawDocument {
                    id: format!("line-{}", idx + 1),
                    text: line.to_string(),
                    language: default_language,
                    source: String::new(),
                });
            }
        }
    }
    Ok(docs)
}

/// Normalize one token: NFC, optional lowercasing, edge punctuation stripped.
/// Returns None when nothing survives.
pub fn normalize_token(raw: &str, config: &TokenizerConfig) -> Option<String> {
    let nfc: String = raw.nfc().collect();
    let cased = if config.lowercase {
        nfc.to_lowercase()
    } else {
        nfc
    };
    let trimmed = cased.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_string())
    }
}

pub fn tokenize(doc: &RawDocument, config: &TokenizerConfig) -> TokenizedDocument {
    let tokens = doc
        .text
        .split_whitespace()
        .filter_map(|t| normalize_token(t, config))
        .collect();
    TokenizedDocument {
        id: doc.id.clone(),
        language: doc.language,
        tokens,
    }
}

#[derive(Debug, Clone)]
pub struct StopwordList {
    pub words: HashSet<String>,
    pub language: Language,
}

impl StopwordList {
    pub fn new<I: IntoIterator<Item = String>>(words: I, language: Language) -> Self {
        let config = TokenizerConfig::default();
        let words = words
            .into_iter()
            .filter_map(|w| normalize_token(&w, &config))
            .collect();
        StopwordList { words, language }
    }

    /// One word per line, `#` comments ignored.
    pub fn load(path: &Path, language: Language) -> Result<Self, CorpusError> {
        let content = fs::read_to_string(path).map_err(|source| CorpusError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        let words = content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string);
        Ok(StopwordList::new(words, language))
    }
}

pub fn filter_stopwords(
    doc: &TokenizedDocument,
    stops: &StopwordList,
) -> Result<TokenizedDocument, CorpusError> {
    if stops.language != doc.language {
        return Err(CorpusError::LanguageMismatch {
            stops: stops.language,
            doc: doc.language,
        });
    }
    Ok(TokenizedDocument {
        id: doc.id.clone(),
        language: doc.language,
        tokens: doc
            .tokens
            .iter()
            .filter(|t| !stops.words.contains(*t))
            .cloned()
            .collect(),
    })
}

/// Serialized as id-ordered word and count lists so the JSON is stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularySerde", into = "VocabularySerde")]
pub struct Vocabulary {
    word_to_id: HashMap<String, usize>,
    id_to_word: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabularySerde {
    words: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
}

impl From<Vocabulary> for VocabularySerde {
    fn from(v: Vocabulary) -> Self {
        VocabularySerde {
            words: v.id_to_word,
            counts: v.counts,
            total_tokens: v.total_tokens,
        }
    }
}

impl From<VocabularySerde> for Vocabulary {
    fn from(s: VocabularySerde) -> Self {
        let word_to_id = s
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary {
            word_to_id,
            id_to_word: s.words,
            counts: s.counts,
            total_tokens: s.total_tokens,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_word.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.word_to_id.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.id_to_word[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.id_to_word.iter().map(String::as_str)
    }

    /// Rebuild a vocabulary from an explicit id-ordered word list (used when
    /// importing a model file). Counts are unknown and set to 1.
    pub fn from_ordered_words(words: Vec<String>) -> Self {
        let word_to_id = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let n = words.len() as u64;
        Vocabulary {
            word_to_id,
            counts: vec![1; words.len()],
            id_to_word: words,
            total_tokens: n,
        }
    }
}

/// Ids are assigned by descending frequency, ties broken lexicographically,
/// so the same corpus always yields the same table.
pub fn build_vocabulary(
    docs: &[TokenizedDocument],
    min_count: usize,
) -> Result<Vocabulary, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::NoDocuments);
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for tok in &doc.tokens {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    let mut retained: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count as u64)
        .collect();
    if retained.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_count });
    }
    retained.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut word_to_id = HashMap::with_capacity(retained.len());
    let mut id_to_word = Vec::with_capacity(retained.len());
    let mut counts = Vec::with_capacity(retained.len());
    let mut total = 0u64;
    for (id, (word, count)) in retained.into_iter().enumerate() {
        word_to_id.insert(word.to_string(), id);
        id_to_word.push(word.to_string());
        counts.push(count);
        total += count;
    }
    Ok(Vocabulary {
        word_to_id,
        id_to_word,
        counts,
        total_tokens: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn raw(text: &str) -> RawDocument {
        RawDocument {
            id: "d".into(),
            text: text.into(),
            language: Language::UrduRoman,
            source: String::new(),
        }
    }

    #[test]
    fn tokenize_strips_edge_punctuation_and_lowercases() {
        let doc = tokenize(&raw("Dil, Muhabbat ki nazar!"), &TokenizerConfig::default());
        assert_eq!(doc.tokens, vec!["dil", "muhabbat", "ki", "nazar"]);
    }

    #[test]
    fn tokenize_whitespace_only_is_empty() {
        let doc = tokenize(&raw("  "), &TokenizerConfig::default());
        assert!(doc.tokens.is_empty());
    }

    #[test]
    fn tokenize_lowercases_english() {
        let mut d = raw("Thou art LOVE");
        d.language = Language::English;
        let doc = tokenize(&d, &TokenizerConfig::default());
        assert_eq!(doc.tokens, vec!["thou", "art", "love"]);
    }

    #[test]
    fn tokenize_keeps_interior_apostrophes_and_hyphens() {
        let doc = tokenize(&raw("don't well-met 'quoted'"), &TokenizerConfig::default());
        assert_eq!(doc.tokens, vec!["don't", "well-met", "quoted"]);
    }

    #[test]
    fn stopword_filter_removes_and_preserves_order() {
        let mut d = raw("x");
        d.language = Language::English;
        let doc = TokenizedDocument {
            id: "d".into(),
            language: Language::English,
            tokens: vec!["thou".into(), "art".into(), "love".into()],
        };
        let stops = StopwordList::new(
            ["thou".to_string(), "art".to_string()],
            Language::English,
        );
        let out = filter_stopwords(&doc, &stops).unwrap();
        assert_eq!(out.tokens, vec!["love"]);
        let _ = d;
    }

    #[test]
    fn stopword_filter_empty_list_is_identity() {
        let doc = TokenizedDocument {
            id: "d".into(),
            language: Language::English,
            tokens: vec!["a".into(), "b".into()],
        };
        let stops = StopwordList::new(std::iter::empty(), Language::English);
        assert_eq!(filter_stopwords(&doc, &stops).unwrap(), doc);
    }

    #[test]
    fn stopword_filter_can_empty_document() {
        let doc = TokenizedDocument {
            id: "d".into(),
            language: Language::UrduRoman,
            tokens: vec!["ki".into(), "ke".into()],
        };
        let stops = StopwordList::new(["ki".to_string(), "ke".to_string()], Language::UrduRoman);
        assert!(filter_stopwords(&doc, &stops).unwrap().tokens.is_empty());
    }

    #[test]
    fn stopword_filter_rejects_language_mismatch() {
        let doc = TokenizedDocument {
            id: "d".into(),
            language: Language::UrduRoman,
            tokens: vec!["a".into()],
        };
        let stops = StopwordList::new(std::iter::empty(), Language::English);
        assert!(matches!(
            filter_stopwords(&doc, &stops),
            Err(CorpusError::LanguageMismatch { .. })
        ));
    }

    fn toks(id: &str, words: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: id.into(),
            language: Language::UrduRoman,
            tokens: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    #[test]
    fn vocabulary_applies_min_count() {
        let v = build_vocabulary(&[toks("d", &["a", "a", "b"])], 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.word(0), "a");
        assert_eq!(v.count(0), 2);
        assert_eq!(v.total_tokens(), 2);
        assert!(v.id("b").is_none());
    }

    #[test]
    fn vocabulary_tie_break_is_lexicographic() {
        let v = build_vocabulary(&[toks("d", &["b", "a"])], 1).unwrap();
        assert_eq!(v.word(0), "a");
        assert_eq!(v.word(1), "b");
    }

    #[test]
    fn vocabulary_empty_is_error() {
        let err = build_vocabulary(&[toks("d", &["x"])], 5).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyVocabulary { min_count: 5 }));
    }

    #[test]
    fn vocabulary_bijection() {
        let v = build_vocabulary(&[toks("d", &["a", "b", "c", "b"])], 1).unwrap();
        for w in ["a", "b", "c"] {
            assert_eq!(v.word(v.id(w).unwrap()), w);
        }
    }

    #[test]
    fn vocabulary_order_insensitive() {
        let d1 = toks("1", &["a", "b", "b"]);
        let d2 = toks("2", &["c", "a"]);
        let v1 = build_vocabulary(&[d1.clone(), d2.clone()], 1).unwrap();
        let v2 = build_vocabulary(&[d2, d1], 1).unwrap();
        assert_eq!(
            v1.words().collect::<Vec<_>>(),
            v2.words().collect::<Vec<_>>()
        );
    }

    #[test]
    fn load_jsonl_corpus() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"a","text":"dil","lang":"ur-Latn"}}"#).unwrap();
        writeln!(f, r#"{{"id":"b","text":"jaan","lang":"ur-Latn"}}"#).unwrap();
        let docs = load_corpus(f.path(), CorpusFormat::Jsonl, Language::UrduRoman).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "a");
        assert_eq!(docs[1].text, "jaan");
    }

    #[test]
    fn load_plain_lines_skips_blanks() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a\n\nb\n").unwrap();
        let docs = load_corpus(f.path(), CorpusFormat::PlainLines, Language::English).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "a");
        assert_eq!(docs[1].text, "b");
        assert_eq!(docs[0].id, "line-1");
        assert_eq!(docs[1].id, "line-3");
    }

    #[test]
    fn load_jsonl_missing_text_names_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"a","text":"ok","lang":"en"}}"#).unwrap();
        writeln!(f, r#"{{"id":"b","lang":"en"}}"#).unwrap();
        let err = load_corpus(f.path(), CorpusFormat::Jsonl, Language::English).unwrap_err();
        match err {
            CorpusError::MalformedRecord { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_jsonl_duplicate_id() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"a","text":"x","lang":"en"}}"#).unwrap();
        writeln!(f, r#"{{"id":"a","text":"y","lang":"en"}}"#).unwrap();
        let err = load_corpus(f.path(), CorpusFormat::Jsonl, Language::English).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { .. }));
    }

    #[test]
    fn stopword_file_ignores_comments() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "# archaic forms\nthou\nthee\n\n").unwrap();
        let stops = StopwordList::load(f.path(), Language::English).unwrap();
        assert_eq!(stops.words.len(), 2);
        assert!(stops.words.contains("thou"));
    }
}
