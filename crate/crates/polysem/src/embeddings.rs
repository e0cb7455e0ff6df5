//! Skip-gram with negative sampling (SGNS) embeddings and similarity
//! queries.
//!
//! Training is single-threaded and bit-reproducible for a fixed seed. The
//! query side works off the input vectors only.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Language, TokenizedDocument, Vocabulary};
use crate::num::Real;

/// Final learning rate is `learning_rate * MIN_LR_FRACTION`.
const MIN_LR_FRACTION: f64 = 1e-4;
/// Unigram distribution exponent for negative sampling.
const NEG_POWER: f64 = 0.75;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub min_count: usize,
    /// Word2vec-style frequent-word subsampling threshold; off by default.
    #[serde(default)]
    pub subsample: Option<f64>,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 15,
            learning_rate: 0.025,
            seed: 42,
            min_count: 2,
            subsample: None,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.dim < 2
            || self.window < 1
            || self.negatives < 1
            || self.epochs < 1
            || self.learning_rate <= 0.0
            || self.min_count < 1
        {
            return Err(EmbeddingError::InvalidConfig(format!(
                "dim≥2, window≥1, negatives≥1, epochs≥1, learning_rate>0, min_count≥1 required, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid SGNS configuration: {0}")]
    InvalidConfig(String),
    #[error("no training documents")]
    EmptyCorpus,
    #[error("word {word:?} not in vocabulary{}", hint.as_ref().map(|h| format!(" (did you mean {h:?}?)")).unwrap_or_default())]
    OutOfVocabulary { word: String, hint: Option<String> },
    #[error("words not in vocabulary: {0:?}")]
    OutOfVocabularyMany(Vec<String>),
    #[error("vector length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("zero-norm vector in cosine similarity")]
    ZeroNorm,
    #[error("matrix dimension mismatch: {a}x{a} vs {b}x{b}")]
    MatrixDimMismatch { a: usize, b: usize },
    #[error("need at least 3 labels to correlate matrices, got {0}")]
    TooFewLabels(usize),
    #[error("zero variance in off-diagonal entries; correlation undefined")]
    ZeroVariance,
    #[error("cannot read model file {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write model file {path}: {source}")]
    Unwritable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file at line {line}: {message}")]
    MalformedModel { line: usize, message: String },
}

/// Row-major |V|×dim matrices; row order follows vocabulary ids.
#[derive(Debug, Clone)]
pub struct EmbeddingModel<R: Real> {
    pub vocabulary: Vocabulary,
    pub input_vectors: Vec<R>,
    pub output_vectors: Vec<R>,
    pub config: SgnsConfig,
    pub language: Language,
}

#[derive(Debug, Clone, Default)]
pub struct TrainStats {
    /// Tokens dropped because they were absent from the vocabulary.
    pub skipped_tokens: u64,
    /// Mean per-pair loss for each epoch.
    pub epoch_mean_loss: Vec<f64>,
    pub positive_pairs: u64,
}

impl<R: Real> EmbeddingModel<R> {
    pub fn input_vector(&self, id: usize) -> &[R] {
        let d = self.config.dim;
        &self.input_vectors[id * d..(id + 1) * d]
    }

    pub fn output_vector(&self, id: usize) -> &[R] {
        let d = self.config.dim;
        &self.output_vectors[id * d..(id + 1) * d]
    }
}

fn sigmoid<R: Real>(x: R) -> R {
    R::one() / (R::one() + (-x).exp())
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Negative-sampling logistic loss over explicit (input word, output word,
/// is_positive) triples. Shared scale reference for the analytic gradients.
pub fn pair_loss<R: Real>(
    input: &[R],
    output: &[R],
    dim: usize,
    pairs: &[(usize, usize, bool)],
) -> R {
    let mut loss = R::zero();
    for &(w, c, positive) in pairs {
        let s = dot(&input[w * dim..(w + 1) * dim], &output[c * dim..(c + 1) * dim]);
        let x = if positive { s } else { -s };
        loss += -(sigmoid(x)).ln();
    }
    loss
}

/// Analytic gradient of [`pair_loss`] with respect to every entry of both
/// matrices. Returns (d_input, d_output) with the same layout.
pub fn pair_gradients<R: Real>(
    input: &[R],
    output: &[R],
    dim: usize,
    pairs: &[(usize, usize, bool)],
) -> (Vec<R>, Vec<R>) {
    let mut d_in = vec![R::zero(); input.len()];
    let mut d_out = vec![R::zero(); output.len()];
    for &(w, c, positive) in pairs {
        let vi = &input[w * dim..(w + 1) * dim];
        let vo = &output[c * dim..(c + 1) * dim];
        let s = sigmoid(dot(vi, vo));
        let label = if positive { R::one() } else { R::zero() };
        let coeff = s - label;
        for j in 0..dim {
            d_in[w * dim + j] += coeff * vo[j];
            d_out[c * dim + j] += coeff * vi[j];
        }
    }
    (d_in, d_out)
}

/// Cumulative unigram^0.75 table; sampling is a binary search over it.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(vocab: &Vocabulary) -> Self {
        let mut cumulative = Vec::with_capacity(vocab.len());
        let mut acc = 0.0;
        for id in 0..vocab.len() {
            acc += (vocab.count(id) as f64).powf(NEG_POWER);
            cumulative.push(acc);
        }
        NegativeTable { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u)
    }
}

pub fn train_sgns<R: Real>(
    docs: &[TokenizedDocument],
    vocab: &Vocabulary,
    config: &SgnsConfig,
    language: Language,
) -> Result<(EmbeddingModel<R>, TrainStats), EmbeddingError> {
    config.validate()?;
    if docs.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let dim = config.dim;
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // word2vec convention: input uniform in [-0.5/dim, 0.5/dim], output zero
    let half = 0.5 / dim as f64;
    let mut input: Vec<R> = (0..v * dim)
        .map(|_| R::from_f64_c(rng.gen::<f64>() * 2.0 * half - half))
        .collect();
    let mut output: Vec<R> = vec![R::zero(); v * dim];

    let mut stats = TrainStats::default();
    let mut id_docs: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut ids = Vec::with_capacity(doc.tokens.len());
        for tok in &doc.tokens {
            match vocab.id(tok) {
                Some(id) => ids.push(id),
                None => stats.skipped_tokens += 1,
            }
        }
        id_docs.push(ids);
    }
    let total_positions: u64 = id_docs.iter().map(|d| d.len() as u64).sum();
    if total_positions == 0 {
        return Err(EmbeddingError::EmptyCorpus);
    }

    let table = NegativeTable::new(vocab);
    let lr0 = config.learning_rate;
    let lr_min = lr0 * MIN_LR_FRACTION;
    let schedule_len = (total_positions * config.epochs as u64).max(1);
    let mut processed: u64 = 0;
    let mut grad_in = vec![R::zero(); dim];

    for _epoch in 0..config.epochs {
        let mut epoch_loss = 0.0f64;
        let mut epoch_pairs = 0u64;
        for ids in &id_docs {
            for (pos, &center) in ids.iter().enumerate() {
                if let Some(t) = config.subsample {
                    let f = vocab.count(center) as f64 / vocab.total_tokens() as f64;
                    let keep = ((t / f).sqrt() + t / f).min(1.0);
                    if rng.gen::<f64>() > keep {
                        processed += 1;
                        continue;
                    }
                }
                let lr_f = lr0 * (1.0 - processed as f64 / schedule_len as f64);
                let lr = R::from_f64_c(lr_f.max(lr_min));
                let b = rng.gen_range(1..=config.window);
                let lo = pos.saturating_sub(b);
                let hi = (pos + b).min(ids.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = ids[ctx_pos];
                    grad_in.iter_mut().for_each(|g| *g = R::zero());
                    let vi_base = center * dim;

                    // positive pair plus sampled negatives; a negative that
                    // collides with the context word is skipped (word2vec)
                    for neg_idx in 0..=config.negatives {
                        let (target, label) = if neg_idx == 0 {
                            (context, R::one())
                        } else {
                            let t = table.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, R::zero())
                        };
                        let vo_base = target * dim;
                        let s = sigmoid(dot(
                            &input[vi_base..vi_base + dim],
                            &output[vo_base..vo_base + dim],
                        ));
                        let x = if neg_idx == 0 { s } else { R::one() - s };
                        epoch_loss += -(x.to_f64_c().max(f64::MIN_POSITIVE)).ln();
                        let coeff = (s - label) * lr;
                        for j in 0..dim {
                            grad_in[j] += coeff * output[vo_base + j];
                            output[vo_base + j] -= coeff * input[vi_base + j];
                        }
                    }
                    for j in 0..dim {
                        input[vi_base + j] -= grad_in[j];
                    }
                    epoch_pairs += 1;
                }
                processed += 1;
            }
        }
        stats.positive_pairs = epoch_pairs;
        stats
            .epoch_mean_loss
            .push(epoch_loss / (epoch_pairs.max(1)) as f64);
    }

    Ok((
        EmbeddingModel {
            vocabulary: vocab.clone(),
            input_vectors: input,
            output_vectors: output,
            config: config.clone(),
            language,
        },
        stats,
    ))
}

/// Cosine of the angle between two vectors, clamped to [-1, 1].
pub fn cosine_similarity<R: Real>(a: &[R], b: &[R]) -> Result<R, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == R::zero() || nb == R::zero() {
        return Err(EmbeddingError::ZeroNorm);
    }
    let cos = dot(a, b) / (na * nb);
    Ok(cos.min(R::one()).max(-R::one()))
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn oov_error(vocab: &Vocabulary, word: &str) -> EmbeddingError {
    let hint = vocab
        .words()
        .map(|w| (levenshtein(word, w), w))
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, w)| w.to_string());
    EmbeddingError::OutOfVocabulary {
        word: word.to_string(),
        hint,
    }
}

/// Top-k neighbors of `word` by cosine over input vectors, query excluded,
/// ties broken by vocabulary id.
pub fn nearest_neighbors<R: Real>(
    model: &EmbeddingModel<R>,
    word: &str,
    k: usize,
) -> Result<Vec<(String, R)>, EmbeddingError> {
    let query_id = model
        .vocabulary
        .id(word)
        .ok_or_else(|| oov_error(&model.vocabulary, word))?;
    let q = model.input_vector(query_id);
    let mut scored: Vec<(usize, R)> = Vec::with_capacity(model.vocabulary.len() - 1);
    for id in 0..model.vocabulary.len() {
        if id == query_id {
            continue;
        }
        let cos = cosine_similarity(q, model.input_vector(id))?;
        scored.push((id, cos));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(id, s)| (model.vocabulary.word(id).to_string(), s))
        .collect())
}

#[derive(Debug, Clone)]
pub struct SimilarityMatrix<R: Real> {
    pub labels: Vec<String>,
    /// Row-major square matrix, symmetric, unit diagonal.
    pub values: Vec<Vec<R>>,
}

pub fn sense_similarity_matrix<R: Real>(
    model: &EmbeddingModel<R>,
    words: &[String],
) -> Result<SimilarityMatrix<R>, EmbeddingError> {
    let missing: Vec<String> = words
        .iter()
        .filter(|w| model.vocabulary.id(w).is_none())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(EmbeddingError::OutOfVocabularyMany(missing));
    }
    let ids: Vec<usize> = words.iter().map(|w| model.vocabulary.id(w).unwrap()).collect();
    let n = ids.len();
    let mut values = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        values[i][i] = R::one();
        for j in (i + 1)..n {
            let cos = cosine_similarity(model.input_vector(ids[i]), model.input_vector(ids[j]))?;
            values[i][j] = cos;
            values[j][i] = cos;
        }
    }
    Ok(SimilarityMatrix {
        labels: words.to_vec(),
        values,
    })
}

/// Pearson correlation of the strict upper triangles of two equally-sized
/// similarity matrices.
pub fn compare_matrices<R: Real>(
    a: &SimilarityMatrix<R>,
    b: &SimilarityMatrix<R>,
) -> Result<R, EmbeddingError> {
    if a.labels.len() != b.labels.len() {
        return Err(EmbeddingError::MatrixDimMismatch {
            a: a.labels.len(),
            b: b.labels.len(),
        });
    }
    let n = a.labels.len();
    if n < 3 {
        return Err(EmbeddingError::TooFewLabels(n));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            xs.push(a.values[i][j]);
            ys.push(b.values[i][j]);
        }
    }
    let m = R::from_usize(xs.len()).unwrap();
    let mx = xs.iter().copied().sum::<R>() / m;
    let my = ys.iter().copied().sum::<R>() / m;
    let mut sxx = R::zero();
    let mut syy = R::zero();
    let mut sxy = R::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == R::zero() || syy == R::zero() {
        return Err(EmbeddingError::ZeroVariance);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.min(R::one()).max(-R::one()))
}

/// word2vec text format: first line "<V> <dim>", then one word per line with
/// space-separated components in vocabulary id order.
pub fn export_word2vec_text<R: Real>(
    model: &EmbeddingModel<R>,
    path: &Path,
) -> Result<(), EmbeddingError> {
    let file = fs::File::create(path).map_err(|source| EmbeddingError::Unwritable {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<fs::File>, model: &EmbeddingModel<R>| -> std::io::Result<()> {
        writeln!(w, "{} {}", model.vocabulary.len(), model.config.dim)?;
        for id in 0..model.vocabulary.len() {
            write!(w, "{}", model.vocabulary.word(id))?;
            for x in model.input_vector(id) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    };
    write(&mut w, model).map_err(|source| EmbeddingError::Unwritable {
        path: path.display().to_string(),
        source,
    })
}

/// Import a word2vec text file. The returned model carries placeholder
/// counts and zeroed output vectors; it supports queries, not resumption.
pub fn import_word2vec_text<R: Real>(
    path: &Path,
    language: Language,
) -> Result<EmbeddingModel<R>, EmbeddingError> {
    let content = fs::read_to_string(path).map_err(|source| EmbeddingError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(EmbeddingError::MalformedModel {
        line: 1,
        message: "empty file".into(),
    })?;
    let mut parts = header.split_whitespace();
    let parse_usize = |s: Option<&str>, line: usize| -> Result<usize, EmbeddingError> {
        s.and_then(|t| t.parse().ok())
            .ok_or(EmbeddingError::MalformedModel {
                line,
                message: "expected \"<V> <dim>\" header".into(),
            })
    };
    let v = parse_usize(parts.next(), 1)?;
    let dim = parse_usize(parts.next(), 1)?;
    let mut words = Vec::with_capacity(v);
    let mut input = Vec::with_capacity(v * dim);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().ok_or(EmbeddingError::MalformedModel {
            line: lineno,
            message: "missing word".into(),
        })?;
        words.push(word.to_string());
        let mut count = 0;
        for f in fields {
            let x: f64 = f.parse().map_err(|_| EmbeddingError::MalformedModel {
                line: lineno,
                message: format!("bad float {f:?}"),
            })?;
            input.push(R::from_f64_c(x));
            count += 1;
        }
        if count != dim {
            return Err(EmbeddingError::MalformedModel {
                line: lineno,
                message: format!("expected {dim} components, got {count}"),
            });
        }
    }
    if words.len() != v {
        return Err(EmbeddingError::MalformedModel {
            line: 1,
            message: format!("header declared {v} words, file has {}", words.len()),
        });
    }
    let vocabulary = Vocabulary::from_ordered_words(words);
    let config = SgnsConfig {
        dim,
        ..SgnsConfig::default()
    };
    Ok(EmbeddingModel {
        output_vectors: vec![R::zero(); v * dim],
        input_vectors: input,
        vocabulary,
        config,
        language,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;

    fn doc(words: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: "d".into(),
            language: Language::UrduRoman,
            tokens: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    #[test]
    fn cosine_identity_is_one() {
        let v = [1.0, 2.0, -3.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0f64).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal_is_zero() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn cosine_hand_value() {
        let c: f64 = cosine_similarity(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((c - 0.974632).abs() < 1e-6);
    }

    #[test]
    fn cosine_zero_norm_errors() {
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]),
            Err(EmbeddingError::ZeroNorm)
        ));
    }

    #[test]
    fn cosine_length_mismatch_errors() {
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(EmbeddingError::LengthMismatch { a: 1, b: 2 })
        ));
    }

    fn tiny_config() -> SgnsConfig {
        SgnsConfig {
            dim: 8,
            window: 2,
            negatives: 3,
            epochs: 5,
            learning_rate: 0.05,
            seed: 7,
            min_count: 1,
            subsample: None,
        }
    }

    #[test]
    fn training_is_deterministic() {
        let docs = vec![doc(&["a", "b", "c", "a", "b"]), doc(&["c", "a", "b"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let cfg = tiny_config();
        let (m1, _) = train_sgns::<f64>(&docs, &vocab, &cfg, Language::UrduRoman).unwrap();
        let (m2, _) = train_sgns::<f64>(&docs, &vocab, &cfg, Language::UrduRoman).unwrap();
        assert_eq!(m1.input_vectors, m2.input_vectors);
        assert_eq!(m1.output_vectors, m2.output_vectors);
    }

    #[test]
    fn training_skips_and_counts_oov_tokens() {
        let train_docs = vec![doc(&["a", "b", "a", "b"])];
        let vocab = build_vocabulary(&train_docs, 1).unwrap();
        let with_oov = vec![doc(&["a", "zzz", "b", "qqq", "a", "b"])];
        let (_, stats) =
            train_sgns::<f64>(&with_oov, &vocab, &tiny_config(), Language::UrduRoman).unwrap();
        assert_eq!(stats.skipped_tokens, 2);
    }

    #[test]
    fn loss_decreases_over_epochs() {
        // repeated pattern gives well over 100 positive pairs
        let docs: Vec<_> = (0..30).map(|_| doc(&["a", "b", "c", "d", "e"])).collect();
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let cfg = SgnsConfig {
            epochs: 10,
            ..tiny_config()
        };
        let (_, stats) = train_sgns::<f64>(&docs, &vocab, &cfg, Language::UrduRoman).unwrap();
        assert!(stats.positive_pairs >= 100);
        assert!(
            stats.epoch_mean_loss.last().unwrap() < stats.epoch_mean_loss.first().unwrap(),
            "loss did not decrease: {:?}",
            stats.epoch_mean_loss
        );
    }

    #[test]
    fn planted_cooccurrence_separates_pairs() {
        let mut docs = Vec::new();
        for _ in 0..50 {
            docs.push(doc(&["a", "b"]));
            docs.push(doc(&["x", "y"]));
        }
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let cfg = SgnsConfig {
            dim: 10,
            window: 2,
            negatives: 5,
            epochs: 200,
            learning_rate: 0.05,
            seed: 3,
            min_count: 1,
            subsample: None,
        };
        let (model, _) = train_sgns::<f64>(&docs, &vocab, &cfg, Language::UrduRoman).unwrap();
        let ia = vocab.id("a").unwrap();
        let ib = vocab.id("b").unwrap();
        let ix = vocab.id("x").unwrap();
        let cab = cosine_similarity(model.input_vector(ia), model.input_vector(ib)).unwrap();
        let cax = cosine_similarity(model.input_vector(ia), model.input_vector(ix)).unwrap();
        assert!(cab > cax, "cos(a,b)={cab} not above cos(a,x)={cax}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let dim = 3;
        let input: Vec<f64> = vec![0.1, -0.2, 0.3, 0.05, 0.4, -0.1];
        let output: Vec<f64> = vec![0.2, 0.1, -0.3, -0.15, 0.25, 0.35];
        let pairs = vec![(0, 1, true), (0, 0, false), (1, 0, true), (1, 1, false)];
        let (d_in, d_out) = pair_gradients(&input, &output, dim, &pairs);
        let h = 1e-5;
        let mut max_rel = 0.0f64;
        for p in 0..input.len() + output.len() {
            let mut plus_in = input.clone();
            let mut plus_out = output.clone();
            let mut minus_in = input.clone();
            let mut minus_out = output.clone();
            if p < input.len() {
                plus_in[p] += h;
                minus_in[p] -= h;
            } else {
                plus_out[p - input.len()] += h;
                minus_out[p - input.len()] -= h;
            }
            let fd = (pair_loss(&plus_in, &plus_out, dim, &pairs)
                - pair_loss(&minus_in, &minus_out, dim, &pairs))
                / (2.0 * h);
            let analytic = if p < input.len() {
                d_in[p]
            } else {
                d_out[p - input.len()]
            };
            let denom = analytic.abs().max(fd.abs()).max(1e-8);
            max_rel = max_rel.max((analytic - fd).abs() / denom);
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    fn identical_vec_model() -> EmbeddingModel<f64> {
        let docs = vec![doc(&["a", "b"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        EmbeddingModel {
            vocabulary: vocab,
            input_vectors: vec![1.0, 2.0, 1.0, 2.0],
            output_vectors: vec![0.0; 4],
            config: SgnsConfig {
                dim: 2,
                ..SgnsConfig::default()
            },
            language: Language::UrduRoman,
        }
    }

    #[test]
    fn neighbors_identical_vectors() {
        let model = identical_vec_model();
        let nn = nearest_neighbors(&model, "a", 1).unwrap();
        assert_eq!(nn.len(), 1);
        assert_eq!(nn[0].0, "b");
        assert!((nn[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn neighbors_oov_carries_spelling_hint() {
        let model = identical_vec_model();
        match nearest_neighbors(&model, "aa", 1) {
            Err(EmbeddingError::OutOfVocabulary { word, hint }) => {
                assert_eq!(word, "aa");
                assert_eq!(hint.as_deref(), Some("a"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neighbors_never_return_query_and_scores_sorted() {
        let docs = vec![doc(&["a", "b", "c", "d", "a", "c"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let (model, _) =
            train_sgns::<f64>(&docs, &vocab, &tiny_config(), Language::UrduRoman).unwrap();
        let nn = nearest_neighbors(&model, "a", 10).unwrap();
        assert!(nn.iter().all(|(w, _)| w != "a"));
        assert!(nn.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn similarity_matrix_single_word() {
        let model = identical_vec_model();
        let m = sense_similarity_matrix(&model, &["a".to_string()]).unwrap();
        assert_eq!(m.values, vec![vec![1.0]]);
    }

    #[test]
    fn similarity_matrix_orthogonal_off_diagonal_zero() {
        let mut model = identical_vec_model();
        model.input_vectors = vec![1.0, 0.0, 0.0, 1.0];
        let m = sense_similarity_matrix(&model, &["a".to_string(), "b".to_string()]).unwrap();
        assert_eq!(m.values[0][1], 0.0);
        assert_eq!(m.values[1][0], 0.0);
        assert_eq!(m.values[0][0], 1.0);
    }

    #[test]
    fn similarity_matrix_matches_scalar_op() {
        let docs = vec![doc(&["a", "b", "c", "b", "a", "c"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let (model, _) =
            train_sgns::<f64>(&docs, &vocab, &tiny_config(), Language::UrduRoman).unwrap();
        let words: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let m = sense_similarity_matrix(&model, &words).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let direct = cosine_similarity(
                    model.input_vector(vocab.id(&words[i]).unwrap()),
                    model.input_vector(vocab.id(&words[j]).unwrap()),
                )
                .unwrap();
                assert!((m.values[i][j] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn similarity_matrix_lists_all_oov_words() {
        let model = identical_vec_model();
        match sense_similarity_matrix(&model, &["a".into(), "zz".into(), "qq".into()]) {
            Err(EmbeddingError::OutOfVocabularyMany(missing)) => {
                assert_eq!(missing, vec!["zz".to_string(), "qq".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn sim(labels: &[&str], upper: &[f64]) -> SimilarityMatrix<f64> {
        let n = labels.len();
        let mut values = vec![vec![0.0; n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            values[i][i] = 1.0;
            for j in (i + 1)..n {
                let v = *it.next().unwrap();
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        SimilarityMatrix {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            values,
        }
    }

    #[test]
    fn compare_matrices_self_is_one() {
        let m = sim(&["a", "b", "c"], &[0.1, 0.5, -0.2]);
        assert!((compare_matrices(&m, &m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compare_matrices_anticorrelated() {
        let a = sim(&["a", "b", "c"], &[0.1, 0.2, 0.3]);
        let b = sim(&["a", "b", "c"], &[-0.1, -0.2, -0.3]);
        assert!((compare_matrices(&a, &b).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn compare_matrices_matches_pearson_oracle() {
        let a = sim(&["a", "b", "c", "d"], &[0.3, -0.1, 0.7, 0.2, -0.5, 0.05]);
        let b = sim(&["a", "b", "c", "d"], &[0.1, 0.4, -0.6, 0.9, 0.0, -0.2]);
        let xs = [0.3, -0.1, 0.7, 0.2, -0.5, 0.05];
        let ys = [0.1, 0.4, -0.6, 0.9, 0.0, -0.2];
        let n = xs.len() as f64;
        let mx: f64 = xs.iter().sum::<f64>() / n;
        let my: f64 = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
        let expected = sxy / (sxx * syy).sqrt();
        assert!((compare_matrices(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn compare_matrices_rejects_small_and_constant() {
        let a = sim(&["a", "b"], &[0.1]);
        assert!(matches!(
            compare_matrices(&a, &a),
            Err(EmbeddingError::TooFewLabels(2))
        ));
        let c = sim(&["a", "b", "c"], &[0.5, 0.5, 0.5]);
        assert!(matches!(
            compare_matrices(&c, &c),
            Err(EmbeddingError::ZeroVariance)
        ));
    }

    #[test]
    fn word2vec_text_round_trip() {
        let docs = vec![doc(&["a", "b", "c", "a"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let (model, _) =
            train_sgns::<f64>(&docs, &vocab, &tiny_config(), Language::UrduRoman).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.vec");
        let p2 = dir.path().join("m2.vec");
        export_word2vec_text(&model, &p1).unwrap();
        let imported = import_word2vec_text::<f64>(&p1, Language::UrduRoman).unwrap();
        export_word2vec_text(&imported, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("ishq", "ishq"), 0);
        assert_eq!(levenshtein("pyar", "pyaar"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
    }
}
