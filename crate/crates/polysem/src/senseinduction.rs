//! Word sense induction: sense masking, collapsed-Gibbs LDA, topic
//! coherence, topic-count sweeps, and per-topic sense distributions.
//!
//! Documents containing a sense surface form are kept, every surface form
//! is replaced by the reserved "[MASK]" token, and the sense of the first
//! occurrence is preserved as the document label. Topics are then inferred
//! over the surrounding context alone.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{build_vocabulary, Language, TokenizedDocument, Vocabulary};

pub const MASK_TOKEN: &str = "[MASK]";

#[derive(Debug, Error)]
pub enum SenseError {
    #[error("sense inventory invalid: {0}")]
    InvalidInventory(String),
    #[error("cannot read sense inventory {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed sense inventory {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("document {0:?} contains no sense surface form")]
    NoSenseOccurrence(String),
    #[error("k must be ≥ 1, got {0}")]
    InvalidK(usize),
    #[error("alpha and beta must be > 0 (alpha={alpha}, beta={beta})")]
    InvalidPriors { alpha: f64, beta: f64 },
    #[error("no documents with non-mask tokens to fit LDA on")]
    EmptyEffectiveCorpus,
    #[error("topic {topic} out of range for k={k}")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("coherence needs top_n ≥ 2, got {0}")]
    TopNTooSmall(usize),
    #[error("top word {0:?} never occurs in the reference documents")]
    TopWordAbsent(String),
    #[error("k range invalid: need 2 ≤ k_min ≤ k_max, got [{k_min}, {k_max}]")]
    InvalidKRange { k_min: usize, k_max: usize },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sense {
    pub sense_id: String,
    pub surface_forms: Vec<String>,
    #[serde(default)]
    pub gloss: String,
}

/// Ordered sense registry; order defines the LOVE₁/LOVE₂/LOVE₃ numbering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SenseInventory {
    senses: Vec<Sense>,
}

impl SenseInventory {
    pub fn new(senses: Vec<Sense>) -> Result<Self, SenseError> {
        if senses.is_empty() {
            return Err(SenseError::InvalidInventory("no senses defined".into()));
        }
        let mut ids = HashSet::new();
        let mut forms: HashMap<&str, &str> = HashMap::new();
        for sense in &senses {
            if !ids.insert(sense.sense_id.as_str()) {
                return Err(SenseError::InvalidInventory(format!(
                    "duplicate sense id {:?}",
                    sense.sense_id
                )));
            }
            if sense.surface_forms.is_empty() {
                return Err(SenseError::InvalidInventory(format!(
                    "sense {:?} has no surface forms",
                    sense.sense_id
                )));
            }
            for form in &sense.surface_forms {
                if form.is_empty() {
                    return Err(SenseError::InvalidInventory(format!(
                        "sense {:?} has an empty surface form",
                        sense.sense_id
                    )));
                }
                if let Some(owner) = forms.insert(form.as_str(), sense.sense_id.as_str()) {
                    return Err(SenseError::InvalidInventory(format!(
                        "surface form {form:?} claimed by both {owner:?} and {:?}",
                        sense.sense_id
                    )));
                }
            }
        }
        Ok(SenseInventory { senses })
    }

    /// JSON file: ordered array of {"sense_id", "surface_forms", "gloss"}.
    pub fn load(path: &Path) -> Result<Self, SenseError> {
        let content = fs::read_to_string(path).map_err(|source| SenseError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        let senses: Vec<Sense> =
            serde_json::from_str(&content).map_err(|e| SenseError::Malformed {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        SenseInventory::new(senses)
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn sense_ids(&self) -> Vec<String> {
        self.senses.iter().map(|s| s.sense_id.clone()).collect()
    }

    pub fn sense_of_form(&self, token: &str) -> Option<&str> {
        self.senses
            .iter()
            .find(|s| s.surface_forms.iter().any(|f| f == token))
            .map(|s| s.sense_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedDocument {
    pub id: String,
    pub tokens: Vec<String>,
    pub original_sense: String,
    pub mask_positions: Vec<usize>,
}

/// Keep exactly the documents containing at least one sense surface form.
pub fn filter_sense_documents<'a>(
    docs: &'a [TokenizedDocument],
    inventory: &SenseInventory,
) -> Vec<&'a TokenizedDocument> {
    docs.iter()
        .filter(|d| d.tokens.iter().any(|t| inventory.sense_of_form(t).is_some()))
        .collect()
}

/// Replace every sense occurrence with "[MASK]"; the label comes from the
/// first occurrence by token position.
pub fn mask_senses(
    doc: &TokenizedDocument,
    inventory: &SenseInventory,
) -> Result<MaskedDocument, SenseError> {
    let mut tokens = Vec::with_capacity(doc.tokens.len());
    let mut mask_positions = Vec::new();
    let mut original_sense: Option<String> = None;
    for (pos, tok) in doc.tokens.iter().enumerate() {
        if let Some(sense) = inventory.sense_of_form(tok) {
            if original_sense.is_none() {
                original_sense = Some(sense.to_string());
            }
            mask_positions.push(pos);
            tokens.push(MASK_TOKEN.to_string());
        } else {
            tokens.push(tok.clone());
        }
    }
    match original_sense {
        Some(original_sense) => Ok(MaskedDocument {
            id: doc.id.clone(),
            tokens,
            original_sense,
            mask_positions,
        }),
        None => Err(SenseError::NoSenseOccurrence(doc.id.clone())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub vocabulary: Vocabulary,
    /// k×|V| token counts per topic and word.
    pub topic_word_counts: Vec<Vec<u64>>,
    /// n_docs×k token counts per document and topic.
    pub doc_topic_counts: Vec<Vec<u64>>,
    /// Tokens assigned to each topic, Σ_w topic_word_counts[t][w].
    pub topic_totals: Vec<u64>,
    /// Per-document topic assignment of each retained token.
    pub assignments: Vec<Vec<usize>>,
}

impl LdaModel {
    /// Integer bookkeeping invariants of the count tables.
    pub fn validate_counts(&self) -> Result<(), String> {
        for t in 0..self.k {
            let sum: u64 = self.topic_word_counts[t].iter().sum();
            if sum != self.topic_totals[t] {
                return Err(format!(
                    "topic {t}: word counts sum to {sum}, total says {}",
                    self.topic_totals[t]
                ));
            }
        }
        for (d, assigns) in self.assignments.iter().enumerate() {
            let sum: u64 = self.doc_topic_counts[d].iter().sum();
            if sum != assigns.len() as u64 {
                return Err(format!(
                    "doc {d}: topic counts sum to {sum}, doc has {} tokens",
                    assigns.len()
                ));
            }
        }
        let assigned: u64 = self.assignments.iter().map(|a| a.len() as u64).sum();
        let total: u64 = self.topic_totals.iter().sum();
        if assigned != total {
            return Err(format!("{assigned} assignments but {total} counted tokens"));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler over token-topic assignments. One [`sweep`]
/// resamples every token once; [`GibbsSampler::into_model`] freezes the
/// state.
///
/// [`sweep`]: GibbsSampler::sweep
pub struct GibbsSampler {
    model: LdaModel,
    doc_word_ids: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
}

impl GibbsSampler {
    pub fn new(
        docs: &[MaskedDocument],
        k: usize,
        alpha: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self, SenseError> {
        if k < 1 {
            return Err(SenseError::InvalidK(k));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(SenseError::InvalidPriors { alpha, beta });
        }
        // vocabulary over masked docs with the mask token excluded: it
        // appears in every document and carries no discriminative content
        let content_docs: Vec<TokenizedDocument> = docs
            .iter()
            .map(|d| TokenizedDocument {
                id: d.id.clone(),
                language: Language::UrduRoman,
                tokens: d
                    .tokens
                    .iter()
                    .filter(|t| *t != MASK_TOKEN)
                    .cloned()
                    .collect(),
            })
            .collect();
        if content_docs.iter().all(|d| d.tokens.is_empty()) {
            return Err(SenseError::EmptyEffectiveCorpus);
        }
        let vocabulary = build_vocabulary(&content_docs, 1)?;
        let v = vocabulary.len();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut topic_word_counts = vec![vec![0u64; v]; k];
        let mut doc_topic_counts = vec![vec![0u64; k]; docs.len()];
        let mut topic_totals = vec![0u64; k];
        let mut assignments = Vec::with_capacity(docs.len());
        let mut doc_word_ids = Vec::with_capacity(docs.len());
        for (d, doc) in content_docs.iter().enumerate() {
            let ids: Vec<usize> = doc
                .tokens
                .iter()
                .filter_map(|t| vocabulary.id(t))
                .collect();
            let mut doc_assignments = Vec::with_capacity(ids.len());
            for &w in &ids {
                let t = rng.gen_range(0..k);
                topic_word_counts[t][w] += 1;
                doc_topic_counts[d][t] += 1;
                topic_totals[t] += 1;
                doc_assignments.push(t);
            }
            assignments.push(doc_assignments);
            doc_word_ids.push(ids);
        }
        Ok(GibbsSampler {
            model: LdaModel {
                k,
                alpha,
                beta,
                seed,
                vocabulary,
                topic_word_counts,
                doc_topic_counts,
                topic_totals,
                assignments,
            },
            doc_word_ids,
            rng,
        })
    }

    pub fn model(&self) -> &LdaModel {
        &self.model
    }

    /// One full Gibbs sweep: every token resampled from its full
    /// conditional with its own count removed.
    pub fn sweep(&mut self) {
        let m = &mut self.model;
        let k = m.k;
        let v = m.vocabulary.len() as f64;
        let vb = v * m.beta;
        let mut probs = vec![0.0f64; k];
        for d in 0..self.doc_word_ids.len() {
            for (i, &w) in self.doc_word_ids[d].iter().enumerate() {
                let old = m.assignments[d][i];
                m.topic_word_counts[old][w] -= 1;
                m.doc_topic_counts[d][old] -= 1;
                m.topic_totals[old] -= 1;

                let mut acc = 0.0;
                for (t, p) in probs.iter_mut().enumerate() {
                    acc += (m.doc_topic_counts[d][t] as f64 + m.alpha)
                        * (m.topic_word_counts[t][w] as f64 + m.beta)
                        / (m.topic_totals[t] as f64 + vb);
                    *p = acc;
                }
                let u = self.rng.gen::<f64>() * acc;
                let new = probs.partition_point(|&c| c <= u).min(k - 1);

                m.topic_word_counts[new][w] += 1;
                m.doc_topic_counts[d][new] += 1;
                m.topic_totals[new] += 1;
                m.assignments[d][i] = new;
            }
        }
    }

    pub fn into_model(self) -> LdaModel {
        self.model
    }
}

pub fn lda_fit(
    docs: &[MaskedDocument],
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
) -> Result<LdaModel, SenseError> {
    let mut sampler = GibbsSampler::new(docs, k, alpha, beta, seed)?;
    for _ in 0..iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// Top-n words of a topic by smoothed probability (n_kw+β)/(n_k+|V|β),
/// ties broken by vocabulary id.
pub fn topic_top_words(
    model: &LdaModel,
    topic: usize,
    n: usize,
) -> Result<Vec<(String, f64)>, SenseError> {
    if topic >= model.k {
        return Err(SenseError::TopicOutOfRange { topic, k: model.k });
    }
    let v = model.vocabulary.len() as f64;
    let denom = model.topic_totals[topic] as f64 + v * model.beta;
    let mut scored: Vec<(usize, f64)> = model.topic_word_counts[topic]
        .iter()
        .enumerate()
        .map(|(w, &c)| (w, (c as f64 + model.beta) / denom))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored
        .into_iter()
        .map(|(w, p)| (model.vocabulary.word(w).to_string(), p))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoherenceMetric {
    #[serde(rename = "umass")]
    UMass,
    #[serde(rename = "npmi_cosine")]
    NpmiCosine,
}

impl std::str::FromStr for CoherenceMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "umass" => Ok(CoherenceMetric::UMass),
            "npmi_cosine" | "npmi" => Ok(CoherenceMetric::NpmiCosine),
            other => Err(format!("unknown coherence metric {other:?}")),
        }
    }
}

const NPMI_EPS: f64 = 1e-12;

/// Document-frequency tables over the reference documents, mask excluded.
struct CoOccurrence {
    n_docs: usize,
    doc_freq: HashMap<String, u64>,
    joint_freq: HashMap<(String, String), u64>,
}

impl CoOccurrence {
    fn build(docs: &[MaskedDocument], words: &HashSet<&str>) -> Self {
        let mut doc_freq: HashMap<String, u64> = HashMap::new();
        let mut joint_freq: HashMap<(String, String), u64> = HashMap::new();
        for doc in docs {
            let present: Vec<&str> = {
                let set: HashSet<&str> = doc
                    .tokens
                    .iter()
                    .map(String::as_str)
                    .filter(|t| words.contains(t))
                    .collect();
                let mut v: Vec<&str> = set.into_iter().collect();
                v.sort_unstable();
                v
            };
            for (i, &a) in present.iter().enumerate() {
                *doc_freq.entry(a.to_string()).or_insert(0) += 1;
                for &b in &present[i + 1..] {
                    *joint_freq
                        .entry((a.to_string(), b.to_string()))
                        .or_insert(0) += 1;
                }
            }
        }
        CoOccurrence {
            n_docs: docs.len(),
            doc_freq,
            joint_freq,
        }
    }

    fn d(&self, w: &str) -> u64 {
        self.doc_freq.get(w).copied().unwrap_or(0)
    }

    fn d2(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return self.d(a);
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.joint_freq
            .get(&(key.0.to_string(), key.1.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// NPMI of a word pair under document-level co-occurrence. A pair that
/// never co-occurs sits at the ε-smoothing limit, −1.
pub fn npmi(co: u64, da: u64, db: u64, n_docs: usize) -> f64 {
    if co == 0 {
        return -1.0;
    }
    let n = n_docs as f64;
    let p_ab = co as f64 / n;
    let p_a = da as f64 / n;
    let p_b = db as f64 / n;
    let num = (p_ab / (p_a * p_b)).ln();
    let den = (-p_ab.ln()).max(NPMI_EPS);
    (num / den).clamp(-1.0, 1.0)
}

/// Topic coherence against the corpus the model was fitted on.
///
/// UMass: per topic, Σ over ranked pairs of log((D(wᵢ,wⱼ)+1)/D(w_hi)) where
/// w_hi is the higher-ranked word of the pair; mean over topics.
///
/// NpmiCosine: per top word a vector of NPMI values against its topic's top
/// words, topic score = mean pairwise cosine of those vectors, mean over
/// topics. Lands in roughly [0, 1] on natural corpora.
pub fn coherence(
    model: &LdaModel,
    docs: &[MaskedDocument],
    metric: CoherenceMetric,
    top_n: usize,
) -> Result<f64, SenseError> {
    if top_n < 2 {
        return Err(SenseError::TopNTooSmall(top_n));
    }
    let mut topic_words: Vec<Vec<String>> = Vec::with_capacity(model.k);
    for t in 0..model.k {
        topic_words.push(
            topic_top_words(model, t, top_n)?
                .into_iter()
                .map(|(w, _)| w)
                .collect(),
        );
    }
    let all_words: HashSet<&str> = topic_words
        .iter()
        .flatten()
        .map(String::as_str)
        .collect();
    let co = CoOccurrence::build(docs, &all_words);
    for w in &all_words {
        if co.d(w) == 0 {
            return Err(SenseError::TopWordAbsent(w.to_string()));
        }
    }

    let mut topic_scores = Vec::with_capacity(model.k);
    for words in &topic_words {
        let score = match metric {
            CoherenceMetric::UMass => {
                let mut sum = 0.0;
                for i in 0..words.len() {
                    for j in (i + 1)..words.len() {
                        // i is the higher-ranked word of the pair
                        let joint = co.d2(&words[i], &words[j]);
                        sum += ((joint as f64 + 1.0) / co.d(&words[i]) as f64).ln();
                    }
                }
                sum
            }
            CoherenceMetric::NpmiCosine => {
                let n = words.len();
                let vectors: Vec<Vec<f64>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                if i == j {
                                    1.0
                                } else {
                                    npmi(
                                        co.d2(&words[i], &words[j]),
                                        co.d(&words[i]),
                                        co.d(&words[j]),
                                        co.n_docs,
                                    )
                                }
                            })
                            .collect()
                    })
                    .collect();
                let mut sum = 0.0;
                let mut pairs = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                        let na: f64 = vectors[i].iter().map(|x| x * x).sum::<f64>().sqrt();
                        let nb: f64 = vectors[j].iter().map(|x| x * x).sum::<f64>().sqrt();
                        sum += dot / (na * nb).max(NPMI_EPS);
                        pairs += 1;
                    }
                }
                sum / pairs.max(1) as f64
            }
        };
        topic_scores.push(score);
    }
    Ok(topic_scores.iter().sum::<f64>() / topic_scores.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub rows: Vec<(usize, f64)>,
    pub best_k: usize,
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    /// None means the 50/k heuristic per fitted k.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub top_n: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            alpha: None,
            beta: 0.01,
            iterations: 500,
            top_n: 10,
        }
    }
}

pub fn default_alpha(k: usize) -> f64 {
    50.0 / k as f64
}

/// Deterministic per-(k, restart) seed for sweep fits.
pub fn sweep_seed(master: u64, k: usize, restart: usize) -> u64 {
    // splitmix-style mix so (k, restart) pairs land on distant streams
    let mut z = master
        .wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((restart as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fit each k in [k_min, k_max] with `restarts` derived seeds, keep the
/// best coherence per k; best_k is the argmax (smallest k on ties).
pub fn coherence_sweep(
    docs: &[MaskedDocument],
    k_min: usize,
    k_max: usize,
    restarts: usize,
    metric: CoherenceMetric,
    seed: u64,
    params: &SweepParams,
) -> Result<CoherenceReport, SenseError> {
    if k_min < 2 || k_min > k_max {
        return Err(SenseError::InvalidKRange { k_min, k_max });
    }
    let mut rows = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let alpha = params.alpha.unwrap_or_else(|| default_alpha(k));
        let mut best = f64::NEG_INFINITY;
        for r in 0..restarts.max(1) {
            let model = lda_fit(
                docs,
                k,
                alpha,
                params.beta,
                params.iterations,
                sweep_seed(seed, k, r),
            )?;
            let c = coherence(&model, docs, metric, params.top_n)?;
            if c > best {
                best = c;
            }
        }
        rows.push((k, best));
    }
    let best_k = rows
        .iter()
        .fold((rows[0].0, f64::NEG_INFINITY), |acc, &(k, c)| {
            if c > acc.1 {
                (k, c)
            } else {
                acc
            }
        })
        .0;
    Ok(CoherenceReport { rows, best_k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopicAssignment {
    /// Each document counted once under its argmax topic (ties to the
    /// smallest topic id).
    Hard,
    /// Each document spreads its smoothed θ mass across topics.
    Soft,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicSenseDistribution {
    pub sense_ids: Vec<String>,
    /// k rows of |senses| fractions; non-empty rows sum to 1.
    pub rows: Vec<Vec<f64>>,
    /// Topics that attracted no mass at all.
    pub empty_topics: Vec<bool>,
}

/// How the original sense labels distribute over topics.
pub fn topic_sense_distribution(
    model: &LdaModel,
    docs: &[MaskedDocument],
    sense_ids: &[String],
    assignment: TopicAssignment,
) -> TopicSenseDistribution {
    let sense_index: BTreeMap<&str, usize> = sense_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut mass = vec![vec![0.0f64; sense_ids.len()]; model.k];
    for (d, doc) in docs.iter().enumerate() {
        let Some(&s) = sense_index.get(doc.original_sense.as_str()) else {
            continue;
        };
        match assignment {
            TopicAssignment::Hard => {
                let counts = &model.doc_topic_counts[d];
                let t = counts
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(t, _)| t)
                    .unwrap_or(0);
                mass[t][s] += 1.0;
            }
            TopicAssignment::Soft => {
                let len: u64 = model.doc_topic_counts[d].iter().sum();
                let denom = len as f64 + model.k as f64 * model.alpha;
                for (t, &c) in model.doc_topic_counts[d].iter().enumerate() {
                    mass[t][s] += (c as f64 + model.alpha) / denom;
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(model.k);
    let mut empty_topics = Vec::with_capacity(model.k);
    for row in mass {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            rows.push(row.iter().map(|&x| x / total).collect());
            empty_topics.push(false);
        } else {
            rows.push(row);
            empty_topics.push(true);
        }
    }
    TopicSenseDistribution {
        sense_ids: sense_ids.to_vec(),
        rows,
        empty_topics,
    }
}
