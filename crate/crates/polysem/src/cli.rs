//! Run-directory orchestration behind the `polysem` binary.
//!
//! A run is driven by one JSON config (flag overrides win) and writes all
//! artifacts under the configured output directory. A manifest with the
//! config hash, seed, and artifact checksums is written per pipeline run so
//! results stay attributable to their inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    build_vocabulary, filter_stopwords, load_corpus, tokenize, CorpusFormat, Language,
    StopwordList, TokenizedDocument, TokenizerConfig, Vocabulary,
};
use crate::embeddings::{
    export_word2vec_text, import_word2vec_text, nearest_neighbors, sense_similarity_matrix,
    train_sgns, EmbeddingModel, SgnsConfig, SimilarityMatrix,
};
use crate::projection::{project_labeled, LabeledPoint, WordGroup};
use crate::report::{render_heatmap, render_scatter, render_stacked_bars, PlotSpec};
use crate::senseinduction::{
    coherence, coherence_sweep, filter_sense_documents, lda_fit, mask_senses, sweep_seed,
    CoherenceMetric, CoherenceReport, MaskedDocument, SenseInventory, SweepParams,
    TopicAssignment, topic_sense_distribution,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanguageConfig {
    pub corpus: PathBuf,
    /// "jsonl" or "plain"
    #[serde(default = "default_format")]
    pub format: String,
    pub stopwords: PathBuf,
    pub senses: PathBuf,
}

fn default_format() -> String {
    "jsonl".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// None selects the 50/k heuristic.
    #[serde(default)]
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub metric: CoherenceMetric,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    /// Soft θ-mass topic assignment for the sense distribution instead of
    /// the hard argmax default.
    #[serde(default)]
    pub soft_assignment: bool,
}

fn default_top_n() -> usize {
    10
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k_min: 2,
            k_max: 10,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            restarts: 3,
            metric: CoherenceMetric::NpmiCosine,
            top_n: 10,
            soft_assignment: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Keyed by language code: "ur" and/or "en".
    pub languages: BTreeMap<String, LanguageConfig>,
    #[serde(default)]
    pub embedding: SgnsConfig,
    #[serde(default)]
    pub lda: LdaConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&content)
            .with_context(|| format!("malformed config {}", path.display()))?;
        // relative paths resolve against the config file location
        if let Some(base) = path.parent() {
            for lang in config.languages.values_mut() {
                for p in [&mut lang.corpus, &mut lang.stopwords, &mut lang.senses] {
                    if p.is_relative() {
                        *p = base.join(&p);
                    }
                }
            }
            if config.output_dir.is_relative() {
                config.output_dir = base.join(&config.output_dir);
            }
        }
        Ok(config)
    }

    /// All referenced input paths must exist before anything is written.
    pub fn validate(&self, langs: &[String]) -> Result<()> {
        if self.languages.is_empty() {
            bail!("config declares no languages");
        }
        for key in langs {
            let lang = self
                .languages
                .get(key)
                .ok_or_else(|| anyhow!("language {key:?} not in config"))?;
            for (what, p) in [
                ("corpus", &lang.corpus),
                ("stopword file", &lang.stopwords),
                ("sense inventory", &lang.senses),
            ] {
                if !p.exists() {
                    bail!("{what} for {key:?} not found: {}", p.display());
                }
            }
            language_enum(key)?;
            corpus_format(&lang.format)?;
        }
        Ok(())
    }

    pub fn selected_langs(&self, lang: Option<&str>) -> Result<Vec<String>> {
        match lang {
            Some(l) => {
                if !self.languages.contains_key(l) {
                    bail!("language {l:?} not in config (have: {:?})",
                        self.languages.keys().collect::<Vec<_>>());
                }
                Ok(vec![l.to_string()])
            }
            None => Ok(self.languages.keys().cloned().collect()),
        }
    }

    fn lang_dir(&self, key: &str) -> PathBuf {
        self.output_dir.join(key)
    }
}

fn language_enum(key: &str) -> Result<Language> {
    match key {
        "ur" => Ok(Language::UrduRoman),
        "en" => Ok(Language::English),
        other => bail!("unsupported language key {other:?} (use \"ur\" or \"en\")"),
    }
}

fn corpus_format(s: &str) -> Result<CorpusFormat> {
    match s {
        "jsonl" => Ok(CorpusFormat::Jsonl),
        "plain" | "plain_lines" => Ok(CorpusFormat::PlainLines),
        other => bail!("unsupported corpus format {other:?} (use \"jsonl\" or \"plain\")"),
    }
}

/// Everything downstream stages need for one language, built in memory.
struct Prepared {
    language: Language,
    docs: Vec<TokenizedDocument>,
    vocab: Vocabulary,
    inventory: SenseInventory,
}

fn prepare(config: &RunConfig, key: &str) -> Result<Prepared> {
    let lang_cfg = &config.languages[key];
    let language = language_enum(key)?;
    let format = corpus_format(&lang_cfg.format)?;
    let raw = load_corpus(&lang_cfg.corpus, format, language)?;
    let stops = StopwordList::load(&lang_cfg.stopwords, language)?;
    let tok_cfg = TokenizerConfig::default();
    let docs: Vec<TokenizedDocument> = raw
        .iter()
        .map(|d| filter_stopwords(&tokenize(d, &tok_cfg), &stops))
        .collect::<Result<_, _>>()?;
    let vocab = build_vocabulary(&docs, config.embedding.min_count)?;
    let inventory = SenseInventory::load(&lang_cfg.senses)?;
    Ok(Prepared {
        language,
        docs,
        vocab,
        inventory,
    })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn format_neighbors_tsv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("word\tscore\n");
    for (word, score) in rows {
        out.push_str(&format!("{word}\t{score:.6}\n"));
    }
    out
}

fn format_points_tsv(points: &[LabeledPoint<f64>]) -> String {
    let mut out = String::from("word\tgroup\tx\ty\n");
    for p in points {
        out.push_str(&format!("{}\t{}\t{:.6}\t{:.6}\n", p.word, p.group, p.x, p.y));
    }
    out
}

fn format_matrix_tsv(matrix: &SimilarityMatrix<f64>) -> String {
    let mut out = String::from("word");
    for label in &matrix.labels {
        out.push_str(&format!("\t{label}"));
    }
    out.push('\n');
    for (label, row) in matrix.labels.iter().zip(&matrix.values) {
        out.push_str(label);
        for v in row {
            out.push_str(&format!("\t{v:.6}"));
        }
        out.push('\n');
    }
    out
}

fn format_coherence_tsv(report: &CoherenceReport) -> String {
    let mut out = String::from("k\tcoherence\n");
    for (k, c) in &report.rows {
        out.push_str(&format!("{k}\t{c:.6}\n"));
    }
    out.push_str(&format!("# best_k={}\n", report.best_k));
    out
}

fn format_distribution_tsv(dist: &crate::senseinduction::TopicSenseDistribution) -> String {
    let mut out = String::from("topic");
    for s in &dist.sense_ids {
        out.push_str(&format!("\t{s}"));
    }
    out.push('\n');
    for (t, row) in dist.rows.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for v in row {
            out.push_str(&format!("\t{v:.6}"));
        }
        if dist.empty_topics[t] {
            out.push_str("\t# empty");
        }
        out.push('\n');
    }
    out
}

/// Tokenize, stopword-filter, and write the tokenized corpus and
/// vocabulary report for each selected language.
pub fn cmd_ingest(config: &RunConfig, lang: Option<&str>) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    for key in &langs {
        let prepared = prepare(config, key)?;
        let dir = config.lang_dir(key);
        let mut jsonl = String::new();
        for doc in &prepared.docs {
            jsonl.push_str(&serde_json::to_string(doc)?);
            jsonl.push('\n');
        }
        write_file(&dir.join("tokenized.jsonl"), &jsonl)?;
        let mut vocab_tsv = String::from("id\tword\tcount\n");
        for id in 0..prepared.vocab.len() {
            vocab_tsv.push_str(&format!(
                "{id}\t{}\t{}\n",
                prepared.vocab.word(id),
                prepared.vocab.count(id)
            ));
        }
        write_file(&dir.join("vocab.tsv"), &vocab_tsv)?;
        println!(
            "[{key}] ingested {} documents, vocabulary {} words ({} tokens)",
            prepared.docs.len(),
            prepared.vocab.len(),
            prepared.vocab.total_tokens()
        );
    }
    Ok(())
}

/// Train one SGNS model per selected language and export it in word2vec
/// text format.
pub fn cmd_train(config: &RunConfig, lang: Option<&str>) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    for key in &langs {
        let prepared = prepare(config, key)?;
        let sgns = SgnsConfig {
            seed: config.seed,
            ..config.embedding.clone()
        };
        let (model, stats) = train_sgns::<f64>(&prepared.docs, &prepared.vocab, &sgns, prepared.language)?;
        let path = config.lang_dir(key).join("embeddings.vec");
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        export_word2vec_text(&model, &path)?;
        println!(
            "[{key}] trained {}x{} embeddings ({} skipped tokens, final mean loss {:.4})",
            prepared.vocab.len(),
            sgns.dim,
            stats.skipped_tokens,
            stats.epoch_mean_loss.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn load_model(config: &RunConfig, key: &str) -> Result<EmbeddingModel<f64>> {
    let path = config.lang_dir(key).join("embeddings.vec");
    if !path.exists() {
        bail!(
            "no trained model at {} (run `train` first)",
            path.display()
        );
    }
    Ok(import_word2vec_text(&path, language_enum(key)?)?)
}

/// Top-k neighbor table for one word, as TSV.
pub fn cmd_neighbors(config: &RunConfig, lang: &str, word: &str, k: usize) -> Result<String> {
    config.validate(&config.selected_langs(Some(lang))?)?;
    let model = load_model(config, lang)?;
    let rows = nearest_neighbors(&model, word, k)?;
    Ok(format_neighbors_tsv(&rows))
}

/// In-vocabulary seed word for each sense: the first surface form present.
fn sense_seed_words(inventory: &SenseInventory, vocab: &Vocabulary) -> Vec<(String, String)> {
    let mut seeds = Vec::new();
    for sense in inventory.senses() {
        match sense.surface_forms.iter().find(|f| vocab.id(f).is_some()) {
            Some(form) => seeds.push((sense.sense_id.clone(), form.clone())),
            None => eprintln!(
                "warning: no surface form of {} is in the vocabulary; sense skipped",
                sense.sense_id
            ),
        }
    }
    seeds
}

/// Scatter export: each sense word plus its top-5 neighbors, grouped by
/// sense, projected to 2D with PCA fit on the selected vectors only.
pub fn cmd_project(config: &RunConfig, lang: Option<&str>, neighbors: usize) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    for key in &langs {
        let prepared = prepare(config, key)?;
        let model = load_model(config, key)?;
        let seeds = sense_seed_words(&prepared.inventory, &model.vocabulary);
        if seeds.is_empty() {
            bail!("[{key}] no sense word is in the trained vocabulary");
        }
        let mut groups = Vec::new();
        for (sense_id, seed) in &seeds {
            let mut words = vec![seed.clone()];
            for (w, _) in nearest_neighbors(&model, seed, neighbors)? {
                words.push(w);
            }
            groups.push((
                &model,
                WordGroup {
                    label: sense_id.clone(),
                    words,
                },
            ));
        }
        let points = project_labeled(&groups)?;
        let dir = config.lang_dir(key);
        write_file(&dir.join("projection.tsv"), &format_points_tsv(&points))?;
        let spec = PlotSpec::with_title(&format!("Sense neighborhoods ({key})"));
        write_file(&dir.join("projection.svg"), &render_scatter(&points, &spec)?)?;
        println!("[{key}] projected {} labeled points", points.len());
    }
    Ok(())
}

/// Sense-by-sense cosine similarity matrix plus heatmap.
pub fn cmd_simmatrix(config: &RunConfig, lang: Option<&str>, words: Option<&[String]>) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    for key in &langs {
        let prepared = prepare(config, key)?;
        let model = load_model(config, key)?;
        let selected: Vec<String> = match words {
            Some(w) => w.to_vec(),
            None => sense_seed_words(&prepared.inventory, &model.vocabulary)
                .into_iter()
                .map(|(_, form)| form)
                .collect(),
        };
        if selected.is_empty() {
            bail!("[{key}] no words selected for the similarity matrix");
        }
        let matrix = sense_similarity_matrix(&model, &selected)?;
        let dir = config.lang_dir(key);
        write_file(&dir.join("simmatrix.tsv"), &format_matrix_tsv(&matrix))?;
        let spec = PlotSpec::with_title(&format!("Sense similarity ({key})"));
        write_file(&dir.join("simmatrix.svg"), &render_heatmap(&matrix, &spec)?)?;
        println!("[{key}] similarity matrix over {} words", matrix.labels.len());
    }
    Ok(())
}

/// The induction stage: filter sense documents, mask, sweep topic counts
/// by coherence, fit the best k, and export the topic-sense distribution.
pub fn cmd_induce(config: &RunConfig, lang: Option<&str>) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    for key in &langs {
        let prepared = prepare(config, key)?;
        let sense_docs = filter_sense_documents(&prepared.docs, &prepared.inventory);
        if sense_docs.is_empty() {
            bail!("[{key}] no document contains a sense surface form");
        }
        let masked: Vec<MaskedDocument> = sense_docs
            .iter()
            .map(|d| mask_senses(d, &prepared.inventory))
            .collect::<Result<_, _>>()?;
        let dir = config.lang_dir(key);
        let mut jsonl = String::new();
        for doc in &masked {
            jsonl.push_str(&serde_json::to_string(doc)?);
            jsonl.push('\n');
        }
        write_file(&dir.join("masked.jsonl"), &jsonl)?;

        let lda = &config.lda;
        let params = SweepParams {
            alpha: lda.alpha,
            beta: lda.beta,
            iterations: lda.iterations,
            top_n: lda.top_n,
        };
        let report = coherence_sweep(
            &masked,
            lda.k_min,
            lda.k_max,
            lda.restarts,
            lda.metric,
            config.seed,
            &params,
        )?;
        write_file(&dir.join("coherence.tsv"), &format_coherence_tsv(&report))?;

        // refit the winning k, keeping the restart that scored best
        let k = report.best_k;
        let alpha = lda.alpha.unwrap_or(50.0 / k as f64);
        let mut best: Option<(f64, crate::senseinduction::LdaModel)> = None;
        for r in 0..lda.restarts.max(1) {
            let model = lda_fit(
                &masked,
                k,
                alpha,
                lda.beta,
                lda.iterations,
                sweep_seed(config.seed, k, r),
            )?;
            let c = coherence(&model, &masked, lda.metric, lda.top_n)?;
            if best.as_ref().map_or(true, |(bc, _)| c > *bc) {
                best = Some((c, model));
            }
        }
        let (best_coherence, model) = best.expect("restarts >= 1");
        write_file(&dir.join("lda_model.json"), &serde_json::to_string_pretty(&model)?)?;

        let assignment = if lda.soft_assignment {
            TopicAssignment::Soft
        } else {
            TopicAssignment::Hard
        };
        let dist = topic_sense_distribution(
            &model,
            &masked,
            &prepared.inventory.sense_ids(),
            assignment,
        );
        write_file(&dir.join("topic_senses.tsv"), &format_distribution_tsv(&dist))?;
        let spec = PlotSpec::with_title(&format!("Topic segmentation of senses ({key})"));
        write_file(&dir.join("topic_senses.svg"), &render_stacked_bars(&dist, &spec)?)?;
        println!(
            "[{key}] induced senses over {} masked documents: best_k={} (coherence {:.6})",
            masked.len(),
            k,
            best_coherence
        );
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub seed: u64,
    /// Relative artifact path -> sha256, sorted by path.
    pub artifacts: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

fn collect_artifacts(root: &Path, base: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_artifacts(&path, base, out)?;
        } else if path.file_name().is_some_and(|n| n != "run_manifest.json") {
            let rel = path
                .strip_prefix(base)
                .unwrap()
                .to_string_lossy()
                .replace('\\', "/");
            out.insert(rel, sha256_hex(&fs::read(&path)?));
        }
    }
    Ok(())
}

/// Neighbor tables for every sense seed word, written per language.
fn pipeline_neighbor_tables(config: &RunConfig, key: &str, k: usize) -> Result<()> {
    let prepared = prepare(config, key)?;
    let model = load_model(config, key)?;
    for (sense_id, seed) in sense_seed_words(&prepared.inventory, &model.vocabulary) {
        let rows = nearest_neighbors(&model, &seed, k)?;
        let path = config
            .lang_dir(key)
            .join(format!("neighbors_{}.tsv", sense_id));
        write_file(&path, &format_neighbors_tsv(&rows))?;
        let _ = sense_id;
    }
    Ok(())
}

/// The full workflow in dependency order, then the run manifest. A failing
/// stage stops the run; later stages never execute.
pub fn cmd_pipeline(config: &RunConfig, lang: Option<&str>) -> Result<()> {
    let langs = config.selected_langs(lang)?;
    config.validate(&langs)?;
    cmd_ingest(config, lang)?;
    cmd_train(config, lang)?;
    for key in &langs {
        pipeline_neighbor_tables(config, key, 5)?;
    }
    cmd_project(config, lang, 5)?;
    cmd_simmatrix(config, lang, None)?;
    cmd_induce(config, lang)?;

    // hash the semantic inputs; where the artifacts land is not one of them
    let config_json = serde_json::to_vec(&RunConfig {
        output_dir: PathBuf::new(),
        ..config.clone()
    })?;
    let mut artifacts = BTreeMap::new();
    collect_artifacts(&config.output_dir, &config.output_dir, &mut artifacts)?;
    let manifest = RunManifest {
        config_sha256: sha256_hex(&config_json),
        seed: config.seed,
        artifacts,
    };
    write_file(
        &config.output_dir.join("run_manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    println!(
        "pipeline complete: {} artifacts under {}",
        manifest.artifacts.len(),
        config.output_dir.display()
    );
    Ok(())
}
