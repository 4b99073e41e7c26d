//! Stage orchestration: configuration, content-hashed artifacts and the run
//! manifest.
//!
//! Every stage reads its upstream artifacts from the run directory and
//! writes its own there. A stage whose inputs and configuration hash to the
//! values recorded in the manifest, and whose outputs are intact, is skipped.

mod config;
mod manifest;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{self, EmbeddingError, EmbeddingKind, ProviderMode};
use crate::eval::{self, EvalError};
use crate::ingest::{self, BiblioRecord, IngestError};
use crate::network::{self, AliasMap, EntityKind, NetworkError};
use crate::summarize::{self, HttpLlmClient, LlmClient, MockLlmClient, PromptTemplates, SummarizeError};
use crate::textprep::{self, Lemmatizer, SanitizedDoc, StopwordList, TextPrep, TextprepError};
use crate::topics::{self, TopicError};

pub use config::{
    EmbedSection, EvalSection, IngestSection, InputSpec, LlmMode, NetworkSection, PrepSection, RatingInput, RunConfig,
    SummarizeSection,
};
pub use manifest::{hash_file, sha256_hex, Manifest, StageRecord, StageStatus, MANIFEST_FILE};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing artifact {path} from stage `{stage}`; run that stage first")]
    MissingUpstreamArtifact { stage: String, path: String },
    #[error("invalid configuration `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{} artifact(s) failed verification", .0.len())]
    Verify(Vec<String>),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Textprep(#[from] TextprepError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Topics(#[from] TopicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Summarize(#[from] SummarizeError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        PipelineError::ConfigInvalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Prep,
    Embed,
    Topics,
    Eval,
    Network,
    Summarize,
}

impl Stage {
    /// Run order of a full study.
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Prep,
        Stage::Embed,
        Stage::Topics,
        Stage::Eval,
        Stage::Network,
        Stage::Summarize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Prep => "prep",
            Stage::Embed => "embed",
            Stage::Topics => "topics",
            Stage::Eval => "eval",
            Stage::Network => "network",
            Stage::Summarize => "summarize",
        }
    }

    /// Upstream artifacts this stage cannot run without.
    fn required(self) -> &'static [(Stage, &'static str)] {
        match self {
            Stage::Ingest => &[],
            Stage::Prep => &[(Stage::Ingest, CORPUS)],
            Stage::Embed => &[(Stage::Ingest, CORPUS), (Stage::Prep, SANITIZED)],
            Stage::Topics => &[(Stage::Prep, SANITIZED), (Stage::Embed, DOC_EMB)],
            Stage::Eval => &[
                (Stage::Prep, SANITIZED),
                (Stage::Topics, TOPICS_JSON),
                (Stage::Topics, ASSIGNMENT),
            ],
            Stage::Network | Stage::Summarize => &[
                (Stage::Ingest, CORPUS),
                (Stage::Topics, ASSIGNMENT),
                (Stage::Eval, TOP_TOPICS),
            ],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

const CORPUS: &str = "corpus.csv";
const PRISMA: &str = "prisma.csv";
const SANITIZED: &str = "sanitized.jsonl";
const BIGRAMS: &str = "bigrams.tsv";
const DOC_EMB: &str = "doc_embeddings.tsv";
const WORD_EMB: &str = "word_embeddings.tsv";
const TOPICS_JSON: &str = "topics.json";
const TOPICS_JSONL: &str = "topics.jsonl";
const ASSIGNMENT: &str = "assignment.csv";
const REPORT_JSON: &str = "report.json";
const REPORT_TXT: &str = "report.txt";
const TOP_TOPICS: &str = "top_topics.json";
const NETWORK_SUMMARY: &str = "network_summary.json";
const DESCRIPTIONS: &str = "descriptions.jsonl";
const AUDIT_DIR: &str = "audit";
const RATING_JSON: &str = "rating_report.json";
const RATING_TXT: &str = "rating_report.txt";

/// Runs stages of one study against its run directory.
pub struct Pipeline {
    config: RunConfig,
    force: bool,
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

impl Pipeline {
    /// Validates the configuration; the run seed is fixed here.
    pub fn new(mut config: RunConfig, force: bool) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Pipeline { config, force })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.out_dir
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.config.out_dir.join(rel)
    }

    fn write(&self, rel: &str, contents: impl AsRef<[u8]>, outputs: &mut Vec<String>) -> Result<(), PipelineError> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| PipelineError::io(&path, e))?;
        outputs.push(rel.to_string());
        Ok(())
    }

    fn external_inputs(&self, stage: Stage) -> Vec<PathBuf> {
        let c = &self.config;
        let mut v: Vec<PathBuf> = match stage {
            Stage::Ingest => c.ingest.inputs.iter().map(|i| i.path.clone()).collect(),
            Stage::Prep => [&c.textprep.stopwords, &c.textprep.lemmas]
                .into_iter()
                .flatten()
                .cloned()
                .collect(),
            Stage::Embed => [&c.embedding.doc_file, &c.embedding.word_file]
                .into_iter()
                .flatten()
                .cloned()
                .collect(),
            Stage::Network => c.network.alias_map.iter().cloned().collect(),
            Stage::Summarize => {
                let mut v: Vec<PathBuf> = [&c.summarize.chunk_prompt, &c.summarize.reduce_prompt]
                    .into_iter()
                    .flatten()
                    .cloned()
                    .collect();
                v.extend(c.summarize.ratings.iter().map(|r| r.path.clone()));
                v
            }
            Stage::Topics | Stage::Eval => Vec::new(),
        };
        if stage == Stage::Topics && self.path(WORD_EMB).exists() {
            v.push(self.path(WORD_EMB));
        }
        v
    }

    fn config_hash(&self, stage: Stage) -> String {
        let c = &self.config;
        let section = match stage {
            Stage::Ingest => serde_json::to_string(&c.ingest.relevance_terms),
            Stage::Prep => serde_json::to_string(&c.textprep),
            Stage::Embed => serde_json::to_string(&c.embedding),
            Stage::Topics => serde_json::to_string(&c.topics),
            Stage::Eval => serde_json::to_string(&c.eval),
            Stage::Network => serde_json::to_string(&c.network),
            Stage::Summarize => {
                serde_json::to_string(&(&c.summarize.mode, &c.summarize.llm, c.summarize.options.token_budget))
            }
        }
        .expect("config serializes");
        sha256_hex(format!("{}\n{}\n{section}", stage.as_str(), c.seed).as_bytes())
    }

    fn input_hashes(&self, stage: Stage) -> Result<BTreeMap<String, String>, PipelineError> {
        let mut hashes = BTreeMap::new();
        for (upstream, rel) in stage.required() {
            let path = self.path(rel);
            if !path.is_file() {
                return Err(PipelineError::MissingUpstreamArtifact {
                    stage: upstream.as_str().to_string(),
                    path: path.display().to_string(),
                });
            }
            hashes.insert((*rel).to_string(), hash_file(&path)?);
        }
        for path in self.external_inputs(stage) {
            hashes.insert(path.display().to_string(), hash_file(&path)?);
        }
        Ok(hashes)
    }

    /// Runs one stage unless the manifest shows it is up to date.
    pub fn run_stage(&self, stage: Stage) -> Result<StageStatus, PipelineError> {
        let out = &self.config.out_dir;
        fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
        let input_hashes = self.input_hashes(stage)?;
        let config_hash = self.config_hash(stage);
        let mut manifest = Manifest::load(out)?;

        if !self.force {
            if let Some(prev) = manifest.stages.get(stage.as_str()) {
                let outputs_intact = prev
                    .outputs
                    .iter()
                    .all(|(rel, h)| hash_file(&out.join(rel)).is_ok_and(|got| &got == h));
                if prev.input_hashes == input_hashes && prev.config_hash == config_hash && outputs_intact {
                    log::info!("{stage}: inputs unchanged, skipping");
                    let mut rec = prev.clone();
                    rec.status = StageStatus::Skipped;
                    rec.duration_ms = 0;
                    manifest.stages.insert(stage.as_str().to_string(), rec);
                    manifest.save(out)?;
                    return Ok(StageStatus::Skipped);
                }
            }
        }

        log::info!("{stage}: running");
        let started = Instant::now();
        let written = match stage {
            Stage::Ingest => self.ingest()?,
            Stage::Prep => self.prep()?,
            Stage::Embed => self.embed()?,
            Stage::Topics => self.topics()?,
            Stage::Eval => self.eval()?,
            Stage::Network => self.network()?,
            Stage::Summarize => self.summarize()?,
        };
        let mut outputs = BTreeMap::new();
        for rel in written {
            let h = hash_file(&out.join(&rel))?;
            outputs.insert(rel, h);
        }
        manifest.stages.insert(
            stage.as_str().to_string(),
            StageRecord {
                stage: stage.as_str().to_string(),
                status: StageStatus::Ran,
                input_hashes,
                config_hash,
                outputs,
                duration_ms: started.elapsed().as_millis() as u64,
            },
        );
        manifest.save(out)?;
        Ok(StageStatus::Ran)
    }

    /// Every stage in order.
    pub fn run_all(&self) -> Result<Vec<(Stage, StageStatus)>, PipelineError> {
        Stage::ALL.into_iter().map(|s| Ok((s, self.run_stage(s)?))).collect()
    }

    /// Re-hashes every artifact listed in the manifest.
    pub fn verify(&self) -> Result<usize, PipelineError> {
        verify_run(&self.config.out_dir)
    }

    fn load_corpus(&self) -> Result<Vec<BiblioRecord>, PipelineError> {
        let path = self.path(CORPUS);
        let file = fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?;
        let (records, bad) = ingest::read_corpus_csv(file)?;
        if !bad.is_empty() {
            log::warn!("{} malformed rows in {}", bad.len(), path.display());
        }
        Ok(records)
    }

    fn load_sanitized(&self) -> Result<Vec<SanitizedDoc>, PipelineError> {
        let path = self.path(SANITIZED);
        let file = fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?;
        Ok(textprep::read_sanitized_jsonl(BufReader::new(file))?)
    }

    fn load_assignment(&self) -> Result<topics::TopicAssignment, PipelineError> {
        let path = self.path(ASSIGNMENT);
        let file = fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?;
        Ok(topics::read_assignment_csv(file)?)
    }

    fn load_top_topics(&self) -> Result<Vec<i64>, PipelineError> {
        let path = self.path(TOP_TOPICS);
        serde_json::from_str(&read_text(&path)?).map_err(|e| PipelineError::io(&path, std::io::Error::other(e)))
    }

    fn ingest(&self) -> Result<Vec<String>, PipelineError> {
        let mut records = Vec::new();
        for input in &self.config.ingest.inputs {
            let outcome = ingest::parse_records(&input.path, input.format)?;
            for bad in &outcome.errors {
                log::warn!("{} record {}: {}", input.path.display(), bad.ordinal, bad.reason);
            }
            records.extend(outcome.records);
        }
        ingest::ensure_unique_ids(&mut records);
        let (kept, report) = ingest::screen(records, &self.config.ingest.relevance_terms);
        log::info!("screening kept {} of {} records", report.final_count, report.collected);
        let mut csv = Vec::new();
        ingest::write_corpus_csv(&kept, &mut csv)?;
        let mut outputs = Vec::new();
        self.write(CORPUS, csv, &mut outputs)?;
        self.write(PRISMA, report.to_csv(), &mut outputs)?;
        Ok(outputs)
    }

    fn prep(&self) -> Result<Vec<String>, PipelineError> {
        let c = &self.config.textprep;
        let mut prep = TextPrep {
            min_count: c.min_count,
            threshold: c.threshold,
            ..TextPrep::default()
        };
        if let Some(p) = &c.stopwords {
            prep.stopwords = StopwordList::parse(&read_text(p)?, &p.display().to_string())?;
        }
        if let Some(p) = &c.lemmas {
            prep.lemmatizer = Lemmatizer::from_tsv(&read_text(p)?)?;
        }
        let docs: Vec<(String, String)> = self
            .load_corpus()?
            .iter()
            .map(|r| (r.record_id.clone(), r.corpus_text()))
            .collect();
        let (sanitized, model) = prep.sanitize(&docs)?;
        let mut jsonl = Vec::new();
        textprep::write_sanitized_jsonl(&sanitized, &mut jsonl)?;
        let mut tsv = String::from("first\tsecond\tscore\n");
        for ((a, b), s) in model.accepted_pairs() {
            tsv.push_str(&format!("{a}\t{b}\t{}\n", embedding::format_sig9(*s)));
        }
        let mut outputs = Vec::new();
        self.write(SANITIZED, jsonl, &mut outputs)?;
        self.write(BIGRAMS, tsv, &mut outputs)?;
        Ok(outputs)
    }

    fn embed(&self) -> Result<Vec<String>, PipelineError> {
        let c = &self.config.embedding;
        let docs: Vec<(String, String)> = self
            .load_corpus()?
            .iter()
            .map(|r| (r.record_id.clone(), r.corpus_text()))
            .collect();
        let mut vocab: Vec<String> = self
            .load_sanitized()?
            .into_iter()
            .flat_map(|d| d.tokens)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        vocab.dedup();
        // Merged bigrams embed as their two words.
        let words: Vec<(String, String)> = vocab.iter().map(|t| (t.clone(), t.replace('_', " "))).collect();

        let (doc_emb, word_emb) = match c.provider.mode {
            ProviderMode::Hash => (
                embedding::hash_embed(&docs, c.dim, EmbeddingKind::Document),
                Some(embedding::hash_embed(&words, c.dim, EmbeddingKind::Word)),
            ),
            ProviderMode::Http => {
                let mut provider = c.provider.clone();
                provider.concurrency = self.config.capped(provider.concurrency);
                (
                    embedding::fetch_embeddings(&docs, &provider, EmbeddingKind::Document)?,
                    Some(embedding::fetch_embeddings(&words, &provider, EmbeddingKind::Word)?),
                )
            }
            ProviderMode::File => {
                let doc_path = c.doc_file.as_ref().expect("validated");
                let loaded = embedding::load_embeddings(doc_path)?;
                let ids: Vec<String> = docs.iter().map(|(id, _)| id.clone()).collect();
                let doc_emb = loaded.select(&ids).map_err(|id| {
                    EmbeddingError::Config(format!("{} has no vector for record `{id}`", doc_path.display()))
                })?;
                let word_emb = c.word_file.as_deref().map(embedding::load_embeddings).transpose()?;
                (doc_emb, word_emb)
            }
        };
        let mut outputs = Vec::new();
        let mut buf = Vec::new();
        embedding::write_embeddings(&doc_emb, &mut buf).map_err(|e| PipelineError::io(&self.path(DOC_EMB), e))?;
        self.write(DOC_EMB, buf, &mut outputs)?;
        match word_emb {
            Some(w) => {
                let mut buf = Vec::new();
                embedding::write_embeddings(&w, &mut buf).map_err(|e| PipelineError::io(&self.path(WORD_EMB), e))?;
                self.write(WORD_EMB, buf, &mut outputs)?;
            }
            None => {
                let stale = self.path(WORD_EMB);
                if stale.exists() {
                    fs::remove_file(&stale).map_err(|e| PipelineError::io(&stale, e))?;
                }
            }
        }
        Ok(outputs)
    }

    fn topics(&self) -> Result<Vec<String>, PipelineError> {
        let sanitized = self.load_sanitized()?;
        let doc_emb = embedding::load_embeddings(&self.path(DOC_EMB))?;
        let word_path = self.path(WORD_EMB);
        let word_emb = if word_path.exists() {
            Some(embedding::load_embeddings(&word_path)?)
        } else {
            None
        };
        let (assignment, fitted) = topics::fit(&doc_emb, word_emb.as_ref(), &sanitized, &self.config.topics)?;
        log::info!("{} topics from {} documents", fitted.len(), sanitized.len());
        let mut outputs = Vec::new();
        let mut buf = Vec::new();
        topics::write_topics_json(&fitted, &mut buf)?;
        self.write(TOPICS_JSON, buf, &mut outputs)?;
        let mut buf = Vec::new();
        topics::write_topics_jsonl(&fitted, &mut buf)?;
        self.write(TOPICS_JSONL, buf, &mut outputs)?;
        let mut buf = Vec::new();
        topics::write_assignment_csv(&assignment, &mut buf)?;
        self.write(ASSIGNMENT, buf, &mut outputs)?;
        Ok(outputs)
    }

    fn eval(&self) -> Result<Vec<String>, PipelineError> {
        let sanitized = self.load_sanitized()?;
        let path = self.path(TOPICS_JSON);
        let fitted = topics::read_topics_json(fs::File::open(&path).map_err(|e| PipelineError::io(&path, e))?)?;
        let assignment = self.load_assignment()?;
        let report = eval::evaluate_model(&self.config.eval.model_name, &assignment, &fitted, &sanitized)?;
        let k = self.config.eval.top_k.min(report.per_topic_significance.len());
        if k < self.config.eval.top_k {
            log::warn!("only {k} topics available; carrying all of them forward");
        }
        let top = eval::select_top_significant(&report.per_topic_significance, k)?;
        let mut outputs = Vec::new();
        self.write(REPORT_JSON, to_json(&report), &mut outputs)?;
        self.write(
            REPORT_TXT,
            eval::render_comparison(std::slice::from_ref(&report)),
            &mut outputs,
        )?;
        self.write(TOP_TOPICS, to_json(&top), &mut outputs)?;
        Ok(outputs)
    }

    fn network(&self) -> Result<Vec<String>, PipelineError> {
        #[derive(Serialize)]
        struct KindSummary {
            entities: usize,
            nodes: usize,
            edges: usize,
            communities: usize,
            modularity: Option<f64>,
        }
        let c = &self.config.network;
        let aliases = c
            .alias_map
            .as_deref()
            .map(|p| AliasMap::parse(&read_text(p)?).map_err(PipelineError::from))
            .transpose()?;
        let records = self.load_corpus()?;
        let assignment = self.load_assignment()?;
        let top = self.load_top_topics()?;
        let formats = c.graph_formats()?;
        let mut outputs = Vec::new();
        let mut summary = BTreeMap::new();
        for kind in EntityKind::ALL {
            let full = network::build_graph(&records, kind, aliases.as_ref());
            let g = network::filter_graph(&full, c.min_publications(kind));
            let partition = match network::detect_communities(&g) {
                Ok(p) => Some(p),
                Err(NetworkError::EmptyGraph) => {
                    log::warn!("{kind} graph is empty after filtering");
                    None
                }
                Err(e) => return Err(e.into()),
            };
            for &format in &formats {
                let rel = match format {
                    network::GraphFormat::EdgeCsv => format!("graph_{kind}_edges.csv"),
                    f => format!("graph_{kind}.{}", f.extension()),
                };
                self.write(
                    &rel,
                    network::render_graph(&g, partition.as_ref(), format)?,
                    &mut outputs,
                )?;
            }
            let mut buf = Vec::new();
            network::write_rankings_csv(&full, &mut buf)?;
            self.write(&format!("rankings_{kind}.csv"), buf, &mut outputs)?;
            let per_topic = network::topicwise(&records, &assignment, &top, kind, aliases.as_ref())?;
            let mut buf = Vec::new();
            network::write_topic_counts_csv(&per_topic, &mut buf)?;
            self.write(&format!("topic_counts_{kind}.csv"), buf, &mut outputs)?;
            summary.insert(
                kind.as_str(),
                KindSummary {
                    entities: full.nodes.len(),
                    nodes: g.nodes.len(),
                    edges: g.edges.len(),
                    communities: partition.as_ref().map_or(0, |p| p.n_communities()),
                    modularity: partition.as_ref().map(|p| p.modularity),
                },
            );
        }
        self.write(NETWORK_SUMMARY, to_json(&summary), &mut outputs)?;
        Ok(outputs)
    }

    fn summarize(&self) -> Result<Vec<String>, PipelineError> {
        let c = &self.config.summarize;
        let templates = match (&c.chunk_prompt, &c.reduce_prompt) {
            (Some(chunk), Some(reduce)) => PromptTemplates::load(chunk, reduce)?,
            _ => PromptTemplates::default(),
        };
        let client: Box<dyn LlmClient> = match c.mode {
            LlmMode::Mock => Box::new(MockLlmClient::new(c.llm.model.clone())),
            LlmMode::Http => Box::new(HttpLlmClient::new(c.llm.clone())),
        };
        let mut options = c.options.clone();
        options.concurrency = self.config.capped(options.concurrency);

        let abstracts: BTreeMap<String, String> = self
            .load_corpus()?
            .into_iter()
            .map(|r| (r.record_id, format!("{}\n{}", r.title.trim(), r.abstract_text.trim())))
            .collect();
        let assignment = self.load_assignment()?;
        let top = self.load_top_topics()?;

        let audit = self.path(AUDIT_DIR);
        if audit.exists() {
            fs::remove_dir_all(&audit).map_err(|e| PipelineError::io(&audit, e))?;
        }
        let mut outputs = Vec::new();
        let mut lines = String::new();
        for t in top {
            let members: Vec<(String, String)> = assignment
                .members(t)
                .into_iter()
                .map(|id| {
                    let text = abstracts
                        .get(&id)
                        .cloned()
                        .ok_or_else(|| SummarizeError::UnknownAbstract(id.clone()))?;
                    Ok((id, text))
                })
                .collect::<Result<_, SummarizeError>>()?;
            let plan = summarize::plan_chunks(t, &members, options.token_budget)?;
            let run = summarize::summarize_topic(&plan, &abstracts, client.as_ref(), &templates, &options)?;
            summarize::write_transcript(&audit, t, &run.transcript)?;
            outputs.push(format!("{AUDIT_DIR}/topic_{t}.jsonl"));
            lines.push_str(&serde_json::to_string(&run.description).expect("description serializes"));
            lines.push('\n');
        }
        self.write(DESCRIPTIONS, lines, &mut outputs)?;

        if !c.ratings.is_empty() {
            let mut models = Vec::new();
            for r in &c.ratings {
                let file = fs::File::open(&r.path).map_err(|e| PipelineError::io(&r.path, e))?;
                models.push(summarize::evaluate_ratings(
                    &r.model,
                    &summarize::read_ratings_csv(file)?,
                )?);
            }
            let best = summarize::select_best_model(&models).map(|i| models[i].model_name.clone());
            #[derive(Serialize)]
            struct RatingReport<'a> {
                models: &'a [summarize::ModelEvaluation],
                best_model: Option<String>,
            }
            self.write(
                RATING_JSON,
                to_json(&RatingReport {
                    models: &models,
                    best_model: best,
                }),
                &mut outputs,
            )?;
            self.write(RATING_TXT, summarize::render_rating_table(&models), &mut outputs)?;
        }
        Ok(outputs)
    }
}

/// Re-hashes every artifact in a run directory's manifest. Returns the
/// number of artifacts checked.
pub fn verify_run(out_dir: &Path) -> Result<usize, PipelineError> {
    let manifest = Manifest::load(out_dir)?;
    if manifest.stages.is_empty() {
        return Err(PipelineError::Manifest(format!("no manifest in {}", out_dir.display())));
    }
    let problems = manifest.verify(out_dir);
    if problems.is_empty() {
        Ok(manifest.artifact_hashes().len())
    } else {
        Err(PipelineError::Verify(problems))
    }
}

/// Location of the bundled synthetic corpus relative to this crate.
pub fn bundled_corpus_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/corpus.ris")
}

/// Location of the example study configuration for the bundled corpus.
pub fn bundled_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/study.toml")
}
