use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::embedding::{EmbeddingProviderConfig, ProviderMode};
use crate::ingest::{InputFormat, DEFAULT_RELEVANCE_TERMS};
use crate::network::{EntityKind, GraphFormat};
use crate::summarize::{LlmConfig, SummarizerOptions};
use crate::textprep::{DEFAULT_MIN_COUNT, DEFAULT_THRESHOLD};
use crate::topics::TopicModelConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: InputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    pub inputs: Vec<InputSpec>,
    pub relevance_terms: Vec<String>,
}

impl Default for IngestSection {
    fn default() -> Self {
        IngestSection {
            inputs: Vec::new(),
            relevance_terms: DEFAULT_RELEVANCE_TERMS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepSection {
    pub min_count: usize,
    pub threshold: f64,
    /// Replaces the bundled stop-word list.
    pub stopwords: Option<PathBuf>,
    /// Replaces the bundled lemma table.
    pub lemmas: Option<PathBuf>,
}

impl Default for PrepSection {
    fn default() -> Self {
        PrepSection {
            min_count: DEFAULT_MIN_COUNT,
            threshold: DEFAULT_THRESHOLD,
            stopwords: None,
            lemmas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSection {
    pub provider: EmbeddingProviderConfig,
    /// Vector width in hash mode.
    pub dim: usize,
    /// Precomputed vectors in file mode.
    pub doc_file: Option<PathBuf>,
    pub word_file: Option<PathBuf>,
}

impl Default for EmbedSection {
    fn default() -> Self {
        EmbedSection {
            provider: EmbeddingProviderConfig::default(),
            dim: 128,
            doc_file: None,
            word_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub model_name: String,
    /// Most significant topics carried into networks and summaries.
    pub top_k: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            model_name: "two-stage".into(),
            top_k: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub min_country: usize,
    pub min_institution: usize,
    pub min_author: usize,
    pub alias_map: Option<PathBuf>,
    pub formats: Vec<String>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            min_country: 20,
            min_institution: 10,
            min_author: 4,
            alias_map: None,
            formats: vec!["gexf".into(), "graphml".into(), "edge_csv".into()],
        }
    }
}

impl NetworkSection {
    pub fn min_publications(&self, kind: EntityKind) -> usize {
        match kind {
            EntityKind::Country => self.min_country,
            EntityKind::Institution => self.min_institution,
            EntityKind::Author => self.min_author,
        }
    }

    pub fn graph_formats(&self) -> Result<Vec<GraphFormat>, PipelineError> {
        self.formats
            .iter()
            .map(|f| {
                f.parse()
                    .map_err(|reason| PipelineError::config("network.formats", reason))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LlmMode {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingInput {
    pub model: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SummarizeSection {
    pub mode: LlmMode,
    pub llm: LlmConfig,
    pub options: SummarizerOptions,
    pub chunk_prompt: Option<PathBuf>,
    pub reduce_prompt: Option<PathBuf>,
    /// Human judgement sheets, one per model, scored after summarizing.
    pub ratings: Vec<RatingInput>,
}

/// One file describing a whole study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Upper bound on worker threads in any stage; 0 leaves module defaults.
    pub jobs: usize,
    pub ingest: IngestSection,
    pub textprep: PrepSection,
    pub embedding: EmbedSection,
    pub topics: TopicModelConfig,
    pub eval: EvalSection,
    pub network: NetworkSection,
    pub summarize: SummarizeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            jobs: 0,
            ingest: IngestSection::default(),
            textprep: PrepSection::default(),
            embedding: EmbedSection::default(),
            topics: TopicModelConfig::default(),
            eval: EvalSection::default(),
            network: NetworkSection::default(),
            summarize: SummarizeSection::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn require_file(field: &str, p: &Path) -> Result<(), PipelineError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(PipelineError::config(field, format!("{} does not exist", p.display())))
    }
}

impl RunConfig {
    /// Parses TOML text. Relative paths are taken against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<RunConfig, PipelineError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| PipelineError::config("config", e.to_string()))?;
        config.rebase(base);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base)
    }

    fn rebase(&mut self, base: &Path) {
        rebase(base, &mut self.out_dir);
        for input in &mut self.ingest.inputs {
            rebase(base, &mut input.path);
        }
        let optional = [
            &mut self.textprep.stopwords,
            &mut self.textprep.lemmas,
            &mut self.embedding.doc_file,
            &mut self.embedding.word_file,
            &mut self.network.alias_map,
            &mut self.summarize.chunk_prompt,
            &mut self.summarize.reduce_prompt,
        ];
        for p in optional.into_iter().flatten() {
            rebase(base, p);
        }
        for r in &mut self.summarize.ratings {
            rebase(base, &mut r.path);
        }
    }

    /// Checks every referenced path and cross-field rule, and pushes the run
    /// seed into the stochastic stages.
    pub fn validate(&mut self) -> Result<(), PipelineError> {
        self.topics.seed = self.seed;
        if self.ingest.inputs.is_empty() {
            return Err(PipelineError::config(
                "ingest.inputs",
                "at least one input file is required",
            ));
        }
        for input in &self.ingest.inputs {
            require_file("ingest.inputs", &input.path)?;
        }
        let optional = [
            ("textprep.stopwords", &self.textprep.stopwords),
            ("textprep.lemmas", &self.textprep.lemmas),
            ("embedding.doc_file", &self.embedding.doc_file),
            ("embedding.word_file", &self.embedding.word_file),
            ("network.alias_map", &self.network.alias_map),
            ("summarize.chunk_prompt", &self.summarize.chunk_prompt),
            ("summarize.reduce_prompt", &self.summarize.reduce_prompt),
        ];
        for (field, p) in optional {
            if let Some(p) = p {
                require_file(field, p)?;
            }
        }
        for r in &self.summarize.ratings {
            require_file("summarize.ratings", &r.path)?;
        }
        if self.summarize.chunk_prompt.is_some() != self.summarize.reduce_prompt.is_some() {
            return Err(PipelineError::config(
                "summarize.chunk_prompt",
                "chunk and reduce prompts must be given together",
            ));
        }
        self.embedding
            .provider
            .validate()
            .map_err(|e| PipelineError::config("embedding.provider", e.to_string()))?;
        match self.embedding.provider.mode {
            ProviderMode::File if self.embedding.doc_file.is_none() => {
                return Err(PipelineError::config("embedding.doc_file", "required in file mode"));
            }
            ProviderMode::Hash if self.embedding.dim < 2 => {
                return Err(PipelineError::config("embedding.dim", "must be at least 2"));
            }
            _ => {}
        }
        self.topics
            .validate()
            .map_err(|e| PipelineError::config("topics", e.to_string()))?;
        if self.eval.top_k == 0 {
            return Err(PipelineError::config("eval.top_k", "must be positive"));
        }
        self.network.graph_formats()?;
        if self.summarize.mode == LlmMode::Http && self.summarize.llm.endpoint.is_empty() {
            return Err(PipelineError::config("summarize.llm.endpoint", "required in http mode"));
        }
        if self.summarize.options.token_budget == 0 {
            return Err(PipelineError::config(
                "summarize.options.token_budget",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// Applies the `--jobs` cap to every concurrent stage.
    pub(crate) fn capped(&self, requested: usize) -> usize {
        match self.jobs {
            0 => requested.max(1),
            cap => requested.clamp(1, cap),
        }
    }
}
