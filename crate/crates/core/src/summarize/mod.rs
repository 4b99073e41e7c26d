//! Topic descriptions by chunked map-reduce over a completion endpoint, and
//! scoring of human judgements of those descriptions.

mod llm;
mod ratings;

use std::collections::BTreeMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use twox_hash::XxHash64;

pub use llm::{first_sentence, HttpLlmClient, LlmClient, LlmConfig, MockLlmClient};
pub use ratings::{
    cohens_kappa, comprehensiveness, evaluate_ratings, read_ratings_csv, render_rating_table, select_best_model,
    EvaluationSheet, KappaResult, ModelEvaluation, TopicEvaluation,
};

pub const DEFAULT_TOKEN_BUDGET: usize = 3000;

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("topic {0} has no abstracts")]
    EmptyTopic(i64),
    #[error("abstract `{0}` is not in the corpus")]
    UnknownAbstract(String),
    #[error("endpoint failed at {step}: {reason}")]
    Endpoint { step: String, reason: String },
    #[error("completion has no title and summary: {0:?}")]
    MalformedCompletion(String),
    #[error("no ratings for topic {0}")]
    EmptySheet(i64),
    #[error("topic {topic}: need at least 2 ratings for kappa, got {got}")]
    TooFewRatings { topic: i64, got: usize },
    #[error("ratings line {line}: {reason}")]
    Ratings { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rough token count: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    pub topic_id: i64,
    pub chunks: Vec<Vec<String>>,
    pub token_budget: usize,
}

/// Packs abstracts greedily, in order, into chunks of at most
/// `token_budget` estimated tokens. An abstract larger than the budget gets
/// a chunk of its own.
pub fn plan_chunks(
    topic_id: i64,
    abstracts: &[(String, String)],
    token_budget: usize,
) -> Result<ChunkPlan, SummarizeError> {
    if abstracts.is_empty() {
        return Err(SummarizeError::EmptyTopic(topic_id));
    }
    let mut chunks: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut used = 0;
    for (id, text) in abstracts {
        let t = estimate_tokens(text);
        if t > token_budget {
            log::warn!("abstract `{id}` ({t} tokens) exceeds the chunk budget of {token_budget}");
        }
        if !current.is_empty() && used + t > token_budget {
            chunks.push(std::mem::take(&mut current));
            used = 0;
        }
        current.push(id.clone());
        used += t;
    }
    chunks.push(current);
    Ok(ChunkPlan {
        topic_id,
        chunks,
        token_budget,
    })
}

/// The map-step and reduce-step prompt templates. `{text}` marks where the
/// abstracts or partial summaries go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub chunk: String,
    pub reduce: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            chunk: include_str!("../../data/prompts/chunk_v1.txt").to_string(),
            reduce: include_str!("../../data/prompts/reduce_v1.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    pub fn load(chunk: &Path, reduce: &Path) -> Result<Self, SummarizeError> {
        Ok(PromptTemplates {
            chunk: std::fs::read_to_string(chunk)?,
            reduce: std::fs::read_to_string(reduce)?,
        })
    }

    /// 64-bit hash of both templates, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        let mut bytes = self.chunk.as_bytes().to_vec();
        bytes.push(0);
        bytes.extend_from_slice(self.reduce.as_bytes());
        format!("{:016x}", XxHash64::oneshot(0, &bytes))
    }

    fn render(template: &str, text: &str) -> String {
        template.replace("{text}", text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizerOptions {
    pub token_budget: usize,
    /// Chunk requests in flight at once.
    pub concurrency: usize,
    pub max_retries: u32,
    #[serde(with = "crate::embedding::duration_millis")]
    pub retry_backoff: Duration,
}

impl Default for SummarizerOptions {
    fn default() -> Self {
        SummarizerOptions {
            token_budget: DEFAULT_TOKEN_BUDGET,
            concurrency: 4,
            max_retries: 3,
            retry_backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDescription {
    pub topic_id: i64,
    pub title: String,
    pub summary: String,
    pub chunk_summaries: Vec<String>,
    pub model_name: String,
    pub prompt_fingerprint: String,
}

/// One request to the endpoint, successful or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub step: String,
    pub attempt: u32,
    pub prompt: String,
    pub response: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRun {
    pub description: TopicDescription,
    pub transcript: Vec<Exchange>,
}

fn complete_with_retries(
    client: &dyn LlmClient,
    step: &str,
    prompt: &str,
    options: &SummarizerOptions,
) -> (Result<String, SummarizeError>, Vec<Exchange>) {
    let mut log = Vec::new();
    for attempt in 1..=options.max_retries + 1 {
        let outcome = client.complete(prompt);
        log.push(Exchange {
            step: step.to_string(),
            attempt,
            prompt: prompt.to_string(),
            response: outcome.as_ref().ok().cloned(),
            error: outcome.as_ref().err().cloned(),
        });
        match outcome {
            Ok(text) => return (Ok(text), log),
            Err(e) if attempt <= options.max_retries => {
                let delay = options.retry_backoff * 2u32.pow(attempt - 1);
                log::warn!("{step}: attempt {attempt} failed ({e}); retrying in {delay:?}");
                thread::sleep(delay);
            }
            Err(e) => {
                return (
                    Err(SummarizeError::Endpoint {
                        step: step.to_string(),
                        reason: e,
                    }),
                    log,
                )
            }
        }
    }
    unreachable!("loop returns on the final attempt")
}

fn split_title(text: &str) -> Result<(String, String), SummarizeError> {
    let trimmed = text.trim();
    let (title, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
    let (title, summary) = (title.trim(), rest.trim());
    if title.is_empty() || summary.is_empty() {
        return Err(SummarizeError::MalformedCompletion(text.chars().take(200).collect()));
    }
    Ok((title.to_string(), summary.to_string()))
}

/// Summarizes each chunk, then merges the chunk summaries into a titled
/// description. The merge step runs even for a single chunk. Any step that
/// still fails after retries fails the whole topic.
pub fn summarize_topic(
    plan: &ChunkPlan,
    abstracts: &BTreeMap<String, String>,
    client: &dyn LlmClient,
    templates: &PromptTemplates,
    options: &SummarizerOptions,
) -> Result<SummaryRun, SummarizeError> {
    if plan.chunks.is_empty() {
        return Err(SummarizeError::EmptyTopic(plan.topic_id));
    }
    let mut prompts = Vec::with_capacity(plan.chunks.len());
    for chunk in &plan.chunks {
        let texts: Vec<&str> = chunk
            .iter()
            .map(|id| {
                abstracts
                    .get(id)
                    .map(|s| s.trim())
                    .ok_or_else(|| SummarizeError::UnknownAbstract(id.clone()))
            })
            .collect::<Result<_, _>>()?;
        prompts.push(PromptTemplates::render(&templates.chunk, &texts.join("\n\n")));
    }

    let width = options.concurrency.max(1);
    let mut transcript = Vec::new();
    let mut chunk_summaries = Vec::with_capacity(prompts.len());
    for (wave_idx, wave) in prompts.chunks(width).enumerate() {
        let results: Vec<_> = thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .enumerate()
                .map(|(k, prompt)| {
                    let step = format!("chunk-{}", wave_idx * width + k);
                    s.spawn(move || complete_with_retries(client, &step, prompt, options))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("chunk worker panicked"))
                .collect()
        });
        for (result, log) in results {
            transcript.extend(log);
            chunk_summaries.push(result?.trim().to_string());
        }
    }

    let reduce_prompt = PromptTemplates::render(&templates.reduce, &chunk_summaries.join("\n\n"));
    let (result, log) = complete_with_retries(client, "reduce", &reduce_prompt, options);
    transcript.extend(log);
    let (title, summary) = split_title(&result?)?;

    Ok(SummaryRun {
        description: TopicDescription {
            topic_id: plan.topic_id,
            title,
            summary,
            chunk_summaries,
            model_name: client.model_name().to_string(),
            prompt_fingerprint: templates.fingerprint(),
        },
        transcript,
    })
}

/// Writes one JSON line per exchange to `dir/topic_<id>.jsonl`.
pub fn write_transcript(dir: &Path, topic_id: i64, transcript: &[Exchange]) -> Result<(), SummarizeError> {
    std::fs::create_dir_all(dir)?;
    let mut out = String::new();
    for e in transcript {
        out.push_str(&serde_json::to_string(e).map_err(std::io::Error::other)?);
        out.push('\n');
    }
    std::fs::write(dir.join(format!("topic_{topic_id}.jsonl")), out)?;
    Ok(())
}
