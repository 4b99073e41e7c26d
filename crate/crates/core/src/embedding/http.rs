//! Client for the `/embed` service contract.
//!
//! Request: `{"inputs":[{"id":..,"text":..}]}`
//! Response: `{"dim":D,"vectors":[{"id":..,"v":[..]}]}`

use std::collections::HashMap;
use std::thread;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingKind, EmbeddingMatrix, EmbeddingProviderConfig, ProviderMode};

const MAX_RETRIES: u32 = 3;

#[derive(Serialize)]
struct EmbedInput<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    inputs: Vec<EmbedInput<'a>>,
}

#[derive(Deserialize)]
struct EmbedVector {
    id: String,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<EmbedVector>,
}

enum Attempt {
    Retry(EmbeddingError),
    Fatal(EmbeddingError),
}

type BatchResult = Result<(usize, Vec<Vec<f64>>), EmbeddingError>;

fn body_prefix(s: String) -> String {
    s.chars().take(200).collect()
}

fn post_once(
    agent: &ureq::Agent,
    url: &str,
    token: Option<&str>,
    batch: &[(String, String)],
) -> Result<EmbedResponse, Attempt> {
    let body = EmbedRequest {
        inputs: batch.iter().map(|(id, text)| EmbedInput { id, text }).collect(),
    };
    let mut req = agent.post(url).set("Content-Type", "application/json");
    if let Some(t) = token {
        req = req.set("Authorization", &format!("Bearer {t}"));
    }
    let payload = serde_json::to_string(&body).expect("request serializes");
    match req.send_string(&payload) {
        Ok(resp) => {
            let status = resp.status();
            let text = resp
                .into_string()
                .map_err(|e| Attempt::Retry(EmbeddingError::Unreachable(e.to_string())))?;
            serde_json::from_str(&text).map_err(|_| {
                Attempt::Fatal(EmbeddingError::BadResponse {
                    status,
                    body: body_prefix(text),
                })
            })
        }
        Err(ureq::Error::Status(status, resp)) => {
            let err = EmbeddingError::BadResponse {
                status,
                body: body_prefix(resp.into_string().unwrap_or_default()),
            };
            if status >= 500 || status == 429 {
                Err(Attempt::Retry(err))
            } else {
                Err(Attempt::Fatal(err))
            }
        }
        Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(EmbeddingError::Unreachable(t.to_string()))),
    }
}

fn fetch_batch(
    agent: &ureq::Agent,
    url: &str,
    token: Option<&str>,
    batch: &[(String, String)],
    config: &EmbeddingProviderConfig,
) -> Result<(usize, Vec<Vec<f64>>), EmbeddingError> {
    let mut attempt = 0;
    let resp = loop {
        match post_once(agent, url, token, batch) {
            Ok(r) => break r,
            Err(Attempt::Fatal(e)) => return Err(e),
            Err(Attempt::Retry(e)) => {
                if attempt >= MAX_RETRIES {
                    return Err(e);
                }
                let delay = config.backoff * 2u32.pow(attempt);
                log::warn!("embedding batch failed ({e}); retrying in {delay:?}");
                thread::sleep(delay);
                attempt += 1;
            }
        }
    };
    let mut by_id: HashMap<String, Vec<f64>> = resp.vectors.into_iter().map(|v| (v.id, v.v)).collect();
    let missing: Vec<String> = batch
        .iter()
        .filter(|(id, _)| !by_id.contains_key(id))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EmbeddingError::PartialResponse(missing));
    }
    let rows = batch
        .iter()
        .map(|(id, _)| by_id.remove(id).expect("checked above"))
        .collect();
    Ok((resp.dim, rows))
}

/// Embeds `texts` through the HTTP service. Batches run up to
/// `config.concurrency` at a time; rows come back in input order. Any batch
/// failing after retries fails the whole call.
pub fn fetch_embeddings(
    texts: &[(String, String)],
    config: &EmbeddingProviderConfig,
    kind: EmbeddingKind,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    config.validate()?;
    if config.mode != ProviderMode::Http {
        return Err(EmbeddingError::Config("fetch_embeddings requires http mode".into()));
    }
    let base = config.endpoint.as_deref().expect("validated").trim_end_matches('/');
    let url = format!("{base}/embed");
    let token = std::env::var(&config.auth_token_env).ok().filter(|t| !t.is_empty());
    let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();

    let batches: Vec<&[(String, String)]> = texts.chunks(config.batch_size).collect();
    let mut results: Vec<Option<BatchResult>> = (0..batches.len()).map(|_| None).collect();
    for (wave_idx, wave) in batches.chunks(config.concurrency.max(1)).enumerate() {
        let offset = wave_idx * config.concurrency.max(1);
        let outcomes: Vec<_> = thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .map(|batch| {
                    let (agent, url, token) = (&agent, &url, token.as_deref());
                    s.spawn(move || fetch_batch(agent, url, token, batch, config))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("batch thread panicked"))
                .collect()
        });
        for (i, o) in outcomes.into_iter().enumerate() {
            results[offset + i] = Some(o);
        }
    }

    let mut dim = None;
    let mut rows = Vec::with_capacity(texts.len());
    for (i, r) in results.into_iter().enumerate() {
        let (d, batch_rows) = r.expect("every batch ran")?;
        match dim {
            None => dim = Some(d),
            Some(prev) if prev != d => {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: prev,
                    got: d,
                    line: i + 1,
                })
            }
            _ => {}
        }
        rows.extend(batch_rows);
    }
    let ids = texts.iter().map(|(id, _)| id.clone()).collect();
    EmbeddingMatrix::new(ids, rows, dim.unwrap_or(1), kind)
}
