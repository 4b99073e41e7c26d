//! Chat-completion clients.

use std::time::Duration;

use serde::{Deserialize, Serialize};

/// A text-in, text-out completion endpoint.
pub trait LlmClient: Sync {
    fn model_name(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; requests go to `{endpoint}/v1/chat`.
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    #[serde(with = "crate::embedding::duration_secs")]
    pub timeout: Duration,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: String::new(),
            model: "mock".into(),
            api_key_env: "LLM_API_KEY".into(),
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
}

#[derive(Deserialize)]
struct ChatResponse {
    content: String,
}

/// Client for `POST {endpoint}/v1/chat`.
pub struct HttpLlmClient {
    config: LlmConfig,
    agent: ureq::Agent,
    url: String,
}

impl HttpLlmClient {
    pub fn new(config: LlmConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let url = format!("{}/v1/chat", config.endpoint.trim_end_matches('/'));
        HttpLlmClient { config, agent, url }
    }
}

impl LlmClient for HttpLlmClient {
    fn model_name(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, prompt: &str) -> Result<String, String> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [Message {
                role: "user",
                content: prompt,
            }],
        };
        let mut req = self.agent.post(&self.url);
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            if !key.is_empty() {
                req = req.set("Authorization", &format!("Bearer {key}"));
            }
        }
        let resp = req.send_json(&body).map_err(|e| e.to_string())?;
        let parsed: ChatResponse = resp.into_json().map_err(|e| format!("bad response body: {e}"))?;
        Ok(parsed.content)
    }
}

/// Deterministic offline stand-in. It reads the text after the prompt's
/// `---` separator line and answers with that text's first sentence as the
/// title line, followed by the first sentence of every paragraph.
#[derive(Debug, Clone)]
pub struct MockLlmClient {
    name: String,
}

impl MockLlmClient {
    pub fn new(name: impl Into<String>) -> Self {
        MockLlmClient { name: name.into() }
    }
}

impl Default for MockLlmClient {
    fn default() -> Self {
        MockLlmClient::new("mock")
    }
}

/// Text up to and including the first `.`, `!` or `?` that ends a word,
/// within the first line.
pub fn first_sentence(text: &str) -> &str {
    let line = text.trim_start().lines().next().unwrap_or("").trim();
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?') && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()) {
            return &line[..=i];
        }
    }
    line
}

fn payload(prompt: &str) -> &str {
    match prompt.rfind("\n---\n") {
        Some(i) => &prompt[i + 5..],
        None => prompt,
    }
}

impl LlmClient for MockLlmClient {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str) -> Result<String, String> {
        let text = payload(prompt);
        let title = first_sentence(text);
        let body: Vec<&str> = text
            .split("\n\n")
            .map(first_sentence)
            .filter(|s| !s.is_empty())
            .collect();
        Ok(format!("{title}\n{}", body.join(" ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences() {
        assert_eq!(first_sentence("Floods rose. Then fell."), "Floods rose.");
        assert_eq!(first_sentence("Version 2.5 shipped! ok"), "Version 2.5 shipped!");
        assert_eq!(first_sentence("no stop here\nsecond"), "no stop here");
        assert_eq!(first_sentence(""), "");
    }

    #[test]
    fn mock_answer_shape() {
        let m = MockLlmClient::default();
        let out = m.complete("instructions\n---\nA one. A two.\n\nB one. B two.").unwrap();
        assert_eq!(out, "A one.\nA one. B one.");
    }
}
