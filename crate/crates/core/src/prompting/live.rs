use std::time::{Duration, Instant};

use async_trait::async_trait;
use futures::StreamExt;
use serde_json::json;

use super::sse::{delta_content, SseDecoder};
use super::{
    CompletionProvider, ProviderConfig, ProviderError, ProviderErrorKind, ProviderKind,
    RequestRecord, StreamSink,
};

/// Chat-completion endpoint speaking the OpenAI streaming protocol.
#[derive(Debug, Clone)]
pub struct LiveProvider {
    config: ProviderConfig,
    client: reqwest::Client,
}

enum AttemptError {
    /// Nothing was streamed yet; another attempt may follow.
    Retryable(ProviderError),
    Fatal(ProviderError),
}

const MAX_BODY_IN_ERROR: usize = 500;

impl LiveProvider {
    pub fn new(config: ProviderConfig) -> Result<LiveProvider, String> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .build()
            .map_err(|e| format!("http client: {e}"))?;
        Ok(LiveProvider { config, client })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn request_body(&self, prompt: &str) -> serde_json::Value {
        json!({
            "model": self.config.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "stream": true,
        })
    }

    async fn attempt(
        &self,
        key: &str,
        prompt: &str,
        sink: &mut dyn StreamSink,
        record: &mut RequestRecord,
    ) -> Result<(), AttemptError> {
        let response = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(key)
            .header("accept", "text/event-stream")
            .json(&self.request_body(prompt))
            .send()
            .await
            .map_err(|e| AttemptError::Retryable(ProviderError::new(ProviderErrorKind::Network, e.without_url().to_string())))?;

        let status = response.status();
        if !status.is_success() {
            let body = response.text().await.unwrap_or_default();
            let body: String = body.chars().take(MAX_BODY_IN_ERROR).collect();
            let kind = match status.as_u16() {
                401 | 403 => ProviderErrorKind::Auth,
                _ => ProviderErrorKind::Provider,
            };
            let err = ProviderError {
                kind,
                message: format!("status {}: {}", status.as_u16(), body),
                status: Some(status.as_u16()),
            };
            return Err(if status.is_server_error() {
                AttemptError::Retryable(err)
            } else {
                AttemptError::Fatal(err)
            });
        }

        let mut decoder = SseDecoder::new();
        let mut body = response.bytes_stream();
        let mut finished = false;
        while !finished {
            let Some(next) = body.next().await else { break };
            let bytes = next.map_err(|e| {
                let err = ProviderError::new(ProviderErrorKind::Network, e.without_url().to_string());
                if record.chunk_count == 0 {
                    AttemptError::Retryable(err)
                } else {
                    AttemptError::Fatal(err)
                }
            })?;
            for payload in decoder.feed(&bytes) {
                if payload.trim() == "[DONE]" {
                    finished = true;
                    break;
                }
                if let Some(text) = delta_content(&payload).filter(|t| !t.is_empty()) {
                    sink.chunk(&text);
                    record.full_text.push_str(&text);
                    record.chunk_count += 1;
                }
            }
        }
        if !finished {
            for payload in decoder.finish() {
                if let Some(text) = delta_content(&payload).filter(|t| !t.is_empty()) {
                    sink.chunk(&text);
                    record.full_text.push_str(&text);
                    record.chunk_count += 1;
                }
            }
        }
        Ok(())
    }
}

#[async_trait]
impl CompletionProvider for LiveProvider {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Live
    }

    async fn complete_streaming(&self, prompt: &str, sink: &mut dyn StreamSink) -> RequestRecord {
        let start = Instant::now();
        let mut record = RequestRecord {
            provider: ProviderKind::Live,
            model_id: self.config.model_id.clone(),
            full_text: String::new(),
            elapsed_seconds: 0.0,
            chunk_count: 0,
            attempts: 0,
            error: None,
        };
        let Some(key) = self.config.credential_ref.resolve() else {
            let err = ProviderError::new(
                ProviderErrorKind::Auth,
                format!("environment variable {} is not set", self.config.credential_ref.0),
            );
            sink.error(err.kind, &err.message);
            record.error = Some(err);
            return record;
        };

        let outcome = loop {
            record.attempts += 1;
            let attempt = tokio::time::timeout(
                self.config.request_timeout(),
                self.attempt(&key, prompt, sink, &mut record),
            )
            .await;
            match attempt {
                Ok(Ok(())) => break Ok(()),
                Err(_) => {
                    break Err(ProviderError::new(
                        ProviderErrorKind::Timeout,
                        format!("no complete response within {}s", self.config.request_timeout_seconds),
                    ))
                }
                Ok(Err(AttemptError::Fatal(e))) => break Err(e),
                Ok(Err(AttemptError::Retryable(e))) => {
                    if record.attempts > self.config.max_retries {
                        break Err(e);
                    }
                    let backoff = self.config.retry_backoff_seconds * 2f64.powi(record.attempts as i32 - 1);
                    tracing::warn!(attempt = record.attempts, kind = ?e.kind, "completion request failed, retrying");
                    tokio::time::sleep(Duration::from_secs_f64(backoff)).await;
                }
            }
        };
        record.elapsed_seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => sink.done(&record.full_text, record.elapsed_seconds),
            Err(e) => {
                sink.error(e.kind, &e.message);
                record.error = Some(e);
            }
        }
        record
    }
}
