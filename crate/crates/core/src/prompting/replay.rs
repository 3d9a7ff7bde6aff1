use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{CompletionProvider, ProviderError, ProviderKind, RequestRecord, StreamSink};

/// A recorded response: its chunks, the gaps between them, and optionally the
/// wall-clock time the original request took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub chunks: Vec<String>,
    #[serde(default)]
    pub delays_ms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
    /// Replays a failure after the chunks instead of completing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ProviderError>,
}

impl ReplayFixture {
    pub fn from_chunks<S: Into<String>>(chunks: impl IntoIterator<Item = S>) -> ReplayFixture {
        ReplayFixture {
            chunks: chunks.into_iter().map(Into::into).collect(),
            delays_ms: Vec::new(),
            elapsed_seconds: None,
            error: None,
        }
    }

    pub fn load(path: &Path) -> Result<ReplayFixture, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Recorded elapsed time, or the sum of the recorded delays.
    pub fn elapsed(&self) -> f64 {
        self.elapsed_seconds
            .unwrap_or_else(|| self.delays_ms.iter().sum::<f64>() / 1000.0)
    }

    pub fn full_text(&self) -> String {
        self.chunks.concat()
    }
}

/// Serves fixtures in order, wrapping around after the last one.
#[derive(Debug)]
pub struct ReplayProvider {
    fixtures: Vec<ReplayFixture>,
    next: AtomicUsize,
    realtime: bool,
    model_id: String,
}

impl ReplayProvider {
    pub fn new(fixtures: Vec<ReplayFixture>) -> ReplayProvider {
        ReplayProvider {
            fixtures,
            next: AtomicUsize::new(0),
            realtime: false,
            model_id: "replay".into(),
        }
    }

    /// Sleep for the recorded delays instead of replaying instantly.
    pub fn realtime(mut self, on: bool) -> ReplayProvider {
        self.realtime = on;
        self
    }

    pub fn with_model(mut self, model_id: &str) -> ReplayProvider {
        self.model_id = model_id.to_string();
        self
    }

    pub fn fixtures(&self) -> &[ReplayFixture] {
        &self.fixtures
    }
}

#[async_trait]
impl CompletionProvider for ReplayProvider {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Replay
    }

    async fn complete_streaming(&self, _prompt: &str, sink: &mut dyn StreamSink) -> RequestRecord {
        let mut record = RequestRecord {
            provider: ProviderKind::Replay,
            model_id: self.model_id.clone(),
            full_text: String::new(),
            elapsed_seconds: 0.0,
            chunk_count: 0,
            attempts: 1,
            error: None,
        };
        if self.fixtures.is_empty() {
            let err = ProviderError::new(super::ProviderErrorKind::Provider, "no replay fixtures loaded");
            sink.error(err.kind, &err.message);
            record.error = Some(err);
            return record;
        }
        let i = self.next.fetch_add(1, Ordering::SeqCst) % self.fixtures.len();
        let fixture = &self.fixtures[i];
        for (n, chunk) in fixture.chunks.iter().enumerate() {
            if self.realtime {
                if let Some(ms) = fixture.delays_ms.get(n) {
                    tokio::time::sleep(Duration::from_secs_f64(ms.max(0.0) / 1000.0)).await;
                }
            }
            sink.chunk(chunk);
            record.full_text.push_str(chunk);
            record.chunk_count += 1;
        }
        record.elapsed_seconds = fixture.elapsed();
        match &fixture.error {
            Some(err) => {
                sink.error(err.kind, &err.message);
                record.error = Some(err.clone());
            }
            None => sink.done(&record.full_text, record.elapsed_seconds),
        }
        record
    }
}
