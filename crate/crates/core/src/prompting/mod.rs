//! Prompt assembly and completion providers.

mod live;
mod replay;
mod sse;

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

pub use live::LiveProvider;
pub use replay::{ReplayFixture, ReplayProvider};
pub use sse::SseDecoder;

const INITIAL: &str = include_str!("../../templates/initial.txt");
const EXTENSION: &str = include_str!("../../templates/extension.txt");
const INITIAL_CORRECTED: &str = include_str!("../../templates/initial_corrected.txt");
const EXTENSION_CORRECTED: &str = include_str!("../../templates/extension_corrected.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub user_text: String,
    pub svg_text: String,
    pub existing_design_count: u32,
    /// CSS of the design being iterated on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension_css: Option<String>,
}

/// Which wording of the instructions to send.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateVariant {
    /// The original wording, typos included.
    #[default]
    Verbatim,
    /// Same instructions with spelling and grammar fixed.
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("an extension prompt needs the existing CSS")]
    MissingExtensionCss,
    #[error("an initial prompt cannot carry existing CSS")]
    UnexpectedExtensionCss,
}

/// Substitutes `{name}` placeholders in one pass over the template, so
/// placeholder-like text inside the values is left alone.
fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        match values
            .iter()
            .find(|(k, _)| tail[1..].starts_with(k) && tail[1 + k.len()..].starts_with('}'))
        {
            Some((k, v)) => {
                out.push_str(v);
                rest = &tail[k.len() + 2..];
            }
            None => {
                out.push('{');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn initial_text(spec: &PromptSpec, variant: TemplateVariant) -> Result<String, PromptError> {
    if spec.user_text.trim().is_empty() {
        return Err(PromptError::EmptyPrompt);
    }
    let template = match variant {
        TemplateVariant::Verbatim => INITIAL,
        TemplateVariant::Corrected => INITIAL_CORRECTED,
    };
    let count = spec.existing_design_count.to_string();
    Ok(render(
        template,
        &[
            ("user_prompt", spec.user_text.as_str()),
            ("existing_design_count", count.as_str()),
            ("svg", spec.svg_text.as_str()),
        ],
    ))
}

fn extension_css(spec: &PromptSpec) -> Option<&str> {
    spec.extension_css.as_deref().filter(|c| !c.trim().is_empty())
}

pub fn build_initial_prompt(spec: &PromptSpec, variant: TemplateVariant) -> Result<String, PromptError> {
    if extension_css(spec).is_some() {
        return Err(PromptError::UnexpectedExtensionCss);
    }
    initial_text(spec, variant)
}

pub fn build_extension_prompt(spec: &PromptSpec, variant: TemplateVariant) -> Result<String, PromptError> {
    let mut text = initial_text(spec, variant)?;
    let css = extension_css(spec).ok_or(PromptError::MissingExtensionCss)?;
    let template = match variant {
        TemplateVariant::Verbatim => EXTENSION,
        TemplateVariant::Corrected => EXTENSION_CORRECTED,
    };
    let count = spec.existing_design_count.to_string();
    text.push_str(&render(
        template,
        &[("existing_css", css), ("existing_design_count", count.as_str())],
    ));
    Ok(text)
}

/// Initial or extension prompt depending on whether existing CSS is present.
pub fn build_prompt(spec: &PromptSpec, variant: TemplateVariant) -> Result<String, PromptError> {
    if extension_css(spec).is_some() {
        build_extension_prompt(spec, variant)
    } else {
        build_initial_prompt(spec, variant)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Live,
    #[default]
    Replay,
}

/// Names the environment variable holding the API key. The key itself is
/// read at request time and never stored.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialRef(pub String);

impl Default for CredentialRef {
    fn default() -> Self {
        CredentialRef("KEYFRAMER_API_KEY".into())
    }
}

impl std::fmt::Debug for CredentialRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CredentialRef(${})", self.0)
    }
}

impl CredentialRef {
    pub(crate) fn resolve(&self) -> Option<String> {
        std::env::var(&self.0).ok().filter(|k| !k.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub provider: ProviderKind,
    pub model_id: String,
    /// 0.0 ..= 2.0
    pub temperature: f64,
    pub max_tokens: u32,
    pub endpoint: String,
    pub credential_ref: CredentialRef,
    pub request_timeout_seconds: f64,
    /// Base of the exponential backoff between retries.
    pub retry_backoff_seconds: f64,
    pub max_retries: u32,
    pub template: TemplateVariant,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            provider: ProviderKind::Replay,
            model_id: "gpt-4".into(),
            temperature: 0.7,
            max_tokens: 2048,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            credential_ref: CredentialRef::default(),
            request_timeout_seconds: 120.0,
            retry_backoff_seconds: 1.0,
            max_retries: 2,
            template: TemplateVariant::Verbatim,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} is outside [0, 2]", self.temperature));
        }
        if self.request_timeout_seconds <= 0.0 {
            return Err("request timeout must be positive".into());
        }
        if self.retry_backoff_seconds < 0.0 {
            return Err("retry backoff must not be negative".into());
        }
        Ok(())
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.request_timeout_seconds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderErrorKind {
    Network,
    Auth,
    Timeout,
    Provider,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{kind:?} error: {message}")]
pub struct ProviderError {
    pub kind: ProviderErrorKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
}

impl ProviderError {
    pub fn new(kind: ProviderErrorKind, message: impl Into<String>) -> ProviderError {
        ProviderError {
            kind,
            message: message.into(),
            status: None,
        }
    }
}

/// Receives a streamed completion. Exactly one of `done` or `error` is
/// called, after all chunks.
pub trait StreamSink: Send {
    fn chunk(&mut self, text: &str);
    fn done(&mut self, full_text: &str, elapsed_seconds: f64);
    fn error(&mut self, kind: ProviderErrorKind, message: &str);
}

/// Sink that records everything it is given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollectSink {
    pub chunks: Vec<String>,
    pub done: Option<(String, f64)>,
    pub error: Option<(ProviderErrorKind, String)>,
}

impl StreamSink for CollectSink {
    fn chunk(&mut self, text: &str) {
        self.chunks.push(text.to_string());
    }

    fn done(&mut self, full_text: &str, elapsed_seconds: f64) {
        self.done = Some((full_text.to_string(), elapsed_seconds));
    }

    fn error(&mut self, kind: ProviderErrorKind, message: &str) {
        self.error = Some((kind, message.to_string()));
    }
}

/// What is kept about one completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub provider: ProviderKind,
    pub model_id: String,
    pub full_text: String,
    pub elapsed_seconds: f64,
    pub chunk_count: usize,
    /// Attempts made, including the successful one.
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ProviderError>,
}

impl RequestRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[async_trait]
pub trait CompletionProvider: Send + Sync {
    fn kind(&self) -> ProviderKind;

    /// Streams one completion into `sink`. The returned record carries the
    /// error, if any, that was also reported through `sink.error`.
    async fn complete_streaming(&self, prompt: &str, sink: &mut dyn StreamSink) -> RequestRecord;
}

/// Builds the provider named by `config`.
pub fn provider_from_config(
    config: &ProviderConfig,
    replay_fixtures: &[std::path::PathBuf],
) -> Result<std::sync::Arc<dyn CompletionProvider>, String> {
    config.validate()?;
    Ok(match config.provider {
        ProviderKind::Live => std::sync::Arc::new(LiveProvider::new(config.clone())?),
        ProviderKind::Replay => {
            let fixtures = replay_fixtures
                .iter()
                .map(|p| ReplayFixture::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            std::sync::Arc::new(ReplayProvider::new(fixtures).with_model(&config.model_id))
        }
    })
}
