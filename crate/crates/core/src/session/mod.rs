//! Iterative design sessions: prompts, generated variants, edits, favorites
//! and the activity log that records all of it.

mod stats;
mod verify;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;
use uuid::Uuid;

use crate::css::{parse_css, serialize_css, TypedValue};
use crate::lint::{lint, lint_candidate, LintReport};
use crate::prompting::{
    build_prompt, CompletionProvider, PromptError, PromptSpec, ProviderError, ProviderErrorKind,
    RequestRecord, StreamSink, TemplateVariant,
};
use crate::property_sheet::{apply_edit, EditError, EntrySource};
use crate::stream_parse::{DesignCandidate, ParseEvent, ParserState};
use crate::svg::{preprocess, ElementIndex, PreprocessResult, SvgError};

pub use stats::{compute_stats, SessionStats};
pub use verify::{replay_session, DesignCheck, ReplayReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("svg: {0}")]
    Svg(#[from] SvgError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("unknown design {0}")]
    UnknownDesign(Uuid),
    #[error("unknown iteration {0}")]
    UnknownIteration(usize),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("session log: {0}")]
    Schema(String),
    #[error("iteration {iteration} failed: {error}")]
    Provider { iteration: usize, error: ProviderError },
    #[error("iteration {iteration} produced no designs")]
    NoCandidates { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationKind {
    /// Submitted through a fresh prompt form.
    New,
    /// Same prompt text sent again.
    Regenerate,
    /// An earlier prompt edited and resubmitted.
    Reprompt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Code,
    Property,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub timestamp: i64,
    pub kind: EditKind,
    /// `css_current` after the edit.
    pub css: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<EntrySource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<TypedValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub id: Uuid,
    pub iteration: usize,
    /// Position within the response.
    pub ordinal: usize,
    pub scope_index: u32,
    pub css_original: String,
    pub css_current: String,
    pub explanation: String,
    pub lint: LintReport,
    pub edits: Vec<EditEvent>,
    #[serde(default)]
    pub malformed_style_tag: bool,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commentary: Option<String>,
}

impl Design {
    pub fn class_name(&self) -> String {
        crate::css::design_class(self.scope_index)
    }

    fn from_candidate(id: Uuid, iteration: usize, scope_index: u32, c: &DesignCandidate, index: &ElementIndex) -> Design {
        Design {
            id,
            iteration,
            ordinal: c.ordinal,
            scope_index,
            css_original: c.css_text.clone(),
            css_current: c.css_text.clone(),
            explanation: c.explanation.clone().unwrap_or_default(),
            lint: lint_candidate(c, index, scope_index),
            edits: Vec::new(),
            malformed_style_tag: c.malformed_style_tag,
            truncated: c.truncated,
            commentary: c.commentary.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub index: usize,
    pub kind: IterationKind,
    pub prompt_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_design: Option<Uuid>,
    /// The iteration this one regenerates or reprompts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_iteration: Option<usize>,
    pub template: TemplateVariant,
    pub started_at: i64,
    pub designs: Vec<Design>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<RequestRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl Iteration {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    SessionCreated,
    PromptSubmitted,
    ResponseChunkMeta,
    DesignCompleted,
    CodeEdit,
    PropertyEdit,
    FavoriteToggled,
    Regenerate,
    Export,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    /// Milliseconds since the Unix epoch.
    pub timestamp: i64,
    pub kind: LogKind,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: Uuid,
    /// The SVG as pasted, before preprocessing.
    pub svg_source: String,
    pub svg: PreprocessResult,
    pub iterations: Vec<Iteration>,
    pub favorites: BTreeSet<Uuid>,
    pub log: Vec<LogEvent>,
    pub created_at: i64,
}

#[derive(Serialize, Deserialize)]
struct SessionDocument {
    schema_version: u32,
    session: Session,
}

/// Parameters of one generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRequest {
    pub prompt_text: String,
    pub base_design: Option<Uuid>,
    pub template: TemplateVariant,
}

impl IterationRequest {
    pub fn new(prompt_text: impl Into<String>) -> IterationRequest {
        IterationRequest {
            prompt_text: prompt_text.into(),
            base_design: None,
            template: TemplateVariant::default(),
        }
    }

    pub fn extending(mut self, base: Uuid) -> IterationRequest {
        self.base_design = Some(base);
        self
    }
}

/// An iteration that has been validated and assigned its place in the
/// session, but not yet sent. Holds no borrow of the session, so the
/// request can stream while readers take snapshots.
#[derive(Debug, Clone)]
pub struct PendingIteration {
    pub index: usize,
    pub kind: IterationKind,
    pub prompt_text: String,
    pub base_design: Option<Uuid>,
    pub source_iteration: Option<usize>,
    pub template: TemplateVariant,
    /// The assembled prompt sent to the provider.
    pub prompt: String,
    pub first_scope: u32,
    pub started_at: i64,
    element_index: ElementIndex,
    session_id: Uuid,
}

/// Streamed output of a pending iteration, ready to commit.
#[derive(Debug, Clone)]
pub struct ExecutedIteration {
    pending: PendingIteration,
    record: RequestRecord,
    designs: Vec<Design>,
}

impl ExecutedIteration {
    pub fn designs(&self) -> &[Design] {
        &self.designs
    }

    pub fn record(&self) -> &RequestRecord {
        &self.record
    }
}

/// Receives generation progress as it happens.
pub trait IterationObserver: Send {
    fn chunk(&mut self, _text: &str) {}
    fn parse_event(&mut self, _event: &ParseEvent) {}
    /// A design whose CSS and explanation are both final.
    fn design(&mut self, _design: &Design) {}
}

impl IterationObserver for () {}

fn now_ms() -> i64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as i64)
}

fn word_normal(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Preprocesses `svg_text` and opens a session on it.
pub fn create_session(svg_text: &str) -> Result<Session, SessionError> {
    let svg = preprocess(svg_text)?;
    let created_at = now_ms();
    let mut session = Session {
        id: Uuid::new_v4(),
        svg_source: svg_text.to_string(),
        svg,
        iterations: Vec::new(),
        favorites: BTreeSet::new(),
        log: Vec::new(),
        created_at,
    };
    let payload = json!({
        "element_count": session.svg.index.entries.len(),
        "svg_chars": session.svg.stats.char_count,
        "warnings": session.svg.warnings.len(),
    });
    session.push_log(LogKind::SessionCreated, payload);
    Ok(session)
}

impl Session {
    pub fn index(&self) -> &ElementIndex {
        &self.svg.index
    }

    pub fn designs(&self) -> impl Iterator<Item = &Design> {
        self.iterations.iter().flat_map(|it| it.designs.iter())
    }

    pub fn design_count(&self) -> usize {
        self.iterations.iter().map(|it| it.designs.len()).sum()
    }

    pub fn design(&self, id: Uuid) -> Option<&Design> {
        self.designs().find(|d| d.id == id)
    }

    fn design_mut(&mut self, id: Uuid) -> Result<&mut Design, SessionError> {
        self.iterations
            .iter_mut()
            .flat_map(|it| it.designs.iter_mut())
            .find(|d| d.id == id)
            .ok_or(SessionError::UnknownDesign(id))
    }

    pub fn iteration(&self, n: usize) -> Option<&Iteration> {
        self.iterations.get(n)
    }

    /// Appends to the log, keeping timestamps nondecreasing.
    fn push_log(&mut self, kind: LogKind, payload: serde_json::Value) -> i64 {
        let floor = self.log.last().map_or(i64::MIN, |e| e.timestamp);
        let timestamp = now_ms().max(floor);
        self.log.push(LogEvent { timestamp, kind, payload });
        timestamp
    }

    /// Validates a request and reserves the next iteration slot.
    pub fn prepare_iteration(&mut self, request: IterationRequest) -> Result<PendingIteration, SessionError> {
        self.prepare(request, IterationKind::New, None)
    }

    /// Prepares a rerun of iteration `n`. Passing text that differs from the
    /// original (ignoring whitespace runs) makes it a reprompt.
    pub fn prepare_regenerate(&mut self, n: usize, modified_text: Option<&str>) -> Result<PendingIteration, SessionError> {
        let source = self.iterations.get(n).ok_or(SessionError::UnknownIteration(n))?;
        let (kind, text) = match modified_text {
            Some(t) if word_normal(t) != word_normal(&source.prompt_text) => (IterationKind::Reprompt, t.to_string()),
            _ => (IterationKind::Regenerate, source.prompt_text.clone()),
        };
        let request = IterationRequest {
            prompt_text: text,
            base_design: source.base_design,
            template: source.template,
        };
        self.prepare(request, kind, Some(n))
    }

    fn prepare(
        &mut self,
        request: IterationRequest,
        kind: IterationKind,
        source_iteration: Option<usize>,
    ) -> Result<PendingIteration, SessionError> {
        let extension_css = match request.base_design {
            Some(id) => Some(self.design(id).ok_or(SessionError::UnknownDesign(id))?.css_current.clone()),
            None => None,
        };
        let first_scope = self.design_count() as u32;
        let spec = PromptSpec {
            user_text: request.prompt_text.clone(),
            svg_text: self.svg.svg.clone(),
            existing_design_count: first_scope,
            extension_css,
        };
        let prompt = build_prompt(&spec, request.template)?;
        let index = self.iterations.len();
        let mut payload = json!({
            "iteration": index,
            "prompt_text": request.prompt_text,
            "iteration_kind": kind,
            "base_design": request.base_design,
            "existing_design_count": first_scope,
            "template": request.template,
        });
        if let Some(n) = source_iteration {
            payload["source_iteration"] = json!(n);
        }
        let log_kind = match kind {
            IterationKind::Regenerate => LogKind::Regenerate,
            IterationKind::New | IterationKind::Reprompt => LogKind::PromptSubmitted,
        };
        let started_at = self.push_log(log_kind, payload);
        Ok(PendingIteration {
            index,
            kind,
            prompt_text: request.prompt_text,
            base_design: request.base_design,
            source_iteration,
            template: request.template,
            prompt,
            first_scope,
            started_at,
            element_index: self.svg.index.clone(),
            session_id: self.id,
        })
    }

    /// Records an executed iteration. A failed request or a response with no
    /// style blocks is kept as a failed iteration without designs.
    pub fn commit(&mut self, executed: ExecutedIteration) -> Result<Iteration, SessionError> {
        let ExecutedIteration { pending, record, designs } = executed;
        if pending.session_id != self.id || pending.index != self.iterations.len() {
            return Err(SessionError::Schema("pending iteration does not belong at the end of this session".into()));
        }
        let index = pending.index;
        let mut meta = json!({
            "iteration": index,
            "provider": record.provider,
            "model_id": record.model_id,
            "chunk_count": record.chunk_count,
            "bytes": record.full_text.len(),
            "elapsed_seconds": record.elapsed_seconds,
            "attempts": record.attempts,
        });
        if let Some(err) = &record.error {
            meta["error"] = json!(err);
        }
        self.push_log(LogKind::ResponseChunkMeta, meta);

        let outcome = match (&record.error, designs.is_empty()) {
            (Some(err), _) => Err(SessionError::Provider { iteration: index, error: err.clone() }),
            (None, true) => Err(SessionError::NoCandidates { iteration: index }),
            (None, false) => Ok(()),
        };
        let designs = if outcome.is_ok() { designs } else { Vec::new() };
        for d in &designs {
            self.push_log(
                LogKind::DesignCompleted,
                json!({
                    "iteration": index,
                    "design_id": d.id,
                    "ordinal": d.ordinal,
                    "scope_index": d.scope_index,
                    "error_count": d.lint.error_count,
                    "warning_count": d.lint.warning_count,
                }),
            );
        }
        let iteration = Iteration {
            index,
            kind: pending.kind,
            prompt_text: pending.prompt_text,
            base_design: pending.base_design,
            source_iteration: pending.source_iteration,
            template: pending.template,
            started_at: pending.started_at,
            designs,
            request: Some(record),
            failure: outcome.as_ref().err().map(|e| e.to_string()),
        };
        self.iterations.push(iteration.clone());
        outcome.map(|_| iteration)
    }

    /// prepare, execute and commit in one call.
    pub async fn run_iteration(
        &mut self,
        provider: &dyn CompletionProvider,
        request: IterationRequest,
    ) -> Result<Iteration, SessionError> {
        let pending = self.prepare_iteration(request)?;
        let executed = pending.execute(provider, &mut ()).await;
        self.commit(executed)
    }

    pub async fn regenerate(
        &mut self,
        provider: &dyn CompletionProvider,
        n: usize,
        modified_text: Option<&str>,
    ) -> Result<Iteration, SessionError> {
        let pending = self.prepare_regenerate(n, modified_text)?;
        let executed = pending.execute(provider, &mut ()).await;
        self.commit(executed)
    }

    /// Replaces a design's CSS with hand-edited text and re-lints it.
    pub fn apply_code_edit(&mut self, design_id: Uuid, new_css: &str) -> Result<Design, SessionError> {
        let index = self.svg.index.clone();
        let design = self.design_mut(design_id)?;
        let timestamp = now_ms();
        design.css_current = new_css.to_string();
        design.lint = lint(&parse_css(new_css).sheet, &index, design.scope_index);
        design.edits.push(EditEvent {
            timestamp,
            kind: EditKind::Code,
            css: new_css.to_string(),
            source: None,
            value: None,
        });
        let updated = design.clone();
        let ts = self.push_log(
            LogKind::CodeEdit,
            json!({"design_id": design_id, "css": new_css}),
        );
        self.stamp_last_edit(design_id, ts);
        Ok(updated)
    }

    /// Edits one declaration through the property sheet; the CSS is
    /// rewritten in canonical form.
    pub fn apply_property_edit(
        &mut self,
        design_id: Uuid,
        source: &EntrySource,
        value: &TypedValue,
    ) -> Result<Design, SessionError> {
        let index = self.svg.index.clone();
        let design = self.design_mut(design_id)?;
        let sheet = parse_css(&design.css_current).sheet;
        let edited = apply_edit(&sheet, source, value)?;
        let css = serialize_css(&edited);
        design.lint = lint(&parse_css(&css).sheet, &index, design.scope_index);
        design.css_current = css.clone();
        design.edits.push(EditEvent {
            timestamp: now_ms(),
            kind: EditKind::Property,
            css,
            source: Some(source.clone()),
            value: Some(value.clone()),
        });
        let ts = self.push_log(
            LogKind::PropertyEdit,
            json!({
                "design_id": design_id,
                "property": source.property,
                "path": source.path,
                "value": value,
            }),
        );
        self.stamp_last_edit(design_id, ts);
        Ok(self.design(design_id).cloned().expect("design exists"))
    }

    fn stamp_last_edit(&mut self, design_id: Uuid, timestamp: i64) {
        if let Ok(d) = self.design_mut(design_id) {
            if let Some(e) = d.edits.last_mut() {
                e.timestamp = timestamp;
            }
        }
    }

    /// Stars or unstars a design; returns whether it is now a favorite.
    pub fn toggle_favorite(&mut self, design_id: Uuid) -> Result<bool, SessionError> {
        if self.design(design_id).is_none() {
            return Err(SessionError::UnknownDesign(design_id));
        }
        let now = if self.favorites.remove(&design_id) {
            false
        } else {
            self.favorites.insert(design_id);
            true
        };
        self.push_log(
            LogKind::FavoriteToggled,
            json!({"design_id": design_id, "favorite": now}),
        );
        Ok(now)
    }

    /// Logs the export and returns the session as a versioned JSON document.
    pub fn export_log(&mut self) -> Vec<u8> {
        self.push_log(
            LogKind::Export,
            json!({
                "iteration_count": self.iterations.len(),
                "design_count": self.design_count(),
                "favorites": self.favorites,
            }),
        );
        self.to_document()
    }

    /// The versioned document without logging an export.
    pub fn to_document(&self) -> Vec<u8> {
        let doc = SessionDocument {
            schema_version: SCHEMA_VERSION,
            session: self.clone(),
        };
        serde_json::to_vec_pretty(&doc).expect("session serializes")
    }

    pub fn import_log(bytes: &[u8]) -> Result<Session, SessionError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| SessionError::Schema(format!("not a session document: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(SessionError::Schema(format!("unsupported schema_version {v}"))),
            None => return Err(SessionError::Schema("missing schema_version".into())),
        }
        let doc: SessionDocument =
            serde_json::from_value(value).map_err(|e| SessionError::Schema(e.to_string()))?;
        doc.session.check()?;
        Ok(doc.session)
    }

    /// Structural invariants an imported session must satisfy.
    pub fn check(&self) -> Result<(), SessionError> {
        let bad = |m: String| Err(SessionError::Schema(m));
        for (n, scope) in self.designs().map(|d| d.scope_index).enumerate() {
            if scope as usize != n {
                return bad(format!("design {n} has scope index {scope}"));
            }
        }
        for (n, it) in self.iterations.iter().enumerate() {
            if it.index != n {
                return bad(format!("iteration {n} is numbered {}", it.index));
            }
            if let Some(base) = it.base_design {
                if !self.iterations[..n].iter().any(|p| p.designs.iter().any(|d| d.id == base)) {
                    return bad(format!("iteration {n} extends a design not generated before it"));
                }
            }
        }
        if let Some(f) = self.favorites.iter().find(|f| self.design(**f).is_none()) {
            return bad(format!("favorite {f} is not a design"));
        }
        if self.log.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
            return bad("log timestamps decrease".into());
        }
        Ok(())
    }
}

/// Feeds provider chunks through the response parser, releasing each design
/// to the observer once nothing later in the stream can change it.
struct IterationSink<'a> {
    parser: ParserState,
    observer: &'a mut dyn IterationObserver,
    pending: &'a PendingIteration,
    ids: Vec<Uuid>,
    released: usize,
}

impl IterationSink<'_> {
    fn id_for(&mut self, ordinal: usize) -> Uuid {
        while self.ids.len() <= ordinal {
            self.ids.push(Uuid::new_v4());
        }
        self.ids[ordinal]
    }

    fn release_through(&mut self, count: usize) {
        while self.released < count.min(self.parser.completed().len()) {
            let c = self.parser.completed()[self.released].clone();
            let id = self.id_for(c.ordinal);
            let design = Design::from_candidate(
                id,
                self.pending.index,
                self.pending.first_scope + c.ordinal as u32,
                &c,
                &self.pending.element_index,
            );
            self.observer.design(&design);
            self.released += 1;
        }
    }

    fn handle(&mut self, events: Vec<ParseEvent>) {
        for event in events {
            self.observer.parse_event(&event);
            match &event {
                ParseEvent::StyleOpened { ordinal } => self.release_through(*ordinal),
                ParseEvent::ExplanationComplete { ordinal, .. } => self.release_through(ordinal + 1),
                ParseEvent::DelimiterSeen => self.release_through(usize::MAX),
                ParseEvent::SnippetComplete { .. } => {}
            }
        }
    }
}

impl StreamSink for IterationSink<'_> {
    fn chunk(&mut self, text: &str) {
        self.observer.chunk(text);
        let events = self.parser.feed(text);
        self.handle(events);
    }

    fn done(&mut self, _full_text: &str, _elapsed_seconds: f64) {
        let events = self.parser.finish();
        self.handle(events);
        self.release_through(usize::MAX);
    }

    fn error(&mut self, _kind: ProviderErrorKind, _message: &str) {}
}

impl PendingIteration {
    /// Streams the prompt through `provider`. Designs are built from the
    /// whole response once it has ended.
    pub async fn execute(self, provider: &dyn CompletionProvider, observer: &mut dyn IterationObserver) -> ExecutedIteration {
        let mut sink = IterationSink {
            parser: ParserState::new(),
            observer,
            pending: &self,
            ids: Vec::new(),
            released: 0,
        };
        let record = provider.complete_streaming(&self.prompt, &mut sink).await;
        let designs = if record.succeeded() {
            let mut ids = std::mem::take(&mut sink.ids);
            let candidates = sink.parser.clone().into_candidates();
            candidates
                .iter()
                .map(|c| {
                    while ids.len() <= c.ordinal {
                        ids.push(Uuid::new_v4());
                    }
                    Design::from_candidate(
                        ids[c.ordinal],
                        self.index,
                        self.first_scope + c.ordinal as u32,
                        c,
                        &self.element_index,
                    )
                })
                .collect()
        } else {
            Vec::new()
        };
        ExecutedIteration {
            pending: self,
            record,
            designs,
        }
    }
}
