//! Incremental parser for streamed responses made of
//! `<style>…</style>`, `<explanation>…</explanation>` and `-----` delimiters.
//!
//! The parser only acts on text it has fully seen: a tag split across chunks,
//! or a line that might still turn into a delimiter, stays buffered until the
//! next chunk decides it. Any partition of a response into chunks therefore
//! yields the same events as feeding it whole.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignCandidate {
    /// 0-based position within the response.
    pub ordinal: usize,
    /// Contents of the style block, without the wrapper.
    pub css_text: String,
    pub explanation: Option<String>,
    /// The block was opened or closed with `<stle>` instead of `<style>`.
    pub malformed_style_tag: bool,
    /// The response ended before the block was closed.
    #[serde(default)]
    pub truncated: bool,
    /// The block followed another one with no delimiter in between.
    #[serde(default)]
    pub undelimited: bool,
    /// Free text around the block that is neither CSS nor explanation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commentary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ParseEvent {
    StyleOpened { ordinal: usize },
    SnippetComplete { candidate: DesignCandidate },
    ExplanationComplete { ordinal: usize, text: String },
    DelimiterSeen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Scanning,
    InStyle { malformed: bool },
    AfterStyle,
    InExplanation,
}

#[derive(Debug, Clone)]
pub struct ParserState {
    buffer: String,
    mode: Mode,
    completed: Vec<DesignCandidate>,
    /// Bytes of the response consumed so far.
    cursor: usize,
    commentary: Vec<String>,
    /// Mode to return to after an explanation block.
    resume: Mode,
    /// The open style block was not preceded by a delimiter since the last block.
    undelimited: bool,
}

impl Default for ParserState {
    fn default() -> Self {
        ParserState::new()
    }
}

enum Tag {
    StyleOpen { malformed: bool },
    ExplanationOpen,
}

const STYLE_OPENERS: [(&str, bool); 2] = [("<style", false), ("<stle", true)];
const STYLE_CLOSERS: [(&str, bool); 2] = [("</style>", false), ("</stle>", true)];
const EXPLANATION_OPEN: &str = "<explanation>";
const EXPLANATION_CLOSE: &str = "</explanation>";

/// A line made only of five or more dashes, ignoring surrounding whitespace.
pub fn is_delimiter_line(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 5 && t.bytes().all(|b| b == b'-')
}

/// Finds the earliest opening tag in `lower`; returns (start, end, tag).
fn find_open_tag(lower: &str) -> Option<(usize, usize, Tag)> {
    let mut best: Option<(usize, usize, Tag)> = None;
    let mut consider = |start: usize, end: usize, tag: Tag| {
        if best.as_ref().is_none_or(|(s, _, _)| start < *s) {
            best = Some((start, end, tag));
        }
    };
    for (opener, malformed) in STYLE_OPENERS {
        let mut from = 0;
        while let Some(pos) = lower[from..].find(opener).map(|p| p + from) {
            let after = pos + opener.len();
            match lower.as_bytes().get(after) {
                Some(b'>') => {
                    consider(pos, after + 1, Tag::StyleOpen { malformed });
                    break;
                }
                Some(b) if b.is_ascii_whitespace() => {
                    if let Some(close) = lower[after..].find('>') {
                        consider(pos, after + close + 1, Tag::StyleOpen { malformed });
                        break;
                    }
                    // attributes not finished yet
                    from = after;
                }
                _ => from = after,
            }
        }
    }
    if let Some(pos) = lower.find(EXPLANATION_OPEN) {
        consider(pos, pos + EXPLANATION_OPEN.len(), Tag::ExplanationOpen);
    }
    best
}

impl ParserState {
    pub fn new() -> ParserState {
        ParserState {
            buffer: String::new(),
            mode: Mode::Scanning,
            completed: Vec::new(),
            cursor: 0,
            commentary: Vec::new(),
            resume: Mode::Scanning,
            undelimited: false,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn completed(&self) -> &[DesignCandidate] {
        &self.completed
    }

    pub fn into_candidates(self) -> Vec<DesignCandidate> {
        self.completed
    }

    /// Bytes consumed so far; buffered text is not counted.
    pub fn byte_cursor(&self) -> usize {
        self.cursor
    }

    pub fn feed(&mut self, chunk: &str) -> Vec<ParseEvent> {
        self.buffer.push_str(chunk);
        let mut events = Vec::new();
        while self.step(&mut events, false) {}
        events
    }

    /// Flushes whatever is left once the stream has ended.
    pub fn finish(&mut self) -> Vec<ParseEvent> {
        let mut events = Vec::new();
        while self.step(&mut events, true) {}
        match self.mode {
            Mode::InStyle { malformed } => {
                let css = self.take(self.buffer.len());
                self.emit_candidate(css, malformed, true, &mut events);
                self.mode = Mode::AfterStyle;
            }
            Mode::InExplanation => {
                let text = self.take(self.buffer.len());
                self.emit_explanation(text.trim().to_string(), &mut events);
                self.mode = self.resume;
            }
            Mode::Scanning | Mode::AfterStyle => {}
        }
        if !self.commentary.is_empty() {
            let note = self.commentary.join("\n");
            self.commentary.clear();
            if let Some(last) = self.completed.last_mut() {
                last.commentary = Some(match last.commentary.take() {
                    Some(prev) => format!("{prev}\n{note}"),
                    None => note,
                });
            }
        }
        events
    }

    fn take(&mut self, n: usize) -> String {
        self.cursor += n;
        let rest = self.buffer.split_off(n);
        std::mem::replace(&mut self.buffer, rest)
    }

    /// Processes one unit of buffered input; returns false when more input is needed.
    fn step(&mut self, events: &mut Vec<ParseEvent>, at_end: bool) -> bool {
        if self.buffer.is_empty() {
            return false;
        }
        let lower = self.buffer.to_ascii_lowercase();
        match self.mode {
            Mode::InStyle { malformed } => {
                let close = STYLE_CLOSERS
                    .iter()
                    .filter_map(|(tag, bad)| lower.find(tag).map(|p| (p, tag.len(), *bad)))
                    .min_by_key(|(p, _, _)| *p);
                let Some((pos, len, bad_close)) = close else {
                    return false;
                };
                let css = self.take(pos);
                self.take(len);
                self.emit_candidate(css, malformed || bad_close, false, events);
                self.mode = Mode::AfterStyle;
                true
            }
            Mode::InExplanation => {
                let Some(pos) = lower.find(EXPLANATION_CLOSE) else {
                    return false;
                };
                let text = self.take(pos);
                self.take(EXPLANATION_CLOSE.len());
                self.emit_explanation(text.trim().to_string(), events);
                self.mode = self.resume;
                true
            }
            Mode::Scanning | Mode::AfterStyle => {
                let tag = find_open_tag(&lower);
                let region_end = match &tag {
                    Some((start, _, _)) => *start,
                    None => match lower.rfind('\n') {
                        Some(nl) => nl + 1,
                        None if at_end => lower.len(),
                        None => return false,
                    },
                };
                if region_end > 0 {
                    let region = self.take(region_end);
                    self.scan_text(&region, events);
                }
                let Some((start, end, tag)) = tag else {
                    return !self.buffer.is_empty() && at_end;
                };
                debug_assert_eq!(start, region_end);
                self.take(end - start);
                match tag {
                    Tag::StyleOpen { malformed } => {
                        events.push(ParseEvent::StyleOpened {
                            ordinal: self.completed.len(),
                        });
                        self.undelimited = self.mode == Mode::AfterStyle;
                        self.mode = Mode::InStyle { malformed };
                    }
                    Tag::ExplanationOpen => {
                        self.resume = self.mode;
                        self.mode = Mode::InExplanation;
                    }
                }
                true
            }
        }
    }

    /// Text outside any block: delimiter lines and commentary.
    fn scan_text(&mut self, text: &str, events: &mut Vec<ParseEvent>) {
        for line in text.split_inclusive('\n') {
            if is_delimiter_line(line) {
                events.push(ParseEvent::DelimiterSeen);
                self.mode = Mode::Scanning;
            } else if !line.trim().is_empty() {
                self.commentary.push(line.trim().to_string());
            }
        }
    }

    fn emit_candidate(
        &mut self,
        css_text: String,
        malformed_style_tag: bool,
        truncated: bool,
        events: &mut Vec<ParseEvent>,
    ) {
        let commentary = (!self.commentary.is_empty()).then(|| self.commentary.join("\n"));
        self.commentary.clear();
        let candidate = DesignCandidate {
            ordinal: self.completed.len(),
            css_text,
            explanation: None,
            malformed_style_tag,
            truncated,
            undelimited: self.undelimited,
            commentary,
        };
        self.completed.push(candidate.clone());
        events.push(ParseEvent::SnippetComplete { candidate });
    }

    fn emit_explanation(&mut self, text: String, events: &mut Vec<ParseEvent>) {
        match self.completed.last_mut() {
            Some(last) if last.explanation.is_none() => {
                last.explanation = Some(text.clone());
                events.push(ParseEvent::ExplanationComplete {
                    ordinal: last.ordinal,
                    text,
                });
            }
            _ => self.commentary.push(text),
        }
    }
}

/// Parses a complete response in one go.
pub fn parse_response(text: &str) -> (Vec<ParseEvent>, Vec<DesignCandidate>) {
    let mut state = ParserState::new();
    let mut events = state.feed(text);
    events.extend(state.finish());
    (events, state.into_candidates())
}
