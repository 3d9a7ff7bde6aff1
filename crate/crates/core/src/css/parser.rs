use super::value::is_ident;
use super::{
    collapse_whitespace, normalize_property, parse_value, Compound, Declaration, Diagnostic, Item,
    Keyframe, KeyframesRule, RawItem, SelectorChain, SimpleSelector, Span, StyleRule, Stylesheet,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CssParse {
    pub sheet: Stylesheet,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses leniently: a rule that cannot be understood becomes a [`RawItem`]
/// holding its original text, with a diagnostic, and parsing resumes after it.
pub fn parse_css(text: &str) -> CssParse {
    let clean = blank_comments(text);
    let mut p = Parser {
        src: text,
        t: clean.as_bytes(),
        diagnostics: Vec::new(),
        items: Vec::new(),
    };
    p.run();
    CssParse {
        sheet: Stylesheet { items: p.items },
        diagnostics: p.diagnostics,
    }
}

/// Replaces the bytes of every `/* ... */` with spaces so offsets are kept.
fn blank_comments(text: &str) -> String {
    let mut bytes = text.as_bytes().to_vec();
    let mut i = 0;
    let mut quote: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) => {
                if b == b'\\' {
                    i += 1;
                } else if b == q {
                    quote = None;
                }
                i += 1;
            }
            None if b == b'"' || b == b'\'' => {
                quote = Some(b);
                i += 1;
            }
            None if b == b'/' && bytes.get(i + 1) == Some(&b'*') => {
                let end = text[i + 2..]
                    .find("*/")
                    .map(|e| i + 2 + e + 2)
                    .unwrap_or(bytes.len());
                for byte in &mut bytes[i..end] {
                    *byte = b' ';
                }
                i = end;
            }
            None => i += 1,
        }
    }
    // only ASCII bytes and whole multi-byte sequences were replaced
    String::from_utf8(bytes).expect("comment blanking keeps utf-8 valid")
}

/// Index of the first byte in `stops` at or after `from`, outside strings.
fn scan_to(t: &[u8], from: usize, stops: &[u8]) -> Option<usize> {
    let mut i = from;
    let mut quote: Option<u8> = None;
    while i < t.len() {
        let b = t[i];
        match quote {
            Some(q) => {
                if b == b'\\' {
                    i += 1;
                } else if b == q {
                    quote = None;
                }
            }
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if stops.contains(&b) => return Some(i),
            None => {}
        }
        i += 1;
    }
    None
}

/// Index of the `}` closing the `{` at `open`.
fn matching_brace(t: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = open;
    loop {
        let at = scan_to(t, i, b"{}")?;
        if t[at] == b'{' {
            depth += 1;
        } else {
            depth -= 1;
            if depth == 0 {
                return Some(at);
            }
        }
        i = at + 1;
    }
}

/// Splits on `;` outside strings and parentheses, returning (offset, piece).
fn split_declarations(body: &str) -> Vec<(usize, &str)> {
    let t = body.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    let mut quote: Option<u8> = None;
    let mut i = 0;
    while i < t.len() {
        let b = t[i];
        match quote {
            Some(q) => {
                if b == b'\\' {
                    i += 1;
                } else if b == q {
                    quote = None;
                }
            }
            None => match b {
                b'"' | b'\'' => quote = Some(b),
                b'(' => depth += 1,
                b')' => depth -= 1,
                b';' if depth == 0 => {
                    parts.push((start, &body[start..i]));
                    start = i + 1;
                }
                _ => {}
            },
        }
        i += 1;
    }
    parts.push((start, &body[start..]));
    parts
}

fn skip_ws(t: &[u8], mut i: usize) -> usize {
    while i < t.len() && t[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

struct Parser<'a> {
    src: &'a str,
    t: &'a [u8],
    diagnostics: Vec<Diagnostic>,
    items: Vec<Item>,
}

impl Parser<'_> {
    fn clean(&self, start: usize, end: usize) -> &str {
        // the cleaned buffer has identical byte boundaries to the source
        std::str::from_utf8(&self.t[start..end]).expect("slice on char boundary")
    }

    fn raw(&mut self, start: usize, end: usize, offset: usize, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            offset,
            message: message.into(),
        });
        self.items.push(Item::Raw(RawItem {
            text: self.src[start..end].trim_end().to_string(),
            span: Span::new(start, end),
        }));
    }

    fn run(&mut self) {
        let len = self.t.len();
        let mut pos = 0;
        loop {
            pos = skip_ws(self.t, pos);
            if pos >= len {
                break;
            }
            let start = pos;
            let Some(stop) = scan_to(self.t, pos, b"{;}") else {
                self.raw(start, len, start, "unterminated rule");
                break;
            };
            match self.t[stop] {
                b';' => {
                    let msg = if self.t[start] == b'@' {
                        "unsupported at-rule"
                    } else {
                        "unexpected `;`"
                    };
                    self.raw(start, stop + 1, start, msg);
                    pos = stop + 1;
                }
                b'}' => {
                    self.raw(start, stop + 1, stop, "unmatched `}`");
                    pos = stop + 1;
                }
                _ => {
                    let Some(close) = matching_brace(self.t, stop) else {
                        self.raw(start, len, stop, "unclosed block");
                        break;
                    };
                    match self.rule(start, stop, close) {
                        Ok(item) => self.items.push(item),
                        Err((offset, message)) => self.raw(start, close + 1, offset, message),
                    }
                    pos = close + 1;
                }
            }
        }
    }

    fn rule(&self, start: usize, open: usize, close: usize) -> Result<Item, (usize, String)> {
        let prelude = self.clean(start, open).trim();
        let span = Span::new(start, close + 1);
        if let Some(at) = prelude.find('@') {
            return self.keyframes(prelude, at, start, open, close).map(Item::Keyframes);
        }
        let selectors = parse_selector_list(prelude)
            .ok_or_else(|| (start, format!("unsupported selector `{prelude}`")))?;
        if let Some(nested) = scan_to(self.t, open + 1, b"{") {
            if nested < close {
                return Err((nested, "nested blocks are not supported".into()));
            }
        }
        let declarations = self.declarations(open + 1, close)?;
        Ok(Item::Style(StyleRule {
            selectors,
            declarations,
            span,
        }))
    }

    fn keyframes(
        &self,
        prelude: &str,
        at: usize,
        start: usize,
        open: usize,
        close: usize,
    ) -> Result<KeyframesRule, (usize, String)> {
        let after = &prelude[at + 1..];
        let kw_len = after
            .find(|c: char| c.is_whitespace())
            .unwrap_or(after.len());
        let at_keyword = after[..kw_len].to_ascii_lowercase();
        if !at_keyword.ends_with("keyframes") || !is_ident(&at_keyword) {
            return Err((start, format!("unsupported at-rule `@{at_keyword}`")));
        }
        let name = after[kw_len..].trim();
        if !is_ident(name) {
            return Err((start, format!("invalid keyframes name `{name}`")));
        }
        let prefix = prelude[..at].trim();
        let stray_prefix = (!prefix.is_empty()).then(|| collapse_whitespace(prefix));

        let mut frames = Vec::new();
        let mut pos = open + 1;
        loop {
            pos = skip_ws(self.t, pos);
            if pos >= close {
                break;
            }
            let frame_open = scan_to(self.t, pos, b"{;}")
                .filter(|&i| i < close && self.t[i] == b'{')
                .ok_or((pos, "expected keyframe block".to_string()))?;
            let frame_close = matching_brace(self.t, frame_open)
                .filter(|&c| c < close)
                .ok_or((frame_open, "unclosed keyframe block".to_string()))?;
            if let Some(nested) = scan_to(self.t, frame_open + 1, b"{") {
                if nested < frame_close {
                    return Err((nested, "nested blocks are not supported".into()));
                }
            }
            let selector = self.clean(pos, frame_open);
            let offsets = parse_offsets(selector)
                .ok_or_else(|| (pos, format!("invalid keyframe selector `{}`", selector.trim())))?;
            frames.push(Keyframe {
                offsets,
                declarations: self.declarations(frame_open + 1, frame_close)?,
                span: Span::new(pos, frame_close + 1),
            });
            pos = frame_close + 1;
        }
        Ok(KeyframesRule {
            at_keyword,
            name: name.to_string(),
            stray_prefix,
            frames,
            span: Span::new(start, close + 1),
        })
    }

    fn declarations(&self, from: usize, to: usize) -> Result<Vec<Declaration>, (usize, String)> {
        let body = self.clean(from, to);
        let mut out = Vec::new();
        for (offset, piece) in split_declarations(body) {
            if piece.trim().is_empty() {
                continue;
            }
            let at = from + offset;
            let colon = piece
                .find(':')
                .ok_or_else(|| (at, format!("expected `:` in `{}`", piece.trim())))?;
            let property = piece[..colon].trim();
            let custom = property
                .strip_prefix("--")
                .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_'));
            if !custom && !is_ident(property) {
                return Err((at, format!("invalid property name `{property}`")));
            }
            let (value, important) = strip_important(&piece[colon + 1..]);
            let raw = collapse_whitespace(value);
            if raw.is_empty() {
                return Err((at, format!("empty value for `{property}`")));
            }
            let property = normalize_property(property);
            out.push(Declaration {
                value: parse_value(&property, &raw),
                property,
                raw,
                important,
                span: Span::new(at, at + piece.len()),
            });
        }
        Ok(out)
    }
}

fn strip_important(value: &str) -> (&str, bool) {
    let trimmed = value.trim_end();
    let lower = trimmed.to_ascii_lowercase();
    if let Some(head) = lower.strip_suffix("important") {
        let head = head.trim_end();
        if let Some(before) = head.strip_suffix('!') {
            return (&trimmed[..before.len()], true);
        }
    }
    (value, false)
}

fn parse_offsets(text: &str) -> Option<Vec<f64>> {
    text.split(',')
        .map(|part| {
            let part = part.trim().to_ascii_lowercase();
            match part.as_str() {
                "from" => Some(0.0),
                "to" => Some(100.0),
                _ => super::value::parse_number(part.strip_suffix('%')?)
                    .filter(|p| (0.0..=100.0).contains(p)),
            }
        })
        .collect()
}

/// Parses a comma-separated list of selector chains in the supported subset.
pub fn parse_selector_list(text: &str) -> Option<Vec<SelectorChain>> {
    text.split(',')
        .map(|chain| {
            let compounds: Option<Vec<Compound>> =
                chain.split_whitespace().map(parse_compound).collect();
            let compounds = compounds?;
            (!compounds.is_empty()).then_some(SelectorChain { compounds })
        })
        .collect()
}

fn parse_compound(text: &str) -> Option<Compound> {
    let ident_end = |s: &str| {
        s.find(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_'))
            .unwrap_or(s.len())
    };
    let mut parts = Vec::new();
    let mut rest = text;
    if let Some(r) = rest.strip_prefix('*') {
        parts.push(SimpleSelector::Universal);
        rest = r;
    } else if !rest.starts_with(['.', '#']) {
        let end = ident_end(rest);
        let name = &rest[..end];
        if !is_ident(name) {
            return None;
        }
        parts.push(SimpleSelector::Type(name.to_string()));
        rest = &rest[end..];
    }
    while let Some(marker) = rest.chars().next() {
        let body = &rest[1..];
        let end = ident_end(body);
        let name = &body[..end];
        if !is_ident(name) {
            return None;
        }
        parts.push(match marker {
            '.' => SimpleSelector::Class(name.to_string()),
            '#' => SimpleSelector::Id(name.to_string()),
            _ => return None,
        });
        rest = &body[end..];
    }
    Some(Compound(parts))
}
