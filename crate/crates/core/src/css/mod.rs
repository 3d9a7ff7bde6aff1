//! The CSS subset generated for animations: style rules with simple
//! selectors, `@keyframes`, and typed declarations. Anything else is kept as
//! an opaque [`RawItem`].

mod color;
mod parser;
pub mod value;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_css, parse_selector_list, CssParse};
pub use value::{check_compatible, parse_value, CssFunction, Dimension, Rgba, TypedValue};

/// Byte range in the text a node was parsed from.
///
/// Spans are location metadata only: two spans always compare equal, so
/// trees parsed from differently formatted text can be compared structurally.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "name", rename_all = "snake_case")]
pub enum SimpleSelector {
    Class(String),
    Id(String),
    Type(String),
    Universal,
}

impl fmt::Display for SimpleSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleSelector::Class(c) => write!(f, ".{c}"),
            SimpleSelector::Id(i) => write!(f, "#{i}"),
            SimpleSelector::Type(t) => f.write_str(t),
            SimpleSelector::Universal => f.write_str("*"),
        }
    }
}

/// Simple selectors with no combinator between them, e.g. `path.spark#s1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compound(pub Vec<SimpleSelector>);

impl fmt::Display for Compound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Compounds joined by descendant combinators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorChain {
    pub compounds: Vec<Compound>,
}

impl fmt::Display for SelectorChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.compounds.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `n` for a class named `design-n`.
pub fn design_class_index(class: &str) -> Option<u32> {
    let digits = class.strip_prefix("design-")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

pub fn design_class(index: u32) -> String {
    format!("design-{index}")
}

impl SelectorChain {
    /// The design scope this chain is nested under, if it starts with `.design-n`.
    pub fn scope_index(&self) -> Option<u32> {
        match self.compounds.first()?.0.first()? {
            SimpleSelector::Class(c) => design_class_index(c),
            _ => None,
        }
    }

    /// Ids referenced anywhere in the chain.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.compounds.iter().flat_map(|c| c.0.iter()).filter_map(|s| match s {
            SimpleSelector::Id(id) => Some(id.as_str()),
            _ => None,
        })
    }

    /// The element this chain finally selects, as written (`#sky`, `.flame`).
    pub fn subject(&self) -> Option<&Compound> {
        self.compounds.last()
    }
}

pub fn selectors_to_string(selectors: &[SelectorChain]) -> String {
    selectors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Declaration {
    /// Lowercased, except custom properties which are case-sensitive.
    pub property: String,
    pub value: TypedValue,
    /// Value text with comments removed and whitespace collapsed.
    pub raw: String,
    #[serde(default)]
    pub important: bool,
    #[serde(default)]
    pub span: Span,
}

impl Declaration {
    pub fn new(property: &str, raw: &str) -> Declaration {
        let property = normalize_property(property);
        let raw = collapse_whitespace(raw);
        Declaration {
            value: parse_value(&property, &raw),
            property,
            raw,
            important: false,
            span: Span::default(),
        }
    }

    pub fn with_value(property: &str, value: &TypedValue) -> Declaration {
        Declaration::new(property, &value.to_string())
    }
}

pub(crate) fn normalize_property(p: &str) -> String {
    let p = p.trim();
    if p.starts_with("--") {
        p.to_string()
    } else {
        p.to_ascii_lowercase()
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleRule {
    pub selectors: Vec<SelectorChain>,
    pub declarations: Vec<Declaration>,
    #[serde(default)]
    pub span: Span,
}

impl StyleRule {
    pub fn selector_text(&self) -> String {
        selectors_to_string(&self.selectors)
    }

    /// Last declaration of `property`, per cascade order within the rule.
    pub fn get(&self, property: &str) -> Option<&Declaration> {
        self.declarations.iter().rev().find(|d| d.property == property)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    /// Percentages; `from` is 0 and `to` is 100.
    pub offsets: Vec<f64>,
    pub declarations: Vec<Declaration>,
    #[serde(default)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframesRule {
    /// `keyframes` or a vendor-prefixed variant.
    pub at_keyword: String,
    pub name: String,
    /// A selector wrongly written in front of the at-rule (`.design-9 @keyframes x`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stray_prefix: Option<String>,
    pub frames: Vec<Keyframe>,
    #[serde(default)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawItem {
    pub text: String,
    #[serde(default)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Item {
    Style(StyleRule),
    Keyframes(KeyframesRule),
    Raw(RawItem),
}

impl Item {
    pub fn span(&self) -> Span {
        match self {
            Item::Style(r) => r.span,
            Item::Keyframes(k) => k.span,
            Item::Raw(r) => r.span,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stylesheet {
    pub items: Vec<Item>,
}

/// Locates one declaration inside a sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeclarationPath {
    pub item: usize,
    /// Keyframe index for declarations inside `@keyframes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<usize>,
    pub declaration: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CssError {
    #[error("no rule matches selector `{0}`")]
    UnknownSelectorPath(String),
    #[error("type mismatch for {property}: {message}")]
    TypeMismatch { property: String, message: String },
    #[error("declaration path does not resolve")]
    StalePath,
}

impl Stylesheet {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn style_rules(&self) -> impl Iterator<Item = &StyleRule> {
        self.items.iter().filter_map(|i| match i {
            Item::Style(r) => Some(r),
            _ => None,
        })
    }

    pub fn keyframes(&self) -> impl Iterator<Item = &KeyframesRule> {
        self.items.iter().filter_map(|i| match i {
            Item::Keyframes(k) => Some(k),
            _ => None,
        })
    }

    pub fn find_keyframes(&self, name: &str) -> Option<&KeyframesRule> {
        self.keyframes().filter(|k| k.name == name).last()
    }

    /// Every `n` such that some selector chain starts with `.design-n`.
    pub fn scope_indices(&self) -> BTreeSet<u32> {
        self.style_rules()
            .flat_map(|r| r.selectors.iter())
            .filter_map(SelectorChain::scope_index)
            .collect()
    }

    fn rules_matching<'a>(&'a self, selector_path: &str) -> Result<Vec<usize>, CssError> {
        let wanted = parse_selector_list(selector_path)
            .map(|s| selectors_to_string(&s))
            .ok_or_else(|| CssError::UnknownSelectorPath(selector_path.to_string()))?;
        let hits: Vec<usize> = self
            .items
            .iter()
            .enumerate()
            .filter_map(|(i, item)| match item {
                Item::Style(r) if r.selector_text() == wanted => Some(i),
                _ => None,
            })
            .collect();
        if hits.is_empty() {
            return Err(CssError::UnknownSelectorPath(selector_path.to_string()));
        }
        Ok(hits)
    }

    /// Effective value of `property` for the rule(s) written with `selector_path`;
    /// the last declaration wins.
    pub fn get_declaration(&self, selector_path: &str, property: &str) -> Option<&TypedValue> {
        let property = normalize_property(property);
        let hits = self.rules_matching(selector_path).ok()?;
        hits.iter().rev().find_map(|&i| match &self.items[i] {
            Item::Style(r) => r.get(&property).map(|d| &d.value),
            _ => None,
        })
    }

    /// Returns a copy with the effective declaration replaced, or appended to
    /// the last matching rule when the property is not declared.
    pub fn set_declaration(
        &self,
        selector_path: &str,
        property: &str,
        value: &TypedValue,
    ) -> Result<Stylesheet, CssError> {
        let property = normalize_property(property);
        check_compatible(&property, value).map_err(|message| CssError::TypeMismatch {
            property: property.clone(),
            message,
        })?;
        let hits = self.rules_matching(selector_path)?;
        let mut out = self.clone();
        let target = hits
            .iter()
            .rev()
            .copied()
            .find(|&i| matches!(&self.items[i], Item::Style(r) if r.get(&property).is_some()))
            .unwrap_or(*hits.last().expect("non-empty"));
        let Item::Style(rule) = &mut out.items[target] else {
            unreachable!()
        };
        let fresh = Declaration::with_value(&property, value);
        match rule.declarations.iter_mut().rev().find(|d| d.property == property) {
            Some(existing) => {
                existing.value = fresh.value;
                existing.raw = fresh.raw;
            }
            None => rule.declarations.push(fresh),
        }
        Ok(out)
    }

    pub fn declaration_at(&self, path: DeclarationPath) -> Option<&Declaration> {
        match (self.items.get(path.item)?, path.frame) {
            (Item::Style(r), None) => r.declarations.get(path.declaration),
            (Item::Keyframes(k), Some(f)) => k.frames.get(f)?.declarations.get(path.declaration),
            _ => None,
        }
    }

    fn declaration_at_mut(&mut self, path: DeclarationPath) -> Option<&mut Declaration> {
        match (self.items.get_mut(path.item)?, path.frame) {
            (Item::Style(r), None) => r.declarations.get_mut(path.declaration),
            (Item::Keyframes(k), Some(f)) => {
                k.frames.get_mut(f)?.declarations.get_mut(path.declaration)
            }
            _ => None,
        }
    }

    /// Replaces the value of the declaration at `path`.
    pub fn with_value_at(
        &self,
        path: DeclarationPath,
        value: &TypedValue,
    ) -> Result<Stylesheet, CssError> {
        let mut out = self.clone();
        let decl = out.declaration_at_mut(path).ok_or(CssError::StalePath)?;
        check_compatible(&decl.property, value).map_err(|message| CssError::TypeMismatch {
            property: decl.property.clone(),
            message,
        })?;
        let fresh = Declaration::with_value(&decl.property, value);
        decl.value = fresh.value;
        decl.raw = fresh.raw;
        Ok(out)
    }

    /// All declarations with their paths, in document order.
    pub fn declarations(&self) -> Vec<(DeclarationPath, &Declaration)> {
        let mut out = Vec::new();
        for (i, item) in self.items.iter().enumerate() {
            match item {
                Item::Style(r) => {
                    for (d, decl) in r.declarations.iter().enumerate() {
                        out.push((
                            DeclarationPath {
                                item: i,
                                frame: None,
                                declaration: d,
                            },
                            decl,
                        ));
                    }
                }
                Item::Keyframes(k) => {
                    for (f, frame) in k.frames.iter().enumerate() {
                        for (d, decl) in frame.declarations.iter().enumerate() {
                            out.push((
                                DeclarationPath {
                                    item: i,
                                    frame: Some(f),
                                    declaration: d,
                                },
                                decl,
                            ));
                        }
                    }
                }
                Item::Raw(_) => {}
            }
        }
        out
    }
}

fn write_declaration(out: &mut String, d: &Declaration, indent: &str) {
    out.push_str(indent);
    out.push_str(&d.property);
    out.push_str(": ");
    out.push_str(&d.raw);
    if d.important {
        out.push_str(" !important");
    }
    out.push_str(";\n");
}

fn fmt_offset(o: f64) -> String {
    if o == 0.0 {
        "from".into()
    } else if o == 100.0 {
        "to".into()
    } else {
        format!("{}%", value::fmt_number(o))
    }
}

/// Canonical text: one declaration per line, two-space indent, lowercase
/// properties, items separated by a blank line. Raw items are emitted verbatim.
pub fn serialize_css(sheet: &Stylesheet) -> String {
    let mut parts = Vec::with_capacity(sheet.items.len());
    for item in &sheet.items {
        let mut out = String::new();
        match item {
            Item::Style(rule) => {
                out.push_str(&rule.selector_text());
                out.push_str(" {\n");
                for d in &rule.declarations {
                    write_declaration(&mut out, d, "  ");
                }
                out.push_str("}\n");
            }
            Item::Keyframes(k) => {
                if let Some(prefix) = &k.stray_prefix {
                    out.push_str(prefix);
                    out.push(' ');
                }
                out.push('@');
                out.push_str(&k.at_keyword);
                out.push(' ');
                out.push_str(&k.name);
                out.push_str(" {\n");
                for frame in &k.frames {
                    out.push_str("  ");
                    out.push_str(
                        &frame
                            .offsets
                            .iter()
                            .map(|o| fmt_offset(*o))
                            .collect::<Vec<_>>()
                            .join(", "),
                    );
                    out.push_str(" {\n");
                    for d in &frame.declarations {
                        write_declaration(&mut out, d, "    ");
                    }
                    out.push_str("  }\n");
                }
                out.push_str("}\n");
            }
            Item::Raw(raw) => out.push_str(&raw.text),
        }
        parts.push(out);
    }
    parts.join("\n")
}

impl fmt::Display for Stylesheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_css(self))
    }
}
