//! Checks generated CSS against the prompt rules and the observed error
//! taxonomy, and repairs the mechanically fixable defects.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::css::{
    design_class, Compound, Item, KeyframesRule, SelectorChain, SimpleSelector, Span, StyleRule,
    Stylesheet, TypedValue,
};
use crate::stream_parse::DesignCandidate;
use crate::svg::ElementIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LintCode {
    ClassOnKeyframe,
    ClassInsteadOfId,
    WrongScopeIndex,
    StyleTagTypo,
    InvalidValueList,
    UndefinedVariable,
    ShorthandAnimation,
    MissingTransformOrigin,
    FiniteIteration,
    UnknownTarget,
}

impl LintCode {
    pub const ALL: [LintCode; 10] = [
        LintCode::ClassOnKeyframe,
        LintCode::ClassInsteadOfId,
        LintCode::WrongScopeIndex,
        LintCode::StyleTagTypo,
        LintCode::InvalidValueList,
        LintCode::UndefinedVariable,
        LintCode::ShorthandAnimation,
        LintCode::MissingTransformOrigin,
        LintCode::FiniteIteration,
        LintCode::UnknownTarget,
    ];

    /// Errors stop the animation from rendering; warnings break a prompt rule.
    pub fn severity(self) -> Severity {
        match self {
            LintCode::ClassOnKeyframe
            | LintCode::ClassInsteadOfId
            | LintCode::WrongScopeIndex
            | LintCode::StyleTagTypo
            | LintCode::InvalidValueList
            | LintCode::UndefinedVariable => Severity::Error,
            _ => Severity::Warning,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::ClassOnKeyframe => "CLASS_ON_KEYFRAME",
            LintCode::ClassInsteadOfId => "CLASS_INSTEAD_OF_ID",
            LintCode::WrongScopeIndex => "WRONG_SCOPE_INDEX",
            LintCode::StyleTagTypo => "STYLE_TAG_TYPO",
            LintCode::InvalidValueList => "INVALID_VALUE_LIST",
            LintCode::UndefinedVariable => "UNDEFINED_VARIABLE",
            LintCode::ShorthandAnimation => "SHORTHAND_ANIMATION",
            LintCode::MissingTransformOrigin => "MISSING_TRANSFORM_ORIGIN",
            LintCode::FiniteIteration => "FINITE_ITERATION",
            LintCode::UnknownTarget => "UNKNOWN_TARGET",
        }
    }
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A mechanical repair, addressed by item index in the linted sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fix {
    /// Drop the selector written before `@keyframes`.
    StripKeyframesPrefix { item: usize },
    /// Rewrite `.name` as `#name` in every selector of the rule.
    ClassToId { item: usize, class: String },
    /// Put every selector chain of the rule under `.design-{scope}`.
    Rescope { item: usize, scope: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: LintCode,
    pub severity: Severity,
    pub location: Span,
    /// Index of the offending item, when the finding is about one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<usize>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix: Option<Fix>,
}

impl Finding {
    fn new(code: LintCode, item: Option<usize>, location: Span, message: String) -> Finding {
        Finding {
            code,
            severity: code.severity(),
            location,
            item,
            message,
            fix: None,
        }
    }

    fn with_fix(mut self, fix: Fix) -> Finding {
        self.fix = Some(fix);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LintReport {
    pub findings: Vec<Finding>,
    pub error_count: usize,
    pub warning_count: usize,
    /// The sheet with every available fix applied, when there is any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_sheet: Option<Stylesheet>,
}

impl LintReport {
    pub fn from_findings(findings: Vec<Finding>) -> LintReport {
        let error_count = findings.iter().filter(|f| f.severity == Severity::Error).count();
        LintReport {
            warning_count: findings.len() - error_count,
            error_count,
            findings,
            fixed_sheet: None,
        }
    }

    pub fn has(&self, code: LintCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn codes(&self) -> BTreeSet<LintCode> {
        self.findings.iter().map(|f| f.code).collect()
    }

    /// Adds a finding detected outside the stylesheet (e.g. in the raw response).
    pub fn push(&mut self, finding: Finding) {
        match finding.severity {
            Severity::Error => self.error_count += 1,
            Severity::Warning => self.warning_count += 1,
        }
        self.findings.push(finding);
    }
}

pub fn style_tag_typo() -> Finding {
    Finding::new(
        LintCode::StyleTagTypo,
        None,
        Span::default(),
        "CSS was wrapped in <stle> instead of <style>".into(),
    )
}

pub fn lint(sheet: &Stylesheet, index: &ElementIndex, expected_scope: u32) -> LintReport {
    let defined_vars = defined_variables(sheet);
    let mut findings = Vec::new();
    for (i, item) in sheet.items.iter().enumerate() {
        match item {
            Item::Style(rule) => lint_rule(sheet, i, rule, index, expected_scope, &defined_vars, &mut findings),
            Item::Keyframes(k) => lint_keyframes(i, k, &defined_vars, &mut findings),
            Item::Raw(_) => {}
        }
    }
    let mut report = LintReport::from_findings(findings);
    if report.findings.iter().any(|f| f.fix.is_some()) {
        report.fixed_sheet = Some(auto_fix(sheet, &report));
    }
    report
}

/// Lints a streamed candidate, adding defects visible only in the raw response.
pub fn lint_candidate(
    candidate: &DesignCandidate,
    index: &ElementIndex,
    expected_scope: u32,
) -> LintReport {
    let sheet = crate::css::parse_css(&candidate.css_text).sheet;
    let mut report = lint(&sheet, index, expected_scope);
    if candidate.malformed_style_tag {
        report.push(style_tag_typo());
    }
    report
}

fn lint_rule(
    sheet: &Stylesheet,
    i: usize,
    rule: &StyleRule,
    index: &ElementIndex,
    expected_scope: u32,
    defined_vars: &BTreeSet<String>,
    out: &mut Vec<Finding>,
) {
    let at = Some(i);
    let span = rule.span;
    let selector = rule.selector_text();

    let off_scope: Vec<String> = rule
        .selectors
        .iter()
        .filter(|c| c.scope_index() != Some(expected_scope))
        .map(ToString::to_string)
        .collect();
    if !off_scope.is_empty() {
        out.push(
            Finding::new(
                LintCode::WrongScopeIndex,
                at,
                span,
                format!(
                    "`{}` is not scoped under .{}",
                    off_scope.join(", "),
                    design_class(expected_scope)
                ),
            )
            .with_fix(Fix::Rescope {
                item: i,
                scope: expected_scope,
            }),
        );
    }

    let mut misused: BTreeSet<&str> = BTreeSet::new();
    let mut unknown: BTreeSet<&str> = BTreeSet::new();
    for chain in &rule.selectors {
        for (c, compound) in chain.compounds.iter().enumerate() {
            for (s, simple) in compound.0.iter().enumerate() {
                match simple {
                    SimpleSelector::Class(name) if !(c == 0 && s == 0 && chain.scope_index().is_some()) => {
                        if index.contains_id(name) && !index.has_class(name) {
                            misused.insert(name);
                        }
                    }
                    SimpleSelector::Id(id) if !index.contains_id(id) => {
                        unknown.insert(id);
                    }
                    _ => {}
                }
            }
        }
    }
    for class in misused {
        out.push(
            Finding::new(
                LintCode::ClassInsteadOfId,
                at,
                span,
                format!("`.{class}` selects nothing; the SVG has an element with id `{class}`"),
            )
            .with_fix(Fix::ClassToId {
                item: i,
                class: class.to_string(),
            }),
        );
    }
    for id in unknown {
        out.push(Finding::new(
            LintCode::UnknownTarget,
            at,
            span,
            format!("`#{id}` does not match any element in the SVG"),
        ));
    }

    let names = animation_names(rule);
    let name_count = names.len().max(1);
    for decl in &rule.declarations {
        if decl.property.starts_with("animation-") && decl.property != "animation-name" {
            let n = decl.value.list_items().len();
            if n > name_count {
                out.push(Finding::new(
                    LintCode::InvalidValueList,
                    at,
                    decl.span,
                    format!(
                        "`{}` lists {n} values for {name_count} animation name(s) in `{selector}`",
                        decl.property
                    ),
                ));
            }
        }
    }

    undefined_variables(at, rule.declarations.iter(), defined_vars, out);

    if rule.declarations.iter().any(|d| d.property == "animation") {
        out.push(Finding::new(
            LintCode::ShorthandAnimation,
            at,
            span,
            format!("`{selector}` uses the `animation` shorthand instead of longhand properties"),
        ));
    }

    if names.iter().all(|n| n == "none") {
        return;
    }

    let uses_rotate_or_scale = names.iter().any(|n| {
        sheet
            .find_keyframes(n)
            .is_some_and(keyframes_rotate_or_scale)
    });
    if uses_rotate_or_scale && rule.get("transform-origin").is_none() {
        out.push(Finding::new(
            LintCode::MissingTransformOrigin,
            at,
            span,
            format!("`{selector}` rotates or scales without setting transform-origin"),
        ));
    }

    let infinite = rule.get("animation-iteration-count").is_some_and(|d| {
        d.value
            .list_items()
            .iter()
            .all(|v| matches!(v, TypedValue::Keyword(k) if k == "infinite"))
    });
    if !infinite {
        out.push(Finding::new(
            LintCode::FiniteIteration,
            at,
            span,
            format!("`{selector}` does not repeat forever (animation-iteration-count: infinite)"),
        ));
    }
}

/// Names listed in the rule's effective `animation-name`.
pub fn animation_names(rule: &StyleRule) -> Vec<String> {
    match rule.get("animation-name").map(|d| &d.value) {
        Some(TypedValue::IdentifierList(names)) => names.clone(),
        Some(TypedValue::Raw(raw)) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        Some(other) => vec![other.to_string()],
        None => Vec::new(),
    }
}

fn lint_keyframes(
    i: usize,
    k: &KeyframesRule,
    defined_vars: &BTreeSet<String>,
    out: &mut Vec<Finding>,
) {
    if let Some(prefix) = &k.stray_prefix {
        out.push(
            Finding::new(
                LintCode::ClassOnKeyframe,
                Some(i),
                k.span,
                format!("`{prefix}` must not be applied to @keyframes {}", k.name),
            )
            .with_fix(Fix::StripKeyframesPrefix { item: i }),
        );
    }
    undefined_variables(
        Some(i),
        k.frames.iter().flat_map(|f| f.declarations.iter()),
        defined_vars,
        out,
    );
}

fn keyframes_rotate_or_scale(k: &KeyframesRule) -> bool {
    k.frames
        .iter()
        .flat_map(|f| f.declarations.iter())
        .filter(|d| d.property == "transform")
        .any(|d| match &d.value {
            TypedValue::TransformList(fns) => fns.iter().any(|f| {
                let n = f.name.to_ascii_lowercase();
                n.starts_with("rotate") || n.starts_with("scale")
            }),
            _ => {
                let raw = d.raw.to_ascii_lowercase();
                raw.contains("rotate") || raw.contains("scale")
            }
        })
}

/// Custom properties declared anywhere, including inside raw items such as `:root {}`.
fn defined_variables(sheet: &Stylesheet) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for item in &sheet.items {
        match item {
            Item::Style(r) => out.extend(
                r.declarations
                    .iter()
                    .filter(|d| d.property.starts_with("--"))
                    .map(|d| d.property.clone()),
            ),
            Item::Keyframes(k) => out.extend(
                k.frames
                    .iter()
                    .flat_map(|f| f.declarations.iter())
                    .filter(|d| d.property.starts_with("--"))
                    .map(|d| d.property.clone()),
            ),
            Item::Raw(r) => {
                let mut rest = r.text.as_str();
                while let Some(pos) = rest.find("--") {
                    let tail = &rest[pos..];
                    let end = tail[2..]
                        .find(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_'))
                        .map(|e| e + 2)
                        .unwrap_or(tail.len());
                    if tail[end..].trim_start().starts_with(':') {
                        out.insert(tail[..end].to_string());
                    }
                    rest = &tail[end.max(2)..];
                }
            }
        }
    }
    out
}

/// Names referenced through `var(...)` in a value.
pub fn referenced_variables(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = raw;
    while let Some(pos) = rest.find("var(") {
        let inner = &rest[pos + 4..];
        let end = inner.find([',', ')']).unwrap_or(inner.len());
        out.push(inner[..end].trim().to_string());
        rest = &inner[end..];
    }
    out
}

fn undefined_variables<'a>(
    item: Option<usize>,
    decls: impl Iterator<Item = &'a crate::css::Declaration>,
    defined: &BTreeSet<String>,
    out: &mut Vec<Finding>,
) {
    for d in decls {
        for name in referenced_variables(&d.raw) {
            if !defined.contains(&name) {
                out.push(Finding::new(
                    LintCode::UndefinedVariable,
                    item,
                    d.span,
                    format!("`var({name})` in `{}` refers to an undefined variable", d.property),
                ));
            }
        }
    }
}

/// Applies every fix in `report`, in order. Items are never added or removed,
/// so item indices stay valid across fixes.
pub fn auto_fix(sheet: &Stylesheet, report: &LintReport) -> Stylesheet {
    let mut out = sheet.clone();
    for fix in report.findings.iter().filter_map(|f| f.fix.as_ref()) {
        apply_fix(&mut out, fix);
    }
    out
}

fn apply_fix(sheet: &mut Stylesheet, fix: &Fix) {
    match fix {
        Fix::StripKeyframesPrefix { item } => {
            if let Some(Item::Keyframes(k)) = sheet.items.get_mut(*item) {
                k.stray_prefix = None;
            }
        }
        Fix::ClassToId { item, class } => {
            if let Some(Item::Style(r)) = sheet.items.get_mut(*item) {
                for chain in &mut r.selectors {
                    let scoped = chain.scope_index().is_some();
                    for (c, compound) in chain.compounds.iter_mut().enumerate() {
                        for (s, simple) in compound.0.iter_mut().enumerate() {
                            let is_scope = scoped && c == 0 && s == 0;
                            if !is_scope && matches!(simple, SimpleSelector::Class(n) if n == class) {
                                *simple = SimpleSelector::Id(class.clone());
                            }
                        }
                    }
                }
            }
        }
        Fix::Rescope { item, scope } => {
            if let Some(Item::Style(r)) = sheet.items.get_mut(*item) {
                for chain in &mut r.selectors {
                    rescope_chain(chain, *scope);
                }
            }
        }
    }
}

fn rescope_chain(chain: &mut SelectorChain, scope: u32) {
    let class = SimpleSelector::Class(design_class(scope));
    match chain.scope_index() {
        Some(n) if n == scope => {}
        Some(_) => chain.compounds[0].0[0] = class,
        None => chain.compounds.insert(0, Compound(vec![class])),
    }
}
