//! Widget-oriented view of a stylesheet for the properties editor, and the
//! reverse path from a widget edit back into the stylesheet.

use serde::{Deserialize, Serialize};

use crate::css::value::TIMING_PRESETS;
use crate::css::{
    check_compatible, CssError, CssFunction, DeclarationPath, Dimension, Item, SimpleSelector,
    StyleRule, Stylesheet, TypedValue,
};
use crate::svg::ElementIndex;

/// Control-point equivalents of the named timing functions.
pub const BEZIER_PRESETS: [(&str, [f64; 4]); 5] = [
    ("linear", [0.0, 0.0, 1.0, 1.0]),
    ("ease", [0.25, 0.1, 0.25, 1.0]),
    ("ease-in", [0.42, 0.0, 1.0, 1.0]),
    ("ease-out", [0.0, 0.0, 0.58, 1.0]),
    ("ease-in-out", [0.42, 0.0, 0.58, 1.0]),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Widget {
    ColorPicker,
    TimingCurve,
    DurationSeconds,
    DelaySeconds,
    Number,
    Percent,
    TransformFields,
    KeywordChoice { options: Vec<String> },
    Text,
}

fn options(list: &[&str]) -> Widget {
    Widget::KeywordChoice {
        options: list.iter().map(|s| s.to_string()).collect(),
    }
}

/// Widget for a property; depends on the name only.
pub fn widget_for(property: &str) -> Widget {
    match property {
        "fill" | "stroke" | "color" | "stop-color" | "background-color" | "flood-color" => {
            Widget::ColorPicker
        }
        "animation-timing-function" | "transition-timing-function" => Widget::TimingCurve,
        "animation-duration" | "transition-duration" => Widget::DurationSeconds,
        "animation-delay" | "transition-delay" => Widget::DelaySeconds,
        "opacity" | "fill-opacity" | "stroke-opacity" | "stop-opacity" | "stroke-width" => {
            Widget::Number
        }
        "offset-distance" => Widget::Percent,
        "transform" | "filter" => Widget::TransformFields,
        "visibility" => options(&["visible", "hidden", "collapse"]),
        "animation-direction" => options(&["normal", "reverse", "alternate", "alternate-reverse"]),
        "animation-play-state" => options(&["running", "paused"]),
        "animation-fill-mode" => options(&["none", "forwards", "backwards", "both"]),
        "transform-box" => options(&["content-box", "border-box", "fill-box", "stroke-box", "view-box"]),
        _ => Widget::Text,
    }
}

/// One numeric argument of a transform or filter function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformField {
    pub function: String,
    /// Position of the function in the list.
    pub function_index: usize,
    /// Position of the argument within the function.
    pub arg_index: usize,
    pub value: f64,
    pub unit: String,
}

/// Value-dependent state of a widget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidgetState {
    TimingCurve {
        /// Set when the curve equals a named preset.
        preset: Option<String>,
        bezier: Option<[f64; 4]>,
    },
    TransformFields { fields: Vec<TransformField> },
}

/// Locates a declaration and remembers what it held when derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySource {
    pub path: DeclarationPath,
    pub property: String,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub property: String,
    pub widget: Widget,
    pub value: TypedValue,
    /// Text as written in the stylesheet.
    pub display: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<WidgetState>,
    pub source: EntrySource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Element,
    Selector,
    Keyframes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyGroup {
    /// Element id, keyframes name, or selector text.
    pub name: String,
    pub kind: GroupKind,
    /// Selector text of every rule merged into the group.
    pub selectors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_id: Option<String>,
    /// Whether the element id exists in the SVG.
    pub resolved: bool,
    pub entries: Vec<PropertyEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertySheet {
    pub groups: Vec<PropertyGroup>,
}

impl PropertySheet {
    pub fn entries(&self) -> impl Iterator<Item = &PropertyEntry> {
        self.groups.iter().flat_map(|g| g.entries.iter())
    }

    pub fn group(&self, name: &str) -> Option<&PropertyGroup> {
        self.groups.iter().find(|g| g.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error("type mismatch for {property}: {message}")]
    TypeMismatch { property: String, message: String },
    #[error("the stylesheet changed since the property sheet was derived")]
    StaleSource,
}

/// The element id a rule targets when all its selectors end on the same `#id`.
fn rule_target(rule: &StyleRule) -> Option<String> {
    let mut target: Option<&str> = None;
    for chain in &rule.selectors {
        let id = chain.subject()?.0.iter().find_map(|s| match s {
            SimpleSelector::Id(id) => Some(id.as_str()),
            _ => None,
        })?;
        match target {
            Some(t) if t != id => return None,
            _ => target = Some(id),
        }
    }
    target.map(str::to_string)
}

pub fn timing_state(value: &TypedValue) -> Option<WidgetState> {
    match value {
        TypedValue::Keyword(k) if TIMING_PRESETS.contains(&k.as_str()) => Some(WidgetState::TimingCurve {
            preset: Some(k.clone()),
            bezier: BEZIER_PRESETS.iter().find(|(n, _)| n == k).map(|(_, b)| *b),
        }),
        TypedValue::Bezier(b) => Some(WidgetState::TimingCurve {
            preset: BEZIER_PRESETS
                .iter()
                .find(|(_, p)| p.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9))
                .map(|(n, _)| n.to_string()),
            bezier: Some(*b),
        }),
        _ => None,
    }
}

pub fn transform_fields(value: &TypedValue) -> Option<Vec<TransformField>> {
    let TypedValue::TransformList(fns) = value else { return None };
    Some(
        fns.iter()
            .enumerate()
            .flat_map(|(fi, f)| {
                f.args.iter().enumerate().map(move |(ai, a)| TransformField {
                    function: f.name.clone(),
                    function_index: fi,
                    arg_index: ai,
                    value: a.value,
                    unit: a.unit.clone(),
                })
            })
            .collect(),
    )
}

/// Returns the transform list with one argument replaced.
pub fn with_transform_field(value: &TypedValue, function_index: usize, arg_index: usize, new: f64) -> Option<TypedValue> {
    let TypedValue::TransformList(fns) = value else { return None };
    let mut fns: Vec<CssFunction> = fns.clone();
    let arg: &mut Dimension = fns.get_mut(function_index)?.args.get_mut(arg_index)?;
    arg.value = new;
    Some(TypedValue::TransformList(fns))
}

fn entry(path: DeclarationPath, decl: &crate::css::Declaration) -> PropertyEntry {
    let widget = widget_for(&decl.property);
    let state = match widget {
        Widget::TimingCurve => timing_state(&decl.value),
        Widget::TransformFields => transform_fields(&decl.value).map(|fields| WidgetState::TransformFields { fields }),
        _ => None,
    };
    PropertyEntry {
        property: decl.property.clone(),
        widget,
        value: decl.value.clone(),
        display: decl.raw.clone(),
        state,
        source: EntrySource {
            path,
            property: decl.property.clone(),
            raw: decl.raw.clone(),
        },
    }
}

pub fn derive_sheet(sheet: &Stylesheet, index: &ElementIndex) -> PropertySheet {
    let mut groups: Vec<PropertyGroup> = Vec::new();
    for (i, item) in sheet.items.iter().enumerate() {
        match item {
            Item::Style(rule) => {
                let selector = rule.selector_text();
                let element_id = rule_target(rule);
                let (name, kind) = match &element_id {
                    Some(id) => (id.clone(), GroupKind::Element),
                    None => (selector.clone(), GroupKind::Selector),
                };
                let pos = match groups.iter().position(|g| g.name == name && g.kind == kind) {
                    Some(p) => p,
                    None => {
                        groups.push(PropertyGroup {
                            resolved: element_id.as_deref().is_some_and(|id| index.contains_id(id)),
                            name,
                            kind,
                            selectors: Vec::new(),
                            element_id,
                            entries: Vec::new(),
                        });
                        groups.len() - 1
                    }
                };
                let group = &mut groups[pos];
                if !group.selectors.contains(&selector) {
                    group.selectors.push(selector);
                }
                for (d, decl) in rule.declarations.iter().enumerate() {
                    let path = DeclarationPath {
                        item: i,
                        frame: None,
                        declaration: d,
                    };
                    group.entries.push(entry(path, decl));
                }
            }
            Item::Keyframes(k) => {
                let mut group = PropertyGroup {
                    name: k.name.clone(),
                    kind: GroupKind::Keyframes,
                    selectors: vec![format!("@{} {}", k.at_keyword, k.name)],
                    element_id: None,
                    resolved: true,
                    entries: Vec::new(),
                };
                for (f, frame) in k.frames.iter().enumerate() {
                    for (d, decl) in frame.declarations.iter().enumerate() {
                        let path = DeclarationPath {
                            item: i,
                            frame: Some(f),
                            declaration: d,
                        };
                        group.entries.push(entry(path, decl));
                    }
                }
                groups.push(group);
            }
            Item::Raw(_) => {}
        }
    }
    PropertySheet { groups }
}

/// Writes `new_value` into the declaration `source` points at.
pub fn apply_edit(sheet: &Stylesheet, source: &EntrySource, new_value: &TypedValue) -> Result<Stylesheet, EditError> {
    let current = sheet.declaration_at(source.path).ok_or(EditError::StaleSource)?;
    if current.property != source.property || current.raw != source.raw {
        return Err(EditError::StaleSource);
    }
    check_compatible(&source.property, new_value).map_err(|message| EditError::TypeMismatch {
        property: source.property.clone(),
        message,
    })?;
    sheet.with_value_at(source.path, new_value).map_err(|e| match e {
        CssError::TypeMismatch { property, message } => EditError::TypeMismatch { property, message },
        _ => EditError::StaleSource,
    })
}
