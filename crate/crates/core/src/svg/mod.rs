//! SVG parsing, preprocessing, and serialization.
//!
//! The document model keeps attribute values in their raw (escaped) source
//! form so that anything the pipeline does not understand round-trips
//! unchanged.

mod bake;
mod index;
mod minify;
pub mod path;
mod preprocess;
pub mod transform;

use std::collections::{HashMap, HashSet};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use svgtypes::PointsParser;

pub use bake::bake_transforms;
pub use index::{ElementIndex, IndexEntry};
pub use minify::minify;
pub use path::{PathData, Segment};
pub use preprocess::{preprocess, PreprocessResult, PreprocessStats};
pub use transform::AffineTransform;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvgError {
    #[error("malformed XML at byte {offset}: {message}")]
    MalformedXml { offset: usize, message: String },
    #[error("root element is <{found}>, expected <svg>")]
    NotAnSvg { found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Group,
    Path,
    Rect,
    Circle,
    Ellipse,
    Line,
    Polygon,
    Polyline,
    Text,
    Other,
}

impl ElementKind {
    pub fn from_tag(name: &str) -> ElementKind {
        match name {
            "g" => ElementKind::Group,
            "path" => ElementKind::Path,
            "rect" => ElementKind::Rect,
            "circle" => ElementKind::Circle,
            "ellipse" => ElementKind::Ellipse,
            "line" => ElementKind::Line,
            "polygon" => ElementKind::Polygon,
            "polyline" => ElementKind::Polyline,
            "text" => ElementKind::Text,
            _ => ElementKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    /// Value exactly as written in the source, entities left escaped.
    pub value: String,
}

/// Kind-specific coordinates in user units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    None,
    Rect {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
        rx: Option<f64>,
        ry: Option<f64>,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
    },
    Line {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
    },
    Points {
        points: Vec<(f64, f64)>,
    },
    Path {
        data: PathData,
    },
    /// The element is a supported kind but its coordinates could not be read
    /// (units, percentages, bad path data).
    Unreadable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "raw", rename_all = "snake_case")]
pub enum Node {
    Element(SvgElement),
    Text(String),
    CData(String),
    Comment(String),
    ProcessingInstruction(String),
}

/// Markup outside the root element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "raw", rename_all = "snake_case")]
pub enum Misc {
    Declaration(String),
    Doctype(String),
    Comment(String),
    ProcessingInstruction(String),
    Whitespace(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgElement {
    pub name: String,
    pub kind: ElementKind,
    pub attributes: Vec<Attribute>,
    pub geometry: Geometry,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgWarning {
    pub element: String,
    pub id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvgDocument {
    pub prolog: Vec<Misc>,
    pub root: SvgElement,
    pub epilog: Vec<Misc>,
    pub view_box: Option<[f64; 4]>,
    pub source_text: String,
    pub warnings: Vec<SvgWarning>,
}

impl SvgElement {
    pub fn new(name: &str, attributes: Vec<Attribute>) -> SvgElement {
        let kind = ElementKind::from_tag(name);
        let mut el = SvgElement {
            name: name.to_string(),
            kind,
            attributes,
            geometry: Geometry::None,
            children: Vec::new(),
        };
        el.geometry = el.read_geometry();
        el
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    pub fn id(&self) -> Option<&str> {
        self.attr("id")
    }

    pub fn classes(&self) -> Vec<String> {
        self.attr("class")
            .map(|c| c.split_whitespace().map(str::to_string).collect())
            .unwrap_or_default()
    }

    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attributes.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.attributes.push(Attribute {
                name: name.to_string(),
                value,
            }),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let pos = self.attributes.iter().position(|a| a.name == name)?;
        Some(self.attributes.remove(pos).value)
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &SvgElement> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    /// Depth-first, document-order walk over this element and its descendants.
    pub fn walk(&self, visit: &mut impl FnMut(&SvgElement, usize)) {
        fn go(el: &SvgElement, depth: usize, visit: &mut impl FnMut(&SvgElement, usize)) {
            visit(el, depth);
            for child in el.child_elements() {
                go(child, depth + 1, visit);
            }
        }
        go(self, 0, visit)
    }

    pub(crate) fn walk_mut(&mut self, visit: &mut impl FnMut(&mut SvgElement)) {
        visit(self);
        for child in &mut self.children {
            if let Node::Element(e) = child {
                e.walk_mut(visit);
            }
        }
    }

    /// Re-derives `geometry` from the current attributes.
    pub fn read_geometry(&self) -> Geometry {
        let num = |name: &str| -> Result<f64, String> {
            match self.attr(name) {
                None => Ok(0.0),
                Some(v) => parse_length(v).ok_or_else(|| format!("unsupported {name}=\"{v}\"")),
            }
        };
        let opt_num = |name: &str| -> Result<Option<f64>, String> {
            match self.attr(name) {
                None | Some("auto") => Ok(None),
                Some(v) => parse_length(v)
                    .map(Some)
                    .ok_or_else(|| format!("unsupported {name}=\"{v}\"")),
            }
        };
        let result: Result<Geometry, String> = (|| {
            Ok(match self.kind {
                ElementKind::Rect => Geometry::Rect {
                    x: num("x")?,
                    y: num("y")?,
                    width: num("width")?,
                    height: num("height")?,
                    rx: opt_num("rx")?,
                    ry: opt_num("ry")?,
                },
                ElementKind::Circle => Geometry::Circle {
                    cx: num("cx")?,
                    cy: num("cy")?,
                    r: num("r")?,
                },
                ElementKind::Ellipse => Geometry::Ellipse {
                    cx: num("cx")?,
                    cy: num("cy")?,
                    rx: num("rx")?,
                    ry: num("ry")?,
                },
                ElementKind::Line => Geometry::Line {
                    x1: num("x1")?,
                    y1: num("y1")?,
                    x2: num("x2")?,
                    y2: num("y2")?,
                },
                ElementKind::Polygon | ElementKind::Polyline => Geometry::Points {
                    points: PointsParser::from(self.attr("points").unwrap_or("")).collect(),
                },
                ElementKind::Path => Geometry::Path {
                    data: PathData::parse(self.attr("d").unwrap_or(""))
                        .map_err(|e| e.to_string())?,
                },
                _ => Geometry::None,
            })
        })();
        result.unwrap_or_else(|reason| Geometry::Unreadable { reason })
    }
}

/// A user-unit length: a bare number or one with a `px` suffix.
pub(crate) fn parse_length(v: &str) -> Option<f64> {
    let v = v.trim();
    let v = v.strip_suffix("px").unwrap_or(v);
    v.parse::<f64>().ok().filter(|n| n.is_finite())
}

impl SvgDocument {
    pub fn ids(&self) -> Vec<String> {
        let mut ids = Vec::new();
        self.root.walk(&mut |el, _| {
            if let Some(id) = el.id() {
                ids.push(id.to_string());
            }
        });
        ids
    }

    pub fn index(&self) -> ElementIndex {
        ElementIndex::build(&self.root)
    }

    /// Equality of the element trees and surrounding markup, ignoring the
    /// source text and accumulated warnings.
    pub fn structurally_eq(&self, other: &SvgDocument) -> bool {
        self.root == other.root && self.prolog == other.prolog && self.epilog == other.epilog
    }
}

pub fn parse_svg(text: &str) -> Result<SvgDocument, SvgError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;

    let mut prolog = Vec::new();
    let mut epilog = Vec::new();
    let mut stack: Vec<(SvgElement, usize)> = Vec::new();
    let mut root: Option<SvgElement> = None;

    loop {
        let start = reader.buffer_position() as usize;
        let event = reader.read_event().map_err(|e| SvgError::MalformedXml {
            offset: reader.error_position() as usize,
            message: e.to_string(),
        })?;
        let end = reader.buffer_position() as usize;
        let raw = &text[start..end];

        let misc = match &event {
            Event::Start(_) | Event::Empty(_) => {
                let (Event::Start(tag) | Event::Empty(tag)) = &event else {
                    unreachable!()
                };
                let name = std::str::from_utf8(tag.name().as_ref())
                    .map_err(|e| malformed(start, e))?
                    .to_string();
                let mut attributes = Vec::new();
                for attr in tag.attributes().with_checks(true) {
                    let attr = attr.map_err(|e| malformed(start, e))?;
                    attributes.push(Attribute {
                        name: std::str::from_utf8(attr.key.as_ref())
                            .map_err(|e| malformed(start, e))?
                            .to_string(),
                        value: std::str::from_utf8(&attr.value)
                            .map_err(|e| malformed(start, e))?
                            .to_string(),
                    });
                }
                let element = SvgElement::new(&name, attributes);
                if stack.is_empty() && root.is_some() {
                    return Err(SvgError::MalformedXml {
                        offset: start,
                        message: "more than one root element".into(),
                    });
                }
                if matches!(event, Event::Start(_)) {
                    stack.push((element, start));
                } else {
                    attach(&mut stack, &mut root, element);
                }
                None
            }
            Event::End(_) => {
                let (element, _) = stack.pop().ok_or_else(|| SvgError::MalformedXml {
                    offset: start,
                    message: "unexpected closing tag".into(),
                })?;
                attach(&mut stack, &mut root, element);
                None
            }
            Event::Text(_) | Event::CData(_) | Event::Comment(_) | Event::PI(_)
                if !stack.is_empty() =>
            {
                let node = match event {
                    Event::Text(_) => Node::Text(raw.to_string()),
                    Event::CData(_) => Node::CData(raw.to_string()),
                    Event::Comment(_) => Node::Comment(raw.to_string()),
                    _ => Node::ProcessingInstruction(raw.to_string()),
                };
                stack.last_mut().expect("non-empty").0.children.push(node);
                None
            }
            Event::Text(_) if raw.trim().is_empty() => Some(Misc::Whitespace(raw.to_string())),
            Event::Text(_) | Event::CData(_) => {
                return Err(SvgError::MalformedXml {
                    offset: start,
                    message: "content outside the root element".into(),
                })
            }
            Event::Comment(_) => Some(Misc::Comment(raw.to_string())),
            Event::PI(_) => Some(Misc::ProcessingInstruction(raw.to_string())),
            Event::Decl(_) => Some(Misc::Declaration(raw.to_string())),
            Event::DocType(_) => Some(Misc::Doctype(raw.to_string())),
            Event::Eof => {
                if let Some((el, offset)) = stack.last() {
                    return Err(SvgError::MalformedXml {
                        offset: *offset,
                        message: format!("unclosed <{}>", el.name),
                    });
                }
                break;
            }
        };
        if let Some(m) = misc {
            if root.is_some() {
                epilog.push(m);
            } else {
                prolog.push(m);
            }
        }
    }

    let Some(mut root) = root else {
        return Err(SvgError::MalformedXml {
            offset: text.len(),
            message: "no root element".into(),
        });
    };
    let local = root.name.rsplit(':').next().unwrap_or(&root.name);
    if local != "svg" {
        return Err(SvgError::NotAnSvg {
            found: root.name.clone(),
        });
    }
    let warnings = dedupe_ids(&mut root);
    let view_box = root.attr("viewBox").and_then(|v| {
        let nums: Vec<f64> = v
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .ok()?;
        <[f64; 4]>::try_from(nums).ok()
    });
    Ok(SvgDocument {
        prolog,
        root,
        epilog,
        view_box,
        source_text: text.to_string(),
        warnings,
    })
}

fn malformed(offset: usize, e: impl std::fmt::Display) -> SvgError {
    SvgError::MalformedXml {
        offset,
        message: e.to_string(),
    }
}

fn attach(
    stack: &mut [(SvgElement, usize)],
    root: &mut Option<SvgElement>,
    element: SvgElement,
) {
    match stack.last_mut() {
        Some((parent, _)) => parent.children.push(Node::Element(element)),
        None => *root = Some(element),
    }
}

/// Keeps the first occurrence of each id; later ones get `-dup-<n>` suffixes.
fn dedupe_ids(root: &mut SvgElement) -> Vec<SvgWarning> {
    let mut all: HashSet<String> = HashSet::new();
    root.walk(&mut |el, _| {
        if let Some(id) = el.id() {
            all.insert(id.to_string());
        }
    });
    let mut seen: HashSet<String> = HashSet::new();
    let mut counters: HashMap<String, usize> = HashMap::new();
    let mut warnings = Vec::new();
    root.walk_mut(&mut |el| {
        let Some(id) = el.id().map(str::to_string) else {
            return;
        };
        if seen.insert(id.clone()) {
            return;
        }
        let n = counters.entry(id.clone()).or_insert(0);
        let renamed = loop {
            *n += 1;
            let candidate = format!("{id}-dup-{n}");
            if !all.contains(&candidate) {
                break candidate;
            }
        };
        all.insert(renamed.clone());
        seen.insert(renamed.clone());
        warnings.push(SvgWarning {
            element: el.name.clone(),
            id: Some(renamed.clone()),
            message: format!("duplicate id \"{id}\" renamed to \"{renamed}\""),
        });
        el.set_attr("id", renamed);
    });
    warnings
}

/// Serializes the document. With `id_first`, every `id` attribute is moved to
/// the front of its element's attribute list.
pub fn serialize(doc: &SvgDocument, id_first: bool) -> String {
    let mut out = String::with_capacity(doc.source_text.len());
    for m in &doc.prolog {
        out.push_str(misc_raw(m));
    }
    write_element(&mut out, &doc.root, id_first);
    for m in &doc.epilog {
        out.push_str(misc_raw(m));
    }
    out
}

fn misc_raw(m: &Misc) -> &str {
    match m {
        Misc::Declaration(s)
        | Misc::Doctype(s)
        | Misc::Comment(s)
        | Misc::ProcessingInstruction(s)
        | Misc::Whitespace(s) => s,
    }
}

fn write_element(out: &mut String, el: &SvgElement, id_first: bool) {
    out.push('<');
    out.push_str(&el.name);
    let ordered: Vec<&Attribute> = if id_first {
        el.attributes
            .iter()
            .filter(|a| a.name == "id")
            .chain(el.attributes.iter().filter(|a| a.name != "id"))
            .collect()
    } else {
        el.attributes.iter().collect()
    };
    for a in ordered {
        out.push(' ');
        out.push_str(&a.name);
        out.push_str("=\"");
        if a.value.contains('"') {
            out.push_str(&a.value.replace('"', "&quot;"));
        } else {
            out.push_str(&a.value);
        }
        out.push('"');
    }
    if el.children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    for child in &el.children {
        match child {
            Node::Element(e) => write_element(out, e, id_first),
            Node::Text(s) | Node::CData(s) | Node::Comment(s) | Node::ProcessingInstruction(s) => {
                out.push_str(s)
            }
        }
    }
    out.push_str("</");
    out.push_str(&el.name);
    out.push('>');
}
