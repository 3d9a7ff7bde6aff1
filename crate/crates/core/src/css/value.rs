//! Typed declaration values for the animation property set.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    /// 0.0 ..= 1.0
    pub a: f64,
}

impl Rgba {
    pub const fn rgb(r: u8, g: u8, b: u8) -> Rgba {
        Rgba { r, g, b, a: 1.0 }
    }

    pub fn parse(text: &str) -> Option<Rgba> {
        let lower = text.trim().to_ascii_lowercase();
        if lower == "currentcolor" || lower.is_empty() {
            return None;
        }
        let c = super::color::parse_color(&lower)?;
        let (r, g, b, a) = (c.r, c.g, c.b, c.a);
        Some(Rgba { r, g, b, a })
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a >= 1.0 {
            write!(f, "#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
        } else {
            write!(f, "rgba({}, {}, {}, {})", self.r, self.g, self.b, fmt_number(self.a))
        }
    }
}

/// A number with a unit, e.g. `10deg`, `-100%`, `4px`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub value: f64,
    pub unit: String,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", fmt_number(self.value), self.unit)
    }
}

/// A function call such as `rotate(10deg)` or `brightness(100%)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CssFunction {
    pub name: String,
    pub args: Vec<Dimension>,
}

impl fmt::Display for CssFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum TypedValue {
    /// Seconds.
    Time(f64),
    Number(f64),
    Percentage(f64),
    Dimension(Dimension),
    Color(Rgba),
    Keyword(String),
    /// `cubic-bezier(x1, y1, x2, y2)`
    Bezier([f64; 4]),
    /// Transform functions; filter functions use the same shape.
    TransformList(Vec<CssFunction>),
    IdentifierList(Vec<String>),
    /// Comma-separated values, e.g. one per animation.
    List(Vec<TypedValue>),
    /// Space-separated components, e.g. `50% 50%`.
    Sequence(Vec<TypedValue>),
    Raw(String),
}

impl TypedValue {
    pub fn is_raw(&self) -> bool {
        matches!(self, TypedValue::Raw(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TypedValue::Time(_) => "time",
            TypedValue::Number(_) => "number",
            TypedValue::Percentage(_) => "percentage",
            TypedValue::Dimension(_) => "dimension",
            TypedValue::Color(_) => "color",
            TypedValue::Keyword(_) => "keyword",
            TypedValue::Bezier(_) => "bezier",
            TypedValue::TransformList(_) => "transform_list",
            TypedValue::IdentifierList(_) => "identifier_list",
            TypedValue::List(_) => "list",
            TypedValue::Sequence(_) => "sequence",
            TypedValue::Raw(_) => "raw",
        }
    }

    /// Structural equality with numeric components compared to within `tol`.
    pub fn approx_eq(&self, other: &TypedValue, tol: f64) -> bool {
        use TypedValue::*;
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        let dims = |a: &crate::css::value::Dimension, b: &crate::css::value::Dimension| a.unit == b.unit && close(a.value, b.value);
        match (self, other) {
            (Time(a), Time(b)) | (Number(a), Number(b)) | (Percentage(a), Percentage(b)) => close(*a, *b),
            (Dimension(a), Dimension(b)) => dims(a, b),
            (Color(a), Color(b)) => a.r == b.r && a.g == b.g && a.b == b.b && close(a.a, b.a),
            (Bezier(a), Bezier(b)) => a.iter().zip(b).all(|(x, y)| close(*x, *y)),
            (TransformList(a), TransformList(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(f, g)| {
                        f.name == g.name
                            && f.args.len() == g.args.len()
                            && f.args.iter().zip(&g.args).all(|(x, y)| dims(x, y))
                    })
            }
            (List(a), List(b)) | (Sequence(a), Sequence(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, tol))
            }
            _ => self == other,
        }
    }

    /// Items of a comma list, or the value itself.
    pub fn list_items(&self) -> Vec<&TypedValue> {
        match self {
            TypedValue::List(items) => items.iter().collect(),
            other => vec![other],
        }
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Time(s) => write!(f, "{}s", fmt_number(*s)),
            TypedValue::Number(n) => f.write_str(&fmt_number(*n)),
            TypedValue::Percentage(p) => write!(f, "{}%", fmt_number(*p)),
            TypedValue::Dimension(d) => write!(f, "{d}"),
            TypedValue::Color(c) => write!(f, "{c}"),
            TypedValue::Keyword(k) => f.write_str(k),
            TypedValue::Bezier([a, b, c, d]) => write!(
                f,
                "cubic-bezier({}, {}, {}, {})",
                fmt_number(*a),
                fmt_number(*b),
                fmt_number(*c),
                fmt_number(*d)
            ),
            TypedValue::TransformList(fns) => {
                for (i, func) in fns.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{func}")?;
                }
                Ok(())
            }
            TypedValue::IdentifierList(ids) => f.write_str(&ids.join(", ")),
            TypedValue::List(items) => write_joined(f, items, ", "),
            TypedValue::Sequence(items) => write_joined(f, items, " "),
            TypedValue::Raw(r) => f.write_str(r),
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[TypedValue], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

pub(crate) fn fmt_number(v: f64) -> String {
    let rounded = (v * 1e6).round() / 1e6;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

/// The grammar a property's value is read with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueGrammar {
    Duration,
    Delay,
    TimingFunction,
    IterationCount,
    Keyword,
    AnimationName,
    FontFamily,
    Opacity,
    Color,
    Transform,
    Filter,
    Position,
    Length,
    /// Individual `rotate` / `scale` / `translate` properties.
    TransformComponent,
    Unknown,
}

pub fn grammar_for(property: &str) -> ValueGrammar {
    use ValueGrammar::*;
    match property {
        "animation-duration" | "transition-duration" => Duration,
        "animation-delay" | "transition-delay" => Delay,
        "animation-timing-function" | "transition-timing-function" => TimingFunction,
        "animation-iteration-count" => IterationCount,
        "animation-direction" | "animation-play-state" | "animation-fill-mode" | "visibility"
        | "transform-box" | "display" | "mix-blend-mode" | "stroke-linecap"
        | "stroke-linejoin" | "fill-rule" | "animation-composition" => Keyword,
        "animation-name" | "transition-property" => AnimationName,
        "font-family" => FontFamily,
        "opacity" | "fill-opacity" | "stroke-opacity" | "stop-opacity" => Opacity,
        "fill" | "stroke" | "color" | "stop-color" | "background-color" | "flood-color" => Color,
        "transform" => Transform,
        "filter" => Filter,
        "transform-origin" => Position,
        "stroke-width" | "stroke-dashoffset" | "stroke-dasharray" | "font-size" | "r" | "cx"
        | "cy" | "x" | "y" | "width" | "height" | "offset-distance" => Length,
        "rotate" | "scale" | "translate" => TransformComponent,
        _ => Unknown,
    }
}

pub const TIMING_PRESETS: &[&str] = &[
    "linear",
    "ease",
    "ease-in",
    "ease-out",
    "ease-in-out",
    "step-start",
    "step-end",
];

/// Parses a declaration value for `property`. Never fails: anything outside
/// the property's grammar comes back as [`TypedValue::Raw`].
pub fn parse_value(property: &str, raw: &str) -> TypedValue {
    let raw = raw.trim();
    let lower = raw.to_ascii_lowercase();
    if lower.contains("var(") || lower.contains("calc(") || lower.contains("env(") {
        return TypedValue::Raw(raw.to_string());
    }
    let grammar = grammar_for(property);
    let parsed = match grammar {
        ValueGrammar::Duration => comma_list(&lower, |s| parse_time(s).filter(|t| *t >= 0.0).map(TypedValue::Time)),
        ValueGrammar::Delay => comma_list(&lower, |s| parse_time(s).map(TypedValue::Time)),
        ValueGrammar::TimingFunction => comma_list(&lower, parse_timing),
        ValueGrammar::IterationCount => comma_list(&lower, |s| {
            if s == "infinite" {
                Some(TypedValue::Keyword(s.into()))
            } else {
                parse_number(s).filter(|n| *n >= 0.0).map(TypedValue::Number)
            }
        }),
        ValueGrammar::Keyword => comma_list(&lower, |s| is_ident(s).then(|| TypedValue::Keyword(s.into()))),
        ValueGrammar::AnimationName => {
            let names: Option<Vec<String>> = raw
                .split(',')
                .map(|s| s.trim())
                .map(|s| is_ident(s).then(|| s.to_string()))
                .collect();
            names.map(TypedValue::IdentifierList)
        }
        ValueGrammar::FontFamily => {
            let names: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
            (!names.iter().any(String::is_empty)).then_some(TypedValue::IdentifierList(names))
        }
        ValueGrammar::Opacity => parse_number(&lower)
            .map(TypedValue::Number)
            .or_else(|| parse_percentage(&lower).map(TypedValue::Percentage)),
        ValueGrammar::Color => match lower.as_str() {
            "none" | "currentcolor" | "inherit" => Some(TypedValue::Keyword(lower.clone())),
            _ => Rgba::parse(raw).map(TypedValue::Color),
        },
        ValueGrammar::Transform | ValueGrammar::Filter => {
            if lower == "none" {
                Some(TypedValue::Keyword(lower.clone()))
            } else {
                parse_function_list(raw).map(TypedValue::TransformList)
            }
        }
        ValueGrammar::Position | ValueGrammar::Length | ValueGrammar::TransformComponent => {
            comma_list(&lower, |s| space_sequence(s, parse_scalar))
        }
        ValueGrammar::Unknown => None,
    };
    parsed.unwrap_or_else(|| TypedValue::Raw(raw.to_string()))
}

fn comma_list(text: &str, item: impl Fn(&str) -> Option<TypedValue>) -> Option<TypedValue> {
    let parts = split_top_level(text, ',');
    if parts.len() == 1 {
        return item(parts[0].trim());
    }
    let items: Option<Vec<TypedValue>> = parts.iter().map(|p| item(p.trim())).collect();
    items.map(TypedValue::List)
}

fn space_sequence(text: &str, item: impl Fn(&str) -> Option<TypedValue>) -> Option<TypedValue> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.len() {
        0 => None,
        1 => item(parts[0]),
        _ => {
            let items: Option<Vec<TypedValue>> = parts.into_iter().map(item).collect();
            items.map(TypedValue::Sequence)
        }
    }
}

/// Splits on `sep` outside parentheses.
pub(crate) fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '-' || !c.is_ascii() => {}
        _ => return false,
    }
    s != "-" && chars.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || !c.is_ascii())
}

pub(crate) fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|n| n.is_finite())
}

fn parse_percentage(s: &str) -> Option<f64> {
    parse_number(s.strip_suffix('%')?)
}

/// Seconds from `5s` / `500ms`.
pub(crate) fn parse_time(s: &str) -> Option<f64> {
    if let Some(ms) = s.strip_suffix("ms") {
        return parse_number(ms).map(|v| v / 1000.0);
    }
    parse_number(s.strip_suffix('s')?)
}

/// Splits `12.5deg` into number and unit.
fn parse_dimension(s: &str) -> Option<Dimension> {
    let split = s
        .char_indices()
        .find(|&(i, c)| c.is_ascii_alphabetic() && !(matches!(c, 'e' | 'E') && exponent_at(s, i)) || c == '%')
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let value = parse_number(&s[..split])?;
    let unit = &s[split..];
    if unit != "%" && !unit.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    Some(Dimension {
        value,
        unit: unit.to_string(),
    })
}

fn exponent_at(s: &str, i: usize) -> bool {
    let next = s[i + 1..].chars().next();
    i > 0 && matches!(next, Some(c) if c.is_ascii_digit() || c == '-' || c == '+')
}

/// A single component value: number, percentage, dimension, or keyword.
fn parse_scalar(s: &str) -> Option<TypedValue> {
    if let Some(n) = parse_number(s) {
        return Some(TypedValue::Number(n));
    }
    if let Some(p) = parse_percentage(s) {
        return Some(TypedValue::Percentage(p));
    }
    if let Some(d) = parse_dimension(s) {
        return Some(TypedValue::Dimension(d));
    }
    is_ident(s).then(|| TypedValue::Keyword(s.to_string()))
}

fn parse_timing(s: &str) -> Option<TypedValue> {
    if TIMING_PRESETS.contains(&s) {
        return Some(TypedValue::Keyword(s.to_string()));
    }
    let inner = s.strip_prefix("cubic-bezier(")?.strip_suffix(')')?;
    let nums: Option<Vec<f64>> = inner.split(',').map(parse_number).collect();
    let nums: [f64; 4] = nums?.try_into().ok()?;
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    (in_unit(nums[0]) && in_unit(nums[2])).then_some(TypedValue::Bezier(nums))
}

/// `rotate(10deg) translateY(-100%)`; every argument must be numeric.
fn parse_function_list(s: &str) -> Option<Vec<CssFunction>> {
    let mut rest = s.trim();
    let mut fns = Vec::new();
    while !rest.is_empty() {
        let open = rest.find('(')?;
        let name = rest[..open].trim();
        if !is_ident(name) {
            return None;
        }
        let close = open + rest[open..].find(')')?;
        let args_text = &rest[open + 1..close];
        let args: Option<Vec<Dimension>> = if args_text.trim().is_empty() {
            Some(Vec::new())
        } else {
            args_text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|a| !a.is_empty())
                .map(parse_dimension)
                .collect()
        };
        fns.push(CssFunction {
            name: name.to_string(),
            args: args?,
        });
        rest = rest[close + 1..].trim_start();
    }
    (!fns.is_empty()).then_some(fns)
}

/// Checks that `value` fits the grammar of `property`.
pub fn check_compatible(property: &str, value: &TypedValue) -> Result<(), String> {
    let grammar = grammar_for(property);
    if grammar == ValueGrammar::Unknown || value.is_raw() {
        return Ok(());
    }
    // the textual form must reparse to the same typed value
    let reparsed = parse_value(property, &value.to_string());
    if reparsed.approx_eq(value, 1e-6) {
        return Ok(());
    }
    Err(format!(
        "{} value `{}` does not fit {}",
        value.kind_name(),
        value,
        property
    ))
}
