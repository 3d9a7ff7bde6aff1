//! Pushes `transform` attributes down the tree into element coordinates.

use svgtypes::{TransformListParser, TransformListToken};

use super::path::{PathData, Segment};
use super::transform::{fmt_num, AffineTransform};
use super::{ElementKind, Geometry, Node, SvgDocument, SvgElement, SvgWarning};

/// Containers whose content lives in its own coordinate system or is never
/// rendered directly; baking leaves them alone.
const OPAQUE_CONTAINERS: &[&str] = &[
    "defs",
    "clipPath",
    "mask",
    "pattern",
    "symbol",
    "marker",
    "linearGradient",
    "radialGradient",
    "filter",
    "style",
    "script",
    "title",
    "desc",
    "metadata",
];

enum ParsedTransform {
    Supported(AffineTransform),
    /// Contains skew or failed to parse; the raw text is kept.
    Unsupported(String),
}

fn parse_transform(text: &str) -> ParsedTransform {
    let mut m = AffineTransform::IDENTITY;
    for token in TransformListParser::from(text) {
        let step = match token {
            Ok(TransformListToken::Matrix { a, b, c, d, e, f }) => AffineTransform::new(a, b, c, d, e, f),
            Ok(TransformListToken::Translate { tx, ty }) => AffineTransform::translate(tx, ty),
            Ok(TransformListToken::Scale { sx, sy }) => AffineTransform::scale(sx, sy),
            Ok(TransformListToken::Rotate { angle }) => AffineTransform::rotate(angle),
            Ok(TransformListToken::SkewX { .. } | TransformListToken::SkewY { .. }) => {
                return ParsedTransform::Unsupported("skew transforms are not baked".into())
            }
            Err(e) => return ParsedTransform::Unsupported(format!("unreadable transform: {e}")),
        };
        m = m.then(&step);
    }
    ParsedTransform::Supported(m)
}

/// Applies supported transforms to geometry and removes the attributes.
/// Anything that cannot be baked keeps an equivalent `transform` attribute and
/// adds a warning to the returned document.
pub fn bake_transforms(doc: &SvgDocument) -> SvgDocument {
    let mut out = doc.clone();
    let mut warnings = Vec::new();
    bake_element(&mut out.root, AffineTransform::IDENTITY, &mut warnings);
    out.warnings.extend(warnings);
    out
}

fn warn(warnings: &mut Vec<SvgWarning>, el: &SvgElement, message: impl Into<String>) {
    warnings.push(SvgWarning {
        element: el.name.clone(),
        id: el.id().map(str::to_string),
        message: message.into(),
    });
}

fn bake_element(el: &mut SvgElement, inherited: AffineTransform, warnings: &mut Vec<SvgWarning>) {
    if OPAQUE_CONTAINERS.contains(&el.name.as_str()) {
        return;
    }
    let own = el.attr("transform").map(parse_transform);
    let local = match own {
        None => inherited,
        Some(ParsedTransform::Supported(m)) => inherited.then(&m),
        Some(ParsedTransform::Unsupported(reason)) => {
            // keep the raw list, with inherited matrix prepended
            let raw = el.attr("transform").unwrap_or_default().to_string();
            let value = if inherited.is_identity() {
                raw
            } else {
                format!("{inherited} {raw}")
            };
            el.set_attr("transform", value);
            warn(warnings, el, format!("{reason}; transform preserved"));
            bake_children(el, AffineTransform::IDENTITY, warnings);
            return;
        }
    };

    match el.kind {
        ElementKind::Group => {
            el.remove_attr("transform");
            bake_children(el, local, warnings);
        }
        ElementKind::Path
        | ElementKind::Rect
        | ElementKind::Circle
        | ElementKind::Ellipse
        | ElementKind::Line
        | ElementKind::Polygon
        | ElementKind::Polyline => {
            if local.is_identity() {
                el.remove_attr("transform");
                return;
            }
            if let Geometry::Unreadable { reason } = &el.geometry {
                let reason = reason.clone();
                el.set_attr("transform", local.to_string());
                warn(warnings, el, format!("{reason}; transform preserved"));
                return;
            }
            if has_paint_reference(el) {
                warn(
                    warnings,
                    el,
                    "references a paint server or clip; it may not follow the baked geometry",
                );
            }
            el.remove_attr("transform");
            apply_to_shape(el, &local);
            scale_stroke_width(el, &local);
        }
        ElementKind::Text | ElementKind::Other => {
            if local.is_identity() {
                el.remove_attr("transform");
            } else {
                el.set_attr("transform", local.to_string());
                warn(warnings, el, format!("<{}> transform preserved, not baked", el.name));
            }
            bake_children(el, AffineTransform::IDENTITY, warnings);
        }
    }
}

fn bake_children(el: &mut SvgElement, m: AffineTransform, warnings: &mut Vec<SvgWarning>) {
    for child in &mut el.children {
        if let Node::Element(c) = child {
            bake_element(c, m, warnings);
        }
    }
}

fn has_paint_reference(el: &SvgElement) -> bool {
    ["fill", "stroke", "clip-path", "mask", "filter"]
        .iter()
        .any(|a| el.attr(a).is_some_and(|v| v.contains("url(")))
}

fn scale_stroke_width(el: &mut SvgElement, m: &AffineTransform) {
    let scale = m.mean_scale();
    if (scale - 1.0).abs() <= 1e-12 {
        return;
    }
    if let Some(w) = el.attr("stroke-width").and_then(super::parse_length) {
        el.set_attr("stroke-width", fmt_num(w * scale));
    }
}

fn set_num(el: &mut SvgElement, name: &str, v: f64) {
    el.set_attr(name, fmt_num(v));
}

fn apply_to_shape(el: &mut SvgElement, m: &AffineTransform) {
    match el.geometry.clone() {
        Geometry::Rect {
            x,
            y,
            width,
            height,
            rx,
            ry,
        } => {
            if m.is_axis_aligned() {
                let (x0, y0) = m.apply(x, y);
                let (x1, y1) = m.apply(x + width, y + height);
                set_num(el, "x", x0.min(x1));
                set_num(el, "y", y0.min(y1));
                set_num(el, "width", (x1 - x0).abs());
                set_num(el, "height", (y1 - y0).abs());
                let (rx, ry) = rect_radii(rx, ry);
                if rx > 0.0 || ry > 0.0 {
                    set_num(el, "rx", rx * m.a.abs());
                    set_num(el, "ry", ry * m.d.abs());
                }
            } else {
                let path = rect_path(x, y, width, height, rx, ry);
                replace_with_path(el, &["x", "y", "width", "height", "rx", "ry"], path.transformed(m));
            }
        }
        Geometry::Circle { cx, cy, r } => {
            if m.is_similarity() {
                let (cx, cy) = m.apply(cx, cy);
                set_num(el, "cx", cx);
                set_num(el, "cy", cy);
                set_num(el, "r", r * m.mean_scale());
            } else {
                let path = ellipse_path(cx, cy, r, r);
                replace_with_path(el, &["cx", "cy", "r"], path.transformed(m));
            }
        }
        Geometry::Ellipse { cx, cy, rx, ry } => {
            if m.is_axis_aligned() {
                let (ncx, ncy) = m.apply(cx, cy);
                set_num(el, "cx", ncx);
                set_num(el, "cy", ncy);
                set_num(el, "rx", rx * m.a.abs());
                set_num(el, "ry", ry * m.d.abs());
            } else {
                let path = ellipse_path(cx, cy, rx, ry);
                replace_with_path(el, &["cx", "cy", "rx", "ry"], path.transformed(m));
            }
        }
        Geometry::Line { x1, y1, x2, y2 } => {
            let (x1, y1) = m.apply(x1, y1);
            let (x2, y2) = m.apply(x2, y2);
            set_num(el, "x1", x1);
            set_num(el, "y1", y1);
            set_num(el, "x2", x2);
            set_num(el, "y2", y2);
        }
        Geometry::Points { points } => {
            let text = points
                .iter()
                .map(|&(x, y)| {
                    let (x, y) = m.apply(x, y);
                    format!("{},{}", fmt_num(x), fmt_num(y))
                })
                .collect::<Vec<_>>()
                .join(" ");
            el.set_attr("points", text);
        }
        Geometry::Path { data } => {
            el.set_attr("d", data.transformed(m).to_svg_string());
        }
        Geometry::None | Geometry::Unreadable { .. } => {}
    }
    el.geometry = el.read_geometry();
}

fn replace_with_path(el: &mut SvgElement, drop: &[&str], data: PathData) {
    for name in drop {
        el.remove_attr(name);
    }
    el.name = "path".into();
    el.kind = ElementKind::Path;
    el.set_attr("d", data.to_svg_string());
}

/// Effective corner radii, applying the `auto` rules and clamping to half the size.
fn rect_radii(rx: Option<f64>, ry: Option<f64>) -> (f64, f64) {
    match (rx, ry) {
        (None, None) => (0.0, 0.0),
        (Some(r), None) | (None, Some(r)) => (r, r),
        (Some(x), Some(y)) => (x, y),
    }
}

pub(crate) fn rect_path(
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    rx: Option<f64>,
    ry: Option<f64>,
) -> PathData {
    let (rx, ry) = rect_radii(rx, ry);
    let rx = rx.clamp(0.0, w / 2.0);
    let ry = ry.clamp(0.0, h / 2.0);
    let mut s = Vec::new();
    if rx <= 0.0 || ry <= 0.0 {
        s.push(Segment::MoveTo { x, y });
        s.push(Segment::LineTo { x: x + w, y });
        s.push(Segment::LineTo { x: x + w, y: y + h });
        s.push(Segment::LineTo { x, y: y + h });
        s.push(Segment::ClosePath);
    } else {
        let arc = |x, y| Segment::ArcTo {
            rx,
            ry,
            x_axis_rotation: 0.0,
            large_arc: false,
            sweep: true,
            x,
            y,
        };
        s.push(Segment::MoveTo { x: x + rx, y });
        s.push(Segment::LineTo { x: x + w - rx, y });
        s.push(arc(x + w, y + ry));
        s.push(Segment::LineTo { x: x + w, y: y + h - ry });
        s.push(arc(x + w - rx, y + h));
        s.push(Segment::LineTo { x: x + rx, y: y + h });
        s.push(arc(x, y + h - ry));
        s.push(Segment::LineTo { x, y: y + ry });
        s.push(arc(x + rx, y));
        s.push(Segment::ClosePath);
    }
    PathData { segments: s }
}

/// Four quarter arcs; half-ellipse arcs would leave the center
/// ill-conditioned once endpoints are rounded.
pub(crate) fn ellipse_path(cx: f64, cy: f64, rx: f64, ry: f64) -> PathData {
    let arc = |x, y| Segment::ArcTo {
        rx,
        ry,
        x_axis_rotation: 0.0,
        large_arc: false,
        sweep: true,
        x,
        y,
    };
    PathData {
        segments: vec![
            Segment::MoveTo { x: cx + rx, y: cy },
            arc(cx, cy + ry),
            arc(cx - rx, cy),
            arc(cx, cy - ry),
            arc(cx + rx, cy),
            Segment::ClosePath,
        ],
    }
}
