//! Path data: parsing to absolute segments, affine transformation, and output.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use svgtypes::{PathParser, PathSegment as RawSegment};

use super::transform::{fmt_num, AffineTransform};

/// Radii below this are treated as degenerate (the arc becomes a line).
pub const DEGENERATE_RADIUS: f64 = 1e-9;

/// An absolute path command. Horizontal/vertical lines and the smooth
/// curve shorthands are expanded so every segment survives rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Segment {
    MoveTo {
        x: f64,
        y: f64,
    },
    LineTo {
        x: f64,
        y: f64,
    },
    CubicTo {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        x: f64,
        y: f64,
    },
    QuadTo {
        x1: f64,
        y1: f64,
        x: f64,
        y: f64,
    },
    ArcTo {
        rx: f64,
        ry: f64,
        x_axis_rotation: f64,
        large_arc: bool,
        sweep: bool,
        x: f64,
        y: f64,
    },
    ClosePath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathData {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid path data: {0}")]
pub struct PathError(pub String);

impl PathData {
    pub fn parse(text: &str) -> Result<PathData, PathError> {
        let mut segments = Vec::new();
        let (mut cx, mut cy) = (0.0, 0.0);
        let (mut sx, mut sy) = (0.0, 0.0);
        // reflected control points for S/T
        let mut last_cubic_ctrl: Option<(f64, f64)> = None;
        let mut last_quad_ctrl: Option<(f64, f64)> = None;

        for seg in PathParser::from(text) {
            let seg = seg.map_err(|e| PathError(e.to_string()))?;
            let rel = |abs: bool, x: f64, y: f64| if abs { (x, y) } else { (cx + x, cy + y) };
            let mut cubic_ctrl = None;
            let mut quad_ctrl = None;
            match seg {
                RawSegment::MoveTo { abs, x, y } => {
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::MoveTo { x, y });
                    (cx, cy, sx, sy) = (x, y, x, y);
                }
                RawSegment::LineTo { abs, x, y } => {
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::LineTo { x, y });
                    (cx, cy) = (x, y);
                }
                RawSegment::HorizontalLineTo { abs, x } => {
                    let x = if abs { x } else { cx + x };
                    segments.push(Segment::LineTo { x, y: cy });
                    cx = x;
                }
                RawSegment::VerticalLineTo { abs, y } => {
                    let y = if abs { y } else { cy + y };
                    segments.push(Segment::LineTo { x: cx, y });
                    cy = y;
                }
                RawSegment::CurveTo {
                    abs,
                    x1,
                    y1,
                    x2,
                    y2,
                    x,
                    y,
                } => {
                    let (x1, y1) = rel(abs, x1, y1);
                    let (x2, y2) = rel(abs, x2, y2);
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::CubicTo {
                        x1,
                        y1,
                        x2,
                        y2,
                        x,
                        y,
                    });
                    cubic_ctrl = Some((x2, y2));
                    (cx, cy) = (x, y);
                }
                RawSegment::SmoothCurveTo { abs, x2, y2, x, y } => {
                    let (x1, y1) = match last_cubic_ctrl {
                        Some((px, py)) => (2.0 * cx - px, 2.0 * cy - py),
                        None => (cx, cy),
                    };
                    let (x2, y2) = rel(abs, x2, y2);
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::CubicTo {
                        x1,
                        y1,
                        x2,
                        y2,
                        x,
                        y,
                    });
                    cubic_ctrl = Some((x2, y2));
                    (cx, cy) = (x, y);
                }
                RawSegment::Quadratic { abs, x1, y1, x, y } => {
                    let (x1, y1) = rel(abs, x1, y1);
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::QuadTo { x1, y1, x, y });
                    quad_ctrl = Some((x1, y1));
                    (cx, cy) = (x, y);
                }
                RawSegment::SmoothQuadratic { abs, x, y } => {
                    let (x1, y1) = match last_quad_ctrl {
                        Some((px, py)) => (2.0 * cx - px, 2.0 * cy - py),
                        None => (cx, cy),
                    };
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::QuadTo { x1, y1, x, y });
                    quad_ctrl = Some((x1, y1));
                    (cx, cy) = (x, y);
                }
                RawSegment::EllipticalArc {
                    abs,
                    rx,
                    ry,
                    x_axis_rotation,
                    large_arc,
                    sweep,
                    x,
                    y,
                } => {
                    let (x, y) = rel(abs, x, y);
                    segments.push(Segment::ArcTo {
                        rx: rx.abs(),
                        ry: ry.abs(),
                        x_axis_rotation,
                        large_arc,
                        sweep,
                        x,
                        y,
                    });
                    (cx, cy) = (x, y);
                }
                RawSegment::ClosePath { .. } => {
                    segments.push(Segment::ClosePath);
                    (cx, cy) = (sx, sy);
                }
            }
            last_cubic_ctrl = cubic_ctrl;
            last_quad_ctrl = quad_ctrl;
        }
        Ok(PathData { segments })
    }

    /// Applies `m` to every segment. Arcs keep their endpoint parameterization
    /// with radii and axis rotation recomputed from the mapped ellipse.
    pub fn transformed(&self, m: &AffineTransform) -> PathData {
        let flips = m.determinant() < 0.0;
        let segments = self
            .segments
            .iter()
            .map(|seg| match *seg {
                Segment::MoveTo { x, y } => {
                    let (x, y) = m.apply(x, y);
                    Segment::MoveTo { x, y }
                }
                Segment::LineTo { x, y } => {
                    let (x, y) = m.apply(x, y);
                    Segment::LineTo { x, y }
                }
                Segment::CubicTo {
                    x1,
                    y1,
                    x2,
                    y2,
                    x,
                    y,
                } => {
                    let (x1, y1) = m.apply(x1, y1);
                    let (x2, y2) = m.apply(x2, y2);
                    let (x, y) = m.apply(x, y);
                    Segment::CubicTo {
                        x1,
                        y1,
                        x2,
                        y2,
                        x,
                        y,
                    }
                }
                Segment::QuadTo { x1, y1, x, y } => {
                    let (x1, y1) = m.apply(x1, y1);
                    let (x, y) = m.apply(x, y);
                    Segment::QuadTo { x1, y1, x, y }
                }
                Segment::ArcTo {
                    rx,
                    ry,
                    x_axis_rotation,
                    large_arc,
                    sweep,
                    x,
                    y,
                } => {
                    let (x, y) = m.apply(x, y);
                    if rx < DEGENERATE_RADIUS || ry < DEGENERATE_RADIUS {
                        return Segment::LineTo { x, y };
                    }
                    let (rx, ry, x_axis_rotation) = transform_ellipse(rx, ry, x_axis_rotation, m);
                    if rx < DEGENERATE_RADIUS || ry < DEGENERATE_RADIUS {
                        return Segment::LineTo { x, y };
                    }
                    Segment::ArcTo {
                        rx,
                        ry,
                        x_axis_rotation,
                        large_arc,
                        sweep: sweep != flips,
                        x,
                        y,
                    }
                }
                Segment::ClosePath => Segment::ClosePath,
            })
            .collect();
        PathData { segments }
    }

    pub fn to_svg_string(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            if !out.is_empty() {
                out.push(' ');
            }
            match *seg {
                Segment::MoveTo { x, y } => out += &format!("M{} {}", fmt_num(x), fmt_num(y)),
                Segment::LineTo { x, y } => out += &format!("L{} {}", fmt_num(x), fmt_num(y)),
                Segment::CubicTo {
                    x1,
                    y1,
                    x2,
                    y2,
                    x,
                    y,
                } => {
                    out += &format!(
                        "C{} {} {} {} {} {}",
                        fmt_num(x1),
                        fmt_num(y1),
                        fmt_num(x2),
                        fmt_num(y2),
                        fmt_num(x),
                        fmt_num(y)
                    )
                }
                Segment::QuadTo { x1, y1, x, y } => {
                    out += &format!(
                        "Q{} {} {} {}",
                        fmt_num(x1),
                        fmt_num(y1),
                        fmt_num(x),
                        fmt_num(y)
                    )
                }
                Segment::ArcTo {
                    rx,
                    ry,
                    x_axis_rotation,
                    large_arc,
                    sweep,
                    x,
                    y,
                } => {
                    out += &format!(
                        "A{} {} {} {} {} {} {}",
                        fmt_num(rx),
                        fmt_num(ry),
                        fmt_num(x_axis_rotation),
                        u8::from(large_arc),
                        u8::from(sweep),
                        fmt_num(x),
                        fmt_num(y)
                    )
                }
                Segment::ClosePath => out.push('Z'),
            }
        }
        out
    }
}

/// Maps the ellipse with radii `(rx, ry)` rotated by `rotation_deg` through the
/// linear part of `m`, returning the new radii and rotation in degrees.
///
/// The ellipse is the image of the unit circle under `R(φ)·S(rx, ry)`; the image
/// under `m` has semi-axes equal to the singular values of `m·R(φ)·S(rx, ry)`.
pub fn transform_ellipse(
    rx: f64,
    ry: f64,
    rotation_deg: f64,
    m: &AffineTransform,
) -> (f64, f64, f64) {
    let (sin, cos) = rotation_deg.to_radians().sin_cos();
    // columns of R(φ)·S
    let (e11, e21) = (cos * rx, sin * rx);
    let (e12, e22) = (-sin * ry, cos * ry);
    let a11 = m.a * e11 + m.c * e21;
    let a21 = m.b * e11 + m.d * e21;
    let a12 = m.a * e12 + m.c * e22;
    let a22 = m.b * e12 + m.d * e22;

    // eigen-decomposition of A·Aᵀ
    let p = a11 * a11 + a12 * a12;
    let q = a11 * a21 + a12 * a22;
    let r = a21 * a21 + a22 * a22;
    let mean = (p + r) / 2.0;
    let disc = (((p - r) / 2.0).powi(2) + q * q).sqrt();
    let major = (mean + disc).max(0.0).sqrt();
    let minor = (mean - disc).max(0.0).sqrt();

    if disc <= 1e-12 * mean.max(1e-300) {
        // circle: any rotation works, keep zero
        return (major, major, 0.0);
    }
    let mut angle = 0.5 * (2.0 * q).atan2(p - r);
    if angle < 0.0 {
        angle += PI;
    }
    (major, minor, angle.to_degrees())
}

/// Endpoint → center conversion for an arc segment, following the SVG
/// implementation notes. Returns `(cx, cy, rx, ry, phi_rad, theta1, dtheta)`
/// with radii scaled up if they were too small to reach the endpoint.
#[allow(clippy::too_many_arguments)]
pub fn arc_center_parameters(
    x1: f64,
    y1: f64,
    rx: f64,
    ry: f64,
    rotation_deg: f64,
    large_arc: bool,
    sweep: bool,
    x2: f64,
    y2: f64,
) -> Option<(f64, f64, f64, f64, f64, f64, f64)> {
    if rx < DEGENERATE_RADIUS || ry < DEGENERATE_RADIUS || (x1 == x2 && y1 == y2) {
        return None;
    }
    let phi = rotation_deg.to_radians();
    let (sin, cos) = phi.sin_cos();
    let dx = (x1 - x2) / 2.0;
    let dy = (y1 - y2) / 2.0;
    let x1p = cos * dx + sin * dy;
    let y1p = -sin * dx + cos * dy;
    let (mut rx, mut ry) = (rx, ry);
    let lambda = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
    if lambda > 1.0 {
        let s = lambda.sqrt();
        rx *= s;
        ry *= s;
    }
    let num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p;
    let den = rx * rx * y1p * y1p + ry * ry * x1p * x1p;
    let mut coef = (num / den).max(0.0).sqrt();
    if large_arc == sweep {
        coef = -coef;
    }
    let cxp = coef * rx * y1p / ry;
    let cyp = -coef * ry * x1p / rx;
    let cx = cos * cxp - sin * cyp + (x1 + x2) / 2.0;
    let cy = sin * cxp + cos * cyp + (y1 + y2) / 2.0;

    let angle = |ux: f64, uy: f64, vx: f64, vy: f64| {
        let a = (ux * vy - uy * vx).atan2(ux * vx + uy * vy);
        a
    };
    let theta1 = angle(1.0, 0.0, (x1p - cxp) / rx, (y1p - cyp) / ry);
    let mut dtheta = angle(
        (x1p - cxp) / rx,
        (y1p - cyp) / ry,
        (-x1p - cxp) / rx,
        (-y1p - cyp) / ry,
    );
    if !sweep && dtheta > 0.0 {
        dtheta -= 2.0 * PI;
    } else if sweep && dtheta < 0.0 {
        dtheta += 2.0 * PI;
    }
    Some((cx, cy, rx, ry, phi, theta1, dtheta))
}
