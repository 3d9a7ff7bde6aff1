//! Independent model of SVG geometry used to check transform baking: shapes
//! become lists of parametric curves, transforms are plain 2×3 matrices, and
//! agreement is measured as distance between sampled boundary points and the
//! other side's boundary.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type P = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Mat {
    pub const ID: Mat = Mat { a: 1.0, b: 0.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Mat {
        Mat { a, b, c, d, e, f }
    }

    /// `self` applied after `inner`.
    pub fn mul(&self, inner: &Mat) -> Mat {
        Mat {
            a: self.a * inner.a + self.c * inner.b,
            b: self.b * inner.a + self.d * inner.b,
            c: self.a * inner.c + self.c * inner.d,
            d: self.b * inner.c + self.d * inner.d,
            e: self.a * inner.e + self.c * inner.f + self.e,
            f: self.b * inner.e + self.d * inner.f + self.f,
        }
    }

    pub fn apply(&self, p: P) -> P {
        (self.a * p.0 + self.c * p.1 + self.e, self.b * p.0 + self.d * p.1 + self.f)
    }

    /// Largest singular value of the linear part.
    pub fn norm(&self) -> f64 {
        let p = self.a * self.a + self.b * self.b;
        let q = self.a * self.c + self.b * self.d;
        let r = self.c * self.c + self.d * self.d;
        let mean = (p + r) / 2.0;
        (mean + (((p - r) / 2.0).powi(2) + q * q).sqrt()).sqrt()
    }

    pub fn inverse(&self) -> Mat {
        let det = self.a * self.d - self.b * self.c;
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Mat {
            a,
            b,
            c,
            d,
            e: -(a * self.e + c * self.f),
            f: -(b * self.e + d * self.f),
        }
    }
}

/// One entry of a transform list, with the text that produces it.
#[derive(Debug, Clone)]
pub struct Step {
    pub text: String,
    pub mat: Mat,
}

pub fn translate(tx: f64, ty: f64) -> Step {
    Step {
        text: format!("translate({tx} {ty})"),
        mat: Mat::new(1.0, 0.0, 0.0, 1.0, tx, ty),
    }
}

pub fn scale(sx: f64, sy: f64) -> Step {
    Step {
        text: format!("scale({sx} {sy})"),
        mat: Mat::new(sx, 0.0, 0.0, sy, 0.0, 0.0),
    }
}

pub fn rotate(deg: f64, about: Option<P>) -> Step {
    let r = deg.to_radians();
    let rot = Mat::new(r.cos(), r.sin(), -r.sin(), r.cos(), 0.0, 0.0);
    match about {
        None => Step {
            text: format!("rotate({deg})"),
            mat: rot,
        },
        Some((cx, cy)) => Step {
            text: format!("rotate({deg} {cx} {cy})"),
            mat: Mat::new(1.0, 0.0, 0.0, 1.0, cx, cy)
                .mul(&rot)
                .mul(&Mat::new(1.0, 0.0, 0.0, 1.0, -cx, -cy)),
        },
    }
}

pub fn matrix(m: Mat) -> Step {
    Step {
        text: format!("matrix({} {} {} {} {} {})", m.a, m.b, m.c, m.d, m.e, m.f),
        mat: m,
    }
}

pub fn compose(steps: &[Step]) -> Mat {
    steps.iter().fold(Mat::ID, |acc, s| acc.mul(&s.mat))
}

pub fn list_text(steps: &[Step]) -> String {
    steps.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy)]
pub enum Curve {
    Line(P, P),
    Quad(P, P, P),
    Cubic(P, P, P, P),
    Arc {
        center: P,
        rx: f64,
        ry: f64,
        phi: f64,
        theta: f64,
        delta: f64,
    },
}

impl Curve {
    pub fn eval(&self, t: f64) -> P {
        let lerp = |p: P, q: P, t: f64| (p.0 + (q.0 - p.0) * t, p.1 + (q.1 - p.1) * t);
        match *self {
            Curve::Line(p, q) => lerp(p, q, t),
            Curve::Quad(p0, p1, p2) => lerp(lerp(p0, p1, t), lerp(p1, p2, t), t),
            Curve::Cubic(p0, p1, p2, p3) => {
                let a = lerp(p0, p1, t);
                let b = lerp(p1, p2, t);
                let c = lerp(p2, p3, t);
                lerp(lerp(a, b, t), lerp(b, c, t), t)
            }
            Curve::Arc { center, rx, ry, phi, theta, delta } => {
                let th = theta + delta * t;
                let (x, y) = (rx * th.cos(), ry * th.sin());
                (center.0 + phi.cos() * x - phi.sin() * y, center.1 + phi.sin() * x + phi.cos() * y)
            }
        }
    }

    pub fn distance(&self, q: P) -> f64 {
        if let Curve::Line(p0, p1) = *self {
            return segment_distance(q, p0, p1);
        }
        const N: usize = 96;
        let dist = |t: f64| dist(self.eval(t), q);
        let coarse: Vec<f64> = (0..=N).map(|i| dist(i as f64 / N as f64)).collect();
        let mut best = coarse.iter().copied().fold(f64::INFINITY, f64::min);
        // refine around every local minimum: a looping curve can pass near
        // the query on several branches
        let minima = (0..=N).filter(|&i| {
            (i == 0 || coarse[i] <= coarse[i - 1]) && (i == N || coarse[i] <= coarse[i + 1])
        });
        for i in minima {
            let mut lo = (i as f64 - 1.0).max(0.0) / N as f64;
            let mut hi = (i as f64 + 1.0).min(N as f64) / N as f64;
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if dist(m1) < dist(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(dist((lo + hi) / 2.0));
        }
        best
    }
}

fn dist(p: P, q: P) -> f64 {
    ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
}

fn segment_distance(q: P, p0: P, p1: P) -> f64 {
    let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(q, p0);
    }
    let t = (((q.0 - p0.0) * dx + (q.1 - p0.1) * dy) / len2).clamp(0.0, 1.0);
    dist(q, (p0.0 + t * dx, p0.1 + t * dy))
}

fn vector_angle(u: P, v: P) -> f64 {
    let sign = if u.0 * v.1 - u.1 * v.0 < 0.0 { -1.0 } else { 1.0 };
    let cos = ((u.0 * v.0 + u.1 * v.1) / (dist(u, (0.0, 0.0)) * dist(v, (0.0, 0.0)))).clamp(-1.0, 1.0);
    sign * cos.acos()
}

/// Endpoint-to-center conversion for an elliptical arc, with out-of-range
/// radii scaled up.
pub fn arc(p0: P, rx: f64, ry: f64, rotation_deg: f64, large: bool, sweep: bool, p1: P) -> Option<Curve> {
    if p0 == p1 {
        return None;
    }
    let (mut rx, mut ry) = (rx.abs(), ry.abs());
    if rx == 0.0 || ry == 0.0 {
        return Some(Curve::Line(p0, p1));
    }
    let phi = rotation_deg.to_radians();
    let (cos, sin) = (phi.cos(), phi.sin());
    let (hx, hy) = ((p0.0 - p1.0) / 2.0, (p0.1 - p1.1) / 2.0);
    let x1 = cos * hx + sin * hy;
    let y1 = -sin * hx + cos * hy;
    let lambda = x1 * x1 / (rx * rx) + y1 * y1 / (ry * ry);
    let mut coef = 0.0;
    if lambda >= 1.0 {
        // the smallest ellipse through both ends: centered on the chord
        rx *= lambda.sqrt();
        ry *= lambda.sqrt();
    } else {
        let num = rx * rx * ry * ry - rx * rx * y1 * y1 - ry * ry * x1 * x1;
        let den = rx * rx * y1 * y1 + ry * ry * x1 * x1;
        coef = (num / den).max(0.0).sqrt();
    }
    if large == sweep {
        coef = -coef;
    }
    let cxp = coef * rx * y1 / ry;
    let cyp = -coef * ry * x1 / rx;
    let center = (
        cos * cxp - sin * cyp + (p0.0 + p1.0) / 2.0,
        sin * cxp + cos * cyp + (p0.1 + p1.1) / 2.0,
    );
    let u = ((x1 - cxp) / rx, (y1 - cyp) / ry);
    let v = ((-x1 - cxp) / rx, (-y1 - cyp) / ry);
    let theta = vector_angle((1.0, 0.0), u);
    let mut delta = vector_angle(u, v) % (2.0 * PI);
    if !sweep && delta > 0.0 {
        delta -= 2.0 * PI;
    } else if sweep && delta < 0.0 {
        delta += 2.0 * PI;
    }
    Some(Curve::Arc { center, rx, ry, phi, theta, delta })
}

fn full_ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> Curve {
    Curve::Arc {
        center: (cx, cy),
        rx,
        ry,
        phi: 0.0,
        theta: 0.0,
        delta: 2.0 * PI,
    }
}

/// Interprets path data, absolute or relative, including the shorthand
/// commands.
pub fn path_curves(d: &str) -> Vec<Curve> {
    let re = regex::Regex::new(r"[MmLlHhVvCcSsQqTtAaZz]|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?").unwrap();
    let tokens: Vec<&str> = re.find_iter(d).map(|m| m.as_str()).collect();
    let mut out = Vec::new();
    let (mut cur, mut start) = ((0.0, 0.0), (0.0, 0.0));
    let mut last_ctrl: Option<(char, P)> = None;
    let mut i = 0;
    let mut cmd = 'M';
    let num = |i: &mut usize| -> f64 {
        let v = tokens[*i].parse().unwrap();
        *i += 1;
        v
    };
    while i < tokens.len() {
        if tokens[i].chars().next().unwrap().is_ascii_alphabetic() {
            cmd = tokens[i].chars().next().unwrap();
            i += 1;
            if cmd == 'Z' || cmd == 'z' {
                if cur != start {
                    out.push(Curve::Line(cur, start));
                }
                cur = start;
                last_ctrl = None;
                continue;
            }
        }
        let rel = cmd.is_ascii_lowercase();
        let off = |p: P, cur: P| if rel { (p.0 + cur.0, p.1 + cur.1) } else { p };
        let reflect = |kind: char| match last_ctrl {
            Some((k, c)) if k == kind => (2.0 * cur.0 - c.0, 2.0 * cur.1 - c.1),
            _ => cur,
        };
        match cmd.to_ascii_uppercase() {
            'M' => {
                let p = off((num(&mut i), num(&mut i)), cur);
                cur = p;
                start = p;
                cmd = if rel { 'l' } else { 'L' };
                last_ctrl = None;
            }
            'L' => {
                let p = off((num(&mut i), num(&mut i)), cur);
                out.push(Curve::Line(cur, p));
                cur = p;
                last_ctrl = None;
            }
            'H' => {
                let x = num(&mut i);
                let p = (if rel { cur.0 + x } else { x }, cur.1);
                out.push(Curve::Line(cur, p));
                cur = p;
                last_ctrl = None;
            }
            'V' => {
                let y = num(&mut i);
                let p = (cur.0, if rel { cur.1 + y } else { y });
                out.push(Curve::Line(cur, p));
                cur = p;
                last_ctrl = None;
            }
            'C' | 'S' => {
                let c1 = if cmd.eq_ignore_ascii_case(&'C') {
                    off((num(&mut i), num(&mut i)), cur)
                } else {
                    reflect('C')
                };
                let c2 = off((num(&mut i), num(&mut i)), cur);
                let p = off((num(&mut i), num(&mut i)), cur);
                out.push(Curve::Cubic(cur, c1, c2, p));
                last_ctrl = Some(('C', c2));
                cur = p;
            }
            'Q' | 'T' => {
                let c = if cmd.eq_ignore_ascii_case(&'Q') {
                    off((num(&mut i), num(&mut i)), cur)
                } else {
                    reflect('Q')
                };
                let p = off((num(&mut i), num(&mut i)), cur);
                out.push(Curve::Quad(cur, c, p));
                last_ctrl = Some(('Q', c));
                cur = p;
            }
            'A' => {
                let (rx, ry, rot) = (num(&mut i), num(&mut i), num(&mut i));
                let (large, sweep) = (num(&mut i) != 0.0, num(&mut i) != 0.0);
                let p = off((num(&mut i), num(&mut i)), cur);
                out.extend(arc(cur, rx, ry, rot, large, sweep, p));
                cur = p;
                last_ctrl = None;
            }
            other => panic!("unexpected path command {other}"),
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum Shape {
    Rect { x: f64, y: f64, w: f64, h: f64, rx: Option<f64>, ry: Option<f64> },
    Circle { cx: f64, cy: f64, r: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Line { x1: f64, y1: f64, x2: f64, y2: f64 },
    Poly { points: Vec<P>, closed: bool },
    Path { d: String },
}

impl Shape {
    pub fn markup(&self, attrs: &str) -> String {
        match self {
            Shape::Rect { x, y, w, h, rx, ry } => {
                let mut s = format!(r#"<rect {attrs} x="{x}" y="{y}" width="{w}" height="{h}""#);
                if let Some(rx) = rx {
                    s += &format!(r#" rx="{rx}""#);
                }
                if let Some(ry) = ry {
                    s += &format!(r#" ry="{ry}""#);
                }
                s + "/>"
            }
            Shape::Circle { cx, cy, r } => format!(r#"<circle {attrs} cx="{cx}" cy="{cy}" r="{r}"/>"#),
            Shape::Ellipse { cx, cy, rx, ry } => {
                format!(r#"<ellipse {attrs} cx="{cx}" cy="{cy}" rx="{rx}" ry="{ry}"/>"#)
            }
            Shape::Line { x1, y1, x2, y2 } => {
                format!(r#"<line {attrs} x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#)
            }
            Shape::Poly { points, closed } => {
                let tag = if *closed { "polygon" } else { "polyline" };
                let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
                format!(r#"<{tag} {attrs} points="{}"/>"#, pts.join(" "))
            }
            Shape::Path { d } => format!(r#"<path {attrs} d="{d}"/>"#),
        }
    }

    /// Reads a shape back from an element name and its attributes.
    pub fn read(name: &str, attr: impl Fn(&str) -> Option<String>) -> Shape {
        let n = |k: &str| attr(k).map(|v| v.trim_end_matches("px").parse::<f64>().unwrap());
        let z = |k: &str| n(k).unwrap_or(0.0);
        match name {
            "rect" => Shape::Rect {
                x: z("x"),
                y: z("y"),
                w: z("width"),
                h: z("height"),
                rx: n("rx"),
                ry: n("ry"),
            },
            "circle" => Shape::Circle { cx: z("cx"), cy: z("cy"), r: z("r") },
            "ellipse" => Shape::Ellipse { cx: z("cx"), cy: z("cy"), rx: z("rx"), ry: z("ry") },
            "line" => Shape::Line { x1: z("x1"), y1: z("y1"), x2: z("x2"), y2: z("y2") },
            "polygon" | "polyline" => {
                let nums: Vec<f64> = attr("points")
                    .unwrap_or_default()
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().unwrap())
                    .collect();
                Shape::Poly {
                    points: nums.chunks(2).map(|c| (c[0], c[1])).collect(),
                    closed: name == "polygon",
                }
            }
            "path" => Shape::Path { d: attr("d").unwrap_or_default() },
            other => panic!("not a shape: {other}"),
        }
    }

    pub fn curves(&self) -> Vec<Curve> {
        match *self {
            Shape::Rect { x, y, w, h, rx, ry } => {
                let (rx, ry) = match (rx, ry) {
                    (None, None) => (0.0, 0.0),
                    (Some(r), None) | (None, Some(r)) => (r, r),
                    (Some(a), Some(b)) => (a, b),
                };
                let (rx, ry) = (rx.min(w / 2.0), ry.min(h / 2.0));
                if rx <= 0.0 || ry <= 0.0 {
                    let c = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                    return (0..4).map(|i| Curve::Line(c[i], c[(i + 1) % 4])).collect();
                }
                let corner = |cx: f64, cy: f64, from: f64| Curve::Arc {
                    center: (cx, cy),
                    rx,
                    ry,
                    phi: 0.0,
                    theta: from,
                    delta: PI / 2.0,
                };
                vec![
                    Curve::Line((x + rx, y), (x + w - rx, y)),
                    corner(x + w - rx, y + ry, -PI / 2.0),
                    Curve::Line((x + w, y + ry), (x + w, y + h - ry)),
                    corner(x + w - rx, y + h - ry, 0.0),
                    Curve::Line((x + w - rx, y + h), (x + rx, y + h)),
                    corner(x + rx, y + h - ry, PI / 2.0),
                    Curve::Line((x, y + h - ry), (x, y + ry)),
                    corner(x + rx, y + ry, PI),
                ]
            }
            Shape::Circle { cx, cy, r } => vec![full_ellipse(cx, cy, r, r)],
            Shape::Ellipse { cx, cy, rx, ry } => vec![full_ellipse(cx, cy, rx, ry)],
            Shape::Line { x1, y1, x2, y2 } => vec![Curve::Line((x1, y1), (x2, y2))],
            Shape::Poly { ref points, closed } => {
                let mut out: Vec<Curve> = points.windows(2).map(|w| Curve::Line(w[0], w[1])).collect();
                if closed && points.len() > 2 {
                    out.push(Curve::Line(points[points.len() - 1], points[0]));
                }
                out
            }
            Shape::Path { ref d } => path_curves(d),
        }
    }
}

/// 16 points spread over the curves by parameter.
pub fn sample(curves: &[Curve]) -> Vec<P> {
    let n = curves.len() as f64;
    (0..16)
        .map(|k| {
            let u = (k as f64 + 0.5) / 16.0 * n;
            let i = (u.floor() as usize).min(curves.len() - 1);
            curves[i].eval(u - i as f64)
        })
        .collect()
}

pub fn distance_to(curves: &[Curve], q: P) -> f64 {
    curves.iter().map(|c| c.distance(q)).fold(f64::INFINITY, f64::min)
}

/// Worst disagreement, in both directions, between `source` mapped by `m`
/// and `baked`.
pub fn max_deviation(source: &Shape, m: &Mat, baked: &Shape) -> f64 {
    let src = source.curves();
    let out = baked.curves();
    let forward = sample(&src)
        .into_iter()
        .map(|p| distance_to(&out, m.apply(p)))
        .fold(0.0, f64::max);
    let inv = m.inverse();
    let backward = sample(&out)
        .into_iter()
        .map(|p| distance_to(&src, inv.apply(p)))
        .fold(0.0, f64::max);
    forward.max(backward * m.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Translate,
    UniformScale,
    Scale,
    Rotate,
    Matrix,
    Nested,
}

impl TransformKind {
    pub const ALL: [TransformKind; 6] = [
        TransformKind::Translate,
        TransformKind::UniformScale,
        TransformKind::Scale,
        TransformKind::Rotate,
        TransformKind::Matrix,
        TransformKind::Nested,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rect,
    RoundedRect,
    Circle,
    Ellipse,
    Line,
    Polyline,
    Polygon,
    Path,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 8] = [
        ShapeKind::Rect,
        ShapeKind::RoundedRect,
        ShapeKind::Circle,
        ShapeKind::Ellipse,
        ShapeKind::Line,
        ShapeKind::Polyline,
        ShapeKind::Polygon,
        ShapeKind::Path,
    ];
}

fn coord(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(-60.0..60.0f64) * 8.0).round() / 8.0
}

fn size(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(1.0..40.0f64) * 8.0).round() / 8.0
}

fn factor(rng: &mut ChaCha8Rng) -> f64 {
    let f = rng.random_range(0.25..3.0f64);
    if rng.random_bool(0.25) {
        -f
    } else {
        f
    }
}

pub fn random_shape(kind: ShapeKind, rng: &mut ChaCha8Rng) -> Shape {
    match kind {
        ShapeKind::Rect => Shape::Rect { x: coord(rng), y: coord(rng), w: size(rng), h: size(rng), rx: None, ry: None },
        ShapeKind::RoundedRect => {
            let (w, h) = (size(rng), size(rng));
            let rx = rng.random_range(0.5..w);
            Shape::Rect {
                x: coord(rng),
                y: coord(rng),
                w,
                h,
                rx: Some(rx),
                ry: if rng.random_bool(0.5) { Some(rng.random_range(0.5..h)) } else { None },
            }
        }
        ShapeKind::Circle => Shape::Circle { cx: coord(rng), cy: coord(rng), r: size(rng) },
        ShapeKind::Ellipse => Shape::Ellipse { cx: coord(rng), cy: coord(rng), rx: size(rng), ry: size(rng) },
        ShapeKind::Line => Shape::Line { x1: coord(rng), y1: coord(rng), x2: coord(rng), y2: coord(rng) },
        ShapeKind::Polyline | ShapeKind::Polygon => Shape::Poly {
            points: (0..rng.random_range(3..7)).map(|_| (coord(rng), coord(rng))).collect(),
            closed: kind == ShapeKind::Polygon,
        },
        ShapeKind::Path => Shape::Path { d: random_path(rng) },
    }
}

fn random_path(rng: &mut ChaCha8Rng) -> String {
    let mut d = format!("M{} {}", coord(rng), coord(rng));
    for _ in 0..rng.random_range(3..7) {
        let small = |rng: &mut ChaCha8Rng| (rng.random_range(-20.0..20.0f64) * 4.0).round() / 4.0;
        let seg = match rng.random_range(0..12) {
            0 => format!(" L{} {}", coord(rng), coord(rng)),
            1 => format!(" l{} {}", small(rng), small(rng)),
            2 => format!(" H{}", coord(rng)),
            3 => format!(" v{}", small(rng)),
            4 => format!(" C{} {} {} {} {} {}", coord(rng), coord(rng), coord(rng), coord(rng), coord(rng), coord(rng)),
            5 => format!(" c{} {} {} {} {} {}", small(rng), small(rng), small(rng), small(rng), small(rng), small(rng)),
            6 => format!(" S{} {} {} {}", coord(rng), coord(rng), coord(rng), coord(rng)),
            7 => format!(" Q{} {} {} {}", coord(rng), coord(rng), coord(rng), coord(rng)),
            8 => format!(" t{} {}", small(rng), small(rng)),
            _ => format!(
                " {}{} {} {} {} {} {} {}",
                if rng.random_bool(0.5) { "A" } else { "a" },
                size(rng),
                size(rng),
                rng.random_range(0..360),
                u8::from(rng.random_bool(0.5)),
                u8::from(rng.random_bool(0.5)),
                small(rng),
                small(rng)
            ),
        };
        d += &seg;
    }
    if rng.random_bool(0.5) {
        d += " Z";
    }
    d
}

fn random_step(kind: TransformKind, rng: &mut ChaCha8Rng) -> Step {
    match kind {
        TransformKind::Translate => translate(coord(rng), coord(rng)),
        TransformKind::UniformScale => {
            let s = factor(rng);
            Step {
                text: format!("scale({s})"),
                mat: Mat::new(s, 0.0, 0.0, s, 0.0, 0.0),
            }
        }
        TransformKind::Scale => scale(factor(rng), factor(rng)),
        TransformKind::Rotate => {
            let deg = rng.random_range(-360.0..360.0f64).round();
            let about = rng.random_bool(0.5).then(|| (coord(rng), coord(rng)));
            rotate(deg, about)
        }
        TransformKind::Matrix | TransformKind::Nested => loop {
            let v: Vec<f64> = (0..4).map(|_| (rng.random_range(-2.0..2.0f64) * 16.0).round() / 16.0).collect();
            if (v[0] * v[3] - v[1] * v[2]).abs() >= 0.25 {
                break matrix(Mat::new(v[0], v[1], v[2], v[3], coord(rng), coord(rng)));
            }
        },
    }
}

/// A generated case: the document text, the source shape and the oracle's
/// total transform for the element with id `target`.
pub struct Case {
    pub svg: String,
    pub shape: Shape,
    pub total: Mat,
}

pub fn random_case(transform: TransformKind, shape_kind: ShapeKind, rng: &mut ChaCha8Rng) -> Case {
    let shape = random_shape(shape_kind, rng);
    let (outer, own): (Vec<Vec<Step>>, Vec<Step>) = match transform {
        TransformKind::Nested => {
            let pool = [
                TransformKind::Translate,
                TransformKind::UniformScale,
                TransformKind::Scale,
                TransformKind::Rotate,
                TransformKind::Matrix,
            ];
            let pick = |rng: &mut ChaCha8Rng| {
                (0..rng.random_range(1..3))
                    .map(|_| random_step(pool[rng.random_range(0..pool.len())], rng))
                    .collect::<Vec<Step>>()
            };
            let groups = vec![pick(rng), pick(rng)];
            (groups, pick(rng))
        }
        kind => {
            let step = random_step(kind, rng);
            if rng.random_bool(0.5) {
                (vec![vec![step]], Vec::new())
            } else {
                (Vec::new(), vec![step])
            }
        }
    };
    let mut total = Mat::ID;
    let mut svg = String::from(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-200 -200 400 400">"#);
    for g in &outer {
        total = total.mul(&compose(g));
        svg += &format!(r#"<g transform="{}">"#, list_text(g));
    }
    total = total.mul(&compose(&own));
    let attrs = if own.is_empty() {
        r#"id="target""#.to_string()
    } else {
        format!(r#"id="target" transform="{}""#, list_text(&own))
    };
    svg += &shape.markup(&attrs);
    svg += &"</g>".repeat(outer.len());
    svg += "</svg>";
    Case { svg, shape, total }
}
