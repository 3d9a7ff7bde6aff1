//! CSS color syntax: hex, `rgb()`/`rgba()`, `hsl()`/`hsla()`, named colors.

use super::value::parse_number;

/// Parsed color channels; alpha is kept exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Channels {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: f64,
}

pub(crate) fn parse_color(text: &str) -> Option<Channels> {
    let s = text.trim().to_ascii_lowercase();
    if let Some(hex) = s.strip_prefix('#') {
        return parse_hex(hex);
    }
    if s == "transparent" {
        return Some(Channels { r: 0, g: 0, b: 0, a: 0.0 });
    }
    if let Some(open) = s.find('(') {
        let name = &s[..open];
        let inner = s[open + 1..].strip_suffix(')')?;
        return match name {
            "rgb" | "rgba" => parse_rgb(inner),
            "hsl" | "hsla" => parse_hsl(inner),
            _ => None,
        };
    }
    let idx = NAMED.binary_search_by(|(n, _)| n.cmp(&s.as_str())).ok()?;
    let v = NAMED[idx].1;
    Some(Channels {
        r: (v >> 16) as u8,
        g: (v >> 8) as u8,
        b: v as u8,
        a: 1.0,
    })
}

fn parse_hex(hex: &str) -> Option<Channels> {
    if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let nib = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).ok().map(|v| v * 17);
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    let (r, g, b, a) = match hex.len() {
        3 => (nib(0)?, nib(1)?, nib(2)?, 255),
        4 => (nib(0)?, nib(1)?, nib(2)?, nib(3)?),
        6 => (byte(0)?, byte(2)?, byte(4)?, 255),
        8 => (byte(0)?, byte(2)?, byte(4)?, byte(6)?),
        _ => return None,
    };
    Some(Channels {
        r,
        g,
        b,
        a: round6(f64::from(a) / 255.0),
    })
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Splits `a, b, c, d` or `a b c / d` into channel and optional alpha texts.
fn components(inner: &str) -> Option<(Vec<&str>, Option<&str>)> {
    let (main, slash_alpha) = match inner.split_once('/') {
        Some((m, a)) => (m, Some(a.trim())),
        None => (inner, None),
    };
    let parts: Vec<&str> = if main.contains(',') {
        main.split(',').map(str::trim).collect()
    } else {
        main.split_whitespace().collect()
    };
    match (parts.len(), slash_alpha) {
        (3, a) => Some((parts, a)),
        (4, None) => {
            let alpha = parts[3];
            Some((parts[..3].to_vec(), Some(alpha)))
        }
        _ => None,
    }
}

fn parse_alpha(text: Option<&str>) -> Option<f64> {
    let Some(t) = text else { return Some(1.0) };
    let v = match t.strip_suffix('%') {
        Some(p) => parse_number(p)? / 100.0,
        None => parse_number(t)?,
    };
    Some(round6(v.clamp(0.0, 1.0)))
}

fn parse_rgb(inner: &str) -> Option<Channels> {
    let (parts, alpha) = components(inner)?;
    let channel = |t: &str| -> Option<u8> {
        let v = match t.strip_suffix('%') {
            Some(p) => parse_number(p)? * 255.0 / 100.0,
            None => parse_number(t)?,
        };
        Some(v.round().clamp(0.0, 255.0) as u8)
    };
    Some(Channels {
        r: channel(parts[0])?,
        g: channel(parts[1])?,
        b: channel(parts[2])?,
        a: parse_alpha(alpha)?,
    })
}

fn parse_hsl(inner: &str) -> Option<Channels> {
    let (parts, alpha) = components(inner)?;
    let hue = parts[0].strip_suffix("deg").unwrap_or(parts[0]);
    let h = parse_number(hue)?.rem_euclid(360.0) / 360.0;
    let s = (parse_number(parts[1].strip_suffix('%')?)? / 100.0).clamp(0.0, 1.0);
    let l = (parse_number(parts[2].strip_suffix('%')?)? / 100.0).clamp(0.0, 1.0);
    let q = if l < 0.5 { l * (1.0 + s) } else { l + s - l * s };
    let p = 2.0 * l - q;
    let hue_to = |mut t: f64| {
        if t < 0.0 {
            t += 1.0;
        }
        if t > 1.0 {
            t -= 1.0;
        }
        if t < 1.0 / 6.0 {
            p + (q - p) * 6.0 * t
        } else if t < 0.5 {
            q
        } else if t < 2.0 / 3.0 {
            p + (q - p) * (2.0 / 3.0 - t) * 6.0
        } else {
            p
        }
    };
    let to8 = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    Some(Channels {
        r: to8(hue_to(h + 1.0 / 3.0)),
        g: to8(hue_to(h)),
        b: to8(hue_to(h - 1.0 / 3.0)),
        a: parse_alpha(alpha)?,
    })
}

/// Sorted by name for binary search.
const NAMED: &[(&str, u32)] = &[
    ("aliceblue", 0xf0f8ff),
    ("antiquewhite", 0xfaebd7),
    ("aqua", 0x00ffff),
    ("aquamarine", 0x7fffd4),
    ("azure", 0xf0ffff),
    ("beige", 0xf5f5dc),
    ("bisque", 0xffe4c4),
    ("black", 0x000000),
    ("blanchedalmond", 0xffebcd),
    ("blue", 0x0000ff),
    ("blueviolet", 0x8a2be2),
    ("brown", 0xa52a2a),
    ("burlywood", 0xdeb887),
    ("cadetblue", 0x5f9ea0),
    ("chartreuse", 0x7fff00),
    ("chocolate", 0xd2691e),
    ("coral", 0xff7f50),
    ("cornflowerblue", 0x6495ed),
    ("cornsilk", 0xfff8dc),
    ("crimson", 0xdc143c),
    ("cyan", 0x00ffff),
    ("darkblue", 0x00008b),
    ("darkcyan", 0x008b8b),
    ("darkgoldenrod", 0xb8860b),
    ("darkgray", 0xa9a9a9),
    ("darkgreen", 0x006400),
    ("darkgrey", 0xa9a9a9),
    ("darkkhaki", 0xbdb76b),
    ("darkmagenta", 0x8b008b),
    ("darkolivegreen", 0x556b2f),
    ("darkorange", 0xff8c00),
    ("darkorchid", 0x9932cc),
    ("darkred", 0x8b0000),
    ("darksalmon", 0xe9967a),
    ("darkseagreen", 0x8fbc8f),
    ("darkslateblue", 0x483d8b),
    ("darkslategray", 0x2f4f4f),
    ("darkslategrey", 0x2f4f4f),
    ("darkturquoise", 0x00ced1),
    ("darkviolet", 0x9400d3),
    ("deeppink", 0xff1493),
    ("deepskyblue", 0x00bfff),
    ("dimgray", 0x696969),
    ("dimgrey", 0x696969),
    ("dodgerblue", 0x1e90ff),
    ("firebrick", 0xb22222),
    ("floralwhite", 0xfffaf0),
    ("forestgreen", 0x228b22),
    ("fuchsia", 0xff00ff),
    ("gainsboro", 0xdcdcdc),
    ("ghostwhite", 0xf8f8ff),
    ("gold", 0xffd700),
    ("goldenrod", 0xdaa520),
    ("gray", 0x808080),
    ("green", 0x008000),
    ("greenyellow", 0xadff2f),
    ("grey", 0x808080),
    ("honeydew", 0xf0fff0),
    ("hotpink", 0xff69b4),
    ("indianred", 0xcd5c5c),
    ("indigo", 0x4b0082),
    ("ivory", 0xfffff0),
    ("khaki", 0xf0e68c),
    ("lavender", 0xe6e6fa),
    ("lavenderblush", 0xfff0f5),
    ("lawngreen", 0x7cfc00),
    ("lemonchiffon", 0xfffacd),
    ("lightblue", 0xadd8e6),
    ("lightcoral", 0xf08080),
    ("lightcyan", 0xe0ffff),
    ("lightgoldenrodyellow", 0xfafad2),
    ("lightgray", 0xd3d3d3),
    ("lightgreen", 0x90ee90),
    ("lightgrey", 0xd3d3d3),
    ("lightpink", 0xffb6c1),
    ("lightsalmon", 0xffa07a),
    ("lightseagreen", 0x20b2aa),
    ("lightskyblue", 0x87cefa),
    ("lightslategray", 0x778899),
    ("lightslategrey", 0x778899),
    ("lightsteelblue", 0xb0c4de),
    ("lightyellow", 0xffffe0),
    ("lime", 0x00ff00),
    ("limegreen", 0x32cd32),
    ("linen", 0xfaf0e6),
    ("magenta", 0xff00ff),
    ("maroon", 0x800000),
    ("mediumaquamarine", 0x66cdaa),
    ("mediumblue", 0x0000cd),
    ("mediumorchid", 0xba55d3),
    ("mediumpurple", 0x9370db),
    ("mediumseagreen", 0x3cb371),
    ("mediumslateblue", 0x7b68ee),
    ("mediumspringgreen", 0x00fa9a),
    ("mediumturquoise", 0x48d1cc),
    ("mediumvioletred", 0xc71585),
    ("midnightblue", 0x191970),
    ("mintcream", 0xf5fffa),
    ("mistyrose", 0xffe4e1),
    ("moccasin", 0xffe4b5),
    ("navajowhite", 0xffdead),
    ("navy", 0x000080),
    ("oldlace", 0xfdf5e6),
    ("olive", 0x808000),
    ("olivedrab", 0x6b8e23),
    ("orange", 0xffa500),
    ("orangered", 0xff4500),
    ("orchid", 0xda70d6),
    ("palegoldenrod", 0xeee8aa),
    ("palegreen", 0x98fb98),
    ("paleturquoise", 0xafeeee),
    ("palevioletred", 0xdb7093),
    ("papayawhip", 0xffefd5),
    ("peachpuff", 0xffdab9),
    ("peru", 0xcd853f),
    ("pink", 0xffc0cb),
    ("plum", 0xdda0dd),
    ("powderblue", 0xb0e0e6),
    ("purple", 0x800080),
    ("rebeccapurple", 0x663399),
    ("red", 0xff0000),
    ("rosybrown", 0xbc8f8f),
    ("royalblue", 0x4169e1),
    ("saddlebrown", 0x8b4513),
    ("salmon", 0xfa8072),
    ("sandybrown", 0xf4a460),
    ("seagreen", 0x2e8b57),
    ("seashell", 0xfff5ee),
    ("sienna", 0xa0522d),
    ("silver", 0xc0c0c0),
    ("skyblue", 0x87ceeb),
    ("slateblue", 0x6a5acd),
    ("slategray", 0x708090),
    ("slategrey", 0x708090),
    ("snow", 0xfffafa),
    ("springgreen", 0x00ff7f),
    ("steelblue", 0x4682b4),
    ("tan", 0xd2b48c),
    ("teal", 0x008080),
    ("thistle", 0xd8bfd8),
    ("tomato", 0xff6347),
    ("turquoise", 0x40e0d0),
    ("violet", 0xee82ee),
    ("wheat", 0xf5deb3),
    ("white", 0xffffff),
    ("whitesmoke", 0xf5f5f5),
    ("yellow", 0xffff00),
    ("yellowgreen", 0x9acd32),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn rgba(r: u8, g: u8, b: u8, a: f64) -> Option<Channels> {
        Some(Channels { r, g, b, a })
    }

    #[test]
    fn table_is_sorted_and_unique() {
        assert!(NAMED.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(NAMED.len(), 148);
    }

    #[test]
    fn hex_forms() {
        assert_eq!(parse_color("#fA0"), rgba(255, 170, 0, 1.0));
        assert_eq!(parse_color("#ff000080"), rgba(255, 0, 0, 0.501961));
        assert_eq!(parse_color("#0000"), rgba(0, 0, 0, 0.0));
        assert_eq!(parse_color("#12345"), None);
        assert_eq!(parse_color("#ggg"), None);
    }

    #[test]
    fn functional_forms() {
        assert_eq!(parse_color("rgb(255, 0, 0)"), rgba(255, 0, 0, 1.0));
        assert_eq!(parse_color("RGBA(0,128,255,.25)"), rgba(0, 128, 255, 0.25));
        assert_eq!(parse_color("rgb(100% 50% 0% / 40%)"), rgba(255, 128, 0, 0.4));
        assert_eq!(parse_color("hsl(120, 100%, 50%)"), rgba(0, 255, 0, 1.0));
        assert_eq!(parse_color("hsla(0deg, 100%, 25%, 0.5)"), rgba(128, 0, 0, 0.5));
        assert_eq!(parse_color("hsl(240 100% 50%)"), rgba(0, 0, 255, 1.0));
        assert_eq!(parse_color("rgb(1, 2)"), None);
        assert_eq!(parse_color("lab(1 2 3)"), None);
    }

    #[test]
    fn named() {
        assert_eq!(parse_color("RebeccaPurple"), rgba(0x66, 0x33, 0x99, 1.0));
        assert_eq!(parse_color("transparent"), rgba(0, 0, 0, 0.0));
        assert_eq!(parse_color("notacolor"), None);
    }
}
