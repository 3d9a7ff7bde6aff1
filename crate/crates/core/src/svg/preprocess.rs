use serde::{Deserialize, Serialize};

use super::{bake_transforms, minify, parse_svg, serialize, ElementIndex, SvgError, SvgWarning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub line_count: usize,
    pub char_count: usize,
    /// `ceil(char_count / 4)`; an approximation, not a tokenizer count.
    pub approx_tokens: usize,
}

impl PreprocessStats {
    pub fn of(text: &str) -> PreprocessStats {
        let char_count = text.chars().count();
        PreprocessStats {
            line_count: text.lines().count().max(1),
            char_count,
            approx_tokens: char_count.div_ceil(4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessResult {
    pub svg: String,
    pub index: ElementIndex,
    pub stats: PreprocessStats,
    #[serde(default)]
    pub warnings: Vec<SvgWarning>,
}

/// bake → minify → serialize with ids first.
pub fn preprocess(text: &str) -> Result<PreprocessResult, SvgError> {
    let doc = parse_svg(text)?;
    let doc = minify(&bake_transforms(&doc));
    let svg = serialize(&doc, true);
    Ok(PreprocessResult {
        stats: PreprocessStats::of(&svg),
        index: doc.index(),
        warnings: doc.warnings,
        svg,
    })
}
