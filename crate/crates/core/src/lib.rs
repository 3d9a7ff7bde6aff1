//! Keyframer: turn a static SVG and a natural-language request into scoped
//! CSS animations through an LLM, then lint, edit, and iterate on the result.

pub mod css;
pub mod lint;
pub mod prompting;
pub mod property_sheet;
pub mod service;
pub mod session;
pub mod stream_parse;
pub mod svg;
