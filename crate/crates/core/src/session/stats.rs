use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{word_normal, IterationKind, Session};

/// Corpus statistics over one or more sessions.
///
/// Prompts are compared per session after collapsing whitespace; a prompt
/// counts as a reprompt when its first appearance came from editing an
/// earlier prompt.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub empty: bool,
    pub session_count: usize,
    /// Every submission, regenerations included.
    pub prompt_submissions: usize,
    pub unique_prompt_count: usize,
    pub mean_words_per_prompt: f64,
    pub reprompt_fraction: f64,
    /// All designs, regenerations included.
    pub designs_generated: usize,
    /// Designs from iterations that were not plain regenerations.
    pub designs_generated_exclusive: usize,
    pub designs_edited: usize,
    pub fraction_code_instances_edited: f64,
    pub response_count: usize,
    pub mean_response_seconds: f64,
    pub designs_with_errors: usize,
    /// Designs whose lint report has errors, over designs generated.
    pub css_error_rate: f64,
    /// Iterations with at least one erroneous design, over iterations that produced designs.
    pub prompt_error_rate: f64,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

pub fn compute_stats(sessions: &[Session]) -> SessionStats {
    let mut s = SessionStats {
        session_count: sessions.len(),
        ..SessionStats::default()
    };
    let mut words = 0usize;
    let mut reprompts = 0usize;
    let mut seconds = 0.0;
    let mut productive_iterations = 0usize;
    let mut erroneous_iterations = 0usize;

    for session in sessions {
        let mut seen = HashSet::new();
        for it in &session.iterations {
            s.prompt_submissions += 1;
            let text = word_normal(&it.prompt_text);
            if seen.insert(text.clone()) {
                s.unique_prompt_count += 1;
                words += text.split(' ').filter(|w| !w.is_empty()).count();
                if it.kind == IterationKind::Reprompt {
                    reprompts += 1;
                }
            }
            if let Some(r) = it.request.as_ref().filter(|r| r.succeeded()) {
                s.response_count += 1;
                seconds += r.elapsed_seconds;
            }
            s.designs_generated += it.designs.len();
            if it.kind != IterationKind::Regenerate {
                s.designs_generated_exclusive += it.designs.len();
            }
            s.designs_edited += it.designs.iter().filter(|d| !d.edits.is_empty()).count();
            let bad = it.designs.iter().filter(|d| d.lint.error_count > 0).count();
            s.designs_with_errors += bad;
            if !it.designs.is_empty() {
                productive_iterations += 1;
                erroneous_iterations += usize::from(bad > 0);
            }
        }
    }

    s.empty = s.prompt_submissions == 0;
    s.mean_words_per_prompt = ratio(words, s.unique_prompt_count);
    s.reprompt_fraction = ratio(reprompts, s.unique_prompt_count);
    s.fraction_code_instances_edited = ratio(s.designs_edited, s.designs_generated);
    s.mean_response_seconds = if s.response_count == 0 {
        0.0
    } else {
        seconds / s.response_count as f64
    };
    s.css_error_rate = ratio(s.designs_with_errors, s.designs_generated);
    s.prompt_error_rate = ratio(erroneous_iterations, productive_iterations);
    s
}

impl SessionStats {
    /// Two aligned columns, one statistic per line.
    pub fn to_table(&self) -> String {
        let rows: Vec<(&str, String)> = vec![
            ("sessions", self.session_count.to_string()),
            ("prompt submissions", self.prompt_submissions.to_string()),
            ("unique prompts", self.unique_prompt_count.to_string()),
            ("mean words per prompt", format!("{:.2}", self.mean_words_per_prompt)),
            ("reprompt fraction", format!("{:.3}", self.reprompt_fraction)),
            ("designs generated", self.designs_generated.to_string()),
            ("designs (excl. regenerations)", self.designs_generated_exclusive.to_string()),
            ("designs edited", self.designs_edited.to_string()),
            ("edited fraction", format!("{:.3}", self.fraction_code_instances_edited)),
            ("responses timed", self.response_count.to_string()),
            ("mean response seconds", format!("{:.2}", self.mean_response_seconds)),
            ("designs with css errors", self.designs_with_errors.to_string()),
            ("css error rate", format!("{:.3}", self.css_error_rate)),
            ("prompt error rate", format!("{:.3}", self.prompt_error_rate)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        if self.empty {
            out.push_str("(empty corpus)\n");
        }
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v:>8}");
        }
        out
    }
}
