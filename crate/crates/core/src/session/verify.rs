use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{create_session, IterationKind, IterationRequest, Session, SessionError};
use crate::prompting::{ReplayFixture, ReplayProvider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCheck {
    pub iteration: usize,
    pub ordinal: usize,
    pub scope_index: u32,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub iterations: usize,
    pub designs: Vec<DesignCheck>,
    /// Problems other than a CSS mismatch, such as a design count that differs.
    pub problems: Vec<String>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty() && self.designs.iter().all(|d| d.identical)
    }
}

/// Rebuilds `recorded` from its pasted SVG by sending every recorded response
/// back through the generation pipeline, then compares `css_original` of each
/// design with the recording.
pub async fn replay_session(recorded: &Session) -> Result<ReplayReport, SessionError> {
    let mut fresh = create_session(&recorded.svg_source)?;
    let mut id_map: HashMap<Uuid, Uuid> = HashMap::new();
    let mut report = ReplayReport {
        iterations: recorded.iterations.len(),
        designs: Vec::new(),
        problems: Vec::new(),
    };
    if fresh.svg.svg != recorded.svg.svg {
        report.problems.push("preprocessed svg differs".into());
    }

    for it in &recorded.iterations {
        let Some(record) = &it.request else {
            report.problems.push(format!("iteration {} has no recorded response", it.index));
            continue;
        };
        let mut fixture = ReplayFixture::from_chunks([record.full_text.clone()]);
        fixture.elapsed_seconds = Some(record.elapsed_seconds);
        fixture.error = record.error.clone();
        let provider = ReplayProvider::new(vec![fixture]).with_model(&record.model_id);

        let base_design = match it.base_design {
            Some(old) => match id_map.get(&old) {
                Some(new) => Some(*new),
                None => {
                    report.problems.push(format!("iteration {} extends an unknown design", it.index));
                    continue;
                }
            },
            None => None,
        };
        let pending = match (it.kind, it.source_iteration) {
            (IterationKind::Regenerate | IterationKind::Reprompt, Some(src)) => {
                fresh.prepare_regenerate(src, Some(&it.prompt_text))?
            }
            _ => fresh.prepare_iteration(IterationRequest {
                prompt_text: it.prompt_text.clone(),
                base_design,
                template: it.template,
            })?,
        };
        let executed = pending.execute(&provider, &mut ()).await;
        let rebuilt = match fresh.commit(executed) {
            Ok(iteration) => iteration.designs,
            Err(_) => Vec::new(),
        };

        if rebuilt.len() != it.designs.len() {
            report.problems.push(format!(
                "iteration {}: {} designs recorded, {} rebuilt",
                it.index,
                it.designs.len(),
                rebuilt.len()
            ));
        }
        for (old, new) in it.designs.iter().zip(&rebuilt) {
            id_map.insert(old.id, new.id);
            report.designs.push(DesignCheck {
                iteration: it.index,
                ordinal: old.ordinal,
                scope_index: old.scope_index,
                identical: old.css_original == new.css_original && old.scope_index == new.scope_index,
            });
        }
    }
    Ok(report)
}
