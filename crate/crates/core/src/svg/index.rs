use serde::{Deserialize, Serialize};

use super::{ElementKind, SvgElement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub kind: ElementKind,
    pub depth: usize,
    /// Nearest ancestor that carries an id.
    pub parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
}

/// Identifier listing for every id-bearing element, in document order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementIndex {
    pub entries: Vec<IndexEntry>,
    /// Classes used anywhere in the document, including on elements without ids.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
}

impl ElementIndex {
    pub fn build(root: &SvgElement) -> ElementIndex {
        let mut index = ElementIndex::default();
        let mut ancestors: Vec<Option<String>> = Vec::new();
        visit(root, 0, &mut ancestors, &mut index);
        index.classes.sort();
        index.classes.dedup();
        index
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }

    pub fn get(&self, id: &str) -> Option<&IndexEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }
}

fn visit(
    el: &SvgElement,
    depth: usize,
    ancestors: &mut Vec<Option<String>>,
    index: &mut ElementIndex,
) {
    let classes = el.classes();
    index.classes.extend(classes.iter().cloned());
    if let Some(id) = el.id() {
        index.entries.push(IndexEntry {
            id: id.to_string(),
            kind: el.kind,
            depth,
            parent_id: ancestors.iter().rev().flatten().next().cloned(),
            classes,
        });
    }
    ancestors.push(el.id().map(str::to_string));
    for child in el.child_elements() {
        visit(child, depth + 1, ancestors, index);
    }
    ancestors.pop();
}
