use super::{ElementKind, Node, SvgDocument, SvgElement};

/// Namespace prefixes whose attributes affect rendering.
const KEPT_PREFIXES: &[&str] = &["xlink", "xml"];

/// Elements whose character data is content, not formatting.
const TEXT_CONTENT: &[&str] = &["text", "tspan", "textPath", "style", "script", "title", "desc"];

/// Strips comments, processing instructions, the document type declaration,
/// editor metadata, and empty groups; puts each element on its own line.
///
/// Empty groups that carry an id are kept so the identifier set is unchanged.
pub fn minify(doc: &SvgDocument) -> SvgDocument {
    let mut out = doc.clone();
    out.prolog.clear();
    out.epilog.clear();
    minify_element(&mut out.root);
    out
}

fn is_editor_name(name: &str) -> bool {
    match name.split_once(':') {
        Some(("xmlns", prefix)) => !KEPT_PREFIXES.contains(&prefix),
        Some((prefix, _)) => !KEPT_PREFIXES.contains(&prefix) && prefix != "svg",
        None => false,
    }
}

fn minify_element(el: &mut SvgElement) {
    el.attributes.retain(|a| !is_editor_name(&a.name));
    if TEXT_CONTENT.contains(&el.name.as_str()) {
        el.children
            .retain(|n| !matches!(n, Node::Comment(_) | Node::ProcessingInstruction(_)));
        return;
    }

    let old = std::mem::take(&mut el.children);
    let mut kept = Vec::new();
    for node in old {
        match node {
            Node::Element(mut child) => {
                if is_editor_name(&child.name) || child.name == "metadata" {
                    continue;
                }
                minify_element(&mut child);
                let is_empty_container = matches!(child.kind, ElementKind::Group)
                    || child.name == "defs";
                if is_empty_container && child.children.is_empty() && child.id().is_none() {
                    continue;
                }
                kept.push(Node::Element(child));
            }
            Node::Text(t) if t.trim().is_empty() => {}
            Node::Text(t) => kept.push(Node::Text(t)),
            Node::CData(c) => kept.push(Node::CData(c)),
            Node::Comment(_) | Node::ProcessingInstruction(_) => {}
        }
    }
    if kept.iter().any(|n| matches!(n, Node::Element(_))) {
        let mut spaced = Vec::with_capacity(kept.len() * 2 + 1);
        for node in kept {
            spaced.push(Node::Text("\n".into()));
            spaced.push(node);
        }
        spaced.push(Node::Text("\n".into()));
        el.children = spaced;
    } else {
        el.children = kept;
    }
}
