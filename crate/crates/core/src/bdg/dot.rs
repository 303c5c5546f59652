//! DOT rendering of the graph. Output is byte-identical across runs for the
//! same graph: nodes and edges are already stored in sorted order.

use super::{Bdg, NodeKind};

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(bdg: &Bdg) -> String {
    let mut out = String::from("digraph bdg {\n");
    for node in &bdg.nodes {
        let shape = match node.kind {
            NodeKind::Deliverable(_) => "box",
            NodeKind::ExternalLibrary => "diamond",
            NodeKind::SourceFile => "ellipse",
        };
        let mut label = escape(&node.display_name);
        if !node.exists_guard.is_true() {
            label = format!("{label}\\n[{}]", escape(&node.exists_guard.to_string()));
        }
        out.push_str(&format!(
            "  \"{}\" [shape={shape}, label=\"{label}\"];\n",
            escape(&node.id)
        ));
    }
    if !bdg.nodes.is_empty() && !bdg.edges.is_empty() {
        out.push('\n');
    }
    for edge in &bdg.edges {
        let mut attrs = Vec::new();
        if !edge.guard.is_true() {
            attrs.push(format!("label=\"{}\"", escape(&edge.guard.to_string())));
        }
        if edge.kind == super::EdgeKind::Links {
            attrs.push("style=dashed".to_string());
        }
        let attr_text = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        out.push_str(&format!(
            "  \"{}\" -> \"{}\"{attr_text};\n",
            escape(&edge.from),
            escape(&edge.to)
        ));
    }
    out.push_str("}\n");
    out
}
