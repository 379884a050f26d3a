use std::fmt::Write;

use crate::lattice::{transliterate, KnowledgeLattice, Mode};

fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Hasse diagram as a DOT digraph, edges pointing from subclass to superclass.
pub fn export_dot(lattice: &KnowledgeLattice) -> String {
    let id = |i: usize| quoted(&transliterate(lattice.node(i).name()));
    let mut out = String::new();
    out.push_str("digraph oodn {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, node) in lattice.nodes().iter().enumerate() {
        let types = lattice.types_described(i);
        let _ = writeln!(
            out,
            "  {} [label={}, tooltip={}];",
            id(i),
            quoted(node.name()),
            quoted(&format!("{types} type(s)"))
        );
    }
    let _ = writeln!(out, "  subgraph {{ rank=max; {}; }}", id(lattice.top_index()));
    if lattice.bottom_index() != lattice.top_index() {
        let _ = writeln!(out, "  subgraph {{ rank=min; {}; }}", id(lattice.bottom_index()));
    }
    for &(a, b) in lattice.hasse() {
        let _ = writeln!(out, "  {} -> {};", id(a), id(b));
    }
    if lattice.mode() == Mode::Named {
        for group in lattice.aliases() {
            let _ = writeln!(out, "  // aliases: {}", group.join(" = "));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::fixture::quadrangle_classes;
    use crate::lattice::close_under_exploiters;

    #[test]
    fn quadrangle_graph() {
        let l = close_under_exploiters(&quadrangle_classes(), Mode::Named, 12).unwrap();
        let dot = export_dot(&l);
        assert!(dot.starts_with("digraph oodn {\n  rankdir=BT;"));
        assert_eq!(dot.matches("[label=").count(), 26);
        assert_eq!(dot.matches(" -> ").count(), l.hasse().len());
        assert!(dot.contains("subgraph { rank=max; \"SRbPRt_u\"; }"));
        assert!(dot.contains("subgraph { rank=min; \"SRbPRt_n\"; }"));
        assert!(dot.contains("\"SRb_u\" [label=\"SRb∪\""));
        assert!(dot.contains("\"S\" -> \"SRb_u\";"));
        assert!(dot.contains("// aliases: SRbPRt∩ = "));
    }

    #[test]
    fn single_node() {
        let s = quadrangle_classes().remove(0);
        let l = close_under_exploiters(&[s], Mode::Named, 12).unwrap();
        let dot = export_dot(&l);
        assert_eq!(dot.matches("[label=").count(), 1);
        assert!(!dot.contains("->"));
    }

    #[test]
    fn quoting() {
        assert_eq!(quoted("a\"b\\c"), "\"a\\\"b\\\\c\"");
    }
}
