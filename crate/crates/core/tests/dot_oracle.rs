//! DOT output checked with an independent parser.

use std::collections::BTreeSet;

use graphviz_rust::dot_structures::{EdgeTy, Graph, Id, NodeId, Stmt, Vertex};
use oodn::kbio::export_dot;
use oodn::kbio::fixture::quadrangle_classes;
use oodn::lattice::{close_under_exploiters, transliterate, KnowledgeLattice, Mode};

fn text(id: &Id) -> String {
    match id {
        Id::Escaped(s) => s[1..s.len() - 1].replace("\\\"", "\"").replace("\\\\", "\\"),
        Id::Html(s) | Id::Plain(s) | Id::Anonymous(s) => s.clone(),
    }
}

fn vertex(v: &Vertex) -> String {
    match v {
        Vertex::N(NodeId(id, _)) => text(id),
        Vertex::S(_) => panic!("subgraph used as edge endpoint"),
    }
}

struct Parsed {
    nodes: BTreeSet<String>,
    labels: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    ranks: Vec<(String, String)>,
}

fn parse(dot: &str) -> Parsed {
    let graph = graphviz_rust::parse(dot).expect("DOT must parse");
    let Graph::DiGraph { stmts, .. } = graph else {
        panic!("expected a digraph");
    };
    let mut p = Parsed {
        nodes: BTreeSet::new(),
        labels: BTreeSet::new(),
        edges: BTreeSet::new(),
        ranks: Vec::new(),
    };
    for stmt in &stmts {
        match stmt {
            Stmt::Node(n) => {
                p.nodes.insert(text(&n.id.0));
                for a in &n.attributes {
                    if text(&a.0) == "label" {
                        p.labels.insert(text(&a.1));
                    }
                }
            }
            Stmt::Edge(e) => match &e.ty {
                EdgeTy::Pair(a, b) => {
                    p.edges.insert((vertex(a), vertex(b)));
                }
                EdgeTy::Chain(vs) => {
                    for w in vs.windows(2) {
                        p.edges.insert((vertex(&w[0]), vertex(&w[1])));
                    }
                }
            },
            Stmt::Subgraph(s) => {
                let mut rank = String::new();
                let mut member = String::new();
                for inner in &s.stmts {
                    match inner {
                        Stmt::Attribute(a) if text(&a.0) == "rank" => rank = text(&a.1),
                        Stmt::Node(n) => member = text(&n.id.0),
                        _ => {}
                    }
                }
                p.ranks.push((rank, member));
            }
            _ => {}
        }
    }
    p
}

fn id(l: &KnowledgeLattice, i: usize) -> String {
    transliterate(l.node(i).name())
}

fn check(l: &KnowledgeLattice) {
    let p = parse(&export_dot(l));
    let nodes: BTreeSet<String> = (0..l.len()).map(|i| id(l, i)).collect();
    let labels: BTreeSet<String> = l.nodes().iter().map(|n| n.name().to_string()).collect();
    let edges: BTreeSet<(String, String)> =
        l.hasse().iter().map(|&(a, b)| (id(l, a), id(l, b))).collect();
    assert_eq!(p.nodes, nodes);
    assert_eq!(p.labels, labels);
    assert_eq!(p.edges, edges);
    assert!(p.ranks.contains(&("max".to_string(), id(l, l.top_index()))));
    if l.len() > 1 {
        assert!(p.ranks.contains(&("min".to_string(), id(l, l.bottom_index()))));
    }
}

#[test]
fn named_quadrangle_matches_hasse() {
    let l = close_under_exploiters(&quadrangle_classes(), Mode::Named, 12).unwrap();
    assert_eq!(l.len(), 26);
    check(&l);
}

#[test]
fn strict_quadrangle_matches_hasse() {
    let l = close_under_exploiters(&quadrangle_classes(), Mode::Strict, 12).unwrap();
    check(&l);
}

#[test]
fn single_class() {
    let l = close_under_exploiters(&quadrangle_classes()[..1], Mode::Named, 12).unwrap();
    let p = parse(&export_dot(&l));
    assert_eq!(p.nodes.len(), 1);
    assert!(p.edges.is_empty());
}

#[test]
fn edges_point_upwards() {
    let l = close_under_exploiters(&quadrangle_classes(), Mode::Named, 12).unwrap();
    for &(a, b) in l.hasse() {
        assert!(l.strictly_below(a, b));
    }
}
