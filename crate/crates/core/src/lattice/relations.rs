use super::{Family, KnowledgeLattice};

/// Published per-family chain counts for the four-class quadrangle base.
const QUADRANGLE_REFERENCE: [(usize, usize); 3] = [(1, 56), (2, 32), (3, 8)];
const QUADRANGLE_BASICS: [&str; 4] = ["S", "Rb", "P", "Rt"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFamily {
    /// Number of basics generating the lower node.
    pub size: usize,
    pub count: usize,
    pub reference: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    /// Strict structural pairs `(sub, sup)` by node name, aliases excluded.
    pub structural: Vec<(String, String)>,
    /// Alias pairs: distinct nodes with identical content.
    pub equivalent: Vec<(String, String)>,
    pub chains: Vec<ChainFamily>,
}

impl RelationReport {
    pub fn chain_total(&self) -> usize {
        self.chains.iter().map(|c| c.count).sum()
    }

    pub fn reference_total(&self) -> Option<usize> {
        self.chains.iter().map(|c| c.reference).sum()
    }
}

/// Lists the structural order and counts constituent chains: for each node,
/// the nodes generated by a strict superset of its basics (unions above
/// unions, intersections above intersections, both above a basic).
pub fn enumerate_relations(lattice: &KnowledgeLattice) -> RelationReport {
    let nodes = lattice.nodes();
    let mut structural = Vec::new();
    let mut equivalent = Vec::new();
    for (a, x) in nodes.iter().enumerate() {
        for (b, y) in nodes.iter().enumerate() {
            if a == b {
                continue;
            }
            if lattice.strictly_below(a, b) {
                structural.push((x.name().to_string(), y.name().to_string()));
            } else if a < b && lattice.equivalent(a, b) {
                equivalent.push((x.name().to_string(), y.name().to_string()));
            }
        }
    }

    let n = lattice.basics().len();
    let reference = lattice.basics() == QUADRANGLE_BASICS;
    let chains = (1..n)
        .map(|size| {
            let count = nodes
                .iter()
                .filter(|x| x.constituents.len() == size)
                .map(|x| {
                    nodes
                        .iter()
                        .filter(|y| {
                            y.constituents.len() > size
                                && y.constituents.is_superset(&x.constituents)
                                && (x.family == Family::Basic || x.family == y.family)
                        })
                        .count()
                })
                .sum();
            let reference = reference
                .then(|| QUADRANGLE_REFERENCE.iter().find(|r| r.0 == size).map(|r| r.1))
                .flatten();
            ChainFamily {
                size,
                count,
                reference,
            }
        })
        .collect();

    RelationReport {
        structural,
        equivalent,
        chains,
    }
}
