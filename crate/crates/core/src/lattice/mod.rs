//! Closure of basic classes under the exploiters, the subsumption order over
//! the result, its Hasse diagram, bounds, and the closed-form class counts.

mod laws;
mod relations;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::exploiters::{self, ExploitError, INTERSECTION_SUFFIX, UNION_SUFFIX};
use crate::model::{is_subclass_content, ClassSpec, MemberSet, Provenance};

pub use laws::{verify_laws, Law, LawCheck, LawReport};
pub use relations::{enumerate_relations, ChainFamily, RelationReport};

/// Default cap on the number of basic classes; node count grows as 2^(n+1).
pub const DEFAULT_MAX_BASICS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("at least one basic class is required")]
    NoBasics,
    #[error("{n} basic classes exceed the closure limit of {limit}")]
    LimitExceeded { n: usize, limit: usize },
    #[error("duplicate class name `{0}`")]
    DuplicateName(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("{kind} of {a} and {b} is not unique: {candidates:?}")]
    NonUniqueBound {
        kind: &'static str,
        a: String,
        b: String,
        candidates: Vec<String>,
    },
    #[error("class counts are defined for n >= 1")]
    InvalidCount,
    #[error("inconsistent lattice description: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Exploit(#[from] ExploitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// One node per generating subset; structural duplicates are recorded as aliases.
    Named,
    /// Structurally identical nodes are merged into one representative.
    Strict,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Named => "named",
            Mode::Strict => "strict",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "named" => Ok(Mode::Named),
            "strict" => Ok(Mode::Strict),
            other => Err(format!("unknown mode `{other}` (expected named or strict)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Basic,
    Union,
    Intersection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub class: ClassSpec,
    pub family: Family,
    /// Indices of the basic classes that generated this node.
    pub constituents: BTreeSet<usize>,
    content: Vec<MemberSet>,
}

impl Node {
    fn new(class: ClassSpec, family: Family, constituents: BTreeSet<usize>) -> Self {
        let content = class.content();
        Self {
            class,
            family,
            constituents,
            content,
        }
    }

    pub fn name(&self) -> &str {
        self.class.name()
    }

    pub fn content(&self) -> &[MemberSet] {
        &self.content
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeLattice {
    mode: Mode,
    basics: Vec<String>,
    nodes: Vec<Node>,
    index: BTreeMap<String, usize>,
    leq: Vec<Vec<bool>>,
    hasse: Vec<(usize, usize)>,
    top: usize,
    bottom: usize,
    aliases: Vec<Vec<String>>,
    empty_intersections: Vec<String>,
}

/// ASCII identifier for a node name: `∪` becomes `_u`, `∩` becomes `_n`.
pub fn transliterate(name: &str) -> String {
    name.replace(UNION_SUFFIX, "_u")
        .replace(INTERSECTION_SUFFIX, "_n")
}

fn subset_name(basics: &[ClassSpec], subset: &[usize], suffix: char) -> String {
    let mut name: String = subset.iter().map(|&i| basics[i].name()).collect();
    name.push(suffix);
    name
}

/// All index subsets of size >= 2, by size and then lexicographically.
fn generating_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 2..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            out.push(combo.clone());
            let Some(i) = (0..k).rev().find(|&i| combo[i] != i + n - k) else { break };
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Applies union and intersection to every subset of at least two basics.
pub fn close_under_exploiters(
    basics: &[ClassSpec],
    mode: Mode,
    limit: usize,
) -> Result<KnowledgeLattice, LatticeError> {
    let n = basics.len();
    if n == 0 {
        return Err(LatticeError::NoBasics);
    }
    if n > limit {
        return Err(LatticeError::LimitExceeded { n, limit });
    }
    let mut names = BTreeSet::new();
    for b in basics {
        if !names.insert(b.name()) {
            return Err(LatticeError::DuplicateName(b.name().to_string()));
        }
    }

    let subsets = generating_subsets(n);
    let generated: Vec<(ClassSpec, ClassSpec)> = subsets
        .par_iter()
        .map(|subset| -> Result<_, LatticeError> {
            let operands: Vec<ClassSpec> = subset.iter().map(|&i| basics[i].clone()).collect();
            let key: BTreeSet<String> = operands.iter().map(|c| c.name().to_string()).collect();
            let u = exploiters::union(&operands)?
                .renamed(subset_name(basics, subset, UNION_SUFFIX))
                .with_provenance(Provenance::UnionOf(key.clone()));
            let i = exploiters::intersection(&operands)?
                .renamed(subset_name(basics, subset, INTERSECTION_SUFFIX))
                .with_provenance(Provenance::IntersectionOf(key));
            Ok((u, i))
        })
        .collect::<Result<_, _>>()?;

    let mut nodes: Vec<Node> = basics
        .iter()
        .enumerate()
        .map(|(i, b)| Node::new(b.clone(), Family::Basic, BTreeSet::from([i])))
        .collect();
    let mut intersections = Vec::with_capacity(generated.len());
    for (subset, (u, i)) in subsets.iter().zip(generated) {
        let key: BTreeSet<usize> = subset.iter().copied().collect();
        nodes.push(Node::new(u, Family::Union, key.clone()));
        intersections.push(Node::new(i, Family::Intersection, key));
    }
    nodes.extend(intersections);

    let basic_names = basics.iter().map(|b| b.name().to_string()).collect();
    KnowledgeLattice::assemble(mode, basic_names, nodes, Vec::new())
}

impl KnowledgeLattice {
    /// Builds order, Hasse diagram, bounds and alias groups over `nodes`.
    /// `known_aliases` carries groups merged away in an earlier strict run.
    fn assemble(
        mode: Mode,
        basics: Vec<String>,
        nodes: Vec<Node>,
        known_aliases: Vec<Vec<String>>,
    ) -> Result<Self, LatticeError> {
        let n = basics.len();
        let full: BTreeSet<usize> = (0..n).collect();
        let find = |family: Family| {
            nodes
                .iter()
                .position(|x| x.family == family && x.constituents == full)
                .or_else(|| (n == 1).then_some(0))
                .ok_or_else(|| LatticeError::Inconsistent(format!("no {family:?} node over all basics")))
        };
        let top_name = nodes[find(Family::Union)?].name().to_string();
        let bottom_name = nodes[find(Family::Intersection)?].name().to_string();

        // Group structurally identical nodes.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            match groups.iter_mut().find(|g| nodes[g[0]].content == node.content) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        let representative = |group: &[usize]| -> usize {
            *group
                .iter()
                .min_by(|&&a, &&b| {
                    let (x, y) = (&nodes[a], &nodes[b]);
                    (x.family != Family::Basic)
                        .cmp(&(y.family != Family::Basic))
                        .then(y.constituents.len().cmp(&x.constituents.len()))
                        .then(x.name().cmp(y.name()))
                })
                .unwrap()
        };

        let mut aliases: Vec<Vec<String>> = Vec::new();
        let mut keep = vec![true; nodes.len()];
        let mut renames: BTreeMap<String, String> = BTreeMap::new();
        for group in groups.iter().filter(|g| g.len() > 1) {
            let rep = representative(group);
            let mut names: Vec<String> = vec![nodes[rep].name().to_string()];
            names.extend(
                group
                    .iter()
                    .filter(|&&i| i != rep)
                    .map(|&i| nodes[i].name().to_string()),
            );
            if mode == Mode::Strict {
                for &i in group.iter().filter(|&&i| i != rep) {
                    keep[i] = false;
                    renames.insert(nodes[i].name().to_string(), names[0].clone());
                }
            }
            aliases.push(names);
        }
        for prior in known_aliases {
            match aliases.iter_mut().find(|g| g[0] == prior[0]) {
                Some(g) => {
                    for name in &prior[1..] {
                        if !g.contains(name) {
                            g.push(name.clone());
                        }
                    }
                }
                None => aliases.push(prior),
            }
        }
        for g in &aliases {
            for name in &g[1..] {
                renames.insert(name.clone(), g[0].clone());
            }
        }

        let nodes: Vec<Node> = nodes
            .into_iter()
            .zip(keep)
            .filter_map(|(node, k)| k.then_some(node))
            .collect();
        let mut index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.name().to_string(), i).is_some() {
                return Err(LatticeError::DuplicateName(node.name().to_string()));
            }
        }
        let resolve = |name: &str| -> Result<usize, LatticeError> {
            let target = match mode {
                Mode::Strict => renames.get(name).map(String::as_str).unwrap_or(name),
                Mode::Named => name,
            };
            index
                .get(target)
                .copied()
                .ok_or_else(|| LatticeError::UnknownNode(target.to_string()))
        };
        let top = resolve(&top_name)?;
        let bottom = resolve(&bottom_name)?;

        let leq: Vec<Vec<bool>> = nodes
            .par_iter()
            .map(|a| {
                nodes
                    .iter()
                    .map(|b| is_subclass_content(&a.content, &b.content))
                    .collect()
            })
            .collect();
        let hasse = covering_edges(&leq);
        let empty_intersections = nodes
            .iter()
            .filter(|x| x.family == Family::Intersection && x.class.is_empty_class())
            .map(|x| x.name().to_string())
            .collect();

        Ok(Self {
            mode,
            basics,
            nodes,
            index,
            leq,
            hasse,
            top,
            bottom,
            aliases,
            empty_intersections,
        })
    }

    /// Rebuilds a lattice from stored nodes. Families and generating subsets
    /// are recovered from each class's provenance.
    pub fn from_classes(
        mode: Mode,
        classes: Vec<ClassSpec>,
        aliases: Vec<Vec<String>>,
    ) -> Result<Self, LatticeError> {
        let basics: Vec<String> = classes
            .iter()
            .filter(|c| c.provenance() == &Provenance::Basic)
            .map(|c| c.name().to_string())
            .collect();
        if basics.is_empty() {
            return Err(LatticeError::NoBasics);
        }
        let position: BTreeMap<&str, usize> = basics
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_str(), i))
            .collect();
        let subset = |names: &BTreeSet<String>| -> Result<BTreeSet<usize>, LatticeError> {
            names
                .iter()
                .map(|n| {
                    position.get(n.as_str()).copied().ok_or_else(|| {
                        LatticeError::Inconsistent(format!("provenance names unknown basic `{n}`"))
                    })
                })
                .collect()
        };
        let mut nodes = Vec::with_capacity(classes.len());
        for class in classes {
            let (family, constituents) = match class.provenance() {
                Provenance::Basic => (Family::Basic, BTreeSet::from([position[class.name()]])),
                Provenance::UnionOf(names) => (Family::Union, subset(names)?),
                Provenance::IntersectionOf(names) => (Family::Intersection, subset(names)?),
            };
            nodes.push(Node::new(class, family, constituents));
        }
        Self::assemble(mode, basics, nodes, aliases)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn basics(&self) -> &[String] {
        &self.basics
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn top(&self) -> &Node {
        &self.nodes[self.top]
    }

    pub fn bottom(&self) -> &Node {
        &self.nodes[self.bottom]
    }

    pub fn top_index(&self) -> usize {
        self.top
    }

    pub fn bottom_index(&self) -> usize {
        self.bottom
    }

    pub fn aliases(&self) -> &[Vec<String>] {
        &self.aliases
    }

    /// Intersection nodes whose operands shared no member.
    pub fn empty_intersections(&self) -> &[String] {
        &self.empty_intersections
    }

    pub fn generated(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.family != Family::Basic)
    }

    /// Looks a node up by name, accepting `_u` / `_n` transliterations.
    pub fn resolve(&self, name: &str) -> Result<usize, LatticeError> {
        if let Some(&i) = self.index.get(name) {
            return Ok(i);
        }
        self.nodes
            .iter()
            .position(|n| transliterate(n.name()) == name)
            .ok_or_else(|| LatticeError::UnknownNode(name.to_string()))
    }

    /// `a ⊆ b` in the subsumption order.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn strictly_below(&self, a: usize, b: usize) -> bool {
        self.leq[a][b] && !self.leq[b][a]
    }

    /// Structural aliases: mutual subsumption.
    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.leq[a][b] && self.leq[b][a]
    }

    pub fn subsumes(&self, sub: &str, sup: &str) -> Result<bool, LatticeError> {
        Ok(self.leq(self.resolve(sub)?, self.resolve(sup)?))
    }

    /// Covering pairs `(lower, upper)` of the strict order.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.leq[a][b])
            .collect()
    }

    pub fn types_described(&self, i: usize) -> usize {
        types_described(&self.nodes[i].class)
    }

    fn bound(&self, a: usize, b: usize, upper: bool) -> Result<usize, LatticeError> {
        let kind = if upper { "least upper bound" } else { "greatest lower bound" };
        let related = |c: usize| {
            if upper {
                self.leq[a][c] && self.leq[b][c]
            } else {
                self.leq[c][a] && self.leq[c][b]
            }
        };
        let candidates: Vec<usize> = (0..self.nodes.len()).filter(|&c| related(c)).collect();
        let extreme: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&c| {
                !candidates.iter().any(|&d| {
                    if upper {
                        self.strictly_below(d, c)
                    } else {
                        self.strictly_below(c, d)
                    }
                })
            })
            .collect();
        let Some(&first) = extreme.first() else {
            return Err(LatticeError::NonUniqueBound {
                kind,
                a: self.nodes[a].name().to_string(),
                b: self.nodes[b].name().to_string(),
                candidates: Vec::new(),
            });
        };
        if extreme.iter().any(|&c| !self.equivalent(first, c)) {
            let mut candidates: Vec<String> =
                extreme.iter().map(|&c| self.nodes[c].name().to_string()).collect();
            candidates.sort();
            return Err(LatticeError::NonUniqueBound {
                kind,
                a: self.nodes[a].name().to_string(),
                b: self.nodes[b].name().to_string(),
                candidates,
            });
        }
        // Among aliases prefer the node generated by exactly the combined subset.
        let family = if upper { Family::Union } else { Family::Intersection };
        let combined: BTreeSet<usize> = self.nodes[a]
            .constituents
            .union(&self.nodes[b].constituents)
            .copied()
            .collect();
        let keyed = extreme.iter().copied().find(|&c| {
            let node = &self.nodes[c];
            node.constituents == combined && (node.family == family || combined.len() == 1)
        });
        Ok(keyed.unwrap_or_else(|| {
            *extreme
                .iter()
                .min_by(|&&x, &&y| self.nodes[x].name().cmp(self.nodes[y].name()))
                .unwrap()
        }))
    }

    pub fn lub(&self, a: &str, b: &str) -> Result<&Node, LatticeError> {
        let i = self.bound(self.resolve(a)?, self.resolve(b)?, true)?;
        Ok(&self.nodes[i])
    }

    pub fn glb(&self, a: &str, b: &str) -> Result<&Node, LatticeError> {
        let i = self.bound(self.resolve(a)?, self.resolve(b)?, false)?;
        Ok(&self.nodes[i])
    }
}

/// Transitive reduction of the strict part of a preorder matrix.
pub fn covering_edges(leq: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = leq.len();
    let strict = |a: usize, b: usize| leq[a][b] && !leq[b][a];
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if strict(a, b) && !(0..n).any(|c| strict(a, c) && strict(c, b)) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Number of object types a class describes.
pub fn types_described(class: &ClassSpec) -> usize {
    class.type_count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Predictions {
    pub union: u128,
    pub intersection: u128,
    pub total: u128,
}

/// Closed-form counts of generated classes for `n` basics:
/// `2^n - n - 1` per exploiter and `2^(n+1) - 2(n+1)` in total.
pub fn predict_counts(n: usize) -> Result<Predictions, LatticeError> {
    if n == 0 || n > 126 {
        return Err(LatticeError::InvalidCount);
    }
    let n = n as u128;
    let per = (1u128 << n) - n - 1;
    Ok(Predictions {
        union: per,
        intersection: per,
        total: (1u128 << (n + 1)) - 2 * (n + 1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    pub predicted: Predictions,
    pub observed_union: usize,
    pub observed_intersection: usize,
    pub observed_total: usize,
    pub aliases: usize,
}

impl CountReport {
    pub fn matches_prediction(&self) -> bool {
        self.predicted.union == self.observed_union as u128
            && self.predicted.intersection == self.observed_intersection as u128
            && self.predicted.total == self.observed_total as u128
    }
}

/// Predicted versus observed counts of structurally distinct generated
/// classes (excluding any that coincide with a basic class).
pub fn count_report(lattice: &KnowledgeLattice) -> CountReport {
    let basics: BTreeSet<&[MemberSet]> = lattice
        .nodes
        .iter()
        .filter(|n| n.family == Family::Basic)
        .map(|n| n.content())
        .collect();
    let distinct = |pred: &dyn Fn(&Node) -> bool| {
        lattice
            .nodes
            .iter()
            .filter(|n| pred(n) && !basics.contains(n.content()))
            .map(|n| n.content())
            .collect::<BTreeSet<_>>()
            .len()
    };
    CountReport {
        n: lattice.basics.len(),
        predicted: predict_counts(lattice.basics.len()).expect("n >= 1"),
        observed_union: distinct(&|n| n.family == Family::Union),
        observed_intersection: distinct(&|n| n.family == Family::Intersection),
        observed_total: distinct(&|n| n.family != Family::Basic),
        aliases: lattice.aliases.iter().map(|g| g.len() - 1).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::fixture::quadrangle_classes;

    fn quadrangle(mode: Mode) -> KnowledgeLattice {
        close_under_exploiters(&quadrangle_classes(), mode, DEFAULT_MAX_BASICS).unwrap()
    }

    fn names(l: &KnowledgeLattice, idx: impl IntoIterator<Item = usize>) -> Vec<String> {
        idx.into_iter().map(|i| l.node(i).name().to_string()).collect()
    }

    #[test]
    fn subsets_in_size_then_lexicographic_order() {
        assert_eq!(
            generating_subsets(3),
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        );
        assert_eq!(generating_subsets(4).len(), 11);
        assert!(generating_subsets(1).is_empty());
    }

    #[test]
    fn predictions() {
        let p = predict_counts(4).unwrap();
        assert_eq!((p.union, p.intersection, p.total), (11, 11, 22));
        let p = predict_counts(1).unwrap();
        assert_eq!((p.union, p.intersection, p.total), (0, 0, 0));
        // n = 6 against brute-force subset enumeration.
        let brute = (0u32..64).filter(|m| m.count_ones() >= 2).count() as u128;
        let p = predict_counts(6).unwrap();
        assert_eq!((p.union, p.intersection, p.total), (57, 57, 114));
        assert_eq!(p.union, brute);
        assert_eq!(predict_counts(0), Err(LatticeError::InvalidCount));
    }

    #[test]
    fn named_quadrangle_has_26_nodes() {
        let l = quadrangle(Mode::Named);
        assert_eq!(l.len(), 26);
        assert_eq!(l.top().name(), "SRbPRt∪");
        assert_eq!(l.bottom().name(), "SRbPRt∩");
        assert_eq!(l.generated().count(), 22);
    }

    #[test]
    fn strict_quadrangle_collapses_intersections() {
        let l = quadrangle(Mode::Strict);
        let mut inters: Vec<_> = l
            .nodes()
            .iter()
            .filter(|n| n.family == Family::Intersection)
            .map(|n| n.name().to_string())
            .collect();
        inters.sort();
        assert_eq!(inters, vec!["PRt∩", "SRbPRt∩", "SRb∩", "SRt∩"]);
        assert_eq!(l.len(), 4 + 11 + 4);
        assert_eq!(l.aliases().len(), 1);
        assert_eq!(l.aliases()[0][0], "SRbPRt∩");
        assert_eq!(l.aliases()[0].len(), 8);
        assert_eq!(l.bottom().name(), "SRbPRt∩");
    }

    #[test]
    fn single_class_lattice() {
        let s = quadrangle_classes().remove(0);
        let l = close_under_exploiters(&[s], Mode::Named, DEFAULT_MAX_BASICS).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.top().name(), "S");
        assert_eq!(l.bottom().name(), "S");
        assert!(l.hasse().is_empty());
    }

    #[test]
    fn closure_errors() {
        assert_eq!(
            close_under_exploiters(&[], Mode::Named, 12).unwrap_err(),
            LatticeError::NoBasics
        );
        let b = quadrangle_classes();
        assert_eq!(
            close_under_exploiters(&b, Mode::Named, 3).unwrap_err(),
            LatticeError::LimitExceeded { n: 4, limit: 3 }
        );
        let dup = vec![b[0].clone(), b[0].clone()];
        assert_eq!(
            close_under_exploiters(&dup, Mode::Named, 12).unwrap_err(),
            LatticeError::DuplicateName("S".into())
        );
    }

    #[test]
    fn types_described_per_family() {
        let l = quadrangle(Mode::Named);
        assert_eq!(l.types_described(l.resolve("SRbP∪").unwrap()), 3);
        assert_eq!(l.types_described(l.resolve("S").unwrap()), 1);
        assert_eq!(l.types_described(l.resolve("SRb∩").unwrap()), 1);
        assert_eq!(l.types_described(l.top_index()), 4);
    }

    #[test]
    fn bounds() {
        let l = quadrangle(Mode::Named);
        assert_eq!(l.lub("S", "Rb").unwrap().name(), "SRb∪");
        assert_eq!(l.glb("S", "Rb").unwrap().name(), "SRb∩");
        assert_eq!(l.lub("S", "S").unwrap().name(), "S");
        assert_eq!(l.lub("S", "SRbPRt∪").unwrap().name(), "SRbPRt∪");
        assert_eq!(l.glb("S", "P").unwrap().name(), "SP∩");
        assert_eq!(l.glb("SRb_n", "P").unwrap().name(), "SRbP∩");
        assert!(matches!(l.lub("S", "nope"), Err(LatticeError::UnknownNode(_))));
        // SRb∩ and P are both below SP∪ and RbP∪, which are incomparable.
        match l.lub("SRb∩", "P") {
            Err(LatticeError::NonUniqueBound { candidates, .. }) => {
                assert_eq!(candidates, vec!["RbP∪", "SP∪"]);
            }
            other => panic!("expected a non-unique bound, got {other:?}"),
        }
    }

    #[test]
    fn lub_glb_follow_provenance_for_basic_pairs() {
        for mode in [Mode::Named, Mode::Strict] {
            let l = quadrangle(mode);
            let basics = l.basics().to_vec();
            for (i, a) in basics.iter().enumerate() {
                for b in &basics[i + 1..] {
                    let lub = l.lub(a, b).unwrap();
                    assert_eq!(lub.family, Family::Union);
                    assert_eq!(
                        lub.class.provenance(),
                        &Provenance::UnionOf([a.clone(), b.clone()].into())
                    );
                    let glb = l.glb(a, b).unwrap();
                    if mode == Mode::Named {
                        assert_eq!(
                            glb.class.provenance(),
                            &Provenance::IntersectionOf([a.clone(), b.clone()].into())
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hasse_covers_of_square() {
        let l = quadrangle(Mode::Named);
        let s = l.resolve("S").unwrap();
        let mut up: Vec<_> = names(&l, l.hasse().iter().filter(|e| e.0 == s).map(|e| e.1));
        up.sort();
        assert_eq!(up, vec!["SP∪", "SRb∪", "SRt∪"]);
        assert!(!l.hasse().iter().any(|e| e.0 == l.top_index()));
        let again = quadrangle(Mode::Named);
        assert_eq!(l.hasse(), again.hasse());
    }

    #[test]
    fn hasse_regenerates_order() {
        for mode in [Mode::Named, Mode::Strict] {
            let l = quadrangle(mode);
            let n = l.len();
            let mut reach = vec![vec![false; n]; n];
            for i in 0..n {
                reach[i][i] = true;
            }
            for &(a, b) in l.hasse() {
                reach[a][b] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if reach[i][k] && reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let expected = l.leq(i, j);
                    let via_aliases = (0..n).any(|k| l.equivalent(i, k) && reach[k][j])
                        || (0..n).any(|k| reach[i][k] && l.equivalent(k, j));
                    assert_eq!(reach[i][j] || via_aliases || l.equivalent(i, j), expected);
                }
            }
        }
    }

    #[test]
    fn order_has_top_and_bottom() {
        let l = quadrangle(Mode::Named);
        for i in 0..l.len() {
            assert!(l.leq(i, l.top_index()));
            assert!(l.leq(l.bottom_index(), i));
        }
    }

    #[test]
    fn counts_report() {
        let named = count_report(&quadrangle(Mode::Named));
        assert_eq!(named.observed_union, 11);
        assert_eq!(named.observed_intersection, 4);
        assert_eq!(named.aliases, 7);
        assert!(!named.matches_prediction());
        let strict = count_report(&quadrangle(Mode::Strict));
        assert_eq!(strict.observed_total, 15);
    }

    #[test]
    fn round_trip_through_classes() {
        for mode in [Mode::Named, Mode::Strict] {
            let l = quadrangle(mode);
            let classes = l.nodes().iter().map(|n| n.class.clone()).collect();
            let back = KnowledgeLattice::from_classes(mode, classes, l.aliases().to_vec()).unwrap();
            assert_eq!(back, l);
        }
    }

    #[test]
    fn transliteration() {
        assert_eq!(transliterate("SRb∪"), "SRb_u");
        assert_eq!(transliterate("SRbPRt∩"), "SRbPRt_n");
        let l = quadrangle(Mode::Named);
        assert!(l.subsumes("SRb_u", "SRbPRt_u").unwrap());
        assert!(!l.subsumes("SRbPRt_u", "SRb_u").unwrap());
    }
}
