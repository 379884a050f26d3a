use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::KnowledgeLattice;
use crate::exploiters::{intersection, union, ExploitError};
use crate::model::{ClassSpec, MemberSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Law {
    Associativity,
    Commutativity,
    Idempotency,
    Absorption,
    Identity,
    UnionOrder,
    IntersectionOrder,
}

impl Law {
    pub fn label(self) -> &'static str {
        match self {
            Law::Associativity => "L1 associativity",
            Law::Commutativity => "L2 commutativity",
            Law::Idempotency => "L3 idempotency",
            Law::Absorption => "L4 absorption",
            Law::Identity => "L5 identity",
            Law::UnionOrder => "order: a ⊆ b iff a ∪ b = b",
            Law::IntersectionOrder => "order: a ⊆ b iff a ∩ b = a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawCheck {
    pub law: Law,
    pub cases: usize,
    pub failures: usize,
    /// Node names of the first failing case, with a short description.
    pub counterexample: Option<(Vec<String>, String)>,
}

impl LawCheck {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<LawCheck>,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(LawCheck::holds)
    }
}

type Outcome = Result<bool, ExploitError>;

struct Checker<'a> {
    lattice: &'a KnowledgeLattice,
    check: LawCheck,
}

impl<'a> Checker<'a> {
    fn new(lattice: &'a KnowledgeLattice, law: Law) -> Self {
        Self {
            lattice,
            check: LawCheck {
                law,
                cases: 0,
                failures: 0,
                counterexample: None,
            },
        }
    }

    fn record(&mut self, nodes: &[usize], what: &str, outcome: Outcome) {
        self.check.cases += 1;
        let detail = match outcome {
            Ok(true) => return,
            Ok(false) => what.to_string(),
            Err(e) => format!("{what}: {e}"),
        };
        self.check.failures += 1;
        if self.check.counterexample.is_none() {
            let names = nodes
                .iter()
                .map(|&i| self.lattice.node(i).name().to_string())
                .collect();
            self.check.counterexample = Some((names, detail));
        }
    }
}

fn u(a: &ClassSpec, b: &ClassSpec) -> Result<ClassSpec, ExploitError> {
    union(&[a.clone(), b.clone()])
}

fn i(a: &ClassSpec, b: &ClassSpec) -> Result<ClassSpec, ExploitError> {
    intersection(&[a.clone(), b.clone()])
}

fn same(a: &ClassSpec, b: &ClassSpec) -> bool {
    a.content() == b.content()
}

fn same_content(a: &ClassSpec, b: &[MemberSet]) -> bool {
    a.content() == b
}

/// Checks the lattice laws by recomputing the exploiters on node classes.
/// L1 to L3 run on `samples` random triples drawn with `seed`; absorption and
/// the order equivalences run on every pair and identities on every node.
pub fn verify_laws(lattice: &KnowledgeLattice, samples: usize, seed: u64) -> LawReport {
    let n = lattice.len();
    let class = |k: usize| &lattice.node(k).class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<[usize; 3]> = (0..samples)
        .map(|_| [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)])
        .collect();

    let mut assoc = Checker::new(lattice, Law::Associativity);
    let mut comm = Checker::new(lattice, Law::Commutativity);
    let mut idem = Checker::new(lattice, Law::Idempotency);
    for &[x, y, z] in &triples {
        let (a, b, c) = (class(x), class(y), class(z));
        let ids = [x, y, z];
        assoc.record(&ids, "(a ∪ b) ∪ c = a ∪ (b ∪ c)", (|| {
            Ok(same(&u(&u(a, b)?, c)?, &u(a, &u(b, c)?)?))
        })());
        assoc.record(&ids, "(a ∩ b) ∩ c = a ∩ (b ∩ c)", (|| {
            Ok(same(&i(&i(a, b)?, c)?, &i(a, &i(b, c)?)?))
        })());
        comm.record(&ids[..2], "a ∪ b = b ∪ a", (|| Ok(same(&u(a, b)?, &u(b, a)?)))());
        comm.record(&ids[..2], "a ∩ b = b ∩ a", (|| Ok(same(&i(a, b)?, &i(b, a)?)))());
        idem.record(&ids[..1], "a ∪ a = a", (|| Ok(same(&u(a, a)?, a)))());
        idem.record(&ids[..1], "a ∩ a = a", (|| Ok(same(&i(a, a)?, a)))());
    }

    let mut absorb = Checker::new(lattice, Law::Absorption);
    let mut union_order = Checker::new(lattice, Law::UnionOrder);
    let mut inter_order = Checker::new(lattice, Law::IntersectionOrder);
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (class(x), class(y));
            let ids = [x, y];
            absorb.record(&ids, "a ∪ (a ∩ b) = a", (|| Ok(same(&u(a, &i(a, b)?)?, a)))());
            absorb.record(&ids, "a ∩ (a ∪ b) = a", (|| Ok(same(&i(a, &u(a, b)?)?, a)))());
            let below = lattice.leq(x, y);
            union_order.record(&ids, "a ⊆ b iff a ∪ b = b", (|| {
                Ok(below == same_content(&u(a, b)?, lattice.node(y).content()))
            })());
            inter_order.record(&ids, "a ⊆ b iff a ∩ b = a", (|| {
                Ok(below == same_content(&i(a, b)?, lattice.node(x).content()))
            })());
        }
    }

    let mut ident = Checker::new(lattice, Law::Identity);
    let (top, bottom) = (&lattice.top().class, &lattice.bottom().class);
    let (t, b0) = (lattice.top_index(), lattice.bottom_index());
    for x in 0..n {
        let a = class(x);
        ident.record(&[x, t], "a ∪ top = top", (|| Ok(same(&u(a, top)?, top)))());
        ident.record(&[x, t], "a ∩ top = a", (|| Ok(same(&i(a, top)?, a)))());
        ident.record(&[x, b0], "a ∪ bottom = a", (|| Ok(same(&u(a, bottom)?, a)))());
        ident.record(&[x, b0], "a ∩ bottom = bottom", (|| Ok(same(&i(a, bottom)?, bottom)))());
    }

    LawReport {
        samples,
        seed,
        checks: [assoc, comm, idem, absorb, ident, union_order, inter_order]
            .into_iter()
            .map(|c| c.check)
            .collect(),
    }
}
