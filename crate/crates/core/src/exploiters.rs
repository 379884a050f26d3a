//! The universal exploiters: union and intersection of classes, plus the
//! cross-evaluation oracle for member equivalence.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{evaluate, Binding, EvalError, Quantity, Unit};
use crate::model::{
    binding_for_type, ClassShape, ClassSpec, Member, MemberBody, MemberSet, ModelError, Projection,
    Provenance, SlotMagnitude, TypeSpec,
};

pub const UNION_SUFFIX: char = '∪';
pub const INTERSECTION_SUFFIX: char = '∩';

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploitError {
    #[error("exploiters need at least one class")]
    EmptyInput,
    #[error("type name `{0}` names two different member sets")]
    DuplicateTypeName(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("member `{key}` is missing from type `{type_name}`")]
    MissingMember { key: String, type_name: String },
    #[error("cross-evaluation applies to verification and method members, not `{0}`")]
    NotEvaluable(String),
    #[error("unbound slot {key}[{index}] while cross-evaluating")]
    UnboundSlot { key: String, index: u32 },
}

fn flatten(classes: &[ClassSpec]) -> Result<Vec<TypeSpec>, ExploitError> {
    let mut seen: BTreeMap<String, MemberSet> = BTreeMap::new();
    let mut out: Vec<TypeSpec> = Vec::new();
    for t in classes.iter().flat_map(ClassSpec::types) {
        match seen.get(&t.name) {
            Some(existing) if existing != &t.members => {
                return Err(ExploitError::DuplicateTypeName(t.name));
            }
            Some(_) => continue,
            None => {
                seen.insert(t.name.clone(), t.members.clone());
            }
        }
        if !out.iter().any(|u| u.members == t.members) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Drops every type that is a proper subtype of another; input is content-deduplicated.
fn maximal(types: Vec<TypeSpec>) -> Vec<TypeSpec> {
    let keep: Vec<bool> = types
        .iter()
        .map(|t| {
            !types
                .iter()
                .any(|u| u.members != t.members && t.members.is_subset_of(&u.members))
        })
        .collect();
    types
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then_some(t))
        .collect()
}

/// Core = members common to every type; projections = per-type leftovers.
pub(crate) fn assemble(
    name: String,
    types: Vec<TypeSpec>,
    provenance: Provenance,
) -> Result<ClassSpec, ModelError> {
    let core = types
        .iter()
        .skip(1)
        .fold(types[0].members.clone(), |acc, t| acc.common_with(&t.members));
    let projections = types
        .into_iter()
        .map(|t| Projection {
            members: t.members.without(&core),
            type_name: t.name,
        })
        .collect();
    ClassSpec::inhomogeneous(name, core, projections, provenance)
}

fn single(ty: TypeSpec, operands: &[ClassSpec], provenance: Provenance) -> ClassSpec {
    operands
        .iter()
        .find(|c| c.is_homogeneous() && c.content() == [ty.members.clone()])
        .cloned()
        .unwrap_or_else(|| ClassSpec::homogeneous(ty, provenance))
}

/// Union of classes: the class describing every constituent type, minus
/// types absorbed by a proper supertype among the constituents.
pub fn union(classes: &[ClassSpec]) -> Result<ClassSpec, ExploitError> {
    if classes.is_empty() {
        return Err(ExploitError::EmptyInput);
    }
    let survivors = maximal(flatten(classes)?);
    let names: BTreeSet<String> = survivors.iter().map(|t| t.name.clone()).collect();
    let provenance = Provenance::UnionOf(names);
    if survivors.len() == 1 {
        let ty = survivors.into_iter().next().unwrap();
        return Ok(single(ty, classes, provenance));
    }
    let mut name: String = survivors.iter().map(|t| t.name.as_str()).collect();
    name.push(UNION_SUFFIX);
    Ok(assemble(name, survivors, provenance)?)
}

fn name_part(name: &str) -> &str {
    name.strip_suffix(INTERSECTION_SUFFIX).unwrap_or(name)
}

struct Candidate {
    parts: Vec<String>,
    members: MemberSet,
    /// Set when the candidate's content is exactly one source type.
    exact_name: Option<String>,
}

impl Candidate {
    fn name(&self) -> String {
        match &self.exact_name {
            Some(n) => n.clone(),
            None => {
                let mut n: String = self.parts.concat();
                n.push(INTERSECTION_SUFFIX);
                n
            }
        }
    }

    fn from_type(t: &TypeSpec) -> Self {
        Candidate {
            parts: vec![name_part(&t.name).to_string()],
            members: t.members.clone(),
            exact_name: Some(t.name.clone()),
        }
    }

    fn meet(&self, t: &TypeSpec) -> Self {
        let members = self.members.common_with(&t.members);
        let exact_name = if members == self.members {
            self.exact_name.clone()
        } else if members == t.members {
            Some(t.name.clone())
        } else {
            None
        };
        let mut parts = self.parts.clone();
        parts.push(name_part(&t.name).to_string());
        Candidate {
            parts,
            members,
            exact_name,
        }
    }
}

fn prune(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    let mut unique: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates.drain(..) {
        if !unique.iter().any(|u| u.members == c.members) {
            unique.push(c);
        }
    }
    let keep: Vec<bool> = unique
        .iter()
        .map(|c| {
            !unique
                .iter()
                .any(|u| u.members != c.members && c.members.is_subset_of(&u.members))
        })
        .collect();
    unique
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

/// Intersection of classes: the maximal common subtypes over every choice of
/// one type per operand. Operands sharing nothing yield the empty class.
pub fn intersection(classes: &[ClassSpec]) -> Result<ClassSpec, ExploitError> {
    let (first, rest) = classes.split_first().ok_or(ExploitError::EmptyInput)?;
    flatten(classes)?;
    let mut candidates: Vec<Candidate> = first.types().iter().map(Candidate::from_type).collect();
    candidates = prune(candidates);
    for operand in rest {
        let types = operand.types();
        let next = candidates
            .iter()
            .flat_map(|c| types.iter().map(move |t| c.meet(t)))
            .collect();
        candidates = prune(next);
    }

    let provenance =
        Provenance::IntersectionOf(classes.iter().map(|c| c.name().to_string()).collect());
    let survivors: Vec<TypeSpec> = candidates
        .iter()
        .map(|c| TypeSpec::new(c.name(), c.members.clone()))
        .collect();

    let mut content: Vec<MemberSet> = survivors.iter().map(|t| t.members.clone()).collect();
    content.sort();
    if let Some(same) = classes.iter().find(|c| c.content() == content) {
        return Ok(same.clone());
    }
    if survivors.len() == 1 {
        let ty = survivors.into_iter().next().unwrap();
        return Ok(single(ty, classes, provenance));
    }
    let mut name: String = classes.iter().map(|c| name_part(c.name())).collect();
    name.push(INTERSECTION_SUFFIX);
    Ok(assemble(name, survivors, provenance)?)
}

fn random_value<R: Rng>(rng: &mut R, unit: &Unit) -> Quantity {
    let upper = if unit == &Unit::base("deg") { 179 } else { 20 };
    Quantity::integer(rng.gen_range(1..=upper), unit.clone())
}

/// Random values for the symbolic slots of `ty`. Half the time a property's
/// slots all share one value so equality predicates get exercised both ways.
fn random_binding<R: Rng>(rng: &mut R, ty: &TypeSpec) -> Binding {
    let mut supplied = Binding::new();
    for m in ty.properties() {
        let MemberBody::Quantitative(values) = m.body() else { continue };
        let shared = rng.gen_bool(0.5);
        let mut common: Option<Quantity> = None;
        for (i, v) in values.iter().enumerate() {
            if !matches!(v.magnitude, SlotMagnitude::Symbolic(_)) {
                continue;
            }
            let q = if shared {
                common
                    .get_or_insert_with(|| random_value(rng, &v.unit))
                    .clone()
            } else {
                random_value(rng, &v.unit)
            };
            supplied.set_slot(m.key(), i as u32 + 1, q);
        }
    }
    binding_for_type(ty, &supplied).expect("generated values only fill symbolic slots")
}

fn version<'a>(key: &str, ty: &'a TypeSpec) -> Result<&'a Member, ExploitError> {
    ty.members.get(key).ok_or_else(|| ExploitError::MissingMember {
        key: key.to_string(),
        type_name: ty.name.clone(),
    })
}

fn unbound(e: EvalError) -> Result<(), ExploitError> {
    match e {
        EvalError::UnboundSlot { key, index } => Err(ExploitError::UnboundSlot { key, index }),
        _ => Ok(()),
    }
}

/// Semantic oracle for member equality: evaluates both types' versions of
/// `member` on random bindings drawn for each type and reports whether they
/// always agree.
pub fn cross_equivalence_check(
    member: &Member,
    t1: &TypeSpec,
    t2: &TypeSpec,
    samples: usize,
    seed: u64,
) -> Result<bool, ExploitError> {
    if member.expression().is_none() {
        return Err(ExploitError::NotEvaluable(member.key().to_string()));
    }
    let (m1, m2) = (version(member.key(), t1)?, version(member.key(), t2)?);
    if m1.kind() != m2.kind() {
        return Ok(false);
    }
    if let (
        MemberBody::Method { result_unit: u1, .. },
        MemberBody::Method { result_unit: u2, .. },
    ) = (m1.body(), m2.body())
    {
        if u1 != u2 {
            return Ok(false);
        }
    }
    let (e1, e2) = (m1.expression().unwrap(), m2.expression().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = true;
    for context in [t1, t2] {
        for _ in 0..samples {
            let binding = random_binding(&mut rng, context);
            match (evaluate(e1, &binding), evaluate(e2, &binding)) {
                (Ok(a), Ok(b)) => agree &= a.agrees_with(&b),
                (Err(a), Err(b)) => {
                    unbound(a.clone())?;
                    unbound(b.clone())?;
                    agree &= a == b;
                }
                (Err(e), Ok(_)) | (Ok(_), Err(e)) => {
                    unbound(e)?;
                    agree = false;
                }
            }
        }
    }
    Ok(agree)
}

/// The member set of a class when it describes exactly one type.
pub fn sole_type(class: &ClassSpec) -> Option<&TypeSpec> {
    match class.shape() {
        ClassShape::Homogeneous(t) => Some(t),
        ClassShape::Inhomogeneous { .. } => None,
    }
}
