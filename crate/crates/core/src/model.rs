//! Classes of objects: members, types, homogeneous and inhomogeneous classes,
//! and the subtype / subclass relations between them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{self, evaluate, Binding, EvalError, Expression, Quantity, Unit, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("member key must be nonempty")]
    EmptyKey,
    #[error("duplicate member key `{0}`")]
    DuplicateKey(String),
    #[error("verification `{0}` must have a boolean predicate")]
    NotBoolean(String),
    #[error("method `{0}` must have an arithmetic body")]
    BooleanMethodBody(String),
    #[error("inhomogeneous class `{0}` needs at least two projections")]
    TooFewProjections(String),
    #[error("duplicate projection type `{0}`")]
    DuplicateProjection(String),
    #[error("key `{key}` appears in both the core and projection `{projection}`")]
    OverlappingKeys { projection: String, key: String },
    #[error("projection index {index} out of range (class describes {count} type(s))")]
    ProjectionOutOfRange { index: usize, count: usize },
    #[error("unbound slot {key}[{index}]")]
    UnboundSlot { key: String, index: u32 },
    #[error("evaluating `{key}`: {source}")]
    Evaluation {
        key: String,
        #[source]
        source: EvalError,
    },
}

/// Magnitude of one value of a quantitative property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotMagnitude {
    Concrete(BigRational),
    /// An unknown specific to the class that declares it, e.g. `S.side_1`.
    Symbolic(String),
}

impl fmt::Display for SlotMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotMagnitude::Concrete(r) => f.write_str(&expr::render_rational(r)),
            SlotMagnitude::Symbolic(name) => write!(f, "var:{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotValue {
    pub magnitude: SlotMagnitude,
    pub unit: Unit,
}

impl SlotValue {
    pub fn concrete(value: i64, unit: Unit) -> Self {
        Self {
            magnitude: SlotMagnitude::Concrete(BigRational::from_integer(value.into())),
            unit,
        }
    }

    pub fn symbolic(name: impl Into<String>, unit: Unit) -> Self {
        Self {
            magnitude: SlotMagnitude::Symbolic(name.into()),
            unit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemberKind {
    Quantitative,
    Verification,
    Method,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemberBody {
    Quantitative(Vec<SlotValue>),
    Verification { predicate: Expression, asserted: bool },
    Method { body: Expression, result_unit: Unit },
}

/// A property or method. Expressions are stored in canonical form, so two
/// members are `member_equal` exactly when they compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Member {
    key: String,
    body: Arc<MemberBody>,
}

impl Member {
    fn checked_key(key: impl Into<String>) -> Result<String, ModelError> {
        let key = key.into();
        if key.is_empty() {
            return Err(ModelError::EmptyKey);
        }
        Ok(key)
    }

    pub fn quantitative(key: impl Into<String>, values: Vec<SlotValue>) -> Result<Self, ModelError> {
        Ok(Self {
            key: Self::checked_key(key)?,
            body: Arc::new(MemberBody::Quantitative(values)),
        })
    }

    pub fn verification(
        key: impl Into<String>,
        predicate: &Expression,
        asserted: bool,
    ) -> Result<Self, ModelError> {
        let key = Self::checked_key(key)?;
        if !predicate.is_boolean() {
            return Err(ModelError::NotBoolean(key));
        }
        Ok(Self {
            key,
            body: Arc::new(MemberBody::Verification {
                predicate: expr::normalize(predicate),
                asserted,
            }),
        })
    }

    pub fn method(
        key: impl Into<String>,
        body: &Expression,
        result_unit: Unit,
    ) -> Result<Self, ModelError> {
        let key = Self::checked_key(key)?;
        if body.is_boolean() {
            return Err(ModelError::BooleanMethodBody(key));
        }
        Ok(Self {
            key,
            body: Arc::new(MemberBody::Method {
                body: expr::normalize(body),
                result_unit,
            }),
        })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn body(&self) -> &MemberBody {
        &self.body
    }

    pub fn kind(&self) -> MemberKind {
        match *self.body {
            MemberBody::Quantitative(_) => MemberKind::Quantitative,
            MemberBody::Verification { .. } => MemberKind::Verification,
            MemberBody::Method { .. } => MemberKind::Method,
        }
    }

    pub fn is_method(&self) -> bool {
        self.kind() == MemberKind::Method
    }

    /// The predicate or method body, if any.
    pub fn expression(&self) -> Option<&Expression> {
        match &*self.body {
            MemberBody::Quantitative(_) => None,
            MemberBody::Verification { predicate, .. } => Some(predicate),
            MemberBody::Method { body, .. } => Some(body),
        }
    }

    fn order_key(&self) -> (bool, &str) {
        (self.is_method(), &self.key)
    }
}

impl PartialOrd for Member {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Member {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key()
            .cmp(&other.order_key())
            .then_with(|| self.body.cmp(&other.body))
    }
}

/// Same role key, same kind, and identical content. Symbolic magnitudes are
/// scoped to the declaring class by name, so they never coincide across
/// distinct classes.
pub fn member_equal(a: &Member, b: &Member) -> bool {
    // Bodies are normalized on construction, so canonical-form identity is
    // plain equality here.
    a.key == b.key && a.body == b.body
}

/// Members with unique keys, kept in canonical order: properties before
/// methods, each group by key.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemberSet {
    members: Vec<Member>,
}

impl MemberSet {
    pub fn new(mut members: Vec<Member>) -> Result<Self, ModelError> {
        members.sort();
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.key.as_str()) {
                return Err(ModelError::DuplicateKey(m.key.clone()));
            }
        }
        Ok(Self { members })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Member> {
        self.members.iter()
    }

    pub fn as_slice(&self) -> &[Member] {
        &self.members
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.key.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Member> {
        let split = self.members.partition_point(|m| !m.is_method());
        let (props, methods) = self.members.split_at(split);
        props
            .binary_search_by(|m| m.key.as_str().cmp(key))
            .ok()
            .map(|i| &props[i])
            .or_else(|| {
                methods
                    .binary_search_by(|m| m.key.as_str().cmp(key))
                    .ok()
                    .map(|i| &methods[i])
            })
    }

    pub fn contains_equal(&self, member: &Member) -> bool {
        self.get(&member.key).is_some_and(|m| member_equal(m, member))
    }

    /// Every member has a `member_equal` counterpart in `other`.
    pub fn is_subset_of(&self, other: &MemberSet) -> bool {
        self.len() <= other.len() && self.members.iter().all(|m| other.contains_equal(m))
    }

    pub fn common_with(&self, other: &MemberSet) -> MemberSet {
        MemberSet {
            members: self
                .members
                .iter()
                .filter(|m| other.contains_equal(m))
                .cloned()
                .collect(),
        }
    }

    pub fn without(&self, other: &MemberSet) -> MemberSet {
        MemberSet {
            members: self
                .members
                .iter()
                .filter(|m| !other.contains_equal(m))
                .cloned()
                .collect(),
        }
    }

    /// Disjoint merge; fails on a shared key.
    pub fn merged(&self, other: &MemberSet) -> Result<MemberSet, ModelError> {
        MemberSet::new(self.members.iter().chain(other.iter()).cloned().collect())
    }

    pub fn property_count(&self) -> usize {
        self.members.iter().filter(|m| !m.is_method()).count()
    }

    pub fn method_count(&self) -> usize {
        self.members.iter().filter(|m| m.is_method()).count()
    }
}

impl<'a> IntoIterator for &'a MemberSet {
    type Item = &'a Member;
    type IntoIter = std::slice::Iter<'a, Member>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// A type of objects: a named member set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeSpec {
    pub name: String,
    pub members: MemberSet,
}

impl TypeSpec {
    pub fn new(name: impl Into<String>, members: MemberSet) -> Self {
        Self {
            name: name.into(),
            members,
        }
    }

    pub fn properties(&self) -> impl Iterator<Item = &Member> {
        self.members.iter().filter(|m| !m.is_method())
    }

    pub fn methods(&self) -> impl Iterator<Item = &Member> {
        self.members.iter().filter(|m| m.is_method())
    }

    /// Keys referenced by member expressions that this type cannot resolve
    /// itself (no quantitative property of that key with enough values).
    /// Such types depend on an enclosing class to supply the slots.
    pub fn unresolved_refs(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for m in &self.members {
            let Some(e) = m.expression() else { continue };
            for r in e.property_refs() {
                let resolved = matches!(
                    self.members.get(&r.key).map(Member::body),
                    Some(MemberBody::Quantitative(vs)) if vs.len() >= r.index as usize
                );
                if !resolved {
                    out.insert(r.key);
                }
            }
        }
        out
    }
}

/// `t1 ⊆ t2`: property-set and method-set inclusion.
pub fn is_subtype(t1: &TypeSpec, t2: &TypeSpec) -> bool {
    t1.members.is_subset_of(&t2.members)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Basic,
    UnionOf(BTreeSet<String>),
    IntersectionOf(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Projection {
    pub type_name: String,
    pub members: MemberSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClassShape {
    Homogeneous(TypeSpec),
    Inhomogeneous {
        core: MemberSet,
        projections: Vec<Projection>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSpec {
    name: String,
    shape: ClassShape,
    provenance: Provenance,
}

impl ClassSpec {
    pub fn homogeneous(ty: TypeSpec, provenance: Provenance) -> Self {
        Self {
            name: ty.name.clone(),
            shape: ClassShape::Homogeneous(ty),
            provenance,
        }
    }

    pub fn basic(name: impl Into<String>, members: MemberSet) -> Self {
        Self::homogeneous(TypeSpec::new(name, members), Provenance::Basic)
    }

    pub fn inhomogeneous(
        name: impl Into<String>,
        core: MemberSet,
        projections: Vec<Projection>,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if projections.len() < 2 {
            return Err(ModelError::TooFewProjections(name));
        }
        let mut names = BTreeSet::new();
        for p in &projections {
            if !names.insert(p.type_name.as_str()) {
                return Err(ModelError::DuplicateProjection(p.type_name.clone()));
            }
            if let Some(key) = p.members.keys().find(|k| core.get(k).is_some()) {
                return Err(ModelError::OverlappingKeys {
                    projection: p.type_name.clone(),
                    key: key.to_string(),
                });
            }
        }
        Ok(Self {
            name,
            shape: ClassShape::Inhomogeneous { core, projections },
            provenance,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &ClassShape {
        &self.shape
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.shape, ClassShape::Homogeneous(_))
    }

    /// Homogeneous class without members: the result of an intersection
    /// whose operands share nothing.
    pub fn is_empty_class(&self) -> bool {
        matches!(&self.shape, ClassShape::Homogeneous(t) if t.members.is_empty())
    }

    /// Renames the class (and, for homogeneous classes, its single type).
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        if let ClassShape::Homogeneous(t) = &mut self.shape {
            t.name = self.name.clone();
        }
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn type_count(&self) -> usize {
        match &self.shape {
            ClassShape::Homogeneous(_) => 1,
            ClassShape::Inhomogeneous { projections, .. } => projections.len(),
        }
    }

    pub fn type_names(&self) -> Vec<&str> {
        match &self.shape {
            ClassShape::Homogeneous(t) => vec![t.name.as_str()],
            ClassShape::Inhomogeneous { projections, .. } => {
                projections.iter().map(|p| p.type_name.as_str()).collect()
            }
        }
    }

    /// The `index`-th (1-based) type described by the class: core plus that
    /// projection, in canonical member order.
    pub fn extract_type(&self, index: usize) -> Result<TypeSpec, ModelError> {
        let count = self.type_count();
        if index == 0 || index > count {
            return Err(ModelError::ProjectionOutOfRange { index, count });
        }
        match &self.shape {
            ClassShape::Homogeneous(t) => Ok(t.clone()),
            ClassShape::Inhomogeneous { core, projections } => {
                let p = &projections[index - 1];
                Ok(TypeSpec::new(p.type_name.clone(), core.merged(&p.members)?))
            }
        }
    }

    pub fn types(&self) -> Vec<TypeSpec> {
        (1..=self.type_count())
            .map(|i| self.extract_type(i).expect("index in range"))
            .collect()
    }

    /// Sorted member sets of the described types; two classes are
    /// structurally identical when these agree.
    pub fn content(&self) -> Vec<MemberSet> {
        let mut sets: Vec<_> = self.types().into_iter().map(|t| t.members).collect();
        sets.sort();
        sets.dedup();
        sets
    }

    pub fn property_count(&self) -> usize {
        match &self.shape {
            ClassShape::Homogeneous(t) => t.members.property_count(),
            ClassShape::Inhomogeneous { core, projections } => {
                core.property_count()
                    + projections.iter().map(|p| p.members.property_count()).sum::<usize>()
            }
        }
    }

    pub fn method_count(&self) -> usize {
        match &self.shape {
            ClassShape::Homogeneous(t) => t.members.method_count(),
            ClassShape::Inhomogeneous { core, projections } => {
                core.method_count()
                    + projections.iter().map(|p| p.members.method_count()).sum::<usize>()
            }
        }
    }
}

pub fn structurally_equal(a: &ClassSpec, b: &ClassSpec) -> bool {
    a.content() == b.content()
}

/// Every type of `sub` is a subtype of some type of `sup`.
pub fn is_subclass(sub: &ClassSpec, sup: &ClassSpec) -> bool {
    is_subclass_content(&sub.content(), &sup.content())
}

pub(crate) fn is_subclass_content(sub: &[MemberSet], sup: &[MemberSet]) -> bool {
    sub.iter().all(|t| sup.iter().any(|u| t.is_subset_of(u)))
}

/// A named object with values for the symbolic slots of its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectInstance {
    pub name: String,
    pub class_name: String,
    pub binding: Binding,
}

/// Evaluation context for `ty`: concrete slot values from the type itself,
/// symbolic ones looked up in `supplied` by slot or by variable name.
/// Returns `None` for the context if a supplied value contradicts a concrete one.
pub fn binding_for_type(ty: &TypeSpec, supplied: &Binding) -> Option<Binding> {
    let mut out = Binding::new();
    for (key, index, quantity) in supplied.slots().map(|(r, q)| (&r.key, r.index, q)) {
        out.set_slot(key, index, quantity.clone());
    }
    for (name, q) in supplied.variables() {
        out.set_variable(name, q.clone());
    }
    for m in ty.properties() {
        let MemberBody::Quantitative(values) = m.body() else { continue };
        for (i, v) in values.iter().enumerate() {
            let index = i as u32 + 1;
            match &v.magnitude {
                SlotMagnitude::Concrete(r) => {
                    let declared = Quantity::new(r.clone(), v.unit.clone());
                    if let Some(given) = supplied.slot(m.key(), index) {
                        if given != &declared {
                            return None;
                        }
                    }
                    out.set_slot(m.key(), index, declared);
                }
                SlotMagnitude::Symbolic(name) => {
                    if out.slot(m.key(), index).is_none() {
                        if let Some(q) = supplied.variable(name) {
                            out.set_slot(m.key(), index, q.clone());
                        }
                    }
                }
            }
        }
    }
    Some(out)
}

/// True iff every verification predicate of `ty` evaluates to its asserted
/// value under the object's binding.
pub fn validate_object(object: &ObjectInstance, ty: &TypeSpec) -> Result<bool, ModelError> {
    let Some(binding) = binding_for_type(ty, &object.binding) else {
        return Ok(false);
    };
    let mut ok = true;
    for m in ty.properties() {
        let MemberBody::Verification {
            predicate,
            asserted,
        } = m.body()
        else {
            continue;
        };
        match evaluate(predicate, &binding) {
            Ok(Value::Bool(b)) => ok &= b == *asserted,
            Ok(Value::Number { .. }) => return Err(ModelError::NotBoolean(m.key().to_string())),
            Err(EvalError::UnboundSlot { key, index }) => {
                return Err(ModelError::UnboundSlot { key, index })
            }
            Err(source) => {
                return Err(ModelError::Evaluation {
                    key: m.key().to_string(),
                    source,
                })
            }
        }
    }
    Ok(ok)
}
