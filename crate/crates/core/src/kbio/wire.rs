//! On-disk shapes of the `oodn-kb/1` format and conversion to model types.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::KbError;
use crate::expr::{parse_expression, render_rational, Binding, Expression, Quantity, Unit};
use crate::model::{
    ClassShape, ClassSpec, Member, MemberBody, MemberSet, ObjectInstance, Projection, Provenance,
    SlotMagnitude, SlotValue, TypeSpec,
};

pub const VERSION: &str = "oodn-kb/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireMemberKind {
    Quantitative,
    Verification,
    Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSlot {
    pub magnitude: String,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireMember {
    pub key: String,
    pub member_kind: WireMemberKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<WireSlot>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    /// Omitted when true.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asserted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_unit: Option<Unit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireClassKind {
    Homogeneous,
    Inhomogeneous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WireProvenance {
    Basic,
    UnionOf(Vec<String>),
    IntersectionOf(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireProjection {
    pub name: String,
    pub members: Vec<WireMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireClass {
    pub name: String,
    pub kind: WireClassKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<WireMember>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<Vec<WireMember>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<WireProjection>>,
    pub provenance: WireProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSlotBinding {
    pub key: String,
    pub index: u32,
    pub magnitude: String,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireVariableBinding {
    pub name: String,
    pub magnitude: String,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireObject {
    pub name: String,
    pub class: String,
    #[serde(default)]
    pub slots: Vec<WireSlotBinding>,
    #[serde(default)]
    pub variables: Vec<WireVariableBinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireLattice {
    pub mode: String,
    pub top: String,
    pub bottom: String,
    pub order: Vec<[String; 2]>,
    pub hasse: Vec<[String; 2]>,
    pub aliases: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDocument {
    pub version: String,
    pub classes: Vec<WireClass>,
    #[serde(default)]
    pub objects: Vec<WireObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<WireLattice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireStoredProjection {
    pub name: String,
    pub members: Vec<WireMember>,
    pub shared: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireCompressed {
    pub name: String,
    pub basics: Vec<String>,
    pub core: Vec<WireMember>,
    pub projections: Vec<WireStoredProjection>,
    pub shared_bodies: Vec<WireMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireCompressedDocument {
    pub version: String,
    pub compressed: WireCompressed,
}

fn schema(path: &str, message: impl Into<String>) -> KbError {
    KbError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse_at(path: &str, text: &str) -> Result<Expression, KbError> {
    parse_expression(text).map_err(|source| KbError::Expression {
        path: path.to_string(),
        source,
    })
}

fn rational_at(path: &str, text: &str) -> Result<BigRational, KbError> {
    match parse_at(path, text)? {
        Expression::Rational(r) => Ok(r),
        _ => Err(schema(path, format!("`{text}` is not a rational number"))),
    }
}

fn render_magnitude(m: &SlotMagnitude) -> String {
    match m {
        SlotMagnitude::Concrete(r) => render_rational(r),
        SlotMagnitude::Symbolic(name) => format!("var:{name}"),
    }
}

fn magnitude_at(path: &str, text: &str) -> Result<SlotMagnitude, KbError> {
    match parse_at(path, text)? {
        Expression::Rational(r) => Ok(SlotMagnitude::Concrete(r)),
        Expression::Var(name) => Ok(SlotMagnitude::Symbolic(name)),
        _ => Err(schema(path, format!("`{text}` is neither a number nor a variable"))),
    }
}

pub fn member_to_wire(m: &Member) -> WireMember {
    let mut w = WireMember {
        key: m.key().to_string(),
        member_kind: WireMemberKind::Quantitative,
        values: None,
        predicate: None,
        asserted: None,
        body: None,
        result_unit: None,
    };
    match m.body() {
        MemberBody::Quantitative(values) => {
            w.values = Some(
                values
                    .iter()
                    .map(|v| WireSlot {
                        magnitude: render_magnitude(&v.magnitude),
                        unit: v.unit.clone(),
                    })
                    .collect(),
            );
        }
        MemberBody::Verification {
            predicate,
            asserted,
        } => {
            w.member_kind = WireMemberKind::Verification;
            w.predicate = Some(predicate.to_string());
            w.asserted = (!asserted).then_some(false);
        }
        MemberBody::Method { body, result_unit } => {
            w.member_kind = WireMemberKind::Method;
            w.body = Some(body.to_string());
            w.result_unit = Some(result_unit.clone());
        }
    }
    w
}

pub fn member_from_wire(path: &str, w: &WireMember) -> Result<Member, KbError> {
    let model = |source| KbError::Model {
        path: path.to_string(),
        source,
    };
    let forbid = |present: bool, field: &str| {
        if present {
            Err(schema(
                &format!("{path}.{field}"),
                format!("field not allowed for {:?} members", w.member_kind),
            ))
        } else {
            Ok(())
        }
    };
    let require = |field: &str| schema(&format!("{path}.{field}"), "missing field");
    match w.member_kind {
        WireMemberKind::Quantitative => {
            forbid(w.predicate.is_some(), "predicate")?;
            forbid(w.asserted.is_some(), "asserted")?;
            forbid(w.body.is_some(), "body")?;
            forbid(w.result_unit.is_some(), "result_unit")?;
            let values = w.values.as_ref().ok_or_else(|| require("values"))?;
            let values = values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    Ok(SlotValue {
                        magnitude: magnitude_at(&format!("{path}.values[{i}].magnitude"), &v.magnitude)?,
                        unit: v.unit.clone(),
                    })
                })
                .collect::<Result<_, KbError>>()?;
            Member::quantitative(w.key.clone(), values).map_err(model)
        }
        WireMemberKind::Verification => {
            forbid(w.values.is_some(), "values")?;
            forbid(w.body.is_some(), "body")?;
            forbid(w.result_unit.is_some(), "result_unit")?;
            let text = w.predicate.as_ref().ok_or_else(|| require("predicate"))?;
            let e = parse_at(&format!("{path}.predicate"), text)?;
            Member::verification(w.key.clone(), &e, w.asserted.unwrap_or(true)).map_err(model)
        }
        WireMemberKind::Method => {
            forbid(w.values.is_some(), "values")?;
            forbid(w.predicate.is_some(), "predicate")?;
            forbid(w.asserted.is_some(), "asserted")?;
            let text = w.body.as_ref().ok_or_else(|| require("body"))?;
            let unit = w.result_unit.clone().ok_or_else(|| require("result_unit"))?;
            let e = parse_at(&format!("{path}.body"), text)?;
            Member::method(w.key.clone(), &e, unit).map_err(model)
        }
    }
}

pub fn members_to_wire(set: &MemberSet) -> Vec<WireMember> {
    set.iter().map(member_to_wire).collect()
}

pub fn members_from_wire(path: &str, members: &[WireMember]) -> Result<MemberSet, KbError> {
    let parsed = members
        .iter()
        .enumerate()
        .map(|(i, m)| member_from_wire(&format!("{path}[{i}]"), m))
        .collect::<Result<Vec<_>, _>>()?;
    MemberSet::new(parsed).map_err(|source| KbError::Model {
        path: path.to_string(),
        source,
    })
}

fn provenance_to_wire(p: &Provenance) -> WireProvenance {
    match p {
        Provenance::Basic => WireProvenance::Basic,
        Provenance::UnionOf(names) => WireProvenance::UnionOf(names.iter().cloned().collect()),
        Provenance::IntersectionOf(names) => {
            WireProvenance::IntersectionOf(names.iter().cloned().collect())
        }
    }
}

fn provenance_from_wire(p: &WireProvenance) -> Provenance {
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    match p {
        WireProvenance::Basic => Provenance::Basic,
        WireProvenance::UnionOf(v) => Provenance::UnionOf(set(v)),
        WireProvenance::IntersectionOf(v) => Provenance::IntersectionOf(set(v)),
    }
}

pub fn class_to_wire(c: &ClassSpec) -> WireClass {
    let provenance = provenance_to_wire(c.provenance());
    match c.shape() {
        ClassShape::Homogeneous(t) => WireClass {
            name: c.name().to_string(),
            kind: WireClassKind::Homogeneous,
            members: Some(members_to_wire(&t.members)),
            core: None,
            projections: None,
            provenance,
        },
        ClassShape::Inhomogeneous { core, projections } => WireClass {
            name: c.name().to_string(),
            kind: WireClassKind::Inhomogeneous,
            members: None,
            core: Some(members_to_wire(core)),
            projections: Some(
                projections
                    .iter()
                    .map(|p| WireProjection {
                        name: p.type_name.clone(),
                        members: members_to_wire(&p.members),
                    })
                    .collect(),
            ),
            provenance,
        },
    }
}

pub fn class_from_wire(path: &str, w: &WireClass) -> Result<ClassSpec, KbError> {
    let provenance = provenance_from_wire(&w.provenance);
    match w.kind {
        WireClassKind::Homogeneous => {
            if w.core.is_some() || w.projections.is_some() {
                return Err(schema(path, "homogeneous classes take `members` only"));
            }
            let members = w
                .members
                .as_ref()
                .ok_or_else(|| schema(&format!("{path}.members"), "missing field"))?;
            let members = members_from_wire(&format!("{path}.members"), members)?;
            Ok(ClassSpec::homogeneous(TypeSpec::new(w.name.clone(), members), provenance))
        }
        WireClassKind::Inhomogeneous => {
            if w.members.is_some() {
                return Err(schema(path, "inhomogeneous classes take `core` and `projections`"));
            }
            let core = w
                .core
                .as_ref()
                .ok_or_else(|| schema(&format!("{path}.core"), "missing field"))?;
            let core = members_from_wire(&format!("{path}.core"), core)?;
            let projections = w
                .projections
                .as_ref()
                .ok_or_else(|| schema(&format!("{path}.projections"), "missing field"))?
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    Ok(Projection {
                        type_name: p.name.clone(),
                        members: members_from_wire(
                            &format!("{path}.projections[{i}].members"),
                            &p.members,
                        )?,
                    })
                })
                .collect::<Result<Vec<_>, KbError>>()?;
            ClassSpec::inhomogeneous(w.name.clone(), core, projections, provenance).map_err(
                |source| KbError::Model {
                    path: path.to_string(),
                    source,
                },
            )
        }
    }
}

pub fn object_to_wire(o: &ObjectInstance) -> WireObject {
    WireObject {
        name: o.name.clone(),
        class: o.class_name.clone(),
        slots: o
            .binding
            .slots()
            .map(|(r, q)| WireSlotBinding {
                key: r.key.clone(),
                index: r.index,
                magnitude: render_rational(&q.magnitude),
                unit: q.unit.clone(),
            })
            .collect(),
        variables: o
            .binding
            .variables()
            .map(|(name, q)| WireVariableBinding {
                name: name.clone(),
                magnitude: render_rational(&q.magnitude),
                unit: q.unit.clone(),
            })
            .collect(),
    }
}

pub fn object_from_wire(path: &str, w: &WireObject) -> Result<ObjectInstance, KbError> {
    let mut binding = Binding::new();
    for (i, s) in w.slots.iter().enumerate() {
        let at = format!("{path}.slots[{i}]");
        if s.index == 0 || s.key.is_empty() {
            return Err(schema(&at, "slot references need a key and an index >= 1"));
        }
        let r = rational_at(&format!("{at}.magnitude"), &s.magnitude)?;
        binding.set_slot(&s.key, s.index, Quantity::new(r, s.unit.clone()));
    }
    for (i, v) in w.variables.iter().enumerate() {
        let r = rational_at(&format!("{path}.variables[{i}].magnitude"), &v.magnitude)?;
        binding.set_variable(&v.name, Quantity::new(r, v.unit.clone()));
    }
    Ok(ObjectInstance {
        name: w.name.clone(),
        class_name: w.class.clone(),
        binding,
    })
}
