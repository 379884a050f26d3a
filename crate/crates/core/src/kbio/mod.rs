//! Knowledge-base documents (`oodn-kb/1`), the compressed top-class codec,
//! DOT export, storage statistics and the bundled quadrangle fixture.

mod compress;
mod dot;
pub mod fixture;
mod stats;
mod wire;

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::expr::ParseError;
use crate::lattice::{KnowledgeLattice, LatticeError};
use crate::model::{ClassSpec, ModelError, ObjectInstance, Provenance};

pub use compress::{
    compress, load_compressed, restore, save_compressed, CompressedKB, CompressedProjection,
};
pub use dot::export_dot;
pub use stats::{storage_stats, StatsInput, StorageStats, REFERENCE_COMPRESSED_METHODS};
pub use wire::VERSION;

use wire::{WireDocument, WireLattice};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported document version `{0}` (expected {VERSION})")]
    Version(String),
    #[error("duplicate class name `{0}`")]
    DuplicateClass(String),
    #[error("malformed expression at `{path}`: {source}")]
    Expression {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid definition at `{path}`: {source}")]
    Model {
        path: String,
        #[source]
        source: ModelError,
    },
    #[error("object `{object}` refers to unknown class `{class}`")]
    UnknownClass { object: String, class: String },
    #[error("lattice section: {0}")]
    Lattice(#[from] LatticeError),
    #[error("projection `{projection}` refers to shared body {index}, but only {available} exist")]
    DanglingReference {
        projection: String,
        index: usize,
        available: usize,
    },
    #[error("compression needs homogeneous classes; `{0}` is not")]
    NotHomogeneous(String),
    #[error("nothing to compress")]
    NothingToCompress,
}

/// A set of classes, objects, and optionally the lattice built over them.
#[derive(Debug, Clone, PartialEq)]
pub struct KBDocument {
    classes: Vec<ClassSpec>,
    objects: Vec<ObjectInstance>,
    lattice: Option<KnowledgeLattice>,
}

impl KBDocument {
    pub fn new(classes: Vec<ClassSpec>, objects: Vec<ObjectInstance>) -> Result<Self, KbError> {
        let mut names = BTreeSet::new();
        for c in &classes {
            if !names.insert(c.name()) {
                return Err(KbError::DuplicateClass(c.name().to_string()));
            }
        }
        if let Some(o) = objects.iter().find(|o| !names.contains(o.class_name.as_str())) {
            return Err(KbError::UnknownClass {
                object: o.name.clone(),
                class: o.class_name.clone(),
            });
        }
        Ok(Self {
            classes,
            objects,
            lattice: None,
        })
    }

    /// Document whose classes are the lattice nodes, in node order.
    pub fn from_lattice(
        lattice: KnowledgeLattice,
        objects: Vec<ObjectInstance>,
    ) -> Result<Self, KbError> {
        let classes = lattice.nodes().iter().map(|n| n.class.clone()).collect();
        let mut doc = Self::new(classes, objects)?;
        doc.lattice = Some(lattice);
        Ok(doc)
    }

    pub fn classes(&self) -> &[ClassSpec] {
        &self.classes
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn lattice(&self) -> Option<&KnowledgeLattice> {
        self.lattice.as_ref()
    }

    pub fn class(&self, name: &str) -> Option<&ClassSpec> {
        self.classes.iter().find(|c| c.name() == name)
    }

    /// Classes with basic provenance, in document order.
    pub fn basics(&self) -> Vec<ClassSpec> {
        self.classes
            .iter()
            .filter(|c| c.provenance() == &Provenance::Basic)
            .cloned()
            .collect()
    }
}

/// The bundled square / rhombus / parallelogram / rectangle base.
pub fn builtin_quadrangle() -> KBDocument {
    KBDocument::new(fixture::quadrangle_classes(), Vec::new()).expect("fixture names are unique")
}

fn schema_error(e: serde_path_to_error::Error<serde_json::Error>) -> KbError {
    KbError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    }
}

/// Parses JSON, checks the version tag, then decodes `T` with schema paths.
fn decode<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, KbError> {
    let value: Json = serde_json::from_str(text).map_err(|e| KbError::Json(e.to_string()))?;
    match value.get("version") {
        Some(Json::String(v)) if v == VERSION => {}
        Some(Json::String(v)) => return Err(KbError::Version(v.clone())),
        Some(_) => {
            return Err(KbError::Schema {
                path: "version".into(),
                message: "expected a string".into(),
            })
        }
        None => {
            return Err(KbError::Schema {
                path: "version".into(),
                message: "missing field".into(),
            })
        }
    }
    serde_path_to_error::deserialize(value).map_err(schema_error)
}

/// Canonical text: sorted object keys, two-space indent, trailing newline.
fn encode<T: Serialize>(wire: &T) -> String {
    let value = serde_json::to_value(wire).expect("wire types serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    text
}

fn pair(l: &KnowledgeLattice, (a, b): (usize, usize)) -> [String; 2] {
    [l.node(a).name().to_string(), l.node(b).name().to_string()]
}

fn lattice_to_wire(l: &KnowledgeLattice) -> WireLattice {
    WireLattice {
        mode: l.mode().as_str().to_string(),
        top: l.top().name().to_string(),
        bottom: l.bottom().name().to_string(),
        order: l
            .order_pairs()
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|p| pair(l, p))
            .collect(),
        hasse: l.hasse().iter().map(|&p| pair(l, p)).collect(),
        aliases: l.aliases().to_vec(),
    }
}

pub fn save_kb(doc: &KBDocument) -> String {
    encode(&WireDocument {
        version: VERSION.to_string(),
        classes: doc.classes.iter().map(wire::class_to_wire).collect(),
        objects: doc.objects.iter().map(wire::object_to_wire).collect(),
        lattice: doc.lattice.as_ref().map(lattice_to_wire),
    })
}

pub fn load_kb(text: &str) -> Result<KBDocument, KbError> {
    let w: WireDocument = decode(text)?;
    let classes = w
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| wire::class_from_wire(&format!("classes[{i}]"), c))
        .collect::<Result<Vec<_>, _>>()?;
    let objects = w
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| wire::object_from_wire(&format!("objects[{i}]"), o))
        .collect::<Result<Vec<_>, _>>()?;
    let mut doc = KBDocument::new(classes, objects)?;
    if let Some(stored) = w.lattice {
        let mode = stored.mode.parse().map_err(|message| KbError::Schema {
            path: "lattice.mode".into(),
            message,
        })?;
        let lattice =
            KnowledgeLattice::from_classes(mode, doc.classes.clone(), stored.aliases.clone())?;
        let rebuilt = lattice_to_wire(&lattice);
        for (field, same) in [
            ("top", rebuilt.top == stored.top),
            ("bottom", rebuilt.bottom == stored.bottom),
            ("order", rebuilt.order == stored.order),
            ("hasse", rebuilt.hasse == stored.hasse),
            ("aliases", rebuilt.aliases == stored.aliases),
        ] {
            if !same {
                return Err(LatticeError::Inconsistent(format!(
                    "stored `{field}` disagrees with the classes"
                ))
                .into());
            }
        }
        doc.lattice = Some(lattice);
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Quantity, Unit};
    use crate::lattice::{close_under_exploiters, Mode};
    use crate::model::MemberBody;

    #[test]
    fn fixture_round_trips() {
        let doc = builtin_quadrangle();
        let text = save_kb(&doc);
        let back = load_kb(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(save_kb(&back), text);
        assert!(text.starts_with("{\n  \"classes\": ["));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn fixture_totals_after_load() {
        let doc = load_kb(&save_kb(&builtin_quadrangle())).unwrap();
        assert_eq!(doc.classes().len(), 4);
        let props: usize = doc.classes().iter().map(ClassSpec::property_count).sum();
        let methods: usize = doc.classes().iter().map(ClassSpec::method_count).sum();
        assert_eq!((props, methods), (26, 8));
    }

    #[test]
    fn lattice_section_round_trips() {
        for mode in [Mode::Named, Mode::Strict] {
            let l = close_under_exploiters(&fixture::quadrangle_classes(), mode, 12).unwrap();
            let doc = KBDocument::from_lattice(l, Vec::new()).unwrap();
            let text = save_kb(&doc);
            let back = load_kb(&text).unwrap();
            assert_eq!(back, doc);
            assert_eq!(save_kb(&back), text);
        }
    }

    #[test]
    fn tampered_lattice_is_rejected() {
        let l = close_under_exploiters(&fixture::quadrangle_classes(), Mode::Named, 12).unwrap();
        let text = save_kb(&KBDocument::from_lattice(l, Vec::new()).unwrap());
        let tampered = text.replacen("\"top\": \"SRbPRt∪\"", "\"top\": \"S\"", 1);
        assert_ne!(tampered, text);
        assert!(matches!(load_kb(&tampered), Err(KbError::Lattice(_))));
    }

    #[test]
    fn version_is_checked() {
        let text = save_kb(&builtin_quadrangle()).replace(VERSION, "oodn-kb/2");
        assert_eq!(load_kb(&text), Err(KbError::Version("oodn-kb/2".into())));
        assert!(matches!(load_kb("{\"classes\": []}"), Err(KbError::Schema { .. })));
        assert!(matches!(load_kb("not json"), Err(KbError::Json(_))));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = save_kb(&builtin_quadrangle()).replacen("\"member_kind\"", "\"kind_of\"", 1);
        match load_kb(&text) {
            Err(KbError::Schema { path, .. }) => assert!(path.starts_with("classes[0].members[0]"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_expression_is_reported() {
        let mut text = save_kb(&builtin_quadrangle());
        let at = text.find("\"body\": \"").unwrap() + 9;
        text.insert_str(at, "(+ 1 ");
        match load_kb(&text) {
            Err(KbError::Expression { path, .. }) => assert!(path.ends_with(".body"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_classes_are_rejected() {
        let mut classes = fixture::quadrangle_classes();
        classes.push(classes[0].clone());
        assert_eq!(
            KBDocument::new(classes, Vec::new()).unwrap_err(),
            KbError::DuplicateClass("S".into())
        );
        let doc = builtin_quadrangle();
        let text = save_kb(&doc).replacen("\"name\": \"Rb\"", "\"name\": \"S\"", 1);
        assert_eq!(load_kb(&text), Err(KbError::DuplicateClass("S".into())));
    }

    #[test]
    fn objects_round_trip() {
        let cm = Unit::base("cm");
        let o = ObjectInstance {
            name: "sq1".into(),
            class_name: "S".into(),
            binding: crate::expr::Binding::new()
                .with_slot("side_sizes", 1, Quantity::integer(3, cm.clone()))
                .with_variable("S.side_2", Quantity::integer(3, cm)),
        };
        let doc = KBDocument::new(fixture::quadrangle_classes(), vec![o]).unwrap();
        let back = load_kb(&save_kb(&doc)).unwrap();
        assert_eq!(back, doc);
        let bad = ObjectInstance {
            name: "x".into(),
            class_name: "Kite".into(),
            binding: Default::default(),
        };
        assert!(matches!(
            KBDocument::new(fixture::quadrangle_classes(), vec![bad]),
            Err(KbError::UnknownClass { .. })
        ));
    }

    #[test]
    fn negated_verification_keeps_flag() {
        let e = crate::expr::parse_expression("(= (ref side_sizes 1) 1)").unwrap();
        let m = crate::model::Member::verification("vf_not_unit", &e, false).unwrap();
        let w = wire::member_to_wire(&m);
        assert_eq!(w.asserted, Some(false));
        let back = wire::member_from_wire("m", &w).unwrap();
        assert!(matches!(back.body(), MemberBody::Verification { asserted: false, .. }));
    }

    #[test]
    fn misplaced_fields_are_rejected() {
        let text = save_kb(&builtin_quadrangle()).replacen(
            "\"member_kind\": \"method\"",
            "\"member_kind\": \"method\", \"values\": []",
            1,
        );
        assert!(matches!(load_kb(&text), Err(KbError::Schema { .. })));
    }
}
