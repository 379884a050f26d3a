use std::collections::BTreeSet;

use super::compress::{restore, CompressedKB};
use super::wire;
use super::{encode, KBDocument};
use crate::model::{ClassShape, ClassSpec, Member};

/// Method count published for the compressed quadrangle base. No counting
/// rule over the class definitions reproduces it; it is reported for comparison.
pub const REFERENCE_COMPRESSED_METHODS: usize = 5;
const QUADRANGLE_BASICS: [&str; 4] = ["S", "Rb", "P", "Rt"];

#[derive(Debug, Clone, PartialEq)]
pub struct StorageStats {
    pub classes: usize,
    pub properties: usize,
    pub methods_raw: usize,
    pub methods_deduped: usize,
    /// Canonical serialized size of the class payloads.
    pub bytes: usize,
    /// Uncompressed over stored bytes; 1 for plain documents, 0 when empty.
    pub ratio: f64,
    pub reference_methods: Option<usize>,
}

fn stored_members(c: &ClassSpec) -> Vec<&Member> {
    match c.shape() {
        ClassShape::Homogeneous(t) => t.members.iter().collect(),
        ClassShape::Inhomogeneous { core, projections } => core
            .iter()
            .chain(projections.iter().flat_map(|p| p.members.iter()))
            .collect(),
    }
}

fn class_bytes(classes: &[ClassSpec]) -> usize {
    classes
        .iter()
        .map(|c| encode(&wire::class_to_wire(c)).len())
        .sum()
}

pub enum StatsInput<'a> {
    Document(&'a KBDocument),
    Compressed(&'a CompressedKB),
}

pub fn storage_stats(input: StatsInput<'_>) -> StorageStats {
    match input {
        StatsInput::Document(doc) => {
            let classes = doc.classes();
            let distinct: BTreeSet<&Member> = classes
                .iter()
                .flat_map(stored_members)
                .filter(|m| m.is_method())
                .collect();
            let bytes = class_bytes(classes);
            StorageStats {
                classes: classes.len(),
                properties: classes.iter().map(ClassSpec::property_count).sum(),
                methods_raw: classes.iter().map(ClassSpec::method_count).sum(),
                methods_deduped: distinct.len(),
                bytes,
                ratio: if bytes == 0 { 0.0 } else { 1.0 },
                reference_methods: None,
            }
        }
        StatsInput::Compressed(c) => {
            let mut payload = encode(&wire::members_to_wire(&c.core)).len();
            for p in &c.projections {
                payload += encode(&wire::members_to_wire(&p.members)).len();
                payload += encode(&p.shared).len();
            }
            payload += c
                .shared_bodies
                .iter()
                .map(|m| encode(&wire::member_to_wire(m)).len())
                .sum::<usize>();
            let original = restore(c).map(|cs| class_bytes(&cs)).unwrap_or(0);
            StorageStats {
                classes: 1,
                properties: c.property_count(),
                methods_raw: c.method_count_raw(),
                methods_deduped: c.method_count_deduped(),
                bytes: payload,
                ratio: if payload == 0 { 0.0 } else { original as f64 / payload as f64 },
                reference_methods: (c.basics() == QUADRANGLE_BASICS)
                    .then_some(REFERENCE_COMPRESSED_METHODS),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::{builtin_quadrangle, compress};

    #[test]
    fn basics_versus_compressed() {
        let doc = builtin_quadrangle();
        let plain = storage_stats(StatsInput::Document(&doc));
        assert_eq!((plain.classes, plain.properties, plain.methods_raw), (4, 26, 8));
        assert_eq!(plain.methods_deduped, 6);
        assert_eq!(plain.ratio, 1.0);
        let c = compress(doc.classes()).unwrap();
        let packed = storage_stats(StatsInput::Compressed(&c));
        assert_eq!(packed.properties, 17);
        assert_eq!((packed.methods_raw, packed.methods_deduped), (8, 6));
        assert_eq!(packed.reference_methods, Some(5));
        assert!(packed.bytes < plain.bytes);
        assert!(packed.ratio > 1.0);
    }

    #[test]
    fn empty_document_is_all_zero() {
        let doc = KBDocument::new(Vec::new(), Vec::new()).unwrap();
        let s = storage_stats(StatsInput::Document(&doc));
        assert_eq!(
            s,
            StorageStats {
                classes: 0,
                properties: 0,
                methods_raw: 0,
                methods_deduped: 0,
                bytes: 0,
                ratio: 0.0,
                reference_methods: None,
            }
        );
    }
}
