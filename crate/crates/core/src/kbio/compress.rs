use std::collections::BTreeSet;

use super::wire::{
    self, WireCompressed, WireCompressedDocument, WireStoredProjection, VERSION,
};
use super::{decode, encode, KbError};
use crate::exploiters::UNION_SUFFIX;
use crate::model::{member_equal, ClassShape, ClassSpec, Member, MemberBody, MemberSet};

/// Leftover members of one basic class. Quantitative members are kept
/// inline; predicates and methods point into the shared-body table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedProjection {
    pub type_name: String,
    pub members: MemberSet,
    pub shared: Vec<usize>,
}

/// The union of all basics stored once: a common core plus per-class
/// leftovers, with identical predicate and method members stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedKB {
    pub name: String,
    pub core: MemberSet,
    pub projections: Vec<CompressedProjection>,
    pub shared_bodies: Vec<Member>,
}

impl CompressedKB {
    pub fn basics(&self) -> Vec<&str> {
        self.projections.iter().map(|p| p.type_name.as_str()).collect()
    }

    fn referenced(&self) -> impl Iterator<Item = &Member> {
        self.projections
            .iter()
            .flat_map(|p| p.shared.iter())
            .filter_map(|&i| self.shared_bodies.get(i))
    }

    /// Core plus every projection's leftovers, without deduplication.
    pub fn property_count(&self) -> usize {
        self.core.property_count()
            + self
                .projections
                .iter()
                .map(|p| p.members.property_count())
                .sum::<usize>()
            + self.referenced().filter(|m| !m.is_method()).count()
    }

    pub fn method_count_raw(&self) -> usize {
        self.core.method_count()
            + self
                .projections
                .iter()
                .map(|p| p.members.method_count())
                .sum::<usize>()
            + self.referenced().filter(|m| m.is_method()).count()
    }

    /// Methods actually stored: core methods plus distinct shared bodies.
    pub fn method_count_deduped(&self) -> usize {
        self.core.method_count()
            + self
                .projections
                .iter()
                .map(|p| p.members.method_count())
                .sum::<usize>()
            + self.shared_bodies.iter().filter(|m| m.is_method()).count()
    }
}

pub fn compress(basics: &[ClassSpec]) -> Result<CompressedKB, KbError> {
    let mut types = Vec::with_capacity(basics.len());
    let mut names = BTreeSet::new();
    for c in basics {
        let ClassShape::Homogeneous(t) = c.shape() else {
            return Err(KbError::NotHomogeneous(c.name().to_string()));
        };
        if !names.insert(c.name()) {
            return Err(KbError::DuplicateClass(c.name().to_string()));
        }
        types.push(t);
    }
    let (first, rest) = types.split_first().ok_or(KbError::NothingToCompress)?;
    let core = rest
        .iter()
        .fold(first.members.clone(), |acc, t| acc.common_with(&t.members));

    let mut shared_bodies: Vec<Member> = Vec::new();
    let mut projections = Vec::with_capacity(types.len());
    for t in &types {
        let mut inline = Vec::new();
        let mut shared = Vec::new();
        for m in t.members.without(&core).iter() {
            if matches!(m.body(), MemberBody::Quantitative(_)) {
                inline.push(m.clone());
                continue;
            }
            let index = match shared_bodies.iter().position(|s| member_equal(s, m)) {
                Some(i) => i,
                None => {
                    shared_bodies.push(m.clone());
                    shared_bodies.len() - 1
                }
            };
            shared.push(index);
        }
        projections.push(CompressedProjection {
            type_name: t.name.clone(),
            members: MemberSet::new(inline).expect("keys already unique"),
            shared,
        });
    }

    let name = if types.len() == 1 {
        first.name.clone()
    } else {
        let mut n: String = types.iter().map(|t| t.name.as_str()).collect();
        n.push(UNION_SUFFIX);
        n
    };
    Ok(CompressedKB {
        name,
        core,
        projections,
        shared_bodies,
    })
}

/// Re-expands every projection into its basic class, in the original order.
pub fn restore(c: &CompressedKB) -> Result<Vec<ClassSpec>, KbError> {
    c.projections
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut members: Vec<Member> = c.core.iter().cloned().collect();
            members.extend(p.members.iter().cloned());
            for &index in &p.shared {
                let m = c.shared_bodies.get(index).ok_or_else(|| KbError::DanglingReference {
                    projection: p.type_name.clone(),
                    index,
                    available: c.shared_bodies.len(),
                })?;
                members.push(m.clone());
            }
            let set = MemberSet::new(members).map_err(|source| KbError::Model {
                path: format!("compressed.projections[{i}]"),
                source,
            })?;
            Ok(ClassSpec::basic(p.type_name.clone(), set))
        })
        .collect()
}

pub fn save_compressed(c: &CompressedKB) -> String {
    encode(&WireCompressedDocument {
        version: VERSION.to_string(),
        compressed: WireCompressed {
            name: c.name.clone(),
            basics: c.basics().into_iter().map(String::from).collect(),
            core: wire::members_to_wire(&c.core),
            projections: c
                .projections
                .iter()
                .map(|p| WireStoredProjection {
                    name: p.type_name.clone(),
                    members: wire::members_to_wire(&p.members),
                    shared: p.shared.clone(),
                })
                .collect(),
            shared_bodies: c.shared_bodies.iter().map(wire::member_to_wire).collect(),
        },
    })
}

pub fn load_compressed(text: &str) -> Result<CompressedKB, KbError> {
    let w: WireCompressedDocument = decode(text)?;
    let w = w.compressed;
    let core = wire::members_from_wire("compressed.core", &w.core)?;
    let projections = w
        .projections
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(CompressedProjection {
                type_name: p.name.clone(),
                members: wire::members_from_wire(
                    &format!("compressed.projections[{i}].members"),
                    &p.members,
                )?,
                shared: p.shared.clone(),
            })
        })
        .collect::<Result<Vec<_>, KbError>>()?;
    let shared_bodies = w
        .shared_bodies
        .iter()
        .enumerate()
        .map(|(i, m)| wire::member_from_wire(&format!("compressed.shared_bodies[{i}]"), m))
        .collect::<Result<Vec<_>, _>>()?;
    let names: Vec<&str> = projections.iter().map(|p| p.type_name.as_str()).collect();
    if names != w.basics.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(KbError::Schema {
            path: "compressed.basics".into(),
            message: "must list the projection names in order".into(),
        });
    }
    Ok(CompressedKB {
        name: w.name,
        core,
        projections,
        shared_bodies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::fixture::quadrangle_classes;

    #[test]
    fn quadrangle_stores_17_properties() {
        let c = compress(&quadrangle_classes()).unwrap();
        assert_eq!(c.name, "SRbPRt∪");
        let core: Vec<_> = c.core.keys().collect();
        assert_eq!(core, vec!["angle_count", "side_count", "vf_sum_360"]);
        assert_eq!(c.property_count(), 17);
        assert_eq!(c.method_count_raw(), 8);
        assert_eq!(c.method_count_deduped(), 6);
    }

    #[test]
    fn dedup_matches_structural_oracle() {
        // Oracle: distinct (key, rendered body) pairs among leftover methods.
        let classes = quadrangle_classes();
        let mut distinct = BTreeSet::new();
        for c in &classes {
            for m in c.extract_type(1).unwrap().methods() {
                distinct.insert((m.key().to_string(), m.expression().unwrap().to_string()));
            }
        }
        assert_eq!(distinct.len(), 6);
        assert_eq!(compress(&classes).unwrap().method_count_deduped(), distinct.len());
    }

    #[test]
    fn restore_reproduces_basics() {
        let classes = quadrangle_classes();
        assert_eq!(restore(&compress(&classes).unwrap()).unwrap(), classes);
    }

    #[test]
    fn single_class_compresses_to_itself() {
        let s = quadrangle_classes().remove(0);
        let c = compress(std::slice::from_ref(&s)).unwrap();
        assert_eq!(c.name, "S");
        assert_eq!(c.property_count(), 7);
        assert_eq!(c.method_count_raw(), 2);
        assert!(c.shared_bodies.is_empty());
        assert_eq!(restore(&c).unwrap(), vec![s]);
    }

    #[test]
    fn dangling_reference() {
        let mut c = compress(&quadrangle_classes()).unwrap();
        c.projections[1].shared[0] = 99;
        assert!(matches!(
            restore(&c),
            Err(KbError::DanglingReference { index: 99, .. })
        ));
    }

    #[test]
    fn codec_round_trip() {
        let c = compress(&quadrangle_classes()).unwrap();
        let text = save_compressed(&c);
        let back = load_compressed(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(save_compressed(&back), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(compress(&[]), Err(KbError::NothingToCompress));
        let classes = quadrangle_classes();
        let u = crate::exploiters::union(&classes[..2]).unwrap();
        assert!(matches!(compress(&[u]), Err(KbError::NotHomogeneous(_))));
        let dup = vec![classes[0].clone(), classes[0].clone()];
        assert!(matches!(compress(&dup), Err(KbError::DuplicateClass(_))));
    }
}
