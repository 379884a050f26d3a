//! The quadrangle knowledge base: square, rhombus, parallelogram, rectangle.

use crate::expr::{parse_expression, Unit};
use crate::model::{ClassSpec, Member, MemberSet, SlotValue};

fn unit(symbol: &str) -> Unit {
    symbol.parse().expect("fixture unit")
}

fn count(key: &str, n: i64, of: &str) -> Member {
    Member::quantitative(key, vec![SlotValue::concrete(n, unit(of))]).expect("fixture member")
}

fn symbolic(class: &str, key: &str, stem: &str, of: &str) -> Member {
    let values = (1..=4)
        .map(|i| SlotValue::symbolic(format!("{class}.{stem}_{i}"), unit(of)))
        .collect();
    Member::quantitative(key, values).expect("fixture member")
}

fn right_angles() -> Member {
    let values = (0..4).map(|_| SlotValue::concrete(90, unit("deg"))).collect();
    Member::quantitative("angle_sizes", values).expect("fixture member")
}

fn check(key: &str, predicate: &str) -> Member {
    let e = parse_expression(predicate).expect("fixture predicate");
    Member::verification(key, &e, true).expect("fixture member")
}

fn method(key: &str, body: &str, result: &str) -> Member {
    let e = parse_expression(body).expect("fixture body");
    Member::method(key, &e, unit(result)).expect("fixture member")
}

const SUM_360: &str = "(= (+ (ref angle_sizes 1) (ref angle_sizes 2) (ref angle_sizes 3) (ref angle_sizes 4)) 360)";
const ALL_SIDES_EQUAL: &str =
    "(= (ref side_sizes 1) (ref side_sizes 2) (ref side_sizes 3) (ref side_sizes 4))";
const ANGLES_90: &str =
    "(= (ref angle_sizes 1) (ref angle_sizes 2) (ref angle_sizes 3) (ref angle_sizes 4) 90)";
const OPPOSITE_PARALLEL: &str =
    "(and (= (ref angle_sizes 1) (ref angle_sizes 3)) (= (ref angle_sizes 2) (ref angle_sizes 4)))";
const OPPOSITE_EQUAL: &str =
    "(and (= (ref side_sizes 1) (ref side_sizes 3)) (= (ref side_sizes 2) (ref side_sizes 4)))";
const PERIMETER_EQUILATERAL: &str = "(* (ref side_sizes 1) 4)";
const PERIMETER_OPPOSITE: &str = "(* 2 (+ (ref side_sizes 1) (ref side_sizes 2)))";

fn class(name: &str, members: Vec<Member>) -> ClassSpec {
    ClassSpec::basic(name, MemberSet::new(members).expect("fixture keys"))
}

/// The four basic classes, in their conventional order S, Rb, P, Rt.
pub fn quadrangle_classes() -> Vec<ClassSpec> {
    let square = class(
        "S",
        vec![
            count("side_count", 4, "sides"),
            count("angle_count", 4, "angles"),
            symbolic("S", "side_sizes", "side", "cm"),
            right_angles(),
            check("vf_sum_360", SUM_360),
            check("vf_all_sides_equal", ALL_SIDES_EQUAL),
            check("vf_angles_90", ANGLES_90),
            method("m_perimeter", PERIMETER_EQUILATERAL, "cm"),
            method("m_area", "(pow (ref side_sizes 1) 2)", "cm^2"),
        ],
    );
    let rhombus = class(
        "Rb",
        vec![
            count("side_count", 4, "sides"),
            count("angle_count", 4, "angles"),
            symbolic("Rb", "side_sizes", "side", "cm"),
            symbolic("Rb", "angle_sizes", "angle", "deg"),
            check("vf_sum_360", SUM_360),
            check("vf_all_sides_equal", ALL_SIDES_EQUAL),
            method("m_perimeter", PERIMETER_EQUILATERAL, "cm"),
            method(
                "m_area",
                "(* (pow (ref side_sizes 1) 2) (sin (ref angle_sizes 1)))",
                "cm^2",
            ),
        ],
    );
    let parallelogram = class(
        "P",
        vec![
            count("side_count", 4, "sides"),
            count("angle_count", 4, "angles"),
            symbolic("P", "side_sizes", "side", "cm"),
            symbolic("P", "angle_sizes", "angle", "deg"),
            check("vf_sum_360", SUM_360),
            check("vf_opp_parallel", OPPOSITE_PARALLEL),
            check("vf_opp_equal", OPPOSITE_EQUAL),
            method("m_perimeter", PERIMETER_OPPOSITE, "cm"),
            method(
                "m_area",
                "(* (ref side_sizes 1) (ref side_sizes 2) (sin (ref angle_sizes 1)))",
                "cm^2",
            ),
        ],
    );
    let rectangle = class(
        "Rt",
        vec![
            count("side_count", 4, "sides"),
            count("angle_count", 4, "angles"),
            symbolic("Rt", "side_sizes", "side", "cm"),
            right_angles(),
            check("vf_sum_360", SUM_360),
            check("vf_opp_equal", OPPOSITE_EQUAL),
            method("m_perimeter", PERIMETER_OPPOSITE, "cm"),
            method("m_area", "(* (ref side_sizes 1) (ref side_sizes 2))", "cm^2"),
        ],
    );
    vec![square, rhombus, parallelogram, rectangle]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MemberBody, SlotMagnitude};

    #[test]
    fn member_totals() {
        let classes = quadrangle_classes();
        let counts: Vec<_> = classes
            .iter()
            .map(|c| (c.name().to_string(), c.property_count(), c.method_count()))
            .collect();
        assert_eq!(
            counts,
            vec![
                ("S".to_string(), 7, 2),
                ("Rb".to_string(), 6, 2),
                ("P".to_string(), 7, 2),
                ("Rt".to_string(), 6, 2)
            ]
        );
        assert_eq!(classes.iter().map(ClassSpec::property_count).sum::<usize>(), 26);
        assert_eq!(classes.iter().map(ClassSpec::method_count).sum::<usize>(), 8);
    }

    #[test]
    fn rectangle_has_right_angles() {
        let rt = quadrangle_classes().remove(3).extract_type(1).unwrap();
        let MemberBody::Quantitative(values) = rt.members.get("angle_sizes").unwrap().body() else {
            panic!("quantitative expected")
        };
        assert_eq!(values.len(), 4);
        for v in values {
            assert_eq!(v.magnitude, SlotMagnitude::Concrete(num_rational::BigRational::from_integer(90.into())));
            assert_eq!(v.unit.to_string(), "deg");
        }
    }

    #[test]
    fn every_basic_type_is_self_contained() {
        for c in quadrangle_classes() {
            assert!(c.extract_type(1).unwrap().unresolved_refs().is_empty(), "{}", c.name());
        }
    }
}
