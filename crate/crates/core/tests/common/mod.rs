#![allow(dead_code)]

use std::collections::BTreeSet;

use oodn::expr::{parse_expression, Expression, Unit};
use num_bigint::BigInt;
use num_rational::BigRational;
use oodn::model::{ClassSpec, Member, MemberSet, SlotMagnitude, SlotValue};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

fn unit(s: &str) -> Unit {
    s.parse().unwrap()
}

fn count(key: &str, n: i64) -> Member {
    Member::quantitative(key, vec![SlotValue::concrete(n, unit("items"))]).unwrap()
}

/// Member names of synthetic basic `i` among `n`: a three-member core shared by
/// all, one private member, and `shared_<mask>` for every subset of size >= 2
/// containing `i`.
pub fn synthetic_member_names(n: usize, i: usize) -> BTreeSet<String> {
    let mut names: BTreeSet<String> = ["core_count", "core_check", "core_double"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.insert(format!("own_{i}"));
    for mask in 1u32..(1 << n) {
        if mask.count_ones() >= 2 && mask & (1 << i) != 0 {
            names.insert(format!("shared_{mask}"));
        }
    }
    names
}

pub fn synthetic_basics(n: usize) -> Vec<ClassSpec> {
    (0..n)
        .map(|i| {
            let members = synthetic_member_names(n, i)
                .into_iter()
                .map(|name| match name.as_str() {
                    "core_check" => Member::verification(
                        "core_check",
                        &parse_expression("(= (ref core_count 1) 4)").unwrap(),
                        true,
                    )
                    .unwrap(),
                    "core_double" => Member::method(
                        "core_double",
                        &parse_expression("(* 2 (ref core_count 1))").unwrap(),
                        unit("items"),
                    )
                    .unwrap(),
                    "core_count" => count("core_count", 4),
                    other => count(other, other.len() as i64),
                })
                .collect();
            ClassSpec::basic(LETTERS[i], MemberSet::new(members).unwrap())
        })
        .collect()
}

/// Distinct generated classes for `n` synthetic basics, computed on plain name
/// sets: a union is its maximal constituent sets, an intersection their meet.
pub fn subset_oracle(n: usize) -> (usize, usize, usize) {
    let sets: Vec<BTreeSet<String>> = (0..n).map(|i| synthetic_member_names(n, i)).collect();
    let basics: BTreeSet<Vec<BTreeSet<String>>> = sets.iter().map(|s| vec![s.clone()]).collect();
    let mut unions = BTreeSet::new();
    let mut inters = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let chosen: Vec<&BTreeSet<String>> =
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &sets[i]).collect();
        let mut maximal: Vec<BTreeSet<String>> = chosen
            .iter()
            .filter(|s| !chosen.iter().any(|t| t != *s && s.is_subset(t)))
            .map(|s| (*s).clone())
            .collect();
        maximal.sort();
        maximal.dedup();
        if !basics.contains(&maximal) {
            unions.insert(maximal);
        }
        let meet = chosen
            .iter()
            .skip(1)
            .fold(chosen[0].clone(), |acc, s| acc.intersection(s).cloned().collect());
        if !basics.contains(&vec![meet.clone()]) {
            inters.insert(vec![meet]);
        }
    }
    let total = unions.union(&inters).count();
    (unions.len(), inters.len(), total)
}

const KEYS: [&str; 6] = ["alpha", "beta", "gamma", "delta", "eps", "zeta"];
const UNITS: [&str; 4] = ["cm", "deg", "1", "cm^2"];

fn random_value(rng: &mut ChaCha8Rng, class: &str, key: &str, i: usize) -> SlotValue {
    let u = unit(UNITS[rng.gen_range(0..UNITS.len())]);
    if rng.gen_bool(0.3) {
        SlotValue::symbolic(format!("{class}.{key}_{i}"), u)
    } else {
        let num: i64 = rng.gen_range(-20..=20);
        let den: i64 = rng.gen_range(1..=4);
        SlotValue {
            magnitude: SlotMagnitude::Concrete(BigRational::new(BigInt::from(num), BigInt::from(den))),
            unit: u,
        }
    }
}

pub fn random_numeric(rng: &mut ChaCha8Rng, depth: u32) -> Expression {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..3) {
            0 => Expression::int(rng.gen_range(-6..=6)),
            1 => Expression::slot(KEYS[rng.gen_range(0..3)], rng.gen_range(1..=3)),
            _ => Expression::var(["x", "y"][rng.gen_range(0..2)]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_numeric(rng, depth - 1);
    match rng.gen_range(0..6) {
        0 => Expression::Add((0..rng.gen_range(2..4)).map(|_| sub(rng)).collect()),
        1 => Expression::Mul((0..rng.gen_range(2..4)).map(|_| sub(rng)).collect()),
        2 => Expression::sub(sub(rng), sub(rng)),
        3 => Expression::div(sub(rng), sub(rng)),
        4 => Expression::pow(sub(rng), Expression::int(rng.gen_range(-2..=3))),
        _ => Expression::sin(sub(rng)),
    }
}

pub fn random_boolean(rng: &mut ChaCha8Rng, depth: u32) -> Expression {
    if depth == 0 || rng.gen_bool(0.6) {
        let n = rng.gen_range(2..4);
        return Expression::Eq((0..n).map(|_| random_numeric(rng, 2)).collect());
    }
    Expression::And((0..rng.gen_range(1..3)).map(|_| random_boolean(rng, depth - 1)).collect())
}

pub fn random_member(rng: &mut ChaCha8Rng, class: &str, key: &str) -> Member {
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(1..=4);
            Member::quantitative(key, (1..=n).map(|i| random_value(rng, class, key, i)).collect())
                .unwrap()
        }
        1 => Member::verification(key, &random_boolean(rng, 2), rng.gen_bool(0.8)).unwrap(),
        _ => Member::method(
            format!("m_{key}"),
            &random_numeric(rng, 3),
            unit(UNITS[rng.gen_range(0..UNITS.len())]),
        )
        .unwrap(),
    }
}

/// Homogeneous classes over a small key pool, so member overlap is common.
/// Members are drawn from a per-key pool to make cross-class equality likely.
pub fn random_basics(seed: u64, count: usize) -> Vec<ClassSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Vec<Member>> = KEYS
        .iter()
        .map(|k| (0..2).map(|_| random_member(&mut rng, "pool", k)).collect())
        .collect();
    (0..count)
        .map(|c| {
            let mut members: Vec<Member> = Vec::new();
            for (k, variants) in KEYS.iter().zip(&pool) {
                if rng.gen_bool(0.6) {
                    let m = if rng.gen_bool(0.8) {
                        variants[rng.gen_range(0..variants.len())].clone()
                    } else {
                        random_member(&mut rng, LETTERS[c], k)
                    };
                    if !members.iter().any(|x| x.key() == m.key()) {
                        members.push(m);
                    }
                }
            }
            ClassSpec::basic(LETTERS[c], MemberSet::new(members).unwrap())
        })
        .collect()
}

pub fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}
