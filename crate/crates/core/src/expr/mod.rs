//! Symbolic expressions used as verification predicates and method bodies.
//!
//! Expressions are s-expressions over exact rationals, free variables and
//! role-keyed property slots (`(ref side_sizes 1)` is the first value of the
//! `side_sizes` property). Structural equality is decided on the canonical
//! form produced by [`normalize`].

mod eval;
mod normalize;
mod parse;
mod unit;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

pub use eval::{evaluate, Binding, EvalError, Magnitude, Quantity, Value};
pub use normalize::normalize;
pub use parse::{parse_expression, ParseError, ParseErrorKind};
pub use unit::{Unit, UnitParseError};

/// A slot reference `v_index(p_key)`: the `index`-th value (1-based) of the
/// quantitative property with role key `key`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertyRef {
    pub key: String,
    pub index: u32,
}

impl PropertyRef {
    pub fn new(key: impl Into<String>, index: u32) -> Self {
        assert!(index >= 1, "property slot indices are 1-based");
        Self {
            key: key.into(),
            index,
        }
    }
}

/// Expression tree. The derived `Ord` is the total order used to sort
/// commutative operands during normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expression {
    Rational(BigRational),
    Var(String),
    Ref(PropertyRef),
    Add(Vec<Expression>),
    Mul(Vec<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, Box<Expression>),
    Sin(Box<Expression>),
    /// n-ary equality chain `a = b = c`.
    Eq(Vec<Expression>),
    And(Vec<Expression>),
}

impl Expression {
    pub fn int(value: i64) -> Self {
        Expression::Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Expression::Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expression::Var(name.into())
    }

    pub fn slot(key: impl Into<String>, index: u32) -> Self {
        Expression::Ref(PropertyRef::new(key, index))
    }

    pub fn pow(base: Expression, exponent: Expression) -> Self {
        Expression::Pow(Box::new(base), Box::new(exponent))
    }

    pub fn sin(arg: Expression) -> Self {
        Expression::Sin(Box::new(arg))
    }

    pub fn sub(a: Expression, b: Expression) -> Self {
        Expression::Sub(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expression, b: Expression) -> Self {
        Expression::Div(Box::new(a), Box::new(b))
    }

    /// Equality chains and conjunctions; everything else is arithmetic.
    pub fn is_boolean(&self) -> bool {
        matches!(self, Expression::Eq(_) | Expression::And(_))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expression::Rational(r) if r.is_one())
    }

    pub fn children(&self) -> Vec<&Expression> {
        match self {
            Expression::Rational(_) | Expression::Var(_) | Expression::Ref(_) => Vec::new(),
            Expression::Add(xs) | Expression::Mul(xs) | Expression::Eq(xs) | Expression::And(xs) => {
                xs.iter().collect()
            }
            Expression::Sub(a, b) | Expression::Div(a, b) | Expression::Pow(a, b) => {
                vec![a.as_ref(), b.as_ref()]
            }
            Expression::Sin(a) => vec![a.as_ref()],
        }
    }

    /// Every property slot mentioned anywhere in the tree.
    pub fn property_refs(&self) -> BTreeSet<PropertyRef> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<PropertyRef>) {
        if let Expression::Ref(r) = self {
            out.insert(r.clone());
        }
        for child in self.children() {
            child.collect_refs(out);
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if let Expression::Var(name) = node {
                out.insert(name.clone());
            }
            stack.extend(node.children());
        }
        out
    }

    fn operator(&self) -> Option<&'static str> {
        Some(match self {
            Expression::Add(_) => "+",
            Expression::Mul(_) => "*",
            Expression::Sub(..) => "-",
            Expression::Div(..) => "/",
            Expression::Pow(..) => "pow",
            Expression::Sin(_) => "sin",
            Expression::Eq(_) => "=",
            Expression::And(_) => "and",
            _ => return None,
        })
    }
}

/// Structural equality on canonical forms.
pub fn expressions_equal(a: &Expression, b: &Expression) -> bool {
    a == b || normalize(a) == normalize(b)
}

pub fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Rational(r) => f.write_str(&render_rational(r)),
            Expression::Var(name) => write!(f, "var:{name}"),
            Expression::Ref(r) => write!(f, "(ref {} {})", r.key, r.index),
            other => {
                let op = other.operator().expect("compound node");
                write!(f, "({op}")?;
                for child in other.children() {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Expression {
        parse_expression(text).unwrap()
    }

    #[test]
    fn perimeter_bodies_of_square_and_rhombus_are_equal() {
        let square = parse("(* (ref side_sizes 1) 4)");
        let rhombus = parse("(* 4 (ref side_sizes 1))");
        assert!(expressions_equal(&square, &rhombus));
    }

    #[test]
    fn square_and_rectangle_areas_differ() {
        let square = parse("(pow (ref side_sizes 1) 2)");
        let rect = parse("(* (ref side_sizes 1) (ref side_sizes 2))");
        assert!(!expressions_equal(&square, &rect));

        // Oracle: substitute a distinct symbol per slot and compare numerically.
        let binding = Binding::new()
            .with_slot("side_sizes", 1, Quantity::integer(3, Unit::base("cm")))
            .with_slot("side_sizes", 2, Quantity::integer(5, Unit::base("cm")));
        let a = evaluate(&square, &binding).unwrap();
        let b = evaluate(&rect, &binding).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn equality_is_reflexive() {
        let e = parse("(= (ref side_sizes 1) (ref side_sizes 1))");
        assert!(expressions_equal(&e, &e));
    }

    #[test]
    fn display_matches_grammar() {
        let e = Expression::Mul(vec![Expression::int(4), Expression::slot("side_sizes", 1)]);
        assert_eq!(e.to_string(), "(* 4 (ref side_sizes 1))");
        assert_eq!(Expression::ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(Expression::var("x").to_string(), "var:x");
    }

    #[test]
    fn collects_slots() {
        let e = parse("(* (ref side_sizes 1) (sin (ref angle_sizes 1)) var:k)");
        let refs: Vec<_> = e.property_refs().into_iter().map(|r| (r.key, r.index)).collect();
        assert_eq!(
            refs,
            vec![("angle_sizes".to_string(), 1), ("side_sizes".to_string(), 1)]
        );
        assert!(e.free_variables().contains("k"));
    }
}
