use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Expression;

/// Largest integer exponent folded at normalization time.
const MAX_FOLDED_EXPONENT: u32 = 64;

/// Canonical form: associative operators flattened, commutative operands
/// sorted, rational constants folded, `a - b` as `a + (-1 * b)` and
/// `a / b` as `a * b^-1`.
pub fn normalize(e: &Expression) -> Expression {
    match e {
        Expression::Rational(_) | Expression::Var(_) | Expression::Ref(_) => e.clone(),
        Expression::Add(xs) => make_add(xs.iter().map(normalize).collect()),
        Expression::Mul(xs) => make_mul(xs.iter().map(normalize).collect()),
        Expression::Sub(a, b) => {
            let negated = make_mul(vec![Expression::int(-1), normalize(b)]);
            make_add(vec![normalize(a), negated])
        }
        Expression::Div(a, b) => {
            let reciprocal = make_pow(normalize(b), Expression::int(-1));
            make_mul(vec![normalize(a), reciprocal])
        }
        Expression::Pow(a, b) => make_pow(normalize(a), normalize(b)),
        Expression::Sin(a) => Expression::Sin(Box::new(normalize(a))),
        Expression::Eq(xs) => {
            let mut xs: Vec<_> = xs.iter().map(normalize).collect();
            xs.sort();
            Expression::Eq(xs)
        }
        Expression::And(xs) => {
            let mut flat = Vec::with_capacity(xs.len());
            for x in xs.iter().map(normalize) {
                match x {
                    Expression::And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            flat.sort();
            flat.dedup();
            if flat.len() == 1 {
                flat.pop().unwrap()
            } else {
                Expression::And(flat)
            }
        }
    }
}

fn make_add(xs: Vec<Expression>) -> Expression {
    let mut constant = BigRational::zero();
    let mut terms = Vec::with_capacity(xs.len());
    for x in xs {
        match x {
            Expression::Add(inner) => {
                for y in inner {
                    match y {
                        Expression::Rational(r) => constant += r,
                        other => terms.push(other),
                    }
                }
            }
            Expression::Rational(r) => constant += r,
            other => terms.push(other),
        }
    }
    if !constant.is_zero() || terms.is_empty() {
        terms.push(Expression::Rational(constant));
    }
    finish(terms, Expression::Add)
}

fn make_mul(xs: Vec<Expression>) -> Expression {
    let mut constant = BigRational::one();
    let mut factors = Vec::with_capacity(xs.len());
    for x in xs {
        match x {
            Expression::Mul(inner) => {
                for y in inner {
                    match y {
                        Expression::Rational(r) => constant *= r,
                        other => factors.push(other),
                    }
                }
            }
            Expression::Rational(r) => constant *= r,
            other => factors.push(other),
        }
    }
    if !constant.is_one() || factors.is_empty() {
        factors.push(Expression::Rational(constant));
    }
    finish(factors, Expression::Mul)
}

fn finish(mut xs: Vec<Expression>, wrap: fn(Vec<Expression>) -> Expression) -> Expression {
    if xs.len() == 1 {
        return xs.pop().unwrap();
    }
    xs.sort();
    wrap(xs)
}

fn make_pow(base: Expression, exponent: Expression) -> Expression {
    if exponent.is_one() {
        return base;
    }
    if let (Expression::Rational(b), Expression::Rational(e)) = (&base, &exponent) {
        if let Some(folded) = fold_pow(b, e) {
            return Expression::Rational(folded);
        }
    }
    Expression::Pow(Box::new(base), Box::new(exponent))
}

fn fold_pow(base: &BigRational, exponent: &BigRational) -> Option<BigRational> {
    if !exponent.is_integer() {
        return None;
    }
    let k = exponent.to_integer();
    let magnitude = k.abs().to_u32().filter(|m| *m <= MAX_FOLDED_EXPONENT)?;
    if k.is_negative() && base.is_zero() {
        return None;
    }
    let raised = BigRational::new(
        num_traits::pow(base.numer().clone(), magnitude as usize),
        num_traits::pow(base.denom().clone(), magnitude as usize),
    );
    Some(if k < BigInt::zero() {
        raised.recip()
    } else {
        raised
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn norm(text: &str) -> String {
        normalize(&parse_expression(text).unwrap()).to_string()
    }

    #[test]
    fn commutative_sort_puts_constants_first() {
        let e = Expression::Mul(vec![Expression::slot("side_sizes", 1), Expression::int(4)]);
        assert_eq!(
            normalize(&e),
            Expression::Mul(vec![Expression::int(4), Expression::slot("side_sizes", 1)])
        );
    }

    #[test]
    fn flatten_and_fold() {
        let e = Expression::Add(vec![
            Expression::int(1),
            Expression::Add(vec![Expression::int(2), Expression::var("x")]),
        ]);
        assert_eq!(
            normalize(&e),
            Expression::Add(vec![Expression::int(3), Expression::var("x")])
        );
    }

    #[test]
    fn subtraction_and_division_rewrites() {
        assert_eq!(norm("(- var:a var:b)"), "(+ var:a (* -1 var:b))");
        assert_eq!(norm("(- var:a 3)"), "(+ -3 var:a)");
        assert_eq!(norm("(/ var:a 2)"), "(* 1/2 var:a)");
        assert_eq!(norm("(/ var:a var:b)"), "(* var:a (pow var:b -1))");
        assert_eq!(norm("(/ 1 0)"), "(pow 0 -1)");
    }

    #[test]
    fn identities_unwrap() {
        assert_eq!(norm("(* 1 var:a)"), "var:a");
        assert_eq!(norm("(+ 0 var:a)"), "var:a");
        assert_eq!(norm("(pow var:a 1)"), "var:a");
        assert_eq!(norm("(pow 2 10)"), "1024");
        assert_eq!(norm("(pow 2/3 -2)"), "9/4");
        assert_eq!(norm("(+ 1 -1)"), "0");
        assert_eq!(norm("(and (= var:a 1))"), "(= 1 var:a)");
        assert_eq!(
            norm("(and (= var:b 1) (and (= var:a 1) (= var:b 1)))"),
            "(and (= 1 var:a) (= 1 var:b))"
        );
    }

    #[test]
    fn unit_factors_unwrap_into_parent() {
        assert_eq!(norm("(+ var:x (* 1 (+ var:y var:z)))"), "(+ var:x var:y var:z)");
    }

    #[test]
    fn perimeter_of_square_matches_rhombus() {
        assert_eq!(norm("(* (ref side_sizes 1) 4)"), norm("(* 4 (ref side_sizes 1))"));
    }

    #[test]
    fn no_distribution() {
        assert_ne!(
            norm("(* 2 (+ (ref side_sizes 1) (ref side_sizes 2)))"),
            norm("(+ (* 2 (ref side_sizes 1)) (* 2 (ref side_sizes 2)))")
        );
    }
}
