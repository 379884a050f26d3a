use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::{Expression, PropertyRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input (list opened at offset {open_at} is not closed)")]
    UnclosedList { open_at: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected `)`")]
    UnexpectedClose,
    #[error("trailing input after expression")]
    TrailingInput,
    #[error("invalid atom `{0}`")]
    InvalidAtom(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator `{op}` expects {expected} operand(s), found {found}")]
    Arity {
        op: String,
        expected: &'static str,
        found: usize,
    },
    #[error("operator `{op}` cannot take a boolean operand")]
    BooleanOperand { op: String },
    #[error("`and` operands must be boolean")]
    ArithmeticOperand,
    #[error("slot index must be a positive integer, found `{0}`")]
    InvalidIndex(String),
    #[error("invalid property key `{0}`")]
    InvalidKey(String),
}

/// Parses the s-expression syntax.
///
/// ```
/// use oodn::expr::{parse_expression, Expression};
/// let e = parse_expression("(* 4 (ref side_sizes 1))").unwrap();
/// assert_eq!(e, Expression::Mul(vec![Expression::int(4), Expression::slot("side_sizes", 1)]));
/// ```
pub fn parse_expression(text: &str) -> Result<Expression, ParseError> {
    let mut parser = Parser { src: text, pos: 0 };
    let expr = parser.expression()?;
    parser.skip_ws();
    if parser.pos < text.len() {
        return Err(parser.error(ParseErrorKind::TrailingInput));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')'
}

fn is_identifier(s: &str, extra: &[char]) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || extra.contains(&c))
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    /// Reads a bare token up to the next delimiter; returns it with its offset.
    fn token(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_delimiter(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        (start, &self.src[start..self.pos])
    }

    fn expression(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(')') => Err(self.error(ParseErrorKind::UnexpectedClose)),
            Some('(') => self.list(),
            Some(_) => {
                let (start, tok) = self.token();
                atom(tok).ok_or(ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidAtom(tok.to_string()),
                })
            }
        }
    }

    fn list(&mut self) -> Result<Expression, ParseError> {
        let open_at = self.pos;
        self.pos += 1;
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.error(ParseErrorKind::UnclosedList { open_at }));
        }
        let (op_at, op) = self.token();
        if op.is_empty() {
            return Err(self.error(ParseErrorKind::UnknownOperator(String::new())));
        }
        if op == "ref" {
            return self.slot(open_at);
        }
        let mut operands = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.error(ParseErrorKind::UnclosedList { open_at })),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => operands.push(self.expression()?),
            }
        }
        build(op, operands).map_err(|kind| ParseError {
            offset: op_at,
            kind,
        })
    }

    fn slot(&mut self, open_at: usize) -> Result<Expression, ParseError> {
        self.skip_ws();
        let (key_at, key) = self.token();
        if key.is_empty() {
            return Err(match self.peek() {
                None => self.error(ParseErrorKind::UnclosedList { open_at }),
                _ => self.error(ParseErrorKind::InvalidKey(String::new())),
            });
        }
        if !is_identifier(key, &[]) {
            return Err(ParseError {
                offset: key_at,
                kind: ParseErrorKind::InvalidKey(key.to_string()),
            });
        }
        self.skip_ws();
        let (idx_at, idx) = self.token();
        if idx.is_empty() && self.peek().is_none() {
            return Err(self.error(ParseErrorKind::UnclosedList { open_at }));
        }
        let index = match idx.parse::<u32>() {
            Ok(i) if i >= 1 && idx.chars().all(|c| c.is_ascii_digit()) => i,
            _ => {
                return Err(ParseError {
                    offset: idx_at,
                    kind: ParseErrorKind::InvalidIndex(idx.to_string()),
                })
            }
        };
        self.skip_ws();
        match self.peek() {
            Some(')') => {
                self.pos += 1;
                Ok(Expression::Ref(PropertyRef {
                    key: key.to_string(),
                    index,
                }))
            }
            None => Err(self.error(ParseErrorKind::UnclosedList { open_at })),
            Some(_) => Err(self.error(ParseErrorKind::Arity {
                op: "ref".into(),
                expected: "2",
                found: 3,
            })),
        }
    }
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn atom(tok: &str) -> Option<Expression> {
    if let Some(name) = tok.strip_prefix("var:") {
        return is_identifier(name, &['.']).then(|| Expression::Var(name.to_string()));
    }
    if let Some((p, q)) = tok.split_once('/') {
        let numer = parse_integer(p)?;
        let denom = parse_integer(q)?;
        if denom.is_zero() || q.starts_with('-') {
            return None;
        }
        return Some(Expression::Rational(BigRational::new(numer, denom)));
    }
    parse_integer(tok).map(|i| Expression::Rational(BigRational::from_integer(i)))
}

fn build(op: &str, mut xs: Vec<Expression>) -> Result<Expression, ParseErrorKind> {
    let arity = |expected: &'static str, ok: bool, found: usize| {
        if ok {
            Ok(())
        } else {
            Err(ParseErrorKind::Arity {
                op: op.to_string(),
                expected,
                found,
            })
        }
    };
    let n = xs.len();
    let arithmetic_only = |xs: &[Expression]| {
        if xs.iter().any(Expression::is_boolean) {
            Err(ParseErrorKind::BooleanOperand { op: op.to_string() })
        } else {
            Ok(())
        }
    };
    match op {
        "+" | "*" | "=" => {
            arity("at least 2", n >= 2, n)?;
            arithmetic_only(&xs)?;
            Ok(match op {
                "+" => Expression::Add(xs),
                "*" => Expression::Mul(xs),
                _ => Expression::Eq(xs),
            })
        }
        "-" | "/" | "pow" => {
            arity("2", n == 2, n)?;
            arithmetic_only(&xs)?;
            let b = Box::new(xs.pop().unwrap());
            let a = Box::new(xs.pop().unwrap());
            Ok(match op {
                "-" => Expression::Sub(a, b),
                "/" => Expression::Div(a, b),
                _ => Expression::Pow(a, b),
            })
        }
        "sin" => {
            arity("1", n == 1, n)?;
            arithmetic_only(&xs)?;
            Ok(Expression::Sin(Box::new(xs.pop().unwrap())))
        }
        "and" => {
            arity("at least 1", n >= 1, n)?;
            if !xs.iter().all(Expression::is_boolean) {
                return Err(ParseErrorKind::ArithmeticOperand);
            }
            Ok(Expression::And(xs))
        }
        other => Err(ParseErrorKind::UnknownOperator(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perimeter_of_square() {
        let e = parse_expression("(* 4 (ref side_sizes 1))").unwrap();
        assert_eq!(
            e,
            Expression::Mul(vec![Expression::int(4), Expression::slot("side_sizes", 1)])
        );
    }

    #[test]
    fn identity_predicate() {
        let e = parse_expression("(= (ref side_sizes 1) (ref side_sizes 1))").unwrap();
        assert_eq!(
            e,
            Expression::Eq(vec![
                Expression::slot("side_sizes", 1),
                Expression::slot("side_sizes", 1)
            ])
        );
    }

    #[test]
    fn unbalanced_input_reports_end_and_open_list() {
        let err = parse_expression("(+ 1 (* 2").unwrap_err();
        assert_eq!(err.offset, 9);
        assert_eq!(err.kind, ParseErrorKind::UnclosedList { open_at: 5 });
    }

    #[test]
    fn rationals_and_variables() {
        assert_eq!(parse_expression("-3/4").unwrap(), Expression::ratio(-3, 4));
        assert_eq!(parse_expression("6/8").unwrap(), Expression::ratio(3, 4));
        assert_eq!(parse_expression("var:S.side_1").unwrap(), Expression::var("S.side_1"));
        assert!(parse_expression("1/0").is_err());
        assert!(parse_expression("1/-2").is_err());
        assert!(parse_expression("var:").is_err());
    }

    #[test]
    fn operator_and_arity_errors() {
        let err = parse_expression("(max 1 2)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownOperator("max".into()));
        assert_eq!(err.offset, 1);

        let err = parse_expression("(sin 1 2)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { found: 2, .. }));
        assert!(matches!(
            parse_expression("(+ 1)").unwrap_err().kind,
            ParseErrorKind::Arity { .. }
        ));
        assert!(matches!(
            parse_expression("(ref side_sizes 0)").unwrap_err().kind,
            ParseErrorKind::InvalidIndex(_)
        ));
        assert!(matches!(
            parse_expression("(ref side_sizes 1 2)").unwrap_err().kind,
            ParseErrorKind::Arity { .. }
        ));
    }

    #[test]
    fn booleans_stay_out_of_arithmetic() {
        let err = parse_expression("(+ 1 (= 1 1))").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BooleanOperand { .. }));
        let err = parse_expression("(and 1)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ArithmeticOperand);
        assert!(parse_expression("(and (= 1 1) (= 2 2))").is_ok());
    }

    #[test]
    fn stray_tokens() {
        assert_eq!(
            parse_expression("1 2").unwrap_err().kind,
            ParseErrorKind::TrailingInput
        );
        assert_eq!(
            parse_expression(")").unwrap_err().kind,
            ParseErrorKind::UnexpectedClose
        );
        assert_eq!(parse_expression("  ").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
    }
}
