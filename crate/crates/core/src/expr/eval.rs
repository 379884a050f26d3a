use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{render_rational, Expression, PropertyRef, Unit};

/// Comparison tolerance for equality chains whose operands went through `sin`.
pub const APPROX_TOLERANCE: f64 = 1e-9;

const MAX_EXPONENT: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound slot {key}[{index}]")]
    UnboundSlot { key: String, index: u32 },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unit mismatch in {context}: {left} vs {right}")]
    UnitMismatch {
        context: &'static str,
        left: Unit,
        right: Unit,
    },
    #[error("boolean operand used in arithmetic")]
    BooleanInArithmetic,
    #[error("expected a boolean operand")]
    ExpectedBoolean,
    #[error("exponent must be a dimensionless exact integer")]
    NonIntegerExponent,
    #[error("exponent magnitude exceeds {MAX_EXPONENT}")]
    ExponentTooLarge,
}

/// An exact bound value for a slot or free variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantity {
    pub magnitude: BigRational,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(magnitude: BigRational, unit: Unit) -> Self {
        Self { magnitude, unit }
    }

    pub fn integer(value: i64, unit: Unit) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(value)), unit)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", render_rational(&self.magnitude), self.unit)
    }
}

/// Values for property slots and free variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    slots: BTreeMap<PropertyRef, Quantity>,
    variables: BTreeMap<String, Quantity>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_slot(mut self, key: &str, index: u32, value: Quantity) -> Self {
        self.set_slot(key, index, value);
        self
    }

    pub fn with_variable(mut self, name: &str, value: Quantity) -> Self {
        self.set_variable(name, value);
        self
    }

    pub fn set_slot(&mut self, key: &str, index: u32, value: Quantity) {
        self.slots.insert(PropertyRef::new(key, index), value);
    }

    pub fn set_variable(&mut self, name: &str, value: Quantity) {
        self.variables.insert(name.to_string(), value);
    }

    pub fn slot(&self, key: &str, index: u32) -> Option<&Quantity> {
        self.slots.get(&PropertyRef::new(key, index))
    }

    pub fn variable(&self, name: &str) -> Option<&Quantity> {
        self.variables.get(name)
    }

    pub fn slots(&self) -> impl Iterator<Item = (&PropertyRef, &Quantity)> {
        self.slots.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = (&String, &Quantity)> {
        self.variables.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty() && self.variables.is_empty()
    }
}

/// Numeric magnitude: exact until a `sin` of a non-tabulated angle intervenes.
#[derive(Debug, Clone, PartialEq)]
pub enum Magnitude {
    Exact(BigRational),
    Approx(f64),
}

impl Magnitude {
    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Magnitude::Approx(x) => *x,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Magnitude::Exact(r) => r.is_zero(),
            Magnitude::Approx(x) => *x == 0.0,
        }
    }

    fn add(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => Magnitude::Exact(a + b),
            _ => Magnitude::Approx(self.to_f64() + other.to_f64()),
        }
    }

    fn mul(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => Magnitude::Exact(a * b),
            _ => Magnitude::Approx(self.to_f64() * other.to_f64()),
        }
    }

    fn powi(&self, k: i32) -> Magnitude {
        match self {
            Magnitude::Exact(r) => Magnitude::Exact(num_traits::Pow::pow(r, k)),
            Magnitude::Approx(x) => Magnitude::Approx(x.powi(k)),
        }
    }

    /// Exact comparison for rationals, relative/absolute tolerance otherwise.
    pub fn approx_eq(&self, other: &Magnitude) -> bool {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let scale = 1f64.max(a.abs()).max(b.abs());
                (a - b).abs() <= APPROX_TOLERANCE * scale
            }
        }
    }
}

/// Result of evaluation. A number with `unit: None` came from bare literals
/// only and adopts the unit of whatever it is added to or compared with.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number {
        magnitude: Magnitude,
        unit: Option<Unit>,
    },
    Bool(bool),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Number { .. } => None,
        }
    }

    pub fn magnitude(&self) -> Option<&Magnitude> {
        match self {
            Value::Number { magnitude, .. } => Some(magnitude),
            Value::Bool(_) => None,
        }
    }

    pub fn unit(&self) -> Option<&Unit> {
        match self {
            Value::Number { unit, .. } => unit.as_ref(),
            Value::Bool(_) => None,
        }
    }

    /// Agreement up to the approximate tolerance; units must match.
    pub fn agrees_with(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (
                Value::Number {
                    magnitude: a,
                    unit: ua,
                },
                Value::Number {
                    magnitude: b,
                    unit: ub,
                },
            ) => {
                let units_ok = match (ua, ub) {
                    (Some(x), Some(y)) => x == y,
                    _ => true,
                };
                units_ok && a.approx_eq(b)
            }
            _ => false,
        }
    }
}

struct Number {
    magnitude: Magnitude,
    unit: Option<Unit>,
}

fn unify(context: &'static str, a: Option<Unit>, b: &Option<Unit>) -> Result<Option<Unit>, EvalError> {
    match (a, b) {
        (None, other) => Ok(other.clone()),
        (some, None) => Ok(some),
        (Some(x), Some(y)) if &x == y => Ok(Some(x)),
        (Some(x), Some(y)) => Err(EvalError::UnitMismatch {
            context,
            left: x,
            right: y.clone(),
        }),
    }
}

fn mul_units(a: Option<Unit>, b: &Option<Unit>) -> Option<Unit> {
    match (a, b) {
        (None, other) => other.clone(),
        (some, None) => some,
        (Some(x), Some(y)) => Some(x.mul(y)),
    }
}

/// Exact sine for angles (in degrees) whose sine is rational.
fn exact_sin_degrees(angle: &BigRational) -> Option<BigRational> {
    if !angle.is_integer() {
        return None;
    }
    let full = BigInt::from(360);
    let mut reduced = angle.to_integer() % &full;
    if reduced.is_negative() {
        reduced += &full;
    }
    let (n, d) = match reduced.to_u32()? {
        0 | 180 => (0, 1),
        30 | 150 => (1, 2),
        90 => (1, 1),
        210 | 330 => (-1, 2),
        270 => (-1, 1),
        _ => return None,
    };
    Some(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn evaluate(e: &Expression, binding: &Binding) -> Result<Value, EvalError> {
    if e.is_boolean() {
        return boolean(e, binding).map(Value::Bool);
    }
    let n = number(e, binding)?;
    Ok(Value::Number {
        magnitude: n.magnitude,
        unit: n.unit,
    })
}

fn boolean(e: &Expression, binding: &Binding) -> Result<bool, EvalError> {
    match e {
        Expression::And(xs) => {
            let mut all = true;
            for x in xs {
                all &= boolean(x, binding)?;
            }
            Ok(all)
        }
        Expression::Eq(xs) => {
            let values = xs
                .iter()
                .map(|x| number(x, binding))
                .collect::<Result<Vec<_>, _>>()?;
            let mut unit = None;
            for v in &values {
                unit = unify("equality chain", unit, &v.unit)?;
            }
            let first = &values[0].magnitude;
            Ok(values[1..].iter().all(|v| v.magnitude.approx_eq(first)))
        }
        _ => Err(EvalError::ExpectedBoolean),
    }
}

fn number(e: &Expression, binding: &Binding) -> Result<Number, EvalError> {
    match e {
        Expression::Rational(r) => Ok(Number {
            magnitude: Magnitude::Exact(r.clone()),
            unit: None,
        }),
        Expression::Var(name) => binding
            .variable(name)
            .map(quantity_number)
            .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
        Expression::Ref(r) => binding
            .slot(&r.key, r.index)
            .map(quantity_number)
            .ok_or_else(|| EvalError::UnboundSlot {
                key: r.key.clone(),
                index: r.index,
            }),
        Expression::Add(xs) => {
            let mut acc = Magnitude::Exact(BigRational::zero());
            let mut unit = None;
            for x in xs {
                let n = number(x, binding)?;
                unit = unify("sum", unit, &n.unit)?;
                acc = acc.add(&n.magnitude);
            }
            Ok(Number {
                magnitude: acc,
                unit,
            })
        }
        Expression::Mul(xs) => {
            let mut acc = Magnitude::Exact(BigRational::from_integer(1.into()));
            let mut unit = None;
            for x in xs {
                let n = number(x, binding)?;
                unit = mul_units(unit, &n.unit);
                acc = acc.mul(&n.magnitude);
            }
            Ok(Number {
                magnitude: acc,
                unit,
            })
        }
        Expression::Sub(a, b) => {
            let a = number(a, binding)?;
            let b = number(b, binding)?;
            let unit = unify("difference", a.unit, &b.unit)?;
            let negated = b.magnitude.mul(&Magnitude::Exact(BigRational::from_integer((-1).into())));
            Ok(Number {
                magnitude: a.magnitude.add(&negated),
                unit,
            })
        }
        Expression::Div(a, b) => {
            let a = number(a, binding)?;
            let b = number(b, binding)?;
            if b.magnitude.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            let unit = mul_units(a.unit, &b.unit.map(|u| u.powi(-1)));
            Ok(Number {
                magnitude: a.magnitude.mul(&b.magnitude.powi(-1)),
                unit,
            })
        }
        Expression::Pow(a, b) => {
            let base = number(a, binding)?;
            let exponent = number(b, binding)?;
            let k = match (&exponent.magnitude, &exponent.unit) {
                (Magnitude::Exact(r), unit)
                    if r.is_integer() && unit.as_ref().is_none_or(Unit::is_dimensionless) =>
                {
                    r.to_integer()
                }
                _ => return Err(EvalError::NonIntegerExponent),
            };
            let k = k
                .to_i32()
                .filter(|k| k.unsigned_abs() <= MAX_EXPONENT)
                .ok_or(EvalError::ExponentTooLarge)?;
            if k < 0 && base.magnitude.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(Number {
                magnitude: base.magnitude.powi(k),
                unit: base.unit.map(|u| u.powi(k)),
            })
        }
        Expression::Sin(a) => {
            let arg = number(a, binding)?;
            if let Some(unit) = &arg.unit {
                if !unit.is_dimensionless() && unit != &Unit::base("deg") {
                    return Err(EvalError::UnitMismatch {
                        context: "sin argument",
                        left: unit.clone(),
                        right: Unit::base("deg"),
                    });
                }
            }
            let magnitude = match &arg.magnitude {
                Magnitude::Exact(r) => match exact_sin_degrees(r) {
                    Some(s) => Magnitude::Exact(s),
                    None => Magnitude::Approx(arg.magnitude.to_f64().to_radians().sin()),
                },
                Magnitude::Approx(x) => Magnitude::Approx(x.to_radians().sin()),
            };
            Ok(Number {
                magnitude,
                unit: Some(Unit::dimensionless()),
            })
        }
        Expression::Eq(_) | Expression::And(_) => Err(EvalError::BooleanInArithmetic),
    }
}

fn quantity_number(q: &Quantity) -> Number {
    Number {
        magnitude: Magnitude::Exact(q.magnitude.clone()),
        unit: Some(q.unit.clone()),
    }
}
