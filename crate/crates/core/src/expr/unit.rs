use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A product of base-unit symbols raised to integer exponents.
///
/// The empty product is the dimensionless unit, rendered as `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit {
    factors: BTreeMap<String, i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid unit `{text}`: {reason}")]
pub struct UnitParseError {
    pub text: String,
    pub reason: String,
}

impl Unit {
    pub fn dimensionless() -> Self {
        Self::default()
    }

    pub fn base(symbol: &str) -> Self {
        Self::from_factors([(symbol.to_string(), 1)])
    }

    pub fn from_factors<I: IntoIterator<Item = (String, i32)>>(factors: I) -> Self {
        let mut unit = Self::default();
        for (symbol, exponent) in factors {
            unit.add_factor(symbol, exponent);
        }
        unit
    }

    fn add_factor(&mut self, symbol: String, exponent: i32) {
        let entry = self.factors.entry(symbol).or_insert(0);
        *entry += exponent;
        if *entry == 0 {
            self.factors.retain(|_, e| *e != 0);
        }
    }

    pub fn is_dimensionless(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &BTreeMap<String, i32> {
        &self.factors
    }

    pub fn mul(&self, other: &Unit) -> Unit {
        let mut out = self.clone();
        for (symbol, exponent) in &other.factors {
            out.add_factor(symbol.clone(), *exponent);
        }
        out
    }

    pub fn div(&self, other: &Unit) -> Unit {
        self.mul(&other.powi(-1))
    }

    pub fn powi(&self, exponent: i32) -> Unit {
        Unit::from_factors(self.factors.iter().map(|(s, e)| (s.clone(), e * exponent)))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (symbol, exponent)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *exponent == 1 {
                write!(f, "{symbol}")?;
            } else {
                write!(f, "{symbol}^{exponent}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Unit {
    type Err = UnitParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| UnitParseError {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(err("empty unit"));
        }
        if trimmed == "1" {
            return Ok(Unit::dimensionless());
        }
        let mut unit = Unit::default();
        for part in trimmed.split('*') {
            let (symbol, exponent) = match part.split_once('^') {
                Some((s, e)) => (
                    s,
                    e.parse::<i32>().map_err(|_| err("exponent is not an integer"))?,
                ),
                None => (part, 1),
            };
            let valid = !symbol.is_empty()
                && symbol.chars().all(|c| c.is_alphanumeric() || c == '_')
                && !symbol.chars().next().is_some_and(|c| c.is_ascii_digit());
            if !valid {
                return Err(err("unit symbols are alphanumeric words"));
            }
            if exponent == 0 {
                return Err(err("zero exponent"));
            }
            unit.add_factor(symbol.to_string(), exponent);
        }
        Ok(unit)
    }
}

impl Serialize for Unit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Unit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
