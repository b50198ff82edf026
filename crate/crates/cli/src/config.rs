//! Run configuration, stored as TOML:
//!
//! ```toml
//! order = 11
//! format = "pretty"
//!
//! [potential]
//! m = 1
//! omega = 1
//!
//! [[potential.term]]   # f_i x^(i+2), f_i = coeff * lambda^lambda_exp
//! index = 4
//! coeff = "1/2"
//! lambda_exp = 1
//!
//! [oracle]
//! lambda = "1/1000"
//! basis = 60
//! basis_check = 80
//! levels = [0, 1, 2, 3]
//! ```
//!
//! Exact fields take an integer or a `"p/q"` string; TOML floats are
//! rejected so that nothing inexact reaches the recursion.

use std::fmt;
use std::str::FromStr;

use lpt_core::exact::{parse_decimal, parse_rational, BiPoly, BigRational};
use lpt_core::oracle::ComparePolicy;
use lpt_core::PotentialSpec;
use num_bigint::BigInt;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Exact rational read from an integer or a string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational(pub BigRational);

/// Like [`Rational`] but also accepts exact decimal strings (`"0.001"`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling(pub BigRational);

struct ExactVisitor {
    allow_decimal: bool,
}

impl<'de> Visitor<'de> for ExactVisitor {
    type Value = BigRational;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.allow_decimal {
            f.write_str("an integer, or a string holding \"p/q\" or an exact decimal")
        } else {
            f.write_str("an integer or a \"p/q\" string")
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigRational, E> {
        Ok(BigRational::from_integer(BigInt::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigRational, E> {
        Ok(BigRational::from_integer(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<BigRational, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not allowed; write an exact value as a string, e.g. \"1/2\""
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigRational, E> {
        let parsed = if self.allow_decimal {
            parse_decimal(v)
        } else {
            parse_rational(v)
        };
        parsed.map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ExactVisitor {
            allow_decimal: false,
        })
        .map(Rational)
    }
}

impl<'de> Deserialize<'de> for Coupling {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ExactVisitor {
            allow_decimal: true,
        })
        .map(Coupling)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl Serialize for Coupling {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Pretty,
    Csv,
    Machine,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pretty" => Ok(Self::Pretty),
            "csv" => Ok(Self::Csv),
            "machine" => Ok(Self::Machine),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    /// `i` in `f_i x^{i+2}`.
    pub index: u32,
    pub coeff: Rational,
    #[serde(default)]
    pub lambda_exp: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub m: Rational,
    pub omega: Rational,
    #[serde(default, rename = "term", skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub lambda: Coupling,
    pub basis: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_check: Option<usize>,
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_tol: Option<f64>,
}

impl OracleBlock {
    pub fn policy(&self) -> ComparePolicy {
        let d = ComparePolicy::default();
        ComparePolicy {
            bound_factor: self.bound_factor.unwrap_or(d.bound_factor),
            floor: self.floor.unwrap_or(d.floor),
            basis_check: self.basis_check,
            convergence_tol: self.convergence_tol.unwrap_or(d.convergence_tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub parity_shortcut: bool,
    pub potential: PotentialBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl RunConfig {
    /// The potential with each term `coeff·λ^lambda_exp` placed at its index.
    pub fn spec(&self) -> PotentialSpec {
        PotentialSpec::new(
            self.potential.m.0.clone(),
            self.potential.omega.0.clone(),
            self.potential
                .terms
                .iter()
                .map(|t| (t.index, BiPoly::monomial(0, t.lambda_exp, t.coeff.0.clone()))),
        )
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    if cfg.order == Some(0) {
        return Err(ConfigError::Invalid {
            field: "order",
            reason: "must be at least 1".into(),
        });
    }
    if let Some(o) = &cfg.oracle {
        if o.levels.is_empty() {
            return Err(ConfigError::Invalid {
                field: "oracle.levels",
                reason: "at least one level is required".into(),
            });
        }
        if o.basis < 2 {
            return Err(ConfigError::Invalid {
                field: "oracle.basis",
                reason: "must be at least 2".into(),
            });
        }
    }
    Ok(cfg)
}

pub fn render_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpt_core::exact::{rat, ratio};

    const SEXTIC: &str = r#"
order = 11

[potential]
m = 1
omega = "1"

[[potential.term]]
index = 4
coeff = "1/2"
lambda_exp = 1
"#;

    #[test]
    fn sextic_config() {
        let cfg = parse_config(SEXTIC).unwrap();
        assert_eq!(cfg.order, Some(11));
        assert_eq!(cfg.spec(), PotentialSpec::sextic());
    }

    #[test]
    fn harmonic_config() {
        let cfg = parse_config("[potential]\nm = 1\nomega = 1\n").unwrap();
        assert_eq!(cfg.spec(), PotentialSpec::harmonic(rat(1), rat(1)));
        assert!(cfg.oracle.is_none());
    }

    #[test]
    fn floats_are_rejected() {
        let text = SEXTIC.replace("\"1/2\"", "0.5");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("floating-point"), "{err}");
        assert!(err.contains("line"), "{err}");
        let text = SEXTIC.replace("\"1/2\"", "\"0.5\"");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unknown_and_missing_fields() {
        let err = parse_config("[potential]\nm = 1\nomega = 1\nmass = 2\n").unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
        let err = parse_config("[potential]\nm = 1\n").unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
        assert!(parse_config("order = 3\n").is_err());
        assert!(parse_config("order = 0\n[potential]\nm = 1\nomega = 1\n").is_err());
    }

    #[test]
    fn oracle_block() {
        let text = format!(
            "{SEXTIC}\n[oracle]\nlambda = \"0.001\"\nbasis = 60\nlevels = [0, 1]\nbound_factor = 5.0\n"
        );
        let cfg = parse_config(&text).unwrap();
        let o = cfg.oracle.as_ref().unwrap();
        assert_eq!(o.lambda.0, ratio(1, 1000));
        assert_eq!(o.policy().bound_factor, 5.0);
        assert_eq!(o.policy().floor, 1e-10);
        let bad = text.replace("\"0.001\"", "0.001");
        assert!(parse_config(&bad).is_err());
        let empty = text.replace("[0, 1]", "[]");
        assert!(parse_config(&empty).is_err());
    }

    #[test]
    fn render_round_trips() {
        let text = format!("{SEXTIC}\n[oracle]\nlambda = \"1e-4\"\nbasis = 60\nlevels = [3]\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }
}
