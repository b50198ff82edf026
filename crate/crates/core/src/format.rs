//! Renderings of an [`EnergySeries`]: a factored pretty table, CSV of
//! monomial coefficients, and a JSON machine format that doubles as the
//! golden-file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::engine::{EnergySeries, PotentialSpec};
use crate::error::{Error, Result};
use crate::exact::{parse_rational, BiPoly, BigRational};

pub const MACHINE_FORMAT_TAG: &str = "lpt-energy-series";
pub const MACHINE_FORMAT_VERSION: u32 = 1;

fn superscript(e: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    e.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

fn symbol_power(sym: &str, e: u32) -> String {
    match e {
        0 => String::new(),
        1 => sym.to_string(),
        _ => format!("{sym}{}", superscript(e)),
    }
}

/// Splits `Σ c_i n^i` into `content · primitive`, where the primitive part
/// has coprime integer coefficients and a positive leading coefficient.
fn content_split(coeffs: &BTreeMap<u32, BigRational>) -> (BigRational, BTreeMap<u32, BigInt>) {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for c in coeffs.values() {
        num_gcd = num_gcd.gcd(c.numer());
        den_lcm = den_lcm.lcm(c.denom());
    }
    let lead_negative = coeffs.values().next_back().is_some_and(|c| c.is_negative());
    let mut content = BigRational::new(num_gcd, den_lcm);
    if lead_negative {
        content = -content;
    }
    let primitive = coeffs
        .iter()
        .map(|(e, c)| (*e, (c / &content).to_integer()))
        .collect();
    (content, primitive)
}

fn render_integer_poly(p: &BTreeMap<u32, BigInt>) -> String {
    let mut out = String::new();
    for (idx, (e, c)) in p.iter().rev().enumerate() {
        if c.is_negative() {
            out.push('-');
        } else if idx > 0 {
            out.push('+');
        }
        let a = c.abs();
        if *e == 0 || !a.is_one() {
            let _ = write!(out, "{a}");
        }
        out.push_str(&symbol_power("n", *e));
    }
    out
}

/// Factored form, one group per power of `λ`, e.g.
/// `5/16·λ·(4n³+6n²+8n+3)`.
pub fn pretty_poly(p: &BiPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut groups: BTreeMap<u32, BTreeMap<u32, BigRational>> = BTreeMap::new();
    for ((dn, dl), c) in p.terms() {
        groups.entry(dl).or_default().insert(dn, c.clone());
    }
    let mut out = String::new();
    for (idx, (dl, coeffs)) in groups.iter().enumerate() {
        let (mut content, primitive) = content_split(coeffs);
        if idx > 0 {
            out.push_str(if content.is_negative() { " - " } else { " + " });
            content = content.abs();
        }
        let mut parts: Vec<String> = Vec::new();
        let poly = render_integer_poly(&primitive);
        let poly_is_one = poly == "1";
        let lam = symbol_power("λ", *dl);
        let sign_only = content.abs().is_one() && !(poly_is_one && lam.is_empty());
        if sign_only {
            if content.is_negative() {
                out.push('-');
            }
        } else {
            parts.push(content.to_string());
        }
        if !lam.is_empty() {
            parts.push(lam);
        }
        if !poly_is_one {
            parts.push(if primitive.len() > 1 { format!("({poly})") } else { poly });
        }
        out.push_str(&parts.join("·"));
    }
    out
}

pub fn render_pretty(series: &EnergySeries) -> String {
    let spec = series.spec();
    let mut out = format!(
        "Energy coefficients E_k (m = {}, omega = {}, order {})\n",
        spec.m(),
        spec.omega(),
        series.order()
    );
    for (i, f) in spec.terms() {
        let _ = writeln!(out, "  f_{i} = {}  (x^{})", pretty_poly(f), i + 2);
    }
    let _ = writeln!(out, "{:>4}  E_k", "k");
    for (k, e) in series.coefficients() {
        let _ = writeln!(out, "{k:>4}  {}", pretty_poly(e));
    }
    out
}

/// `k,deg_n,deg_lambda,coeff`; an identically zero `E_k` is one `k,0,0,0` row.
pub fn render_csv(series: &EnergySeries) -> String {
    let mut out = String::from("k,deg_n,deg_lambda,coeff\n");
    for (k, e) in series.coefficients() {
        if e.is_zero() {
            let _ = writeln!(out, "{k},0,0,0");
            continue;
        }
        for ((dn, dl), c) in e.terms() {
            let _ = writeln!(out, "{k},{dn},{dl},{c}");
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineTerm {
    pub index: u32,
    pub coeff: BiPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachinePotential {
    pub m: String,
    pub omega: String,
    pub terms: Vec<MachineTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEnergy {
    pub k: usize,
    pub poly: BiPoly,
}

/// JSON document holding `E_1..E_K` as `(deg_n, deg_λ, "p/q")` records.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSeries {
    pub format: String,
    pub version: u32,
    pub potential: MachinePotential,
    pub order: usize,
    pub energies: Vec<MachineEnergy>,
}

impl MachineSeries {
    pub fn from_series(series: &EnergySeries) -> Self {
        let spec = series.spec();
        Self {
            format: MACHINE_FORMAT_TAG.into(),
            version: MACHINE_FORMAT_VERSION,
            potential: MachinePotential {
                m: spec.m().to_string(),
                omega: spec.omega().to_string(),
                terms: spec
                    .terms()
                    .map(|(index, coeff)| MachineTerm {
                        index,
                        coeff: coeff.clone(),
                    })
                    .collect(),
            },
            order: series.order(),
            energies: series
                .coefficients()
                .map(|(k, e)| MachineEnergy { k, poly: e.clone() })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != MACHINE_FORMAT_TAG || doc.version != MACHINE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "expected format {MACHINE_FORMAT_TAG:?} version {MACHINE_FORMAT_VERSION}, found {:?} version {}",
                doc.format, doc.version
            )));
        }
        let ks: Vec<usize> = doc.energies.iter().map(|e| e.k).collect();
        if ks != (1..=doc.order).collect::<Vec<_>>() {
            return Err(Error::Format(format!(
                "energies must list k = 1..={} in order",
                doc.order
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("machine series serializes");
        s.push('\n');
        s
    }

    pub fn spec(&self) -> Result<PotentialSpec> {
        Ok(PotentialSpec::new(
            parse_rational(&self.potential.m)?,
            parse_rational(&self.potential.omega)?,
            self.potential.terms.iter().map(|t| (t.index, t.coeff.clone())),
        ))
    }

    /// `E_k`, 1-based.
    pub fn energy(&self, k: usize) -> Option<&BiPoly> {
        self.energies.get(k.checked_sub(1)?).map(|e| &e.poly)
    }
}

pub fn render_machine(series: &EnergySeries) -> String {
    MachineSeries::from_series(series).to_json()
}

/// Describes every `E_k` where `series` disagrees with `golden`, comparing
/// the orders both cover. An order shortfall is itself a mismatch.
pub fn golden_mismatches(series: &EnergySeries, golden: &MachineSeries) -> Vec<String> {
    let mut out = Vec::new();
    if series.order() < golden.order {
        out.push(format!(
            "golden file has order {} but the expansion only reached {}",
            golden.order,
            series.order()
        ));
    }
    for (k, e) in series.coefficients().take(golden.order) {
        let want = golden.energy(k).expect("k within golden order");
        if want != e {
            out.push(format!(
                "E_{k} mismatch: golden {} but computed {}",
                pretty_poly(want),
                pretty_poly(e)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{expand, ExpandOptions};
    use crate::exact::{rat, ratio};

    #[test]
    fn pretty_forms() {
        let e3 = BiPoly::from_terms([(3, 1, rat(4)), (2, 1, rat(6)), (1, 1, rat(8)), (0, 1, rat(3))])
            .scale(&ratio(5, 16));
        assert_eq!(pretty_poly(&e3), "5/16·λ·(4n³+6n²+8n+3)");
        let e1 = &BiPoly::n() + &BiPoly::constant(ratio(1, 2));
        assert_eq!(pretty_poly(&e1), "1/2·(2n+1)");
        assert_eq!(pretty_poly(&BiPoly::zero()), "0");
        assert_eq!(pretty_poly(&BiPoly::constant(rat(-1))), "-1");
        assert_eq!(pretty_poly(&BiPoly::monomial(2, 3, rat(-1))), "-λ³·n²");
        assert_eq!(pretty_poly(&BiPoly::lambda()), "λ");
        let mixed = BiPoly::from_terms([(1, 0, rat(1)), (0, 2, ratio(-3, 4)), (2, 2, ratio(3, 2))]);
        assert_eq!(pretty_poly(&mixed), "n + 3/4·λ²·(2n²-1)");
    }

    #[test]
    fn csv_zero_rows() {
        let (_, s) = expand(&PotentialSpec::harmonic(rat(1), rat(1)), 3, ExpandOptions::default()).unwrap();
        assert_eq!(
            render_csv(&s),
            "k,deg_n,deg_lambda,coeff\n1,0,0,1/2\n1,1,0,1\n2,0,0,0\n3,0,0,0\n"
        );
    }

    #[test]
    fn machine_round_trip_and_rejects() {
        let (_, s) = expand(&PotentialSpec::sextic(), 5, ExpandOptions::default()).unwrap();
        let text = render_machine(&s);
        let doc = MachineSeries::parse(&text).unwrap();
        assert_eq!(doc, MachineSeries::from_series(&s));
        assert_eq!(doc.spec().unwrap(), *s.spec());
        assert!(golden_mismatches(&s, &doc).is_empty());

        let bad = text.replace("\"version\": 1", "\"version\": 2");
        assert!(MachineSeries::parse(&bad).is_err());
        assert!(MachineSeries::parse("{").is_err());
    }
}
