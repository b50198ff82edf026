//! Exact coefficient ring: rationals and sparse polynomials in the two
//! formal symbols `n` (quantum number) and `λ` (coupling).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use num_rational::BigRational;

use crate::error::{Error, Result};

/// Integer as an exact rational.
pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `num / den` in canonical form. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or an integer string. Decimal points and exponents are
/// rejected; use [`parse_decimal`] where those are allowed.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let err = |reason| Error::ParseRational {
        input: s.to_string(),
        reason,
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if t.contains(['.', 'e', 'E']) {
        return Err(err("floating-point literals are not allowed"));
    }
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// Parses a rational or an exact decimal such as `"0.001"` or `"1e-3"`.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if t.contains('/') || !t.contains(['.', 'e', 'E']) {
        return parse_rational(t);
    }
    let err = |reason| Error::ParseRational {
        input: s.to_string(),
        reason,
    };
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("bad digit"));
    }
    let all: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| err("bad digit"))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(all * ten.pow(scale as u32))
    } else {
        BigRational::new(all, ten.pow((-scale) as u32))
    };
    Ok(if sign < 0 { -value } else { value })
}

/// Exponent pair `(deg_n, deg_λ)`.
pub type Exponents = (u32, u32);

/// Sparse polynomial in `n` and `λ` over ℚ. Zero coefficients are never
/// stored, so derived equality is mathematical equality.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    terms: BTreeMap<Exponents, BigRational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    /// The symbol `n`.
    pub fn n() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    /// The symbol `λ`.
    pub fn lambda() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    pub fn monomial(deg_n: u32, deg_lambda: u32, coeff: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term((deg_n, deg_lambda), coeff);
        p
    }

    /// Builds a polynomial from `(deg_n, deg_λ, coeff)` triples; repeated
    /// exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, BigRational)>,
    {
        let mut p = Self::zero();
        for (dn, dl, c) in terms {
            p.add_term((dn, dl), c);
        }
        p
    }

    /// `Σ coeffs[i] n^i`, lowest degree first.
    pub fn in_n(coeffs: &[BigRational]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i as u32, 0, c.clone())),
        )
    }

    fn add_term(&mut self, exps: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending `(deg_n, deg_λ)` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (Exponents, &BigRational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, deg_n: u32, deg_lambda: u32) -> BigRational {
        self.terms
            .get(&(deg_n, deg_lambda))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Highest power of `n`; zero for the zero polynomial.
    pub fn degree_n(&self) -> u32 {
        self.terms.keys().map(|e| e.0).max().unwrap_or(0)
    }

    /// Highest power of `λ`; zero for the zero polynomial.
    pub fn degree_lambda(&self) -> u32 {
        self.terms.keys().map(|e| e.1).max().unwrap_or(0)
    }

    pub fn min_degree_lambda(&self) -> u32 {
        self.terms.keys().map(|e| e.1).min().unwrap_or(0)
    }

    /// Some(c) if the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    /// Divides every coefficient by the scalar `s`.
    pub fn scale_div(&self, s: &BigRational) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c / s)).collect(),
        })
    }

    /// Exact substitution `n = n_val`, `λ = lambda_val`.
    pub fn eval(&self, n_val: &BigRational, lambda_val: &BigRational) -> BigRational {
        let mut n_pows = PowCache::new(n_val);
        let mut l_pows = PowCache::new(lambda_val);
        let mut acc = BigRational::zero();
        for ((dn, dl), c) in &self.terms {
            acc += c * n_pows.get(*dn) * l_pows.get(*dl);
        }
        acc
    }

    /// Substitutes `λ = lambda_val`, leaving a polynomial in `n` only.
    pub fn eval_lambda(&self, lambda_val: &BigRational) -> Self {
        let mut l_pows = PowCache::new(lambda_val);
        Self::from_terms(
            self.terms
                .iter()
                .map(|((dn, dl), c)| (*dn, 0, c * l_pows.get(*dl)))
                .collect::<Vec<_>>(),
        )
    }

    /// Substitutes `λ → c·λ`.
    pub fn rescale_lambda(&self, c: &BigRational) -> Self {
        let mut pows = PowCache::new(c);
        Self::from_terms(
            self.terms
                .iter()
                .map(|((dn, dl), v)| (*dn, *dl, v * pows.get(*dl)))
                .collect::<Vec<_>>(),
        )
    }
}

struct PowCache<'a> {
    base: &'a BigRational,
    pows: Vec<BigRational>,
}

impl<'a> PowCache<'a> {
    fn new(base: &'a BigRational) -> Self {
        Self {
            base,
            pows: vec![BigRational::one()],
        }
    }

    fn get(&mut self, e: u32) -> &BigRational {
        while self.pows.len() <= e as usize {
            let next = self.pows.last().unwrap() * self.base;
            self.pows.push(next);
        }
        &self.pows[e as usize]
    }
}

impl Add<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for BiPoly {
    type Output = BiPoly;
    fn add(mut self, rhs: BiPoly) -> BiPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&BiPoly> for BiPoly {
    fn add_assign(&mut self, rhs: &BiPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}

impl Sub<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Sub for BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: BiPoly) -> BiPoly {
        &self - &rhs
    }
}

impl Mul<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for ((an, al), ac) in &self.terms {
            for ((bn, bl), bc) in &rhs.terms {
                out.add_term((an + bn, al + bl), ac * bc);
            }
        }
        out
    }
}

impl Mul for BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: BiPoly) -> BiPoly {
        &self * &rhs
    }
}

impl From<BigRational> for BiPoly {
    fn from(c: BigRational) -> Self {
        Self::constant(c)
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, sym: &str, e: u32) -> fmt::Result {
    match e {
        0 => Ok(()),
        1 => write!(f, "*{sym}"),
        _ => write!(f, "*{sym}^{e}"),
    }
}

/// Terms ordered by ascending `λ` degree, then descending `n` degree,
/// each written as `c*n^a*λ^b`.
impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by(|((an, al), _), ((bn, bl), _)| al.cmp(bl).then(bn.cmp(an)));
        for (idx, ((dn, dl), c)) in ordered.into_iter().enumerate() {
            if idx == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            write!(f, "{}", c.abs())?;
            write_power(f, "n", *dn)?;
            write_power(f, "λ", *dl)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly({self})")
    }
}

/// One machine-format record: `(deg_n, deg_λ, "p/q")`.
pub type TermRecord = (u32, u32, String);

impl BiPoly {
    /// Exponent-sorted `(deg_n, deg_λ, "p/q")` records.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|((dn, dl), c)| (*dn, *dl, c.to_string()))
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Self::zero();
        for (dn, dl, c) in records {
            if !seen.insert((*dn, *dl)) {
                return Err(Error::Format(format!("duplicate exponent pair ({dn}, {dl})")));
            }
            out.add_term((*dn, *dl), parse_rational(c)?);
        }
        Ok(out)
    }
}

impl Serialize for BiPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BiPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        BiPoly::from_records(&records).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> BiPoly {
        BiPoly::n()
    }

    fn c(num: i64, den: i64) -> BiPoly {
        BiPoly::constant(ratio(num, den))
    }

    #[test]
    fn add_examples() {
        assert!((&n() + &(-n())).is_zero());
        assert_eq!(&(&n() + &c(1, 2)) + &c(1, 2), &n() + &c(1, 1));
        let ln2 = BiPoly::monomial(2, 1, rat(1));
        let three_ln2 = BiPoly::monomial(2, 1, rat(3));
        assert_eq!(&ln2 + &three_ln2, BiPoly::monomial(2, 1, rat(4)));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&n() * &n(), BiPoly::monomial(2, 0, rat(1)));
        assert!((&(&n() + &c(1, 2)) * &BiPoly::zero()).is_zero());
        let lhs = &(&n().scale(&rat(2)) + &c(5, 1)) * &BiPoly::monomial(0, 1, ratio(1, 4));
        let rhs = BiPoly::from_terms([(1, 1, ratio(1, 2)), (0, 1, ratio(5, 4))]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn scale_div_examples() {
        let p = &n().scale(&rat(2)) + &c(1, 1);
        assert_eq!(p.scale_div(&rat(2)).unwrap(), &n() + &c(1, 2));
        assert!(BiPoly::zero().scale_div(&rat(-2)).unwrap().is_zero());
        // -λ(2n+5)/2 divided by -2
        let q = BiPoly::from_terms([(1, 1, rat(-1)), (0, 1, ratio(-5, 2))]);
        let expected = BiPoly::from_terms([(1, 1, ratio(1, 2)), (0, 1, ratio(5, 4))]);
        assert_eq!(q.scale_div(&rat(-2)).unwrap(), expected);
        assert_eq!(p.scale_div(&rat(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn eval_examples() {
        assert_eq!((&n() + &c(1, 2)).eval(&rat(0), &rat(0)), ratio(1, 2));
        let e3 = BiPoly::from_terms([
            (3, 1, rat(4)),
            (2, 1, rat(6)),
            (1, 1, rat(8)),
            (0, 1, rat(3)),
        ])
        .scale(&ratio(5, 16));
        assert_eq!(e3.eval(&rat(0), &rat(1)), ratio(15, 16));
        assert_eq!((&n() * &n()).eval(&rat(3), &rat(7)), rat(9));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.001").unwrap(), ratio(1, 1000));
        assert_eq!(parse_decimal("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_decimal("-2.5E2").unwrap(), rat(-250));
        assert_eq!(parse_decimal(".25").unwrap(), ratio(1, 4));
        assert_eq!(parse_decimal("3/7").unwrap(), ratio(3, 7));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal(".").is_err());
    }

    #[test]
    fn rendering_is_sorted() {
        assert_eq!(BiPoly::zero().to_string(), "0");
        assert_eq!(ratio(3, 1).to_string(), "3");
        assert_eq!(ratio(-3, 6).to_string(), "-1/2");
        let p = BiPoly::from_terms([
            (0, 1, ratio(5, 4)),
            (1, 0, rat(1)),
            (0, 0, ratio(1, 2)),
            (2, 1, rat(-3)),
        ]);
        assert_eq!(p.to_string(), "1*n + 1/2 - 3*n^2*λ + 5/4*λ");
    }

    #[test]
    fn records_reject_duplicates() {
        let recs = vec![(1, 0, "1".to_string()), (1, 0, "2".to_string())];
        assert!(BiPoly::from_records(&recs).is_err());
        let recs = vec![(1, 0, "0".to_string()), (0, 2, "-1/3".to_string())];
        assert_eq!(
            BiPoly::from_records(&recs).unwrap(),
            BiPoly::monomial(0, 2, ratio(-1, 3))
        );
    }

    #[test]
    fn canonical_after_cancellation() {
        let p = BiPoly::from_terms([(1, 1, rat(2)), (1, 1, rat(-2))]);
        assert!(p.is_zero());
        assert_eq!(p, BiPoly::zero());
    }
}
