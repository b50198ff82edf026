//! The Laurent-table recursion.
//!
//! For `V(x) = mω²x²/2 + Σ f_i x^{i+2}` the logarithmic derivative is
//! expanded as `C(x) = Σ_k ħ^k C_k(x)` with
//!
//! ```text
//! C_0(x) = x Σ_i C⁰_i x^i,        C_k(x) = x^{1-2k} Σ_i C^k_i x^i   (k ≥ 1)
//! ```
//!
//! Row `k` of the table is filled from rows `0..k` in ascending `i`; the
//! residue slot `C^k_{2k-2}` is fixed by node counting (`n` for `k = 1`,
//! zero otherwise) and the energy coefficient `E_k` falls out of the power
//! balance at that slot. Every division is by the nonzero scalars `2mω` or
//! `2m`, so all entries stay in ℚ[n, λ].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{rat, BiPoly, BigRational};

/// Polynomial potential `V(x) = mω²x²/2 + Σ_{i≥1} f_i x^{i+2}` with each
/// `f_i` a polynomial in `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialSpec {
    m: BigRational,
    omega: BigRational,
    f: BTreeMap<u32, BiPoly>,
}

impl PotentialSpec {
    /// Unvalidated spec; pass it through [`validate_potential`] (or
    /// [`expand`], which does so) before use. Repeated indices are summed.
    pub fn new<I>(m: BigRational, omega: BigRational, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, BiPoly)>,
    {
        let mut f: BTreeMap<u32, BiPoly> = BTreeMap::new();
        for (i, p) in terms {
            *f.entry(i).or_default() += &p;
        }
        Self { m, omega, f }
    }

    pub fn harmonic(m: BigRational, omega: BigRational) -> Self {
        Self::new(m, omega, [])
    }

    /// `V = x²/2 + λx⁶/2` with `m = ω = 1`.
    pub fn sextic() -> Self {
        Self::new(
            rat(1),
            rat(1),
            [(4, BiPoly::lambda().scale(&crate::exact::ratio(1, 2)))],
        )
    }

    pub fn m(&self) -> &BigRational {
        &self.m
    }

    pub fn omega(&self) -> &BigRational {
        &self.omega
    }

    /// Coefficient of `x^{i+2}` (zero when absent).
    pub fn f(&self, i: u32) -> BiPoly {
        self.f.get(&i).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &BiPoly)> + '_ {
        self.f.iter().map(|(i, p)| (*i, p))
    }

    /// Largest `i` with nonzero `f_i`, or 0 for the harmonic oscillator.
    pub fn max_i(&self) -> u32 {
        self.f
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| *i)
            .max()
            .unwrap_or(0)
    }

    pub fn is_harmonic(&self) -> bool {
        self.f.values().all(BiPoly::is_zero)
    }

    /// True when only even powers of `x` appear in `V`.
    pub fn is_even(&self) -> bool {
        self.f.iter().all(|(i, p)| i % 2 == 0 || p.is_zero())
    }
}

/// Checks `m > 0`, `ω > 0`, `f_i` free of `n`, `i ≥ 1`, and drops zero
/// `f_i` entries.
pub fn validate_potential(raw: PotentialSpec) -> Result<PotentialSpec> {
    if !raw.m.is_positive() {
        return Err(Error::InvalidPotential(format!(
            "mass must be positive (m = {})",
            raw.m
        )));
    }
    if !raw.omega.is_positive() {
        return Err(Error::InvalidPotential(format!(
            "frequency must be positive for a simple quadratic minimum (omega = {}); flat or inverted minimum",
            raw.omega
        )));
    }
    let mut f = BTreeMap::new();
    for (i, p) in raw.f {
        if i == 0 {
            return Err(Error::InvalidPotential(
                "anharmonic term index must be >= 1 (term i multiplies x^(i+2))".into(),
            ));
        }
        if p.degree_n() > 0 {
            return Err(Error::InvalidPotential(format!(
                "coefficient f_{i} = {p} depends on the quantum number n"
            )));
        }
        if !p.is_zero() {
            f.insert(i, p);
        }
    }
    Ok(PotentialSpec {
        m: raw.m,
        omega: raw.omega,
        f,
    })
}

/// `C⁰_0 ..= C⁰_{i_max}`: the Taylor coefficients of `C_0(x)/x` with
/// `C_0 = −√(2mV)`.
pub fn c0_row(spec: &PotentialSpec, i_max: usize) -> Result<Vec<BiPoly>> {
    let two_m = &spec.m * rat(2);
    let denom = &two_m * &spec.omega;
    let mut row = Vec::with_capacity(i_max + 1);
    row.push(BiPoly::constant(-(&spec.m * &spec.omega)));
    for i in 1..=i_max {
        let mut acc = BiPoly::zero();
        for p in 1..i {
            acc += &(&row[p] * &row[i - p]);
        }
        acc = &acc - &spec.f(i as u32).scale(&two_m);
        row.push(acc.scale_div(&denom)?);
    }
    Ok(row)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExpandOptions {
    /// For even potentials, skip odd-index slots (they vanish identically).
    pub parity_shortcut: bool,
}

/// Triangular table of Laurent coefficients `C^k_i`, `k = 0..=order`,
/// `i = 0..=i_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CTable {
    order: usize,
    i_max: usize,
    rows: Vec<Vec<BiPoly>>,
}

impl CTable {
    /// Starts a table with row 0 filled.
    pub fn new(spec: &PotentialSpec, order: usize, i_max: usize) -> Result<Self> {
        Ok(Self {
            order,
            i_max,
            rows: vec![c0_row(spec, i_max)?],
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    /// Number of rows filled so far.
    pub fn rows_built(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, k: usize, i: usize) -> &BiPoly {
        &self.rows[k][i]
    }

    pub fn row(&self, k: usize) -> &[BiPoly] {
        &self.rows[k]
    }

    /// Overwrites one entry. Only useful for mutation tests.
    pub fn set(&mut self, k: usize, i: usize, value: BiPoly) {
        self.rows[k][i] = value;
    }

    fn is_complete(&self) -> bool {
        self.rows.len() == self.order + 1
    }
}

fn residue_slot(k: usize) -> BiPoly {
    if k == 1 {
        BiPoly::n()
    } else {
        BiPoly::zero()
    }
}

/// `Σ_{j=lo}^{hi} Σ_{p=0}^{i} C^j_p C^{k-j}_{i-p}` over built rows.
fn convolution(rows: &[Vec<BiPoly>], k: usize, lo: usize, hi: usize, i: usize) -> BiPoly {
    let mut acc = BiPoly::zero();
    for j in lo..=hi {
        let (a, b) = (&rows[j], &rows[k - j]);
        for p in 0..=i {
            if a[p].is_zero() || b[i - p].is_zero() {
                continue;
            }
            acc += &(&a[p] * &b[i - p]);
        }
    }
    acc
}

/// Fills row `k ≥ 1`. Rows `0..k` must already be present.
pub fn laurent_row(
    k: usize,
    table: &mut CTable,
    spec: &PotentialSpec,
    opts: ExpandOptions,
) -> Result<()> {
    if k == 0 || table.rows.len() != k || k > table.order {
        return Err(Error::RowOutOfOrder {
            requested: k,
            built: table.rows.len(),
        });
    }
    let skip_odd = opts.parity_shortcut && spec.is_even();
    let i_max = table.i_max;
    let two_c00 = -(&spec.m * &spec.omega) * rat(2);
    let shift = 3 - 2 * k as i64;
    let mut row: Vec<BiPoly> = Vec::with_capacity(i_max + 1);
    for i in 0..=i_max {
        if i + 2 == 2 * k {
            row.push(residue_slot(k));
            continue;
        }
        if skip_odd && i % 2 == 1 {
            row.push(BiPoly::zero());
            continue;
        }
        let rows = &table.rows;
        let mut acc = rows[k - 1][i].scale(&rat(shift + i as i64));
        if k >= 2 {
            acc += &convolution(rows, k, 1, k - 1, i);
        }
        let mut same_row = BiPoly::zero();
        for p in 1..=i {
            if rows[0][p].is_zero() || row[i - p].is_zero() {
                continue;
            }
            same_row += &(&rows[0][p] * &row[i - p]);
        }
        acc += &same_row.scale(&rat(2));
        row.push((-acc).scale_div(&two_c00)?);
    }
    table.rows.push(row);
    Ok(())
}

/// `E_k` from the power balance at `x^0`. Needs rows `0..=k`.
pub fn energy_coefficient(k: usize, table: &CTable, spec: &PotentialSpec) -> Result<BiPoly> {
    if k == 0 || table.rows.len() <= k || table.i_max + 2 < 2 * k {
        return Err(Error::IncompleteTable(k));
    }
    let i = 2 * k - 2;
    let acc = &table.rows[k - 1][i] + &convolution(&table.rows, k, 0, k, i);
    (-acc).scale_div(&(&spec.m * rat(2)))
}

/// Energy coefficients `E_1..=E_K` of `E = Σ_k E_k ħ^k` (`E_0 = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergySeries {
    energies: Vec<BiPoly>,
    spec: PotentialSpec,
}

/// Exact value of a truncated series and its individual terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSum {
    pub partial_sum: BigRational,
    /// `terms[k-1] = E_k(n, λ) ħ^k`.
    pub terms: Vec<BigRational>,
}

impl EnergySeries {
    pub fn new(energies: Vec<BiPoly>, spec: PotentialSpec) -> Self {
        Self { energies, spec }
    }

    pub fn order(&self) -> usize {
        self.energies.len()
    }

    /// `E_k`, 1-based.
    pub fn coefficient(&self, k: usize) -> &BiPoly {
        &self.energies[k - 1]
    }

    /// `(k, E_k)` pairs.
    pub fn coefficients(&self) -> impl Iterator<Item = (usize, &BiPoly)> + '_ {
        self.energies.iter().enumerate().map(|(i, e)| (i + 1, e))
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    /// `Σ_{k=1}^{truncate_at} E_k(n, λ) ħ^k`, exactly.
    pub fn evaluate(
        &self,
        n_val: u64,
        lambda_val: &BigRational,
        hbar: &BigRational,
        truncate_at: usize,
    ) -> Result<PartialSum> {
        if truncate_at == 0 || truncate_at > self.order() {
            return Err(Error::TruncationOutOfRange {
                requested: truncate_at,
                available: self.order(),
            });
        }
        let n = BigRational::from_integer(BigInt::from(n_val));
        let mut hbar_pow = BigRational::one();
        let mut sum = BigRational::zero();
        let mut terms = Vec::with_capacity(truncate_at);
        for e in &self.energies[..truncate_at] {
            hbar_pow *= hbar;
            let t = e.eval(&n, lambda_val) * &hbar_pow;
            sum += &t;
            terms.push(t);
        }
        Ok(PartialSum {
            partial_sum: sum,
            terms,
        })
    }
}

/// Validates `spec` and builds the table and energy series to order `order`.
pub fn expand(
    spec: &PotentialSpec,
    order: usize,
    opts: ExpandOptions,
) -> Result<(CTable, EnergySeries)> {
    if order == 0 {
        return Err(Error::TruncationOutOfRange {
            requested: 0,
            available: 0,
        });
    }
    let spec = validate_potential(spec.clone())?;
    let i_max = 2 * order - 2;
    let mut table = CTable::new(&spec, order, i_max)?;
    let mut energies = Vec::with_capacity(order);
    for k in 1..=order {
        laurent_row(k, &mut table, &spec, opts)?;
        energies.push(energy_coefficient(k, &table, &spec)?);
    }
    Ok((table, EnergySeries::new(energies, spec)))
}

/// First `(k, i)` where the power-balance identity
/// `(3−2k+i)C^{k−1}_i + Σ_j Σ_p C^j_p C^{k−j}_{i−p} = −2m E_k δ_{i,2k−2}`
/// fails, or where row 0 fails `Σ_p C⁰_p C⁰_{i−p} = 2m·[x^{i+2}]V`.
pub fn power_identity_violation(
    table: &CTable,
    series: &EnergySeries,
    spec: &PotentialSpec,
) -> Option<(usize, usize)> {
    if !table.is_complete() || series.order() != table.order {
        return Some((table.rows.len(), 0));
    }
    let two_m = &spec.m * rat(2);
    for i in 0..=table.i_max {
        let lhs = convolution(&table.rows, 0, 0, 0, i);
        let rhs = if i == 0 {
            BiPoly::constant(&two_m * &spec.m * &spec.omega * &spec.omega / rat(2))
        } else {
            spec.f(i as u32).scale(&two_m)
        };
        if lhs != rhs {
            return Some((0, i));
        }
    }
    for k in 1..=table.order {
        for i in 0..=table.i_max {
            let shift = 3 - 2 * k as i64 + i as i64;
            let lhs = &table.rows[k - 1][i].scale(&rat(shift))
                + &convolution(&table.rows, k, 0, k, i);
            let rhs = if i + 2 == 2 * k {
                series.coefficient(k).scale(&-two_m.clone())
            } else {
                BiPoly::zero()
            };
            if lhs != rhs {
                return Some((k, i));
            }
        }
    }
    None
}

/// True iff the power-balance identity holds at every `(k, i)` of the table.
pub fn verify_power_identity(table: &CTable, series: &EnergySeries, spec: &PotentialSpec) -> bool {
    power_identity_violation(table, series, spec).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::harmonic(rat(1), rat(1))
    }

    fn cubic() -> PotentialSpec {
        PotentialSpec::new(rat(1), rat(1), [(1, BiPoly::one())])
    }

    fn lam(c: BigRational) -> BiPoly {
        BiPoly::monomial(0, 1, c)
    }

    #[test]
    fn validation_accepts_and_rejects() {
        assert!(validate_potential(harmonic()).is_ok());
        assert!(validate_potential(PotentialSpec::sextic()).is_ok());
        let flat = PotentialSpec::new(rat(1), rat(0), [(1, BiPoly::one())]);
        let err = validate_potential(flat).unwrap_err();
        assert!(err.to_string().contains("flat"), "{err}");
        assert!(validate_potential(PotentialSpec::harmonic(rat(0), rat(1))).is_err());
        assert!(validate_potential(PotentialSpec::harmonic(rat(-1), rat(1))).is_err());
        assert!(validate_potential(PotentialSpec::new(rat(1), rat(1), [(2, BiPoly::n())])).is_err());
        assert!(validate_potential(PotentialSpec::new(rat(1), rat(1), [(0, BiPoly::one())])).is_err());
    }

    #[test]
    fn validation_drops_zero_terms() {
        let raw = PotentialSpec::new(rat(1), rat(1), [(3, BiPoly::zero())]);
        assert_eq!(validate_potential(raw).unwrap(), harmonic());
    }

    #[test]
    fn c0_examples() {
        let row = c0_row(&harmonic(), 4).unwrap();
        assert_eq!(row[0], BiPoly::constant(rat(-1)));
        assert!(row[1..].iter().all(BiPoly::is_zero));

        // -x sqrt(1 + λx⁴) = -x (1 + λx⁴/2 - λ²x⁸/8 + ...)
        let row = c0_row(&PotentialSpec::sextic(), 8).unwrap();
        for (i, c) in row.iter().enumerate() {
            match i {
                0 => assert_eq!(*c, BiPoly::constant(rat(-1))),
                4 => assert_eq!(*c, lam(ratio(-1, 2))),
                8 => assert_eq!(*c, BiPoly::monomial(0, 2, ratio(1, 8))),
                _ => assert!(c.is_zero(), "C0_{i} = {c}"),
            }
        }

        // -x sqrt(1 + 2x) = -x (1 + x - x²/2 + ...)
        let row = c0_row(&cubic(), 2).unwrap();
        assert_eq!(row[1], BiPoly::constant(rat(-1)));
        assert_eq!(row[2], BiPoly::constant(ratio(1, 2)));
    }

    #[test]
    fn laurent_row_examples() {
        let spec = harmonic();
        let mut t = CTable::new(&spec, 2, 2).unwrap();
        laurent_row(1, &mut t, &spec, ExpandOptions::default()).unwrap();
        assert_eq!(*t.get(1, 0), BiPoly::n());
        assert!(t.row(1)[1..].iter().all(BiPoly::is_zero));
        laurent_row(2, &mut t, &spec, ExpandOptions::default()).unwrap();
        let d2 = BiPoly::from_terms([(2, 0, ratio(1, 2)), (1, 0, ratio(-1, 2))]);
        assert_eq!(*t.get(2, 0), d2);

        let spec = PotentialSpec::sextic();
        let mut t = CTable::new(&spec, 1, 4).unwrap();
        laurent_row(1, &mut t, &spec, ExpandOptions::default()).unwrap();
        let c14 = BiPoly::from_terms([(1, 1, ratio(-1, 2)), (0, 1, ratio(-5, 4))]);
        assert_eq!(*t.get(1, 4), c14);
    }

    #[test]
    fn laurent_row_out_of_order() {
        let spec = harmonic();
        let mut t = CTable::new(&spec, 3, 4).unwrap();
        let err = laurent_row(2, &mut t, &spec, ExpandOptions::default()).unwrap_err();
        assert_eq!(err, Error::RowOutOfOrder { requested: 2, built: 1 });
        assert!(laurent_row(0, &mut t, &spec, ExpandOptions::default()).is_err());
        assert_eq!(energy_coefficient(1, &t, &spec), Err(Error::IncompleteTable(1)));
    }

    #[test]
    fn energy_examples() {
        let e1 = &BiPoly::n() + &BiPoly::constant(ratio(1, 2));
        let (_, s) = expand(&cubic(), 1, ExpandOptions::default()).unwrap();
        assert_eq!(*s.coefficient(1), e1);

        let spec = PotentialSpec::new(rat(2), rat(3), [(4, lam(rat(7)))]);
        let (_, s) = expand(&spec, 1, ExpandOptions::default()).unwrap();
        assert_eq!(*s.coefficient(1), e1.scale(&rat(3)));

        let (_, s) = expand(&PotentialSpec::sextic(), 3, ExpandOptions::default()).unwrap();
        let e3 = BiPoly::from_terms([(3, 1, rat(4)), (2, 1, rat(6)), (1, 1, rat(8)), (0, 1, rat(3))])
            .scale(&ratio(5, 16));
        assert_eq!(*s.coefficient(3), e3);
        assert!(s.coefficient(2).is_zero());
    }

    #[test]
    fn harmonic_expansion_is_exact() {
        let (t, s) = expand(&harmonic(), 10, ExpandOptions::default()).unwrap();
        assert_eq!(*s.coefficient(1), &BiPoly::n() + &BiPoly::constant(ratio(1, 2)));
        assert!((2..=10).all(|k| s.coefficient(k).is_zero()));
        assert!(verify_power_identity(&t, &s, s.spec()));
    }

    #[test]
    fn identity_detects_mutation() {
        let spec = PotentialSpec::sextic();
        let (mut t, s) = expand(&spec, 5, ExpandOptions::default()).unwrap();
        assert!(verify_power_identity(&t, &s, &spec));
        let bumped = t.get(3, 5) + &BiPoly::one();
        t.set(3, 5, bumped);
        assert_eq!(power_identity_violation(&t, &s, &spec), Some((3, 5)));
    }

    #[test]
    fn evaluate_examples() {
        let (_, s) = expand(&harmonic(), 4, ExpandOptions::default()).unwrap();
        for trunc in 1..=4 {
            let r = s.evaluate(2, &rat(7), &rat(1), trunc).unwrap();
            assert_eq!(r.partial_sum, ratio(5, 2));
        }
        assert!(s.evaluate(0, &rat(0), &rat(1), 0).is_err());
        assert!(s.evaluate(0, &rat(0), &rat(1), 5).is_err());

        let (_, s) = expand(&PotentialSpec::sextic(), 11, ExpandOptions::default()).unwrap();
        let r = s.evaluate(0, &rat(0), &rat(1), 11).unwrap();
        assert_eq!(r.partial_sum, ratio(1, 2));
    }

    #[test]
    fn hbar_powers_weight_terms() {
        let (_, s) = expand(&PotentialSpec::sextic(), 3, ExpandOptions::default()).unwrap();
        let r = s.evaluate(0, &rat(1), &ratio(1, 2), 3).unwrap();
        assert_eq!(r.terms, vec![ratio(1, 4), rat(0), ratio(15, 128)]);
    }

    #[test]
    fn parity_shortcut_matches_generic() {
        let spec = PotentialSpec::new(
            ratio(3, 2),
            ratio(1, 3),
            [(2, lam(rat(1))), (4, BiPoly::constant(ratio(-2, 5)))],
        );
        let generic = expand(&spec, 7, ExpandOptions::default()).unwrap();
        let short = expand(&spec, 7, ExpandOptions { parity_shortcut: true }).unwrap();
        assert_eq!(generic, short);
    }
}
