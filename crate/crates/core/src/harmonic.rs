//! Harmonic limit (`ħ = m = ω = 1`, no anharmonic terms).
//!
//! Here `C_0 = −x` and every higher `C_k` is the single term `d_k x^{1−2k}`.
//! The `d_k` are the large-`x` Laurent coefficients of `P'/P`, where `P` is
//! the node polynomial multiplying the Gaussian; solving for `P` from the
//! `d_k` reproduces the Hermite polynomials.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::engine::{expand, CTable, ExpandOptions, PotentialSpec};
use crate::error::{Error, Result};
use crate::exact::{rat, BiPoly, BigRational};

/// `d_1 ..= d_K` as polynomials in `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSequence {
    d: Vec<BiPoly>,
}

impl DSequence {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// `d_k`, 1-based.
    pub fn get(&self, k: usize) -> &BiPoly {
        &self.d[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BiPoly> + '_ {
        self.d.iter()
    }
}

/// `d_1 = n`, `2d_k = (3−2k)d_{k−1} + Σ_{j=1}^{k−1} d_j d_{k−j}`.
pub fn d_sequence(order: usize) -> DSequence {
    let mut d: Vec<BiPoly> = Vec::with_capacity(order);
    if order == 0 {
        return DSequence { d };
    }
    d.push(BiPoly::n());
    let half = crate::exact::ratio(1, 2);
    for k in 2..=order {
        let mut acc = d[k - 2].scale(&rat(3 - 2 * k as i64));
        for j in 1..k {
            acc += &(&d[j - 1] * &d[k - j - 1]);
        }
        d.push(acc.scale(&half));
    }
    DSequence { d }
}

/// `P_n(x) = x^σ Σ_{i=0}^{m0} a_i x^{2i}` with `n = 2·m0 + σ`, normalized
/// to `a_{m0} = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePolynomial {
    pub sigma: u32,
    pub m0: usize,
    pub a: Vec<BigRational>,
}

impl NodePolynomial {
    pub fn degree(&self) -> u32 {
        2 * self.m0 as u32 + self.sigma
    }

    /// Dense coefficients of `x^0 ..= x^n`.
    pub fn dense(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.degree() as usize + 1];
        for (i, a) in self.a.iter().enumerate() {
            out[2 * i + self.sigma as usize] = a.clone();
        }
        out
    }
}

/// Solves `(n − 2m − σ)a_m + d_2 a_{m+1} + … + d_{m0−m+1} a_{m0} = 0` by
/// back-substitution from `m = m0 − 1`, then checks the remaining
/// (negative-power) equations that the available `d_k` cover.
pub fn reconstruct_polynomial(n: u32, ds: &DSequence) -> Result<NodePolynomial> {
    let sigma = n % 2;
    let m0 = (n / 2) as usize;
    if ds.len() < m0 + 1 {
        return Err(Error::ShortDSequence {
            n,
            have: ds.len(),
            need: m0 + 1,
        });
    }
    let n_val = BigRational::from_integer(BigInt::from(n));
    let zero = BigRational::zero();
    let dv: Vec<BigRational> = ds.iter().map(|d| d.eval(&n_val, &zero)).collect();
    // dk(k) = d_k at this n
    let dk = |k: usize| &dv[k - 1];

    let mut a = vec![BigRational::zero(); m0 + 1];
    a[m0] = rat(1);
    for m in (0..m0).rev() {
        let mut rhs = BigRational::zero();
        for k in 2..=(m0 - m + 1) {
            rhs -= dk(k) * &a[m + k - 1];
        }
        let lead = rat(n as i64 - 2 * m as i64 - sigma as i64);
        a[m] = rhs / lead;
    }

    // Coefficient of x^{2m+σ−1} for m < 0: Σ_k d_k a_{m+k−1} = 0.
    let mut m: i64 = -1;
    while (m0 as i64 - m + 1) as usize <= ds.len() {
        let mut acc = BigRational::zero();
        for k in (1 - m) as usize..=(m0 as i64 - m + 1) as usize {
            acc += dk(k) * &a[(m + k as i64 - 1) as usize];
        }
        if !acc.is_zero() {
            return Err(Error::InconsistentSystem { n, m });
        }
        m -= 1;
    }

    Ok(NodePolynomial { sigma, m0, a })
}

/// First `m` where `a_m = −a_{m+1}(2m+σ+2)(2m+σ+1)/(4(m0−m))` fails.
/// Returns `Some(0)` for a malformed polynomial (wrong shape for `n`, or a
/// zero leading coefficient).
pub fn hermite_ratio_mismatch(n: u32, p: &NodePolynomial) -> Option<usize> {
    if p.degree() != n || p.a.len() != p.m0 + 1 || p.a[p.m0].is_zero() {
        return Some(0);
    }
    let sigma = p.sigma as i64;
    (0..p.m0).find(|&m| {
        let mi = m as i64;
        let factor = rat((2 * mi + sigma + 2) * (2 * mi + sigma + 1))
            / rat(4 * (p.m0 as i64 - mi));
        p.a[m] != -(&p.a[m + 1] * factor)
    })
}

pub fn hermite_ratio_check(n: u32, p: &NodePolynomial) -> bool {
    hermite_ratio_mismatch(n, p).is_none()
}

/// True iff `table` is the harmonic table `C⁰ = (−1, 0, …)`,
/// `C^k_0 = d_k` and `C^k_i = 0` for `i ≥ 1`.
pub fn crosscheck_table(table: &CTable, ds: &DSequence) -> bool {
    if table.rows_built() != table.order() + 1 || ds.len() < table.order() {
        return false;
    }
    let row0_ok = table
        .row(0)
        .iter()
        .enumerate()
        .all(|(i, c)| if i == 0 { *c == BiPoly::constant(rat(-1)) } else { c.is_zero() });
    row0_ok
        && (1..=table.order()).all(|k| {
            table
                .row(k)
                .iter()
                .enumerate()
                .all(|(i, c)| if i == 0 { c == ds.get(k) } else { c.is_zero() })
        })
}

/// Builds the harmonic table through the general engine and compares it with
/// [`d_sequence`].
pub fn crosscheck_with_engine(order: usize) -> Result<bool> {
    let spec = PotentialSpec::harmonic(rat(1), rat(1));
    let (table, _) = expand(&spec, order, ExpandOptions::default())?;
    Ok(crosscheck_table(&table, &d_sequence(order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn n_poly(coeffs: &[(i64, i64)]) -> BiPoly {
        BiPoly::in_n(&coeffs.iter().map(|&(p, q)| ratio(p, q)).collect::<Vec<_>>())
    }

    #[test]
    fn d_sequence_examples() {
        assert_eq!(d_sequence(1).d, vec![BiPoly::n()]);
        let ds = d_sequence(3);
        assert_eq!(*ds.get(2), n_poly(&[(0, 1), (-1, 2), (1, 2)]));
        assert_eq!(*ds.get(3), n_poly(&[(0, 1), (3, 4), (-5, 4), (1, 2)]));
        assert_eq!(ds.get(3).eval(&rat(2), &rat(0)), ratio(1, 2));
    }

    #[test]
    fn gaussian_states_have_no_higher_residues() {
        let ds = d_sequence(15);
        for k in 2..=15 {
            assert!(ds.get(k).eval(&rat(0), &rat(0)).is_zero());
            assert!(ds.get(k).eval(&rat(1), &rat(0)).is_zero());
        }
    }

    #[test]
    fn reconstruct_examples() {
        let ds = d_sequence(6);
        let p = reconstruct_polynomial(2, &ds).unwrap();
        assert_eq!((p.sigma, p.m0), (0, 1));
        assert_eq!(p.a, vec![ratio(-1, 2), rat(1)]);
        let p = reconstruct_polynomial(3, &ds).unwrap();
        assert_eq!((p.sigma, p.m0), (1, 1));
        assert_eq!(p.a, vec![ratio(-3, 2), rat(1)]);
        let p = reconstruct_polynomial(0, &ds).unwrap();
        assert_eq!((p.sigma, p.m0, p.a.clone()), (0, 0, vec![rat(1)]));
    }

    #[test]
    fn reconstruct_needs_enough_terms() {
        let err = reconstruct_polynomial(6, &d_sequence(3)).unwrap_err();
        assert_eq!(err, Error::ShortDSequence { n: 6, have: 3, need: 4 });
    }

    #[test]
    fn reconstruct_rejects_wrong_residues() {
        // d_1 = n but d_2 corrupted: the negative-power equations fail.
        let mut ds = d_sequence(6);
        ds.d[1] = &ds.d[1] + &BiPoly::one();
        assert!(matches!(
            reconstruct_polynomial(2, &ds),
            Err(Error::InconsistentSystem { n: 2, .. })
        ));
    }

    #[test]
    fn hermite_check_examples() {
        let ds = d_sequence(8);
        let p2 = reconstruct_polynomial(2, &ds).unwrap();
        assert!(hermite_ratio_check(2, &p2));
        assert!(hermite_ratio_check(5, &reconstruct_polynomial(5, &ds).unwrap()));
        let mut bad = p2.clone();
        bad.a[0] += rat(1);
        assert!(!hermite_ratio_check(2, &bad));
        assert_eq!(hermite_ratio_mismatch(2, &bad), Some(0));
        assert!(!hermite_ratio_check(3, &p2));
    }

    #[test]
    fn crosscheck_examples() {
        assert!(crosscheck_with_engine(2).unwrap());
        assert!(crosscheck_with_engine(10).unwrap());
        let (sextic, _) = expand(&PotentialSpec::sextic(), 4, ExpandOptions::default()).unwrap();
        assert!(!crosscheck_table(&sextic, &d_sequence(4)));
    }
}
