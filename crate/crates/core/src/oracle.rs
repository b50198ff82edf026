//! Independent floating-point check: diagonalize `H = p²/2m + V(x)` (ħ = 1)
//! in a truncated harmonic-oscillator basis and compare the low-lying
//! eigenvalues with optimally truncated partial sums of the exact series.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::engine::{EnergySeries, PotentialSpec};
use crate::error::{Error, Result};
use crate::exact::{rat, BigRational};

/// Off-diagonal Frobenius norm relative to the full norm at which Jacobi
/// iteration stops.
pub const JACOBI_REL_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self.get(i, j).powi(2);
                }
            }
        }
        acc.sqrt()
    }

    /// Plain product; the result is symmetric whenever the factors commute,
    /// which holds for powers of one matrix.
    fn matmul(&self, rhs: &SymMatrix) -> SymMatrix {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        // symmetrize away rounding asymmetry
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        SymMatrix { dim: n, data: out }
    }

    fn add_scaled(&mut self, other: &SymMatrix, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }
}

/// `⟨i|x|i+1⟩ = √((i+1)/(2mω))` in the oscillator basis, ħ = 1.
pub fn position_matrix(dim: usize, m: f64, omega: f64) -> SymMatrix {
    let mut x = SymMatrix::zeros(dim);
    for i in 0..dim.saturating_sub(1) {
        x.set(i, i + 1, ((i + 1) as f64 / (2.0 * m * omega)).sqrt());
    }
    x
}

/// `⟨level|x^power|level⟩` from powers of the truncated position matrix.
pub fn x_power_expectation(dim: usize, m: f64, omega: f64, power: u32, level: usize) -> f64 {
    let x = position_matrix(dim, m, omega);
    let mut acc = SymMatrix::from_diagonal(&vec![1.0; dim]);
    for _ in 0..power {
        acc = acc.matmul(&x);
    }
    acc.get(level, level)
}

/// A concrete Hamiltonian at a numeric coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleProblem {
    pub m: f64,
    pub omega: f64,
    /// Exact coupling, used for the series side.
    pub lambda: BigRational,
    /// `(power of x, coefficient)` of the anharmonic terms at this `λ`.
    pub terms: Vec<(u32, f64)>,
    pub basis_size: usize,
    pub levels: Vec<usize>,
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl OracleProblem {
    pub fn from_spec(
        spec: &PotentialSpec,
        lambda: BigRational,
        basis_size: usize,
        levels: Vec<usize>,
    ) -> Self {
        let zero = BigRational::zero();
        let terms = spec
            .terms()
            .map(|(i, f)| (i + 2, to_f64(&f.eval(&zero, &lambda))))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        Self {
            m: to_f64(spec.m()),
            omega: to_f64(spec.omega()),
            lambda,
            terms,
            basis_size,
            levels,
        }
    }

    pub fn with_basis_size(&self, basis_size: usize) -> Self {
        Self {
            basis_size,
            ..self.clone()
        }
    }

    fn degree(&self) -> usize {
        self.terms.iter().map(|(p, _)| *p as usize).max().unwrap_or(2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.omega > 0.0) {
            return Err(Error::InvalidProblem("m and omega must be positive".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidProblem("no levels requested".into()));
        }
        let top = self.levels.iter().copied().max().unwrap_or(0);
        let need = 2 * top + self.degree();
        if self.basis_size < 2 || self.basis_size <= need {
            return Err(Error::InvalidProblem(format!(
                "basis size {} must exceed 2*max(level) + degree = {need}",
                self.basis_size
            )));
        }
        Ok(())
    }
}

/// `diag(ω(i+½)) + Σ c·X^p` with `X` the truncated position matrix.
pub fn build_hamiltonian(p: &OracleProblem) -> SymMatrix {
    let dim = p.basis_size;
    let diag: Vec<f64> = (0..dim).map(|i| p.omega * (i as f64 + 0.5)).collect();
    let mut h = SymMatrix::from_diagonal(&diag);
    let max_power = p.terms.iter().map(|(k, _)| *k).max().unwrap_or(0);
    if max_power == 0 {
        return h;
    }
    let x = position_matrix(dim, p.m, p.omega);
    let mut pow = x.clone();
    for power in 1..=max_power {
        if power > 1 {
            pow = pow.matmul(&x);
        }
        for (_, c) in p.terms.iter().filter(|(k, _)| *k == power) {
            h.add_scaled(&pow, *c);
        }
    }
    h
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(h: &SymMatrix) -> Result<Vec<f64>> {
    let n = h.dim;
    let mut a = h.clone();
    let norm = a.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::InvalidProblem("matrix has non-finite entries".into()));
    }
    let mut sweeps = 0;
    while a.off_diagonal_norm() > JACOBI_REL_TOL * norm {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a.data[k * n + p], a.data[k * n + q]);
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a.data[p * n + k], a.data[q * n + k]);
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                a.set(p, q, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// The `count` smallest eigenvalues, ascending.
pub fn lowest_eigenvalues(h: &SymMatrix, count: usize) -> Result<Vec<f64>> {
    if count > h.dim {
        return Err(Error::InvalidProblem(format!(
            "asked for {count} eigenvalues of a {0}x{0} matrix",
            h.dim
        )));
    }
    let mut eig = jacobi_eigenvalues(h)?;
    eig.truncate(count);
    Ok(eig)
}

/// Comparison thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparePolicy {
    /// Allowed discrepancy in units of the first omitted term.
    pub bound_factor: f64,
    /// Absolute floor for the allowed discrepancy.
    pub floor: f64,
    /// Second basis size for the convergence gate; `None` means `2N`.
    pub basis_check: Option<usize>,
    /// Largest eigenvalue shift tolerated between the two basis sizes.
    pub convergence_tol: f64,
}

impl Default for ComparePolicy {
    fn default() -> Self {
        Self {
            bound_factor: 10.0,
            floor: 1e-10,
            basis_check: None,
            convergence_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub eigenvalue: f64,
    pub series_partial_sum: f64,
    /// Index of the smallest nonzero term; the sum stops just before it.
    /// `order + 1` when every remaining term vanishes.
    pub truncation_order: usize,
    pub first_omitted_term: f64,
    pub discrepancy: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(serialize_with = "as_string")]
    pub lambda: BigRational,
    pub basis_size: usize,
    pub basis_check: usize,
    /// Largest eigenvalue shift between the two basis sizes.
    pub basis_shift: f64,
    pub levels: Vec<LevelReport>,
}

fn as_string<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,eigenvalue,partial_sum,k_star,first_omitted,discrepancy,bound,pass\n",
        );
        for l in &self.levels {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{}\n",
                l.level,
                l.eigenvalue,
                l.series_partial_sum,
                l.truncation_order,
                l.first_omitted_term,
                l.discrepancy,
                l.bound,
                l.passed
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Optimal truncation of the terms `E_k ħ^k` (exact) for one level.
/// Returns `(partial_sum, k*, first_omitted)`.
pub fn optimal_truncation(terms: &[BigRational]) -> (BigRational, usize, BigRational) {
    let best = terms
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, t)| !t.is_zero())
        .min_by(|(_, a), (_, b)| a.abs_cmp(b));
    match best {
        Some((idx, t)) => (terms[..idx].iter().sum(), idx + 1, t.clone()),
        None => (terms.iter().sum(), terms.len() + 1, BigRational::zero()),
    }
}

trait AbsCmp {
    fn abs_cmp(&self, other: &Self) -> std::cmp::Ordering;
}

impl AbsCmp for BigRational {
    fn abs_cmp(&self, other: &Self) -> std::cmp::Ordering {
        num_traits::Signed::abs(self).cmp(&num_traits::Signed::abs(other))
    }
}

/// Compares the series against diagonalization for every requested level.
/// Fails early with [`Error::AsymptoticBreakdown`] when the first two
/// nonzero terms do not decrease, and with [`Error::BasisNotConverged`]
/// when the two basis sizes disagree.
pub fn compare_series(
    series: &EnergySeries,
    p: &OracleProblem,
    policy: &ComparePolicy,
) -> Result<OracleReport> {
    p.validate()?;
    if series.order() < 3 {
        return Err(Error::InvalidProblem(format!(
            "series order {} is below 3",
            series.order()
        )));
    }
    let hbar = rat(1);
    let mut truncations = Vec::with_capacity(p.levels.len());
    for &level in &p.levels {
        let eval = series.evaluate(level as u64, &p.lambda, &hbar, series.order())?;
        let nonzero: Vec<_> = eval.terms.iter().filter(|t| !t.is_zero()).collect();
        if nonzero.len() >= 2 && nonzero[1].abs_cmp(nonzero[0]).is_ge() {
            return Err(Error::AsymptoticBreakdown {
                level,
                note: format!(
                    "leading terms {:.6e} and {:.6e} do not decrease; the asymptotic series is useless at lambda = {}",
                    to_f64(nonzero[0]),
                    to_f64(nonzero[1]),
                    p.lambda
                ),
            });
        }
        truncations.push(optimal_truncation(&eval.terms));
    }

    let large = policy.basis_check.unwrap_or(2 * p.basis_size);
    let count = p.levels.iter().copied().max().unwrap_or(0) + 1;
    let big = p.with_basis_size(large);
    let (small_eig, large_eig) = std::thread::scope(|s| {
        let h = s.spawn(|| lowest_eigenvalues(&build_hamiltonian(&big), count));
        let a = lowest_eigenvalues(&build_hamiltonian(p), count);
        (a, h.join().expect("diagonalization thread panicked"))
    });
    let (small_eig, large_eig) = (small_eig?, large_eig?);

    let mut basis_shift: f64 = 0.0;
    for &level in &p.levels {
        let shift = (small_eig[level] - large_eig[level]).abs();
        basis_shift = basis_shift.max(shift);
        if !(shift < policy.convergence_tol) {
            return Err(Error::BasisNotConverged {
                level,
                shift,
                small: p.basis_size,
                large,
                limit: policy.convergence_tol,
            });
        }
    }

    let levels = p
        .levels
        .iter()
        .zip(truncations)
        .map(|(&level, (sum, k_star, omitted))| {
            let eigenvalue = small_eig[level];
            let series_partial_sum = to_f64(&sum);
            let first_omitted_term = to_f64(&omitted);
            let discrepancy = (eigenvalue - series_partial_sum).abs();
            let bound = (policy.bound_factor * first_omitted_term.abs()).max(policy.floor);
            LevelReport {
                level,
                eigenvalue,
                series_partial_sum,
                truncation_order: k_star,
                first_omitted_term,
                discrepancy,
                bound,
                passed: discrepancy <= bound,
            }
        })
        .collect();

    Ok(OracleReport {
        lambda: p.lambda.clone(),
        basis_size: p.basis_size,
        basis_check: large,
        basis_shift,
        levels,
    })
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "oracle report: lambda = {}, basis N = {} (check N = {}, max shift {:.3e})",
            self.lambda, self.basis_size, self.basis_check, self.basis_shift
        )?;
        writeln!(
            f,
            "{:>5}  {:>22}  {:>22}  {:>3}  {:>11}  {:>11}  {:>11}  verdict",
            "level", "eigenvalue", "partial_sum", "k*", "omitted", "discrepancy", "bound"
        )?;
        for l in &self.levels {
            writeln!(
                f,
                "{:>5}  {:>22.16}  {:>22.16}  {:>3}  {:>11.3e}  {:>11.3e}  {:>11.3e}  {}",
                l.level,
                l.eigenvalue,
                l.series_partial_sum,
                l.truncation_order,
                l.first_omitted_term,
                l.discrepancy,
                l.bound,
                if l.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
