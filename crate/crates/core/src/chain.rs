//! From contiguity coefficients to a physical chain.
//!
//! Couplings follow from matching the normalized polynomials against the coupled
//! recurrences
//!
//! ```text
//! β_k P_k + (α_k - γ_k) P_{k+1} + (α_{k-1} + γ_{k-1}) P_{k-1} = Λ Q_k
//! β_k Q_k + (α_k + γ_k) Q_{k+1} + (α_{k-1} - γ_{k-1}) Q_{k-1} = Λ P_k
//! ```
//!
//! with `α_{-1} = γ_{-1} = α_N = γ_N = 0`. Each coupling is a square root of a
//! product of two coefficients; the root carries the sign of the `Φ` it is
//! matched against (`Φ^{0,-}_j` for `β_j`, `Φ^{+1,-}_j` for `α_j - γ_j`,
//! `Φ^{+1,+}_j` for `α_j + γ_j`), which is what makes the recurrences hold when
//! those coefficients are negative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qracah::{
    contiguity_coefficients, polynomial_tables, verify_contiguity, ContiguityCoefficients, ContiguityFamily,
    QRacahError, QRacahParams,
};

/// Radicands down to this value are clamped to zero; anything lower is an error.
pub const RADICAND_TOL: f64 = 1e-12;
/// Agreement required between the two closed-form routes to `Λ_j`.
pub const ROUTE_TOL: f64 = 1e-12;
/// Residual allowed when substituting the `P/Q` table into the recurrences.
pub const RECURRENCE_TOL: f64 = 1e-8;
/// Scan rejects draws whose smallest coefficient denominator is below this.
pub const SCAN_DENOMINATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error(transparent)]
    QRacah(#[from] QRacahError),
    #[error("invalid parameter regime: {0}")]
    InvalidParameterRegime(String),
    #[error("closed-form Λ_{j} = {closed} disagrees with sqrt(λ⁺λ⁻) = {product}")]
    RouteMismatch { j: usize, closed: f64, product: f64 },
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("no valid parameters found among {samples} draws; try widening the ranges")]
    NoValidParameters { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOrigin {
    pub family: ContiguityFamily,
    pub params: QRacahParams,
}

/// Couplings of an open chain with `N + 1` sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    origin: Option<ChainOrigin>,
}

impl ChainSpec {
    /// A chain given directly by its couplings; `β` fixes `N = β.len() - 1`.
    pub fn explicit(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self, ChainError> {
        if beta.is_empty() {
            return Err(ChainError::InvalidChain("beta must have at least one entry".into()));
        }
        let n = beta.len() - 1;
        if alpha.len() != n || gamma.len() != n {
            return Err(ChainError::InvalidChain(format!(
                "expected alpha and gamma of length {n} for {} sites, got {} and {}",
                n + 1,
                alpha.len(),
                gamma.len()
            )));
        }
        for (name, values) in [("alpha", &alpha), ("beta", &beta), ("gamma", &gamma)] {
            if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(ChainError::InvalidChain(format!("{name}[{j}] = {v} is not finite")));
            }
        }
        Ok(Self { n, alpha, beta, gamma, origin: None })
    }

    /// Index of the last site; the chain has `n() + 1` sites.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.n + 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn origin(&self) -> Option<&ChainOrigin> {
        self.origin.as_ref()
    }

    /// True when every `|γ_j| ≤ tol`, i.e. the chain is of XX type.
    pub fn is_xx(&self, tol: f64) -> bool {
        self.gamma.iter().all(|g| g.abs() <= tol)
    }

    /// Copy with one coupling perturbed; keeps the origin so analytic data can
    /// still be compared against the altered chain.
    pub fn with_beta(&self, j: usize, value: f64) -> Self {
        let mut out = self.clone();
        out.beta[j] = value;
        out
    }
}

fn signed_root(radicand: f64, negative: bool, what: impl FnOnce() -> String) -> Result<f64, ChainError> {
    if radicand.is_nan() || radicand < -RADICAND_TOL {
        return Err(ChainError::InvalidParameterRegime(format!("negative radicand {radicand:e} in {}", what())));
    }
    let root = radicand.max(0.0).sqrt();
    Ok(if negative { -root } else { root })
}

fn chain_from_coefficients(coeffs: &ContiguityCoefficients) -> Result<ChainSpec, ChainError> {
    let n = coeffs.n();
    let (plus, minus) = (&coeffs.plus, &coeffs.minus);
    let beta = (0..=n)
        .map(|j| {
            signed_root(plus.stay[j] * minus.stay[j], minus.stay[j] < 0.0, || {
                format!("β_{j} = sqrt(Φ^{{0,+}}_{j} Φ^{{0,-}}_{j})")
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut alpha = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for j in 0..n {
        let minus_gap = signed_root(plus.lower[j + 1] * minus.raise[j], minus.raise[j] < 0.0, || {
            format!("α_{j} - γ_{j} = sqrt(Φ^{{-1,+}}_{} Φ^{{+1,-}}_{j})", j + 1)
        })?;
        let plus_gap = signed_root(minus.lower[j + 1] * plus.raise[j], plus.raise[j] < 0.0, || {
            format!("α_{j} + γ_{j} = sqrt(Φ^{{-1,-}}_{} Φ^{{+1,+}}_{j})", j + 1)
        })?;
        alpha.push(0.5 * (minus_gap + plus_gap));
        gamma.push(0.5 * (plus_gap - minus_gap));
    }
    Ok(ChainSpec {
        n,
        alpha,
        beta,
        gamma,
        origin: Some(ChainOrigin { family: coeffs.family, params: coeffs.params }),
    })
}

/// Couplings `α_j, β_j, γ_j` of the exactly solvable chain for one family.
pub fn build_chain(family: ContiguityFamily, params: &QRacahParams) -> Result<ChainSpec, ChainError> {
    let coeffs = contiguity_coefficients(family, params)?;
    chain_from_coefficients(&coeffs)
}

/// Closed-form single-particle energies `Λ_0..Λ_N`, indexed by lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    pub lambda: Vec<f64>,
    /// Max relative gap between the closed form and `sqrt(λ⁺_j λ⁻_j)`.
    pub route_residual: f64,
}

fn closed_form_radicand(family: ContiguityFamily, p: &QRacahParams, j: usize) -> f64 {
    let (a, b, c, q) = (p.a, p.b, p.c, p.q);
    let n = p.n as i32;
    let j = j as i32;
    let qp = |m: i32| q.powi(m);
    match family {
        ContiguityFamily::Qr13 => {
            (1.0 - c * qp(j)) * (1.0 - qp(n - j)) * (1.0 - qp(-j - 1)) * (1.0 - c * qp(j - n - 1))
                / ((1.0 - b * c) * (1.0 - a))
        }
        ContiguityFamily::Qr24 => {
            (1.0 - a * qp(j)) * (c - a * qp(n - j)) * (1.0 - b * c * qp(j + 1)) * (1.0 - b * qp(n - j + 1))
                / (a * b * q * (1.0 - a) * (1.0 - b * c * q))
        }
    }
}

/// `Λ_j` from the family's closed form, cross-checked against `sqrt(λ⁺_j λ⁻_j)`.
pub fn analytic_spectrum(family: ContiguityFamily, params: &QRacahParams) -> Result<AnalyticSpectrum, ChainError> {
    let coeffs = contiguity_coefficients(family, params)?;
    let mut lambda = Vec::with_capacity(params.n + 1);
    let mut route_residual: f64 = 0.0;
    for j in 0..=params.n {
        let closed = signed_root(closed_form_radicand(family, params, j), false, || format!("closed-form Λ_{j}"))?;
        let product = signed_root(coeffs.lambda_plus(j as i64) * coeffs.lambda_minus(j as i64), false, || {
            format!("sqrt(λ⁺_{j} λ⁻_{j})")
        })?;
        let scale = closed.abs().max(product.abs());
        let gap = if scale == 0.0 { 0.0 } else { (closed - product).abs() / scale };
        if gap > ROUTE_TOL {
            return Err(ChainError::RouteMismatch { j, closed, product });
        }
        route_residual = route_residual.max(gap);
        lambda.push(closed);
    }
    Ok(AnalyticSpectrum { lambda, route_residual })
}

/// Components `P_k(j)` and `Q_k(j)`, stored as `p[k][j]`, `q[k][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PQTable {
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl PQTable {
    pub fn p_column(&self, j: usize) -> Vec<f64> {
        self.p.iter().map(|row| row[j]).collect()
    }

    pub fn q_column(&self, j: usize) -> Vec<f64> {
        self.q.iter().map(|row| row[j]).collect()
    }
}

/// Normalized polynomials `P_i(x) ∝ R_i(x; ρ)` and `Q_i(x) ∝ R_i(x̄; ρ̄)`.
///
/// The weights are the running products
/// `p_i = Φ^{0,-}_0 ∏_{k<i} Φ^{0,+}_k Φ^{+1,-}_k / (Φ^{0,-}_k Φ^{-1,+}_{k+1})` and
/// `r_i = Φ^{0,+}_0 ∏_{k<i} Φ^{0,-}_k Φ^{+1,+}_k / (Φ^{0,+}_k Φ^{-1,-}_{k+1})`;
/// `P_i(x) = sqrt(|λ⁺(x) p_i|) R_i(x; ρ)` and
/// `Q_i(x) = sgn(λ⁻(x)) sqrt(|λ⁻(x) r_i|) R_i(x̄; ρ̄)`.
/// Both radicands must still be `≥ -RADICAND_TOL` before the absolute value.
pub fn build_pq_table(family: ContiguityFamily, params: &QRacahParams) -> Result<PQTable, ChainError> {
    let coeffs = contiguity_coefficients(family, params)?;
    let polys = polynomial_tables(family, params)?;
    let n = params.n;
    let (plus, minus) = (&coeffs.plus, &coeffs.minus);

    let mut p_weight = vec![minus.stay[0]];
    let mut r_weight = vec![plus.stay[0]];
    for k in 0..n {
        p_weight.push(p_weight[k] * plus.stay[k] * minus.raise[k] / (minus.stay[k] * plus.lower[k + 1]));
        r_weight.push(r_weight[k] * minus.stay[k] * plus.raise[k] / (plus.stay[k] * minus.lower[k + 1]));
    }

    let mut p = vec![vec![0.0; n + 1]; n + 1];
    let mut q = vec![vec![0.0; n + 1]; n + 1];
    for x in 0..=n {
        let lp = coeffs.lambda_plus(x as i64);
        let lm = coeffs.lambda_minus(x as i64);
        for i in 0..=n {
            let rp = lp * p_weight[i];
            let rq = lm * r_weight[i];
            for (value, what) in [(rp, "λ⁺ p"), (rq, "λ⁻ r")] {
                if value.is_nan() || value < -RADICAND_TOL {
                    return Err(ChainError::InvalidParameterRegime(format!(
                        "normalization radicand {what} = {value:e} at (i, x) = ({i}, {x})"
                    )));
                }
            }
            p[i][x] = rp.abs().sqrt() * polys.base[i][x];
            let sign = if lm < 0.0 { -1.0 } else { 1.0 };
            q[i][x] = sign * rq.abs().sqrt() * polys.shifted[i][x];
        }
    }
    Ok(PQTable { p, q })
}

/// Largest residual of the coupled recurrences over all `k` and columns `j`,
/// each column scaled by its largest absolute term.
pub fn recurrence_residual(chain: &ChainSpec, lambda: &[f64], table: &PQTable) -> f64 {
    let n = chain.n();
    let alpha = |k: isize| if k >= 0 && (k as usize) < n { chain.alpha[k as usize] } else { 0.0 };
    let gamma = |k: isize| if k >= 0 && (k as usize) < n { chain.gamma[k as usize] } else { 0.0 };
    let at = |m: &Vec<Vec<f64>>, k: isize, j: usize| if k >= 0 && (k as usize) <= n { m[k as usize][j] } else { 0.0 };
    let mut worst: f64 = 0.0;
    for j in 0..=n {
        let mut scale: f64 = 0.0;
        let mut errors = Vec::with_capacity(2 * (n + 1));
        for k in 0..=n {
            let ki = k as isize;
            let first = [
                chain.beta[k] * table.p[k][j],
                (alpha(ki) - gamma(ki)) * at(&table.p, ki + 1, j),
                (alpha(ki - 1) + gamma(ki - 1)) * at(&table.p, ki - 1, j),
                -lambda[j] * table.q[k][j],
            ];
            let second = [
                chain.beta[k] * table.q[k][j],
                (alpha(ki) + gamma(ki)) * at(&table.q, ki + 1, j),
                (alpha(ki - 1) - gamma(ki - 1)) * at(&table.q, ki - 1, j),
                -lambda[j] * table.p[k][j],
            ];
            for terms in [first, second] {
                scale = scale.max(terms.iter().map(|t| t.abs()).sum());
                errors.push(terms.iter().sum::<f64>().abs());
            }
        }
        if scale > 0.0 {
            worst = worst.max(errors.iter().fold(0.0, |m: f64, e| m.max(*e)) / scale);
        }
    }
    worst
}

/// Closed interval `[lo, hi]`; `lo == hi` pins the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi)
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}

/// Box in `(a, b, c, q)` explored by [`parameter_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanBox {
    pub a: Interval,
    pub b: Interval,
    pub c: Interval,
    pub q: Interval,
}

impl ScanBox {
    pub fn is_empty(&self) -> bool {
        [self.a, self.b, self.c, self.q].iter().any(Interval::is_empty)
    }
}

/// Every validity predicate a scanned draw has to meet: well-separated
/// denominators, buildable chain, spectrum and `P/Q` table, and both
/// contiguity relations certified on the grid.
pub fn check_validity(family: ContiguityFamily, params: &QRacahParams) -> Result<(), ChainError> {
    params.validate()?;
    let coeffs = contiguity_coefficients(family, params)?;
    if coeffs.smallest_denominator < SCAN_DENOMINATOR_TOL {
        return Err(ChainError::InvalidParameterRegime(format!(
            "coefficient denominator {:e} below {SCAN_DENOMINATOR_TOL:e}",
            coeffs.smallest_denominator
        )));
    }
    chain_from_coefficients(&coeffs)?;
    analytic_spectrum(family, params)?;
    build_pq_table(family, params)?;
    let report = verify_contiguity(family, params)?;
    if !report.passed {
        return Err(ChainError::InvalidParameterRegime(format!(
            "contiguity residuals ({:e}, {:e}) exceed {:e}",
            report.plus_residual, report.minus_residual, report.tolerance
        )));
    }
    Ok(())
}

/// Uniform random search of `ranges` for valid parameters at fixed `n`.
///
/// Draws are generated sequentially from a ChaCha8 stream seeded with `seed`
/// and then checked in parallel, so the result depends only on the inputs.
pub fn parameter_scan(
    family: ContiguityFamily,
    ranges: &ScanBox,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<QRacahParams>, ChainError> {
    if ranges.is_empty() || samples == 0 {
        return Err(ChainError::NoValidParameters { samples });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<QRacahParams> = (0..samples)
        .map(|_| QRacahParams {
            a: ranges.a.sample(&mut rng),
            b: ranges.b.sample(&mut rng),
            c: ranges.c.sample(&mut rng),
            n,
            q: ranges.q.sample(&mut rng),
        })
        .collect();
    let valid: Vec<QRacahParams> = draws
        .into_par_iter()
        .filter(|p| check_validity(family, p).is_ok())
        .collect();
    if valid.is_empty() {
        return Err(ChainError::NoValidParameters { samples });
    }
    Ok(valid)
}
