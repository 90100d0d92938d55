//! q-Racah polynomials and their `N̄ = N` B2-contiguity relations.
//!
//! Two relation pairs are supported:
//!
//! * [`ContiguityFamily::Qr13`]: (qRI/III) with (qRIII/I),
//!   `x̄ = x + 1, ā = a/q, b̄ = bq, c̄ = c/q²`;
//! * [`ContiguityFamily::Qr24`]: (qRII/IV) with (qRIV/II),
//!   `x̄ = x, ā = a/q, b̄ = bq, c̄ = c`.
//!
//! Each pair consists of
//!
//! ```text
//! λ⁺(x) R_i(x; ρ)  = Φ^{+1,+}_i R_{i+1}(x̄; ρ̄) + Φ^{0,+}_i R_i(x̄; ρ̄) + Φ^{-1,+}_i R_{i-1}(x̄; ρ̄)
//! λ⁻(x) R_i(x̄; ρ̄) = Φ^{+1,-}_i R_{i+1}(x; ρ)  + Φ^{0,-}_i R_i(x; ρ)  + Φ^{-1,-}_i R_{i-1}(x; ρ)
//! ```
//!
//! At `i = N` the raising coefficient vanishes, but `R_{N+1}` has a pole from
//! `(q^{-N}; q)_{N+1}` in its last term. For (qRI/III) the point `x = N` maps to
//! `x̄ = N + 1`, off the lattice of `ρ̄`, and the product keeps a finite limit.
//! [`ContiguityCoefficients`] carries the reduced raising coefficient so that
//! the limit can be evaluated; everywhere else the limit term is exactly zero.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qseries::{self, phi43_terminating, Phi43Spec, QMonomial, QSeriesError};

/// Relative residual allowed on a contiguity relation for `N ≤ 30`.
pub const RELATION_TOL: f64 = 1e-9;
/// Allowed `|ratio - 1|` on the compatibility constraint for `N ≤ 30`.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Smallest admissible `|1 - x|` among the polynomial's own denominator factors.
const PARAM_DENOMINATOR_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QRacahError {
    #[error("invalid q-Racah parameters: {0}")]
    InvalidParams(String),
    #[error("shifted parameters are invalid: {0}")]
    InvalidShiftedParams(String),
    #[error("invalid parameter regime: {0}")]
    InvalidParameterRegime(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Series(#[from] QSeriesError),
}

/// Tolerance scaled linearly with `N` beyond 30 sites.
pub fn scaled_tolerance(base: f64, n: usize) -> f64 {
    base * (n as f64 / 30.0).max(1.0)
}

/// The parameter list `ρ = (a, b, c, N, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QRacahParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
    pub q: f64,
}

impl QRacahParams {
    pub fn new(a: f64, b: f64, c: f64, n: usize, q: f64) -> Result<Self, QRacahError> {
        let p = Self { a, b, c, n, q };
        p.validate()?;
        Ok(p)
    }

    /// Checks `q ∈ (0, 1)`, `N ≥ 1`, finiteness, and that `(aq; q)_k`,
    /// `(bcq; q)_k` stay nonzero for `k ≤ N`.
    pub fn validate(&self) -> Result<(), QRacahError> {
        qseries::check_base(self.q).map_err(|e| QRacahError::InvalidParams(e.to_string()))?;
        if ![self.a, self.b, self.c].iter().all(|v| v.is_finite()) {
            return Err(QRacahError::InvalidParams(format!(
                "non-finite parameter in (a, b, c) = ({}, {}, {})",
                self.a, self.b, self.c
            )));
        }
        if self.n == 0 {
            return Err(QRacahError::InvalidParams("N must be at least 1".into()));
        }
        let bc = self.b * self.c;
        for l in 1..=self.n as i32 {
            let ql = self.q.powi(l);
            if (1.0 - self.a * ql).abs() < PARAM_DENOMINATOR_EPS {
                return Err(QRacahError::InvalidParams(format!("(aq; q)_k vanishes: 1 - a q^{l} = 0")));
            }
            if (1.0 - bc * ql).abs() < PARAM_DENOMINATOR_EPS {
                return Err(QRacahError::InvalidParams(format!("(bcq; q)_k vanishes: 1 - bc q^{l} = 0")));
            }
        }
        Ok(())
    }

    /// `R_i(x; ρ)` for any integer `x`, including points off the lattice `0..=N`.
    pub fn polynomial(&self, i: usize, x: i64) -> Result<f64, QRacahError> {
        self.polynomial_offset([0; 3], i, x)
    }

    /// `R_i(x)` at `(a q^{s_a}, b q^{s_b}, c q^{s_c})`, with the powers of `q`
    /// carried exactly rather than folded into rounded parameters.
    fn polynomial_offset(&self, [sa, sb, sc]: [i32; 3], i: usize, x: i64) -> Result<f64, QRacahError> {
        let nn = self.n as i32;
        let x = x as i32;
        let spec = Phi43Spec::from_monomials(
            i,
            [
                QMonomial::new(&[self.a, self.b], sa + sb + i as i32 + 1),
                QMonomial::power_of_q(-x),
                QMonomial::new(&[self.c], sc + x - nn),
            ],
            [
                QMonomial::new(&[self.a], sa + 1),
                QMonomial::new(&[self.b, self.c], sb + sc + 1),
                QMonomial::power_of_q(-nn),
            ],
            self.q,
            QMonomial::power_of_q(1),
        )?;
        Ok(phi43_terminating(&spec)?)
    }

    /// Pole-free part of the `k = N+1` term of `R_{N+1}(x; ρ)`: the term with the
    /// vanishing factor `(1 - q^{-N} q^N)` removed from `(q^{-N}; q)_{N+1}`.
    ///
    /// Identically zero for `0 ≤ x ≤ N` because `(q^{-x}; q)_{N+1}` vanishes.
    pub fn regularized_top_term(&self, x: i64) -> f64 {
        let q = self.q;
        let n = self.n as i32;
        if (0..=n as i64).contains(&x) {
            return 0.0;
        }
        let x = x as i32;
        let k = n + 1;
        let mut num = 1.0;
        let mut den = 1.0;
        for l in 0..k {
            num *= (1.0 - q.powi(l - k))
                * (1.0 - self.a * self.b * q.powi(k + 1 + l))
                * (1.0 - q.powi(l - x))
                * (1.0 - self.c * q.powi(x - n + l));
            den *= (1.0 - q.powi(l + 1)) * (1.0 - self.a * q.powi(l + 1)) * (1.0 - self.b * self.c * q.powi(l + 1));
            if l < n {
                den *= 1.0 - q.powi(l - n);
            }
        }
        num / den * q.powi(k)
    }
}

impl fmt::Display for QRacahParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={}, c={}, N={}, q={})", self.a, self.b, self.c, self.n, self.q)
    }
}

/// `R_i(x; ρ)` on the lattice.
pub fn qracah_eval(i: usize, x: usize, params: &QRacahParams) -> Result<f64, QRacahError> {
    if i > params.n || x > params.n {
        return Err(QRacahError::OutOfRange(format!("(i, x) = ({i}, {x}) outside 0..={}", params.n)));
    }
    params.polynomial(i, x as i64)
}

/// `λ_{x,ρ} = -(1 - q^{-x})(1 - c q^{x-N})`, the variable in which `R_i` has degree `i`.
pub fn grid_variable(x: usize, params: &QRacahParams) -> f64 {
    let q = params.q;
    let x = x as i32;
    -(1.0 - q.powi(-x)) * (1.0 - params.c * q.powi(x - params.n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContiguityFamily {
    /// (qRI/III) paired with (qRIII/I).
    Qr13,
    /// (qRII/IV) paired with (qRIV/II).
    Qr24,
}

impl ContiguityFamily {
    pub const ALL: [ContiguityFamily; 2] = [ContiguityFamily::Qr13, ContiguityFamily::Qr24];

    pub fn tag(&self) -> &'static str {
        match self {
            ContiguityFamily::Qr13 => "qr13",
            ContiguityFamily::Qr24 => "qr24",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "qr13" => Some(ContiguityFamily::Qr13),
            "qr24" => Some(ContiguityFamily::Qr24),
            _ => None,
        }
    }
}

impl fmt::Display for ContiguityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `(x̄ - x, ρ̄)` for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedParams {
    pub x_shift: usize,
    /// `ρ̄` rounded to `f64`.
    pub params_bar: QRacahParams,
    base: QRacahParams,
    /// Powers of `q` taking `(a, b, c)` to `(ā, b̄, c̄)`.
    q_powers: [i32; 3],
}

impl ShiftedParams {
    /// `R_i(x̄; ρ̄)` with `ρ̄` formed exactly from `ρ`. Near the top of the
    /// grid the sum cancels by many orders of magnitude, so rounding `a/q`
    /// or `bq` first would dominate the result.
    pub fn polynomial(&self, i: usize, x_bar: i64) -> Result<f64, QRacahError> {
        self.base.polynomial_offset(self.q_powers, i, x_bar)
    }
}

fn shift_raw(family: ContiguityFamily, p: &QRacahParams) -> ShiftedParams {
    let q = p.q;
    match family {
        ContiguityFamily::Qr13 => ShiftedParams {
            x_shift: 1,
            params_bar: QRacahParams { a: p.a / q, b: p.b * q, c: p.c / (q * q), n: p.n, q },
            base: *p,
            q_powers: [-1, 1, -2],
        },
        ContiguityFamily::Qr24 => ShiftedParams {
            x_shift: 0,
            params_bar: QRacahParams { a: p.a / q, b: p.b * q, c: p.c, n: p.n, q },
            base: *p,
            q_powers: [-1, 1, 0],
        },
    }
}

pub fn shift_params(family: ContiguityFamily, params: &QRacahParams) -> Result<ShiftedParams, QRacahError> {
    params.validate()?;
    let shifted = shift_raw(family, params);
    shifted
        .params_bar
        .validate()
        .map_err(|e| QRacahError::InvalidShiftedParams(format!("{} for {family}: {e}", shifted.params_bar)))?;
    Ok(shifted)
}

/// How `Φ^{0,-}_i` is formed for (qRIV/II). (qRIII/I) has a single closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroMinusRule {
    /// `Φ^{0,-}_i = λ⁺(0) - Φ^{+1,+}_i - Φ^{-1,+}_i`, transcribed literally.
    AsPrinted,
    /// `Φ^{0,-}_i = λ⁻(0) - Φ^{+1,-}_i - Φ^{-1,-}_i`, the sum rule at `x = x̄ = 0`.
    Balanced,
}

impl fmt::Display for ZeroMinusRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroMinusRule::AsPrinted => f.write_str("as-printed"),
            ZeroMinusRule::Balanced => f.write_str("balanced"),
        }
    }
}

/// Coefficients of one three-term relation, indexed by `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationTable {
    /// `Φ^{+1,±}_i`
    pub raise: Vec<f64>,
    /// `Φ^{0,±}_i`
    pub stay: Vec<f64>,
    /// `Φ^{-1,±}_i`
    pub lower: Vec<f64>,
    /// `lim Φ^{+1,±}_N / (1 - q^{-N} q^N)`, paired with [`QRacahParams::regularized_top_term`].
    pub raise_top_reduced: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContiguityCoefficients {
    pub family: ContiguityFamily,
    pub params: QRacahParams,
    pub shifted: ShiftedParams,
    pub rule: ZeroMinusRule,
    /// Relation expanding `λ⁺ R(x; ρ)` over `R(x̄; ρ̄)`.
    pub plus: RelationTable,
    /// Relation expanding `λ⁻ R(x̄; ρ̄)` over `R(x; ρ)`.
    pub minus: RelationTable,
    /// Smallest `|factor|` among every denominator factor that was evaluated.
    pub smallest_denominator: f64,
}

/// Records the magnitude of each denominator factor as it is used.
struct DenominatorLog {
    smallest: f64,
}

impl DenominatorLog {
    fn d(&mut self, v: f64) -> f64 {
        self.smallest = self.smallest.min(v.abs());
        v
    }
}

impl ContiguityCoefficients {
    pub fn n(&self) -> usize {
        self.params.n
    }

    /// `λ⁺_{x;ρ}` evaluated at any integer `x`.
    pub fn lambda_plus(&self, x: i64) -> f64 {
        lambda_pair(self.family, &self.params, x).0
    }

    /// `λ⁻_{x;ρ}` evaluated at any integer `x`.
    pub fn lambda_minus(&self, x: i64) -> f64 {
        lambda_pair(self.family, &self.params, x).1
    }

    /// `(Φ^{0,-}_i Φ^{+1,+}_i Φ^{-1,+}_{i+1} Φ^{0,-}_{i+1}) / (Φ^{0,+}_i Φ^{+1,-}_i Φ^{-1,-}_{i+1} Φ^{0,+}_{i+1})`
    /// for `i = 0..N`.
    pub fn constraint_ratios(&self) -> Vec<f64> {
        let (p, m) = (&self.plus, &self.minus);
        (0..self.n())
            .map(|i| {
                (m.stay[i] * p.raise[i] * p.lower[i + 1] * m.stay[i + 1])
                    / (p.stay[i] * m.raise[i] * m.lower[i + 1] * p.stay[i + 1])
            })
            .collect()
    }

    /// Largest `|ratio - 1|` over the constraint; NaN ratios count as infinite.
    pub fn constraint_residual(&self) -> f64 {
        self.constraint_ratios()
            .iter()
            .map(|r| if r.is_finite() { (r - 1.0).abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

fn lambda_pair(family: ContiguityFamily, p: &QRacahParams, x: i64) -> (f64, f64) {
    let (a, b, c, q) = (p.a, p.b, p.c, p.q);
    let n = p.n as i32;
    let x = x as i32;
    let qp = |m: i32| q.powi(m);
    match family {
        ContiguityFamily::Qr13 => (
            (1.0 - qp(-x - 1)) * (1.0 - c * qp(x - n - 1)) / ((1.0 - b * c) * (1.0 - a)),
            (1.0 - c * qp(x)) * (1.0 - qp(n - x)),
        ),
        ContiguityFamily::Qr24 => (
            (1.0 - a * qp(x)) * (c - a * qp(n - x)) / (a * (1.0 - a)),
            (1.0 - b * c * qp(x + 1)) * (1.0 - b * qp(n - x + 1)) / (b * q * (1.0 - b * c * q)),
        ),
    }
}

/// All `Φ^{s,±}_i` and `λ^±` for a family, using [`ZeroMinusRule::Balanced`] for (qRIV/II).
pub fn contiguity_coefficients(
    family: ContiguityFamily,
    params: &QRacahParams,
) -> Result<ContiguityCoefficients, QRacahError> {
    contiguity_coefficients_with_rule(family, params, ZeroMinusRule::Balanced)
}

pub fn contiguity_coefficients_with_rule(
    family: ContiguityFamily,
    params: &QRacahParams,
    rule: ZeroMinusRule,
) -> Result<ContiguityCoefficients, QRacahError> {
    let shifted = shift_params(family, params)?;
    let (a, b, c, q) = (params.a, params.b, params.c, params.q);
    let n = params.n as i32;
    let ab = a * b;
    let bc = b * c;
    let qp = |m: i32| q.powi(m);
    let mut log = DenominatorLog { smallest: f64::INFINITY };
    let size = params.n + 1;
    let mut plus = RelationTable {
        raise: Vec::with_capacity(size),
        stay: Vec::with_capacity(size),
        lower: Vec::with_capacity(size),
        raise_top_reduced: 0.0,
    };
    let mut minus = plus.clone();

    match family {
        ContiguityFamily::Qr13 => {
            let da = log.d(1.0 - a);
            let dbc = log.d(1.0 - bc);
            for i in 0..=n {
                let d1 = log.d(1.0 - ab * qp(2 * i + 1));
                let d2 = log.d(1.0 - ab * qp(2 * i + 2));
                let d0 = log.d(1.0 - ab * qp(2 * i));
                let raise_p = -qp(i) * (1.0 - qp(i - n)) * (1.0 - ab * qp(i + 1)) / (d1 * d2);
                let lower_p = -qp(i - n - 1) * (1.0 - qp(i)) * (1.0 - ab * qp(n + i + 1)) / (d0 * d1);
                plus.raise.push(raise_p);
                plus.lower.push(lower_p);
                plus.stay.push(-raise_p - lower_p);

                let common = da * dbc;
                minus.raise.push(
                    (1.0 - qp(n - i))
                        * (1.0 - a * qp(i))
                        * (1.0 - a * qp(i + 1))
                        * (1.0 - ab * qp(i + 1))
                        * (1.0 - bc * qp(i))
                        * (1.0 - bc * qp(i + 1))
                        / (common * d1 * d2),
                );
                let bracket = q * (1.0 - qp(n - i)) * (1.0 - ab * qp(i + 1)) / d2
                    + (1.0 - qp(-i)) * (1.0 - ab * qp(n + i + 1)) / d0;
                minus.stay.push(
                    (1.0 - a * qp(i)) * (1.0 - b * qp(i + 1)) * (1.0 - bc * qp(i)) * (a * qp(i + 1) - c)
                        / (q * common * d1)
                        * bracket,
                );
                minus.lower.push(
                    (1.0 - qp(-i))
                        * (a * qp(i) - c)
                        * (a * qp(i + 1) - c)
                        * (1.0 - b * qp(i))
                        * (1.0 - b * qp(i + 1))
                        * (1.0 - ab * qp(n + i + 1))
                        / (q * common * d0 * d1),
                );
            }
            let t1 = 1.0 - ab * qp(2 * n + 1);
            let t2 = 1.0 - ab * qp(2 * n + 2);
            plus.raise_top_reduced = -qp(n) * (1.0 - ab * qp(n + 1)) / (t1 * t2);
            // (1 - q^{N-i}) at i = N contributes a factor -1 relative to (1 - q^{-N} q^N).
            minus.raise_top_reduced = -(1.0 - a * qp(n))
                * (1.0 - a * qp(n + 1))
                * (1.0 - ab * qp(n + 1))
                * (1.0 - bc * qp(n))
                * (1.0 - bc * qp(n + 1))
                / (da * dbc * t1 * t2);
        }
        ContiguityFamily::Qr24 => {
            let dbcq = log.d(1.0 - bc * q);
            let da = log.d(1.0 - a);
            let a0 = log.d(a);
            let b0 = log.d(b);
            let lambda_plus_0 = (1.0 - a) * (c - a * qp(n)) / (a0 * da);
            let lambda_minus_0 = (1.0 - bc * q) * (1.0 - b * qp(n + 1)) / (b0 * q * dbcq);
            for i in 0..=n {
                let d1 = log.d(1.0 - ab * qp(2 * i + 1));
                let d2 = log.d(1.0 - ab * qp(2 * i + 2));
                let d0 = log.d(1.0 - ab * qp(2 * i));
                let raise_p = -(qp(n) - qp(i))
                    * (1.0 - ab * qp(i + 1))
                    * (1.0 - bc * qp(i + 1))
                    * (1.0 - bc * qp(i + 2))
                    / (dbcq * d1 * d2);
                let lower_p = -b * q * (1.0 - qp(i)) * (c - a * qp(i - 1)) * (c - a * qp(i)) * (1.0 - ab * qp(n + i + 1))
                    / (a0 * dbcq * d0 * d1);
                plus.raise.push(raise_p);
                plus.lower.push(lower_p);
                plus.stay.push(lambda_plus_0 - raise_p - lower_p);

                let raise_m = (1.0 - a * qp(i)) * (1.0 - a * qp(i + 1)) * (1.0 - ab * qp(i + 1)) * (qp(i) - qp(n))
                    / (da * d1 * d2);
                let lower_m = -a * (1.0 - qp(i)) * (1.0 - b * qp(i)) * (1.0 - b * qp(i + 1)) * (1.0 - ab * qp(n + i + 1))
                    / (b0 * q * da * d0 * d1);
                minus.raise.push(raise_m);
                minus.lower.push(lower_m);
                minus.stay.push(match rule {
                    ZeroMinusRule::AsPrinted => lambda_plus_0 - raise_p - lower_p,
                    ZeroMinusRule::Balanced => lambda_minus_0 - raise_m - lower_m,
                });
            }
            let t1 = 1.0 - ab * qp(2 * n + 1);
            let t2 = 1.0 - ab * qp(2 * n + 2);
            // (q^N - q^i) and (q^i - q^N) each reduce to ∓q^N times (1 - q^{-N} q^N).
            plus.raise_top_reduced = -qp(n)
                * (1.0 - ab * qp(n + 1))
                * (1.0 - bc * qp(n + 1))
                * (1.0 - bc * qp(n + 2))
                / (dbcq * t1 * t2);
            minus.raise_top_reduced =
                -qp(n) * (1.0 - a * qp(n)) * (1.0 - a * qp(n + 1)) * (1.0 - ab * qp(n + 1)) / (da * t1 * t2);
        }
    }

    let coeffs = ContiguityCoefficients {
        family,
        params: *params,
        shifted,
        rule,
        plus,
        minus,
        smallest_denominator: log.smallest,
    };
    let tables = [&coeffs.plus, &coeffs.minus];
    for (sign, table) in ["+", "-"].iter().zip(tables) {
        for (name, column) in [("+1", &table.raise), ("0", &table.stay), ("-1", &table.lower)] {
            if let Some((i, v)) = column.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(QRacahError::InvalidParameterRegime(format!(
                    "Φ^{{{name},{sign}}}_{i} = {v} for {family} at {params}"
                )));
            }
        }
    }
    for x in 0..=params.n as i64 {
        let (lp, lm) = (coeffs.lambda_plus(x), coeffs.lambda_minus(x));
        if !lp.is_finite() || !lm.is_finite() {
            return Err(QRacahError::InvalidParameterRegime(format!(
                "λ^±({x}) = ({lp}, {lm}) for {family} at {params}"
            )));
        }
    }
    Ok(coeffs)
}

/// Grid values `R_i(x; ρ)` and `R_i(x + x_shift; ρ̄)` for `i, x ∈ 0..=N`, row-major by `i`.
#[derive(Debug, Clone)]
pub struct PolynomialTables {
    pub base: Vec<Vec<f64>>,
    pub shifted: Vec<Vec<f64>>,
}

pub fn polynomial_tables(family: ContiguityFamily, params: &QRacahParams) -> Result<PolynomialTables, QRacahError> {
    let shifted = shift_params(family, params)?;
    let n = params.n;
    let mut base = vec![vec![0.0; n + 1]; n + 1];
    let mut bar = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for x in 0..=n {
            base[i][x] = params.polynomial(i, x as i64)?;
            bar[i][x] = shifted.polynomial(i, (x + shifted.x_shift) as i64)?;
        }
    }
    Ok(PolynomialTables { base, shifted: bar })
}

/// Outcome of checking both relations on the full `(i, x)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContiguityReport {
    pub family: ContiguityFamily,
    pub params: QRacahParams,
    /// Max relative residual of the `λ⁺` relation.
    pub plus_residual: f64,
    /// `(i, x)` of the worst `λ⁺` point.
    pub plus_worst: (usize, usize),
    /// Max relative residual of the `λ⁻` relation under the selected rule.
    pub minus_residual: f64,
    pub minus_worst: (usize, usize),
    /// Every `Φ^{0,-}` rule tried with its `λ⁻` residual.
    pub candidates: Vec<(ZeroMinusRule, f64)>,
    /// Rule whose `λ⁻` residual was smallest.
    pub selected_rule: ZeroMinusRule,
    /// Grid points where the regularized `R_{N+1}` term was nonzero.
    pub regularized_points: usize,
    pub tolerance: f64,
    pub passed: bool,
}

struct RelationCheck {
    residual: f64,
    worst: (usize, usize),
    regularized: usize,
}

/// Relative residual `|lhs - rhs| / max(|lhs|, Σ|terms|)`; zero when every term is zero.
fn relative_residual(lhs: f64, terms: &[f64]) -> f64 {
    let rhs: f64 = terms.iter().sum();
    let scale = terms.iter().fold(lhs.abs(), |m, t| m + t.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn check_relation(
    table: &RelationTable,
    lambda: impl Fn(i64) -> f64,
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    top: impl Fn(i64) -> f64,
    n: usize,
) -> RelationCheck {
    let mut out = RelationCheck { residual: 0.0, worst: (0, 0), regularized: 0 };
    for i in 0..=n {
        for x in 0..=n {
            let lhs = lambda(x as i64) * left[i][x];
            let mut terms = vec![table.stay[i] * right[i][x]];
            if i > 0 {
                terms.push(table.lower[i] * right[i - 1][x]);
            }
            if i < n {
                terms.push(table.raise[i] * right[i + 1][x]);
            } else {
                let limit = table.raise_top_reduced * top(x as i64);
                if limit != 0.0 {
                    out.regularized += 1;
                    terms.push(limit);
                }
            }
            let r = relative_residual(lhs, &terms);
            if !(r <= out.residual) {
                out.residual = r;
                out.worst = (i, x);
            }
        }
    }
    out
}

/// Evaluate both relations pointwise on `{0..N}²` by direct polynomial evaluation.
///
/// For (qRIV/II) both `Φ^{0,-}` rules are tried and the one with the smaller
/// residual is reported as selected. Fails only when the coefficients or the
/// polynomials cannot be evaluated at all.
pub fn verify_contiguity(family: ContiguityFamily, params: &QRacahParams) -> Result<ContiguityReport, QRacahError> {
    let tables = polynomial_tables(family, params)?;
    let n = params.n;
    let tolerance = scaled_tolerance(RELATION_TOL, n);
    let rules: &[ZeroMinusRule] = match family {
        ContiguityFamily::Qr13 => &[ZeroMinusRule::AsPrinted],
        ContiguityFamily::Qr24 => &[ZeroMinusRule::Balanced, ZeroMinusRule::AsPrinted],
    };

    let mut plus_check = None;
    let mut candidates = Vec::new();
    let mut best: Option<(ZeroMinusRule, RelationCheck)> = None;
    for &rule in rules {
        let coeffs = contiguity_coefficients_with_rule(family, params, rule)?;
        let bar = coeffs.shifted;
        if plus_check.is_none() {
            plus_check = Some(check_relation(
                &coeffs.plus,
                |x| coeffs.lambda_plus(x),
                &tables.base,
                &tables.shifted,
                |x| bar.params_bar.regularized_top_term(x + bar.x_shift as i64),
                n,
            ));
        }
        let minus = check_relation(
            &coeffs.minus,
            |x| coeffs.lambda_minus(x),
            &tables.shifted,
            &tables.base,
            |x| params.regularized_top_term(x),
            n,
        );
        candidates.push((rule, minus.residual));
        if best.as_ref().map_or(true, |(_, b)| minus.residual < b.residual) {
            best = Some((rule, minus));
        }
    }
    let plus = plus_check.expect("at least one rule is always checked");
    let (selected_rule, minus) = best.expect("at least one rule is always checked");
    let passed = plus.residual <= tolerance && minus.residual <= tolerance;
    Ok(ContiguityReport {
        family,
        params: *params,
        plus_residual: plus.residual,
        plus_worst: plus.worst,
        minus_residual: minus.residual,
        minus_worst: minus.worst,
        candidates,
        selected_rule,
        regularized_points: plus.regularized + minus.regularized,
        tolerance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> QRacahParams {
        QRacahParams::new(-0.4, 0.3, 0.2, 5, 0.5).unwrap()
    }

    #[test]
    fn degree_zero_and_origin_are_one() {
        let p = sample();
        for x in 0..=p.n {
            assert_eq!(qracah_eval(0, x, &p).unwrap(), 1.0);
        }
        for i in 0..=p.n {
            assert_eq!(qracah_eval(i, 0, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn grid_variable_zeros() {
        let p = sample();
        assert_eq!(grid_variable(0, &p), 0.0);
        let p1 = QRacahParams { c: 1.0, ..p };
        assert_eq!(grid_variable(p1.n, &p1), 0.0);
    }

    #[test]
    fn shift_tables() {
        let p = sample();
        let s13 = shift_params(ContiguityFamily::Qr13, &p).unwrap();
        assert_eq!(s13.x_shift, 1);
        let b = s13.params_bar;
        assert!((b.a + 0.8).abs() < 1e-15 && (b.b - 0.15).abs() < 1e-15 && (b.c - 0.8).abs() < 1e-15);
        assert_eq!((b.n, b.q), (5, 0.5));
        let s24 = shift_params(ContiguityFamily::Qr24, &p).unwrap();
        assert_eq!(s24.x_shift, 0);
        let b = s24.params_bar;
        assert!((b.a + 0.8).abs() < 1e-15 && (b.b - 0.15).abs() < 1e-15 && b.c == 0.2);
    }

    #[test]
    fn shifted_polynomial_uses_exact_powers() {
        // With q = 1/2 the rounded ρ̄ is exact, so both routes agree bitwise.
        let p = sample();
        for fam in ContiguityFamily::ALL {
            let s = shift_params(fam, &p).unwrap();
            for i in 0..=p.n {
                for x in 0..=p.n as i64 {
                    assert_eq!(s.polynomial(i, x).unwrap(), s.params_bar.polynomial(i, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn double_shift_is_plain_arithmetic() {
        let p = sample();
        let once = shift_params(ContiguityFamily::Qr13, &p).unwrap().params_bar;
        let twice = shift_params(ContiguityFamily::Qr13, &once).unwrap().params_bar;
        let q = p.q;
        assert!((twice.a - p.a / (q * q)).abs() < 1e-14);
        assert!((twice.b - p.b * q * q).abs() < 1e-14);
        assert!((twice.c - p.c / q.powi(4)).abs() < 1e-13);
        assert_eq!(twice.n, p.n);
    }

    #[test]
    fn invalid_shift_is_reported() {
        // ρ̄ has ā q = a, so a = 1 breaks (āq; q)_k while ρ itself is fine.
        let p = QRacahParams::new(1.0, 0.3, 0.2, 3, 0.5).unwrap();
        assert!(matches!(
            shift_params(ContiguityFamily::Qr24, &p),
            Err(QRacahError::InvalidShiftedParams(_))
        ));
    }

    #[test]
    fn boundary_coefficients_vanish() {
        let p = sample();
        let c = contiguity_coefficients(ContiguityFamily::Qr13, &p).unwrap();
        assert_eq!(c.plus.lower[0], 0.0);
        assert_eq!(c.plus.raise[p.n], 0.0);
        assert_eq!(c.minus.raise[p.n], 0.0);
        assert_eq!(c.minus.lower[0], 0.0);
        let c = contiguity_coefficients(ContiguityFamily::Qr24, &p).unwrap();
        assert_eq!(c.plus.lower[0], 0.0);
        assert_eq!(c.plus.raise[p.n], 0.0);
    }

    #[test]
    fn constraint_holds_on_sample() {
        let p = sample();
        for fam in ContiguityFamily::ALL {
            let c = contiguity_coefficients(fam, &p).unwrap();
            assert!(c.constraint_residual() < CONSTRAINT_TOL, "{fam}: {}", c.constraint_residual());
        }
    }

    #[test]
    fn relations_balance_on_sample() {
        let p = sample();
        let r13 = verify_contiguity(ContiguityFamily::Qr13, &p).unwrap();
        assert!(r13.passed, "{r13:?}");
        assert_eq!(r13.regularized_points, 1);
        let r24 = verify_contiguity(ContiguityFamily::Qr24, &p).unwrap();
        assert!(r24.passed, "{r24:?}");
        assert_eq!(r24.selected_rule, ZeroMinusRule::Balanced);
        let printed = r24.candidates.iter().find(|(r, _)| *r == ZeroMinusRule::AsPrinted).unwrap();
        assert!(printed.1 > 1e-3);
    }

    #[test]
    fn top_limit_is_needed_at_corner() {
        // Without the regularized term the (i, x) = (N, N) point of the λ⁺ relation is off by O(1).
        let p = sample();
        let c = contiguity_coefficients(ContiguityFamily::Qr13, &p).unwrap();
        let bar = c.shifted.params_bar;
        let n = p.n;
        let lhs = c.lambda_plus(n as i64) * p.polynomial(n, n as i64).unwrap();
        let rhs = c.plus.stay[n] * bar.polynomial(n, n as i64 + 1).unwrap()
            + c.plus.lower[n] * bar.polynomial(n - 1, n as i64 + 1).unwrap();
        let limit = c.plus.raise_top_reduced * bar.regularized_top_term(n as i64 + 1);
        assert!((lhs - rhs).abs() > 1.0);
        assert!((lhs - rhs - limit).abs() < 1e-9 * (rhs.abs() + limit.abs()));
    }

    #[test]
    fn vanishing_denominator_is_a_regime_error() {
        // ab = 1 makes 1 - ab q^{2i} vanish at i = 0.
        let p = QRacahParams::new(3.0, 1.0 / 3.0, 0.2, 3, 0.5).unwrap();
        let err = contiguity_coefficients(ContiguityFamily::Qr13, &p).unwrap_err();
        assert!(matches!(err, QRacahError::InvalidParameterRegime(_)), "{err}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(QRacahParams::new(0.1, 0.2, 0.3, 0, 0.5).is_err());
        assert!(QRacahParams::new(0.1, 0.2, 0.3, 3, 1.0).is_err());
        assert!(QRacahParams::new(2.0, 0.2, 0.3, 3, 0.5).is_err()); // 1 - a q = 0
        assert!(QRacahParams::new(0.1, 4.0, 0.5, 3, 0.5).is_err()); // 1 - bc q = 0
    }
}
