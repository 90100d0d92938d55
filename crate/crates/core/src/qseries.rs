//! q-Pochhammer symbols and terminating `4φ3` basic hypergeometric series.
//!
//! All routines require a base `q` strictly inside `(0, 1)`. The `4φ3` sum is
//! accumulated through successive term ratios in double-double arithmetic:
//! for `q^{-N}`-type parameters the individual terms can exceed the sum by ten
//! or more orders of magnitude, which leaves nothing of a plain `f64` result.
//! Parameters are kept as monomials `coeff · q^m` so that every factor
//! `1 - coeff · q^{m+k}` is formed from the exact inputs, and lattice zeros such
//! as `1 - q^{-x} q^x` come out exactly. When the largest term still exceeds
//! the sum by more than [`EXACT_FALLBACK_RATIO`] the series is summed again in
//! exact rational arithmetic, which every finite `f64` input admits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;
use twofloat::TwoFloat;

/// A double-double factor `1 - x` below this multiple of `max(1, |x|)` counts
/// as zero.
const VANISHING_FACTOR_REL: f64 = 1e-28;

/// `max_k |t_k| / |sum|` above which the double-double result is recomputed
/// exactly. Below it at least sixteen significant digits survive.
pub const EXACT_FALLBACK_RATIO: f64 = 1e14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QSeriesError {
    #[error("base q = {0} must lie strictly inside (0, 1)")]
    InvalidBase(f64),
    #[error("non-finite series parameter {0}")]
    NonFinite(f64),
    #[error("denominator Pochhammer factor vanishes at term k = {k} (parameter #{param})")]
    DenominatorVanishes { k: usize, param: usize },
}

pub(crate) fn check_base(q: f64) -> Result<(), QSeriesError> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(QSeriesError::InvalidBase(q))
    }
}

/// Arguments of a single symbol `(base; q)_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPochhammerArgs {
    base: f64,
    q: f64,
    k: usize,
}

impl QPochhammerArgs {
    pub fn new(base: f64, q: f64, k: usize) -> Result<Self, QSeriesError> {
        check_base(q)?;
        if !base.is_finite() {
            return Err(QSeriesError::NonFinite(base));
        }
        Ok(Self { base, q, k })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// `(b; q)_k = ∏_{l=0}^{k-1} (1 - b q^l)`; the empty product is 1.
pub fn q_pochhammer(args: &QPochhammerArgs) -> f64 {
    let mut acc = 1.0;
    let mut power = 1.0;
    for _ in 0..args.k {
        acc *= 1.0 - args.base * power;
        power *= args.q;
    }
    acc
}

/// `(b_1, ..., b_p; q)_k`, the product of the individual symbols.
pub fn q_pochhammer_multi(bases: &[f64], q: f64, k: usize) -> Result<f64, QSeriesError> {
    check_base(q)?;
    bases.iter().try_fold(1.0, |acc, &b| {
        Ok(acc * q_pochhammer(&QPochhammerArgs::new(b, q, k)?))
    })
}

/// `coeff · q^power` with `coeff` the product of `factors`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMonomial {
    factors: Vec<f64>,
    power: i32,
}

impl QMonomial {
    pub fn new(factors: &[f64], power: i32) -> Self {
        Self { factors: factors.to_vec(), power }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(&[value], 0)
    }

    pub fn power_of_q(power: i32) -> Self {
        Self::new(&[], power)
    }

    pub fn power(&self) -> i32 {
        self.power
    }

    /// Rounded `f64` value.
    pub fn value(&self, q: f64) -> f64 {
        self.factors.iter().product::<f64>() * q.powi(self.power)
    }

    fn coefficient(&self) -> TwoFloat {
        self.factors.iter().fold(TwoFloat::from(1.0), |acc, f| acc * *f)
    }

    fn unit_coefficient(&self) -> bool {
        self.factors.iter().all(|f| *f == 1.0)
    }

    fn check(&self) -> Result<(), QSeriesError> {
        match self.factors.iter().find(|f| !f.is_finite()) {
            Some(f) => Err(QSeriesError::NonFinite(*f)),
            None => Ok(()),
        }
    }

    fn exact_value(&self, q: &BigRational, shift: i32) -> BigRational {
        let coeff = self.factors.iter().fold(BigRational::one(), |acc, f| acc * exact(*f));
        coeff * exact_powi(q, self.power + shift)
    }

    /// `1 - coeff · q^{power + shift}`, or `None` when it vanishes.
    fn one_minus_shifted(&self, q: TwoFloat, shift: i32) -> Option<TwoFloat> {
        let e = self.power + shift;
        if e == 0 && self.unit_coefficient() {
            return None;
        }
        let x = self.coefficient() * dd_powi(q, e);
        let f = TwoFloat::from(1.0) - x;
        let scale = x.hi().abs().max(1.0);
        if f.hi().abs() <= VANISHING_FACTOR_REL * scale {
            None
        } else {
            Some(f)
        }
    }
}

/// Double-double quotient. `TwoFloat / TwoFloat` in twofloat 0.8 forms its
/// reciprocal residual without an FMA, which leaves the result only `f64`
/// accurate; one Newton step on the remainder restores the low word.
fn dd_div(num: TwoFloat, den: TwoFloat) -> TwoFloat {
    let guess = num / den;
    let remainder = num - guess * den;
    guess + remainder / den.hi()
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite inputs are checked on construction")
}

fn exact_powi(q: &BigRational, n: i32) -> BigRational {
    let p = num_traits::pow(q.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

/// `q^n` in double-double; negative powers go through [`dd_div`] because
/// `TwoFloat::powi` inverts with the same unrefined reciprocal.
fn dd_powi(q: TwoFloat, n: i32) -> TwoFloat {
    let positive = q.powi(n.abs());
    if n < 0 {
        dd_div(TwoFloat::from(1.0), positive)
    } else {
        positive
    }
}

/// A terminating balanced-form `4φ3` whose first numerator parameter is `q^{-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi43Spec {
    degree: usize,
    upper: [QMonomial; 3],
    lower: [QMonomial; 3],
    q: f64,
    z: QMonomial,
}

impl Phi43Spec {
    /// `upper` holds `a_1, a_2, a_3`; the leading `q^{-degree}` is implied.
    pub fn new(degree: usize, upper: [f64; 3], lower: [f64; 3], q: f64, z: f64) -> Result<Self, QSeriesError> {
        Self::from_monomials(degree, upper.map(QMonomial::constant), lower.map(QMonomial::constant), q, QMonomial::constant(z))
    }

    /// Same as [`Phi43Spec::new`] with every parameter given as `coeff · q^m`.
    pub fn from_monomials(
        degree: usize,
        upper: [QMonomial; 3],
        lower: [QMonomial; 3],
        q: f64,
        z: QMonomial,
    ) -> Result<Self, QSeriesError> {
        check_base(q)?;
        for m in upper.iter().chain(lower.iter()).chain(std::iter::once(&z)) {
            m.check()?;
        }
        Ok(Self { degree, upper, lower, q, z })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `q^{-degree}, a_1, a_2, a_3`, rounded to `f64`.
    pub fn numerator(&self) -> [f64; 4] {
        let q = self.q;
        [
            q.powi(-(self.degree as i32)),
            self.upper[0].value(q),
            self.upper[1].value(q),
            self.upper[2].value(q),
        ]
    }

    pub fn denominator(&self) -> [f64; 3] {
        self.lower.clone().map(|m| m.value(self.q))
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn z(&self) -> f64 {
        self.z.value(self.q)
    }
}

/// Sum `Σ_{k=0}^{i} (q^{-i}, a_1, a_2, a_3; q)_k / (q, b_1, b_2, b_3; q)_k · z^k`.
///
/// Terms are generated from `t_{k+1} = t_k · r_k` with
/// `r_k = (1 - q^{k-i})(1 - a_1 q^k)(1 - a_2 q^k)(1 - a_3 q^k) z
///        / ((1 - q^{k+1})(1 - b_1 q^k)(1 - b_2 q^k)(1 - b_3 q^k))`.
/// Once a numerator factor hits zero every later term vanishes and the
/// summation stops, so denominators beyond that point are never inspected.
pub fn phi43_terminating(spec: &Phi43Spec) -> Result<f64, QSeriesError> {
    let i = spec.degree as i32;
    let q = TwoFloat::from(spec.q);
    let z = spec.z.coefficient() * dd_powi(q, spec.z.power);
    let one = TwoFloat::from(1.0);
    let mut term = one;
    let mut sum = one;
    let mut largest = 1.0_f64;
    'terms: for k in 0..i {
        let mut num = (one - dd_powi(q, k - i)) * z;
        for a in &spec.upper {
            match a.one_minus_shifted(q, k) {
                Some(f) => num *= f,
                None => break 'terms,
            }
        }
        let mut den = one - dd_powi(q, k + 1);
        for (idx, b) in spec.lower.iter().enumerate() {
            match b.one_minus_shifted(q, k) {
                Some(f) => den *= f,
                None => return Err(QSeriesError::DenominatorVanishes { k: k as usize + 1, param: idx + 1 }),
            }
        }
        term = dd_div(term * num, den);
        largest = largest.max(term.hi().abs());
        sum += term;
    }
    let value = sum.hi() + sum.lo();
    if largest > EXACT_FALLBACK_RATIO * value.abs() {
        return phi43_exact(spec);
    }
    Ok(value)
}

/// The same sum in exact rational arithmetic, rounded once at the end.
///
/// Evaluated in nested form `1 + r_0 (1 + r_1 (1 + …))` on an unreduced
/// numerator/denominator pair, which avoids gcd work on very large integers.
pub fn phi43_exact(spec: &Phi43Spec) -> Result<f64, QSeriesError> {
    let i = spec.degree as i32;
    let q = exact(spec.q);
    let z = spec.z.exact_value(&q, 0);
    let one = BigRational::one();
    let mut ratios = Vec::with_capacity(spec.degree);
    'terms: for k in 0..i {
        let mut num = (&one - exact_powi(&q, k - i)) * &z;
        for a in &spec.upper {
            let f = &one - a.exact_value(&q, k);
            if f.is_zero() {
                break 'terms;
            }
            num *= f;
        }
        let mut den = &one - exact_powi(&q, k + 1);
        for (idx, b) in spec.lower.iter().enumerate() {
            let f = &one - b.exact_value(&q, k);
            if f.is_zero() {
                return Err(QSeriesError::DenominatorVanishes { k: k as usize + 1, param: idx + 1 });
            }
            den *= f;
        }
        // r_k = num / den as one unreduced fraction.
        ratios.push((num.numer() * den.denom(), num.denom() * den.numer()));
    }
    let (mut top, mut bottom) = (BigInt::one(), BigInt::one());
    for (rn, rd) in ratios.iter().rev() {
        top = &bottom * rd + &top * rn;
        bottom *= rd;
    }
    if bottom.is_negative() {
        (top, bottom) = (-top, -bottom);
    }
    Ok(BigRational::new_raw(top, bottom).to_f64().expect("a finite rational rounds to a finite f64 or infinity"))
}
