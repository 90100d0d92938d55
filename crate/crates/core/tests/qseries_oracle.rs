//! Terminating `4φ3` sums against a direct exact-rational evaluation.
//!
//! The oracle accumulates the Pochhammer products themselves rather than term
//! ratios and never rounds, so it shares no code path with the library.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use proptest::prelude::*;
use xychain::qseries::{phi43_exact, phi43_terminating, q_pochhammer, Phi43Spec, QMonomial, QPochhammerArgs};

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn exact_pow(q: &BigRational, n: i32) -> BigRational {
    let p = num_traits::pow(q.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

/// `Σ_k (q^{-i}, a1, a2, a3; q)_k / (q, b1, b2, b3; q)_k z^k` with every
/// parameter given exactly. The Pochhammer products are accumulated forward
/// and the partial sums kept over their common denominator, unreduced.
fn oracle(i: usize, upper: &[BigRational; 3], lower: &[BigRational; 3], q: &BigRational, z: &BigRational) -> f64 {
    let one = BigRational::one();
    let lead = exact_pow(q, -(i as i32));
    let (mut term_num, mut term_den) = (BigInt::one(), BigInt::one());
    let mut sum_num = BigInt::one();
    for k in 0..i {
        let p = exact_pow(q, k as i32);
        let mut factors_up = vec![&one - &lead * &p, z.clone()];
        factors_up.extend(upper.iter().map(|a| &one - a * &p));
        let mut factors_down = vec![&one - q * &p];
        factors_down.extend(lower.iter().map(|b| &one - b * &p));
        for f in &factors_up {
            term_num *= f.numer();
            term_den *= f.denom();
        }
        for f in &factors_down {
            term_num *= f.denom();
            term_den *= f.numer();
            sum_num *= f.numer();
        }
        // sum_num / term_den is the partial sum before adding the new term.
        for f in &factors_up {
            sum_num *= f.denom();
        }
        sum_num += &term_num;
    }
    if term_den.is_negative() {
        (sum_num, term_den) = (-sum_num, -term_den);
    }
    BigRational::new_raw(sum_num, term_den).to_f64().unwrap()
}

fn relative(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn generic_degree_three_matches_exact_sum() {
    // R_3(2) for (a, b, c, N, q) = (-0.4, 0.3, 0.2, 5, 0.5).
    let (a, b, c, q): (f64, f64, f64, f64) = (-0.4, 0.3, 0.2, 0.5);
    let (n, x, i): (i32, i32, usize) = (5, 2, 3);
    let spec = Phi43Spec::new(
        i,
        [a * b * q.powi(i as i32 + 1), q.powi(-x), c * q.powi(x - n)],
        [a * q, b * c * q, q.powi(-n)],
        q,
        q,
    )
    .unwrap();
    let upper = [exact(a) * exact(b) * exact(q.powi(i as i32 + 1)), exact(q.powi(-x)), exact(c) * exact(q.powi(x - n))];
    let lower = [exact(a) * exact(q), exact(b) * exact(c) * exact(q), exact(q.powi(-n))];
    let expected = oracle(i, &upper, &lower, &exact(q), &exact(q));
    let got = phi43_terminating(&spec).unwrap();
    assert!(relative(got, expected) < 1e-14, "{got} vs {expected}");
}

#[test]
fn pochhammer_step_is_one_rounding() {
    for (b, q) in [(0.3, 0.5), (-1.7, 0.9), (12.5, 0.3)] {
        let mut power = 1.0;
        for k in 0..20 {
            let p = q_pochhammer(&QPochhammerArgs::new(b, q, k).unwrap());
            let next = q_pochhammer(&QPochhammerArgs::new(b, q, k + 1).unwrap());
            assert_eq!(next, p * (1.0 - b * power));
            power *= q;
        }
    }
}

fn param() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..-0.05f64, 0.05..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_exact_summation(
        i in 0usize..=30,
        q in 0.2..0.9f64,
        upper in [param(), param(), param()],
        lower in [param(), param(), param()],
        z in param(),
        shifts in [-4i32..=4, -4i32..=4, -4i32..=4],
    ) {
        // Parameters of the form coeff · q^m, the shape the library is built for.
        let monomials = |v: [f64; 3]| [0, 1, 2].map(|k| QMonomial::new(&[v[k]], shifts[k]));
        let spec = Phi43Spec::from_monomials(i, monomials(upper), monomials(lower), q, QMonomial::constant(z)).unwrap();
        let qe = exact(q);
        let to_exact = |v: [f64; 3]| [0, 1, 2].map(|k| exact(v[k]) * exact_pow(&qe, shifts[k]));
        let expected = oracle(i, &to_exact(upper), &to_exact(lower), &qe, &exact(z));
        let got = phi43_terminating(&spec).unwrap();
        prop_assert!(relative(got, expected) <= 1e-12, "{} vs {}", got, expected);
    }

    #[test]
    fn exact_path_agrees_with_double_double(
        i in 0usize..=12,
        q in 0.2..0.9f64,
        upper in [param(), param(), param()],
        lower in [param(), param(), param()],
    ) {
        let spec = Phi43Spec::new(i, upper, lower, q, q).unwrap();
        if let (Ok(fast), Ok(slow)) = (phi43_terminating(&spec), phi43_exact(&spec)) {
            prop_assert!(relative(fast, slow) <= 1e-12, "{} vs {}", fast, slow);
        }
    }
}
