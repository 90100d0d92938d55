//! Structural properties of the free-fermion diagonalization and the spin
//! oracle over arbitrary couplings.

use proptest::prelude::*;
use xychain::freefermion::{assemble, eigendecompose, many_body_spectrum, relative_gap, singular_values};
use xychain::linalg::symmetric_eigen;
use xychain::spinoracle::{build_spin_hamiltonian, jw_certify, oracle_spectrum};
use xychain::ChainSpec;

fn couplings(max_n: usize) -> impl Strategy<Value = ChainSpec> {
    (0..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(-1.0..1.0f64, n),
            proptest::collection::vec(-1.0..1.0f64, n + 1),
            proptest::collection::vec(-1.0..1.0f64, n),
        )
            .prop_map(|(alpha, beta, gamma)| ChainSpec::explicit(alpha, beta, gamma).unwrap())
    })
}

/// Multiples of 1/8 in [-2, 2]: every sum of them is exact.
fn dyadic(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-16i32..=16).prop_map(|k| k as f64 / 8.0), len)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn max_multiset_gap(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a.to_vec()), sorted(b.to_vec()));
    assert_eq!(a.len(), b.len());
    a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Both parity sectors of a two-site chain in closed form: `{|00>, |11>}`
/// couples through `2γ` and `{|01>, |10>}` through `2α`.
fn two_site_energies(alpha: f64, gamma: f64, b0: f64, b1: f64) -> Vec<f64> {
    let even = ((b0 + b1).powi(2) + 4.0 * gamma * gamma).sqrt();
    let odd = ((b0 - b1).powi(2) + 4.0 * alpha * alpha).sqrt();
    sorted(vec![-even, even, -odd, odd])
}

#[test]
fn two_site_hand_expansion_examples() {
    for (a, g, b0, b1) in [(1.0, 0.0, 0.0, 0.0), (0.5, 0.25, 1.0, -0.5), (0.0, 0.8, 0.3, 0.3)] {
        let chain = ChainSpec::explicit(vec![a], vec![b0, b1], vec![g]).unwrap();
        let lambda = eigendecompose(&assemble(&chain)).unwrap().lambda_numeric;
        let free = many_body_spectrum(&lambda).unwrap().energies();
        assert!(max_multiset_gap(&free, &two_site_energies(a, g, b0, b1)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_site_matches_hand_expansion(a in -1.0..1.0f64, g in -1.0..1.0f64, b0 in -1.0..1.0f64, b1 in -1.0..1.0f64) {
        let chain = ChainSpec::explicit(vec![a], vec![b0, b1], vec![g]).unwrap();
        let lambda = eigendecompose(&assemble(&chain)).unwrap().lambda_numeric;
        let free = many_body_spectrum(&lambda).unwrap().energies();
        let expected = two_site_energies(a, g, b0, b1);
        prop_assert!(max_multiset_gap(&free, &expected) < 1e-12, "{:?} vs {:?}", free, expected);
        let oracle = oracle_spectrum(&build_spin_hamiltonian(&chain).unwrap()).unwrap();
        prop_assert!(max_multiset_gap(&oracle, &expected) < 1e-12);
    }

    #[test]
    fn spectrum_comes_in_pairs(chain in couplings(10)) {
        let spectral = eigendecompose(&assemble(&chain)).unwrap();
        let e = &spectral.h_eigenvalues;
        let negated: Vec<f64> = e.iter().map(|x| -x).collect();
        let scale = spectral.spectral_scale().max(1.0);
        prop_assert!(max_multiset_gap(e, &negated) <= 1e-10 * scale);
        prop_assert!(spectral.parity_defect() <= 1e-10);
    }

    #[test]
    fn transform_is_orthogonal(chain in couplings(10)) {
        let sys = assemble(&chain);
        let spectral = eigendecompose(&sys).unwrap();
        prop_assert!(spectral.orthogonality_defect() <= 1e-8, "{}", spectral.orthogonality_defect());
        prop_assert!(spectral.eigen_residual(&sys) <= 1e-10);
    }

    #[test]
    fn singular_values_match_energies(chain in couplings(10)) {
        let sys = assemble(&chain);
        let spectral = eigendecompose(&sys).unwrap();
        let sigma = singular_values(&sys).unwrap();
        let scale = spectral.spectral_scale();
        for (l, s) in spectral.lambda_numeric.iter().zip(&sigma) {
            prop_assert!(relative_gap(*l, *s, scale) <= 1e-8, "{} vs {}", l, s);
        }
    }

    #[test]
    fn many_body_spectrum_is_symmetric(lambda in proptest::collection::vec(0.0..3.0f64, 1..=8)) {
        let energies = many_body_spectrum(&lambda).unwrap().energies();
        let negated: Vec<f64> = energies.iter().map(|e| -e).collect();
        prop_assert!(max_multiset_gap(&energies, &negated) <= 1e-10);
        let ground: f64 = -lambda.iter().sum::<f64>();
        prop_assert!((energies[0] - ground).abs() <= 1e-12);
    }

    #[test]
    fn xx_chains_reduce_to_hopping(
        (alpha, beta) in (0usize..=8).prop_flat_map(|n| (
            proptest::collection::vec(-1.0..1.0f64, n),
            proptest::collection::vec(-1.0..1.0f64, n + 1),
        ))
    ) {
        let n = alpha.len();
        let chain = ChainSpec::explicit(alpha, beta, vec![0.0; n]).unwrap();
        let sys = assemble(&chain);
        let lambda = eigendecompose(&sys).unwrap().lambda_numeric;
        let hopping = sorted(symmetric_eigen(sys.a()).unwrap().values.iter().map(|v| v.abs()).collect());
        prop_assert!(max_multiset_gap(&lambda, &hopping) <= 1e-10);
    }

    #[test]
    fn jordan_wigner_holds_for_any_couplings(chain in couplings(5)) {
        let report = jw_certify(&chain).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn zero_field_spin_spectrum_is_symmetric(
        (alpha, gamma) in (1usize..=5).prop_flat_map(|n| (
            proptest::collection::vec(-1.0..1.0f64, n),
            proptest::collection::vec(-1.0..1.0f64, n),
        ))
    ) {
        let n = alpha.len();
        let chain = ChainSpec::explicit(alpha, vec![0.0; n + 1], gamma).unwrap();
        let e = oracle_spectrum(&build_spin_hamiltonian(&chain).unwrap()).unwrap();
        let negated: Vec<f64> = e.iter().map(|x| -x).collect();
        prop_assert!(max_multiset_gap(&e, &negated) <= 1e-10);
    }

    #[test]
    fn dyadic_spin_trace_is_exactly_zero(
        (alpha, beta, gamma) in (0usize..=5).prop_flat_map(|n| (dyadic(n), dyadic(n + 1), dyadic(n)))
    ) {
        let chain = ChainSpec::explicit(alpha, beta, gamma).unwrap();
        prop_assert_eq!(build_spin_hamiltonian(&chain).unwrap().matrix().trace(), 0.0);
    }
}
