//! Constructed chains over random valid draws: closed-form spectra, the
//! eigenvector recurrences, and agreement with dense diagonalization.

use proptest::prelude::*;
use xychain::chain::{
    analytic_spectrum, build_chain, build_pq_table, check_validity, parameter_scan, recurrence_residual, Interval,
    ScanBox,
};
use xychain::freefermion::{assemble, eigendecompose, match_modes, relative_gap};
use xychain::linalg::symmetric_eigen;
use xychain::{ContiguityFamily, QRacahParams};

fn draw() -> impl Strategy<Value = (ContiguityFamily, QRacahParams)> {
    let q = prop_oneof![Just(0.3f64), Just(0.5), Just(0.7)];
    (1usize..=8, q, any::<bool>()).prop_flat_map(|(n, q, qr13)| {
        if qr13 {
            let s = q.powi(1 - n as i32);
            (-2.0..0.5f64, 1.0..2.0f64, 2.0 * s..3.5 * s)
                .prop_map(move |(a, b, c)| (ContiguityFamily::Qr13, QRacahParams { a, b, c, n, q }))
                .boxed()
        } else {
            (-1.5..0.5f64, 0.2..1.5f64, -2.5..-1.0f64)
                .prop_map(move |(a, b, c)| (ContiguityFamily::Qr24, QRacahParams { a, b, c, n, q }))
                .boxed()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_draws_are_certified((family, params) in draw()) {
        if check_validity(family, &params).is_err() {
            return Ok(());
        }
        let chain = build_chain(family, &params).unwrap();
        let spectrum = analytic_spectrum(family, &params).unwrap();
        prop_assert!(spectrum.route_residual <= 1e-12, "{}", spectrum.route_residual);

        let table = build_pq_table(family, &params).unwrap();
        let residual = recurrence_residual(&chain, &spectrum.lambda, &table);
        prop_assert!(residual <= 1e-8, "recurrence {}", residual);

        let numeric = eigendecompose(&assemble(&chain)).unwrap();
        let scale = numeric.spectral_scale();
        let pairing = match_modes(&spectrum.lambda, &numeric.lambda_numeric);
        for (j, &k) in pairing.iter().enumerate() {
            let gap = relative_gap(spectrum.lambda[j], numeric.lambda_numeric[k], scale);
            prop_assert!(gap <= 1e-8, "Λ_{} {} vs {}", j, spectrum.lambda[j], numeric.lambda_numeric[k]);
        }

        if chain.is_xx(1e-12) {
            let mut hopping: Vec<f64> =
                symmetric_eigen(assemble(&chain).a()).unwrap().values.iter().map(|v| v.abs()).collect();
            hopping.sort_by(f64::total_cmp);
            for (l, h) in numeric.lambda_numeric.iter().zip(&hopping) {
                prop_assert!(relative_gap(*l, *h, scale) <= 1e-8);
            }
        }
    }
}

#[test]
fn scan_returns_only_buildable_draws() {
    let ranges = ScanBox {
        a: Interval::new(-1.5, 0.5),
        b: Interval::new(0.2, 1.5),
        c: Interval::new(-2.5, -1.0),
        q: Interval::point(0.5),
    };
    let found = parameter_scan(ContiguityFamily::Qr24, &ranges, 4, 40, 17).unwrap();
    assert!(!found.is_empty());
    for p in &found {
        build_chain(ContiguityFamily::Qr24, p).unwrap();
    }
}
