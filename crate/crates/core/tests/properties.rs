mod common;

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use bell_lhv::harness::CountDataset;
use bell_lhv::inequality::{
    ch_report, channel_conversion, correlation, fc_report, renormalized_correlation, s_statistic,
    CorrelationBasis, InequalityName, ProbabilitySet, TwoChannelCounts,
};
use bell_lhv::model::Side;
use bell_lhv::quantum::{
    bi1_min_efficiency, bi_margin, cascade_bi_maximum, cascade_optics, two_channel_rates,
    visibility_estimators, PdcConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn counts() -> impl Strategy<Value = TwoChannelCounts> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_filter("non-zero total", |(a, b, c, d)| a + b + c + d > 1e-6)
        .prop_map(|(a, b, c, d)| TwoChannelCounts::new(a, b, c, d).unwrap())
}

proptest! {
    #[test]
    fn renormalized_correlation_is_scale_invariant(tc in counts(), k in 1u32..64, m in 1u32..64) {
        let factor = k as f64 / m as f64;
        let e = renormalized_correlation(&tc).unwrap();
        let scaled = renormalized_correlation(&tc.scaled(factor)).unwrap();
        prop_assert!((e - scaled).abs() <= 1e-15);
        prop_assert!(e.abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn correlations_agree_when_normalized(tc in counts()) {
        let n = tc.scaled(1.0 / tc.total());
        prop_assert!((correlation(&n) - renormalized_correlation(&n).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn channel_conversion_round_trips(tc in counts()) {
        let n = tc.scaled(1.0 / tc.total());
        let (px, py) = (n.ppp + n.ppm, n.ppp + n.pmp);
        let back = channel_conversion(&n, px, py).unwrap().to_counts(px, py);
        for (a, b) in back.as_array().iter().zip(n.as_array()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ch_and_fc_share_lhs(
        pa in 0.0..1.0f64, pb in 0.0..1.0f64,
        f in proptest::array::uniform4(0.0..1.0f64),
        inf in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let ps = ProbabilitySet::new(pa, pb, f[0] * pa.min(pb), f[1] * pa, f[2] * pb, f[3]).unwrap();
        let ch = ch_report(&ps);
        let fc = fc_report(&ps, inf.0, inf.1);
        prop_assert_eq!(ch.lhs, fc.lhs);
        prop_assert!(ch.genuine && !fc.genuine);
        prop_assert_eq!(ch.margin, ch.rhs - ch.lhs);
        prop_assert_eq!(ch.violated, ch.margin < 0.0);
    }

    #[test]
    fn only_normalized_chsh_is_genuine(e in proptest::array::uniform4(-1.0..1.0f64)) {
        let n = s_statistic(e[0], e[1], e[2], e[3], CorrelationBasis::Normalized);
        let u = s_statistic(e[0], e[1], e[2], e[3], CorrelationBasis::Unnormalized);
        let r = s_statistic(e[0], e[1], e[2], e[3], CorrelationBasis::Renormalized);
        prop_assert!(n.genuine && !u.genuine && !r.genuine);
        prop_assert_eq!(r.name, InequalityName::ChshStar);
        prop_assert_eq!(n.lhs, r.lhs);
    }

    #[test]
    fn pdc_rates_round_trip(v in 0.0..=1.0f64, eta in 0.01..=1.0f64, r0 in 1.0..1e6f64, phi in -3.2..3.2f64) {
        let cfg = PdcConfig::new(v, eta, r0).unwrap();
        let r = two_channel_rates(&cfg, phi);
        prop_assert!((r.total() / (2.0 * eta * r0) - 1.0).abs() < 1e-12);
        let e = renormalized_correlation(&r).unwrap();
        prop_assert!((e - v * (2.0 * phi).cos()).abs() < 1e-12);
    }

    #[test]
    fn threshold_inverts_bi_margin(v in 0.7072..=1.0f64) {
        let z = bi1_min_efficiency(v).unwrap();
        prop_assert!((bi_margin(1.0, z, v).lhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cascade_never_violates(zeta in 0.01..=1.0f64, both in any::<bool>()) {
        prop_assert!(cascade_bi_maximum(zeta, both).unwrap().max_lhs < 2.0);
    }

    #[test]
    fn cascade_optics_monotone(t in 0.01..FRAC_PI_2 - 0.01, dt in 1e-4..0.01f64, zeta in 0.1..=1.0f64) {
        let a = cascade_optics(t, zeta);
        let b = cascade_optics(t + dt, zeta);
        prop_assert!(b.eta > a.eta && b.v < a.v);
    }

    #[test]
    fn visibility_recovered_from_exact_curve(v in 0.0..=1.0f64, n in 5usize..40) {
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let phi = k as f64 * FRAC_PI_2 / (n - 1) as f64;
                (phi, v * (2.0 * phi).cos())
            })
            .collect();
        let est = visibility_estimators(&samples).unwrap();
        prop_assert!((est.v_fit - v).abs() < 1e-12);
        prop_assert!((est.v_a - v).abs() < 1e-12);
    }

    #[test]
    fn count_files_round_trip(rows in proptest::collection::vec(proptest::array::uniform4(0u64..1_000_000), 1..6)) {
        let mut text = String::from("setting_a,setting_b,n_pp,n_pm,n_mp,n_mm\n");
        for (i, n) in rows.iter().enumerate() {
            text.push_str(&format!("S{i},T,{},{},{},{}\n", n[0], n[1], n[2], n[3]));
        }
        let ds = CountDataset::parse(&text).unwrap();
        prop_assert_eq!(ds.rows().len(), rows.len());
        let again = CountDataset::parse(&ds.to_csv_string().unwrap()).unwrap();
        prop_assert_eq!(again.rows(), ds.rows());
    }

    #[test]
    fn factorizable_chsh_bounded(seed in any::<u64>()) {
        // outcome + with the model probability, - otherwise
        let model = common::random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        let space = model.space();
        let r1 = model.response(Side::One);
        let r2 = model.response(Side::Two);
        let e = |x: usize, y: usize| -> f64 {
            (0..space.len())
                .map(|c| space.weights()[c] * (2.0 * r1.value(c, x) - 1.0) * (2.0 * r2.value(c, y) - 1.0))
                .sum()
        };
        let s = s_statistic(e(0, 0), e(0, 1), e(1, 0), e(1, 1), CorrelationBasis::Normalized);
        prop_assert!(s.lhs <= 2.0 + 1e-10, "{s:?}");
    }
}

#[test]
fn optimal_visibility_crosses_exactly() {
    let v = SQRT_2 / 2.0;
    let e = v * std::f64::consts::FRAC_1_SQRT_2;
    let r = s_statistic(e, e, e, -e, CorrelationBasis::Renormalized);
    assert!((r.margin).abs() < 1e-15);
}
