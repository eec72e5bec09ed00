//! Independent oracles for the local-model machinery.

mod common;

use bell_lhv::feasibility::{joint_feasibility, Feasibility};
use bell_lhv::inequality::{ch_report, ProbabilitySet};
use bell_lhv::model::Side;
use common::{fine_feasible, grid_probability_set, random_model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn feasibility_matches_fine_oracle_on_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..1000 {
        let ps = grid_probability_set(&mut rng, 10);
        let expected = fine_feasible(&ps);
        let got = joint_feasibility(&ps).unwrap();
        assert_eq!(
            got.is_feasible(),
            expected,
            "disagreement on {ps:?}: {got:?}"
        );
        if expected {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    // the sample must exercise both verdicts
    assert!(
        feasible > 50 && infeasible > 50,
        "{feasible} / {infeasible}"
    );
}

#[test]
fn witness_reproduces_the_six_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let ps = grid_probability_set(&mut rng, 6);
        if let Feasibility::Feasible { witness } = joint_feasibility(&ps).unwrap() {
            // observables in order A, C, B, D
            let got = [
                witness.single(0),
                witness.single(2),
                witness.pair(0, 2),
                witness.pair(0, 3),
                witness.pair(1, 2),
                witness.pair(1, 3),
            ];
            for (g, want) in got.iter().zip(ps.as_array()) {
                assert!((g - want).abs() < 1e-9, "{got:?} vs {ps:?}");
            }
            assert!((witness.total() - 1.0).abs() < 1e-9);
            assert!(witness.probabilities.iter().all(|&p| p >= -1e-12));
        }
    }
}

#[test]
fn infeasible_certificates_are_violated() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let ps = grid_probability_set(&mut rng, 8);
        if let Feasibility::Infeasible { certificate } = joint_feasibility(&ps).unwrap() {
            assert!(certificate.lhs > certificate.rhs + 1e-9, "{certificate:?}");
        }
    }
}

#[test]
fn random_models_never_violate_ch() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..10_000 {
        let model = random_model(&mut rng);
        let ps = model.probability_set("A", "C", "B", "D").unwrap();
        let r = ch_report(&ps);
        assert!(r.margin >= -1e-10, "model {i}: {r:?}");
        // lower CH bound holds too
        assert!(ps.ch_combination() - ps.pa - ps.pb >= -1.0 - 1e-10);
        assert!(joint_feasibility(&ps).unwrap().is_feasible(), "model {i}");
    }
}

#[test]
fn formal_joint_reproduces_model_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let model = random_model(&mut rng);
        let j = model.formal_joint_distribution("A", "C", "B", "D").unwrap();
        assert!((j.total() - 1.0).abs() < 1e-12);
        for (k, name) in ["A", "C"].iter().enumerate() {
            let direct = model.marginal_probability(Side::One, name).unwrap();
            assert!((j.single(k) - direct).abs() < 1e-12);
        }
        for (k, a) in ["A", "C"].iter().enumerate() {
            for (l, b) in ["B", "D"].iter().enumerate() {
                let direct = model.joint_probability(a, b).unwrap();
                assert!((j.pair(k, 2 + l) - direct).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn overlapping_halves_are_infeasible() {
    // p(A)=p(B)=1/2, the first three pairs perfectly correlated, C and D disjoint
    let ps = ProbabilitySet::new(0.5, 0.5, 0.5, 0.5, 0.5, 0.0).unwrap();
    assert!(!fine_feasible(&ps));
    assert!(!joint_feasibility(&ps).unwrap().is_feasible());
    assert!(ch_report(&ps).violated);
}
