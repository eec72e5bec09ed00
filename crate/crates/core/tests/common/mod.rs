#![allow(dead_code)]

use bell_lhv::inequality::ProbabilitySet;
use bell_lhv::model::{FactorizableModel, ModelDocument, TableDocument};
use bell_lhv::search::{canonical_strategies, StrategyMixture};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// Existence of p(C), p(D) such that the four pair distributions are valid
/// and all eight CH inequalities hold (Fine's criterion), decided by
/// enumerating vertices of the feasible polygon in the (p(C), p(D)) plane.
pub fn fine_feasible(ps: &ProbabilitySet) -> bool {
    let &ProbabilitySet {
        pa,
        pb,
        pab,
        pad,
        pcb,
        pcd,
    } = ps;
    // constraints a*pc + b*pd <= c
    let mut cons: Vec<(f64, f64, f64)> = vec![
        (-1.0, 0.0, 0.0),
        (1.0, 0.0, 1.0),
        (0.0, -1.0, 0.0),
        (0.0, 1.0, 1.0),
        // (A,D)
        (0.0, -1.0, -pad),
        (0.0, 1.0, 1.0 + pad - pa),
        // (C,B)
        (-1.0, 0.0, -pcb),
        (1.0, 0.0, 1.0 + pcb - pb),
        // (C,D)
        (-1.0, 0.0, -pcd),
        (0.0, -1.0, -pcd),
        (1.0, 1.0, 1.0 + pcd),
    ];
    // constant parts: (A,B) validity and the CH form with the minus sign on (C,D)
    let ch_cd = pab + pad + pcb - pcd - pa - pb;
    if pab > pa.min(pb) + TOL || pab < pa + pb - 1.0 - TOL || !(-1.0 - TOL..=TOL).contains(&ch_cd) {
        return false;
    }
    // -1 <= k - u*pc - v*pd <= 0 for the other three sign placements
    for (k, u, v) in [
        (pab + pad + pcd - pcb - pa, 0.0, 1.0),
        (pab + pcb + pcd - pad - pb, 1.0, 0.0),
        (pad + pcb + pcd - pab, 1.0, 1.0),
    ] {
        cons.push((-u, -v, -k));
        cons.push((u, v, 1.0 + k));
    }

    let satisfied = |x: f64, y: f64| cons.iter().all(|&(a, b, c)| a * x + b * y <= c + TOL);
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a1, b1, c1) = cons[i];
            let (a2, b2, c2) = cons[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            if satisfied(x, y) {
                return true;
            }
        }
    }
    false
}

/// Probability set on the grid `k / n`, drawn until it passes validation.
pub fn grid_probability_set(rng: &mut ChaCha8Rng, n: u32) -> ProbabilitySet {
    let g = |rng: &mut ChaCha8Rng| rng.random_range(0..=n) as f64 / n as f64;
    loop {
        let (pa, pb) = (g(rng), g(rng));
        let (pab, pad, pcb, pcd) = (g(rng), g(rng), g(rng), g(rng));
        if let Ok(ps) = ProbabilitySet::new(pa, pb, pab, pad, pcb, pcd) {
            return ps;
        }
    }
}

/// Random finite model with settings A, C on side 1 and B, D on side 2.
pub fn random_model(rng: &mut ChaCha8Rng) -> FactorizableModel {
    let cells = rng.random_range(1..=8);
    let raw: Vec<f64> = (0..cells).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let deterministic = rng.random_bool(0.3);
    let entry = |rng: &mut ChaCha8Rng| {
        if deterministic {
            rng.random_range(0..=1) as f64
        } else {
            rng.random::<f64>()
        }
    };
    let table = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..cells).map(|_| vec![entry(rng), entry(rng)]).collect()
    };
    let side1 = table(rng);
    let side2 = table(rng);
    FactorizableModel::new(ModelDocument {
        cells: (0..cells).map(|i| format!("l{i}")).collect(),
        weights,
        side1: TableDocument {
            settings: vec!["A".into(), "C".into()],
            table: side1,
        },
        side2: TableDocument {
            settings: vec!["B".into(), "D".into()],
            table: side2,
        },
    })
    .unwrap()
}

/// Dirichlet(1) weights over the 81 canonical strategy pairs.
pub fn random_mixture(rng: &mut ChaCha8Rng) -> StrategyMixture {
    let raw: Vec<f64> = (0..81).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    StrategyMixture::canonical(raw.iter().map(|w| w / total).collect()).unwrap()
}

/// `S*` and plain `S` of canonical weights by direct enumeration of outcomes.
pub fn brute_force_s(weights: &[f64]) -> (f64, f64) {
    let (s1, s2) = canonical_strategies();
    let pairs = [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)];
    let mut s_star = 0.0;
    let mut s = 0.0;
    for &(x, y, sign) in &pairs {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, a) in s1.iter().enumerate() {
            for (j, b) in s2.iter().enumerate() {
                let w = weights[i * s2.len() + j];
                let value = |o: bell_lhv::search::Outcome| match o {
                    bell_lhv::search::Outcome::Plus => Some(1.0),
                    bell_lhv::search::Outcome::Minus => Some(-1.0),
                    bell_lhv::search::Outcome::Undetected => None,
                };
                if let (Some(u), Some(v)) = (value(a.outcomes[x]), value(b.outcomes[y])) {
                    num += w * u * v;
                    den += w;
                }
            }
        }
        s_star += sign * num / den;
        s += sign * num;
    }
    (s_star, s)
}
