//! Does a formal joint distribution of A, C, B, D exist that reproduces a
//! given set of six measurable probabilities?
//!
//! Decided by LP feasibility over the 16 outcome weights. Only p(A) and p(B)
//! are given among the single marginals, so the certificate on failure is
//! drawn from the facets of the projected polytope: the CH inequality and its
//! lower companion, followed by the bound and triangle facets.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inequality::{ProbabilitySet, DATA_TOLERANCE};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::model::FourOutcomeJoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetFamily {
    /// Relabeling of the CH inequality.
    Ch,
    /// Bound or triangle facet.
    Bound,
}

/// A violated linear inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: FacetFamily,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Certificate {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Feasibility {
    Feasible { witness: FourOutcomeJoint },
    Infeasible { certificate: Certificate },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

struct Facet {
    family: FacetFamily,
    text: &'static str,
    eval: fn(&ProbabilitySet) -> (f64, f64),
}

/// Facets of the projection of the 16-outcome simplex onto the six given coordinates.
const FACETS: [Facet; 13] = [
    Facet {
        family: FacetFamily::Ch,
        text: "p(A,B) + p(A,D) + p(C,B) - p(C,D) <= p(A) + p(B)",
        eval: |p| (p.ch_combination(), p.pa + p.pb),
    },
    Facet {
        family: FacetFamily::Ch,
        text: "p(A) + p(B) - p(A,B) - p(A,D) - p(C,B) + p(C,D) <= 1",
        eval: |p| (p.pa + p.pb - p.ch_combination(), 1.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(A) + p(B) - p(A,B) <= 1",
        eval: |p| (p.pa + p.pb - p.pab, 1.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(A) - p(A,D) + p(C,D) <= 1",
        eval: |p| (p.pa - p.pad + p.pcd, 1.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(B) - p(C,B) + p(C,D) <= 1",
        eval: |p| (p.pb - p.pcb + p.pcd, 1.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(A,B) <= p(A)",
        eval: |p| (p.pab, p.pa),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(A,B) <= p(B)",
        eval: |p| (p.pab, p.pb),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(A,D) <= p(A)",
        eval: |p| (p.pad, p.pa),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "p(C,B) <= p(B)",
        eval: |p| (p.pcb, p.pb),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "-p(A,B) <= 0",
        eval: |p| (-p.pab, 0.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "-p(A,D) <= 0",
        eval: |p| (-p.pad, 0.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "-p(C,B) <= 0",
        eval: |p| (-p.pcb, 0.0),
    },
    Facet {
        family: FacetFamily::Bound,
        text: "-p(C,D) <= 0",
        eval: |p| (-p.pcd, 0.0),
    },
];

/// Scans the facet list; CH-family facets come first.
pub fn violated_facet(ps: &ProbabilitySet) -> Option<Certificate> {
    FACETS
        .iter()
        .map(|f| {
            let (lhs, rhs) = (f.eval)(ps);
            Certificate {
                family: f.family,
                inequality: f.text.to_string(),
                lhs,
                rhs,
            }
        })
        .find(|c| c.excess() > DATA_TOLERANCE)
}

fn most_violated_facet(ps: &ProbabilitySet) -> Certificate {
    violated_facet(ps).unwrap_or_else(|| {
        FACETS
            .iter()
            .map(|f| {
                let (lhs, rhs) = (f.eval)(ps);
                Certificate {
                    family: f.family,
                    inequality: f.text.to_string(),
                    lhs,
                    rhs,
                }
            })
            .max_by(|a, b| a.excess().total_cmp(&b.excess()))
            .expect("facet list is non-empty")
    })
}

pub fn joint_feasibility(ps: &ProbabilitySet) -> Result<Feasibility> {
    let indicator = |pred: &dyn Fn(usize) -> bool| -> Vec<f64> {
        (0..16).map(|i| if pred(i) { 1.0 } else { 0.0 }).collect()
    };
    let yes = |i: usize, k: usize| FourOutcomeJoint::bit(i, k);
    // observable order in FourOutcomeJoint: 0 = A, 1 = C, 2 = B, 3 = D
    let rows: [(Vec<f64>, f64); 7] = [
        (vec![1.0; 16], 1.0),
        (indicator(&|i| yes(i, 0)), ps.pa),
        (indicator(&|i| yes(i, 2)), ps.pb),
        (indicator(&|i| yes(i, 0) && yes(i, 2)), ps.pab),
        (indicator(&|i| yes(i, 0) && yes(i, 3)), ps.pad),
        (indicator(&|i| yes(i, 1) && yes(i, 2)), ps.pcb),
        (indicator(&|i| yes(i, 1) && yes(i, 3)), ps.pcd),
    ];
    let mut lp = LinearProgram::new(16);
    for (coeffs, rhs) in rows {
        lp.constrain(coeffs, Relation::Eq, rhs)?;
    }
    match lp.solve() {
        Ok(sol) => {
            let mut probabilities = [0.0; 16];
            probabilities.copy_from_slice(&sol.x);
            Ok(Feasibility::Feasible {
                witness: FourOutcomeJoint {
                    observables: ["A".into(), "C".into(), "B".into(), "D".into()],
                    probabilities,
                },
            })
        }
        Err(LpError::Infeasible { .. }) => Ok(Feasibility::Infeasible {
            certificate: most_violated_facet(ps),
        }),
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_8, SQRT_2};

    #[test]
    fn overlapping_halves_are_infeasible() {
        let ps = ProbabilitySet::new(0.5, 0.5, 0.5, 0.5, 0.5, 0.0).unwrap();
        match joint_feasibility(&ps).unwrap() {
            Feasibility::Infeasible { certificate } => {
                assert_eq!(certificate.family, FacetFamily::Ch);
                assert!((certificate.lhs - 1.5).abs() < 1e-12);
                assert!((certificate.rhs - 1.0).abs() < 1e-12);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn product_sets_are_feasible() {
        let (pa, pb, pc, pd) = (0.3, 0.7, 0.55, 0.1);
        let ps = ProbabilitySet::new(pa, pb, pa * pb, pa * pd, pc * pb, pc * pd).unwrap();
        let Feasibility::Feasible { witness } = joint_feasibility(&ps).unwrap() else {
            panic!("product set must be feasible");
        };
        assert!((witness.total() - 1.0).abs() < 1e-12);
        assert!(witness.probabilities.iter().all(|&p| p >= 0.0));
        assert!((witness.single(0) - pa).abs() < 1e-12);
        assert!((witness.pair(1, 3) - pc * pd).abs() < 1e-12);
    }

    #[test]
    fn ideal_quantum_values_are_infeasible() {
        let p = |phi: f64| 0.5 * phi.cos().powi(2);
        let f = p(FRAC_PI_8);
        let ps = ProbabilitySet::new(0.5, 0.5, f, f, f, p(3.0 * FRAC_PI_8)).unwrap();
        let Feasibility::Infeasible { certificate } = joint_feasibility(&ps).unwrap() else {
            panic!("quantum values must be infeasible");
        };
        assert!((certificate.lhs - (SQRT_2 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lower_ch_facet_certificate() {
        // p(A) + p(B) - CH combination = 1.25 > 1 with every bound satisfied
        let ps = ProbabilitySet::new(0.75, 0.75, 0.5, 0.0, 0.0, 0.25).unwrap();
        let Feasibility::Infeasible { certificate } = joint_feasibility(&ps).unwrap() else {
            panic!("expected infeasible");
        };
        assert_eq!(certificate.family, FacetFamily::Ch);
        assert!(certificate.inequality.starts_with("p(A) + p(B) - p(A,B)"));
    }
}
