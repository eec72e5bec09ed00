//! Dense two-phase simplex for the small linear programs used by the
//! feasibility check and the detection-loophole search.
//!
//! Problems here have at most a few hundred columns and a few dozen rows, so
//! a dense tableau with Bland's anti-cycling rule is both fast enough and
//! robust against the heavy degeneracy of probability-simplex constraints.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("infeasible (phase-one residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("objective unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("constraint has {got} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `optimize c.x` subject to linear constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    maximize: bool,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    /// A pure feasibility problem (zero objective) over `n_vars` non-negative variables.
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            maximize: false,
            constraints: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn maximize(&mut self, objective: Vec<f64>) -> Result<&mut Self, LpError> {
        self.set_objective(objective, true)
    }

    pub fn minimize(&mut self, objective: Vec<f64>) -> Result<&mut Self, LpError> {
        self.set_objective(objective, false)
    }

    fn set_objective(&mut self, objective: Vec<f64>, maximize: bool) -> Result<&mut Self, LpError> {
        if objective.len() != self.n_vars {
            return Err(LpError::DimensionMismatch {
                expected: self.n_vars,
                got: objective.len(),
            });
        }
        self.objective = objective;
        self.maximize = maximize;
        Ok(self)
    }

    pub fn constrain(
        &mut self,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> Result<&mut Self, LpError> {
        if coeffs.len() != self.n_vars {
            return Err(LpError::DimensionMismatch {
                expected: self.n_vars,
                got: coeffs.len(),
            });
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(self)
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        let mut tableau = Tableau::build(self);
        tableau.phase_one()?;
        let mut cost = vec![0.0; tableau.n_cols];
        for (c, &o) in cost.iter_mut().zip(&self.objective) {
            *c = if self.maximize { -o } else { o };
        }
        tableau.optimize(&cost, false)?;
        let x = tableau.primal(self.n_vars);
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Solution { x, objective })
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars;
        let normalized: Vec<Constraint> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    Constraint {
                        coeffs: c.coeffs.iter().map(|a| -a).collect(),
                        relation: match c.relation {
                            Relation::Le => Relation::Ge,
                            Relation::Ge => Relation::Le,
                            Relation::Eq => Relation::Eq,
                        },
                        rhs: -c.rhs,
                    }
                } else {
                    c.clone()
                }
            })
            .collect();

        let n_slack = normalized
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let n_artificial = normalized
            .iter()
            .filter(|c| c.relation != Relation::Le)
            .count();
        let first_artificial = n + n_slack;
        let n_cols = first_artificial + n_artificial;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut slack = n;
        let mut artificial = first_artificial;
        for c in &normalized {
            let mut row = vec![0.0; n_cols + 1];
            row[..n].copy_from_slice(&c.coeffs);
            row[n_cols] = c.rhs;
            match c.relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[artificial] = 1.0;
                    basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    row[artificial] = 1.0;
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            rows.push(row);
        }

        Self {
            rows,
            basis,
            n_cols,
            first_artificial,
        }
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        if self.first_artificial == self.n_cols {
            return Ok(());
        }
        let mut cost = vec![0.0; self.n_cols];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        self.optimize(&cost, true)?;
        let residual: f64 = self
            .basis
            .iter()
            .zip(&self.rows)
            .filter(|(&b, _)| b >= self.first_artificial)
            .map(|(_, row)| row[self.n_cols])
            .sum();
        if residual > FEASIBILITY_TOL {
            return Err(LpError::Infeasible { residual });
        }

        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linearly dependent and get dropped.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let pivot_col =
                    (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > PIVOT_EPS);
                match pivot_col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        Ok(())
    }

    /// Minimizes `cost` from the current basic feasible solution.
    fn optimize(&mut self, cost: &[f64], allow_artificial: bool) -> Result<(), LpError> {
        let usable = if allow_artificial {
            self.n_cols
        } else {
            self.first_artificial
        };
        for _ in 0..MAX_ITERATIONS {
            // Bland's rule: lowest-index column with negative reduced cost.
            let entering = (0..usable).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(j) = entering else {
                return Ok(());
            };

            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_EPS {
                    let ratio = row[self.n_cols] / row[j];
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - PIVOT_EPS
                                || (ratio <= best + PIVOT_EPS && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(i, j);
        }
        Err(LpError::IterationLimit)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    fn primal(&self, n_vars: usize) -> Vec<f64> {
        let mut x = vec![0.0; n_vars];
        for (&b, row) in self.basis.iter().zip(&self.rows) {
            if b < n_vars {
                x[b] = row[self.n_cols].max(0.0);
            }
        }
        x
    }
}
