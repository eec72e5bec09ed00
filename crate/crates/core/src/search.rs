//! Detection-loophole search over local strategy mixtures.
//!
//! Each side runs a deterministic strategy that answers every setting with
//! `+`, `-` or "undetected". Mixtures of strategy pairs are exactly the
//! factorizable behaviours with a non-detection outcome, so optimizing over
//! mixture weights is a linear program. The renormalized CHSH statistic is a
//! ratio; with the four coincidence totals constrained equal it becomes a
//! single linear-fractional objective, maximized by bisection on the target
//! value with one LP per step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{correlation, renormalized_correlation, ProbabilitySet, TwoChannelCounts};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::model::{FactorizableModel, ModelDocument, Side, TableDocument};

pub const SIDE1_SETTINGS: [&str; 2] = ["A", "C"];
pub const SIDE2_SETTINGS: [&str; 2] = ["B", "D"];
/// Setting pairs in CHSH order; the last enters with a minus sign.
pub const CHSH_PAIRS: [(usize, usize, f64); 4] =
    [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)];

const BISECTION_TOLERANCE: f64 = 1e-9;
const POSITIVE_GAP: f64 = 1e-12;
const MAX_SETTINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "u")]
    Undetected,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::Undetected];

    /// `+1`, `-1`, or `0` for no detection.
    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
            Outcome::Undetected => 0.0,
        }
    }

    pub fn detected(self) -> bool {
        self != Outcome::Undetected
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Undetected => 2,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
            Outcome::Undetected => "u",
        })
    }
}

/// One outcome per setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub side: Side,
    pub outcomes: Vec<Outcome>,
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// All `|alphabet|^n_settings` strategies, first setting most significant,
/// outcomes in the order given by `alphabet`.
pub fn enumerate_local_strategies(
    side: Side,
    n_settings: usize,
    alphabet: &[Outcome],
) -> Result<Vec<DeterministicStrategy>> {
    if n_settings == 0 || n_settings > MAX_SETTINGS {
        return Err(Error::InvalidInput(format!(
            "number of settings {n_settings} outside 1..={MAX_SETTINGS}"
        )));
    }
    if alphabet.is_empty() {
        return Err(Error::InvalidInput("empty outcome alphabet".into()));
    }
    let k = alphabet.len();
    let total = k.pow(n_settings as u32);
    Ok((0..total)
        .map(|mut idx| {
            let mut outcomes = vec![Outcome::Plus; n_settings];
            for slot in outcomes.iter_mut().rev() {
                *slot = alphabet[idx % k];
                idx /= k;
            }
            DeterministicStrategy { side, outcomes }
        })
        .collect())
}

/// Weights over ordered strategy pairs, index `i1 * n2 + i2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMixture {
    strategies1: Vec<DeterministicStrategy>,
    strategies2: Vec<DeterministicStrategy>,
    weights: Vec<f64>,
}

impl StrategyMixture {
    pub fn new(
        strategies1: Vec<DeterministicStrategy>,
        strategies2: Vec<DeterministicStrategy>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != strategies1.len() * strategies2.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} x {} strategy pairs",
                weights.len(),
                strategies1.len(),
                strategies2.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative mixture weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "mixture weights sum to {total}"
            )));
        }
        let n1 = strategies1.first().map_or(0, |s| s.outcomes.len());
        let n2 = strategies2.first().map_or(0, |s| s.outcomes.len());
        if strategies1
            .iter()
            .any(|s| s.outcomes.len() != n1 || s.side != Side::One)
            || strategies2
                .iter()
                .any(|s| s.outcomes.len() != n2 || s.side != Side::Two)
        {
            return Err(Error::InvalidInput("inconsistent strategy lists".into()));
        }
        Ok(Self {
            strategies1,
            strategies2,
            weights,
        })
    }

    /// Mixture over the canonical 9 x 9 CHSH strategy pairs.
    pub fn canonical(weights: Vec<f64>) -> Result<Self> {
        let (s1, s2) = canonical_strategies();
        Self::new(s1, s2, weights)
    }

    /// Every pair with equal weight.
    pub fn uniform(
        strategies1: Vec<DeterministicStrategy>,
        strategies2: Vec<DeterministicStrategy>,
    ) -> Result<Self> {
        let n = strategies1.len() * strategies2.len();
        Self::new(strategies1, strategies2, vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strategies(&self, side: Side) -> &[DeterministicStrategy] {
        match side {
            Side::One => &self.strategies1,
            Side::Two => &self.strategies2,
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, &DeterministicStrategy, &DeterministicStrategy)> {
        let n2 = self.strategies2.len();
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (w, &self.strategies1[k / n2], &self.strategies2[k % n2]))
    }

    /// One hidden-variable cell per strategy pair. Each setting `X` becomes
    /// two yes/no observables `X+` and `X-`.
    pub fn to_model(&self, settings1: &[&str], settings2: &[&str]) -> Result<FactorizableModel> {
        let expand = |names: &[&str]| -> Vec<String> {
            names
                .iter()
                .flat_map(|n| [format!("{n}+"), format!("{n}-")])
                .collect()
        };
        let row = |s: &DeterministicStrategy| -> Vec<f64> {
            s.outcomes
                .iter()
                .flat_map(|o| {
                    [
                        (*o == Outcome::Plus) as u8 as f64,
                        (*o == Outcome::Minus) as u8 as f64,
                    ]
                })
                .collect()
        };
        let mut cells = Vec::new();
        let mut table1 = Vec::new();
        let mut table2 = Vec::new();
        for (_, s1, s2) in self.pairs() {
            cells.push(format!("{s1}|{s2}"));
            table1.push(row(s1));
            table2.push(row(s2));
        }
        FactorizableModel::new(ModelDocument {
            cells,
            weights: self.weights.clone(),
            side1: TableDocument {
                settings: expand(settings1),
                table: table1,
            },
            side2: TableDocument {
                settings: expand(settings2),
                table: table2,
            },
        })
    }
}

pub fn canonical_strategies() -> (Vec<DeterministicStrategy>, Vec<DeterministicStrategy>) {
    (
        enumerate_local_strategies(Side::One, 2, &Outcome::ALL).expect("valid"),
        enumerate_local_strategies(Side::Two, 2, &Outcome::ALL).expect("valid"),
    )
}

/// Joint probabilities of `(side-1 outcome, side-2 outcome)` per setting
/// pair, indexed by `Outcome::index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureStatistics {
    /// `joint[x][y][a][b]`
    pub joint: Vec<Vec<[[f64; 3]; 3]>>,
}

impl MixtureStatistics {
    /// Detected-outcome block `(++, +-, -+, --)` at settings `(x, y)`.
    pub fn two_channel(&self, x: usize, y: usize) -> TwoChannelCounts {
        let j = &self.joint[x][y];
        TwoChannelCounts {
            ppp: j[0][0],
            ppm: j[0][1],
            pmp: j[1][0],
            pmm: j[1][1],
        }
    }

    /// Side-1 outcome distribution at `x`, computed from the pair `(x, y)`.
    pub fn side1_marginal(&self, x: usize, y: usize) -> [f64; 3] {
        let j = &self.joint[x][y];
        [0, 1, 2].map(|a| j[a].iter().sum())
    }

    /// Side-2 outcome distribution at `y`, computed from the pair `(x, y)`.
    pub fn side2_marginal(&self, x: usize, y: usize) -> [f64; 3] {
        let j = &self.joint[x][y];
        [0, 1, 2].map(|b| j.iter().map(|row| row[b]).sum())
    }

    pub fn detection_probability(&self, side: Side, setting: usize) -> f64 {
        match side {
            Side::One => {
                let m = self.side1_marginal(setting, 0);
                m[0] + m[1]
            }
            Side::Two => {
                let m = self.side2_marginal(0, setting);
                m[0] + m[1]
            }
        }
    }

    /// Largest change of a one-side marginal under a change of the remote setting.
    pub fn parameter_independence_gap(&self) -> f64 {
        let n1 = self.joint.len();
        let n2 = self.joint.first().map_or(0, Vec::len);
        let mut gap: f64 = 0.0;
        for x in 0..n1 {
            let reference = self.side1_marginal(x, 0);
            for y in 1..n2 {
                let m = self.side1_marginal(x, y);
                for k in 0..3 {
                    gap = gap.max((m[k] - reference[k]).abs());
                }
            }
        }
        for y in 0..n2 {
            let reference = self.side2_marginal(0, y);
            for x in 1..n1 {
                let m = self.side2_marginal(x, y);
                for k in 0..3 {
                    gap = gap.max((m[k] - reference[k]).abs());
                }
            }
        }
        gap
    }

    /// CH quantities with "yes" meaning a `+` detection; requires 2 x 2 settings.
    pub fn plus_probability_set(&self) -> Result<ProbabilitySet> {
        let pa = self.side1_marginal(0, 0)[0];
        let pb = self.side2_marginal(0, 0)[0];
        ProbabilitySet::new(
            pa,
            pb,
            self.joint[0][0][0][0],
            self.joint[0][1][0][0],
            self.joint[1][0][0][0],
            self.joint[1][1][0][0],
        )
    }

    /// `S*` over the four CHSH pairs.
    pub fn s_star(&self) -> Result<f64> {
        CHSH_PAIRS.iter().try_fold(0.0, |acc, &(x, y, sign)| {
            Ok(acc + sign * renormalized_correlation(&self.two_channel(x, y))?)
        })
    }

    /// `S` with plain (non-renormalized) correlations, undetected counted as 0.
    pub fn s_plain(&self) -> f64 {
        CHSH_PAIRS
            .iter()
            .map(|&(x, y, sign)| sign * correlation(&self.two_channel(x, y)))
            .sum()
    }
}

pub fn mixture_statistics(m: &StrategyMixture) -> MixtureStatistics {
    let n1 = m.strategies1.first().map_or(0, |s| s.outcomes.len());
    let n2 = m.strategies2.first().map_or(0, |s| s.outcomes.len());
    let mut joint = vec![vec![[[0.0; 3]; 3]; n2]; n1];
    for (w, s1, s2) in m.pairs() {
        if w == 0.0 {
            continue;
        }
        for (x, o1) in s1.outcomes.iter().enumerate() {
            for (y, o2) in s2.outcomes.iter().enumerate() {
                joint[x][y][o1.index()][o2.index()] += w;
            }
        }
    }
    MixtureStatistics { joint }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub eta: f64,
    pub s_star_max: f64,
    /// Plain `S` of the same mixture; bounded by 2 for any local mixture.
    pub genuine_s: f64,
    /// Mixture weights in canonical strategy-pair order.
    pub weights: Vec<f64>,
    /// Coincidence probability per CHSH pair (AB, AD, CB, CD).
    pub coincidences: [f64; 4],
    /// Final bisection bracket on the optimum.
    pub bracket: [f64; 2],
}

impl SearchResult {
    pub fn mixture(&self) -> Result<StrategyMixture> {
        StrategyMixture::canonical(self.weights.clone())
    }

    pub fn to_model(&self) -> Result<FactorizableModel> {
        self.mixture()?.to_model(&SIDE1_SETTINGS, &SIDE2_SETTINGS)
    }
}

/// Linear coefficient rows of the search LP over the 81 canonical pairs.
struct SearchRows {
    numerators: [Vec<f64>; 4],
    coincidences: [Vec<f64>; 4],
    detection1: [Vec<f64>; 2],
    detection2: [Vec<f64>; 2],
}

fn search_rows(s1: &[DeterministicStrategy], s2: &[DeterministicStrategy]) -> SearchRows {
    let n = s1.len() * s2.len();
    let mut rows = SearchRows {
        numerators: std::array::from_fn(|_| vec![0.0; n]),
        coincidences: std::array::from_fn(|_| vec![0.0; n]),
        detection1: std::array::from_fn(|_| vec![0.0; n]),
        detection2: std::array::from_fn(|_| vec![0.0; n]),
    };
    for (i1, a) in s1.iter().enumerate() {
        for (i2, b) in s2.iter().enumerate() {
            let k = i1 * s2.len() + i2;
            for (p, &(x, y, _)) in CHSH_PAIRS.iter().enumerate() {
                let (oa, ob) = (a.outcomes[x], b.outcomes[y]);
                rows.numerators[p][k] = oa.value() * ob.value();
                rows.coincidences[p][k] = (oa.detected() && ob.detected()) as u8 as f64;
            }
            for s in 0..2 {
                rows.detection1[s][k] = a.outcomes[s].detected() as u8 as f64;
                rows.detection2[s][k] = b.outcomes[s].detected() as u8 as f64;
            }
        }
    }
    rows
}

/// Feasible set: normalized weights, detection probability `eta` for every
/// setting on both sides, equal coincidence totals on the four pairs.
fn base_program(rows: &SearchRows, eta: f64) -> Result<LinearProgram> {
    let n = rows.numerators[0].len();
    let mut lp = LinearProgram::new(n);
    lp.constrain(vec![1.0; n], Relation::Eq, 1.0)?;
    for d in rows.detection1.iter().chain(&rows.detection2) {
        lp.constrain(d.clone(), Relation::Eq, eta)?;
    }
    for c in &rows.coincidences[1..] {
        let diff: Vec<f64> = rows.coincidences[0]
            .iter()
            .zip(c)
            .map(|(a, b)| a - b)
            .collect();
        lp.constrain(diff, Relation::Eq, 0.0)?;
    }
    Ok(lp)
}

/// Maximizes `S*` over local strategy mixtures at detection efficiency `eta`.
pub fn maximize_s_star(eta: f64) -> Result<SearchResult> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "efficiency {eta} outside (0, 1]"
        )));
    }
    let (s1, s2) = canonical_strategies();
    let rows = search_rows(&s1, &s2);
    let base = base_program(&rows, eta)?;

    let signed_numerator: Vec<f64> = (0..rows.numerators[0].len())
        .map(|k| {
            CHSH_PAIRS
                .iter()
                .enumerate()
                .map(|(p, &(_, _, sign))| sign * rows.numerators[p][k])
                .sum()
        })
        .collect();

    // F(t) = max (sum_k sign_k N_k - t D); positive iff some mixture has S* > t.
    let probe = |t: f64| -> Result<(f64, Vec<f64>)> {
        let mut lp = base.clone();
        let objective = signed_numerator
            .iter()
            .zip(&rows.coincidences[0])
            .map(|(n, d)| n - t * d)
            .collect();
        lp.maximize(objective)?;
        match lp.solve() {
            Ok(sol) => Ok((sol.objective, sol.x)),
            Err(LpError::Infeasible { residual }) => Err(Error::InvalidInput(format!(
                "efficiency constraints infeasible at eta = {eta} (residual {residual:.3e})"
            ))),
            Err(e) => Err(e.into()),
        }
    };

    let (mut lo, mut hi) = (-4.0, 4.0);
    let mut best: Option<Vec<f64>> = None;
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let (value, x) = probe(mid)?;
        if value > POSITIVE_GAP {
            lo = mid;
            best = Some(x);
        } else {
            hi = mid;
        }
    }
    let x = best.ok_or_else(|| {
        Error::InvalidInput(format!(
            "no mixture with coincidences exists at eta = {eta}"
        ))
    })?;

    let total: f64 = x.iter().sum();
    let weights: Vec<f64> = x.iter().map(|w| w / total).collect();
    let mixture = StrategyMixture::new(s1, s2, weights)?;
    let stats = mixture_statistics(&mixture);
    let coincidences = std::array::from_fn(|p| {
        let (x, y, _) = CHSH_PAIRS[p];
        stats.two_channel(x, y).total()
    });
    Ok(SearchResult {
        eta,
        s_star_max: stats.s_star()?,
        genuine_s: stats.s_plain(),
        weights: mixture.weights,
        coincidences,
        bracket: [lo, hi],
    })
}
