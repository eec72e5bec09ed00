//! Bell-type inequalities and their verdicts.
//!
//! Every verdict carries a `genuine` flag: `true` only when the inequality
//! follows from factorizability alone (CH, and CHSH on correlations whose
//! four outcome probabilities sum to one). Renormalized CHSH and the
//! no-enhancement form are auxiliary-assumption inequalities; violating them
//! says nothing about local realism by itself.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probabilities derived from data.
pub const DATA_TOLERANCE: f64 = 1e-9;

/// `p(A), p(B), p(A,B), p(A,D), p(C,B), p(C,D)`; A, C on side 1 and B, D on side 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySet {
    pub pa: f64,
    pub pb: f64,
    pub pab: f64,
    pub pad: f64,
    pub pcb: f64,
    pub pcd: f64,
}

impl ProbabilitySet {
    pub fn new(pa: f64, pb: f64, pab: f64, pad: f64, pcb: f64, pcd: f64) -> Result<Self> {
        let set = Self {
            pa,
            pb,
            pab,
            pad,
            pcb,
            pcd,
        };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<()> {
        let named = [
            ("p(A)", self.pa),
            ("p(B)", self.pb),
            ("p(A,B)", self.pab),
            ("p(A,D)", self.pad),
            ("p(C,B)", self.pcb),
            ("p(C,D)", self.pcd),
        ];
        for (name, v) in named {
            if !(-DATA_TOLERANCE..=1.0 + DATA_TOLERANCE).contains(&v) {
                return Err(Error::InvalidProbabilitySet(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        let pairs = [
            ("p(A,B)", self.pab, self.pa.min(self.pb)),
            ("p(A,D)", self.pad, self.pa),
            ("p(C,B)", self.pcb, self.pb),
        ];
        for (name, v, bound) in pairs {
            if v > bound + DATA_TOLERANCE {
                return Err(Error::InvalidProbabilitySet(format!(
                    "{name} = {v} exceeds its marginal {bound}"
                )));
            }
        }
        Ok(())
    }

    /// `p(A,B) + p(A,D) + p(C,B) - p(C,D)`, shared by CH and the no-enhancement form.
    pub fn ch_combination(&self) -> f64 {
        self.pab + self.pad + self.pcb - self.pcd
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.pa, self.pb, self.pab, self.pad, self.pcb, self.pcd]
    }
}

/// Outcome probabilities (or counts) for `(+,+), (+,-), (-,+), (-,-)` at one setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoChannelCounts {
    pub ppp: f64,
    pub ppm: f64,
    pub pmp: f64,
    pub pmm: f64,
}

impl TwoChannelCounts {
    pub fn new(ppp: f64, ppm: f64, pmp: f64, pmm: f64) -> Result<Self> {
        let tc = Self { ppp, ppm, pmp, pmm };
        if tc.as_array().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "outcome entries must be non-negative, got {:?}",
                tc.as_array()
            )));
        }
        Ok(tc)
    }

    pub fn from_counts(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Self {
        Self {
            ppp: n_pp as f64,
            ppm: n_pm as f64,
            pmp: n_mp as f64,
            pmm: n_mm as f64,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ppp, self.ppm, self.pmp, self.pmm]
    }

    pub fn total(&self) -> f64 {
        self.ppp + self.ppm + self.pmp + self.pmm
    }

    /// `1 - total`; zero when the four outcomes exhaust all pairs.
    pub fn deficit(&self) -> f64 {
        1.0 - self.total()
    }

    pub fn is_normalized(&self) -> bool {
        self.deficit().abs() <= DATA_TOLERANCE
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ppp: self.ppp * factor,
            ppm: self.ppm * factor,
            pmp: self.pmp * factor,
            pmm: self.pmm * factor,
        }
    }
}

/// `E = p++ + p-- - p+- - p-+`, without renormalization.
pub fn correlation(tc: &TwoChannelCounts) -> f64 {
    tc.ppp + tc.pmm - tc.ppm - tc.pmp
}

/// `E* = (p++ + p-- - p+- - p-+) / (p++ + p-- + p+- + p-+)`.
pub fn renormalized_correlation(tc: &TwoChannelCounts) -> Result<f64> {
    let total = tc.total();
    if total <= 0.0 {
        return Err(Error::UndefinedDenominator);
    }
    Ok(correlation(tc) / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InequalityName {
    #[serde(rename = "CH")]
    Ch,
    #[serde(rename = "CHSH")]
    Chsh,
    #[serde(rename = "CHSH-star")]
    ChshStar,
    #[serde(rename = "FC")]
    Fc,
}

impl fmt::Display for InequalityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityName::Ch => "CH",
            InequalityName::Chsh => "CHSH",
            InequalityName::ChshStar => "CHSH-star",
            InequalityName::Fc => "FC",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: InequalityName,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
    pub genuine: bool,
}

impl InequalityReport {
    /// Builds a `lhs <= rhs` verdict.
    pub fn new(name: InequalityName, lhs: f64, rhs: f64, genuine: bool) -> Self {
        let margin = rhs - lhs;
        Self {
            name,
            lhs,
            rhs,
            margin,
            violated: margin < 0.0,
            genuine,
        }
    }

    /// One human-readable verdict line.
    pub fn verdict_line(&self) -> String {
        let status = if self.violated {
            "VIOLATED"
        } else {
            "fulfilled"
        };
        let kind = if self.genuine {
            "genuine Bell inequality (local realism alone)".to_string()
        } else {
            format!(
                "not a genuine Bell inequality ({})",
                self.auxiliary_assumption()
            )
        };
        format!(
            "{}: lhs = {:.6e}, rhs = {:.6e}, margin = {:.6e}: {status}; {kind}",
            self.name, self.lhs, self.rhs, self.margin
        )
    }

    fn auxiliary_assumption(&self) -> &'static str {
        match self.name {
            InequalityName::ChshStar => "requires fair sampling of detected pairs",
            InequalityName::Fc => "requires the no-enhancement assumption",
            InequalityName::Chsh => "outcome probabilities do not sum to one",
            InequalityName::Ch => "",
        }
    }
}

/// `p(A,B) + p(A,D) + p(C,B) - p(C,D) <= p(A) + p(B)`.
pub fn ch_report(ps: &ProbabilitySet) -> InequalityReport {
    InequalityReport::new(InequalityName::Ch, ps.ch_combination(), ps.pa + ps.pb, true)
}

/// How the four correlations entering S were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationBasis {
    /// Outcome probabilities sum to one: S <= 2 follows from local realism.
    Normalized,
    /// Plain correlations whose outcome probabilities do not exhaust all pairs.
    Unnormalized,
    /// Divided by the coincidence total (`E*`).
    Renormalized,
}

/// `S = E(A,B) + E(A,D) + E(C,B) - E(C,D) <= 2`.
pub fn s_statistic(
    e_ab: f64,
    e_ad: f64,
    e_cb: f64,
    e_cd: f64,
    basis: CorrelationBasis,
) -> InequalityReport {
    let name = match basis {
        CorrelationBasis::Renormalized => InequalityName::ChshStar,
        _ => InequalityName::Chsh,
    };
    InequalityReport::new(
        name,
        e_ab + e_ad + e_cb - e_cd,
        2.0,
        basis == CorrelationBasis::Normalized,
    )
}

/// No-enhancement form: same left side as CH, right side `p(A,inf) + p(inf,B)`
/// (coincidence probabilities with one polarizer removed).
pub fn fc_report(ps: &ProbabilitySet, p_a_inf: f64, p_inf_b: f64) -> InequalityReport {
    InequalityReport::new(
        InequalityName::Fc,
        ps.ch_combination(),
        p_a_inf + p_inf_b,
        false,
    )
}

/// Single-channel quantities recovered from normalized two-channel outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntries {
    /// `p(X,Y) = p++`
    pub pxy: f64,
    /// `p+- = p(X) - p(X,Y)`
    pub p_pm: f64,
    /// `p-- = 1 - p(Y) - p+-`
    pub p_mm: f64,
}

impl ChannelEntries {
    /// Rebuilds the four outcome probabilities given the same marginals.
    pub fn to_counts(&self, px: f64, py: f64) -> TwoChannelCounts {
        let ppm = px - self.pxy;
        let pmm = 1.0 - py - ppm;
        TwoChannelCounts {
            ppp: self.pxy,
            ppm,
            pmp: 1.0 - self.pxy - ppm - pmm,
            pmm,
        }
    }
}

/// Converts normalized two-channel outcomes into single-channel entries and
/// checks them against the supplied marginals `p(X) = p++ + p+-`, `p(Y) = p++ + p-+`.
pub fn channel_conversion(tc: &TwoChannelCounts, px: f64, py: f64) -> Result<ChannelEntries> {
    if !tc.is_normalized() {
        return Err(Error::NormalizationViolated {
            deficit: tc.deficit(),
        });
    }
    let entries = ChannelEntries {
        pxy: tc.ppp,
        p_pm: px - tc.ppp,
        p_mm: 1.0 - py - (px - tc.ppp),
    };
    if (entries.p_pm - tc.ppm).abs() > DATA_TOLERANCE
        || (entries.p_mm - tc.pmm).abs() > DATA_TOLERANCE
    {
        return Err(Error::InvalidInput(format!(
            "marginals p(X) = {px}, p(Y) = {py} inconsistent with outcomes {:?}",
            tc.as_array()
        )));
    }
    Ok(entries)
}
