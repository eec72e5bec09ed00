//! Correlations, CHSH statistics and counting errors from coincidence counts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Config;
use super::dataset::{CountDataset, CountRow};
use crate::error::{Error, Result};
use crate::inequality::{
    ch_report, s_statistic, CorrelationBasis, InequalityReport, ProbabilitySet,
};
use crate::quantum::v_b_from_s_star;
use crate::search::{CHSH_PAIRS, SIDE1_SETTINGS, SIDE2_SETTINGS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub settings: [String; 2],
    /// Relative analyzer angle, for the canonical pairs.
    pub phi: Option<f64>,
    pub coincidences: u64,
    /// Correlation over all emitted pairs; needs an absolute normalization.
    pub e: Option<f64>,
    pub e_err: Option<f64>,
    /// Correlation over detected coincidences.
    pub e_star: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    /// SHA-256 of the input bytes.
    pub input_sha256: String,
    pub config: Config,
    /// Generator seed, for synthetic input.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub pairs: Vec<PairResult>,
    pub s: Option<f64>,
    pub s_abs_err: Option<f64>,
    pub s_star: f64,
    pub s_err: f64,
    pub v_b: f64,
    pub verdicts: Vec<InequalityReport>,
    pub provenance: Provenance,
}

impl AnalysisReport {
    /// True when some violated verdict is a genuine Bell inequality.
    pub fn genuine_violation(&self) -> bool {
        self.verdicts.iter().any(|v| v.genuine && v.violated)
    }

    /// True when only auxiliary-assumption inequalities were evaluated.
    pub fn only_auxiliary(&self) -> bool {
        self.verdicts.iter().all(|v| !v.genuine)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `E* = (n++ + n-- - n+- - n-+) / n` with multinomial error `sqrt((1 - E*^2) / n)`.
fn renormalized(row: &CountRow) -> Result<(f64, f64)> {
    let n = row.coincidences();
    if n == 0 {
        return Err(Error::Dataset {
            line: row.line,
            message: format!(
                "zero coincidences for setting pair ({}, {})",
                row.setting_a, row.setting_b
            ),
        });
    }
    let n = n as f64;
    let e = (row.n_pp as f64 + row.n_mm as f64 - row.n_pm as f64 - row.n_mp as f64) / n;
    Ok((e, ((1.0 - e * e).max(0.0) / n).sqrt()))
}

fn emitted(row: &CountRow, cfg: &Config) -> Result<Option<f64>> {
    if let Some(n) = cfg.analysis.emitted_pairs {
        return Ok(Some(n as f64));
    }
    match (cfg.analysis.production_rate, row.duration) {
        (Some(r0), Some(t)) => Ok(Some(r0 * t)),
        (Some(_), None) => Err(Error::Dataset {
            line: row.line,
            message: "production_rate declared but row has no duration".into(),
        }),
        (None, _) => Ok(None),
    }
}

/// Correlation over `n_emitted` pairs; undetected pairs contribute zero.
fn absolute(row: &CountRow, n_emitted: f64) -> Result<(f64, f64)> {
    if (row.coincidences() as f64) > n_emitted {
        return Err(Error::Dataset {
            line: row.line,
            message: format!(
                "{} coincidences exceed {n_emitted} emitted pairs",
                row.coincidences()
            ),
        });
    }
    let q = row.coincidences() as f64 / n_emitted;
    let e = (row.n_pp as f64 + row.n_mm as f64 - row.n_pm as f64 - row.n_mp as f64) / n_emitted;
    Ok((e, ((q - e * e).max(0.0) / n_emitted).sqrt()))
}

pub fn run_analysis(ds: &CountDataset, cfg: &Config) -> Result<AnalysisReport> {
    if ds.is_empty() {
        return Err(Error::InvalidInput("dataset has no rows".into()));
    }
    let canonical: Vec<&CountRow> = CHSH_PAIRS
        .iter()
        .map(|&(x, y, _)| {
            ds.row(SIDE1_SETTINGS[x], SIDE2_SETTINGS[y]).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "missing canonical setting pair ({}, {}); need (A,B), (A,D), (C,B), (C,D)",
                    SIDE1_SETTINGS[x], SIDE2_SETTINGS[y]
                ))
            })
        })
        .collect::<Result<_>>()?;
    let angles = cfg.analysis.angles();

    let mut pairs = Vec::with_capacity(ds.rows().len());
    for row in ds.rows() {
        let (e_star, err) = renormalized(row)?;
        let (e, e_err) = match emitted(row, cfg)? {
            Some(n) => {
                let (e, err) = absolute(row, n)?;
                (Some(e), Some(err))
            }
            None => (None, None),
        };
        let phi = canonical
            .iter()
            .position(|c| c.line == row.line)
            .map(|k| angles[k]);
        pairs.push(PairResult {
            settings: [row.setting_a.clone(), row.setting_b.clone()],
            phi,
            coincidences: row.coincidences(),
            e,
            e_err,
            e_star,
            err,
        });
    }

    let canonical_results: Vec<&PairResult> = canonical
        .iter()
        .map(|c| {
            &pairs[ds
                .rows()
                .iter()
                .position(|r| r.line == c.line)
                .expect("row present")]
        })
        .collect();
    let e_star: Vec<f64> = canonical_results.iter().map(|p| p.e_star).collect();
    let star = s_statistic(
        e_star[0],
        e_star[1],
        e_star[2],
        e_star[3],
        CorrelationBasis::Renormalized,
    );
    let s_err = canonical_results
        .iter()
        .map(|p| p.err * p.err)
        .sum::<f64>()
        .sqrt();
    let mut verdicts = vec![star.clone()];

    let (mut s, mut s_abs_err) = (None, None);
    if canonical_results.iter().all(|p| p.e.is_some()) {
        let e: Vec<f64> = canonical_results.iter().map(|p| p.e.unwrap()).collect();
        // every emitted pair accounted for: the plain CHSH form is genuine
        let basis = if canonical
            .iter()
            .zip(&canonical_results)
            .all(|(row, p)| emitted(row, cfg).ok().flatten() == Some(p.coincidences as f64))
        {
            CorrelationBasis::Normalized
        } else {
            CorrelationBasis::Unnormalized
        };
        let plain = s_statistic(e[0], e[1], e[2], e[3], basis);
        s = Some(plain.lhs);
        s_abs_err = Some(
            canonical_results
                .iter()
                .map(|p| p.e_err.unwrap().powi(2))
                .sum::<f64>()
                .sqrt(),
        );
        verdicts.push(plain);
        if let Some(ps) = absolute_probability_set(&canonical, cfg)? {
            verdicts.insert(0, ch_report(&ps));
        }
    }

    Ok(AnalysisReport {
        pairs,
        s,
        s_abs_err,
        s_star: star.lhs,
        s_err,
        v_b: v_b_from_s_star(star.lhs),
        verdicts,
        provenance: Provenance {
            generator: concat!("bell-lhv ", env!("CARGO_PKG_VERSION")).to_string(),
            input_sha256: sha256_hex(ds.to_csv_string()?.as_bytes()),
            config: cfg.clone(),
            seed: ds.seed(),
        },
    })
}

/// Absolute `+` probabilities for CH; `None` unless every canonical row
/// carries both singles counts. Marginals pool the two rows sharing a setting.
fn absolute_probability_set(rows: &[&CountRow], cfg: &Config) -> Result<Option<ProbabilitySet>> {
    if rows
        .iter()
        .any(|r| r.singles_a.is_none() || r.singles_b.is_none())
    {
        return Ok(None);
    }
    let n: Vec<f64> = rows
        .iter()
        .map(|r| emitted(r, cfg).map(|n| n.expect("normalization declared")))
        .collect::<Result<_>>()?;
    // rows: AB, AD, CB, CD
    let pa = (rows[0].singles_a.unwrap() + rows[1].singles_a.unwrap()) as f64 / (n[0] + n[1]);
    let pb = (rows[0].singles_b.unwrap() + rows[2].singles_b.unwrap()) as f64 / (n[0] + n[2]);
    let joint = |k: usize| rows[k].n_pp as f64 / n[k];
    ProbabilitySet::new(pa, pb, joint(0), joint(1), joint(2), joint(3)).map(Some)
}
