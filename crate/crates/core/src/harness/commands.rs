//! Subcommand implementations. Each returns a value the CLI serializes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::analysis::{run_analysis, sha256_hex, AnalysisReport};
use super::config::Config;
use super::dataset::{ingest_counts, CountDataset};
use super::report::emit_report;
use crate::error::{Error, Result};
use crate::feasibility::{joint_feasibility, Feasibility};
use crate::inequality::{
    ch_report, fc_report, renormalized_correlation, s_statistic, CorrelationBasis,
    InequalityReport, ProbabilitySet,
};
use crate::kinematics::{spacelike_constraints, KinematicsInput, SpacelikeConstraints};
use crate::model::{validate_model, FactorizableModel, ModelDocument, ValidationReport};
use crate::quantum::{
    bi1_min_efficiency, bi_margin, cascade_bi_maximum, cascade_rates, optimal_angles,
    two_channel_rates, CascadeMaximum, PdcConfig,
};
use crate::sampling::{sample_counts, PairDistribution};
use crate::search::{maximize_s_star, mixture_statistics, SearchResult, StrategyMixture};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub validation: ValidationReport,
    /// Present when the model is valid and defines settings A, C and B, D.
    pub probabilities: Option<ProbabilitySet>,
    pub ch: Option<InequalityReport>,
    pub feasibility: Option<Feasibility>,
}

impl ValidateOutput {
    pub fn is_valid(&self) -> bool {
        self.validation.is_valid()
    }
}

pub fn validate(model_json: &str) -> Result<ValidateOutput> {
    let doc: ModelDocument = serde_json::from_str(model_json)?;
    let validation = validate_model(&doc);
    let mut out = ValidateOutput {
        validation,
        probabilities: None,
        ch: None,
        feasibility: None,
    };
    if !out.is_valid() {
        return Ok(out);
    }
    let model = FactorizableModel::new(doc)?;
    if let Ok(ps) = model.probability_set("A", "C", "B", "D") {
        out.ch = Some(ch_report(&ps));
        out.feasibility = Some(joint_feasibility(&ps)?);
        out.probabilities = Some(ps);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadePrediction {
    pub eta: f64,
    pub v: f64,
    pub alpha: f64,
    /// Single and coincidence probabilities per emitted pair at the optimal angles.
    pub probabilities: ProbabilitySet,
    pub ch: InequalityReport,
    pub fc: InequalityReport,
    /// CH divided by `p(A) / 2`: `alpha eta (1 + sqrt2 V) <= 2`.
    pub bi_lhs: f64,
    pub bi_fulfilled: bool,
    /// FC divided by `p(A,inf) / 2`: `1 + sqrt2 V <= 2`.
    pub fc_reduced: f64,
    /// Largest `bi_lhs` over the lens aperture, when `zeta` is given.
    pub aperture_maximum: Option<CascadeMaximum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdcPrediction {
    pub config: PdcConfig,
    pub angles: [f64; 4],
    pub e_star: [f64; 4],
    pub chsh_star: InequalityReport,
    /// Detector efficiency above which CH can fail; absent for `V <= sqrt2/2`.
    pub min_efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub cascade: Option<CascadePrediction>,
    pub pdc: Option<PdcPrediction>,
    pub kinematics: Option<SpacelikeConstraints>,
}

pub fn predict(cfg: &Config) -> Result<Prediction> {
    if cfg.cascade.is_none() && cfg.pdc.is_none() && cfg.kinematics.is_none() {
        return Err(Error::InvalidInput(
            "predict needs a [cascade], [pdc] or [kinematics] section".into(),
        ));
    }
    let (angles, _) = optimal_angles();
    let cascade = cfg
        .cascade
        .as_ref()
        .map(|section| -> Result<CascadePrediction> {
            let o = section.optics()?;
            let rate = |phi: f64| cascade_rates(o.eta, o.v, o.alpha, 1.0, phi);
            let single = rate(0.0).r1;
            let joint = angles.phi.map(|phi| rate(phi).r12);
            let ps = ProbabilitySet::new(single, single, joint[0], joint[1], joint[2], joint[3])?;
            let ch = ch_report(&ps);
            // one polarizer removed: the coincidence probability doubles
            let p_inf = 0.5 * o.alpha * o.eta * o.eta;
            let fc = fc_report(&ps, p_inf, p_inf);
            let bi = bi_margin(o.alpha, o.eta, o.v);
            let aperture_maximum = match section.zeta {
                Some(zeta) if zeta > 0.0 => Some(cascade_bi_maximum(zeta, false)?),
                _ => None,
            };
            Ok(CascadePrediction {
                eta: o.eta,
                v: o.v,
                alpha: o.alpha,
                probabilities: ps,
                bi_lhs: bi.lhs,
                bi_fulfilled: bi.fulfilled,
                fc_reduced: 2.0 * fc.lhs / fc.rhs,
                ch,
                fc,
                aperture_maximum,
            })
        })
        .transpose()?;
    let pdc = cfg
        .pdc
        .as_ref()
        .map(|section| -> Result<PdcPrediction> {
            let config = section.config()?;
            let mut e = [0.0; 4];
            for (slot, phi) in e.iter_mut().zip(angles.phi) {
                *slot = renormalized_correlation(&two_channel_rates(&config, phi))?;
            }
            Ok(PdcPrediction {
                config,
                angles: angles.phi,
                chsh_star: s_statistic(e[0], e[1], e[2], e[3], CorrelationBasis::Renormalized),
                e_star: e,
                min_efficiency: bi1_min_efficiency(config.v).ok(),
            })
        })
        .transpose()?;
    let kinematics = cfg
        .kinematics
        .as_ref()
        .map(|k| {
            let mut input = KinematicsInput::new(k.mass, k.speed)?;
            input.separation = k.separation;
            input.measure_time = k.measure_time;
            spacelike_constraints(&input)
        })
        .transpose()?;
    Ok(Prediction {
        cascade,
        pdc,
        kinematics,
    })
}

/// Reads a count file and analyzes it; the digest covers the raw file bytes.
pub fn analyze(path: &Path, cfg: &Config) -> Result<AnalysisReport> {
    let bytes = std::fs::read(path)?;
    let ds = ingest_counts(path)?;
    let mut report = run_analysis(&ds, cfg)?;
    report.provenance.input_sha256 = sha256_hex(&bytes);
    Ok(report)
}

/// Re-renders a JSON analysis report.
pub fn report(path: &Path, format: &str) -> Result<String> {
    let r: AnalysisReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    emit_report(&r, format)
}

pub fn search(cfg: &Config) -> Result<Vec<SearchResult>> {
    cfg.search
        .eta
        .iter()
        .map(|&eta| maximize_s_star(eta))
        .collect()
}

#[derive(Debug, Deserialize)]
struct MixtureWeights {
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MixtureFile {
    One(MixtureWeights),
    Many(Vec<MixtureWeights>),
}

/// Parses a search output (one result, or a list with exactly one entry).
pub fn read_mixture(json: &str) -> Result<StrategyMixture> {
    let weights = match serde_json::from_str::<MixtureFile>(json)? {
        MixtureFile::One(m) => m.weights,
        MixtureFile::Many(mut list) if list.len() == 1 => list.remove(0).weights,
        MixtureFile::Many(list) => {
            return Err(Error::InvalidInput(format!(
                "mixture file holds {} results; extract one",
                list.len()
            )))
        }
    };
    StrategyMixture::canonical(weights)
}

/// Synthetic counts from a strategy mixture, or from the `[pdc]` source
/// at the analysis angles when no mixture is given.
pub fn simulate(
    cfg: &Config,
    mixture: Option<&StrategyMixture>,
    seed: Option<u64>,
) -> Result<CountDataset> {
    let seed = seed.unwrap_or(cfg.simulate.seed);
    match mixture {
        Some(m) => {
            let dists = PairDistribution::from_mixture(&mixture_statistics(m))?;
            sample_counts(
                &dists,
                cfg.simulate.n_pairs,
                seed,
                cfg.analysis.production_rate,
            )
        }
        None => {
            let section = cfg.pdc.as_ref().ok_or_else(|| {
                Error::InvalidInput("simulate needs a [pdc] section or a mixture file".into())
            })?;
            let pdc = section.config()?;
            let labels = [("A", "B"), ("A", "D"), ("C", "B"), ("C", "D")];
            let dists = labels
                .iter()
                .zip(cfg.analysis.angles())
                .map(|(&(a, b), phi)| PairDistribution::pdc(a, b, pdc.v, pdc.eta, phi))
                .collect::<Result<Vec<_>>>()?;
            sample_counts(&dists, cfg.simulate.n_pairs, seed, Some(pdc.r0))
        }
    }
}
