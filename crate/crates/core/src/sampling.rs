//! Reproducible synthetic count datasets.
//!
//! Each emitted pair lands in one of nine cells `(side-1 outcome, side-2
//! outcome)` with outcomes `+`, `-`, or undetected. Counts per setting pair
//! are one multinomial draw, generated as a chain of conditional binomials
//! from a `ChaCha8Rng` seeded with `seed_from_u64(seed)`. Setting pairs are
//! drawn in the order given, from a single stream, so identical inputs and
//! seed give identical counts on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::dataset::{CountDataset, CountRow};
use crate::inequality::{TwoChannelCounts, DATA_TOLERANCE};
use crate::search::{MixtureStatistics, CHSH_PAIRS, SIDE1_SETTINGS, SIDE2_SETTINGS};

/// Outcome distribution for one setting pair; `probs[a][b]` with index
/// 0 = `+`, 1 = `-`, 2 = undetected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    pub setting_a: String,
    pub setting_b: String,
    pub probs: [[f64; 3]; 3],
}

impl PairDistribution {
    pub fn new(setting_a: &str, setting_b: &str, probs: [[f64; 3]; 3]) -> Result<Self> {
        let flat = probs.iter().flatten();
        if flat.clone().any(|&p| !(p >= -DATA_TOLERANCE)) {
            return Err(Error::InvalidInput(format!(
                "negative outcome probability in {probs:?}"
            )));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > DATA_TOLERANCE {
            return Err(Error::NormalizationViolated {
                deficit: 1.0 - total,
            });
        }
        Ok(Self {
            setting_a: setting_a.to_string(),
            setting_b: setting_b.to_string(),
            probs,
        })
    }

    /// Every pair yields a coincidence; `tc` must sum to one.
    pub fn from_two_channel(
        setting_a: &str,
        setting_b: &str,
        tc: &TwoChannelCounts,
    ) -> Result<Self> {
        Self::new(
            setting_a,
            setting_b,
            [[tc.ppp, tc.ppm, 0.0], [tc.pmp, tc.pmm, 0.0], [0.0; 3]],
        )
    }

    /// Two-channel down-conversion source with per-photon detection
    /// efficiency `eta`: detected outcomes `eta^2 (1 +- V cos 2phi) / 4`.
    /// At `eta = 1` this is the normalized four-rate prediction.
    pub fn pdc(setting_a: &str, setting_b: &str, v: f64, eta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!(
                "visibility {v} and efficiency {eta} must lie in [0, 1]"
            )));
        }
        let c = v * (2.0 * phi).cos();
        let same = 0.25 * eta * eta * (1.0 + c);
        let diff = 0.25 * eta * eta * (1.0 - c);
        let single = 0.5 * eta * (1.0 - eta);
        let none = (1.0 - eta) * (1.0 - eta);
        Self::new(
            setting_a,
            setting_b,
            [
                [same, diff, single],
                [diff, same, single],
                [single, single, none],
            ],
        )
    }

    /// The four CHSH pairs of a strategy mixture.
    pub fn from_mixture(stats: &MixtureStatistics) -> Result<Vec<Self>> {
        CHSH_PAIRS
            .iter()
            .map(|&(x, y, _)| Self::new(SIDE1_SETTINGS[x], SIDE2_SETTINGS[y], stats.joint[x][y]))
            .collect()
    }
}

/// Multinomial counts for `n_pairs` emitted pairs per setting pair.
///
/// Singles count `+` detections on each side; `duration` is `n_pairs / r0`
/// when a production rate is supplied.
pub fn sample_counts(
    distributions: &[PairDistribution],
    n_pairs: u64,
    seed: u64,
    r0: Option<f64>,
) -> Result<CountDataset> {
    if n_pairs == 0 {
        return Err(Error::InvalidInput("n_pairs must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(distributions.len());
    for (i, dist) in distributions.iter().enumerate() {
        let cells: Vec<f64> = dist.probs.iter().flatten().map(|p| p.max(0.0)).collect();
        let counts = multinomial(&mut rng, n_pairs, &cells)?;
        let n = |a: usize, b: usize| counts[3 * a + b];
        rows.push(CountRow {
            setting_a: dist.setting_a.clone(),
            setting_b: dist.setting_b.clone(),
            n_pp: n(0, 0),
            n_pm: n(0, 1),
            n_mp: n(1, 0),
            n_mm: n(1, 1),
            singles_a: Some(n(0, 0) + n(0, 1) + n(0, 2)),
            singles_b: Some(n(0, 0) + n(1, 0) + n(2, 0)),
            duration: r0.map(|r| n_pairs as f64 / r),
            line: i as u64 + 2,
        });
    }
    CountDataset::new(rows, Some(seed))
}

fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut remaining_n = n;
    let mut remaining_mass: f64 = probs.iter().sum();
    let mut out = vec![0; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if k == probs.len() - 1 {
            out[k] = remaining_n;
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining_n, q)
            .map_err(|e| Error::InvalidInput(format!("binomial({remaining_n}, {q}): {e}")))?
            .sample(rng);
        out[k] = draw;
        remaining_n -= draw;
        remaining_mass -= p;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{two_channel_rates, PdcConfig};

    fn normalized_pdc(v: f64, phi: f64) -> TwoChannelCounts {
        let r = two_channel_rates(&PdcConfig::new(v, 1.0, 1.0).unwrap(), phi);
        r.scaled(1.0 / r.total())
    }

    #[test]
    fn perfect_visibility_has_no_anticorrelated_counts() {
        let d = PairDistribution::from_two_channel("A", "B", &normalized_pdc(1.0, 0.0)).unwrap();
        for n in [1, 17, 1_000_000] {
            let ds = sample_counts(std::slice::from_ref(&d), n, 3, None).unwrap();
            assert_eq!(ds.rows()[0].n_pm, 0);
            assert_eq!(ds.rows()[0].n_mp, 0);
            assert_eq!(ds.rows()[0].n_pp + ds.rows()[0].n_mm, n);
        }
    }

    #[test]
    fn frequencies_within_four_sigma() {
        let tc = normalized_pdc(0.9, 0.3);
        let d = PairDistribution::from_two_channel("A", "B", &tc).unwrap();
        let n = 1_000_000u64;
        let row = sample_counts(&[d], n, 11, None).unwrap().rows()[0].clone();
        for (count, p) in [row.n_pp, row.n_pm, row.n_mp, row.n_mm]
            .iter()
            .zip(tc.as_array())
        {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*count as f64 - n as f64 * p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn same_seed_same_counts() {
        let d = [
            PairDistribution::pdc("A", "B", 0.9, 0.6, 0.4).unwrap(),
            PairDistribution::pdc("A", "D", 0.9, 0.6, 1.1).unwrap(),
        ];
        let a = sample_counts(&d, 5000, 42, None).unwrap();
        let b = sample_counts(&d, 5000, 42, None).unwrap();
        let c = sample_counts(&d, 5000, 43, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pdc_distribution_normalized() {
        let d = PairDistribution::pdc("A", "B", 0.8, 0.3, 0.2).unwrap();
        let total: f64 = d.probs.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let tc = TwoChannelCounts::new(0.1, 0.1, 0.1, 0.1).unwrap();
        assert!(PairDistribution::from_two_channel("A", "B", &tc).is_err());
    }

    #[test]
    fn huge_pair_counts_are_cheap() {
        let d = PairDistribution::pdc("A", "B", 0.85, 1e-4, 0.0).unwrap();
        let row = sample_counts(&[d], 1_000_000_000_000, 1, Some(1e6))
            .unwrap()
            .rows()[0]
            .clone();
        // expected n_pp = 1e12 * 1e-8 * 1.85 / 4 = 4625
        assert!((row.n_pp as f64 - 4625.0).abs() < 5.0 * 4625f64.sqrt());
        assert_eq!(row.duration, Some(1e6));
    }
}
