//! Child-count distributions, marriage ratios and population control
//! policies.
//!
//! A [`ChildCountDist`] is a probability vector over the number of children
//! per family. The same type describes an observed family-size distribution
//! and the policy vector a population is asked to comply with.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::CumulativeSampler;

/// Absolute tolerance on the total probability mass.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Tolerance used when comparing prefix sums in [`check_compliance`].
pub const COMPLIANCE_TOLERANCE: f64 = 1e-9;

/// Names accepted by [`builtin_policy`].
pub const BUILTIN_POLICIES: [&str; 5] = ["1C", "0/2C", "2C", "0/3C", "C++"];

/// Names accepted by [`builtin_distribution`].
pub const BUILTIN_DISTRIBUTIONS: [&str; 2] = ["china", "india"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("distribution has no entries")]
    Empty,
    #[error("weight {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {NORMALIZATION_TOLERANCE:e}")]
    NotNormalized { sum: f64 },
    #[error("marriage ratio {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("unknown policy `{0}` (expected one of 1C, 0/2C, 2C, 0/3C, C++)")]
    UnknownPolicy(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("cannot parse weight list `{0}`")]
    BadWeightList(String),
    #[error("invalid distribution config: {0}")]
    Config(String),
}

/// Probability mass over child counts `0..=max_children`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChildCountDist {
    weights: Vec<f64>,
}

impl ChildCountDist {
    pub fn new(weights: Vec<f64>) -> Result<Self, DistError> {
        if weights.is_empty() {
            return Err(DistError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(DistError::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(DistError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(DistError::NotNormalized { sum });
        }
        Ok(Self { weights })
    }

    /// Point mass on `children`.
    pub fn point_mass(children: usize) -> Self {
        let mut weights = vec![0.0; children + 1];
        weights[children] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_children(&self) -> usize {
        self.weights.len() - 1
    }

    /// Mass on `children`, zero past the stored support.
    pub fn weight(&self, children: usize) -> f64 {
        self.weights.get(children).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| i as f64 * w)
            .sum()
    }

    /// The distribution conditioned on at least one child, or `None` when
    /// all mass sits on zero.
    pub fn conditioned_nonempty(&self) -> Option<Self> {
        let positive: f64 = self.weights[1..].iter().sum();
        if positive <= 0.0 {
            return None;
        }
        let mut weights: Vec<f64> = self.weights.iter().map(|w| w / positive).collect();
        weights[0] = 0.0;
        Some(Self { weights })
    }

    pub(crate) fn sampler(&self) -> CumulativeSampler {
        CumulativeSampler::new(&self.weights)
    }
}

impl TryFrom<Vec<f64>> for ChildCountDist {
    type Error = DistError;

    fn try_from(weights: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(weights)
    }
}

impl From<ChildCountDist> for Vec<f64> {
    fn from(dist: ChildCountDist) -> Self {
        dist.weights
    }
}

impl fmt::Display for ChildCountDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Fraction of women in a generation who are married.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MarriageRatio(f64);

impl MarriageRatio {
    pub fn new(alpha: f64) -> Result<Self, DistError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(DistError::AlphaOutOfRange(alpha));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MarriageRatio {
    type Error = DistError;

    fn try_from(alpha: f64) -> Result<Self, Self::Error> {
        Self::new(alpha)
    }
}

impl From<MarriageRatio> for f64 {
    fn from(alpha: MarriageRatio) -> Self {
        alpha.0
    }
}

/// Validate a raw weight vector.
pub fn validate_dist(weights: &[f64]) -> Result<ChildCountDist, DistError> {
    ChildCountDist::new(weights.to_vec())
}

/// The named population control policies.
///
/// | name   | vector                 |
/// |--------|------------------------|
/// | `1C`   | (0, 1)                 |
/// | `0/2C` | (1/2, 0, 1/2)          |
/// | `2C`   | (0, 0, 1)              |
/// | `0/3C` | (1/3, 0, 0, 2/3)       |
/// | `C++`  | (0, 0, 9/10, 1/10)     |
pub fn builtin_policy(name: &str) -> Result<ChildCountDist, DistError> {
    let weights = match name {
        "1C" => vec![0.0, 1.0],
        "0/2C" => vec![0.5, 0.0, 0.5],
        "2C" => vec![0.0, 0.0, 1.0],
        "0/3C" => vec![1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0],
        "C++" => vec![0.0, 0.0, 0.9, 0.1],
        _ => return Err(DistError::UnknownPolicy(name.to_string())),
    };
    ChildCountDist::new(weights)
}

/// A distribution together with the marriage ratio it was observed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDist {
    pub name: String,
    pub weights: ChildCountDist,
    pub alpha: MarriageRatio,
}

/// Observed national family-size distributions.
///
/// The last entry aggregates families with five or more children and is
/// treated as exactly five. India's marriage ratio of 0.92 is an estimate.
pub fn builtin_distribution(name: &str) -> Result<NamedDist, DistError> {
    let (weights, alpha) = match name.to_ascii_lowercase().as_str() {
        "china" => (vec![0.418, 0.269, 0.17, 0.085, 0.039, 0.019], 0.92),
        "india" => (vec![0.126, 0.121, 0.199, 0.193, 0.141, 0.22], 0.92),
        _ => return Err(DistError::UnknownDistribution(name.to_string())),
    };
    Ok(NamedDist {
        name: name.to_ascii_lowercase(),
        weights: ChildCountDist::new(weights)?,
        alpha: MarriageRatio::new(alpha)?,
    })
}

/// Resolve a distribution argument: a built-in policy, a built-in national
/// distribution, or an inline comma-separated weight list, in that order.
pub fn resolve_dist(spec: &str) -> Result<ChildCountDist, DistError> {
    if let Ok(policy) = builtin_policy(spec) {
        return Ok(policy);
    }
    if let Ok(named) = builtin_distribution(spec) {
        return Ok(named.weights);
    }
    let weights = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| DistError::BadWeightList(spec.to_string()))?;
    ChildCountDist::new(weights)
}

/// Eq. (1)-style prefix dominance: every prefix sum of `actual` is at least
/// the matching prefix sum of `policy`. Shorter vectors are zero-padded.
pub fn check_compliance(actual: &ChildCountDist, policy: &ChildCountDist) -> bool {
    let len = actual.weights.len().max(policy.weights.len());
    let (mut actual_sum, mut policy_sum) = (0.0, 0.0);
    (0..len).all(|j| {
        actual_sum += actual.weight(j);
        policy_sum += policy.weight(j);
        actual_sum >= policy_sum - COMPLIANCE_TOLERANCE
    })
}

/// Draw a family's child quota from `policy`.
pub fn sample_quota<R: Rng + ?Sized>(policy: &ChildCountDist, rng: &mut R) -> usize {
    policy.sampler().sample(rng)
}

pub fn mean_children(dist: &ChildCountDist) -> f64 {
    dist.mean()
}

/// Expected size of the next generation relative to the current one when
/// every married couple uses its full quota and sexes are balanced.
pub fn expected_population_ratio(policy: &ChildCountDist, alpha: MarriageRatio) -> f64 {
    alpha.value() * policy.mean() / 2.0
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigSection {
    weights: ChildCountDist,
    alpha: MarriageRatio,
}

/// Parse a distribution config document: one named section per
/// distribution, each with a `weights` array and an `alpha` scalar.
///
/// ```toml
/// [china]
/// weights = [0.418, 0.269, 0.17, 0.085, 0.039, 0.019]
/// alpha = 0.92
/// ```
pub fn parse_dist_config(text: &str) -> Result<Vec<NamedDist>, DistError> {
    let sections: BTreeMap<String, ConfigSection> =
        toml::from_str(text).map_err(|e| DistError::Config(e.to_string()))?;
    Ok(sections
        .into_iter()
        .map(|(name, s)| NamedDist {
            name,
            weights: s.weights,
            alpha: s.alpha,
        })
        .collect())
}

/// Render distributions in the format read by [`parse_dist_config`].
pub fn dist_config_string(dists: &[NamedDist]) -> String {
    let sections: BTreeMap<&str, ConfigSection> = dists
        .iter()
        .map(|d| {
            (
                d.name.as_str(),
                ConfigSection {
                    weights: d.weights.clone(),
                    alpha: d.alpha,
                },
            )
        })
        .collect();
    toml::to_string(&sections).expect("distribution config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn dist(w: &[f64]) -> ChildCountDist {
        validate_dist(w).unwrap()
    }

    // Plain prefix-sum comparison kept separate from check_compliance.
    fn prefix_oracle(actual: &[f64], policy: &[f64]) -> bool {
        let len = actual.len().max(policy.len());
        (0..len).all(|j| {
            let a: f64 = actual.iter().take(j + 1).sum();
            let p: f64 = policy.iter().take(j + 1).sum();
            a + 1e-9 >= p
        })
    }

    #[test]
    fn validate_examples() {
        assert_eq!(dist(&[0.0, 1.0, 0.0]).max_children(), 2);
        assert!(matches!(
            validate_dist(&[0.5, 0.6]),
            Err(DistError::NotNormalized { .. })
        ));
        assert_eq!(dist(&[1.0]).max_children(), 0);
        assert!(matches!(
            validate_dist(&[1.5, -0.5]),
            Err(DistError::NegativeWeight { index: 1, .. })
        ));
        assert_eq!(validate_dist(&[]), Err(DistError::Empty));
        assert!(matches!(
            validate_dist(&[f64::NAN, 1.0]),
            Err(DistError::NonFinite { .. })
        ));
    }

    #[test]
    fn builtin_policy_vectors() {
        assert_eq!(builtin_policy("1C").unwrap().weights(), &[0.0, 1.0]);
        assert_eq!(
            builtin_policy("0/3C").unwrap().weights(),
            &[1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0]
        );
        assert_eq!(
            builtin_policy("C++").unwrap().weights(),
            &[0.0, 0.0, 0.9, 0.1]
        );
        assert_eq!(builtin_policy("0/2C").unwrap().weights(), &[0.5, 0.0, 0.5]);
        assert_eq!(builtin_policy("2C").unwrap().weights(), &[0.0, 0.0, 1.0]);
        assert!(matches!(
            builtin_policy("3C"),
            Err(DistError::UnknownPolicy(_))
        ));
    }

    #[test]
    fn builtin_distributions_validate() {
        for name in BUILTIN_DISTRIBUTIONS {
            let d = builtin_distribution(name).unwrap();
            assert_eq!(d.weights.max_children(), 5);
            assert_eq!(d.alpha.value(), 0.92);
        }
    }

    #[test]
    fn compliance_examples() {
        let c = dist(&[1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0]);
        assert!(check_compliance(&c, &c));

        let (a, p) = ([0.0, 1.0], [0.0, 0.0, 1.0]);
        assert!(prefix_oracle(&a, &p));
        assert!(check_compliance(&dist(&a), &dist(&p)));

        let (a, p) = ([0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
        assert!(!prefix_oracle(&a, &p));
        assert!(!check_compliance(&dist(&a), &dist(&p)));
    }

    #[test]
    fn quota_point_masses() {
        let mut rng = seeded(3);
        for _ in 0..100 {
            assert_eq!(sample_quota(&dist(&[0.0, 1.0]), &mut rng), 1);
            assert_eq!(sample_quota(&dist(&[1.0]), &mut rng), 0);
        }
    }

    #[test]
    fn quota_frequencies_follow_weights() {
        let policy = builtin_policy("0/3C").unwrap();
        let mut rng = seeded(11);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_quota(&policy, &mut rng)] += 1;
        }
        let freq3 = counts[3] as f64 / n as f64;
        assert!((freq3 - 0.667).abs() <= 0.01, "freq3 = {freq3}");
        for (i, &w) in policy.weights().iter().enumerate() {
            let f = counts[i] as f64 / n as f64;
            let band = 4.0 * (w * (1.0 - w) / n as f64).sqrt();
            assert!((f - w).abs() <= band + 1e-12, "i={i} f={f} w={w}");
        }
    }

    #[test]
    fn means_and_population_ratio() {
        assert_eq!(mean_children(&dist(&[0.0, 1.0])), 1.0);
        let c03 = builtin_policy("0/3C").unwrap();
        assert!((mean_children(&c03) - 2.0).abs() < 1e-12);
        let cpp = builtin_policy("C++").unwrap();
        assert!((mean_children(&cpp) - 2.1).abs() < 1e-12);

        let a92 = MarriageRatio::new(0.92).unwrap();
        assert!((expected_population_ratio(&cpp, a92) - 0.966).abs() < 1e-12);
        let a90 = MarriageRatio::new(0.9).unwrap();
        let one = builtin_policy("1C").unwrap();
        assert!((expected_population_ratio(&one, a90) - 0.45).abs() < 1e-12);
        let zero = MarriageRatio::new(0.0).unwrap();
        assert_eq!(expected_population_ratio(&cpp, zero), 0.0);
    }

    #[test]
    fn alpha_range() {
        assert!(MarriageRatio::new(0.0).is_ok());
        assert!(MarriageRatio::new(1.0).is_ok());
        assert!(MarriageRatio::new(1.01).is_err());
        assert!(MarriageRatio::new(f64::NAN).is_err());
    }

    #[test]
    fn resolve_order() {
        assert_eq!(resolve_dist("2C").unwrap().weights(), &[0.0, 0.0, 1.0]);
        assert_eq!(resolve_dist("china").unwrap().max_children(), 5);
        assert_eq!(resolve_dist("0.25, 0.75").unwrap().weights(), &[0.25, 0.75]);
        assert_eq!(resolve_dist("1.0").unwrap().weights(), &[1.0]);
        assert!(matches!(
            resolve_dist("x,y"),
            Err(DistError::BadWeightList(_))
        ));
    }

    #[test]
    fn conditioned_nonempty_drops_zero_mass() {
        let d = dist(&[0.5, 0.25, 0.25]).conditioned_nonempty().unwrap();
        assert_eq!(d.weights(), &[0.0, 0.5, 0.5]);
        assert!(dist(&[1.0]).conditioned_nonempty().is_none());
    }

    #[test]
    fn config_round_trips_builtins_exactly() {
        let all: Vec<NamedDist> = BUILTIN_DISTRIBUTIONS
            .iter()
            .map(|n| builtin_distribution(n).unwrap())
            .collect();
        let text = dist_config_string(&all);
        assert!(text.contains("[china]"));
        assert!(text.contains("0.418"));
        let back = parse_dist_config(&text).unwrap();
        assert_eq!(back, all);
    }

    #[test]
    fn config_rejects_invalid_sections() {
        let bad = "[x]\nweights = [0.5, 0.6]\nalpha = 0.9\n";
        assert!(matches!(parse_dist_config(bad), Err(DistError::Config(_))));
        let bad_alpha = "[x]\nweights = [1.0]\nalpha = 2.0\n";
        assert!(parse_dist_config(bad_alpha).is_err());
    }
}
