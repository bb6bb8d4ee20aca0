//! Finite strong-ties populations.
//!
//! Two generators are provided: [`sample_population`] draws one generation
//! straight from a family-size distribution, and [`evolve_generation`]
//! produces the children of a married generation under a policy. Marriages
//! are always formed inside a single generation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_network, compute_metrics, Metrics, StrongTiesNetwork};
use crate::policy::{ChildCountDist, MarriageRatio};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetgenError {
    #[error("family-size distribution has no mass above zero children")]
    ZeroSupport,
    #[error("target population size must be at least 1")]
    EmptyTarget,
    #[error("utilization {0} is outside [0, 1]")]
    InvalidUtilization(f64),
    #[error("invalid population: {0}")]
    InvalidPopulation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("population died out: generation {generation} is empty")]
    PopulationDied {
        generation: u32,
        partial: Vec<GenerationRecord>,
    },
    #[error("initial population must have at least 2 persons")]
    TooFewFounders,
    #[error("at least one generation must be requested")]
    NoGenerations,
    #[error(transparent)]
    Netgen(#[from] NetgenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    fn coin<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Sex::Male
        } else {
            Sex::Female
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    /// Equal to the person's index in [`Population::persons`].
    pub id: usize,
    pub sex: Sex,
    /// Family of origin; siblings share it.
    pub family_id: usize,
    pub generation: u32,
    pub spouse: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub persons: Vec<Person>,
    pub generation_index: u32,
    /// Married women over all women, zero when there are no women.
    pub alpha_realized: f64,
}

/// Couples formed from `men` and `women` singles at ratio `alpha`,
/// rounded half to even.
pub fn marriage_count(alpha: MarriageRatio, men: usize, women: usize) -> usize {
    (alpha.value() * men.min(women) as f64).round_ties_even() as usize
}

impl Population {
    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn count_sex(&self, sex: Sex) -> usize {
        self.persons.iter().filter(|p| p.sex == sex).count()
    }

    /// `(husband, wife)` pairs ordered by husband id.
    pub fn couples(&self) -> Vec<(usize, usize)> {
        self.persons
            .iter()
            .filter(|p| p.sex == Sex::Male)
            .filter_map(|p| p.spouse.map(|w| (p.id, w)))
            .collect()
    }

    /// Number of members per family id.
    pub fn family_sizes(&self) -> BTreeMap<usize, usize> {
        let mut sizes = BTreeMap::new();
        for p in &self.persons {
            *sizes.entry(p.family_id).or_insert(0) += 1;
        }
        sizes
    }

    /// Check id layout, spouse symmetry and single-generation membership.
    pub fn validate(&self) -> Result<(), NetgenError> {
        let bad = |msg: String| Err(NetgenError::InvalidPopulation(msg));
        for (i, p) in self.persons.iter().enumerate() {
            if p.id != i {
                return bad(format!("person at index {i} has id {}", p.id));
            }
            if p.generation != self.generation_index {
                return bad(format!("person {i} belongs to generation {}", p.generation));
            }
            if let Some(s) = p.spouse {
                let Some(spouse) = self.persons.get(s) else {
                    return bad(format!("person {i} married to missing person {s}"));
                };
                if spouse.spouse != Some(i) {
                    return bad(format!("marriage {i}-{s} is not symmetric"));
                }
                if spouse.sex == p.sex {
                    return bad(format!("marriage {i}-{s} is same-sex"));
                }
            }
        }
        Ok(())
    }

    fn refresh_alpha(&mut self) {
        let women = self.count_sex(Sex::Female);
        let married = self
            .persons
            .iter()
            .filter(|p| p.sex == Sex::Female && p.spouse.is_some())
            .count();
        self.alpha_realized = if women == 0 {
            0.0
        } else {
            married as f64 / women as f64
        };
    }

    /// Marry singles by a uniform random matching at ratio `alpha`.
    fn marry<R: Rng + ?Sized>(&mut self, alpha: MarriageRatio, rng: &mut R) {
        let singles = |sex: Sex| -> Vec<usize> {
            self.persons
                .iter()
                .filter(|p| p.sex == sex && p.spouse.is_none())
                .map(|p| p.id)
                .collect()
        };
        let mut men = singles(Sex::Male);
        let mut women = singles(Sex::Female);
        let couples = marriage_count(alpha, men.len(), women.len());
        men.shuffle(rng);
        women.shuffle(rng);
        for (&m, &w) in men.iter().zip(&women).take(couples) {
            self.persons[m].spouse = Some(w);
            self.persons[w].spouse = Some(m);
        }
        self.refresh_alpha();
    }
}

/// Sample one generation directly from a family-size distribution.
///
/// Family sizes are drawn from `f` conditioned on at least one child until
/// `target_n` persons exist; the last family is kept whole. The cohort is
/// then married at ratio `alpha`.
pub fn sample_population<R: Rng + ?Sized>(
    f: &ChildCountDist,
    alpha: MarriageRatio,
    target_n: usize,
    rng: &mut R,
) -> Result<Population, NetgenError> {
    if target_n == 0 {
        return Err(NetgenError::EmptyTarget);
    }
    let sampler = f
        .conditioned_nonempty()
        .ok_or(NetgenError::ZeroSupport)?
        .sampler();
    let mut persons = Vec::with_capacity(target_n + f.max_children());
    let mut family_id = 0;
    while persons.len() < target_n {
        let size = sampler.sample(rng);
        for _ in 0..size {
            persons.push(Person {
                id: persons.len(),
                sex: Sex::coin(rng),
                family_id,
                generation: 0,
                spouse: None,
            });
        }
        family_id += 1;
    }
    let mut pop = Population {
        persons,
        generation_index: 0,
        alpha_realized: 0.0,
    };
    pop.marry(alpha, rng);
    Ok(pop)
}

/// Generation-zero population: `n` unrelated persons, `n / 2` men, married
/// at ratio `alpha`.
pub fn founding_population<R: Rng + ?Sized>(
    n: usize,
    alpha: MarriageRatio,
    rng: &mut R,
) -> Population {
    let men = n / 2;
    let persons = (0..n)
        .map(|id| Person {
            id,
            sex: if id < men { Sex::Male } else { Sex::Female },
            family_id: id,
            generation: 0,
            spouse: None,
        })
        .collect();
    let mut pop = Population {
        persons,
        generation_index: 0,
        alpha_realized: 0.0,
    };
    pop.marry(alpha, rng);
    pop
}

/// Children of `parents` under `policy` with every quota used in full.
pub fn evolve_generation<R: Rng + ?Sized>(
    parents: &Population,
    policy: &ChildCountDist,
    alpha_next: MarriageRatio,
    rng: &mut R,
) -> Population {
    evolve_generation_with_utilization(parents, policy, alpha_next, 1.0, rng)
        .expect("full utilization is valid")
}

/// Like [`evolve_generation`], but each allowed child is born only with
/// probability `utilization`.
pub fn evolve_generation_with_utilization<R: Rng + ?Sized>(
    parents: &Population,
    policy: &ChildCountDist,
    alpha_next: MarriageRatio,
    utilization: f64,
    rng: &mut R,
) -> Result<Population, NetgenError> {
    if !(0.0..=1.0).contains(&utilization) {
        return Err(NetgenError::InvalidUtilization(utilization));
    }
    let generation = parents.generation_index + 1;
    let quota = policy.sampler();
    let mut persons = Vec::new();
    for (family_id, _couple) in parents.couples().into_iter().enumerate() {
        let allowed = quota.sample(rng);
        for _ in 0..allowed {
            if utilization < 1.0 && !rng.random_bool(utilization) {
                continue;
            }
            persons.push(Person {
                id: persons.len(),
                sex: Sex::coin(rng),
                family_id,
                generation,
                spouse: None,
            });
        }
    }
    let mut pop = Population {
        persons,
        generation_index: generation,
        alpha_realized: 0.0,
    };
    pop.marry(alpha_next, rng);
    Ok(pop)
}

/// One evolved generation with its network and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub population: Population,
    pub network: StrongTiesNetwork,
    pub metrics: Metrics,
}

/// Evolve `generations` generations from `initial_n` founders.
///
/// Returns one record per evolved generation (the founders are not
/// included). If a generation comes out empty, the records produced so far
/// are returned inside [`ExperimentError::PopulationDied`].
pub fn run_policy_experiment<R: Rng + ?Sized>(
    initial_n: usize,
    policy: &ChildCountDist,
    alpha: MarriageRatio,
    generations: u32,
    utilization: f64,
    rng: &mut R,
) -> Result<Vec<GenerationRecord>, ExperimentError> {
    if initial_n < 2 {
        return Err(ExperimentError::TooFewFounders);
    }
    if generations == 0 {
        return Err(ExperimentError::NoGenerations);
    }
    let mut current = founding_population(initial_n, alpha, rng);
    let mut records = Vec::with_capacity(generations as usize);
    for _ in 0..generations {
        let next = evolve_generation_with_utilization(&current, policy, alpha, utilization, rng)?;
        if next.is_empty() {
            return Err(ExperimentError::PopulationDied {
                generation: next.generation_index,
                partial: records,
            });
        }
        let network = build_network(&next);
        let metrics = compute_metrics(&network);
        records.push(GenerationRecord {
            population: next.clone(),
            network,
            metrics,
        });
        current = next;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{builtin_distribution, builtin_policy, validate_dist};
    use crate::rng::seeded;

    fn alpha(a: f64) -> MarriageRatio {
        MarriageRatio::new(a).unwrap()
    }

    fn parents_200(rng: &mut crate::rng::SimRng) -> Population {
        let p = founding_population(200, alpha(0.9), rng);
        assert_eq!(p.couples().len(), 90);
        assert!((p.alpha_realized - 0.9).abs() < 1e-12);
        p
    }

    #[test]
    fn rounding_is_half_to_even() {
        assert_eq!(marriage_count(alpha(0.9), 100, 100), 90);
        assert_eq!(marriage_count(alpha(0.5), 5, 9), 2);
        assert_eq!(marriage_count(alpha(0.5), 7, 7), 4);
        assert_eq!(marriage_count(alpha(0.0), 7, 7), 0);
    }

    #[test]
    fn only_children_sample() {
        let f = builtin_policy("1C").unwrap();
        let pop = (0..100)
            .map(|s| sample_population(&f, alpha(1.0), 4, &mut seeded(s)).unwrap())
            .find(|p| p.count_sex(Sex::Male) == 2)
            .expect("some seed gives a 2/2 split");
        assert_eq!(pop.len(), 4);
        assert_eq!(pop.family_sizes().len(), 4);
        assert_eq!(pop.couples().len(), 2);
        pop.validate().unwrap();
    }

    #[test]
    fn china_overshoot_bound() {
        let china = builtin_distribution("china").unwrap();
        for s in 0..200 {
            let pop = sample_population(&china.weights, china.alpha, 157, &mut seeded(s)).unwrap();
            assert!((157..=161).contains(&pop.len()), "len {}", pop.len());
            pop.validate().unwrap();
            let expect = marriage_count(
                china.alpha,
                pop.count_sex(Sex::Male),
                pop.count_sex(Sex::Female),
            );
            assert_eq!(pop.couples().len(), expect);
        }
    }

    #[test]
    fn zero_support_is_rejected() {
        let f = validate_dist(&[1.0, 0.0]).unwrap();
        assert_eq!(
            sample_population(&f, alpha(0.5), 10, &mut seeded(0)),
            Err(NetgenError::ZeroSupport)
        );
        let f = builtin_policy("1C").unwrap();
        assert_eq!(
            sample_population(&f, alpha(0.5), 0, &mut seeded(0)),
            Err(NetgenError::EmptyTarget)
        );
    }

    #[test]
    fn evolve_fixed_policies() {
        let mut rng = seeded(21);
        let parents = parents_200(&mut rng);

        let one = evolve_generation(&parents, &builtin_policy("1C").unwrap(), alpha(0.9), &mut rng);
        assert_eq!(one.len(), 90);
        assert_eq!(one.family_sizes().len(), 90);
        assert_eq!(one.generation_index, 1);
        one.validate().unwrap();

        let two = evolve_generation(&parents, &builtin_policy("2C").unwrap(), alpha(0.9), &mut rng);
        assert_eq!(two.len(), 180);
        assert!(two.family_sizes().values().all(|&s| s == 2));
        assert_eq!(two.family_sizes().len(), 90);
    }

    #[test]
    fn evolve_zero_three_is_multiple_of_three() {
        let mut rng = seeded(5);
        let parents = parents_200(&mut rng);
        let next = evolve_generation(&parents, &builtin_policy("0/3C").unwrap(), alpha(0.9), &mut rng);
        assert_eq!(next.len() % 3, 0);
        assert!(next.family_sizes().values().all(|&s| s == 3));
    }

    #[test]
    fn unmarried_parents_have_no_children() {
        let mut rng = seeded(8);
        let parents = founding_population(50, alpha(0.0), &mut rng);
        assert_eq!(parents.alpha_realized, 0.0);
        let next = evolve_generation(&parents, &builtin_policy("2C").unwrap(), alpha(0.9), &mut rng);
        assert!(next.is_empty());
        assert_eq!(next.alpha_realized, 0.0);
    }

    #[test]
    fn utilization_bounds() {
        let mut rng = seeded(2);
        let parents = parents_200(&mut rng);
        let policy = builtin_policy("2C").unwrap();
        let none =
            evolve_generation_with_utilization(&parents, &policy, alpha(0.9), 0.0, &mut rng).unwrap();
        assert!(none.is_empty());
        let some =
            evolve_generation_with_utilization(&parents, &policy, alpha(0.9), 0.5, &mut rng).unwrap();
        assert!(some.len() < 180);
        assert!(some.family_sizes().values().all(|&s| s <= 2));
        assert_eq!(
            evolve_generation_with_utilization(&parents, &policy, alpha(0.9), 1.5, &mut rng),
            Err(NetgenError::InvalidUtilization(1.5))
        );
    }

    #[test]
    fn experiment_errors() {
        let policy = builtin_policy("1C").unwrap();
        match run_policy_experiment(200, &policy, alpha(0.0), 1, 1.0, &mut seeded(1)) {
            Err(ExperimentError::PopulationDied {
                generation,
                partial,
            }) => {
                assert_eq!(generation, 1);
                assert!(partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            run_policy_experiment(1, &policy, alpha(0.9), 1, 1.0, &mut seeded(1)),
            Err(ExperimentError::TooFewFounders)
        );
        assert_eq!(
            run_policy_experiment(10, &policy, alpha(0.9), 0, 1.0, &mut seeded(1)),
            Err(ExperimentError::NoGenerations)
        );
    }

    #[test]
    fn one_child_policy_dies_out_with_partial_results() {
        let policy = builtin_policy("1C").unwrap();
        match run_policy_experiment(20, &policy, alpha(0.9), 50, 1.0, &mut seeded(3)) {
            Err(ExperimentError::PopulationDied { partial, generation }) => {
                assert!(!partial.is_empty());
                assert_eq!(partial.len() as u32 + 1, generation);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_catches_asymmetric_marriage() {
        let mut pop = founding_population(4, alpha(1.0), &mut seeded(0));
        pop.validate().unwrap();
        let (m, _) = pop.couples()[0];
        pop.persons[m].spouse = None;
        assert!(pop.validate().is_err());
    }
}
