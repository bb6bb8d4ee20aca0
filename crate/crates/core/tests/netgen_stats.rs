use std::collections::BTreeMap;

use strongties::netgen::{founding_population, marriage_count};
use strongties::policy::{builtin_distribution, builtin_policy};
use strongties::rng::seeded;
use strongties::{
    evolve_generation, run_policy_experiment, sample_population, ChildCountDist, MarriageRatio,
    Population, Sex,
};

fn alpha(a: f64) -> MarriageRatio {
    MarriageRatio::new(a).unwrap()
}

/// Pearson statistic of observed family-size counts against `dist`
/// conditioned on at least one child. Returns (statistic, degrees of freedom).
fn chi_square(counts: &BTreeMap<usize, usize>, dist: &ChildCountDist) -> (f64, usize) {
    let cond = dist.conditioned_nonempty().unwrap();
    let total: usize = counts.values().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for k in 1..=dist.max_children() {
        let p = cond.weight(k);
        let observed = counts.get(&k).copied().unwrap_or(0) as f64;
        if p == 0.0 {
            assert_eq!(observed, 0.0, "size {k} has zero probability");
            continue;
        }
        let expected = p * total as f64;
        stat += (observed - expected).powi(2) / expected;
        cells += 1;
    }
    (stat, cells - 1)
}

// upper 0.1% points of the chi-square distribution
fn critical_value(df: usize) -> f64 {
    [10.83, 13.82, 16.27, 18.47, 20.52, 22.46][df - 1]
}

fn size_histogram(pop: &Population, into: &mut BTreeMap<usize, usize>) {
    for size in pop.family_sizes().values() {
        *into.entry(*size).or_insert(0) += 1;
    }
}

#[test]
fn india_sample_matches_family_sizes() {
    let india = builtin_distribution("india").unwrap();
    let mut counts = BTreeMap::new();
    for seed in 0..100 {
        let pop = sample_population(&india.weights, india.alpha, 130, &mut seeded(seed)).unwrap();
        assert!(pop.len() >= 130);
        size_histogram(&pop, &mut counts);
    }
    let (stat, df) = chi_square(&counts, &india.weights);
    assert!(stat < critical_value(df), "chi2 {stat} df {df} counts {counts:?}");
}

#[test]
fn evolved_family_sizes_follow_policy() {
    let policy = builtin_distribution("china").unwrap().weights;
    let mut rng = seeded(99);
    let parents = founding_population(20_000, alpha(1.0), &mut rng);
    assert_eq!(parents.couples().len(), 10_000);
    let children = evolve_generation(&parents, &policy, alpha(0.9), &mut rng);
    let mut counts = BTreeMap::new();
    size_histogram(&children, &mut counts);
    let (stat, df) = chi_square(&counts, &policy);
    assert!(stat < critical_value(df), "chi2 {stat} df {df}");
}

#[test]
fn realized_families_comply_in_expectation() {
    let policy = builtin_policy("0/3C").unwrap();
    let seeds = 300;
    let len = policy.weights().len();
    let mut per_seed = Vec::new();
    for seed in 0..seeds {
        let mut rng = seeded(seed);
        let parents = founding_population(200, alpha(0.9), &mut rng);
        let couples = parents.couples().len();
        let children = evolve_generation(&parents, &policy, alpha(0.9), &mut rng);
        let mut f = vec![0.0; len];
        let sizes = children.family_sizes();
        f[0] = (couples - sizes.len()) as f64 / couples as f64;
        for s in sizes.values() {
            f[*s] += 1.0 / couples as f64;
        }
        per_seed.push(f);
    }
    for j in 0..len {
        let prefixes: Vec<f64> = per_seed.iter().map(|f| f[..=j].iter().sum()).collect();
        let mean = prefixes.iter().sum::<f64>() / seeds as f64;
        let var = prefixes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds as f64 - 1.0);
        let se = (var / seeds as f64).sqrt();
        let target: f64 = policy.weights()[..=j].iter().sum();
        assert!(mean >= target - 3.0 * se - 1e-12, "J={j} mean {mean} target {target}");
    }
}

#[test]
fn zero_three_policy_averages_180() {
    let policy = builtin_policy("0/3C").unwrap();
    let sizes: Vec<f64> = (0..1000)
        .map(|seed| {
            let mut rng = seeded(seed);
            let parents = founding_population(200, alpha(0.9), &mut rng);
            evolve_generation(&parents, &policy, alpha(0.9), &mut rng).len() as f64
        })
        .collect();
    let n = sizes.len() as f64;
    let mean = sizes.iter().sum::<f64>() / n;
    let se = (sizes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - 180.0).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn children_map_to_one_couple_within_quota() {
    let policy = builtin_policy("C++").unwrap();
    for seed in 0..50 {
        let mut rng = seeded(seed);
        let parents = founding_population(300, alpha(0.85), &mut rng);
        let couples = parents.couples().len();
        let children = evolve_generation(&parents, &policy, alpha(0.85), &mut rng);
        children.validate().unwrap();
        for (family, size) in children.family_sizes() {
            assert!(family < couples);
            assert!((2..=3).contains(&size));
        }
        let expect = marriage_count(
            alpha(0.85),
            children.count_sex(Sex::Male),
            children.count_sex(Sex::Female),
        );
        assert_eq!(children.couples().len(), expect);
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let china = builtin_distribution("china").unwrap();
    let a = sample_population(&china.weights, china.alpha, 157, &mut seeded(7)).unwrap();
    let b = sample_population(&china.weights, china.alpha, 157, &mut seeded(7)).unwrap();
    assert_eq!(a, b);
    let c = sample_population(&china.weights, china.alpha, 157, &mut seeded(8)).unwrap();
    assert_ne!(a, c);

    let policy = builtin_policy("0/2C").unwrap();
    let x = run_policy_experiment(200, &policy, alpha(0.9), 3, 1.0, &mut seeded(1));
    let y = run_policy_experiment(200, &policy, alpha(0.9), 3, 1.0, &mut seeded(1));
    assert_eq!(x, y);
}

#[test]
fn one_child_generation_is_pairs() {
    let policy = builtin_policy("1C").unwrap();
    let records = run_policy_experiment(200, &policy, alpha(0.9), 1, 1.0, &mut seeded(12)).unwrap();
    let m = &records[0].metrics;
    assert_eq!(m.node_count, 90);
    assert_eq!(m.sibling_edge_count, 0);
    assert!(m.largest_component_size <= 2);
}

#[test]
fn zero_two_policy_keeps_sibling_links() {
    let policy = builtin_policy("0/2C").unwrap();
    let records = run_policy_experiment(200, &policy, alpha(0.9), 1, 1.0, &mut seeded(4)).unwrap();
    let m = &records[0].metrics;
    assert!(m.sibling_edge_count > 0);
    assert_eq!(m.node_count % 2, 0);
    assert!((40..=140).contains(&m.node_count), "{}", m.node_count);
}
