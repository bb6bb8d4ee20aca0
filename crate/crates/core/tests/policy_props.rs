use proptest::prelude::*;
use strongties::policy::{check_compliance, expected_population_ratio, ChildCountDist, MarriageRatio};

fn normalized(raw: Vec<f64>) -> ChildCountDist {
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let residue = 1.0 - w.iter().sum::<f64>();
    w[0] += residue;
    if w[0] < 0.0 {
        w[0] = 0.0;
    }
    ChildCountDist::new(w).unwrap()
}

fn dist_strategy(max_len: usize) -> impl Strategy<Value = ChildCountDist> {
    prop::collection::vec(0.0f64..1.0, 1..=max_len)
        .prop_filter("some mass", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(normalized)
}

proptest! {
    #[test]
    fn compliance_is_reflexive(d in dist_strategy(8)) {
        prop_assert!(check_compliance(&d, &d));
    }

    #[test]
    fn compliance_is_transitive(a in dist_strategy(6), b in dist_strategy(6), c in dist_strategy(6)) {
        if check_compliance(&a, &b) && check_compliance(&b, &c) {
            prop_assert!(check_compliance(&a, &c));
        }
    }

    #[test]
    fn compliance_with_two_child_cap_forbids_large_families(
        f in dist_strategy(7),
        p in dist_strategy(3),
    ) {
        let large: f64 = f.weights().iter().skip(3).sum();
        if check_compliance(&f, &p) {
            prop_assert!(large <= 2e-9, "mass above two children: {large}");
        }
    }

    #[test]
    fn population_ratio_is_linear_in_alpha(d in dist_strategy(6), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let r = |x: f64| expected_population_ratio(&d, MarriageRatio::new(x).unwrap());
        let mid = (a + b) / 2.0;
        prop_assert!((r(mid) - (r(a) + r(b)) / 2.0).abs() < 1e-12);
        prop_assert_eq!(r(0.0), 0.0);
    }
}
