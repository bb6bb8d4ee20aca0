//! Simulation and analytics for strong-ties social networks under
//! population control policies.
//!
//! A strong-ties network links members of one generation by sibling and
//! marriage relations only. The crate offers three views of it:
//!
//! * [`policy`]: child-count distributions, built-in policies, compliance
//!   checks and quota sampling.
//! * [`branching`]: the Galton-Watson and strong-ties branching processes,
//!   with the derived offspring distribution, its mean, criticality and
//!   extinction probability, plus seeded Monte Carlo runs.
//! * [`netgen`] and [`graph`]: finite populations sampled directly or
//!   evolved under a policy, turned into networks whose connectivity is
//!   measured and exported.
//!
//! The [`cli`] module backs the `strongties` binary.

pub mod branching;
pub mod cli;
pub mod graph;
pub mod netgen;
pub mod policy;
pub mod rng;
mod sampling;
mod unionfind;

pub use branching::{
    classify, derive_child_dist, extinction_probability, mu_closed_form, simulate_gw,
    simulate_strong_ties_tree, survival_frequency, BranchingError, BranchingOutcome, Caps,
    Criticality, CriticalityClass, DerivedChildDist,
};
pub use graph::{
    build_network, compute_metrics, connected_components, export_network, import_edge_csv,
    ComponentLabeling, EdgeKind, ExportFormat, GraphError, Metrics, StrongTiesNetwork,
};
pub use netgen::{
    evolve_generation, run_policy_experiment, sample_population, ExperimentError,
    GenerationRecord, NetgenError, Person, Population, Sex,
};
pub use policy::{
    builtin_distribution, builtin_policy, check_compliance, expected_population_ratio,
    mean_children, sample_quota, validate_dist, ChildCountDist, DistError, MarriageRatio,
    NamedDist,
};

/// Crate version embedded in every output document.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
