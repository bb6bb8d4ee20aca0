use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::branching::{Caps, CriticalityClass, EnsembleSummary};
use crate::graph::Metrics;

/// Output of `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: String,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub seed: u64,
    pub runs: u64,
    pub caps: Caps,
    pub mean_children: f64,
    pub expected_population_ratio: f64,
    pub a: Vec<f64>,
    pub residual_folded: f64,
    pub mu: f64,
    pub mu_closed_form: f64,
    pub classification: CriticalityClass,
    pub degenerate: bool,
    /// Extinction probability of a subtree hanging off one draw.
    pub extinction_probability_single: Option<f64>,
    /// Survival probability of the strong-ties root, `1 - q^2`.
    pub predicted_survival: Option<f64>,
    pub survival_frequency: Option<f64>,
}

impl AnalyzeReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "input: {} {:?} alpha={}", self.input, self.weights, self.alpha).unwrap();
        writeln!(s, "A = {:?}", self.a).unwrap();
        writeln!(s, "mu = {} (closed form {})", self.mu, self.mu_closed_form).unwrap();
        writeln!(
            s,
            "class = {:?}{}",
            self.classification,
            if self.degenerate { " (degenerate chain)" } else { "" }
        )
        .unwrap();
        if let Some(q) = self.extinction_probability_single {
            writeln!(s, "extinction probability q = {q}").unwrap();
        }
        if let Some(p) = self.predicted_survival {
            writeln!(s, "predicted survival 1 - q^2 = {p}").unwrap();
        }
        if let Some(f) = self.survival_frequency {
            writeln!(s, "survival frequency = {f} over {} runs", self.runs).unwrap();
        }
        writeln!(s, "mean children = {}", self.mean_children).unwrap();
        writeln!(s, "population ratio = {}", self.expected_population_ratio).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u32,
    pub population: usize,
    pub couples: usize,
    pub alpha_realized: f64,
    pub graph_file: String,
    pub metrics: Metrics,
}

impl GenerationSummary {
    pub(crate) fn new(
        generation: u32,
        population: usize,
        couples: usize,
        alpha_realized: f64,
        graph_file: String,
        metrics: Metrics,
    ) -> Self {
        Self {
            generation,
            population,
            couples,
            alpha_realized,
            graph_file,
            metrics,
        }
    }
}

/// Output of `simulate`, one entry per generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub status: String,
    pub generations: Vec<GenerationSummary>,
}

impl SimulationReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for g in &self.generations {
            let m = &g.metrics;
            writeln!(
                s,
                "generation {}: nodes={} couples={} sibling_edges={} marital_edges={} components={} largest={} ({:.3}) singletons={} -> {}",
                g.generation,
                m.node_count,
                g.couples,
                m.sibling_edge_count,
                m.marital_edge_count,
                m.component_count,
                m.largest_component_size,
                m.largest_component_fraction,
                m.singleton_count,
                g.graph_file
            )
            .unwrap();
        }
        writeln!(s, "status = {}", self.status).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }
}

/// Output of `gw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: String,
    pub weights: Vec<f64>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub a: Vec<f64>,
    pub mu: f64,
    pub classification: CriticalityClass,
    pub degenerate: bool,
    pub extinction_probability_single: Option<f64>,
    pub predicted_survival: Option<f64>,
    pub summary: EnsembleSummary,
}

impl GwReport {
    pub fn summary(&self) -> String {
        let e = &self.summary;
        let mut s = String::new();
        writeln!(s, "process = {:?}, runs = {}", e.process, e.runs).unwrap();
        writeln!(s, "mu = {}, class = {:?}", self.mu, self.classification).unwrap();
        writeln!(
            s,
            "survival frequency = {} (extinct {}, capped {})",
            e.survival_frequency, e.extinct, e.truncated
        )
        .unwrap();
        if let Some(p) = self.predicted_survival {
            writeln!(s, "predicted survival = {p}").unwrap();
        }
        for (t, z) in e.mean_z.iter().enumerate() {
            writeln!(s, "mean Z_{t} = {z}").unwrap();
        }
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }
}
