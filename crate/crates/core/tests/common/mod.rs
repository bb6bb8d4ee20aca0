#![allow(dead_code)]

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use strongties::graph::{Edge, NodeInfo};
use strongties::{build_network, Person, Population, Sex, StrongTiesNetwork};

/// Random population of at most `max_n` persons: families of 1..=4 children,
/// fair-coin sexes, a random number of couples between random singles.
pub fn random_population<R: Rng>(max_n: usize, rng: &mut R) -> Population {
    let target = rng.random_range(0..=max_n);
    let mut persons = Vec::new();
    let mut family = 0;
    while persons.len() < target {
        let size = rng.random_range(1..=4).min(target - persons.len());
        for _ in 0..size {
            persons.push(Person {
                id: persons.len(),
                sex: if rng.random() { Sex::Male } else { Sex::Female },
                family_id: family,
                generation: 0,
                spouse: None,
            });
        }
        family += 1;
    }
    let mut men: Vec<usize> = persons.iter().filter(|p| p.sex == Sex::Male).map(|p| p.id).collect();
    let mut women: Vec<usize> = persons.iter().filter(|p| p.sex == Sex::Female).map(|p| p.id).collect();
    men.shuffle(rng);
    women.shuffle(rng);
    let couples = rng.random_range(0..=men.len().min(women.len()));
    for (&m, &w) in men.iter().zip(&women).take(couples) {
        persons[m].spouse = Some(w);
        persons[w].spouse = Some(m);
    }
    let pop = Population {
        persons,
        generation_index: 0,
        alpha_realized: 0.0,
    };
    pop.validate().unwrap();
    pop
}

pub fn random_network<R: Rng>(max_n: usize, rng: &mut R) -> StrongTiesNetwork {
    build_network(&random_population(max_n, rng))
}

/// Breadth-first search from every unvisited node in increasing order; each
/// component is labeled by the node its search started from.
pub fn bfs_labels(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if label[y] == usize::MAX {
                    label[y] = start;
                    queue.push_back(y);
                }
            }
        }
    }
    label
}

pub fn edge_pairs(net: &StrongTiesNetwork) -> Vec<(usize, usize)> {
    net.edges().iter().map(|e| (e.u, e.v)).collect()
}

/// Same network with node `i` renamed to `perm[i]`.
pub fn relabel(net: &StrongTiesNetwork, perm: &[usize]) -> StrongTiesNetwork {
    let mut nodes = vec![NodeInfo::default(); net.node_count()];
    for (i, info) in net.nodes().iter().enumerate() {
        nodes[perm[i]] = *info;
    }
    let edges = net
        .edges()
        .iter()
        .map(|e| Edge::new(perm[e.u], perm[e.v], e.kind))
        .collect();
    StrongTiesNetwork::from_parts(nodes, edges).unwrap()
}

/// Uniform point on the probability simplex with `k` vertices.
pub fn random_simplex<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    let mut w: Vec<f64> = draws.iter().map(|d| d / total).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - w.iter().sum::<f64>();
    let max = (0..k).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    w[max] += residue;
    w
}
