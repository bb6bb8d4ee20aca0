//! The strong-ties network of one generation: nodes are persons, edges are
//! sibling or marriage relations.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgen::{Population, Sex};
use crate::unionfind::UnionFind;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown export format `{0}` (expected dot, graphml or edge-csv)")]
    UnknownFormat(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("edge-csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Sibling,
    Marital,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Sibling => "sibling",
            EdgeKind::Marital => "marital",
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            EdgeKind::Sibling => "blue",
            EdgeKind::Marital => "red",
        }
    }
}

/// Undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(a: usize, b: usize, kind: EdgeKind) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
            kind,
        }
    }
}

/// Node attributes; absent when a network is read back from an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeInfo {
    pub sex: Option<Sex>,
    pub family_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongTiesNetwork {
    nodes: Vec<NodeInfo>,
    edges: Vec<Edge>,
}

impl StrongTiesNetwork {
    /// Build from parts, checking that edges are in range and distinct, that
    /// marital edges form a matching and that sibling edges form disjoint
    /// cliques.
    pub fn from_parts(nodes: Vec<NodeInfo>, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = nodes.len();
        let invalid = |msg: String| Err(GraphError::InvalidNetwork(msg));
        for e in &mut edges {
            *e = Edge::new(e.u, e.v, e.kind);
            if e.u == e.v {
                return invalid(format!("self-loop at node {}", e.u));
            }
            if e.v >= n {
                return invalid(format!("edge {}-{} refers to node past {n}", e.u, e.v));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate {} edge {}-{}", w[0].kind.as_str(), w[0].u, w[0].v));
        }
        let mut marital_degree = vec![0u8; n];
        let mut siblings = UnionFind::new(n);
        for e in &edges {
            match e.kind {
                EdgeKind::Marital => {
                    for x in [e.u, e.v] {
                        marital_degree[x] += 1;
                        if marital_degree[x] > 1 {
                            return invalid(format!("node {x} has more than one spouse"));
                        }
                    }
                }
                EdgeKind::Sibling => siblings.union(e.u, e.v),
            }
        }
        let mut group_size: BTreeMap<usize, usize> = BTreeMap::new();
        for x in 0..n {
            *group_size.entry(siblings.find(x)).or_insert(0) += 1;
        }
        let mut group_edges: BTreeMap<usize, usize> = BTreeMap::new();
        for e in edges.iter().filter(|e| e.kind == EdgeKind::Sibling) {
            *group_edges.entry(siblings.find(e.u)).or_insert(0) += 1;
        }
        for (root, &count) in &group_edges {
            let s = group_size[root];
            if count != s * (s - 1) / 2 {
                return invalid(format!("sibling group of node {root} is not a clique"));
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    /// Edges sorted by `(u, v, kind)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }
}

/// Sibling cliques for every family plus one edge per married couple.
pub fn build_network(pop: &Population) -> StrongTiesNetwork {
    let nodes = pop
        .persons
        .iter()
        .map(|p| NodeInfo {
            sex: Some(p.sex),
            family_id: Some(p.family_id),
        })
        .collect();
    let mut families: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in &pop.persons {
        families.entry(p.family_id).or_default().push(p.id);
    }
    let mut edges = Vec::new();
    for members in families.values() {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                edges.push(Edge::new(a, b, EdgeKind::Sibling));
            }
        }
    }
    edges.extend(
        pop.couples()
            .into_iter()
            .map(|(h, w)| Edge::new(h, w, EdgeKind::Marital)),
    );
    edges.sort_unstable();
    StrongTiesNetwork { nodes, edges }
}

/// Component of every node, named by its smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
}

impl ComponentLabeling {
    /// Size of each component keyed by label.
    pub fn sizes(&self) -> BTreeMap<usize, usize> {
        let mut sizes = BTreeMap::new();
        for &l in &self.labels {
            *sizes.entry(l).or_insert(0) += 1;
        }
        sizes
    }

    pub fn count(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| i == l)
            .count()
    }
}

pub fn connected_components(net: &StrongTiesNetwork) -> ComponentLabeling {
    let n = net.node_count();
    let mut uf = UnionFind::new(n);
    for e in &net.edges {
        uf.union(e.u, e.v);
    }
    let mut smallest = vec![usize::MAX; n];
    let labels = (0..n)
        .map(|x| {
            let root = uf.find(x);
            // nodes are visited in increasing order, so the first hit is the minimum
            if smallest[root] == usize::MAX {
                smallest[root] = x;
            }
            smallest[root]
        })
        .collect();
    ComponentLabeling { labels }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub node_count: usize,
    pub sibling_edge_count: usize,
    pub marital_edge_count: usize,
    pub component_count: usize,
    pub largest_component_size: usize,
    pub largest_component_fraction: f64,
    pub singleton_count: usize,
    /// Component size to number of components of that size.
    pub component_size_histogram: BTreeMap<usize, usize>,
}

pub fn compute_metrics(net: &StrongTiesNetwork) -> Metrics {
    let sizes = connected_components(net).sizes();
    let mut histogram = BTreeMap::new();
    for &s in sizes.values() {
        *histogram.entry(s).or_insert(0) += 1;
    }
    let largest = sizes.values().copied().max().unwrap_or(0);
    let n = net.node_count();
    Metrics {
        node_count: n,
        sibling_edge_count: net.edge_count(EdgeKind::Sibling),
        marital_edge_count: net.edge_count(EdgeKind::Marital),
        component_count: sizes.len(),
        largest_component_size: largest,
        largest_component_fraction: if n == 0 {
            0.0
        } else {
            largest as f64 / n as f64
        },
        singleton_count: histogram.get(&1).copied().unwrap_or(0),
        component_size_histogram: histogram,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Dot,
    Graphml,
    #[default]
    EdgeCsv,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Graphml => "graphml",
            ExportFormat::EdgeCsv => "csv",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "graphml" => Ok(ExportFormat::Graphml),
            "edge-csv" => Ok(ExportFormat::EdgeCsv),
            other => Err(GraphError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Graphml => "graphml",
            ExportFormat::EdgeCsv => "edge-csv",
        })
    }
}

/// Serialize `net`; the output depends only on the network.
pub fn export_network(net: &StrongTiesNetwork, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Dot => to_dot(net).into_bytes(),
        ExportFormat::Graphml => to_graphml(net).into_bytes(),
        ExportFormat::EdgeCsv => to_edge_csv(net),
    }
}

fn to_dot(net: &StrongTiesNetwork) -> String {
    let mut out = String::from("graph strongties {\n");
    for (i, node) in net.nodes.iter().enumerate() {
        let mut attrs = Vec::new();
        if let Some(sex) = node.sex {
            attrs.push(format!("sex=\"{}\"", sex.code()));
        }
        if let Some(family) = node.family_id {
            attrs.push(format!("family={family}"));
        }
        if attrs.is_empty() {
            writeln!(out, "  {i};").unwrap();
        } else {
            writeln!(out, "  {i} [{}];", attrs.join(", ")).unwrap();
        }
    }
    for e in &net.edges {
        writeln!(
            out,
            "  {} -- {} [kind=\"{}\", color=\"{}\"];",
            e.u,
            e.v,
            e.kind.as_str(),
            e.kind.color()
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn to_graphml(net: &StrongTiesNetwork) -> String {
    let mut out = String::from(concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
        "  <key id=\"sex\" for=\"node\" attr.name=\"sex\" attr.type=\"string\"/>\n",
        "  <key id=\"family\" for=\"node\" attr.name=\"family\" attr.type=\"long\"/>\n",
        "  <key id=\"kind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n",
        "  <key id=\"color\" for=\"edge\" attr.name=\"color\" attr.type=\"string\"/>\n",
        "  <graph id=\"strongties\" edgedefault=\"undirected\">\n",
    ));
    for (i, node) in net.nodes.iter().enumerate() {
        write!(out, "    <node id=\"n{i}\">").unwrap();
        if let Some(sex) = node.sex {
            write!(out, "<data key=\"sex\">{}</data>", sex.code()).unwrap();
        }
        if let Some(family) = node.family_id {
            write!(out, "<data key=\"family\">{family}</data>").unwrap();
        }
        out.push_str("</node>\n");
    }
    for e in &net.edges {
        writeln!(
            out,
            "    <edge source=\"n{}\" target=\"n{}\"><data key=\"kind\">{}</data><data key=\"color\">{}</data></edge>",
            e.u,
            e.v,
            e.kind.as_str(),
            e.kind.color()
        )
        .unwrap();
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn to_edge_csv(net: &StrongTiesNetwork) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["u", "v", "kind"]).expect("in-memory write");
    for e in &net.edges {
        w.serialize(e).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Read an edge-csv document back. Node attributes are not part of the
/// format; `node_count` defaults to one past the largest endpoint.
pub fn import_edge_csv(
    data: &[u8],
    node_count: Option<usize>,
) -> Result<StrongTiesNetwork, GraphError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(data);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["u", "v", "kind"] {
        return Err(GraphError::InvalidNetwork(format!(
            "expected header `u,v,kind`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let edges = reader
        .deserialize::<Edge>()
        .collect::<Result<Vec<_>, _>>()?;
    let n = node_count.unwrap_or_else(|| edges.iter().map(|e| e.u.max(e.v) + 1).max().unwrap_or(0));
    StrongTiesNetwork::from_parts(vec![NodeInfo::default(); n], edges)
}
