//! Lead/lag network: minimum spanning tree of the correlation distance with
//! edges oriented from leader to lagger.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("need at least two instruments")]
    TooFewNodes,
    #[error("missing pairs: {}", .0.join(", "))]
    MissingPairs(Vec<String>),
    #[error("pair {0} given twice")]
    DuplicatePair(String),
    #[error("pair {0} links an instrument to itself")]
    SelfPair(String),
    #[error("pair {0}: correlation must lie in [-1, 1] and LLR be positive")]
    InvalidValue(String),
}

/// Summary of one pair; `llr` is the lead/lag ratio of `a` leading `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub a: String,
    pub b: String,
    pub max_corr: f64,
    pub rho0: f64,
    pub llr: f64,
}

impl PairSummary {
    fn id(&self) -> String {
        format!("{}/{}", self.a, self.b)
    }

    /// Same pair seen from the other leg.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            max_corr: self.max_corr,
            rho0: self.rho0,
            llr: 1.0 / self.llr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationInput {
    #[default]
    MaxCorr,
    Rho0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Leader.
    pub from: String,
    pub to: String,
    pub rho: f64,
    /// LLR of `from` leading `to`; at least 1.
    pub llr: f64,
    /// LLR with the lexicographically smaller id as first leg.
    pub llr_canonical: f64,
    /// `llr == 1`: no direction.
    pub undirected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLagGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

/// `d = √(2(1 − ρ))`.
pub fn correlation_distance(rho: f64) -> f64 {
    (2.0 * (1.0 - rho)).max(0.0).sqrt()
}

pub fn build_mst(pairs: &[PairSummary], input: CorrelationInput) -> Result<LeadLagGraph, NetworkError> {
    build_mst_with(pairs, input, correlation_distance)
}

/// Kruskal on `distance(ρ)`; ties go to the lexicographically smaller pair.
pub fn build_mst_with(
    pairs: &[PairSummary],
    input: CorrelationInput,
    distance: impl Fn(f64) -> f64,
) -> Result<LeadLagGraph, NetworkError> {
    // Canonical orientation: a < b.
    let mut canon: BTreeMap<(String, String), PairSummary> = BTreeMap::new();
    for p in pairs {
        if p.a == p.b {
            return Err(NetworkError::SelfPair(p.id()));
        }
        let rho = match input {
            CorrelationInput::MaxCorr => p.max_corr,
            CorrelationInput::Rho0 => p.rho0,
        };
        if !(rho.abs() <= 1.0 && p.llr > 0.0 && p.llr.is_finite()) {
            return Err(NetworkError::InvalidValue(p.id()));
        }
        let q = if p.a < p.b { p.clone() } else { p.swapped() };
        let key = (q.a.clone(), q.b.clone());
        if canon.insert(key, q).is_some() {
            return Err(NetworkError::DuplicatePair(p.id()));
        }
    }
    let nodes: Vec<String> = canon
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if nodes.len() < 2 {
        return Err(NetworkError::TooFewNodes);
    }
    let mut missing = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if !canon.contains_key(&(a.clone(), b.clone())) {
                missing.push(format!("{a}/{b}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(NetworkError::MissingPairs(missing));
    }

    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut order: Vec<(f64, &PairSummary)> = canon
        .values()
        .map(|p| {
            let rho = match input {
                CorrelationInput::MaxCorr => p.max_corr,
                CorrelationInput::Rho0 => p.rho0,
            };
            (distance(rho), p)
        })
        .collect();
    // BTreeMap iteration is already lexicographic; a stable sort keeps it on ties.
    order.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut edges = Vec::with_capacity(nodes.len() - 1);
    for (_, p) in order {
        let (ra, rb) = (find(&mut parent, index[p.a.as_str()]), find(&mut parent, index[p.b.as_str()]));
        if ra == rb {
            continue;
        }
        parent[ra] = rb;
        let rho = match input {
            CorrelationInput::MaxCorr => p.max_corr,
            CorrelationInput::Rho0 => p.rho0,
        };
        let (from, to, llr) = if p.llr >= 1.0 {
            (p.a.clone(), p.b.clone(), p.llr)
        } else {
            (p.b.clone(), p.a.clone(), 1.0 / p.llr)
        };
        edges.push(Edge {
            from,
            to,
            rho,
            llr,
            llr_canonical: p.llr,
            undirected: p.llr == 1.0,
        });
        if edges.len() == nodes.len() - 1 {
            break;
        }
    }
    Ok(LeadLagGraph { nodes, edges })
}

impl LeadLagGraph {
    /// `from,to,rho,llr` rows, values with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("from,to,rho,llr\n");
        for e in &self.edges {
            let _ = writeln!(s, "{},{},{:.11e},{:.11e}", e.from, e.to, e.rho, e.llr);
        }
        s
    }

    /// Graphviz description; undirected edges carry `dir=none`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph leadlag {\n");
        for n in &self.nodes {
            let _ = writeln!(s, "  \"{n}\";");
        }
        for e in &self.edges {
            let dir = if e.undirected { ", dir=none" } else { "" };
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [rho={:.6}, llr={:.6}, label=\"{:.3}\"{}];",
                e.from, e.to, e.rho, e.llr, e.llr, dir
            );
        }
        s.push_str("}\n");
        s
    }
}
