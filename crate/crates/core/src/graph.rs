//! Evolution graph over temporal clusters.
//!
//! Two observations of an entity are consecutive when no other observation of
//! that entity lies strictly between them in time. An entity exhibits the
//! transition `p -> q` if some consecutive pair goes from cluster `p` to
//! cluster `q`. Edge weights are the fraction of entities exhibiting each
//! transition; thresholding the weights yields the binary graph.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{Dataset, Partition};
use crate::{Error, Result};

/// `(entity index, from cluster, to cluster)`.
pub type Transition = (usize, usize, usize);

/// Summary of one cluster used for node ordering and labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterMeta {
    pub mu_t: f64,
    /// Smallest interval containing every member timestamp; `None` when empty.
    pub extent: Option<(f64, f64)>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionGraph {
    pub clusters: usize,
    /// Row-major `m × m` weights in `[0, 1]`.
    pub adjacency: Vec<f64>,
    /// Row-major `m × m` thresholded edges.
    pub binary: Vec<bool>,
    pub gamma: f64,
    pub cluster_meta: Vec<ClusterMeta>,
}

impl EvolutionGraph {
    pub fn weight(&self, p: usize, q: usize) -> f64 {
        self.adjacency[p * self.clusters + q]
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.binary[p * self.clusters + q]
    }

    /// Thresholded edges in row-major order, self-loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.clusters)
            .flat_map(|p| (0..self.clusters).map(move |q| (p, q)))
            .filter(|&(p, q)| self.has_edge(p, q))
            .collect()
    }

    /// Cluster indices sorted by centroid timestamp, then index.
    pub fn node_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.clusters).collect();
        order.sort_by(|&a, &b| {
            self.cluster_meta[a]
                .mu_t
                .total_cmp(&self.cluster_meta[b].mu_t)
                .then(a.cmp(&b))
        });
        order
    }
}

/// Distinct transitions per entity, including self-transitions.
pub fn transitions(dataset: &Dataset, partition: &Partition) -> Result<BTreeSet<Transition>> {
    partition.validate(dataset)?;
    let mut out = BTreeSet::new();
    for e in 0..dataset.entity_count() {
        for pair in dataset.entity_series(e).windows(2) {
            out.insert((e, partition.cluster_of(pair[0]), partition.cluster_of(pair[1])));
        }
    }
    Ok(out)
}

/// Fraction of the `entity_count` entities exhibiting `p -> q`.
pub fn intersection_similarity(
    p: usize,
    q: usize,
    transitions: &BTreeSet<Transition>,
    entity_count: usize,
) -> f64 {
    if entity_count == 0 {
        return 0.0;
    }
    let n = transitions
        .iter()
        .filter(|&&(_, a, b)| a == p && b == q)
        .count();
    n as f64 / entity_count as f64
}

/// Builds the weighted and thresholded graphs. An edge is kept when its
/// weight reaches `gamma`; at `gamma = 0` only strictly positive weights are
/// kept.
pub fn build_graph(dataset: &Dataset, partition: &Partition, gamma: f64) -> Result<EvolutionGraph> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
        });
    }
    let trans = transitions(dataset, partition)?;
    let m = partition.cluster_count();
    let phi = dataset.entity_count();

    let mut counts = vec![0usize; m * m];
    for &(_, p, q) in &trans {
        counts[p * m + q] += 1;
    }
    let adjacency: Vec<f64> = counts.iter().map(|&c| c as f64 / phi as f64).collect();
    let binary = adjacency
        .iter()
        .map(|&a| if gamma == 0.0 { a > 0.0 } else { a >= gamma })
        .collect();

    let cluster_meta = (0..m)
        .map(|j| {
            let members = partition.members(j);
            let extent = members.iter().map(|&i| dataset.observation(i).timestamp).fold(
                None,
                |acc: Option<(f64, f64)>, t| match acc {
                    None => Some((t, t)),
                    Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
                },
            );
            ClusterMeta {
                mu_t: partition.centroid(j).timestamp,
                extent,
                size: members.len(),
            }
        })
        .collect();

    Ok(EvolutionGraph {
        clusters: m,
        adjacency,
        binary,
        gamma,
        cluster_meta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DotOptions {
    pub drop_self_loops: bool,
    pub edge_labels: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self {
            drop_self_loops: true,
            edge_labels: true,
        }
    }
}

/// Renders the thresholded graph as a DOT digraph. Nodes appear in centroid
/// time order and edges follow that order, so identical inputs give
/// identical text.
pub fn export_dot(graph: &EvolutionGraph, options: DotOptions) -> String {
    let order = graph.node_order();
    let mut out = String::new();
    out.push_str("digraph evolution {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box];\n");
    for &j in &order {
        let meta = &graph.cluster_meta[j];
        let extent = match meta.extent {
            Some((lo, hi)) => alloc::format!("[{lo}, {hi}]"),
            None => String::from("empty"),
        };
        let _ = writeln!(
            out,
            "  c{j} [label=\"c{j}\\nt={:.2}\\n{extent}\\nn={}\"];",
            meta.mu_t, meta.size
        );
    }
    for &p in &order {
        for &q in &order {
            if !graph.has_edge(p, q) || (options.drop_self_loops && p == q) {
                continue;
            }
            if options.edge_labels {
                let _ = writeln!(out, "  c{p} -> c{q} [label=\"{:.2}\"];", graph.weight(p, q));
            } else {
                let _ = writeln!(out, "  c{p} -> c{q};");
            }
        }
    }
    out.push_str("}\n");
    out
}
