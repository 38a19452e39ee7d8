//! Brute-force ground truth: enumeration, transition graphs, longest paths.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::clo::{is_local_optimum, CloInstance, Configuration, CostVector, Sense};
use crate::error::{Error, Result};
use crate::smoothing::SmoothedCostModel;
use crate::util::derive_seed;

/// Hard caps on brute-force work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumBudget {
    pub max_nodes: usize,
    pub max_edge_checks: u64,
}

impl Default for EnumBudget {
    fn default() -> Self {
        Self {
            max_nodes: 1_000_000,
            max_edge_checks: 100_000_000,
        }
    }
}

/// Every feasible configuration, sorted and duplicate-free.
pub fn enumerate_configurations(inst: &CloInstance, budget: EnumBudget) -> Result<Vec<Configuration>> {
    let mut all = inst.neighborhood.configurations(budget.max_nodes)?;
    if all.len() > budget.max_nodes {
        return Err(Error::UnsupportedAtScale(format!(
            "{} configurations exceed the budget of {}",
            all.len(),
            budget.max_nodes
        )));
    }
    all.sort();
    all.dedup();
    for s in &all {
        inst.dims.check(s)?;
    }
    Ok(all)
}

/// The full neighborhood graph over enumerated configurations, cost-free.
///
/// Built once, then realized under many cost vectors.
#[derive(Clone, Debug)]
pub struct NeighborhoodGraph {
    pub nodes: Arc<Vec<Configuration>>,
    /// CSR offsets into `targets`.
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl NeighborhoodGraph {
    pub fn build(inst: &CloInstance, budget: EnumBudget) -> Result<Self> {
        let nodes = enumerate_configurations(inst, budget)?;
        let index: BTreeMap<&Configuration, usize> =
            nodes.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut targets = Vec::new();
        let mut checks: u64 = 0;
        offsets.push(0);
        for s in &nodes {
            for t in inst.neighbors(s) {
                checks += 1;
                if checks > budget.max_edge_checks {
                    return Err(Error::UnsupportedAtScale(format!(
                        "more than {} edge checks",
                        budget.max_edge_checks
                    )));
                }
                match index.get(&t) {
                    Some(&j) => targets.push(j),
                    None => {
                        return Err(Error::Infeasible(format!(
                            "neighbor {t} of {s} is not an enumerated configuration"
                        )))
                    }
                }
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            nodes: Arc::new(nodes),
            offsets,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn index_of(&self, s: &Configuration) -> Option<usize> {
        self.nodes.binary_search(s).ok()
    }

    /// Neighbor indices of node `i`, in oracle order.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Every edge `(from, to)` of the neighborhood graph.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| self.successors(i).iter().map(move |&j| (i, j)))
    }

    /// Keeps the strictly improving edges under `costs`.
    pub fn realize(&self, costs: &CostVector, sense: Sense) -> Result<TransitionGraph> {
        if let Some(s) = self.nodes.first() {
            if s.cost_part.len() != costs.len() {
                return Err(Error::DimensionMismatch {
                    expected: s.cost_part.len(),
                    found: costs.len(),
                });
            }
        }
        let node_costs: Vec<f64> = self.nodes.iter().map(|s| costs.dot(s)).collect();
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for i in 0..self.len() {
            for &j in self.successors(i) {
                let delta = sense.improvement(node_costs[i], node_costs[j]);
                if delta > 0.0 {
                    edges.push((i, j, delta));
                }
            }
            offsets.push(edges.len());
        }
        Ok(TransitionGraph {
            nodes: Arc::clone(&self.nodes),
            node_costs,
            costs: costs.clone(),
            sense,
            offsets,
            edges,
        })
    }
}

/// Improving edges of the neighborhood graph under one cost vector.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    pub nodes: Arc<Vec<Configuration>>,
    pub node_costs: Vec<f64>,
    pub costs: CostVector,
    pub sense: Sense,
    offsets: Vec<usize>,
    /// `(from, to, delta)` grouped by `from`.
    edges: Vec<(usize, usize, f64)>,
}

impl TransitionGraph {
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn out_edges(&self, i: usize) -> &[(usize, usize, f64)] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.out_edges(i).is_empty()).collect()
    }

    /// One `from-index to-index delta` line per improving edge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for &(i, j, d) in &self.edges {
            let _ = writeln!(out, "{i} {j} {d}");
        }
        out
    }
}

/// Transition graph of `inst` under `costs`.
pub fn build_transition_graph(
    inst: &CloInstance,
    costs: &CostVector,
    budget: EnumBudget,
) -> Result<TransitionGraph> {
    NeighborhoodGraph::build(inst, budget)?.realize(costs, inst.sense)
}

/// Number of edges on the longest improving path.
pub fn longest_improving_path(tg: &TransitionGraph) -> Result<usize> {
    let n = tg.nodes.len();
    let mut indegree = vec![0usize; n];
    for &(_, j, _) in tg.edges() {
        indegree[j] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop() {
        order.push(i);
        for &(_, j, _) in tg.out_edges(i) {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push(j);
            }
        }
    }
    if order.len() < n {
        return Err(Error::Cycle(find_cycle(tg, &indegree)));
    }
    // Longest path starting at each node, processed sinks first.
    let mut longest = vec![0usize; n];
    for &i in order.iter().rev() {
        longest[i] = tg
            .out_edges(i)
            .iter()
            .map(|&(_, j, _)| longest[j] + 1)
            .max()
            .unwrap_or(0);
    }
    Ok(longest.into_iter().max().unwrap_or(0))
}

/// Walks successors among nodes left over by Kahn's algorithm until one repeats.
fn find_cycle(tg: &TransitionGraph, indegree: &[usize]) -> Vec<usize> {
    let Some(mut cur) = (0..indegree.len()).find(|&i| indegree[i] > 0) else {
        return Vec::new();
    };
    let mut seen = BTreeMap::new();
    let mut path = Vec::new();
    loop {
        if let Some(&pos) = seen.get(&cur) {
            return path[pos..].to_vec();
        }
        seen.insert(cur, path.len());
        path.push(cur);
        match tg.out_edges(cur).iter().find(|&&(_, j, _)| indegree[j] > 0) {
            Some(&(_, j, _)) => cur = j,
            None => return path,
        }
    }
}

/// Checks that sinks of `tg` are exactly the local optima of `inst` under `tg.costs`.
///
/// Returns the sink indices.
pub fn verify_sinks(tg: &TransitionGraph, inst: &CloInstance) -> Result<Vec<usize>> {
    let realized = inst.with_costs(tg.costs.clone())?;
    for (i, s) in tg.nodes.iter().enumerate() {
        let is_sink = tg.out_edges(i).is_empty();
        let is_opt = is_local_optimum(&realized, s, tg.sense)?;
        if is_sink != is_opt {
            return Err(Error::SinkMismatch {
                node: i,
                is_sink,
                is_local_optimum: is_opt,
            });
        }
    }
    Ok(tg.sinks())
}

/// Longest improving path for `samples` cost vectors drawn from `model`.
///
/// Sample `r` uses seed `derive_seed(model.seed, r)`.
pub fn longest_path_samples(
    graph: &NeighborhoodGraph,
    model: &SmoothedCostModel,
    sense: Sense,
    samples: usize,
) -> Result<Vec<usize>> {
    (0..samples)
        .map(|r| {
            let costs = model.with_seed(derive_seed(model.seed, r as u64)).sample();
            longest_improving_path(&graph.realize(&costs, sense)?)
        })
        .collect()
}
