//! Coverings of transitions and coordinates, their certification, and the
//! iteration bound they imply.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::clo::{CloInstance, Configuration, Transition};
use crate::error::{invalid, Error, Result};
use crate::oracle::{EnumBudget, NeighborhoodGraph};

/// Structured key naming a symbolic transition cluster.
pub type ClusterTag = Vec<i64>;

/// A nonempty set of cost coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CoordinateCluster {
    pub indices: Vec<usize>,
}

impl CoordinateCluster {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(invalid!("coordinate clusters must be nonempty"));
        }
        Ok(Self { indices })
    }

    pub fn singleton(i: usize) -> Self {
        Self { indices: alloc::vec![i] }
    }
}

/// Either an explicit list of transitions or a tag resolved by an encoder.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TransitionCluster {
    Explicit(Vec<Transition>),
    Symbolic(ClusterTag),
}

impl TransitionCluster {
    /// Coordinates changed by some member transition.
    pub fn core(&self) -> Result<Vec<usize>> {
        match self {
            TransitionCluster::Explicit(ts) => Ok(core(ts)),
            TransitionCluster::Symbolic(tag) => Err(Error::UnsupportedAtScale(alloc::format!(
                "symbolic cluster {tag:?} needs an enumerator"
            ))),
        }
    }
}

/// Transition clusters, coordinate clusters, and one witness per transition cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Covering {
    pub transition_clusters: Vec<TransitionCluster>,
    pub coordinate_clusters: Vec<CoordinateCluster>,
    /// `witnesses[t]` indexes into `coordinate_clusters` and must cover the core of cluster `t`.
    pub witnesses: Vec<Vec<usize>>,
}

impl Covering {
    /// One cluster holding every transition, one coordinate cluster holding every coordinate.
    pub fn coarsest(all_transitions: Vec<Transition>, nu: usize) -> Self {
        Self {
            transition_clusters: alloc::vec![TransitionCluster::Explicit(all_transitions)],
            coordinate_clusters: alloc::vec![CoordinateCluster {
                indices: (0..nu).collect()
            }],
            witnesses: alloc::vec![alloc::vec![0]],
        }
    }

    /// Singleton coordinate clusters `{0}, …, {nu-1}`.
    pub fn singletons(nu: usize) -> Vec<CoordinateCluster> {
        (0..nu).map(CoordinateCluster::singleton).collect()
    }
}

/// Maps an edge of the neighborhood graph to the symbolic clusters containing it.
pub trait ClusterResolver: Send + Sync {
    fn clusters_of(&self, from: &Configuration, to: &Configuration) -> Vec<ClusterTag>;
}

/// Separability parameters of a certified covering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparabilityParams {
    pub lambda: u64,
    pub beta: u64,
    pub mu: u64,
}

impl SeparabilityParams {
    /// `μ^β · λ`, the quantity that decides the bound.
    pub fn mu_beta_lambda(&self) -> f64 {
        libm::pow(self.mu as f64, self.beta as f64) * self.lambda as f64
    }
}

/// Why a covering failed certification.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UncoveredTransition { transition: Transition },
    UncoveredCoordinate { coordinate: usize },
    CoordinateOutOfRange { cluster: usize, coordinate: usize },
    EmptyCoordinateCluster { cluster: usize },
    NotATransition { cluster: usize, transition: Transition },
    WitnessCountMismatch { clusters: usize, witnesses: usize },
    BadWitnessIndex { cluster: usize, index: usize },
    WitnessMissesCore { cluster: usize, coordinate: usize, transition: Transition },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UncoveredTransition { transition } => write!(
                f,
                "transition {} -> {} is in no cluster",
                transition.from, transition.to
            ),
            Violation::UncoveredCoordinate { coordinate } => {
                write!(f, "coordinate {coordinate} is in no coordinate cluster")
            }
            Violation::CoordinateOutOfRange { cluster, coordinate } => {
                write!(f, "coordinate cluster {cluster} lists {coordinate}, out of range")
            }
            Violation::EmptyCoordinateCluster { cluster } => {
                write!(f, "coordinate cluster {cluster} is empty")
            }
            Violation::NotATransition { cluster, transition } => write!(
                f,
                "cluster {cluster} lists {} -> {}, which is not an edge",
                transition.from, transition.to
            ),
            Violation::WitnessCountMismatch { clusters, witnesses } => {
                write!(f, "{clusters} transition clusters but {witnesses} witnesses")
            }
            Violation::BadWitnessIndex { cluster, index } => {
                write!(f, "witness of cluster {cluster} names missing coordinate cluster {index}")
            }
            Violation::WitnessMissesCore {
                cluster,
                coordinate,
                transition,
            } => write!(
                f,
                "witness of cluster {cluster} misses core coordinate {coordinate}, changed by {} -> {}",
                transition.from, transition.to
            ),
        }
    }
}

/// Coordinates where some transition changes the cost part.
pub fn core(transitions: &[Transition]) -> Vec<usize> {
    let mut out = BTreeSet::new();
    for t in transitions {
        for (i, (a, b)) in t.from.cost_part.iter().zip(&t.to.cost_part).enumerate() {
            if a != b {
                out.insert(i);
            }
        }
    }
    out.into_iter().collect()
}

/// Number of distinct difference vectors `s_I• − s'_I•` over the transitions.
pub fn diversity(transitions: &[Transition], coords: &[usize]) -> usize {
    transitions
        .iter()
        .map(|t| {
            coords
                .iter()
                .map(|&i| t.from.cost_part[i] as i64 - t.to.cost_part[i] as i64)
                .collect::<Vec<_>>()
        })
        .collect::<BTreeSet<_>>()
        .len()
}

fn projected_diversity(diffs: &BTreeSet<Vec<i64>>, coords: &[usize]) -> usize {
    diffs
        .iter()
        .map(|d| coords.iter().map(|&i| d[i]).collect::<Vec<_>>())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Checks `δ_I(T) ≤ Π_J δ_J(T)` for a cover of `I`.
pub fn check_diversity_product(
    transitions: &[Transition],
    coords: &[usize],
    cover: &[CoordinateCluster],
) -> Result<bool> {
    let covered: BTreeSet<usize> = cover.iter().flat_map(|c| c.indices.iter().copied()).collect();
    if let Some(i) = coords.iter().find(|i| !covered.contains(i)) {
        return Err(invalid!("cover misses coordinate {i}"));
    }
    let lhs = diversity(transitions, coords) as u128;
    let rhs = cover
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(diversity(transitions, &c.indices) as u128));
    Ok(lhs <= rhs)
}

/// Per-cluster details of a certification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterReport {
    pub transitions: usize,
    pub core: Vec<usize>,
    /// `max_I δ_I(T)` over all coordinate clusters.
    pub max_diversity: usize,
}

/// Outcome of a successful certification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub params: SeparabilityParams,
    pub clusters: Vec<ClusterReport>,
    /// Number of neighborhood edges checked.
    pub edges: usize,
}

fn violation(v: Violation) -> Error {
    Error::Covering(v)
}

/// Verifies the covering against the enumerated neighborhood graph and
/// computes `(λ, β, μ)`.
///
/// Symbolic clusters are resolved through `resolver`: a cluster with tag `g`
/// holds every edge whose `clusters_of` list contains `g`.
pub fn certify(
    inst: &CloInstance,
    covering: &Covering,
    resolver: Option<&dyn ClusterResolver>,
    budget: EnumBudget,
) -> Result<Certificate> {
    let graph = NeighborhoodGraph::build(inst, budget)?;
    certify_on_graph(&graph, inst.dims.nu, covering, resolver)
}

/// `certify` against a prebuilt neighborhood graph.
pub fn certify_on_graph(
    graph: &NeighborhoodGraph,
    nu: usize,
    covering: &Covering,
    resolver: Option<&dyn ClusterResolver>,
) -> Result<Certificate> {
    let n_clusters = covering.transition_clusters.len();
    if covering.witnesses.len() != n_clusters {
        return Err(violation(Violation::WitnessCountMismatch {
            clusters: n_clusters,
            witnesses: covering.witnesses.len(),
        }));
    }
    // Coordinate clusters cover 0..nu.
    let mut seen = alloc::vec![false; nu];
    for (c, cl) in covering.coordinate_clusters.iter().enumerate() {
        if cl.indices.is_empty() {
            return Err(violation(Violation::EmptyCoordinateCluster { cluster: c }));
        }
        for &i in &cl.indices {
            if i >= nu {
                return Err(violation(Violation::CoordinateOutOfRange {
                    cluster: c,
                    coordinate: i,
                }));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(violation(Violation::UncoveredCoordinate { coordinate: i }));
    }
    for (t, w) in covering.witnesses.iter().enumerate() {
        if let Some(&idx) = w.iter().find(|&&idx| idx >= covering.coordinate_clusters.len()) {
            return Err(violation(Violation::BadWitnessIndex { cluster: t, index: idx }));
        }
    }

    // Per cluster: distinct difference vectors plus one example edge per core coordinate.
    let mut diffs: Vec<BTreeSet<Vec<i64>>> = alloc::vec![BTreeSet::new(); n_clusters];
    let mut sizes = alloc::vec![0usize; n_clusters];
    let mut core_witness: Vec<BTreeMap<usize, (usize, usize)>> = alloc::vec![BTreeMap::new(); n_clusters];
    let mut covered_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut symbolic: BTreeMap<&ClusterTag, usize> = BTreeMap::new();

    let mut record = |cluster: usize, from: usize, to: usize| {
        let d = graph.nodes[from].difference(&graph.nodes[to]);
        for (i, &x) in d.iter().enumerate() {
            if x != 0 {
                core_witness[cluster].entry(i).or_insert((from, to));
            }
        }
        diffs[cluster].insert(d);
        sizes[cluster] += 1;
    };

    for (c, cl) in covering.transition_clusters.iter().enumerate() {
        match cl {
            TransitionCluster::Explicit(ts) => {
                for t in ts {
                    let from = graph.index_of(&t.from);
                    let to = graph.index_of(&t.to);
                    let ok = match (from, to) {
                        (Some(a), Some(b)) => graph.successors(a).contains(&b),
                        _ => false,
                    };
                    if !ok {
                        return Err(violation(Violation::NotATransition {
                            cluster: c,
                            transition: t.clone(),
                        }));
                    }
                    let (a, b) = (from.unwrap(), to.unwrap());
                    record(c, a, b);
                    covered_edges.insert((a, b));
                }
            }
            TransitionCluster::Symbolic(tag) => {
                if resolver.is_none() {
                    return Err(Error::UnsupportedAtScale(alloc::format!(
                        "symbolic cluster {tag:?} needs a resolver"
                    )));
                }
                symbolic.insert(tag, c);
            }
        }
    }

    let mut edges = 0usize;
    for (a, b) in graph.edges() {
        edges += 1;
        let mut in_some = covered_edges.contains(&(a, b));
        if let Some(r) = resolver {
            if !symbolic.is_empty() {
                for tag in r.clusters_of(&graph.nodes[a], &graph.nodes[b]) {
                    if let Some(&c) = symbolic.get(&tag) {
                        record(c, a, b);
                        in_some = true;
                    }
                }
            }
        }
        if !in_some {
            return Err(violation(Violation::UncoveredTransition {
                transition: Transition::new(graph.nodes[a].clone(), graph.nodes[b].clone()),
            }));
        }
    }

    let mut clusters = Vec::with_capacity(n_clusters);
    let mut mu = 0usize;
    let mut beta = 0usize;
    for c in 0..n_clusters {
        let witness: BTreeSet<usize> = covering.witnesses[c]
            .iter()
            .flat_map(|&w| covering.coordinate_clusters[w].indices.iter().copied())
            .collect();
        for (&i, &(a, b)) in &core_witness[c] {
            if !witness.contains(&i) {
                return Err(violation(Violation::WitnessMissesCore {
                    cluster: c,
                    coordinate: i,
                    transition: Transition::new(graph.nodes[a].clone(), graph.nodes[b].clone()),
                }));
            }
        }
        let max_div = covering
            .coordinate_clusters
            .iter()
            .map(|cl| {
                if diffs[c].is_empty() {
                    0
                } else if cl.indices.iter().all(|&i| !core_witness[c].contains_key(&i)) {
                    // Projection onto untouched coordinates is the zero vector.
                    1
                } else {
                    projected_diversity(&diffs[c], &cl.indices)
                }
            })
            .max()
            .unwrap_or(0);
        mu = mu.max(max_div);
        beta = beta.max(covering.witnesses[c].len());
        clusters.push(ClusterReport {
            transitions: sizes[c],
            core: core_witness[c].keys().copied().collect(),
            max_diversity: max_div,
        });
    }
    Ok(Certificate {
        params: SeparabilityParams {
            lambda: n_clusters as u64,
            beta: beta as u64,
            mu: mu as u64,
        },
        clusters,
        edges,
    })
}

/// A bound value that may have saturated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// Set when the exact value overflowed `f64`; `value` is then `f64::MAX`.
    pub saturated: bool,
}

/// `3 · μ^β · λ · ν² · M · log₂(M+1) · φ`.
pub fn iteration_bound(params: SeparabilityParams, nu: usize, m_cap: u64, phi: f64) -> Result<BoundValue> {
    if nu == 0 || m_cap == 0 || !(phi > 0.0) {
        return Err(invalid!("nu, m_cap and phi must be positive"));
    }
    let m = m_cap as f64;
    let value = 3.0
        * libm::pow(params.mu as f64, params.beta as f64)
        * params.lambda as f64
        * (nu as f64)
        * (nu as f64)
        * m
        * libm::log2(m + 1.0)
        * phi;
    Ok(if value.is_finite() {
        BoundValue {
            value,
            saturated: false,
        }
    } else {
        BoundValue {
            value: f64::MAX,
            saturated: true,
        }
    })
}

/// Human-readable summary line.
pub fn describe(params: &SeparabilityParams) -> String {
    alloc::format!(
        "lambda={} beta={} mu={} mu^beta*lambda={}",
        params.lambda,
        params.beta,
        params.mu,
        params.mu_beta_lambda()
    )
}
