//! Constructive reductions between local search problems, each with a forward
//! and a backward solution map and a brute-force tightness check.
//!
//! Every "large weight" threshold is instantiated as the total source weight plus one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorial::setsystem::Selection;
use crate::combinatorial::{CnfInstance, CutInstance, HsMoves, SetSystemInstance, SetSystemVariant};
use crate::error::{invalid, Error, Result};
use crate::games::{pure_equilibria, CongestionGame, CostModel, NetworkCongestionGame, Path, Profile};
use crate::problem::{is_native_local_optimum, native_local_optima, LocalProblem};

/// Which solutions of the produced instance the backward map is guaranteed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MapsBack {
    LocalOptima,
    PureEquilibria,
}

/// Produced-instance size against the polynomial the reduction promises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SizeCheck {
    pub target: usize,
    pub bound: usize,
}

impl SizeCheck {
    pub fn holds(&self) -> bool {
        self.target <= self.bound
    }
}

/// Outcome of mapping every brute-force target optimum back to the source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessReport {
    pub target_optima: usize,
    /// Optima the backward map rejects.
    pub unmapped: usize,
    /// Optima that map to a source solution that is not locally optimal.
    pub not_optimal: usize,
}

impl TightnessReport {
    pub fn violations(&self) -> usize {
        self.unmapped + self.not_optimal
    }
}

/// A source instance, the instance built from it, and the maps between their solutions.
pub trait ReductionArtifact {
    type Source: LocalProblem;
    type Target;
    type TargetSolution;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    fn maps_back(&self) -> MapsBack;
    fn forward(&self, x: &<Self::Source as LocalProblem>::Solution) -> Self::TargetSolution;
    /// `None` when `y` is outside the class the map handles.
    fn backward(&self, y: &Self::TargetSolution) -> Option<<Self::Source as LocalProblem>::Solution>;
    /// Every target solution of the [`MapsBack`] class, by brute force.
    fn target_optima(&self, max_count: usize) -> Result<Vec<Self::TargetSolution>>;
    fn size(&self) -> SizeCheck;
}

/// Maps each brute-force target optimum back and checks source local optimality.
pub fn verify_tightness<R: ReductionArtifact>(r: &R, max_count: usize) -> Result<TightnessReport> {
    let mut report = TightnessReport::default();
    for y in r.target_optima(max_count)? {
        report.target_optima += 1;
        match r.backward(&y) {
            None => report.unmapped += 1,
            Some(x) if !is_native_local_optimum(r.source(), &x) => report.not_optimal += 1,
            Some(_) => {}
        }
    }
    Ok(report)
}

fn two_block_source(g: &CutInstance) -> Result<()> {
    if g.blocks != 2 {
        return Err(invalid!("the source must be a 2-block cut instance, got {} blocks", g.blocks));
    }
    if let Some(e) = g.edges.iter().find(|e| e.2 < 0.0) {
        return Err(invalid!("edge weight {} is negative", e.2));
    }
    Ok(())
}

fn total_weight(g: &CutInstance) -> f64 {
    g.edges.iter().map(|e| e.2).sum()
}

/// Resource cost shape for the cut-to-congestion reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CongestionVariant {
    /// `κ(1) = 0`, `κ(ℓ) = w_e` for `ℓ ≥ 2`.
    Step,
    /// `κ(ℓ) = ℓ · w_e`.
    Affine,
}

/// Max-cut as a two-strategy congestion game.
#[derive(Clone, Debug, PartialEq)]
pub struct CutToCongestion {
    pub source: CutInstance,
    pub target: CongestionGame,
    pub variant: CongestionVariant,
}

/// Edge `e` yields resources `2e` and `2e + 1`. Vertex `i` picks between the
/// first resources of its edges (strategy 0, block 0) and the second ones.
pub fn maxcut_to_congestion(g: &CutInstance, variant: CongestionVariant) -> Result<CutToCongestion> {
    two_block_source(g)?;
    let strategies = (0..g.vertices)
        .map(|i| {
            let incident: Vec<usize> = (0..g.edges.len())
                .filter(|&e| g.edges[e].0 == i || g.edges[e].1 == i)
                .collect();
            vec![
                incident.iter().map(|&e| 2 * e).collect(),
                incident.iter().map(|&e| 2 * e + 1).collect(),
            ]
        })
        .collect();
    let weights = g.edges.iter().flat_map(|e| [e.2, e.2]);
    let cost_model = match variant {
        CongestionVariant::Step => CostModel::Step {
            breakpoints: vec![vec![2]; 2 * g.edges.len()],
            jumps: weights.map(|w| vec![w]).collect(),
        },
        CongestionVariant::Affine => CostModel::Polynomial {
            coeffs: weights.map(|w| vec![0.0, w]).collect(),
        },
    };
    let target = CongestionGame::new(2 * g.edges.len(), strategies, cost_model)?;
    Ok(CutToCongestion {
        source: g.clone(),
        target,
        variant,
    })
}

impl ReductionArtifact for CutToCongestion {
    type Source = CutInstance;
    type Target = CongestionGame;
    type TargetSolution = Profile;

    fn source(&self) -> &CutInstance {
        &self.source
    }

    fn target(&self) -> &CongestionGame {
        &self.target
    }

    fn maps_back(&self) -> MapsBack {
        MapsBack::PureEquilibria
    }

    fn forward(&self, x: &Vec<usize>) -> Profile {
        x.clone()
    }

    fn backward(&self, y: &Profile) -> Option<Vec<usize>> {
        self.target.is_valid_profile(y).then(|| y.clone())
    }

    fn target_optima(&self, max_count: usize) -> Result<Vec<Profile>> {
        Ok(self
            .target
            .solutions(max_count)?
            .into_iter()
            .filter(|p| self.target.is_pne(p))
            .collect())
    }

    /// Players, resources and strategy entries: `n + 6m ≤ 6(n + m)`.
    fn size(&self) -> SizeCheck {
        let entries: usize = self.target.strategies.iter().flatten().map(Vec::len).sum();
        SizeCheck {
            target: self.target.players() + self.target.resources + entries,
            bound: 6 * (self.source.vertices + self.source.edges.len()),
        }
    }
}

/// Max-cut as a network congestion game built from supernodes.
#[derive(Clone, Debug, PartialEq)]
pub struct CutToNetwork {
    pub source: CutInstance,
    pub target: NetworkCongestionGame,
    /// The two dominant paths of each player; index 0 maps to block 0.
    pub dominant: Vec<[Path; 2]>,
    /// Heavy-arc unit `W`.
    pub heavy_unit: f64,
}

/// Arc builder that records the General-model cost row of every arc.
struct ArcList {
    players: usize,
    arcs: Vec<(usize, usize)>,
    table: Vec<Vec<f64>>,
}

impl ArcList {
    fn push(&mut self, from: usize, to: usize, row: Vec<f64>) -> usize {
        self.arcs.push((from, to));
        self.table.push(row);
        self.arcs.len() - 1
    }

    fn constant(&mut self, from: usize, to: usize, c: f64) -> usize {
        let row = vec![c; self.players];
        self.push(from, to, row)
    }
}

/// Nodes: origins `0..n`, destinations `n..2n`, then an (in, out) node pair per
/// supernode. Supernode `U_ij` of edge `{i, j}`, `i < j`, sits in row `i` and
/// column `j`. Rows run through light arcs, columns through heavy ones, and the
/// arc leaving `U_ij` towards row `i'` costs `(i' − i)·(j + 1)·W`, so every row a
/// path climbs costs `(column + 1)·W`. An isolated vertex gets two parallel light
/// arcs from its origin to its destination.
pub fn maxcut_to_network_congestion(g: &CutInstance) -> Result<CutToNetwork> {
    two_block_source(g)?;
    let n = g.vertices;
    let mut key: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (e, &(u, v, _)) in g.edges.iter().enumerate() {
        if key.insert((u.min(v), u.max(v)), e).is_some() {
            return Err(invalid!("edge {{{u}, {v}}} is listed twice"));
        }
    }
    let heavy_unit = total_weight(g) + 1.0;
    let mut list = ArcList {
        players: n.max(1),
        arcs: Vec::new(),
        table: Vec::new(),
    };
    let half_nodes = 2 * g.edges.len();
    let in_node = |half: usize, e: usize| 2 * n + half * half_nodes + 2 * e;
    let mut dominant: Vec<[Path; 2]> = vec![[Vec::new(), Vec::new()]; n];
    for half in 0..2 {
        let mut regular = vec![0; g.edges.len()];
        for (e, &(_, _, w)) in g.edges.iter().enumerate() {
            let mut row = vec![w; n];
            row[0] = 0.0;
            regular[e] = list.push(in_node(half, e), in_node(half, e) + 1, row);
        }
        let column = |j: usize| -> Vec<usize> { key.keys().filter(|k| k.1 == j).map(|k| k.0).collect() };
        let row_of = |i: usize| -> Vec<usize> { key.range((i, i + 1)..(i + 1, 0)).map(|(&(_, j), _)| j).collect() };
        let node = |i: usize, j: usize| in_node(half, key[&(i, j)]);
        // Row and column arcs, keyed by the supernodes they join.
        let mut link: BTreeMap<((usize, usize), (usize, usize)), usize> = BTreeMap::new();
        for i in 0..n {
            for w in row_of(i).windows(2) {
                let a = list.constant(node(i, w[0]) + 1, node(i, w[1]), 0.0);
                link.insert(((i, w[0]), (i, w[1])), a);
            }
        }
        for j in 0..n {
            for w in column(j).windows(2) {
                let c = ((w[1] - w[0]) * (j + 1)) as f64 * heavy_unit;
                let a = list.constant(node(w[0], j) + 1, node(w[1], j), c);
                link.insert(((w[0], j), (w[1], j)), a);
            }
        }
        for i in 0..n {
            let (up, right) = (column(i), row_of(i));
            if let (Some(&k), Some(&l)) = (up.last(), right.first()) {
                let c = ((i - k) * (i + 1)) as f64 * heavy_unit;
                let a = list.constant(node(k, i) + 1, node(i, l), c);
                link.insert(((k, i), (i, l)), a);
            }
            let chain: Vec<(usize, usize)> = up
                .iter()
                .map(|&k| (k, i))
                .chain(right.iter().map(|&l| (i, l)))
                .collect();
            let path = &mut dominant[i][half];
            match (chain.first(), chain.last()) {
                (Some(&first), Some(&last)) => {
                    path.push(list.constant(i, node(first.0, first.1), 0.0));
                    for (t, s) in chain.iter().enumerate() {
                        if t > 0 {
                            path.push(link[&(chain[t - 1], *s)]);
                        }
                        path.push(regular[key[s]]);
                    }
                    path.push(list.constant(node(last.0, last.1) + 1, n + i, 0.0));
                }
                _ => path.push(list.constant(i, n + i, 0.0)),
            }
        }
    }
    let nodes = 2 * n + 2 * half_nodes;
    let players = (0..n).map(|i| (i, n + i)).collect();
    let target = NetworkCongestionGame::new(nodes, list.arcs, players, CostModel::General { table: list.table })?;
    Ok(CutToNetwork {
        source: g.clone(),
        target,
        dominant,
        heavy_unit,
    })
}

impl CutToNetwork {
    /// True iff every player is on one of its two dominant paths.
    pub fn on_dominant_paths(&self, p: &[Path]) -> bool {
        p.len() == self.dominant.len() && p.iter().zip(&self.dominant).all(|(x, q)| q.contains(x))
    }

    /// Number of arcs on the longest dominant path.
    pub fn longest_dominant_path(&self) -> usize {
        self.dominant.iter().flatten().map(Vec::len).max().unwrap_or(0)
    }
}

/// Simple paths listed per player when enumerating equilibria.
const MAX_PATHS: usize = 100_000;

impl ReductionArtifact for CutToNetwork {
    type Source = CutInstance;
    type Target = NetworkCongestionGame;
    type TargetSolution = Vec<Path>;

    fn source(&self) -> &CutInstance {
        &self.source
    }

    fn target(&self) -> &NetworkCongestionGame {
        &self.target
    }

    fn maps_back(&self) -> MapsBack {
        MapsBack::PureEquilibria
    }

    fn forward(&self, x: &Vec<usize>) -> Vec<Path> {
        x.iter().zip(&self.dominant).map(|(&b, q)| q[b].clone()).collect()
    }

    fn backward(&self, y: &Vec<Path>) -> Option<Vec<usize>> {
        if y.len() != self.dominant.len() {
            return None;
        }
        y.iter().zip(&self.dominant).map(|(p, q)| q.iter().position(|x| x == p)).collect()
    }

    fn target_optima(&self, max_count: usize) -> Result<Vec<Vec<Path>>> {
        pure_equilibria(&self.target, MAX_PATHS, max_count)
    }

    /// Nodes plus arcs: `2n + 4m` nodes and at most `6(n + m)` arcs.
    fn size(&self) -> SizeCheck {
        SizeCheck {
            target: self.target.nodes + self.target.arcs.len(),
            bound: 10 * (self.source.vertices + self.source.edges.len()),
        }
    }
}

/// Max-cut as Max-k-cut with `k` heavily tied special vertices per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct CutToKCut {
    pub source: CutInstance,
    pub target: CutInstance,
    pub k: usize,
}

impl CutToKCut {
    /// Index of the `j`-th special vertex (0-based) of vertex `v`.
    pub fn special(&self, v: usize, j: usize) -> usize {
        self.source.vertices + v * self.k + j
    }
}

/// Special vertices `n + v·k + j`. Each vertex's specials form a clique, and the
/// vertex is tied to its specials `2..k`. All special edges weigh `Σw + 1`.
pub fn maxcut_to_maxkcut(g: &CutInstance, k: usize) -> Result<CutToKCut> {
    two_block_source(g)?;
    if k < 2 {
        return Err(invalid!("k = {k} must be at least 2"));
    }
    let n = g.vertices;
    let heavy = total_weight(g) + 1.0;
    let mut edges = g.edges.clone();
    for v in 0..n {
        let s = |j: usize| n + v * k + j;
        for a in 0..k {
            for b in a + 1..k {
                edges.push((s(a), s(b), heavy));
            }
        }
        for j in 2..k {
            edges.push((v, s(j), heavy));
        }
    }
    Ok(CutToKCut {
        source: g.clone(),
        target: CutInstance::new(n * (k + 1), edges, k)?,
        k,
    })
}

impl ReductionArtifact for CutToKCut {
    type Source = CutInstance;
    type Target = CutInstance;
    type TargetSolution = Vec<usize>;

    fn source(&self) -> &CutInstance {
        &self.source
    }

    fn target(&self) -> &CutInstance {
        &self.target
    }

    fn maps_back(&self) -> MapsBack {
        MapsBack::LocalOptima
    }

    /// Specials `j` go to block `j`.
    fn forward(&self, x: &Vec<usize>) -> Vec<usize> {
        let specials = (0..self.source.vertices).flat_map(|_| 0..self.k);
        x.iter().copied().chain(specials).collect()
    }

    /// Blocks of vertex 0's first two specials become blocks 0 and 1.
    fn backward(&self, y: &Vec<usize>) -> Option<Vec<usize>> {
        let n = self.source.vertices;
        if !self.target.is_valid(y) {
            return None;
        }
        if n == 0 {
            return Some(Vec::new());
        }
        let (b0, b1) = (y[self.special(0, 0)], y[self.special(0, 1)]);
        if b0 == b1 {
            return None;
        }
        y[..n]
            .iter()
            .map(|&b| match b {
                _ if b == b0 => Some(0),
                _ if b == b1 => Some(1),
                _ => None,
            })
            .collect()
    }

    fn target_optima(&self, max_count: usize) -> Result<Vec<Vec<usize>>> {
        native_local_optima(&self.target, max_count)
    }

    /// Vertices plus edges, at most `(n + m)(k + 1)²`.
    fn size(&self) -> SizeCheck {
        SizeCheck {
            target: self.target.vertices + self.target.edges.len(),
            bound: (self.source.vertices + self.source.edges.len()) * (self.k + 1) * (self.k + 1),
        }
    }
}

/// Weighted MaxSat under single flips as hitting set under single exchanges.
#[derive(Clone, Debug, PartialEq)]
pub struct SatToHittingSet {
    pub source: CnfInstance,
    pub target: SetSystemInstance,
}

/// Element `2j` is `x_j` and `2j + 1` its negation. Sets `0..n` are the pairs
/// `{x_j, x̄_j}` weighing `Σw + 1`; set `n + c` holds the literals of clause `c`.
/// Selections are capped at `n` elements.
pub fn maxsat_to_hittingset(c: &CnfInstance) -> Result<SatToHittingSet> {
    if c.k != 1 {
        return Err(invalid!("the source must use single flips, got k = {}", c.k));
    }
    let n = c.variables;
    let heavy = c.clauses.iter().map(|cl| cl.weight).sum::<f64>() + 1.0;
    let element = |l: i64| 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0);
    let sets = (0..n)
        .map(|j| vec![2 * j, 2 * j + 1])
        .chain(c.clauses.iter().map(|cl| cl.literals.iter().map(|&l| element(l)).collect()))
        .collect();
    let weights = vec![heavy; n].into_iter().chain(c.clauses.iter().map(|cl| cl.weight)).collect();
    let variant = SetSystemVariant::Hs {
        cap: n,
        k: 1,
        moves: HsMoves::Exchange,
    };
    Ok(SatToHittingSet {
        source: c.clone(),
        target: SetSystemInstance::new(2 * n, sets, weights, variant)?,
    })
}

impl ReductionArtifact for SatToHittingSet {
    type Source = CnfInstance;
    type Target = SetSystemInstance;
    type TargetSolution = Selection;

    fn source(&self) -> &CnfInstance {
        &self.source
    }

    fn target(&self) -> &SetSystemInstance {
        &self.target
    }

    fn maps_back(&self) -> MapsBack {
        MapsBack::LocalOptima
    }

    fn forward(&self, x: &Vec<bool>) -> Selection {
        x.iter()
            .enumerate()
            .map(|(j, &v)| 2 * j + usize::from(!v))
            .collect()
    }

    /// Reads the polarity of each variable; needs exactly one element per pair.
    fn backward(&self, y: &Selection) -> Option<Vec<bool>> {
        let n = self.source.variables;
        let mut a = vec![None; n];
        for &x in y {
            let slot = a.get_mut(x / 2)?;
            if slot.is_some() {
                return None;
            }
            *slot = Some(x % 2 == 0);
        }
        a.into_iter().collect()
    }

    fn target_optima(&self, max_count: usize) -> Result<Vec<Selection>> {
        native_local_optima(&self.target, max_count)
    }

    /// Ground elements, sets and set entries, at most `5(n + m + L)` for `L` literals.
    fn size(&self) -> SizeCheck {
        let literals: usize = self.source.clauses.iter().map(|c| c.literals.len()).sum();
        let entries: usize = self.target.sets.iter().map(Vec::len).sum();
        SizeCheck {
            target: self.target.ground + self.target.sets.len() + entries,
            bound: 5 * (self.source.variables + self.source.clauses.len() + literals),
        }
    }
}

/// Fails unless a reduction's size check holds.
pub fn ensure_size<R: ReductionArtifact>(r: &R) -> Result<()> {
    let s = r.size();
    if s.holds() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "produced size {} exceeds the promised {}",
            s.target, s.bound
        )))
    }
}
