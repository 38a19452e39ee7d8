//! LocalMax-Cut and LocalMax-k-Cut under single-vertex moves, plus the
//! party-affiliation and hedonic games that reduce to them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::differing;
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, Covering, SeparabilityParams, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{index_width, product, push_index, read_index};

/// Block index per vertex.
pub type Partition = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutInstance {
    pub vertices: usize,
    /// Undirected weighted edges `(u, v, w)`.
    pub edges: Vec<(usize, usize, f64)>,
    pub blocks: usize,
}

impl CutInstance {
    /// Accepts any finite weights; see [`CutInstance::validate_support`].
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>, blocks: usize) -> Result<Self> {
        if blocks < 2 {
            return Err(invalid!("need at least 2 blocks, got {blocks}"));
        }
        for (e, &(u, v, w)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices || u == v {
                return Err(invalid!("edge {e} = ({u}, {v}) is not a proper edge"));
            }
            if !w.is_finite() {
                return Err(invalid!("edge {e} weight {w} is not finite"));
            }
        }
        Ok(Self { vertices, edges, blocks })
    }

    /// Checks that every weight lies in [-1, 1].
    pub fn validate_support(&self) -> Result<()> {
        match self.edges.iter().find(|e| !(-1.0..=1.0).contains(&e.2)) {
            Some(e) => Err(invalid!("edge weight {} outside [-1, 1]", e.2)),
            None => Ok(()),
        }
    }

    pub fn is_valid(&self, p: &[usize]) -> bool {
        p.len() == self.vertices && p.iter().all(|&b| b < self.blocks)
    }

    pub fn cut_weight(&self, p: &[usize]) -> f64 {
        self.edges.iter().filter(|&&(u, v, _)| p[u] != p[v]).map(|e| e.2).sum()
    }

    /// Every single-vertex block change, vertex-major then block index.
    pub fn flip_neighbors(&self, p: &[usize]) -> Vec<Partition> {
        let mut out = Vec::with_capacity(self.vertices * (self.blocks - 1));
        for v in 0..self.vertices {
            for b in 0..self.blocks {
                if b != p[v] {
                    let mut q = p.to_vec();
                    q[v] = b;
                    out.push(q);
                }
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0; self.vertices];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v)
            .collect()
    }

    /// `(n, Δ, 2)` for two blocks, `(n, Δ, 3)` otherwise.
    pub fn stated_params(&self) -> SeparabilityParams {
        SeparabilityParams {
            lambda: self.vertices as u64,
            beta: self.max_degree() as u64,
            mu: if self.blocks == 2 { 2 } else { 3 },
        }
    }

    fn width(&self) -> usize {
        index_width(self.blocks)
    }
}

impl LocalProblem for CutInstance {
    type Solution = Partition;

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn objective(&self, x: &Partition) -> f64 {
        self.cut_weight(x)
    }

    fn neighbors(&self, x: &Partition) -> Vec<Partition> {
        self.flip_neighbors(x)
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Partition>> {
        product(&vec![self.blocks; self.vertices], max_count)
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_count} partitions")))
    }

    fn is_feasible(&self, x: &Partition) -> bool {
        self.is_valid(x)
    }
}

impl CloEncoder for CutInstance {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.edges.len(),
            nu_bar: self.vertices * self.width(),
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        if self.edges.is_empty() {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::with_scale(self.edges.iter().map(|e| e.2).collect())
    }

    fn encode(&self, x: &Partition) -> Configuration {
        let mut bits = Vec::new();
        for &b in x {
            push_index(&mut bits, b, self.width());
        }
        Configuration::new(self.edges.iter().map(|&(u, v, _)| (x[u] != x[v]) as u64).collect(), bits)
    }

    fn decode(&self, s: &Configuration) -> Option<Partition> {
        let w = self.width();
        if s.noncost_part.len() != self.vertices * w {
            return None;
        }
        let p: Partition = (0..self.vertices).map(|v| read_index(&s.noncost_part, v * w, w)).collect();
        self.is_valid(&p).then_some(p)
    }

    /// One cluster per moved vertex; its witness is the incident edges.
    fn prescribed_covering(&self) -> Result<Covering> {
        Ok(Covering {
            transition_clusters: (0..self.vertices).map(|v| TransitionCluster::Symbolic(vec![v as i64])).collect(),
            coordinate_clusters: Covering::singletons(self.edges.len()),
            witnesses: (0..self.vertices).map(|v| self.incident(v)).collect(),
        })
    }

    fn clusters_of(&self, from: &Partition, to: &Partition) -> Vec<ClusterTag> {
        match differing(from, to).as_slice() {
            [v] => vec![vec![*v as i64]],
            _ => Vec::new(),
        }
    }
}

/// Players pick a side; enemy edges are satisfied when cut, friendly edges when not.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartyAffiliationGame {
    pub players: usize,
    /// `(u, v, w, friendly)` with `w ≥ 0`.
    pub edges: Vec<(usize, usize, f64, bool)>,
}

impl PartyAffiliationGame {
    pub fn new(players: usize, edges: Vec<(usize, usize, f64, bool)>) -> Result<Self> {
        validate_game_edges(players, edges.iter().map(|e| (e.0, e.1, e.2)))?;
        Ok(Self { players, edges })
    }

    /// Total weight of satisfied edges at player `v`.
    pub fn payoff(&self, sides: &[usize], v: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| (e.0 == v || e.1 == v) && ((sides[e.0] != sides[e.1]) != e.3))
            .map(|e| e.2)
            .sum()
    }

    pub fn is_pne(&self, sides: &[usize]) -> bool {
        (0..self.players).all(|v| {
            let mut q = sides.to_vec();
            q[v] = 1 - q[v];
            self.payoff(&q, v) <= self.payoff(sides, v)
        })
    }
}

/// Players form coalitions; a player's payoff is the weight of its edges inside its coalition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HedonicGame {
    pub players: usize,
    /// `(u, v, w)`; negative weights are enmities.
    pub edges: Vec<(usize, usize, f64)>,
}

impl HedonicGame {
    pub fn new(players: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        validate_game_edges(players, edges.iter().copied())?;
        Ok(Self { players, edges })
    }

    pub fn payoff(&self, coalition: &[usize], v: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| (e.0 == v || e.1 == v) && coalition[e.0] == coalition[e.1])
            .map(|e| e.2)
            .sum()
    }

    /// Coalition labels range over `0..players`.
    pub fn is_pne(&self, coalition: &[usize]) -> bool {
        (0..self.players).all(|v| {
            let here = self.payoff(coalition, v);
            (0..self.players).all(|c| {
                let mut q = coalition.to_vec();
                q[v] = c;
                self.payoff(&q, v) <= here
            })
        })
    }
}

fn validate_game_edges(players: usize, edges: impl Iterator<Item = (usize, usize, f64)>) -> Result<()> {
    for (e, (u, v, w)) in edges.enumerate() {
        if u >= players || v >= players || u == v {
            return Err(invalid!("edge {e} = ({u}, {v}) is not a proper edge"));
        }
        if !w.is_finite() {
            return Err(invalid!("edge {e} weight {w} is not finite"));
        }
    }
    Ok(())
}

/// Friendly edges get negated weights; two blocks.
pub fn party_affiliation_to_maxcut(game: &PartyAffiliationGame) -> Result<CutInstance> {
    if let Some(e) = game.edges.iter().find(|e| e.2 < 0.0) {
        return Err(invalid!("party-affiliation weight {} is negative", e.2));
    }
    CutInstance::new(
        game.players,
        game.edges.iter().map(|&(u, v, w, f)| (u, v, if f { -w } else { w })).collect(),
        2,
    )
}

/// All weights negated; one block per player.
pub fn hedonic_to_maxkcut(game: &HedonicGame) -> Result<CutInstance> {
    CutInstance::new(
        game.players,
        game.edges.iter().map(|&(u, v, w)| (u, v, -w)).collect(),
        game.players.max(2),
    )
}
