//! Network coordination games: every edge plays a matrix coordination game.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::congestion::{Profile, ResponseRule};
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, CoordinateCluster, Covering, TransitionCluster};
use crate::engine::RunStatus;
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{index_width, product, push_index, read_index};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkCoordinationGame {
    pub vertices: usize,
    pub actions: usize,
    /// Undirected edges `(u, v)`.
    pub edges: Vec<(usize, usize)>,
    /// `payoffs[e][a][b]` is what both endpoints of edge `e = (u, v)` get when `u` plays `a` and `v` plays `b`.
    pub payoffs: Vec<Vec<Vec<f64>>>,
}

impl NetworkCoordinationGame {
    pub fn new(
        vertices: usize,
        actions: usize,
        edges: Vec<(usize, usize)>,
        payoffs: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if vertices == 0 || actions == 0 {
            return Err(invalid!("need at least one vertex and one action"));
        }
        if edges.len() != payoffs.len() {
            return Err(invalid!("{} edges but {} payoff matrices", edges.len(), payoffs.len()));
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices || u == v {
                return Err(invalid!("edge {e} = ({u}, {v}) is not a proper edge"));
            }
            let m = &payoffs[e];
            if m.len() != actions || m.iter().any(|row| row.len() != actions) {
                return Err(invalid!("edge {e}: payoff matrix must be {actions}x{actions}"));
            }
            if let Some(x) = m.iter().flatten().find(|x| !(-1.0..=1.0).contains(*x)) {
                return Err(invalid!("edge {e}: payoff {x} outside [-1, 1]"));
            }
        }
        Ok(Self {
            vertices,
            actions,
            edges,
            payoffs,
        })
    }

    /// `A_uv(a, b)` for the edge in either orientation.
    fn entry(&self, e: usize, p: &Profile) -> f64 {
        let (u, v) = self.edges[e];
        self.payoffs[e][p[u]][p[v]]
    }

    pub fn payoff(&self, p: &Profile, u: usize) -> f64 {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == u || b == u)
            .map(|(e, _)| self.entry(e, p))
            .sum()
    }

    pub fn potential(&self, p: &Profile) -> f64 {
        (0..self.edges.len()).map(|e| self.entry(e, p)).sum()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0; self.vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub fn is_valid_profile(&self, p: &Profile) -> bool {
        p.len() == self.vertices && p.iter().all(|&a| a < self.actions)
    }

    pub fn is_pne(&self, p: &Profile) -> bool {
        (0..self.vertices).all(|u| {
            let here = self.payoff(p, u);
            (0..self.actions).all(|a| {
                let mut q = p.clone();
                q[u] = a;
                self.payoff(&q, u) <= here
            })
        })
    }

    fn width(&self) -> usize {
        index_width(self.actions)
    }
}

impl LocalProblem for NetworkCoordinationGame {
    type Solution = Profile;

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn objective(&self, x: &Profile) -> f64 {
        self.potential(x)
    }

    fn neighbors(&self, x: &Profile) -> Vec<Profile> {
        let mut out = Vec::new();
        for u in 0..self.vertices {
            for a in 0..self.actions {
                if a != x[u] {
                    let mut y = x.clone();
                    y[u] = a;
                    out.push(y);
                }
            }
        }
        out
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Profile>> {
        product(&vec![self.actions; self.vertices], max_count)
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_count} profiles")))
    }

    fn is_feasible(&self, x: &Profile) -> bool {
        self.is_valid_profile(x)
    }
}

impl CloEncoder for NetworkCoordinationGame {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.edges.len() * self.actions * self.actions,
            nu_bar: self.vertices * self.width(),
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        if self.edges.is_empty() {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::new(self.payoffs.iter().flatten().flatten().copied().collect())
    }

    fn encode(&self, x: &Profile) -> Configuration {
        let k = self.actions;
        let mut cost_part = vec![0; self.edges.len() * k * k];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            cost_part[e * k * k + x[u] * k + x[v]] = 1;
        }
        let mut bits = Vec::new();
        for &a in x {
            push_index(&mut bits, a, self.width());
        }
        Configuration::new(cost_part, bits)
    }

    fn decode(&self, s: &Configuration) -> Option<Profile> {
        let w = self.width();
        if s.noncost_part.len() != self.vertices * w {
            return None;
        }
        let p: Profile = (0..self.vertices).map(|u| read_index(&s.noncost_part, u * w, w)).collect();
        self.is_valid_profile(&p).then_some(p)
    }

    /// Clusters `E(u, a, a')` with witnesses the incident edge blocks.
    fn prescribed_covering(&self) -> Result<Covering> {
        let k2 = self.actions * self.actions;
        let coordinate_clusters = (0..self.edges.len())
            .map(|e| CoordinateCluster {
                indices: (e * k2..(e + 1) * k2).collect(),
            })
            .collect();
        let mut transition_clusters = Vec::new();
        let mut witnesses = Vec::new();
        for u in 0..self.vertices {
            let incident: Vec<usize> = (0..self.edges.len())
                .filter(|&e| self.edges[e].0 == u || self.edges[e].1 == u)
                .collect();
            for a in 0..self.actions {
                for b in 0..self.actions {
                    if a != b {
                        transition_clusters.push(TransitionCluster::Symbolic(vec![u as i64, a as i64, b as i64]));
                        witnesses.push(incident.clone());
                    }
                }
            }
        }
        Ok(Covering {
            transition_clusters,
            coordinate_clusters,
            witnesses,
        })
    }

    fn clusters_of(&self, from: &Profile, to: &Profile) -> Vec<ClusterTag> {
        let changed: Vec<usize> = (0..from.len()).filter(|&u| from[u] != to[u]).collect();
        match changed.as_slice() {
            [u] => vec![vec![*u as i64, from[*u] as i64, to[*u] as i64]],
            _ => Vec::new(),
        }
    }
}

/// `3 · (k⁴)^Δ · nk(k−1) · (mk²)² · φ`.
pub fn coordination_bound(n: usize, m: usize, k: usize, max_degree: usize, phi: f64) -> f64 {
    let (n, m, k) = (n as f64, m as f64, k as f64);
    3.0 * libm::pow(k * k * k * k, max_degree as f64) * n * k * (k - 1.0) * (m * k * k) * (m * k * k) * phi
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationStep {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    pub payoff_delta: f64,
    pub potential_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationTrace {
    pub steps: Vec<CoordinationStep>,
    pub terminal: Profile,
    pub status: RunStatus,
}

/// Better-response dynamics; each move strictly raises the mover's payoff and the potential by the same amount.
pub fn coordination_dynamics(
    game: &NetworkCoordinationGame,
    start: &Profile,
    rule: ResponseRule,
    max_iters: u64,
) -> Result<CoordinationTrace> {
    if !game.is_valid_profile(start) {
        return Err(Error::Infeasible(format!("invalid start profile {start:?}")));
    }
    let n = game.vertices;
    let mut p = start.clone();
    let mut steps = Vec::new();
    let mut next_player = 0;
    loop {
        let mut chosen: Option<(usize, usize, f64)> = None;
        'scan: for off in 0..n {
            let u = match rule {
                ResponseRule::RoundRobinFirst => (next_player + off) % n,
                ResponseRule::BestImprovement => off,
            };
            let here = game.payoff(&p, u);
            for a in 0..game.actions {
                if a == p[u] {
                    continue;
                }
                let mut q = p.clone();
                q[u] = a;
                let d = game.payoff(&q, u) - here;
                if d > 0.0 && chosen.is_none_or(|(_, _, best)| d > best) {
                    chosen = Some((u, a, d));
                    if rule == ResponseRule::RoundRobinFirst {
                        break 'scan;
                    }
                }
            }
        }
        let Some((u, a, payoff_delta)) = chosen else {
            return Ok(CoordinationTrace {
                steps,
                terminal: p,
                status: RunStatus::Converged,
            });
        };
        if steps.len() as u64 >= max_iters {
            return Ok(CoordinationTrace {
                steps,
                terminal: p,
                status: RunStatus::IterationCapped,
            });
        }
        let before = game.potential(&p);
        let from = p[u];
        p[u] = a;
        let potential_delta = game.potential(&p) - before;
        if (payoff_delta - potential_delta).abs() > super::congestion::POTENTIAL_TOLERANCE {
            return Err(Error::PotentialMismatch {
                player: u,
                cost_delta: payoff_delta,
                potential_delta,
            });
        }
        steps.push(CoordinationStep {
            player: u,
            from,
            to: a,
            payoff_delta,
            potential_delta,
        });
        next_player = (u + 1) % n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::certify;
    use crate::oracle::EnumBudget;
    use crate::problem::{encode_problem, verify_encoding};
    use alloc::sync::Arc;

    fn identity_edge() -> NetworkCoordinationGame {
        NetworkCoordinationGame::new(2, 2, vec![(0, 1)], vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]]).unwrap()
    }

    #[test]
    fn zero_matrices_make_everything_stable() {
        let g = NetworkCoordinationGame::new(3, 2, vec![(0, 1), (1, 2)], vec![vec![vec![0.0; 2]; 2]; 2]).unwrap();
        for p in g.solutions(100).unwrap() {
            assert_eq!(g.potential(&p), 0.0);
            assert!(g.is_pne(&p));
        }
    }

    #[test]
    fn identity_payoff_pne_are_coordinated() {
        let g = identity_edge();
        let pne: Vec<Profile> = g.solutions(100).unwrap().into_iter().filter(|p| g.is_pne(p)).collect();
        assert_eq!(pne, vec![vec![0, 0], vec![1, 1]]);
        let t = coordination_dynamics(&g, &vec![0, 1], ResponseRule::RoundRobinFirst, 10).unwrap();
        assert_eq!(t.terminal, vec![1, 1]);
        assert!(g.is_pne(&t.terminal));
    }

    #[test]
    fn indicator_sum_and_certificate() {
        let g = Arc::new(
            NetworkCoordinationGame::new(
                3,
                2,
                vec![(0, 1), (1, 2)],
                vec![vec![vec![0.5, -0.25], vec![0.125, 0.75]], vec![vec![-0.5, 0.25], vec![1.0, 0.0]]],
            )
            .unwrap(),
        );
        for p in g.solutions(100).unwrap() {
            let s = g.encode(&p);
            for e in 0..2 {
                assert_eq!(s.cost_part[e * 4..(e + 1) * 4].iter().sum::<u64>(), 1);
            }
        }
        verify_encoding(&g, 100).unwrap();
        let enc = encode_problem(Arc::clone(&g), &vec![0, 0, 0]).unwrap();
        let cert = certify(&enc.instance, &enc.covering().unwrap(), Some(enc.resolver.as_ref()), EnumBudget::default()).unwrap();
        assert!(cert.params.mu <= 16);
        assert!(cert.params.beta as usize <= g.max_degree());
        assert!(cert.params.lambda <= 3 * 2);
    }
}
