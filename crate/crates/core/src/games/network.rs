//! Network congestion games: strategies are simple origin-destination paths.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::congestion::{CongestionGame, CostModel};
use crate::engine::RunStatus;
use crate::error::{invalid, Error, Result};
use crate::util::product;

/// Arc indices along a path, in travel order.
pub type Path = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkCongestionGame {
    pub nodes: usize,
    /// Directed arcs `(tail, head)`; arc `r` is resource `r`.
    pub arcs: Vec<(usize, usize)>,
    /// `(origin, destination)` per player.
    pub players: Vec<(usize, usize)>,
    pub cost_model: CostModel,
}

impl NetworkCongestionGame {
    pub fn new(
        nodes: usize,
        arcs: Vec<(usize, usize)>,
        players: Vec<(usize, usize)>,
        cost_model: CostModel,
    ) -> Result<Self> {
        if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| u >= nodes || v >= nodes) {
            return Err(invalid!("arc ({u}, {v}) leaves the {nodes} nodes"));
        }
        if let Some(&(o, d)) = players.iter().find(|&&(o, d)| o >= nodes || d >= nodes || o == d) {
            return Err(invalid!("player endpoints ({o}, {d}) must be distinct nodes below {nodes}"));
        }
        // Validates the cost model through the explicit-game constructor on trivial strategies.
        CongestionGame::new(arcs.len(), vec![vec![Vec::new()]; players.len().max(1)], cost_model.clone())?;
        let game = Self {
            nodes,
            arcs,
            players,
            cost_model,
        };
        for (i, &(o, d)) in game.players.iter().enumerate() {
            if !game.reachable(o, d) {
                return Err(invalid!("player {i}: node {d} is unreachable from {o}"));
            }
        }
        Ok(game)
    }

    fn reachable(&self, o: usize, d: usize) -> bool {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![o];
        seen[o] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.arcs {
                if a == u && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen[d]
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    /// True iff `path` is a simple arc path from the player's origin to destination.
    pub fn is_path_of(&self, i: usize, path: &[usize]) -> bool {
        let (o, d) = self.players[i];
        let mut at = o;
        let mut visited = BTreeSet::from([o]);
        for &r in path {
            match self.arcs.get(r) {
                Some(&(u, v)) if u == at && visited.insert(v) => at = v,
                _ => return false,
            }
        }
        at == d
    }

    pub fn is_valid_profile(&self, p: &[Path]) -> bool {
        p.len() == self.player_count() && p.iter().enumerate().all(|(i, path)| self.is_path_of(i, path))
    }

    pub fn loads(&self, p: &[Path]) -> Vec<usize> {
        let mut loads = vec![0; self.arcs.len()];
        for path in p {
            for &r in path {
                loads[r] += 1;
            }
        }
        loads
    }

    pub fn player_cost(&self, p: &[Path], i: usize) -> f64 {
        let loads = self.loads(p);
        p[i].iter().map(|&r| self.cost_model.kappa(r, loads[r])).sum()
    }

    pub fn rosenthal_potential(&self, p: &[Path]) -> f64 {
        self.loads(p)
            .iter()
            .enumerate()
            .map(|(r, &l)| self.cost_model.potential_term(r, l))
            .sum()
    }

    /// Cost of each arc for player `i` joining it: `κ_r(ℓ_r(σ₋ᵢ) + 1)`.
    pub fn marginal_costs(&self, p: &[Path], i: usize) -> Vec<f64> {
        let mut loads = self.loads(p);
        for &r in &p[i] {
            loads[r] -= 1;
        }
        (0..self.arcs.len())
            .map(|r| self.cost_model.kappa(r, loads[r] + 1))
            .collect()
    }

    /// Every simple path of player `i`, sorted by arc sequence.
    pub fn simple_paths(&self, i: usize, max_count: usize) -> Result<Vec<Path>> {
        let (o, d) = self.players[i];
        let mut out = Vec::new();
        let mut on_path = vec![false; self.nodes];
        on_path[o] = true;
        let mut path = Vec::new();
        self.extend_paths(o, d, &mut on_path, &mut path, &mut out, max_count)?;
        out.sort();
        Ok(out)
    }

    fn extend_paths(
        &self,
        at: usize,
        d: usize,
        on_path: &mut [bool],
        path: &mut Path,
        out: &mut Vec<Path>,
        max_count: usize,
    ) -> Result<()> {
        if at == d {
            if out.len() == max_count {
                return Err(Error::UnsupportedAtScale(format!("more than {max_count} simple paths")));
            }
            out.push(path.clone());
            return Ok(());
        }
        for (r, &(u, v)) in self.arcs.iter().enumerate() {
            if u == at && !on_path[v] {
                on_path[v] = true;
                path.push(r);
                self.extend_paths(v, d, on_path, path, out, max_count)?;
                path.pop();
                on_path[v] = false;
            }
        }
        Ok(())
    }

    /// The game with every simple path materialized as a strategy, plus the paths.
    pub fn to_explicit(&self, max_paths: usize) -> Result<(CongestionGame, Vec<Vec<Path>>)> {
        let paths: Vec<Vec<Path>> = (0..self.player_count())
            .map(|i| self.simple_paths(i, max_paths))
            .collect::<Result<_>>()?;
        let game = CongestionGame::new(self.arcs.len(), paths.clone(), self.cost_model.clone())?;
        Ok((game, paths))
    }
}

/// Search label: total cost, then the visited `(node, arc)` sequence for tie-breaking.
#[derive(Clone, Debug, PartialEq)]
struct Label {
    cost: f64,
    hops: Vec<(usize, usize)>,
}

impl Label {
    fn better_than(&self, other: &Label) -> bool {
        self.cost < other.cost || (self.cost == other.cost && self.hops < other.hops)
    }
}

/// Minimum-cost simple path for player `i` against the others' current paths.
/// Equal-cost paths are ordered by node sequence, then arc index.
pub fn network_best_response(game: &NetworkCongestionGame, p: &[Path], i: usize) -> Result<(Path, f64)> {
    if !game.is_valid_profile(p) {
        return Err(Error::Infeasible(format!("invalid profile {p:?}")));
    }
    let weights = game.marginal_costs(p, i);
    if weights.iter().any(|w| *w < 0.0) {
        return Err(invalid!("negative marginal arc cost"));
    }
    let (o, d) = game.players[i];
    let mut labels: Vec<Option<Label>> = vec![None; game.nodes];
    let mut done = vec![false; game.nodes];
    labels[o] = Some(Label { cost: 0.0, hops: Vec::new() });
    loop {
        let mut next: Option<usize> = None;
        for v in 0..game.nodes {
            if done[v] {
                continue;
            }
            if let Some(l) = &labels[v] {
                if next.is_none_or(|u| l.better_than(labels[u].as_ref().unwrap())) {
                    next = Some(v);
                }
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        if u == d {
            break;
        }
        let here = labels[u].clone().unwrap();
        for (r, &(a, b)) in game.arcs.iter().enumerate() {
            if a != u || done[b] || b == o || here.hops.iter().any(|&(n, _)| n == b) {
                continue;
            }
            let mut hops = here.hops.clone();
            hops.push((b, r));
            let cand = Label { cost: here.cost + weights[r], hops };
            if labels[b].as_ref().is_none_or(|l| cand.better_than(l)) {
                labels[b] = Some(cand);
            }
        }
    }
    match &labels[d] {
        Some(l) => Ok((l.hops.iter().map(|&(_, r)| r).collect(), l.cost)),
        None => Err(invalid!("player {i}: node {d} is unreachable from {o}")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathStep {
    pub player: usize,
    pub from: Path,
    pub to: Path,
    pub cost_delta: f64,
    pub potential_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkTrace {
    pub steps: Vec<PathStep>,
    pub terminal: Vec<Path>,
    pub status: RunStatus,
}

/// Round-robin best responses, taken only when strictly improving.
pub fn shortest_path_dynamics(game: &NetworkCongestionGame, start: &[Path], max_iters: u64) -> Result<NetworkTrace> {
    if !game.is_valid_profile(start) {
        return Err(Error::Infeasible(format!("invalid start profile {start:?}")));
    }
    let n = game.player_count();
    let mut p: Vec<Path> = start.to_vec();
    let mut steps = Vec::new();
    let mut idle = 0;
    let mut i = 0;
    while idle < n {
        let here = game.player_cost(&p, i);
        let (path, cost) = network_best_response(game, &p, i)?;
        if cost < here {
            if steps.len() as u64 >= max_iters {
                return Ok(NetworkTrace {
                    steps,
                    terminal: p,
                    status: RunStatus::IterationCapped,
                });
            }
            let before = game.rosenthal_potential(&p);
            let from = core::mem::replace(&mut p[i], path.clone());
            let potential_delta = game.rosenthal_potential(&p) - before;
            let cost_delta = cost - here;
            if (cost_delta - potential_delta).abs() > super::congestion::POTENTIAL_TOLERANCE {
                return Err(Error::PotentialMismatch {
                    player: i,
                    cost_delta,
                    potential_delta,
                });
            }
            steps.push(PathStep {
                player: i,
                from,
                to: path,
                cost_delta,
                potential_delta,
            });
            idle = 0;
        } else {
            idle += 1;
        }
        i = (i + 1) % n;
    }
    Ok(NetworkTrace {
        steps,
        terminal: p,
        status: RunStatus::Converged,
    })
}

/// True iff no player has a strictly cheaper simple path.
pub fn is_network_pne(game: &NetworkCongestionGame, p: &[Path]) -> Result<bool> {
    for i in 0..game.player_count() {
        let (_, cost) = network_best_response(game, p, i)?;
        if cost < game.player_cost(p, i) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compactness parameters computed by brute force.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Compactness {
    /// Largest number of distinct best responses of one player.
    pub a: usize,
    /// Longest best-response path, in arcs.
    pub b: usize,
}

/// Unions every player's exact argmin paths over all opponent profiles.
pub fn compactness_desk(game: &NetworkCongestionGame, max_profiles: usize) -> Result<Compactness> {
    let (_, paths) = game.to_explicit(max_profiles)?;
    let mut out = Compactness { a: 0, b: 0 };
    for i in 0..game.player_count() {
        let others: Vec<usize> = (0..game.player_count())
            .map(|j| if j == i { 1 } else { paths[j].len() })
            .collect();
        let profiles = product(&others, max_profiles)
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_profiles} opponent profiles")))?;
        let mut best_set: BTreeSet<usize> = BTreeSet::new();
        for idx in profiles {
            let mut p: Vec<Path> = idx.iter().enumerate().map(|(j, &a)| paths[j][a].clone()).collect();
            let costs: Vec<f64> = (0..paths[i].len())
                .map(|a| {
                    p[i] = paths[i][a].clone();
                    game.player_cost(&p, i)
                })
                .collect();
            let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
            best_set.extend((0..costs.len()).filter(|&a| costs[a] == min));
        }
        out.a = out.a.max(best_set.len());
        out.b = out.b.max(best_set.iter().map(|&a| paths[i][a].len()).max().unwrap_or(0));
    }
    Ok(out)
}

/// Paths of player `i` that no other path of `i` strictly dominates.
///
/// `Q` dominates `P` when the most `Q \ P` can cost is below the least `P \ Q`
/// can cost, taking each arc's extremes over loads `1..=n`.
pub fn undominated_paths(game: &NetworkCongestionGame, i: usize, max_paths: usize) -> Result<Vec<Path>> {
    let n = game.player_count();
    let extremes: Vec<(f64, f64)> = (0..game.arcs.len())
        .map(|r| {
            (1..=n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                let c = game.cost_model.kappa(r, l);
                (lo.min(c), hi.max(c))
            })
        })
        .collect();
    let paths = game.simple_paths(i, max_paths)?;
    let sets: Vec<BTreeSet<usize>> = paths.iter().map(|p| p.iter().copied().collect()).collect();
    let dominated = |a: usize| {
        (0..paths.len()).any(|b| {
            let best: f64 = sets[b].difference(&sets[a]).map(|&r| extremes[r].1).sum();
            let worst: f64 = sets[a].difference(&sets[b]).map(|&r| extremes[r].0).sum();
            b != a && best < worst
        })
    };
    Ok((0..paths.len()).filter(|&a| !dominated(a)).map(|a| paths[a].clone()).collect())
}

/// Every pure Nash equilibrium, found by enumerating undominated paths only.
///
/// Dropping strictly dominated paths keeps the equilibrium set unchanged, and
/// each candidate is checked against every simple path.
pub fn pure_equilibria(game: &NetworkCongestionGame, max_paths: usize, max_profiles: usize) -> Result<Vec<Vec<Path>>> {
    let kept: Vec<Vec<Path>> = (0..game.player_count())
        .map(|i| undominated_paths(game, i, max_paths))
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = kept.iter().map(Vec::len).collect();
    let profiles = product(&sizes, max_profiles)
        .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_profiles} undominated profiles")))?;
    let mut out = Vec::new();
    for idx in profiles {
        let p: Vec<Path> = idx.iter().enumerate().map(|(j, &a)| kept[j][a].clone()).collect();
        if is_network_pne(game, &p)? {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(m: usize, n: usize, rows: &[&[f64]]) -> CostModel {
        assert_eq!(rows.len(), m);
        CostModel::General {
            table: rows.iter().map(|r| r[..n].to_vec()).collect(),
        }
    }

    /// Two parallel arcs 0→1, two players.
    fn parallel() -> NetworkCongestionGame {
        NetworkCongestionGame::new(
            2,
            vec![(0, 1), (0, 1)],
            vec![(0, 1), (0, 1)],
            table(2, 2, &[&[0.25, 0.75], &[0.5, 1.0]]),
        )
        .unwrap()
    }

    #[test]
    fn single_path() {
        let g = NetworkCongestionGame::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], table(2, 1, &[&[0.5], &[0.5]])).unwrap();
        let (path, cost) = network_best_response(&g, &[vec![0, 1]], 0).unwrap();
        assert_eq!(path, vec![0, 1]);
        assert_eq!(cost, 1.0);
        assert_eq!(compactness_desk(&g, 100).unwrap(), Compactness { a: 1, b: 2 });
    }

    #[test]
    fn congested_arc_avoided() {
        let g = parallel();
        // Player 1 sits on arc 0; arc 0 would cost 0.75, arc 1 costs 0.5.
        let (path, _) = network_best_response(&g, &[vec![0], vec![0]], 0).unwrap();
        assert_eq!(path, vec![1]);
        let c = compactness_desk(&g, 100).unwrap();
        assert!(c.a <= 2);
    }

    #[test]
    fn unreachable_rejected() {
        assert!(NetworkCongestionGame::new(3, vec![(0, 1)], vec![(0, 2)], table(1, 1, &[&[0.5]])).is_err());
    }

    #[test]
    fn dynamics_converge_to_pne() {
        let g = parallel();
        let t = shortest_path_dynamics(&g, &[vec![0], vec![0]], 100).unwrap();
        assert_eq!(t.status, RunStatus::Converged);
        assert!(is_network_pne(&g, &t.terminal).unwrap());
        assert!(t.steps.iter().all(|s| s.potential_delta < 0.0));
        let again = shortest_path_dynamics(&g, &t.terminal, 100).unwrap();
        assert!(again.steps.is_empty());
    }

    #[test]
    fn zero_cost_cycle_not_followed() {
        // 0→1→2 with a zero-cost detour 1→3→1 style cycle through node 3.
        let g = NetworkCongestionGame::new(
            4,
            vec![(0, 1), (1, 3), (3, 1), (1, 2)],
            vec![(0, 2)],
            table(4, 1, &[&[0.0], &[0.0], &[0.0], &[0.0]]),
        )
        .unwrap();
        let (path, _) = network_best_response(&g, &[vec![0, 3]], 0).unwrap();
        assert_eq!(path, vec![0, 3]);
        assert!(g.is_path_of(0, &path));
    }
}
