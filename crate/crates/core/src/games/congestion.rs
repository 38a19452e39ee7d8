//! Congestion games with explicit strategy sets under three cost models.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, CoordinateCluster, Covering, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::engine::RunStatus;
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{index_width, product, push_index, read_index};

/// Strategy index per player.
pub type Profile = Vec<usize>;

/// Resource cost functions `κ_r(ℓ)` for loads `ℓ ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "model", rename_all = "snake_case"))]
pub enum CostModel {
    /// `table[r][ℓ - 1] = κ_r(ℓ)` for `ℓ = 1..=n`.
    General { table: Vec<Vec<f64>> },
    /// `κ_r(ℓ) = Σ_j coeffs[r][j] · ℓ^j`.
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// `κ_r(ℓ) = Σ_{b ∈ breakpoints[r], b ≤ ℓ} jump`.
    Step {
        breakpoints: Vec<Vec<usize>>,
        jumps: Vec<Vec<f64>>,
    },
}

/// `Σ_{k=1..ℓ} k^j`, exact.
pub fn accumulated_monomial(j: u32, ell: u64) -> Result<u64> {
    let mut acc: u64 = 0;
    for k in 1..=ell {
        let term = k
            .checked_pow(j)
            .ok_or_else(|| Error::Overflow(format!("{k}^{j} exceeds 64 bits; shrink n or d")))?;
        acc = acc
            .checked_add(term)
            .ok_or_else(|| Error::Overflow(format!("S_{j}({ell}) exceeds 64 bits; shrink n or d")))?;
    }
    if let Some(cap) = ell.checked_pow(j + 1) {
        assert!(acc <= cap, "S_{j}({ell}) = {acc} exceeds {ell}^{}", j + 1);
    }
    Ok(acc)
}

fn ipow(x: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, _| acc * x)
}

impl CostModel {
    pub fn resources(&self) -> usize {
        match self {
            CostModel::General { table } => table.len(),
            CostModel::Polynomial { coeffs } => coeffs.len(),
            CostModel::Step { breakpoints, .. } => breakpoints.len(),
        }
    }

    /// `κ_r(ℓ)`.
    pub fn kappa(&self, r: usize, ell: usize) -> f64 {
        debug_assert!(ell >= 1);
        match self {
            CostModel::General { table } => table[r][ell - 1],
            CostModel::Polynomial { coeffs } => coeffs[r]
                .iter()
                .enumerate()
                .map(|(j, a)| a * ipow(ell as f64, j))
                .sum(),
            CostModel::Step { breakpoints, jumps } => breakpoints[r]
                .iter()
                .zip(&jumps[r])
                .filter(|(&b, _)| b <= ell)
                .map(|(_, a)| a)
                .sum(),
        }
    }

    /// `Σ_{l=1..ℓ} κ_r(l)` through the model's closed form.
    pub fn potential_term(&self, r: usize, ell: usize) -> f64 {
        match self {
            CostModel::General { table } => table[r][..ell].iter().sum(),
            CostModel::Polynomial { coeffs } => coeffs[r]
                .iter()
                .enumerate()
                .map(|(j, a)| a * accumulated_monomial(j as u32, ell as u64).unwrap_or(u64::MAX) as f64)
                .sum(),
            CostModel::Step { breakpoints, jumps } => breakpoints[r]
                .iter()
                .zip(&jumps[r])
                .map(|(&b, a)| (ell + 1).saturating_sub(b) as f64 * a)
                .sum(),
        }
    }

    /// Largest polynomial degree or breakpoint count, 0 for tables.
    pub fn max_degree(&self) -> usize {
        match self {
            CostModel::General { .. } => 0,
            CostModel::Polynomial { coeffs } => coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0),
            CostModel::Step { breakpoints, .. } => breakpoints.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            CostModel::General { table } => table.iter().flatten().copied().collect(),
            CostModel::Polynomial { coeffs } => coeffs.iter().flatten().copied().collect(),
            CostModel::Step { jumps, .. } => jumps.iter().flatten().copied().collect(),
        }
    }

    fn validate(&self, players: usize) -> Result<()> {
        if let Some(v) = self.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid!("cost value {v} must be finite and nonnegative"));
        }
        match self {
            CostModel::General { table } => {
                if let Some((r, row)) = table.iter().enumerate().find(|(_, row)| row.len() != players) {
                    return Err(invalid!("resource {r} has {} table entries, need {players}", row.len()));
                }
            }
            CostModel::Polynomial { coeffs } => {
                if let Some(r) = coeffs.iter().position(Vec::is_empty) {
                    return Err(invalid!("resource {r} has no polynomial coefficients"));
                }
            }
            CostModel::Step { breakpoints, jumps } => {
                if breakpoints.len() != jumps.len() {
                    return Err(invalid!("breakpoints and jumps differ in resource count"));
                }
                for (r, (b, a)) in breakpoints.iter().zip(jumps).enumerate() {
                    if b.len() != a.len() {
                        return Err(invalid!("resource {r}: {} breakpoints but {} jumps", b.len(), a.len()));
                    }
                    if b.windows(2).any(|w| w[0] >= w[1]) || b.iter().any(|&x| x == 0 || x > players) {
                        return Err(invalid!("resource {r}: breakpoints must increase strictly within 1..={players}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A congestion game with explicit strategy sets.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CongestionGame {
    pub resources: usize,
    /// `strategies[i][a]` is a sorted resource list.
    pub strategies: Vec<Vec<Vec<usize>>>,
    pub cost_model: CostModel,
}

impl CongestionGame {
    pub fn new(resources: usize, strategies: Vec<Vec<Vec<usize>>>, cost_model: CostModel) -> Result<Self> {
        let mut strategies = strategies;
        if strategies.is_empty() {
            return Err(invalid!("a game needs at least one player"));
        }
        for (i, set) in strategies.iter_mut().enumerate() {
            if set.is_empty() {
                return Err(invalid!("player {i} has no strategies"));
            }
            for s in set.iter_mut() {
                s.sort_unstable();
                s.dedup();
                if let Some(&r) = s.iter().find(|&&r| r >= resources) {
                    return Err(invalid!("player {i} uses resource {r}, only {resources} exist"));
                }
            }
        }
        if cost_model.resources() != resources {
            return Err(invalid!(
                "cost model covers {} resources, game has {resources}",
                cost_model.resources()
            ));
        }
        cost_model.validate(strategies.len())?;
        Ok(Self {
            resources,
            strategies,
            cost_model,
        })
    }

    pub fn players(&self) -> usize {
        self.strategies.len()
    }

    /// Largest strategy set.
    pub fn max_strategies(&self) -> usize {
        self.strategies.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks that every cost value lies in [0, 1].
    pub fn validate_support(&self) -> Result<()> {
        match self.cost_model.values().into_iter().find(|v| *v > 1.0) {
            Some(v) => Err(invalid!("cost value {v} outside the smoothing support [0, 1]")),
            None => Ok(()),
        }
    }

    pub fn is_valid_profile(&self, p: &Profile) -> bool {
        p.len() == self.players() && p.iter().zip(&self.strategies).all(|(&a, set)| a < set.len())
    }

    pub fn strategy(&self, i: usize, a: usize) -> &[usize] {
        &self.strategies[i][a]
    }

    pub fn loads(&self, p: &Profile) -> Vec<usize> {
        let mut loads = vec![0; self.resources];
        for (i, &a) in p.iter().enumerate() {
            for &r in self.strategy(i, a) {
                loads[r] += 1;
            }
        }
        loads
    }

    pub fn player_cost(&self, p: &Profile, i: usize) -> f64 {
        let loads = self.loads(p);
        self.strategy(i, p[i])
            .iter()
            .map(|&r| self.cost_model.kappa(r, loads[r]))
            .sum()
    }

    /// Rosenthal's potential `Σ_r Σ_{ℓ ≤ ℓ_r} κ_r(ℓ)`.
    pub fn rosenthal_potential(&self, p: &Profile) -> f64 {
        self.loads(p)
            .iter()
            .enumerate()
            .map(|(r, &l)| self.cost_model.potential_term(r, l))
            .sum()
    }

    /// Largest symmetric difference between two strategies of one player.
    pub fn restrained_bound(&self) -> usize {
        let mut best = 0;
        for set in &self.strategies {
            for a in set {
                for b in set {
                    best = best.max(symmetric_difference(a, b).len());
                }
            }
        }
        best
    }

    pub fn is_pne(&self, p: &Profile) -> bool {
        (0..self.players()).all(|i| {
            let here = self.player_cost(p, i);
            (0..self.strategies[i].len()).all(|a| {
                let mut q = p.clone();
                q[i] = a;
                self.player_cost(&q, i) >= here
            })
        })
    }

    fn coordinate_layout(&self) -> Vec<usize> {
        let n = self.players();
        match &self.cost_model {
            CostModel::General { .. } => vec![n; self.resources],
            CostModel::Polynomial { coeffs } => coeffs.iter().map(Vec::len).collect(),
            CostModel::Step { breakpoints, .. } => breakpoints.iter().map(Vec::len).collect(),
        }
    }

    fn m_cap(&self) -> Result<u64> {
        let n = self.players() as u64;
        Ok(match &self.cost_model {
            CostModel::General { .. } => 1,
            CostModel::Polynomial { .. } => {
                let d = self.cost_model.max_degree() as u32;
                match n.checked_pow(d + 1) {
                    Some(v) if v < (1u64 << 62) => v.max(1),
                    _ => {
                        return Err(Error::Overflow(format!(
                            "n^(d+1) = {n}^{} reaches 2^62; shrink n or d",
                            d + 1
                        )))
                    }
                }
            }
            CostModel::Step { .. } => n,
        })
    }

    fn widths(&self) -> Vec<usize> {
        self.strategies.iter().map(|s| index_width(s.len())).collect()
    }
}

pub(crate) fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let a: BTreeSet<_> = a.iter().copied().collect();
    let b: BTreeSet<_> = b.iter().copied().collect();
    a.symmetric_difference(&b).copied().collect()
}

impl LocalProblem for CongestionGame {
    type Solution = Profile;

    fn sense(&self) -> Sense {
        Sense::Min
    }

    fn objective(&self, x: &Profile) -> f64 {
        self.rosenthal_potential(x)
    }

    /// Single-player deviations, player-major then strategy index.
    fn neighbors(&self, x: &Profile) -> Vec<Profile> {
        let mut out = Vec::new();
        for i in 0..self.players() {
            for a in 0..self.strategies[i].len() {
                if a != x[i] {
                    let mut y = x.clone();
                    y[i] = a;
                    out.push(y);
                }
            }
        }
        out
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Profile>> {
        let sizes: Vec<usize> = self.strategies.iter().map(Vec::len).collect();
        product(&sizes, max_count)
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_count} profiles")))
    }

    fn is_feasible(&self, x: &Profile) -> bool {
        self.is_valid_profile(x)
    }
}

impl CloEncoder for CongestionGame {
    fn dims(&self) -> CloDims {
        let nu = self.coordinate_layout().iter().sum();
        CloDims {
            nu,
            nu_bar: self.widths().iter().sum(),
            m_cap: self.m_cap().unwrap_or(u64::MAX),
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        self.m_cap()?;
        if self.dims().nu == 0 {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::with_scale(self.cost_model.values())
    }

    fn encode(&self, x: &Profile) -> Configuration {
        let loads = self.loads(x);
        let mut cost_part = Vec::with_capacity(self.dims().nu);
        match &self.cost_model {
            CostModel::General { .. } => {
                for &l in &loads {
                    cost_part.extend((1..=self.players()).map(|j| (j <= l) as u64));
                }
            }
            CostModel::Polynomial { coeffs } => {
                for (r, c) in coeffs.iter().enumerate() {
                    for j in 0..c.len() {
                        cost_part.push(accumulated_monomial(j as u32, loads[r] as u64).unwrap_or(u64::MAX));
                    }
                }
            }
            CostModel::Step { breakpoints, .. } => {
                for (r, bs) in breakpoints.iter().enumerate() {
                    cost_part.extend(bs.iter().map(|&b| (loads[r] + 1).saturating_sub(b) as u64));
                }
            }
        }
        let mut bits = Vec::new();
        for (&a, w) in x.iter().zip(self.widths()) {
            push_index(&mut bits, a, w);
        }
        Configuration::new(cost_part, bits)
    }

    fn decode(&self, s: &Configuration) -> Option<Profile> {
        let widths = self.widths();
        if s.noncost_part.len() != widths.iter().sum::<usize>() {
            return None;
        }
        let mut offset = 0;
        let mut p = Vec::with_capacity(widths.len());
        for (i, w) in widths.into_iter().enumerate() {
            let a = read_index(&s.noncost_part, offset, w);
            if a >= self.strategies[i].len() {
                return None;
            }
            p.push(a);
            offset += w;
        }
        Some(p)
    }

    /// Clusters `E(i, a, b)` of fixed deviations and one coordinate cluster per resource.
    fn prescribed_covering(&self) -> Result<Covering> {
        let layout = self.coordinate_layout();
        let mut cluster_of = vec![None; self.resources];
        let mut coordinate_clusters = Vec::new();
        let mut offset = 0;
        for (r, &len) in layout.iter().enumerate() {
            if len > 0 {
                cluster_of[r] = Some(coordinate_clusters.len());
                coordinate_clusters.push(CoordinateCluster {
                    indices: (offset..offset + len).collect(),
                });
            }
            offset += len;
        }
        let mut transition_clusters = Vec::new();
        let mut witnesses = Vec::new();
        for (i, set) in self.strategies.iter().enumerate() {
            for a in 0..set.len() {
                for b in 0..set.len() {
                    if a == b {
                        continue;
                    }
                    transition_clusters.push(TransitionCluster::Symbolic(vec![i as i64, a as i64, b as i64]));
                    witnesses.push(
                        symmetric_difference(&set[a], &set[b])
                            .into_iter()
                            .filter_map(|r| cluster_of[r])
                            .collect(),
                    );
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
        let changed: Vec<usize> = (0..from.len()).filter(|&i| from[i] != to[i]).collect();
        match changed.as_slice() {
            [i] => vec![vec![*i as i64, from[*i] as i64, to[*i] as i64]],
            _ => Vec::new(),
        }
    }
}

/// The per-model expressions from the B-restrained bound, evaluated exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrainedBounds {
    /// `3 · n^B · nk(k−1) · (mn)² · φ`
    pub general: f64,
    /// `3 · n^B · nk(k−1) · (m(d+1))² · n^{d+1} · log₂(n^{d+1}) · φ`
    pub polynomial: f64,
    /// `3 · (d+1)^B · nk(k−1) · (md)² · n · log₂(n) · φ`
    pub step: f64,
}

/// Evaluates the three expressions for `n` players, `m` resources, `k`
/// strategies per player, restraint `b`, degree or breakpoint count `d`.
pub fn restrained_bounds(n: usize, m: usize, k: usize, b: usize, d: usize, phi: f64) -> RestrainedBounds {
    let (n, m, k, b, d) = (n as f64, m as f64, k as f64, b as f64, d as f64);
    let lambda = n * k * (k - 1.0);
    let nd1 = libm::pow(n, d + 1.0);
    RestrainedBounds {
        general: 3.0 * libm::pow(n, b) * lambda * (m * n) * (m * n) * phi,
        polynomial: 3.0 * libm::pow(n, b) * lambda * (m * (d + 1.0)) * (m * (d + 1.0)) * nd1 * libm::log2(nd1) * phi,
        step: 3.0 * libm::pow(d + 1.0, b) * lambda * (m * d) * (m * d) * n * libm::log2(n) * phi,
    }
}

/// Pivot rule over players for better-response dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ResponseRule {
    /// Players in cyclic order starting after the last mover; first improving strategy.
    RoundRobinFirst,
    /// Largest cost decrease over all players; ties go to the lowest (player, strategy).
    BestImprovement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameStep {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    /// Change of the mover's cost (negative).
    pub cost_delta: f64,
    /// Change of the potential.
    pub potential_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameTrace {
    pub rule: ResponseRule,
    pub steps: Vec<GameStep>,
    pub terminal: Profile,
    pub status: RunStatus,
}

/// Tolerance of the exact-potential check.
pub const POTENTIAL_TOLERANCE: f64 = 1e-9;

/// Better-response dynamics; every step checks `ΔC_i = ΔΦ`.
pub fn better_response_dynamics(
    game: &CongestionGame,
    start: &Profile,
    rule: ResponseRule,
    max_iters: u64,
) -> Result<GameTrace> {
    if !game.is_valid_profile(start) {
        return Err(Error::Infeasible(format!("invalid start profile {start:?}")));
    }
    let n = game.players();
    let mut p = start.clone();
    let mut steps = Vec::new();
    let mut next_player = 0;
    loop {
        let mut chosen: Option<(usize, usize, f64)> = None;
        match rule {
            ResponseRule::RoundRobinFirst => {
                'scan: for off in 0..n {
                    let i = (next_player + off) % n;
                    let here = game.player_cost(&p, i);
                    for a in 0..game.strategies[i].len() {
                        if a == p[i] {
                            continue;
                        }
                        let mut q = p.clone();
                        q[i] = a;
                        let d = game.player_cost(&q, i) - here;
                        if d < 0.0 {
                            chosen = Some((i, a, d));
                            break 'scan;
                        }
                    }
                }
            }
            ResponseRule::BestImprovement => {
                for i in 0..n {
                    let here = game.player_cost(&p, i);
                    for a in 0..game.strategies[i].len() {
                        if a == p[i] {
                            continue;
                        }
                        let mut q = p.clone();
                        q[i] = a;
                        let d = game.player_cost(&q, i) - here;
                        if d < 0.0 && chosen.is_none_or(|(_, _, best)| d < best) {
                            chosen = Some((i, a, d));
                        }
                    }
                }
            }
        }
        let Some((i, a, cost_delta)) = chosen else {
            return Ok(GameTrace {
                rule,
                steps,
                terminal: p,
                status: RunStatus::Converged,
            });
        };
        if steps.len() as u64 >= max_iters {
            return Ok(GameTrace {
                rule,
                steps,
                terminal: p,
                status: RunStatus::IterationCapped,
            });
        }
        let before = game.rosenthal_potential(&p);
        let from = p[i];
        p[i] = a;
        let potential_delta = game.rosenthal_potential(&p) - before;
        if (cost_delta - potential_delta).abs() > POTENTIAL_TOLERANCE {
            return Err(Error::PotentialMismatch {
                player: i,
                cost_delta,
                potential_delta,
            });
        }
        steps.push(GameStep {
            player: i,
            from,
            to: a,
            cost_delta,
            potential_delta,
        });
        next_player = (i + 1) % n;
    }
}
