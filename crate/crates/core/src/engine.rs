//! Standard local search with pluggable pivot rules.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::clo::{improving_neighbors, CloInstance, Configuration, Sense, Transition};
use crate::covering::{iteration_bound, SeparabilityParams};
use crate::error::Result;
use crate::oracle::{enumerate_configurations, EnumBudget};
use crate::util::Rng64;

/// Hard ceiling on the default iteration budget.
pub const DEFAULT_ITERATION_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PivotKind {
    /// First improving neighbor in oracle order.
    First,
    /// Largest improvement; ties go to the smallest configuration.
    Best,
    /// Uniform over improving neighbors.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PivotRule {
    pub kind: PivotKind,
    /// Only read by `PivotKind::Random`.
    pub rng_seed: u64,
}

impl PivotRule {
    pub fn first() -> Self {
        Self { kind: PivotKind::First, rng_seed: 0 }
    }

    pub fn best() -> Self {
        Self { kind: PivotKind::Best, rng_seed: 0 }
    }

    pub fn random(seed: u64) -> Self {
        Self { kind: PivotKind::Random, rng_seed: seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationCapped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub transition: Transition,
    /// Positive improvement of this step.
    pub delta: f64,
    /// Cost after the step.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    pub start_cost: f64,
    pub steps: Vec<TraceStep>,
    pub terminal: Configuration,
    pub status: RunStatus,
    pub iterations: u64,
}

impl SearchTrace {
    pub fn terminal_cost(&self) -> f64 {
        self.steps.last().map_or(self.start_cost, |s| s.cost)
    }
}

/// Default budget: the iteration bound for a certified covering, else `(M+1)^ν`;
/// both capped at [`DEFAULT_ITERATION_CAP`].
pub fn default_max_iters(inst: &CloInstance, certified: Option<(SeparabilityParams, f64)>) -> u64 {
    let raw = match certified {
        Some((params, phi)) => iteration_bound(params, inst.dims.nu, inst.dims.m_cap, phi)
            .map(|b| b.value)
            .unwrap_or(f64::MAX),
        None => inst.dims.configuration_space_bound(),
    };
    if raw >= DEFAULT_ITERATION_CAP as f64 {
        DEFAULT_ITERATION_CAP
    } else {
        libm::ceil(raw) as u64
    }
}

fn pick(
    candidates: Vec<(Configuration, f64)>,
    kind: PivotKind,
    rng: &mut Rng64,
) -> (Configuration, f64) {
    match kind {
        PivotKind::First => candidates.into_iter().next().unwrap(),
        PivotKind::Best => candidates
            .into_iter()
            .reduce(|best, c| {
                if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                    c
                } else {
                    best
                }
            })
            .unwrap(),
        PivotKind::Random => {
            let i = rng.below(candidates.len());
            candidates.into_iter().nth(i).unwrap()
        }
    }
}

/// Applies improving moves from `start` until none exists or `max_iters` is reached.
pub fn run(
    inst: &CloInstance,
    start: &Configuration,
    rule: PivotRule,
    sense: Sense,
    max_iters: u64,
) -> Result<SearchTrace> {
    inst.check_feasible(start)?;
    let mut rng = Rng64::new(rule.rng_seed);
    let start_cost = inst.costs.dot(start);
    let mut current = start.clone();
    let mut steps = Vec::new();
    let mut iterations = 0u64;
    loop {
        let candidates = improving_neighbors(inst, &current, sense)?;
        if candidates.is_empty() {
            return Ok(SearchTrace {
                start_cost,
                steps,
                terminal: current,
                status: RunStatus::Converged,
                iterations,
            });
        }
        if iterations >= max_iters {
            return Ok(SearchTrace {
                start_cost,
                steps,
                terminal: current,
                status: RunStatus::IterationCapped,
                iterations,
            });
        }
        let (next, delta) = pick(candidates, rule.kind, &mut rng);
        debug_assert!(delta > 0.0);
        let cost = inst.costs.dot(&next);
        steps.push(TraceStep {
            transition: Transition::new(current, next.clone()),
            delta,
            cost,
        });
        current = next;
        iterations += 1;
    }
}

/// One run per enumerated configuration.
pub fn run_all_starts(
    inst: &CloInstance,
    rule: PivotRule,
    sense: Sense,
    max_iters: u64,
    budget: EnumBudget,
) -> Result<BTreeMap<Configuration, SearchTrace>> {
    enumerate_configurations(inst, budget)?
        .into_iter()
        .map(|s| {
            let trace = run(inst, &s, rule, sense, max_iters)?;
            Ok((s, trace))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clo::{CloDims, CostVector, ExplicitNeighborhood};
    use crate::oracle::{build_transition_graph, longest_improving_path, verify_sinks};
    use alloc::sync::Arc;
    use alloc::vec;

    fn cfg(c: &[u64]) -> Configuration {
        Configuration::new(c.to_vec(), vec![])
    }

    fn chain() -> CloInstance {
        let nb = ExplicitNeighborhood::new(vec![cfg(&[1]), cfg(&[0])], vec![vec![1], vec![]]).unwrap();
        CloInstance::new(
            CloDims::new(1, 0, 1).unwrap(),
            CostVector::new(vec![1.0]).unwrap(),
            Arc::new(nb),
            cfg(&[1]),
            Sense::Min,
        )
        .unwrap()
    }

    /// Every bit vector of length 3, neighbors differ in one bit.
    fn cube(costs: [f64; 3]) -> CloInstance {
        let configs: Vec<_> = (0..8u64).map(|b| cfg(&[(b >> 2) & 1, (b >> 1) & 1, b & 1])).collect();
        let adj = (0..8usize).map(|b| (0..3).map(|k| b ^ (1 << k)).collect()).collect();
        CloInstance::new(
            CloDims::new(3, 0, 1).unwrap(),
            CostVector::new(costs.to_vec()).unwrap(),
            Arc::new(ExplicitNeighborhood::new(configs, adj).unwrap()),
            cfg(&[0, 0, 0]),
            Sense::Min,
        )
        .unwrap()
    }

    #[test]
    fn chain_runs() {
        let inst = chain();
        let t = run(&inst, &cfg(&[1]), PivotRule::first(), Sense::Min, 10).unwrap();
        assert_eq!(t.iterations, 1);
        assert_eq!(t.terminal, cfg(&[0]));
        assert_eq!(t.status, RunStatus::Converged);
        assert_eq!(t.steps[0].delta, 1.0);
        let t0 = run(&inst, &cfg(&[0]), PivotRule::first(), Sense::Min, 10).unwrap();
        assert!(t0.steps.is_empty() && t0.status == RunStatus::Converged);
    }

    #[test]
    fn cap_is_reported() {
        let inst = cube([-0.5, -0.25, -0.125]);
        let t = run(&inst, &cfg(&[0, 0, 0]), PivotRule::first(), Sense::Min, 1).unwrap();
        assert_eq!(t.status, RunStatus::IterationCapped);
        assert_eq!(t.iterations, 1);
    }

    #[test]
    fn best_picks_largest_delta() {
        let inst = cube([-0.25, -0.5, -0.125]);
        let t = run(&inst, &cfg(&[0, 0, 0]), PivotRule::best(), Sense::Min, 100).unwrap();
        assert_eq!(t.steps[0].transition.to, cfg(&[0, 1, 0]));
        assert_eq!(t.terminal, cfg(&[1, 1, 1]));
    }

    #[test]
    fn best_ties_go_to_smaller_configuration() {
        let inst = cube([-0.5, -0.5, -0.5]);
        let t = run(&inst, &cfg(&[0, 0, 0]), PivotRule::best(), Sense::Min, 100).unwrap();
        assert_eq!(t.steps[0].transition.to, cfg(&[0, 0, 1]));
    }

    #[test]
    fn runs_are_reproducible() {
        let inst = cube([-0.5, 0.25, -0.125]);
        for rule in [PivotRule::first(), PivotRule::best(), PivotRule::random(3)] {
            let a = run(&inst, &cfg(&[0, 1, 0]), rule, Sense::Max, 100).unwrap();
            let b = run(&inst, &cfg(&[0, 1, 0]), rule, Sense::Max, 100).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn all_starts_end_at_sinks() {
        let inst = cube([0.375, -0.25, 0.125]);
        let tg = build_transition_graph(&inst, &inst.costs, EnumBudget::default()).unwrap();
        let sinks = verify_sinks(&tg, &inst).unwrap();
        let longest = longest_improving_path(&tg).unwrap() as u64;
        for rule in [PivotRule::first(), PivotRule::best(), PivotRule::random(11)] {
            let all = run_all_starts(&inst, rule, Sense::Min, 100, EnumBudget::default()).unwrap();
            assert_eq!(all.len(), 8);
            for trace in all.values() {
                let idx = tg.nodes.binary_search(&trace.terminal).unwrap();
                assert!(sinks.contains(&idx));
                assert!(trace.iterations <= longest);
                assert!(trace.steps.windows(2).all(|w| w[1].cost < w[0].cost));
            }
        }
    }

    #[test]
    fn default_budget() {
        let inst = cube([0.0; 3]);
        assert_eq!(default_max_iters(&inst, None), 8);
        let p = SeparabilityParams { lambda: 2, beta: 1, mu: 2 };
        assert_eq!(default_max_iters(&inst, Some((p, 1.0))), 108);
        let huge = SeparabilityParams { lambda: 1 << 40, beta: 1, mu: 2 };
        assert_eq!(default_max_iters(&inst, Some((huge, 1.0))), DEFAULT_ITERATION_CAP);
    }
}
