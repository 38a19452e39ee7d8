//! Seeded random desk-scale instances. Every weight is a dyadic rational, so
//! sums and comparisons are exact in `f64`.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorial::tsp::complete_edges;
use crate::combinatorial::{
    Clause, CnfInstance, CutInstance, HsMoves, McaConstraint, McaInstance, SetSystemInstance, SetSystemVariant,
    TourInstance,
};
use crate::error::{invalid, Result};
use crate::games::{CongestionGame, CostModel, NetworkCoordinationGame, NetworkCongestionGame};
use crate::util::{combinations, Rng64};

/// Fractional bits of generated weights.
pub const WEIGHT_BITS: u32 = 3;

/// Cost function family for generated congestion games.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    General,
    Polynomial,
    Step,
}

/// Costs for `resources` resources and `players` players. `degree` is the
/// polynomial degree or the largest breakpoint count (every step resource gets
/// at least one).
pub fn cost_model(rng: &mut Rng64, kind: ModelKind, resources: usize, players: usize, degree: usize) -> CostModel {
    match kind {
        ModelKind::General => CostModel::General {
            table: (0..resources)
                .map(|_| (0..players).map(|_| rng.dyadic(WEIGHT_BITS)).collect())
                .collect(),
        },
        ModelKind::Polynomial => CostModel::Polynomial {
            coeffs: (0..resources)
                .map(|_| (0..=degree).map(|_| rng.dyadic(WEIGHT_BITS)).collect())
                .collect(),
        },
        ModelKind::Step => {
            let mut breakpoints = Vec::with_capacity(resources);
            let mut jumps = Vec::with_capacity(resources);
            for _ in 0..resources {
                let count = rng.range(1, degree.min(players).max(1));
                let mut pool: Vec<usize> = (1..=players).collect();
                rng.shuffle(&mut pool);
                let mut b = pool[..count].to_vec();
                b.sort_unstable();
                jumps.push(b.iter().map(|_| rng.dyadic(WEIGHT_BITS)).collect());
                breakpoints.push(b);
            }
            CostModel::Step { breakpoints, jumps }
        }
    }
}

fn nonempty_subset(rng: &mut Rng64, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.coin()).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// Each player gets `1..=max_strategies` random nonempty resource subsets.
pub fn congestion_game(
    rng: &mut Rng64,
    players: usize,
    resources: usize,
    max_strategies: usize,
    kind: ModelKind,
    degree: usize,
) -> Result<CongestionGame> {
    if players == 0 || resources == 0 || max_strategies == 0 {
        return Err(invalid!("players, resources and strategies must be positive"));
    }
    let strategies = (0..players)
        .map(|_| {
            let k = rng.range(1, max_strategies);
            (0..k).map(|_| nonempty_subset(rng, resources)).collect()
        })
        .collect();
    let model = cost_model(rng, kind, resources, players, degree);
    CongestionGame::new(resources, strategies, model)
}

/// A chain of `segments` hops, each made of `1..=width` parallel arcs. Every
/// player travels between two random chain nodes.
pub fn network_game(
    rng: &mut Rng64,
    players: usize,
    segments: usize,
    width: usize,
    kind: ModelKind,
    degree: usize,
) -> Result<NetworkCongestionGame> {
    if players == 0 || segments == 0 || width == 0 {
        return Err(invalid!("players, segments and width must be positive"));
    }
    let mut arcs = Vec::new();
    for s in 0..segments {
        for _ in 0..rng.range(1, width) {
            arcs.push((s, s + 1));
        }
    }
    let ends = (0..players)
        .map(|_| {
            let o = rng.below(segments);
            (o, rng.range(o + 1, segments))
        })
        .collect();
    let model = cost_model(rng, kind, arcs.len(), players, degree);
    NetworkCongestionGame::new(segments + 1, arcs, ends, model)
}

/// Never empty when there are two or more vertices.
fn random_edges(rng: &mut Rng64, vertices: usize, density: f64) -> Vec<(usize, usize)> {
    let pairs = combinations(vertices, 2);
    let mut edges: Vec<(usize, usize)> = pairs
        .iter()
        .filter(|_| rng.next_f64() < density)
        .map(|e| (e[0], e[1]))
        .collect();
    if edges.is_empty() && !pairs.is_empty() {
        let e = &pairs[rng.below(pairs.len())];
        edges.push((e[0], e[1]));
    }
    edges
}

/// Each edge present with probability `density` (at least one edge); payoffs in [-1, 1].
pub fn coordination_game(rng: &mut Rng64, vertices: usize, actions: usize, density: f64) -> Result<NetworkCoordinationGame> {
    let edges = random_edges(rng, vertices, density);
    let payoffs = edges
        .iter()
        .map(|_| {
            (0..actions)
                .map(|_| (0..actions).map(|_| rng.signed_dyadic(WEIGHT_BITS)).collect())
                .collect()
        })
        .collect();
    NetworkCoordinationGame::new(vertices, actions, edges, payoffs)
}

/// Weights in [0, 1], or [-1, 1] when `signed`.
pub fn cut_instance(rng: &mut Rng64, vertices: usize, density: f64, blocks: usize, signed: bool) -> Result<CutInstance> {
    let edges = random_edges(rng, vertices, density)
        .into_iter()
        .map(|(u, v)| {
            let w = if signed { rng.signed_dyadic(WEIGHT_BITS) } else { rng.dyadic(WEIGHT_BITS) };
            (u, v, w)
        })
        .collect();
    CutInstance::new(vertices, edges, blocks)
}

/// Every labeled simple graph on `n` vertices, as edge lists in mask order.
pub fn all_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs = combinations(n, 2);
    (0u64..1 << pairs.len())
        .map(|mask| {
            (0..pairs.len())
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| (pairs[b][0], pairs[b][1]))
                .collect()
        })
        .collect()
}

/// Clauses over `1..=width` distinct variables with random signs.
pub fn cnf(rng: &mut Rng64, variables: usize, clauses: usize, width: usize, k: usize) -> Result<CnfInstance> {
    if variables == 0 || width == 0 {
        return Err(invalid!("need at least one variable and a positive clause width"));
    }
    let list = (0..clauses)
        .map(|_| {
            let mut vs: Vec<usize> = (0..variables).collect();
            rng.shuffle(&mut vs);
            let len = rng.range(1, width.min(variables));
            let literals = vs[..len]
                .iter()
                .map(|&v| if rng.coin() { v as i64 + 1 } else { -(v as i64 + 1) })
                .collect();
            Clause::new(literals, rng.dyadic(WEIGHT_BITS))
        })
        .collect();
    CnfInstance::new(variables, list, k)
}

/// Complete graph with random edge weights, starting from the identity tour.
pub fn tour_instance(rng: &mut Rng64, vertices: usize, directed: bool, k: usize) -> Result<TourInstance> {
    let edges = complete_edges(vertices, directed, |_, _| rng.dyadic(WEIGHT_BITS));
    TourInstance::new(vertices, directed, edges, (0..vertices).collect(), k)
}

/// A planted perfect matching (sets `0..n`) plus up to `extra` further distinct triples.
pub fn w3dm(rng: &mut Rng64, n: usize, extra: usize, p: usize, q: usize) -> Result<SetSystemInstance> {
    let mut girls: Vec<usize> = (0..n).collect();
    let mut homes: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut girls);
    rng.shuffle(&mut homes);
    let mut sets: Vec<Vec<usize>> = (0..n).map(|b| vec![b, girls[b], homes[b]]).collect();
    let mut rest: Vec<Vec<usize>> = (0..n * n * n)
        .map(|x| vec![x / (n * n), x / n % n, x % n])
        .filter(|t| !sets.contains(t))
        .collect();
    rng.shuffle(&mut rest);
    rest.truncate(extra);
    rest.sort();
    sets.extend(rest);
    let weights = sets.iter().map(|_| rng.dyadic(WEIGHT_BITS)).collect();
    SetSystemInstance::new(n, sets, weights, SetSystemVariant::W3dm { p, q })
}

fn random_triple(rng: &mut Rng64, ground: usize) -> Vec<usize> {
    let mut xs: Vec<usize> = (0..ground).collect();
    rng.shuffle(&mut xs);
    xs.truncate(3);
    xs
}

/// A planted exact cover plus `extra` random 3-sets; `ground` must be a multiple of 3.
pub fn x3c(rng: &mut Rng64, ground: usize, extra: usize, k: usize) -> Result<SetSystemInstance> {
    if !ground.is_multiple_of(3) || ground == 0 {
        return Err(invalid!("ground size {ground} is not a positive multiple of 3"));
    }
    let mut xs: Vec<usize> = (0..ground).collect();
    rng.shuffle(&mut xs);
    let mut sets: Vec<Vec<usize>> = xs.chunks(3).map(<[usize]>::to_vec).collect();
    sets.extend((0..extra).map(|_| random_triple(rng, ground)));
    let weights = sets.iter().map(|_| rng.dyadic(WEIGHT_BITS)).collect();
    SetSystemInstance::new(ground, sets, weights, SetSystemVariant::X3c { k })
}

/// `sets` random subsets whose union is the ground set.
pub fn set_cover(rng: &mut Rng64, ground: usize, sets: usize, k: usize) -> Result<SetSystemInstance> {
    if sets == 0 || ground == 0 {
        return Err(invalid!("need a nonempty ground set and at least one set"));
    }
    let mut list: Vec<Vec<usize>> = (0..sets).map(|_| nonempty_subset(rng, ground)).collect();
    for x in 0..ground {
        if !list.iter().any(|s| s.contains(&x)) {
            let i = rng.below(sets);
            list[i].push(x);
        }
    }
    let weights = list.iter().map(|_| rng.dyadic(WEIGHT_BITS)).collect();
    SetSystemInstance::new(ground, list, weights, SetSystemVariant::Sc { k })
}

/// `sets` random nonempty subsets; selections hold at most `cap` elements.
pub fn hitting_set(
    rng: &mut Rng64,
    ground: usize,
    sets: usize,
    cap: usize,
    k: usize,
    moves: HsMoves,
) -> Result<SetSystemInstance> {
    if ground == 0 {
        return Err(invalid!("the ground set is empty"));
    }
    let list: Vec<Vec<usize>> = (0..sets).map(|_| nonempty_subset(rng, ground)).collect();
    let weights = list.iter().map(|_| rng.dyadic(WEIGHT_BITS)).collect();
    SetSystemInstance::new(ground, list, weights, SetSystemVariant::Hs { cap, k, moves })
}

/// Constraints over `1..=arity` distinct variables with random tables.
pub fn mca(rng: &mut Rng64, variables: usize, alphabet: usize, constraints: usize, arity: usize) -> Result<McaInstance> {
    if variables == 0 || arity == 0 {
        return Err(invalid!("need at least one variable and a positive arity"));
    }
    let list = (0..constraints)
        .map(|_| {
            let mut vs: Vec<usize> = (0..variables).collect();
            rng.shuffle(&mut vs);
            vs.truncate(rng.range(1, arity.min(variables)));
            let rows = alphabet.pow(vs.len() as u32);
            McaConstraint {
                variables: vs,
                table: (0..rows).map(|_| rng.dyadic(WEIGHT_BITS)).collect(),
            }
        })
        .collect();
    McaInstance::new(variables, alphabet, list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let a = congestion_game(&mut Rng64::new(7), 3, 4, 3, ModelKind::Step, 2).unwrap();
        let b = congestion_game(&mut Rng64::new(7), 3, 4, 3, ModelKind::Step, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(cnf(&mut Rng64::new(3), 4, 5, 3, 1).unwrap(), cnf(&mut Rng64::new(3), 4, 5, 3, 1).unwrap());
    }

    #[test]
    fn graph_counts() {
        assert_eq!(all_graphs(1).len(), 1);
        assert_eq!(all_graphs(3).len(), 8);
        assert_eq!(all_graphs(5).len(), 1024);
        assert!(all_graphs(4).iter().all(|g| g.iter().all(|&(u, v)| u < v && v < 4)));
    }

    #[test]
    fn planted_structures_are_feasible() {
        let mut rng = Rng64::new(11);
        let x = x3c(&mut rng, 6, 3, 2).unwrap();
        assert!(x.is_feasible_selection(&[0, 1]));
        let w = w3dm(&mut rng, 4, 10, 2, 4).unwrap();
        assert!(w.is_feasible_selection(&[0, 1, 2, 3]));
        let sc = set_cover(&mut rng, 5, 3, 2).unwrap();
        assert!(sc.is_feasible_selection(&[0, 1, 2]));
    }

    #[test]
    fn network_players_reach_destinations() {
        let mut rng = Rng64::new(5);
        for _ in 0..20 {
            let g = network_game(&mut rng, 3, 3, 2, ModelKind::General, 0).unwrap();
            assert!((0..3).all(|i| !g.simple_paths(i, 100).unwrap().is_empty()));
        }
    }
}
