//! Native local search problems and their CLO encoders.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::clo::{CloDims, CloInstance, Configuration, CostVector, Neighborhood, Sense};
use crate::covering::{ClusterResolver, ClusterTag, Covering};
use crate::error::{Error, Result};

/// Tolerance for comparing CLO costs against native objectives.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;

/// A local search problem in its own terms.
pub trait LocalProblem {
    type Solution: Clone + Ord + Debug + Send + Sync;

    fn sense(&self) -> Sense;

    fn objective(&self, x: &Self::Solution) -> f64;

    /// Neighbors of a feasible solution, in a fixed order.
    fn neighbors(&self, x: &Self::Solution) -> Vec<Self::Solution>;

    /// Every feasible solution, or an error beyond `max_count`.
    fn solutions(&self, max_count: usize) -> Result<Vec<Self::Solution>>;

    fn is_feasible(&self, x: &Self::Solution) -> bool;
}

/// A problem with an encoding into CLO form and a prescribed covering.
pub trait CloEncoder: LocalProblem + Send + Sync + 'static {
    fn dims(&self) -> CloDims;

    /// Cost coefficients; `encode(x)` must satisfy `cost · encode(x)• = objective(x)`.
    fn cost_vector(&self) -> Result<CostVector>;

    fn encode(&self, x: &Self::Solution) -> Configuration;

    /// Inverse of `encode` on feasible configurations.
    fn decode(&self, s: &Configuration) -> Option<Self::Solution>;

    /// The covering from the family's separability argument, or an error when it is too large to list.
    fn prescribed_covering(&self) -> Result<Covering>;

    /// Symbolic cluster tags of the prescribed covering that contain the move `from → to`.
    fn clusters_of(&self, from: &Self::Solution, to: &Self::Solution) -> Vec<ClusterTag>;
}

/// Neighborhood and cluster resolver derived from a [`CloEncoder`].
pub struct EncodedNeighborhood<P: CloEncoder>(pub Arc<P>);

impl<P: CloEncoder> Neighborhood for EncodedNeighborhood<P> {
    fn neighbors(&self, s: &Configuration) -> Vec<Configuration> {
        match self.0.decode(s) {
            Some(x) => self.0.neighbors(&x).iter().map(|y| self.0.encode(y)).collect(),
            None => Vec::new(),
        }
    }

    fn is_feasible(&self, s: &Configuration) -> bool {
        match self.0.decode(s) {
            Some(x) => self.0.is_feasible(&x) && self.0.encode(&x) == *s,
            None => false,
        }
    }

    fn configurations(&self, max_nodes: usize) -> Result<Vec<Configuration>> {
        Ok(self
            .0
            .solutions(max_nodes)?
            .iter()
            .map(|x| self.0.encode(x))
            .collect())
    }
}

impl<P: CloEncoder> ClusterResolver for EncodedNeighborhood<P> {
    fn clusters_of(&self, from: &Configuration, to: &Configuration) -> Vec<ClusterTag> {
        match (self.0.decode(from), self.0.decode(to)) {
            (Some(a), Some(b)) => self.0.clusters_of(&a, &b),
            _ => Vec::new(),
        }
    }
}

type CoveringFn = dyn Fn() -> Result<Covering> + Send + Sync;

/// An encoded instance with its prescribed covering, built on demand.
#[derive(Clone)]
pub struct Encoded {
    pub instance: CloInstance,
    pub resolver: Arc<dyn ClusterResolver>,
    covering: Arc<CoveringFn>,
}

impl Encoded {
    pub fn covering(&self) -> Result<Covering> {
        (self.covering)()
    }
}

impl Debug for Encoded {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Encoded")
            .field("instance", &self.instance)
            .finish_non_exhaustive()
    }
}

/// Encodes `problem` with `start` as the initial configuration.
pub fn encode_problem<P: CloEncoder>(problem: Arc<P>, start: &P::Solution) -> Result<Encoded> {
    if !problem.is_feasible(start) {
        return Err(Error::Infeasible(format!("start solution {start:?} is infeasible")));
    }
    let nb = Arc::new(EncodedNeighborhood(Arc::clone(&problem)));
    let instance = CloInstance::new(
        problem.dims(),
        problem.cost_vector()?,
        nb.clone(),
        problem.encode(start),
        problem.sense(),
    )?;
    Ok(Encoded {
        instance,
        resolver: nb,
        covering: Arc::new(move || problem.prescribed_covering()),
    })
}

fn strictly_better(sense: Sense, from: f64, to: f64) -> bool {
    sense.improvement(from, to) > 0.0
}

/// True iff no neighbor has a strictly better objective.
pub fn is_native_local_optimum<P: LocalProblem>(p: &P, x: &P::Solution) -> bool {
    let here = p.objective(x);
    p.neighbors(x)
        .iter()
        .all(|y| !strictly_better(p.sense(), here, p.objective(y)))
}

/// Every local optimum, by brute force.
pub fn native_local_optima<P: LocalProblem>(p: &P, max_count: usize) -> Result<Vec<P::Solution>> {
    Ok(p.solutions(max_count)?
        .into_iter()
        .filter(|x| is_native_local_optimum(p, x))
        .collect())
}

/// Counts from a successful encoding check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodingReport {
    pub solutions: usize,
    pub transitions: usize,
}

/// Checks bijection, cost = objective, and neighbor isomorphism by enumeration.
pub fn verify_encoding<P: CloEncoder>(problem: &Arc<P>, max_count: usize) -> Result<EncodingReport> {
    let p = problem.as_ref();
    let costs = p.cost_vector()?;
    let dims = p.dims();
    let nb = EncodedNeighborhood(Arc::clone(problem));
    let solutions = p.solutions(max_count)?;
    let mut image: BTreeMap<Configuration, usize> = BTreeMap::new();
    for (i, x) in solutions.iter().enumerate() {
        if !p.is_feasible(x) {
            return Err(Error::Encoding(format!("enumerated solution {x:?} is infeasible")));
        }
        let s = p.encode(x);
        dims.check(&s)?;
        if p.decode(&s).as_ref() != Some(x) {
            return Err(Error::Encoding(format!("decode(encode({x:?})) differs")));
        }
        if image.insert(s, i).is_some() {
            return Err(Error::Encoding(format!("encode is not injective at {x:?}")));
        }
    }
    let configs: BTreeSet<Configuration> = nb.configurations(max_count)?.into_iter().collect();
    if configs.len() != image.len() || configs.iter().any(|s| !image.contains_key(s)) {
        return Err(Error::Encoding(format!(
            "{} configurations enumerated but {} solutions encoded",
            configs.len(),
            image.len()
        )));
    }
    let mut transitions = 0;
    for x in &solutions {
        let s = p.encode(x);
        let c = costs.dot(&s);
        let obj = p.objective(x);
        if (c - obj).abs() > OBJECTIVE_TOLERANCE {
            return Err(Error::Encoding(format!("cost {c} but objective {obj} at {x:?}")));
        }
        let native: Vec<P::Solution> = p.neighbors(x);
        let native_set: BTreeSet<Configuration> = native.iter().map(|y| p.encode(y)).collect();
        let clo: Vec<Configuration> = nb.neighbors(&s);
        let clo_set: BTreeSet<Configuration> = clo.iter().cloned().collect();
        if native_set != clo_set || clo_set.len() != native.len() {
            return Err(Error::Encoding(format!("neighbor sets differ at {x:?}")));
        }
        for y in &native {
            if !image.contains_key(&p.encode(y)) {
                return Err(Error::Encoding(format!("neighbor {y:?} of {x:?} not enumerated")));
            }
            let native_gain = p.sense().improvement(obj, p.objective(y));
            let clo_gain = p.sense().improvement(c, costs.dot(&p.encode(y)));
            if native_gain.abs() > OBJECTIVE_TOLERANCE && (native_gain > 0.0) != (clo_gain > 0.0) {
                return Err(Error::Encoding(format!("improvement of {x:?} -> {y:?} not preserved")));
            }
        }
        transitions += native.len();
    }
    Ok(EncodingReport {
        solutions: solutions.len(),
        transitions,
    })
}
