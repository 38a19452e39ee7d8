//! The abstract CLO model: configurations, linear costs, neighborhoods.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};

/// Dimensions of a CLO instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloDims {
    /// Length of the cost part.
    pub nu: usize,
    /// Length of the non-cost bit vector.
    pub nu_bar: usize,
    /// Largest value a cost-part entry may take.
    pub m_cap: u64,
}

impl CloDims {
    pub fn new(nu: usize, nu_bar: usize, m_cap: u64) -> Result<Self> {
        if nu == 0 {
            return Err(invalid!("nu must be at least 1"));
        }
        if m_cap == 0 {
            return Err(invalid!("m_cap must be at least 1"));
        }
        Ok(Self { nu, nu_bar, m_cap })
    }

    /// Checks lengths and entry ranges of `s`.
    pub fn check(&self, s: &Configuration) -> Result<()> {
        if s.cost_part.len() != self.nu {
            return Err(Error::DimensionMismatch {
                expected: self.nu,
                found: s.cost_part.len(),
            });
        }
        if s.noncost_part.len() != self.nu_bar {
            return Err(Error::DimensionMismatch {
                expected: self.nu_bar,
                found: s.noncost_part.len(),
            });
        }
        if let Some((i, v)) = s.cost_part.iter().enumerate().find(|(_, &v)| v > self.m_cap) {
            return Err(Error::Infeasible(format!(
                "cost coordinate {i} is {v}, above the cap {}",
                self.m_cap
            )));
        }
        Ok(())
    }

    /// `(M+1)^ν` as a float, the trivial bound on any improving path.
    pub fn configuration_space_bound(&self) -> f64 {
        libm::pow(self.m_cap as f64 + 1.0, self.nu as f64)
    }
}

/// A configuration: integral cost part plus binary non-cost part.
///
/// Ordering is lexicographic on the cost part, then the non-cost part.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Configuration {
    pub cost_part: Vec<u64>,
    pub noncost_part: Vec<bool>,
}

impl Configuration {
    pub fn new(cost_part: Vec<u64>, noncost_part: Vec<bool>) -> Self {
        Self {
            cost_part,
            noncost_part,
        }
    }

    /// Coordinatewise `self• − other•`.
    pub fn difference(&self, other: &Configuration) -> Vec<i64> {
        self.cost_part
            .iter()
            .zip(&other.cost_part)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.cost_part.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "|")?;
        for b in &self.noncost_part {
            write!(f, "{}", *b as u8)?;
        }
        write!(f, ")")
    }
}

/// Cost coefficients.
///
/// `new` enforces `|c_i| ≤ 1`. `with_scale` admits any finite values and
/// records `scale = max(1, max |c_i|)`; coefficients are never renormalized.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostVector {
    pub coeffs: Vec<f64>,
    pub scale: f64,
}

impl CostVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some((i, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || libm::fabs(**c) > 1.0)
        {
            return Err(invalid!("cost coefficient {i} = {c} outside [-1, 1]"));
        }
        Ok(Self { coeffs, scale: 1.0 })
    }

    pub fn with_scale(coeffs: Vec<f64>) -> Result<Self> {
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(invalid!("cost coefficient {i} = {c} is not finite"));
        }
        let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(libm::fabs(*c)));
        Ok(Self { coeffs, scale })
    }

    pub fn zeros(nu: usize) -> Self {
        Self {
            coeffs: alloc::vec![0.0; nu],
            scale: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `c · s•`, summed in coordinate order.
    pub fn dot(&self, s: &Configuration) -> f64 {
        let mut acc = 0.0;
        for (c, &v) in self.coeffs.iter().zip(&s.cost_part) {
            acc += c * v as f64;
        }
        acc
    }
}

/// Optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    /// Improvement of moving from cost `from` to cost `to`; positive means better.
    pub fn improvement(self, from: f64, to: f64) -> f64 {
        match self {
            Sense::Min => from - to,
            Sense::Max => to - from,
        }
    }
}

/// A directed edge of the neighborhood graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Transition {
    pub from: Configuration,
    pub to: Configuration,
}

impl Transition {
    pub fn new(from: Configuration, to: Configuration) -> Self {
        Self { from, to }
    }
}

/// Deterministic neighborhood oracle supplied by a problem encoder.
pub trait Neighborhood: Send + Sync {
    /// Neighbors of a feasible `s`, in a fixed order.
    fn neighbors(&self, s: &Configuration) -> Vec<Configuration>;

    /// Problem-level feasibility beyond the dimension checks.
    fn is_feasible(&self, s: &Configuration) -> bool;

    /// Every feasible configuration, or an error when there are more than `max_nodes`.
    fn configurations(&self, max_nodes: usize) -> Result<Vec<Configuration>> {
        let _ = max_nodes;
        Err(Error::UnsupportedAtScale(String::from(
            "this neighborhood has no configuration generator",
        )))
    }
}

/// A CLO instance. Cheap to clone; the oracle is shared.
#[derive(Clone)]
pub struct CloInstance {
    pub dims: CloDims,
    pub costs: CostVector,
    pub neighborhood: Arc<dyn Neighborhood>,
    pub start: Configuration,
    /// Natural orientation chosen by the encoder.
    pub sense: Sense,
}

impl fmt::Debug for CloInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CloInstance")
            .field("dims", &self.dims)
            .field("costs", &self.costs)
            .field("start", &self.start)
            .field("sense", &self.sense)
            .finish_non_exhaustive()
    }
}

impl CloInstance {
    pub fn new(
        dims: CloDims,
        costs: CostVector,
        neighborhood: Arc<dyn Neighborhood>,
        start: Configuration,
        sense: Sense,
    ) -> Result<Self> {
        if costs.len() != dims.nu {
            return Err(Error::DimensionMismatch {
                expected: dims.nu,
                found: costs.len(),
            });
        }
        let inst = Self {
            dims,
            costs,
            neighborhood,
            start,
            sense,
        };
        inst.check_feasible(&inst.start)?;
        Ok(inst)
    }

    /// Same instance with a different cost vector.
    pub fn with_costs(&self, costs: CostVector) -> Result<Self> {
        if costs.len() != self.dims.nu {
            return Err(Error::DimensionMismatch {
                expected: self.dims.nu,
                found: costs.len(),
            });
        }
        Ok(Self {
            costs,
            ..self.clone()
        })
    }

    pub fn check_feasible(&self, s: &Configuration) -> Result<()> {
        self.dims.check(s)?;
        if !self.neighborhood.is_feasible(s) {
            return Err(Error::Infeasible(format!("{s} rejected by the problem encoder")));
        }
        Ok(())
    }

    pub fn neighbors(&self, s: &Configuration) -> Vec<Configuration> {
        self.neighborhood.neighbors(s)
    }
}

/// `C(s) = c · s•`.
pub fn cost(inst: &CloInstance, s: &Configuration) -> Result<f64> {
    if s.cost_part.len() != inst.dims.nu {
        return Err(Error::DimensionMismatch {
            expected: inst.dims.nu,
            found: s.cost_part.len(),
        });
    }
    Ok(inst.costs.dot(s))
}

/// True iff no neighbor has strictly better cost.
pub fn is_local_optimum(inst: &CloInstance, s: &Configuration, sense: Sense) -> Result<bool> {
    Ok(improving_neighbors(inst, s, sense)?.is_empty())
}

/// Neighbors with strictly better cost, in oracle order, with their improvement.
pub fn improving_neighbors(
    inst: &CloInstance,
    s: &Configuration,
    sense: Sense,
) -> Result<Vec<(Configuration, f64)>> {
    inst.dims.check(s)?;
    let here = inst.costs.dot(s);
    Ok(inst
        .neighbors(s)
        .into_iter()
        .filter_map(|t| {
            let delta = sense.improvement(here, inst.costs.dot(&t));
            (delta > 0.0).then_some((t, delta))
        })
        .collect())
}

/// Neighborhood given by an explicit configuration list and adjacency.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExplicitNeighborhood {
    configs: Vec<Configuration>,
    adjacency: Vec<Vec<usize>>,
}

impl ExplicitNeighborhood {
    /// `adjacency[i]` lists neighbor indices of `configs[i]` in oracle order.
    pub fn new(configs: Vec<Configuration>, adjacency: Vec<Vec<usize>>) -> Result<Self> {
        if configs.len() != adjacency.len() {
            return Err(invalid!(
                "{} configurations but {} adjacency rows",
                configs.len(),
                adjacency.len()
            ));
        }
        let mut sorted = configs.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid!("duplicate configuration"));
        }
        for (i, row) in adjacency.iter().enumerate() {
            if let Some(&j) = row.iter().find(|&&j| j >= configs.len() || j == i) {
                return Err(invalid!("configuration {i} has bad neighbor index {j}"));
            }
        }
        Ok(Self { configs, adjacency })
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    fn index(&self, s: &Configuration) -> Option<usize> {
        self.configs.iter().position(|c| c == s)
    }
}

impl Neighborhood for ExplicitNeighborhood {
    fn neighbors(&self, s: &Configuration) -> Vec<Configuration> {
        match self.index(s) {
            Some(i) => self.adjacency[i]
                .iter()
                .map(|&j| self.configs[j].clone())
                .collect(),
            None => Vec::new(),
        }
    }

    fn is_feasible(&self, s: &Configuration) -> bool {
        self.index(s).is_some()
    }

    fn configurations(&self, max_nodes: usize) -> Result<Vec<Configuration>> {
        if self.configs.len() > max_nodes {
            return Err(Error::UnsupportedAtScale(format!(
                "{} configurations exceed the budget of {max_nodes}",
                self.configs.len()
            )));
        }
        Ok(self.configs.clone())
    }
}
