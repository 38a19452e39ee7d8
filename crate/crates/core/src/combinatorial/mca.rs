//! Maximum constraint assignment with single-variable moves.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::differing;
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, CoordinateCluster, Covering, SeparabilityParams, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{index_width, product, push_index, read_index};

/// Largest value table a constraint may carry.
pub const MAX_TABLE: usize = 10_000;

/// Value per variable, in `0..r`.
pub type Values = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McaConstraint {
    pub variables: Vec<usize>,
    /// Row-major over the variables' values, first variable slowest.
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McaInstance {
    pub variables: usize,
    /// Alphabet size `r`.
    pub alphabet: usize,
    pub constraints: Vec<McaConstraint>,
}

impl McaInstance {
    pub fn new(variables: usize, alphabet: usize, constraints: Vec<McaConstraint>) -> Result<Self> {
        if variables == 0 || alphabet < 2 {
            return Err(invalid!("need at least one variable and an alphabet of size >= 2"));
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.variables.is_empty() || c.variables.iter().any(|&v| v >= variables) {
                return Err(invalid!("constraint {i} names variables outside 0..{variables}"));
            }
            let mut vs = c.variables.clone();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() != c.variables.len() {
                return Err(invalid!("constraint {i} repeats a variable"));
            }
            let size = alphabet.checked_pow(c.variables.len() as u32).filter(|&s| s <= MAX_TABLE);
            match size {
                None => return Err(invalid!("constraint {i}: r^p exceeds {MAX_TABLE}")),
                Some(s) if s != c.table.len() => {
                    return Err(invalid!("constraint {i}: table has {} entries, need {s}", c.table.len()))
                }
                _ => {}
            }
            if let Some(x) = c.table.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(invalid!("constraint {i}: value {x} outside [0, 1]"));
            }
        }
        Ok(Self {
            variables,
            alphabet,
            constraints,
        })
    }

    fn row(&self, c: &McaConstraint, a: &[usize]) -> usize {
        c.variables.iter().fold(0, |acc, &v| acc * self.alphabet + a[v])
    }

    pub fn weight(&self, a: &[usize]) -> f64 {
        self.constraints.iter().map(|c| c.table[self.row(c, a)]).sum()
    }

    /// Largest constraint arity `p`.
    pub fn arity(&self) -> usize {
        self.constraints.iter().map(|c| c.variables.len()).max().unwrap_or(0)
    }

    /// Largest number of constraints on one variable, `q`.
    pub fn occurrence_bound(&self) -> usize {
        (0..self.variables).map(|v| self.constraints_on(v).len()).max().unwrap_or(0)
    }

    fn constraints_on(&self, v: usize) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| self.constraints[i].variables.contains(&v))
            .collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.constraints
            .iter()
            .map(|c| {
                let o = acc;
                acc += c.table.len();
                o
            })
            .collect()
    }

    /// Every single-variable revaluation, variable-major then value.
    pub fn mca_neighbors(&self, a: &[usize]) -> Vec<Values> {
        let mut out = Vec::new();
        for v in 0..self.variables {
            for x in 0..self.alphabet {
                if x != a[v] {
                    let mut b = a.to_vec();
                    b[v] = x;
                    out.push(b);
                }
            }
        }
        out
    }

    /// `(nr(r−1), q, r^{2p})`.
    pub fn stated_params(&self) -> SeparabilityParams {
        let (n, r) = (self.variables as u64, self.alphabet as u64);
        SeparabilityParams {
            lambda: n * r * (r - 1),
            beta: self.occurrence_bound() as u64,
            mu: r.saturating_pow(2 * self.arity() as u32),
        }
    }

    fn width(&self) -> usize {
        index_width(self.alphabet)
    }
}

impl LocalProblem for McaInstance {
    type Solution = Values;

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn objective(&self, x: &Values) -> f64 {
        self.weight(x)
    }

    fn neighbors(&self, x: &Values) -> Vec<Values> {
        self.mca_neighbors(x)
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Values>> {
        product(&vec![self.alphabet; self.variables], max_count)
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_count} assignments")))
    }

    fn is_feasible(&self, x: &Values) -> bool {
        x.len() == self.variables && x.iter().all(|&v| v < self.alphabet)
    }
}

impl CloEncoder for McaInstance {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.constraints.iter().map(|c| c.table.len()).sum(),
            nu_bar: self.variables * self.width(),
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        if self.constraints.is_empty() {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::new(self.constraints.iter().flat_map(|c| c.table.iter().copied()).collect())
    }

    fn encode(&self, x: &Values) -> Configuration {
        let mut s = vec![0; self.dims().nu];
        for (c, o) in self.constraints.iter().zip(self.offsets()) {
            s[o + self.row(c, x)] = 1;
        }
        let mut bits = Vec::new();
        for &v in x {
            push_index(&mut bits, v, self.width());
        }
        Configuration::new(s, bits)
    }

    fn decode(&self, s: &Configuration) -> Option<Values> {
        let w = self.width();
        if s.noncost_part.len() != self.variables * w {
            return None;
        }
        let a: Values = (0..self.variables).map(|v| read_index(&s.noncost_part, v * w, w)).collect();
        self.is_feasible(&a).then_some(a)
    }

    /// Clusters `(x_j, v, v')`, one coordinate cluster per constraint table.
    fn prescribed_covering(&self) -> Result<Covering> {
        let coordinate_clusters = self
            .constraints
            .iter()
            .zip(self.offsets())
            .map(|(c, o)| CoordinateCluster {
                indices: (o..o + c.table.len()).collect(),
            })
            .collect();
        let mut transition_clusters = Vec::new();
        let mut witnesses = Vec::new();
        for j in 0..self.variables {
            let on = self.constraints_on(j);
            for v in 0..self.alphabet {
                for w in 0..self.alphabet {
                    if v != w {
                        transition_clusters.push(TransitionCluster::Symbolic(vec![j as i64, v as i64, w as i64]));
                        witnesses.push(on.clone());
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

    fn clusters_of(&self, from: &Values, to: &Values) -> Vec<ClusterTag> {
        match differing(from, to).as_slice() {
            [j] => vec![vec![*j as i64, from[*j] as i64, to[*j] as i64]],
            _ => Vec::new(),
        }
    }
}
