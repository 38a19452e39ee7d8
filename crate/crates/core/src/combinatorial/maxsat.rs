//! Weighted MaxSat under the k-Flip neighborhood.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{differing, subsets_by_size, tag};
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, Covering, SeparabilityParams, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{combinations, product};

/// Truth value per variable.
pub type Assignment = Vec<bool>;

/// Literals are 1-based, negative for negation, as in DIMACS.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Clause {
    pub literals: Vec<i64>,
    pub weight: f64,
}

impl Clause {
    pub fn new(literals: Vec<i64>, weight: f64) -> Self {
        Self { literals, weight }
    }

    pub fn satisfied(&self, a: &[bool]) -> bool {
        self.literals.iter().any(|&l| a[(l.unsigned_abs() - 1) as usize] == (l > 0))
    }

    /// 0-based variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.literals.iter().map(|l| (l.unsigned_abs() - 1) as usize).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CnfInstance {
    pub variables: usize,
    pub clauses: Vec<Clause>,
    /// Largest number of variables flipped in one move.
    pub k: usize,
}

impl CnfInstance {
    pub fn new(variables: usize, clauses: Vec<Clause>, k: usize) -> Result<Self> {
        if k == 0 || k > variables.max(1) {
            return Err(invalid!("k = {k} must lie in 1..={variables}"));
        }
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.literals.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > variables) {
                return Err(invalid!("clause {i}: literal {l} does not name one of {variables} variables"));
            }
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(invalid!("clause {i}: weight {} outside [0, 1]", c.weight));
            }
        }
        Ok(Self { variables, clauses, k })
    }

    pub fn weight(&self, a: &[bool]) -> f64 {
        self.clauses.iter().filter(|c| c.satisfied(a)).map(|c| c.weight).sum()
    }

    /// Largest number of distinct clauses containing one variable.
    pub fn occurrence_bound(&self) -> usize {
        let mut occ = vec![0; self.variables];
        for c in &self.clauses {
            for v in c.variables() {
                occ[v] += 1;
            }
        }
        occ.into_iter().max().unwrap_or(0)
    }

    fn clauses_with(&self, vars: &[usize]) -> Vec<usize> {
        (0..self.clauses.len())
            .filter(|&i| self.clauses[i].variables().iter().any(|v| vars.contains(v)))
            .collect()
    }

    /// Assignments differing in 1..=k variables, by flip-set size then lexicographic flip set.
    pub fn kflip_neighbors(&self, a: &[bool]) -> Vec<Assignment> {
        let mut out = Vec::new();
        for r in 1..=self.k {
            for flips in combinations(self.variables, r) {
                let mut b = a.to_vec();
                for v in flips {
                    b[v] = !b[v];
                }
                out.push(b);
            }
        }
        out
    }

    /// `(λ, β, μ)` of the flip-set covering: `(2n, B, 2)` for k = 1, `(n^k, kB, 3)` otherwise.
    pub fn stated_params(&self) -> SeparabilityParams {
        let (n, b, k) = (self.variables as u64, self.occurrence_bound() as u64, self.k as u64);
        if k == 1 {
            SeparabilityParams { lambda: 2 * n, beta: b, mu: 2 }
        } else {
            SeparabilityParams {
                lambda: n.saturating_pow(k as u32),
                beta: k * b,
                mu: 3,
            }
        }
    }
}

impl LocalProblem for CnfInstance {
    type Solution = Assignment;

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn objective(&self, x: &Assignment) -> f64 {
        self.weight(x)
    }

    fn neighbors(&self, x: &Assignment) -> Vec<Assignment> {
        self.kflip_neighbors(x)
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Assignment>> {
        product(&vec![2; self.variables], max_count)
            .map(|all| all.into_iter().map(|v| v.into_iter().map(|b| b == 1).collect()).collect())
            .ok_or_else(|| Error::UnsupportedAtScale(format!("more than {max_count} assignments")))
    }

    fn is_feasible(&self, x: &Assignment) -> bool {
        x.len() == self.variables
    }
}

impl CloEncoder for CnfInstance {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.clauses.len(),
            nu_bar: self.variables,
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        if self.clauses.is_empty() {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::new(self.clauses.iter().map(|c| c.weight).collect())
    }

    fn encode(&self, x: &Assignment) -> Configuration {
        Configuration::new(self.clauses.iter().map(|c| c.satisfied(x) as u64).collect(), x.clone())
    }

    fn decode(&self, s: &Configuration) -> Option<Assignment> {
        (s.noncost_part.len() == self.variables).then(|| s.noncost_part.clone())
    }

    /// For k = 1 clusters `(x_j, new value)`, otherwise clusters keyed by the flip set.
    fn prescribed_covering(&self) -> Result<Covering> {
        let (transition_clusters, witnesses) = if self.k == 1 {
            (0..self.variables)
                .flat_map(|j| [0, 1].map(|v| (TransitionCluster::Symbolic(vec![j as i64, v]), self.clauses_with(&[j]))))
                .unzip()
        } else {
            subsets_by_size(self.variables, 1, self.k)?
                .into_iter()
                .map(|f| (TransitionCluster::Symbolic(tag(&f)), self.clauses_with(&f)))
                .unzip()
        };
        Ok(Covering {
            transition_clusters,
            coordinate_clusters: Covering::singletons(self.clauses.len()),
            witnesses,
        })
    }

    fn clusters_of(&self, from: &Assignment, to: &Assignment) -> Vec<ClusterTag> {
        let flips = differing(from, to);
        match (self.k, flips.as_slice()) {
            (1, [j]) => vec![vec![*j as i64, to[*j] as i64]],
            (1, _) => Vec::new(),
            _ if (1..=self.k).contains(&flips.len()) => vec![tag(&flips)],
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::certify;
    use crate::oracle::EnumBudget;
    use crate::problem::{encode_problem, verify_encoding};
    use alloc::sync::Arc;

    fn small(k: usize) -> CnfInstance {
        CnfInstance::new(2, vec![Clause::new(vec![1, 2], 1.0), Clause::new(vec![-1], 1.0)], k).unwrap()
    }

    #[test]
    fn weights() {
        let empty = CnfInstance::new(2, vec![], 1).unwrap();
        assert_eq!(empty.weight(&[true, false]), 0.0);
        // Weights 1 and 2 scaled into [0, 1] by one half.
        let f = CnfInstance::new(2, vec![Clause::new(vec![1, 2], 0.5), Clause::new(vec![-1], 1.0)], 1).unwrap();
        assert_eq!(f.weight(&[true, false]), 0.5);
        assert_eq!(f.weight(&[false, false]), 1.0);
        assert!(f.kflip_neighbors(&[true, false]).contains(&vec![false, false]));
    }

    #[test]
    fn full_flip_reaches_everything() {
        let f = CnfInstance::new(3, vec![Clause::new(vec![1, -3], 0.5)], 3).unwrap();
        assert_eq!(f.kflip_neighbors(&[false; 3]).len(), 7);
    }

    #[test]
    fn occurrence_bound_counts_distinct_clauses() {
        let f = CnfInstance::new(2, vec![Clause::new(vec![1, -1], 0.5), Clause::new(vec![1], 0.5)], 1).unwrap();
        assert_eq!(f.occurrence_bound(), 2);
    }

    #[test]
    fn encodings_certify() {
        for k in [1, 2] {
            let f = Arc::new(small(k));
            verify_encoding(&f, 100).unwrap();
            let enc = encode_problem(Arc::clone(&f), &vec![true, false]).unwrap();
            let cert = certify(&enc.instance, &enc.covering().unwrap(), Some(enc.resolver.as_ref()), EnumBudget::default()).unwrap();
            let stated = f.stated_params();
            assert!(cert.params.mu <= stated.mu);
            assert!(cert.params.beta <= stated.beta);
            assert!(cert.params.lambda <= stated.lambda);
        }
    }
}
