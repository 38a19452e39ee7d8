//! TSP and ATSP under the k-Opt neighborhood.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{subsets_by_size, tag};
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, Covering, SeparabilityParams, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::{combinations, permutations};

/// Cyclic vertex sequence, rotated to start at vertex 0.
pub type Tour = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct TourInstance {
    vertices: usize,
    directed: bool,
    edges: Vec<(usize, usize, f64)>,
    tour: Tour,
    k: usize,
    index: Vec<Option<usize>>,
}

impl TourInstance {
    /// Undirected edges are stored as given and matched in either orientation.
    pub fn new(vertices: usize, directed: bool, edges: Vec<(usize, usize, f64)>, tour: Tour, k: usize) -> Result<Self> {
        if vertices < 3 {
            return Err(invalid!("a tour needs at least 3 vertices, got {vertices}"));
        }
        if k < 2 || k > vertices {
            return Err(invalid!("k = {k} must lie in 2..={vertices}"));
        }
        let mut index = vec![None; vertices * vertices];
        for (e, &(u, v, w)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices || u == v {
                return Err(invalid!("edge {e} = ({u}, {v}) is not a proper edge"));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(invalid!("edge {e} weight {w} outside [0, 1]"));
            }
            let slots = if directed { vec![u * vertices + v] } else { vec![u * vertices + v, v * vertices + u] };
            for s in slots {
                if index[s].replace(e).is_some() {
                    return Err(invalid!("duplicate edge ({u}, {v})"));
                }
            }
        }
        let mut inst = Self {
            vertices,
            directed,
            edges,
            tour: Vec::new(),
            k,
            index,
        };
        if !inst.is_tour(&tour) {
            return Err(Error::Infeasible(format!("{tour:?} is not a Hamiltonian tour of the graph")));
        }
        inst.tour = inst.canonical(&tour);
        Ok(inst)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn tour(&self) -> &Tour {
        &self.tour
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index[u * self.vertices + v]
    }

    pub fn is_tour(&self, t: &[usize]) -> bool {
        let n = self.vertices;
        let mut seen = vec![false; n];
        t.len() == n
            && t.iter().all(|&v| v < n && !core::mem::replace(&mut seen[v], true))
            && (0..n).all(|i| self.edge_index(t[i], t[(i + 1) % n]).is_some())
    }

    /// Rotates to start at 0; undirected tours also fix the direction so that `t[1] < t[n-1]`.
    pub fn canonical(&self, t: &[usize]) -> Tour {
        let n = t.len();
        let start = t.iter().position(|&v| v == 0).unwrap_or(0);
        let mut out: Tour = (0..n).map(|i| t[(start + i) % n]).collect();
        if !self.directed && n > 2 && out[1] > out[n - 1] {
            out[1..].reverse();
        }
        out
    }

    /// Edge indices used by a tour, sorted.
    pub fn tour_edges(&self, t: &[usize]) -> Vec<usize> {
        let n = t.len();
        let mut es: Vec<usize> = (0..n)
            .map(|i| self.edge_index(t[i], t[(i + 1) % n]).expect("tour uses a missing edge"))
            .collect();
        es.sort_unstable();
        es
    }

    pub fn weight(&self, t: &[usize]) -> f64 {
        self.tour_edges(t).iter().map(|&e| self.edges[e].2).sum()
    }

    /// Tours reachable by removing `r ∈ 2..=k` tour edges and reconnecting the pieces, sorted.
    pub fn kopt_neighbors(&self, t: &[usize]) -> Vec<Tour> {
        let n = self.vertices;
        let here = self.canonical(t);
        let mut out = BTreeSet::new();
        for r in 2..=self.k {
            let orders = permutations(r - 1);
            for cut in combinations(n, r) {
                // Piece j runs from the vertex after cut j to the vertex at cut j+1.
                let pieces: Vec<Vec<usize>> = (0..r)
                    .map(|j| {
                        let start = cut[j] + 1;
                        let end = if j + 1 < r { cut[j + 1] } else { cut[0] + n };
                        (start..=end).map(|i| t[i % n]).collect()
                    })
                    .collect();
                let flips = if self.directed { 1 } else { 1usize << (r - 1) };
                for order in &orders {
                    for mask in 0..flips {
                        let mut seq = pieces[0].clone();
                        for (slot, &p) in order.iter().enumerate() {
                            let piece = &pieces[p + 1];
                            if mask >> slot & 1 == 1 {
                                seq.extend(piece.iter().rev());
                            } else {
                                seq.extend(piece.iter());
                            }
                        }
                        if self.is_tour(&seq) {
                            let c = self.canonical(&seq);
                            if c != here {
                                out.insert(c);
                            }
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// `(k−1) · C(n, k) · (2k)!`.
    pub fn neighbor_count_bound(&self) -> f64 {
        let k = self.k as u64;
        let fact: f64 = (1..=2 * k).map(|i| i as f64).product();
        (k - 1) as f64 * crate::util::binomial(self.vertices as u64, k) * fact
    }

    /// Clusters keyed by the removed edge set (plus the added pair for 2-Opt), singleton coordinates.
    pub fn stated_params(&self) -> SeparabilityParams {
        let m = self.edges.len() as u64;
        let k = self.k as u64;
        SeparabilityParams {
            lambda: m.saturating_pow(k as u32),
            beta: 2 * k * k,
            mu: if k == 2 && !self.directed { 1 } else { 2 },
        }
    }

    fn two_opt(&self) -> bool {
        self.k == 2 && !self.directed
    }

    /// The two ways to rejoin two vertex-disjoint removed edges, where the new edges exist.
    fn two_opt_reconnections(&self, removed: &[usize]) -> Vec<Vec<usize>> {
        let (a, b, _) = self.edges[removed[0]];
        let (c, d, _) = self.edges[removed[1]];
        if [a, b].contains(&c) || [a, b].contains(&d) {
            return Vec::new();
        }
        [[(a, c), (b, d)], [(a, d), (b, c)]]
            .iter()
            .filter_map(|pair| {
                let mut es = vec![self.edge_index(pair[0].0, pair[0].1)?, self.edge_index(pair[1].0, pair[1].1)?];
                es.sort_unstable();
                Some(es)
            })
            .collect()
    }

    /// Edges that a move removing `removed` can touch.
    fn witness(&self, removed: &[usize]) -> Vec<usize> {
        let mut out = BTreeSet::new();
        if self.directed {
            for &a in removed {
                for &b in removed {
                    if let Some(e) = self.edge_index(self.edges[a].0, self.edges[b].1) {
                        out.insert(e);
                    }
                }
            }
        } else {
            let ends: BTreeSet<usize> = removed.iter().flat_map(|&e| [self.edges[e].0, self.edges[e].1]).collect();
            for &u in &ends {
                for &v in &ends {
                    if let Some(e) = self.edge_index(u, v) {
                        out.insert(e);
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

impl LocalProblem for TourInstance {
    type Solution = Tour;

    fn sense(&self) -> Sense {
        Sense::Min
    }

    fn objective(&self, x: &Tour) -> f64 {
        self.weight(x)
    }

    fn neighbors(&self, x: &Tour) -> Vec<Tour> {
        self.kopt_neighbors(x)
    }

    /// Every Hamiltonian tour in canonical form, sorted.
    fn solutions(&self, max_count: usize) -> Result<Vec<Tour>> {
        let n = self.vertices;
        let mut out = Vec::new();
        let mut path = vec![0];
        let mut used = vec![false; n];
        used[0] = true;
        fn extend(inst: &TourInstance, path: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Tour>, max: usize) -> Result<()> {
            let n = inst.vertices;
            if path.len() == n {
                if inst.edge_index(path[n - 1], 0).is_some() && (inst.directed || path[1] < path[n - 1]) {
                    if out.len() == max {
                        return Err(Error::UnsupportedAtScale(format!("more than {max} tours")));
                    }
                    out.push(path.clone());
                }
                return Ok(());
            }
            let last = *path.last().unwrap();
            for v in 1..n {
                if !used[v] && inst.edge_index(last, v).is_some() {
                    used[v] = true;
                    path.push(v);
                    extend(inst, path, used, out, max)?;
                    path.pop();
                    used[v] = false;
                }
            }
            Ok(())
        }
        extend(self, &mut path, &mut used, &mut out, max_count)?;
        Ok(out)
    }

    fn is_feasible(&self, x: &Tour) -> bool {
        self.is_tour(x) && self.canonical(x) == *x
    }
}

impl CloEncoder for TourInstance {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.edges.len(),
            nu_bar: 0,
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        CostVector::new(self.edges.iter().map(|e| e.2).collect())
    }

    fn encode(&self, x: &Tour) -> Configuration {
        let mut s = vec![0; self.edges.len()];
        for e in self.tour_edges(x) {
            s[e] = 1;
        }
        Configuration::new(s, Vec::new())
    }

    fn decode(&self, s: &Configuration) -> Option<Tour> {
        let n = self.vertices;
        let chosen: Vec<usize> = (0..s.cost_part.len()).filter(|&e| s.cost_part[e] == 1).collect();
        if chosen.len() != n || s.cost_part.iter().any(|&x| x > 1) {
            return None;
        }
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &e in &chosen {
            let (u, v, _) = self.edges[e];
            next[u].push(v);
            if !self.directed {
                next[v].push(u);
            }
        }
        let mut t = vec![0];
        let mut prev = usize::MAX;
        while t.len() < n {
            let at = *t.last().unwrap();
            let mut options: Vec<usize> = next[at].iter().copied().filter(|&v| v != prev).collect();
            options.sort_unstable();
            let v = *options.first()?;
            prev = at;
            t.push(v);
        }
        (self.is_tour(&t) && self.tour_edges(&t) == chosen).then(|| self.canonical(&t))
    }

    /// Clusters keyed by the removed edge set; undirected 2-Opt clusters also fix the added pair.
    fn prescribed_covering(&self) -> Result<Covering> {
        let m = self.edges.len();
        let sets = subsets_by_size(m, 2, self.k)?;
        let (transition_clusters, witnesses) = if self.two_opt() {
            let mut clusters = Vec::new();
            let mut witnesses = Vec::new();
            for r in &sets {
                for added in self.two_opt_reconnections(r) {
                    let mut w: Vec<usize> = r.iter().chain(added.iter()).copied().collect();
                    w.sort_unstable();
                    clusters.push(TransitionCluster::Symbolic(exchange_tag(r, &added)));
                    witnesses.push(w);
                }
            }
            (clusters, witnesses)
        } else {
            (
                sets.iter().map(|r| TransitionCluster::Symbolic(tag(r))).collect(),
                sets.iter().map(|r| self.witness(r)).collect(),
            )
        };
        Ok(Covering {
            transition_clusters,
            coordinate_clusters: Covering::singletons(m),
            witnesses,
        })
    }

    fn clusters_of(&self, from: &Tour, to: &Tour) -> Vec<ClusterTag> {
        let before = self.tour_edges(from);
        let after = self.tour_edges(to);
        let removed: Vec<usize> = before.iter().copied().filter(|e| !after.contains(e)).collect();
        if !(2..=self.k).contains(&removed.len()) {
            return Vec::new();
        }
        if self.two_opt() {
            let added: Vec<usize> = after.iter().copied().filter(|e| !before.contains(e)).collect();
            vec![exchange_tag(&removed, &added)]
        } else {
            vec![tag(&removed)]
        }
    }
}

fn exchange_tag(removed: &[usize], added: &[usize]) -> ClusterTag {
    let mut t = tag(removed);
    t.push(-1);
    t.extend(tag(added));
    t
}

/// Complete graph with the given weight function.
pub fn complete_edges(n: usize, directed: bool, mut weight: impl FnMut(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && (directed || u < v) {
                out.push((u, v, weight(u, v)));
            }
        }
    }
    out
}
