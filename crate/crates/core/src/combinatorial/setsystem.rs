//! Weighted set problems: 3D matching, exact cover by 3-sets, set cover and hitting set.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{subsets_by_size, tag, MAX_DECLARED_CLUSTERS};
use crate::clo::{CloDims, Configuration, CostVector, Sense};
use crate::covering::{ClusterTag, Covering, SeparabilityParams, TransitionCluster};
use crate::error::{invalid, Error, Result};
use crate::problem::{CloEncoder, LocalProblem};
use crate::util::combinations;

/// Hitting-set move shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HsMoves {
    /// Toggle membership of at most `k` elements in total.
    Toggle,
    /// Remove at most `k` elements and add at most `k` elements.
    Exchange,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "variant", rename_all = "snake_case"))]
pub enum SetSystemVariant {
    /// Sets are triples `[boy, girl, home]` over `0..ground`; replace up to `p` triples,
    /// relocating at most `q` persons.
    W3dm { p: usize, q: usize },
    /// Sets are 3-subsets; exact covers, swapping up to `k / 2` sets.
    X3c { k: usize },
    /// Covers, toggling up to `k` sets.
    Sc { k: usize },
    /// Element subsets of size at most `cap`; weight of the sets hit.
    Hs { cap: usize, k: usize, moves: HsMoves },
}

/// Chosen set indices (or ground elements for hitting set), sorted.
pub type Selection = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetSystemInstance {
    /// Ground set size; the `n` of a 3D matching.
    pub ground: usize,
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub variant: SetSystemVariant,
}

impl SetSystemInstance {
    /// Weights must be finite and nonnegative; see [`SetSystemInstance::validate_support`].
    pub fn new(ground: usize, sets: Vec<Vec<usize>>, weights: Vec<f64>, variant: SetSystemVariant) -> Result<Self> {
        if sets.len() != weights.len() {
            return Err(invalid!("{} sets but {} weights", sets.len(), weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid!("weight {w} must be finite and nonnegative"));
        }
        let mut sets = sets;
        match variant {
            SetSystemVariant::W3dm { p, .. } => {
                if p == 0 {
                    return Err(invalid!("p must be positive"));
                }
                let mut seen = BTreeSet::new();
                for t in &sets {
                    if t.len() != 3 || t.iter().any(|&x| x >= ground) {
                        return Err(invalid!("{t:?} is not a triple over 0..{ground}"));
                    }
                    if !seen.insert(t.clone()) {
                        return Err(invalid!("triple {t:?} listed twice"));
                    }
                }
            }
            _ => {
                for s in sets.iter_mut() {
                    s.sort_unstable();
                    s.dedup();
                    if s.iter().any(|&x| x >= ground) {
                        return Err(invalid!("set {s:?} leaves the ground set 0..{ground}"));
                    }
                }
            }
        }
        match variant {
            SetSystemVariant::X3c { k } => {
                if !ground.is_multiple_of(3) || sets.iter().any(|s| s.len() != 3) {
                    return Err(invalid!("exact cover needs 3-sets over a ground set of size divisible by 3"));
                }
                if k < 2 {
                    return Err(invalid!("k = {k} allows no swap"));
                }
            }
            SetSystemVariant::Sc { k } | SetSystemVariant::Hs { k, .. } if k == 0 => {
                return Err(invalid!("k must be positive"));
            }
            _ => {}
        }
        Ok(Self {
            ground,
            sets,
            weights,
            variant,
        })
    }

    /// Checks that every weight lies in [0, 1].
    pub fn validate_support(&self) -> Result<()> {
        match self.weights.iter().find(|w| **w > 1.0) {
            Some(w) => Err(invalid!("weight {w} outside [0, 1]")),
            None => Ok(()),
        }
    }

    fn is_hitting_set(&self) -> bool {
        matches!(self.variant, SetSystemVariant::Hs { .. })
    }

    /// Largest number of sets containing one element.
    pub fn occurrence_bound(&self) -> usize {
        let mut occ = vec![0; self.ground];
        for s in &self.sets {
            for &x in s {
                occ[x] += 1;
            }
        }
        occ.into_iter().max().unwrap_or(0)
    }

    fn sets_hit_by(&self, elements: &[usize]) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&i| self.sets[i].iter().any(|x| elements.contains(x)))
            .collect()
    }

    fn covers_ground(&self, sel: &[usize]) -> bool {
        let mut hit = vec![false; self.ground];
        for &i in sel {
            for &x in &self.sets[i] {
                hit[x] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    fn is_matching(&self, sel: &[usize]) -> bool {
        if sel.len() != self.ground {
            return false;
        }
        (0..3).all(|c| {
            let vals: BTreeSet<usize> = sel.iter().map(|&i| self.sets[i][c]).collect();
            vals.len() == self.ground
        })
    }

    fn is_exact_cover(&self, sel: &[usize]) -> bool {
        sel.len() * 3 == self.ground && self.covers_ground(sel)
    }

    pub fn is_feasible_selection(&self, sel: &[usize]) -> bool {
        let universe = if self.is_hitting_set() { self.ground } else { self.sets.len() };
        if sel.windows(2).any(|w| w[0] >= w[1]) || sel.iter().any(|&i| i >= universe) {
            return false;
        }
        match self.variant {
            SetSystemVariant::W3dm { .. } => self.is_matching(sel),
            SetSystemVariant::X3c { .. } => self.is_exact_cover(sel),
            SetSystemVariant::Sc { .. } => self.covers_ground(sel),
            SetSystemVariant::Hs { cap, .. } => sel.len() <= cap,
        }
    }

    pub fn weight(&self, sel: &[usize]) -> f64 {
        if self.is_hitting_set() {
            self.sets_hit_by(sel).iter().map(|&i| self.weights[i]).sum()
        } else {
            sel.iter().map(|&i| self.weights[i]).sum()
        }
    }

    /// Persons whose home differs between two matchings.
    pub fn relocated(&self, a: &[usize], b: &[usize]) -> usize {
        let home = |sel: &[usize], c: usize| {
            let mut h = vec![usize::MAX; self.ground];
            for &i in sel {
                h[self.sets[i][c]] = self.sets[i][2];
            }
            h
        };
        (0..2)
            .map(|c| {
                let (x, y) = (home(a, c), home(b, c));
                (0..self.ground).filter(|&v| x[v] != y[v]).count()
            })
            .sum()
    }

    /// Sets of `pool` that partition the elements marked in `need` (for matchings, in every component).
    fn completions(&self, pool: &[usize], need: &[Vec<bool>], count: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut need = need.to_vec();
        let mut chosen = Vec::new();
        self.complete(pool, &mut need, count, &mut chosen, &mut out);
        out
    }

    fn complete(&self, pool: &[usize], need: &mut [Vec<bool>], left: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(first) = need[0].iter().position(|&b| b) else {
            if left == 0 {
                let mut c = chosen.clone();
                c.sort_unstable();
                out.push(c);
            }
            return;
        };
        if left == 0 {
            return;
        }
        let matching = matches!(self.variant, SetSystemVariant::W3dm { .. });
        for &i in pool {
            let s = &self.sets[i];
            let fits = if matching {
                s[0] == first && need[1][s[1]] && need[2][s[2]]
            } else {
                s[0] == first && s.iter().all(|&x| need[0][x])
            };
            if !fits {
                continue;
            }
            let marks: Vec<(usize, usize)> = if matching {
                (0..3).map(|c| (c, s[c])).collect()
            } else {
                s.iter().map(|&x| (0, x)).collect()
            };
            for &(c, x) in &marks {
                need[c][x] = false;
            }
            chosen.push(i);
            self.complete(pool, need, left - 1, chosen, out);
            chosen.pop();
            for &(c, x) in &marks {
                need[c][x] = true;
            }
        }
    }

    /// Replaces `r ≤ max_swap` chosen sets by `r` others that cover the freed elements exactly.
    fn swap_neighbors(&self, sel: &[usize], max_swap: usize) -> BTreeSet<Selection> {
        let matching = matches!(self.variant, SetSystemVariant::W3dm { .. });
        let mut out = BTreeSet::new();
        for r in 1..=max_swap.min(sel.len()) {
            for pick in combinations(sel.len(), r) {
                let removed: Vec<usize> = pick.iter().map(|&j| sel[j]).collect();
                let kept: Vec<usize> = sel.iter().copied().filter(|i| !removed.contains(i)).collect();
                let comps = if matching { 3 } else { 1 };
                let mut need = vec![vec![false; self.ground]; comps];
                for &i in &removed {
                    for (c, &x) in self.sets[i].iter().enumerate() {
                        need[if matching { c } else { 0 }][x] = true;
                    }
                }
                let pool: Vec<usize> = (0..self.sets.len()).filter(|i| !kept.contains(i)).collect();
                for add in self.completions(&pool, &need, r) {
                    let mut next: Vec<usize> = kept.iter().chain(add.iter()).copied().collect();
                    next.sort_unstable();
                    if next != sel {
                        out.insert(next);
                    }
                }
            }
        }
        out
    }

    pub fn setsystem_neighbors(&self, sel: &[usize]) -> Vec<Selection> {
        match self.variant {
            SetSystemVariant::W3dm { p, q } => self
                .swap_neighbors(sel, p)
                .into_iter()
                .filter(|next| self.relocated(sel, next) <= q)
                .collect(),
            SetSystemVariant::X3c { k } => self.swap_neighbors(sel, k / 2).into_iter().collect(),
            SetSystemVariant::Sc { k } => {
                let mut out = Vec::new();
                for r in 1..=k.min(self.sets.len()) {
                    for toggled in combinations(self.sets.len(), r) {
                        let next = toggle(sel, &toggled);
                        if self.covers_ground(&next) {
                            out.push(next);
                        }
                    }
                }
                out
            }
            SetSystemVariant::Hs { cap, k, moves } => {
                let mut out = BTreeSet::new();
                match moves {
                    HsMoves::Toggle => {
                        for r in 1..=k.min(self.ground) {
                            for toggled in combinations(self.ground, r) {
                                let next = toggle(sel, &toggled);
                                if next.len() <= cap {
                                    out.insert(next);
                                }
                            }
                        }
                    }
                    HsMoves::Exchange => {
                        let outside: Vec<usize> = (0..self.ground).filter(|x| !sel.contains(x)).collect();
                        for r in 0..=k.min(sel.len()) {
                            for rem in combinations(sel.len(), r) {
                                for a in 0..=k.min(outside.len()) {
                                    if r + a == 0 {
                                        continue;
                                    }
                                    for add in combinations(outside.len(), a) {
                                        let toggled: Vec<usize> =
                                            rem.iter().map(|&j| sel[j]).chain(add.iter().map(|&j| outside[j])).collect();
                                        let next = toggle(sel, &toggled);
                                        if next.len() <= cap {
                                            out.insert(next);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                out.into_iter().collect()
            }
        }
    }

    pub fn stated_params(&self) -> SeparabilityParams {
        let n = self.sets.len() as u64;
        match self.variant {
            SetSystemVariant::W3dm { p, .. } => SeparabilityParams {
                lambda: (self.ground as u64).saturating_pow(6 * p as u32),
                beta: 2 * p as u64,
                mu: 1,
            },
            SetSystemVariant::X3c { k } | SetSystemVariant::Sc { k } => SeparabilityParams {
                lambda: n.saturating_pow(k as u32),
                beta: k as u64,
                mu: 3,
            },
            SetSystemVariant::Hs { k, moves, .. } => {
                let reach = match moves {
                    HsMoves::Toggle => k,
                    HsMoves::Exchange => 2 * k,
                } as u64;
                SeparabilityParams {
                    lambda: (self.ground as u64).saturating_pow(reach as u32),
                    beta: reach * self.occurrence_bound() as u64,
                    mu: 3,
                }
            }
        }
    }

    /// Pairs `(removed, added)` of triple sets that a matching move can exchange.
    fn matching_clusters(&self, p: usize, q: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        let mut out = Vec::new();
        for r in 1..=p.min(self.sets.len()) {
            for removed in combinations(self.sets.len(), r) {
                let mut need = vec![vec![false; self.ground]; 3];
                let mut disjoint = true;
                for &i in &removed {
                    for c in 0..3 {
                        disjoint &= !core::mem::replace(&mut need[c][self.sets[i][c]], true);
                    }
                }
                if !disjoint {
                    continue;
                }
                let pool: Vec<usize> = (0..self.sets.len()).filter(|i| !removed.contains(i)).collect();
                for added in self.completions(&pool, &need, r) {
                    if self.relocated(&removed, &added) <= q {
                        out.push((removed.clone(), added));
                        if out.len() > MAX_DECLARED_CLUSTERS {
                            return Err(Error::UnsupportedAtScale(format!(
                                "more than {MAX_DECLARED_CLUSTERS} transition clusters"
                            )));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn toggle(sel: &[usize], toggled: &[usize]) -> Selection {
    let mut s: BTreeSet<usize> = sel.iter().copied().collect();
    for x in toggled {
        if !s.remove(x) {
            s.insert(*x);
        }
    }
    s.into_iter().collect()
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let a: BTreeSet<usize> = a.iter().copied().collect();
    let b: BTreeSet<usize> = b.iter().copied().collect();
    a.symmetric_difference(&b).copied().collect()
}

fn matching_tag(removed: &[usize], added: &[usize]) -> ClusterTag {
    let mut t = tag(removed);
    t.push(-1);
    t.extend(tag(added));
    t
}

impl LocalProblem for SetSystemInstance {
    type Solution = Selection;

    fn sense(&self) -> Sense {
        match self.variant {
            SetSystemVariant::Sc { .. } => Sense::Min,
            _ => Sense::Max,
        }
    }

    fn objective(&self, x: &Selection) -> f64 {
        self.weight(x)
    }

    fn neighbors(&self, x: &Selection) -> Vec<Selection> {
        self.setsystem_neighbors(x)
    }

    fn solutions(&self, max_count: usize) -> Result<Vec<Selection>> {
        let universe = if self.is_hitting_set() { self.ground } else { self.sets.len() };
        if universe >= 26 {
            return Err(Error::UnsupportedAtScale(format!("2^{universe} candidate selections")));
        }
        let mut out = Vec::new();
        for mask in 0u64..(1 << universe) {
            let sel: Selection = (0..universe).filter(|&i| mask >> i & 1 == 1).collect();
            if self.is_feasible_selection(&sel) {
                if out.len() == max_count {
                    return Err(Error::UnsupportedAtScale(format!("more than {max_count} solutions")));
                }
                out.push(sel);
            }
        }
        out.sort();
        Ok(out)
    }

    fn is_feasible(&self, x: &Selection) -> bool {
        self.is_feasible_selection(x)
    }
}

impl CloEncoder for SetSystemInstance {
    fn dims(&self) -> CloDims {
        CloDims {
            nu: self.sets.len(),
            nu_bar: if self.is_hitting_set() { self.ground } else { 0 },
            m_cap: 1,
        }
    }

    fn cost_vector(&self) -> Result<CostVector> {
        if self.sets.is_empty() {
            return Err(invalid!("the encoding has no cost coordinates"));
        }
        CostVector::with_scale(self.weights.clone())
    }

    /// Membership indicators; for hitting set, hit indicators plus the element subset.
    fn encode(&self, x: &Selection) -> Configuration {
        if self.is_hitting_set() {
            let hit = self.sets_hit_by(x);
            let mut s = vec![0; self.sets.len()];
            for i in hit {
                s[i] = 1;
            }
            let mut bits = vec![false; self.ground];
            for &e in x {
                bits[e] = true;
            }
            Configuration::new(s, bits)
        } else {
            let mut s = vec![0; self.sets.len()];
            for &i in x {
                s[i] = 1;
            }
            Configuration::new(s, Vec::new())
        }
    }

    fn decode(&self, s: &Configuration) -> Option<Selection> {
        let sel: Selection = if self.is_hitting_set() {
            (0..s.noncost_part.len()).filter(|&e| s.noncost_part[e]).collect()
        } else {
            (0..s.cost_part.len()).filter(|&i| s.cost_part[i] == 1).collect()
        };
        self.is_feasible_selection(&sel).then_some(sel)
    }

    fn prescribed_covering(&self) -> Result<Covering> {
        let (transition_clusters, witnesses): (Vec<TransitionCluster>, Vec<Vec<usize>>) = match self.variant {
            SetSystemVariant::W3dm { p, q } => self
                .matching_clusters(p, q)?
                .into_iter()
                .map(|(r, a)| {
                    let mut w: Vec<usize> = r.iter().chain(a.iter()).copied().collect();
                    w.sort_unstable();
                    (TransitionCluster::Symbolic(matching_tag(&r, &a)), w)
                })
                .unzip(),
            SetSystemVariant::X3c { k } => subsets_by_size(self.sets.len(), 2, 2 * (k / 2))?
                .into_iter()
                .filter(|d| d.len() % 2 == 0)
                .map(|d| (TransitionCluster::Symbolic(tag(&d)), d))
                .unzip(),
            SetSystemVariant::Sc { k } => subsets_by_size(self.sets.len(), 1, k)?
                .into_iter()
                .map(|d| (TransitionCluster::Symbolic(tag(&d)), d))
                .unzip(),
            SetSystemVariant::Hs { k, moves, .. } => {
                let reach = if moves == HsMoves::Toggle { k } else { 2 * k };
                subsets_by_size(self.ground, 1, reach)?
                    .into_iter()
                    .map(|d| (TransitionCluster::Symbolic(tag(&d)), self.sets_hit_by(&d)))
                    .unzip()
            }
        };
        Ok(Covering {
            transition_clusters,
            coordinate_clusters: Covering::singletons(self.sets.len()),
            witnesses,
        })
    }

    fn clusters_of(&self, from: &Selection, to: &Selection) -> Vec<ClusterTag> {
        match self.variant {
            SetSystemVariant::W3dm { .. } => {
                let removed: Vec<usize> = from.iter().copied().filter(|i| !to.contains(i)).collect();
                let added: Vec<usize> = to.iter().copied().filter(|i| !from.contains(i)).collect();
                vec![matching_tag(&removed, &added)]
            }
            _ => vec![tag(&symmetric_difference(from, to))],
        }
    }
}
