#![allow(dead_code)]

use std::sync::Arc;

use smoothed_clo::combinatorial::{CutInstance, HsMoves, SetSystemInstance, SetSystemVariant};
use smoothed_clo::gen::{self, ModelKind};
use smoothed_clo::{certify, encode_problem, Certificate, CloEncoder, Encoded, EnumBudget, Result, Rng64};

pub fn encode<P: CloEncoder>(p: &Arc<P>, start: &P::Solution) -> Encoded {
    encode_problem(Arc::clone(p), start).expect("encodable desk instance")
}

pub fn certify_encoded(enc: &Encoded) -> Result<Certificate> {
    certify(&enc.instance, &enc.covering()?, Some(enc.resolver.as_ref()), EnumBudget::default())
}

/// A start selection for any set-system variant: empty, the planted cover, or all sets.
pub fn setsystem_start(s: &SetSystemInstance) -> Vec<usize> {
    match s.variant {
        SetSystemVariant::W3dm { .. } => (0..s.ground).collect(),
        SetSystemVariant::Hs { .. } => Vec::new(),
        SetSystemVariant::X3c { .. } => (0..s.ground / 3).collect(),
        SetSystemVariant::Sc { .. } => (0..s.sets.len()).collect(),
    }
}

/// A named desk instance of some family, already encoded.
pub struct Desk {
    pub family: &'static str,
    pub enc: Encoded,
}

fn desk<P: CloEncoder>(family: &'static str, p: P, start: P::Solution) -> Desk {
    let p = Arc::new(p);
    Desk {
        family,
        enc: encode(&p, &start),
    }
}

/// Small instances of every encoded family, drawn from `rng`.
pub fn desk_instances(rng: &mut Rng64) -> Vec<Desk> {
    let mut out = Vec::new();
    for (name, kind) in [
        ("congestion/general", ModelKind::General),
        ("congestion/polynomial", ModelKind::Polynomial),
        ("congestion/step", ModelKind::Step),
    ] {
        let g = gen::congestion_game(rng, 3, 3, 3, kind, 2).unwrap();
        let start = vec![0; 3];
        out.push(desk(name, g, start));
    }
    let net = gen::network_game(rng, 2, 2, 2, ModelKind::General, 0).unwrap();
    let (explicit, _) = net.to_explicit(100).unwrap();
    out.push(desk("network congestion", explicit, vec![0; 2]));
    out.push(desk("network coordination", gen::coordination_game(rng, 4, 2, 0.6).unwrap(), vec![0; 4]));
    out.push(desk("tsp/2-opt", gen::tour_instance(rng, 6, false, 2).unwrap(), (0..6).collect()));
    out.push(desk("tsp/3-opt", gen::tour_instance(rng, 6, false, 3).unwrap(), (0..6).collect()));
    out.push(desk("atsp/3-opt", gen::tour_instance(rng, 5, true, 3).unwrap(), (0..5).collect()));
    out.push(desk("maxsat/1-flip", gen::cnf(rng, 4, 5, 3, 1).unwrap(), vec![false; 4]));
    out.push(desk("maxsat/2-flip", gen::cnf(rng, 4, 5, 3, 2).unwrap(), vec![false; 4]));
    out.push(desk("max-cut", gen::cut_instance(rng, 5, 0.6, 2, true).unwrap(), vec![0; 5]));
    out.push(desk("max-3-cut", gen::cut_instance(rng, 4, 0.6, 3, true).unwrap(), vec![0; 4]));
    let w = gen::w3dm(rng, 3, 8, 2, 4).unwrap();
    let start = setsystem_start(&w);
    out.push(desk("w3dm", w, start));
    let x = gen::x3c(rng, 6, 4, 2).unwrap();
    let start = setsystem_start(&x);
    out.push(desk("x3c", x, start));
    let s = gen::set_cover(rng, 4, 5, 2).unwrap();
    let start = setsystem_start(&s);
    out.push(desk("set cover", s, start));
    out.push(desk("hitting set", gen::hitting_set(rng, 5, 5, 3, 1, HsMoves::Toggle).unwrap(), Vec::new()));
    out.push(desk("mca", gen::mca(rng, 3, 3, 3, 2).unwrap(), vec![0; 3]));
    out
}

/// Dyadic weights in [0, 1] on the given edges.
pub fn weighted(rng: &mut Rng64, n: usize, edges: &[(usize, usize)]) -> CutInstance {
    let edges = edges.iter().map(|&(u, v)| (u, v, rng.dyadic(3))).collect();
    CutInstance::new(n, edges, 2).unwrap()
}
