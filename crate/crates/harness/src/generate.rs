//! Seeded instance generation for every family.

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use smoothed_clo::combinatorial::HsMoves;
use smoothed_clo::gen::{self, ModelKind};
use smoothed_clo::Rng64;

use crate::instance::{InstanceFile, Problem, Smoothing, TourSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenFamily {
    CongestionGeneral,
    CongestionPolynomial,
    CongestionStep,
    NetworkCongestion,
    NetworkCoordination,
    Tsp,
    Atsp,
    MaxSat,
    MaxCut,
    MaxKCut,
    W3dm,
    X3c,
    SetCover,
    HittingSet,
    Mca,
}

/// Generator input. `size` is the family's main dimension (players, vertices,
/// variables or ground elements); `k` is the neighborhood or block parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub family: GenFamily,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_size() -> usize {
    4
}

impl GenParams {
    pub fn new(family: GenFamily, size: usize, k: Option<usize>, seed: u64) -> Self {
        Self { family, size, k, seed }
    }
}

pub fn generate(params: &GenParams, phi: f64) -> Result<InstanceFile> {
    let n = params.size;
    if n == 0 {
        bail!("size must be positive");
    }
    let mut rng = Rng64::new(params.seed);
    let congestion = |rng: &mut Rng64, kind| -> Result<Problem> {
        Ok(Problem::Congestion {
            instance: gen::congestion_game(rng, n, n + 1, 3, kind, 2)?,
            start: None,
        })
    };
    let problem = match params.family {
        GenFamily::CongestionGeneral => congestion(&mut rng, ModelKind::General)?,
        GenFamily::CongestionPolynomial => congestion(&mut rng, ModelKind::Polynomial)?,
        GenFamily::CongestionStep => congestion(&mut rng, ModelKind::Step)?,
        GenFamily::NetworkCongestion => Problem::NetworkCongestion {
            instance: gen::network_game(&mut rng, n, 3, 2, ModelKind::General, 0)?,
            start: None,
        },
        GenFamily::NetworkCoordination => Problem::NetworkCoordination {
            instance: gen::coordination_game(&mut rng, n, params.k.unwrap_or(2), 0.6)?,
            start: None,
        },
        GenFamily::Tsp | GenFamily::Atsp => {
            let directed = params.family == GenFamily::Atsp;
            let k = params.k.unwrap_or(if directed { 3 } else { 2 });
            Problem::Tsp {
                instance: TourSpec::from(&gen::tour_instance(&mut rng, n, directed, k)?),
                start: None,
            }
        }
        GenFamily::MaxSat => Problem::MaxSat {
            instance: gen::cnf(&mut rng, n, 2 * n, 3, params.k.unwrap_or(1))?,
            start: None,
        },
        GenFamily::MaxCut | GenFamily::MaxKCut => {
            let blocks = if params.family == GenFamily::MaxCut { 2 } else { params.k.unwrap_or(3) };
            Problem::MaxCut {
                instance: gen::cut_instance(&mut rng, n, 0.5, blocks, false)?,
                start: None,
            }
        }
        GenFamily::W3dm => {
            let p = params.k.unwrap_or(2);
            Problem::SetSystem {
                instance: gen::w3dm(&mut rng, n, 2 * n, p, 2 * p)?,
                start: Some((0..n).collect()),
            }
        }
        GenFamily::X3c => Problem::SetSystem {
            instance: gen::x3c(&mut rng, 3 * n, n, params.k.unwrap_or(2))?,
            start: Some((0..n).collect()),
        },
        GenFamily::SetCover => Problem::SetSystem {
            instance: gen::set_cover(&mut rng, n, n + 1, params.k.unwrap_or(2))?,
            start: None,
        },
        GenFamily::HittingSet => Problem::SetSystem {
            instance: gen::hitting_set(&mut rng, n, n, 3, params.k.unwrap_or(1), HsMoves::Toggle)?,
            start: Some(Vec::new()),
        },
        GenFamily::Mca => Problem::Mca {
            instance: gen::mca(&mut rng, n, params.k.unwrap_or(3), n, 2)?,
            start: None,
        },
    };
    Ok(InstanceFile {
        problem,
        smoothing: Smoothing {
            phi: Some(phi),
            ..Smoothing::default()
        },
    })
}
