//! Instance files: a `family` tag, the problem body under `instance`, an
//! optional `start` solution, and a `smoothing` block.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use smoothed_clo::combinatorial::{CnfInstance, CutInstance, McaInstance, SetSystemInstance, TourInstance};
use smoothed_clo::games::{CongestionGame, NetworkCongestionGame, NetworkCoordinationGame, Path as ArcPath};
use smoothed_clo::{
    encode_problem, CloEncoder, Configuration, DensityKind, Encoded, Interval, PhiDensity, SeparabilityParams,
    SmoothedCostModel,
};

/// Path enumeration cap when a network game is expanded into explicit strategies.
pub const MAX_NETWORK_PATHS: usize = 10_000;

/// Serializable form of a tour instance; the tour is the default start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourSpec {
    pub vertices: usize,
    pub directed: bool,
    pub edges: Vec<(usize, usize, f64)>,
    pub tour: Vec<usize>,
    pub k: usize,
}

impl TourSpec {
    pub fn build(&self) -> Result<TourInstance> {
        Ok(TourInstance::new(self.vertices, self.directed, self.edges.clone(), self.tour.clone(), self.k)?)
    }
}

impl From<&TourInstance> for TourSpec {
    fn from(t: &TourInstance) -> Self {
        Self {
            vertices: t.vertices(),
            directed: t.directed(),
            edges: t.edges().to_vec(),
            tour: t.tour().clone(),
            k: t.k(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Problem {
    Congestion {
        instance: CongestionGame,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
    NetworkCongestion {
        instance: NetworkCongestionGame,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<ArcPath>>,
    },
    NetworkCoordination {
        instance: NetworkCoordinationGame,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
    Tsp {
        instance: TourSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
    MaxSat {
        instance: CnfInstance,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<bool>>,
    },
    MaxCut {
        instance: CutInstance,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
    SetSystem {
        instance: SetSystemInstance,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
    Mca {
        instance: McaInstance,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<Vec<usize>>,
    },
}

/// Per-coefficient density parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub nominal: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    #[serde(default = "uniform_window")]
    pub density: DensityKind,
    /// Defaults to `[0, 1]`, or `[-1, 1]` with negative nominals, widened to hold every nominal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Interval>,
    /// Shared phi; ignored when `coefficients` is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// One entry per cost coordinate; nominals default to the encoded costs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Coefficient>>,
}

fn uniform_window() -> DensityKind {
    DensityKind::UniformWindow
}

impl Default for Smoothing {
    fn default() -> Self {
        Self {
            density: DensityKind::UniformWindow,
            support: None,
            phi: Some(1.0),
            coefficients: None,
        }
    }
}

pub fn default_support(nominals: &[f64]) -> Interval {
    let lo = nominals.iter().copied().fold(0.0, f64::min);
    let hi = nominals.iter().copied().fold(1.0, f64::max);
    let lo = if lo < 0.0 { lo.min(-1.0) } else { 0.0 };
    Interval { lo, hi }
}

impl Smoothing {
    /// The shared phi, or the largest per-coefficient phi.
    pub fn phi(&self) -> f64 {
        match &self.coefficients {
            Some(cs) => cs.iter().map(|c| c.phi).fold(0.0, f64::max),
            None => self.phi.unwrap_or(1.0),
        }
    }

    /// Densities around `costs` (or the listed nominals). `phi` overrides every density's phi.
    pub fn model(&self, costs: &[f64], phi: Option<f64>, seed: u64) -> Result<SmoothedCostModel> {
        let entries: Vec<Coefficient> = match &self.coefficients {
            Some(cs) => {
                if cs.len() != costs.len() {
                    bail!("smoothing lists {} coefficients, the encoding has {}", cs.len(), costs.len());
                }
                cs.clone()
            }
            None => costs
                .iter()
                .map(|&nominal| Coefficient { nominal, phi: self.phi() })
                .collect(),
        };
        let nominals: Vec<f64> = entries.iter().map(|c| c.nominal).collect();
        let support = self.support.unwrap_or_else(|| default_support(&nominals));
        let densities = entries
            .iter()
            .map(|c| PhiDensity::new(self.density, support, c.nominal, phi.unwrap_or(c.phi)))
            .collect::<smoothed_clo::Result<Vec<_>>>()?;
        Ok(SmoothedCostModel::new(densities, seed))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(flatten)]
    pub problem: Problem,
    #[serde(default)]
    pub smoothing: Smoothing,
}

impl InstanceFile {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            smoothing: Smoothing::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        file.problem.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// An encoded instance with a printer for native solutions.
#[derive(Clone)]
pub struct Session {
    pub encoded: Encoded,
    describe: Arc<dyn Fn(&Configuration) -> String + Send + Sync>,
}

impl Session {
    pub fn describe(&self, s: &Configuration) -> String {
        (self.describe)(s)
    }
}

fn session<P: CloEncoder>(p: P, start: P::Solution) -> Result<Session> {
    let p = Arc::new(p);
    let encoded = encode_problem(Arc::clone(&p), &start)?;
    let describe = Arc::new(move |s: &Configuration| match p.decode(s) {
        Some(x) => format!("{x:?}"),
        None => format!("undecodable {s}"),
    });
    Ok(Session { encoded, describe })
}

fn first_solution<P: CloEncoder>(p: &P) -> Result<P::Solution> {
    p.solutions(1 << 16)?
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("the instance has no feasible solution"))
}

impl Problem {
    pub fn family(&self) -> &'static str {
        match self {
            Problem::Congestion { .. } => "congestion",
            Problem::NetworkCongestion { .. } => "network_congestion",
            Problem::NetworkCoordination { .. } => "network_coordination",
            Problem::Tsp { .. } => "tsp",
            Problem::MaxSat { .. } => "max_sat",
            Problem::MaxCut { .. } => "max_cut",
            Problem::SetSystem { .. } => "set_system",
            Problem::Mca { .. } => "mca",
        }
    }

    /// Reruns the constructors' validation on deserialized data.
    pub fn check(&self) -> Result<()> {
        match self {
            Problem::Congestion { instance: g, .. } => {
                CongestionGame::new(g.resources, g.strategies.clone(), g.cost_model.clone())?;
            }
            Problem::NetworkCongestion { instance: g, .. } => {
                NetworkCongestionGame::new(g.nodes, g.arcs.clone(), g.players.clone(), g.cost_model.clone())?;
            }
            Problem::NetworkCoordination { instance: g, .. } => {
                NetworkCoordinationGame::new(g.vertices, g.actions, g.edges.clone(), g.payoffs.clone())?;
            }
            Problem::Tsp { instance, .. } => {
                instance.build()?;
            }
            Problem::MaxSat { instance: c, .. } => {
                CnfInstance::new(c.variables, c.clauses.clone(), c.k)?;
            }
            Problem::MaxCut { instance: g, .. } => {
                CutInstance::new(g.vertices, g.edges.clone(), g.blocks)?;
            }
            Problem::SetSystem { instance: s, .. } => {
                SetSystemInstance::new(s.ground, s.sets.clone(), s.weights.clone(), s.variant.clone())?;
            }
            Problem::Mca { instance: m, .. } => {
                McaInstance::new(m.variables, m.alphabet, m.constraints.clone())?;
            }
        }
        Ok(())
    }

    /// Encodes the instance from its start, or from the family's default start.
    pub fn session(&self) -> Result<Session> {
        match self {
            Problem::Congestion { instance, start } => {
                let s = start.clone().unwrap_or_else(|| vec![0; instance.players()]);
                session(instance.clone(), s)
            }
            Problem::NetworkCongestion { instance, start } => {
                let (explicit, paths) = instance.to_explicit(MAX_NETWORK_PATHS)?;
                let s = match start {
                    Some(p) => p
                        .iter()
                        .enumerate()
                        .map(|(i, path)| {
                            paths[i]
                                .iter()
                                .position(|q| q == path)
                                .ok_or_else(|| anyhow!("player {i}: {path:?} is not a simple path"))
                        })
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![0; instance.player_count()],
                };
                let p = Arc::new(explicit);
                let encoded = encode_problem(Arc::clone(&p), &s)?;
                let describe = Arc::new(move |c: &Configuration| match p.decode(c) {
                    Some(x) => {
                        let chosen: Vec<&ArcPath> = x.iter().enumerate().map(|(i, &a)| &paths[i][a]).collect();
                        format!("{chosen:?}")
                    }
                    None => format!("undecodable {c}"),
                });
                Ok(Session { encoded, describe })
            }
            Problem::NetworkCoordination { instance, start } => {
                let s = start.clone().unwrap_or_else(|| vec![0; instance.vertices]);
                session(instance.clone(), s)
            }
            Problem::Tsp { instance, start } => {
                let t = instance.build()?;
                let s = start.clone().unwrap_or_else(|| t.tour().clone());
                session(t, s)
            }
            Problem::MaxSat { instance, start } => {
                let s = start.clone().unwrap_or_else(|| vec![false; instance.variables]);
                session(instance.clone(), s)
            }
            Problem::MaxCut { instance, start } => {
                let s = start.clone().unwrap_or_else(|| vec![0; instance.vertices]);
                session(instance.clone(), s)
            }
            Problem::SetSystem { instance, start } => {
                let s = match start {
                    Some(s) => s.clone(),
                    None => first_solution(instance)?,
                };
                session(instance.clone(), s)
            }
            Problem::Mca { instance, start } => {
                let s = start.clone().unwrap_or_else(|| vec![0; instance.variables]);
                session(instance.clone(), s)
            }
        }
    }

    /// Separability parameters the family's covering argument states, without enumeration.
    pub fn stated_params(&self) -> Result<SeparabilityParams> {
        Ok(match self {
            Problem::Congestion { instance, .. } => congestion_params(instance),
            Problem::NetworkCongestion { instance, .. } => congestion_params(&instance.to_explicit(MAX_NETWORK_PATHS)?.0),
            Problem::NetworkCoordination { instance: g, .. } => {
                let k = g.actions as u64;
                SeparabilityParams {
                    lambda: g.vertices as u64 * k * (k.max(1) - 1),
                    beta: g.max_degree() as u64,
                    mu: k.pow(4),
                }
            }
            Problem::Tsp { instance, .. } => instance.build()?.stated_params(),
            Problem::MaxSat { instance, .. } => instance.stated_params(),
            Problem::MaxCut { instance, .. } => instance.stated_params(),
            Problem::SetSystem { instance, .. } => instance.stated_params(),
            Problem::Mca { instance, .. } => instance.stated_params(),
        })
    }
}

fn congestion_params(g: &CongestionGame) -> SeparabilityParams {
    let n = g.players() as u64;
    let k = g.max_strategies() as u64;
    let mu = match g.cost_model {
        smoothed_clo::games::CostModel::Step { .. } => g.cost_model.max_degree() as u64 + 1,
        _ => n,
    };
    SeparabilityParams {
        lambda: n * k * (k - 1),
        beta: g.restrained_bound() as u64,
        mu,
    }
}
