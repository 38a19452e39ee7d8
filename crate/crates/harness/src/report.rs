//! The single-instance subcommands: certify, bound, run, reduce, oracle-verify.

use std::fmt;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use smoothed_clo::combinatorial::CutInstance;
use smoothed_clo::games::{coordination_bound, restrained_bounds, CostModel, RestrainedBounds};
use smoothed_clo::reductions::{
    maxcut_to_congestion, maxcut_to_maxkcut, maxcut_to_network_congestion, maxsat_to_hittingset, CongestionVariant,
    ReductionArtifact, SizeCheck,
};
use smoothed_clo::{
    certify, longest_improving_path, run, run_all_starts, iteration_bound, verify_sinks,
    BoundValue, Certificate, CloInstance, Covering, EnumBudget, Error, NeighborhoodGraph, PivotKind, PivotRule,
    SeparabilityParams, SearchTrace,
};

use crate::experiment::ORACLE_BUDGET;
use crate::instance::{InstanceFile, Problem, Session, Smoothing};

/// Certifies the prescribed covering; `None` when the instance is too large to enumerate.
pub fn certify_session(session: &Session, budget: EnumBudget) -> Result<Option<Certificate>> {
    let covering = match session.encoded.covering() {
        Ok(c) => c,
        Err(Error::UnsupportedAtScale(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    match certify(&session.encoded.instance, &covering, Some(session.encoded.resolver.as_ref()), budget) {
        Ok(c) => Ok(Some(c)),
        Err(Error::UnsupportedAtScale(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyReport {
    pub params: SeparabilityParams,
    pub edges: usize,
    pub clusters: usize,
}

impl fmt::Display for CertifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "edges checked: {}", self.edges)?;
        writeln!(f, "transition clusters: {}", self.clusters)?;
        writeln!(f, "lambda = {}", p.lambda)?;
        writeln!(f, "beta = {}", p.beta)?;
        writeln!(f, "mu = {}", p.mu)?;
        write!(f, "mu^beta * lambda = {}", p.mu_beta_lambda())
    }
}

/// Certifies `covering`, or the family's prescribed covering when `None`.
pub fn certify_report(file: &InstanceFile, covering: Option<Covering>) -> Result<CertifyReport> {
    let session = file.problem.session()?;
    let covering = match covering {
        Some(c) => c,
        None => session.encoded.covering()?,
    };
    let cert = certify(
        &session.encoded.instance,
        &covering,
        Some(session.encoded.resolver.as_ref()),
        ORACLE_BUDGET,
    )?;
    Ok(CertifyReport {
        params: cert.params,
        edges: cert.edges,
        clusters: cert.clusters.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub family: String,
    pub phi: f64,
    pub nu: usize,
    pub m_cap: u64,
    /// Certified parameters and the generic bound, when enumeration fits.
    pub certified: Option<(SeparabilityParams, BoundValue)>,
    /// Family parameters from the covering argument and the generic bound they give.
    pub stated: (SeparabilityParams, BoundValue),
    /// Congestion games: the three per-model restrained expressions.
    pub restrained: Option<RestrainedBounds>,
    pub coordination: Option<f64>,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family: {}", self.family)?;
        writeln!(f, "phi = {}  nu = {}  M = {}", self.phi, self.nu, self.m_cap)?;
        let line = |p: &SeparabilityParams, b: &BoundValue| {
            let sat = if b.saturated { " (saturated)" } else { "" };
            format!("lambda={} beta={} mu={} bound={:.6e}{sat}", p.lambda, p.beta, p.mu, b.value)
        };
        match &self.certified {
            Some((p, b)) => writeln!(f, "certified: {}", line(p, b))?,
            None => writeln!(f, "certified: unavailable at this size")?,
        }
        write!(f, "stated: {}", line(&self.stated.0, &self.stated.1))?;
        if let Some(r) = &self.restrained {
            write!(
                f,
                "\nrestrained general = {:.6e}\nrestrained polynomial = {:.6e}\nrestrained step = {:.6e}",
                r.general, r.polynomial, r.step
            )?;
        }
        if let Some(c) = self.coordination {
            write!(f, "\ncoordination = {c:.6e}")?;
        }
        Ok(())
    }
}

pub fn bound_report(file: &InstanceFile, phi: Option<f64>) -> Result<BoundReport> {
    let phi = phi.unwrap_or_else(|| file.smoothing.phi());
    let session = file.problem.session()?;
    let inst = &session.encoded.instance;
    let (nu, m_cap) = (inst.dims.nu, inst.dims.m_cap);
    let certified = match certify_session(&session, ORACLE_BUDGET)? {
        Some(c) => Some((c.params, iteration_bound(c.params, nu, m_cap, phi)?)),
        None => None,
    };
    let stated_params = file.problem.stated_params()?;
    let stated = (stated_params, iteration_bound(stated_params, nu, m_cap, phi)?);
    let game = match &file.problem {
        Problem::Congestion { instance, .. } => Some(instance.clone()),
        Problem::NetworkCongestion { instance, .. } => {
            Some(instance.to_explicit(crate::instance::MAX_NETWORK_PATHS)?.0)
        }
        _ => None,
    };
    let restrained = game.map(|g| {
        let d = match g.cost_model {
            CostModel::General { .. } => 0,
            _ => g.cost_model.max_degree(),
        };
        restrained_bounds(g.players(), g.resources, g.max_strategies(), g.restrained_bound(), d, phi)
    });
    let coordination = match &file.problem {
        Problem::NetworkCoordination { instance: g, .. } => {
            Some(coordination_bound(g.vertices, g.edges.len(), g.actions, g.max_degree(), phi))
        }
        _ => None,
    };
    Ok(BoundReport {
        family: file.problem.family().to_string(),
        phi,
        nu,
        m_cap,
        certified,
        stated,
        restrained,
        coordination,
    })
}

pub fn pivot_rule(kind: PivotKind, seed: u64) -> PivotRule {
    match kind {
        PivotKind::First => PivotRule::first(),
        PivotKind::Best => PivotRule::best(),
        PivotKind::Random => PivotRule::random(seed),
    }
}

/// The instance under nominal costs, or under one smoothed sample when `phi` is given.
pub fn costed_instance(file: &InstanceFile, session: &Session, phi: Option<f64>, seed: u64) -> Result<CloInstance> {
    let inst = &session.encoded.instance;
    match phi {
        None => Ok(inst.clone()),
        Some(phi) => {
            let model = file.smoothing.model(&inst.costs.coeffs, Some(phi), seed)?;
            Ok(inst.with_costs(model.sample())?)
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub trace: SearchTrace,
    pub terminal: String,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.trace;
        writeln!(f, "start cost: {}", t.start_cost)?;
        writeln!(f, "iterations: {}", t.iterations)?;
        writeln!(f, "status: {:?}", t.status)?;
        writeln!(f, "terminal cost: {}", t.terminal_cost())?;
        write!(f, "terminal: {}", self.terminal)
    }
}

pub fn run_report(file: &InstanceFile, pivot: PivotKind, seed: u64, phi: Option<f64>, max_iters: u64) -> Result<RunReport> {
    let session = file.problem.session()?;
    let inst = costed_instance(file, &session, phi, seed)?;
    let trace = run(&inst, &inst.start, pivot_rule(pivot, seed), inst.sense, max_iters)?;
    let terminal = session.describe(&trace.terminal);
    Ok(RunReport { trace, terminal })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Max-Cut to a congestion game with step costs.
    CongestionStep,
    /// Max-Cut to a congestion game with affine costs.
    CongestionAffine,
    /// Max-Cut to a network congestion game with step costs.
    Network,
    /// Max-Cut to Max-k-Cut.
    MaxKCut,
    /// Max-Sat with single flips to hitting set.
    HittingSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceOutcome {
    pub file: InstanceFile,
    pub size: SizeCheck,
}

fn target_smoothing(source: &Smoothing) -> Smoothing {
    Smoothing {
        density: source.density,
        support: None,
        phi: Some(source.phi()),
        coefficients: None,
    }
}

fn cut_source(file: &InstanceFile) -> Result<(CutInstance, Vec<usize>)> {
    match &file.problem {
        Problem::MaxCut { instance, start } if instance.blocks == 2 => {
            Ok((instance.clone(), start.clone().unwrap_or_else(|| vec![0; instance.vertices])))
        }
        other => bail!("this reduction needs a two-block max_cut instance, got {}", other.family()),
    }
}

/// Builds the target instance; its start is the image of the source start.
pub fn reduce(file: &InstanceFile, reduction: Reduction, k: usize) -> Result<ReduceOutcome> {
    let (problem, size) = match reduction {
        Reduction::CongestionStep | Reduction::CongestionAffine => {
            let (g, start) = cut_source(file)?;
            let variant = if reduction == Reduction::CongestionStep {
                CongestionVariant::Step
            } else {
                CongestionVariant::Affine
            };
            let r = maxcut_to_congestion(&g, variant)?;
            let start = r.forward(&start);
            (Problem::Congestion { instance: r.target.clone(), start: Some(start) }, r.size())
        }
        Reduction::Network => {
            let (g, start) = cut_source(file)?;
            let r = maxcut_to_network_congestion(&g)?;
            let start = r.forward(&start);
            (Problem::NetworkCongestion { instance: r.target.clone(), start: Some(start) }, r.size())
        }
        Reduction::MaxKCut => {
            let (g, start) = cut_source(file)?;
            let r = maxcut_to_maxkcut(&g, k)?;
            let start = r.forward(&start);
            (Problem::MaxCut { instance: r.target.clone(), start: Some(start) }, r.size())
        }
        Reduction::HittingSet => {
            let (c, start) = match &file.problem {
                Problem::MaxSat { instance, start } => {
                    (instance.clone(), start.clone().unwrap_or_else(|| vec![false; instance.variables]))
                }
                other => bail!("this reduction needs a max_sat instance, got {}", other.family()),
            };
            let r = maxsat_to_hittingset(&c)?;
            let start = r.forward(&start);
            (Problem::SetSystem { instance: r.target.clone(), start: Some(start) }, r.size())
        }
    };
    if !size.holds() {
        bail!("target size {} exceeds the promised {}", size.target, size.bound);
    }
    Ok(ReduceOutcome {
        file: InstanceFile {
            problem,
            smoothing: target_smoothing(&file.smoothing),
        },
        size,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub configurations: usize,
    pub edges: usize,
    /// Native form of each sink, in configuration order.
    pub sinks: Vec<String>,
    pub longest_path: usize,
    pub runs: usize,
    /// Engine runs that stopped off a sink or outran the longest path.
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configurations: {}", self.configurations)?;
        writeln!(f, "neighborhood edges: {}", self.edges)?;
        writeln!(f, "longest improving path: {}", self.longest_path)?;
        writeln!(f, "sinks = {}", self.sinks.len())?;
        for s in &self.sinks {
            writeln!(f, "  {s}")?;
        }
        write!(f, "engine runs: {} ({} failed)", self.runs, self.failures.len())?;
        for s in &self.failures {
            write!(f, "\n  {s}")?;
        }
        Ok(())
    }
}

/// Sinks of the transition graph equal local optima; every pivot from every
/// start ends at a sink within the longest-path length.
pub fn oracle_verify(file: &InstanceFile, phi: Option<f64>, seed: u64) -> Result<OracleReport> {
    let session = file.problem.session()?;
    let inst = costed_instance(file, &session, phi, seed)?;
    let graph = NeighborhoodGraph::build(&inst, ORACLE_BUDGET).context("oracle-verify needs an enumerable instance")?;
    let tg = graph.realize(&inst.costs, inst.sense)?;
    let sinks = verify_sinks(&tg, &inst)?;
    let longest = longest_improving_path(&tg)?;
    let sink_set: Vec<_> = sinks.iter().map(|&i| graph.nodes[i].clone()).collect();
    let mut failures = Vec::new();
    let mut runs = 0;
    for kind in [PivotKind::First, PivotKind::Best, PivotKind::Random] {
        let traces = run_all_starts(&inst, pivot_rule(kind, seed), inst.sense, longest as u64 + 1, ORACLE_BUDGET)?;
        for (start, t) in traces {
            runs += 1;
            if !sink_set.contains(&t.terminal) {
                failures.push(format!("{kind:?} from {start}: stopped at non-sink {}", t.terminal));
            } else if t.iterations > longest as u64 {
                failures.push(format!("{kind:?} from {start}: {} iterations > longest path {longest}", t.iterations));
            }
        }
    }
    Ok(OracleReport {
        configurations: graph.len(),
        edges: graph.edge_count(),
        sinks: sink_set.iter().map(|s| session.describe(s)).collect(),
        longest_path: longest,
        runs,
        failures,
    })
}
