//! Monte Carlo experiments over smoothed cost samples.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smoothed_clo::{
    derive_seed, longest_improving_path, run, iteration_bound, Certificate, CloInstance, EnumBudget, NeighborhoodGraph,
    PivotKind, PivotRule, SmoothedCostModel,
};

use crate::generate::{generate, GenParams};
use crate::instance::{InstanceFile, Session};
use crate::plot::{Plot, Series};
use crate::report::certify_session;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 5] = ["replica", "seed", "iterations", "terminal_cost", "wall_ms"];

/// Enumeration limits for certification and oracle runs.
pub const ORACLE_BUDGET: EnumBudget = EnumBudget {
    max_nodes: 200_000,
    max_edge_checks: 20_000_000,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    File(PathBuf),
    Generate(GenParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Iterations of one local search run per sample.
    #[default]
    Engine,
    /// Longest improving path of the sample's transition graph.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub source: InstanceSource,
    /// Phi values to sweep; empty means the instance's own smoothing block.
    #[serde(default)]
    pub phi: Vec<f64>,
    /// Generator sizes to sweep; empty means the generator's `size`.
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_pivots")]
    pub pivots: Vec<PivotKind>,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    pub out: PathBuf,
}

fn default_pivots() -> Vec<PivotKind> {
    vec![PivotKind::First]
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            bail!("replicas must be at least 1");
        }
        if self.pivots.is_empty() {
            bail!("at least one pivot rule is needed");
        }
        if let Some(phi) = self.phi.iter().find(|p| !(**p > 0.0)) {
            bail!("phi must be positive, got {phi}");
        }
        if !self.sizes.is_empty() && matches!(self.source, InstanceSource::File(_)) {
            bail!("size sweeps need a generated instance source");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub replica: usize,
    pub seed: u64,
    pub iterations: u64,
    pub terminal_cost: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub family: String,
    /// `None` in oracle mode.
    pub pivot: Option<PivotKind>,
    pub phi: f64,
    pub size: Option<usize>,
    pub rows: Vec<ReplicaRow>,
    pub mean: f64,
    pub stderr: f64,
    /// Certified iteration bound; present iff the prescribed covering certified.
    pub bound: Option<f64>,
    pub pass: bool,
}

impl ExperimentResult {
    pub fn iterations(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.iterations).collect()
    }
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn rule_for(kind: PivotKind, seed: u64) -> PivotRule {
    match kind {
        PivotKind::First => PivotRule::first(),
        PivotKind::Best => PivotRule::best(),
        PivotKind::Random => PivotRule::random(derive_seed(seed, u64::MAX)),
    }
}

/// One replica: a cost sample from `model` reseeded with `seed`.
pub fn replica(
    base: &CloInstance,
    model: &SmoothedCostModel,
    graph: Option<&NeighborhoodGraph>,
    pivot: PivotKind,
    replica: usize,
    seed: u64,
) -> Result<ReplicaRow> {
    let t0 = Instant::now();
    let costs = model.with_seed(seed).sample();
    let (iterations, terminal_cost) = match graph {
        None => {
            let inst = base.with_costs(costs)?;
            let cap = smoothed_clo::engine::default_max_iters(&inst, None);
            let trace = run(&inst, &inst.start, rule_for(pivot, seed), inst.sense, cap)?;
            (trace.iterations, trace.terminal_cost())
        }
        Some(graph) => {
            let tg = graph.realize(&costs, base.sense)?;
            let longest = longest_improving_path(&tg)? as u64;
            let best = tg
                .sinks()
                .iter()
                .map(|&i| costs.dot(&graph.nodes[i]))
                .reduce(|a, b| if base.sense.improvement(a, b) > 0.0 { b } else { a })
                .unwrap_or(f64::NAN);
            (longest, best)
        }
    };
    Ok(ReplicaRow {
        replica,
        seed,
        iterations,
        terminal_cost,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

struct Prepared {
    file: InstanceFile,
    session: Session,
    certificate: Option<Certificate>,
    graph: Option<NeighborhoodGraph>,
}

fn prepare(spec: &ExperimentSpec, size: Option<usize>) -> Result<Prepared> {
    let file = match (&spec.source, size) {
        (InstanceSource::File(path), _) => InstanceFile::load(path)?,
        (InstanceSource::Generate(params), size) => {
            let params = GenParams {
                size: size.unwrap_or(params.size),
                ..params.clone()
            };
            generate(&params, 1.0)?
        }
    };
    let session = file.problem.session()?;
    let certificate = certify_session(&session, ORACLE_BUDGET)?;
    let graph = match spec.mode {
        Mode::Engine => None,
        Mode::Oracle => Some(
            NeighborhoodGraph::build(&session.encoded.instance, ORACLE_BUDGET)
                .context("oracle mode needs an enumerable instance")?,
        ),
    };
    Ok(Prepared {
        file,
        session,
        certificate,
        graph,
    })
}

/// Runs every (size, phi, pivot) cell. Replicas run in parallel and are
/// reported in replica order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentResult>> {
    spec.validate()?;
    let sizes: Vec<Option<usize>> = if spec.sizes.is_empty() {
        vec![None]
    } else {
        spec.sizes.iter().copied().map(Some).collect()
    };
    let pivots: Vec<Option<PivotKind>> = match spec.mode {
        Mode::Engine => spec.pivots.iter().copied().map(Some).collect(),
        Mode::Oracle => vec![None],
    };
    let mut out = Vec::new();
    for size in sizes {
        let prep = prepare(spec, size)?;
        let base = &prep.session.encoded.instance;
        let phis: Vec<Option<f64>> = if spec.phi.is_empty() {
            vec![None]
        } else {
            spec.phi.iter().copied().map(Some).collect()
        };
        for phi in phis {
            let model = prep.file.smoothing.model(&base.costs.coeffs, phi, spec.seed)?;
            let phi = model.max_phi();
            let bound = match &prep.certificate {
                Some(c) => Some(iteration_bound(c.params, base.dims.nu, base.dims.m_cap, phi)?.value),
                None => None,
            };
            for &pivot in &pivots {
                let rows = (0..spec.replicas)
                    .into_par_iter()
                    .map(|r| {
                        let seed = derive_seed(spec.seed, r as u64);
                        replica(base, &model, prep.graph.as_ref(), pivot.unwrap_or(PivotKind::First), r, seed)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let xs: Vec<f64> = rows.iter().map(|r| r.iterations as f64).collect();
                let (mean, stderr) = mean_and_stderr(&xs);
                out.push(ExperimentResult {
                    family: prep.file.problem.family().to_string(),
                    pivot,
                    phi,
                    size,
                    rows,
                    mean,
                    stderr,
                    bound,
                    pass: bound.is_none_or(|b| mean <= b),
                });
            }
        }
    }
    Ok(out)
}

fn pivot_name(p: Option<PivotKind>) -> &'static str {
    match p {
        Some(PivotKind::First) => "first",
        Some(PivotKind::Best) => "best",
        Some(PivotKind::Random) => "random",
        None => "oracle",
    }
}

fn sibling(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// CSV path of each result: `out` itself for a single cell, else `out`'s stem
/// plus the swept dimensions.
pub fn csv_paths(spec: &ExperimentSpec, results: &[ExperimentResult]) -> Vec<PathBuf> {
    if results.len() == 1 {
        return vec![spec.out.clone()];
    }
    let many_pivots = spec.mode == Mode::Engine && spec.pivots.len() > 1;
    results
        .iter()
        .map(|r| {
            let mut suffix = String::new();
            if many_pivots {
                suffix += &format!("-{}", pivot_name(r.pivot));
            }
            if spec.phi.len() > 1 {
                suffix += &format!("-phi{}", r.phi);
            }
            if let Some(n) = r.size.filter(|_| spec.sizes.len() > 1) {
                suffix += &format!("-n{n}");
            }
            sibling(&spec.out, &suffix, "csv")
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[ReplicaRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ReplicaRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Iterations against `x`, one series per `key`.
fn sweep_plot(
    results: &[ExperimentResult],
    x: impl Fn(&ExperimentResult) -> f64,
    key: impl Fn(&ExperimentResult) -> String,
    title: &str,
    x_label: &str,
) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for r in results {
        let name = key(r);
        let idx = match series.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                series.push(Series {
                    name,
                    ..Series::default()
                });
                series.len() - 1
            }
        };
        let s = &mut series[idx];
        s.points.extend(r.rows.iter().map(|row| (x(r), row.iterations as f64)));
        s.means.push((x(r), r.mean));
    }
    Plot {
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: "iterations".to_string(),
        series,
    }
}

/// Writes the CSVs, plus `<stem>-phi.svg` / `<stem>-n.svg` for sweeps. Returns every path written.
pub fn write_outputs(spec: &ExperimentSpec, results: &[ExperimentResult]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (path, r) in csv_paths(spec, results).into_iter().zip(results) {
        write_csv(&path, &r.rows)?;
        written.push(path);
    }
    let family = results.first().map(|r| r.family.clone()).unwrap_or_default();
    if spec.phi.len() > 1 {
        let plot = sweep_plot(
            results,
            |r| r.phi,
            |r| match r.size {
                Some(n) => format!("{} n={n}", pivot_name(r.pivot)),
                None => pivot_name(r.pivot).to_string(),
            },
            &format!("{family}: iterations vs phi"),
            "phi",
        );
        let path = sibling(&spec.out, "-phi", "svg");
        std::fs::write(&path, plot.to_svg())?;
        written.push(path);
    }
    if spec.sizes.len() > 1 {
        let plot = sweep_plot(
            results,
            |r| r.size.unwrap_or(0) as f64,
            |r| format!("{} phi={}", pivot_name(r.pivot), r.phi),
            &format!("{family}: iterations vs n"),
            "n",
        );
        let path = sibling(&spec.out, "-n", "svg");
        std::fs::write(&path, plot.to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_sample_is_zero() {
        assert_eq!(mean_and_stderr(&[3.0, 3.0, 3.0]), (3.0, 0.0));
        assert_eq!(mean_and_stderr(&[5.0]), (5.0, 0.0));
        let (m, s) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spec_rejects_zero_replicas() {
        let spec = ExperimentSpec {
            source: InstanceSource::File("x.json".into()),
            phi: vec![],
            sizes: vec![],
            pivots: default_pivots(),
            replicas: 0,
            seed: 0,
            mode: Mode::Engine,
            out: "x.csv".into(),
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_outputs_are_named_by_cell() {
        let spec = ExperimentSpec {
            source: InstanceSource::Generate(GenParams::new(crate::generate::GenFamily::MaxCut, 4, None, 1)),
            phi: vec![1.0, 2.0],
            sizes: vec![],
            pivots: vec![PivotKind::First, PivotKind::Best],
            replicas: 1,
            seed: 0,
            mode: Mode::Engine,
            out: "dir/run.csv".into(),
        };
        let results = run_experiment(&spec).unwrap();
        let names: Vec<String> = csv_paths(&spec, &results).iter().map(|p| p.display().to_string()).collect();
        assert_eq!(names, ["dir/run-first-phi1.csv", "dir/run-best-phi1.csv", "dir/run-first-phi2.csv", "dir/run-best-phi2.csv"]);
    }
}
