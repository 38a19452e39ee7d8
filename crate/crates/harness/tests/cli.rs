use std::path::Path;
use std::process::Command;

use clap::ValueEnum;
use smoothed_clo::combinatorial::CutInstance;
use smoothed_clo::{Covering, EnumBudget, NeighborhoodGraph, PivotKind, Transition};
use smoothed_clo_harness::experiment::{read_csv, CSV_COLUMNS};
use smoothed_clo_harness::instance::{Coefficient, InstanceFile, Problem};
use smoothed_clo_harness::report::{bound_report, oracle_verify, reduce, Reduction};
use smoothed_clo_harness::{generate, run_experiment, ExperimentSpec, GenFamily, GenParams, InstanceSource, Mode};

fn clolab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_clolab")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn path_cut() -> InstanceFile {
    InstanceFile::new(Problem::MaxCut {
        instance: CutInstance::new(3, vec![(0, 1, 0.5), (1, 2, 0.25)], 2).unwrap(),
        start: None,
    })
}

#[test]
fn every_generated_family_round_trips() {
    for family in GenFamily::value_variants() {
        let file = generate(&GenParams::new(*family, 4, None, 11), 2.0).unwrap();
        let back = InstanceFile::parse(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file, "{family:?}");
    }
}

#[test]
fn reduction_outputs_round_trip() {
    let src = path_cut();
    for reduction in Reduction::value_variants() {
        if *reduction == Reduction::HittingSet {
            continue;
        }
        let out = reduce(&src, *reduction, 3).unwrap();
        let back = InstanceFile::parse(&out.file.to_json().unwrap()).unwrap();
        assert_eq!(back, out.file, "{reduction:?}");
        back.problem.session().unwrap();
    }
    let sat = generate(&GenParams::new(GenFamily::MaxSat, 3, None, 2), 1.0).unwrap();
    let out = reduce(&sat, Reduction::HittingSet, 0).unwrap();
    assert_eq!(InstanceFile::parse(&out.file.to_json().unwrap()).unwrap(), out.file);
}

#[test]
fn per_coefficient_smoothing_round_trips() {
    let mut file = path_cut();
    let nu = file.problem.session().unwrap().encoded.instance.dims.nu;
    file.smoothing.phi = None;
    file.smoothing.coefficients = Some((0..nu).map(|i| Coefficient { nominal: 0.25 * (i % 2) as f64, phi: 2.0 }).collect());
    let back = InstanceFile::parse(&file.to_json().unwrap()).unwrap();
    assert_eq!(back, file);
    let model = back.smoothing.model(&[0.0; 0], None, 1);
    assert!(model.is_err(), "coefficient count must match the encoding");
}

#[test]
fn malformed_files_report_a_location() {
    let err = InstanceFile::parse("{\n  \"family\": \"max_cut\",\n  \"instance\": {\"vertices\": 2,,}\n}").unwrap_err();
    assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    let err = InstanceFile::parse(r#"{"family": "max_cut", "instance": {"vertices": 2, "edges": [[0, 5, 1.0]], "blocks": 2}}"#)
        .unwrap_err();
    assert!(format!("{err:#}").contains("not a proper edge") || format!("{err:#}").contains("5"), "{err:#}");
}

#[test]
fn experiment_rows_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cut.json");
    generate(&GenParams::new(GenFamily::MaxCut, 6, None, 5), 2.0).unwrap().save(&inst).unwrap();
    let spec = |out: &str| ExperimentSpec {
        source: InstanceSource::File(inst.clone()),
        phi: vec![],
        sizes: vec![],
        pivots: vec![PivotKind::Random],
        replicas: 2,
        seed: 42,
        mode: Mode::Engine,
        out: dir.path().join(out),
    };
    let strip = |rows: Vec<smoothed_clo_harness::ReplicaRow>| -> Vec<(usize, u64, u64, f64)> {
        rows.into_iter().map(|r| (r.replica, r.seed, r.iterations, r.terminal_cost)).collect()
    };
    let a = run_experiment(&spec("a.csv")).unwrap();
    let b = run_experiment(&spec("b.csv")).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a[0].rows.len(), 2);
    assert_eq!(strip(a[0].rows.clone()), strip(b[0].rows.clone()));
    assert!(a[0].bound.is_some());

    let out = dir.path().join("cli.csv");
    for _ in 0..2 {
        let (code, stdout, stderr) = clolab(&[
            "experiment", "--instance", path_str(&inst), "--replicas", "2", "--seed", "42", "--pivot", "random",
            "--out", path_str(&out),
        ]);
        assert_eq!(code, 0, "{stdout}{stderr}");
    }
    let header = std::fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, CSV_COLUMNS.join(","));
    assert_eq!(strip(read_csv(&out).unwrap()), strip(a[0].rows.clone()));
}

#[test]
fn oracle_mode_and_phi_sweep_write_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, stdout, stderr) = clolab(&[
        "experiment", "--family", "max-cut", "--size", "3,4", "--phi", "1,2", "--replicas", "3", "--mode", "oracle",
        "--out", path_str(&out),
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    for name in ["sweep-phi1-n3.csv", "sweep-phi2-n4.csv", "sweep-phi.svg", "sweep-n.svg"] {
        assert!(dir.path().join(name).exists(), "{name} missing; {stdout}");
    }
    let svg = std::fs::read_to_string(dir.path().join("sweep-phi.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 12);
}

#[test]
fn oracle_verify_finds_the_two_complementary_cuts() {
    let report = oracle_verify(&path_cut(), None, 0).unwrap();
    assert_eq!(report.configurations, 8);
    assert_eq!(report.sinks, ["[0, 1, 0]", "[1, 0, 1]"]);
    assert!(report.pass());
    assert_eq!(report.runs, 24);

    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("path.json");
    path_cut().save(&inst).unwrap();
    let (code, stdout, _) = clolab(&["oracle-verify", "--instance", path_str(&inst)]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sinks = 2"), "{stdout}");
}

fn restrained_oracle(n: f64, m: f64, k: f64, b: f64, d: f64, phi: f64) -> [f64; 3] {
    let lambda = n * k * (k - 1.0);
    let nd = n.powf(d + 1.0);
    [
        3.0 * n.powf(b) * lambda * (m * n).powi(2) * phi,
        3.0 * n.powf(b) * lambda * (m * (d + 1.0)).powi(2) * nd * nd.log2() * phi,
        3.0 * (d + 1.0).powf(b) * lambda * (m * d).powi(2) * n * n.log2() * phi,
    ]
}

#[test]
fn bound_prints_the_restrained_expressions_for_a_ten_restrained_game() {
    let edges: Vec<(usize, usize, f64)> = (0..6)
        .flat_map(|u| (u + 1..6).map(move |v| (u, v, ((u + v) % 4) as f64 / 4.0)))
        .collect();
    let src = InstanceFile::new(Problem::MaxCut { instance: CutInstance::new(6, edges, 2).unwrap(), start: None });
    let game = reduce(&src, Reduction::CongestionStep, 0).unwrap().file;
    let Problem::Congestion { instance: g, .. } = &game.problem else { panic!() };
    assert_eq!(g.restrained_bound(), 10);

    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("game.json");
    game.save(&inst).unwrap();
    let (code, stdout, stderr) = clolab(&["bound", "--instance", path_str(&inst), "--phi", "2"]);
    assert_eq!(code, 0, "{stderr}");
    let expected = restrained_oracle(6.0, 30.0, 2.0, 10.0, 1.0, 2.0);
    for (name, want) in ["general", "polynomial", "step"].iter().zip(expected) {
        let line = stdout
            .lines()
            .find(|l| l.starts_with(&format!("restrained {name} = ")))
            .unwrap_or_else(|| panic!("no {name} line in {stdout}"));
        let got: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!((got - want).abs() <= 1e-6 * want, "{name}: {got} vs {want}");
    }
    let report = bound_report(&game, Some(2.0)).unwrap();
    let (params, _) = report.certified.unwrap();
    assert!(params.beta <= 10 && params.mu <= 2);
}

#[test]
fn certify_checks_an_attached_covering() {
    let file = path_cut();
    let inst = file.problem.session().unwrap().encoded.instance;
    let graph = NeighborhoodGraph::build(&inst, EnumBudget::default()).unwrap();
    let all: Vec<Transition> = graph
        .edges()
        .map(|(a, b)| Transition::new(graph.nodes[a].clone(), graph.nodes[b].clone()))
        .collect();
    let covering = Covering::coarsest(all, inst.dims.nu);

    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("cut.json");
    let cov_path = dir.path().join("covering.json");
    file.save(&inst_path).unwrap();
    std::fs::write(&cov_path, serde_json::to_string(&covering).unwrap()).unwrap();
    let (code, stdout, stderr) = clolab(&["certify", "--instance", path_str(&inst_path), "--covering", path_str(&cov_path)]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("lambda = 1\n"), "{stdout}");
    assert!(stdout.contains("beta = 1\n"), "{stdout}");

    let (code, stdout, _) = clolab(&["certify", "--instance", path_str(&inst_path)]);
    assert_eq!(code, 0);
    assert!(stdout.contains("mu = 2"), "{stdout}");
}

#[test]
fn gen_run_and_reduce_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cut = dir.path().join("cut.json");
    let (code, _, stderr) = clolab(&["gen", "--family", "max-cut", "--size", "4", "--seed", "3", "--out", path_str(&cut)]);
    assert_eq!(code, 0, "{stderr}");
    let (code, stdout, _) = clolab(&["run", "--instance", path_str(&cut), "--pivot", "best", "--phi", "2", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("status: Converged"), "{stdout}");
    let net = dir.path().join("net.json");
    let (code, stdout, stderr) =
        clolab(&["reduce", "--instance", path_str(&cut), "--reduction", "network", "--out", path_str(&net)]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("network_congestion"), "{stdout}");
    assert_eq!(InstanceFile::load(&net).unwrap().problem.family(), "network_congestion");
}

#[test]
fn errors_exit_with_one() {
    let (code, _, stderr) = clolab(&["bound", "--instance", "/nonexistent/file.json"]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error:"), "{stderr}");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"family\": \"nope\"}").unwrap();
    let (code, _, stderr) = clolab(&["run", "--instance", path_str(&bad)]);
    assert_eq!(code, 1);
    assert!(stderr.contains("bad.json"), "{stderr}");
}
