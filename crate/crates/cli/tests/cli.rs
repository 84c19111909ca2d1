use std::process::Command;

use beckner::constants::{constant_ratio, two_point_constant, two_point_ratio, ConstantKind};
use beckner::operator_core::{diag, identity, re, unit, Superop};
use beckner::semigroup::depolarizing_generator;
use beckner_cli::config::{GeneratorSpec, MatrixJson};
use beckner_cli::emit::{emit, Format};
use beckner_cli::fixtures::{classical_embed, fixture, FIXTURE_NAMES};
use beckner_cli::{run, ConfigError, ExperimentConfig, Task};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beckner"))
}

fn quick(mut cfg: ExperimentConfig, tasks: &[Task]) -> ExperimentConfig {
    cfg.tasks = tasks.to_vec();
    cfg.p_grid = vec![1.5, 2.0];
    cfg.q_grid = vec![1.5];
    cfg.settings.constants.num_starts = 4;
    cfg.settings.transport.steps = 8;
    cfg.settings.transport.pairs = 1;
    cfg.settings.ricci.p = vec![2.0];
    cfg.settings.ricci.samples = 4;
    cfg.settings.ricci.states = 2;
    cfg.settings.ricci.steps = 8;
    cfg.materialize().unwrap()
}

/// Depolarizing generator plus amplitude damping X ↦ V†XV − ½{V†V, X}: σ = I/2 is no longer stationary.
fn corrupted() -> ExperimentConfig {
    let sigma = identity(2) * re(0.5);
    let v = unit(2, 0, 1) * re(0.3);
    let vv = v.adjoint() * &v;
    let damping = Superop::sandwich(&v.adjoint(), &v).sub(&Superop::left(&vv).add(&Superop::right(&vv)).scale(0.5));
    let broken = depolarizing_generator(&sigma, 1.0).add(&damping);
    let cfg = ExperimentConfig {
        generator: GeneratorSpec::Matrix { generator: MatrixJson::from_matrix(&broken.matrix) },
        tasks: vec![Task::Verify],
        ..Default::default()
    };
    cfg.materialize().unwrap()
}

#[test]
fn config_round_trip() {
    let mut configs: Vec<ExperimentConfig> = FIXTURE_NAMES.iter().map(|n| fixture(n).unwrap()).collect();
    configs.push(ExperimentConfig::default().materialize().unwrap());
    configs.push(corrupted());
    configs.push(classical_embed(0.3).unwrap().materialize().unwrap());
    for cfg in configs {
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), cfg.to_json());
    }
}

#[test]
fn defaults_materialized_in_echo() {
    let cfg = ExperimentConfig::from_json(r#"{"dimension": 3}"#).unwrap();
    assert_eq!(cfg.sigma.eigenvalues, vec![1.0 / 3.0; 3]);
    assert_eq!(cfg.p_grid, vec![1.05, 1.1, 1.25, 1.5, 1.75, 2.0]);
    let echoed: Value = serde_json::from_str(&cfg.to_json()).unwrap();
    for key in ["dimension", "sigma", "generator", "p_grid", "q_grid", "tolerances", "seeds", "tasks", "settings"] {
        assert!(echoed.get(key).is_some(), "{key} missing from echo");
    }
}

#[test]
fn unknown_keys_rejected() {
    for text in [
        r#"{"dimension": 2, "colour": 1}"#,
        r#"{"seeds": {"constants": 1, "extra": 2}}"#,
        r#"{"generator": {"kind": "depolarizing", "gamma": 1, "beta": 2}}"#,
        r#"{"settings": {"transport": {"stepz": 3}}}"#,
    ] {
        match ExperimentConfig::from_json(text) {
            Err(ConfigError::Parse { message, .. }) => assert!(message.contains("unknown"), "{message}"),
            other => panic!("expected parse error for {text}, got {other:?}"),
        }
    }
}

#[test]
fn parse_errors_carry_position_and_invalid_fields_carry_name() {
    match ExperimentConfig::from_json("{\n  \"dimension\": 2,\n  \"p_grid\": [1.5,\n}") {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    match ExperimentConfig::from_json(r#"{"dimension": 2, "sigma": {"eigenvalues": [0.5, 0.6]}}"#) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "sigma.eigenvalues"),
        other => panic!("{other:?}"),
    }
    match ExperimentConfig::from_json(r#"{"p_grid": [0.5]}"#) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "p_grid"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tasks_sorted_and_deduplicated() {
    let cfg = ExperimentConfig::from_json(r#"{"tasks": ["ricci", "constants", "ricci", "decay"]}"#).unwrap();
    assert_eq!(cfg.tasks, vec![Task::Constants, Task::Decay, Task::Ricci]);
}

#[test]
fn empty_task_list_echoes_config_only() {
    let cfg = ExperimentConfig::default().materialize().unwrap();
    let report = run(&cfg);
    assert_eq!(report.config, cfg);
    assert!(report.results.is_empty() && report.ledger.is_empty() && report.errors.is_empty());
    assert!(report.summary.pass);
}

#[test]
fn reports_are_deterministic() {
    let cfg = quick(fixture("depol2").unwrap(), &[Task::Constants, Task::Decay, Task::Mixing, Task::Transport, Task::Ricci, Task::Verify]);
    let a = run(&cfg);
    let b = run(&cfg);
    assert!(a.summary.pass, "{:?}", a.failures().collect::<Vec<_>>());
    assert_eq!(a.to_json_without_timings(), b.to_json_without_timings());
}

#[test]
fn every_check_lists_lhs_rhs_slack() {
    let report = run(&quick(fixture("depol3").unwrap(), &[Task::Decay, Task::Verify]));
    let v: Value = serde_json::from_str(&report.to_json()).unwrap();
    let ledger = v["ledger"].as_array().unwrap();
    assert!(!ledger.is_empty());
    for c in ledger {
        for key in ["lhs", "rhs", "slack", "property"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
}

#[test]
fn corrupted_generator_reports_not_dbc() {
    let report = run(&corrupted());
    assert!(!report.summary.pass);
    assert_eq!(report.errors.len(), 1);
    assert!(report.errors[0].message.starts_with("NotDbc"), "{}", report.errors[0].message);
}

#[test]
fn dimension_one_is_a_clean_pass_with_skips() {
    let cfg = ExperimentConfig::from_json(r#"{"dimension": 1, "tasks": ["constants", "ricci", "verify"]}"#).unwrap();
    let report = run(&cfg);
    assert!(report.summary.pass);
    assert_eq!(report.summary.skipped, 3);
    assert!(report.ledger.iter().all(|c| c.skipped));
}

#[test]
fn classical_embedding_matches_two_point_constants() {
    let mut cfg = fixture("classical_embed").unwrap();
    cfg.tasks = vec![Task::Constants];
    cfg.p_grid = vec![1.1, 1.25, 1.5, 1.75, 2.0];
    let report = run(&cfg);
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    let rows = report.results["constants"]["estimates"].as_array().unwrap();
    for row in rows.iter().filter(|r| r["kind"] == "beckner") {
        let p = row["p_or_q"].as_f64().unwrap();
        let got = row["value"].as_f64().unwrap();
        let want = two_point_constant(p, 0.5);
        assert!((got - want).abs() <= 1e-3 * want, "p={p}: {got} vs {want}");
    }
    assert!((report.results["constants"]["gap"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn classical_embedding_restricts_to_the_chain() {
    for theta in [0.2, 0.3, 0.5, 0.8] {
        let l = classical_embed(theta).unwrap().build().unwrap();
        assert!((l.gap().unwrap() - 1.0).abs() < 1e-10, "θ={theta}");
        for p in [1.25, 1.5, 1.75] {
            for k in 0..10 {
                // midpoints of a grid on (0, 1/θ), never x = 1
                let x = (k as f64 + 0.5) / (10.0 * theta);
                let y = (1.0 - theta * x) / (1.0 - theta);
                let q = constant_ratio(&l, ConstantKind::Beckner(p), &diag(&[x, y])).unwrap();
                let c = two_point_ratio(p, theta, x);
                assert!((q - c).abs() <= 1e-10 * c, "θ={theta} p={p} x={x}: {q} vs {c}");
            }
        }
    }
}

#[test]
fn fixtures_match_definitions() {
    let d2 = fixture("depol2").unwrap();
    assert_eq!(d2.dimension, 2);
    assert_eq!(d2.sigma.eigenvalues, vec![0.75, 0.25]);
    assert_eq!(d2.generator, GeneratorSpec::Depolarizing { gamma: 1.0 });
    assert_eq!(fixture("depol3").unwrap().sigma.eigenvalues, vec![1.0 / 3.0; 3]);
    assert!(matches!(fixture("nope"), Err(ConfigError::UnknownFixture(_))));
    assert!(classical_embed(1.0).is_err());
    for name in FIXTURE_NAMES {
        let cfg = fixture(name).unwrap();
        let l = cfg.build().unwrap();
        assert!((l.gap().unwrap() - 1.0).abs() < 1e-10 || name == "random_dbc_seeded", "{name}");
    }
}

#[test]
fn seeded_random_fixture_is_reproducible() {
    let cfg = fixture("random_dbc_seeded").unwrap();
    let a: Superop = cfg.build().unwrap().generator;
    let b: Superop = cfg.build().unwrap().generator;
    assert!(a.sub(&b).norm() <= 1e-12);
}

#[test]
fn emitted_tables_have_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&quick(fixture("depol2").unwrap(), &[Task::Constants, Task::Decay, Task::Mixing, Task::Transport, Task::Ricci]));
    let header = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap().lines().next().unwrap().to_string();

    emit(&report, Format::Csv, dir.path()).unwrap();
    assert_eq!(header("constants.csv"), "kind,p_or_q,value,capped,num_starts,residual");
    assert_eq!(header("decay.csv"), "p,t,F_p,bound");
    assert_eq!(header("mixing.csv"), "eps,empirical,bound");
    assert_eq!(header("transport.csv"), "pair,k,action_k");
    assert_eq!(header("ricci.csv"), "p,kappa_estimate,kappa_used,samples");
    assert_eq!(header("ledger.csv"), "task,name,property,lhs,rhs,slack,hard,pass,skipped");
    let steps = std::fs::read_to_string(dir.path().join("transport.csv")).unwrap().lines().count() - 1;
    assert_eq!(steps, report.config.settings.transport.steps);

    emit(&report, Format::Plotdata, dir.path()).unwrap();
    let plot = std::fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert!(plot.starts_with("series,x,y"));
    assert!(plot.contains("F[p=1.5]") && plot.contains("beckner,1.5,") && plot.contains("action[pair=0]"));

    emit(&report, Format::Json, dir.path()).unwrap();
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: beckner_cli::RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json(), report.to_json());
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = bin().args(["verify", "--seed", "7", "--out", out]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let cfg_path = dir.path().join("broken.json");
    std::fs::write(&cfg_path, corrupted().to_json()).unwrap();
    let bad = bin().args(["--config", cfg_path.to_str().unwrap(), "verify", "--out", out]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("NotDbc"));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, r#"{"dimension": 2, "bogus": true}"#).unwrap();
    let cfg_err = bin().args(["--config", garbage.to_str().unwrap(), "run", "--out", out]).output().unwrap();
    assert_eq!(cfg_err.status.code(), Some(2));
    assert_eq!(bin().args(["--fixture", "nope", "run"]).output().unwrap().status.code(), Some(2));

    let listed = bin().arg("fixtures").output().unwrap();
    assert_eq!(String::from_utf8_lossy(&listed.stdout).lines().collect::<Vec<_>>(), FIXTURE_NAMES);
    let shown = bin().args(["fixtures", "depol2"]).output().unwrap();
    let cfg = ExperimentConfig::from_json(&String::from_utf8_lossy(&shown.stdout)).unwrap();
    assert_eq!(cfg, fixture("depol2").unwrap());
}

#[test]
fn transport_subcommand_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = bin()
        .args(["--fixture", "depol2", "--format", "csv", "--out", out, "transport", "--p", "2", "--steps", "6", "--tol", "1e-6"])
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = std::fs::read_to_string(dir.path().join("transport.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 6 * 2);
}
