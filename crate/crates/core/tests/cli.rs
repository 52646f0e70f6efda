use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SUPOU: &str = r#""kernel": {"family": "sup_ou"},
  "levy_measure": {"family": "pareto_tail", "alpha": 1.5, "cutoff": 0},
  "dependence_measure": {"family": "gamma_density", "shape": 2, "rate": 1}"#;

const TRAWL: &str = r#""kernel": {"family": "trawl", "trawl_fn": {"form": "exp_decay", "rate": 1}},
  "levy_measure": {"family": "compound_poisson", "rate": 1, "jump_dist": {"kind": "degenerate", "value": 1}},
  "dependence_measure": {"family": "lebesgue"},
  "drift": 1"#;

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errs: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errs.is_empty(), "{schema_name}: {errs:#?}");
}

struct Ws {
    dir: tempfile::TempDir,
}

impl Ws {
    fn new() -> Self {
        Ws { dir: tempfile::tempdir().unwrap() }
    }
    fn config(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        let doc: Value = serde_json::from_str(body).unwrap();
        if !name.starts_with("bad") {
            assert_valid("run_config.schema.json", &doc);
        }
        p
    }
    fn mma(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mma")).args(args).current_dir(self.dir.path()).output().unwrap()
    }
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn check_valid_supou_exits_zero() {
    let ws = Ws::new();
    let cfg = ws.config("c.json", &format!("{{{SUPOU}}}"));
    let out = ws.mma(&["check", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["conclusion"], "CadlagModificationExists");
    assert_valid("classification.schema.json", &doc);
}

#[test]
fn check_writes_out_file() {
    let ws = Ws::new();
    let cfg = ws.config("c.json", &format!("{{{SUPOU}, \"check\": {{\"alpha\": 2, \"epsilon\": 0.5}}}}"));
    let out = ws.mma(&["check", cfg.to_str().unwrap(), "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&std::fs::read(ws.path("report.json")).unwrap()).unwrap();
    assert_valid("classification.schema.json", &doc);
}

#[test]
fn invalid_parameter_exits_one() {
    let ws = Ws::new();
    let cfg = ws.config("bad.json", &format!("{{{}}}", SUPOU.replace("\"rate\": 1", "\"rate\": -1")));
    let out = ws.mma(&["check", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_fields_are_rejected_by_binary_and_schema() {
    let ws = Ws::new();
    let body = format!("{{{SUPOU}, \"seeds\": 3}}");
    let cfg = ws.config("bad_field.json", &body);
    assert_eq!(ws.mma(&["check", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert!(!schema("run_config.schema.json").is_valid(&serde_json::from_str(&body).unwrap()));
}

#[test]
fn starved_quadrature_is_indeterminate() {
    let ws = Ws::new();
    let cfg = ws.config("c.json", &format!("{{{SUPOU}, \"check\": {{\"quad\": {{\"max_evals\": 1}}}}}}"));
    let out = ws.mma(&["check", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["conclusion"], "Indeterminate");
}

#[test]
fn unwritable_out_exits_one() {
    let ws = Ws::new();
    let cfg = ws.config("s.json", &format!("{{{SUPOU}, \"simulate\": {{\"grid\": {{\"t0\": 0, \"t1\": 1, \"n\": 11}}, \"trunc\": {{\"small_jump_eps\": 0.1}}, \"seed\": 1}}}}"));
    let out = ws.mma(&["simulate", cfg.to_str().unwrap(), "--out", "missing_dir/path.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_needs_a_destination() {
    let ws = Ws::new();
    let cfg = ws.config("s.json", &format!("{{{SUPOU}, \"simulate\": {{\"grid\": {{\"t0\": 0, \"t1\": 1, \"n\": 11}}, \"seed\": 1}}}}"));
    assert_eq!(ws.mma(&["simulate", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn unknown_experiment_exits_one() {
    let ws = Ws::new();
    let cfg = ws.config("bad_exp.json", &format!("{{{SUPOU}, \"diagnose\": {{\"experiment\": \"spectral_density\", \"seed\": 1}}}}"));
    assert_eq!(ws.mma(&["diagnose", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn sup_divergence_refuses_cadlag_regime() {
    let ws = Ws::new();
    let body = format!(
        "{{{SUPOU}, \"diagnose\": {{\"experiment\": \"sup_divergence\", \"seed\": 1, \"replicas\": 5, \"ladder\": [10, 100], \"trunc\": {{\"small_jump_eps\": 0.2, \"past_window\": 10}}}}}}"
    );
    let cfg = ws.config("d.json", &body);
    let out = ws.mma(&["diagnose", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("regime mismatch"));

    let forced = ws.mma(&["diagnose", cfg.to_str().unwrap(), "--force"]);
    assert_eq!(forced.status.code(), Some(0));
    let doc = json(&forced);
    assert_valid("sup_divergence.schema.json", &doc);
    assert_eq!(doc["regime"], "Indeterminate");
}

#[test]
fn trawl_summary_mean_is_one() {
    let ws = Ws::new();
    let cfg = ws.config("t.json", &format!("{{{TRAWL}, \"simulate\": {{\"grid\": {{\"t0\": 0, \"t1\": 50, \"n\": 51}}, \"seed\": 3, \"replicas\": 200}}}}"));
    let out = ws.mma(&["simulate", cfg.to_str().unwrap(), "--summary", "--out", "trawl.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_valid("simulation_summary.schema.json", &doc);
    let (m, se) = (doc["mean"].as_f64().unwrap(), doc["stderr"].as_f64().unwrap());
    assert!((m - 1.0).abs() < 4.0 * se, "{m} ± {se}");

    let csv = std::fs::read_to_string(ws.path("trawl.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,x1,x2"));
    assert_eq!(lines.count(), 51);
    let meta: Value = serde_json::from_slice(&std::fs::read(ws.path("trawl.json")).unwrap()).unwrap();
    assert_valid("path_meta.schema.json", &meta);
    assert_eq!(meta["seed"], 3);
}

#[test]
fn seed_flag_overrides_config() {
    let ws = Ws::new();
    let cfg = ws.config("s.json", &format!("{{{TRAWL}, \"simulate\": {{\"grid\": {{\"t0\": 0, \"t1\": 5, \"n\": 6}}, \"seed\": 3, \"replicas\": 4}}}}"));
    let a = json(&ws.mma(&["simulate", cfg.to_str().unwrap(), "--summary"]));
    let b = json(&ws.mma(&["simulate", cfg.to_str().unwrap(), "--summary", "--seed", "4"]));
    assert_eq!(a["seed"], 3);
    assert_eq!(b["seed"], 4);
    assert_ne!(a["mean"], b["mean"]);
}

#[test]
fn scaling_and_holder_outputs_match_schemas() {
    let ws = Ws::new();
    let tail = format!(
        "{{{SUPOU}, \"diagnose\": {{\"experiment\": \"increment_tail_scaling\", \"seed\": 2, \"replicas\": 200, \"y\": 0.1, \"t_grid\": [0.5, 0.25, 0.125], \"bootstrap\": 50, \"trunc\": {{\"small_jump_eps\": 0.05, \"past_window\": 10, \"gaussian_refine\": true}}}}}}"
    );
    let out = ws.mma(&["diagnose", ws.config("tail.json", &tail).to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    assert_valid("scaling_fit.schema.json", &json(&out));

    let moment = tail.replace("increment_tail_scaling", "moment_scaling").replace("\"y\": 0.1, ", "");
    let out = ws.mma(&["diagnose", ws.config("moment.json", &moment).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_valid("scaling_fit.schema.json", &json(&out));

    let holder = format!(
        "{{{SUPOU}, \"diagnose\": {{\"experiment\": \"holder_estimate\", \"seed\": 2, \"grid\": {{\"t0\": 0, \"t1\": 1, \"n\": 513}}, \"trunc\": {{\"small_jump_eps\": 0.1, \"past_window\": 10}}}}}}"
    );
    let out = ws.mma(&["diagnose", ws.config("holder.json", &holder).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_valid("holder_estimate.schema.json", &json(&out));
}

#[test]
fn nonexistent_process_refuses_to_simulate() {
    let ws = Ws::new();
    let body = format!(
        "{{{}, \"simulate\": {{\"grid\": {{\"t0\": 0, \"t1\": 1, \"n\": 5}}, \"seed\": 1}}}}",
        SUPOU.replace(r#"{"family": "gamma_density", "shape": 2, "rate": 1}"#, r#"{"family": "exp_density", "rate": 1}"#)
    );
    let cfg = ws.config("s.json", &body);
    let out = ws.mma(&["simulate", cfg.to_str().unwrap(), "--summary"]);
    assert_eq!(out.status.code(), Some(2));
}
