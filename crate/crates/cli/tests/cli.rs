use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudocontact"))
        .args(args)
        .env_remove("PSEUDOCONTACT_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn emit(name: &str, dir: &Path) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    let o = run(&["catalog", "emit", name, path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn catalog_list_shows_the_required_entries() {
    let o = run(&["catalog", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() >= 4);
    for name in ["standard_sasakian_n1", "standard_sasakian_n1_lorentzian", "standard_sasakian_n2_mixed", "flat_contact_r3"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn classify_prints_one_flag_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let sasakian = emit("standard_sasakian_n1", dir.path());
    let text = stdout(&run(&["classify", sasakian.to_str().unwrap()]));
    assert!(text.contains("sasakian: true"), "{text}");
    assert!(text.contains("K_contact: true"), "{text}");

    let flat = emit("flat_contact_r3", dir.path());
    let text = stdout(&run(&["classify", flat.to_str().unwrap()]));
    assert!(text.contains("contact: true"), "{text}");
    assert!(text.contains("K_contact: false"), "{text}");
    assert!(text.contains("sasakian: false"), "{text}");

    let bare = emit("minkowski_3", dir.path());
    let text = stdout(&run(&["classify", bare.to_str().unwrap()]));
    assert!(text.contains("almost_contact: not bound"), "{text}");
}

#[test]
fn sectional_suite_on_flat_contact_reports_vanishing_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let flat = emit("flat_contact_r3", dir.path());
    let o = run(&["check", flat.to_str().unwrap(), "--suite", "sectional", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["suite"], "sectional");
    let records = json["records"].as_array().unwrap();
    let k = records.iter().find(|r| r["check_id"] == "sectional.k_formula").unwrap();
    assert_eq!(k["status"], "pass");
    let theorem = records.iter().find(|r| r["check_id"] == "theorem.parallel_ell_sectional").unwrap();
    assert_eq!(theorem["status"], "pass");
    assert!(json["predicates"]["xi_sectional_zero"]["max_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit("standard_sasakian_n1", dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let expected = lines.iter().position(|l| l == "[expected]").unwrap();
    lines.truncate(expected);
    lines.push("[expected]".into());
    lines.push("sasakian = false".into());
    std::fs::write(&path, lines.join("\n")).unwrap();
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("classification.sasakian"));
}

#[test]
fn malformed_expression_exits_with_two_and_names_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit("flat_contact_r3", dir.path());
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"cos(z)/2\"", "\"cos(z)/*2\"", 1);
    std::fs::write(&path, text).unwrap();
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("[eta]") && err.contains("byte 7"), "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.toml");
    assert_eq!(run(&["catalog", "emit", "nosuch", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["check", dir.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(2));

    let path = emit("standard_sasakian_n1", dir.path());
    let p = path.to_str().unwrap();
    assert_eq!(run(&["check", p, "--tol", "nosuch=1e-3"]).status.code(), Some(2));
    assert_eq!(run(&["probe", p, "--point", "5,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["probe", p, "--point", "0,a,0"]).status.code(), Some(2));
    assert_eq!(run(&["probe", p, "--point", "0,0"]).status.code(), Some(2));
}

#[test]
fn tolerance_override_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit("flat_contact_r3", dir.path());
    let p = path.to_str().unwrap();
    assert_eq!(run(&["check", p, "--suite", "sectional"]).status.code(), Some(0));
    let o = run(&["check", p, "--suite", "identities", "--tol", "identity.nabla_xi=1e-300"]);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("identity.nabla_xi ")).unwrap();
    assert!(line.contains("1.000e-300"), "{line}");
}

#[test]
fn probe_prints_operators_at_a_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit("flat_contact_r3", dir.path());
    let o = run(&["probe", path.to_str().unwrap(), "--point", "0.1,0.2,0.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for heading in ["g\n", "Gamma^0_ij", "Ricci S_ij", "phi\n", "h\n", "nabla_xi h"] {
        assert!(text.contains(heading), "{heading}");
    }
    assert!(text.contains("max |R^l_kij| 0.00000000000000e0"));

    let bare = emit("flat_euclidean_3", dir.path());
    let text = stdout(&run(&["probe", bare.to_str().unwrap(), "--point", "0,0,0"]));
    assert!(text.contains("structure fields not bound"));
}

#[test]
fn profile_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit("standard_sasakian_n1", dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_pseudocontact"))
        .args(["check", path.to_str().unwrap(), "--suite", "axioms", "--format", "json"])
        .env("PSEUDOCONTACT_TOL", "strict")
        .output()
        .unwrap();
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["profile"], "strict");
    let o = run(&["check", path.to_str().unwrap(), "--suite", "axioms", "--format", "json", "--profile", "loose"]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["profile"], "loose");
}
