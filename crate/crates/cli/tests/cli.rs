use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyent")).args(args).output().expect("binary runs")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyent-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const CONTRACT: &str = r#"
checks = ["growth", "kato", "lap", "factor"]
[protocol]
preset = "wandering"
n_exponents = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]

[[systems]]
name = "pl_contract"
expect = [0.8, 1.1]
"#;

#[test]
fn contraction_run_meets_its_bounds() {
    let dir = scratch("contract");
    let cfg = write_config(&dir, CONTRACT);
    let out = dir.join("out");
    let o = polyent(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("report.toml")).unwrap();
    let parsed: toml::Table = report.parse().unwrap();
    let sys = &parsed["systems"].as_array().unwrap()[0];
    let exponent = sys["growth"]["exponent"].as_float().unwrap();
    assert!((0.8..=1.1).contains(&exponent), "{exponent}");
    assert_eq!(sys["kato"]["bound"].as_float(), Some(1.0));
    assert_eq!(sys["lap"]["laps"].as_integer(), Some(1));
    assert_eq!(sys["factor"]["holds"].as_bool(), Some(true));
    let csv = std::fs::read_to_string(out.join("pl_contract.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("system,eps,n,sep_greedy,span_greedy"));
    assert_eq!(csv.lines().count(), 1 + 4 * 10);
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        r#"
checks = ["growth", "factor"]
[protocol]
eps_exponents = [3, 4]
n_exponents = [0, 1, 2, 3]
[[systems]]
name = "tent"
[[systems]]
name = "prod(rotation(phi),pl_contract)"
"#,
    );
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let o = polyent(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["tent.csv", "prod_rotation_phi__pl_contract_.csv", "report.toml"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let out = dir.join("out");
    let out = out.to_str().unwrap();
    let unknown = write_config(&dir, "[[systems]]\nname = \"no_such_map\"");
    assert_eq!(code(&polyent(&["run", "--config", &unknown, "--out", out])), 2);
    let bad_protocol = write_config(&dir, "[protocol]\nn_exponents = [0, 1]\n[[systems]]\nname = \"identity\"");
    assert_eq!(code(&polyent(&["run", "--config", &bad_protocol, "--out", out])), 2);
    assert_eq!(code(&polyent(&["run", "--config", "/nonexistent.toml", "--out", out])), 2);
    assert_eq!(code(&polyent(&["lap", "--map", "tent", "--n", "25"])), 3);
    let strict = write_config(
        &dir,
        "[protocol]\nn_exponents = [0, 1, 2, 3, 4, 5]\n[[systems]]\nname = \"identity\"\nexpect = [0.5, 1.0]",
    );
    assert_eq!(code(&polyent(&["run", "--config", &strict, "--out", out])), 4);
    let fine = write_config(&dir, "[protocol]\nn_exponents = [0, 1, 2, 3, 4, 5]\n[[systems]]\nname = \"identity\"");
    assert_eq!(code(&polyent(&["run", "--config", &fine, "--out", out])), 0);
}

#[test]
fn lap_and_phi_verbs() {
    let lap = polyent(&["lap", "--map", "tent", "--n", "10"]);
    assert_eq!(String::from_utf8_lossy(&lap.stdout).trim(), "1024");
    let phi = polyent(&["phi", "--map", "tripod_contract", "--n", "6"]);
    assert_eq!(String::from_utf8_lossy(&phi.stdout).trim(), "1");
    assert_eq!(code(&polyent(&["lap", "--map", "tripod_rotate", "--n", "2"])), 2);
}

#[test]
fn check_verb_reports_per_criterion() {
    let o = polyent(&["check", "--suite", "acceptance", "--filter", "9,11"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().any(|l| l.starts_with("criterion  9 PASS")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("criterion 11 PASS")), "{text}");
    let slopes = polyent(&["check", "--suite", "acceptance", "--filter", "8,9", "--tolerance-scale", "0"]);
    assert_eq!(code(&slopes), 4);
    let text = String::from_utf8_lossy(&slopes.stdout);
    assert!(text.contains("criterion  8 FAIL") && text.contains("criterion  9 PASS"), "{text}");
}

#[test]
fn inline_systems_run() {
    let dir = scratch("inline");
    let cfg = write_config(
        &dir,
        r#"
checks = ["growth", "lap", "kato"]
lap_n = 12
[protocol]
eps_exponents = [3, 4]
n_exponents = [0, 1, 2, 3]
[[systems]]
name = "my_tent"
[systems.inline]
vertices = ["a", "b"]
edges = [["a", "b", "1"]]
pieces = [[["0", 0, "2", "0"], ["1/2", 0, "-2", "2"]]]
"#,
    );
    let out = dir.join("out");
    let o = polyent(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: toml::Table = std::fs::read_to_string(out.join("report.toml")).unwrap().parse().unwrap();
    let sys = &report["systems"].as_array().unwrap()[0];
    assert_eq!(sys["lap"]["laps"].as_integer(), Some(4096));
    assert!(out.join("my_tent.csv").exists());
}
