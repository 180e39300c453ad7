use std::process::{Command, Output};

fn fraclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn mushroom_threshold_by_theorem_number() {
    let out = fraclab(&["thresholds", "--theorem", "4.4", "--beta", "2", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"]["exact"], "4/3");
    assert!((v["value"]["value"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn cusp_window_and_exponents() {
    let out = fraclab(&["thresholds", "--theorem", "window", "--alpha", "1/2", "--b", "1/2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["window"]["lower"], 1.5);
    assert_eq!(v["window"]["upper"], 2.0);
    let out = fraclab(&["thresholds", "--theorem", "exponents", "--beta", "2", "--q", "1.2", "--exact"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["lhs"]["exact"], "5/3");
    assert_eq!(v["rhs"]["exact"], "3/2");
}

#[test]
fn constant_field_has_undefined_quotient() {
    let out = fraclab(&["quotient", "--field", "constant", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undefined quotient"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["quotient", "--field", "sine", "--samples", "20000", "--seed", "7"];
    let (a, b) = (fraclab(&args), fraclab(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = fraclab(&["quotient", "--field", "sine", "--samples", "20000", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn help_lists_every_subcommand() {
    let out = fraclab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for cmd in [
        "quotient",
        "seminorm",
        "norm",
        "thresholds",
        "verify-prop21",
        "mushroom-scaling",
        "cusp-divergence",
        "bisect",
        "sweep",
    ] {
        assert!(text.contains(cmd), "missing {cmd}");
    }
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(fraclab(&["quotient", "--bogus"]).status.code(), Some(2));
    assert_eq!(fraclab(&["thresholds", "--theorem", "9.9"]).status.code(), Some(2));
    assert_eq!(fraclab(&["thresholds", "--s", "1e-1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "sed = 3\n").unwrap();
    assert_eq!(fraclab(&["--config", bad.to_str().unwrap(), "quotient"]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(fraclab(&["--config", missing.to_str().unwrap(), "quotient"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, "seed = 3\nsamples = 2000\n[sweep]\ns = [0.25, 0.75]\n").unwrap();
    let res = fraclab(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "sweep", "--p", "2,3", "--q", "3"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(res.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("domain,field,n,s,p,q,a,b,quotient"));
}

#[test]
fn readme_config_example_parses() {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
    let end = start + readme[start..].find("```").unwrap();
    let cfg = fraclab_cli::config::RunConfig::parse(&readme[start..end]).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.mushroom.q_list, vec![1.2, 2.0]);
}
