use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conemetric")).args(args).output().expect("binary runs")
}

fn json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&output.stdout))
    })
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut file, text.as_bytes()).unwrap();
    file
}

#[test]
fn xi_on_orthant() {
    let out = run(&["xi", "--config", &config("orthant2.toml"), "--point", "3,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), serde_json::json!({ "xi": 3.0 }));
    // max(-1/1, 2/2) = 1
    let out = run(&["xi", "--config", &config("orthant2.toml"), "--point", "-1,2"]);
    assert_eq!(json(&out)["xi"], 1.0);
}

#[test]
fn xi_on_lorentz_and_pyramid() {
    // t e − y ∈ L ⇔ ‖(−1, 0)‖ ≤ t − 2
    let out = run(&["xi", "--config", &config("lorentz3.toml"), "--point", "1,0,2"]);
    assert_eq!(json(&out)["xi"], 3.0);
    // pyramid: t ≥ y3 + max(|y1|, |y2|) = 1 + 2
    let out = run(&["xi", "--config", &config("pyramid.toml"), "--point", "2,-1,1"]);
    assert!((json(&out)["xi"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn dist_reports_all_three_distances() {
    let out = run(&["dist", "--config", &config("orthant2.toml"), "--x", "1,2", "--y", "0,-1"]);
    let v = json(&out);
    assert_eq!(v["p"], serde_json::json!([1.0, 3.0]));
    // ξ_e((1,3)) with e = (1,2)
    assert_eq!(v["d_p"], 1.5);
    // ½·½ + ¼·¾
    assert_eq!(v["d_S"], 0.4375);
}

#[test]
fn dist_on_finite_table() {
    let out = run(&["dist", "--config", &config("finite_table.toml"), "--x", "0", "--y", "2"]);
    let v = json(&out);
    assert_eq!(v["p"], serde_json::json!([1.0, 1.0]));
    assert_eq!(v["d_S"], 0.375);
    let out = run(&["dist", "--config", &config("finite_table.toml"), "--x", "0", "--y", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn banach_affine_reaches_two_two() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&["solve", "banach", "--config", &config("affine.toml"), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["converged"], true);
    assert_eq!(v["certificate"], "banach_verified");
    for x in v["final_point"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 2.0).abs() < 1e-11);
    }
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 64);

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,residual_dp,residual_dS"));
    // |x₁ − x₀| = (1, 1): d_p = 1, d_S = ½·½ + ¼·½
    assert_eq!(lines.next(), Some("1,1.0,0.375"));
    assert_eq!(lines.count() + 1, v["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn solve_is_deterministic_and_overridable() {
    let a = run(&["solve", "banach", "--config", &config("affine.toml")]);
    let b = run(&["solve", "banach", "--config", &config("affine.toml")]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["solve", "banach", "--config", &config("affine.toml"), "--seed", "99", "--max-iter", "3"]);
    let v = json(&c);
    assert_eq!(v["seed"], 99);
    assert_eq!(v["iterations"], 3);
    assert_eq!(v["converged"], false);
    assert_eq!(c.status.code(), Some(1));
}

#[test]
fn boyd_wong_and_weak_converge() {
    let v = json(&run(&["solve", "boyd-wong", "--config", &config("coordinate_ratio.toml")]));
    assert_eq!(v["certificate"], "boyd_wong_verified");
    for x in v["final_point"].as_array().unwrap() {
        assert!(x.as_f64().unwrap() <= 1.01 * 1e-4 + 1e-8);
    }
    let v = json(&run(&["solve", "weak", "--config", &config("weak.toml")]));
    assert_eq!(v["certificate"], "weak_contraction_monotone");
    let history = v["residual_history"].as_array().unwrap();
    assert!(history.last().unwrap().as_f64().unwrap() <= 1e-6);
}

#[test]
fn banach_rejects_a_false_contraction_constant() {
    let text = std::fs::read_to_string(config("affine.toml")).unwrap().replace("k = 0.5", "k = 0.25");
    let file = write_temp(&text);
    let out = run(&["solve", "banach", "--config", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].as_str().unwrap().contains("hypothesis violated"));
}

#[test]
fn demo_omega() {
    let out = run(&["demo-omega", "--epsilon", "0.1", "--truncate", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["h_c"].as_f64().unwrap(), 0.5 * 0.1 / 1.1);
    assert_eq!(v["epsilon"], 0.1);
    assert_eq!(v["pass"], true);
}

#[test]
fn validate_reports_cone_and_space() {
    let out = run(&["validate", "--config", &config("pyramid.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["cone"]["pointed"], true);
    let v = json(&run(&["validate", "--config", &config("finite_table.toml")]));
    assert_eq!(v["space"]["finite"], true);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let cases = [
        ("[cone]\nkind = \"orthant\"\ndim = 2\n[scalarization]\ne = [1.0, -1.0]\n", "scalarization.e"),
        ("[cone]\nkind = \"orthant\"\ndim = 2\n[scalarization]\ne = [1.0]\n", "scalarization.e"),
        ("[cone]\nkind = \"lorentz\"\ndim = 1\n", "cone"),
        ("[cone]\nkind = \"orthant\"\ndim = 2\n[sample]\ncount = 0\n", "sample"),
        ("[cone]\nkind = \"orthant\"\ndim = 2\n[solver]\nmax_iter = \"many\"\n", "solver.max_iter"),
        ("[cone]\nkind = \"polyhedral\"\nrows = [[1.0, 0.0]]\n", "cone"),
    ];
    for (text, field) in cases {
        let file = write_temp(text);
        let out = run(&["xi", "--config", file.path().to_str().unwrap(), "--point", "1,1"]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains(&format!("`{field}`")), "{field} not named in: {stderr}");
    }
}

#[test]
fn bad_vectors_and_files_exit_two() {
    assert_eq!(run(&["xi", "--config", &config("orthant2.toml"), "--point", "1,x"]).status.code(), Some(2));
    assert_eq!(run(&["xi", "--config", &config("orthant2.toml"), "--point", "1,2,3"]).status.code(), Some(2));
    assert_eq!(run(&["xi", "--config", "/nonexistent.toml", "--point", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "weak", "--config", &config("orthant2.toml")]).status.code(), Some(2));
}

#[test]
fn suite_exit_codes() {
    let quick = config("suite_quick.toml");
    let out = run(&["suite", "omega-example", "--config", &quick]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite_id"], "omega-example");
    assert_eq!(v["seed"], 20240901);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    assert_eq!(run(&["suite", "no-such-suite"]).status.code(), Some(2));

    // probes down to e/2³⁹ are not reached within the sequence length
    let failing = write_temp("[sample]\ncount = 100\n[suite]\nsequences_per_rate = 4\nprobe_levels = 40\n");
    let out = run(&["suite", "convergence-transfer", "--config", failing.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn suite_all_is_deterministic_and_replayable() {
    let quick = config("suite_quick.toml");
    let strip = |out: &Output| {
        let mut v = json(out);
        for s in v["suites"].as_array_mut().unwrap() {
            s.as_object_mut().unwrap().remove("wall_time");
        }
        v
    };
    let a = run(&["suite", "all", "--config", &quick]);
    let b = run(&["suite", "all", "--config", &quick]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(json(&a)["suites"].as_array().unwrap().len(), 10);

    let out = run(&["suite", "fixed-point", "--config", &quick, "--check", "banach_random_affine", "--index", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}
