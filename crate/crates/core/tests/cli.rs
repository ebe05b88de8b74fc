use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mpcc_flow::cli::{run_checks, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};
use mpcc_flow::flow::read_csv;
use mpcc_flow::model::{ProblemDef, ScalarField};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpcc-flow")).args(args).output().expect("binary runs")
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).map_or_else(
        |_| Vec::new(),
        |rd| rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
    );
    v.sort();
    v
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(bin(&["--help"]).status.code(), Some(EXIT_OK));
    assert_eq!(bin(&["--version"]).status.code(), Some(EXIT_OK));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&[]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(bin(&["solve", "--bogus"]).status.code(), Some(EXIT_CONFIG));
}

#[test]
fn config_errors_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    for args in [
        vec!["solve", "--problem", "mpcc9", "--out-dir", o],
        vec!["solve", "--problem", "mpcc3", "--x0", "1", "--out-dir", o],
        vec!["solve", "--problem", "mpcc3", "--beta", "-1", "--out-dir", o],
        vec!["solve", "--problem", "mpcc3", "--starts", "0", "--out-dir", o],
        vec!["solve", "--problem", "mpcc3", "--x0", "1,1", "--starts", "2", "--out-dir", o],
        vec!["sweep", "--problem", "mpcc1", "--sweep-beta", "0.1", "--sweep-lambda", "10", "--out-dir", o],
    ] {
        let r = bin(&args);
        assert_eq!(r.status.code(), Some(EXIT_CONFIG), "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(!r.stderr.is_empty());
        assert!(files_in(&out).is_empty(), "{args:?} wrote files");
    }
}

#[test]
fn solve_writes_report_and_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let r = bin(&["solve", "--problem", "mpcc1", "--x0", "1,1", "--beta", "1e-4", "--lambda", "1e6", "--out-dir", o]);
    assert_eq!(r.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(files_in(tmp.path()), ["report.json", "traj_0.csv"]);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["best"], 0);
    assert_eq!(report["reports"][0]["stationarity"], "S");
    let csv = fs::read(tmp.path().join("traj_0.csv")).unwrap();
    assert!(csv.starts_with(b"t,w1,w2,energy,grad_norm\n"));
    let rows = read_csv(csv.as_slice()).unwrap();
    let last = rows.last().unwrap();
    let fp: Vec<f64> = serde_json::from_value(report["reports"][0]["final_point"].clone()).unwrap();
    assert_eq!(last.w, fp);
}

#[test]
fn infeasible_result_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let r = bin(&["solve", "--problem", "mpcc1", "--x0", "1,1", "--beta", "0.1", "--lambda", "1e6", "--out-dir", o]);
    assert_eq!(r.status.code(), Some(EXIT_FAILED));
    assert!(tmp.path().join("report.json").exists());
}

#[test]
fn sweep_outputs_are_byte_identical_across_runs() {
    let run = || {
        let tmp = tempfile::tempdir().unwrap();
        let o = tmp.path().to_str().unwrap().to_owned();
        let r = bin(&["sweep", "--problem", "mpcc1", "--x0", "1,1", "--lambda", "1e6", "--sweep-beta", "0.1,0.01,0.001", "--out-dir", &o]);
        assert_eq!(r.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&r.stderr));
        let names = files_in(tmp.path());
        // report.json records the output directory
        let contents: Vec<String> =
            names.iter().map(|n| fs::read_to_string(tmp.path().join(n)).unwrap().replace(&o, "<dir>")).collect();
        let stdout = String::from_utf8(r.stdout).unwrap().replace(&o, "<dir>");
        (names, contents, stdout)
    };
    let a = run();
    assert!(a.0.contains(&"sweep.csv".to_string()));
    let sweep = &a.1[a.0.iter().position(|n| n == "sweep.csv").unwrap()];
    assert!(sweep.starts_with("beta,w1,w2,f,abs_err_ref\n"));
    assert_eq!(sweep.lines().count(), 4);
    assert_eq!(a, run());
}

#[test]
fn check_passes_on_builtins() {
    let r = bin(&["check", "--problem", "mpcc5"]);
    assert_eq!(r.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4, "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn suite_list_names_every_problem() {
    let r = bin(&["suite", "list"]);
    assert_eq!(r.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(r.stdout).unwrap();
    for id in mpcc_flow::suite::PROBLEM_IDS {
        assert!(text.contains(id));
    }
}

#[test]
fn checks_catch_a_wrong_gradient() {
    // the gradient of (w1 - w2)² with the sign of the second entry flipped
    let f = ScalarField::new(
        |w: &[f64]| (w[0] - w[1]).powi(2),
        |w: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (w[0] - w[1]);
            g[1] = 2.0 * (w[0] - w[1]);
        },
    );
    let p = ProblemDef::builder("broken", 2).objective(f).box_hint(vec![(0.0, 2.0); 2]).build().unwrap();
    let results = run_checks(&p, 0);
    let grad = results.iter().find(|c| c.name == "gradients").unwrap();
    assert!(!grad.passed);
}

fn best_of(dir: &Path) -> (f64, Vec<f64>) {
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap();
    let best = &report["reports"][report["best"].as_u64().expect("a best start") as usize];
    (best["final_objective"].as_f64().unwrap(), serde_json::from_value(best["final_point"].clone()).unwrap())
}

#[test]
fn ten_starts_on_mpcc1_all_converge() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let r = bin(&["solve", "--problem", "mpcc1", "--beta", "1e-4", "--lambda", "1e6", "--starts", "10", "--seed", "42", "--out-dir", o]);
    assert_eq!(r.status.code(), Some(EXIT_OK));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 10);
    for rep in reports {
        assert_eq!(rep["converged"], true);
        assert!(rep["final_objective"].as_f64().unwrap() <= 1e-9);
    }
    assert_eq!(files_in(tmp.path()).len(), 11);
}

#[test]
fn large_beta_run_lands_near_beta() {
    let tmp = tempfile::tempdir().unwrap();
    bin(&["solve", "--problem", "mpcc1", "--x0", "1,1", "--beta", "0.1", "--lambda", "1e6", "--out-dir", tmp.path().to_str().unwrap()]);
    let (_, w) = best_of(tmp.path());
    assert!(w.iter().all(|x| (x - 0.10005).abs() <= 5e-3), "{w:?}");
}

#[test]
fn mpcc3_at_tiny_beta_matches_the_published_value() {
    let tmp = tempfile::tempdir().unwrap();
    let r = bin(&["solve", "--problem", "mpcc3", "--x0", "1,1", "--beta", "1e-6", "--lambda", "1e6", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(EXIT_OK));
    let (f, _) = best_of(tmp.path());
    assert!((f - 1.24206591133857).abs() <= 1e-3, "{f}");
}

#[test]
fn empty_sweep_list_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let r = bin(&["sweep", "--problem", "mpcc1", "--x0", "1,1", "--sweep-beta", "", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(EXIT_CONFIG));
    assert!(files_in(&out).is_empty());
}
