use std::process::Command;

fn covevo(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_covevo")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn csv(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_emits_rectangular_csv() {
    let (code, out, _) = covevo(&["solve", "--b", "3", "--d", "6", "--epsilon", "0.4294398"]);
    assert_eq!(code, 0);
    let rows = csv(&out);
    assert_eq!(rows.len(), 202);
    assert_eq!(rows[0], ["y", "delta_r1_r1", "delta_r2_r2", "delta_r3_r3", "delta_r4_r4", "delta_r5_r5"]);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[1][0], "1");
    assert_eq!(rows[201][0], "0.05");
}

#[test]
fn solve_with_zero_steps_is_initial_covariance() {
    let (code, out, _) = covevo(&["solve", "--b", "2", "--d", "4", "--epsilon", "0.3", "--y-steps", "0", "--entries", "l:l,l:r1"]);
    assert_eq!(code, 0);
    let rows = csv(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], ["y", "delta_l_l", "delta_l_r1"]);
    let ll: f64 = rows[1][1].parse().unwrap();
    assert!((ll - 2.0 * 0.3 * 0.7).abs() < 1e-9);
}

#[test]
fn stability_marks_undefined_correlation() {
    let dir = std::env::temp_dir().join(format!("covevo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("stab.csv");
    let (code, out, _) = covevo(&["stability", "--b", "2", "--d", "4", "--eps-steps", "299", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let rows = csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 300);
    let third = rows.iter().find(|r| r[0] == "0.333333333").unwrap();
    assert_eq!(third[4], "nan");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn threshold_prints_both_alpha_paths() {
    let (code, out, _) = covevo(&["threshold", "--b", "3", "--d", "6"]);
    assert_eq!(code, 0);
    assert!(out.contains("0.429439814"), "{out}");
    assert!(out.contains("alpha"));
}

#[test]
fn ode_check_gate() {
    let (code, out, _) = covevo(&["ode-check", "--b", "3", "--d", "6", "--epsilon", "0.4294398", "--y-end", "0.1", "--richardson"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS"));
    let (code, _, _) = covevo(&["ode-check", "--b", "3", "--d", "6", "--epsilon", "0.4", "--y-end", "1"]);
    assert_eq!(code, 0);
    let (code, _, _) = covevo(&["ode-check", "--b", "3", "--d", "6", "--epsilon", "0.4", "--step", "0.2", "--tolerance", "1e-12"]);
    assert_eq!(code, 1);
}

#[test]
fn bad_input_is_a_usage_error() {
    for args in [
        vec!["solve", "--b", "3", "--d", "6", "--epsilon", "1.5"],
        vec!["solve", "--b", "1", "--d", "6", "--epsilon", "0.5"],
        vec!["solve", "--b", "3", "--d", "6", "--epsilon", "0.5", "--entries", "r6:r1"],
        vec!["simulate", "--b", "3", "--d", "6", "--epsilon", "0.4", "--n", "7"],
        vec!["simulate", "--b", "3", "--d", "6", "--epsilon", "0.4", "--n", "100", "--trials", "1"],
        vec!["stability", "--b", "3", "--d", "2"],
        vec!["frobnicate"],
    ] {
        let (code, _, err) = covevo(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.trim().is_empty());
    }
}

#[test]
fn simulate_small_run() {
    let (code, out, err) = covevo(&["simulate", "--b", "3", "--d", "6", "--epsilon", "0.4", "--n", "600", "--trials", "50", "--checkpoints", "0.9", "--gate-z", "0"]);
    assert_eq!(code, 0);
    assert!(err.contains("gate disabled"));
    let rows = csv(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), 4 + 4 * 21);
}
