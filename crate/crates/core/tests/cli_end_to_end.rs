use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/desk.json")
}

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixpoint-lab"))
        .args(&args[..1])
        .arg("--corpus")
        .arg(corpus())
        .args(&args[1..])
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(dir.path(), &["certify", "--map", "half"])), 0);
    for cond in [
        "zamfirescu",
        "quasi_contractive",
        "osilike_udomene",
        "contractive_like",
    ] {
        let v: serde_json::Value =
            serde_json::from_str(&read(dir.path(), &format!("half_{cond}.json"))).unwrap();
        assert_eq!(v["outcome"], "certificate", "{cond}");
        assert_eq!(v["sample_count"], 10_000);
        assert_eq!(v["seed"], 42);
    }
    assert_eq!(code(&lab(dir.path(), &["certify", "--map", "affine2d"])), 0);

    let o = lab(dir.path(), &["certify", "--map", "identity"]);
    assert_eq!(code(&o), 2);
    for cond in [
        "zamfirescu",
        "quasi_contractive",
        "osilike_udomene",
        "contractive_like",
    ] {
        let v: serde_json::Value =
            serde_json::from_str(&read(dir.path(), &format!("identity_{cond}.json"))).unwrap();
        assert_eq!(v["outcome"], "violation", "{cond}");
    }
}

#[test]
fn run_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &["run", "--map", "half", "--scheme", "picard", "--x0", "1"],
    );
    assert_eq!(code(&o), 0);
    let csv = read(dir.path(), "half_picard_trajectory.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 35);
    assert_eq!(lines[0], "n,x0,residual,fp_distance");
    assert!(lines[34].starts_with("33,1.1641532182693481e-10,"));

    let o = lab(
        dir.path(),
        &["run", "--map", "half", "--scheme", "sp", "--x0", "0"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path(), "half_sp_trajectory.csv").lines().count(), 2);

    let o = lab(
        dir.path(),
        &[
            "run",
            "--map",
            "half",
            "--scheme",
            "mann",
            "--x0",
            "1",
            "--tol",
            "0",
            "--max-iters",
            "3",
        ],
    );
    assert_eq!(code(&o), 0);
    let csv = read(dir.path(), "half_mann_trajectory.csv");
    assert!(csv
        .lines()
        .nth(4)
        .unwrap()
        .starts_with("3,4.2187500000000000e-1,"));
}

#[test]
fn couple_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "couple",
            "--map",
            "half",
            "--scheme",
            "new_multistep",
            "--x0",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let audits: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "half_mann_vs_new_multistep_1_6_k3_audits.json")).unwrap();
    assert_eq!(audits["outcome"], "same_limit");
    let ids: Vec<&str> = audits["audits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["inequality_id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"T1_forward_2_9") && ids.contains(&"T1_backward_2_18"));

    let o = lab(
        dir.path(),
        &[
            "couple",
            "--map",
            "affine2d",
            "--scheme",
            "s_iteration",
            "--x0",
            "0,0",
        ],
    );
    assert_eq!(code(&o), 0);

    let o = lab(
        dir.path(),
        &[
            "couple", "--map", "affine2d", "--scheme", "mann", "--scheme", "sp", "--x0", "1,1",
        ],
    );
    assert_eq!(code(&o), 0);
    let csv = read(dir.path(), "affine2d_mann_vs_sp_coupled.csv");
    assert_eq!(csv.lines().count(), 2);

    let o = lab(
        dir.path(),
        &[
            "couple",
            "--map",
            "half",
            "--scheme",
            "s_iteration",
            "--x0",
            "1",
            "--delta",
            "0.1",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["suite", "--map", "half", "--x0", "1"]);
    assert_eq!(code(&o), 0);
    let csv = read(dir.path(), "half_suite.csv");
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",tolerance")));

    let o = lab(
        dir.path(),
        &["suite", "--map", "half", "--x0", "1", "--max-iters", "5"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 8] = [
        &["run", "--map", "nowhere", "--scheme", "mann", "--x0", "1"],
        &["run", "--map", "half", "--scheme", "mann"],
        &["run", "--map", "half", "--scheme", "halley", "--x0", "1"],
        &["run", "--map", "half", "--scheme", "mann", "--x0", "1,2"],
        &["run", "--map", "half", "--scheme", "mann", "--x0", "3"],
        &[
            "run", "--map", "half", "--scheme", "mann", "--x0", "1", "--alpha", "1.5",
        ],
        &[
            "couple",
            "--map",
            "half",
            "--scheme",
            "sp",
            "--x0",
            "1",
            "--alpha",
            "harmonic:1",
        ],
        &["suite", "--map", "half", "--x0", "1", "--norm", "taxicab"],
    ];
    for args in cases {
        assert_eq!(code(&lab(dir.path(), args)), 1, "{args:?}");
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_fixpoint-lab"))
        .args(["run", "--map", "half"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[{\"label\": 3}]").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fixpoint-lab"))
        .args(["certify", "--map", "half", "--corpus"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["certify", "--map", "piecewise", "--seed", "7"],
        &["run", "--map", "rotation", "--scheme", "noor", "--x0", "-1,0.5"],
        &[
            "couple",
            "--map",
            "shifted_half",
            "--scheme",
            "sp",
            "--x0",
            "2",
            "--alpha",
            "list:0.9,0.6",
        ],
        &[
            "suite", "--map", "affine2d", "--x0", "2,0", "--k", "4", "--beta", "0.3", "--beta", "0.8",
        ],
    ];
    for args in runs {
        assert!(matches!(code(&lab(first.path(), args)), 0 | 2), "{args:?}");
        assert!(matches!(code(&lab(second.path(), args)), 0 | 2), "{args:?}");
    }
    let mut names: Vec<_> = std::fs::read_dir(first.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4 + 1 + 2 + 2);
    for name in names {
        let a = std::fs::read(first.path().join(&name)).unwrap();
        let b = std::fs::read(second.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
}
