use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn senile(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_senile"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    let mut stream = serde_json::Deserializer::from_str(&text).into_iter();
    stream.next().unwrap().unwrap()
}

#[test]
fn moments_of_geometric_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(&["moments", "--dim", "1", "--f", "const:0"], dir.path());
    assert!(o.status.success());
    let v = json(&o);
    assert!((v["mean"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((v["second_moment"].as_f64().unwrap() - 6.0).abs() < 1e-10);
    assert!((v["p_odd"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);
    assert_eq!(v["regimes"]["persistent"]["regime"], "diffusive");
    assert_eq!(v["regimes"]["reinforced"]["regime"], "diffusive");
}

#[test]
fn moments_flags_infinite_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(&["moments", "--dim", "1", "--f", "affine:1,0", "--model", "reinforced"], dir.path());
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["mean"], "inf");
    assert!(v["regimes"]["reinforced"]["regime"].as_str().unwrap().starts_with("subdiffusive"));
}

#[test]
fn moments_of_unit_time_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f.txt"), "# f(1)\n-1\n").unwrap();
    let o = senile(&["moments", "--dim", "2", "--f", "table:f.txt"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["mean"].as_f64().unwrap(), 1.0);
}

#[test]
fn exact_curve_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(
        &["moments", "--dim", "2", "--f", "const:0", "--model", "reinforced", "--steps", "3", "--format", "csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kind,d,C,correction,n,exact_msd");
    assert_eq!(lines.count(), 3);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "simulate", "--model", "persistent", "--dim", "2", "--f", "const:0", "--paths", "10",
            "--steps", "50", "--seed", "42", "--workers", "2", "--out", out,
        ]
    };
    assert!(senile(&args("a.csv"), dir.path()).status.success());
    assert!(senile(&args("b.csv"), dir.path()).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("path,step_index,axis,sign,T,L,x1,x2\n"));
    assert_eq!(text.lines().count(), 1 + 10 * 50);
}

#[test]
fn coupled_mode_writes_identical_positions() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(
        &[
            "simulate", "--mode", "coupled", "--model", "reinforced", "--dim", "2", "--f", "const:1",
            "--paths", "5", "--horizon", "100", "--out", "pair",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = fs::read_to_string(dir.path().join("pair.timechange.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("pair.direct.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 5 * 101);
}

#[test]
fn other_modes_run() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, extra) in [
        ("senile", ["--horizon", "20"]),
        ("direct", ["--horizon", "20"]),
        ("martingale", ["--steps", "20"]),
        ("scaled", ["--horizon", "20"]),
    ] {
        let mut args = vec!["simulate", "--mode", mode, "--model", "persistent", "--dim", "1", "--f", "const:0", "--paths", "3"];
        args.extend(extra);
        let o = senile(&args, dir.path());
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        let json_out = senile(&[&args[..], &["--format", "json"]].concat(), dir.path());
        assert!(json_out.status.success());
        for line in stdout(&json_out).lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }
    }
}

#[test]
fn excluded_reinforced_case_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(
        &["simulate", "--model", "reinforced", "--dim", "1", "--f", "const:-1", "--steps", "10"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d = 1"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.toml"), "").unwrap();
    assert_eq!(senile(&["verify", "--config", "empty.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(senile(&["simulate", "--dim", "1", "--f", "const:0"], dir.path()).status.code(), Some(2));
    assert_eq!(senile(&["moments", "--dim", "1", "--f", "bogus:1"], dir.path()).status.code(), Some(2));
    assert_eq!(senile(&["moments", "--dim", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(senile(&["simulate", "--model", "sideways"], dir.path()).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "model = \"persistent\"\ndim = 3\nf = \"const:0\"\nsteps = 4\npaths = 2\nseed = 7\n",
    )
    .unwrap();
    let o = senile(&["simulate", "--config", "run.toml", "--dim", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("path,step_index,axis,sign,T,L,x1,x2\n"));
}

#[test]
fn numeric_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = senile(
        &["simulate", "--model", "persistent", "--dim", "1", "--f", "affine:1,0", "--steps", "200", "--paths", "50", "--tcap", "10"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn martingale_criterion_and_its_sabotage() {
    let dir = tempfile::tempdir().unwrap();
    let ok = senile(&["verify", "--only", "3", "--seed", "1", "--out", "mart.jsonl"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let report = fs::read_to_string(dir.path().join("mart.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(report.lines().next().unwrap()).unwrap();
    assert_eq!(v["id"], 3);
    assert_eq!(v["passed"], true);

    let bad = senile(&["verify", "--only", "3", "--seed", "1", "--sabotage"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("failed: persistent d=2 const:0 increment_n"));
}
