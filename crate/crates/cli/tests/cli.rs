use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jumpga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumpga"))
        .args(args)
        .env("JUMPGA_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn presets_lists_all_four() {
    let o = jumpga(&["presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["fig1-desk", "fig2-desk", "fig3-desk", "fig4-desk"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn single_run_reports_success() {
    let o = jumpga(&["run", "--n", "30", "--k", "2", "--mu", "6", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("success=true"));
    assert!(text.contains("population_digest="));
}

#[test]
fn single_run_is_reproducible_and_trajectory_written() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("traj.csv");
    let args = ["run", "--n", "40", "--k", "3", "--mu", "8", "--seed", "9", "--trajectory", "mu"];
    let a = jumpga(&[&args[..], &["--trajectory-out", t.to_str().unwrap()]].concat());
    let b = jumpga(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let csv = fs::read_to_string(&t).unwrap();
    assert!(csv.starts_with("evaluations,largest_species,species\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn budget_exhaustion_is_a_failure() {
    let o = jumpga(&["run", "--n", "60", "--k", "4", "--mu", "4", "--p-c", "0", "--max-evaluations", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("success=false"));
}

#[test]
fn invalid_parameters_exit_with_usage_error() {
    assert_eq!(jumpga(&["run", "--n", "10", "--k", "11"]).status.code(), Some(2));
    assert_eq!(jumpga(&["run", "--mechanism", "nope"]).status.code(), Some(2));
    assert_eq!(jumpga(&["verify", "bogus"]).status.code(), Some(2));
}

fn sweep_into(dir: &Path, cfg: &Path) -> Output {
    jumpga(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

#[test]
fn sweep_from_config_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "# small grid\nn = 24\nk = 2\nmu = 5\nreplications = 4\nseed = 77\nsweep.p_c = 0,1\nsweep.mechanism = uniform,dup-min\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sweep_into(&a, &cfg).status.success());
    assert!(sweep_into(&b, &cfg).status.success());
    for f in ["raw.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let raw = fs::read_to_string(a.join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 4 * 4);
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "n = 24\nk = 2\nmu = 5\nreplications = 2\n").unwrap();
    let out = dir.path().join("o");
    let o = jumpga(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "28",
        "--set",
        "chi=1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    assert!(row.starts_with("0,28,2,5,1,1.5,uniform,2,"), "{row}");
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = jumpga(&["sweep", "--n", "20", "--k", "2", "--out", blocker.join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 20\nthis is wrong\n").unwrap();
    let o = sweep_into(&dir.path().join("o"), &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn compare_writes_one_row_per_mechanism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = jumpga(&[
        "compare",
        "--n",
        "30",
        "--k",
        "2",
        "--mechanisms",
        "uniform,det-crowding,island",
        "--baseline-chi",
        "2",
        "--replications",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    assert!(stdout(&o).contains("rank-sum"));
}

#[test]
fn verify_oracles_passes_and_equivalence_reports() {
    let o = jumpga(&["verify", "oracles"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS oracles/closed-form-vs-enumeration"));
    let e = jumpga(&["verify", "equivalence", "--pools", "300"]);
    let text = stdout(&e);
    assert!(text.contains("equivalence/sharing-argmax-equals-hamming-argmax"));
    assert_eq!(e.status.success(), text.starts_with("PASS"));
}
