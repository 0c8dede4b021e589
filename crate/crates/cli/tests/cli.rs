//! End-to-end runs of the `ncs-sched` binary on the bundled configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncs-sched"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Five-plant config with fewer initial conditions, written into `dir`.
fn small_exp1(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(config("exp1.toml")).unwrap().replace("count = 100", "count = 5");
    let path = dir.join("exp1_small.toml");
    fs::write(&path, text).unwrap();
    path
}

fn design_into(dir: &Path, cfg: &Path) -> PathBuf {
    let o = run(&["design", "--config", path_str(cfg), "--out", path_str(dir)]);
    assert_eq!(o.status.code(), Some(0), "design failed: {}", String::from_utf8_lossy(&o.stderr));
    dir.join("design.json")
}

#[test]
fn design_schedule_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    let cfg = small_exp1(dir.path());
    let design = design_into(dir.path(), &cfg);
    let artifact: serde_json::Value = serde_json::from_str(&fs::read_to_string(&design).unwrap()).unwrap();
    assert!(artifact["xi"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() < 0.0));

    let o = run(&["schedule", "--design", path_str(&design), "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let policy = dir.path().join("policy.txt");
    assert!(policy.exists());

    let sim_dir = dir.path().join("sim");
    fs::create_dir(&sim_dir).unwrap();
    let o = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--policy",
        path_str(&policy),
        "--design",
        path_str(&design),
        "--out",
        path_str(&sim_dir),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = fs::read_to_string(sim_dir.join("report.txt")).unwrap();
    assert!(report.contains("certificate violations 0"));
    assert!(report.contains("envelope violations 0"));
    for r in 0..5 {
        let trace = fs::read_to_string(sim_dir.join(format!("trace_{r:03}.csv"))).unwrap();
        assert!(trace.starts_with("t,plant,norm,x1,x2"));
        // Header plus 61 time steps for each of 5 plants.
        assert_eq!(trace.lines().count(), 1 + 61 * 5);
    }

    let o = run(&["check-cycle", "--design", path_str(&design)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("T-contractive"));
}

#[test]
fn policy_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = small_exp1(dir.path());
    let design = design_into(dir.path(), &cfg);
    let first = run(&["schedule", "--design", path_str(&design)]);
    let second = run(&["schedule", "--design", path_str(&design)]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    let again = TempDir::new().unwrap();
    let design2 = design_into(again.path(), &cfg);
    assert_eq!(fs::read(&design).unwrap(), fs::read(&design2).unwrap());
}

#[test]
fn round_robin_baseline_diverges() {
    let dir = TempDir::new().unwrap();
    let cfg = small_exp1(dir.path());
    let o = run(&["simulate", "--config", path_str(&cfg), "--round-robin"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("plant 4: converging 0"));
}

#[test]
fn zero_horizon_is_accepted() {
    let dir = TempDir::new().unwrap();
    let cfg = small_exp1(dir.path());
    let design = design_into(dir.path(), &cfg);
    let o = run(&["schedule", "--design", path_str(&design), "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let policy = dir.path().join("policy.txt");
    let o = run(&["simulate", "--config", path_str(&cfg), "--policy", path_str(&policy), "--horizon", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not classified"));
}

#[test]
fn unknown_config_key_exits_4() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(config("exp1.toml")).unwrap() + "\nunexpected = 1\n";
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, text).unwrap();
    assert_eq!(run(&["design", "--config", path_str(&cfg)]).status.code(), Some(4));
    assert_eq!(run(&["design", "--config", "/nonexistent/config.toml"]).status.code(), Some(4));
}

#[test]
fn coarse_grid_exits_5() {
    let dir = TempDir::new().unwrap();
    // The only stable grid value 0.6 lies below ρ(A+BK)² for plants 2 and 3.
    let text = fs::read_to_string(config("three_plant.toml")).unwrap().replace("h_s = 1e-2", "h_s = 0.6");
    let cfg = dir.path().join("coarse.toml");
    fs::write(&cfg, text).unwrap();
    assert_eq!(run(&["design", "--config", path_str(&cfg)]).status.code(), Some(5));
}

#[test]
fn infeasible_channel_share_exits_2() {
    let o = run(&["design", "--config", path_str(&config("three_plant.toml"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_cycle_with_fixed_scalars() {
    let o = run(&["check-cycle", "--config", path_str(&config("three_plant.toml"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("rotation condition"));
    assert!(out.contains("(holds)"));
}

#[test]
fn check_cycle_reads_cycle_files() {
    let dir = TempDir::new().unwrap();
    let cycle = dir.path().join("cycle.txt");
    fs::write(&cycle, "# two vertices with explicit dwell\n{1} 5\n{2,3} 1\n").unwrap();
    let o = run(&["check-cycle", "--config", path_str(&config("three_plant.toml")), "--cycle", path_str(&cycle)]);
    assert_eq!(o.status.code(), Some(4), "capacity 1 config must reject a two-plant vertex");

    fs::write(&cycle, "{1} 5\n{2} 1\n").unwrap();
    let o = run(&["check-cycle", "--config", path_str(&config("three_plant.toml")), "--cycle", path_str(&cycle)]);
    assert_eq!(o.status.code(), Some(2), "plant 3 is never stable");
    assert!(stdout(&o).contains("T-factors [5, 1]"));
}
