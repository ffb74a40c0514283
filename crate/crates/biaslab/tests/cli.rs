use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn biaslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biaslab")).args(args).env_remove("BIASLAB_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_five_agent(dir: &Path) -> String {
    let path = dir.join("five_agent.txt");
    let row = "0.35 0.1 0.2 0.25 0.1\n";
    fs::write(&path, row.repeat(5)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_trajectory_and_elections() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_five_agent(dir.path());
    let out = dir.path().join("o");
    let o = biaslab(&[
        "run", "--network", &net, "--beliefs", "0.15,0.3,0.5,0.65,0.75", "--q", "0.78", "--eps", "1e-9", "--swing-left", "--out",
        out.to_str().unwrap(),
    ]);
    stdout(&o);
    let elections = fs::read_to_string(out.join("elections.csv")).unwrap();
    assert!(elections.starts_with("t,votes_left,votes_right,winner,is_shock\n0,3,2,left,false\n1,2,3,right,true\n"));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,agent_id,belief\n"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert!((summary["consensus"].as_f64().unwrap() - 0.42).abs() < 1e-8);
}

#[test]
fn spectra_json_reports_influence() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_five_agent(dir.path());
    let text = stdout(&biaslab(&["--format", "json", "spectra", &net]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let s: Vec<f64> = v["influence"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in s.iter().zip([0.35, 0.1, 0.2, 0.25, 0.1]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn media_table_csv() {
    let text = stdout(&biaslab(&["media", "--M", "4,5", "--q", "0"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("M,q,fringe,exists"));
    assert!(lines.next().unwrap().starts_with("4,0"));
}

#[test]
fn generate_is_seeded() {
    let a = stdout(&biaslab(&["--seed", "5", "generate", "--n", "60", "--m0", "10", "--m-r", "5", "--m-n", "5"]));
    let b = stdout(&biaslab(&["--seed", "5", "generate", "--n", "60", "--m0", "10", "--m-r", "5", "--m-n", "5"]));
    let c = stdout(&biaslab(&["--seed", "6", "generate", "--n", "60", "--m0", "10", "--m-r", "5", "--m-n", "5"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 60);
}

#[test]
fn weights_from_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "0 1\n1 2\n2 0\n2 3\n").unwrap();
    let text = stdout(&biaslab(&["weights", "--heuristic", "mh", g.to_str().unwrap()]));
    let rows: Vec<Vec<f64>> = text.lines().map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (j, v) in r.iter().enumerate() {
            assert!((v - rows[j][i]).abs() < 1e-15);
        }
    }
}

#[test]
fn sweep_threads_do_not_change_runs_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let dumped = stdout(&biaslab(&["--seed", "3", "sweep", "--preset", "set1", "--dump-config"]));
    let mut cfg: serde_json::Value = serde_json::from_str(&dumped).unwrap();
    cfg["n_networks"] = 3.into();
    cfg["n_assignments"] = 2.into();
    cfg["network"]["n"] = 80.into();
    cfg["network"]["m0"] = 10.into();
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        stdout(&biaslab(&["--threads", threads, "--out", out.to_str().unwrap(), "sweep", "--config", cfg_path.to_str().unwrap()]));
        for f in ["polarization.csv", "shocks.csv", "summary.json", "config.json"] {
            assert!(out.join(f).exists(), "{f} missing");
        }
        outputs.push(fs::read(out.join("runs.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(header.lines().count(), 7);
}

#[test]
fn json_errors_are_structured() {
    let o = biaslab(&["--format", "json", "spectra", "/nonexistent/net.txt"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["error"].is_string());
    let o = biaslab(&["octopus", "--beliefs", "0.1,0.9", "--q", "1.5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
