use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    /// Generates a small panel into `s/`.
    fn synth(&self, scenario: &str) -> String {
        let spec = self.write("scenario.txt", scenario);
        let out = tdck(&["synth", "--scenario", &spec, "--output-dir", &self.arg("s")]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        self.arg("s/data.csv")
    }
}

const SMALL: &str = "entities = 4\ntimestamps = 10\neras = 2\ntracks = 2\ndimension = 2\nseparation = 4\nseed = 2\n";

fn tdck(args: &[&str]) -> Output {
    tdck_env(args, &[])
}

fn tdck_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tdck"));
    cmd.args(args).env_remove("TDCK_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn value(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in `{line}`"))
        .parse()
        .unwrap()
}

fn bytes(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names.iter().map(|n| fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn synth_cluster_metrics_graph_pipeline() {
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let truth = sb.arg("s/truth.csv");
    assert!(sb.read("s/data.csv").starts_with("entity,time,f_0,f_1\n"));
    assert_eq!(sb.read("s/data.csv").lines().count(), 41);

    let out = tdck(&[
        "cluster", "--input", &data, "--clusters", "4", "--beta", "0.003", "--delta", "3", "--truth", &truth,
        "--output-dir", &sb.arg("c"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let summary = text.lines().next().unwrap();
    for key in ["J", "MDvar", "Tvar", "ShaP"] {
        assert!(value(summary, key).is_finite());
    }
    assert!(text.lines().nth(1).unwrap().starts_with("ARI="));
    assert_eq!(sb.read("c/metrics.csv").lines().count(), 11);
    assert!(sb.read("c/assignments.csv").starts_with("entity,timestamp,cluster\n"));
    assert!(sb.read("c/centroids.csv").starts_with("cluster,mu_t,f_0,f_1\n"));

    // Truth from the generator is contiguous in every entity.
    let out = tdck(&["metrics", "--input", &data, "--assignments", &truth, "--output-dir", &sb.arg("m")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let truth_shap = value(&stdout(&out), "ShaP");
    let seg = sb.read("m/segmentation.csv");
    assert!(seg.lines().skip(1).all(|l| l.ends_with(",1.00000000000")), "{seg}");

    // Scrambling the labels fragments the series.
    let shuffled: String = sb
        .read("s/truth.csv")
        .lines()
        .enumerate()
        .map(|(k, l)| {
            if k == 0 {
                format!("{l}\n")
            } else {
                let (head, _) = l.rsplit_once(',').unwrap();
                format!("{head},{}\n", (k * 7) % 4)
            }
        })
        .collect();
    let shuffled = sb.write("shuffled.csv", &shuffled);
    let out = tdck(&["metrics", "--input", &data, "--assignments", &shuffled, "--output-dir", &sb.arg("m2")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(value(&stdout(&out), "ShaP") > truth_shap);

    let assignments = sb.arg("c/assignments.csv");
    let out = tdck(&["graph", "--input", &data, "--assignments", &assignments, "--gamma", "0", "--output-dir", &sb.arg("g0")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let adjacency = sb.read("g0/adjacency.csv");
    assert_eq!(adjacency.lines().next().unwrap(), "c0,c1,c2,c3");
    assert_eq!(adjacency.lines().count(), 5);
    let dot = sb.read("g0/graph.dot");
    assert!(dot.starts_with("digraph evolution {\n") && dot.ends_with("}\n"));
    assert!(!dot.lines().any(self_loop));

    let out = tdck(&[
        "graph", "--input", &data, "--assignments", &assignments, "--drop-self-loops=false", "--output-dir", &sb.arg("g1"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(sb.read("g1/graph.dot").lines().any(self_loop));

    let out = tdck(&[
        "graph", "--input", &data, "--assignments", &assignments, "--centroids", &sb.arg("c/centroids.csv"),
        "--gamma", "0.2", "--output-dir", &sb.arg("g2"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let thin = sb.read("g2/graph.dot").lines().filter(|l| l.contains("->")).count();
    assert!(thin <= dot.lines().filter(|l| l.contains("->")).count());
}

fn self_loop(line: &str) -> bool {
    match line.trim().split_once(" -> ") {
        Some((a, rest)) => rest.split([' ', ';']).next() == Some(a),
        None => false,
    }
}

#[test]
fn simple_kmeans_recovers_two_blobs() {
    let sb = Sandbox::new();
    let data = sb.synth("entities = 5\ntimestamps = 8\neras = 1\ntracks = 2\ndimension = 3\nseparation = 12\nstddev = 0.3\nseed = 4\n");
    let out = tdck(&[
        "cluster", "--input", &data, "--algorithm", "simple", "--clusters", "2", "--truth", &sb.arg("s/truth.csv"),
        "--output-dir", &sb.arg("c"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("ARI=1.00000000000"), "{}", stdout(&out));
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let files = ["assignments.csv", "centroids.csv", "metrics.csv"];
    let mut seen = Vec::new();
    for dir in ["a", "b"] {
        let out = tdck(&["cluster", "--input", &data, "--clusters", "4", "--seed", "11", "--output-dir", &sb.arg(dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        seen.push(bytes(&sb.path(dir), &files));
    }
    assert_eq!(seen[0], seen[1]);

    // The environment seed is a fallback for --seed.
    let out = tdck_env(&["cluster", "--input", &data, "--clusters", "4", "--output-dir", &sb.arg("env")], &[("TDCK_SEED", "11")]);
    assert_eq!(code(&out), 0);
    assert_eq!(bytes(&sb.path("env"), &files), seen[0]);
    let out = tdck(&["cluster", "--input", &data, "--clusters", "4", "--output-dir", &sb.arg("zero")]);
    assert_eq!(code(&out), 0);
    assert_ne!(bytes(&sb.path("zero"), &files[2..]), seen[0][2..]);
}

#[test]
fn config_file_sits_between_flags_and_environment() {
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let cfg = sb.write("run.cfg", "# manifest\nclusters = 3\nseed = 5\nruns = 2\nbeta-pct = 1.5\n");
    let run = |dir: &str, extra: &[&str], env: &[(&str, &str)]| {
        let mut args = vec!["cluster", "--config", &cfg, "--input", &data, "--output-dir"];
        let out_dir = sb.arg(dir);
        args.push(&out_dir);
        args.extend_from_slice(extra);
        let out = tdck_env(&args, env);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        sb.read(&format!("{dir}/metrics.csv"))
    };
    let from_file = run("f", &[], &[("TDCK_SEED", "99")]);
    assert_eq!(from_file.lines().count(), 3);
    assert!(from_file.lines().nth(1).unwrap().starts_with("0,5,"));
    assert!(sb.read("f/centroids.csv").lines().count() == 4);

    let overridden = run("o", &["--seed", "8", "--clusters", "2"], &[]);
    assert!(overridden.lines().nth(1).unwrap().starts_with("0,8,"));
    assert_eq!(sb.read("o/centroids.csv").lines().count(), 3);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let out = tdck(&[
        "sweep", "--input", &data, "--clusters", "4", "--runs", "2", "--param", "beta", "--from", "0", "--to", "0.017",
        "--step", "0.0005", "--output-dir", &sb.arg("w"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = sb.read("w/sweep.csv");
    assert!(csv.starts_with("value,J_mean,J_sd,MDvar_mean,MDvar_sd,Tvar_mean,Tvar_sd,ShaP_mean,ShaP_sd\n"));
    assert_eq!(csv.lines().count(), 1 + 35);
    assert_eq!(sb.read("w/sweep_runs.csv").lines().count(), 1 + 35 * 2);
    let text = stdout(&out);
    assert!(text.starts_with("suggested beta = ") || text.starts_with("no intersection"), "{text}");

    let out = tdck(&[
        "sweep", "--input", &data, "--clusters", "3", "--runs", "1", "--param", "alpha", "--from", "-1", "--to", "1",
        "--step", "0.5", "--output-dir", &sb.arg("a"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(sb.read("a/sweep.csv").lines().count(), 1 + 5);
}

#[test]
fn constant_curves_report_no_intersection() {
    // With beta = 0 the width has no effect, so every curve is flat.
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let out = tdck(&[
        "sweep", "--input", &data, "--clusters", "3", "--runs", "2", "--beta", "0", "--param", "delta", "--from", "1",
        "--to", "3", "--step", "1", "--output-dir", &sb.arg("w"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "no intersection");
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn panel_preprocessing_is_accepted() {
    let sb = Sandbox::new();
    let data = sb.write(
        "raw.csv",
        "country,year,gdp,flag\nA,1990,1.0,3\nA,1991,2.0,3\nA,1992,NA,3\nB,1990,5.0,3\nB,1991,7.0,3\nB,1992,9.0,3\n",
    );
    let out = tdck(&["cluster", "--input", &data, "--preprocess", "panel", "--clusters", "2", "--output-dir", &sb.arg("p")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("dropped 1 rows") && err.contains("flag"), "{err}");
    assert_eq!(sb.read("p/assignments.csv").lines().count(), 6);
}

#[test]
fn exit_codes_follow_the_contract() {
    let sb = Sandbox::new();
    let data = sb.synth(SMALL);
    let usage: &[&[&str]] = &[
        &["cluster", "--bogus"],
        &["cluster", "--input", &data, "--alpha", "3"],
        &["cluster", "--input", &data, "--algorithm", "tck", "--beta", "0.1"],
        &["cluster", "--input", &data, "--algorithm", "nope"],
        &["cluster", "--input", &data, "--beta", "0.1", "--beta-pct", "2"],
        &["sweep", "--input", &data, "--param", "beta", "--from", "1", "--to", "0", "--step", "0.1"],
        &["sweep", "--input", &data, "--param", "delta", "--from", "0", "--to", "1", "--step", "0.5"],
        &["graph", "--input", &data, "--assignments", &data, "--gamma", "1.5"],
        &["cluster"],
    ];
    for args in usage {
        assert_eq!(code(&tdck(args)), 1, "{args:?}");
    }
    let cfg = sb.write("bad.cfg", "clusters = 2\nwidth = 4\n");
    assert_eq!(code(&tdck(&["cluster", "--config", &cfg, "--input", &data])), 1);

    let malformed = sb.write("bad.csv", "entity,time,x\na,notatime,1\n");
    let wrong = sb.write("wrong.csv", "entity,timestamp,cluster\nzz,1960,0\n");
    let data_errors: &[&[&str]] = &[
        &["cluster", "--input", &sb.arg("missing.csv")],
        &["cluster", "--input", &malformed],
        &["cluster", "--input", &data, "--clusters", "500"],
        &["metrics", "--input", &data, "--assignments", &wrong],
        &["graph", "--input", &data, "--assignments", &sb.arg("missing.csv")],
    ];
    for args in data_errors {
        let out = tdck(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error: "));
    }
    assert_eq!(code(&tdck(&["--help"])), 0);
    assert_eq!(code(&tdck(&["--version"])), 0);
}
