use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn commgrow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commgrow"))
        .args(args)
        .env_remove("COMMGROW_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", stderr(out));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn generate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["generate", "--n", "1000", "--m", "2", "--c", "10", "--pt", "1.0", "--pc", "0.01"];
    args.extend_from_slice(extra);
    args.extend(["--out", dir.to_str().unwrap()]);
    commgrow(&args)
}

#[test]
fn generate_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = generate(tmp.path(), &["--seed", "42", "--format", "graphml", "--format", "dot"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["graph.tsv", "communities.tsv", "manifest.json", "graph.graphml", "graph.dot"] {
        assert!(tmp.path().join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["seed_source"], "given");
    assert_eq!(manifest["nodes"], 1000);
    assert_eq!(manifest["params"]["c"], 10);
    let edges = fs::read_to_string(tmp.path().join("graph.tsv")).unwrap();
    assert!(edges.starts_with("# commgrow edge list\n"));
    assert!(edges.contains("# params: n=1000 m=2 c=10 p_t=1 p_c=0.01 seed=42\n"));
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(generate(a.path(), &["--seed", "7"]).status.success());
    assert!(generate(b.path(), &["--seed", "7"]).status.success());
    for f in ["graph.tsv", "communities.tsv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn missing_seed_is_drawn_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), &[]).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_source"], "entropy");
    let seed = manifest["seed"].as_u64().unwrap();
    let header = fs::read_to_string(tmp.path().join("graph.tsv")).unwrap();
    assert!(header.contains(&format!("seed={seed}\n")));

    // the recorded seed reproduces the graph
    let again = tempfile::tempdir().unwrap();
    assert!(generate(again.path(), &["--seed", &seed.to_string()]).status.success());
    assert_eq!(
        fs::read(tmp.path().join("graph.tsv")).unwrap(),
        fs::read(again.path().join("graph.tsv")).unwrap()
    );
}

#[test]
fn seed_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_commgrow"))
        .args(["generate", "--n", "100", "--c", "3", "--out", tmp.path().to_str().unwrap()])
        .env("COMMGROW_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 99"));
}

#[test]
fn invalid_flags_name_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = commgrow(&["generate", "--n", "20", "--c", "10", "--out", dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--n"), "{}", stderr(&out));
    assert!(stderr(&out).contains("3c"));

    let out = commgrow(&["generate", "--n", "100", "--pc", "1.5", "--out", dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--pc"));
    assert!(stderr(&out).contains("[0, 1]"));

    let out = commgrow(&["generate", "--n", "100", "--m", "0", "--out", dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--m"));
}

#[test]
fn analyze_triangle() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("tri.tsv");
    fs::write(&path, "0\t1\n1\t2\n0\t2\n").unwrap();
    let report = json(&commgrow(&["analyze", "--in", path.to_str().unwrap()]));
    assert_eq!(report["avg_clustering"], 1.0);
    assert_eq!(report["avg_path_length"], 1.0);
    assert_eq!(report["apl_method"], "exact");
    assert!(report["ground_truth"].is_null());
}

#[test]
fn analyze_generated_network() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(generate(tmp.path(), &["--seed", "5"]).status.success());
    let graph = tmp.path().join("graph.tsv");
    let report = json(&commgrow(&["analyze", "--in", graph.to_str().unwrap(), "--top-k", "3"]));
    let alpha = report["alpha"].as_f64().unwrap();
    assert!((2.0..=3.0).contains(&alpha), "alpha {alpha}");
    assert_eq!(report["per_community"].as_array().unwrap().len(), 3);
    // communities.tsv next to the graph is picked up as ground truth
    assert_eq!(report["ground_truth"]["communities"], 10);

    let bare = json(&commgrow(&["analyze", "--in", graph.to_str().unwrap(), "--no-labels", "--top-k", "0"]));
    assert!(bare["ground_truth"].is_null());
    assert!(bare["per_community"].is_null());

    let sampled = json(&commgrow(&[
        "analyze",
        "--in",
        graph.to_str().unwrap(),
        "--apl-mode",
        "sampled",
        "--sources",
        "50",
    ]));
    assert_eq!(sampled["apl_method"]["sampled"]["sources"], 50);
}

#[test]
fn analyze_errors_are_distinct() {
    let tmp = tempfile::tempdir().unwrap();
    let split = tmp.path().join("split.tsv");
    fs::write(&split, "0\t1\n2\t3\n").unwrap();
    let out = commgrow(&["analyze", "--in", split.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("disconnected"));

    let missing = tmp.path().join("missing.tsv");
    let out = commgrow(&["analyze", "--in", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cannot read"));

    let garbage = tmp.path().join("garbage.tsv");
    fs::write(&garbage, "0\t1\nnot an edge\n").unwrap();
    let out = commgrow(&["analyze", "--in", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn detect_two_triangles() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("g.tsv");
    let part = tmp.path().join("p.tsv");
    let truth = tmp.path().join("truth.tsv");
    fs::write(&path, "0\t1\n1\t2\n0\t2\n3\t4\n4\t5\n3\t5\n2\t3\n").unwrap();
    fs::write(&truth, "0\t0\n1\t0\n2\t0\n3\t1\n4\t1\n5\t1\n").unwrap();
    let summary = json(&commgrow(&[
        "detect",
        "--in",
        path.to_str().unwrap(),
        "--out",
        part.to_str().unwrap(),
        "--labels",
        truth.to_str().unwrap(),
    ]));
    assert_eq!(summary["communities"], 2);
    assert!((summary["modularity"].as_f64().unwrap() - 5.0 / 14.0).abs() < 1e-12);
    assert!((summary["agreement"]["nmi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let written = fs::read_to_string(&part).unwrap();
    assert_eq!(written.lines().count(), 6);
}

#[test]
fn experiment_custom_table_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("table.csv");
    fs::write(&table, "key,n,m,c,p_t,p_c\n1,300,2,5,1.0,0.01\n2,300,2,5,0.5,1.0\n").unwrap();
    let run = |jobs: &str, name: &str| {
        let csv = tmp.path().join(name);
        let out = commgrow(&[
            "experiment",
            "--table",
            table.to_str().unwrap(),
            "--replicates",
            "2",
            "--jobs",
            jobs,
            "--base-seed",
            "3",
            "--out-csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(csv).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "key,n,m,c,p_t,p_c,replicates,completed,apl,cc,alpha,q,rd,gt_q,gt_rd,error"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn experiment_rejects_zero_replicates_and_documents_schema() {
    let out = commgrow(&["experiment", "--replicates", "0", "--base-seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--replicates"));

    let help = commgrow(&["experiment", "--help"]);
    let text = String::from_utf8(help.stdout).unwrap();
    for column in ["key", "apl", "cc", "alpha", "gt_q", "gt_rd", "error"] {
        assert!(text.contains(&format!("  {column} ")), "help lacks {column}");
    }
}

#[test]
fn bench_reports_one_row_per_size() {
    let out = commgrow(&["bench", "--sizes", "300,600,1200", "--runs", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,edges,seconds,runs");
    let sizes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sizes, ["300", "600", "1200"]);
}
