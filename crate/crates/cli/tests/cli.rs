use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hvlb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hvlb"))
        .args(args)
        .env_remove("HVLB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = hvlb(&[
            "generate",
            "--tasks",
            "30",
            "--seed",
            "11",
            "--ccr",
            "5",
            "--out",
            p(out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    // stdout carries the same document
    let o = hvlb(&["generate", "--tasks", "30", "--seed", "11", "--ccr", "5"]);
    assert_eq!(o.stdout, fs::read(&a).unwrap());
}

#[test]
fn infeasible_generation_exits_one() {
    let o = hvlb(&[
        "generate",
        "--tasks",
        "3",
        "--min-entry",
        "2",
        "--min-exit",
        "2",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds task count"));
}

#[test]
fn bad_usage_exits_one_and_help_exits_zero() {
    assert_eq!(code(&hvlb(&["schedule"])), 1);
    assert_eq!(code(&hvlb(&["frobnicate"])), 1);
    assert_eq!(code(&hvlb(&["--help"])), 0);
    assert_eq!(code(&hvlb(&["--version"])), 0);
}

#[test]
fn generate_then_schedule_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(
        code(&hvlb(&[
            "generate",
            "--tasks",
            "50",
            "--seed",
            "3",
            "--out",
            p(&g)
        ])),
        0
    );
    let out = dir.path().join("run");
    let o = hvlb(&[
        "schedule",
        "--graph",
        p(&g),
        "--alpha-step",
        "0.5",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "schedule.json",
        "metrics.csv",
        "gantt.svg",
        "curve.csv",
        "run.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let curve = fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 41);
    let o = hvlb(&[
        "validate",
        "--graph",
        p(&g),
        "--schedule",
        p(&out.join("schedule.json")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn alpha_zero_matches_hsv_file_for_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(
        code(&hvlb(&[
            "generate",
            "--tasks",
            "25",
            "--seed",
            "8",
            "--out",
            p(&g)
        ])),
        0
    );
    let run = |variant: &str| {
        let out = dir.path().join(variant);
        let o = hvlb(&[
            "schedule",
            "--graph",
            p(&g),
            "--variant",
            variant,
            "--alpha",
            "0",
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&o), 0);
        fs::read(out.join("schedule.json")).unwrap()
    };
    assert_eq!(run("hsv-cc"), run("hvlb-cc-a"));
}

#[test]
fn scheduling_failure_exits_two_and_records_it() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let gen = [
        "generate",
        "--tasks",
        "50",
        "--unconstrained",
        "--seed",
        "0",
        "--out",
        p(&g),
    ];
    assert_eq!(code(&hvlb(&gen)), 0);
    let out = dir.path().join("run");
    let o = hvlb(&[
        "schedule",
        "--graph",
        p(&g),
        "--variant",
        "hvlb-cc-b",
        "--alpha",
        "0",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 2);
    let run = fs::read_to_string(out.join("run.json")).unwrap();
    assert!(run.contains("\"failed\"") && run.contains("dequeued before predecessor"));
    assert!(!out.join("schedule.json").exists());
}

#[test]
fn gantt_draws_one_bar_per_task_and_hop() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(
        code(&hvlb(&[
            "generate",
            "--tasks",
            "20",
            "--seed",
            "5",
            "--out",
            p(&g)
        ])),
        0
    );
    let out = dir.path().join("run");
    assert_eq!(
        code(&hvlb(&[
            "schedule",
            "--graph",
            p(&g),
            "--alpha",
            "1",
            "--out",
            p(&out)
        ])),
        0
    );
    let svg = dir.path().join("chart.svg");
    let sched = out.join("schedule.json");
    assert_eq!(
        code(&hvlb(&["gantt", "--schedule", p(&sched), "--out", p(&svg)])),
        0
    );
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(&sched).unwrap()).unwrap();
    let hops: usize = doc["messages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["hops"].as_array().unwrap().len())
        .sum();
    let bars = fs::read_to_string(&svg)
        .unwrap()
        .matches("class=\"bar\"")
        .count();
    assert_eq!(bars, 20 + hops);
}

#[test]
fn experiment_config_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "experiment = \"exp3\"\ngraphs_per_cell = 1\nccrs = [1.0]\n[alpha]\nstep = 5.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hvlb(&[
        "experiment",
        "--config",
        p(&cfg),
        "--out",
        p(&out),
        "--workers",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("step = 5.0") && written.contains("graphs_per_cell = 1"));
    assert!(out.join("summary.csv").is_file());

    fs::write(&cfg, "experiment = \"exp3\"\nbogus = 1\n").unwrap();
    assert_eq!(code(&hvlb(&["experiment", "--config", p(&cfg)])), 1);
}
