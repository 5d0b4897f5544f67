use std::path::PathBuf;

use tailsort::cli::run;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tailsort-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs the CLI with `--out` pointing at a scratch file and returns the file.
fn run_to(name: &str, args: &[&str]) -> (i32, String) {
    let out = scratch(name);
    let mut argv = vec!["tailsort".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".into(), out.display().to_string()]);
    let code = run(argv);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn oracle_prints_unreduced_rationals() {
    let (code, text) = run_to("oracle.json", &["oracle-exact", "--n", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["distribution"]["3"], "6/27");
    assert_eq!(v["distribution"]["5"], "18/27");
    assert_eq!(v["distribution"]["9"], "3/27");
    assert_eq!(v["mean"], "5");
}

#[test]
fn bounds_table_row() {
    let (code, text) = run_to(
        "ch4.csv",
        &[
            "bounds-table",
            "--variant",
            "ch4",
            "--mu",
            "1",
            "--delta",
            "2.71828",
        ],
    );
    assert_eq!(code, 0);
    let body = rows(&text);
    assert_eq!(body[0], "variant,mu,delta,bound");
    let bound: f64 = body[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((bound - 0.256_881).abs() < 1e-6, "{bound}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "tail-estimate",
        "--kind",
        "f_tail",
        "--n",
        "2",
        "--threshold",
        "4",
        "--trials",
        "100000",
        "--seed",
        "7",
    ];
    let (_, a) = run_to("rep-a.csv", &args);
    let (_, b) = run_to("rep-a.csv", &args);
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_rows() {
    let base = [
        "tail-estimate",
        "--kind",
        "g_tail",
        "--n",
        "64",
        "--c",
        "0.25",
        "--trials",
        "20000",
        "--seed",
        "11",
    ];
    let one: Vec<&str> = base.iter().copied().chain(["--threads", "1"]).collect();
    let eight: Vec<&str> = base.iter().copied().chain(["--threads", "8"]).collect();
    let (c1, a) = run_to("t1.csv", &one);
    let (c8, b) = run_to("t8.csv", &eight);
    assert_eq!((c1, c8), (0, 0));
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn embedded_command_reproduces_rows() {
    let (_, first) = run_to(
        "orig.csv",
        &["trie-stats", "--n", "32", "--trials", "200", "--seed", "99"],
    );
    let command = first
        .lines()
        .find_map(|l| l.strip_prefix("# command: "))
        .unwrap();
    let args: Vec<&str> = command.split_whitespace().skip(1).collect();
    let (code, again) = run_to("again.csv", &args);
    assert_eq!(code, 0);
    assert_eq!(rows(&first), rows(&again));
}

#[test]
fn env_seed_is_the_default() {
    let (_, pinned) = run_to(
        "seeded.csv",
        &[
            "sort-cost",
            "--n",
            "64",
            "--trials",
            "3",
            "--seed",
            "2047954983",
        ],
    );
    let (_, default) = run_to("default.csv", &["sort-cost", "--n", "64", "--trials", "3"]);
    assert_eq!(rows(&pinned), rows(&default));
}

#[test]
fn exit_codes() {
    assert_eq!(run_to("x1", &["tail-estimate", "--bogus"]).0, 2);
    assert_eq!(run_to("x2", &["no-such-command"]).0, 2);
    assert_eq!(run_to("x3", &["oracle-exact", "--n", "13"]).0, 3);
    assert_eq!(
        run_to(
            "x4",
            &[
                "trie-stats",
                "--n",
                "8",
                "--depth-cap",
                "2",
                "--trials",
                "3"
            ]
        )
        .0,
        3
    );
    assert_eq!(
        run_to("x5", &["bounds-table", "--variant", "ch2", "--delta", "3"]).0,
        2
    );
    assert_eq!(
        run_to(
            "x6",
            &[
                "tail-estimate",
                "--kind",
                "f_tail",
                "--n",
                "4",
                "--threshold",
                "4",
                "--trials",
                "0"
            ]
        )
        .0,
        2
    );
}

#[test]
fn qs_compare_contrast() {
    let (code, text) = run_to(
        "qs.json",
        &[
            "qs-compare",
            "--n",
            "32",
            "--trials",
            "200000",
            "--format",
            "json",
        ],
    );
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let arms = v["rows"].as_array().unwrap();
    assert_eq!(arms[0]["arm"], "quick_sort");
    assert!(arms[0]["p_hat"].as_f64().unwrap() >= 1.0 / 64.0);
    assert_eq!(arms[1]["arm"], "bucket_sort");
    assert_eq!(arms[1]["successes"], 0);
}
