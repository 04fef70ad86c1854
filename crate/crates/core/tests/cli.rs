//! CLI behavior: exit codes, config precedence, and the documented
//! subcommand examples.

use std::path::Path;
use std::process::{Command, Output};

fn sectors(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectors"))
        .args(args)
        .env_remove("SECTORS_CONFIG")
        .output()
        .expect("spawn sectors")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

fn table1_fixture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("table1.csv");
    write(
        &path,
        concat!(
            "1718612,\"030000000,029003000\",\"Printing - Publishing, Cinema - Theatre\"\n",
            "1718051,20009000,Building\n",
            "1717919,003000000,Electric & Electronic\n",
            "1719337,\"040001000,020011000\",\"Waste Management, Treatment\"\n",
            "1718896,\"001000000,001005000,023003000,026007000\",\n",
            "1719789,018000000,Pharmaceuticals Industry\n",
            "1737591,019000000,Advertising\n",
        ),
    );
    path
}

#[test]
fn stats_on_table1_fixture_counts_seven_companies() {
    let dir = tempfile::tempdir().unwrap();
    let input = table1_fixture(dir.path());
    let out = sectors(&[
        "stats",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"n_companies\": 7"), "{stdout}");

    let json = std::fs::read_to_string(dir.path().join("stats.json")).unwrap();
    assert!(json.contains("\"sd_convention\": \"population\""));
    assert!(dir.path().join("histogram.tsv").exists());
}

#[test]
fn relative_min_support_matches_absolute() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.csv");
    // [{A,B},{A,B,C},{B,C}]
    write(&input, "c1,\"A,B\"\nc2,\"A,B,C\"\nc3,\"B,C\"\n");

    let rel_dir = dir.path().join("rel");
    let abs_dir = dir.path().join("abs");
    let run = |out_dir: &Path, args: &[&str]| {
        let mut full = vec![
            "mine",
            "--input",
            input.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ];
        full.extend_from_slice(args);
        let out = sectors(&full);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&rel_dir, &["--min-support-frac", "0.6666666666666666"]);
    run(&abs_dir, &["--min-support", "2"]);

    let rel = std::fs::read_to_string(rel_dir.join("itemsets.tsv")).unwrap();
    let abs = std::fs::read_to_string(abs_dir.join("itemsets.tsv")).unwrap();
    assert_eq!(rel, abs);
    // {B}:3 leads; pairs {A,B}:2 and {B,C}:2 survive
    assert!(rel.contains("B\t3"));
    assert!(rel.contains("A,B\t2"));
}

#[test]
fn invalid_config_exits_nonzero_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    // unknown engine
    let input = dir.path().join("tiny.csv");
    write(&input, "c1,\"A,B\"\n");
    let out = sectors(&[
        "extract",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--engine",
        "bogus",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown engine"));
    assert!(!out_dir.join("relations_bogus.tsv").exists());

    // missing input path fails before writing anything
    let out = sectors(&[
        "mine",
        "--input",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--min-support",
        "1",
    ]);
    assert!(!out.status.success());
    assert!(!out_dir.join("itemsets.tsv").exists());

    // min_support out of range propagates the module diagnostic
    let out = sectors(&[
        "mine",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--min-support",
        "5",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside 1..="));
    assert!(!out_dir.join("itemsets.tsv").exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.csv");
    write(&input, "c1,\"A,B\"\nc2,\"A,B\"\nc3,B\n");
    let config = dir.path().join("sectors.conf");
    write(
        &config,
        &format!(
            "input = {}\nout_dir = {}\nmin_support = 2\n",
            input.display(),
            dir.path().join("from_config").display()
        ),
    );

    // config supplies everything
    let out = sectors(&["--config", config.to_str().unwrap(), "mine"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_config/itemsets.tsv").exists());

    // a flag overrides the config's min_support (3 keeps only {A,B} pair out)
    let flag_dir = dir.path().join("from_flag");
    let out = sectors(&[
        "--config",
        config.to_str().unwrap(),
        "mine",
        "--out-dir",
        flag_dir.to_str().unwrap(),
        "--min-support",
        "3",
    ]);
    assert!(out.status.success());
    let itemsets = std::fs::read_to_string(flag_dir.join("itemsets.tsv")).unwrap();
    assert!(itemsets.contains("B\t3"));
    assert!(!itemsets.contains("A,B"));

    // the env var points at the same config
    let out = Command::new(env!("CARGO_BIN_EXE_sectors"))
        .args(["mine", "--out-dir", dir.path().join("from_env").to_str().unwrap()])
        .env("SECTORS_CONFIG", &config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_env/itemsets.tsv").exists());
}

#[test]
fn synth_extract_evaluate_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let ok = |out: Output| {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(sectors(&[
        "synth", "--out-dir", out_dir, "--blocks", "3", "--sectors-per-block", "4",
        "--companies", "500", "--sectors-per-company", "uniform:2:3",
        "--noise", "0.05", "--seed", "11",
    ]));
    let dataset = format!("{out_dir}/dataset.csv");
    ok(sectors(&[
        "extract", "--input", &dataset, "--out-dir", out_dir,
        "--engine", "fim", "--k", "3",
    ]));
    let out = ok(sectors(&[
        "evaluate", "--out-dir", out_dir,
        "--model", &format!("fim={out_dir}/relations_fim.tsv"),
        "--labels", &format!("{out_dir}/labels.tsv"),
        "--ks", "3",
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("P@3"), "{stdout}");
    assert!(dir.path().join("report.txt").exists());
    assert!(dir.path().join("metrics_long.tsv").exists());

    // planted structure is easy: fim should be essentially perfect
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let fim_line = report.lines().find(|l| l.starts_with("fim")).unwrap();
    let p3: f64 = fim_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(p3 > 0.8, "fim P@3 {p3} in\n{report}");
}

#[test]
fn evaluate_binarize_top_truncates_rankings() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.tsv");
    // first relevant target sits at rank 3; binarizing to top 2 hides it
    write(&model, "s\tx\t1\t0.9\ns\ty\t2\t0.8\ns\ta\t3\t0.7\n");
    let labels = dir.path().join("labels.tsv");
    write(&labels, "s\ta\t1\n");

    let run = |extra: &[&str]| -> String {
        let mut args = vec![
            "evaluate",
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--model",
        ];
        let spec = format!("m={}", model.display());
        args.push(&spec);
        args.extend_from_slice(&["--labels", labels.to_str().unwrap(), "--ks", "3"]);
        args.extend_from_slice(extra);
        let out = sectors(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };

    let full = run(&[]);
    assert!(full.contains("0.333"), "{full}");
    let truncated = run(&["--binarize-top", "2"]);
    assert!(truncated.contains("0.000"), "{truncated}");
}

#[test]
fn candidates_from_score_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("scores_a.tsv");
    let b = dir.path().join("scores_b.tsv");
    write(&a, "A\tB\t1\t10\nA\tC\t2\t2\n");
    write(&b, "A\tB\t1\t100\nB\tC\t2\t50\n");
    let out = sectors(&[
        "candidates",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--scores",
        a.to_str().unwrap(),
        "--scores",
        b.to_str().unwrap(),
        "--threshold",
        "0.9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let candidates = std::fs::read_to_string(dir.path().join("candidates.tsv")).unwrap();
    let data: Vec<&str> = candidates.lines().filter(|l| !l.starts_with('#')).collect();
    // only (A, B) is max in both models -> combined 1.0 > 0.9
    assert_eq!(data, vec!["A\tB\t1\t1"]);
}
