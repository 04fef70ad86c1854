//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Oracles here are written independently of the library
//! code paths they check.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sector_relations::cf::{
    als_factorize_traced, kendall_tau, pearson_similarity, spearman_rho, AlsConfig, RatingsMatrix,
};
use sector_relations::dataset::{
    generate_synthetic, SectorCountDistribution, SyntheticConfig, TransactionDatabase,
};
use sector_relations::engines::{extract_relations, Engine};
use sector_relations::eval::{self, GroundTruthLabels, RankedModel, Rankings};
use sector_relations::fim::{mine_frequent, mine_frequent_naive, MinSupport};
use sector_relations::relations::RelationSet;

fn criterion(name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{name}: {detail}");
}

fn random_database(rng: &mut ChaCha8Rng) -> (TransactionDatabase, usize) {
    let n_items = rng.random_range(1..=12);
    let n_records = rng.random_range(1..=50);
    let mut catalog = sector_relations::dataset::SectorCatalog::new();
    for i in 0..n_items {
        catalog.insert(&format!("S{i:02}"));
    }
    let records = (0..n_records)
        .map(|c| {
            let size = rng.random_range(1..=n_items);
            let sectors = rand::seq::index::sample(rng, n_items, size)
                .into_iter()
                .collect();
            sector_relations::dataset::CompanyRecord {
                company_id: format!("c{c}"),
                sectors,
            }
        })
        .collect();
    let db = TransactionDatabase::new(catalog, records).expect("valid random db");
    (db, n_records)
}

#[test]
fn negfin_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    let mut checked = 0usize;
    for _ in 0..200 {
        let (db, n_records) = random_database(&mut rng);
        let min_support = rng.random_range(1..=10.min(n_records));
        let fast = mine_frequent(&db, min_support).expect("negfin");
        let naive = mine_frequent_naive(&db, min_support).expect("oracle");
        // canonical ordering on both sides makes set identity an equality
        assert_eq!(fast, naive, "db with min_support {min_support}");
        checked += fast.len();
    }
    let elapsed = started.elapsed();
    let ok = elapsed.as_secs_f64() < 10.0;
    criterion(
        "negfin_oracle_equivalence",
        ok,
        &format!("200 databases, {checked} itemsets compared, took {elapsed:?}"),
    );
}

/// Definitional tau oracle: sign products over explicit pair enumeration.
fn tau_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for a in 0..n {
        for b in a + 1..n {
            let s = (x[a] - x[b]) * (y[a] - y[b]);
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    (concordant - discordant) as f64 / (n * (n - 1) / 2) as f64
}

/// Rank materialization by counting: rank = 1 + #smaller + (#equal - 1)/2.
fn rho_oracle(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64], i: usize| -> f64 {
        let smaller = v.iter().filter(|&&w| w < v[i]).count();
        let equal = v.iter().filter(|&&w| w == v[i]).count();
        1.0 + smaller as f64 + (equal as f64 - 1.0) / 2.0
    };
    let n = x.len() as f64;
    let sum_d2: f64 = (0..x.len())
        .map(|i| {
            let d = rank(x, i) - rank(y, i);
            d * d
        })
        .sum();
    1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if rng.random::<bool>() {
        (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect()
    } else {
        // coarse integer grid to force heavy ties
        (0..n).map(|_| f64::from(rng.random_range(0..4))).collect()
    }
}

#[test]
fn correlation_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut worst: f64 = 0.0;
    for round in 0..500 {
        let n = rng.random_range(2..=40);
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);

        let tau = kendall_tau(&x, &y).expect("tau");
        let tau_ref = tau_oracle(&x, &y);
        worst = worst.max((tau - tau_ref).abs());
        assert!(
            (tau - tau_ref).abs() <= 1e-12,
            "round {round}: tau {tau} vs oracle {tau_ref}"
        );
        assert_eq!(tau, kendall_tau(&y, &x).unwrap(), "tau symmetry");
        assert!((-1.0..=1.0).contains(&tau), "tau bounds: {tau}");

        let rho = spearman_rho(&x, &y).expect("rho");
        let rho_ref = rho_oracle(&x, &y);
        worst = worst.max((rho - rho_ref).abs());
        assert!(
            (rho - rho_ref).abs() <= 1e-12,
            "round {round}: rho {rho} vs oracle {rho_ref}"
        );
        assert_eq!(rho, spearman_rho(&y, &x).unwrap(), "rho symmetry");
        assert!((-1.0..=1.0).contains(&rho), "rho bounds: {rho}");

        // pearson pair as two rows of a random matrix, against an explicit
        // evaluation of the adjusted-cosine formula
        let m = rng.random_range(3..=8);
        let cols = rng.random_range(2..=40);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                if rng.random::<bool>() {
                    (0..cols).map(|_| f64::from(rng.random::<bool>())).collect()
                } else {
                    (0..cols).map(|_| rng.random::<f64>()).collect()
                }
            })
            .collect();
        let matrix = RatingsMatrix::from_rows(&rows).unwrap();
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);

        let companies: Vec<usize> = (0..cols).collect();
        let means: Vec<f64> = companies
            .iter()
            .map(|&u| (0..m).map(|r| rows[r][u]).sum::<f64>() / m as f64)
            .collect();
        let num: f64 = companies
            .iter()
            .map(|&u| (rows[i][u] - means[u]) * (rows[j][u] - means[u]))
            .sum();
        let den_i: f64 = companies
            .iter()
            .map(|&u| (rows[i][u] - means[u]).powi(2))
            .sum();
        let den_j: f64 = companies
            .iter()
            .map(|&u| (rows[j][u] - means[u]).powi(2))
            .sum();

        let got = pearson_similarity(&matrix, i, j).expect("in range");
        match got {
            None => assert!(
                den_i == 0.0 || den_j == 0.0,
                "round {round}: undefined without zero norm"
            ),
            Some(v) => {
                let expected = num / (den_i.sqrt() * den_j.sqrt());
                worst = worst.max((v - expected).abs());
                assert!(
                    (v - expected).abs() <= 1e-12,
                    "round {round}: pearson {v} vs oracle {expected}"
                );
                assert!((-1.0..=1.0).contains(&v), "pearson bounds: {v}");
            }
        }
        assert_eq!(
            pearson_similarity(&matrix, i, j).unwrap(),
            pearson_similarity(&matrix, j, i).unwrap(),
            "pearson symmetry"
        );
    }
    criterion(
        "correlation_oracles",
        true,
        &format!("worst deviation {worst:e}"),
    );
}

#[test]
fn rank_measure_identities() {
    let idents = [
        vec![1.0, 2.0, 3.0],
        vec![0.5, 2.5, 7.0, 9.0, 11.0],
        (0..20).map(f64::from).collect::<Vec<_>>(),
    ];
    let mut ok = true;
    for x in &idents {
        let reversed: Vec<f64> = x.iter().rev().copied().collect();
        ok &= kendall_tau(x, x).unwrap() == 1.0;
        ok &= spearman_rho(x, x).unwrap() == 1.0;
        ok &= kendall_tau(x, &reversed).unwrap() == -1.0;
        ok &= spearman_rho(x, &reversed).unwrap() == -1.0;
    }
    let tau = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
    let rho = spearman_rho(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
    ok &= tau == 1.0 / 3.0;
    ok &= rho == 0.5;
    criterion(
        "rank_measure_identities",
        ok,
        &format!("worked cases gave tau {tau}, rho {rho}"),
    );
}

#[test]
fn als_descent_and_recovery() {
    // monotone objective across half-steps on 20 seeded runs
    let mut rng = ChaCha8Rng::seed_from_u64(0xA15);
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let m = rng.random_range(4..=10);
        let n = rng.random_range(4..=14);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| f64::from(rng.random::<bool>())).collect())
            .collect();
        let y = RatingsMatrix::from_rows(&rows).unwrap();
        let config = AlsConfig {
            latent_dim: rng.random_range(1..=3.min(m).min(n)),
            lambda: [0.01, 0.1, 1.0][seed as usize % 3],
            iterations: 12,
            seed,
        };
        let (_, trace) = als_factorize_traced(&y, &config).expect("als");
        for window in trace.windows(2) {
            worst_rise = worst_rise.max(window[1] - window[0]);
            assert!(
                window[1] <= window[0] + 1e-9,
                "seed {seed}: objective rose {} -> {}",
                window[0],
                window[1]
            );
        }
    }

    // planted rank-2 recovery
    let u_star = [
        [0.9, -0.4],
        [0.3, 1.2],
        [-0.7, 0.5],
        [1.1, 0.2],
        [0.4, -0.9],
        [-0.2, 0.8],
        [0.6, 0.6],
    ];
    let p_star = [
        [0.8, -0.3, 1.0, 0.2, -0.6, 0.4, 0.9, -0.1, 0.5],
        [-0.5, 0.7, 0.1, 1.1, 0.3, -0.8, 0.2, 0.6, -0.4],
    ];
    let rows: Vec<Vec<f64>> = u_star
        .iter()
        .map(|u| {
            (0..9)
                .map(|c| u[0] * p_star[0][c] + u[1] * p_star[1][c])
                .collect()
        })
        .collect();
    let y = RatingsMatrix::from_rows(&rows).unwrap();
    let config = AlsConfig {
        latent_dim: 2,
        lambda: 1e-8,
        iterations: 120,
        seed: 11,
    };
    let (model, _) = als_factorize_traced(&y, &config).expect("als");
    let mut sq = 0.0;
    for (m, row) in rows.iter().enumerate() {
        for (n, &target) in row.iter().enumerate() {
            let d = sector_relations::cf::predict(&model, m, n).unwrap() - target;
            sq += d * d;
        }
    }
    let rmse = (sq / (rows.len() * rows[0].len()) as f64).sqrt();
    let ok = rmse <= 1e-6;
    criterion(
        "als_descent_and_recovery",
        ok,
        &format!("worst half-step rise {worst_rise:e}, planted rmse {rmse:e}"),
    );
}

fn planted_corpus() -> (TransactionDatabase, RelationSet) {
    let config = SyntheticConfig {
        n_blocks: 4,
        sectors_per_block: 5,
        n_companies: 2000,
        sectors_per_company: SectorCountDistribution::Uniform { min: 2, max: 4 },
        cross_block_noise: 0.05,
    };
    generate_synthetic(&config, 42).expect("planted corpus")
}

fn rankings_of(relations: &RelationSet, db: &TransactionDatabase) -> Rankings {
    relations
        .sources()
        .map(|source| {
            let targets = relations
                .ranked(source)
                .iter()
                .map(|&(t, _)| db.catalog().id(t).to_string())
                .collect();
            (db.catalog().id(source).to_string(), targets)
        })
        .collect()
}

fn labels_of(truth: &RelationSet, db: &TransactionDatabase) -> GroundTruthLabels {
    let mut labels = GroundTruthLabels::new();
    for i in 0..db.num_sectors() {
        for j in 0..db.num_sectors() {
            if i != j {
                labels
                    .insert(db.catalog().id(i), db.catalog().id(j), truth.contains(i, j))
                    .unwrap();
            }
        }
    }
    labels
}

#[test]
fn end_to_end_planted_recovery() {
    let started = Instant::now();
    let (db, truth) = planted_corpus();
    let labels = labels_of(&truth, &db);

    let fim = extract_relations(
        &db,
        &Engine::Fim {
            min_support: MinSupport::Relative(0.0005),
        },
        3,
    )
    .expect("fim engine");
    let fim_p3 = eval::precision_at_k(&rankings_of(&fim.relations, &db), &labels, 3).unwrap();

    let pearson = extract_relations(
        &db,
        &Engine::Similarity {
            measure: sector_relations::cf::Measure::Pearson,
            kendall_tau_b: false,
        },
        3,
    )
    .expect("pearson engine");
    let pearson_p3 =
        eval::precision_at_k(&rankings_of(&pearson.relations, &db), &labels, 3).unwrap();

    let elapsed = started.elapsed();
    let ok = fim_p3 >= 0.9 && pearson_p3 >= 0.7 && elapsed.as_secs_f64() < 30.0;
    criterion(
        "end_to_end_planted_recovery",
        ok,
        &format!("fim P@3 {fim_p3:.3}, pearson P@3 {pearson_p3:.3}, took {elapsed:?}"),
    );
}

#[test]
fn metric_fixtures_and_report_layout() {
    let rankings: Rankings = BTreeMap::from([(
        "s".to_string(),
        vec!["a".to_string(), "b".to_string(), "c".to_string()],
    )]);
    let mut labels = GroundTruthLabels::new();
    labels.insert("s", "a", true).unwrap();
    labels.insert("s", "c", true).unwrap();

    let p3 = eval::precision_at_k(&rankings, &labels, 3).unwrap();
    let ap3 = eval::map_at_k(&rankings, &labels, 3).unwrap();

    let mrr_rankings: Rankings = BTreeMap::from([
        ("s1".to_string(), vec!["a".into(), "x".into(), "y".into(), "z".into()]),
        ("s2".to_string(), vec!["x".into(), "b".into(), "y".into(), "z".into()]),
        ("s3".to_string(), vec!["x".into(), "y".into(), "z".into(), "c".into()]),
    ]);
    let mut mrr_labels = GroundTruthLabels::new();
    mrr_labels.insert("s1", "a", true).unwrap();
    mrr_labels.insert("s2", "b", true).unwrap();
    mrr_labels.insert("s3", "c", true).unwrap();
    let rr = eval::mrr(&mrr_rankings, &mrr_labels).unwrap();

    let models = [RankedModel {
        name: "fixture".to_string(),
        rankings,
    }];
    let report = eval::evaluate(&models, &labels, &[5, 10]).unwrap();
    let table = report.render_table();
    let layout_ok = ["P@5", "P@10", "MAP@5", "MAP@10", "MRR"]
        .iter()
        .all(|column| table.contains(column));

    let ok = (p3 - 2.0 / 3.0).abs() <= 1e-12
        && (ap3 - (1.0 + 2.0 / 3.0) / 2.0).abs() <= 1e-12
        && (rr - (1.0 + 0.5 + 0.25) / 3.0).abs() <= 1e-12
        && layout_ok;
    criterion(
        "metric_fixtures_and_report_layout",
        ok,
        &format!("P@3 {p3}, AP@3 {ap3}, MRR {rr}, layout_ok {layout_ok}"),
    );
}

#[test]
fn qualitative_ordering_fim_beats_als_on_map5() {
    let (db, truth) = planted_corpus();
    let labels = labels_of(&truth, &db);

    let fim = extract_relations(
        &db,
        &Engine::Fim {
            min_support: MinSupport::Relative(0.0005),
        },
        5,
    )
    .expect("fim engine");
    let als = extract_relations(
        &db,
        &Engine::Als(AlsConfig {
            latent_dim: 8,
            lambda: 0.1,
            iterations: 15,
            seed: 42,
        }),
        5,
    )
    .expect("als engine");

    let fim_map5 = eval::map_at_k(&rankings_of(&fim.relations, &db), &labels, 5).unwrap();
    let als_map5 = eval::map_at_k(&rankings_of(&als.relations, &db), &labels, 5).unwrap();
    let ok = fim_map5 > als_map5;
    criterion(
        "qualitative_ordering_fim_beats_als_on_map5",
        ok,
        &format!("fim MAP@5 {fim_map5:.3} vs als MAP@5 {als_map5:.3} (expected direction, single seed)"),
    );
}

#[test]
fn pipeline_determinism_byte_identical_artifacts() {
    let bin = env!("CARGO_BIN_EXE_sectors");
    let root = tempfile::tempdir().unwrap();
    let shared = root.path().join("shared");
    std::fs::create_dir_all(&shared).unwrap();

    let run = |args: &[&str]| {
        let output = Command::new(bin)
            .args(args)
            .env_remove("SECTORS_CONFIG")
            .output()
            .expect("spawn sectors");
        assert!(
            output.status.success(),
            "sectors {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    // stage 1: synth twice into separate directories
    for dir in ["synth1", "synth2"] {
        let out = root.path().join(dir);
        run(&[
            "synth",
            "--out-dir",
            out.to_str().unwrap(),
            "--blocks",
            "3",
            "--sectors-per-block",
            "4",
            "--companies",
            "400",
            "--sectors-per-company",
            "uniform:2:3",
            "--noise",
            "0.1",
            "--seed",
            "7",
        ]);
    }

    // shared input for the downstream stages so headers match too
    std::fs::copy(
        root.path().join("synth1/dataset.csv"),
        shared.join("dataset.csv"),
    )
    .unwrap();
    std::fs::copy(
        root.path().join("synth1/labels.tsv"),
        shared.join("labels.tsv"),
    )
    .unwrap();
    let dataset = shared.join("dataset.csv");
    let labels = shared.join("labels.tsv");

    for dir in ["run1", "run2"] {
        let out = root.path().join(dir);
        let out = out.to_str().unwrap();
        let dataset = dataset.to_str().unwrap();
        run(&["stats", "--input", dataset, "--out-dir", out]);
        run(&[
            "mine",
            "--input",
            dataset,
            "--out-dir",
            out,
            "--min-support",
            "2",
        ]);
        run(&[
            "similar", "--input", dataset, "--out-dir", out, "--measure", "spearman",
        ]);
        run(&[
            "als", "--input", dataset, "--out-dir", out, "--latent-dim", "4",
            "--iterations", "8", "--seed", "7", "--augment",
        ]);
        for engine in ["fim", "pearson", "kendall", "spearman", "als"] {
            run(&[
                "extract",
                "--input",
                dataset,
                "--out-dir",
                out,
                "--engine",
                engine,
                "--k",
                "3",
                "--latent-dim",
                "4",
                "--iterations",
                "8",
                "--seed",
                "7",
                "--scores-out",
            ]);
        }
        run(&[
            "candidates",
            "--out-dir",
            out,
            "--scores",
            &format!("{out}/scores_fim.tsv"),
            "--scores",
            &format!("{out}/scores_pearson.tsv"),
            "--threshold",
            "0.3",
        ]);
        run(&[
            "evaluate",
            "--out-dir",
            out,
            "--model",
            &format!("fim={out}/relations_fim.tsv"),
            "--model",
            &format!("als={out}/relations_als.tsv"),
            "--labels",
            labels.to_str().unwrap(),
            "--ks",
            "3,5",
        ]);
    }

    let mut compared = 0usize;
    let mut mismatched = Vec::new();
    for pair in [("synth1", "synth2"), ("run1", "run2")] {
        let left_dir = root.path().join(pair.0);
        let right_dir = root.path().join(pair.1);
        for entry in std::fs::read_dir(&left_dir).unwrap() {
            let name = entry.unwrap().file_name();
            let left = std::fs::read(left_dir.join(&name)).unwrap();
            let right = std::fs::read(right_dir.join(&name)).unwrap();
            compared += 1;
            // candidates/evaluate headers cite the per-run model paths;
            // compare those on data lines, everything else byte-for-byte
            let name_str = name.to_string_lossy().to_string();
            let identical = if name_str == "candidates.tsv" {
                strip_comments(&left) == strip_comments(&right)
            } else {
                left == right
            };
            if !identical {
                mismatched.push(name_str);
            }
        }
    }
    let ok = mismatched.is_empty() && compared >= 16;
    criterion(
        "pipeline_determinism_byte_identical_artifacts",
        ok,
        &format!("compared {compared} artifacts, mismatched: {mismatched:?}"),
    );
}

fn strip_comments(bytes: &[u8]) -> Vec<u8> {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}
