//! On-disk artifact formats shared by the CLI and other front ends.
//!
//! Every artifact is plain UTF-8 text. Writers emit a `# key: value` comment
//! header (no timestamps, so reruns are byte-identical) and go through a
//! write-to-temp + atomic-rename step; readers skip comment and blank lines.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::cf::{FactorModel, SimilarityMatrix};
use crate::dataset::SectorCatalog;
use crate::error::{Error, Result};
use crate::eval::GroundTruthLabels;
use crate::fim::{FrequentItemset, PairSupports};
use crate::relations::{CandidatePair, RelationSet};

/// Key/value pairs rendered into artifact headers.
pub type HeaderPairs<'a> = &'a [(&'a str, String)];

fn render_header(pairs: HeaderPairs) -> String {
    let mut out = String::new();
    for (key, value) in pairs {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out
}

/// Writes via a temporary file in the target directory plus an atomic
/// rename, so failed runs never leave partial artifacts behind.
pub fn atomic_write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = parent.unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))
        .map(|_| ())
}

pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    atomic_write_bytes(path.as_ref(), contents.as_bytes())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data lines of an artifact: line numbers retained, comments and blanks
/// skipped.
fn data_lines(contents: &str) -> impl Iterator<Item = (u64, &str)> {
    contents
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// `item_1,...,item_k <TAB> support` rows in mining output order.
pub fn write_itemsets(
    path: impl AsRef<Path>,
    itemsets: &[FrequentItemset],
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for itemset in itemsets {
        let ids: Vec<&str> = itemset.items.iter().map(|&i| catalog.id(i)).collect();
        out.push_str(&format!("{}\t{}\n", ids.join(","), itemset.support));
    }
    write_text(path, &out)
}

/// `sector_i <TAB> sector_j <TAB> support` sorted by descending support.
pub fn write_pair_supports(
    path: impl AsRef<Path>,
    pairs: &PairSupports,
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for ((i, j), support) in pairs.sorted_by_support() {
        out.push_str(&format!("{}\t{}\t{}\n", catalog.id(i), catalog.id(j), support));
    }
    write_text(path, &out)
}

/// `sector_i <TAB> sector_j <TAB> score` for every defined pair, row-major.
pub fn write_similarity(
    path: impl AsRef<Path>,
    sim: &SimilarityMatrix,
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for i in 0..sim.dim() {
        for j in 0..sim.dim() {
            if let Some(v) = sim.get(i, j) {
                out.push_str(&format!("{}\t{}\t{}\n", catalog.id(i), catalog.id(j), v));
            }
        }
    }
    write_text(path, &out)
}

/// Defined-mask sidecar: `sector_i <TAB> sector_j <TAB> {0|1}` for every
/// pair, row-major.
pub fn write_similarity_mask(
    path: impl AsRef<Path>,
    sim: &SimilarityMatrix,
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for i in 0..sim.dim() {
        for j in 0..sim.dim() {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                catalog.id(i),
                catalog.id(j),
                u8::from(sim.is_defined(i, j))
            ));
        }
    }
    write_text(path, &out)
}

/// Dimensioned text export of a factor model: header with M, N, l, lambda
/// and seed, then row-major factor values at full round-trip precision.
pub fn write_factor_model(
    path: impl AsRef<Path>,
    model: &FactorModel,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    out.push_str(&format!(
        "m {}\nn {}\nl {}\nlambda {}\nseed {}\n",
        model.num_sectors(),
        model.num_companies(),
        model.latent_dim,
        model.lambda,
        model.seed
    ));
    out.push_str("U\n");
    for row in 0..model.num_sectors() {
        let cells: Vec<String> = model
            .item_factors
            .row(row)
            .iter()
            .map(f64::to_string)
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out.push_str("P\n");
    for row in 0..model.latent_dim {
        let cells: Vec<String> = model
            .user_factors
            .row(row)
            .iter()
            .map(f64::to_string)
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_factor_model(path: impl AsRef<Path>) -> Result<FactorModel> {
    let path = path.as_ref();
    let contents = read_to_string(path)?;
    let malformed = |line: u64, msg: String| Error::MalformedFile {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = data_lines(&contents);
    let mut scalar = |name: &str| -> Result<(u64, String)> {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| malformed(0, format!("missing {name} line")))?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| malformed(line_no, format!("expected `{name} <value>`")))?;
        if key != name {
            return Err(malformed(line_no, format!("expected {name}, found {key}")));
        }
        Ok((line_no, value.to_string()))
    };

    let m: usize = parse_scalar(path, scalar("m")?)?;
    let n: usize = parse_scalar(path, scalar("n")?)?;
    let l: usize = parse_scalar(path, scalar("l")?)?;
    let lambda: f64 = parse_scalar(path, scalar("lambda")?)?;
    let seed: u64 = parse_scalar(path, scalar("seed")?)?;

    let expect_tag = |got: Option<(u64, &str)>, tag: &str| -> Result<()> {
        match got {
            Some((_, line)) if line == tag => Ok(()),
            Some((line_no, line)) => Err(malformed(line_no, format!("expected {tag}, found {line}"))),
            None => Err(malformed(0, format!("missing {tag} section"))),
        }
    };

    let read_rows = |rows: usize, cols: usize, lines: &mut dyn Iterator<Item = (u64, &str)>| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| malformed(0, "missing factor row".into()))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| malformed(line_no, e.to_string()))?;
            if row.len() != cols {
                return Err(malformed(
                    line_no,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            values.extend(row);
        }
        Ok(values)
    };

    expect_tag(lines.next(), "U")?;
    let u = read_rows(m, l, &mut lines)?;
    expect_tag(lines.next(), "P")?;
    let p = read_rows(l, n, &mut lines)?;

    Ok(FactorModel {
        item_factors: nalgebra::DMatrix::from_row_slice(m, l, &u),
        user_factors: nalgebra::DMatrix::from_row_slice(l, n, &p),
        latent_dim: l,
        lambda,
        seed,
    })
}

fn parse_scalar<T: std::str::FromStr>(path: &Path, (line, value): (u64, String)) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| Error::MalformedFile {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    })
}

/// `source <TAB> target <TAB> rank <TAB> score`, grouped by source in rank
/// order. This is also the prediction format external models must emit to
/// be scored by `evaluate`.
pub fn write_relations(
    path: impl AsRef<Path>,
    relations: &RelationSet,
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    out.push_str(&format!("# k: {}\n", relations.k()));
    for source in relations.sources() {
        for (rank, &(target, score)) in relations.ranked(source).iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                catalog.id(source),
                catalog.id(target),
                rank + 1,
                score
            ));
        }
    }
    write_text(path, &out)
}

/// Full per-source score lists in the same four-column shape, rank spanning
/// the whole list (no K truncation). Input for candidate combination.
pub fn write_scores(
    path: impl AsRef<Path>,
    scores: &crate::relations::SimilarityScores,
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for (source, targets) in scores.iter() {
        let mut list = targets.to_vec();
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (rank, (target, score)) in list.into_iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                catalog.id(source),
                catalog.id(target),
                rank + 1,
                score
            ));
        }
    }
    write_text(path, &out)
}

/// Reads any four-column ranked file into per-source (target, score) lists
/// ordered by the rank column. Extra columns are tolerated; duplicate
/// targets per source are rejected.
pub fn read_ranked(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<(String, f64)>>> {
    let path = path.as_ref();
    let contents = read_to_string(path)?;
    let mut rows: BTreeMap<String, Vec<(usize, u64, String, f64)>> = BTreeMap::new();
    for (line_no, line) in data_lines(&contents) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(Error::MalformedFile {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected at least 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let rank: usize = fields[2].parse().map_err(|_| Error::MalformedFile {
            path: path.to_path_buf(),
            line: line_no,
            msg: format!("rank {:?} is not an integer", fields[2]),
        })?;
        let score: f64 = fields[3].parse().map_err(|_| Error::MalformedFile {
            path: path.to_path_buf(),
            line: line_no,
            msg: format!("score {:?} is not a number", fields[3]),
        })?;
        rows.entry(fields[0].to_string()).or_default().push((
            rank,
            line_no,
            fields[1].to_string(),
            score,
        ));
    }

    let mut out = BTreeMap::new();
    for (source, mut list) in rows {
        list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut targets = Vec::with_capacity(list.len());
        let mut seen = std::collections::BTreeSet::new();
        for (_, _, target, score) in list {
            if !seen.insert(target.clone()) {
                return Err(Error::DuplicateTarget { source_id: source, target });
            }
            targets.push((target, score));
        }
        out.insert(source, targets);
    }
    Ok(out)
}

/// Labeling candidates: `sector_i <TAB> sector_j <TAB> rank <TAB>
/// combined_score`, descending combined score.
pub fn write_candidates(
    path: impl AsRef<Path>,
    candidates: &[CandidatePair],
    catalog: &SectorCatalog,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for (rank, ((i, j), score)) in candidates.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            catalog.id(*i),
            catalog.id(*j),
            rank + 1,
            score
        ));
    }
    write_text(path, &out)
}

/// `sector_i <TAB> sector_j <TAB> {0|1}` per labeled ordered pair.
pub fn write_labels(
    path: impl AsRef<Path>,
    labels: &GroundTruthLabels,
    header: HeaderPairs,
) -> Result<()> {
    let mut out = render_header(header);
    for (source, target, relevant) in labels.iter() {
        out.push_str(&format!("{}\t{}\t{}\n", source, target, u8::from(relevant)));
    }
    write_text(path, &out)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<GroundTruthLabels> {
    let path = path.as_ref();
    let contents = read_to_string(path)?;
    let mut labels = GroundTruthLabels::new();
    for (line_no, line) in data_lines(&contents) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::MalformedFile {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let value = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::MalformedFile {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("label {other:?} is not binary"),
                })
            }
        };
        labels.insert(fields[0], fields[1], value)?;
    }
    Ok(labels)
}
