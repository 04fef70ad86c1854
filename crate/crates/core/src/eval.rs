//! Ranking metrics against ground-truth labels: Precision@K, MAP@K, MRR.
//!
//! Conventions, also stated in every report header: AP@K is normalized by
//! min(K, number of labeled relevant targets), so a perfect ranking scores
//! 1; averages are macro over eligible sources (sectors with at least one
//! labeled relevant target); pairs missing from the labels count as
//! non-relevant; sources without a relevant label are excluded from the
//! averages and reported as coverage instead.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Expert labels per ordered sector pair. Only labeled pairs are present.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruthLabels {
    labels: BTreeMap<(String, String), bool>,
}

impl GroundTruthLabels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a label; re-inserting the same value is a no-op, a
    /// conflicting value is rejected.
    pub fn insert(&mut self, source: &str, target: &str, relevant: bool) -> Result<()> {
        let key = (source.to_string(), target.to_string());
        if let Some(&existing) = self.labels.get(&key) {
            if existing != relevant {
                return Err(Error::DegenerateInput {
                    msg: format!("conflicting labels for ({source}, {target})"),
                });
            }
            return Ok(());
        }
        self.labels.insert(key, relevant);
        Ok(())
    }

    pub fn get(&self, source: &str, target: &str) -> Option<bool> {
        self.labels
            .get(&(source.to_string(), target.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, bool)> + '_ {
        self.labels
            .iter()
            .map(|((s, t), &v)| (s.as_str(), t.as_str(), v))
    }

    /// Labeled-relevant targets of one source.
    pub fn relevant_targets(&self, source: &str) -> BTreeSet<&str> {
        self.labels
            .iter()
            .filter(|((s, _), &v)| v && s == source)
            .map(|((_, t), _)| t.as_str())
            .collect()
    }

    /// Sources with at least one labeled relevant target.
    pub fn eligible_sources(&self) -> BTreeSet<&str> {
        self.labels
            .iter()
            .filter(|(_, &v)| v)
            .map(|((s, _), _)| s.as_str())
            .collect()
    }
}

/// Ranked target ids per source id, best first.
pub type Rankings = BTreeMap<String, Vec<String>>;

fn check_duplicate_free(ranked: &Rankings) -> Result<()> {
    for (source, targets) in ranked {
        let mut seen = BTreeSet::new();
        for t in targets {
            if !seen.insert(t.as_str()) {
                return Err(Error::DuplicateTarget {
                    source_id: source.clone(),
                    target: t.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Top-10-style binarization: the first K entries of each list score 1, the
/// rest 0, order preserved.
pub fn binarize_top_k(ranked: &Rankings, k: usize) -> Result<BTreeMap<String, Vec<(String, u8)>>> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    check_duplicate_free(ranked)?;
    Ok(ranked
        .iter()
        .map(|(source, targets)| {
            let list = targets
                .iter()
                .enumerate()
                .map(|(pos, t)| (t.clone(), u8::from(pos < k)))
                .collect();
            (source.clone(), list)
        })
        .collect())
}

fn eligible_or_error(labels: &GroundTruthLabels) -> Result<BTreeSet<&str>> {
    let eligible = labels.eligible_sources();
    if eligible.is_empty() {
        return Err(Error::NoEligibleSource);
    }
    Ok(eligible)
}

/// Macro-averaged Precision@K over eligible sources; unlabeled pairs in the
/// top K count as non-relevant; the denominator is K even for short lists.
pub fn precision_at_k(ranked: &Rankings, labels: &GroundTruthLabels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    check_duplicate_free(ranked)?;
    let eligible = eligible_or_error(labels)?;
    let mut total = 0.0;
    for source in &eligible {
        let relevant = labels.relevant_targets(source);
        let hits = ranked
            .get(*source)
            .map(|targets| {
                targets
                    .iter()
                    .take(k)
                    .filter(|t| relevant.contains(t.as_str()))
                    .count()
            })
            .unwrap_or(0);
        total += hits as f64 / k as f64;
    }
    Ok(total / eligible.len() as f64)
}

/// Macro-averaged MAP@K with AP normalized by min(K, #relevant).
pub fn map_at_k(ranked: &Rankings, labels: &GroundTruthLabels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    check_duplicate_free(ranked)?;
    let eligible = eligible_or_error(labels)?;
    let mut total = 0.0;
    for source in &eligible {
        let relevant = labels.relevant_targets(source);
        let denom = k.min(relevant.len()) as f64;
        let mut hits = 0usize;
        let mut acc = 0.0;
        if let Some(targets) = ranked.get(*source) {
            for (pos, target) in targets.iter().take(k).enumerate() {
                if relevant.contains(target.as_str()) {
                    hits += 1;
                    acc += hits as f64 / (pos + 1) as f64;
                }
            }
        }
        total += acc / denom;
    }
    Ok(total / eligible.len() as f64)
}

/// Macro-averaged reciprocal rank of the first relevant target; 0 when no
/// relevant target appears in a source's list.
pub fn mrr(ranked: &Rankings, labels: &GroundTruthLabels) -> Result<f64> {
    check_duplicate_free(ranked)?;
    let eligible = eligible_or_error(labels)?;
    let mut total = 0.0;
    for source in &eligible {
        let relevant = labels.relevant_targets(source);
        if let Some(targets) = ranked.get(*source) {
            if let Some(pos) = targets.iter().position(|t| relevant.contains(t.as_str())) {
                total += 1.0 / (pos + 1) as f64;
            }
        }
    }
    Ok(total / eligible.len() as f64)
}

/// One model's rankings under a display name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedModel {
    pub name: String,
    pub rankings: Rankings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetrics {
    pub name: String,
    pub precision_at: BTreeMap<usize, f64>,
    pub map_at: BTreeMap<usize, f64>,
    pub mrr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub models: Vec<ModelMetrics>,
    /// Number of sectors with at least one labeled relevant target.
    pub coverage: usize,
}

/// Scores every model on every requested K plus MRR.
pub fn evaluate(
    models: &[RankedModel],
    labels: &GroundTruthLabels,
    ks: &[usize],
) -> Result<EvalReport> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter {
            name: "ks",
            msg: "need at least one K".into(),
        });
    }
    let coverage = eligible_or_error(labels)?.len();
    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        let mut precision_at = BTreeMap::new();
        let mut map_scores = BTreeMap::new();
        for &k in ks {
            precision_at.insert(k, precision_at_k(&model.rankings, labels, k)?);
            map_scores.insert(k, map_at_k(&model.rankings, labels, k)?);
        }
        rows.push(ModelMetrics {
            name: model.name.clone(),
            precision_at,
            map_at: map_scores,
            mrr: mrr(&model.rankings, labels)?,
        });
    }
    Ok(EvalReport {
        ks: ks.to_vec(),
        models: rows,
        coverage,
    })
}

impl EvalReport {
    /// Fixed-width table with one row per model and columns
    /// P@k... MAP@k... MRR, plus a protocol header.
    pub fn render_table(&self) -> String {
        let mut header_cells = vec!["model".to_string()];
        for &k in &self.ks {
            header_cells.push(format!("P@{k}"));
        }
        for &k in &self.ks {
            header_cells.push(format!("MAP@{k}"));
        }
        header_cells.push("MRR".to_string());

        let mut rows: Vec<Vec<String>> = vec![header_cells];
        for model in &self.models {
            let mut cells = vec![model.name.clone()];
            for &k in &self.ks {
                cells.push(format!("{:.3}", model.precision_at[&k]));
            }
            for &k in &self.ks {
                cells.push(format!("{:.3}", model.map_at[&k]));
            }
            cells.push(format!("{:.3}", model.mrr));
            rows.push(cells);
        }

        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();

        let mut out = String::new();
        out.push_str("# ap@k normalization: sum of hit precisions / min(k, #relevant)\n");
        out.push_str("# averaging: macro over sectors with >=1 labeled relevant target\n");
        out.push_str("# unlabeled pairs count as non-relevant\n");
        out.push_str(&format!("# coverage: {} eligible sectors\n", self.coverage));
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Plot-ready long format: `model metric k value`, one row per point;
    /// MRR rows carry `-` for k.
    pub fn render_long(&self) -> String {
        let mut out = String::from("model\tmetric\tk\tvalue\n");
        for model in &self.models {
            for &k in &self.ks {
                out.push_str(&format!(
                    "{}\tprecision\t{}\t{}\n",
                    model.name, k, model.precision_at[&k]
                ));
            }
            for &k in &self.ks {
                out.push_str(&format!("{}\tmap\t{}\t{}\n", model.name, k, model.map_at[&k]));
            }
            out.push_str(&format!("{}\tmrr\t-\t{}\n", model.name, model.mrr));
        }
        out
    }
}
