//! Item-item similarity measures over rating rows.
//!
//! Pearson follows the adjusted-cosine form: ratings are centered by the
//! *user* (company) mean before the cosine is taken. The ratings matrix is
//! fully specified (a 0 is an explicit rating, not a missing value), so the
//! set of users that rated both items spans every company and the user mean
//! runs over all M items. Kendall is the tau-a form: strict concordant and
//! discordant counts over the binomial denominator, ties contributing to
//! neither; a tie-corrected tau-b is available behind an option flag.
//! Spearman assigns average ranks to ties and applies the rank-difference
//! formula.

use rayon::prelude::*;

use super::RatingsMatrix;
use crate::error::{Error, Result};

/// Undefined entries (degenerate rows or vanishing norms) are excluded from
/// any downstream ranking rather than reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Pearson,
    Kendall,
    Spearman,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Pearson => "pearson",
            Measure::Kendall => "kendall",
            Measure::Spearman => "spearman",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Measure::Pearson),
            "kendall" => Ok(Measure::Kendall),
            "spearman" => Ok(Measure::Spearman),
            other => Err(Error::InvalidParameter {
                name: "measure",
                msg: format!("unknown measure {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimilarityOptions {
    /// Use the tie-corrected tau-b instead of tau-a for Kendall entries.
    pub kendall_tau_b: bool,
}

/// Pairwise item similarity under one measure, with a mask marking where the
/// measure is well-defined. Symmetric on defined entries; the diagonal is 1
/// wherever the row is non-degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    measure: Measure,
    dim: usize,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl SimilarityMatrix {
    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.defined[i * self.dim + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.defined[i * self.dim + j].then(|| self.values[i * self.dim + j])
    }
}

/// Pearson similarity of sectors `i` and `j` per the adjusted-cosine
/// formula. `None` when the company set is empty or either centered vector
/// has zero norm.
pub fn pearson_similarity(y: &RatingsMatrix, i: usize, j: usize) -> Result<Option<f64>> {
    let m = y.num_sectors();
    for idx in [i, j] {
        if idx >= m {
            return Err(Error::IndexOutOfRange { index: idx, len: m });
        }
    }
    let n = y.num_companies();
    if n == 0 {
        return Ok(None);
    }
    let means = company_means(y);
    let mut num = 0.0;
    let mut norm_i = 0.0;
    let mut norm_j = 0.0;
    for (u, mean) in means.iter().enumerate() {
        let ci = y.get(i, u) - mean;
        let cj = y.get(j, u) - mean;
        num += ci * cj;
        norm_i += ci * ci;
        norm_j += cj * cj;
    }
    if norm_i == 0.0 || norm_j == 0.0 {
        return Ok(None);
    }
    Ok(Some((num / (norm_i.sqrt() * norm_j.sqrt())).clamp(-1.0, 1.0)))
}

/// Mean rating of each company over all sectors.
fn company_means(y: &RatingsMatrix) -> Vec<f64> {
    let m = y.num_sectors() as f64;
    y.inner()
        .column_iter()
        .map(|col| col.sum() / m)
        .collect()
}

/// Kendall's tau-a: (C - D) / C(n, 2) with strictly concordant and strictly
/// discordant pair counts; tied pairs count for neither.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0u64, 0u64);
    for a in 0..n {
        for b in a + 1..n {
            let dx = x[a].partial_cmp(&x[b]).expect("finite ratings");
            let dy = y[a].partial_cmp(&y[b]).expect("finite ratings");
            if dx.is_eq() || dy.is_eq() {
                continue;
            }
            if dx == dy {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((concordant as f64 - discordant as f64) / pairs)
}

/// Tie-corrected Kendall's tau-b. Errors when either vector is constant
/// (the correction denominator vanishes).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0u64, 0u64);
    let (mut ties_x, mut ties_y) = (0u64, 0u64);
    for a in 0..n {
        for b in a + 1..n {
            let dx = x[a].partial_cmp(&x[b]).expect("finite ratings");
            let dy = y[a].partial_cmp(&y[b]).expect("finite ratings");
            if dx.is_eq() {
                ties_x += 1;
            }
            if dy.is_eq() {
                ties_y += 1;
            }
            if dx.is_eq() || dy.is_eq() {
                continue;
            }
            if dx == dy {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let denom = (pairs - ties_x as f64) * (pairs - ties_y as f64);
    if denom <= 0.0 {
        return Err(Error::DegenerateInput {
            msg: "tau-b undefined for constant input".into(),
        });
    }
    let tau = (concordant as f64 - discordant as f64) / denom.sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Spearman's rho: average ranks per vector, then
/// `1 - 6 * sum(d^2) / (n (n^2 - 1))`.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let sum_d2: f64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0)))
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewRatings {
            need: 2,
            got: x.len(),
        });
    }
    Ok(())
}

/// 1-based ranks with tied values receiving the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end, averaged
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Applies the selected measure to every sector pair over the full rating
/// rows. Rows with zero variance are masked undefined, as are Pearson pairs
/// whose centered norm vanishes; the diagonal is 1 wherever defined.
pub fn item_similarity_matrix(y: &RatingsMatrix, measure: Measure) -> SimilarityMatrix {
    item_similarity_matrix_with(y, measure, &SimilarityOptions::default())
}

pub fn item_similarity_matrix_with(
    y: &RatingsMatrix,
    measure: Measure,
    options: &SimilarityOptions,
) -> SimilarityMatrix {
    let m = y.num_sectors();
    let rows: Vec<Vec<f64>> = (0..m).map(|i| y.row(i)).collect();
    let constant: Vec<bool> = rows
        .iter()
        .map(|row| row.iter().all(|&v| v == row[0]))
        .collect();

    // per-measure precomputation shared across pairs
    let centered: Option<Vec<Vec<f64>>> = (measure == Measure::Pearson).then(|| {
        let means = company_means(y);
        rows.iter()
            .map(|row| row.iter().zip(&means).map(|(v, m)| v - m).collect())
            .collect()
    });
    let rank_rows: Option<Vec<Vec<f64>>> = (measure == Measure::Spearman)
        .then(|| rows.iter().map(|row| average_ranks(row)).collect());

    let triangle: Vec<Vec<(usize, Option<f64>)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| {
                    let value = if constant[i] || constant[j] {
                        None
                    } else if i == j {
                        Some(1.0)
                    } else {
                        match measure {
                            Measure::Pearson => {
                                let c = centered.as_ref().expect("precomputed");
                                centered_cosine(&c[i], &c[j])
                            }
                            Measure::Kendall => {
                                if options.kendall_tau_b {
                                    kendall_tau_b(&rows[i], &rows[j]).ok()
                                } else {
                                    Some(kendall_tau(&rows[i], &rows[j]).expect("checked dims"))
                                }
                            }
                            Measure::Spearman => {
                                let r = rank_rows.as_ref().expect("precomputed");
                                Some(rho_from_ranks(&r[i], &r[j]))
                            }
                        }
                    };
                    (j, value)
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; m * m];
    let mut defined = vec![false; m * m];
    for (i, entries) in triangle.into_iter().enumerate() {
        for (j, value) in entries {
            if let Some(v) = value {
                values[i * m + j] = v;
                values[j * m + i] = v;
                defined[i * m + j] = true;
                defined[j * m + i] = true;
            }
        }
    }

    SimilarityMatrix {
        measure,
        dim: m,
        values,
        defined,
    }
}

fn centered_cosine(ci: &[f64], cj: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut norm_i = 0.0;
    let mut norm_j = 0.0;
    for (a, b) in ci.iter().zip(cj) {
        num += a * b;
        norm_i += a * a;
        norm_j += b * b;
    }
    if norm_i == 0.0 || norm_j == 0.0 {
        return None;
    }
    Some((num / (norm_i.sqrt() * norm_j.sqrt())).clamp(-1.0, 1.0))
}

fn rho_from_ranks(rx: &[f64], ry: &[f64]) -> f64 {
    let n = rx.len() as f64;
    let sum_d2: f64 = rx
        .iter()
        .zip(ry)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0))
}
