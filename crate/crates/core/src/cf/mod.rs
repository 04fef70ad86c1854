//! Collaborative filtering over the binary sector-by-company ratings matrix:
//! item-item similarity measures and ALS matrix factorization.

mod als;
mod correlation;

use nalgebra::DMatrix;

use crate::dataset::TransactionDatabase;
use crate::error::{Error, Result};

pub use als::{als_factorize, als_factorize_traced, predict, AlsConfig, FactorModel};
pub use correlation::{
    item_similarity_matrix, item_similarity_matrix_with, kendall_tau, kendall_tau_b,
    pearson_similarity, spearman_rho, Measure, SimilarityMatrix, SimilarityOptions,
};

/// The ratings matrix Y: rows are sectors (M), columns are companies (N).
/// [`build_ratings`] produces the binary membership form where every entry
/// is an explicit 0/1 rating; real-valued matrices can be built directly for
/// factorization experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    values: DMatrix<f64>,
}

impl RatingsMatrix {
    /// Builds from explicit rows. Rows must be non-empty and of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "rows",
                msg: "matrix needs at least one row".into(),
            });
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "rows",
                msg: "matrix needs at least one column".into(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "rows",
                    msg: format!("non-finite rating {v} in row {i}"),
                });
            }
        }
        let values = DMatrix::from_fn(m, n, |r, c| rows[r][c]);
        Ok(Self { values })
    }

    /// M: number of sectors (rows).
    pub fn num_sectors(&self) -> usize {
        self.values.nrows()
    }

    /// N: number of companies (columns).
    pub fn num_companies(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, sector: usize, company: usize) -> f64 {
        self.values[(sector, company)]
    }

    pub fn row(&self, sector: usize) -> Vec<f64> {
        self.values.row(sector).iter().copied().collect()
    }

    /// Count of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub(crate) fn inner(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Builds the binary matrix: y[m, n] = 1 iff company n's record contains
/// sector m.
pub fn build_ratings(db: &TransactionDatabase) -> RatingsMatrix {
    let m = db.num_sectors();
    let n = db.num_companies();
    let mut values = DMatrix::zeros(m, n);
    for (company, record) in db.records().iter().enumerate() {
        for &sector in &record.sectors {
            values[(sector, company)] = 1.0;
        }
    }
    RatingsMatrix { values }
}
