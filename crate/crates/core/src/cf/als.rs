//! Alternating least squares over the dense ratings matrix.
//!
//! Every one of the M*N entries is treated as observed (a 0 is an explicit
//! rating), so each half-step solves one shared-Gram regularized
//! least-squares system in closed form:
//!
//!   minimize  sum_{m,n} (y[m,n] - u_m . p_n)^2
//!             + lambda * (sum ||u_m||^2 + sum ||p_n||^2)
//!
//! Holding P fixed, u_m solves (P P^T + lambda I) u = P y_m; the company
//! step is symmetric. Each exact half-step cannot increase the objective.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RatingsMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AlsConfig {
    pub latent_dim: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for AlsConfig {
    fn default() -> Self {
        Self {
            latent_dim: 32,
            lambda: 0.1,
            iterations: 15,
            seed: 0,
        }
    }
}

/// The factorization result: predictions are `item_factors.row(m) *
/// user_factors.column(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    /// U: M x l
    pub item_factors: DMatrix<f64>,
    /// P: l x N
    pub user_factors: DMatrix<f64>,
    pub latent_dim: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl FactorModel {
    pub fn num_sectors(&self) -> usize {
        self.item_factors.nrows()
    }

    pub fn num_companies(&self) -> usize {
        self.user_factors.ncols()
    }
}

/// Runs the fixed iteration budget and returns the model.
pub fn als_factorize(y: &RatingsMatrix, config: &AlsConfig) -> Result<FactorModel> {
    als_factorize_traced(y, config).map(|(model, _)| model)
}

/// Like [`als_factorize`], additionally returning the regularized objective
/// at initialization and after every half-step (2 per iteration).
pub fn als_factorize_traced(
    y: &RatingsMatrix,
    config: &AlsConfig,
) -> Result<(FactorModel, Vec<f64>)> {
    let m = y.num_sectors();
    let n = y.num_companies();
    let l = config.latent_dim;
    if l == 0 {
        return Err(Error::InvalidParameter {
            name: "latent_dim",
            msg: "latent dimension must be at least 1".into(),
        });
    }
    if l > m.min(n) {
        return Err(Error::LatentDimensionTooLarge {
            latent: l,
            max: m.min(n),
        });
    }
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            msg: format!("lambda {} must be a finite non-negative real", config.lambda),
        });
    }
    if config.iterations == 0 {
        return Err(Error::InvalidParameter {
            name: "iterations",
            msg: "need at least one iteration".into(),
        });
    }

    // Deterministic init: uniform [0, 1/sqrt(l)) draws in row-major order,
    // U first, then P.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 1.0 / (l as f64).sqrt();
    let u_init: Vec<f64> = (0..m * l).map(|_| rng.random::<f64>() * scale).collect();
    let p_init: Vec<f64> = (0..l * n).map(|_| rng.random::<f64>() * scale).collect();
    let mut item_factors = DMatrix::from_row_slice(m, l, &u_init);
    let mut user_factors = DMatrix::from_row_slice(l, n, &p_init);

    let ratings = y.inner();
    let mut trace = Vec::with_capacity(config.iterations * 2 + 1);
    trace.push(objective(ratings, &item_factors, &user_factors, config.lambda));

    for _ in 0..config.iterations {
        // sector step: (P P^T + lambda I) u_m = P y_m
        let gram = &user_factors * user_factors.transpose()
            + DMatrix::identity(l, l) * config.lambda;
        let chol = cholesky_or_singular(gram)?;
        let rows: Vec<DVector<f64>> = (0..m)
            .into_par_iter()
            .map(|row| {
                let rhs = &user_factors * ratings.row(row).transpose();
                chol.solve(&rhs)
            })
            .collect();
        for (row, solution) in rows.iter().enumerate() {
            item_factors.row_mut(row).tr_copy_from(solution);
        }
        trace.push(objective(ratings, &item_factors, &user_factors, config.lambda));

        // company step: (U^T U + lambda I) p_n = U^T y_n
        let gram = item_factors.transpose() * &item_factors
            + DMatrix::identity(l, l) * config.lambda;
        let chol = cholesky_or_singular(gram)?;
        let cols: Vec<DVector<f64>> = (0..n)
            .into_par_iter()
            .map(|col| {
                let rhs = item_factors.transpose() * ratings.column(col);
                chol.solve(&rhs)
            })
            .collect();
        for (col, solution) in cols.iter().enumerate() {
            user_factors.column_mut(col).copy_from(solution);
        }
        trace.push(objective(ratings, &item_factors, &user_factors, config.lambda));
    }

    Ok((
        FactorModel {
            item_factors,
            user_factors,
            latent_dim: l,
            lambda: config.lambda,
            seed: config.seed,
        },
        trace,
    ))
}

fn cholesky_or_singular(gram: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    gram.cholesky().ok_or(Error::SingularSystem)
}

fn objective(y: &DMatrix<f64>, u: &DMatrix<f64>, p: &DMatrix<f64>, lambda: f64) -> f64 {
    let residual = y - u * p;
    residual.norm_squared() + lambda * (u.norm_squared() + p.norm_squared())
}

/// Predicted rating for one (sector, company) pair: the dot product of the
/// sector's factor row and the company's factor column.
pub fn predict(model: &FactorModel, sector: usize, company: usize) -> Result<f64> {
    if sector >= model.num_sectors() {
        return Err(Error::IndexOutOfRange {
            index: sector,
            len: model.num_sectors(),
        });
    }
    if company >= model.num_companies() {
        return Err(Error::IndexOutOfRange {
            index: company,
            len: model.num_companies(),
        });
    }
    Ok((model.item_factors.row(sector) * model.user_factors.column(company))[(0, 0)])
}
