//! Planted-block synthetic corpora with known ground truth.
//!
//! Sectors are grouped into blocks; each company samples its sectors from
//! one home block, with each pick replaced by an out-of-block sector at the
//! cross-block noise rate. The planted truth relates two sectors iff they
//! share a block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{CompanyRecord, SectorCatalog, TransactionDatabase};
use crate::error::{Error, Result};
use crate::relations::RelationSet;

/// Distribution of the per-company sector count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorCountDistribution {
    Fixed(usize),
    /// Uniform over `min..=max`.
    Uniform { min: usize, max: usize },
}

impl SectorCountDistribution {
    pub fn min_count(&self) -> usize {
        match *self {
            SectorCountDistribution::Fixed(k) => k,
            SectorCountDistribution::Uniform { min, .. } => min,
        }
    }

    pub fn max_count(&self) -> usize {
        match *self {
            SectorCountDistribution::Fixed(k) => k,
            SectorCountDistribution::Uniform { max, .. } => max,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        match *self {
            SectorCountDistribution::Fixed(k) => k,
            SectorCountDistribution::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

impl fmt::Display for SectorCountDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SectorCountDistribution::Fixed(k) => write!(f, "fixed:{k}"),
            SectorCountDistribution::Uniform { min, max } => write!(f, "uniform:{min}:{max}"),
        }
    }
}

impl FromStr for SectorCountDistribution {
    type Err = Error;

    /// Accepts `fixed:K` and `uniform:MIN:MAX`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidParameter {
            name: "sectors_per_company",
            msg: format!("cannot parse {s:?}; expected fixed:K or uniform:MIN:MAX"),
        };
        let mut parts = s.split(':');
        match parts.next() {
            Some("fixed") => {
                let k = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(invalid)?;
                if parts.next().is_some() {
                    return Err(invalid());
                }
                Ok(SectorCountDistribution::Fixed(k))
            }
            Some("uniform") => {
                let min = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(invalid)?;
                let max = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(invalid)?;
                if parts.next().is_some() {
                    return Err(invalid());
                }
                Ok(SectorCountDistribution::Uniform { min, max })
            }
            _ => Err(invalid()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_blocks: usize,
    pub sectors_per_block: usize,
    pub n_companies: usize,
    pub sectors_per_company: SectorCountDistribution,
    /// Probability that one sector pick is replaced by an out-of-block pick.
    pub cross_block_noise: f64,
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InfeasibleConfig { msg });
        if self.n_blocks == 0 || self.sectors_per_block == 0 {
            return err("need at least one block and one sector per block".into());
        }
        if self.n_blocks * self.sectors_per_block < 2 {
            return err("need at least two sectors overall".into());
        }
        if self.n_companies == 0 {
            return err("need at least one company".into());
        }
        if !(0.0..=1.0).contains(&self.cross_block_noise) {
            return err(format!(
                "cross_block_noise {} outside [0, 1]",
                self.cross_block_noise
            ));
        }
        let dist = &self.sectors_per_company;
        if dist.min_count() == 0 {
            return err("companies need at least one sector".into());
        }
        if dist.min_count() > dist.max_count() {
            return err(format!(
                "sector count range inverted: {} > {}",
                dist.min_count(),
                dist.max_count()
            ));
        }
        if dist.max_count() > self.sectors_per_block {
            return err(format!(
                "a company may need {} sectors but a block only holds {}",
                dist.max_count(),
                self.sectors_per_block
            ));
        }
        Ok(())
    }
}

/// Generates a planted-block corpus plus its ground-truth relation set.
/// Deterministic for a given config and seed.
pub fn generate_synthetic(
    config: &SyntheticConfig,
    seed: u64,
) -> Result<(TransactionDatabase, RelationSet)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = config.n_blocks;
    let per_block = config.sectors_per_block;

    let mut catalog = SectorCatalog::new();
    for b in 0..blocks {
        for s in 0..per_block {
            let idx = catalog.insert(&format!("B{b:02}S{s:02}"));
            catalog.set_name(idx, &format!("Block {b} Sector {s}"));
        }
    }

    let mut records = Vec::with_capacity(config.n_companies);
    for c in 0..config.n_companies {
        let home = rng.random_range(0..blocks);
        let k = config.sectors_per_company.sample(&mut rng);
        let mut picks = rand::seq::index::sample(&mut rng, per_block, k).into_vec();
        picks.sort_unstable();

        let mut sectors = BTreeSet::new();
        for slot in picks {
            let home_sector = home * per_block + slot;
            let noisy = blocks > 1
                && config.cross_block_noise > 0.0
                && rng.random::<f64>() < config.cross_block_noise;
            if noisy {
                let outside = (blocks - 1) * per_block;
                let mut replaced = false;
                for _ in 0..64 {
                    let pick = rng.random_range(0..outside);
                    let global = if pick / per_block >= home {
                        pick + per_block
                    } else {
                        pick
                    };
                    if sectors.insert(global) {
                        replaced = true;
                        break;
                    }
                }
                if !replaced {
                    sectors.insert(home_sector);
                }
            } else {
                sectors.insert(home_sector);
            }
        }
        records.push(CompanyRecord {
            company_id: format!("C{c:06}"),
            sectors,
        });
    }

    let db = TransactionDatabase::new(catalog, records)?;

    let mut by_source = BTreeMap::new();
    for b in 0..blocks {
        for s in 0..per_block {
            let source = b * per_block + s;
            let targets: Vec<(usize, f64)> = (0..per_block)
                .map(|t| b * per_block + t)
                .filter(|&t| t != source)
                .map(|t| (t, 1.0))
                .collect();
            if !targets.is_empty() {
                by_source.insert(source, targets);
            }
        }
    }
    let truth = RelationSet::from_ranked(per_block.saturating_sub(1), by_source);

    Ok((db, truth))
}
