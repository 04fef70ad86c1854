//! Frequent-itemset mining over the transaction database.
//!
//! [`mine_frequent`] is the production miner (negFIN); [`mine_frequent_naive`]
//! is a level-wise reference implementation kept as its correctness oracle.
//! Both return exactly the itemsets with support >= `min_support`, ordered by
//! descending support then lexicographic items, so equal inputs produce equal
//! outputs down to the ordering.

mod negfin;

use std::collections::BTreeMap;

use crate::dataset::TransactionDatabase;
use crate::error::{Error, Result};

/// An itemset (sorted sector indices) with its exact support count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequentItemset {
    pub items: Vec<usize>,
    pub support: usize,
}

/// Support per unordered sector pair, keyed `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSupports {
    scores: BTreeMap<(usize, usize), usize>,
}

impl PairSupports {
    pub fn from_map(scores: BTreeMap<(usize, usize), usize>) -> Self {
        debug_assert!(scores.keys().all(|&(i, j)| i < j));
        debug_assert!(scores.values().all(|&s| s > 0));
        Self { scores }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.scores.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &usize)> {
        self.scores.iter()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Pairs ordered by descending support, then by pair index.
    pub fn sorted_by_support(&self) -> Vec<((usize, usize), usize)> {
        let mut v: Vec<_> = self.scores.iter().map(|(&p, &s)| (p, s)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Keeps exactly the 2-itemsets of a mining result; the score of a pair is
/// its support. Input order does not matter.
pub fn pair_supports(frequent: &[FrequentItemset]) -> PairSupports {
    let scores = frequent
        .iter()
        .filter(|f| f.items.len() == 2)
        .map(|f| ((f.items[0], f.items[1]), f.support))
        .collect();
    PairSupports { scores }
}

/// Mines all frequent itemsets with the negFIN algorithm.
pub fn mine_frequent(db: &TransactionDatabase, min_support: usize) -> Result<Vec<FrequentItemset>> {
    check_min_support(db, min_support)?;
    let mut result = negfin::mine(db, min_support);
    sort_canonical(&mut result);
    Ok(result)
}

/// Level-wise reference miner: candidate generation from the previous level
/// plus direct per-record containment counting. Exponential on dense data;
/// intended for small instances and as the oracle for [`mine_frequent`].
pub fn mine_frequent_naive(
    db: &TransactionDatabase,
    min_support: usize,
) -> Result<Vec<FrequentItemset>> {
    check_min_support(db, min_support)?;

    let mut result: Vec<FrequentItemset> = Vec::new();

    // level 1 by direct counting
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for record in db.records() {
        for &s in &record.sectors {
            *counts.entry(s).or_insert(0) += 1;
        }
    }
    let mut level: Vec<FrequentItemset> = counts
        .into_iter()
        .filter(|&(_, support)| support >= min_support)
        .map(|(item, support)| FrequentItemset {
            items: vec![item],
            support,
        })
        .collect();

    while !level.is_empty() {
        result.extend(level.iter().cloned());
        let candidates = join_level(&level);
        level = candidates
            .into_iter()
            .filter_map(|items| {
                let support = db
                    .records()
                    .iter()
                    .filter(|r| items.iter().all(|i| r.sectors.contains(i)))
                    .count();
                (support >= min_support).then_some(FrequentItemset { items, support })
            })
            .collect();
    }

    sort_canonical(&mut result);
    Ok(result)
}

/// Joins a frequent level into the next candidate level: two k-itemsets
/// sharing their first k-1 items produce one (k+1)-candidate, kept only when
/// all its k-subsets are frequent at this level.
fn join_level(level: &[FrequentItemset]) -> Vec<Vec<usize>> {
    use std::collections::BTreeSet;
    let frequent: BTreeSet<&[usize]> = level.iter().map(|f| f.items.as_slice()).collect();
    let mut candidates = Vec::new();
    for (a_idx, a) in level.iter().enumerate() {
        for b in &level[a_idx + 1..] {
            let k = a.items.len();
            if a.items[..k - 1] != b.items[..k - 1] {
                continue;
            }
            let mut items = a.items.clone();
            let last = b.items[k - 1];
            debug_assert!(last > a.items[k - 1]);
            items.push(last);
            let all_subsets_frequent = (0..items.len()).all(|skip| {
                let sub: Vec<usize> = items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &v)| (i != skip).then_some(v))
                    .collect();
                frequent.contains(sub.as_slice())
            });
            if all_subsets_frequent {
                candidates.push(items);
            }
        }
    }
    candidates
}

fn check_min_support(db: &TransactionDatabase, min_support: usize) -> Result<()> {
    let n = db.num_companies();
    if min_support < 1 || min_support > n {
        return Err(Error::MinSupportOutOfRange { min_support, n });
    }
    Ok(())
}

fn sort_canonical(itemsets: &mut [FrequentItemset]) {
    itemsets.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.items.cmp(&b.items)));
}

/// Resolves a minimum-support setting against a database size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSupport {
    /// Absolute record count.
    Absolute(usize),
    /// Fraction of the record count, rounded up, floored at 1.
    Relative(f64),
}

impl MinSupport {
    pub fn resolve(&self, n_records: usize) -> Result<usize> {
        match *self {
            MinSupport::Absolute(count) => Ok(count),
            MinSupport::Relative(fraction) => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::InvalidParameter {
                        name: "min_support",
                        msg: format!("relative fraction {fraction} outside [0, 1]"),
                    });
                }
                Ok(((fraction * n_records as f64).ceil() as usize).max(1))
            }
        }
    }
}
