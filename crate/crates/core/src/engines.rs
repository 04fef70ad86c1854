//! Engine drivers: run one scoring engine end to end on a database and
//! extract its directed relation set.

use std::collections::BTreeMap;

use crate::cf::{
    als_factorize, build_ratings, item_similarity_matrix_with, predict, AlsConfig, Measure,
    SimilarityMatrix, SimilarityOptions,
};
use crate::dataset::{augment_with_singletons, TransactionDatabase};
use crate::error::Result;
use crate::fim::{mine_frequent, pair_supports, MinSupport};
use crate::relations::{scores_from_pairs, topk_relations, RelationSet, SimilarityScores};

/// One relation-extraction engine with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    /// Frequent 2-itemset supports as pair scores.
    Fim { min_support: MinSupport },
    /// Item-item similarity over the ratings matrix rows.
    Similarity {
        measure: Measure,
        kendall_tau_b: bool,
    },
    /// ALS over the singleton-augmented database; each sector's relations
    /// are read off its synthetic company's predictions.
    Als(AlsConfig),
}

impl Engine {
    pub fn tag(&self) -> &'static str {
        match self {
            Engine::Fim { .. } => "fim",
            Engine::Similarity { measure, .. } => measure.as_str(),
            Engine::Als(_) => "als",
        }
    }
}

/// A relation set plus the untruncated per-source scores it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionOutcome {
    pub relations: RelationSet,
    pub scores: SimilarityScores,
}

/// Runs the engine and extracts top-K relations from its scores.
pub fn extract_relations(
    db: &TransactionDatabase,
    engine: &Engine,
    k: usize,
) -> Result<ExtractionOutcome> {
    let scores = match engine {
        Engine::Fim { min_support } => {
            let support = min_support.resolve(db.num_companies())?;
            let frequent = mine_frequent(db, support)?;
            scores_from_pairs(&pair_supports(&frequent))
        }
        Engine::Similarity {
            measure,
            kendall_tau_b,
        } => {
            let ratings = build_ratings(db);
            let sim = item_similarity_matrix_with(
                &ratings,
                *measure,
                &SimilarityOptions {
                    kendall_tau_b: *kendall_tau_b,
                },
            );
            scores_from_similarity(&sim)
        }
        Engine::Als(config) => {
            let (augmented, mapping) = augment_with_singletons(db);
            let ratings = build_ratings(&augmented);
            let model = als_factorize(&ratings, config)?;
            let company_index: BTreeMap<&str, usize> = augmented
                .records()
                .iter()
                .enumerate()
                .map(|(idx, r)| (r.company_id.as_str(), idx))
                .collect();
            let mut scores = SimilarityScores::new();
            for (&sector, company_id) in &mapping {
                let company = company_index[company_id.as_str()];
                for target in 0..augmented.num_sectors() {
                    if target == sector {
                        continue;
                    }
                    scores.add(sector, target, predict(&model, target, company)?)?;
                }
            }
            scores
        }
    };
    let relations = topk_relations(&scores, k)?;
    Ok(ExtractionOutcome { relations, scores })
}

/// Per-source score lists over the defined entries of a similarity matrix,
/// self-pairs excluded. Undefined entries are simply absent, never zero.
pub fn scores_from_similarity(sim: &SimilarityMatrix) -> SimilarityScores {
    let mut scores = SimilarityScores::new();
    for i in 0..sim.dim() {
        for j in 0..sim.dim() {
            if i == j {
                continue;
            }
            if let Some(v) = sim.get(i, j) {
                scores.add(i, j, v).expect("defined entries are finite");
            }
        }
    }
    scores
}
