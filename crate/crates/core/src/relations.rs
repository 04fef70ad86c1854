//! Directed relation extraction: top-K selection over per-sector score
//! lists, and combined-score candidate pairs for expert labeling.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fim::PairSupports;

/// Per-source score lists: for each source sector, the scored target sectors
/// an engine produced. No self-pairs, unique targets, finite scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityScores {
    by_source: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl SimilarityScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: usize, target: usize, score: f64) -> Result<()> {
        if source == target {
            return Err(Error::SelfPair { index: source });
        }
        if !score.is_finite() {
            return Err(Error::NonFiniteScore {
                source_id: source.to_string(),
                target: target.to_string(),
            });
        }
        let list = self.by_source.entry(source).or_default();
        if list.iter().any(|&(t, _)| t == target) {
            return Err(Error::DuplicateTarget {
                source_id: source.to_string(),
                target: target.to_string(),
            });
        }
        list.push((target, score));
        Ok(())
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_source.keys().copied()
    }

    pub fn targets(&self, source: usize) -> &[(usize, f64)] {
        self.by_source
            .get(&source)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[(usize, f64)])> + '_ {
        self.by_source.iter().map(|(&s, v)| (s, v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.by_source.is_empty()
    }

    /// Total number of scored (source, target) pairs.
    pub fn len_pairs(&self) -> usize {
        self.by_source.values().map(Vec::len).sum()
    }
}

/// The directed binary relation set: `R[i][j] = 1` iff `(i, j)` is present.
/// Pairs are kept per source in rank order together with the score that put
/// them there; absence means 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet {
    k: usize,
    by_source: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl RelationSet {
    /// The K cutoff this set was extracted with.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        self.by_source
            .get(&source)
            .is_some_and(|v| v.iter().any(|&(t, _)| t == target))
    }

    pub fn out_degree(&self, source: usize) -> usize {
        self.by_source.get(&source).map_or(0, Vec::len)
    }

    /// Ranked targets of one source, best first.
    pub fn ranked(&self, source: usize) -> &[(usize, f64)] {
        self.by_source
            .get(&source)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_source.keys().copied()
    }

    /// All directed pairs, grouped by source in rank order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.by_source
            .iter()
            .flat_map(|(&s, v)| v.iter().map(move |&(t, score)| (s, t, score)))
    }

    pub fn num_relations(&self) -> usize {
        self.by_source.values().map(Vec::len).sum()
    }

    pub(crate) fn from_ranked(k: usize, by_source: BTreeMap<usize, Vec<(usize, f64)>>) -> Self {
        Self { k, by_source }
    }
}

/// Orders a score list best-first: descending score, ties by ascending
/// sector index. Total and deterministic on finite scores.
fn rank_order(list: &mut [(usize, f64)]) {
    list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Marks, for each source, the K highest-scoring targets as related. Fewer
/// survive when fewer targets are scored; cutoff ties go to the lower sector
/// index.
pub fn topk_relations(scores: &SimilarityScores, k: usize) -> Result<RelationSet> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let mut by_source = BTreeMap::new();
    for (source, targets) in scores.iter() {
        let mut list = targets.to_vec();
        rank_order(&mut list);
        list.truncate(k);
        if !list.is_empty() {
            by_source.insert(source, list);
        }
    }
    Ok(RelationSet { k, by_source })
}

/// Expands unordered pair supports into both directed score lists and
/// applies [`topk_relations`]; pairs without support stay 0.
pub fn relations_from_fim(pairs: &PairSupports, k: usize) -> Result<RelationSet> {
    topk_relations(&scores_from_pairs(pairs), k)
}

/// Per-source score lists induced by unordered pair supports: each pair
/// feeds both directions with its support as the score.
pub fn scores_from_pairs(pairs: &PairSupports) -> SimilarityScores {
    let mut scores = SimilarityScores::new();
    for (&(i, j), &support) in pairs.iter() {
        scores.add(i, j, support as f64).expect("pair keys distinct");
        scores.add(j, i, support as f64).expect("pair keys distinct");
    }
    scores
}

/// Reads off relations from per-synthetic-company recommendation lists:
/// sector j relates to sector i when j is among the top K predictions for
/// the singleton company of sector i. Sector i itself (already held by the
/// singleton) is excluded.
pub fn relations_from_recommendations(
    predictions: &BTreeMap<String, Vec<(usize, f64)>>,
    singleton_map: &BTreeMap<usize, String>,
    k: usize,
) -> Result<RelationSet> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let mut scores = SimilarityScores::new();
    for (&sector, company_id) in singleton_map {
        let ranked = predictions
            .get(company_id)
            .ok_or_else(|| Error::MissingSyntheticCompany {
                sector: sector.to_string(),
            })?;
        for &(target, score) in ranked {
            if target == sector {
                continue;
            }
            scores.add(sector, target, score)?;
        }
    }
    topk_relations(&scores, k)
}

/// How to make a directed relation set symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetrize {
    /// Keep a pair when either direction is present.
    Union,
    /// Keep a pair only when both directions are present.
    Intersection,
}

/// Derives a symmetric relation set. Scores are carried over (the larger of
/// the two directions under union); `k` is widened to the new maximum
/// out-degree so the out-degree bound stays truthful.
pub fn symmetrize(relations: &RelationSet, mode: Symmetrize) -> RelationSet {
    let mut pair_scores: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (s, t, score) in relations.iter_pairs() {
        let key = (s.min(t), s.max(t));
        match pair_scores.entry(key) {
            Entry::Vacant(e) => {
                e.insert(score);
            }
            Entry::Occupied(mut e) => {
                let v = e.get_mut();
                *v = v.max(score);
            }
        }
    }

    let mut by_source: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (&(a, b), &score) in &pair_scores {
        let keep = match mode {
            Symmetrize::Union => true,
            Symmetrize::Intersection => relations.contains(a, b) && relations.contains(b, a),
        };
        if keep {
            by_source.entry(a).or_default().push((b, score));
            by_source.entry(b).or_default().push((a, score));
        }
    }
    for list in by_source.values_mut() {
        rank_order(list);
    }
    let max_degree = by_source.values().map(Vec::len).max().unwrap_or(0);
    RelationSet {
        k: relations.k.max(max_degree),
        by_source,
    }
}

/// A labeling candidate: an ordered sector pair with its combined score.
pub type CandidatePair = ((usize, usize), f64);

/// Combines several engines' score lists into labeling candidates.
///
/// Each model's scores are min-max normalized to [0, 1] over everything that
/// model scored; the combined score of a pair is the mean of its normalized
/// scores with absent models contributing 0. Pairs scoring strictly above
/// `threshold` are returned in descending combined order. A model whose
/// scores are all equal cannot be normalized and contributes 0 everywhere
/// (logged as a warning).
pub fn candidate_pairs_for_labeling(
    model_outputs: &[SimilarityScores],
    threshold: f64,
) -> Result<Vec<CandidatePair>> {
    if model_outputs.is_empty() {
        return Err(Error::NoModelOutputs);
    }
    let n_models = model_outputs.len() as f64;
    let mut combined: BTreeMap<(usize, usize), f64> = BTreeMap::new();

    for (model_idx, scores) in model_outputs.iter().enumerate() {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (_, targets) in scores.iter() {
            for &(_, s) in targets {
                min = min.min(s);
                max = max.max(s);
            }
        }
        let span = max - min;
        if span <= 0.0 || span.is_nan() {
            log::warn!(
                "model {model_idx}: constant or empty scores; it contributes 0 to all pairs"
            );
            continue;
        }
        for (source, targets) in scores.iter() {
            for &(target, s) in targets {
                *combined.entry((source, target)).or_insert(0.0) += (s - min) / span;
            }
        }
    }

    let mut out: Vec<CandidatePair> = combined
        .into_iter()
        .map(|(pair, sum)| (pair, sum / n_models))
        .filter(|&(_, score)| score > threshold)
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(entries: &[(usize, usize, f64)]) -> SimilarityScores {
        let mut s = SimilarityScores::new();
        for &(src, tgt, score) in entries {
            s.add(src, tgt, score).unwrap();
        }
        s
    }

    #[test]
    fn topk_selects_highest_scores() {
        let s = scores(&[(1, 2, 5.0), (1, 3, 3.0), (1, 4, 1.0)]);
        let rel = topk_relations(&s, 2).unwrap();
        assert!(rel.contains(1, 2));
        assert!(rel.contains(1, 3));
        assert!(!rel.contains(1, 4));
        assert_eq!(rel.out_degree(1), 2);
    }

    #[test]
    fn empty_source_list_has_zero_out_degree() {
        let s = scores(&[(1, 2, 5.0)]);
        let rel = topk_relations(&s, 3).unwrap();
        assert_eq!(rel.out_degree(7), 0);
    }

    #[test]
    fn cutoff_tie_goes_to_lower_index() {
        let s = scores(&[(1, 3, 3.0), (1, 2, 3.0)]);
        let rel = topk_relations(&s, 1).unwrap();
        assert!(rel.contains(1, 2));
        assert!(!rel.contains(1, 3));
    }

    #[test]
    fn rejects_zero_k() {
        assert!(matches!(
            topk_relations(&SimilarityScores::new(), 0),
            Err(Error::ZeroK)
        ));
    }

    #[test]
    fn topk_invariant_under_positive_affine_rescaling() {
        let base = scores(&[(0, 1, 2.0), (0, 2, 7.0), (0, 3, 4.0), (0, 4, 4.5)]);
        let rescaled = scores(&[(0, 1, 2.0 * 3.5 + 1.0), (0, 2, 7.0 * 3.5 + 1.0), (0, 3, 4.0 * 3.5 + 1.0), (0, 4, 4.5 * 3.5 + 1.0)]);
        for k in 1..=4 {
            let a = topk_relations(&base, k).unwrap();
            let b = topk_relations(&rescaled, k).unwrap();
            let pairs_a: Vec<(usize, usize)> = a.iter_pairs().map(|(s, t, _)| (s, t)).collect();
            let pairs_b: Vec<(usize, usize)> = b.iter_pairs().map(|(s, t, _)| (s, t)).collect();
            assert_eq!(pairs_a, pairs_b);
        }
    }

    #[test]
    fn fim_expansion_feeds_both_directions() {
        let pairs = PairSupports::from_map([((0, 1), 3)].into());
        let rel = relations_from_fim(&pairs, 5).unwrap();
        assert!(rel.contains(0, 1));
        assert!(rel.contains(1, 0));
        assert_eq!(rel.num_relations(), 2);
    }

    #[test]
    fn fim_symmetric_when_k_saturates() {
        let pairs = PairSupports::from_map(
            [((0, 1), 3), ((0, 2), 5), ((1, 2), 1), ((2, 3), 4)].into(),
        );
        let rel = relations_from_fim(&pairs, 10).unwrap();
        for (s, t, _) in rel.iter_pairs() {
            assert!(rel.contains(t, s), "({t}, {s}) missing");
        }
    }

    #[test]
    fn recommendations_exclude_own_sector() {
        let predictions = BTreeMap::from([(
            "synthetic::A".to_string(),
            vec![(0, 0.99), (1, 0.8), (2, 0.1)],
        )]);
        let map = BTreeMap::from([(0, "synthetic::A".to_string())]);
        let rel = relations_from_recommendations(&predictions, &map, 1).unwrap();
        assert!(rel.contains(0, 1));
        assert!(!rel.contains(0, 0));
        assert_eq!(rel.num_relations(), 1);
    }

    #[test]
    fn equal_predictions_tie_break_by_index() {
        let predictions = BTreeMap::from([(
            "synthetic::A".to_string(),
            vec![(3, 0.5), (1, 0.5), (2, 0.5)],
        )]);
        let map = BTreeMap::from([(0, "synthetic::A".to_string())]);
        let rel = relations_from_recommendations(&predictions, &map, 2).unwrap();
        assert!(rel.contains(0, 1));
        assert!(rel.contains(0, 2));
        assert!(!rel.contains(0, 3));
    }

    #[test]
    fn missing_synthetic_company_is_an_error() {
        let predictions = BTreeMap::new();
        let map = BTreeMap::from([(0, "synthetic::A".to_string())]);
        assert!(matches!(
            relations_from_recommendations(&predictions, &map, 1),
            Err(Error::MissingSyntheticCompany { .. })
        ));
    }

    #[test]
    fn symmetrize_union_and_intersection() {
        let s = scores(&[(0, 1, 5.0), (0, 2, 4.0), (1, 0, 3.0)]);
        let rel = topk_relations(&s, 2).unwrap();
        let union = symmetrize(&rel, Symmetrize::Union);
        assert!(union.contains(2, 0) && union.contains(0, 2));
        let inter = symmetrize(&rel, Symmetrize::Intersection);
        assert!(inter.contains(0, 1) && inter.contains(1, 0));
        assert!(!inter.contains(0, 2));
    }

    #[test]
    fn single_model_threshold_zero_keeps_normalized_order() {
        let s = scores(&[(0, 1, 10.0), (0, 2, 5.0), (1, 2, 0.0)]);
        let out = candidate_pairs_for_labeling(&[s], -1e-9).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], ((0, 1), 1.0));
        assert_eq!(out[1], ((0, 2), 0.5));
        assert_eq!(out[2], ((1, 2), 0.0));
    }

    #[test]
    fn pair_scored_max_by_every_model_combines_to_one() {
        let a = scores(&[(0, 1, 9.0), (0, 2, 1.0)]);
        let b = scores(&[(0, 1, 100.0), (1, 2, 50.0)]);
        let out = candidate_pairs_for_labeling(&[a, b], 0.0).unwrap();
        assert_eq!(out[0], ((0, 1), 1.0));
    }

    #[test]
    fn disjoint_models_cannot_beat_half() {
        // Disjoint pair sets: every pair is absent from one model, so the
        // combined mean is at most 0.5 and a 0.6 threshold keeps nothing.
        let a = scores(&[(0, 1, 10.0), (0, 2, 2.0)]);
        let b = scores(&[(1, 2, 5.0), (1, 3, 1.0)]);
        let out = candidate_pairs_for_labeling(&[a, b], 0.6).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn overlap_strong_in_one_present_in_other_survives() {
        // (0,1): max in model a (1.0), mid in model b (0.4) -> 0.7 survives.
        // (0,2): max in model a only -> 0.5 filtered at 0.6.
        let a = scores(&[(0, 1, 10.0), (0, 2, 10.0), (0, 3, 0.0)]);
        let b = scores(&[(0, 1, 4.0), (1, 3, 10.0), (2, 3, 0.0)]);
        let out = candidate_pairs_for_labeling(&[a, b], 0.6).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, (0, 1));
        assert!((out[0].1 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn constant_model_contributes_zero() {
        let a = scores(&[(0, 1, 3.0), (0, 2, 3.0)]);
        let b = scores(&[(0, 1, 9.0), (0, 2, 1.0)]);
        let out = candidate_pairs_for_labeling(&[a, b], -1.0).unwrap();
        let by_pair: BTreeMap<_, _> = out.into_iter().collect();
        assert_eq!(by_pair[&(0, 1)], 0.5);
        assert_eq!(by_pair[&(0, 2)], 0.0);
    }

    #[test]
    fn no_models_is_an_error() {
        assert!(matches!(
            candidate_pairs_for_labeling(&[], 0.0),
            Err(Error::NoModelOutputs)
        ));
    }
}
