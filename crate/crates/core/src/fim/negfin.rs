//! negFIN mining: bitmap-coded itemset tree, Nodesets for 1-itemsets,
//! NegNodesets from the second level down, promotion-based pruning.
//!
//! Items are reordered by descending support (ties by ascending sector
//! index) and each record's frequent items are inserted into a prefix tree
//! in that order. Every tree node carries a bitmap code marking the items on
//! its root path, so "does this node's path contain item a" is one bit test.
//!
//! For an itemset P anchored at its least-frequent item b, the NegNodeset of
//! P holds the nodes labeled b whose path covers P's other items except the
//! most recent extension; the support of P is the parent's support minus the
//! counts in that set. Extending P from x to {x, a} only needs the sorted
//! set difference of the two sibling NegNodesets, which keeps the per-itemset
//! support computation linear in the node count. An extension that does not
//! change the support (empty NegNodeset) is promoted: it is removed from the
//! candidate list and every itemset emitted in the subtree is crossed with
//! all subsets of the promoted items at unchanged support.

use rayon::prelude::*;

use super::FrequentItemset;
use crate::dataset::TransactionDatabase;

struct MiningContext {
    min_support: usize,
    /// rank -> original sector index
    sector_of_rank: Vec<usize>,
    /// rank -> support of that single item
    rank_support: Vec<usize>,
    /// transaction count of each tree node
    node_count: Vec<u32>,
    /// flat bitmap codes, `words` u64 words per node
    bitmaps: Vec<u64>,
    words: usize,
    /// rank -> node ids labeled with that rank, ascending
    nodes_by_rank: Vec<Vec<u32>>,
}

impl MiningContext {
    fn path_contains(&self, node: u32, rank: u32) -> bool {
        let word = self.bitmaps[node as usize * self.words + rank as usize / 64];
        word >> (rank % 64) & 1 == 1
    }
}

/// One extension candidate at a set-enumeration node: the item, the
/// NegNodeset of parent-itemset + item, and the resulting support.
struct Candidate {
    rank: u32,
    neg_nodes: Vec<u32>,
    support: usize,
}

pub(super) fn mine(db: &TransactionDatabase, min_support: usize) -> Vec<FrequentItemset> {
    let num_sectors = db.num_sectors();
    let mut item_support = vec![0usize; num_sectors];
    for record in db.records() {
        for &s in &record.sectors {
            item_support[s] += 1;
        }
    }

    let mut frequent: Vec<usize> = (0..num_sectors)
        .filter(|&s| item_support[s] >= min_support)
        .collect();
    frequent.sort_by(|&a, &b| item_support[b].cmp(&item_support[a]).then(a.cmp(&b)));
    let m = frequent.len();
    if m == 0 {
        return Vec::new();
    }
    let mut rank_of = vec![u32::MAX; num_sectors];
    for (rank, &s) in frequent.iter().enumerate() {
        rank_of[s] = rank as u32;
    }

    // Build the bitmap-coded prefix tree. Node 0 is the root.
    let words = m.div_ceil(64);
    let mut node_count: Vec<u32> = vec![0];
    let mut node_rank: Vec<u32> = vec![u32::MAX];
    let mut bitmaps: Vec<u64> = vec![0; words];
    let mut children: Vec<Vec<u32>> = vec![Vec::new()];
    let mut nodes_by_rank: Vec<Vec<u32>> = vec![Vec::new(); m];

    let mut ranks_buf: Vec<u32> = Vec::new();
    for record in db.records() {
        ranks_buf.clear();
        ranks_buf.extend(
            record
                .sectors
                .iter()
                .map(|&s| rank_of[s])
                .filter(|&r| r != u32::MAX),
        );
        ranks_buf.sort_unstable();

        let mut current = 0u32;
        for &rank in &ranks_buf {
            let found = children[current as usize]
                .iter()
                .copied()
                .find(|&c| node_rank[c as usize] == rank);
            let child = match found {
                Some(c) => c,
                None => {
                    let id = node_count.len() as u32;
                    node_count.push(0);
                    node_rank.push(rank);
                    let parent_off = current as usize * words;
                    let mut code: Vec<u64> =
                        bitmaps[parent_off..parent_off + words].to_vec();
                    code[rank as usize / 64] |= 1 << (rank % 64);
                    bitmaps.extend_from_slice(&code);
                    children[current as usize].push(id);
                    children.push(Vec::new());
                    nodes_by_rank[rank as usize].push(id);
                    id
                }
            };
            node_count[child as usize] += 1;
            current = child;
        }
    }
    drop(children);

    let rank_support: Vec<usize> = frequent.iter().map(|&s| item_support[s]).collect();
    let ctx = MiningContext {
        min_support,
        sector_of_rank: frequent,
        rank_support,
        node_count,
        bitmaps,
        words,
        nodes_by_rank,
    };

    (0..m)
        .into_par_iter()
        .map(|anchor| mine_anchor(&ctx, anchor as u32))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Enumerates every frequent itemset whose least-frequent item is `anchor`.
fn mine_anchor(ctx: &MiningContext, anchor: u32) -> Vec<FrequentItemset> {
    let anchor_support = ctx.rank_support[anchor as usize];
    let anchor_nodes = &ctx.nodes_by_rank[anchor as usize];

    let mut out = Vec::new();
    let mut itemset = vec![anchor];
    let mut promoted: Vec<u32> = Vec::new();

    // Second tree level: NegNodesets of 2-itemsets straight from the bitmap
    // codes of the anchor's Nodeset.
    let mut candidates: Vec<Candidate> = Vec::new();
    for a in (0..anchor).rev() {
        let neg_nodes: Vec<u32> = anchor_nodes
            .iter()
            .copied()
            .filter(|&n| !ctx.path_contains(n, a))
            .collect();
        let reduction: usize = neg_nodes
            .iter()
            .map(|&n| ctx.node_count[n as usize] as usize)
            .sum();
        let support = anchor_support - reduction;
        if support == anchor_support {
            promoted.push(a);
        } else if support >= ctx.min_support {
            candidates.push(Candidate {
                rank: a,
                neg_nodes,
                support,
            });
        }
    }

    emit_with_promoted(ctx, &itemset, anchor_support, &promoted, &mut out);
    expand(ctx, &mut itemset, candidates, &mut promoted, &mut out);
    out
}

/// Deeper levels: the NegNodeset of (parent + x + a) is the sorted set
/// difference of the sibling NegNodesets for a and x at the parent.
fn expand(
    ctx: &MiningContext,
    itemset: &mut Vec<u32>,
    candidates: Vec<Candidate>,
    promoted: &mut Vec<u32>,
    out: &mut Vec<FrequentItemset>,
) {
    for t in 0..candidates.len() {
        let x = &candidates[t];
        itemset.push(x.rank);
        let promoted_len = promoted.len();

        let mut child_candidates = Vec::new();
        for a in &candidates[t + 1..] {
            let neg_nodes = sorted_difference(&a.neg_nodes, &x.neg_nodes);
            let reduction: usize = neg_nodes
                .iter()
                .map(|&n| ctx.node_count[n as usize] as usize)
                .sum();
            let support = x.support - reduction;
            if support == x.support {
                promoted.push(a.rank);
            } else if support >= ctx.min_support {
                child_candidates.push(Candidate {
                    rank: a.rank,
                    neg_nodes,
                    support,
                });
            }
        }

        emit_with_promoted(ctx, itemset, x.support, promoted, out);
        expand(ctx, itemset, child_candidates, promoted, out);

        promoted.truncate(promoted_len);
        itemset.pop();
    }
}

/// Emits `itemset` together with every subset of the promoted items, all at
/// the same support.
fn emit_with_promoted(
    ctx: &MiningContext,
    itemset: &[u32],
    support: usize,
    promoted: &[u32],
    out: &mut Vec<FrequentItemset>,
) {
    let mut extra: Vec<u32> = Vec::with_capacity(promoted.len());
    emit_subsets(ctx, itemset, support, promoted, &mut extra, out);
}

fn emit_subsets(
    ctx: &MiningContext,
    itemset: &[u32],
    support: usize,
    remaining: &[u32],
    extra: &mut Vec<u32>,
    out: &mut Vec<FrequentItemset>,
) {
    let mut items: Vec<usize> = itemset
        .iter()
        .chain(extra.iter())
        .map(|&r| ctx.sector_of_rank[r as usize])
        .collect();
    items.sort_unstable();
    out.push(FrequentItemset { items, support });

    for i in 0..remaining.len() {
        extra.push(remaining[i]);
        emit_subsets(ctx, itemset, support, &remaining[i + 1..], extra, out);
        extra.pop();
    }
}

/// Elements of `a` not in `b`; both inputs ascending, result ascending.
fn sorted_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut ib = 0;
    for &v in a {
        while ib < b.len() && b[ib] < v {
            ib += 1;
        }
        if ib < b.len() && b[ib] == v {
            continue;
        }
        out.push(v);
    }
    out
}
