//! Recursive dissection of the constrained sum into free and boxed chunks.
//!
//! Indices split into `P` (`Jᵢ ≥ 0`) and `N` (`Jᵢ < 0`). A level-0 chunk
//! fixes `αᵢ = tᵢ` on `P`; if the reserved weight `R₀ = Σ i·tᵢ` reaches
//! `M̃ = pN/4` the chunk is *free* and the remaining `N`-indices are summed
//! under the budget, otherwise it is *boxed*: the `N`-indices run over the
//! rectangle `αᵢ ≤ m₀(i) = floor(C₀ Uᵢ)`, where the cap `C₀` is the largest
//! scaling of the weight profile whose box still fits the remaining budget.
//! Occupations that leave the box on a nonempty set `B₁ ⊆ N` become level-1
//! chunks with those values fixed, and so on. At level `n ≥ 1` an overflow
//! value lies in `(mₙ(i), mₙ₋₁(i)]`, and a free chunk's residual sum keeps
//! the window `αᵢ ≤ mₙ₋₁(i)` inherited from its parent box; without it
//! sibling chunks would overlap.
//!
//! Every admissible occupation lands in exactly one chunk, so the chunk
//! values add up to `Z` exactly.

use std::collections::{BTreeMap, HashMap};

use dashu_ratio::RBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{enumerate_occupations, CouplingSequence, ModelParams, Occupation};
use crate::numeric::{rational_to_f64, Float};
use crate::partition::{contract_with_dressing, Dressing, TermTable};

/// Default cap on the number of chunk-tree nodes.
pub const DEFAULT_NODE_CAP: usize = 5_000_000;

/// Box weights `Uᵢ = i^-(2+ε)`, stored through their reciprocals so the
/// cap's jump points `k / Uᵢ` are exact whenever `ε` is an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    eps: f64,
    scales: BTreeMap<u32, f64>,
}

impl WeightProfile {
    pub fn new(indices: &[u32], eps: f64) -> Self {
        let scales = indices.iter().map(|&i| (i, inverse_weight(i, eps))).collect();
        Self { eps, scales }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `Uᵢ`.
    pub fn weight(&self, i: u32) -> f64 {
        1.0 / self.scales[&i]
    }

    /// `1/Uᵢ = i^(2+ε)`, the spacing of the jump points of `floor(x·Uᵢ)`.
    pub fn scale(&self, i: u32) -> f64 {
        self.scales[&i]
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.scales.keys().copied()
    }
}

fn inverse_weight(i: u32, eps: f64) -> f64 {
    let exponent = 2.0 + eps;
    if exponent.fract() == 0.0 && exponent <= 40.0 {
        (i as f64).powi(exponent as i32)
    } else {
        (i as f64).powf(exponent)
    }
}

/// `Uᵢ = i^-(2+ε)` over `indices`.
pub fn weights(indices: &[u32], eps: f64) -> WeightProfile {
    WeightProfile::new(indices, eps)
}

/// `C = sup{x : Σ_{i ∈ residual} i·floor(x·Uᵢ) ≤ remaining}`.
///
/// The cost is a right-continuous step function, so the supremum is the
/// first jump point at which the cost exceeds the budget.
pub fn compute_cap(residual: &[u32], profile: &WeightProfile, remaining: u64) -> Result<f64> {
    if residual.is_empty() {
        return Err(Error::EmptyResidual);
    }
    let mut jumps: Vec<(f64, u64)> = Vec::new();
    for &i in residual {
        let step = i as u64;
        let scale = profile.scale(i);
        for k in 1..=remaining / step + 1 {
            jumps.push((k as f64 * scale, step));
        }
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cost = 0u64;
    let mut pos = 0;
    while pos < jumps.len() {
        let x = jumps[pos].0;
        let mut group = 0;
        while pos < jumps.len() && jumps[pos].0 == x {
            group += jumps[pos].1;
            pos += 1;
        }
        if cost + group > remaining {
            return Ok(x);
        }
        cost += group;
    }
    unreachable!("the last jump of every index alone exceeds the budget")
}

/// Box limits `m(i)`: `floor(x·Uᵢ)` taken as `x → C` from the left, the
/// largest box of the profile's shape that fits `remaining`.
pub fn box_limits(
    cap: f64,
    profile: &WeightProfile,
    residual: &[u32],
    remaining: u64,
) -> BTreeMap<u32, u64> {
    let limits: BTreeMap<u32, u64> = residual
        .iter()
        .map(|&i| {
            let scale = profile.scale(i);
            let mut k = (cap / scale).floor().max(0.0) as u64;
            while ((k + 1) as f64) * scale < cap {
                k += 1;
            }
            while k > 0 && (k as f64) * scale >= cap {
                k -= 1;
            }
            (i, k)
        })
        .collect();
    debug_assert!(limits.iter().map(|(&i, &m)| i as u64 * m).sum::<u64>() <= remaining);
    limits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChunkKind {
    Free,
    Boxed,
}

/// One node of the dissection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chunk {
    pub level: usize,
    pub kind: ChunkKind,
    /// `path[0]` fixes every index of `P`; `path[k]` fixes the overflow set `B_k`.
    pub path: Vec<BTreeMap<u32, u64>>,
    /// `N_level`, the indices still summed over.
    pub residual: Vec<u32>,
    /// `C₀ ≥ C₁ ≥ …`; a boxed chunk with a nonempty residual carries its own cap last.
    pub caps: Vec<f64>,
    /// Upper limits inherited from the parent box (levels ≥ 1).
    pub window: Option<BTreeMap<u32, u64>>,
    /// `m_level(i)` for boxed chunks.
    pub box_limits: BTreeMap<u32, u64>,
    /// `Σ_k R_k`.
    pub reserved: u64,
    /// `budget − reserved`.
    pub remaining: u64,
    #[serde(skip)]
    pub parent: Option<usize>,
}

/// Identifies a chunk: kind plus its fixed assignments level by level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ChunkKey {
    pub kind: ChunkKind,
    pub path: Vec<Vec<(u32, u64)>>,
}

impl ChunkKey {
    pub fn level(&self) -> usize {
        self.path.len() - 1
    }
}

impl Chunk {
    pub fn key(&self) -> ChunkKey {
        ChunkKey {
            kind: self.kind,
            path: self.path.iter().map(|m| m.iter().map(|(&i, &t)| (i, t)).collect()).collect(),
        }
    }

    /// Every fixed `tᵢ`.
    pub fn assigned(&self) -> BTreeMap<u32, u64> {
        self.path.iter().flat_map(|m| m.iter().map(|(&i, &t)| (i, t))).collect()
    }

    /// The overflow sets `B₁, …, B_level`.
    pub fn overflow_sets(&self) -> Vec<Vec<u32>> {
        self.path.iter().skip(1).map(|m| m.keys().copied().collect()).collect()
    }

    /// `R_k` for `k = 0..=level`.
    pub fn reserved_by_level(&self) -> Vec<u64> {
        self.path.iter().map(|m| m.iter().map(|(&i, &t)| i as u64 * t).sum()).collect()
    }

    /// Whether `alpha` is one of the terms summed by this chunk.
    pub fn contains(&self, alpha: &Occupation, budget: u64) -> bool {
        if alpha.weight() > budget {
            return false;
        }
        let assigned = self.assigned();
        if assigned.iter().any(|(&i, &t)| alpha.get(i) != t) {
            return false;
        }
        if alpha.iter().any(|(i, _)| !assigned.contains_key(&i) && !self.residual.contains(&i)) {
            return false;
        }
        self.residual.iter().all(|&i| {
            let a = alpha.get(i);
            match self.kind {
                ChunkKind::Boxed => a <= self.box_limits[&i],
                ChunkKind::Free => self.window.as_ref().is_none_or(|w| a <= w[&i]),
            }
        })
    }

    /// Number of occupations summed by this chunk.
    pub fn term_count(&self) -> u64 {
        match self.kind {
            ChunkKind::Boxed => self.box_limits.values().map(|&m| m + 1).product(),
            ChunkKind::Free => {
                let len = self.remaining as usize + 1;
                let mut counts = vec![0u64; len];
                counts[0] = 1;
                for &i in &self.residual {
                    let limit = self.window.as_ref().map(|w| w[&i]).unwrap_or(u64::MAX);
                    let mut next = vec![0u64; len];
                    for (w, &c) in counts.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        let mut alpha = 0;
                        let mut target = w;
                        while alpha <= limit && target < len {
                            next[target] += c;
                            alpha += 1;
                            target += i as usize;
                        }
                    }
                    counts = next;
                }
                counts.iter().sum()
            }
        }
    }
}

/// All chunks of one instance, parents before children.
#[derive(Debug, Clone)]
pub struct ChunkTree {
    pub chunks: Vec<Chunk>,
    pub budget: u64,
    pub positive: Vec<u32>,
    pub negative: Vec<u32>,
}

impl ChunkTree {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Chunk> {
        self.chunks.iter()
    }

    pub fn children(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.chunks
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.parent == Some(idx))
            .map(|(k, _)| k)
    }

    pub fn max_level(&self) -> usize {
        self.chunks.iter().map(|c| c.level).max().unwrap_or(0)
    }

    pub fn find(&self, key: &ChunkKey) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.key() == *key)
    }
}

struct Builder<'a> {
    params: &'a ModelParams,
    profile: WeightProfile,
    budget: u64,
    chunks: Vec<Chunk>,
    node_cap: usize,
}

impl Builder<'_> {
    fn push(&mut self, chunk: Chunk) -> Result<usize> {
        if self.chunks.len() >= self.node_cap {
            return Err(Error::TreeOverflow { cap: self.node_cap });
        }
        self.chunks.push(chunk);
        Ok(self.chunks.len() - 1)
    }

    fn expand(
        &mut self,
        path: Vec<BTreeMap<u32, u64>>,
        reserved: u64,
        residual: Vec<u32>,
        window: Option<BTreeMap<u32, u64>>,
        mut caps: Vec<f64>,
        parent: Option<usize>,
    ) -> Result<()> {
        let level = path.len() - 1;
        let remaining = self.budget - reserved;
        if self.params.reaches_half_budget(reserved) {
            let chunk = Chunk {
                level,
                kind: ChunkKind::Free,
                path,
                residual,
                caps,
                window,
                box_limits: BTreeMap::new(),
                reserved,
                remaining,
                parent,
            };
            self.push(chunk)?;
            return Ok(());
        }
        if residual.is_empty() {
            let chunk = Chunk {
                level,
                kind: ChunkKind::Boxed,
                path,
                residual,
                caps,
                window,
                box_limits: BTreeMap::new(),
                reserved,
                remaining,
                parent,
            };
            self.push(chunk)?;
            return Ok(());
        }
        let cap = compute_cap(&residual, &self.profile, remaining)?;
        let limits = box_limits(cap, &self.profile, &residual, remaining);
        caps.push(cap);
        let id = self.push(Chunk {
            level,
            kind: ChunkKind::Boxed,
            path: path.clone(),
            residual: residual.clone(),
            caps: caps.clone(),
            window: window.clone(),
            box_limits: limits.clone(),
            reserved,
            remaining,
            parent,
        })?;

        for mask in 1u32..(1 << residual.len()) {
            let subset: Vec<u32> = residual
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect();
            let ranges: Vec<(u64, u64)> = subset
                .iter()
                .map(|&i| {
                    let budget_limit = remaining / i as u64;
                    let upper = window.as_ref().map_or(budget_limit, |w| w[&i].min(budget_limit));
                    (limits[&i] + 1, upper)
                })
                .collect();
            if ranges.iter().any(|&(lo, hi)| lo > hi) {
                continue;
            }
            let mut overflow_values = Vec::new();
            collect_overflows(&subset, &ranges, remaining, &mut Vec::new(), &mut overflow_values);
            let next_residual: Vec<u32> =
                residual.iter().copied().filter(|i| !subset.contains(i)).collect();
            let next_window: BTreeMap<u32, u64> =
                next_residual.iter().map(|&i| (i, limits[&i])).collect();
            for values in overflow_values {
                let extra: u64 = subset.iter().zip(&values).map(|(&i, &t)| i as u64 * t).sum();
                let mut next_path = path.clone();
                next_path.push(subset.iter().copied().zip(values).collect());
                self.expand(
                    next_path,
                    reserved + extra,
                    next_residual.clone(),
                    Some(next_window.clone()),
                    caps.clone(),
                    Some(id),
                )?;
            }
        }
        Ok(())
    }
}

/// All value vectors over `subset` within `ranges` whose weight fits `remaining`.
fn collect_overflows(
    subset: &[u32],
    ranges: &[(u64, u64)],
    remaining: u64,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let pos = current.len();
    if pos == subset.len() {
        out.push(current.clone());
        return;
    }
    let step = subset[pos] as u64;
    let (lo, hi) = ranges[pos];
    for t in lo..=hi {
        if t * step > remaining {
            break;
        }
        current.push(t);
        collect_overflows(subset, ranges, remaining - t * step, current, out);
        current.pop();
    }
}

/// Builds every chunk of the dissection.
pub fn build_chunks(
    params: &ModelParams,
    couplings: &CouplingSequence,
    node_cap: usize,
) -> Result<ChunkTree> {
    let indices = params.indices();
    let positive = couplings.positive(&indices);
    let negative = couplings.negative(&indices);
    let budget = params.budget();
    let mut builder = Builder {
        params,
        profile: WeightProfile::new(&indices, params.eps()),
        budget,
        chunks: Vec::new(),
        node_cap,
    };
    for t in enumerate_occupations(&positive, budget) {
        let assignment: BTreeMap<u32, u64> = positive.iter().map(|&i| (i, t.get(i))).collect();
        builder.expand(vec![assignment], t.weight(), negative.clone(), None, Vec::new(), None)?;
    }
    Ok(ChunkTree { chunks: builder.chunks, budget, positive, negative })
}

/// The key of the unique chunk containing the admissible occupation `alpha`.
pub fn classify_occupation(
    alpha: &Occupation,
    couplings: &CouplingSequence,
    params: &ModelParams,
) -> ChunkKey {
    let indices = params.indices();
    let profile = WeightProfile::new(&indices, params.eps());
    let budget = params.budget();
    let positive = couplings.positive(&indices);
    let mut residual = couplings.negative(&indices);
    let mut path = vec![positive.iter().map(|&i| (i, alpha.get(i))).collect::<Vec<_>>()];
    let mut reserved: u64 = positive.iter().map(|&i| i as u64 * alpha.get(i)).sum();
    loop {
        if params.reaches_half_budget(reserved) {
            return ChunkKey { kind: ChunkKind::Free, path };
        }
        if residual.is_empty() {
            return ChunkKey { kind: ChunkKind::Boxed, path };
        }
        let remaining = budget - reserved;
        let cap = compute_cap(&residual, &profile, remaining).expect("nonempty residual");
        let limits = box_limits(cap, &profile, &residual, remaining);
        let overflow: Vec<(u32, u64)> = residual
            .iter()
            .filter(|&&i| alpha.get(i) > limits[&i])
            .map(|&i| (i, alpha.get(i)))
            .collect();
        if overflow.is_empty() {
            return ChunkKey { kind: ChunkKind::Boxed, path };
        }
        reserved += overflow.iter().map(|&(i, t)| i as u64 * t).sum::<u64>();
        residual.retain(|i| overflow.iter().all(|&(j, _)| j != *i));
        path.push(overflow);
    }
}

type ResidualKey = (Vec<u32>, Option<Vec<u64>>, u64);

/// Evaluates chunk sums against shared term tables, memoising the
/// constrained residual sums that recur across chunks.
pub struct ChunkEvaluator<'a> {
    params: &'a ModelParams,
    table: TermTable,
    memo: HashMap<ResidualKey, Vec<RBig>>,
}

impl<'a> ChunkEvaluator<'a> {
    pub fn new(params: &'a ModelParams, couplings: &CouplingSequence) -> Self {
        Self { params, table: TermTable::new(params, couplings), memo: HashMap::new() }
    }

    pub fn table(&self) -> &TermTable {
        &self.table
    }

    /// `Π (Jᵢ pⁱ N)^tᵢ / tᵢ!` over the fixed indices.
    pub fn assigned_product(&self, chunk: &Chunk) -> RBig {
        chunk
            .path
            .iter()
            .flat_map(|m| m.iter())
            .fold(RBig::ONE, |acc, (&i, &t)| acc * self.table.term(i, t))
    }

    /// Weight coefficients of the residual sum, indexed by residual weight.
    pub fn residual_polynomial(&mut self, chunk: &Chunk) -> Vec<RBig> {
        let (window, max_weight) = match chunk.kind {
            ChunkKind::Boxed => {
                let top = chunk.box_limits.iter().map(|(&i, &m)| i as u64 * m).sum();
                (Some(chunk.box_limits.clone()), top)
            }
            ChunkKind::Free => (chunk.window.clone(), chunk.remaining),
        };
        let key = (
            chunk.residual.clone(),
            window.as_ref().map(|w| chunk.residual.iter().map(|i| w[i]).collect()),
            max_weight,
        );
        if let Some(poly) = self.memo.get(&key) {
            return poly.clone();
        }
        let poly = self.table.weight_polynomial(&chunk.residual, window.as_ref(), max_weight);
        self.memo.insert(key, poly.clone());
        poly
    }

    /// The chunk's sub-sum of `Z`, exactly.
    pub fn exact(&mut self, chunk: &Chunk) -> RBig {
        let fixed = self.assigned_product(chunk);
        let residual = match chunk.kind {
            ChunkKind::Boxed => chunk
                .box_limits
                .iter()
                .fold(RBig::ONE, |acc, (&i, &m)| acc * self.table.prefix(i, m)),
            ChunkKind::Free => self
                .residual_polynomial(chunk)
                .iter()
                .fold(RBig::ZERO, |acc, c| acc + c),
        };
        fixed * residual
    }

    /// The chunk's sub-sum with every term weighted by `β̃(N, Σ i·αᵢ)`.
    pub fn dressed(&mut self, chunk: &Chunk, precision: usize, dressing: Dressing) -> Result<Float> {
        let fixed = self.assigned_product(chunk);
        let poly: Vec<RBig> =
            self.residual_polynomial(chunk).into_iter().map(|c| c * &fixed).collect();
        contract_with_dressing(self.params, &poly, chunk.reserved, precision, dressing)
    }
}

/// Exact value of a single chunk.
pub fn eval_chunk(chunk: &Chunk, couplings: &CouplingSequence, params: &ModelParams) -> RBig {
    ChunkEvaluator::new(params, couplings).exact(chunk)
}

/// Dressed (`Z*`-style) value of a single chunk.
pub fn eval_chunk_dressed(
    chunk: &Chunk,
    couplings: &CouplingSequence,
    params: &ModelParams,
    precision: usize,
) -> Result<Float> {
    ChunkEvaluator::new(params, couplings).dressed(chunk, precision, Dressing::Entropy)
}

/// Exact values of every chunk in tree order.
pub fn evaluate_tree(
    tree: &ChunkTree,
    params: &ModelParams,
    couplings: &CouplingSequence,
) -> Vec<RBig> {
    let mut evaluator = ChunkEvaluator::new(params, couplings);
    tree.chunks.iter().map(|c| evaluator.exact(c)).collect()
}

/// `Z = T₁ + T₂ + T₃`: level-0 boxed, higher-level boxed, and free chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct TSplit {
    pub t1: RBig,
    pub t2: RBig,
    pub t3: RBig,
    pub t1_chunks: usize,
    pub t2_chunks: usize,
    pub t3_chunks: usize,
}

impl TSplit {
    pub fn total(&self) -> RBig {
        &self.t1 + &self.t2 + &self.t3
    }
}

pub fn split_t(tree: &ChunkTree, values: &[RBig]) -> TSplit {
    let mut split = TSplit {
        t1: RBig::ZERO,
        t2: RBig::ZERO,
        t3: RBig::ZERO,
        t1_chunks: 0,
        t2_chunks: 0,
        t3_chunks: 0,
    };
    for (chunk, value) in tree.chunks.iter().zip(values) {
        match (chunk.kind, chunk.level) {
            (ChunkKind::Boxed, 0) => {
                split.t1 = &split.t1 + value;
                split.t1_chunks += 1;
            }
            (ChunkKind::Boxed, _) => {
                split.t2 = &split.t2 + value;
                split.t2_chunks += 1;
            }
            (ChunkKind::Free, _) => {
                split.t3 = &split.t3 + value;
                split.t3_chunks += 1;
            }
        }
    }
    split
}

/// One row of the JSON chunk report.
#[derive(Debug, Clone, Serialize)]
pub struct ChunkRecord {
    pub level: usize,
    pub kind: ChunkKind,
    pub assignments: Vec<BTreeMap<u32, u64>>,
    pub caps: Vec<f64>,
    pub box_limits: BTreeMap<u32, u64>,
    pub window: Option<BTreeMap<u32, u64>>,
    pub reserved: u64,
    pub terms: u64,
    pub value: String,
    pub value_f64: f64,
}

pub fn chunk_records(tree: &ChunkTree, values: &[RBig]) -> Vec<ChunkRecord> {
    tree.chunks
        .iter()
        .zip(values)
        .map(|(c, v)| ChunkRecord {
            level: c.level,
            kind: c.kind,
            assignments: c.path.clone(),
            caps: c.caps.clone(),
            box_limits: c.box_limits.clone(),
            window: c.window.clone(),
            reserved: c.reserved,
            terms: c.term_count(),
            value: v.to_string(),
            value_f64: rational_to_f64(v),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_couplings;
    use crate::numeric::parse_rational;
    use crate::partition::{eval_z, DEFAULT_TERM_CAP};

    fn q(s: &str) -> RBig {
        parse_rational(s).unwrap()
    }

    fn couplings(pairs: &[(u32, &str)]) -> CouplingSequence {
        validate_couplings(pairs.iter().map(|&(i, v)| (i, q(v))).collect(), RBig::ONE).unwrap()
    }

    #[test]
    fn weight_profile_values() {
        let w = weights(&[2, 3, 4], 1.0);
        assert_eq!(w.weight(2), 1.0 / 8.0);
        assert_eq!(w.weight(3), 1.0 / 27.0);
        assert!(w.weight(2) > w.weight(3) && w.weight(3) > w.weight(4));
    }

    #[test]
    fn cap_single_index() {
        let w = weights(&[2, 3], 1.0);
        let c = compute_cap(&[2], &w, 10).unwrap();
        assert_eq!(c, 48.0);
        assert_eq!(box_limits(c, &w, &[2], 10), BTreeMap::from([(2, 5)]));
    }

    #[test]
    fn cap_left_limit_protects_budget() {
        let w = weights(&[2, 3], 1.0);
        let c = compute_cap(&[2, 3], &w, 2).unwrap();
        assert_eq!(c, 16.0);
        assert_eq!(box_limits(c, &w, &[2, 3], 2), BTreeMap::from([(2, 1), (3, 0)]));
    }

    #[test]
    fn cap_zero_budget() {
        let w = weights(&[3, 5, 7], 1.0);
        let c = compute_cap(&[3, 5, 7], &w, 0).unwrap();
        assert_eq!(c, 27.0);
        assert!(box_limits(c, &w, &[3, 5, 7], 0).values().all(|&m| m == 0));
    }

    #[test]
    fn empty_residual_has_no_cap() {
        let w = weights(&[2], 1.0);
        assert!(matches!(compute_cap(&[], &w, 4), Err(Error::EmptyResidual)));
    }

    #[test]
    fn non_integer_eps_still_fits_budget() {
        let w = weights(&[2, 3, 4, 5], 0.37);
        for remaining in 0..40 {
            let c = compute_cap(&[2, 3, 4, 5], &w, remaining).unwrap();
            let m = box_limits(c, &w, &[2, 3, 4, 5], remaining);
            assert!(m.iter().map(|(&i, &k)| i as u64 * k).sum::<u64>() <= remaining);
        }
    }

    #[test]
    fn all_positive_couplings_give_level_zero_only() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = CouplingSequence::saturated(&RBig::ONE, 4);
        let tree = build_chunks(&params, &c, DEFAULT_NODE_CAP).unwrap();
        assert!(tree.iter().all(|ch| ch.level == 0 && ch.residual.is_empty()));
    }

    #[test]
    fn single_negative_index_hand_construction() {
        // N = 24, p = 1/2: budget 6, M̃ = 3. P = {3, 4} with J ≥ 0, N = {2}.
        let params = ModelParams::new(24, q("1/2"), RBig::ONE, 4, 1.0).unwrap();
        let c = couplings(&[(2, "-1/2"), (3, "1/3"), (4, "1/5")]);
        let tree = build_chunks(&params, &c, DEFAULT_NODE_CAP).unwrap();
        // t on P with 3t3 + 4t4 <= 6: (0,0), (1,0), (2,0), (0,1).
        let roots: Vec<&Chunk> = tree.iter().filter(|ch| ch.level == 0).collect();
        assert_eq!(roots.len(), 4);
        let root = roots.iter().find(|ch| ch.reserved == 0).unwrap();
        assert_eq!(root.kind, ChunkKind::Boxed);
        // floor(x/8) <= 3 until x = 32.
        assert_eq!(root.caps, vec![32.0]);
        assert_eq!(root.box_limits, BTreeMap::from([(2, 3)]));
        // No level-1 child: α₂ > 3 would need 2α₂ >= 8 > 6.
        assert_eq!(tree.max_level(), 0);
        let values = evaluate_tree(&tree, &params, &c);
        let z = eval_z(&params, &c, DEFAULT_TERM_CAP).unwrap().value;
        assert_eq!(values.iter().fold(RBig::ZERO, |a, v| a + v), z);
    }

    #[test]
    fn level_one_chunks_appear_when_box_is_small() {
        // Budget 6 with N = {3}: U₃ = 1/27, so floor(x/27)*3 <= 6 until x = 81, m₀(3) = 2 = budget/3.
        // With eps = 2 (U₂ = 1/16, U₃ = 1/81) and N = {2, 3} the box is lopsided.
        let params = ModelParams::new(24, q("1/2"), RBig::ONE, 4, 2.0).unwrap();
        let c = couplings(&[(2, "-1/2"), (3, "-1/3"), (4, "1/5")]);
        let tree = build_chunks(&params, &c, DEFAULT_NODE_CAP).unwrap();
        assert!(tree.max_level() >= 1);
        let values = evaluate_tree(&tree, &params, &c);
        let z = eval_z(&params, &c, DEFAULT_TERM_CAP).unwrap().value;
        assert_eq!(values.iter().fold(RBig::ZERO, |a, v| a + v), z);
        for alpha in enumerate_occupations(&params.indices(), params.budget()) {
            let owners = tree.iter().filter(|ch| ch.contains(&alpha, params.budget())).count();
            assert_eq!(owners, 1, "{alpha:?}");
            let key = classify_occupation(&alpha, &c, &params);
            assert!(tree.find(&key).unwrap().contains(&alpha, params.budget()));
        }
    }

    #[test]
    fn zero_couplings_split() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = CouplingSequence::zero(&RBig::ONE);
        let tree = build_chunks(&params, &c, DEFAULT_NODE_CAP).unwrap();
        let values = evaluate_tree(&tree, &params, &c);
        let split = split_t(&tree, &values);
        assert_eq!(split.t1, RBig::ONE);
        assert_eq!(split.t2, RBig::ZERO);
        assert_eq!(split.t3, RBig::ZERO);
    }

    #[test]
    fn all_zero_occupation_is_level_zero_boxed() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = couplings(&[(2, "1/2"), (3, "-1/3"), (4, "-1/5")]);
        let key = classify_occupation(&Occupation::new(), &c, &params);
        assert_eq!(key.kind, ChunkKind::Boxed);
        assert_eq!(key.level(), 0);
        assert_eq!(key.path[0], vec![(2, 0)]);
    }

    #[test]
    fn heavy_positive_assignment_is_free() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = couplings(&[(2, "1/2"), (3, "-1/3"), (4, "-1/5")]);
        let alpha = Occupation::from_pairs([(2, 2)]);
        let key = classify_occupation(&alpha, &c, &params);
        assert_eq!((key.kind, key.level()), (ChunkKind::Free, 0));
    }

    #[test]
    fn node_cap_is_enforced() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = couplings(&[(2, "1/2"), (3, "-1/3"), (4, "-1/5")]);
        assert!(matches!(build_chunks(&params, &c, 2), Err(Error::TreeOverflow { cap: 2 })));
    }

    #[test]
    fn boxed_value_with_single_negative_index() {
        let params = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        let c = couplings(&[(2, "-1/2"), (3, "1/3"), (4, "1/5")]);
        let tree = build_chunks(&params, &c, DEFAULT_NODE_CAP).unwrap();
        let root = tree.iter().find(|ch| ch.level == 0 && ch.reserved == 0).unwrap();
        let a2 = q("-1/2") * q("3");
        let mut expected = RBig::ZERO;
        let mut term = RBig::ONE;
        for alpha in 0..=root.box_limits[&2] {
            if alpha > 0 {
                term = term * &a2 / RBig::from(alpha);
            }
            expected += &term;
        }
        assert_eq!(eval_chunk(root, &c, &params), expected);
    }
}
