//! Multi-index sets parameterizing the dictionaries.
//!
//! Three standard families are generated directly: tensor-product
//! (`ι_k ≤ t` for all k), total-degree (`Σ ι_k ≤ t`) and hyperbolic-cross
//! (`Π (ι_k+1) ≤ t+1`). Entries are nonnegative for algebraic bases and may
//! be signed for trigonometric ones (membership then uses `|ι_k|`).
//!
//! Values are immutable after construction and safe to share across threads.

use crate::{Error, Result};
use std::collections::HashSet;
use std::fmt;

/// Hard cap on generated cardinalities; exceeding it is an explicit error
/// rather than a silent truncation.
pub const CARDINALITY_CAP: usize = 10_000_000;

/// One d-dimensional multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        assert!(!entries.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Sum of absolute entries (total degree).
    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|e| e.abs()).sum()
    }

    /// Largest absolute entry (max degree).
    pub fn max_degree(&self) -> i64 {
        self.0.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    fn abs_entries(&self) -> Vec<i64> {
        self.0.iter().map(|e| e.abs()).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Enumeration order of the indices within a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrdering {
    Lexicographic,
    TotalDegree,
    MaxDegree,
}

impl IndexOrdering {
    pub fn token(&self) -> &'static str {
        match self {
            IndexOrdering::Lexicographic => "lex",
            IndexOrdering::TotalDegree => "td",
            IndexOrdering::MaxDegree => "md",
        }
    }

    pub fn from_token(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(IndexOrdering::Lexicographic),
            "td" => Ok(IndexOrdering::TotalDegree),
            "md" => Ok(IndexOrdering::MaxDegree),
            other => Err(Error::Parse(format!("unknown ordering '{other}'"))),
        }
    }
}

/// Which family generated the set (order parameter included).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetFamily {
    TensorProduct(usize),
    TotalDegree(usize),
    HyperbolicCross(usize),
    Custom,
}

impl SetFamily {
    pub fn token(&self) -> String {
        match self {
            SetFamily::TensorProduct(t) => format!("tp:{t}"),
            SetFamily::TotalDegree(t) => format!("td:{t}"),
            SetFamily::HyperbolicCross(t) => format!("hc:{t}"),
            SetFamily::Custom => "custom".to_string(),
        }
    }

    pub fn from_token(s: &str) -> Result<Self> {
        if s == "custom" {
            return Ok(SetFamily::Custom);
        }
        let (name, order) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unknown family '{s}'")))?;
        let t: usize = order
            .parse()
            .map_err(|_| Error::Parse(format!("bad family order '{order}'")))?;
        match name {
            "tp" => Ok(SetFamily::TensorProduct(t)),
            "td" => Ok(SetFamily::TotalDegree(t)),
            "hc" => Ok(SetFamily::HyperbolicCross(t)),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

/// Ordered, duplicate-free list of multi-indices of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    indices: Vec<MultiIndex>,
    dimension: usize,
    ordering: IndexOrdering,
    family: SetFamily,
}

/// Comparator backing each ordering. Ties within equal total/max degree are
/// broken by *descending* lexicographic comparison of the entries, so e.g.
/// (1,0) precedes (0,1) at degree one.
fn compare(ordering: IndexOrdering, a: &MultiIndex, b: &MultiIndex) -> std::cmp::Ordering {
    match ordering {
        IndexOrdering::Lexicographic => a.entries().cmp(b.entries()),
        IndexOrdering::TotalDegree => a
            .total_degree()
            .cmp(&b.total_degree())
            .then_with(|| b.abs_entries().cmp(&a.abs_entries()))
            .then_with(|| a.entries().cmp(b.entries())),
        IndexOrdering::MaxDegree => a
            .max_degree()
            .cmp(&b.max_degree())
            .then_with(|| b.abs_entries().cmp(&a.abs_entries()))
            .then_with(|| a.entries().cmp(b.entries())),
    }
}

impl MultiIndexSet {
    /// Build a custom set from explicit indices; rejects duplicates and
    /// dimension mismatches, and records the actual ordering as given.
    pub fn custom(indices: Vec<MultiIndex>, ordering: IndexOrdering) -> Result<Self> {
        let dimension = indices
            .first()
            .map(MultiIndex::dimension)
            .ok_or_else(|| Error::Parse("empty index set".into()))?;
        let mut seen = HashSet::with_capacity(indices.len());
        for idx in &indices {
            if idx.dimension() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: idx.dimension() });
            }
            if !seen.insert(idx.entries().to_vec()) {
                return Err(Error::DuplicateIndex(idx.to_string()));
            }
        }
        Ok(MultiIndexSet { indices, dimension, ordering, family: SetFamily::Custom })
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ordering(&self) -> IndexOrdering {
        self.ordering
    }

    pub fn family(&self) -> SetFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, entries: &[i64]) -> bool {
        self.indices.iter().any(|idx| idx.entries() == entries)
    }

    pub fn has_signed_entries(&self) -> bool {
        self.indices.iter().any(|idx| !idx.is_nonnegative())
    }

    /// Replace the family provenance tag (used when loading from files).
    pub fn with_family(mut self, family: SetFamily) -> MultiIndexSet {
        self.family = family;
        self
    }

    /// True iff the stored sequence is sorted according to the declared
    /// ordering (the type invariant for generated and loaded sets).
    pub fn matches_ordering(&self) -> bool {
        self.indices
            .windows(2)
            .all(|w| compare(self.ordering, &w[0], &w[1]) != std::cmp::Ordering::Greater)
    }

    /// Stable reorder; membership is unchanged, only the enumeration and the
    /// ordering metadata move.
    pub fn reorder(&self, ordering: IndexOrdering) -> MultiIndexSet {
        let mut indices = self.indices.clone();
        indices.sort_by(|a, b| compare(ordering, a, b));
        MultiIndexSet { indices, dimension: self.dimension, ordering, family: self.family }
    }

    /// True iff the set is downward closed: for every member ι, every κ ≤ ι
    /// componentwise (in absolute value) is also a member.
    pub fn is_lower(&self) -> bool {
        let members: HashSet<Vec<i64>> =
            self.indices.iter().map(|i| i.abs_entries()).collect();
        for idx in &self.indices {
            let abs = idx.abs_entries();
            // checking one step down in each coordinate suffices by induction
            for k in 0..self.dimension {
                if abs[k] > 0 {
                    let mut lower = abs.clone();
                    lower[k] -= 1;
                    if !members.contains(&lower) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All sign patterns of every index; membership rule becomes `|ι_k|`.
    pub fn signed_variant(&self) -> Result<MultiIndexSet> {
        if self.has_signed_entries() {
            return Err(Error::SignedEntries);
        }
        // count first so the cap check precedes materialization
        let mut count: u128 = 0;
        for idx in &self.indices {
            let patterns: u128 = idx
                .entries()
                .iter()
                .map(|&e| if e == 0 { 1u128 } else { 2u128 })
                .product();
            count += patterns;
            if count > CARDINALITY_CAP as u128 {
                return Err(Error::CardinalityCap { would_be: count, cap: CARDINALITY_CAP });
            }
        }
        let mut out = Vec::with_capacity(count as usize);
        for idx in &self.indices {
            expand_signs(idx.entries(), 0, &mut Vec::with_capacity(self.dimension), &mut out);
        }
        let mut set = MultiIndexSet {
            indices: out,
            dimension: self.dimension,
            ordering: self.ordering,
            family: self.family,
        };
        set = set.reorder(self.ordering);
        Ok(set)
    }
}

fn expand_signs(entries: &[i64], k: usize, prefix: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
    if k == entries.len() {
        out.push(MultiIndex::new(prefix.clone()));
        return;
    }
    let e = entries[k];
    prefix.push(e);
    expand_signs(entries, k + 1, prefix, out);
    prefix.pop();
    if e != 0 {
        prefix.push(-e);
        expand_signs(entries, k + 1, prefix, out);
        prefix.pop();
    }
}

/// Exact cardinality of the tensor-product set, (t+1)^d, checked.
pub fn tensor_product_cardinality(d: usize, t: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..d {
        n = n.saturating_mul((t as u128) + 1);
    }
    n
}

/// Exact cardinality of the total-degree set, C(d+t, d).
pub fn total_degree_cardinality(d: usize, t: usize) -> u128 {
    let mut n: u128 = 1;
    for i in 1..=d as u128 {
        n = n.saturating_mul(t as u128 + i) / i;
    }
    n
}

/// All ι with ι_k ≤ t for every k, in lexicographic order.
pub fn gen_tensor_product(d: usize, t: usize) -> Result<MultiIndexSet> {
    assert!(d >= 1);
    let n = tensor_product_cardinality(d, t);
    if n > CARDINALITY_CAP as u128 {
        return Err(Error::CardinalityCap { would_be: n, cap: CARDINALITY_CAP });
    }
    let mut indices = Vec::with_capacity(n as usize);
    let mut current = vec![0i64; d];
    loop {
        indices.push(MultiIndex::new(current.clone()));
        // odometer increment, last coordinate fastest: lexicographic order
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(MultiIndexSet {
                    indices,
                    dimension: d,
                    ordering: IndexOrdering::Lexicographic,
                    family: SetFamily::TensorProduct(t),
                });
            }
            k -= 1;
            if current[k] < t as i64 {
                current[k] += 1;
                current[k + 1..].fill(0);
                break;
            }
        }
    }
}

/// All ι with Σ ι_k ≤ t, in lexicographic order.
pub fn gen_total_degree(d: usize, t: usize) -> Result<MultiIndexSet> {
    assert!(d >= 1);
    let n = total_degree_cardinality(d, t);
    if n > CARDINALITY_CAP as u128 {
        return Err(Error::CardinalityCap { would_be: n, cap: CARDINALITY_CAP });
    }
    let mut indices = Vec::with_capacity(n as usize);
    let mut prefix = Vec::with_capacity(d);
    descend_td(d, t as i64, &mut prefix, &mut indices);
    Ok(MultiIndexSet {
        indices,
        dimension: d,
        ordering: IndexOrdering::Lexicographic,
        family: SetFamily::TotalDegree(t),
    })
}

fn descend_td(d: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == d {
        out.push(MultiIndex::new(prefix.clone()));
        return;
    }
    for e in 0..=budget {
        prefix.push(e);
        descend_td(d, budget - e, prefix, out);
        prefix.pop();
    }
}

/// All ι with Π (ι_k+1) ≤ t+1, by depth-first descent with the running
/// product as pruning bound; never materializes a tensor-product superset.
pub fn gen_hyperbolic_cross(d: usize, t: usize) -> Result<MultiIndexSet> {
    assert!(d >= 1);
    let bound = t as u128 + 1;
    let mut indices = Vec::new();
    let mut prefix = Vec::with_capacity(d);
    descend_hc(d, bound, 1, &mut prefix, &mut indices)?;
    Ok(MultiIndexSet {
        indices,
        dimension: d,
        ordering: IndexOrdering::Lexicographic,
        family: SetFamily::HyperbolicCross(t),
    })
}

fn descend_hc(
    d: usize,
    bound: u128,
    product: u128,
    prefix: &mut Vec<i64>,
    out: &mut Vec<MultiIndex>,
) -> Result<()> {
    if prefix.len() == d {
        if out.len() == CARDINALITY_CAP {
            return Err(Error::CardinalityCap {
                would_be: CARDINALITY_CAP as u128 + 1,
                cap: CARDINALITY_CAP,
            });
        }
        out.push(MultiIndex::new(prefix.clone()));
        return Ok(());
    }
    let mut e: i64 = 0;
    loop {
        let next = product * (e as u128 + 1);
        if next > bound {
            break;
        }
        prefix.push(e);
        descend_hc(d, bound, next, prefix, out)?;
        prefix.pop();
        e += 1;
    }
    Ok(())
}

/// Every lower set of cardinality ≤ s in dimension d (nonnegative indices),
/// as sorted entry lists. Exact enumeration; feasible for small d and s only.
pub fn enumerate_lower_sets(d: usize, s: usize) -> Vec<Vec<Vec<i64>>> {
    // grow sets one admissible index at a time; canonicalize to dedup
    let zero = vec![0i64; d];
    let mut levels: Vec<HashSet<Vec<Vec<i64>>>> = vec![HashSet::new(); s + 1];
    if s == 0 {
        return Vec::new();
    }
    levels[1].insert(vec![zero.clone()]);
    for size in 1..s {
        let current: Vec<Vec<Vec<i64>>> = levels[size].iter().cloned().collect();
        for set in current {
            let members: HashSet<Vec<i64>> = set.iter().cloned().collect();
            // candidate extensions: successors of members whose predecessors
            // are all present
            let mut candidates: HashSet<Vec<i64>> = HashSet::new();
            for m in &set {
                for k in 0..d {
                    let mut up = m.clone();
                    up[k] += 1;
                    if members.contains(&up) {
                        continue;
                    }
                    let admissible = (0..d).all(|j| {
                        if up[j] == 0 {
                            true
                        } else {
                            let mut down = up.clone();
                            down[j] -= 1;
                            members.contains(&down)
                        }
                    });
                    if admissible {
                        candidates.insert(up);
                    }
                }
            }
            for c in candidates {
                let mut grown = set.clone();
                grown.push(c);
                grown.sort();
                levels[size + 1].insert(grown);
            }
        }
    }
    let mut all = Vec::new();
    for level in levels.into_iter().skip(1) {
        let mut v: Vec<Vec<Vec<i64>>> = level.into_iter().collect();
        v.sort();
        all.extend(v);
    }
    all
}
