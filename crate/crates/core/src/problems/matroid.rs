//! Minimum-cost base of a matroid under stochastic element costs.
//!
//! Elements are indexed `0..n`; identifiers print them 1-based.

use std::collections::{HashSet, VecDeque};
use std::fmt::Debug;

use rand::seq::index::sample;
use rand::RngCore;
use thiserror::Error;

use super::Recipe;
use crate::env::{Environment, ProductEnvironment};
use crate::params::ParamError;
use crate::problem::{EnumerationBudgetExceeded, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("{elements:?} is not a base (rank {rank}, matroid rank {expected})")]
    NotABase {
        elements: Vec<usize>,
        rank: usize,
        expected: usize,
    },
    #[error("element {0} is already in the base")]
    ElementInBase(usize),
    #[error("invalid matroid: {0}")]
    Invalid(String),
}

/// Rank-oracle access to a matroid.
pub trait Matroid: Debug + Send + Sync {
    fn ground_size(&self) -> usize;

    /// Size of the largest independent subset of `subset`.
    fn rank_of(&self, subset: &[usize]) -> usize;

    fn rank(&self) -> usize {
        let all: Vec<usize> = (0..self.ground_size()).collect();
        self.rank_of(&all)
    }

    /// The unique circuit in `base + s`. Callers guarantee `base` is a base and `s` is outside it.
    fn circuit(&self, base: &[usize], s: usize) -> Vec<usize> {
        rank_oracle_circuit(self, base, s)
    }
}

/// `{ t in B + s : rank((B + s) - t) = r }`, sorted ascending.
pub fn rank_oracle_circuit<M: Matroid + ?Sized>(m: &M, base: &[usize], s: usize) -> Vec<usize> {
    let r = m.rank();
    let mut extended = base.to_vec();
    extended.push(s);
    extended.sort_unstable();
    extended
        .iter()
        .copied()
        .filter(|&t| {
            let without: Vec<usize> = extended.iter().copied().filter(|&e| e != t).collect();
            m.rank_of(&without) == r
        })
        .collect()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Cycle matroid of an undirected multigraph; elements are edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicMatroid {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphicMatroid {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self, MatroidError> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= nodes || v >= nodes) {
            return Err(MatroidError::Invalid(format!(
                "edge ({u}, {v}) references a node outside 0..{nodes}"
            )));
        }
        Ok(Self { nodes, edges })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.nodes <= 1 || self.rank() == self.nodes - 1
    }

    /// Edge ids on the tree path between `from` and `to`, using only `tree` edges.
    fn tree_path(&self, tree: &[usize], from: usize, to: usize) -> Vec<usize> {
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nodes];
        for &e in tree {
            let (u, v) = self.edges[e];
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        let mut via: Vec<Option<(usize, usize)>> = vec![None; self.nodes];
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(v, e) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    via[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = to;
        while node != from {
            let (prev, e) = via[node].expect("base spans every component");
            path.push(e);
            node = prev;
        }
        path
    }
}

impl Matroid for GraphicMatroid {
    fn ground_size(&self) -> usize {
        self.edges.len()
    }

    fn rank_of(&self, subset: &[usize]) -> usize {
        let mut sets = DisjointSets::new(self.nodes);
        subset
            .iter()
            .filter(|&&e| {
                let (u, v) = self.edges[e];
                sets.union(u, v)
            })
            .count()
    }

    /// Fundamental cycle of `s` in the spanning forest `base`.
    fn circuit(&self, base: &[usize], s: usize) -> Vec<usize> {
        let (u, v) = self.edges[s];
        let mut cycle = if u == v {
            Vec::new()
        } else {
            self.tree_path(base, u, v)
        };
        cycle.push(s);
        cycle.sort_unstable();
        cycle
    }
}

/// Every set of at most `rank` elements is independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMatroid {
    size: usize,
    rank: usize,
}

impl UniformMatroid {
    pub fn new(size: usize, rank: usize) -> Result<Self, MatroidError> {
        if rank > size {
            return Err(MatroidError::Invalid(format!(
                "rank {rank} exceeds ground set size {size}"
            )));
        }
        Ok(Self { size, rank })
    }
}

impl Matroid for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.size
    }

    fn rank_of(&self, subset: &[usize]) -> usize {
        subset.len().min(self.rank)
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn circuit(&self, base: &[usize], s: usize) -> Vec<usize> {
        let mut c = base.to_vec();
        c.push(s);
        c.sort_unstable();
        c
    }
}

/// Elements grouped into blocks; at most `capacity[b]` elements from block `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    /// `blocks[b]` lists the elements of block `b`; together they must cover `0..n` exactly once.
    pub fn new(blocks: &[Vec<usize>], capacities: Vec<usize>) -> Result<Self, MatroidError> {
        if blocks.len() != capacities.len() {
            return Err(MatroidError::Invalid(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            )));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n || block_of[e] != usize::MAX {
                    return Err(MatroidError::Invalid(format!(
                        "element {e} is out of range or listed twice"
                    )));
                }
                block_of[e] = b;
            }
        }
        Ok(Self {
            block_of,
            capacities,
        })
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn rank_of(&self, subset: &[usize]) -> usize {
        let mut counts = vec![0usize; self.capacities.len()];
        for &e in subset {
            counts[self.block_of[e]] += 1;
        }
        counts
            .iter()
            .zip(&self.capacities)
            .map(|(&c, &cap)| c.min(cap))
            .sum()
    }

    fn circuit(&self, base: &[usize], s: usize) -> Vec<usize> {
        let block = self.block_of[s];
        let mut c: Vec<usize> = base
            .iter()
            .copied()
            .filter(|&e| self.block_of[e] == block)
            .collect();
        c.push(s);
        c.sort_unstable();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidKind {
    Graphic(GraphicMatroid),
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
}

impl MatroidKind {
    fn inner(&self) -> &dyn Matroid {
        match self {
            MatroidKind::Graphic(m) => m,
            MatroidKind::Uniform(m) => m,
            MatroidKind::Partition(m) => m,
        }
    }
}

impl Matroid for MatroidKind {
    fn ground_size(&self) -> usize {
        self.inner().ground_size()
    }
    fn rank_of(&self, subset: &[usize]) -> usize {
        self.inner().rank_of(subset)
    }
    fn rank(&self) -> usize {
        self.inner().rank()
    }
    fn circuit(&self, base: &[usize], s: usize) -> Vec<usize> {
        self.inner().circuit(base, s)
    }
}

/// A base, elements sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatroidBase(Vec<usize>);

impl MatroidBase {
    /// Checks the base invariant against the rank oracle.
    pub fn new<M: Matroid + ?Sized>(m: &M, mut elements: Vec<usize>) -> Result<Self, MatroidError> {
        elements.sort_unstable();
        elements.dedup();
        let rank = m.rank_of(&elements);
        let expected = m.rank();
        if elements.iter().any(|&e| e >= m.ground_size()) || rank != expected || elements.len() != expected {
            return Err(MatroidError::NotABase {
                elements,
                rank,
                expected,
            });
        }
        Ok(Self(elements))
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }
}

/// Greedy base scanning elements in `order`.
pub fn greedy_base<M: Matroid + ?Sized>(m: &M, order: impl IntoIterator<Item = usize>) -> MatroidBase {
    let r = m.rank();
    let mut chosen = Vec::with_capacity(r);
    for e in order {
        if chosen.len() == r {
            break;
        }
        chosen.push(e);
        if m.rank_of(&chosen) < chosen.len() {
            chosen.pop();
        }
    }
    chosen.sort_unstable();
    MatroidBase(chosen)
}

/// Element order by ascending weight, ties by id.
fn ascending(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    order
}

/// `C(s, B)`, the unique circuit of `B + s`.
pub fn matroid_circuit<M: Matroid + ?Sized>(
    m: &M,
    base: &MatroidBase,
    s: usize,
) -> Result<Vec<usize>, MatroidError> {
    let rank = m.rank_of(&base.0);
    if rank < m.rank() || base.0.len() != m.rank() {
        return Err(MatroidError::NotABase {
            elements: base.0.clone(),
            rank,
            expected: m.rank(),
        });
    }
    if base.contains(s) {
        return Err(MatroidError::ElementInBase(s));
    }
    Ok(m.circuit(&base.0, s))
}

/// Circuit-swap neighbors `(B + s) - t`, by `s` then `t` ascending, deduplicated.
pub fn matroid_neighborhood<M: Matroid + ?Sized>(m: &M, base: &MatroidBase) -> Vec<MatroidBase> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in (0..m.ground_size()).filter(|&s| !base.contains(s)) {
        for t in m.circuit(&base.0, s) {
            if t == s {
                continue;
            }
            let mut next: Vec<usize> = base.0.iter().copied().filter(|&e| e != t).collect();
            next.push(s);
            next.sort_unstable();
            let next = MatroidBase(next);
            if seen.insert(next.clone()) {
                out.push(next);
            }
        }
    }
    out
}

/// `(1 - eps/(2r), 1 + eps, r, n r)`.
pub fn matroid_params(n: usize, r: usize, epsilon: f64) -> Result<Recipe, ParamError> {
    if r < 1 {
        return Err(ParamError::ParamOutOfRange {
            field: "rank",
            value: r as f64,
            reason: "matroid recipe needs rank at least 1",
        });
    }
    super::check_epsilon(epsilon)?;
    Ok(Recipe {
        beta: 1.0 - epsilon / (2.0 * r as f64),
        gamma: 1.0 + epsilon,
        c_max: r as f64,
        max_neighborhood: n * r,
    })
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn subset_count(n: usize, k: usize) -> Option<usize> {
    binomial(n, k)
}

/// Min-cost base with element costs in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct MatroidProblem {
    matroid: MatroidKind,
    rank: usize,
}

impl MatroidProblem {
    pub fn new(matroid: MatroidKind) -> Result<Self, MatroidError> {
        let rank = matroid.rank();
        if rank == 0 {
            return Err(MatroidError::Invalid("matroid has rank 0".into()));
        }
        Ok(Self { matroid, rank })
    }

    pub fn matroid(&self) -> &MatroidKind {
        &self.matroid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ground_size(&self) -> usize {
        self.matroid.ground_size()
    }

    pub fn base(&self, elements: Vec<usize>) -> Result<MatroidBase, MatroidError> {
        MatroidBase::new(&self.matroid, elements)
    }
}

impl Problem for MatroidProblem {
    type Coord = f64;
    type Solution = MatroidBase;

    fn outcome_dimension(&self) -> usize {
        self.ground_size()
    }

    fn validate_coordinate(&self, index: usize, value: f64) -> Result<(), String> {
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(format!("cost {value} of element {} is not a nonnegative number", index + 1))
        }
    }

    fn start(&self) -> MatroidBase {
        greedy_base(&self.matroid, 0..self.ground_size())
    }

    fn neighbors(&self, x: &MatroidBase) -> Vec<MatroidBase> {
        matroid_neighborhood(&self.matroid, x)
    }

    fn max_neighborhood(&self) -> usize {
        (self.ground_size() - self.rank) * self.rank
    }

    fn cost(&self, x: &MatroidBase, z: &[f64]) -> f64 {
        x.0.iter().map(|&e| z[e]).sum()
    }

    fn max_cost(&self, z: &[f64]) -> f64 {
        let mut order = ascending(z);
        order.reverse();
        self.cost(&greedy_base(&self.matroid, order), z)
    }

    fn product_expected_cost(&self, x: &MatroidBase, env: &ProductEnvironment<f64>) -> Option<f64> {
        Some(self.cost(x, &env.means()))
    }

    fn product_cost_bound(&self, env: &ProductEnvironment<f64>) -> Option<f64> {
        Some(self.max_cost(&env.max_outcome()))
    }

    fn exact_optimum(&self, env: &Environment<f64>) -> Option<MatroidBase> {
        Some(greedy_base(&self.matroid, ascending(&env.means())))
    }

    fn enumerate(&self, budget: usize) -> Result<Vec<MatroidBase>, EnumerationBudgetExceeded> {
        let n = self.ground_size();
        match subset_count(n, self.rank) {
            Some(c) if c <= budget => {}
            _ => return Err(EnumerationBudgetExceeded { budget }),
        }
        let mut out = Vec::new();
        for_each_subset(n, self.rank, |s| {
            if self.matroid.rank_of(s) == self.rank {
                out.push(MatroidBase(s.to_vec()));
            }
        });
        Ok(out)
    }

    fn sample_uniform(&self, rng: &mut dyn RngCore) -> MatroidBase {
        // Uniform r-subsets conditioned on independence are uniform over bases.
        loop {
            let mut s = sample(rng, self.ground_size(), self.rank).into_vec();
            s.sort_unstable();
            if self.matroid.rank_of(&s) == self.rank {
                return MatroidBase(s);
            }
        }
    }

    fn solution_id(&self, x: &MatroidBase) -> String {
        super::format_ids(&x.0)
    }

    fn parse_solution(&self, text: &str) -> Result<MatroidBase, String> {
        let ids = super::parse_ids(text)?;
        self.base(ids).map_err(|e| e.to_string())
    }
}
