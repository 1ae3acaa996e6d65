//! Random bipartite graphs, degree trimming, and exhaustive disperser checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::combin::binomial;
use crate::seed::derive_seed;
use crate::Verdict;

pub const DEFAULT_SUBSET_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BipartiteError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{needed} subsets exceed the enumeration budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error(
        "no verified disperser in {trials} trials (smallest neighbourhood seen {worst_gamma:?})"
    )]
    TrialsExhausted {
        trials: u64,
        worst_gamma: Option<usize>,
    },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr")]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    adj: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct GraphRepr {
    n_left: usize,
    n_right: usize,
    adj: Vec<Vec<usize>>,
}

impl TryFrom<GraphRepr> for BipartiteGraph {
    type Error = BipartiteError;

    fn try_from(r: GraphRepr) -> Result<Self, Self::Error> {
        BipartiteGraph::new(r.n_left, r.n_right, r.adj)
    }
}

impl BipartiteGraph {
    /// Neighbour lists are sorted and deduplicated.
    pub fn new(
        n_left: usize,
        n_right: usize,
        mut adj: Vec<Vec<usize>>,
    ) -> Result<Self, BipartiteError> {
        if adj.len() != n_left {
            return Err(BipartiteError::Invalid(format!(
                "{} neighbour lists for {n_left} left vertices",
                adj.len()
            )));
        }
        for list in &mut adj {
            if list.iter().any(|&v| v >= n_right) {
                return Err(BipartiteError::Invalid(
                    "neighbour index out of range".into(),
                ));
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(BipartiteGraph {
            n_left,
            n_right,
            adj,
        })
    }

    pub fn complete(n_left: usize, n_right: usize) -> Self {
        BipartiteGraph {
            n_left,
            n_right,
            adj: vec![(0..n_right).collect(); n_left],
        }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn max_left_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_right];
        for list in &self.adj {
            for &v in list {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Sorted union of the neighbourhoods of `xs`.
    pub fn gamma(&self, xs: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.n_right];
        for &x in xs {
            for &v in &self.adj[x] {
                seen[v] = true;
            }
        }
        (0..self.n_right).filter(|&v| seen[v]).collect()
    }

    /// Right-side adjacency: for each right vertex its sorted left neighbours.
    pub fn transpose_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_right];
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                out[v].push(u);
            }
        }
        out
    }

    fn packed_neighborhoods(&self) -> Vec<Vec<u64>> {
        let words = self.n_right.div_ceil(64);
        self.adj
            .iter()
            .map(|list| {
                let mut w = vec![0u64; words];
                for &v in list {
                    w[v / 64] |= 1 << (v % 64);
                }
                w
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisperserParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub eps: f64,
}

impl DisperserParams {
    pub fn new(n: usize, m: usize, k: usize, eps: f64) -> Result<Self, BipartiteError> {
        let p = DisperserParams { n, m, k, eps };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), BipartiteError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(BipartiteError::Domain(format!(
                "eps = {} not in (0, 1)",
                self.eps
            )));
        }
        if self.k == 0 || self.k > self.n || self.m == 0 {
            return Err(BipartiteError::Domain(format!(
                "need n >= k >= 1 and m >= 1, got n={} m={} k={}",
                self.n, self.m, self.k
            )));
        }
        Ok(())
    }
}

/// `⌈(1/ε)(ln(n/k)+1) + (m/k)(ln(1/ε)+1)⌉`.
pub fn rt00_degree(p: &DisperserParams) -> Result<usize, BipartiteError> {
    p.validate()?;
    let (n, m, k) = (p.n as f64, p.m as f64, p.k as f64);
    let d = (1.0 / p.eps) * ((n / k).ln() + 1.0) + (m / k) * ((1.0 / p.eps).ln() + 1.0);
    Ok(d.ceil() as usize)
}

/// Each left vertex draws `d` neighbours uniformly with replacement.
///
/// Drawing stops once every right vertex has been hit, since further draws
/// cannot change the collapsed neighbour set.
pub fn sample_left_regular_with<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    d: usize,
    rng: &mut R,
) -> BipartiteGraph {
    let adj = (0..n)
        .map(|_| {
            let mut hit = vec![false; m];
            let mut distinct = 0;
            for _ in 0..d {
                if distinct == m {
                    break;
                }
                let v = rng.gen_range(0..m);
                if !hit[v] {
                    hit[v] = true;
                    distinct += 1;
                }
            }
            (0..m).filter(|&v| hit[v]).collect()
        })
        .collect();
    BipartiteGraph {
        n_left: n,
        n_right: m,
        adj,
    }
}

pub fn sample_left_regular(n: usize, m: usize, d: usize, seed: u64) -> BipartiteGraph {
    sample_left_regular_with(n, m, d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Removes the `t` right vertices of largest degree, lowest index first on
/// ties, and renumbers the survivors in order.
pub fn trim_top_degrees(g: &BipartiteGraph, t: usize) -> Result<BipartiteGraph, BipartiteError> {
    if t >= g.n_right && t > 0 {
        return Err(BipartiteError::Domain(format!(
            "cannot remove {t} of {} right vertices",
            g.n_right
        )));
    }
    let deg = g.right_degrees();
    let mut order: Vec<usize> = (0..g.n_right).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let mut removed = vec![false; g.n_right];
    for &v in &order[..t] {
        removed[v] = true;
    }
    let mut new_index = vec![usize::MAX; g.n_right];
    let mut next = 0;
    for v in 0..g.n_right {
        if !removed[v] {
            new_index[v] = next;
            next += 1;
        }
    }
    let adj = g
        .adj
        .iter()
        .map(|list| {
            list.iter()
                .filter(|&&v| !removed[v])
                .map(|&v| new_index[v])
                .collect()
        })
        .collect();
    Ok(BipartiteGraph {
        n_left: g.n_left,
        n_right: next,
        adj,
    })
}

/// Smallest integer neighbourhood size meeting `(1-ε)m`.
pub fn disperser_threshold(m: usize, eps: f64) -> usize {
    ((1.0 - eps) * m as f64 - 1e-9).ceil().max(0.0) as usize
}

struct SubsetSearch<'a> {
    nbrs: &'a [Vec<u64>],
    n: usize,
    k: usize,
    need: usize,
}

impl SubsetSearch<'_> {
    /// Lexicographic DFS below a fixed prefix. Returns the first subset whose
    /// union stays under `need`, and the number of subsets accounted for.
    fn run(
        &self,
        chosen: &mut Vec<usize>,
        union: &[u64],
        next: usize,
    ) -> (Option<Vec<usize>>, u64) {
        let weight: usize = union.iter().map(|w| w.count_ones() as usize).sum();
        let remaining = self.k - chosen.len();
        if weight >= self.need {
            // Every completion only grows the union.
            return (None, binomial((self.n - next) as u64, remaining as u64));
        }
        if remaining == 0 {
            return (Some(chosen.clone()), 1);
        }
        let mut count = 0u64;
        let mut buf = vec![0u64; union.len()];
        for v in next..=self.n - remaining {
            for ((b, u), x) in buf.iter_mut().zip(union).zip(&self.nbrs[v]) {
                *b = u | x;
            }
            chosen.push(v);
            let (found, c) = self.run(chosen, &buf, v + 1);
            chosen.pop();
            count = count.saturating_add(c);
            if found.is_some() {
                return (found, count);
            }
        }
        (None, count)
    }
}

/// Checks `|Γ(X)| ≥ (1-ε)m` for every `X` of size exactly `k`, which covers
/// all larger sets as well. The counterexample is the lexicographically
/// first failing subset.
pub fn is_disperser(
    g: &BipartiteGraph,
    k: usize,
    eps: f64,
    budget: u64,
) -> Result<Verdict<Vec<usize>>, BipartiteError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(BipartiteError::Domain(format!("eps = {eps} not in [0, 1)")));
    }
    let n = g.n_left;
    if k == 0 {
        return Err(BipartiteError::Domain("k must be at least 1".into()));
    }
    if k > n {
        return Ok(Verdict::ok(0));
    }
    let needed = binomial(n as u64, k as u64);
    if needed > budget {
        return Err(BipartiteError::BudgetExceeded { needed, budget });
    }
    let need = disperser_threshold(g.n_right, eps);
    let nbrs = g.packed_neighborhoods();
    let search = SubsetSearch {
        nbrs: &nbrs,
        n,
        k,
        need,
    };
    let results: Vec<(Option<Vec<usize>>, u64)> = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut chosen = vec![first];
            search.run(&mut chosen, &nbrs[first], first + 1)
        })
        .collect();
    let mut enumerated = 0u64;
    for (found, c) in results {
        enumerated = enumerated.saturating_add(c);
        if let Some(x) = found {
            return Ok(Verdict::refuted(x, enumerated));
        }
    }
    Ok(Verdict::ok(enumerated))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisperserSample {
    pub graph: BipartiteGraph,
    pub degree: usize,
    pub trials: u64,
    pub enumerated: u64,
    pub seed: u64,
}

/// Samples with the degree from [`rt00_degree`] until a graph passes
/// [`is_disperser`].
pub fn sample_verified_disperser(
    p: &DisperserParams,
    seed: u64,
    max_trials: u64,
    budget: u64,
) -> Result<DisperserSample, BipartiteError> {
    let degree = rt00_degree(p)?;
    let mut worst_gamma: Option<usize> = None;
    let mut enumerated = 0u64;
    for trial in 0..max_trials {
        let trial_seed = derive_seed(seed, "disperser", trial);
        let g = sample_left_regular(p.n, p.m, degree, trial_seed);
        let v = is_disperser(&g, p.k, p.eps, budget)?;
        enumerated += v.enumerated;
        match v.counterexample {
            None => {
                return Ok(DisperserSample {
                    graph: g,
                    degree,
                    trials: trial + 1,
                    enumerated,
                    seed: trial_seed,
                });
            }
            Some(x) => {
                let size = g.gamma(&x).len();
                worst_gamma = Some(worst_gamma.map_or(size, |w| w.min(size)));
            }
        }
    }
    Err(BipartiteError::TrialsExhausted {
        trials: max_trials,
        worst_gamma,
    })
}
