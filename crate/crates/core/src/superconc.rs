//! Layered DAGs, vertex-disjoint path counting, superconcentrator checks,
//! and the conversion of superconcentrators into random-coefficient
//! circuits over prime fields.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Gate, LinearCircuit, NodeRef, Wire};
use crate::codeprops::{is_sc_induced_code, CodeError, MinorIndex};
use crate::combin::{binomial, Combinations};
use crate::gf::{Field, GfError};
use crate::seed::derive_seed;
use crate::Verdict;

pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("{needed} subset pairs exceed the budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("graph is a superconcentrator; no failing pair to certify")]
    PreconditionUnmet,
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// A vertex is `(layer, index)`. Layer 0 holds the inputs and the last
/// layer the outputs.
pub type Edge = (usize, usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DagRepr", into = "DagRepr")]
pub struct LayeredDag {
    layer_sizes: Vec<usize>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    layers: Vec<usize>,
    edges: Vec<[usize; 4]>,
}

impl TryFrom<DagRepr> for LayeredDag {
    type Error = ScError;

    fn try_from(r: DagRepr) -> Result<Self, ScError> {
        LayeredDag::new(
            r.layers,
            r.edges
                .into_iter()
                .map(|[a, b, c, d]| (a, b, c, d))
                .collect(),
        )
    }
}

impl From<LayeredDag> for DagRepr {
    fn from(g: LayeredDag) -> Self {
        DagRepr {
            layers: g.layer_sizes,
            edges: g
                .edges
                .into_iter()
                .map(|(a, b, c, d)| [a, b, c, d])
                .collect(),
        }
    }
}

impl LayeredDag {
    /// Edges must go from a layer to a strictly later one; duplicates collapse.
    pub fn new(layer_sizes: Vec<usize>, mut edges: Vec<Edge>) -> Result<Self, ScError> {
        if layer_sizes.len() < 2 {
            return Err(ScError::Invalid(
                "need at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(ScError::Invalid("layers must be nonempty".into()));
        }
        for &(fl, fi, tl, ti) in &edges {
            if fl >= tl || tl >= layer_sizes.len() || fi >= layer_sizes[fl] || ti >= layer_sizes[tl]
            {
                return Err(ScError::Invalid(format!(
                    "bad edge ({fl},{fi}) -> ({tl},{ti})"
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = Vec::with_capacity(layer_sizes.len());
        let mut acc = 0;
        for &s in &layer_sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(LayeredDag {
            layer_sizes,
            edges,
            offsets,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_outputs(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn vertex_count(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    pub fn vertex_id(&self, layer: usize, index: usize) -> usize {
        self.offsets[layer] + index
    }

    fn output_id(&self, j: usize) -> usize {
        self.vertex_id(self.layer_sizes.len() - 1, j)
    }

    fn vertex_of(&self, id: usize) -> Result<(usize, usize), ScError> {
        let layer = self
            .offsets
            .iter()
            .rposition(|&o| o <= id)
            .expect("offset 0 exists");
        if id - self.offsets[layer] >= self.layer_sizes[layer] {
            return Err(ScError::Invalid(format!("vertex id {id} out of range")));
        }
        Ok((layer, id - self.offsets[layer]))
    }

    /// Length in edges of the longest path in the graph.
    pub fn longest_path(&self) -> usize {
        let mut dist = vec![0usize; self.vertex_count()];
        // Edges are sorted by source layer, so one pass suffices.
        for &(fl, fi, tl, ti) in &self.edges {
            let u = self.vertex_id(fl, fi);
            let v = self.vertex_id(tl, ti);
            dist[v] = dist[v].max(dist[u] + 1);
        }
        dist.into_iter().max().unwrap_or(0)
    }

    /// Maximum number of fully vertex-disjoint paths from `xs` (inputs) to
    /// `ys` (outputs), endpoints included.
    pub fn max_vertex_disjoint_paths(&self, xs: &[usize], ys: &[usize]) -> usize {
        let nv = self.vertex_count();
        // Vertex v splits into 2v (in) and 2v+1 (out); source and sink follow.
        let (s, t) = (2 * nv, 2 * nv + 1);
        let mut flow = Dinic::new(2 * nv + 2);
        for v in 0..nv {
            flow.add_edge(2 * v, 2 * v + 1, 1);
        }
        for &(fl, fi, tl, ti) in &self.edges {
            flow.add_edge(
                2 * self.vertex_id(fl, fi) + 1,
                2 * self.vertex_id(tl, ti),
                1,
            );
        }
        for &x in xs {
            flow.add_edge(s, 2 * self.vertex_id(0, x), 1);
        }
        for &y in ys {
            flow.add_edge(2 * self.output_id(y) + 1, t, 1);
        }
        flow.max_flow(s, t) as usize
    }

    /// Edge-list text: a `layers s0 s1 ...` header, then one `u v` pair of
    /// global vertex ids per line. Lines starting with `#` are comments.
    pub fn from_edge_list(text: &str) -> Result<Self, ScError> {
        let mut sizes: Option<Vec<usize>> = None;
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| ScError::Invalid(format!("line {}: {msg}", lineno + 1));
            let mut parts = line.split_whitespace();
            if line.starts_with("layers") {
                parts.next();
                let s = parts
                    .map(|p| p.parse::<usize>().map_err(|_| bad("bad layer size")))
                    .collect::<Result<Vec<_>, _>>()?;
                sizes = Some(s);
                continue;
            }
            let u = parts
                .next()
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| bad("bad source"))?;
            let v = parts
                .next()
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| bad("bad target"))?;
            if parts.next().is_some() {
                return Err(bad("trailing tokens"));
            }
            pairs.push((u, v));
        }
        let sizes = sizes.ok_or_else(|| ScError::Invalid("missing layers header".into()))?;
        let shell = LayeredDag::new(sizes.clone(), Vec::new())?;
        let edges = pairs
            .into_iter()
            .map(|(u, v)| {
                let (fl, fi) = shell.vertex_of(u)?;
                let (tl, ti) = shell.vertex_of(v)?;
                Ok((fl, fi, tl, ti))
            })
            .collect::<Result<Vec<_>, ScError>>()?;
        LayeredDag::new(sizes, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::from("layers");
        for l in &self.layer_sizes {
            let _ = write!(s, " {l}");
        }
        s.push('\n');
        for &(fl, fi, tl, ti) in &self.edges {
            let _ = writeln!(s, "{} {}", self.vertex_id(fl, fi), self.vertex_id(tl, ti));
        }
        s
    }
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[e]));
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// An input set `x` and output set `y` of equal size joined by only `flow`
/// vertex-disjoint paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScWitness {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub flow: usize,
}

fn pair_count(n: usize, m: usize) -> u64 {
    (1..=n.min(m)).fold(0u64, |acc, k| {
        acc.saturating_add(
            binomial(n as u64, k as u64).saturating_mul(binomial(m as u64, k as u64)),
        )
    })
}

/// Checks every equal-size pair `(X, Y)` for `|X|` disjoint paths, by size
/// and then lexicographically.
pub fn is_superconcentrator(g: &LayeredDag, budget: u64) -> Result<Verdict<ScWitness>, ScError> {
    let (n, m) = (g.num_inputs(), g.num_outputs());
    let needed = pair_count(n, m);
    if needed > budget {
        return Err(ScError::BudgetExceeded { needed, budget });
    }
    let mut enumerated = 0u64;
    for k in 1..=n.min(m) {
        let ys: Vec<Vec<usize>> = Combinations::new(m, k).collect();
        for xs in Combinations::new(n, k) {
            let flows: Vec<usize> = ys
                .par_iter()
                .map(|y| g.max_vertex_disjoint_paths(&xs, y))
                .collect();
            if let Some(j) = flows.iter().position(|&f| f < k) {
                enumerated += j as u64 + 1;
                let w = ScWitness {
                    x: xs,
                    y: ys[j].clone(),
                    flow: flows[j],
                };
                return Ok(Verdict::refuted(w, enumerated));
            }
            enumerated += ys.len() as u64;
        }
    }
    Ok(Verdict::ok(enumerated))
}

pub fn make_complete_bipartite_sc(n: usize, m: usize) -> LayeredDag {
    let edges = (0..n)
        .flat_map(|i| (0..m).map(move |j| (0, i, 1, j)))
        .collect();
    LayeredDag::new(vec![n, m], edges).expect("complete bipartite graph is well formed")
}

/// Inputs, a middle layer of width `mid`, and outputs, with complete
/// connections between consecutive layers.
pub fn make_sandwich_sc(n: usize, mid: usize, m: usize) -> LayeredDag {
    let mut edges: Vec<Edge> = (0..n)
        .flat_map(|i| (0..mid).map(move |j| (0, i, 1, j)))
        .collect();
    edges.extend((0..mid).flat_map(|i| (0..m).map(move |j| (1, i, 2, j))));
    LayeredDag::new(vec![n, mid, m], edges).expect("sandwich graph is well formed")
}

/// Two inputs and two outputs forced through one middle vertex.
pub fn make_bottleneck() -> LayeredDag {
    make_sandwich_sc(2, 1, 2)
}

/// Vertices become addition gates and edges become wires with i.i.d.
/// uniform coefficients. Zero draws stay as explicit wires, so the wiring
/// matches the graph edge for edge.
pub fn sc_to_circuit(g: &LayeredDag, q: u64, seed: u64) -> Result<LinearCircuit, ScError> {
    let field = Field::from_order(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = g.layer_sizes.len() - 1;
    let mut layers: Vec<Vec<Gate>> = g.layer_sizes[1..]
        .iter()
        .map(|&s| vec![Vec::new(); s])
        .collect();
    for &(fl, fi, tl, ti) in &g.edges {
        let coeff = rng.gen_range(0..q);
        layers[tl - 1][ti].push(Wire {
            src: NodeRef::new(fl, fi),
            coeff,
        });
    }
    let outputs = (0..g.num_outputs())
        .map(|j| NodeRef::new(depth, j))
        .collect();
    LinearCircuit::new_uncanonical(field, g.num_inputs(), layers, outputs)
        .map_err(|e| ScError::Invalid(e.to_string()))
}

/// `1 - Σ_i C(n,i)·C(m,i)·d·i / q`, clamped to `[0, 1]`.
pub fn sc_success_lower_bound(n: usize, m: usize, d: usize, q: u64) -> (BigInt, BigRational) {
    let mut numerator = BigInt::zero();
    for i in 1..=n.min(m) {
        numerator += BigInt::from(binomial(n as u64, i as u64))
            * BigInt::from(binomial(m as u64, i as u64))
            * BigInt::from(d)
            * BigInt::from(i);
    }
    let bound = BigRational::one() - BigRational::new(numerator.clone(), BigInt::from(q));
    let clamped = if bound < BigRational::zero() {
        BigRational::zero()
    } else {
        bound
    };
    (numerator, clamped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScConversionReport {
    pub q: u64,
    pub seed: u64,
    pub success: bool,
    pub failing_minor: Option<MinorIndex>,
    pub depth: usize,
    pub bound_numerator: String,
    /// Exact bound as `p/q` text.
    pub lower_bound_on_success_prob: String,
    pub lower_bound_f64: f64,
    pub minors_checked: u64,
}

pub fn sc_code_attempt(
    g: &LayeredDag,
    q: u64,
    seed: u64,
    budget: u64,
) -> Result<ScConversionReport, ScError> {
    let c = sc_to_circuit(g, q, seed)?;
    let verdict = is_sc_induced_code(&c.generator_matrix(), budget)?;
    let d = g.longest_path();
    let (num, bound) = sc_success_lower_bound(g.num_inputs(), g.num_outputs(), d, q);
    Ok(ScConversionReport {
        q,
        seed,
        success: verdict.is_ok(),
        failing_minor: verdict.counterexample,
        depth: d,
        bound_numerator: num.to_string(),
        lower_bound_on_success_prob: bound.to_string(),
        lower_bound_f64: ratio_to_f64(&bound),
        minors_checked: verdict.enumerated,
    })
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityReport {
    pub witness: ScWitness,
    pub trials: u64,
    pub singular_trials: u64,
    pub max_rank: usize,
    pub confirmed: bool,
}

/// For a graph that fails the superconcentrator property at `(X, Y)`, every
/// coefficient assignment leaves `M_{X,Y}` with rank at most the cut size.
pub fn non_sc_implies_not_code(
    g: &LayeredDag,
    q: u64,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<NecessityReport, ScError> {
    let verdict = is_superconcentrator(g, budget)?;
    let witness = verdict.counterexample.ok_or(ScError::PreconditionUnmet)?;
    let mut singular = 0;
    let mut max_rank = 0;
    for t in 0..trials {
        let c = sc_to_circuit(g, q, derive_seed(seed, "necessity", t))?;
        let rank = c
            .generator_matrix()
            .submatrix(&witness.x, &witness.y)
            .rank();
        max_rank = max_rank.max(rank);
        if rank < witness.x.len() {
            singular += 1;
        }
    }
    Ok(NecessityReport {
        confirmed: singular == trials && max_rank <= witness.flow,
        witness,
        trials,
        singular_trials: singular,
        max_rank,
    })
}
