//! Sample-and-verify construction of partial good codes over GF(2): rate
//! boosters, amplifiers, condensers, depth-2 base circuits, composition,
//! reduction, and the end-to-end encoder pipeline.
//!
//! Every sampler draws trial `i` from `derive_seed(seed, tag, i)` and keeps
//! the lowest-indexed trial that passes its exhaustive checker, so results
//! do not depend on thread scheduling.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::{
    rt00_degree, sample_left_regular_with, trim_top_degrees, BipartiteError, DisperserParams,
};
use crate::circuit::{CircuitError, LinearCircuit};
use crate::codeprops::{
    binary_entropy, check_band, check_pgc, check_range_detector, gv_admissible, min_distance,
    CodeError, PgcParams, RangeDetectorParams, DEFAULT_BAND_BUDGET,
};
use crate::combin::{binomial, Combinations};
use crate::gf::{BitVector, Field};
use crate::seed::derive_seed;

pub const DEFAULT_MAX_TRIALS: u64 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{component}: no verified instance in {trials} trials")]
    TrialsExhausted { component: String, trials: u64 },
    #[error("{needed} candidates exceed the enumeration budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("collapsing needs bounded output fan-in on every piece")]
    FaninUnbounded,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("rate {rate} with relative distance {delta} is outside the Gilbert-Varshamov region")]
    GvViolation { rate: f64, delta: f64 },
    #[error("assembled circuit failed its check: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Code(CodeError),
    #[error(transparent)]
    Bipartite(BipartiteError),
}

impl From<CodeError> for BuildError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::BudgetExceeded { needed, budget } => {
                BuildError::BudgetExceeded { needed, budget }
            }
            CodeError::Circuit(c) => BuildError::Circuit(c),
            other => BuildError::Code(other),
        }
    }
}

impl From<BipartiteError> for BuildError {
    fn from(e: BipartiteError) -> Self {
        match e {
            BipartiteError::BudgetExceeded { needed, budget } => {
                BuildError::BudgetExceeded { needed, budget }
            }
            other => BuildError::Bipartite(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `32n` outputs, weight floor `4n`, condenser ratio 6.
    Literal,
    /// `4n` outputs, weight floor `n/2`, condenser ratio 3.
    Scaled,
}

/// Output width, weight floor and condenser ratio of a PGC family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub mode: Mode,
    /// Outputs per input.
    pub out_factor: usize,
    /// Required output weight per input.
    pub weight_factor: f64,
    /// Smallest condenser ratio `c0`.
    pub c0: f64,
    /// Depth-2 circuits on `n` inputs covering a band of ratio `ρ` may use
    /// `factor·n·max(1, log₂ ρ)²` wires.
    pub depth_two_wire_factor: f64,
}

impl Regime {
    pub fn literal() -> Self {
        Regime {
            mode: Mode::Literal,
            out_factor: 32,
            weight_factor: 4.0,
            c0: 6.0,
            depth_two_wire_factor: 16.0,
        }
    }

    pub fn scaled() -> Self {
        Regime {
            mode: Mode::Scaled,
            out_factor: 4,
            weight_factor: 0.5,
            c0: 3.0,
            depth_two_wire_factor: 16.0,
        }
    }

    pub fn outputs(&self, n: usize) -> usize {
        self.out_factor * n
    }

    pub fn weight_floor(&self, n: usize) -> f64 {
        self.weight_factor * n as f64
    }

    /// PGC parameters on `n` inputs for the band `[r, s]`.
    pub fn pgc(&self, n: usize, r: f64, s: f64) -> Result<PgcParams, BuildError> {
        Ok(PgcParams::new(
            n,
            self.outputs(n),
            r,
            s,
            self.weight_floor(n),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub regime: Regime,
    pub max_trials: u64,
    /// Enumeration budget for each exhaustive check.
    pub budget: u64,
}

impl BuildOptions {
    pub fn scaled() -> Self {
        BuildOptions {
            regime: Regime::scaled(),
            max_trials: DEFAULT_MAX_TRIALS,
            budget: DEFAULT_BAND_BUDGET,
        }
    }

    pub fn literal() -> Self {
        BuildOptions {
            regime: Regime::literal(),
            ..Self::scaled()
        }
    }
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self::scaled()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildReport {
    pub component: String,
    pub mode: Mode,
    pub seed: u64,
    /// Seed of the accepted trial.
    pub trial_seed: u64,
    pub trials: u64,
    pub failures: u64,
    pub depth: usize,
    pub size: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub output_fanin: usize,
    /// Fan-in bound guaranteed by the construction, when it has one.
    pub fanin_bound: Option<usize>,
    /// Inputs examined by the acceptance check.
    pub enumerated: u64,
    pub min_distance: Option<usize>,
    pub children: Vec<BuildReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Built {
    pub circuit: LinearCircuit,
    pub report: BuildReport,
}

struct Accepted<T> {
    value: T,
    trials: u64,
    trial_seed: u64,
}

/// Runs trials in parallel batches and keeps the lowest-indexed success.
fn first_success<T, F>(
    component: &str,
    seed: u64,
    max_trials: u64,
    trial: F,
) -> Result<Accepted<T>, BuildError>
where
    T: Send,
    F: Fn(u64) -> Result<Option<T>, BuildError> + Sync,
{
    let batch = rayon::current_num_threads().max(1) as u64;
    let mut start = 0;
    while start < max_trials {
        let end = (start + batch).min(max_trials);
        let results: Vec<(u64, u64, Result<Option<T>, BuildError>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let s = derive_seed(seed, component, i);
                (i, s, trial(s))
            })
            .collect();
        for (i, s, r) in results {
            if let Some(value) = r? {
                return Ok(Accepted {
                    value,
                    trials: i + 1,
                    trial_seed: s,
                });
            }
        }
        start = end;
    }
    Err(BuildError::TrialsExhausted {
        component: component.to_string(),
        trials: max_trials,
    })
}

fn report(component: &str, opts: &BuildOptions, seed: u64, c: &LinearCircuit) -> BuildReport {
    BuildReport {
        component: component.to_string(),
        mode: opts.regime.mode,
        seed,
        trial_seed: seed,
        trials: 0,
        failures: 0,
        depth: c.depth(),
        size: c.size(),
        num_inputs: c.num_inputs(),
        num_outputs: c.num_outputs(),
        output_fanin: c.output_fanin(),
        fanin_bound: None,
        enumerated: 0,
        min_distance: None,
        children: Vec::new(),
    }
}

fn accepted_report(
    component: &str,
    opts: &BuildOptions,
    seed: u64,
    c: &LinearCircuit,
    a: (u64, u64, u64),
) -> BuildReport {
    let (trials, trial_seed, enumerated) = a;
    BuildReport {
        trials,
        failures: trials - 1,
        trial_seed,
        enumerated,
        ..report(component, opts, seed, c)
    }
}

/// Depth-1 GF(2) circuit from a bipartite graph, keeping each edge with
/// probability 1/2.
fn random_xor_layer<R: Rng>(
    n_in: usize,
    right_lists: &[Vec<usize>],
    rng: &mut R,
) -> Result<LinearCircuit, BuildError> {
    let gates = right_lists
        .iter()
        .map(|srcs| {
            srcs.iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|&i| (i, 1))
                .collect()
        })
        .collect();
    Ok(LinearCircuit::depth1(Field::Gf2, n_in, gates)?)
}

fn generator_rows(c: &LinearCircuit) -> Result<Vec<BitVector>, BuildError> {
    Ok(c.binary_generator_rows()?)
}

/// First vector whose image has weight below `target`, and the number of
/// vectors examined.
fn check_vectors(
    rows: &[BitVector],
    n_out: usize,
    vectors: &[BitVector],
    target: usize,
) -> (Option<usize>, u64) {
    for (idx, v) in vectors.iter().enumerate() {
        let mut acc = BitVector::zeros(n_out);
        for i in v.support() {
            acc.xor_assign(&rows[i]).expect("equal lengths");
        }
        if acc.weight() < target {
            return (Some(idx), idx as u64 + 1);
        }
    }
    (None, vectors.len() as u64)
}

/// Images of every input whose weight lies in `[lo, hi]`.
fn band_images(
    c: &LinearCircuit,
    lo: usize,
    hi: usize,
    budget: u64,
) -> Result<Vec<BitVector>, BuildError> {
    let n = c.num_inputs();
    let needed = (lo..=hi.min(n)).fold(0u64, |a, w| a.saturating_add(binomial(n as u64, w as u64)));
    if needed > budget {
        return Err(BuildError::BudgetExceeded { needed, budget });
    }
    let rows = generator_rows(c)?;
    let mut out = Vec::with_capacity(needed as usize);
    for w in lo.max(1)..=hi.min(n) {
        for support in Combinations::new(n, w) {
            let mut acc = BitVector::zeros(c.num_outputs());
            for i in support {
                acc.xor_assign(&rows[i]).expect("equal lengths");
            }
            out.push(acc);
        }
    }
    Ok(out)
}

/// Rate booster parameters: inputs of weight at least `δn` (out of
/// `out_factor·n`) must map to weight at least `γ⌊cn⌋` out of `⌊cn⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoosterParams {
    pub delta: f64,
    pub c: f64,
    pub gamma: f64,
}

impl BoosterParams {
    pub fn new(delta: f64, c: f64, gamma: f64) -> Result<Self, BuildError> {
        if !(delta > 0.0 && delta < 32.0) || !(c > 1.0) || !(gamma > 0.0 && gamma < 0.5) {
            return Err(BuildError::Domain(
                "need delta in (0, 32), c > 1, gamma in (0, 1/2)".into(),
            ));
        }
        if binary_entropy(gamma)? >= 1.0 - 1.0 / c {
            return Err(BuildError::Domain(format!(
                "h({gamma}) must be below 1 - 1/{c}"
            )));
        }
        Ok(BoosterParams { delta, c, gamma })
    }
}

/// Largest `ε = 2^{-j}` with `c'(1-ε')(1-h(γ/(1-ε'))) > 1`, where
/// `ε' = (1 + 1/c')ε`.
pub fn booster_eps(c_prime: f64, gamma: f64) -> Option<f64> {
    let mut eps = 0.5;
    for _ in 0..40 {
        let e = (1.0 + 1.0 / c_prime) * eps;
        if e < 1.0 {
            let g = gamma / (1.0 - e);
            if let Ok(h) = binary_entropy(g.min(1.0)) {
                if g <= 0.5 && c_prime * (1.0 - e) * (1.0 - h) > 1.0 {
                    return Some(eps);
                }
            }
        }
        eps /= 2.0;
    }
    None
}

/// Concrete booster instance: a disperser from `m_in` to `n_out + trim`
/// vertices for sets of size `k`, with the `trim` busiest outputs removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoosterSpec {
    pub m_in: usize,
    pub n_out: usize,
    pub k: usize,
    pub eps: f64,
    pub trim: usize,
    /// Required output weight.
    pub target: usize,
}

impl BoosterSpec {
    /// The instance for `n`-bit messages under `regime`.
    pub fn from_params(p: &BoosterParams, n: usize, regime: &Regime) -> Result<Self, BuildError> {
        if n == 0 {
            return Err(BuildError::Domain("n must be positive".into()));
        }
        let m_in = regime.outputs(n);
        let n_out = (p.c * n as f64).floor() as usize;
        let c_prime = n_out as f64 / n as f64;
        let eps = booster_eps(c_prime, p.gamma).ok_or_else(|| {
            BuildError::Domain(format!(
                "no usable eps for c' = {c_prime}, gamma = {}",
                p.gamma
            ))
        })?;
        let k = ((p.delta * n as f64).ceil() as usize).clamp(1, m_in);
        let target = (p.gamma * n_out as f64).ceil() as usize;
        Ok(BoosterSpec {
            m_in,
            n_out,
            k,
            eps,
            trim: n,
            target,
        })
    }

    fn validate(&self) -> Result<(), BuildError> {
        if self.m_in == 0
            || self.n_out == 0
            || self.k == 0
            || self.k > self.m_in
            || self.target > self.n_out
        {
            return Err(BuildError::Domain(format!("inconsistent booster {self:?}")));
        }
        Ok(())
    }

    /// `rt00` degree of the underlying disperser.
    pub fn degree(&self) -> Result<usize, BuildError> {
        Ok(rt00_degree(&DisperserParams::new(
            self.m_in,
            self.n_out + self.trim,
            self.k,
            self.eps,
        )?)?)
    }

    /// After removing the `trim` busiest of `n_out + trim` outputs, every
    /// survivor has at most `m_in·D/(trim+1)` neighbours.
    pub fn fanin_bound(&self) -> Result<usize, BuildError> {
        let d = self.degree()?.min(self.n_out + self.trim);
        Ok((self.m_in * d / (self.trim + 1)).min(self.m_in))
    }
}

/// Inputs a booster must handle.
#[derive(Debug, Clone, PartialEq)]
pub enum BoosterDomain {
    /// Every input with weight in `[lo, hi]`.
    Band { lo: usize, hi: usize },
    /// An explicit list, typically the images of an upstream encoder.
    Vectors(Vec<BitVector>),
}

pub fn build_booster(
    spec: &BoosterSpec,
    domain: &BoosterDomain,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    spec.validate()?;
    let degree = spec.degree()?;
    let bound = spec.fanin_bound()?;
    if let BoosterDomain::Vectors(vs) = domain {
        if vs.iter().any(|v| v.len() != spec.m_in) {
            return Err(BuildError::ShapeMismatch(format!(
                "domain vectors must have length {}",
                spec.m_in
            )));
        }
    }
    let acc = first_success("booster", seed, opts.max_trials, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = sample_left_regular_with(spec.m_in, spec.n_out + spec.trim, degree, &mut rng);
        let g = trim_top_degrees(&g, spec.trim)?;
        let c = random_xor_layer(spec.m_in, &g.transpose_lists(), &mut rng)?;
        let (bad, enumerated) = match domain {
            BoosterDomain::Band { lo, hi } => {
                let v = check_band(&c, *lo, *hi, opts.budget, |y| {
                    y.iter().map(|w| w.count_ones() as usize).sum::<usize>() >= spec.target
                })?;
                (!v.is_ok(), v.enumerated)
            }
            BoosterDomain::Vectors(vs) => {
                let (bad, n) = check_vectors(&generator_rows(&c)?, spec.n_out, vs, spec.target);
                (bad.is_some(), n)
            }
        };
        Ok((!bad).then_some((c, enumerated)))
    })?;
    let (c, enumerated) = acc.value;
    let mut r = accepted_report(
        "booster",
        opts,
        seed,
        &c,
        (acc.trials, acc.trial_seed, enumerated),
    );
    r.fanin_bound = Some(bound);
    Ok(Built {
        circuit: c,
        report: r,
    })
}

/// Booster for every input of weight at least `δn`.
pub fn build_rate_booster(
    p: &BoosterParams,
    n: usize,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    let spec = BoosterSpec::from_params(p, n, &opts.regime)?;
    build_booster(
        &spec,
        &BoosterDomain::Band {
            lo: spec.k,
            hi: spec.m_in,
        },
        seed,
        opts,
    )
}

/// Depth-1 `(n, m, n/8, n, m/8)`-range detector with `m ≥ 3n`.
pub fn build_amplifier(
    n: usize,
    m: usize,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    if n == 0 || m < 3 * n {
        return Err(BuildError::Domain(format!(
            "need n >= 1 and m >= 3n, got n={n} m={m}"
        )));
    }
    let dp = DisperserParams::new(n, 2 * m, n.div_ceil(8), 0.05)?;
    let degree = rt00_degree(&dp)?;
    let rd = RangeDetectorParams::new(n, m, n as f64 / 8.0, n as f64, m as f64 / 8.0, None)?;
    let acc = first_success("amplifier", seed, opts.max_trials, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = sample_left_regular_with(n, 2 * m, degree, &mut rng);
        let g = trim_top_degrees(&g, m)?;
        let c = random_xor_layer(n, &g.transpose_lists(), &mut rng)?;
        let v = check_range_detector(&c, &rd, opts.budget)?;
        Ok(v.is_ok().then_some((c, v.enumerated)))
    })?;
    let (c, enumerated) = acc.value;
    let mut r = accepted_report(
        "amplifier",
        opts,
        seed,
        &c,
        (acc.trials, acc.trial_seed, enumerated),
    );
    r.fanin_bound = Some((n * degree.min(2 * m) / (m + 1)).min(n));
    Ok(Built {
        circuit: c,
        report: r,
    })
}

fn condenser_over(
    n: usize,
    r: f64,
    s: f64,
    t: f64,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    if !(r >= opts.regime.c0 && r <= n as f64) {
        return Err(BuildError::Domain(format!(
            "need {} <= r <= n, got r={r}",
            opts.regime.c0
        )));
    }
    let limit = n as f64 / r.powf(1.5);
    if !(s >= 1.0 && s <= t && t <= limit + 1e-12) {
        return Err(BuildError::Domain(format!(
            "need 1 <= s <= t <= n/r^1.5 = {limit}, got s={s} t={t}"
        )));
    }
    let m = (n as f64 / r).floor() as usize;
    let rd = RangeDetectorParams::new(n, m, s, t, s, None)?;
    let acc = first_success("condenser", seed, opts.max_trials, |sd| {
        let mut rng = ChaCha8Rng::seed_from_u64(sd);
        let mut lists = vec![Vec::new(); m];
        for i in 0..n {
            let deg = rng.gen_range(1..=6usize.min(m));
            for j in sample(&mut rng, m, deg) {
                lists[j].push((i, 1));
            }
        }
        let c = LinearCircuit::depth1(Field::Gf2, n, lists)?;
        let v = check_range_detector(&c, &rd, opts.budget)?;
        Ok(v.is_ok().then_some((c, v.enumerated)))
    })?;
    let (c, enumerated) = acc.value;
    let mut rep = accepted_report(
        "condenser",
        opts,
        seed,
        &c,
        (acc.trials, acc.trial_seed, enumerated),
    );
    rep.fanin_bound = Some(n);
    Ok(Built {
        circuit: c,
        report: rep,
    })
}

/// Depth-1 `(n, ⌊n/r⌋, s, n/r^{1.5}, s)`-range detector with at most `6n`
/// wires.
pub fn search_condenser(
    n: usize,
    r: f64,
    s: f64,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    condenser_over(n, r, s, n as f64 / r.powf(1.5), seed, opts)
}

/// Wire budget for a depth-2 circuit on `n` inputs over a band of ratio `ρ`.
pub fn depth_two_budget(n: usize, ratio: f64, regime: &Regime) -> usize {
    let l = ratio.max(1.0).log2().max(1.0);
    (regime.depth_two_wire_factor * n as f64 * l * l).ceil() as usize
}

/// Random depth-2 PGC under the [`depth_two_budget`] wire budget.
///
/// Middle gate `j` reads input `j` plus a random subset of the others; each
/// output reads each middle gate independently, with the densities chosen
/// to fit the budget.
pub fn sample_depth2_pgc(
    p: &PgcParams,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    let n = p.n_in;
    if n == 0 || p.n_out == 0 {
        return Err(BuildError::Domain("PGC needs inputs and outputs".into()));
    }
    let budget = depth_two_budget(n, p.s / p.r, &opts.regime);
    let spare = (budget / 4).saturating_sub(n) as f64;
    let pairs = (n * (n - 1)).max(1) as f64;
    let mid_prob = (spare / pairs).min(0.5);
    let acc = first_success("depth2", seed, opts.max_trials, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mid: Vec<Vec<(usize, u64)>> = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| i == j || rng.gen_bool(mid_prob))
                    .map(|i| (i, 1))
                    .collect()
            })
            .collect();
        let mid_wires: usize = mid.iter().map(Vec::len).sum();
        let out_prob = (budget.saturating_sub(mid_wires) as f64 / (p.n_out * n) as f64).min(0.5);
        let out: Vec<Vec<(usize, u64)>> = (0..p.n_out)
            .map(|_| {
                (0..n)
                    .filter(|_| rng.gen_bool(out_prob))
                    .map(|j| (j, 1))
                    .collect()
            })
            .collect();
        let top = LinearCircuit::depth1(Field::Gf2, n, mid)?;
        let bottom = LinearCircuit::depth1(Field::Gf2, n, out)?;
        let c = LinearCircuit::stack(&top, &bottom)?;
        if c.size() > budget {
            return Ok(None);
        }
        let v = check_pgc(&c, p, opts.budget)?;
        Ok(v.is_ok().then_some((c, v.enumerated)))
    })?;
    let (c, enumerated) = acc.value;
    let mut r = accepted_report(
        "depth2",
        opts,
        seed,
        &c,
        (acc.trials, acc.trial_seed, enumerated),
    );
    r.fanin_bound = Some(c.output_fanin());
    Ok(Built {
        circuit: c,
        report: r,
    })
}

/// A verified PGC together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PgcPiece {
    pub built: Built,
    pub params: PgcParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComposeMode {
    /// The booster becomes an extra layer.
    NewLayer,
    /// The booster is folded into the last layer.
    MergeAndCollapse,
}

/// Combines PGCs over adjacent bands into one PGC over their union.
///
/// Outputs are merged with random 0/1 coefficients until the merged code
/// has weight at least `w/8` on the whole band; a booster then restores
/// the weight floor `w` of the regime.
pub fn compose_pgcs(
    pieces: &[PgcPiece],
    mode: ComposeMode,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    let first = pieces
        .first()
        .ok_or_else(|| BuildError::ShapeMismatch("no pieces".into()))?;
    let (n, m) = (first.params.n_in, first.params.n_out);
    for (i, p) in pieces.iter().enumerate() {
        let c = &p.built.circuit;
        if p.params.n_in != n || p.params.n_out != m || c.num_inputs() != n || c.num_outputs() != m
        {
            return Err(BuildError::ShapeMismatch(format!(
                "piece {i} is not {n}→{m}"
            )));
        }
        if !c.field().is_gf2() {
            return Err(BuildError::ShapeMismatch(
                "pieces must be GF(2) circuits".into(),
            ));
        }
        if i > 0 {
            let (_, prev_hi) = pieces[i - 1].params.band();
            let (lo, _) = p.params.band();
            if lo > prev_hi + 1 {
                return Err(BuildError::ShapeMismatch(format!(
                    "bands of pieces {} and {i} leave a gap",
                    i - 1
                )));
            }
        }
    }
    if mode == ComposeMode::MergeAndCollapse
        && pieces.iter().any(|p| p.built.report.fanin_bound.is_none())
    {
        return Err(BuildError::FaninUnbounded);
    }
    let (r1, s_last) = (first.params.r, pieces.last().expect("nonempty").params.s);
    let w = opts.regime.weight_floor(n);
    let target = PgcParams::new(n, m, r1, s_last, w)?;
    let mid = PgcParams::new(n, m, r1, s_last, w / 8.0)?;
    let (lo, hi) = target.band();
    for p in pieces {
        if p.params.w_min < w {
            return Err(BuildError::ShapeMismatch(format!(
                "piece weight floor {} below {w}",
                p.params.w_min
            )));
        }
    }

    let mut children: Vec<BuildReport> = pieces.iter().map(|p| p.built.report.clone()).collect();
    let merged = if pieces.len() == 1 {
        let c = first.built.circuit.clone();
        let v = check_pgc(&c, &mid, opts.budget)?;
        if !v.is_ok() {
            return Err(BuildError::VerificationFailed(
                "single piece misses its weight floor".into(),
            ));
        }
        c
    } else {
        let circuits: Vec<LinearCircuit> = pieces.iter().map(|p| p.built.circuit.clone()).collect();
        let acc = first_success("merge", seed, opts.max_trials, |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let coeffs: Vec<Vec<u64>> = (0..pieces.len())
                .map(|_| (0..m).map(|_| u64::from(rng.gen_bool(0.5))).collect())
                .collect();
            let c = LinearCircuit::merge_outputs(&circuits, &coeffs)?;
            let v = check_pgc(&c, &mid, opts.budget)?;
            Ok(v.is_ok().then_some((c, v.enumerated)))
        })?;
        let (c, enumerated) = acc.value;
        children.push(accepted_report(
            "merge",
            opts,
            seed,
            &c,
            (acc.trials, acc.trial_seed, enumerated),
        ));
        c
    };

    let k = (w / 8.0).ceil().max(1.0) as usize;
    let goal = w.ceil() as usize;
    let spec = BoosterSpec {
        m_in: m,
        n_out: m,
        k: k.min(m),
        eps: booster_eps(m as f64 / n as f64, goal as f64 / m as f64).unwrap_or(0.25),
        trim: n,
        target: goal,
    };
    let images = band_images(&merged, lo, hi, opts.budget)?;
    let booster = build_booster(
        &spec,
        &BoosterDomain::Vectors(images),
        derive_seed(seed, "compose-booster", 0),
        opts,
    )?;
    let stacked = LinearCircuit::stack(&merged, &booster.circuit)?;
    let (c, fanin_bound) = match mode {
        ComposeMode::NewLayer => (stacked, booster.report.fanin_bound),
        ComposeMode::MergeAndCollapse => {
            let bound = booster
                .report
                .fanin_bound
                .map(|b| b * merged.output_fanin().max(1));
            (stacked.collapse_last_layer()?, bound)
        }
    };
    children.push(booster.report);
    let v = check_pgc(&c, &target, opts.budget)?;
    if !v.is_ok() {
        return Err(BuildError::VerificationFailed(format!(
            "composed circuit fails on {:?}",
            v.counterexample
        )));
    }
    let mut r = report("compose", opts, seed, &c);
    r.enumerated = v.enumerated;
    r.fanin_bound = fanin_bound;
    r.children = children;
    Ok(Built {
        circuit: c,
        report: r,
    })
}

/// Condenser, then `inner`, then amplifier: an `(n, s, t)`-PGC two layers
/// deeper than `inner`.
pub fn reduce_pgc(
    n: usize,
    r: f64,
    s: f64,
    t: f64,
    inner: &Built,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    let regime = &opts.regime;
    let n_inner = (n as f64 / r).floor() as usize;
    let inner_params = regime.pgc(n_inner, s, n as f64 / r)?;
    let ic = &inner.circuit;
    if ic.num_inputs() != n_inner || ic.num_outputs() != inner_params.n_out {
        return Err(BuildError::ShapeMismatch(format!(
            "inner circuit is {}→{}, expected {n_inner}→{}",
            ic.num_inputs(),
            ic.num_outputs(),
            inner_params.n_out
        )));
    }
    if !check_pgc(ic, &inner_params, opts.budget)?.is_ok() {
        return Err(BuildError::VerificationFailed(
            "inner circuit is not a PGC on its band".into(),
        ));
    }
    let condenser = condenser_over(n, r, s, t, derive_seed(seed, "reduce-condenser", 0), opts)?;
    let amplifier = build_amplifier(
        ic.num_outputs(),
        regime.outputs(n),
        derive_seed(seed, "reduce-amplifier", 0),
        opts,
    )?;
    let c = LinearCircuit::stack(
        &LinearCircuit::stack(&condenser.circuit, ic)?,
        &amplifier.circuit,
    )?;
    let target = regime.pgc(n, s, t)?;
    let v = check_pgc(&c, &target, opts.budget)?;
    if !v.is_ok() {
        return Err(BuildError::VerificationFailed(format!(
            "reduced circuit fails on {:?}",
            v.counterexample
        )));
    }
    let mut rep = report("reduce", opts, seed, &c);
    rep.enumerated = v.enumerated;
    rep.fanin_bound = amplifier.report.fanin_bound;
    rep.children = vec![condenser.report, inner.report.clone(), amplifier.report];
    Ok(Built {
        circuit: c,
        report: rep,
    })
}

/// Depth-2 PGC on `⌊n/r⌋` inputs for the band `[s, n/r]`, wrapped by a
/// reduction with ratio `r` onto the band `[s, t]`.
pub fn build_reduced(
    n: usize,
    r: f64,
    s: f64,
    t: f64,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    let n_inner = (n as f64 / r).floor() as usize;
    if n_inner == 0 {
        return Err(BuildError::Domain(format!(
            "n/r = {} leaves no inner inputs",
            n as f64 / r
        )));
    }
    let inner_params = opts.regime.pgc(n_inner, s, n as f64 / r)?;
    let inner = sample_depth2_pgc(&inner_params, derive_seed(seed, "reduce-inner", 0), opts)?;
    reduce_pgc(n, r, s, t, &inner, seed, opts)
}

/// Depth-4 PGC for the band `[n/4r², n/r]` via a reduction with ratio
/// `⌊√r⌋`. A lower band end below 1 is raised to 1, which covers the same
/// nonzero weights.
pub fn build_handy(n: usize, r: u64, seed: u64, opts: &BuildOptions) -> Result<Built, BuildError> {
    if r == 0 || r > n as u64 {
        return Err(BuildError::Domain(format!("need 1 <= r <= n, got r={r}")));
    }
    let root = r.isqrt() as f64;
    let rf = r as f64;
    let s = (n as f64 / (4.0 * rf * rf)).max(1.0);
    let t = n as f64 / rf;
    if t < s {
        return Err(BuildError::Domain(format!("band [{s}, {t}] is empty")));
    }
    let mut b = build_reduced(n, root, s, t, seed, opts)?;
    b.report.component = "handy".into();
    Ok(b)
}

/// Encoder from `n` bits to `⌊n/rate⌋` bits with minimum distance at least
/// `⌈δ·⌊n/rate⌋⌉` and depth at most `depth_budget`.
///
/// The band `[1, n]` is split at `n/c0^{1.5}` and `n/c0`. The lowest piece
/// is a reduction (depth 4) when the depth budget allows it; the others
/// are depth-2 circuits. The pieces are composed, a final booster maps to
/// the target length, and its layer is collapsed.
pub fn build_good_code(
    n: usize,
    rate: f64,
    delta: f64,
    depth_budget: usize,
    seed: u64,
    opts: &BuildOptions,
) -> Result<Built, BuildError> {
    if !gv_admissible(rate, delta)? {
        return Err(BuildError::GvViolation { rate, delta });
    }
    if n < 2 || depth_budget < 2 {
        return Err(BuildError::Domain(
            "need n >= 2 and depth budget >= 2".into(),
        ));
    }
    let regime = &opts.regime;
    let nf = n as f64;
    let c0 = regime.c0;
    let b1 = nf / c0.powf(1.5);
    let b2 = nf / c0;
    let mut pieces = Vec::new();
    let mut cuts = vec![1.0];
    if depth_budget >= 4 && c0 <= nf && b1 >= 1.0 {
        let p = regime.pgc(n, 1.0, b1)?;
        let built = build_reduced(n, c0, 1.0, b1, derive_seed(seed, "piece", 0), opts)?;
        pieces.push(PgcPiece { built, params: p });
        cuts = vec![b1];
    }
    if b2 > cuts[0] {
        cuts.push(b2);
    }
    cuts.push(nf);
    for (i, win) in cuts.windows(2).enumerate() {
        let p = regime.pgc(n, win[0], win[1])?;
        let built = sample_depth2_pgc(&p, derive_seed(seed, "piece", i as u64 + 1), opts)?;
        pieces.push(PgcPiece { built, params: p });
    }
    let composed = compose_pgcs(
        &pieces,
        ComposeMode::MergeAndCollapse,
        derive_seed(seed, "compose", 0),
        opts,
    )?;

    let n_out = (nf / rate).floor() as usize;
    let goal = (delta * n_out as f64).ceil() as usize;
    let m = composed.circuit.num_outputs();
    let w = regime.weight_floor(n);
    let spec = BoosterSpec {
        m_in: m,
        n_out,
        k: (w.ceil() as usize).clamp(1, m),
        eps: booster_eps(n_out as f64 / nf, goal as f64 / n_out as f64).unwrap_or(0.25),
        trim: n,
        target: goal,
    };
    let images = band_images(&composed.circuit, 1, n, opts.budget)?;
    let booster = build_booster(
        &spec,
        &BoosterDomain::Vectors(images),
        derive_seed(seed, "final-booster", 0),
        opts,
    )?;
    let c = LinearCircuit::stack(&composed.circuit, &booster.circuit)?.collapse_last_layer()?;
    if c.depth() > depth_budget {
        return Err(BuildError::VerificationFailed(format!(
            "depth {} exceeds budget {depth_budget}",
            c.depth()
        )));
    }
    let md = min_distance(&c, opts.budget)?;
    if md.distance < goal {
        return Err(BuildError::VerificationFailed(format!(
            "minimum distance {} below {goal}",
            md.distance
        )));
    }
    let mut r = report("goodcode", opts, seed, &c);
    r.enumerated = md.enumerated;
    r.min_distance = Some(md.distance);
    r.fanin_bound = booster
        .report
        .fanin_bound
        .map(|b| b * composed.circuit.output_fanin().max(1));
    r.children = vec![composed.report, booster.report];
    Ok(Built {
        circuit: c,
        report: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> BuildOptions {
        BuildOptions::scaled()
    }

    #[test]
    fn booster_param_validation() {
        assert!(BoosterParams::new(0.5, 32.0, 0.125).is_ok());
        assert!(BoosterParams::new(0.5, 3.0, 0.25).is_err());
        assert!(BoosterParams::new(0.0, 32.0, 0.125).is_err());
        let eps = booster_eps(32.0, 0.125).unwrap();
        assert!(eps > 0.0 && eps <= 0.5);
        assert!(booster_eps(1.5, 0.4).is_none());
    }

    #[test]
    fn amplifier_instance() {
        let b = build_amplifier(8, 24, 1, &opts()).unwrap();
        assert_eq!(b.circuit.depth(), 1);
        assert_eq!(b.circuit.num_outputs(), 24);
        assert!(b.circuit.size() <= 8 * 24);
        assert!(b.report.output_fanin <= b.report.fanin_bound.unwrap());
        let rd = RangeDetectorParams::new(8, 24, 1.0, 8.0, 3.0, None).unwrap();
        assert!(check_range_detector(&b.circuit, &rd, 1 << 20)
            .unwrap()
            .is_ok());
        assert!(build_amplifier(8, 23, 1, &opts()).is_err());
    }

    #[test]
    fn condenser_instances() {
        let b = search_condenser(16, 6.0, 1.0, 3, &opts()).unwrap();
        assert_eq!(b.circuit.num_outputs(), 2);
        assert!(b.circuit.size() <= 6 * 16);
        assert!(search_condenser(16, 6.0, 2.0, 3, &opts()).is_err());
    }

    #[test]
    fn deterministic_builds() {
        let a = build_amplifier(8, 24, 9, &opts()).unwrap();
        let b = build_amplifier(8, 24, 9, &opts()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn handy_has_depth_four() {
        let b = build_handy(16, 9, 5, &opts()).unwrap();
        assert_eq!(b.circuit.depth(), 4);
        assert!(b.report.output_fanin <= b.report.fanin_bound.unwrap());
        let p = Regime::scaled().pgc(16, 1.0, 16.0 / 9.0).unwrap();
        assert!(check_pgc(&b.circuit, &p, 1 << 20).unwrap().is_ok());
    }

    #[test]
    fn good_code_small() {
        let b = build_good_code(10, 0.25, 0.15, 4, 7, &opts()).unwrap();
        assert!(b.report.min_distance.unwrap() >= 6);
        assert!(b.circuit.depth() <= 4);
        assert_eq!(b.circuit.num_outputs(), 40);
    }

    #[test]
    fn gv_violation() {
        assert!(matches!(
            build_good_code(10, 0.8, 0.3, 4, 1, &opts()),
            Err(BuildError::GvViolation { .. })
        ));
    }
}
