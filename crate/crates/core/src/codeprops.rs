//! Code-property checkers: weight-band guarantees, minimum distance,
//! entropy arithmetic, and minor-based predicates on generator matrices.

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, LinearCircuit};
use crate::combin::{binomial, Combinations};
use crate::gf::{BitVector, Field, Matrix};
use crate::Verdict;

pub const DEFAULT_BAND_BUDGET: u64 = 1 << 24;
pub const DEFAULT_MINOR_BUDGET: u64 = 1_000_000;
pub const DEFAULT_VECTOR_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{needed} candidates exceed the enumeration budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("checker requires a GF(2) circuit")]
    FieldMismatch,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// `h(p) = -p log₂ p - (1-p) log₂ (1-p)`.
pub fn binary_entropy<T: Float>(p: T) -> Result<T, CodeError> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(CodeError::Domain("entropy argument outside [0, 1]".into()));
    }
    if p == T::zero() || p == T::one() {
        return Ok(T::zero());
    }
    let q = T::one() - p;
    Ok(-(p * p.log2()) - q * q.log2())
}

/// `rate < 1 - h(delta)`.
pub fn gv_admissible<T: Float>(rate: T, delta: T) -> Result<bool, CodeError> {
    let half = T::from(0.5).expect("representable");
    if !(rate > T::zero() && rate < T::one()) || !(delta > T::zero() && delta < half) {
        return Err(CodeError::Domain(
            "need rate in (0, 1) and delta in (0, 1/2)".into(),
        ));
    }
    Ok(rate < T::one() - binary_entropy(delta)?)
}

/// Encoder guarantee: every input of weight in `[r, s]` maps to an output of
/// weight at least `w_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgcParams {
    pub n_in: usize,
    pub n_out: usize,
    pub r: f64,
    pub s: f64,
    pub w_min: f64,
}

impl PgcParams {
    pub fn new(n_in: usize, n_out: usize, r: f64, s: f64, w_min: f64) -> Result<Self, CodeError> {
        if !(r > 0.0 && r <= s) {
            return Err(CodeError::Domain(format!(
                "band [{r}, {s}] must satisfy 0 < r <= s"
            )));
        }
        if !(w_min > 0.0 && w_min <= n_out as f64) {
            return Err(CodeError::Domain(format!(
                "w_min = {w_min} not in (0, {n_out}]"
            )));
        }
        Ok(PgcParams {
            n_in,
            n_out,
            r,
            s,
            w_min,
        })
    }

    /// The unscaled instance: `32n` outputs and weight floor `4n`.
    pub fn literal_default(n: usize, r: f64, s: f64) -> Result<Self, CodeError> {
        Self::new(n, 32 * n, r, s, 4.0 * n as f64)
    }

    pub fn band(&self) -> (usize, usize) {
        weight_band(self.r, self.s, self.n_in)
    }
}

/// Input weights in `[ell, k]` map to output weights in `[r, s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeDetectorParams {
    pub m_in: usize,
    pub n_out: usize,
    pub ell: f64,
    pub k: f64,
    pub r: f64,
    pub s: f64,
}

impl RangeDetectorParams {
    pub fn new(
        m_in: usize,
        n_out: usize,
        ell: f64,
        k: f64,
        r: f64,
        s: Option<f64>,
    ) -> Result<Self, CodeError> {
        let s = s.unwrap_or(n_out as f64);
        if ell > k || r > s {
            return Err(CodeError::Domain("need ell <= k and r <= s".into()));
        }
        Ok(RangeDetectorParams {
            m_in,
            n_out,
            ell,
            k,
            r,
            s,
        })
    }
}

/// Integer weights inside the real interval `[lo, hi]`, capped at `n`.
pub fn weight_band(lo: f64, hi: f64, n: usize) -> (usize, usize) {
    let a = lo.ceil().max(0.0);
    let b = hi.floor().min(n as f64);
    (a as usize, if b < 0.0 { 0 } else { b as usize })
}

fn band_count(n: usize, lo: usize, hi: usize) -> u64 {
    (lo..=hi.min(n)).fold(0u64, |acc, w| {
        acc.saturating_add(binomial(n as u64, w as u64))
    })
}

struct BandSearch<'a, P> {
    rows: &'a [Vec<u64>],
    n: usize,
    accept: &'a P,
}

impl<P: Fn(&[u64]) -> bool + Sync> BandSearch<'_, P> {
    fn dfs(
        &self,
        chosen: &mut Vec<usize>,
        acc: &[u64],
        next: usize,
        remaining: usize,
        count: &mut u64,
    ) -> bool {
        if remaining == 0 {
            *count += 1;
            return !(self.accept)(acc);
        }
        let mut buf = vec![0u64; acc.len()];
        for v in next..=self.n - remaining {
            for ((b, a), r) in buf.iter_mut().zip(acc).zip(&self.rows[v]) {
                *b = a ^ r;
            }
            chosen.push(v);
            if self.dfs(chosen, &buf, v + 1, remaining - 1, count) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    /// First input (weight ascending, then lexicographic support) whose
    /// image is rejected.
    fn run(&self, lo: usize, hi: usize, words: usize) -> (Option<Vec<usize>>, u64) {
        let mut total = 0u64;
        for w in lo..=hi.min(self.n) {
            if w == 0 {
                total += 1;
                if !(self.accept)(&vec![0u64; words]) {
                    return (Some(Vec::new()), total);
                }
                continue;
            }
            let parts: Vec<(Option<Vec<usize>>, u64)> = (0..=self.n - w)
                .into_par_iter()
                .map(|first| {
                    let mut chosen = vec![first];
                    let mut count = 0;
                    let found =
                        self.dfs(&mut chosen, &self.rows[first], first + 1, w - 1, &mut count);
                    (found.then_some(chosen), count)
                })
                .collect();
            for (found, c) in parts {
                total += c;
                if found.is_some() {
                    return (found, total);
                }
            }
        }
        (None, total)
    }
}

fn packed_rows(c: &LinearCircuit) -> Result<Vec<Vec<u64>>, CodeError> {
    if !c.field().is_gf2() {
        return Err(CodeError::FieldMismatch);
    }
    Ok(c.binary_generator_rows()?
        .into_iter()
        .map(|v| v.words().to_vec())
        .collect())
}

fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Exhaustively checks every input whose weight lies in `[lo, hi]` against
/// `accept`, applied to the packed image.
pub fn check_band<P>(
    c: &LinearCircuit,
    lo: usize,
    hi: usize,
    budget: u64,
    accept: P,
) -> Result<Verdict<BitVector>, CodeError>
where
    P: Fn(&[u64]) -> bool + Sync,
{
    let rows = packed_rows(c)?;
    let n = c.num_inputs();
    if lo > hi || lo > n {
        return Ok(Verdict::ok(0));
    }
    let needed = band_count(n, lo, hi);
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    let words = c.num_outputs().div_ceil(64);
    let search = BandSearch {
        rows: &rows,
        n,
        accept: &accept,
    };
    let (found, enumerated) = search.run(lo, hi, words);
    Ok(match found {
        Some(support) => Verdict::refuted(BitVector::from_support(n, &support), enumerated),
        None => Verdict::ok(enumerated),
    })
}

fn check_shape(c: &LinearCircuit, n_in: usize, n_out: usize) -> Result<(), CodeError> {
    if c.num_inputs() != n_in || c.num_outputs() != n_out {
        return Err(CodeError::Domain(format!(
            "circuit is {}→{}, parameters expect {n_in}→{n_out}",
            c.num_inputs(),
            c.num_outputs()
        )));
    }
    Ok(())
}

pub fn check_pgc(
    c: &LinearCircuit,
    p: &PgcParams,
    budget: u64,
) -> Result<Verdict<BitVector>, CodeError> {
    check_shape(c, p.n_in, p.n_out)?;
    let (lo, hi) = p.band();
    let w_min = p.w_min;
    check_band(c, lo, hi, budget, |y| popcount(y) as f64 >= w_min)
}

pub fn check_range_detector(
    c: &LinearCircuit,
    p: &RangeDetectorParams,
    budget: u64,
) -> Result<Verdict<BitVector>, CodeError> {
    check_shape(c, p.m_in, p.n_out)?;
    let (lo, hi) = weight_band(p.ell, p.k, p.m_in);
    let (r, s) = (p.r, p.s);
    check_band(c, lo, hi, budget, |y| {
        let w = popcount(y) as f64;
        w >= r && w <= s
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinDistance {
    pub distance: usize,
    /// A nonzero message attaining the distance.
    pub witness: Vec<u64>,
    pub enumerated: u64,
}

/// Minimum weight of `C(x)` over nonzero `x`.
pub fn min_distance(c: &LinearCircuit, budget: u64) -> Result<MinDistance, CodeError> {
    let n = c.num_inputs();
    if n == 0 {
        return Err(CodeError::Domain("code has no nonzero messages".into()));
    }
    let q = c.field().order();
    let needed = (q as u128)
        .checked_pow(n as u32)
        .map_or(u64::MAX, |v| v.min(u128::from(u64::MAX)) as u64)
        - 1;
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    match c.field() {
        Field::Gf2 => Ok(min_distance_gf2(&packed_rows(c)?, n)),
        f => Ok(min_distance_odometer(&c.generator_matrix(), f)),
    }
}

fn min_distance_gf2(rows: &[Vec<u64>], n: usize) -> MinDistance {
    // Gray code: step i flips bit trailing_zeros(i).
    let mut acc = vec![0u64; rows.first().map_or(0, Vec::len)];
    let mut x = 0u64;
    let mut best = usize::MAX;
    let mut best_x = 0u64;
    let total = 1u64 << n;
    for i in 1..total {
        let b = i.trailing_zeros() as usize;
        x ^= 1 << b;
        for (a, r) in acc.iter_mut().zip(&rows[b]) {
            *a ^= r;
        }
        let w = popcount(&acc);
        if w < best {
            best = w;
            best_x = x;
            if w == 0 {
                break;
            }
        }
    }
    MinDistance {
        distance: best,
        witness: (0..n).map(|i| (best_x >> i) & 1).collect(),
        enumerated: total - 1,
    }
}

fn min_distance_odometer(g: &Matrix, f: Field) -> MinDistance {
    let (n, m) = (g.rows(), g.cols());
    let mut x = vec![0u64; n];
    let mut y = vec![0u64; m];
    let mut best = usize::MAX;
    let mut best_x = Vec::new();
    let mut enumerated = 0u64;
    // Incrementing digit i (with or without wrap) adds row i to the image.
    'outer: loop {
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            for (yj, &gj) in y.iter_mut().zip(g.row(i)) {
                *yj = f.add(*yj, gj);
            }
            x[i] = f.add(x[i], 1);
            if x[i] != 0 {
                break;
            }
            i += 1;
        }
        enumerated += 1;
        let w = y.iter().filter(|&&v| v != 0).count();
        if w < best {
            best = w;
            best_x = x.clone();
        }
    }
    MinDistance {
        distance: best,
        witness: best_x,
        enumerated,
    }
}

fn minor_budget_check(n: usize, m: usize, budget: u64) -> Result<u64, CodeError> {
    let needed = (1..=n.min(m)).fold(0u64, |acc, i| {
        acc.saturating_add(
            binomial(n as u64, i as u64).saturating_mul(binomial(m as u64, i as u64)),
        )
    });
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    Ok(needed)
}

/// Row and column index sets of a square submatrix.
pub type MinorIndex = (Vec<usize>, Vec<usize>);

/// Every square submatrix nonsingular. Minors are visited by size, then
/// lexicographically by rows, then columns.
pub fn is_sc_induced_code(m: &Matrix, budget: u64) -> Result<Verdict<MinorIndex>, CodeError> {
    minor_budget_check(m.rows(), m.cols(), budget)?;
    let mut enumerated = 0u64;
    for size in 1..=m.rows().min(m.cols()) {
        let col_sets: Vec<Vec<usize>> = Combinations::new(m.cols(), size).collect();
        for xs in Combinations::new(m.rows(), size) {
            let hit = col_sets
                .par_iter()
                .position_first(|ys| m.submatrix(&xs, ys).det().expect("square submatrix") == 0);
            match hit {
                Some(j) => {
                    enumerated += j as u64 + 1;
                    return Ok(Verdict::refuted((xs, col_sets[j].clone()), enumerated));
                }
                None => enumerated += col_sets.len() as u64,
            }
        }
    }
    Ok(Verdict::ok(enumerated))
}

/// Brute-force check of `wt(xM) ≥ m - wt(x) + 1` for every nonzero `x`,
/// which by linearity covers all pairs of messages.
pub fn dist_definition_check(m: &Matrix, budget: u64) -> Result<Verdict<Vec<u64>>, CodeError> {
    let f = m.field();
    let (n, cols) = (m.rows(), m.cols());
    let needed = (f.order() as u128)
        .checked_pow(n as u32)
        .map_or(u64::MAX, |v| v.min(u128::from(u64::MAX)) as u64);
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    let mut x = vec![0u64; n];
    let mut y = vec![0u64; cols];
    let mut enumerated = 0u64;
    loop {
        let mut i = 0;
        loop {
            if i == n {
                return Ok(Verdict::ok(enumerated));
            }
            for (yj, &gj) in y.iter_mut().zip(m.row(i)) {
                *yj = f.add(*yj, gj);
            }
            x[i] = f.add(x[i], 1);
            if x[i] != 0 {
                break;
            }
            i += 1;
        }
        enumerated += 1;
        let wx = x.iter().filter(|&&v| v != 0).count();
        let wy = y.iter().filter(|&&v| v != 0).count();
        if wy + wx < cols + 1 {
            return Ok(Verdict::refuted(x, enumerated));
        }
    }
}

/// Every choice of `rows` columns is linearly independent. The witness is
/// the first dependent column set.
pub fn is_mds(m: &Matrix, budget: u64) -> Result<Verdict<Vec<usize>>, CodeError> {
    let (n, cols) = (m.rows(), m.cols());
    if n > cols {
        return Err(CodeError::Domain(format!("{n} rows exceed {cols} columns")));
    }
    let needed = binomial(cols as u64, n as u64);
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    let rows: Vec<usize> = (0..n).collect();
    let mut enumerated = 0u64;
    for ys in Combinations::new(cols, n) {
        enumerated += 1;
        if m.submatrix(&rows, &ys).det().expect("square submatrix") == 0 {
            return Ok(Verdict::refuted(ys, enumerated));
        }
    }
    Ok(Verdict::ok(enumerated))
}
