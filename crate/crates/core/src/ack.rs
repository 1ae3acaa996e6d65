//! Ackermann function, the `λ_d` hierarchy of inverse-Ackermann functions,
//! and the even-index inverse `α(n)`.
//!
//! `λ_1(n) = ⌊√n⌋`, `λ_2(n) = ⌈log₂ n⌉`, and `λ_d = (λ_{d-2})*` where
//! `f*(n)` counts how many applications of `f` bring `n` down to at most 1.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest finite value a [`SaturatingNat`] can hold.
pub const SATURATION_LIMIT: u64 = (1u64 << 63) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AckError {
    #[error("f({at}) = {value} does not decrease")]
    NonDecreasingStep { at: u64, value: u64 },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Natural number that saturates at `2^63 - 1` into the `Huge` sentinel.
///
/// `Huge` compares greater than every finite value and absorbs arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SaturatingNat {
    Finite(u64),
    Huge,
}

impl SaturatingNat {
    pub fn new(value: u64) -> Self {
        if value > SATURATION_LIMIT {
            SaturatingNat::Huge
        } else {
            SaturatingNat::Finite(value)
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            SaturatingNat::Finite(v) => Some(v),
            SaturatingNat::Huge => None,
        }
    }

    pub fn is_huge(self) -> bool {
        matches!(self, SaturatingNat::Huge)
    }

    pub fn add(self, rhs: SaturatingNat) -> SaturatingNat {
        match (self, rhs) {
            (SaturatingNat::Finite(a), SaturatingNat::Finite(b)) => a
                .checked_add(b)
                .map_or(SaturatingNat::Huge, SaturatingNat::new),
            _ => SaturatingNat::Huge,
        }
    }

    pub fn mul(self, rhs: SaturatingNat) -> SaturatingNat {
        match (self, rhs) {
            (SaturatingNat::Finite(a), SaturatingNat::Finite(b)) => a
                .checked_mul(b)
                .map_or(SaturatingNat::Huge, SaturatingNat::new),
            _ => SaturatingNat::Huge,
        }
    }

    /// `2^self`, saturating.
    pub fn exp2(self) -> SaturatingNat {
        match self {
            SaturatingNat::Finite(e) if e < 63 => SaturatingNat::Finite(1u64 << e),
            _ => SaturatingNat::Huge,
        }
    }
}

impl From<u64> for SaturatingNat {
    fn from(v: u64) -> Self {
        SaturatingNat::new(v)
    }
}

impl fmt::Display for SaturatingNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SaturatingNat::Finite(v) => write!(f, "{v}"),
            SaturatingNat::Huge => write!(f, "HUGE"),
        }
    }
}

impl Serialize for SaturatingNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SaturatingNat::Finite(v) => s.serialize_u64(*v),
            SaturatingNat::Huge => s.serialize_str("HUGE"),
        }
    }
}

/// Index `d ≥ 1` of the `λ_d` hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LambdaIndex(u32);

impl LambdaIndex {
    pub fn new(d: u32) -> Result<Self, AckError> {
        if d == 0 {
            return Err(AckError::Domain("lambda index must be at least 1".into()));
        }
        Ok(LambdaIndex(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Minimal `i` with `f^{(i)}(n) ≤ 1`.
///
/// The decrease condition `f(m) < m` is checked on every iterate `m > 1`.
pub fn f_star<F: FnMut(u64) -> u64>(mut f: F, n: u64) -> Result<u64, AckError> {
    let mut cur = n;
    let mut count = 0;
    while cur > 1 {
        let next = f(cur);
        if next >= cur {
            return Err(AckError::NonDecreasingStep {
                at: cur,
                value: next,
            });
        }
        cur = next;
        count += 1;
    }
    Ok(count)
}

/// `⌈log₂ n⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - u64::from((n - 1).leading_zeros())
    }
}

pub fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

thread_local! {
    static LAMBDA_MEMO: RefCell<HashMap<(u32, u64), u64>> = RefCell::new(HashMap::new());
}

fn lambda_unchecked(d: u32, n: u64) -> u64 {
    match d {
        1 => isqrt(n),
        2 => ceil_log2(n),
        _ => {
            if n <= 1 {
                return 0;
            }
            if let Some(v) = LAMBDA_MEMO.with(|m| m.borrow().get(&(d, n)).copied()) {
                return v;
            }
            // f*(n) = 1 + f*(f(n)) for n > 1; λ_{d-2}(n) < n keeps this well founded.
            let inner = lambda_unchecked(d - 2, n);
            debug_assert!(inner < n);
            let v = 1 + lambda_unchecked(d, inner);
            LAMBDA_MEMO.with(|m| {
                let mut memo = m.borrow_mut();
                if memo.len() > 1 << 20 {
                    memo.clear();
                }
                memo.insert((d, n), v);
            });
            v
        }
    }
}

/// `λ_d(n)` for `n ≥ 1`.
pub fn lambda(d: LambdaIndex, n: u64) -> Result<u64, AckError> {
    if n == 0 {
        return Err(AckError::Domain("lambda is defined for n >= 1".into()));
    }
    Ok(lambda_unchecked(d.get(), n))
}

/// Convenience wrapper over [`lambda`] taking a raw index.
pub fn lambda_d(d: u32, n: u64) -> Result<u64, AckError> {
    lambda(LambdaIndex::new(d)?, n)
}

/// Dense table of `λ_d(n)` for all `n ≤ max_n`, built bottom-up.
///
/// Used by the exhaustive property sweeps, where per-call memoization would
/// dominate the run time.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    max_n: usize,
    rows: Vec<Vec<u32>>,
}

impl LambdaTable {
    pub fn new(max_d: u32, max_n: u64) -> Self {
        let max_n = max_n as usize;
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(max_d as usize);
        for d in 1..=max_d {
            let mut row = vec![0u32; max_n + 1];
            for n in 1..=max_n {
                row[n] = match d {
                    1 => isqrt(n as u64) as u32,
                    2 => ceil_log2(n as u64) as u32,
                    _ if n == 1 => 0,
                    _ => {
                        let inner = rows[(d - 3) as usize][n] as usize;
                        1 + row[inner]
                    }
                };
            }
            rows.push(row);
        }
        LambdaTable { max_n, rows }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn get(&self, d: u32, n: u64) -> u64 {
        u64::from(self.rows[(d - 1) as usize][n as usize])
    }
}

/// Memoized Ackermann function `A(i, j)` with saturation.
#[derive(Debug, Default)]
pub struct Ackermann {
    memo: HashMap<(u64, u64), SaturatingNat>,
}

impl Ackermann {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eval(&mut self, i: u64, j: u64) -> Result<SaturatingNat, AckError> {
        if j == 0 {
            return Err(AckError::Domain("A(i, j) requires j >= 1".into()));
        }
        Ok(self.eval_inner(i, SaturatingNat::Finite(j)))
    }

    fn eval_inner(&mut self, i: u64, j: SaturatingNat) -> SaturatingNat {
        let j = match j {
            SaturatingNat::Huge => return SaturatingNat::Huge,
            SaturatingNat::Finite(j) => j,
        };
        match i {
            0 => SaturatingNat::Finite(j).mul(SaturatingNat::Finite(2)),
            1 => SaturatingNat::Finite(j).exp2(),
            _ => {
                if let Some(v) = self.memo.get(&(i, j)) {
                    return *v;
                }
                // A(i, j) = A_{i-1}^{(j-1)}(2); stops as soon as the value saturates.
                let mut v = SaturatingNat::Finite(2);
                let mut step = 1;
                while step < j && !v.is_huge() {
                    v = self.eval_inner(i - 1, v);
                    step += 1;
                }
                self.memo.insert((i, j), v);
                v
            }
        }
    }

    /// `A_i^{(times)}(seed)`.
    pub fn iterate(&mut self, i: u64, times: u64, seed: u64) -> Result<SaturatingNat, AckError> {
        if seed == 0 {
            return Err(AckError::Domain("iteration seed must be at least 1".into()));
        }
        let mut v = SaturatingNat::Finite(seed);
        for _ in 0..times {
            if v.is_huge() {
                break;
            }
            v = self.eval_inner(i, v);
        }
        Ok(v)
    }
}

pub fn ackermann(i: u64, j: u64) -> Result<SaturatingNat, AckError> {
    Ackermann::new().eval(i, j)
}

pub fn ackermann_iterate(i: u64, times: u64, seed: u64) -> Result<SaturatingNat, AckError> {
    Ackermann::new().iterate(i, times, seed)
}

/// `λ_d` extended to saturated arguments: `HUGE` maps to `None`.
pub fn lambda_saturating(d: u32, n: SaturatingNat) -> Result<Option<u64>, AckError> {
    match n {
        SaturatingNat::Finite(v) => lambda_d(d, v).map(Some),
        SaturatingNat::Huge => Ok(None),
    }
}

/// Least even `d` with `λ_d(n) ≤ 6`.
pub fn alpha(n: u64) -> Result<u32, AckError> {
    if n == 0 {
        return Err(AckError::Domain("alpha is defined for n >= 1".into()));
    }
    let mut d = 2;
    loop {
        if lambda_unchecked(d, n) <= 6 {
            return Ok(d);
        }
        d += 2;
    }
}
