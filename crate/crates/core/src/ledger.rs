//! Symbolic wire-count replay of the depth-`2k` upper-bound induction.
//!
//! Every node of a [`BoundLedger`] instantiates one size bound at concrete
//! parameters. Leaves carry a wire contribution; internal nodes sum their
//! children and record the bound they are expected to respect.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::ack::{ceil_log2, lambda_d, Ackermann, SaturatingNat};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid constant table: {0}")]
    Constants(String),
}

/// Absolute constants of the size recursion.
///
/// `c` and `d_fanin` are derived from the others unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTable<S> {
    pub c0: S,
    pub c1: S,
    pub c2: S,
    pub c3: S,
    pub c4: S,
    pub c5: S,
    pub c6: S,
    pub d1: S,
    pub d2: S,
    pub c: Option<S>,
    pub d_fanin: Option<S>,
}

fn int<S: Scalar>(v: u64) -> S {
    S::from_u64(v).expect("integer fits the scalar type")
}

fn max<S: Scalar>(a: S, b: S) -> S {
    if a >= b {
        a
    } else {
        b
    }
}

impl<S: Scalar + ToPrimitive> ConstantTable<S> {
    /// `c0 = 6`, every other constant 1, `c` and `D` derived.
    pub fn new_default() -> Self {
        ConstantTable {
            c0: int(6),
            c1: int(1),
            c2: int(1),
            c3: int(1),
            c4: int(1),
            c5: int(1),
            c6: int(1),
            d1: int(1),
            d2: int(1),
            c: None,
            d_fanin: None,
        }
    }

    /// Defaults with `c = D = 1` forced, for hand-checkable totals.
    pub fn unit() -> Self {
        ConstantTable {
            c: Some(int(1)),
            d_fanin: Some(int(1)),
            ..Self::new_default()
        }
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        if self.c0 < int(6) {
            return Err(LedgerError::Constants("c0 must be at least 6".into()));
        }
        let rest = [
            &self.c1, &self.c2, &self.c3, &self.c4, &self.c5, &self.c6, &self.d1, &self.d2,
        ];
        if rest.iter().any(|v| **v <= S::zero()) {
            return Err(LedgerError::Constants("constants must be positive".into()));
        }
        if [&self.c, &self.d_fanin]
            .iter()
            .any(|v| v.as_ref().is_some_and(|v| *v <= S::zero()))
        {
            return Err(LedgerError::Constants("overrides must be positive".into()));
        }
        Ok(())
    }

    /// `⌈log₂ c0⌉²`, the integer stand-in for `log² c0`.
    pub fn log_c0_squared(&self) -> S {
        let c0 = self.c0.to_f64().expect("finite c0").ceil() as u64;
        let l = ceil_log2(c0);
        int(l * l)
    }

    /// `2·c2·max(D1, D2)` unless overridden.
    pub fn fanin(&self) -> S {
        self.d_fanin.clone().unwrap_or_else(|| {
            int::<S>(2) * self.c2.clone() * max(self.d1.clone(), self.d2.clone())
        })
    }

    /// Smallest `c` meeting the three requirements of the induction.
    pub fn required_c(&self) -> S {
        let a = self.c1.clone() * self.fanin() + self.log_c0_squared() * self.c3.clone();
        let b = int::<S>(2)
            * (int::<S>(2) * self.c1.clone() * self.d1.clone() + self.c4.clone() + self.c5.clone());
        max(max(a, b), self.c6.clone())
    }

    pub fn c(&self) -> S {
        self.c.clone().unwrap_or_else(|| self.required_c())
    }

    /// Whether `c` and `D` meet the inequalities the induction needs.
    pub fn constraints_hold(&self) -> bool {
        let d_ok =
            self.fanin() >= int::<S>(2) * self.c2.clone() * max(self.d1.clone(), self.d2.clone());
        d_ok && self.c() >= self.required_c()
    }
}

fn parse_exact(v: &serde_json::Value) -> Result<BigRational, LedgerError> {
    let bad = || LedgerError::Constants(format!("expected integer or \"a/b\", got {v}"));
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|i| BigRational::from_integer(BigInt::from(i)))
            .ok_or_else(bad),
        serde_json::Value::String(s) => {
            let (a, b) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        _ => Err(bad()),
    }
}

impl ConstantTable<BigRational> {
    /// Reads a JSON object whose values are integers or `"a/b"` strings.
    /// Missing keys keep their defaults.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, LedgerError> {
        let obj = v
            .as_object()
            .ok_or_else(|| LedgerError::Constants("expected a JSON object".into()))?;
        let mut t = Self::new_default();
        for (key, val) in obj {
            let x = parse_exact(val)?;
            match key.as_str() {
                "c0" => t.c0 = x,
                "c1" => t.c1 = x,
                "c2" => t.c2 = x,
                "c3" => t.c3 = x,
                "c4" => t.c4 = x,
                "c5" => t.c5 = x,
                "c6" => t.c6 = x,
                "D1" | "d1" => t.d1 = x,
                "D2" | "d2" => t.d2 = x,
                "c" => t.c = Some(x),
                "D" => t.d_fanin = Some(x),
                other => return Err(LedgerError::Constants(format!("unknown constant {other}"))),
            }
        }
        t.validate()?;
        Ok(t)
    }

    /// Floating-point copy of the table.
    pub fn to_f64(&self) -> ConstantTable<f64> {
        let f = |v: &BigRational| v.to_f64().expect("finite");
        ConstantTable {
            c0: f(&self.c0),
            c1: f(&self.c1),
            c2: f(&self.c2),
            c3: f(&self.c3),
            c4: f(&self.c4),
            c5: f(&self.c5),
            c6: f(&self.c6),
            d1: f(&self.d1),
            d2: f(&self.d2),
            c: self.c.as_ref().map(f),
            d_fanin: self.d_fanin.as_ref().map(f),
        }
    }
}

/// Which size bound a ledger node instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerStep {
    /// `S_{2k}(n, n/r, n) ≤ 3cλ_{2k}(r)n`, assembled by composition.
    WideBand,
    /// `S_{2k}(n, n/A(k-1, r), n/r) ≤ 2cn`, assembled by reduction.
    NarrowBand,
    /// Depth-4 base case `3cλ_4(r)n`.
    DepthFourBase,
    /// Depth-2 piece `c3·n·⌈log₂ c0⌉²` covering `[n/c0, n]`.
    DepthTwo,
    /// Composition overhead `c1·D·h·n` or `2·c1·D1·n`.
    Composition,
    /// Condenser plus amplifier overhead `c4·n`.
    Reduction,
    /// Depth-4 circuit for `[n/4r², n/r]`, `c5·n`.
    Handy,
    /// Inner problem with fewer than two inputs, charged `3c·n`.
    Degenerate,
}

impl fmt::Display for LedgerStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LedgerStep::WideBand => "wide-band",
            LedgerStep::NarrowBand => "narrow-band",
            LedgerStep::DepthFourBase => "depth-four-base",
            LedgerStep::DepthTwo => "depth-two",
            LedgerStep::Composition => "composition",
            LedgerStep::Reduction => "reduction",
            LedgerStep::Handy => "handy",
            LedgerStep::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerParams {
    /// Half the depth.
    pub k: u32,
    pub n: u64,
    pub r: u64,
    /// Number of composed pieces, where it applies.
    pub h: Option<u64>,
}

impl fmt::Display for LedgerParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={};n={};r={}", self.k, self.n, self.r)?;
        if let Some(h) = self.h {
            write!(f, ";h={h}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerNode<S> {
    pub step: LedgerStep,
    pub params: LedgerParams,
    /// Own contribution; zero for internal nodes.
    pub wires: S,
    /// Sum of leaf contributions below this node.
    pub total: S,
    /// The bound this node is meant to respect, where one is claimed.
    pub claim: Option<S>,
    /// Side conditions, such as `h ≤ λ_{2k}(r)`.
    pub conditions: Vec<(String, bool)>,
    pub children: Vec<LedgerNode<S>>,
}

impl<S: Scalar> LedgerNode<S> {
    fn leaf(step: LedgerStep, params: LedgerParams, wires: S) -> Self {
        LedgerNode {
            step,
            params,
            total: wires.clone(),
            wires,
            claim: None,
            conditions: Vec::new(),
            children: Vec::new(),
        }
    }

    fn internal(
        step: LedgerStep,
        params: LedgerParams,
        claim: S,
        children: Vec<LedgerNode<S>>,
    ) -> Self {
        let total = children
            .iter()
            .fold(S::zero(), |acc, c| acc + c.total.clone());
        LedgerNode {
            step,
            params,
            wires: S::zero(),
            total,
            claim: Some(claim),
            conditions: Vec::new(),
            children,
        }
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a LedgerNode<S>>) {
        out.push(self);
        for c in &self.children {
            c.visit(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundLedger<S> {
    pub n: u64,
    pub d: u32,
    pub c: S,
    pub fanin: S,
    pub constraints_hold: bool,
    pub root: LedgerNode<S>,
}

/// One CSV row per node: step, parameters, wires (own contribution for
/// leaves, subtotal otherwise).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub step: String,
    pub params: String,
    pub wires: String,
}

impl<S: Scalar + fmt::Display> BoundLedger<S> {
    pub fn total(&self) -> &S {
        &self.root.total
    }

    pub fn nodes(&self) -> Vec<&LedgerNode<S>> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn leaf_sum(&self) -> S {
        self.nodes()
            .iter()
            .filter(|n| n.children.is_empty())
            .fold(S::zero(), |acc, n| acc + n.wires.clone())
    }

    /// Every claimed bound and side condition holds.
    pub fn all_claims_hold(&self) -> bool {
        self.nodes().iter().all(|n| {
            n.claim.as_ref().is_none_or(|c| n.total <= *c) && n.conditions.iter().all(|(_, ok)| *ok)
        })
    }

    pub fn rows(&self) -> Vec<LedgerRow> {
        self.nodes()
            .iter()
            .map(|n| LedgerRow {
                step: n.step.to_string(),
                params: n.params.to_string(),
                wires: n.total.to_string(),
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,params,wires\n");
        for r in self.rows() {
            s.push_str(&format!("{},{},{}\n", r.step, r.params, r.wires));
        }
        s
    }
}

struct Replay<'a, S> {
    ct: &'a ConstantTable<S>,
    c: S,
    fanin: S,
    ack: Ackermann,
}

impl<S: Scalar + ToPrimitive> Replay<'_, S> {
    /// `S_{2k}(n, n/r, n)` for `2 ≤ r ≤ n`.
    fn wide(&mut self, k: u32, n: u64, r: u64) -> LedgerNode<S> {
        let lam = lambda_d(2 * k, r).expect("r >= 1");
        let claim = int::<S>(3) * self.c.clone() * int::<S>(lam) * int::<S>(n);
        let params = LedgerParams { k, n, r, h: None };
        if k == 2 {
            return LedgerNode::leaf(LedgerStep::DepthFourBase, params, claim);
        }
        // Chain c0 < A_{k-1}(c0) < A_{k-1}^{(2)}(c0) < ... until it reaches r.
        let c0 = self.ct.c0.to_f64().expect("finite").ceil() as u64;
        let mut chain = vec![SaturatingNat::Finite(c0)];
        while chain.last().is_some_and(|v| *v < SaturatingNat::Finite(r)) || chain.len() < 2 {
            let last = *chain.last().expect("nonempty");
            chain.push(match last {
                SaturatingNat::Finite(v) => self.ack.eval(u64::from(k - 1), v).expect("v >= 1"),
                SaturatingNat::Huge => SaturatingNat::Huge,
            });
        }
        let h = (chain.len() - 1) as u64;
        let mut children = vec![LedgerNode::leaf(
            LedgerStep::DepthTwo,
            LedgerParams {
                k: 1,
                n,
                r: c0,
                h: None,
            },
            self.depth_two(n),
        )];
        for a in &chain[1..chain.len() - 1] {
            let a = a.finite().expect("below r");
            children.push(self.narrow(k, n, a));
        }
        let comp = self.ct.c1.clone() * self.fanin.clone() * int::<S>(h) * int::<S>(n);
        children.push(LedgerNode::leaf(
            LedgerStep::Composition,
            LedgerParams {
                k,
                n,
                r,
                h: Some(h),
            },
            comp,
        ));
        let mut node = LedgerNode::internal(
            LedgerStep::WideBand,
            LedgerParams {
                k,
                n,
                r,
                h: Some(h),
            },
            claim,
            children,
        );
        node.conditions
            .push(("h <= lambda_{2k}(r)".into(), h <= lam));
        node
    }

    fn depth_two(&self, n: u64) -> S {
        self.ct.c3.clone() * int::<S>(n) * self.ct.log_c0_squared()
    }

    /// `S_{2k}(n, n/A(k-1, r), n/r)` for `c0 ≤ r ≤ n`.
    fn narrow(&mut self, k: u32, n: u64, r: u64) -> LedgerNode<S> {
        let params = LedgerParams { k, n, r, h: None };
        let claim = int::<S>(2) * self.c.clone() * int::<S>(n);
        let inner_n = n / (2 * r);
        let inner = if inner_n < 2 {
            let w = int::<S>(3) * self.c.clone() * int::<S>(inner_n);
            LedgerNode::leaf(
                LedgerStep::Degenerate,
                LedgerParams {
                    k: k - 1,
                    n: inner_n,
                    r: inner_n,
                    h: None,
                },
                w,
            )
        } else {
            // Band [n/A(k-1, r), n/2r] on ⌊n/2r⌋ inputs, in wide-band form.
            let a = self.ack.eval(u64::from(k - 1), r).expect("r >= 1");
            let inner_r = match a {
                SaturatingNat::Finite(v) => v.div_ceil(2 * r).clamp(2, inner_n),
                SaturatingNat::Huge => inner_n,
            };
            self.wide(k - 1, inner_n, inner_r)
        };
        let children = vec![
            inner,
            LedgerNode::leaf(
                LedgerStep::Reduction,
                params.clone(),
                self.ct.c4.clone() * int::<S>(n),
            ),
            LedgerNode::leaf(
                LedgerStep::Handy,
                params.clone(),
                self.ct.c5.clone() * int::<S>(n),
            ),
            LedgerNode::leaf(
                LedgerStep::Composition,
                LedgerParams {
                    h: Some(2),
                    ..params.clone()
                },
                int::<S>(2) * self.ct.c1.clone() * self.ct.d1.clone() * int::<S>(n),
            ),
        ];
        LedgerNode::internal(LedgerStep::NarrowBand, params, claim, children)
    }
}

/// Replays the size recursion for depth `d` on the full band `[1, n]`.
pub fn upper_bound_ledger<S: Scalar + ToPrimitive>(
    n: u64,
    d: u32,
    ct: &ConstantTable<S>,
) -> Result<BoundLedger<S>, LedgerError> {
    if d < 4 || d % 2 == 1 {
        return Err(LedgerError::Domain(format!(
            "depth must be even and at least 4, got {d}"
        )));
    }
    if n < 2 {
        return Err(LedgerError::Domain("n must be at least 2".into()));
    }
    ct.validate()?;
    let mut replay = Replay {
        ct,
        c: ct.c(),
        fanin: ct.fanin(),
        ack: Ackermann::new(),
    };
    let root = replay.wide(d / 2, n, n);
    Ok(BoundLedger {
        n,
        d,
        c: replay.c,
        fanin: replay.fanin,
        constraints_hold: ct.constraints_hold(),
        root,
    })
}

/// Exact rational ledger.
pub type ExactLedger = BoundLedger<BigRational>;
/// Floating-point ledger.
pub type FloatLedger = BoundLedger<f64>;
