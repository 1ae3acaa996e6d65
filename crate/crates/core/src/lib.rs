//! Randomized linear-circuit encoders for error-correcting codes, with
//! exhaustive verifiers, inverse-Ackermann size/depth calculators, and
//! superconcentrator tooling.

pub mod ack;
pub mod bipartite;
pub mod bounds;
pub mod builders;
pub mod circuit;
pub mod codeprops;
pub mod combin;
pub mod gf;
pub mod ledger;
pub mod seed;
pub mod superconc;

use num_traits::{FromPrimitive, Num};
use serde::Serialize;

/// Numeric type usable by the bound and ledger calculators: `f32`, `f64`,
/// or an exact rational.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + std::fmt::Debug {}

impl<T: Clone + PartialOrd + Num + FromPrimitive + std::fmt::Debug> Scalar for T {}

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

/// Result of an exhaustive check: the first counterexample in enumeration
/// order, if any, and how many candidates were examined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict<W> {
    pub counterexample: Option<W>,
    pub enumerated: u64,
}

impl<W> Verdict<W> {
    pub fn ok(enumerated: u64) -> Self {
        Verdict {
            counterexample: None,
            enumerated,
        }
    }

    pub fn refuted(witness: W, enumerated: u64) -> Self {
        Verdict {
            counterexample: Some(witness),
            enumerated,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.counterexample.is_none()
    }
}

pub use ledger::{ExactLedger, FloatLedger};
