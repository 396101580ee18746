//! Closed-form counterexample weights and the auxiliary sets used to certify
//! them.
//!
//! Every construction is parameterised by a base `b`, a weight base (the
//! `2` in `ϖ_n = 2^ν`) and, for the block constructions, a coefficient `c`.
//! The classic parameters are `(10, 2, 5)`; [`Params::desk`] gives the small
//! base `(3, 2, 5)` at which everything stays enumerable.

pub mod bg;
pub mod bmpp;
pub mod br;
pub mod vfhc;

use std::io::Write;
use std::ops::Range;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::index_sets::{IndexSet, Interval, IntervalFamily};
use crate::scalar::Scalar;
use crate::shift_ops::{WeightOracle, WeightSequence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("base must be at least 2, got {0}")]
    BadBase(u32),
    #[error("weight base must be at least 2, got {0}")]
    BadWeightBase(u32),
    #[error("coefficient must be positive")]
    BadCoefficient,
    #[error("hitting-set schedule violates j_m >= m*b^k at m={0}")]
    JSchedule(u64),
    #[error("block-boundary property fails at l={l}, p={p}, k={k}")]
    BlockBoundary { l: BigUint, p: u64, k: u64 },
    #[error("offset bound p <= b^((p-1)^2) fails at p={0}")]
    OffsetBound(u64),
    #[error("series budget a_(q-1) <= c*b^2/(b-1) * b^(q^2-2q) fails at q={0}")]
    SeriesBudget(u64),
    #[error("exponent schedule must start at 1 and increase strictly (position {0})")]
    MSchedule(usize),
    #[error("growth condition 2(a_(q-1)+q) + 3b^(m_(q-1)) < b^(m_q) fails at q={0}")]
    Growth(u64),
    #[error("alignment of interval end points failed at q={0}")]
    Alignment(u64),
    #[error("invalid parameter: {0}")]
    Param(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub b: u32,
    pub weight_base: u32,
    pub c: u32,
}

impl Default for Params {
    fn default() -> Self {
        Params::classic()
    }
}

impl Params {
    pub fn classic() -> Self {
        Params { b: 10, weight_base: 2, c: 5 }
    }

    pub fn desk() -> Self {
        Params { b: 3, weight_base: 2, c: 5 }
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        if self.b < 2 {
            return Err(ConstructionError::BadBase(self.b));
        }
        if self.weight_base < 2 {
            return Err(ConstructionError::BadWeightBase(self.weight_base));
        }
        if self.c == 0 {
            return Err(ConstructionError::BadCoefficient);
        }
        Ok(())
    }

    pub fn pow(&self, e: u64) -> BigUint {
        pow(self.b, e)
    }
}

pub fn pow(b: u32, e: u64) -> BigUint {
    num_traits::pow(BigUint::from(b), e as usize)
}

/// `b^e` if it fits in a `u64`.
pub fn pow_u64(b: u32, e: u64) -> Option<u64> {
    let e = u32::try_from(e).ok()?;
    (b as u64).checked_pow(e)
}

/// Unsigned integer arithmetic shared by the `u128` fast path and `BigUint`.
pub(crate) trait Nat: Integer + Clone + From<u64> {}
impl<T: Integer + Clone + From<u64>> Nat for T {}

pub(crate) fn ceil_div<T: Nat>(a: &T, b: &T) -> T {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + T::one()
    }
}

/// `ϖ = weight_base^ν`.
pub fn varpi_from_nu(weight_base: u32, nu: u64) -> Scalar {
    Scalar::int_pow(weight_base, nu)
}

/// Exponent oracle `n ↦ ν(n)` with `ϖ_n = weight_base^ν(n)`.
pub trait NuOracle: Send + Sync {
    fn nu(&self, n: &BigUint) -> BigUint;

    fn nu_u64(&self, n: u64) -> u64 {
        self.nu(&BigUint::from(n)).to_u64().expect("exponent of a machine-range index")
    }
}

struct ExponentWeights<T> {
    nu: T,
    weight_base: u32,
}

impl<T: NuOracle> WeightOracle for ExponentWeights<T> {
    fn varpi(&self, n: &BigUint) -> Scalar {
        let nu = self.nu.nu(n).to_u64().expect("weight exponent beyond 64 bits");
        varpi_from_nu(self.weight_base, nu)
    }
    fn varpi_u64(&self, n: u64) -> Scalar {
        varpi_from_nu(self.weight_base, self.nu.nu_u64(n))
    }
}

/// Weights `ϖ_n = weight_base^ν(n)`; consecutive exponents grow by at most
/// one, so `sup |w_n| = weight_base`.
pub(crate) fn exponent_weights<T: NuOracle + 'static>(
    label: String,
    weight_base: u32,
    nu: T,
) -> WeightSequence {
    WeightSequence::from_oracle(
        label,
        ExponentWeights { nu, weight_base },
        Some(Scalar::from(weight_base as i64)),
    )
}

/// Closed-form spans `[s, e]` of generation `g` whose start is at most the
/// horizon.
pub(crate) type SpanFn = Arc<dyn Fn(u64, u64) -> Vec<(u64, u64)> + Send + Sync>;

/// Union of the spans `[s + offset, e]` of every generation in `gens`.
pub(crate) fn span_set<B, M>(
    label: String,
    gens: Range<u64>,
    spans: SpanFn,
    lower_bound: B,
    offset: u64,
    member: M,
) -> IndexSet
where
    B: Fn(u64) -> BigUint + Send + Sync + 'static,
    M: Fn(&BigUint) -> bool + Send + Sync + 'static,
{
    let family = IntervalFamily::new(label, move |g, horizon| {
        spans(g, horizon)
            .into_iter()
            .filter_map(|(s, e)| {
                let s = s.checked_add(offset)?;
                (s <= e).then(|| Interval::new(s, e))
            })
            .collect()
    })
    .with_generations(gens)
    .with_start_lower_bound(move |g| lower_bound(g) + offset)
    .with_membership(member);
    IndexSet::from_intervals(family).expect("start bound supplied")
}

/// `(n, ν, ϖ_n)` rows for `n ≤ horizon`.
pub fn write_weight_table<W: Write>(
    nu: &dyn NuOracle,
    weight_base: u32,
    horizon: u64,
    out: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "nu", "varpi"])?;
    for n in 0..=horizon {
        let e = nu.nu_u64(n);
        w.write_record([n.to_string(), e.to_string(), varpi_from_nu(weight_base, e).to_string()])?;
    }
    w.flush()
}

/// `a_k = c·Σ_{i=1}^k b^{e_i}`, plus `c` when `unit_offset` is set, for
/// `k = 0..=exps.len()` (with `a_0 = 0`).
pub(crate) fn block_ends(params: &Params, exps: &[u64], unit_offset: bool) -> Vec<BigUint> {
    let c = BigUint::from(params.c);
    let mut out = vec![BigUint::zero()];
    let mut acc = if unit_offset { c.clone() } else { BigUint::zero() };
    for &e in exps {
        acc += &c * params.pow(e);
        out.push(acc.clone());
    }
    out
}

/// `ν(n) = n − a_{k−1}` for `a_{k−1} ≤ n < a_k`, with `ends` increasing and
/// unbounded past the last entry (`None` when `n ≥` the last end).
pub(crate) fn block_nu(ends: &[BigUint], n: &BigUint) -> Option<BigUint> {
    let k = ends.partition_point(|a| a <= n);
    (k < ends.len()).then(|| n - &ends[k - 1])
}

pub(crate) fn block_nu_u64(ends: &[u64], n: u64) -> Option<u64> {
    let k = ends.partition_point(|&a| a <= n);
    (k < ends.len()).then(|| n - ends[k - 1])
}

/// Machine-range prefix of `ends`, including the first end beyond `u64`
/// as `u64::MAX` so every `u64` query is bracketed.
pub(crate) fn ends_u64(ends: &[BigUint]) -> Vec<u64> {
    let mut out = Vec::new();
    for a in ends {
        match a.to_u64() {
            Some(v) => out.push(v),
            None => {
                out.push(u64::MAX);
                break;
            }
        }
    }
    out
}

/// `Σ_{k ≥ 0} [a_k, a_k + k]` membership for block ends `ends`.
pub(crate) fn in_block_heads(ends: &[BigUint], n: &BigUint) -> bool {
    let k = ends.partition_point(|a| a <= n);
    if k == 0 {
        return false;
    }
    n - &ends[k - 1] <= BigUint::from((k - 1) as u64)
}

/// Exact integer square root test for `Q = {q² : q ≥ 1}`.
pub(crate) fn is_square(j: u64) -> bool {
    let r = num_integer::Roots::sqrt(&j);
    j >= 1 && r * r == j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_validation() {
        assert!(Params::classic().validate().is_ok());
        assert!(Params::desk().validate().is_ok());
        assert_eq!(Params { b: 1, ..Params::desk() }.validate(), Err(ConstructionError::BadBase(1)));
        assert_eq!(
            Params { weight_base: 1, ..Params::desk() }.validate(),
            Err(ConstructionError::BadWeightBase(1))
        );
        assert_eq!(Params { c: 0, ..Params::desk() }.validate(), Err(ConstructionError::BadCoefficient));
    }

    #[test]
    fn block_helpers() {
        let ends = block_ends(&Params::classic(), &[1, 4], false);
        assert_eq!(ends, vec![0u32.into(), 50u32.into(), 50050u32.into()]);
        assert_eq!(block_nu(&ends, &BigUint::from(49u32)), Some(49u32.into()));
        assert_eq!(block_nu(&ends, &BigUint::from(50u32)), Some(0u32.into()));
        assert_eq!(block_nu(&ends, &BigUint::from(50050u32)), None);
        assert!(in_block_heads(&ends, &BigUint::from(0u32)));
        assert!(in_block_heads(&ends, &BigUint::from(51u32)));
        assert!(!in_block_heads(&ends, &BigUint::from(52u32)));
        assert!(is_square(1) && is_square(49) && !is_square(48) && !is_square(0));
        assert_eq!(pow_u64(3, 40), Some(12157665459056928801));
        assert_eq!(pow_u64(3, 41), None);
        assert_eq!(ceil_div(&7u128, &3), 3);
        assert_eq!(ceil_div(&6u128, &3), 2);
    }
}
