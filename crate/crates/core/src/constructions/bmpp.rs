//! Reiteratively but not upper frequently hypercyclic shift.
//!
//! `S_{j,l} = [l·b^j − j, l·b^j + j]` for `j, l ≥ 1`, and
//! `ϖ_n = weight_base^ν` with `ν` the largest offset `n − (l·b^j − j)` over
//! the intervals covering `n` (`ν = 0` off `S`).

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{ceil_div, exponent_weights, pow, pow_u64, span_set, ConstructionError, Nat, NuOracle, Params, SpanFn};
use crate::index_sets::{IndexSet, SetOracle};
use crate::shift_ops::WeightSequence;

/// Exponent of `ϖ_n` and the generation `j` of an interval attaining it.
fn nu_generic<T: Nat + PartialOrd>(b: u64, n: &T) -> (T, Option<u64>) {
    let bt = T::from(b);
    let mut best = (T::zero(), None);
    let mut pj = bt.clone();
    let mut j = 1u64;
    loop {
        let jt = T::from(j);
        if pj > n.clone() + jt.clone() {
            break;
        }
        let l = if *n > jt {
            let l = ceil_div(&(n.clone() - jt.clone()), &pj);
            if l.is_zero() {
                T::one()
            } else {
                l
            }
        } else {
            T::one()
        };
        let start = l * pj.clone() - jt;
        if start <= *n {
            let nu = n.clone() - start;
            if best.1.is_none() || nu > best.0 {
                best = (nu, Some(j));
            }
        }
        pj = pj * bt.clone();
        j += 1;
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct BmppNu {
    b: u32,
}

impl NuOracle for BmppNu {
    fn nu(&self, n: &BigUint) -> BigUint {
        nu_generic(self.b as u64, n).0
    }
    fn nu_u64(&self, n: u64) -> u64 {
        nu_generic(self.b as u64, &(n as u128)).0 as u64
    }
}

/// Hitting-set exponent schedule `m ↦ j_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum JSchedule {
    /// `j_m = factor·m`.
    Linear(u64),
    /// `j_1, …, j_M`; the hitting set then has `M` blocks.
    Explicit(Vec<u64>),
}

impl JSchedule {
    /// `j_m = m·b^k`, the least admissible schedule.
    pub fn minimal(b: u32, k: u64) -> Self {
        JSchedule::Linear(pow_u64(b, k).expect("b^k in machine range"))
    }

    pub fn j(&self, m: u64) -> Option<u64> {
        match self {
            JSchedule::Linear(f) => f.checked_mul(m),
            JSchedule::Explicit(v) => v.get(m.checked_sub(1)? as usize).copied(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bmpp {
    pub params: Params,
}

/// The counting bound for `D_{2k+1}` at one horizon `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetBound {
    pub k: u64,
    pub n: u64,
    /// Last index of the explicit sums.
    pub cutoff: u64,
    pub count: u64,
    /// `Σ_{j>k} (2j+1)·⌊(N+j)/b^j⌋`.
    pub interval_count: BigUint,
    /// `(N+1)·Σ_{j=k+1}^{J} (2j+1)/b^j + Σ_{j=k+1}^{J} 2j²/b^j`.
    pub main: BigRational,
    /// Certified bound on the two series tails past `J`, scaled as in `main`.
    pub tail_slack: BigRational,
    /// Bound on `Σ_{j>J} (2j+1)/b^j` alone.
    pub density_tail: BigRational,
}

impl LevelSetBound {
    pub fn holds(&self) -> bool {
        let c = BigRational::from_integer(self.count.into());
        c <= &self.main + &self.tail_slack
    }
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `Σ_{j ≥ from} f(j)/b^j ≤ t_from / (1 − ρ)`, with `ρ = f(from+1)/(b·f(from))`
/// the largest consecutive ratio for the polynomials used here.
fn geometric_tail(b: u32, from: u64, f: impl Fn(u64) -> u64) -> Option<BigRational> {
    let bq = rat(b as u64);
    let t = BigRational::new(f(from).into(), pow(b, from).into());
    let rho = rat(f(from + 1)) / (rat(f(from)) * bq);
    (rho < BigRational::one()).then(|| t / (BigRational::one() - rho))
}

impl Bmpp {
    pub fn new(params: Params) -> Result<Self, ConstructionError> {
        params.validate()?;
        Ok(Bmpp { params })
    }

    fn b(&self) -> u32 {
        self.params.b
    }

    pub fn weights(&self) -> WeightSequence {
        exponent_weights(
            format!("bmpp(b={},wb={})", self.b(), self.params.weight_base),
            self.params.weight_base,
            BmppNu { b: self.b() },
        )
    }

    pub fn nu(&self, n: &BigUint) -> BigUint {
        BmppNu { b: self.b() }.nu(n)
    }

    pub fn nu_u64(&self, n: u64) -> u64 {
        BmppNu { b: self.b() }.nu_u64(n)
    }

    pub fn nu_oracle(&self) -> impl NuOracle {
        BmppNu { b: self.b() }
    }

    /// Generation of an interval attaining `ν(n)`, if `n ∈ S`.
    pub fn attaining_generation(&self, n: u64) -> Option<u64> {
        nu_generic(self.b() as u64, &(n as u128)).1
    }

    /// `S_{j,l}` as `(start, end)`.
    pub fn interval(&self, j: u64, l: u64) -> (BigUint, BigUint) {
        let centre = BigUint::from(l) * pow(self.b(), j);
        (centre.clone() - j, centre + j)
    }

    fn spans(&self) -> SpanFn {
        let b = self.b();
        Arc::new(move |j, horizon| {
            let Some(bj) = pow_u64(b, j) else { return Vec::new() };
            let mut out = Vec::new();
            let mut l = 1u64;
            while let Some(c) = l.checked_mul(bj) {
                if c - j > horizon {
                    break;
                }
                out.push((c - j, c.saturating_add(j)));
                l += 1;
            }
            out
        })
    }

    /// `S = ⋃ S_{j,l}`.
    pub fn covered_set(&self) -> IndexSet {
        let b = self.b();
        span_set(
            format!("S(b={b})"),
            1..u64::MAX,
            self.spans(),
            move |j| pow(b, j) - j,
            0,
            move |n| nu_generic(b as u64, n).1.is_some(),
        )
    }

    /// `D_j = {n ≥ 1 : ϖ_n ≥ weight_base^j}`.
    pub fn level_set(&self, j: u64) -> Result<IndexSet, ConstructionError> {
        if j == 0 {
            return Err(ConstructionError::Param("level threshold must be at least 1".into()));
        }
        let b = self.b();
        let first = j.div_ceil(2).max(1);
        Ok(span_set(
            format!("D_{j}(b={b})"),
            first..u64::MAX,
            self.spans(),
            move |g| pow(b, g) - g,
            j,
            move |n| !n.is_zero() && nu_generic(b as u64, n).0 >= BigUint::from(j),
        ))
    }

    /// `{b^{j_m} + l·b^k : 0 ≤ l ≤ m, m ≥ 1}`.
    pub fn hitting_set(&self, k: u64, schedule: JSchedule) -> Result<IndexSet, ConstructionError> {
        self.check_schedule(k, &schedule, 64)?;
        let b = self.b();
        let label = format!("A(b={b},k={k})");
        Ok(IndexSet::from_oracle(label, Hitting { b, bk: pow(b, k), schedule }))
    }

    /// `j_m ≥ m·b^k` (and strict increase) for `m ≤ m_max`.
    pub fn check_schedule(
        &self,
        k: u64,
        schedule: &JSchedule,
        m_max: u64,
    ) -> Result<(), ConstructionError> {
        let bk = pow(self.b(), k);
        let mut prev = 0u64;
        for m in 1..=m_max {
            let Some(j) = schedule.j(m) else { break };
            if BigUint::from(j) < &bk * m || (m > 1 && j <= prev) {
                return Err(ConstructionError::JSchedule(m));
            }
            prev = j;
        }
        Ok(())
    }

    /// The counting bound for `card(D_{2k+1} ∩ [0, N])`, with the explicit
    /// sums cut at the first `J` whose density tail is below `tol`.
    pub fn level_set_bound(
        &self,
        k: u64,
        n: u64,
        tol: &BigRational,
    ) -> Result<LevelSetBound, ConstructionError> {
        let b = self.b();
        let f1 = |j: u64| 2 * j + 1;
        let f2 = |j: u64| 2 * j * j;
        let mut cutoff = k + 1;
        let (t1, t2) = loop {
            if let (Some(t1), Some(t2)) =
                (geometric_tail(b, cutoff + 1, f1), geometric_tail(b, cutoff + 1, f2))
            {
                if &t1 < tol {
                    break (t1, t2);
                }
            }
            cutoff += 1;
        };
        let mut s1 = BigRational::zero();
        let mut s2 = BigRational::zero();
        for j in k + 1..=cutoff {
            let bj = BigRational::from_integer(pow(b, j).into());
            s1 += rat(f1(j)) / &bj;
            s2 += rat(f2(j)) / bj;
        }
        let n1 = rat(n + 1);
        let main = &n1 * s1 + s2;
        let tail_slack = &n1 * &t1 + t2;
        let mut interval_count = BigUint::zero();
        let mut j = k + 1;
        loop {
            let bj = pow(b, j);
            let hits = (BigUint::from(n) + j) / &bj;
            if hits.is_zero() {
                break;
            }
            interval_count += hits * f1(j);
            j += 1;
        }
        let count = self.level_set(2 * k + 1)?.count_up_to(n);
        Ok(LevelSetBound { k, n, cutoff, count, interval_count, main, tail_slack, density_tail: t1 })
    }
}

struct Hitting {
    b: u32,
    bk: BigUint,
    schedule: JSchedule,
}

impl SetOracle for Hitting {
    fn contains(&self, n: &BigUint) -> bool {
        let mut m = 1u64;
        while let Some(j) = self.schedule.j(m) {
            let base = pow(self.b, j);
            if &base > n {
                break;
            }
            let (q, r) = num_integer::Integer::div_rem(&(n - &base), &self.bk);
            if r.is_zero() && q <= BigUint::from(m) {
                return true;
            }
            m += 1;
        }
        false
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let Some(bk) = self.bk.to_u64() else { return out };
        let mut m = 1u64;
        while let Some(j) = self.schedule.j(m) {
            let Some(base) = pow_u64(self.b, j).filter(|&v| v <= horizon) else { break };
            for l in 0..=m {
                match l.checked_mul(bk).and_then(|d| d.checked_add(base)) {
                    Some(v) if v <= horizon => out.push(v),
                    _ => break,
                }
            }
            m += 1;
        }
        out
    }
}
