//! Upper frequently but not frequently hypercyclic shift.
//!
//! Same as [`super::bmpp`] except that for square `j = q²` the first
//! interval is widened to `[b^j − b^{j−1}, b^j + b^{j−1}]`. Offsets are
//! measured from each interval's least element.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{
    ceil_div, exponent_weights, is_square, pow, pow_u64, span_set, ConstructionError, Nat,
    NuOracle, Params, SpanFn,
};
use crate::index_sets::{IndexSet, SetOracle};
use crate::shift_ops::WeightSequence;

/// `(ν, covered)` for index `n`.
fn nu_generic<T: Nat + PartialOrd>(b: u64, n: &T) -> (T, bool) {
    let bt = T::from(b);
    let mut best = T::zero();
    let mut covered = false;
    let mut prev = T::one(); // b^{j−1}
    let mut pj = bt.clone();
    let mut j = 1u64;
    while pj.clone() - prev.clone() <= *n {
        let jt = T::from(j);
        let min_l = if is_square(j) {
            let s = pj.clone() - prev.clone();
            if *n <= pj.clone() + prev.clone() {
                let nu = n.clone() - s;
                if !covered || nu > best {
                    best = nu;
                }
                covered = true;
            }
            T::from(2)
        } else {
            T::one()
        };
        let l = if *n > jt { ceil_div(&(n.clone() - jt.clone()), &pj) } else { T::zero() };
        let l = if l < min_l { min_l } else { l };
        let start = l * pj.clone() - jt;
        if start <= *n {
            let nu = n.clone() - start;
            if !covered || nu > best {
                best = nu;
            }
            covered = true;
        }
        prev = pj.clone();
        pj = pj * bt.clone();
        j += 1;
    }
    (best, covered)
}

/// `n ∈ R = ⋃_q S_{q²,1}`.
fn in_square_region<T: Nat + PartialOrd>(b: u64, n: &T) -> bool {
    let bt = T::from(b);
    let mut q = 1u64;
    loop {
        let j = q * q;
        let prev = num_traits::pow(bt.clone(), (j - 1) as usize);
        let pj = prev.clone() * bt.clone();
        if pj.clone() - prev.clone() > *n {
            return false;
        }
        if *n <= pj + prev {
            return true;
        }
        q += 1;
    }
}

#[derive(Debug, Clone, Copy)]
struct BrNu {
    b: u32,
}

impl NuOracle for BrNu {
    fn nu(&self, n: &BigUint) -> BigUint {
        nu_generic(self.b as u64, n).0
    }
    fn nu_u64(&self, n: u64) -> u64 {
        nu_generic(self.b as u64, &(n as u128)).0 as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Br {
    pub params: Params,
}

/// Count of `R` below `b^{q²} − b^{q²−1}` against its two bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareRegionBound {
    pub q: u64,
    pub count: u64,
    /// `Σ_{j=1}^{q−1} (2b^{j²−1} + 1)`.
    pub interval_sum: BigUint,
    /// `3/(b−1)·b^{(q−1)²}`, which is `⅓·10^{q²−2q+1}` at `b = 10`.
    pub bound: BigRational,
}

impl Br {
    pub fn new(params: Params) -> Result<Self, ConstructionError> {
        params.validate()?;
        Ok(Br { params })
    }

    fn b(&self) -> u32 {
        self.params.b
    }

    pub fn weights(&self) -> WeightSequence {
        exponent_weights(
            format!("br(b={},wb={})", self.b(), self.params.weight_base),
            self.params.weight_base,
            BrNu { b: self.b() },
        )
    }

    pub fn nu(&self, n: &BigUint) -> BigUint {
        BrNu { b: self.b() }.nu(n)
    }

    pub fn nu_u64(&self, n: u64) -> u64 {
        BrNu { b: self.b() }.nu_u64(n)
    }

    pub fn nu_oracle(&self) -> impl NuOracle {
        BrNu { b: self.b() }
    }

    /// `S_{j,l}` as `(start, end)`.
    pub fn interval(&self, j: u64, l: u64) -> (BigUint, BigUint) {
        let bj = pow(self.b(), j);
        if l == 1 && is_square(j) {
            let h = pow(self.b(), j - 1);
            (&bj - &h, bj + h)
        } else {
            let c = BigUint::from(l) * bj;
            (c.clone() - j, c + j)
        }
    }

    fn spans(&self) -> SpanFn {
        let b = self.b();
        Arc::new(move |j, horizon| {
            let Some(bj) = pow_u64(b, j) else { return Vec::new() };
            let mut out = Vec::new();
            let mut l = 1u64;
            if is_square(j) {
                let h = bj / b as u64;
                if bj - h <= horizon {
                    out.push((bj - h, bj.saturating_add(h)));
                }
                l = 2;
            }
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

    fn lower_bound(b: u32) -> impl Fn(u64) -> BigUint + Send + Sync + 'static {
        move |g| pow(b, g) - pow(b, g - 1)
    }

    pub fn covered_set(&self) -> IndexSet {
        let b = self.b();
        span_set(
            format!("S'(b={b})"),
            1..u64::MAX,
            self.spans(),
            Self::lower_bound(b),
            0,
            move |n| nu_generic(b as u64, n).1,
        )
    }

    /// `E_j = {n ≥ 1 : ϖ_n ≥ weight_base^j}`.
    pub fn level_set(&self, j: u64) -> Result<IndexSet, ConstructionError> {
        if j == 0 {
            return Err(ConstructionError::Param("level threshold must be at least 1".into()));
        }
        let b = self.b();
        Ok(span_set(
            format!("E_{j}(b={b})"),
            1..u64::MAX,
            self.spans(),
            Self::lower_bound(b),
            j,
            move |n| !n.is_zero() && nu_generic(b as u64, n).0 >= BigUint::from(j),
        ))
    }

    /// `R = ⋃_{q ≥ 1} S_{q²,1}`.
    pub fn square_region(&self) -> IndexSet {
        let b = self.b();
        let spans: SpanFn = Arc::new(move |q, horizon| {
            let Some(bj) = pow_u64(b, q * q) else { return Vec::new() };
            let h = bj / b as u64;
            if bj - h <= horizon {
                vec![(bj - h, bj.saturating_add(h))]
            } else {
                Vec::new()
            }
        });
        span_set(
            format!("R(b={b})"),
            1..u64::MAX,
            spans,
            move |q| pow(b, q * q) - pow(b, q * q - 1),
            0,
            move |n| in_square_region(b as u64, n),
        )
    }

    /// `{b^{q²} + l·b^k : 0 ≤ l ≤ b^{q²−1−k}, q ≥ k+1}`.
    pub fn hitting_set(&self, k: u64) -> IndexSet {
        let b = self.b();
        IndexSet::from_oracle(format!("A'(b={b},k={k})"), BrHitting { b, k })
    }

    /// `card(A ∩ [0, b^{q²} + b^{q²−1}])` and the guaranteed `b^{q²−1−k}`.
    pub fn hitting_count(&self, k: u64, q: u64) -> Result<(u64, BigUint), ConstructionError> {
        if q < k + 1 {
            return Err(ConstructionError::Param(format!("q={q} must exceed k={k}")));
        }
        let b = self.b();
        let n = pow_u64(b, q * q)
            .and_then(|v| v.checked_add(v / b as u64))
            .ok_or_else(|| ConstructionError::Param(format!("b^(q^2) beyond machine range at q={q}")))?;
        Ok((self.hitting_set(k).count_up_to(n), pow(b, q * q - 1 - k)))
    }

    pub fn square_region_bound(&self, q: u64) -> Result<SquareRegionBound, ConstructionError> {
        if q < 2 {
            return Err(ConstructionError::Param("q must be at least 2".into()));
        }
        let b = self.b();
        let top = pow_u64(b, q * q)
            .map(|v| v - v / b as u64 - 1)
            .ok_or_else(|| ConstructionError::Param(format!("b^(q^2) beyond machine range at q={q}")))?;
        let count = self.square_region().count_up_to(top);
        let interval_sum = (1..q).map(|j| pow(b, j * j - 1) * 2u32 + 1u32).sum();
        let bound = BigRational::new(
            (pow(b, (q - 1) * (q - 1)) * 3u32).into(),
            BigUint::from(b - 1).into(),
        );
        Ok(SquareRegionBound { q, count, interval_sum, bound })
    }
}

struct BrHitting {
    b: u32,
    k: u64,
}

impl SetOracle for BrHitting {
    fn contains(&self, n: &BigUint) -> bool {
        let bk = pow(self.b, self.k);
        let mut q = self.k + 1;
        loop {
            let base = pow(self.b, q * q);
            if &base > n {
                return false;
            }
            let (l, r) = num_integer::Integer::div_rem(&(n - &base), &bk);
            if r.is_zero() && l <= pow(self.b, q * q - 1 - self.k) {
                return true;
            }
            q += 1;
        }
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let Some(bk) = pow_u64(self.b, self.k) else { return out };
        let mut q = self.k + 1;
        while let Some(base) = pow_u64(self.b, q * q).filter(|&v| v <= horizon) {
            let lmax = pow(self.b, q * q - 1 - self.k).to_u64().unwrap_or(u64::MAX);
            for l in 0..=lmax {
                match l.checked_mul(bk).and_then(|d| d.checked_add(base)) {
                    Some(v) if v <= horizon => out.push(v),
                    _ => break,
                }
            }
            q += 1;
        }
        out
    }
}
