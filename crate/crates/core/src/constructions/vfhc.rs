//! Very frequently hypercyclic, non-chaotic shift.
//!
//! Blocks end at `a_k = c·(b^{m_k} + … + b^{m_1})`. The thinning sets are
//! `Y_q = ⋃_{l≥1} [l·b^{m_q} − h_q, l·b^{m_q} + h_q]` with half-width
//! `h_q = d_q + a_{q−1} + q`, where `d_2 = 0` and `d_q` is the residue
//! that puts every left end point of `Y_q` on a left end point of `Y_{q−1}`.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{
    block_ends, block_nu, block_nu_u64, ends_u64, exponent_weights, in_block_heads, pow,
    span_set, ConstructionError, NuOracle, Params, SpanFn,
};
use crate::index_sets::{merge_union, IndexSet, SetOracle};
use crate::shift_ops::WeightSequence;

/// `m_q = 2·m_{q−1} + 1` beyond the supplied prefix.
pub fn extend_schedule(prefix: &[u64], len: usize) -> Vec<u64> {
    let mut m = prefix.to_vec();
    while m.len() < len {
        let last = *m.last().expect("nonempty prefix");
        m.push(2 * last + 1);
    }
    m
}

#[derive(Clone)]
struct Ends {
    big: Arc<Vec<BigUint>>,
    small: Arc<Vec<u64>>,
}

impl NuOracle for Ends {
    fn nu(&self, n: &BigUint) -> BigUint {
        block_nu(&self.big, n).expect("index beyond the tabulated block ends")
    }
    fn nu_u64(&self, n: u64) -> u64 {
        match block_nu_u64(&self.small, n) {
            Some(v) => v,
            None => self.nu(&BigUint::from(n)).to_u64().expect("machine-range exponent"),
        }
    }
}

#[derive(Clone)]
pub struct Vfhc {
    pub params: Params,
    /// `m_1, …, m_Q`.
    m: Arc<Vec<u64>>,
    ends: Ends,
    /// `d_q` and `h_q` at index `q` (unused below 2).
    d: Arc<Vec<BigUint>>,
    h: Arc<Vec<BigUint>>,
}

impl std::fmt::Debug for Vfhc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Vfhc").field("params", &self.params).field("m", &self.m).finish()
    }
}

/// `1 − count/(H+1) − tail` against the measured Hindman-union density.
#[derive(Debug, Clone, PartialEq)]
pub struct HindmanFloor {
    pub p: u64,
    pub r: u64,
    pub depth: u64,
    pub horizon: u64,
    /// `card(⋃_{n≤N_r}(B_p − n) ∩ [0, H])`.
    pub union_count: u64,
    /// `card(⋃_{q=r+1}^{Q} Y_q ∩ [0, H])`.
    pub tail_count: u64,
    /// Density bound for `⋃_{q>Q} Y_q`.
    pub tail_bound: BigRational,
    pub estimate: BigRational,
    pub floor: BigRational,
    /// First `k ≤ H` outside both the union and `⋃_{q>r} Y_q`.
    pub inclusion_violation: Option<u64>,
}

impl HindmanFloor {
    pub fn holds(&self) -> bool {
        self.estimate >= self.floor
    }
}

impl Vfhc {
    /// `prefix` gives `m_1, m_2, …` and is extended to `q_max` entries.
    pub fn new(params: Params, prefix: &[u64], q_max: usize) -> Result<Self, ConstructionError> {
        params.validate()?;
        if prefix.is_empty() || prefix[0] != 1 {
            return Err(ConstructionError::MSchedule(0));
        }
        if q_max < 2 {
            return Err(ConstructionError::Param("q_max must be at least 2".into()));
        }
        let m = extend_schedule(prefix, q_max.max(prefix.len()));
        if let Some(i) = m.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ConstructionError::MSchedule(i + 1));
        }
        let big = block_ends(&params, &m, false);
        let b = params.b;
        let modulus = |q: usize| pow(b, m[q - 1]);
        for q in 2..=m.len() {
            let lhs = (&big[q - 1] + q as u64) * 2u32 + modulus(q - 1) * 3u32;
            if lhs >= modulus(q) {
                return Err(ConstructionError::Growth(q as u64));
            }
        }
        let mut d = vec![BigUint::zero(); m.len() + 1];
        let mut h = vec![BigUint::zero(); m.len() + 1];
        h[2] = &big[1] + 2u32;
        for q in 3..=m.len() {
            let prev = BigInt::from(modulus(q - 1));
            let target: BigInt = BigInt::from(d[q - 1].clone()) + BigInt::from(big[q - 2].clone())
                - BigInt::from(big[q - 1].clone())
                - 1;
            d[q] = target.mod_floor(&prev).to_biguint().expect("residue is nonnegative");
            h[q] = &d[q] + &big[q - 1] + q as u64;
            // Left ends −h_q and −h_{q−1} agree modulo b^{m_{q−1}}.
            if (&h[q] % modulus(q - 1)) != (&h[q - 1] % modulus(q - 1)) {
                return Err(ConstructionError::Alignment(q as u64));
            }
        }
        let small = ends_u64(&big);
        Ok(Vfhc {
            params,
            m: Arc::new(m),
            ends: Ends { big: Arc::new(big), small: Arc::new(small) },
            d: Arc::new(d),
            h: Arc::new(h),
        })
    }

    /// Base 3, `m = (1, 4, 10)` extended by doubling.
    pub fn desk() -> Self {
        Self::new(Params::desk(), &[1, 4, 10], 8).expect("desk schedule is admissible")
    }

    fn b(&self) -> u32 {
        self.params.b
    }

    pub fn q_max(&self) -> u64 {
        self.m.len() as u64
    }

    pub fn m(&self, q: u64) -> u64 {
        self.m[q as usize - 1]
    }

    pub fn block_end(&self, k: u64) -> &BigUint {
        &self.ends.big[k as usize]
    }

    pub fn d(&self, q: u64) -> &BigUint {
        &self.d[q as usize]
    }

    pub fn half_width(&self, q: u64) -> &BigUint {
        &self.h[q as usize]
    }

    pub fn modulus(&self, q: u64) -> BigUint {
        pow(self.b(), self.m(q))
    }

    pub fn nu(&self, n: &BigUint) -> BigUint {
        self.ends.nu(n)
    }

    pub fn nu_u64(&self, n: u64) -> u64 {
        self.ends.nu_u64(n)
    }

    pub fn nu_oracle(&self) -> impl NuOracle {
        self.ends.clone()
    }

    pub fn weights(&self) -> WeightSequence {
        exponent_weights(
            format!("vfhc(b={},wb={},c={},m={:?})", self.b(), self.params.weight_base, self.params.c, self.m),
            self.params.weight_base,
            self.ends.clone(),
        )
    }

    /// `C_p = {l·b^{m_p} : l ≥ 1}`.
    pub fn c_set(&self, p: u64) -> IndexSet {
        IndexSet::multiples(self.modulus(p), 1).with_label(format!("C_{p}"))
    }

    /// `X = ⋃_{k ≥ 0} [a_k, a_k + k]`.
    pub fn x_set(&self) -> IndexSet {
        let ends = Arc::clone(&self.ends.big);
        let small = Arc::clone(&self.ends.small);
        let spans: SpanFn = Arc::new(move |k, horizon| match small.get(k as usize) {
            Some(&a) if a <= horizon && a != u64::MAX => vec![(a, a.saturating_add(k))],
            _ => Vec::new(),
        });
        let bound = Arc::clone(&ends);
        span_set(
            "X".into(),
            0..ends.len() as u64,
            spans,
            move |k| bound[k as usize].clone(),
            0,
            move |n| in_block_heads(&ends, n),
        )
    }

    /// `Y_q` for `2 ≤ q ≤ q_max`.
    pub fn y_set(&self, q: u64) -> IndexSet {
        assert!((2..=self.q_max()).contains(&q), "Y_q needs 2 <= q <= q_max");
        let modulus = self.modulus(q);
        let h = self.half_width(q).clone();
        let (bs, hs) = (modulus.to_u64(), h.to_u64());
        let spans: SpanFn = Arc::new(move |l, horizon| {
            let (Some(bq), Some(h)) = (bs, hs) else { return Vec::new() };
            match bq.checked_mul(l) {
                Some(c) if c - h <= horizon => vec![(c - h, c.saturating_add(h))],
                _ => Vec::new(),
            }
        });
        let (bm, bh) = (modulus.clone(), h.clone());
        span_set(
            format!("Y_{q}"),
            1..u64::MAX,
            spans,
            move |l| &bm * l - &bh,
            0,
            move |n| y_member(n, &modulus, &h),
        )
    }

    /// `⋃_{q = lo}^{hi} Y_q` (`hi` capped at `q_max`).
    pub fn y_union(&self, lo: u64, hi: Option<u64>) -> IndexSet {
        let hi = hi.unwrap_or(self.q_max()).min(self.q_max());
        IndexSet::from_oracle(format!("Y_[{lo},{hi}]"), YUnion { v: self.clone(), lo: lo.max(2), hi })
    }

    /// `B_p = C_p \ ⋃_{q>p} Y_q`.
    pub fn b_set(&self, p: u64) -> IndexSet {
        self.c_set(p).difference(&self.y_union(p + 1, None)).with_label(format!("B_{p}"))
    }

    /// `A_p = B_p \ X`.
    pub fn a_set(&self, p: u64) -> IndexSet {
        self.b_set(p).difference(&self.x_set()).with_label(format!("A_{p}"))
    }

    /// `L_r = 2(b^{m_{r−1}} + a_{r−1} + r) + 1`.
    pub fn max_gap(&self, r: u64) -> BigUint {
        (self.modulus(r - 1) + self.block_end(r - 1) + r) * 2u32 + 1u32
    }

    /// `N_r = b^{m_p} + L_r`.
    pub fn depth(&self, p: u64, r: u64) -> Result<u64, ConstructionError> {
        if r < p + 1 || r > self.q_max() {
            return Err(ConstructionError::Param(format!("need p < r <= q_max, got p={p}, r={r}")));
        }
        (self.modulus(p) + self.max_gap(r))
            .to_u64()
            .ok_or_else(|| ConstructionError::Param("N_r beyond machine range".into()))
    }

    /// Smallest `q` whose first interval starts beyond `horizon`.
    fn first_unreached(&self, horizon: u64) -> u64 {
        let h = BigUint::from(horizon);
        (2..=self.q_max())
            .find(|&q| self.modulus(q) - self.half_width(q) > h)
            .unwrap_or(self.q_max() + 1)
    }

    /// Density bound `Σ_{q>from} (2h_q+1)/b^{m_q}`: exact terms through
    /// `q_max`, then `K·b^{−(m_{q−1}+1)}` per term with
    /// `K = 3 + 2cb/(b−1)`, valid for the doubling extension.
    pub fn y_tail_density(&self, from: u64) -> BigRational {
        let b = self.b();
        let mut sum = BigRational::zero();
        for q in from + 1..=self.q_max() {
            let w = self.half_width(q) * 2u32 + 1u32;
            sum += BigRational::new(w.into(), self.modulus(q).into());
        }
        let bq = BigRational::from_integer(b.into());
        let k = BigRational::from_integer(3.into())
            + BigRational::new((2 * b as u64 * self.params.c as u64).into(), (b as u64 - 1).into());
        let last = self.m(self.q_max().max(from));
        let first_term = BigRational::new(
            BigInt::one(),
            BigInt::from(pow(b, last + 1)),
        );
        sum + k * first_term * &bq / (bq - BigRational::one())
    }

    /// The Hindman-union density at `horizon` against its guaranteed floor.
    /// Requires `q_max ≥ 3` and the doubling extension past `q_max`.
    pub fn hindman_floor(
        &self,
        p: u64,
        r: u64,
        horizon: u64,
    ) -> Result<HindmanFloor, ConstructionError> {
        let depth = self.depth(p, r)?;
        if self.q_max() < 3 {
            return Err(ConstructionError::Param("q_max must be at least 3".into()));
        }
        let reach = self.first_unreached(horizon).max(r + 1);
        if reach > self.q_max() {
            return Err(ConstructionError::Param("horizon reaches beyond q_max".into()));
        }
        let q_top = reach - 1;
        let union = self.b_set(p).union_of_shifts(depth).enumerate_up_to(horizon);
        let tail = self.y_union(r + 1, Some(q_top)).enumerate_up_to(horizon);
        let h1 = BigInt::from(horizon + 1);
        let estimate = BigRational::new((union.len() as u64).into(), h1.clone());
        let tail_bound = self.y_tail_density(q_top);
        let floor = BigRational::one()
            - BigRational::new((tail.len() as u64).into(), h1)
            - &tail_bound;
        let far = self.y_union(r + 1, None).enumerate_up_to(horizon);
        let inclusion_violation = (0..=horizon).find(|k| {
            union.binary_search(k).is_err() && far.binary_search(k).is_err()
        });
        Ok(HindmanFloor {
            p,
            r,
            depth,
            horizon,
            union_count: union.len() as u64,
            tail_count: tail.len() as u64,
            tail_bound,
            estimate,
            floor,
            inclusion_violation,
        })
    }

    /// Right end of some maximal interval of `⋃_{q>p} Y_q` within
    /// `horizon` whose next `C_p` element is farther than `b^{m_p}` or does
    /// not precede the next interval.
    pub fn gap_violation(&self, p: u64, horizon: u64) -> Option<u64> {
        let y = self.y_union(p + 1, None).enumerate_up_to(horizon);
        let step = self.modulus(p).to_u64()?;
        let mut i = 0;
        while i < y.len() {
            let mut j = i;
            while j + 1 < y.len() && y[j + 1] == y[j] + 1 {
                j += 1;
            }
            if j + 1 < y.len() {
                let end = y[j];
                let next_c = (end / step + 1) * step;
                if next_c - end > step || next_c >= y[j + 1] {
                    return Some(end);
                }
            }
            i = j + 1;
        }
        None
    }
}

fn y_member(n: &BigUint, modulus: &BigUint, h: &BigUint) -> bool {
    let r = n % modulus;
    (&r <= h && n >= modulus) || &(modulus - &r) <= h
}

struct YUnion {
    v: Vfhc,
    lo: u64,
    hi: u64,
}

impl SetOracle for YUnion {
    fn contains(&self, n: &BigUint) -> bool {
        if self.hi == self.v.q_max() {
            // Membership beyond the tabulated schedule cannot be decided.
            let top = self.v.modulus(self.hi) - self.v.half_width(self.hi);
            assert!(
                n < &(top * self.v.params.b),
                "index too large for the tabulated exponent schedule"
            );
        }
        (self.lo..=self.hi).any(|q| y_member(n, &self.v.modulus(q), self.v.half_width(q)))
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let h = BigUint::from(horizon);
        (self.lo..=self.hi)
            .filter(|&q| self.v.modulus(q) - self.v.half_width(q) <= h)
            .fold(Vec::new(), |acc, q| merge_union(&acc, &self.v.y_set(q).enumerate_up_to(horizon)))
    }
}
