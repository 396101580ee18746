//! Frequently hypercyclic, non-chaotic shift built from blocks
//! `[a_{k−1}, a_k)` with `a_k = c·(b^{k²} + … + b^{1})` and
//! `ϖ_n = weight_base^{n − a_{k−1}}` on each block.
//!
//! With the literal `a_k` every block end is a multiple of `b`, so the
//! block-boundary property fails at `p = 1`; see [`Bg::boundary_check`].
//! [`BgVariant::UnitOffset`] adds `c·b^0` to every `a_k`, `k ≥ 1`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{
    block_ends, block_nu, block_nu_u64, ends_u64, exponent_weights, in_block_heads, pow, pow_u64,
    span_set, ConstructionError, NuOracle, Params, SpanFn,
};
use crate::index_sets::{merge_union, IndexSet, SetOracle};
use crate::shift_ops::WeightSequence;

/// Block ends are tabulated until they exceed this many bits.
const END_BITS: u64 = 2048;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BgVariant {
    #[default]
    Literal,
    UnitOffset,
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
pub struct Bg {
    pub params: Params,
    pub variant: BgVariant,
    ends: Ends,
}

impl std::fmt::Debug for Bg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bg").field("params", &self.params).field("variant", &self.variant).finish()
    }
}

impl Bg {
    /// The construction without any of its arithmetic prechecks.
    pub fn unchecked(params: Params, variant: BgVariant) -> Result<Self, ConstructionError> {
        params.validate()?;
        let mut exps = Vec::new();
        let mut k = 1u64;
        loop {
            exps.push(k * k);
            if (k * k) as f64 * (params.b as f64).log2() > END_BITS as f64 {
                break;
            }
            k += 1;
        }
        let big = block_ends(&params, &exps, variant == BgVariant::UnitOffset);
        let small = ends_u64(&big);
        Ok(Bg { params, variant, ends: Ends { big: Arc::new(big), small: Arc::new(small) } })
    }

    /// Rejects the construction unless the block-boundary, offset and series
    /// budget properties hold for `p ≤ p_max` and every block meeting
    /// `[0, horizon]`.
    pub fn new(
        params: Params,
        variant: BgVariant,
        p_max: u64,
        horizon: u64,
    ) -> Result<Self, ConstructionError> {
        let bg = Self::unchecked(params, variant)?;
        bg.precheck(p_max, horizon)?;
        Ok(bg)
    }

    pub fn precheck(&self, p_max: u64, horizon: u64) -> Result<(), ConstructionError> {
        self.offset_bound_check(p_max)?;
        self.boundary_check(p_max, self.blocks_meeting(horizon))?;
        self.series_budget_check(p_max + 1)
    }

    /// Number of blocks `[a_{k−1}, a_k)` meeting `[0, horizon]`.
    pub fn blocks_meeting(&self, horizon: u64) -> u64 {
        let h = BigUint::from(horizon);
        self.ends.big.iter().skip(1).take_while(|a| **a <= h).count() as u64 + 1
    }

    fn b(&self) -> u32 {
        self.params.b
    }

    /// `a_k`.
    pub fn block_end(&self, k: u64) -> &BigUint {
        &self.ends.big[k as usize]
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
        let tag = match self.variant {
            BgVariant::Literal => "",
            BgVariant::UnitOffset => ",unit-offset",
        };
        exponent_weights(
            format!("bg(b={},wb={},c={}{tag})", self.b(), self.params.weight_base, self.params.c),
            self.params.weight_base,
            self.ends.clone(),
        )
    }

    /// For `p ≤ p_max`, `k ≤ k_max` and every multiple `l·b^{p²}` in
    /// `[a_{k−1}, a_k)`: `a_{k−1} + p ≤ l·b^{p²}` and `l·b^{p²} + p < a_k`.
    /// Only the extreme multiples of each block need checking.
    pub fn boundary_check(&self, p_max: u64, k_max: u64) -> Result<(), ConstructionError> {
        for p in 1..=p_max {
            let bp = pow(self.b(), p * p);
            for k in 1..=k_max {
                let lo = &self.ends.big[k as usize - 1];
                let hi = &self.ends.big[k as usize];
                let l_min = Integer::div_ceil(lo, &bp).max(BigUint::from(1u32));
                let l_max = (hi - 1u32) / &bp;
                if l_min > l_max {
                    continue;
                }
                if lo + p > &l_min * &bp {
                    return Err(ConstructionError::BlockBoundary { l: l_min, p, k });
                }
                if &l_max * &bp + p >= *hi {
                    return Err(ConstructionError::BlockBoundary { l: l_max, p, k });
                }
            }
        }
        Ok(())
    }

    /// `p ≤ b^{(p−1)²}`.
    pub fn offset_bound_check(&self, p_max: u64) -> Result<(), ConstructionError> {
        match (1..=p_max).find(|&p| BigUint::from(p) > pow(self.b(), (p - 1) * (p - 1))) {
            Some(p) => Err(ConstructionError::OffsetBound(p)),
            None => Ok(()),
        }
    }

    /// `(b−1)·a_{q−1} ≤ c·b²·b^{q²−2q}` for `2 ≤ q ≤ q_max`.
    pub fn series_budget_check(&self, q_max: u64) -> Result<(), ConstructionError> {
        let b = self.b();
        for q in 2..=q_max {
            let lhs = self.block_end(q - 1) * (b - 1);
            let rhs = pow(b, q * q - 2 * q + 2) * self.params.c;
            if lhs > rhs {
                return Err(ConstructionError::SeriesBudget(q));
            }
        }
        Ok(())
    }

    /// `C_p = {l·b^{p²} : l ≥ 1}`.
    pub fn c_set(&self, p: u64) -> IndexSet {
        IndexSet::multiples(pow(self.b(), p * p), 1).with_label(format!("C_{p}"))
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

    /// Lowest element of `Y_q`: `b^{q²} − a_{q−1} − q + 1`.
    fn y_floor(&self, q: u64) -> BigUint {
        let top = pow(self.b(), q * q) + 1u32;
        let cut = self.block_end(q - 1) + q;
        if top > cut {
            top - cut
        } else {
            BigUint::zero()
        }
    }

    /// `Y_q` for `q ≥ 2`, reduced to the offsets `a_0, …, a_{q−1}`.
    pub fn y_set(&self, q: u64) -> IndexSet {
        assert!(q >= 2, "Y_q is defined for q >= 2");
        let b = self.b();
        let offsets: Vec<BigUint> = self.ends.big[..q as usize].to_vec();
        let small: Vec<Option<u64>> = offsets.iter().map(|a| a.to_u64()).collect();
        let modulus = pow(b, q * q);
        let spans: SpanFn = Arc::new(move |l, horizon| {
            let Some(bq) = pow_u64(b, q * q).and_then(|v| v.checked_mul(l)) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            let (c, q) = (bq as i128, q as i128);
            for a in small.iter().flatten() {
                let a = *a as i128;
                for (s, e) in [(c + a - q, c + a + q - 1), (c - a - q + 1, c - a + q)] {
                    if e >= 0 && s <= horizon as i128 {
                        out.push((s.max(0) as u64, e.min(u64::MAX as i128) as u64));
                    }
                }
            }
            out
        });
        let floor_for = {
            let offsets = offsets.clone();
            let modulus = modulus.clone();
            move |l: u64| {
                let top = &modulus * l + 1u32;
                let cut = &offsets[offsets.len() - 1] + q;
                if top > cut {
                    top - cut
                } else {
                    BigUint::zero()
                }
            }
        };
        span_set(
            format!("Y_{q}"),
            1..u64::MAX,
            spans,
            floor_for,
            0,
            move |n| y_member(n, q, &modulus, &offsets),
        )
    }

    /// `⋃_{q > p} Y_q`.
    pub fn y_union(&self, p: u64) -> IndexSet {
        IndexSet::from_oracle(format!("Y_(>{p})"), YUnion { bg: self.clone(), p })
    }

    /// `A_p = C_p \ (X ∪ ⋃_{q>p} Y_q)`.
    pub fn a_set(&self, p: u64) -> IndexSet {
        self.c_set(p)
            .difference(&self.x_set())
            .difference(&self.y_union(p))
            .with_label(format!("A_{p}"))
    }
}

fn y_member(n: &BigUint, q: u64, modulus: &BigUint, offsets: &[BigUint]) -> bool {
    let width = BigUint::from(2 * q);
    let hit = |t: &BigUint| t >= modulus && (t % modulus) < width;
    offsets.iter().any(|a| {
        let plus = n + q;
        (plus >= *a && hit(&(plus - a))) || hit(&(n + a + q - 1u32))
    })
}

struct YUnion {
    bg: Bg,
    p: u64,
}

impl YUnion {
    fn relevant(&self, n: &BigUint) -> impl Iterator<Item = u64> + '_ {
        let n = n.clone();
        (self.p + 1..).take_while(move |&q| self.bg.y_floor(q) <= n)
    }
}

impl SetOracle for YUnion {
    fn contains(&self, n: &BigUint) -> bool {
        self.relevant(n).any(|q| self.bg.y_set(q).contains(n))
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        self.relevant(&BigUint::from(horizon))
            .fold(Vec::new(), |acc, q| merge_union(&acc, &self.bg.y_set(q).enumerate_up_to(horizon)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn desk(v: BgVariant) -> Bg {
        Bg::unchecked(Params::desk(), v).unwrap()
    }

    #[test]
    fn classic_first_block() {
        let bg = Bg::unchecked(Params::classic(), BgVariant::Literal).unwrap();
        assert_eq!(bg.block_end(1), &BigUint::from(50u32));
        let w = bg.weights();
        for n in 0..50 {
            assert_eq!(w.varpi(n), Scalar::pow2(n as i64));
        }
        assert_eq!(w.varpi(50), Scalar::one());
        for k in 0..=3 {
            assert_eq!(bg.weights().varpi_big(bg.block_end(k)), Scalar::one());
        }
        assert_eq!(w.sup_bound_violation(5000), None);
    }

    #[test]
    fn boundary_property_at_classic_p1() {
        // l = 3, p = 1, k = 1: 0 + 1 ≤ 30 and 31 < 50.
        let bg = Bg::unchecked(Params::classic(), BgVariant::Literal).unwrap();
        let (lo, hi) = (bg.block_end(0).clone(), bg.block_end(1).clone());
        assert!(lo < BigUint::from(30u32) && BigUint::from(31u32) < hi);
        // l = 5 lands on a_1 = 50 itself, which starts block k = 2.
        assert_eq!(
            bg.boundary_check(1, 2),
            Err(ConstructionError::BlockBoundary { l: 5u32.into(), p: 1, k: 2 })
        );
    }

    #[test]
    fn desk_ends() {
        let lit = desk(BgVariant::Literal);
        assert_eq!(lit.block_end(1), &BigUint::from(15u32));
        assert_eq!(lit.block_end(2), &BigUint::from(420u32));
        assert_eq!(lit.block_end(3), &BigUint::from(98835u32));
        let unit = desk(BgVariant::UnitOffset);
        assert_eq!(unit.block_end(1), &BigUint::from(20u32));
        assert_eq!(unit.block_end(2), &BigUint::from(425u32));
        assert_eq!(unit.block_end(3), &BigUint::from(98840u32));
    }

    #[test]
    fn desk_prechecks() {
        assert_eq!(
            Bg::new(Params::desk(), BgVariant::Literal, 2, 10_000).unwrap_err(),
            ConstructionError::BlockBoundary { l: 5u32.into(), p: 1, k: 2 }
        );
        assert!(Bg::new(Params::desk(), BgVariant::UnitOffset, 2, 1_000_000).is_ok());
        assert_eq!(
            desk(BgVariant::UnitOffset).offset_bound_check(10),
            Ok(())
        );
        let b2 = Bg::unchecked(Params { b: 2, ..Params::desk() }, BgVariant::Literal).unwrap();
        assert_eq!(b2.offset_bound_check(3), Ok(()));
        assert_eq!(b2.series_budget_check(6), Ok(()));
    }

    #[test]
    fn y2_residues_desk() {
        let y = desk(BgVariant::Literal).y_set(2);
        let v = y.enumerate_up_to(170);
        let want: Vec<u64> = vec![
            65, 66, 67, 68, 79, 80, 81, 82, 83, 94, 95, 96, 97, 146, 147, 148, 149, 160, 161,
            162, 163, 164,
        ];
        assert_eq!(v, want);
        let all = y.enumerate_up_to(2000);
        for n in 0..2000u64 {
            assert_eq!(y.contains_u64(n), all.binary_search(&n).is_ok(), "n={n}");
        }
    }

    #[test]
    fn sets_are_disjoint_and_c_in_y() {
        let bg = desk(BgVariant::UnitOffset);
        let a1 = bg.a_set(1).enumerate_up_to(20_000);
        let a2 = bg.a_set(2).enumerate_up_to(20_000);
        assert!(a1.iter().all(|x| a2.binary_search(x).is_err()));
        let y2 = bg.y_set(2);
        assert!(bg.c_set(2).enumerate_up_to(20_000).iter().all(|&x| y2.contains_u64(x)));
        assert!(bg.x_set().contains_u64(0));
        assert!(bg.x_set().contains_u64(21));
        assert!(!bg.x_set().contains_u64(22));
    }
}
