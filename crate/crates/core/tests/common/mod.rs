//! Brute-force reference sets and randomized algebraic checks shared by the
//! integration tests. Every reference set is built by marking intervals
//! straight from the defining formulas, without the library's oracles.

#![allow(dead_code)]

use hyplab_core::densities::{
    banach_density_at, count, matrix_density_profile, natural_density_profile, Cesaro, Mode,
    Value,
};
use hyplab_core::shift_ops::{
    backward_apply, conjugate_to_unweighted, forward_apply, forward_apply_weighted,
};
use hyplab_core::{IndexSet, Scalar, Space, TruncatedVector, WeightSequence};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_2024;

/// A reference set as a membership table on `[0, horizon]`.
pub struct Marked {
    pub name: String,
    pub bits: Vec<bool>,
}

impl Marked {
    pub fn new(name: impl Into<String>, horizon: u64) -> Self {
        Marked { name: name.into(), bits: vec![false; horizon as usize + 1] }
    }

    pub fn horizon(&self) -> u64 {
        self.bits.len() as u64 - 1
    }

    /// Marks `[s, e] ∩ [0, horizon]` given as signed ends.
    pub fn mark(&mut self, s: i128, e: i128) {
        let h = self.horizon() as i128;
        for n in s.max(0)..=e.min(h) {
            self.bits[n as usize] = true;
        }
    }

    pub fn from_fn(name: impl Into<String>, horizon: u64, f: impl Fn(u64) -> bool) -> Self {
        Marked { name: name.into(), bits: (0..=horizon).map(f).collect() }
    }

    pub fn get(&self, n: u64) -> bool {
        self.bits[n as usize]
    }

    pub fn elements(&self) -> Vec<u64> {
        (0..=self.horizon()).filter(|&n| self.get(n)).collect()
    }

    pub fn minus(&self, other: &Marked, name: &str) -> Marked {
        Marked::from_fn(name, self.horizon(), |n| self.get(n) && !other.get(n))
    }

    pub fn or(&self, other: &Marked, name: &str) -> Marked {
        Marked::from_fn(name, self.horizon(), |n| self.get(n) || other.get(n))
    }
}

/// First disagreement between the oracle and the reference, by membership
/// query and by enumeration.
pub fn disagreement(set: &IndexSet, reference: &Marked) -> Option<String> {
    let h = reference.horizon();
    if let Some(n) = (0..=h).find(|&n| set.contains_u64(n) != reference.get(n)) {
        return Some(format!("{}: membership differs at {n}", reference.name));
    }
    if set.enumerate_up_to(h) != reference.elements() {
        return Some(format!("{}: enumeration differs", reference.name));
    }
    None
}

fn ipow(b: u64, e: u64) -> i128 {
    (b as i128).pow(e as u32)
}

/// Exponent table `ν` and the covered set for the plain interval family
/// `[l·b^j − j, l·b^j + j]`, with the first interval of square `j` widened
/// to `[b^j − b^{j−1}, b^j + b^{j−1}]` when `widen` is set.
pub fn interval_exponents(b: u64, horizon: u64, widen: bool) -> (Vec<Option<u64>>, Marked) {
    let mut nu: Vec<Option<u64>> = vec![None; horizon as usize + 1];
    let mut covered = Marked::new(if widen { "S'" } else { "S" }, horizon);
    let h = horizon as i128;
    let mut j = 1u64;
    loop {
        let bj = ipow(b, j);
        let square = widen && ((j as f64).sqrt().round() as u64).pow(2) == j;
        let first = if square { bj - bj / b as i128 } else { bj - j as i128 };
        if first > h {
            break;
        }
        let mut l = 1i128;
        loop {
            let (s, e) = if square && l == 1 {
                (bj - bj / b as i128, bj + bj / b as i128)
            } else {
                (l * bj - j as i128, l * bj + j as i128)
            };
            if s > h {
                break;
            }
            covered.mark(s, e);
            for n in s.max(0)..=e.min(h) {
                let off = (n - s) as u64;
                let slot = &mut nu[n as usize];
                *slot = Some(slot.map_or(off, |v| v.max(off)));
            }
            l += 1;
        }
        j += 1;
    }
    (nu, covered)
}

pub fn level_from(nu: &[Option<u64>], j: u64, name: &str) -> Marked {
    Marked::from_fn(name, nu.len() as u64 - 1, |n| n >= 1 && nu[n as usize].unwrap_or(0) >= j)
}

/// `{b^{j_m} + l·b^k : l ≤ m}` with `j_m = m·b^k`.
pub fn bmpp_hitting(b: u64, k: u64, horizon: u64) -> Marked {
    let mut out = Marked::new(format!("A(k={k})"), horizon);
    let bk = ipow(b, k);
    let mut m = 1i128;
    while (m * bk) as f64 * (b as f64).log2() < 126.0 && ipow(b, (m * bk) as u64) <= horizon as i128 {
        let base = ipow(b, (m * bk) as u64);
        for l in 0..=m {
            let v = base + l * bk;
            out.mark(v, v);
        }
        m += 1;
    }
    out
}

/// `{b^{q²} + l·b^k : l ≤ b^{q²−1−k}, q > k}`.
pub fn br_hitting(b: u64, k: u64, horizon: u64) -> Marked {
    let mut out = Marked::new(format!("A'(k={k})"), horizon);
    let mut q = k + 1;
    while ipow(b, q * q) <= horizon as i128 {
        let base = ipow(b, q * q);
        for l in 0..=ipow(b, q * q - 1 - k) {
            let v = base + l * ipow(b, k);
            out.mark(v, v);
        }
        q += 1;
    }
    out
}

/// `⋃_q [b^{q²} − b^{q²−1}, b^{q²} + b^{q²−1}]`.
pub fn br_square_region(b: u64, horizon: u64) -> Marked {
    let mut out = Marked::new("R", horizon);
    let mut q = 1u64;
    while ipow(b, q * q) - ipow(b, q * q - 1) <= horizon as i128 {
        let c = ipow(b, q * q);
        let r = ipow(b, q * q - 1);
        out.mark(c - r, c + r);
        q += 1;
    }
    out
}

/// `a_0 = 0`, `a_k = c·Σ_{i≤k} b^{e_i}` (plus `c` when `unit`).
pub fn ends(b: u64, c: u64, exps: &[u64], unit: bool) -> Vec<i128> {
    let mut out = vec![0i128];
    let mut acc = if unit { c as i128 } else { 0 };
    for &e in exps {
        acc += c as i128 * ipow(b, e);
        out.push(acc);
    }
    out
}

pub fn multiples(step: i128, horizon: u64, name: &str) -> Marked {
    Marked::from_fn(name, horizon, |n| n > 0 && n as i128 % step == 0)
}

pub fn heads(a: &[i128], horizon: u64) -> Marked {
    let mut out = Marked::new("X", horizon);
    for (k, &ak) in a.iter().enumerate() {
        out.mark(ak, ak + k as i128);
    }
    out
}

/// Frequently hypercyclic block construction at base `b`.
pub struct BgRef {
    pub a: Vec<i128>,
    pub b: u64,
    pub horizon: u64,
}

impl BgRef {
    pub fn new(b: u64, c: u64, unit: bool, horizon: u64) -> Self {
        let exps: Vec<u64> = (1..=6).map(|k| k * k).collect();
        BgRef { a: ends(b, c, &exps, unit), b, horizon }
    }

    pub fn c(&self, p: u64) -> Marked {
        multiples(ipow(self.b, p * p), self.horizon, &format!("C_{p}"))
    }

    pub fn x(&self) -> Marked {
        heads(&self.a, self.horizon)
    }

    /// `⋃_{l≥1} ⋃_{k<q} [lB + a_k − q, lB + a_k + q − 1] ∪ [lB − a_k − q + 1, lB − a_k + q]`.
    pub fn y(&self, q: u64) -> Marked {
        let mut out = Marked::new(format!("Y_{q}"), self.horizon);
        let big = ipow(self.b, q * q);
        let qi = q as i128;
        let mut l = 1i128;
        while l * big - self.a[q as usize - 1] - qi <= self.horizon as i128 {
            for &ak in &self.a[..q as usize] {
                out.mark(l * big + ak - qi, l * big + ak + qi - 1);
                out.mark(l * big - ak - qi + 1, l * big - ak + qi);
            }
            l += 1;
        }
        out
    }

    pub fn y_above(&self, p: u64) -> Marked {
        let mut out = Marked::new(format!("Y_>{p}"), self.horizon);
        for q in p + 1..=5 {
            out = out.or(&self.y(q), &out.name.clone());
        }
        out
    }

    pub fn a_set(&self, p: u64) -> Marked {
        self.c(p).minus(&self.x(), "").minus(&self.y_above(p), &format!("A_{p}"))
    }
}

/// Very frequently hypercyclic construction with exponent schedule `m`.
pub struct VfhcRef {
    pub a: Vec<i128>,
    pub m: Vec<u64>,
    pub h: Vec<i128>,
    pub b: u64,
    pub horizon: u64,
}

impl VfhcRef {
    pub fn new(b: u64, c: u64, m: &[u64], horizon: u64) -> Self {
        let a = ends(b, c, m, false);
        // h_q = d_q + a_{q−1} + q with h_q ≡ h_{q−1} (mod b^{m_{q−1}}).
        let mut h = vec![0i128; m.len() + 1];
        h[2] = a[1] + 2;
        for q in 3..=m.len() {
            let modulus = ipow(b, m[q - 2]);
            let d = (h[q - 1] - a[q - 1] - q as i128).rem_euclid(modulus);
            h[q] = d + a[q - 1] + q as i128;
        }
        VfhcRef { a, m: m.to_vec(), h, b, horizon }
    }

    pub fn c(&self, p: u64) -> Marked {
        multiples(ipow(self.b, self.m[p as usize - 1]), self.horizon, &format!("C_{p}"))
    }

    pub fn x(&self) -> Marked {
        heads(&self.a, self.horizon)
    }

    pub fn y(&self, q: u64) -> Marked {
        let mut out = Marked::new(format!("Y_{q}"), self.horizon);
        let big = ipow(self.b, self.m[q as usize - 1]);
        let h = self.h[q as usize];
        let mut l = 1i128;
        while l * big - h <= self.horizon as i128 {
            out.mark(l * big - h, l * big + h);
            l += 1;
        }
        out
    }

    pub fn y_above(&self, p: u64) -> Marked {
        let mut out = Marked::new(format!("Y_>{p}"), self.horizon);
        for q in p as usize + 1..=self.m.len() {
            if ipow(self.b, self.m[q - 1]) - self.h[q] <= self.horizon as i128 {
                out = out.or(&self.y(q as u64), "");
            }
        }
        out
    }

    pub fn b_set(&self, p: u64) -> Marked {
        self.c(p).minus(&self.y_above(p), &format!("B_{p}"))
    }

    pub fn a_set(&self, p: u64) -> Marked {
        self.b_set(p).minus(&self.x(), &format!("A_{p}"))
    }
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

fn ratio(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Scalar {
    let n = rng.gen_range(lo..=hi);
    let d = rng.gen_range(1..=7);
    Scalar::from_fraction(BigInt::from(n), BigInt::from(d), 0)
}

fn nonzero(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let s = ratio(rng, -9, 9);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn random_weights(rng: &mut ChaCha8Rng) -> WeightSequence {
    let ws: Vec<Scalar> = (0..=80).map(|_| nonzero(rng)).collect();
    WeightSequence::from_weights("random", move |k| ws[k as usize].clone(), 80, None)
}

pub fn random_vector(rng: &mut ChaCha8Rng, space: Space) -> TruncatedVector {
    let len = rng.gen_range(0..12);
    let entries: Vec<(u64, Scalar)> = (0..len).map(|_| (rng.gen_range(0..40), ratio(rng, -20, 20))).collect();
    TruncatedVector::from_entries(space, entries)
}

pub fn random_set(rng: &mut ChaCha8Rng, horizon: u64) -> IndexSet {
    let p = rng.gen_range(1..=9) as f64 / 10.0;
    let elems: Vec<u64> = (0..=horizon).filter(|_| rng.gen_bool(p)).collect();
    IndexSet::finite("random", elems)
}

/// `(name, cases, failure)` per algebraic law.
pub fn property_suites(cases: usize) -> Vec<(&'static str, usize, Option<String>)> {
    let mut rng = rng();
    let mut out = Vec::new();
    let spaces = [Space::C0, Space::Lp(1), Space::Lp(2)];

    let mut fail = None;
    for i in 0..cases {
        let w = random_weights(&mut rng);
        let x = random_vector(&mut rng, spaces[i % 3]);
        let (a, b) = (rng.gen_range(0..10), rng.gen_range(0..10));
        let lhs = backward_apply(&w, &backward_apply(&w, &x, b), a);
        if lhs != backward_apply(&w, &x, a + b) {
            fail.get_or_insert(format!("case {i}: a={a}, b={b}"));
        }
    }
    out.push(("shift semigroup law", cases, fail));

    let mut fail = None;
    for i in 0..cases {
        let w = random_weights(&mut rng);
        let x = random_vector(&mut rng, spaces[i % 3]);
        let n = rng.gen_range(1..6);
        let unweighted = WeightSequence::unweighted();
        let lhs = backward_apply(&w, &conjugate_to_unweighted(&w, &x).unwrap(), n);
        let rhs = conjugate_to_unweighted(&w, &backward_apply(&unweighted, &x, n)).unwrap();
        if lhs != rhs {
            fail.get_or_insert(format!("case {i}: n={n}"));
        }
    }
    out.push(("conjugacy square", cases, fail));

    let mut fail = None;
    for i in 0..cases {
        let w = random_weights(&mut rng);
        let y = random_vector(&mut rng, spaces[i % 3]);
        let n = rng.gen_range(0..30);
        let weighted = backward_apply(&w, &forward_apply_weighted(&w, &y, n), n) == y;
        let unweighted = backward_apply(&WeightSequence::unweighted(), &forward_apply(&y, n), n) == y;
        if !(weighted && unweighted) {
            fail.get_or_insert(format!("case {i}: n={n}"));
        }
    }
    out.push(("forward right-inverse law", cases, fail));

    let mut fail = None;
    for i in 0..cases {
        let a = random_set(&mut rng, 400);
        let mut hs: Vec<u64> = (0..4).map(|_| rng.gen_range(0..400)).collect();
        hs.sort_unstable();
        hs.dedup();
        let nat = natural_density_profile(&a, &hs, Mode::Upper).unwrap();
        let ces = matrix_density_profile(&a, &Cesaro, &hs).unwrap();
        if nat.values != ces.values {
            fail.get_or_insert(format!("case {i}: horizons {hs:?}"));
        }
    }
    out.push(("Cesaro reduction", cases, fail));

    let mut fail = None;
    for i in 0..cases {
        let a = random_set(&mut rng, 600);
        let n = rng.gen_range(0..200);
        let m_max = rng.gen_range(0..400);
        let banach = banach_density_at(&a, n, m_max);
        let natural = BigRational::new(count(&a, n).into(), (n + 1).into());
        if banach < natural || Value::Exact(banach) > Value::ratio(1, 1) {
            fail.get_or_insert(format!("case {i}: n={n}, m_max={m_max}"));
        }
    }
    out.push(("Banach dominates natural", cases, fail));
    out
}
