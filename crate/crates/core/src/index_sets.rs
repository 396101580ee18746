//! Subsets of ℕ₀ as membership oracles with bounded enumeration.
//!
//! Membership takes arbitrary-precision indices; enumeration runs to a
//! machine-range horizon. Every set is an immutable, cheaply clonable value
//! and every combinator returns a new set.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexSetError {
    #[error("interval family {0:?} declares no lower bound on interval starts")]
    MissingStartBound(String),
    #[error("restrict bounds out of order: lo={lo} > hi={hi}")]
    BadBounds { lo: u64, hi: u64 },
}

/// Backing implementation of an [`IndexSet`].
///
/// Implementors must be pure: `contains` and `enumerate` may be called from
/// several threads at once and must always agree.
pub trait SetOracle: Send + Sync {
    fn contains(&self, n: &BigUint) -> bool;

    fn contains_u64(&self, n: u64) -> bool {
        self.contains(&BigUint::from(n))
    }

    /// Elements `≤ horizon` in increasing order. Defaults to a linear scan.
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        (0..=horizon).filter(|&n| self.contains_u64(n)).collect()
    }
}

#[derive(Clone)]
pub struct IndexSet {
    oracle: Arc<dyn SetOracle>,
    label: Arc<str>,
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexSet").field("label", &self.label).finish()
    }
}

impl IndexSet {
    pub fn from_oracle(label: impl Into<String>, oracle: impl SetOracle + 'static) -> Self {
        IndexSet { oracle: Arc::new(oracle), label: label.into().into() }
    }

    pub fn from_predicate<F>(label: impl Into<String>, pred: F) -> Self
    where
        F: Fn(&BigUint) -> bool + Send + Sync + 'static,
    {
        Self::from_oracle(label, Predicate(pred))
    }

    pub fn empty() -> Self {
        Self::finite("{}", std::iter::empty())
    }

    pub fn naturals() -> Self {
        Self::from_oracle("N0", Range { lo: 0, hi: None })
    }

    /// `[lo, hi]`, or `[lo, ∞)` when `hi` is `None`.
    pub fn range(lo: u64, hi: Option<u64>) -> Self {
        let label = match hi {
            Some(h) => format!("[{lo},{h}]"),
            None => format!("[{lo},inf)"),
        };
        Self::from_oracle(label, Range { lo, hi })
    }

    pub fn finite(label: impl Into<String>, elems: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::from_oracle(label, Finite(v))
    }

    /// `{l·step : l ≥ min_multiplier}`.
    pub fn multiples(step: BigUint, min_multiplier: u64) -> Self {
        assert!(!step.is_zero(), "multiples of zero");
        let label = if min_multiplier == 0 {
            format!("{step}N0")
        } else {
            format!("{{l*{step} : l>={min_multiplier}}}")
        };
        Self::from_oracle(label, Multiples { step, min_multiplier })
    }

    pub fn from_intervals(family: IntervalFamily) -> Result<Self, IndexSetError> {
        if family.start_lower_bound.is_none() {
            return Err(IndexSetError::MissingStartBound(family.label.clone()));
        }
        let label = family.label.clone();
        Ok(Self::from_oracle(label, Intervals(family)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        IndexSet { oracle: Arc::clone(&self.oracle), label: label.into().into() }
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        self.oracle.contains(n)
    }

    pub fn contains_u64(&self, n: u64) -> bool {
        self.oracle.contains_u64(n)
    }

    pub fn enumerate_up_to(&self, horizon: u64) -> Vec<u64> {
        self.oracle.enumerate(horizon)
    }

    /// `card(A ∩ [0, horizon])`.
    pub fn count_up_to(&self, horizon: u64) -> u64 {
        self.enumerate_up_to(horizon).len() as u64
    }

    /// `A − n = {k : k + n ∈ A}`.
    pub fn shift_left(&self, n: u64) -> Self {
        if n == 0 {
            return self.clone();
        }
        Self::from_oracle(format!("({})-{n}", self.label), ShiftLeft { inner: self.clone(), n })
    }

    /// `A ∩ [n+1, ∞)`.
    pub fn tail(&self, n: u64) -> Self {
        let label = format!("{}\\[0,{n}]", self.label);
        match n.checked_add(1) {
            Some(lo) => Self::from_oracle(label, Window { inner: self.clone(), lo, hi: None }),
            None => {
                let inner = self.clone();
                Self::from_predicate(label, move |k| {
                    k > &BigUint::from(u64::MAX) && inner.contains(k)
                })
            }
        }
    }

    pub fn restrict(&self, lo: u64, hi: u64) -> Result<Self, IndexSetError> {
        if lo > hi {
            return Err(IndexSetError::BadBounds { lo, hi });
        }
        Ok(Self::from_oracle(
            format!("{}∩[{lo},{hi}]", self.label),
            Window { inner: self.clone(), lo, hi: Some(hi) },
        ))
    }

    pub fn union(&self, other: &IndexSet) -> Self {
        Self::union_all(format!("{}∪{}", self.label, other.label), vec![self.clone(), other.clone()])
    }

    pub fn union_all(label: impl Into<String>, parts: Vec<IndexSet>) -> Self {
        Self::from_oracle(label, Union(parts))
    }

    pub fn intersection(&self, other: &IndexSet) -> Self {
        Self::from_oracle(
            format!("{}∩{}", self.label, other.label),
            Intersection(self.clone(), other.clone()),
        )
    }

    pub fn difference(&self, other: &IndexSet) -> Self {
        Self::from_oracle(
            format!("{}\\{}", self.label, other.label),
            Difference(self.clone(), other.clone()),
        )
    }

    /// `⋃_{n=0}^{depth} (A − n)`: the points `k` with `A ∩ [k, k+depth] ≠ ∅`.
    pub fn union_of_shifts(&self, depth: u64) -> Self {
        Self::from_oracle(
            format!("U_(n<={depth})({}-n)", self.label),
            ShiftUnion { inner: self.clone(), depth },
        )
    }

    /// One element per line.
    pub fn write_lines<W: Write>(&self, horizon: u64, mut out: W) -> io::Result<()> {
        for n in self.enumerate_up_to(horizon) {
            writeln!(out, "{n}")?;
        }
        Ok(())
    }

    /// CSV with a single column `n`.
    pub fn write_csv<W: Write>(&self, horizon: u64, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n"])?;
        for n in self.enumerate_up_to(horizon) {
            w.write_record([n.to_string()])?;
        }
        w.flush()
    }
}

/// Inclusive interval `[start, end]` of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub start: BigUint,
    pub end: BigUint,
}

impl Interval {
    pub fn new(start: impl Into<BigUint>, end: impl Into<BigUint>) -> Self {
        let (start, end) = (start.into(), end.into());
        assert!(start <= end, "interval start exceeds end");
        Interval { start, end }
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        &self.start <= n && n <= &self.end
    }

    /// Clipped to `[0, horizon]`, if nonempty.
    pub fn clip(&self, horizon: u64) -> Option<(u64, u64)> {
        let s = self.start.to_u64()?;
        if s > horizon {
            return None;
        }
        let e = self.end.to_u64().map_or(horizon, |e| e.min(horizon));
        Some((s, e))
    }
}

type GenerationFn = dyn Fn(u64, u64) -> Vec<Interval> + Send + Sync;
type BoundFn = dyn Fn(u64) -> BigUint + Send + Sync;
type MemberFn = dyn Fn(&BigUint) -> bool + Send + Sync;

/// A countable union of intervals, organised in generations.
///
/// `generation(g, horizon)` yields the (finitely many) intervals of
/// generation `g` whose start is at most `horizon`. Bounded enumeration needs
/// a nondecreasing lower bound on the starts of every generation `≥ g`.
#[derive(Clone)]
pub struct IntervalFamily {
    label: String,
    generations: std::ops::Range<u64>,
    generation: Arc<GenerationFn>,
    start_lower_bound: Option<Arc<BoundFn>>,
    membership: Option<Arc<MemberFn>>,
}

impl IntervalFamily {
    pub fn new<F>(label: impl Into<String>, generation: F) -> Self
    where
        F: Fn(u64, u64) -> Vec<Interval> + Send + Sync + 'static,
    {
        IntervalFamily {
            label: label.into(),
            generations: 0..u64::MAX,
            generation: Arc::new(generation),
            start_lower_bound: None,
            membership: None,
        }
    }

    pub fn empty() -> Self {
        IntervalFamily::new("{}", |_, _| Vec::new())
            .with_generations(0..0)
            .with_start_lower_bound(|_| BigUint::zero())
            .with_membership(|_| false)
    }

    pub fn with_generations(mut self, g: std::ops::Range<u64>) -> Self {
        self.generations = g;
        self
    }

    pub fn with_start_lower_bound<F>(mut self, f: F) -> Self
    where
        F: Fn(u64) -> BigUint + Send + Sync + 'static,
    {
        self.start_lower_bound = Some(Arc::new(f));
        self
    }

    /// Closed-form membership; without it, membership scans the generations
    /// that can reach the query.
    pub fn with_membership<F>(mut self, f: F) -> Self
    where
        F: Fn(&BigUint) -> bool + Send + Sync + 'static,
    {
        self.membership = Some(Arc::new(f));
        self
    }

    /// All intervals with start `≤ horizon`, in generation order.
    pub fn intervals_up_to(&self, horizon: u64) -> Vec<Interval> {
        let bound = self.start_lower_bound.as_ref().expect("checked at construction");
        let h = BigUint::from(horizon);
        let mut out = Vec::new();
        for g in self.generations.clone() {
            if bound(g) > h {
                break;
            }
            out.extend((self.generation)(g, horizon).into_iter().filter(|iv| iv.start <= h));
        }
        out
    }
}

struct Predicate<F>(F);

impl<F: Fn(&BigUint) -> bool + Send + Sync> SetOracle for Predicate<F> {
    fn contains(&self, n: &BigUint) -> bool {
        (self.0)(n)
    }
}

struct Range {
    lo: u64,
    hi: Option<u64>,
}

impl SetOracle for Range {
    fn contains(&self, n: &BigUint) -> bool {
        match n.to_u64() {
            Some(v) => self.contains_u64(v),
            None => self.hi.is_none(),
        }
    }
    fn contains_u64(&self, n: u64) -> bool {
        n >= self.lo && self.hi.map_or(true, |h| n <= h)
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let hi = self.hi.map_or(horizon, |h| h.min(horizon));
        if self.lo > hi {
            return Vec::new();
        }
        (self.lo..=hi).collect()
    }
}

struct Finite(Vec<u64>);

impl SetOracle for Finite {
    fn contains(&self, n: &BigUint) -> bool {
        n.to_u64().is_some_and(|v| self.contains_u64(v))
    }
    fn contains_u64(&self, n: u64) -> bool {
        self.0.binary_search(&n).is_ok()
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let end = self.0.partition_point(|&v| v <= horizon);
        self.0[..end].to_vec()
    }
}

struct Multiples {
    step: BigUint,
    min_multiplier: u64,
}

impl SetOracle for Multiples {
    fn contains(&self, n: &BigUint) -> bool {
        let (q, r) = n.div_rem(&self.step);
        r.is_zero() && q >= BigUint::from(self.min_multiplier)
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let Some(step) = self.step.to_u64() else { return Vec::new() };
        let Some(first) = step.checked_mul(self.min_multiplier) else { return Vec::new() };
        if first > horizon {
            return Vec::new();
        }
        (first..=horizon).step_by(step as usize).collect()
    }
}

struct Intervals(IntervalFamily);

impl SetOracle for Intervals {
    fn contains(&self, n: &BigUint) -> bool {
        if let Some(f) = &self.0.membership {
            return f(n);
        }
        let bound = self.0.start_lower_bound.as_ref().unwrap();
        let horizon = n.to_u64().unwrap_or(u64::MAX);
        for g in self.0.generations.clone() {
            if &bound(g) > n {
                return false;
            }
            if (self.0.generation)(g, horizon).iter().any(|iv| iv.contains(n)) {
                return true;
            }
        }
        false
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let mut spans: Vec<(u64, u64)> =
            self.0.intervals_up_to(horizon).iter().filter_map(|iv| iv.clip(horizon)).collect();
        spans.sort_unstable();
        let mut out = Vec::new();
        let mut next = 0u64; // first value not yet emitted
        let mut started = false;
        for (s, e) in spans {
            let from = if started { s.max(next) } else { s };
            if from <= e {
                out.extend(from..=e);
                next = e.saturating_add(1);
                started = true;
            }
        }
        out
    }
}

struct ShiftLeft {
    inner: IndexSet,
    n: u64,
}

impl SetOracle for ShiftLeft {
    fn contains(&self, k: &BigUint) -> bool {
        self.inner.contains(&(k + self.n))
    }
    fn contains_u64(&self, k: u64) -> bool {
        match k.checked_add(self.n) {
            Some(v) => self.inner.contains_u64(v),
            None => self.contains(&BigUint::from(k)),
        }
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        match horizon.checked_add(self.n) {
            Some(h) => self
                .inner
                .enumerate_up_to(h)
                .into_iter()
                .filter(|&v| v >= self.n)
                .map(|v| v - self.n)
                .collect(),
            None => (0..=horizon).filter(|&k| self.contains_u64(k)).collect(),
        }
    }
}

struct Window {
    inner: IndexSet,
    lo: u64,
    hi: Option<u64>,
}

impl SetOracle for Window {
    fn contains(&self, n: &BigUint) -> bool {
        let in_range = match n.to_u64() {
            Some(v) => v >= self.lo && self.hi.map_or(true, |h| v <= h),
            None => self.hi.is_none(),
        };
        in_range && self.inner.contains(n)
    }
    fn contains_u64(&self, n: u64) -> bool {
        n >= self.lo && self.hi.map_or(true, |h| n <= h) && self.inner.contains_u64(n)
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let hi = self.hi.map_or(horizon, |h| h.min(horizon));
        if self.lo > hi {
            return Vec::new();
        }
        let v = self.inner.enumerate_up_to(hi);
        let start = v.partition_point(|&x| x < self.lo);
        v[start..].to_vec()
    }
}

struct Union(Vec<IndexSet>);

impl SetOracle for Union {
    fn contains(&self, n: &BigUint) -> bool {
        self.0.iter().any(|s| s.contains(n))
    }
    fn contains_u64(&self, n: u64) -> bool {
        self.0.iter().any(|s| s.contains_u64(n))
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        self.0
            .iter()
            .map(|s| s.enumerate_up_to(horizon))
            .fold(Vec::new(), |acc, v| merge_union(&acc, &v))
    }
}

struct Intersection(IndexSet, IndexSet);

impl SetOracle for Intersection {
    fn contains(&self, n: &BigUint) -> bool {
        self.0.contains(n) && self.1.contains(n)
    }
    fn contains_u64(&self, n: u64) -> bool {
        self.0.contains_u64(n) && self.1.contains_u64(n)
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        merge_intersection(&self.0.enumerate_up_to(horizon), &self.1.enumerate_up_to(horizon))
    }
}

struct Difference(IndexSet, IndexSet);

impl SetOracle for Difference {
    fn contains(&self, n: &BigUint) -> bool {
        self.0.contains(n) && !self.1.contains(n)
    }
    fn contains_u64(&self, n: u64) -> bool {
        self.0.contains_u64(n) && !self.1.contains_u64(n)
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        merge_difference(&self.0.enumerate_up_to(horizon), &self.1.enumerate_up_to(horizon))
    }
}

struct ShiftUnion {
    inner: IndexSet,
    depth: u64,
}

impl SetOracle for ShiftUnion {
    fn contains(&self, k: &BigUint) -> bool {
        (0..=self.depth).any(|n| self.inner.contains(&(k + n)))
    }
    fn contains_u64(&self, k: u64) -> bool {
        (0..=self.depth).any(|n| match k.checked_add(n) {
            Some(v) => self.inner.contains_u64(v),
            None => self.inner.contains(&(BigUint::from(k) + n)),
        })
    }
    fn enumerate(&self, horizon: u64) -> Vec<u64> {
        let Some(h) = horizon.checked_add(self.depth) else {
            return (0..=horizon).filter(|&k| self.contains_u64(k)).collect();
        };
        let elems = self.inner.enumerate_up_to(h);
        let mut out = Vec::new();
        let mut idx = 0;
        for k in 0..=horizon {
            while idx < elems.len() && elems[idx] < k {
                idx += 1;
            }
            if idx < elems.len() && elems[idx] - k <= self.depth {
                out.push(k);
            }
        }
        out
    }
}

pub fn merge_union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn merge_intersection(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn merge_difference(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn mod3() -> IndexSet {
        IndexSet::from_predicate("3N0", |n| (n % 3u32).is_zero())
    }

    /// Intervals `[l·b^j − j, l·b^j + j]`, `j, l ≥ 1`.
    fn s_family(b: u64) -> IntervalFamily {
        IntervalFamily::new("S", move |j, horizon| {
            let g = j + 1;
            let p = b.pow(g as u32);
            (1..)
                .map(|l| (l * p - g, l * p + g))
                .take_while(|&(s, _)| s <= horizon)
                .map(|(s, e)| Interval::new(s, e))
                .collect()
        })
        .with_generations(0..12)
        .with_start_lower_bound(move |j| {
            let g = j + 1;
            big(b.pow(g as u32) - g)
        })
    }

    #[test]
    fn predicate_examples() {
        assert_eq!(mod3().enumerate_up_to(9), vec![0, 3, 6, 9]);
        assert!(IndexSet::from_predicate("none", |_| false).enumerate_up_to(100).is_empty());
        let tail = IndexSet::from_predicate("n>=5", |n| n >= &big(5));
        assert_eq!(tail.enumerate_up_to(7), vec![5, 6, 7]);
    }

    #[test]
    fn shift_and_tail_examples() {
        let a = IndexSet::finite("A", [3, 5, 9]);
        assert_eq!(a.shift_left(3).enumerate_up_to(20), vec![0, 2, 6]);
        let m4 = IndexSet::multiples(big(4), 0);
        assert_eq!(m4.shift_left(0).enumerate_up_to(12), vec![0, 4, 8, 12]);
        assert!(IndexSet::finite("one", [1]).shift_left(2).enumerate_up_to(10).is_empty());

        let b = IndexSet::finite("B", [0, 1, 5, 9]);
        assert_eq!(b.tail(1).enumerate_up_to(20), vec![5, 9]);
        assert_eq!(IndexSet::naturals().tail(0).enumerate_up_to(3), vec![1, 2, 3]);
        assert!(IndexSet::empty().tail(10).enumerate_up_to(30).is_empty());
    }

    #[test]
    fn algebra_examples() {
        let a = IndexSet::finite("a", [1, 2, 3]);
        let b = IndexSet::finite("b", [2]);
        assert_eq!(a.difference(&b).enumerate_up_to(10), vec![1, 3]);
        assert_eq!(IndexSet::empty().union(&mod3()).enumerate_up_to(6), vec![0, 3, 6]);
        let tens = IndexSet::multiples(big(10), 0);
        assert_eq!(tens.restrict(15, 35).unwrap().enumerate_up_to(100), vec![20, 30]);
        assert!(tens.restrict(5, 4).is_err());
        assert_eq!(a.intersection(&b).enumerate_up_to(10), vec![2]);
    }

    #[test]
    fn interval_family_examples() {
        let fam = s_family(10);
        let covering = IndexSet::from_intervals(fam.clone()).unwrap();
        assert!(covering.contains_u64(10));
        assert!(!covering.contains_u64(5));
        // closed form: |n − l·10^j| ≤ j for some j, l ≥ 1
        let closed = IndexSet::from_intervals(fam.with_membership(|n| {
            let n = n.to_u64().unwrap();
            (1..12u32).any(|j| {
                let p = 10u64.pow(j);
                let l = (n + j as u64) / p;
                l >= 1 && n + j as u64 >= l * p && n <= l * p + j as u64
            })
        }))
        .unwrap();
        assert_eq!(closed.enumerate_up_to(21), vec![9, 10, 11, 19, 20, 21]);
        let empty = IndexSet::from_intervals(IntervalFamily::empty()).unwrap();
        assert!(!empty.contains_u64(0) && empty.enumerate_up_to(50).is_empty());
    }

    #[test]
    fn interval_family_requires_start_bound() {
        let fam = IntervalFamily::new("unbounded", |_, _| vec![Interval::new(0u32, 1u32)]);
        assert!(matches!(
            IndexSet::from_intervals(fam),
            Err(IndexSetError::MissingStartBound(_))
        ));
    }

    #[test]
    fn interval_membership_matches_enumeration() {
        for b in [2u64, 3, 10] {
            let set = IndexSet::from_intervals(s_family(b)).unwrap();
            let listed = set.enumerate_up_to(10_000);
            let scanned: Vec<u64> = (0..=10_000).filter(|&n| set.contains_u64(n)).collect();
            assert_eq!(listed, scanned, "base {b}");
        }
    }

    #[test]
    fn union_of_shifts() {
        let m5 = IndexSet::multiples(big(5), 0);
        assert_eq!(m5.union_of_shifts(4).enumerate_up_to(30), (0..=30).collect::<Vec<_>>());
        let m7 = IndexSet::multiples(big(7), 1);
        let u = m7.union_of_shifts(2);
        let scanned: Vec<u64> = (0..=60).filter(|&k| u.contains_u64(k)).collect();
        assert_eq!(u.enumerate_up_to(60), scanned);
    }

    #[test]
    fn big_indices_in_oracles() {
        let huge = BigUint::from(10u32).pow(40);
        let m = IndexSet::multiples(huge.clone(), 1);
        assert!(m.contains(&(&huge * 3u32)));
        assert!(!m.contains(&(&huge + 1u32)));
        assert!(m.enumerate_up_to(u64::MAX / 2).is_empty());
        assert!(IndexSet::naturals().shift_left(7).contains(&huge));
    }

    #[test]
    fn exports() {
        let mut lines = Vec::new();
        mod3().write_lines(6, &mut lines).unwrap();
        assert_eq!(String::from_utf8(lines).unwrap(), "0\n3\n6\n");
        let mut csv = Vec::new();
        mod3().write_csv(6, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "n\n0\n3\n6\n");
    }

    fn arb_set() -> impl Strategy<Value = IndexSet> {
        prop_oneof![
            prop::collection::vec(0u64..400, 0..40).prop_map(|v| IndexSet::finite("fin", v)),
            (1u64..20, 0u64..5).prop_map(|(s, m)| IndexSet::multiples(big(s), m)),
            (0u64..50, 0u64..300).prop_map(|(lo, len)| IndexSet::range(lo, Some(lo + len))),
            (2u64..9, 1u64..9).prop_map(|(m, r)| IndexSet::from_predicate("mod", move |n| {
                (n % m).to_u64().unwrap() < r
            })),
        ]
    }

    proptest! {
        #[test]
        fn enumeration_matches_membership(a in arb_set(), b in arb_set(), n in 0u64..30, h in 0u64..500) {
            for s in [a.clone(), a.union(&b), a.difference(&b), a.intersection(&b),
                      a.shift_left(n), a.tail(n), a.union_of_shifts(n % 5)] {
                let scanned: Vec<u64> = (0..=h).filter(|&k| s.contains_u64(k)).collect();
                prop_assert_eq!(s.enumerate_up_to(h), scanned);
            }
        }

        #[test]
        fn enumeration_prefix(a in arb_set(), h1 in 0u64..300, extra in 0u64..300) {
            let long = a.enumerate_up_to(h1 + extra);
            let short = a.enumerate_up_to(h1);
            prop_assert_eq!(&long[..short.len()], &short[..]);
            prop_assert!(long.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn shift_composition(a in arb_set(), m in 0u64..40, n in 0u64..40, k in 0u64..400) {
            prop_assert_eq!(
                a.shift_left(m).shift_left(n).contains_u64(k),
                a.shift_left(m + n).contains_u64(k)
            );
        }

        #[test]
        fn difference_plus_intersection(a in arb_set(), b in arb_set(), k in 0u64..500) {
            let rebuilt = a.difference(&b).union(&a.intersection(&b));
            prop_assert_eq!(rebuilt.contains_u64(k), a.contains_u64(k));
        }
    }
}
