//! Weighted backward shifts on finitely supported sequences.
//!
//! `B_w(x)_n = w_{n+1} x_{n+1}`, so `(B_w^m x)_j = (ϖ_{j+m}/ϖ_j) x_{j+m}`
//! with `ϖ_n = w_1⋯w_n`. Weight sequences are given through `ϖ` directly,
//! which is how closed-form constructions describe them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::index_sets::IndexSet;
use crate::scalar::Scalar;

/// Largest binary exponent or mantissa size accepted by the conjugacy maps.
pub const PRECISION_BUDGET_BITS: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShiftError {
    #[error("weight product vanishes at n={0}")]
    ZeroWeight(u64),
    #[error("weight product at n={0} exceeds the precision budget")]
    PrecisionBudget(u64),
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("vectors live in different spaces: {0} and {1}")]
    SpaceMismatch(Space, Space),
    #[error("malformed vector JSON: {0}")]
    Json(String),
}

/// Closed-form `n ↦ ϖ_n`.
pub trait WeightOracle: Send + Sync {
    fn varpi(&self, n: &BigUint) -> Scalar;

    fn varpi_u64(&self, n: u64) -> Scalar {
        self.varpi(&BigUint::from(n))
    }
}

struct FnOracle<F>(F);

impl<F: Fn(&BigUint) -> Scalar + Send + Sync> WeightOracle for FnOracle<F> {
    fn varpi(&self, n: &BigUint) -> Scalar {
        (self.0)(n)
    }
}

struct Unit;

impl WeightOracle for Unit {
    fn varpi(&self, _n: &BigUint) -> Scalar {
        Scalar::one()
    }
    fn varpi_u64(&self, _n: u64) -> Scalar {
        Scalar::one()
    }
}

struct Table {
    values: Vec<Scalar>,
    fallback: Arc<dyn WeightOracle>,
}

impl WeightOracle for Table {
    fn varpi(&self, n: &BigUint) -> Scalar {
        match n.to_u64() {
            Some(v) => self.varpi_u64(v),
            None => self.fallback.varpi(n),
        }
    }
    fn varpi_u64(&self, n: u64) -> Scalar {
        match self.values.get(n as usize) {
            Some(v) => v.clone(),
            None => self.fallback.varpi_u64(n),
        }
    }
}

/// Products of explicitly given weights; beyond the precomputed table the
/// product is continued term by term.
struct Products {
    w: Arc<dyn Fn(u64) -> Scalar + Send + Sync>,
    table: Vec<Scalar>,
}

impl WeightOracle for Products {
    fn varpi(&self, n: &BigUint) -> Scalar {
        self.varpi_u64(n.to_u64().expect("weight products are tabulated in machine range"))
    }
    fn varpi_u64(&self, n: u64) -> Scalar {
        if let Some(v) = self.table.get(n as usize) {
            return v.clone();
        }
        let mut acc = self.table.last().cloned().unwrap_or_else(Scalar::one);
        for k in self.table.len() as u64..=n {
            acc = &acc * &(self.w)(k);
        }
        acc
    }
}

#[derive(Clone)]
pub struct WeightSequence {
    oracle: Arc<dyn WeightOracle>,
    label: Arc<str>,
    sup_weight: Option<Scalar>,
    unweighted: bool,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("label", &self.label)
            .field("sup_weight", &self.sup_weight)
            .finish()
    }
}

impl WeightSequence {
    /// `w ≡ 1`.
    pub fn unweighted() -> Self {
        WeightSequence {
            oracle: Arc::new(Unit),
            label: "1".into(),
            sup_weight: Some(Scalar::one()),
            unweighted: true,
        }
    }

    pub fn from_oracle(
        label: impl Into<String>,
        oracle: impl WeightOracle + 'static,
        sup_weight: Option<Scalar>,
    ) -> Self {
        WeightSequence {
            oracle: Arc::new(oracle),
            label: label.into().into(),
            sup_weight,
            unweighted: false,
        }
    }

    /// `ϖ` given in closed form; `sup_weight` is the declared `sup |w_n|`.
    pub fn from_varpi<F>(label: impl Into<String>, varpi: F, sup_weight: Option<Scalar>) -> Self
    where
        F: Fn(&BigUint) -> Scalar + Send + Sync + 'static,
    {
        Self::from_oracle(label, FnOracle(varpi), sup_weight)
    }

    /// Constant weight `w_n = c`, so `ϖ_n = c^n`.
    pub fn geometric(c: Scalar) -> Self {
        let sup = c.abs();
        let label = format!("w={c}");
        Self::from_varpi(
            label,
            move |n| {
                let e = n.to_u64().expect("geometric exponent in machine range");
                if c == Scalar::from(2) {
                    Scalar::pow2(e as i64)
                } else {
                    c.powi(e as u32)
                }
            },
            Some(sup),
        )
    }

    /// Explicit weights `w_1, w_2, …`; `ϖ` is tabulated up to `table_len`.
    pub fn from_weights<F>(
        label: impl Into<String>,
        w: F,
        table_len: u64,
        sup_weight: Option<Scalar>,
    ) -> Self
    where
        F: Fn(u64) -> Scalar + Send + Sync + 'static,
    {
        let mut table = Vec::with_capacity(table_len as usize + 1);
        table.push(Scalar::one());
        for k in 1..=table_len {
            let next = table.last().unwrap() * &w(k);
            table.push(next);
        }
        Self::from_oracle(label, Products { w: Arc::new(w), table }, sup_weight)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn sup_weight(&self) -> Option<&Scalar> {
        self.sup_weight.as_ref()
    }

    /// The operator is bounded on c₀ exactly when `sup |w_n| < ∞`; here that
    /// is the caller's (or construction's) declaration.
    pub fn is_c0_operator(&self) -> bool {
        self.sup_weight.is_some()
    }

    pub fn varpi(&self, n: u64) -> Scalar {
        self.oracle.varpi_u64(n)
    }

    pub fn varpi_big(&self, n: &BigUint) -> Scalar {
        self.oracle.varpi(n)
    }

    /// `w_n = ϖ_n / ϖ_{n−1}` for `n ≥ 1`.
    pub fn weight(&self, n: u64) -> Scalar {
        assert!(n >= 1, "weights are indexed from 1");
        &self.varpi(n) / &self.varpi(n - 1)
    }

    /// First `n ≤ horizon` with `|w_n|` above the declared bound.
    pub fn sup_bound_violation(&self, horizon: u64) -> Option<u64> {
        let bound = self.sup_weight.as_ref()?;
        (1..=horizon).find(|&n| &self.weight(n).abs() > bound)
    }

    /// Same sequence with `ϖ_0..=ϖ_upto` precomputed.
    pub fn tabulated(&self, upto: u64) -> Self {
        if self.unweighted {
            return self.clone();
        }
        let values = (0..=upto).map(|n| self.varpi(n)).collect();
        WeightSequence {
            oracle: Arc::new(Table { values, fallback: Arc::clone(&self.oracle) }),
            label: Arc::clone(&self.label),
            sup_weight: self.sup_weight.clone(),
            unweighted: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    C0,
    Lp(u32),
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::C0 => write!(f, "c0"),
            Space::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl std::str::FromStr for Space {
    type Err = ShiftError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "c0" {
            return Ok(Space::C0);
        }
        s.strip_prefix('l')
            .and_then(|p| p.parse::<u32>().ok())
            .filter(|&p| p >= 1)
            .map(Space::Lp)
            .ok_or_else(|| ShiftError::Json(format!("unknown space {s:?}")))
    }
}

/// Finitely supported sequence; zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedVector {
    space: Space,
    entries: BTreeMap<u64, Scalar>,
}

impl TruncatedVector {
    pub fn zero(space: Space) -> Self {
        TruncatedVector { space, entries: BTreeMap::new() }
    }

    /// `e_n`.
    pub fn unit(space: Space, n: u64) -> Self {
        Self::from_entries(space, [(n, Scalar::one())])
    }

    /// Repeated indices are summed.
    pub fn from_entries(space: Space, entries: impl IntoIterator<Item = (u64, Scalar)>) -> Self {
        let mut map: BTreeMap<u64, Scalar> = BTreeMap::new();
        for (i, v) in entries {
            let slot = map.entry(i).or_insert_with(Scalar::zero);
            *slot = &*slot + &v;
        }
        map.retain(|_, v| !v.is_zero());
        TruncatedVector { space, entries: map }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn in_space(&self, space: Space) -> Self {
        TruncatedVector { space, entries: self.entries.clone() }
    }

    pub fn get(&self, i: u64) -> Scalar {
        self.entries.get(&i).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, &Scalar)> + '_ {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn scale(&self, lambda: &Scalar) -> Self {
        Self::from_entries(self.space, self.entries.iter().map(|(&i, v)| (i, lambda * v)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        for (&i, v) in &other.entries {
            let slot = entries.entry(i).or_insert_with(Scalar::zero);
            *slot = &*slot + v;
        }
        entries.retain(|_, v| !v.is_zero());
        TruncatedVector { space: self.space, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Scalar::from(-1)))
    }

    /// `max |x_i|` on c₀, `Σ |x_i|^p` on ℓᵖ.
    pub fn norm_power(&self) -> Scalar {
        match self.space {
            Space::C0 => self.sup_norm(),
            Space::Lp(p) => self
                .entries
                .values()
                .fold(Scalar::zero(), |acc, v| &acc + &v.abs().powi(p)),
        }
    }

    pub fn sup_norm(&self) -> Scalar {
        self.entries.values().map(Scalar::abs).max().unwrap_or_else(Scalar::zero)
    }

    /// Exact `‖x‖ < r`.
    pub fn norm_lt(&self, r: &Scalar) -> bool {
        match self.space {
            Space::C0 => &self.sup_norm() < r,
            Space::Lp(p) => !r.is_negative() && self.norm_power() < r.powi(p),
        }
    }

    /// Exact `‖x‖ ≤ r`.
    pub fn norm_le(&self, r: &Scalar) -> bool {
        match self.space {
            Space::C0 => &self.sup_norm() <= r,
            Space::Lp(p) => !r.is_negative() && self.norm_power() <= r.powi(p),
        }
    }

    pub fn norm(&self) -> f64 {
        match self.space {
            Space::C0 => self.sup_norm().to_f64(),
            Space::Lp(p) => {
                let s = self.norm_power();
                if s.is_zero() {
                    0.0
                } else {
                    (s.log2_abs() / p as f64).exp2()
                }
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(&i, v)| {
                let (n, d, e) = v.to_wire();
                json!([i, n, d, e])
            })
            .collect();
        json!({ "space": self.space.to_string(), "entries": entries })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ShiftError> {
        let bad = |m: &str| ShiftError::Json(m.to_string());
        let space: Space = value
            .get("space")
            .and_then(|s| s.as_str())
            .ok_or_else(|| bad("missing space"))?
            .parse()?;
        let list = value
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| bad("missing entries"))?;
        let mut entries = Vec::with_capacity(list.len());
        for item in list {
            let t = item.as_array().filter(|t| t.len() == 4).ok_or_else(|| bad("entry arity"))?;
            let i = t[0].as_u64().ok_or_else(|| bad("index"))?;
            let e = t[3].as_i64().ok_or_else(|| bad("exp2"))?;
            entries.push((i, Scalar::from_wire(&t[1], &t[2], e).map_err(|m| bad(&m))?));
        }
        Ok(Self::from_entries(space, entries))
    }
}

impl Serialize for TruncatedVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncatedVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `B_w^m x`.
pub fn backward_apply(w: &WeightSequence, x: &TruncatedVector, m: u64) -> TruncatedVector {
    if m == 0 {
        return x.clone();
    }
    let entries = x.entries.range(m..).map(|(&i, v)| {
        let j = i - m;
        if w.unweighted {
            (j, v.clone())
        } else {
            (j, &(&w.varpi(i) / &w.varpi(j)) * v)
        }
    });
    TruncatedVector { space: x.space, entries: entries.collect() }
}

/// Unweighted forward shift `F^n`.
pub fn forward_apply(y: &TruncatedVector, n: u64) -> TruncatedVector {
    TruncatedVector {
        space: y.space,
        entries: y.entries.iter().map(|(&i, v)| (i + n, v.clone())).collect(),
    }
}

/// `S_w^n`, the right inverse of `B_w^n`: `e_i ↦ (ϖ_i/ϖ_{i+n}) e_{i+n}`.
pub fn forward_apply_weighted(w: &WeightSequence, y: &TruncatedVector, n: u64) -> TruncatedVector {
    if w.unweighted {
        return forward_apply(y, n);
    }
    let entries = y.entries.iter().map(|(&i, v)| (i + n, &(&w.varpi(i) / &w.varpi(i + n)) * v));
    TruncatedVector { space: y.space, entries: entries.collect() }
}

fn within_budget(n: u64, s: &Scalar) -> Result<(), ShiftError> {
    if s.is_zero() {
        return Err(ShiftError::ZeroWeight(n));
    }
    if s.exp2().unsigned_abs() > PRECISION_BUDGET_BITS || s.mantissa_bits() > PRECISION_BUDGET_BITS
    {
        return Err(ShiftError::PrecisionBudget(n));
    }
    Ok(())
}

/// `φ_v : x_n ↦ x_n / ϖ_n`. It intertwines `B_w ∘ φ_v = φ_v ∘ B`.
pub fn conjugate_to_unweighted(
    w: &WeightSequence,
    x: &TruncatedVector,
) -> Result<TruncatedVector, ShiftError> {
    let mut entries = BTreeMap::new();
    for (&i, v) in &x.entries {
        let p = w.varpi(i);
        within_budget(i, &p)?;
        entries.insert(i, v / &p);
    }
    Ok(TruncatedVector { space: x.space, entries })
}

/// `φ_v^{-1} : x_n ↦ x_n ϖ_n`.
pub fn conjugate_inverse(
    w: &WeightSequence,
    x: &TruncatedVector,
) -> Result<TruncatedVector, ShiftError> {
    let mut entries = BTreeMap::new();
    for (&i, v) in &x.entries {
        let p = w.varpi(i);
        within_budget(i, &p)?;
        entries.insert(i, v * &p);
    }
    Ok(TruncatedVector { space: x.space, entries })
}

/// `{m ≤ horizon : ‖B_w^m x − center‖ < radius}`.
pub fn orbit_visit_set(
    w: &WeightSequence,
    x: &TruncatedVector,
    center: &TruncatedVector,
    radius: &Scalar,
    horizon: u64,
) -> Result<IndexSet, ShiftError> {
    if radius <= &Scalar::zero() {
        return Err(ShiftError::NonPositiveRadius);
    }
    let center = center.in_space(x.space);
    let mut visits = Vec::new();
    let mut cur = x.clone();
    for m in 0..=horizon {
        let inside = cur.sub(&center).norm_lt(radius);
        if cur.is_zero() {
            // The orbit has reached 0 and stays there.
            if inside {
                visits.extend(m..=horizon);
            }
            break;
        }
        if inside {
            visits.push(m);
        }
        cur = backward_apply(w, &cur, 1);
    }
    let label = format!("visits(B_{}^m x, r={radius})", w.label());
    Ok(IndexSet::finite(label, visits))
}
