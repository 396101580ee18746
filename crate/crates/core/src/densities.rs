//! Finite-horizon estimators for asymptotic density functionals.
//!
//! Every estimator works on one enumeration of the set up to the largest
//! requested horizon and reports values in exact rationals whenever the
//! inputs are rational. Floats appear only for logarithms and for weight
//! profiles declared in floating point.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::index_sets::IndexSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("horizons must be strictly increasing (violated at position {0})")]
    HorizonsNotIncreasing(usize),
    #[error("horizon 0 is not allowed for this functional")]
    ZeroHorizon,
    #[error("first weight must be positive")]
    NonPositiveFirstWeight,
    #[error("weight at k={0} is negative")]
    NegativeWeight(u64),
    #[error("weights increase at k={0}")]
    WeightNotDecreasing(u64),
    #[error("matrix row {0} has no tail bound")]
    MissingTailBound(u64),
    #[error("delta must lie in (0,1), got {0}")]
    DeltaOutOfRange(String),
    #[error("alpha must lie in (0,1), got {0}")]
    AlphaOutOfRange(String),
    #[error("horizon {horizon} lies before start {start}")]
    HorizonBeforeStart { start: u64, horizon: u64 },
}

/// A density value: exact when every input was rational.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(BigRational::zero())
    }

    pub fn ratio(num: u64, den: u64) -> Self {
        Value::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(f) => *f,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn div(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a / b),
            _ => Value::Float(self.to_f64() / other.to_f64()),
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(f) => *f < 0.0,
        }
    }

    fn is_positive(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_positive(),
            Value::Float(f) => *f > 0.0,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FunctionalTag {
    Lower,
    Upper,
    /// Window length `n + 1`.
    Banach { n: u64 },
    Weighted(String),
    Matrix(String),
    Exponential,
    Hindman { depth: u64 },
    PhiSum(String),
}

impl fmt::Display for FunctionalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalTag::Lower => write!(f, "lower"),
            FunctionalTag::Upper => write!(f, "upper"),
            FunctionalTag::Banach { n } => write!(f, "banach(window={})", n + 1),
            FunctionalTag::Weighted(l) => write!(f, "weighted({l})"),
            FunctionalTag::Matrix(l) => write!(f, "matrix({l})"),
            FunctionalTag::Exponential => write!(f, "exponential"),
            FunctionalTag::Hindman { depth } => write!(f, "hindman({depth})"),
            FunctionalTag::PhiSum(l) => write!(f, "phi_sum({l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Upper,
    Lower,
}

/// Values of one functional at increasing horizons.
///
/// `running_sup[i]` and `running_inf[i]` are the max and min of
/// `values[i..]`, so index 0 summarises the whole profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub tag: FunctionalTag,
    pub horizons: Vec<u64>,
    pub values: Vec<Value>,
    pub running_sup: Vec<Value>,
    pub running_inf: Vec<Value>,
    /// Certified truncation slack per horizon (matrix densities only).
    pub slack: Option<Vec<Value>>,
}

impl DensityProfile {
    fn new(tag: FunctionalTag, horizons: Vec<u64>, values: Vec<Value>) -> Self {
        let len = values.len();
        let mut running_sup = values.clone();
        let mut running_inf = values.clone();
        for i in (0..len.saturating_sub(1)).rev() {
            if running_sup[i + 1] > running_sup[i] {
                running_sup[i] = running_sup[i + 1].clone();
            }
            if running_inf[i + 1] < running_inf[i] {
                running_inf[i] = running_inf[i + 1].clone();
            }
        }
        DensityProfile { tag, horizons, values, running_sup, running_inf, slack: None }
    }

    pub fn value_at(&self, horizon: u64) -> Option<&Value> {
        self.horizons.binary_search(&horizon).ok().map(|i| &self.values[i])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["functional_tag", "N", "value", "running_sup", "running_inf"])?;
        let tag = self.tag.to_string();
        for i in 0..self.values.len() {
            w.write_record([
                tag.clone(),
                self.horizons[i].to_string(),
                self.values[i].to_string(),
                self.running_sup[i].to_string(),
                self.running_inf[i].to_string(),
            ])?;
        }
        w.flush()
    }
}

fn check_horizons(horizons: &[u64]) -> Result<(), DensityError> {
    match horizons.windows(2).position(|w| w[0] >= w[1]) {
        Some(i) => Err(DensityError::HorizonsNotIncreasing(i + 1)),
        None => Ok(()),
    }
}

fn max_horizon(horizons: &[u64]) -> u64 {
    horizons.last().copied().unwrap_or(0)
}

/// `card(A ∩ [0, n])`.
pub fn count(a: &IndexSet, n: u64) -> u64 {
    a.count_up_to(n)
}

/// Counts at each horizon from a single enumeration.
fn counts_at(a: &IndexSet, horizons: &[u64]) -> Vec<u64> {
    let elems = a.enumerate_up_to(max_horizon(horizons));
    horizons.iter().map(|&h| elems.partition_point(|&x| x <= h) as u64).collect()
}

/// `count(A, N)/(N+1)` at each horizon.
pub fn natural_density_profile(
    a: &IndexSet,
    horizons: &[u64],
    mode: Mode,
) -> Result<DensityProfile, DensityError> {
    check_horizons(horizons)?;
    let values = counts_at(a, horizons)
        .into_iter()
        .zip(horizons)
        .map(|(c, &h)| Value::ratio(c, h + 1))
        .collect();
    let tag = match mode {
        Mode::Upper => FunctionalTag::Upper,
        Mode::Lower => FunctionalTag::Lower,
    };
    Ok(DensityProfile::new(tag, horizons.to_vec(), values))
}

/// Largest count of `A` in a window `[m, m+n]` over `m ≤ m_max`, for every
/// `m_max` in `m_maxes` (increasing).
fn best_window_counts(a: &IndexSet, n: u64, m_maxes: &[u64]) -> Vec<u64> {
    let last = max_horizon(m_maxes);
    let elems = a.enumerate_up_to(last.saturating_add(n));
    let mut out = Vec::with_capacity(m_maxes.len());
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut best = 0u64;
    let mut next = 0usize;
    for m in 0..=last {
        while lo < elems.len() && elems[lo] < m {
            lo += 1;
        }
        while hi < elems.len() && elems[hi] <= m + n {
            hi += 1;
        }
        best = best.max((hi - lo) as u64);
        while next < m_maxes.len() && m_maxes[next] == m {
            out.push(best);
            next += 1;
        }
    }
    out
}

/// `sup_{0 ≤ m ≤ m_max} card(A ∩ [m, m+n])/(n+1)`.
pub fn banach_density_at(a: &IndexSet, n: u64, m_max: u64) -> BigRational {
    let best = best_window_counts(a, n, &[m_max])[0];
    BigRational::new(best.into(), (n + 1).into())
}

/// Banach window estimate for a fixed window `n + 1` as `m_max` grows.
pub fn banach_profile(
    a: &IndexSet,
    n: u64,
    m_maxes: &[u64],
) -> Result<DensityProfile, DensityError> {
    check_horizons(m_maxes)?;
    let values = best_window_counts(a, n, m_maxes)
        .into_iter()
        .map(|c| Value::ratio(c, n + 1))
        .collect();
    Ok(DensityProfile::new(FunctionalTag::Banach { n }, m_maxes.to_vec(), values))
}

type WeightFn = dyn Fn(u64) -> Value + Send + Sync;

/// A nonincreasing weight sequence `w_k ≥ 0` with `w_0 > 0`.
#[derive(Clone)]
pub struct WeightProfile {
    label: String,
    w: Arc<WeightFn>,
    /// Caller's assertion that `Σ w_k` diverges.
    pub divergent: bool,
}

impl fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightProfile").field("label", &self.label).finish()
    }
}

impl WeightProfile {
    pub fn exact<F>(label: impl Into<String>, f: F, divergent: bool) -> Self
    where
        F: Fn(u64) -> BigRational + Send + Sync + 'static,
    {
        WeightProfile { label: label.into(), w: Arc::new(move |k| Value::Exact(f(k))), divergent }
    }

    pub fn float<F>(label: impl Into<String>, f: F, divergent: bool) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        WeightProfile { label: label.into(), w: Arc::new(move |k| Value::Float(f(k))), divergent }
    }

    pub fn ones() -> Self {
        Self::exact("1", |_| BigRational::one(), true)
    }

    /// `w_k = 1/(k+1)^α`; exact for `α = 0`.
    pub fn power(alpha: f64) -> Self {
        if alpha == 0.0 {
            return Self::ones();
        }
        Self::float(format!("(k+1)^-{alpha}"), move |k| ((k + 1) as f64).powf(-alpha), alpha <= 1.0)
    }

    /// `w_k = 1/(k+1)` in exact arithmetic; only practical for small horizons.
    pub fn harmonic_exact() -> Self {
        Self::exact("1/(k+1)", |k| BigRational::new(BigInt::one(), BigInt::from(k + 1)), true)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn weight(&self, k: u64) -> Value {
        (self.w)(k)
    }

    /// Checks `w_0 > 0` and monotone nonnegativity on `[0, horizon]`.
    pub fn validate(&self, horizon: u64) -> Result<(), DensityError> {
        let mut prev = self.weight(0);
        if !prev.is_positive() {
            return Err(DensityError::NonPositiveFirstWeight);
        }
        for k in 1..=horizon {
            let cur = self.weight(k);
            if cur.is_negative() {
                return Err(DensityError::NegativeWeight(k));
            }
            if cur > prev {
                return Err(DensityError::WeightNotDecreasing(k));
            }
            prev = cur;
        }
        Ok(())
    }
}

/// Running sums `(Σ_{k∈A,k≤N} w_k, Σ_{k≤N} w_k)` at each horizon.
fn weighted_sums(a: &IndexSet, wp: &WeightProfile, horizons: &[u64]) -> Vec<(Value, Value)> {
    let last = max_horizon(horizons);
    let elems = a.enumerate_up_to(last);
    let mut idx = 0;
    let (mut s, mut total) = (Value::zero(), Value::zero());
    let mut out = Vec::with_capacity(horizons.len());
    let mut next = 0;
    for k in 0..=last {
        let w = wp.weight(k);
        if idx < elems.len() && elems[idx] == k {
            s = s.add(&w);
            idx += 1;
        }
        total = total.add(&w);
        while next < horizons.len() && horizons[next] == k {
            out.push((s.clone(), total.clone()));
            next += 1;
        }
    }
    out
}

/// `(1/W_N) Σ_{k∈A, k≤N} w_k`.
pub fn weighted_density_profile(
    a: &IndexSet,
    wp: &WeightProfile,
    horizons: &[u64],
) -> Result<DensityProfile, DensityError> {
    check_horizons(horizons)?;
    wp.validate(max_horizon(horizons))?;
    let values = weighted_sums(a, wp, horizons).into_iter().map(|(s, t)| s.div(&t)).collect();
    Ok(DensityProfile::new(
        FunctionalTag::Weighted(wp.label().to_string()),
        horizons.to_vec(),
        values,
    ))
}

/// Unnormalised partial sums `Σ_{k∈A, k≤N} φ_k`.
pub fn phi_sum_profile(
    a: &IndexSet,
    phi: &WeightProfile,
    horizons: &[u64],
) -> Result<DensityProfile, DensityError> {
    check_horizons(horizons)?;
    phi.validate(max_horizon(horizons))?;
    let values = weighted_sums(a, phi, horizons).into_iter().map(|(s, _)| s).collect();
    Ok(DensityProfile::new(
        FunctionalTag::PhiSum(phi.label().to_string()),
        horizons.to_vec(),
        values,
    ))
}

/// Smallest `N ≤ horizon` with `Σ_{k∈A,k≤N} φ_k > m`.
pub fn phi_component_check(
    a: &IndexSet,
    phi: &WeightProfile,
    m: &Value,
    horizon: u64,
) -> Result<Option<u64>, DensityError> {
    phi.validate(horizon)?;
    let mut s = Value::zero();
    for k in a.enumerate_up_to(horizon) {
        s = s.add(&phi.weight(k));
        if &s > m {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// A summability matrix `(w_{n,k})` with a per-row truncation column.
pub trait DensityMatrix: Send + Sync {
    fn label(&self) -> String;
    fn entry(&self, n: u64, k: u64) -> Value;
    /// Last column summed in row `n`.
    fn truncation(&self, n: u64) -> u64;
    /// Certified bound on `Σ_{k > truncation(n)} w_{n,k}`; `None` if unknown.
    fn tail_bound(&self, n: u64) -> Option<Value>;
}

/// `w_{n,k} = 1/(n+1)` for `k ≤ n`.
pub struct Cesaro;

impl DensityMatrix for Cesaro {
    fn label(&self) -> String {
        "cesaro".into()
    }
    fn entry(&self, n: u64, k: u64) -> Value {
        if k <= n {
            Value::ratio(1, n + 1)
        } else {
            Value::zero()
        }
    }
    fn truncation(&self, n: u64) -> u64 {
        n
    }
    fn tail_bound(&self, _n: u64) -> Option<Value> {
        Some(Value::zero())
    }
}

/// A finite matrix given row by row; rows beyond the table have no tail bound.
pub struct DenseMatrix {
    pub label: String,
    pub rows: Vec<Vec<BigRational>>,
}

impl DensityMatrix for DenseMatrix {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn entry(&self, n: u64, k: u64) -> Value {
        let r = self.rows.get(n as usize).and_then(|row| row.get(k as usize));
        Value::Exact(r.cloned().unwrap_or_else(BigRational::zero))
    }
    fn truncation(&self, n: u64) -> u64 {
        self.rows.get(n as usize).map_or(0, |r| r.len().saturating_sub(1) as u64)
    }
    fn tail_bound(&self, n: u64) -> Option<Value> {
        ((n as usize) < self.rows.len()).then(Value::zero)
    }
}

/// `Σ_{k∈A, k≤K_max(N)} w_{N,k}` with the row's tail bound as slack.
pub fn matrix_density_profile(
    a: &IndexSet,
    w: &dyn DensityMatrix,
    horizons: &[u64],
) -> Result<DensityProfile, DensityError> {
    check_horizons(horizons)?;
    let mut values = Vec::with_capacity(horizons.len());
    let mut slack = Vec::with_capacity(horizons.len());
    for &n in horizons {
        let tail = w.tail_bound(n).ok_or(DensityError::MissingTailBound(n))?;
        let kmax = w.truncation(n);
        let sum = a
            .enumerate_up_to(kmax)
            .into_iter()
            .fold(Value::zero(), |acc, k| acc.add(&w.entry(n, k)));
        values.push(sum);
        slack.push(tail);
    }
    let mut p = DensityProfile::new(FunctionalTag::Matrix(w.label()), horizons.to_vec(), values);
    p.slack = Some(slack);
    Ok(p)
}

/// `log⁺(count(A, N))/log(N+1)`.
pub fn exponential_density_profile(
    a: &IndexSet,
    horizons: &[u64],
) -> Result<DensityProfile, DensityError> {
    check_horizons(horizons)?;
    if horizons.first() == Some(&0) {
        return Err(DensityError::ZeroHorizon);
    }
    let values = counts_at(a, horizons)
        .into_iter()
        .zip(horizons)
        .map(|(c, &h)| {
            let num = if c > 1 { (c as f64).ln() } else { 0.0 };
            Value::Float(num / ((h + 1) as f64).ln())
        })
        .collect();
    Ok(DensityProfile::new(FunctionalTag::Exponential, horizons.to_vec(), values))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentWitness {
    /// Smallest `N` in the range with `count(A,N)/(N+1) > δ`.
    pub witness: Option<u64>,
    pub count: Option<u64>,
}

impl ComponentWitness {
    pub fn holds(&self) -> bool {
        self.witness.is_some()
    }
}

/// Decides `∃ N ∈ [n, horizon]: count(A,N)/(N+1) > δ`.
pub fn family_component_check(
    a: &IndexSet,
    delta: &BigRational,
    n: u64,
    horizon: u64,
) -> Result<ComponentWitness, DensityError> {
    if !delta.is_positive() || delta >= &BigRational::one() {
        return Err(DensityError::DeltaOutOfRange(delta.to_string()));
    }
    if horizon < n {
        return Err(DensityError::HorizonBeforeStart { start: n, horizon });
    }
    let elems = a.enumerate_up_to(horizon);
    let mut c = elems.partition_point(|&x| x < n) as u64;
    let mut idx = c as usize;
    let (dn, dd) = (delta.numer().clone(), delta.denom().clone());
    for big_n in n..=horizon {
        if idx < elems.len() && elems[idx] == big_n {
            c += 1;
            idx += 1;
        }
        // c/(N+1) > p/q  ⇔  c·q > p·(N+1)
        if BigInt::from(c) * &dd > &dn * BigInt::from(big_n + 1) {
            return Ok(ComponentWitness { witness: Some(big_n), count: Some(c) });
        }
    }
    Ok(ComponentWitness { witness: None, count: None })
}

/// Lower-density profile of `⋃_{n=0}^{depth} (A − n)`.
pub fn hindman_profile(
    a: &IndexSet,
    depth: u64,
    horizons: &[u64],
) -> Result<DensityProfile, DensityError> {
    let mut p = natural_density_profile(&a.union_of_shifts(depth), horizons, Mode::Lower)?;
    p.tag = FunctionalTag::Hindman { depth };
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyaPoint {
    pub alpha: BigRational,
    pub n: u64,
    pub value: BigRational,
}

/// Pólya-type estimator `card(A ∩ (⌊αN⌋, N]) / (N − ⌊αN⌋)` over an
/// `(α, N)` grid; the discretisation of the double limit is the caller's.
pub fn polya_grid(
    a: &IndexSet,
    alphas: &[BigRational],
    horizons: &[u64],
) -> Result<Vec<PolyaPoint>, DensityError> {
    check_horizons(horizons)?;
    let elems = a.enumerate_up_to(max_horizon(horizons));
    let upto = |x: u64| elems.partition_point(|&e| e <= x) as u64;
    let mut out = Vec::new();
    for alpha in alphas {
        if !alpha.is_positive() || alpha >= &BigRational::one() {
            return Err(DensityError::AlphaOutOfRange(alpha.to_string()));
        }
        for &n in horizons {
            let lo = (alpha * BigRational::from_integer(n.into())).floor().to_integer();
            let lo = lo.to_u64().unwrap_or(0);
            if lo >= n {
                continue;
            }
            let inside = upto(n) - upto(lo);
            let value = BigRational::new(inside.into(), (n - lo).into());
            out.push(PolyaPoint { alpha: alpha.clone(), n, value });
        }
    }
    Ok(out)
}
