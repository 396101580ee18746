//! Explicit hypercyclic vectors for weighted shifts on c₀.
//!
//! Given disjoint families `A_p` and targets `y^{(p)}` supported on `[0, p]`,
//! the vector `x = Σ_p Σ_{n∈A_p} Σ_{j≤p} y^{(p)}_j/ϖ_{n+j} e_{n+j}` satisfies
//! `B_w^m x ≈ φ_v(y^{(q)})` for `m ∈ A_q`, where `φ_v` divides by `ϖ`. All
//! distances are computed in the unweighted frame, where `x̃ = φ_v^{-1}x`
//! and the norm is `sup_i |z_i|/ϖ_i`.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::criteria::{CriterionId, CriterionReport, ReportBuilder, Tally, Witness};
use crate::index_sets::IndexSet;
use crate::scalar::Scalar;
use crate::shift_ops::{backward_apply, conjugate_inverse, conjugate_to_unweighted, ShiftError, Space, TruncatedVector, WeightSequence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HvectorError {
    #[error("target {p} is not supported on [0, {p}] with entries bounded by {p}")]
    Target { p: u64 },
    #[error("need one family per target")]
    Shape,
    #[error("element {n} lies in families {p} and {q}")]
    Overlap { n: u64, p: u64, q: u64 },
    #[error("gap condition fails: n={n}, m={m} in family {q} with n - m <= {q}")]
    Gap { n: u64, m: u64, q: u64 },
    #[error("blocks collide at index {0}")]
    Collision(u64),
    #[error(transparent)]
    Shift(#[from] ShiftError),
}

#[derive(Debug, Clone)]
pub struct TargetSchedule {
    /// `targets[p−1] = y^{(p)}`.
    targets: Vec<TruncatedVector>,
    families: Vec<IndexSet>,
}

/// `Σ_{j≤p} e_j`.
pub fn all_ones(p: u64) -> TruncatedVector {
    TruncatedVector::from_entries(Space::C0, (0..=p).map(|j| (j, Scalar::one())))
}

/// The `index`-th point of the grid `{k/p : |k| ≤ p²}^{p+1}` in mixed radix.
pub fn grid_target(p: u64, mut index: u64) -> TruncatedVector {
    let side = 2 * p * p + 1;
    let entries = (0..=p).map(|j| {
        let k = (index % side) as i64 - (p * p) as i64;
        index /= side;
        (j, Scalar::from_fraction(BigInt::from(k), BigInt::from(p), 0))
    });
    TruncatedVector::from_entries(Space::C0, entries.collect::<Vec<_>>())
}

/// `1/(p(p+1)4^p)`, scaled by `sup|w|^{−p}` when `sup|w| > 1`.
pub fn epsilon(p: u64, sup_weight: Option<&Scalar>) -> Scalar {
    let base = Scalar::from_fraction(BigInt::from(1), BigInt::from(p * (p + 1)), -2 * p as i64);
    match sup_weight {
        Some(s) if s > &Scalar::one() => &base / &s.powi(p as u32),
        _ => base,
    }
}

impl TargetSchedule {
    pub fn new(targets: Vec<TruncatedVector>, families: Vec<IndexSet>) -> Result<Self, HvectorError> {
        if targets.len() != families.len() {
            return Err(HvectorError::Shape);
        }
        for (i, y) in targets.iter().enumerate() {
            let p = i as u64 + 1;
            let bound = Scalar::from(p as i64);
            if y.max_index().is_some_and(|k| k > p) || y.sup_norm() > bound {
                return Err(HvectorError::Target { p });
            }
        }
        let targets = targets.into_iter().map(|y| y.in_space(Space::C0)).collect();
        Ok(TargetSchedule { targets, families })
    }

    /// `y^{(p)} = Σ_{j≤p} e_j` for each family.
    pub fn all_ones(families: Vec<IndexSet>) -> Self {
        let targets = (1..=families.len() as u64).map(all_ones).collect();
        TargetSchedule { targets, families }
    }

    pub fn empty() -> Self {
        TargetSchedule { targets: Vec::new(), families: Vec::new() }
    }

    pub fn p_max(&self) -> u64 {
        self.targets.len() as u64
    }

    pub fn target(&self, p: u64) -> &TruncatedVector {
        &self.targets[p as usize - 1]
    }

    pub fn family(&self, p: u64) -> &IndexSet {
        &self.families[p as usize - 1]
    }

    /// `(n, p)` for every `n ∈ A_p ∩ [0, horizon]`, sorted by `n`.
    fn owners(&self, horizon: u64) -> Vec<(u64, u64)> {
        let mut all: Vec<(u64, u64)> = self
            .families
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, a)| a.enumerate_up_to(horizon).into_iter().map(move |n| (n, i as u64 + 1)))
            .collect();
        all.sort_unstable();
        all
    }

    /// Disjointness and `n − m > q` for `m ∈ A_q`, `n > m` in any family.
    pub fn check_invariants(&self, horizon: u64) -> Result<(), HvectorError> {
        let owners = self.owners(horizon);
        for pair in owners.windows(2) {
            let ((m, q), (n, p)) = (pair[0], pair[1]);
            if n == m {
                return Err(HvectorError::Overlap { n, p: q, q: p });
            }
            if n - m <= q {
                return Err(HvectorError::Gap { n, m, q });
            }
        }
        Ok(())
    }
}

/// The truncated vector from the blocks with `n ≤ horizon`.
pub fn build_vector(
    schedule: &TargetSchedule,
    w: &WeightSequence,
    horizon: u64,
) -> Result<TruncatedVector, HvectorError> {
    let mut entries: Vec<(u64, Scalar)> = Vec::new();
    let mut last_end: Option<u64> = None;
    for (n, p) in schedule.owners(horizon) {
        if last_end.is_some_and(|e| n <= e) {
            return Err(HvectorError::Collision(n));
        }
        last_end = Some(n + p);
        for (j, y) in schedule.target(p).entries() {
            entries.push((n + j, y / &w.varpi(n + j)));
        }
    }
    Ok(TruncatedVector::from_entries(Space::C0, entries))
}

/// Largest `|x_{n+j}|` over the blocks of family `p`.
pub fn block_sup_norms(schedule: &TargetSchedule, x: &TruncatedVector, horizon: u64) -> Vec<Scalar> {
    (1..=schedule.p_max())
        .map(|p| {
            schedule
                .family(p)
                .enumerate_up_to(horizon)
                .into_iter()
                .flat_map(|n| (0..=p).map(move |j| n + j))
                .map(|i| x.get(i).abs())
                .max()
                .unwrap_or_else(Scalar::zero)
        })
        .collect()
}

/// `sup_i |(B^m x̃ − y)_i| / ϖ_i`.
pub fn conjugate_distance(
    w: &WeightSequence,
    x_tilde: &TruncatedVector,
    y: &TruncatedVector,
    m: u64,
) -> Scalar {
    let d = backward_apply(&WeightSequence::unweighted(), x_tilde, m).sub(&y.in_space(x_tilde.space()));
    d.entries().map(|(i, v)| &v.abs() / &w.varpi(i)).max().unwrap_or_else(Scalar::zero)
}

/// `‖B_w^m x − φ_v(y)‖_∞`.
pub fn weighted_distance(
    w: &WeightSequence,
    x: &TruncatedVector,
    y: &TruncatedVector,
    m: u64,
) -> Result<Scalar, HvectorError> {
    let target = conjugate_to_unweighted(w, &y.in_space(Space::C0))?;
    Ok(backward_apply(w, x, m).sub(&target).sup_norm())
}

/// Every `m ∈ A_q` with `m + p_max ≤ horizon` must give distance at most
/// `2^{−q}` plus the slack `2^{−p_max}` of the omitted families.
pub fn verify_orbit(
    schedule: &TargetSchedule,
    w: &WeightSequence,
    x: &TruncatedVector,
    horizon: u64,
) -> Result<CriterionReport, HvectorError> {
    let p_max = schedule.p_max();
    let safe = horizon.saturating_sub(p_max);
    let x_tilde = conjugate_inverse(w, x)?;
    let slack = Scalar::pow2(-(p_max as i64));
    let mut b = ReportBuilder::new(CriterionId::HvectorOrbit, horizon);
    b.param("weights", w.label())
        .param("families", schedule.families.iter().map(IndexSet::label).collect::<Vec<_>>())
        .param("targets", schedule.targets.iter().map(TruncatedVector::to_json).collect::<Vec<_>>());
    let mut maxima = Vec::new();
    for q in 1..=p_max {
        let y = schedule.target(q);
        let bound = &Scalar::pow2(-(q as i64)) + &slack;
        let ms = schedule.family(q).enumerate_up_to(safe);
        let dists: Vec<(u64, Scalar)> =
            ms.par_iter().map(|&m| (m, conjugate_distance(w, &x_tilde, y, m))).collect();
        let mut tally = Tally::default();
        for (m, d) in &dists {
            tally.record(d <= &bound, || Witness::new(format!("orbit-q{q}"), vec![q, *m], d));
        }
        let max = dists.iter().map(|(_, d)| d.clone()).max().unwrap_or_else(Scalar::zero);
        maxima.push(max.to_string());
        b.exact(&format!("orbit-q{q}"), [0, safe], tally);
    }
    let eps: Vec<String> = (1..=p_max).map(|p| epsilon(p, w.sup_weight()).to_string()).collect();
    b.detail("safe_horizon", safe)
        .detail("slack", slack.to_string())
        .detail("max_distance", maxima)
        .detail("epsilon", eps);
    if safe < horizon {
        b.note(format!("indices m in ({safe}, {horizon}] skipped: blocks would leave the window"));
    }
    Ok(b.finish())
}
