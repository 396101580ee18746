//! Finite-horizon checkers for hypercyclicity criteria of shifts and of
//! general operator sequences.
//!
//! Exact conditions are verified over the whole checked range and fail with
//! a concrete violating tuple. Asymptotic conditions (growth, convergence,
//! decay of a supremum) can only fail on a concrete violation; otherwise they
//! are recorded as open, which does not block an overall pass when some
//! exact condition was verified.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::index_sets::IndexSet;
use crate::scalar::Scalar;
use crate::shift_ops::{backward_apply, forward_apply_weighted, Space, TruncatedVector, WeightSequence};

/// Violations kept per condition; the full count is always reported.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriterionError {
    #[error("precondition `{condition}` fails at {indices:?}")]
    Precondition { condition: String, indices: Vec<u64> },
    #[error("invalid parameter: {0}")]
    Param(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    ShiftUpper,
    ShiftGeneral,
    SeriesTail,
    Ahc,
    Ahc2,
    BirkhoffB,
    HvectorOrbit,
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    Passed,
    Failed,
    /// Asymptotic and not contradicted on the checked range.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: String,
    pub indices: Vec<u64>,
    pub value: String,
}

impl Witness {
    pub fn new(condition: impl Into<String>, indices: Vec<u64>, value: impl ToString) -> Self {
        Witness { condition: condition.into(), indices, value: value.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub condition: String,
    pub kind: ConditionKind,
    pub status: ConditionStatus,
    /// Inclusive index range the condition was checked on.
    pub range: [u64; 2],
    pub checks: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub parameters: BTreeMap<String, Json>,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub conditions: Vec<ConditionRecord>,
    /// Computed quantities such as cutoffs and slacks.
    pub details: BTreeMap<String, Json>,
    pub notes: Vec<String>,
    pub horizon: u64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn to_json(&self) -> Json {
        serde_json::to_value(self).expect("report serialises")
    }

    /// Plain-text verdict table.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} horizon={} verdict={}", self.criterion, self.horizon, self.verdict);
        for c in &self.conditions {
            let status = match c.status {
                ConditionStatus::Passed => "passed",
                ConditionStatus::Failed => "FAILED",
                ConditionStatus::Open => "open",
            };
            let _ = writeln!(
                s,
                "  {:<28} {:<10} {:<7} [{}, {}] checks={} violations={}",
                c.condition,
                match c.kind {
                    ConditionKind::Exact => "exact",
                    ConditionKind::Asymptotic => "asymptotic",
                },
                status,
                c.range[0],
                c.range[1],
                c.checks,
                c.violations
            );
        }
        for w in &self.witnesses {
            let _ = writeln!(s, "  witness {} at {:?}: {}", w.condition, w.indices, w.value);
        }
        for (k, v) in &self.details {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

/// Counts checks and keeps the first few violations of one condition.
#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub checks: u64,
    pub violations: u64,
    pub samples: Vec<Witness>,
}

impl Tally {
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.samples.len() < MAX_WITNESSES {
                self.samples.push(witness());
            }
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.violations += other.violations;
        let room = MAX_WITNESSES.saturating_sub(self.samples.len());
        self.samples.extend(other.samples.into_iter().take(room));
    }
}

pub struct ReportBuilder {
    report: CriterionReport,
}

impl ReportBuilder {
    pub fn new(criterion: CriterionId, horizon: u64) -> Self {
        ReportBuilder {
            report: CriterionReport {
                criterion,
                parameters: BTreeMap::new(),
                verdict: Verdict::Inconclusive,
                witnesses: Vec::new(),
                conditions: Vec::new(),
                details: BTreeMap::new(),
                notes: Vec::new(),
                horizon,
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.report.parameters.insert(key.into(), serde_json::to_value(value).expect("serialisable"));
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.report.details.insert(key.into(), serde_json::to_value(value).expect("serialisable"));
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.report.notes.push(note.into());
        self
    }

    pub fn witness(&mut self, w: Witness) -> &mut Self {
        self.report.witnesses.push(w);
        self
    }

    fn push(&mut self, name: &str, kind: ConditionKind, range: [u64; 2], tally: Tally) {
        let status = match (tally.violations, kind) {
            (0, ConditionKind::Exact) => ConditionStatus::Passed,
            (0, ConditionKind::Asymptotic) => ConditionStatus::Open,
            _ => ConditionStatus::Failed,
        };
        self.report.witnesses.extend(tally.samples);
        self.report.conditions.push(ConditionRecord {
            condition: name.into(),
            kind,
            status,
            range,
            checks: tally.checks,
            violations: tally.violations,
        });
    }

    pub fn exact(&mut self, name: &str, range: [u64; 2], tally: Tally) -> &mut Self {
        self.push(name, ConditionKind::Exact, range, tally);
        self
    }

    pub fn asymptotic(&mut self, name: &str, range: [u64; 2], tally: Tally) -> &mut Self {
        self.push(name, ConditionKind::Asymptotic, range, tally);
        self
    }

    pub fn finish(mut self) -> CriterionReport {
        let conds = &self.report.conditions;
        self.report.verdict = if conds.iter().any(|c| c.status == ConditionStatus::Failed) {
            Verdict::Fail
        } else if conds
            .iter()
            .any(|c| c.kind == ConditionKind::Exact && c.status == ConditionStatus::Passed)
        {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        self.report
    }
}

/// `|ϖ_n| ≥ floor` for the checked `n ≥ tail_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFloor {
    pub tail_start: u64,
    pub floor: Scalar,
}

impl GrowthFloor {
    pub fn new(tail_start: u64, floor: Scalar) -> Self {
        GrowthFloor { tail_start, floor }
    }

    fn to_json(&self) -> Json {
        serde_json::json!({ "tail_start": self.tail_start, "floor": self.floor.to_string() })
    }
}

fn varpi_table(w: &WeightSequence, upto: u64) -> Vec<Scalar> {
    (0..=upto).into_par_iter().map(|n| w.varpi(n).abs()).collect()
}

fn growth_tally(
    varpi: &[Scalar],
    elems: &[u64],
    offset: u64,
    growth: &GrowthFloor,
    label: &str,
) -> Tally {
    let mut t = Tally::default();
    for &n in elems.iter().filter(|&&n| n >= growth.tail_start) {
        let v = &varpi[(n + offset) as usize];
        t.record(v >= &growth.floor, || Witness::new(label, vec![n], v));
    }
    t
}

/// Representative pair `(n, m)` for each positive difference `n − m`.
fn difference_reps(upper: &[u64], lower: &[u64], horizon: u64) -> Vec<Option<(u64, u64)>> {
    let mut reps = vec![None; horizon as usize + 1];
    for &n in upper {
        for &m in lower.iter().take_while(|&&m| m < n) {
            let d = (n - m) as usize;
            if reps[d].is_none() {
                reps[d] = Some((n, m));
            }
        }
    }
    reps
}

/// Shift criterion with a single set: `ϖ_{n−m+p} > M` for all `n > m` in
/// `A`, and growth of `ϖ_n` along `A`.
pub fn check_shift_upper(
    w: &WeightSequence,
    a: &IndexSet,
    p: u64,
    m_bound: &Scalar,
    horizon: u64,
    growth: &GrowthFloor,
) -> Result<CriterionReport, CriterionError> {
    if m_bound <= &Scalar::zero() {
        return Err(CriterionError::Param("M must be positive".into()));
    }
    let elems = a.enumerate_up_to(horizon);
    if let Some(&n) = elems.iter().find(|&&n| n < p) {
        return Err(CriterionError::Precondition { condition: "A within [p, inf)".into(), indices: vec![n] });
    }
    let varpi = varpi_table(w, horizon + p);
    let mut b = ReportBuilder::new(CriterionId::ShiftUpper, horizon);
    b.param("weights", w.label())
        .param("set", a.label())
        .param("p", p)
        .param("M", m_bound.to_string())
        .param("growth_floor", growth.to_json());
    let mut pairs = Tally::default();
    for (d, rep) in difference_reps(&elems, &elems, horizon).into_iter().enumerate() {
        let Some((n, m)) = rep else { continue };
        let v = &varpi[d + p as usize];
        pairs.record(v > m_bound, || Witness::new("pairwise", vec![n, m], v));
    }
    let pair_count = (elems.len() as u64) * (elems.len().saturating_sub(1) as u64) / 2;
    b.detail("pairs", pair_count).detail("distinct_differences", pairs.checks);
    b.exact("pairwise", [0, horizon], pairs);
    let g = growth_tally(&varpi, &elems, 0, growth, "growth");
    b.asymptotic("growth", [growth.tail_start, horizon], g);
    if elems.len() < 2 {
        b.note("fewer than two elements: the pairwise condition is vacuous");
    }
    Ok(b.finish())
}

/// Shift criterion with disjoint families `A_1, A_2, …` and bounds `M_q`:
/// for `n ∈ A_p`, `m ∈ A_q`, `p ≤ q`, `min_j ϖ_{|n−m|+j} > M_q` with
/// `j ≤ p` when `n > m` and `j ≤ q` when `n < m`.
pub fn check_shift_general(
    w: &WeightSequence,
    families: &[IndexSet],
    m_bounds: &[Scalar],
    horizon: u64,
    growth: &GrowthFloor,
) -> Result<CriterionReport, CriterionError> {
    if families.is_empty() || families.len() != m_bounds.len() {
        return Err(CriterionError::Param("need one bound M_p per family".into()));
    }
    if m_bounds.iter().any(|m| m <= &Scalar::zero()) {
        return Err(CriterionError::Param("bounds M_p must be positive".into()));
    }
    if let Some(i) = m_bounds.windows(2).position(|x| x[1] < x[0]) {
        return Err(CriterionError::Param(format!("bounds must be nondecreasing (p={})", i + 2)));
    }
    if m_bounds.len() > 1 && m_bounds.last() <= m_bounds.first() {
        return Err(CriterionError::Param("bounds must increase overall".into()));
    }
    let q_max = families.len() as u64;
    let sets: Vec<Vec<u64>> = families.par_iter().map(|a| a.enumerate_up_to(horizon)).collect();
    let varpi = varpi_table(w, horizon + q_max + 1);
    let mut b = ReportBuilder::new(CriterionId::ShiftGeneral, horizon);
    b.param("weights", w.label())
        .param("families", families.iter().map(IndexSet::label).collect::<Vec<_>>())
        .param("M", m_bounds.iter().map(Scalar::to_string).collect::<Vec<_>>())
        .param("growth_floor", growth.to_json());

    let mut disjoint = Tally::default();
    let mut owner: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, s) in sets.iter().enumerate() {
        for &n in s {
            let p = i as u64 + 1;
            match owner.insert(n, p) {
                Some(prev) => disjoint.record(false, || Witness::new("disjoint", vec![n, prev, p], "shared")),
                None => disjoint.checks += 1,
            }
        }
    }
    b.exact("disjoint", [0, horizon], disjoint);

    let window_ok = |d: u64, jmax: u64, bound: &Scalar| -> Result<(), (u64, Scalar)> {
        for j in 0..=jmax {
            let v = &varpi[(d + j) as usize];
            if v <= bound {
                return Err((j, v.clone()));
            }
        }
        Ok(())
    };
    let per_p: Vec<Tally> = (0..sets.len())
        .into_par_iter()
        .map(|pi| {
            let p = pi as u64 + 1;
            let mut t = Tally::default();
            for qi in pi..sets.len() {
                let q = qi as u64 + 1;
                let bound = &m_bounds[qi];
                let (ap, aq) = (&sets[pi], &sets[qi]);
                for (d, rep) in difference_reps(ap, aq, horizon).into_iter().enumerate() {
                    let Some((n, m)) = rep else { continue };
                    let r = window_ok(d as u64, p, bound);
                    t.record(r.is_ok(), || {
                        let (j, v) = r.clone().unwrap_err();
                        Witness::new("pairwise", vec![p, q, n, m, j], v)
                    });
                }
                for (d, rep) in difference_reps(aq, ap, horizon).into_iter().enumerate() {
                    let Some((m, n)) = rep else { continue };
                    let r = window_ok(d as u64, q, bound);
                    t.record(r.is_ok(), || {
                        let (j, v) = r.clone().unwrap_err();
                        Witness::new("pairwise", vec![p, q, n, m, j], v)
                    });
                }
            }
            t
        })
        .collect();
    let mut pairs = Tally::default();
    for t in per_p {
        pairs.merge(t);
    }
    b.exact("pairwise", [0, horizon], pairs);

    let mut g = Tally::default();
    for (i, s) in sets.iter().enumerate() {
        g.merge(growth_tally(&varpi, s, i as u64 + 1, growth, "growth"));
    }
    b.asymptotic("growth", [growth.tail_start, horizon], g);
    Ok(b.finish())
}

/// Tail smallness of `Σ_{n∈A} e_{n+p}/ϖ_{n+p}` in `space`, with a cutoff of
/// at most `horizon/2`.
pub fn check_series_tail(
    w: &WeightSequence,
    a: &IndexSet,
    p: u64,
    space: Space,
    horizon: u64,
    epsilon: &Scalar,
) -> Result<CriterionReport, CriterionError> {
    if epsilon <= &Scalar::zero() {
        return Err(CriterionError::Param("epsilon must be positive".into()));
    }
    let elems = a.enumerate_up_to(horizon);
    let coef: Vec<Scalar> = elems.par_iter().map(|&n| w.varpi(n + p).abs().recip()).collect();
    let limit = horizon / 2;
    let mut b = ReportBuilder::new(CriterionId::SeriesTail, horizon);
    b.param("weights", w.label())
        .param("set", a.label())
        .param("p", p)
        .param("space", space.to_string())
        .param("epsilon", epsilon.to_string());
    let mut tail = Tally::default();
    let cutoff = match space {
        Space::C0 => {
            let last_bad = coef.iter().rposition(|c| c >= epsilon);
            match last_bad {
                None => Some(0),
                Some(i) if elems[i] < limit => Some(elems[i] + 1),
                Some(i) => {
                    tail.record(false, || Witness::new("tail", vec![elems[i]], &coef[i]));
                    None
                }
            }
        }
        Space::Lp(e) => {
            let target = epsilon.powi(e);
            let mut suffix = Scalar::zero();
            let mut best: Option<u64> = elems.first().map_or(Some(0), |_| None);
            let mut at_limit: Option<(u64, Scalar)> = None;
            for (i, c) in coef.iter().enumerate().rev() {
                suffix = &suffix + &c.powi(e);
                if elems[i] <= limit {
                    if suffix < target {
                        best = Some(elems[i]);
                    } else if at_limit.is_none() {
                        at_limit = Some((elems[i], suffix.clone()));
                    }
                }
            }
            if elems.iter().all(|&n| n > limit) && suffix < target {
                best = Some(0);
            }
            match (best, at_limit) {
                (Some(c), _) => Some(c),
                (None, Some((n, s))) => {
                    tail.record(false, || Witness::new("tail", vec![n], s));
                    None
                }
                (None, None) => Some(0),
            }
        }
    };
    let start = cutoff.unwrap_or(limit);
    let checked = elems.iter().filter(|&&n| n >= start).count() as u64;
    tail.checks += checked;
    if let Some(c) = cutoff {
        b.detail("cutoff", c);
    }
    b.exact("tail", [start, horizon], tail);
    b.asymptotic("convergence", [start, horizon], Tally::default());
    Ok(b.finish())
}

/// Operator oracle `(n, x) ↦ T_n x`.
pub type Operator<'a> = dyn Fn(u64, &TruncatedVector) -> TruncatedVector + Sync + 'a;

/// `T_n = B_w^n`.
pub fn backward_oracle(w: &WeightSequence) -> impl Fn(u64, &TruncatedVector) -> TruncatedVector + Sync + '_ {
    move |n, x| backward_apply(w, x, n)
}

/// `S_n = S_w^n`, the weighted right inverse.
pub fn forward_oracle(w: &WeightSequence) -> impl Fn(u64, &TruncatedVector) -> TruncatedVector + Sync + '_ {
    move |n, x| forward_apply_weighted(w, x, n)
}

/// Exact upper bound on the norm: sup on c₀, `ℓ¹` elsewhere.
pub fn norm_upper(v: &TruncatedVector) -> Scalar {
    match v.space() {
        Space::C0 => v.sup_norm(),
        Space::Lp(_) => v.entries().fold(Scalar::zero(), |acc, (_, x)| &acc + &x.abs()),
    }
}

/// Hypotheses of the A-hypercyclicity criterion with the witness set `A`
/// and the caller's density predicate `delta_check`.
#[allow(clippy::too_many_arguments)]
pub fn check_ahc_hypotheses(
    t: &Operator<'_>,
    s: &Operator<'_>,
    x0: &[TruncatedVector],
    y0: &[TruncatedVector],
    a: &IndexSet,
    delta_check: &(dyn Fn(&IndexSet) -> bool + Sync),
    epsilon: &Scalar,
    op_norm_bound: &Scalar,
    horizon: u64,
) -> Result<CriterionReport, CriterionError> {
    if epsilon <= &Scalar::zero() {
        return Err(CriterionError::Param("epsilon must be positive".into()));
    }
    let elems = a.enumerate_up_to(horizon);
    let mut b = ReportBuilder::new(CriterionId::Ahc, horizon);
    b.param("set", a.label())
        .param("epsilon", epsilon.to_string())
        .param("operator_norm_bound", op_norm_bound.to_string())
        .param("x0", x0.len())
        .param("y0", y0.len());

    let mut small = Tally::default();
    for (i, x) in x0.iter().enumerate() {
        let hits: Vec<u64> = elems
            .par_iter()
            .copied()
            .filter(|&n| t(n, x).norm_lt(epsilon))
            .collect();
        let count = hits.len() as u64;
        let set = IndexSet::finite(format!("B(x{i})"), hits);
        small.record(delta_check(&set), || Witness::new("small-orbit-density", vec![i as u64], count));
    }
    b.exact("small-orbit-density", [0, horizon], small);

    let mut conv = Tally::default();
    let mut approx = Tally::default();
    let mut slacks = Vec::new();
    for (i, y) in y0.iter().enumerate() {
        let mut z = TruncatedVector::zero(y.space());
        let mut tail = TruncatedVector::zero(y.space());
        let mut last = TruncatedVector::zero(y.space());
        for &n in &elems {
            last = s(n, y);
            z = z.add(&last);
            if n > horizon / 2 {
                tail = tail.add(&last);
            }
        }
        let slack = &norm_upper(&last) * op_norm_bound;
        conv.checks += 1;
        if !tail.norm_lt(epsilon) {
            b.note(format!("y{i}: partial-sum tail beyond horizon/2 is not yet below epsilon"));
        }
        let bound = epsilon + &slack;
        let results: Vec<(u64, bool, f64)> = elems
            .par_iter()
            .map(|&m| {
                let d = t(m, &z).sub(y);
                (m, d.norm_lt(&bound), d.norm())
            })
            .collect();
        for (m, ok, norm) in results {
            approx.record(ok, || Witness::new("approximation", vec![i as u64, m], norm));
        }
        slacks.push(slack.to_string());
    }
    b.asymptotic("convergence", [horizon / 2, horizon], conv);
    b.exact("approximation", [0, horizon], approx);
    b.detail("truncation_slack", slacks);
    Ok(b.finish())
}

/// All subsets of `elems` with at most `f_max` elements, as index lists.
fn small_subsets(len: usize, f_max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..f_max {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l: &usize| l + 1);
            for i in start..len {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Second version of the criterion: family `A_k` is paired with target
/// `y0[k]` and tolerance `epsilons[k]`.
#[allow(clippy::too_many_arguments)]
pub fn check_ahc2_hypotheses(
    t: &Operator<'_>,
    s: &Operator<'_>,
    y0: &[TruncatedVector],
    families: &[IndexSet],
    epsilons: &[Scalar],
    f_max: usize,
    horizon: u64,
) -> Result<CriterionReport, CriterionError> {
    if families.len() != y0.len() || families.len() != epsilons.len() {
        return Err(CriterionError::Param("need one target and one epsilon per family".into()));
    }
    if epsilons.iter().any(|e| e <= &Scalar::zero()) {
        return Err(CriterionError::Param("epsilons must be positive".into()));
    }
    let sets: Vec<Vec<u64>> = families.iter().map(|a| a.enumerate_up_to(horizon)).collect();
    let all_m: Vec<u64> = {
        let mut v: Vec<u64> = sets.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut b = ReportBuilder::new(CriterionId::Ahc2, horizon);
    b.param("families", families.iter().map(IndexSet::label).collect::<Vec<_>>())
        .param("epsilons", epsilons.iter().map(Scalar::to_string).collect::<Vec<_>>())
        .param("f_max", f_max);

    let mut conv = Tally::default();
    let mut finite = Tally::default();
    let mut sups = Vec::new();
    for (k, (set, y)) in sets.iter().zip(y0).enumerate() {
        let eps = &epsilons[k];
        let images: Vec<TruncatedVector> = set.iter().map(|&n| s(n, y)).collect();
        let tail = set
            .iter()
            .zip(&images)
            .filter(|(&n, _)| n > horizon / 2)
            .fold(TruncatedVector::zero(y.space()), |acc, (_, v)| acc.add(v));
        conv.checks += 1;
        if !tail.norm_lt(eps) {
            b.note(format!("family {}: partial-sum tail beyond horizon/2 is not yet below epsilon", k + 1));
        }

        let mut subsets = small_subsets(set.len(), f_max);
        if set.len() > f_max {
            subsets.push((0..set.len()).collect());
        }
        let tallies: Vec<Tally> = subsets
            .par_iter()
            .map(|f| {
                let mut tl = Tally::default();
                let sum = f.iter().fold(TruncatedVector::zero(y.space()), |acc, &i| acc.add(&images[i]));
                let members: Vec<u64> = f.iter().map(|&i| set[i]).collect();
                for &m in all_m.iter().filter(|m| !members.contains(m)) {
                    let v = t(m, &sum);
                    tl.record(v.norm_lt(eps), || {
                        let mut idx = vec![k as u64 + 1, m];
                        idx.extend(&members);
                        Witness::new("finite-sums", idx, v.norm())
                    });
                }
                tl
            })
            .collect();
        for tl in tallies {
            finite.merge(tl);
        }

        let sup = set
            .par_iter()
            .map(|&m| t(m, &s(m, y)).sub(y).norm_power())
            .max()
            .unwrap_or_else(Scalar::zero);
        sups.push(sup);
    }
    b.asymptotic("convergence", [horizon / 2, horizon], conv);
    b.exact("finite-sums", [0, horizon], finite);
    let mut decay = Tally::default();
    for k in 1..sups.len() {
        let ok = sups[k - 1].is_zero() && sups[k].is_zero() || sups[k] < sups[k - 1];
        decay.record(ok, || Witness::new("right-inverse-decay", vec![k as u64 + 1], &sups[k]));
    }
    if sups.len() == 1 && !sups[0].is_zero() {
        b.note("a single family cannot show decay of the right-inverse error");
    }
    b.detail("right_inverse_sup_norm_power", sups.iter().map(Scalar::to_string).collect::<Vec<_>>());
    b.asymptotic("right-inverse-decay", [0, horizon], decay);
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum BirkhoffMode {
    /// `card{n ≤ N : T^n x ∈ V}/(N+1) > δ` for some `N ≤ horizon`.
    Natural,
    /// `card{n ∈ [m, m+N] : T^n x ∈ V}/(N+1) > δ` for some window start.
    Banach { window: u64 },
}

#[derive(Debug, Clone)]
pub struct Ball {
    pub center: TruncatedVector,
    pub radius: Scalar,
}

impl Ball {
    pub fn new(center: TruncatedVector, radius: Scalar) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, x: &TruncatedVector) -> bool {
        x.sub(&self.center.in_space(x.space())).norm_lt(&self.radius)
    }
}

/// Searches sample orbits for a visit frequency to `v` above `delta`.
pub fn check_birkhoff_condition_b(
    t: &Operator<'_>,
    u: &Ball,
    v: &Ball,
    delta: &Scalar,
    samples: &[TruncatedVector],
    mode: BirkhoffMode,
    horizon: u64,
) -> Result<CriterionReport, CriterionError> {
    if u.radius <= Scalar::zero() || v.radius <= Scalar::zero() {
        return Err(CriterionError::Param("radii must be positive".into()));
    }
    if let Some(i) = samples.iter().position(|x| !u.contains(x)) {
        return Err(CriterionError::Precondition { condition: "sample in U".into(), indices: vec![i as u64] });
    }
    let mut b = ReportBuilder::new(CriterionId::BirkhoffB, horizon);
    b.param("delta", delta.to_string()).param("mode", mode).param("samples", samples.len());
    let mut range = Tally::default();
    let positive = delta > &Scalar::zero();
    range.record(positive && delta < &Scalar::one(), || Witness::new("delta-range", vec![], delta));
    if range.violations > 0 {
        b.exact("delta-range", [0, 0], range);
        return Ok(b.finish());
    }
    let found: Vec<Option<(u64, u64, u64)>> = samples
        .par_iter()
        .map(|x| {
            let mut visits = Vec::with_capacity(horizon as usize + 1);
            let mut cur = x.clone();
            for n in 0..=horizon {
                if n > 0 {
                    cur = t(1, &cur);
                }
                visits.push(v.contains(&cur));
            }
            let exceeds = |count: u64, len: u64| Scalar::from(count as i64) > &Scalar::from(len as i64) * delta;
            match mode {
                BirkhoffMode::Natural => {
                    let mut c = 0u64;
                    for (n, &hit) in visits.iter().enumerate() {
                        c += hit as u64;
                        if exceeds(c, n as u64 + 1) {
                            return Some((0, n as u64, c));
                        }
                    }
                    None
                }
                BirkhoffMode::Banach { window } => {
                    if window > horizon {
                        return None;
                    }
                    let w = window as usize;
                    let mut c = visits[..=w].iter().filter(|&&h| h).count() as u64;
                    for m in 0..=(horizon - window) as usize {
                        if m > 0 {
                            c = c + visits[m + w] as u64 - visits[m - 1] as u64;
                        }
                        if exceeds(c, window + 1) {
                            return Some((m as u64, window, c));
                        }
                    }
                    None
                }
            }
        })
        .collect();
    let mut hit = Tally::default();
    match found.iter().enumerate().find_map(|(i, f)| f.map(|f| (i, f))) {
        Some((i, (m, n, c))) => {
            hit.checks = 1;
            b.witness(Witness::new("frequency", vec![i as u64, m, n], c));
            b.exact("frequency", [0, horizon], hit);
        }
        None => {
            b.note("no sample orbit exceeded delta within the horizon");
            b.asymptotic("frequency", [0, horizon], hit);
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::bmpp::{Bmpp, JSchedule};
    use crate::constructions::Params;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    fn e(n: u64) -> TruncatedVector {
        TruncatedVector::unit(Space::C0, n)
    }

    fn floor(v: &str) -> GrowthFloor {
        GrowthFloor::new(0, s(v))
    }

    #[test]
    fn shift_upper_bmpp_desk() {
        let c = Bmpp::new(Params::desk()).unwrap();
        let a = c.hitting_set(2, JSchedule::minimal(3, 2)).unwrap();
        let r = check_shift_upper(&c.weights(), &a, 1, &s("4"), 10_000, &GrowthFloor::new(5000, s("4")))
            .unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
    }

    #[test]
    fn shift_upper_trivial_cases() {
        let w = WeightSequence::unweighted();
        let a = IndexSet::finite("pair", [1, 5]);
        let r = check_shift_upper(&w, &a, 1, &s("2"), 10, &floor("1")).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witnesses[0].indices, vec![5, 1]);

        let single = IndexSet::finite("one", [1]);
        let r = check_shift_upper(&w, &single, 1, &s("2"), 10, &floor("1")).unwrap();
        assert_ne!(r.verdict, Verdict::Fail);

        let low = IndexSet::finite("low", [0, 4]);
        assert!(matches!(
            check_shift_upper(&w, &low, 1, &s("2"), 10, &floor("1")),
            Err(CriterionError::Precondition { .. })
        ));
    }

    #[test]
    fn shift_general_rejects_overlap_and_matches_upper() {
        let w = WeightSequence::geometric(s("2"));
        let a = IndexSet::finite("a", [2, 10, 30]);
        let b = IndexSet::finite("b", [10, 50]);
        let r = check_shift_general(&w, &[a.clone(), b], &[s("1"), s("2")], 60, &floor("1")).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witnesses.iter().any(|x| x.condition == "disjoint" && x.indices[0] == 10));

        for m in ["3", "100", "300"] {
            let g = check_shift_general(&w, std::slice::from_ref(&a), &[s(m)], 60, &floor("1")).unwrap();
            let u = check_shift_upper(&w, &a, 1, &s(m), 60, &floor("1")).unwrap();
            if g.passed() {
                assert!(u.passed(), "M={m}");
            }
        }
    }

    #[test]
    fn series_tail_examples() {
        let w = WeightSequence::geometric(s("2"));
        let r = check_series_tail(&w, &IndexSet::naturals(), 0, Space::C0, 100, &s("1/1000")).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.details["cutoff"], 10);

        let r = check_series_tail(
            &WeightSequence::unweighted(),
            &IndexSet::naturals(),
            0,
            Space::Lp(1),
            100,
            &s("1/1000"),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn ahc_trivial_cases() {
        let id = |_: u64, x: &TruncatedVector| x.clone();
        let a = IndexSet::range(0, Some(20));
        let r = check_ahc_hypotheses(
            &id,
            &id,
            &[e(0)],
            &[],
            &a,
            &|b: &IndexSet| b.count_up_to(20) > 0,
            &s("1/2"),
            &s("1"),
            20,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);

        let w = WeightSequence::geometric(s("2"));
        let (t, sh) = (backward_oracle(&w), forward_oracle(&w));
        let r = check_ahc_hypotheses(
            &t,
            &sh,
            &[],
            &[TruncatedVector::zero(Space::C0)],
            &a,
            &|_: &IndexSet| true,
            &s("1/2"),
            &s("2"),
            20,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn ahc_shift_instantiation() {
        let w = WeightSequence::geometric(s("2"));
        let (t, sh) = (backward_oracle(&w), forward_oracle(&w));
        let a = IndexSet::multiples(10u32.into(), 1);
        let r = check_ahc_hypotheses(
            &t,
            &sh,
            &[e(0), e(3)],
            &[e(0).add(&e(1))],
            &a,
            &|b: &IndexSet| b.count_up_to(200) >= 15,
            &s("1/100"),
            &s("2"),
            200,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
    }

    #[test]
    fn ahc2_cases() {
        let zero = |_: u64, x: &TruncatedVector| TruncatedVector::zero(x.space());
        let fams = [IndexSet::finite("a", [3, 9]), IndexSet::finite("b", [20, 40])];
        let y = e(0);
        let r = check_ahc2_hypotheses(&zero, &zero, &[y.clone(), y.clone()], &fams, &[s("1"), s("1")], 3, 50)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.condition("right-inverse-decay").unwrap().status, ConditionStatus::Failed);

        let w = WeightSequence::geometric(s("2"));
        let (t, sh) = (backward_oracle(&w), forward_oracle(&w));
        let r = check_ahc2_hypotheses(&t, &sh, &[y.clone(), y], &fams, &[s("1/4"), s("1/8")], 3, 50).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
        assert_eq!(small_subsets(4, 2).len(), 1 + 4 + 6);
    }

    #[test]
    fn birkhoff_cases() {
        let w = WeightSequence::unweighted();
        let t = backward_oracle(&w);
        let block = TruncatedVector::from_entries(Space::C0, (0..40).map(|i| (i, Scalar::one())));
        let u = Ball::new(block.clone(), s("1"));
        let v = Ball::new(e(0), s("1/2"));
        let r = check_birkhoff_condition_b(&t, &u, &v, &s("1/2"), std::slice::from_ref(&block), BirkhoffMode::Natural, 60)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let v = Ball::new(block.clone(), s("1/2"));
        let r = check_birkhoff_condition_b(&t, &u, &v, &s("1/2"), std::slice::from_ref(&block), BirkhoffMode::Natural, 60)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.witnesses[0].indices, vec![0, 0, 0]);
        let r =
            check_birkhoff_condition_b(&t, &u, &v, &s("1"), std::slice::from_ref(&block), BirkhoffMode::Natural, 60).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        // The orbit of a block reaches 0 at n = 41: no natural-density
        // witness, but a full window right after.
        let x = TruncatedVector::from_entries(Space::C0, (0..=40).map(|i| (i, Scalar::one())));
        let u = Ball::new(x.clone(), s("1"));
        let v = Ball::new(TruncatedVector::zero(Space::C0), s("1/2"));
        let r = check_birkhoff_condition_b(&t, &u, &v, &s("9/10"), std::slice::from_ref(&x), BirkhoffMode::Natural, 120)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = check_birkhoff_condition_b(&t, &u, &v, &s("9/10"), &[x], BirkhoffMode::Banach { window: 9 }, 120)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.witnesses[0].indices, vec![0, 41, 9]);
    }

    #[test]
    fn reports_are_deterministic() {
        let c = Bmpp::new(Params::desk()).unwrap();
        let a = c.hitting_set(1, JSchedule::minimal(3, 1)).unwrap();
        let run = || {
            serde_json::to_string(
                &check_shift_upper(&c.weights(), &a, 1, &s("2"), 2000, &floor("2")).unwrap(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
