//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Supplementary rows (marked `supp`) exercise the unit-offset block
//! variant and do not affect the exit status.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use hyplab_core::constructions::bg::{Bg, BgVariant};
use hyplab_core::constructions::bmpp::{Bmpp, JSchedule};
use hyplab_core::constructions::br::Br;
use hyplab_core::constructions::vfhc::Vfhc;
use hyplab_core::constructions::{ConstructionError, Params};
use hyplab_core::criteria::{check_shift_general, GrowthFloor};
use hyplab_core::densities::{count, natural_density_profile, Mode, Value};
use hyplab_core::hvector::{build_vector, verify_orbit, TargetSchedule};
use hyplab_core::{IndexSet, Scalar};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use common::{bmpp_hitting, br_hitting, br_square_region, disagreement, interval_exponents, level_from, BgRef, Marked, VfhcRef};

struct Row {
    id: String,
    pass: bool,
    summary: String,
    secs: f64,
}

fn run(id: &str, f: impl FnOnce() -> (bool, String)) -> Row {
    let t = Instant::now();
    let (pass, summary) = f();
    Row { id: id.into(), pass, summary, secs: t.elapsed().as_secs_f64() }
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn f(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn pairwise_bound() -> (bool, String) {
    let k = 2u64;
    let c = Bmpp::new(Params::desk()).unwrap();
    let schedule = JSchedule::minimal(3, k);
    let a = c.hitting_set(k, schedule.clone()).unwrap();
    let within = a.enumerate_up_to(10_000);
    let mut checked = 0u64;
    let mut bad = None;
    for (i, &n) in within.iter().enumerate() {
        for &m in &within[..i] {
            for p in 0..=k {
                checked += 1;
                if c.nu_u64(n - m + p) < k + p {
                    bad.get_or_insert((n, m, p));
                }
            }
        }
    }
    // The first block starts at 3^9 > 10^4, so also cover the first three
    // blocks exactly with big indices.
    let bk = BigUint::from(9u32);
    let mut elems = Vec::new();
    for m in 1..=3u64 {
        let base = num_traits::pow(BigUint::from(3u32), schedule.j(m).unwrap() as usize);
        for l in 0..=m {
            elems.push(&base + &bk * l);
        }
    }
    let members = elems.iter().all(|n| a.contains(n));
    let mut extended = 0u64;
    for (i, n) in elems.iter().enumerate() {
        for m in &elems[..i] {
            for p in 0..=k {
                extended += 1;
                if c.nu(&(n - m + p)) < BigUint::from(k + p) {
                    bad.get_or_insert((0, 0, p));
                }
            }
        }
    }
    let pass = bad.is_none() && members;
    let summary = format!(
        "hitting set has {} elements <= 10^4 ({checked} checks, vacuous); first 3 blocks: {} elements, {extended} checks; violation {:?}",
        within.len(),
        elems.len(),
        bad
    );
    (pass, summary)
}

fn level_set_bound() -> (bool, String) {
    let c = Bmpp::new(Params::desk()).unwrap();
    let tol = rat(1, 1_000_000_000);
    let mut rows = Vec::new();
    let mut pass = true;
    for k in [1u64, 2] {
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let r = c.level_set_bound(k, n, &tol).unwrap();
            pass &= r.holds();
            let bound = &r.main + &r.tail_slack;
            rows.push(format!("k={k} N={n}: {} <= {:.1}", r.count, f(&bound)));
        }
    }
    (pass, rows.join("; "))
}

fn br_density_floor() -> (bool, String) {
    let c = Br::new(Params::desk()).unwrap();
    let (q, k) = (2u64, 1u64);
    let (cnt, guaranteed) = c.hitting_count(k, q).unwrap();
    let n = 81 + 27;
    let estimate = rat(cnt, n + 1);
    let floor = BigRational::new(guaranteed.clone().into(), (n + 1).into());
    let pass = estimate >= floor;
    (pass, format!("N={n}: count {cnt}, estimate {estimate} >= floor {floor}"))
}

fn bg_families(bg: &Bg) -> Vec<IndexSet> {
    vec![bg.a_set(1), bg.a_set(2)]
}

fn bg_criterion(variant: BgVariant) -> (bool, String) {
    let horizon = 10_000;
    let pre = Bg::new(Params::desk(), variant, 2, horizon);
    let bg = Bg::unchecked(Params::desk(), variant).unwrap();
    let report = check_shift_general(
        &bg.weights(),
        &bg_families(&bg),
        &[Scalar::one(), Scalar::from(2)],
        horizon,
        &GrowthFloor::new(horizon / 2, Scalar::from(2)),
    )
    .unwrap();
    let pairs = report.condition("pairwise").unwrap();
    let first = report.witnesses.iter().find(|w| w.condition == "pairwise");
    let pre_text = match &pre {
        Ok(_) => "prechecks pass".to_string(),
        Err(e @ ConstructionError::BlockBoundary { .. }) => format!("precheck: {e}"),
        Err(e) => format!("precheck: {e}"),
    };
    let summary = format!(
        "{pre_text}; shift criterion {} ({} checks, {} violations{})",
        report.verdict,
        pairs.checks,
        pairs.violations,
        first.map_or(String::new(), |w| format!(", first (p,q,n,m,j)={:?} value {}", w.indices, w.value))
    );
    (pre.is_ok() && report.passed(), summary)
}

fn bg_density_floor() -> (bool, String) {
    let bg = Bg::unchecked(Params::desk(), BgVariant::Literal).unwrap();
    let b = 3u64;
    let grid: Vec<u64> = [1u64, 2, 5]
        .iter()
        .flat_map(|&s| [1_000u64, 10_000, 100_000].map(|d| s * d))
        .chain([1_000_000])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let a1 = bg.a_set(1);
    let profile = natural_density_profile(&a1, &grid, Mode::Lower).unwrap();
    let (c1, x, y) = (bg.c_set(1), bg.x_set(), bg.y_union(1));
    let n_max = *grid.last().unwrap();
    let (ce, xe, ye) = (c1.enumerate_up_to(n_max), x.enumerate_up_to(n_max), y.enumerate_up_to(n_max));
    let upto = |v: &[u64], h: u64| v.partition_point(|&e| e <= h) as u64;
    let mut pass = true;
    let mut min_floor: Option<BigRational> = None;
    let mut last = String::new();
    for (i, &h) in grid.iter().enumerate() {
        let h1 = h + 1;
        let thin = rat(upto(&xe, h) + upto(&ye, h), h1) - rat(1, 9 * b);
        let short = rat(1, b) - rat(upto(&ce, h), h1);
        let slack = thin.max(BigRational::zero()) + short.max(BigRational::zero());
        let floor = rat(8, 9 * b) - &slack;
        let value = profile.values[i].as_exact().unwrap().clone();
        pass &= value >= floor;
        if min_floor.as_ref().map_or(true, |m| &floor < m) {
            min_floor = Some(floor.clone());
        }
        if h == n_max {
            last = format!(
                "N={h}: count(A_1)={}, density {:.5} >= floor {:.5} (slack {:.5})",
                count(&a1, h),
                f(&value),
                f(&floor),
                f(&slack)
            );
        }
    }
    let inf = profile.running_inf[0].clone();
    let inf_ok = inf >= Value::Exact(min_floor.clone().unwrap());
    (pass && inf_ok, format!("{last}; running inf {:.5} over {} horizons", inf.to_f64(), grid.len()))
}

fn hvector_orbit(variant: BgVariant) -> (bool, String) {
    let safe = 10_000u64;
    let bg = Bg::unchecked(Params::desk(), variant).unwrap();
    let schedule = TargetSchedule::all_ones(bg_families(&bg));
    let p_max = schedule.p_max();
    let horizon = safe + p_max;
    if let Err(e) = schedule.check_invariants(horizon) {
        return (false, format!("schedule rejected: {e}"));
    }
    let w = bg.weights().tabulated(horizon + p_max + 1);
    let x = match build_vector(&schedule, &w, horizon) {
        Ok(x) => x,
        Err(e) => return (false, format!("build rejected: {e}")),
    };
    let report = verify_orbit(&schedule, &w, &x, horizon).unwrap();
    let slack: Scalar = report.details["slack"].as_str().unwrap().parse().unwrap();
    let slack_ok = slack <= Scalar::pow2(1 - p_max as i64);
    let per_q: Vec<String> = (1..=p_max)
        .map(|q| {
            let c = report.condition(&format!("orbit-q{q}")).unwrap();
            format!("q={q}: {} checks, {} violations, max distance {}", c.checks, c.violations, report.details["max_distance"][q as usize - 1])
        })
        .collect();
    let first = report.witnesses.first().map_or(String::new(), |w| format!("; first (q,m)={:?} distance {}", w.indices, w.value));
    (
        report.passed() && slack_ok,
        format!("{}; slack {slack}{first}", per_q.join("; ")),
    )
}

fn hindman_profile() -> (bool, String) {
    let v = Vfhc::desk();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut last_floor = 0.0;
    for r in [2u64, 3] {
        let h = v.hindman_floor(1, r, 1_000_000).unwrap();
        pass &= h.holds() && h.inclusion_violation.is_none();
        last_floor = f(&h.floor);
        parts.push(format!(
            "r={r} N_r={}: estimate {:.5} >= floor {:.5} (tail count {}, tail bound {:.2e})",
            h.depth,
            f(&h.estimate),
            last_floor,
            h.tail_count,
            f(&h.tail_bound)
        ));
    }
    pass &= last_floor > 0.9;
    (pass, parts.join("; "))
}

fn oracle_equivalence() -> (bool, String) {
    let h = 10_000u64;
    let mut pairs: Vec<(IndexSet, Marked)> = Vec::new();
    let desk = Params::desk();

    let bm = Bmpp::new(desk).unwrap();
    let (nu, covered) = interval_exponents(3, h, false);
    pairs.push((bm.covered_set(), covered));
    for j in 1..=6 {
        pairs.push((bm.level_set(j).unwrap(), level_from(&nu, j, &format!("D_{j}"))));
    }
    for k in 1..=2 {
        pairs.push((bm.hitting_set(k, JSchedule::minimal(3, k)).unwrap(), bmpp_hitting(3, k, h)));
    }

    let br = Br::new(desk).unwrap();
    let (nu, covered) = interval_exponents(3, h, true);
    pairs.push((br.covered_set(), covered));
    for j in 1..=6 {
        pairs.push((br.level_set(j).unwrap(), level_from(&nu, j, &format!("E_{j}"))));
    }
    pairs.push((br.square_region(), br_square_region(3, h)));
    for k in 1..=2 {
        pairs.push((br.hitting_set(k), br_hitting(3, k, h)));
    }

    for (variant, unit) in [(BgVariant::Literal, false), (BgVariant::UnitOffset, true)] {
        let bg = Bg::unchecked(desk, variant).unwrap();
        let r = BgRef::new(3, 5, unit, h);
        pairs.push((bg.x_set(), r.x()));
        for p in 1..=2 {
            pairs.push((bg.c_set(p), r.c(p)));
            pairs.push((bg.a_set(p), r.a_set(p)));
        }
        for q in 2..=3 {
            pairs.push((bg.y_set(q), r.y(q)));
        }
    }

    let v = Vfhc::desk();
    let r = VfhcRef::new(3, 5, &[1, 4, 10, 21, 43], h);
    pairs.push((v.x_set(), r.x()));
    for p in 1..=2 {
        pairs.push((v.c_set(p), r.c(p)));
        pairs.push((v.b_set(p), r.b_set(p)));
        pairs.push((v.a_set(p), r.a_set(p)));
    }
    for q in 2..=3 {
        pairs.push((v.y_set(q), r.y(q)));
    }

    let failures: Vec<String> = pairs.iter().filter_map(|(s, m)| disagreement(s, m)).collect();
    let summary = if failures.is_empty() {
        format!("{} oracles agree with brute force on [0, {h}]", pairs.len())
    } else {
        failures.join("; ")
    };
    (failures.is_empty(), summary)
}

fn property_suites() -> (bool, String) {
    let suites = common::property_suites(128);
    let pass = suites.iter().all(|(_, _, f)| f.is_none());
    let text: Vec<String> = suites
        .iter()
        .map(|(name, n, f)| match f {
            None => format!("{name} {n}/{n}"),
            Some(e) => format!("{name} FAILED {e}"),
        })
        .collect();
    (pass, text.join("; "))
}

fn main() -> ExitCode {
    let rows = [
        run("1", pairwise_bound),
        run("2", level_set_bound),
        run("3", br_density_floor),
        run("4", || bg_criterion(BgVariant::Literal)),
        run("5", bg_density_floor),
        run("6", || hvector_orbit(BgVariant::Literal)),
        run("7", hindman_profile),
        run("8", oracle_equivalence),
        run("9", property_suites),
    ];
    let supplementary = [
        run("4u", || bg_criterion(BgVariant::UnitOffset)),
        run("6u", || hvector_orbit(BgVariant::UnitOffset)),
    ];
    for r in &rows {
        println!("criterion {:<2} {} ({:.2}s) {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.secs, r.summary);
    }
    for r in &supplementary {
        println!("supp      {:<2} {} ({:.2}s) {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.secs, r.summary);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} of {} criteria pass", rows.len() - failed, rows.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
