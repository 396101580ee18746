use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use hyplab_core::constructions::bg::Bg;
use hyplab_core::constructions::bmpp::{Bmpp, JSchedule};
use hyplab_core::constructions::br::Br;
use hyplab_core::constructions::{write_weight_table, NuOracle};
use hyplab_core::{IndexSet, WeightSequence};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::config::{params, ConstructArgs, ConstructionKind, Experiment};
use crate::density::vfhc;
use crate::error::CliError;
use crate::output::{csv_preamble, envelope, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionReport {
    pub construction: ConstructionKind,
    pub horizon: u64,
    pub verdict: &'static str,
    pub checks: Vec<Check>,
    pub sets: Vec<String>,
}

impl ConstructionReport {
    fn render_table(&self) -> String {
        let mut s = format!("{} horizon={} verdict={}\n", self.construction, self.horizon, self.verdict);
        for c in &self.checks {
            let status = match c.status {
                Status::Passed => "passed",
                Status::Failed => "FAILED",
                Status::Skipped => "skipped",
            };
            s.push_str(&format!("  {:<22} {:<8} {}\n", c.name, status, c.detail));
        }
        s
    }
}

fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
    let status = if ok { Status::Passed } else { Status::Failed };
    Check { name: name.into(), status, detail: detail.into() }
}

fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Check {
    Check { name: name.into(), status: Status::Skipped, detail: detail.into() }
}

fn sup_check(w: &WeightSequence, horizon: u64) -> Check {
    match w.sup_bound_violation(horizon) {
        None => check("sup-weight", true, format!("w_n <= {} for n <= {horizon}", display_sup(w))),
        Some(n) => check("sup-weight", false, format!("first violation at n={n}")),
    }
}

fn display_sup(w: &WeightSequence) -> String {
    w.sup_weight().map_or_else(|| "unbounded".into(), ToString::to_string)
}

/// `ν(n − m + p) ≥ k + p` for `m < n` in the hitting set and `p ≤ k`.
fn hitting_pairs(nu: &dyn NuOracle, a: &IndexSet, k: u64, horizon: u64) -> Check {
    let elems = a.enumerate_up_to(horizon);
    let mut checks = 0u64;
    for (i, &n) in elems.iter().enumerate() {
        for &m in &elems[..i] {
            for p in 0..=k {
                checks += 1;
                if nu.nu_u64(n - m + p) < k + p {
                    return check("hitting-pairs", false, format!("(n,m,p)=({n},{m},{p})"));
                }
            }
        }
    }
    check("hitting-pairs", true, format!("{checks} checks over {} elements", elems.len()))
}

struct Built {
    weights: WeightSequence,
    nu: Box<dyn NuOracle>,
    weight_base: u32,
    sets: Vec<(String, IndexSet)>,
    checks: Vec<Check>,
}

fn cons<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::module("constructions", e))
}

fn build(a: &ConstructArgs) -> Result<Built, CliError> {
    let pr = params(a.b, a.c, a.weight_base);
    let h = a.horizon.unwrap();
    let mut sets = Vec::new();
    let mut checks = Vec::new();
    let (weights, nu): (WeightSequence, Box<dyn NuOracle>) = match a.construction.unwrap() {
        ConstructionKind::Bmpp => {
            let c = cons(Bmpp::new(pr))?;
            let k = a.k.unwrap();
            let schedule = JSchedule::minimal(pr.b, k);
            let hit = cons(c.hitting_set(k, schedule.clone()))?;
            sets.push(("covered".into(), c.covered_set()));
            for j in 1..=a.levels.unwrap() {
                sets.push((format!("level-{j}"), cons(c.level_set(j))?));
            }
            sets.push((format!("hitting-k{k}"), hit.clone()));
            checks.push(match c.check_schedule(k, &schedule, 8) {
                Ok(()) => check("schedule", true, "j_m >= m*b^k for m <= 8"),
                Err(e) => check("schedule", false, e.to_string()),
            });
            checks.push(hitting_pairs(&c.nu_oracle(), &hit, k, h));
            let tol = BigRational::new(1.into(), 1_000_000.into());
            let r = cons(c.level_set_bound(k, h, &tol))?;
            let bound = &r.main + &r.tail_slack;
            checks.push(check(
                "level-set-bound",
                r.holds(),
                format!("card(D_{} up to {h}) = {} <= {:.3}", 2 * k + 1, r.count, ratio_f64(&bound)),
            ));
            (c.weights(), Box::new(c.nu_oracle()))
        }
        ConstructionKind::Br => {
            let c = cons(Br::new(pr))?;
            let k = a.k.unwrap();
            sets.push(("covered".into(), c.covered_set()));
            for j in 1..=a.levels.unwrap() {
                sets.push((format!("level-{j}"), cons(c.level_set(j))?));
            }
            sets.push(("square".into(), c.square_region()));
            sets.push((format!("hitting-k{k}"), c.hitting_set(k)));
            // The guaranteed count b^{q²−1−k} needs q² > k.
            let q = (1..).find(|q| q * q > k).unwrap();
            checks.push(match c.hitting_count(k, q) {
                Ok((count, floor)) => check(
                    "hitting-count",
                    num_bigint::BigUint::from(count) >= floor,
                    format!("q={q}: {count} elements >= {floor}"),
                ),
                Err(e) => skipped("hitting-count", e.to_string()),
            });
            checks.push(match c.square_region_bound(2) {
                Ok(r) => check(
                    "square-region",
                    BigRational::from_integer(r.count.into()) <= r.bound,
                    format!("q=2: {} <= {:.3}", r.count, ratio_f64(&r.bound)),
                ),
                Err(e) => skipped("square-region", e.to_string()),
            });
            (c.weights(), Box::new(c.nu_oracle()))
        }
        ConstructionKind::Bg => {
            let c = cons(Bg::unchecked(pr, a.variant.unwrap().into()))?;
            let p_max = a.p_max.unwrap();
            sets.push(("x".into(), c.x_set()));
            for p in 1..=p_max {
                sets.push((format!("c-{p}"), c.c_set(p)));
                sets.push((format!("y-{}", p + 1), c.y_set(p + 1)));
                sets.push((format!("a-{p}"), c.a_set(p)));
            }
            checks.push(match c.precheck(p_max, h) {
                Ok(()) => check("prechecks", true, format!("p <= {p_max}, blocks meeting [0, {h}]")),
                Err(e) => check("prechecks", false, e.to_string()),
            });
            (c.weights(), Box::new(c.nu_oracle()))
        }
        ConstructionKind::Vfhc => {
            let c = vfhc(pr)?;
            let p_max = a.p_max.unwrap();
            sets.push(("x".into(), c.x_set()));
            for p in 1..=p_max {
                sets.push((format!("c-{p}"), c.c_set(p)));
                sets.push((format!("b-{p}"), c.b_set(p)));
                sets.push((format!("a-{p}"), c.a_set(p)));
            }
            for q in 2..=(p_max + 1).min(c.q_max()) {
                sets.push((format!("y-{q}"), c.y_set(q)));
            }
            for p in 1..=p_max {
                checks.push(match c.gap_violation(p, h) {
                    None => check(format!("gaps-p{p}"), true, "C_p follows every Y interval within reach"),
                    Some(n) => check(format!("gaps-p{p}"), false, format!("interval ending at {n}")),
                });
            }
            checks.push(match c.hindman_floor(1, 2, h) {
                Ok(f) => check(
                    "hindman-floor",
                    f.holds(),
                    format!(
                        "depth {}: {:.5} >= {:.5}",
                        f.depth,
                        ratio_f64(&f.estimate),
                        ratio_f64(&f.floor)
                    ),
                ),
                Err(e) => skipped("hindman-floor", e.to_string()),
            });
            (c.weights(), Box::new(c.nu_oracle()))
        }
    };
    checks.push(sup_check(&weights, h));
    Ok(Built { weights, nu, weight_base: pr.weight_base, sets, checks })
}

fn ratio_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn write_set(dir: &Path, name: &str, set: &IndexSet, horizon: u64, preamble: &str) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(dir.join(format!("set-{name}.csv")))?);
    std::io::Write::write_all(&mut f, preamble.as_bytes())?;
    set.write_csv(horizon, &mut f)?;
    Ok(())
}

pub fn run(exp: &Experiment, a: &ConstructArgs) -> Result<u8, CliError> {
    let built = build(a)?;
    let h = a.horizon.unwrap();
    let failed = built.checks.iter().any(|c| c.status == Status::Failed);
    let report = ConstructionReport {
        construction: a.construction.unwrap(),
        horizon: h,
        verdict: if failed { "fail" } else { "pass" },
        checks: built.checks,
        sets: built.sets.iter().map(|(n, s)| format!("{n}: {}", s.label())).collect(),
    };
    print!("{}", report.render_table());
    if let Some(dir) = &exp.out {
        fs::create_dir_all(dir)?;
        let preamble = csv_preamble(exp);
        let mut f = BufWriter::new(File::create(dir.join("weights.csv"))?);
        std::io::Write::write_all(&mut f, preamble.as_bytes())?;
        write_weight_table(built.nu.as_ref(), built.weight_base, h, &mut f)?;
        for (name, set) in &built.sets {
            write_set(dir, name, set, h, &preamble)?;
        }
        let result = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        let mut env = envelope(exp, "construction-report", result);
        env["result"]["weights"] = json!(built.weights.label());
        write_json(&dir.join("report.json"), &env)?;
    }
    Ok(u8::from(failed))
}
