use hyplab_core::constructions::bg::Bg;
use hyplab_core::constructions::bmpp::{Bmpp, JSchedule};
use hyplab_core::constructions::br::Br;
use hyplab_core::criteria::{
    check_series_tail, check_shift_general, check_shift_upper, CriterionReport, GrowthFloor, Verdict,
};
use hyplab_core::{IndexSet, Scalar, Space, WeightSequence};

use crate::config::{params, CheckArgs, ConstructionKind, CriterionKind, Experiment};
use crate::density::vfhc;
use crate::error::CliError;
use crate::output::{envelope, write_json};

fn cons<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::module("constructions", e))
}

/// Weights of the construction with its hitting set (`k`) or the family
/// `A_1, …, A_{p_max}`.
fn weights_and_sets(a: &CheckArgs, count: u64) -> Result<(WeightSequence, Vec<IndexSet>), CliError> {
    let pr = params(a.b, a.c, a.weight_base);
    Ok(match a.construction.unwrap() {
        ConstructionKind::Bmpp => {
            let c = cons(Bmpp::new(pr))?;
            let k = a.k.unwrap();
            (c.weights(), vec![cons(c.hitting_set(k, JSchedule::minimal(pr.b, k)))?])
        }
        ConstructionKind::Br => {
            let c = cons(Br::new(pr))?;
            (c.weights(), vec![c.hitting_set(a.k.unwrap())])
        }
        ConstructionKind::Bg => {
            let c = cons(Bg::unchecked(pr, a.variant.unwrap().into()))?;
            (c.weights(), (1..=count).map(|p| c.a_set(p)).collect())
        }
        ConstructionKind::Vfhc => {
            let c = vfhc(pr)?;
            (c.weights(), (1..=count).map(|p| c.a_set(p)).collect())
        }
    })
}

pub fn report(a: &CheckArgs) -> Result<CriterionReport, CliError> {
    let h = a.horizon.unwrap();
    let crit = |r: Result<CriterionReport, _>| r.map_err(|e| CliError::module("criteria", e));
    let growth = || GrowthFloor::new(a.growth_start.unwrap(), a.growth_floor.as_ref().unwrap().scalar());
    match a.criterion.unwrap() {
        CriterionKind::ShiftUpper => {
            let p = a.p.unwrap();
            let (w, sets) = weights_and_sets(a, p)?;
            let set = sets.last().unwrap();
            crit(check_shift_upper(&w, set, p, &a.m.as_ref().unwrap().scalar(), h, &growth()))
        }
        CriterionKind::ShiftGeneral => {
            let (w, sets) = weights_and_sets(a, a.p_max.unwrap())?;
            let bounds: Vec<Scalar> = a.bounds.as_ref().unwrap().iter().map(|b| b.scalar()).collect();
            crit(check_shift_general(&w, &sets, &bounds, h, &growth()))
        }
        CriterionKind::SeriesTail => {
            let p = a.p.unwrap();
            let (w, sets) = weights_and_sets(a, p)?;
            let space: Space = a.space.as_deref().unwrap().parse().map_err(|e| CliError::module("shift_ops", e))?;
            crit(check_series_tail(&w, sets.last().unwrap(), p, space, h, &a.epsilon.as_ref().unwrap().scalar()))
        }
    }
}

/// Prints the verdict table; the JSON report goes to `--out`.
pub fn emit(exp: &Experiment, report: &CriterionReport) -> Result<u8, CliError> {
    print!("{}", report.render_table());
    if let Some(path) = &exp.out {
        write_json(path, &envelope(exp, "criterion-report", report.to_json()))?;
    }
    Ok(u8::from(report.verdict == Verdict::Fail))
}

pub fn run(exp: &Experiment, a: &CheckArgs) -> Result<u8, CliError> {
    emit(exp, &report(a)?)
}
