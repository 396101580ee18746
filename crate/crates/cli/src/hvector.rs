use hyplab_core::constructions::bg::Bg;
use hyplab_core::criteria::CriterionReport;
use hyplab_core::hvector::{build_vector, verify_orbit, TargetSchedule};
use hyplab_core::{TruncatedVector, WeightSequence};

use crate::config::{params, Experiment, HvectorArgs, Variant};
use crate::error::CliError;

/// All-ones schedule over `A_1, …, A_{p_max}` of the bg construction, with
/// the weights tabulated far enough for the verification horizon.
pub fn build(
    a_params: (Option<u32>, Option<u32>, Option<u32>),
    variant: Variant,
    p_max: u64,
    horizon: u64,
) -> Result<(TargetSchedule, WeightSequence, TruncatedVector), CliError> {
    let pr = params(a_params.0, a_params.1, a_params.2);
    let bg = Bg::unchecked(pr, variant.into()).map_err(|e| CliError::module("constructions", e))?;
    let schedule = TargetSchedule::all_ones((1..=p_max).map(|p| bg.a_set(p)).collect());
    schedule.check_invariants(horizon).map_err(|e| CliError::module("hvector", e))?;
    let w = bg.weights().tabulated(horizon + p_max + 1);
    let x = build_vector(&schedule, &w, horizon).map_err(|e| CliError::module("hvector", e))?;
    Ok((schedule, w, x))
}

pub fn report(a: &HvectorArgs) -> Result<CriterionReport, CliError> {
    let p_max = a.p_max.unwrap();
    // Distances are verified for m ≤ horizon, which needs p_max more entries.
    let horizon = a.horizon.unwrap() + p_max;
    let (schedule, w, x) = build((a.b, a.c, a.weight_base), a.variant.unwrap(), p_max, horizon)?;
    verify_orbit(&schedule, &w, &x, horizon).map_err(|e| CliError::module("hvector", e))
}

pub fn run(exp: &Experiment, a: &HvectorArgs) -> Result<u8, CliError> {
    crate::check::emit(exp, &report(a)?)
}
