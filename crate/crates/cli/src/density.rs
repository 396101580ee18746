use std::io::Write;

use hyplab_core::constructions::bg::Bg;
use hyplab_core::constructions::bmpp::{Bmpp, JSchedule};
use hyplab_core::constructions::br::Br;
use hyplab_core::constructions::vfhc::Vfhc;
use hyplab_core::densities::{
    banach_profile, exponential_density_profile, hindman_profile, matrix_density_profile,
    natural_density_profile, weighted_density_profile, Cesaro, DensityProfile, Mode, WeightProfile,
};
use hyplab_core::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{params, DensityArgs, Experiment, Functional, SetKind};
use crate::error::CliError;
use crate::output::{csv_preamble, grid, sink};

/// The vfhc construction with the standard schedule prefix for any base.
pub fn vfhc(p: hyplab_core::constructions::Params) -> Result<Vfhc, CliError> {
    Vfhc::new(p, &[1, 4, 10], 8).map_err(|e| CliError::module("constructions", e))
}

fn cons<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::module("constructions", e))
}

fn named_set(a: &DensityArgs, seed: u64) -> Result<IndexSet, CliError> {
    use SetKind::*;
    let pr = params(a.b, a.c, a.weight_base);
    let set = a.set.expect("resolved");
    let bg = || cons(Bg::unchecked(pr, a.variant.expect("resolved").into()));
    Ok(match set {
        BmppHitting => {
            let k = a.k.unwrap();
            cons(cons(Bmpp::new(pr))?.hitting_set(k, JSchedule::minimal(pr.b, k)))?
        }
        BmppCovered => cons(Bmpp::new(pr))?.covered_set(),
        BmppLevel => cons(cons(Bmpp::new(pr))?.level_set(a.j.unwrap()))?,
        BrHitting => cons(Br::new(pr))?.hitting_set(a.k.unwrap()),
        BrCovered => cons(Br::new(pr))?.covered_set(),
        BrLevel => cons(cons(Br::new(pr))?.level_set(a.j.unwrap()))?,
        BrSquare => cons(Br::new(pr))?.square_region(),
        BgX => bg()?.x_set(),
        BgC => bg()?.c_set(a.p.unwrap()),
        BgY => bg()?.y_set(a.q.unwrap()),
        BgA => bg()?.a_set(a.p.unwrap()),
        VfhcX => vfhc(pr)?.x_set(),
        VfhcC => vfhc(pr)?.c_set(a.p.unwrap()),
        VfhcY => {
            let v = vfhc(pr)?;
            let q = a.q.unwrap();
            if q > v.q_max() {
                return Err(CliError::usage(format!("--q must be at most {}", v.q_max())));
            }
            v.y_set(q)
        }
        VfhcB => vfhc(pr)?.b_set(a.p.unwrap()),
        VfhcA => vfhc(pr)?.a_set(a.p.unwrap()),
        Random => {
            let d = a.density.as_ref().unwrap().scalar().to_f64().clamp(0.0, 1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let reach = a.horizon.unwrap() + a.window.unwrap_or(0);
            let elems: Vec<u64> = (0..=reach).filter(|_| rng.gen_bool(d)).collect();
            IndexSet::finite(format!("random(d={})", a.density.as_ref().unwrap()), elems)
        }
    })
}

pub fn profile(a: &DensityArgs, seed: u64) -> Result<DensityProfile, CliError> {
    let set = named_set(a, seed)?;
    let hs = grid(a.horizon.unwrap(), a.points.unwrap());
    let dens = |r: Result<DensityProfile, _>| r.map_err(|e| CliError::module("densities", e));
    match a.functional.unwrap() {
        Functional::Lower => dens(natural_density_profile(&set, &hs, Mode::Lower)),
        Functional::Upper => dens(natural_density_profile(&set, &hs, Mode::Upper)),
        // A window of length L is the window [m, m + L − 1].
        Functional::Banach => dens(banach_profile(&set, a.window.unwrap() - 1, &hs)),
        Functional::Log => dens(weighted_density_profile(&set, &WeightProfile::power(1.0), &hs)),
        Functional::Cesaro => dens(matrix_density_profile(&set, &Cesaro, &hs)),
        Functional::Exponential => dens(exponential_density_profile(&set, &hs)),
        Functional::Hindman => dens(hindman_profile(&set, a.depth.unwrap(), &hs)),
    }
}

pub fn run(exp: &Experiment, a: &DensityArgs) -> Result<u8, CliError> {
    let p = profile(a, exp.seed)?;
    let mut out = sink(exp.out.as_deref())?;
    out.write_all(csv_preamble(exp).as_bytes())?;
    p.write_csv(&mut out)?;
    out.flush()?;
    Ok(0)
}
