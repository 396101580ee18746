use std::io::Write;

use hyplab_core::constructions::bg::Bg;
use hyplab_core::constructions::bmpp::Bmpp;
use hyplab_core::constructions::br::Br;
use hyplab_core::densities::{natural_density_profile, DensityProfile, Mode};
use hyplab_core::hvector::all_ones;
use hyplab_core::shift_ops::{conjugate_to_unweighted, orbit_visit_set};
use hyplab_core::{Scalar, Space, TruncatedVector, WeightSequence};
use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{params, ConstructionKind, Experiment, OrbitArgs, VectorKind};
use crate::density::vfhc;
use crate::error::CliError;
use crate::output::{csv_preamble, grid, sink};

fn cons<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::module("constructions", e))
}

fn weights(a: &OrbitArgs) -> Result<WeightSequence, CliError> {
    let pr = params(a.b, a.c, a.weight_base);
    Ok(match a.construction.unwrap() {
        ConstructionKind::Bmpp => cons(Bmpp::new(pr))?.weights(),
        ConstructionKind::Br => cons(Br::new(pr))?.weights(),
        ConstructionKind::Bg => cons(Bg::unchecked(pr, a.variant.unwrap().into()))?.weights(),
        ConstructionKind::Vfhc => vfhc(pr)?.weights(),
    })
}

/// `support` entries in `[0, span)` with values `n/d`, `0 < |n| ≤ 8`, `d ≤ 8`.
fn random_vector(space: Space, support: u64, span: u64, seed: u64) -> TruncatedVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, span as usize, support as usize).into_vec();
    idx.sort_unstable();
    let entries = idx.into_iter().map(|i| {
        let n: i64 = rng.gen_range(1..=8) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let d: i64 = rng.gen_range(1..=8);
        (i as u64, Scalar::from_fraction(BigInt::from(n), BigInt::from(d), 0))
    });
    TruncatedVector::from_entries(space, entries)
}

pub fn profile(a: &OrbitArgs, seed: u64) -> Result<DensityProfile, CliError> {
    let h = a.horizon.unwrap();
    let space: Space = a.space.as_deref().unwrap().parse().map_err(|e| CliError::module("shift_ops", e))?;
    let (w, x) = match a.vector.unwrap() {
        VectorKind::Random => (weights(a)?, random_vector(space, a.support.unwrap(), a.span.unwrap(), seed)),
        VectorKind::Hvector => {
            let p_max = a.p_max.unwrap();
            let (_, w, x) = crate::hvector::build((a.b, a.c, a.weight_base), a.variant.unwrap(), p_max, h + p_max)?;
            (w, x)
        }
    };
    // The ball sits around the target in the weighted frame, `Σ_{i<p} e_i/ϖ_i`.
    let center = conjugate_to_unweighted(&w, &all_ones(a.p.unwrap()).in_space(space))
        .map_err(|e| CliError::module("shift_ops", e))?;
    let visits = orbit_visit_set(&w, &x, &center, &a.radius.as_ref().unwrap().scalar(), h)
        .map_err(|e| CliError::module("shift_ops", e))?;
    natural_density_profile(&visits, &grid(h, a.points.unwrap()), Mode::Upper)
        .map_err(|e| CliError::module("densities", e))
}

pub fn run(exp: &Experiment, a: &OrbitArgs) -> Result<u8, CliError> {
    let p = profile(a, exp.seed)?;
    let mut out = sink(exp.out.as_deref())?;
    out.write_all(csv_preamble(exp).as_bytes())?;
    p.write_csv(&mut out)?;
    out.flush()?;
    Ok(0)
}
