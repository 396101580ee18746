//! Flags, the optional JSON config file, and their merge into one
//! [`Experiment`]. Values from the file win over flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyplab_core::constructions::bg::BgVariant;
use hyplab_core::constructions::Params;
use hyplab_core::Scalar;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const MAX_HORIZON: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "hyplab", version, about = "Densities, weighted shifts and hypercyclicity criteria in exact arithmetic")]
pub struct Cli {
    /// JSON experiment file with `command`, `parameters`, `seed`, `output_path`.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for randomized sampling; recorded in every output.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file, or output directory for `construct`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Density profile of a named set as CSV.
    Density(DensityArgs),
    /// Weight table, set enumerations and verification report of a construction.
    Construct(ConstructArgs),
    /// Finite-horizon check of a shift criterion.
    Check(CheckArgs),
    /// Visit-set density of a shift orbit as CSV.
    Orbit(OrbitArgs),
    /// Build the explicit orbit-approximating vector and verify it.
    Hvector(HvectorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    Construct,
    Check,
    Orbit,
    Hvector,
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Density(_) => CommandKind::Density,
            Command::Construct(_) => CommandKind::Construct,
            Command::Check(_) => CommandKind::Check,
            Command::Orbit(_) => CommandKind::Orbit,
            Command::Hvector(_) => CommandKind::Hvector,
        }
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Command::Density(a) => serde_json::to_value(a),
            Command::Construct(a) => serde_json::to_value(a),
            Command::Check(a) => serde_json::to_value(a),
            Command::Orbit(a) => serde_json::to_value(a),
            Command::Hvector(a) => serde_json::to_value(a),
        };
        v.expect("flags serialise")
    }
}

/// An exact number given as a flag or a JSON string/number.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Num(String);

impl Num {
    pub fn scalar(&self) -> Scalar {
        self.0.parse().expect("validated on construction")
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Num {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<Scalar>().map(|v| Num(v.to_string())).map_err(|e| e.to_string())
    }
}

impl From<&str> for Num {
    fn from(s: &str) -> Self {
        s.parse().expect("literal number")
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a number, got {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    Bmpp,
    Br,
    Bg,
    Vfhc,
}

impl fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Literal,
    UnitOffset,
}

impl From<Variant> for BgVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Literal => BgVariant::Literal,
            Variant::UnitOffset => BgVariant::UnitOffset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    BmppHitting,
    BmppCovered,
    BmppLevel,
    BrHitting,
    BrCovered,
    BrLevel,
    BrSquare,
    BgX,
    BgC,
    BgY,
    BgA,
    VfhcX,
    VfhcC,
    VfhcY,
    VfhcB,
    VfhcA,
    Random,
}

impl SetKind {
    pub fn construction(self) -> Option<ConstructionKind> {
        use SetKind::*;
        Some(match self {
            BmppHitting | BmppCovered | BmppLevel => ConstructionKind::Bmpp,
            BrHitting | BrCovered | BrLevel | BrSquare => ConstructionKind::Br,
            BgX | BgC | BgY | BgA => ConstructionKind::Bg,
            VfhcX | VfhcC | VfhcY | VfhcB | VfhcA => ConstructionKind::Vfhc,
            Random => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Lower,
    Upper,
    Banach,
    Log,
    Cesaro,
    Exponential,
    Hindman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    ShiftUpper,
    ShiftGeneral,
    SeriesTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VectorKind {
    Random,
    Hvector,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<SetKind>,
    /// Base of the construction.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_base: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// Hitting-set index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Level-set index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    /// Membership probability of `--set random`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Num>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<Functional>,
    /// Banach window length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    /// Shift depth of the Hindman union.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Number of evenly spaced horizons in the profile.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConstructArgs {
    #[arg(value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_base: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Number of level sets to enumerate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionKind>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_base: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    /// Weight bound of the single-set criterion.
    #[arg(long = "M")]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<Num>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<u64>,
    /// Bounds `M_1, …, M_{p_max}` of the family criterion, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<Num>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Num>,
    /// `c0` or `l<p>`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_start: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_floor: Option<Num>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OrbitArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_base: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<VectorKind>,
    /// Nonzero entries of a random starting vector.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<u64>,
    /// Random entries are placed in `[0, span)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<u64>,
    /// The ball is centred at `e_0 + … + e_{p−1}` carried to the weighted frame.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Num>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct HvectorArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_base: Option<u32>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<u64>,
    /// Last index whose orbit distance is verified.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

/// The JSON file form.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<CommandKind>,
    #[serde(default)]
    parameters: Map<String, Value>,
    output_path: Option<PathBuf>,
    seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum Parameters {
    Density(DensityArgs),
    Construct(ConstructArgs),
    Check(CheckArgs),
    Orbit(OrbitArgs),
    Hvector(HvectorArgs),
}

/// A validated run with every default filled in.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub parameters: Parameters,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Experiment {
    pub fn command(&self) -> CommandKind {
        match self.parameters {
            Parameters::Density(_) => CommandKind::Density,
            Parameters::Construct(_) => CommandKind::Construct,
            Parameters::Check(_) => CommandKind::Check,
            Parameters::Orbit(_) => CommandKind::Orbit,
            Parameters::Hvector(_) => CommandKind::Hvector,
        }
    }

    /// The config echo embedded in outputs. The output path is left out so
    /// that artifacts do not depend on where they are written.
    pub fn echo(&self) -> Value {
        let params = match &self.parameters {
            Parameters::Density(a) => serde_json::to_value(a),
            Parameters::Construct(a) => serde_json::to_value(a),
            Parameters::Check(a) => serde_json::to_value(a),
            Parameters::Orbit(a) => serde_json::to_value(a),
            Parameters::Hvector(a) => serde_json::to_value(a),
        };
        json!({ "command": self.command(), "parameters": params.expect("parameters serialise"), "seed": self.seed })
    }
}

fn typed<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::usage(format!("parameters: {e}")))
}

pub fn load(cli: Cli) -> Result<Experiment, CliError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
            let f: ConfigFile = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
            Some(f)
        }
        None => None,
    };
    let flag_kind = cli.command.as_ref().map(Command::kind);
    let kind = file
        .as_ref()
        .and_then(|f| f.command)
        .or(flag_kind)
        .ok_or_else(|| CliError::usage("no command given"))?;
    let mut map = match (&cli.command, flag_kind == Some(kind)) {
        (Some(cmd), true) => match cmd.to_value() {
            Value::Object(m) => m,
            _ => Map::new(),
        },
        _ => Map::new(),
    };
    let (seed, out) = match file {
        Some(f) => {
            map.extend(f.parameters);
            (f.seed.or(cli.seed), f.output_path.or(cli.out))
        }
        None => (cli.seed, cli.out),
    };
    let parameters = match kind {
        CommandKind::Density => Parameters::Density(typed::<DensityArgs>(map)?.resolve()?),
        CommandKind::Construct => Parameters::Construct(typed::<ConstructArgs>(map)?.resolve()?),
        CommandKind::Check => Parameters::Check(typed::<CheckArgs>(map)?.resolve()?),
        CommandKind::Orbit => Parameters::Orbit(typed::<OrbitArgs>(map)?.resolve()?),
        CommandKind::Hvector => Parameters::Hvector(typed::<HvectorArgs>(map)?.resolve()?),
    };
    Ok(Experiment { parameters, seed: seed.unwrap_or(0), out })
}

fn forbid<T>(value: &Option<T>, flag: &str, reason: &str) -> Result<(), CliError> {
    match value {
        Some(_) => Err(CliError::usage(format!("--{flag} is not valid {reason}"))),
        None => Ok(()),
    }
}

fn require<T: Clone>(value: &Option<T>, flag: &str, reason: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::usage(format!("--{flag} is required {reason}")))
}

fn check_horizon(h: u64) -> Result<u64, CliError> {
    if h == 0 || h > MAX_HORIZON {
        return Err(CliError::usage(format!("horizon must lie in [1, {MAX_HORIZON}], got {h}")));
    }
    Ok(h)
}

fn positive(v: &Num, flag: &str) -> Result<(), CliError> {
    if v.scalar() <= Scalar::zero() {
        return Err(CliError::usage(format!("--{flag} must be positive")));
    }
    Ok(())
}

fn check_space(s: &str) -> Result<(), CliError> {
    s.parse::<hyplab_core::Space>().map(|_| ()).map_err(|e| CliError::usage(e.to_string()))
}

/// Desk-scale defaults `b = 3`, `c = 5`, weight base 2.
pub fn params(b: Option<u32>, c: Option<u32>, weight_base: Option<u32>) -> Params {
    let d = Params::desk();
    Params { b: b.unwrap_or(d.b), c: c.unwrap_or(d.c), weight_base: weight_base.unwrap_or(d.weight_base) }
}

fn fill_params(b: &mut Option<u32>, c: &mut Option<u32>, wb: &mut Option<u32>) -> Result<(), CliError> {
    let p = params(*b, *c, *wb);
    p.validate().map_err(|e| CliError::module("constructions", e))?;
    (*b, *c, *wb) = (Some(p.b), Some(p.c), Some(p.weight_base));
    Ok(())
}

impl DensityArgs {
    fn resolve(mut self) -> Result<Self, CliError> {
        use SetKind::*;
        let set = require(&self.set, "set", "for density")?;
        let ctx = format!("with --set {}", set.to_possible_value().unwrap().get_name());
        if set.construction().is_some() {
            fill_params(&mut self.b, &mut self.c, &mut self.weight_base)?;
        } else {
            forbid(&self.b, "b", &ctx)?;
            forbid(&self.c, "c", &ctx)?;
            forbid(&self.weight_base, "weight-base", &ctx)?;
        }
        match set {
            BmppHitting | BrHitting => self.k = Some(self.k.unwrap_or(1)),
            _ => forbid(&self.k, "k", &ctx)?,
        }
        match set {
            BmppLevel | BrLevel => {
                let j = require(&self.j, "j", &ctx)?;
                if j == 0 {
                    return Err(CliError::usage("--j must be at least 1"));
                }
            }
            _ => forbid(&self.j, "j", &ctx)?,
        }
        match set {
            BgC | BgA | VfhcC | VfhcB | VfhcA => self.p = Some(self.p.unwrap_or(1).max(1)),
            _ => forbid(&self.p, "p", &ctx)?,
        }
        match set {
            BgY | VfhcY => {
                let q = self.q.unwrap_or(2);
                if q < 2 {
                    return Err(CliError::usage("--q must be at least 2"));
                }
                self.q = Some(q);
            }
            _ => forbid(&self.q, "q", &ctx)?,
        }
        match set {
            BgX | BgC | BgY | BgA => self.variant = Some(self.variant.unwrap_or(Variant::Literal)),
            _ => forbid(&self.variant, "variant", &ctx)?,
        }
        match set {
            Random => {
                let d = self.density.clone().unwrap_or_else(|| "1/2".into());
                let v = d.scalar();
                if v < Scalar::zero() || v > Scalar::one() {
                    return Err(CliError::usage("--density must lie in [0, 1]"));
                }
                self.density = Some(d);
            }
            _ => forbid(&self.density, "density", &ctx)?,
        }
        let functional = self.functional.unwrap_or(Functional::Upper);
        self.functional = Some(functional);
        if functional == Functional::Banach {
            let w = require(&self.window, "window", "with --functional banach")?;
            if w == 0 {
                return Err(CliError::usage("--window must be at least 1"));
            }
        } else {
            forbid(&self.window, "window", "without --functional banach")?;
        }
        if functional == Functional::Hindman {
            self.depth = Some(self.depth.unwrap_or(1));
        } else {
            forbid(&self.depth, "depth", "without --functional hindman")?;
        }
        let h = check_horizon(self.horizon.unwrap_or(10_000))?;
        self.horizon = Some(h);
        let points = self.points.unwrap_or(10);
        if points == 0 || points > h {
            return Err(CliError::usage(format!("--points must lie in [1, {h}]")));
        }
        self.points = Some(points);
        Ok(self)
    }
}

impl ConstructArgs {
    fn resolve(mut self) -> Result<Self, CliError> {
        let kind = require(&self.construction, "construction", "for construct")?;
        let ctx = format!("for construct {kind}");
        fill_params(&mut self.b, &mut self.c, &mut self.weight_base)?;
        match kind {
            ConstructionKind::Bmpp | ConstructionKind::Br => {
                self.k = Some(self.k.unwrap_or(1).max(1));
                self.levels = Some(self.levels.unwrap_or(3));
                forbid(&self.p_max, "p-max", &ctx)?;
            }
            ConstructionKind::Bg | ConstructionKind::Vfhc => {
                forbid(&self.k, "k", &ctx)?;
                forbid(&self.levels, "levels", &ctx)?;
                let p_max = self.p_max.unwrap_or(2);
                if p_max == 0 {
                    return Err(CliError::usage("--p-max must be at least 1"));
                }
                self.p_max = Some(p_max);
            }
        }
        if kind == ConstructionKind::Bg {
            self.variant = Some(self.variant.unwrap_or(Variant::Literal));
        } else {
            forbid(&self.variant, "variant", &ctx)?;
        }
        self.horizon = Some(check_horizon(self.horizon.unwrap_or(1_000))?);
        Ok(self)
    }
}

impl CheckArgs {
    fn resolve(mut self) -> Result<Self, CliError> {
        let criterion = require(&self.criterion, "criterion", "for check")?;
        let kind = require(&self.construction, "construction", "for check")?;
        let ctx = format!("for --criterion {}", criterion.to_possible_value().unwrap().get_name());
        fill_params(&mut self.b, &mut self.c, &mut self.weight_base)?;
        if kind == ConstructionKind::Bg {
            self.variant = Some(self.variant.unwrap_or(Variant::Literal));
        } else {
            forbid(&self.variant, "variant", &format!("for --construction {kind}"))?;
        }
        let single_set = matches!(kind, ConstructionKind::Bmpp | ConstructionKind::Br);
        match criterion {
            CriterionKind::ShiftUpper | CriterionKind::SeriesTail => {
                forbid(&self.p_max, "p-max", &ctx)?;
                forbid(&self.bounds, "bounds", &ctx)?;
                self.p = Some(self.p.unwrap_or(1));
                if !single_set {
                    forbid(&self.k, "k", &format!("for --construction {kind}"))?;
                    self.p = Some(self.p.unwrap().max(1));
                }
            }
            CriterionKind::ShiftGeneral => {
                if single_set {
                    return Err(CliError::usage(format!(
                        "--criterion shift-general needs a family construction (bg or vfhc), got {kind}"
                    )));
                }
                forbid(&self.p, "p", &ctx)?;
                forbid(&self.k, "k", &ctx)?;
                forbid(&self.m, "M", &ctx)?;
                let p_max = self.p_max.unwrap_or(2);
                if p_max == 0 {
                    return Err(CliError::usage("--p-max must be at least 1"));
                }
                let bounds = self
                    .bounds
                    .clone()
                    .unwrap_or_else(|| (1..=p_max).map(|p| p.to_string().as_str().into()).collect());
                if bounds.len() as u64 != p_max {
                    return Err(CliError::usage(format!("--bounds needs {p_max} values, got {}", bounds.len())));
                }
                for b in &bounds {
                    positive(b, "bounds")?;
                }
                (self.p_max, self.bounds) = (Some(p_max), Some(bounds));
            }
        }
        match criterion {
            CriterionKind::ShiftUpper => {
                let m = require(&self.m, "M", &ctx)?;
                positive(&m, "M")?;
            }
            CriterionKind::SeriesTail | CriterionKind::ShiftGeneral => forbid(&self.m, "M", &ctx)?,
        }
        match criterion {
            CriterionKind::SeriesTail => {
                forbid(&self.growth_start, "growth-start", &ctx)?;
                forbid(&self.growth_floor, "growth-floor", &ctx)?;
                let eps = self.epsilon.clone().unwrap_or_else(|| "1/100".into());
                positive(&eps, "epsilon")?;
                let space = self.space.clone().unwrap_or_else(|| "c0".into());
                check_space(&space)?;
                (self.epsilon, self.space) = (Some(eps), Some(space));
            }
            _ => {
                forbid(&self.epsilon, "epsilon", &ctx)?;
                forbid(&self.space, "space", &ctx)?;
                self.growth_floor = Some(self.growth_floor.clone().unwrap_or_else(|| "2".into()));
            }
        }
        let h = check_horizon(self.horizon.unwrap_or(10_000))?;
        self.horizon = Some(h);
        if criterion != CriterionKind::SeriesTail {
            self.growth_start = Some(self.growth_start.unwrap_or(h / 2));
        }
        if single_set && criterion != CriterionKind::ShiftGeneral && self.k.is_none() {
            self.k = Some(default_k(&self, criterion));
        }
        Ok(self)
    }
}

/// For the single-set criterion the hitting set with index `k` guarantees
/// `ϖ_{n−m+p} ≥ base^{k+p}`; the default is the least `k ≥ 1` that clears `M`.
fn default_k(args: &CheckArgs, criterion: CriterionKind) -> u64 {
    let p = args.p.unwrap_or(1);
    match (criterion, &args.m) {
        (CriterionKind::ShiftUpper, Some(m)) => {
            let base = Scalar::from(args.weight_base.unwrap_or(2) as i64);
            let m = m.scalar();
            (1..64).find(|&k| base.powi((k + p) as u32) > m).unwrap_or(64)
        }
        _ => 1,
    }
}

impl OrbitArgs {
    fn resolve(mut self) -> Result<Self, CliError> {
        let kind = require(&self.construction, "construction", "for orbit")?;
        fill_params(&mut self.b, &mut self.c, &mut self.weight_base)?;
        if kind == ConstructionKind::Bg {
            self.variant = Some(self.variant.unwrap_or(Variant::Literal));
        } else {
            forbid(&self.variant, "variant", &format!("for --construction {kind}"))?;
        }
        let vector = self.vector.unwrap_or(VectorKind::Random);
        self.vector = Some(vector);
        match vector {
            VectorKind::Random => {
                forbid(&self.p_max, "p-max", "with --vector random")?;
                let span = self.span.unwrap_or(64);
                let support = self.support.unwrap_or(8);
                if span == 0 || support == 0 || support > span {
                    return Err(CliError::usage("need 1 <= --support <= --span"));
                }
                (self.span, self.support) = (Some(span), Some(support));
                self.space = Some(self.space.clone().unwrap_or_else(|| "c0".into()));
            }
            VectorKind::Hvector => {
                if kind != ConstructionKind::Bg {
                    return Err(CliError::usage(format!("--vector hvector needs --construction bg, got {kind}")));
                }
                forbid(&self.span, "span", "with --vector hvector")?;
                forbid(&self.support, "support", "with --vector hvector")?;
                if self.space.as_deref().is_some_and(|s| s != "c0") {
                    return Err(CliError::usage("--vector hvector lives in c0"));
                }
                self.space = Some("c0".into());
                let p_max = self.p_max.unwrap_or(2);
                if p_max == 0 {
                    return Err(CliError::usage("--p-max must be at least 1"));
                }
                self.p_max = Some(p_max);
            }
        }
        check_space(self.space.as_deref().unwrap())?;
        let p = self.p.unwrap_or(1);
        if p == 0 {
            return Err(CliError::usage("--p must be at least 1"));
        }
        self.p = Some(p);
        let r = self.radius.clone().unwrap_or_else(|| "1".into());
        positive(&r, "radius")?;
        self.radius = Some(r);
        let h = check_horizon(self.horizon.unwrap_or(2_000))?;
        self.horizon = Some(h);
        let points = self.points.unwrap_or(10);
        if points == 0 || points > h {
            return Err(CliError::usage(format!("--points must lie in [1, {h}]")));
        }
        self.points = Some(points);
        Ok(self)
    }
}

impl HvectorArgs {
    fn resolve(mut self) -> Result<Self, CliError> {
        let kind = self.construction.unwrap_or(ConstructionKind::Bg);
        if kind != ConstructionKind::Bg {
            return Err(CliError::usage(format!("hvector needs --construction bg, got {kind}")));
        }
        self.construction = Some(kind);
        fill_params(&mut self.b, &mut self.c, &mut self.weight_base)?;
        self.variant = Some(self.variant.unwrap_or(Variant::Literal));
        let p_max = self.p_max.unwrap_or(2);
        if p_max == 0 {
            return Err(CliError::usage("--p-max must be at least 1"));
        }
        self.p_max = Some(p_max);
        self.horizon = Some(check_horizon(self.horizon.unwrap_or(10_000))?);
        Ok(self)
    }
}
