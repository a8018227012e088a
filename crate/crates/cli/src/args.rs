use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hobi_pb::{RegularRule, Scheme};

#[derive(Debug, Parser)]
#[command(name = "hobi-pb", version, about = "Boundary integral Poisson-Boltzmann solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and report energy, iterations and timings.
    Solve(SolveArgs),
    /// Refinement sweep on spheres against the Kirkwood solution.
    Convergence(ConvergenceArgs),
    /// Wall time and parallel efficiency for several worker counts.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Hobi,
    Lobi,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Hobi => Scheme::Hobi,
            SchemeArg::Lobi => Scheme::Lobi,
        }
    }
}

/// `level,radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    pub level: u32,
    pub radius: f64,
}

impl FromStr for SphereSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (level, radius) = s
            .split_once(',')
            .ok_or_else(|| format!("expected LEVEL,RADIUS, got '{s}'"))?;
        let level = level.trim().parse().map_err(|e| format!("bad level '{level}': {e}"))?;
        let radius: f64 = radius.trim().parse().map_err(|e| format!("bad radius '{radius}': {e}"))?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(format!("radius must be positive, got {radius}"));
        }
        Ok(SphereSpec { level, radius })
    }
}

/// `x,y,z,q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCharge {
    pub position: [f64; 3],
    pub charge: f64,
}

impl FromStr for PointCharge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number '{v}': {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        match values[..] {
            [x, y, z, q] => Ok(PointCharge {
                position: [x, y, z],
                charge: q,
            }),
            _ => Err(format!("expected X,Y,Z,Q, got '{s}'")),
        }
    }
}

fn parse_rule(s: &str) -> Result<RegularRule, String> {
    s.parse().map_err(|e: hobi_pb::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct PhysicsArgs {
    /// Solute dielectric constant.
    #[arg(long, default_value_t = 1.0)]
    pub eps1: f64,
    /// Solvent dielectric constant.
    #[arg(long, default_value_t = 80.0)]
    pub eps2: f64,
    /// Inverse Debye length in 1/Å.
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
}

/// Either an MSMS `.vert`/`.face` pair or a generated sphere.
#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    /// MSMS vertex file.
    #[arg(long, requires = "face", conflicts_with = "sphere")]
    pub vert: Option<PathBuf>,
    /// MSMS face file.
    #[arg(long, requires = "vert")]
    pub face: Option<PathBuf>,
    /// Icosahedral sphere centered at the origin.
    #[arg(long, value_name = "LEVEL,RADIUS", required_unless_present = "vert")]
    pub sphere: Option<SphereSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct ChargeArgs {
    /// Charge file with `x y z q [radius]` records.
    #[arg(long)]
    pub charges: Option<PathBuf>,
    /// Inline charge `x,y,z,q`; may be repeated.
    #[arg(long = "charge", value_name = "X,Y,Z,Q", allow_hyphen_values = true)]
    pub inline: Vec<PointCharge>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// GMRES relative residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub restart: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    /// Regular-element rule: `radau4` or `gauss:N`.
    #[arg(long, default_value = "radau4", value_parser = parse_rule)]
    pub regular_rule: RegularRule,
    /// Gauss-Legendre points per direction on singular elements.
    #[arg(long, default_value_t = 4)]
    pub singular_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Leave wall times out so reports are byte-stable.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub charges: ChargeArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value_t = SchemeArg::Hobi)]
    pub scheme: SchemeArg,
    /// Operator threads; defaults to all available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    /// Comma-separated sphere levels, coarse to fine.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[command(flatten)]
    pub charges: ChargeArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Comma-separated schemes to sweep.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SchemeArg::Hobi, SchemeArg::Lobi])]
    pub schemes: Vec<SchemeArg>,
    /// Operator threads; defaults to all available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub charges: ChargeArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value_t = SchemeArg::Hobi)]
    pub scheme: SchemeArg,
    /// Comma-separated worker counts.
    #[arg(long = "workers-list", value_delimiter = ',', default_values_t = [1, 2, 4])]
    pub workers_list: Vec<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
