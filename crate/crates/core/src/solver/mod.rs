//! Matrix-free discretized operator, GMRES driver, solvation energy and
//! error metrics.
//!
//! Two schemes share one operator layout. HOBI collocates at mesh vertices
//! and integrates over cubic curved elements, switching to Duffy points on
//! the elements incident to the target vertex. LOBI collocates at face
//! centroids with one point per flat triangle and drops the self term.

mod gmres;
mod matvec;
mod problem;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use gmres::{gmres_solve, GmresParams, GmresSolution};
pub use matvec::{matvec_hobi, matvec_lobi, partition_targets};
pub use problem::{discretize, DiscretizedProblem, QuadPoint, Target};

use crate::error::{Error, Result};
use crate::kernels::{kernels_unchecked, source_terms, PhysicalParams};
use crate::mesh_io::{ChargeSystem, FlatMesh};
use crate::oracle::ENERGY_SCALE;
use crate::quadrature::{collapsed_gauss_rule, gauss_radau_rule, TriangleRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Curved elements, vertex unknowns, singular quadrature.
    Hobi,
    /// Flat centroid collocation.
    Lobi,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Hobi => "hobi",
            Scheme::Lobi => "lobi",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hobi" => Ok(Scheme::Hobi),
            "lobi" => Ok(Scheme::Lobi),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}' (expected hobi or lobi)"))),
        }
    }
}

/// Rule used on every element outside a target's singular set (HOBI only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularRule {
    /// The four-point degree-3 rule.
    GaussRadau4,
    /// `n x n` conical Gauss product; costs `n^2 / 4` times more per matvec.
    CollapsedGauss(usize),
}

impl RegularRule {
    pub fn build(self) -> Result<TriangleRule> {
        match self {
            RegularRule::GaussRadau4 => Ok(gauss_radau_rule()),
            RegularRule::CollapsedGauss(n) => collapsed_gauss_rule(n),
        }
    }
}

impl std::str::FromStr for RegularRule {
    type Err = Error;

    /// `radau4`, or `gauss:N` for the `N x N` collapsed product.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "radau4" {
            return Ok(RegularRule::GaussRadau4);
        }
        lower
            .strip_prefix("gauss:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| (1..=32).contains(n))
            .map(RegularRule::CollapsedGauss)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown regular rule '{s}' (expected radau4 or gauss:N)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual target, in (0, 1).
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    /// Threads used by the operator.
    pub workers: usize,
    pub scheme: Scheme,
    pub regular_rule: RegularRule,
    /// Gauss-Legendre points per direction of the Duffy rule.
    pub singular_order: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            restart: 100,
            max_iterations: 1000,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            scheme: Scheme::Hobi,
            regular_rule: RegularRule::GaussRadau4,
            singular_order: 4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if self.restart == 0 {
            return Err(Error::InvalidArgument("restart length must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("worker count must be >= 1".into()));
        }
        if let RegularRule::CollapsedGauss(n) = self.regular_rule {
            if !(1..=32).contains(&n) {
                return Err(Error::InvalidArgument(format!("regular rule order must lie in 1..=32, got {n}")));
            }
        }
        if !(1..=32).contains(&self.singular_order) {
            return Err(Error::InvalidArgument(format!(
                "singular rule order must lie in 1..=32, got {}",
                self.singular_order
            )));
        }
        Ok(())
    }

    pub fn gmres_params(&self) -> GmresParams {
        GmresParams {
            tol: self.tol,
            restart: self.restart,
            max_iterations: self.max_iterations,
        }
    }
}

/// Surface potential and its normal derivative on the interior side, at
/// vertices (HOBI) or centroids (LOBI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSolution {
    pub phi: Vec<f64>,
    pub dphi_dn: Vec<f64>,
    pub scheme: Scheme,
    pub iterations: usize,
    pub residual: f64,
}

impl SurfaceSolution {
    /// Splits a stacked `[phi; dphi]` vector.
    pub fn from_stacked(u: &[f64], scheme: Scheme, iterations: usize, residual: f64) -> Self {
        let (phi, dphi) = u.split_at(u.len() / 2);
        SurfaceSolution {
            phi: phi.to_vec(),
            dphi_dn: dphi.to_vec(),
            scheme,
            iterations,
            residual,
        }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.phi.iter().chain(&self.dphi_dn).copied().collect()
    }
}

/// Right-hand side `[S1; S2] / eps1` at the collocation targets.
pub fn assemble_rhs(problem: &DiscretizedProblem) -> Result<Vec<f64>> {
    let n = problem.n_targets();
    let mut b = vec![0.0; 2 * n];
    let scale = 1.0 / problem.params.eps1;
    for (i, t) in problem.targets.iter().enumerate() {
        let (s1, s2) = source_terms(&t.position, &t.normal, &problem.charges)?;
        b[i] = s1 * scale;
        b[n + i] = s2 * scale;
    }
    Ok(b)
}

/// Solves the discretized system with GMRES from a zero start.
pub fn solve_surface(problem: &DiscretizedProblem, config: &SolverConfig) -> Result<SurfaceSolution> {
    let b = assemble_rhs(problem)?;
    let workers = config.workers;
    let sol = gmres_solve(|u, out| problem.apply(u, out, workers), &b, &config.gmres_params())?;
    Ok(SurfaceSolution::from_stacked(
        &sol.x,
        problem.scheme,
        sol.iterations,
        sol.residual,
    ))
}

/// Reaction potential at `x` (inside the solute) from the surface fields,
/// integrated with the regular rule only.
pub fn reaction_potential(problem: &DiscretizedProblem, solution: &SurfaceSolution, x: &crate::Vec3) -> f64 {
    let kappa = problem.params.kappa;
    let jump = problem.params.jump();
    let mut acc = 0.0;
    for p in problem.regular_points() {
        let (dphi, phi) = p.gather(&solution.phi, &solution.dphi_dn);
        let d = x - p.position;
        let k = kernels_unchecked(&d, d.norm_squared(), &p.normal, &p.normal, kappa, jump);
        acc += k.k1 * dphi + k.k2 * phi;
    }
    acc
}

/// Electrostatic solvation energy in kcal/mol.
pub fn solvation_energy(problem: &DiscretizedProblem, solution: &SurfaceSolution) -> f64 {
    let sum: f64 = problem
        .charges
        .iter()
        .map(|(x, q)| q * reaction_potential(problem, solution, x))
        .sum();
    0.5 * sum * ENERGY_SCALE
}

/// `max |num - exact| / max |exact|`.
pub fn surface_potential_error(numerical: &[f64], exact: &[f64]) -> Result<f64> {
    if numerical.len() != exact.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} numerical vs {} exact values",
            numerical.len(),
            exact.len()
        )));
    }
    let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidArgument("exact values are all zero".into()));
    }
    let err = numerical
        .iter()
        .zip(exact)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(err / scale)
}

/// Observed order of convergence between two meshes measured by a size
/// parameter such as density or element count. Positive when the error
/// decreases as the mesh is refined, whichever direction the parameter runs.
pub fn convergence_order(coarse_mesh: f64, fine_mesh: f64, coarse_error: f64, fine_error: f64) -> Result<f64> {
    if !(coarse_mesh > 0.0 && fine_mesh > 0.0 && coarse_error > 0.0 && fine_error > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "convergence order needs positive inputs, got mesh {coarse_mesh}, {fine_mesh} and errors {coarse_error}, {fine_error}"
        )));
    }
    if coarse_mesh == fine_mesh {
        return Err(Error::InvalidArgument("coarse and fine mesh sizes coincide".into()));
    }
    Ok((coarse_error / fine_error).ln() / (coarse_mesh / fine_mesh).ln().abs())
}

/// Wall time per pipeline phase in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub discretize: f64,
    pub solve: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub problem: DiscretizedProblem,
    pub solution: SurfaceSolution,
    /// kcal/mol.
    pub energy: f64,
    pub timings: PhaseTimings,
}

/// Full pipeline: discretize, solve, energy.
pub fn solve(
    mesh: &FlatMesh,
    params: &PhysicalParams,
    charges: &ChargeSystem,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let t0 = Instant::now();
    let problem = discretize(mesh, params, charges, config)?;
    let t1 = Instant::now();
    let solution = solve_surface(&problem, config)?;
    let t2 = Instant::now();
    let energy = solvation_energy(&problem, &solution);
    let t3 = Instant::now();
    Ok(SolveOutcome {
        problem,
        solution,
        energy,
        timings: PhaseTimings {
            discretize: (t1 - t0).as_secs_f64(),
            solve: (t2 - t1).as_secs_f64(),
            energy: (t3 - t2).as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests;
