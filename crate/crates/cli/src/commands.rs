use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use hobi_pb::oracle::{kirkwood_series, recommended_terms, KirkwoodSeries};
use hobi_pb::solver::{discretize, solve_surface};
use hobi_pb::{
    convergence_order, icosahedral_sphere, parse_charges, parse_msms, solve, surface_potential_error, ChargeSystem,
    FlatMesh, PhysicalParams, Scheme, SolveOutcome, SolverConfig, SphereProblem, Vec3,
};
use serde::{Deserialize, Serialize};

use crate::args::{ChargeArgs, ConvergenceArgs, MeshArgs, PhysicsArgs, ScalingArgs, SolveArgs, SolverArgs};
use crate::report::{RunReport, ScalingRow};
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn load_charges(args: &ChargeArgs) -> Result<ChargeSystem, CliError> {
    let mut positions = Vec::new();
    let mut charges = Vec::new();
    if let Some(path) = &args.charges {
        let from_file = parse_charges(&read(path)?)?;
        positions.extend(from_file.positions);
        charges.extend(from_file.charges);
    }
    for c in &args.inline {
        positions.push(Vec3::from(c.position));
        charges.push(c.charge);
    }
    if positions.is_empty() {
        return Err(CliError::Usage("no charges given; pass --charges FILE or --charge X,Y,Z,Q".into()));
    }
    Ok(ChargeSystem::new(positions, charges)?)
}

/// The mesh plus the sphere radius when it was generated.
pub(crate) fn load_mesh(args: &MeshArgs) -> Result<(FlatMesh, String, Option<f64>), CliError> {
    match (&args.vert, &args.face, args.sphere) {
        (Some(vert), Some(face), _) => {
            let mesh = parse_msms(&read(vert)?, &read(face)?)?;
            Ok((mesh, format!("msms:{}", vert.display()), None))
        }
        (_, _, Some(s)) => {
            let mesh = icosahedral_sphere(s.level, s.radius, Vec3::zeros())?;
            Ok((mesh, format!("sphere:{},{}", s.level, s.radius), Some(s.radius)))
        }
        _ => Err(CliError::Usage("give either --vert and --face or --sphere LEVEL,RADIUS".into())),
    }
}

fn physical(args: &PhysicsArgs) -> Result<PhysicalParams, CliError> {
    Ok(PhysicalParams::new(args.eps1, args.eps2, args.kappa)?)
}

fn config(args: &SolverArgs, scheme: Scheme, workers: Option<usize>) -> SolverConfig {
    let default = SolverConfig::default();
    SolverConfig {
        tol: args.tol,
        restart: args.restart,
        max_iterations: args.max_iterations,
        workers: workers.unwrap_or(default.workers),
        scheme,
        regular_rule: args.regular_rule,
        singular_order: args.singular_order,
    }
}

/// Kirkwood series when the mesh is an origin-centered sphere and every
/// charge lies strictly inside it.
fn sphere_oracle(radius: Option<f64>, params: &PhysicalParams, charges: &ChargeSystem) -> Option<KirkwoodSeries> {
    let problem = SphereProblem::new(radius?, *params, charges.clone()).ok()?;
    kirkwood_series(&problem, recommended_terms(&problem)).ok()
}

fn phi_error(run: &SolveOutcome, oracle: &KirkwoodSeries) -> Result<f64, CliError> {
    let exact: Vec<f64> = run
        .problem
        .targets
        .iter()
        .map(|t| oracle.surface_potential(&t.position))
        .collect();
    Ok(surface_potential_error(&run.solution.phi, &exact)?)
}

fn memory_lower_bound_mb(run: &SolveOutcome, restart: usize) -> f64 {
    let dim = run.problem.dim();
    let krylov = (run.solution.iterations.min(restart) + 1 + 3) * dim * std::mem::size_of::<f64>();
    (run.problem.cache_bytes() + krylov) as f64 / (1024.0 * 1024.0)
}

fn build_report(
    run: &SolveOutcome,
    source: &str,
    config: &SolverConfig,
    oracle: Option<&KirkwoodSeries>,
    timings: bool,
) -> Result<RunReport, CliError> {
    let p = &run.problem;
    let e_phi = oracle.map(|o| phi_error(run, o)).transpose()?;
    Ok(RunReport {
        mesh_source: source.to_string(),
        n_vertices: p.mesh.n_vertices(),
        n_faces: p.mesh.n_faces(),
        eps1: p.params.eps1,
        eps2: p.params.eps2,
        kappa: p.params.kappa,
        n_charges: p.charges.len(),
        scheme: p.scheme.as_str().to_string(),
        regular_rule: p.regular_rule.name.clone(),
        regular_rule_degree: p.regular_rule.degree,
        singular_rule: p.singular_rule.as_ref().map(|r| r.name.clone()),
        energy: run.energy,
        exact_energy: oracle.map(|o| o.energy),
        e_phi,
        observed_order: None,
        iterations: run.solution.iterations,
        residual: run.solution.residual,
        t_discretize: timings.then_some(run.timings.discretize),
        t_solve: timings.then_some(run.timings.solve),
        t_energy: timings.then_some(run.timings.energy),
        workers: config.workers,
        memory_lower_bound_mb: memory_lower_bound_mb(run, config.restart),
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<RunReport, CliError> {
    let (mesh, source, radius) = load_mesh(&args.mesh)?;
    let charges = load_charges(&args.charges)?;
    let params = physical(&args.physics)?;
    let config = config(&args.solver, args.scheme.into(), args.workers);
    let run = solve(&mesh, &params, &charges, &config)?;
    let oracle = sphere_oracle(radius, &params, &charges);
    build_report(&run, &source, &config, oracle.as_ref(), !args.output.no_timings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub scheme: String,
    pub coarse_level: u32,
    pub fine_level: u32,
    pub order: f64,
}

/// Per-level head-to-head of the two schemes; recorded, not judged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub level: u32,
    pub hobi_e_phi: f64,
    pub lobi_e_phi: f64,
    pub lobi_more_accurate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub reports: Vec<RunReport>,
    pub orders: Vec<OrderRow>,
    pub comparisons: Vec<Comparison>,
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<ConvergenceReport, CliError> {
    if args.levels.is_empty() || args.schemes.is_empty() {
        return Err(CliError::Usage("need at least one level and one scheme".into()));
    }
    let charges = load_charges(&args.charges)?;
    let params = physical(&args.physics)?;
    let problem = SphereProblem::new(args.radius, params, charges.clone())?;
    let oracle = kirkwood_series(&problem, recommended_terms(&problem))?;
    let area = 4.0 * PI * args.radius * args.radius;

    let mut reports = Vec::new();
    let mut orders = Vec::new();
    let mut errors = Vec::new();
    for &scheme in &args.schemes {
        let config = config(&args.solver, scheme.into(), args.workers);
        let mut previous: Option<(u32, f64, f64)> = None;
        for &level in &args.levels {
            let mesh = icosahedral_sphere(level, args.radius, Vec3::zeros())?;
            let run = solve(&mesh, &params, &charges, &config)?;
            let source = format!("sphere:{level},{}", args.radius);
            let mut report = build_report(&run, &source, &config, Some(&oracle), !args.output.no_timings)?;
            let density = mesh.n_faces() as f64 / area;
            let err = report.e_phi.expect("sphere sweeps always have an oracle");
            if let Some((coarse_level, coarse_density, coarse_err)) = previous {
                let order = convergence_order(coarse_density, density, coarse_err, err)?;
                report.observed_order = Some(order);
                orders.push(OrderRow {
                    scheme: report.scheme.clone(),
                    coarse_level,
                    fine_level: level,
                    order,
                });
            }
            previous = Some((level, density, err));
            errors.push((Scheme::from(scheme), level, err));
            reports.push(report);
        }
    }

    let mut comparisons = Vec::new();
    for &level in &args.levels {
        let err = |scheme: Scheme| {
            errors
                .iter()
                .find(|&&(s, l, _)| s == scheme && l == level)
                .map(|&(_, _, e)| e)
        };
        if let (Some(h), Some(l)) = (err(Scheme::Hobi), err(Scheme::Lobi)) {
            comparisons.push(Comparison {
                level,
                hobi_e_phi: h,
                lobi_e_phi: l,
                lobi_more_accurate: l < h,
            });
        }
    }
    Ok(ConvergenceReport {
        reports,
        orders,
        comparisons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub report: RunReport,
    pub rows: Vec<ScalingRow>,
}

pub fn cmd_scaling(args: &ScalingArgs) -> Result<ScalingReport, CliError> {
    if args.workers_list.iter().any(|&w| w == 0) || args.workers_list.is_empty() {
        return Err(CliError::Usage("worker counts must be positive".into()));
    }
    let (mesh, source, radius) = load_mesh(&args.mesh)?;
    let charges = load_charges(&args.charges)?;
    let params = physical(&args.physics)?;
    let base = config(&args.solver, args.scheme.into(), Some(1));

    let t0 = Instant::now();
    let problem = discretize(&mesh, &params, &charges, &base)?;
    let t_discretize = t0.elapsed().as_secs_f64();

    let mut counts = vec![1];
    counts.extend(args.workers_list.iter().copied().filter(|&w| w != 1));

    let mut rows = Vec::new();
    let mut baseline: Option<(f64, Vec<f64>)> = None;
    let mut first_run = None;
    for &workers in &counts {
        let cfg = SolverConfig { workers, ..base.clone() };
        let t = Instant::now();
        let solution = solve_surface(&problem, &cfg)?;
        let wall = t.elapsed().as_secs_f64().max(1e-9);
        let u = solution.stacked();
        let (t1, u1) = baseline.get_or_insert_with(|| (wall, u.clone()));
        let max_abs_diff = u.iter().zip(u1.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let row = ScalingRow {
            workers,
            wall_time: wall,
            speedup: *t1 / wall,
            efficiency: *t1 / (workers as f64 * wall),
            max_abs_diff,
            iterations: solution.iterations,
        };
        if workers == 1 && first_run.is_none() {
            first_run = Some((solution, wall));
        }
        if workers != 1 || args.workers_list.contains(&1) {
            rows.push(row);
        }
    }

    let (solution, t_solve) = first_run.expect("baseline run always happens");
    let t = Instant::now();
    let energy = hobi_pb::solver::solvation_energy(&problem, &solution);
    let t_energy = t.elapsed().as_secs_f64();
    let run = SolveOutcome {
        problem,
        solution,
        energy,
        timings: hobi_pb::solver::PhaseTimings {
            discretize: t_discretize,
            solve: t_solve,
            energy: t_energy,
        },
    };
    let oracle = sphere_oracle(radius, &params, &charges);
    let report = build_report(&run, &source, &base, oracle.as_ref(), !args.output.no_timings)?;
    Ok(ScalingReport { report, rows })
}
