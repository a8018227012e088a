use super::*;
use crate::kernels::kernel_block;
use crate::mesh_io::icosahedral_sphere;
use crate::oracle::{kirkwood_series, SphereProblem};
use crate::Vec3;

use rand::{Rng, SeedableRng};

fn sphere(level: u32, radius: f64) -> FlatMesh {
    icosahedral_sphere(level, radius, Vec3::zeros()).unwrap()
}

fn config(scheme: Scheme, workers: usize) -> SolverConfig {
    SolverConfig {
        scheme,
        workers,
        ..SolverConfig::default()
    }
}

fn centered() -> ChargeSystem {
    ChargeSystem::single(Vec3::zeros(), 1.0)
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn equal_dielectrics_without_salt_give_identity() {
    let mesh = sphere(2, 1.5);
    let params = PhysicalParams::new(2.0, 2.0, 0.0).unwrap();
    for scheme in [Scheme::Hobi, Scheme::Lobi] {
        let problem = discretize(&mesh, &params, &centered(), &config(scheme, 1)).unwrap();
        for seed in 0..3 {
            let u = random_vec(problem.dim(), seed);
            let au = match scheme {
                Scheme::Hobi => matvec_hobi(&problem, &u, 1).unwrap(),
                Scheme::Lobi => matvec_lobi(&problem, &u, 1).unwrap(),
            };
            let err = au.iter().zip(&u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-13, "{scheme:?}: {err}");
        }
    }
}

#[test]
fn operator_is_linear() {
    let mesh = sphere(1, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.3).unwrap();
    for scheme in [Scheme::Hobi, Scheme::Lobi] {
        let problem = discretize(&mesh, &params, &centered(), &config(scheme, 1)).unwrap();
        let (u, v) = (random_vec(problem.dim(), 1), random_vec(problem.dim(), 2));
        let (alpha, beta) = (0.7, -1.3);
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let mut au = vec![0.0; u.len()];
        let mut av = au.clone();
        let mut aw = au.clone();
        problem.apply(&u, &mut au, 1);
        problem.apply(&v, &mut av, 1);
        problem.apply(&w, &mut aw, 1);
        for i in 0..u.len() {
            let expect = alpha * au[i] + beta * av[i];
            assert!((aw[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()), "{scheme:?} row {i}");
        }
    }
}

#[test]
fn matvec_rejects_wrong_scheme_and_length() {
    let mesh = sphere(0, 1.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Lobi, 1)).unwrap();
    assert!(matches!(
        matvec_hobi(&problem, &vec![0.0; problem.dim()], 1),
        Err(Error::WrongOperation(_))
    ));
    assert!(matches!(matvec_lobi(&problem, &[0.0; 3], 1), Err(Error::InvalidArgument(_))));
}

#[test]
fn lobi_potential_block_matches_naive_double_loop() {
    let mesh = sphere(0, 1.0);
    let params = PhysicalParams::new(2.0, 80.0, 0.5).unwrap();
    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Lobi, 1)).unwrap();
    let nf = mesh.n_faces();
    assert_eq!(nf, 20);
    let mut u = vec![0.0; 2 * nf];
    u[..nf].fill(1.0);
    let au = matvec_lobi(&problem, &u, 1).unwrap();
    let diag = 0.5 * (1.0 + params.jump());
    for i in 0..nf {
        let xi = mesh.face_centroid(i);
        let ni = mesh.face_cross(i).normalize();
        let mut row = 0.0;
        for j in 0..nf {
            if j == i {
                continue;
            }
            let yj = mesh.face_centroid(j);
            let nj = mesh.face_cross(j).normalize();
            row += kernel_block(&xi, &ni, &yj, &nj, &params).unwrap().k2 * mesh.face_area(j);
        }
        assert!((diag - au[i] - row).abs() <= 1e-13, "row {i}");
    }
}

#[test]
fn rhs_of_zero_and_centered_charges() {
    let mesh = sphere(2, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let none = ChargeSystem::new(vec![], vec![]).unwrap();
    let problem = discretize(&mesh, &params, &none, &config(Scheme::Hobi, 1)).unwrap();
    assert!(assemble_rhs(&problem).unwrap().iter().all(|&v| v == 0.0));

    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Hobi, 1)).unwrap();
    let b = assemble_rhs(&problem).unwrap();
    let n = problem.n_targets();
    for v in &b[..n] {
        assert!((v - 1.0 / (8.0 * std::f64::consts::PI)).abs() <= 1e-12);
    }
}

#[test]
fn rhs_is_antisymmetric_under_mirror() {
    // the icosphere is symmetric under x -> -x
    let mesh = sphere(2, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let charges = ChargeSystem::new(vec![Vec3::new(0.7, 0.1, -0.2), Vec3::new(-0.7, 0.1, -0.2)], vec![1.0, -1.0]).unwrap();
    let problem = discretize(&mesh, &params, &charges, &config(Scheme::Hobi, 1)).unwrap();
    let b = assemble_rhs(&problem).unwrap();
    let n = problem.n_targets();
    for i in 0..n {
        let p = mesh.vertices[i];
        let mirror = Vec3::new(-p.x, p.y, p.z);
        let k = (0..n)
            .min_by(|&a, &c| {
                (mesh.vertices[a] - mirror)
                    .norm()
                    .total_cmp(&(mesh.vertices[c] - mirror).norm())
            })
            .unwrap();
        assert!((mesh.vertices[k] - mirror).norm() < 1e-12);
        assert!((b[i] + b[k]).abs() <= 1e-12, "phi row {i}");
        assert!((b[n + i] + b[n + k]).abs() <= 1e-12, "dphi row {i}");
    }
}

#[test]
fn singular_sets_and_cache_shape() {
    let mesh = sphere(1, 1.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Hobi, 1)).unwrap();
    for (i, set) in problem.singular_sets.iter().enumerate() {
        assert!(set.len() == 5 || set.len() == 6, "vertex {i} valence {}", set.len());
        assert!(set.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(problem.singular_points(i).len(), set.len() * 16);
        // the barycentric weight of the target vertex dominates near the corner
        let corner = &problem.singular_points(i)[0];
        assert!(corner.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
    }
    assert_eq!(problem.regular_points().len(), mesh.n_faces() * 4);
    assert_eq!(problem.regular_rule.degree, 3);
    assert!(problem.cache_bytes() > problem.regular_points().len() * 64);
}

#[test]
fn duffy_points_approach_the_target_vertex() {
    let mesh = sphere(1, 1.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Hobi, 1)).unwrap();
    for i in 0..problem.n_targets() {
        let x = problem.targets[i].position;
        for (slot, &j) in problem.singular_sets[i].iter().enumerate() {
            let pts = &problem.singular_points(i)[slot * 16..(slot + 1) * 16];
            let nearest = pts.iter().map(|p| (p.position - x).norm()).fold(f64::INFINITY, f64::min);
            let far = problem.regular_points()[j * 4..(j + 1) * 4]
                .iter()
                .map(|p| (p.position - x).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 0.5 * far, "vertex {i}, element {j}");
            // weights of one element sum to its curved area
            let w: f64 = pts.iter().map(|p| p.weights.iter().sum::<f64>()).sum();
            let wr: f64 = problem.regular_points()[j * 4..(j + 1) * 4]
                .iter()
                .map(|p| p.weights.iter().sum::<f64>())
                .sum();
            assert!((w - wr).abs() < 1e-3 * wr);
        }
    }
}

#[test]
fn partitions_cover_targets() {
    let sizes = |n, w| partition_targets(n, w).iter().map(|r| r.len()).collect::<Vec<_>>();
    assert_eq!(sizes(10, 3), vec![4, 3, 3]);
    assert_eq!(sizes(5, 8), vec![1, 1, 1, 1, 1, 0, 0, 0]);
    assert_eq!(sizes(0, 4), vec![0, 0, 0, 0]);
    assert_eq!(partition_targets(7, 1), vec![0..7]);
}

#[test]
fn matvec_is_identical_for_any_worker_count() {
    let mesh = sphere(2, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.2).unwrap();
    for scheme in [Scheme::Hobi, Scheme::Lobi] {
        let problem = discretize(&mesh, &params, &centered(), &config(scheme, 1)).unwrap();
        let u = random_vec(problem.dim(), 9);
        let mut reference = vec![0.0; u.len()];
        problem.apply(&u, &mut reference, 1);
        for workers in [2, 4, 8] {
            let mut out = vec![0.0; u.len()];
            problem.apply(&u, &mut out, workers);
            assert_eq!(out, reference, "{scheme:?} with {workers} workers");
        }
    }
}

#[test]
fn tiny_problem_with_more_workers_than_targets() {
    let mesh = sphere(0, 1.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let problem = discretize(&mesh, &params, &centered(), &config(Scheme::Hobi, 1)).unwrap();
    let u = random_vec(problem.dim(), 4);
    let mut a = vec![0.0; u.len()];
    let mut b = a.clone();
    problem.apply(&u, &mut a, 1);
    problem.apply(&u, &mut b, 64);
    assert_eq!(a, b);
}

#[test]
fn gmres_on_diagonal_system() {
    let params = GmresParams {
        tol: 1e-10,
        restart: 100,
        max_iterations: 1000,
    };
    let sol = gmres_solve(
        |u, out| {
            out[0] = 2.0 * u[0];
            out[1] = 3.0 * u[1];
        },
        &[2.0, 3.0],
        &params,
    )
    .unwrap();
    assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] - 1.0).abs() < 1e-10);
}

fn kirkwood_trace(problem: &DiscretizedProblem, series: &crate::oracle::KirkwoodSeries) -> Vec<f64> {
    let n = problem.n_targets();
    let mut u = vec![0.0; 2 * n];
    for (i, t) in problem.targets.iter().enumerate() {
        u[i] = series.surface_potential(&t.position);
        u[n + i] = series.surface_normal_derivative(&t.position);
    }
    u
}

#[test]
fn exact_trace_nearly_satisfies_discrete_equations() {
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let charges = ChargeSystem::new(vec![Vec3::new(0.4, 0.3, -0.2)], vec![1.0]).unwrap();
    let series = kirkwood_series(&SphereProblem::new(2.0, params, charges.clone()).unwrap(), 60).unwrap();
    let mut previous = f64::INFINITY;
    for level in [2, 3] {
        let mesh = sphere(level, 2.0);
        let problem = discretize(&mesh, &params, &charges, &config(Scheme::Hobi, 1)).unwrap();
        let u = kirkwood_trace(&problem, &series);
        let b = assemble_rhs(&problem).unwrap();
        let mut au = vec![0.0; u.len()];
        problem.apply(&u, &mut au, 1);
        let res = au.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            / b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 5e-3, "level {level}: {res}");
        assert!(res < previous, "level {level}: {res} !< {previous}");
        previous = res;
    }
}

#[test]
fn born_energy_on_a_coarse_sphere() {
    let mesh = sphere(2, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let run = solve(&mesh, &params, &centered(), &config(Scheme::Hobi, 1)).unwrap();
    assert!((run.energy + 81.98).abs() < 0.5, "{}", run.energy);
    assert!(run.solution.iterations <= 20);
    assert!(run.solution.residual <= 1e-6);
    assert_eq!(run.solution.phi.len(), mesh.n_vertices());
}

#[test]
fn finer_regular_rule_reduces_the_error() {
    let mesh = sphere(2, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let exact = crate::oracle::kirkwood_centered(&SphereProblem::new(2.0, params, centered()).unwrap())
        .unwrap()
        .phi;
    let mut errors = Vec::new();
    for regular_rule in [RegularRule::GaussRadau4, RegularRule::CollapsedGauss(4)] {
        let config = SolverConfig {
            regular_rule,
            tol: 1e-10,
            ..config(Scheme::Hobi, 1)
        };
        let run = solve(&mesh, &params, &centered(), &config).unwrap();
        assert_eq!(run.problem.regular_points().len(), mesh.n_faces() * run.problem.regular_rule.len());
        let exact = vec![exact; run.solution.phi.len()];
        errors.push(surface_potential_error(&run.solution.phi, &exact).unwrap());
    }
    assert!(errors[1] < 0.2 * errors[0], "{errors:?}");
}

#[test]
fn no_charges_no_energy() {
    let mesh = sphere(1, 2.0);
    let params = PhysicalParams::new(1.0, 80.0, 0.0).unwrap();
    let none = ChargeSystem::new(vec![], vec![]).unwrap();
    let run = solve(&mesh, &params, &none, &config(Scheme::Hobi, 1)).unwrap();
    assert_eq!(run.energy, 0.0);
    assert_eq!(run.solution.iterations, 0);
}

#[test]
fn error_metric_examples() {
    let exact = vec![0.5, -1.0, 0.25];
    assert_eq!(surface_potential_error(&exact, &exact).unwrap(), 0.0);
    let uniform = vec![2.0; 5];
    let scaled: Vec<f64> = uniform.iter().map(|v| 1.01 * v).collect();
    assert!((surface_potential_error(&scaled, &uniform).unwrap() - 0.01).abs() < 1e-14);
    assert!(surface_potential_error(&[1.0], &[0.0]).is_err());
    assert!(surface_potential_error(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn order_examples() {
    let o = convergence_order(5.0, 10.0, 4.07e-4, 2.55e-4).unwrap();
    assert!((o - 0.67).abs() < 5e-3, "{o}");
    assert_eq!(convergence_order(5.0, 10.0, 1e-3, 1e-3).unwrap(), 0.0);
    assert!((convergence_order(5.0, 10.0, 2e-3, 1e-3).unwrap() - 1.0).abs() < 1e-14);
    assert!(convergence_order(5.0, 5.0, 2e-3, 1e-3).is_err());
    assert!(convergence_order(5.0, 10.0, 0.0, 1e-3).is_err());
}

#[test]
fn config_validation() {
    let mut c = SolverConfig::default();
    assert!(c.validate().is_ok());
    c.tol = 1.0;
    assert!(c.validate().is_err());
    c = SolverConfig {
        restart: 0,
        ..SolverConfig::default()
    };
    assert!(c.validate().is_err());
    assert_eq!("LOBI".parse::<Scheme>().unwrap(), Scheme::Lobi);
    assert_eq!("radau4".parse::<RegularRule>().unwrap(), RegularRule::GaussRadau4);
    assert_eq!("gauss:5".parse::<RegularRule>().unwrap(), RegularRule::CollapsedGauss(5));
    assert!("gauss:0".parse::<RegularRule>().is_err());
    assert!("flat".parse::<Scheme>().is_err());
}
