//! Surface-potential error, energy and iteration counts on icosahedral
//! spheres for both schemes.
//!
//! cargo run --release -p hobi-pb --example sphere_sweep -- [max_level] [x] [radius] [kappa] [rule]

use hobi_pb::oracle::{kirkwood_series, recommended_terms};
use hobi_pb::{
    icosahedral_sphere, solve, surface_potential_error, ChargeSystem, PhysicalParams, RegularRule, Scheme,
    SolverConfig, SphereProblem, Vec3,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, default: f64| args.get(i).map_or(Ok(default), |a| a.parse::<f64>());
    let max_level = num(0, 3.0)? as u32;
    let offset = num(1, 0.0)?;
    let radius = num(2, 2.0)?;
    let kappa = num(3, 0.0)?;
    let regular_rule: RegularRule = args.get(4).map_or("radau4", String::as_str).parse()?;

    let params = PhysicalParams::new(1.0, 80.0, kappa)?;
    let charges = ChargeSystem::single(Vec3::new(offset, 0.0, 0.0), 1.0);
    let sphere = SphereProblem::new(radius, params, charges.clone())?;
    let series = kirkwood_series(&sphere, recommended_terms(&sphere))?;
    println!("exact energy {:.4}", series.energy);
    println!("scheme level n_f iters e_phi energy t_solve");
    for scheme in [Scheme::Hobi, Scheme::Lobi] {
        for level in 1..=max_level {
            let mesh = icosahedral_sphere(level, radius, Vec3::zeros())?;
            let config = SolverConfig {
                scheme,
                regular_rule,
                ..SolverConfig::default()
            };
            let run = solve(&mesh, &params, &charges, &config)?;
            let exact: Vec<f64> = run
                .problem
                .targets
                .iter()
                .map(|t| series.surface_potential(&t.position))
                .collect();
            let err = surface_potential_error(&run.solution.phi, &exact)?;
            println!(
                "{} {level} {} {} {err:.3e} {:.4} {:.2}",
                scheme.as_str(),
                mesh.n_faces(),
                run.solution.iterations,
                run.energy,
                run.timings.solve
            );
        }
    }
    Ok(())
}
