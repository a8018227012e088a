//! Kirkwood's analytic solution for point charges inside a dielectric
//! sphere, used as ground truth for every sphere benchmark.
//!
//! Potentials use the solver's convention: the potential of a bare charge
//! `q` in the solute is `q / (4 pi eps1 |x - y|)`. Energies are converted to
//! kcal/mol with [`ENERGY_SCALE`].
//!
//! For a charge `q` at distance `rho` from the center, the interior
//! potential is the direct Coulomb term plus the reaction field
//! `sum_n A_n r^n P_n(cos g)`, and the exterior potential is
//! `sum_n V_n k_n(kappa r) / k_n(kappa a) P_n(cos g)` where `k_n` is the
//! modified spherical Bessel function of the second kind. Matching the
//! potential and the flux `eps1 d(phi1)/dr = eps2 d(phi2)/dr` at `r = a`
//! gives, with `E_n = q rho^n / (4 pi eps1)` and
//! `b_n = kappa a k_n'(kappa a) / k_n(kappa a)`,
//!
//! `A_n = E_n a^-(2n+1) (eps2 b_n + (n + 1) eps1) / (n eps1 - eps2 b_n)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::PhysicalParams;
use crate::mesh_io::ChargeSystem;
use crate::Vec3;

/// kcal·Å/(mol·e²): electrostatic energy of two unit charges 1 Å apart in vacuum.
pub const COULOMB_KCAL: f64 = 332.0716;

/// Converts `q * phi` (solver convention) to kcal/mol.
pub const ENERGY_SCALE: f64 = 4.0 * PI * COULOMB_KCAL;

pub const DEFAULT_TERMS: usize = 40;

/// A spherical cavity of radius `radius` centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereProblem {
    pub radius: f64,
    pub params: PhysicalParams,
    pub charges: ChargeSystem,
}

impl SphereProblem {
    pub fn new(radius: f64, params: PhysicalParams, charges: ChargeSystem) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        for (i, p) in charges.positions.iter().enumerate() {
            if !(p.norm() < radius - 1e-9) {
                return Err(Error::InvalidArgument(format!(
                    "charge {i} at distance {} is not strictly inside the sphere of radius {radius}",
                    p.norm()
                )));
            }
        }
        Ok(SphereProblem {
            radius,
            params,
            charges,
        })
    }
}

/// Closed-form Born/Debye solution for one charge at the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredSolution {
    /// Solvation energy, kcal/mol.
    pub energy: f64,
    /// Surface potential (uniform).
    pub phi: f64,
    /// Interior normal derivative on the surface (uniform).
    pub dphi: f64,
    /// Reaction potential inside the cavity (uniform).
    pub reaction: f64,
}

pub fn kirkwood_centered(problem: &SphereProblem) -> Result<CenteredSolution> {
    if problem.charges.len() != 1 || problem.charges.positions[0].norm() != 0.0 {
        return Err(Error::WrongOperation(
            "kirkwood_centered needs exactly one charge at the center; use kirkwood_series".into(),
        ));
    }
    let q = problem.charges.charges[0];
    let PhysicalParams { eps1, eps2, kappa } = problem.params;
    let a = problem.radius;
    let ka = kappa * a;
    let reaction = q / (4.0 * PI * a) * (1.0 / (eps2 * (1.0 + ka)) - 1.0 / eps1);
    Ok(CenteredSolution {
        energy: 0.5 * q * reaction * ENERGY_SCALE,
        phi: q / (4.0 * PI * a * eps2 * (1.0 + ka)),
        dphi: -q / (4.0 * PI * eps1 * a * a),
        reaction,
    })
}

/// Legendre polynomials `P_0..=P_n` at `x`.
pub fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        p.push(((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf);
    }
    p
}

/// `e^z k_n(z)` for `n = 0..=n_max` with `k_0(z) = e^-z / z`, by upward
/// recurrence (stable for the decaying solution).
pub fn scaled_bessel_k(n_max: usize, z: f64) -> Vec<f64> {
    let mut k = Vec::with_capacity(n_max + 1);
    k.push(1.0 / z);
    if n_max >= 1 {
        k.push((1.0 + 1.0 / z) / z);
    }
    for n in 1..n_max {
        let next = k[n - 1] + (2.0 * n as f64 + 1.0) / z * k[n];
        k.push(next);
    }
    k
}

/// Logarithmic derivatives `z k_n'(z) / k_n(z)` for `n = 0..=n_max`; the
/// `kappa = 0` limit `-(n + 1)` when `z == 0`.
pub fn bessel_log_derivatives(n_max: usize, z: f64) -> Vec<f64> {
    if z == 0.0 {
        return (0..=n_max).map(|n| -(n as f64 + 1.0)).collect();
    }
    // ratio_n = k_{n-1} / k_n obeys ratio_{n+1} = 1 / (ratio_n + (2n + 1) / z)
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(-(z + 1.0));
    let mut ratio = z / (z + 1.0);
    for n in 1..=n_max {
        // k_n' = -k_{n-1} - (n + 1) k_n / z
        out.push(-z * ratio - (n as f64 + 1.0));
        ratio = 1.0 / (ratio + (2.0 * n as f64 + 1.0) / z);
    }
    out
}

/// Truncated Kirkwood series for an arbitrary set of interior charges.
#[derive(Debug, Clone)]
pub struct KirkwoodSeries {
    problem: SphereProblem,
    n_terms: usize,
    /// `A_n / E_n * a^(2n+1)`: the dimensionless reaction ratio of mode `n`.
    reaction_ratio: Vec<f64>,
    /// |last term| / |previous term| of the energy series (0 when the tail vanishes).
    pub tail_ratio: f64,
    pub converged: bool,
    /// Solvation energy, kcal/mol.
    pub energy: f64,
}

const TAIL_LIMIT: f64 = 0.99;

/// Builds the series with modes `n = 0..n_terms`.
pub fn kirkwood_series(problem: &SphereProblem, n_terms: usize) -> Result<KirkwoodSeries> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let PhysicalParams { eps1, eps2, kappa } = problem.params;
    let beta = bessel_log_derivatives(n_terms, kappa * problem.radius);
    let reaction_ratio = (0..n_terms)
        .map(|n| {
            let nf = n as f64;
            (eps2 * beta[n] + (nf + 1.0) * eps1) / (nf * eps1 - eps2 * beta[n])
        })
        .collect();
    let mut series = KirkwoodSeries {
        problem: problem.clone(),
        n_terms,
        reaction_ratio,
        tail_ratio: 0.0,
        converged: true,
        energy: 0.0,
    };

    // energy = 1/2 sum_j q_j phi_reac(x_j), accumulated mode by mode
    let mut modes = vec![0.0; n_terms];
    let charges = &problem.charges;
    for (xj, qj) in charges.iter() {
        for (xk, qk) in charges.iter() {
            let cos_g = cos_between(xj, xk);
            let p = legendre(n_terms - 1, cos_g);
            for (n, mode) in modes.iter_mut().enumerate() {
                *mode += 0.5 * qj * series.mode_reaction(qk, xk.norm(), xj.norm(), n) * p[n];
            }
        }
    }
    series.energy = modes.iter().sum::<f64>() * ENERGY_SCALE;
    if n_terms >= 2 {
        let (last, prev) = (modes[n_terms - 1].abs(), modes[n_terms - 2].abs());
        series.tail_ratio = if prev > 0.0 {
            last / prev
        } else if last > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        series.converged = series.tail_ratio <= TAIL_LIMIT;
    }
    Ok(series)
}

fn cos_between(a: &Vec3, b: &Vec3) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        1.0
    } else {
        (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
    }
}

impl KirkwoodSeries {
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `A_n r^n` for a charge `q` at distance `rho`, evaluated at radius `r`.
    fn mode_reaction(&self, q: f64, rho: f64, r: f64, n: usize) -> f64 {
        let a = self.problem.radius;
        let scale = q / (4.0 * PI * self.problem.params.eps1 * a);
        scale * self.reaction_ratio[n] * pow(rho * r / (a * a), n)
    }

    /// Reaction potential at an interior point.
    pub fn reaction_potential(&self, x: &Vec3) -> f64 {
        self.sum_modes(x, |s, q, rho, r, n| s.mode_reaction(q, rho, r, n))
    }

    fn sum_modes(&self, x: &Vec3, term: impl Fn(&Self, f64, f64, f64, usize) -> f64) -> f64 {
        let r = x.norm();
        let mut total = 0.0;
        for (xk, qk) in self.problem.charges.iter() {
            let p = legendre(self.n_terms - 1, cos_between(x, xk));
            let rho = xk.norm();
            for (n, pn) in p.iter().enumerate() {
                total += term(self, qk, rho, r, n) * pn;
            }
        }
        total
    }

    fn coulomb(&self, x: &Vec3) -> f64 {
        self.problem
            .charges
            .iter()
            .map(|(y, q)| q / (4.0 * PI * self.problem.params.eps1 * (x - y).norm()))
            .sum()
    }

    /// Interior potential (Coulomb plus reaction) at `|x| < a`.
    pub fn interior_potential(&self, x: &Vec3) -> f64 {
        self.coulomb(x) + self.reaction_potential(x)
    }

    /// Surface potential in the direction of `x` (any nonzero point).
    pub fn surface_potential(&self, x: &Vec3) -> f64 {
        let on_sphere = x.normalize() * self.problem.radius;
        self.interior_potential(&on_sphere)
    }

    /// Interior-side outward normal derivative on the surface in the
    /// direction of `x`.
    pub fn surface_normal_derivative(&self, x: &Vec3) -> f64 {
        let a = self.problem.radius;
        let dir = x.normalize();
        let on_sphere = dir * a;
        let coulomb: f64 = self
            .problem
            .charges
            .iter()
            .map(|(y, q)| {
                let d = on_sphere - y;
                let dist = d.norm();
                -q * d.dot(&dir) / (4.0 * PI * self.problem.params.eps1 * dist * dist * dist)
            })
            .sum();
        // d/dr (A_n r^n) = n A_n r^(n-1)
        let reaction = self.sum_modes(&on_sphere, |s, q, rho, r, n| {
            if n == 0 {
                0.0
            } else {
                n as f64 * s.mode_reaction(q, rho, r, n) / r
            }
        });
        coulomb + reaction
    }

    /// Exterior potential at `|x| > a`.
    pub fn exterior_potential(&self, x: &Vec3) -> f64 {
        let a = self.problem.radius;
        let r = x.norm();
        let kappa = self.problem.params.kappa;
        let radial: Vec<f64> = if kappa == 0.0 {
            (0..self.n_terms).map(|n| pow(a / r, n + 1)).collect()
        } else {
            let at_a = scaled_bessel_k(self.n_terms, kappa * a);
            let at_r = scaled_bessel_k(self.n_terms, kappa * r);
            let damp = (-kappa * (r - a)).exp();
            (0..self.n_terms).map(|n| damp * at_r[n] / at_a[n]).collect()
        };
        self.sum_modes(x, |s, q, rho, _, n| {
            // surface value of mode n: E_n a^-(n+1) + A_n a^n
            let scale = q / (4.0 * PI * s.problem.params.eps1 * a);
            scale * pow(rho / a, n) * (1.0 + s.reaction_ratio[n]) * radial[n]
        })
    }
}

/// Number of modes needed so that the slowest decaying term, which scales
/// like `(rho / a)^n`, drops below 1e-13 (never fewer than [`DEFAULT_TERMS`]).
pub fn recommended_terms(problem: &SphereProblem) -> usize {
    let max_ratio = problem
        .charges
        .positions
        .iter()
        .map(|p| p.norm() / problem.radius)
        .fold(0.0, f64::max);
    if max_ratio <= 0.0 {
        return DEFAULT_TERMS;
    }
    let needed = (1e-13f64.ln() / max_ratio.ln()).ceil() as usize + 1;
    needed.clamp(DEFAULT_TERMS, 5000)
}

fn pow(x: f64, n: usize) -> f64 {
    x.powi(n as i32)
}
