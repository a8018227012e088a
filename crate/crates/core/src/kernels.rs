//! Coulomb and screened-Coulomb fundamental solutions and the kernels of
//! the second-kind boundary integral formulation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh_io::ChargeSystem;
use crate::Vec3;

const FOUR_PI: f64 = 4.0 * PI;

/// Dielectric constants of the solute (`eps1`) and solvent (`eps2`) and the
/// inverse Debye length `kappa` in 1/Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub eps1: f64,
    pub eps2: f64,
    pub kappa: f64,
}

impl PhysicalParams {
    pub fn new(eps1: f64, eps2: f64, kappa: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0 && eps1.is_finite() && eps2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dielectric constants must be positive, got eps1={eps1}, eps2={eps2}"
            )));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(PhysicalParams { eps1, eps2, kappa })
    }

    /// Ratio `eps1 / eps2`.
    pub fn eps(&self) -> f64 {
        self.eps1 / self.eps2
    }

    /// Ratio `eps2 / eps1`, the factor that multiplies the exterior
    /// equation when the two boundary representations are combined.
    pub fn jump(&self) -> f64 {
        self.eps2 / self.eps1
    }
}

/// `1 / (4 pi |x - y|)`.
pub fn g0(x: &Vec3, y: &Vec3) -> Result<f64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(1.0 / (FOUR_PI * r))
}

/// `exp(-kappa |x - y|) / (4 pi |x - y|)`.
pub fn g_kappa(x: &Vec3, y: &Vec3, kappa: f64) -> Result<f64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok((-kappa * r).exp() / (FOUR_PI * r))
}

/// The four kernels at one source/target pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelBlock {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

/// Evaluates `K1..K4` for target `(x, nx)` and source `(y, ny)`:
///
/// * `K1 = G0 - Gk`
/// * `K2 = e dGk/dny - dG0/dny`
/// * `K3 = dG0/dnx - (1/e) dGk/dnx`
/// * `K4 = d2Gk/dnx dny - d2G0/dnx dny`
///
/// with `e = eps2 / eps1`.
pub fn kernel_block(x: &Vec3, nx: &Vec3, y: &Vec3, ny: &Vec3, params: &PhysicalParams) -> Result<KernelBlock> {
    let d = x - y;
    let r2 = d.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(kernels_unchecked(&d, r2, nx, ny, params.kappa, params.jump()))
}

/// Kernel evaluation for a precomputed offset `d = x - y` with `r2 = |d|^2 > 0`.
#[inline]
pub(crate) fn kernels_unchecked(d: &Vec3, r2: f64, nx: &Vec3, ny: &Vec3, kappa: f64, jump: f64) -> KernelBlock {
    let r = r2.sqrt();
    let inv_r = 1.0 / r;
    let inv_r3 = inv_r / r2;
    let inv_r5 = inv_r3 / r2;
    let kr = kappa * r;
    let e = (-kr).exp();

    let dny = d.dot(ny);
    let dnx = d.dot(nx);
    let nxny = nx.dot(ny);

    // G(R) = e / (4 pi R)
    // dG/dny = e (1 + kR) (d.ny) / (4 pi R^3),  dG/dnx = -e (1 + kR) (d.nx) / (4 pi R^3)
    // d2G/dnx dny = e (1 + kR) (nx.ny) / (4 pi R^3) - e (3 + 3kR + k^2R^2) (d.nx)(d.ny) / (4 pi R^5)
    let first_k = e * (1.0 + kr);
    let second_k = e * (3.0 + 3.0 * kr + kr * kr);

    let k1 = (1.0 - e) * inv_r;
    let k2 = (jump * first_k - 1.0) * dny * inv_r3;
    let k3 = (first_k / jump - 1.0) * dnx * inv_r3;
    let k4 = (first_k - 1.0) * nxny * inv_r3 - (second_k - 3.0) * dnx * dny * inv_r5;

    KernelBlock {
        k1: k1 / FOUR_PI,
        k2: k2 / FOUR_PI,
        k3: k3 / FOUR_PI,
        k4: k4 / FOUR_PI,
    }
}

/// `S1 = sum q G0(x, y_k)`, `S2 = sum q dG0(x, y_k)/dnx`.
pub fn source_terms(x: &Vec3, nx: &Vec3, charges: &ChargeSystem) -> Result<(f64, f64)> {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (y, q) in charges.iter() {
        let d = x - y;
        let r2 = d.norm_squared();
        if r2 == 0.0 {
            return Err(Error::Singularity);
        }
        let r = r2.sqrt();
        s1 += q / (FOUR_PI * r);
        s2 -= q * d.dot(nx) / (FOUR_PI * r * r2);
    }
    Ok((s1, s2))
}
