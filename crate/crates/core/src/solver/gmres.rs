use serde::Serialize;

use crate::error::{Error, Result};

/// Stopping parameters for restarted GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmresParams {
    /// Relative residual target `||b - A x|| / ||b||`.
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

/// Converged iterate. `iterations` counts Arnoldi steps over all cycles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmresSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of `x`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual(apply: &mut impl FnMut(&[f64], &mut [f64]), b: &[f64], x: &[f64], work: &mut [f64]) -> Vec<f64> {
    apply(x, work);
    b.iter().zip(work.iter()).map(|(bi, ai)| bi - ai).collect()
}

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations,
/// started from `x = 0`. Returns [`Error::NotConverged`] with the best
/// relative residual seen when `max_iterations` steps are not enough.
pub fn gmres_solve(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    params: &GmresParams,
) -> Result<GmresSolution> {
    if !(params.tol > 0.0) || params.restart == 0 {
        return Err(Error::InvalidArgument(format!(
            "gmres needs tol > 0 and restart > 0, got tol={}, restart={}",
            params.tol, params.restart
        )));
    }
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(GmresSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }

    let m = params.restart.min(n.max(1));
    let mut work = vec![0.0; n];
    let mut r = b.to_vec();
    let mut iterations = 0;
    let mut best = 1.0;

    loop {
        let beta = norm(&r);
        let rel = beta / b_norm;
        best = f64::min(best, rel);
        if rel <= params.tol {
            return Ok(GmresSolution {
                x,
                iterations,
                residual: rel,
            });
        }
        if iterations >= params.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                residual: best,
            });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // column-major Hessenberg, h[k] has k + 2 entries
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut k = 0;
        while k < m && iterations < params.max_iterations {
            let mut w = vec![0.0; n];
            apply(&basis[k], &mut w);
            iterations += 1;
            let mut col = vec![0.0; k + 2];
            for (j, v) in basis.iter().enumerate() {
                col[j] = dot(&w, v);
                axpy(-col[j], v, &mut w);
            }
            let w_norm = norm(&w);
            col[k + 1] = w_norm;

            for j in 0..k {
                let (a, c) = (col[j], col[j + 1]);
                col[j] = cs[j] * a + sn[j] * c;
                col[j + 1] = -sn[j] * a + cs[j] * c;
            }
            let denom = col[k].hypot(col[k + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[k] / denom, col[k + 1] / denom) };
            col[k] = denom;
            col[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(col);
            k += 1;

            let estimate = g[k].abs() / b_norm;
            best = f64::min(best, estimate);
            if estimate <= params.tol || w_norm <= f64::EPSILON * b_norm {
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }

        // back substitution on the k x k triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut sum = g[i];
            for j in i + 1..k {
                sum -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] == 0.0 { 0.0 } else { sum / h[i][i] };
        }
        for (yj, v) in y.iter().zip(&basis) {
            axpy(*yj, v, &mut x);
        }
        r = residual(&mut apply, b, &x, &mut work);
    }
}
