use std::ops::Range;

use crate::error::{Error, Result};
use crate::kernels::kernels_unchecked;

use super::problem::{DiscretizedProblem, QuadPoint, Target};
use super::Scheme;

/// Splits `0..n_targets` into `n_workers` contiguous ranges whose sizes
/// differ by at most one; the first `n_targets % n_workers` ranges get the
/// extra target.
pub fn partition_targets(n_targets: usize, n_workers: usize) -> Vec<Range<usize>> {
    let n_workers = n_workers.max(1);
    let base = n_targets / n_workers;
    let extra = n_targets % n_workers;
    let mut start = 0;
    (0..n_workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

/// Weighted field values `(dphi, phi)` at every cached point.
fn gather(points: &[QuadPoint], phi: &[f64], dphi: &[f64]) -> Vec<(f64, f64)> {
    points.iter().map(|p| p.gather(phi, dphi)).collect()
}

struct Fields<'a> {
    regular: &'a [(f64, f64)],
    singular: &'a [(f64, f64)],
}

#[inline]
fn accumulate(
    target: &Target,
    points: &[QuadPoint],
    values: &[(f64, f64)],
    kappa: f64,
    jump: f64,
    acc: &mut (f64, f64),
) {
    for (p, &(dphi, phi)) in points.iter().zip(values) {
        let d = target.position - p.position;
        let r2 = d.norm_squared();
        let k = kernels_unchecked(&d, r2, &target.normal, &p.normal, kappa, jump);
        acc.0 += k.k1 * dphi + k.k2 * phi;
        acc.1 += k.k3 * dphi + k.k4 * phi;
    }
}

/// Integral part of row `i`: `(sum K1 dphi + K2 phi, sum K3 dphi + K4 phi)`.
/// Contributions are added element by element in index order, the
/// singular ones in place of the regular ones they replace.
fn integral_row(problem: &DiscretizedProblem, fields: &Fields, i: usize) -> (f64, f64) {
    let kappa = problem.params.kappa;
    let jump = problem.params.jump();
    let npe = problem.points_per_element();
    let nsing = problem.singular_rule.as_ref().map_or(0, |r| r.len());
    let target = &problem.targets[i];
    let offset = problem.singular_offsets[i];
    let singular_set = &problem.singular_sets[i];

    let mut acc = (0.0, 0.0);
    let mut start = 0;
    for (slot, &j) in singular_set.iter().enumerate() {
        let end = j * npe;
        accumulate(
            target,
            &problem.regular[start..end],
            &fields.regular[start..end],
            kappa,
            jump,
            &mut acc,
        );
        let s = offset + slot * nsing;
        accumulate(
            target,
            &problem.singular[s..s + nsing],
            &fields.singular[s..s + nsing],
            kappa,
            jump,
            &mut acc,
        );
        start = end + npe;
    }
    let end = problem.regular.len();
    accumulate(
        target,
        &problem.regular[start..end],
        &fields.regular[start..end],
        kappa,
        jump,
        &mut acc,
    );
    acc
}

impl DiscretizedProblem {
    /// `out = A u` with `u = [phi; dphi]`, rows split across `workers`
    /// threads. Each row is computed by exactly one thread with a fixed
    /// summation order, so the result does not depend on `workers`.
    pub fn apply(&self, u: &[f64], out: &mut [f64], workers: usize) {
        let n = self.n_targets();
        assert_eq!(u.len(), 2 * n, "input has wrong length");
        assert_eq!(out.len(), 2 * n, "output has wrong length");
        let (phi, dphi) = u.split_at(n);
        let regular = gather(&self.regular, phi, dphi);
        let singular = gather(&self.singular, phi, dphi);
        let fields = Fields {
            regular: &regular,
            singular: &singular,
        };

        let jump = self.params.jump();
        let diag_phi = 0.5 * (1.0 + jump);
        let diag_dphi = 0.5 * (1.0 + 1.0 / jump);

        let mut rows = vec![(0.0, 0.0); n];
        let ranges = partition_targets(n, workers);
        if ranges.len() == 1 {
            for (i, row) in rows.iter_mut().enumerate() {
                *row = integral_row(self, &fields, i);
            }
        } else {
            std::thread::scope(|scope| {
                let mut rest = rows.as_mut_slice();
                for range in ranges {
                    let (chunk, tail) = rest.split_at_mut(range.len());
                    rest = tail;
                    let fields = &fields;
                    scope.spawn(move || {
                        for (row, i) in chunk.iter_mut().zip(range) {
                            *row = integral_row(self, fields, i);
                        }
                    });
                }
            });
        }

        let (out_phi, out_dphi) = out.split_at_mut(n);
        for i in 0..n {
            out_phi[i] = diag_phi * phi[i] - rows[i].0;
            out_dphi[i] = diag_dphi * dphi[i] - rows[i].1;
        }
    }
}

fn checked_apply(problem: &DiscretizedProblem, scheme: Scheme, u: &[f64], workers: usize) -> Result<Vec<f64>> {
    if problem.scheme != scheme {
        return Err(Error::WrongOperation(format!(
            "problem was discretized for {:?}, not {:?}",
            problem.scheme, scheme
        )));
    }
    if u.len() != problem.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match the {} unknowns",
            u.len(),
            problem.dim()
        )));
    }
    let mut out = vec![0.0; u.len()];
    problem.apply(u, &mut out, workers);
    Ok(out)
}

/// Curved-element operator applied to `u = [phi; dphi]` at the vertices.
pub fn matvec_hobi(problem: &DiscretizedProblem, u: &[f64], workers: usize) -> Result<Vec<f64>> {
    checked_apply(problem, Scheme::Hobi, u, workers)
}

/// Centroid-collocation operator applied to `u = [phi; dphi]` at the faces.
pub fn matvec_lobi(problem: &DiscretizedProblem, u: &[f64], workers: usize) -> Result<Vec<f64>> {
    checked_apply(problem, Scheme::Lobi, u, workers)
}
