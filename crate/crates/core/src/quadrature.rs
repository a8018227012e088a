//! Quadrature on the reference triangle `r, s >= 0, r + s <= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{element_frame, CurvedElement, SurfaceFrame};

/// Points and weights on the reference triangle. Weights sum to 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleRule {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    /// Highest total degree integrated exactly, measured at construction.
    pub degree: u32,
}

impl TriangleRule {
    fn new(name: impl Into<String>, points: Vec<(f64, f64)>, weights: Vec<f64>) -> Self {
        let mut rule = TriangleRule {
            name: name.into(),
            points,
            weights,
            degree: 0,
        };
        rule.degree = exactness_degree(&rule, 12);
        rule
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(r, s), w)| f(r, s) * w)
            .sum()
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `int_T r^a s^b dA = a! b! / (a + b + 2)!`.
pub fn monomial_integral(a: u32, b: u32) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

/// Largest `d <= max_degree` such that every monomial of total degree `<= d`
/// is integrated to within 1e-13 relative error.
pub fn exactness_degree(rule: &TriangleRule, max_degree: u32) -> u32 {
    let mut degree = None;
    'outer: for d in 0..=max_degree {
        for a in 0..=d {
            let b = d - a;
            let exact = monomial_integral(a, b);
            let approx = rule.integrate(|r, s| r.powi(a as i32) * s.powi(b as i32));
            if (approx - exact).abs() > 1e-13 * exact {
                break 'outer;
            }
        }
        degree = Some(d);
    }
    degree.unwrap_or(0)
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=32).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Legendre order must be in 1..=32, got {n}"
        )));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.5;
    }
    Ok((points, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The four-point rule used on regular (non-singular) elements.
///
/// Conical product of a two-point Gauss-Jacobi rule for weight `(1 - r)`
/// (the Radau-type collapsed direction) with two-point Gauss-Legendre,
/// through `s = t (1 - r)`. Positive weights, exact through degree 3.
pub fn gauss_radau_rule() -> TriangleRule {
    // roots of the degree-2 polynomial orthogonal under (1 - x) on [0, 1]
    let sq6 = 6f64.sqrt();
    let xs = [(4.0 - sq6) / 10.0, (4.0 + sq6) / 10.0];
    // sum w = 1/2, sum w x = 1/6
    let w1 = (1.0 / 6.0 - 0.5 * xs[1]) / (xs[0] - xs[1]);
    let ws = [w1, 0.5 - w1];
    let (ts, vs) = gauss_legendre_1d(2).expect("order 2 is valid");
    let mut points = Vec::with_capacity(4);
    let mut weights = Vec::with_capacity(4);
    for (x, wx) in xs.iter().zip(ws) {
        for (t, wt) in ts.iter().zip(&vs) {
            points.push((*x, t * (1.0 - x)));
            weights.push(wx * wt);
        }
    }
    TriangleRule::new("collapsed-gauss-radau-4", points, weights)
}

/// Conical product of `n x n` Gauss-Legendre points through `s = t (1 - r)`,
/// an optional higher-order replacement for the four-point regular rule.
pub fn collapsed_gauss_rule(n: usize) -> Result<TriangleRule> {
    let (xs, ws) = gauss_legendre_1d(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (x, wx) in xs.iter().zip(&ws) {
        for (t, wt) in xs.iter().zip(&ws) {
            points.push((*x, t * (1.0 - x)));
            weights.push(wx * wt * (1.0 - x));
        }
    }
    Ok(TriangleRule::new(format!("collapsed-gauss-{n}x{n}"), points, weights))
}

/// `n x n` Gauss-Legendre on the unit square pushed onto the triangle by
/// `r = (1 - y) x`, `s = y x`. The map's Jacobian `x` is folded into the
/// weights, which removes a `1/R` singularity at the corner `(0, 0)`.
pub fn duffy_rule(n: usize) -> Result<TriangleRule> {
    let (xs, ws) = gauss_legendre_1d(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (x, wx) in xs.iter().zip(&ws) {
        for (y, wy) in xs.iter().zip(&ws) {
            points.push(((1.0 - y) * x, y * x));
            weights.push(wx * wy * x);
        }
    }
    Ok(TriangleRule::new(format!("duffy-gauss-legendre-{n}x{n}"), points, weights))
}

/// `sum_m f(frame_m) * jacobian_m * w_m` over the curved element.
pub fn integrate_element(
    elem: &CurvedElement,
    integrand: impl Fn(&SurfaceFrame) -> f64,
    rule: &TriangleRule,
) -> Result<f64> {
    if rule.is_empty() {
        return Err(Error::InvalidArgument("quadrature rule has no points".into()));
    }
    let mut total = 0.0;
    for (&(r, s), w) in rule.points.iter().zip(&rule.weights) {
        let frame = element_frame(elem, r, s)?;
        total += integrand(&frame) * frame.jacobian * w;
    }
    Ok(total)
}
