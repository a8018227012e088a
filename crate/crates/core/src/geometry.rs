//! Curved surface elements.
//!
//! Each flat triangle is promoted to a cubic patch: the three edges become
//! cubic Hermite arcs whose end tangents lie in the tangent planes of the
//! vertex normals, "cross" arcs between points on two edges fill the
//! interior, and the resulting ten nodes drive a cubic Lagrange map from the
//! reference triangle `r, s >= 0, r + s <= 1`.

use std::sync::OnceLock;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::mesh_io::FlatMesh;
use crate::Vec3;

/// `x(t) = c0 + c1 t + c2 t^2 + c3 t^3`, `t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicArc {
    pub c0: Vec3,
    pub c1: Vec3,
    pub c2: Vec3,
    pub c3: Vec3,
}

impl CubicArc {
    pub fn point(&self, t: f64) -> Vec3 {
        self.c0 + (self.c1 + (self.c2 + self.c3 * t) * t) * t
    }

    pub fn d1(&self, t: f64) -> Vec3 {
        self.c1 + (self.c2 * 2.0 + self.c3 * (3.0 * t)) * t
    }

    pub fn d2(&self, t: f64) -> Vec3 {
        self.c2 * 2.0 + self.c3 * (6.0 * t)
    }

    /// Normal of the arc at `t` from its curvature vector, oriented to agree
    /// with `reference`.
    pub fn normal(&self, t: f64, reference: &Vec3) -> ArcNormal {
        curvature_normal(&self.d1(t), &self.d2(t), reference)
    }
}

/// Result of [`CubicArc::normal`]. `straight` is set when the curvature
/// vanished and `normal` is the reference direction itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcNormal {
    pub normal: Vec3,
    pub straight: bool,
}

const CURVATURE_TOL: f64 = 1e-12;

/// Unit curvature direction of a curve with first/second derivatives `d1`,
/// `d2`, signed so that it has a positive projection on `reference`.
pub fn curvature_normal(d1: &Vec3, d2: &Vec3, reference: &Vec3) -> ArcNormal {
    let speed2 = d1.norm_squared();
    let speed = speed2.sqrt();
    let fallback = ArcNormal {
        normal: reference.normalize(),
        straight: true,
    };
    if speed == 0.0 {
        return fallback;
    }
    let kappa = (d2 - d1 * (d1.dot(d2) / speed2)) / speed;
    // compare against the curve scale so the test is parameterization-free
    let magnitude = kappa.norm() / speed;
    if !(magnitude > CURVATURE_TOL) {
        return fallback;
    }
    let mut normal = kappa.normalize();
    if normal.dot(reference) < 0.0 {
        normal = -normal;
    }
    ArcNormal {
        normal,
        straight: false,
    }
}

/// Cubic Hermite arc from `p0` to `p1`. The end tangents are the chord
/// projected onto the tangent planes of `n0` and `n1`; their common length
/// is `|chord| / cos^2(theta / 4)` with `theta` the angle between the two
/// tangent directions, which makes the midpoint exact for circular arcs and
/// reduces to the chord length for straight ones.
pub fn fit_arc(p0: &Vec3, n0: &Vec3, p1: &Vec3, n1: &Vec3) -> Result<CubicArc> {
    let chord = p1 - p0;
    let len = chord.norm();
    if !(len > 0.0) {
        return Err(Error::DegenerateGeometry("arc endpoints coincide".into()));
    }
    let t0 = chord - n0 * n0.dot(&chord);
    let t1 = chord - n1 * n1.dot(&chord);
    let (l0, l1) = (t0.norm(), t1.norm());
    if l0 < 1e-12 * len || l1 < 1e-12 * len {
        return Err(Error::DegenerateArc);
    }
    let (t0, t1) = (t0 / l0, t1 / l1);
    let cos_theta = t0.dot(&t1).clamp(-1.0, 1.0);
    let cos_half = ((1.0 + cos_theta) * 0.5).sqrt();
    let scale = len * 2.0 / (1.0 + cos_half);
    let (m0, m1) = (t0 * scale, t1 * scale);

    Ok(CubicArc {
        c0: *p0,
        c1: m0,
        c2: (p1 - p0) * 3.0 - m0 * 2.0 - m1,
        c3: (p0 - p1) * 2.0 + m0 + m1,
    })
}

/// Square coordinates of a reference-triangle point: `u = r + s`,
/// `v = s / (r + s)`, with the collapsed corner mapped to `(0, 0)`.
pub fn rs_to_uv(r: f64, s: f64) -> (f64, f64) {
    let u = r + s;
    if u == 0.0 {
        (0.0, 0.0)
    } else {
        (u, s / u)
    }
}

/// Reference coordinates of the ten element nodes. Indices 0, 3 and 8 are
/// the triangle vertices; 1, 4 and 2, 5 sit at thirds of the edges leaving
/// vertex 0, 6 and 7 at thirds of the opposite edge, and 9 at the centroid.
pub const NODE_RS: [(f64, f64); 10] = [
    (0.0, 0.0),
    (1.0 / 3.0, 0.0),
    (0.0, 1.0 / 3.0),
    (1.0, 0.0),
    (2.0 / 3.0, 0.0),
    (0.0, 2.0 / 3.0),
    (2.0 / 3.0, 1.0 / 3.0),
    (1.0 / 3.0, 2.0 / 3.0),
    (0.0, 1.0),
    (1.0 / 3.0, 1.0 / 3.0),
];

/// Node indices of the triangle vertices in local order (0,0), (1,0), (0,1).
pub const VERTEX_NODES: [usize; 3] = [0, 3, 8];

fn monomials(r: f64, s: f64) -> [f64; 10] {
    [1.0, r, s, r * r, r * s, s * s, r * r * r, r * r * s, r * s * s, s * s * s]
}

fn monomials_dr(r: f64, s: f64) -> [f64; 10] {
    [0.0, 1.0, 0.0, 2.0 * r, s, 0.0, 3.0 * r * r, 2.0 * r * s, s * s, 0.0]
}

fn monomials_ds(r: f64, s: f64) -> [f64; 10] {
    [0.0, 0.0, 1.0, 0.0, r, 2.0 * s, 0.0, r * r, 2.0 * r * s, 3.0 * s * s]
}

type Mat10 = SMatrix<f64, 10, 10>;

/// Monomial coefficients of the cubic Lagrange basis: column `k` holds the
/// coefficients of `N_k`.
fn basis_coefficients() -> &'static Mat10 {
    static COEFFS: OnceLock<Mat10> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let vandermonde = Mat10::from_fn(|j, m| {
            let (r, s) = NODE_RS[j];
            monomials(r, s)[m]
        });
        let coeffs = vandermonde
            .try_inverse()
            .expect("cubic Vandermonde matrix on the ten nodes is invertible");
        for (j, &(r, s)) in NODE_RS.iter().enumerate() {
            let values = combine(&coeffs, &monomials(r, s));
            for (k, v) in values.iter().enumerate() {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "basis fails Kronecker check");
            }
        }
        coeffs
    })
}

fn combine(coeffs: &Mat10, mono: &[f64; 10]) -> [f64; 10] {
    let mut out = [0.0; 10];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = (0..10).map(|m| mono[m] * coeffs[(m, k)]).sum();
    }
    out
}

/// Cubic Lagrange basis on the ten nodes of [`NODE_RS`].
pub fn shape_functions(r: f64, s: f64) -> [f64; 10] {
    combine(basis_coefficients(), &monomials(r, s))
}

/// `(dN_k/dr, dN_k/ds)` for each basis function.
pub fn shape_gradients(r: f64, s: f64) -> [(f64, f64); 10] {
    let coeffs = basis_coefficients();
    let dr = combine(coeffs, &monomials_dr(r, s));
    let ds = combine(coeffs, &monomials_ds(r, s));
    std::array::from_fn(|k| (dr[k], ds[k]))
}

/// A triangle promoted to a ten-node cubic patch.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvedElement {
    pub nodes: [Vec3; 10],
    pub node_normals: [Vec3; 10],
    /// Global vertex indices at local (0,0), (1,0), (0,1).
    pub vertex_ids: [usize; 3],
}

/// Geometry of an element at one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    pub position: Vec3,
    pub d_dr: Vec3,
    pub d_ds: Vec3,
    pub normal: Vec3,
    /// `|dx/dr x dx/ds|`.
    pub jacobian: f64,
}

/// A cubic arc together with the endpoint data it was fitted to.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct FittedArc {
    pub arc: CubicArc,
    pub p0: Vec3,
    pub n0: Vec3,
    pub p1: Vec3,
    pub n1: Vec3,
}

// A node normal taken from an arc's curvature is replaced by the
// interpolated endpoint normal if the two disagree by more than 60 degrees.
const NODE_NORMAL_MIN_COS: f64 = 0.5;

impl FittedArc {
    fn fit(p0: Vec3, n0: Vec3, p1: Vec3, n1: Vec3) -> Result<Self> {
        Ok(FittedArc {
            arc: fit_arc(&p0, &n0, &p1, &n1)?,
            p0,
            n0,
            p1,
            n1,
        })
    }

    /// Position and unit normal at `t`.
    fn sample(&self, t: f64) -> (Vec3, Vec3) {
        let blend = self.n0 * (1.0 - t) + self.n1 * t;
        let reference = if blend.norm() > 1e-12 { blend.normalize() } else { self.n0 };
        let normal = self.arc.normal(t, &reference).normal;
        let normal = if normal.dot(&reference) < NODE_NORMAL_MIN_COS {
            reference
        } else {
            normal
        };
        (self.arc.point(t), normal)
    }
}

pub(crate) fn build_curved_element_with_arcs(
    mesh: &FlatMesh,
    face_index: usize,
) -> Result<(CurvedElement, Vec<FittedArc>)> {
    let face = *mesh.faces.get(face_index).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "face {face_index} does not exist (mesh has {} faces)",
            mesh.n_faces()
        ))
    })?;
    let build = || -> Result<(CurvedElement, Vec<FittedArc>)> {
        let p = face.map(|v| mesh.vertices[v]);
        let n = face.map(|v| mesh.normals[v]);

        let edge_a = FittedArc::fit(p[0], n[0], p[1], n[1])?;
        let edge_b = FittedArc::fit(p[0], n[0], p[2], n[2])?;
        let edge_c = FittedArc::fit(p[1], n[1], p[2], n[2])?;

        let (a1, na1) = edge_a.sample(1.0 / 3.0);
        let (a2, na2) = edge_a.sample(2.0 / 3.0);
        let (b1, nb1) = edge_b.sample(1.0 / 3.0);
        let (b2, nb2) = edge_b.sample(2.0 / 3.0);
        let (c1, nc1) = edge_c.sample(1.0 / 3.0);
        let (c2, nc2) = edge_c.sample(2.0 / 3.0);

        // the centroid node lies on the cross arc u = 2/3, at v = 1/2
        let cross = FittedArc::fit(a2, na2, b2, nb2)?;
        let (m, nm) = cross.sample(0.5);

        let element = CurvedElement {
            nodes: [p[0], a1, b1, p[1], a2, b2, c1, c2, p[2], m],
            node_normals: [n[0], na1, nb1, n[1], na2, nb2, nc1, nc2, n[2], nm],
            vertex_ids: face,
        };
        Ok((element, vec![edge_a, edge_b, edge_c, cross]))
    };
    build().map_err(|e| e.in_element(face_index))
}

/// Ten-node curved element for face `face_index` of `mesh`.
pub fn build_curved_element(mesh: &FlatMesh, face_index: usize) -> Result<CurvedElement> {
    build_curved_element_with_arcs(mesh, face_index).map(|(e, _)| e)
}

const JACOBIAN_TOL: f64 = 1e-14;

impl CurvedElement {
    pub fn position(&self, r: f64, s: f64) -> Vec3 {
        shape_functions(r, s)
            .iter()
            .zip(&self.nodes)
            .fold(Vec3::zeros(), |acc, (w, x)| acc + x * *w)
    }

    pub fn frame(&self, r: f64, s: f64) -> Result<SurfaceFrame> {
        element_frame(self, r, s)
    }
}

/// Position, tangents, oriented unit normal and area factor at `(r, s)`.
pub fn element_frame(elem: &CurvedElement, r: f64, s: f64) -> Result<SurfaceFrame> {
    let n = shape_functions(r, s);
    let grads = shape_gradients(r, s);
    let mut position = Vec3::zeros();
    let mut d_dr = Vec3::zeros();
    let mut d_ds = Vec3::zeros();
    let mut reference = Vec3::zeros();
    for k in 0..10 {
        position += elem.nodes[k] * n[k];
        d_dr += elem.nodes[k] * grads[k].0;
        d_ds += elem.nodes[k] * grads[k].1;
        reference += elem.node_normals[k] * n[k];
    }
    let cross = d_dr.cross(&d_ds);
    let jacobian = cross.norm();
    if !(jacobian >= JACOBIAN_TOL) {
        return Err(Error::DegenerateGeometry(format!(
            "surface jacobian {jacobian:.3e} at (r, s) = ({r}, {s})"
        )));
    }
    let mut normal = cross / jacobian;
    if normal.dot(&reference) < 0.0 {
        normal = -normal;
    }
    Ok(SurfaceFrame {
        position,
        d_dr,
        d_ds,
        normal,
        jacobian,
    })
}
