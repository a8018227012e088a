use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{build_curved_element, element_frame, CurvedElement};
use crate::kernels::PhysicalParams;
use crate::mesh_io::{ChargeSystem, FlatMesh};
use crate::quadrature::{duffy_rule, TriangleRule};
use crate::Vec3;

use super::{Scheme, SolverConfig};

/// One cached quadrature point. `weights[n]` already contains the rule
/// weight, the surface Jacobian and the interpolation weight of unknown
/// `unknowns[n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub weights: [f64; 3],
    pub unknowns: [usize; 3],
}

impl QuadPoint {
    /// Interpolated `(dphi, phi)` times the point weight.
    #[inline]
    pub(crate) fn gather(&self, phi: &[f64], dphi: &[f64]) -> (f64, f64) {
        let [a, b, c] = self.unknowns;
        let [wa, wb, wc] = self.weights;
        (
            wa * dphi[a] + wb * dphi[b] + wc * dphi[c],
            wa * phi[a] + wb * phi[b] + wc * phi[c],
        )
    }
}

/// Collocation point of one equation pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub position: Vec3,
    pub normal: Vec3,
}

/// Everything the operator needs, precomputed once and shared read-only by
/// all workers.
#[derive(Debug, Clone)]
pub struct DiscretizedProblem {
    pub mesh: FlatMesh,
    pub params: PhysicalParams,
    pub charges: ChargeSystem,
    pub scheme: Scheme,
    /// Curved elements, one per face (HOBI only).
    pub elements: Vec<CurvedElement>,
    pub regular_rule: TriangleRule,
    /// Duffy rule (HOBI only).
    pub singular_rule: Option<TriangleRule>,
    pub targets: Vec<Target>,
    /// For each target, the sorted element indices handled by the singular
    /// path (HOBI: incident elements; LOBI: the target's own face).
    pub singular_sets: Vec<Vec<usize>>,
    /// `regular_rule.len()` points per element, element-major.
    pub(crate) regular: Vec<QuadPoint>,
    /// Duffy points per target in CSR layout: target `i` owns
    /// `singular[singular_offsets[i]..singular_offsets[i + 1]]`, grouped by
    /// element in the order of `singular_sets[i]`.
    pub(crate) singular: Vec<QuadPoint>,
    pub(crate) singular_offsets: Vec<usize>,
}

impl DiscretizedProblem {
    /// Number of collocation targets (`N_v` for HOBI, `N_f` for LOBI).
    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    /// Length of the unknown vector.
    pub fn dim(&self) -> usize {
        2 * self.targets.len()
    }

    pub fn points_per_element(&self) -> usize {
        self.regular_rule.len()
    }

    pub fn regular_points(&self) -> &[QuadPoint] {
        &self.regular
    }

    /// Duffy points of target `i` (empty for LOBI).
    pub fn singular_points(&self, i: usize) -> &[QuadPoint] {
        &self.singular[self.singular_offsets[i]..self.singular_offsets[i + 1]]
    }

    /// Size of the quadrature caches in bytes; a lower bound on the
    /// solver's memory use.
    pub fn cache_bytes(&self) -> usize {
        use std::mem::size_of;
        (self.regular.len() + self.singular.len()) * size_of::<QuadPoint>()
            + self.targets.len() * size_of::<Target>()
            + self.elements.len() * size_of::<CurvedElement>()
            + self.singular_sets.iter().map(|s| s.len() * size_of::<usize>()).sum::<usize>()
            + self.mesh.n_vertices() * 2 * size_of::<Vec3>()
            + self.mesh.n_faces() * size_of::<[usize; 3]>()
    }
}

/// Builds elements, collocation targets and every quadrature cache.
pub fn discretize(
    mesh: &FlatMesh,
    params: &PhysicalParams,
    charges: &ChargeSystem,
    config: &SolverConfig,
) -> Result<DiscretizedProblem> {
    mesh.validate()?;
    config.validate()?;
    match config.scheme {
        Scheme::Hobi => discretize_hobi(mesh, params, charges, config),
        Scheme::Lobi => Ok(discretize_lobi(mesh, params, charges)),
    }
}

fn barycentric(r: f64, s: f64) -> [f64; 3] {
    [1.0 - r - s, r, s]
}

fn discretize_hobi(
    mesh: &FlatMesh,
    params: &PhysicalParams,
    charges: &ChargeSystem,
    config: &SolverConfig,
) -> Result<DiscretizedProblem> {
    let elements = (0..mesh.n_faces())
        .map(|j| build_curved_element(mesh, j))
        .collect::<Result<Vec<_>>>()?;
    let regular_rule = config.regular_rule.build()?;
    let singular_rule = duffy_rule(config.singular_order)?;

    let mut regular = Vec::with_capacity(elements.len() * regular_rule.len());
    for (j, elem) in elements.iter().enumerate() {
        for (&(r, s), w) in regular_rule.points.iter().zip(&regular_rule.weights) {
            let frame = element_frame(elem, r, s).map_err(|e| e.in_element(j))?;
            let scale = w * frame.jacobian;
            regular.push(QuadPoint {
                position: frame.position,
                normal: frame.normal,
                weights: barycentric(r, s).map(|b| b * scale),
                unknowns: elem.vertex_ids,
            });
        }
    }

    let singular_sets = mesh.vertex_faces();
    let mut singular = Vec::new();
    let mut singular_offsets = Vec::with_capacity(mesh.n_vertices() + 1);
    singular_offsets.push(0);
    for (i, incident) in singular_sets.iter().enumerate() {
        for &j in incident {
            let elem = &elements[j];
            let k = elem
                .vertex_ids
                .iter()
                .position(|&v| v == i)
                .expect("incident element contains its vertex");
            for (&(rr, sr), w) in singular_rule.points.iter().zip(&singular_rule.weights) {
                // rotate so that vertex i sits at the Duffy corner (0, 0)
                let rotated = barycentric(rr, sr);
                let mut lambda = [0.0; 3];
                for m in 0..3 {
                    lambda[(k + m) % 3] = rotated[m];
                }
                let frame = element_frame(elem, lambda[1], lambda[2]).map_err(|e| e.in_element(j))?;
                let scale = w * frame.jacobian;
                singular.push(QuadPoint {
                    position: frame.position,
                    normal: frame.normal,
                    weights: lambda.map(|b| b * scale),
                    unknowns: elem.vertex_ids,
                });
            }
        }
        singular_offsets.push(singular.len());
    }

    let targets = mesh
        .vertices
        .iter()
        .zip(&mesh.normals)
        .map(|(p, n)| Target {
            position: *p,
            normal: *n,
        })
        .collect();

    Ok(DiscretizedProblem {
        mesh: mesh.clone(),
        params: *params,
        charges: charges.clone(),
        scheme: Scheme::Hobi,
        elements,
        regular_rule,
        singular_rule: Some(singular_rule),
        targets,
        singular_sets,
        regular,
        singular,
        singular_offsets,
    })
}

fn discretize_lobi(mesh: &FlatMesh, params: &PhysicalParams, charges: &ChargeSystem) -> DiscretizedProblem {
    let nf = mesh.n_faces();
    let mut targets = Vec::with_capacity(nf);
    let mut regular = Vec::with_capacity(nf);
    for j in 0..nf {
        let cross = mesh.face_cross(j);
        let area = 0.5 * cross.norm();
        let position = mesh.face_centroid(j);
        let normal = cross.normalize();
        targets.push(Target { position, normal });
        regular.push(QuadPoint {
            position,
            normal,
            weights: [area, 0.0, 0.0],
            unknowns: [j, j, j],
        });
    }
    let centroid_rule = TriangleRule {
        name: "centroid-1".into(),
        points: vec![(1.0 / 3.0, 1.0 / 3.0)],
        weights: vec![0.5],
        degree: 1,
    };
    DiscretizedProblem {
        mesh: mesh.clone(),
        params: *params,
        charges: charges.clone(),
        scheme: Scheme::Lobi,
        elements: Vec::new(),
        regular_rule: centroid_rule,
        singular_rule: None,
        targets,
        singular_sets: (0..nf).map(|j| vec![j]).collect(),
        regular,
        singular: Vec::new(),
        singular_offsets: vec![0; nf + 1],
    }
}
