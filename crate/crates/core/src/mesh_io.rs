//! Surface meshes and point-charge sets: MSMS `.vert`/`.face` reading and
//! writing, PQR-style charge files, and icosahedral sphere generation.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

const NORMAL_TOL: f64 = 1e-12;

/// A closed triangulated surface with one outward unit normal per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatMesh {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl FlatMesh {
    /// Builds a mesh and checks every invariant (unit normals, index range,
    /// orientation, closedness).
    pub fn new(vertices: Vec<Vec3>, normals: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = FlatMesh {
            vertices,
            normals,
            faces,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.normals.len() != nv {
            return Err(Error::Validation(format!(
                "{} vertices but {} normals",
                nv,
                self.normals.len()
            )));
        }
        for (i, n) in self.normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > NORMAL_TOL {
                return Err(Error::Validation(format!(
                    "normal of vertex {i} has length {}",
                    n.norm()
                )));
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            for &index in face {
                if index >= nv {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index,
                        n_vertices: nv,
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::Validation(format!("face {f} repeats a vertex")));
            }
            let geometric = self.face_cross(f);
            let mean_normal = self.normals[face[0]] + self.normals[face[1]] + self.normals[face[2]];
            if geometric.dot(&mean_normal) <= 0.0 {
                return Err(Error::Validation(format!(
                    "face {f} is oriented against its vertex normals"
                )));
            }
        }
        self.check_closed()
    }

    /// Every undirected edge must be shared by exactly two faces.
    pub fn check_closed(&self) -> Result<()> {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for face in &self.faces {
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut bad: Vec<_> = counts.into_iter().filter(|&(_, c)| c != 2).collect();
        bad.sort_unstable();
        match bad.first() {
            None => Ok(()),
            Some(&((a, b), c)) => Err(Error::Validation(format!(
                "mesh is not closed: edge ({a}, {b}) is shared by {c} face(s)"
            ))),
        }
    }

    /// Unnormalized geometric normal `(X2 - X1) x (X3 - X1)` of face `f`.
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (pb - pa).cross(&(pc - pa))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    /// For each vertex, the indices of faces that touch it, in increasing order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut incident = vec![Vec::new(); self.n_vertices()];
        for (f, face) in self.faces.iter().enumerate() {
            for &v in face {
                incident[v].push(f);
            }
        }
        incident
    }
}

/// Point charges in Å and units of the elementary charge.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChargeSystem {
    pub positions: Vec<Vec3>,
    pub charges: Vec<f64>,
}

impl ChargeSystem {
    pub fn new(positions: Vec<Vec3>, charges: Vec<f64>) -> Result<Self> {
        if positions.len() != charges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} charge positions but {} charge values",
                positions.len(),
                charges.len()
            )));
        }
        Ok(ChargeSystem { positions, charges })
    }

    pub fn single(position: Vec3, charge: f64) -> Self {
        ChargeSystem {
            positions: vec![position],
            charges: vec![charge],
        }
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec3, f64)> {
        self.positions.iter().zip(self.charges.iter().copied())
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_reals<const N: usize>(line: &str) -> Option<[f64; N]> {
    let mut out = [0.0; N];
    let mut fields = line.split_whitespace();
    for slot in out.iter_mut() {
        *slot = fields.next()?.parse().ok()?;
    }
    Some(out)
}

fn parse_indices(line: &str) -> Option<[usize; 3]> {
    let mut out = [0usize; 3];
    let mut fields = line.split_whitespace();
    for slot in out.iter_mut() {
        *slot = fields.next()?.parse().ok()?;
    }
    Some(out)
}

/// Reads the MSMS `.vert` (x y z nx ny nz ...) and `.face` (i j k ... ,
/// 1-based) pair. Lines starting with `#` and any header lines preceding
/// the first data record are skipped; after that a line that is not a full
/// record is a parse error.
pub fn parse_msms(vert_text: &str, face_text: &str) -> Result<FlatMesh> {
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    for (line_no, line) in data_lines(vert_text) {
        match parse_reals::<6>(line) {
            Some([x, y, z, nx, ny, nz]) => {
                let n = Vec3::new(nx, ny, nz);
                let len = n.norm();
                if !(len > 0.0) || !len.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "vertex normal has zero length".into(),
                    });
                }
                vertices.push(Vec3::new(x, y, z));
                normals.push(n / len);
            }
            None if vertices.is_empty() => continue,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 6 reals (x y z nx ny nz), got '{line}'"),
                })
            }
        }
    }

    let mut faces = Vec::new();
    for (line_no, line) in data_lines(face_text) {
        match parse_indices(line) {
            Some(idx) => {
                if idx.contains(&0) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "face indices are 1-based; found 0".into(),
                    });
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            None if faces.is_empty() => continue,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 vertex indices, got '{line}'"),
                })
            }
        }
    }
    FlatMesh::new(vertices, normals, faces)
}

/// Writes `(vert_text, face_text)` in the MSMS layout with `digits` decimals.
pub fn write_msms(mesh: &FlatMesh, digits: usize) -> (String, String) {
    let mut vert = String::new();
    let _ = writeln!(vert, "# MSMS-style vertex file");
    let _ = writeln!(vert, "#vertex #sphere density probe_r");
    let _ = writeln!(vert, "{:>7} {:>7} {:>6.2} {:>6.2}", mesh.n_vertices(), 0, 0.0, 0.0);
    for (i, (p, n)) in mesh.vertices.iter().zip(&mesh.normals).enumerate() {
        let _ = writeln!(
            vert,
            "{:>9.d$} {:>9.d$} {:>9.d$} {:>9.d$} {:>9.d$} {:>9.d$} {:>7} {:>7} {:>2}",
            p.x,
            p.y,
            p.z,
            n.x,
            n.y,
            n.z,
            0,
            i + 1,
            2,
            d = digits
        );
    }
    let mut face = String::new();
    let _ = writeln!(face, "# MSMS-style face file");
    let _ = writeln!(face, "#faces  #sphere density probe_r");
    let _ = writeln!(face, "{:>7} {:>7} {:>6.2} {:>6.2}", mesh.n_faces(), 0, 0.0, 0.0);
    for f in &mesh.faces {
        let _ = writeln!(face, "{:>6} {:>6} {:>6} {:>2} {:>6}", f[0] + 1, f[1] + 1, f[2] + 1, 1, 0);
    }
    (vert, face)
}

/// Reads `x y z q [radius]` records; the radius column is ignored.
pub fn parse_charges(text: &str) -> Result<ChargeSystem> {
    let mut system = ChargeSystem::default();
    for (line_no, line) in data_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least 4 columns (x y z q), got {}", fields.len()),
            });
        }
        let mut vals = [0.0; 4];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("'{field}' is not a number"),
            })?;
        }
        if let Some(radius) = fields.get(4) {
            radius.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("radius column '{radius}' is not a number"),
            })?;
        }
        system.positions.push(Vec3::new(vals[0], vals[1], vals[2]));
        system.charges.push(vals[3]);
    }
    Ok(system)
}

pub const MAX_SPHERE_LEVEL: u32 = 7;

/// Regular icosahedron refined `level` times by 4-way splitting, with every
/// vertex on the sphere and exact radial normals. Has `20 * 4^level` faces.
pub fn icosahedral_sphere(level: u32, radius: f64, center: Vec3) -> Result<FlatMesh> {
    if level > MAX_SPHERE_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "sphere level {level} exceeds the maximum of {MAX_SPHERE_LEVEL}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("sphere radius must be positive, got {radius}")));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut dirs: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, dirs: &mut Vec<Vec3>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                dirs.push(((dirs[a] + dirs[b]) * 0.5).normalize());
                dirs.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut dirs);
            let bc = midpoint(b, c, &mut dirs);
            let ca = midpoint(c, a, &mut dirs);
            refined.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = refined;
    }

    let vertices = dirs.iter().map(|d| center + d * radius).collect();
    FlatMesh::new(vertices, dirs, faces)
}

/// Pushes every vertex onto the sphere `|v - center| = radius` and replaces
/// the normals by the exact radial directions.
pub fn radial_project(mesh: &FlatMesh, center: Vec3, radius: f64) -> Result<FlatMesh> {
    let mut vertices = Vec::with_capacity(mesh.n_vertices());
    let mut normals = Vec::with_capacity(mesh.n_vertices());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let d = v - center;
        let len = d.norm();
        if len < f64::EPSILON * radius.abs().max(1.0) {
            return Err(Error::DegenerateGeometry(format!(
                "vertex {i} coincides with the projection center"
            )));
        }
        let n = d / len;
        vertices.push(center + n * radius);
        normals.push(n);
    }
    Ok(FlatMesh {
        vertices,
        normals,
        faces: mesh.faces.clone(),
    })
}
