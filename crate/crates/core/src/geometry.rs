//! Tessellated apertures, obliquity and solid-angle helpers, receiver layouts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Result, WaveError};

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    /// Line segments (surface of a 2D source).
    Segment,
    /// Triangles (surface in 3D).
    Triangle,
    /// Tetrahedra (volume in 3D).
    Tetrahedron,
}

impl ElementKind {
    pub fn nodes(self) -> usize {
        match self {
            ElementKind::Segment => 2,
            ElementKind::Triangle => 3,
            ElementKind::Tetrahedron => 4,
        }
    }

    pub fn is_volume(self) -> bool {
        self == ElementKind::Tetrahedron
    }

    fn from_nodes(n: usize) -> Option<Self> {
        match n {
            2 => Some(ElementKind::Segment),
            3 => Some(ElementKind::Triangle),
            4 => Some(ElementKind::Tetrahedron),
            _ => None,
        }
    }
}

/// Tessellated source or sensor support with per-vertex unit normals.
#[derive(Clone, Debug)]
pub struct ApertureMesh {
    kind: ElementKind,
    vertices: Vec<Vec3>,
    normals: Vec<Vec3>,
    elements: Vec<Vec<usize>>,
    measures: Vec<f64>,
}

impl ApertureMesh {
    /// Validates connectivity, normalises normals and computes element measures.
    /// Volume meshes may carry zero normals.
    pub fn new(kind: ElementKind, vertices: Vec<Vec3>, normals: Vec<Vec3>, elements: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.len() != normals.len() {
            return Err(WaveError::InvalidMesh(format!(
                "{} vertices but {} normals",
                vertices.len(),
                normals.len()
            )));
        }
        let normals = normals
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if kind.is_volume() && len == 0.0 {
                    Ok(n)
                } else if (len - 1.0).abs() > 1e-6 {
                    Err(WaveError::InvalidMesh(format!("normal of length {len} is not unit")))
                } else {
                    Ok(n / len)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut measures = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            if el.len() != kind.nodes() {
                return Err(WaveError::InvalidMesh(format!("element {e} has {} nodes", el.len())));
            }
            if let Some(&bad) = el.iter().find(|&&j| j >= vertices.len()) {
                return Err(WaveError::InvalidMesh(format!("element {e} references vertex {bad}")));
            }
            let m = element_measure(kind, el.iter().map(|&j| vertices[j]));
            if !(m > 0.0) {
                return Err(WaveError::InvalidMesh(format!("element {e} is degenerate")));
            }
            measures.push(m);
        }
        Ok(ApertureMesh {
            kind,
            vertices,
            normals,
            elements,
            measures,
        })
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn centroid(&self, e: usize) -> Vec3 {
        let el = &self.elements[e];
        el.iter().map(|&j| self.vertices[j]).sum::<Vec3>() / el.len() as f64
    }

    /// Mean of the element's vertex normals, renormalised.
    pub fn element_normal(&self, e: usize) -> Vec3 {
        let n: Vec3 = self.elements[e].iter().map(|&j| self.normals[j]).sum();
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            n
        }
    }

    /// Per-vertex quadrature weights: each element spreads its measure equally over its nodes.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        let share = 1.0 / self.kind.nodes() as f64;
        for (el, m) in self.elements.iter().zip(&self.measures) {
            for &j in el {
                w[j] += m * share;
            }
        }
        w
    }

    pub fn max_edge(&self) -> f64 {
        let mut longest: f64 = 0.0;
        for el in &self.elements {
            for a in 0..el.len() {
                for b in a + 1..el.len() {
                    longest = longest.max((self.vertices[el[a]] - self.vertices[el[b]]).norm());
                }
            }
        }
        longest
    }

    /// Copy with every normal negated.
    pub fn flipped(&self) -> ApertureMesh {
        let mut m = self.clone();
        for n in &mut m.normals {
            *n = -*n;
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.elements.len(),
            self.kind.nodes()
        );
        for (v, n) in self.vertices.iter().zip(&self.normals) {
            let _ = writeln!(
                s,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                v.x, v.y, v.z, n.x, n.y, n.z
            );
        }
        for el in &self.elements {
            let line: Vec<String> = el.iter().map(|j| j.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let ctx = "mesh";
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| WaveError::parse(ctx, "missing header"))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| WaveError::parse(ctx, format!("bad header '{header}'")))
            })
            .collect::<Result<_>>()?;
        let (nv, ne) = match counts.as_slice() {
            [nv, ne] | [nv, ne, _] => (*nv, *ne),
            _ => return Err(WaveError::parse(ctx, format!("bad header '{header}'"))),
        };
        let mut vertices = Vec::with_capacity(nv);
        let mut normals = Vec::with_capacity(nv);
        for i in 0..nv {
            let line = lines
                .next()
                .ok_or_else(|| WaveError::parse(ctx, format!("missing vertex {i}")))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| WaveError::parse(ctx, format!("bad vertex line '{line}'")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 6 {
                return Err(WaveError::parse(ctx, format!("vertex line needs 6 values: '{line}'")));
            }
            vertices.push(Vec3::new(v[0], v[1], v[2]));
            normals.push(Vec3::new(v[3], v[4], v[5]));
        }
        let mut elements = Vec::with_capacity(ne);
        for i in 0..ne {
            let line = lines
                .next()
                .ok_or_else(|| WaveError::parse(ctx, format!("missing element {i}")))?;
            let el: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| WaveError::parse(ctx, format!("bad element line '{line}'")))
                })
                .collect::<Result<_>>()?;
            elements.push(el);
        }
        let nodes = counts
            .get(2)
            .copied()
            .or_else(|| elements.first().map(Vec::len))
            .unwrap_or(3);
        let kind = ElementKind::from_nodes(nodes)
            .ok_or_else(|| WaveError::parse(ctx, format!("{nodes} nodes per element")))?;
        ApertureMesh::new(kind, vertices, normals, elements)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn element_measure(kind: ElementKind, mut pts: impl Iterator<Item = Vec3>) -> f64 {
    let a = pts.next().unwrap_or_default();
    match kind {
        ElementKind::Segment => (pts.next().unwrap_or_default() - a).norm(),
        ElementKind::Triangle => {
            let b = pts.next().unwrap_or_default();
            let c = pts.next().unwrap_or_default();
            0.5 * (b - a).cross(&(c - a)).norm()
        }
        ElementKind::Tetrahedron => {
            let b = pts.next().unwrap_or_default() - a;
            let c = pts.next().unwrap_or_default() - a;
            let d = pts.next().unwrap_or_default() - a;
            b.dot(&c.cross(&d)).abs() / 6.0
        }
    }
}

/// Orthonormal pair spanning the plane perpendicular to `axis`. For axis = +z this is (x, y).
pub fn perpendicular_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let a = axis.normalize();
    let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vec3::x()
    } else if a.y.abs() <= a.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (helper - a * helper.dot(&a)).normalize();
    let e2 = a.cross(&e1);
    (e1, e2)
}

fn ring_triangles(
    inner: &[usize],
    inner_angles: &[f64],
    outer: &[usize],
    outer_angles: &[f64],
    out: &mut Vec<Vec<usize>>,
) {
    let (na, nb) = (inner.len(), outer.len());
    let next = |angles: &[f64], i: usize| {
        if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            2.0 * PI + angles[0]
        }
    };
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_inner = j == nb || (i < na && next(inner_angles, i) <= next(outer_angles, j));
        if advance_inner {
            out.push(vec![inner[i % na], outer[j % nb], inner[(i + 1) % na]]);
            i += 1;
        } else {
            out.push(vec![inner[i % na], outer[j % nb], outer[(j + 1) % nb]]);
            j += 1;
        }
    }
}

fn disc_with_rings(radius: f64, center: Vec3, normal: Vec3, rings: usize) -> Result<ApertureMesh> {
    let n = normal.normalize();
    let (e1, e2) = perpendicular_frame(&n);
    let mut vertices = vec![center];
    let mut elements = Vec::new();
    let mut prev: Vec<usize> = vec![0];
    let mut prev_angles = vec![0.0];
    for m in 1..=rings {
        let r = radius * m as f64 / rings as f64;
        let count = 6 * m;
        // odd rings are rotated half a step so neighbouring rings interleave
        let offset = if m % 2 == 1 { PI / count as f64 } else { 0.0 };
        let angles: Vec<f64> = (0..count)
            .map(|j| offset + 2.0 * PI * j as f64 / count as f64)
            .collect();
        let ids: Vec<usize> = (0..count).map(|j| vertices.len() + j).collect();
        for &a in &angles {
            vertices.push(center + r * (a.cos() * e1 + a.sin() * e2));
        }
        if m == 1 {
            for j in 0..count {
                elements.push(vec![0, ids[j], ids[(j + 1) % count]]);
            }
        } else {
            ring_triangles(&prev, &prev_angles, &ids, &angles, &mut elements);
        }
        prev = ids;
        prev_angles = angles;
    }
    let normals = vec![n; vertices.len()];
    ApertureMesh::new(ElementKind::Triangle, vertices, normals, elements)
}

/// Concentric-ring triangulation of a flat disc: equally spaced rings with 6m
/// vertices on ring m, giving near-uniform triangle areas. Ring count grows
/// until no edge exceeds `max_edge`.
pub fn tessellate_disc(radius: f64, center: Vec3, normal: Vec3, max_edge: f64) -> Result<ApertureMesh> {
    if !(radius > 0.0) || !(max_edge > 0.0) || max_edge > radius {
        return Err(WaveError::DegenerateRadius { radius, max_edge });
    }
    if !(normal.norm() > 0.0) {
        return Err(WaveError::InvalidMesh("zero disc normal".into()));
    }
    let mut rings = (radius / max_edge).ceil() as usize;
    loop {
        let mesh = disc_with_rings(radius, center, normal, rings)?;
        if mesh.max_edge() <= max_edge * (1.0 + 1e-12) {
            return Ok(mesh);
        }
        rings += 1;
    }
}

/// Icosphere with outward normals, subdivided until no edge exceeds `max_edge`.
pub fn tessellate_sphere(radius: f64, center: Vec3, max_edge: f64) -> Result<ApertureMesh> {
    if !(radius > 0.0) || !(max_edge > 0.0) {
        return Err(WaveError::DegenerateRadius { radius, max_edge });
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
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
    let edge = |verts: &[Vec3], faces: &[[usize; 3]]| {
        faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (verts[a] - verts[b]).norm() * radius)
            .fold(0.0, f64::max)
    };
    while edge(&verts, &faces) > max_edge {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.extend([[f[0], ab, ca], [f[1], bc, ab], [f[2], ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let normals = verts.clone();
    let vertices = verts.iter().map(|u| center + radius * u).collect();
    ApertureMesh::new(
        ElementKind::Triangle,
        vertices,
        normals,
        faces.iter().map(|f| f.to_vec()).collect(),
    )
}

/// n' . (x - x') / |x - x'|.
pub fn obliquity(x: &Vec3, xp: &Vec3, np: &Vec3) -> Result<f64> {
    let d = x - xp;
    let r = d.norm();
    if r == 0.0 {
        return Err(WaveError::CoincidentPoints);
    }
    Ok(np.dot(&d) / r)
}

/// dS' * obliquity / |x - x'|^2.
pub fn solid_angle_element(x: &Vec3, xp: &Vec3, np: &Vec3, ds: f64) -> Result<f64> {
    let ob = obliquity(x, xp, np)?;
    Ok(ds * ob / (x - xp).norm_squared())
}

/// Spherical coordinates of a receiver relative to its constellation centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalTag {
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ReceiverSet {
    pub positions: Vec<Vec3>,
    pub labels: Vec<String>,
    pub tags: Vec<Option<SphericalTag>>,
}

impl ReceiverSet {
    pub fn from_positions(positions: Vec<Vec3>) -> Self {
        let labels = (1..=positions.len()).map(|i| format!("rx{i}")).collect();
        let tags = vec![None; positions.len()];
        ReceiverSet {
            positions,
            labels,
            tags,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Indices grouped by (r, phi), i.e. the receivers that differ only in theta.
    pub fn theta_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<(SphericalTag, Vec<usize>)> = Vec::new();
        for (i, tag) in self.tags.iter().enumerate() {
            let Some(t) = tag else { continue };
            match groups
                .iter_mut()
                .find(|(g, _)| (g.r - t.r).abs() < 1e-12 && (g.phi - t.phi).abs() < 1e-12)
            {
                Some((_, idx)) => idx.push(i),
                None => groups.push((*t, vec![i])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }
}

/// Receivers at center + r (sin phi cos theta, sin phi sin theta, cos phi) in the
/// frame whose z-axis is `axis`; theta varies fastest, then phi, then r.
pub fn spherical_receivers(radii: &[f64], phis: &[f64], thetas: &[f64], center: Vec3, axis: Vec3) -> ReceiverSet {
    let a = axis.normalize();
    let (e1, e2) = perpendicular_frame(&a);
    let mut set = ReceiverSet::default();
    for &r in radii {
        for &phi in phis {
            for &theta in thetas {
                let dir = phi.sin() * theta.cos() * e1 + phi.sin() * theta.sin() * e2 + phi.cos() * a;
                set.positions.push(center + r * dir);
                set.tags.push(Some(SphericalTag { r, phi, theta }));
            }
        }
    }
    set.labels = (1..=set.positions.len()).map(|i| format!("rx{i}")).collect();
    set
}

/// Deterministic Fibonacci layout of `n` points on the hemisphere around `pole`
/// (excluding the pole itself, down to the rim).
pub fn fibonacci_hemisphere(n: usize, radius: f64, center: Vec3, pole: Vec3) -> ReceiverSet {
    let a = pole.normalize();
    let (e1, e2) = perpendicular_frame(&a);
    let golden = PI * (3.0 - 5f64.sqrt());
    let positions = (0..n)
        .map(|i| {
            let cos_phi = 1.0 - (i + 1) as f64 / n as f64;
            let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
            let theta = golden * i as f64;
            center + radius * (sin_phi * theta.cos() * e1 + sin_phi * theta.sin() * e2 + cos_phi * a)
        })
        .collect();
    ReceiverSet::from_positions(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_area_and_normals() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let mesh = tessellate_disc(0.008, Vec3::zeros(), n, 0.00025).unwrap();
        let exact = PI * 0.008f64.powi(2);
        assert!((mesh.total_measure() - exact).abs() / exact < 0.005);
        assert!(mesh.max_edge() <= 0.00025 * (1.0 + 1e-12));
        assert!(mesh.normals().iter().all(|m| (m - n).norm() < 1e-15));
        let w: f64 = mesh.vertex_weights().iter().sum();
        assert!((w - mesh.total_measure()).abs() < 1e-12 * w);
    }

    #[test]
    fn disc_rejects_degenerate() {
        let n = Vec3::z();
        assert!(matches!(
            tessellate_disc(0.0, Vec3::zeros(), n, 0.1),
            Err(WaveError::DegenerateRadius { .. })
        ));
        assert!(matches!(
            tessellate_disc(0.001, Vec3::zeros(), n, 0.002),
            Err(WaveError::DegenerateRadius { .. })
        ));
    }

    #[test]
    fn obliquity_examples() {
        let xp = Vec3::zeros();
        let n = Vec3::z();
        assert!((obliquity(&Vec3::new(0.0, 0.0, 0.3), &xp, &n).unwrap() - 1.0).abs() < 1e-15);
        let phi = PI / 3.0;
        let x = Vec3::new(phi.sin(), 0.0, phi.cos()) * 0.05;
        assert!((obliquity(&x, &xp, &n).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(obliquity(&Vec3::new(1.0, 0.0, 0.0), &xp, &n).unwrap(), 0.0);
        assert!(matches!(obliquity(&xp, &xp, &n), Err(WaveError::CoincidentPoints)));
    }

    #[test]
    fn solid_angle_examples() {
        let v = solid_angle_element(&Vec3::new(0.0, 0.0, 0.01), &Vec3::zeros(), &Vec3::z(), 1e-6).unwrap();
        assert!((v - 0.01).abs() < 1e-15);
        let g = solid_angle_element(&Vec3::new(0.01, 0.0, 0.0), &Vec3::zeros(), &Vec3::z(), 1e-6).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn paper_receiver_layout() {
        let q = PI / 4.0;
        let set = spherical_receivers(
            &[0.065, 0.05, 0.035, 0.02],
            &[0.0, PI / 6.0, PI / 4.0, PI / 3.0],
            &[q, 3.0 * q, 5.0 * q, 7.0 * q],
            Vec3::zeros(),
            Vec3::z(),
        );
        assert_eq!(set.len(), 64);
        // phi = 0 rows collapse onto the axis
        for r in 0..4 {
            let base = r * 16;
            for k in 1..4 {
                assert!((set.positions[base] - set.positions[base + k]).norm() < 1e-15);
            }
        }
        assert_eq!(set.theta_groups().len(), 16);
        let pole = spherical_receivers(&[1.0], &[0.0], &[0.0], Vec3::new(1.0, 2.0, 3.0), Vec3::z());
        assert!((pole.positions[0] - Vec3::new(1.0, 2.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn mesh_text_round_trip() {
        let mesh = tessellate_disc(0.004, Vec3::new(0.0, 0.0, -0.01), Vec3::z(), 0.001).unwrap();
        let back = ApertureMesh::from_text(&mesh.to_text()).unwrap();
        assert_eq!(back.num_vertices(), mesh.num_vertices());
        assert_eq!(back.elements(), mesh.elements());
        for (a, b) in back.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
        assert!(ApertureMesh::from_text("3 1 3\n0 0 0 0 0 1\n").is_err());
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let s = tessellate_sphere(0.01, Vec3::new(0.001, 0.0, 0.0), 0.003).unwrap();
        for (v, n) in s.vertices().iter().zip(s.normals()) {
            assert!(((v - Vec3::new(0.001, 0.0, 0.0)).normalize() - n).norm() < 1e-12);
        }
        let exact = 4.0 * PI * 1e-4;
        assert!((s.total_measure() - exact).abs() / exact < 0.05);
    }

    #[test]
    fn hemisphere_points_on_sphere() {
        let set = fibonacci_hemisphere(39, 0.056, Vec3::zeros(), -Vec3::z());
        assert_eq!(set.len(), 39);
        for p in &set.positions {
            assert!((p.norm() - 0.056).abs() < 1e-12);
            assert!(p.z <= 1e-12);
        }
    }
}
