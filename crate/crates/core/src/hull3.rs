//! Incremental convex hull in three dimensions.
//!
//! Produces a closed, outward-oriented triangle mesh. Coplanar facets are
//! left triangulated; the flat edges between them have zero dihedral
//! deficit and drop out of edge sums. Degenerate inputs (planar, collinear,
//! single point) are reported as such.

use std::collections::{HashMap, HashSet};

use nalgebra::{Vector2, Vector3};

use crate::planar::convex_hull_2d;

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Vector3<f64>>,
    /// Counterclockwise seen from outside.
    pub faces: Vec<[usize; 3]>,
}

#[derive(Clone, Debug)]
pub enum Hull3 {
    Solid(Mesh),
    /// Hull vertices in counterclockwise order with respect to `normal`.
    Planar {
        vertices: Vec<Vector3<f64>>,
        normal: Vector3<f64>,
    },
    Segment(Vector3<f64>, Vector3<f64>),
    Point(Vector3<f64>),
}

/// Relative tolerance for visibility and degeneracy tests.
pub const HULL_TOL: f64 = 1e-11;

pub fn convex_hull_3d(points: &[Vector3<f64>]) -> Hull3 {
    assert!(!points.is_empty());
    let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let scale = points
        .iter()
        .map(|p| (p - centroid).norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Hull3::Point(points[0]);
    }
    let eps = HULL_TOL * scale;

    // initial simplex
    let i0 = (0..points.len())
        .max_by(|&a, &b| (points[a] - centroid).norm().partial_cmp(&(points[b] - centroid).norm()).unwrap())
        .unwrap();
    let i1 = farthest(points, |p| (p - points[i0]).norm());
    let d01 = points[i1] - points[i0];
    if d01.norm() <= eps {
        return Hull3::Point(points[i0]);
    }
    let line_dist = |p: &Vector3<f64>| (p - points[i0]).cross(&d01).norm() / d01.norm();
    let i2 = farthest(points, line_dist);
    if line_dist(&points[i2]) <= eps {
        let u = d01.normalize();
        let lo = farthest(points, |p| -(p - points[i0]).dot(&u));
        let hi = farthest(points, |p| (p - points[i0]).dot(&u));
        return Hull3::Segment(points[lo], points[hi]);
    }
    let n = d01.cross(&(points[i2] - points[i0])).normalize();
    let plane_dist = |p: &Vector3<f64>| (p - points[i0]).dot(&n);
    let i3 = farthest(points, |p| plane_dist(p).abs());
    if plane_dist(&points[i3]).abs() <= eps {
        return planar_hull(points, points[i0], d01.normalize(), n);
    }

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let inner = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
    for f in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        faces.push(orient(points, f, inner));
    }
    let mut planes: Vec<(Vector3<f64>, f64)> = faces.iter().map(|f| plane(points, f)).collect();
    let mut alive = vec![true; 4];

    for (pi, p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&fi| alive[fi] && planes[fi].0.dot(p) - planes[fi].1 > eps)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut directed: HashSet<(usize, usize)> = HashSet::new();
        for &fi in &visible {
            let f = faces[fi];
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]));
            }
            alive[fi] = false;
        }
        let mut horizon: Vec<(usize, usize)> = directed
            .iter()
            .filter(|(a, b)| !directed.contains(&(*b, *a)))
            .copied()
            .collect();
        horizon.sort_unstable();
        for (a, b) in horizon {
            let f = [a, b, pi];
            faces.push(f);
            planes.push(plane(points, &f));
            alive.push(true);
        }
    }

    // compact vertex indices
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut out_faces = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        if !alive[fi] {
            continue;
        }
        let mut g = [0; 3];
        for k in 0..3 {
            g[k] = *remap.entry(f[k]).or_insert_with(|| {
                vertices.push(points[f[k]]);
                vertices.len() - 1
            });
        }
        out_faces.push(g);
    }
    Hull3::Solid(Mesh {
        vertices,
        faces: out_faces,
    })
}

fn farthest(points: &[Vector3<f64>], key: impl Fn(&Vector3<f64>) -> f64) -> usize {
    (0..points.len())
        .max_by(|&a, &b| key(&points[a]).partial_cmp(&key(&points[b])).unwrap())
        .unwrap()
}

fn plane(points: &[Vector3<f64>], f: &[usize; 3]) -> (Vector3<f64>, f64) {
    let n = (points[f[1]] - points[f[0]])
        .cross(&(points[f[2]] - points[f[0]]))
        .normalize();
    (n, n.dot(&points[f[0]]))
}

fn orient(points: &[Vector3<f64>], f: [usize; 3], inner: Vector3<f64>) -> [usize; 3] {
    let (n, d) = plane(points, &f);
    if n.dot(&inner) - d > 0.0 {
        [f[0], f[2], f[1]]
    } else {
        f
    }
}

fn planar_hull(points: &[Vector3<f64>], origin: Vector3<f64>, e1: Vector3<f64>, n: Vector3<f64>) -> Hull3 {
    let e2 = n.cross(&e1);
    let flat: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| Vector2::new((p - origin).dot(&e1), (p - origin).dot(&e2)))
        .collect();
    let h = convex_hull_2d(&flat);
    Hull3::Planar {
        vertices: h.iter().map(|q| origin + e1 * q.x + e2 * q.y).collect(),
        normal: n,
    }
}

impl Mesh {
    pub fn volume(&self) -> f64 {
        let o = self.vertices[0];
        self.faces
            .iter()
            .map(|f| {
                let (a, b, c) = (self.vertices[f[0]] - o, self.vertices[f[1]] - o, self.vertices[f[2]] - o);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        self.faces.iter().map(|f| self.face_area_vector(f).norm()).sum()
    }

    /// `½ (b − a) × (c − a)`: outward normal scaled by the face area.
    pub fn face_area_vector(&self, f: &[usize; 3]) -> Vector3<f64> {
        let v = &self.vertices;
        0.5 * (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]))
    }

    /// Undirected edges with their two adjacent faces.
    pub fn edges(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                owner.insert((f[k], f[(k + 1) % 3]), fi);
            }
        }
        let mut out = Vec::new();
        for (&(a, b), &fi) in &owner {
            if a < b {
                if let Some(&gi) = owner.get(&(b, a)) {
                    out.push((a, b, fi, gi));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `M = Σ_e ℓ_e·ψ_e / 2` with `ψ_e` the angle between the outward
    /// normals of the faces meeting at `e`; the quadratic coefficient in
    /// `vol(P + rB) = V + S·r + M·r² + (4π/3)·r³`.
    pub fn mean_width_term(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b, fi, gi)| {
                let len = (self.vertices[a] - self.vertices[b]).norm();
                let n1 = self.face_area_vector(&self.faces[fi]).normalize();
                let n2 = self.face_area_vector(&self.faces[gi]).normalize();
                let psi = f64::atan2(n1.cross(&n2).norm(), n1.dot(&n2));
                0.5 * len * psi
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cube() -> Vec<Vector3<f64>> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        v
    }

    #[test]
    fn unit_cube() {
        let mut pts = cube();
        pts.push(Vector3::new(0.5, 0.5, 0.5));
        pts.push(Vector3::new(0.5, 0.5, 1.0));
        let Hull3::Solid(m) = convex_hull_3d(&pts) else { panic!() };
        assert_eq!(m.vertices.len(), 8);
        assert!((m.volume() - 1.0).abs() < 1e-14);
        assert!((m.surface_area() - 6.0).abs() < 1e-14);
        // 12 cube edges with ψ = π/2: M = 12·π/4 = 3π
        assert!((m.mean_width_term() - 3.0 * PI).abs() < 1e-12);
        assert!(m.edges().len() == 3 * m.faces.len() / 2);
    }

    #[test]
    fn degenerate_inputs() {
        let flat: Vec<_> = cube().into_iter().filter(|p| p.z == 0.0).collect();
        assert!(matches!(convex_hull_3d(&flat), Hull3::Planar { ref vertices, .. } if vertices.len() == 4));
        let line = vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 1.0), Vector3::new(0.5, 0.5, 0.5)];
        assert!(matches!(convex_hull_3d(&line), Hull3::Segment(..)));
        assert!(matches!(convex_hull_3d(&[Vector3::zeros()]), Hull3::Point(_)));
    }

    #[test]
    fn random_hull_contains_all_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..200)
            .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let Hull3::Solid(m) = convex_hull_3d(&pts) else { panic!() };
        for f in &m.faces {
            let n = m.face_area_vector(f).normalize();
            let d = n.dot(&m.vertices[f[0]]);
            assert!(pts.iter().all(|p| n.dot(p) - d <= 1e-10));
        }
        // Euler characteristic of the triangulated sphere
        assert_eq!(m.vertices.len() as i64 - m.edges().len() as i64 + m.faces.len() as i64, 2);
    }
}
