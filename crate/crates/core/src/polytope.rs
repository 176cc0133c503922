//! Convex polytopes in dimensions 1 to 3 and the body type shared by the
//! functorial calculus.

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::hull3::{convex_hull_3d, Hull3, Mesh};
use crate::planar::{convex_hull_2d, mixed_volume, PlanarBody, Shape};

pub const MAX_DIM: usize = 3;

/// Convex hull of finitely many points, stored by its extreme points.
/// In dimension 2 the vertices are in counterclockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
}

impl Polytope {
    pub fn new(dim: usize, points: Vec<DVector<f64>>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!("polytopes live in R^1..R^3, got R^{dim}")));
        }
        if points.is_empty() {
            return Err(Error::NotConvex("empty point set".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Dimension(format!("point of length {} in R^{dim}", p.len())));
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Format("non-finite coordinate".into()));
        }
        let vertices = extreme_points(dim, &points);
        Ok(Self { dim, vertices })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(dim, rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn point(coords: &[f64]) -> Self {
        Self::new(coords.len(), vec![DVector::from_column_slice(coords)]).expect("valid point")
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self::from_rows(1, &[vec![a], vec![b]]).expect("valid interval")
    }

    /// Axis-parallel box `Π [0, s_i]`.
    pub fn axis_box(sides: &[f64]) -> Self {
        let d = sides.len();
        let pts = (0..1usize << d)
            .map(|mask| DVector::from_fn(d, |i, _| if mask >> i & 1 == 1 { sides[i] } else { 0.0 }))
            .collect();
        Self::new(d, pts).expect("valid box")
    }

    pub fn from_planar(b: &PlanarBody) -> Result<Self> {
        let v = b
            .vertices()
            .ok_or_else(|| Error::UnsupportedBody("smooth planar body is not a polytope".into()))?;
        Self::new(2, v.iter().map(|p| DVector::from_column_slice(&[p.x, p.y])).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn to_planar(&self) -> Result<PlanarBody> {
        if self.dim != 2 {
            return Err(Error::Dimension(format!("expected R^2, got R^{}", self.dim)));
        }
        PlanarBody::hull(&self.vertices.iter().map(|p| Vector2::new(p[0], p[1])).collect::<Vec<_>>())
    }

    fn points3(&self) -> Vec<Vector3<f64>> {
        self.vertices
            .iter()
            .map(|p| Vector3::new(p[0], p.get(1).copied().unwrap_or(0.0), p.get(2).copied().unwrap_or(0.0)))
            .collect()
    }

    /// Hull mesh for full-dimensional polytopes in R³.
    pub fn hull3(&self) -> Hull3 {
        convex_hull_3d(&self.points3())
    }

    pub fn mesh(&self) -> Option<Mesh> {
        match self.hull3() {
            Hull3::Solid(m) if self.dim == 3 => Some(m),
            _ => None,
        }
    }

    /// Lebesgue measure in the ambient dimension.
    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => {
                let (lo, hi) = self.range(0);
                hi - lo
            }
            2 => {
                let v = &self.vertices;
                if v.len() < 3 {
                    return 0.0;
                }
                0.5 * (0..v.len())
                    .map(|i| {
                        let (p, q) = (&v[i], &v[(i + 1) % v.len()]);
                        p[0] * q[1] - p[1] * q[0]
                    })
                    .sum::<f64>()
            }
            _ => self.mesh().map(|m| m.volume()).unwrap_or(0.0),
        }
    }

    /// `(min, max)` of coordinate `i` over the vertices.
    pub fn range(&self, i: usize) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[i]), hi.max(p[i]))
        })
    }

    /// Image under the linear map given by an `m × dim` matrix.
    pub fn map(&self, a: &DMatrix<f64>) -> Result<Polytope> {
        if a.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "map with {} columns applied to a body in R^{}",
                a.ncols(),
                self.dim
            )));
        }
        Polytope::new(a.nrows(), self.vertices.iter().map(|p| a * p).collect())
    }

    pub fn minkowski_sum(&self, o: &Polytope) -> Result<Polytope> {
        if o.dim != self.dim {
            return Err(Error::Dimension(format!("sum of bodies in R^{} and R^{}", self.dim, o.dim)));
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * o.vertices.len());
        for p in &self.vertices {
            for q in &o.vertices {
                pts.push(p + q);
            }
        }
        Polytope::new(self.dim, pts)
    }

    /// Cartesian product `A × B`.
    pub fn product(&self, o: &Polytope) -> Result<Polytope> {
        let d = self.dim + o.dim;
        if d > MAX_DIM {
            return Err(Error::Dimension(format!("product would live in R^{d}")));
        }
        let mut pts = Vec::new();
        for p in &self.vertices {
            for q in &o.vertices {
                pts.push(DVector::from_iterator(d, p.iter().chain(q.iter()).copied()));
            }
        }
        Polytope::new(d, pts)
    }

    pub fn scaled(&self, s: f64) -> Polytope {
        Polytope::new(self.dim, self.vertices.iter().map(|p| p * s).collect()).expect("scaling keeps validity")
    }

    pub fn translated(&self, t: &DVector<f64>) -> Polytope {
        Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|p| p + t).collect(),
        }
    }

    /// Last coordinate of every vertex.
    pub fn last_levels(&self) -> Vec<f64> {
        self.vertices.iter().map(|p| p[self.dim - 1]).collect()
    }

    /// `{x : (x, t) ∈ P}` as a polytope one dimension lower, or `None` if
    /// the hyperplane misses `P`. Computed from the crossing points of all
    /// vertex pairs, whose hull is the slice.
    pub fn slice_last(&self, t: f64) -> Option<Polytope> {
        let d = self.dim;
        if d < 2 {
            return None;
        }
        let (lo, hi) = self.range(d - 1);
        let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - tol || t > hi + tol {
            return None;
        }
        let v = &self.vertices;
        let mut pts: Vec<DVector<f64>> = Vec::new();
        for i in 0..v.len() {
            let zi = v[i][d - 1] - t;
            if zi.abs() <= tol {
                pts.push(v[i].rows(0, d - 1).into_owned());
            }
            for j in i + 1..v.len() {
                let zj = v[j][d - 1] - t;
                if (zi < -tol && zj > tol) || (zi > tol && zj < -tol) {
                    let s = zi / (zi - zj);
                    let p = &v[i] + (&v[j] - &v[i]) * s;
                    pts.push(p.rows(0, d - 1).into_owned());
                }
            }
        }
        if pts.is_empty() {
            return None;
        }
        Polytope::new(d - 1, pts).ok()
    }

    /// Largest coordinate magnitude, used to scale tolerances.
    pub fn extent(&self) -> f64 {
        self.vertices.iter().map(|p| p.amax()).fold(0.0, f64::max)
    }
}

fn extreme_points(dim: usize, points: &[DVector<f64>]) -> Vec<DVector<f64>> {
    match dim {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![DVector::from_element(1, lo)]
            } else {
                vec![DVector::from_element(1, lo), DVector::from_element(1, hi)]
            }
        }
        2 => convex_hull_2d(&points.iter().map(|p| Vector2::new(p[0], p[1])).collect::<Vec<_>>())
            .into_iter()
            .map(|p| DVector::from_column_slice(&[p.x, p.y]))
            .collect(),
        _ => {
            let p3: Vec<_> = points.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
            let v: Vec<Vector3<f64>> = match convex_hull_3d(&p3) {
                Hull3::Solid(m) => m.vertices,
                Hull3::Planar { vertices, .. } => vertices,
                Hull3::Segment(a, b) => vec![a, b],
                Hull3::Point(a) => vec![a],
            };
            v.into_iter().map(|p| DVector::from_column_slice(p.as_slice())).collect()
        }
    }
}

/// Random polytope: hull of `n` points uniform in `[−1, 1]^dim`.
pub fn random_polytope<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Polytope {
    let pts = (0..n)
        .map(|_| DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)))
        .collect();
    Polytope::new(dim, pts).expect("random points give a valid polytope")
}

/// Convex body in R¹..R³: a polytope, or a smooth planar body.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Polytope(Polytope),
    Smooth(PlanarBody),
}

impl From<Polytope> for Body {
    fn from(p: Polytope) -> Self {
        Body::Polytope(p)
    }
}

impl Body {
    /// Planar bodies with vertices become polytopes; smooth ones stay smooth.
    pub fn planar(b: PlanarBody) -> Result<Self> {
        match b.shape() {
            Shape::Support(_) => Ok(Body::Smooth(b)),
            _ => Ok(Body::Polytope(Polytope::from_planar(&b)?)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Smooth(_) => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Body::Polytope(p) => p.volume(),
            Body::Smooth(b) => b.area(),
        }
    }

    pub fn as_polytope(&self) -> Result<&Polytope> {
        match self {
            Body::Polytope(p) => Ok(p),
            Body::Smooth(_) => Err(Error::UnsupportedBody(
                "operation needs a polytope, got a smooth planar body".into(),
            )),
        }
    }

    pub fn to_planar(&self) -> Result<PlanarBody> {
        match self {
            Body::Polytope(p) => p.to_planar(),
            Body::Smooth(b) => Ok(b.clone()),
        }
    }

    /// Linear image. Smooth bodies support orthogonal maps of the plane and
    /// maps to the line, which act exactly on support functions.
    pub fn map(&self, a: &DMatrix<f64>) -> Result<Body> {
        match self {
            Body::Polytope(p) => Ok(Body::Polytope(p.map(a)?)),
            Body::Smooth(b) => {
                if a.ncols() != 2 {
                    return Err(Error::Dimension(format!("map with {} columns applied to a body in R^2", a.ncols())));
                }
                if a.nrows() == 1 {
                    let (w0, w1) = (a[(0, 0)], a[(0, 1)]);
                    let len = w0.hypot(w1);
                    if len == 0.0 {
                        return Ok(Body::Polytope(Polytope::point(&[0.0])));
                    }
                    let th = f64::atan2(w1, w0);
                    let hi = len * b.support_at(th);
                    let lo = -len * b.support_at(th + std::f64::consts::PI);
                    return Ok(Body::Polytope(Polytope::interval(lo, hi)));
                }
                if a.nrows() == 2 {
                    let g = nalgebra::Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
                    if (g.transpose() * g - nalgebra::Matrix2::identity()).abs().max() <= 1e-12 {
                        return Ok(Body::Smooth(b.transform(&g, crate::planar::DEFAULT_GRID)?));
                    }
                }
                Err(Error::UnsupportedBody(format!(
                    "smooth planar body under a non-orthogonal {}×2 map",
                    a.nrows()
                )))
            }
        }
    }

    pub fn minkowski_sum(&self, o: &Body) -> Result<Body> {
        match (self, o) {
            (Body::Polytope(p), Body::Polytope(q)) => Ok(Body::Polytope(p.minkowski_sum(q)?)),
            (Body::Smooth(a), Body::Smooth(b)) => Ok(Body::Smooth(a.minkowski_sum(b, crate::planar::DEFAULT_GRID))),
            _ => Err(Error::UnsupportedBody("sum of a polytope and a smooth body".into())),
        }
    }

    /// `vol(K + A)`. In the plane this uses `area(K) + 2V(K, A) + area(A)`,
    /// which is exact for every combination of polygons and smooth bodies.
    pub fn volume_of_sum(&self, a: &Body) -> Result<f64> {
        if self.dim() != a.dim() {
            return Err(Error::Dimension(format!("sum of bodies in R^{} and R^{}", self.dim(), a.dim())));
        }
        if self.dim() == 2 && (matches!(self, Body::Smooth(_)) || matches!(a, Body::Smooth(_))) {
            let (k, b) = (self.to_planar()?, a.to_planar()?);
            return Ok(k.area() + 2.0 * mixed_volume(&k, &b) + b.area());
        }
        Ok(self.as_polytope()?.minkowski_sum(a.as_polytope()?)?.volume())
    }

    pub fn scaled(&self, s: f64) -> Body {
        match self {
            Body::Polytope(p) => Body::Polytope(p.scaled(s)),
            Body::Smooth(b) => Body::Smooth(b.scaled(s)),
        }
    }
}
