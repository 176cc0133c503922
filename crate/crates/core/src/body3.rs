//! Convex bodies `P + rB` in R³: a polytope (possibly flat) thickened by a
//! ball. The family is closed under Minkowski sums and contains every
//! parallel body `K + εB`, so Steiner polynomials are exact.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::hull3::Hull3;
use crate::polytope::Polytope;

/// Volumes of the unit balls in dimensions 0..3.
pub const UNIT_BALL: [f64; 4] = [1.0, 2.0, PI, 4.0 * PI / 3.0];

#[derive(Clone, Debug, PartialEq)]
pub struct Body3 {
    core: Polytope,
    radius: f64,
}

impl Body3 {
    pub fn new(core: Polytope, radius: f64) -> Result<Self> {
        if core.dim() != 3 {
            return Err(Error::Dimension(format!("core must live in R^3, got R^{}", core.dim())));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::NotConvex(format!("radius {radius} must be finite and nonnegative")));
        }
        Ok(Self { core, radius })
    }

    pub fn polytope(core: Polytope) -> Result<Self> {
        Self::new(core, 0.0)
    }

    pub fn ball(radius: f64) -> Result<Self> {
        Self::new(Polytope::point(&[0.0; 3]), radius)
    }

    pub fn cube(side: f64) -> Self {
        Self::polytope(Polytope::axis_box(&[side; 3])).expect("valid cube")
    }

    /// Segment `[0, u]`.
    pub fn segment(u: &Vector3<f64>) -> Self {
        Self::polytope(Polytope::new(3, vec![DVector::zeros(3), DVector::from_column_slice(u.as_slice())]).unwrap())
            .expect("valid segment")
    }

    pub fn core(&self) -> &Polytope {
        &self.core
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_polytope(&self) -> bool {
        self.radius == 0.0
    }

    /// `(V, S, M)` of the core, with `vol(P + tB) = V + S·t + M·t² + (4π/3)·t³`.
    pub fn core_quermass(&self) -> (f64, f64, f64) {
        match self.core.hull3() {
            Hull3::Solid(m) => (m.volume(), m.surface_area(), m.mean_width_term()),
            Hull3::Planar { vertices, normal } => {
                let n = vertices.len();
                let mut area = 0.0;
                let mut perimeter = 0.0;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    area += 0.5 * (p - vertices[0]).cross(&(q - vertices[0])).dot(&normal);
                    perimeter += (q - p).norm();
                }
                (0.0, 2.0 * area.abs(), 0.5 * PI * perimeter)
            }
            Hull3::Segment(a, b) => (0.0, 0.0, PI * (b - a).norm()),
            Hull3::Point(_) => (0.0, 0.0, 0.0),
        }
    }

    /// Coefficients of `ε ↦ vol(K + εB)`, lowest degree first.
    pub fn steiner(&self) -> [f64; 4] {
        let (v, s, m) = self.core_quermass();
        let r = self.radius;
        let k = UNIT_BALL[3];
        [
            v + s * r + m * r * r + k * r.powi(3),
            s + 2.0 * m * r + 3.0 * k * r * r,
            m + 3.0 * k * r,
            k,
        ]
    }

    pub fn volume(&self) -> f64 {
        self.steiner()[0]
    }

    /// Intrinsic volumes from the Steiner coefficients,
    /// `V_k = c_{3−k} / κ_{3−k}`.
    pub fn intrinsic_volumes(&self) -> [f64; 4] {
        let c = self.steiner();
        [c[3] / UNIT_BALL[3], c[2] / UNIT_BALL[2], c[1] / UNIT_BALL[1], c[0]]
    }

    pub fn support(&self, u: &Vector3<f64>) -> f64 {
        self.core
            .vertices()
            .iter()
            .map(|v| v[0] * u.x + v[1] * u.y + v[2] * u.z)
            .fold(f64::NEG_INFINITY, f64::max)
            + self.radius * u.norm()
    }

    pub fn minkowski_sum(&self, o: &Body3) -> Result<Body3> {
        Body3::new(self.core.minkowski_sum(&o.core)?, self.radius + o.radius)
    }

    /// `K + εB`.
    pub fn parallel(&self, eps: f64) -> Result<Body3> {
        Body3::new(self.core.clone(), self.radius + eps)
    }

    pub fn scaled(&self, s: f64) -> Body3 {
        Body3 {
            core: self.core.scaled(s),
            radius: self.radius * s.abs(),
        }
    }

    pub fn translated(&self, t: &Vector3<f64>) -> Body3 {
        Body3 {
            core: self.core.translated(&DVector::from_column_slice(t.as_slice())),
            radius: self.radius,
        }
    }

    /// `−K`.
    pub fn reflect(&self) -> Body3 {
        self.scaled(-1.0)
    }

    /// Image under an orthogonal matrix.
    pub fn rotated(&self, g: &nalgebra::Matrix3<f64>) -> Result<Body3> {
        if (g.transpose() * g - nalgebra::Matrix3::identity()).amax() > 1e-10 {
            return Err(Error::UnsupportedBody("only orthogonal maps keep the ball part".into()));
        }
        let a = DMatrix::from_column_slice(3, 3, g.as_slice());
        Body3::new(self.core.map(&a)?, self.radius)
    }

    /// Radius of the largest ball around the core's vertex centroid that
    /// fits inside; zero for flat bodies without a ball part.
    pub fn inradius_proxy(&self) -> f64 {
        let inner = match self.core.hull3() {
            Hull3::Solid(m) => {
                let c = m.vertices.iter().sum::<Vector3<f64>>() / m.vertices.len() as f64;
                m.faces
                    .iter()
                    .map(|f| {
                        let n = m.face_area_vector(f).normalize();
                        n.dot(&(m.vertices[f[0]] - c))
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            _ => 0.0,
        };
        inner + self.radius
    }

    /// Euclidean distance from `x` to the body (zero inside).
    pub fn distance(&self, x: &Vector3<f64>) -> f64 {
        (core_distance(&self.core.hull3(), x) - self.radius).max(0.0)
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in self.core.vertices() {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo.add_scalar(-self.radius), hi.add_scalar(self.radius))
    }
}

fn core_distance(h: &Hull3, x: &Vector3<f64>) -> f64 {
    match h {
        Hull3::Point(p) => (x - p).norm(),
        Hull3::Segment(a, b) => segment_distance(x, a, b),
        Hull3::Planar { vertices, .. } => (1..vertices.len() - 1)
            .map(|i| triangle_distance(x, &vertices[0], &vertices[i], &vertices[i + 1]))
            .fold(f64::INFINITY, f64::min),
        Hull3::Solid(m) => {
            let inside = m.faces.iter().all(|f| {
                let n = m.face_area_vector(f);
                n.dot(&(x - m.vertices[f[0]])) <= 0.0
            });
            if inside {
                return 0.0;
            }
            m.faces
                .iter()
                .map(|f| triangle_distance(x, &m.vertices[f[0]], &m.vertices[f[1]], &m.vertices[f[2]]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn segment_distance(x: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = b - a;
    let t = if d.norm_squared() > 0.0 {
        ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - (a + d * t)).norm()
}

/// Distance from `p` to the triangle `abc` (closest-point by Voronoi regions).
fn triangle_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return (p - (a + ab * (d1 / (d1 - d3)))).norm();
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return (p - (a + ac * (d2 / (d2 - d6)))).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let (v, w) = (vb * denom, vc * denom);
    (p - (a + ab * v + ac * w)).norm()
}

/// Stratified Monte-Carlo volume: one uniform sample per cell of an
/// `m × m × m` grid over the bounding box. Returns the estimate and a
/// conservative binomial standard error.
pub fn monte_carlo_volume<R: Rng + ?Sized>(body: &Body3, samples: usize, rng: &mut R) -> (f64, f64) {
    let (lo, hi) = body.bounding_box();
    let ext = hi - lo;
    let box_vol = ext.x * ext.y * ext.z;
    if box_vol <= 0.0 {
        return (0.0, 0.0);
    }
    let m = (samples as f64).cbrt().ceil().max(1.0) as usize;
    let hull = body.core.hull3();
    let mut hits = 0usize;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let cell = Vector3::new(
                    (i as f64 + rng.gen::<f64>()) / m as f64,
                    (j as f64 + rng.gen::<f64>()) / m as f64,
                    (k as f64 + rng.gen::<f64>()) / m as f64,
                );
                let x = lo + ext.component_mul(&cell);
                if core_distance(&hull, &x) <= body.radius {
                    hits += 1;
                }
            }
        }
    }
    let n = (m * m * m) as f64;
    let p = hits as f64 / n;
    (p * box_vol, box_vol * (p * (1.0 - p) / n).sqrt())
}

/// Seeded 3D probe bodies: boxes, random polytopes, flat polygons,
/// segments, balls and thickened polytopes.
pub fn probe_bodies3<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Body3> {
    (0..count)
        .map(|i| match i % 6 {
            0 => Body3::polytope(Polytope::axis_box(&[
                rng.gen_range(0.3..1.5),
                rng.gen_range(0.3..1.5),
                rng.gen_range(0.3..1.5),
            ]))
            .unwrap(),
            1 => Body3::ball(rng.gen_range(0.2..1.2)).unwrap(),
            2 => {
                let n = rng.gen_range(2..5);
                Body3::polytope(crate::polytope::random_polytope(rng, 3, n)).unwrap()
            }
            3 => {
                let n = rng.gen_range(6..14);
                let r = rng.gen_range(0.0..0.4);
                Body3::new(crate::polytope::random_polytope(rng, 3, n), r).unwrap()
            }
            _ => {
                let n = rng.gen_range(5..14);
                Body3::polytope(crate::polytope::random_polytope(rng, 3, n)).unwrap()
            }
        })
        .collect()
}
