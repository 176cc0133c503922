//! Convex bodies in the plane.
//!
//! Bodies are either smooth (a band-limited support function), polygons
//! (counterclockwise vertex lists, with points and segments allowed as
//! degenerate polygons), or grid-sampled support functions produced by
//! operations that mix the two exact representations.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::{TrigPoly, TrigPolyJson};

pub const DEFAULT_BAND_LIMIT: usize = 32;
/// Number of grid points used for sampling and resampling support functions.
pub const DEFAULT_GRID: usize = 512;
pub const CONVEXITY_TOL: f64 = 1e-9;

const CONVEXITY_GRID: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Smooth body given by its support function.
    Support(TrigPoly),
    /// Counterclockwise vertices in strictly convex position.
    Polygon(Vec<Vector2<f64>>),
    /// Support values on the uniform grid `θ_j = 2πj/m`.
    Sampled(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarBody {
    shape: Shape,
    approximate: bool,
}

/// First area measure `S₁(K,·)`: an absolutely continuous part with a
/// band-limited density plus point masses at polygon edge normals.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaMeasure1 {
    pub density: TrigPoly,
    /// `(angle, mass)` pairs, angle in `[0, 2π)`.
    pub atoms: Vec<(f64, f64)>,
}

impl AreaMeasure1 {
    pub fn total_mass(&self) -> f64 {
        self.density.integral() + self.atoms.iter().map(|(_, m)| m).sum::<f64>()
    }

    /// `∫ g dS₁` for a band-limited `g`.
    pub fn integrate(&self, g: &TrigPoly) -> f64 {
        self.density.inner(g) + self.atoms.iter().map(|&(t, m)| m * g.eval(t)).sum::<f64>()
    }

    /// `∫ g dS₁` for an arbitrary continuous `g`. The density part is
    /// integrated by the trapezoid rule on `grid` points.
    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64, grid: usize) -> f64 {
        let mut s: f64 = self.atoms.iter().map(|&(t, m)| m * g(t)).sum();
        if self.density.max_abs_coeff() > 0.0 {
            let h = TAU / grid as f64;
            s += (0..grid)
                .map(|j| {
                    let t = j as f64 * h;
                    g(t) * self.density.eval(t)
                })
                .sum::<f64>()
                * h;
        }
        s
    }

    /// `(∫ cos θ dS₁, ∫ sin θ dS₁)`; zero for any closed boundary.
    pub fn centroid(&self) -> (f64, f64) {
        let c = self.integrate(&TrigPoly::cos_mode(1, 1.0));
        let s = self.integrate(&TrigPoly::sin_mode(1, 1.0));
        (c, s)
    }
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Monotone-chain hull; collinear points are dropped. Returns the hull in
/// counterclockwise order starting from the lowest-then-leftmost point.
pub fn convex_hull_2d(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts: Vec<Vector2<f64>> = points.to_vec();
    pts.sort_by(|p, q| p.x.partial_cmp(&q.x).unwrap().then(p.y.partial_cmp(&q.y).unwrap()));
    let scale = pts
        .iter()
        .fold(0.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1e-300);
    let eps = 1e-13 * scale * scale;
    pts.dedup_by(|p, q| (*p - *q).norm() <= 1e-13 * scale);
    if pts.len() <= 1 {
        return pts;
    }
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 1]) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 1]) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && (lower[0] - lower[1]).norm() <= 1e-13 * scale {
        lower.pop();
    }
    // rotate to start at lowest-then-leftmost
    let start = lowest_index(&lower);
    lower.rotate_left(start);
    lower
}

fn lowest_index(v: &[Vector2<f64>]) -> usize {
    let mut best = 0;
    for (i, p) in v.iter().enumerate() {
        let b = v[best];
        if p.y < b.y || (p.y == b.y && p.x < b.x) {
            best = i;
        }
    }
    best
}

/// Edge vectors of a counterclockwise vertex loop.
fn edges(v: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    if v.len() < 2 {
        return Vec::new();
    }
    (0..v.len()).map(|i| v[(i + 1) % v.len()] - v[i]).collect()
}

fn polygon_area(v: &[Vector2<f64>]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    0.5 * (0..v.len())
        .map(|i| cross(v[i], v[(i + 1) % v.len()]))
        .sum::<f64>()
}

/// Polygon circumscribed by the support lines `x·u(θ_j) = h_j`.
fn polygon_from_support_samples(h: &[f64]) -> Vec<Vector2<f64>> {
    let m = h.len();
    let mut pts = Vec::with_capacity(m);
    for j in 0..m {
        let t0 = TAU * j as f64 / m as f64;
        let t1 = TAU * ((j + 1) % m) as f64 / m as f64;
        let a = Matrix2::new(t0.cos(), t0.sin(), t1.cos(), t1.sin());
        let rhs = Vector2::new(h[j], h[(j + 1) % m]);
        if let Some(inv) = a.try_inverse() {
            pts.push(inv * rhs);
        }
    }
    convex_hull_2d(&pts)
}

impl PlanarBody {
    /// Smooth body from a support function; rejects `min(h + h'') < −tol`.
    pub fn support(h: TrigPoly) -> Result<Self> {
        let rho = h.curvature_density();
        let min = (0..CONVEXITY_GRID)
            .map(|j| rho.eval(TAU * j as f64 / CONVEXITY_GRID as f64))
            .fold(f64::INFINITY, f64::min);
        if min < -CONVEXITY_TOL {
            return Err(Error::NotConvex(format!("min(h + h'') = {min:e}")));
        }
        Ok(Self {
            shape: Shape::Support(h),
            approximate: false,
        })
    }

    /// Disc of radius `r` centred at the origin.
    pub fn disc(r: f64) -> Self {
        Self {
            shape: Shape::Support(TrigPoly::constant(r)),
            approximate: false,
        }
    }

    /// Polygon from counterclockwise vertices in strictly convex position.
    /// One vertex is a point, two distinct vertices a segment.
    pub fn polygon(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        validate_polygon(&vertices)?;
        let mut v = vertices;
        let start = lowest_index(&v);
        v.rotate_left(start);
        Ok(Self {
            shape: Shape::Polygon(v),
            approximate: false,
        })
    }

    /// Convex hull of arbitrary points.
    pub fn hull(points: &[Vector2<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NotConvex("empty point set".into()));
        }
        Ok(Self {
            shape: Shape::Polygon(convex_hull_2d(points)),
            approximate: false,
        })
    }

    pub fn point(p: Vector2<f64>) -> Self {
        Self {
            shape: Shape::Polygon(vec![p]),
            approximate: false,
        }
    }

    pub fn segment(p: Vector2<f64>, q: Vector2<f64>) -> Result<Self> {
        Self::hull(&[p, q])
    }

    /// Axis-parallel rectangle `[x0, x0+w] × [y0, y0+h]`.
    pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64) -> Result<Self> {
        Self::hull(&[
            Vector2::new(x0, y0),
            Vector2::new(x0 + w, y0),
            Vector2::new(x0 + w, y0 + h),
            Vector2::new(x0, y0 + h),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is convex")
    }

    /// Regular `n`-gon inscribed in the circle of radius `r`.
    pub fn regular_polygon(n: usize, r: f64, phase: f64) -> Self {
        let pts: Vec<_> = (0..n)
            .map(|i| {
                let t = phase + TAU * i as f64 / n as f64;
                Vector2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Self::hull(&pts).expect("regular polygon is convex")
    }

    /// Grid-sampled support values, flagged approximate.
    pub fn sampled(h: Vec<f64>) -> Self {
        Self {
            shape: Shape::Sampled(h),
            approximate: true,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.shape, Shape::Support(_))
    }

    pub fn support_poly(&self) -> Option<&TrigPoly> {
        match &self.shape {
            Shape::Support(h) => Some(h),
            _ => None,
        }
    }

    /// Vertex list for polygonal and sampled bodies.
    pub fn vertices(&self) -> Option<Vec<Vector2<f64>>> {
        match &self.shape {
            Shape::Support(_) => None,
            Shape::Polygon(v) => Some(v.clone()),
            Shape::Sampled(h) => Some(polygon_from_support_samples(h)),
        }
    }

    /// Support function `h(θ) = max_{x∈K} ⟨x, u(θ)⟩`.
    pub fn support_at(&self, theta: f64) -> f64 {
        match &self.shape {
            Shape::Support(h) => h.eval(theta),
            _ => {
                let u = Vector2::new(theta.cos(), theta.sin());
                self.vertices()
                    .unwrap()
                    .iter()
                    .map(|p| p.dot(&u))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Support values on the uniform grid of `m` points.
    pub fn support_samples(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| self.support_at(TAU * j as f64 / m as f64))
            .collect()
    }

    /// Exact Fourier coefficients of the support function, truncated to band
    /// limit `n`. For polygons these come from closed-form arc integrals.
    pub fn support_coefficients(&self, n: usize) -> TrigPoly {
        match &self.shape {
            Shape::Support(h) if h.band_limit() <= n => h.clone(),
            Shape::Support(h) => h.with_band_limit(n),
            _ => polygon_support_coefficients(&self.vertices().unwrap(), n),
        }
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Support(h) => 0.5 * h.inner(&h.curvature_density()),
            _ => polygon_area(&self.vertices().unwrap()),
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.area_measure().total_mass()
    }

    pub fn area_measure(&self) -> AreaMeasure1 {
        match &self.shape {
            Shape::Support(h) => AreaMeasure1 {
                density: h.curvature_density(),
                atoms: Vec::new(),
            },
            _ => {
                let v = self.vertices().unwrap();
                let atoms = edges(&v)
                    .into_iter()
                    .filter(|e| e.norm() > 0.0)
                    .map(|e| {
                        let len = e.norm();
                        (wrap_angle(f64::atan2(-e.x, e.y)), len)
                    })
                    .collect();
                AreaMeasure1 {
                    density: TrigPoly::zeros(0),
                    atoms,
                }
            }
        }
    }

    /// `A + B`. Smooth + smooth adds support coefficients; polygon + polygon
    /// merges edges by normal angle; any other combination is resampled on
    /// `grid` directions and flagged approximate.
    pub fn minkowski_sum(&self, other: &PlanarBody, grid: usize) -> PlanarBody {
        let approx = self.approximate || other.approximate;
        match (&self.shape, &other.shape) {
            (Shape::Support(h), Shape::Support(g)) => PlanarBody {
                shape: Shape::Support(h + g),
                approximate: approx,
            },
            (Shape::Polygon(p), Shape::Polygon(q)) => PlanarBody {
                shape: Shape::Polygon(minkowski_polygons(p, q)),
                approximate: approx,
            },
            _ => {
                let a = self.support_samples(grid);
                let b = other.support_samples(grid);
                PlanarBody::sampled(a.iter().zip(&b).map(|(x, y)| x + y).collect())
            }
        }
    }

    /// `λ·A` for `λ ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> PlanarBody {
        assert!(lambda >= 0.0);
        let shape = match &self.shape {
            Shape::Support(h) => Shape::Support(h.scale(lambda)),
            Shape::Polygon(v) => {
                if lambda == 0.0 {
                    Shape::Polygon(vec![Vector2::zeros()])
                } else {
                    Shape::Polygon(v.iter().map(|p| p * lambda).collect())
                }
            }
            Shape::Sampled(h) => Shape::Sampled(h.iter().map(|x| x * lambda).collect()),
        };
        PlanarBody {
            shape,
            approximate: self.approximate,
        }
    }

    pub fn translated(&self, t: Vector2<f64>) -> PlanarBody {
        let shape = match &self.shape {
            Shape::Support(h) => {
                let mut g = h.clone();
                g.set_a(1, h.a(1) + t.x);
                g.set_b(1, h.b(1) + t.y);
                Shape::Support(g)
            }
            Shape::Polygon(v) => Shape::Polygon(v.iter().map(|p| p + t).collect()),
            Shape::Sampled(h) => {
                let m = h.len();
                Shape::Sampled(
                    h.iter()
                        .enumerate()
                        .map(|(j, x)| {
                            let th = TAU * j as f64 / m as f64;
                            x + t.x * th.cos() + t.y * th.sin()
                        })
                        .collect(),
                )
            }
        };
        PlanarBody {
            shape,
            approximate: self.approximate,
        }
    }

    /// `−A`.
    pub fn reflect(&self) -> PlanarBody {
        self.transform(&(-Matrix2::identity()), DEFAULT_GRID)
            .expect("−Id is invertible")
    }

    /// `g·A` for an invertible 2×2 matrix. Orthogonal maps act exactly on
    /// support coefficients; other maps on smooth bodies resample
    /// `‖gᵀu‖·h(gᵀu/‖gᵀu‖)` on `grid` directions and refit to the band limit.
    pub fn transform(&self, g: &Matrix2<f64>, grid: usize) -> Result<PlanarBody> {
        let det = g.determinant();
        let scale = g.norm().max(1e-300);
        if det.abs() <= 1e-12 * scale * scale {
            return Err(Error::SingularMap(det));
        }
        match &self.shape {
            Shape::Polygon(v) => {
                let mut w: Vec<_> = v.iter().map(|p| g * p).collect();
                if det < 0.0 {
                    w.reverse();
                }
                let mut b = PlanarBody::hull(&w)?;
                b.approximate = self.approximate;
                Ok(b)
            }
            Shape::Support(h) => {
                if is_orthogonal(g) {
                    let alpha = f64::atan2(g[(1, 0)], g[(0, 0)]);
                    let out = if det > 0.0 {
                        h.shift(-alpha)
                    } else {
                        // g = R_α·diag(1, −1): h_{gA}(θ) = h_A(α − θ)
                        h.shift(alpha).reflect()
                    };
                    return Ok(PlanarBody {
                        shape: Shape::Support(out),
                        approximate: self.approximate,
                    });
                }
                let gt = g.transpose();
                let samples: Vec<f64> = (0..grid)
                    .map(|j| {
                        let t = TAU * j as f64 / grid as f64;
                        let w = gt * Vector2::new(t.cos(), t.sin());
                        w.norm() * h.eval(f64::atan2(w.y, w.x))
                    })
                    .collect();
                let n = h.band_limit().max(DEFAULT_BAND_LIMIT).min(grid / 2 - 1);
                Ok(PlanarBody {
                    shape: Shape::Support(TrigPoly::from_samples(&samples, n)),
                    approximate: true,
                })
            }
            Shape::Sampled(_) => {
                let mut b = PlanarBody::hull(
                    &self.vertices().unwrap().iter().map(|p| g * p).collect::<Vec<_>>(),
                )?;
                b.approximate = true;
                Ok(b)
            }
        }
    }

    /// Rotation by `α` counterclockwise.
    pub fn rotate(&self, alpha: f64) -> PlanarBody {
        let (s, c) = alpha.sin_cos();
        self.transform(&Matrix2::new(c, -s, s, c), DEFAULT_GRID)
            .expect("rotation is invertible")
    }

    /// Length of the orthogonal projection onto the line spanned by `u`.
    pub fn width(&self, u: Vector2<f64>) -> f64 {
        let t = f64::atan2(u.y, u.x);
        (self.support_at(t) + self.support_at(t + PI)) * u.norm()
    }
}

fn is_orthogonal(g: &Matrix2<f64>) -> bool {
    (g.transpose() * g - Matrix2::identity()).abs().max() <= 1e-12
}

fn validate_polygon(v: &[Vector2<f64>]) -> Result<()> {
    match v.len() {
        0 => Err(Error::NotConvex("empty vertex list".into())),
        1 => Ok(()),
        2 => {
            if (v[0] - v[1]).norm() == 0.0 {
                Err(Error::NotConvex("repeated vertex".into()))
            } else {
                Ok(())
            }
        }
        n => {
            let scale = v.iter().fold(0.0_f64, |m, p| m.max(p.norm())).max(1e-300);
            let e = edges(v);
            let mut turning = 0.0;
            for i in 0..n {
                let (a, b) = (e[i], e[(i + 1) % n]);
                if a.norm() <= 1e-14 * scale {
                    return Err(Error::NotConvex(format!("repeated vertex at index {}", (i + 1) % n)));
                }
                if cross(a, b) <= 1e-14 * scale * scale {
                    return Err(Error::NotConvex(format!(
                        "vertex {} is not a strict counterclockwise turn",
                        (i + 1) % n
                    )));
                }
                turning += f64::atan2(cross(a, b), a.dot(&b));
            }
            if (turning - TAU).abs() > 1e-6 {
                return Err(Error::NotConvex(format!(
                    "boundary winds {:.3}·2π times",
                    turning / TAU
                )));
            }
            Ok(())
        }
    }
}

/// Minkowski sum of two counterclockwise polygons by merging edge
/// sequences in order of direction angle.
fn minkowski_polygons(p: &[Vector2<f64>], q: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let ip = lowest_index(p);
    let iq = lowest_index(q);
    let mut pp = p.to_vec();
    pp.rotate_left(ip);
    let mut qq = q.to_vec();
    qq.rotate_left(iq);
    let ep = edges(&pp);
    let eq = edges(&qq);
    let ang = |e: &Vector2<f64>| wrap_angle(f64::atan2(e.y, e.x));
    let mut out = Vec::with_capacity(ep.len() + eq.len() + 1);
    let mut cur = pp[0] + qq[0];
    out.push(cur);
    let (mut i, mut j) = (0, 0);
    while i < ep.len() || j < eq.len() {
        let step = if i == ep.len() {
            j += 1;
            eq[j - 1]
        } else if j == eq.len() {
            i += 1;
            ep[i - 1]
        } else {
            let (a, b) = (ang(&ep[i]), ang(&eq[j]));
            if a < b {
                i += 1;
                ep[i - 1]
            } else if b < a {
                j += 1;
                eq[j - 1]
            } else {
                i += 1;
                j += 1;
                ep[i - 1] + eq[j - 1]
            }
        };
        cur += step;
        out.push(cur);
    }
    // the loop closes on the start vertex; the hull pass removes it along
    // with any collinear vertices introduced by near-parallel edges
    convex_hull_2d(&out)
}

/// Fourier coefficients of a polygon's support function, exact up to
/// rounding: on the normal cone of vertex `v` the support function equals
/// `v.x cos θ + v.y sin θ`.
fn polygon_support_coefficients(v: &[Vector2<f64>], n: usize) -> TrigPoly {
    let mut out = TrigPoly::zeros(n);
    if v.len() == 1 {
        if n >= 1 {
            out.set_a(1, v[0].x);
            out.set_b(1, v[0].y);
        }
        return out;
    }
    let e = edges(v);
    let m = v.len();
    // normal cone of vertex i runs from the normal of edge i−1 to that of edge i
    let normal_angle = |e: &Vector2<f64>| f64::atan2(-e.x, e.y);
    for i in 0..m {
        let lo = normal_angle(&e[(i + m - 1) % m]);
        let mut hi = normal_angle(&e[i]);
        while hi < lo {
            hi += TAU;
        }
        let (x, y) = (v[i].x, v[i].y);
        for k in 0..=n {
            let ca = x * int_cos_cos(1, k, lo, hi) + y * int_sin_cos(1, k, lo, hi);
            if k == 0 {
                out.set_a(0, out.a(0) + ca / TAU);
            } else {
                let sb = x * int_sin_cos(k, 1, lo, hi) + y * int_sin_sin(1, k, lo, hi);
                out.set_a(k, out.a(k) + ca / PI);
                out.set_b(k, out.b(k) + sb / PI);
            }
        }
    }
    out
}

fn int_cos(j: i64, lo: f64, hi: f64) -> f64 {
    if j == 0 {
        hi - lo
    } else {
        let jf = j as f64;
        ((jf * hi).sin() - (jf * lo).sin()) / jf
    }
}

fn int_sin(j: i64, lo: f64, hi: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        let jf = j as f64;
        -((jf * hi).cos() - (jf * lo).cos()) / jf
    }
}

/// `∫ cos(pθ) cos(qθ)`.
fn int_cos_cos(p: usize, q: usize, lo: f64, hi: f64) -> f64 {
    let (p, q) = (p as i64, q as i64);
    0.5 * (int_cos(p - q, lo, hi) + int_cos(p + q, lo, hi))
}

/// `∫ sin(pθ) cos(qθ)`.
fn int_sin_cos(p: usize, q: usize, lo: f64, hi: f64) -> f64 {
    let (p, q) = (p as i64, q as i64);
    0.5 * (int_sin(p + q, lo, hi) + int_sin(p - q, lo, hi))
}

/// `∫ sin(pθ) sin(qθ)`.
fn int_sin_sin(p: usize, q: usize, lo: f64, hi: f64) -> f64 {
    let (p, q) = (p as i64, q as i64);
    0.5 * (int_cos(p - q, lo, hi) - int_cos(p + q, lo, hi))
}

/// Intersection of two convex polygons given by counterclockwise vertices
/// (Sutherland–Hodgman). `clip` needs at least three vertices; the result
/// may be empty or degenerate.
pub fn clip_convex(subject: &[Vector2<f64>], clip: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let e = b - a;
        let side = |p: &Vector2<f64>| cross(e, p - a);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(&p), side(&q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                out.push(p + (q - p) * (sp / (sp - sq)));
            }
        }
    }
    out
}

/// Mixed area `V(A, B) = ½∫ h_A dS₁(B)`.
pub fn mixed_volume(a: &PlanarBody, b: &PlanarBody) -> f64 {
    match (&a.shape, &b.shape) {
        (Shape::Support(ha), Shape::Support(hb)) => 0.5 * ha.inner(&hb.curvature_density()),
        (_, Shape::Polygon(_) | Shape::Sampled(_)) => {
            0.5 * b
                .area_measure()
                .atoms
                .iter()
                .map(|&(t, m)| m * a.support_at(t))
                .sum::<f64>()
        }
        (_, Shape::Support(_)) => mixed_volume(b, a),
    }
}

/// Mixed area read off the Steiner polynomial
/// `ε ↦ area(A + εB) = area(A) + 2εV(A, B) + ε²area(B)`. Exact for smooth
/// pairs and polygon pairs, whose Minkowski sums are formed exactly.
pub fn mixed_volume_by_fit(a: &PlanarBody, b: &PlanarBody, grid: usize) -> Result<f64> {
    let c = crate::quadrature::fit_polynomial(
        |e| Ok(a.minkowski_sum(&b.scaled(e), grid).area()),
        2,
        0.5,
        "planar Steiner polynomial",
    )?;
    Ok(0.5 * c[1])
}

/// Seeded generator for smooth bodies with a closed-form convexity
/// certificate: `h = r·(1 + Σ_{k≥2} (a_k cos kθ + b_k sin kθ))` with
/// `Σ k²(|a_k| + |b_k|) ≤ budget < 1`, plus a random translation.
pub fn random_smooth_body<R: Rng + ?Sized>(rng: &mut R, band: usize, budget: f64) -> PlanarBody {
    assert!(band >= 2 && budget < 1.0);
    let r = rng.gen_range(0.5..1.5);
    let mut w: Vec<(f64, f64)> = (2..=band)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let weight: f64 = w
        .iter()
        .enumerate()
        .map(|(i, (a, b))| ((i + 2) * (i + 2)) as f64 * (a.abs() + b.abs()))
        .sum();
    let target = budget * rng.gen_range(0.2..1.0);
    for p in &mut w {
        p.0 *= target / weight;
        p.1 *= target / weight;
    }
    let mut h = TrigPoly::zeros(band);
    h.set_a(0, r);
    h.set_a(1, rng.gen_range(-0.5..0.5));
    h.set_b(1, rng.gen_range(-0.5..0.5));
    for (i, (a, b)) in w.into_iter().enumerate() {
        h.set_a(i + 2, r * a);
        h.set_b(i + 2, r * b);
    }
    PlanarBody::support(h).expect("certificate guarantees convexity")
}

/// Random convex polygon: `n` points on an ellipse with random axes,
/// orientation and centre.
pub fn random_polygon<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PlanarBody {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (ax, ay) = (rng.gen_range(0.4..1.2), rng.gen_range(0.4..1.2));
    let rot = rng.gen_range(0.0..TAU);
    let c = Vector2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let (s, co) = rot.sin_cos();
    let pts: Vec<_> = angles
        .iter()
        .map(|t| {
            let p = Vector2::new(ax * t.cos(), ay * t.sin());
            c + Vector2::new(co * p.x - s * p.y, s * p.x + co * p.y)
        })
        .collect();
    PlanarBody::hull(&pts).expect("points on an ellipse are in convex position")
}

/// JSON shape of a planar body.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PlanarBodyJson {
    Support {
        #[serde(flatten)]
        h: TrigPolyJson,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl PlanarBodyJson {
    pub fn into_body(self) -> Result<PlanarBody> {
        match self {
            PlanarBodyJson::Support { h } => PlanarBody::support(h.into_poly()?),
            PlanarBodyJson::Polygon { vertices } => {
                PlanarBody::polygon(vertices.iter().map(|p| Vector2::new(p[0], p[1])).collect())
            }
        }
    }
}

impl From<&PlanarBody> for PlanarBodyJson {
    fn from(b: &PlanarBody) -> Self {
        match b.shape() {
            Shape::Support(h) => PlanarBodyJson::Support { h: h.into() },
            _ => PlanarBodyJson::Polygon {
                vertices: b.vertices().unwrap().iter().map(|p| [p.x, p.y]).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> PlanarBody {
        PlanarBody::unit_square()
    }

    /// Area of a fine polygonal approximation of `K + D` (D the unit disc):
    /// hull of vertex ± disc samples.
    fn polygon_plus_disc_area(v: &[Vector2<f64>], m: usize) -> f64 {
        let mut pts = Vec::new();
        for p in v {
            for j in 0..m {
                let t = TAU * j as f64 / m as f64;
                pts.push(p + Vector2::new(t.cos(), t.sin()));
            }
        }
        polygon_area(&convex_hull_2d(&pts))
    }

    #[test]
    fn disc_sum_and_square_sum() {
        let d = PlanarBody::disc(1.0).minkowski_sum(&PlanarBody::disc(1.0), DEFAULT_GRID);
        assert_eq!(d.support_poly().unwrap(), &TrigPoly::constant(2.0));
        let s = square().minkowski_sum(&square(), DEFAULT_GRID);
        assert!((s.area() - 4.0).abs() < 1e-14);
        assert_eq!(s.vertices().unwrap().len(), 4);
    }

    #[test]
    fn square_plus_disc_is_approximate_and_close() {
        let s = square().minkowski_sum(&PlanarBody::disc(1.0), DEFAULT_GRID);
        assert!(s.is_approximate());
        // oracle: inscribed polygonal approximation, 20000 boundary samples
        let oracle = polygon_plus_disc_area(&square().vertices().unwrap(), 20000);
        assert!((oracle - (5.0 + PI)).abs() < 1e-6);
        // circumscribed 512-gon overshoots π by about π³/(3·512²)
        assert!((s.area() - (5.0 + PI)).abs() < 2e-4);
    }

    #[test]
    fn area_of_basic_bodies() {
        assert!((PlanarBody::disc(1.0).area() - PI).abs() < 1e-15);
        assert!((square().area() - 1.0).abs() < 1e-15);
        let h = TrigPoly::new(vec![1.0, 0.0, 0.1], vec![]);
        let b = PlanarBody::support(h.clone()).unwrap();
        let m = 1_000_000;
        let dt = TAU / m as f64;
        let rho = h.curvature_density();
        let quad: f64 = (0..m)
            .map(|j| {
                let t = j as f64 * dt;
                0.5 * h.eval(t) * rho.eval(t)
            })
            .sum::<f64>()
            * dt;
        assert!((b.area() - quad).abs() < 1e-10);
    }

    #[test]
    fn area_measure_examples() {
        let d = PlanarBody::disc(1.0).area_measure();
        assert_eq!(d.density, TrigPoly::constant(1.0));
        assert!(d.atoms.is_empty());

        let s = square().area_measure();
        let mut angles: Vec<f64> = s.atoms.iter().map(|a| a.0).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, want) in angles.iter().zip([0.0, PI / 2.0, PI, 1.5 * PI]) {
            assert!((a - want).abs() < 1e-15);
        }
        assert!(s.atoms.iter().all(|a| (a.1 - 1.0).abs() < 1e-15));

        // h + h'' coefficientwise; 1 + 0.2cos 3θ itself is not a convex body
        let h = TrigPoly::new(vec![1.0, 0.0, 0.0, 0.2], vec![]);
        assert!(h.curvature_density().max_coeff_diff(&TrigPoly::new(vec![1.0, 0.0, 0.0, -1.6], vec![])) < 1e-15);
        assert!(PlanarBody::support(h).is_err());

        let h = TrigPoly::new(vec![1.0, 0.0, 0.0, 0.1], vec![]);
        let rho = PlanarBody::support(h.clone()).unwrap().area_measure().density;
        assert!(rho.max_coeff_diff(&TrigPoly::new(vec![1.0, 0.0, 0.0, -0.8], vec![])) < 1e-15);
        // finite-difference check of h + h''
        let eps = 1e-4;
        for &t in &[0.2, 1.0, 2.5] {
            let fd = h.eval(t) + (h.eval(t + eps) - 2.0 * h.eval(t) + h.eval(t - eps)) / (eps * eps);
            assert!((fd - rho.eval(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn area_measure_centroid_and_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = random_polygon(&mut rng, 9);
            let m = p.area_measure();
            let (c, s) = m.centroid();
            assert!(c.abs() < 1e-12 && s.abs() < 1e-12);
            let v = p.vertices().unwrap();
            let per: f64 = edges(&v).iter().map(|e| e.norm()).sum();
            assert!((m.total_mass() - per).abs() < 1e-12);

            let b = random_smooth_body(&mut rng, 8, 0.8);
            let (c, s) = b.area_measure().centroid();
            assert!(c.abs() < 1e-12 && s.abs() < 1e-12);
        }
    }

    #[test]
    fn atom_integration_is_a_finite_sum() {
        let s = square().area_measure();
        let g = TrigPoly::cos_mode(2, 1.0);
        assert!(s.integrate(&g).abs() < 1e-14);
        let sum: f64 = s.atoms.iter().map(|&(t, m)| m * g.eval(t)).sum();
        assert_eq!(s.integrate(&g), sum);
    }

    #[test]
    fn mixed_volume_examples() {
        assert!((mixed_volume(&square(), &square()) - 1.0).abs() < 1e-15);
        // oracle: quadratic through vol(square + ε·disc) at ε = 0, ½, 1
        let vol = |e: f64| polygon_plus_disc_area_scaled(&square().vertices().unwrap(), e);
        let (v0, vh, v1) = (vol(0.0), vol(0.5), vol(1.0));
        // vol = v0 + 2Vε + cε²
        let two_v = 4.0 * vh - 3.0 * v0 - v1;
        assert!((two_v / 2.0 - 2.0).abs() < 1e-6);
        assert!((mixed_volume(&square(), &PlanarBody::disc(1.0)) - 2.0).abs() < 1e-15);

        let hex = PlanarBody::regular_polygon(6, 1.0, 0.3);
        assert!((mixed_volume(&hex, &hex.reflect()) - hex.area()).abs() < 1e-12);
    }

    fn polygon_plus_disc_area_scaled(v: &[Vector2<f64>], e: f64) -> f64 {
        let m = 20000;
        let mut pts = Vec::new();
        for p in v {
            for j in 0..m {
                let t = TAU * j as f64 / m as f64;
                pts.push(p + e * Vector2::new(t.cos(), t.sin()));
            }
        }
        polygon_area(&convex_hull_2d(&pts))
    }

    #[test]
    fn mixed_volume_is_symmetric_and_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_smooth_body(&mut rng, 10, 0.8);
            let b = random_smooth_body(&mut rng, 10, 0.8);
            let p = random_polygon(&mut rng, 7);
            assert!((mixed_volume(&a, &b) - mixed_volume(&b, &a)).abs() < 1e-10);
            assert!((mixed_volume(&a, &p) - mixed_volume(&p, &a)).abs() < 1e-10);
            assert!((mixed_volume(&a, &a) - a.area()).abs() < 1e-12);
            assert!((mixed_volume(&p, &p) - p.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn steiner_polynomial_is_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_smooth_body(&mut rng, 12, 0.8);
            let b = random_smooth_body(&mut rng, 12, 0.8);
            let f = |e: f64| a.minkowski_sum(&b.scaled(e), DEFAULT_GRID).area();
            // cubic through 4 nodes: leading coefficient is the third
            // divided difference / 1
            let ys: Vec<f64> = (0..4).map(|i| f(i as f64 * 0.5)).collect();
            let d3 = (ys[3] - 3.0 * ys[2] + 3.0 * ys[1] - ys[0]) / (6.0 * 0.125);
            assert!(d3.abs() < 1e-9, "cubic coefficient {d3}");
        }
    }

    #[test]
    fn steiner_fit_agrees_with_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let a = random_smooth_body(&mut rng, 10, 0.8);
            let b = random_smooth_body(&mut rng, 10, 0.8);
            let fit = mixed_volume_by_fit(&a, &b, DEFAULT_GRID).unwrap();
            assert!((fit - mixed_volume(&a, &b)).abs() < 1e-12);
            let p = random_polygon(&mut rng, 6);
            let q = random_polygon(&mut rng, 5);
            let fit = mixed_volume_by_fit(&p, &q, DEFAULT_GRID).unwrap();
            assert!((fit - mixed_volume(&p, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_volume_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_smooth_body(&mut rng, 8, 0.8);
            let a2 = random_smooth_body(&mut rng, 8, 0.8);
            let b = random_polygon(&mut rng, 6);
            let lhs = mixed_volume(&a.minkowski_sum(&a2, DEFAULT_GRID), &b);
            let rhs = mixed_volume(&a, &b) + mixed_volume(&a2, &b);
            assert!((lhs - rhs).abs() < 1e-10);
            let p = random_polygon(&mut rng, 5);
            let q = random_polygon(&mut rng, 8);
            let lhs = mixed_volume(&p.minkowski_sum(&q, DEFAULT_GRID), &a);
            let rhs = mixed_volume(&p, &a) + mixed_volume(&q, &a);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_along_kernel_segment_is_projection_length() {
        // projection onto the x-axis, kernel the y-axis, B the unit vertical segment
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = PlanarBody::segment(Vector2::zeros(), Vector2::new(0.0, 1.0)).unwrap();
        for _ in 0..10 {
            let a = random_polygon(&mut rng, 8);
            let f = |e: f64| a.minkowski_sum(&b.scaled(e), DEFAULT_GRID).area();
            let (y0, y1, y2) = (f(0.0), f(0.5), f(1.0));
            let slope = (4.0 * y1 - 3.0 * y0 - y2) / 1.0;
            assert!((slope - a.width(Vector2::new(1.0, 0.0))).abs() < 1e-8);
        }
    }

    #[test]
    fn transforms() {
        let d = PlanarBody::disc(1.0);
        assert_eq!(d.rotate(0.7).support_poly(), d.support_poly());

        let h = TrigPoly::new(vec![1.0, 0.3, 0.05, 0.02], vec![0.1, -0.04, 0.01]);
        let b = PlanarBody::support(h.clone()).unwrap();
        let r = b.reflect();
        assert!(r.support_poly().unwrap().max_coeff_diff(&h.shift(PI)) < 1e-15);

        let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let s = square().translated(Vector2::new(-0.5, -0.5));
        let js = s.transform(&j, DEFAULT_GRID).unwrap();
        assert_eq!(js.vertices().unwrap().len(), 4);
        for p in js.vertices().unwrap() {
            assert!((p.x.abs() - 0.5).abs() < 1e-15 && (p.y.abs() - 0.5).abs() < 1e-15);
        }

        // reflection across the x-axis on a smooth body
        let refl = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let rb = b.transform(&refl, DEFAULT_GRID).unwrap();
        for &t in &[0.3, 1.4, 4.0] {
            assert!((rb.support_at(t) - b.support_at(-t)).abs() < 1e-14);
        }
        // general orthogonal with det −1
        let (sa, ca) = 0.8_f64.sin_cos();
        let g = Matrix2::new(ca, sa, sa, -ca);
        let gb = b.transform(&g, DEFAULT_GRID).unwrap();
        for &t in &[0.1_f64, 2.0, 5.5] {
            let w = g.transpose() * Vector2::new(t.cos(), t.sin());
            assert!((gb.support_at(t) - b.support_at(f64::atan2(w.y, w.x))).abs() < 1e-14);
        }

        assert!(matches!(
            square().transform(&Matrix2::new(1.0, 2.0, 2.0, 4.0), DEFAULT_GRID),
            Err(Error::SingularMap(_))
        ));
    }

    #[test]
    fn shear_of_smooth_body_is_flagged() {
        let b = PlanarBody::disc(1.0);
        let g = Matrix2::new(2.0, 0.0, 0.0, 1.0);
        let e = b.transform(&g, DEFAULT_GRID).unwrap();
        assert!(e.is_approximate());
        // ellipse with semi-axes 2, 1: area 2π, up to band truncation
        assert!((e.area() - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn polygon_validation() {
        let v = vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(1.0, 1.0), Vector2::new(0.0, 1.0)];
        assert!(PlanarBody::polygon(v.clone()).is_ok());
        let mut cw = v.clone();
        cw.reverse();
        assert!(PlanarBody::polygon(cw).is_err());
        let collinear = vec![Vector2::new(0.0, 0.0), Vector2::new(0.5, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
        assert!(PlanarBody::polygon(collinear).is_err());
        assert!(PlanarBody::polygon(vec![Vector2::zeros(), Vector2::zeros()]).is_err());
        let bad = TrigPoly::new(vec![1.0, 0.0, 0.5], vec![]);
        assert!(matches!(PlanarBody::support(bad), Err(Error::NotConvex(_))));
    }

    #[test]
    fn clipping() {
        let sq = square().vertices().unwrap();
        let shifted: Vec<_> = sq.iter().map(|p| p + Vector2::new(0.5, 0.25)).collect();
        let c = clip_convex(&sq, &shifted);
        assert!((polygon_area(&convex_hull_2d(&c)) - 0.375).abs() < 1e-15);
        let far: Vec<_> = sq.iter().map(|p| p + Vector2::new(3.0, 0.0)).collect();
        assert!(clip_convex(&sq, &far).is_empty());
    }

    #[test]
    fn polygon_support_coefficients_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_polygon(&mut rng, 6);
        let c = p.support_coefficients(40);
        // compare against a fine DFT of the exact support function
        let fit = TrigPoly::from_samples(&p.support_samples(1 << 16), 40);
        assert!(c.max_coeff_diff(&fit) < 1e-8);
        // mean of h is perimeter / 2π
        assert!((c.a(0) * TAU - p.perimeter()).abs() < 1e-12);
    }
}
