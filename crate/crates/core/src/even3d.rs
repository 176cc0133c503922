//! Even valuations on R³ through their Klain functions.
//!
//! Lines and planes in R³ are both parametrized by a unit vector `u` (the
//! direction of the line, the normal of the plane), so a Klain function is
//! an antipodally even function on the sphere, sampled on a subdivided
//! icosahedron. Intrinsic volumes are normalized so that `V_k` of a unit
//! k-cube is 1; with this normalization the even Fourier transform sends a
//! Klain function on lines to the same sphere function read on planes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DVector, Matrix3, UnitQuaternion, Vector3, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::body3::{Body3, UNIT_BALL};
use crate::error::{Error, Result};
use crate::hull3::Hull3;
use crate::polytope::Polytope;
use crate::quadrature::fit_polynomial;

/// Icosphere on the unit sphere, closed under `u ↦ −u`.
#[derive(Debug)]
pub struct SphereGrid {
    pub level: usize,
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    /// `vertices[antipode[i]] == −vertices[i]` exactly.
    pub antipode: Vec<usize>,
    vertex_faces: Vec<Vec<usize>>,
}

fn bits(v: &Vector3<f64>) -> [u64; 3] {
    // +0.0 and −0.0 share a key
    [v.x + 0.0, v.y + 0.0, v.z + 0.0].map(f64::to_bits)
}

impl SphereGrid {
    pub fn icosphere(level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vector3<f64>> = [
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
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
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
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, vs: &mut Vec<Vector3<f64>>| -> usize {
                *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vs.push(((vs[a] + vs[b]) * 0.5).normalize());
                    vs.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let index: HashMap<[u64; 3], usize> = vertices.iter().enumerate().map(|(i, v)| (bits(v), i)).collect();
        let antipode = vertices
            .iter()
            .map(|v| index[&bits(&-v)])
            .collect();
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        Self {
            level,
            vertices,
            faces,
            antipode,
            vertex_faces,
        }
    }

    /// Shared level-4 grid (2562 vertices).
    pub fn ico4() -> &'static SphereGrid {
        static GRID: OnceLock<SphereGrid> = OnceLock::new();
        GRID.get_or_init(|| SphereGrid::icosphere(4))
    }

    fn barycentric(&self, fi: usize, u: &Vector3<f64>) -> Option<[f64; 3]> {
        let [a, b, c] = self.faces[fi];
        let m = Matrix3::from_columns(&[self.vertices[a], self.vertices[b], self.vertices[c]]);
        let w = m.lu().solve(u)?;
        if w.iter().all(|&x| x >= -1e-12) {
            let s = w.sum();
            Some([w.x / s, w.y / s, w.z / s])
        } else {
            None
        }
    }

    /// Face containing the ray through `u` and normalized barycentric weights.
    pub fn locate(&self, u: &Vector3<f64>) -> (usize, [f64; 3]) {
        let u = u.normalize();
        let nearest = (0..self.vertices.len())
            .max_by(|&i, &j| self.vertices[i].dot(&u).total_cmp(&self.vertices[j].dot(&u)))
            .expect("nonempty grid");
        self.vertex_faces[nearest]
            .iter()
            .copied()
            .chain(0..self.faces.len())
            .find_map(|fi| self.barycentric(fi, &u).map(|w| (fi, w)))
            .expect("every direction lies in some face")
    }

    pub fn interpolate(&self, values: &[f64], u: &Vector3<f64>) -> f64 {
        let (fi, w) = self.locate(u);
        let f = self.faces[fi];
        w[0] * values[f[0]] + w[1] * values[f[1]] + w[2] * values[f[2]]
    }
}

/// Lines or planes in R³.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Grassmannian {
    Lines,
    Planes,
}

impl Grassmannian {
    pub fn dim(self) -> usize {
        match self {
            Grassmannian::Lines => 1,
            Grassmannian::Planes => 2,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            Grassmannian::Lines => Grassmannian::Planes,
            Grassmannian::Planes => Grassmannian::Lines,
        }
    }
}

impl TryFrom<u8> for Grassmannian {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Grassmannian::Lines),
            2 => Ok(Grassmannian::Planes),
            _ => Err(format!("Grassmannian index must be 1 or 2, got {v}")),
        }
    }
}

impl From<Grassmannian> for u8 {
    fn from(g: Grassmannian) -> u8 {
        g.dim() as u8
    }
}

/// Sampled Klain function on the level-4 icosphere.
#[derive(Clone, Debug, PartialEq)]
pub struct KlainFunction {
    gr: Grassmannian,
    values: Vec<f64>,
}

impl KlainFunction {
    /// Samples `f` once per antipodal pair.
    pub fn sample<F>(gr: Grassmannian, mut f: F) -> Result<Self>
    where
        F: FnMut(&Vector3<f64>) -> Result<f64>,
    {
        let grid = SphereGrid::ico4();
        let mut values = vec![0.0; grid.vertices.len()];
        for i in 0..values.len() {
            let j = grid.antipode[i];
            if j < i {
                values[i] = values[j];
            } else {
                values[i] = f(&grid.vertices[i])?;
            }
        }
        Ok(Self { gr, values })
    }

    pub fn from_values(gr: Grassmannian, values: Vec<f64>) -> Result<Self> {
        let grid = SphereGrid::ico4();
        if values.len() != grid.vertices.len() {
            return Err(Error::Format(format!(
                "expected {} samples, got {}",
                grid.vertices.len(),
                values.len()
            )));
        }
        if (0..values.len()).any(|i| values[i] != values[grid.antipode[i]]) {
            return Err(Error::Format("Klain samples are not antipodally even".into()));
        }
        Ok(Self { gr, values })
    }

    pub fn grassmannian(&self) -> Grassmannian {
        self.gr
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Barycentric interpolation at the subspace parametrized by `u`.
    pub fn at(&self, u: &Vector3<f64>) -> f64 {
        SphereGrid::ico4().interpolate(&self.values, u)
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        self.values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(x, y, z, value)` rows for plotting.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        SphereGrid::ico4()
            .vertices
            .iter()
            .zip(&self.values)
            .map(|(v, &k)| [v.x, v.y, v.z, k])
            .collect()
    }
}

/// Serialized Klain function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlainJson {
    pub gr: Grassmannian,
    pub grid: String,
    pub values: Vec<f64>,
}

impl From<&KlainFunction> for KlainJson {
    fn from(k: &KlainFunction) -> Self {
        Self {
            gr: k.gr,
            grid: "ico4".into(),
            values: k.values.clone(),
        }
    }
}

impl KlainJson {
    pub fn into_klain(self) -> Result<KlainFunction> {
        if self.grid != "ico4" {
            return Err(Error::Format(format!("unknown sphere grid {:?}", self.grid)));
        }
        KlainFunction::from_values(self.gr, self.values)
    }
}

pub type Evaluator3 = Arc<dyn Fn(&Body3) -> Result<f64> + Send + Sync>;

/// Even part of `K ↦ V(K, A, A)` for a polytope or ball `A`:
/// `(1/6) Σ_F (h_K(n_F) + h_K(−n_F))·area(F)` over the facets of `A` (a
/// flat `A` has two facets), plus `ρ²·V(K, B, B)` for a ball of radius `ρ`.
/// It agrees with `V(K, A, A)` for centrally symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Brightness {
    body: Body3,
    facets: Arc<Vec<(Vector3<f64>, f64)>>,
    ball: f64,
}

impl Brightness {
    pub fn new(a: Body3) -> Result<Self> {
        let hull = a.core().hull3();
        if !a.is_polytope() && !matches!(hull, Hull3::Point(_)) {
            return Err(Error::UnsupportedBody("brightness needs a polytope or a ball".into()));
        }
        let facets = match hull {
            Hull3::Solid(m) => m
                .faces
                .iter()
                .map(|f| {
                    let n = m.face_area_vector(f);
                    (n.normalize(), n.norm())
                })
                .collect(),
            Hull3::Planar { vertices, normal } => {
                let area = planar_area(&vertices, &normal);
                vec![(normal, area), (-normal, area)]
            }
            _ => Vec::new(),
        };
        Ok(Self {
            ball: a.radius(),
            body: a,
            facets: Arc::new(facets),
        })
    }

    pub fn body(&self) -> &Body3 {
        &self.body
    }

    pub fn evaluate(&self, k: &Body3) -> f64 {
        let faces: f64 = self
            .facets
            .iter()
            .map(|(u, area)| (k.support(u) + k.support(&-u)) * area)
            .sum();
        // vol(K + εB) = … + 3V(K, B, B)·ε² + …
        faces / 6.0 + self.ball * self.ball * k.steiner()[2] / 3.0
    }

    pub fn rotated(&self, g: &Matrix3<f64>) -> Result<Self> {
        Ok(Self {
            body: self.body.rotated(g)?,
            facets: Arc::new(self.facets.iter().map(|(u, a)| (g * u, *a)).collect()),
            ball: self.ball,
        })
    }
}

pub fn mixed_brightness(k: &Body3, a: &Body3) -> Result<f64> {
    Ok(Brightness::new(a.clone())?.evaluate(k))
}

/// Even valuation on R³.
#[derive(Clone)]
pub enum EvenValuation3 {
    /// `Σ α_k V_k`.
    Intrinsic([f64; 4]),
    Brightness(Brightness),
    BlackBox { degree: usize, eval: Evaluator3 },
}

impl fmt::Debug for EvenValuation3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvenValuation3::Intrinsic(a) => f.debug_tuple("Intrinsic").field(a).finish(),
            EvenValuation3::Brightness(a) => f.debug_tuple("Brightness").field(a.body()).finish(),
            EvenValuation3::BlackBox { degree, .. } => {
                f.debug_struct("BlackBox").field("degree", degree).finish_non_exhaustive()
            }
        }
    }
}

fn planar_area(vertices: &[Vector3<f64>], normal: &Vector3<f64>) -> f64 {
    (1..vertices.len().saturating_sub(1))
        .map(|i| 0.5 * (vertices[i] - vertices[0]).cross(&(vertices[i + 1] - vertices[0])).dot(normal))
        .sum::<f64>()
        .abs()
}

impl EvenValuation3 {
    pub fn black_box<F>(degree: usize, f: F) -> Self
    where
        F: Fn(&Body3) -> Result<f64> + Send + Sync + 'static,
    {
        EvenValuation3::BlackBox {
            degree,
            eval: Arc::new(f),
        }
    }

    pub fn brightness(a: Body3) -> Result<Self> {
        Ok(EvenValuation3::Brightness(Brightness::new(a)?))
    }

    pub fn intrinsic_volume_k(k: usize) -> Self {
        let mut a = [0.0; 4];
        a[k] = 1.0;
        EvenValuation3::Intrinsic(a)
    }

    pub fn evaluate(&self, k: &Body3) -> Result<f64> {
        match self {
            EvenValuation3::Intrinsic(a) => Ok(a.iter().zip(k.intrinsic_volumes()).map(|(x, y)| x * y).sum()),
            EvenValuation3::Brightness(a) => Ok(a.evaluate(k)),
            EvenValuation3::BlackBox { eval, .. } => eval(k),
        }
    }

    /// Degree of homogeneity, if the valuation is homogeneous.
    pub fn degree(&self) -> Option<usize> {
        match self {
            EvenValuation3::Intrinsic(a) => {
                let nz: Vec<usize> = (0..4).filter(|&i| a[i] != 0.0).collect();
                match nz.as_slice() {
                    [k] => Some(*k),
                    _ => None,
                }
            }
            EvenValuation3::Brightness(_) => Some(1),
            EvenValuation3::BlackBox { degree, .. } => Some(*degree),
        }
    }

    /// `(gφ)(K) = φ(g⁻¹K)` for a rotation `g`.
    pub fn rotated(&self, g: &Matrix3<f64>) -> Result<Self> {
        Ok(match self {
            EvenValuation3::Intrinsic(_) => self.clone(),
            EvenValuation3::Brightness(a) => EvenValuation3::Brightness(a.rotated(g)?),
            EvenValuation3::BlackBox { degree, eval } => {
                let (eval, ginv) = (eval.clone(), g.transpose());
                EvenValuation3::black_box(*degree, move |k| eval(&k.rotated(&ginv)?))
            }
        })
    }

    /// `max |φ(−K) − φ(K)|` over the probes, relative to `max(1, |φ(K)|)`.
    pub fn evenness_residual(&self, probes: &[Body3]) -> Result<f64> {
        let mut r: f64 = 0.0;
        for k in probes {
            let (a, b) = (self.evaluate(k)?, self.evaluate(&k.reflect())?);
            r = r.max((a - b).abs() / 1f64.max(a.abs()));
        }
        Ok(r)
    }
}

/// Orthonormal basis of `u^⊥`.
pub fn plane_basis(u: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let u = u.normalize();
    let helper = if u.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - u * u.dot(&helper)).normalize();
    (e1, u.cross(&e1))
}

/// Unit square in `u^⊥`, turned by `angle` inside the plane and moved by `offset`.
pub fn unit_square_in_plane(u: &Vector3<f64>, angle: f64, offset: &Vector3<f64>) -> Body3 {
    let (b1, b2) = plane_basis(u);
    let (e1, e2) = (b1 * angle.cos() + b2 * angle.sin(), -b1 * angle.sin() + b2 * angle.cos());
    let pts = [Vector3::zeros(), e1, e2, e1 + e2]
        .iter()
        .map(|p| DVector::from_column_slice((p + offset).as_slice()))
        .collect();
    Body3::polytope(Polytope::new(3, pts).expect("square")).expect("square")
}

/// Klain function of a homogeneous even valuation of degree 1 (lines) or 2
/// (planes): its value on the unit segment along `u`, resp. on a unit
/// square in `u^⊥`.
pub fn klain_function(phi: &EvenValuation3, gr: Grassmannian) -> Result<KlainFunction> {
    if phi.degree() != Some(gr.dim()) {
        return Err(Error::Degree(format!(
            "Klain function on {}-dimensional subspaces needs degree {}, got {:?}",
            gr.dim(),
            gr.dim(),
            phi.degree()
        )));
    }
    KlainFunction::sample(gr, |u| phi.evaluate(&klain_probe(gr, u)))
}

fn klain_probe(gr: Grassmannian, u: &Vector3<f64>) -> Body3 {
    match gr {
        Grassmannian::Lines => Body3::segment(u),
        Grassmannian::Planes => unit_square_in_plane(u, 0.0, &Vector3::zeros()),
    }
}

/// Spread of a degree-2 valuation over three differently placed unit
/// squares in `u^⊥`.
pub fn square_choice_spread(phi: &EvenValuation3, u: &Vector3<f64>) -> Result<f64> {
    let vals = [
        (0.0, Vector3::zeros()),
        (0.7, Vector3::new(0.3, -0.2, 0.5)),
        (1.9, Vector3::new(-1.0, 0.4, 0.1)),
    ]
    .iter()
    .map(|(a, t)| phi.evaluate(&unit_square_in_plane(u, *a, t)))
    .collect::<Result<Vec<f64>>>()?;
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

/// Even Fourier transform: the Klain function of `Fφ` at a subspace is the
/// Klain function of `φ` at its orthogonal complement, which carries the
/// same parameter `u`.
pub fn fourier_even(k: &KlainFunction) -> KlainFunction {
    KlainFunction {
        gr: k.gr.complement(),
        values: k.values.clone(),
    }
}

fn fit_step(k: &Body3) -> f64 {
    let r = k.inradius_proxy();
    if r > 0.1 {
        0.1 * r
    } else {
        0.01
    }
}

/// `V_k(K)` from a cubic fit of `ε ↦ vol(K + εB)`.
pub fn intrinsic_volume(k: usize, body: &Body3) -> Result<f64> {
    if k > 3 {
        return Err(Error::Degree(format!("intrinsic volumes in R^3 have index ≤ 3, got {k}")));
    }
    let c = fit_polynomial(
        |e| Ok(body.parallel(e)?.volume()),
        3,
        fit_step(body),
        "Steiner polynomial",
    )?;
    Ok(c[3 - k] / UNIT_BALL[3 - k])
}

/// `m`-th derivative at 0 of `ε ↦ φ(K + εB)` for `φ` of degree `d`.
fn lambda_power(phi: &EvenValuation3, d: usize, m: usize, k: &Body3) -> Result<f64> {
    if m > d {
        return Ok(0.0);
    }
    let c = fit_polynomial(
        |e| phi.evaluate(&k.parallel(e)?),
        d.max(1),
        fit_step(k),
        "parallel-body polynomial",
    )?;
    Ok(c[m] * (1..=m).product::<usize>() as f64)
}

/// Fitted constants `ΛV_k = c_k·V_{k−1}`, `k = 1, 2, 3`.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaConstants {
    pub c: [f64; 3],
    /// Largest relative deviation of the per-body ratios from `c`.
    pub spread: f64,
}

/// Fit bodies for the Λ constants: cube, ball, thickened box.
pub fn lambda_fit_bodies() -> Vec<Body3> {
    vec![
        Body3::cube(1.0),
        Body3::ball(1.0).expect("ball"),
        Body3::new(Polytope::axis_box(&[1.0, 0.6, 0.8]), 0.2).expect("thickened box"),
    ]
}

pub fn lambda_constants() -> Result<LambdaConstants> {
    let bodies = lambda_fit_bodies();
    let mut c = [0.0; 3];
    let mut spread: f64 = 0.0;
    for k in 1..=3 {
        let phi = EvenValuation3::intrinsic_volume_k(k);
        let ratios = bodies
            .iter()
            .map(|b| Ok(lambda_power(&phi, k, 1, b)? / intrinsic_volume(k - 1, b)?))
            .collect::<Result<Vec<f64>>>()?;
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            spread = spread.max((r - mean).abs() / mean.abs().max(1e-300));
        }
        c[k - 1] = mean;
    }
    Ok(LambdaConstants { c, spread })
}

/// Spread above which fitted Λ constants are rejected.
pub const LAMBDA_SPREAD_TOL: f64 = 1e-6;

/// `(Λφ)(K) = d/dε φ(K + εB)` at `ε = 0`.
pub fn lambda_numeric(phi: &EvenValuation3) -> Result<EvenValuation3> {
    match phi {
        EvenValuation3::Intrinsic(a) => {
            let lc = lambda_constants()?;
            if lc.spread > LAMBDA_SPREAD_TOL {
                return Err(Error::FitResidual {
                    residual: lc.spread,
                    threshold: LAMBDA_SPREAD_TOL,
                    context: "Λ constants disagree across bodies".into(),
                });
            }
            let mut b = [0.0; 4];
            for k in 1..=3 {
                b[k - 1] = a[k] * lc.c[k - 1];
            }
            Ok(EvenValuation3::Intrinsic(b))
        }
        _ => {
            let d = phi.degree().ok_or_else(|| Error::Degree("Λ of an inhomogeneous black box".into()))?;
            if d == 0 {
                return Ok(EvenValuation3::Intrinsic([0.0; 4]));
            }
            let inner = phi.clone();
            Ok(EvenValuation3::black_box(d - 1, move |k| lambda_power(&inner, d, 1, k)))
        }
    }
}

/// Hard-Lefschetz data on the span of the intrinsic volumes.
#[derive(Clone, Debug, Serialize)]
pub struct LefschetzReport3 {
    pub lambda: LambdaConstants,
    pub lambda_positive: bool,
    /// `(i, r)` with `Λ^{2i−3} V_i = r·V_{3−i}`, fitted directly.
    pub lambda_powers: Vec<(usize, f64)>,
    /// Normalization making `V₁·χ = V₁`.
    pub kappa: f64,
    /// `V₁·V_k = a_k·V_{k+1}` for `k = 0, 1, 2`.
    pub action: [f64; 3],
    /// Gap between two single steps and one fitted double step.
    pub association_residual: f64,
    /// `(i, r)` with `V₁^{3−2i}·V_i = r·V_{3−i}`.
    pub v1_powers: Vec<(usize, f64)>,
}

impl LefschetzReport3 {
    pub fn lefschetz_nonzero(&self) -> bool {
        self.lambda_powers.iter().chain(&self.v1_powers).all(|(_, r)| r.abs() > 1e-9)
    }
}

/// Λ constants, iterated Λ on `V₂, V₃`, and the `V₁`-action
/// `V₁·φ := κ·F⁻¹ΛFφ` on the intrinsic volumes with `F V_k = V_{3−k}`.
pub fn lefschetz_invariant_check() -> Result<LefschetzReport3> {
    let lambda = lambda_constants()?;
    let c = lambda.c;
    let probe = Body3::new(Polytope::axis_box(&[1.2, 0.7, 0.9]), 0.15)?;
    let mut lambda_powers = Vec::new();
    for i in [2, 3] {
        let m = 2 * i - 3;
        let v = lambda_power(&EvenValuation3::intrinsic_volume_k(i), i, m, &probe)?;
        lambda_powers.push((i, v / intrinsic_volume(3 - i, &probe)?));
    }
    // F⁻¹ΛF V_k = F⁻¹(c_{3−k} V_{2−k}) = c_{3−k} V_{k+1}
    let kappa = 1.0 / c[2];
    let action = [kappa * c[2], kappa * c[1], kappa * c[0]];
    // two steps V_k → V_{k+2} against κ²·F⁻¹Λ²F fitted as a second derivative
    let mut association_residual: f64 = 0.0;
    for k in 0..2 {
        let j = 3 - k;
        let direct = lambda_power(&EvenValuation3::intrinsic_volume_k(j), j, 2, &probe)? / intrinsic_volume(j - 2, &probe)?;
        let two = action[k] * action[k + 1];
        association_residual = association_residual.max((kappa * kappa * direct - two).abs() / two.abs());
    }
    let v1_powers = vec![(0, action[0] * action[1] * action[2]), (1, action[1])];
    Ok(LefschetzReport3 {
        lambda_positive: c.iter().all(|&x| x > 0.0),
        lambda,
        lambda_powers,
        kappa,
        action,
        association_residual,
        v1_powers,
    })
}

/// `(1/3)·area(A | u^⊥)` read off a cubic fit of `ε ↦ vol(seg_u + εA)`.
pub fn brightness_by_fit(a: &Body3, u: &Vector3<f64>) -> Result<f64> {
    let seg = Body3::segment(&u.normalize());
    let c = fit_polynomial(
        |e| Ok(seg.minkowski_sum(&a.scaled(e))?.volume()),
        3,
        0.5,
        "segment plus scaled body",
    )?;
    Ok(c[2] / 3.0)
}

/// Zonotope `Z = Σ_F (area_F/4)·[−n_F, n_F]` over the facets of `A` (both
/// sides for flat `A`), whose mixed volume `V(K, K, Z)` has the brightness
/// function of `A` as its Klain function on planes.
pub fn projection_zonotope(a: &Body3) -> Result<Body3> {
    if !a.is_polytope() {
        return Err(Error::UnsupportedBody("projection zonotope of a polytope only".into()));
    }
    let facets: Vec<Vector3<f64>> = match a.core().hull3() {
        Hull3::Solid(m) => m.faces.iter().map(|f| m.face_area_vector(f)).collect(),
        Hull3::Planar { vertices, normal } => {
            let area = planar_area(&vertices, &normal);
            vec![normal * area, -normal * area]
        }
        _ => Vec::new(),
    };
    // merge parallel generators
    let mut gens: Vec<Vector3<f64>> = Vec::new();
    for v in facets {
        let g = v / 4.0;
        let n = g.norm();
        if n == 0.0 {
            continue;
        }
        match gens.iter_mut().find(|h| h.normalize().cross(&(g / n)).norm() < 1e-9) {
            Some(h) => {
                let s = if h.dot(&g) >= 0.0 { 1.0 } else { -1.0 };
                *h += g * s;
            }
            None => gens.push(g),
        }
    }
    let mut z = Polytope::point(&[0.0; 3]);
    for g in gens {
        let seg = Polytope::new(
            3,
            vec![
                DVector::from_column_slice((-g).as_slice()),
                DVector::from_column_slice(g.as_slice()),
            ],
        )?;
        z = z.minkowski_sum(&seg)?;
    }
    Body3::polytope(z)
}

/// `K ↦ V(K, K, Z)`, read off a cubic fit of `ε ↦ vol(K + εZ)`.
pub fn mixed_area_valuation(z: Body3) -> EvenValuation3 {
    EvenValuation3::black_box(2, move |k| {
        let c = fit_polynomial(
            |e| Ok(k.minkowski_sum(&z.scaled(e))?.volume()),
            3,
            0.5,
            "body plus scaled zonotope",
        )?;
        Ok(c[1] / 3.0)
    })
}

/// Uniformly random rotation.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let q = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::from_quaternion(nalgebra::Quaternion::from(q / n))
                .to_rotation_matrix()
                .into_inner();
        }
    }
}

/// Uniformly random unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Relative gap between the sampled line Klain function of `φ` and the
/// pullback of `φ` to random planes, evaluated on unit segments of the plane.
pub fn restriction_residual<R: Rng + ?Sized>(phi: &EvenValuation3, count: usize, rng: &mut R) -> Result<f64> {
    let kl = klain_function(phi, Grassmannian::Lines)?;
    let scale = kl.max_abs().max(1e-300);
    let mut r: f64 = 0.0;
    for _ in 0..count {
        let g = random_rotation(rng);
        let emb = nalgebra::DMatrix::from_column_slice(3, 2, &g.as_slice()[..6]);
        let t = rng.gen_range(0.0..2.0 * PI);
        let seg2 = Polytope::from_rows(2, &[vec![0.0, 0.0], vec![t.cos(), t.sin()]])?;
        let pulled = phi.evaluate(&Body3::polytope(seg2.map(&emb)?)?)?;
        let u = g.column(0) * t.cos() + g.column(1) * t.sin();
        r = r.max((pulled - kl.at(&u)).abs() / scale);
    }
    Ok(r)
}

/// Relative gap `|Kl_{gφ}(u) − Kl_φ(g⁻¹u)|` over random rotations `g`,
/// with `u` a random grid direction so that only the right side is
/// interpolated.
pub fn equivariance_residual<R: Rng + ?Sized>(phi: &EvenValuation3, count: usize, rng: &mut R) -> Result<f64> {
    let gr = match phi.degree() {
        Some(1) => Grassmannian::Lines,
        Some(2) => Grassmannian::Planes,
        d => return Err(Error::Degree(format!("Klain functions need degree 1 or 2, got {d:?}"))),
    };
    let kl = klain_function(phi, gr)?;
    let grid = SphereGrid::ico4();
    let scale = kl.max_abs().max(1e-300);
    let mut r: f64 = 0.0;
    for _ in 0..count {
        let g = random_rotation(rng);
        let moved = phi.rotated(&g)?;
        for _ in 0..4 {
            let u = grid.vertices[rng.gen_range(0..grid.vertices.len())];
            let direct = moved.evaluate(&klain_probe(gr, &u))?;
            r = r.max((direct - kl.at(&(g.transpose() * u))).abs() / scale);
        }
    }
    Ok(r)
}

/// Relative gap between `F` of the brightness Klain function of `A` and the
/// plane Klain function of `V(•, •, Z)`, compared at random grid directions.
pub fn fourier_brightness_residual<R: Rng + ?Sized>(a: &Body3, count: usize, rng: &mut R) -> Result<f64> {
    let kl = fourier_even(&klain_function(&EvenValuation3::brightness(a.clone())?, Grassmannian::Lines)?);
    let candidate = mixed_area_valuation(projection_zonotope(a)?);
    let grid = SphereGrid::ico4();
    let scale = kl.max_abs().max(1e-300);
    let mut r: f64 = 0.0;
    for _ in 0..count {
        let i = rng.gen_range(0..grid.vertices.len());
        let direct = candidate.evaluate(&klain_probe(Grassmannian::Planes, &grid.vertices[i]))?;
        r = r.max((direct - kl.values()[i]).abs() / scale);
    }
    Ok(r)
}

/// Polytope with `n` random vertices on the sphere of radius `r`.
pub fn random_round_polytope<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Body3 {
    let pts = (0..n)
        .map(|_| DVector::from_column_slice((random_direction(rng) * r).as_slice()))
        .collect();
    Body3::polytope(Polytope::new(3, pts).expect("points")).expect("polytope")
}
