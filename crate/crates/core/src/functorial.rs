//! Pullback and pushforward of valuations along linear maps, exterior
//! products, and base change over Cartesian squares.
//!
//! Density lines are trivialized by the Euclidean structure, so every
//! twist becomes a scalar: pushforward along a surjection `p` carries the
//! Jacobian `√det(ppᵀ)`, along an injection `j` the Jacobian `√det(jᵀj)`,
//! and a Cartesian square carries the factor from [`CartesianSquare::density_factor`].
//! With these conventions `p_* vol(• + A) = vol(• + p(A))` for surjections.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Vector2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linmap::LinearMapSpec;
use crate::planar::{clip_convex, convex_hull_2d, mixed_volume, random_polygon, PlanarBody};
use crate::polytope::{random_polytope, Body, Polytope};
use crate::quadrature::{fit_polynomial, merged_breaks, piecewise_gauss};
use crate::val1::Valuation1;
use crate::val2::Valuation2;

/// A translation-invariant valuation that can be evaluated on bodies.
pub trait Valuation: Send + Sync {
    fn dim(&self) -> usize;

    /// Upper bound on the degree of homogeneous components.
    fn degree_bound(&self) -> usize {
        self.dim()
    }

    fn evaluate(&self, k: &Body) -> Result<f64>;
}

fn check_dim(expected: usize, k: &Body) -> Result<()> {
    if k.dim() != expected {
        return Err(Error::Dimension(format!(
            "valuation on R^{expected} evaluated on a body in R^{}",
            k.dim()
        )));
    }
    Ok(())
}

impl Valuation for Valuation1 {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&self, k: &Body) -> Result<f64> {
        check_dim(1, k)?;
        Ok(self.eval(k.volume()))
    }
}

impl Valuation for Valuation2 {
    fn dim(&self) -> usize {
        2
    }

    fn evaluate(&self, k: &Body) -> Result<f64> {
        check_dim(2, k)?;
        Ok(Valuation2::evaluate(self, &k.to_planar()?))
    }
}

/// Formal sum `K ↦ Σ c_i·vol(K + A_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureValuation {
    dim: usize,
    terms: Vec<(f64, Body)>,
}

impl MeasureValuation {
    pub fn new(dim: usize, terms: Vec<(f64, Body)>) -> Result<Self> {
        if let Some((_, b)) = terms.iter().find(|(_, b)| b.dim() != dim) {
            return Err(Error::Dimension(format!("term body in R^{} for a valuation on R^{dim}", b.dim())));
        }
        Ok(Self { dim, terms })
    }

    /// `c·vol(• + A)`.
    pub fn body(c: f64, a: Body) -> Self {
        Self {
            dim: a.dim(),
            terms: vec![(c, a)],
        }
    }

    /// Lebesgue measure, `vol(• + {0})`.
    pub fn vol(dim: usize) -> Self {
        Self::body(1.0, Body::Polytope(Polytope::point(&vec![0.0; dim])))
    }

    pub fn terms(&self) -> &[(f64, Body)] {
        &self.terms
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Self::new(self.dim, t)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(c, b)| (s * c, b.clone())).collect(),
        }
    }

    /// Terms `(factor·c, a(A))`.
    fn map_bodies(&self, a: &DMatrix<f64>, factor: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(c, b)| Ok((factor * c, b.map(a)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(a.nrows(), terms)
    }
}

impl Valuation for MeasureValuation {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, k: &Body) -> Result<f64> {
        check_dim(self.dim, k)?;
        let mut s = 0.0;
        for (c, a) in &self.terms {
            s += c * k.volume_of_sum(a)?;
        }
        Ok(s)
    }
}

pub type Evaluator = Arc<dyn Fn(&Body) -> Result<f64> + Send + Sync>;

/// Valuation given by an evaluator closure.
#[derive(Clone)]
pub struct NumericValuation {
    dim: usize,
    degree_bound: usize,
    eval: Evaluator,
}

impl NumericValuation {
    pub fn new<F>(dim: usize, degree_bound: usize, f: F) -> Self
    where
        F: Fn(&Body) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            degree_bound,
            eval: Arc::new(f),
        }
    }

    /// Residual of a degree-`degree_bound` fit of `ε ↦ φ(K + εS)`,
    /// validated at an extra node.
    pub fn polynomiality_residual(&self, k: &Polytope, s: &Polytope) -> Result<f64> {
        let g = |e: f64| self.evaluate(&Body::Polytope(k.minkowski_sum(&s.scaled(e))?));
        let d = self.degree_bound;
        let xs: Vec<f64> = (0..=d + 1).map(|i| 0.5 * i as f64).collect();
        let ys = xs.iter().map(|&x| g(x)).collect::<Result<Vec<f64>>>()?;
        let c = crate::quadrature::interpolate(&xs[..=d], &ys[..=d]);
        let scale = ys.iter().fold(1.0_f64, |m, y| m.max(y.abs()));
        Ok((crate::quadrature::eval_poly(&c, xs[d + 1]) - ys[d + 1]).abs() / scale)
    }
}

impl fmt::Debug for NumericValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericValuation")
            .field("dim", &self.dim)
            .field("degree_bound", &self.degree_bound)
            .finish_non_exhaustive()
    }
}

impl Valuation for NumericValuation {
    fn dim(&self) -> usize {
        self.dim
    }

    fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    fn evaluate(&self, k: &Body) -> Result<f64> {
        check_dim(self.dim, k)?;
        (self.eval)(k)
    }
}

/// Any of the valuation carriers the calculus works with.
#[derive(Clone, Debug)]
pub enum Val {
    Measure(MeasureValuation),
    Numeric(NumericValuation),
    Line(Valuation1),
    Plane(Valuation2),
}

impl Val {
    /// The same valuation behind an opaque evaluator, which forces the
    /// numeric branches of every operation.
    pub fn as_numeric(&self) -> Val {
        let inner = self.clone();
        Val::Numeric(NumericValuation::new(self.dim(), self.degree_bound(), move |k| {
            inner.evaluate(k)
        }))
    }

    pub fn as_measure(&self) -> Option<&MeasureValuation> {
        match self {
            Val::Measure(m) => Some(m),
            _ => None,
        }
    }
}

impl From<MeasureValuation> for Val {
    fn from(m: MeasureValuation) -> Self {
        Val::Measure(m)
    }
}

impl From<NumericValuation> for Val {
    fn from(n: NumericValuation) -> Self {
        Val::Numeric(n)
    }
}

impl Valuation for Val {
    fn dim(&self) -> usize {
        match self {
            Val::Measure(m) => m.dim(),
            Val::Numeric(n) => n.dim(),
            Val::Line(_) => 1,
            Val::Plane(_) => 2,
        }
    }

    fn degree_bound(&self) -> usize {
        match self {
            Val::Numeric(n) => n.degree_bound(),
            _ => self.dim(),
        }
    }

    fn evaluate(&self, k: &Body) -> Result<f64> {
        match self {
            Val::Measure(m) => m.evaluate(k),
            Val::Numeric(n) => n.evaluate(k),
            Val::Line(v) => Valuation::evaluate(v, k),
            Val::Plane(v) => Valuation::evaluate(v, k),
        }
    }
}

/// `(f*φ)(K) = φ(f(K))`. Measure-type inputs stay symbolic under
/// invertible maps: `f* vol(• + A) = |det f|·vol(• + f⁻¹A)`.
pub fn pullback(f: &LinearMapSpec, phi: &Val) -> Result<Val> {
    if phi.dim() != f.target_dim() {
        return Err(Error::Dimension(format!(
            "pullback along R^{}→R^{} of a valuation on R^{}",
            f.source_dim(),
            f.target_dim(),
            phi.dim()
        )));
    }
    if let Val::Measure(m) = phi {
        if f.source_dim() == f.target_dim() && f.rank() == f.source_dim() {
            let inv = f.matrix().clone().try_inverse().ok_or(Error::SingularMap(0.0))?;
            if let Ok(mm) = m.map_bodies(&inv, f.matrix().determinant().abs()) {
                return Ok(Val::Measure(mm));
            }
        }
    }
    let phi = phi.clone();
    let a = f.matrix().clone();
    let n = f.source_dim();
    Ok(Val::Numeric(NumericValuation::new(n, phi.degree_bound().min(n), move |k| {
        phi.evaluate(&k.map(&a)?)
    })))
}

/// `f_*φ` through the factorization `f = j∘p` of [`LinearMapSpec::factorization`].
pub fn pushforward(f: &LinearMapSpec, phi: &Val) -> Result<Val> {
    let (p, j) = f.factorization()?;
    pushforward_factored(&p, &j, phi)
}

/// `j_*(p_*φ)` for a given surjection `p` and injection `j`.
pub fn pushforward_factored(p: &LinearMapSpec, j: &LinearMapSpec, phi: &Val) -> Result<Val> {
    if phi.dim() != p.source_dim() {
        return Err(Error::Dimension(format!(
            "pushforward from R^{} of a valuation on R^{}",
            p.source_dim(),
            phi.dim()
        )));
    }
    if !p.is_surjective() || !j.is_injective() || p.target_dim() != j.source_dim() {
        return Err(Error::Dimension("factors must be a surjection followed by an injection".into()));
    }
    let mid = pushforward_surjection(p, phi)?;
    pushforward_injection(j, &mid)
}

/// Surjections act on measure-type valuations by mapping the bodies; other
/// valuations go through [`pushforward_numeric`].
pub fn pushforward_surjection(p: &LinearMapSpec, phi: &Val) -> Result<Val> {
    if let Val::Measure(m) = phi {
        if let Ok(mm) = m.map_bodies(p.matrix(), 1.0) {
            return Ok(Val::Measure(mm));
        }
    }
    Ok(Val::Numeric(pushforward_numeric(p, phi, None)?))
}

/// Injections: isomorphisms map measure-type bodies, proper injections
/// integrate over fibers.
pub fn pushforward_injection(j: &LinearMapSpec, phi: &Val) -> Result<Val> {
    if j.source_dim() == j.target_dim() {
        if let Val::Measure(m) = phi {
            if let Ok(mm) = m.map_bodies(j.matrix(), 1.0) {
                return Ok(Val::Measure(mm));
            }
        }
        return Ok(Val::Numeric(pushforward_numeric(j, phi, None)?));
    }
    Ok(Val::Numeric(fiber_integral(j, phi)?))
}

/// Unit cube spanned by the columns of `basis`.
fn unit_cube(basis: &DMatrix<f64>) -> Result<Polytope> {
    let (n, k) = basis.shape();
    let pts = (0..1usize << k)
        .map(|mask| {
            let mut v = nalgebra::DVector::zeros(n);
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    v += basis.column(i);
                }
            }
            v
        })
        .collect();
    Polytope::new(n, pts)
}

/// Pushforward along a surjection `p: Rⁿ → Rᵐ` with kernel of dimension `k`:
/// `K ↦ J_p·(1/k!)·dᵏ/dεᵏ φ(s(K) + εS)` at `ε = 0`, with `s` a linear
/// section (the pseudo-inverse unless given) and `S` the unit cube on an
/// orthonormal kernel basis. The derivative is read off an exact-degree
/// polynomial fit.
pub fn pushforward_numeric(p: &LinearMapSpec, phi: &Val, section: Option<DMatrix<f64>>) -> Result<NumericValuation> {
    if !p.is_surjective() {
        return Err(Error::Dimension("derivative pushforward needs a surjection".into()));
    }
    if phi.dim() != p.source_dim() {
        return Err(Error::Dimension(format!(
            "pushforward from R^{} of a valuation on R^{}",
            p.source_dim(),
            phi.dim()
        )));
    }
    let (m, n) = (p.target_dim(), p.source_dim());
    let s = section.unwrap_or_else(|| p.pseudo_inverse());
    if s.shape() != (n, m) || (p.matrix() * &s - DMatrix::identity(m, m)).amax() > 1e-10 {
        return Err(Error::Dimension("section is not a right inverse of the map".into()));
    }
    let k = n - m;
    let cube = unit_cube(p.kernel())?;
    let jac = p.jacobian();
    let phi = phi.clone();
    Ok(NumericValuation::new(m, m, move |body| {
        let lifted = body.map(&s)?;
        if k == 0 {
            return Ok(jac * phi.evaluate(&lifted)?);
        }
        let lifted = lifted.as_polytope()?.clone();
        let c = fit_polynomial(
            |e| phi.evaluate(&Body::Polytope(lifted.minkowski_sum(&cube.scaled(e))?)),
            n,
            0.5,
            "pushforward along a surjection",
        )?;
        Ok(jac * c[k])
    }))
}

/// Pushforward along a proper injection `j: Rᵐ → Rⁿ`:
/// `K ↦ J_j·∫ φ(j⁻¹(K ∩ (y + Im j))) dy` over `y ∈ (Im j)^⊥`.
///
/// In the coordinates `M = [j | C]`, `C` an orthonormal basis of the
/// orthogonal complement, the fibers are slices of `M⁻¹K` along the last
/// coordinates. Between consecutive vertex levels the slices interpolate
/// linearly in the Minkowski sense, so the integrand is a polynomial of
/// degree ≤ m there and three-point Gauss–Legendre on each piece is exact.
pub fn fiber_integral(j: &LinearMapSpec, phi: &Val) -> Result<NumericValuation> {
    if !j.is_injective() {
        return Err(Error::Dimension("fiber integral needs an injection".into()));
    }
    if phi.dim() != j.source_dim() {
        return Err(Error::Dimension(format!(
            "pushforward from R^{} of a valuation on R^{}",
            j.source_dim(),
            phi.dim()
        )));
    }
    let (n, m) = (j.target_dim(), j.source_dim());
    let codim = n - m;
    let comp = LinearMapSpec::new(j.matrix().transpose())?.kernel().clone();
    let mut frame = DMatrix::zeros(n, n);
    frame.view_mut((0, 0), (n, m)).copy_from(j.matrix());
    frame.view_mut((0, m), (n, codim)).copy_from(&comp);
    let det = frame.determinant();
    let inv = frame.try_inverse().ok_or(Error::SingularMap(det))?;
    let jac = j.jacobian();
    let phi = phi.clone();
    Ok(NumericValuation::new(n, n, move |body| {
        let q = body.as_polytope()?.map(&inv)?;
        Ok(jac * integrate_slices(&q, codim, &phi)?)
    }))
}

fn integrate_slices(q: &Polytope, codim: usize, phi: &Val) -> Result<f64> {
    if codim == 0 {
        return phi.evaluate(&Body::Polytope(q.clone()));
    }
    let tol = 1e-12 * (1.0 + q.extent());
    piecewise_gauss(&q.last_levels(), tol, |t| match q.slice_last(t) {
        Some(s) => integrate_slices(&s, codim - 1, phi),
        None => Err(Error::Quadrature {
            offset: vec![t],
            reason: "empty slice at an interior quadrature node".into(),
        }),
    })
}

/// `(φ ⊠ ψ)(• ) = Σ c_i d_j·vol(• + A_i × B_j)` on the product space.
pub fn exterior_product(phi: &MeasureValuation, psi: &MeasureValuation) -> Result<MeasureValuation> {
    let d = phi.dim() + psi.dim();
    if d > crate::polytope::MAX_DIM {
        return Err(Error::Dimension(format!(
            "exterior product of valuations on R^{} and R^{} lives in R^{d}",
            phi.dim(),
            psi.dim()
        )));
    }
    let mut terms = Vec::new();
    for (c, a) in phi.terms() {
        for (e, b) in psi.terms() {
            terms.push((c * e, Body::Polytope(a.as_polytope()?.product(b.as_polytope()?)?)));
        }
    }
    MeasureValuation::new(d, terms)
}

/// `Δ*(φ ⊠ ψ)` for the diagonal `Δ: V → V ⊕ V`.
///
/// On the line this is the pullback of the exterior product. In the plane
/// the exterior product lives in R⁴; with `w = v − u` Fubini gives
/// `vol₄(ΔK + A × B) = ∫ area(K + A ∩ (B − w)) dw`, integrated exactly
/// over the cells cut out by the lines where a vertex of one polygon
/// crosses an edge line of the other.
pub fn product_via_diagonal(phi: &MeasureValuation, psi: &MeasureValuation) -> Result<Val> {
    match (phi.dim(), psi.dim()) {
        (1, 1) => {
            let ext = exterior_product(phi, psi)?;
            let diag = LinearMapSpec::from_rows(2, 1, &[1.0, 1.0])?;
            pullback(&diag, &Val::Measure(ext))
        }
        (2, 2) => {
            let mut pairs = Vec::new();
            for (c, a) in phi.terms() {
                for (e, b) in psi.terms() {
                    pairs.push((c * e, planar_vertices(a)?, planar_vertices(b)?));
                }
            }
            Ok(Val::Numeric(NumericValuation::new(2, 2, move |k| {
                let kb = k.to_planar()?;
                let mut s = 0.0;
                for (c, a, b) in &pairs {
                    s += c * diagonal_pair_integral(&kb, a, b)?;
                }
                Ok(s)
            })))
        }
        (m, n) => Err(Error::Dimension(format!(
            "diagonal product needs two valuations on R^1 or on R^2, got R^{m} and R^{n}"
        ))),
    }
}

fn planar_vertices(b: &Body) -> Result<Vec<Vector2<f64>>> {
    Ok(b.as_polytope()?
        .vertices()
        .iter()
        .map(|p| Vector2::new(p[0], p[1]))
        .collect())
}

/// `∫ area(K + A ∩ (B − w)) dw` for polygons `A`, `B`.
fn diagonal_pair_integral(k: &PlanarBody, a: &[Vector2<f64>], b: &[Vector2<f64>]) -> Result<f64> {
    if a.len() < 3 && b.len() < 3 {
        // points or segments: for almost every w the intersection is at most
        // a point, nonempty exactly on B − A
        let diffs: Vec<Vector2<f64>> = b.iter().flat_map(|q| a.iter().map(move |p| q - p)).collect();
        let hull = convex_hull_2d(&diffs);
        let spread = if hull.len() < 3 { 0.0 } else { PlanarBody::polygon(hull)?.area() };
        return Ok(k.area() * spread);
    }
    let edges = |v: &[Vector2<f64>]| -> Vec<(Vector2<f64>, Vector2<f64>)> {
        if v.len() < 2 {
            return Vec::new();
        }
        (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()] - v[i])).collect()
    };
    let cross = |u: Vector2<f64>, v: Vector2<f64>| u.x * v.y - u.y * v.x;
    // lines n·w = c in w-space, n = (−e.y, e.x)
    let mut lines: Vec<(Vector2<f64>, f64)> = Vec::new();
    for (p, e) in edges(b) {
        for q in a {
            // q + w on the line through p with direction e
            lines.push((Vector2::new(-e.y, e.x), cross(e, p - q)));
        }
    }
    for (p, e) in edges(a) {
        for q in b {
            // q − w on the line through p with direction e
            lines.push((Vector2::new(e.y, -e.x), cross(e, p - q)));
        }
    }
    let diffs: Vec<Vector2<f64>> = b.iter().flat_map(|q| a.iter().map(move |p| q - p)).collect();
    let lo = diffs.iter().map(|d| d.x).fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().map(|d| d.x).fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + diffs.iter().map(|d| d.amax()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;

    let mut xs = vec![lo, hi];
    for i in 0..lines.len() {
        let (n1, c1) = lines[i];
        if n1.y.abs() <= 1e-14 * n1.norm() && n1.x != 0.0 {
            xs.push(c1 / n1.x);
        }
        for &(n2, c2) in &lines[i + 1..] {
            let det = n1.x * n2.y - n1.y * n2.x;
            if det.abs() > 1e-14 * n1.norm() * n2.norm() {
                xs.push((c1 * n2.y - c2 * n1.y) / det);
            }
        }
    }
    xs.retain(|x| *x >= lo - tol && *x <= hi + tol);
    let xs = merged_breaks(&xs, tol);

    let area_k = k.area();
    let integrand = |w: Vector2<f64>| -> f64 {
        let shifted: Vec<Vector2<f64>> = b.iter().map(|q| q - w).collect();
        let c = if shifted.len() >= 3 {
            clip_convex(a, &shifted)
        } else {
            clip_convex(&shifted, a)
        };
        if c.is_empty() {
            return 0.0;
        }
        let cb = PlanarBody::hull(&c).expect("nonempty clip");
        area_k + 2.0 * mixed_volume(k, &cb) + cb.area()
    };
    piecewise_gauss(&xs, tol, |w1| {
        let mut ys: Vec<f64> = lines
            .iter()
            .filter(|(n, _)| n.y.abs() > 1e-14 * n.norm())
            .map(|(n, c)| (c - n.x * w1) / n.y)
            .collect();
        let (ylo, yhi) = diffs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), d| (l.min(d.y), h.max(d.y)));
        ys.retain(|y| *y >= ylo - tol && *y <= yhi + tol);
        ys.push(ylo);
        ys.push(yhi);
        piecewise_gauss(&ys, tol, |w2| Ok(integrand(Vector2::new(w1, w2))))
    })
}

/// `a_*(φ ⊠ ψ)` for the addition map `a(x, y) = x + y`, computed termwise
/// from `a(A × B) = A + B`.
pub fn convolution_via_addition(phi: &MeasureValuation, psi: &MeasureValuation) -> Result<MeasureValuation> {
    if phi.dim() != psi.dim() {
        return Err(Error::Dimension(format!(
            "convolution of valuations on R^{} and R^{}",
            phi.dim(),
            psi.dim()
        )));
    }
    let mut terms = Vec::new();
    for (c, a) in phi.terms() {
        for (e, b) in psi.terms() {
            terms.push((c * e, a.minkowski_sum(b)?));
        }
    }
    MeasureValuation::new(phi.dim(), terms)
}

/// Cartesian square
///
/// ```text
///   X̃ --f̃--> Ỹ
///   |g̃       |g
///   v        v
///   X --f--> Y
/// ```
///
/// with `f ⊕ g: X ⊕ Ỹ → Y` onto.
#[derive(Clone, Debug)]
pub struct CartesianSquare {
    pub f: LinearMapSpec,
    pub g: LinearMapSpec,
    pub f_tilde: LinearMapSpec,
    pub g_tilde: LinearMapSpec,
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

impl CartesianSquare {
    /// Builds `X̃ = {(x, ỹ) : f(x) = g(ỹ)}` with an orthonormal basis,
    /// optionally changed by an invertible matrix.
    pub fn fiber_product(f: &LinearMapSpec, g: &LinearMapSpec, basis_change: Option<&DMatrix<f64>>) -> Result<Self> {
        if f.target_dim() != g.target_dim() {
            return Err(Error::NotCartesian(format!(
                "f and g land in R^{} and R^{}",
                f.target_dim(),
                g.target_dim()
            )));
        }
        let sum = LinearMapSpec::new(hstack(f.matrix(), &(-g.matrix())))?;
        if !sum.is_surjective() {
            return Err(Error::NotCartesian("f ⊕ g is not onto".into()));
        }
        let mut basis = sum.kernel().clone();
        if basis.ncols() == 0 {
            return Err(Error::NotCartesian("fiber product is zero-dimensional".into()));
        }
        if let Some(b) = basis_change {
            if b.shape() != (basis.ncols(), basis.ncols()) {
                return Err(Error::Dimension("basis change has the wrong size".into()));
            }
            basis = basis * b;
        }
        let dx = f.source_dim();
        let g_tilde = LinearMapSpec::new(basis.rows(0, dx).into_owned())?;
        let f_tilde = LinearMapSpec::new(basis.rows(dx, g.source_dim()).into_owned())?;
        Self::new(f.clone(), g.clone(), f_tilde, g_tilde)
    }

    /// Validates commutativity, surjectivity of `f ⊕ g`, and that `X̃`
    /// maps isomorphically onto the fiber product.
    pub fn new(f: LinearMapSpec, g: LinearMapSpec, f_tilde: LinearMapSpec, g_tilde: LinearMapSpec) -> Result<Self> {
        let (dx, dy, dyt, dxt) = (f.source_dim(), f.target_dim(), g.source_dim(), g_tilde.source_dim());
        if g.target_dim() != dy || f_tilde.target_dim() != dyt || g_tilde.target_dim() != dx || f_tilde.source_dim() != dxt {
            return Err(Error::NotCartesian("maps do not form a square".into()));
        }
        let scale = 1.0 + f.matrix().amax() * g_tilde.matrix().amax() + g.matrix().amax() * f_tilde.matrix().amax();
        let defect = (g.matrix() * f_tilde.matrix() - f.matrix() * g_tilde.matrix()).amax();
        if defect > 1e-12 * scale {
            return Err(Error::NotCartesian(format!("square does not commute (defect {defect:e})")));
        }
        let sum = LinearMapSpec::new(hstack(f.matrix(), g.matrix()))?;
        if !sum.is_surjective() {
            return Err(Error::NotCartesian("f ⊕ g is not onto".into()));
        }
        if dxt + dy != dx + dyt {
            return Err(Error::NotCartesian(format!(
                "dim X̃ = {dxt} but the fiber product has dimension {}",
                dx + dyt - dy
            )));
        }
        let iota = LinearMapSpec::new(vstack(g_tilde.matrix(), f_tilde.matrix()))?;
        if !iota.is_injective() {
            return Err(Error::NotCartesian("X̃ does not embed into X ⊕ Ỹ".into()));
        }
        Ok(Self {
            f,
            g,
            f_tilde,
            g_tilde,
        })
    }

    /// The square reflected in its diagonal: `(f, g, f̃, g̃) ↦ (g, f, g̃, f̃)`.
    pub fn flipped(&self) -> Self {
        Self {
            f: self.g.clone(),
            g: self.f.clone(),
            f_tilde: self.g_tilde.clone(),
            g_tilde: self.f_tilde.clone(),
        }
    }

    /// Scalar realizing `Dens(X̃) ⊗ Dens(Y) ≅ Dens(X) ⊗ Dens(Ỹ)` from the
    /// exact sequence `0 → X̃ → X ⊕ Ỹ → Y → 0`: the absolute determinant of
    /// `[ι | s]` with `ι = (g̃, −f̃)` and `s` the pseudo-inverse of `f ⊕ g`.
    pub fn density_factor(&self) -> f64 {
        let iota = vstack(self.g_tilde.matrix(), &(-self.f_tilde.matrix()));
        let s = hstack(self.f.matrix(), self.g.matrix())
            .pseudo_inverse(1e-12)
            .expect("nonnegative tolerance");
        hstack(&iota, &s).determinant().abs()
    }
}

/// `|a − b| / max(1, |a|, |b|)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// `max_K |λ·g*(f_*φ)(K) − f̃_*(g̃*φ)(K)|`, relative to `max(1, |values|)`,
/// with `λ` the density factor of the square.
pub fn base_change_residual(sq: &CartesianSquare, phi: &Val, probes: &[Body]) -> Result<f64> {
    let lhs = pullback(&sq.g, &pushforward(&sq.f, phi)?)?;
    let rhs = pushforward(&sq.f_tilde, &pullback(&sq.g_tilde, phi)?)?;
    let lambda = sq.density_factor();
    let mut r: f64 = 0.0;
    for k in probes {
        r = r.max(relative_gap(lambda * lhs.evaluate(k)?, rhs.evaluate(k)?));
    }
    Ok(r)
}

/// The flipped identity `λ·f*(g_*ψ) = g̃_*(f̃*ψ)` for `ψ` on `Ỹ`, probes on `X`.
pub fn base_change2_residual(sq: &CartesianSquare, psi: &Val, probes: &[Body]) -> Result<f64> {
    base_change_residual(&sq.flipped(), psi, probes)
}

/// `p_*(φ ∗ ψ)` against `p_*φ ∗ p_*ψ`, both symbolic, compared on probes.
pub fn pushforward_convolution_check(
    p: &LinearMapSpec,
    phi: &MeasureValuation,
    psi: &MeasureValuation,
    probes: &[Body],
) -> Result<f64> {
    if !p.is_surjective() {
        return Err(Error::Dimension("homomorphism check needs a surjection".into()));
    }
    let symbolic = |v: Val| -> Result<MeasureValuation> {
        v.as_measure()
            .cloned()
            .ok_or_else(|| Error::UnsupportedBody("pushforward did not stay measure-type".into()))
    };
    let lhs = symbolic(pushforward(p, &Val::Measure(convolution_via_addition(phi, psi)?))?)?;
    let rhs = convolution_via_addition(
        &symbolic(pushforward(p, &Val::Measure(phi.clone()))?)?,
        &symbolic(pushforward(p, &Val::Measure(psi.clone()))?)?,
    )?;
    let mut r: f64 = 0.0;
    for k in probes {
        r = r.max(relative_gap(lhs.evaluate(k)?, rhs.evaluate(k)?));
    }
    Ok(r)
}

/// Pullback along a line inclusion `i: R → R²` against Fourier transforms.
///
/// For `φ = vol(• + A)` the left side fits the 1D valuation `i*φ` from its
/// values on intervals and applies the 1D Fourier transform (which swaps
/// the χ and length coefficients); the right side pushes the planar
/// Fourier transform of `φ` forward along the dual map `iᵀ`. Returns the
/// largest relative gap over intervals of the given lengths. `A` must be
/// smooth so that its coefficient representation is exact.
pub fn fourier_pullback_residual(i: &LinearMapSpec, a: &PlanarBody, band_limit: usize, lengths: &[f64]) -> Result<f64> {
    if i.source_dim() != 1 || i.target_dim() != 2 || !i.is_injective() {
        return Err(Error::Dimension("expected an injection R^1 → R^2".into()));
    }
    if !a.is_smooth() {
        return Err(Error::UnsupportedBody("Fourier comparison needs a smooth body".into()));
    }
    let phi = Val::Measure(MeasureValuation::body(1.0, Body::Smooth(a.clone())));
    let restricted = pullback(i, &phi)?;
    let interval = |t: f64| Body::Polytope(Polytope::interval(0.0, t));
    let c0 = restricted.evaluate(&interval(0.0))?;
    let c1 = restricted.evaluate(&interval(1.0))? - c0;
    let lhs = Valuation1 { c0, c1 }.fourier();

    let dual = LinearMapSpec::new(i.matrix().transpose())?;
    let planar = Valuation2::from_body_measure(a, band_limit).fourier();
    let rhs = pushforward_numeric(&dual, &Val::Plane(planar), None)?;
    let mut r: f64 = 0.0;
    for &t in lengths {
        r = r.max(relative_gap(lhs.eval(t), rhs.evaluate(&interval(t))?));
    }
    Ok(r)
}

/// Derivative identity for a surjection `f: V → W` with kernel dimension
/// `k` and a body `B` lying in a translate of the kernel:
/// `(1/k!)·dᵏ/dεᵏ vol(A + εB) = vol_k(B)·vol_W(f(A)) / J_f`
/// with Euclidean measures and `J_f = √det(ffᵀ)`. Returns the relative gap
/// between the fitted coefficient and the closed form.
pub fn kernel_derivative_residual(f: &LinearMapSpec, a: &Polytope, b: &Polytope) -> Result<f64> {
    if !f.is_surjective() || a.dim() != f.source_dim() || b.dim() != f.source_dim() {
        return Err(Error::Dimension("expected a surjection and two bodies in its source".into()));
    }
    let n = f.source_dim();
    let k = n - f.target_dim();
    if k == 0 {
        return Err(Error::Dimension("surjection has trivial kernel".into()));
    }
    let base = &b.vertices()[0];
    let offsets: Vec<_> = b.vertices().iter().map(|v| v - base).collect();
    if offsets.iter().any(|d| (f.matrix() * d).amax() > 1e-10 * (1.0 + d.amax())) {
        return Err(Error::Dimension("B does not lie in a translate of the kernel".into()));
    }
    let coeffs = fit_polynomial(
        |e| Ok(a.minkowski_sum(&b.scaled(e))?.volume()),
        n,
        0.5,
        "Steiner polynomial along the kernel",
    )?;
    // k-volume of B in kernel coordinates
    let in_kernel = Polytope::new(k, offsets.iter().map(|d| f.kernel().transpose() * d).collect())?;
    let image = a.map(f.matrix())?;
    let want = in_kernel.volume() * image.volume() / f.jacobian();
    Ok(relative_gap(coeffs[k], want))
}

/// Seeded probe polytopes in `R^dim`: random hulls, boxes, lower-dimensional
/// pieces, and (in the plane) polygonal approximations of discs.
pub fn probe_bodies<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<Body> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let body = match (dim, i % 5) {
            (1, 0) => Polytope::point(&[rng.gen_range(-1.0..1.0)]),
            (1, _) => {
                let a = rng.gen_range(-1.0..1.0);
                Polytope::interval(a, a + rng.gen_range(0.1..2.0))
            }
            (2, 0) => {
                let r = rng.gen_range(0.3..1.2);
                Polytope::from_planar(&PlanarBody::regular_polygon(24, r, rng.gen_range(0.0..1.0))).unwrap()
            }
            (2, 1) => {
                let a = random_polytope(rng, 2, 2);
                if a.vertices().len() < 2 {
                    Polytope::axis_box(&[1.0, 0.5])
                } else {
                    a
                }
            }
            (2, _) => {
                let n = rng.gen_range(3..9);
                Polytope::from_planar(&random_polygon(rng, n)).unwrap()
            }
            (_, 0) => Polytope::axis_box(&[rng.gen_range(0.3..1.5), rng.gen_range(0.3..1.5), rng.gen_range(0.3..1.5)]),
            (_, 1) => random_polytope(rng, 3, 2),
            (_, 2) => {
                // flat polygon in a random plane
                let flat = random_polytope(rng, 2, 6);
                let rot = crate::linmap::random_invertible(rng, 3);
                let emb = rot.columns(0, 2).into_owned();
                flat.map(&emb).unwrap()
            }
            _ => {
                let n = rng.gen_range(5..12);
                random_polytope(rng, 3, n)
            }
        };
        out.push(Body::Polytope(body));
    }
    out
}

/// Random measure-type valuation on `R^dim` with `terms` polytope bodies.
pub fn random_measure_valuation<R: Rng + ?Sized>(rng: &mut R, dim: usize, terms: usize) -> MeasureValuation {
    let t = (0..terms)
        .map(|_| {
            let c = rng.gen_range(0.2..1.5) * if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
            let n = rng.gen_range(2..7);
            (c, Body::Polytope(random_polytope(rng, dim, n)))
        })
        .collect();
    MeasureValuation::new(dim, t).expect("bodies have the right dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmap::{random_full_rank, random_invertible};
    use crate::planar::random_smooth_body;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn unit_square() -> Body {
        Body::Polytope(Polytope::axis_box(&[1.0, 1.0]))
    }

    fn max_gap(a: &Val, b: &Val, probes: &[Body]) -> f64 {
        probes
            .iter()
            .map(|k| relative_gap(a.evaluate(k).unwrap(), b.evaluate(k).unwrap()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn pullback_examples() {
        let mut r = rng(1);
        let phi = Val::Measure(random_measure_valuation(&mut r, 2, 2));
        let probes = probe_bodies(&mut r, 2, 10);
        let id = pullback(&LinearMapSpec::identity(2), &phi).unwrap();
        assert!(max_gap(&id, &phi, &probes) < 1e-14);

        // x-axis inclusion: value on an interval of length t is area(A) + t·(y-extent of A)
        let a = Polytope::from_rows(2, &[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let phi = Val::Measure(MeasureValuation::body(1.0, Body::Polytope(a.clone())));
        let i = LinearMapSpec::from_rows(2, 1, &[1.0, 0.0]).unwrap();
        let pb = pullback(&i, &phi).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let v = pb.evaluate(&Body::Polytope(Polytope::interval(0.0, t))).unwrap();
            assert!((v - (3.0 + 3.0 * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn pullback_composes_contravariantly() {
        let mut r = rng(2);
        for _ in 0..5 {
            let f1 = random_full_rank(&mut r, 2, 3);
            let f2 = random_full_rank(&mut r, 3, 1);
            let phi = Val::Measure(random_measure_valuation(&mut r, 2, 2));
            let lhs = pullback(&f1.compose(&f2).unwrap(), &phi).unwrap();
            let rhs = pullback(&f2, &pullback(&f1, &phi).unwrap()).unwrap();
            let probes = probe_bodies(&mut r, 1, 10);
            assert!(max_gap(&lhs, &rhs, &probes) < 1e-12);
        }
    }

    #[test]
    fn pushforward_examples() {
        let mut r = rng(3);
        let a = random_polytope(&mut r, 2, 6);
        let phi = Val::Measure(MeasureValuation::body(1.0, Body::Polytope(a.clone())));
        let p = LinearMapSpec::from_rows(1, 2, &[1.0, 0.0]).unwrap();
        let pushed = pushforward(&p, &phi).unwrap();
        let m = pushed.as_measure().unwrap();
        let (lo, hi) = a.range(0);
        assert!((m.terms()[0].1.volume() - (hi - lo)).abs() < 1e-15);

        let j = LinearMapSpec::from_rows(2, 1, &[1.0, 0.0]).unwrap();
        let vol1 = Val::Line(Valuation1::vol());
        let chi = Val::Line(Valuation1::chi());
        let area = pushforward(&j, &vol1).unwrap();
        assert!((area.evaluate(&unit_square()).unwrap() - 1.0).abs() < 1e-14);
        let extent = pushforward(&j, &chi).unwrap();
        assert!((extent.evaluate(&unit_square()).unwrap() - 1.0).abs() < 1e-14);
        let tri = Body::Polytope(Polytope::from_rows(2, &[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.5, 3.0]]).unwrap());
        assert!((area.evaluate(&tri).unwrap() - 3.0).abs() < 1e-13);
        assert!((extent.evaluate(&tri).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn numeric_pushforward_matches_symbolic() {
        let mut r = rng(4);
        for (m, n) in [(1, 2), (2, 3), (1, 3)] {
            let p = random_full_rank(&mut r, m, n);
            let phi = Val::Measure(random_measure_valuation(&mut r, n, 2));
            let sym = pushforward(&p, &phi).unwrap();
            assert!(sym.as_measure().is_some());
            let num = Val::Numeric(pushforward_numeric(&p, &phi, None).unwrap());
            let probes = probe_bodies(&mut r, m, 10);
            assert!(max_gap(&sym, &num, &probes) < 1e-9);

            // another section s + N·R gives the same result
            let s2 = p.pseudo_inverse() + p.kernel() * DMatrix::from_fn(n - m, m, |_, _| r.gen_range(-1.0..1.0));
            let other = Val::Numeric(pushforward_numeric(&p, &phi, Some(s2)).unwrap());
            assert!(max_gap(&num, &other, &probes) < 1e-9);
        }
    }

    #[test]
    fn pushforward_composes_covariantly() {
        let mut r = rng(5);
        for (a, b, c) in [(3, 2, 1), (1, 2, 3), (2, 1, 2), (2, 3, 1), (3, 1, 2)] {
            let f2 = random_full_rank(&mut r, b, a);
            let f1 = random_full_rank(&mut r, c, b);
            let phi = Val::Measure(random_measure_valuation(&mut r, a, 2));
            let lhs = pushforward(&f1.compose(&f2).unwrap(), &phi).unwrap();
            let rhs = pushforward(&f1, &pushforward(&f2, &phi).unwrap()).unwrap();
            let probes = probe_bodies(&mut r, c, 8);
            let gap = max_gap(&lhs, &rhs, &probes);
            assert!(gap < 1e-8, "R^{a}→R^{b}→R^{c}: {gap:e}");
        }
    }

    #[test]
    fn factorization_independence() {
        let mut r = rng(6);
        for (m, n) in [(2, 3), (3, 2), (2, 2), (1, 3)] {
            let f = random_full_rank(&mut r, m, n);
            let phi = Val::Measure(random_measure_valuation(&mut r, n, 2)).as_numeric();
            let (p, j) = f.factorization().unwrap();
            let a = random_invertible(&mut r, p.target_dim());
            let ainv = a.clone().try_inverse().unwrap();
            let p2 = LinearMapSpec::new(&a * p.matrix()).unwrap();
            let j2 = LinearMapSpec::new(j.matrix() * ainv).unwrap();
            let lhs = pushforward_factored(&p, &j, &phi).unwrap();
            let rhs = pushforward_factored(&p2, &j2, &phi).unwrap();
            let probes = probe_bodies(&mut r, m, 6);
            assert!(max_gap(&lhs, &rhs, &probes) < 1e-8);
        }
    }

    #[test]
    fn pushforward_shifts_degree() {
        let mut r = rng(7);
        // vol on R^3 pushed to R^2 is homogeneous of degree 3 + 2 − 3 = 2
        let p = random_full_rank(&mut r, 2, 3);
        let pushed = pushforward(&p, &Val::Measure(MeasureValuation::vol(3)).as_numeric()).unwrap();
        // V₁ on R² (degree 1) pushed to R¹: degree 1 + 1 − 2 = 0
        let q = random_full_rank(&mut r, 1, 2);
        let v1 = pushforward(&q, &Val::Plane(Valuation2::v1())).unwrap();
        for k in probe_bodies(&mut r, 2, 5) {
            let (a, b) = (pushed.evaluate(&k).unwrap(), pushed.evaluate(&k.scaled(1.7)).unwrap());
            assert!((b - 1.7f64.powi(2) * a).abs() < 1e-9 * (1.0 + b.abs()));
        }
        for k in probe_bodies(&mut r, 1, 5) {
            let (a, b) = (v1.evaluate(&k).unwrap(), v1.evaluate(&k.scaled(2.3)).unwrap());
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn exterior_products() {
        let a = MeasureValuation::body(1.0, Body::Polytope(Polytope::interval(0.0, 2.0)));
        let b = MeasureValuation::body(1.0, Body::Polytope(Polytope::interval(0.0, 3.0)));
        let e = exterior_product(&a, &b).unwrap();
        assert!((e.terms()[0].1.volume() - 6.0).abs() < 1e-15);
        assert!(exterior_product(&e, &MeasureValuation::vol(2)).is_err());
    }

    #[test]
    fn diagonal_product_on_the_line() {
        let a = MeasureValuation::body(1.0, Body::Polytope(Polytope::interval(0.0, 1.0)));
        let b = MeasureValuation::body(1.0, Body::Polytope(Polytope::interval(0.0, 2.0)));
        let p = product_via_diagonal(&a, &b).unwrap();
        assert!((p.evaluate(&Body::Polytope(Polytope::interval(0.0, 3.0))).unwrap() - 11.0).abs() < 1e-13);
        assert!((p.evaluate(&Body::Polytope(Polytope::point(&[0.4]))).unwrap() - 2.0).abs() < 1e-14);
        let graded = Valuation1::from_interval(1.0).product(&Valuation1::from_interval(2.0));
        assert_eq!(graded.eval(3.0), 11.0);
    }

    #[test]
    fn diagonal_product_in_the_plane_matches_brute_force() {
        let a = vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.2, 0.8)];
        let b = vec![Vector2::new(0.0, 0.0), Vector2::new(0.7, 0.1), Vector2::new(0.9, 0.9), Vector2::new(-0.1, 0.6)];
        let k = PlanarBody::unit_square();
        let exact = diagonal_pair_integral(&k, &a, &b).unwrap();
        // midpoint rule on a fine grid over B − A ⊂ [−1.2, 1] × [−0.9, 0.95]
        let n = 600;
        let (x0, x1, y0, y1) = (-1.2, 1.0, -0.9, 0.95);
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = Vector2::new(x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy);
                let shifted: Vec<_> = b.iter().map(|q| q - w).collect();
                let c = clip_convex(&a, &shifted);
                if !c.is_empty() {
                    let cb = PlanarBody::hull(&c).unwrap();
                    s += k.area() + 2.0 * mixed_volume(&k, &cb) + cb.area();
                }
            }
        }
        s *= hx * hy;
        assert!((exact - s).abs() < 2e-3 * exact, "{exact} {s}");
        // crossing segments meet in one point for w in a parallelogram of area 2
        let s1 = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0)];
        let s2 = [Vector2::new(0.3, 0.0), Vector2::new(0.3, 2.0)];
        assert!((diagonal_pair_integral(&k, &s1, &s2).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(diagonal_pair_integral(&k, &s1, &s1).unwrap(), 0.0);
        // the area(C_w) part integrates to area(A)·area(B)
        let zero = PlanarBody::point(Vector2::zeros());
        let only = diagonal_pair_integral(&zero, &a, &b).unwrap();
        let area_a = PlanarBody::hull(&a).unwrap().area();
        let area_b = PlanarBody::hull(&b).unwrap().area();
        assert!((only - area_a * area_b).abs() < 1e-13);
    }

    #[test]
    fn diagonal_product_in_the_plane_matches_graded_product() {
        let mut r = rng(8);
        for _ in 0..3 {
            let a = random_polygon(&mut r, 3);
            let b = random_polygon(&mut r, 4);
            let phi = MeasureValuation::body(1.0, Body::planar(a.clone()).unwrap());
            let psi = MeasureValuation::body(1.0, Body::planar(b.clone()).unwrap());
            let d = product_via_diagonal(&phi, &psi).unwrap();
            // graded product of vol(•+A) and vol(•+B) evaluated exactly:
            // area(A)area(B) + (area(A)·2V(K,B) + area(B)·2V(K,A)) + (area(A)+area(B)+2V(A,−B))·area(K)
            for k in [random_smooth_body(&mut r, 6, 0.8), random_polygon(&mut r, 5)] {
                let want = a.area() * b.area()
                    + 2.0 * (a.area() * mixed_volume(&k, &b) + b.area() * mixed_volume(&k, &a))
                    + (a.area() + b.area() + 2.0 * mixed_volume(&a, &b.reflect())) * k.area();
                let got = d.evaluate(&Body::planar(k).unwrap()).unwrap();
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "{got} {want}");
            }
        }
    }

    #[test]
    fn convolution_by_addition() {
        let mut r = rng(9);
        let a = random_smooth_body(&mut r, 8, 0.8);
        let b = random_smooth_body(&mut r, 8, 0.8);
        let phi = MeasureValuation::body(1.0, Body::Smooth(a.clone()));
        let psi = MeasureValuation::body(1.0, Body::Smooth(b.clone()));
        let c = convolution_via_addition(&phi, &psi).unwrap();
        let direct = Valuation2::from_body_measure(&a, 32).convolve(&Valuation2::from_body_measure(&b, 32));
        let Body::Smooth(sum) = &c.terms()[0].1 else { panic!() };
        assert!(Valuation2::from_body_measure(sum, 32).max_coeff_diff(&direct) < 1e-12);

        // on the line, the addition map pushes the exterior product forward
        let a1 = random_measure_valuation(&mut r, 1, 2);
        let b1 = random_measure_valuation(&mut r, 1, 2);
        let add = LinearMapSpec::from_rows(1, 2, &[1.0, 1.0]).unwrap();
        let via_push = Val::Numeric(pushforward_numeric(&add, &Val::Measure(exterior_product(&a1, &b1).unwrap()), None).unwrap());
        let sym = Val::Measure(convolution_via_addition(&a1, &b1).unwrap());
        let probes = probe_bodies(&mut r, 1, 8);
        assert!(max_gap(&via_push, &sym, &probes) < 1e-10);
    }

    #[test]
    fn density_factor_examples() {
        let one = LinearMapSpec::identity(1);
        let three = LinearMapSpec::from_rows(1, 1, &[3.0]).unwrap();
        let sq = CartesianSquare::new(one.clone(), one.clone(), three.clone(), three).unwrap();
        assert!((sq.density_factor() - 3.0).abs() < 1e-14);
        // X̃ is the diagonal of R ⊕ R with unit basis vector (1, 1)/√2
        let id = CartesianSquare::fiber_product(&one, &one, None).unwrap();
        assert!((id.density_factor() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        let bad = CartesianSquare::new(one.clone(), one.clone(), LinearMapSpec::from_rows(1, 1, &[2.0]).unwrap(), one);
        assert!(matches!(bad, Err(Error::NotCartesian(_))));
    }

    #[test]
    fn base_change_on_random_squares() {
        let mut r = rng(10);
        for (dx, dy, dyt) in [(2, 1, 1), (2, 1, 2), (1, 2, 2), (2, 2, 1), (3, 2, 1), (1, 1, 2)] {
            let f = random_full_rank(&mut r, dy, dx);
            let g = random_full_rank(&mut r, dy, dyt);
            let Ok(sq0) = CartesianSquare::fiber_product(&f, &g, None) else { continue };
            let b = random_invertible(&mut r, sq0.g_tilde.source_dim());
            let sq = CartesianSquare::fiber_product(&f, &g, Some(&b)).unwrap();
            let phi = Val::Measure(random_measure_valuation(&mut r, dx, 2));
            let probes = probe_bodies(&mut r, dyt, 6);
            let res = base_change_residual(&sq, &phi, &probes).unwrap();
            assert!(res < 1e-8, "{dx} {dy} {dyt}: {res:e}");
            let psi = Val::Measure(random_measure_valuation(&mut r, dyt, 2));
            let probes = probe_bodies(&mut r, dx, 6);
            let res = base_change2_residual(&sq, &psi, &probes).unwrap();
            assert!(res < 1e-8, "flipped {dx} {dy} {dyt}: {res:e}");
        }
    }

    #[test]
    fn homomorphism_of_pushforward() {
        let mut r = rng(11);
        let p = random_full_rank(&mut r, 1, 2);
        let phi = random_measure_valuation(&mut r, 2, 2);
        let psi = random_measure_valuation(&mut r, 2, 2);
        let probes = probe_bodies(&mut r, 1, 8);
        assert!(pushforward_convolution_check(&p, &phi, &psi, &probes).unwrap() < 1e-13);
        let unit = pushforward(&p, &Val::Measure(MeasureValuation::vol(2))).unwrap();
        assert!(max_gap(&unit, &Val::Measure(MeasureValuation::vol(1)), &probes) < 1e-15);
    }

    #[test]
    fn non_polynomial_input_is_rejected() {
        let bad = Val::Numeric(NumericValuation::new(2, 2, |k| Ok(k.volume().sqrt().exp())));
        let p = LinearMapSpec::from_rows(1, 2, &[1.0, 0.0]).unwrap();
        let pushed = pushforward(&p, &bad).unwrap();
        let k = Body::Polytope(Polytope::interval(0.0, 1.0));
        assert!(matches!(pushed.evaluate(&k), Err(Error::FitResidual { .. })));
    }

    #[test]
    fn fourier_commutes_with_line_restriction() {
        let mut r = rng(12);
        for _ in 0..5 {
            let i = random_full_rank(&mut r, 2, 1);
            let a = random_smooth_body(&mut r, 8, 0.8);
            let res = fourier_pullback_residual(&i, &a, 16, &[0.0, 0.3, 1.0, 2.5]).unwrap();
            assert!(res < 1e-9, "{res:e}");
        }
        let i = LinearMapSpec::from_rows(2, 1, &[1.0, 0.0]).unwrap();
        assert!(fourier_pullback_residual(&i, &PlanarBody::unit_square(), 16, &[1.0]).is_err());
    }

    #[test]
    fn kernel_derivative_identity() {
        let mut r = rng(13);
        for (m, n) in [(1, 2), (2, 3)] {
            for _ in 0..5 {
                let f = random_full_rank(&mut r, m, n);
                let a = random_polytope(&mut r, n, 7);
                let dir = f.kernel().column(0).into_owned() * r.gen_range(0.3..2.0);
                let shift = nalgebra::DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0));
                let b = Polytope::new(n, vec![shift.clone(), shift + dir]).unwrap();
                let res = kernel_derivative_residual(&f, &a, &b).unwrap();
                assert!(res < 1e-9, "{m}x{n}: {res:e}");
            }
        }
        // the projection onto the x-axis: derivative is the length of f(A)
        let f = LinearMapSpec::from_rows(1, 2, &[1.0, 0.0]).unwrap();
        let a = Polytope::from_rows(2, &[vec![0.0, 0.0], vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let b = Polytope::from_rows(2, &[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(kernel_derivative_residual(&f, &a, &b).unwrap() < 1e-13);
    }
}
