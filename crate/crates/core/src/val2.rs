//! Smooth translation-invariant valuations on the plane.
//!
//! A valuation is stored as `(c0, f, c2)` and evaluates as
//! `φ(K) = c0 + ∫ f dS₁(K) + c2·area(K)`. The degree-1 density `f` is kept
//! modulo first harmonics, which integrate to zero against every area
//! measure. With this convention `V(•, A)` has density `½h_A`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::planar::PlanarBody;
use crate::trig::{TrigPoly, TrigPolyJson};

#[derive(Clone, Debug, PartialEq)]
pub struct Valuation2 {
    c0: f64,
    f: TrigPoly,
    c2: f64,
}

impl Valuation2 {
    pub fn new(c0: f64, f: TrigPoly, c2: f64) -> Self {
        Self {
            c0,
            f: f.without_first_harmonic(),
            c2,
        }
    }

    pub fn chi() -> Self {
        Self::new(1.0, TrigPoly::zeros(0), 0.0)
    }

    pub fn vol() -> Self {
        Self::new(0.0, TrigPoly::zeros(0), 1.0)
    }

    pub fn zero() -> Self {
        Self::new(0.0, TrigPoly::zeros(0), 0.0)
    }

    /// Homogeneous degree-1 valuation `K ↦ ∫ f dS₁(K)`.
    pub fn degree1(f: TrigPoly) -> Self {
        Self::new(0.0, f, 0.0)
    }

    /// First intrinsic volume `V₁ = V(•, D)`, half the perimeter.
    pub fn v1() -> Self {
        Self::degree1(TrigPoly::constant(0.5))
    }

    /// `K ↦ area(K + A) = area(A) + 2V(K, A) + area(K)`. Polygon support
    /// functions are truncated to band limit `n`.
    pub fn from_body_measure(a: &PlanarBody, n: usize) -> Self {
        Self::new(a.area(), a.support_coefficients(n), 1.0)
    }

    /// `K ↦ V(K, A)`.
    pub fn mixed_valuation(a: &PlanarBody, n: usize) -> Self {
        Self::degree1(a.support_coefficients(n).scale(0.5))
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn density(&self) -> &TrigPoly {
        &self.f
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Homogeneous component of degree `i`.
    pub fn part(&self, i: usize) -> Self {
        match i {
            0 => Self::new(self.c0, TrigPoly::zeros(0), 0.0),
            1 => Self::degree1(self.f.clone()),
            2 => Self::new(0.0, TrigPoly::zeros(0), self.c2),
            _ => Self::zero(),
        }
    }

    /// Even part: `χ`, `vol` and the even harmonics of the density.
    pub fn even_part(&self) -> Self {
        Self::new(self.c0, self.f.even_part(), self.c2)
    }

    pub fn odd_part(&self) -> Self {
        Self::degree1(self.f.odd_part())
    }

    pub fn evaluate(&self, k: &PlanarBody) -> f64 {
        let mut v = self.c0;
        if self.f.max_abs_coeff() > 0.0 {
            v += k.area_measure().integrate(&self.f);
        }
        if self.c2 != 0.0 {
            v += self.c2 * k.area();
        }
        v
    }

    /// Product with unit `χ`. The degree-1 pairing is
    /// `P(f, g) = ∫ f(θ)·(g + g'')(θ + π) dθ`.
    pub fn product(&self, o: &Self) -> Self {
        let p = self.f.inner(&o.f.curvature_density().shift(PI));
        Self::new(
            self.c0 * o.c0,
            &(self.c0 * &o.f) + &(o.c0 * &self.f),
            self.c0 * o.c2 + o.c0 * self.c2 + p,
        )
    }

    /// Convolution with unit `vol`. The degree-1 pairing is
    /// `Q(f, g) = ∫ f·(g + g'') dθ`.
    pub fn convolve(&self, o: &Self) -> Self {
        let q = self.f.inner(&o.f.curvature_density());
        self.convolve_with_pairing(o, q)
    }

    /// Convolution twisted by the orientation character on odd densities:
    /// the degree-1 pairing is `Q(f₊, g₊) − Q(f₋, g₋)`. This is the
    /// operation the Fourier transform carries the product to.
    pub fn convolve_oriented(&self, o: &Self) -> Self {
        let even = self.f.even_part().inner(&o.f.even_part().curvature_density());
        let odd = self.f.odd_part().inner(&o.f.odd_part().curvature_density());
        self.convolve_with_pairing(o, even - odd)
    }

    fn convolve_with_pairing(&self, o: &Self, q: f64) -> Self {
        Self::new(
            self.c2 * o.c0 + o.c2 * self.c0 + q,
            &(self.c2 * &o.f) + &(o.c2 * &self.f),
            self.c2 * o.c2,
        )
    }

    /// `(c0, f, c2) ↦ (c2, f(· + π/2), c0)`.
    pub fn fourier(&self) -> Self {
        Self::new(self.c2, self.f.shift(FRAC_PI_2), self.c0)
    }

    pub fn fourier_inverse(&self) -> Self {
        Self::new(self.c2, self.f.shift(-FRAC_PI_2), self.c0)
    }

    /// `(Eφ)(K) = φ(−K)`.
    pub fn euler(&self) -> Self {
        Self::new(self.c0, self.f.shift(PI), self.c2)
    }

    /// `(Λφ)(K) = d/dε φ(K + εD)` at `ε = 0`.
    pub fn lambda_op(&self) -> Self {
        Self::new(self.f.integral(), TrigPoly::constant(self.c2), 0.0)
    }

    pub fn mult_by_v1(&self) -> Self {
        Self::v1().product(self)
    }

    /// `(gφ)(K) = φ(g⁻¹K)` for the rotation `g` by `α`.
    pub fn rotate_action(&self, alpha: f64) -> Self {
        Self::new(self.c0, self.f.shift(-alpha), self.c2)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.c0 + o.c0, &self.f + &o.f, self.c2 + o.c2)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.c0 - o.c0, &self.f - &o.f, self.c2 - o.c2)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.c0, self.f.scale(s), s * self.c2)
    }

    /// Coefficientwise sup-norm distance.
    pub fn max_coeff_diff(&self, o: &Self) -> f64 {
        (self.c0 - o.c0)
            .abs()
            .max((self.c2 - o.c2).abs())
            .max(self.f.max_coeff_diff(&o.f))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c0.abs().max(self.c2.abs()).max(self.f.max_abs_coeff())
    }

    /// Short human-readable summary of the graded pieces.
    pub fn summary(&self) -> String {
        let even = self.f.even_part().max_abs_coeff();
        let odd = self.f.odd_part().max_abs_coeff();
        format!(
            "degree 0: {:.6}·χ\ndegree 1: density with band limit {} (even max |coeff| {:.3e}, odd {:.3e})\ndegree 2: {:.6}·vol",
            self.c0,
            self.f.band_limit(),
            even,
            odd,
            self.c2
        )
    }
}

/// Random valuation with coefficients uniform in `[−1, 1]` at band limit `n`.
pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Valuation2 {
    let mut f = TrigPoly::zeros(n);
    for k in 0..=n {
        f.set_a(k, rng.gen_range(-1.0..1.0));
        if k > 0 {
            f.set_b(k, rng.gen_range(-1.0..1.0));
        }
    }
    Valuation2::new(rng.gen_range(-1.0..1.0), f, rng.gen_range(-1.0..1.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Valuation2Json {
    pub c0: f64,
    pub f: TrigPolyJson,
    pub c2: f64,
}

impl From<&Valuation2> for Valuation2Json {
    fn from(v: &Valuation2) -> Self {
        Self {
            c0: v.c0,
            f: (&v.f).into(),
            c2: v.c2,
        }
    }
}

impl Valuation2Json {
    pub fn into_valuation(self) -> Result<Valuation2> {
        Ok(Valuation2::new(self.c0, self.f.into_poly()?, self.c2))
    }
}
