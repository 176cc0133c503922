//! Band-limited trigonometric polynomials on the circle.
//!
//! A [`TrigPoly`] of band limit `N` is
//! `f(θ) = a₀ + Σ_{k=1..N} (a_k cos kθ + b_k sin kθ)`. Support functions of
//! smooth planar bodies and degree-1 valuation densities are both stored this
//! way, so every bilinear form the valuation algebra needs reduces to a finite
//! sum over coefficients.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Trigonometric polynomial with real cosine/sine coefficients.
///
/// Internally `a` and `b` both have length `N + 1`; `b[0]` is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TrigPoly {
    /// Builds a polynomial from `a₀..a_N` and `b₁..b_N`.
    ///
    /// Missing trailing coefficients on either side are treated as zero, so
    /// the band limit is `max(a.len() - 1, b.len())`.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        let n = a.len().saturating_sub(1).max(b.len());
        let mut aa = vec![0.0; n + 1];
        let mut bb = vec![0.0; n + 1];
        aa[..a.len()].copy_from_slice(&a);
        bb[1..=b.len()].copy_from_slice(&b);
        Self { a: aa, b: bb }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n + 1],
            b: vec![0.0; n + 1],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            a: vec![c],
            b: vec![0.0],
        }
    }

    /// `cos kθ` scaled by `c`.
    pub fn cos_mode(k: usize, c: f64) -> Self {
        let mut p = Self::zeros(k);
        p.a[k] = c;
        p
    }

    /// `sin kθ` scaled by `c` (`k ≥ 1`).
    pub fn sin_mode(k: usize, c: f64) -> Self {
        let mut p = Self::zeros(k);
        if k > 0 {
            p.b[k] = c;
        }
        p
    }

    pub fn band_limit(&self) -> usize {
        self.a.len() - 1
    }

    /// Cosine coefficient `a_k`; zero beyond the band limit.
    pub fn a(&self, k: usize) -> f64 {
        self.a.get(k).copied().unwrap_or(0.0)
    }

    /// Sine coefficient `b_k`; zero for `k = 0` and beyond the band limit.
    pub fn b(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.b.get(k).copied().unwrap_or(0.0)
        }
    }

    /// Cosine coefficients `a₀..a_N`.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.a
    }

    /// Sine coefficients `b₁..b_N`.
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.b[1..]
    }

    pub fn set_a(&mut self, k: usize, v: f64) {
        self.grow(k);
        self.a[k] = v;
    }

    pub fn set_b(&mut self, k: usize, v: f64) {
        assert!(k > 0, "b_0 does not exist");
        self.grow(k);
        self.b[k] = v;
    }

    fn grow(&mut self, k: usize) {
        if k >= self.a.len() {
            self.a.resize(k + 1, 0.0);
            self.b.resize(k + 1, 0.0);
        }
    }

    /// Same polynomial with band limit exactly `n` (truncating or padding).
    pub fn with_band_limit(&self, n: usize) -> Self {
        let mut p = self.clone();
        p.a.resize(n + 1, 0.0);
        p.b.resize(n + 1, 0.0);
        p
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut s = self.a[0];
        for k in 1..self.a.len() {
            let (sn, cs) = (k as f64 * theta).sin_cos();
            s += self.a[k] * cs + self.b[k] * sn;
        }
        s
    }

    /// Second derivative `f''`, exact on coefficients.
    pub fn second_derivative(&self) -> Self {
        self.map_modes(|k, a, b| {
            let k2 = (k * k) as f64;
            (-k2 * a, -k2 * b)
        })
    }

    /// `f + f''`. For a support function this is the density of the first
    /// area measure.
    pub fn curvature_density(&self) -> Self {
        self.map_modes(|k, a, b| {
            let w = 1.0 - (k * k) as f64;
            (w * a, w * b)
        })
    }

    /// `θ ↦ f(θ + α)`.
    pub fn shift(&self, alpha: f64) -> Self {
        self.map_modes(|k, a, b| {
            let (s, c) = (k as f64 * alpha).sin_cos();
            (a * c + b * s, b * c - a * s)
        })
    }

    /// `θ ↦ f(−θ)`.
    pub fn reflect(&self) -> Self {
        self.map_modes(|_, a, b| (a, -b))
    }

    /// Drops the first harmonic (`a₁ = b₁ = 0`).
    pub fn without_first_harmonic(&self) -> Self {
        self.map_modes(|k, a, b| if k == 1 { (0.0, 0.0) } else { (a, b) })
    }

    /// Harmonics with even `k` (including the constant term).
    pub fn even_part(&self) -> Self {
        self.map_modes(|k, a, b| if k % 2 == 0 { (a, b) } else { (0.0, 0.0) })
    }

    /// Harmonics with odd `k`.
    pub fn odd_part(&self) -> Self {
        self.map_modes(|k, a, b| if k % 2 == 1 { (a, b) } else { (0.0, 0.0) })
    }

    fn map_modes(&self, f: impl Fn(usize, f64, f64) -> (f64, f64)) -> Self {
        let mut out = self.clone();
        for k in 0..self.a.len() {
            let (a, b) = f(k, self.a[k], self.b[k]);
            out.a[k] = a;
            out.b[k] = if k == 0 { 0.0 } else { b };
        }
        out
    }

    /// `∫₀^{2π} f dθ`.
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.a[0]
    }

    /// `∫₀^{2π} f·g dθ`, exact by orthogonality.
    pub fn inner(&self, other: &TrigPoly) -> f64 {
        let n = self.a.len().min(other.a.len());
        let mut s = 2.0 * self.a[0] * other.a[0];
        for k in 1..n {
            s += self.a[k] * other.a[k] + self.b[k] * other.b[k];
        }
        PI * s
    }

    /// Pointwise product, band limit `N + M`, via product-to-sum identities.
    pub fn mul_poly(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.band_limit();
        let m = other.band_limit();
        let mut out = TrigPoly::zeros(n + m);
        for j in 0..=n {
            let (aj, bj) = (self.a[j], self.b[j]);
            if aj == 0.0 && bj == 0.0 {
                continue;
            }
            for k in 0..=m {
                let (ak, bk) = (other.a[k], other.b[k]);
                if ak == 0.0 && bk == 0.0 {
                    continue;
                }
                let sum = j + k;
                let (diff, sign) = if j >= k { (j - k, 1.0) } else { (k - j, -1.0) };
                // cos j cos k = ½[cos(j−k) + cos(j+k)]
                out.a[diff] += 0.5 * aj * ak;
                out.a[sum] += 0.5 * aj * ak;
                // sin j sin k = ½[cos(j−k) − cos(j+k)]
                out.a[diff] += 0.5 * bj * bk;
                out.a[sum] -= 0.5 * bj * bk;
                // cos j sin k = ½[sin(j+k) − sin(j−k)]
                out.b[sum] += 0.5 * aj * bk;
                if diff > 0 {
                    out.b[diff] -= 0.5 * aj * bk * sign;
                }
                // sin j cos k = ½[sin(j+k) + sin(j−k)]
                out.b[sum] += 0.5 * bj * ak;
                if diff > 0 {
                    out.b[diff] += 0.5 * bj * ak * sign;
                }
            }
        }
        out.b[0] = 0.0;
        out
    }

    /// Values on the uniform grid `θ_j = 2πj/m`.
    pub fn sample(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| self.eval(2.0 * PI * j as f64 / m as f64))
            .collect()
    }

    /// Least-squares fit (discrete Fourier projection) of samples on the
    /// uniform grid `θ_j = 2πj/m` to band limit `n`. Requires `m > 2n`.
    pub fn from_samples(values: &[f64], n: usize) -> TrigPoly {
        let m = values.len();
        assert!(m > 2 * n, "grid of {m} points cannot resolve band limit {n}");
        let mut p = TrigPoly::zeros(n);
        let mf = m as f64;
        for k in 0..=n {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let (s, c) = (2.0 * PI * (k * j) as f64 / mf).sin_cos();
                sa += v * c;
                sb += v * s;
            }
            if k == 0 {
                p.a[0] = sa / mf;
            } else {
                p.a[k] = 2.0 * sa / mf;
                p.b[k] = 2.0 * sb / mf;
            }
        }
        p
    }

    /// Largest coefficient difference `max_k max(|Δa_k|, |Δb_k|)`.
    pub fn max_coeff_diff(&self, other: &TrigPoly) -> f64 {
        let n = self.band_limit().max(other.band_limit());
        (0..=n)
            .map(|k| {
                (self.a(k) - other.a(k))
                    .abs()
                    .max((self.b(k) - other.b(k)).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        self.map_modes(|_, a, b| (c * a, c * b))
    }

    fn zip_with(&self, other: &TrigPoly, f: impl Fn(f64, f64) -> f64) -> TrigPoly {
        let n = self.band_limit().max(other.band_limit());
        let mut out = TrigPoly::zeros(n);
        for k in 0..=n {
            out.a[k] = f(self.a(k), other.a(k));
            out.b[k] = f(self.b(k), other.b(k));
        }
        out
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |x, y| x + y)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |x, y| x - y)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul<&TrigPoly> for f64 {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        rhs.scale(self)
    }
}

/// JSON shape `{"N":n,"a":[a₀..a_N],"b":[b₁..b_N]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigPolyJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl From<&TrigPoly> for TrigPolyJson {
    fn from(p: &TrigPoly) -> Self {
        Self {
            n: p.band_limit(),
            a: p.cos_coeffs().to_vec(),
            b: p.sin_coeffs().to_vec(),
        }
    }
}

impl TrigPolyJson {
    pub fn into_poly(self) -> Result<TrigPoly, crate::Error> {
        if self.a.len() > self.n + 1 || self.b.len() > self.n {
            return Err(crate::Error::Format(format!(
                "trig polynomial declares N={} but carries {} cosine / {} sine coefficients",
                self.n,
                self.a.len(),
                self.b.len()
            )));
        }
        Ok(TrigPoly::new(self.a, self.b).with_band_limit(self.n))
    }
}
