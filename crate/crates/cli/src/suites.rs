//! Verification suites. Each case draws seeded random instances, measures
//! the largest residual of one identity and compares it with a pinned
//! tolerance. Cases share no state and run on the rayon pool.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use valf_core::even3d::{
    brightness_by_fit, equivariance_residual, fourier_brightness_residual, fourier_even, klain_function,
    lambda_constants, lefschetz_invariant_check, mixed_brightness, random_direction, random_round_polytope,
    restriction_residual, EvenValuation3, Grassmannian,
};
use valf_core::body3::Body3;
use valf_core::functorial::{
    base_change2_residual, base_change_residual, convolution_via_addition, exterior_product, fourier_pullback_residual,
    kernel_derivative_residual, probe_bodies, product_via_diagonal, pullback, pushforward, pushforward_convolution_check,
    pushforward_numeric, random_measure_valuation, relative_gap, CartesianSquare, MeasureValuation, Val, Valuation,
};
use valf_core::linmap::{random_full_rank, random_invertible, LinearMapSpec};
use valf_core::planar::{mixed_volume, mixed_volume_by_fit, random_smooth_body, PlanarBody};
use valf_core::polytope::{random_polytope, Body, Polytope};
use valf_core::trig::TrigPoly;
use valf_core::val1::Valuation1;
use valf_core::val2::{random_valuation, Valuation2};

use crate::config::Config;
use crate::report::{CaseResult, SuiteReport};

pub const SUITES: [&str; 6] = ["algebra2d", "fourier2d", "functorial", "basechange", "even3d", "lefschetz"];

/// Which config override, if any, replaces a case's pinned tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TolClass {
    Exact,
    Quad,
    /// Yes/no checks encoded as a 0/1 residual; never overridden.
    Pinned,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub residual: f64,
    pub instances: usize,
    pub value: Option<f64>,
}

impl Outcome {
    fn new(residual: f64, instances: usize) -> Self {
        Self {
            residual,
            instances,
            value: None,
        }
    }

    fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

pub struct Ctx<'a> {
    pub config: &'a Config,
    pub rng: ChaCha8Rng,
}

impl Ctx<'_> {
    fn band(&self) -> usize {
        self.config.band_limit
    }

    /// Band limit of random smooth bodies; their support functions stay
    /// within the valuation band limit, so truncation is exact.
    fn body_band(&self) -> usize {
        (self.config.band_limit / 2).max(2)
    }

    fn grid(&self) -> usize {
        self.config.grid
    }

    fn smooth_body(&mut self) -> PlanarBody {
        let b = self.body_band();
        random_smooth_body(&mut self.rng, b, 0.8)
    }
}

pub struct Case {
    pub id: &'static str,
    pub suite: &'static str,
    pub anchor: &'static str,
    pub class: TolClass,
    pub tolerance: f64,
    pub run: fn(&mut Ctx) -> Result<Outcome>,
}

impl Case {
    pub fn tolerance(&self, config: &Config) -> f64 {
        match self.class {
            TolClass::Exact => config.tol_exact.unwrap_or(self.tolerance),
            TolClass::Quad => config.tol_quad.unwrap_or(self.tolerance),
            TolClass::Pinned => self.tolerance,
        }
    }

    /// Seed of this case's private stream: the master seed mixed with the id.
    pub fn seed(&self, master: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(master.to_le_bytes());
        h.update(self.id.as_bytes());
        u64::from_le_bytes(h.finalize()[..8].try_into().expect("digest is 32 bytes"))
    }

    pub fn run(&self, config: &Config) -> CaseResult {
        let mut cx = Ctx {
            config,
            rng: ChaCha8Rng::seed_from_u64(self.seed(config.seed)),
        };
        let tolerance = self.tolerance(config);
        let (max_residual, instances, value, error) = match (self.run)(&mut cx) {
            Ok(o) if o.residual.is_nan() => (None, o.instances, o.value, Some("residual is NaN".to_string())),
            Ok(o) => (Some(o.residual), o.instances, o.value, None),
            Err(e) => (None, 0, None, Some(format!("{e:#}"))),
        };
        CaseResult {
            id: self.id.into(),
            suite: self.suite.into(),
            anchor: self.anchor.into(),
            pass: max_residual.is_some_and(|r| r <= tolerance),
            max_residual,
            tolerance,
            instances,
            value,
            error,
        }
    }
}

macro_rules! case {
    ($suite:literal, $id:literal, $class:ident, $tol:expr, $f:ident, $anchor:literal) => {
        Case {
            id: $id,
            suite: $suite,
            anchor: $anchor,
            class: TolClass::$class,
            tolerance: $tol,
            run: $f,
        }
    };
}

pub fn registry() -> Vec<Case> {
    vec![
        case!("algebra2d", "convolution-of-body-measures", Exact, 1e-10, convolution_of_body_measures,
            "vol(•+A) ∗ vol(•+B) = vol(•+A+B)"),
        case!("algebra2d", "product-of-mixed-valuations", Quad, 1e-8, product_of_mixed_valuations,
            "V(•,A)·V(•,B) = ½V(A,−B)·vol against a Steiner-fit mixed area"),
        case!("algebra2d", "body-measure-evaluation", Exact, 1e-10, body_measure_evaluation,
            "vol(•+A) evaluated on K equals area(K+A)"),
        case!("algebra2d", "product-unit", Exact, 1e-12, product_unit, "χ is the unit of the product"),
        case!("algebra2d", "convolution-unit", Exact, 1e-12, convolution_unit, "vol is the unit of the convolution"),
        case!("fourier2d", "fourier-product-to-convolution", Exact, 1e-10, fourier_product_to_convolution,
            "F(φ·ψ) = Fφ ∗ Fψ on arbitrary pairs"),
        case!("fourier2d", "fourier-product-to-convolution-even", Exact, 1e-10, fourier_product_even,
            "F(φ·ψ) = Fφ ∗ Fψ on even pairs"),
        case!("fourier2d", "fourier-product-to-oriented-convolution", Exact, 1e-10, fourier_product_oriented,
            "F(φ·ψ) = Fφ ⋆ Fψ with the orientation-twisted convolution"),
        case!("fourier2d", "fourier-square-is-euler", Exact, 1e-12, fourier_square_is_euler, "F² = E"),
        case!("fourier2d", "fourier-fourth-power", Exact, 1e-12, fourier_fourth_power, "F⁴ = Id"),
        case!("fourier2d", "fourier-square-witness", Exact, 1e-12, fourier_square_witness,
            "F² acts by (−1)^k on harmonic k, so F² ≠ Id on odd densities"),
        case!("fourier2d", "fourier-quarter-turn", Exact, 1e-12, fourier_quarter_turn,
            "F V(•,A) = V(•,J⁻¹A) for the quarter turn J"),
        case!("fourier2d", "fourier-chi-vol", Exact, 1e-15, fourier_chi_vol,
            "Fχ = vol and F vol = χ in dimensions 1 and 2"),
        case!("functorial", "pullback-composition", Exact, 1e-12, pullback_composition, "(f∘g)* = g*∘f*"),
        case!("functorial", "pushforward-composition", Quad, 1e-8, pushforward_composition, "(f∘g)_* = f_*∘g_*"),
        case!("functorial", "pushforward-composition-symbolic", Exact, 1e-12, pushforward_composition_symbolic,
            "(f∘g)_* = f_*∘g_* on surjections, both sides symbolic"),
        case!("functorial", "pushforward-convolution-homomorphism", Exact, 1e-12, pushforward_homomorphism,
            "p_*(φ∗ψ) = p_*φ ∗ p_*ψ for surjections"),
        case!("functorial", "exterior-product-line-diagonal", Quad, 1e-9, exterior_line_diagonal,
            "Δ*(φ⊠ψ) = φ·ψ on the line"),
        case!("functorial", "exterior-product-line-addition", Quad, 1e-9, exterior_line_addition,
            "a_*(φ⊠ψ) = φ∗ψ on the line"),
        case!("functorial", "exterior-product-plane-diagonal", Quad, 1e-10, exterior_plane_diagonal,
            "Δ*(φ⊠ψ) = φ·ψ in the plane"),
        case!("functorial", "exterior-product-plane-addition", Quad, 1e-10, exterior_plane_addition,
            "a_*(φ⊠ψ) = φ∗ψ in the plane"),
        case!("functorial", "fourier-line-restriction", Quad, 1e-7, fourier_line_restriction,
            "F(i*φ) = (i^∨)_*(Fφ) for lines in the plane"),
        case!("functorial", "kernel-derivative", Quad, 1e-8, kernel_derivative,
            "d/dε vol(A+εB) for B in ker f equals vol_k(B)·vol(f A)/J_f"),
        case!("basechange", "base-change", Quad, 1e-7, base_change, "λ·g*f_* = f̃_*g̃*"),
        case!("basechange", "base-change-flipped", Quad, 1e-7, base_change_flipped, "λ·f*g_* = g̃_*f̃* on the flipped square"),
        case!("basechange", "density-factor-diagonal", Exact, 1e-12, density_factor_diagonal,
            "density factor of the diagonal fiber product is 1/√2"),
        case!("even3d", "fourier-even-involution", Exact, 1e-15, fourier_even_involution,
            "even Fourier is an involution exchanging lines and planes"),
        case!("even3d", "klain-restriction", Quad, 1e-3, klain_restriction,
            "Klain function agrees with restriction to random planes"),
        case!("even3d", "klain-equivariance", Quad, 1e-3, klain_equivariance, "Kl_{gφ}(u) = Kl_φ(g⁻¹u)"),
        case!("even3d", "fourier-brightness", Quad, 1e-9, fourier_brightness,
            "F of the brightness valuation of A is V(•,•,Z) with Z the projection zonotope"),
        case!("even3d", "klain-intrinsic-volumes", Exact, 1e-12, klain_intrinsic_volumes,
            "Klain functions of V₁ and V₂ are identically 1"),
        case!("even3d", "brightness-projection-area", Quad, 1e-8, brightness_projection_area,
            "V(seg_u, A, A) = area(A|u⊥)/3 against a Steiner fit"),
        case!("lefschetz", "v1-squared-chi-plane", Exact, 1e-10, v1_squared_plane, "V₁²·χ = (π/2)·vol in the plane"),
        case!("lefschetz", "v1-conjugated-lambda-plane", Exact, 1e-9, v1_conjugated_lambda_plane,
            "V₁·φ = κ·F⁻¹ΛFφ with one fitted κ in the plane"),
        case!("lefschetz", "lambda-constants-positive", Pinned, 0.0, lambda_positive,
            "fitted constants of ΛV_k = c_k V_{k−1} are positive in R³"),
        case!("lefschetz", "lambda-constants-consistent", Quad, 1e-6, lambda_consistent,
            "Λ constants agree across fit bodies in R³"),
        case!("lefschetz", "lefschetz-powers-nonzero", Pinned, 0.0, lefschetz_nonzero,
            "Λ^{2i−3} is nonzero on V_i for i = 2, 3"),
        case!("lefschetz", "v1-action-associative", Quad, 1e-6, v1_action_associative,
            "V₁·(V₁·V_k) agrees with the fitted double step in R³"),
    ]
}

pub fn cases_for(suite: &str) -> Result<Vec<Case>> {
    if suite == "all" {
        return Ok(registry());
    }
    if !SUITES.contains(&suite) {
        bail!("unknown suite '{suite}' (expected one of {}, all)", SUITES.join(", "));
    }
    Ok(registry().into_iter().filter(|c| c.suite == suite).collect())
}

pub fn verify(config: &Config) -> Result<SuiteReport> {
    config.validate()?;
    let cases = cases_for(&config.suite)?;
    let start = Instant::now();
    let results: Vec<CaseResult> = cases.par_iter().map(|c| c.run(config)).collect();
    Ok(SuiteReport::new(&config.suite, results, config.clone(), start.elapsed().as_secs_f64()))
}

fn max_gap(a: &dyn Valuation, b: &dyn Valuation, probes: &[Body]) -> Result<f64> {
    let mut r: f64 = 0.0;
    for k in probes {
        r = r.max(relative_gap(a.evaluate(k)?, b.evaluate(k)?));
    }
    Ok(r)
}

fn indicator(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

// planar algebra

fn convolution_of_body_measures(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (cx.smooth_body(), cx.smooth_body());
        let lhs = Valuation2::from_body_measure(&a, cx.band()).convolve(&Valuation2::from_body_measure(&b, cx.band()));
        let rhs = Valuation2::from_body_measure(&a.minkowski_sum(&b, cx.grid()), cx.band());
        r = r.max(lhs.max_coeff_diff(&rhs));
    }
    Ok(Outcome::new(r, 100))
}

fn product_of_mixed_valuations(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (cx.smooth_body(), cx.smooth_body());
        let p = Valuation2::mixed_valuation(&a, cx.band()).product(&Valuation2::mixed_valuation(&b, cx.band()));
        let oracle = 0.5 * mixed_volume_by_fit(&a, &b.reflect(), cx.grid())?;
        let stray = p.part(0).max_abs_coeff().max(p.part(1).max_abs_coeff());
        r = r.max((p.c2() - oracle).abs() / oracle.abs()).max(stray);
    }
    Ok(Outcome::new(r, 100))
}

fn body_measure_evaluation(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..50 {
        let (a, k) = (cx.smooth_body(), cx.smooth_body());
        let direct = a.minkowski_sum(&k, cx.grid()).area();
        r = r.max(relative_gap(Valuation2::from_body_measure(&a, cx.band()).evaluate(&k), direct));
    }
    Ok(Outcome::new(r, 50))
}

fn product_unit(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..200 {
        let p = random_valuation(&mut cx.rng, cx.config.band_limit);
        r = r.max(Valuation2::chi().product(&p).max_coeff_diff(&p));
    }
    Ok(Outcome::new(r, 200))
}

fn convolution_unit(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..200 {
        let p = random_valuation(&mut cx.rng, cx.config.band_limit);
        r = r.max(Valuation2::vol().convolve(&p).max_coeff_diff(&p));
    }
    Ok(Outcome::new(r, 200))
}

// planar Fourier transform

fn random_pairs(cx: &mut Ctx, n: usize) -> Vec<(Valuation2, Valuation2)> {
    let b = cx.config.band_limit;
    (0..n)
        .map(|_| (random_valuation(&mut cx.rng, b), random_valuation(&mut cx.rng, b)))
        .collect()
}

fn fourier_product_to_convolution(cx: &mut Ctx) -> Result<Outcome> {
    let r = random_pairs(cx, 200)
        .iter()
        .map(|(p, q)| p.product(q).fourier().max_coeff_diff(&p.fourier().convolve(&q.fourier())))
        .fold(0.0, f64::max);
    Ok(Outcome::new(r, 200))
}

fn fourier_product_even(cx: &mut Ctx) -> Result<Outcome> {
    let r = random_pairs(cx, 200)
        .iter()
        .map(|(p, q)| {
            let (p, q) = (p.even_part(), q.even_part());
            p.product(&q).fourier().max_coeff_diff(&p.fourier().convolve(&q.fourier()))
        })
        .fold(0.0, f64::max);
    Ok(Outcome::new(r, 200))
}

fn fourier_product_oriented(cx: &mut Ctx) -> Result<Outcome> {
    let r = random_pairs(cx, 200)
        .iter()
        .map(|(p, q)| p.product(q).fourier().max_coeff_diff(&p.fourier().convolve_oriented(&q.fourier())))
        .fold(0.0, f64::max);
    Ok(Outcome::new(r, 200))
}

fn fourier_square_is_euler(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..200 {
        let p = random_valuation(&mut cx.rng, cx.config.band_limit);
        r = r.max(p.fourier().fourier().max_coeff_diff(&p.euler()));
    }
    Ok(Outcome::new(r, 200))
}

fn fourier_fourth_power(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..200 {
        let p = random_valuation(&mut cx.rng, cx.config.band_limit);
        r = r.max(p.fourier().fourier().fourier().fourier().max_coeff_diff(&p));
        r = r.max(p.fourier().fourier_inverse().max_coeff_diff(&p));
    }
    Ok(Outcome::new(r, 200))
}

fn fourier_square_witness(_: &mut Ctx) -> Result<Outcome> {
    let f = &(&TrigPoly::cos_mode(3, 1.0) + &TrigPoly::sin_mode(5, 0.5)) + &TrigPoly::cos_mode(2, 0.7);
    let w = Valuation2::degree1(f);
    let gap = w.fourier().fourier().max_coeff_diff(&w);
    // harmonics 3 and 5 flip sign, harmonic 2 is fixed: the gap is 2·1
    Ok(Outcome::new((gap - 2.0).abs(), 1).with_value(gap))
}

fn fourier_quarter_turn(cx: &mut Ctx) -> Result<Outcome> {
    let j_inv = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut r: f64 = 0.0;
    for _ in 0..100 {
        let a = cx.smooth_body();
        let lhs = Valuation2::mixed_valuation(&a, cx.band()).fourier();
        let rhs = Valuation2::mixed_valuation(&a.transform(&j_inv, cx.grid())?, cx.band());
        r = r.max(lhs.max_coeff_diff(&rhs));
    }
    Ok(Outcome::new(r, 100))
}

fn fourier_chi_vol(_: &mut Ctx) -> Result<Outcome> {
    let r = Valuation2::chi()
        .fourier()
        .max_coeff_diff(&Valuation2::vol())
        .max(Valuation2::vol().fourier().max_coeff_diff(&Valuation2::chi()))
        .max(Valuation1::chi().fourier().max_diff(&Valuation1::vol()))
        .max(Valuation1::vol().fourier().max_diff(&Valuation1::chi()));
    Ok(Outcome::new(r, 4))
}

// functorial calculus

fn dims(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(1..=3)
}

fn pullback_composition(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..50 {
        let (a, b, c) = (dims(&mut cx.rng), dims(&mut cx.rng), dims(&mut cx.rng));
        let f1 = random_full_rank(&mut cx.rng, a, b);
        let f2 = random_full_rank(&mut cx.rng, b, c);
        let phi = Val::Measure(random_measure_valuation(&mut cx.rng, a, 2));
        let lhs = pullback(&f1.compose(&f2)?, &phi)?;
        let rhs = pullback(&f2, &pullback(&f1, &phi)?)?;
        let probes = probe_bodies(&mut cx.rng, c, 6);
        r = r.max(max_gap(&lhs, &rhs, &probes)?);
    }
    Ok(Outcome::new(r, 50))
}

fn pushforward_composition(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..50 {
        let (a, b, c) = (dims(&mut cx.rng), dims(&mut cx.rng), dims(&mut cx.rng));
        let f2 = random_full_rank(&mut cx.rng, b, a);
        let f1 = random_full_rank(&mut cx.rng, c, b);
        let phi = Val::Measure(random_measure_valuation(&mut cx.rng, a, 2));
        let lhs = pushforward(&f1.compose(&f2)?, &phi)?;
        let rhs = pushforward(&f1, &pushforward(&f2, &phi)?)?;
        let probes = probe_bodies(&mut cx.rng, c, 6);
        r = r.max(max_gap(&lhs, &rhs, &probes)?);
    }
    Ok(Outcome::new(r, 50))
}

fn pushforward_composition_symbolic(cx: &mut Ctx) -> Result<Outcome> {
    const CHAINS: [(usize, usize, usize); 6] = [(3, 2, 1), (3, 3, 2), (2, 2, 1), (3, 1, 1), (2, 1, 1), (3, 2, 2)];
    let mut r: f64 = 0.0;
    for i in 0..50 {
        let (a, b, c) = CHAINS[i % CHAINS.len()];
        let f2 = random_full_rank(&mut cx.rng, b, a);
        let f1 = random_full_rank(&mut cx.rng, c, b);
        let phi = Val::Measure(random_measure_valuation(&mut cx.rng, a, 2));
        let lhs = pushforward(&f1.compose(&f2)?, &phi)?;
        let rhs = pushforward(&f1, &pushforward(&f2, &phi)?)?;
        if lhs.as_measure().is_none() || rhs.as_measure().is_none() {
            bail!("pushforward along a surjection left the symbolic class");
        }
        let probes = probe_bodies(&mut cx.rng, c, 6);
        r = r.max(max_gap(&lhs, &rhs, &probes)?);
    }
    Ok(Outcome::new(r, 50))
}

fn pushforward_homomorphism(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for (m, n) in [(1, 2), (2, 3), (1, 3)].into_iter().cycle().take(12) {
        let p = random_full_rank(&mut cx.rng, m, n);
        let phi = random_measure_valuation(&mut cx.rng, n, 2);
        let psi = random_measure_valuation(&mut cx.rng, n, 2);
        let probes = probe_bodies(&mut cx.rng, m, 6);
        r = r.max(pushforward_convolution_check(&p, &phi, &psi, &probes)?);
    }
    Ok(Outcome::new(r, 12))
}

/// `Σ c·vol(• + A)` on the line as `c0·χ + c1·vol`.
fn line_graded(m: &MeasureValuation) -> Valuation1 {
    m.terms()
        .iter()
        .fold(Valuation1::new(0.0, 0.0), |v, (c, a)| Valuation1::new(v.c0 + c * a.volume(), v.c1 + c))
}

fn exterior_line_diagonal(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..30 {
        let phi = random_measure_valuation(&mut cx.rng, 1, 2);
        let psi = random_measure_valuation(&mut cx.rng, 1, 2);
        let via_diagonal = product_via_diagonal(&phi, &psi)?;
        let graded = line_graded(&phi).product(&line_graded(&psi));
        let probes = probe_bodies(&mut cx.rng, 1, 8);
        r = r.max(max_gap(&via_diagonal, &graded, &probes)?);
    }
    Ok(Outcome::new(r, 30))
}

fn exterior_line_addition(cx: &mut Ctx) -> Result<Outcome> {
    let add = LinearMapSpec::from_rows(1, 2, &[1.0, 1.0])?;
    let mut r: f64 = 0.0;
    for _ in 0..30 {
        let phi = random_measure_valuation(&mut cx.rng, 1, 2);
        let psi = random_measure_valuation(&mut cx.rng, 1, 2);
        let pushed = pushforward_numeric(&add, &Val::Measure(exterior_product(&phi, &psi)?), None)?;
        let symbolic = convolution_via_addition(&phi, &psi)?;
        let graded = line_graded(&phi).convolve(&line_graded(&psi));
        let probes = probe_bodies(&mut cx.rng, 1, 8);
        r = r
            .max(max_gap(&pushed, &graded, &probes)?)
            .max(max_gap(&symbolic, &graded, &probes)?);
    }
    Ok(Outcome::new(r, 30))
}

fn planar_terms(m: &MeasureValuation) -> Result<Vec<(f64, PlanarBody)>> {
    m.terms().iter().map(|(c, a)| Ok((*c, a.to_planar()?))).collect()
}

fn exterior_plane_diagonal(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..10 {
        let phi = random_measure_valuation(&mut cx.rng, 2, 2);
        let psi = random_measure_valuation(&mut cx.rng, 2, 2);
        let via_diagonal = product_via_diagonal(&phi, &psi)?;
        let (tp, tq) = (planar_terms(&phi)?, planar_terms(&psi)?);
        for k in probe_bodies(&mut cx.rng, 2, 4) {
            let kp = k.to_planar()?;
            // graded product of vol(•+A) and vol(•+B), term by term
            let mut want = 0.0;
            for (ca, a) in &tp {
                for (cb, b) in &tq {
                    want += ca
                        * cb
                        * (a.area() * b.area()
                            + 2.0 * (a.area() * mixed_volume(&kp, b) + b.area() * mixed_volume(&kp, a))
                            + (a.area() + b.area() + 2.0 * mixed_volume(a, &b.reflect())) * kp.area());
                }
            }
            r = r.max(relative_gap(via_diagonal.evaluate(&k)?, want));
        }
    }
    Ok(Outcome::new(r, 10))
}

fn exterior_plane_addition(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..20 {
        let phi = random_measure_valuation(&mut cx.rng, 2, 2);
        let psi = random_measure_valuation(&mut cx.rng, 2, 2);
        let conv = convolution_via_addition(&phi, &psi)?;
        let (tp, tq) = (planar_terms(&phi)?, planar_terms(&psi)?);
        for k in probe_bodies(&mut cx.rng, 2, 6) {
            let kp = k.to_planar()?;
            let mut want = 0.0;
            for (ca, a) in &tp {
                for (cb, b) in &tq {
                    // area(K + A + B) by multilinearity
                    want += ca
                        * cb
                        * (kp.area()
                            + a.area()
                            + b.area()
                            + 2.0 * (mixed_volume(&kp, a) + mixed_volume(&kp, b) + mixed_volume(a, b)));
                }
            }
            r = r.max(relative_gap(conv.evaluate(&k)?, want));
        }
    }
    Ok(Outcome::new(r, 20))
}

fn fourier_line_restriction(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..50 {
        let i = random_full_rank(&mut cx.rng, 2, 1);
        let a = cx.smooth_body();
        r = r.max(fourier_pullback_residual(&i, &a, cx.band(), &[0.0, 0.3, 1.0, 2.5])?);
    }
    Ok(Outcome::new(r, 50))
}

fn kernel_derivative(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for (m, n) in [(1, 2), (2, 3)].into_iter().cycle().take(30) {
        let f = random_full_rank(&mut cx.rng, m, n);
        let a = random_polytope(&mut cx.rng, n, 7);
        let dir = f.kernel().column(0).into_owned() * cx.rng.gen_range(0.3..2.0);
        let shift = nalgebra::DVector::from_fn(n, |_, _| cx.rng.gen_range(-1.0..1.0));
        let b = Polytope::new(n, vec![shift.clone(), shift + dir])?;
        r = r.max(kernel_derivative_residual(&f, &a, &b)?);
    }
    Ok(Outcome::new(r, 30))
}

// base change

/// Ten squares of each shape: generic, `X = Y ⊕ R` projecting to `Y`,
/// and `f` an injection.
fn squares(rng: &mut ChaCha8Rng) -> Result<Vec<CartesianSquare>> {
    let mut out = Vec::new();
    for shape in 0..3 {
        let mut made = 0;
        let mut tries = 0;
        while made < 10 {
            tries += 1;
            if tries > 1000 {
                bail!("could not draw Cartesian squares of shape {shape}");
            }
            let (f, g) = match shape {
                0 => {
                    let (dx, dy, dyt) = [(2, 1, 1), (2, 1, 2), (1, 2, 2), (2, 2, 1), (3, 2, 1), (1, 1, 2)][rng.gen_range(0..6)];
                    (random_full_rank(rng, dy, dx), random_full_rank(rng, dy, dyt))
                }
                1 => {
                    let k = rng.gen_range(1..=2);
                    let proj = DMatrix::from_fn(k, k + 1, |i, j| if i == j { 1.0 } else { 0.0 });
                    let dyt = rng.gen_range(1..=2);
                    (LinearMapSpec::new(proj)?, random_full_rank(rng, k, dyt))
                }
                _ => {
                    let (k, m, dyt) = [(1, 2, 2), (1, 2, 1), (2, 3, 3), (1, 3, 3), (2, 3, 2)][rng.gen_range(0..5)];
                    (random_full_rank(rng, m, k), random_full_rank(rng, m, dyt))
                }
            };
            let Ok(sq0) = CartesianSquare::fiber_product(&f, &g, None) else { continue };
            let b = random_invertible(rng, sq0.g_tilde.source_dim());
            out.push(CartesianSquare::fiber_product(&f, &g, Some(&b))?);
            made += 1;
        }
    }
    Ok(out)
}

fn base_change(cx: &mut Ctx) -> Result<Outcome> {
    let sqs = squares(&mut cx.rng)?;
    let mut r: f64 = 0.0;
    for sq in &sqs {
        let phi = Val::Measure(random_measure_valuation(&mut cx.rng, sq.f.source_dim(), 2));
        let probes = probe_bodies(&mut cx.rng, sq.g.source_dim(), 6);
        r = r.max(base_change_residual(sq, &phi, &probes)?);
    }
    Ok(Outcome::new(r, sqs.len()))
}

fn base_change_flipped(cx: &mut Ctx) -> Result<Outcome> {
    let sqs = squares(&mut cx.rng)?;
    let mut r: f64 = 0.0;
    for sq in &sqs {
        let psi = Val::Measure(random_measure_valuation(&mut cx.rng, sq.g.source_dim(), 2));
        let probes = probe_bodies(&mut cx.rng, sq.f.source_dim(), 6);
        r = r.max(base_change2_residual(sq, &psi, &probes)?);
    }
    Ok(Outcome::new(r, sqs.len()))
}

fn density_factor_diagonal(_: &mut Ctx) -> Result<Outcome> {
    let one = LinearMapSpec::identity(1);
    let lambda = CartesianSquare::fiber_product(&one, &one, None)?.density_factor();
    Ok(Outcome::new((lambda - FRAC_1_SQRT_2).abs(), 1).with_value(lambda))
}

// even valuations in R³

fn fourier_even_involution(cx: &mut Ctx) -> Result<Outcome> {
    let a = Body3::polytope(random_polytope(&mut cx.rng, 3, 10))?;
    let inputs = [
        klain_function(&EvenValuation3::intrinsic_volume_k(1), Grassmannian::Lines)?,
        klain_function(&EvenValuation3::intrinsic_volume_k(2), Grassmannian::Planes)?,
        klain_function(&EvenValuation3::brightness(a)?, Grassmannian::Lines)?,
    ];
    let mut r: f64 = 0.0;
    for k in &inputs {
        let once = fourier_even(k);
        r = r
            .max(indicator(once.grassmannian() == k.grassmannian().complement()))
            .max(fourier_even(&once).max_diff(k));
    }
    Ok(Outcome::new(r, inputs.len()))
}

fn round_brightness(cx: &mut Ctx) -> Result<EvenValuation3> {
    // many small facets keep the kinks of the brightness function small
    Ok(EvenValuation3::brightness(random_round_polytope(&mut cx.rng, 1000, 1.0))?)
}

fn klain_restriction(cx: &mut Ctx) -> Result<Outcome> {
    let phi = round_brightness(cx)?;
    Ok(Outcome::new(restriction_residual(&phi, 50, &mut cx.rng)?, 50))
}

fn klain_equivariance(cx: &mut Ctx) -> Result<Outcome> {
    let phi = round_brightness(cx)?;
    Ok(Outcome::new(equivariance_residual(&phi, 50, &mut cx.rng)?, 50))
}

fn fourier_brightness(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..3 {
        let a = Body3::polytope(random_polytope(&mut cx.rng, 3, 10))?;
        r = r.max(fourier_brightness_residual(&a, 30, &mut cx.rng)?);
    }
    Ok(Outcome::new(r, 90))
}

fn klain_intrinsic_volumes(_: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for (k, gr) in [(1, Grassmannian::Lines), (2, Grassmannian::Planes)] {
        let kl = klain_function(&EvenValuation3::intrinsic_volume_k(k), gr)?;
        r = r.max(kl.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
    }
    Ok(Outcome::new(r, 2))
}

fn brightness_projection_area(cx: &mut Ctx) -> Result<Outcome> {
    let mut r: f64 = 0.0;
    for _ in 0..4 {
        let a = Body3::polytope(random_polytope(&mut cx.rng, 3, 9))?;
        for _ in 0..5 {
            let u = random_direction(&mut cx.rng);
            let exact = mixed_brightness(&Body3::segment(&u), &a)?;
            r = r.max(relative_gap(exact, brightness_by_fit(&a, &u)?));
        }
    }
    Ok(Outcome::new(r, 20))
}

// hard Lefschetz

fn v1_squared_plane(_: &mut Ctx) -> Result<Outcome> {
    let v = Valuation2::chi().mult_by_v1().mult_by_v1();
    Ok(Outcome::new(v.max_coeff_diff(&Valuation2::vol().scale(PI / 2.0)), 1))
}

fn coefficients(v: &Valuation2, band: usize) -> Vec<f64> {
    let f = v.density().with_band_limit(band);
    let mut out = vec![v.c0(), v.c2()];
    out.extend_from_slice(f.cos_coeffs());
    out.extend_from_slice(f.sin_coeffs());
    out
}

fn v1_conjugated_lambda_plane(cx: &mut Ctx) -> Result<Outcome> {
    let mut inputs = vec![Valuation2::chi()];
    for _ in 0..50 {
        inputs.push(random_valuation(&mut cx.rng, cx.config.band_limit).part(1));
    }
    let pairs: Vec<(Vec<f64>, Vec<f64>, Valuation2, Valuation2)> = inputs
        .iter()
        .map(|phi| {
            let lhs = phi.mult_by_v1();
            let rhs = phi.fourier().lambda_op().fourier_inverse();
            let band = cx.config.band_limit;
            (coefficients(&lhs, band), coefficients(&rhs, band), lhs, rhs)
        })
        .collect();
    // least-squares κ over all inputs at once
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b, _, _) in &pairs {
        num += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        den += b.iter().map(|y| y * y).sum::<f64>();
    }
    if den == 0.0 {
        bail!("F⁻¹ΛF vanished on every input");
    }
    let kappa = num / den;
    let r = pairs
        .iter()
        .map(|(_, _, lhs, rhs)| lhs.max_coeff_diff(&rhs.scale(kappa)))
        .fold(0.0, f64::max);
    Ok(Outcome::new(r, inputs.len()).with_value(kappa))
}

fn lambda_positive(_: &mut Ctx) -> Result<Outcome> {
    let lc = lambda_constants()?;
    let min = lc.c.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(indicator(min > 0.0), 3).with_value(min))
}

fn lambda_consistent(_: &mut Ctx) -> Result<Outcome> {
    let lc = lambda_constants()?;
    Ok(Outcome::new(lc.spread, 3))
}

fn lefschetz_nonzero(_: &mut Ctx) -> Result<Outcome> {
    let rep = lefschetz_invariant_check()?;
    let min = rep
        .lambda_powers
        .iter()
        .map(|(_, r)| r.abs())
        .fold(f64::INFINITY, f64::min);
    if rep.lambda_powers.len() != 2 {
        return Err(anyhow!("expected Λ powers for i = 2, 3"));
    }
    Ok(Outcome::new(indicator(min > 1e-9), 2).with_value(min))
}

fn v1_action_associative(_: &mut Ctx) -> Result<Outcome> {
    let rep = lefschetz_invariant_check()?;
    Ok(Outcome::new(rep.association_residual, 2).with_value(rep.kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_suites_known() {
        let reg = registry();
        let mut ids: Vec<_> = reg.iter().map(|c| c.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), reg.len());
        assert!(reg.iter().all(|c| SUITES.contains(&c.suite)));
        assert!(SUITES.iter().all(|s| !cases_for(s).unwrap().is_empty()));
        assert!(cases_for("nonsense").is_err());
    }

    #[test]
    fn overrides_follow_the_tolerance_class() {
        let cfg = Config {
            tol_exact: Some(0.5),
            tol_quad: Some(0.25),
            ..Config::default()
        };
        for c in registry() {
            let t = c.tolerance(&cfg);
            match c.class {
                TolClass::Exact => assert_eq!(t, 0.5),
                TolClass::Quad => assert_eq!(t, 0.25),
                TolClass::Pinned => assert_eq!(t, c.tolerance),
            }
        }
    }

    #[test]
    fn case_seeds_differ_and_repeat() {
        let reg = registry();
        assert_ne!(reg[0].seed(1), reg[1].seed(1));
        assert_ne!(reg[0].seed(1), reg[0].seed(2));
        assert_eq!(reg[0].seed(1), reg[0].seed(1));
    }

    #[test]
    fn fast_suites_are_deterministic() {
        let cfg = Config {
            suite: "fourier2d".into(),
            ..Config::default()
        };
        let a = verify(&cfg).unwrap();
        let b = verify(&cfg).unwrap();
        assert_eq!(a.digest, b.digest);
        assert!(a.case("fourier-square-witness").unwrap().pass);
    }
}
