use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use valf_core::body3::Body3;
use valf_core::even3d::{fourier_even, intrinsic_volume, EvenValuation3, Grassmannian, KlainFunction, SphereGrid};
use valf_core::functorial::{probe_bodies, pullback, random_measure_valuation, relative_gap, Val, Valuation};
use valf_core::io::Document;
use valf_core::linmap::{random_full_rank, random_invertible, LinearMapSpec};
use valf_core::planar::{mixed_volume, mixed_volume_by_fit, random_polygon, random_smooth_body};
use valf_core::polytope::random_polytope;
use valf_core::val1::Valuation1;
use valf_core::val2::{random_valuation, Valuation2};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn support_function_is_additive(seed in any::<u64>(), theta in 0.0..(2.0 * PI)) {
        let mut r = rng(seed);
        let a = random_smooth_body(&mut r, 6, 0.8);
        let b = random_smooth_body(&mut r, 6, 0.8);
        let s = a.minkowski_sum(&b, 256);
        prop_assert!((s.support_at(theta) - a.support_at(theta) - b.support_at(theta)).abs() < 1e-12);
        let p = random_polygon(&mut r, 5);
        let q = random_polygon(&mut r, 7);
        let s = p.minkowski_sum(&q, 256);
        prop_assert!((s.support_at(theta) - p.support_at(theta) - q.support_at(theta)).abs() < 1e-12);
    }

    #[test]
    fn mixed_area_is_symmetric_and_obeys_minkowski(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_polygon(&mut r, 6);
        let b = random_polygon(&mut r, 4);
        let v = mixed_volume(&a, &b);
        prop_assert!((v - mixed_volume(&b, &a)).abs() < 1e-12 * (1.0 + v.abs()));
        prop_assert!((mixed_volume(&a, &a) - a.area()).abs() < 1e-12);
        prop_assert!(v * v >= a.area() * b.area() * (1.0 - 1e-12));
        let fit = mixed_volume_by_fit(&a, &b, 256).unwrap();
        prop_assert!((fit - v).abs() < 1e-10 * (1.0 + v));
    }

    #[test]
    fn body_measures_convolve_by_minkowski_addition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_smooth_body(&mut r, 8, 0.9);
        let b = random_smooth_body(&mut r, 8, 0.9);
        let lhs = Valuation2::from_body_measure(&a, 16).convolve(&Valuation2::from_body_measure(&b, 16));
        let rhs = Valuation2::from_body_measure(&a.minkowski_sum(&b, 512), 16);
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-10);
    }

    #[test]
    fn fourier_has_order_four(seed in any::<u64>()) {
        let phi = random_valuation(&mut rng(seed), 16);
        let f2 = phi.fourier().fourier();
        prop_assert!(f2.max_coeff_diff(&phi.euler()) < 1e-12);
        prop_assert!(f2.fourier().fourier().max_coeff_diff(&phi) < 1e-12);
        prop_assert!(phi.fourier().fourier_inverse().max_coeff_diff(&phi) < 1e-12);
    }

    #[test]
    fn fourier_is_a_homomorphism_on_even_valuations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_valuation(&mut r, 12).even_part();
        let b = random_valuation(&mut r, 12).even_part();
        let lhs = a.product(&b).fourier();
        let rhs = a.fourier().convolve(&b.fourier());
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-10 * (1.0 + lhs.max_abs_coeff()));
    }

    #[test]
    fn fourier_is_a_homomorphism_onto_oriented_convolution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_valuation(&mut r, 12);
        let b = random_valuation(&mut r, 12);
        let lhs = a.product(&b).fourier();
        let rhs = a.fourier().convolve_oriented(&b.fourier());
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-10 * (1.0 + lhs.max_abs_coeff()));
    }

    #[test]
    fn line_valuations_form_graded_algebras(c in prop::array::uniform4(-3.0..3.0f64)) {
        let a = Valuation1::new(c[0], c[1]);
        let b = Valuation1::new(c[2], c[3]);
        prop_assert!(a.product(&Valuation1::chi()).max_diff(&a) == 0.0);
        prop_assert!(a.convolve(&Valuation1::vol()).max_diff(&a) == 0.0);
        let lhs = a.product(&b).fourier();
        let rhs = a.fourier().convolve(&b.fourier());
        prop_assert!(lhs.max_diff(&rhs) < 1e-14);
        prop_assert!(a.fourier().fourier().max_diff(&a) == 0.0);
    }

    #[test]
    fn pullback_is_contravariant(seed in any::<u64>(), dims in (1usize..=3, 1usize..=3, 1usize..=3)) {
        let (l, m, n) = dims;
        let mut r = rng(seed);
        let f = random_full_rank(&mut r, m, l);
        let g = random_full_rank(&mut r, n, m);
        let phi: Val = random_measure_valuation(&mut r, n, 2).into();
        let gf = g.compose(&f).unwrap();
        let lhs = pullback(&gf, &phi).unwrap();
        let rhs = pullback(&f, &pullback(&g, &phi).unwrap()).unwrap();
        for k in probe_bodies(&mut r, l, 6) {
            let (x, y) = (lhs.evaluate(&k).unwrap(), rhs.evaluate(&k).unwrap());
            prop_assert!(relative_gap(x, y) < 1e-10, "{x} {y}");
        }
    }

    #[test]
    fn pullback_by_an_invertible_map_matches_evaluation(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let g = LinearMapSpec::new(random_invertible(&mut r, n)).unwrap();
        let phi: Val = random_measure_valuation(&mut r, n, 2).into();
        let pulled = pullback(&g, &phi).unwrap();
        for k in probe_bodies(&mut r, n, 5) {
            let direct = phi.evaluate(&k.map(g.matrix()).unwrap()).unwrap();
            prop_assert!(relative_gap(pulled.evaluate(&k).unwrap(), direct) < 1e-10);
        }
    }

    #[test]
    fn intrinsic_volumes_are_homogeneous(seed in any::<u64>(), s in 0.2..3.0f64) {
        let mut r = rng(seed);
        let n = 5 + (seed % 10) as usize;
        let k = Body3::new(random_polytope(&mut r, 3, n), 0.3).unwrap();
        let ks = k.scaled(s);
        for i in 0..4 {
            let phi = EvenValuation3::intrinsic_volume_k(i);
            let (a, b) = (phi.evaluate(&k).unwrap(), phi.evaluate(&ks).unwrap());
            prop_assert!((b - s.powi(i as i32) * a).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn even_fourier_is_an_involution(seed in any::<u64>(), deg in 1usize..=2) {
        let mut r = rng(seed);
        let gr = if deg == 1 { Grassmannian::Lines } else { Grassmannian::Planes };
        let m = nalgebra::Matrix3::from_fn(|_, _| rand::Rng::gen_range(&mut r, -1.0..1.0));
        let w = nalgebra::Vector3::from_fn(|_, _| rand::Rng::gen_range(&mut r, -1.0..1.0));
        let values: Vec<f64> = SphereGrid::ico4()
            .vertices
            .iter()
            .map(|u| u.dot(&(m * u)) + u.dot(&w).powi(4))
            .collect();
        let k = KlainFunction::from_values(gr, values).unwrap();
        let back = fourier_even(&fourier_even(&k));
        prop_assert!(back.grassmannian() == gr);
        prop_assert!(back.max_diff(&k) == 0.0);
    }

    #[test]
    fn documents_roundtrip_exactly(seed in any::<u64>()) {
        let phi = random_valuation(&mut rng(seed), 16);
        let doc = Document::valuation2(&phi);
        let back = Document::parse(&doc.to_json()).unwrap().into_valuation2().unwrap();
        prop_assert!(back == phi);
    }
}

#[test]
fn steiner_coefficients_match_the_parallel_body_fit() {
    let mut r = rng(7);
    for n in [6, 9, 14] {
        let k = Body3::new(random_polytope(&mut r, 3, n), 0.2).unwrap();
        for i in 0..4 {
            let exact = EvenValuation3::intrinsic_volume_k(i).evaluate(&k).unwrap();
            let fit = intrinsic_volume(i, &k).unwrap();
            assert!((exact - fit).abs() < 1e-8 * (1.0 + exact.abs()), "V_{i}: {exact} vs {fit}");
        }
    }
}

#[test]
fn planar_square_through_the_generic_body_path() {
    let sq = valf_core::polytope::Body::Polytope(valf_core::polytope::Polytope::axis_box(&[1.0, 1.0]));
    let phi: Val = Val::Plane(Valuation2::v1());
    // V₁ of the unit square is half its perimeter
    assert!((phi.evaluate(&sq).unwrap() - 2.0).abs() < 1e-14);
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let turned = sq.map(&rot).unwrap();
    assert!((phi.evaluate(&turned).unwrap() - 2.0).abs() < 1e-14);
}
