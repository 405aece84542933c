use std::f64::consts::TAU;

use kspectral::exec::{set_mode, Mode};
use kspectral::geometry::{numerical_radius, numerical_range_boundary};
use kspectral::kconst::{certify, k_r_piecewise, theorem2_k, RegionKind};
use kspectral::matrix::market::{self, Layout};
use kspectral::matrix::random::{gaussian_matrix, random_unitary, rng};
use kspectral::minimax::poly_minmax_constrained;
use kspectral::regions::{gauss_integral, QuadratureSpec, Region};
use kspectral::{ComplexMatrix, C64};
use proptest::prelude::*;

fn matrix(n: usize, seed: u64) -> ComplexMatrix {
    gaussian_matrix(n, &mut rng(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn numerical_radius_sits_between_bounds(n in 1usize..8, seed in any::<u64>()) {
        let a = matrix(n, seed);
        let w = numerical_radius(&a);
        let norm = a.operator_norm();
        let rho = a.spectral_radius().unwrap();
        prop_assert!(w <= norm * (1.0 + 1e-10));
        prop_assert!(w >= norm / 2.0 * (1.0 - 1e-10));
        prop_assert!(w >= rho * (1.0 - 1e-8));
    }

    #[test]
    fn numerical_radius_is_unitarily_invariant(n in 1usize..7, seed in any::<u64>()) {
        let a = matrix(n, seed);
        let u = random_unitary(n, &mut rng(seed ^ 1));
        let b = &(&u.adjoint() * &a) * &u;
        let (wa, wb) = (numerical_radius(&a), numerical_radius(&b));
        prop_assert!((wa - wb).abs() <= 1e-9 * wa.max(1.0));
    }

    #[test]
    fn boundary_points_lie_in_the_numerical_range(n in 2usize..7, seed in any::<u64>()) {
        let a = matrix(n, seed);
        let nb = numerical_range_boundary(&a, 48).unwrap();
        let w = numerical_radius(&a);
        for p in &nb.points {
            prop_assert!(p.norm() <= w * (1.0 + 1e-9));
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise(n in 2usize..7, seed in any::<u64>()) {
        let a = matrix(n, seed);
        set_mode(Mode::Sequential);
        let seq = numerical_range_boundary(&a, 32).unwrap().points;
        set_mode(Mode::Parallel);
        let par = numerical_range_boundary(&a, 32).unwrap().points;
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn matrix_market_round_trip_is_exact(n in 1usize..6, seed in any::<u64>(), array in any::<bool>()) {
        let a = matrix(n, seed);
        let layout = if array { Layout::Array } else { Layout::Coordinate };
        let mut buf = Vec::new();
        market::write(&mut buf, &a, layout).unwrap();
        let back = market::read(buf.as_slice()).unwrap();
        prop_assert_eq!(back.as_matrix(), a.as_matrix());
    }

    #[test]
    fn gauss_integral_is_two_inside_a_disk(
        re in -3.0f64..3.0, im in -3.0f64..3.0, radius in 0.1f64..5.0, t in 0.0f64..0.9, phi in 0.0f64..TAU,
    ) {
        let center = C64::new(re, im);
        let disk = Region::disk(center, radius).unwrap();
        let z = center + C64::from_polar(t * radius, phi);
        prop_assert!((gauss_integral(&disk, z) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn region_json_round_trips(inner in 0.1f64..1.0, gap in 0.1f64..3.0, re in -2.0f64..2.0, density in 1usize..3) {
        let region = Region::annulus_about(C64::new(re, 0.5), inner, inner + gap)
            .unwrap()
            .with_spec(QuadratureSpec::default().with_density(density));
        let back = Region::from_json(&region.to_json().unwrap()).unwrap();
        prop_assert!(back == region);
    }

    #[test]
    fn theorem2_k_is_monotone(c1 in 0.0f64..5.0, c2 in 0.0f64..5.0, g in 0.0f64..5.0, bump in 0.0f64..1.0) {
        let k = theorem2_k(c1, c2, g).unwrap();
        prop_assert!(k >= 2.0 * c2);
        prop_assert!(theorem2_k(c1 + bump, c2, g).unwrap() >= k);
        prop_assert!(theorem2_k(c1, c2 + bump, g).unwrap() >= k);
        prop_assert!(theorem2_k(c1, c2, g + bump).unwrap() >= k);
    }

    #[test]
    fn k_r_catalog_stays_between_bounds(r in 1.01f64..50.0) {
        let k = k_r_piecewise(r).unwrap();
        prop_assert!(k >= 2.0 && k <= 3.0 + 10f64.sqrt() + 1e-12);
    }

    #[test]
    fn contractions_get_von_neumann(n in 1usize..6, seed in any::<u64>(), slack in 1.01f64..3.0) {
        let a = matrix(n, seed);
        let disk = Region::disk(C64::new(0.0, 0.0), a.operator_norm() * slack).unwrap();
        let cert = certify(&a, &disk).unwrap();
        prop_assert_eq!(cert.k, 1.0);
        prop_assert_eq!(cert.region_kind, RegionKind::Disk);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constrained_minmax_matches_the_disk_value(
        dist in 1.5f64..4.0, phi in 0.0f64..TAU, radius in 0.3f64..1.2, k in 1usize..6,
    ) {
        let center = C64::from_polar(dist, phi);
        let disk = Region::disk(center, radius).unwrap();
        let res = poly_minmax_constrained(&disk, k, C64::new(0.0, 0.0)).unwrap();
        let exact = (radius / dist).powi(k as i32);
        prop_assert!(res.value <= 1.0 + 1e-12);
        prop_assert!((res.value - exact).abs() <= 1e-6 * exact);
        prop_assert!((res.eval(C64::new(0.0, 0.0)) - 1.0).norm() < 1e-10);
    }
}
