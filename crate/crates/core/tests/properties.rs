use proptest::prelude::*;

use rpn_energy::deformations::{DilationMap, ProjectiveDeformation};
use rpn_energy::geometry::{lift, random_isometry, sample_uniform_sphere, SpherePoint, TangentFrame};
use rpn_energy::maps::{differential, identity, polar_warp, SmoothMap};
use rpn_energy::Vector;

fn point(n: usize, seed: u64, i: u64) -> SpherePoint {
    sample_uniform_sphere(n, seed, i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_group_law(t1 in 0.2f64..8.0, t2 in 0.2f64..8.0, seed in any::<u64>()) {
        let p = point(3, seed, 0);
        let (a, b) = (DilationMap::new(t1, &p).unwrap(), DilationMap::new(t2, &p).unwrap());
        let ab = DilationMap::new(t1 * t2, &p).unwrap();
        for i in 1..20 {
            let x = point(3, seed, i);
            prop_assert!((a.apply(&b.apply(&x)).coords() - ab.apply(&x).coords()).norm() < 1e-9);
        }
    }

    #[test]
    fn dilation_inverse_is_reciprocal(t in 0.1f64..10.0, seed in any::<u64>()) {
        let p = point(2, seed, 0);
        let (a, inv) = (DilationMap::new(t, &p).unwrap(), DilationMap::new(1.0 / t, &p).unwrap());
        for i in 1..20 {
            let x = point(2, seed, i);
            prop_assert!((inv.apply(&a.apply(&x)).coords() - x.coords()).norm() < 1e-8);
        }
    }

    #[test]
    fn energy_density_is_frame_independent(seed in any::<u64>(), n in 2usize..5) {
        let f = polar_warp(n, 2.5).unwrap();
        let x = point(n, seed, 0);
        let frame = TangentFrame::standard(&x);
        let q = random_isometry(n - 1, seed, 1);
        let rotated = frame.rotated(&q).unwrap();
        let a = differential(&f, &x, &frame).unwrap().energy_density();
        let b = differential(&f, &x, &rotated).unwrap().energy_density();
        prop_assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn deformation_output_is_in_the_upper_hemisphere(t in 1.0f64..100.0, seed in any::<u64>()) {
        let theta = ProjectiveDeformation::new(4, t).unwrap();
        for i in 0..20 {
            let x = point(4, seed, i);
            let y = theta.apply(&x);
            prop_assert!(y.dot(theta.pole()) >= -1e-15);
            prop_assert!((y.coords().norm() - 1.0).abs() < 1e-12);
            let other = theta.apply(&lift(&x, theta.pole()).antipode());
            prop_assert_eq!(y.coords(), other.coords());
        }
    }

    #[test]
    fn isometries_preserve_the_identity_density(seed in any::<u64>()) {
        let q = random_isometry(3, seed, 0);
        let f = SmoothMap::linear(q).unwrap();
        let x = point(3, seed, 1);
        let e = differential(&f, &x, &TangentFrame::standard(&x)).unwrap().energy_density();
        let e0 = differential(&identity(3).unwrap(), &x, &TangentFrame::standard(&x)).unwrap().energy_density();
        prop_assert!((e - e0).abs() < 1e-12);
        prop_assert!((e - 1.5).abs() < 1e-12);
    }
}

#[test]
fn normalize_rejects_zero() {
    assert!(SpherePoint::normalize(Vector::zeros(3)).is_err());
}
