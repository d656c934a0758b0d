//! Structural invariants checked over generated inputs.

use std::sync::Arc;

use galerkin_core::flow::{lognorm_euclidean, lognorm_gershgorin, project};
use galerkin_core::lattice::{convolution_lattice_sum, convolution_scan, estimate_cq, estmlin_bound_check};
use galerkin_core::sampling::{random_field, random_in_envelope, substream};
use galerkin_core::spectral::{cvec, enstrophy_rate, nonlinear_term, nonlinear_term_grid};
use galerkin_core::{Dim, Mode, ModeSet, SpectralField};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dim() -> impl Strategy<Value = Dim> {
    prop_oneof![Just(Dim::Two), Just(Dim::Three)]
}

fn field(dim: Dim, radius: f64, seed: u64) -> SpectralField {
    let set = Arc::new(ModeSet::ball(dim, radius));
    random_field(&set, &mut substream(seed, 0), 1.0, |k| 1.0 / k.norm_sq() as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nonlinear_term_is_admissible(d in dim(), radius in 1.0f64..4.5, seed in any::<u64>()) {
        let u = field(d, radius, seed);
        let n = nonlinear_term(&u, u.modes());
        let (residual, _) = n.invariant_residual();
        prop_assert!(residual < 1e-13 * (1.0 + n.norm()));
    }

    #[test]
    fn convolution_agrees_with_grid(radius in 1.0f64..3.5, seed in any::<u64>()) {
        let u = field(Dim::Two, radius, seed);
        let a = nonlinear_term(&u, u.modes());
        let b = nonlinear_term_grid(&u, u.modes(), None).unwrap();
        prop_assert!(a.distance(&b) < 1e-11);
    }

    #[test]
    fn nonlinearity_conserves_enstrophy_in_two_dimensions(radius in 1.5f64..6.0, seed in any::<u64>()) {
        let u = field(Dim::Two, radius, seed);
        let n = nonlinear_term(&u, u.modes());
        prop_assert!(enstrophy_rate(&u, &n).abs() < 1e-9 * (1.0 + u.enstrophy()));
    }

    #[test]
    fn projection_is_idempotent_and_contracting(
        d in dim(), outer in 2.0f64..4.5, frac in 0.2f64..1.0, seed in any::<u64>()
    ) {
        let u = field(d, outer, seed);
        let small = Arc::new(ModeSet::ball(d, outer * frac));
        let once = project(&u, &small);
        prop_assert_eq!(&project(&once, &small), &once);
        prop_assert!(once.norm() <= u.norm());
        prop_assert_eq!(&project(&u, u.modes()), &u);
    }

    #[test]
    fn enstrophy_ignores_reflection(d in dim(), radius in 1.0f64..4.0, seed in any::<u64>()) {
        let u = field(d, radius, seed);
        let set = Arc::clone(u.modes());
        let reflected: Vec<_> = (0..set.len()).map(|i| u.coeffs()[set.negation(i)]).collect();
        let w = SpectralField::new(set, reflected).unwrap();
        prop_assert!((w.enstrophy() - u.enstrophy()).abs() <= 1e-14 * u.enstrophy());
    }

    #[test]
    fn gershgorin_encloses_the_symmetric_spectrum(n in 1usize..12, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = substream(seed, 1);
        let j = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        prop_assert!(lognorm_gershgorin(&j) >= lognorm_euclidean(&j) - 1e-12);
    }

    #[test]
    fn enstrophy_modulus_ratio_is_scale_free(seed in any::<u64>(), c in 0.1f64..10.0) {
        let set = Arc::new(ModeSet::ball(Dim::Two, 6.0));
        let u = random_in_envelope(&set, &mut substream(seed, 2), 1.0, 4.0);
        let v0 = u.enstrophy();
        let a = estmlin_bound_check(&u, v0, 1.0, 4.0, 0.5, &set).unwrap();
        let b = estmlin_bound_check(&u.scaled(c), c * c * v0, c, 4.0, 0.5, &set).unwrap();
        prop_assert!((a.max_ratio - b.max_ratio).abs() <= 1e-12 * a.max_ratio.max(1e-300));
        prop_assert!(a.stage_bounds_hold());
    }

    #[test]
    fn lattice_sums_grow_with_radius_and_are_even(x in -3i32..=3, y in -3i32..=3, r in 9u32..20) {
        prop_assume!((x, y) != (0, 0));
        let k = Mode::d2(x, y).unwrap();
        let neg = Mode::d2(-x, -y).unwrap();
        let (a, ta) = convolution_lattice_sum(&k, 4.0, r).unwrap();
        let (b, _) = convolution_lattice_sum(&k, 4.0, r + 5).unwrap();
        prop_assert!(b >= a && b <= a + ta);
        prop_assert_eq!(convolution_lattice_sum(&neg, 4.0, r).unwrap().0, a);
    }
}

#[test]
fn scan_supremum_dominates_every_scanned_mode() {
    let scan = convolution_scan(Dim::Two, 4.0, 12, 24).unwrap();
    let est = estimate_cq(Dim::Two, 4.0, 12, 24).unwrap();
    for e in &scan {
        assert!(e.scaled_value <= est.value);
    }
    let top = scan.iter().find(|e| Some(e.mode) == est.mode_of_supremum).unwrap();
    assert_eq!(top.scaled_value, est.value);
}

#[test]
fn leray_projection_removes_the_longitudinal_part() {
    let k = Mode::d3(1, -2, 2).unwrap();
    let v = [0.3.into(), (-1.0).into(), 2.0.into()];
    let kf = k.as_f64();
    assert!(cvec::dot_k(&cvec::leray_project(&k, &v), &kf).norm() < 1e-15);
}
