//! Cross-checks of the Fourier-space vector field and the lattice sums
//! against independent computations.

use std::sync::Arc;

use galerkin_core::flow::{integrate, IntegratorConfig, Scheme};
use galerkin_core::lattice::{
    convolution_lattice_sum, estimate_condition_d_bound, estimate_cq, estimate_estmlin_constant,
    estmlin_bound_check, ZetaCache,
};
use galerkin_core::sampling::{random_field, random_in_envelope, substream};
use galerkin_core::spectral::{
    advection_grid, cvec, force_enstrophy_norm, nonlinear_term, nonlinear_term_grid, pressure_coefficients,
    rhs,
};
use galerkin_core::{Dim, ForceField, Mode, ModeSet, PhysicsParams, SpectralField};
use num_complex::Complex64;

fn max_component_gap(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .flat_map(|(x, y)| (0..3).map(move |c| (x[c] - y[c]).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn convolution_matches_grid_on_small_balls() {
    for (dim, r, fields) in [(Dim::Two, 4.0, 20), (Dim::Three, 3.0, 5)] {
        let set = Arc::new(ModeSet::ball(dim, r));
        for s in 0..fields {
            let u = random_in_envelope(&set, &mut substream(100, s), 1.0, 1.0);
            let gap = max_component_gap(&nonlinear_term(&u, &set), &nonlinear_term_grid(&u, &set, None).unwrap());
            assert!(gap < 1e-10, "{dim} radius {r}: {gap}");
        }
    }
}

#[test]
fn convolution_matches_grid_on_radius_eight() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 8.0));
    for s in 0..3 {
        let u = random_in_envelope(&set, &mut substream(101, s), 1.0, 1.0);
        let gap = max_component_gap(&nonlinear_term(&u, &set), &nonlinear_term_grid(&u, &set, None).unwrap());
        assert!(gap < 1e-10, "{gap}");
    }
}

#[test]
fn grid_oversampling_changes_nothing() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 3.0));
    let u = random_in_envelope(&set, &mut substream(102, 0), 1.0, 1.0);
    let a = nonlinear_term_grid(&u, &set, None).unwrap();
    let b = nonlinear_term_grid(&u, &set, Some(17)).unwrap();
    assert!(max_component_gap(&a, &b) < 1e-12);
}

#[test]
fn pressure_balances_gradient_part_of_advection() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 4.0));
    let u = random_in_envelope(&set, &mut substream(103, 0), 1.0, 1.0);
    let f = ForceField::zero(Dim::Two);
    let p = pressure_coefficients(&u, &f).unwrap();
    let adv = advection_grid(&u, &set, None).unwrap();
    for ((k, pk), a) in p.iter().zip(&adv) {
        let gradient = cvec::scale(&k.as_f64().map(Complex64::from), Complex64::new(0.0, 1.0) * pk);
        let residual = cvec::add(&gradient, &cvec::longitudinal(k, a));
        assert!(cvec::norm(&residual) < 1e-8, "{k}: {}", cvec::norm(&residual));
    }
}

/// Neumaier summation over values sorted by magnitude.
fn careful_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

#[test]
fn enstrophy_and_force_norm_match_recomputation() {
    let set = Arc::new(ModeSet::ball(Dim::Three, 4.0));
    for s in 0..5 {
        let u = random_field(&set, &mut substream(104, s), 1.0, |k| 1.0 / k.norm());
        let terms = u
            .iter()
            .flat_map(|(k, v)| v.iter().map(move |c| k.norm_sq() as f64 * c.norm_sqr()))
            .collect();
        let v = careful_sum(terms);
        assert!((u.enstrophy() - v).abs() <= 1e-13 * v);
        let f = ForceField::from_field(u);
        assert!((force_enstrophy_norm(&f) - v.sqrt()).abs() <= 1e-13 * v.sqrt());
    }
}

#[test]
fn vector_field_is_the_derivative_of_a_short_step() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 4.0));
    let u = random_in_envelope(&set, &mut substream(105, 0), 1.0, 2.0);
    let f = ForceField::from_field(random_in_envelope(&set, &mut substream(105, 1), 0.5, 1.0));
    let p = PhysicsParams::new(0.3, Dim::Two).unwrap();
    let field = rhs(&u, &f, &p, &set);
    for h in [1e-4, 1e-5] {
        let cfg = IntegratorConfig::new(h, h).with_scheme(Scheme::Rk4Plain);
        let step = integrate(&u, &f, &p, &cfg).unwrap();
        let quotient = step.last().sub(&u).scaled(1.0 / h);
        assert!(quotient.distance(&field) < 50.0 * h * field.norm());
    }
}

#[test]
fn lattice_sum_tail_covers_radius_doubling() {
    let (v64, t64) = convolution_lattice_sum(&Mode::d2(1, 0).unwrap(), 4.0, 64).unwrap();
    let (v128, _) = convolution_lattice_sum(&Mode::d2(1, 0).unwrap(), 4.0, 128).unwrap();
    assert!(v64 > 0.0 && v128 >= v64 && v128 - v64 < t64);
    let k = Mode::d3(1, 1, 1).unwrap();
    let (v32, t32) = convolution_lattice_sum(&k, 4.0, 32).unwrap();
    let (v64, _) = convolution_lattice_sum(&k, 4.0, 64).unwrap();
    assert!(v32 + t32 >= v64 && v64 >= v32);
}

#[test]
fn lattice_sum_matches_brute_force() {
    let k = Mode::d2(2, 1).unwrap();
    let (v, _) = convolution_lattice_sum(&k, 4.0, 10).unwrap();
    let mut brute = 0.0;
    for x in -10i64..=10 {
        for y in -10i64..=10 {
            let a = (x * x + y * y) as f64;
            let b = ((2 - x).pow(2) + (1 - y).pow(2)) as f64;
            if a > 0.0 && a <= 100.0 && b > 0.0 {
                brute += 1.0 / (a * a * b * b);
            }
        }
    }
    assert!((v - brute).abs() < 1e-14 * brute);
}

#[test]
fn scan_supremum_grows_with_range() {
    let small = estimate_cq(Dim::Two, 4.0, 10, 24).unwrap();
    let large = estimate_cq(Dim::Two, 4.0, 40, 24).unwrap();
    assert!(small.value <= large.value);
    let three = estimate_cq(Dim::Three, 3.6, 8, 16).unwrap();
    assert!(three.value.is_finite() && three.value > 0.0 && three.tail_bound > 0.0);
    assert!(estimate_cq(Dim::Two, 2.0, 4, 8).is_err());
}

#[test]
fn enstrophy_modulus_constant_is_stable() {
    let a = estimate_estmlin_constant(Dim::Two, 4.0, 0.5, 12, 200, 7).unwrap();
    let b = estimate_estmlin_constant(Dim::Two, 4.0, 0.5, 12, 400, 7).unwrap();
    assert!(a.value.is_finite() && a.value > 0.0);
    assert!((b.value - a.value).abs() <= 0.1 * a.value, "{} vs {}", a.value, b.value);
}

#[test]
fn enstrophy_modulus_check_degenerate_fields() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 6.0));
    let zero = SpectralField::zeros(Arc::clone(&set));
    let r = estmlin_bound_check(&zero, 1.0, 1.0, 4.0, 0.5, &set).unwrap();
    assert_eq!(r.max_ratio, 0.0);
    let pair = SpectralField::single_pair(
        Arc::clone(&set),
        Mode::d2(1, 1).unwrap(),
        [Complex64::new(0.1, 0.0), Complex64::new(-0.1, 0.0), 0.0.into()],
    )
    .unwrap();
    let r = estmlin_bound_check(&pair, 1.0, 1.0, 4.0, 0.5, &set).unwrap();
    assert_eq!(r.max_ratio, 0.0);
    // Outside the envelope or above V0 is a precondition error.
    assert!(estmlin_bound_check(&pair.scaled(100.0), 1e6, 1.0, 4.0, 0.5, &set).is_err());
    assert!(estmlin_bound_check(&pair, 1e-6, 1.0, 4.0, 0.5, &set).is_err());
}

#[test]
fn condition_d_scan_is_exhaustive_past_the_vertex() {
    let mut cache = ZetaCache::new();
    let a = estimate_condition_d_bound(1.0, 4.0, Dim::Two, 1.0, 50, &mut cache).unwrap();
    let b = estimate_condition_d_bound(1.0, 4.0, Dim::Two, 1.0, 200, &mut cache).unwrap();
    assert!(a.exhaustive && a.l == b.l);
    let slope = a.c_gamma.reported() + 2.0 * a.c_gamma_minus_one.reported();
    assert!((a.vertex - slope / 2.0).abs() < 1e-12);
    // Large viscosity puts the vertex left of |k| = 1.
    let c = estimate_condition_d_bound(1.0, 4.0, Dim::Two, 100.0, 50, &mut cache).unwrap();
    assert_eq!(c.norm_at_max, 1.0);
    assert!((c.l - (slope - 100.0)).abs() < 1e-12);
    assert!(estimate_condition_d_bound(1.0, 3.0, Dim::Two, 1.0, 50, &mut cache).is_err());
}
