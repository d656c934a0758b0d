//! Integrator accuracy, Jacobians and the trajectory-level bounds.

use std::sync::Arc;

use galerkin_core::flow::{
    enstrophy_inequality_check, galerkin_difference_experiment, integrate, jacobian, lipschitz_experiment,
    lognorm_euclidean, lognorm_gershgorin, IntegratorConfig, RealCoordinates, Scheme,
};
use galerkin_core::lattice::{estimate_condition_d_bound, ZetaCache};
use galerkin_core::sampling::{random_in_envelope, substream, unit_perp};
use galerkin_core::spectral::{cvec, rhs};
use galerkin_core::{Dim, ForceField, Mode, ModeSet, PhysicsParams, SpectralField};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn pair(set: &Arc<ModeSet>, k: Mode, seed: u64, amp: f64) -> SpectralField {
    let v = cvec::scale_re(&unit_perp(&k, &mut substream(seed, 0)), amp);
    SpectralField::single_pair(Arc::clone(set), k, v).unwrap()
}

#[test]
fn jacobian_matches_central_differences() {
    for (dim, r) in [(Dim::Two, 4.0), (Dim::Three, 2.0)] {
        let set = Arc::new(ModeSet::ball(dim, r));
        let p = PhysicsParams::new(0.4, dim).unwrap();
        let f = ForceField::zero(dim);
        let coords = RealCoordinates::new(&set);
        for s in 0..3 {
            let u = random_in_envelope(&set, &mut substream(200, s), 1.0, 2.0);
            let x = coords.to_real(&u);
            let dir = coords.to_real(&random_in_envelope(&set, &mut substream(201, s), 1.0, 2.0));
            let h = 1e-6;
            let at = |y: DVector<f64>| coords.to_real(&rhs(&coords.to_field(&y), &f, &p, &set));
            let fd = (at(&x + &dir * h) - at(&x - &dir * h)) / (2.0 * h);
            let exact = jacobian(&u, &p) * &dir;
            assert!((&fd - &exact).norm() <= 1e-7 * exact.norm(), "{dim}");
        }
    }
}

#[test]
fn euclidean_log_norm_dominates_rayleigh_quotients() {
    let mut rng = substream(202, 0);
    let j = DMatrix::from_fn(50, 50, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mu = lognorm_euclidean(&j);
    assert!(lognorm_gershgorin(&j) >= mu);
    for _ in 0..100 {
        let x = DVector::from_fn(50, |_, _| rng.random::<f64>() - 0.5);
        assert!(x.dot(&(&j * &x)) / x.dot(&x) <= mu + 1e-12);
    }
}

#[test]
fn viscous_decay_is_exact_for_single_pairs() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 3.0));
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let f = ForceField::zero(Dim::Two);
    for k in [Mode::d2(1, 0).unwrap(), Mode::d2(1, 1).unwrap(), Mode::d2(2, 1).unwrap()] {
        let u0 = pair(&set, k, 203, 0.7);
        let end = integrate(&u0, &f, &p, &IntegratorConfig::new(0.05, 1.0)).unwrap();
        let i = set.position(&k).unwrap();
        let expect = cvec::scale_re(&u0.coeffs()[i], (-(k.norm_sq() as f64)).exp());
        let err = cvec::norm(&cvec::sub(&end.last().coeffs()[i], &expect));
        assert!(err <= 1e-12 * cvec::norm(&expect));
    }
}

#[test]
fn linear_part_is_exact_for_any_step() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 5.0));
    let p = PhysicsParams::new(0.8, Dim::Two).unwrap();
    let u0 = random_in_envelope(&set, &mut substream(204, 0), 1.0, 1.0);
    for h in [0.5, 0.1, 0.01] {
        let cfg = IntegratorConfig::new(h, 1.0).linear_only();
        let end = integrate(&u0, &ForceField::zero(Dim::Two), &p, &cfg).unwrap();
        for ((k, a), b) in u0.iter().zip(end.last().coeffs()) {
            let expect = cvec::scale_re(a, (-0.8 * k.norm_sq() as f64).exp());
            assert!(cvec::norm(&cvec::sub(b, &expect)) <= 1e-13 * cvec::norm(a).max(1e-300));
        }
    }
}

#[test]
fn forced_pair_at_its_fixed_point_is_stationary() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 3.0));
    let p = PhysicsParams::new(0.5, Dim::Two).unwrap();
    let k = Mode::d2(1, 2).unwrap();
    let force = pair(&set, k, 205, 1.0);
    let u0 = force.scaled(1.0 / (0.5 * 5.0));
    let f = ForceField::from_field(force);
    let traj = integrate(&u0, &f, &p, &IntegratorConfig::new(0.01, 1.0).with_stride(10)).unwrap();
    for u in &traj.states {
        assert!(u.distance(&u0) < 1e-10);
    }
}

#[test]
fn flow_composes() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 5.0));
    let p = PhysicsParams::new(0.5, Dim::Two).unwrap();
    let f = ForceField::from_field(pair(&set, Mode::d2(1, 0).unwrap(), 206, 0.3));
    let x = random_in_envelope(&set, &mut substream(207, 0), 1.0, 2.0);
    let half = IntegratorConfig::new(0.01, 0.5);
    let a = integrate(integrate(&x, &f, &p, &half).unwrap().last(), &f, &p, &half).unwrap();
    let b = integrate(&x, &f, &p, &IntegratorConfig::new(0.01, 1.0)).unwrap();
    assert!(a.last().distance(b.last()) < 1e-9);
}

fn richardson_order(scheme: Scheme) -> f64 {
    let set = Arc::new(ModeSet::ball(Dim::Two, 4.0));
    let p = PhysicsParams::new(0.5, Dim::Two).unwrap();
    let f = ForceField::zero(Dim::Two);
    let u0 = random_in_envelope(&set, &mut substream(208, 0), 1.0, 3.0);
    let end = |h: f64| integrate(&u0, &f, &p, &IntegratorConfig::new(h, 1.0).with_scheme(scheme)).unwrap();
    let (a, b, c) = (end(0.02), end(0.01), end(0.005));
    (a.last().distance(b.last()) / b.last().distance(c.last())).log2()
}

#[test]
fn both_schemes_are_fourth_order() {
    for scheme in [Scheme::Rk4IntegratingFactor, Scheme::Rk4Plain] {
        let order = richardson_order(scheme);
        assert!((order - 4.0).abs() < 0.3, "{scheme:?}: {order}");
    }
}

#[test]
fn unforced_enstrophy_strictly_decays() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 5.0));
    let p = PhysicsParams::new(0.5, Dim::Two).unwrap();
    let f = ForceField::zero(Dim::Two);
    let u0 = random_in_envelope(&set, &mut substream(209, 0), 1.0, 2.0);
    let traj = integrate(&u0, &f, &p, &IntegratorConfig::new(0.01, 1.0).with_stride(5)).unwrap();
    let check = enstrophy_inequality_check(&traj, &f, &p);
    assert!(check.holds);
    for (r, v) in check.rate.iter().zip(&traj.enstrophy) {
        assert!(*r <= -2.0 * 0.5 * v + 1e-9 * (1.0 + v));
        assert!(*r < 0.0);
    }
}

#[test]
fn nearby_small_states_separate_no_faster_than_viscosity_allows() {
    let set = Arc::new(ModeSet::ball(Dim::Two, 4.0));
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let u0 = random_in_envelope(&set, &mut substream(210, 0), 1e-6, 2.0);
    let v0 = random_in_envelope(&set, &mut substream(210, 1), 1e-6, 2.0);
    let r = lipschitz_experiment(&u0, &v0, &ForceField::zero(Dim::Two), &p, &IntegratorConfig::new(0.01, 1.0), -1.0)
        .unwrap();
    assert!(r.pass, "{}", r.max_ratio);
}

#[test]
fn equal_projections_have_no_defect() {
    let m = Arc::new(ModeSet::ball(Dim::Two, 5.0));
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let u0 = random_in_envelope(&m, &mut substream(211, 0), 0.5, 2.0);
    let cfg = IntegratorConfig::new(0.01, 0.5);
    let r = galerkin_difference_experiment(&u0, &ForceField::zero(Dim::Two), &p, &cfg, &m, &m, -1.0).unwrap();
    assert_eq!(r.delta, 0.0);
    assert!(r.holds && r.lhs.iter().all(|d| *d == 0.0));

    let n = Arc::new(ModeSet::ball(Dim::Two, 3.0));
    let single = pair(&m, Mode::d2(1, 1).unwrap(), 212, 0.5);
    let r = galerkin_difference_experiment(&single, &ForceField::zero(Dim::Two), &p, &cfg, &n, &m, -1.0).unwrap();
    assert!(r.holds && r.lhs.iter().all(|d| *d < 1e-15));
}

#[test]
fn gershgorin_stays_below_condition_d_on_power_law_states() {
    let mut cache = ZetaCache::new();
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let d = 0.05;
    let l = estimate_condition_d_bound(d, 4.0, Dim::Two, 1.0, 50, &mut cache).unwrap().l;
    for r in [3.0, 5.0, 7.0] {
        let set = Arc::new(ModeSet::ball(Dim::Two, r));
        for s in 0..5 {
            let u = random_in_envelope(&set, &mut substream(213, s), d, 4.0);
            let j = jacobian(&u, &p);
            let (e, g) = (lognorm_euclidean(&j), lognorm_gershgorin(&j));
            assert!(e <= g && g <= l, "radius {r}: {e} {g} {l}");
        }
    }
}
