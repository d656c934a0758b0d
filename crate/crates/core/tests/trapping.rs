//! Regions built from sampled constants: certification and invariance.

use std::sync::Arc;

use galerkin_core::flow::{integrate, IntegratorConfig};
use galerkin_core::lattice::estimate_estmlin_constant;
use galerkin_core::sampling::substream;
use galerkin_core::trapping::{build_trap1, certify_inward, sample_interior, Facet, Verdict};
use galerkin_core::{Dim, ForceField, ModeSet, PhysicsParams};

#[test]
fn larger_margins_keep_passing() {
    let c = estimate_estmlin_constant(Dim::Two, 4.0, 0.5, 10, 60, 1).unwrap();
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let f = ForceField::zero(Dim::Two);
    let set = Arc::new(ModeSet::ball(Dim::Two, 6.0));
    let mut passed = false;
    for margin in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let region = build_trap1(0.5, 4.0, &f, &p, &c, margin).unwrap();
        let cert = certify_inward(&region, &set, &f, &p, 20, 4).unwrap();
        assert!(!passed || cert.verdict == Verdict::Pass, "margin {margin} regressed");
        passed |= cert.verdict == Verdict::Pass;
    }
    assert!(passed);
}

#[test]
fn certified_poly_region_is_forward_invariant() {
    let c = estimate_estmlin_constant(Dim::Two, 4.0, 0.5, 10, 60, 1).unwrap();
    let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
    let f = ForceField::zero(Dim::Two);
    let set = Arc::new(ModeSet::ball(Dim::Two, 6.0));
    let region = build_trap1(0.5, 4.0, &f, &p, &c, 0.1).unwrap();
    let cert = certify_inward(&region, &set, &f, &p, 30, 4).unwrap();
    assert_eq!(cert.verdict, Verdict::Pass);
    assert!(cert.facets_checked > 1 && cert.constants_used.len() == 1);
    assert!(matches!(cert.worst_facet, Facet::Enstrophy | Facet::Modulus { .. }));
    for s in 0..4 {
        let u0 = sample_interior(&region, &set, &mut substream(300, s), 0.0, 0.95).unwrap();
        let traj = integrate(&u0, &f, &p, &IntegratorConfig::new(0.01, 2.0).with_stride(10)).unwrap();
        assert!(traj.containment(&region).iter().all(|c| c.inside));
    }
}
