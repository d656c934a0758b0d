//! Numerical checks of continuous dependence, projection convergence and the
//! enstrophy balance along computed trajectories.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flow::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::spectral::{
    enstrophy_rate, force_enstrophy_norm, rhs, ConvolutionPlan, ForceField, ModeSet, PhysicsParams,
    SpectralField,
};

/// Separation below which two trajectories count as identical.
pub const SEPARATION_FLOOR: f64 = 1e-12;
/// Below this `|l|` the growth factor `(e^{lt} - 1)/l` is replaced by `t`.
pub const ZERO_RATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipschitzReport {
    pub l: f64,
    pub initial_separation: f64,
    pub times: Vec<f64>,
    pub separation: Vec<f64>,
    /// `max_t |u(t) - v(t)| / (e^{lt} |u0 - v0|)`, zero when `u0 = v0`.
    pub max_ratio: f64,
    pub pass: bool,
}

/// Integrates both initial states and compares their separation with
/// `e^{lt} |u0 - v0|`.
pub fn lipschitz_experiment(
    u0: &SpectralField,
    v0: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
    cfg: &IntegratorConfig,
    l: f64,
) -> Result<LipschitzReport> {
    if !Arc::ptr_eq(u0.modes(), v0.modes()) && u0.modes() != v0.modes() {
        return Err(Error::Parameter("initial states live on different mode sets".into()));
    }
    let a = integrate(u0, f, p, cfg)?;
    let b = integrate(v0, f, p, cfg)?;
    let d0 = u0.distance(v0);
    let separation: Vec<f64> = a.states.iter().zip(&b.states).map(|(x, y)| x.distance(y)).collect();
    let (max_ratio, pass) = if d0 == 0.0 {
        (0.0, separation.iter().all(|s| *s <= SEPARATION_FLOOR))
    } else {
        let r = a
            .times
            .iter()
            .zip(&separation)
            .map(|(t, s)| s / ((l * t).exp() * d0))
            .fold(0.0, f64::max);
        (r, r <= 1.0 + 1e-6)
    };
    Ok(LipschitzReport {
        l,
        initial_separation: d0,
        times: a.times,
        separation,
        max_ratio,
        pass,
    })
}

/// `(e^{lt} - 1)/l`, or `t` when `l` is numerically zero.
pub fn growth_factor(l: f64, t: f64) -> f64 {
    if l.abs() < ZERO_RATE {
        t
    } else {
        (l * t).exp_m1() / l
    }
}

/// Right side `e^{lt} ρ + δ (e^{lt} - 1)/l` of the projection error bound.
pub fn difference_bound(l: f64, rho: f64, delta: f64, t: f64) -> f64 {
    if l.abs() < ZERO_RATE {
        rho + delta * t
    } else {
        (l * t).exp() * rho + delta * growth_factor(l, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DifferenceReport {
    pub l: f64,
    /// Trajectory-wise `δ_n`: the maximum of `|P_n F(x) - P_n F(P_n x)|`
    /// over the states of the large projection.
    pub delta: f64,
    pub rho: f64,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `min_t (rhs - lhs)`.
    pub min_slack: f64,
    pub holds: bool,
}

/// Compares the small projection `x_n` with `P_n x_m`.
pub fn galerkin_difference_experiment(
    u0: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
    cfg: &IntegratorConfig,
    n: &Arc<ModeSet>,
    m: &Arc<ModeSet>,
    l: f64,
) -> Result<DifferenceReport> {
    if !n.is_subset_of(m) {
        return Err(Error::Parameter("small projection is not inside the large one".into()));
    }
    if u0.modes().as_ref() != m.as_ref() {
        return Err(Error::Parameter("initial state must live on the large projection".into()));
    }
    // Every step is needed for δ, so integrate without thinning.
    let fine = cfg.with_stride(1);
    let big = integrate(u0, f, p, &fine)?;
    let small = integrate(&u0.project(n), f, p, &fine)?;

    let full_plan = ConvolutionPlan::new(m, n);
    let small_plan = ConvolutionPlan::galerkin(n);
    let delta = big
        .states
        .iter()
        .map(|x| full_plan.nonlinear(x).distance(&small_plan.nonlinear(&x.project(n))))
        .fold(0.0, f64::max);

    let rho = small.states[0].distance(&big.states[0].project(n));
    let mut report = DifferenceReport {
        l,
        delta,
        rho,
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        min_slack: f64::INFINITY,
        holds: true,
    };
    for (i, t) in big.times.iter().enumerate() {
        if i % cfg.stride != 0 && i + 1 != big.times.len() {
            continue;
        }
        let lhs = small.states[i].distance(&big.states[i].project(n));
        let bound = difference_bound(l, rho, delta, *t);
        report.min_slack = report.min_slack.min(bound - lhs);
        report.holds &= lhs <= bound * (1.0 + 1e-9) + 1e-13;
        report.times.push(*t);
        report.lhs.push(lhs);
        report.rhs.push(bound);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnstrophyCheck {
    pub times: Vec<f64>,
    pub rate: Vec<f64>,
    pub bound: Vec<f64>,
    /// `max_t (dV/dt - bound)`.
    pub max_excess: f64,
    pub holds: bool,
}

/// Checks `dV/dt <= -2νV + 2V(F)√V` at every stored state, with `dV/dt`
/// evaluated from the vector field.
pub fn enstrophy_inequality_check(traj: &Trajectory, f: &ForceField, p: &PhysicsParams) -> EnstrophyCheck {
    let vf = force_enstrophy_norm(f);
    let mut out = EnstrophyCheck {
        times: Vec::new(),
        rate: Vec::new(),
        bound: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        holds: true,
    };
    if traj.is_empty() {
        return out;
    }
    let plan = ConvolutionPlan::galerkin(traj.modes());
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let field = crate::spectral::rhs_with_plan(&plan, u, f, p);
        let rate = enstrophy_rate(u, &field);
        let v = u.enstrophy();
        let bound = -2.0 * p.nu * v + 2.0 * vf * v.sqrt();
        out.max_excess = out.max_excess.max(rate - bound);
        out.holds &= rate <= bound + 1e-9 * (1.0 + v);
        out.times.push(*t);
        out.rate.push(rate);
        out.bound.push(bound);
    }
    out
}

/// `|P_n F(x) - P_n F(P_n x)|` at a single state.
pub fn projection_defect(x: &SpectralField, n: &Arc<ModeSet>, f: &ForceField, p: &PhysicsParams) -> f64 {
    rhs(x, f, p, n).distance(&rhs(&x.project(n), f, p, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Dim, Mode};
    use num_complex::Complex64;

    #[test]
    fn zero_rate_branch_is_linear() {
        assert_eq!(difference_bound(0.0, 1.0, 2.0, 3.0), 7.0);
        assert_eq!(difference_bound(1e-13, 1.0, 2.0, 3.0), 7.0);
        let l = 1e-6;
        assert!((difference_bound(l, 1.0, 2.0, 3.0) - 7.0).abs() < 1e-4);
        assert!((growth_factor(-1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn identical_starts_pass_lipschitz() {
        let set = Arc::new(ModeSet::ball(Dim::Two, 2.0));
        let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
        let u = SpectralField::single_pair(
            Arc::clone(&set),
            Mode::d2(1, 1).unwrap(),
            [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), 0.0.into()],
        )
        .unwrap();
        let r = lipschitz_experiment(&u, &u, &ForceField::zero(Dim::Two), &p, &IntegratorConfig::new(0.1, 1.0), -1.0)
            .unwrap();
        assert!(r.pass);
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn zero_trajectory_meets_enstrophy_bound() {
        let set = Arc::new(ModeSet::ball(Dim::Two, 2.0));
        let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
        let f = ForceField::zero(Dim::Two);
        let traj = integrate(&SpectralField::zeros(set), &f, &p, &IntegratorConfig::new(0.5, 1.0)).unwrap();
        let c = enstrophy_inequality_check(&traj, &f, &p);
        assert!(c.holds);
        assert_eq!(c.max_excess, 0.0);
    }
}
