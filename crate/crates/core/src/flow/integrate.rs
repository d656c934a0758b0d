use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::cvec::{self, CVec};
use crate::spectral::{ConvolutionPlan, ForceField, ModeSet, PhysicsParams, SpectralField};
use crate::trapping::{Containment, TrapRegion};

/// Invariant drift beyond which a step is rejected.
pub const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Scheme {
    /// RK4 on `v_k = e^{ν|k|^2 t} u_k`; exact on the linear part.
    Rk4IntegratingFactor,
    Rk4Plain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegratorConfig {
    pub h: f64,
    /// Horizon `T`; must be a whole number of steps.
    pub t_end: f64,
    pub scheme: Scheme,
    /// Keep every `stride`-th state (the last state is always kept).
    pub stride: usize,
    /// Drop the convolution term, leaving `-ν|k|^2 u_k + ⊓_k f_k`.
    #[cfg_attr(feature = "serde", serde(default = "yes"))]
    pub nonlinear: bool,
}

#[cfg(feature = "serde")]
fn yes() -> bool {
    true
}

impl IntegratorConfig {
    pub fn new(h: f64, t_end: f64) -> Self {
        IntegratorConfig {
            h,
            t_end,
            scheme: Scheme::Rk4IntegratingFactor,
            stride: 1,
            nonlinear: true,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Number of steps, after checking `h > 0`, `T >= h`, `stride >= 1`
    /// and that `T/h` is an integer to within `1e-9`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Parameter(alloc::format!("step must be positive, got {}", self.h)));
        }
        if !(self.t_end >= self.h && self.t_end.is_finite()) {
            return Err(Error::Parameter(alloc::format!(
                "horizon {} shorter than one step {}",
                self.t_end, self.h
            )));
        }
        if self.stride == 0 {
            return Err(Error::Parameter(alloc::string::String::from("stride must be at least 1")));
        }
        let n = (self.t_end / self.h).round();
        if (n * self.h - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::Parameter(alloc::format!(
                "horizon {} is not a multiple of the step {}",
                self.t_end, self.h
            )));
        }
        Ok(n as usize)
    }
}

/// States at output times. All states share one mode set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub enstrophy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &SpectralField {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.states[0].modes()
    }

    /// Membership of every state at its own time.
    pub fn containment(&self, region: &TrapRegion) -> Vec<Containment> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(t, u)| region.contains(u, *t))
            .collect()
    }

    fn push(&mut self, t: f64, u: SpectralField) {
        self.enstrophy.push(u.enstrophy());
        self.times.push(t);
        self.states.push(u);
    }
}

/// Restriction of `u` to `target`.
pub fn project(u: &SpectralField, target: &Arc<ModeSet>) -> SpectralField {
    u.project(target)
}

/// One-step map of the Galerkin system on a fixed mode set.
#[derive(Debug, Clone)]
pub struct Stepper {
    plan: ConvolutionPlan,
    forcing: Vec<CVec>,
    rate: Vec<f64>,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    h: f64,
    scheme: Scheme,
    nonlinear: bool,
}

impl Stepper {
    pub fn new(modes: &Arc<ModeSet>, f: &ForceField, p: &PhysicsParams, cfg: &IntegratorConfig) -> Self {
        let rate: Vec<f64> = modes.iter().map(|k| p.linear_rate(k)).collect();
        Stepper {
            plan: ConvolutionPlan::galerkin(modes),
            forcing: modes.iter().map(|k| f.projected(k)).collect(),
            e_full: rate.iter().map(|r| (r * cfg.h).exp()).collect(),
            e_half: rate.iter().map(|r| (r * cfg.h / 2.0).exp()).collect(),
            rate,
            h: cfg.h,
            scheme: cfg.scheme,
            nonlinear: cfg.nonlinear,
        }
    }

    /// `N(u) + ⊓f`
    fn g(&self, u: &[CVec]) -> Vec<CVec> {
        let mut out = if self.nonlinear {
            let field = SpectralField::new_unchecked(Arc::clone(self.plan.source()), u.to_vec())
                .expect("length matches plan");
            self.plan.nonlinear(&field).into_coeffs()
        } else {
            alloc::vec![cvec::ZERO; u.len()]
        };
        for (o, f) in out.iter_mut().zip(&self.forcing) {
            *o = cvec::add(o, f);
        }
        out
    }

    /// `g(u) - ν|k|^2 u`
    fn full(&self, u: &[CVec]) -> Vec<CVec> {
        let mut out = self.g(u);
        for ((o, v), r) in out.iter_mut().zip(u).zip(&self.rate) {
            *o = cvec::add(o, &cvec::scale_re(v, *r));
        }
        out
    }

    pub fn step(&self, u: &[CVec]) -> Vec<CVec> {
        let h = self.h;
        let n = u.len();
        let comb = |a: &[CVec], b: &[CVec], s: f64| -> Vec<CVec> {
            a.iter().zip(b).map(|(x, y)| cvec::add(x, &cvec::scale_re(y, s))).collect()
        };
        match self.scheme {
            Scheme::Rk4IntegratingFactor => {
                let (e, e2) = (&self.e_full, &self.e_half);
                let k1 = self.g(u);
                let a: Vec<CVec> = (0..n)
                    .map(|i| cvec::scale_re(&cvec::add(&u[i], &cvec::scale_re(&k1[i], h / 2.0)), e2[i]))
                    .collect();
                let k2 = self.g(&a);
                let b: Vec<CVec> = (0..n)
                    .map(|i| cvec::add(&cvec::scale_re(&u[i], e2[i]), &cvec::scale_re(&k2[i], h / 2.0)))
                    .collect();
                let k3 = self.g(&b);
                let c: Vec<CVec> = (0..n)
                    .map(|i| cvec::add(&cvec::scale_re(&u[i], e[i]), &cvec::scale_re(&k3[i], h * e2[i])))
                    .collect();
                let k4 = self.g(&c);
                (0..n)
                    .map(|i| {
                        let mut incr = cvec::scale_re(&k1[i], e[i]);
                        incr = cvec::add(&incr, &cvec::scale_re(&cvec::add(&k2[i], &k3[i]), 2.0 * e2[i]));
                        incr = cvec::add(&incr, &k4[i]);
                        cvec::add(&cvec::scale_re(&u[i], e[i]), &cvec::scale_re(&incr, h / 6.0))
                    })
                    .collect()
            }
            Scheme::Rk4Plain => {
                let k1 = self.full(u);
                let k2 = self.full(&comb(u, &k1, h / 2.0));
                let k3 = self.full(&comb(u, &k2, h / 2.0));
                let k4 = self.full(&comb(u, &k3, h));
                (0..n)
                    .map(|i| {
                        let s = cvec::add(
                            &cvec::add(&k1[i], &k4[i]),
                            &cvec::scale_re(&cvec::add(&k2[i], &k3[i]), 2.0),
                        );
                        cvec::add(&u[i], &cvec::scale_re(&s, h / 6.0))
                    })
                    .collect()
            }
        }
    }
}

/// Integrates the Galerkin system on `u0`'s mode set.
///
/// Output times are `i h` for multiples of the stride, plus `T`.
pub fn integrate(
    u0: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let modes = Arc::clone(u0.modes());
    let stepper = Stepper::new(&modes, f, p, cfg);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        enstrophy: Vec::new(),
    };
    traj.push(0.0, u0.clone());
    let mut u = u0.coeffs().to_vec();
    for i in 1..=steps {
        u = stepper.step(&u);
        let field = SpectralField::new_unchecked(Arc::clone(&modes), u.clone())?;
        let t = i as f64 * cfg.h;
        let (drift, _) = field.invariant_residual();
        if !(drift <= DRIFT_TOL) {
            return Err(Error::StepRejected { time: t, drift });
        }
        if i % cfg.stride == 0 || i == steps {
            traj.push(t, field);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Dim, Mode};
    use num_complex::Complex64;

    fn pair_field(set: &Arc<ModeSet>) -> SpectralField {
        SpectralField::single_pair(
            Arc::clone(set),
            Mode::d2(1, 2).unwrap(),
            [Complex64::new(0.6, -0.2), Complex64::new(-0.3, 0.1), 0.0.into()],
        )
        .unwrap()
    }

    #[test]
    fn config_rejects_bad_grids() {
        assert!(IntegratorConfig::new(0.0, 1.0).steps().is_err());
        assert!(IntegratorConfig::new(0.1, 0.05).steps().is_err());
        assert!(IntegratorConfig::new(0.3, 1.0).steps().is_err());
        assert!(IntegratorConfig::new(0.1, 1.0).with_stride(0).steps().is_err());
        assert_eq!(IntegratorConfig::new(0.1, 1.0).steps().unwrap(), 10);
    }

    #[test]
    fn single_pair_decays_exactly() {
        let set = Arc::new(ModeSet::ball(Dim::Two, 3.0));
        let u0 = pair_field(&set);
        let p = PhysicsParams::new(0.7, Dim::Two).unwrap();
        let traj = integrate(&u0, &ForceField::zero(Dim::Two), &p, &IntegratorConfig::new(0.1, 1.0)).unwrap();
        let k = Mode::d2(1, 2).unwrap();
        let expect = u0.modulus(set.position(&k).unwrap()) * (-0.7 * 5.0f64).exp();
        let got = traj.last().modulus(set.position(&k).unwrap());
        assert!((got - expect).abs() <= 1e-12 * expect);
        assert_eq!(traj.times.len(), 11);
        assert!((traj.times[10] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stride_keeps_last_state() {
        let set = Arc::new(ModeSet::ball(Dim::Two, 3.0));
        let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
        let cfg = IntegratorConfig::new(0.1, 1.0).with_stride(3);
        let traj = integrate(&pair_field(&set), &ForceField::zero(Dim::Two), &p, &cfg).unwrap();
        assert_eq!(traj.len(), 5);
        assert!((traj.times[4] - 1.0).abs() < 1e-15);
    }
}
