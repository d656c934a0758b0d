use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::ConstantEstimate;
use crate::spectral::cvec;
use crate::spectral::{force_enstrophy_norm, Dim, ForceField, Mode, PhysicsParams, SpectralField};

/// Relative tolerance of [`TrapRegion::contains`]; the regions are closed.
pub const CONTAINS_TOL: f64 = 1e-12;

/// `{V(u) <= V0} ∩ {|u_k| <= D/|k|^γ for |k| > K}` in two dimensions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyRegion {
    pub dimension: Dim,
    pub nu: f64,
    pub v0: f64,
    /// Cutoff `K`.
    pub k: f64,
    pub gamma: f64,
    pub d: f64,
    /// `(V(F)/ν)^2` for the force the region was built with.
    pub v_star: f64,
    /// Enstrophy-modulus constant used for `K`.
    pub c: ConstantEstimate,
}

/// Poly region intersected with `|u_k| <= D2 e^{-a|k|}/|k|^γ` for `|k| > K_e`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpRegion {
    pub base: PolyRegion,
    pub d2: f64,
    pub k_e: f64,
    pub a: f64,
    pub c_q: ConstantEstimate,
}

/// Poly region intersected with `|u_k| <= D3 e^{-a3|k|t}/|k|^γ` for
/// `|k| > K_e`, valid on `0 <= t <= t0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeExpRegion {
    pub base: PolyRegion,
    pub d3: f64,
    pub k_e: f64,
    pub a3: f64,
    pub t0: f64,
    pub c_q: ConstantEstimate,
}

/// `{|u_k| <= D/|k|^γ for all k}` for the unforced three-dimensional system.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallDataRegion {
    pub nu: f64,
    pub gamma: f64,
    pub d: f64,
    /// `ν / C_Q(3, γ)`
    pub d0: f64,
    pub c_q: ConstantEstimate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum TrapRegion {
    Poly(PolyRegion),
    Exp(ExpRegion),
    TimeExp(TimeExpRegion),
    #[cfg_attr(feature = "serde", serde(rename = "small_data_3d"))]
    SmallData3D(SmallDataRegion),
}

/// Which family of modulus bound a constraint comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnvelopeKind {
    Power,
    Exponential,
    TimeExponential,
}

/// A modulus bound at one mode and time, with its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub value: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "constraint", rename_all = "snake_case"))]
pub enum Constraint {
    Enstrophy,
    Modulus { mode: Mode, envelope: EnvelopeKind },
}

/// `bound - value` for one constraint; negative means violated.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Slack {
    pub constraint: Constraint,
    pub bound: f64,
    pub value: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub inside: bool,
    pub slacks: Vec<Slack>,
}

impl Containment {
    pub fn min_slack(&self) -> Option<&Slack> {
        self.slacks.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
    }
}

fn check_margin(margin: f64, upper: bool) -> Result<()> {
    if !(margin > 0.0 && margin.is_finite()) || (upper && !(margin < 1.0)) {
        return Err(Error::Parameter(alloc::format!(
            "margin must lie in (0, {}), got {margin}",
            if upper { "1" } else { "inf" }
        )));
    }
    Ok(())
}

fn v_star(f: &ForceField, p: &PhysicsParams) -> f64 {
    (force_enstrophy_norm(f) / p.nu).powi(2)
}

fn require_dim(p: &PhysicsParams, f: &ForceField, dim: Dim) -> Result<()> {
    if p.dim != dim {
        return Err(Error::Hypothesis(alloc::format!(
            "this region is defined for d = {dim}, got d = {}",
            p.dim
        )));
    }
    if f.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.get(),
            found: f.dim().get(),
        });
    }
    Ok(())
}

/// Poly region with `K = ceil(C^2 V0/ν^2)(1 + margin)` and
/// `D = sqrt(V0) K^(γ-1) (1 + margin)`.
///
/// `K` is raised to the force cutoff when the force reaches further.
pub fn build_trap1(
    v0: f64,
    gamma: f64,
    f: &ForceField,
    p: &PhysicsParams,
    c: &ConstantEstimate,
    margin: f64,
) -> Result<TrapRegion> {
    check_margin(margin, false)?;
    require_dim(p, f, Dim::Two)?;
    if !(gamma >= 2.5) {
        return Err(Error::Hypothesis(alloc::format!("need γ >= 2.5, got {gamma}")));
    }
    let vs = v_star(f, p);
    if !(v0 > vs) {
        return Err(Error::Threshold(alloc::format!(
            "V0 = {v0} does not exceed V* = (V(F)/ν)^2 = {vs}"
        )));
    }
    let cc = c.reported();
    let k = ((cc * cc * v0 / (p.nu * p.nu)).ceil() * (1.0 + margin)).max(f.cutoff());
    let d = v0.sqrt() * k.powf(gamma - 1.0) * (1.0 + margin);
    let region = TrapRegion::Poly(PolyRegion {
        dimension: Dim::Two,
        nu: p.nu,
        v0,
        k,
        gamma,
        d,
        v_star: vs,
        c: c.clone(),
    });
    region.validate(f, p)?;
    Ok(region)
}

fn poly_base(base: &TrapRegion) -> Result<&PolyRegion> {
    match base {
        TrapRegion::Poly(b) => Ok(b),
        _ => Err(Error::Parameter(String::from("refinements need a Poly base region"))),
    }
}

/// Exponential refinement with `K_e = ceil(C_Q D2/ν)(1 + margin)` and
/// `a = (1 - margin) ln(D2/D) / K_e`.
pub fn build_trap2(
    base: &TrapRegion,
    d2: f64,
    f: &ForceField,
    p: &PhysicsParams,
    c_q: &ConstantEstimate,
    margin: f64,
) -> Result<TrapRegion> {
    check_margin(margin, true)?;
    let base = poly_base(base)?.clone();
    if !(d2 > base.d) {
        return Err(Error::Parameter(alloc::format!("need D2 > D = {}, got {d2}", base.d)));
    }
    let k_e = (c_q.reported() * d2 / p.nu).ceil() * (1.0 + margin);
    let a = (1.0 - margin) * (d2 / base.d).ln() / k_e;
    let region = TrapRegion::Exp(ExpRegion {
        base,
        d2,
        k_e,
        a,
        c_q: c_q.clone(),
    });
    region.validate(f, p)?;
    Ok(region)
}

/// Time-decaying refinement with `K_e = ceil(D3 C_Q/ν)(1 + margin)` and
/// `a3 = (1 - margin) ln(D3/D) / (K_e t0)`.
pub fn build_trap3(
    base: &TrapRegion,
    d3: f64,
    t0: f64,
    f: &ForceField,
    p: &PhysicsParams,
    c_q: &ConstantEstimate,
    margin: f64,
) -> Result<TrapRegion> {
    check_margin(margin, true)?;
    let base = poly_base(base)?.clone();
    if !(d3 > base.d) {
        return Err(Error::Parameter(alloc::format!("need D3 > D = {}, got {d3}", base.d)));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Parameter(alloc::format!("need finite t0 > 0, got {t0}")));
    }
    let k_e = (d3 * c_q.reported() / p.nu).ceil() * (1.0 + margin);
    let a3 = (1.0 - margin) * (d3 / base.d).ln() / (k_e * t0);
    let region = TrapRegion::TimeExp(TimeExpRegion {
        base,
        d3,
        k_e,
        a3,
        t0,
        c_q: c_q.clone(),
    });
    region.validate(f, p)?;
    Ok(region)
}

/// `D = (1 - margin) ν / C_Q(3, γ)` for the unforced three-dimensional system.
pub fn build_smalldata_3d(
    gamma: f64,
    f: &ForceField,
    p: &PhysicsParams,
    c_q: &ConstantEstimate,
    margin: f64,
) -> Result<TrapRegion> {
    check_margin(margin, true)?;
    require_dim(p, f, Dim::Three)?;
    if !(gamma > 3.5) {
        return Err(Error::Hypothesis(alloc::format!("need γ > 3.5, got {gamma}")));
    }
    if !f.is_zero() {
        return Err(Error::Hypothesis(String::from("the small-data region requires zero force")));
    }
    let d0 = p.nu / c_q.reported();
    let region = TrapRegion::SmallData3D(SmallDataRegion {
        nu: p.nu,
        gamma,
        d: (1.0 - margin) * d0,
        d0,
        c_q: c_q.clone(),
    });
    region.validate(f, p)?;
    Ok(region)
}

fn violated(what: String) -> Error {
    Error::Threshold(what)
}

impl PolyRegion {
    fn validate(&self, f: &ForceField, p: &PhysicsParams) -> Result<()> {
        let vs = v_star(f, p);
        let cc = self.c.reported();
        if !(self.v0 > vs) {
            return Err(violated(alloc::format!("V0 = {} <= V* = {vs}", self.v0)));
        }
        if !(self.gamma >= 2.5) {
            return Err(violated(alloc::format!("γ = {} < 2.5", self.gamma)));
        }
        let k_min = cc * cc * self.v0 / (p.nu * p.nu);
        if !(self.k > k_min) {
            return Err(violated(alloc::format!("K = {} <= C^2 V0/ν^2 = {k_min}", self.k)));
        }
        if f.cutoff() > self.k {
            return Err(violated(alloc::format!(
                "force reaches |k| = {} beyond K = {}",
                f.cutoff(),
                self.k
            )));
        }
        let d_min = self.v0.sqrt() * self.k.powf(self.gamma - 1.0);
        if !(self.d > d_min) {
            return Err(violated(alloc::format!("D = {} <= sqrt(V0) K^(γ-1) = {d_min}", self.d)));
        }
        Ok(())
    }
}

impl TrapRegion {
    pub fn dim(&self) -> Dim {
        match self {
            TrapRegion::SmallData3D(_) => Dim::Three,
            _ => Dim::Two,
        }
    }

    pub fn base(&self) -> Option<&PolyRegion> {
        match self {
            TrapRegion::Poly(b) => Some(b),
            TrapRegion::Exp(r) => Some(&r.base),
            TrapRegion::TimeExp(r) => Some(&r.base),
            TrapRegion::SmallData3D(_) => None,
        }
    }

    /// Enstrophy bound, absent for the small-data region.
    pub fn v0(&self) -> Option<f64> {
        self.base().map(|b| b.v0)
    }

    pub fn gamma(&self) -> f64 {
        match self {
            TrapRegion::SmallData3D(r) => r.gamma,
            _ => self.base().map_or(0.0, |b| b.gamma),
        }
    }

    /// `D` of the power-law envelope.
    pub fn d(&self) -> f64 {
        match self {
            TrapRegion::SmallData3D(r) => r.d,
            _ => self.base().map_or(0.0, |b| b.d),
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            TrapRegion::SmallData3D(r) => r.nu,
            _ => self.base().map_or(0.0, |b| b.nu),
        }
    }

    /// Time horizon on which the region is claimed to trap.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            TrapRegion::TimeExp(r) => Some(r.t0),
            _ => None,
        }
    }

    pub fn constants(&self) -> Vec<ConstantEstimate> {
        match self {
            TrapRegion::Poly(b) => alloc::vec![b.c.clone()],
            TrapRegion::Exp(r) => alloc::vec![r.base.c.clone(), r.c_q.clone()],
            TrapRegion::TimeExp(r) => alloc::vec![r.base.c.clone(), r.c_q.clone()],
            TrapRegion::SmallData3D(r) => alloc::vec![r.c_q.clone()],
        }
    }

    /// Re-checks every strict inequality of the construction against `f`, `p`.
    pub fn validate(&self, f: &ForceField, p: &PhysicsParams) -> Result<()> {
        if p.dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().get(),
                found: p.dim.get(),
            });
        }
        if let Some(b) = self.base() {
            if b.nu != p.nu {
                return Err(violated(alloc::format!("region built for ν = {}, got {}", b.nu, p.nu)));
            }
            b.validate(f, p)?;
        }
        match self {
            TrapRegion::Poly(_) => Ok(()),
            TrapRegion::Exp(r) => {
                let d = r.base.d;
                if !(r.d2 > d) {
                    return Err(violated(alloc::format!("D2 = {} <= D = {d}", r.d2)));
                }
                let k_min = r.c_q.reported() * r.d2 / p.nu;
                if !(r.k_e > k_min) {
                    return Err(violated(alloc::format!("K_e = {} <= C_Q D2/ν = {k_min}", r.k_e)));
                }
                let a_max = (r.d2 / d).ln() / r.k_e;
                if !(r.a > 0.0 && r.a < a_max) {
                    return Err(violated(alloc::format!("a = {} outside (0, {a_max})", r.a)));
                }
                Ok(())
            }
            TrapRegion::TimeExp(r) => {
                let d = r.base.d;
                if !(r.d3 > d) {
                    return Err(violated(alloc::format!("D3 = {} <= D = {d}", r.d3)));
                }
                let k_min = r.d3 * r.c_q.reported() / p.nu;
                if !(r.k_e > k_min) {
                    return Err(violated(alloc::format!("K_e = {} <= D3 C_Q/ν = {k_min}", r.k_e)));
                }
                if !(r.t0 > 0.0) {
                    return Err(violated(alloc::format!("t0 = {} <= 0", r.t0)));
                }
                let a_max = (r.d3 / d).ln() / (r.k_e * r.t0);
                if !(r.a3 > 0.0 && r.a3 < a_max) {
                    return Err(violated(alloc::format!("a3 = {} outside (0, {a_max})", r.a3)));
                }
                Ok(())
            }
            TrapRegion::SmallData3D(r) => {
                if !(r.gamma > 3.5) {
                    return Err(violated(alloc::format!("γ = {} <= 3.5", r.gamma)));
                }
                if !f.is_zero() {
                    return Err(violated(String::from("force must vanish")));
                }
                if r.nu != p.nu {
                    return Err(violated(alloc::format!("region built for ν = {}, got {}", r.nu, p.nu)));
                }
                let d0 = p.nu / r.c_q.reported();
                if !(r.d > 0.0 && r.d < d0) {
                    return Err(violated(alloc::format!("D = {} outside (0, D0 = {d0})", r.d)));
                }
                Ok(())
            }
        }
    }

    /// Every modulus bound that applies at `k` and time `t`.
    pub fn envelopes(&self, k: &Mode, t: f64) -> [Option<Envelope>; 2] {
        let n = k.norm();
        let power = |d: f64, gamma: f64| Envelope {
            kind: EnvelopeKind::Power,
            value: d / n.powf(gamma),
            rate: 0.0,
        };
        let poly = |b: &PolyRegion| (n > b.k).then(|| power(b.d, b.gamma));
        match self {
            TrapRegion::Poly(b) => [poly(b), None],
            TrapRegion::Exp(r) => [
                poly(&r.base),
                (n > r.k_e).then(|| Envelope {
                    kind: EnvelopeKind::Exponential,
                    value: r.d2 * (-r.a * n).exp() / n.powf(r.base.gamma),
                    rate: 0.0,
                }),
            ],
            TrapRegion::TimeExp(r) => [
                poly(&r.base),
                (n > r.k_e).then(|| {
                    let value = r.d3 * (-r.a3 * n * t).exp() / n.powf(r.base.gamma);
                    Envelope {
                        kind: EnvelopeKind::TimeExponential,
                        value,
                        rate: -r.a3 * n * value,
                    }
                }),
            ],
            TrapRegion::SmallData3D(r) => [Some(power(r.d, r.gamma)), None],
        }
    }

    /// The tightest applicable bound at `k`, if any.
    pub fn binding_envelope(&self, k: &Mode, t: f64) -> Option<Envelope> {
        self.envelopes(k, t)
            .into_iter()
            .flatten()
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Membership at time `t` with one slack per constraint (intersection
    /// semantics: every applicable envelope is checked separately).
    pub fn contains(&self, u: &SpectralField, t: f64) -> Containment {
        if u.dim() != self.dim() {
            return Containment {
                inside: false,
                slacks: Vec::new(),
            };
        }
        let mut slacks = Vec::new();
        if let Some(v0) = self.v0() {
            let v = u.enstrophy();
            slacks.push(Slack {
                constraint: Constraint::Enstrophy,
                bound: v0,
                value: v,
                slack: v0 - v,
            });
        }
        for i in u.modes().representatives() {
            let k = u.modes().modes()[i];
            let m = cvec::norm(&u.coeffs()[i]);
            for env in self.envelopes(&k, t).into_iter().flatten() {
                slacks.push(Slack {
                    constraint: Constraint::Modulus {
                        mode: k,
                        envelope: env.kind,
                    },
                    bound: env.value,
                    value: m,
                    slack: env.value - m,
                });
            }
        }
        let inside = slacks.iter().all(|s| s.slack >= -CONTAINS_TOL * s.bound);
        Containment { inside, slacks }
    }
}

/// Threshold tests for conditions C1, C2, C3 and D on `W(D, γ)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionsReport {
    pub dimension: Dim,
    pub gamma: f64,
    pub d: f64,
    /// Always true for ball-shaped projections.
    pub c1: bool,
    /// `γ > d/2`
    pub c2: bool,
    /// `γ - 2 > d/2` and `γ > d`
    pub c3: bool,
    /// `γ > d + 1`
    pub condition_d: bool,
    /// `|û| = D sqrt(sum |k|^-2γ)`, when finite.
    pub majorant_norm: Option<f64>,
    pub majorant_tail: Option<f64>,
}

pub fn check_conditions(gamma: f64, d: f64, dim: Dim) -> Result<ConditionsReport> {
    let df = dim.get() as f64;
    let c2 = gamma > df / 2.0;
    let (majorant_norm, majorant_tail) = if c2 {
        let z = crate::lattice::zeta_sum(dim, 2.0 * gamma, 200)?;
        let lo = d * z.value.sqrt();
        (Some(lo), Some(d * z.reported().sqrt() - lo))
    } else {
        (None, None)
    };
    Ok(ConditionsReport {
        dimension: dim,
        gamma,
        d,
        c1: true,
        c2,
        c3: gamma - 2.0 > df / 2.0 && gamma > df,
        condition_d: gamma > df + 1.0,
        majorant_norm,
        majorant_tail,
    })
}

/// [`check_conditions`] on the power-law set underlying a region.
pub fn check_region_conditions(region: &TrapRegion) -> Result<ConditionsReport> {
    check_conditions(region.gamma(), region.d(), region.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ConstantKind;
    use alloc::sync::Arc;
    use crate::spectral::ModeSet;
    use num_complex::Complex64;

    fn constant(name: ConstantKind, dim: Dim, value: f64) -> ConstantEstimate {
        ConstantEstimate {
            name,
            dimension: dim,
            gamma: 4.0,
            epsilon: None,
            value,
            truncation_radius: 0,
            tail_bound: 0.0,
            mode_of_supremum: None,
            samples: None,
            seed: None,
            note: String::new(),
        }
    }

    fn two() -> (ForceField, PhysicsParams) {
        (ForceField::zero(Dim::Two), PhysicsParams::new(1.0, Dim::Two).unwrap())
    }

    #[test]
    fn unforced_poly_accepts_any_positive_v0() {
        let (f, p) = two();
        let c = constant(ConstantKind::EnstrophyModulus, Dim::Two, 0.8);
        for v0 in [1e-8, 1.0, 50.0] {
            let r = build_trap1(v0, 4.0, &f, &p, &c, 0.1).unwrap();
            let TrapRegion::Poly(b) = &r else { unreachable!() };
            assert!(b.k > 0.64 * v0);
            assert!(b.d > v0.sqrt() * b.k.powi(3));
        }
        assert!(build_trap1(1.0, 2.4, &f, &p, &c, 0.1).is_err());
        assert!(build_trap1(1.0, 4.0, &f, &p, &c, 0.0).is_err());
    }

    #[test]
    fn v0_below_v_star_is_a_threshold_error() {
        let set = Arc::new(ModeSet::ball(Dim::Two, 1.0));
        let u = SpectralField::single_pair(
            set,
            Mode::d2(1, 0).unwrap(),
            [0.0.into(), Complex64::new(1.0, 0.0), 0.0.into()],
        )
        .unwrap();
        let f = ForceField::from_field(u);
        let p = PhysicsParams::new(1.0, Dim::Two).unwrap();
        let c = constant(ConstantKind::EnstrophyModulus, Dim::Two, 0.8);
        // V(F) = sqrt(2), so V* = 2.
        assert!(matches!(build_trap1(1.9, 4.0, &f, &p, &c, 0.1), Err(Error::Threshold(_))));
        assert!(build_trap1(2.1, 4.0, &f, &p, &c, 0.1).is_ok());
    }

    #[test]
    fn exp_refinement_rate_bounds() {
        let (f, p) = two();
        let c = constant(ConstantKind::EnstrophyModulus, Dim::Two, 0.8);
        let cq = constant(ConstantKind::ConvolutionSup, Dim::Two, 21.3);
        let base = build_trap1(1e-4, 4.0, &f, &p, &c, 0.1).unwrap();
        let d = base.d();
        let e = build_trap2(&base, 2.0 * d, &f, &p, &cq, 0.1).unwrap();
        let TrapRegion::Exp(x) = &e else { unreachable!() };
        assert!(x.a > 0.0 && x.a < core::f64::consts::LN_2 / x.k_e);
        let tight = build_trap2(&base, 2.0 * d, &f, &p, &cq, 1e-12).unwrap();
        assert!(tight.validate(&f, &p).is_ok());
        assert!(build_trap2(&base, d, &f, &p, &cq, 0.1).is_err());
        assert!(build_trap2(&base, 2.0 * d, &f, &p, &cq, 1.0).is_err());
    }

    #[test]
    fn time_exp_rate_vanishes_for_long_horizons() {
        let (f, p) = two();
        let c = constant(ConstantKind::EnstrophyModulus, Dim::Two, 0.8);
        let cq = constant(ConstantKind::ConvolutionSup, Dim::Two, 21.3);
        let base = build_trap1(1e-4, 4.0, &f, &p, &c, 0.1).unwrap();
        let d3 = core::f64::consts::E * base.d();
        let short = build_trap3(&base, d3, 1.0, &f, &p, &cq, 0.1).unwrap();
        let long = build_trap3(&base, d3, 1e9, &f, &p, &cq, 0.1).unwrap();
        let (TrapRegion::TimeExp(s), TrapRegion::TimeExp(l)) = (&short, &long) else { unreachable!() };
        assert!(l.a3 < 1e-9 * s.a3 * 10.0);
        assert!(s.a3 * s.k_e * s.t0 < 1.0);
        assert!(build_trap3(&base, d3, 0.0, &f, &p, &cq, 0.1).is_err());
    }

    #[test]
    fn small_data_radius_is_linear_in_viscosity() {
        let f = ForceField::zero(Dim::Three);
        let cq = constant(ConstantKind::ConvolutionSup, Dim::Three, 33.0);
        let d = |nu: f64| {
            build_smalldata_3d(4.0, &f, &PhysicsParams::new(nu, Dim::Three).unwrap(), &cq, 0.5)
                .unwrap()
                .d()
        };
        assert!((d(2.0) - 2.0 * d(1.0)).abs() < 1e-15);
        assert!((d(1.0) - 0.5 / 33.0).abs() < 1e-15);
        let p = PhysicsParams::new(1.0, Dim::Three).unwrap();
        assert!(build_smalldata_3d(4.0, &f, &p, &cq, 0.0).is_err());
        assert!(matches!(build_smalldata_3d(3.5, &f, &p, &cq, 0.5), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn containment_is_an_intersection() {
        let (f, p) = two();
        let c = constant(ConstantKind::EnstrophyModulus, Dim::Two, 0.8);
        let cq = constant(ConstantKind::ConvolutionSup, Dim::Two, 21.3);
        let base = build_trap1(1e-4, 4.0, &f, &p, &c, 0.1).unwrap();
        let exp = build_trap2(&base, 10.0 * base.d(), &f, &p, &cq, 0.1).unwrap();
        let set = Arc::new(ModeSet::ball(Dim::Two, 8.0));
        let zero = SpectralField::zeros(Arc::clone(&set));
        assert!(base.contains(&zero, 0.0).inside && exp.contains(&zero, 3.0).inside);

        // Saturate the power envelope at one mode beyond K.
        let k = Mode::d2(2, 1).unwrap();
        let env = base.binding_envelope(&k, 0.0).unwrap().value;
        let u = SpectralField::single_pair(
            Arc::clone(&set),
            k,
            [Complex64::new(env / 5f64.sqrt(), 0.0), Complex64::new(-2.0 * env / 5f64.sqrt(), 0.0), 0.0.into()],
        )
        .unwrap();
        assert!(base.contains(&u, 0.0).inside);

        // Beyond K_e the exponential bound is tighter and must also hold.
        let far = Mode::d2(6, 1).unwrap();
        let [poly, expo] = exp.envelopes(&far, 0.0);
        let (poly, expo) = (poly.unwrap().value, expo.unwrap().value);
        assert!(expo < poly);
        let between = 0.5 * (poly + expo);
        let n = 37f64.sqrt();
        let w = SpectralField::single_pair(
            set,
            far,
            [Complex64::new(between / n, 0.0), Complex64::new(-6.0 * between / n, 0.0), 0.0.into()],
        )
        .unwrap();
        assert!(base.contains(&w, 0.0).inside);
        let inside = exp.contains(&w, 0.0);
        assert!(!inside.inside);
        assert!(matches!(
            inside.min_slack().unwrap().constraint,
            Constraint::Modulus { envelope: EnvelopeKind::Exponential, .. }
        ));
        let bigger = u.scaled((1.01 * 1e-4 / u.enstrophy()).sqrt());
        assert!(!base.contains(&bigger, 0.0).inside);
    }

    #[test]
    fn condition_thresholds() {
        let r = check_conditions(4.0, 1.0, Dim::Two).unwrap();
        assert!(r.c1 && r.c2 && r.c3 && r.condition_d);
        let r = check_conditions(3.6, 1.0, Dim::Three).unwrap();
        assert!(r.c2 && r.c3 && !r.condition_d);
        let r = check_conditions(1.0, 1.0, Dim::Two).unwrap();
        assert!(!r.c2 && !r.c3 && !r.condition_d && r.majorant_norm.is_none());
    }
}
