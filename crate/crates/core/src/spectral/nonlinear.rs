//! The Galerkin-truncated vector field
//!
//! ```text
//! du_k/dt = -i sum_{k1} (u_{k1}|k) ⊓_k u_{k-k1} - ν|k|^2 u_k + ⊓_k f_k
//! ```
//!
//! evaluated by direct convolution over pairs `k1, k - k1` that both lie in
//! the source mode set.

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::cvec::{self, CVec, Compensated, CompensatedVec, ZERO};
use crate::spectral::field::I;
use crate::spectral::{Dim, ForceField, Mode, ModeSet, PhysicsParams, SpectralField};

/// Precomputed triad list: for every representative target mode `k`, the
/// source positions `(k1, k - k1)`.
///
/// Only the lexicographically positive half of the target is summed; the
/// other half follows from reality, which therefore holds exactly.
#[derive(Debug, Clone)]
pub struct ConvolutionPlan {
    source: Arc<ModeSet>,
    target: Arc<ModeSet>,
    reps: Vec<u32>,
    offsets: Vec<u32>,
    pairs: Vec<(u32, u32)>,
}

impl ConvolutionPlan {
    pub fn new(source: &Arc<ModeSet>, target: &Arc<ModeSet>) -> Self {
        assert_eq!(source.dim(), target.dim());
        let mut reps = Vec::new();
        let mut offsets = alloc::vec![0u32];
        let mut pairs = Vec::new();
        for i in target.representatives() {
            let k = target.modes()[i].array();
            for (j1, k1) in source.iter().enumerate() {
                let k1 = k1.array();
                let k2 = [k[0] - k1[0], k[1] - k1[1], k[2] - k1[2]];
                if let Some(j2) = source.position_raw(&k2) {
                    pairs.push((j1 as u32, j2 as u32));
                }
            }
            reps.push(i as u32);
            offsets.push(pairs.len() as u32);
        }
        ConvolutionPlan {
            source: Arc::clone(source),
            target: Arc::clone(target),
            reps,
            offsets,
            pairs,
        }
    }

    /// Galerkin plan for a projection onto itself.
    pub fn galerkin(modes: &Arc<ModeSet>) -> Self {
        Self::new(modes, modes)
    }

    pub fn source(&self) -> &Arc<ModeSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ModeSet> {
        &self.target
    }

    pub fn triads(&self) -> usize {
        self.pairs.len()
    }

    /// `N(u)` on the target set.
    pub fn nonlinear(&self, u: &SpectralField) -> SpectralField {
        assert_eq!(**u.modes(), *self.source, "field does not live on the plan's source set");
        let mut out = alloc::vec![ZERO; self.target.len()];
        let coeffs = u.coeffs();
        for (r, &i) in self.reps.iter().enumerate() {
            let i = i as usize;
            let k = self.target.modes()[i];
            let pairs = &self.pairs[self.offsets[r] as usize..self.offsets[r + 1] as usize];
            let sum = match k.dim() {
                Dim::Two => convolve::<2>(coeffs, pairs, &k.as_f64()),
                Dim::Three => convolve::<3>(coeffs, pairs, &k.as_f64()),
            };
            let n = cvec::scale(&cvec::leray_project(&k, &sum), -I);
            out[self.target.negation(i)] = cvec::conj(&n);
            out[i] = n;
        }
        SpectralField::new_unchecked(Arc::clone(&self.target), out)
            .expect("plan output matches target length")
    }
}

#[inline]
fn convolve<const D: usize>(coeffs: &[CVec], pairs: &[(u32, u32)], k: &[f64; 3]) -> CVec {
    let mut acc = CompensatedVec::default();
    for &(j1, j2) in pairs {
        let a = &coeffs[j1 as usize];
        let b = &coeffs[j2 as usize];
        let mut s = Complex64::new(0.0, 0.0);
        for c in 0..D {
            s += a[c] * k[c];
        }
        let mut term = ZERO;
        for c in 0..D {
            term[c] = b[c] * s;
        }
        acc.add(&term);
    }
    acc.value()
}

/// Unprojected convolution `sum_{k1} (u_{k1}|k) u_{k-k1}` at a single mode.
pub fn convolution_sum(u: &SpectralField, k: &Mode) -> CVec {
    let set = u.modes();
    let kk = k.array();
    let kf = k.as_f64();
    let mut acc = CompensatedVec::default();
    for (k1, a) in u.iter() {
        let k1 = k1.array();
        let k2 = [kk[0] - k1[0], kk[1] - k1[1], kk[2] - k1[2]];
        if let Some(j2) = set.position_raw(&k2) {
            acc.add(&cvec::scale(&u.coeffs()[j2], cvec::dot_k(a, &kf)));
        }
    }
    acc.value()
}

/// `N(u)_k = -i ⊓_k sum (u_{k1}|k) u_{k-k1}` at a single mode.
pub fn nonlinear_at(u: &SpectralField, k: &Mode) -> CVec {
    cvec::scale(&cvec::leray_project(k, &convolution_sum(u, k)), -I)
}

/// Nonlinear term of the Galerkin system on `target`.
pub fn nonlinear_term(u: &SpectralField, target: &Arc<ModeSet>) -> SpectralField {
    ConvolutionPlan::new(u.modes(), target).nonlinear(u)
}

/// Adds `-ν|k|^2 u_k + ⊓_k f_k` to a nonlinear term already on `target`.
pub(crate) fn add_linear_and_force(
    n: &mut SpectralField,
    u: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
) {
    let target = Arc::clone(n.modes());
    let same = **u.modes() == *target;
    for (i, k) in target.iter().enumerate() {
        let uk = if same { u.coeffs()[i] } else { u.get(k) };
        let lin = cvec::scale_re(&uk, p.linear_rate(k));
        let fk = f.projected(k);
        let v = &mut n.coeffs_mut()[i];
        *v = cvec::add(&cvec::add(v, &lin), &fk);
    }
}

/// Full Galerkin vector field on `target`.
pub fn rhs(
    u: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
    target: &Arc<ModeSet>,
) -> SpectralField {
    let mut n = nonlinear_term(u, target);
    add_linear_and_force(&mut n, u, f, p);
    n
}

/// Vector field through a cached plan.
pub fn rhs_with_plan(
    plan: &ConvolutionPlan,
    u: &SpectralField,
    f: &ForceField,
    p: &PhysicsParams,
) -> SpectralField {
    let mut n = plan.nonlinear(u);
    add_linear_and_force(&mut n, u, f, p);
    n
}

/// Vector field at one mode.
pub fn rhs_at(u: &SpectralField, f: &ForceField, p: &PhysicsParams, k: &Mode) -> CVec {
    let n = nonlinear_at(u, k);
    let lin = cvec::scale_re(&u.get(k), p.linear_rate(k));
    cvec::add(&cvec::add(&n, &lin), &f.projected(k))
}

/// Pressure coefficients `p_k` on the field's mode set, from
/// `i p_k k = -i sum (u_{k1}|k)(I - ⊓_k) u_{k-k1} + (I - ⊓_k) f_k`.
pub fn pressure_coefficients(u: &SpectralField, f: &ForceField) -> Result<Vec<(Mode, Complex64)>> {
    const TOL: f64 = 1e-10;
    let mut out = Vec::with_capacity(u.modes().len());
    for k in u.modes().iter() {
        let s = convolution_sum(u, k);
        let r = cvec::add(
            &cvec::scale(&cvec::longitudinal(k, &s), -I),
            &cvec::longitudinal(k, &f.get(k)),
        );
        let kf = k.as_f64();
        let pk = cvec::dot_k(&r, &kf) / (I * k.norm_sq() as f64);
        let back = cvec::scale(&[kf[0].into(), kf[1].into(), kf[2].into()], I * pk);
        let residual = cvec::norm(&cvec::sub(&r, &back)) / (1.0 + cvec::norm(&r));
        if !(residual <= TOL) {
            return Err(Error::PressureInconsistent {
                mode: *k,
                residual,
            });
        }
        out.push((*k, pk));
    }
    Ok(out)
}

/// `V(u) = sum |k|^2 |u_k|^2`.
pub fn enstrophy(u: &SpectralField) -> f64 {
    u.enstrophy()
}

/// `V(F) = sqrt(sum |k|^2 |f_k|^2)`, with `f_k^2` read as the squared modulus.
pub fn force_enstrophy_norm(f: &ForceField) -> f64 {
    f.field().enstrophy().sqrt()
}

/// `dV/dt = 2 Re sum |k|^2 conj(u_k) · F_k` along a vector field sample.
pub fn enstrophy_rate(u: &SpectralField, field: &SpectralField) -> f64 {
    let mut acc = Compensated::default();
    for ((k, a), b) in u.iter().zip(field.coeffs()) {
        acc.add(2.0 * k.norm_sq() as f64 * cvec::inner(a, b).re);
    }
    acc.value()
}
