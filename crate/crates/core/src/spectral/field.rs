#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Invariant, Result};
use crate::spectral::cvec::{self, CVec, Compensated, ZERO};
use crate::spectral::{Dim, Mode, ModeSet};

/// Tolerance used when validating incompressibility and reality.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Velocity coefficients `{u_k}` on a symmetric mode set, stored in the
/// set's lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    modes: Arc<ModeSet>,
    coeffs: Vec<CVec>,
}

impl SpectralField {
    pub fn zeros(modes: Arc<ModeSet>) -> Self {
        let coeffs = alloc::vec![ZERO; modes.len()];
        SpectralField { modes, coeffs }
    }

    /// Checked constructor; rejects fields violating incompressibility or
    /// reality beyond [`INVARIANT_TOL`].
    pub fn new(modes: Arc<ModeSet>, coeffs: Vec<CVec>) -> Result<Self> {
        let f = Self::new_unchecked(modes, coeffs)?;
        f.validate(INVARIANT_TOL)?;
        Ok(f)
    }

    /// Only checks the length.
    pub fn new_unchecked(modes: Arc<ModeSet>, coeffs: Vec<CVec>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::LengthMismatch {
                expected: modes.len(),
                found: coeffs.len(),
            });
        }
        Ok(SpectralField { modes, coeffs })
    }

    /// Sets the listed modes (which must lie in `modes`), everything else zero.
    pub fn from_pairs<I>(modes: Arc<ModeSet>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, CVec)>,
    {
        let mut f = Self::zeros(modes);
        for (k, v) in pairs {
            let i = f.modes.position(&k).ok_or(Error::ModeNotInSet(k))?;
            f.coeffs[i] = v;
        }
        f.validate(INVARIANT_TOL)?;
        Ok(f)
    }

    /// A single conjugate pair: `u_k = v`, `u_{-k} = conj(v)`.
    pub fn single_pair(modes: Arc<ModeSet>, k: Mode, v: CVec) -> Result<Self> {
        Self::from_pairs(modes, [(k, v), (-k, cvec::conj(&v))])
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn dim(&self) -> Dim {
        self.modes.dim()
    }

    pub fn coeffs(&self) -> &[CVec] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [CVec] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<CVec> {
        self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &CVec)> {
        self.modes.iter().zip(self.coeffs.iter())
    }

    /// `u_k`, or zero when `k` is outside the mode set.
    pub fn get(&self, k: &Mode) -> CVec {
        self.modes.position(k).map(|i| self.coeffs[i]).unwrap_or(ZERO)
    }

    /// Largest invariant residual, relative to `1 + |u_k|`.
    pub fn invariant_residual(&self) -> (f64, Option<(usize, Invariant)>) {
        self.residual_impl(true)
    }

    fn residual_impl(&self, solenoidal: bool) -> (f64, Option<(usize, Invariant)>) {
        let mut worst = (0.0, None);
        let planar = self.dim() == Dim::Two;
        for (i, (k, u)) in self.iter().enumerate() {
            let scale = 1.0 + cvec::norm(u);
            if !u.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return (f64::INFINITY, Some((i, Invariant::Finiteness)));
            }
            let div = if solenoidal {
                cvec::dot_k(u, &k.as_f64()).norm() / k.norm() / scale
            } else {
                0.0
            };
            if div > worst.0 {
                worst = (div, Some((i, Invariant::Incompressibility)));
            }
            let mirror = cvec::conj(&self.coeffs[self.modes.negation(i)]);
            let real = cvec::norm(&cvec::sub(u, &mirror)) / scale;
            if real > worst.0 {
                worst = (real, Some((i, Invariant::Reality)));
            }
            if planar {
                let z = u[2].norm() / scale;
                if z > worst.0 {
                    worst = (z, Some((i, Invariant::Planarity)));
                }
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        self.validate_impl(tol, true)
    }

    fn validate_impl(&self, tol: f64, solenoidal: bool) -> Result<()> {
        match self.residual_impl(solenoidal) {
            (r, Some((index, kind))) if !(r <= tol) => Err(Error::InvariantViolation {
                mode: self.modes.modes()[index],
                index,
                kind,
                residual: r,
            }),
            _ => Ok(()),
        }
    }

    /// Fills every `u_{-k}` from the representative `u_k` and Leray-projects.
    pub fn symmetrize(&mut self) {
        let modes = Arc::clone(&self.modes);
        for i in modes.representatives() {
            let k = modes.modes()[i];
            let v = cvec::leray_project(&k, &self.coeffs[i]);
            self.coeffs[i] = v;
            self.coeffs[modes.negation(i)] = cvec::conj(&v);
        }
    }

    /// `|u_k|` at position `i`.
    pub fn modulus(&self, i: usize) -> f64 {
        cvec::norm(&self.coeffs[i])
    }

    /// Euclidean norm `sqrt(sum_k |u_k|^2)` over every stored mode.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(cvec::norm_sq)
            .collect::<Compensated>()
            .value()
            .sqrt()
    }

    /// Enstrophy `V = sum_k |k|^2 |u_k|^2`.
    pub fn enstrophy(&self) -> f64 {
        self.iter()
            .map(|(k, u)| k.norm_sq() as f64 * cvec::norm_sq(u))
            .collect::<Compensated>()
            .value()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpectralField {
            modes: Arc::clone(&self.modes),
            coeffs: self.coeffs.iter().map(|v| cvec::scale_re(v, s)).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&CVec, &CVec) -> CVec) -> Self {
        assert_eq!(*self.modes, *other.modes, "fields live on different mode sets");
        SpectralField {
            modes: Arc::clone(&self.modes),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, cvec::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, cvec::sub)
    }

    /// `|self - other|` in the Euclidean norm.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    /// Restriction to `target`: modes outside `self` are zero.
    pub fn project(&self, target: &Arc<ModeSet>) -> SpectralField {
        let coeffs = target.iter().map(|k| self.get(k)).collect();
        SpectralField {
            modes: Arc::clone(target),
            coeffs,
        }
    }

    /// FNV-1a over the coefficient bit patterns; identifies a state in reports.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.coeffs {
            for c in v {
                for w in [c.re.to_bits(), c.im.to_bits()] {
                    for b in w.to_le_bytes() {
                        h ^= b as u64;
                        h = h.wrapping_mul(0x0100_0000_01b3);
                    }
                }
            }
        }
        h
    }
}

/// External forcing `{f_k}`. Stored as given; `⊓_k` is applied when the
/// force enters the vector field, and `(I - ⊓_k) f_k` feeds the pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    field: SpectralField,
}

impl ForceField {
    pub fn zero(dim: Dim) -> Self {
        ForceField {
            field: SpectralField::zeros(Arc::new(ModeSet::empty(dim))),
        }
    }

    /// Requires reality and finiteness; incompressibility is not required.
    pub fn new(modes: Arc<ModeSet>, coeffs: Vec<CVec>) -> Result<Self> {
        let field = SpectralField::new_unchecked(modes, coeffs)?;
        field.validate_impl(INVARIANT_TOL, false)?;
        Ok(ForceField { field })
    }

    pub fn from_field(field: SpectralField) -> Self {
        ForceField { field }
    }

    pub fn dim(&self) -> Dim {
        self.field.dim()
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn get(&self, k: &Mode) -> CVec {
        self.field.get(k)
    }

    /// `⊓_k f_k`
    pub fn projected(&self, k: &Mode) -> CVec {
        cvec::leray_project(k, &self.get(k))
    }

    pub fn is_zero(&self) -> bool {
        self.field.coeffs.iter().all(|v| *v == ZERO)
    }

    /// Largest `|k|` carrying a nonzero coefficient (0 for the zero force).
    pub fn cutoff(&self) -> f64 {
        self.field
            .iter()
            .filter(|(_, v)| **v != ZERO)
            .map(|(k, _)| k.norm())
            .fold(0.0, f64::max)
    }
}

/// Viscosity and dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicsParams {
    pub nu: f64,
    pub dim: Dim,
}

impl PhysicsParams {
    pub fn new(nu: f64, dim: Dim) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Parameter(alloc::format!("viscosity must be positive, got {nu}")));
        }
        Ok(PhysicsParams { nu, dim })
    }

    /// `λ_k = -ν |k|^2`
    pub fn linear_rate(&self, k: &Mode) -> f64 {
        -self.nu * k.norm_sq() as f64
    }
}

/// Unit imaginary helper used by several call sites.
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);
