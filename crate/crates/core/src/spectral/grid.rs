//! Physical-space evaluation of the nonlinear term, kept as an independent
//! check on the convolution. Transforms are direct separable sums, not FFTs.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::cvec::{self, CVec, ZERO};
use crate::spectral::{Dim, ModeSet, SpectralField};

/// Smallest grid size per axis for which `(u·∇)u` is alias-free on `target`.
///
/// The product carries modes with components up to `2 M_u`; a target mode
/// with components up to `M_t` is hit by an alias exactly when
/// `N <= 2 M_u + M_t`.
pub fn alias_free_resolution(source: &ModeSet, target: &ModeSet) -> usize {
    (2 * source.bound() + target.bound() + 1) as usize
}

struct Grid {
    n: usize,
    dim: usize,
    /// `phase[j * (2b + 1) + (c + b)] = exp(2πi c j / n)`
    phase: Vec<Complex64>,
    b: i32,
}

impl Grid {
    fn new(dim: Dim, n: usize, b: i32) -> Self {
        let side = (2 * b + 1) as usize;
        let mut phase = Vec::with_capacity(n * side);
        for j in 0..n {
            for c in -b..=b {
                // Reduce the integer product first so the angle stays small.
                let m = (c as i64 * j as i64).rem_euclid(n as i64) as f64;
                phase.push(Complex64::from_polar(1.0, 2.0 * core::f64::consts::PI * m / n as f64));
            }
        }
        Grid {
            n,
            dim: dim.get(),
            phase,
            b,
        }
    }

    #[inline]
    fn e(&self, j: usize, c: i32) -> Complex64 {
        self.phase[j * (2 * self.b + 1) as usize + (c + self.b) as usize]
    }

    fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    fn coords(&self, p: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut r = p;
        for axis in (0..self.dim).rev() {
            out[axis] = r % self.n;
            r /= self.n;
        }
        out
    }

    /// `exp(i k·x_p)`
    fn wave(&self, k: &[i32; 3], x: &[usize; 3]) -> Complex64 {
        let mut w = Complex64::new(1.0, 0.0);
        for axis in 0..self.dim {
            w *= self.e(x[axis], k[axis]);
        }
        w
    }
}

/// Fourier coefficients of `(u·∇)u` on `target`, before any projection.
///
/// `resolution` defaults to [`alias_free_resolution`]; a smaller value is
/// rejected.
pub fn advection_grid(
    u: &SpectralField,
    target: &Arc<ModeSet>,
    resolution: Option<usize>,
) -> Result<Vec<CVec>> {
    let dim = u.dim();
    if target.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.get(),
            found: target.dim().get(),
        });
    }
    let required = alias_free_resolution(u.modes(), target);
    let n = resolution.unwrap_or(required);
    if n < required {
        return Err(Error::ResolutionTooSmall { given: n, required });
    }
    let b = u.modes().bound().max(target.bound());
    let grid = Grid::new(dim, n, b);
    let d = dim.get();

    let mut product = Vec::with_capacity(grid.points());
    for p in 0..grid.points() {
        let x = grid.coords(p);
        let mut vel = ZERO;
        let mut grad = [ZERO; 3];
        for (k, uk) in u.iter() {
            let w = grid.wave(&k.array(), &x);
            let kf = k.as_f64();
            for a in 0..d {
                let v = uk[a] * w;
                vel[a] += v;
                for c in 0..d {
                    grad[c][a] += v * Complex64::new(0.0, kf[c]);
                }
            }
        }
        let mut adv = ZERO;
        for c in 0..d {
            for a in 0..d {
                adv[a] += vel[c] * grad[c][a];
            }
        }
        product.push((x, adv));
    }

    let norm = 1.0 / grid.points() as f64;
    let out = target
        .iter()
        .map(|k| {
            let neg = [-k.array()[0], -k.array()[1], -k.array()[2]];
            let mut acc = ZERO;
            for (x, adv) in &product {
                let w = grid.wave(&neg, x);
                for a in 0..d {
                    acc[a] += adv[a] * w;
                }
            }
            cvec::scale_re(&acc, norm)
        })
        .collect();
    Ok(out)
}

/// `N(u)_k = -⊓_k [(u·∇)u]_k` computed on a physical grid.
pub fn nonlinear_term_grid(
    u: &SpectralField,
    target: &Arc<ModeSet>,
    resolution: Option<usize>,
) -> Result<SpectralField> {
    let adv = advection_grid(u, target, resolution)?;
    let coeffs = target
        .iter()
        .zip(&adv)
        .map(|(k, a)| cvec::scale_re(&cvec::leray_project(k, a), -1.0))
        .collect();
    SpectralField::new_unchecked(Arc::clone(target), coeffs)
}
