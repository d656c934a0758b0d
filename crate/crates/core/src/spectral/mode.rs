#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use core::fmt;
use core::ops::{Neg, Sub};

use crate::error::{Error, Result};

/// Spatial dimension of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "usize", into = "usize"))]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub const fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Area of the unit sphere `S^{d-1}`.
    pub fn sphere_area(self) -> f64 {
        match self {
            Dim::Two => 2.0 * core::f64::consts::PI,
            Dim::Three => 4.0 * core::f64::consts::PI,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::BadDimension(other)),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.get()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// A nonzero wave vector `k` in `Z^d`.
///
/// Two-dimensional modes keep a zero third component so that every mode has
/// the same in-memory layout; the dimension tag decides how many components
/// are meaningful.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    dim: Dim,
    k: [i32; 3],
}

impl Mode {
    pub fn new(dim: Dim, components: &[i32]) -> Result<Self> {
        if components.len() != dim.get() {
            return Err(Error::DimensionMismatch {
                expected: dim.get(),
                found: components.len(),
            });
        }
        let mut k = [0; 3];
        k[..components.len()].copy_from_slice(components);
        Self::from_array(dim, k)
    }

    pub fn from_array(dim: Dim, k: [i32; 3]) -> Result<Self> {
        if dim == Dim::Two && k[2] != 0 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: 3,
            });
        }
        if k == [0; 3] {
            return Err(Error::ZeroMode);
        }
        Ok(Mode { dim, k })
    }

    pub fn d2(x: i32, y: i32) -> Result<Self> {
        Self::from_array(Dim::Two, [x, y, 0])
    }

    pub fn d3(x: i32, y: i32, z: i32) -> Result<Self> {
        Self::from_array(Dim::Three, [x, y, z])
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// All three stored components (the last is zero for `d = 2`).
    pub fn array(&self) -> [i32; 3] {
        self.k
    }

    pub fn components(&self) -> &[i32] {
        &self.k[..self.dim.get()]
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.k[0] as f64, self.k[1] as f64, self.k[2] as f64]
    }

    pub fn norm_sq(&self) -> i64 {
        self.k.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> i32 {
        self.k.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// True for the lexicographically positive member of `{k, -k}`.
    pub fn is_representative(&self) -> bool {
        self.k
            .iter()
            .find(|&&c| c != 0)
            .map(|&c| c > 0)
            .unwrap_or(false)
    }

    /// `self - other`, or `None` when the difference is the zero vector.
    pub fn checked_sub(&self, other: &Mode) -> Option<Mode> {
        debug_assert_eq!(self.dim, other.dim);
        let k = [
            self.k[0] - other.k[0],
            self.k[1] - other.k[1],
            self.k[2] - other.k[2],
        ];
        Mode::from_array(self.dim, k).ok()
    }
}

impl Neg for Mode {
    type Output = Mode;

    fn neg(self) -> Mode {
        Mode {
            dim: self.dim,
            k: [-self.k[0], -self.k[1], -self.k[2]],
        }
    }
}

impl Sub for Mode {
    type Output = Option<Mode>;

    fn sub(self, rhs: Mode) -> Option<Mode> {
        self.checked_sub(&rhs)
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.components().serialize(s)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Mode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v: alloc::vec::Vec<i32> = serde::Deserialize::deserialize(d)?;
        let dim = Dim::try_from(v.len()).map_err(serde::de::Error::custom)?;
        Mode::new(dim, &v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_rejected() {
        assert_eq!(Mode::d2(0, 0), Err(Error::ZeroMode));
        assert_eq!(Mode::d3(0, 0, 0), Err(Error::ZeroMode));
    }

    #[test]
    fn representative_picks_one_of_each_pair() {
        for (x, y) in [(1, 0), (0, 1), (2, -3), (-1, 4), (0, -2)] {
            let k = Mode::d2(x, y).unwrap();
            assert_ne!(k.is_representative(), (-k).is_representative());
        }
    }

    #[test]
    fn norms() {
        let k = Mode::d3(1, -2, 2).unwrap();
        assert_eq!(k.norm_sq(), 9);
        assert_eq!(k.norm(), 3.0);
        assert_eq!(k.max_abs(), 2);
        assert!(Mode::d2(1, 1).unwrap().checked_sub(&Mode::d2(1, 1).unwrap()).is_none());
    }
}
