#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectral::{Dim, Mode};

const ABSENT: u32 = u32::MAX;

/// How a [`ModeSet`] was constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "shape", rename_all = "snake_case"))]
pub enum Shape {
    /// `0 < |k| <= radius`
    Ball { radius: f64 },
    /// `0 < max_i |k_i| <= half_width`
    Cube { half_width: i32 },
    /// `inner < |k| <= outer`
    Annulus { inner: f64, outer: f64 },
    Custom,
}

/// A finite symmetric subset of `Z^d \ {0}`, sorted lexicographically.
///
/// Every Galerkin projection is identified with one of these. Lookup goes
/// through a dense `(2b+1)^d` table where `b` is the largest component.
#[derive(Debug, Clone)]
pub struct ModeSet {
    dim: Dim,
    shape: Shape,
    modes: Vec<Mode>,
    bound: i32,
    table: Vec<u32>,
    /// `neg[i]` is the position of `-modes[i]`.
    neg: Vec<u32>,
}

impl PartialEq for ModeSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.modes == other.modes
    }
}

impl ModeSet {
    /// The canonical projection `{k : 0 < |k| <= radius}`.
    pub fn ball(dim: Dim, radius: f64) -> Self {
        let b = radius.max(0.0) as i32;
        let r2 = radius * radius;
        let modes = lattice_box(dim, b)
            .filter(|k| (k.norm_sq() as f64) <= r2)
            .collect();
        Self::build(dim, Shape::Ball { radius }, modes)
    }

    pub fn cube(dim: Dim, half_width: i32) -> Self {
        let modes = lattice_box(dim, half_width.max(0)).collect();
        Self::build(dim, Shape::Cube { half_width }, modes)
    }

    pub fn annulus(dim: Dim, inner: f64, outer: f64) -> Self {
        let b = outer.max(0.0) as i32;
        let (i2, o2) = (inner * inner, outer * outer);
        let modes = lattice_box(dim, b)
            .filter(|k| {
                let n = k.norm_sq() as f64;
                n > i2 && n <= o2
            })
            .collect();
        Self::build(dim, Shape::Annulus { inner, outer }, modes)
    }

    /// Arbitrary modes; duplicates are merged and symmetry is checked.
    pub fn from_modes<I: IntoIterator<Item = Mode>>(dim: Dim, modes: I) -> Result<Self> {
        let mut modes: Vec<Mode> = modes.into_iter().collect();
        for k in &modes {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim.get(),
                    found: k.dim().get(),
                });
            }
        }
        modes.sort_unstable();
        modes.dedup();
        for k in &modes {
            if modes.binary_search(&-*k).is_err() {
                return Err(Error::Asymmetric(*k));
            }
        }
        Ok(Self::build(dim, Shape::Custom, modes))
    }

    pub fn empty(dim: Dim) -> Self {
        Self::build(dim, Shape::Custom, Vec::new())
    }

    fn build(dim: Dim, shape: Shape, mut modes: Vec<Mode>) -> Self {
        modes.sort_unstable();
        let bound = modes.iter().map(Mode::max_abs).max().unwrap_or(0);
        let side = (2 * bound + 1) as usize;
        let cells = side.pow(dim.get() as u32);
        let mut table = vec![ABSENT; cells];
        for (i, k) in modes.iter().enumerate() {
            table[cell(dim, bound, &k.array())] = i as u32;
        }
        let neg = modes
            .iter()
            .map(|k| table[cell(dim, bound, &(-*k).array())])
            .collect();
        ModeSet {
            dim,
            shape,
            modes,
            bound,
            table,
            neg,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Mode> {
        self.modes.iter()
    }

    /// Largest `|k_i|` over the set.
    pub fn bound(&self) -> i32 {
        self.bound
    }

    /// Largest Euclidean norm over the set.
    pub fn max_norm(&self) -> f64 {
        self.modes
            .iter()
            .map(Mode::norm_sq)
            .max()
            .map(|n| (n as f64).sqrt())
            .unwrap_or(0.0)
    }

    /// Position of a mode given by its raw components.
    #[inline]
    pub fn position_raw(&self, k: &[i32; 3]) -> Option<usize> {
        let b = self.bound;
        if k.iter().any(|c| c.abs() > b) {
            return None;
        }
        match self.table[cell(self.dim, b, k)] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    pub fn position(&self, k: &Mode) -> Option<usize> {
        if k.dim() != self.dim {
            return None;
        }
        self.position_raw(&k.array())
    }

    pub fn contains(&self, k: &Mode) -> bool {
        self.position(k).is_some()
    }

    /// Position of `-modes[i]`.
    #[inline]
    pub fn negation(&self, i: usize) -> usize {
        self.neg[i] as usize
    }

    /// Indices of the lexicographically positive half of the set.
    pub fn representatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_representative())
            .map(|(i, _)| i)
    }

    pub fn is_subset_of(&self, other: &ModeSet) -> bool {
        self.dim == other.dim && self.modes.iter().all(|k| other.contains(k))
    }
}

#[inline]
fn cell(dim: Dim, bound: i32, k: &[i32; 3]) -> usize {
    let side = (2 * bound + 1) as usize;
    let mut idx = 0usize;
    for c in &k[..dim.get()] {
        idx = idx * side + (c + bound) as usize;
    }
    idx
}

/// Every nonzero lattice point with `max_i |k_i| <= b`, in lexicographic order.
pub(crate) fn lattice_box(dim: Dim, b: i32) -> impl Iterator<Item = Mode> {
    let zr = match dim {
        Dim::Two => 0..=0,
        Dim::Three => -b..=b,
    };
    (-b..=b).flat_map(move |x| {
        let zr = zr.clone();
        (-b..=b).flat_map(move |y| {
            zr.clone()
                .filter_map(move |z| Mode::from_array(dim, [x, y, z]).ok())
        })
    })
}
