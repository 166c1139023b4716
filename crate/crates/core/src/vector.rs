use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Fixed-dimension real vector; holds positions, velocities and collision
/// directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector<const D: usize>(pub [f64; D]);

impl<const D: usize> Default for Vector<D> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D: usize> Vector<D> {
    pub const fn new(coords: [f64; D]) -> Self {
        Self(coords)
    }

    pub const fn zero() -> Self {
        Self([0.0; D])
    }

    /// The `i`-th canonical basis vector.
    pub fn unit(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = 1.0;
        v
    }

    /// `e_d`, the last basis vector.
    pub fn last_axis() -> Self {
        Self::unit(D - 1)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `⟨v⟩ = (1 + |v|²)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `self + t * dir`.
    #[inline]
    pub fn offset(&self, dir: &Self, t: f64) -> Self {
        let mut out = *self;
        for (o, d) in out.0.iter_mut().zip(dir.0.iter()) {
            *o += t * d;
        }
        out
    }
}

impl<const D: usize> Index<usize> for Vector<D> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Vector<D> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Add for Vector<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> Sub for Vector<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> AddAssign for Vector<D> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

impl<const D: usize> SubAssign for Vector<D> {
    fn sub_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a -= b;
        }
    }
}

impl<const D: usize> Mul<f64> for Vector<D> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl<const D: usize> Neg for Vector<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// A point `ξ` of the unit sphere `S^{d-2} ⊂ R^{d-1}`.
///
/// Stored embedded in `R^d` as `(ξ₁, …, ξ_{d-1}, 0)`, which is the form every
/// consumer needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint<const D: usize>(Vector<D>);

impl<const D: usize> SpherePoint<D> {
    /// Tolerance on `| |ξ| - 1 |` accepted by [`SpherePoint::new`].
    pub const NORM_TOL: f64 = 1e-12;

    /// Builds `ξ` from its `d - 1` coordinates.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if D < 3 {
            return Err(Error::domain("dimension must be at least 3"));
        }
        if coords.len() != D - 1 {
            return Err(Error::domain("sphere point needs d - 1 coordinates"));
        }
        let mut v = Vector::zero();
        v.0[..D - 1].copy_from_slice(coords);
        if !v.is_finite() || (v.norm() - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::domain("sphere point must have unit norm"));
        }
        Ok(Self(v))
    }

    /// Normalizes a nonzero vector of `d - 1` coordinates onto the sphere.
    pub fn normalized(coords: &[f64]) -> Result<Self> {
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero vector"));
        }
        let mut v = Vector::<D>::zero();
        if coords.len() != D - 1 {
            return Err(Error::domain("sphere point needs d - 1 coordinates"));
        }
        for (o, c) in v.0.iter_mut().zip(coords) {
            *o = c / norm;
        }
        Ok(Self(v))
    }

    /// Wraps an embedded vector whose last coordinate is zero and whose norm
    /// is one. Callers guarantee both.
    pub(crate) fn from_embedded_unchecked(v: Vector<D>) -> Self {
        debug_assert!(v.0[D - 1] == 0.0);
        Self(v)
    }

    /// The `d - 1` coordinates of `ξ`.
    pub fn coords(&self) -> &[f64] {
        &self.0 .0[..D - 1]
    }

    /// `(ξ, 0) ∈ R^d`.
    pub fn embedded(&self) -> Vector<D> {
        self.0
    }
}

impl SpherePoint<3> {
    /// `ξ = (cos φ, sin φ)` on the circle.
    pub fn from_angle(phi: f64) -> Self {
        Self(Vector::new([phi.cos(), phi.sin(), 0.0]))
    }
}
