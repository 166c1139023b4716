//! Post-collision velocity algebra.
//!
//! A collision of velocities `(v, u)` is parameterized by the deflection angle
//! `θ ∈ (0, π]` between `v - u` and `v* - u*` and by a point `ξ` of the sphere
//! `S^{d-2}`. The point `ξ` is carried onto the sphere orthogonal to `u - v` by
//! `Γ(u - v, ·)`, built from the Householder reflection that sends `e_d` to the
//! direction of `u - v`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, SpherePoint, Vector};

/// Below this value of `1 + cos(angle)` two directions are treated as
/// antiparallel when building the plane rotation of [`xi_shift`].
const ANTIPARALLEL_TOL: f64 = 1e-8;

/// The reflection `R_X` with `R_X(e_d) = X / |X|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Householder<const D: usize> {
    /// `e_d - X/|X|` and its squared norm; `None` encodes the identity.
    normal: Option<(Vector<D>, f64)>,
}

impl<const D: usize> Householder<D> {
    pub fn identity() -> Self {
        Self { normal: None }
    }

    pub fn is_identity(&self) -> bool {
        self.normal.is_none()
    }

    #[inline]
    pub fn apply(&self, y: &Vector<D>) -> Vector<D> {
        match &self.normal {
            None => *y,
            Some((w, w_sq)) => y.offset(w, -2.0 * y.dot(w) / w_sq),
        }
    }
}

/// Returns the reflection `R_X` sending `e_d` to `X / |X|`.
///
/// When `X / |X|` equals `e_d` the identity is returned.
pub fn householder_align<const D: usize>(x: &Vector<D>) -> Result<Householder<D>> {
    let norm = x.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain(
            "householder_align needs a finite nonzero vector",
        ));
    }
    Ok(align_unit(&(*x * (1.0 / norm))))
}

#[inline]
fn align_unit<const D: usize>(x_hat: &Vector<D>) -> Householder<D> {
    let w = Vector::<D>::last_axis() - *x_hat;
    let w_sq = w.norm_sq();
    if w_sq == 0.0 {
        Householder::identity()
    } else {
        Householder {
            normal: Some((w, w_sq)),
        }
    }
}

/// `Γ(X, ξ) = |X| R_X(ξ, 0)`, with `Γ(0, ξ) = 0`.
#[inline]
pub fn gamma_map<const D: usize>(x: &Vector<D>, xi: &SpherePoint<D>) -> Vector<D> {
    let norm = x.norm();
    if norm == 0.0 {
        return Vector::zero();
    }
    align_unit(&(*x * (1.0 / norm))).apply(&xi.embedded()) * norm
}

/// Rotation in the plane spanned by the unit vectors `a` and `b` that carries
/// `a` onto `b`, applied to `w`.
fn rotate_onto<const D: usize>(a: &Vector<D>, b: &Vector<D>, w: &Vector<D>) -> Vector<D> {
    let c = a.dot(b);
    if 1.0 + c > ANTIPARALLEL_TOL {
        // K = b aᵀ - a bᵀ ;  R = I + K + K² / (1 + c)
        let apply_k = |y: &Vector<D>| *b * a.dot(y) - *a * b.dot(y);
        let kw = apply_k(w);
        let kkw = apply_k(&kw);
        *w + kw + kkw * (1.0 / (1.0 + c))
    } else {
        // Half turn in the plane of `a` and the axis least aligned with it.
        let axis = (0..D)
            .min_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
            .unwrap_or(0);
        let e = Vector::<D>::unit(axis);
        let e = e.offset(a, -a.dot(&e));
        let e = e * (1.0 / e.norm());
        w.offset(a, -2.0 * w.dot(a)).offset(&e, -2.0 * w.dot(&e))
    }
}

/// The shifted sphere point `ξ₀(X, Y, ξ)`.
///
/// `Γ(Y, ξ₀)/|Y|` is the image of `Γ(X, ξ)/|X|` under the plane rotation
/// carrying `X/|X|` onto `Y/|Y|`. The map `ξ ↦ ξ₀` is a composition of
/// isometries of the sphere, hence a measure-preserving bijection, and
/// `|Γ(X, ξ) - Γ(Y, ξ₀)| ≤ 3|X - Y|`.
pub fn xi_shift<const D: usize>(
    x: &Vector<D>,
    y: &Vector<D>,
    xi: &SpherePoint<D>,
) -> Result<SpherePoint<D>> {
    let (nx, ny) = (x.norm(), y.norm());
    if !(nx > 0.0 && ny > 0.0) {
        return Err(Error::domain("xi_shift needs nonzero vectors"));
    }
    if x == y {
        return Ok(*xi);
    }
    let (x_hat, y_hat) = (*x * (1.0 / nx), *y * (1.0 / ny));
    let w = align_unit(&x_hat).apply(&xi.embedded());
    let w = rotate_onto(&x_hat, &y_hat, &w);
    let mut z = align_unit(&y_hat).apply(&w);
    z[D - 1] = 0.0;
    let norm = z.norm();
    if !(norm > 0.0) {
        return Err(Error::domain("xi_shift lost the sphere point to rounding"));
    }
    Ok(SpherePoint::from_embedded_unchecked(z * (1.0 / norm)))
}

/// Deflection vector `α(v, u, θ, ξ) = sin²(θ/2)(u - v) + ½ sin θ Γ(u - v, ξ)`.
///
/// `|α| = |v - u| sin(θ/2)` and `α(v, v, θ, ξ) = 0`.
#[inline]
pub fn alpha<const D: usize>(
    v: &Vector<D>,
    u: &Vector<D>,
    theta: f64,
    xi: &SpherePoint<D>,
) -> Vector<D> {
    let rel = *u - *v;
    let half = (0.5 * theta).sin();
    (rel * (half * half)) + gamma_map(&rel, xi) * (0.5 * theta.sin())
}

/// Post-collision velocities `(v + α, u - α)`.
#[inline]
pub fn collide<const D: usize>(
    v: &Vector<D>,
    u: &Vector<D>,
    theta: f64,
    xi: &SpherePoint<D>,
) -> (Vector<D>, Vector<D>) {
    let a = alpha(v, u, theta, xi);
    (*v + a, *u - a)
}

/// Precomputed `Γ(X, ·)` for one relative velocity, reused across many `ξ`.
#[derive(Debug, Clone, Copy)]
pub struct GammaFrame<const D: usize> {
    reflection: Householder<D>,
    norm: f64,
}

impl<const D: usize> GammaFrame<D> {
    pub fn new(x: &Vector<D>) -> Self {
        let norm = x.norm();
        if norm == 0.0 {
            Self {
                reflection: Householder::identity(),
                norm: 0.0,
            }
        } else {
            Self {
                reflection: align_unit(&(*x * (1.0 / norm))),
                norm,
            }
        }
    }

    #[inline]
    pub fn gamma(&self, xi: &SpherePoint<D>) -> Vector<D> {
        if self.norm == 0.0 {
            return Vector::zero();
        }
        self.reflection.apply(&xi.embedded()) * self.norm
    }
}

/// Surface area `|S^{d-2}|` of the unit sphere in `R^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    // |S^k| = 2π/(k-1) |S^{k-2}|, |S^0| = 2, |S^1| = 2π
    let k = d.saturating_sub(2);
    let mut area = if k.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = if k.is_multiple_of(2) { 2 } else { 3 };
    while j <= k {
        area *= 2.0 * PI / (j as f64 - 1.0);
        j += 2;
    }
    area
}

/// Uniform sample from `S^{d-2}`.
pub fn sample_sphere<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> SpherePoint<D> {
    if D == 3 {
        let phi = 2.0 * PI * rng.random::<f64>();
        let mut v = Vector::<D>::zero();
        v[0] = phi.cos();
        v[1] = phi.sin();
        return SpherePoint::from_embedded_unchecked(v);
    }
    loop {
        let mut v = Vector::<D>::zero();
        for i in 0..D - 1 {
            v[i] = rng.sample(StandardNormal);
        }
        let norm = v.norm();
        if norm > 1e-300 {
            return SpherePoint::from_embedded_unchecked(v * (1.0 / norm));
        }
    }
}

/// Quadrature rule for the surface measure `dξ` on `S^{d-2}`.
///
/// Only `d = 3` is supported: equispaced nodes on the circle with equal
/// weights (trapezoid rule, exact for trigonometric polynomials of degree
/// below the node count).
#[derive(Debug, Clone)]
pub struct SphereQuadrature<const D: usize> {
    nodes: Vec<(SpherePoint<D>, f64)>,
}

impl<const D: usize> SphereQuadrature<D> {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain("sphere quadrature needs at least 2 nodes"));
        }
        if D != 3 {
            return Err(Error::domain(
                "sphere quadrature is implemented for d = 3 only",
            ));
        }
        let weight = 2.0 * PI / m as f64;
        let nodes = (0..m)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / m as f64;
                let mut v = Vector::<D>::zero();
                v[0] = phi.cos();
                v[1] = phi.sin();
                (SpherePoint::from_embedded_unchecked(v), weight)
            })
            .collect();
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[(SpherePoint<D>, f64)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(ξ_i)`.
    pub fn integrate(&self, mut f: impl FnMut(&SpherePoint<D>) -> f64) -> f64 {
        self.nodes.iter().map(|(xi, w)| w * f(xi)).sum()
    }
}
