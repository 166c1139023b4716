//! Functionals of the empirical measure: moments, the collision operators
//! and the weak-form residuals of the kinetic equation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{GammaFrame, SphereQuadrature};
use crate::kernels::{AngularMeasure, ResolvedKernels};
use crate::{Error, Result, Vector};

/// Largest `n` accepted by the quadratic-cost diagnostics.
pub const MAX_PAIRWISE_N: usize = 1000;

/// Minimum node count per quadrature dimension.
pub const MIN_QUAD_NODES: usize = 8;

/// One particle `(r, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint<const D: usize> {
    pub position: Vector<D>,
    pub velocity: Vector<D>,
}

/// The empirical measure `(1/n) Σ δ_{(r_k, v_k)}` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSnapshot<const D: usize> {
    pub time: f64,
    pub points: Vec<PhasePoint<D>>,
}

impl<const D: usize> EmpiricalSnapshot<D> {
    pub fn new(time: f64, points: Vec<PhasePoint<D>>) -> Self {
        Self { time, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks `n ≥ 1` and finiteness of every coordinate.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::domain("empty snapshot"));
        }
        if !self.time.is_finite()
            || self
                .points
                .iter()
                .any(|p| !p.position.is_finite() || !p.velocity.is_finite())
        {
            return Err(Error::domain("snapshot has non-finite coordinates"));
        }
        Ok(())
    }

    /// `⟨ψ, μ⟩`.
    pub fn mean<P: PhaseFunction<D> + ?Sized>(&self, psi: &P) -> f64 {
        self.points
            .iter()
            .map(|p| psi.eval(&p.position, &p.velocity))
            .sum::<f64>()
            / self.len() as f64
    }
}

/// `(1/n) Σ ⟨v_k⟩^p`.
pub fn moment<const D: usize>(s: &EmpiricalSnapshot<D>, p: f64) -> f64 {
    debug_assert!(p >= 0.0);
    let half = 0.5 * p;
    s.points
        .iter()
        .map(|pt| (1.0 + pt.velocity.norm_sq()).powf(half))
        .sum::<f64>()
        / s.len() as f64
}

/// Moment of order `p` at a sequence of times.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub p: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MomentSeries {
    pub fn from_snapshots<const D: usize>(snapshots: &[EmpiricalSnapshot<D>], p: f64) -> Self {
        Self {
            p,
            times: snapshots.iter().map(|s| s.time).collect(),
            values: snapshots.iter().map(|s| moment(s, p)).collect(),
        }
    }

    /// Running maximum `sup_{s ≤ t}` of the series.
    pub fn running_max(&self) -> Self {
        let mut best = f64::NEG_INFINITY;
        Self {
            p: self.p,
            times: self.times.clone(),
            values: self
                .values
                .iter()
                .map(|&v| {
                    best = best.max(v);
                    best
                })
                .collect(),
        }
    }
}

/// The quantity a smooth clamp is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monomial {
    /// `v_i`.
    Velocity(usize),
    /// `r_i`.
    Position(usize),
    /// `|v|²`.
    Energy,
}

/// A bounded function of `(r, v)` with bounded continuous first derivatives.
pub trait PhaseFunction<const D: usize> {
    fn eval(&self, r: &Vector<D>, v: &Vector<D>) -> f64;

    /// `(∇_r ψ, ∇_v ψ)`.
    fn gradient(&self, r: &Vector<D>, v: &Vector<D>) -> (Vector<D>, Vector<D>);

    /// Upper bounds on `(‖∇_r ψ‖_∞, ‖∇_v ψ‖_∞)`.
    fn gradient_bounds(&self) -> (f64, f64);

    /// True when `ψ(r, ·)` and `∇_r ψ(r, ·)` vanish identically.
    fn vanishes_at(&self, _r: &Vector<D>) -> bool {
        false
    }

    fn is_constant(&self) -> bool {
        false
    }
}

/// Bounded test functions with bounded continuous first derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction<const D: usize> {
    /// `exp(1 - 1/(1 - s))` for `s = (|r - r₀|² + |v - v₀|²)/R² < 1`, else 0.
    Bump {
        r_center: Vector<D>,
        v_center: Vector<D>,
        radius: f64,
    },
    /// `L tanh(x / L)` of a monomial `x`.
    Clamp {
        monomial: Monomial,
        scale: f64,
    },
    Constant(f64),
}

impl<const D: usize> TestFunction<D> {
    pub fn bump(r_center: Vector<D>, v_center: Vector<D>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain("bump radius must be positive"));
        }
        Ok(Self::Bump {
            r_center,
            v_center,
            radius,
        })
    }

    pub fn clamp(monomial: Monomial, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("clamp scale must be positive"));
        }
        match monomial {
            Monomial::Velocity(i) | Monomial::Position(i) if i >= D => {
                Err(Error::domain("monomial index out of range"))
            }
            _ => Ok(Self::Clamp { monomial, scale }),
        }
    }

    fn bump_arg(r: &Vector<D>, v: &Vector<D>, rc: &Vector<D>, vc: &Vector<D>, radius: f64) -> f64 {
        ((*r - *rc).norm_sq() + (*v - *vc).norm_sq()) / (radius * radius)
    }

    fn monomial(m: Monomial, r: &Vector<D>, v: &Vector<D>) -> f64 {
        match m {
            Monomial::Velocity(i) => v[i],
            Monomial::Position(i) => r[i],
            Monomial::Energy => v.norm_sq(),
        }
    }

    pub fn eval(&self, r: &Vector<D>, v: &Vector<D>) -> f64 {
        match *self {
            Self::Bump {
                r_center,
                v_center,
                radius,
            } => {
                let s = Self::bump_arg(r, v, &r_center, &v_center, radius);
                if s < 1.0 {
                    (1.0 - 1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
            Self::Clamp { monomial, scale } => {
                scale * (Self::monomial(monomial, r, v) / scale).tanh()
            }
            Self::Constant(c) => c,
        }
    }

    /// `(∇_r ψ, ∇_v ψ)`.
    pub fn gradient(&self, r: &Vector<D>, v: &Vector<D>) -> (Vector<D>, Vector<D>) {
        match *self {
            Self::Bump {
                r_center,
                v_center,
                radius,
            } => {
                let s = Self::bump_arg(r, v, &r_center, &v_center, radius);
                if s >= 1.0 {
                    return (Vector::zero(), Vector::zero());
                }
                let g = 1.0 - s;
                let dpsi_ds = -(1.0 - 1.0 / g).exp() / (g * g);
                let c = 2.0 * dpsi_ds / (radius * radius);
                ((*r - r_center) * c, (*v - v_center) * c)
            }
            Self::Clamp { monomial, scale } => {
                let x = Self::monomial(monomial, r, v);
                let sech2 = 1.0 - (x / scale).tanh().powi(2);
                match monomial {
                    Monomial::Velocity(i) => (Vector::zero(), Vector::unit(i) * sech2),
                    Monomial::Position(i) => (Vector::unit(i) * sech2, Vector::zero()),
                    Monomial::Energy => (Vector::zero(), *v * (2.0 * sech2)),
                }
            }
            Self::Constant(_) => (Vector::zero(), Vector::zero()),
        }
    }

    /// Upper bounds on `(‖∇_r ψ‖_∞, ‖∇_v ψ‖_∞)`, by a fine scan of the radial
    /// profile with a small safety margin.
    pub fn gradient_bounds(&self) -> (f64, f64) {
        const SCAN: usize = 4096;
        const MARGIN: f64 = 1.01;
        match *self {
            Self::Bump { radius, .. } => {
                // |∇ψ| = (2√s / R) ψ(s) / (1 - s)²
                let sup = (1..SCAN)
                    .map(|i| {
                        let s = i as f64 / SCAN as f64;
                        let g = 1.0 - s;
                        2.0 * s.sqrt() / radius * (1.0 - 1.0 / g).exp() / (g * g)
                    })
                    .fold(0.0, f64::max)
                    * MARGIN;
                (sup, sup)
            }
            Self::Clamp { monomial, scale } => match monomial {
                Monomial::Velocity(_) => (0.0, 1.0),
                Monomial::Position(_) => (1.0, 0.0),
                Monomial::Energy => {
                    // 2x sech²(x²/L), maximized at x ~ √L
                    let top = 4.0 * scale.sqrt();
                    let sup = (0..=SCAN)
                        .map(|i| {
                            let x = top * i as f64 / SCAN as f64;
                            2.0 * x * (1.0 - (x * x / scale).tanh().powi(2))
                        })
                        .fold(0.0, f64::max)
                        * MARGIN;
                    (0.0, sup)
                }
            },
            Self::Constant(_) => (0.0, 0.0),
        }
    }

    /// True when `ψ(r, ·) ≡ 0` and `∇_r ψ(r, ·) ≡ 0`, so `𝒜ψ` vanishes at `r`.
    pub fn vanishes_at(&self, r: &Vector<D>) -> bool {
        match *self {
            Self::Bump {
                r_center, radius, ..
            } => (*r - r_center).norm_sq() >= radius * radius,
            _ => false,
        }
    }
}

impl<const D: usize> PhaseFunction<D> for TestFunction<D> {
    fn eval(&self, r: &Vector<D>, v: &Vector<D>) -> f64 {
        TestFunction::eval(self, r, v)
    }

    fn gradient(&self, r: &Vector<D>, v: &Vector<D>) -> (Vector<D>, Vector<D>) {
        TestFunction::gradient(self, r, v)
    }

    fn gradient_bounds(&self) -> (f64, f64) {
        TestFunction::gradient_bounds(self)
    }

    fn vanishes_at(&self, r: &Vector<D>) -> bool {
        TestFunction::vanishes_at(self, r)
    }

    fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

impl<const D: usize> fmt::Display for TestFunction<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bump { radius, .. } => write!(f, "bump(R={radius})"),
            Self::Clamp { monomial, scale } => {
                let m: String = match monomial {
                    Monomial::Velocity(i) => format!("v{}", i + 1),
                    Monomial::Position(i) => format!("r{}", i + 1),
                    Monomial::Energy => "|v|^2".into(),
                };
                write!(f, "clamp({m},L={scale})")
            }
            Self::Constant(c) => write!(f, "const({c})"),
        }
    }
}

/// Tensor quadrature for `Q(dθ) dξ`.
#[derive(Debug, Clone)]
pub struct CollisionQuadrature<const D: usize> {
    /// `(sin²(θ/2), ½ sin θ, weight)` per θ node.
    theta: Vec<(f64, f64, f64)>,
    sphere: SphereQuadrature<D>,
    kappa: f64,
}

impl<const D: usize> CollisionQuadrature<D> {
    pub fn new(angular: &AngularMeasure, theta_nodes: usize, xi_nodes: usize) -> Result<Self> {
        if theta_nodes < MIN_QUAD_NODES || xi_nodes < MIN_QUAD_NODES {
            return Err(Error::domain(
                "quadrature needs at least 8 nodes per dimension",
            ));
        }
        let rule = angular.quadrature(theta_nodes)?;
        let theta = rule
            .iter()
            .map(|&(th, w)| {
                let h = (0.5 * th).sin();
                (h * h, 0.5 * th.sin(), w)
            })
            .collect();
        let quad_kappa: f64 = rule.iter().map(|(th, w)| th * w).sum();
        Ok(Self {
            theta,
            sphere: SphereQuadrature::new(xi_nodes)?,
            kappa: quad_kappa.max(angular.kappa()),
        })
    }

    /// `Σ w(θ) θ` over the nodes or the exact `κ`, whichever is larger.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// `(ℒψ)(r, v; u) = ∫ (ψ(r, v + α) - ψ(r, v)) Q(dθ) dξ` by tensor quadrature.
pub fn l_psi<const D: usize, P: PhaseFunction<D> + ?Sized>(
    psi: &P,
    r: &Vector<D>,
    v: &Vector<D>,
    u: &Vector<D>,
    quad: &CollisionQuadrature<D>,
) -> f64 {
    if psi.is_constant() {
        return 0.0;
    }
    let rel = *u - *v;
    if rel.norm_sq() == 0.0 {
        return 0.0;
    }
    let frame = GammaFrame::new(&rel);
    let base = psi.eval(r, v);
    let mut total = 0.0;
    for (xi, wx) in quad.sphere.nodes() {
        let g = frame.gamma(xi);
        let mut inner = 0.0;
        for &(s2, sh, wt) in &quad.theta {
            let post = *v + rel * s2 + g * sh;
            inner += wt * (psi.eval(r, &post) - base);
        }
        total += wx * inner;
    }
    total
}

/// `(𝒜ψ)(r, v; q, u) = v·∇_r ψ(r, v) + σ(|v - u|) β(r - q) (ℒψ)(r, v; u)`,
/// with the truncated `σ`.
pub fn a_op<const D: usize, P: PhaseFunction<D> + ?Sized>(
    psi: &P,
    x: &PhasePoint<D>,
    y: &PhasePoint<D>,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> f64 {
    if psi.vanishes_at(&x.position) {
        return 0.0;
    }
    let transport = x.velocity.dot(&psi.gradient(&x.position, &x.velocity).0);
    transport + collision_part(psi, x, y, kernels, quad)
}

fn collision_part<const D: usize, P: PhaseFunction<D> + ?Sized>(
    psi: &P,
    x: &PhasePoint<D>,
    y: &PhasePoint<D>,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> f64 {
    let rate = kernels.rate(&x.velocity, &y.velocity, &x.position, &y.position);
    if rate == 0.0 {
        return 0.0;
    }
    rate * l_psi(psi, &x.position, &x.velocity, &y.velocity, quad)
}

/// `(A(μ)ψ)(r, v) = (1/n) Σ_j (𝒜ψ)(r, v; r_j, v_j)`.
pub fn a_mu<const D: usize, P: PhaseFunction<D> + ?Sized>(
    psi: &P,
    x: &PhasePoint<D>,
    s: &EmpiricalSnapshot<D>,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> f64 {
    if psi.vanishes_at(&x.position) || s.is_empty() {
        return 0.0;
    }
    let transport = x.velocity.dot(&psi.gradient(&x.position, &x.velocity).0);
    let collisions: f64 = s
        .points
        .iter()
        .map(|y| collision_part(psi, x, y, kernels, quad))
        .sum();
    transport + collisions / s.len() as f64
}

/// `⟨𝒜ψ, μ ⊗ μ⟩ = (1/n²) Σ_k Σ_j (𝒜ψ)(x_k; x_j)`.
pub fn pair_average<const D: usize, P: PhaseFunction<D> + ?Sized>(
    psi: &P,
    s: &EmpiricalSnapshot<D>,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> f64 {
    s.points
        .iter()
        .map(|x| a_mu(psi, x, s, kernels, quad))
        .sum::<f64>()
        / s.len() as f64
}

fn check_trajectory<const D: usize>(traj: &[EmpiricalSnapshot<D>]) -> Result<()> {
    let first = traj
        .first()
        .ok_or_else(|| Error::domain("empty trajectory"))?;
    if first.len() > MAX_PAIRWISE_N {
        return Err(Error::domain(
            "pairwise diagnostics are limited to n <= 1000",
        ));
    }
    for s in traj {
        s.validate()?;
        if s.len() != first.len() {
            return Err(Error::domain("snapshots differ in particle count"));
        }
    }
    if traj.windows(2).any(|w| !(w[0].time < w[1].time)) {
        return Err(Error::domain("snapshot times must be strictly increasing"));
    }
    Ok(())
}

/// Balance defect of the weak kinetic equation at every snapshot:
/// `e(t) = ⟨ψ, μ_t⟩ - ⟨ψ, μ_0⟩ - ∫_0^t ⟨𝒜ψ, μ_s ⊗ μ_s⟩ ds`,
/// with the time integral by the trapezoid rule over the snapshots.
pub fn enskog_balance<const D: usize, P: PhaseFunction<D> + ?Sized>(
    traj: &[EmpiricalSnapshot<D>],
    psi: &P,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> Result<Vec<f64>> {
    check_trajectory(traj)?;
    Ok(balance_on(traj, psi, kernels, quad))
}

fn balance_on<const D: usize, P: PhaseFunction<D> + ?Sized>(
    traj: &[EmpiricalSnapshot<D>],
    psi: &P,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> Vec<f64> {
    let means: Vec<f64> = traj.iter().map(|s| s.mean(psi)).collect();
    let rates: Vec<f64> = traj
        .iter()
        .map(|s| pair_average(psi, s, kernels, quad))
        .collect();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        if i > 0 {
            integral += 0.5 * (traj[i].time - traj[i - 1].time) * (rates[i] + rates[i - 1]);
        }
        out.push(means[i] - means[0] - integral);
    }
    out
}

/// `F(μ) = (1/n) Σ_k [ψ(x_k(t)) - ψ(x_k(s)) - ∫_s^t (A(μ_u)ψ)(x_k(u)) du]`.
///
/// `s` and `t` must be snapshot times with `s < t`.
pub fn weak_residual<const D: usize, P: PhaseFunction<D> + ?Sized>(
    traj: &[EmpiricalSnapshot<D>],
    psi: &P,
    s: f64,
    t: f64,
    kernels: &ResolvedKernels,
    quad: &CollisionQuadrature<D>,
) -> Result<f64> {
    check_trajectory(traj)?;
    let find = |time: f64| {
        traj.iter()
            .position(|snap| (snap.time - time).abs() <= 1e-12 * (1.0 + time.abs()))
            .ok_or_else(|| Error::domain("residual times must be snapshot times"))
    };
    let (i, j) = (find(s)?, find(t)?);
    if i >= j {
        return Err(Error::domain("residual needs s < t"));
    }
    Ok(*balance_on(&traj[i..=j], psi, kernels, quad)
        .last()
        .unwrap_or(&0.0))
}
