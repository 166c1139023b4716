//! Collision kernels: velocity kernel `σ`, angular measure `Q(dθ)` with a
//! cutoff, spatial kernel `β`, and the truncation used to bound the jump rate.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result, Vector};

/// Deflection angle `θ ∈ (0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CollisionAngle(f64);

impl CollisionAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta <= PI {
            Ok(Self(theta))
        } else {
            Err(Error::domain("collision angle must lie in (0, π]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Shape of the velocity kernel.
#[derive(Debug, Clone, Copy)]
pub enum SigmaForm {
    /// `σ(ρ) = ρ^γ`.
    PowerLaw,
    /// `σ ≡ 1`.
    Maxwellian,
    /// Bounded, globally Lipschitz kernel with `σ ≤ c_σ`.
    Custom(fn(f64) -> f64),
}

impl PartialEq for SigmaForm {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::PowerLaw, Self::PowerLaw) | (Self::Maxwellian, Self::Maxwellian) => true,
            (Self::Custom(a), Self::Custom(b)) => core::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

/// Velocity kernel `σ(|v - u|)` with exponent `γ ∈ (-1, 2]` and constant
/// `c_σ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityKernel {
    pub form: SigmaForm,
    pub gamma: f64,
    pub c_sigma: f64,
}

impl VelocityKernel {
    pub fn power_law(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            form: SigmaForm::PowerLaw,
            gamma,
            c_sigma: 1.0,
        })
    }

    pub fn maxwellian() -> Self {
        Self {
            form: SigmaForm::Maxwellian,
            gamma: 0.0,
            c_sigma: 1.0,
        }
    }

    /// A bounded Lipschitz kernel; `c_sigma` must bound `f` from above.
    pub fn custom(f: fn(f64) -> f64, c_sigma: f64) -> Result<Self> {
        if !(c_sigma >= 1.0) {
            return Err(Error::domain("c_sigma must be at least 1"));
        }
        Ok(Self {
            form: SigmaForm::Custom(f),
            gamma: 0.0,
            c_sigma,
        })
    }

    pub fn with_c_sigma(mut self, c_sigma: f64) -> Result<Self> {
        if !(c_sigma >= 1.0) {
            return Err(Error::domain("c_sigma must be at least 1"));
        }
        self.c_sigma = c_sigma;
        Ok(self)
    }

    /// `σ(ρ)`. A power law with `γ < 0` returns `+∞` at `ρ = 0`; callers clip
    /// it through the truncation.
    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        match self.form {
            SigmaForm::PowerLaw => {
                if self.gamma == 0.0 {
                    1.0
                } else {
                    rho.powf(self.gamma)
                }
            }
            SigmaForm::Maxwellian => 1.0,
            SigmaForm::Custom(f) => f(rho),
        }
    }

    /// Whether `σ` is bounded by `c_σ` independently of the truncation.
    pub fn is_bounded(&self) -> bool {
        match self.form {
            SigmaForm::PowerLaw => self.gamma == 0.0,
            SigmaForm::Maxwellian | SigmaForm::Custom(_) => true,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > -1.0 && gamma <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain("gamma must lie in (-1, 2]"))
    }
}

/// `σ(ρ)` for the given kernel.
pub fn sigma_eval(kernel: &VelocityKernel, rho: f64) -> f64 {
    kernel.eval(rho)
}

/// Angular measure `Q(dθ)` restricted to `(θ_min, π]`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularMeasure {
    /// Density `θ^{-1-ν}` on `(θ_min, π]`, `ν ∈ (0, 2)`.
    PowerLaw { nu: f64, theta_min: f64 },
    /// Finite list of `(θ, weight)` atoms.
    Atoms(Vec<(f64, f64)>),
}

impl AngularMeasure {
    pub fn power_law(nu: f64, theta_min: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 2.0) {
            return Err(Error::domain("nu must lie in (0, 2)"));
        }
        if !(theta_min > 0.0 && theta_min < PI) {
            return Err(Error::domain("theta_min must lie in (0, π)"));
        }
        Ok(Self::PowerLaw { nu, theta_min })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("atomic measure needs at least one atom"));
        }
        for &(theta, w) in &atoms {
            if !(theta > 0.0 && theta <= PI) || !(w > 0.0 && w.is_finite()) {
                return Err(Error::domain("atoms need θ ∈ (0, π] and positive weight"));
            }
        }
        Ok(Self::Atoms(atoms))
    }

    /// Total mass `Q((θ_min, π])`.
    pub fn mass(&self) -> f64 {
        match self {
            Self::PowerLaw { nu, theta_min } => (theta_min.powf(-nu) - PI.powf(-nu)) / nu,
            Self::Atoms(atoms) => atoms.iter().map(|(_, w)| w).sum(),
        }
    }

    /// `κ = ∫ θ Q(dθ)` over the cutoff range.
    pub fn kappa(&self) -> f64 {
        match self {
            Self::PowerLaw { nu, theta_min } => {
                // (π^ε - θ_min^ε)/ε with ε = 1 - ν, stable as ε → 0
                let eps = 1.0 - nu;
                let (a, b) = (PI.ln(), theta_min.ln());
                if eps == 0.0 {
                    a - b
                } else {
                    ((eps * a).exp_m1() - (eps * b).exp_m1()) / eps
                }
            }
            Self::Atoms(atoms) => atoms.iter().map(|(t, w)| t * w).sum(),
        }
    }

    /// Smallest angle in the support.
    pub fn theta_min(&self) -> f64 {
        match self {
            Self::PowerLaw { theta_min, .. } => *theta_min,
            Self::Atoms(atoms) => atoms.iter().map(|a| a.0).fold(PI, f64::min),
        }
    }

    /// Normalized distribution function `Q((θ_min, θ]) / Q((θ_min, π])`.
    pub fn cdf(&self, theta: f64) -> f64 {
        let total = self.mass();
        match self {
            Self::PowerLaw { nu, theta_min } => {
                let t = theta.clamp(*theta_min, PI);
                ((theta_min.powf(-nu) - t.powf(-nu)) / nu / total).clamp(0.0, 1.0)
            }
            Self::Atoms(atoms) => {
                atoms
                    .iter()
                    .filter(|(t, _)| *t <= theta)
                    .map(|(_, w)| w)
                    .sum::<f64>()
                    / total
            }
        }
    }

    /// Inverse distribution function at `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            Self::PowerLaw { nu, theta_min } => {
                let lo = theta_min.powf(-nu);
                let hi = PI.powf(-nu);
                (lo - p * (lo - hi)).powf(-1.0 / nu).clamp(*theta_min, PI)
            }
            Self::Atoms(atoms) => {
                let target = p * self.mass();
                let mut acc = 0.0;
                for &(theta, w) in atoms {
                    acc += w;
                    if target < acc {
                        return theta;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// Draws `θ` from `Q` normalized on `(θ_min, π]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CollisionAngle {
        let theta = match self {
            Self::Atoms(atoms) if atoms.len() == 1 => atoms[0].0,
            _ => self.quantile(rng.random::<f64>()),
        };
        CollisionAngle(theta)
    }

    /// Quadrature rule `Σ w_i f(θ_i) ≈ ∫ f(θ) Q(dθ)`.
    ///
    /// Power laws use Gauss–Legendre after the substitution `s = θ^{-ν}`,
    /// which turns `θ^{-1-ν} dθ` into `ds / ν`, with `nodes` points on each
    /// of the panels `[s_i, s_{i+1}]`, `s_{i+1}/s_i ≤ 4`. Atoms are integrated
    /// exactly.
    pub fn quadrature(&self, nodes: usize) -> Result<Vec<(f64, f64)>> {
        match self {
            Self::PowerLaw { nu, theta_min } => {
                if nodes < 1 {
                    return Err(Error::domain("angular quadrature needs nodes"));
                }
                // θ = s^{-1/ν} varies fast near the small-s end when the range
                // of s is wide, so split it into geometric panels.
                let (lo, hi) = (PI.powf(-nu), theta_min.powf(-nu));
                let panels = ((hi / lo).ln() / PANEL_RATIO.ln()).ceil().max(1.0) as usize;
                let step = (hi / lo).powf(1.0 / panels as f64);
                let mut rule = Vec::with_capacity(panels * nodes);
                for i in 0..panels {
                    let a = lo * step.powi(i as i32);
                    let b = if i + 1 == panels { hi } else { a * step };
                    rule.extend(
                        gauss_legendre_on(nodes, a, b)
                            .into_iter()
                            .map(|(s, w)| (s.powf(-1.0 / nu), w / nu)),
                    );
                }
                Ok(rule)
            }
            Self::Atoms(atoms) => Ok(atoms.clone()),
        }
    }
}

/// Largest ratio of panel endpoints in the angular quadrature.
const PANEL_RATIO: f64 = 4.0;

/// `Q((θ_min, π])`.
pub fn q_mass(a: &AngularMeasure) -> f64 {
    a.mass()
}

/// `∫ θ Q(dθ)` over the cutoff range.
pub fn q_kappa(a: &AngularMeasure) -> f64 {
    a.kappa()
}

/// Draws a deflection angle from the normalized angular measure.
pub fn q_sample<R: Rng + ?Sized>(a: &AngularMeasure, rng: &mut R) -> CollisionAngle {
    a.sample(rng)
}

/// Spatial kernel `β(x) = (1 - |x|²/ρ²)²` on `|x| ≤ ρ`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialKernel {
    rho: f64,
}

impl SpatialKernel {
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho.is_finite() {
            Ok(Self { rho })
        } else {
            Err(Error::domain("interaction radius must be positive"))
        }
    }

    pub fn radius(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn eval<const D: usize>(&self, x: &Vector<D>) -> f64 {
        self.eval_sq(x.norm_sq())
    }

    /// `β` as a function of `|x|²`.
    #[inline]
    pub fn eval_sq(&self, r_sq: f64) -> f64 {
        let s = r_sq / (self.rho * self.rho);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s) * (1.0 - s)
        }
    }
}

/// `β(x)` for the given kernel.
pub fn beta_eval<const D: usize>(k: &SpatialKernel, x: &Vector<D>) -> f64 {
    k.eval(x)
}

/// How the velocity kernel is made bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// Smooth cutoff `g_m` of the total kinetic energy over
    /// `U_m = {Σ|v_k|² < m²}`; hard potentials.
    EnergyBall,
    /// Pairwise clip `min(σ, m)`; soft potentials.
    PairwiseClip,
}

/// Truncation level `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Fixed(f64),
    /// Energy ball: the smallest integer level with `g_m = 1` on the initial
    /// state. Pairwise clip: [`Truncation::DEFAULT_CLIP_LEVEL`].
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub mode: TruncationMode,
    pub level: Level,
}

impl Truncation {
    pub const DEFAULT_CLIP_LEVEL: f64 = 10.0;

    pub fn energy_ball(level: Level) -> Self {
        Self {
            mode: TruncationMode::EnergyBall,
            level,
        }
    }

    pub fn pairwise_clip(level: Level) -> Self {
        Self {
            mode: TruncationMode::PairwiseClip,
            level,
        }
    }

    /// The mode matching the sign of `γ`.
    pub fn for_gamma(gamma: f64, level: Level) -> Self {
        if gamma > 0.0 {
            Self::energy_ball(level)
        } else {
            Self::pairwise_clip(level)
        }
    }

    /// Concrete level `m` for a state with total kinetic energy `energy`.
    pub fn resolve_level(&self, energy: f64) -> f64 {
        match (self.level, self.mode) {
            (Level::Fixed(m), _) => m,
            (Level::Auto, TruncationMode::EnergyBall) => energy.sqrt().floor() + 2.0,
            (Level::Auto, TruncationMode::PairwiseClip) => Self::DEFAULT_CLIP_LEVEL,
        }
    }
}

/// Smooth cutoff `g_m` as a function of the total kinetic energy, with
/// `1_{U_{m-1}} ≤ g_m ≤ 1_{U_m}`; `C¹` in the velocities.
pub fn energy_cutoff(m: f64, energy: f64) -> f64 {
    let s = m - energy.max(0.0).sqrt();
    if s >= 1.0 {
        1.0
    } else if s <= 0.0 {
        0.0
    } else {
        s * s * (3.0 - 2.0 * s)
    }
}

/// The kernel triple together with its truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSuite {
    pub velocity: VelocityKernel,
    pub angular: AngularMeasure,
    pub spatial: SpatialKernel,
    pub truncation: Truncation,
}

impl KernelSuite {
    /// Checks that the truncation mode matches the velocity kernel.
    pub fn validate(&self) -> Result<()> {
        if let SigmaForm::PowerLaw = self.velocity.form {
            check_gamma(self.velocity.gamma)?;
            let g = self.velocity.gamma;
            match self.truncation.mode {
                TruncationMode::EnergyBall if !(g > 0.0) => {
                    return Err(Error::domain(
                        "energy-ball truncation requires gamma in (0, 2]",
                    ))
                }
                TruncationMode::PairwiseClip if g > 0.0 => {
                    return Err(Error::domain(
                        "pairwise-clip truncation requires gamma in (-1, 0]",
                    ))
                }
                _ => {}
            }
        }
        if let Level::Fixed(m) = self.truncation.level {
            if !(m >= 1.0 && m.is_finite()) {
                return Err(Error::domain("truncation level must be at least 1"));
            }
        }
        Ok(())
    }

    /// Fixes the truncation for a state of total kinetic energy `energy`.
    pub fn resolve(&self, energy: f64) -> Result<ResolvedKernels> {
        self.validate()?;
        let level = self.truncation.resolve_level(energy);
        let cutoff = match self.truncation.mode {
            TruncationMode::EnergyBall => energy_cutoff(level, energy),
            TruncationMode::PairwiseClip => 1.0,
        };
        let majorant = majorant_for(&self.velocity, self.truncation.mode, level)?;
        Ok(ResolvedKernels {
            velocity: self.velocity,
            spatial: self.spatial,
            mode: self.truncation.mode,
            level,
            cutoff,
            majorant,
        })
    }
}

fn majorant_for(k: &VelocityKernel, mode: TruncationMode, m: f64) -> Result<f64> {
    match k.form {
        SigmaForm::Maxwellian | SigmaForm::Custom(_) => Ok(k.c_sigma),
        SigmaForm::PowerLaw => match mode {
            TruncationMode::EnergyBall if k.gamma > 0.0 => {
                Ok(k.c_sigma * (1.0 + 4.0 * m * m).powf(0.5 * k.gamma))
            }
            TruncationMode::PairwiseClip if k.gamma <= 0.0 => {
                Ok(if k.gamma == 0.0 { k.c_sigma.min(m) } else { m })
            }
            _ => Err(Error::domain("truncation mode does not match gamma")),
        },
    }
}

/// Thinning majorant `c_m` bounding `g_m σ β` on every reachable state.
pub fn majorant(k: &VelocityKernel, t: &Truncation, _s: &SpatialKernel) -> Result<f64> {
    let m = match t.level {
        Level::Fixed(m) => m,
        Level::Auto => {
            return Err(Error::domain("majorant needs a fixed truncation level"));
        }
    };
    majorant_for(k, t.mode, m)
}

/// Kernels with the truncation level fixed; evaluates the thinning threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedKernels {
    pub velocity: VelocityKernel,
    pub spatial: SpatialKernel,
    pub mode: TruncationMode,
    /// Truncation level `m`.
    pub level: f64,
    /// `g_m` at the initial energy (always 1 for pairwise clipping).
    pub cutoff: f64,
    /// Majorant `c_m`.
    pub majorant: f64,
}

impl ResolvedKernels {
    /// Truncated velocity kernel at relative speed `rho`.
    #[inline]
    pub fn sigma(&self, rho: f64) -> f64 {
        let s = self.velocity.eval(rho);
        match self.mode {
            TruncationMode::EnergyBall => self.cutoff * s,
            TruncationMode::PairwiseClip => s.min(self.level),
        }
    }

    /// Thinning threshold `g_m σ(|v - u|) β(r - q)`.
    #[inline]
    pub fn rate<const D: usize>(
        &self,
        v: &Vector<D>,
        u: &Vector<D>,
        r: &Vector<D>,
        q: &Vector<D>,
    ) -> f64 {
        let beta = self.spatial.eval(&(*r - *q));
        if beta == 0.0 {
            return 0.0;
        }
        self.sigma((*v - *u).norm()) * beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimRng;
    use rand::SeedableRng;

    #[test]
    fn sigma_values() {
        assert_eq!(VelocityKernel::maxwellian().eval(7.3), 1.0);
        assert_eq!(VelocityKernel::power_law(1.0).unwrap().eval(2.0), 2.0);
        assert!((VelocityKernel::power_law(-0.5).unwrap().eval(4.0) - 0.5).abs() < 1e-15);
        assert_eq!(
            VelocityKernel::power_law(-0.5).unwrap().eval(0.0),
            f64::INFINITY
        );
        assert!(VelocityKernel::power_law(3.0).is_err());
        assert!(VelocityKernel::power_law(-1.0).is_err());
    }

    #[test]
    fn sigma_lipschitz_condition() {
        let mut rng = SimRng::seed_from_u64(1);
        for &g in &[-0.9, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let k = VelocityKernel::power_law(g).unwrap();
            for _ in 0..10_000 {
                let (a, b) = (
                    5.0 * rng.random::<f64>() + 1e-3,
                    5.0 * rng.random::<f64>() + 1e-3,
                );
                let lhs = (k.eval(a) - k.eval(b)).abs();
                let rhs = k.c_sigma * (a.powf(g) - b.powf(g)).abs();
                assert!(lhs <= rhs + 1e-12);
                let bound = if g <= 0.0 {
                    a.powf(g)
                } else {
                    (1.0 + a * a).powf(0.5 * g)
                };
                assert!(k.eval(a) <= k.c_sigma * bound + 1e-12);
            }
        }
    }

    #[test]
    fn beta_values() {
        let k = SpatialKernel::new(2.0).unwrap();
        assert_eq!(k.eval(&Vector::<3>::zero()), 1.0);
        assert_eq!(k.eval(&Vector::new([2.0, 0.0, 0.0])), 0.0);
        assert_eq!(k.eval(&Vector::new([0.0, 3.0, 0.0])), 0.0);
        let x = Vector::new([2.0_f64.sqrt(), 0.0, 0.0]);
        assert!((k.eval(&x) - 0.25).abs() < 1e-15);
        assert_eq!(k.eval(&x), k.eval(&-x));
    }

    #[test]
    fn beta_is_c1_across_support_boundary() {
        let k = SpatialKernel::new(1.0).unwrap();
        let h = 1e-7;
        let slope =
            |r: f64| (k.eval_sq((r + h) * (r + h)) - k.eval_sq((r - h) * (r - h))) / (2.0 * h);
        // β'(r) = -4r(1 - r²) → 0 at the boundary, β' = 0 outside
        for delta in [1e-2, 1e-3, 1e-4] {
            assert!(slope(1.0 - delta).abs() <= 8.1 * delta);
            assert_eq!(slope(1.0 + delta), 0.0);
        }
    }

    #[test]
    fn angular_mass_and_kappa() {
        let q = AngularMeasure::power_law(1.0, PI / 2.0).unwrap();
        assert!((q.mass() - 1.0 / PI).abs() < 1e-15);
        assert!((q.kappa() - 2f64.ln()).abs() < 1e-15);
        let atom = AngularMeasure::atoms(alloc::vec![(PI, 1.0)]).unwrap();
        assert_eq!(atom.mass(), 1.0);
        assert_eq!(atom.kappa(), PI);
        let narrow = AngularMeasure::power_law(0.5, PI - 1e-9).unwrap();
        assert!(narrow.mass() < 1e-9);
        assert!(AngularMeasure::power_law(2.0, 0.1).is_err());
        assert!(AngularMeasure::power_law(0.5, 0.0).is_err());
    }

    /// Composite Simpson rule on a log-spaced grid; independent of the closed forms.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let (la, lb) = (a.ln(), b.ln());
        let h = (lb - la) / n as f64;
        let g = |s: f64| {
            let t = s.exp();
            f(t) * t
        };
        let mut acc = g(la) + g(lb);
        for i in 1..n {
            let s = la + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(s);
        }
        acc * h / 3.0
    }

    #[test]
    fn closed_forms_match_numerical_quadrature() {
        for &(nu, tmin) in &[
            (0.5, 0.1),
            (1.0, PI / 2.0),
            (1.0, 0.01),
            (1.5, 0.05),
            (0.999_999_999_9, 0.2),
        ] {
            let q = AngularMeasure::power_law(nu, tmin).unwrap();
            let mass = simpson(|t| t.powf(-1.0 - nu), tmin, PI, 20_000);
            let kappa = simpson(|t| t.powf(-nu), tmin, PI, 20_000);
            assert!((q.mass() - mass).abs() < 1e-9 * mass);
            assert!((q.kappa() - kappa).abs() < 1e-8 * kappa);
        }
    }

    #[test]
    fn angular_quadrature_integrates_mass_and_kappa() {
        let q = AngularMeasure::power_law(1.5, 0.05).unwrap();
        let rule = q.quadrature(24).unwrap();
        let mass: f64 = rule.iter().map(|(_, w)| w).sum();
        let kappa: f64 = rule.iter().map(|(t, w)| t * w).sum();
        assert!((mass - q.mass()).abs() < 1e-12 * q.mass());
        assert!(
            (kappa - q.kappa()).abs() < 1e-8 * q.kappa(),
            "{kappa} {}",
            q.kappa()
        );
    }

    #[test]
    fn quantile_endpoints_and_atoms() {
        let q = AngularMeasure::power_law(0.5, 0.1).unwrap();
        assert!((q.quantile(0.0) - 0.1).abs() < 1e-14);
        assert!((q.quantile(1.0) - PI).abs() < 1e-14);
        let atom = AngularMeasure::atoms(alloc::vec![(PI, 1.0)]).unwrap();
        let mut rng = SimRng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(atom.sample(&mut rng).value(), PI);
        }
        let two = AngularMeasure::atoms(alloc::vec![(0.5, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(two.quantile(0.2), 0.5);
        assert_eq!(two.quantile(0.3), 2.0);
    }

    #[test]
    fn sample_matches_cdf_kolmogorov_smirnov() {
        let q = AngularMeasure::power_law(0.5, 0.1).unwrap();
        let mut rng = SimRng::seed_from_u64(4);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| q.sample(&mut rng).value()).collect();
        xs.sort_by(f64::total_cmp);
        // CDF oracle by quadrature of the density, independent of the closed form.
        let total = simpson(|t| t.powf(-1.5), 0.1, PI, 20_000);
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate().step_by(997) {
            let f = simpson(|t| t.powf(-1.5), 0.1, x.max(0.1 + 1e-12), 2_000) / total;
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(ks < 0.002, "ks = {ks}");
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        let expected = q.kappa() / q.mass();
        assert!((mean - expected).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn majorant_values() {
        let s = SpatialKernel::new(1.0).unwrap();
        let maxw = VelocityKernel::maxwellian();
        for m in [1.0, 5.0, 100.0] {
            assert_eq!(
                majorant(&maxw, &Truncation::pairwise_clip(Level::Fixed(m)), &s).unwrap(),
                1.0
            );
        }
        let hard = VelocityKernel::power_law(2.0).unwrap();
        assert_eq!(
            majorant(&hard, &Truncation::energy_ball(Level::Fixed(1.0)), &s).unwrap(),
            5.0
        );
        let soft = VelocityKernel::power_law(-0.5).unwrap();
        assert_eq!(
            majorant(&soft, &Truncation::pairwise_clip(Level::Fixed(10.0)), &s).unwrap(),
            10.0
        );
        assert!(majorant(&soft, &Truncation::energy_ball(Level::Fixed(10.0)), &s).is_err());
        assert!(majorant(&hard, &Truncation::pairwise_clip(Level::Fixed(10.0)), &s).is_err());
    }

    #[test]
    fn energy_cutoff_brackets_indicators() {
        let m = 5.0;
        for i in 0..1000 {
            let e = 0.04 * i as f64;
            let g = energy_cutoff(m, e);
            let in_prev = e.sqrt() < m - 1.0;
            let in_cur = e.sqrt() < m;
            assert!((in_prev as u8 as f64) <= g && g <= in_cur as u8 as f64);
        }
    }

    #[test]
    fn auto_level_keeps_cutoff_at_one() {
        for e in [0.0, 0.5, 3.0, 2999.7, 1e4] {
            let t = Truncation::energy_ball(Level::Auto);
            assert_eq!(energy_cutoff(t.resolve_level(e), e), 1.0);
        }
    }

    #[test]
    fn thinning_ratio_stays_below_majorant() {
        let suite = KernelSuite {
            velocity: VelocityKernel::power_law(1.5).unwrap(),
            angular: AngularMeasure::power_law(0.5, 0.1).unwrap(),
            spatial: SpatialKernel::new(1.0).unwrap(),
            truncation: Truncation::energy_ball(Level::Fixed(4.0)),
        };
        let mut rng = SimRng::seed_from_u64(5);
        for _ in 0..10_000 {
            // two velocities inside the energy ball of radius m
            let mut v = Vector::<3>::new([rng.random(), rng.random(), rng.random()]);
            let mut u =
                Vector::<3>::new([-rng.random::<f64>(), rng.random(), -rng.random::<f64>()]);
            let e = v.norm_sq() + u.norm_sq();
            let scale = 3.99 * rng.random::<f64>() / e.sqrt();
            v = v * scale;
            u = u * scale;
            let res = suite.resolve(v.norm_sq() + u.norm_sq()).unwrap();
            let ratio = res.rate(&v, &u, &Vector::zero(), &Vector::zero()) / res.majorant;
            assert!((0.0..=1.0).contains(&ratio));
        }
    }
}
