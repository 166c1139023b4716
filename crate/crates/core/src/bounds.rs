//! Numerical checks of the analytic bounds: the Povzner inequality,
//! moment-growth envelopes and the Bihari–LaSalle inequality.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::geometry::{alpha, SphereQuadrature};
use crate::observables::MomentSeries;
use crate::{Error, Result, Vector};

/// Minimum number of sphere nodes for the Povzner integral.
pub const MIN_POVZNER_NODES: usize = 32;

/// Multiplier applied to every empirically calibrated constant.
pub const SAFETY_FACTOR: f64 = 1.1;

fn bracket_pow(v: &Vector<3>, p: u32) -> f64 {
    (1.0 + v.norm_sq()).powi(p as i32)
}

/// `∫ (⟨v+α⟩^{2p} + ⟨u-α⟩^{2p} - ⟨v⟩^{2p} - ⟨u⟩^{2p}) dξ` by quadrature.
pub fn povzner_lhs(
    v: &Vector<3>,
    u: &Vector<3>,
    theta: f64,
    p: u32,
    quad: &SphereQuadrature<3>,
) -> Result<f64> {
    if quad.len() < MIN_POVZNER_NODES {
        return Err(Error::domain("Povzner quadrature needs at least 32 nodes"));
    }
    let base = bracket_pow(v, p) + bracket_pow(u, p);
    Ok(quad.integrate(|xi| {
        let a = alpha(v, u, theta, xi);
        bracket_pow(&(*v + a), p) + bracket_pow(&(*u - a), p) - base
    }))
}

/// `-½ sin²θ (⟨v⟩^{2p} + ⟨u⟩^{2p})
///  + C_p sin²θ Σ_{k=1}^{⌊(p+1)/2⌋} (⟨v⟩^{2k}⟨u⟩^{2p-2k} + ⟨v⟩^{2p-2k}⟨u⟩^{2k})`.
pub fn povzner_rhs(v: &Vector<3>, u: &Vector<3>, theta: f64, p: u32, c_p: f64) -> f64 {
    let s2 = theta.sin().powi(2);
    let (bv, bu) = (1.0 + v.norm_sq(), 1.0 + u.norm_sq());
    s2 * (c_p * povzner_cross_sum(bv, bu, p) - 0.5 * (bv.powi(p as i32) + bu.powi(p as i32)))
}

/// The cross sum with `bv = ⟨v⟩²`, `bu = ⟨u⟩²`.
fn povzner_cross_sum(bv: f64, bu: f64, p: u32) -> f64 {
    (1..=p.div_ceil(2))
        .map(|k| {
            let (k, q) = (k as i32, p as i32);
            bv.powi(k) * bu.powi(q - k) + bv.powi(q - k) * bu.powi(k)
        })
        .sum()
}

/// Outcome of calibrating and validating the Povzner constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PovznerReport {
    pub p: u32,
    /// Calibrated constant; infinite when calibration diverged.
    pub c_p: f64,
    pub calibration_points: usize,
    pub samples: usize,
    /// Samples with `LHS > RHS + slack`.
    pub violations: usize,
    /// `max (LHS - RHS) / (1 + |RHS|)` over the validation samples.
    pub worst_margin: f64,
    /// Worst sample as `(|v|, |u|, angle between them, θ)`.
    pub worst_case: (f64, f64, f64, f64),
}

impl PovznerReport {
    pub fn calibrated(&self) -> bool {
        self.c_p.is_finite()
    }

    pub fn passed(&self) -> bool {
        self.calibrated() && self.violations == 0
    }
}

/// Largest speed covered by calibration and validation.
pub const POVZNER_SPEED_MAX: f64 = 10.0;

fn planar_pair(sv: f64, su: f64, phi: f64) -> (Vector<3>, Vector<3>) {
    (
        Vector::new([sv, 0.0, 0.0]),
        Vector::new([su * phi.cos(), su * phi.sin(), 0.0]),
    )
}

/// Smallest `C_p` with `LHS ≤ RHS` on the calibration grid, or `∞`.
fn calibrate_povzner(p: u32, quad: &SphereQuadrature<3>) -> Result<(f64, usize)> {
    const SPEEDS: usize = 21;
    const ANGLES: usize = 13;
    const THETAS: usize = 24;
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for i in 0..SPEEDS {
        let sv = POVZNER_SPEED_MAX * i as f64 / (SPEEDS - 1) as f64;
        for j in 0..SPEEDS {
            let su = POVZNER_SPEED_MAX * j as f64 / (SPEEDS - 1) as f64;
            for a in 0..ANGLES {
                let phi = PI * a as f64 / (ANGLES - 1) as f64;
                let (v, u) = planar_pair(sv, su, phi);
                let (bv, bu) = (1.0 + v.norm_sq(), 1.0 + u.norm_sq());
                let cross = povzner_cross_sum(bv, bu, p);
                let decay = 0.5 * (bv.powi(p as i32) + bu.powi(p as i32));
                for t in 1..=THETAS {
                    // interior angles only: both sides vanish at θ = 0 and θ = π
                    let theta = PI * t as f64 / (THETAS + 1) as f64;
                    let lhs = povzner_lhs(&v, &u, theta, p, quad)?;
                    let s2 = theta.sin().powi(2);
                    let ratio = (lhs / s2 + decay) / cross;
                    if !ratio.is_finite() {
                        return Ok((f64::INFINITY, points));
                    }
                    worst = worst.max(ratio);
                    points += 1;
                }
            }
        }
    }
    Ok((SAFETY_FACTOR * worst, points))
}

/// Calibrates `C_p` on a grid of `(|v|, |u|, angle, θ)` and validates
/// `LHS ≤ RHS` on `sample_count` fresh random configurations.
pub fn povzner_certify<R: Rng + ?Sized>(
    p: u32,
    sample_count: usize,
    slack: f64,
    rng: &mut R,
) -> Result<PovznerReport> {
    if p < 2 {
        return Err(Error::domain("Povzner certification needs p >= 2"));
    }
    let quad = SphereQuadrature::<3>::new(MIN_POVZNER_NODES.max(4 * p as usize + 8))?;
    let (c_p, calibration_points) = calibrate_povzner(p, &quad)?;
    let mut report = PovznerReport {
        p,
        c_p,
        calibration_points,
        samples: 0,
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_case: (0.0, 0.0, 0.0, 0.0),
    };
    if !report.calibrated() {
        return Ok(report);
    }
    for _ in 0..sample_count {
        let sv = POVZNER_SPEED_MAX * rng.random::<f64>();
        let su = POVZNER_SPEED_MAX * rng.random::<f64>();
        let phi = PI * rng.random::<f64>();
        let theta = PI * rng.random::<f64>();
        let (v, u) = planar_pair(sv, su, phi);
        let lhs = povzner_lhs(&v, &u, theta, p, &quad)?;
        let rhs = povzner_rhs(&v, &u, theta, p, c_p);
        let margin = (lhs - rhs) / (1.0 + rhs.abs());
        if lhs > rhs + slack * (1.0 + rhs.abs()) {
            report.violations += 1;
        }
        if margin > report.worst_margin {
            report.worst_margin = margin;
            report.worst_case = (sv, su, phi, theta);
        }
        report.samples += 1;
    }
    Ok(report)
}

/// Growth regimes of the moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `c₀ M₀ e^{c₁ t}`, `γ ∈ (-1, 0]`.
    SoftExponential,
    /// `c₀ M₀ + c₁ t^{p/|γ|}`, `γ ∈ (-1, 0)`.
    SoftPolynomial,
    /// `c₀ M₀ + c₁ t^{2p/(2-γ)}`, `γ ∈ (0, 2)`.
    HardSubcritical,
    /// `c₀ M₀ + c₁ t^{(2p+2)/(2-γ)}` for the running supremum, `γ ∈ (0, 2)`.
    HardSup,
}

impl Regime {
    fn check(self, gamma: f64) -> Result<()> {
        let ok = match self {
            Self::SoftExponential => gamma > -1.0 && gamma <= 0.0,
            Self::SoftPolynomial => gamma > -1.0 && gamma < 0.0,
            Self::HardSubcritical | Self::HardSup => gamma > 0.0 && gamma < 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("envelope regime does not match gamma"))
        }
    }
}

/// A moment-growth envelope with calibrated constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEnvelope {
    pub gamma: f64,
    /// Moment order of `⟨v⟩^p`.
    pub p: f64,
    pub regime: Regime,
    /// Multiplier of the initial moment.
    pub c0: f64,
    /// Growth constant.
    pub c1: f64,
}

impl MomentEnvelope {
    pub fn new(gamma: f64, p: f64, regime: Regime, c0: f64, c1: f64) -> Result<Self> {
        regime.check(gamma)?;
        if !(p > 0.0 && c0 >= 0.0 && c1 >= 0.0) {
            return Err(Error::domain(
                "envelope needs p > 0 and nonnegative constants",
            ));
        }
        Ok(Self {
            gamma,
            p,
            regime,
            c0,
            c1,
        })
    }

    /// Time exponent of the polynomial regimes.
    pub fn exponent(&self) -> f64 {
        match self.regime {
            Regime::SoftExponential => 0.0,
            Regime::SoftPolynomial => self.p / self.gamma.abs(),
            Regime::HardSubcritical => 2.0 * self.p / (2.0 - self.gamma),
            Regime::HardSup => (2.0 * self.p + 2.0) / (2.0 - self.gamma),
        }
    }

    /// Growth profile `g(t)` with envelope `c₀ M₀ · g` (exponential) or
    /// `c₀ M₀ + c₁ g` (polynomial).
    fn profile(&self, t: f64) -> f64 {
        match self.regime {
            Regime::SoftExponential => t,
            _ => t.powf(self.exponent()),
        }
    }
}

/// Envelope value at time `t` for initial moment `initial_moment`.
pub fn envelope_eval(e: &MomentEnvelope, t: f64, initial_moment: f64) -> Result<f64> {
    e.regime.check(e.gamma)?;
    if !(t >= 0.0) {
        return Err(Error::domain("envelope time must be nonnegative"));
    }
    Ok(match e.regime {
        Regime::SoftExponential => e.c0 * initial_moment * (e.c1 * t).exp(),
        _ => e.c0 * initial_moment + e.c1 * e.profile(t),
    })
}

/// Calibrates `c₁` so the envelope with `c₀ =` [`SAFETY_FACTOR`] covers
/// every calibration series (each read from its own initial value), then
/// inflates `c₁` by the safety factor.
pub fn calibrate_envelope(
    gamma: f64,
    regime: Regime,
    runs: &[MomentSeries],
) -> Result<MomentEnvelope> {
    regime.check(gamma)?;
    let p = runs
        .first()
        .ok_or_else(|| Error::domain("calibration needs at least one series"))?
        .p;
    let mut env = MomentEnvelope::new(gamma, p, regime, SAFETY_FACTOR, 0.0)?;
    let mut c1: f64 = 0.0;
    for s in runs {
        let m0 = *s
            .values
            .first()
            .ok_or_else(|| Error::domain("empty moment series"))?;
        for (&t, &m) in s.times.iter().zip(&s.values) {
            if t <= 0.0 {
                continue;
            }
            let need = match regime {
                Regime::SoftExponential => (m / (env.c0 * m0)).ln() / t,
                _ => (m - env.c0 * m0) / env.profile(t),
            };
            if need.is_finite() {
                c1 = c1.max(need);
            }
        }
    }
    env.c1 = SAFETY_FACTOR * c1;
    Ok(env)
}

/// Closed and split forms of the Bihari–LaSalle bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihariBound {
    /// `(f(0)^α + αKt)^{1/α}`.
    pub closed: f64,
    /// `2^{1/α-1} f(0) + (2αK)^{1/α} t^{1/α} / 2`.
    pub split: f64,
}

/// Bound on `f` with `f(t) ≤ f(0) + K ∫_0^t f^{1-α}`.
pub fn bihari_lasalle(f0: f64, k: f64, alpha: f64, t: f64) -> Result<BihariBound> {
    if !(f0 >= 0.0 && k >= 0.0 && alpha > 0.0 && alpha < 1.0 && t >= 0.0) {
        return Err(Error::domain(
            "Bihari-LaSalle needs f0 >= 0, K >= 0, alpha in (0, 1), t >= 0",
        ));
    }
    let inv = 1.0 / alpha;
    Ok(BihariBound {
        closed: (f0.powf(alpha) + alpha * k * t).powf(inv),
        split: 2f64.powf(inv - 1.0) * f0 + 0.5 * (2.0 * alpha * k).powf(inv) * t.powf(inv),
    })
}

/// Initial moments of several runs collected for envelope validation.
pub fn initial_moments(runs: &[MomentSeries]) -> Vec<f64> {
    runs.iter()
        .filter_map(|s| s.values.first().copied())
        .collect()
}
