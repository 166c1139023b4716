//! A tagged particle driven by a frozen empirical flow, and two-sample
//! distances for propagation-of-chaos diagnostics.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::geometry::{alpha, sample_sphere, sphere_area};
use crate::kernels::{AngularMeasure, ResolvedKernels};
use crate::observables::{EmpiricalSnapshot, PhasePoint};
use crate::particles::{stream, CollisionEvent};
use crate::{Error, Result, Vector};

const TAGGED_STREAM: u64 = 2;

/// Snapshots of a completed run, read as a piecewise-constant-in-time flow.
#[derive(Debug, Clone)]
pub struct MarginalFlow<const D: usize> {
    snapshots: Vec<EmpiricalSnapshot<D>>,
}

impl<const D: usize> MarginalFlow<D> {
    pub fn new(snapshots: Vec<EmpiricalSnapshot<D>>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::domain("flow needs at least one snapshot"))?;
        let n = first.len();
        for s in &snapshots {
            s.validate()?;
            if s.len() != n {
                return Err(Error::domain("flow snapshots differ in particle count"));
            }
        }
        if snapshots.windows(2).any(|w| !(w[0].time < w[1].time)) {
            return Err(Error::domain("flow times must be strictly increasing"));
        }
        Ok(Self { snapshots })
    }

    pub fn snapshots(&self) -> &[EmpiricalSnapshot<D>] {
        &self.snapshots
    }

    /// Ensemble size.
    pub fn len(&self) -> usize {
        self.snapshots[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The snapshot at the latest time not after `t` (the first one if `t`
    /// precedes every snapshot).
    pub fn at(&self, t: f64) -> &EmpiricalSnapshot<D> {
        let i = self.snapshots.partition_point(|s| s.time <= t);
        &self.snapshots[i.saturating_sub(1)]
    }
}

/// Piecewise-linear position and piecewise-constant velocity of one tagged
/// particle.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPath<const D: usize> {
    /// Knot times: the start, every velocity jump, and the end.
    pub times: Vec<f64>,
    /// Position at each knot.
    pub positions: Vec<Vector<D>>,
    /// Velocity on `[times[i], times[i + 1])`; the last entry is the final
    /// velocity.
    pub velocities: Vec<Vector<D>>,
    /// Every candidate, with `k = 0` for the tagged particle and `j` the
    /// sampled ensemble member.
    pub events: Vec<CollisionEvent<D>>,
    /// Candidates whose threshold exceeded the majorant.
    pub majorant_breaches: u64,
}

impl<const D: usize> TaggedPath<D> {
    pub fn end(&self) -> PhasePoint<D> {
        let last = self.times.len() - 1;
        PhasePoint {
            position: self.positions[last],
            velocity: self.velocities[last],
        }
    }

    /// State at time `t` within the path's time range.
    pub fn state_at(&self, t: f64) -> PhasePoint<D> {
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        PhasePoint {
            position: self.positions[i].offset(&self.velocities[i], t - self.times[i]),
            velocity: self.velocities[i],
        }
    }

    pub fn jump_count(&self) -> usize {
        self.times.len().saturating_sub(2)
    }
}

/// Thinning simulation of the tagged particle on `[0, t_end]` from `x0`.
///
/// Candidates arrive at rate `Q-mass · |S^{d-2}| · c_m`; each samples an
/// ensemble member `η` uniformly and reads its state from the flow snapshot
/// at or before the candidate time.
pub fn simulate_tagged<const D: usize>(
    flow: &MarginalFlow<D>,
    x0: PhasePoint<D>,
    kernels: &ResolvedKernels,
    angular: &AngularMeasure,
    t_end: f64,
    seed: u64,
) -> Result<TaggedPath<D>> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::domain("t_end must be finite and nonnegative"));
    }
    if !x0.position.is_finite() || !x0.velocity.is_finite() {
        return Err(Error::domain("tagged start must be finite"));
    }
    let rate = angular.mass() * sphere_area(D) * kernels.majorant;
    let mut rng = stream(seed, TAGGED_STREAM);
    let n = flow.len();
    let mut path = TaggedPath {
        times: alloc::vec![0.0],
        positions: alloc::vec![x0.position],
        velocities: alloc::vec![x0.velocity],
        events: Vec::new(),
        majorant_breaches: 0,
    };
    let (mut t, mut v) = (0.0, x0.velocity);
    let (mut t_sync, mut r_sync) = (0.0, x0.position);
    loop {
        let dt = if rate > 0.0 {
            -(1.0 - rng.random::<f64>()).ln() / rate
        } else {
            f64::INFINITY
        };
        if t + dt > t_end {
            break;
        }
        t += dt;
        let eta = rng.random_range(0..n);
        let theta = angular.sample(&mut rng).value();
        let xi = sample_sphere::<D, _>(&mut rng);
        let z = kernels.majorant * rng.random::<f64>();
        let partner = flow.at(t).points[eta];
        let r = r_sync.offset(&v, t - t_sync);
        let threshold = kernels.rate(&v, &partner.velocity, &r, &partner.position);
        if threshold > kernels.majorant * (1.0 + 1e-12) {
            path.majorant_breaches += 1;
        }
        let accepted = z <= threshold && threshold > 0.0;
        if accepted && v != partner.velocity {
            v += alpha(&v, &partner.velocity, theta, &xi);
            t_sync = t;
            r_sync = r;
            path.times.push(t);
            path.positions.push(r);
            path.velocities.push(v);
        }
        path.events.push(CollisionEvent {
            time: t,
            k: 0,
            j: eta,
            theta,
            xi,
            z,
            accepted,
        });
    }
    path.times.push(t_end);
    path.positions.push(r_sync.offset(&v, t_end - t_sync));
    path.velocities.push(v);
    Ok(path)
}

fn v_statistic<P>(a: &[P], b: &[P], dist: impl Fn(&P, &P) -> f64) -> f64 {
    let mean = |x: &[P], y: &[P]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist(p, q)).sum::<f64>())
            .sum::<f64>()
            / (x.len() as f64 * y.len() as f64)
    };
    (2.0 * mean(a, b) - mean(a, a) - mean(b, b)).max(0.0)
}

/// Energy distance `2E|X - Y| - E|X - X'| - E|Y - Y'|` between two empirical
/// clouds, with the within-sample means over all ordered pairs (diagonal
/// included). Zero for identical clouds, nonnegative, symmetric.
pub fn energy_distance<const D: usize>(a: &[Vector<D>], b: &[Vector<D>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("energy distance needs nonempty clouds"));
    }
    Ok(v_statistic(a, b, |p, q| (*p - *q).norm()))
}

/// Energy distance between two snapshots as clouds in `R^{2d}`.
pub fn chaos_distance<const D: usize>(
    a: &EmpiricalSnapshot<D>,
    b: &EmpiricalSnapshot<D>,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("energy distance needs nonempty clouds"));
    }
    Ok(v_statistic(&a.points, &b.points, |p, q| {
        ((p.position - q.position).norm_sq() + (p.velocity - q.velocity).norm_sq()).sqrt()
    }))
}

/// Least-squares slope of `ln(variance)` against `ln(n)`.
pub fn variance_scaling_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::domain("scaling fit needs at least three points"));
    }
    if points
        .iter()
        .any(|&(n, var)| !(n > 0.0 && var > 0.0 && n.is_finite() && var.is_finite()))
    {
        return Err(Error::domain("scaling fit needs positive finite data"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let distinct = {
        let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[0] < w[1])
    };
    if !distinct || !(sxx > 0.0) {
        return Err(Error::domain("scaling fit needs distinct n values"));
    }
    Ok(sxy / sxx)
}
