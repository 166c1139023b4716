//! The `n`-particle binary-collision process.
//!
//! Particles move freely between collisions. Candidate collisions arrive as a
//! Poisson process whose rate is the full mass of the compensator
//!
//! ```text
//! ds · (1/2n) Σ_k Σ_j δ_k(dl) δ_j(dl') Q(dθ) dξ · dz,   z ∈ [0, c_m]
//! ```
//!
//! and a candidate `(k, j, θ, ξ, z)` is accepted when
//! `z ≤ g_m σ(|v_k - v_j|) β(r_k - r_j)`. An accepted candidate replaces
//! `(v_k, v_j)` by `(v_k + α, v_j - α)`.
//!
//! Positions are updated lazily: particle `k` stores its position at its last
//! velocity change, and its current position is `r_k + v_k (t - t_k)`.
//!
//! Random draws use two ChaCha streams of the run seed: stream 0 for the
//! initial state and stream 1 for the dynamics. Each candidate consumes, in
//! order, the waiting time, `k`, `j`, `θ`, `ξ` and `z`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::geometry::{alpha, sample_sphere, sphere_area};
use crate::kernels::{AngularMeasure, KernelSuite, ResolvedKernels};
use crate::observables::{EmpiricalSnapshot, PhasePoint};
use crate::{Error, Result, SimRng, SpherePoint, Vector};

const INIT_STREAM: u64 = 0;
const DYNAMICS_STREAM: u64 = 1;

/// Relative slack allowed before a threshold counts as a majorant breach.
const BREACH_TOL: f64 = 1e-12;

/// Law `μ₀` of each particle at time zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw<const D: usize> {
    PointMass {
        position: Vector<D>,
        velocity: Vector<D>,
    },
    /// `r ~ N(0, s² I)`, `v ~ N(0, T I)`.
    Gaussian {
        position_scale: f64,
        temperature: f64,
    },
    /// `r ~ N(0, s² I)`, `v` uniform in the ball of the given radius.
    UniformBall { position_scale: f64, radius: f64 },
}

impl<const D: usize> InitialLaw<D> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::PointMass { position, velocity } => position.is_finite() && velocity.is_finite(),
            Self::Gaussian {
                position_scale,
                temperature,
            } => position_scale >= 0.0 && temperature >= 0.0,
            Self::UniformBall {
                position_scale,
                radius,
            } => position_scale >= 0.0 && radius >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(
                "initial law parameters must be finite and nonnegative",
            ))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vector<D>, Vector<D>) {
        let normal = |rng: &mut R, scale: f64| {
            let mut v = Vector::<D>::zero();
            for i in 0..D {
                v[i] = scale * rng.sample::<f64, _>(StandardNormal);
            }
            v
        };
        match *self {
            Self::PointMass { position, velocity } => (position, velocity),
            Self::Gaussian {
                position_scale,
                temperature,
            } => {
                let r = normal(rng, position_scale);
                let v = normal(rng, temperature.sqrt());
                (r, v)
            }
            Self::UniformBall {
                position_scale,
                radius,
            } => {
                let r = normal(rng, position_scale);
                let dir = loop {
                    let d = normal(rng, 1.0);
                    let n = d.norm();
                    if n > 1e-300 {
                        break d * (1.0 / n);
                    }
                };
                let radial = radius * rng.random::<f64>().powf(1.0 / D as f64);
                (r, dir * radial)
            }
        }
    }
}

/// Positions and velocities of the `n` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<const D: usize> {
    time: f64,
    velocities: Vec<Vector<D>>,
    positions: Vec<Vector<D>>,
    sync_times: Vec<f64>,
}

impl<const D: usize> ParticleState<D> {
    /// State at time zero from explicit positions and velocities.
    pub fn from_phase(positions: Vec<Vector<D>>, velocities: Vec<Vector<D>>) -> Result<Self> {
        if positions.len() != velocities.len() {
            return Err(Error::domain("positions and velocities differ in length"));
        }
        if positions.len() < 2 {
            return Err(Error::domain("need at least two particles"));
        }
        let n = positions.len();
        Ok(Self {
            time: 0.0,
            velocities,
            positions,
            sync_times: alloc::vec![0.0; n],
        })
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn velocity(&self, k: usize) -> Vector<D> {
        self.velocities[k]
    }

    pub fn velocities(&self) -> &[Vector<D>] {
        &self.velocities
    }

    /// Position of particle `k` at time `t ≥ t_sync[k]`.
    #[inline]
    pub fn position_at(&self, k: usize, t: f64) -> Vector<D> {
        self.positions[k].offset(&self.velocities[k], t - self.sync_times[k])
    }

    /// Position of particle `k` at the current time.
    pub fn position(&self, k: usize) -> Vector<D> {
        self.position_at(k, self.time)
    }

    pub fn total_momentum(&self) -> Vector<D> {
        self.velocities
            .iter()
            .fold(Vector::zero(), |acc, v| acc + *v)
    }

    pub fn total_energy(&self) -> f64 {
        self.velocities.iter().map(Vector::norm_sq).sum()
    }

    /// Empirical measure at time `t ≥` the current time, without mutating
    /// the state.
    pub fn snapshot_at(&self, t: f64) -> EmpiricalSnapshot<D> {
        EmpiricalSnapshot::new(
            t,
            (0..self.len())
                .map(|k| PhasePoint {
                    position: self.position_at(k, t),
                    velocity: self.velocities[k],
                })
                .collect(),
        )
    }

    pub fn snapshot(&self) -> EmpiricalSnapshot<D> {
        self.snapshot_at(self.time)
    }

    /// Moves particle `k`'s stored position to time `t`.
    fn sync(&mut self, k: usize, t: f64) {
        self.positions[k] = self.position_at(k, t);
        self.sync_times[k] = t;
    }
}

/// `n` i.i.d. draws from `μ₀`.
pub fn init_iid<const D: usize>(
    law: &InitialLaw<D>,
    n: usize,
    seed: u64,
) -> Result<ParticleState<D>> {
    if n < 2 {
        return Err(Error::domain("need at least two particles"));
    }
    if D < 3 {
        return Err(Error::domain("dimension must be at least 3"));
    }
    law.validate()?;
    let mut rng = stream(seed, INIT_STREAM);
    let (positions, velocities) = (0..n).map(|_| law.sample(&mut rng)).unzip();
    ParticleState::from_phase(positions, velocities)
}

pub(crate) fn stream(seed: u64, id: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Parameters of one particle run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<const D: usize> {
    pub n: usize,
    pub t_end: f64,
    pub seed: u64,
    /// Snapshot times in `[0, t_end]`, sorted.
    pub checkpoints: Vec<f64>,
    pub kernels: KernelSuite,
    pub initial: InitialLaw<D>,
    /// Keep every candidate event in [`RunOutput::events`].
    pub record_events: bool,
}

impl<const D: usize> SimConfig<D> {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("n must be at least 2"));
        }
        if D < 3 {
            return Err(Error::config("d must be at least 3"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end must be positive"));
        }
        if self.checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("checkpoints must be strictly increasing"));
        }
        if self
            .checkpoints
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::config("checkpoints must lie in [0, t_end]"));
        }
        self.kernels.validate()?;
        self.initial.validate()
    }

    /// Snapshot times: the checkpoints plus `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times = self.checkpoints.clone();
        if times.last().is_none_or(|&t| t < self.t_end) {
            times.push(self.t_end);
        }
        times
    }
}

/// Mass `(n/2) Q((θ_min, π]) |S^{d-2}| c_m` of the truncated compensator.
pub fn compensator_mass(n: usize, d: usize, angular: &AngularMeasure, majorant: f64) -> f64 {
    0.5 * n as f64 * angular.mass() * sphere_area(d) * majorant
}

/// Rate `Λ` of candidate collisions for a run configuration.
pub fn total_rate<const D: usize>(cfg: &SimConfig<D>) -> Result<f64> {
    cfg.validate()?;
    let state = init_iid(&cfg.initial, cfg.n, cfg.seed)?;
    let resolved = cfg.kernels.resolve(state.total_energy())?;
    Ok(compensator_mass(
        cfg.n,
        D,
        &cfg.kernels.angular,
        resolved.majorant,
    ))
}

/// One atom of the driving Poisson random measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent<const D: usize> {
    pub time: f64,
    pub k: usize,
    pub j: usize,
    pub theta: f64,
    pub xi: SpherePoint<D>,
    /// Thinning level `z ∈ [0, c_m]`.
    pub z: f64,
    pub accepted: bool,
}

/// Drift of the conserved quantities plus event counters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservationReport {
    /// `|Σv(t) - Σv(0)| / (1 + |Σv(0)|)`.
    pub momentum_drift: f64,
    /// `|Σ|v(t)|² - Σ|v(0)|²| / (1 + Σ|v(0)|²)`.
    pub energy_drift: f64,
    pub proposed: u64,
    pub accepted: u64,
    /// Candidates whose thinning threshold exceeded the majorant.
    pub majorant_breaches: u64,
}

impl ConservationReport {
    pub fn acceptance_fraction(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Relative drift of momentum and energy between two states.
pub fn conservation_audit<const D: usize>(
    state: &ParticleState<D>,
    initial: &ParticleState<D>,
) -> ConservationReport {
    drift_report(state, &initial.total_momentum(), initial.total_energy())
}

fn drift_report<const D: usize>(
    state: &ParticleState<D>,
    momentum0: &Vector<D>,
    energy0: f64,
) -> ConservationReport {
    ConservationReport {
        momentum_drift: (state.total_momentum() - *momentum0).norm() / (1.0 + momentum0.norm()),
        energy_drift: (state.total_energy() - energy0).abs() / (1.0 + energy0),
        ..ConservationReport::default()
    }
}

/// Snapshots, optional event log and audit of one run.
#[derive(Debug, Clone)]
pub struct RunOutput<const D: usize> {
    pub snapshots: Vec<EmpiricalSnapshot<D>>,
    pub events: Vec<CollisionEvent<D>>,
    pub audit: ConservationReport,
}

/// Thinning simulation of the particle system.
#[derive(Debug, Clone)]
pub struct Simulation<const D: usize> {
    state: ParticleState<D>,
    kernels: ResolvedKernels,
    angular: AngularMeasure,
    rate: f64,
    rng: SimRng,
    momentum0: Vector<D>,
    energy0: f64,
    proposed: u64,
    accepted: u64,
    breaches: u64,
}

impl<const D: usize> Simulation<D> {
    /// Draws the initial state and prepares the dynamics.
    pub fn new(cfg: &SimConfig<D>) -> Result<Self> {
        cfg.validate()?;
        let state = init_iid(&cfg.initial, cfg.n, cfg.seed)?;
        Self::from_state(state, &cfg.kernels, cfg.seed)
    }

    /// Starts the dynamics from an explicit state.
    pub fn from_state(state: ParticleState<D>, suite: &KernelSuite, seed: u64) -> Result<Self> {
        let energy0 = state.total_energy();
        let kernels = suite.resolve(energy0)?;
        let rate = compensator_mass(state.len(), D, &suite.angular, kernels.majorant);
        Ok(Self {
            momentum0: state.total_momentum(),
            energy0,
            state,
            kernels,
            angular: suite.angular.clone(),
            rate,
            rng: stream(seed, DYNAMICS_STREAM),
            proposed: 0,
            accepted: 0,
            breaches: 0,
        })
    }

    pub fn state(&self) -> &ParticleState<D> {
        &self.state
    }

    pub fn kernels(&self) -> &ResolvedKernels {
        &self.kernels
    }

    /// Candidate rate `Λ`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    fn waiting_time(&mut self) -> f64 {
        if self.rate <= 0.0 {
            return f64::INFINITY;
        }
        let u = 1.0 - self.rng.random::<f64>();
        -u.ln() / self.rate
    }

    /// Draws the marks of a candidate at the current time and resolves it.
    fn draw_marks(&mut self) -> CollisionEvent<D> {
        let n = self.state.len();
        let k = self.rng.random_range(0..n);
        let j = self.rng.random_range(0..n);
        let theta = self.angular.sample(&mut self.rng).value();
        let xi = sample_sphere::<D, _>(&mut self.rng);
        let z = self.kernels.majorant * self.rng.random::<f64>();
        self.resolve_candidate(k, j, theta, xi, z)
    }

    /// Advances to the next candidate and resolves it.
    pub fn step(&mut self) -> CollisionEvent<D> {
        let dt = self.waiting_time();
        self.state.time += dt;
        self.draw_marks()
    }

    /// Applies the thinning rule to a candidate at the current time.
    pub fn resolve_candidate(
        &mut self,
        k: usize,
        j: usize,
        theta: f64,
        xi: SpherePoint<D>,
        z: f64,
    ) -> CollisionEvent<D> {
        let t = self.state.time;
        let (vk, vj) = (self.state.velocities[k], self.state.velocities[j]);
        let threshold = self.kernels.rate(
            &vk,
            &vj,
            &self.state.position_at(k, t),
            &self.state.position_at(j, t),
        );
        self.proposed += 1;
        if threshold > self.kernels.majorant * (1.0 + BREACH_TOL) {
            self.breaches += 1;
        }
        let accepted = z <= threshold && threshold > 0.0;
        if accepted {
            self.accepted += 1;
            if k != j && vk != vj {
                let a = alpha(&vk, &vj, theta, &xi);
                self.state.sync(k, t);
                self.state.sync(j, t);
                self.state.velocities[k] = vk + a;
                self.state.velocities[j] = vj - a;
            }
        }
        CollisionEvent {
            time: t,
            k,
            j,
            theta,
            xi,
            z,
            accepted,
        }
    }

    /// Runs until `t_end`, emitting a snapshot at each requested time and
    /// handing every candidate to `observer`.
    pub fn run_with(
        &mut self,
        t_end: f64,
        snapshot_times: &[f64],
        observer: &mut dyn FnMut(&CollisionEvent<D>),
    ) -> Vec<EmpiricalSnapshot<D>> {
        let mut snapshots = Vec::with_capacity(snapshot_times.len());
        let start = self.state.time;
        let mut pending = snapshot_times
            .iter()
            .copied()
            .filter(|&t| t >= start && t <= t_end)
            .peekable();
        loop {
            let next = self.state.time + self.waiting_time();
            while let Some(&tc) = pending.peek() {
                if tc <= next.min(t_end) {
                    snapshots.push(self.state.snapshot_at(tc));
                    pending.next();
                } else {
                    break;
                }
            }
            if next > t_end {
                self.state.time = t_end;
                break;
            }
            self.state.time = next;
            let event = self.draw_marks();
            observer(&event);
        }
        snapshots
    }

    /// Drift since the start of the dynamics plus event counters.
    pub fn audit(&self) -> ConservationReport {
        ConservationReport {
            proposed: self.proposed,
            accepted: self.accepted,
            majorant_breaches: self.breaches,
            ..drift_report(&self.state, &self.momentum0, self.energy0)
        }
    }
}

/// Runs the particle system described by `cfg`.
pub fn run<const D: usize>(cfg: &SimConfig<D>) -> Result<RunOutput<D>> {
    let mut sim = Simulation::new(cfg)?;
    let mut events = Vec::new();
    let record = cfg.record_events;
    let snapshots = sim.run_with(cfg.t_end, &cfg.snapshot_times(), &mut |e| {
        if record {
            events.push(*e);
        }
    });
    Ok(RunOutput {
        snapshots,
        events,
        audit: sim.audit(),
    })
}
