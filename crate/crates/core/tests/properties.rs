use std::f64::consts::PI;

use enskog_core::bounds::bihari_lasalle;
use enskog_core::geometry::{alpha, collide, gamma_map, householder_align, xi_shift};
use enskog_core::kernels::{
    AngularMeasure, KernelSuite, Level, SpatialKernel, Truncation, VelocityKernel,
};
use enskog_core::meanfield::{chaos_distance, energy_distance};
use enskog_core::observables::{moment, EmpiricalSnapshot, PhasePoint};
use enskog_core::particles::{init_iid, run, InitialLaw, ParticleState, SimConfig, Simulation};
use enskog_core::{SpherePoint, Vector};
use proptest::prelude::*;

type V3 = Vector<3>;

fn vec3(scale: f64) -> impl Strategy<Value = V3> {
    prop::array::uniform3(-scale..scale).prop_map(V3::new)
}

fn sphere_point() -> impl Strategy<Value = SpherePoint<3>> {
    (0.0..2.0 * PI).prop_map(SpherePoint::from_angle)
}

fn theta() -> impl Strategy<Value = f64> {
    (1e-6..PI).prop_map(|t: f64| t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn collision_conserves_momentum_and_energy(v in vec3(50.0), u in vec3(50.0), th in theta(), xi in sphere_point()) {
        let (vs, us) = collide(&v, &u, th, &xi);
        let scale = v.norm() + u.norm();
        prop_assert!(((vs + us) - (v + u)).norm() <= 1e-12 * scale.max(1e-300));
        let e0 = v.norm_sq() + u.norm_sq();
        prop_assert!((vs.norm_sq() + us.norm_sq() - e0).abs() <= 1e-10 * e0.max(1e-300));
        let a = alpha(&v, &u, th, &xi);
        let expected = (v - u).norm() * (0.5 * th).sin();
        prop_assert!((a.norm() - expected).abs() <= 1e-12 * expected.max(1e-300));
    }

    #[test]
    fn gamma_is_orthogonal_to_its_axis(x in vec3(10.0), xi in sphere_point()) {
        let g = gamma_map(&x, &xi);
        prop_assert!(g.dot(&x).abs() <= 1e-12 * x.norm_sq().max(1e-300));
        prop_assert!((g.norm() - x.norm()).abs() <= 1e-12 * x.norm().max(1e-300));
    }

    #[test]
    fn householder_is_an_isometry(x in vec3(5.0), y in vec3(5.0)) {
        prop_assume!(x.norm() > 1e-8);
        let h = householder_align(&x).unwrap();
        prop_assert!((h.apply(&y).norm() - y.norm()).abs() <= 1e-12 * (1.0 + y.norm()));
        prop_assert!((h.apply(&h.apply(&y)) - y).norm() <= 1e-12 * (1.0 + y.norm()));
    }

    #[test]
    fn shifted_gamma_is_lipschitz(x in vec3(5.0), y in vec3(5.0), xi in sphere_point()) {
        prop_assume!(x.norm() > 1e-6 && y.norm() > 1e-6);
        let xi0 = xi_shift(&x, &y, &xi).unwrap();
        let lhs = (gamma_map(&x, &xi) - gamma_map(&y, &xi0)).norm();
        prop_assert!(lhs <= 3.0 * (x - y).norm() + 1e-9);
        let c = xi0.coords();
        prop_assert!(((c[0] * c[0] + c[1] * c[1]).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_distance_is_symmetric_and_nonnegative(
        a in prop::collection::vec(vec3(3.0), 1..12),
        b in prop::collection::vec(vec3(3.0), 1..12),
    ) {
        let ab = energy_distance(&a, &b).unwrap();
        let ba = energy_distance(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
        let pts = |c: &[V3]| EmpiricalSnapshot::new(0.0, c.iter().map(|&v| PhasePoint { position: v * 0.5, velocity: v }).collect());
        let (sa, sb) = (pts(&a), pts(&b));
        prop_assert!(chaos_distance(&sa, &sb).unwrap() >= 0.0);
        prop_assert_eq!(chaos_distance(&sa, &sa).unwrap(), 0.0);
    }

    #[test]
    fn moments_are_at_least_one(vs in prop::collection::vec(vec3(10.0), 1..20), p in 0.0..8.0f64) {
        let s = EmpiricalSnapshot::new(0.0, vs.iter().map(|&v| PhasePoint { position: V3::zero(), velocity: v }).collect());
        prop_assert!(moment(&s, p) >= 1.0);
    }

    #[test]
    fn bihari_lasalle_dominates_the_ode(f0 in 0.0..5.0f64, k in 0.0..3.0f64, a in 0.05..0.95f64, t in 0.0..3.0f64) {
        let b = bihari_lasalle(f0, k, a, t).unwrap();
        let exact = rk4(f0, k, a, t, 2000);
        prop_assert!(b.closed >= exact * (1.0 - 1e-6) - 1e-12);
        prop_assert!(b.split >= b.closed * (1.0 - 1e-12));
    }
}

/// RK4 for `f' = K f^{1-α}`.
fn rk4(f0: f64, k: f64, a: f64, t: f64, steps: usize) -> f64 {
    let rhs = |f: f64| k * f.max(0.0).powf(1.0 - a);
    let h = t / steps as f64;
    let mut f = f0;
    for _ in 0..steps {
        let k1 = rhs(f);
        let k2 = rhs(f + 0.5 * h * k1);
        let k3 = rhs(f + 0.5 * h * k2);
        let k4 = rhs(f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    f
}

fn maxwellian(theta_min: f64, rho: f64) -> KernelSuite {
    KernelSuite {
        velocity: VelocityKernel::maxwellian(),
        angular: AngularMeasure::power_law(0.5, theta_min).unwrap(),
        spatial: SpatialKernel::new(rho).unwrap(),
        truncation: Truncation::pairwise_clip(Level::Auto),
    }
}

fn gaussian(n: usize, t_end: f64, seed: u64, kernels: KernelSuite) -> SimConfig<3> {
    SimConfig {
        n,
        t_end,
        seed,
        checkpoints: (0..=10).map(|i| i as f64 * t_end / 10.0).collect(),
        kernels,
        initial: InitialLaw::Gaussian {
            position_scale: 1.0,
            temperature: 1.0,
        },
        record_events: true,
    }
}

#[test]
fn candidate_counts_are_poisson() {
    use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};
    let cfg = gaussian(10, 1.0, 0, maxwellian(0.5, 1.0));
    let sim = Simulation::new(&cfg).unwrap();
    let mean = sim.rate() * 2.0;
    let runs = 4000;
    let mut counts = Vec::with_capacity(runs);
    for seed in 0..runs as u64 {
        let mut sim = Simulation::new(&SimConfig {
            seed,
            ..cfg.clone()
        })
        .unwrap();
        let mut c = 0usize;
        while sim.step().time <= 2.0 {
            c += 1;
        }
        counts.push(c);
    }
    // one bin per count within two standard deviations, plus both tails
    let law = Poisson::new(mean).unwrap();
    let lo = (mean - 2.0 * mean.sqrt()).floor() as u64;
    let hi = (mean + 2.0 * mean.sqrt()).ceil() as u64;
    let count_where =
        |f: &dyn Fn(u64) -> bool| counts.iter().filter(|&&c| f(c as u64)).count() as f64;
    let mut cells = vec![(
        count_where(&|c| c < lo),
        (0..lo).map(|k| law.pmf(k)).sum::<f64>(),
    )];
    for k in lo..=hi {
        cells.push((count_where(&|c| c == k), law.pmf(k)));
    }
    cells.push((
        count_where(&|c| c > hi),
        1.0 - (0..=hi).map(|k| law.pmf(k)).sum::<f64>(),
    ));
    let stat: f64 = cells
        .iter()
        .map(|&(obs, p)| (obs - p * runs as f64).powi(2) / (p * runs as f64))
        .sum();
    let bins = cells.len();
    let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(
        p_value > 1e-3,
        "chi2 = {stat} on {bins} bins, p = {p_value}"
    );
}

#[test]
fn particles_are_exchangeable() {
    let runs = 1500;
    let mut diffs = Vec::with_capacity(runs);
    for seed in 0..runs as u64 {
        let cfg = gaussian(4, 1.0, seed, maxwellian(0.2, 2.0));
        let out = run(&cfg).unwrap();
        let last = out.snapshots.last().unwrap();
        diffs.push(last.points[0].velocity.norm_sq() - last.points[3].velocity.norm_sq());
    }
    let mean = diffs.iter().sum::<f64>() / runs as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (runs as f64 - 1.0);
    assert!(mean.abs() < 4.0 * (var / runs as f64).sqrt());
}

#[test]
fn separated_particles_move_freely() {
    let positions: Vec<V3> = (0..5)
        .map(|i| V3::new([10.0 * i as f64, 0.0, 0.0]))
        .collect();
    let velocities: Vec<V3> = (0..5)
        .map(|i| V3::new([0.0, 0.1 * i as f64, -0.2]))
        .collect();
    let state = ParticleState::from_phase(positions.clone(), velocities.clone()).unwrap();
    let mut sim = Simulation::from_state(state, &maxwellian(0.1, 1.0), 3).unwrap();
    let snaps = sim.run_with(5.0, &[1.0, 5.0], &mut |e| {
        assert!(e.k == e.j || !e.accepted)
    });
    for s in &snaps {
        for k in 0..5 {
            assert_eq!(s.points[k].velocity, velocities[k]);
            assert_eq!(
                s.points[k].position,
                positions[k].offset(&velocities[k], s.time)
            );
        }
    }
}

#[test]
fn second_moment_is_constant_along_a_run() {
    let out = run(&gaussian(300, 2.0, 4, maxwellian(0.1, 3.0))).unwrap();
    assert!(out.audit.accepted > 100);
    let m0 = moment(&out.snapshots[0], 2.0);
    for s in &out.snapshots {
        assert!((moment(s, 2.0) - m0).abs() <= 1e-10 * m0);
    }
}

#[test]
fn initial_states_do_not_depend_on_kernels() {
    let a = gaussian(50, 1.0, 9, maxwellian(0.1, 1.0));
    let b = gaussian(50, 1.0, 9, maxwellian(0.05, 2.0));
    let (ra, rb) = (run(&a).unwrap(), run(&b).unwrap());
    assert_eq!(ra.snapshots[0], rb.snapshots[0]);
    assert_eq!(
        init_iid(&a.initial, 50, 9).unwrap().snapshot(),
        ra.snapshots[0]
    );
}
