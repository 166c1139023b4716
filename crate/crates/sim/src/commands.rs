//! Experiment drivers behind the CLI subcommands.
//!
//! Each run directory holds `config.toml` (the effective configuration),
//! `manifest.tsv`, `events.tsv`, `snapshots/`, `moments.tsv`, `audit.tsv`
//! and, for residual experiments, `residual.tsv`.

use std::fs;
use std::path::{Path, PathBuf};

use enskog_core::bounds::{calibrate_envelope, envelope_eval, povzner_certify, MomentEnvelope};
use enskog_core::meanfield::{
    chaos_distance, energy_distance, simulate_tagged, variance_scaling_fit, MarginalFlow,
};
use enskog_core::observables::{
    enskog_balance, CollisionQuadrature, EmpiricalSnapshot, MomentSeries, PhasePoint,
};
use enskog_core::particles::{run, ConservationReport, RunOutput};
use enskog_core::{SimRng, Vector};
use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{ConfigError, Error, Result};
use crate::formats::{self, Table};

/// Largest tolerated relative drift of momentum and energy.
pub const DRIFT_TOLERANCE: f64 = 1e-8;
/// Slack of the Povzner validation.
pub const POVZNER_SLACK: f64 = 1e-9;
/// Accepted range of the residual-variance slope.
pub const SLOPE_RANGE: (f64, f64) = (-1.35, -0.65);
/// A moment series is stable when its seed mean stays within this factor
/// of its initial value.
pub const STABILITY_FACTOR: f64 = 2.0;

/// What a command printed plus any hard invariant it saw violated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub violations: Vec<String>,
}

impl Outcome {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Process exit status: nonzero iff an invariant was violated.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.violations.is_empty())
    }
}

macro_rules! with_dim {
    ($d:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $d {
            3 => $f::<3>($($arg),*),
            4 => $f::<4>($($arg),*),
            5 => $f::<5>($($arg),*),
            6 => $f::<6>($($arg),*),
            d => Err(ConfigError::new(vec![format!("system.d = {d} must be in 3..=6")]).into()),
        }
    };
}

/// Result of one particle run written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub n: usize,
    pub seed: u64,
    pub dir: PathBuf,
    pub audit: ConservationReport,
    /// Balance defect at `t_end`, when computed.
    pub residual: Option<f64>,
}

impl RunSummary {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let a = &self.audit;
        if !(a.momentum_drift <= DRIFT_TOLERANCE && a.energy_drift <= DRIFT_TOLERANCE) {
            v.push(format!(
                "n={} seed={}: conservation drift {:e} / {:e} exceeds {DRIFT_TOLERANCE:e}",
                self.n, self.seed, a.momentum_drift, a.energy_drift
            ));
        }
        if a.majorant_breaches > 0 {
            v.push(format!(
                "n={} seed={}: {} majorant breaches",
                self.n, self.seed, a.majorant_breaches
            ));
        }
        v
    }
}

/// The configuration a single run actually used, relative to its own
/// directory so outputs do not depend on where they were written.
fn effective(cfg: &RunConfig, n: usize, seed: u64) -> RunConfig {
    let mut c = cfg.clone();
    c.experiment.out = PathBuf::from(".");
    c.system.n = n;
    c.system.seed = seed;
    c.experiment.seeds = vec![seed];
    c.experiment.ns = vec![n];
    c
}

fn snapshot_energy<const D: usize>(s: &EmpiricalSnapshot<D>) -> f64 {
    s.points.iter().map(|p| p.velocity.norm_sq()).sum()
}

/// Copies a snapshot into three dimensions when `D == 3`.
fn as_3d<const D: usize>(s: &EmpiricalSnapshot<D>) -> Option<EmpiricalSnapshot<3>> {
    if D != 3 {
        return None;
    }
    let cut = |v: &Vector<D>| Vector::new([v[0], v[1], v[2]]);
    Some(EmpiricalSnapshot::new(
        s.time,
        s.points
            .iter()
            .map(|p| PhasePoint {
                position: cut(&p.position),
                velocity: cut(&p.velocity),
            })
            .collect(),
    ))
}

/// Balance defect `e(t)` at every snapshot (three dimensions only).
pub fn residual_series(cfg: &RunConfig, snapshots: &[EmpiricalSnapshot<3>]) -> Result<Vec<f64>> {
    let suite = cfg.kernel_suite()?;
    let first = snapshots
        .first()
        .ok_or_else(|| Error::Invariant("run produced no snapshots".into()))?;
    let kernels = suite.resolve(snapshot_energy(first))?;
    let quad = CollisionQuadrature::new(
        &suite.angular,
        cfg.diagnostics.theta_nodes,
        cfg.diagnostics.xi_nodes,
    )?;
    let psi = cfg.test_function()?;
    Ok(enskog_balance(snapshots, &psi, &kernels, &quad)?)
}

fn require_3d(cfg: &RunConfig, what: &str) -> Result<()> {
    if cfg.system.d == 3 {
        Ok(())
    } else {
        Err(ConfigError::new(vec![format!("{what} needs system.d = 3")]).into())
    }
}

fn simulate<const D: usize>(cfg: &RunConfig, n: usize, seed: u64) -> Result<RunOutput<D>> {
    Ok(run(&cfg.sim_config::<D>(n, seed)?)?)
}

fn write_run<const D: usize>(
    cfg: &RunConfig,
    n: usize,
    seed: u64,
    dir: &Path,
    residual: bool,
) -> Result<RunSummary> {
    let eff = effective(cfg, n, seed);
    let out = simulate::<D>(cfg, n, seed)?;
    let text = eff.to_text();
    formats::write_file(&dir.join("config.toml"), |w| w.write_all(text.as_bytes()))?;
    let manifest = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        (
            "config_sha256".to_string(),
            formats::sha256_hex(text.as_bytes()),
        ),
        ("seed".to_string(), seed.to_string()),
        ("n".to_string(), n.to_string()),
        ("d".to_string(), D.to_string()),
    ];
    formats::write_file(&dir.join("manifest.tsv"), |w| {
        formats::write_pairs(w, "key\tvalue", &manifest)
    })?;
    if cfg.system.record_events {
        formats::write_file(&dir.join("events.tsv"), |w| {
            formats::write_events(w, &out.events)
        })?;
    }
    for (i, s) in out.snapshots.iter().enumerate() {
        let path = dir.join("snapshots").join(format!("snapshot_{i:04}.tsv"));
        formats::write_file(&path, |w| formats::write_snapshot(w, s))?;
    }
    let moments: Vec<MomentSeries> = cfg
        .diagnostics
        .moments
        .iter()
        .map(|&p| MomentSeries::from_snapshots(&out.snapshots, p))
        .collect();
    formats::write_file(&dir.join("moments.tsv"), |w| {
        formats::write_moments(w, &moments)
    })?;
    formats::write_file(&dir.join("audit.tsv"), |w| {
        formats::write_audit(w, &out.audit)
    })?;
    let residual = if residual {
        let snaps: Option<Vec<_>> = out.snapshots.iter().map(as_3d).collect();
        let snaps =
            snaps.ok_or_else(|| ConfigError::new(vec!["residual needs system.d = 3".into()]))?;
        let e = residual_series(cfg, &snaps)?;
        let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
        formats::write_file(&dir.join("residual.tsv"), |w| {
            formats::write_residual(w, cfg.psi_name(), &times, &e)
        })?;
        e.last().copied()
    } else {
        None
    };
    Ok(RunSummary {
        n,
        seed,
        dir: dir.to_path_buf(),
        audit: out.audit,
        residual,
    })
}

fn run_one(cfg: &RunConfig, n: usize, seed: u64, dir: &Path, residual: bool) -> Result<RunSummary> {
    with_dim!(cfg.system.d, write_run(cfg, n, seed, dir, residual))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))
}

/// Runs every `(n, seed)` job on `jobs` workers; results keep job order.
fn run_grid(
    cfg: &RunConfig,
    grid: &[(usize, u64, PathBuf)],
    residual: bool,
) -> Result<Vec<RunSummary>> {
    pool(cfg.experiment.jobs)?.install(|| {
        grid.par_iter()
            .map(|(n, seed, dir)| run_one(cfg, *n, *seed, dir, residual))
            .collect()
    })
}

fn summarize_runs(out: &mut Outcome, runs: &[RunSummary]) {
    for r in runs {
        out.violations.extend(r.violations());
    }
    let worst = runs
        .iter()
        .map(|r| r.audit.momentum_drift.max(r.audit.energy_drift))
        .fold(0.0, f64::max);
    let breaches: u64 = runs.iter().map(|r| r.audit.majorant_breaches).sum();
    let accepted: u64 = runs.iter().map(|r| r.audit.accepted).sum();
    out.line(format!(
        "{} run(s), {accepted} accepted events, max drift {worst:e}, {breaches} majorant breaches",
        runs.len()
    ));
}

fn sweep_rows(runs: &[RunSummary]) -> Vec<Vec<String>> {
    runs.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.seed.to_string(),
                r.audit.momentum_drift.to_string(),
                r.audit.energy_drift.to_string(),
                r.audit.accepted.to_string(),
                r.audit.majorant_breaches.to_string(),
                r.residual.map_or("nan".into(), |e| e.to_string()),
            ]
        })
        .collect()
}

const SWEEP_COLUMNS: [&str; 7] = [
    "n",
    "seed",
    "momentum_drift",
    "energy_drift",
    "accepted",
    "majorant_breaches",
    "residual",
];

/// Single run at the system `n` and seed, written to `experiment.out`.
pub fn cmd_run(cfg: &RunConfig) -> Result<Outcome> {
    let s = run_one(
        cfg,
        cfg.system.n,
        cfg.system.seed,
        &cfg.experiment.out,
        false,
    )?;
    let mut out = Outcome::default();
    summarize_runs(&mut out, std::slice::from_ref(&s));
    out.line(format!("wrote {}", s.dir.display()));
    Ok(out)
}

/// Runs the `ns × seeds` grid into `out/n{n}_s{seed}` directories. In three
/// dimensions each run also records its balance defect.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let root = &cfg.experiment.out;
    let grid: Vec<(usize, u64, PathBuf)> = cfg
        .experiment
        .ns
        .iter()
        .flat_map(|&n| {
            cfg.experiment
                .seeds
                .iter()
                .map(move |&s| (n, s, root.join(format!("n{n}_s{s}"))))
        })
        .collect();
    let runs = run_grid(cfg, &grid, cfg.system.d == 3)?;
    formats::write_file(&root.join("sweep.tsv"), |w| {
        formats::write_table(w, &SWEEP_COLUMNS, &sweep_rows(&runs))
    })?;
    let mut out = Outcome::default();
    summarize_runs(&mut out, &runs);
    out.line(format!(
        "wrote {} run directories under {}",
        runs.len(),
        root.display()
    ));
    Ok(out)
}

/// Balance defect over every seed at the system `n`.
pub fn cmd_residual(cfg: &RunConfig) -> Result<Outcome> {
    require_3d(cfg, "residual")?;
    let root = &cfg.experiment.out;
    let n = cfg.system.n;
    let grid: Vec<(usize, u64, PathBuf)> = cfg
        .experiment
        .seeds
        .iter()
        .map(|&s| (n, s, root.join(format!("n{n}_s{s}"))))
        .collect();
    let runs = run_grid(cfg, &grid, true)?;
    formats::write_file(&root.join("sweep.tsv"), |w| {
        formats::write_table(w, &SWEEP_COLUMNS, &sweep_rows(&runs))
    })?;
    let values: Vec<f64> = runs.iter().filter_map(|r| r.residual).collect();
    let (mean, var) = mean_var(&values);
    let mut out = Outcome::default();
    summarize_runs(&mut out, &runs);
    out.line(format!(
        "psi {}: e(t_end) mean {mean:e}, variance {var:e} over {} seeds",
        cfg.psi_name(),
        values.len()
    ));
    Ok(out)
}

/// Povzner constant calibration and validation for each configured `p`.
pub fn cmd_povzner(cfg: &RunConfig) -> Result<Outcome> {
    let mut rng = SimRng::seed_from_u64(cfg.system.seed);
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &p in &cfg.diagnostics.povzner_p {
        let r = povzner_certify(p, cfg.diagnostics.povzner_samples, POVZNER_SLACK, &mut rng)?;
        out.line(format!(
            "p={p}: C_p = {}, {} violations in {} samples: {}",
            r.c_p,
            r.violations,
            r.samples,
            verdict(r.passed())
        ));
        rows.push(vec![
            p.to_string(),
            r.c_p.to_string(),
            r.calibration_points.to_string(),
            r.samples.to_string(),
            r.violations.to_string(),
            r.worst_margin.to_string(),
            u8::from(r.passed()).to_string(),
        ]);
    }
    formats::write_file(&cfg.experiment.out.join("povzner.tsv"), |w| {
        formats::write_table(
            w,
            &[
                "p",
                "c_p",
                "calibration_points",
                "samples",
                "violations",
                "worst_margin",
                "passed",
            ],
            &rows,
        )
    })?;
    Ok(out)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Sample mean and unbiased variance (zero for fewer than two values).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

/// Seeds of the two independent runs compared for seed `s`.
pub fn pair_seeds(s: u64) -> (u64, u64) {
    (s.wrapping_mul(2), s.wrapping_mul(2).wrapping_add(1))
}

fn final_snapshot<const D: usize>(
    cfg: &RunConfig,
    n: usize,
    seed: u64,
) -> Result<(EmpiricalSnapshot<D>, ConservationReport)> {
    let out = simulate::<D>(cfg, n, seed)?;
    let last = out
        .snapshots
        .last()
        .cloned()
        .ok_or_else(|| Error::Invariant("run produced no snapshots".into()))?;
    Ok((last, out.audit))
}

fn chaos_pair<const D: usize>(
    cfg: &RunConfig,
    n: usize,
    seed: u64,
) -> Result<(f64, [ConservationReport; 2])> {
    let (a, b) = pair_seeds(seed);
    let (sa, aa) = final_snapshot::<D>(cfg, n, a)?;
    let (sb, ab) = final_snapshot::<D>(cfg, n, b)?;
    Ok((chaos_distance(&sa, &sb)?, [aa, ab]))
}

fn chaos_one(cfg: &RunConfig, n: usize, seed: u64) -> Result<(f64, [ConservationReport; 2])> {
    with_dim!(cfg.system.d, chaos_pair(cfg, n, seed))
}

/// Distance between the empirical measures of two independent runs at
/// `t_end`, for every `n` and seed pair; optionally the tagged-particle
/// consistency check.
pub fn cmd_chaos(cfg: &RunConfig) -> Result<Outcome> {
    let grid: Vec<(usize, u64)> = cfg
        .experiment
        .ns
        .iter()
        .flat_map(|&n| cfg.experiment.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<(f64, [ConservationReport; 2])> =
        pool(cfg.experiment.jobs)?.install(|| {
            grid.par_iter()
                .map(|&(n, s)| chaos_one(cfg, n, s))
                .collect::<Result<_>>()
        })?;
    let mut out = Outcome::default();
    for (&(n, s), (_, audits)) in grid.iter().zip(&results) {
        for a in audits {
            let r = RunSummary {
                n,
                seed: s,
                dir: PathBuf::new(),
                audit: *a,
                residual: None,
            };
            out.violations.extend(r.violations());
        }
    }
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&results)
        .map(|(&(n, s), (d, _))| vec![n.to_string(), s.to_string(), d.to_string()])
        .collect();
    let root = &cfg.experiment.out;
    formats::write_file(&root.join("chaos.tsv"), |w| {
        formats::write_table(w, &["n", "seed", "distance"], &rows)
    })?;
    let mut summary = Vec::new();
    let mut means = Vec::new();
    for &n in &cfg.experiment.ns {
        let ds: Vec<f64> = grid
            .iter()
            .zip(&results)
            .filter(|((m, _), _)| *m == n)
            .map(|(_, (d, _))| *d)
            .collect();
        let (mean, var) = mean_var(&ds);
        let se = (var / ds.len() as f64).sqrt();
        out.line(format!(
            "n={n}: mean distance {mean:e} (se {se:e}, {} pairs)",
            ds.len()
        ));
        summary.push(vec![
            n.to_string(),
            ds.len().to_string(),
            mean.to_string(),
            se.to_string(),
        ]);
        means.push(mean);
    }
    formats::write_file(&root.join("chaos_summary.tsv"), |w| {
        formats::write_table(w, &["n", "pairs", "mean", "se"], &summary)
    })?;
    let monotone = means.windows(2).all(|w| w[1] < w[0]);
    out.line(format!(
        "mean distance decreasing in n: {}",
        verdict(monotone)
    ));
    if cfg.diagnostics.tagged_paths > 0 {
        require_3d(cfg, "tagged paths")?;
        let t = tagged_check(cfg)?;
        out.line(format!(
            "tagged: distance {:e} vs noise floor {:e}: {}",
            t.distance,
            t.noise_floor,
            verdict(t.passed())
        ));
        formats::write_file(&root.join("tagged.tsv"), |w| {
            formats::write_pairs(
                w,
                "key\tvalue",
                &[
                    ("n".into(), t.n.to_string()),
                    ("paths".into(), t.paths.to_string()),
                    ("distance".into(), t.distance.to_string()),
                    ("noise_floor".into(), t.noise_floor.to_string()),
                    ("passed".into(), u8::from(t.passed()).to_string()),
                ],
            )
        })?;
    }
    Ok(out)
}

/// Tagged paths driven by a frozen particle flow against that flow's own
/// velocity marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedCheck {
    pub n: usize,
    pub paths: usize,
    /// Energy distance between tagged end velocities and the flow's final
    /// velocities.
    pub distance: f64,
    /// Energy distance between the final velocities of two independent runs.
    pub noise_floor: f64,
}

impl TaggedCheck {
    /// Within twice the two-run noise floor.
    pub fn passed(&self) -> bool {
        self.distance <= 2.0 * self.noise_floor
    }
}

/// Runs the flow at the largest `n` and first seed, then drives
/// `tagged_paths` tagged particles started from the flow's initial points.
pub fn tagged_check(cfg: &RunConfig) -> Result<TaggedCheck> {
    let n = *cfg.experiment.ns.iter().max().unwrap_or(&cfg.system.n);
    let (sa, sb) = pair_seeds(cfg.experiment.seeds[0]);
    let flow_run = simulate::<3>(cfg, n, sa)?;
    let other = final_snapshot::<3>(cfg, n, sb)?.0;
    let suite = cfg.kernel_suite()?;
    let kernels = suite.resolve(snapshot_energy(&flow_run.snapshots[0]))?;
    let start = flow_run.snapshots[0].points.clone();
    let flow = MarginalFlow::new(flow_run.snapshots)?;
    let t_end = cfg.system.t_end;
    let paths = cfg.diagnostics.tagged_paths;
    let ends: Vec<Vector<3>> = pool(cfg.experiment.jobs)?.install(|| {
        (0..paths)
            .into_par_iter()
            .map(|i| {
                let x0 = start[i % start.len()];
                let path = simulate_tagged(
                    &flow,
                    x0,
                    &kernels,
                    &suite.angular,
                    t_end,
                    sa ^ (i as u64) << 20,
                )?;
                Ok(path.end().velocity)
            })
            .collect::<Result<_>>()
    })?;
    let last = flow.at(t_end);
    let flow_v: Vec<Vector<3>> = last.points.iter().map(|p| p.velocity).collect();
    let other_v: Vec<Vector<3>> = other.points.iter().map(|p| p.velocity).collect();
    Ok(TaggedCheck {
        n,
        paths,
        distance: energy_distance(&ends, &flow_v)?,
        noise_floor: energy_distance(&flow_v, &other_v)?,
    })
}

fn moment_runs<const D: usize>(
    cfg: &RunConfig,
    seeds: &[u64],
    p: f64,
) -> Result<Vec<(MomentSeries, ConservationReport)>> {
    pool(cfg.experiment.jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let out = simulate::<D>(cfg, cfg.system.n, s)?;
                Ok((MomentSeries::from_snapshots(&out.snapshots, p), out.audit))
            })
            .collect()
    })
}

fn moment_series(
    cfg: &RunConfig,
    seeds: &[u64],
    p: f64,
) -> Result<Vec<(MomentSeries, ConservationReport)>> {
    with_dim!(cfg.system.d, moment_runs(cfg, seeds, p))
}

/// Outcome of an envelope experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    pub envelope: Option<MomentEnvelope>,
    /// Validation `(seed, time)` pairs whose running maximum exceeded the
    /// envelope.
    pub violations: usize,
    /// Largest ratio of a validation running maximum to its envelope.
    pub worst_ratio: f64,
    /// Seed-mean moment never exceeded [`STABILITY_FACTOR`] times its
    /// initial value, and stayed finite.
    pub stable: bool,
    pub times: Vec<f64>,
    pub mean_moment: Vec<f64>,
    pub envelope_values: Vec<f64>,
}

impl EnvelopeCheck {
    pub fn passed(&self) -> bool {
        self.stable && self.violations == 0
    }
}

/// Calibrates an envelope on the calibration seeds and validates it
/// against the running maxima of fresh seeds.
pub fn envelope_check(cfg: &RunConfig) -> Result<(EnvelopeCheck, Vec<ConservationReport>)> {
    let p = cfg.diagnostics.envelope_p;
    let regime = cfg.regime();
    let mut audits = Vec::new();
    let envelope = match regime {
        Some(r) => {
            if cfg.diagnostics.calibration_seeds.is_empty() {
                return Err(ConfigError::new(vec![
                    "diagnostics.calibration_seeds must not be empty for envelope calibration"
                        .into(),
                ])
                .into());
            }
            let cal = moment_series(cfg, &cfg.diagnostics.calibration_seeds, p)?;
            audits.extend(cal.iter().map(|(_, a)| *a));
            let maxima: Vec<MomentSeries> = cal.iter().map(|(s, _)| s.running_max()).collect();
            Some(calibrate_envelope(cfg.kernel.gamma, r, &maxima)?)
        }
        None => None,
    };
    let val = moment_series(cfg, &cfg.experiment.seeds, p)?;
    audits.extend(val.iter().map(|(_, a)| *a));
    let times = val[0].0.times.clone();
    let mut violations = 0;
    let mut worst_ratio = f64::NAN;
    if let Some(env) = &envelope {
        worst_ratio = 0.0;
        for (s, _) in &val {
            let sup = s.running_max();
            for (&t, &m) in sup.times.iter().zip(&sup.values) {
                let bound = envelope_eval(env, t, s.values[0])?;
                worst_ratio = f64::max(worst_ratio, m / bound);
                if m > bound {
                    violations += 1;
                }
            }
        }
    }
    let k = val.len() as f64;
    let mean_moment: Vec<f64> = (0..times.len())
        .map(|i| val.iter().map(|(s, _)| s.values[i]).sum::<f64>() / k)
        .collect();
    let stable = mean_moment
        .iter()
        .all(|m| m.is_finite() && *m <= STABILITY_FACTOR * mean_moment[0]);
    let envelope_values = match &envelope {
        Some(env) => times
            .iter()
            .map(|&t| envelope_eval(env, t, mean_moment[0]))
            .collect::<Result<_, _>>()?,
        None => vec![f64::NAN; times.len()],
    };
    Ok((
        EnvelopeCheck {
            envelope,
            violations,
            worst_ratio,
            stable,
            times,
            mean_moment,
            envelope_values,
        },
        audits,
    ))
}

pub fn cmd_envelope(cfg: &RunConfig) -> Result<Outcome> {
    let (check, audits) = envelope_check(cfg)?;
    let mut out = Outcome::default();
    for a in audits {
        let r = RunSummary {
            n: cfg.system.n,
            seed: 0,
            dir: PathBuf::new(),
            audit: a,
            residual: None,
        };
        out.violations.extend(r.violations());
    }
    let root = &cfg.experiment.out;
    let rows: Vec<Vec<String>> = (0..check.times.len())
        .map(|i| {
            vec![
                check.times[i].to_string(),
                check.mean_moment[i].to_string(),
                check.envelope_values[i].to_string(),
            ]
        })
        .collect();
    formats::write_file(&root.join("envelope.tsv"), |w| {
        writeln!(w, "# p {}", cfg.diagnostics.envelope_p)?;
        formats::write_table(w, &["t", "mean_moment", "envelope"], &rows)
    })?;
    let mut pairs = vec![
        ("p".to_string(), cfg.diagnostics.envelope_p.to_string()),
        ("violations".to_string(), check.violations.to_string()),
        ("worst_ratio".to_string(), check.worst_ratio.to_string()),
        ("stable".to_string(), u8::from(check.stable).to_string()),
        ("passed".to_string(), u8::from(check.passed()).to_string()),
    ];
    if let Some(e) = &check.envelope {
        pairs.push(("regime".into(), format!("{:?}", e.regime)));
        pairs.push(("c0".into(), e.c0.to_string()));
        pairs.push(("c1".into(), e.c1.to_string()));
        pairs.push(("exponent".into(), e.exponent().to_string()));
    }
    formats::write_file(&root.join("envelope_summary.tsv"), |w| {
        formats::write_pairs(w, "key\tvalue", &pairs)
    })?;
    match &check.envelope {
        Some(e) => out.line(format!(
            "p={}: {:?} envelope c0 = {}, c1 = {}, {} violations, worst ratio {:.4}",
            e.p, e.regime, e.c0, e.c1, check.violations, check.worst_ratio
        )),
        None => out.line("no envelope regime for this gamma; stability only"),
    }
    out.line(format!(
        "seed-mean moment stable within {STABILITY_FACTOR}x: {}; overall {}",
        verdict(check.stable),
        verdict(check.passed())
    ));
    Ok(out)
}

/// One row of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub value: String,
    pub passed: bool,
}

/// Aggregates a results directory: run audits and residual variances from
/// run subdirectories, plus any povzner, chaos, tagged and envelope
/// summaries at its top level.
pub fn report(dir: &Path) -> Result<(Vec<Criterion>, Vec<String>)> {
    let mut criteria = Vec::new();
    let mut violations = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.tsv").is_file())
        .collect();
    entries.sort();
    let mut by_n: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut worst_drift: f64 = 0.0;
    let mut breaches = 0u64;
    for run_dir in &entries {
        let manifest = Table::read(&run_dir.join("manifest.tsv"))?;
        let n: usize = manifest.lookup("n")?;
        let seed: u64 = manifest.lookup("seed")?;
        let audit = Table::read(&run_dir.join("audit.tsv"))?;
        let summary = RunSummary {
            n,
            seed,
            dir: run_dir.clone(),
            audit: ConservationReport {
                momentum_drift: audit.lookup("momentum_drift")?,
                energy_drift: audit.lookup("energy_drift")?,
                proposed: audit.lookup("proposed")?,
                accepted: audit.lookup("accepted")?,
                majorant_breaches: audit.lookup("majorant_breaches")?,
            },
            residual: None,
        };
        worst_drift = worst_drift
            .max(summary.audit.momentum_drift)
            .max(summary.audit.energy_drift);
        breaches += summary.audit.majorant_breaches;
        violations.extend(summary.violations());
        let res_path = run_dir.join("residual.tsv");
        if res_path.is_file() {
            let t = Table::read(&res_path)?;
            if let Some(last) = t.rows.len().checked_sub(1) {
                let e: f64 = t.get(last, t.column("value")?)?;
                match by_n.iter_mut().find(|(m, _)| *m == n) {
                    Some((_, v)) => v.push(e),
                    None => by_n.push((n, vec![e])),
                }
            }
        }
    }
    if !entries.is_empty() {
        criteria.push(Criterion {
            name: "conservation".into(),
            value: format!("max drift {worst_drift:e} over {} runs", entries.len()),
            passed: worst_drift <= DRIFT_TOLERANCE,
        });
        criteria.push(Criterion {
            name: "majorant".into(),
            value: format!("{breaches} breaches"),
            passed: breaches == 0,
        });
    }
    by_n.sort_by_key(|(n, _)| *n);
    let points: Vec<(f64, f64)> = by_n
        .iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(n, v)| (*n as f64, mean_var(v).1))
        .collect();
    if points.len() >= 3 {
        let slope = variance_scaling_fit(&points)?;
        criteria.push(Criterion {
            name: "residual_variance_slope".into(),
            value: format!("{slope}"),
            passed: slope >= SLOPE_RANGE.0 && slope <= SLOPE_RANGE.1,
        });
    }
    let pov = dir.join("povzner.tsv");
    if pov.is_file() {
        let t = Table::read(&pov)?;
        let (cp, cv, cc) = (t.column("p")?, t.column("violations")?, t.column("passed")?);
        for row in 0..t.rows.len() {
            criteria.push(Criterion {
                name: format!("povzner_p{}", t.rows[row][cp]),
                value: format!("{} violations", t.rows[row][cv]),
                passed: t.get::<u8>(row, cc)? == 1,
            });
        }
    }
    let chaos = dir.join("chaos_summary.tsv");
    if chaos.is_file() {
        let t = Table::read(&chaos)?;
        let cm = t.column("mean")?;
        let means: Vec<f64> = (0..t.rows.len())
            .map(|r| t.get(r, cm))
            .collect::<Result<_>>()?;
        criteria.push(Criterion {
            name: "chaos_trend".into(),
            value: means
                .iter()
                .map(|m| format!("{m:e}"))
                .collect::<Vec<_>>()
                .join(" > "),
            passed: means.windows(2).all(|w| w[1] < w[0]),
        });
    }
    for (file, name) in [
        ("tagged.tsv", "tagged_consistency"),
        ("envelope_summary.tsv", "moment_envelope"),
    ] {
        let path = dir.join(file);
        if path.is_file() {
            let t = Table::read(&path)?;
            let passed: u8 = t.lookup("passed")?;
            let value = t
                .rows
                .iter()
                .filter(|r| r[0] != "passed")
                .map(|r| format!("{}={}", r[0], r[1]))
                .collect::<Vec<_>>()
                .join(" ");
            criteria.push(Criterion {
                name: name.into(),
                value,
                passed: passed == 1,
            });
        }
    }
    Ok((criteria, violations))
}

pub fn cmd_report(dir: &Path) -> Result<Outcome> {
    let (criteria, violations) = report(dir)?;
    let rows: Vec<Vec<String>> = criteria
        .iter()
        .map(|c| vec![c.name.clone(), c.value.clone(), verdict(c.passed).into()])
        .collect();
    formats::write_file(&dir.join("report.tsv"), |w| {
        formats::write_table(w, &["criterion", "value", "status"], &rows)
    })?;
    let mut out = Outcome {
        lines: Vec::new(),
        violations,
    };
    if criteria.is_empty() {
        out.line(format!("nothing to report in {}", dir.display()));
    }
    for c in &criteria {
        out.line(format!("{}: {} [{}]", c.name, c.value, verdict(c.passed)));
    }
    Ok(out)
}
