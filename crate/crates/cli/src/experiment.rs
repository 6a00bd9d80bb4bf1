//! Multi-seed experiment execution and aggregation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hamgrad_core::games::{
    BilinearGame, BilinearSpec, CouplingKind, Game, GaussianGanGame, Point, SuffBilinearGame,
};
use hamgrad_core::hamiltonian::{
    bilinear_constants, lh_estimate, lmax_components, lmax_components_estimate, sampling_constants,
    sigma_sq, suff_bilinear_constants, SuffBilinearInputs, ENUMERATION_LIMIT,
};
use hamgrad_core::numerics::{streams, RngStream};
use hamgrad_core::optimizers::{
    log_grid, run, Algorithm, Monitor, Recording, RunConfig, RunFlag, Schedule, Trace,
};

use crate::config::{
    ExperimentConfig, GameConfig, GameKind, RunSpec, ScheduleConfig, ScheduleKind,
};
use crate::error::{CliError, Result};

/// A generated game together with what the harness needs to measure it.
pub enum GameInstance {
    Bilinear(BilinearGame),
    SuffBilinear(SuffBilinearGame),
    Gan(GaussianGanGame),
}

/// Problem constants used by theory step-sizes and bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryValues {
    pub mu: f64,
    pub l_h: f64,
    pub l_max: f64,
    pub l_es: f64,
    pub rho: f64,
    /// `None` when the solution is unknown or `n²` is too large to enumerate.
    pub sigma_sq: Option<f64>,
    /// Whether `L_H` and `L_max` are exact rather than sampled estimates.
    pub exact: bool,
}

impl GameInstance {
    pub fn build(cfg: &GameConfig, seed: u64) -> Result<Self> {
        let spec = |kind| BilinearSpec {
            n: cfg.n,
            d: cfg.d,
            kind,
            interpolated: cfg.interpolated,
            seed,
        };
        Ok(match cfg.kind {
            GameKind::Bilinear => {
                GameInstance::Bilinear(BilinearGame::generate(&spec(CouplingKind::OneHot))?)
            }
            GameKind::BilinearSpd => {
                GameInstance::Bilinear(BilinearGame::generate(&spec(CouplingKind::Spd))?)
            }
            GameKind::SuffBilinear => GameInstance::SuffBilinear(SuffBilinearGame::generate(
                &spec(CouplingKind::OneHot),
                cfg.delta,
            )?),
            GameKind::Gan(v) => GameInstance::Gan(GaussianGanGame::new(
                v,
                cfg.gan_samples,
                cfg.gan_batch,
                seed,
            )?),
        })
    }

    pub fn game(&self) -> &dyn Game {
        match self {
            GameInstance::Bilinear(g) => g,
            GameInstance::SuffBilinear(g) => g,
            GameInstance::Gan(g) => g,
        }
    }

    /// `x*` when the game has a computable unique reference solution.
    pub fn solution(&self) -> Result<Option<Point>> {
        Ok(match self {
            GameInstance::Bilinear(g) => Some(g.solution()?),
            GameInstance::SuffBilinear(g) => Some(g.solution()?),
            GameInstance::Gan(_) => None,
        })
    }

    /// `N(0, I)` for the bilinear families, `U(−1, 1)` for the GANs.
    pub fn initial_point(&self, seed: u64) -> Point {
        let game = self.game();
        let mut rng = RngStream::new(seed, streams::INIT);
        let v = match self {
            GameInstance::Gan(_) => (0..game.dim())
                .map(|_| rng.uniform_range(-1.0, 1.0))
                .collect(),
            _ => (0..game.dim()).map(|_| rng.standard_normal()).collect(),
        };
        Point::from_flat(v, game.d1()).expect("dimension matches the game")
    }

    pub fn theory(&self, tau: usize) -> Result<TheoryValues> {
        let (mu, l_h, l_max, exact) = match self {
            GameInstance::Bilinear(g) => {
                let c = bilinear_constants(g)?;
                (c.mu_h, c.l_h, lmax_components(g)?, true)
            }
            GameInstance::SuffBilinear(g) => {
                let c = suff_bilinear_constants(&SuffBilinearInputs::for_game(g)?)?;
                let mut rng = RngStream::new(0, streams::PROBE);
                let mut probes = vec![g.solution()?];
                probes.extend((0..3).map(|s| self.initial_point(1000 + s)));
                let l_h = lh_estimate(g, &probes, &mut rng)?;
                let l_max = lmax_components_estimate(g, &probes[..2], 50, &mut rng)?;
                (c.mu_h, l_h, l_max.max(l_h), false)
            }
            GameInstance::Gan(_) => {
                return Err(CliError::config(
                    "schedule",
                    "theory constants are unavailable for the GAN games; set gamma explicitly",
                ))
            }
        };
        let n = self.game().n();
        let s = sampling_constants(l_h, l_max, n, tau)?;
        let sigma = match self.solution()? {
            Some(xs) if n * n <= ENUMERATION_LIMIT => Some(sigma_sq(self.game(), &xs, tau)?),
            _ => None,
        };
        Ok(TheoryValues {
            mu,
            l_h,
            l_max,
            l_es: s.l_es,
            rho: s.rho_er,
            sigma_sq: sigma,
            exact,
        })
    }
}

/// Concrete step-size policy for one run.
pub fn resolve_schedule(
    sc: &ScheduleConfig,
    theory: &mut dyn FnMut() -> Result<TheoryValues>,
) -> Result<Schedule> {
    let with_gamma = |s: Schedule, gamma: Option<f64>| -> Schedule {
        match (s, gamma) {
            (
                Schedule::Switching {
                    kind, mu, switch_k, ..
                },
                Some(g),
            ) => Schedule::Switching {
                kind,
                gamma0: g,
                mu,
                switch_k,
            },
            (s, _) => s,
        }
    };
    let schedule = match sc.kind {
        ScheduleKind::Constant => match sc.gamma {
            Some(g) => Schedule::constant(g)?,
            None => Schedule::constant(0.5 / theory()?.l_es)?,
        },
        ScheduleKind::Switch => Schedule::switching(
            sc.gamma.unwrap_or_default(),
            sc.mu.unwrap_or_default(),
            sc.switch_k.unwrap_or_default(),
        )?,
        ScheduleKind::SwitchQsc => {
            let t = theory()?;
            with_gamma(Schedule::switching_qsc(t.l_es, t.mu)?, sc.gamma)
                .with_overrides(sc.mu, sc.switch_k)?
        }
        ScheduleKind::SwitchPl => {
            let t = theory()?;
            with_gamma(Schedule::switching_pl(t.l_h, t.mu, t.rho)?, sc.gamma)
                .with_overrides(sc.mu, sc.switch_k)?
        }
    };
    Ok(schedule)
}

/// One record of a run, normalised by its `k = 0` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub k: u64,
    pub samples_seen: u64,
    pub dist_sq_rel: f64,
    pub h_rel: f64,
    pub gamma: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run_id: usize,
    pub label: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub flag: RunFlag,
}

impl RunTrace {
    pub fn final_row(&self) -> &Row {
        self.rows.last().expect("every trace has its k = 0 row")
    }

    /// Last row with `samples_seen ≤ s`.
    pub fn at_samples(&self, s: u64) -> &Row {
        let idx = self.rows.partition_point(|r| r.samples_seen <= s);
        &self.rows[idx.saturating_sub(1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Distance,
    Hamiltonian,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::Distance => "dist_sq_rel",
            Metric::Hamiltonian => "h_rel",
        }
    }

    pub fn of(self, row: &Row) -> f64 {
        match self {
            Metric::Distance => row.dist_sq_rel,
            Metric::Hamiltonian => row.h_rel,
        }
    }
}

/// Mean and 95% normal-approximation half-width per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub label: String,
    pub metric: Metric,
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub ci: Vec<f64>,
    pub m: usize,
}

/// `(mean, 1.96 s/√m)` with the sample standard deviation; zero width for `m = 1`.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, 1.96 * var.sqrt() / (m as f64).sqrt())
}

/// Aligns the traces of `label` onto `checkpoints` by last-value carry-forward.
pub fn summarize(traces: &[RunTrace], label: &str, metric: Metric, checkpoints: &[u64]) -> Summary {
    let group: Vec<&RunTrace> = traces.iter().filter(|t| t.label == label).collect();
    let mut mean = Vec::with_capacity(checkpoints.len());
    let mut ci = Vec::with_capacity(checkpoints.len());
    let mut buf = Vec::with_capacity(group.len());
    for &s in checkpoints {
        buf.clear();
        buf.extend(group.iter().map(|t| metric.of(t.at_samples(s))));
        let (m, c) = mean_ci(&buf);
        mean.push(m);
        ci.push(c);
    }
    Summary {
        label: label.to_string(),
        metric,
        checkpoints: checkpoints.to_vec(),
        mean,
        ci,
        m: group.len(),
    }
}

pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub game_label: String,
    pub traces: Vec<RunTrace>,
    pub checkpoints: Vec<u64>,
    pub summaries: Vec<Summary>,
}

impl ExperimentResult {
    pub fn summary(&self, label: &str, metric: Metric) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.label == label && s.metric == metric)
    }

    pub fn traces_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunTrace> + 'a {
        self.traces.iter().filter(move |t| t.label == label)
    }
}

fn relative(v: f64, v0: f64) -> f64 {
    if v0 == 0.0 && v == 0.0 {
        0.0
    } else {
        v / v0
    }
}

/// Runs one configured algorithm from `x0`.
pub fn run_one(
    instance: &GameInstance,
    spec: &RunSpec,
    schedule: Schedule,
    x0: &Point,
    x_star: Option<&Point>,
    seed: u64,
    max_samples: u64,
    iters: Option<u64>,
    recording: Recording,
) -> Result<(Trace, Vec<Row>)> {
    let cfg = RunConfig {
        algorithm: spec.algorithm,
        schedule,
        p: spec.p,
        lambda: spec.lambda,
        restart_k: spec.restart_k,
        restart_t: spec.restart_t,
        tau: spec.tau,
        iters: iters.unwrap_or(u64::MAX),
        max_samples: Some(max_samples),
        seed,
        recording,
        output: spec.output,
    };
    let gan_distance;
    let monitor = match instance {
        GameInstance::Gan(g) => {
            gan_distance = move |x: &[f64]| {
                let p =
                    Point::from_flat(x.to_vec(), g.d1()).expect("iterate has the game's dimension");
                g.distance_metric(&p).unwrap_or(f64::NAN)
            };
            Monitor::with_distance(&gan_distance)
        }
        _ => Monitor {
            x_star,
            distance: None,
        },
    };
    let trace = run(instance.game(), x0, &cfg, monitor)?;
    let r0 = trace.records[0];
    let mut rows: Vec<Row> = trace
        .records
        .iter()
        .map(|r| Row {
            k: r.k,
            samples_seen: r.samples_seen,
            dist_sq_rel: relative(r.dist, r0.dist),
            h_rel: relative(r.h, r0.h),
            gamma: r.gamma,
            diverged: r.diverged,
        })
        .collect();
    let first = &mut rows[0];
    for v in [&mut first.dist_sq_rel, &mut first.h_rel] {
        if v.is_finite() {
            *v = 1.0;
        }
    }
    Ok((trace, rows))
}

/// Runs every configured algorithm for every seed and aggregates the traces.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let instance = GameInstance::build(&cfg.game, cfg.game_seed())?;
    let x_star = instance.solution()?;
    let checkpoints = log_grid(cfg.max_samples, cfg.checkpoints);
    let recording = match cfg.record_every {
        Some(r) => Recording::Every(r),
        None => Recording::Samples(checkpoints.clone()),
    };

    let mut cached: Option<TheoryValues> = None;
    let mut jobs = Vec::new();
    for spec in &cfg.runs {
        let mut theory = || -> Result<TheoryValues> {
            if let Some(t) = cached.filter(|_| spec.tau == 1) {
                return Ok(t);
            }
            let t = instance.theory(spec.tau)?;
            if spec.tau == 1 {
                cached = Some(t);
            }
            Ok(t)
        };
        let schedule = resolve_schedule(&spec.schedule, &mut theory)?;
        jobs.extend(
            cfg.seed_list()
                .into_iter()
                .map(|seed| (spec, schedule.clone(), seed)),
        );
    }

    let traces = parallel_map(&jobs, |idx, (spec, schedule, seed)| {
        let x0 = instance.initial_point(*seed);
        let (trace, rows) = run_one(
            &instance,
            spec,
            schedule.clone(),
            &x0,
            x_star.as_ref(),
            *seed,
            cfg.max_samples,
            cfg.iters,
            recording.clone(),
        )?;
        Ok(RunTrace {
            run_id: idx,
            label: spec.label.clone(),
            algorithm: spec.algorithm,
            seed: *seed,
            rows,
            flag: trace.flag,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::new();
    let mut labels: Vec<&str> = Vec::new();
    for spec in &cfg.runs {
        if !labels.contains(&spec.label.as_str()) {
            labels.push(&spec.label);
        }
    }
    for metric in [Metric::Distance, Metric::Hamiltonian] {
        for label in &labels {
            summaries.push(summarize(&traces, label, metric, &checkpoints));
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        game_label: instance.game().label().to_string(),
        traces,
        checkpoints,
        summaries,
    })
}

/// Applies `f` to every item on a pool of scoped threads; results keep item order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(idx) else {
                    break;
                };
                let out = f(idx, item);
                slots.lock().expect("a worker panicked")[idx] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("a worker panicked")
        .into_iter()
        .map(|r| r.expect("every item was processed"))
        .collect()
}

/// Least-squares slope of `log y` against `log x` over points with `lo ≤ x ≤ hi`.
pub fn loglog_slope(xs: &[u64], ys: &[f64], lo: u64, hi: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x >= lo && x <= hi && x > 0 && y > 0.0 && y.is_finite())
        .map(|(&x, &y)| ((x as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(label: &str, rows: &[(u64, f64)]) -> RunTrace {
        RunTrace {
            run_id: 0,
            label: label.to_string(),
            algorithm: Algorithm::Shgd,
            seed: 1,
            rows: rows
                .iter()
                .map(|&(s, v)| Row {
                    k: s,
                    samples_seen: s,
                    dist_sq_rel: v,
                    h_rel: v,
                    gamma: 0.1,
                    diverged: false,
                })
                .collect(),
            flag: RunFlag::Ok,
        }
    }

    #[test]
    fn ci_of_one_two_three() {
        let (m, c) = mean_ci(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((c - 1.96 / 3f64.sqrt()).abs() < 1e-15);
        assert!((c - 1.1316).abs() < 1e-4);
        assert_eq!(mean_ci(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn carry_forward_alignment() {
        let t = trace("a", &[(0, 1.0), (10, 0.5), (25, 0.25)]);
        assert_eq!(t.at_samples(0).dist_sq_rel, 1.0);
        assert_eq!(t.at_samples(9).dist_sq_rel, 1.0);
        assert_eq!(t.at_samples(10).dist_sq_rel, 0.5);
        assert_eq!(t.at_samples(1000).dist_sq_rel, 0.25);
    }

    #[test]
    fn single_seed_summary_is_the_trace() {
        let t = vec![trace("a", &[(0, 1.0), (10, 0.5)]), trace("b", &[(0, 1.0)])];
        let s = summarize(&t, "a", Metric::Distance, &[0, 5, 10, 20]);
        assert_eq!(s.mean, vec![1.0, 1.0, 0.5, 0.5]);
        assert_eq!(s.ci, vec![0.0; 4]);
        assert_eq!(s.m, 1);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<u64> = (1..=100).map(|k| k * 1000).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 / x as f64).collect();
        assert!((loglog_slope(&xs, &ys, 10_000, 100_000).unwrap() + 1.0).abs() < 1e-12);
    }
}
