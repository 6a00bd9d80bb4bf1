use std::fmt;
use std::str::FromStr;

use super::schedule::Schedule;
use super::trace::{RunFlag, Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::games::{check_point, Game, Point};
use crate::hamiltonian::{sample_minibatch, sample_pair, Hamiltonian};
use crate::numerics::{self, streams, RngStream};

/// Iterates with `‖x‖` above this (or any non-finite entry) stop the run.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Stochastic simultaneous gradient descent-ascent on `ξ_i`.
    Sgda,
    /// Stochastic Hamiltonian gradient descent with the unbiased pair estimator.
    Shgd,
    /// The same iteration with `(J_i + J_j)ᵀ(ξ_i + ξ_j)`.
    ShgdBiased,
    /// Stochastic consensus optimization, `ξ_i + λ(J_i + J_j)ᵀ(ξ_i + ξ_j)`.
    Co,
    /// Loopless variance-reduced Hamiltonian method.
    Lsvrhg,
    /// L-SVRHG restarted every `K` iterations from a uniformly chosen iterate.
    LsvrhgRestart,
    /// Deterministic Hamiltonian gradient descent.
    Hgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Sgda,
        Algorithm::Shgd,
        Algorithm::ShgdBiased,
        Algorithm::Co,
        Algorithm::Lsvrhg,
        Algorithm::LsvrhgRestart,
        Algorithm::Hgd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sgda => "sgda",
            Algorithm::Shgd => "shgd",
            Algorithm::ShgdBiased => "shgd-biased",
            Algorithm::Co => "co",
            Algorithm::Lsvrhg => "lsvrhg",
            Algorithm::LsvrhgRestart => "lsvrhg-restart",
            Algorithm::Hgd => "hgd",
        }
    }

    /// Expected cost units per iteration (snapshot refreshes included on average).
    pub fn expected_cost(self, n: usize, p: f64, tau: usize) -> f64 {
        let n = n as f64;
        match self {
            Algorithm::Sgda => 1.0,
            Algorithm::Shgd => 2.0 * tau as f64,
            Algorithm::ShgdBiased | Algorithm::Co => 2.0,
            Algorithm::Lsvrhg | Algorithm::LsvrhgRestart => 4.0 + 2.0 * n * p,
            Algorithm::Hgd => 2.0 * n,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// Which iterate a variance-reduced run returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputOption {
    /// The final iterate `x^K`.
    Last,
    /// `x^t` with `t` uniform on `{0, …, K}`.
    UniformRandom,
}

/// When to record trace metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum Recording {
    /// At these iteration counts.
    Iterations(Vec<u64>),
    /// At every multiple of this iteration stride.
    Every(u64),
    /// At the last iterate whose `samples_seen` does not exceed each checkpoint.
    Samples(Vec<u64>),
}

/// `0` followed by about `points` log-spaced integers up to `max` (inclusive).
pub fn log_grid(max: u64, points: usize) -> Vec<u64> {
    let mut out = vec![0];
    if max == 0 {
        return out;
    }
    let points = points.max(2);
    let top = (max as f64).ln();
    for s in 0..points {
        let v = (top * s as f64 / (points - 1) as f64).exp().round() as u64;
        let v = v.clamp(1, max);
        if *out.last().unwrap() < v {
            out.push(v);
        }
    }
    if *out.last().unwrap() != max {
        out.push(max);
    }
    out
}

/// `0, step, 2·step, …` up to and including `max`.
pub fn every(step: u64, max: u64) -> Vec<u64> {
    let step = step.max(1);
    let mut out: Vec<u64> = (0..=max / step).map(|m| m * step).collect();
    if *out.last().unwrap() != max {
        out.push(max);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    /// Snapshot refresh probability.
    pub p: f64,
    /// Consensus weight.
    pub lambda: f64,
    /// Restart period `K`.
    pub restart_k: u64,
    /// Number of restarts `T`.
    pub restart_t: u64,
    /// Pairs per stochastic Hamiltonian step.
    pub tau: usize,
    /// Iteration budget.
    pub iters: u64,
    /// Cost budget; the run stops once it is reached.
    pub max_samples: Option<u64>,
    pub seed: u64,
    pub recording: Recording,
    pub output: OutputOption,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, schedule: Schedule, iters: u64, seed: u64) -> Self {
        Self {
            algorithm,
            schedule,
            p: 0.01,
            lambda: 10.0,
            restart_k: 1000,
            restart_t: u64::MAX,
            tau: 1,
            iters,
            max_samples: None,
            seed,
            recording: Recording::Iterations(log_grid(iters, 200)),
            output: OutputOption::Last,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let lsvrhg = matches!(self.algorithm, Algorithm::Lsvrhg | Algorithm::LsvrhgRestart);
        if lsvrhg && !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(
                "p",
                format!("must lie in (0, 1], got {}", self.p),
            ));
        }
        if self.algorithm == Algorithm::Co && !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be >= 0, got {}", self.lambda),
            ));
        }
        if self.algorithm == Algorithm::LsvrhgRestart
            && (self.restart_k == 0 || self.restart_t == 0)
        {
            return Err(Error::invalid(
                "K/T",
                "restart period and count must be positive",
            ));
        }
        if self.tau == 0 || self.tau > n.saturating_mul(n) {
            return Err(Error::invalid(
                "tau",
                format!("must lie in 1..=n², got {}", self.tau),
            ));
        }
        if self.tau > 1 && self.algorithm != Algorithm::Shgd {
            return Err(Error::invalid("tau", "minibatches apply to shgd only"));
        }
        Ok(())
    }
}

/// What to measure at recorded iterates.
#[derive(Clone, Copy, Default)]
pub struct Monitor<'a> {
    pub x_star: Option<&'a Point>,
    /// Replaces `‖x − x*‖²` when set.
    pub distance: Option<&'a (dyn Fn(&[f64]) -> f64 + Sync)>,
}

impl<'a> Monitor<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_solution(x_star: &'a Point) -> Self {
        Self {
            x_star: Some(x_star),
            distance: None,
        }
    }

    pub fn with_distance(distance: &'a (dyn Fn(&[f64]) -> f64 + Sync)) -> Self {
        Self {
            x_star: None,
            distance: Some(distance),
        }
    }

    fn dist(&self, x: &[f64]) -> f64 {
        if let Some(f) = self.distance {
            f(x)
        } else if let Some(xs) = self.x_star {
            numerics::dist_sq(x, xs.as_slice())
        } else {
            f64::NAN
        }
    }
}

struct Recorder<'a> {
    game: &'a dyn Game,
    monitor: Monitor<'a>,
    grid: Vec<u64>,
    by_samples: bool,
    stride: u64,
    cursor: usize,
    records: Vec<TraceRecord>,
    xi: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn measure(&mut self, k: u64, samples: u64, x: &[f64], gamma: f64, diverged: bool) {
        if self
            .records
            .last()
            .is_some_and(|r| r.k == k && r.samples_seen == samples)
        {
            return;
        }
        self.game.xi_full_into(x, &mut self.xi);
        let h = 0.5 * numerics::norm_sq(&self.xi);
        self.records.push(TraceRecord {
            k,
            samples_seen: samples,
            dist: self.monitor.dist(x),
            h,
            gamma,
            diverged,
        });
    }

    /// Called after each iteration with the new state and the state it left.
    fn after_step(&mut self, k: u64, samples: u64, x: &[f64], prev: &State<'_>, gamma: f64) {
        let grid = &self.grid;
        if self.stride > 0 {
            if k.is_multiple_of(self.stride) {
                self.measure(k, samples, x, gamma, false);
            }
        } else if self.by_samples {
            let mut crossed = false;
            let mut cursor = self.cursor;
            while cursor < grid.len() && grid[cursor] < samples {
                crossed |= grid[cursor] >= prev.samples;
                cursor += 1;
            }
            let exact = cursor < grid.len() && grid[cursor] == samples;
            self.cursor = cursor + usize::from(exact);
            if crossed {
                self.measure(prev.k, prev.samples, prev.x, gamma, false);
            }
            if exact {
                self.measure(k, samples, x, gamma, false);
            }
        } else {
            while self.cursor < grid.len() && grid[self.cursor] < k {
                self.cursor += 1;
            }
            if self.cursor < grid.len() && grid[self.cursor] == k {
                self.cursor += 1;
                self.measure(k, samples, x, gamma, false);
            }
        }
    }
}

struct State<'s> {
    k: u64,
    samples: u64,
    x: &'s [f64],
}

/// Runs `cfg.algorithm` from `x0`. Streams: pairs from `SAMPLING`, snapshot coins
/// from `SNAPSHOT`, the Option-II index from `OUTPUT`.
pub fn run(game: &dyn Game, x0: &Point, cfg: &RunConfig, monitor: Monitor<'_>) -> Result<Trace> {
    check_point(game, x0)?;
    if let Some(xs) = monitor.x_star {
        check_point(game, xs)?;
    }
    let n = game.n();
    cfg.validate(n)?;
    let d = game.dim();

    let mut oracle = Hamiltonian::new(game);
    let mut sampling = RngStream::new(cfg.seed, streams::SAMPLING);
    let mut snapshot = RngStream::new(cfg.seed, streams::SNAPSHOT);
    let mut output_rng = RngStream::new(cfg.seed, streams::OUTPUT);

    let mut x = x0.as_slice().to_vec();
    let mut prev = x.clone();
    let mut g = vec![0.0; d];
    let mut aux = vec![0.0; d];
    let mut w = x.clone();
    let mut full_w = vec![0.0; d];
    let mut pair_w = vec![0.0; d];

    let mut rec = Recorder {
        game,
        monitor,
        grid: match &cfg.recording {
            Recording::Iterations(g) | Recording::Samples(g) => g.clone(),
            Recording::Every(_) => Vec::new(),
        },
        by_samples: matches!(cfg.recording, Recording::Samples(_)),
        stride: match cfg.recording {
            Recording::Every(s) => s.max(1),
            _ => 0,
        },
        cursor: 0,
        records: Vec::new(),
        xi: vec![0.0; d],
    };
    rec.measure(0, 0, &x, cfg.schedule.gamma_at(0), false);

    let restart = cfg.algorithm == Algorithm::LsvrhgRestart;
    let variance_reduced = matches!(cfg.algorithm, Algorithm::Lsvrhg | Algorithm::LsvrhgRestart);
    let total_iters = if restart {
        cfg.iters.min(cfg.restart_k.saturating_mul(cfg.restart_t))
    } else {
        cfg.iters
    };
    // the uniform output index is drawn up front; restarts draw one per round.
    let round_len = if restart { cfg.restart_k } else { total_iters };
    let mut pick = match cfg.output {
        OutputOption::UniformRandom if variance_reduced => {
            Some(output_rng.index(round_len as usize + 1) as u64)
        }
        _ => None,
    };
    let mut picked: Option<Vec<f64>> = None;
    let mut round_start = 0u64;

    if variance_reduced {
        oracle.grad_full_into(&w, &mut full_w);
    }

    let mut refreshes = 0u64;
    let mut flag = RunFlag::Ok;
    let mut k = 0u64;
    let mut gamma = cfg.schedule.gamma_at(0);

    while k < total_iters {
        if cfg.max_samples.is_some_and(|m| oracle.cost() >= m) {
            break;
        }
        if pick == Some(k - round_start) && picked.is_none() {
            picked = Some(x.clone());
        }
        if restart && k - round_start == cfg.restart_k {
            // next round starts from the chosen iterate of this one
            if let Some(xp) = picked.take() {
                x.copy_from_slice(&xp);
            }
            round_start = k;
            w.copy_from_slice(&x);
            oracle.grad_full_into(&w, &mut full_w);
            refreshes += 1;
            if cfg.output == OutputOption::UniformRandom {
                pick = Some(output_rng.index(round_len as usize + 1) as u64);
            }
            if pick == Some(0) {
                picked = Some(x.clone());
            }
        }

        prev.copy_from_slice(&x);
        let prev_samples = oracle.cost();
        gamma = cfg.schedule.gamma_at(k);

        match cfg.algorithm {
            Algorithm::Sgda => {
                let p = sample_pair(&mut sampling, n);
                oracle.xi_component_into(p.i, &x, &mut g);
            }
            Algorithm::Shgd if cfg.tau > 1 => {
                let batch = sample_minibatch(&mut sampling, n, cfg.tau)?;
                g.iter_mut().for_each(|v| *v = 0.0);
                let s = 1.0 / cfg.tau as f64;
                for &p in batch.pairs() {
                    oracle.grad_pair_into(p, &x, s, &mut g);
                }
            }
            Algorithm::Shgd => {
                let p = sample_pair(&mut sampling, n);
                g.iter_mut().for_each(|v| *v = 0.0);
                oracle.grad_pair_into(p, &x, 1.0, &mut g);
            }
            Algorithm::ShgdBiased => {
                let p = sample_pair(&mut sampling, n);
                g.iter_mut().for_each(|v| *v = 0.0);
                oracle.grad_biased_into(p, &x, 1.0, &mut g);
            }
            Algorithm::Co => {
                let p = sample_pair(&mut sampling, n);
                oracle.co_direction_into(p, &x, cfg.lambda, &mut g);
            }
            Algorithm::Lsvrhg | Algorithm::LsvrhgRestart => {
                let p = sample_pair(&mut sampling, n);
                pair_w.iter_mut().for_each(|v| *v = 0.0);
                oracle.grad_pair_into(p, &w, 1.0, &mut pair_w);
                for ((a, f), q) in aux.iter_mut().zip(&full_w).zip(&pair_w) {
                    *a = f - q;
                }
                g.iter_mut().for_each(|v| *v = 0.0);
                oracle.grad_pair_into(p, &x, 1.0, &mut g);
                for (gv, a) in g.iter_mut().zip(&aux) {
                    *gv += a;
                }
            }
            Algorithm::Hgd => oracle.grad_full_into(&x, &mut g),
        }

        let refresh = variance_reduced && snapshot.bernoulli(cfg.p);
        if refresh {
            w.copy_from_slice(&x);
        }
        numerics::axpy(-gamma, &g, &mut x);
        flush_tiny(&mut x);
        if refresh {
            oracle.grad_full_into(&w, &mut full_w);
            refreshes += 1;
        }
        k += 1;

        if !is_bounded(&x) {
            flag = RunFlag::Diverged;
            rec.measure(k, oracle.cost(), &x, gamma, true);
            break;
        }
        let before = State {
            k: k - 1,
            samples: prev_samples,
            x: &prev,
        };
        rec.after_step(k, oracle.cost(), &x, &before, gamma);
    }

    if flag == RunFlag::Ok {
        rec.measure(k, oracle.cost(), &x, gamma, false);
    }
    if pick == Some(k - round_start) && picked.is_none() {
        picked = Some(x.clone());
    }
    let output = match picked {
        Some(v) if flag == RunFlag::Ok => v,
        _ => x.clone(),
    };
    Ok(Trace {
        records: rec.records,
        flag,
        last: Point::from_flat(x, game.d1())?,
        output: Point::from_flat(output, game.d1())?,
        iterations: k,
        samples_seen: oracle.cost(),
        snapshot_refreshes: refreshes,
    })
}

/// Entries below this magnitude are set to zero after each step.
pub const FLUSH_BELOW: f64 = 1e-150;

/// Keeps iterates out of the subnormal range, where arithmetic is slow.
#[inline]
fn flush_tiny(x: &mut [f64]) {
    for v in x.iter_mut() {
        if v.abs() < FLUSH_BELOW {
            *v = 0.0;
        }
    }
}

fn is_bounded(x: &[f64]) -> bool {
    let s = numerics::norm_sq(x);
    s.is_finite() && s <= DIVERGENCE_NORM * DIVERGENCE_NORM
}

fn with_algorithm(cfg: &RunConfig, algorithm: Algorithm) -> RunConfig {
    RunConfig {
        algorithm,
        ..cfg.clone()
    }
}

pub fn run_sgda(
    game: &dyn Game,
    x0: &Point,
    cfg: &RunConfig,
    monitor: Monitor<'_>,
) -> Result<Trace> {
    run(game, x0, &with_algorithm(cfg, Algorithm::Sgda), monitor)
}

/// SHGD; `biased` selects `(J_i + J_j)ᵀ(ξ_i + ξ_j)`.
pub fn run_shgd(
    game: &dyn Game,
    x0: &Point,
    cfg: &RunConfig,
    biased: bool,
    monitor: Monitor<'_>,
) -> Result<Trace> {
    let algorithm = if biased {
        Algorithm::ShgdBiased
    } else {
        Algorithm::Shgd
    };
    run(game, x0, &with_algorithm(cfg, algorithm), monitor)
}

pub fn run_co(game: &dyn Game, x0: &Point, cfg: &RunConfig, monitor: Monitor<'_>) -> Result<Trace> {
    run(game, x0, &with_algorithm(cfg, Algorithm::Co), monitor)
}

pub fn run_lsvrhg(
    game: &dyn Game,
    x0: &Point,
    cfg: &RunConfig,
    monitor: Monitor<'_>,
) -> Result<Trace> {
    run(game, x0, &with_algorithm(cfg, Algorithm::Lsvrhg), monitor)
}

pub fn run_lsvrhg_restart(
    game: &dyn Game,
    x0: &Point,
    cfg: &RunConfig,
    monitor: Monitor<'_>,
) -> Result<Trace> {
    run(
        game,
        x0,
        &with_algorithm(cfg, Algorithm::LsvrhgRestart),
        monitor,
    )
}

pub fn run_hgd(
    game: &dyn Game,
    x0: &Point,
    cfg: &RunConfig,
    monitor: Monitor<'_>,
) -> Result<Trace> {
    run(game, x0, &with_algorithm(cfg, Algorithm::Hgd), monitor)
}
