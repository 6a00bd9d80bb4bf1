//! Named correctness and reproduction checks with measured values.

use std::path::Path;
use std::time::Instant;

use hamgrad_core::games::{
    validate_oracle, BilinearGame, BilinearSpec, Coupling, CouplingKind, Game, GanVariant,
    GaussianGanGame, Point, SuffBilinearGame,
};
use hamgrad_core::hamiltonian::{
    bilinear_constants, check_pl, check_unbiasedness, h_value, lmax_components, sampling_constants,
    second_moment_bounds as second_moment_report, sigma_sq, suff_bilinear_constants,
    SuffBilinearInputs,
};
use hamgrad_core::numerics::{self, streams, svd, symmetric_eigen, DenseMatrix, RngStream};
use hamgrad_core::optimizers::{
    convergence_bound, every, log_grid, run, Algorithm, BoundKind, Monitor, Recording, RunConfig,
    RunFlag, Schedule, TheoryConstants,
};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiment::{loglog_slope, parallel_map, run_experiment, GameInstance, Metric};
use crate::presets::preset;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.1}s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name: name.to_string(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn gaussian_point(game: &dyn Game, rng: &mut RngStream, scale: f64) -> Point {
    let v = (0..game.dim())
        .map(|_| scale * rng.standard_normal())
        .collect();
    Point::from_flat(v, game.d1()).expect("dimension matches the game")
}

/// Ten small dense games with `n` between 2 and 8.
fn small_bilinear_games() -> Result<Vec<BilinearGame>> {
    (0..10u64)
        .map(|s| {
            let n = 2 + (s as usize % 7);
            let (d1, d2) = if s % 3 == 0 { (3, 5) } else { (4, 4) };
            Ok(BilinearGame::random_dense(n, d1, d2, 100 + s)?)
        })
        .collect()
}

/// Ten small games whose pair Hamiltonians are all convex.
fn small_convex_pair_games() -> Result<Vec<BilinearGame>> {
    (0..10u64)
        .map(|s| {
            Ok(BilinearGame::random_shared_basis(
                2 + (s as usize % 7),
                4,
                200 + s,
            )?)
        })
        .collect()
}

fn small_suff_games() -> Result<Vec<SuffBilinearGame>> {
    let spec = |n, d, kind, seed| BilinearSpec {
        n,
        d,
        kind,
        interpolated: false,
        seed,
    };
    Ok(vec![
        SuffBilinearGame::generate(&spec(6, 6, CouplingKind::OneHot, 1), 7.0)?,
        SuffBilinearGame::generate(&spec(8, 5, CouplingKind::OneHot, 2), 7.0)?,
        SuffBilinearGame::generate(&spec(5, 4, CouplingKind::Spd, 3), 1.0)?,
    ])
}

/// Largest gap between the enumerated mean of the pair estimator and `∇H`.
pub fn estimator_unbiasedness() -> Check {
    timed("estimator unbiasedness", || {
        let mut games: Vec<Box<dyn Game>> = Vec::new();
        games.extend(
            small_bilinear_games()?
                .into_iter()
                .map(|g| Box::new(g) as Box<dyn Game>),
        );
        games.extend(
            small_suff_games()?
                .into_iter()
                .map(|g| Box::new(g) as Box<dyn Game>),
        );
        let mut rng = RngStream::new(1, streams::PROBE);
        let mut worst: f64 = 0.0;
        for g in &games {
            for _ in 0..50 {
                let x = gaussian_point(g.as_ref(), &mut rng, 2.0);
                worst = worst.max(check_unbiasedness(g.as_ref(), &x)?);
            }
        }
        Ok((
            worst <= 1e-12,
            format!(
                "max relative residual {worst:.3e} over {} games",
                games.len()
            ),
        ))
    })
}

/// `H` against its closed quadratic form and the extreme eigenvalues of `Q`.
pub fn bilinear_quadratic_form() -> Check {
    timed("bilinear quadratic form", || {
        let mut rng = RngStream::new(2, streams::PROBE);
        let (mut value_gap, mut eig_gap): (f64, f64) = (0.0, 0.0);
        for g in small_bilinear_games()? {
            let c = bilinear_constants(&g)?;
            for _ in 0..100 {
                let x = gaussian_point(&g, &mut rng, 2.0);
                let h = h_value(&g, &x)?;
                value_gap = value_gap.max(
                    (h - c.quadratic_value(x.as_slice())).abs() / h.abs().max(f64::MIN_POSITIVE),
                );
            }
            let eig = symmetric_eigen(&c.q)?.values;
            let lmax = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lmin = eig
                .iter()
                .cloned()
                .filter(|v| *v > 1e-10 * lmax)
                .fold(f64::INFINITY, f64::min);
            let s = svd(g.mean_coupling()).s;
            let smax = s[0];
            let smin = s
                .iter()
                .cloned()
                .filter(|v| *v > 1e-10 * smax)
                .fold(f64::INFINITY, f64::min);
            eig_gap = eig_gap.max((lmax / (smax * smax) - 1.0).abs());
            eig_gap = eig_gap.max((lmin / (smin * smin) - 1.0).abs());
        }
        Ok((
            value_gap <= 1e-10 && eig_gap <= 1e-8,
            format!("value gap {value_gap:.3e}, eigenvalue gap {eig_gap:.3e}"),
        ))
    })
}

/// Deterministic HGD contraction of `‖x − x*‖²` against `1 − γμ_H`.
pub fn hgd_contraction() -> Check {
    timed("deterministic HGD contraction", || {
        let d = 10;
        let s: Vec<f64> = (0..d)
            .map(|m| 10f64.powf(-1.0 + m as f64 / (d - 1) as f64))
            .collect();
        let a = Coupling::Dense(DenseMatrix::from_diag(&s));
        let game = BilinearGame::new(vec![a], vec![vec![0.3; d]], vec![vec![-0.2; d]])?;
        let c = bilinear_constants(&game)?;
        let gamma = 0.5 / c.l_h;
        let xs = game.solution()?;
        let mut rng = RngStream::new(1, streams::INIT);
        let x0 = gaussian_point(&game, &mut rng, 1.0);
        let iters = 1000;
        let mut cfg = RunConfig::new(Algorithm::Hgd, Schedule::constant(gamma)?, iters, 0);
        cfg.recording = Recording::Iterations(every(1, iters));
        let t = run(&game, &x0, &cfg, Monitor::with_solution(&xs))?;
        let n = t.records.len();
        let ratio = t.records[n - 1].dist / t.records[n - 2].dist;
        let expect = 1.0 - gamma * c.mu_h;
        let rel = (ratio / expect - 1.0).abs();
        Ok((
            rel <= 0.01,
            format!("ratio {ratio:.6} vs {expect:.6} (rel {rel:.2e})"),
        ))
    })
}

struct SeedRuns {
    grid: Vec<u64>,
    mean: Vec<f64>,
    mean_initial: f64,
}

/// Mean absolute `‖x^k − x*‖²` over `seeds` runs on the reference bilinear game.
fn bilinear_mean_distance(
    schedule: &Schedule,
    seeds: u64,
    iters: u64,
    points: usize,
) -> Result<SeedRuns> {
    let instance = GameInstance::Bilinear(BilinearGame::standard(1)?);
    let xs = instance
        .solution()?
        .expect("bilinear games have a solution");
    let grid = log_grid(iters, points);
    let seeds: Vec<u64> = (1..=seeds).collect();
    let traces = parallel_map(&seeds, |_, &seed| {
        let x0 = instance.initial_point(seed);
        let mut cfg = RunConfig::new(Algorithm::Shgd, schedule.clone(), iters, seed);
        cfg.recording = Recording::Iterations(grid.clone());
        run(instance.game(), &x0, &cfg, Monitor::with_solution(&xs))
    })
    .into_iter()
    .collect::<hamgrad_core::Result<Vec<_>>>()?;
    let m = traces.len() as f64;
    let mean = (0..grid.len())
        .map(|c| traces.iter().map(|t| t.records[c].dist).sum::<f64>() / m)
        .collect();
    let mean_initial = traces.iter().map(|t| t.records[0].dist).sum::<f64>() / m;
    Ok(SeedRuns {
        grid,
        mean,
        mean_initial,
    })
}

/// Constant-step SHGD against the linear-rate-plus-neighbourhood bound.
pub fn constant_step_envelope() -> Check {
    timed("constant-step SHGD envelope", || {
        let game = BilinearGame::standard(1)?;
        let c = bilinear_constants(&game)?;
        let l_max = lmax_components(&game)?;
        let s = sampling_constants(c.l_h, l_max, game.n(), 1)?;
        let sigma = sigma_sq(&game, &game.solution()?, 1)?;
        let gamma = 0.5 / l_max;
        let theory = TheoryConstants {
            mu: c.mu_h,
            l_h: c.l_h,
            l_es: s.l_es,
            rho: s.rho_er,
            sigma_sq: sigma,
            gamma,
        };
        let runs = bilinear_mean_distance(&Schedule::constant(gamma)?, 30, 1_000_000, 60)?;
        let mut worst: f64 = 0.0;
        for (c_idx, &k) in runs.grid.iter().enumerate() {
            let bound = convergence_bound(BoundKind::QscConstant, &theory, k, runs.mean_initial)
                .value()
                .unwrap_or(f64::NAN);
            worst = worst.max(runs.mean[c_idx] / bound);
        }
        let neighbourhood = 2.0 * gamma * sigma / c.mu_h;
        let plateau = *runs.mean.last().expect("grid is nonempty");
        let frac = plateau / neighbourhood;
        Ok((
            worst <= 1.1 && (0.05..=4.0).contains(&frac),
            format!("max mean/bound {worst:.3}, plateau {plateau:.3} = {frac:.3} x 2γσ²/μ ({neighbourhood:.1})"),
        ))
    })
}

/// Slope of the mean distance under the theory switching schedule.
pub fn switching_sublinear_rate() -> Check {
    timed("switching-step SHGD sublinear rate", || {
        let game = BilinearGame::standard(1)?;
        let c = bilinear_constants(&game)?;
        let s = sampling_constants(c.l_h, lmax_components(&game)?, game.n(), 1)?;
        let schedule = Schedule::switching_qsc(s.l_es, c.mu_h)?;
        let iters = 1_000_000;
        let runs = bilinear_mean_distance(&schedule, 10, iters, 80)?;
        let slope = loglog_slope(&runs.grid, &runs.mean, iters / 10, iters).unwrap_or(f64::NAN);
        Ok((
            (-1.4..=-0.7).contains(&slope),
            format!("slope {slope:.3} over k in [{}, {iters}]", iters / 10),
        ))
    })
}

fn restrict(mut cfg: ExperimentConfig, labels: &[&str], max_samples: u64) -> ExperimentConfig {
    cfg.runs.retain(|r| labels.contains(&r.label.as_str()));
    cfg.max_samples = max_samples;
    cfg
}

/// Qualitative shape of the tuned bilinear comparison.
pub fn bilinear_figure() -> Check {
    timed("bilinear figure shape", || {
        let cfg = restrict(
            preset("fig1-bilinear").expect("preset exists"),
            &["sgda", "shgd-constant", "lsvrhg"],
            2_000_000,
        );
        let res = run_experiment(&cfg)?;
        let sgda_ok = res.traces_of("sgda").all(|t| {
            t.flag == RunFlag::Diverged
                && t.rows
                    .iter()
                    .any(|r| r.samples_seen <= 1_000_000 && r.dist_sq_rel >= 10.0)
        });
        let shgd = res
            .summary("shgd-constant", Metric::Distance)
            .expect("summary exists");
        let shgd_final = *shgd.mean.last().expect("nonempty");
        let lsvrhg = res
            .summary("lsvrhg", Metric::Distance)
            .expect("summary exists");
        let lsvrhg_final = *lsvrhg.mean.last().expect("nonempty");
        Ok((
            sgda_ok && shgd_final > 1e-6 && lsvrhg_final <= 1e-10,
            format!(
                "SGDA diverged in every seed: {sgda_ok}; SHGD final {shgd_final:.3e}; L-SVRHG at 2e6 samples {lsvrhg_final:.3e}"
            ),
        ))
    })
}

/// Mean cost per iteration against the per-method cost table.
pub fn cost_law() -> Check {
    timed("cost per iteration", || {
        let game = BilinearGame::standard(1)?;
        let mut rng = RngStream::new(7, streams::INIT);
        let x0 = gaussian_point(&game, &mut rng, 1.0);
        let iters = 100_000;
        let algos = [
            Algorithm::Sgda,
            Algorithm::Shgd,
            Algorithm::ShgdBiased,
            Algorithm::Co,
            Algorithm::Lsvrhg,
        ];
        let results = parallel_map(&algos, |_, &a| {
            let mut cfg = RunConfig::new(a, Schedule::constant(1e-3)?, iters, 1);
            cfg.recording = Recording::Iterations(vec![0]);
            let t = run(&game, &x0, &cfg, Monitor::none())?;
            Ok::<_, hamgrad_core::Error>((a, t.samples_seen as f64 / t.iterations as f64))
        });
        let mut pass = true;
        let mut parts = Vec::new();
        for r in results {
            let (a, cost) = r?;
            let expect = a.expected_cost(game.n(), 0.01, 1);
            pass &= (cost / expect - 1.0).abs() <= 0.05;
            parts.push(format!("{a} {cost:.3}/{expect}"));
        }
        Ok((pass, parts.join(", ")))
    })
}

/// The margin condition and a sampled PL check on the sufficiently-bilinear game.
pub fn suff_bilinear_condition() -> Check {
    timed("sufficiently-bilinear condition", || {
        let holds7 =
            suff_bilinear_constants(&SuffBilinearInputs::plain(7.0, 3.0))?.condition_holds();
        let holds5 =
            suff_bilinear_constants(&SuffBilinearInputs::plain(5.0, 3.0))?.condition_holds();
        let game = SuffBilinearGame::standard(1, 7.0)?;
        let mu = suff_bilinear_constants(&SuffBilinearInputs::for_game(&game)?)?.mu_h;
        let mut rng = RngStream::new(8, streams::PROBE);
        let xs = game.solution()?;
        let points: Vec<Point> = (0..1000)
            .map(|m| {
                let scale = 10f64.powf(-2.0 + 3.0 * (m % 10) as f64 / 9.0);
                let mut p = gaussian_point(&game, &mut rng, scale);
                numerics::axpy(1.0, xs.as_slice(), p.as_mut_slice());
                p
            })
            .collect();
        let report = check_pl(&game, mu, &points)?;
        Ok((
            holds7 && !holds5 && report.min_ratio > 0.0,
            format!(
                "margin(7,3) > 0: {holds7}, margin(5,3) > 0: {holds5}, min PL ratio {:.3e} (mu_H {mu:.3e}) over {} points",
                report.min_ratio, report.evaluated
            ),
        ))
    })
}

/// Qualitative shape of the tuned sufficiently-bilinear comparison.
pub fn suff_bilinear_figure() -> Check {
    timed("sufficiently-bilinear figure shape", || {
        let budget = 2_000_000;
        let cfg = restrict(
            preset("fig1-suff-bilinear").expect("preset exists"),
            &["lsvrhg-restart", "shgd-decreasing"],
            budget,
        );
        let res = run_experiment(&cfg)?;
        let restart = res
            .summary("lsvrhg-restart", Metric::Hamiltonian)
            .expect("summary exists");
        let restart_final = *restart.mean.last().expect("nonempty");
        let dec = res
            .summary("shgd-decreasing", Metric::Hamiltonian)
            .expect("summary exists");
        let slope =
            loglog_slope(&dec.checkpoints, &dec.mean, budget / 10, budget).unwrap_or(f64::NAN);
        Ok((
            restart_final <= 1e-8 && (-1.4..=-0.7).contains(&slope),
            format!("restart H/H0 at 2e6 samples {restart_final:.3e}; decreasing-step SHGD slope {slope:.3}"),
        ))
    })
}

/// Linear convergence to the exact solution when every component shares it.
pub fn interpolated_linear_rate() -> Check {
    timed("interpolated linear convergence", || {
        let mut cfg = restrict(
            preset("interpolated").expect("preset exists"),
            &["shgd-constant"],
            2_000_000,
        );
        cfg.seeds = 3;
        let instance = GameInstance::build(&cfg.game, cfg.game_seed())?;
        let xs = instance
            .solution()?
            .expect("bilinear games have a solution");
        let sigma = sigma_sq(instance.game(), &xs, 1)?;
        let res = run_experiment(&cfg)?;
        let worst = res
            .traces_of("shgd-constant")
            .map(|t| t.final_row().dist_sq_rel)
            .fold(0.0, f64::max);
        Ok((
            sigma == 0.0 && worst <= 1e-12,
            format!("sigma² = {sigma:e}; worst final relative distance {worst:.3e}"),
        ))
    })
}

/// Oracle accuracy and stationarity on the GAN games, and the WGAN method comparison.
pub fn gan_properties(with_runs: bool) -> Check {
    timed("Gaussian GAN properties", || {
        let mut rng = RngStream::new(11, streams::PROBE);
        let mut oracle_err: f64 = 0.0;
        for v in [GanVariant::Wgan, GanVariant::SatGan, GanVariant::NsGan] {
            let g = GaussianGanGame::new(v, 10_000, 100, 1)?;
            oracle_err = oracle_err.max(validate_oracle(&g, 20, &mut rng)?.max());
        }
        let wgan = GaussianGanGame::new(GanVariant::Wgan, 10_000, 100, 1)?;
        let h_star = h_value(&wgan, &wgan.moment_matched_point())?;
        let mut pass = oracle_err <= 1e-5 && h_star <= 1e-20;
        let mut detail = format!("oracle error {oracle_err:.2e}; H at moment match {h_star:.2e}");
        if with_runs {
            let cfg = restrict(
                preset("gan-wgan").expect("preset exists"),
                &["lsvrhg", "sgda"],
                1_000_000,
            );
            let res = run_experiment(&cfg)?;
            let lsvrhg = res
                .traces_of("lsvrhg")
                .filter(|t| t.final_row().h_rel <= 1e-2)
                .count();
            let sgda = res
                .traces_of("sgda")
                .filter(|t| t.final_row().dist_sq_rel >= 0.5)
                .count();
            pass &= lsvrhg >= 7 && sgda >= 7;
            detail.push_str(&format!(
                "; L-SVRHG H/H0 <= 1e-2 in {lsvrhg}/10 seeds; SGDA distance >= 0.5 in {sgda}/10 seeds"
            ));
        }
        Ok((pass, detail))
    })
}

/// Both second-moment bounds by enumeration.
pub fn second_moment_bounds() -> Check {
    timed("stochastic-gradient second-moment bounds", || {
        let mut rng = RngStream::new(12, streams::PROBE);
        let mut worst: f64 = 0.0;
        let mut pass = true;
        for g in small_convex_pair_games()? {
            let l_max = lmax_components(&g)?;
            let sigma = sigma_sq(&g, &g.solution()?, 1)?;
            for _ in 0..50 {
                let x = gaussian_point(&g, &mut rng, 2.0);
                let r = second_moment_report(&g, &x, l_max, sigma)?;
                pass &= r.holds();
                worst = worst.max(r.second_moment / r.es_bound.min(r.er_bound));
            }
        }
        Ok((pass, format!("max second moment / bound {worst:.4}")))
    })
}

/// Runs `fig1-bilinear` twice into `dir` and compares every output file byte for byte.
pub fn determinism(dir: &Path) -> Check {
    timed("end-to-end determinism", || {
        let cfg = preset("fig1-bilinear").expect("preset exists");
        let a = dir.join("first");
        let b = dir.join("second");
        for out in [&a, &b] {
            let res = run_experiment(&cfg)?;
            crate::app::write_outputs(&res, out)?;
        }
        let mut same = true;
        let mut files = Vec::new();
        for name in crate::app::OUTPUT_FILES {
            let x =
                std::fs::read(a.join(name)).map_err(|e| crate::CliError::io(a.join(name), e))?;
            let y =
                std::fs::read(b.join(name)).map_err(|e| crate::CliError::io(b.join(name), e))?;
            same &= x == y;
            files.push(format!("{name} {} bytes", x.len()));
        }
        Ok((same, files.join(", ")))
    })
}

const FD_STEP: f64 = 1e-5;

/// Largest gap between the `x2` block of `ξ_i` and `−∇_{x2} g_i` from central differences.
pub fn sign_convention_error(game: &dyn Game, trials: usize, rng: &mut RngStream) -> f64 {
    let (d1, d) = (game.d1(), game.dim());
    let mut xi = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let i = rng.index(game.n());
        let x: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        game.xi_into(i, &x, &mut xi);
        let mut probe = x.clone();
        for k in d1..d {
            probe[k] = x[k] + FD_STEP;
            let p = game.player_losses(i, &probe);
            probe[k] = x[k] - FD_STEP;
            let m = game.player_losses(i, &probe);
            probe[k] = x[k];
            let target = if game.is_zero_sum() {
                -(p.0 - m.0) / (2.0 * FD_STEP)
            } else {
                (p.1 - m.1) / (2.0 * FD_STEP)
            };
            worst = worst.max((xi[k] - target).abs() / (1.0 + target.abs()));
        }
    }
    worst
}

pub fn sign_convention(game: &dyn Game) -> Check {
    timed(&format!("sign convention ({})", game.label()), || {
        let mut rng = RngStream::new(13, streams::PROBE);
        let err = sign_convention_error(game, 10, &mut rng);
        Ok((err <= 1e-5, format!("max relative error {err:.2e}")))
    })
}

/// Sign convention on one instance of every game family.
pub fn sign_conventions() -> Result<Vec<Check>> {
    let spec = BilinearSpec {
        n: 6,
        d: 5,
        kind: CouplingKind::Spd,
        interpolated: false,
        seed: 1,
    };
    let games: Vec<Box<dyn Game>> = vec![
        Box::new(BilinearGame::random_dense(4, 3, 5, 1)?),
        Box::new(BilinearGame::generate(&spec)?),
        Box::new(SuffBilinearGame::standard(1, 7.0)?),
        Box::new(GaussianGanGame::new(GanVariant::Wgan, 1000, 100, 1)?),
        Box::new(GaussianGanGame::new(GanVariant::SatGan, 1000, 100, 1)?),
        Box::new(GaussianGanGame::new(GanVariant::NsGan, 1000, 100, 1)?),
    ];
    Ok(games.iter().map(|g| sign_convention(g.as_ref())).collect())
}
