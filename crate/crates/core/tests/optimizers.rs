use hamgrad_core::games::{
    BilinearGame, BilinearSpec, Coupling, CouplingKind, Game, Point, SuffBilinearGame,
};
use hamgrad_core::hamiltonian::{bilinear_constants, grad_h_full};
use hamgrad_core::numerics::{self, streams, DenseMatrix, RngStream};
use hamgrad_core::optimizers::{
    every, run, run_co, run_hgd, run_lsvrhg, run_lsvrhg_restart, run_sgda, run_shgd, Algorithm,
    Monitor, OutputOption, Recording, RunConfig, RunFlag, Schedule,
};

fn unit_game() -> BilinearGame {
    let a = vec![Coupling::Dense(DenseMatrix::identity(1))];
    BilinearGame::new(a, vec![vec![0.0]], vec![vec![0.0]]).unwrap()
}

fn config(algorithm: Algorithm, gamma: f64, iters: u64, seed: u64) -> RunConfig {
    RunConfig::new(algorithm, Schedule::constant(gamma).unwrap(), iters, seed)
}

fn gaussian_point(game: &dyn Game, seed: u64) -> Point {
    let mut rng = RngStream::new(seed, streams::INIT);
    let v = (0..game.dim()).map(|_| rng.standard_normal()).collect();
    Point::from_flat(v, game.d1()).unwrap()
}

#[test]
fn interpolated_solution_is_a_fixed_point_for_every_algorithm() {
    let spec = BilinearSpec {
        n: 5,
        d: 4,
        kind: CouplingKind::Spd,
        interpolated: true,
        seed: 3,
    };
    let game = BilinearGame::generate(&spec).unwrap();
    let xs = game.solution().unwrap();
    for algo in Algorithm::ALL {
        let mut cfg = config(algo, 0.3, 500, 1);
        cfg.p = 0.2;
        cfg.restart_k = 50;
        let t = run(&game, &xs, &cfg, Monitor::with_solution(&xs)).unwrap();
        assert_eq!(t.last, xs, "{algo}");
        assert!(t.records.iter().all(|r| r.dist == 0.0), "{algo}");
    }
}

#[test]
fn sgda_rotation_grows_by_exact_factor() {
    let game = unit_game();
    let x0 = Point::new(&[1.0], &[1.0]).unwrap();
    let mut cfg = config(Algorithm::Sgda, 0.1, 50, 0);
    cfg.recording = Recording::Iterations(every(1, 50));
    let t = run_sgda(&game, &x0, &cfg, Monitor::none()).unwrap();
    let growth = (1.0f64 + 0.01).sqrt();
    for w in t.records.windows(2) {
        let ratio = (w[1].h / w[0].h).sqrt();
        assert!((ratio - growth).abs() < 1e-12);
    }
    assert_eq!(t.samples_seen, 50);
}

#[test]
fn co_with_zero_weight_matches_sgda() {
    let game = BilinearGame::standard(4).unwrap();
    let x0 = gaussian_point(&game, 4);
    let mut cfg = config(Algorithm::Co, 0.05, 2000, 9);
    cfg.lambda = 0.0;
    let co = run_co(&game, &x0, &cfg, Monitor::none()).unwrap();
    let sgda = run_sgda(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert_eq!(co.last, sgda.last);
}

#[test]
fn co_contracts_where_sgda_expands() {
    let game = unit_game();
    let x0 = Point::new(&[1.0], &[1.0]).unwrap();
    let mut cfg = config(Algorithm::Co, 0.01, 1000, 0);
    cfg.lambda = 10.0;
    let co = run_co(&game, &x0, &cfg, Monitor::none()).unwrap();
    let sgda = run_sgda(&game, &x0, &cfg, Monitor::none()).unwrap();
    let n0 = numerics::norm(x0.as_slice());
    assert!(numerics::norm(co.last.as_slice()) < n0);
    assert!(numerics::norm(sgda.last.as_slice()) > n0);
}

#[test]
fn single_component_reduces_to_deterministic_hgd() {
    let game = BilinearGame::random_dense(1, 6, 5, 21).unwrap();
    let x0 = gaussian_point(&game, 2);
    let c = bilinear_constants(&game).unwrap();
    let schedule = Schedule::switching(0.5 / c.l_h, 1.0, 30).unwrap();
    let mut cfg = RunConfig::new(Algorithm::Hgd, schedule, 300, 5);
    cfg.p = 0.3;
    let hgd = run_hgd(&game, &x0, &cfg, Monitor::none()).unwrap();
    let shgd = run_shgd(&game, &x0, &cfg, false, Monitor::none()).unwrap();
    let vr = run_lsvrhg(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert_eq!(shgd.last, hgd.last);
    assert_eq!(vr.last, hgd.last);

    // and HGD itself is x ← x − γ∇H with the uncharged full gradient
    let mut x = x0.clone();
    for k in 0..300 {
        let g = grad_h_full(&game, &x).unwrap();
        numerics::axpy(-cfg.schedule.gamma_at(k), &g, x.as_mut_slice());
    }
    assert_eq!(x, hgd.last);
}

#[test]
fn hgd_contraction_matches_closed_form() {
    // single component with singular values spread over [0.1, 1]
    let d = 10;
    let s: Vec<f64> = (0..d)
        .map(|m| 10f64.powf(-1.0 + m as f64 / (d - 1) as f64))
        .collect();
    let a = Coupling::Dense(DenseMatrix::from_diag(&s));
    let game = BilinearGame::new(vec![a], vec![vec![0.3; d]], vec![vec![-0.2; d]]).unwrap();
    let c = bilinear_constants(&game).unwrap();
    let gamma = 0.5 / c.l_h;
    let xs = game.solution().unwrap();
    let x0 = gaussian_point(&game, 1);
    let mut cfg = config(Algorithm::Hgd, gamma, 1000, 0);
    cfg.recording = Recording::Iterations(every(1, 1000));
    let t = run_hgd(&game, &x0, &cfg, Monitor::with_solution(&xs)).unwrap();
    let last = &t.records[t.records.len() - 2..];
    let ratio = last[1].dist / last[0].dist;
    let expect = 1.0 - gamma * c.mu_h;
    assert!((ratio / expect - 1.0).abs() < 0.01, "{ratio} vs {expect}");
}

#[test]
fn mean_cost_per_iteration_follows_cost_table() {
    let game = BilinearGame::standard(1).unwrap();
    let x0 = gaussian_point(&game, 1);
    for (algo, expect) in [
        (Algorithm::Sgda, 1.0),
        (Algorithm::Shgd, 2.0),
        (Algorithm::ShgdBiased, 2.0),
        (Algorithm::Co, 2.0),
        (Algorithm::Lsvrhg, 6.0),
    ] {
        let cfg = config(algo, 1e-3, 20_000, 2);
        let t = run(&game, &x0, &cfg, Monitor::none()).unwrap();
        let m = t.mean_cost_per_iteration();
        assert!((m / expect - 1.0).abs() < 0.05, "{algo}: {m}");
    }
}

#[test]
fn lsvrhg_cost_is_exact() {
    let game = BilinearGame::random_dense(7, 3, 3, 1).unwrap();
    let x0 = gaussian_point(&game, 1);
    let mut cfg = config(Algorithm::Lsvrhg, 0.01, 777, 3);
    cfg.p = 0.1;
    let t = run_lsvrhg(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert!(t.snapshot_refreshes > 0);
    assert_eq!(t.samples_seen, 14 + 4 * 777 + 14 * t.snapshot_refreshes);
    assert!(t
        .records
        .windows(2)
        .all(|w| w[0].samples_seen < w[1].samples_seen));
}

#[test]
fn restart_with_one_round_equals_option_two() {
    let game = SuffBilinearGame::standard(2, 7.0).unwrap();
    let x0 = gaussian_point(&game, 2);
    let mut cfg = config(Algorithm::LsvrhgRestart, 0.05, 400, 8);
    cfg.restart_k = 400;
    cfg.restart_t = 1;
    cfg.output = OutputOption::UniformRandom;
    let restarted = run_lsvrhg_restart(&game, &x0, &cfg, Monitor::none()).unwrap();
    let plain = run_lsvrhg(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert_eq!(restarted.output, plain.output);
    assert_eq!(restarted.samples_seen, plain.samples_seen);
}

#[test]
fn restart_charges_a_full_gradient_per_round() {
    let game = BilinearGame::random_dense(5, 3, 3, 4).unwrap();
    let x0 = gaussian_point(&game, 3);
    let mut cfg = config(Algorithm::LsvrhgRestart, 0.01, u64::MAX, 8);
    cfg.restart_k = 10;
    cfg.restart_t = 6;
    cfg.p = 1e-9;
    cfg.output = OutputOption::UniformRandom;
    let t = run_lsvrhg_restart(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert_eq!(t.iterations, 60);
    assert_eq!(t.snapshot_refreshes, 5);
    assert_eq!(t.samples_seen, 6 * 10 + 60 * 4);
}

#[test]
fn reruns_are_bit_identical() {
    let game = SuffBilinearGame::standard(1, 7.0).unwrap();
    let x0 = gaussian_point(&game, 1);
    let mut cfg = config(Algorithm::LsvrhgRestart, 0.1, 3000, 11);
    cfg.restart_k = 1000;
    cfg.output = OutputOption::UniformRandom;
    let a = run(&game, &x0, &cfg, Monitor::none()).unwrap();
    let b = run(&game, &x0, &cfg, Monitor::none()).unwrap();
    assert_eq!(format!("{:?}", a.records), format!("{:?}", b.records));
    assert_eq!(a.output, b.output);
}

#[test]
fn sgda_on_standard_game_is_flagged_diverged() {
    let game = BilinearGame::standard(1).unwrap();
    let xs = game.solution().unwrap();
    let x0 = gaussian_point(&game, 1);
    let cfg = config(Algorithm::Sgda, 0.5, 1_000_000, 1);
    let t = run_sgda(&game, &x0, &cfg, Monitor::with_solution(&xs)).unwrap();
    assert_eq!(t.flag, RunFlag::Diverged);
    assert!(t.final_record().diverged);
    assert!(t.iterations < 1_000_000);
}

#[test]
fn sample_grid_records_last_iterate_within_each_checkpoint() {
    let game = BilinearGame::random_dense(10, 3, 3, 2).unwrap();
    let x0 = gaussian_point(&game, 4);
    let mut cfg = config(Algorithm::Lsvrhg, 0.01, 2000, 1);
    cfg.p = 0.05;
    let grid = every(100, 10_000);
    cfg.recording = Recording::Samples(grid.clone());
    let t = run(&game, &x0, &cfg, Monitor::none()).unwrap();
    // every checkpoint below the final cost is covered by a record at or below it,
    // and the next iterate lies past it
    for &s in grid.iter().filter(|&&s| s <= t.samples_seen) {
        let pos = t.records.iter().rposition(|r| r.samples_seen <= s).unwrap();
        if let Some(next) = t.records.get(pos + 1) {
            assert!(next.samples_seen > s);
        }
    }
    assert_eq!(t.records[0].samples_seen, 0);
}

#[test]
fn invalid_configs_are_rejected() {
    let game = unit_game();
    let x0 = Point::new(&[1.0], &[1.0]).unwrap();
    let mut cfg = config(Algorithm::Lsvrhg, 0.1, 10, 0);
    cfg.p = 0.0;
    assert!(run(&game, &x0, &cfg, Monitor::none()).is_err());
    let mut cfg = config(Algorithm::Co, 0.1, 10, 0);
    cfg.lambda = -1.0;
    assert!(run(&game, &x0, &cfg, Monitor::none()).is_err());
    let mut cfg = config(Algorithm::LsvrhgRestart, 0.1, 10, 0);
    cfg.restart_k = 0;
    assert!(run(&game, &x0, &cfg, Monitor::none()).is_err());
    let bad = Point::new(&[1.0, 2.0], &[1.0]).unwrap();
    assert!(run(
        &game,
        &bad,
        &config(Algorithm::Shgd, 0.1, 10, 0),
        Monitor::none()
    )
    .is_err());
    assert!("adam".parse::<Algorithm>().is_err());
    assert_eq!(
        "lsvrhg-restart".parse::<Algorithm>().unwrap(),
        Algorithm::LsvrhgRestart
    );
}
