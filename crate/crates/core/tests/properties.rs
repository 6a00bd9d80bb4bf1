use hamgrad_core::games::{xi_full, BilinearGame, Game, Point};
use hamgrad_core::hamiltonian::{check_unbiasedness, h_value, Hamiltonian, PairIndex};
use hamgrad_core::numerics::{self, streams, svd, symmetric_eigen, DenseMatrix, RngStream};
use hamgrad_core::optimizers::{
    decreasing_step, log_grid, run, Algorithm, Monitor, Recording, RunConfig, Schedule,
};
use proptest::prelude::*;

fn point(game: &dyn Game, seed: u64) -> Point {
    let mut rng = RngStream::new(seed, streams::PROBE);
    let v = (0..game.dim())
        .map(|_| 2.0 * rng.standard_normal())
        .collect();
    Point::from_flat(v, game.d1()).unwrap()
}

fn small_game() -> impl Strategy<Value = BilinearGame> {
    (1usize..6, 1usize..5, 1usize..5, any::<u64>())
        .prop_map(|(n, d1, d2, seed)| BilinearGame::random_dense(n, d1, d2, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_estimator_is_unbiased(game in small_game(), seed in any::<u64>()) {
        let x = point(&game, seed);
        prop_assert!(check_unbiasedness(&game, &x).unwrap() <= 1e-12);
    }

    #[test]
    fn hamiltonian_is_half_squared_field(game in small_game(), seed in any::<u64>()) {
        let x = point(&game, seed);
        let h = h_value(&game, &x).unwrap();
        let xi = xi_full(&game, &x).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!((h - 0.5 * numerics::norm_sq(&xi)).abs() <= 1e-12 * (1.0 + h));
    }

    #[test]
    fn pair_estimator_is_symmetric(game in small_game(), seed in any::<u64>(), i in 0usize..6, j in 0usize..6) {
        let n = game.n();
        let (i, j) = (i % n, j % n);
        let x = point(&game, seed);
        let mut h = Hamiltonian::new(&game);
        let a = h.grad_pair(PairIndex::new(i, j), &x).unwrap();
        let b = h.grad_pair(PairIndex::new(j, i), &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn log_grid_is_strictly_increasing(max in 1u64..10_000_000, points in 2usize..300) {
        let g = log_grid(max, points);
        prop_assert_eq!(g[0], 0);
        prop_assert_eq!(*g.last().unwrap(), max);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn decreasing_step_decreases(k in 0u64..1_000_000_000, mu in 1e-6f64..10.0) {
        prop_assert!(decreasing_step(k + 1, mu) < decreasing_step(k, mu));
    }

    #[test]
    fn samples_seen_never_decreases(game in small_game(), seed in any::<u64>(), algo in 0usize..6) {
        let algorithm = [
            Algorithm::Sgda,
            Algorithm::Shgd,
            Algorithm::ShgdBiased,
            Algorithm::Co,
            Algorithm::Lsvrhg,
            Algorithm::LsvrhgRestart,
        ][algo];
        let mut cfg = RunConfig::new(algorithm, Schedule::constant(1e-3).unwrap(), 200, seed);
        cfg.p = 0.2;
        cfg.restart_k = 50;
        cfg.recording = Recording::Every(7);
        let t = run(&game, &point(&game, seed), &cfg, Monitor::none()).unwrap();
        prop_assert_eq!(t.records[0].k, 0);
        prop_assert!(t.records.windows(2).all(|w| w[0].samples_seen <= w[1].samples_seen && w[0].k <= w[1].k));
        prop_assert!(t.records.iter().all(|r| r.h >= 0.0));
    }
}

fn to_nalgebra(m: &DenseMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |r, c| m.get(r, c))
}

#[test]
fn singular_values_agree_with_nalgebra() {
    let mut rng = RngStream::new(3, streams::PROBE);
    for (rows, cols) in [(1, 1), (3, 3), (5, 2), (2, 7), (12, 12)] {
        let m = DenseMatrix::from_fn(rows, cols, |_, _| rng.standard_normal());
        let ours = svd(&m).s;
        let mut theirs: Vec<f64> = to_nalgebra(&m).singular_values().iter().copied().collect();
        theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(ours.len(), theirs.len());
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b), "{a} vs {b}");
        }
    }
}

#[test]
fn symmetric_eigenvalues_agree_with_nalgebra() {
    let mut rng = RngStream::new(4, streams::PROBE);
    for d in [1, 2, 6, 15] {
        let g = DenseMatrix::from_fn(d, d, |_, _| rng.standard_normal());
        let s = g.matmul(&g.transpose()).unwrap();
        let mut ours = symmetric_eigen(&s).unwrap().values;
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut theirs: Vec<f64> = to_nalgebra(&s)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
