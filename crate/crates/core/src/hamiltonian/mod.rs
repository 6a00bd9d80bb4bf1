//! The stochastic Hamiltonian `H(x) = ½‖ξ(x)‖² = (1/n²) Σ_{i,j} ½⟨ξ_i(x), ξ_j(x)⟩`:
//! values, pair gradient estimators, pair sampling and theory constants.

mod checks;
mod constants;
mod oracle;
mod sampling;

pub use checks::{
    check_biased_gap, check_pl, check_unbiasedness, second_moment_bounds, PlReport,
    SecondMomentReport,
};
pub use constants::{
    bilinear_constants, lh_estimate, lmax_components, lmax_components_estimate, sampling_constants,
    sigma_sq, suff_bilinear_constants, BilinearConstants, SamplingConstants, SuffBilinearConstants,
    SuffBilinearInputs, ENUMERATION_LIMIT, STATIONARITY_TOL,
};
pub use oracle::{grad_h_full, h_value, Hamiltonian};
pub use sampling::{sample_minibatch, sample_pair, Minibatch, PairIndex};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{BilinearGame, BilinearSpec, CouplingKind, Game, Point};
    use crate::numerics::{self, streams, RngStream};

    fn random_point(game: &dyn Game, rng: &mut RngStream) -> Point {
        let x: Vec<f64> = (0..game.dim()).map(|_| rng.standard_normal()).collect();
        Point::from_flat(x, game.d1()).unwrap()
    }

    fn scalar_game() -> BilinearGame {
        let a = vec![crate::games::Coupling::Dense(
            numerics::DenseMatrix::identity(1),
        )];
        BilinearGame::new(a, vec![vec![0.0]], vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let g = scalar_game();
        let mut h = Hamiltonian::new(&g);
        let x = Point::new(&[1.0], &[1.0]).unwrap();
        assert_eq!(h.h_value(&x).unwrap(), 1.0);
        assert_eq!(
            h.grad_pair(PairIndex::new(0, 0), &x).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            h.grad_biased(PairIndex::new(0, 0), &x).unwrap(),
            vec![4.0, 4.0]
        );
    }

    #[test]
    fn h_value_is_mean_of_components() {
        let g = BilinearGame::random_dense(4, 3, 2, 1).unwrap();
        let mut rng = RngStream::new(2, streams::PROBE);
        let x = random_point(&g, &mut rng);
        let mut h = Hamiltonian::new(&g);
        let mut total = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let a = h.h_component(PairIndex::new(i, j), &x).unwrap();
                let b = h.h_component(PairIndex::new(j, i), &x).unwrap();
                assert_eq!(a, b);
                total += a;
            }
        }
        let hv = h.h_value(&x).unwrap();
        assert!((total / 16.0 - hv).abs() <= 1e-12 * (1.0 + hv));
    }

    #[test]
    fn unbiased_vs_biased_enumeration() {
        let g = BilinearGame::random_dense(4, 3, 3, 7).unwrap();
        let mut rng = RngStream::new(3, streams::PROBE);
        let x = random_point(&g, &mut rng);
        assert!(check_unbiasedness(&g, &x).unwrap() <= 1e-12);
        assert!(check_biased_gap(&g, &x).unwrap() > 1e-3);
    }

    #[test]
    fn interpolated_solution_zero_gradients() {
        let spec = BilinearSpec {
            n: 3,
            d: 3,
            kind: CouplingKind::OneHot,
            interpolated: true,
            seed: 1,
        };
        let g = BilinearGame::generate(&spec).unwrap();
        let xs = g.solution().unwrap();
        let mut h = Hamiltonian::new(&g);
        for i in 0..3 {
            for j in 0..3 {
                let p = PairIndex::new(i, j);
                assert!(h.grad_pair(p, &xs).unwrap().iter().all(|&v| v == 0.0));
                assert!(h.grad_biased(p, &xs).unwrap().iter().all(|&v| v == 0.0));
            }
        }
        assert_eq!(sigma_sq(&g, &xs, 1).unwrap(), 0.0);
    }

    #[test]
    fn cost_increments() {
        let g = BilinearGame::standard(1).unwrap();
        let x = Point::zeros(100, 100);
        let mut h = Hamiltonian::new(&g);
        h.grad_full(&x).unwrap();
        assert_eq!(h.cost(), 200);
        h.reset_cost();
        h.grad_pair(PairIndex::new(1, 2), &x).unwrap();
        h.grad_biased(PairIndex::new(1, 2), &x).unwrap();
        h.h_component(PairIndex::new(1, 2), &x).unwrap();
        assert_eq!(h.cost(), 6);
        h.reset_cost();
        h.h_value(&x).unwrap();
        assert_eq!(h.cost(), 100);
    }

    #[test]
    fn pair_out_of_range_rejected() {
        let g = scalar_game();
        let mut h = Hamiltonian::new(&g);
        let x = Point::new(&[1.0], &[1.0]).unwrap();
        assert!(h.grad_pair(PairIndex::new(0, 1), &x).is_err());
    }

    #[test]
    fn pl_holds_for_bilinear_with_prop_constant() {
        let g = BilinearGame::random_dense(3, 3, 3, 12).unwrap();
        let c = bilinear_constants(&g).unwrap();
        let mut rng = RngStream::new(4, streams::PROBE);
        let pts: Vec<Point> = (0..200).map(|_| random_point(&g, &mut rng)).collect();
        let r = check_pl(&g, c.mu_h, &pts).unwrap();
        assert!(r.pass, "{r:?} vs {}", c.mu_h);
        assert!(check_pl(&g, 0.0, &pts).unwrap().pass);
    }
}
