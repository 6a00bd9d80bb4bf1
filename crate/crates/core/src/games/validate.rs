use super::Game;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

const FD_STEP: f64 = 1e-5;

/// Largest absolute finite-difference discrepancies seen by [`validate_oracle`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleErrors {
    /// `ξ_i` against central differences of the player losses.
    pub xi: f64,
    /// `J_iᵀ v` against the transpose of the central-difference Jacobian of `ξ_i`.
    pub jtv: f64,
}

impl OracleErrors {
    pub fn max(&self) -> f64 {
        self.xi.max(self.jtv)
    }
}

/// Checks `ξ_i` and `J_iᵀ v` against central differences (`h = 1e-5`) at
/// `trials` random `(i, x, v)` with standard normal `x` and `v`.
///
/// The `x2` block of `ξ_i` is compared with `∇_{x2}` of player 2's loss, which for
/// zero-sum games is `−∇_{x2} g_i`.
pub fn validate_oracle(
    game: &dyn Game,
    trials: usize,
    rng: &mut RngStream,
) -> Result<OracleErrors> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let d = game.dim();
    let d1 = game.d1();
    let h = FD_STEP;
    let mut errs = OracleErrors::default();
    let mut xi = vec![0.0; d];
    let mut xp = vec![0.0; d];
    let mut xm = vec![0.0; d];
    let mut jt = vec![0.0; d];
    let mut fd_jt = vec![0.0; d];
    for _ in 0..trials {
        let i = rng.index(game.n());
        let x: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();

        game.xi_into(i, &x, &mut xi);
        let mut probe = x.clone();
        for k in 0..d {
            probe[k] = x[k] + h;
            let (p1, p2) = game.player_losses(i, &probe);
            probe[k] = x[k] - h;
            let (m1, m2) = game.player_losses(i, &probe);
            probe[k] = x[k];
            let fd = if k < d1 {
                (p1 - m1) / (2.0 * h)
            } else {
                (p2 - m2) / (2.0 * h)
            };
            errs.xi = errs.xi.max((fd - xi[k]).abs());
        }

        // (Jᵀ v)_k = vᵀ J e_k, with J e_k from central differences of ξ_i
        jt.iter_mut().for_each(|o| *o = 0.0);
        game.jtv_add(i, &x, &v, 1.0, &mut jt);
        for k in 0..d {
            probe[k] = x[k] + h;
            game.xi_into(i, &probe, &mut xp);
            probe[k] = x[k] - h;
            game.xi_into(i, &probe, &mut xm);
            probe[k] = x[k];
            fd_jt[k] = xp
                .iter()
                .zip(&xm)
                .zip(&v)
                .map(|((a, b), w)| w * (a - b) / (2.0 * h))
                .sum();
        }
        for (a, b) in jt.iter().zip(&fd_jt) {
            errs.jtv = errs.jtv.max((a - b).abs());
        }
    }
    Ok(errs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{BilinearGame, SuffBilinearGame};
    use crate::numerics::streams;

    #[test]
    fn bilinear_is_exact() {
        let g = BilinearGame::random_dense(4, 3, 5, 2).unwrap();
        let mut rng = RngStream::new(1, streams::PROBE);
        let e = validate_oracle(&g, 20, &mut rng).unwrap();
        assert!(e.max() <= 1e-9, "{e:?}");
    }

    #[test]
    fn standard_games_pass() {
        let mut rng = RngStream::new(1, streams::PROBE);
        let b = BilinearGame::standard(1).unwrap();
        assert!(validate_oracle(&b, 3, &mut rng).unwrap().max() <= 1e-9);
        let s = SuffBilinearGame::standard(1, 7.0).unwrap();
        assert!(validate_oracle(&s, 3, &mut rng).unwrap().max() <= 1e-5);
    }

    #[test]
    fn zero_trials_rejected() {
        let g = BilinearGame::random_dense(1, 1, 1, 2).unwrap();
        let mut rng = RngStream::new(1, streams::PROBE);
        assert!(validate_oracle(&g, 0, &mut rng).is_err());
    }
}
