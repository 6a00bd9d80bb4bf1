use super::sampling::{Minibatch, PairIndex};
use crate::error::{Error, Result};
use crate::games::{check_point, Game, Point};
use crate::numerics;

/// Evaluator for the finite-sum Hamiltonian `H = (1/n²) Σ_{i,j} H_{i,j}`,
/// `H_{i,j} = ½⟨ξ_i, ξ_j⟩`, with a running cost counter.
///
/// One cost unit is one component-gradient evaluation. Pair estimators charge 2
/// (the two `ξ` evaluations; their Jacobian products are not charged), the full
/// gradient charges `2n` (`n` for `ξ(x)` and `n` for the backward pass), and
/// `ξ(x)` or `H(x)` alone charge `n`.
pub struct Hamiltonian<'g> {
    game: &'g dyn Game,
    cost: u64,
    xi_a: Vec<f64>,
    xi_b: Vec<f64>,
}

impl<'g> Hamiltonian<'g> {
    pub fn new(game: &'g dyn Game) -> Self {
        let d = game.dim();
        Self {
            game,
            cost: 0,
            xi_a: vec![0.0; d],
            xi_b: vec![0.0; d],
        }
    }

    pub fn game(&self) -> &'g dyn Game {
        self.game
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn reset_cost(&mut self) {
        self.cost = 0;
    }

    fn check_pair(&self, p: PairIndex) -> Result<()> {
        let n = self.game.n();
        for idx in [p.i, p.j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        Ok(())
    }

    pub fn xi_component(&mut self, i: usize, x: &Point) -> Result<Vec<f64>> {
        let v = crate::games::xi_component(self.game, i, x)?;
        self.cost += 1;
        Ok(v)
    }

    pub fn xi_full(&mut self, x: &Point) -> Result<Vec<f64>> {
        check_point(self.game, x)?;
        let mut out = vec![0.0; self.game.dim()];
        self.xi_full_into(x.as_slice(), &mut out);
        Ok(out)
    }

    /// `½‖ξ(x)‖²`.
    pub fn h_value(&mut self, x: &Point) -> Result<f64> {
        check_point(self.game, x)?;
        Ok(self.h_value_raw(x.as_slice()))
    }

    /// `½⟨ξ_i(x), ξ_j(x)⟩`.
    pub fn h_component(&mut self, p: PairIndex, x: &Point) -> Result<f64> {
        self.check_pair(p)?;
        check_point(self.game, x)?;
        let x = x.as_slice();
        self.game.xi_into(p.i, x, &mut self.xi_a);
        self.game.xi_into(p.j, x, &mut self.xi_b);
        self.cost += 2;
        Ok(0.5 * numerics::dot(&self.xi_a, &self.xi_b))
    }

    /// Unbiased pair estimator `½(J_iᵀ ξ_j + J_jᵀ ξ_i)`.
    pub fn grad_pair(&mut self, p: PairIndex, x: &Point) -> Result<Vec<f64>> {
        self.check_pair(p)?;
        check_point(self.game, x)?;
        let mut out = vec![0.0; self.game.dim()];
        self.grad_pair_into(p, x.as_slice(), 1.0, &mut out);
        Ok(out)
    }

    /// Biased estimator `(J_i + J_j)ᵀ (ξ_i + ξ_j) = ½ ∇‖ξ_i + ξ_j‖²`.
    pub fn grad_biased(&mut self, p: PairIndex, x: &Point) -> Result<Vec<f64>> {
        self.check_pair(p)?;
        check_point(self.game, x)?;
        let mut out = vec![0.0; self.game.dim()];
        self.grad_biased_into(p, x.as_slice(), 1.0, &mut out);
        Ok(out)
    }

    /// `∇H(x) = (1/n) Σ_i J_iᵀ ξ(x)`.
    pub fn grad_full(&mut self, x: &Point) -> Result<Vec<f64>> {
        check_point(self.game, x)?;
        let mut out = vec![0.0; self.game.dim()];
        self.grad_full_into(x.as_slice(), &mut out);
        Ok(out)
    }

    /// Mean of the unbiased pair estimator over a minibatch.
    pub fn grad_minibatch(&mut self, batch: &Minibatch, x: &Point) -> Result<Vec<f64>> {
        check_point(self.game, x)?;
        for &p in batch.pairs() {
            self.check_pair(p)?;
        }
        let mut out = vec![0.0; self.game.dim()];
        let w = 1.0 / batch.tau() as f64;
        for &p in batch.pairs() {
            self.grad_pair_into(p, x.as_slice(), w, &mut out);
        }
        Ok(out)
    }

    pub(crate) fn xi_full_into(&mut self, x: &[f64], out: &mut [f64]) {
        self.game.xi_full_into(x, out);
        self.cost += self.game.n() as u64;
    }

    pub(crate) fn h_value_raw(&mut self, x: &[f64]) -> f64 {
        let mut xi = std::mem::take(&mut self.xi_a);
        self.xi_full_into(x, &mut xi);
        let h = 0.5 * numerics::norm_sq(&xi);
        self.xi_a = xi;
        h
    }

    /// `out += scale · ½(J_iᵀ ξ_j + J_jᵀ ξ_i)`.
    #[inline]
    pub(crate) fn grad_pair_into(&mut self, p: PairIndex, x: &[f64], scale: f64, out: &mut [f64]) {
        self.game.xi_into(p.i, x, &mut self.xi_a);
        self.game.xi_into(p.j, x, &mut self.xi_b);
        if p.i == p.j {
            // one product, so n = 1 reproduces the full gradient bit for bit
            self.game.jtv_add(p.i, x, &self.xi_b, scale, out);
        } else {
            self.game.jtv_add(p.i, x, &self.xi_b, 0.5 * scale, out);
            self.game.jtv_add(p.j, x, &self.xi_a, 0.5 * scale, out);
        }
        self.cost += 2;
    }

    /// `out = ξ_i + λ (J_i + J_j)ᵀ (ξ_i + ξ_j)`: the consensus-optimization direction.
    #[inline]
    pub(crate) fn co_direction_into(
        &mut self,
        p: PairIndex,
        x: &[f64],
        lambda: f64,
        out: &mut [f64],
    ) {
        self.game.xi_into(p.i, x, &mut self.xi_a);
        self.game.xi_into(p.j, x, &mut self.xi_b);
        out.copy_from_slice(&self.xi_a);
        for (b, a) in self.xi_b.iter_mut().zip(&self.xi_a) {
            *b += a;
        }
        self.game.jtv_add(p.i, x, &self.xi_b, lambda, out);
        self.game.jtv_add(p.j, x, &self.xi_b, lambda, out);
        self.cost += 2;
    }

    /// `out += scale · (J_i + J_j)ᵀ (ξ_i + ξ_j)`.
    #[inline]
    pub(crate) fn grad_biased_into(
        &mut self,
        p: PairIndex,
        x: &[f64],
        scale: f64,
        out: &mut [f64],
    ) {
        self.game.xi_into(p.i, x, &mut self.xi_a);
        self.game.xi_into(p.j, x, &mut self.xi_b);
        for (a, b) in self.xi_a.iter_mut().zip(&self.xi_b) {
            *a += b;
        }
        self.game.jtv_add(p.i, x, &self.xi_a, scale, out);
        self.game.jtv_add(p.j, x, &self.xi_a, scale, out);
        self.cost += 2;
    }

    /// Overwrites `out` with `∇H(x)`.
    pub(crate) fn grad_full_into(&mut self, x: &[f64], out: &mut [f64]) {
        let n = self.game.n();
        let mut xi = std::mem::take(&mut self.xi_a);
        self.game.xi_full_into(x, &mut xi);
        out.iter_mut().for_each(|o| *o = 0.0);
        let w = 1.0 / n as f64;
        for i in 0..n {
            self.game.jtv_add(i, x, &xi, w, out);
        }
        self.xi_a = xi;
        self.cost += 2 * n as u64;
    }

    /// `out = ξ_i(x)`, charging one unit.
    #[inline]
    pub(crate) fn xi_component_into(&mut self, i: usize, x: &[f64], out: &mut [f64]) {
        self.game.xi_into(i, x, out);
        self.cost += 1;
    }
}

/// `½‖ξ(x)‖²` without touching any cost counter; for monitoring.
pub fn h_value(game: &dyn Game, x: &Point) -> Result<f64> {
    Ok(0.5 * numerics::norm_sq(&crate::games::xi_full(game, x)?))
}

/// `∇H(x)` without touching any cost counter.
pub fn grad_h_full(game: &dyn Game, x: &Point) -> Result<Vec<f64>> {
    Hamiltonian::new(game).grad_full(x)
}
