//! Game oracles: per-component signed gradients `ξ_i` and Jacobian-transpose
//! products `J_iᵀ v`.
//!
//! Component indices are zero-based throughout (`0..n`).

mod bilinear;
mod coupling;
mod gan;
mod suff_bilinear;
mod validate;

pub use bilinear::{BilinearGame, BilinearSpec, CouplingKind};
pub use coupling::{Coupling, SparseMatrix};
pub use gan::{GanVariant, GaussianGanGame};
pub use suff_bilinear::{
    piecewise_f, piecewise_f1, piecewise_f2, Nonlinearity, SuffBilinearGame, PIECEWISE_F_SMOOTHNESS,
};
pub use validate::{validate_oracle, OracleErrors};

use crate::error::{check_len, Error, Result};

/// A stochastic smooth game `min_{x1} max_{x2} (1/n) Σ g_i(x1, x2)` seen through
/// its per-component signed gradient field `ξ_i = (∇_{x1} g_i, −∇_{x2} g_i)`.
///
/// The `*_into` / `*_add` methods are unchecked hot-path evaluators: callers
/// guarantee `i < n()` and slice lengths `dim()`. Use [`xi_component`],
/// [`jtv_component`] and [`xi_full`] for validated access.
pub trait Game: Send + Sync {
    fn n(&self) -> usize;
    fn d1(&self) -> usize;
    fn d2(&self) -> usize;

    fn dim(&self) -> usize {
        self.d1() + self.d2()
    }

    /// Short identifier used in output files.
    fn label(&self) -> &str;

    /// Writes `ξ_i(x)` into `out`.
    fn xi_into(&self, i: usize, x: &[f64], out: &mut [f64]);

    /// `out += scale · J_i(x)ᵀ v`.
    fn jtv_add(&self, i: usize, x: &[f64], v: &[f64], scale: f64, out: &mut [f64]);

    /// Losses of component `i` for each player: player 1 minimises the first over
    /// `x1`, player 2 minimises the second over `x2`. For zero-sum games this is
    /// `(g_i, −g_i)`, so that `ξ_i` is the stacked gradient of the two losses.
    fn player_losses(&self, i: usize, x: &[f64]) -> (f64, f64);

    /// Whether the game is a single zero-sum objective `g` (so `player_losses`
    /// returns `(g_i, −g_i)`).
    fn is_zero_sum(&self) -> bool {
        true
    }

    /// `ξ(x) = (1/n) Σ ξ_i(x)` written into `out`.
    fn xi_full_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let mut tmp = vec![0.0; self.dim()];
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            self.xi_into(i, x, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
        }
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= inv);
    }
}

/// Parameters of both players stacked as `x = (x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    data: Vec<f64>,
    d1: usize,
}

impl Point {
    pub fn new(x1: &[f64], x2: &[f64]) -> Result<Self> {
        let mut data = x1.to_vec();
        data.extend_from_slice(x2);
        Self::from_flat(data, x1.len())
    }

    pub fn from_flat(data: Vec<f64>, d1: usize) -> Result<Self> {
        if d1 == 0 || d1 >= data.len() {
            return Err(Error::invalid(
                "point",
                format!(
                    "need d1 >= 1 and d2 >= 1, got d1 = {d1}, d = {}",
                    data.len()
                ),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point entries"));
        }
        Ok(Self { data, d1 })
    }

    pub fn zeros(d1: usize, d2: usize) -> Self {
        Self {
            data: vec![0.0; d1 + d2],
            d1,
        }
    }

    pub fn x1(&self) -> &[f64] {
        &self.data[..self.d1]
    }

    pub fn x2(&self) -> &[f64] {
        &self.data[self.d1..]
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.data.len() - self.d1
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        crate::numerics::dist_sq(&self.data, &other.data)
    }
}

pub(crate) fn check_point(game: &dyn Game, x: &Point) -> Result<()> {
    check_len("point d1", game.d1(), x.d1())?;
    check_len("point d2", game.d2(), x.d2())
}

fn check_index(game: &dyn Game, i: usize) -> Result<()> {
    if i < game.n() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: i,
            n: game.n(),
        })
    }
}

/// Exact signed gradient `ξ_i(x)` of component `i`.
pub fn xi_component(game: &dyn Game, i: usize, x: &Point) -> Result<Vec<f64>> {
    check_index(game, i)?;
    check_point(game, x)?;
    let mut out = vec![0.0; game.dim()];
    game.xi_into(i, x.as_slice(), &mut out);
    Ok(out)
}

/// `J_i(x)ᵀ v` with `J_i` the signed block Jacobian of `ξ_i`.
pub fn jtv_component(game: &dyn Game, i: usize, x: &Point, v: &[f64]) -> Result<Vec<f64>> {
    check_index(game, i)?;
    check_point(game, x)?;
    check_len("jtv direction", game.dim(), v.len())?;
    let mut out = vec![0.0; game.dim()];
    game.jtv_add(i, x.as_slice(), v, 1.0, &mut out);
    Ok(out)
}

/// Mean field `ξ(x) = (1/n) Σ ξ_i(x)`.
pub fn xi_full(game: &dyn Game, x: &Point) -> Result<Vec<f64>> {
    check_point(game, x)?;
    let mut out = vec![0.0; game.dim()];
    game.xi_full_into(x.as_slice(), &mut out);
    Ok(out)
}
