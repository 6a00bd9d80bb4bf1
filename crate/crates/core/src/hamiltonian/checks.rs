use super::constants::ENUMERATION_LIMIT;
use super::oracle::Hamiltonian;
use super::sampling::PairIndex;
use crate::error::{Error, Result};
use crate::games::{Game, Point};
use crate::numerics;

fn check_budget(game: &dyn Game) -> Result<()> {
    let nn = game.n() * game.n();
    if nn > ENUMERATION_LIMIT {
        return Err(Error::invalid(
            "n",
            format!("n² = {nn} exceeds the enumeration budget {ENUMERATION_LIMIT}"),
        ));
    }
    Ok(())
}

fn enumerate_mean(game: &dyn Game, x: &Point, biased: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    check_budget(game)?;
    let mut oracle = Hamiltonian::new(game);
    let full = oracle.grad_full(x)?;
    let n = game.n();
    let w = 1.0 / (n * n) as f64;
    let mut mean = vec![0.0; game.dim()];
    for i in 0..n {
        for j in 0..n {
            let p = PairIndex::new(i, j);
            if biased {
                oracle.grad_biased_into(p, x.as_slice(), w, &mut mean);
            } else {
                oracle.grad_pair_into(p, x.as_slice(), w, &mut mean);
            }
        }
    }
    Ok((mean, full))
}

fn relative_gap(mean: &[f64], full: &[f64]) -> f64 {
    numerics::dist_sq(mean, full).sqrt() / (1.0 + numerics::norm(full))
}

/// `‖mean_{i,j} ∇H_{i,j}(x) − ∇H(x)‖ / (1 + ‖∇H(x)‖)` by full enumeration.
pub fn check_unbiasedness(game: &dyn Game, x: &Point) -> Result<f64> {
    let (mean, full) = enumerate_mean(game, x, false)?;
    Ok(relative_gap(&mean, &full))
}

/// The same gap for the biased estimator `(J_i + J_j)ᵀ(ξ_i + ξ_j)`.
pub fn check_biased_gap(game: &dyn Game, x: &Point) -> Result<f64> {
    let (mean, full) = enumerate_mean(game, x, true)?;
    Ok(relative_gap(&mean, &full))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlReport {
    /// `min ½‖∇H‖² / H` over the points with `H ≥ 1e-14`.
    pub min_ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub pass: bool,
}

/// Sampled check of `½‖∇H(x)‖² ≥ μ H(x)` (taking `H* = 0`).
pub fn check_pl(game: &dyn Game, mu: f64, points: &[Point]) -> Result<PlReport> {
    let mut oracle = Hamiltonian::new(game);
    let mut min_ratio = f64::INFINITY;
    let (mut evaluated, mut skipped) = (0, 0);
    for x in points {
        let h = oracle.h_value(x)?;
        if h < 1e-14 {
            skipped += 1;
            continue;
        }
        let g = oracle.grad_full(x)?;
        min_ratio = min_ratio.min(0.5 * numerics::norm_sq(&g) / h);
        evaluated += 1;
    }
    let pass = mu <= 0.0 || min_ratio >= mu * (1.0 - 1e-6);
    Ok(PlReport {
        min_ratio,
        evaluated,
        skipped,
        pass,
    })
}

/// Both sides of the stochastic-gradient second-moment bounds for `τ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentReport {
    /// `E_{i,j} ‖∇H_{i,j}(x)‖²`
    pub second_moment: f64,
    /// `4 𝓛 H(x) + 2σ²` with `𝓛 = L_max`
    pub es_bound: f64,
    /// `4 ρ H(x) + ‖∇H(x)‖² + 2σ²` with `ρ = L_max`
    pub er_bound: f64,
}

impl SecondMomentReport {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * (1.0 + self.second_moment);
        self.second_moment <= self.es_bound + slack && self.second_moment <= self.er_bound + slack
    }
}

pub fn second_moment_bounds(
    game: &dyn Game,
    x: &Point,
    l_max: f64,
    sigma_sq: f64,
) -> Result<SecondMomentReport> {
    check_budget(game)?;
    let mut oracle = Hamiltonian::new(game);
    let h = oracle.h_value(x)?;
    let g = oracle.grad_full(x)?;
    let n = game.n();
    let mut buf = vec![0.0; game.dim()];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            buf.iter_mut().for_each(|o| *o = 0.0);
            oracle.grad_pair_into(PairIndex::new(i, j), x.as_slice(), 1.0, &mut buf);
            total += numerics::norm_sq(&buf);
        }
    }
    Ok(SecondMomentReport {
        second_moment: total / (n * n) as f64,
        es_bound: 4.0 * l_max * h + 2.0 * sigma_sq,
        er_bound: 4.0 * l_max * h + numerics::norm_sq(&g) + 2.0 * sigma_sq,
    })
}
