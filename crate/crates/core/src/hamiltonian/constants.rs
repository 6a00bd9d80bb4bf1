use super::oracle::Hamiltonian;
use super::sampling::PairIndex;
use crate::error::{Error, Result};
use crate::games::{BilinearGame, Game, Point, SuffBilinearGame};
use crate::numerics::{self, extremal_singular_values, DenseMatrix, RngStream};

/// Pairs enumerated exactly before sampling kicks in.
pub const ENUMERATION_LIMIT: usize = 10_000;

/// `H(x) = ½ xᵀ Q x + qᵀ x + ℓ` for a bilinear game, with `Q = blockdiag(AAᵀ, AᵀA)`.
#[derive(Debug, Clone)]
pub struct BilinearConstants {
    pub q: DenseMatrix,
    pub q_lin: Vec<f64>,
    pub ell: f64,
    /// `σ_max(A)²`
    pub l_h: f64,
    /// `σ_min(A)²` over nonzero singular values
    pub mu_h: f64,
}

impl BilinearConstants {
    pub fn quadratic_value(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x) + numerics::dot(&self.q_lin, x) + self.ell
    }
}

pub fn bilinear_constants(game: &BilinearGame) -> Result<BilinearConstants> {
    let a = game.mean_coupling();
    let at = a.transpose();
    let q = DenseMatrix::block_diag(&a.matmul(&at)?, &at.matmul(a)?);
    let mut q_lin = a.matvec(game.mean_c())?;
    q_lin.extend(at.matvec(game.mean_b())?);
    let ell = 0.5 * (numerics::norm_sq(game.mean_b()) + numerics::norm_sq(game.mean_c()));
    let (smax, smin) = extremal_singular_values(a)?;
    Ok(BilinearConstants {
        q,
        q_lin,
        ell,
        l_h: smax * smax,
        mu_h: smin * smin,
    })
}

/// Inputs of the sufficiently-bilinear PL constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuffBilinearInputs {
    /// Lower bound on the singular values of the cross derivative.
    pub delta: f64,
    /// Upper bound on the singular values of the cross derivative.
    pub big_delta: f64,
    pub rho_sq: f64,
    pub beta_sq: f64,
    /// Smoothness of the diagonal blocks.
    pub l: f64,
    pub c: f64,
    pub s_bar: f64,
    pub l_bar: f64,
}

impl SuffBilinearInputs {
    /// `δ > 0` with `Δ = δ` and every other input zero.
    pub fn plain(delta: f64, l: f64) -> Self {
        Self {
            delta,
            big_delta: delta,
            rho_sq: 0.0,
            beta_sq: 0.0,
            l,
            c: 0.0,
            s_bar: 0.0,
            l_bar: 0.0,
        }
    }

    /// Cross-derivative bounds and block smoothness read off the game, with
    /// `ρ² = β² = 0`. `C`, `S̄`, `L̄` are left at zero.
    pub fn for_game(game: &SuffBilinearGame) -> Result<Self> {
        let (lo, hi) = game.cross_singular_range()?;
        Ok(Self {
            delta: lo,
            big_delta: hi,
            ..Self::plain(lo, game.block_smoothness())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuffBilinearConstants {
    pub inputs: SuffBilinearInputs,
    pub mu_h: f64,
    pub l_h: f64,
    pub condition_margin: f64,
}

impl SuffBilinearConstants {
    pub fn condition_holds(&self) -> bool {
        self.condition_margin > 0.0
    }
}

/// `μ_H = ((δ²+ρ²)(δ²+β²) − 4L²Δ²) / (2δ²+ρ²+β²)`, `L_H = S̄C + L̄²`.
pub fn suff_bilinear_constants(inputs: &SuffBilinearInputs) -> Result<SuffBilinearConstants> {
    let SuffBilinearInputs {
        delta,
        big_delta,
        rho_sq,
        beta_sq,
        l,
        c,
        s_bar,
        l_bar,
    } = *inputs;
    if !(delta > 0.0) {
        return Err(Error::invalid(
            "delta",
            format!("must be positive, got {delta}"),
        ));
    }
    if [big_delta, rho_sq, beta_sq, l, c, s_bar, l_bar]
        .iter()
        .any(|v| !(*v >= 0.0) || !v.is_finite())
    {
        return Err(Error::invalid("inputs", "must be finite and non-negative"));
    }
    let d2 = delta * delta;
    let margin = (d2 + rho_sq) * (d2 + beta_sq) - 4.0 * l * l * big_delta * big_delta;
    Ok(SuffBilinearConstants {
        inputs: *inputs,
        mu_h: margin / (2.0 * d2 + rho_sq + beta_sq),
        l_h: s_bar * c + l_bar * l_bar,
        condition_margin: margin,
    })
}

/// Expected-smoothness / expected-residual constants of `τ`-minibatch sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConstants {
    pub tau: usize,
    pub l_es: f64,
    pub rho_er: f64,
    pub l_max: f64,
    /// Filled in by [`sigma_sq`]; zero until then.
    pub sigma_sq: f64,
}

pub fn sampling_constants(l_h: f64, l_max: f64, n: usize, tau: usize) -> Result<SamplingConstants> {
    let nn = n * n;
    if n == 0 || tau == 0 || tau > nn {
        return Err(Error::invalid(
            "tau",
            format!("must lie in 1..={nn}, got {tau}"),
        ));
    }
    if !(l_h > 0.0) || l_max < l_h * (1.0 - 1e-12) {
        return Err(Error::invalid(
            "L_max",
            format!("need L_max >= L_H > 0, got L_H = {l_h}, L_max = {l_max}"),
        ));
    }
    if nn == 1 {
        return Ok(SamplingConstants {
            tau,
            l_es: l_h,
            rho_er: 0.0,
            l_max,
            sigma_sq: 0.0,
        });
    }
    let (nn, t) = (nn as f64, tau as f64);
    let denom = t * (nn - 1.0);
    Ok(SamplingConstants {
        tau,
        l_es: nn * (t - 1.0) / denom * l_h + (nn - t) / denom * l_max,
        rho_er: l_max * (nn - t) / denom,
        l_max,
        sigma_sq: 0.0,
    })
}

/// Exact `L_max = max_{i,j} ‖∇²H_{i,j}‖` for a bilinear game.
///
/// `∇²H_{i,j} = blockdiag(sym(A_i A_jᵀ), sym(A_iᵀ A_j))` has norm at most
/// `‖A_i‖‖A_j‖`, and the diagonal pair attains `‖A_i‖²`, so the maximum is
/// `max_i σ_max(A_i)²`.
pub fn lmax_components(game: &BilinearGame) -> Result<f64> {
    let mut best: f64 = 0.0;
    for a in game.couplings() {
        let (rows, cols) = a.support();
        if rows.is_empty() {
            continue;
        }
        let full = a.to_dense();
        let sub = DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| full.get(rows[r], cols[c]));
        let (smax, _) = extremal_singular_values(&sub)?;
        best = best.max(smax * smax);
    }
    if best == 0.0 {
        return Err(Error::Degenerate("every coupling matrix is zero".into()));
    }
    Ok(best)
}

const POWER_ITERS: usize = 40;
const HVP_STEP: f64 = 1e-5;

/// Largest `|λ|` of the Hessian of `f` at `x`, by power iteration on central
/// differences of `grad`. A lower estimate.
fn hessian_norm_estimate(
    x: &[f64],
    rng: &mut RngStream,
    mut grad: impl FnMut(&[f64], &mut [f64]),
) -> f64 {
    let d = x.len();
    let mut v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let nv = numerics::norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let mut gp = vec![0.0; d];
    let mut gm = vec![0.0; d];
    let mut probe = vec![0.0; d];
    let mut best: f64 = 0.0;
    for _ in 0..POWER_ITERS {
        for k in 0..d {
            probe[k] = x[k] + HVP_STEP * v[k];
        }
        grad(&probe, &mut gp);
        for k in 0..d {
            probe[k] = x[k] - HVP_STEP * v[k];
        }
        grad(&probe, &mut gm);
        let hv: Vec<f64> = gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| (a - b) / (2.0 * HVP_STEP))
            .collect();
        let lam = numerics::norm(&hv);
        best = best.max(lam);
        if lam == 0.0 {
            break;
        }
        v = hv.into_iter().map(|a| a / lam).collect();
    }
    best
}

/// Estimated `L_max` for a non-quadratic game: power iteration on finite-difference
/// Hessian-vector products of `H_{i,j}`, over every diagonal pair and `extra_pairs`
/// random off-diagonal pairs, at each probe point.
pub fn lmax_components_estimate(
    game: &dyn Game,
    probes: &[Point],
    extra_pairs: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    let n = game.n();
    let mut pairs: Vec<PairIndex> = (0..n).map(|i| PairIndex::new(i, i)).collect();
    if n > 1 {
        for _ in 0..extra_pairs {
            let i = rng.index(n);
            let j = (i + 1 + rng.index(n - 1)) % n;
            pairs.push(PairIndex::new(i, j));
        }
    }
    let mut oracle = Hamiltonian::new(game);
    let mut best: f64 = 0.0;
    for x in probes {
        crate::games::check_point(game, x)?;
        for &p in &pairs {
            let est = hessian_norm_estimate(x.as_slice(), rng, |y, out| {
                out.iter_mut().for_each(|o| *o = 0.0);
                oracle.grad_pair_into(p, y, 1.0, out);
            });
            best = best.max(est);
        }
    }
    Ok(best)
}

/// Estimated `L_H = max ‖∇²H‖` over the probe points.
pub fn lh_estimate(game: &dyn Game, probes: &[Point], rng: &mut RngStream) -> Result<f64> {
    let mut oracle = Hamiltonian::new(game);
    let mut best: f64 = 0.0;
    for x in probes {
        crate::games::check_point(game, x)?;
        let est = hessian_norm_estimate(x.as_slice(), rng, |y, out| oracle.grad_full_into(y, out));
        best = best.max(est);
    }
    Ok(best)
}

/// Tolerance on `‖∇H(x*)‖` accepted by [`sigma_sq`].
pub const STATIONARITY_TOL: f64 = 1e-8;

/// `σ²(τ) = (1/τ) (n²−τ)/(n²−1) · mean_{i,j} ‖∇H_{i,j}(x*)‖²`, by enumeration.
pub fn sigma_sq(game: &dyn Game, x_star: &Point, tau: usize) -> Result<f64> {
    let n = game.n();
    let nn = n * n;
    if tau == 0 || tau > nn {
        return Err(Error::invalid(
            "tau",
            format!("must lie in 1..={nn}, got {tau}"),
        ));
    }
    let mut oracle = Hamiltonian::new(game);
    let g = oracle.grad_full(x_star)?;
    let res = numerics::norm(&g);
    if !(res <= STATIONARITY_TOL) {
        return Err(Error::NotStationary(res));
    }
    if tau == nn {
        return Ok(0.0);
    }
    let x = x_star.as_slice();
    let mut buf = vec![0.0; game.dim()];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            buf.iter_mut().for_each(|o| *o = 0.0);
            oracle.grad_pair_into(PairIndex::new(i, j), x, 1.0, &mut buf);
            total += numerics::norm_sq(&buf);
        }
    }
    let mean = total / nn as f64;
    let (nn, t) = (nn as f64, tau as f64);
    Ok(mean * (nn - t) / (t * (nn - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{Coupling, SuffBilinearGame};
    use crate::numerics::streams;
    use approx::assert_relative_eq;

    #[test]
    fn sampling_constant_examples() {
        let c = sampling_constants(1.0, 3.0, 2, 2).unwrap();
        assert_relative_eq!(c.l_es, 5.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.rho_er, 1.0, max_relative = 1e-15);
        let one = sampling_constants(0.5, 2.0, 10, 1).unwrap();
        assert_relative_eq!(one.l_es, 2.0, max_relative = 1e-15);
        assert_relative_eq!(one.rho_er, 2.0, max_relative = 1e-15);
        let all = sampling_constants(0.5, 2.0, 10, 100).unwrap();
        assert_relative_eq!(all.l_es, 0.5, max_relative = 1e-15);
        assert_eq!(all.rho_er, 0.0);
        assert!(sampling_constants(1.0, 2.0, 3, 10).is_err());
        assert!(sampling_constants(2.0, 1.0, 3, 1).is_err());
    }

    #[test]
    fn suff_bilinear_examples() {
        let c = suff_bilinear_constants(&SuffBilinearInputs::plain(7.0, 3.0)).unwrap();
        assert_relative_eq!(c.mu_h, 6.5, max_relative = 1e-15);
        assert!(c.condition_holds());
        let f = suff_bilinear_constants(&SuffBilinearInputs::plain(5.0, 3.0)).unwrap();
        assert_eq!(f.condition_margin, 625.0 - 900.0);
        assert!(!f.condition_holds());
        let z = suff_bilinear_constants(&SuffBilinearInputs::plain(2.0, 0.0)).unwrap();
        assert_eq!(z.mu_h, 2.0);
        assert_eq!(z.condition_margin, 16.0);
        assert!(suff_bilinear_constants(&SuffBilinearInputs::plain(0.0, 1.0)).is_err());
    }

    #[test]
    fn standard_game_constants() {
        let g = BilinearGame::standard(1).unwrap();
        let c = bilinear_constants(&g).unwrap();
        assert_relative_eq!(c.l_h, 1e-4, max_relative = 1e-10);
        assert_relative_eq!(c.mu_h, 1e-4, max_relative = 1e-10);
        assert_relative_eq!(lmax_components(&g).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn identity_game_constants() {
        let a = vec![Coupling::Dense(DenseMatrix::identity(2))];
        let g = BilinearGame::new(a, vec![vec![1.0, 0.0]], vec![vec![0.0, 2.0]]).unwrap();
        let c = bilinear_constants(&g).unwrap();
        assert_relative_eq!(c.l_h, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.mu_h, 1.0, max_relative = 1e-14);
        assert_relative_eq!(lmax_components(&g).unwrap(), c.l_h, max_relative = 1e-12);
    }

    #[test]
    fn standard_suff_bilinear_effective_mu() {
        let g = SuffBilinearGame::standard(1, 7.0).unwrap();
        let c = suff_bilinear_constants(&SuffBilinearInputs::for_game(&g).unwrap()).unwrap();
        assert_relative_eq!(c.mu_h, 6.5e-4, max_relative = 1e-9);
    }

    #[test]
    fn lmax_estimate_recovers_exact_value_on_bilinear() {
        let g = BilinearGame::random_dense(3, 3, 3, 4).unwrap();
        let mut rng = RngStream::new(1, streams::PROBE);
        let probe = vec![Point::zeros(3, 3)];
        let est = lmax_components_estimate(&g, &probe, 20, &mut rng).unwrap();
        let exact = lmax_components(&g).unwrap();
        assert!(est <= exact * (1.0 + 1e-6));
        assert!(est >= exact * 0.99, "{est} vs {exact}");
    }

    #[test]
    fn sigma_sq_rejects_non_stationary_and_vanishes_at_full_batch() {
        let g = BilinearGame::random_dense(3, 2, 2, 9).unwrap();
        let x = Point::new(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(sigma_sq(&g, &x, 1), Err(Error::NotStationary(_))));
        let xs = g.solution().unwrap();
        assert_eq!(sigma_sq(&g, &xs, 9).unwrap(), 0.0);
        assert!(sigma_sq(&g, &xs, 1).unwrap() > 0.0);
    }
}
