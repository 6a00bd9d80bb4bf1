use std::f64::consts::FRAC_PI_2;

use super::bilinear::{BilinearGame, BilinearSpec, CouplingKind};
use super::{Game, Point};
use crate::error::{Error, Result};
use crate::numerics::{self, extremal_singular_values, solve_least_squares, DenseMatrix};

/// Global bound on `|f''|` for the piecewise scalar nonlinearity.
pub const PIECEWISE_F_SMOOTHNESS: f64 = 3.0;

/// The C² piecewise scalar function
/// `−3(x + π/2)` on `x ≤ −π/2`, `−3 cos x` on `(−π/2, π/2]`, `−cos x + 2x − π` above.
pub fn piecewise_f(x: f64) -> f64 {
    if x <= -FRAC_PI_2 {
        -3.0 * (x + FRAC_PI_2)
    } else if x <= FRAC_PI_2 {
        -3.0 * x.cos()
    } else {
        -x.cos() + 2.0 * x - std::f64::consts::PI
    }
}

pub fn piecewise_f1(x: f64) -> f64 {
    if x <= -FRAC_PI_2 {
        -3.0
    } else if x <= FRAC_PI_2 {
        3.0 * x.sin()
    } else {
        x.sin() + 2.0
    }
}

pub fn piecewise_f2(x: f64) -> f64 {
    if x <= -FRAC_PI_2 {
        0.0
    } else if x <= FRAC_PI_2 {
        3.0 * x.cos()
    } else {
        x.cos()
    }
}

/// Separable nonlinearity `F(x) = (1/d) Σ_k f(x_k)` added to each player's block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Piecewise,
    /// `F ≡ 0`; the game collapses to a bilinear one with coupling `δ A_i`.
    Zero,
}

impl Nonlinearity {
    #[inline]
    fn value(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Piecewise => piecewise_f(x),
            Nonlinearity::Zero => 0.0,
        }
    }

    #[inline]
    fn d1(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Piecewise => piecewise_f1(x),
            Nonlinearity::Zero => 0.0,
        }
    }

    #[inline]
    fn d2(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Piecewise => piecewise_f2(x),
            Nonlinearity::Zero => 0.0,
        }
    }

    fn smoothness(self) -> f64 {
        match self {
            Nonlinearity::Piecewise => PIECEWISE_F_SMOOTHNESS,
            Nonlinearity::Zero => 0.0,
        }
    }
}

/// `g_i = F(x1) + δ x1ᵀ A_i x2 + b_iᵀ x1 + c_iᵀ x2 − F(x2)`.
#[derive(Debug, Clone)]
pub struct SuffBilinearGame {
    base: BilinearGame,
    delta: f64,
    nonlinearity: Nonlinearity,
    label: String,
}

impl SuffBilinearGame {
    pub fn new(base: BilinearGame, delta: f64, nonlinearity: Nonlinearity) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(
                "delta",
                format!("must be positive, got {delta}"),
            ));
        }
        let label = match nonlinearity {
            Nonlinearity::Piecewise => "suff-bilinear",
            Nonlinearity::Zero => "suff-bilinear-linear",
        }
        .to_string();
        Ok(Self {
            base,
            delta,
            nonlinearity,
            label,
        })
    }

    /// `n = d = 100`, one-hot couplings, `b_i, c_i ~ N(0, 1/d)`, piecewise `F`.
    pub fn standard(seed: u64, delta: f64) -> Result<Self> {
        Self::new(
            BilinearGame::standard(seed)?,
            delta,
            Nonlinearity::Piecewise,
        )
    }

    /// Generated family. For SPD couplings `δ` is multiplied by 1.5 until the
    /// margin `δ_min⁴ − 4 L² Δ²` is positive, where `[δ_min, Δ]` brackets the
    /// singular values of the cross derivative `δ A` and `L = 3 / d`.
    pub fn generate(spec: &BilinearSpec, delta: f64) -> Result<Self> {
        let mut game = Self::new(
            BilinearGame::generate(spec)?,
            delta,
            Nonlinearity::Piecewise,
        )?;
        if spec.kind == CouplingKind::Spd {
            for _ in 0..200 {
                if game.condition_margin()? > 0.0 {
                    break;
                }
                game.delta *= 1.5;
            }
            game.label = "suff-bilinear-spd".into();
        }
        Ok(game)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn base(&self) -> &BilinearGame {
        &self.base
    }

    /// Smoothness of the separable block `F`: `3 / d` for the piecewise choice.
    pub fn block_smoothness(&self) -> f64 {
        self.nonlinearity.smoothness() / self.base.d1().min(self.base.d2()) as f64
    }

    /// Bounds `(δ_min, Δ)` on the nonzero singular values of the mean cross
    /// derivative `δ A`.
    pub fn cross_singular_range(&self) -> Result<(f64, f64)> {
        let (smax, smin) = extremal_singular_values(self.base.mean_coupling())?;
        Ok((self.delta * smin, self.delta * smax))
    }

    /// `δ_min⁴ − 4 L² Δ²` with `L` the block smoothness.
    pub fn condition_margin(&self) -> Result<f64> {
        let (lo, hi) = self.cross_singular_range()?;
        let l = self.block_smoothness();
        Ok(lo.powi(4) - 4.0 * l * l * hi * hi)
    }

    /// Dense mean Jacobian `J(x) = [[∇²F(x1), δA], [−δAᵀ, ∇²F(x2)]]`.
    pub fn mean_jacobian(&self, x: &Point) -> Result<DenseMatrix> {
        super::check_point(self, x)?;
        let (d1, d2) = (self.base.d1(), self.base.d2());
        let a = self.base.mean_coupling();
        let mut j = DenseMatrix::zeros(d1 + d2, d1 + d2);
        for (k, &v) in x.x1().iter().enumerate() {
            j.set(k, k, self.nonlinearity.d2(v) / d1 as f64);
        }
        for (k, &v) in x.x2().iter().enumerate() {
            j.set(d1 + k, d1 + k, self.nonlinearity.d2(v) / d2 as f64);
        }
        for r in 0..d1 {
            for c in 0..d2 {
                let v = self.delta * a.get(r, c);
                j.set(r, d1 + c, v);
                j.set(d1 + c, r, -v);
            }
        }
        Ok(j)
    }

    /// A stationary point `ξ(x*) = 0`, found by damped Newton on `ξ` started from
    /// the solution of the `F ≡ 0` game.
    pub fn solution(&self) -> Result<Point> {
        let linear = SuffBilinearGame::new(self.base.clone(), self.delta, Nonlinearity::Zero)?;
        let start = linear.linear_solution()?;
        if self.nonlinearity == Nonlinearity::Zero {
            return Ok(start);
        }
        let tol =
            1e-14 * (1.0 + numerics::norm(self.base.mean_b()) + numerics::norm(self.base.mean_c()));
        let dim = self.dim();
        let mut x = start.into_vec();
        let mut xi = vec![0.0; dim];
        self.xi_full_into(&x, &mut xi);
        let mut res = numerics::norm(&xi);
        'newton: for _ in 0..100 {
            if res <= tol {
                break;
            }
            let j = self.mean_jacobian(&Point::from_flat(x.clone(), self.base.d1())?)?;
            let step = solve_least_squares(&j, &xi)?;
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let mut xi_t = vec![0.0; dim];
                self.xi_full_into(&trial, &mut xi_t);
                let r = numerics::norm(&xi_t);
                if r < res {
                    x = trial;
                    xi = xi_t;
                    res = r;
                    break;
                }
                t *= 0.5;
                if t < 1e-6 {
                    break 'newton;
                }
            }
        }
        if res > 1e-10 * (1.0 + tol) {
            return Err(Error::NotStationary(res));
        }
        Point::from_flat(x, self.base.d1())
    }

    fn linear_solution(&self) -> Result<Point> {
        let p = self.base.solution()?;
        let inv = 1.0 / self.delta;
        Point::from_flat(
            p.as_slice().iter().map(|v| v * inv).collect(),
            self.base.d1(),
        )
    }

    #[inline]
    fn grad_f_add(&self, x: &[f64], out: &mut [f64]) {
        let d1 = self.base.d1();
        let (x1, x2) = x.split_at(d1);
        let (o1, o2) = out.split_at_mut(d1);
        let s1 = 1.0 / d1 as f64;
        let s2 = 1.0 / self.base.d2() as f64;
        for (o, &v) in o1.iter_mut().zip(x1) {
            *o += s1 * self.nonlinearity.d1(v);
        }
        for (o, &v) in o2.iter_mut().zip(x2) {
            *o += s2 * self.nonlinearity.d1(v);
        }
    }

    fn f_value(&self, block: &[f64]) -> f64 {
        block
            .iter()
            .map(|&v| self.nonlinearity.value(v))
            .sum::<f64>()
            / block.len() as f64
    }
}

impl Game for SuffBilinearGame {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn d1(&self) -> usize {
        self.base.d1()
    }

    fn d2(&self) -> usize {
        self.base.d2()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn xi_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        self.base.xi_scaled_into(i, self.delta, x, out);
        self.grad_f_add(x, out);
    }

    fn jtv_add(&self, i: usize, x: &[f64], v: &[f64], scale: f64, out: &mut [f64]) {
        self.base.jtv_scaled_add(i, self.delta, v, scale, out);
        if self.nonlinearity == Nonlinearity::Zero {
            return;
        }
        let d1 = self.base.d1();
        let s1 = scale / d1 as f64;
        let s2 = scale / self.base.d2() as f64;
        for k in 0..x.len() {
            let s = if k < d1 { s1 } else { s2 };
            out[k] += s * piecewise_f2(x[k]) * v[k];
        }
    }

    fn player_losses(&self, i: usize, x: &[f64]) -> (f64, f64) {
        let (x1, x2) = x.split_at(self.base.d1());
        let g = self.f_value(x1) + self.base.objective_scaled(i, self.delta, x) - self.f_value(x2);
        (g, -g)
    }

    fn xi_full_into(&self, x: &[f64], out: &mut [f64]) {
        self.base.xi_full_into(x, out);
        let d1 = self.base.d1();
        if self.delta != 1.0 {
            // base mean field is linear in the coupling; rescale only its coupling part
            let (x1, x2) = x.split_at(d1);
            let a = self.base.mean_coupling();
            let (o1, o2) = out.split_at_mut(d1);
            a.mul_add(x2, self.delta - 1.0, o1);
            a.tmul_add(x1, 1.0 - self.delta, o2);
        }
        self.grad_f_add(x, out);
    }
}
