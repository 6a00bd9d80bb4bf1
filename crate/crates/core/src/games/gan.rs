use std::fmt;
use std::str::FromStr;

use super::{check_point, Game, Point};
use crate::error::{Error, Result};
use crate::numerics::{streams, RngStream};

/// Loss pairing of the Gaussian GAN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GanVariant {
    /// Linear critic loss; the constant `φ0` is dropped.
    Wgan,
    /// Saturating minimax cross-entropy.
    SatGan,
    /// Non-saturating: each player maximises its own cross-entropy objective.
    NsGan,
}

impl GanVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            GanVariant::Wgan => "wgan",
            GanVariant::SatGan => "satgan",
            GanVariant::NsGan => "nsgan",
        }
    }
}

impl fmt::Display for GanVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GanVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wgan" => Ok(GanVariant::Wgan),
            "satgan" => Ok(GanVariant::SatGan),
            "nsgan" => Ok(GanVariant::NsGan),
            other => Err(Error::invalid(
                "gan variant",
                format!("unknown variant `{other}`"),
            )),
        }
    }
}

/// Generator `G(z) = μ + σ z`, discriminator `D(t) = φ0 + φ1 t + φ2 t²`, trained on
/// a fixed sample split into equal mini-batches. Parameters are
/// `x1 = (μ, σ)` and `x2 = (φ0, φ1, φ2)`, or `(φ1, φ2)` for WGAN.
#[derive(Debug, Clone)]
pub struct GaussianGanGame {
    variant: GanVariant,
    y: Vec<f64>,
    z: Vec<f64>,
    batch: usize,
    label: String,
}

/// Per-sample loss derivatives with respect to `u = D(G(z))` and `r = D(y)`:
/// player 1 loss is `β1(u)` (+ terms free of θ), player 2 loss is `α2(r) + β2(u)`.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    b1p: f64,
    b1pp: f64,
    a2p: f64,
    a2pp: f64,
    b2p: f64,
    b2pp: f64,
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log_sigmoid(t: f64) -> f64 {
    -((-t).max(0.0) + (-t.abs()).exp().ln_1p())
}

impl GaussianGanGame {
    /// Draws `y, z ~ N(0, 1)` (all `y` first, then all `z`) from the game stream.
    pub fn new(
        variant: GanVariant,
        sample_size: usize,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if batch_size == 0 || sample_size == 0 || !sample_size.is_multiple_of(batch_size) {
            return Err(Error::invalid(
                "batch_size",
                format!("must divide sample_size ({sample_size}), got {batch_size}"),
            ));
        }
        let mut rng = RngStream::new(seed, streams::GAME);
        let y = (0..sample_size).map(|_| rng.standard_normal()).collect();
        let z = (0..sample_size).map(|_| rng.standard_normal()).collect();
        Self::from_samples(variant, y, z, batch_size)
    }

    pub fn from_samples(
        variant: GanVariant,
        y: Vec<f64>,
        z: Vec<f64>,
        batch_size: usize,
    ) -> Result<Self> {
        if y.len() != z.len()
            || y.is_empty()
            || batch_size == 0
            || !y.len().is_multiple_of(batch_size)
        {
            return Err(Error::invalid(
                "samples",
                "y and z must have equal nonzero length divisible by batch_size",
            ));
        }
        if y.iter().chain(&z).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gan samples"));
        }
        Ok(Self {
            variant,
            y,
            z,
            batch: batch_size,
            label: format!("gan-{variant}"),
        })
    }

    pub fn variant(&self) -> GanVariant {
        self.variant
    }

    pub fn real_samples(&self) -> &[f64] {
        &self.y
    }

    pub fn latent_samples(&self) -> &[f64] {
        &self.z
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    fn has_phi0(&self) -> bool {
        self.variant != GanVariant::Wgan
    }

    /// Sample mean and population standard deviation of the real data.
    pub fn data_moments(&self) -> (f64, f64) {
        mean_sd(&self.y)
    }

    /// `|μ̂ − μ| + |σ̂ − σ|` against the real-data moments.
    pub fn distance_metric(&self, x: &Point) -> Result<f64> {
        check_point(self, x)?;
        let (m, s) = self.data_moments();
        Ok((m - x.x1()[0]).abs() + (s - x.x1()[1]).abs())
    }

    /// The generator whose samples `μ + σ z` match the first two empirical moments
    /// of `y`, with a constant-zero discriminator. Every variant is stationary there.
    pub fn moment_matched_point(&self) -> Point {
        let (my, sy) = mean_sd(&self.y);
        let (mz, sz) = mean_sd(&self.z);
        let sigma = sy / sz;
        let mu = my - sigma * mz;
        let d2 = self.d2();
        let mut data = vec![mu, sigma];
        data.extend(std::iter::repeat_n(0.0, d2));
        Point::from_flat(data, 2).expect("finite moments")
    }

    #[inline]
    fn phi(&self, x: &[f64]) -> (f64, f64, f64) {
        if self.has_phi0() {
            (x[2], x[3], x[4])
        } else {
            (0.0, x[2], x[3])
        }
    }

    #[inline]
    fn coeffs(&self, u: f64, r: f64) -> Coeffs {
        match self.variant {
            GanVariant::Wgan => Coeffs {
                b1p: -1.0,
                b1pp: 0.0,
                a2p: -1.0,
                a2pp: 0.0,
                b2p: 1.0,
                b2pp: 0.0,
            },
            GanVariant::SatGan => {
                let su = sigmoid(u);
                let sr = sigmoid(r);
                let cu = su * (1.0 - su);
                let cr = sr * (1.0 - sr);
                Coeffs {
                    b1p: -su,
                    b1pp: -cu,
                    a2p: -(1.0 - sr),
                    a2pp: cr,
                    b2p: su,
                    b2pp: cu,
                }
            }
            GanVariant::NsGan => {
                let su = sigmoid(u);
                let sr = sigmoid(r);
                let cu = su * (1.0 - su);
                let cr = sr * (1.0 - sr);
                Coeffs {
                    b1p: -(1.0 - su),
                    b1pp: cu,
                    a2p: -(1.0 - sr),
                    a2pp: cr,
                    b2p: su,
                    b2pp: cu,
                }
            }
        }
    }

    /// Writes `(∇φ u)` or `(∇φ r)` for input `t`: `(1, t, t²)`, or `(t, t²)` without `φ0`.
    #[inline]
    fn phi_grad(&self, t: f64, out: &mut [f64; 3]) -> usize {
        if self.has_phi0() {
            *out = [1.0, t, t * t];
            3
        } else {
            *out = [t, t * t, 0.0];
            2
        }
    }

    fn batch_range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.batch..(i + 1) * self.batch
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

impl Game for GaussianGanGame {
    fn n(&self) -> usize {
        self.y.len() / self.batch
    }

    fn d1(&self) -> usize {
        2
    }

    fn d2(&self) -> usize {
        if self.has_phi0() {
            3
        } else {
            2
        }
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn is_zero_sum(&self) -> bool {
        self.variant != GanVariant::NsGan
    }

    fn xi_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let (mu, sigma) = (x[0], x[1]);
        let (p0, p1, p2) = self.phi(x);
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut pu = [0.0; 3];
        let mut pr = [0.0; 3];
        let inv = 1.0 / self.batch as f64;
        for s in self.batch_range(i) {
            let (y, z) = (self.y[s], self.z[s]);
            let g = mu + sigma * z;
            let u = p0 + p1 * g + p2 * g * g;
            let r = p0 + p1 * y + p2 * y * y;
            let c = self.coeffs(u, r);
            let dg = p1 + 2.0 * p2 * g;
            out[0] += inv * c.b1p * dg;
            out[1] += inv * c.b1p * dg * z;
            let m = self.phi_grad(g, &mut pu);
            self.phi_grad(y, &mut pr);
            for k in 0..m {
                out[2 + k] += inv * (c.a2p * pr[k] + c.b2p * pu[k]);
            }
        }
    }

    fn jtv_add(&self, i: usize, x: &[f64], v: &[f64], scale: f64, out: &mut [f64]) {
        let (mu, sigma) = (x[0], x[1]);
        let (p0, p1, p2) = self.phi(x);
        let (vt0, vt1) = (v[0], v[1]);
        let vp = &v[2..];
        let mut pu = [0.0; 3];
        let mut pr = [0.0; 3];
        let w = scale / self.batch as f64;
        let off = usize::from(self.has_phi0());
        for s in self.batch_range(i) {
            let (y, z) = (self.y[s], self.z[s]);
            let g = mu + sigma * z;
            let u = p0 + p1 * g + p2 * g * g;
            let r = p0 + p1 * y + p2 * y * y;
            let c = self.coeffs(u, r);
            let dg = p1 + 2.0 * p2 * g;
            let m = self.phi_grad(g, &mut pu);
            self.phi_grad(y, &mut pr);

            // gu = ∇θ u = dg (1, z); M = ∂(∇θ u)/∂φ has rows (…, 1, 2G) and z·(…, 1, 2G)
            let tv = vt0 + z * vt1;
            let gu_v = dg * tv;
            let pu_v: f64 = (0..m).map(|k| pu[k] * vp[k]).sum();
            let pr_v: f64 = (0..m).map(|k| pr[k] * vp[k]).sum();
            let m_vp = vp[off] + 2.0 * g * vp[off + 1];

            let t_coef = c.b1pp * gu_v + c.b2pp * pu_v;
            let t_curv = c.b1p * 2.0 * p2 * tv + c.b2p * m_vp;
            out[0] += w * (t_coef * dg + t_curv);
            out[1] += w * (t_coef * dg * z + t_curv * z);

            let p_coef_u = c.b1pp * gu_v + c.b2pp * pu_v;
            let p_coef_r = c.a2pp * pr_v;
            for k in 0..m {
                out[2 + k] += w * (p_coef_u * pu[k] + p_coef_r * pr[k]);
            }
            out[2 + off] += w * c.b1p * tv;
            out[3 + off] += w * c.b1p * 2.0 * g * tv;
        }
    }

    fn player_losses(&self, i: usize, x: &[f64]) -> (f64, f64) {
        let (mu, sigma) = (x[0], x[1]);
        let (p0, p1, p2) = self.phi(x);
        let inv = 1.0 / self.batch as f64;
        let (mut l1, mut l2) = (0.0, 0.0);
        for s in self.batch_range(i) {
            let (y, z) = (self.y[s], self.z[s]);
            let g = mu + sigma * z;
            let u = p0 + p1 * g + p2 * g * g;
            let r = p0 + p1 * y + p2 * y * y;
            let (a, b) = match self.variant {
                GanVariant::Wgan => (r - u, u - r),
                GanVariant::SatGan => {
                    let v = log_sigmoid(r) + log_sigmoid(-u);
                    (v, -v)
                }
                GanVariant::NsGan => (
                    -log_sigmoid(u) - log_sigmoid(-r),
                    -log_sigmoid(r) - log_sigmoid(-u),
                ),
            };
            l1 += inv * a;
            l2 += inv * b;
        }
        (l1, l2)
    }
}
