use std::fmt;

use crate::error::{Error, Result};

/// Origin of a constant-then-decreasing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchKind {
    /// `γ = 1/(2𝓛)` until `4⌈𝓛/μ⌉`.
    QuasiStronglyConvex,
    /// `γ = μ/(L_H(μ + 2ρ))` until `⌈2(L_H/μ)(1 + 2ρ/μ)⌉`.
    Pl,
    /// Hand-picked constant phase, e.g. a tuned preset.
    Custom,
}

/// Step-size policy `k ↦ γ^k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `gamma0` for `k ≤ switch_k`, then `(2k+1) / ((k+1)² μ)`.
    Switching {
        kind: SwitchKind,
        gamma0: f64,
        mu: f64,
        switch_k: u64,
    },
    /// Explicit values; the last one repeats forever.
    Table(Vec<f64>),
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl Schedule {
    pub fn constant(gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Schedule::Constant(gamma))
    }

    pub fn switching(gamma0: f64, mu: f64, switch_k: u64) -> Result<Self> {
        positive("gamma", gamma0)?;
        positive("mu", mu)?;
        Ok(Schedule::Switching {
            kind: SwitchKind::Custom,
            gamma0,
            mu,
            switch_k,
        })
    }

    /// `1/(2𝓛)` until `4⌈𝓛/μ⌉`, then `(2k+1)/((k+1)²μ)`.
    pub fn switching_qsc(l_es: f64, mu: f64) -> Result<Self> {
        positive("L", l_es)?;
        positive("mu", mu)?;
        Ok(Schedule::Switching {
            kind: SwitchKind::QuasiStronglyConvex,
            gamma0: 0.5 / l_es,
            mu,
            switch_k: 4 * (l_es / mu).ceil() as u64,
        })
    }

    /// `μ/(L_H(μ + 2ρ))` until `⌈k*⌉` with `k* = 2(L_H/μ)(1 + 2ρ/μ)`.
    pub fn switching_pl(l_h: f64, mu: f64, rho: f64) -> Result<Self> {
        positive("L_H", l_h)?;
        positive("mu", mu)?;
        if !(rho >= 0.0) {
            return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
        }
        Ok(Schedule::Switching {
            kind: SwitchKind::Pl,
            gamma0: mu / (l_h * (mu + 2.0 * rho)),
            mu,
            switch_k: (2.0 * (l_h / mu) * (1.0 + 2.0 * rho / mu)).ceil() as u64,
        })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("table", "needs at least one step-size"));
        }
        for &v in &values {
            positive("gamma", v)?;
        }
        Ok(Schedule::Table(values))
    }

    /// Returns a copy with `μ` and/or the switch point replaced.
    pub fn with_overrides(&self, mu: Option<f64>, switch_k: Option<u64>) -> Result<Self> {
        match self {
            Schedule::Switching {
                kind,
                gamma0,
                mu: m,
                switch_k: s,
            } => {
                let mu = mu.unwrap_or(*m);
                positive("mu", mu)?;
                Ok(Schedule::Switching {
                    kind: *kind,
                    gamma0: *gamma0,
                    mu,
                    switch_k: switch_k.unwrap_or(*s),
                })
            }
            other if mu.is_none() && switch_k.is_none() => Ok(other.clone()),
            _ => Err(Error::invalid(
                "schedule",
                "mu / switch_k apply to switching schedules only",
            )),
        }
    }

    #[inline]
    pub fn gamma_at(&self, k: u64) -> f64 {
        match self {
            Schedule::Constant(g) => *g,
            Schedule::Switching {
                gamma0,
                mu,
                switch_k,
                ..
            } => {
                if k <= *switch_k {
                    *gamma0
                } else {
                    decreasing_step(k, *mu)
                }
            }
            Schedule::Table(v) => v[(k as usize).min(v.len() - 1)],
        }
    }

    /// First iteration of the decreasing phase, if any.
    pub fn switch_point(&self) -> Option<u64> {
        match self {
            Schedule::Switching { switch_k, .. } => Some(switch_k + 1),
            _ => None,
        }
    }
}

/// `(2k+1) / ((k+1)² μ)`.
#[inline]
pub fn decreasing_step(k: u64, mu: f64) -> f64 {
    let k = k as f64;
    (2.0 * k + 1.0) / ((k + 1.0) * (k + 1.0) * mu)
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(g) => write!(f, "constant({g})"),
            Schedule::Switching {
                kind,
                gamma0,
                mu,
                switch_k,
            } => {
                let name = match kind {
                    SwitchKind::QuasiStronglyConvex => "switch-qsc",
                    SwitchKind::Pl => "switch-pl",
                    SwitchKind::Custom => "switch",
                };
                write!(f, "{name}(gamma0={gamma0}, mu={mu}, switch_k={switch_k})")
            }
            Schedule::Table(v) => write!(f, "table({} values)", v.len()),
        }
    }
}
