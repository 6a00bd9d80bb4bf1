use std::f64::consts::E;

/// Convergence bounds that can be compared with measured multi-seed means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Constant step, quasi-strongly convex: `(1−γμ)^k ‖x⁰−x*‖² + 2γσ²/μ`.
    QscConstant,
    /// Switching step, quasi-strongly convex: `8σ²/(μ²k) + 16⌈𝒦⌉²/(e²k²) ‖x⁰−x*‖²`.
    QscSwitch,
    /// Constant step, PL: `(1−γμ)^k H(x⁰) + L_H γσ²/μ`.
    PlConstant,
    /// Switching step, PL: `4L_Hσ²/(μ²k) + (k*)²/(k²e²) H(x⁰)`.
    PlSwitch,
}

/// Constants a bound is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub mu: f64,
    pub l_h: f64,
    /// Expected-smoothness constant `𝓛`.
    pub l_es: f64,
    /// Expected-residual constant `ρ`.
    pub rho: f64,
    pub sigma_sq: f64,
    /// Constant step-size (constant-step bounds).
    pub gamma: f64,
}

impl TheoryConstants {
    /// `⌈𝓛/μ⌉`
    pub fn kappa_ceil(&self) -> f64 {
        (self.l_es / self.mu).ceil()
    }

    /// `k* = 2(L_H/μ)(1 + 2ρ/μ)`
    pub fn k_star(&self) -> f64 {
        2.0 * (self.l_h / self.mu) * (1.0 + 2.0 * self.rho / self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    /// `k` or `γ` lies outside the bound's hypotheses.
    NotApplicable,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            Bound::NotApplicable => None,
        }
    }
}

const GAMMA_SLACK: f64 = 1.0 + 1e-12;

/// Right-hand side of bound `id` at iteration `k`; `initial` is `‖x⁰−x*‖²`
/// (quasi-strongly convex bounds) or `H(x⁰)` (PL bounds).
pub fn convergence_bound(id: BoundKind, c: &TheoryConstants, k: u64, initial: f64) -> Bound {
    let kf = k as f64;
    match id {
        BoundKind::QscConstant => {
            if !(c.gamma > 0.0) || c.gamma > GAMMA_SLACK * 0.5 / c.l_es {
                return Bound::NotApplicable;
            }
            Bound::Value(
                contraction(c.gamma * c.mu, k) * initial + 2.0 * c.gamma * c.sigma_sq / c.mu,
            )
        }
        BoundKind::QscSwitch => {
            let kc = c.kappa_ceil();
            if kf < 4.0 * kc || k == 0 {
                return Bound::NotApplicable;
            }
            Bound::Value(
                8.0 * c.sigma_sq / (c.mu * c.mu * kf)
                    + 16.0 * kc * kc / (E * E * kf * kf) * initial,
            )
        }
        BoundKind::PlConstant => {
            let limit = c.mu / (c.l_h * (c.mu + 2.0 * c.rho));
            if !(c.gamma > 0.0) || c.gamma > GAMMA_SLACK * limit {
                return Bound::NotApplicable;
            }
            Bound::Value(
                contraction(c.gamma * c.mu, k) * initial + c.l_h * c.gamma * c.sigma_sq / c.mu,
            )
        }
        BoundKind::PlSwitch => {
            let ks = c.k_star();
            if kf < ks.ceil() || k == 0 {
                return Bound::NotApplicable;
            }
            Bound::Value(
                4.0 * c.l_h * c.sigma_sq / (c.mu * c.mu * kf)
                    + ks * ks / (kf * kf * E * E) * initial,
            )
        }
    }
}

/// `(1 − a)^k`, computed through `exp(k ln(1 − a))`.
fn contraction(a: f64, k: u64) -> f64 {
    ((k as f64) * (-a).ln_1p()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> TheoryConstants {
        TheoryConstants {
            mu: 1e-4,
            l_h: 1e-4,
            l_es: 1.0,
            rho: 1.0,
            sigma_sq: 0.0,
            gamma: 0.5,
        }
    }

    #[test]
    fn t1_noise_free_is_pure_contraction() {
        let c = standard();
        let b = convergence_bound(BoundKind::QscConstant, &c, 1000, 2.0)
            .value()
            .unwrap();
        assert!((b - 2.0 * (1.0f64 - 0.5e-4).powi(1000)).abs() < 1e-12);
    }

    #[test]
    fn t1_neighbourhood_term() {
        let c = TheoryConstants {
            sigma_sq: 0.03,
            ..standard()
        };
        let b = convergence_bound(BoundKind::QscConstant, &c, u64::MAX / 2, 1.0)
            .value()
            .unwrap();
        assert!((b - 2.0 * 0.5 * 0.03 / 1e-4).abs() < 1e-9);
    }

    #[test]
    fn t1_rejects_large_step() {
        let c = TheoryConstants {
            gamma: 0.6,
            ..standard()
        };
        assert_eq!(
            convergence_bound(BoundKind::QscConstant, &c, 10, 1.0),
            Bound::NotApplicable
        );
    }

    #[test]
    fn t2_validity_and_second_term() {
        let c = standard();
        assert_eq!(
            convergence_bound(BoundKind::QscSwitch, &c, 39_999, 1.0),
            Bound::NotApplicable
        );
        let b = convergence_bound(BoundKind::QscSwitch, &c, 40_000, 3.0)
            .value()
            .unwrap();
        let expect = 16.0 * 1e8 / (E * E * 1.6e9) * 3.0;
        assert!((b - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn t5_validity() {
        let c = TheoryConstants {
            mu: 1.0,
            l_h: 1.0,
            rho: 0.5,
            ..standard()
        };
        assert!((c.k_star() - 4.0).abs() < 1e-15);
        assert_eq!(
            convergence_bound(BoundKind::PlSwitch, &c, 3, 1.0),
            Bound::NotApplicable
        );
        assert!(convergence_bound(BoundKind::PlSwitch, &c, 4, 1.0)
            .value()
            .is_some());
    }
}
