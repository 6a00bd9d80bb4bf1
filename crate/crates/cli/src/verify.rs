//! The verification suite behind `hamgrad verify`.

use std::path::Path;

use crate::checks::{self, Check};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Estimator, constants and identity checks; well under a minute.
    Fast,
    /// Also the multi-seed convergence and reproduction runs.
    All,
}

impl std::str::FromStr for Scope {
    type Err = crate::CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Scope::Fast),
            "all" => Ok(Scope::All),
            _ => Err(crate::CliError::config(
                "scope",
                format!("expected fast or all, got `{s}`"),
            )),
        }
    }
}

/// Runs every check of `scope`; `scratch` receives the determinism outputs.
pub fn run_suite(
    scope: Scope,
    scratch: &Path,
    mut report: impl FnMut(&Check),
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |c: Check| {
        report(&c);
        out.push(c);
    };
    for c in checks::sign_conventions()? {
        push(c);
    }
    push(checks::estimator_unbiasedness());
    push(checks::bilinear_quadratic_form());
    push(checks::hgd_contraction());
    push(checks::cost_law());
    push(checks::suff_bilinear_condition());
    push(checks::second_moment_bounds());
    if scope == Scope::Fast {
        push(checks::gan_properties(false));
        return Ok(out);
    }
    push(checks::constant_step_envelope());
    push(checks::switching_sublinear_rate());
    push(checks::bilinear_figure());
    push(checks::suff_bilinear_figure());
    push(checks::interpolated_linear_rate());
    push(checks::gan_properties(true));
    push(checks::determinism(scratch));
    Ok(out)
}
