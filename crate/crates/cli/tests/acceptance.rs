//! One PASS/FAIL line per acceptance criterion, with its runtime limit.

use hamgrad::checks::{self, Check};

fn limited(n: usize, limit: f64, mut check: Check) -> Check {
    if check.seconds > limit {
        check.pass = false;
        check
            .detail
            .push_str(&format!("; over the {limit:.0}s limit"));
    }
    check.name = format!("criterion {n:>2} {}", check.name);
    check
}

fn main() {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(f64, Box<dyn Fn() -> Check>)> = vec![
        (5.0, Box::new(checks::estimator_unbiasedness)),
        (5.0, Box::new(checks::bilinear_quadratic_form)),
        (1.0, Box::new(checks::hgd_contraction)),
        (120.0, Box::new(checks::constant_step_envelope)),
        (120.0, Box::new(checks::switching_sublinear_rate)),
        (120.0, Box::new(checks::bilinear_figure)),
        (30.0, Box::new(checks::cost_law)),
        (30.0, Box::new(checks::suff_bilinear_condition)),
        (180.0, Box::new(checks::suff_bilinear_figure)),
        (60.0, Box::new(checks::interpolated_linear_rate)),
        (180.0, Box::new(|| checks::gan_properties(true))),
        (5.0, Box::new(checks::second_moment_bounds)),
        (120.0, Box::new(|| checks::determinism(scratch.path()))),
    ];
    let mut failed = 0;
    for (i, (limit, f)) in criteria.iter().enumerate() {
        let c = limited(i + 1, *limit, f());
        println!("{}", c.line());
        failed += usize::from(!c.pass);
    }
    let signs = checks::sign_conventions().expect("sign convention games build");
    for c in &signs {
        println!("{}", c.line());
        failed += usize::from(!c.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance checks failed");
        std::process::exit(1);
    }
}
