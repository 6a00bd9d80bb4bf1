//! Named experiment setups, with the tuned hyperparameters of the reference
//! experiments and theory-derived alternatives.

use hamgrad_core::games::GanVariant;
use hamgrad_core::optimizers::{decreasing_step, Algorithm};

use crate::config::{
    ExperimentConfig, GameConfig, GameKind, RunSpec, ScheduleConfig, ScheduleKind,
};

pub const PRESETS: [(&str, &str); 9] = [
    (
        "fig1-bilinear",
        "stochastic bilinear game, n = d = 100, tuned step-sizes, 10 seeds",
    ),
    (
        "fig1-suff-bilinear",
        "sufficiently-bilinear game, delta = 7, tuned step-sizes, 10 seeds",
    ),
    (
        "bilinear-theory",
        "stochastic bilinear game with theory step-sizes",
    ),
    (
        "bilinear-spd",
        "bilinear game with symmetric positive-definite couplings",
    ),
    ("interpolated", "bilinear game with b_i = c_i = 0"),
    ("interpolated-spd", "SPD bilinear game with b_i = c_i = 0"),
    ("gan-wgan", "Gaussian WGAN, 10K samples, batch 100"),
    (
        "gan-satgan",
        "Gaussian saturating GAN, 10K samples, batch 100",
    ),
    (
        "gan-nsgan",
        "Gaussian non-saturating GAN, 10K samples, batch 100",
    ),
];

const DECREASING_MU: f64 = 1.0 / 2500.0;

fn shgd_decreasing(gamma: f64, switch_k: u64) -> RunSpec {
    RunSpec::new(
        Algorithm::Shgd,
        ScheduleConfig::switch(gamma, DECREASING_MU, switch_k),
    )
    .labelled("shgd-decreasing")
}

/// Last iteration at which `(2k+1)/((k+1)² mu)` still exceeds `gamma`.
pub fn continuous_switch(gamma: f64, mu: f64) -> u64 {
    let (mut lo, mut hi) = (0u64, 1u64 << 40);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if decreasing_step(mid + 1, mu) <= gamma {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn bilinear_runs() -> Vec<RunSpec> {
    vec![
        RunSpec::new(Algorithm::Sgda, ScheduleConfig::constant(0.5)),
        RunSpec::new(Algorithm::Shgd, ScheduleConfig::constant(0.5)).labelled("shgd-constant"),
        shgd_decreasing(0.5, 10_000),
        RunSpec::new(Algorithm::ShgdBiased, ScheduleConfig::constant(0.5)),
        RunSpec::new(Algorithm::Co, ScheduleConfig::constant(0.01)),
        RunSpec::new(Algorithm::Lsvrhg, ScheduleConfig::constant(10.0)),
    ]
}

fn base(name: &str, kind: GameKind) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        game: GameConfig {
            kind,
            ..GameConfig::default()
        },
        seeds: 10,
        seed0: 1,
        max_samples: 5_000_000,
        checkpoints: 200,
        ..ExperimentConfig::default()
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig1-bilinear" => ExperimentConfig {
            runs: bilinear_runs(),
            ..base(name, GameKind::Bilinear)
        },
        "fig1-suff-bilinear" => ExperimentConfig {
            runs: vec![
                RunSpec::new(Algorithm::Shgd, ScheduleConfig::constant(0.02))
                    .labelled("shgd-constant"),
                // the decreasing phase starts once its step drops below 0.02
                shgd_decreasing(0.02, continuous_switch(0.02, DECREASING_MU)),
                RunSpec::new(Algorithm::ShgdBiased, ScheduleConfig::constant(0.01)),
                RunSpec::new(Algorithm::Lsvrhg, ScheduleConfig::constant(0.1)),
                RunSpec::new(Algorithm::LsvrhgRestart, ScheduleConfig::constant(0.1))
                    .with_restart(1000),
            ],
            ..base(name, GameKind::SuffBilinear)
        },
        "bilinear-theory" => ExperimentConfig {
            runs: vec![
                RunSpec::new(
                    Algorithm::Shgd,
                    ScheduleConfig::theory(ScheduleKind::Constant),
                )
                .labelled("shgd-constant"),
                RunSpec::new(
                    Algorithm::Shgd,
                    ScheduleConfig::theory(ScheduleKind::SwitchQsc),
                )
                .labelled("shgd-switch-qsc"),
                RunSpec::new(
                    Algorithm::Shgd,
                    ScheduleConfig::theory(ScheduleKind::SwitchPl),
                )
                .labelled("shgd-switch-pl"),
            ],
            ..base(name, GameKind::Bilinear)
        },
        "bilinear-spd" => ExperimentConfig {
            runs: vec![
                RunSpec::new(
                    Algorithm::Shgd,
                    ScheduleConfig::theory(ScheduleKind::Constant),
                )
                .labelled("shgd-constant"),
                RunSpec::new(
                    Algorithm::Lsvrhg,
                    ScheduleConfig::theory(ScheduleKind::Constant),
                ),
            ],
            max_samples: 1_000_000,
            ..base(name, GameKind::BilinearSpd)
        },
        "interpolated" => {
            let mut cfg = ExperimentConfig {
                runs: vec![
                    RunSpec::new(Algorithm::Shgd, ScheduleConfig::constant(0.5))
                        .labelled("shgd-constant"),
                    RunSpec::new(Algorithm::ShgdBiased, ScheduleConfig::constant(0.5)),
                    RunSpec::new(Algorithm::Lsvrhg, ScheduleConfig::constant(10.0)),
                ],
                max_samples: 2_000_000,
                ..base(name, GameKind::Bilinear)
            };
            cfg.game.interpolated = true;
            cfg
        }
        "interpolated-spd" => {
            let mut cfg = ExperimentConfig {
                runs: vec![
                    RunSpec::new(
                        Algorithm::Shgd,
                        ScheduleConfig::theory(ScheduleKind::Constant),
                    )
                    .labelled("shgd-constant"),
                    RunSpec::new(
                        Algorithm::Lsvrhg,
                        ScheduleConfig::theory(ScheduleKind::Constant),
                    ),
                ],
                max_samples: 1_000_000,
                ..base(name, GameKind::BilinearSpd)
            };
            cfg.game.interpolated = true;
            cfg
        }
        "gan-wgan" | "gan-satgan" | "gan-nsgan" => {
            let variant = match name {
                "gan-wgan" => GanVariant::Wgan,
                "gan-satgan" => GanVariant::SatGan,
                _ => GanVariant::NsGan,
            };
            ExperimentConfig {
                runs: vec![
                    RunSpec::new(Algorithm::Co, ScheduleConfig::constant(0.02)),
                    RunSpec::new(Algorithm::Sgda, ScheduleConfig::constant(0.02)),
                    RunSpec::new(Algorithm::Shgd, ScheduleConfig::constant(0.02)),
                    RunSpec::new(Algorithm::Lsvrhg, ScheduleConfig::constant(0.02)),
                ],
                max_samples: 1_000_000,
                ..base(name, GameKind::Gan(variant))
            }
        }
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            assert!(!cfg.runs.is_empty(), "{name}");
        }
        assert!(preset("fig2").is_none());
    }

    #[test]
    fn bilinear_table_values() {
        let cfg = preset("fig1-bilinear").unwrap();
        let lsvrhg = cfg
            .runs
            .iter()
            .find(|r| r.algorithm == Algorithm::Lsvrhg)
            .unwrap();
        assert_eq!((lsvrhg.schedule.gamma, lsvrhg.p), (Some(10.0), 0.01));
        let dec = cfg
            .runs
            .iter()
            .find(|r| r.label == "shgd-decreasing")
            .unwrap();
        assert_eq!(
            dec.schedule,
            ScheduleConfig::switch(0.5, 1.0 / 2500.0, 10_000)
        );
    }

    #[test]
    fn continuous_switch_meets_the_constant_step() {
        let k = continuous_switch(0.02, DECREASING_MU);
        assert!(decreasing_step(k, DECREASING_MU) > 0.02);
        assert!(decreasing_step(k + 1, DECREASING_MU) <= 0.02);
        assert_eq!(k, 249_998);
        assert!(continuous_switch(0.5, DECREASING_MU) < 10_001);
    }
}
