//! Experiment configuration: flat `key = value` text, presets and CLI overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hamgrad_core::games::GanVariant;
use hamgrad_core::optimizers::{Algorithm, OutputOption};

use crate::error::{CliError, Result};
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    Bilinear,
    BilinearSpd,
    SuffBilinear,
    Gan(GanVariant),
}

impl GameKind {
    pub const ALL: [GameKind; 6] = [
        GameKind::Bilinear,
        GameKind::BilinearSpd,
        GameKind::SuffBilinear,
        GameKind::Gan(GanVariant::Wgan),
        GameKind::Gan(GanVariant::SatGan),
        GameKind::Gan(GanVariant::NsGan),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Bilinear => "bilinear",
            GameKind::BilinearSpd => "bilinear-spd",
            GameKind::SuffBilinear => "suff-bilinear",
            GameKind::Gan(GanVariant::Wgan) => "gan-wgan",
            GameKind::Gan(GanVariant::SatGan) => "gan-satgan",
            GameKind::Gan(GanVariant::NsGan) => "gan-nsgan",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        GameKind::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| CliError::config("game", format!("unknown game `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub kind: GameKind,
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub interpolated: bool,
    pub gan_samples: usize,
    pub gan_batch: usize,
    /// Seed of the game's data; defaults to the first run seed.
    pub seed: Option<u64>,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            kind: GameKind::Bilinear,
            n: 100,
            d: 100,
            delta: 7.0,
            interpolated: false,
            gan_samples: 10_000,
            gan_batch: 100,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    /// Constant `gamma` until `switch-k`, then `(2k+1)/((k+1)² mu)`.
    Switch,
    SwitchQsc,
    SwitchPl,
}

impl ScheduleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Switch => "switch",
            ScheduleKind::SwitchQsc => "switch-qsc",
            ScheduleKind::SwitchPl => "switch-pl",
        }
    }
}

impl FromStr for ScheduleKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        [
            ScheduleKind::Constant,
            ScheduleKind::Switch,
            ScheduleKind::SwitchQsc,
            ScheduleKind::SwitchPl,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| CliError::config("schedule", format!("unknown schedule `{s}`")))
    }
}

/// Step-size request; theory schedules take missing values from the game's constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub switch_k: Option<u64>,
}

impl ScheduleConfig {
    pub fn constant(gamma: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            gamma: Some(gamma),
            mu: None,
            switch_k: None,
        }
    }

    pub fn switch(gamma: f64, mu: f64, switch_k: u64) -> Self {
        Self {
            kind: ScheduleKind::Switch,
            gamma: Some(gamma),
            mu: Some(mu),
            switch_k: Some(switch_k),
        }
    }

    pub fn theory(kind: ScheduleKind) -> Self {
        Self {
            kind,
            gamma: None,
            mu: None,
            switch_k: None,
        }
    }
}

/// One algorithm of an experiment, run once per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub label: String,
    pub algorithm: Algorithm,
    pub schedule: ScheduleConfig,
    pub p: f64,
    pub lambda: f64,
    pub restart_k: u64,
    pub restart_t: u64,
    pub tau: usize,
    pub output: OutputOption,
}

impl RunSpec {
    pub fn new(algorithm: Algorithm, schedule: ScheduleConfig) -> Self {
        let output = match algorithm {
            Algorithm::LsvrhgRestart => OutputOption::UniformRandom,
            _ => OutputOption::Last,
        };
        Self {
            label: algorithm.as_str().to_string(),
            algorithm,
            schedule,
            p: 0.01,
            lambda: 10.0,
            restart_k: 1000,
            restart_t: u64::MAX,
            tau: 1,
            output,
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_restart(mut self, k: u64) -> Self {
        self.restart_k = k;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub game: GameConfig,
    pub runs: Vec<RunSpec>,
    pub seeds: u64,
    pub seed0: u64,
    /// Cost budget of every run; also the right end of the checkpoint grid.
    pub max_samples: u64,
    pub iters: Option<u64>,
    /// Number of log-spaced samples checkpoints.
    pub checkpoints: usize,
    /// Iteration stride of the raw trace; log-spaced samples checkpoints when unset.
    pub record_every: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".to_string(),
            game: GameConfig::default(),
            runs: Vec::new(),
            seeds: 1,
            seed0: 1,
            max_samples: 1_000_000,
            iters: None,
            checkpoints: 200,
            record_every: None,
            out: None,
        }
    }
}

/// Keys in application order. `preset` resets everything, `algo` selects the run
/// list, and run-level keys then apply to every selected run.
pub const KEYS: [&str; 26] = [
    "preset",
    "name",
    "game",
    "n",
    "d",
    "delta",
    "interpolated",
    "gan-samples",
    "gan-batch",
    "game-seed",
    "seeds",
    "seed0",
    "max-samples",
    "iters",
    "checkpoints",
    "record-every",
    "out",
    "algo",
    "schedule",
    "gamma",
    "mu",
    "switch-k",
    "p",
    "lambda",
    "K",
    "T",
];

const RUN_KEYS: [&str; 3] = ["tau", "output", "label"];

fn normalize_key(key: &str) -> String {
    let k = key.trim().replace('_', "-");
    match k.as_str() {
        "k" => "K".to_string(),
        "t" => "T".to_string(),
        _ => k,
    }
}

fn is_known(key: &str) -> bool {
    KEYS.contains(&key) || RUN_KEYS.contains(&key)
}

/// Ordered `key = value` settings; later insertions win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = normalize_key(key);
        if !is_known(&key) {
            return Err(CliError::config(key, "unknown key"));
        }
        self.values.insert(key, value.into().trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Values of `other` replace ours.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    /// Parses flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            s.set(k, v)?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Builds the experiment: the preset (or defaults), then every other key.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match self.get("preset") {
            Some(name) => presets::preset(name)
                .ok_or_else(|| CliError::config("preset", format!("unknown preset `{name}`")))?,
            None => ExperimentConfig::default(),
        };
        for key in KEYS.iter().skip(1).chain(RUN_KEYS.iter()) {
            if let Some(v) = self.get(key) {
                apply(&mut cfg, key, v)?;
            }
        }
        if cfg.runs.is_empty() {
            return Err(CliError::config("algo", "no algorithm selected"));
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

impl Settings {
    /// Game-level keys only, for commands that need a game but no runs.
    pub fn resolve_game(&self) -> Result<ExperimentConfig> {
        let mut cfg = match self.get("preset") {
            Some(name) => presets::preset(name)
                .ok_or_else(|| CliError::config("preset", format!("unknown preset `{name}`")))?,
            None => ExperimentConfig::default(),
        };
        for key in GAME_KEYS {
            if let Some(v) = self.get(key) {
                apply(&mut cfg, key, v)?;
            }
        }
        cfg.runs.clear();
        validate(&cfg)?;
        Ok(cfg)
    }
}

const GAME_KEYS: [&str; 10] = [
    "game",
    "n",
    "d",
    "delta",
    "interpolated",
    "gan-samples",
    "gan-batch",
    "game-seed",
    "seeds",
    "seed0",
];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    // accept 1e6-style integers
    if let Ok(x) = v.parse::<T>() {
        return Ok(x);
    }
    if let Ok(f) = v.parse::<f64>() {
        if f.fract() == 0.0 && f >= 0.0 {
            if let Ok(x) = format!("{f:.0}").parse::<T>() {
                return Ok(x);
            }
        }
    }
    Err(CliError::config(key, format!("cannot parse `{v}`")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::config(
            key,
            format!("expected true/false, got `{v}`"),
        )),
    }
}

fn apply(cfg: &mut ExperimentConfig, key: &str, v: &str) -> Result<()> {
    match key {
        "name" => cfg.name = v.to_string(),
        "game" => cfg.game.kind = v.parse()?,
        "n" => cfg.game.n = num(key, v)?,
        "d" => cfg.game.d = num(key, v)?,
        "delta" => cfg.game.delta = num(key, v)?,
        "interpolated" => cfg.game.interpolated = flag(key, v)?,
        "gan-samples" => cfg.game.gan_samples = num(key, v)?,
        "gan-batch" => cfg.game.gan_batch = num(key, v)?,
        "game-seed" => cfg.game.seed = Some(num(key, v)?),
        "seeds" => cfg.seeds = num(key, v)?,
        "seed0" => cfg.seed0 = num(key, v)?,
        "max-samples" => cfg.max_samples = num(key, v)?,
        "iters" => cfg.iters = Some(num(key, v)?),
        "checkpoints" => cfg.checkpoints = num(key, v)?,
        "record-every" => cfg.record_every = Some(num(key, v)?),
        "out" => cfg.out = Some(PathBuf::from(v)),
        "algo" => {
            let mut runs = Vec::new();
            for id in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let algorithm: Algorithm = id
                    .parse()
                    .map_err(|_| CliError::config("algo", format!("unknown algorithm `{id}`")))?;
                let matching: Vec<RunSpec> = cfg
                    .runs
                    .iter()
                    .filter(|r| r.algorithm == algorithm)
                    .cloned()
                    .collect();
                if matching.is_empty() {
                    runs.push(RunSpec::new(
                        algorithm,
                        ScheduleConfig::theory(ScheduleKind::Constant),
                    ));
                } else {
                    runs.extend(matching);
                }
            }
            cfg.runs = runs;
        }
        _ => {
            for run in &mut cfg.runs {
                apply_run(run, key, v)?;
            }
        }
    }
    Ok(())
}

fn apply_run(run: &mut RunSpec, key: &str, v: &str) -> Result<()> {
    match key {
        "schedule" => {
            let kind: ScheduleKind = v.parse()?;
            if kind != run.schedule.kind {
                run.schedule = ScheduleConfig::theory(kind);
            }
        }
        "gamma" => run.schedule.gamma = Some(num(key, v)?),
        "mu" => run.schedule.mu = Some(num(key, v)?),
        "switch-k" => run.schedule.switch_k = Some(num(key, v)?),
        "p" => run.p = num(key, v)?,
        "lambda" => run.lambda = num(key, v)?,
        "K" => run.restart_k = num(key, v)?,
        "T" => run.restart_t = num(key, v)?,
        "tau" => run.tau = num(key, v)?,
        "label" => run.label = v.to_string(),
        "output" => {
            run.output = match v {
                "last" => OutputOption::Last,
                "random" | "uniform-random" => OutputOption::UniformRandom,
                _ => {
                    return Err(CliError::config(
                        key,
                        format!("expected last/random, got `{v}`"),
                    ))
                }
            }
        }
        _ => return Err(CliError::config(key, "unknown key")),
    }
    Ok(())
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.seeds == 0 {
        return Err(CliError::config("seeds", "must be at least 1"));
    }
    if cfg.max_samples == 0 {
        return Err(CliError::config("max-samples", "must be positive"));
    }
    if cfg.checkpoints < 2 {
        return Err(CliError::config("checkpoints", "must be at least 2"));
    }
    if cfg.record_every == Some(0) {
        return Err(CliError::config("record-every", "must be positive"));
    }
    let g = &cfg.game;
    if g.n == 0 || g.d == 0 {
        return Err(CliError::config("n", "n and d must be positive"));
    }
    if !(g.delta > 0.0 && g.delta.is_finite()) {
        return Err(CliError::config("delta", "must be positive"));
    }
    if g.gan_batch == 0 || g.gan_samples == 0 || !g.gan_samples.is_multiple_of(g.gan_batch) {
        return Err(CliError::config("gan-batch", "must divide gan-samples"));
    }
    for r in &cfg.runs {
        if let Some(gm) = r.schedule.gamma {
            if !(gm > 0.0 && gm.is_finite()) {
                return Err(CliError::config("gamma", "must be positive"));
            }
        }
        if matches!(r.algorithm, Algorithm::Lsvrhg | Algorithm::LsvrhgRestart)
            && !(r.p > 0.0 && r.p <= 1.0)
        {
            return Err(CliError::config(
                "p",
                format!("must lie in (0, 1], got {}", r.p),
            ));
        }
        if !(r.lambda >= 0.0) {
            return Err(CliError::config("lambda", "must be non-negative"));
        }
        if r.restart_k == 0 || r.restart_t == 0 {
            return Err(CliError::config("K", "K and T must be at least 1"));
        }
        if r.tau == 0 {
            return Err(CliError::config("tau", "must be at least 1"));
        }
        if r.schedule.kind == ScheduleKind::Switch
            && (r.schedule.gamma.is_none()
                || r.schedule.mu.is_none()
                || r.schedule.switch_k.is_none())
        {
            return Err(CliError::config(
                "schedule",
                "`switch` needs gamma, mu and switch-k",
            ));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Run seeds `seed0, …, seed0 + seeds − 1`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|s| self.seed0 + s).collect()
    }

    pub fn game_seed(&self) -> u64 {
        self.game.seed.unwrap_or(self.seed0)
    }

    /// Resolved configuration as `key = value` text (one block per run).
    pub fn describe(&self) -> String {
        let g = &self.game;
        let mut s = format!(
            "name = {}\ngame = {}\nn = {}\nd = {}\ndelta = {}\ninterpolated = {}\ngan-samples = {}\ngan-batch = {}\ngame-seed = {}\nseeds = {}\nseed0 = {}\nmax-samples = {}\ncheckpoints = {}\n",
            self.name,
            g.kind,
            g.n,
            g.d,
            g.delta,
            g.interpolated,
            g.gan_samples,
            g.gan_batch,
            self.game_seed(),
            self.seeds,
            self.seed0,
            self.max_samples,
            self.checkpoints
        );
        if let Some(it) = self.iters {
            s.push_str(&format!("iters = {it}\n"));
        }
        if let Some(r) = self.record_every {
            s.push_str(&format!("record-every = {r}\n"));
        }
        for r in &self.runs {
            s.push_str(&format!(
                "\n# run {}\nalgo = {}\nschedule = {}\n",
                r.label,
                r.algorithm,
                r.schedule.kind.as_str()
            ));
            if let Some(v) = r.schedule.gamma {
                s.push_str(&format!("gamma = {v}\n"));
            }
            if let Some(v) = r.schedule.mu {
                s.push_str(&format!("mu = {v}\n"));
            }
            if let Some(v) = r.schedule.switch_k {
                s.push_str(&format!("switch-k = {v}\n"));
            }
            match r.algorithm {
                Algorithm::Lsvrhg => s.push_str(&format!("p = {}\n", r.p)),
                Algorithm::LsvrhgRestart => {
                    s.push_str(&format!("p = {}\nK = {}\n", r.p, r.restart_k))
                }
                Algorithm::Co => s.push_str(&format!("lambda = {}\n", r.lambda)),
                Algorithm::Shgd if r.tau > 1 => s.push_str(&format!("tau = {}\n", r.tau)),
                _ => {}
            }
        }
        s
    }
}
