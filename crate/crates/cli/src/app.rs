//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{GameKind, Settings};
use crate::csv_io::{fmt_f64, trace_lines, write_summaries, write_traces};
use crate::error::{CliError, Result};
use crate::experiment::{run_experiment, ExperimentResult, GameInstance, Metric, Summary};
use crate::presets::PRESETS;
use crate::svg::{write_plot, PlotOptions};
use crate::verify::{run_suite, Scope};

/// Files written by `run`, in write order.
pub const OUTPUT_FILES: [&str; 5] = [
    "config.txt",
    "traces.csv",
    "summary.csv",
    "distance.svg",
    "hamiltonian.svg",
];

#[derive(Debug, Parser)]
#[command(
    name = "hamgrad",
    version,
    about = "Stochastic Hamiltonian gradient methods for min-max games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write CSV traces, summaries and SVG plots.
    Run(RunArgs),
    /// Run the verification suite.
    Verify {
        #[arg(long, default_value = "fast", value_parser = ["fast", "all"])]
        scope: String,
    },
    /// Print the problem constants of a game.
    Constants(GameArgs),
    /// List the named presets.
    Presets,
}

#[derive(Debug, Args, Default)]
struct GameArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    interpolated: bool,
    #[arg(long)]
    game_seed: Option<String>,
    #[arg(long)]
    seed0: Option<String>,
    #[arg(long)]
    tau: Option<String>,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    switch_k: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "K")]
    restart_k: Option<String>,
    #[arg(long = "T")]
    restart_t: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    max_samples: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    record_every: Option<String>,
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GameArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        let mut cli = Settings::new();
        let pairs = [
            ("preset", &self.preset),
            ("game", &self.game),
            ("n", &self.n),
            ("d", &self.d),
            ("delta", &self.delta),
            ("game-seed", &self.game_seed),
            ("seed0", &self.seed0),
            ("tau", &self.tau),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cli.set(k, v.as_str())?;
            }
        }
        if self.interpolated {
            cli.set("interpolated", "true")?;
        }
        s.merge(&cli);
        Ok(s)
    }
}

impl RunArgs {
    fn is_empty(&self) -> bool {
        let g = &self.game;
        g.preset.is_none() && g.config.is_none() && g.game.is_none() && self.algo.is_none()
    }

    fn settings(&self) -> Result<Settings> {
        let mut s = self.game.settings()?;
        let mut cli = Settings::new();
        let out = self.out.as_ref().map(|p| p.display().to_string());
        let pairs = [
            ("algo", &self.algo),
            ("gamma", &self.gamma),
            ("schedule", &self.schedule),
            ("mu", &self.mu),
            ("switch-k", &self.switch_k),
            ("p", &self.p),
            ("lambda", &self.lambda),
            ("K", &self.restart_k),
            ("T", &self.restart_t),
            ("iters", &self.iters),
            ("max-samples", &self.max_samples),
            ("seeds", &self.seeds),
            ("record-every", &self.record_every),
            ("checkpoints", &self.checkpoints),
            ("output", &self.output),
            ("out", &out),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cli.set(k, v.as_str())?;
            }
        }
        s.merge(&cli);
        Ok(s)
    }
}

fn plot_options(res: &ExperimentResult, metric: Metric) -> PlotOptions {
    let gan = matches!(res.config.game.kind, GameKind::Gan(_));
    let y_label = match (metric, gan) {
        (Metric::Distance, false) => "||x - x*||² / ||x0 - x*||²",
        (Metric::Distance, true) => "moment distance / initial",
        (Metric::Hamiltonian, _) => "H(x) / H(x0)",
    };
    PlotOptions {
        log_x: false,
        log_y: true,
        title: format!("{} ({})", res.config.name, res.game_label),
        x_label: "samples seen".to_string(),
        y_label: y_label.to_string(),
    }
}

/// Writes every file of [`OUTPUT_FILES`] into `dir`.
pub fn write_outputs(res: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let cfg_path = dir.join("config.txt");
    std::fs::write(&cfg_path, res.config.describe()).map_err(|e| CliError::io(&cfg_path, e))?;
    write_traces(
        &dir.join("traces.csv"),
        &trace_lines(&res.traces, &res.game_label),
    )?;
    write_summaries(&dir.join("summary.csv"), &res.summaries)?;
    for (metric, file) in [
        (Metric::Distance, "distance.svg"),
        (Metric::Hamiltonian, "hamiltonian.svg"),
    ] {
        let set: Vec<Summary> = res
            .summaries
            .iter()
            .filter(|s| s.metric == metric)
            .cloned()
            .collect();
        write_plot(&dir.join(file), &set, &plot_options(res, metric))?;
    }
    Ok(())
}

fn print_final(res: &ExperimentResult, out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "{:<18} {:>12} {:>14} {:>14} {:>9}",
        "algo", "samples", "dist_sq_rel", "h_rel", "diverged"
    );
    let mut labels: Vec<&str> = Vec::new();
    for r in &res.config.runs {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    for label in labels {
        let d = res
            .summary(label, Metric::Distance)
            .and_then(|s| s.mean.last().copied());
        let h = res
            .summary(label, Metric::Hamiltonian)
            .and_then(|s| s.mean.last().copied());
        let diverged = res
            .traces_of(label)
            .filter(|t| t.flag == hamgrad_core::optimizers::RunFlag::Diverged)
            .count();
        let m = res.traces_of(label).count();
        let _ = writeln!(
            out,
            "{:<18} {:>12} {:>14.4e} {:>14.4e} {:>6}/{}",
            label,
            res.config.max_samples,
            d.unwrap_or(f64::NAN),
            h.unwrap_or(f64::NAN),
            diverged,
            m
        );
    }
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<()> {
    if args.is_empty() {
        return Err(CliError::Usage(
            "`run` needs --preset, --config, --game or --algo\n\nUsage: hamgrad run [--preset NAME | --config FILE] [OPTIONS]\nSee `hamgrad run --help`.".into(),
        ));
    }
    let cfg = args.settings()?.resolve()?;
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(&cfg.name));
    let res = run_experiment(&cfg)?;
    write_outputs(&res, &dir)?;
    print_final(&res, out);
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(())
}

fn cmd_constants(args: &GameArgs, out: &mut dyn Write) -> Result<()> {
    let settings = args.settings()?;
    let cfg = settings.resolve_game()?;
    let tau: usize = match settings.get("tau") {
        Some(v) => v
            .parse()
            .map_err(|_| CliError::config("tau", format!("cannot parse `{v}`")))?,
        None => 1,
    };
    let instance = GameInstance::build(&cfg.game, cfg.game_seed())?;
    let t = instance.theory(tau)?;
    let g = instance.game();
    let _ = writeln!(
        out,
        "game     {} (n = {}, d1 = {}, d2 = {})",
        g.label(),
        g.n(),
        g.d1(),
        g.d2()
    );
    let _ = writeln!(out, "mu_H     {}", fmt_f64(t.mu));
    let _ = writeln!(
        out,
        "L_H      {}{}",
        fmt_f64(t.l_h),
        if t.exact { "" } else { " (estimate)" }
    );
    let _ = writeln!(
        out,
        "L_max    {}{}",
        fmt_f64(t.l_max),
        if t.exact { "" } else { " (estimate)" }
    );
    match t.sigma_sq {
        Some(s) => {
            let _ = writeln!(out, "sigma^2  {} (tau = {tau})", fmt_f64(s));
        }
        None => {
            let _ = writeln!(out, "sigma^2  unavailable");
        }
    }
    let _ = writeln!(out, "L(tau)   {} (tau = {tau})", fmt_f64(t.l_es));
    let _ = writeln!(out, "rho(tau) {} (tau = {tau})", fmt_f64(t.rho));
    Ok(())
}

fn cmd_verify(scope: &str, out: &mut dyn Write) -> Result<()> {
    let scope: Scope = scope.parse()?;
    let scratch = std::env::temp_dir().join(format!("hamgrad-verify-{}", std::process::id()));
    let checks = run_suite(scope, &scratch, |c| {
        let _ = writeln!(out, "{}", c.line());
    })?;
    let _ = std::fs::remove_dir_all(&scratch);
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns the exit status.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Verify { scope } => cmd_verify(scope, out),
        Command::Constants(args) => cmd_constants(args, out),
        Command::Presets => {
            for (name, desc) in PRESETS {
                let _ = writeln!(out, "{name:<20} {desc}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
