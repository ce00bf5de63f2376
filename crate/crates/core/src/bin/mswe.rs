use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mswe::app::{run, sweep_gamma1, OutputConfig, RunConfig};
use mswe::init::total_mass;
use mswe::params::SchemeKind;
use mswe::verify::identity_suite;

#[derive(Parser)]
#[command(name = "mswe", version, about = "Modified shallow water equations in Lagrangian coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Step a configured problem and write CSV output.
    Run(RunArgs),
    /// Max velocity at the sweep time for several gamma1 values.
    Sweep(SweepArgs),
    /// Random-stencil check of the discrete conservation laws.
    Verify(VerifyArgs),
    /// Print the total mass of the initial state.
    MassCheck(ProblemArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    DamBreak,
    ColumnCollapse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Conservative,
    Naive,
}

#[derive(Args)]
struct ProblemArgs {
    /// TOML config file; takes precedence over --preset.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dam-break")]
    preset: Preset,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    u0: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    viscosity: Option<f64>,
}

impl ProblemArgs {
    fn config(&self) -> mswe::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => match self.preset {
                Preset::DamBreak => RunConfig::dam_break(),
                Preset::ColumnCollapse => RunConfig::column_collapse(),
            },
        };
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                Scheme::Conservative => SchemeKind::Conservative,
                Scheme::Naive => SchemeKind::Naive,
            };
        }
        if let Some(v) = self.gamma1 {
            cfg.problem.gamma1 = v;
        }
        if let Some(v) = self.u0 {
            cfg.problem.u0 = v;
        }
        if let Some(v) = self.tau {
            cfg.mesh.tau = v;
        }
        if let Some(v) = self.h {
            cfg.mesh.h = v;
        }
        if let Some(v) = self.t_end {
            cfg.mesh.t_end = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.solver.rel_tol = v;
        }
        if self.viscosity.is_some() {
            cfg.solver.viscosity = self.viscosity;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Extra snapshot file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Snapshot times for --out (default: t_end).
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Per-step energy and residual series.
    #[arg(long)]
    series: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// gamma1 values (default: the config's sweep list, else 0,5,10,15).
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Stencils per (law, bottom) case.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> mswe::Result<u8> {
    match cli.command {
        Command::Run(a) => {
            let mut cfg = a.problem.config()?;
            if let Some(p) = a.out {
                let times = if a.times.is_empty() { vec![cfg.mesh.t_end] } else { a.times };
                cfg.outputs.push(OutputConfig { path: cwd_relative(&cfg, p), times, stride: a.stride });
            }
            if let Some(p) = a.series {
                cfg.series = Some(cwd_relative(&cfg, p));
            }
            let summary = run(&cfg)?;
            let json = serde_json::json!({
                "scheme": summary.scheme,
                "nodes": summary.m_count,
                "steps": summary.steps,
                "energy_0": summary.h0,
                "e_r_final": summary.final_e_r(),
                "max_law_residual": summary.max_law_residual,
                "max_delta_eps": summary.max_delta_eps,
                "max_iterations": summary.max_iterations,
                "max_speed": summary.max_speed,
                "files": summary.files,
            });
            println!("{}", serde_json::to_string_pretty(&json).expect("json"));
            Ok(0)
        }
        Command::Sweep(a) => {
            let cfg = a.problem.config()?;
            cfg.validate()?;
            let values = if !a.values.is_empty() {
                a.values
            } else if let Some(sw) = &cfg.sweep {
                sw.gamma1.clone()
            } else {
                vec![0.0, 5.0, 10.0, 15.0]
            };
            let summary = sweep_gamma1(&cfg, &values)?;
            let out = a.out.or_else(|| cfg.sweep.as_ref().and_then(|s| s.path.as_ref().map(|p| cfg.resolve(p))));
            match out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(&p)?);
                    summary.write_csv(&mut w)?;
                    w.flush()?;
                }
                None => summary.write_csv(&mut std::io::stdout().lock())?,
            }
            Ok(if summary.all_ok() { 0 } else { 3 })
        }
        Command::Verify(a) => {
            let report = identity_suite(a.samples, a.seed, a.tolerance)?;
            for c in &report.cases {
                let mark = if c.max_defect <= report.tolerance { "ok" } else { "FAIL" };
                println!(
                    "{:<20} {:<20} {:>6} stencils  max defect {:.3e}  {mark}",
                    c.law, c.bottom, c.samples, c.max_defect
                );
            }
            println!("worst {:.3e} (tolerance {:e})", report.worst(), report.tolerance);
            Ok(if report.passed() { 0 } else { 4 })
        }
        Command::MassCheck(a) => {
            let cfg = a.config()?;
            let spec = cfg.problem.build(&cfg.base_dir)?;
            println!("total mass {:.6}", total_mass(&spec)?);
            Ok(0)
        }
    }
}

/// Command-line paths are relative to the working directory, not the config.
fn cwd_relative(cfg: &RunConfig, p: PathBuf) -> PathBuf {
    if p.is_absolute() || cfg.base_dir.as_os_str().is_empty() {
        p
    } else {
        std::env::current_dir().map(|d| d.join(&p)).unwrap_or(p)
    }
}
