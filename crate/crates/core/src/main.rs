use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sliding_bed::error::{Result, SimError};
use sliding_bed::harness::*;

#[derive(Parser)]
#[command(
    name = "sliding-bed",
    version,
    about = "Solitary waves over a sliding solid in a 1D Boussinesq tank"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file, or the name of a preset.
    config: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run even when dt/dx exceeds the stability bound.
    #[arg(long)]
    override_cfl: bool,
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Space,
    Time,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Relative,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisplacementMode {
    Sweep,
    Single,
    Train,
    Ablation,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its time series.
    Run(Common),
    /// Refinement study along one axis.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_enum, default_value = "relative")]
        mode: ModeArg,
        /// Coarsest step of the ladder; defaults to 1 in space and 0.01 in time.
        #[arg(long)]
        coarsest: Option<f64>,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Step of the reference run in relative mode.
        #[arg(long)]
        reference: Option<f64>,
    },
    /// Outgoing over incoming amplitude for flat, fixed and sliding bottoms.
    Amplitude {
        #[command(flatten)]
        common: Common,
        /// Incoming amplitudes in meters.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
        amplitudes: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.5")]
        frictions: Vec<f64>,
    },
    /// Breaking time and crest position over fixed and sliding solids.
    Breaking {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7,8")]
        amplitudes: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.5")]
        frictions: Vec<f64>,
    },
    /// Solid displacement experiments.
    Displacement {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: DisplacementMode,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.0015,0.002,0.0025,0.003")]
        frictions: Vec<f64>,
        /// Waves in the train.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Crest passages to watch in the train.
        #[arg(long, default_value_t = 8)]
        passes: usize,
    },
    /// List the named presets.
    Presets,
    /// Print a preset as JSON.
    Preset { name: String },
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let path = Path::new(&common.config);
    let mut cfg = if path.exists() {
        ScenarioConfig::from_json(&fs::read_to_string(path)?)?
    } else {
        preset(&common.config)?
    };
    cfg.override_cfl |= common.override_cfl;
    if let Some(s) = common.snapshot_stride {
        cfg.snapshot_stride = s;
    }
    Ok(cfg)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.5}"))
}

fn report_run(r: &ScenarioResult) {
    let d = &r.diagnostics;
    println!(
        "steps {}  final X {:.6e}  max |X| {:.6e}  amplitude ratio {}",
        d.steps,
        d.final_x,
        d.max_abs_x,
        opt(d.amplitude_ratio)
    );
    if let Some(why) = &d.halt_reason {
        println!("halted at t = {:.4}: {why}", d.halt_time.unwrap_or(f64::NAN));
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets => {
            for (name, what) in PRESETS {
                println!("{name:20} {what}");
            }
        }
        Command::Preset { name } => println!("{}", preset(&name)?.to_json()?),
        Command::Run(common) => {
            let cfg = load(&common)?;
            let r = run_scenario(&cfg)?;
            write_outputs(&r, &common.out)?;
            report_run(&r);
        }
        Command::Converge {
            common,
            axis,
            mode,
            coarsest,
            levels,
            reference,
        } => {
            let cfg = load(&common)?;
            let axis = match axis {
                AxisArg::Space => Axis::Space,
                AxisArg::Time => Axis::Time,
            };
            let mode = match mode {
                ModeArg::Exact => ConvergenceMode::Exact,
                ModeArg::Relative => ConvergenceMode::Relative,
            };
            let top = coarsest.unwrap_or(if axis == Axis::Space { 1.0 } else { 0.01 });
            let mut ladder = Ladder::halving(axis, mode, top, levels);
            ladder.reference = reference;
            let report = convergence_study(&cfg, &ladder)?;
            write_rows(&report.levels, &common.out.join("levels.csv"))?;
            write_json(&report, &common.out.join("convergence.json"))?;
            for l in &report.levels {
                println!("{:<12.6e} L2 {:.4e}  Linf {:.4e}", l.step, l.l2, l.linf);
            }
            println!(
                "slope L2 {:.3}  Linf {:.3}  monotone {}",
                report.slope_l2, report.slope_linf, report.monotone
            );
            if !report.valid() {
                return Err(SimError::InvalidStudy("errors do not decrease along the ladder".into()));
            }
        }
        Command::Amplitude {
            common,
            amplitudes,
            frictions,
        } => {
            let rows = amplitude_study(&load(&common)?, &amplitudes, &frictions)?;
            write_json(&rows, &common.out.join("amplitude.json"))?;
            for r in &rows {
                let outcome = match (&r.breaking, r.ratio) {
                    (Some(b), _) => format!("breaks at t = {:.3}", b.time),
                    (None, Some(q)) => format!("ratio {q:.5}"),
                    (None, None) => r.halt_reason.clone().unwrap_or_else(|| "not measured".into()),
                };
                println!("a = {:<5} {:<14} {outcome}", r.a_surf, r.bottom.label());
            }
        }
        Command::Breaking {
            common,
            amplitudes,
            frictions,
        } => {
            let rows = breaking_study(&load(&common)?, &amplitudes, &frictions)?;
            write_json(&rows, &common.out.join("breaking.json"))?;
            for r in &rows {
                match &r.breaking {
                    Some(b) => println!(
                        "a = {:<5} {:<14} t = {:.3}  crest {:+.4} from the solid",
                        r.a_surf,
                        r.bottom.label(),
                        b.time,
                        r.crest_from_solid.unwrap_or(f64::NAN)
                    ),
                    None => println!("a = {:<5} {:<14} no breaking", r.a_surf, r.bottom.label()),
                }
            }
        }
        Command::Displacement {
            common,
            mode,
            frictions,
            count,
            passes,
        } => {
            let cfg = load(&common)?;
            match mode {
                DisplacementMode::Sweep => {
                    let (rows, runs) = friction_sweep(&cfg, &frictions)?;
                    for (row, run) in rows.iter().zip(&runs) {
                        write_outputs(run, &common.out.join(format!("c_fric_{}", row.c_fric)))?;
                        println!(
                            "c_fric {:<8} max |X| {:.6e}  final X {:.6e}",
                            row.c_fric, row.max_abs_x, row.final_x
                        );
                    }
                    write_rows(&rows, &common.out.join("sweep.csv"))?;
                }
                DisplacementMode::Single => {
                    let r = run_scenario(&fit_tank(&cfg)?)?;
                    write_outputs(&r, &common.out)?;
                    report_run(&r);
                    let d = &r.diagnostics;
                    println!("final / max displacement {:.4}", d.final_x.abs() / d.max_abs_x);
                }
                DisplacementMode::Train => {
                    let (report, run) = wave_train(&cfg, count, passes)?;
                    write_outputs(&run, &common.out)?;
                    write_json(&report, &common.out.join("train.json"))?;
                    for (k, x) in report.post_wave_x.iter().enumerate() {
                        println!("after wave {:<3} X = {x:.6e}", k + 1);
                    }
                    println!("strictly increasing over the first {} waves", report.increasing_run);
                }
                DisplacementMode::Ablation => {
                    let (report, [full, ablated]) = ablation_study(&cfg)?;
                    write_outputs(&full, &common.out.join("full"))?;
                    write_outputs(&ablated, &common.out.join("ablated"))?;
                    write_json(&report, &common.out.join("ablation.json"))?;
                    println!("{}", serde_json::to_string_pretty(&report)?);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
