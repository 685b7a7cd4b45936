//! Command-line surface.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use preq_core::drift::{
    build_perturbation, drift_form_crosscheck, measure_drift, predict_drift, DriftRun, LocationMethod, DEFAULT_WINDOWS,
};
use preq_core::releq::{build_planar_releq, build_sphere_releq};
use preq_core::stability::{critical_alpha, formal_stability};
use preq_core::Vec3;
use serde_json::json;

use crate::collide::{preset, presets, sensitivity_probe, CollisionKind, CollisionSetup};
use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};
use crate::io::{write_drift_sweep_csv, write_drift_windows_csv, write_stability_csv, ReleqJson};
use crate::scenario::run_scenario;

#[derive(Debug, Parser)]
#[command(name = "preq", version, about = "Point-vortex relative equilibria and their particle-like perturbations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Sphere,
    Plane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Like,
    Anti,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a JSON scenario and write trajectory, summary and report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a relative equilibrium as JSON.
    Releq {
        #[arg(long, value_enum, default_value = "sphere")]
        domain: DomainArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Formal stability over a grid of opening angles, as CSV.
    Stability {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        /// Number of grid points, end points included.
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a perturbed preq and compare its drift with the prediction.
    Drift {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Momentum perturbation `X,Y,Z` in the canonical frame.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        dmu: Vec<f64>,
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// `dt · |ξ|` of the unperturbed equilibrium.
        #[arg(long, default_value_t = 1e-2)]
        step_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_WINDOWS)]
        windows: usize,
        /// Also run the direction of `--dmu` at these magnitudes and fit.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collide two preqs and classify the interaction.
    Collide {
        #[arg(long, value_enum, required_unless_present_any = ["preset", "list_presets"])]
        kind: Option<KindArg>,
        #[arg(long, required_unless_present_any = ["preset", "list_presets"])]
        alpha: Option<f64>,
        /// Closing speed.
        #[arg(long, required_unless_present_any = ["preset", "list_presets"])]
        speed: Option<f64>,
        /// Impact parameter (geodesic offset of the undisturbed paths).
        #[arg(long, default_value_t = 0.0)]
        impact: f64,
        /// Keep the second preq at rest.
        #[arg(long)]
        at_rest: bool,
        /// Use a named set-up instead (see `--list-presets`).
        #[arg(long, conflicts_with_all = ["kind", "alpha", "speed"])]
        preset: Option<String>,
        #[arg(long)]
        list_presets: bool,
        /// Repeat with the impact parameter shifted by 1e-6 this many times.
        #[arg(long, default_value_t = 0)]
        probe: usize,
        #[arg(long, default_value = "collision")]
        out: PathBuf,
    },
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, text: &str) -> AppResult<()> {
    match path {
        Some(p) => create(p)?
            .write_all(text.as_bytes())
            .map_err(|e| AppError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| AppError::io("stdout", e)),
    }
}

fn stdout_err(e: std::io::Error) -> AppError {
    AppError::io("stdout", e)
}

/// Executes a parsed command, writing results to `out`.
pub fn execute(cmd: Command, out: &mut dyn Write) -> AppResult<()> {
    match cmd {
        Command::Simulate { config, out: dir } => {
            let cfg = ScenarioConfig::load(&config)?;
            let (outcome, files) = run_scenario(&cfg, &dir)?;
            let s = &outcome.summary;
            writeln!(
                out,
                "{:?} force={:?} min_separation={:.6e} max|dH|/|H|={:.3e} max|dJ|={:.3e}",
                s.classification,
                s.force,
                s.min_separation,
                outcome.conservation.max_relative_energy_error,
                outcome.conservation.max_momentum_error
            )
            .map_err(stdout_err)?;
            for f in files.all() {
                writeln!(out, "wrote {}", f.display()).map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Releq {
            domain,
            n,
            alpha,
            gamma,
            radius,
            out: path,
        } => {
            let doc = match domain {
                DomainArg::Sphere => ReleqJson::from(&build_sphere_releq(n, alpha, gamma, radius.unwrap_or(1.0))?),
                DomainArg::Plane => {
                    if radius.is_some() {
                        return Err(AppError::Config("--radius applies to the sphere only".into()));
                    }
                    ReleqJson::from(&build_planar_releq(n, alpha, gamma)?)
                }
            };
            emit(out, &path, &(serde_json::to_string_pretty(&doc)? + "\n"))
        }
        Command::Stability {
            n,
            alpha_min,
            alpha_max,
            steps,
            gamma,
            radius,
            out: path,
        } => {
            if steps < 2 || !(alpha_min < alpha_max) {
                return Err(AppError::Config("need alpha-min < alpha-max and at least 2 steps".into()));
            }
            let mut rows = Vec::new();
            for k in 0..steps {
                let alpha = alpha_min + (alpha_max - alpha_min) * k as f64 / (steps - 1) as f64;
                match build_sphere_releq(n, alpha, gamma, radius) {
                    Ok(re) => rows.push((alpha, formal_stability(&re)?)),
                    Err(preq_core::Error::Domain(m)) => eprintln!("skipping alpha = {alpha}: {m}"),
                    Err(e) => return Err(e.into()),
                }
            }
            let mut buf = Vec::new();
            write_stability_csv(&mut buf, &rows).map_err(stdout_err)?;
            emit(out, &path, &String::from_utf8_lossy(&buf))?;
            if let Ok(a) = critical_alpha(n, (alpha_min, alpha_max)) {
                eprintln!("critical opening angle: {a:.6}");
            }
            Ok(())
        }
        Command::Drift {
            n,
            alpha,
            dmu,
            duration,
            gamma,
            radius,
            step_fraction,
            windows,
            sweep,
            out: dir,
        } => {
            let dmu = match dmu[..] {
                [x, y, z] if x != 0.0 || y != 0.0 || z != 0.0 => Vec3::new(x, y, z),
                _ => return Err(AppError::Config("--dmu takes three components, not all zero".into())),
            };
            let re = build_sphere_releq(n, alpha, gamma, radius)?;
            let pred = predict_drift(&re, dmu)?;
            let (spec, _) = build_perturbation(&re, dmu)?;
            let run = DriftRun {
                dt: step_fraction / re.generator.norm(),
                duration,
                windows,
                samples_per_window: 20,
                location: LocationMethod::MeanOfVortices,
            };
            let m = measure_drift(&re, dmu, &run)?;
            let mut report = json!({
                "N": n,
                "alpha": alpha,
                "dmu": [dmu.x, dmu.y, dmu.z],
                "within_budget": spec.within_budget(),
                "J_N1": pred.form.j1(),
                "mass": pred.mass,
                "predicted_rate": pred.rate(),
                "measured_rate": m.rate.mean_rate,
                "rate_std_dev": m.rate.std_dev,
                "rate_over_dmu": m.rate_over_dmu(),
                "relative_error": (m.rate_over_dmu() - pred.form.j1().abs()) / pred.form.j1().abs(),
                "dt": run.dt,
                "max_momentum_error": m.max_momentum_error,
                "max_relative_energy_error": m.max_relative_energy_error,
            });
            let mut windows_csv = Vec::new();
            write_drift_windows_csv(&mut windows_csv, &m.rate).map_err(stdout_err)?;
            if !sweep.is_empty() {
                let unit = dmu / dmu.norm();
                let runs: AppResult<Vec<_>> = sweep
                    .iter()
                    .map(|s| measure_drift(&re, unit * *s, &run).map_err(AppError::from))
                    .collect();
                let x = drift_form_crosscheck(&re, runs?)?;
                report["sweep_intercept"] = json!(x.intercept);
                report["sweep_discrepancy"] = json!(x.discrepancy);
                if let Some(d) = &dir {
                    let p = d.join("drift_sweep.csv");
                    write_drift_sweep_csv(create(&p)?, &x.measurements).map_err(|e| AppError::io(&p, e))?;
                }
            }
            match &dir {
                Some(d) => {
                    let p = d.join("drift_windows.csv");
                    create(&p)?.write_all(&windows_csv).map_err(|e| AppError::io(&p, e))?;
                    writeln!(out, "{}", serde_json::to_string_pretty(&report)?).map_err(stdout_err)
                }
                None => {
                    eprintln!("{}", serde_json::to_string_pretty(&report)?);
                    out.write_all(&windows_csv).map_err(stdout_err)
                }
            }
        }
        Command::Collide {
            kind,
            alpha,
            speed,
            impact,
            at_rest,
            preset: name,
            list_presets,
            probe,
            out: dir,
        } => {
            if list_presets {
                for p in presets() {
                    writeln!(out, "{:<12} {}", p.name, p.description).map_err(stdout_err)?;
                }
                return Ok(());
            }
            let setup = match name {
                Some(name) => preset(&name)
                    .ok_or_else(|| AppError::Config(format!("unknown preset {name:?}")))?
                    .setup,
                None => {
                    let kind = match kind.expect("required by the parser") {
                        KindArg::Like => CollisionKind::LikePair,
                        KindArg::Anti => CollisionKind::AntiPair,
                    };
                    CollisionSetup {
                        target_at_rest: at_rest,
                        ..CollisionSetup::new(kind, alpha.unwrap(), impact, speed.unwrap())
                    }
                }
            };
            let cfg = setup.build()?;
            std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
            let cfg_path = dir.join("scenario.json");
            std::fs::write(&cfg_path, cfg.to_json() + "\n").map_err(|e| AppError::io(&cfg_path, e))?;
            execute(
                Command::Simulate {
                    config: cfg_path,
                    out: dir.clone(),
                },
                out,
            )?;
            if probe > 0 {
                let trials = sensitivity_probe(&setup, probe, 1e-6)?;
                let p = dir.join("probe.json");
                std::fs::write(&p, serde_json::to_string_pretty(&trials)? + "\n").map_err(|e| AppError::io(&p, e))?;
                for t in &trials {
                    writeln!(
                        out,
                        "impact={:.9e} {:?} force={:?} displacement={:.3e}",
                        t.impact, t.classification, t.force, t.final_displacement
                    )
                    .map_err(stdout_err)?;
                }
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
