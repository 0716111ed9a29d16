//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::biphoton::ScanMode;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::output::{csv_table, svg_plot, write_text, Series};
use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qpmsim",
    version,
    about = "SPDC biphoton simulator for quasi-phase-matched crystals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file, or a bundled preset name (paper-config-1, paper-config-2).
    #[arg(long)]
    pub config: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase-matching efficiency versus symmetric emission angle.
    MakerFringes {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha_max_deg: f64,
        #[arg(long, default_value_t = 0.005, allow_negative_numbers = true)]
        alpha_step_deg: f64,
        /// Also write an SVG plot here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Collinear poling period for the scenario's wavelengths and axes.
    DesignPoling {
        #[command(flatten)]
        common: Common,
    },
    /// Pump intensity profile at the detection plane.
    PumpPropagate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Coincidence rate versus detector position.
    CoincidenceScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        mode: Method,
        #[arg(long, value_enum, default_value_t = Scan::BothTogether)]
        scan: Scan,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Analytic,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scan {
    BothTogether,
    SignalOnly,
    IdlerOnly,
}

impl From<Scan> for ScanMode {
    fn from(s: Scan) -> Self {
        match s {
            Scan::BothTogether => ScanMode::BothTogether,
            Scan::SignalOnly => ScanMode::SignalOnly,
            Scan::IdlerOnly => ScanMode::IdlerOnly,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn load(common: &Common) -> Result<Scenario> {
    let (cfg, base) = ScenarioConfig::load(&common.config)?;
    cfg.build(base.as_deref())
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

/// Sibling path for the oracle curve: `scan.csv` becomes `scan.oracle.csv`.
pub fn oracle_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.oracle.{}", ext.to_string_lossy()),
        None => format!("{stem}.oracle"),
    };
    out.with_file_name(name)
}

/// Runs a parsed command, writing data to `stdout` and diagnostics to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::MakerFringes {
            common,
            alpha_max_deg,
            alpha_step_deg,
            plot,
        } => {
            if !(alpha_step_deg > 0.0) {
                return Err(Error::Config(format!(
                    "--alpha-step-deg must be positive, got {alpha_step_deg}"
                )));
            }
            if !(alpha_max_deg >= 0.0) {
                return Err(Error::Config(format!(
                    "--alpha-max-deg must be non-negative, got {alpha_max_deg}"
                )));
            }
            let s = load(&common)?;
            let curve = s.maker_fringes(alpha_max_deg.to_radians(), alpha_step_deg.to_radians())?;
            let rows: Vec<Vec<f64>> = curve.iter().map(|&(a, e)| vec![a, e]).collect();
            let meta = [
                ("angle_convention", s.numerics().convention.to_string()),
                ("poling_period_m", s.crystal().poling_period().to_string()),
                ("crystal_length_m", s.crystal().length().to_string()),
                ("index_model", s.model().id().to_string()),
            ];
            emit(
                &common.out,
                &csv_table(&meta, &["alpha_rad", "efficiency"], &rows),
                stdout,
            )?;
            if let Some(p) = plot {
                let xs: Vec<f64> = curve.iter().map(|c| c.0.to_degrees()).collect();
                let ys: Vec<f64> = curve.iter().map(|c| c.1).collect();
                let svg = svg_plot(
                    "QPM efficiency versus emission angle",
                    "alpha (deg)",
                    "efficiency",
                    &[Series {
                        label: "sinc²(L A / 2)",
                        xs: &xs,
                        ys: &ys,
                    }],
                );
                write_text(&p, &svg)?;
            }
        }
        Command::DesignPoling { common } => {
            let s = load(&common)?;
            let report = s.design_poling()?;
            emit(&common.out, &report.to_text(), stdout)?;
        }
        Command::PumpPropagate { common, plot } => {
            let s = load(&common)?;
            let prop = s.pump_propagation()?;
            let field = &prop.at_detection;
            let mut intensity = field.intensity();
            if s.numerics().normalize {
                let peak = intensity.iter().cloned().fold(0.0, f64::max);
                if peak > 0.0 {
                    for v in intensity.iter_mut() {
                        *v /= peak;
                    }
                }
            }
            let xs = field.positions();
            let rows: Vec<Vec<f64>> = xs.iter().zip(&intensity).map(|(&x, &i)| vec![x, i]).collect();
            let meta = [
                ("wavelength_m", field.wavelength().to_string()),
                ("plane_z_m", s.detection().z_d().to_string()),
                ("samples", field.len().to_string()),
                ("extent_m", field.extent().to_string()),
            ];
            emit(&common.out, &csv_table(&meta, &["x_m", "intensity"], &rows), stdout)?;
            if let Some(p) = plot {
                let half = 0.5 * s.detection().scan_range().max(1e-3) * 2.0;
                let (px, py): (Vec<f64>, Vec<f64>) = xs
                    .iter()
                    .zip(&intensity)
                    .filter(|(x, _)| x.abs() <= half)
                    .map(|(&x, &i)| (x * 1e3, i))
                    .unzip();
                let svg = svg_plot(
                    "Pump intensity at the detection plane",
                    "x (mm)",
                    "intensity",
                    &[Series {
                        label: "|W(x)|²",
                        xs: &px,
                        ys: &py,
                    }],
                );
                write_text(&p, &svg)?;
            }
        }
        Command::CoincidenceScan {
            common,
            mode,
            scan,
            plot,
        } => {
            let s = load(&common)?;
            let scan_mode: ScanMode = scan.into();
            let (primary, secondary, correlation) = match mode {
                Method::Analytic => (s.coincidence_analytic(scan_mode)?, None, None),
                Method::Oracle => (s.coincidence_oracle(scan_mode)?, None, None),
                Method::Both => {
                    if common.out.is_none() {
                        return Err(Error::Config(
                            "--mode both needs --out (the oracle curve goes to a sibling file)".into(),
                        ));
                    }
                    let c = s.coincidence_both(scan_mode)?;
                    (c.analytic, Some(c.oracle), Some(c.correlation))
                }
            };
            for w in &primary.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            if let Some(o) = &secondary {
                for w in o.warnings.iter().filter(|w| !primary.warnings.contains(w)) {
                    let _ = writeln!(stderr, "warning: {w}");
                }
            }
            emit(&common.out, &primary.to_csv(), stdout)?;
            if let (Some(o), Some(out)) = (&secondary, &common.out) {
                write_text(&oracle_path(out), &o.to_csv())?;
            }
            if let Some(c) = correlation {
                let _ = writeln!(stdout, "normalized_cross_correlation = {c}");
            }
            if let Some(p) = plot {
                let xs: Vec<f64> = primary.positions.iter().map(|x| x * 1e3).collect();
                let mut series = vec![Series {
                    label: &primary.method,
                    xs: &xs,
                    ys: &primary.rates,
                }];
                if let Some(o) = &secondary {
                    series.push(Series {
                        label: &o.method,
                        xs: &xs,
                        ys: &o.rates,
                    });
                }
                write_text(
                    &p,
                    &svg_plot(
                        "Coincidence scan",
                        "detector position (mm)",
                        "coincidence rate",
                        &series,
                    ),
                )?;
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_sibling_names() {
        assert_eq!(
            oracle_path(Path::new("out/scan.csv")),
            PathBuf::from("out/scan.oracle.csv")
        );
        assert_eq!(oracle_path(Path::new("scan")), PathBuf::from("scan.oracle"));
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NoPhaseMatching("x".into())), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Paraxial { ratio: 0.3, bound: 0.2 }), EXIT_NUMERICAL);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["qpmsim", "frobnicate"], &mut o, &mut e), EXIT_CONFIG);
        assert_eq!(main_with_args(["qpmsim", "design-poling"], &mut o, &mut e), EXIT_CONFIG);
    }

    #[test]
    fn design_poling_report() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with_args(
            ["qpmsim", "design-poling", "--config", "paper-config-1"],
            &mut o,
            &mut e,
        );
        assert_eq!(code, EXIT_OK, "{}", String::from_utf8_lossy(&e));
        let text = String::from_utf8(o).unwrap();
        assert!(text.contains("poling_period_um = 11.45"), "{text}");
    }
}
