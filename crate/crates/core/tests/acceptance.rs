//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use qpmsim_core::biphoton::{coincidence_scan_oracle, JointAmplitude, JointGrid, OracleMethod, ScanMode};
use qpmsim_core::cli::main_with_args;
use qpmsim_core::config::{ScenarioConfig, PRESET_NAMES};
use qpmsim_core::dispersion::SellmeierThermal;
use qpmsim_core::field::{
    apply_element, gaussian_source, propagate, to_angular_spectrum, GridSpec, OpticalElement, SampledField,
};
use qpmsim_core::model::{angular_frequency, AxisAssignment, CrystalSpec, FrequencyPair, InteractionType, PulseShape};
use qpmsim_core::numerics::{
    fringe_period_from_minima, interp_linear, normalized_cross_correlation, second_moment_radius,
};
use qpmsim_core::phasematch::{design_poling_period, efficiency_drop_over_scan, AngleConvention, Kinematics};
use qpmsim_core::scenario::Scenario;

const REFERENCE_PERIOD_UM: f64 = 11.4617;
const PERIOD_TOL: f64 = 0.05;
const DROP_LIMIT: f64 = 0.01;
const HALF_DEGREE_LIMIT: f64 = 0.5;
const TRANSFER_NCC: f64 = 0.99;
const ORACLE_NCC: f64 = 0.98;
const FRINGE_PERIOD_MM: f64 = 1.053;
const FRINGE_TOL: f64 = 0.03;
// Minima below half the local peak count as fringe zeros.
const FRINGE_LEVEL: f64 = 0.5;
const WAIST_TOL: f64 = 1e-4;
const ABCD_TOL: f64 = 1e-3;
const THIN_TOL: f64 = 1e-6;
const SWAP_TOL: f64 = 1e-10;
const PARSEVAL_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} {}: {name}: {} [{:.2} s of {:.0} s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    pass
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["qpmsim"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = main_with_args(argv, &mut o, &mut e);
    if code != 0 {
        eprintln!("{}", String::from_utf8_lossy(&e));
    }
    (code, String::from_utf8(o).unwrap())
}

fn read_xy(path: &Path) -> (Vec<f64>, Vec<f64>) {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut c = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (c.next().unwrap(), c.next().unwrap())
        })
        .unzip()
}

fn preset(name: &str) -> Scenario {
    let (cfg, base) = ScenarioConfig::load(name).unwrap();
    cfg.build(base.as_deref()).unwrap()
}

fn ktp_crystal(length: f64) -> CrystalSpec {
    let model = SellmeierThermal::ktp_kato2002();
    let axes = AxisAssignment::default();
    let period = design_poling_period(413e-9, 826e-9, 826e-9, axes, 40.0, 1, &model).unwrap();
    CrystalSpec::new(length, period, 0.5, 1, 40.0, axes, InteractionType::TypeII).unwrap()
}

fn criterion_1() -> Outcome {
    let (code, text) = cli(&["design-poling", "--config", "paper-config-1"]);
    let um: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("poling_period_um = "))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    let rel = um / REFERENCE_PERIOD_UM - 1.0;
    Outcome {
        pass: code == 0 && rel.abs() <= PERIOD_TOL,
        detail: format!(
            "Λ = {um:.5} µm, {:+.3}% from {REFERENCE_PERIOD_UM} µm (limit ±{}%)",
            rel * 100.0,
            PERIOD_TOL * 100.0
        ),
    }
}

fn criterion_2() -> Outcome {
    let model = SellmeierThermal::ktp_kato2002();
    let crystal = ktp_crystal(9.6e-3);
    let freqs = FrequencyPair::degenerate(angular_frequency(413e-9).unwrap()).unwrap();
    let drop = efficiency_drop_over_scan(3e-3, 1.0, freqs, &crystal, &model, AngleConvention::External).unwrap();
    let kin = Kinematics::new(freqs, &crystal, &model).unwrap();
    let alpha = 0.5f64.to_radians();
    let ext = kin.maker_efficiency(alpha, AngleConvention::External).unwrap();
    let int = kin.maker_efficiency(alpha, AngleConvention::Internal).unwrap();
    Outcome {
        pass: drop < DROP_LIMIT && ext < HALF_DEGREE_LIMIT && int < HALF_DEGREE_LIMIT,
        detail: format!(
            "drop over 3 mm at 1 m = {:.3}% (limit {}%), efficiency at 0.5° = {ext:.4} external, {int:.4} internal (limit {HALF_DEGREE_LIMIT})",
            drop * 100.0,
            DROP_LIMIT * 100.0
        ),
    }
}

fn criterion_3(dir: &Path) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in PRESET_NAMES {
        let scan = dir.join(format!("{name}.scan.csv"));
        let pump = dir.join(format!("{name}.pump.csv"));
        let (c1, _) = cli(&[
            "coincidence-scan",
            "--config",
            name,
            "--mode",
            "analytic",
            "--out",
            scan.to_str().unwrap(),
        ]);
        let (c2, _) = cli(&["pump-propagate", "--config", name, "--out", pump.to_str().unwrap()]);
        let (ps, rates) = read_xy(&scan);
        let (xs, intensity) = read_xy(&pump);
        let profile: Vec<f64> = ps.iter().map(|&p| interp_linear(&xs, &intensity, p)).collect();
        let ncc = normalized_cross_correlation(&rates, &profile);
        pass &= c1 == 0 && c2 == 0 && ncc >= TRANSFER_NCC;
        parts.push(format!("{name} NCC = {ncc:.5}"));
    }
    Outcome {
        pass,
        detail: format!("{} (limit {TRANSFER_NCC})", parts.join(", ")),
    }
}

fn criterion_4(dir: &Path) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in PRESET_NAMES {
        let out = dir.join(format!("{name}.both.csv"));
        let (code, stdout) = cli(&[
            "coincidence-scan",
            "--config",
            name,
            "--mode",
            "both",
            "--out",
            out.to_str().unwrap(),
        ]);
        let ncc: f64 = stdout
            .lines()
            .find_map(|l| l.strip_prefix("normalized_cross_correlation = "))
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN);
        pass &= code == 0 && ncc >= ORACLE_NCC;
        parts.push(format!("{name} NCC = {ncc:.5}"));
        if name == "paper-config-2" {
            let (ps, rates) = read_xy(&dir.join(format!("{name}.both.oracle.csv")));
            let fresnel = fringe_period_from_minima(&ps, &rates, FRINGE_LEVEL).unwrap_or(f64::NAN) * 1e3;
            let s = preset(name);
            let prop = s.pump_propagation().unwrap();
            let joint = s.joint_amplitude(&prop).unwrap();
            let far =
                coincidence_scan_oracle(&joint, s.detection(), ScanMode::BothTogether, OracleMethod::FarField).unwrap();
            let fraunhofer =
                fringe_period_from_minima(&far.positions, &far.rates, FRINGE_LEVEL).unwrap_or(f64::NAN) * 1e3;
            for (label, v) in [("fresnel", fresnel), ("far-field", fraunhofer)] {
                let rel = v / FRINGE_PERIOD_MM - 1.0;
                pass &= rel.abs() <= FRINGE_TOL;
                parts.push(format!("{label} fringe period = {v:.4} mm ({:+.2}%)", rel * 100.0));
            }
        }
    }
    Outcome {
        pass,
        detail: format!(
            "{} (limits NCC {ORACLE_NCC}, period {FRINGE_PERIOD_MM} mm ±{}%)",
            parts.join(", "),
            FRINGE_TOL * 100.0
        ),
    }
}

fn abcd_radius(w0: f64, wl: f64, f: f64, d: f64) -> f64 {
    let zr = PI * w0 * w0 / wl;
    let q0 = Complex64::new(0.0, zr);
    let q = (q0 * (1.0 - d / f) + d) / (q0 * (-1.0 / f) + 1.0);
    (-wl / (PI * (1.0 / q).im)).sqrt()
}

fn criterion_5() -> Outcome {
    let (w0, wl) = (0.5e-3, 413e-9);
    let zr = PI * w0 * w0 / wl;
    let src = gaussian_source(w0, wl, GridSpec::new(2048, 40e-3).unwrap(), 0.0).unwrap();
    let mut worst: f64 = 0.0;
    for z in [0.5 * zr, zr, 2.0 * zr] {
        let p = propagate(&src, z, 1.0).unwrap();
        let w = second_moment_radius(&p.positions(), &p.intensity());
        worst = worst.max((w / (w0 * (1.0 + (z / zr).powi(2)).sqrt()) - 1.0).abs());
    }
    let wide = gaussian_source(w0, wl, GridSpec::new(4096, 16e-3).unwrap(), 0.0).unwrap();
    let lensed = apply_element(&wide, &OpticalElement::ThinLens { focal_length: 0.5 }).unwrap();
    let focus = propagate(&lensed, 0.5, 1.0).unwrap();
    let w = second_moment_radius(&focus.positions(), &focus.intensity());
    let abcd = (w / abcd_radius(w0, wl, 0.5, 0.5) - 1.0).abs();
    Outcome {
        pass: worst <= WAIST_TOL && abcd <= ABCD_TOL,
        detail: format!(
            "w(z) worst relative error {worst:.2e} (limit {WAIST_TOL:e}), lens focus vs ABCD {abcd:.2e} (limit {ABCD_TOL:e})"
        ),
    }
}

fn criterion_6() -> Outcome {
    let model = SellmeierThermal::ktp_kato2002();
    let freqs = FrequencyPair::degenerate(angular_frequency(413e-9).unwrap()).unwrap();
    let pulse = PulseShape::Pulsed { tau: 200e-15 };
    let jg = JointGrid {
        samples: 128,
        stride: 4,
    };
    let grid = GridSpec::new(2048, 40e-3).unwrap();
    let spectrum = |w: f64| to_angular_spectrum(&gaussian_source(w, 413e-9, grid, 0.0).unwrap());
    let offset = |j: usize, l: usize| ((j + l) as i64 - 128) * 4;

    let s = spectrum(0.2e-3);
    let thin = JointAmplitude::build(&s, &ktp_crystal(1e-6), freqs, pulse, &model, jg).unwrap();
    let peak = s.at_offset(0).unwrap().norm();
    let mut thin_err: f64 = 0.0;
    for j in 0..128 {
        for l in 0..128 {
            let e = s.at_offset(offset(j, l)).unwrap().norm() / peak;
            if e > 1e-200 {
                thin_err = thin_err.max((thin.magnitude(j, l) / e - 1.0).abs());
            }
        }
    }

    let crystal = ktp_crystal(9.6e-3);
    let (s1, s2) = (spectrum(0.5e-3), spectrum(0.8e-3));
    let a1 = JointAmplitude::build(&s1, &crystal, freqs, pulse, &model, jg).unwrap();
    let a2 = JointAmplitude::build(&s2, &crystal, freqs, pulse, &model, jg).unwrap();
    let mut swap_err: f64 = 0.0;
    for j in 0..128 {
        for l in 0..128 {
            let lhs = a1.raw_value(j, l) * s2.at_offset(offset(j, l)).unwrap();
            let rhs = a2.raw_value(j, l) * s1.at_offset(offset(j, l)).unwrap();
            let scale = lhs.norm().max(rhs.norm());
            if scale > 1e-250 {
                swap_err = swap_err.max((lhs - rhs).norm() / scale);
            }
        }
    }

    let flat = a1.without_phase();
    let magnitudes_equal =
        (0..128).all(|j| (0..128).all(|l| a1.magnitude(j, l).to_bits() == flat.magnitude(j, l).to_bits()));
    let s2_scenario = preset("paper-config-2");
    let g = s2_scenario.detection();
    let scans_equal = [OracleMethod::FarField, OracleMethod::Fresnel].iter().all(|&m| {
        let a = coincidence_scan_oracle(&a1, g, ScanMode::BothTogether, m).unwrap();
        let b = coincidence_scan_oracle(&flat, g, ScanMode::BothTogether, m).unwrap();
        a.rates.iter().zip(&b.rates).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    let far_equal = {
        let a = coincidence_scan_oracle(&a1, g, ScanMode::BothTogether, OracleMethod::FarField).unwrap();
        let b = coincidence_scan_oracle(&flat, g, ScanMode::BothTogether, OracleMethod::FarField).unwrap();
        a == b
    };

    let field = s2_scenario.pump_propagation().unwrap().at_crystal;
    let parseval = (to_angular_spectrum(&field).power() / field.power() - 1.0).abs();
    let random = SampledField::from_fn(grid, 413e-9, 0.0, |x| {
        Complex64::from_polar((-(x * 1e3).powi(2)).exp(), (x * 7e3).sin() * 3.0)
    })
    .unwrap();
    let parseval = parseval.max((to_angular_spectrum(&random).power() / random.power() - 1.0).abs());

    Outcome {
        pass: thin_err <= THIN_TOL && swap_err <= SWAP_TOL && magnitudes_equal && far_equal && parseval <= PARSEVAL_TOL,
        detail: format!(
            "thin-crystal {thin_err:.2e} (limit {THIN_TOL:e}), pump swap {swap_err:.2e} (limit {SWAP_TOL:e}), \
             phase-free |Ψ| bitwise equal: {magnitudes_equal}, far-field scan bitwise equal: {far_equal}, \
             fresnel scan bitwise equal: {scans_equal} (informative), Parseval {parseval:.2e} (limit {PARSEVAL_TOL:e})"
        ),
    }
}

fn run_all_commands(dir: &Path, threads: usize, tag: &str) -> Vec<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let mut outputs = Vec::new();
    for name in PRESET_NAMES {
        let file = |what: &str| dir.join(format!("{tag}-{name}-{what}.csv"));
        let runs: Vec<(Vec<&str>, Vec<std::path::PathBuf>)> = vec![
            (vec!["design-poling"], vec![file("poling")]),
            (vec!["maker-fringes"], vec![file("maker")]),
            (vec!["pump-propagate"], vec![file("pump")]),
            (
                vec!["coincidence-scan", "--mode", "both"],
                vec![file("scan"), dir.join(format!("{tag}-{name}-scan.oracle.csv"))],
            ),
        ];
        for (args, files) in runs {
            let out = files[0].to_str().unwrap().to_string();
            let mut argv = args.clone();
            argv.extend(["--config", name, "--out", &out]);
            let (code, _) = pool.install(|| cli(&argv));
            assert_eq!(code, 0);
            for f in files {
                outputs.push(std::fs::read(f).unwrap());
            }
        }
    }
    outputs
}

fn criterion_7(dir: &Path) -> Outcome {
    let a = run_all_commands(dir, 1, "a");
    let b = run_all_commands(dir, 4, "b");
    let c = run_all_commands(dir, 4, "c");
    let identical = a == b && b == c;
    let bytes: usize = a.iter().map(Vec::len).sum();
    Outcome {
        pass: identical,
        detail: format!(
            "{} files ({bytes} bytes) byte-identical across 1, 4, 4 threads: {identical}",
            a.len()
        ),
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let secs = Duration::from_secs;
    let results = [
        report(1, "poling period", secs(1), criterion_1),
        report(2, "near-collinear efficiency", secs(1), criterion_2),
        report(3, "pump-transfer law", secs(10), || criterion_3(dir.path())),
        report(4, "oracle equivalence", secs(60), || criterion_4(dir.path())),
        report(5, "propagator", secs(5), criterion_5),
        report(6, "amplitude invariants", secs(60), criterion_6),
        report(7, "determinism", secs(600), || criterion_7(dir.path())),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
