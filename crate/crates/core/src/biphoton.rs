//! Two-photon joint amplitude and coincidence scans.
//!
//! The joint amplitude over transverse wavevectors at fixed frequencies is
//!
//! ```text
//! Ψ(q_s, q_i) ∝ Ẽ(q_s + q_i) · sinc(L A / 2) · exp(−Δω²/(2Γ)) · exp(i L A / 2)
//! ```
//!
//! with `A = Δκ_z − n_g Δω / c`. The magnitude part (everything but the last
//! factor) is stored separately from the phase `L A / 2`, so intensity-only
//! consumers never touch the phase.

use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::IndexModel;
use crate::error::{invalid, Error, Result};
use crate::field::{AngularSpectrum, SampledField};
use crate::model::{
    sinc, wavelength_from_omega, CrystalSpec, DetectionGeometry, FrequencyPair, PulseShape, PumpSpec, SPEED_OF_LIGHT,
};
use crate::phasematch::Kinematics;

/// Midpoint-rule samples per detector slit.
pub const SLIT_QUADRATURE: usize = 8;

/// `exp(−Δω²/(2Γ))`; for a CW pump, 1 at `Δω = 0` and 0 elsewhere.
pub fn spectral_envelope(freqs: &FrequencyPair, pump: &PumpSpec) -> f64 {
    spectral_envelope_for(freqs.delta_omega(), pump.pulse())
}

pub fn spectral_envelope_for(delta_omega: f64, pulse: PulseShape) -> f64 {
    match pulse {
        PulseShape::Cw => {
            if delta_omega == 0.0 {
                1.0
            } else {
                0.0
            }
        }
        PulseShape::Pulsed { tau } => {
            let gamma = 1.0 / (tau * tau);
            (-delta_omega * delta_omega / (2.0 * gamma)).exp()
        }
    }
}

/// Gaussian interference-filter transmission in wavelength,
/// `exp(−4 ln2 (λ − λ_c)² / FWHM²)`.
pub fn filter_transmission(omega: f64, geometry: &DetectionGeometry) -> f64 {
    let Ok(wl) = wavelength_from_omega(omega) else {
        return 0.0;
    };
    let d = wl - geometry.filter_center();
    let fwhm = geometry.filter_fwhm();
    (-4.0 * std::f64::consts::LN_2 * d * d / (fwhm * fwhm)).exp()
}

/// Square `(q_s, q_i)` grid whose spacing is `stride` pump-grid cells, so
/// that every `q_s + q_i` lands exactly on a pump spectrum sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointGrid {
    pub samples: usize,
    pub stride: usize,
}

impl Default for JointGrid {
    fn default() -> Self {
        JointGrid {
            samples: 768,
            stride: 4,
        }
    }
}

impl JointGrid {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 || self.samples % 2 != 0 {
            return Err(invalid(format!(
                "joint samples must be even and >= 2, got {}",
                self.samples
            )));
        }
        if self.stride == 0 {
            return Err(invalid("joint stride must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JointAmplitude {
    samples: usize,
    spacing: f64,
    stride: usize,
    envelope: Vec<Complex64>,
    phase: Vec<f64>,
    scale: f64,
    kinematics: Kinematics,
}

impl JointAmplitude {
    /// Fills the grid from the pump angular spectrum at the crystal entrance.
    ///
    /// Rows are signal wavevectors, columns idler wavevectors.
    pub fn build(
        pump_spectrum: &AngularSpectrum,
        crystal: &CrystalSpec,
        freqs: FrequencyPair,
        pulse: PulseShape,
        model: &dyn IndexModel,
        grid: JointGrid,
    ) -> Result<JointAmplitude> {
        grid.validate()?;
        let m = grid.samples;
        let spacing = grid.stride as f64 * pump_spectrum.spacing();
        // Offsets of q_s + q_i on the pump grid span [−M·s, (M−2)·s].
        let reach = (m * grid.stride) as i64;
        let half_pump = (pump_spectrum.len() / 2) as i64;
        if reach > half_pump {
            return Err(Error::GridIncompatible {
                required_q_extent: 2.0 * m as f64 * spacing,
            });
        }
        let kin = Kinematics::new(freqs, crystal, model)?;
        let q_max = 0.5 * m as f64 * spacing;
        kin.check_paraxial(q_max, q_max)?;
        kin.check_paraxial(q_max, -q_max)?;

        let spectral = spectral_envelope_for(freqs.delta_omega(), pulse);
        let half = (m / 2) as f64;
        let len = crystal.length();
        let rows: Vec<(Vec<Complex64>, Vec<f64>)> = (0..m)
            .into_par_iter()
            .map(|j| {
                let q_s = (j as f64 - half) * spacing;
                let mut env = Vec::with_capacity(m);
                let mut ph = Vec::with_capacity(m);
                for l in 0..m {
                    let q_i = (l as f64 - half) * spacing;
                    let offset = (j as i64 + l as i64 - m as i64) * grid.stride as i64;
                    let e = pump_spectrum.at_offset(offset).expect("offset range checked above");
                    let half_phase = 0.5 * len * kin.mismatch_unchecked(q_s, q_i);
                    env.push(e * (sinc(half_phase) * spectral));
                    ph.push(half_phase);
                }
                (env, ph)
            })
            .collect();
        let mut envelope = Vec::with_capacity(m * m);
        let mut phase = Vec::with_capacity(m * m);
        for (env, ph) in rows {
            envelope.extend(env);
            phase.extend(ph);
        }
        let scale = envelope.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            for v in envelope.iter_mut() {
                *v /= scale;
            }
        }
        Ok(JointAmplitude {
            samples: m,
            spacing,
            stride: grid.stride,
            envelope,
            phase,
            scale,
            kinematics: kin,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn kinematics(&self) -> &Kinematics {
        &self.kinematics
    }
    pub fn q(&self, j: usize) -> f64 {
        (j as f64 - (self.samples / 2) as f64) * self.spacing
    }
    pub fn q_values(&self) -> Vec<f64> {
        (0..self.samples).map(|j| self.q(j)).collect()
    }
    /// Largest `|q|` represented on either axis.
    pub fn q_max(&self) -> f64 {
        0.5 * self.samples as f64 * self.spacing
    }
    /// Normalization divisor; multiply a normalized value by it for the raw value.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Normalized amplitude at node `(j, l)`.
    pub fn value(&self, j: usize, l: usize) -> Complex64 {
        let k = j * self.samples + l;
        self.envelope[k] * Complex64::from_polar(1.0, self.phase[k])
    }

    /// Amplitude before normalization.
    pub fn raw_value(&self, j: usize, l: usize) -> Complex64 {
        self.value(j, l) * self.scale
    }

    /// `|Ψ|` at node `(j, l)`, normalized.
    pub fn magnitude(&self, j: usize, l: usize) -> f64 {
        self.envelope[j * self.samples + l].norm()
    }

    /// Magnitude-carrying part `Ẽ · sinc · spectral` at node `(j, l)`, normalized.
    pub fn envelope(&self, j: usize, l: usize) -> Complex64 {
        self.envelope[j * self.samples + l]
    }

    /// `L A / 2` at node `(j, l)`.
    pub fn half_phase(&self, j: usize, l: usize) -> f64 {
        self.phase[j * self.samples + l]
    }

    /// The same amplitude with the `exp(i L A / 2)` factor replaced by 1.
    pub fn without_phase(&self) -> JointAmplitude {
        JointAmplitude {
            phase: vec![0.0; self.phase.len()],
            ..self.clone()
        }
    }

    /// Envelope at arbitrary `(q_s, q_i)` by bilinear interpolation; zero off the grid.
    pub fn envelope_at(&self, q_s: f64, q_i: f64) -> Complex64 {
        let half = (self.samples / 2) as f64;
        let u = q_s / self.spacing + half;
        let v = q_i / self.spacing + half;
        let top = (self.samples - 1) as f64;
        if !(u >= 0.0 && u <= top && v >= 0.0 && v <= top) {
            return Complex64::new(0.0, 0.0);
        }
        let j = (u.floor() as usize).min(self.samples - 2);
        let l = (v.floor() as usize).min(self.samples - 2);
        let tu = u - j as f64;
        let tv = v - l as f64;
        let e = |a, b| self.envelope(a, b);
        e(j, l) * ((1.0 - tu) * (1.0 - tv))
            + e(j + 1, l) * (tu * (1.0 - tv))
            + e(j, l + 1) * ((1.0 - tu) * tv)
            + e(j + 1, l + 1) * (tu * tv)
    }

    /// CSV with columns `qs,qi,abs2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# samples = {}", self.samples);
        let _ = writeln!(out, "# q_spacing_rad_per_m = {}", self.spacing);
        let _ = writeln!(out, "# normalization_peak = {}", self.scale);
        out.push_str("qs,qi,abs2\n");
        for j in 0..self.samples {
            for l in 0..self.samples {
                let _ = writeln!(out, "{},{},{}", self.q(j), self.q(l), self.envelope(j, l).norm_sqr());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Both detectors at the same transverse position, moved together.
    #[default]
    BothTogether,
    /// Signal detector scanned, idler detector fixed on axis.
    SignalOnly,
    /// Idler detector scanned, signal detector fixed on axis.
    IdlerOnly,
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanMode::BothTogether => "both-together",
            ScanMode::SignalOnly => "signal-only",
            ScanMode::IdlerOnly => "idler-only",
        })
    }
}

impl FromStr for ScanMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both-together" | "both" | "together" => Ok(ScanMode::BothTogether),
            "signal-only" | "signal" => Ok(ScanMode::SignalOnly),
            "idler-only" | "idler" => Ok(ScanMode::IdlerOnly),
            other => Err(invalid(format!("unknown scan mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub positions: Vec<f64>,
    pub rates: Vec<f64>,
    pub mode: ScanMode,
    pub method: String,
    pub z_d: f64,
    pub slit_width: f64,
    /// Unnormalized maximum the rates were divided by.
    pub peak: f64,
    pub efficiency_drop: Option<f64>,
    pub warnings: Vec<String>,
}

impl ScanResult {
    fn normalized(
        positions: Vec<f64>,
        raw: Vec<f64>,
        mode: ScanMode,
        method: &str,
        geometry: &DetectionGeometry,
    ) -> Result<ScanResult> {
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(Error::NoPhaseMatching(format!(
                "{method} coincidence scan is identically zero"
            )));
        }
        Ok(ScanResult {
            positions,
            rates: raw.iter().map(|r| r / peak).collect(),
            mode,
            method: method.to_string(),
            z_d: geometry.z_d(),
            slit_width: geometry.slit_width(),
            peak,
            efficiency_drop: None,
            warnings: Vec::new(),
        })
    }

    /// CSV with columns `p_m,rate` and `#` metadata.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mode = {}", self.mode);
        let _ = writeln!(out, "# method = {}", self.method);
        let _ = writeln!(out, "# z_d_m = {}", self.z_d);
        let _ = writeln!(out, "# slit_width_m = {}", self.slit_width);
        let _ = writeln!(out, "# normalization_peak = {}", self.peak);
        if let Some(d) = self.efficiency_drop {
            let _ = writeln!(out, "# efficiency_drop = {d}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning = {w}");
        }
        out.push_str("p_m,rate\n");
        for (p, r) in self.positions.iter().zip(&self.rates) {
            let _ = writeln!(out, "{p},{r}");
        }
        out
    }
}

/// Midpoint offsets across a slit of width `a` (a single zero for `a = 0`).
pub fn slit_offsets(slit_width: f64) -> Vec<f64> {
    if slit_width == 0.0 {
        return vec![0.0];
    }
    (0..SLIT_QUADRATURE)
        .map(|k| slit_width * ((k as f64 + 0.5) / SLIT_QUADRATURE as f64 - 0.5))
        .collect()
}

/// Coincidence scan from the pump profile at the detection plane,
/// `C(p_s, p_i) ∝ |W((p_s + p_i)/2)|²`, averaged over the scanned detector's slit.
pub fn coincidence_scan_analytic(
    profile: &SampledField,
    geometry: &DetectionGeometry,
    mode: ScanMode,
) -> Result<ScanResult> {
    let positions = geometry.scan_positions();
    let offsets = slit_offsets(geometry.slit_width());
    let raw: Vec<f64> = positions
        .iter()
        .map(|&p| {
            offsets
                .iter()
                .map(|&u| {
                    let x = p + u;
                    let r = match mode {
                        ScanMode::BothTogether => x,
                        ScanMode::SignalOnly | ScanMode::IdlerOnly => 0.5 * x,
                    };
                    profile.intensity_at(r)
                })
                .sum::<f64>()
                / offsets.len() as f64
        })
        .collect();
    ScanResult::normalized(positions, raw, mode, "analytic", geometry)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMethod {
    /// Each photon's angular spectrum carried to the detection plane with the
    /// paraxial Fresnel propagator, then summed back to position space.
    #[default]
    Fresnel,
    /// Far-field mapping `q_j = k_j p_j / z_D`.
    FarField,
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMethod::Fresnel => "fresnel",
            OracleMethod::FarField => "far-field",
        })
    }
}

impl FromStr for OracleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fresnel" => Ok(OracleMethod::Fresnel),
            "far-field" | "farfield" | "fraunhofer" => Ok(OracleMethod::FarField),
            other => Err(invalid(format!("unknown oracle method `{other}`"))),
        }
    }
}

/// Detector coordinates `(x_s, x_i)` for scan position `p`, before slit offsets.
fn detector_centers(mode: ScanMode, p: f64) -> (f64, f64) {
    match mode {
        ScanMode::BothTogether => (p, p),
        ScanMode::SignalOnly => (p, 0.0),
        ScanMode::IdlerOnly => (0.0, p),
    }
}

/// Coincidence scan evaluated directly from the joint amplitude, integrating
/// `|amplitude|²` over both detector slits.
pub fn coincidence_scan_oracle(
    joint: &JointAmplitude,
    geometry: &DetectionGeometry,
    mode: ScanMode,
    method: OracleMethod,
) -> Result<ScanResult> {
    let positions = geometry.scan_positions();
    let offsets = slit_offsets(geometry.slit_width());
    let mut warnings = Vec::new();
    let raw = match method {
        OracleMethod::FarField => {
            let (_, ks, ki) = joint.kinematics.vacuum_wavenumbers();
            let z = geometry.z_d();
            let reach = positions.iter().map(|p| p.abs()).fold(0.0, f64::max) + 0.5 * geometry.slit_width();
            if ks.max(ki) * reach / z > joint.q_max() {
                warnings.push(format!(
                    "far-field mapping reaches q = {:.4e} rad/m beyond the joint grid ({:.4e} rad/m)",
                    ks.max(ki) * reach / z,
                    joint.q_max()
                ));
            }
            positions
                .iter()
                .map(|&p| {
                    let (cs, ci) = detector_centers(mode, p);
                    let mut acc = 0.0;
                    for &us in &offsets {
                        for &ui in &offsets {
                            let qs = ks * (cs + us) / z;
                            let qi = ki * (ci + ui) / z;
                            acc += joint.envelope_at(qs, qi).norm_sqr();
                        }
                    }
                    acc / (offsets.len() * offsets.len()) as f64
                })
                .collect::<Vec<f64>>()
        }
        OracleMethod::Fresnel => fresnel_rates(joint, geometry, mode, &positions, &offsets)?,
    };
    let mut result = ScanResult::normalized(positions, raw, mode, &format!("oracle-{method}"), geometry)?;
    result.warnings = warnings;
    Ok(result)
}

/// Effective free-space distance from the pair's birth plane to the detectors
/// for each photon: `z_D + L/n_j`.
fn fresnel_distances(joint: &JointAmplitude, z_d: f64) -> (f64, f64) {
    let k = &joint.kinematics;
    (z_d + k.crystal_length / k.n_signal, z_d + k.crystal_length / k.n_idler)
}

fn fresnel_rates(
    joint: &JointAmplitude,
    geometry: &DetectionGeometry,
    mode: ScanMode,
    positions: &[f64],
    offsets: &[f64],
) -> Result<Vec<f64>> {
    let m = joint.samples;
    let (_, ks, ki) = joint.kinematics.vacuum_wavenumbers();
    let (zs, zi) = fresnel_distances(joint, geometry.z_d());
    let dq = joint.spacing;
    // The free-space chirp exp(−i q² z / 2k) must stay Nyquist-sampled on the joint grid.
    let worst = (zs / ks).max(zi / ki);
    let q_max = joint.q_max();
    if q_max * dq * worst > PI {
        let needed = (2.0 * q_max * q_max * worst / PI).ceil() as usize;
        return Err(Error::Sampling {
            reason: format!(
                "detection-plane chirp undersampled on the joint grid (q_max {q_max:.4e} rad/m, Δq {dq:.4e} rad/m); \
                 raise the pump grid extent or lower the joint stride to reach the listed joint sample count"
            ),
            min_samples: needed.next_power_of_two(),
        });
    }
    let qs: Vec<f64> = joint.q_values();
    let hs: Vec<Complex64> = qs
        .iter()
        .map(|q| Complex64::from_polar(1.0, -q * q * zs / (2.0 * ks)))
        .collect();
    let hi: Vec<Complex64> = qs
        .iter()
        .map(|q| Complex64::from_polar(1.0, -q * q * zi / (2.0 * ki)))
        .collect();
    let b: Vec<Complex64> = (0..m * m)
        .map(|k| {
            let (j, l) = (k / m, k % m);
            joint.value(j, l) * hs[j] * hi[l]
        })
        .collect();
    let plane_wave = |x: f64| -> Vec<Complex64> { qs.iter().map(|q| Complex64::from_polar(1.0, q * x)).collect() };

    let rates = positions
        .par_iter()
        .map(|&p| {
            let (cs, ci) = detector_centers(mode, p);
            // Partial sums over the idler axis for each idler sample point.
            let partial: Vec<Vec<Complex64>> = offsets
                .iter()
                .map(|&ui| {
                    let e = plane_wave(ci + ui);
                    (0..m)
                        .map(|j| {
                            let row = &b[j * m..(j + 1) * m];
                            row.iter()
                                .zip(&e)
                                .fold(Complex64::new(0.0, 0.0), |acc, (v, w)| acc + v * w)
                        })
                        .collect()
                })
                .collect();
            let mut acc = 0.0;
            for &us in offsets {
                let e = plane_wave(cs + us);
                for c in &partial {
                    let a = c
                        .iter()
                        .zip(&e)
                        .fold(Complex64::new(0.0, 0.0), |acc, (v, w)| acc + v * w);
                    acc += a.norm_sqr();
                }
            }
            acc / (offsets.len() * offsets.len()) as f64
        })
        .collect();
    Ok(rates)
}

/// Thresholds on the Maker-efficiency drop across a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub warn: f64,
    pub violation: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            warn: 0.01,
            violation: 0.05,
        }
    }
}

/// Warning lines for an efficiency drop, empty inside the near-collinear regime.
pub fn regime_warnings(drop: f64, thresholds: RegimeThresholds) -> Vec<String> {
    if drop > thresholds.violation {
        vec![format!(
            "regime violation: phase-matching efficiency drops by {:.2}% across the scan (threshold {:.2}%); \
             the pump-transfer relation is not reliable",
            100.0 * drop,
            100.0 * thresholds.violation
        )]
    } else if drop > thresholds.warn {
        vec![format!(
            "phase-matching efficiency drops by {:.2}% across the scan (warning level {:.2}%)",
            100.0 * drop,
            100.0 * thresholds.warn
        )]
    } else {
        Vec::new()
    }
}

/// Detector-plane transverse wavevector for a photon at `omega` landing at `p`.
pub fn far_field_q(omega: f64, p: f64, z_d: f64) -> f64 {
    omega / SPEED_OF_LIGHT * p / z_d
}
