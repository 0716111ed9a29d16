//! Physical constants, shared domain types and elementary math.
//!
//! Everything inside the crate is SI: metres, seconds, rad/s. Human units
//! (nm, µm, mm, fs, °C) are converted at the configuration boundary.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Unnormalized sinc, `sin(x)/x`.
///
/// Note the convention: this is *not* the `sin(πx)/(πx)` used in signal
/// processing. Phase-matching factors are written as `sinc(Δk·L/2)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor series; error below 1e-20 in this range.
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `ω = 2πc/λ`.
pub fn angular_frequency(wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(2.0 * PI * SPEED_OF_LIGHT / wavelength)
}

/// `λ = 2πc/ω`.
pub fn wavelength_from_omega(omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(invalid(format!("angular frequency must be positive, got {omega}")));
    }
    Ok(2.0 * PI * SPEED_OF_LIGHT / omega)
}

/// Pulse envelope parameter `Γ = 1/τ²` of the Gaussian pump envelope
/// `exp(-Γ (t - n_g z / c)²)`. No FWHM conversion is applied to `τ`.
pub fn gamma_from_pulse_width(tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid(format!("pulse duration must be positive, got {tau}")));
    }
    Ok(1.0 / (tau * tau))
}

/// Crystallographic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(invalid(format!("unknown crystal axis `{other}` (expected x, y or z)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

/// Polarization assignment of the three interacting fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisAssignment {
    pub pump: Axis,
    pub signal: Axis,
    pub idler: Axis,
}

impl Default for AxisAssignment {
    /// Type-II default: pump and signal along y, idler along z.
    fn default() -> Self {
        AxisAssignment {
            pump: Axis::Y,
            signal: Axis::Y,
            idler: Axis::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionType {
    Type0,
    TypeI,
    TypeII,
}

impl FromStr for InteractionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "type-0" | "type0" => Ok(InteractionType::Type0),
            "i" | "type-i" | "typei" => Ok(InteractionType::TypeI),
            "ii" | "type-ii" | "typeii" => Ok(InteractionType::TypeII),
            other => Err(invalid(format!("unknown interaction type `{other}`"))),
        }
    }
}

impl fmt::Display for InteractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InteractionType::Type0 => "0",
            InteractionType::TypeI => "I",
            InteractionType::TypeII => "II",
        };
        f.write_str(s)
    }
}

/// Geometry and poling of the nonlinear crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    length: f64,
    poling_period: f64,
    duty_cycle: f64,
    qpm_order: u32,
    temperature_c: f64,
    axes: AxisAssignment,
    interaction: InteractionType,
}

impl CrystalSpec {
    pub fn new(
        length: f64,
        poling_period: f64,
        duty_cycle: f64,
        qpm_order: u32,
        temperature_c: f64,
        axes: AxisAssignment,
        interaction: InteractionType,
    ) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid(format!("crystal length must be positive, got {length}")));
        }
        if !(poling_period > 0.0) || !poling_period.is_finite() {
            return Err(invalid(format!("poling period must be positive, got {poling_period}")));
        }
        if !(duty_cycle > 0.0 && duty_cycle < 1.0) {
            return Err(invalid(format!("duty cycle must lie in (0, 1), got {duty_cycle}")));
        }
        if qpm_order < 1 {
            return Err(invalid("QPM order must be at least 1"));
        }
        if !temperature_c.is_finite() {
            return Err(invalid("temperature must be finite"));
        }
        match interaction {
            InteractionType::TypeII if axes.signal == axes.idler => {
                return Err(invalid("type-II interaction needs orthogonal signal and idler axes"));
            }
            InteractionType::TypeI if axes.signal != axes.idler => {
                return Err(invalid("type-I interaction needs parallel signal and idler axes"));
            }
            InteractionType::Type0 if axes.signal != axes.idler || axes.pump != axes.signal => {
                return Err(invalid("type-0 interaction needs all fields on one axis"));
            }
            _ => {}
        }
        Ok(CrystalSpec {
            length,
            poling_period,
            duty_cycle,
            qpm_order,
            temperature_c,
            axes,
            interaction,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn poling_period(&self) -> f64 {
        self.poling_period
    }
    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }
    pub fn qpm_order(&self) -> u32 {
        self.qpm_order
    }
    pub fn temperature_c(&self) -> f64 {
        self.temperature_c
    }
    pub fn axes(&self) -> AxisAssignment {
        self.axes
    }
    pub fn interaction(&self) -> InteractionType {
        self.interaction
    }

    /// Same crystal with a different poling period.
    pub fn with_poling_period(&self, period: f64) -> Result<Self> {
        Self::new(
            self.length,
            period,
            self.duty_cycle,
            self.qpm_order,
            self.temperature_c,
            self.axes,
            self.interaction,
        )
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(
            length,
            self.poling_period,
            self.duty_cycle,
            self.qpm_order,
            self.temperature_c,
            self.axes,
            self.interaction,
        )
    }

    pub fn with_temperature(&self, temperature_c: f64) -> Result<Self> {
        Self::new(
            self.length,
            self.poling_period,
            self.duty_cycle,
            self.qpm_order,
            temperature_c,
            self.axes,
            self.interaction,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Monochromatic pump.
    Cw,
    /// Gaussian envelope with width parameter τ (s).
    Pulsed { tau: f64 },
}

/// Pump beam: carrier, transverse waist and temporal envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    center_wavelength: f64,
    waist_radius: f64,
    waist_position: f64,
    pulse: PulseShape,
}

impl PumpSpec {
    pub fn new(center_wavelength: f64, waist_radius: f64, waist_position: f64, pulse: PulseShape) -> Result<Self> {
        if !(center_wavelength > 0.0) || !center_wavelength.is_finite() {
            return Err(invalid(format!(
                "pump wavelength must be positive, got {center_wavelength}"
            )));
        }
        if !(waist_radius > 0.0) || !waist_radius.is_finite() {
            return Err(invalid(format!("pump waist must be positive, got {waist_radius}")));
        }
        if !waist_position.is_finite() {
            return Err(invalid("pump waist position must be finite"));
        }
        if let PulseShape::Pulsed { tau } = pulse {
            gamma_from_pulse_width(tau)?;
        }
        Ok(PumpSpec {
            center_wavelength,
            waist_radius,
            waist_position,
            pulse,
        })
    }

    pub fn center_wavelength(&self) -> f64 {
        self.center_wavelength
    }
    pub fn waist_radius(&self) -> f64 {
        self.waist_radius
    }
    pub fn waist_position(&self) -> f64 {
        self.waist_position
    }
    pub fn pulse(&self) -> PulseShape {
        self.pulse
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.center_wavelength
    }

    /// `Γ = 1/τ²`, `None` for a CW pump.
    pub fn gamma(&self) -> Option<f64> {
        match self.pulse {
            PulseShape::Cw => None,
            PulseShape::Pulsed { tau } => Some(1.0 / (tau * tau)),
        }
    }
}

/// Detector placement, slit apertures, scan and interference filters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionGeometry {
    z_d: f64,
    slit_width: f64,
    scan_range: f64,
    scan_step: f64,
    filter_center: f64,
    filter_fwhm: f64,
}

impl DetectionGeometry {
    pub fn new(
        z_d: f64,
        slit_width: f64,
        scan_range: f64,
        scan_step: f64,
        filter_center: f64,
        filter_fwhm: f64,
    ) -> Result<Self> {
        if !(z_d > 0.0) || !z_d.is_finite() {
            return Err(invalid(format!("detection distance must be positive, got {z_d}")));
        }
        if !(slit_width >= 0.0) || !slit_width.is_finite() {
            return Err(invalid(format!("detector slit width must be >= 0, got {slit_width}")));
        }
        if !(scan_step > 0.0) || !scan_step.is_finite() {
            return Err(invalid(format!("scan step must be positive, got {scan_step}")));
        }
        if !(scan_step <= scan_range) || !scan_range.is_finite() {
            return Err(invalid(format!(
                "scan step {scan_step} must not exceed scan range {scan_range}"
            )));
        }
        if !(filter_center > 0.0) || !(filter_fwhm > 0.0) {
            return Err(invalid("filter center and FWHM must be positive"));
        }
        Ok(DetectionGeometry {
            z_d,
            slit_width,
            scan_range,
            scan_step,
            filter_center,
            filter_fwhm,
        })
    }

    pub fn z_d(&self) -> f64 {
        self.z_d
    }
    pub fn slit_width(&self) -> f64 {
        self.slit_width
    }
    pub fn scan_range(&self) -> f64 {
        self.scan_range
    }
    pub fn scan_step(&self) -> f64 {
        self.scan_step
    }
    pub fn filter_center(&self) -> f64 {
        self.filter_center
    }
    pub fn filter_fwhm(&self) -> f64 {
        self.filter_fwhm
    }

    pub fn with_z_d(&self, z_d: f64) -> Result<Self> {
        Self::new(
            z_d,
            self.slit_width,
            self.scan_range,
            self.scan_step,
            self.filter_center,
            self.filter_fwhm,
        )
    }

    pub fn with_slit_width(&self, slit_width: f64) -> Result<Self> {
        Self::new(
            self.z_d,
            slit_width,
            self.scan_range,
            self.scan_step,
            self.filter_center,
            self.filter_fwhm,
        )
    }

    /// Detector positions, centered on the axis: `-range/2, -range/2 + step, ...`.
    pub fn scan_positions(&self) -> Vec<f64> {
        let count = (self.scan_range / self.scan_step + 1e-9).floor() as usize + 1;
        let start = -0.5 * self.scan_range;
        (0..count).map(|i| start + i as f64 * self.scan_step).collect()
    }
}

/// Signal/idler angular frequencies and the energy mismatch against the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPair {
    omega_pump: f64,
    omega_s: f64,
    omega_i: f64,
}

impl FrequencyPair {
    pub fn new(omega_pump: f64, omega_s: f64, omega_i: f64) -> Result<Self> {
        for (name, w) in [("pump", omega_pump), ("signal", omega_s), ("idler", omega_i)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(invalid(format!("{name} frequency must be positive, got {w}")));
            }
        }
        Ok(FrequencyPair {
            omega_pump,
            omega_s,
            omega_i,
        })
    }

    /// `ω_s = ω_i = ω₀/2`, so `Δω = 0` exactly.
    pub fn degenerate(omega_pump: f64) -> Result<Self> {
        Self::new(omega_pump, 0.5 * omega_pump, 0.5 * omega_pump)
    }

    pub fn omega_pump(&self) -> f64 {
        self.omega_pump
    }
    pub fn omega_s(&self) -> f64 {
        self.omega_s
    }
    pub fn omega_i(&self) -> f64 {
        self.omega_i
    }
    /// `Δω = ω₀ − ω_s − ω_i`.
    pub fn delta_omega(&self) -> f64 {
        self.omega_pump - self.omega_s - self.omega_i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sinc_reference_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert_relative_eq!(sinc(PI / 2.0), 2.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(sinc(PI / 2.0), 0.636_619_8, epsilon = 1e-7);
    }

    #[test]
    fn sinc_branches_agree_at_switch() {
        let x = 1e-4;
        assert_relative_eq!(sinc(x * (1.0 - 1e-12)), x.sin() / x, max_relative = 1e-15);
    }

    #[test]
    fn angular_frequency_values() {
        // 2πc/λ evaluated independently: 4.560899678713930e15 and half of it.
        assert_relative_eq!(
            angular_frequency(413e-9).unwrap(),
            4.560_899_678_713_930e15,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            angular_frequency(826e-9).unwrap(),
            2.280_449_839_356_965e15,
            max_relative = 1e-14
        );
        assert!(angular_frequency(0.0).is_err());
        assert!(angular_frequency(-1.0).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma_from_pulse_width(200e-15).unwrap(), 2.5e25, max_relative = 1e-14);
        assert_eq!(gamma_from_pulse_width(1.0).unwrap(), 1.0);
        let g1 = gamma_from_pulse_width(3e-13).unwrap();
        let g2 = gamma_from_pulse_width(6e-13).unwrap();
        assert_relative_eq!(g1 / g2, 4.0, max_relative = 1e-14);
        assert!(gamma_from_pulse_width(0.0).is_err());
    }

    #[test]
    fn crystal_validation() {
        let axes = AxisAssignment::default();
        let ok = CrystalSpec::new(9.6e-3, 11.46e-6, 0.5, 1, 40.0, axes, InteractionType::TypeII);
        assert!(ok.is_ok());
        assert!(CrystalSpec::new(0.0, 11e-6, 0.5, 1, 40.0, axes, InteractionType::TypeII).is_err());
        assert!(CrystalSpec::new(1e-3, 0.0, 0.5, 1, 40.0, axes, InteractionType::TypeII).is_err());
        assert!(CrystalSpec::new(1e-3, 1e-5, 0.0, 1, 40.0, axes, InteractionType::TypeII).is_err());
        assert!(CrystalSpec::new(1e-3, 1e-5, 1.0, 1, 40.0, axes, InteractionType::TypeII).is_err());
        assert!(CrystalSpec::new(1e-3, 1e-5, 0.5, 0, 40.0, axes, InteractionType::TypeII).is_err());
        let same = AxisAssignment {
            pump: Axis::Z,
            signal: Axis::Z,
            idler: Axis::Z,
        };
        assert!(CrystalSpec::new(1e-3, 1e-5, 0.5, 1, 40.0, same, InteractionType::TypeII).is_err());
        assert!(CrystalSpec::new(1e-3, 1e-5, 0.5, 1, 40.0, same, InteractionType::Type0).is_ok());
    }

    #[test]
    fn pump_gamma_and_cw() {
        let p = PumpSpec::new(413e-9, 0.5e-3, 0.0, PulseShape::Pulsed { tau: 200e-15 }).unwrap();
        assert_relative_eq!(p.gamma().unwrap(), 2.5e25, max_relative = 1e-14);
        let cw = PumpSpec::new(413e-9, 0.5e-3, 0.0, PulseShape::Cw).unwrap();
        assert!(cw.gamma().is_none());
        assert!(PumpSpec::new(413e-9, 0.5e-3, 0.0, PulseShape::Pulsed { tau: -1.0 }).is_err());
        assert!(PumpSpec::new(413e-9, 0.0, 0.0, PulseShape::Cw).is_err());
        assert!(PumpSpec::new(0.0, 1e-3, 0.0, PulseShape::Cw).is_err());
    }

    #[test]
    fn geometry_validation_and_positions() {
        let g = DetectionGeometry::new(0.5, 1e-4, 2e-3, 0.5e-3, 826e-9, 2e-9).unwrap();
        let p = g.scan_positions();
        assert_eq!(p.len(), 5);
        assert_relative_eq!(p[0], -1e-3);
        assert_relative_eq!(p[4], 1e-3, max_relative = 1e-12);
        assert!(DetectionGeometry::new(0.0, 1e-4, 2e-3, 1e-4, 826e-9, 2e-9).is_err());
        assert!(DetectionGeometry::new(0.5, -1e-4, 2e-3, 1e-4, 826e-9, 2e-9).is_err());
        assert!(DetectionGeometry::new(0.5, 1e-4, 2e-3, 0.0, 826e-9, 2e-9).is_err());
        assert!(DetectionGeometry::new(0.5, 1e-4, 1e-4, 2e-4, 826e-9, 2e-9).is_err());
        assert!(DetectionGeometry::new(0.5, 0.0, 1e-4, 1e-4, 826e-9, 2e-9).is_ok());
    }

    #[test]
    fn frequency_pair_mismatch() {
        let w0 = angular_frequency(413e-9).unwrap();
        let f = FrequencyPair::degenerate(w0).unwrap();
        assert_eq!(f.delta_omega(), 0.0);
        let g = FrequencyPair::new(w0, 0.5 * w0 + 1e12, 0.5 * w0).unwrap();
        assert_relative_eq!(g.delta_omega(), -1e12, max_relative = 1e-3);
        assert!(FrequencyPair::new(w0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn sinc_is_even_and_bounded(x in -1e3f64..1e3) {
            prop_assert_eq!(sinc(x), sinc(-x));
            if x.abs() > 1e-6 {
                prop_assert!(sinc(x).abs() < 1.0);
            }
        }

        #[test]
        fn duty_cycle_boundary(d in -1.0f64..2.0) {
            let r = CrystalSpec::new(1e-3, 1e-5, d, 1, 25.0, AxisAssignment::default(), InteractionType::TypeII);
            prop_assert_eq!(r.is_ok(), d > 0.0 && d < 1.0);
        }

        #[test]
        fn scan_step_boundary(step in 1e-6f64..4e-3, range in 0.0f64..3e-3) {
            let r = DetectionGeometry::new(0.5, 1e-4, range, step, 826e-9, 2e-9);
            prop_assert_eq!(r.is_ok(), step <= range);
        }

        #[test]
        fn wavelength_round_trip(lambda in 1e-7f64..1e-5) {
            let w = angular_frequency(lambda).unwrap();
            let back = wavelength_from_omega(w).unwrap();
            prop_assert!(((back - lambda) / lambda).abs() < 1e-15);
        }
    }
}
