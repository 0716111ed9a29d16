//! A validated simulation scenario and the analysis pipelines run on it.

use std::fmt;

use crate::biphoton::{
    coincidence_scan_analytic, coincidence_scan_oracle, regime_warnings, JointAmplitude, JointGrid, OracleMethod,
    RegimeThresholds, ScanMode, ScanResult,
};
use crate::dispersion::{group_index, SharedIndexModel};
use crate::error::{invalid, Result};
use crate::field::{propagate_pump, to_angular_spectrum, GridSpec, PlacedElement, PumpPropagation};
use crate::model::{CrystalSpec, DetectionGeometry, FrequencyPair, PumpSpec};
use crate::numerics::normalized_cross_correlation;
use crate::phasematch::{efficiency_drop_over_scan, AngleConvention, Kinematics};

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub grid: GridSpec,
    pub joint: JointGrid,
    pub convention: AngleConvention,
    pub normalize: bool,
    pub thresholds: RegimeThresholds,
    pub oracle: OracleMethod,
    pub paraxial_bound: f64,
}

#[derive(Clone)]
pub struct Scenario {
    crystal: CrystalSpec,
    pump: PumpSpec,
    elements: Vec<PlacedElement>,
    detection: DetectionGeometry,
    numerics: Numerics,
    model: SharedIndexModel,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("crystal", &self.crystal)
            .field("pump", &self.pump)
            .field("elements", &self.elements)
            .field("detection", &self.detection)
            .field("numerics", &self.numerics)
            .field("model", &self.model.id())
            .finish()
    }
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.crystal == other.crystal
            && self.pump == other.pump
            && self.elements == other.elements
            && self.detection == other.detection
            && self.numerics == other.numerics
            && self.model.id() == other.model.id()
    }
}

/// Result of the collinear poling-period design.
#[derive(Debug, Clone, PartialEq)]
pub struct PolingReport {
    pub poling_period: f64,
    /// `|Δκ_z|` at `q = 0` with the designed period (rad/m).
    pub residual: f64,
    pub n_pump: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    pub pump_group_index: f64,
    pub model_id: String,
    pub temperature_c: f64,
}

impl PolingReport {
    pub fn to_text(&self) -> String {
        format!(
            "poling_period_m = {}\npoling_period_um = {}\nresidual_rad_per_m = {}\nn_pump = {}\nn_signal = {}\nn_idler = {}\npump_group_index = {}\nindex_model = {}\ntemperature_c = {}\n",
            self.poling_period,
            self.poling_period * 1e6,
            self.residual,
            self.n_pump,
            self.n_signal,
            self.n_idler,
            self.pump_group_index,
            self.model_id,
            self.temperature_c
        )
    }
}

/// Analytic and oracle scans of the same scenario and their agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanComparison {
    pub analytic: ScanResult,
    pub oracle: ScanResult,
    pub correlation: f64,
}

impl Scenario {
    pub fn new(
        crystal: CrystalSpec,
        pump: PumpSpec,
        elements: Vec<PlacedElement>,
        detection: DetectionGeometry,
        numerics: Numerics,
        model: SharedIndexModel,
    ) -> Result<Scenario> {
        if pump.waist_position() > 0.0 {
            return Err(invalid("pump waist must lie at or before the crystal entrance"));
        }
        let mut z = pump.waist_position();
        for e in &elements {
            e.element.validate()?;
            if e.z < z {
                return Err(invalid(format!("element at z = {} m is out of order", e.z)));
            }
            z = e.z + e.element.thickness();
            if z > 0.0 {
                return Err(invalid(format!(
                    "element at z = {} m extends past the crystal entrance",
                    e.z
                )));
            }
        }
        Ok(Scenario {
            crystal,
            pump,
            elements,
            detection,
            numerics,
            model,
        })
    }

    pub fn crystal(&self) -> &CrystalSpec {
        &self.crystal
    }
    pub fn pump(&self) -> &PumpSpec {
        &self.pump
    }
    pub fn elements(&self) -> &[PlacedElement] {
        &self.elements
    }
    pub fn detection(&self) -> &DetectionGeometry {
        &self.detection
    }
    pub fn numerics(&self) -> &Numerics {
        &self.numerics
    }
    pub fn model(&self) -> &SharedIndexModel {
        &self.model
    }

    pub fn with_detection(&self, detection: DetectionGeometry) -> Scenario {
        Scenario {
            detection,
            ..self.clone()
        }
    }

    pub fn with_crystal(&self, crystal: CrystalSpec) -> Scenario {
        Scenario {
            crystal,
            ..self.clone()
        }
    }

    pub fn with_numerics(&self, numerics: Numerics) -> Scenario {
        Scenario {
            numerics,
            ..self.clone()
        }
    }

    /// Degenerate frequencies `ω_s = ω_i = ω₀/2`.
    pub fn frequencies(&self) -> Result<FrequencyPair> {
        FrequencyPair::degenerate(self.pump.omega())
    }

    pub fn kinematics(&self) -> Result<Kinematics> {
        let mut k = Kinematics::new(self.frequencies()?, &self.crystal, &*self.model)?;
        k.paraxial_bound = self.numerics.paraxial_bound;
        Ok(k)
    }

    /// Collinear design for the scenario's wavelengths, axes and temperature.
    pub fn design_poling(&self) -> Result<PolingReport> {
        let wl = self.pump.center_wavelength();
        let axes = self.crystal.axes();
        let t = self.crystal.temperature_c();
        let period = crate::phasematch::design_poling_period(
            wl,
            2.0 * wl,
            2.0 * wl,
            axes,
            t,
            self.crystal.qpm_order(),
            &*self.model,
        )?;
        let designed = self.crystal.with_poling_period(period)?;
        let kin = Kinematics::new(self.frequencies()?, &designed, &*self.model)?;
        Ok(PolingReport {
            poling_period: period,
            residual: kin.delta_kz_unchecked(0.0, 0.0).abs(),
            n_pump: kin.n_pump,
            n_signal: kin.n_signal,
            n_idler: kin.n_idler,
            pump_group_index: group_index(&*self.model, wl, axes.pump, t)?,
            model_id: self.model.id().to_string(),
            temperature_c: t,
        })
    }

    /// `(α, efficiency)` for `α = 0, step, 2·step, ...` up to `alpha_max` (radians).
    pub fn maker_fringes(&self, alpha_max: f64, alpha_step: f64) -> Result<Vec<(f64, f64)>> {
        if !(alpha_step > 0.0) || !alpha_step.is_finite() {
            return Err(invalid("angle step must be positive"));
        }
        if !(alpha_max >= 0.0) || !alpha_max.is_finite() {
            return Err(invalid("maximum angle must be non-negative"));
        }
        let count = (alpha_max / alpha_step + 1e-9).floor() as usize + 1;
        let alphas: Vec<f64> = (0..count).map(|i| i as f64 * alpha_step).collect();
        let kin = self.kinematics()?;
        let convention = self.numerics.convention;
        alphas
            .iter()
            .map(|&a| Ok((a, kin.maker_efficiency(a, convention)?)))
            .collect()
    }

    pub fn efficiency_drop(&self) -> Result<f64> {
        efficiency_drop_over_scan(
            self.detection.scan_range(),
            self.detection.z_d(),
            self.frequencies()?,
            &self.crystal,
            &*self.model,
            self.numerics.convention,
        )
    }

    pub fn pump_propagation(&self) -> Result<PumpPropagation> {
        let kin = self.kinematics()?;
        propagate_pump(
            self.pump.waist_radius(),
            self.pump.center_wavelength(),
            self.pump.waist_position(),
            &self.elements,
            self.crystal.length(),
            kin.n_pump,
            self.detection.z_d(),
            self.numerics.grid,
        )
    }

    pub fn joint_amplitude(&self, propagation: &PumpPropagation) -> Result<JointAmplitude> {
        let spectrum = to_angular_spectrum(&propagation.at_crystal);
        JointAmplitude::build(
            &spectrum,
            &self.crystal,
            self.frequencies()?,
            self.pump.pulse(),
            &*self.model,
            self.numerics.joint,
        )
    }

    fn finish(&self, mut scan: ScanResult, drop: f64) -> ScanResult {
        scan.efficiency_drop = Some(drop);
        let mut warnings = regime_warnings(drop, self.numerics.thresholds);
        warnings.append(&mut scan.warnings);
        scan.warnings = warnings;
        if !self.numerics.normalize {
            for r in scan.rates.iter_mut() {
                *r *= scan.peak;
            }
        }
        scan
    }

    pub fn coincidence_analytic(&self, mode: ScanMode) -> Result<ScanResult> {
        let drop = self.efficiency_drop()?;
        let prop = self.pump_propagation()?;
        let scan = coincidence_scan_analytic(&prop.at_detection, &self.detection, mode)?;
        Ok(self.finish(scan, drop))
    }

    pub fn coincidence_oracle(&self, mode: ScanMode) -> Result<ScanResult> {
        let drop = self.efficiency_drop()?;
        let prop = self.pump_propagation()?;
        let joint = self.joint_amplitude(&prop)?;
        let scan = coincidence_scan_oracle(&joint, &self.detection, mode, self.numerics.oracle)?;
        Ok(self.finish(scan, drop))
    }

    /// Both scans from one pump propagation, with their normalized cross-correlation.
    pub fn coincidence_both(&self, mode: ScanMode) -> Result<ScanComparison> {
        let drop = self.efficiency_drop()?;
        let prop = self.pump_propagation()?;
        let analytic = coincidence_scan_analytic(&prop.at_detection, &self.detection, mode)?;
        let joint = self.joint_amplitude(&prop)?;
        let oracle = coincidence_scan_oracle(&joint, &self.detection, mode, self.numerics.oracle)?;
        let correlation = normalized_cross_correlation(&analytic.rates, &oracle.rates);
        Ok(ScanComparison {
            analytic: self.finish(analytic, drop),
            oracle: self.finish(oracle, drop),
            correlation,
        })
    }
}
