//! Longitudinal phase mismatch, QPM grating decomposition, Maker-fringe
//! efficiency and poling-period design.
//!
//! Transverse wavevectors are signed and one-dimensional (along x). In the
//! angle-based entry points the signal and idler are taken on opposite sides
//! of the pump axis, `q_s = +k_s sin α_s` and `q_i = −k_i sin α_i`, so the
//! symmetric case `α_s = α_i` conserves transverse momentum with a
//! plane-wave pump.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dispersion::{group_index, IndexModel};
use crate::error::{invalid, Error, Result};
use crate::model::{sinc, wavelength_from_omega, AxisAssignment, CrystalSpec, FrequencyPair, SPEED_OF_LIGHT};
use crate::numerics::bisect;

/// Default bound on `|q|/k` for the paraxial expansion.
pub const DEFAULT_PARAXIAL_BOUND: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpmGrating {
    pub poling_period: f64,
    pub duty_cycle: f64,
    pub order: u32,
}

impl QpmGrating {
    pub fn from_crystal(c: &CrystalSpec) -> Self {
        QpmGrating {
            poling_period: c.poling_period(),
            duty_cycle: c.duty_cycle(),
            order: c.qpm_order(),
        }
    }
}

/// `K_m = 2πm/Λ`.
pub fn grating_vector(g: &QpmGrating) -> f64 {
    2.0 * PI * g.order as f64 / g.poling_period
}

/// `G_m = sinc(mπD)`.
pub fn fourier_coefficient(g: &QpmGrating) -> f64 {
    sinc(g.order as f64 * PI * g.duty_cycle)
}

/// How an emission angle maps to a transverse wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleConvention {
    /// Angle outside the crystal: `q = (ω/c) sin α`.
    #[default]
    External,
    /// Angle inside the crystal: `q = (nω/c) sin α`.
    Internal,
}

impl FromStr for AngleConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "external" => Ok(AngleConvention::External),
            "internal" => Ok(AngleConvention::Internal),
            other => Err(invalid(format!("unknown angle convention `{other}`"))),
        }
    }
}

impl fmt::Display for AngleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleConvention::External => "external",
            AngleConvention::Internal => "internal",
        })
    }
}

/// Everything needed to evaluate the phase mismatch at fixed frequencies.
///
/// Indices and the pump group index are looked up once, so evaluating the
/// mismatch over a large `(q_s, q_i)` grid costs a handful of flops per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub freqs: FrequencyPair,
    pub n_pump: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    pub pump_group_index: f64,
    pub grating_vector: f64,
    pub crystal_length: f64,
    pub paraxial_bound: f64,
}

impl Kinematics {
    pub fn new(freqs: FrequencyPair, crystal: &CrystalSpec, model: &dyn IndexModel) -> Result<Self> {
        let axes = crystal.axes();
        let t = crystal.temperature_c();
        let wl_p = wavelength_from_omega(freqs.omega_pump())?;
        let wl_s = wavelength_from_omega(freqs.omega_s())?;
        let wl_i = wavelength_from_omega(freqs.omega_i())?;
        Ok(Kinematics {
            freqs,
            n_pump: model.refractive_index(wl_p, axes.pump, t)?,
            n_signal: model.refractive_index(wl_s, axes.signal, t)?,
            n_idler: model.refractive_index(wl_i, axes.idler, t)?,
            pump_group_index: group_index(model, wl_p, axes.pump, t)?,
            grating_vector: grating_vector(&QpmGrating::from_crystal(crystal)),
            crystal_length: crystal.length(),
            paraxial_bound: DEFAULT_PARAXIAL_BOUND,
        })
    }

    /// Wavenumbers inside the crystal `(k_pump, k_signal, k_idler)`.
    pub fn medium_wavenumbers(&self) -> (f64, f64, f64) {
        (
            self.n_pump * self.freqs.omega_pump() / SPEED_OF_LIGHT,
            self.n_signal * self.freqs.omega_s() / SPEED_OF_LIGHT,
            self.n_idler * self.freqs.omega_i() / SPEED_OF_LIGHT,
        )
    }

    /// Vacuum wavenumbers `(k_pump, k_signal, k_idler)`.
    pub fn vacuum_wavenumbers(&self) -> (f64, f64, f64) {
        (
            self.freqs.omega_pump() / SPEED_OF_LIGHT,
            self.freqs.omega_s() / SPEED_OF_LIGHT,
            self.freqs.omega_i() / SPEED_OF_LIGHT,
        )
    }

    /// `(n₀ω₀ − n_iω_i − n_sω_s)/c`, the collinear mismatch before the grating.
    pub fn collinear_material_mismatch(&self) -> f64 {
        let f = &self.freqs;
        (self.n_pump * f.omega_pump() - self.n_idler * f.omega_i() - self.n_signal * f.omega_s()) / SPEED_OF_LIGHT
    }

    pub fn check_paraxial(&self, q_s: f64, q_i: f64) -> Result<()> {
        let (kp, ks, ki) = self.medium_wavenumbers();
        let ratio = (q_s.abs() / ks).max(q_i.abs() / ki).max((q_s + q_i).abs() / kp);
        if ratio >= self.paraxial_bound || !ratio.is_finite() {
            return Err(Error::Paraxial {
                ratio,
                bound: self.paraxial_bound,
            });
        }
        Ok(())
    }

    /// Paraxial `Δκ_z` without the guard.
    pub fn delta_kz_unchecked(&self, q_s: f64, q_i: f64) -> f64 {
        let f = &self.freqs;
        let c = SPEED_OF_LIGHT;
        let q0 = q_s + q_i;
        self.collinear_material_mismatch() - self.grating_vector
            + c * q_i * q_i / (2.0 * self.n_idler * f.omega_i())
            + c * q_s * q_s / (2.0 * self.n_signal * f.omega_s())
            - c * q0 * q0 / (2.0 * self.n_pump * f.omega_pump())
    }

    pub fn delta_kz(&self, q_s: f64, q_i: f64) -> Result<f64> {
        self.check_paraxial(q_s, q_i)?;
        Ok(self.delta_kz_unchecked(q_s, q_i))
    }

    /// Group-velocity term `n_g Δω / c`.
    pub fn group_delay_term(&self) -> f64 {
        self.pump_group_index * self.freqs.delta_omega() / SPEED_OF_LIGHT
    }

    /// `A = Δκ_z − n_g Δω / c` without the guard.
    pub fn mismatch_unchecked(&self, q_s: f64, q_i: f64) -> f64 {
        self.delta_kz_unchecked(q_s, q_i) - self.group_delay_term()
    }

    pub fn mismatch(&self, q_s: f64, q_i: f64) -> Result<f64> {
        self.check_paraxial(q_s, q_i)?;
        Ok(self.mismatch_unchecked(q_s, q_i))
    }

    /// Transverse wavevectors for emission angles on opposite sides of the axis.
    pub fn angles_to_q(&self, alpha_i: f64, alpha_s: f64, convention: AngleConvention) -> (f64, f64) {
        let (ks, ki) = match convention {
            AngleConvention::External => {
                let (_, ks, ki) = self.vacuum_wavenumbers();
                (ks, ki)
            }
            AngleConvention::Internal => {
                let (_, ks, ki) = self.medium_wavenumbers();
                (ks, ki)
            }
        };
        (ks * alpha_s.sin(), -ki * alpha_i.sin())
    }

    pub fn mismatch_at_angles(&self, alpha_i: f64, alpha_s: f64, convention: AngleConvention) -> Result<f64> {
        let (q_s, q_i) = self.angles_to_q(alpha_i, alpha_s, convention);
        self.mismatch(q_s, q_i)
    }

    /// `sinc²(L·A/2)` for symmetric emission `α_i = α_s = α`.
    pub fn maker_efficiency(&self, alpha: f64, convention: AngleConvention) -> Result<f64> {
        let a = self.mismatch_at_angles(alpha, alpha, convention)?;
        let s = sinc(0.5 * self.crystal_length * a);
        Ok(s * s)
    }
}

/// Inputs of the paraxial longitudinal mismatch.
#[derive(Debug, Clone, Copy)]
pub struct MismatchInputs<'a> {
    pub freqs: FrequencyPair,
    pub q_signal: f64,
    pub q_idler: f64,
    pub crystal: &'a CrystalSpec,
    pub model: &'a dyn IndexModel,
    pub paraxial_bound: f64,
}

/// Paraxial longitudinal phase mismatch
/// `(n₀ω₀ − n_iω_i − n_sω_s)/c − 2πm/Λ + c q_i²/(2n_iω_i) + c q_s²/(2n_sω_s) − c (q_i+q_s)²/(2n₀ω₀)`.
pub fn delta_kz_paraxial(inputs: &MismatchInputs<'_>) -> Result<f64> {
    let mut kin = Kinematics::new(inputs.freqs, inputs.crystal, inputs.model)?;
    kin.paraxial_bound = inputs.paraxial_bound;
    kin.delta_kz(inputs.q_signal, inputs.q_idler)
}

/// The function `A = Δκ_z − n_g Δω/c` at emission angles `α_i`, `α_s`.
#[allow(clippy::too_many_arguments)]
pub fn mismatch_a(
    alpha_i: f64,
    alpha_s: f64,
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    pump_group_index: f64,
    convention: AngleConvention,
) -> Result<f64> {
    let mut kin = Kinematics::new(freqs, crystal, model)?;
    kin.pump_group_index = pump_group_index;
    kin.mismatch_at_angles(alpha_i, alpha_s, convention)
}

/// Maker-fringe efficiency `sinc²(L_z A(α)/2)`, equal to 1 at perfect phase matching.
pub fn maker_efficiency(
    alpha: f64,
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    convention: AngleConvention,
) -> Result<f64> {
    Kinematics::new(freqs, crystal, model)?.maker_efficiency(alpha, convention)
}

/// Efficiency over a set of angles; evaluated in parallel, returned in input order.
pub fn maker_curve(
    alphas: &[f64],
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    convention: AngleConvention,
) -> Result<Vec<f64>> {
    let kin = Kinematics::new(freqs, crystal, model)?;
    alphas
        .par_iter()
        .map(|&a| kin.maker_efficiency(a, convention))
        .collect()
}

/// First zero `α₀ > 0` of the Maker profile, where `L_z A(α₀)/2 = π`.
pub fn first_maker_zero(
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    convention: AngleConvention,
) -> Result<f64> {
    let kin = Kinematics::new(freqs, crystal, model)?;
    let l = crystal.length();
    let a0 = kin.mismatch_at_angles(0.0, 0.0, convention)?;
    if (0.5 * l * a0).abs() >= PI {
        return Err(Error::Root(
            "collinear point already beyond the first Maker zero".into(),
        ));
    }
    let target = if kin.mismatch_at_angles(1e-6, 1e-6, convention)? >= a0 {
        PI
    } else {
        -PI
    };
    bisect(
        |alpha| Ok(0.5 * l * kin.mismatch_at_angles(alpha, alpha, convention)? - target),
        0.0,
        1e-3,
        0.15,
    )
}

/// Small-angle detector mapping `α = p/z_D`.
pub fn detector_angle(p: f64, z_d: f64) -> f64 {
    p / z_d
}

/// Samples used by [`efficiency_drop_over_scan`].
pub const DROP_SCAN_SAMPLES: usize = 401;

/// `1 − min makerEfficiency(p/z_D)` for `p` across `[−range/2, range/2]`.
pub fn efficiency_drop_over_scan(
    scan_range: f64,
    z_d: f64,
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    convention: AngleConvention,
) -> Result<f64> {
    if !(scan_range >= 0.0) {
        return Err(invalid("scan range must be non-negative"));
    }
    if !(z_d > 0.0) {
        return Err(invalid("detection distance must be positive"));
    }
    let kin = Kinematics::new(freqs, crystal, model)?;
    let peak = kin.maker_efficiency(0.0, convention)?;
    let mut worst = peak;
    for i in 0..DROP_SCAN_SAMPLES {
        let p = scan_range * (i as f64 / (DROP_SCAN_SAMPLES - 1) as f64 - 0.5);
        let e = kin.maker_efficiency(detector_angle(p, z_d), convention)?;
        worst = worst.min(e);
    }
    Ok(1.0 - worst)
}

/// Collinear first-order-design poling period
/// `Λ = m / (n_p/λ_p − n_s/λ_s − n_i/λ_i)`.
#[allow(clippy::too_many_arguments)]
pub fn design_poling_period(
    pump_wavelength: f64,
    signal_wavelength: f64,
    idler_wavelength: f64,
    axes: AxisAssignment,
    temperature_c: f64,
    order: u32,
    model: &dyn IndexModel,
) -> Result<f64> {
    if order < 1 {
        return Err(invalid("QPM order must be at least 1"));
    }
    let n_p = model.refractive_index(pump_wavelength, axes.pump, temperature_c)?;
    let n_s = model.refractive_index(signal_wavelength, axes.signal, temperature_c)?;
    let n_i = model.refractive_index(idler_wavelength, axes.idler, temperature_c)?;
    let w = |wl: f64| 2.0 * PI * SPEED_OF_LIGHT / wl;
    // Same arithmetic as Kinematics::collinear_material_mismatch so the
    // round trip cancels to rounding level.
    let material = (n_p * w(pump_wavelength) - n_i * w(idler_wavelength) - n_s * w(signal_wavelength)) / SPEED_OF_LIGHT;
    let scale = n_p * w(pump_wavelength) / SPEED_OF_LIGHT;
    if !(material > 1e-12 * scale) {
        return Err(Error::NoPhaseMatching(format!(
            "n_p/λ_p − n_s/λ_s − n_i/λ_i = {:e} m⁻¹ is not positive (n_p = {n_p}, n_s = {n_s}, n_i = {n_i})",
            material / (2.0 * PI)
        )));
    }
    Ok(2.0 * PI * order as f64 / material)
}

/// Crystal temperature at which the collinear mismatch vanishes for the
/// crystal's own poling period, searched in `[t_lo, t_hi]` (°C).
pub fn phase_matching_temperature(
    freqs: FrequencyPair,
    crystal: &CrystalSpec,
    model: &dyn IndexModel,
    t_lo: f64,
    t_hi: f64,
) -> Result<f64> {
    bisect(
        |t| {
            let c = crystal.with_temperature(t)?;
            Ok(Kinematics::new(freqs, &c, model)?.delta_kz_unchecked(0.0, 0.0))
        },
        t_lo,
        t_hi,
        t_hi,
    )
}
