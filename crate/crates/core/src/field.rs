//! Scalar 1D pump field: synthesis, angular spectrum, paraxial propagation
//! and thin optical elements.
//!
//! Grids are centered: sample `n` of an `N`-point field sits at
//! `x_n = (n − N/2)·Δx` and spectral sample `k` at `q_k = (k − N/2)·Δq` with
//! `Δq = 2π/(N·Δx)`. The transform pair uses the unitary continuous
//! normalization
//!
//! ```text
//! Ẽ(q) = (2π)^(-1/2) ∫ E(x) e^{-iqx} dx,    E(x) = (2π)^(-1/2) ∫ Ẽ(q) e^{iqx} dq
//! ```
//!
//! so `Σ|E|²Δx = Σ|Ẽ|²Δq` holds exactly on the grid.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::numerics::interp_linear;

/// Spectral power allowed outside the band in which a phase chirp must be
/// Nyquist-sampled.
pub const ALIAS_POWER_TOLERANCE: f64 = 1e-9;

/// Sample count and transverse extent of a 1D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub samples: usize,
    pub extent: f64,
}

impl GridSpec {
    pub fn new(samples: usize, extent: f64) -> Result<Self> {
        if samples < 2 || !samples.is_power_of_two() {
            return Err(invalid(format!(
                "sample count must be a power of two >= 2, got {samples}"
            )));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(invalid(format!("grid extent must be positive, got {extent}")));
        }
        Ok(GridSpec { samples, extent })
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.samples as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    values: Vec<Complex64>,
    extent: f64,
    wavelength: f64,
    plane_z: f64,
}

impl SampledField {
    pub fn new(values: Vec<Complex64>, extent: f64, wavelength: f64, plane_z: f64) -> Result<Self> {
        GridSpec::new(values.len(), extent)?;
        if !(wavelength > 0.0) {
            return Err(invalid("field wavelength must be positive"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("field contains non-finite samples"));
        }
        Ok(SampledField {
            values,
            extent,
            wavelength,
            plane_z,
        })
    }

    /// Field sampled from a function of `x`.
    pub fn from_fn(grid: GridSpec, wavelength: f64, plane_z: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let dx = grid.spacing();
        let half = (grid.samples / 2) as f64;
        let values = (0..grid.samples).map(|n| f((n as f64 - half) * dx)).collect();
        Self::new(values, grid.extent, wavelength, plane_z)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn extent(&self) -> f64 {
        self.extent
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn plane_z(&self) -> f64 {
        self.plane_z
    }
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            samples: self.values.len(),
            extent: self.extent,
        }
    }
    pub fn spacing(&self) -> f64 {
        self.extent / self.values.len() as f64
    }
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn x(&self, n: usize) -> f64 {
        (n as f64 - (self.values.len() / 2) as f64) * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.values.len()).map(|n| self.x(n)).collect()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Σ|E|²Δx`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spacing()
    }

    /// Intensity at an arbitrary position by linear interpolation of `|E|²`.
    pub fn intensity_at(&self, x: f64) -> f64 {
        // Only the two bracketing samples are needed; avoid building the full vectors.
        let dx = self.spacing();
        let pos = x / dx + (self.values.len() / 2) as f64;
        if pos < 0.0 || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let a = self.values[i].norm_sqr();
        let b = self.values[i + 1].norm_sqr();
        a + t * (b - a)
    }

    /// Intensity at several positions; equivalent to mapping [`Self::intensity_at`].
    pub fn intensity_at_many(&self, xs: &[f64]) -> Vec<f64> {
        let pos = self.positions();
        let inten = self.intensity();
        xs.iter().map(|&x| interp_linear(&pos, &inten, x)).collect()
    }

    /// Half-width around the origin containing all but `tolerance` of the power.
    pub fn support_half_width(&self, tolerance: f64) -> f64 {
        let n = self.values.len();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let mut outside = 0.0;
        // Walk inward from the edges in pairs of symmetric samples.
        let half = n / 2;
        for d in (1..=half).rev() {
            let mut ring = self.values[half - d].norm_sqr();
            if half + d < n {
                ring += self.values[half + d].norm_sqr();
            }
            if outside + ring > tolerance * total {
                return d as f64 * self.spacing();
            }
            outside += ring;
        }
        0.0
    }

    /// CSV with columns `x_m,re,im,intensity` and a `#` metadata header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# wavelength_m = {}", self.wavelength);
        let _ = writeln!(out, "# plane_z_m = {}", self.plane_z);
        let _ = writeln!(out, "# samples = {}", self.values.len());
        let _ = writeln!(out, "# extent_m = {}", self.extent);
        out.push_str("x_m,re,im,intensity\n");
        for (n, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", self.x(n), v.re, v.im, v.norm_sqr());
        }
        out
    }

    fn with_values(&self, values: Vec<Complex64>, plane_z: f64) -> SampledField {
        SampledField {
            values,
            extent: self.extent,
            wavelength: self.wavelength,
            plane_z,
        }
    }
}

/// Angular spectrum on the conjugate grid of a [`SampledField`].
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    values: Vec<Complex64>,
    x_extent: f64,
    wavelength: f64,
    plane_z: f64,
}

impl AngularSpectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn plane_z(&self) -> f64 {
        self.plane_z
    }
    /// Position-space extent of the grid this spectrum belongs to.
    pub fn x_extent(&self) -> f64 {
        self.x_extent
    }
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.x_extent
    }
    /// Full width of the q grid, `N·Δq`.
    pub fn q_extent(&self) -> f64 {
        self.values.len() as f64 * self.spacing()
    }
    pub fn q(&self, k: usize) -> f64 {
        (k as f64 - (self.values.len() / 2) as f64) * self.spacing()
    }
    pub fn q_values(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.q(k)).collect()
    }
    /// `Σ|Ẽ|²Δq`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spacing()
    }

    /// Spectrum at grid index offset `m` from the center (`q = m·Δq`).
    pub fn at_offset(&self, m: i64) -> Option<Complex64> {
        let idx = m + (self.values.len() / 2) as i64;
        if idx < 0 || idx >= self.values.len() as i64 {
            None
        } else {
            Some(self.values[idx as usize])
        }
    }

    /// Smallest `|q|` such that all but `tolerance` of the spectral power lies inside it.
    pub fn band_limit(&self, tolerance: f64) -> f64 {
        let n = self.values.len();
        let half = n / 2;
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let mut outside = 0.0;
        for d in (1..=half).rev() {
            let mut ring = self.values[half - d].norm_sqr();
            if half + d < n {
                ring += self.values[half + d].norm_sqr();
            }
            if outside + ring > tolerance * total {
                return d as f64 * self.spacing();
            }
            outside += ring;
        }
        0.0
    }
}

fn centered_fft(values: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    buf.rotate_left(n / 2);
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    buf.rotate_left(n / 2);
    buf
}

pub fn to_angular_spectrum(field: &SampledField) -> AngularSpectrum {
    let scale = field.spacing() / (2.0 * PI).sqrt();
    let values = centered_fft(&field.values, false)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    AngularSpectrum {
        values,
        x_extent: field.extent,
        wavelength: field.wavelength,
        plane_z: field.plane_z,
    }
}

pub fn from_angular_spectrum(spectrum: &AngularSpectrum) -> SampledField {
    let scale = spectrum.spacing() / (2.0 * PI).sqrt();
    let values = centered_fft(&spectrum.values, true)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    SampledField {
        values,
        extent: spectrum.x_extent,
        wavelength: spectrum.wavelength,
        plane_z: spectrum.plane_z,
    }
}

/// Gaussian at its waist, `E(x) = exp(−x²/w₀²)` (irradiance `e⁻²` at `x = w₀`).
pub fn gaussian_source(waist_radius: f64, wavelength: f64, grid: GridSpec, plane_z: f64) -> Result<SampledField> {
    if !(waist_radius > 0.0) {
        return Err(invalid("waist radius must be positive"));
    }
    if grid.extent < 8.0 * waist_radius {
        return Err(Error::GridTooSmall(format!(
            "grid extent {} m is below 8 waist radii ({} m)",
            grid.extent,
            8.0 * waist_radius
        )));
    }
    let w2 = waist_radius * waist_radius;
    SampledField::from_fn(grid, wavelength, plane_z, |x| Complex64::new((-x * x / w2).exp(), 0.0))
}

/// Smallest power-of-two sample count that keeps the current spacing and
/// satisfies `d·q_b·Δq/(n k) ≤ π`.
fn min_samples_for_chirp(distance: f64, band: f64, dx: f64, nk: f64) -> usize {
    let need = 2.0 * distance * band / (dx * nk);
    let need = need.ceil().max(2.0);
    if need > (1u64 << 40) as f64 {
        return usize::MAX;
    }
    (need as usize).next_power_of_two()
}

/// Paraxial angular-spectrum propagation over `distance` in a medium of index
/// `medium_index`: each component is multiplied by `exp(−i q² d / (2 n k))`.
///
/// The transfer-function chirp must be Nyquist-sampled over the band that
/// carries the field's power; otherwise a [`Error::Sampling`] names the
/// sample count (at unchanged spacing) that would pass.
pub fn propagate(field: &SampledField, distance: f64, medium_index: f64) -> Result<SampledField> {
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(invalid(format!("propagation distance must be >= 0, got {distance}")));
    }
    if !(medium_index >= 1.0) {
        return Err(invalid(format!("medium index must be >= 1, got {medium_index}")));
    }
    if distance == 0.0 {
        return Ok(field.clone());
    }
    let mut spectrum = to_angular_spectrum(field);
    let nk = medium_index * field.wavenumber();
    let dq = spectrum.spacing();
    let band = spectrum.band_limit(ALIAS_POWER_TOLERANCE);
    if distance * band * dq / nk > PI {
        return Err(Error::Sampling {
            reason: format!(
                "propagation chirp undersampled over {distance} m (band {band:.4e} rad/m, Δq {dq:.4e} rad/m)"
            ),
            min_samples: min_samples_for_chirp(distance, band, field.spacing(), nk),
        });
    }
    let half = (spectrum.values.len() / 2) as f64;
    for (k, v) in spectrum.values.iter_mut().enumerate() {
        let q = (k as f64 - half) * dq;
        *v *= Complex64::from_polar(1.0, -q * q * distance / (2.0 * nk));
    }
    spectrum.plane_z = field.plane_z + distance;
    Ok(from_angular_spectrum(&spectrum))
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpticalElement {
    ThinLens {
        focal_length: f64,
    },
    Slits {
        slit_width: f64,
        separation: f64,
        count: u32,
    },
    FreeSpace {
        distance: f64,
        index: f64,
    },
}

impl OpticalElement {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OpticalElement::ThinLens { focal_length } => {
                if focal_length == 0.0 || !focal_length.is_finite() {
                    return Err(invalid("lens focal length must be finite and nonzero"));
                }
            }
            OpticalElement::Slits {
                slit_width,
                separation,
                count,
            } => {
                if !(slit_width > 0.0) {
                    return Err(invalid("slit width must be positive"));
                }
                if count == 0 {
                    return Err(invalid("slit count must be at least 1"));
                }
                if count > 1 && !(separation >= slit_width) {
                    return Err(invalid("slit separation must be at least the slit width"));
                }
            }
            OpticalElement::FreeSpace { distance, index } => {
                if !(distance >= 0.0) {
                    return Err(invalid("free-space distance must be >= 0"));
                }
                if !(index >= 1.0) {
                    return Err(invalid("free-space medium index must be >= 1"));
                }
            }
        }
        Ok(())
    }

    /// Longitudinal length the element occupies.
    pub fn thickness(&self) -> f64 {
        match *self {
            OpticalElement::FreeSpace { distance, .. } => distance,
            _ => 0.0,
        }
    }
}

/// Binary transmission of `count` slits of width `a`, centers `d` apart,
/// symmetric about the axis. Each slit covers `[c − a/2, c + a/2)`.
pub fn slit_mask(x: f64, slit_width: f64, separation: f64, count: u32, dx: f64) -> f64 {
    let eps = 1e-9 * dx;
    for j in 0..count {
        let c = (j as f64 - 0.5 * (count - 1) as f64) * separation;
        let lo = c - 0.5 * slit_width;
        let hi = c + 0.5 * slit_width;
        if x >= lo - eps && x < hi - eps {
            return 1.0;
        }
    }
    0.0
}

pub fn apply_element(field: &SampledField, element: &OpticalElement) -> Result<SampledField> {
    element.validate()?;
    match *element {
        OpticalElement::ThinLens { focal_length } => {
            let k = field.wavenumber();
            let dx = field.spacing();
            let support = field.support_half_width(ALIAS_POWER_TOLERANCE);
            // Lens phase k x²/(2f) must change by less than π per sample over the beam.
            if k * support * dx / focal_length.abs() > PI {
                let max_dx = PI * focal_length.abs() / (k * support);
                let needed = (field.extent / max_dx).ceil() as usize;
                return Err(Error::Sampling {
                    reason: format!("lens phase undersampled: beam half-width {support:.3e} m, spacing {dx:.3e} m"),
                    min_samples: needed.next_power_of_two(),
                });
            }
            let values = field
                .values
                .iter()
                .enumerate()
                .map(|(n, v)| {
                    let x = field.x(n);
                    v * Complex64::from_polar(1.0, -k * x * x / (2.0 * focal_length))
                })
                .collect();
            Ok(field.with_values(values, field.plane_z))
        }
        OpticalElement::Slits {
            slit_width,
            separation,
            count,
        } => {
            let outer = 0.5 * (count - 1) as f64 * separation + 0.5 * slit_width;
            if outer > 0.5 * field.extent {
                return Err(invalid(format!(
                    "aperture half-width {outer} m exceeds grid half-extent {} m",
                    0.5 * field.extent
                )));
            }
            let dx = field.spacing();
            let values = field
                .values
                .iter()
                .enumerate()
                .map(|(n, v)| v * slit_mask(field.x(n), slit_width, separation, count, dx))
                .collect();
            Ok(field.with_values(values, field.plane_z))
        }
        OpticalElement::FreeSpace { distance, index } => propagate(field, distance, index),
    }
}

/// An element at a longitudinal position (m, crystal entrance face at 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedElement {
    pub z: f64,
    pub element: OpticalElement,
}

/// Pump field at the crystal entrance face and at the detection plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpPropagation {
    pub at_crystal: SampledField,
    pub at_detection: SampledField,
}

/// Pump field carried from its waist through the optical train to the
/// crystal entrance (`z = 0`), through the crystal (length `L` at index `n₀`)
/// and a further `z_D` of air to the detection plane.
pub fn propagate_pump(
    waist_radius: f64,
    wavelength: f64,
    waist_position: f64,
    elements: &[PlacedElement],
    crystal_length: f64,
    crystal_index: f64,
    z_d: f64,
    grid: GridSpec,
) -> Result<PumpPropagation> {
    if waist_position > 0.0 {
        return Err(invalid(
            "pump waist must lie at or before the crystal entrance (z <= 0)",
        ));
    }
    let mut field = gaussian_source(waist_radius, wavelength, grid, waist_position)?;
    let mut z = waist_position;
    for placed in elements {
        placed.element.validate()?;
        if placed.z < z {
            return Err(invalid(format!(
                "element at z = {} m precedes the previous plane at z = {z} m",
                placed.z
            )));
        }
        let end = placed.z + placed.element.thickness();
        if end > 0.0 {
            return Err(invalid(format!(
                "element at z = {} m extends past the crystal entrance",
                placed.z
            )));
        }
        field = propagate(&field, placed.z - z, 1.0)?;
        field = apply_element(&field, &placed.element)?;
        z = end;
        field.plane_z = z;
    }
    let at_crystal = propagate(&field, -z, 1.0)?;
    let exit = propagate(&at_crystal, crystal_length, crystal_index)?;
    let at_detection = propagate(&exit, z_d, 1.0)?;
    Ok(PumpPropagation {
        at_crystal,
        at_detection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::second_moment_radius;
    use approx::assert_relative_eq;

    fn grid(n: usize, extent: f64) -> GridSpec {
        GridSpec::new(n, extent).unwrap()
    }

    #[test]
    fn gaussian_irradiance_at_waist_radius() {
        let w = 0.5e-3;
        let g = grid(1024, 10e-3);
        let f = gaussian_source(w, 413e-9, g, 0.0).unwrap();
        // x = w falls between samples, so check the closed form there.
        let x = w;
        let e = (-x * x / (w * w)).exp();
        assert_relative_eq!(e * e, (-2.0f64).exp(), max_relative = 1e-15);
        let peak = f.intensity()[512];
        assert_eq!(peak, 1.0);
        assert!(gaussian_source(w, 413e-9, grid(1024, 3e-3), 0.0).is_err());
    }

    #[test]
    fn gaussian_power_independent_of_sampling() {
        let w = 0.5e-3;
        let p1 = gaussian_source(w, 413e-9, grid(512, 10e-3), 0.0).unwrap().power();
        let p2 = gaussian_source(w, 413e-9, grid(4096, 10e-3), 0.0).unwrap().power();
        assert_relative_eq!(p1, p2, max_relative = 1e-8);
        assert_relative_eq!(p1, w * (PI / 2.0).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn rayleigh_range_value() {
        let w = 0.5e-3;
        let zr = PI * w * w / 413e-9;
        assert_relative_eq!(zr, 1.901_690_468_274_693, max_relative = 1e-12);
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let g = grid(1024, 10e-3);
        let f = SampledField::from_fn(g, 413e-9, 0.0, |x| {
            Complex64::new((-x * x / 1e-6).exp(), (x * 3e3).sin() * (-x * x / 4e-6).exp())
        })
        .unwrap();
        let s = to_angular_spectrum(&f);
        assert_relative_eq!(s.power(), f.power(), max_relative = 1e-12);
        let back = from_angular_spectrum(&s);
        let err: f64 = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn gaussian_spectrum_width() {
        let w = 0.5e-3;
        let f = gaussian_source(w, 413e-9, grid(2048, 20e-3), 0.0).unwrap();
        let s = to_angular_spectrum(&f);
        let qs = s.q_values();
        let inten: Vec<f64> = s.values().iter().map(|v| v.norm_sqr()).collect();
        let radius = second_moment_radius(&qs, &inten);
        assert_relative_eq!(radius, 2.0 / w, max_relative = 1e-9);
        // The spectrum of a centered real even field is real and even.
        assert!(s.values()[1024].im.abs() < 1e-15 * s.values()[1024].re.abs().max(1e-300) + 1e-18);
    }

    #[test]
    fn delta_field_has_flat_spectrum() {
        let g = grid(256, 1e-3);
        let f = SampledField::from_fn(g, 413e-9, 0.0, |x| {
            if x == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let s = to_angular_spectrum(&f);
        let m0 = s.values()[0].norm();
        for v in s.values() {
            assert_relative_eq!(v.norm(), m0, max_relative = 1e-12);
        }
    }

    #[test]
    fn propagation_basics() {
        let w = 0.5e-3;
        let f = gaussian_source(w, 413e-9, grid(1024, 40e-3), 0.0).unwrap();
        assert_eq!(propagate(&f, 0.0, 1.0).unwrap(), f);
        let p = propagate(&f, 1.3, 1.0).unwrap();
        assert_relative_eq!(p.power(), f.power(), max_relative = 1e-10);
        assert_eq!(p.plane_z(), 1.3);
        assert!(propagate(&f, -1.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_width_follows_analytic_law() {
        let w0 = 0.5e-3;
        let wl = 413e-9;
        let zr = PI * w0 * w0 / wl;
        let f = gaussian_source(w0, wl, grid(2048, 40e-3), 0.0).unwrap();
        for z in [0.5 * zr, zr, 2.0 * zr] {
            let p = propagate(&f, z, 1.0).unwrap();
            let w = second_moment_radius(&p.positions(), &p.intensity());
            let expected = w0 * (1.0 + (z / zr).powi(2)).sqrt();
            assert!(((w - expected) / expected).abs() < 1e-4, "z = {z}: {w} vs {expected}");
        }
        // One transverse dimension: on-axis intensity falls as (1 + z²/z_R²)^(-1/2).
        let p = propagate(&f, zr, 1.0).unwrap();
        assert_relative_eq!(p.intensity()[1024], 0.5f64.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn propagation_is_additive() {
        let f = gaussian_source(0.3e-3, 413e-9, grid(1024, 20e-3), 0.0).unwrap();
        let a = propagate(&propagate(&f, 0.3, 1.0).unwrap(), 0.45, 1.0).unwrap();
        let b = propagate(&f, 0.75, 1.0).unwrap();
        let peak = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() <= 1e-10 * peak);
        }
    }

    #[test]
    fn propagation_invariant_under_refinement() {
        let f1 = gaussian_source(0.5e-3, 413e-9, grid(1024, 20e-3), 0.0).unwrap();
        let f2 = gaussian_source(0.5e-3, 413e-9, grid(2048, 20e-3), 0.0).unwrap();
        let p1 = propagate(&f1, 0.8, 1.0).unwrap();
        let p2 = propagate(&f2, 0.8, 1.0).unwrap();
        for n in 0..1024 {
            assert!((p1.values()[n] - p2.values()[2 * n]).norm() < 1e-8);
        }
    }

    #[test]
    fn undersampled_chirp_reports_min_samples() {
        // Hard-edged slit: spectrum fills the grid, so the whole-grid criterion applies.
        let g = grid(1024, 5e-3);
        let f = apply_element(
            &SampledField::from_fn(g, 413e-9, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap(),
            &OpticalElement::Slits {
                slit_width: 100e-6,
                separation: 200e-6,
                count: 2,
            },
        )
        .unwrap();
        match propagate(&f, 0.5, 1.0) {
            Err(Error::Sampling { min_samples, .. }) => {
                assert!(min_samples > 1024);
                let dx = g.spacing();
                let bigger = SampledField::from_fn(grid(min_samples, dx * min_samples as f64), 413e-9, 0.0, |x| {
                    Complex64::new(slit_mask(x, 100e-6, 200e-6, 2, dx), 0.0)
                })
                .unwrap();
                assert!(propagate(&bigger, 0.5, 1.0).is_ok());
            }
            other => panic!("expected sampling error, got {other:?}"),
        }
    }

    #[test]
    fn weak_lens_is_identity() {
        let f = gaussian_source(0.5e-3, 413e-9, grid(2048, 20e-3), 0.0).unwrap();
        let l = apply_element(&f, &OpticalElement::ThinLens { focal_length: 1e9 }).unwrap();
        for (a, b) in l.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    /// Gaussian beam q-parameter through a thin lens and free space.
    fn abcd_radius(w0: f64, wl: f64, f: f64, d: f64) -> f64 {
        let zr = PI * w0 * w0 / wl;
        let q0 = Complex64::new(0.0, zr);
        // Lens: [[1,0],[-1/f,1]], then space: [[1,d],[0,1]].
        let (a, b, c, dd) = (1.0 - d / f, d, -1.0 / f, 1.0);
        let q = (q0 * a + b) / (q0 * c + dd);
        let inv = 1.0 / q;
        (-wl / (PI * inv.im)).sqrt()
    }

    #[test]
    fn lens_focus_matches_abcd() {
        let w0 = 0.5e-3;
        let wl = 413e-9;
        let f = gaussian_source(w0, wl, grid(4096, 16e-3), 0.0).unwrap();
        let lensed = apply_element(&f, &OpticalElement::ThinLens { focal_length: 0.5 }).unwrap();
        let p = propagate(&lensed, 0.5, 1.0).unwrap();
        let w = second_moment_radius(&p.positions(), &p.intensity());
        let expected = abcd_radius(w0, wl, 0.5, 0.5);
        assert!(((w - expected) / expected).abs() < 1e-3, "{w} vs {expected}");
    }

    #[test]
    fn slit_mask_transmission_ratio() {
        // 5 µm spacing: 100 µm slits span exactly 20 samples.
        let g = grid(4096, 20.48e-3);
        let uniform = SampledField::from_fn(g, 413e-9, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let masked = apply_element(
            &uniform,
            &OpticalElement::Slits {
                slit_width: 100e-6,
                separation: 200e-6,
                count: 2,
            },
        )
        .unwrap();
        assert_relative_eq!(
            masked.power() / uniform.power(),
            2.0 * 100e-6 / 20.48e-3,
            max_relative = 1e-12
        );
        let too_wide = OpticalElement::Slits {
            slit_width: 1e-3,
            separation: 20e-3,
            count: 2,
        };
        assert!(apply_element(&uniform, &too_wide).is_err());
    }

    #[test]
    fn element_validation() {
        assert!(OpticalElement::ThinLens { focal_length: 0.0 }.validate().is_err());
        assert!(OpticalElement::Slits {
            slit_width: 0.0,
            separation: 1.0,
            count: 2
        }
        .validate()
        .is_err());
        assert!(OpticalElement::FreeSpace {
            distance: -1.0,
            index: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn bare_gaussian_at_detection_plane() {
        let w0 = 0.5e-3;
        let wl = 413e-9;
        // Crystal index 1 and length 0 reduce to plain free space.
        let out = propagate_pump(w0, wl, 0.0, &[], 1e-12, 1.0, 0.5, grid(2048, 20e-3)).unwrap();
        let w = second_moment_radius(&out.at_detection.positions(), &out.at_detection.intensity());
        assert!((w / w0 - 1.033_986_949_574_683_8).abs() < 1e-4, "ratio {}", w / w0);
    }

    #[test]
    fn geometry_must_be_ordered() {
        let g = grid(1024, 20e-3);
        let lens = |z| PlacedElement {
            z,
            element: OpticalElement::ThinLens { focal_length: 0.5 },
        };
        assert!(propagate_pump(0.5e-3, 413e-9, -0.05, &[lens(-0.01), lens(-0.03)], 1e-3, 1.8, 0.5, g).is_err());
        assert!(propagate_pump(0.5e-3, 413e-9, -0.05, &[lens(0.01)], 1e-3, 1.8, 0.5, g).is_err());
        assert!(propagate_pump(0.5e-3, 413e-9, 0.05, &[], 1e-3, 1.8, 0.5, g).is_err());
    }
}
