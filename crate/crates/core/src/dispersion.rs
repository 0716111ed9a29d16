//! Refractive-index and group-index models.
//!
//! The default crystal model is KTP with the Sellmeier and thermo-optic
//! dispersion formulas of K. Kato and E. Takaoka, Appl. Opt. 41, 5040 (2002).
//! Any other published set, or measured data in tabulated form, can be
//! plugged in through [`IndexModel`].

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::model::Axis;

/// Wavelength (m), axis and temperature (°C) to phase index.
pub trait IndexModel: Send + Sync + fmt::Debug {
    /// Short identifier, e.g. `ktp-kato2002`.
    fn id(&self) -> &str;

    /// Validity window `[min, max]` in metres for the given axis.
    fn window(&self, axis: Axis) -> (f64, f64);

    /// Evaluate without checking the validity window.
    fn index_unchecked(&self, wavelength: f64, axis: Axis, temperature_c: f64) -> f64;

    /// Literature reference or data provenance.
    fn citation(&self) -> &str {
        ""
    }

    fn refractive_index(&self, wavelength: f64, axis: Axis, temperature_c: f64) -> Result<f64> {
        let (min, max) = self.window(axis);
        if !(wavelength >= min && wavelength <= max) {
            return Err(Error::OutOfRange {
                model: self.id().to_string(),
                wavelength,
                min,
                max,
            });
        }
        Ok(self.index_unchecked(wavelength, axis, temperature_c))
    }
}

pub type SharedIndexModel = Arc<dyn IndexModel>;

/// Finite-difference step used for `dn/dλ`.
pub fn group_index_step(wavelength: f64) -> f64 {
    (1e-6 * wavelength).max(1e-12)
}

/// Group index `n_g = n − λ dn/dλ` by central differences of the phase index.
pub fn group_index(model: &dyn IndexModel, wavelength: f64, axis: Axis, temperature_c: f64) -> Result<f64> {
    group_index_with_step(model, wavelength, axis, temperature_c, group_index_step(wavelength))
}

pub fn group_index_with_step(
    model: &dyn IndexModel,
    wavelength: f64,
    axis: Axis,
    temperature_c: f64,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let n = model.refractive_index(wavelength, axis, temperature_c)?;
    let up = model.refractive_index(wavelength + step, axis, temperature_c)?;
    let down = model.refractive_index(wavelength - step, axis, temperature_c)?;
    let slope = (up - down) / (2.0 * step);
    Ok(n - wavelength * slope)
}

/// Dispersionless medium, handy for tests and idealized runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantIndex {
    index: f64,
    id: String,
}

impl ConstantIndex {
    pub fn new(index: f64) -> Result<Self> {
        if !(index >= 1.0) || !index.is_finite() {
            return Err(invalid(format!("constant index must be >= 1, got {index}")));
        }
        Ok(ConstantIndex {
            index,
            id: format!("constant:{index}"),
        })
    }

    pub fn index(&self) -> f64 {
        self.index
    }
}

impl IndexModel for ConstantIndex {
    fn id(&self) -> &str {
        &self.id
    }
    fn window(&self, _axis: Axis) -> (f64, f64) {
        (1e-9, 1.0)
    }
    fn index_unchecked(&self, _wavelength: f64, _axis: Axis, _t: f64) -> f64 {
        self.index
    }
}

/// `n(λ) = a + b·λ` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearIndex {
    pub offset: f64,
    pub slope: f64,
    pub window: (f64, f64),
}

impl IndexModel for LinearIndex {
    fn id(&self) -> &str {
        "linear"
    }
    fn window(&self, _axis: Axis) -> (f64, f64) {
        self.window
    }
    fn index_unchecked(&self, wavelength: f64, _axis: Axis, _t: f64) -> f64 {
        self.offset + self.slope * wavelength
    }
}

/// Two-pole Sellmeier `n² = A + B/(λ² − C) + D/(λ² − E)` (λ in µm) per axis,
/// plus a thermo-optic polynomial `dn/dT = (a/λ³ + b/λ² + c/λ + d)·10⁻⁵ /°C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierThermal {
    id: String,
    citation: String,
    /// `[A, B, C, D, E]` for x, y, z.
    sellmeier: [[f64; 5]; 3],
    /// `[a, b, c, d]` for x, y, z.
    thermo: [[f64; 4]; 3],
    reference_temperature_c: f64,
    window: (f64, f64),
}

impl SellmeierThermal {
    pub fn new(
        id: impl Into<String>,
        citation: impl Into<String>,
        sellmeier: [[f64; 5]; 3],
        thermo: [[f64; 4]; 3],
        reference_temperature_c: f64,
        window: (f64, f64),
    ) -> Result<Self> {
        if !(window.0 > 0.0 && window.1 > window.0) {
            return Err(invalid("Sellmeier validity window must be a positive interval"));
        }
        Ok(SellmeierThermal {
            id: id.into(),
            citation: citation.into(),
            sellmeier,
            thermo,
            reference_temperature_c,
            window,
        })
    }

    /// KTP, Kato & Takaoka (2002), referenced to 20 °C.
    pub fn ktp_kato2002() -> Self {
        SellmeierThermal {
            id: "ktp-kato2002".into(),
            citation: "K. Kato and E. Takaoka, Appl. Opt. 41, 5040 (2002)".into(),
            sellmeier: [
                [3.29100, 0.04140, 0.03978, 9.35522, 31.45571],
                [3.45018, 0.04341, 0.04597, 16.98825, 39.43799],
                [4.59423, 0.06206, 0.04763, 110.80672, 86.12171],
            ],
            thermo: [
                [0.1717, -0.5353, 0.8416, 0.1627],
                [0.1997, -0.4063, 0.5154, 0.5425],
                [0.9221, -2.9220, 3.6677, -0.1897],
            ],
            reference_temperature_c: 20.0,
            window: (0.35e-6, 3.5e-6),
        }
    }

    fn row(axis: Axis) -> usize {
        match axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl IndexModel for SellmeierThermal {
    fn id(&self) -> &str {
        &self.id
    }
    fn citation(&self) -> &str {
        &self.citation
    }
    fn window(&self, _axis: Axis) -> (f64, f64) {
        self.window
    }
    fn index_unchecked(&self, wavelength: f64, axis: Axis, temperature_c: f64) -> f64 {
        let um = wavelength * 1e6;
        let l2 = um * um;
        let [a, b, c, d, e] = self.sellmeier[Self::row(axis)];
        let n = (a + b / (l2 - c) + d / (l2 - e)).sqrt();
        let [t3, t2, t1, t0] = self.thermo[Self::row(axis)];
        let dn_dt = (t3 / (um * l2) + t2 / l2 + t1 / um + t0) * 1e-5;
        n + dn_dt * (temperature_c - self.reference_temperature_c)
    }
}

/// Measured or externally computed index samples, linearly interpolated.
///
/// Text format: one record per line, `wavelength_nm axis index`. Blank lines
/// and `#` comments are ignored. Temperature is not modelled; the table is
/// taken to be valid at whatever temperature it was produced for.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedIndex {
    id: String,
    samples: HashMap<Axis, Vec<(f64, f64)>>,
}

impl TabulatedIndex {
    /// Samples are `(wavelength_m, index)` per axis.
    pub fn new(id: impl Into<String>, samples: HashMap<Axis, Vec<(f64, f64)>>) -> Result<Self> {
        let mut sorted = HashMap::new();
        for (axis, mut pts) in samples {
            if pts.is_empty() {
                continue;
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in pts.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(invalid(format!(
                        "duplicate tabulated wavelength {} m on axis {axis}",
                        w[0].0
                    )));
                }
            }
            if let Some(bad) = pts.iter().find(|p| !(p.1 > 1.0) || !(p.0 > 0.0)) {
                return Err(invalid(format!(
                    "tabulated sample ({} m, {}) invalid: need wavelength > 0 and index > 1",
                    bad.0, bad.1
                )));
            }
            sorted.insert(axis, pts);
        }
        if sorted.is_empty() {
            return Err(invalid("tabulated index model has no samples"));
        }
        Ok(TabulatedIndex {
            id: id.into(),
            samples: sorted,
        })
    }

    pub fn parse(id: impl Into<String>, text: &str) -> Result<Self> {
        let mut samples: HashMap<Axis, Vec<(f64, f64)>> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(invalid(format!(
                    "line {}: expected `wavelength_nm axis index`, got `{raw}`",
                    lineno + 1
                )));
            }
            let nm: f64 = fields[0]
                .parse()
                .map_err(|_| invalid(format!("line {}: bad wavelength `{}`", lineno + 1, fields[0])))?;
            let axis: Axis = fields[1].parse()?;
            let n: f64 = fields[2]
                .parse()
                .map_err(|_| invalid(format!("line {}: bad index `{}`", lineno + 1, fields[2])))?;
            samples.entry(axis).or_default().push((nm * 1e-9, n));
        }
        Self::new(id, samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(format!("table:{}", path.display()), &text)
    }
}

impl IndexModel for TabulatedIndex {
    fn id(&self) -> &str {
        &self.id
    }

    fn window(&self, axis: Axis) -> (f64, f64) {
        match self.samples.get(&axis) {
            Some(pts) => (pts[0].0, pts[pts.len() - 1].0),
            // Empty window: every evaluation on this axis is out of range.
            None => (f64::INFINITY, f64::NEG_INFINITY),
        }
    }

    fn index_unchecked(&self, wavelength: f64, axis: Axis, _t: f64) -> f64 {
        let Some(pts) = self.samples.get(&axis) else {
            return f64::NAN;
        };
        if pts.len() == 1 {
            return pts[0].1;
        }
        let hi = pts.partition_point(|p| p.0 < wavelength).clamp(1, pts.len() - 1);
        let (x0, y0) = pts[hi - 1];
        let (x1, y1) = pts[hi];
        if wavelength == x0 {
            return y0;
        }
        if wavelength == x1 {
            return y1;
        }
        y0 + (y1 - y0) * (wavelength - x0) / (x1 - x0)
    }
}
