//! Scenario files.
//!
//! A scenario is a small INI-style text file: `[section]` headers followed
//! by `key = value` lines, `#` or `;` comments. Units are part of the key
//! name (`wavelength_nm`, `z_mm`). Parsing is strict: unknown sections and
//! keys, duplicates and malformed values are errors. `[element]` may repeat;
//! the other sections appear at most once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::biphoton::{JointGrid, OracleMethod, RegimeThresholds};
use crate::dispersion::{ConstantIndex, SellmeierThermal, SharedIndexModel, TabulatedIndex};
use crate::error::{Error, Result};
use crate::field::{GridSpec, OpticalElement, PlacedElement};
use crate::model::{Axis, AxisAssignment, CrystalSpec, DetectionGeometry, InteractionType, PulseShape, PumpSpec};
use crate::phasematch::{design_poling_period, AngleConvention, DEFAULT_PARAXIAL_BOUND};
use crate::scenario::{Numerics, Scenario};

pub const PRESET_NAMES: [&str; 2] = ["paper-config-1", "paper-config-2"];

/// Text of a bundled preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "paper-config-1" => Some(include_str!("../presets/paper-config-1.ini")),
        "paper-config-2" => Some(include_str!("../presets/paper-config-2.ini")),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolingSpec {
    /// Collinear design value computed from the index model.
    Design,
    Micrometers(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexModelSpec {
    KtpKato2002,
    Constant(f64),
    Table(String),
}

impl IndexModelSpec {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "ktp-kato2002" {
            return Ok(IndexModelSpec::KtpKato2002);
        }
        if let Some(rest) = s.strip_prefix("constant ") {
            return rest
                .trim()
                .parse::<f64>()
                .map(IndexModelSpec::Constant)
                .map_err(|_| format!("bad constant index `{rest}`"));
        }
        if let Some(rest) = s.strip_prefix("table ") {
            let path = rest.trim();
            if path.is_empty() {
                return Err("table index model needs a path".into());
            }
            return Ok(IndexModelSpec::Table(path.to_string()));
        }
        Err(format!(
            "unknown index model `{s}` (expected `ktp-kato2002`, `constant <n>` or `table <path>`)"
        ))
    }

    fn render(&self) -> String {
        match self {
            IndexModelSpec::KtpKato2002 => "ktp-kato2002".into(),
            IndexModelSpec::Constant(n) => format!("constant {n}"),
            IndexModelSpec::Table(p) => format!("table {p}"),
        }
    }

    pub fn instantiate(&self, base_dir: Option<&Path>) -> Result<SharedIndexModel> {
        Ok(match self {
            IndexModelSpec::KtpKato2002 => std::sync::Arc::new(SellmeierThermal::ktp_kato2002()),
            IndexModelSpec::Constant(n) => std::sync::Arc::new(ConstantIndex::new(*n)?),
            IndexModelSpec::Table(p) => {
                let mut path = PathBuf::from(p);
                if path.is_relative() {
                    if let Some(base) = base_dir {
                        path = base.join(path);
                    }
                }
                std::sync::Arc::new(TabulatedIndex::load(&path)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalConfig {
    pub length_mm: f64,
    pub poling_period: PolingSpec,
    pub duty_cycle: f64,
    pub qpm_order: u32,
    pub temperature_c: f64,
    pub pump_axis: Axis,
    pub signal_axis: Axis,
    pub idler_axis: Axis,
    pub interaction: InteractionType,
    pub index_model: IndexModelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    pub wavelength_nm: f64,
    pub waist_mm: f64,
    pub waist_position_mm: f64,
    /// `None` for a CW pump.
    pub pulse_duration_fs: Option<f64>,
    pub power_mw: Option<f64>,
    pub repetition_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementConfig {
    Lens {
        z_mm: f64,
        focal_length_mm: f64,
    },
    Slits {
        z_mm: f64,
        slit_width_um: f64,
        separation_um: f64,
        count: u32,
    },
    FreeSpace {
        z_mm: f64,
        distance_mm: f64,
        index: f64,
    },
}

impl ElementConfig {
    fn placed(&self) -> PlacedElement {
        match *self {
            ElementConfig::Lens { z_mm, focal_length_mm } => PlacedElement {
                z: z_mm * 1e-3,
                element: OpticalElement::ThinLens {
                    focal_length: focal_length_mm * 1e-3,
                },
            },
            ElementConfig::Slits {
                z_mm,
                slit_width_um,
                separation_um,
                count,
            } => PlacedElement {
                z: z_mm * 1e-3,
                element: OpticalElement::Slits {
                    slit_width: slit_width_um * 1e-6,
                    separation: separation_um * 1e-6,
                    count,
                },
            },
            ElementConfig::FreeSpace {
                z_mm,
                distance_mm,
                index,
            } => PlacedElement {
                z: z_mm * 1e-3,
                element: OpticalElement::FreeSpace {
                    distance: distance_mm * 1e-3,
                    index,
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    pub z_d_mm: f64,
    pub slit_width_mm: f64,
    pub scan_range_mm: f64,
    pub scan_step_mm: f64,
    pub filter_center_nm: f64,
    pub filter_fwhm_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsConfig {
    pub samples: usize,
    pub extent_mm: f64,
    pub joint_samples: usize,
    pub joint_stride: usize,
    pub angle_convention: AngleConvention,
    pub normalize: bool,
    pub regime_warn: f64,
    pub regime_threshold: f64,
    pub oracle: OracleMethod,
    pub paraxial_bound: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let joint = JointGrid::default();
        let regime = RegimeThresholds::default();
        NumericsConfig {
            samples: 16384,
            extent_mm: 80.0,
            joint_samples: joint.samples,
            joint_stride: joint.stride,
            angle_convention: AngleConvention::External,
            normalize: true,
            regime_warn: regime.warn,
            regime_threshold: regime.violation,
            oracle: OracleMethod::Fresnel,
            paraxial_bound: DEFAULT_PARAXIAL_BOUND,
        }
    }
}

/// A scenario in file units, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    pub elements: Vec<ElementConfig>,
    pub detection: DetectionConfig,
    pub numerics: NumericsConfig,
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    if line == 0 {
        Error::Config(msg.to_string())
    } else {
        Error::Config(format!("line {line}: {msg}"))
    }
}

/// Key/value pairs of one section with the line each came from.
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(String, usize)> {
        self.take(key)
            .ok_or_else(|| cfg_err(self.line, format!("[{}] is missing `{key}`", self.name)))
    }

    fn parse_value<T: FromStr>(value: &(String, usize), key: &str) -> Result<T> {
        value
            .0
            .parse::<T>()
            .map_err(|_| cfg_err(value.1, format!("bad value `{}` for `{key}`", value.0)))
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        let x: f64 = Self::parse_value(&v, key)?;
        if !x.is_finite() {
            return Err(cfg_err(v.1, format!("`{key}` must be finite")));
        }
        Ok(x)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        if self.entries.contains_key(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        if self.entries.contains_key(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn parsed_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some(v) => Self::parse_value(&v, key),
            None => Ok(default),
        }
    }

    fn with_or<T>(&mut self, key: &str, default: T, f: impl Fn(&str) -> Result<T>) -> Result<T> {
        match self.take(key) {
            Some((v, line)) => f(&v).map_err(|e| cfg_err(line, format!("`{key}`: {}", strip_kind(&e)))),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.entries.into_iter().next() {
            return Err(cfg_err(line, format!("unknown key `{key}` in [{}]", self.name)));
        }
        Ok(())
    }
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) | Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, "unterminated section header"))?
                .trim();
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{l}`")))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(cfg_err(line, "empty key"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| cfg_err(line, "key outside of any section"))?;
        if section
            .entries
            .insert(key.to_string(), (value.to_string(), line))
            .is_some()
        {
            return Err(cfg_err(line, format!("duplicate key `{key}` in [{}]", section.name)));
        }
    }
    Ok(sections)
}

fn parse_axis(v: &str) -> Result<Axis> {
    v.parse()
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        let mut crystal = None;
        let mut pump = None;
        let mut detection = None;
        let mut numerics = None;
        let mut elements = Vec::new();
        for mut s in tokenize(text)? {
            let line = s.line;
            let once = |slot_filled: bool| {
                if slot_filled {
                    Err(cfg_err(line, format!("section [{}] appears more than once", s.name)))
                } else {
                    Ok(())
                }
            };
            match s.name.as_str() {
                "crystal" => {
                    once(crystal.is_some())?;
                    crystal = Some(Self::parse_crystal(&mut s)?);
                }
                "pump" => {
                    once(pump.is_some())?;
                    pump = Some(Self::parse_pump(&mut s)?);
                }
                "element" => elements.push(Self::parse_element(&mut s)?),
                "detection" => {
                    once(detection.is_some())?;
                    detection = Some(Self::parse_detection(&mut s)?);
                }
                "numerics" => {
                    once(numerics.is_some())?;
                    numerics = Some(Self::parse_numerics(&mut s)?);
                }
                other => return Err(cfg_err(line, format!("unknown section [{other}]"))),
            }
            s.finish()?;
        }
        Ok(ScenarioConfig {
            crystal: crystal.ok_or_else(|| cfg_err(0, "missing [crystal] section"))?,
            pump: pump.ok_or_else(|| cfg_err(0, "missing [pump] section"))?,
            elements,
            detection: detection.ok_or_else(|| cfg_err(0, "missing [detection] section"))?,
            numerics: numerics.unwrap_or_default(),
        })
    }

    fn parse_crystal(s: &mut Section) -> Result<CrystalConfig> {
        let poling = s.require("poling_period_um")?;
        let poling_period = if poling.0 == "design" {
            PolingSpec::Design
        } else {
            PolingSpec::Micrometers(Section::parse_value(&poling, "poling_period_um")?)
        };
        let defaults = AxisAssignment::default();
        Ok(CrystalConfig {
            length_mm: s.f64("length_mm")?,
            poling_period,
            duty_cycle: s.f64_or("duty_cycle", 0.5)?,
            qpm_order: s.parsed_or("qpm_order", 1u32)?,
            temperature_c: s.f64("temperature_c")?,
            pump_axis: s.with_or("pump_axis", defaults.pump, parse_axis)?,
            signal_axis: s.with_or("signal_axis", defaults.signal, parse_axis)?,
            idler_axis: s.with_or("idler_axis", defaults.idler, parse_axis)?,
            interaction: s.with_or("type", InteractionType::TypeII, |v| v.parse())?,
            index_model: s.with_or("index_model", IndexModelSpec::KtpKato2002, |v| {
                IndexModelSpec::parse(v).map_err(Error::Config)
            })?,
        })
    }

    fn parse_pump(s: &mut Section) -> Result<PumpConfig> {
        let pulse = s.require("pulse_duration_fs")?;
        let pulse_duration_fs = if pulse.0 == "cw" {
            None
        } else {
            Some(Section::parse_value(&pulse, "pulse_duration_fs")?)
        };
        Ok(PumpConfig {
            wavelength_nm: s.f64("wavelength_nm")?,
            waist_mm: s.f64("waist_mm")?,
            waist_position_mm: s.f64_or("waist_position_mm", 0.0)?,
            pulse_duration_fs,
            power_mw: s.opt_f64("power_mw")?,
            repetition_mhz: s.opt_f64("repetition_mhz")?,
        })
    }

    fn parse_element(s: &mut Section) -> Result<ElementConfig> {
        let (kind, line) = s.require("kind")?;
        let z_mm = s.f64("z_mm")?;
        Ok(match kind.as_str() {
            "lens" => ElementConfig::Lens {
                z_mm,
                focal_length_mm: s.f64("focal_length_mm")?,
            },
            "slits" => ElementConfig::Slits {
                z_mm,
                slit_width_um: s.f64("slit_width_um")?,
                separation_um: s.f64_or("separation_um", 0.0)?,
                count: s.parsed_or("count", 1u32)?,
            },
            "free-space" => ElementConfig::FreeSpace {
                z_mm,
                distance_mm: s.f64("distance_mm")?,
                index: s.f64_or("index", 1.0)?,
            },
            other => {
                return Err(cfg_err(
                    line,
                    format!("unknown element kind `{other}` (expected lens, slits or free-space)"),
                ))
            }
        })
    }

    fn parse_detection(s: &mut Section) -> Result<DetectionConfig> {
        Ok(DetectionConfig {
            z_d_mm: s.f64("z_d_mm")?,
            slit_width_mm: s.f64("slit_width_mm")?,
            scan_range_mm: s.f64("scan_range_mm")?,
            scan_step_mm: s.f64("scan_step_mm")?,
            filter_center_nm: s.f64("filter_center_nm")?,
            filter_fwhm_nm: s.f64("filter_fwhm_nm")?,
        })
    }

    fn parse_numerics(s: &mut Section) -> Result<NumericsConfig> {
        let d = NumericsConfig::default();
        Ok(NumericsConfig {
            samples: s.parsed_or("samples", d.samples)?,
            extent_mm: s.f64_or("extent_mm", d.extent_mm)?,
            joint_samples: s.parsed_or("joint_samples", d.joint_samples)?,
            joint_stride: s.parsed_or("joint_stride", d.joint_stride)?,
            angle_convention: s.with_or("angle_convention", d.angle_convention, |v| v.parse())?,
            normalize: s.parsed_or("normalize", d.normalize)?,
            regime_warn: s.f64_or("regime_warn", d.regime_warn)?,
            regime_threshold: s.f64_or("regime_threshold", d.regime_threshold)?,
            oracle: s.with_or("oracle", d.oracle, |v| v.parse())?,
            paraxial_bound: s.f64_or("paraxial_bound", d.paraxial_bound)?,
        })
    }

    /// Canonical text form; parsing it back yields an equal value.
    pub fn to_ini(&self) -> String {
        let mut o = String::new();
        let c = &self.crystal;
        let _ = writeln!(o, "[crystal]");
        let _ = writeln!(o, "length_mm = {}", c.length_mm);
        match c.poling_period {
            PolingSpec::Design => {
                let _ = writeln!(o, "poling_period_um = design");
            }
            PolingSpec::Micrometers(v) => {
                let _ = writeln!(o, "poling_period_um = {v}");
            }
        }
        let _ = writeln!(o, "duty_cycle = {}", c.duty_cycle);
        let _ = writeln!(o, "qpm_order = {}", c.qpm_order);
        let _ = writeln!(o, "temperature_c = {}", c.temperature_c);
        let _ = writeln!(o, "pump_axis = {}", c.pump_axis);
        let _ = writeln!(o, "signal_axis = {}", c.signal_axis);
        let _ = writeln!(o, "idler_axis = {}", c.idler_axis);
        let _ = writeln!(o, "type = {}", c.interaction);
        let _ = writeln!(o, "index_model = {}", c.index_model.render());

        let p = &self.pump;
        let _ = writeln!(o, "\n[pump]");
        let _ = writeln!(o, "wavelength_nm = {}", p.wavelength_nm);
        let _ = writeln!(o, "waist_mm = {}", p.waist_mm);
        let _ = writeln!(o, "waist_position_mm = {}", p.waist_position_mm);
        match p.pulse_duration_fs {
            Some(t) => {
                let _ = writeln!(o, "pulse_duration_fs = {t}");
            }
            None => {
                let _ = writeln!(o, "pulse_duration_fs = cw");
            }
        }
        if let Some(v) = p.power_mw {
            let _ = writeln!(o, "power_mw = {v}");
        }
        if let Some(v) = p.repetition_mhz {
            let _ = writeln!(o, "repetition_mhz = {v}");
        }

        for e in &self.elements {
            let _ = writeln!(o, "\n[element]");
            match e {
                ElementConfig::Lens { z_mm, focal_length_mm } => {
                    let _ = writeln!(o, "kind = lens\nz_mm = {z_mm}\nfocal_length_mm = {focal_length_mm}");
                }
                ElementConfig::Slits {
                    z_mm,
                    slit_width_um,
                    separation_um,
                    count,
                } => {
                    let _ = writeln!(
                        o,
                        "kind = slits\nz_mm = {z_mm}\nslit_width_um = {slit_width_um}\nseparation_um = {separation_um}\ncount = {count}"
                    );
                }
                ElementConfig::FreeSpace {
                    z_mm,
                    distance_mm,
                    index,
                } => {
                    let _ = writeln!(
                        o,
                        "kind = free-space\nz_mm = {z_mm}\ndistance_mm = {distance_mm}\nindex = {index}"
                    );
                }
            }
        }

        let d = &self.detection;
        let _ = writeln!(o, "\n[detection]");
        let _ = writeln!(o, "z_d_mm = {}", d.z_d_mm);
        let _ = writeln!(o, "slit_width_mm = {}", d.slit_width_mm);
        let _ = writeln!(o, "scan_range_mm = {}", d.scan_range_mm);
        let _ = writeln!(o, "scan_step_mm = {}", d.scan_step_mm);
        let _ = writeln!(o, "filter_center_nm = {}", d.filter_center_nm);
        let _ = writeln!(o, "filter_fwhm_nm = {}", d.filter_fwhm_nm);

        let n = &self.numerics;
        let _ = writeln!(o, "\n[numerics]");
        let _ = writeln!(o, "samples = {}", n.samples);
        let _ = writeln!(o, "extent_mm = {}", n.extent_mm);
        let _ = writeln!(o, "joint_samples = {}", n.joint_samples);
        let _ = writeln!(o, "joint_stride = {}", n.joint_stride);
        let _ = writeln!(o, "angle_convention = {}", n.angle_convention);
        let _ = writeln!(o, "normalize = {}", n.normalize);
        let _ = writeln!(o, "regime_warn = {}", n.regime_warn);
        let _ = writeln!(o, "regime_threshold = {}", n.regime_threshold);
        let _ = writeln!(o, "oracle = {}", n.oracle);
        let _ = writeln!(o, "paraxial_bound = {}", n.paraxial_bound);
        o
    }

    pub fn preset(name: &str) -> Result<ScenarioConfig> {
        let text = preset_text(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset `{name}` (available: {})",
                PRESET_NAMES.join(", ")
            ))
        })?;
        Self::parse(text)
    }

    /// A preset name or a path to a scenario file.
    pub fn load(spec: &str) -> Result<(ScenarioConfig, Option<PathBuf>)> {
        if let Some(text) = preset_text(spec) {
            return Ok((Self::parse(text)?, None));
        }
        let path = Path::new(spec);
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read scenario `{spec}`: {e}")))?;
        let base = path.parent().map(Path::to_path_buf);
        Ok((Self::parse(&text)?, base))
    }

    /// Converts to SI, validates every physical invariant and resolves a
    /// `design` poling period. Relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Scenario> {
        let model = self.crystal.index_model.instantiate(base_dir)?;
        let c = &self.crystal;
        let axes = AxisAssignment {
            pump: c.pump_axis,
            signal: c.signal_axis,
            idler: c.idler_axis,
        };
        let pump_wl = self.pump.wavelength_nm * 1e-9;
        let period = match c.poling_period {
            PolingSpec::Micrometers(um) => um * 1e-6,
            PolingSpec::Design => design_poling_period(
                pump_wl,
                2.0 * pump_wl,
                2.0 * pump_wl,
                axes,
                c.temperature_c,
                c.qpm_order,
                &*model,
            )?,
        };
        let crystal = CrystalSpec::new(
            c.length_mm * 1e-3,
            period,
            c.duty_cycle,
            c.qpm_order,
            c.temperature_c,
            axes,
            c.interaction,
        )?;
        let pulse = match self.pump.pulse_duration_fs {
            None => PulseShape::Cw,
            Some(fs) => PulseShape::Pulsed { tau: fs * 1e-15 },
        };
        let pump = PumpSpec::new(
            pump_wl,
            self.pump.waist_mm * 1e-3,
            self.pump.waist_position_mm * 1e-3,
            pulse,
        )?;
        let elements: Vec<PlacedElement> = self.elements.iter().map(ElementConfig::placed).collect();
        for e in &elements {
            e.element.validate()?;
        }
        let d = &self.detection;
        let detection = DetectionGeometry::new(
            d.z_d_mm * 1e-3,
            d.slit_width_mm * 1e-3,
            d.scan_range_mm * 1e-3,
            d.scan_step_mm * 1e-3,
            d.filter_center_nm * 1e-9,
            d.filter_fwhm_nm * 1e-9,
        )?;
        let n = &self.numerics;
        let joint = JointGrid {
            samples: n.joint_samples,
            stride: n.joint_stride,
        };
        joint.validate()?;
        if !(n.regime_warn >= 0.0 && n.regime_warn <= n.regime_threshold) {
            return Err(Error::Config("regime_warn must lie in [0, regime_threshold]".into()));
        }
        if !(n.paraxial_bound > 0.0 && n.paraxial_bound < 1.0) {
            return Err(Error::Config("paraxial_bound must lie in (0, 1)".into()));
        }
        let numerics = Numerics {
            grid: GridSpec::new(n.samples, n.extent_mm * 1e-3)?,
            joint,
            convention: n.angle_convention,
            normalize: n.normalize,
            thresholds: RegimeThresholds {
                warn: n.regime_warn,
                violation: n.regime_threshold,
            },
            oracle: n.oracle,
            paraxial_bound: n.paraxial_bound,
        };
        Scenario::new(crystal, pump, elements, detection, numerics, model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn presets_parse_and_build() {
        for name in PRESET_NAMES {
            let cfg = ScenarioConfig::preset(name).unwrap();
            let s = cfg.build(None).unwrap();
            let period = s.crystal().poling_period();
            assert!((period / 11.4617e-6 - 1.0).abs() < 0.05);
            assert_eq!(s.detection().z_d(), 0.5);
        }
        assert!(ScenarioConfig::preset("nope").is_err());
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let cfg = ScenarioConfig::preset(name).unwrap();
            let again = ScenarioConfig::parse(&cfg.to_ini()).unwrap();
            assert_eq!(cfg, again);
            assert_eq!(cfg.build(None).unwrap(), again.build(None).unwrap());
        }
    }

    fn base() -> String {
        ScenarioConfig::preset("paper-config-2").unwrap().to_ini()
    }

    #[test]
    fn strictness() {
        let unknown_key = base().replace("[pump]\n", "[pump]\ncolour = blue\n");
        let e = ScenarioConfig::parse(&unknown_key).unwrap_err();
        assert!(e.to_string().contains("unknown key `colour`"), "{e}");

        let unknown_section = format!("{}\n[extras]\nx = 1\n", base());
        assert!(ScenarioConfig::parse(&unknown_section).is_err());

        let duplicate = base().replace("[pump]\n", "[pump]\nwaist_mm = 0.4\n");
        assert!(ScenarioConfig::parse(&duplicate)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let twice = format!("{}\n[detection]\nz_d_mm = 1\n", base());
        assert!(ScenarioConfig::parse(&twice).is_err());

        let malformed = base().replace("length_mm = 9.6", "length_mm = nine");
        assert!(ScenarioConfig::parse(&malformed).is_err());

        let missing = base().replace("temperature_c = 40\n", "");
        assert!(ScenarioConfig::parse(&missing)
            .unwrap_err()
            .to_string()
            .contains("temperature_c"));

        assert!(ScenarioConfig::parse("length_mm = 3\n").is_err());
    }

    #[test]
    fn physical_validation_after_conversion() {
        let bad_duty = base().replace("duty_cycle = 0.5", "duty_cycle = 1");
        let cfg = ScenarioConfig::parse(&bad_duty).unwrap();
        assert!(cfg.build(None).unwrap_err().is_config());

        let bad_step = base().replace("scan_step_mm = 0.02", "scan_step_mm = 0");
        assert!(ScenarioConfig::parse(&bad_step).unwrap().build(None).is_err());

        let bad_grid = base().replace("samples = 16384", "samples = 1000");
        assert!(ScenarioConfig::parse(&bad_grid).unwrap().build(None).is_err());
    }

    #[test]
    fn cw_and_explicit_period() {
        let text = base()
            .replace("pulse_duration_fs = 200", "pulse_duration_fs = cw")
            .replace("poling_period_um = design", "poling_period_um = 11.4617");
        let s = ScenarioConfig::parse(&text).unwrap().build(None).unwrap();
        assert_eq!(s.pump().pulse(), PulseShape::Cw);
        assert_relative_eq!(s.crystal().poling_period(), 11.4617e-6, max_relative = 1e-15);
    }

    #[test]
    fn table_model_path_resolves_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("n.txt"),
            "400 y 1.80\n900 y 1.70\n400 z 1.90\n900 z 1.80\n",
        )
        .unwrap();
        let text = base().replace("index_model = ktp-kato2002", "index_model = table n.txt");
        let cfg = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg.crystal.index_model, IndexModelSpec::Table("n.txt".into()));
        assert!(cfg.build(Some(dir.path())).is_ok());
        assert!(cfg.build(Some(Path::new("/nonexistent"))).is_err());
    }

    proptest! {
        #[test]
        fn numeric_fields_round_trip(
            length in 0.1f64..50.0,
            temp in -20.0f64..200.0,
            waist in 0.01f64..2.0,
            zd in 10.0f64..5000.0,
            step in 1e-4f64..0.05,
        ) {
            let mut cfg = ScenarioConfig::preset("paper-config-1").unwrap();
            cfg.crystal.length_mm = length;
            cfg.crystal.temperature_c = temp;
            cfg.pump.waist_mm = waist;
            cfg.detection.z_d_mm = zd;
            cfg.detection.scan_step_mm = step;
            let again = ScenarioConfig::parse(&cfg.to_ini()).unwrap();
            prop_assert_eq!(cfg, again);
        }
    }
}
