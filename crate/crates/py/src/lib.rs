//! Python bindings: scenarios, poling design, Maker fringes, pump profiles
//! and coincidence scans.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qpmsim_core::biphoton::{ScanMode, ScanResult};
use qpmsim_core::config::ScenarioConfig;
use qpmsim_core::dispersion::{IndexModel, SellmeierThermal};
use qpmsim_core::model::{self, Axis, AxisAssignment};
use qpmsim_core::phasematch;
use qpmsim_core::scenario;
use qpmsim_core::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn scan_dict<'py>(py: Python<'py>, r: &ScanResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("positions", r.positions.clone())?;
    d.set_item("rates", r.rates.clone())?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("method", r.method.clone())?;
    d.set_item("peak", r.peak)?;
    d.set_item("efficiency_drop", r.efficiency_drop)?;
    d.set_item("warnings", r.warnings.clone())?;
    Ok(d)
}

/// A validated simulation scenario.
///
/// `Scenario("paper-config-1")` loads a bundled preset; any other string is
/// read as a path to a scenario file.
#[pyclass(name = "Scenario", module = "qpmsim", frozen)]
struct PyScenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    fn new(config: &str) -> PyResult<Self> {
        let (cfg, base) = ScenarioConfig::load(config).map_err(to_py)?;
        let inner = cfg.build(base.as_deref()).map_err(to_py)?;
        Ok(PyScenario { inner })
    }

    /// Builds a scenario from INI text; relative table paths resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (text, base_dir=None))]
    fn from_text(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let cfg = ScenarioConfig::parse(text).map_err(to_py)?;
        let inner = cfg.build(base_dir.as_deref()).map_err(to_py)?;
        Ok(PyScenario { inner })
    }

    #[getter]
    fn poling_period(&self) -> f64 {
        self.inner.crystal().poling_period()
    }

    #[getter]
    fn crystal_length(&self) -> f64 {
        self.inner.crystal().length()
    }

    #[getter]
    fn detection_distance(&self) -> f64 {
        self.inner.detection().z_d()
    }

    /// Copy with the detectors moved to `z_d` metres behind the crystal.
    fn with_detection_distance(&self, z_d: f64) -> PyResult<Self> {
        let g = self.inner.detection().with_z_d(z_d).map_err(to_py)?;
        Ok(PyScenario {
            inner: self.inner.with_detection(g),
        })
    }

    fn design_poling<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.design_poling().map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("poling_period", r.poling_period)?;
        d.set_item("residual", r.residual)?;
        d.set_item("n_pump", r.n_pump)?;
        d.set_item("n_signal", r.n_signal)?;
        d.set_item("n_idler", r.n_idler)?;
        d.set_item("pump_group_index", r.pump_group_index)?;
        d.set_item("index_model", r.model_id)?;
        d.set_item("temperature_c", r.temperature_c)?;
        Ok(d)
    }

    /// `(alpha_rad, efficiency)` lists from 0 to `alpha_max_deg`.
    #[pyo3(signature = (alpha_max_deg=1.0, alpha_step_deg=0.005))]
    fn maker_fringes(&self, alpha_max_deg: f64, alpha_step_deg: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let curve = self
            .inner
            .maker_fringes(alpha_max_deg.to_radians(), alpha_step_deg.to_radians())
            .map_err(to_py)?;
        Ok(curve.into_iter().unzip())
    }

    fn efficiency_drop(&self) -> PyResult<f64> {
        self.inner.efficiency_drop().map_err(to_py)
    }

    /// Pump intensity at the detection plane as `(x_m, intensity)`, peak-normalized.
    fn pump_profile(&self, py: Python<'_>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let prop = py.detach(|| self.inner.pump_propagation()).map_err(to_py)?;
        let f = prop.at_detection;
        let mut i = f.intensity();
        let peak = i.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            i.iter_mut().for_each(|v| *v /= peak);
        }
        Ok((f.positions(), i))
    }

    /// Coincidence scan. `method` is `analytic`, `oracle` or `both`; `scan` is
    /// `both-together`, `signal-only` or `idler-only`.
    #[pyo3(signature = (method="analytic", scan="both-together"))]
    fn coincidence_scan<'py>(&self, py: Python<'py>, method: &str, scan: &str) -> PyResult<Bound<'py, PyDict>> {
        let mode: ScanMode = scan.parse().map_err(to_py)?;
        match method {
            "analytic" => {
                let r = py.detach(|| self.inner.coincidence_analytic(mode)).map_err(to_py)?;
                scan_dict(py, &r)
            }
            "oracle" => {
                let r = py.detach(|| self.inner.coincidence_oracle(mode)).map_err(to_py)?;
                scan_dict(py, &r)
            }
            "both" => {
                let c = py.detach(|| self.inner.coincidence_both(mode)).map_err(to_py)?;
                let d = PyDict::new(py);
                d.set_item("analytic", scan_dict(py, &c.analytic)?)?;
                d.set_item("oracle", scan_dict(py, &c.oracle)?)?;
                d.set_item("correlation", c.correlation)?;
                Ok(d)
            }
            other => Err(PyValueError::new_err(format!(
                "unknown method `{other}` (expected analytic, oracle or both)"
            ))),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(L={} mm, Λ={:.5} µm, z_D={} mm)",
            self.inner.crystal().length() * 1e3,
            self.inner.crystal().poling_period() * 1e6,
            self.inner.detection().z_d() * 1e3
        )
    }
}

#[pyfunction]
fn sinc(x: f64) -> f64 {
    model::sinc(x)
}

#[pyfunction]
fn angular_frequency(wavelength: f64) -> PyResult<f64> {
    model::angular_frequency(wavelength).map_err(to_py)
}

#[pyfunction]
fn gamma_from_pulse_width(tau: f64) -> PyResult<f64> {
    model::gamma_from_pulse_width(tau).map_err(to_py)
}

/// KTP index (default Sellmeier set) at `wavelength` metres along `axis`.
#[pyfunction]
#[pyo3(signature = (wavelength, axis, temperature_c=40.0))]
fn refractive_index(wavelength: f64, axis: &str, temperature_c: f64) -> PyResult<f64> {
    let axis: Axis = axis.parse().map_err(to_py)?;
    SellmeierThermal::ktp_kato2002()
        .refractive_index(wavelength, axis, temperature_c)
        .map_err(to_py)
}

/// Collinear KTP poling period for a degenerate pump at `pump_wavelength` metres.
#[pyfunction]
#[pyo3(signature = (pump_wavelength, temperature_c=40.0, order=1))]
fn design_poling_period(pump_wavelength: f64, temperature_c: f64, order: u32) -> PyResult<f64> {
    let model = SellmeierThermal::ktp_kato2002();
    let wl = 2.0 * pump_wavelength;
    phasematch::design_poling_period(
        pump_wavelength,
        wl,
        wl,
        AxisAssignment::default(),
        temperature_c,
        order,
        &model,
    )
    .map_err(to_py)
}

#[pymodule]
fn qpmsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(sinc, m)?)?;
    m.add_function(wrap_pyfunction!(angular_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_from_pulse_width, m)?)?;
    m.add_function(wrap_pyfunction!(refractive_index, m)?)?;
    m.add_function(wrap_pyfunction!(design_poling_period, m)?)?;
    m.add("PRESETS", qpmsim_core::config::PRESET_NAMES.to_vec())?;
    Ok(())
}
