//! Python bindings. Inputs are small frozen classes; results come back as
//! plain dicts keyed by field name.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use waterslide_core::channel::{self, LinkSpec, RadioEnvironment};
use waterslide_core::converse::{self, BoundEvaluation, BoundProfile, ConverseChannel};
use waterslide_core::density::{self, DensityPoint, LinkLayout, PracticalCode, SubBands, Transmission};
use waterslide_core::ldpc::{self, LdpcLink, RegularEnsemble};
use waterslide_core::math;
use waterslide_core::power::{self, BoundPoint, ChannelKind, DecoderTech, PowerSearch};

create_exception!(waterslide, WaterslideError, PyValueError);

fn raise(e: waterslide_core::Error) -> PyErr {
    WaterslideError::new_err(e.to_string())
}

fn channel_kind(name: &str) -> PyResult<ChannelKind> {
    match name.to_ascii_lowercase().as_str() {
        "bsc" => Ok(ChannelKind::Bsc),
        "awgn" => Ok(ChannelKind::Awgn),
        other => Err(PyValueError::new_err(format!("channel must be 'bsc' or 'awgn', got {other:?}"))),
    }
}

#[pyclass(name = "RadioEnvironment", module = "waterslide", frozen)]
struct PyEnvironment(RadioEnvironment);

#[pymethods]
impl PyEnvironment {
    #[new]
    #[pyo3(signature = (carrier_frequency=60e9, bandwidth=3e9, path_loss_exponent=3.0, temperature=300.0))]
    fn new(carrier_frequency: f64, bandwidth: f64, path_loss_exponent: f64, temperature: f64) -> PyResult<Self> {
        RadioEnvironment::new(carrier_frequency, bandwidth, path_loss_exponent, temperature)
            .map(Self)
            .map_err(raise)
    }

    #[getter]
    fn carrier_frequency(&self) -> f64 {
        self.0.carrier_frequency
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.0.bandwidth
    }

    #[getter]
    fn path_loss_exponent(&self) -> f64 {
        self.0.path_loss_exponent
    }

    #[getter]
    fn temperature(&self) -> f64 {
        self.0.temperature
    }

    fn wavelength(&self) -> f64 {
        self.0.wavelength()
    }

    fn noise_power(&self) -> f64 {
        self.0.noise_power()
    }

    fn received_power(&self, transmit_power: f64, distance: f64) -> f64 {
        channel::received_power(transmit_power, distance, &self.0)
    }

    fn __repr__(&self) -> String {
        let e = &self.0;
        format!(
            "RadioEnvironment(carrier_frequency={:?}, bandwidth={:?}, path_loss_exponent={:?}, temperature={:?})",
            e.carrier_frequency, e.bandwidth, e.path_loss_exponent, e.temperature
        )
    }
}

#[pyclass(name = "LinkSpec", module = "waterslide", frozen)]
struct PyLink(LinkSpec);

#[pymethods]
impl PyLink {
    #[new]
    #[pyo3(signature = (distance=10.0, data_rate=1.5e9, target_pe=1e-6))]
    fn new(distance: f64, data_rate: f64, target_pe: f64) -> PyResult<Self> {
        LinkSpec::new(distance, data_rate, target_pe).map(Self).map_err(raise)
    }

    #[getter]
    fn distance(&self) -> f64 {
        self.0.distance
    }

    #[getter]
    fn data_rate(&self) -> f64 {
        self.0.data_rate
    }

    #[getter]
    fn target_pe(&self) -> f64 {
        self.0.target_pe
    }

    fn spectral_rate(&self, env: PyRef<'_, PyEnvironment>) -> f64 {
        self.0.spectral_rate(&env.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "LinkSpec(distance={:?}, data_rate={:?}, target_pe={:?})",
            self.0.distance, self.0.data_rate, self.0.target_pe
        )
    }
}

#[pyclass(name = "DecoderTech", module = "waterslide", frozen)]
struct PyDecoder(DecoderTech);

#[pymethods]
impl PyDecoder {
    #[new]
    #[pyo3(signature = (node_energy=3e-12, max_degree=4, decode_weight=1.0, decode_throughput=None))]
    fn new(node_energy: f64, max_degree: u32, decode_weight: f64, decode_throughput: Option<f64>) -> PyResult<Self> {
        let tech = DecoderTech {
            node_energy,
            max_degree,
            decode_weight,
            decode_throughput,
        };
        tech.validate().map_err(raise)?;
        Ok(Self(tech))
    }

    #[getter]
    fn node_energy(&self) -> f64 {
        self.0.node_energy
    }

    #[getter]
    fn max_degree(&self) -> u32 {
        self.0.max_degree
    }

    #[getter]
    fn decode_weight(&self) -> f64 {
        self.0.decode_weight
    }

    fn gamma(&self, link: PyRef<'_, PyLink>, env: PyRef<'_, PyEnvironment>) -> f64 {
        self.0.gamma(&link.0, &env.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "DecoderTech(node_energy={:?}, max_degree={}, decode_weight={:?})",
            self.0.node_energy, self.0.max_degree, self.0.decode_weight
        )
    }
}

#[pyclass(name = "RegularEnsemble", module = "waterslide", frozen)]
struct PyEnsemble(RegularEnsemble);

#[pymethods]
impl PyEnsemble {
    #[new]
    #[pyo3(signature = (variable_degree=3, check_degree=4))]
    fn new(variable_degree: u32, check_degree: u32) -> PyResult<Self> {
        RegularEnsemble::new(variable_degree, check_degree).map(Self).map_err(raise)
    }

    fn design_rate(&self) -> f64 {
        self.0.design_rate()
    }

    /// Decoding threshold of the hard-decision message-passing decoder.
    fn threshold(&self) -> PyResult<f64> {
        ldpc::de_threshold(&self.0).map_err(raise)
    }

    fn iterations_to_pe(&self, crossover: f64, target_pe: f64) -> PyResult<u32> {
        ldpc::iterations_to_pe(crossover, target_pe, &self.0).map_err(raise)
    }

    fn check_node_loss_db(&self) -> f64 {
        ldpc::check_node_loss_db(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("RegularEnsemble({}, {})", self.0.variable_degree, self.0.check_degree)
    }
}

/// A channel at a fixed operating point, for the neighborhood-size converse.
#[pyclass(name = "ConverseChannel", module = "waterslide", frozen)]
struct PyConverse(BoundProfile);

impl PyConverse {
    fn build(channel: waterslide_core::Result<ConverseChannel>) -> PyResult<Self> {
        channel.and_then(BoundProfile::new).map(Self).map_err(raise)
    }
}

#[pymethods]
impl PyConverse {
    #[staticmethod]
    fn bsc(crossover: f64, spectral_rate: f64) -> PyResult<Self> {
        Self::build(ConverseChannel::bsc(crossover, spectral_rate))
    }

    #[staticmethod]
    #[pyo3(signature = (snr, spectral_rate, noise_variance=1.0))]
    fn awgn(snr: f64, spectral_rate: f64, noise_variance: f64) -> PyResult<Self> {
        Self::build(ConverseChannel::awgn(snr * noise_variance, noise_variance, spectral_rate))
    }

    fn capacity(&self) -> f64 {
        self.0.channel().capacity()
    }

    /// Error-probability lower bound at neighborhood size `n`.
    fn pe_lower_bound<'py>(&self, py: Python<'py>, n: f64) -> PyResult<Bound<'py, PyDict>> {
        if !(n >= 1.0) {
            return Err(PyValueError::new_err(format!("neighborhood must be >= 1, got {n}")));
        }
        evaluation_dict(py, &self.0.evaluate(n))
    }

    fn min_neighborhood<'py>(&self, py: Python<'py>, target_pe: f64) -> PyResult<Bound<'py, PyDict>> {
        let nb = py.detach(|| self.0.min_neighborhood(target_pe)).map_err(raise)?;
        let d = evaluation_dict(py, &nb.evaluation)?;
        d.set_item("neighborhood", nb.neighborhood)?;
        Ok(d)
    }

    fn asymptotic_neighborhood(&self, target_pe: f64) -> PyResult<f64> {
        converse::asymptotic_neighborhood(self.0.channel(), target_pe).map_err(raise)
    }
}

fn evaluation_dict<'py>(py: Python<'py>, e: &BoundEvaluation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("pe_lower_bound", e.pe_lower_bound)?;
    d.set_item("ln_pe_lower_bound", e.ln_pe_lower_bound)?;
    d.set_item("optimizer", e.optimizer)?;
    d.set_item("delta", e.delta)?;
    d.set_item("divergence", e.divergence)?;
    Ok(d)
}

fn bound_point_dict<'py>(py: Python<'py>, target_pe: f64, p: &BoundPoint) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("target_pe", target_pe)?;
    d.set_item("transmit_power", p.transmit_power)?;
    d.set_item("received_power", p.received_power)?;
    d.set_item("path_weight", p.path_weight)?;
    d.set_item("neighborhood", p.neighborhood)?;
    d.set_item("iterations", p.iterations)?;
    d.set_item("decode_power", p.decode_power)?;
    d.set_item("total_power", p.total_power)?;
    d.set_item("gamma", p.gamma)?;
    d.set_item("optimizer", p.optimizer)?;
    Ok(d)
}

fn density_dict<'py>(py: Python<'py>, p: &DensityPoint) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("spacing", p.spacing)?;
    d.set_item("sub_bands", p.sub_bands)?;
    d.set_item("same_band_density", p.same_band_density)?;
    d.set_item("density", p.density)?;
    d.set_item("transmit_power", p.transmit_power)?;
    d.set_item("total_power", p.total_power)?;
    d.set_item("sinr", p.sinr)?;
    d.set_item("required_sinr", p.required_sinr)?;
    d.set_item("feasible", p.feasible)?;
    d.set_item("at_spacing_floor", p.at_spacing_floor)?;
    Ok(d)
}

#[pyfunction]
fn binary_entropy(p: f64) -> f64 {
    math::binary_entropy(p)
}

#[pyfunction]
fn binary_entropy_inverse(h: f64) -> PyResult<f64> {
    math::binary_entropy_inverse(h).map_err(raise)
}

#[pyfunction]
fn q_function(x: f64) -> f64 {
    math::q_function(x)
}

#[pyfunction]
fn q_function_inverse(p: f64) -> PyResult<f64> {
    math::q_function_inverse(p).map_err(raise)
}

#[pyfunction]
fn bsc_capacity(crossover: f64) -> PyResult<f64> {
    channel::bsc_capacity(crossover).map_err(raise)
}

#[pyfunction]
fn awgn_capacity(received_power: f64, noise_variance: f64) -> f64 {
    channel::awgn_capacity(received_power, noise_variance)
}

/// Nodes within `iterations` hops when no node has more than `max_degree` neighbours.
#[pyfunction]
fn neighborhood_size(iterations: u32, max_degree: u32) -> PyResult<u64> {
    power::neighborhood_size(iterations, max_degree).map_err(raise)
}

#[pyfunction]
fn iterations_lower_bound(neighborhood: f64, max_degree: u32) -> PyResult<f64> {
    power::iterations_lower_bound(neighborhood, max_degree).map_err(raise)
}

#[pyfunction]
fn shannon_limit_transmit_power(
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    channel: &str,
) -> PyResult<f64> {
    power::shannon_limit_transmit_power(&link.0, &env.0, channel_kind(channel)?).map_err(raise)
}

#[pyfunction]
#[pyo3(signature = (transmit_power, link, env, tech, channel="bsc"))]
fn total_power_lower_bound<'py>(
    py: Python<'py>,
    transmit_power: f64,
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    tech: PyRef<'_, PyDecoder>,
    channel: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = channel_kind(channel)?;
    let (l, e, t) = (link.0, env.0, tech.0);
    let p = py
        .detach(|| power::total_power_lower_bound(transmit_power, &l, &e, &t, kind))
        .map_err(raise)?;
    bound_point_dict(py, l.target_pe, &p)
}

/// Total-power lower bound minimized over transmit power.
#[pyfunction]
#[pyo3(signature = (link, env, tech, channel="bsc"))]
fn optimize_transmit_power<'py>(
    py: Python<'py>,
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    tech: PyRef<'_, PyDecoder>,
    channel: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = channel_kind(channel)?;
    let (l, e, t) = (link.0, env.0, tech.0);
    let p = py
        .detach(|| power::optimize_transmit_power(&l, &e, &t, kind, &PowerSearch::default()))
        .map_err(raise)?;
    bound_point_dict(py, l.target_pe, &p)
}

#[pyfunction]
#[pyo3(signature = (link, env, tech, channel="bsc"))]
fn asymptotic_optimal_transmit_power(
    py: Python<'_>,
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    tech: PyRef<'_, PyDecoder>,
    channel: &str,
) -> PyResult<f64> {
    let kind = channel_kind(channel)?;
    let (l, e, t) = (link.0, env.0, tech.0);
    py.detach(|| power::asymptotic_optimal_transmit_power(&l, &e, &t, kind))
        .map_err(raise)
}

/// One optimized row per target error probability; raises on the first failing row.
#[pyfunction]
#[pyo3(signature = (pe_grid, link, env, tech, channel="bsc"))]
fn waterslide_sweep<'py>(
    py: Python<'py>,
    pe_grid: Vec<f64>,
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    tech: PyRef<'_, PyDecoder>,
    channel: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kind = channel_kind(channel)?;
    let (l, e, t) = (link.0, env.0, tech.0);
    let rows = py.detach(|| power::waterslide_sweep(&pe_grid, &l, &e, &t, kind, &PowerSearch::default()));
    pe_grid
        .iter()
        .zip(rows)
        .map(|(&pe, row)| bound_point_dict(py, pe, &row.map_err(raise)?))
        .collect()
}

/// Optimized regular-LDPC operating point per target, beside the hard-decision bound.
#[pyfunction]
fn ldpc_waterslide<'py>(
    py: Python<'py>,
    pe_grid: Vec<f64>,
    link: PyRef<'_, PyLink>,
    env: PyRef<'_, PyEnvironment>,
    tech: PyRef<'_, PyDecoder>,
    ensemble: PyRef<'_, PyEnsemble>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ctx = LdpcLink {
        link: link.0,
        env: env.0,
        tech: tech.0,
        ensemble: ensemble.0,
    };
    let rows = py
        .detach(|| ldpc::ldpc_waterslide(&pe_grid, &ctx, &PowerSearch::default()))
        .map_err(raise)?;
    rows.into_iter()
        .map(|row| {
            let row = row.map_err(raise)?;
            let a = row.achieved;
            let d = PyDict::new(py);
            d.set_item("target_pe", a.target_pe)?;
            d.set_item("transmit_power", a.transmit_power)?;
            d.set_item("crossover", a.crossover)?;
            d.set_item("iterations", a.iterations)?;
            d.set_item("decode_power", a.decode_power)?;
            d.set_item("total_power", a.total_power)?;
            d.set_item("converse_total_power", row.converse_total_power)?;
            d.set_item("gap_db", row.gap_db)?;
            Ok(d)
        })
        .collect()
}

/// Links per square metre of a triangular grid with the given spacing, one band.
#[pyfunction]
fn grid_density(spacing: f64) -> f64 {
    density::grid_density(spacing)
}

/// Interference-limited links on a triangular grid, one fixed link geometry.
///
/// Building one precomputes the interference sum over a range of spacings,
/// so reuse it across queries.
#[pyclass(name = "DensitySolver", module = "waterslide", frozen)]
struct PyDensitySolver(density::SpacingSolver);

impl PyDensitySolver {
    fn band_scan(&self, max_sub_bands: Option<u32>) -> SubBands {
        SubBands::Scan {
            max: max_sub_bands.unwrap_or_else(|| self.0.layout().default_band_cap()),
        }
    }
}

#[pymethods]
impl PyDensitySolver {
    #[new]
    #[pyo3(signature = (link_distance=1.0, data_rate=1.5e9, env=None, orientation=0.0, min_spacing=None))]
    fn new(
        py: Python<'_>,
        link_distance: f64,
        data_rate: f64,
        env: Option<PyRef<'_, PyEnvironment>>,
        orientation: f64,
        min_spacing: Option<f64>,
    ) -> PyResult<Self> {
        let env = env.map_or_else(RadioEnvironment::sixty_ghz, |e| e.0);
        let layout = LinkLayout {
            orientation,
            min_spacing,
            ..LinkLayout::new(link_distance, data_rate, env).map_err(raise)?
        };
        layout.validate().map_err(raise)?;
        py.detach(|| density::SpacingSolver::new(layout)).map(Self).map_err(raise)
    }

    /// Interference at the receiver per watt transmitted by every grid node.
    fn unit_interference(&self, spacing: f64) -> PyResult<f64> {
        self.0.unit_interference(spacing).map_err(raise)
    }

    fn uncoded_max_density<'py>(&self, py: Python<'py>, target_pe: f64, transmit_power: f64) -> PyResult<Bound<'py, PyDict>> {
        let p = density::uncoded_max_density(target_pe, transmit_power, &self.0).map_err(raise)?;
        density_dict(py, &p)
    }

    #[pyo3(signature = (target_pe, transmit_power, gap_db=0.0, max_sub_bands=None))]
    fn coded_max_density<'py>(
        &self,
        py: Python<'py>,
        target_pe: f64,
        transmit_power: f64,
        gap_db: f64,
        max_sub_bands: Option<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let bands = self.band_scan(max_sub_bands);
        let p = py
            .detach(|| density::coded_max_density(target_pe, transmit_power, &self.0, bands, gap_db))
            .map_err(raise)?;
        density_dict(py, &p)
    }

    /// Density as transmit power grows without bound; `gap_db=None` means uncoded.
    #[pyo3(signature = (target_pe, gap_db=None, max_sub_bands=None))]
    fn infinite_power_density<'py>(
        &self,
        py: Python<'py>,
        target_pe: f64,
        gap_db: Option<f64>,
        max_sub_bands: Option<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mode = match gap_db {
            None => Transmission::Uncoded,
            Some(gap_db) => Transmission::Coded {
                gap_db,
                sub_bands: self.band_scan(max_sub_bands),
            },
        };
        let p = py
            .detach(|| density::infinite_power_density(target_pe, &self.0, mode))
            .map_err(raise)?;
        density_dict(py, &p)
    }

    fn uncoded_density_curve<'py>(
        &self,
        py: Python<'py>,
        target_pe: f64,
        power_grid: Vec<f64>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let rows = py.detach(|| density::uncoded_density_curve(target_pe, &power_grid, &self.0));
        rows.into_iter().map(|r| density_dict(py, &r.map_err(raise)?)).collect()
    }

    /// Density of a concrete code whose decoder spends a fixed power.
    #[pyo3(signature = (power_grid, required_sinr_db=5.5, code_rate=0.8125, node_energy=3e-12, iterations=8))]
    fn practical_code_density_curve<'py>(
        &self,
        py: Python<'py>,
        power_grid: Vec<f64>,
        required_sinr_db: f64,
        code_rate: f64,
        node_energy: f64,
        iterations: u32,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let code = PracticalCode {
            required_sinr: 10f64.powf(required_sinr_db / 10.0),
            code_rate,
            node_energy,
            iterations,
        };
        let rows = py
            .detach(|| density::practical_code_density_curve(&code, &power_grid, &self.0))
            .map_err(raise)?;
        rows.iter().map(|p| density_dict(py, p)).collect()
    }

    /// Upper bound on the density any code can reach at each total-power budget.
    #[pyo3(signature = (power_grid, tech, target_pe=1e-6, max_sub_bands=None))]
    fn upper_bound_curve<'py>(
        &self,
        py: Python<'py>,
        power_grid: Vec<f64>,
        tech: PyRef<'_, PyDecoder>,
        target_pe: f64,
        max_sub_bands: Option<u32>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let (t, bands) = (tech.0, self.band_scan(max_sub_bands));
        let rows = py
            .detach(|| density::optimal_code_density_upper_bound(&power_grid, &self.0, &t, target_pe, bands))
            .map_err(raise)?;
        rows.into_iter()
            .map(|row| {
                let row = row.map_err(raise)?;
                let d = density_dict(py, &row.point)?;
                d.set_item("design_sinr", row.design_sinr)?;
                d.set_item("shannon_min_sinr", row.shannon_min_sinr)?;
                d.set_item("spectral_rate", row.spectral_rate)?;
                d.set_item("capacity", row.capacity)?;
                d.set_item("gap_db", row.gap_db)?;
                d.set_item("neighborhood", row.neighborhood)?;
                d.set_item("iterations", row.iterations)?;
                d.set_item("decode_power", row.decode_power)?;
                Ok(d)
            })
            .collect()
    }
}

#[pymodule]
fn waterslide(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WaterslideError", m.py().get_type::<WaterslideError>())?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PyLink>()?;
    m.add_class::<PyDecoder>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyConverse>()?;
    m.add_class::<PyDensitySolver>()?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(q_function_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(bsc_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(awgn_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(neighborhood_size, m)?)?;
    m.add_function(wrap_pyfunction!(iterations_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_limit_transmit_power, m)?)?;
    m.add_function(wrap_pyfunction!(total_power_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_transmit_power, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_optimal_transmit_power, m)?)?;
    m.add_function(wrap_pyfunction!(waterslide_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ldpc_waterslide, m)?)?;
    m.add_function(wrap_pyfunction!(grid_density, m)?)?;
    Ok(())
}
