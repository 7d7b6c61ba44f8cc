//! Python bindings for `nr_energy_core`.

use std::collections::BTreeMap;

use nr_energy_core::cost::{
    cycles_to_f64, energy_per_cycle as core_energy_per_cycle, parse_cycles, EnergyParams,
};
use nr_energy_core::emit::{self, Format};
use nr_energy_core::ingest::{self, FilterConfig, MeasuredReport};
use nr_energy_core::report::BlockEnergy;
use nr_energy_core::{
    legacy as core_legacy, opcount, BlockId, InstructionCostTable, OperationTally,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(
    nr_energy,
    NrEnergyError,
    PyValueError,
    "Raised for invalid inputs and failed estimates."
);

fn err(e: impl std::fmt::Display) -> PyErr {
    NrEnergyError::new_err(e.to_string())
}

type TallyDict = BTreeMap<(String, String), u64>;
type ComparisonRow = (f64, f64, Option<f64>, &'static str);

fn tally_dict(t: &OperationTally) -> TallyDict {
    t.iter()
        .map(|(k, c, n)| ((k.as_str().to_string(), c.as_str().to_string()), n))
        .collect()
}

fn parse_format(format: &str) -> PyResult<Format> {
    format.parse().map_err(err)
}

/// A downlink transmission to be costed.
#[pyclass(name = "Scenario", module = "nr_energy")]
pub struct PyScenario {
    inner: nr_energy_core::Scenario,
}

#[pymethods]
impl PyScenario {
    /// The reference scenario: 1 slot, 16-QAM at 490/1024, 4x4, 2 layers.
    #[staticmethod]
    fn reference() -> Self {
        PyScenario {
            inner: nr_energy_core::Scenario::reference(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: nr_energy_core::Scenario::from_toml_str(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: nr_energy_core::Scenario::load(path).map_err(err)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn n_slots(&self) -> u64 {
        self.inner.n_slots
    }

    #[setter]
    fn set_n_slots(&mut self, value: u64) {
        self.inner.n_slots = value;
    }

    #[getter]
    fn n_prb(&self) -> u64 {
        self.inner.n_prb
    }

    #[setter]
    fn set_n_prb(&mut self, value: u64) {
        self.inner.n_prb = value;
    }

    #[getter]
    fn scs_khz(&self) -> u32 {
        self.inner.scs_khz
    }

    #[setter]
    fn set_scs_khz(&mut self, value: u32) {
        self.inner.scs_khz = value;
    }

    #[getter]
    fn code_rate(&self) -> u32 {
        self.inner.code_rate
    }

    #[setter]
    fn set_code_rate(&mut self, value: u32) {
        self.inner.code_rate = value;
    }

    #[getter]
    fn n_tx(&self) -> u64 {
        self.inner.n_tx
    }

    #[setter]
    fn set_n_tx(&mut self, value: u64) {
        self.inner.n_tx = value;
    }

    #[getter]
    fn n_rx(&self) -> u64 {
        self.inner.n_rx
    }

    #[setter]
    fn set_n_rx(&mut self, value: u64) {
        self.inner.n_rx = value;
    }

    #[getter]
    fn n_layers(&self) -> u64 {
        self.inner.n_layers
    }

    #[setter]
    fn set_n_layers(&mut self, value: u64) {
        self.inner.n_layers = value;
    }

    #[getter]
    fn n_ports(&self) -> u64 {
        self.inner.n_ports
    }

    #[setter]
    fn set_n_ports(&mut self, value: u64) {
        self.inner.n_ports = value;
    }

    #[getter]
    fn clock_hz(&self) -> f64 {
        self.inner.clock_hz
    }

    #[setter]
    fn set_clock_hz(&mut self, value: f64) {
        self.inner.clock_hz = value;
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[setter]
    fn set_kappa(&mut self, value: f64) {
        self.inner.kappa = value;
    }

    #[getter]
    fn modulation(&self) -> &'static str {
        self.inner.modulation.as_str()
    }

    #[setter]
    fn set_modulation(&mut self, value: &str) -> PyResult<()> {
        self.inner.modulation = value.parse().map_err(err)?;
        Ok(())
    }

    /// Violated constraints, empty when the scenario is valid.
    fn validate(&self) -> Vec<String> {
        self.inner
            .validate()
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    /// Derived transmission parameters as a dict.
    fn derive(&self) -> PyResult<BTreeMap<&'static str, u64>> {
        let d = self.inner.derive().map_err(err)?;
        Ok(BTreeMap::from([
            ("subcarriers", d.subcarriers),
            ("symbols_per_slot", d.symbols_per_slot),
            ("fft_size", d.fft_size),
            ("data_res", d.data_res),
            ("bits_per_symbol", d.bits_per_symbol),
            ("layers", d.layers),
            ("n_symbols", d.n_symbols),
            ("codeword_bits", d.codeword_bits),
            ("tb_bits", d.tb_bits),
            ("code_blocks", d.code_blocks),
            ("cb_bits", d.cb_bits),
            ("lifting", d.lifting),
            ("cb_bits_total", d.cb_bits_total),
            ("coded_cb_bits", d.coded_cb_bits),
            ("symbols_per_layer", d.symbols_per_layer),
            ("pilot_subcarriers", d.pilot_subcarriers),
            ("base_graph", u64::from(d.base_graph.number())),
        ]))
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "Scenario(n_prb={}, modulation='{}', code_rate={}, n_tx={}, n_rx={}, n_layers={}, n_slots={})",
            s.n_prb,
            s.modulation.as_str(),
            s.code_rate,
            s.n_tx,
            s.n_rx,
            s.n_layers,
            s.n_slots
        )
    }
}

/// Instruction cost table keyed by operation kind and data class.
#[pyclass(name = "CostTable", module = "nr_energy")]
pub struct PyCostTable {
    inner: InstructionCostTable,
}

#[pymethods]
impl PyCostTable {
    #[staticmethod]
    fn bundled() -> Self {
        PyCostTable {
            inner: InstructionCostTable::bundled(),
        }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyCostTable {
            inner: InstructionCostTable::load(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyCostTable {
            inner: InstructionCostTable::parse(text).map_err(err)?,
        })
    }

    /// Every key costs `micro_ops` and `cycles` (e.g. "1", "0.25", "1/3").
    #[staticmethod]
    #[pyo3(signature = (micro_ops = 1, cycles = "1"))]
    fn uniform(micro_ops: u64, cycles: &str) -> PyResult<Self> {
        let c =
            parse_cycles(cycles).ok_or_else(|| err(format!("invalid cycle value '{cycles}'")))?;
        Ok(PyCostTable {
            inner: InstructionCostTable::uniform(micro_ops, c),
        })
    }

    /// `(micro_ops, cycles)` for an operation kind and data class.
    fn lookup(&self, op_kind: &str, data_class: &str) -> PyResult<(u64, f64)> {
        let e = self
            .inner
            .lookup(
                op_kind.parse().map_err(err)?,
                data_class.parse().map_err(err)?,
            )
            .map_err(err)?;
        Ok((e.micro_ops, cycles_to_f64(&e.cycles)))
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn block_dict(b: &BlockEnergy, epsilon: f64) -> BTreeMap<&'static str, Option<f64>> {
    BTreeMap::from([
        ("micro_ops", Some(b.micro_ops as f64)),
        ("cycles", Some(b.cycles_f64())),
        ("energy_j", Some(b.energy_j)),
        ("cycles_per_bit", b.cycles_per_bit),
        ("energy_nj_per_bit", b.energy_nj_per_bit(epsilon)),
    ])
}

/// Per-block micro-ops, cycles and energy of one run.
#[pyclass(name = "EnergyReport", module = "nr_energy")]
pub struct PyEnergyReport {
    inner: nr_energy_core::EnergyReport,
}

#[pymethods]
impl PyEnergyReport {
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn bits_transmitted(&self) -> u64 {
        self.inner.bits_transmitted
    }

    /// `{block: {micro_ops, cycles, energy_j, cycles_per_bit, energy_nj_per_bit}}`
    #[getter]
    fn blocks(&self) -> BTreeMap<String, BTreeMap<&'static str, Option<f64>>> {
        self.inner
            .per_block
            .iter()
            .map(|(id, b)| (id.to_string(), block_dict(b, self.inner.epsilon)))
            .collect()
    }

    #[getter]
    fn total(&self) -> BTreeMap<&'static str, Option<f64>> {
        block_dict(&self.inner.total, self.inner.epsilon)
    }

    /// Exact cycle count of a block (or "total") as text.
    fn exact_cycles(&self, block: &str) -> PyResult<String> {
        if block == "total" {
            return Ok(emit::exact(&self.inner.total.cycles));
        }
        let id: BlockId = block.parse().map_err(err)?;
        Ok(emit::exact(&self.inner.block(id).cycles))
    }

    #[pyo3(signature = (format = "structured-text"))]
    fn render(&self, format: &str) -> PyResult<String> {
        Ok(emit::estimate(&self.inner, parse_format(format)?))
    }
}

/// Per-block operation tallies: `{block: {(op_kind, data_class): count}}`.
#[pyfunction]
fn tally_pipeline(scenario: &PyScenario) -> PyResult<BTreeMap<String, TallyDict>> {
    let t = opcount::tally_pipeline(&scenario.inner).map_err(err)?;
    Ok(t.per_block
        .iter()
        .map(|(id, t)| (id.to_string(), tally_dict(t)))
        .collect())
}

fn table_or_default(table: Option<&PyCostTable>) -> PyResult<InstructionCostTable> {
    match table {
        Some(t) => Ok(t.inner.clone()),
        None => InstructionCostTable::default_table().map_err(err),
    }
}

/// Costs a scenario. `kappa` and `clock_hz` override the scenario's values.
#[pyfunction]
#[pyo3(signature = (scenario, table = None, kappa = None, clock_hz = None))]
fn estimate(
    scenario: &PyScenario,
    table: Option<&PyCostTable>,
    kappa: Option<f64>,
    clock_hz: Option<f64>,
) -> PyResult<PyEnergyReport> {
    let s = &scenario.inner;
    let energy =
        EnergyParams::new(kappa.unwrap_or(s.kappa), clock_hz.unwrap_or(s.clock_hz)).map_err(err)?;
    let table = table_or_default(table)?;
    Ok(PyEnergyReport {
        inner: nr_energy_core::estimate_with(s, &table, energy).map_err(err)?,
    })
}

/// Joules per cycle, `kappa * f^2`.
#[pyfunction]
fn energy_per_cycle(kappa: f64, clock_hz: f64) -> f64 {
    core_energy_per_cycle(kappa, clock_hz)
}

#[pyfunction]
#[pyo3(signature = (bits, step_bits = 32))]
fn count_crc(bits: u64, step_bits: u64) -> PyResult<TallyDict> {
    if step_bits == 0 {
        return Err(err("step_bits must be at least 1"));
    }
    Ok(tally_dict(&opcount::count_crc(bits, step_bits)))
}

#[pyfunction]
fn fft_flops(symbols: u64, antennas: u64, fft_size: u64) -> PyResult<u64> {
    opcount::fft_flops(symbols, antennas, fft_size).map_err(err)
}

#[pyfunction]
fn ls_flops(layers: u64, rx: u64, tx: u64, channel_len: u64, symbols: u64, pilots: u64) -> u64 {
    layers * rx * opcount::ls_flops_per_pair(tx, channel_len, symbols, pilots)
}

#[pyfunction]
fn mmse_flops(rx: u64, tx: u64, subcarriers: u64, symbols: u64) -> u64 {
    opcount::mmse_flops(rx, tx, subcarriers, symbols)
}

#[pyfunction]
#[pyo3(signature = (variable_nodes, check_nodes, check_degree = 19, variable_degree = 3, iterations = 8, code_blocks = 1))]
fn count_ldpc_decode(
    variable_nodes: u64,
    check_nodes: u64,
    check_degree: u64,
    variable_degree: u64,
    iterations: u64,
    code_blocks: u64,
) -> TallyDict {
    let cfg = nr_energy_core::scenario::DecoderConfig {
        check_degree,
        variable_degree,
        iterations,
    };
    tally_dict(&opcount::count_ldpc_decode(
        variable_nodes,
        check_nodes,
        &cfg,
        code_blocks,
    ))
}

/// Evaluates a RAN power model on TOML parameters; returns `(value, unit)`.
#[pyfunction]
fn legacy(model: &str, params: &str) -> PyResult<(f64, &'static str)> {
    let o = core_legacy::evaluate(model, params).map_err(err)?;
    Ok((o.value, o.unit))
}

#[pyfunction]
fn legacy_models() -> Vec<&'static str> {
    core_legacy::MODEL_NAMES.to_vec()
}

/// Compares modeled cycles with a measured CSV report.
///
/// Returns `{block: (modeled, measured, ratio or None, verdict)}` including
/// a "total" entry.
#[pyfunction]
#[pyo3(signature = (scenario, measured_csv, filter_toml = None, table = None))]
fn compare(
    scenario: &PyScenario,
    measured_csv: &str,
    filter_toml: Option<&str>,
    table: Option<&PyCostTable>,
) -> PyResult<BTreeMap<String, ComparisonRow>> {
    let cfg = match filter_toml {
        Some(t) => FilterConfig::from_toml_str(t).map_err(err)?,
        None => FilterConfig::default(),
    };
    let report = MeasuredReport::parse_str(measured_csv, &cfg.filter, &cfg.blocks).map_err(err)?;
    if let Some(w) = report.warning() {
        return Err(err(w));
    }
    let table = table_or_default(table)?;
    let modeled = nr_energy_core::estimate(&scenario.inner, &table).map_err(err)?;
    let measured = ingest::measured_cycles(&report, &table).map_err(err)?;
    let cmp = ingest::compare(&modeled, &measured);
    let row = |c: &ingest::BlockComparison| {
        (
            cycles_to_f64(&c.modeled),
            cycles_to_f64(&c.measured),
            c.ratio_f64(),
            c.verdict.as_str(),
        )
    };
    let mut out: BTreeMap<_, _> = cmp
        .per_block
        .iter()
        .map(|(id, c)| (id.to_string(), row(c)))
        .collect();
    out.insert("total".into(), row(&cmp.total));
    Ok(out)
}

/// The model's own tallies rendered as a measurement CSV.
#[pyfunction]
fn synthesize_measurement(scenario: &PyScenario) -> PyResult<String> {
    let t = opcount::tally_pipeline(&scenario.inner).map_err(err)?;
    Ok(ingest::synthesize_report(&t).to_csv())
}

#[pymodule]
fn nr_energy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NrEnergyError", m.py().get_type::<NrEnergyError>())?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyCostTable>()?;
    m.add_class::<PyEnergyReport>()?;
    m.add_function(wrap_pyfunction!(tally_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(energy_per_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(count_crc, m)?)?;
    m.add_function(wrap_pyfunction!(fft_flops, m)?)?;
    m.add_function(wrap_pyfunction!(ls_flops, m)?)?;
    m.add_function(wrap_pyfunction!(mmse_flops, m)?)?;
    m.add_function(wrap_pyfunction!(count_ldpc_decode, m)?)?;
    m.add_function(wrap_pyfunction!(legacy, m)?)?;
    m.add_function(wrap_pyfunction!(legacy_models, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_measurement, m)?)?;
    m.add(
        "BLOCKS",
        BlockId::ALL
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}
