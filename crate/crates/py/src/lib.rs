//! Python bindings for the Ising solver, the SACHI architecture model and
//! the cost model. Structured results come back as plain dicts.

use std::path::PathBuf;

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use sachi_core::arch::{self, ArchConfig, Design};
use sachi_core::bits::{self, EncodedSpin};
use sachi_core::cost::{self, BaselineParams, CompareInput, TechParams};
use sachi_core::ising::{self, AnnealConfig, IsingGraph, Spin};
use sachi_core::workloads::Benchmark;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn spin_of(v: i64) -> PyResult<Spin> {
    Spin::from_value(v).ok_or_else(|| PyValueError::new_err(format!("spin must be +1 or -1, got {v}")))
}

fn design_of(name: &str) -> PyResult<Design> {
    name.parse().map_err(value_err)
}

fn arch_config(tiles: Option<usize>, tile_rows: Option<usize>) -> ArchConfig {
    let mut cfg = ArchConfig::default();
    if let Some(t) = tiles {
        cfg.tiles = t;
    }
    if let Some(r) = tile_rows {
        cfg.tile_rows = r;
    }
    cfg
}

fn anneal_config(g: &IsingGraph, seed: u64, init_temp: Option<f64>, max_iterations: Option<usize>) -> PyResult<AnnealConfig> {
    let mut cfg = AnnealConfig::for_graph(g, seed);
    if let Some(t) = init_temp {
        cfg.init_temp = t;
    }
    if let Some(m) = max_iterations {
        cfg.max_iterations = m;
    }
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

/// A sparse Ising problem with integer couplings of a fixed bit resolution.
#[pyclass(name = "Graph", module = "sachi", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: IsingGraph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from `(i, j, J)` edges and optional self fields.
    #[new]
    #[pyo3(signature = (num_spins, resolution, edges, fields=None))]
    fn new(num_spins: usize, resolution: u32, edges: Vec<(usize, usize, i64)>, fields: Option<Vec<i64>>) -> PyResult<Self> {
        let fields = fields.unwrap_or_else(|| vec![0; num_spins]);
        let inner = IsingGraph::from_parts(num_spins, resolution, fields, edges).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// One of the built-in workloads: assets, image, tsp or molecular.
    #[staticmethod]
    #[pyo3(signature = (name, spins, resolution, seed=0))]
    fn benchmark(name: &str, spins: usize, resolution: u32, seed: u64) -> PyResult<Self> {
        let b: Benchmark = name.parse().map_err(value_err)?;
        let mut inner = b.generate(spins, resolution, seed).map_err(value_err)?;
        inner.randomize_spins(seed + 1000);
        Ok(Self { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ising::parse_graph(text).map(|inner| Self { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ising::load_graph(&path).map(|inner| Self { inner }).map_err(value_err)
    }

    fn render(&self) -> String {
        ising::render_graph(&self.inner)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        ising::store_graph(&self.inner, &path).map_err(value_err)
    }

    #[getter]
    fn num_spins(&self) -> usize {
        self.inner.num_spins()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn resolution(&self) -> u32 {
        self.inner.resolution()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    #[getter]
    fn spins(&self) -> Vec<i64> {
        self.inner.spins().iter().map(|s| s.value()).collect()
    }

    #[setter]
    fn set_spins(&mut self, spins: Vec<i64>) -> PyResult<()> {
        let spins = spins.into_iter().map(spin_of).collect::<PyResult<Vec<_>>>()?;
        self.inner.set_spins(spins).map_err(value_err)
    }

    fn randomize_spins(&mut self, seed: u64) {
        self.inner.randomize_spins(seed);
    }

    fn edges(&self) -> Vec<(usize, usize, i64)> {
        self.inner.edges().iter().map(|e| (e.i, e.j, e.weight)).collect()
    }

    /// Energy of the current spins, or of `spins` when given.
    #[pyo3(signature = (spins=None))]
    fn hamiltonian(&self, spins: Option<Vec<i64>>) -> PyResult<i64> {
        match spins {
            None => Ok(self.inner.hamiltonian()),
            Some(s) => {
                if s.len() != self.inner.num_spins() {
                    return Err(value_err(format!("expected {} spins, got {}", self.inner.num_spins(), s.len())));
                }
                let s = s.into_iter().map(spin_of).collect::<PyResult<Vec<_>>>()?;
                Ok(self.inner.hamiltonian_with(&s))
            }
        }
    }

    fn local_field(&self, i: usize) -> PyResult<i64> {
        self.inner.local_field(i).map_err(|e| PyIndexError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(num_spins={}, num_edges={}, resolution={})",
            self.inner.num_spins(),
            self.inner.num_edges(),
            self.inner.resolution()
        )
    }
}

/// Anneals with the reference solver.
#[pyfunction]
#[pyo3(signature = (graph, seed=0, init_temp=None, max_iterations=None))]
fn solve<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    seed: u64,
    init_temp: Option<f64>,
    max_iterations: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = anneal_config(&graph.inner, seed, init_temp, max_iterations)?;
    let res = ising::solve(&graph.inner, &cfg).map_err(value_err)?;
    to_py(py, &res)
}

#[derive(Serialize)]
struct ArchRun<'a> {
    result: &'a ising::SolveResult,
    iterations: &'a [arch::IterationStats],
    rounds: usize,
}

/// Anneals with local fields computed by the bit-level model of `design`.
#[pyfunction]
#[pyo3(signature = (graph, design="n3", seed=0, init_temp=None, max_iterations=None, tiles=None, tile_rows=None))]
#[allow(clippy::too_many_arguments)]
fn solve_arch<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    design: &str,
    seed: u64,
    init_temp: Option<f64>,
    max_iterations: Option<usize>,
    tiles: Option<usize>,
    tile_rows: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = anneal_config(&graph.inner, seed, init_temp, max_iterations)?;
    let d = design_of(design)?;
    let run = py.detach(|| arch::solve_arch(&graph.inner, d, arch_config(tiles, tile_rows), &cfg).map_err(value_err))?;
    to_py(py, &ArchRun { result: &run.result, iterations: &run.iterations, rounds: run.rounds })
}

/// Cycle and event counts for one local-field evaluation of the current spins.
#[pyfunction]
#[pyo3(signature = (graph, design="n3", tiles=None, tile_rows=None))]
fn analyze<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    design: &str,
    tiles: Option<usize>,
    tile_rows: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let d = design_of(design)?;
    let trace = arch::analyze(&graph.inner, d, arch_config(tiles, tile_rows)).map_err(value_err)?;
    let out = to_py(py, &trace.totals)?;
    out.set_item("reuse", trace.totals.reuse())?;
    Ok(out)
}

/// Energy and latency of one evaluation of `design`, optionally with loading.
#[pyfunction]
#[pyo3(name = "cost", signature = (graph, design="n3", with_loading=false))]
fn design_cost<'py>(py: Python<'py>, graph: &PyGraph, design: &str, with_loading: bool) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ArchConfig::default();
    let tech = TechParams::default();
    let load = cost::loading_cost(&graph.inner, &tech, cfg.storage_bytes);
    let stats = arch::analyze(&graph.inner, design_of(design)?, cfg).map_err(value_err)?.totals;
    let rep = cost::sachi_cost(&stats, &tech, with_loading.then_some(&load));
    to_py(py, &rep)
}

#[pyfunction]
fn loading_cost<'py>(py: Python<'py>, graph: &PyGraph) -> PyResult<Bound<'py, PyAny>> {
    let load = cost::loading_cost(&graph.inner, &TechParams::default(), ArchConfig::default().storage_bytes);
    to_py(py, &load)
}

/// Every design and baseline over an annealing run of `iterations`.
#[pyfunction]
#[pyo3(signature = (graph, benchmark="file", iterations=1000, sample_iterations=2, seed=0))]
fn compare<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    benchmark: &str,
    iterations: u64,
    sample_iterations: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let input = CompareInput {
        graph: &graph.inner,
        benchmark,
        iterations,
        sample_iterations,
        arch: ArchConfig::default(),
        anneal: AnnealConfig::for_graph(&graph.inner, seed),
        tech: TechParams::default(),
        baselines: BaselineParams::default(),
    };
    let rows = py.detach(|| cost::compare(&input).map_err(value_err))?;
    to_py(py, &rows)
}

/// Two's complement bits of `value` at `resolution` bits.
#[pyfunction]
fn encode_ic(value: i64, resolution: u32) -> PyResult<u32> {
    bits::encode_ic(value, resolution).map(|ic| ic.bits).map_err(value_err)
}

/// `value * spin` through the XNOR datapath.
#[pyfunction]
fn xnor_dot(value: i64, spin: i64, resolution: u32) -> PyResult<i64> {
    let ic = bits::encode_ic(value, resolution).map_err(value_err)?;
    Ok(bits::xnor_dot(ic, EncodedSpin::encode(spin_of(spin)?)))
}

#[pymodule]
fn sachi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_arch, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(design_cost, m)?)?;
    m.add_function(wrap_pyfunction!(loading_cost, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(encode_ic, m)?)?;
    m.add_function(wrap_pyfunction!(xnor_dot, m)?)?;
    m.add("DESIGNS", Design::ALL.iter().map(|d| d.name()).collect::<Vec<_>>())?;
    Ok(())
}
