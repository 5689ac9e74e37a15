//! Python bindings. Results cross the boundary as plain Python values
//! (dicts, lists, numbers) decoded from the JSON form of the Rust types.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use canet_core::engagement::{
    compute_exposure, lifespan_report, summarize_engagement, timeline_bins, BinWidth,
    EngagementError,
};
use canet_core::graph::{assign_roles, build_graph, graph_stats};
use canet_core::model::{
    canonicalize_dataset, parse_dataset, validate_dataset, AttentionDataset, InputFormat,
};
use canet_core::report::{self, generate_report, write_artifacts, RunConfig};
use canet_core::textprep::{preprocess_bio as preprocess, PipelineConfig};

create_exception!(canet, CanetError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    CanetError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// `None` means defaults; a dict is read like the CLI's TOML config.
fn run_config(py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<RunConfig> {
    let Some(config) = config else {
        return Ok(RunConfig::default());
    };
    let text: String = py
        .import("json")?
        .call_method1("dumps", (config,))?
        .extract()?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(err)?;
    cfg.validate().map_err(err)?;
    Ok(cfg.effective())
}

/// Rejects datasets the CLI would reject, then canonicalizes.
fn accept(ds: AttentionDataset) -> PyResult<Dataset> {
    let fatal: Vec<String> = validate_dataset(&ds)
        .iter()
        .filter(|d| d.is_fatal())
        .map(|d| d.to_string())
        .collect();
    if !fatal.is_empty() {
        return Err(err(fatal.join("; ")));
    }
    if ds.events.is_empty() {
        return Err(err(EngagementError::EmptyDataset));
    }
    Ok(Dataset {
        inner: canonicalize_dataset(&ds),
    })
}

/// Events, profiles and the paper they concern, in canonical order.
#[pyclass(module = "canet", frozen)]
struct Dataset {
    inner: AttentionDataset,
}

#[pymethods]
impl Dataset {
    /// Reads events, optional profiles and the paper record from files.
    #[staticmethod]
    #[pyo3(signature = (events, paper, profiles=None, format="jsonl"))]
    fn load(
        events: PathBuf,
        paper: PathBuf,
        profiles: Option<PathBuf>,
        format: &str,
    ) -> PyResult<Self> {
        let format = match format {
            "jsonl" => InputFormat::Jsonl,
            "csv" => InputFormat::Csv,
            other => return Err(err(format!("unknown format `{other}`"))),
        };
        accept(parse_dataset(&events, profiles.as_deref(), &paper, format).map_err(err)?)
    }

    /// The bundled synthetic dataset.
    #[staticmethod]
    fn fixture() -> PyResult<Self> {
        accept(canet_core::fixture::load_fixture().map_err(err)?)
    }

    #[getter]
    fn n_events(&self) -> usize {
        self.inner.events.len()
    }

    #[getter]
    fn n_profiles(&self) -> usize {
        self.inner.profiles.len()
    }

    fn engagement(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &summarize_engagement(&self.inner).map_err(err)?)
    }

    fn exposure(&self) -> u64 {
        compute_exposure(&self.inner)
    }

    #[pyo3(signature = (dormancy_days=365))]
    fn lifespan(&self, py: Python<'_>, dormancy_days: u32) -> PyResult<Py<PyAny>> {
        to_py(
            py,
            &lifespan_report(&self.inner, dormancy_days).map_err(err)?,
        )
    }

    /// Event counts per `"day"`, `"week"` or `"month"`.
    #[pyo3(signature = (width="month"))]
    fn timeline(&self, py: Python<'_>, width: &str) -> PyResult<Py<PyAny>> {
        let width: BinWidth =
            serde_json::from_value(serde_json::Value::from(width)).map_err(err)?;
        to_py(py, &timeline_bins(&self.inner, width).map_err(err)?)
    }

    fn graph_stats(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &graph_stats(&build_graph(&self.inner)).map_err(err)?)
    }

    /// Node id to role name.
    fn roles(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &assign_roles(&build_graph(&self.inner)))
    }

    #[pyo3(signature = (config=None))]
    fn summary(&self, py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let cfg = run_config(py, config)?;
        to_py(
            py,
            &report::summary_section(&self.inner, &cfg).map_err(err)?,
        )
    }

    /// Interaction-graph layout: node id to `[x, y]`.
    #[pyo3(signature = (config=None))]
    fn layout(&self, py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let cfg = run_config(py, config)?;
        let (_, positions, _) = report::layout_section(&self.inner, &cfg).map_err(err)?;
        to_py(py, &positions)
    }

    #[pyo3(signature = (config=None))]
    fn term_map(&self, py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let cfg = run_config(py, config)?;
        to_py(py, &report::term_section(&self.inner, &cfg).map_err(err)?.0)
    }

    /// The full report document, as written to report.json.
    #[pyo3(signature = (config=None))]
    fn report(&self, py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let cfg = run_config(py, config)?;
        to_py(py, &generate_report(&self.inner, &cfg).map_err(err)?.0)
    }

    /// Writes every report artifact and the manifest; returns the manifest.
    #[pyo3(signature = (out_dir, config=None))]
    fn write_report(
        &self,
        py: Python<'_>,
        out_dir: PathBuf,
        config: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Py<PyAny>> {
        let cfg = run_config(py, config)?;
        let (_, artifacts) = generate_report(&self.inner, &cfg).map_err(err)?;
        to_py(
            py,
            &write_artifacts(&out_dir, "report", cfg.seed, &artifacts).map_err(err)?,
        )
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(paper={:?}, events={}, profiles={})",
            self.inner.paper.paper_id,
            self.inner.events.len(),
            self.inner.profiles.len()
        )
    }
}

/// Tokens of one profile bio after the full cleaning pipeline.
#[pyfunction]
#[pyo3(signature = (text, min_token_length=3))]
fn preprocess_bio(text: &str, min_token_length: usize) -> Vec<String> {
    let cfg = PipelineConfig {
        min_token_length,
        ..PipelineConfig::default()
    };
    preprocess(text, &cfg)
}

#[pymodule]
fn canet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CanetError", m.py().get_type::<CanetError>())?;
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(preprocess_bio, m)?)?;
    Ok(())
}
