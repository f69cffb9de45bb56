//! Python bindings. Exact values cross the boundary as strings such as
//! `"4/3"` or `"(3+1*sqrt(13))/4"`; floats are returned only by the
//! empirical estimators.

use altbase::density::{dk10_density, renyi_parry_density, solve_density_exact};
use altbase::empirics::{birkhoff_histogram, ulam_density, BirkhoffConfig};
use altbase::expansions::greedy_digits;
use altbase::maps::{compose, parse_descriptor, AltBaseSystem, PiecewiseAffineMap};
use altbase::measures::{decide_coincidence_closed_form, decide_coincidence_exact};
use altbase::orbits::{orbit_of_one, OrbitStatus};
use altbase::{Error, FieldElem};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.code()))
}

fn elem(s: &str) -> PyResult<FieldElem> {
    s.parse().map_err(py_err)
}

fn map_of(s: &str) -> PyResult<PiecewiseAffineMap> {
    if s.trim_start().starts_with("comp:") {
        parse_descriptor(s).map_err(py_err)
    } else {
        compose(&[elem(s)?]).map_err(py_err)
    }
}

fn strings(v: &[FieldElem]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Image of `x` under the map described by `map`.
#[pyfunction]
fn evaluate(map: &str, x: &str) -> PyResult<String> {
    Ok(map_of(map)?.eval(&elem(x)?).map_err(py_err)?.to_string())
}

/// Greedy digits of `x` for the periodic base sequence `bases`.
#[pyfunction]
#[pyo3(signature = (bases, x, count = 20))]
fn expand(bases: Vec<String>, x: &str, count: usize) -> PyResult<Vec<String>> {
    let bases = bases
        .iter()
        .map(|b| elem(b))
        .collect::<PyResult<Vec<_>>>()?;
    let system = AltBaseSystem::new(bases).map_err(py_err)?;
    let ds = greedy_digits(&system, &elem(x)?, count).map_err(py_err)?;
    Ok(ds.digits.iter().map(ToString::to_string).collect())
}

/// `(points, status kind)` for the orbit of 1.
#[pyfunction]
#[pyo3(signature = (map, max_iter = 10_000))]
fn orbit_of_one_points(map: &str, max_iter: usize) -> PyResult<(Vec<String>, String)> {
    let r = orbit_of_one(&map_of(map)?, max_iter).map_err(py_err)?;
    let kind = match r.status {
        OrbitStatus::Terminated => "Terminated",
        OrbitStatus::EventuallyPeriodic { .. } => "EventuallyPeriodic",
        OrbitStatus::DiagnosedInfinite { .. } => "DiagnosedInfinite",
        OrbitStatus::Truncated { .. } => "Truncated",
    };
    Ok((strings(&r.points), kind.to_string()))
}

/// `(breakpoints, values)` of the invariant density; `method` is one of
/// `solve`, `dk10`, `rp`.
#[pyfunction]
#[pyo3(signature = (map, method = "solve", max_rank = 64))]
fn density(map: &str, method: &str, max_rank: usize) -> PyResult<(Vec<String>, Vec<String>)> {
    let m = map_of(map)?;
    let f = match method {
        "solve" => solve_density_exact(&m).map_err(py_err)?,
        "dk10" => dk10_density(&m, max_rank).map_err(py_err)?.density,
        "rp" => match m.factors() {
            [beta] => renyi_parry_density(beta, max_rank).map_err(py_err)?.0,
            _ => return Err(PyValueError::new_err("rp needs a single base")),
        },
        other => return Err(PyValueError::new_err(format!("unknown method {other}"))),
    };
    Ok((strings(f.breakpoints()), strings(f.values())))
}

/// `(closed-form verdict, exact verdict or None)` for `(β, n)` against `(β', m)`.
#[pyfunction]
fn compare(beta: &str, n: u64, beta2: &str, m: u64) -> PyResult<(bool, Option<bool>)> {
    let (b1, b2) = (elem(beta)?, elem(beta2)?);
    let closed = decide_coincidence_closed_form(&b1, n, &b2, m).map_err(py_err)?;
    let exact = decide_coincidence_exact(&b1, n, &b2, m)
        .ok()
        .map(|v| v.equal);
    Ok((closed.equal, exact))
}

/// Birkhoff histogram heights.
#[pyfunction]
#[pyo3(signature = (map, iterations = 1_000_000, bins = 100, seed = 0))]
fn simulate(map: &str, iterations: u64, bins: usize, seed: u64) -> PyResult<Vec<f64>> {
    let cfg = BirkhoffConfig {
        x0: None,
        iterations,
        bins,
        burn_in: 100.min(iterations.saturating_sub(1)),
        seed,
    };
    Ok(birkhoff_histogram(&map_of(map)?, &cfg)
        .map_err(py_err)?
        .heights)
}

/// Ulam estimate of the density on `cells` uniform cells.
#[pyfunction]
#[pyo3(signature = (map, cells = 1000))]
fn ulam(map: &str, cells: usize) -> PyResult<Vec<f64>> {
    Ok(ulam_density(&map_of(map)?, cells, 100_000)
        .map_err(py_err)?
        .heights)
}

#[pymodule]
fn altbase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_of_one_points, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(ulam, m)?)?;
    Ok(())
}
