//! Python bindings. Elements are numbered from 1 on the Python side, as in
//! the loop file format; element 1 is the identity.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use moufang::autiso;
use moufang::cocycles::build_spaces;
use moufang::codeloops::{self, PolarTriple};
use moufang::extend::{central_extension, ExtensionSpec};
use moufang::loopcore::{validate_loop, LoopTable};
use moufang::pipeline::{self, LoopDatabase, LoopEntry, Mode, RunConfig, Verdict};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite loop given by its multiplication table.
#[pyclass(name = "LoopTable", module = "pymoufang", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyLoop {
    inner: LoopTable,
}

#[pymethods]
impl PyLoop {
    /// Builds a loop from rows of 1-based entries with 1 as the identity.
    #[new]
    fn new(rows: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyLoop { inner: validate_loop(&rows).map_err(err)? })
    }

    #[staticmethod]
    fn cyclic(n: usize) -> PyResult<Self> {
        if n == 0 || n > moufang::loopcore::MAX_ORDER {
            return Err(PyValueError::new_err("order out of range"));
        }
        Ok(PyLoop { inner: LoopTable::cyclic(n) })
    }

    #[staticmethod]
    fn elementary_abelian(p: usize, d: u32) -> PyResult<Self> {
        match p.checked_pow(d) {
            Some(n) if p >= 2 && n <= moufang::loopcore::MAX_ORDER => {
                Ok(PyLoop { inner: LoopTable::elementary_abelian(p, d) })
            }
            _ => Err(PyValueError::new_err("order out of range")),
        }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn __len__(&self) -> usize {
        self.inner.order()
    }

    fn __repr__(&self) -> String {
        format!("LoopTable(order={})", self.inner.order())
    }

    /// The product `x·y` of 1-based elements.
    fn mul(&self, x: usize, y: usize) -> PyResult<usize> {
        let n = self.inner.order();
        if x == 0 || y == 0 || x > n || y > n {
            return Err(PyValueError::new_err("element out of range"));
        }
        Ok(self.inner.mul(x - 1, y - 1) + 1)
    }

    fn rows(&self) -> Vec<Vec<usize>> {
        self.inner.rows_one_based()
    }

    fn is_moufang(&self) -> bool {
        self.inner.is_moufang()
    }

    fn is_associative(&self) -> bool {
        self.inner.is_associative()
    }

    fn is_commutative(&self) -> bool {
        self.inner.is_commutative()
    }

    fn center(&self) -> Vec<usize> {
        self.inner.center().iter().map(|x| x + 1).collect()
    }

    fn element_orders(&self) -> PyResult<Vec<usize>> {
        self.inner.element_orders().map_err(err)
    }

    fn min_generators(&self) -> usize {
        self.inner.min_generators()
    }

    fn direct_product(&self, other: &PyLoop) -> PyResult<PyLoop> {
        if self.inner.order() * other.inner.order() > moufang::loopcore::MAX_ORDER {
            return Err(PyValueError::new_err("product is too large"));
        }
        Ok(PyLoop { inner: self.inner.direct_product(&other.inner) })
    }

    fn automorphism_group_order(&self) -> u128 {
        autiso::automorphism_group(&self.inner).order()
    }

    /// `(dim Mcoc, dim Cob, dim Comp)` over GF(p).
    fn cocycle_dims(&self, p: u8) -> PyResult<(usize, usize, usize)> {
        let s = build_spaces(&self.inner, p).map_err(err)?;
        Ok((s.mcoc.dim(), s.cob.dim(), s.comp.dim()))
    }

    /// One central extension by GF(p) per representative cocycle.
    #[pyo3(signature = (p, budget = 1 << 20))]
    fn central_extensions(&self, p: u8, budget: u128) -> PyResult<Vec<PyLoop>> {
        let k = &self.inner;
        if k.order() * p as usize > moufang::loopcore::MAX_ORDER {
            return Err(PyValueError::new_err("extensions are too large"));
        }
        let s = build_spaces(k, p).map_err(err)?;
        let aut = autiso::automorphism_group(k);
        autiso::representative_cocycles(k, &s, &aut, budget)
            .map_err(err)?
            .into_iter()
            .map(|f| {
                let spec = ExtensionSpec::new(k.clone(), p, f).map_err(err)?;
                Ok(PyLoop { inner: central_extension(&spec).map_err(err)? })
            })
            .collect()
    }
}

/// An isomorphism as a list of 1-based images, or None.
#[pyfunction]
fn are_isomorphic(a: &PyLoop, b: &PyLoop) -> Option<Vec<usize>> {
    autiso::are_isomorphic(&a.inner, &b.inner).map(|phi| phi.iter().map(|x| x + 1).collect())
}

#[pyfunction]
fn are_isotopic(a: &PyLoop, b: &PyLoop) -> bool {
    autiso::are_isotopic(&a.inner, &b.inner)
}

/// Inequivalent code-loop triples over GF(2)^d, in text form.
#[pyfunction]
fn code_triples(d: usize) -> PyResult<Vec<String>> {
    Ok(codeloops::triple_orbit_representatives(d).map_err(err)?.iter().map(|t| t.to_string()).collect())
}

#[pyfunction]
fn realize_code_loop(triple: &str) -> PyResult<PyLoop> {
    let t: PolarTriple = triple.parse().map_err(err)?;
    Ok(PyLoop { inner: codeloops::realize_code_loop(&t).map_err(err)? })
}

/// One of "all-associative", "nonassociative-exists", "unknown".
#[pyfunction]
fn order_filter(n: u64) -> PyResult<&'static str> {
    if n == 0 {
        return Err(PyValueError::new_err("order must be positive"));
    }
    Ok(match pipeline::order_filter(n) {
        Verdict::AllAssociative => "all-associative",
        Verdict::NonassociativeExists => "nonassociative-exists",
        Verdict::Unknown => "unknown",
    })
}

fn to_pairs(db: LoopDatabase) -> Vec<(String, PyLoop)> {
    db.into_entries().into_iter().map(|e| (e.name, PyLoop { inner: e.table })).collect()
}

fn to_database(loops: Vec<(String, PyLoop)>) -> PyResult<LoopDatabase> {
    let entries = loops
        .into_iter()
        .map(|(name, q)| LoopEntry::new(name, q.inner, "").map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    LoopDatabase::from_entries(entries).map_err(err)
}

#[pyfunction]
fn read_loops(path: &str) -> PyResult<Vec<(String, PyLoop)>> {
    Ok(to_pairs(pipeline::read_loops_file(path).map_err(err)?))
}

#[pyfunction]
fn write_loops(path: &str, loops: Vec<(String, PyLoop)>) -> PyResult<()> {
    pipeline::write_loops_file(&to_database(loops)?, path).map_err(err)
}

/// All Moufang loops of orders p, ..., p^upto, one list per order.
#[pyfunction]
fn bootstrap(py: Python<'_>, p: u8, upto: u32) -> PyResult<Vec<Vec<(String, PyLoop)>>> {
    let cfg = RunConfig::new(p, Mode::AllLoops).map_err(err)?;
    let runs = py.detach(|| pipeline::bootstrap(&cfg, upto)).map_err(err)?;
    Ok(runs.into_iter().map(|e| to_pairs(e.database)).collect())
}

/// Central extensions of the given bases up to isomorphism.
#[pyfunction]
#[pyo3(signature = (bases, p, nonassociative_only = false))]
fn enumerate(py: Python<'_>, bases: Vec<(String, PyLoop)>, p: u8, nonassociative_only: bool) -> PyResult<Vec<(String, PyLoop)>> {
    let mode = if nonassociative_only { Mode::NonassociativeOnly } else { Mode::AllLoops };
    let cfg = RunConfig::new(p, mode).map_err(err)?;
    let db = to_database(bases)?;
    let e = py.detach(|| pipeline::enumerate_order(&db, &cfg)).map_err(err)?;
    Ok(to_pairs(e.database))
}

#[pymodule]
fn pymoufang(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLoop>()?;
    m.add_function(wrap_pyfunction!(are_isomorphic, m)?)?;
    m.add_function(wrap_pyfunction!(are_isotopic, m)?)?;
    m.add_function(wrap_pyfunction!(code_triples, m)?)?;
    m.add_function(wrap_pyfunction!(realize_code_loop, m)?)?;
    m.add_function(wrap_pyfunction!(order_filter, m)?)?;
    m.add_function(wrap_pyfunction!(read_loops, m)?)?;
    m.add_function(wrap_pyfunction!(write_loops, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    Ok(())
}
