//! Python bindings: string-in, string-out exact computations, so callers
//! never see floating point.

// pyfunction macro expansion trips this lint on every exported function
#![allow(clippy::useless_conversion)]

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use schrodinger::lie::{
    parse_lie_element, parse_words, verify_structure, Generator,
};
use schrodinger::localization::gamma_uea;
use schrodinger::modules::{
    classify as classify_behaviors, dense_module, nilpotency_probe, simple_quotient,
    singular_vectors, twist_by_tau, verma, SoModule, verify_verma_factorization,
};
use schrodinger::pbw::{normal_order as pbw_normal_order, UEAElement};
use schrodinger::scalar::{parse_scalar, Scalar, Tower};
use schrodinger::weyl::theta_central;
use schrodinger::Error;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tower_from(zdot: &str) -> PyResult<Arc<Tower>> {
    let v = parse_scalar(zdot, None).map_err(err)?;
    Ok(Tower::from_zdot(v.as_qi().map_err(err)?.clone()))
}

fn so_module(name: &str, n: usize) -> PyResult<SoModule> {
    match name {
        "trivial" => Ok(SoModule::trivial(n)),
        "natural" => Ok(SoModule::natural(n)),
        "so2+" if n == 2 => Ok(SoModule::so2_eigenline(1)),
        "so2-" if n == 2 => Ok(SoModule::so2_eigenline(-1)),
        other => Err(PyValueError::new_err(format!("unknown module '{}'", other))),
    }
}

/// Jacobi identity and matrix-oracle agreement for the rank-n algebra.
/// Returns (pairs_checked, triples_checked, violations).
#[pyfunction]
fn verify_axioms(n: usize) -> (usize, usize, Vec<String>) {
    let r = verify_structure(n);
    let violations = r
        .violations
        .iter()
        .map(|v| format!("{} on {}: {}", v.kind, v.generators.join(", "), v.detail))
        .collect();
    (r.pairs_checked, r.triples_checked, violations)
}

/// Bracket of two Lie elements, e.g. bracket("e", "f", 1) == "h".
#[pyfunction]
fn bracket(a: &str, b: &str, n: usize) -> PyResult<String> {
    let x = parse_lie_element(a, n, None).map_err(err)?;
    let y = parse_lie_element(b, n, None).map_err(err)?;
    Ok(x.bracket(&y).map_err(err)?.to_string())
}

/// PBW normal form of a product expression, e.g. "x(1)*y(1)".
#[pyfunction]
fn normal_order(expr: &str, n: usize) -> PyResult<String> {
    let words = parse_words(expr, n, None).map_err(err)?;
    Ok(pbw_normal_order(&words, n).to_string())
}

/// Differential operator realization of a Lie element at central charge zdot.
#[pyfunction]
fn theta(expr: &str, n: usize, zdot: &str) -> PyResult<String> {
    let tower = tower_from(zdot)?;
    let elem = parse_lie_element(expr, n, Some(&tower)).map_err(err)?;
    Ok(theta_central(&elem, &tower).to_string())
}

/// Localization twist gamma_b of a Lie element, in f-left normal form.
#[pyfunction]
fn gamma(expr: &str, b: &str, n: usize) -> PyResult<String> {
    let b = parse_scalar(b, None).map_err(err)?;
    let elem = parse_lie_element(expr, n, None).map_err(err)?;
    let mut acc = schrodinger::localization::LocalizedElement::zero(n);
    for (g, c) in elem.terms() {
        let img = gamma_uea(&UEAElement::generator(*g, n).map_err(err)?, &b).map_err(err)?;
        acc = acc.add(&img.scale(c));
    }
    Ok(acc.to_string())
}

/// Weight table of the truncated Verma module: list of (weight, offset, dim).
#[pyfunction]
#[pyo3(signature = (lambda_, n, depth, v = "trivial", zdot = "1"))]
fn verma_table(
    lambda_: &str,
    n: usize,
    depth: u32,
    v: &str,
    zdot: &str,
) -> PyResult<Vec<(String, i64, usize)>> {
    let tower = tower_from(zdot)?;
    let lambda = parse_scalar(lambda_, Some(&tower)).map_err(err)?;
    let v_mod = so_module(v, n)?;
    let m = verma(&v_mod, &lambda, &Scalar::zdot(&tower), depth);
    Ok(m.offsets()
        .iter()
        .rev()
        .map(|&d| (m.weight(d).to_string(), d, m.dim(d)))
        .collect())
}

/// Levels below the top that carry singular vectors, with coordinates.
#[pyfunction]
#[pyo3(signature = (lambda_, n, depth, v = "trivial", zdot = "1"))]
fn singular_levels(
    lambda_: &str,
    n: usize,
    depth: u32,
    v: &str,
    zdot: &str,
) -> PyResult<Vec<(u32, Vec<Vec<String>>)>> {
    let tower = tower_from(zdot)?;
    let lambda = parse_scalar(lambda_, Some(&tower)).map_err(err)?;
    let v_mod = so_module(v, n)?;
    let m = verma(&v_mod, &lambda, &Scalar::zdot(&tower), depth);
    let mut out = Vec::new();
    for k in 1..=depth {
        let vs = singular_vectors(&m, -(k as i64)).map_err(err)?;
        if !vs.is_empty() {
            out.push((
                k,
                vs.into_iter()
                    .map(|v| v.into_iter().map(|c| c.to_string()).collect())
                    .collect(),
            ));
        }
    }
    Ok(out)
}

/// One row of the character comparison: (level, verma dim, tensor dim, equal).
type CharacterRow = (u32, usize, usize, bool);

/// Verma vs tensor character rows plus the intertwiner verdict.
#[pyfunction]
#[pyo3(signature = (lambda_, n, depth, v = "trivial", zdot = "1"))]
fn character_table(
    lambda_: &str,
    n: usize,
    depth: u32,
    v: &str,
    zdot: &str,
) -> PyResult<(Vec<CharacterRow>, bool)> {
    let tower = tower_from(zdot)?;
    let lambda = parse_scalar(lambda_, Some(&tower)).map_err(err)?;
    let v_mod = so_module(v, n)?;
    let r = verify_verma_factorization(&v_mod, &lambda, &tower, depth).map_err(err)?;
    Ok((
        r.rows
            .iter()
            .map(|row| (row.level, row.verma_dim, row.tensor_dim, row.equal))
            .collect(),
        r.psi_intertwines,
    ))
}

/// Probe a module and name its family. source: "verma", "tau-twist", "dense".
#[pyfunction]
#[pyo3(signature = (source, lambda_, n, depth, k = 0, zdot = "1"))]
fn classify(
    source: &str,
    lambda_: &str,
    n: usize,
    depth: u32,
    k: u32,
    zdot: &str,
) -> PyResult<String> {
    let tower = tower_from(zdot)?;
    let lambda = parse_scalar(lambda_, Some(&tower)).map_err(err)?;
    let zd = Scalar::zdot(&tower);
    let m = match source {
        "verma" => verma(&SoModule::trivial(n), &lambda, &zd, depth),
        "tau-twist" => twist_by_tau(&verma(&SoModule::trivial(n), &lambda, &zd, depth)),
        "dense" => dense_module(k, &lambda, &tower, depth as i64).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown source '{}'", other))),
    };
    let e = nilpotency_probe(&m, Generator::E);
    let f = nilpotency_probe(&m, Generator::F);
    let label = classify_behaviors(zd.is_zero(), e, f, n).map_err(err)?;
    Ok(format!("{:?}", label))
}

/// Dimensions of the simple quotient of a Verma module, per level.
#[pyfunction]
#[pyo3(signature = (lambda_, n, depth, v = "trivial", zdot = "1"))]
fn simple_quotient_dims(
    lambda_: &str,
    n: usize,
    depth: u32,
    v: &str,
    zdot: &str,
) -> PyResult<Vec<(u32, usize)>> {
    let tower = tower_from(zdot)?;
    let lambda = parse_scalar(lambda_, Some(&tower)).map_err(err)?;
    let v_mod = so_module(v, n)?;
    let m = verma(&v_mod, &lambda, &Scalar::zdot(&tower), depth);
    let l = simple_quotient(&m).map_err(err)?;
    Ok((0..=depth).map(|k| (k, l.dim(-(k as i64)))).collect())
}

/// Check x^2 = zdot for the square-root element: parse a scalar in the
/// extension field and return its exact printed form.
#[pyfunction]
#[pyo3(signature = (expr, zdot = "1"))]
fn scalar(expr: &str, zdot: &str) -> PyResult<String> {
    let tower = tower_from(zdot)?;
    Ok(parse_scalar(expr, Some(&tower)).map_err(err)?.to_string())
}

#[pymodule]
fn schrodinger_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(verify_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(normal_order, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(verma_table, m)?)?;
    m.add_function(wrap_pyfunction!(singular_levels, m)?)?;
    m.add_function(wrap_pyfunction!(character_table, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(simple_quotient_dims, m)?)?;
    m.add_function(wrap_pyfunction!(scalar, m)?)?;
    Ok(())
}
