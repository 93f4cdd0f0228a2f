//! Python bindings for the DPL workbench: models, formula checking,
//! belief-change operators, postulate/schema audits, and dynamic
//! equivalence, exposed as the `dpl_py` extension module.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dpl_core::equivalence::dynamic_equivalence;
use dpl_core::harness::{build_registry, run_audit, AuditConfig};
use dpl_core::model;
use dpl_core::postulates::{check_compliance, check_schema, check_world_postulate, PostulateId};
use dpl_core::semantics;
use dpl_core::{DplError, DynamicModel, PreferenceModel};

fn err(e: DplError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dynamic(m: &PreferenceModel, op: &str) -> PyResult<DynamicModel> {
    let registry = Arc::new(build_registry(&AuditConfig::default(), &[]).map_err(err)?);
    registry.get(op).map_err(err)?;
    Ok(DynamicModel::with_registry(
        m.clone(),
        op.to_string(),
        registry,
    ))
}

/// A finite well-founded preference model.
#[pyclass(frozen)]
struct Model {
    inner: PreferenceModel,
}

#[pymethods]
impl Model {
    /// Loads a model from the JSON document format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Model> {
        Ok(Model {
            inner: model::model_from_json(text).map_err(err)?,
        })
    }

    /// Loads a built-in fixture: e1, f1_identity or f1_total.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Model> {
        model::fixture(name)
            .map(|inner| Model { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown fixture `{name}`")))
    }

    fn to_json(&self) -> String {
        model::model_to_json(&self.inner)
    }

    fn worlds(&self) -> Vec<String> {
        self.inner.worlds().to_vec()
    }

    fn atoms(&self) -> Vec<String> {
        self.inner.atoms().to_vec()
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    /// The worlds satisfying a propositional formula.
    fn extension(&self, formula: &str) -> PyResult<Vec<String>> {
        let f = dpl_core::formula::parse(formula).map_err(err)?;
        let ext = self.inner.extension(&f).map_err(err)?;
        Ok(self.inner.world_names(ext))
    }

    /// Applies a belief-change operator by a propositional formula.
    fn apply(&self, op: &str, formula: &str) -> PyResult<Model> {
        let d = dynamic(&self.inner, op)?;
        let f = dpl_core::formula::parse(formula).map_err(err)?;
        Ok(Model {
            inner: d.step(&f).map_err(err)?.base,
        })
    }

    /// Truth of a formula at a world, under the given operator.
    fn satisfies(&self, op: &str, world: &str, formula: &str) -> PyResult<bool> {
        let d = dynamic(&self.inner, op)?;
        let f = dpl_core::formula::parse(formula).map_err(err)?;
        semantics::satisfies(&d, world, &f).map_err(err)
    }

    /// Validity of a formula in the model; returns (valid, countermodel world).
    fn valid(&self, op: &str, formula: &str) -> PyResult<(bool, Option<String>)> {
        let d = dynamic(&self.inner, op)?;
        let f = dpl_core::formula::parse(formula).map_err(err)?;
        semantics::valid_in_model(&d, &f).map_err(err)
    }

    /// Checks a world-level postulate or a compliance condition; world-level
    /// postulates run over every propositional extension. Returns the
    /// report as JSON.
    fn check_postulate(&self, op: &str, postulate: &str) -> PyResult<String> {
        let d = dynamic(&self.inner, op)?;
        let id: PostulateId = postulate.parse().map_err(err)?;
        let report = if id.is_compliance() {
            check_compliance(&d, id).map_err(err)?
        } else {
            let mut all: Option<dpl_core::ComplianceReport> = None;
            for (_, phi) in self.inner.propositional_extensions() {
                let r = check_world_postulate(&d, &phi, id).map_err(err)?;
                match &mut all {
                    None => all = Some(r),
                    Some(acc) => {
                        acc.checks += r.checks;
                        if !r.holds() {
                            acc.verdict = dpl_core::Verdict::Fail;
                            acc.witnesses.extend(r.witnesses);
                        }
                    }
                }
            }
            all.expect("extensions are never empty")
        };
        Ok(serde_json::to_string(&report).expect("report serialization"))
    }

    /// Checks an axiom schema; returns the report as JSON.
    fn check_schema(&self, op: &str, schema: &str) -> PyResult<String> {
        let d = dynamic(&self.inner, op)?;
        let id = schema.parse().map_err(err)?;
        let report = check_schema(&d, id, None).map_err(err)?;
        Ok(serde_json::to_string(&report).expect("report serialization"))
    }

    /// The dynamic-equivalence partition as (blocks, separator formulas).
    fn equivalence(&self, op: &str) -> PyResult<(Vec<Vec<String>>, Vec<String>)> {
        let d = dynamic(&self.inner, op)?;
        let partition = dynamic_equivalence(&d).map_err(err)?;
        let blocks = partition
            .blocks
            .iter()
            .map(|b| self.inner.world_names(*b))
            .collect();
        let separators = partition
            .separators
            .iter()
            .map(dpl_core::formula::render)
            .collect();
        Ok((blocks, separators))
    }
}

/// Parses a formula and returns its canonical rendering.
#[pyfunction]
fn parse(text: &str) -> PyResult<String> {
    let f = dpl_core::formula::parse(text).map_err(err)?;
    Ok(dpl_core::formula::render(&f))
}

/// Runs a full audit from a JSON config; returns the JSON-lines report.
#[pyfunction]
fn audit(config: &str) -> PyResult<String> {
    let cfg: AuditConfig =
        serde_json::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = run_audit(&cfg).map_err(err)?;
    Ok(report.to_json_lines())
}

#[pymodule]
fn dpl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    Ok(())
}
