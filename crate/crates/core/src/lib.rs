//! Workbench for Dynamic Preference Logic (DPL): model checking of preference
//! formulas with dynamic belief-change modalities over finite well-founded
//! preference models, built-in lexicographic revision/contraction operators,
//! and exact per-model audits of iterated-belief-change postulates and their
//! characterising axiom schemata.

pub mod equivalence;
pub mod error;
pub mod formula;
pub mod harness;
pub mod model;
pub mod operators;
pub mod postulates;
pub mod semantics;

pub use error::{DplError, Result};
pub use formula::{Formula, OperatorName};
pub use harness::{AuditConfig, AuditReport};
pub use model::{PreferenceModel, WorldSet};
pub use operators::{OperatorDefinition, OperatorRegistry};
pub use postulates::{ComplianceReport, PostulateId, SchemaId, Verdict};
pub use semantics::DynamicModel;
