//! Belief-change operators: lexicographic revision and contraction, the
//! identity operator, and finite user-defined table operators, together with
//! the registry the evaluator resolves operator names against.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DplError, Result};
use crate::formula::Formula;
use crate::model::{
    enumerate_preorder_relations, PreferenceModel, Relation, WorldSet,
};

/// Lexicographic revision: inside each of the two zones the old order is
/// kept, and every world satisfying the input becomes strictly more
/// plausible than every world falsifying it.
pub fn lex_revise(m: &PreferenceModel, ext: WorldSet) -> PreferenceModel {
    let n = m.n();
    let mut leq = Relation::empty(n);
    for b in 0..n {
        for a in 0..n {
            let same_zone = ext.contains(a) == ext.contains(b);
            let promoted = ext.contains(a) && !ext.contains(b);
            if (same_zone && m.leq().holds(a, b)) || promoted {
                leq.insert(a, b);
            }
        }
    }
    m.with_relation(leq)
        .expect("lexicographic revision preserves the preorder laws")
}

/// Lexicographic contraction: worlds are re-ranked by their implausibility
/// degree within their own zone (the input's extension or its complement),
/// yielding a total preorder.
pub fn lex_contract(m: &PreferenceModel, ext: WorldSet) -> PreferenceModel {
    let n = m.n();
    let degree: Vec<usize> = (0..n)
        .map(|w| {
            let zone = if ext.contains(w) {
                ext
            } else {
                ext.complement(n)
            };
            m.implausibility_degree(zone, w)
                .expect("world lies in its own zone")
        })
        .collect();
    let mut leq = Relation::empty(n);
    for b in 0..n {
        for a in 0..n {
            if degree[a] <= degree[b] {
                leq.insert(a, b);
            }
        }
    }
    m.with_relation(leq)
        .expect("degree ranking is a total preorder")
}

/// A finitely specified operator: a lookup table from (order, extension)
/// inputs to output orders. Inputs not listed are left unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableOperator {
    entries: BTreeMap<(Vec<(String, String)>, Vec<String>), Vec<(String, String)>>,
}

#[derive(Serialize, Deserialize)]
struct TableEntryFile {
    model: Vec<(String, String)>,
    extension: Vec<String>,
    output: Vec<(String, String)>,
}

impl TableOperator {
    pub fn new() -> TableOperator {
        TableOperator::default()
    }

    fn key(m: &PreferenceModel, ext: WorldSet) -> (Vec<(String, String)>, Vec<String>) {
        let pairs = m
            .leq()
            .pairs()
            .into_iter()
            .map(|(a, b)| (m.world_name(a).to_string(), m.world_name(b).to_string()))
            .collect();
        let mut names = m.world_names(ext);
        names.sort();
        (pairs, names)
    }

    /// Registers one table row.
    pub fn insert(&mut self, m: &PreferenceModel, ext: WorldSet, output: &Relation) {
        let out = output
            .pairs()
            .into_iter()
            .map(|(a, b)| (m.world_name(a).to_string(), m.world_name(b).to_string()))
            .collect();
        self.entries.insert(TableOperator::key(m, ext), out);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up the output order for the given input, if listed.
    pub fn output(&self, m: &PreferenceModel, ext: WorldSet) -> Result<Option<Relation>> {
        let Some(out) = self.entries.get(&TableOperator::key(m, ext)) else {
            return Ok(None);
        };
        let mut leq = Relation::empty(m.n());
        for (a, b) in out {
            leq.insert(m.world_index(a)?, m.world_index(b)?);
        }
        Ok(Some(leq))
    }

    pub fn from_json(text: &str) -> Result<TableOperator> {
        let rows: Vec<TableEntryFile> = serde_json::from_str(text)?;
        let mut table = TableOperator::new();
        for mut row in rows {
            row.model.sort();
            row.extension.sort();
            table
                .entries
                .insert((row.model, row.extension), row.output);
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<TableEntryFile> = self
            .entries
            .iter()
            .map(|((model, extension), output)| TableEntryFile {
                model: model.clone(),
                extension: extension.clone(),
                output: output.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table serialization cannot fail")
    }
}

/// How an operator transforms the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorKind {
    Revision,
    Contraction,
    Identity,
    Table(TableOperator),
}

/// A named belief-change operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorDefinition {
    pub name: String,
    pub kind: OperatorKind,
}

impl OperatorDefinition {
    /// Applies the operator to a model, given the input's extension. The
    /// valuation and carrier are untouched; only the order changes. Table
    /// outputs are checked to be preorders.
    pub fn apply_extension(
        &self,
        m: &PreferenceModel,
        ext: WorldSet,
    ) -> Result<PreferenceModel> {
        match &self.kind {
            OperatorKind::Revision => Ok(lex_revise(m, ext)),
            OperatorKind::Contraction => Ok(lex_contract(m, ext)),
            OperatorKind::Identity => Ok(m.clone()),
            OperatorKind::Table(table) => match table.output(m, ext)? {
                None => Ok(m.clone()),
                Some(leq) => m.with_relation(leq).map_err(|e| {
                    DplError::OperatorNotClosed(format!(
                        "table output for `{}` is not a preorder: {e}",
                        self.name
                    ))
                }),
            },
        }
    }

    /// Applies the operator to a model with a propositional input formula.
    pub fn apply(&self, m: &PreferenceModel, phi: &Formula) -> Result<PreferenceModel> {
        self.apply_extension(m, m.extension(phi)?)
    }
}

/// Applies a registered operator by name.
pub fn apply(
    registry: &OperatorRegistry,
    op: &str,
    m: &PreferenceModel,
    phi: &Formula,
) -> Result<PreferenceModel> {
    registry.get(op)?.apply(m, phi)
}

/// Name-to-definition map; `rev`, `ctr` and `id` are always present.
#[derive(Debug, Clone)]
pub struct OperatorRegistry {
    ops: BTreeMap<String, OperatorDefinition>,
}

impl Default for OperatorRegistry {
    fn default() -> OperatorRegistry {
        OperatorRegistry::new()
    }
}

impl OperatorRegistry {
    pub fn new() -> OperatorRegistry {
        let mut ops = BTreeMap::new();
        for (name, kind) in [
            ("rev", OperatorKind::Revision),
            ("ctr", OperatorKind::Contraction),
            ("id", OperatorKind::Identity),
        ] {
            ops.insert(
                name.to_string(),
                OperatorDefinition {
                    name: name.to_string(),
                    kind,
                },
            );
        }
        OperatorRegistry { ops }
    }

    pub fn register(&mut self, def: OperatorDefinition) {
        self.ops.insert(def.name.clone(), def);
    }

    pub fn get(&self, name: &str) -> Result<&OperatorDefinition> {
        self.ops
            .get(name)
            .ok_or_else(|| DplError::UnknownOperator(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.ops.keys().cloned().collect()
    }
}

/// Builds a deterministic random table operator closed over every model
/// reachable from `universe`: each (order, extension) pair reachable by
/// iterated application gets an output order drawn from the enumerated
/// preorders on the same carrier.
pub fn make_table_operator(
    name: &str,
    seed: u64,
    universe: &[PreferenceModel],
) -> Result<OperatorDefinition> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut table = TableOperator::new();
    let mut queue: Vec<PreferenceModel> = universe.to_vec();
    let mut seen: Vec<PreferenceModel> = Vec::new();
    let mut relations: BTreeMap<usize, Vec<Relation>> = BTreeMap::new();
    while let Some(m) = queue.pop() {
        if seen.contains(&m) {
            continue;
        }
        let choices = match relations.get(&m.n()) {
            Some(r) => r.clone(),
            None => {
                let r = enumerate_preorder_relations(m.n())?;
                relations.insert(m.n(), r.clone());
                r
            }
        };
        for (ext, _) in m.propositional_extensions() {
            let leq = choices
                .choose(&mut rng)
                .expect("preorder enumeration is never empty")
                .clone();
            table.insert(&m, ext, &leq);
            queue.push(m.with_relation(leq)?);
        }
        seen.push(m);
    }
    Ok(OperatorDefinition {
        name: name.to_string(),
        kind: OperatorKind::Table(table),
    })
}

/// The two-world table operator `star` used in the regression tests: on the
/// identity order with the full extension it returns the total order, and is
/// the identity everywhere else.
pub fn fact41_star() -> OperatorDefinition {
    let m = crate::model::f1_identity();
    let mut table = TableOperator::new();
    table.insert(&m, m.all_worlds(), &Relation::total(2));
    // Keep the table closed: the total order maps to itself.
    let total = m.with_relation(Relation::total(2)).unwrap();
    table.insert(&total, total.all_worlds(), &Relation::total(2));
    for model in [&m, &total] {
        table.insert(model, WorldSet::EMPTY, model.leq());
    }
    OperatorDefinition {
        name: "star".to_string(),
        kind: OperatorKind::Table(table),
    }
}
