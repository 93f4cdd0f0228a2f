//! Model universes (exhaustive enumeration, fixtures, files, random
//! generation), random formulas for fuzzing, and the audit pipeline that
//! drives the postulate/schema checkers and renders deterministic reports.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DplError, Result};
use crate::formula::{self, Formula};
use crate::model::{
    self, enumerate_preorder_relations, PreferenceModel, Relation, WorldSet,
};
use crate::operators::{fact41_star, make_table_operator, OperatorRegistry};
use crate::postulates::{
    check_compliance, check_schema, check_world_postulate, conditional_belief_properties,
    BeliefFact, ComplianceReport, PostulateId, SchemaId, Verdict, Witness,
};
use crate::semantics::DynamicModel;

/// Cap on world counts for exhaustive enumeration.
pub const ENUMERATE_CAP: usize = 5;
/// Cap on world counts for random generation.
pub const RANDOM_CAP: usize = 8;

/// How valuations are attached to enumerated orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationScheme {
    /// Every assignment of the atoms to the worlds.
    #[default]
    All,
    /// One fixed valuation: atom `i` holds at world `j` iff bit `i` of `j`
    /// is set, giving distinct valuations where the atom count allows.
    Canonical,
}

fn world_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("w{i}")).collect()
}

/// Every preorder on `n` labeled worlds crossed with the valuation scheme.
pub fn enumerate_preorders(
    n: usize,
    atoms: &[String],
    scheme: ValuationScheme,
) -> Result<Vec<PreferenceModel>> {
    if n == 0 || n > ENUMERATE_CAP {
        return Err(DplError::TooManyWorlds {
            n,
            cap: ENUMERATE_CAP,
        });
    }
    let relations = enumerate_preorder_relations(n)?;
    let valuations: Vec<Vec<WorldSet>> = match scheme {
        ValuationScheme::Canonical => {
            vec![(0..atoms.len())
                .map(|i| {
                    WorldSet(
                        (0..n)
                            .filter(|j| (j >> i) & 1 == 1)
                            .fold(0, |m, j| m | (1 << j)),
                    )
                })
                .collect()]
        }
        ValuationScheme::All => {
            let bits = n * atoms.len();
            (0u64..(1u64 << bits))
                .map(|mask| {
                    (0..atoms.len())
                        .map(|i| {
                            WorldSet(
                                (0..n)
                                    .filter(|j| (mask >> (i * n + j)) & 1 == 1)
                                    .fold(0, |m, j| m | (1 << j)),
                            )
                        })
                        .collect()
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(relations.len() * valuations.len());
    for leq in &relations {
        for val in &valuations {
            out.push(PreferenceModel::from_parts(
                world_names(n),
                atoms.to_vec(),
                val.clone(),
                leq.clone(),
            )?);
        }
    }
    Ok(out)
}

/// Independent count of the preorders on `n` labeled points: the
/// reflexive-transitive closure of every relation, deduplicated. Every
/// preorder is its own closure, so the closure map is onto.
pub fn count_preorders_oracle(n: usize) -> Result<usize> {
    const CAP: usize = 4; // 2^(n^2) closures
    if n == 0 || n > CAP {
        return Err(DplError::TooManyWorlds { n, cap: CAP });
    }
    let mut seen: Vec<Relation> = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .collect();
    for mask in 0u32..(1u32 << (n * n)) {
        let mut r = Relation::empty(n);
        for (i, (a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                r.insert(*a, *b);
            }
        }
        let closed = r.reflexive_transitive_closure();
        if !seen.contains(&closed) {
            seen.push(closed);
        }
    }
    Ok(seen.len())
}

/// A seeded random model: random valuation plus the reflexive-transitive
/// closure of a sparse random relation. Deterministic in the seed.
pub fn random_model(n: usize, atoms: &[String], seed: u64) -> Result<PreferenceModel> {
    if n == 0 || n > RANDOM_CAP {
        return Err(DplError::TooManyWorlds { n, cap: RANDOM_CAP });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut val = vec![WorldSet::EMPTY; atoms.len()];
    for v in val.iter_mut() {
        for w in 0..n {
            if rng.random_bool(0.5) {
                v.insert(w);
            }
        }
    }
    let mut r = Relation::empty(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(1.0 / n as f64) {
                r.insert(a, b);
            }
        }
    }
    PreferenceModel::from_parts(
        world_names(n),
        atoms.to_vec(),
        val,
        r.reflexive_transitive_closure(),
    )
}

/// A random formula over the given atoms and operator names, for fuzzing
/// the evaluator and the reduction laws.
pub fn random_formula(
    atoms: &[String],
    ops: &[String],
    depth: usize,
    rng: &mut impl Rng,
) -> Formula {
    if depth == 0 || atoms.is_empty() && rng.random_bool(0.2) {
        return if atoms.is_empty() || rng.random_bool(0.1) {
            if rng.random_bool(0.5) {
                Formula::Top
            } else {
                Formula::Bot
            }
        } else {
            Formula::atom(atoms.choose(rng).unwrap().clone())
        };
    }
    macro_rules! sub {
        () => {
            random_formula(atoms, ops, depth - 1, rng)
        };
    }
    match rng.random_range(0..10u8) {
        0 => random_formula(atoms, ops, 0, rng),
        1 => Formula::not(sub!()),
        2 => Formula::and(sub!(), sub!()),
        3 => Formula::or(sub!(), sub!()),
        4 => Formula::implies(sub!(), sub!()),
        5 => Formula::box_all(sub!()),
        6 => Formula::diam_all(sub!()),
        7 => Formula::box_leq(sub!()),
        8 => Formula::box_lt(sub!()),
        _ if !ops.is_empty() => {
            let arg = random_propositional(atoms, depth - 1, rng);
            let op = ops.choose(rng).unwrap().clone();
            Formula::dynamic(op, arg, sub!()).expect("argument is propositional")
        }
        _ => Formula::diam_leq(sub!()),
    }
}

/// A random propositional formula over the given atoms.
pub fn random_propositional(atoms: &[String], depth: usize, rng: &mut impl Rng) -> Formula {
    if depth == 0 || atoms.is_empty() {
        return if atoms.is_empty() || rng.random_bool(0.1) {
            if rng.random_bool(0.5) {
                Formula::Top
            } else {
                Formula::Bot
            }
        } else {
            Formula::atom(atoms.choose(rng).unwrap().clone())
        };
    }
    match rng.random_range(0..5u8) {
        0 => random_propositional(atoms, 0, rng),
        1 => Formula::not(random_propositional(atoms, depth - 1, rng)),
        2 => Formula::and(
            random_propositional(atoms, depth - 1, rng),
            random_propositional(atoms, depth - 1, rng),
        ),
        3 => Formula::or(
            random_propositional(atoms, depth - 1, rng),
            random_propositional(atoms, depth - 1, rng),
        ),
        _ => Formula::implies(
            random_propositional(atoms, depth - 1, rng),
            random_propositional(atoms, depth - 1, rng),
        ),
    }
}

/// Exhaustive-universe specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerateSpec {
    pub worlds: usize,
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default)]
    pub scheme: ValuationScheme,
}

/// Random-universe specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomSpec {
    pub worlds: usize,
    #[serde(default)]
    pub atoms: Vec<String>,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A user-supplied table operator: loaded from a file, or seeded and closed
/// over the audit universe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableOpSpec {
    pub name: String,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A full audit request: which models, which operators, which checks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuditConfig {
    #[serde(default)]
    pub enumerate: Option<EnumerateSpec>,
    #[serde(default)]
    pub fixtures: Vec<String>,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub random: Option<RandomSpec>,
    #[serde(default)]
    pub operators: Vec<String>,
    #[serde(default)]
    pub table_operators: Vec<TableOpSpec>,
    #[serde(default)]
    pub postulates: Vec<String>,
    #[serde(default)]
    pub schemas: Vec<String>,
    #[serde(default)]
    pub facts: Vec<String>,
}

/// One report line: stable field order for golden tests.
#[derive(Debug, Clone, Serialize)]
pub struct AuditItem {
    pub check: String,
    pub model: String,
    pub phi: Option<String>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// The outcome of an audit run.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub items: Vec<AuditItem>,
    pub passed: usize,
    pub failed: usize,
    pub checks: usize,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// One JSON object per line, in input order.
    pub fn to_json_lines(&self) -> String {
        self.items
            .iter()
            .map(|item| serde_json::to_string(item).expect("report serialization"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Builds the universe requested by a config.
pub fn build_universe(cfg: &AuditConfig) -> Result<Vec<PreferenceModel>> {
    let mut universe = Vec::new();
    if let Some(spec) = &cfg.enumerate {
        universe.extend(enumerate_preorders(spec.worlds, &spec.atoms, spec.scheme)?);
    }
    for name in &cfg.fixtures {
        universe.push(
            model::fixture(name)
                .ok_or_else(|| DplError::Config(format!("unknown fixture `{name}`")))?,
        );
    }
    for path in &cfg.files {
        universe.push(model::model_from_json(&std::fs::read_to_string(path)?)?);
    }
    if let Some(spec) = &cfg.random {
        for i in 0..spec.count {
            universe.push(random_model(
                spec.worlds,
                &spec.atoms,
                spec.seed.wrapping_add(i as u64),
            )?);
        }
    }
    if universe.is_empty() {
        return Err(DplError::Config("empty universe".to_string()));
    }
    Ok(universe)
}

/// Builds the operator registry requested by a config: the builtins, the
/// two-world regression table `star`, and any user table operators.
pub fn build_registry(
    cfg: &AuditConfig,
    universe: &[PreferenceModel],
) -> Result<OperatorRegistry> {
    let mut registry = OperatorRegistry::new();
    registry.register(fact41_star());
    for spec in &cfg.table_operators {
        let def = match (&spec.path, spec.seed) {
            (Some(path), _) => crate::operators::OperatorDefinition {
                name: spec.name.clone(),
                kind: crate::operators::OperatorKind::Table(
                    crate::operators::TableOperator::from_json(&std::fs::read_to_string(
                        path,
                    )?)?,
                ),
            },
            (None, Some(seed)) => make_table_operator(&spec.name, seed, universe)?,
            (None, None) => {
                return Err(DplError::Config(format!(
                    "table operator `{}` needs a path or a seed",
                    spec.name
                )))
            }
        };
        registry.register(def);
    }
    Ok(registry)
}

/// Runs a world-level postulate over every propositional extension of the
/// model, aggregating into one report.
fn world_postulate_over_extensions(
    d: &DynamicModel,
    id: PostulateId,
) -> Result<ComplianceReport> {
    let mut all: Option<ComplianceReport> = None;
    for (_, phi) in d.base.propositional_extensions() {
        let r = check_world_postulate(d, &phi, id)?;
        match &mut all {
            None => all = Some(r),
            Some(acc) => {
                acc.checks += r.checks;
                if !r.holds() {
                    acc.verdict = Verdict::Fail;
                    acc.witnesses.extend(r.witnesses);
                }
            }
        }
    }
    Ok(all.expect("extensions are never empty"))
}

fn push_item(report: &mut AuditReport, check: String, model: &PreferenceModel, r: ComplianceReport) {
    report.checks += r.checks;
    if r.holds() {
        report.passed += 1;
    } else {
        report.failed += 1;
    }
    let witness = r.witnesses.into_iter().next();
    report.items.push(AuditItem {
        check,
        model: model.fingerprint(),
        phi: witness.as_ref().and_then(|w| w.phi.clone()),
        verdict: r.verdict,
        witness,
    });
}

/// Executes every requested check on every (operator, model) pair;
/// deterministic given the config.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    let universe = build_universe(cfg)?;
    let registry = Arc::new(build_registry(cfg, &universe)?);
    let postulates: Vec<PostulateId> = cfg
        .postulates
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let schemas: Vec<SchemaId> = cfg
        .schemas
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let facts: Vec<BeliefFact> = cfg
        .facts
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let mut ops: Vec<String> = cfg.operators.clone();
    ops.extend(cfg.table_operators.iter().map(|t| t.name.clone()));
    if ops.is_empty() {
        return Err(DplError::Config("no operators requested".to_string()));
    }
    for op in &ops {
        registry.get(op)?;
    }
    let mut report = AuditReport {
        items: Vec::new(),
        passed: 0,
        failed: 0,
        checks: 0,
    };
    for op in &ops {
        for m in &universe {
            let d = DynamicModel::with_registry(m.clone(), op.clone(), Arc::clone(&registry));
            for &id in &postulates {
                let r = if id.is_compliance() {
                    check_compliance(&d, id)?
                } else {
                    world_postulate_over_extensions(&d, id)?
                };
                push_item(&mut report, format!("{op}:postulate:{id}"), m, r);
            }
            for &id in &schemas {
                let r = check_schema(&d, id, None)?;
                push_item(&mut report, format!("{op}:schema:{id}"), m, r);
            }
            for &fact in &facts {
                let r = conditional_belief_properties(&d, fact)?;
                push_item(&mut report, format!("{op}:fact:{fact}"), m, r);
            }
        }
    }
    Ok(report)
}

/// Parses either a formula file path or formula text (used by the CLI).
pub fn parse_formula_arg(text: &str) -> Result<Formula> {
    formula::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn enumeration_counts_match_oracle() {
        for n in 1..=4 {
            let stream = enumerate_preorder_relations(n).unwrap().len();
            let oracle = count_preorders_oracle(n).unwrap();
            assert_eq!(stream, oracle);
            assert_eq!(oracle, [1, 4, 29, 355][n - 1]);
        }
    }

    #[test]
    fn enumerated_universe_sizes_and_uniqueness() {
        let models = enumerate_preorders(3, &atoms(&["p"]), ValuationScheme::All).unwrap();
        assert_eq!(models.len(), 29 * 8);
        let canon =
            enumerate_preorders(3, &atoms(&["p"]), ValuationScheme::Canonical).unwrap();
        assert_eq!(canon.len(), 29);
        let mut unique = models.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), models.len());
        assert!(enumerate_preorders(6, &[], ValuationScheme::All).is_err());
    }

    #[test]
    fn random_model_is_deterministic_and_valid() {
        let a = atoms(&["p", "q"]);
        assert_eq!(
            random_model(5, &a, 42).unwrap(),
            random_model(5, &a, 42).unwrap()
        );
        for seed in 0..200 {
            let m = random_model(5, &a, seed).unwrap();
            assert!(m.validate().is_empty());
        }
        assert!(random_model(9, &a, 0).is_err());
    }

    #[test]
    fn random_models_hit_total_and_partial_orders() {
        let a = atoms(&["p"]);
        let mut totals = 0;
        let mut partials = 0;
        for seed in 0..100 {
            if random_model(3, &a, seed).unwrap().is_total() {
                totals += 1;
            } else {
                partials += 1;
            }
        }
        assert!(totals > 0 && partials > 0, "{totals} total, {partials} partial");
    }

    #[test]
    fn random_formulas_evaluate_and_round_trip() {
        let m = model::e1();
        let d = DynamicModel::new(m, "rev");
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a = atoms(&["p", "q"]);
        let ops = vec!["rev".to_string(), "ctr".to_string()];
        for _ in 0..200 {
            let f = random_formula(&a, &ops, 4, &mut rng);
            let back = formula::parse(&formula::render(&f)).unwrap();
            assert_eq!(back, f);
            crate::semantics::satisfies(&d, "w1", &f).unwrap();
        }
    }

    #[test]
    fn audit_fixture_example() {
        // The two-world regression: `star` fails world-level DP1 while the
        // identity operator passes it.
        let cfg = AuditConfig {
            fixtures: vec!["f1_identity".to_string()],
            operators: vec!["star".to_string(), "id".to_string()],
            postulates: vec!["dp1".to_string()],
            ..AuditConfig::default()
        };
        let report = run_audit(&cfg).unwrap();
        assert_eq!(report.items.len(), 2);
        assert_eq!(report.items[0].check, "star:postulate:dp1");
        assert_eq!(report.items[0].verdict, Verdict::Fail);
        assert_eq!(report.items[1].check, "id:postulate:dp1");
        assert_eq!(report.items[1].verdict, Verdict::Pass);
        assert_eq!(report.failed, 1);
        assert_eq!(report.passed, 1);
    }

    #[test]
    fn audit_reports_are_deterministic_json_lines() {
        let cfg = AuditConfig {
            enumerate: Some(EnumerateSpec {
                worlds: 2,
                atoms: atoms(&["p"]),
                scheme: ValuationScheme::All,
            }),
            operators: vec!["rev".to_string()],
            postulates: vec!["faith".to_string(), "dp1comp".to_string()],
            schemas: vec!["faithax".to_string()],
            ..AuditConfig::default()
        };
        let a = run_audit(&cfg).unwrap().to_json_lines();
        let b = run_audit(&cfg).unwrap().to_json_lines();
        assert_eq!(a, b);
        let first: serde_json::Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
        let keys: Vec<&String> = first.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["check", "model", "phi", "verdict", "witness"]);
        assert!(run_audit(&cfg).unwrap().all_passed());
    }

    #[test]
    fn audit_rejects_bad_config() {
        let empty = AuditConfig::default();
        assert!(matches!(run_audit(&empty), Err(DplError::Config(_))));
        let cfg = AuditConfig {
            fixtures: vec!["e1".to_string()],
            operators: vec!["nope".to_string()],
            postulates: vec!["faith".to_string()],
            ..AuditConfig::default()
        };
        assert!(run_audit(&cfg).is_err());
    }

    #[test]
    fn seeded_table_operators_register() {
        let cfg = AuditConfig {
            fixtures: vec!["f1_identity".to_string()],
            table_operators: vec![TableOpSpec {
                name: "t0".to_string(),
                path: None,
                seed: Some(3),
            }],
            postulates: vec!["dp1comp".to_string()],
            ..AuditConfig::default()
        };
        let report = run_audit(&cfg).unwrap();
        assert_eq!(report.items.len(), 1);
        assert_eq!(report.items[0].check, "t0:postulate:dp1comp");
    }
}
