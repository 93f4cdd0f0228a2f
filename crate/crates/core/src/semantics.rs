//! Model checking for the full language, including dynamic modalities, plus
//! validity over a model and the closure of a model under iterated operator
//! application.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{DplError, Result};
use crate::formula::{Formula, OperatorName};
use crate::model::{PreferenceModel, WorldSet};
use crate::operators::OperatorRegistry;

/// A preference model paired with a distinguished operator name and the
/// registry dynamic modalities are resolved against.
#[derive(Debug, Clone)]
pub struct DynamicModel {
    pub base: PreferenceModel,
    pub op: OperatorName,
    pub registry: Arc<OperatorRegistry>,
}

impl DynamicModel {
    pub fn new(base: PreferenceModel, op: impl Into<OperatorName>) -> DynamicModel {
        DynamicModel {
            base,
            op: op.into(),
            registry: Arc::new(OperatorRegistry::new()),
        }
    }

    pub fn with_registry(
        base: PreferenceModel,
        op: impl Into<OperatorName>,
        registry: Arc<OperatorRegistry>,
    ) -> DynamicModel {
        DynamicModel {
            base,
            op: op.into(),
            registry,
        }
    }

    /// Same registry and operator, different base model.
    pub fn rebase(&self, base: PreferenceModel) -> DynamicModel {
        DynamicModel {
            base,
            op: self.op.clone(),
            registry: Arc::clone(&self.registry),
        }
    }

    /// Applies the distinguished operator with the given input.
    pub fn step(&self, phi: &Formula) -> Result<DynamicModel> {
        let next = self.registry.get(&self.op)?.apply(&self.base, phi)?;
        Ok(self.rebase(next))
    }
}

/// Extra truth assignments for reserved atoms that are unaffected by the
/// operators: names mapped directly to sets of worlds.
pub type RigidBindings = BTreeMap<String, WorldSet>;

fn eval(
    d: &DynamicModel,
    w: usize,
    f: &Formula,
    rigid: &RigidBindings,
) -> Result<bool> {
    let m = &d.base;
    Ok(match f {
        Formula::Atom(a) => match m.atom_extension(a) {
            Ok(ext) => ext.contains(w),
            Err(e) => match rigid.get(a) {
                Some(set) => set.contains(w),
                None => return Err(e),
            },
        },
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(x) => !eval(d, w, x, rigid)?,
        Formula::And(l, r) => eval(d, w, l, rigid)? && eval(d, w, r, rigid)?,
        Formula::Or(l, r) => eval(d, w, l, rigid)? || eval(d, w, r, rigid)?,
        Formula::Implies(l, r) => !eval(d, w, l, rigid)? || eval(d, w, r, rigid)?,
        Formula::Iff(l, r) => eval(d, w, l, rigid)? == eval(d, w, r, rigid)?,
        Formula::BoxAll(x) => {
            let mut all = true;
            for v in m.all_worlds().iter() {
                if !eval(d, v, x, rigid)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Formula::DiamAll(x) => {
            let mut any = false;
            for v in m.all_worlds().iter() {
                if eval(d, v, x, rigid)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Formula::BoxLeq(x) => {
            let mut all = true;
            for v in m.leq().below(w).iter() {
                if !eval(d, v, x, rigid)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Formula::DiamLeq(x) => {
            let mut any = false;
            for v in m.leq().below(w).iter() {
                if eval(d, v, x, rigid)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Formula::BoxLt(x) => {
            let mut all = true;
            for v in m.leq().strictly_below(w).iter() {
                if !eval(d, v, x, rigid)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Formula::DiamLt(x) => {
            let mut any = false;
            for v in m.leq().strictly_below(w).iter() {
                if eval(d, v, x, rigid)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Formula::Dyn(op, arg, body) => {
            let next = d.registry.get(op)?.apply(m, arg)?;
            eval(&d.rebase(next), w, body, rigid)?
        }
    })
}

/// Truth at a world.
pub fn satisfies(d: &DynamicModel, world: &str, f: &Formula) -> Result<bool> {
    let w = d.base.world_index(world)?;
    eval(d, w, f, &RigidBindings::new())
}

/// Truth at a world index, with rigid bindings for reserved atoms.
pub fn satisfies_with_bindings(
    d: &DynamicModel,
    w: usize,
    f: &Formula,
    rigid: &RigidBindings,
) -> Result<bool> {
    eval(d, w, f, rigid)
}

/// Truth in every world; on failure, the name of a falsifying world.
pub fn valid_in_model(d: &DynamicModel, f: &Formula) -> Result<(bool, Option<String>)> {
    for w in d.base.all_worlds().iter() {
        if !eval(d, w, f, &RigidBindings::new())? {
            return Ok((false, Some(d.base.world_name(w).to_string())));
        }
    }
    Ok((true, None))
}

/// Truth in every world with rigid bindings; on failure, the index of a
/// falsifying world.
pub fn valid_with_bindings(
    d: &DynamicModel,
    f: &Formula,
    rigid: &RigidBindings,
) -> Result<(bool, Option<usize>)> {
    for w in d.base.all_worlds().iter() {
        if !eval(d, w, f, rigid)? {
            return Ok((false, Some(w)));
        }
    }
    Ok((true, None))
}

/// All models reachable from the base by iterating the distinguished
/// operator over every propositionally definable input, the base first.
pub fn reachable_models(d: &DynamicModel) -> Result<Vec<PreferenceModel>> {
    Ok(reachable_with_transitions(d)?.0)
}

/// Reachable models together with the transition table: `transitions[i]`
/// maps each propositional extension (as a mask) of model `i` to the index
/// of the model the operator produces.
pub fn reachable_with_transitions(
    d: &DynamicModel,
) -> Result<(Vec<PreferenceModel>, Vec<BTreeMap<WorldSet, usize>>)> {
    let op = d.registry.get(&d.op)?;
    let extensions: Vec<WorldSet> = d
        .base
        .propositional_extensions()
        .into_iter()
        .map(|(s, _)| s)
        .collect();
    let mut models = vec![d.base.clone()];
    let mut transitions: Vec<BTreeMap<WorldSet, usize>> = Vec::new();
    let mut next = 0;
    while next < models.len() {
        if models.len() > 4096 {
            return Err(DplError::OperatorNotClosed(format!(
                "`{}` reaches more than 4096 models",
                op.name
            )));
        }
        let mut row = BTreeMap::new();
        for &ext in &extensions {
            let out = op.apply_extension(&models[next], ext)?;
            let idx = match models.iter().position(|m| *m == out) {
                Some(i) => i,
                None => {
                    models.push(out);
                    models.len() - 1
                }
            };
            row.insert(ext, idx);
        }
        transitions.push(row);
        next += 1;
    }
    Ok((models, transitions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{belief, mu, parse, Formula};
    use crate::model::{e1, f1_identity};
    use crate::operators::{fact41_star, OperatorRegistry};

    fn d_e1(op: &str) -> DynamicModel {
        DynamicModel::new(e1(), op)
    }

    #[test]
    fn static_truth_on_e1() {
        let d = d_e1("rev");
        assert!(satisfies(&d, "w1", &parse("p").unwrap()).unwrap());
        assert!(!satisfies(&d, "w2", &parse("p").unwrap()).unwrap());
        assert!(satisfies(&d, "w3", &parse("p & q").unwrap()).unwrap());
        // [leq] quantifies over predecessors: at w1 only w1.
        assert!(satisfies(&d, "w1", &parse("[leq] p").unwrap()).unwrap());
        assert!(!satisfies(&d, "w3", &parse("[leq] p").unwrap()).unwrap());
        assert!(satisfies(&d, "w3", &parse("<lt> ~p").unwrap()).unwrap());
        assert!(!satisfies(&d, "w1", &parse("<lt> T").unwrap()).unwrap());
        assert!(satisfies(&d, "w2", &parse("E q").unwrap()).unwrap());
        assert!(!satisfies(&d, "w2", &parse("A p").unwrap()).unwrap());
    }

    #[test]
    fn mu_picks_minimal_worlds() {
        let d = d_e1("rev");
        // mu p holds exactly at the most plausible p-world, w1.
        let mp = mu(parse("p").unwrap());
        assert!(satisfies(&d, "w1", &mp).unwrap());
        assert!(!satisfies(&d, "w3", &mp).unwrap());
        let mt = mu(Formula::Top);
        assert!(satisfies(&d, "w1", &mt).unwrap());
        assert!(!satisfies(&d, "w2", &mt).unwrap());
    }

    #[test]
    fn conditional_belief_on_e1() {
        let d = d_e1("rev");
        // Most plausible q-world is w3, which satisfies p.
        let b = belief(parse("p").unwrap(), parse("q").unwrap());
        let (ok, _) = valid_in_model(&d, &b).unwrap();
        assert!(ok);
        let b2 = belief(parse("q").unwrap(), Formula::Top);
        let (ok2, cex) = valid_in_model(&d, &b2).unwrap();
        assert!(!ok2);
        assert_eq!(cex.as_deref(), Some("w1"));
    }

    #[test]
    fn dynamic_revision_truth() {
        let d = d_e1("rev");
        // After revising by q, the unique minimum is w3.
        let f = parse("[rev q](A ((p & q) | <lt> T))").unwrap();
        let (ok, _) = valid_in_model(&d, &f).unwrap();
        assert!(ok);
        let after = mu(Formula::Top);
        let g = Formula::dynamic("rev".to_string(), parse("q").unwrap(), after).unwrap();
        assert!(satisfies(&d, "w3", &g).unwrap());
        assert!(!satisfies(&d, "w1", &g).unwrap());
    }

    #[test]
    fn dynamic_contraction_truth() {
        let d = d_e1("ctr");
        // After contracting by p, w1 and w2 tie at the bottom.
        let g = Formula::dynamic("ctr".to_string(), parse("p").unwrap(), mu(Formula::Top))
            .unwrap();
        assert!(satisfies(&d, "w1", &g).unwrap());
        assert!(satisfies(&d, "w2", &g).unwrap());
        assert!(!satisfies(&d, "w3", &g).unwrap());
    }

    #[test]
    fn nested_dynamics() {
        let d = d_e1("rev");
        let f = parse("[rev q][rev p](A ((p & q) | <lt> T))").unwrap();
        // Revising by q then p keeps w3 as the unique minimum: it is already
        // the most plausible p-world after the first revision.
        let (ok, cex) = valid_in_model(&d, &f).unwrap();
        assert!(ok, "counterexample {cex:?}");
    }

    #[test]
    fn rigid_bindings_resolve_reserved_atoms() {
        let d = d_e1("rev");
        let mut rigid = RigidBindings::new();
        rigid.insert("_xi".to_string(), WorldSet::singleton(1));
        let f = parse("_xi").unwrap();
        assert!(satisfies_with_bindings(&d, 1, &f, &rigid).unwrap());
        assert!(!satisfies_with_bindings(&d, 0, &f, &rigid).unwrap());
        // Rigid atoms survive dynamic modalities unchanged.
        let g = parse("[rev q] _xi").unwrap();
        assert!(satisfies_with_bindings(&d, 1, &g, &rigid).unwrap());
        // Unknown atoms without a binding still error.
        assert!(satisfies(&d, "w1", &parse("_xi").unwrap()).is_err());
    }

    #[test]
    fn reachability_of_star_table() {
        let mut reg = OperatorRegistry::new();
        reg.register(fact41_star());
        let d = DynamicModel::with_registry(f1_identity(), "star", Arc::new(reg));
        let (models, transitions) = reachable_with_transitions(&d).unwrap();
        assert_eq!(models.len(), 2);
        // Full extension maps identity order to total order, then fixes it.
        let full = models[0].all_worlds();
        assert_eq!(transitions[0][&full], 1);
        assert_eq!(transitions[1][&full], 1);
        assert_eq!(transitions[0][&WorldSet::EMPTY], 0);
    }

    #[test]
    fn reachability_of_identity_is_singleton() {
        let d = d_e1("id");
        assert_eq!(reachable_models(&d).unwrap().len(), 1);
    }

    #[test]
    fn reachability_of_revision_on_e1() {
        let d = d_e1("rev");
        let models = reachable_models(&d).unwrap();
        assert_eq!(models[0], e1());
        // Three singleton valuation classes: at most 13 weak orders over
        // them, and revision keeps per-zone order, so the set stays small.
        assert!(models.len() <= 13, "got {}", models.len());
        for m in &models {
            assert!(m.validate().is_empty());
        }
    }
}
