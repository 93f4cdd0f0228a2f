//! Finite well-founded preference models: validation, order utilities,
//! propositional extensions, implausibility degrees, JSON loading and the
//! named fixtures used throughout the test suite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DplError, Result};
use crate::formula::{self, Formula};

/// Hard cap on world counts; sets are stored as single-word bit masks.
pub const MAX_WORLDS: usize = 32;

/// A subset of the worlds of a model, as a bit mask over world indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WorldSet(pub u32);

impl WorldSet {
    pub const EMPTY: WorldSet = WorldSet(0);

    pub fn singleton(w: usize) -> WorldSet {
        WorldSet(1 << w)
    }

    pub fn full(n: usize) -> WorldSet {
        if n == 32 {
            WorldSet(u32::MAX)
        } else {
            WorldSet((1u32 << n) - 1)
        }
    }

    pub fn contains(self, w: usize) -> bool {
        self.0 & (1 << w) != 0
    }

    pub fn insert(&mut self, w: usize) {
        self.0 |= 1 << w;
    }

    pub fn union(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 | other.0)
    }

    pub fn intersect(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & other.0)
    }

    pub fn minus(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> WorldSet {
        WorldSet(!self.0).intersect(WorldSet::full(n))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: WorldSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |w| self.contains(*w))
    }
}

/// A binary relation over world indices, stored as per-world predecessor
/// masks: `below[w]` is the set of `v` with `v R w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: usize,
    below: Vec<u32>,
}

impl Relation {
    pub fn empty(n: usize) -> Relation {
        Relation {
            n,
            below: vec![0; n],
        }
    }

    pub fn identity(n: usize) -> Relation {
        let mut r = Relation::empty(n);
        for w in 0..n {
            r.insert(w, w);
        }
        r
    }

    pub fn total(n: usize) -> Relation {
        Relation {
            n,
            below: vec![WorldSet::full(n).0; n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `a R b`.
    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.below[b] & (1 << a) != 0
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.below[b] |= 1 << a;
    }

    /// Predecessors of `w`: all `v` with `v R w`.
    pub fn below(&self, w: usize) -> WorldSet {
        WorldSet(self.below[w])
    }

    /// Strict predecessors of `w`: all `v` with `v R w` and not `w R v`.
    pub fn strictly_below(&self, w: usize) -> WorldSet {
        WorldSet(
            self.below(w)
                .iter()
                .filter(|&v| !self.holds(w, v))
                .fold(0, |m, v| m | (1 << v)),
        )
    }

    /// The strict part as a relation.
    pub fn strict(&self) -> Relation {
        Relation {
            n: self.n,
            below: (0..self.n).map(|w| self.strictly_below(w).0).collect(),
        }
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|w| self.holds(w, w))
    }

    pub fn is_transitive(&self) -> bool {
        // a R b and b R c imply a R c: below(c) must absorb below(b) for b R c.
        (0..self.n).all(|c| self.below(c).iter().all(|b| self.below(b).is_subset(self.below(c))))
    }

    pub fn is_preorder(&self) -> bool {
        self.is_reflexive() && self.is_transitive()
    }

    /// Totality: any two worlds are comparable.
    pub fn is_total(&self) -> bool {
        (0..self.n).all(|a| (a + 1..self.n).all(|b| self.holds(a, b) || self.holds(b, a)))
    }

    /// Reflexive-transitive closure.
    pub fn reflexive_transitive_closure(&self) -> Relation {
        let mut r = self.clone();
        for w in 0..r.n {
            r.insert(w, w);
        }
        loop {
            let mut changed = false;
            for c in 0..r.n {
                let mut acc = r.below[c];
                for b in r.below(c).iter() {
                    acc |= r.below[b];
                }
                if acc != r.below[c] {
                    r.below[c] = acc;
                    changed = true;
                }
            }
            if !changed {
                return r;
            }
        }
    }

    /// Ordered pairs `(a, b)` with `a R b`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.n {
            for a in self.below(b).iter() {
                out.push((a, b));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Enumerates every preorder (reflexive-transitive relation) on `n` labeled
/// points, in a deterministic order.
pub fn enumerate_preorder_relations(n: usize) -> Result<Vec<Relation>> {
    const CAP: usize = 5;
    if n == 0 || n > CAP {
        return Err(DplError::TooManyWorlds { n, cap: CAP });
    }
    let off_diag: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << off_diag.len()) {
        let mut r = Relation::identity(n);
        for (i, (a, b)) in off_diag.iter().enumerate() {
            if mask & (1 << i) != 0 {
                r.insert(*a, *b);
            }
        }
        if r.is_transitive() {
            out.push(r);
        }
    }
    Ok(out)
}

/// A finite well-founded preference model: worlds with a fixed iteration
/// order, a reflexive-transitive plausibility preorder (lower = more
/// plausible) and a propositional valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceModel {
    worlds: Vec<String>,
    atoms: Vec<String>,
    /// Per-atom extension, indexed like `atoms`.
    valuation: Vec<WorldSet>,
    leq: Relation,
}

impl PreferenceModel {
    /// Builds and validates a model from named parts.
    pub fn new(
        worlds: Vec<String>,
        atoms: Vec<String>,
        valuation: &BTreeMap<String, Vec<String>>,
        leq_pairs: &[(String, String)],
    ) -> Result<PreferenceModel> {
        let m = PreferenceModel::new_unchecked(worlds, atoms, valuation, leq_pairs)?;
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(DplError::InvalidModel(violations))
        }
    }

    /// Builds a model without checking the preorder laws; `validate` reports
    /// all violations as data.
    pub fn new_unchecked(
        worlds: Vec<String>,
        atoms: Vec<String>,
        valuation: &BTreeMap<String, Vec<String>>,
        leq_pairs: &[(String, String)],
    ) -> Result<PreferenceModel> {
        let n = worlds.len();
        if n == 0 || n > MAX_WORLDS {
            return Err(DplError::TooManyWorlds {
                n,
                cap: MAX_WORLDS,
            });
        }
        let index = |name: &str| -> Result<usize> {
            worlds
                .iter()
                .position(|w| w == name)
                .ok_or_else(|| DplError::UnknownWorld(name.to_string()))
        };
        let mut val = vec![WorldSet::EMPTY; atoms.len()];
        for (atom, members) in valuation {
            let Some(ai) = atoms.iter().position(|a| a == atom) else {
                return Err(DplError::UnknownAtom(atom.clone()));
            };
            for w in members {
                val[ai].insert(index(w)?);
            }
        }
        let mut leq = Relation::empty(n);
        for (a, b) in leq_pairs {
            leq.insert(index(a)?, index(b)?);
        }
        Ok(PreferenceModel {
            worlds,
            atoms,
            valuation: val,
            leq,
        })
    }

    /// Assembles a model from already-indexed parts (internal constructor).
    pub fn from_parts(
        worlds: Vec<String>,
        atoms: Vec<String>,
        valuation: Vec<WorldSet>,
        leq: Relation,
    ) -> Result<PreferenceModel> {
        assert_eq!(valuation.len(), atoms.len());
        assert_eq!(leq.size(), worlds.len());
        let m = PreferenceModel {
            worlds,
            atoms,
            valuation,
            leq,
        };
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(DplError::InvalidModel(violations))
        }
    }

    /// Same worlds/valuation, different order. Errors if the relation is not
    /// a preorder.
    pub fn with_relation(&self, leq: Relation) -> Result<PreferenceModel> {
        PreferenceModel::from_parts(
            self.worlds.clone(),
            self.atoms.clone(),
            self.valuation.clone(),
            leq,
        )
    }

    pub fn n(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn leq(&self) -> &Relation {
        &self.leq
    }

    pub fn all_worlds(&self) -> WorldSet {
        WorldSet::full(self.n())
    }

    pub fn world_index(&self, name: &str) -> Result<usize> {
        self.worlds
            .iter()
            .position(|w| w == name)
            .ok_or_else(|| DplError::UnknownWorld(name.to_string()))
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    pub fn world_names(&self, s: WorldSet) -> Vec<String> {
        s.iter().map(|w| self.worlds[w].clone()).collect()
    }

    pub fn atom_extension(&self, atom: &str) -> Result<WorldSet> {
        self.atoms
            .iter()
            .position(|a| a == atom)
            .map(|i| self.valuation[i])
            .ok_or_else(|| DplError::UnknownAtom(atom.to_string()))
    }

    /// Checks the preorder laws, reporting every violation.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for w in 0..self.n() {
            if !self.leq.holds(w, w) {
                out.push(format!("irreflexive at {}", self.worlds[w]));
            }
        }
        for (a, b) in self.leq.pairs() {
            for c in 0..self.n() {
                if self.leq.holds(b, c) && !self.leq.holds(a, c) {
                    out.push(format!(
                        "non-transitive ({},{},{})",
                        self.worlds[a], self.worlds[b], self.worlds[c]
                    ));
                }
            }
        }
        out
    }

    /// The strict part of the preorder.
    pub fn strict(&self) -> Relation {
        self.leq.strict()
    }

    pub fn is_total(&self) -> bool {
        self.leq.is_total()
    }

    /// Minimal (most plausible) elements of `s`.
    pub fn min_worlds(&self, s: WorldSet) -> WorldSet {
        WorldSet(
            s.iter()
                .filter(|&w| self.leq.strictly_below(w).intersect(s).is_empty())
                .fold(0, |m, w| m | (1 << w)),
        )
    }

    /// Truth-table extension of a propositional formula.
    pub fn extension(&self, f: &Formula) -> Result<WorldSet> {
        if !formula::is_propositional(f) {
            return Err(DplError::NotPropositional(formula::render(f)));
        }
        self.extension_unchecked(f)
    }

    fn extension_unchecked(&self, f: &Formula) -> Result<WorldSet> {
        Ok(match f {
            Formula::Atom(a) => self.atom_extension(a)?,
            Formula::Top => self.all_worlds(),
            Formula::Bot => WorldSet::EMPTY,
            Formula::Not(x) => self.extension_unchecked(x)?.complement(self.n()),
            Formula::And(l, r) => self
                .extension_unchecked(l)?
                .intersect(self.extension_unchecked(r)?),
            Formula::Or(l, r) => self
                .extension_unchecked(l)?
                .union(self.extension_unchecked(r)?),
            Formula::Implies(l, r) => self
                .extension_unchecked(l)?
                .complement(self.n())
                .union(self.extension_unchecked(r)?),
            Formula::Iff(l, r) => {
                let le = self.extension_unchecked(l)?;
                let re = self.extension_unchecked(r)?;
                WorldSet(!(le.0 ^ re.0)).intersect(self.all_worlds())
            }
            _ => return Err(DplError::NotPropositional(formula::render(f))),
        })
    }

    /// Valuation-equivalence classes of worlds, ordered by least member.
    pub fn valuation_classes(&self) -> Vec<WorldSet> {
        let mut classes: Vec<(Vec<bool>, WorldSet)> = Vec::new();
        for w in 0..self.n() {
            let key: Vec<bool> = self.valuation.iter().map(|v| v.contains(w)).collect();
            if let Some((_, c)) = classes.iter_mut().find(|(k, _)| *k == key) {
                c.insert(w);
            } else {
                let mut c = WorldSet::EMPTY;
                c.insert(w);
                classes.push((key, c));
            }
        }
        classes.into_iter().map(|(_, c)| c).collect()
    }

    /// Complete conjunction of literals describing the valuation of `w`.
    fn world_description(&self, w: usize) -> Formula {
        if self.atoms.is_empty() {
            return Formula::Top;
        }
        Formula::conj(
            self.atoms
                .iter()
                .zip(&self.valuation)
                .map(|(a, v)| {
                    if v.contains(w) {
                        Formula::atom(a.clone())
                    } else {
                        Formula::not(Formula::atom(a.clone()))
                    }
                })
                .collect(),
        )
    }

    /// Every propositionally definable subset of worlds — all unions of
    /// valuation classes — each with a full-DNF witness formula.
    pub fn propositional_extensions(&self) -> Vec<(WorldSet, Formula)> {
        let classes = self.valuation_classes();
        let witnesses: Vec<Formula> = classes
            .iter()
            .map(|c| self.world_description(c.iter().next().unwrap()))
            .collect();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << classes.len()) {
            let mut set = WorldSet::EMPTY;
            let mut parts = Vec::new();
            for (i, c) in classes.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set = set.union(*c);
                    parts.push(witnesses[i].clone());
                }
            }
            out.push((set, Formula::disj(parts)));
        }
        out.sort_by_key(|(s, _)| s.0);
        out
    }

    /// Length of the longest strict chain inside `s` ending at `w`.
    pub fn implausibility_degree(&self, s: WorldSet, w: usize) -> Result<usize> {
        if !s.contains(w) {
            return Err(DplError::WorldOutsideSet(self.worlds[w].clone()));
        }
        fn longest(
            m: &PreferenceModel,
            s: WorldSet,
            w: usize,
            memo: &mut [Option<usize>],
        ) -> usize {
            if let Some(d) = memo[w] {
                return d;
            }
            let d = 1 + m
                .leq
                .strictly_below(w)
                .intersect(s)
                .iter()
                .map(|v| longest(m, s, v, memo))
                .max()
                .unwrap_or(0);
            memo[w] = Some(d);
            d
        }
        let mut memo = vec![None; self.n()];
        Ok(longest(self, s, w, &mut memo))
    }

    /// Canonical description of the order, for reports and table-operator
    /// keys: the sorted pair list of `leq` over world names.
    pub fn fingerprint(&self) -> String {
        self.leq
            .pairs()
            .iter()
            .map(|(a, b)| format!("{}<={}", self.worlds[*a], self.worlds[*b]))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// On-disk model description.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    pub atoms: Vec<String>,
    pub valuation: BTreeMap<String, Vec<String>>,
    pub leq: Vec<(String, String)>,
    #[serde(default)]
    pub closure: Closure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    #[default]
    None,
    ReflexiveTransitive,
}

/// Loads a model from its JSON document, applying the requested closure
/// before validating.
pub fn model_from_json(text: &str) -> Result<PreferenceModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    let m = PreferenceModel::new_unchecked(file.worlds, file.atoms, &file.valuation, &file.leq)?;
    let m = match file.closure {
        Closure::None => m,
        Closure::ReflexiveTransitive => PreferenceModel {
            leq: m.leq.reflexive_transitive_closure(),
            ..m
        },
    };
    let violations = m.validate();
    if violations.is_empty() {
        Ok(m)
    } else {
        Err(DplError::InvalidModel(violations))
    }
}

/// Serializes a model to the JSON document format.
pub fn model_to_json(m: &PreferenceModel) -> String {
    let file = ModelFile {
        worlds: m.worlds.clone(),
        atoms: m.atoms.clone(),
        valuation: m
            .atoms
            .iter()
            .zip(&m.valuation)
            .map(|(a, v)| (a.clone(), m.world_names(*v)))
            .collect(),
        leq: m
            .leq
            .pairs()
            .into_iter()
            .map(|(a, b)| (m.worlds[a].clone(), m.worlds[b].clone()))
            .collect(),
        closure: Closure::None,
    };
    serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
}

/// Fixture E1: chain w1 < w2 < w3 with p at {w1, w3} and q at {w3}.
pub fn e1() -> PreferenceModel {
    let worlds = vec!["w1".into(), "w2".into(), "w3".into()];
    let atoms = vec!["p".into(), "q".into()];
    let mut val = BTreeMap::new();
    val.insert("p".to_string(), vec!["w1".to_string(), "w3".to_string()]);
    val.insert("q".to_string(), vec!["w3".to_string()]);
    let pairs: Vec<(String, String)> = [
        ("w1", "w1"),
        ("w2", "w2"),
        ("w3", "w3"),
        ("w1", "w2"),
        ("w2", "w3"),
        ("w1", "w3"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    PreferenceModel::new(worlds, atoms, &val, &pairs).expect("E1 is a valid fixture")
}

fn f1(total: bool) -> PreferenceModel {
    let worlds = vec!["w1".into(), "w2".into()];
    let atoms = vec!["p".into()];
    let mut val = BTreeMap::new();
    val.insert("p".to_string(), vec!["w1".to_string(), "w2".to_string()]);
    let mut pairs = vec![
        ("w1".to_string(), "w1".to_string()),
        ("w2".to_string(), "w2".to_string()),
    ];
    if total {
        pairs.push(("w1".to_string(), "w2".to_string()));
        pairs.push(("w2".to_string(), "w1".to_string()));
    }
    PreferenceModel::new(worlds, atoms, &val, &pairs).expect("F1 is a valid fixture")
}

/// Fixture F1, identity-order variant: two worlds with identical valuations,
/// related only to themselves.
pub fn f1_identity() -> PreferenceModel {
    f1(false)
}

/// Fixture F1, total-order variant: same carrier with the total preorder.
pub fn f1_total() -> PreferenceModel {
    f1(true)
}

/// Resolves a fixture by name.
pub fn fixture(name: &str) -> Option<PreferenceModel> {
    match name {
        "e1" => Some(e1()),
        "f1_identity" => Some(f1_identity()),
        "f1_total" => Some(f1_total()),
        _ => None,
    }
}
