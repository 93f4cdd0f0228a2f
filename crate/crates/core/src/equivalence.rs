//! Dynamic modal equivalence of worlds and of whole models: which worlds no
//! formula of the language (static or dynamic) can tell apart, and
//! distinguishing formulas for those that can be told apart.
//!
//! Two worlds of a model are dynamically equivalent when they agree on every
//! formula, including formulas with dynamic modalities for the distinguished
//! operator. Updates are deterministic and world-preserving, so this is a
//! distinguishability fixpoint over pairs of worlds tracked per reachable
//! model; distinguishing formulas are recovered from a pairwise game whose
//! moves mirror the modalities of the language.

use std::collections::BTreeMap;

use crate::error::{DplError, Result};
use crate::formula::{Formula, OperatorName};
use crate::model::{PreferenceModel, WorldSet};
use crate::semantics::{reachable_with_transitions, DynamicModel};

/// The equivalence classes of dynamic equivalence over a model's worlds,
/// ordered by least member, each with a formula true exactly on it.
#[derive(Debug, Clone)]
pub struct Partition {
    pub blocks: Vec<WorldSet>,
    pub separators: Vec<Formula>,
}

impl Partition {
    /// Index of the block containing `w`.
    pub fn block_of(&self, w: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(w))
            .expect("partition covers all worlds")
    }

    /// A formula true exactly on `set`, which must be a union of blocks.
    pub fn union_formula(&self, set: WorldSet) -> Result<Formula> {
        let mut parts = Vec::new();
        let mut covered = WorldSet::EMPTY;
        for (b, sep) in self.blocks.iter().zip(&self.separators) {
            if b.is_subset(set) {
                parts.push(sep.clone());
                covered = covered.union(*b);
            }
        }
        if covered != set {
            return Err(DplError::Config(
                "set is not a union of equivalence blocks".to_string(),
            ));
        }
        Ok(Formula::disj(parts))
    }
}

/// The blocks of dynamic equivalence, without separator formulas. This is
/// the fast path used by the postulate auditors: the same distinguishability
/// fixpoint the game computes, but without recording moves. The pairwise
/// relation is tracked per reachable model, because equivalence in a reached
/// model can be coarser than in the base model.
pub(crate) fn partition_only(d: &DynamicModel) -> Result<Vec<WorldSet>> {
    let (models, trans) = reachable_with_transitions(d)?;
    let n = d.base.n();
    let mut dist = vec![vec![false; n * n]; models.len()];
    for u in 0..n {
        for v in 0..n {
            // Operators preserve valuations, so atom truth is uniform
            // across the reachable models.
            let differ = d.base.atoms().iter().any(|a| {
                let e = d.base.atom_extension(a).expect("own atom");
                e.contains(u) != e.contains(v)
            });
            if differ {
                for row in dist.iter_mut() {
                    row[u * n + v] = true;
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for mi in 0..models.len() {
            let m = &models[mi];
            for u in 0..n {
                for v in 0..n {
                    if dist[mi][u * n + v] {
                        continue;
                    }
                    let mut mark = false;
                    for strict in [false, true] {
                        let below = |w| {
                            if strict {
                                m.leq().strictly_below(w)
                            } else {
                                m.leq().below(w)
                            }
                        };
                        let (pu, pv) = (below(u), below(v));
                        if pu
                            .iter()
                            .any(|u1| pv.iter().all(|v1| dist[mi][u1 * n + v1]))
                            || pv
                                .iter()
                                .any(|v1| pu.iter().all(|u1| dist[mi][v1 * n + u1]))
                        {
                            mark = true;
                            break;
                        }
                    }
                    if mark || trans[mi].values().any(|&m2| dist[m2][u * n + v]) {
                        dist[mi][u * n + v] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut blocks: Vec<WorldSet> = Vec::new();
    for w in 0..n {
        match blocks
            .iter_mut()
            .find(|b| !dist[0][b.iter().next().unwrap() * n + w])
        {
            Some(b) => b.insert(w),
            None => blocks.push(WorldSet::singleton(w)),
        }
    }
    Ok(blocks)
}

/// One step of the distinguishability game, recorded so that a
/// distinguishing formula can be rebuilt later.
#[derive(Debug, Clone)]
enum Move {
    /// An atom whose truth differs; `positive` when the left world has it.
    Atom { atom: String, positive: bool },
    /// A predecessor move `witness` on the left (or, when `flipped`, on the
    /// right) that the other side cannot answer.
    Diam {
        strict: bool,
        witness: usize,
        flipped: bool,
    },
    /// Advancing both sides by the operator with input extension `ext`.
    Dyn { ext: usize },
}

type State = (usize, usize, usize, usize); // (left model, left world, right model, right world)

/// The pairwise distinguishability game over one or two systems of
/// reachable models sharing a carrier and valuation.
struct Game {
    models: Vec<PreferenceModel>,
    trans: Vec<BTreeMap<WorldSet, usize>>,
    exts: Vec<(WorldSet, Formula)>,
    op: OperatorName,
    pairs: Vec<(usize, usize)>,
    dist: BTreeMap<State, Move>,
}

impl Game {
    /// Builds the game from one or two dynamic models and seed model pairs.
    fn new(systems: &[&DynamicModel], seeds: &[(usize, usize)]) -> Result<Game> {
        let mut models = Vec::new();
        let mut trans: Vec<BTreeMap<WorldSet, usize>> = Vec::new();
        for d in systems {
            let (ms, ts) = reachable_with_transitions(d)?;
            let offset = models.len();
            models.extend(ms);
            trans.extend(ts.into_iter().map(|row| {
                row.into_iter().map(|(s, i)| (s, i + offset)).collect()
            }));
        }
        let exts = systems[0].base.propositional_extensions();
        // Close the seed model pairs under joint transitions.
        let mut pairs: Vec<(usize, usize)> = seeds.to_vec();
        let mut next = 0;
        while next < pairs.len() {
            let (a, b) = pairs[next];
            for (ext, _) in &exts {
                let p = (trans[a][ext], trans[b][ext]);
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
            next += 1;
        }
        pairs.sort_unstable();
        Ok(Game {
            models,
            trans,
            exts,
            op: systems[0].op.clone(),
            pairs,
            dist: BTreeMap::new(),
        })
    }

    fn n(&self) -> usize {
        self.models[0].n()
    }

    /// Marks every state distinguishable by some formula. States only ever
    /// reference states marked earlier, so formula extraction terminates.
    fn solve(&mut self) {
        let n = self.n();
        for &(a, b) in &self.pairs {
            for u in 0..n {
                for v in 0..n {
                    let diff = self.models[a].atoms().iter().find(|atom| {
                        let ue = self.models[a].atom_extension(atom).unwrap();
                        let ve = self.models[b].atom_extension(atom).unwrap();
                        ue.contains(u) != ve.contains(v)
                    });
                    if let Some(atom) = diff {
                        let positive = self.models[a]
                            .atom_extension(atom)
                            .unwrap()
                            .contains(u);
                        self.dist.insert(
                            (a, u, b, v),
                            Move::Atom {
                                atom: atom.clone(),
                                positive,
                            },
                        );
                    }
                }
            }
        }
        loop {
            let mut changed = false;
            for pi in 0..self.pairs.len() {
                let (a, b) = self.pairs[pi];
                for u in 0..n {
                    for v in 0..n {
                        if self.dist.contains_key(&(a, u, b, v)) {
                            continue;
                        }
                        if let Some(mv) = self.find_move(a, u, b, v) {
                            self.dist.insert((a, u, b, v), mv);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn find_move(&self, a: usize, u: usize, b: usize, v: usize) -> Option<Move> {
        for strict in [false, true] {
            let below = |m: usize, w: usize| {
                if strict {
                    self.models[m].leq().strictly_below(w)
                } else {
                    self.models[m].leq().below(w)
                }
            };
            let pu = below(a, u);
            let pv = below(b, v);
            for u1 in pu.iter() {
                if pv.iter().all(|v1| self.dist.contains_key(&(a, u1, b, v1))) {
                    return Some(Move::Diam {
                        strict,
                        witness: u1,
                        flipped: false,
                    });
                }
            }
            for v1 in pv.iter() {
                if pu.iter().all(|u1| self.dist.contains_key(&(b, v1, a, u1))) {
                    return Some(Move::Diam {
                        strict,
                        witness: v1,
                        flipped: true,
                    });
                }
            }
        }
        for (ei, (ext, _)) in self.exts.iter().enumerate() {
            let s = (self.trans[a][ext], u, self.trans[b][ext], v);
            if self.dist.contains_key(&s) {
                return Some(Move::Dyn { ext: ei });
            }
        }
        None
    }

    /// A formula true at the left point of the state and false at the right.
    fn extract(&self, s: State) -> Formula {
        let (a, u, b, v) = s;
        match self.dist.get(&s).expect("state must be distinguishable") {
            Move::Atom { atom, positive } => {
                let f = Formula::atom(atom.clone());
                if *positive {
                    f
                } else {
                    Formula::not(f)
                }
            }
            Move::Dyn { ext } => {
                let (mask, phi) = &self.exts[*ext];
                let next = (self.trans[a][mask], u, self.trans[b][mask], v);
                Formula::dynamic(self.op.clone(), phi.clone(), self.extract(next))
                    .expect("extension witnesses are propositional")
            }
            Move::Diam {
                strict,
                witness,
                flipped,
            } => {
                let below = |m: usize, w: usize| {
                    if *strict {
                        self.models[m].leq().strictly_below(w)
                    } else {
                        self.models[m].leq().below(w)
                    }
                };
                let diam = |f| {
                    if *strict {
                        Formula::diam_lt(f)
                    } else {
                        Formula::diam_leq(f)
                    }
                };
                if !flipped {
                    let body = Formula::conj(
                        below(b, v)
                            .iter()
                            .map(|v1| self.extract((a, *witness, b, v1)))
                            .collect(),
                    );
                    diam(body)
                } else {
                    let body = Formula::conj(
                        below(a, u)
                            .iter()
                            .map(|u1| self.extract((b, *witness, a, u1)))
                            .collect(),
                    );
                    Formula::not(diam(body))
                }
            }
        }
    }
}

/// Dynamic equivalence over the worlds of `d.base`, with a separating
/// formula per block.
pub fn dynamic_equivalence(d: &DynamicModel) -> Result<Partition> {
    let mut game = Game::new(&[d], &[(0, 0)])?;
    game.solve();
    let n = d.base.n();
    let mut blocks: Vec<WorldSet> = Vec::new();
    for w in 0..n {
        match blocks
            .iter_mut()
            .find(|b| !game.dist.contains_key(&(0, b.iter().next().unwrap(), 0, w)))
        {
            Some(b) => b.insert(w),
            None => blocks.push(WorldSet::singleton(w)),
        }
    }
    debug_assert_eq!(blocks, partition_only(d)?);
    let reps: Vec<usize> = blocks.iter().map(|b| b.iter().next().unwrap()).collect();
    let separators = reps
        .iter()
        .map(|&r| {
            Formula::conj(
                reps.iter()
                    .filter(|&&o| o != r)
                    .map(|&o| game.extract((0, r, 0, o)))
                    .collect(),
            )
        })
        .collect();
    Ok(Partition { blocks, separators })
}

/// A formula true exactly on the dynamic-equivalence block of `world`.
pub fn characteristic_formula(d: &DynamicModel, world: &str) -> Result<Formula> {
    let w = d.base.world_index(world)?;
    let p = dynamic_equivalence(d)?;
    Ok(p.separators[p.block_of(w)].clone())
}

/// Whether two dynamic models over the same carrier are indistinguishable:
/// every world satisfies the same formulas in both. Distinct carriers are an
/// error; differing valuations answer no immediately.
pub fn modally_equivalent_models(d1: &DynamicModel, d2: &DynamicModel) -> Result<bool> {
    if d1.base.worlds() != d2.base.worlds() || d1.base.atoms() != d2.base.atoms() {
        return Err(DplError::MismatchedCarriers(
            "models must share worlds and atoms".to_string(),
        ));
    }
    for atom in d1.base.atoms() {
        if d1.base.atom_extension(atom)? != d2.base.atom_extension(atom)? {
            return Ok(false);
        }
    }
    let (len1, _) = reachable_with_transitions(d1)?;
    let off = len1.len();
    let mut game = Game::new(&[d1, d2], &[(0, off), (off, 0), (0, 0), (off, off)])?;
    game.solve();
    Ok((0..d1.base.n()).all(|w| !game.dist.contains_key(&(0, w, off, w))))
}
