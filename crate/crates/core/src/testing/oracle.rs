//! Brute-force re-computations the engine is checked against.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{AbstractState, BufferContent, Delay, Model, Rule, Value};
use crate::engine::{
    apply_transition, interpret_rule, is_set_normal_form, isomorphic, match_rule, set_normal_form,
    ArchitectureConfig, Normalized, Substitution,
};
use crate::parser::print_rule;
use crate::store::{merge, Chunk, ChunkStore, Symbol, TypeTable, Variable};
use crate::testing::{random_messy_rule, random_model, random_state, GenConfig};

pub fn rule_vars(rule: &Rule) -> Vec<Variable> {
    let mut vs: Vec<Variable> = rule
        .lhs
        .iter()
        .flat_map(|t| &t.pairs)
        .filter_map(|p| p.value.as_var().cloned())
        .collect();
    vs.sort();
    vs.dedup();
    vs
}

pub fn holds(rule: &Rule, state: &AbstractState, theta: &BTreeMap<Variable, Symbol>) -> bool {
    rule.lhs.iter().all(|t| {
        let Some(content) = state.gamma.get(&t.buffer) else {
            return false;
        };
        let Some(chunk) = state.store.get(&content.chunk) else {
            return false;
        };
        content.delay == Delay::Visible
            && chunk.ty == t.ty
            && t.pairs.iter().all(|p| {
                let want = match &p.value {
                    Value::Const(c) => c,
                    Value::Var(v) => &theta[v],
                };
                chunk.value(&p.slot) == Some(want)
            })
    })
}

/// Every substitution of the rule's variables by chunk ids that satisfies
/// all tests.
pub fn brute_force_matches(rule: &Rule, state: &AbstractState) -> Vec<BTreeMap<Variable, Symbol>> {
    let vars = rule_vars(rule);
    let ids: Vec<Symbol> = state.store.ids().cloned().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let theta: BTreeMap<Variable, Symbol> = vars
            .iter()
            .cloned()
            .zip(idx.iter().map(|&i| ids[i].clone()))
            .collect();
        if holds(rule, state, &theta) {
            out.push(theta);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < ids.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Type and slot values of the chunk in each buffer.
pub type Contents = BTreeMap<Symbol, (Symbol, Vec<(Symbol, Symbol)>)>;

/// First-occurrence matcher on explicit buffer contents, used where
/// enumerating substitutions would be too slow.
pub fn satisfiable_on(rule: &Rule, contents: &Contents) -> bool {
    let mut theta: BTreeMap<&Variable, &Symbol> = BTreeMap::new();
    for t in &rule.lhs {
        let Some((ty, slots)) = contents.get(&t.buffer) else {
            return false;
        };
        if *ty != t.ty {
            return false;
        }
        for p in &t.pairs {
            let Some((_, actual)) = slots.iter().find(|(s, _)| *s == p.slot) else {
                return false;
            };
            match &p.value {
                Value::Const(c) if c != actual => return false,
                Value::Const(_) => {}
                Value::Var(v) => {
                    if *theta.entry(v).or_insert(actual) != actual {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Searches every store of at most one chunk per tested buffer for a state
/// the rule matches. Chunks of another type never match a test, so each
/// tested buffer gets a chunk of the tested type; slot values range over
/// the rule's constants, `nil` and one unrelated id.
pub fn exists_matching_state(rule: &Rule, types: &TypeTable) -> bool {
    let mut values: Vec<Symbol> = rule
        .lhs
        .iter()
        .flat_map(|t| &t.pairs)
        .filter_map(|p| p.value.as_const().cloned())
        .collect();
    values.push(Symbol::nil());
    values.push(Symbol::new("elsewhere"));
    values.sort();
    values.dedup();

    fn go(
        rule: &Rule,
        types: &TypeTable,
        values: &[Symbol],
        i: usize,
        contents: &mut Contents,
    ) -> bool {
        let Some(test) = rule.lhs.get(i) else {
            return satisfiable_on(rule, contents);
        };
        let slots = types.slots(&test.ty).unwrap();
        let n = slots.len();
        let total = values.len().pow(n as u32);
        for code in 0..total {
            let mut k = code;
            let assignment = slots
                .iter()
                .map(|s| {
                    let v = values[k % values.len()].clone();
                    k /= values.len();
                    (s.clone(), v)
                })
                .collect();
            contents.insert(test.buffer.clone(), (test.ty.clone(), assignment));
            if go(rule, types, values, i + 1, contents) {
                return true;
            }
        }
        contents.remove(&test.buffer);
        false
    }
    go(rule, types, &values, 0, &mut BTreeMap::new())
}

/// A state of at most three chunks built so that the rule's constants
/// appear in the tested buffers, which makes matches likely.
pub fn state_towards(rule: &Rule, model: &Model, r: &mut impl Rng) -> AbstractState {
    let ids: Vec<Symbol> = model.chunks.iter().map(|c| c.id.clone()).collect();
    let mut values = ids.clone();
    values.push(Symbol::nil());
    let tys: Vec<Symbol> = model
        .types
        .iter()
        .map(|(t, _)| t.clone())
        .filter(|t| t.as_str() != "chunk")
        .collect();
    let mut store = ChunkStore::with_nil();
    let mut gamma = BTreeMap::new();
    for (i, b) in model.buffers.iter().enumerate() {
        let id = ids[i % ids.len()].clone();
        let test = rule.lhs.iter().find(|t| t.buffer == b.name);
        let ty = match test {
            Some(t) if !store.contains(&id) => t.ty.clone(),
            _ => tys.choose(r).unwrap().clone(),
        };
        if !store.contains(&id) {
            let slots = model
                .types
                .slots(&ty)
                .unwrap()
                .iter()
                .map(|s| {
                    let constant = test.and_then(|t| {
                        t.pairs
                            .iter()
                            .filter(|p| p.slot == *s)
                            .find_map(|p| p.value.as_const().cloned())
                    });
                    match constant {
                        Some(c) if r.random_bool(0.8) => (s.clone(), c),
                        _ => (s.clone(), values.choose(r).unwrap().clone()),
                    }
                })
                .collect();
            store
                .insert(Chunk {
                    id: id.clone(),
                    ty,
                    slots,
                })
                .unwrap();
        }
        gamma.insert(b.name.clone(), BufferContent::new(id, Delay::Visible));
    }
    for id in &ids {
        if !store.contains(id) {
            let ty = tys.choose(r).unwrap().clone();
            let slots = model
                .types
                .slots(&ty)
                .unwrap()
                .iter()
                .map(|s| (s.clone(), Symbol::nil()))
                .collect();
            store
                .insert(Chunk {
                    id: id.clone(),
                    ty,
                    slots,
                })
                .unwrap();
        }
    }
    AbstractState::new(store, gamma, vec![])
}

fn successors_of(
    rule: &Rule,
    theta: &Substitution,
    state: &AbstractState,
    types: &TypeTable,
) -> Result<Vec<AbstractState>, String> {
    let effects = interpret_rule(rule, theta, state, types, &ArchitectureConfig::default())
        .map_err(|e| e.to_string())?;
    effects
        .iter()
        .map(|e| apply_transition(state, e).map_err(|e| e.to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SnfCase {
    Matched,
    Unmatched,
    Dropped,
}

/// One (rule, state) pair checking set normalization, drawn from
/// `seed`. A rule and its normal form must match the same states with the
/// same successors; a dropped rule must match no state at all.
pub fn set_normal_form_case(seed: u64) -> Result<SnfCase, String> {
    let cfg = GenConfig {
        max_chunks: 3,
        ..GenConfig::default()
    };
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let model = random_model(&mut r, &cfg);
    let rule = random_messy_rule(&mut r, &model);
    let state = if r.random_bool(0.5) {
        state_towards(&rule, &model, &mut r)
    } else {
        random_state(&mut r, &model, 3)
    };
    let raw = brute_force_matches(&rule, &state);
    match set_normal_form(&rule, &model.types) {
        Normalized::Dropped => {
            if !raw.is_empty() {
                return Err("dropped rule matches".into());
            }
            if exists_matching_state(&rule, &model.types) {
                return Err("dropped rule is satisfiable".into());
            }
            Ok(SnfCase::Dropped)
        }
        Normalized::Rule(n) => {
            if !is_set_normal_form(&n, &model.types) {
                return Err(format!("not in set normal form: {}", print_rule(&n)));
            }
            let theta = match_rule(&n, &state);
            if theta.is_some() == raw.is_empty() {
                return Err(format!("applicability differs on\n{state}"));
            }
            let (Some(theta), Some(raw_theta)) = (theta, raw.into_iter().next()) else {
                return Ok(SnfCase::Unmatched);
            };
            let raw_theta: Substitution = raw_theta.into_iter().collect();
            let a = successors_of(&rule, &raw_theta, &state, &model.types)?;
            let b = successors_of(&n, &theta, &state, &model.types)?;
            if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| !isomorphic(x, y)) {
                return Err(format!("successors differ on\n{state}"));
            }
            Ok(SnfCase::Matched)
        }
    }
}

/// Associativity, neutrality of the empty store, idempotency,
/// commutativity on compatible stores, and embedding of the left operand
/// with ids preserved.
pub fn merge_laws(a: &ChunkStore, b: &ChunkStore, c: &ChunkStore) -> Result<(), String> {
    let m = |x: &ChunkStore, y: &ChunkStore| merge(x, y).map(|r| r.0).map_err(|e| e.to_string());
    let e = ChunkStore::empty();
    let check = |ok: bool, law: &str| if ok { Ok(()) } else { Err(law.to_string()) };
    check(m(&e, a)? == *a, "left neutral")?;
    check(m(a, &e)? == *a, "right neutral")?;
    check(m(&m(a, b)?, c)? == m(a, &m(b, c)?)?, "associative")?;
    check(m(a, a)? == *a, "idempotent")?;
    check(m(a, b)? == m(b, a)?, "commutative")?;
    let (merged, map) = merge(a, b).map_err(|e| e.to_string())?;
    check(map.is_identity(), "identity id map")?;
    check(
        a.iter().all(|x| merged.get(&x.id) == Some(x)),
        "left embedding",
    )?;
    let ids: std::collections::BTreeSet<&Symbol> = a.ids().chain(b.ids()).collect();
    check(merged.len() == ids.len(), "union of ids")
}
