//! Engine functions against brute-force re-computations.

use std::collections::BTreeMap;

use actr_chr::ast::{Action, ActionKind, Delay, SlotValuePair, Value};
use actr_chr::engine::{
    interpret_request, match_rule, ArchitectureConfig, FailRequest, Substitution,
};
use actr_chr::store::{merge, Chunk, ChunkStore, IdGen, MergeError, Symbol, TypeTable, Variable};
use actr_chr::testing::oracle::{brute_force_matches, merge_laws, set_normal_form_case, SnfCase};
use actr_chr::testing::{random_model, random_state, random_stores, random_types, GenConfig};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn as_map(theta: &Substitution) -> BTreeMap<Variable, Symbol> {
    theta.iter().map(|(v, c)| (v.clone(), c.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matching_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, &GenConfig::default());
        for _ in 0..4 {
            let state = random_state(&mut r, &model, 6);
            for rule in &model.rules {
                let expected = brute_force_matches(rule, &state);
                prop_assert!(expected.len() <= 1, "substitutions are unique");
                let got = match_rule(rule, &state).map(|t| as_map(&t));
                prop_assert_eq!(got, expected.into_iter().next());
            }
        }
    }

    #[test]
    fn requests_answer_from_declarative_memory(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, &GenConfig::default());
        let state = random_state(&mut r, &model, 6);
        let tys: Vec<Symbol> = model.types.iter().map(|(t, _)| t.clone()).filter(|t| t.as_str() != "chunk").collect();
        let ids: Vec<Symbol> = state.store.ids().cloned().collect();
        let ty = tys.choose(&mut r).unwrap().clone();
        let pairs: Vec<SlotValuePair> = model
            .types
            .slots(&ty)
            .unwrap()
            .iter()
            .filter(|_| r.random_bool(0.4))
            .cloned()
            .collect::<Vec<_>>()
            .into_iter()
            .map(|s| SlotValuePair::new(s, Value::Const(ids.choose(&mut r).unwrap().clone())))
            .collect();
        let buffer = model.buffers[0].name.clone();
        let action = Action { kind: ActionKind::Request, buffer: buffer.clone(), ty: Some(ty.clone()), pairs, span: Default::default() };

        let mut expected: Vec<(Symbol, Vec<(Symbol, Symbol)>)> = state
            .upsilon
            .iter()
            .filter(|a| a.pred.as_str() == "dm")
            .filter_map(|a| state.store.get(&a.args[0]))
            .filter(|c| c.ty == ty)
            .filter(|c| action.pairs.iter().all(|p| Some(p.value.as_const().unwrap()) == c.value(&p.slot)))
            .map(|c| (c.ty.clone(), c.slots.clone()))
            .collect();
        expected.sort();

        for mode in [FailRequest::Nil, FailRequest::Stuck] {
            let config = ArchitectureConfig::default().with_fail_request(mode);
            let mut gen = IdGen::above(&state.store);
            let effects = interpret_request(&action, &state, &model.types, &config, &mut gen).unwrap();
            let mut got: Vec<(Symbol, Vec<(Symbol, Symbol)>)> = Vec::new();
            let mut fresh = None;
            for e in &effects {
                let content = &e.gamma[&buffer];
                prop_assert_eq!(e.gamma.len(), 1);
                prop_assert_eq!(content.delay, Delay::Pending);
                prop_assert!(!state.store.contains(&content.chunk));
                prop_assert!(fresh.get_or_insert(content.chunk.clone()) == &content.chunk);
                let c = e.delta.get(&content.chunk).unwrap();
                got.push((c.ty.clone(), c.slots.clone()));
            }
            got.sort();
            match (expected.is_empty(), mode) {
                (false, _) => prop_assert_eq!(&got, &expected),
                (true, FailRequest::Nil) => prop_assert_eq!(&got, &vec![(Symbol::new("chunk"), vec![])]),
                (true, FailRequest::Stuck) => prop_assert!(got.is_empty()),
            }
        }
    }
}

#[test]
fn set_normal_form_preserves_matching_and_effects() {
    let mut counts = BTreeMap::new();
    for seed in 0..500u64 {
        let case = set_normal_form_case(seed).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        *counts.entry(case).or_insert(0) += 1;
    }
    assert!(counts[&SnfCase::Matched] > 50, "{counts:?}");
    assert!(counts[&SnfCase::Dropped] > 10, "{counts:?}");
}

fn stores(seed: u64, n: usize) -> (TypeTable, Vec<ChunkStore>) {
    let mut r = rng(seed);
    let types = random_types(&mut r, &GenConfig::default());
    let stores = random_stores(&mut r, &types, n);
    (types, stores)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_is_an_idempotent_monoid_embedding_its_left_operand(seed in any::<u64>()) {
        let (_, s) = stores(seed, 3);
        prop_assert_eq!(merge_laws(&s[0], &s[1], &s[2]), Ok(()));
    }

    #[test]
    fn merge_rejects_clashing_ids_from_either_side(seed in any::<u64>()) {
        let (_, s) = stores(seed, 1);
        let Some(c) = s[0].iter().next().cloned() else { return Ok(()) };
        let other = Chunk { ty: Symbol::new(format!("{}x", c.ty)), ..c.clone() };
        let clash = ChunkStore::from_chunks([other]).unwrap();
        prop_assert_eq!(merge(&s[0], &clash).unwrap_err(), MergeError::IdClash(c.id.clone()));
        prop_assert_eq!(merge(&clash, &s[0]).unwrap_err(), MergeError::IdClash(c.id.clone()));
    }
}
