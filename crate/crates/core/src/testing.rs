//! Random models, rules, states and stores for property tests.
//!
//! Generated models are valid. Rules put at most one constant on a slot, so
//! none of them is dropped by set normalization.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::ast::{
    AbstractState, Action, ActionKind, Atom, BufferContent, BufferDecl, BufferTest, ChunkDecl,
    Delay, DmEntry, Model, Rule, SlotValuePair, Value,
};
use crate::parser::canonicalize;
pub mod oracle;

use crate::chr::ChrRule;
use crate::store::{Chunk, ChunkStore, Symbol, TypeTable, Variable};

pub const BUFFERS: [&str; 3] = ["goal", "retrieval", "imaginal"];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_types: usize,
    pub max_slots: usize,
    pub max_chunks: usize,
    pub max_dm: usize,
    pub max_buffers: usize,
    pub max_rules: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_types: 3,
            max_slots: 2,
            max_chunks: 6,
            max_dm: 2,
            max_buffers: 3,
            max_rules: 4,
        }
    }
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

pub fn random_types(rng: &mut impl Rng, cfg: &GenConfig) -> TypeTable {
    let mut types = TypeTable::new();
    let n = rng.random_range(1..=cfg.max_types);
    for i in 0..n {
        let slots = rng.random_range(0..=cfg.max_slots);
        let slots = (0..slots).map(|j| Symbol::new(format!("s{j}"))).collect();
        types
            .declare(Symbol::new(format!("t{i}")), slots)
            .expect("fresh type names");
    }
    types
}

fn user_types(types: &TypeTable) -> Vec<Symbol> {
    types
        .iter()
        .map(|(t, _)| t.clone())
        .filter(|t| t.as_str() != crate::store::CHUNK_TYPE)
        .collect()
}

pub fn random_model(rng: &mut impl Rng, cfg: &GenConfig) -> Model {
    let types = random_types(rng, cfg);
    let tys = user_types(&types);
    let n_chunks = rng.random_range(1..=cfg.max_chunks);
    let ids: Vec<Symbol> = (0..n_chunks)
        .map(|i| Symbol::new(format!("k{i}")))
        .collect();
    let mut values = ids.clone();
    values.push(Symbol::nil());

    let chunks: Vec<ChunkDecl> = ids
        .iter()
        .map(|id| {
            let ty = tys.choose(rng).unwrap().clone();
            let pairs = types
                .slots(&ty)
                .unwrap()
                .iter()
                .map(|s| (s.clone(), values.choose(rng).unwrap().clone()))
                .collect();
            ChunkDecl {
                id: id.clone(),
                ty,
                pairs,
                span: Default::default(),
            }
        })
        .collect();

    let n_dm = rng.random_range(0..=cfg.max_dm.min(n_chunks));
    let dm = ids
        .choose_multiple(rng, n_dm)
        .map(|id| DmEntry {
            id: id.clone(),
            span: Default::default(),
        })
        .collect();

    let n_buffers = rng.random_range(1..=cfg.max_buffers.min(BUFFERS.len()));
    let buffers: Vec<BufferDecl> = BUFFERS[..n_buffers]
        .iter()
        .map(|b| BufferDecl {
            name: sym(b),
            chunk: ids.choose(rng).unwrap().clone(),
            pending: rng.random_bool(0.3),
            span: Default::default(),
        })
        .collect();

    let chunk_type: BTreeMap<Symbol, Symbol> = chunks
        .iter()
        .map(|c| (c.id.clone(), c.ty.clone()))
        .collect();
    let n_rules = rng.random_range(1..=cfg.max_rules);
    let rules = (0..n_rules)
        .map(|i| {
            let name = Symbol::new(format!("r{i}"));
            random_rule(rng, name, &types, &buffers, &chunk_type, &values)
        })
        .collect();

    let mut model = Model {
        types,
        chunks,
        dm,
        buffers,
        rules,
    };
    canonicalize(&mut model);
    debug_assert!(crate::ast::validate(&model).is_empty());
    model
}

fn random_value(rng: &mut impl Rng, values: &[Symbol], vars: &[&str]) -> Value {
    if !vars.is_empty() && rng.random_bool(0.7) {
        Value::Var(Variable::new(vars.choose(rng).unwrap()))
    } else {
        Value::Const(values.choose(rng).unwrap().clone())
    }
}

fn random_rule(
    rng: &mut impl Rng,
    name: Symbol,
    types: &TypeTable,
    buffers: &[BufferDecl],
    chunk_type: &BTreeMap<Symbol, Symbol>,
    values: &[Symbol],
) -> Rule {
    let tys = user_types(types);
    let mut lhs = Vec::new();
    for b in buffers {
        if !rng.random_bool(0.6) {
            continue;
        }
        // favour the type the buffer starts with so rules fire now and then
        let ty = if rng.random_bool(0.6) {
            chunk_type[&b.chunk].clone()
        } else {
            tys.choose(rng).unwrap().clone()
        };
        let mut pairs = Vec::new();
        for s in types.slots(&ty).unwrap().iter() {
            if rng.random_bool(0.7) {
                pairs.push(SlotValuePair::new(
                    s.clone(),
                    random_value(rng, values, &VARS),
                ));
            }
        }
        lhs.push(BufferTest {
            buffer: b.name.clone(),
            ty,
            pairs,
            span: Default::default(),
        });
    }
    let lhs_vars: Vec<String> = {
        let r = Rule {
            name: name.clone(),
            lhs: lhs.clone(),
            rhs: vec![],
            span: Default::default(),
        };
        r.lhs_vars()
            .iter()
            .map(|v| v.as_str().to_string())
            .collect()
    };
    let lhs_vars: Vec<&str> = lhs_vars.iter().map(String::as_str).collect();

    let mut rhs = Vec::new();
    for b in buffers {
        if !rng.random_bool(0.5) {
            continue;
        }
        let tested = lhs.iter().find(|t: &&BufferTest| t.buffer == b.name);
        let modify = tested.is_some() && rng.random_bool(0.5);
        let (kind, ty, slot_ty) = if modify {
            let t = tested.unwrap().ty.clone();
            (ActionKind::Modify, None, t)
        } else {
            let t = tys.choose(rng).unwrap().clone();
            (ActionKind::Request, Some(t.clone()), t)
        };
        let mut pairs = Vec::new();
        for s in types.slots(&slot_ty).unwrap().iter() {
            if rng.random_bool(0.5) {
                pairs.push(SlotValuePair::new(
                    s.clone(),
                    random_value(rng, values, &lhs_vars),
                ));
            }
        }
        rhs.push(Action {
            kind,
            buffer: b.name.clone(),
            ty,
            pairs,
            span: Default::default(),
        });
    }
    rhs.shuffle(rng);
    Rule {
        name,
        lhs,
        rhs,
        span: Default::default(),
    }
}

/// A rule over `model`'s types and buffers whose tests may repeat slots,
/// leave slots out, and put several constants on one slot.
pub fn random_messy_rule(rng: &mut impl Rng, model: &Model) -> Rule {
    let tys = user_types(&model.types);
    let mut values: Vec<Symbol> = model.chunks.iter().map(|c| c.id.clone()).collect();
    values.push(Symbol::nil());
    let mut lhs = Vec::new();
    for b in &model.buffers {
        if !rng.random_bool(0.7) {
            continue;
        }
        let ty = tys.choose(rng).unwrap().clone();
        let slots = model.types.slots(&ty).unwrap().to_vec();
        let mut pairs = Vec::new();
        if !slots.is_empty() {
            for _ in 0..rng.random_range(0..=slots.len() * 2) {
                let s = slots.choose(rng).unwrap().clone();
                pairs.push(SlotValuePair::new(
                    s,
                    random_value(rng, &values, &VARS[..3]),
                ));
            }
        }
        lhs.push(BufferTest {
            buffer: b.name.clone(),
            ty,
            pairs,
            span: Default::default(),
        });
    }
    let vars: Vec<String> = lhs
        .iter()
        .flat_map(|t| &t.pairs)
        .filter_map(|p| p.value.as_var().map(|v| v.as_str().to_string()))
        .collect();
    let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
    let mut rhs = Vec::new();
    for t in &lhs {
        if rng.random_bool(0.6) {
            let slots = model.types.slots(&t.ty).unwrap().to_vec();
            let mut pairs = Vec::new();
            for s in &slots {
                if rng.random_bool(0.5) {
                    pairs.push(SlotValuePair::new(
                        s.clone(),
                        random_value(rng, &values, &vars),
                    ));
                }
            }
            rhs.push(Action {
                kind: ActionKind::Modify,
                buffer: t.buffer.clone(),
                ty: None,
                pairs,
                span: Default::default(),
            });
        }
    }
    let mut rule = Rule {
        name: sym("messy"),
        lhs,
        rhs,
        span: Default::default(),
    };
    let mut m = Model {
        rules: vec![rule],
        ..model.clone()
    };
    canonicalize(&mut m);
    rule = m.rules.pop().unwrap();
    rule
}

/// A random state over `model`'s types and buffers with at most
/// `max_chunks` chunks besides `nil`. Slot values always name chunks of the
/// store.
pub fn random_state(rng: &mut impl Rng, model: &Model, max_chunks: usize) -> AbstractState {
    let tys = user_types(&model.types);
    let mut ids: Vec<Symbol> = model.chunks.iter().map(|c| c.id.clone()).collect();
    ids.truncate(max_chunks.max(1));
    let n = rng.random_range(1..=ids.len());
    let ids: Vec<Symbol> = ids[..n].to_vec();
    let mut values = ids.clone();
    values.push(Symbol::nil());
    let mut store = ChunkStore::with_nil();
    for id in &ids {
        let ty = tys.choose(rng).unwrap().clone();
        let slots = model
            .types
            .slots(&ty)
            .unwrap()
            .iter()
            .map(|s| (s.clone(), values.choose(rng).unwrap().clone()))
            .collect();
        store
            .insert(Chunk {
                id: id.clone(),
                ty,
                slots,
            })
            .unwrap();
    }
    let gamma = model
        .buffers
        .iter()
        .map(|b| {
            let delay = if rng.random_bool(0.2) {
                Delay::Pending
            } else {
                Delay::Visible
            };
            (
                b.name.clone(),
                BufferContent::new(ids.choose(rng).unwrap().clone(), delay),
            )
        })
        .collect();
    let upsilon = ids
        .iter()
        .filter(|_| rng.random_bool(0.3))
        .map(|id| Atom::new("dm", [id.clone()]))
        .collect();
    AbstractState::new(store, gamma, upsilon)
}

/// `count` stores drawn from one pool of chunks, so identifiers shared
/// between stores always name equal chunks. Ids include generated ones.
pub fn random_stores(rng: &mut impl Rng, types: &TypeTable, count: usize) -> Vec<ChunkStore> {
    let tys = user_types(types);
    let pool_ids: Vec<Symbol> = (0..8)
        .map(|i| {
            if i % 2 == 0 {
                Symbol::new(format!("k{i}"))
            } else {
                Symbol::new(format!("c#{i}"))
            }
        })
        .collect();
    let mut values = pool_ids.clone();
    values.push(Symbol::nil());
    let pool: Vec<Chunk> = pool_ids
        .iter()
        .map(|id| {
            let ty = tys.choose(rng).unwrap().clone();
            let slots = types
                .slots(&ty)
                .unwrap()
                .iter()
                .map(|s| (s.clone(), values.choose(rng).unwrap().clone()))
                .collect();
            Chunk {
                id: id.clone(),
                ty,
                slots,
            }
        })
        .collect();
    (0..count)
        .map(|_| {
            let k = rng.random_range(0..=pool.len());
            ChunkStore::from_chunks(pool.choose_multiple(rng, k).cloned()).unwrap()
        })
        .collect()
}

/// A faulty translation: the first rule other than `no` forgets the first
/// `gamma` constraint of its body. Returns `None` if no rule has one.
pub fn drop_body_gamma(rules: &[ChrRule]) -> Option<Vec<ChrRule>> {
    let mut out = rules.to_vec();
    let rule = out.iter_mut().find(|r| {
        r.name != crate::translate::NO_RULE && r.body_user.iter().any(|c| c.pred == "gamma")
    })?;
    let i = rule.body_user.iter().position(|c| c.pred == "gamma")?;
    rule.body_user.remove(i);
    Some(out)
}
