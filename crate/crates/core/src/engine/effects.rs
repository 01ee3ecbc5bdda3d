//! Interpretation of actions and rules as sets of effects.

use std::collections::BTreeMap;

use crate::ast::{AbstractState, Action, ActionKind, Atom, BufferContent, Delay, Rule, Value};
use crate::engine::config::{Answer, ArchitectureConfig, FailRequest};
use crate::engine::matching::Substitution;
use crate::engine::EngineError;
use crate::store::{merge, Chunk, ChunkStore, IdGen, Symbol, TypeTable};

/// A partial store, a partial cognitive state and added atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Effect {
    pub delta: ChunkStore,
    pub gamma: BTreeMap<Symbol, BufferContent>,
    pub upsilon: Vec<Atom>,
}

impl Effect {
    /// Changes nothing; neutral for [`combine_effects`].
    pub fn neutral() -> Self {
        Effect {
            delta: ChunkStore::empty(),
            gamma: BTreeMap::new(),
            upsilon: Vec::new(),
        }
    }
}

fn ground_pairs(action: &Action) -> Result<Vec<(Symbol, Symbol)>, EngineError> {
    action
        .pairs
        .iter()
        .map(|p| match &p.value {
            Value::Const(c) => Ok((p.slot.clone(), c.clone())),
            Value::Var(v) => Err(EngineError::NotGround(v.clone())),
        })
        .collect()
}

/// A modification: a fresh copy of the buffer's chunk with the given slots
/// overwritten. Values naming no chunk become `nil`.
pub fn interpret_modification(
    action: &Action,
    state: &AbstractState,
    ids: &mut IdGen,
) -> Result<Vec<Effect>, EngineError> {
    let pairs = ground_pairs(action)?;
    let incumbent = state
        .buffer_chunk(&action.buffer)
        .ok_or_else(|| EngineError::MissingIncumbent(action.buffer.clone()))?;
    let slots = incumbent
        .slots
        .iter()
        .map(|(s, old)| {
            let v = match pairs.iter().find(|(ps, _)| ps == s) {
                Some((_, new)) => state.store.resolve(new),
                None => old.clone(),
            };
            (s.clone(), v)
        })
        .collect();
    let chunk = Chunk {
        id: ids.fresh(),
        ty: incumbent.ty.clone(),
        slots,
    };
    let mut gamma = BTreeMap::new();
    gamma.insert(
        action.buffer.clone(),
        BufferContent::new(chunk.id.clone(), Delay::Visible),
    );
    let delta = ChunkStore::from_chunks([chunk]).expect("single chunk");
    Ok(vec![Effect {
        delta,
        gamma,
        upsilon: Vec::new(),
    }])
}

/// A request: one effect per answer of the buffer's handler. All answers
/// share one fresh id, since they are alternatives.
pub fn interpret_request(
    action: &Action,
    state: &AbstractState,
    types: &TypeTable,
    config: &ArchitectureConfig,
    ids: &mut IdGen,
) -> Result<Vec<Effect>, EngineError> {
    let pairs = ground_pairs(action)?;
    let handler = config
        .handler(&action.buffer)
        .ok_or_else(|| EngineError::NoHandler(action.buffer.clone()))?;
    let ty = action
        .ty
        .clone()
        .unwrap_or_else(|| Symbol::new(crate::store::CHUNK_TYPE));
    let mut answers = handler.answers(&ty, &pairs, state, types);
    if answers.is_empty() {
        match config.fail_request {
            FailRequest::Nil => answers.push(Answer {
                chunk: Chunk::nil(),
                delay: Delay::Pending,
                atoms: Vec::new(),
            }),
            FailRequest::Stuck => return Ok(Vec::new()),
        }
    }
    let id = ids.fresh();
    Ok(answers
        .into_iter()
        .map(|a| {
            let chunk = a.chunk.with_id(id.clone());
            let mut gamma = BTreeMap::new();
            gamma.insert(
                action.buffer.clone(),
                BufferContent::new(id.clone(), a.delay),
            );
            let mut upsilon = a.atoms;
            upsilon.sort();
            Effect {
                delta: ChunkStore::from_chunks([chunk]).expect("single chunk"),
                gamma,
                upsilon,
            }
        })
        .collect())
}

pub fn interpret_action(
    action: &Action,
    state: &AbstractState,
    types: &TypeTable,
    config: &ArchitectureConfig,
    ids: &mut IdGen,
) -> Result<Vec<Effect>, EngineError> {
    match action.kind {
        ActionKind::Modify => interpret_modification(action, state, ids),
        ActionKind::Request => interpret_request(action, state, types, config, ids),
    }
}

/// Glues two effects on disjoint buffers.
pub fn combine_effects(e: &Effect, f: &Effect) -> Result<Effect, EngineError> {
    if let Some(b) = f.gamma.keys().find(|b| e.gamma.contains_key(*b)) {
        return Err(EngineError::DomainOverlap(b.clone()));
    }
    let (delta, map) = merge(&e.delta, &f.delta)?;
    let mut gamma = e.gamma.clone();
    for (b, c) in &f.gamma {
        gamma.insert(b.clone(), BufferContent::new(map.apply(&c.chunk), c.delay));
    }
    let mut upsilon: Vec<Atom> = e.upsilon.iter().chain(&f.upsilon).cloned().collect();
    upsilon.sort();
    Ok(Effect {
        delta,
        gamma,
        upsilon,
    })
}

/// Pairwise combination of two effect sets.
pub fn combine_sets(es: &[Effect], fs: &[Effect]) -> Result<Vec<Effect>, EngineError> {
    let mut out = Vec::with_capacity(es.len() * fs.len());
    for e in es {
        for f in fs {
            out.push(combine_effects(e, f)?);
        }
    }
    Ok(out)
}

/// All effects of firing `rule` with bindings `theta`. Fresh ids are drawn
/// from one generator above the state's store so actions stay apart.
pub fn interpret_rule(
    rule: &Rule,
    theta: &Substitution,
    state: &AbstractState,
    types: &TypeTable,
    config: &ArchitectureConfig,
) -> Result<Vec<Effect>, EngineError> {
    let mut ids = IdGen::above(&state.store);
    let mut acc = vec![Effect::neutral()];
    for action in &rule.rhs {
        let ground = theta.apply_action(action);
        let effects = interpret_action(&ground, state, types, config, &mut ids)?;
        acc = combine_sets(&acc, &effects)?;
    }
    Ok(acc.into_iter().map(|e| config.hook(e)).collect())
}
