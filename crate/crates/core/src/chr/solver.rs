//! Solving conjunctions of built-in constraints by evaluation and
//! enumeration.

use thiserror::Error;

use crate::ast::{AbstractState, Action, ActionKind, Atom, SlotValuePair, Value};
use crate::chr::program::Builtin;
use crate::chr::term::{Bindings, Term};
use crate::engine::{interpret_action, ArchitectureConfig};
use crate::store::{merge, merge_all, IdGen, Symbol, TypeTable};
use crate::translate::{chr_of_store, decode_cogstate, decode_store, term_atom};

/// What the built-ins need to know about the architecture.
#[derive(Debug, Clone)]
pub struct ChrContext {
    pub types: TypeTable,
    pub config: ArchitectureConfig,
}

impl ChrContext {
    pub fn new(types: TypeTable, config: ArchitectureConfig) -> Self {
        ChrContext { types, config }
    }
}

/// A solution in progress: variable bindings, the atoms known to hold, and
/// the generator for chunk ids created by actions.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub bindings: Bindings,
    pub facts: Vec<Atom>,
    pub ids: IdGen,
}

impl Env {
    pub fn with_facts(facts: Vec<Atom>) -> Self {
        Env {
            facts,
            ..Env::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    /// Constraints that can neither be evaluated nor eliminated.
    #[error("undecided constraints: {}", .0.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", "))]
    Undecided(Vec<Builtin>),
    /// A malformed encoding or an engine error inside a built-in.
    #[error("built-in fault: {0}")]
    Fault(String),
}

fn ready(b: &Builtin, env: &Env) -> bool {
    let g = |t: &Term| env.bindings.resolve(t).is_ground();
    match b {
        Builtin::True | Builtin::False | Builtin::Eq(..) => true,
        Builtin::Gt(a, c) => g(a) && g(c),
        Builtin::In(_, l) => g(l),
        Builtin::Action {
            action,
            store,
            cogstate,
            ..
        } => g(action) && g(store) && g(cogstate),
        Builtin::Merge { stores, .. } => g(stores),
        Builtin::Map {
            left, right, id, ..
        } => g(left) && g(right) && g(id),
        Builtin::Fact(t) => g(t),
    }
}

/// All environments extending `env` that satisfy `conj`. An empty result
/// means the conjunction is unsatisfiable. Facts are taken in first; other
/// constraints are evaluated in order as soon as their inputs are ground.
pub fn solve_builtins(
    conj: &[Builtin],
    env: Env,
    ctx: &ChrContext,
) -> Result<Vec<Env>, SolveError> {
    let mut pending: Vec<Builtin> = conj
        .iter()
        .filter(|b| matches!(b, Builtin::Fact(_)))
        .cloned()
        .collect();
    pending.extend(
        conj.iter()
            .filter(|b| !matches!(b, Builtin::Fact(_)))
            .cloned(),
    );
    let mut out = Vec::new();
    solve(pending, env, ctx, &mut out)?;
    Ok(out)
}

fn solve(
    mut pending: Vec<Builtin>,
    env: Env,
    ctx: &ChrContext,
    out: &mut Vec<Env>,
) -> Result<(), SolveError> {
    if pending.is_empty() {
        out.push(env);
        return Ok(());
    }
    let Some(i) = pending.iter().position(|b| ready(b, &env)) else {
        let residual = pending
            .iter()
            .map(|b| b.map_terms(&|t| env.bindings.resolve(t)))
            .collect();
        return Err(SolveError::Undecided(residual));
    };
    let b = pending.remove(i);
    for next in step(&b, &env, ctx)? {
        solve(pending.clone(), next, ctx, out)?;
    }
    Ok(())
}

fn unify_in(env: &Env, a: &Term, b: &Term) -> Option<Env> {
    let mut next = env.clone();
    next.bindings.unify(a, b).then_some(next)
}

/// Unifies a computed store encoding with `target`, comparing as a multiset
/// when `target` is already a ground list.
fn unify_store(env: &Env, target: &Term, value: &Term) -> Option<Env> {
    if let Some(e) = unify_in(env, target, value) {
        return Some(e);
    }
    match (env.bindings.resolve(target), value) {
        (Term::List(mut xs), Term::List(ys)) => {
            let mut ys = ys.clone();
            xs.sort();
            ys.sort();
            (xs == ys).then(|| env.clone())
        }
        _ => None,
    }
}

fn step(b: &Builtin, env: &Env, ctx: &ChrContext) -> Result<Vec<Env>, SolveError> {
    let r = |t: &Term| env.bindings.resolve(t);
    Ok(match b {
        Builtin::True => vec![env.clone()],
        Builtin::False => vec![],
        Builtin::Eq(a, c) => unify_in(env, a, c).into_iter().collect(),
        Builtin::Gt(a, c) => match (r(a), r(c)) {
            (Term::Num(x), Term::Num(y)) => {
                if x > y {
                    vec![env.clone()]
                } else {
                    vec![]
                }
            }
            (x, y) => return Err(SolveError::Fault(format!("cannot compare `{x}` and `{y}`"))),
        },
        Builtin::In(x, l) => match r(l) {
            Term::List(items) => items
                .iter()
                .filter_map(|item| unify_in(env, x, item))
                .collect(),
            other => {
                return Err(SolveError::Fault(format!(
                    "`in` expects a list, found `{other}`"
                )))
            }
        },
        Builtin::Fact(t) => {
            let atom = term_atom(&r(t)).map_err(SolveError::Fault)?;
            let mut next = env.clone();
            next.facts.push(atom);
            next.facts.sort();
            vec![next]
        }
        Builtin::Merge { stores, result } => {
            let Term::List(items) = r(stores) else {
                return Err(SolveError::Fault(format!(
                    "merge expects a list of stores, found `{}`",
                    r(stores)
                )));
            };
            let decoded = items
                .iter()
                .map(decode_store)
                .collect::<Result<Vec<_>, _>>()
                .map_err(SolveError::Fault)?;
            let merged = merge_all(decoded.iter()).map_err(|e| SolveError::Fault(e.to_string()))?;
            unify_store(env, result, &chr_of_store(&merged))
                .into_iter()
                .collect()
        }
        Builtin::Map {
            left,
            right,
            id,
            mapped,
        } => {
            let left = decode_store(&r(left)).map_err(SolveError::Fault)?;
            let right = decode_store(&r(right)).map_err(SolveError::Fault)?;
            let Term::Sym(c) = r(id) else {
                return Err(SolveError::Fault(format!(
                    "map expects an identifier, found `{}`",
                    r(id)
                )));
            };
            let (merged, map) =
                merge(&left, &right).map_err(|e| SolveError::Fault(e.to_string()))?;
            let target = if left.contains(&c) || right.contains(&c) {
                merged.resolve(&map.apply(&c))
            } else {
                Symbol::nil()
            };
            unify_in(env, mapped, &Term::Sym(target))
                .into_iter()
                .collect()
        }
        Builtin::Action {
            action,
            store,
            cogstate,
            res_store,
            res_id,
            res_delay,
        } => action_step(
            env,
            ctx,
            &r(action),
            &r(store),
            &r(cogstate),
            res_store,
            res_id,
            res_delay,
        )?,
    })
}

fn decode_action(t: &Term) -> Result<Action, String> {
    let Term::App(op, args) = t else {
        return Err(format!("malformed action `{t}`"));
    };
    let [Term::Sym(buffer), Term::Sym(ty), Term::List(pairs)] = args.as_slice() else {
        return Err(format!("malformed action `{t}`"));
    };
    let kind = match op.as_str() {
        "=" => ActionKind::Modify,
        "+" => ActionKind::Request,
        other => return Err(format!("unknown action kind `{other}`")),
    };
    let pairs = pairs
        .iter()
        .map(|p| match p {
            Term::App(f, kv) if f.is_empty() && kv.len() == 2 => match (&kv[0], &kv[1]) {
                (Term::Sym(s), Term::Sym(v)) => {
                    Ok(SlotValuePair::new(s.clone(), Value::Const(v.clone())))
                }
                _ => Err(format!("non-ground slot-value pair `{p}`")),
            },
            other => Err(format!("malformed slot-value pair `{other}`")),
        })
        .collect::<Result<_, _>>()?;
    Ok(Action {
        kind,
        buffer: buffer.clone(),
        ty: (kind == ActionKind::Request).then(|| ty.clone()),
        pairs,
        span: Default::default(),
    })
}

/// One environment per effect of the action. Generated ids come from the
/// environment's generator; when the outputs are already bound, the
/// generated id may stand for any id absent from the input store.
#[allow(clippy::too_many_arguments)]
fn action_step(
    env: &Env,
    ctx: &ChrContext,
    action: &Term,
    store: &Term,
    cogstate: &Term,
    res_store: &Term,
    res_id: &Term,
    res_delay: &Term,
) -> Result<Vec<Env>, SolveError> {
    let action = decode_action(action).map_err(SolveError::Fault)?;
    let store = decode_store(store).map_err(SolveError::Fault)?;
    let gamma = decode_cogstate(cogstate).map_err(SolveError::Fault)?;
    let state = AbstractState::new(store, gamma, env.facts.clone());
    let mut ids = env.ids.clone();
    ids.bump_above(&state.store);
    let effects = interpret_action(&action, &state, &ctx.types, &ctx.config, &mut ids)
        .map_err(|e| SolveError::Fault(e.to_string()))?;
    let bound_id = match env.bindings.resolve(res_id) {
        Term::Sym(s) if !state.store.contains(&s) => Some(s),
        _ => None,
    };
    let mut out = Vec::new();
    for e in effects {
        let Some(content) = e.gamma.get(&action.buffer) else {
            return Err(SolveError::Fault(format!(
                "effect misses buffer `{}`",
                action.buffer
            )));
        };
        let mut candidates = vec![(e.delta.clone(), content.chunk.clone())];
        if let Some(x) = &bound_id {
            if *x != content.chunk && !e.delta.contains(x) {
                let from = content.chunk.clone();
                let renamed =
                    e.delta
                        .renamed(&|id| if *id == from { x.clone() } else { id.clone() });
                candidates.push((renamed, x.clone()));
            }
        }
        for (delta, id) in candidates {
            let mut next = env.clone();
            next.ids = ids.clone();
            let ok = next.bindings.unify(res_id, &Term::Sym(id))
                && next
                    .bindings
                    .unify(res_delay, &Term::Num(content.delay.as_number()));
            if !ok {
                continue;
            }
            if let Some(mut next) = unify_store(&next, res_store, &chr_of_store(&delta)) {
                next.facts.extend(e.upsilon.iter().cloned());
                next.facts.sort();
                out.push(next);
                break;
            }
        }
    }
    Ok(out)
}
