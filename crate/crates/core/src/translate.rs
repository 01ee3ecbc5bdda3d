//! Translation of stores, states, rules and models into CHR.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{AbstractState, ActionKind, Atom, BufferContent, Delay, Model, Rule, Value};
use crate::chr::program::{Builtin, ChrRule, ChrState, UserConstraint};
use crate::chr::term::Term;
use crate::engine::{is_set_normal_form, Program};
use crate::store::{Chunk, ChunkStore, Symbol, TypeTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("rule `{0}` is not in set normal form")]
    NotNormalized(Symbol),
    #[error("invalid model: {0}")]
    Invalid(String),
}

pub fn encode_chunk(c: &Chunk) -> Term {
    let slots = c
        .slots
        .iter()
        .map(|(s, v)| Term::tuple(vec![Term::Sym(s.clone()), Term::Sym(v.clone())]))
        .collect();
    Term::app(
        "chunk",
        vec![
            Term::Sym(c.id.clone()),
            Term::Sym(c.ty.clone()),
            Term::List(slots),
        ],
    )
}

/// `[chunk(id,type,[(slot,value),...]), ...]` in identifier order.
pub fn chr_of_store(store: &ChunkStore) -> Term {
    Term::List(store.iter().map(encode_chunk).collect())
}

fn sym(t: &Term) -> Result<Symbol, String> {
    match t {
        Term::Sym(s) => Ok(s.clone()),
        other => Err(format!("expected a constant, found `{other}`")),
    }
}

pub fn decode_chunk(t: &Term) -> Result<Chunk, String> {
    let Term::App(f, args) = t else {
        return Err(format!("expected a chunk term, found `{t}`"));
    };
    let [id, ty, Term::List(slots)] = args.as_slice() else {
        return Err(format!("malformed chunk term `{t}`"));
    };
    if f != "chunk" {
        return Err(format!("expected a chunk term, found `{t}`"));
    }
    let slots = slots
        .iter()
        .map(|p| match p {
            Term::App(f, kv) if f.is_empty() && kv.len() == 2 => Ok((sym(&kv[0])?, sym(&kv[1])?)),
            other => Err(format!("malformed slot-value pair `{other}`")),
        })
        .collect::<Result<_, _>>()?;
    Ok(Chunk {
        id: sym(id)?,
        ty: sym(ty)?,
        slots,
    })
}

pub fn decode_store(t: &Term) -> Result<ChunkStore, String> {
    let Term::List(items) = t else {
        return Err(format!("expected a chunk list, found `{t}`"));
    };
    let chunks = items
        .iter()
        .map(decode_chunk)
        .collect::<Result<Vec<_>, _>>()?;
    ChunkStore::from_chunks(chunks).map_err(|e| e.to_string())
}

pub fn atom_term(a: &Atom) -> Term {
    if a.args.is_empty() {
        Term::Sym(a.pred.clone())
    } else {
        Term::App(
            a.pred.to_string(),
            a.args.iter().cloned().map(Term::Sym).collect(),
        )
    }
}

pub fn term_atom(t: &Term) -> Result<Atom, String> {
    match t {
        Term::Sym(s) => Ok(Atom {
            pred: s.clone(),
            args: vec![],
        }),
        Term::App(f, args) if !f.is_empty() => Ok(Atom {
            pred: Symbol::new(f),
            args: args.iter().map(sym).collect::<Result<_, _>>()?,
        }),
        other => Err(format!("`{other}` is not a ground atom")),
    }
}

/// Decodes a cognitive-state pattern `[(b,C,E), ...]`.
pub fn decode_cogstate(t: &Term) -> Result<BTreeMap<Symbol, BufferContent>, String> {
    let Term::List(items) = t else {
        return Err(format!("expected a buffer list, found `{t}`"));
    };
    items
        .iter()
        .map(|item| match item {
            Term::App(f, args) if f.is_empty() && args.len() == 3 => {
                let delay = match &args[2] {
                    Term::Num(n) => Delay::from_number(*n),
                    _ => None,
                }
                .ok_or_else(|| format!("bad delay in `{item}`"))?;
                Ok((sym(&args[0])?, BufferContent::new(sym(&args[1])?, delay)))
            }
            other => Err(format!("malformed buffer entry `{other}`")),
        })
        .collect()
}

fn gamma_constraint(b: &Symbol, c: &BufferContent) -> UserConstraint {
    UserConstraint::new(
        "gamma",
        vec![
            Term::Sym(b.clone()),
            Term::Sym(c.chunk.clone()),
            Term::Num(c.delay.as_number()),
        ],
    )
}

/// `delta(store)` plus one `gamma(b,id,delay)` per buffer; atoms become
/// built-in facts.
pub fn chr_of_state(state: &AbstractState) -> ChrState {
    let mut goal = vec![UserConstraint::new(
        "delta",
        vec![chr_of_store(&state.store)],
    )];
    goal.extend(state.gamma.iter().map(|(b, c)| gamma_constraint(b, c)));
    ChrState {
        goal,
        builtins: state
            .upsilon
            .iter()
            .map(|a| Builtin::Fact(atom_term(a)))
            .collect(),
        globals: BTreeSet::new(),
    }
}

/// Reads a ground goal of the translated shape back into a state.
pub fn state_of_goal(goal: &[UserConstraint], facts: &[Atom]) -> Option<AbstractState> {
    let mut store = None;
    let mut gamma = BTreeMap::new();
    for c in goal {
        match (c.pred.as_str(), c.args.as_slice()) {
            ("delta", [d]) if store.is_none() => store = Some(decode_store(d).ok()?),
            ("gamma", [Term::Sym(b), Term::Sym(id), Term::Num(d)]) => {
                let content = BufferContent::new(id.clone(), Delay::from_number(*d)?);
                if gamma.insert(b.clone(), content).is_some() {
                    return None;
                }
            }
            _ => return None,
        }
    }
    Some(AbstractState::new(store?, gamma, facts.to_vec()))
}

/// Names of the generated variables of a rule translation.
#[derive(Debug, Clone)]
pub struct VarPlan {
    pub buffers: Vec<Symbol>,
    user: BTreeMap<String, String>,
}

pub const STORE_VAR: &str = "D";
pub const RESULT_STORE_VAR: &str = "Dp";
pub const MERGED_STORE_VAR: &str = "Ds";
pub const NO_RULE: &str = "no";

impl VarPlan {
    pub fn new(rule: &Rule, buffers: &[Symbol]) -> VarPlan {
        let mut plan = VarPlan {
            buffers: buffers.to_vec(),
            user: BTreeMap::new(),
        };
        let mut taken: BTreeSet<String> = [STORE_VAR, RESULT_STORE_VAR, MERGED_STORE_VAR]
            .into_iter()
            .map(String::from)
            .collect();
        for b in buffers {
            taken.extend([
                plan.cvar(b),
                plan.dvar(b),
                plan.resstore(b),
                plan.resid(b),
                plan.resdelay(b),
                plan.mergeid(b),
            ]);
        }
        for v in rule.vars() {
            let mut name = v.as_str().replace('#', "_");
            while taken.contains(&name) {
                name.push_str("_u");
            }
            taken.insert(name.clone());
            plan.user.insert(v.as_str().to_string(), name);
        }
        plan
    }

    pub fn cvar(&self, b: &Symbol) -> String {
        format!("C_{b}")
    }
    pub fn dvar(&self, b: &Symbol) -> String {
        format!("E_{b}")
    }
    pub fn resstore(&self, b: &Symbol) -> String {
        format!("Dres_{b}")
    }
    pub fn resid(&self, b: &Symbol) -> String {
        format!("Cres_{b}")
    }
    pub fn resdelay(&self, b: &Symbol) -> String {
        format!("Eres_{b}")
    }
    pub fn mergeid(&self, b: &Symbol) -> String {
        format!("M_{b}")
    }

    /// `[(b,C_b,E_b), ...]` over all buffers in order.
    pub fn cogstate(&self) -> Term {
        Term::List(
            self.buffers
                .iter()
                .map(|b| {
                    Term::tuple(vec![
                        Term::Sym(b.clone()),
                        Term::var(self.cvar(b)),
                        Term::var(self.dvar(b)),
                    ])
                })
                .collect(),
        )
    }

    pub fn value(&self, v: &Value) -> Term {
        match v {
            Value::Const(c) => Term::Sym(c.clone()),
            Value::Var(x) => Term::var(self.user[x.as_str()].clone()),
        }
    }
}

fn pairs_term(plan: &VarPlan, pairs: &[crate::ast::SlotValuePair]) -> Term {
    Term::List(
        pairs
            .iter()
            .map(|p| Term::tuple(vec![Term::Sym(p.slot.clone()), plan.value(&p.value)]))
            .collect(),
    )
}

/// Translates a rule in set normal form. `buffers` lists every buffer of
/// the model in sorted order.
pub fn chr_of_rule(
    rule: &Rule,
    types: &TypeTable,
    buffers: &[Symbol],
) -> Result<ChrRule, TranslateError> {
    if !is_set_normal_form(rule, types) {
        return Err(TranslateError::NotNormalized(rule.name.clone()));
    }
    let mut buffers = buffers.to_vec();
    buffers.sort();
    let plan = VarPlan::new(rule, &buffers);
    let var = |name: &str| Term::var(name);

    let mut removed = vec![UserConstraint::new("delta", vec![var(STORE_VAR)])];
    for b in &buffers {
        removed.push(UserConstraint::new(
            "gamma",
            vec![Term::Sym(b.clone()), var(&plan.cvar(b)), var(&plan.dvar(b))],
        ));
    }

    let mut guard = Vec::new();
    for t in &rule.lhs {
        let pattern = Term::app(
            "chunk",
            vec![
                var(&plan.cvar(&t.buffer)),
                Term::Sym(t.ty.clone()),
                pairs_term(&plan, &t.pairs),
            ],
        );
        guard.push(Builtin::In(pattern, var(STORE_VAR)));
        guard.push(Builtin::Eq(var(&plan.dvar(&t.buffer)), Term::Num(0)));
    }

    let mut body_user = vec![UserConstraint::new("delta", vec![var(MERGED_STORE_VAR)])];
    for b in &buffers {
        let args = if rule.rhs.iter().any(|a| &a.buffer == b) {
            vec![
                Term::Sym(b.clone()),
                var(&plan.mergeid(b)),
                var(&plan.resdelay(b)),
            ]
        } else {
            vec![Term::Sym(b.clone()), var(&plan.cvar(b)), var(&plan.dvar(b))]
        };
        body_user.push(UserConstraint::new("gamma", args));
    }

    let mut body_builtins = Vec::new();
    for a in &rule.rhs {
        let (op, ty) = match a.kind {
            ActionKind::Modify => ("=", Term::sym("_")),
            ActionKind::Request => (
                "+",
                Term::Sym(
                    a.ty.clone()
                        .unwrap_or_else(|| Symbol::new(crate::store::CHUNK_TYPE)),
                ),
            ),
        };
        body_builtins.push(Builtin::Action {
            action: Term::app(
                op,
                vec![Term::Sym(a.buffer.clone()), ty, pairs_term(&plan, &a.pairs)],
            ),
            store: var(STORE_VAR),
            cogstate: plan.cogstate(),
            res_store: var(&plan.resstore(&a.buffer)),
            res_id: var(&plan.resid(&a.buffer)),
            res_delay: var(&plan.resdelay(&a.buffer)),
        });
    }
    body_builtins.push(Builtin::Merge {
        stores: Term::List(
            rule.rhs
                .iter()
                .map(|a| var(&plan.resstore(&a.buffer)))
                .collect(),
        ),
        result: var(RESULT_STORE_VAR),
    });
    body_builtins.push(Builtin::Merge {
        stores: Term::List(vec![var(STORE_VAR), var(RESULT_STORE_VAR)]),
        result: var(MERGED_STORE_VAR),
    });
    for a in &rule.rhs {
        body_builtins.push(Builtin::Map {
            left: var(STORE_VAR),
            right: var(RESULT_STORE_VAR),
            id: var(&plan.resid(&a.buffer)),
            mapped: var(&plan.mergeid(&a.buffer)),
        });
    }

    Ok(ChrRule {
        name: rule.name.to_string(),
        kept: vec![],
        removed,
        guard,
        body_user,
        body_builtins,
    })
}

/// `no @ gamma(B,C,D) <=> D > 0 | gamma(B,C,0)`
pub fn no_rule() -> ChrRule {
    let gamma = |d: Term| UserConstraint::new("gamma", vec![Term::var("B"), Term::var("C"), d]);
    ChrRule {
        name: NO_RULE.into(),
        kept: vec![],
        removed: vec![gamma(Term::var("D"))],
        guard: vec![Builtin::Gt(Term::var("D"), Term::Num(0))],
        body_user: vec![gamma(Term::Num(0))],
        body_builtins: vec![],
    }
}

/// Translated rules in declaration order followed by the `no` rule.
pub fn chr_of_program(program: &Program) -> Result<Vec<ChrRule>, TranslateError> {
    let mut out = program
        .rules
        .iter()
        .map(|r| chr_of_rule(r, &program.types, &program.buffers))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(no_rule());
    Ok(out)
}

/// Validates and normalizes `model`, then translates it.
pub fn chr_of_model(model: &Model) -> Result<Vec<ChrRule>, TranslateError> {
    let program = Program::new(model).map_err(|d| {
        TranslateError::Invalid(
            d.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    chr_of_program(&program)
}
