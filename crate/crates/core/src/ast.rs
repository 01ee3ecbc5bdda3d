//! Syntax of models: buffer tests, actions, rules, declarations, and the
//! abstract state a model starts in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::parser::Span;
use crate::store::{Chunk, ChunkStore, Symbol, TypeTable, Variable};

/// Right-hand side of a slot-value pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Const(Symbol),
    Var(Variable),
}

impl Value {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Value::Var(v) => Some(v),
            Value::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Symbol> {
        match self {
            Value::Const(c) => Some(c),
            Value::Var(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) => c.fmt(f),
            Value::Var(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlotValuePair {
    pub slot: Symbol,
    pub value: Value,
    pub span: Span,
}

impl SlotValuePair {
    pub fn new(slot: impl Into<Symbol>, value: Value) -> Self {
        SlotValuePair {
            slot: slot.into(),
            value,
            span: Span::default(),
        }
    }
}

/// `buffer: type { slot: value, ... }` on the left-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BufferTest {
    pub buffer: Symbol,
    pub ty: Symbol,
    pub pairs: Vec<SlotValuePair>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    /// Overwrite slots of the buffer's chunk with a fresh copy (`=`).
    Modify,
    /// Ask the buffer's module for a chunk (`+`).
    Request,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub buffer: Symbol,
    /// Requested type; modifications keep the incumbent type and carry `None`.
    pub ty: Option<Symbol>,
    pub pairs: Vec<SlotValuePair>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: Symbol,
    pub lhs: Vec<BufferTest>,
    pub rhs: Vec<Action>,
    pub span: Span,
}

impl Rule {
    pub fn lhs_vars(&self) -> BTreeSet<Variable> {
        pair_vars(self.lhs.iter().flat_map(|t| &t.pairs))
    }

    pub fn rhs_vars(&self) -> BTreeSet<Variable> {
        pair_vars(self.rhs.iter().flat_map(|a| &a.pairs))
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut v = self.lhs_vars();
        v.extend(self.rhs_vars());
        v
    }

    /// The test on `buffer`, if any.
    pub fn test_for(&self, buffer: &Symbol) -> Option<&BufferTest> {
        self.lhs.iter().find(|t| &t.buffer == buffer)
    }

    /// Replaces every value by `f(value)`, in tests and actions alike.
    pub fn map_values(&self, f: &impl Fn(&Value) -> Value) -> Rule {
        let map_pairs = |ps: &[SlotValuePair]| {
            ps.iter()
                .map(|p| SlotValuePair {
                    slot: p.slot.clone(),
                    value: f(&p.value),
                    span: p.span,
                })
                .collect()
        };
        Rule {
            name: self.name.clone(),
            lhs: self
                .lhs
                .iter()
                .map(|t| BufferTest {
                    buffer: t.buffer.clone(),
                    ty: t.ty.clone(),
                    pairs: map_pairs(&t.pairs),
                    span: t.span,
                })
                .collect(),
            rhs: self
                .rhs
                .iter()
                .map(|a| Action {
                    kind: a.kind,
                    buffer: a.buffer.clone(),
                    ty: a.ty.clone(),
                    pairs: map_pairs(&a.pairs),
                    span: a.span,
                })
                .collect(),
            span: self.span,
        }
    }
}

fn pair_vars<'a>(pairs: impl Iterator<Item = &'a SlotValuePair>) -> BTreeSet<Variable> {
    pairs.filter_map(|p| p.value.as_var().cloned()).collect()
}

/// `chunk ID : TYPE { slot: value, ... }`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChunkDecl {
    pub id: Symbol,
    pub ty: Symbol,
    pub pairs: Vec<(Symbol, Symbol)>,
    pub span: Span,
}

/// `buffer NAME = ID [pending]`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BufferDecl {
    pub name: Symbol,
    pub chunk: Symbol,
    pub pending: bool,
    pub span: Span,
}

/// An entry of the `dm { ... }` declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DmEntry {
    pub id: Symbol,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub types: TypeTable,
    pub chunks: Vec<ChunkDecl>,
    pub dm: Vec<DmEntry>,
    pub buffers: Vec<BufferDecl>,
    pub rules: Vec<Rule>,
}

impl Model {
    /// Declared buffer names in declaration order.
    pub fn buffer_names(&self) -> Vec<Symbol> {
        self.buffers.iter().map(|b| b.name.clone()).collect()
    }

    /// The start state: all declared chunks plus `nil`, the declared buffer
    /// contents, and one `dm(id)` atom per declarative-memory entry.
    pub fn initial_state(&self) -> Result<AbstractState, Vec<Diagnostic>> {
        let diags = validate(self);
        if !diags.is_empty() {
            return Err(diags);
        }
        let mut store = ChunkStore::with_nil();
        for decl in &self.chunks {
            let chunk = Chunk::typed(
                &self.types,
                decl.id.clone(),
                decl.ty.clone(),
                decl.pairs.iter().cloned(),
            )
            .expect("validated chunk declaration");
            store.insert(chunk).expect("validated unique ids");
        }
        let gamma = self
            .buffers
            .iter()
            .map(|b| {
                let delay = if b.pending {
                    Delay::Pending
                } else {
                    Delay::Visible
                };
                (b.name.clone(), BufferContent::new(b.chunk.clone(), delay))
            })
            .collect();
        let upsilon = self
            .dm
            .iter()
            .map(|e| Atom::new("dm", [e.id.clone()]))
            .collect();
        Ok(AbstractState::new(store, gamma, upsilon))
    }
}

/// Visibility of a buffer's chunk. Only two delays ever arise in the
/// untimed semantics: zero and "not yet visible".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Delay {
    Visible,
    Pending,
}

impl Delay {
    pub fn as_number(self) -> i64 {
        match self {
            Delay::Visible => 0,
            Delay::Pending => 1,
        }
    }

    pub fn from_number(n: i64) -> Option<Delay> {
        match n {
            0 => Some(Delay::Visible),
            1 => Some(Delay::Pending),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BufferContent {
    pub chunk: Symbol,
    pub delay: Delay,
}

impl BufferContent {
    pub fn new(chunk: Symbol, delay: Delay) -> Self {
        BufferContent { chunk, delay }
    }
}

/// A ground atom of additional information, e.g. `dm(b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Symbol>,
}

impl Atom {
    pub fn new(pred: &str, args: impl IntoIterator<Item = Symbol>) -> Self {
        Atom {
            pred: Symbol::new(pred),
            args: args.into_iter().collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            let args: Vec<_> = self.args.iter().map(Symbol::as_str).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

/// `⟨store; gamma; upsilon⟩`. The untimed semantics fixes time at zero, so
/// no clock is stored. `upsilon` is kept sorted as a multiset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractState {
    pub store: ChunkStore,
    pub gamma: BTreeMap<Symbol, BufferContent>,
    pub upsilon: Vec<Atom>,
}

impl AbstractState {
    pub fn new(
        store: ChunkStore,
        gamma: BTreeMap<Symbol, BufferContent>,
        mut upsilon: Vec<Atom>,
    ) -> Self {
        upsilon.sort();
        AbstractState {
            store,
            gamma,
            upsilon,
        }
    }

    pub fn pending_buffers(&self) -> impl Iterator<Item = &Symbol> {
        self.gamma
            .iter()
            .filter(|(_, c)| c.delay == Delay::Pending)
            .map(|(b, _)| b)
    }

    /// The chunk currently held by `buffer`.
    pub fn buffer_chunk(&self, buffer: &Symbol) -> Option<&Chunk> {
        self.gamma
            .get(buffer)
            .and_then(|c| self.store.get(&c.chunk))
    }

    /// Applies an identifier renaming to the store, gamma and upsilon.
    pub fn renamed(&self, rename: &impl Fn(&Symbol) -> Symbol) -> AbstractState {
        AbstractState::new(
            self.store.renamed(rename),
            self.gamma
                .iter()
                .map(|(b, c)| (b.clone(), BufferContent::new(rename(&c.chunk), c.delay)))
                .collect(),
            self.upsilon
                .iter()
                .map(|a| Atom {
                    pred: a.pred.clone(),
                    args: a.args.iter().map(rename).collect(),
                })
                .collect(),
        )
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "store:")?;
        for c in self.store.iter() {
            writeln!(f, "  chunk {c}")?;
        }
        writeln!(f, "gamma:")?;
        for (b, c) in &self.gamma {
            let pending = match c.delay {
                Delay::Visible => "",
                Delay::Pending => " pending",
            };
            writeln!(f, "  {b} = {}{pending}", c.chunk)?;
        }
        let atoms: Vec<String> = self.upsilon.iter().map(Atom::to_string).collect();
        writeln!(f, "upsilon: {}", atoms.join(", "))
    }
}

/// A well-formedness violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticKind {
    #[error("{context}: unknown type `{ty}`")]
    UnknownType { context: String, ty: Symbol },
    #[error("{context}: type `{ty}` has no slot `{slot}`")]
    UnknownSlot {
        context: String,
        ty: Symbol,
        slot: Symbol,
    },
    #[error("chunk `{id}`: slot `{slot}` of type `{ty}` has no value")]
    MissingSlot {
        id: Symbol,
        ty: Symbol,
        slot: Symbol,
    },
    #[error("chunk `{id}`: slot `{slot}` is given twice")]
    DuplicateSlot { id: Symbol, slot: Symbol },
    #[error("chunk `{0}` is declared twice")]
    DuplicateChunk(Symbol),
    #[error("{context}: unknown chunk `{id}`")]
    UnknownChunk { context: String, id: Symbol },
    #[error("{context}: unknown buffer `{buffer}`")]
    UnknownBuffer { context: String, buffer: Symbol },
    #[error("buffer `{0}` is declared twice")]
    DuplicateBuffer(Symbol),
    #[error("rule `{0}` is declared twice")]
    DuplicateRule(Symbol),
    #[error("rule name `{0}` is reserved for the no-rule transition")]
    ReservedRuleName(Symbol),
    #[error("rule `{rule}`: variable `{var}` occurs on the right-hand side only")]
    NewVariableOnRhs { rule: Symbol, var: Variable },
    #[error("rule `{rule}`: more than one action on buffer `{buffer}`")]
    DuplicateActionBuffer { rule: Symbol, buffer: Symbol },
    #[error("rule `{rule}`: more than one test on buffer `{buffer}`")]
    DuplicateTestBuffer { rule: Symbol, buffer: Symbol },
    #[error("rule `{rule}`: modification of untested buffer `{buffer}`")]
    ModifyUntestedBuffer { rule: Symbol, buffer: Symbol },
    #[error("rule `{rule}`: modification of `{buffer}` sets slot `{slot}` twice")]
    DuplicateActionSlot {
        rule: Symbol,
        buffer: Symbol,
        slot: Symbol,
    },
    #[error("rule `{rule}`: a request on `{buffer}` needs a type")]
    UntypedRequest { rule: Symbol, buffer: Symbol },
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, span: Span) -> Self {
        Diagnostic { kind, span }
    }
}

/// Checks every well-formedness condition of a model. An empty result means
/// the model is valid.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let types = &model.types;

    let mut ids: BTreeSet<Symbol> = BTreeSet::new();
    ids.insert(Symbol::nil());
    for decl in &model.chunks {
        if decl.id.is_nil() && decl.ty.as_str() == crate::store::CHUNK_TYPE && decl.pairs.is_empty()
        {
            continue;
        }
        if !ids.insert(decl.id.clone()) {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateChunk(decl.id.clone()),
                decl.span,
            ));
        }
    }

    for decl in &model.chunks {
        let context = format!("chunk `{}`", decl.id);
        let Some(slots) = types.slots(&decl.ty) else {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownType {
                    context,
                    ty: decl.ty.clone(),
                },
                decl.span,
            ));
            continue;
        };
        let mut seen = BTreeSet::new();
        for (slot, value) in &decl.pairs {
            if !seen.insert(slot) {
                out.push(Diagnostic::new(
                    DiagnosticKind::DuplicateSlot {
                        id: decl.id.clone(),
                        slot: slot.clone(),
                    },
                    decl.span,
                ));
            }
            if !slots.contains(slot) {
                out.push(Diagnostic::new(
                    DiagnosticKind::UnknownSlot {
                        context: context.clone(),
                        ty: decl.ty.clone(),
                        slot: slot.clone(),
                    },
                    decl.span,
                ));
            }
            if !ids.contains(value) {
                out.push(Diagnostic::new(
                    DiagnosticKind::UnknownChunk {
                        context: context.clone(),
                        id: value.clone(),
                    },
                    decl.span,
                ));
            }
        }
        for slot in slots {
            if !seen.contains(slot) {
                out.push(Diagnostic::new(
                    DiagnosticKind::MissingSlot {
                        id: decl.id.clone(),
                        ty: decl.ty.clone(),
                        slot: slot.clone(),
                    },
                    decl.span,
                ));
            }
        }
    }

    for entry in &model.dm {
        if !ids.contains(&entry.id) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownChunk {
                    context: "dm".into(),
                    id: entry.id.clone(),
                },
                entry.span,
            ));
        }
    }

    let mut buffers = BTreeSet::new();
    for b in &model.buffers {
        if !buffers.insert(b.name.clone()) {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateBuffer(b.name.clone()),
                b.span,
            ));
        }
        if !ids.contains(&b.chunk) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownChunk {
                    context: format!("buffer `{}`", b.name),
                    id: b.chunk.clone(),
                },
                b.span,
            ));
        }
    }

    let mut rule_names = BTreeSet::new();
    for rule in &model.rules {
        if rule.name.as_str() == "no" {
            out.push(Diagnostic::new(
                DiagnosticKind::ReservedRuleName(rule.name.clone()),
                rule.span,
            ));
        }
        if !rule_names.insert(rule.name.clone()) {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateRule(rule.name.clone()),
                rule.span,
            ));
        }
        validate_rule(rule, types, &buffers, &mut out);
    }
    out
}

fn validate_rule(
    rule: &Rule,
    types: &TypeTable,
    buffers: &BTreeSet<Symbol>,
    out: &mut Vec<Diagnostic>,
) {
    let check_pairs =
        |context: &str, ty: &Symbol, pairs: &[SlotValuePair], out: &mut Vec<Diagnostic>| {
            let Some(slots) = types.slots(ty) else {
                return;
            };
            for p in pairs {
                if !slots.contains(&p.slot) {
                    out.push(Diagnostic::new(
                        DiagnosticKind::UnknownSlot {
                            context: context.to_string(),
                            ty: ty.clone(),
                            slot: p.slot.clone(),
                        },
                        p.span,
                    ));
                }
            }
        };

    let mut tested = BTreeSet::new();
    for test in &rule.lhs {
        let context = format!("rule `{}`, test on `{}`", rule.name, test.buffer);
        if !buffers.contains(&test.buffer) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownBuffer {
                    context: context.clone(),
                    buffer: test.buffer.clone(),
                },
                test.span,
            ));
        }
        if !tested.insert(test.buffer.clone()) {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateTestBuffer {
                    rule: rule.name.clone(),
                    buffer: test.buffer.clone(),
                },
                test.span,
            ));
        }
        if !types.contains(&test.ty) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownType {
                    context: context.clone(),
                    ty: test.ty.clone(),
                },
                test.span,
            ));
        }
        check_pairs(&context, &test.ty, &test.pairs, out);
    }

    let mut acted = BTreeSet::new();
    for action in &rule.rhs {
        let context = format!("rule `{}`, action on `{}`", rule.name, action.buffer);
        if !buffers.contains(&action.buffer) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnknownBuffer {
                    context: context.clone(),
                    buffer: action.buffer.clone(),
                },
                action.span,
            ));
        }
        if !acted.insert(action.buffer.clone()) {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateActionBuffer {
                    rule: rule.name.clone(),
                    buffer: action.buffer.clone(),
                },
                action.span,
            ));
        }
        match action.kind {
            ActionKind::Modify => {
                let mut seen = BTreeSet::new();
                for p in &action.pairs {
                    if !seen.insert(&p.slot) {
                        out.push(Diagnostic::new(
                            DiagnosticKind::DuplicateActionSlot {
                                rule: rule.name.clone(),
                                buffer: action.buffer.clone(),
                                slot: p.slot.clone(),
                            },
                            p.span,
                        ));
                    }
                }
                match rule.test_for(&action.buffer) {
                    Some(test) => check_pairs(&context, &test.ty, &action.pairs, out),
                    None => out.push(Diagnostic::new(
                        DiagnosticKind::ModifyUntestedBuffer {
                            rule: rule.name.clone(),
                            buffer: action.buffer.clone(),
                        },
                        action.span,
                    )),
                }
            }
            ActionKind::Request => match &action.ty {
                Some(ty) if types.contains(ty) => check_pairs(&context, ty, &action.pairs, out),
                Some(ty) => out.push(Diagnostic::new(
                    DiagnosticKind::UnknownType {
                        context,
                        ty: ty.clone(),
                    },
                    action.span,
                )),
                None => out.push(Diagnostic::new(
                    DiagnosticKind::UntypedRequest {
                        rule: rule.name.clone(),
                        buffer: action.buffer.clone(),
                    },
                    action.span,
                )),
            },
        }
    }

    let lhs_vars = rule.lhs_vars();
    for action in &rule.rhs {
        for p in &action.pairs {
            if let Value::Var(v) = &p.value {
                if !lhs_vars.contains(v) {
                    out.push(Diagnostic::new(
                        DiagnosticKind::NewVariableOnRhs {
                            rule: rule.name.clone(),
                            var: v.clone(),
                        },
                        p.span,
                    ));
                }
            }
        }
    }
}
