//! Rule and no-rule transitions.

use std::fmt;

use crate::ast::{AbstractState, BufferContent, Delay, Model};
use crate::ast::{Diagnostic, Rule};
use crate::engine::config::ArchitectureConfig;
use crate::engine::effects::{interpret_rule, Effect};
use crate::engine::matching::select;
use crate::engine::normal_form::{set_normal_form, Normalized};
use crate::engine::EngineError;
use crate::store::{merge, Symbol, TypeTable};

/// Merges the effect's store into the state's, overrides the touched
/// buffers, and adds the new atoms.
pub fn apply_transition(
    state: &AbstractState,
    effect: &Effect,
) -> Result<AbstractState, EngineError> {
    let (store, map) = merge(&state.store, &effect.delta)?;
    let mut gamma = state.gamma.clone();
    for (b, c) in &effect.gamma {
        gamma.insert(b.clone(), BufferContent::new(map.apply(&c.chunk), c.delay));
    }
    let upsilon = state
        .upsilon
        .iter()
        .chain(&effect.upsilon)
        .cloned()
        .collect();
    Ok(AbstractState::new(store, gamma, upsilon))
}

/// One successor per pending buffer, with that buffer made visible.
pub fn no_rule_transitions(state: &AbstractState) -> Vec<(Symbol, AbstractState)> {
    state
        .pending_buffers()
        .map(|b| {
            let mut next = state.clone();
            if let Some(c) = next.gamma.get_mut(b) {
                c.delay = Delay::Visible;
            }
            (b.clone(), next)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Apply(Symbol),
    No,
}

impl Label {
    /// The name of the corresponding CHR rule.
    pub fn rule_name(&self) -> &str {
        match self {
            Label::Apply(r) => r.as_str(),
            Label::No => "no",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Apply(r) => write!(f, "apply({r})"),
            Label::No => f.write_str("no"),
        }
    }
}

/// A validated model with its rules in set normal form.
#[derive(Debug, Clone)]
pub struct Program {
    pub types: TypeTable,
    pub buffers: Vec<Symbol>,
    pub rules: Vec<Rule>,
    /// Names of rules that can never fire.
    pub dropped: Vec<Symbol>,
    pub config: ArchitectureConfig,
}

impl Program {
    pub fn new(model: &Model) -> Result<Program, Vec<Diagnostic>> {
        Program::with_config(model, ArchitectureConfig::default())
    }

    pub fn with_config(
        model: &Model,
        config: ArchitectureConfig,
    ) -> Result<Program, Vec<Diagnostic>> {
        let diags = crate::ast::validate(model);
        if !diags.is_empty() {
            return Err(diags);
        }
        let mut rules = Vec::new();
        let mut dropped = Vec::new();
        for r in &model.rules {
            match set_normal_form(r, &model.types) {
                Normalized::Rule(n) => rules.push(n),
                Normalized::Dropped => dropped.push(r.name.clone()),
            }
        }
        Ok(Program {
            types: model.types.clone(),
            buffers: model.buffer_names(),
            rules,
            dropped,
            config,
        })
    }

    /// All successors: rule transitions in rule order (one per effect),
    /// then no-rule transitions in buffer order.
    pub fn successors(
        &self,
        state: &AbstractState,
    ) -> Result<Vec<(Label, AbstractState)>, EngineError> {
        let mut out = Vec::new();
        for (rule, theta) in select(state, &self.rules) {
            for effect in interpret_rule(rule, &theta, state, &self.types, &self.config)? {
                out.push((
                    Label::Apply(rule.name.clone()),
                    apply_transition(state, &effect)?,
                ));
            }
        }
        out.extend(
            no_rule_transitions(state)
                .into_iter()
                .map(|(_, s)| (Label::No, s)),
        );
        Ok(out)
    }
}
