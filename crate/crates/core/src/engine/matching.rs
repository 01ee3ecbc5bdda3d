//! Matching buffer tests against states, and rule selection.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{AbstractState, Action, BufferTest, Delay, Rule, Value};
use crate::store::{Symbol, Variable};

/// Variable bindings produced by matching.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(pub BTreeMap<Variable, Symbol>);

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, v: &Variable) -> Option<&Symbol> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Variable, c: Symbol) {
        self.0.insert(v, c);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Symbol)> {
        self.0.iter()
    }

    /// `value` with its variable replaced, if bound.
    pub fn apply(&self, value: &Value) -> Value {
        match value {
            Value::Var(v) => match self.0.get(v) {
                Some(c) => Value::Const(c.clone()),
                None => value.clone(),
            },
            Value::Const(_) => value.clone(),
        }
    }

    pub fn apply_action(&self, action: &Action) -> Action {
        let mut a = action.clone();
        for p in &mut a.pairs {
            p.value = self.apply(&p.value);
        }
        a
    }
}

impl FromIterator<(Variable, Symbol)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Variable, Symbol)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|(v, c)| format!("{v}->{c}")).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Extends `theta` so that `test` matches `state`, or returns `None`.
pub fn match_test(test: &BufferTest, state: &AbstractState, theta: &mut Substitution) -> bool {
    let Some(content) = state.gamma.get(&test.buffer) else {
        return false;
    };
    if content.delay != Delay::Visible {
        return false;
    }
    let Some(chunk) = state.store.get(&content.chunk) else {
        return false;
    };
    if chunk.ty != test.ty {
        return false;
    }
    for p in &test.pairs {
        let actual = match chunk.value(&p.slot) {
            Some(v) => state.store.resolve(v),
            None => return false,
        };
        match &p.value {
            Value::Const(c) => {
                if *c != actual {
                    return false;
                }
            }
            Value::Var(v) => match theta.get(v) {
                Some(bound) if *bound != actual => return false,
                Some(_) => {}
                None => theta.insert(v.clone(), actual),
            },
        }
    }
    true
}

/// The smallest substitution under which every test of `rule` matches.
pub fn match_rule(rule: &Rule, state: &AbstractState) -> Option<Substitution> {
    let mut theta = Substitution::new();
    rule.lhs
        .iter()
        .all(|t| match_test(t, state, &mut theta))
        .then_some(theta)
}

/// All applicable rules together with their bindings, in rule order.
pub fn select<'r>(state: &AbstractState, rules: &'r [Rule]) -> Vec<(&'r Rule, Substitution)> {
    rules
        .iter()
        .filter_map(|r| match_rule(r, state).map(|t| (r, t)))
        .collect()
}
