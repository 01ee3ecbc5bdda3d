//! Set normal form: every buffer test names every slot of its type exactly
//! once.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{BufferTest, Rule, SlotValuePair, Value};
use crate::store::{TypeTable, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Rule(Rule),
    /// The rule demands two different constants in one slot and can never
    /// fire.
    Dropped,
}

impl Normalized {
    pub fn rule(self) -> Option<Rule> {
        match self {
            Normalized::Rule(r) => Some(r),
            Normalized::Dropped => None,
        }
    }
}

/// Whether every test of `rule` names each slot of its type exactly once.
pub fn is_set_normal_form(rule: &Rule, types: &TypeTable) -> bool {
    rule.lhs.iter().all(|t| {
        let Some(slots) = types.slots(&t.ty) else {
            return false;
        };
        t.pairs.len() == slots.len()
            && slots
                .iter()
                .all(|s| t.pairs.iter().filter(|p| &p.slot == s).count() == 1)
    })
}

struct FreshVars {
    used: BTreeSet<Variable>,
    next: usize,
}

impl FreshVars {
    fn fresh(&mut self) -> Variable {
        loop {
            let v = Variable::new(format!("V#{}", self.next));
            self.next += 1;
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Union-find over the values that must coincide.
struct Classes {
    parent: BTreeMap<Value, Value>,
}

impl Classes {
    fn find(&mut self, v: &Value) -> Value {
        let p = self.parent.get(v).cloned().unwrap_or_else(|| v.clone());
        if &p == v {
            return p;
        }
        let root = self.find(&p);
        self.parent.insert(v.clone(), root.clone());
        root
    }

    fn union(&mut self, a: &Value, b: &Value) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(rb, ra);
        }
    }
}

/// Brings a validated rule into set normal form. Slot values that must be
/// equal are unified over the whole rule: a class containing a constant
/// becomes that constant, a class of several variables becomes a fresh
/// variable `V#k`. Missing slots get fresh variables.
pub fn set_normal_form(rule: &Rule, types: &TypeTable) -> Normalized {
    let mut fresh = FreshVars {
        used: rule.vars(),
        next: 0,
    };
    let mut classes = Classes {
        parent: BTreeMap::new(),
    };
    // values in order of first occurrence, for deterministic fresh names
    let mut order: Vec<Value> = Vec::new();
    for test in &rule.lhs {
        for p in &test.pairs {
            if !order.contains(&p.value) {
                order.push(p.value.clone());
            }
        }
        let mut by_slot: BTreeMap<_, Vec<&Value>> = BTreeMap::new();
        for p in &test.pairs {
            by_slot.entry(&p.slot).or_default().push(&p.value);
        }
        for values in by_slot.values() {
            for w in values.windows(2) {
                classes.union(w[0], w[1]);
            }
        }
    }

    let mut members: BTreeMap<Value, Vec<Value>> = BTreeMap::new();
    for v in &order {
        let root = classes.find(v);
        members.entry(root).or_default().push(v.clone());
    }
    let mut theta: BTreeMap<Value, Value> = BTreeMap::new();
    let mut done = BTreeSet::new();
    for v in &order {
        let root = classes.find(v);
        if !done.insert(root.clone()) {
            continue;
        }
        let class = &members[&root];
        if class.len() < 2 {
            continue;
        }
        let consts: BTreeSet<_> = class.iter().filter_map(Value::as_const).collect();
        let target = match consts.len() {
            0 => Value::Var(fresh.fresh()),
            1 => Value::Const((*consts.iter().next().unwrap()).clone()),
            _ => return Normalized::Dropped,
        };
        for m in class {
            theta.insert(m.clone(), target.clone());
        }
    }

    let substituted = rule.map_values(&|v| theta.get(v).cloned().unwrap_or_else(|| v.clone()));
    let lhs = substituted
        .lhs
        .iter()
        .map(|t| complete_test(t, types, &mut fresh))
        .collect();
    Normalized::Rule(Rule { lhs, ..substituted })
}

fn complete_test(test: &BufferTest, types: &TypeTable, fresh: &mut FreshVars) -> BufferTest {
    let slots = types.slots(&test.ty).unwrap_or(&[]);
    let pairs = slots
        .iter()
        .map(|s| match test.pairs.iter().find(|p| &p.slot == s) {
            Some(p) => p.clone(),
            None => SlotValuePair {
                slot: s.clone(),
                value: Value::Var(fresh.fresh()),
                span: test.span,
            },
        })
        .collect();
    BufferTest {
        pairs,
        ..test.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    fn rule(src: &str) -> (Rule, TypeTable) {
        let m = parse_model(&format!(
            "type number {{}}\ntype succ {{ number, successor }}\ntype g {{ current }}\n{src}"
        ))
        .unwrap();
        (m.rules[0].clone(), m.types)
    }

    #[test]
    fn inc_is_a_fixpoint() {
        let (r, types) = rule(
            "rule inc { goal: g { current: X } retrieval: succ { number: X, successor: Y } \
             ==> modify goal { current: Y } request retrieval succ { number: Y } }",
        );
        assert!(is_set_normal_form(&r, &types));
        assert_eq!(set_normal_form(&r, &types), Normalized::Rule(r));
    }

    #[test]
    fn missing_slot_gains_fresh_variable() {
        let (r, types) = rule("rule r { retrieval: succ { number: X } ==> }");
        let n = set_normal_form(&r, &types).rule().unwrap();
        let pairs = &n.lhs[0].pairs;
        assert_eq!(pairs[1].slot.as_str(), "successor");
        assert_eq!(pairs[1].value, Value::Var(Variable::new("V#0")));
        assert!(is_set_normal_form(&n, &types));
    }

    #[test]
    fn conflicting_constants_drop_the_rule() {
        let (r, types) = rule("rule r { retrieval: succ { number: 1, number: 2 } ==> }");
        assert_eq!(set_normal_form(&r, &types), Normalized::Dropped);
    }

    #[test]
    fn constant_wins_and_is_propagated_to_actions() {
        let (r, types) =
            rule("rule r { goal: g { current: X, current: 1 } ==> modify goal { current: X } }");
        let n = set_normal_form(&r, &types).rule().unwrap();
        assert_eq!(n.lhs[0].pairs.len(), 1);
        assert_eq!(n.lhs[0].pairs[0].value, Value::Const("1".into()));
        assert_eq!(n.rhs[0].pairs[0].value, Value::Const("1".into()));
    }

    #[test]
    fn variable_classes_collapse_to_a_fresh_variable() {
        let (r, types) = rule(
            "rule r { goal: g { current: X, current: Y } retrieval: succ { number: Y, number: Z } \
             ==> modify goal { current: Z } }",
        );
        let n = set_normal_form(&r, &types).rule().unwrap();
        let v = Value::Var(Variable::new("V#0"));
        assert_eq!(n.lhs[0].pairs[0].value, v);
        assert_eq!(n.lhs[1].pairs[0].value, v);
        assert_eq!(n.rhs[0].pairs[0].value, v);
        assert_eq!(n.lhs[1].pairs[1].value, Value::Var(Variable::new("V#1")));
    }

    #[test]
    fn fresh_names_avoid_existing_variables() {
        let (r, types) = rule("rule r { retrieval: succ { number: V#0 } ==> }");
        let n = set_normal_form(&r, &types).rule().unwrap();
        assert_eq!(n.lhs[0].pairs[1].value, Value::Var(Variable::new("V#1")));
    }
}
