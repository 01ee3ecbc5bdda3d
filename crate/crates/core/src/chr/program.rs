//! CHR constraints, states and rules, with their surface syntax.

use std::collections::BTreeSet;
use std::fmt;

use crate::chr::term::Term;

/// A user-defined constraint such as `gamma(goal,c,0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserConstraint {
    pub pred: String,
    pub args: Vec<Term>,
}

impl UserConstraint {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        UserConstraint {
            pred: pred.to_string(),
            args,
        }
    }

    pub fn as_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> UserConstraint {
        UserConstraint {
            pred: self.pred.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }
}

impl fmt::Display for UserConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_term().fmt(f)
    }
}

/// The built-in constraints of the translation's theory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    True,
    False,
    Eq(Term, Term),
    Gt(Term, Term),
    /// `x in l`: `x` unifies with some member of list `l`.
    In(Term, Term),
    /// `action(alpha, D, G, Dres, Cres, Eres)`
    Action {
        action: Term,
        store: Term,
        cogstate: Term,
        res_store: Term,
        res_id: Term,
        res_delay: Term,
    },
    /// `merge([D1,...,Dn], D)`
    Merge {
        stores: Term,
        result: Term,
    },
    /// `map(D, D', C, C')`
    Map {
        left: Term,
        right: Term,
        id: Term,
        mapped: Term,
    },
    /// An atom of additional information, e.g. `dm(b)`.
    Fact(Term),
}

impl Builtin {
    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Builtin {
        match self {
            Builtin::True => Builtin::True,
            Builtin::False => Builtin::False,
            Builtin::Eq(a, b) => Builtin::Eq(f(a), f(b)),
            Builtin::Gt(a, b) => Builtin::Gt(f(a), f(b)),
            Builtin::In(a, b) => Builtin::In(f(a), f(b)),
            Builtin::Action {
                action,
                store,
                cogstate,
                res_store,
                res_id,
                res_delay,
            } => Builtin::Action {
                action: f(action),
                store: f(store),
                cogstate: f(cogstate),
                res_store: f(res_store),
                res_id: f(res_id),
                res_delay: f(res_delay),
            },
            Builtin::Merge { stores, result } => Builtin::Merge {
                stores: f(stores),
                result: f(result),
            },
            Builtin::Map {
                left,
                right,
                id,
                mapped,
            } => Builtin::Map {
                left: f(left),
                right: f(right),
                id: f(id),
                mapped: f(mapped),
            },
            Builtin::Fact(t) => Builtin::Fact(f(t)),
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Builtin::True | Builtin::False => vec![],
            Builtin::Eq(a, b) | Builtin::Gt(a, b) | Builtin::In(a, b) => vec![a, b],
            Builtin::Action {
                action,
                store,
                cogstate,
                res_store,
                res_id,
                res_delay,
            } => vec![action, store, cogstate, res_store, res_id, res_delay],
            Builtin::Merge { stores, result } => vec![stores, result],
            Builtin::Map {
                left,
                right,
                id,
                mapped,
            } => vec![left, right, id, mapped],
            Builtin::Fact(t) => vec![t],
        }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in self.terms() {
            t.vars(&mut out);
        }
        out
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::True => f.write_str("true"),
            Builtin::False => f.write_str("false"),
            Builtin::Eq(a, b) => write!(f, "{a} = {b}"),
            Builtin::Gt(a, b) => write!(f, "{a} > {b}"),
            Builtin::In(a, b) => write!(f, "{a} in {b}"),
            Builtin::Action {
                action,
                store,
                cogstate,
                res_store,
                res_id,
                res_delay,
            } => write!(
                f,
                "action({action},{store},{cogstate},{res_store},{res_id},{res_delay})"
            ),
            Builtin::Merge { stores, result } => write!(f, "merge({stores},{result})"),
            Builtin::Map {
                left,
                right,
                id,
                mapped,
            } => write!(f, "map({left},{right},{id},{mapped})"),
            Builtin::Fact(t) => t.fmt(f),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// `<goal ; builtins ; globals>`
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChrState {
    pub goal: Vec<UserConstraint>,
    pub builtins: Vec<Builtin>,
    pub globals: BTreeSet<String>,
}

impl ChrState {
    pub fn is_failed_syntactically(&self) -> bool {
        self.builtins.contains(&Builtin::False)
    }
}

impl fmt::Display for ChrState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let builtins = if self.builtins.is_empty() {
            "true".to_string()
        } else {
            join(&self.builtins)
        };
        let globals: Vec<&str> = self.globals.iter().map(String::as_str).collect();
        write!(
            f,
            "<{} ; {} ; {{{}}}>",
            join(&self.goal),
            builtins,
            globals.join(",")
        )
    }
}

/// `name @ kept \ removed <=> guard | body`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChrRule {
    pub name: String,
    pub kept: Vec<UserConstraint>,
    pub removed: Vec<UserConstraint>,
    pub guard: Vec<Builtin>,
    pub body_user: Vec<UserConstraint>,
    pub body_builtins: Vec<Builtin>,
}

impl ChrRule {
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.kept.iter().chain(&self.removed).chain(&self.body_user) {
            for a in &c.args {
                a.vars(&mut out);
            }
        }
        for b in self.guard.iter().chain(&self.body_builtins) {
            for t in b.terms() {
                t.vars(&mut out);
            }
        }
        out
    }

    /// The same rule with every variable renamed by `f`.
    pub fn renamed(&self, f: &impl Fn(&str) -> String) -> ChrRule {
        let t = |x: &Term| x.rename_vars(f);
        ChrRule {
            name: self.name.clone(),
            kept: self.kept.iter().map(|c| c.map_terms(&t)).collect(),
            removed: self.removed.iter().map(|c| c.map_terms(&t)).collect(),
            guard: self.guard.iter().map(|b| b.map_terms(&t)).collect(),
            body_user: self.body_user.iter().map(|c| c.map_terms(&t)).collect(),
            body_builtins: self.body_builtins.iter().map(|b| b.map_terms(&t)).collect(),
        }
    }
}

impl fmt::Display for ChrRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.name)?;
        if !self.kept.is_empty() {
            write!(f, "{} \\ ", join(&self.kept))?;
        }
        write!(f, "{} <=> ", join(&self.removed))?;
        if !self.guard.is_empty() {
            write!(f, "{} | ", join(&self.guard))?;
        }
        let mut body: Vec<String> = self.body_user.iter().map(|c| c.to_string()).collect();
        body.extend(self.body_builtins.iter().map(|b| b.to_string()));
        if body.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&body.join(", "))
        }
    }
}

/// A program in surface syntax, one rule per line, each ending in `.`.
pub fn print_program(rules: &[ChrRule]) -> String {
    rules.iter().map(|r| format!("{r}.\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_rule_surface_syntax() {
        let gamma = |d: Term| UserConstraint::new("gamma", vec![Term::var("B"), Term::var("C"), d]);
        let rule = ChrRule {
            name: "no".into(),
            kept: vec![],
            removed: vec![gamma(Term::var("D"))],
            guard: vec![Builtin::Gt(Term::var("D"), Term::Num(0))],
            body_user: vec![gamma(Term::Num(0))],
            body_builtins: vec![],
        };
        assert_eq!(
            rule.to_string(),
            "no @ gamma(B,C,D) <=> D > 0 | gamma(B,C,0)"
        );
        assert_eq!(
            print_program(&[rule]),
            "no @ gamma(B,C,D) <=> D > 0 | gamma(B,C,0).\n"
        );
    }
}
