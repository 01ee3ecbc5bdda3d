//! First-order terms and unification.

use std::collections::BTreeMap;
use std::fmt;

use crate::store::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Sym(Symbol),
    Num(i64),
    /// Compound term; the empty functor denotes a tuple `(a,b)`.
    App(String, Vec<Term>),
    List(Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn sym(name: impl AsRef<str>) -> Term {
        Term::Sym(Symbol::new(name))
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Term {
        Term::App(functor.to_string(), args)
    }

    pub fn tuple(args: Vec<Term>) -> Term {
        Term::App(String::new(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Sym(_) | Term::Num(_) => true,
            Term::App(_, args) | Term::List(args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Sym(_) | Term::Num(_) => {}
            Term::App(_, args) | Term::List(args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    /// Applies `f` to every variable name.
    pub fn rename_vars(&self, f: &impl Fn(&str) -> String) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::Sym(_) | Term::Num(_) => self.clone(),
            Term::App(n, args) => {
                Term::App(n.clone(), args.iter().map(|a| a.rename_vars(f)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| a.rename_vars(f)).collect()),
        }
    }

    /// Applies `f` to every symbol.
    pub fn rename_syms(&self, f: &impl Fn(&Symbol) -> Symbol) -> Term {
        match self {
            Term::Sym(s) => Term::Sym(f(s)),
            Term::Var(_) | Term::Num(_) => self.clone(),
            Term::App(n, args) => {
                Term::App(n.clone(), args.iter().map(|a| a.rename_syms(f)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| a.rename_syms(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, items: &[Term]) -> fmt::Result {
            for (i, t) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        }
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Sym(s) => write!(f, "{s}"),
            Term::Num(n) => write!(f, "{n}"),
            Term::App(n, args) => {
                write!(f, "{n}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Term::List(items) => {
                f.write_str("[")?;
                list(f, items)?;
                f.write_str("]")
            }
        }
    }
}

/// A triangular substitution from variable names to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<String, Term>);

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut t = t;
        while let Term::Var(v) = t {
            match self.0.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// `t` with every bound variable replaced, recursively.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::App(n, args) => {
                Term::App(n.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| self.resolve(a)).collect()),
            other => other.clone(),
        }
    }

    fn occurs(&self, v: &str, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == v,
            Term::App(_, args) | Term::List(args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    /// Extends the bindings so that `a` and `b` become equal; on failure the
    /// bindings may be partially extended and should be discarded.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let (a, b) = (self.walk(a).clone(), self.walk(b).clone());
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(x, t) {
                    return false;
                }
                self.0.insert(x.clone(), t.clone());
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            (Term::List(xs), Term::List(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => a == b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unification_binds_through_structures() {
        let mut b = Bindings::new();
        let pat = Term::app(
            "chunk",
            vec![
                Term::var("C"),
                Term::sym("succ"),
                Term::List(vec![Term::tuple(vec![Term::sym("number"), Term::var("X")])]),
            ],
        );
        let val = Term::app(
            "chunk",
            vec![
                Term::sym("b"),
                Term::sym("succ"),
                Term::List(vec![Term::tuple(vec![Term::sym("number"), Term::sym("1")])]),
            ],
        );
        assert!(b.unify(&pat, &val));
        assert_eq!(b.resolve(&Term::var("C")), Term::sym("b"));
        assert_eq!(b.resolve(&Term::var("X")), Term::sym("1"));
    }

    #[test]
    fn occurs_check() {
        let mut b = Bindings::new();
        assert!(!b.unify(&Term::var("X"), &Term::List(vec![Term::var("X")])));
    }

    #[test]
    fn clash() {
        let mut b = Bindings::new();
        assert!(!b.unify(&Term::Num(1), &Term::Num(2)));
        assert!(!b.unify(&Term::sym("0"), &Term::Num(0)));
    }

    #[test]
    fn display() {
        let t = Term::app(
            "chunk",
            vec![
                Term::sym("b"),
                Term::List(vec![Term::tuple(vec![Term::sym("n"), Term::Num(1)])]),
            ],
        );
        assert_eq!(t.to_string(), "chunk(b,[(n,1)])");
    }
}
