//! Comparing states up to the names of generated chunk identifiers.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::ast::AbstractState;
use crate::store::{Symbol, FRESH_PREFIX};

fn fresh_ids(state: &AbstractState) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for c in state.store.iter() {
        out.insert(c.id.clone());
        out.extend(c.slots.iter().map(|(_, v)| v.clone()));
    }
    out.extend(state.gamma.values().map(|c| c.chunk.clone()));
    for a in &state.upsilon {
        out.extend(a.args.iter().cloned());
    }
    out.retain(Symbol::is_fresh);
    out
}

struct Namer<'a> {
    state: &'a AbstractState,
    names: BTreeMap<Symbol, Symbol>,
}

impl Namer<'_> {
    fn visit(&mut self, id: &Symbol) {
        let mut stack = vec![id.clone()];
        while let Some(id) = stack.pop() {
            if !id.is_fresh() || self.names.contains_key(&id) {
                continue;
            }
            let name = Symbol::new(format!("{FRESH_PREFIX}{}", self.names.len()));
            self.names.insert(id.clone(), name);
            if let Some(c) = self.state.store.get(&id) {
                stack.extend(c.slots.iter().rev().map(|(_, v)| v.clone()));
            }
        }
    }

    /// Structural key of a chunk not reachable from any buffer: type and
    /// slot values, with unnamed generated ids blanked out.
    fn key(&self, id: &Symbol) -> (String, Vec<String>) {
        match self.state.store.get(id) {
            Some(c) => (
                c.ty.to_string(),
                c.slots
                    .iter()
                    .map(|(s, v)| {
                        let v = match self.names.get(v) {
                            Some(n) => n.to_string(),
                            None if v.is_fresh() => "?".into(),
                            None => v.to_string(),
                        };
                        format!("{s}={v}")
                    })
                    .collect(),
            ),
            None => (String::new(), Vec::new()),
        }
    }
}

/// Renames generated ids to `c#0, c#1, ...` in the order they are reached
/// from the buffers (buffer name order, then slot order). Chunks not
/// reachable from a buffer follow, ordered by content.
pub fn canonical(state: &AbstractState) -> AbstractState {
    canonical_split(state).0
}

/// The canonical form and the number of generated ids reached from the
/// buffers. Those are named by structure alone.
fn canonical_split(state: &AbstractState) -> (AbstractState, usize) {
    let mut namer = Namer {
        state,
        names: BTreeMap::new(),
    };
    for c in state.gamma.values() {
        namer.visit(&c.chunk);
    }
    let pinned = namer.names.len();
    for a in &state.upsilon {
        for arg in &a.args {
            namer.visit(arg);
        }
    }
    loop {
        let rest: Vec<Symbol> = fresh_ids(state)
            .into_iter()
            .filter(|id| !namer.names.contains_key(id))
            .collect();
        let Some(next) = rest.iter().min_by_key(|id| (namer.key(id), (*id).clone())) else {
            break;
        };
        let next = next.clone();
        namer.visit(&next);
    }
    let names = namer.names;
    let renamed = state.renamed(&|id| names.get(id).cloned().unwrap_or_else(|| id.clone()));
    (renamed, pinned)
}

/// The state with every generated id replaced by one placeholder, as a
/// sorted list of lines. Isomorphic states have equal shapes.
fn shape(state: &AbstractState) -> Vec<String> {
    let blank = |id: &Symbol| {
        if id.is_fresh() {
            FRESH_PREFIX
        } else {
            id.as_str()
        }
        .to_string()
    };
    let mut lines: Vec<String> = state
        .store
        .iter()
        .map(|c| {
            let slots: Vec<String> = c
                .slots
                .iter()
                .map(|(s, v)| format!("{s}:{}", blank(v)))
                .collect();
            format!("{} {} {}", blank(&c.id), c.ty, slots.join(","))
        })
        .collect();
    lines.extend(
        state
            .gamma
            .iter()
            .map(|(b, c)| format!("{b}={} {:?}", blank(&c.chunk), c.delay)),
    );
    lines.extend(state.upsilon.iter().map(|a| {
        let args: Vec<String> = a.args.iter().map(blank).collect();
        format!("{}({})", a.pred, args.join(","))
    }));
    lines.sort();
    lines
}

/// Whether some bijection between generated ids turns `a` into `b`.
pub fn isomorphic(a: &AbstractState, b: &AbstractState) -> bool {
    if a == b {
        return true;
    }
    let ((ca, pa), (cb, pb)) = (canonical_split(a), canonical_split(b));
    if ca == cb {
        return true;
    }
    if pa != pb || shape(&ca) != shape(&cb) {
        return false;
    }
    if ca.store.len() != cb.store.len()
        || ca.gamma.len() != cb.gamma.len()
        || ca.upsilon.len() != cb.upsilon.len()
    {
        return false;
    }
    let fa: Vec<Symbol> = fresh_ids(&ca).into_iter().collect();
    let fb: Vec<Symbol> = fresh_ids(&cb).into_iter().collect();
    if fa.len() != fb.len() {
        return false;
    }
    // ids reached from the buffers are named alike in both canonical forms
    let mut map = BTreeMap::new();
    let mut used = BTreeSet::new();
    let mut rest = Vec::new();
    for x in &fa {
        if fresh_index(x).is_some_and(|i| i < pa) {
            map.insert(x.clone(), x.clone());
            used.insert(x.clone());
        } else {
            rest.push(x.clone());
        }
    }
    assign(&ca, &cb, &rest, &fb, 0, &mut map, &mut used)
}

fn fresh_index(id: &Symbol) -> Option<usize> {
    id.as_str().strip_prefix(FRESH_PREFIX)?.parse().ok()
}

fn compatible(
    a: &AbstractState,
    b: &AbstractState,
    x: &Symbol,
    y: &Symbol,
    map: &BTreeMap<Symbol, Symbol>,
) -> bool {
    match (a.store.get(x), b.store.get(y)) {
        (None, None) => true,
        (Some(cx), Some(cy)) => {
            cx.ty == cy.ty
                && cx.slots.len() == cy.slots.len()
                && cx.slots.iter().zip(&cy.slots).all(|((sx, vx), (sy, vy))| {
                    sx == sy
                        && if vx.is_fresh() {
                            map.get(vx).is_none_or(|m| m == vy)
                        } else {
                            vx == vy
                        }
                })
        }
        _ => false,
    }
}

fn assign(
    a: &AbstractState,
    b: &AbstractState,
    fa: &[Symbol],
    fb: &[Symbol],
    i: usize,
    map: &mut BTreeMap<Symbol, Symbol>,
    used: &mut BTreeSet<Symbol>,
) -> bool {
    if i == fa.len() {
        return &a.renamed(&|id| map.get(id).cloned().unwrap_or_else(|| id.clone())) == b;
    }
    let x = &fa[i];
    for y in fb {
        if used.contains(y) || !compatible(a, b, x, y, map) {
            continue;
        }
        map.insert(x.clone(), y.clone());
        used.insert(y.clone());
        if assign(a, b, fa, fb, i + 1, map, used) {
            return true;
        }
        map.remove(x);
        used.remove(y);
    }
    false
}

/// Short stable fingerprint of a state up to generated ids.
pub fn state_hash(state: &AbstractState) -> String {
    let digest = Sha256::digest(canonical(state).to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{BufferContent, Delay};
    use crate::store::{Chunk, ChunkStore};

    fn state(chunks: Vec<Chunk>, buffers: &[(&str, &str)]) -> AbstractState {
        let mut store = ChunkStore::with_nil();
        for c in chunks {
            store.insert(c).unwrap();
        }
        let gamma = buffers
            .iter()
            .map(|(b, c)| {
                (
                    Symbol::new(b),
                    BufferContent::new(Symbol::new(c), Delay::Visible),
                )
            })
            .collect();
        AbstractState::new(store, gamma, vec![])
    }

    fn chunk(id: &str, ty: &str, slots: &[(&str, &str)]) -> Chunk {
        Chunk {
            id: id.into(),
            ty: ty.into(),
            slots: slots
                .iter()
                .map(|(s, v)| (Symbol::new(s), Symbol::new(v)))
                .collect(),
        }
    }

    #[test]
    fn renaming_generated_ids_is_invisible() {
        let a = state(
            vec![
                chunk("c#3", "g", &[("current", "c#7")]),
                chunk("c#7", "g", &[("current", "nil")]),
            ],
            &[("goal", "c#3")],
        );
        let b = state(
            vec![
                chunk("c#0", "g", &[("current", "c#1")]),
                chunk("c#1", "g", &[("current", "nil")]),
            ],
            &[("goal", "c#0")],
        );
        assert_eq!(canonical(&a), canonical(&b));
        assert!(isomorphic(&a, &b));
        assert_eq!(state_hash(&a), state_hash(&b));
        assert_eq!(state_hash(&a).len(), 16);
    }

    #[test]
    fn parsed_ids_are_not_renamed() {
        let a = state(vec![chunk("x", "g", &[])], &[("goal", "x")]);
        let b = state(vec![chunk("y", "g", &[])], &[("goal", "y")]);
        assert!(!isomorphic(&a, &b));
    }

    #[test]
    fn unreachable_chunks_are_matched_by_content() {
        let a = state(
            vec![
                chunk("c#0", "g", &[("current", "a")]),
                chunk("c#1", "g", &[("current", "b")]),
                chunk("a", "n", &[]),
                chunk("b", "n", &[]),
            ],
            &[],
        );
        let b = state(
            vec![
                chunk("c#5", "g", &[("current", "b")]),
                chunk("c#2", "g", &[("current", "a")]),
                chunk("a", "n", &[]),
                chunk("b", "n", &[]),
            ],
            &[],
        );
        assert!(isomorphic(&a, &b));
        let c = state(
            vec![
                chunk("c#5", "g", &[("current", "b")]),
                chunk("c#2", "g", &[("current", "b")]),
                chunk("a", "n", &[]),
                chunk("b", "n", &[]),
            ],
            &[],
        );
        assert!(!isomorphic(&a, &c));
    }
}
