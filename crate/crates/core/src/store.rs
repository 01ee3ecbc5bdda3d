//! Chunks, chunk stores and the chunk merging monoid.
//!
//! A chunk store is a set of typed chunks addressed by unique identifiers.
//! Slot values are identifiers of other chunks. Every total store contains
//! the distinguished `nil` chunk of type `chunk`; partial stores (results
//! of actions) do not, and may reference identifiers of a base store.
//!
//! Merging is the identifier-deduplicating multiset union: chunks with the
//! same identifier must agree on type and slots and are absorbed, all other
//! chunks are kept with their identifiers. The left operand is embedded
//! unchanged and the resulting identifier map is the identity.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

/// Name of the built-in type every type table contains.
pub const CHUNK_TYPE: &str = "chunk";
/// Identifier of the built-in empty chunk.
pub const NIL: &str = "nil";
/// Reserved prefix of identifiers issued by [`IdGen`].
pub const FRESH_PREFIX: &str = "c#";

/// A constant symbol: chunk identifiers, type names, slot names, buffers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        debug_assert!(!name.is_empty(), "symbols are nonempty");
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn nil() -> Self {
        Symbol::new(NIL)
    }

    pub fn is_nil(&self) -> bool {
        &*self.0 == NIL
    }

    /// True for identifiers issued by an [`IdGen`].
    pub fn is_fresh(&self) -> bool {
        self.0.starts_with(FRESH_PREFIX)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A rule variable. Lives in its own namespace, never equal to a [`Symbol`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        debug_assert!(!name.is_empty(), "variables are nonempty");
        Variable(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl From<&str> for Variable {
    fn from(s: &str) -> Self {
        Variable::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type `{0}` is already declared with different slots")]
    Conflicting(Symbol),
    #[error("type `{ty}` lists slot `{slot}` twice")]
    DuplicateSlot { ty: Symbol, slot: Symbol },
    #[error("the built-in type `chunk` has no slots")]
    ChunkHasSlots,
}

/// Maps type names to their ordered slot lists. The slot order is fixed at
/// declaration time and determines every sorted slot encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTable {
    types: IndexMap<Symbol, Vec<Symbol>>,
}

impl Default for TypeTable {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeTable {
    pub fn new() -> Self {
        let mut types = IndexMap::new();
        types.insert(Symbol::new(CHUNK_TYPE), Vec::new());
        TypeTable { types }
    }

    /// Declares a type. Redeclaring a type with the identical slot list is a
    /// no-op.
    pub fn declare(&mut self, name: Symbol, slots: Vec<Symbol>) -> Result<(), TypeError> {
        for (i, s) in slots.iter().enumerate() {
            if slots[..i].contains(s) {
                return Err(TypeError::DuplicateSlot {
                    ty: name,
                    slot: s.clone(),
                });
            }
        }
        match self.types.get(&name) {
            Some(existing) if *existing == slots => Ok(()),
            Some(_) if name.as_str() == CHUNK_TYPE => Err(TypeError::ChunkHasSlots),
            Some(_) => Err(TypeError::Conflicting(name)),
            None => {
                self.types.insert(name, slots);
                Ok(())
            }
        }
    }

    pub fn slots(&self, ty: &Symbol) -> Option<&[Symbol]> {
        self.types.get(ty).map(Vec::as_slice)
    }

    pub fn contains(&self, ty: &Symbol) -> bool {
        self.types.contains_key(ty)
    }

    /// Position of `slot` in the declared order of `ty`.
    pub fn slot_index(&self, ty: &Symbol, slot: &Symbol) -> Option<usize> {
        self.slots(ty)?.iter().position(|s| s == slot)
    }

    /// Types in declaration order, the built-in `chunk` first.
    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &[Symbol])> {
        self.types.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// A typed chunk. `slots` lists one value per slot of the type, in the
/// type's declared slot order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chunk {
    pub id: Symbol,
    pub ty: Symbol,
    pub slots: Vec<(Symbol, Symbol)>,
}

impl Chunk {
    /// Builds a chunk whose slot list is in the type's declared order.
    /// Returns `None` unless the given slots are exactly the type's slots.
    pub fn typed(
        types: &TypeTable,
        id: Symbol,
        ty: Symbol,
        values: impl IntoIterator<Item = (Symbol, Symbol)>,
    ) -> Option<Chunk> {
        let order = types.slots(&ty)?;
        let given: BTreeMap<Symbol, Symbol> = values.into_iter().collect();
        if given.len() != order.len() {
            return None;
        }
        let slots = order
            .iter()
            .map(|s| given.get(s).map(|v| (s.clone(), v.clone())))
            .collect::<Option<Vec<_>>>()?;
        Some(Chunk { id, ty, slots })
    }

    pub fn nil() -> Chunk {
        Chunk {
            id: Symbol::nil(),
            ty: Symbol::new(CHUNK_TYPE),
            slots: Vec::new(),
        }
    }

    pub fn value(&self, slot: &Symbol) -> Option<&Symbol> {
        self.slots.iter().find(|(s, _)| s == slot).map(|(_, v)| v)
    }

    /// Same type and slot values, ignoring the identifier.
    pub fn same_content(&self, other: &Chunk) -> bool {
        self.ty == other.ty && self.slots == other.slots
    }

    pub fn with_id(&self, id: Symbol) -> Chunk {
        Chunk {
            id,
            ty: self.ty.clone(),
            slots: self.slots.clone(),
        }
    }
}

impl fmt::Display for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} {{", self.id, self.ty)?;
        for (i, (s, v)) in self.slots.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{s}: {v}")?;
        }
        if self.slots.is_empty() {
            f.write_str("}")
        } else {
            f.write_str(" }")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("chunk identifier `{0}` names two different chunks")]
    IdClash(Symbol),
}

/// A (possibly partial) chunk store keyed by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkStore {
    chunks: BTreeMap<Symbol, Chunk>,
}

impl ChunkStore {
    /// The empty (partial) store, the neutral element of [`merge`].
    pub fn empty() -> Self {
        ChunkStore::default()
    }

    /// A total store holding only `nil`.
    pub fn with_nil() -> Self {
        let mut s = ChunkStore::empty();
        s.chunks.insert(Symbol::nil(), Chunk::nil());
        s
    }

    /// Builds a store from chunks; fails if two chunks share an id but differ.
    pub fn from_chunks(chunks: impl IntoIterator<Item = Chunk>) -> Result<Self, MergeError> {
        let mut s = ChunkStore::empty();
        for c in chunks {
            s.insert(c)?;
        }
        Ok(s)
    }

    /// Inserts a chunk, absorbing an identical one with the same id.
    pub fn insert(&mut self, chunk: Chunk) -> Result<(), MergeError> {
        match self.chunks.get(&chunk.id) {
            Some(existing) if *existing == chunk => Ok(()),
            Some(_) => Err(MergeError::IdClash(chunk.id)),
            None => {
                self.chunks.insert(chunk.id.clone(), chunk);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &Symbol) -> Option<&Chunk> {
        self.chunks.get(id)
    }

    pub fn contains(&self, id: &Symbol) -> bool {
        self.chunks.contains_key(id)
    }

    /// Chunks in identifier order.
    pub fn iter(&self) -> impl Iterator<Item = &Chunk> {
        self.chunks.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &Symbol> {
        self.chunks.keys()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    /// Identifier under which a slot value is visible: the value itself when
    /// it names a chunk of this store, `nil` otherwise.
    pub fn resolve(&self, id: &Symbol) -> Symbol {
        if self.contains(id) {
            id.clone()
        } else {
            Symbol::nil()
        }
    }

    /// Applies an identifier renaming to chunk ids and slot values.
    pub fn renamed(&self, rename: &impl Fn(&Symbol) -> Symbol) -> ChunkStore {
        let chunks = self
            .chunks
            .values()
            .map(|c| Chunk {
                id: rename(&c.id),
                ty: c.ty.clone(),
                slots: c
                    .slots
                    .iter()
                    .map(|(s, v)| (s.clone(), rename(v)))
                    .collect(),
            })
            .map(|c| (c.id.clone(), c))
            .collect();
        ChunkStore { chunks }
    }
}

/// Returns the chunk with identifier `x`, or `nil` when `x` names no chunk.
pub fn id_inverse(store: &ChunkStore, x: &Symbol) -> Chunk {
    store.get(x).cloned().unwrap_or_else(Chunk::nil)
}

/// Maps identifiers of the merge operands to identifiers in the merge result.
/// Unlisted identifiers map to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    pairs: BTreeMap<Symbol, Symbol>,
}

impl IdMap {
    pub fn identity() -> Self {
        IdMap::default()
    }

    pub fn insert(&mut self, from: Symbol, to: Symbol) {
        if from == to {
            self.pairs.remove(&from);
        } else {
            self.pairs.insert(from, to);
        }
    }

    pub fn apply(&self, id: &Symbol) -> Symbol {
        self.pairs.get(id).cloned().unwrap_or_else(|| id.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Merges two stores. The left operand is embedded unchanged; chunks of the
/// right operand whose id already occurs on the left are absorbed when equal
/// and rejected otherwise.
pub fn merge(left: &ChunkStore, right: &ChunkStore) -> Result<(ChunkStore, IdMap), MergeError> {
    let mut out = left.clone();
    for c in right.iter() {
        out.insert(c.clone())?;
    }
    Ok((out, IdMap::identity()))
}

/// Merges a sequence of stores left to right.
pub fn merge_all<'a>(
    stores: impl IntoIterator<Item = &'a ChunkStore>,
) -> Result<ChunkStore, MergeError> {
    let mut acc = ChunkStore::empty();
    for s in stores {
        acc = merge(&acc, s)?.0;
    }
    Ok(acc)
}

/// Issues identifiers `c#0`, `c#1`, ... that cannot collide with parsed ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdGen {
    next: u64,
}

impl IdGen {
    pub fn new() -> Self {
        IdGen { next: 0 }
    }

    pub fn starting_at(next: u64) -> Self {
        IdGen { next }
    }

    /// A generator whose ids are all absent from `store`.
    pub fn above(store: &ChunkStore) -> Self {
        let mut g = IdGen::new();
        g.bump_above(store);
        g
    }

    /// Advances past every fresh id occurring in `store` (ids and values).
    pub fn bump_above(&mut self, store: &ChunkStore) {
        let max = store
            .iter()
            .flat_map(|c| std::iter::once(&c.id).chain(c.slots.iter().map(|(_, v)| v)))
            .filter_map(fresh_index)
            .max();
        if let Some(m) = max {
            self.next = self.next.max(m + 1);
        }
    }

    pub fn fresh(&mut self) -> Symbol {
        let id = Symbol::new(format!("{FRESH_PREFIX}{}", self.next));
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

fn fresh_index(id: &Symbol) -> Option<u64> {
    id.as_str().strip_prefix(FRESH_PREFIX)?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting_types() -> TypeTable {
        let mut t = TypeTable::new();
        t.declare("number".into(), vec![]).unwrap();
        t.declare("succ".into(), vec!["number".into(), "successor".into()])
            .unwrap();
        t.declare("g".into(), vec!["current".into()]).unwrap();
        t
    }

    fn chunk(t: &TypeTable, id: &str, ty: &str, vals: &[(&str, &str)]) -> Chunk {
        Chunk::typed(
            t,
            id.into(),
            ty.into(),
            vals.iter().map(|(s, v)| (Symbol::new(s), Symbol::new(v))),
        )
        .unwrap()
    }

    fn counting_store() -> ChunkStore {
        let t = counting_types();
        let mut s = ChunkStore::with_nil();
        for n in ["1", "2", "3"] {
            s.insert(chunk(&t, n, "number", &[])).unwrap();
        }
        s.insert(chunk(
            &t,
            "b",
            "succ",
            &[("number", "1"), ("successor", "2")],
        ))
        .unwrap();
        s.insert(chunk(
            &t,
            "c",
            "succ",
            &[("successor", "3"), ("number", "2")],
        ))
        .unwrap();
        s
    }

    #[test]
    fn id_inverse_finds_b() {
        let s = counting_store();
        let b = id_inverse(&s, &"b".into());
        assert_eq!(b.ty.as_str(), "succ");
        assert_eq!(b.value(&"number".into()).unwrap().as_str(), "1");
        assert_eq!(b.value(&"successor".into()).unwrap().as_str(), "2");
    }

    #[test]
    fn id_inverse_is_total() {
        assert_eq!(id_inverse(&counting_store(), &"zzz".into()), Chunk::nil());
        assert_eq!(
            id_inverse(&ChunkStore::with_nil(), &"nil".into()),
            Chunk::nil()
        );
    }

    #[test]
    fn typed_chunk_uses_declared_slot_order() {
        let t = counting_types();
        let c = chunk(&t, "c", "succ", &[("successor", "3"), ("number", "2")]);
        assert_eq!(c.slots[0].0.as_str(), "number");
        assert!(Chunk::typed(&t, "x".into(), "succ".into(), vec![]).is_none());
    }

    #[test]
    fn merge_absorbs_shared_equal_chunk() {
        let t = counting_types();
        let c1 = chunk(&t, "1", "number", &[]);
        let c2 = chunk(&t, "2", "number", &[]);
        let c3 = chunk(&t, "3", "number", &[]);
        let left = ChunkStore::from_chunks([c1.clone(), c2.clone()]).unwrap();
        let right = ChunkStore::from_chunks([c2.clone(), c3.clone()]).unwrap();
        let (m, map) = merge(&left, &right).unwrap();
        assert_eq!(m, ChunkStore::from_chunks([c1, c2, c3]).unwrap());
        assert!(map.is_identity());
    }

    #[test]
    fn merge_rejects_id_clash() {
        let t = counting_types();
        let left = ChunkStore::from_chunks([chunk(&t, "x", "number", &[])]).unwrap();
        let right = ChunkStore::from_chunks([chunk(&t, "x", "g", &[("current", "1")])]).unwrap();
        assert_eq!(merge(&left, &right), Err(MergeError::IdClash("x".into())));
    }

    #[test]
    fn empty_is_neutral() {
        let s = counting_store();
        assert_eq!(merge(&ChunkStore::empty(), &s).unwrap().0, s);
        assert_eq!(merge(&s, &ChunkStore::empty()).unwrap().0, s);
    }

    #[test]
    fn fresh_ids_count_up() {
        let mut g = IdGen::new();
        assert_eq!(g.fresh().as_str(), "c#0");
        let mut g = IdGen::starting_at(7);
        assert_eq!(g.fresh().as_str(), "c#7");
        assert_ne!(g.fresh(), g.fresh());
    }

    #[test]
    fn generator_skips_ids_in_store() {
        let mut s = counting_store();
        s.insert(Chunk::nil().with_id("c#4".into())).unwrap();
        assert_eq!(IdGen::above(&s).fresh().as_str(), "c#5");
    }

    #[test]
    fn redeclaring_chunk_type_is_idempotent() {
        let mut t = TypeTable::new();
        t.declare("chunk".into(), vec![]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(
            t.declare("chunk".into(), vec!["a".into()]),
            Err(TypeError::ChunkHasSlots)
        );
    }
}
