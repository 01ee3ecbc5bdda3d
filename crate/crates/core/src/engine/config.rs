//! Architecture parameters: request handlers, the apply hook, and what a
//! request with no answer does.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ast::{AbstractState, Atom, Delay};
use crate::engine::Effect;
use crate::store::{Chunk, Symbol, TypeTable};

/// One possible reply of a module to a request: the chunk content (its id
/// is replaced by a fresh one), its delay, and atoms to add to upsilon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub chunk: Chunk,
    pub delay: Delay,
    pub atoms: Vec<Atom>,
}

pub trait RequestHandler: Send + Sync {
    /// All answers to a request for type `ty` with ground `pairs`.
    fn answers(
        &self,
        ty: &Symbol,
        pairs: &[(Symbol, Symbol)],
        state: &AbstractState,
        types: &TypeTable,
    ) -> Vec<Answer>;
}

/// Serves requests from the chunks named by `dm(id)` atoms: every such chunk
/// of the requested type whose slots agree with the request is an answer,
/// delivered pending and without new atoms.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeclarativeHandler;

impl RequestHandler for DeclarativeHandler {
    fn answers(
        &self,
        ty: &Symbol,
        pairs: &[(Symbol, Symbol)],
        state: &AbstractState,
        _types: &TypeTable,
    ) -> Vec<Answer> {
        let mut ids: Vec<&Symbol> = state
            .upsilon
            .iter()
            .filter(|a| a.pred.as_str() == "dm" && a.args.len() == 1)
            .map(|a| &a.args[0])
            .collect();
        ids.dedup();
        ids.into_iter()
            .filter_map(|id| state.store.get(id))
            .filter(|c| {
                &c.ty == ty
                    && pairs
                        .iter()
                        .all(|(s, v)| c.value(s) == Some(&state.store.resolve(v)))
            })
            .map(|c| Answer {
                chunk: c.clone(),
                delay: Delay::Pending,
                atoms: Vec::new(),
            })
            .collect()
    }
}

/// What a request with no answer produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailRequest {
    /// A fresh empty chunk of type `chunk`, pending, like `nil`.
    #[default]
    Nil,
    /// No effect at all; the rule has no successor for this request.
    Stuck,
}

impl std::str::FromStr for FailRequest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nil" => Ok(FailRequest::Nil),
            "stuck" => Ok(FailRequest::Stuck),
            other => Err(format!(
                "unknown failure mode `{other}` (expected nil or stuck)"
            )),
        }
    }
}

pub type ApplyHook = Arc<dyn Fn(Effect) -> Effect + Send + Sync>;

#[derive(Clone)]
pub struct ArchitectureConfig {
    /// Handlers for specific buffers.
    pub handlers: BTreeMap<Symbol, Arc<dyn RequestHandler>>,
    /// Handler for buffers without an entry in `handlers`.
    pub default_handler: Option<Arc<dyn RequestHandler>>,
    /// Post-processing of every rule effect; identity by default.
    pub apply_hook: Option<ApplyHook>,
    pub fail_request: FailRequest,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        ArchitectureConfig {
            handlers: BTreeMap::new(),
            default_handler: Some(Arc::new(DeclarativeHandler)),
            apply_hook: None,
            fail_request: FailRequest::Nil,
        }
    }
}

impl ArchitectureConfig {
    pub fn with_fail_request(mut self, mode: FailRequest) -> Self {
        self.fail_request = mode;
        self
    }

    pub fn handler(&self, buffer: &Symbol) -> Option<&Arc<dyn RequestHandler>> {
        self.handlers.get(buffer).or(self.default_handler.as_ref())
    }

    pub(crate) fn hook(&self, e: Effect) -> Effect {
        match &self.apply_hook {
            Some(h) => h(e),
            None => e,
        }
    }
}

impl fmt::Debug for ArchitectureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArchitectureConfig")
            .field("handlers", &self.handlers.keys().collect::<Vec<_>>())
            .field("default_handler", &self.default_handler.is_some())
            .field("apply_hook", &self.apply_hook.is_some())
            .field("fail_request", &self.fail_request)
            .finish()
    }
}
