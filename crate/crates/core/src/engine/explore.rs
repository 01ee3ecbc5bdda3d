//! Breadth-first exploration of the transition graph.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::ast::AbstractState;
use crate::engine::canon::{canonical, state_hash};
use crate::engine::transition::{Label, Program};
use crate::engine::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dedup {
    /// States are identified only when literally equal.
    Exact,
    /// States are identified up to renaming of generated ids.
    #[default]
    Canonical,
}

impl std::str::FromStr for Dedup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Dedup::Exact),
            "canonical" => Ok(Dedup::Canonical),
            other => Err(format!(
                "unknown dedup mode `{other}` (expected exact or canonical)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    /// Node 0 is the initial state.
    pub nodes: Vec<AbstractState>,
    /// Distance of each node from the initial state.
    pub depth: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Some node at the depth bound still had successors.
    pub truncated: bool,
}

impl Graph {
    pub fn successors_of(&self, node: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph states {\n");
        for (i, s) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", state_hash(s));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.label);
        }
        out.push_str("}\n");
        out
    }

    /// One line per edge: `hash -label-> hash`.
    pub fn to_trace(&self) -> String {
        let hashes: Vec<String> = self.nodes.iter().map(state_hash).collect();
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} -{}-> {}", hashes[e.from], e.label, hashes[e.to]);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "state {i} ({}) depth {}", state_hash(s), self.depth[i]);
            for line in s.to_string().lines() {
                let _ = writeln!(out, "  {line}");
            }
            for e in self.successors_of(i) {
                let _ = writeln!(out, "  {} -> state {}", e.label, e.to);
            }
        }
        if self.truncated {
            out.push_str("truncated at depth bound\n");
        }
        out
    }
}

/// Explores every state reachable in at most `depth` steps.
pub fn explore(
    program: &Program,
    initial: &AbstractState,
    depth: usize,
    dedup: Dedup,
) -> Result<Graph, EngineError> {
    let key = |s: &AbstractState| match dedup {
        Dedup::Exact => s.clone(),
        Dedup::Canonical => canonical(s),
    };
    let mut graph = Graph {
        nodes: vec![initial.clone()],
        depth: vec![0],
        edges: Vec::new(),
        truncated: false,
    };
    let mut index: HashMap<AbstractState, usize> = HashMap::new();
    index.insert(key(initial), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let succs = program.successors(&graph.nodes[n])?;
        if graph.depth[n] >= depth {
            if !succs.is_empty() {
                graph.truncated = true;
            }
            continue;
        }
        for (label, s) in succs {
            let k = key(&s);
            let to = match index.get(&k) {
                Some(&i) => i,
                None => {
                    let i = graph.nodes.len();
                    graph.nodes.push(s);
                    graph.depth.push(graph.depth[n] + 1);
                    index.insert(k, i);
                    queue.push_back(i);
                    i
                }
            };
            graph.edges.push(Edge { from: n, label, to });
        }
    }
    Ok(graph)
}
