//! Text format for models (`.actr` files).
//!
//! ```text
//! type succ { number, successor }
//! chunk b : succ { number: 1, successor: 2 }
//! dm { b }
//! buffer retrieval = b pending
//! rule inc {
//!   goal: g { current: X }
//!   retrieval: succ { number: X, successor: Y }
//! ==>
//!   modify goal { current: Y }
//!   request retrieval succ { number: Y }
//! }
//! ```
//!
//! Identifiers starting with an uppercase letter are variables, everything
//! else is a constant. `#` starts a comment unless it appears inside an
//! identifier.

use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::ast::{
    Action, ActionKind, BufferDecl, BufferTest, ChunkDecl, DmEntry, Model, Rule, SlotValuePair,
    Value,
};
use crate::store::{Symbol, TypeTable, Variable, CHUNK_TYPE};

/// Source location, 1-based, end exclusive.
///
/// Spans never take part in equality or hashing, so two ASTs that differ only
/// in layout compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            line: self.line,
            col: self.col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }

    /// Whether `(line, col)` lies inside the span.
    pub fn contains(&self, line: u32, col: u32) -> bool {
        (line, col) >= (self.line, self.col) && (line, col) < (self.end_line, self.end_col)
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl ParseError {
    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Colon,
    Comma,
    Eq,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Arrow => f.write_str("`==>`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '#' | '\'' | '.')
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let span_to = |l: u32, c: u32| Span {
            line: start.0,
            col: start.1,
            end_line: l,
            end_col: c,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let begin = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
                col += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            out.push((Tok::Ident(word), span_to(line, col)));
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '=' if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') => {
                i += 3;
                col += 3;
                out.push((Tok::Arrow, span_to(line, col)));
                continue;
            }
            '=' => Tok::Eq,
            other => {
                return Err(ParseError {
                    message: format!("unexpected character `{other}`"),
                    span: span_to(line, col + 1),
                })
            }
        };
        i += 1;
        col += 1;
        out.push((tok, span_to(line, col)));
    }
    out.push((
        Tok::Eof,
        Span {
            line,
            col,
            end_line: line,
            end_col: col + 1,
        },
    ));
    Ok(out)
}

fn is_variable(name: &str) -> bool {
    name.chars().next().is_some_and(char::is_uppercase)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> Result<T, ParseError> {
        Err(ParseError {
            message,
            span: self.span(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn constant(&mut self, what: &str) -> Result<(Symbol, Span), ParseError> {
        let (s, span) = self.ident(what)?;
        if is_variable(&s) {
            return Err(ParseError {
                message: format!("expected {what}, found variable `{s}`"),
                span,
            });
        }
        Ok((Symbol::new(s), span))
    }

    fn value(&mut self) -> Result<(Value, Span), ParseError> {
        let (s, span) = self.ident("a value")?;
        let v = if is_variable(&s) {
            Value::Var(Variable::new(s))
        } else {
            Value::Const(Symbol::new(s))
        };
        Ok((v, span))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    /// `{ item, item, ... }` with an optional trailing comma.
    fn braced<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<(Vec<T>, Span), ParseError> {
        let open = self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        loop {
            if *self.peek() == Tok::RBrace {
                break;
            }
            items.push(item(self)?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let close = self.expect(Tok::RBrace)?;
        Ok((items, open.to(close)))
    }

    fn pairs(&mut self) -> Result<(Vec<SlotValuePair>, Span), ParseError> {
        self.braced(|p| {
            let (slot, start) = p.constant("a slot name")?;
            p.expect(Tok::Colon)?;
            let (value, end) = p.value()?;
            Ok(SlotValuePair {
                slot,
                value,
                span: start.to(end),
            })
        })
    }

    fn model(&mut self) -> Result<Model, ParseError> {
        let mut model = Model::default();
        loop {
            let start = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "type" => {
                    self.bump();
                    let (name, name_span) = self.constant("a type name")?;
                    let (slots, _) = self.braced(|p| p.constant("a slot name"))?;
                    let slots = slots.into_iter().map(|(s, _)| s).collect();
                    if let Err(e) = model.types.declare(name, slots) {
                        return Err(ParseError {
                            message: e.to_string(),
                            span: name_span,
                        });
                    }
                }
                Tok::Ident(kw) if kw == "chunk" => {
                    self.bump();
                    let (id, _) = self.constant("a chunk identifier")?;
                    self.expect(Tok::Colon)?;
                    let (ty, _) = self.constant("a type name")?;
                    let (pairs, end) = self.braced(|p| {
                        let (slot, _) = p.constant("a slot name")?;
                        p.expect(Tok::Colon)?;
                        let (value, _) = p.constant("a chunk identifier")?;
                        Ok((slot, value))
                    })?;
                    model.chunks.push(ChunkDecl {
                        id,
                        ty,
                        pairs,
                        span: start.to(end),
                    });
                }
                Tok::Ident(kw) if kw == "dm" => {
                    self.bump();
                    let (ids, _) = self.braced(|p| p.constant("a chunk identifier"))?;
                    model
                        .dm
                        .extend(ids.into_iter().map(|(id, span)| DmEntry { id, span }));
                }
                Tok::Ident(kw) if kw == "buffer" => {
                    self.bump();
                    let (name, _) = self.constant("a buffer name")?;
                    self.expect(Tok::Eq)?;
                    let (chunk, mut end) = self.constant("a chunk identifier")?;
                    let pending = self.at_keyword("pending");
                    if pending {
                        end = self.bump().1;
                    }
                    model.buffers.push(BufferDecl {
                        name,
                        chunk,
                        pending,
                        span: start.to(end),
                    });
                }
                Tok::Ident(kw) if kw == "rule" => {
                    self.bump();
                    let rule = self.rule(start)?;
                    model.rules.push(rule);
                }
                other => {
                    return self.error(format!(
                        "expected `type`, `chunk`, `dm`, `buffer` or `rule`, found {other}"
                    ))
                }
            }
        }
        Ok(model)
    }

    fn rule(&mut self, start: Span) -> Result<Rule, ParseError> {
        let (name, _) = self.constant("a rule name")?;
        self.expect(Tok::LBrace)?;
        let mut lhs = Vec::new();
        while *self.peek() != Tok::Arrow {
            let (buffer, test_start) = self.constant("a buffer name or `==>`")?;
            self.expect(Tok::Colon)?;
            let (ty, _) = self.constant("a type name")?;
            let (pairs, end) = self.pairs()?;
            lhs.push(BufferTest {
                buffer,
                ty,
                pairs,
                span: test_start.to(end),
            });
        }
        self.expect(Tok::Arrow)?;
        let mut rhs = Vec::new();
        loop {
            let action_start = self.span();
            if self.at_keyword("modify") {
                self.bump();
                let (buffer, _) = self.constant("a buffer name")?;
                let (pairs, end) = self.pairs()?;
                rhs.push(Action {
                    kind: ActionKind::Modify,
                    buffer,
                    ty: None,
                    pairs,
                    span: action_start.to(end),
                });
            } else if self.at_keyword("request") {
                self.bump();
                let (buffer, _) = self.constant("a buffer name")?;
                let (ty, _) = self.constant("a type name")?;
                let (pairs, end) = self.pairs()?;
                rhs.push(Action {
                    kind: ActionKind::Request,
                    buffer,
                    ty: Some(ty),
                    pairs,
                    span: action_start.to(end),
                });
            } else if *self.peek() == Tok::RBrace {
                break;
            } else {
                return self.error(format!(
                    "expected `modify`, `request` or `}}`, found {}",
                    self.peek()
                ));
            }
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(Rule {
            name,
            lhs,
            rhs,
            span: start.to(end),
        })
    }
}

/// Parses a model. Unknown names are left for [`crate::ast::validate`].
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let mut model = parser.model()?;
    canonicalize(&mut model);
    Ok(model)
}

/// Sorts every slot-value list into the declared slot order of its type.
/// Slots unknown to the type keep their relative order at the end.
pub fn canonicalize(model: &mut Model) {
    let types = model.types.clone();
    let key = |ty: Option<&Symbol>, slot: &Symbol| {
        ty.and_then(|t| types.slot_index(t, slot))
            .unwrap_or(usize::MAX)
    };
    for c in &mut model.chunks {
        c.pairs.sort_by_key(|(s, _)| key(Some(&c.ty), s));
    }
    for rule in &mut model.rules {
        for t in &mut rule.lhs {
            t.pairs.sort_by_key(|p| key(Some(&t.ty), &p.slot));
        }
        let tested: Vec<(Symbol, Symbol)> = rule
            .lhs
            .iter()
            .map(|t| (t.buffer.clone(), t.ty.clone()))
            .collect();
        for a in &mut rule.rhs {
            let ty = match a.kind {
                ActionKind::Request => a.ty.clone(),
                ActionKind::Modify => tested
                    .iter()
                    .find(|(b, _)| *b == a.buffer)
                    .map(|(_, t)| t.clone()),
            };
            a.pairs.sort_by_key(|p| key(ty.as_ref(), &p.slot));
        }
    }
}

fn write_pairs(out: &mut String, pairs: &[SlotValuePair]) {
    if pairs.is_empty() {
        out.push_str("{}");
        return;
    }
    let items: Vec<String> = pairs
        .iter()
        .map(|p| format!("{}: {}", p.slot, p.value))
        .collect();
    let _ = write!(out, "{{ {} }}", items.join(", "));
}

/// Prints a single rule in the model syntax.
pub fn print_rule(rule: &Rule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rule {} {{", rule.name);
    for t in &rule.lhs {
        let _ = write!(out, "  {}: {} ", t.buffer, t.ty);
        write_pairs(&mut out, &t.pairs);
        out.push('\n');
    }
    out.push_str("==>\n");
    for a in &rule.rhs {
        match (a.kind, &a.ty) {
            (ActionKind::Request, Some(ty)) => {
                let _ = write!(out, "  request {} {} ", a.buffer, ty);
            }
            _ => {
                let _ = write!(out, "  modify {} ", a.buffer);
            }
        }
        write_pairs(&mut out, &a.pairs);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

/// Canonical text of a model: types, chunks, dm, buffers, then rules.
pub fn print_model(model: &Model) -> String {
    let mut model = model.clone();
    canonicalize(&mut model);
    let mut out = String::new();
    for (name, slots) in model.types.iter() {
        if name.as_str() == CHUNK_TYPE {
            continue;
        }
        if slots.is_empty() {
            let _ = writeln!(out, "type {name} {{}}");
        } else {
            let slots: Vec<&str> = slots.iter().map(Symbol::as_str).collect();
            let _ = writeln!(out, "type {name} {{ {} }}", slots.join(", "));
        }
    }
    for c in &model.chunks {
        if c.pairs.is_empty() {
            let _ = writeln!(out, "chunk {} : {} {{}}", c.id, c.ty);
        } else {
            let items: Vec<String> = c.pairs.iter().map(|(s, v)| format!("{s}: {v}")).collect();
            let _ = writeln!(out, "chunk {} : {} {{ {} }}", c.id, c.ty, items.join(", "));
        }
    }
    if !model.dm.is_empty() {
        let ids: Vec<&str> = model.dm.iter().map(|e| e.id.as_str()).collect();
        let _ = writeln!(out, "dm {{ {} }}", ids.join(", "));
    }
    for b in &model.buffers {
        let pending = if b.pending { " pending" } else { "" };
        let _ = writeln!(out, "buffer {} = {}{pending}", b.name, b.chunk);
    }
    for rule in &model.rules {
        out.push('\n');
        out.push_str(&print_rule(rule));
    }
    out
}

/// Type table of the model text, handy for tests that only need types.
pub fn parse_types(text: &str) -> Result<TypeTable, ParseError> {
    parse_model(text).map(|m| m.types)
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTING: &str = include_str!("../../cli/fixtures/counting.actr");

    #[test]
    fn parses_counting_model() {
        let m = parse_model(COUNTING).unwrap();
        assert_eq!(m.rules.len(), 1);
        assert_eq!(m.rules[0].name.as_str(), "inc");
        let ids: Vec<&str> = m.chunks.iter().map(|c| c.id.as_str()).collect();
        for id in ["1", "2", "3", "b", "c"] {
            assert!(ids.contains(&id), "missing chunk {id}");
        }
        assert!(crate::ast::validate(&m).is_empty());
    }

    #[test]
    fn chunk_type_redeclaration_is_accepted() {
        let m = parse_model("type chunk {}").unwrap();
        assert_eq!(m.types, TypeTable::new());
    }

    #[test]
    fn chunk_type_with_slots_is_rejected() {
        assert!(parse_model("type chunk { a }").is_err());
    }

    #[test]
    fn missing_colon_is_reported_at_the_offending_token() {
        let src = "rule r { goal: g { current X } ==> }";
        let err = parse_model(src).unwrap_err();
        // `X` sits at column 28
        assert_eq!((err.span.line, err.span.col), (1, 28));
        assert!(err.span.contains(1, 28));
    }

    #[test]
    fn round_trip_counting() {
        let m = parse_model(COUNTING).unwrap();
        let again = parse_model(&print_model(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn unordered_pairs_print_in_slot_order() {
        let src = "type succ { number, successor }\n\
                   chunk b : succ { successor: 2, number: 1 }\n\
                   rule r { retrieval: succ { successor: Y, number: X } ==> }";
        let printed = print_model(&parse_model(src).unwrap());
        assert!(printed.contains("chunk b : succ { number: 1, successor: 2 }"));
        assert!(printed.contains("retrieval: succ { number: X, successor: Y }"));
    }

    #[test]
    fn empty_rule_set_prints_declarations_only() {
        let src = "type g { current }\nchunk a : g { current: nil }\nbuffer goal = a\n";
        let printed = print_model(&parse_model(src).unwrap());
        assert_eq!(
            printed,
            "type g { current }\nchunk a : g { current: nil }\nbuffer goal = a\n"
        );
        assert!(!printed.contains("rule"));
    }

    #[test]
    fn generated_variable_names_reparse() {
        let m = parse_model("type g { a, b }\nrule r { goal: g { a: V#0, b: X } ==> }").unwrap();
        assert_eq!(
            m.rules[0].lhs[0].pairs[0].value,
            Value::Var(Variable::new("V#0"))
        );
    }

    #[test]
    fn comments_and_trailing_commas() {
        let src = "# numbers\ntype g { current, } # trailing\nchunk a : g { current: nil, }\n";
        let m = parse_model(src).unwrap();
        assert_eq!(m.chunks.len(), 1);
    }

    #[test]
    fn variables_are_rejected_in_chunk_declarations() {
        let err = parse_model("type g { current }\nchunk a : g { current: X }").unwrap_err();
        assert_eq!(err.span.line, 2);
    }

    #[test]
    fn unexpected_character() {
        let err = parse_model("type g { current }\n  @").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (2, 3));
    }
}
