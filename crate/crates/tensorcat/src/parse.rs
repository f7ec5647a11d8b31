//! Textual frontend for tensor networks.
//!
//! A small s-expression language with explicit index binding: a tensor
//! applies to polarized index tokens (`_i` covariant, `^i` contravariant),
//! `(contract i …)` binds the matching token pair and joins them with a
//! contraction edge, and `(deriv …)`/`(partial …)` wrap derivative boxes.
//! The forms `(raise idx)` and `(lower idx)` are index-token conversions:
//! they route a token through the metric or cometric so it can fill a slot
//! of the opposite polarity, as in `(deriv (lower ^i) …)`, which takes the
//! derivative with its direction index exposed contravariantly.
//!
//! [`parse`] produces an [`ExprAst`] or a positioned syntax error and
//! statically validates the binding discipline: within a contraction an
//! index name occurs exactly once with each polarity; a free name occurs
//! once. [`Elaborator::elaborate`] lowers an AST to a tensor network over a
//! coordinate system, resolving built-in tensor names (`metric`,
//! `cometric`, `christoffel`, `curvature`, `ricci`) and user-registered
//! component arrays.

use std::collections::BTreeMap;
use std::fmt;

use num::rational::Ratio;

use crate::albert::{
    self, constant, contract as contract_net, delta, deriv_box, embed, multiply, partial_box,
    zero_tensor, Net, Port,
};
use crate::error::{Error, Result};
use crate::geometry::{
    christoffel_generator, cometric_generator, curvature_generator, lower_index, raise_index,
    ricci_generator, CoordSystem,
};
use crate::objects::Obj;
use crate::roger::MatMorphism;
use crate::scalar::{parse_scalar, ScalarExpr};

/// An index occurrence: a polarized token, possibly routed through a
/// metric conversion to fill a slot of the opposite polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxAst {
    /// `_x`: a covariant token.
    Low(String),
    /// `^x`: a contravariant token.
    High(String),
    /// `(raise idx)`: convert a covariant token to fill a contravariant
    /// slot through the metric.
    Raise(Box<IdxAst>),
    /// `(lower idx)`: convert a contravariant token to fill a covariant
    /// slot through the cometric.
    Lower(Box<IdxAst>),
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    /// `(tensor NAME idx*)`
    Tensor(String, Vec<IdxAst>),
    /// `(delta idx idx)`
    Delta(IdxAst, IdxAst),
    /// `(mul e e)`
    Mul(Box<ExprAst>, Box<ExprAst>),
    /// `(plus e e+)`
    Plus(Vec<ExprAst>),
    /// `(scale RATIONAL e)`
    Scale(Ratio<i64>, Box<ExprAst>),
    /// `(contract i e)`
    Contract(String, Box<ExprAst>),
    /// `(deriv idx e)`
    Deriv(IdxAst, Box<ExprAst>),
    /// `(partial idx e)`
    Partial(IdxAst, Box<ExprAst>),
    /// `(zero idx*)`
    Zero(Vec<IdxAst>),
    /// `(const SCALAR)`
    Const(String),
}

impl fmt::Display for IdxAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdxAst::Low(x) => write!(f, "_{x}"),
            IdxAst::High(x) => write!(f, "^{x}"),
            IdxAst::Raise(i) => write!(f, "(raise {i})"),
            IdxAst::Lower(i) => write!(f, "(lower {i})"),
        }
    }
}

fn fmt_ratio(q: &Ratio<i64>) -> String {
    if *q.denom() == 1 {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Tensor(name, idxs) => {
                write!(f, "(tensor {name}")?;
                for i in idxs {
                    write!(f, " {i}")?;
                }
                write!(f, ")")
            }
            ExprAst::Delta(a, b) => write!(f, "(delta {a} {b})"),
            ExprAst::Mul(a, b) => write!(f, "(mul {a} {b})"),
            ExprAst::Plus(es) => {
                write!(f, "(plus")?;
                for e in es {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
            ExprAst::Scale(q, e) => write!(f, "(scale {} {e})", fmt_ratio(q)),
            ExprAst::Contract(x, e) => write!(f, "(contract {x} {e})"),
            ExprAst::Deriv(d, e) => write!(f, "(deriv {d} {e})"),
            ExprAst::Partial(d, e) => write!(f, "(partial {d} {e})"),
            ExprAst::Zero(idxs) => {
                write!(f, "(zero")?;
                for i in idxs {
                    write!(f, " {i}")?;
                }
                write!(f, ")")
            }
            ExprAst::Const(s) => write!(f, "(const {s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    LParen,
    RParen,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn perr(msg: impl Into<String>, line: usize, col: usize) -> Error {
    Error::Parse {
        msg: msg.into(),
        line,
        col,
    }
}

fn lex(src: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut atom = String::new();
    let mut atom_start = (1usize, 1usize);
    let flush = |atom: &mut String, start: (usize, usize), toks: &mut Vec<Tok>| {
        if !atom.is_empty() {
            toks.push(Tok {
                kind: TokKind::Atom(std::mem::take(atom)),
                line: start.0,
                col: start.1,
            });
        }
    };
    for c in src.chars() {
        match c {
            '(' | ')' => {
                flush(&mut atom, atom_start, &mut toks);
                toks.push(Tok {
                    kind: if c == '(' { TokKind::LParen } else { TokKind::RParen },
                    line,
                    col,
                });
                col += 1;
            }
            '\n' => {
                flush(&mut atom, atom_start, &mut toks);
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                flush(&mut atom, atom_start, &mut toks);
                col += 1;
            }
            c => {
                if atom.is_empty() {
                    atom_start = (line, col);
                }
                atom.push(c);
                col += 1;
            }
        }
    }
    flush(&mut atom, atom_start, &mut toks);
    toks
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks
            .last()
            .map(|t| (t.line, t.col + 1))
            .unwrap_or((1, 1))
    }

    fn next(&mut self, what: &str) -> Result<Tok> {
        let Some(t) = self.toks.get(self.pos).cloned() else {
            let (line, col) = self.end_pos();
            return Err(perr(format!("expected {what}, found end of input"), line, col));
        };
        self.pos += 1;
        Ok(t)
    }

    fn expect_lparen(&mut self) -> Result<Tok> {
        let t = self.next("`(`")?;
        if t.kind != TokKind::LParen {
            return Err(perr("expected `(`", t.line, t.col));
        }
        Ok(t)
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let t = self.next("`)`")?;
        if t.kind != TokKind::RParen {
            return Err(perr("expected `)`", t.line, t.col));
        }
        Ok(())
    }

    fn atom(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let t = self.next(what)?;
        match t.kind {
            TokKind::Atom(s) => Ok((s, t.line, t.col)),
            _ => Err(perr(format!("expected {what}"), t.line, t.col)),
        }
    }

    fn at_rparen(&self) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokKind::RParen)
    }

    fn parse_name(&mut self, what: &str) -> Result<String> {
        let (s, line, col) = self.atom(what)?;
        if s.starts_with('^') || s.starts_with('_') {
            return Err(perr(
                format!("expected {what}, found polarized index `{s}`"),
                line,
                col,
            ));
        }
        Ok(s)
    }

    fn parse_idx(&mut self) -> Result<IdxAst> {
        match self.peek() {
            Some(t) if t.kind == TokKind::LParen => {
                self.expect_lparen()?;
                let (head, line, col) = self.atom("`raise` or `lower`")?;
                let inner = self.parse_idx()?;
                let out = match head.as_str() {
                    "raise" => IdxAst::Raise(Box::new(inner)),
                    "lower" => IdxAst::Lower(Box::new(inner)),
                    other => {
                        return Err(perr(
                            format!("expected `raise` or `lower` in index position, found `{other}`"),
                            line,
                            col,
                        ))
                    }
                };
                self.expect_rparen()?;
                Ok(out)
            }
            _ => {
                let (s, line, col) = self.atom("an index like `_i` or `^i`")?;
                let (polarity, name) = s.split_at(1.min(s.len()));
                if name.is_empty() {
                    return Err(perr("index needs a name after `^` or `_`", line, col));
                }
                match polarity {
                    "_" => Ok(IdxAst::Low(name.to_string())),
                    "^" => Ok(IdxAst::High(name.to_string())),
                    _ => Err(perr(
                        format!("index must start with `^` or `_`, found `{s}`"),
                        line,
                        col,
                    )),
                }
            }
        }
    }

    fn parse_idx_list(&mut self) -> Result<Vec<IdxAst>> {
        let mut idxs = Vec::new();
        while !self.at_rparen() && self.peek().is_some() {
            idxs.push(self.parse_idx()?);
        }
        Ok(idxs)
    }

    fn parse_ratio(&mut self) -> Result<Ratio<i64>> {
        let (s, line, col) = self.atom("a rational number")?;
        let bad = || perr(format!("invalid rational `{s}`"), line, col);
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.parse().map_err(|_| bad())?;
            let d: i64 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(perr(format!("zero denominator in `{s}`"), line, col));
            }
            Ok(Ratio::new(n, d))
        } else {
            let n: i64 = s.parse().map_err(|_| bad())?;
            Ok(Ratio::from_integer(n))
        }
    }

    fn parse_expr(&mut self) -> Result<ExprAst> {
        self.expect_lparen()?;
        let (head, line, col) = self.atom("a form name")?;
        let out = match head.as_str() {
            "tensor" => {
                let name = self.parse_name("a tensor name")?;
                ExprAst::Tensor(name, self.parse_idx_list()?)
            }
            "delta" => {
                let a = self.parse_idx()?;
                let b = self.parse_idx()?;
                ExprAst::Delta(a, b)
            }
            "mul" => {
                let a = self.parse_expr()?;
                let b = self.parse_expr()?;
                ExprAst::Mul(Box::new(a), Box::new(b))
            }
            "plus" => {
                let mut es = vec![self.parse_expr()?, self.parse_expr()?];
                while !self.at_rparen() && self.peek().is_some() {
                    es.push(self.parse_expr()?);
                }
                ExprAst::Plus(es)
            }
            "scale" => {
                let q = self.parse_ratio()?;
                ExprAst::Scale(q, Box::new(self.parse_expr()?))
            }
            "contract" => {
                let x = self.parse_name("a bare index name")?;
                ExprAst::Contract(x, Box::new(self.parse_expr()?))
            }
            "deriv" => {
                let d = self.parse_idx()?;
                ExprAst::Deriv(d, Box::new(self.parse_expr()?))
            }
            "partial" => {
                let d = self.parse_idx()?;
                ExprAst::Partial(d, Box::new(self.parse_expr()?))
            }
            "zero" => ExprAst::Zero(self.parse_idx_list()?),
            "const" => {
                let (s, _, _) = self.atom("a scalar literal")?;
                ExprAst::Const(s)
            }
            "raise" | "lower" => {
                return Err(perr(
                    format!("`{head}` converts an index token and appears in index position only"),
                    line,
                    col,
                ))
            }
            other => return Err(perr(format!("unknown form `{other}`"), line, col)),
        };
        self.expect_rparen()?;
        Ok(out)
    }
}

type FreeSet = BTreeMap<(String, bool), ()>;

fn idx_token(idx: &IdxAst) -> (String, bool) {
    match idx {
        IdxAst::Low(x) => (x.clone(), false),
        IdxAst::High(x) => (x.clone(), true),
        IdxAst::Raise(i) | IdxAst::Lower(i) => idx_token(i),
    }
}

fn show_token(key: &(String, bool)) -> String {
    if key.1 {
        format!("^{}", key.0)
    } else {
        format!("_{}", key.0)
    }
}

fn add_token(set: &mut FreeSet, key: (String, bool)) -> Result<()> {
    if set.insert(key.clone(), ()).is_some() {
        return Err(Error::ReboundIndex(format!(
            "index `{}` occurs twice with the same polarity",
            show_token(&key)
        )));
    }
    Ok(())
}

fn merge_sets(into: &mut FreeSet, from: FreeSet) -> Result<()> {
    for (k, ()) in from {
        add_token(into, k)?;
    }
    Ok(())
}

fn free_tokens(ast: &ExprAst) -> Result<FreeSet> {
    let mut out = FreeSet::new();
    match ast {
        ExprAst::Tensor(_, idxs) | ExprAst::Zero(idxs) => {
            for i in idxs {
                add_token(&mut out, idx_token(i))?;
            }
        }
        ExprAst::Delta(a, b) => {
            add_token(&mut out, idx_token(a))?;
            add_token(&mut out, idx_token(b))?;
        }
        ExprAst::Mul(a, b) => {
            out = free_tokens(a)?;
            merge_sets(&mut out, free_tokens(b)?)?;
        }
        ExprAst::Plus(es) => {
            out = free_tokens(&es[0])?;
            for e in &es[1..] {
                let other = free_tokens(e)?;
                if other != out {
                    return Err(Error::TypeMismatch(
                        "sum branches expose different free indices".to_string(),
                    ));
                }
            }
        }
        ExprAst::Scale(_, e) => out = free_tokens(e)?,
        ExprAst::Contract(x, e) => {
            out = free_tokens(e)?;
            for high in [true, false] {
                let key = (x.clone(), high);
                if out.remove(&key).is_none() {
                    return Err(Error::UnboundIndex(format!(
                        "contraction over `{x}` finds no `{}`",
                        show_token(&key)
                    )));
                }
            }
        }
        ExprAst::Deriv(d, e) | ExprAst::Partial(d, e) => {
            out = free_tokens(e)?;
            add_token(&mut out, idx_token(d))?;
        }
        ExprAst::Const(_) => {}
    }
    Ok(out)
}

fn check_top_level(ast: &ExprAst) -> Result<()> {
    let free = free_tokens(ast)?;
    for (name, high) in free.keys() {
        if *high && free.contains_key(&(name.clone(), false)) {
            return Err(Error::UnboundIndex(format!(
                "index `{name}` appears as both `^{name}` and `_{name}` but is never contracted"
            )));
        }
    }
    Ok(())
}

/// Parse a source string into an expression tree, validating the index
/// binding discipline: rebinding a polarity is rejected, and every
/// contraction must find both polarities of its name.
pub fn parse(src: &str) -> Result<ExprAst> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
    };
    let ast = p.parse_expr()?;
    if let Some(t) = p.peek() {
        return Err(perr("unexpected trailing input", t.line, t.col));
    }
    check_top_level(&ast)?;
    Ok(ast)
}

const BUILTINS: [&str; 5] = ["metric", "cometric", "christoffel", "curvature", "ricci"];

/// An elaborated expression: a tensor network together with its free
/// ports keyed by index name.
#[derive(Debug, Clone)]
pub struct Elaborated {
    pub net: Net,
    pub free: BTreeMap<String, Port>,
}

type Binds = BTreeMap<(String, bool), Port>;

/// Lowers expression trees to tensor networks over a coordinate system.
/// Built-in tensor names resolve to the system's metric data; additional
/// component arrays can be registered as named generators in state form.
pub struct Elaborator<'a> {
    cs: &'a CoordSystem,
    prims: BTreeMap<String, MatMorphism>,
}

fn leaves(o: &Obj) -> Vec<Obj> {
    match o {
        Obj::Unit => vec![],
        Obj::Prod(a, b) => {
            let mut v = leaves(a);
            v.extend(leaves(b));
            v
        }
        other => vec![other.clone()],
    }
}

fn merge_binds(into: &mut Binds, from: Binds) -> Result<()> {
    for (k, v) in from {
        if into.insert(k.clone(), v).is_some() {
            return Err(Error::ReboundIndex(format!(
                "index `{}` occurs twice with the same polarity",
                show_token(&k)
            )));
        }
    }
    Ok(())
}

impl<'a> Elaborator<'a> {
    pub fn new(cs: &'a CoordSystem) -> Self {
        Self {
            cs,
            prims: BTreeMap::new(),
        }
    }

    /// Register a named component array; `m` must be in state form
    /// (codomain the unit object). Built-in names are reserved.
    pub fn register(&mut self, name: &str, m: MatMorphism) -> Result<()> {
        if BUILTINS.contains(&name) {
            return Err(Error::TypeMismatch(format!(
                "tensor name `{name}` is built in and cannot be replaced"
            )));
        }
        if m.cod() != &Obj::Unit {
            return Err(Error::TypeMismatch(format!(
                "registered tensor `{name}` must be in state form, found codomain {}",
                m.cod()
            )));
        }
        self.prims.insert(name.to_string(), m);
        Ok(())
    }

    fn lookup(&self, name: &str) -> Result<MatMorphism> {
        match name {
            "metric" => Ok(self.cs.metric_state()),
            "cometric" => cometric_generator(self.cs),
            "christoffel" => christoffel_generator(self.cs),
            "curvature" => curvature_generator(self.cs),
            "ricci" => ricci_generator(self.cs),
            other => self.prims.get(other).cloned().ok_or_else(|| {
                Error::UnboundSymbol(format!("unknown tensor name `{other}`"))
            }),
        }
    }

    /// The object a slot filled by this index form must carry.
    fn slot_obj(&self, idx: &IdxAst) -> Obj {
        match idx {
            IdxAst::Low(_) | IdxAst::Lower(_) => self.cs.atom(),
            IdxAst::High(_) | IdxAst::Raise(_) => self.cs.atom().dual(),
        }
    }

    fn resolve_idx(
        &self,
        idx: &IdxAst,
        expected: &Obj,
        binds: &mut Binds,
        frags: &mut Vec<Net>,
    ) -> Result<Port> {
        match idx {
            IdxAst::Low(x) => {
                if !matches!(expected, Obj::Atom(_)) {
                    return Err(Error::TypeMismatch(format!(
                        "index `_{x}` fills a slot expecting {expected}"
                    )));
                }
                let p = albert::fresh_port(expected);
                merge_binds(binds, Binds::from([((x.clone(), false), p.clone())]))?;
                Ok(p)
            }
            IdxAst::High(x) => {
                if !matches!(expected, Obj::Dual(_)) {
                    return Err(Error::TypeMismatch(format!(
                        "index `^{x}` fills a slot expecting {expected}"
                    )));
                }
                let p = albert::fresh_port(expected);
                merge_binds(binds, Binds::from([((x.clone(), true), p.clone())]))?;
                Ok(p)
            }
            IdxAst::Raise(inner) => {
                if expected != &self.cs.atom().dual() {
                    return Err(Error::TypeMismatch(format!(
                        "`(raise {inner})` produces a contravariant index, \
                         but the slot expects {expected}"
                    )));
                }
                let token = self.resolve_idx(inner, &self.cs.atom(), binds, frags)?;
                let (frag, out) = raise_index(self.cs, &token)?;
                frags.push(frag);
                Ok(out)
            }
            IdxAst::Lower(inner) => {
                if expected != &self.cs.atom() {
                    return Err(Error::TypeMismatch(format!(
                        "`(lower {inner})` produces a covariant index, \
                         but the slot expects {expected}"
                    )));
                }
                let token = self.resolve_idx(inner, &self.cs.atom().dual(), binds, frags)?;
                let (frag, out) = lower_index(self.cs, &token)?;
                frags.push(frag);
                Ok(out)
            }
        }
    }

    fn elab(&self, ast: &ExprAst) -> Result<(Net, Binds)> {
        match ast {
            ExprAst::Tensor(name, idxs) => {
                let m = self.lookup(name)?;
                let slots = leaves(m.dom());
                if slots.len() != idxs.len() {
                    return Err(Error::TypeMismatch(format!(
                        "tensor `{name}` has {} slots but {} indices were given",
                        slots.len(),
                        idxs.len()
                    )));
                }
                let mut binds = Binds::new();
                let mut frags = Vec::new();
                let mut ports = Vec::new();
                for (idx, obj) in idxs.iter().zip(&slots) {
                    ports.push(self.resolve_idx(idx, obj, &mut binds, &mut frags)?);
                }
                let mut net = embed(name, &m, &ports)?;
                for frag in frags {
                    net = multiply(net, frag)?;
                }
                Ok((net, binds))
            }
            ExprAst::Delta(a, b) => {
                let mut binds = Binds::new();
                let mut frags = Vec::new();
                let pa = self.resolve_idx(a, &self.slot_obj(a), &mut binds, &mut frags)?;
                let pb = self.resolve_idx(b, &self.slot_obj(b), &mut binds, &mut frags)?;
                let mut net = delta(&pa, &pb)?;
                for frag in frags {
                    net = multiply(net, frag)?;
                }
                Ok((net, binds))
            }
            ExprAst::Mul(a, b) => {
                let (na, mut binds) = self.elab(a)?;
                let (nb, bb) = self.elab(b)?;
                merge_binds(&mut binds, bb)?;
                Ok((multiply(na, nb)?, binds))
            }
            ExprAst::Plus(es) => {
                let (first, binds) = self.elab(&es[0])?;
                let mut branches = vec![first];
                for e in &es[1..] {
                    let (n, b) = self.elab(e)?;
                    if b.keys().collect::<Vec<_>>() != binds.keys().collect::<Vec<_>>() {
                        return Err(Error::TypeMismatch(
                            "sum branches expose different free indices".to_string(),
                        ));
                    }
                    let mut rename = BTreeMap::new();
                    for (k, p) in &b {
                        let target = &binds[k];
                        if p.obj() != target.obj() {
                            return Err(Error::TypeMismatch(format!(
                                "index `{}` carries {} in one branch and {} in another",
                                show_token(k),
                                target.obj(),
                                p.obj()
                            )));
                        }
                        rename.insert(p.id(), target.clone());
                    }
                    branches.push(albert::rename_ports(&n, &rename));
                }
                Ok((albert::plus(branches)?, binds))
            }
            ExprAst::Scale(q, e) => {
                let (net, binds) = self.elab(e)?;
                let c = constant(&fmt_ratio(q), ScalarExpr::rat(*q.numer(), *q.denom()));
                Ok((multiply(net, c)?, binds))
            }
            ExprAst::Contract(x, e) => {
                let (net, mut binds) = self.elab(e)?;
                let hi = binds.remove(&(x.clone(), true)).ok_or_else(|| {
                    Error::UnboundIndex(format!("contraction over `{x}` finds no `^{x}`"))
                })?;
                let lo = binds.remove(&(x.clone(), false)).ok_or_else(|| {
                    Error::UnboundIndex(format!("contraction over `{x}` finds no `_{x}`"))
                })?;
                Ok((contract_net(net, &hi, &lo)?, binds))
            }
            ExprAst::Deriv(d, e) | ExprAst::Partial(d, e) => {
                let (body, mut binds) = self.elab(e)?;
                let mut dbinds = Binds::new();
                let mut frags = Vec::new();
                let dir = self.resolve_idx(d, &self.cs.atom(), &mut dbinds, &mut frags)?;
                let mut net = if matches!(ast, ExprAst::Deriv(..)) {
                    deriv_box(&dir, body)?
                } else {
                    partial_box(&dir, body)?
                };
                for frag in frags {
                    net = multiply(net, frag)?;
                }
                merge_binds(&mut binds, dbinds)?;
                Ok((net, binds))
            }
            ExprAst::Zero(idxs) => {
                let mut binds = Binds::new();
                let mut frags = Vec::new();
                let mut ports = Vec::new();
                for idx in idxs {
                    ports.push(self.resolve_idx(idx, &self.slot_obj(idx), &mut binds, &mut frags)?);
                }
                let mut net = zero_tensor(&ports)?;
                for frag in frags {
                    net = multiply(net, frag)?;
                }
                Ok((net, binds))
            }
            ExprAst::Const(s) => {
                let value = parse_scalar(s)?;
                Ok((constant(s, value), Binds::new()))
            }
        }
    }

    /// Lower an expression tree to a network over this coordinate system.
    pub fn elaborate(&self, ast: &ExprAst) -> Result<Elaborated> {
        let (net, binds) = self.elab(ast)?;
        let mut free = BTreeMap::new();
        for ((name, high), port) in &binds {
            if *high && binds.contains_key(&(name.clone(), false)) {
                return Err(Error::UnboundIndex(format!(
                    "index `{name}` appears as both `^{name}` and `_{name}` \
                     but is never contracted"
                )));
            }
            free.insert(name.clone(), port.clone());
        }
        Ok(Elaborated { net, free })
    }
}
