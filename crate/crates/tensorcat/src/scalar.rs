//! Symbolic scalar kernel.
//!
//! Expression trees over coordinate variables with exact rational constants,
//! symbolic differentiation, numeric evaluation, light normalization, and a
//! seeded probabilistic zero test. Scalars are immutable and cheaply clonable
//! (shared subtrees); every operation is a pure function.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Coordinate variable or named constant (e.g. `rho`, `theta`, `r_s`, `c`).
pub type VarName = String;

/// Numeric binding of every symbol in scope to a double value.
pub type NumEnv = BTreeMap<VarName, f64>;

/// Maximum resampling attempts per requested sample point in [`ScalarExpr::is_zero`].
const RETRY_CAP: u32 = 200;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Node {
    Const(BigRational),
    Symbol(VarName),
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Neg(ScalarExpr),
    Recip(ScalarExpr),
    IntPow(ScalarExpr, i32),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Log(ScalarExpr),
}

/// A symbolic scalar: an immutable expression tree with structural equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarExpr(Arc<Node>);

impl ScalarExpr {
    fn new(node: Node) -> Self {
        ScalarExpr(Arc::new(node))
    }

    /// Exact rational constant.
    pub fn const_q(q: BigRational) -> Self {
        Self::new(Node::Const(q))
    }

    /// Integer constant.
    pub fn int(n: i64) -> Self {
        Self::const_q(BigRational::from_integer(BigInt::from(n)))
    }

    /// Rational constant `n/d`.
    pub fn rat(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::const_q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// Coordinate variable / named constant.
    pub fn var(name: &str) -> Self {
        Self::new(Node::Symbol(name.to_string()))
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(&*self.0, Node::Const(c) if c.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        matches!(&*self.0, Node::Const(c) if c.is_one())
    }

    /// Constant value if this is a literal constant.
    pub fn as_const(&self) -> Option<&BigRational> {
        match &*self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// n-ary sum with constant folding: flattens nested sums, folds constants,
    /// drops zeros. An empty sum is 0; a singleton is its element.
    pub fn add(terms: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::new();
        let mut acc = BigRational::zero();
        for t in terms {
            match &*t.0 {
                Node::Add(inner) => {
                    for u in inner {
                        match &*u.0 {
                            Node::Const(c) => acc += c,
                            _ => flat.push(u.clone()),
                        }
                    }
                }
                Node::Const(c) => acc += c,
                _ => flat.push(t),
            }
        }
        if !acc.is_zero() {
            flat.push(Self::const_q(acc));
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::new(Node::Add(flat)),
        }
    }

    /// n-ary product with constant folding: flattens nested products, folds
    /// constants, annihilates on 0, drops 1s, and hoists negations out.
    pub fn mul(factors: Vec<ScalarExpr>) -> Self {
        let mut flat = Vec::new();
        let mut acc = BigRational::one();
        let mut pending = factors;
        pending.reverse();
        while let Some(f) = pending.pop() {
            match &*f.0 {
                Node::Mul(inner) => {
                    for u in inner.iter().rev() {
                        pending.push(u.clone());
                    }
                }
                Node::Const(c) => acc *= c,
                Node::Neg(inner) => {
                    acc = -acc;
                    pending.push(inner.clone());
                }
                _ => flat.push(f),
            }
        }
        if acc.is_zero() {
            return Self::zero();
        }
        if !acc.is_one() {
            flat.insert(0, Self::const_q(acc));
        }
        match flat.len() {
            0 => Self::one(),
            1 => flat.pop().unwrap(),
            _ => Self::new(Node::Mul(flat)),
        }
    }

    /// Negation; folds constants and double negations.
    pub fn neg(self) -> Self {
        match &*self.0 {
            Node::Const(c) => Self::const_q(-c.clone()),
            Node::Neg(inner) => inner.clone(),
            _ => Self::new(Node::Neg(self)),
        }
    }

    /// Multiplicative inverse; folds nonzero constants and double reciprocals.
    /// `recip(0)` stays symbolic and surfaces only at evaluation time.
    pub fn recip(self) -> Self {
        match &*self.0 {
            Node::Const(c) if !c.is_zero() => Self::const_q(c.recip()),
            Node::Recip(inner) => inner.clone(),
            Node::Neg(inner) => inner.clone().recip().neg(),
            Node::IntPow(base, n) => Self::new(Node::IntPow(base.clone(), -n)),
            _ => Self::new(Node::Recip(self)),
        }
    }

    /// Integer power; folds `x^0 = 1`, `x^1 = x`, constants, and nested powers.
    pub fn int_pow(self, n: i32) -> Self {
        match n {
            0 => return Self::one(),
            1 => return self,
            _ => {}
        }
        match &*self.0 {
            Node::Const(c) if !(c.is_zero() && n < 0) => Self::const_q(c.pow(n)),
            Node::IntPow(base, m) => Self::new(Node::IntPow(base.clone(), m * n)),
            Node::Recip(inner) => Self::new(Node::IntPow(inner.clone(), -n)),
            _ => Self::new(Node::IntPow(self, n)),
        }
    }

    pub fn sin(self) -> Self {
        if self.is_const_zero() {
            return Self::zero();
        }
        Self::new(Node::Sin(self))
    }

    pub fn cos(self) -> Self {
        if self.is_const_zero() {
            return Self::one();
        }
        Self::new(Node::Cos(self))
    }

    pub fn log(self) -> Self {
        if self.is_const_one() {
            return Self::zero();
        }
        Self::new(Node::Log(self))
    }

    /// All symbols occurring in the expression.
    pub fn free_symbols(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<VarName>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Symbol(v) => {
                out.insert(v.clone());
            }
            Node::Add(ts) | Node::Mul(ts) => {
                for t in ts {
                    t.collect_symbols(out);
                }
            }
            Node::Neg(e) | Node::Recip(e) | Node::Sin(e) | Node::Cos(e) | Node::Log(e) => {
                e.collect_symbols(out)
            }
            Node::IntPow(e, _) => e.collect_symbols(out),
        }
    }

    /// Symbolic partial derivative with respect to `v`.
    pub fn diff(&self, v: &str) -> Self {
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Symbol(name) => {
                if name == v {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(ts) => Self::add(ts.iter().map(|t| t.diff(v)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.diff(v);
                    if df.is_const_zero() {
                        continue;
                    }
                    let mut factors = vec![df];
                    for (j, g) in fs.iter().enumerate() {
                        if i != j {
                            factors.push(g.clone());
                        }
                    }
                    terms.push(Self::mul(factors));
                }
                Self::add(terms)
            }
            Node::Neg(e) => e.diff(v).neg(),
            Node::Recip(e) => {
                let de = e.diff(v);
                if de.is_const_zero() {
                    return Self::zero();
                }
                Self::mul(vec![de, e.clone().int_pow(-2)]).neg()
            }
            Node::IntPow(e, n) => {
                let de = e.diff(v);
                if de.is_const_zero() {
                    return Self::zero();
                }
                Self::mul(vec![Self::int(*n as i64), e.clone().int_pow(n - 1), de])
            }
            Node::Sin(e) => Self::mul(vec![e.clone().cos(), e.diff(v)]),
            Node::Cos(e) => Self::mul(vec![e.clone().sin(), e.diff(v)]).neg(),
            Node::Log(e) => Self::mul(vec![e.diff(v), e.clone().recip()]),
        }
    }

    /// Numeric evaluation under `env`. Division by zero and logarithms of
    /// non-positive arguments are singular; missing symbols are errors.
    pub fn eval_num(&self, env: &NumEnv) -> Result<f64> {
        match &*self.0 {
            Node::Const(c) => Ok(rational_to_f64(c)),
            Node::Symbol(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| Error::UnboundSymbol(v.clone())),
            Node::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_num(env)?;
                }
                Ok(acc)
            }
            Node::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_num(env)?;
                }
                Ok(acc)
            }
            Node::Neg(e) => Ok(-e.eval_num(env)?),
            Node::Recip(e) => {
                let d = e.eval_num(env)?;
                let r = 1.0 / d;
                if d == 0.0 || !r.is_finite() {
                    return Err(Error::EvalSingular(format!("reciprocal of {d}")));
                }
                Ok(r)
            }
            Node::IntPow(e, n) => {
                let b = e.eval_num(env)?;
                if b == 0.0 && *n < 0 {
                    return Err(Error::EvalSingular("negative power of zero".into()));
                }
                let r = b.powi(*n);
                if !r.is_finite() {
                    return Err(Error::EvalSingular(format!("{b}^{n} overflows")));
                }
                Ok(r)
            }
            Node::Sin(e) => Ok(e.eval_num(env)?.sin()),
            Node::Cos(e) => Ok(e.eval_num(env)?.cos()),
            Node::Log(e) => {
                let x = e.eval_num(env)?;
                if x <= 0.0 {
                    return Err(Error::EvalSingular(format!("log of {x}")));
                }
                Ok(x.ln())
            }
        }
    }

    /// Probabilistic zero test: true iff |value| < `tol` at `trials` points
    /// sampled from `dom`, resampling on singular points up to a retry cap.
    /// Deterministic for a fixed `(expr, dom, trials, tol, seed)`.
    pub fn is_zero(&self, dom: &Domain, trials: u32, tol: f64, seed: u64) -> Result<bool> {
        assert!(trials >= 1, "trials must be >= 1");
        assert!(tol > 0.0, "tol must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let mut found = None;
            for _ in 0..RETRY_CAP {
                let env = dom.sample(&mut rng);
                match self.eval_num(&env) {
                    Ok(v) if v.is_finite() => {
                        found = Some(v);
                        break;
                    }
                    Ok(_) | Err(Error::EvalSingular(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            match found {
                Some(v) => {
                    if v.abs() >= tol {
                        return Ok(false);
                    }
                }
                None => {
                    return Err(Error::SamplingExhausted(format!(
                        "{RETRY_CAP} retries per point, {trials} points requested"
                    )))
                }
            }
        }
        Ok(true)
    }

    /// Light normalization: recursive constant folding, sum/product
    /// flattening, and like-term collection over identical subtrees.
    /// Value-preserving but not canonical.
    pub fn simplify(&self) -> Self {
        match &*self.0 {
            Node::Const(_) | Node::Symbol(_) => self.clone(),
            Node::Add(ts) => collect_sum(ts.iter().map(|t| t.simplify()).collect()),
            Node::Mul(fs) => collect_product(fs.iter().map(|f| f.simplify()).collect()),
            Node::Neg(e) => e.simplify().neg(),
            Node::Recip(e) => e.simplify().recip(),
            Node::IntPow(e, n) => e.simplify().int_pow(*n),
            Node::Sin(e) => e.simplify().sin(),
            Node::Cos(e) => e.simplify().cos(),
            Node::Log(e) => e.simplify().log(),
        }
    }

    /// Substitute an expression for a symbol.
    pub fn subst(&self, v: &str, replacement: &ScalarExpr) -> Self {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Symbol(name) => {
                if name == v {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Node::Add(ts) => Self::add(ts.iter().map(|t| t.subst(v, replacement)).collect()),
            Node::Mul(fs) => Self::mul(fs.iter().map(|f| f.subst(v, replacement)).collect()),
            Node::Neg(e) => e.subst(v, replacement).neg(),
            Node::Recip(e) => e.subst(v, replacement).recip(),
            Node::IntPow(e, n) => e.subst(v, replacement).int_pow(*n),
            Node::Sin(e) => e.subst(v, replacement).sin(),
            Node::Cos(e) => e.subst(v, replacement).cos(),
            Node::Log(e) => e.subst(v, replacement).log(),
        }
    }
}

/// Split `coeff * rest` out of a term for like-term collection.
fn split_coeff(t: ScalarExpr) -> (BigRational, ScalarExpr) {
    match &*t.0 {
        Node::Neg(inner) => {
            let (c, rest) = split_coeff(inner.clone());
            (-c, rest)
        }
        Node::Mul(fs) => {
            let mut coeff = BigRational::one();
            let mut rest = Vec::new();
            for f in fs {
                match &*f.0 {
                    Node::Const(c) => coeff *= c,
                    _ => rest.push(f.clone()),
                }
            }
            (coeff, ScalarExpr::mul(rest))
        }
        Node::Const(c) => (c.clone(), ScalarExpr::one()),
        _ => (BigRational::one(), t),
    }
}

fn collect_sum(terms: Vec<ScalarExpr>) -> ScalarExpr {
    let flat = match &*ScalarExpr::add(terms).0 {
        Node::Add(ts) => ts.clone(),
        _single => return ScalarExpr::add(vec![ScalarExpr(Arc::new(_single.clone()))]),
    };
    let mut buckets: BTreeMap<ScalarExpr, BigRational> = BTreeMap::new();
    for t in flat {
        let (c, rest) = split_coeff(t);
        *buckets.entry(rest).or_insert_with(BigRational::zero) += c;
    }
    let mut out = Vec::new();
    for (rest, c) in buckets {
        if c.is_zero() {
            continue;
        }
        out.push(ScalarExpr::mul(vec![ScalarExpr::const_q(c), rest]));
    }
    ScalarExpr::add(out)
}

fn collect_product(factors: Vec<ScalarExpr>) -> ScalarExpr {
    let flat = match &*ScalarExpr::mul(factors).0 {
        Node::Mul(fs) => fs.clone(),
        _single => return ScalarExpr::mul(vec![ScalarExpr(Arc::new(_single.clone()))]),
    };
    let mut coeff = BigRational::one();
    let mut powers: BTreeMap<ScalarExpr, i64> = BTreeMap::new();
    let mut ordered: Vec<ScalarExpr> = Vec::new();
    for f in flat {
        let (base, exp): (ScalarExpr, i64) = match &*f.0 {
            Node::Const(c) => {
                coeff *= c;
                continue;
            }
            Node::Recip(inner) => (inner.clone(), -1),
            Node::IntPow(base, n) => (base.clone(), *n as i64),
            _ => (f.clone(), 1),
        };
        if !powers.contains_key(&base) {
            ordered.push(base.clone());
        }
        *powers.entry(base).or_insert(0) += exp;
    }
    let mut out = vec![ScalarExpr::const_q(coeff)];
    for base in ordered {
        let exp = powers[&base];
        if exp == 0 {
            continue;
        }
        out.push(base.int_pow(exp as i32));
    }
    ScalarExpr::mul(out)
}

fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl std::ops::Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(vec![self, rhs])
    }
}

impl std::ops::Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(vec![self, rhs.neg()])
    }
}

impl std::ops::Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(vec![self, rhs])
    }
}

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

/// Sampling binding for one symbol: an open interval or a pinned value.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Interval(f64, f64),
    Fixed(f64),
}

/// Per-symbol sampling domain for the probabilistic zero test. Encodes
/// "everywhere the expression is defined" as open intervals away from known
/// singular loci, plus pinned values for named constants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Domain {
    bindings: BTreeMap<VarName, Binding>,
}

impl Domain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add an open interval for `name`; requires `lo < hi`.
    pub fn interval(mut self, name: &str, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "degenerate interval for {name}");
        self.bindings.insert(name.to_string(), Binding::Interval(lo, hi));
        self
    }

    /// Pin `name` to a fixed value (named constants like `r_s`, `c`).
    pub fn fixed(mut self, name: &str, v: f64) -> Self {
        self.bindings.insert(name.to_string(), Binding::Fixed(v));
        self
    }

    pub fn bindings(&self) -> &BTreeMap<VarName, Binding> {
        &self.bindings
    }

    /// Draw one point; symbols are visited in lexicographic order so the
    /// stream of draws is reproducible.
    pub fn sample(&self, rng: &mut impl Rng) -> NumEnv {
        let mut env = NumEnv::new();
        for (name, b) in &self.bindings {
            let v = match b {
                Binding::Interval(lo, hi) => rng.random_range(*lo..*hi),
                Binding::Fixed(v) => *v,
            };
            env.insert(name.clone(), v);
        }
        env
    }
}

enum Prec {
    Sum,
    Factor,
    Power,
}

impl ScalarExpr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: Prec) -> fmt::Result {
        let needs_parens = match (&*self.0, &prec) {
            (Node::Add(_), Prec::Factor | Prec::Power) => true,
            (Node::Neg(_), Prec::Factor | Prec::Power) => true,
            (Node::Mul(_) | Node::Recip(_) | Node::IntPow(..), Prec::Power) => true,
            (Node::Const(c), Prec::Factor | Prec::Power) => !c.denom().is_one() || c.is_negative(),
            _ => false,
        };
        if needs_parens {
            write!(f, "(")?;
        }
        match &*self.0 {
            Node::Const(c) => {
                if c.denom().is_one() {
                    write!(f, "{}", c.numer())?;
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())?;
                }
            }
            Node::Symbol(v) => write!(f, "{v}")?,
            Node::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if let Node::Neg(inner) = &*t.0 {
                        write!(f, "{}", if i == 0 { "-" } else { " - " })?;
                        inner.fmt_prec(f, Prec::Factor)?;
                    } else {
                        if i > 0 {
                            write!(f, " + ")?;
                        }
                        t.fmt_prec(f, Prec::Sum)?;
                    }
                }
            }
            Node::Mul(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    x.fmt_prec(f, Prec::Factor)?;
                }
            }
            Node::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, Prec::Factor)?;
            }
            Node::Recip(e) => {
                e.fmt_prec(f, Prec::Power)?;
                write!(f, "^-1")?;
            }
            Node::IntPow(e, n) => {
                e.fmt_prec(f, Prec::Power)?;
                write!(f, "^{n}")?;
            }
            Node::Sin(e) => write!(f, "sin({e})")?,
            Node::Cos(e) => write!(f, "cos({e})")?,
            Node::Log(e) => write!(f, "log({e})")?,
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, Prec::Sum)
    }
}

/// Parse the textual scalar syntax emitted by [`Display`]: infix `+ - * /`,
/// `^` for integer powers, `sin(..)`, `cos(..)`, `log(..)`, integer, rational
/// (`3/4` parses as division, which folds), and decimal literals.
pub fn parse_scalar(src: &str) -> Result<ScalarExpr> {
    let mut p = ScalarParser {
        chars: src.char_indices().peekable(),
        src,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if let Some(&(pos, c)) = p.chars.peek() {
        return Err(p.error(format!("unexpected character {c:?}"), pos));
    }
    Ok(e)
}

struct ScalarParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl<'a> ScalarParser<'a> {
    fn error(&self, msg: String, pos: usize) -> Error {
        let pre = &self.src[..pos.min(self.src.len())];
        let line = pre.matches('\n').count() + 1;
        let col = pos - pre.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
        Error::Parse { msg, line, col }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if matches!(self.chars.peek(), Some(&(_, c)) if c == want) {
            self.chars.next();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc * self.factor()?;
            } else if self.eat('/') {
                acc = acc * self.factor()?.recip();
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<ScalarExpr> {
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let n = self.integer()?;
            let n = i32::try_from(n).map_err(|_| self.error("exponent too large".into(), 0))?;
            return Ok(base.int_pow(if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let mut digits = String::new();
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_ascii_digit()) {
            digits.push(self.chars.next().unwrap().1);
        }
        if digits.is_empty() {
            let pos = self.chars.peek().map(|&(p, _)| p).unwrap_or(self.src.len());
            return Err(self.error("expected integer".into(), pos));
        }
        digits
            .parse()
            .map_err(|_| self.error("integer out of range".into(), 0))
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        self.skip_ws();
        let Some(&(pos, c)) = self.chars.peek() else {
            return Err(self.error("unexpected end of input".into(), self.src.len()));
        };
        if c == '(' {
            self.chars.next();
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'".into(), pos));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() {
            return self.number(pos);
        }
        if c.is_alphabetic() || c == '_' {
            let mut name = String::new();
            while matches!(self.chars.peek(), Some(&(_, ch)) if ch.is_alphanumeric() || ch == '_') {
                name.push(self.chars.next().unwrap().1);
            }
            if self.eat('(') {
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'".into(), pos));
                }
                return match name.as_str() {
                    "sin" => Ok(arg.sin()),
                    "cos" => Ok(arg.cos()),
                    "log" => Ok(arg.log()),
                    _ => Err(self.error(format!("unknown function {name}"), pos)),
                };
            }
            return Ok(ScalarExpr::var(&name));
        }
        Err(self.error(format!("unexpected character {c:?}"), pos))
    }

    fn number(&mut self, pos: usize) -> Result<ScalarExpr> {
        let mut whole = String::new();
        while matches!(self.chars.peek(), Some(&(_, ch)) if ch.is_ascii_digit()) {
            whole.push(self.chars.next().unwrap().1);
        }
        let mut frac = String::new();
        if matches!(self.chars.peek(), Some(&(_, '.'))) {
            self.chars.next();
            while matches!(self.chars.peek(), Some(&(_, ch)) if ch.is_ascii_digit()) {
                frac.push(self.chars.next().unwrap().1);
            }
            if frac.is_empty() {
                return Err(self.error("expected digits after decimal point".into(), pos));
            }
        }
        let numer: BigInt = format!("{whole}{frac}")
            .parse()
            .map_err(|_| self.error("bad number".into(), pos))?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(ScalarExpr::const_q(BigRational::new(numer, denom)))
    }
}

/// Parse a `--at` point like `rho=2.0,theta=0.3` into a numeric environment.
pub fn parse_point(src: &str) -> Result<NumEnv> {
    let mut env = NumEnv::new();
    for (i, pair) in src.split(',').enumerate() {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let Some((name, value)) = pair.split_once('=') else {
            return Err(Error::Parse {
                msg: format!("expected name=value, got {pair:?}"),
                line: 1,
                col: i + 1,
            });
        };
        let v: f64 = value.trim().parse().map_err(|_| Error::Parse {
            msg: format!("bad numeric value {value:?}"),
            line: 1,
            col: i + 1,
        })?;
        env.insert(name.trim().to_string(), v);
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho() -> ScalarExpr {
        ScalarExpr::var("rho")
    }

    fn theta() -> ScalarExpr {
        ScalarExpr::var("theta")
    }

    fn polar_domain() -> Domain {
        Domain::new()
            .interval("rho", 0.5, 3.0)
            .interval("theta", 0.1, 3.0)
    }

    fn assert_same(a: &ScalarExpr, b: &ScalarExpr, dom: &Domain) {
        let d = a.clone() - b.clone();
        assert!(
            d.is_zero(dom, 50, 1e-9, 7).unwrap(),
            "expressions differ: {a} vs {b}"
        );
    }

    #[test]
    fn constant_folding() {
        assert!(ScalarExpr::int(0).is_const_zero());
        assert_eq!(ScalarExpr::mul(vec![ScalarExpr::zero(), rho()]), ScalarExpr::zero());
        assert_eq!(ScalarExpr::mul(vec![ScalarExpr::one(), rho()]), rho());
        assert_eq!(ScalarExpr::add(vec![ScalarExpr::zero(), rho()]), rho());
        assert_eq!(rho().neg().neg(), rho());
        assert_eq!(rho().int_pow(0), ScalarExpr::one());
        assert_eq!(rho().int_pow(1), rho());
        assert_eq!(ScalarExpr::rat(1, 2) + ScalarExpr::rat(1, 2), ScalarExpr::one());
        assert_eq!(ScalarExpr::rat(2, 4), ScalarExpr::rat(1, 2));
    }

    #[test]
    fn schwarzschild_time_entry_evaluates() {
        // -(1 - r_s/rho) * c^2 at r_s=1, rho=2, c=1 is -1/2.
        let e = (ScalarExpr::one() - ScalarExpr::var("r_s") * rho().recip()).neg()
            * ScalarExpr::var("c").int_pow(2);
        let mut env = NumEnv::new();
        env.insert("r_s".into(), 1.0);
        env.insert("rho".into(), 2.0);
        env.insert("c".into(), 1.0);
        assert_eq!(e.eval_num(&env).unwrap(), -0.5);
    }

    #[test]
    fn eval_basics() {
        let mut env = NumEnv::new();
        env.insert("rho".into(), 3.0);
        assert_eq!(rho().int_pow(2).eval_num(&env).unwrap(), 9.0);
        assert_eq!(rho().eval_num(&env).unwrap(), 3.0);
        let unbound = theta().eval_num(&env).unwrap_err();
        assert_eq!(unbound.code(), "E_UNBOUND_SYMBOL");
    }

    #[test]
    fn eval_singularities() {
        let mut env = NumEnv::new();
        env.insert("rho".into(), 0.0);
        assert_eq!(rho().log().eval_num(&env).unwrap_err().code(), "E_EVAL_SINGULAR");
        assert_eq!(rho().recip().eval_num(&env).unwrap_err().code(), "E_EVAL_SINGULAR");
        assert_eq!(
            rho().int_pow(-2).eval_num(&env).unwrap_err().code(),
            "E_EVAL_SINGULAR"
        );
    }

    #[test]
    fn diff_log_gives_reciprocal() {
        let p = rho().log().neg();
        let grad = p.diff("rho");
        assert_same(&grad, &rho().recip().neg(), &polar_domain());
        assert_eq!(theta().diff("rho"), ScalarExpr::zero());
        let second = grad.diff("rho");
        assert_same(&second, &rho().int_pow(-2), &polar_domain());
    }

    #[test]
    fn diff_trig_chain() {
        let e = (rho().clone() * theta()).sin();
        let d = e.diff("theta");
        let expected = (rho() * theta()).cos() * rho();
        assert_same(&d, &expected, &polar_domain());
    }

    #[test]
    fn is_zero_identities() {
        let dom = polar_domain();
        let e = rho() * rho().recip() - ScalarExpr::one();
        assert!(e.is_zero(&dom, 50, 1e-9, 3).unwrap());
        let cancel = rho().int_pow(-2) + rho().int_pow(-2).neg();
        assert!(cancel.is_zero(&dom, 50, 1e-9, 3).unwrap());
        let nonzero = rho() - ScalarExpr::one();
        assert!(!nonzero.is_zero(&dom, 50, 1e-9, 3).unwrap());
    }

    #[test]
    fn is_zero_seed_deterministic() {
        let dom = polar_domain();
        let e = rho().sin() * theta().cos() - ScalarExpr::rat(1, 3);
        for seed in [0u64, 1, 42, 31337] {
            let a = e.is_zero(&dom, 20, 1e-9, seed).unwrap();
            let b = e.is_zero(&dom, 20, 1e-9, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sampling_exhaustion_surfaces() {
        let dom = Domain::new().fixed("rho", 0.0);
        let e = rho().recip();
        assert_eq!(
            e.is_zero(&dom, 5, 1e-9, 1).unwrap_err().code(),
            "E_SAMPLING_EXHAUSTED"
        );
    }

    #[test]
    fn simplify_cancels_like_terms() {
        let e = rho().int_pow(2) - rho().int_pow(2);
        assert_eq!(e.simplify(), ScalarExpr::zero());
        let e2 = ScalarExpr::int(2) * (ScalarExpr::rat(1, 2) * rho());
        assert_eq!(e2.simplify(), rho());
    }

    #[test]
    fn simplify_polar_metric_product() {
        // cometric rho-rho entry (1) times d/drho of metric theta-theta (rho^2).
        let e = ScalarExpr::one() * rho().int_pow(2).diff("rho");
        let s = e.simplify();
        assert_same(&s, &(ScalarExpr::int(2) * rho()), &polar_domain());
    }

    #[test]
    fn simplify_merges_powers() {
        let e = rho() * rho().recip() * theta();
        assert_eq!(e.simplify(), theta());
        let f = rho() * rho() * rho();
        assert_eq!(f.simplify(), rho().int_pow(3));
    }

    #[test]
    fn display_and_parse_round_trip() {
        let exprs = vec![
            rho(),
            rho().int_pow(2) + theta().sin() * ScalarExpr::rat(3, 4),
            (ScalarExpr::one() - ScalarExpr::var("r_s") * rho().recip()).neg()
                * ScalarExpr::var("c").int_pow(2),
            rho().log().neg(),
            (rho() * theta().sin()).int_pow(2),
            rho().recip().neg(),
        ];
        let dom = polar_domain().fixed("r_s", 0.3).fixed("c", 1.7);
        for e in exprs {
            let text = e.to_string();
            let back = parse_scalar(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
            assert_same(&back, &e, &dom);
        }
    }

    #[test]
    fn parse_decimals_and_rationals() {
        let e = parse_scalar("0.25*rho + 1/4").unwrap();
        let expected = ScalarExpr::rat(1, 4) * rho() + ScalarExpr::rat(1, 4);
        assert_same(&expected, &e, &polar_domain());
        assert!(parse_scalar("rho +").is_err());
        assert!(parse_scalar("bogus(rho)").is_err());
    }

    #[test]
    fn parse_point_syntax() {
        let env = parse_point("rho=2.0, theta=0.3").unwrap();
        assert_eq!(env["rho"], 2.0);
        assert_eq!(env["theta"], 0.3);
        assert!(parse_point("rho").is_err());
    }
}
