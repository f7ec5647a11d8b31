//! Point-free categorical combinator language and its matrix semantics.
//!
//! [`Term`] is a free term over the symmetric monoidal + compact closed +
//! additive signature: identities, composition, tensor, swap, associators,
//! unitors, unit/counit, named primitives, sums, scaling, and zero morphisms.
//! [`eval_term`] interprets a term in the category of sparse matrices of
//! symbolic scalars ([`MatMorphism`]), where objects are index sets and
//! composition is summation over the middle index.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::objects::{Ix, Obj};
use crate::scalar::{Domain, ScalarExpr};

/// A linear map `dom ⤳ cod` tabulated as a sparse matrix of symbolic
/// entries, keyed by `(domain index, codomain index)`. Missing entries are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MatMorphism {
    dom: Obj,
    cod: Obj,
    entries: BTreeMap<(Ix, Ix), ScalarExpr>,
}

impl MatMorphism {
    /// The zero morphism `a ⤳ b` (no stored entries).
    pub fn zero(dom: Obj, cod: Obj) -> Self {
        MatMorphism {
            dom,
            cod,
            entries: BTreeMap::new(),
        }
    }

    /// Tabulate from a function of `(domain index, codomain index)`.
    pub fn from_fn(dom: Obj, cod: Obj, mut f: impl FnMut(&Ix, &Ix) -> ScalarExpr) -> Self {
        let mut m = Self::zero(dom, cod);
        for i in m.dom.enumerate_indices() {
            for j in m.cod.enumerate_indices() {
                let s = f(&i, &j);
                m.set(i.clone(), j, s);
            }
        }
        m
    }

    pub fn dom(&self) -> &Obj {
        &self.dom
    }

    pub fn cod(&self) -> &Obj {
        &self.cod
    }

    /// Set one entry; zero values erase.
    pub fn set(&mut self, i: Ix, j: Ix, s: ScalarExpr) {
        if s.is_const_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), s);
        }
    }

    /// Entry at `(i, j)`, defaulting to 0.
    pub fn entry(&self, i: &Ix, j: &Ix) -> ScalarExpr {
        self.entries
            .get(&(i.clone(), j.clone()))
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
    }

    /// Nonzero entries in deterministic key order.
    pub fn entries(&self) -> impl Iterator<Item = (&(Ix, Ix), &ScalarExpr)> {
        self.entries.iter()
    }

    pub fn map_entries(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        let mut out = Self::zero(self.dom.clone(), self.cod.clone());
        for ((i, j), s) in &self.entries {
            out.set(i.clone(), j.clone(), f(s));
        }
        out
    }

    /// Debug dump: labeled table, rows = domain indices, cols = codomain.
    pub fn table(&self) -> String {
        let rows = self.dom.enumerate_indices();
        let cols = self.cod.enumerate_indices();
        let mut cells: Vec<Vec<String>> = Vec::with_capacity(rows.len() + 1);
        let mut header = vec![format!("{} ⤳ {}", self.dom, self.cod)];
        header.extend(cols.iter().map(|c| c.to_string()));
        cells.push(header);
        for r in &rows {
            let mut line = vec![r.to_string()];
            line.extend(cols.iter().map(|c| self.entry(r, c).simplify().to_string()));
            cells.push(line);
        }
        let width: Vec<usize> = (0..cells[0].len())
            .map(|k| cells.iter().map(|row| row[k].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            for (k, cell) in row.iter().enumerate() {
                let pad = width[k] - cell.chars().count();
                let _ = write!(out, "{}{}  ", cell, " ".repeat(pad));
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

/// Identity morphism: the Kronecker δ on the object's indices.
pub fn identity(o: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(o.clone(), o.clone());
    for i in o.enumerate_indices() {
        m.set(i.clone(), i, ScalarExpr::one());
    }
    m
}

/// Composition `g ∘ f` by summation over the middle index:
/// entry `(i, j) = Σ_k f(i, k) · g(k, j)`.
pub fn compose(g: &MatMorphism, f: &MatMorphism) -> Result<MatMorphism> {
    if f.cod != g.dom {
        return Err(Error::TypeMismatch(format!(
            "compose: codomain {} does not match domain {}",
            f.cod, g.dom
        )));
    }
    let mut rows: BTreeMap<&Ix, Vec<(&Ix, &ScalarExpr)>> = BTreeMap::new();
    for ((k, j), s) in &g.entries {
        rows.entry(k).or_default().push((j, s));
    }
    let mut acc: BTreeMap<(Ix, Ix), Vec<ScalarExpr>> = BTreeMap::new();
    for ((i, k), s) in &f.entries {
        if let Some(cols) = rows.get(k) {
            for (j, t) in cols {
                acc.entry((i.clone(), (*j).clone()))
                    .or_default()
                    .push(s.clone() * (*t).clone());
            }
        }
    }
    let mut out = MatMorphism::zero(f.dom.clone(), g.cod.clone());
    for ((i, j), terms) in acc {
        out.set(i, j, ScalarExpr::add(terms).simplify());
    }
    Ok(out)
}

/// Tensor (Kronecker) product on pair indices:
/// entry `((i,k), (j,l)) = f(i,j) · g(k,l)`.
pub fn tensor(f: &MatMorphism, g: &MatMorphism) -> MatMorphism {
    let mut out = MatMorphism::zero(
        Obj::prod(f.dom.clone(), g.dom.clone()),
        Obj::prod(f.cod.clone(), g.cod.clone()),
    );
    for ((i, j), s) in &f.entries {
        for ((k, l), t) in &g.entries {
            out.set(
                Ix::pair(i.clone(), k.clone()),
                Ix::pair(j.clone(), l.clone()),
                s.clone() * t.clone(),
            );
        }
    }
    out
}

/// Swap `σ : a⊗b ⤳ b⊗a`.
pub fn sigma(a: &Obj, b: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(
        Obj::prod(a.clone(), b.clone()),
        Obj::prod(b.clone(), a.clone()),
    );
    for x in a.enumerate_indices() {
        for y in b.enumerate_indices() {
            m.set(
                Ix::pair(x.clone(), y.clone()),
                Ix::pair(y, x.clone()),
                ScalarExpr::one(),
            );
        }
    }
    m
}

/// Associator `α : (a⊗b)⊗c ⤳ a⊗(b⊗c)`.
pub fn alpha(a: &Obj, b: &Obj, c: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(
        Obj::prod(Obj::prod(a.clone(), b.clone()), c.clone()),
        Obj::prod(a.clone(), Obj::prod(b.clone(), c.clone())),
    );
    for x in a.enumerate_indices() {
        for y in b.enumerate_indices() {
            for z in c.enumerate_indices() {
                m.set(
                    Ix::pair(Ix::pair(x.clone(), y.clone()), z.clone()),
                    Ix::pair(x.clone(), Ix::pair(y.clone(), z.clone())),
                    ScalarExpr::one(),
                );
            }
        }
    }
    m
}

/// Inverse associator `ᾱ : a⊗(b⊗c) ⤳ (a⊗b)⊗c`.
pub fn alpha_inv(a: &Obj, b: &Obj, c: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(
        Obj::prod(a.clone(), Obj::prod(b.clone(), c.clone())),
        Obj::prod(Obj::prod(a.clone(), b.clone()), c.clone()),
    );
    for x in a.enumerate_indices() {
        for y in b.enumerate_indices() {
            for z in c.enumerate_indices() {
                m.set(
                    Ix::pair(x.clone(), Ix::pair(y.clone(), z.clone())),
                    Ix::pair(Ix::pair(x.clone(), y.clone()), z.clone()),
                    ScalarExpr::one(),
                );
            }
        }
    }
    m
}

/// Unitor `ρ : a ⤳ a⊗1`.
pub fn rho_intro(a: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(a.clone(), Obj::prod(a.clone(), Obj::Unit));
    for x in a.enumerate_indices() {
        m.set(x.clone(), Ix::pair(x, Ix::UnitIx), ScalarExpr::one());
    }
    m
}

/// Unitor `ρ̄ : a⊗1 ⤳ a`.
pub fn rho_elim(a: &Obj) -> MatMorphism {
    let mut m = MatMorphism::zero(Obj::prod(a.clone(), Obj::Unit), a.clone());
    for x in a.enumerate_indices() {
        m.set(Ix::pair(x.clone(), Ix::UnitIx), x, ScalarExpr::one());
    }
    m
}

/// Unit `η : 1 ⤳ a*⊗a`, the correlated δ that creates a dual pair.
pub fn eta(a: &Obj) -> MatMorphism {
    let dual = a.clone().dual();
    let mut m = MatMorphism::zero(Obj::Unit, Obj::prod(dual.clone(), a.clone()));
    let axs = a.enumerate_indices();
    let dxs = dual.enumerate_indices();
    for (dx, ax) in dxs.into_iter().zip(axs) {
        m.set(Ix::UnitIx, Ix::pair(dx, ax), ScalarExpr::one());
    }
    m
}

/// Counit `ϵ : a⊗a* ⤳ 1`, the correlated δ that annihilates a dual pair.
pub fn eps(a: &Obj) -> MatMorphism {
    let dual = a.clone().dual();
    let mut m = MatMorphism::zero(Obj::prod(a.clone(), dual.clone()), Obj::Unit);
    let axs = a.enumerate_indices();
    let dxs = dual.enumerate_indices();
    for (ax, dx) in axs.into_iter().zip(dxs) {
        m.set(Ix::pair(ax, dx), Ix::UnitIx, ScalarExpr::one());
    }
    m
}

/// Entrywise sum of two morphisms of the same type.
pub fn add(f: &MatMorphism, g: &MatMorphism) -> Result<MatMorphism> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(Error::TypeMismatch(format!(
            "add: {} ⤳ {} vs {} ⤳ {}",
            f.dom, f.cod, g.dom, g.cod
        )));
    }
    let mut out = f.clone();
    for ((i, j), s) in &g.entries {
        let cur = out.entry(i, j);
        out.set(i.clone(), j.clone(), (cur + s.clone()).simplify());
    }
    Ok(out)
}

/// Scale every entry by a symbolic field element.
pub fn scale(s: &ScalarExpr, f: &MatMorphism) -> MatMorphism {
    f.map_entries(|e| (s.clone() * e.clone()).simplify())
}

/// The zero morphism `a ⤳ b`.
pub fn zero_m(a: &Obj, b: &Obj) -> MatMorphism {
    MatMorphism::zero(a.clone(), b.clone())
}

/// Antisymmetrizer `id − σ` on `a⊗a`.
pub fn antisym(a: &Obj) -> MatMorphism {
    let aa = Obj::prod(a.clone(), a.clone());
    add(&identity(&aa), &scale(&ScalarExpr::int(-1), &sigma(a, a))).expect("same type")
}

/// Numeric morphism equality: `is_zero` on every entry of `f − g`.
pub fn equal_num(
    f: &MatMorphism,
    g: &MatMorphism,
    dom: &Domain,
    trials: u32,
    tol: f64,
    seed: u64,
) -> Result<bool> {
    let diff = add(f, &scale(&ScalarExpr::int(-1), g))?;
    for (k, ((_i, _j), s)) in diff.entries.iter().enumerate() {
        if !s.is_zero(dom, trials, tol, seed.wrapping_add(k as u64))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Free term of the categorical signature. `Comp(g, f)` denotes `g ∘ f`
/// (apply `f` first). Use the checked constructors for composite nodes;
/// variants are public so consumers (diagram layout, tests) can match on
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Id(Obj),
    Comp(Box<Term>, Box<Term>),
    Ten(Box<Term>, Box<Term>),
    Sigma(Obj, Obj),
    Alpha(Obj, Obj, Obj),
    AlphaInv(Obj, Obj, Obj),
    RhoIntro(Obj),
    RhoElim(Obj),
    Eta(Obj),
    Eps(Obj),
    Prim(String, MatMorphism),
    Sum(Vec<Term>),
    Scale(ScalarExpr, Box<Term>),
    ZeroM(Obj, Obj),
}

impl Term {
    pub fn prim(name: &str, m: MatMorphism) -> Term {
        Term::Prim(name.to_string(), m)
    }

    /// `g ∘ f`; fails unless `cod(f) = dom(g)`.
    pub fn comp(g: Term, f: Term) -> Result<Term> {
        if f.cod() != g.dom() {
            return Err(Error::TypeMismatch(format!(
                "comp: codomain {} does not match domain {}",
                f.cod(),
                g.dom()
            )));
        }
        Ok(Term::Comp(Box::new(g), Box::new(f)))
    }

    /// Compose a pipeline left-to-right: `pipeline([f, g, h]) = h ∘ g ∘ f`.
    pub fn pipeline(stages: Vec<Term>) -> Result<Term> {
        let mut it = stages.into_iter();
        let first = it.next().ok_or_else(|| {
            Error::TypeMismatch("pipeline of zero stages has no type".into())
        })?;
        it.try_fold(first, |acc, next| Term::comp(next, acc))
    }

    pub fn ten(f: Term, g: Term) -> Term {
        Term::Ten(Box::new(f), Box::new(g))
    }

    /// n-ary sum; all branches must share dom and cod.
    pub fn sum(ts: Vec<Term>) -> Result<Term> {
        let Some(first) = ts.first() else {
            return Err(Error::TypeMismatch("empty sum has no type".into()));
        };
        for t in &ts[1..] {
            if t.dom() != first.dom() || t.cod() != first.cod() {
                return Err(Error::TypeMismatch(format!(
                    "sum branches disagree: {} ⤳ {} vs {} ⤳ {}",
                    first.dom(),
                    first.cod(),
                    t.dom(),
                    t.cod()
                )));
            }
        }
        Ok(Term::Sum(ts))
    }

    pub fn scale(s: ScalarExpr, t: Term) -> Term {
        Term::Scale(s, Box::new(t))
    }

    pub fn dom(&self) -> Obj {
        match self {
            Term::Id(o) => o.clone(),
            Term::Comp(_, f) => f.dom(),
            Term::Ten(f, g) => Obj::prod(f.dom(), g.dom()),
            Term::Sigma(a, b) => Obj::prod(a.clone(), b.clone()),
            Term::Alpha(a, b, c) => {
                Obj::prod(Obj::prod(a.clone(), b.clone()), c.clone())
            }
            Term::AlphaInv(a, b, c) => {
                Obj::prod(a.clone(), Obj::prod(b.clone(), c.clone()))
            }
            Term::RhoIntro(a) => a.clone(),
            Term::RhoElim(a) => Obj::prod(a.clone(), Obj::Unit),
            Term::Eta(_) => Obj::Unit,
            Term::Eps(a) => Obj::prod(a.clone(), a.clone().dual()),
            Term::Prim(_, m) => m.dom().clone(),
            Term::Sum(ts) => ts[0].dom(),
            Term::Scale(_, t) => t.dom(),
            Term::ZeroM(a, _) => a.clone(),
        }
    }

    pub fn cod(&self) -> Obj {
        match self {
            Term::Id(o) => o.clone(),
            Term::Comp(g, _) => g.cod(),
            Term::Ten(f, g) => Obj::prod(f.cod(), g.cod()),
            Term::Sigma(a, b) => Obj::prod(b.clone(), a.clone()),
            Term::Alpha(a, b, c) => {
                Obj::prod(a.clone(), Obj::prod(b.clone(), c.clone()))
            }
            Term::AlphaInv(a, b, c) => {
                Obj::prod(Obj::prod(a.clone(), b.clone()), c.clone())
            }
            Term::RhoIntro(a) => Obj::prod(a.clone(), Obj::Unit),
            Term::RhoElim(a) => a.clone(),
            Term::Eta(a) => Obj::prod(a.clone().dual(), a.clone()),
            Term::Eps(_) => Obj::Unit,
            Term::Prim(_, m) => m.cod().clone(),
            Term::Sum(ts) => ts[0].cod(),
            Term::Scale(_, t) => t.cod(),
            Term::ZeroM(_, b) => b.clone(),
        }
    }

    /// Check internal typing of every node (useful when terms are built by
    /// matching rather than through the checked constructors).
    pub fn typecheck(&self) -> Result<()> {
        match self {
            Term::Comp(g, f) => {
                f.typecheck()?;
                g.typecheck()?;
                if f.cod() != g.dom() {
                    return Err(Error::TypeMismatch(format!(
                        "comp: codomain {} does not match domain {}",
                        f.cod(),
                        g.dom()
                    )));
                }
                Ok(())
            }
            Term::Ten(f, g) => {
                f.typecheck()?;
                g.typecheck()
            }
            Term::Sum(ts) => {
                if ts.is_empty() {
                    return Err(Error::TypeMismatch("empty sum has no type".into()));
                }
                for t in ts {
                    t.typecheck()?;
                    if t.dom() != ts[0].dom() || t.cod() != ts[0].cod() {
                        return Err(Error::TypeMismatch("sum branches disagree".into()));
                    }
                }
                Ok(())
            }
            Term::Scale(_, t) => t.typecheck(),
            _ => Ok(()),
        }
    }

    /// Number of constructor nodes (used by diagram fidelity tests).
    pub fn node_count(&self) -> usize {
        match self {
            Term::Comp(g, f) | Term::Ten(f, g) => 1 + f.node_count() + g.node_count(),
            Term::Sum(ts) => 1 + ts.iter().map(Term::node_count).sum::<usize>(),
            Term::Scale(_, t) => 1 + t.node_count(),
            _ => 1,
        }
    }
}

/// Interpret a term in the matrix category.
pub fn eval_term(t: &Term) -> Result<MatMorphism> {
    match t {
        Term::Id(o) => Ok(identity(o)),
        Term::Comp(g, f) => compose(&eval_term(g)?, &eval_term(f)?),
        Term::Ten(f, g) => Ok(tensor(&eval_term(f)?, &eval_term(g)?)),
        Term::Sigma(a, b) => Ok(sigma(a, b)),
        Term::Alpha(a, b, c) => Ok(alpha(a, b, c)),
        Term::AlphaInv(a, b, c) => Ok(alpha_inv(a, b, c)),
        Term::RhoIntro(a) => Ok(rho_intro(a)),
        Term::RhoElim(a) => Ok(rho_elim(a)),
        Term::Eta(a) => Ok(eta(a)),
        Term::Eps(a) => Ok(eps(a)),
        Term::Prim(_, m) => Ok(m.clone()),
        Term::Sum(ts) => {
            let mut acc: Option<MatMorphism> = None;
            for t in ts {
                let m = eval_term(t)?;
                acc = Some(match acc {
                    None => m,
                    Some(prev) => add(&prev, &m)?,
                });
            }
            acc.ok_or_else(|| Error::TypeMismatch("empty sum has no type".into()))
        }
        Term::Scale(s, t) => Ok(scale(s, &eval_term(t)?)),
        Term::ZeroM(a, b) => Ok(zero_m(a, b)),
    }
}

/// Index-raising composite `T ⤳ T*` determined by the metric `g : T⊗T ⤳ 1`:
/// `ρ̄ ∘ (id⊗g) ∘ α ∘ (σ⊗id) ∘ ᾱ ∘ (id⊗η) ∘ ρ`.
pub fn juggle_up(t: &Obj, g: &MatMorphism) -> Result<MatMorphism> {
    let td = t.clone().dual();
    let term = Term::pipeline(vec![
        Term::RhoIntro(t.clone()),
        Term::ten(Term::Id(t.clone()), Term::Eta(t.clone())),
        Term::AlphaInv(t.clone(), td.clone(), t.clone()),
        Term::ten(Term::Sigma(t.clone(), td.clone()), Term::Id(t.clone())),
        Term::Alpha(td.clone(), t.clone(), t.clone()),
        Term::ten(Term::Id(td.clone()), Term::prim("g", g.clone())),
        Term::RhoElim(td),
    ])?;
    eval_term(&term)
}

/// Index-lowering composite `T* ⤳ T` determined by the cometric
/// `g′ : 1 ⤳ T⊗T`: `ρ̄ ∘ σ ∘ ((ϵ∘σ)⊗id) ∘ ᾱ ∘ (id⊗g′) ∘ ρ`.
pub fn juggle_down(t: &Obj, cometric: &MatMorphism) -> Result<MatMorphism> {
    let td = t.clone().dual();
    let eps_sigma = Term::comp(Term::Eps(t.clone()), Term::Sigma(td.clone(), t.clone()))?;
    let term = Term::pipeline(vec![
        Term::RhoIntro(td.clone()),
        Term::ten(Term::Id(td.clone()), Term::prim("g'", cometric.clone())),
        Term::AlphaInv(td.clone(), t.clone(), t.clone()),
        Term::ten(eps_sigma, Term::Id(t.clone())),
        Term::Sigma(Obj::Unit, t.clone()),
        Term::RhoElim(t.clone()),
    ])?;
    eval_term(&term)
}

/// Outcome of one equation family in [`law_suite`]: how many instances were
/// checked and how many of them failed numerically.
#[derive(Debug, Clone)]
pub struct LawReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
}

struct Tally {
    order: Vec<&'static str>,
    counts: BTreeMap<&'static str, (usize, usize)>,
}

impl Tally {
    fn new() -> Self {
        Tally { order: Vec::new(), counts: BTreeMap::new() }
    }

    fn check(
        &mut self,
        name: &'static str,
        lhs: &MatMorphism,
        rhs: &MatMorphism,
        dom: &Domain,
        tol: f64,
        seed: u64,
    ) -> Result<()> {
        let ok = equal_num(lhs, rhs, dom, 4, tol, seed)?;
        if !self.counts.contains_key(name) {
            self.order.push(name);
        }
        let slot = self.counts.entry(name).or_insert((0, 0));
        slot.0 += 1;
        if !ok {
            slot.1 += 1;
        }
        Ok(())
    }

    fn reports(self) -> Vec<LawReport> {
        self.order
            .into_iter()
            .map(|name| {
                let (checked, failures) = self.counts[name];
                LawReport { name, checked, failures }
            })
            .collect()
    }
}

fn law_space(dim: usize) -> Obj {
    let names: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    let space = crate::objects::SpaceId::new(
        &format!("v{dim}"),
        names.iter().map(String::as_str).collect(),
    );
    Obj::atom(&space)
}

/// Right snake `ρ̄ ∘ σ ∘ (ϵ⊗id) ∘ ᾱ ∘ (id⊗η) ∘ ρ : a ⤳ a`.
fn snake_primal(t: &Obj) -> Result<Term> {
    let td = t.clone().dual();
    Term::pipeline(vec![
        Term::RhoIntro(t.clone()),
        Term::ten(Term::Id(t.clone()), Term::Eta(t.clone())),
        Term::AlphaInv(t.clone(), td.clone(), t.clone()),
        Term::ten(Term::Eps(t.clone()), Term::Id(t.clone())),
        Term::Sigma(Obj::Unit, t.clone()),
        Term::RhoElim(t.clone()),
    ])
}

/// Left snake `ρ̄ ∘ (id⊗ϵ) ∘ α ∘ (η⊗id) ∘ σ ∘ ρ : a* ⤳ a*`.
fn snake_dual(t: &Obj) -> Result<Term> {
    let td = t.clone().dual();
    Term::pipeline(vec![
        Term::RhoIntro(td.clone()),
        Term::Sigma(td.clone(), Obj::Unit),
        Term::ten(Term::Eta(t.clone()), Term::Id(td.clone())),
        Term::Alpha(td.clone(), t.clone(), td.clone()),
        Term::ten(Term::Id(td.clone()), Term::Eps(t.clone())),
        Term::RhoElim(td),
    ])
}

/// Closed loop `ϵ ∘ σ ∘ η : 1 ⤳ 1`, whose single entry is the dimension.
fn dual_loop(t: &Obj) -> Result<Term> {
    Term::pipeline(vec![
        Term::Eta(t.clone()),
        Term::Sigma(t.clone().dual(), t.clone()),
        Term::Eps(t.clone()),
    ])
}

fn random_int_matrix(rng: &mut rand_chacha::ChaCha8Rng, dom: &Obj, cod: &Obj) -> MatMorphism {
    use rand::Rng;
    MatMorphism::from_fn(dom.clone(), cod.clone(), |_, _| {
        ScalarExpr::int(rng.random_range(-3..=3))
    })
}

/// Numeric verification of the structural equations of the matrix category
/// over spaces of the given dimensions: both snake identities of the dual
/// pairing, involution of the swap, associator and unitor inverses, the
/// eight bilinearity equations tying composition and tensor to sums and
/// zeros (on fresh random integer matrices each round), and the closed dual
/// loop evaluating to the space dimension. Returns one report per equation
/// family together with the number of random morphisms drawn.
pub fn law_suite(
    dims: &[usize],
    rounds: usize,
    tol: f64,
    seed: u64,
) -> Result<(Vec<LawReport>, usize)> {
    use rand::{Rng, SeedableRng};

    let dom = Domain::new();
    let mut tally = Tally::new();
    let mut drawn = 0usize;
    let mut salt = 0u64;

    for &dim in dims {
        let t = law_space(dim);
        let td = t.clone().dual();
        let tt = Obj::prod(t.clone(), td.clone());
        let pool = [t.clone(), td.clone(), tt.clone()];

        salt += 1;
        tally.check(
            "snake-right",
            &eval_term(&snake_primal(&t)?)?,
            &identity(&t),
            &dom,
            tol,
            seed.wrapping_add(salt),
        )?;
        salt += 1;
        tally.check(
            "snake-left",
            &eval_term(&snake_dual(&t)?)?,
            &identity(&td),
            &dom,
            tol,
            seed.wrapping_add(salt),
        )?;

        for (a, b) in [(&t, &t), (&t, &td), (&td, &t), (&tt, &td)] {
            salt += 1;
            tally.check(
                "swap-involution",
                &compose(&sigma(b, a), &sigma(a, b))?,
                &identity(&Obj::prod(a.clone(), b.clone())),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
        }

        for (a, b, c) in [(&t, &t, &t), (&t, &td, &t), (&td, &t, &td), (&tt, &t, &td)] {
            let left = Obj::prod(Obj::prod(a.clone(), b.clone()), c.clone());
            let right = Obj::prod(a.clone(), Obj::prod(b.clone(), c.clone()));
            salt += 1;
            tally.check(
                "associator-inverse",
                &compose(&alpha_inv(a, b, c), &alpha(a, b, c))?,
                &identity(&left),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "associator-inverse",
                &compose(&alpha(a, b, c), &alpha_inv(a, b, c))?,
                &identity(&right),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
        }

        for a in &pool {
            salt += 1;
            tally.check(
                "unitor-inverse",
                &compose(&rho_elim(a), &rho_intro(a))?,
                &identity(a),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "unitor-inverse",
                &compose(&rho_intro(a), &rho_elim(a))?,
                &identity(&Obj::prod(a.clone(), Obj::Unit)),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
        }

        salt += 1;
        let expect = MatMorphism::from_fn(Obj::Unit, Obj::Unit, |_, _| {
            ScalarExpr::int(dim as i64)
        });
        tally.check(
            "loop-dimension",
            &eval_term(&dual_loop(&t)?)?,
            &expect,
            &dom,
            tol,
            seed.wrapping_add(salt),
        )?;

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(dim as u64));
        for _ in 0..rounds {
            let a = pool[rng.random_range(0..pool.len())].clone();
            let b = pool[rng.random_range(0..pool.len())].clone();
            let c = pool[rng.random_range(0..pool.len())].clone();
            let f = random_int_matrix(&mut rng, &a, &b);
            let g = random_int_matrix(&mut rng, &a, &b);
            let h = random_int_matrix(&mut rng, &c, &a);
            let k = random_int_matrix(&mut rng, &b, &c);
            drawn += 4;
            let fg = add(&f, &g)?;

            salt += 1;
            tally.check(
                "compose-sum-left",
                &compose(&fg, &h)?,
                &add(&compose(&f, &h)?, &compose(&g, &h)?)?,
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "compose-sum-right",
                &compose(&k, &fg)?,
                &add(&compose(&k, &f)?, &compose(&k, &g)?)?,
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "compose-zero-left",
                &compose(&zero_m(&b, &c), &f)?,
                &zero_m(&a, &c),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "compose-zero-right",
                &compose(&f, &zero_m(&c, &a))?,
                &zero_m(&c, &b),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "tensor-sum-left",
                &tensor(&fg, &k),
                &add(&tensor(&f, &k), &tensor(&g, &k))?,
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "tensor-sum-right",
                &tensor(&k, &fg),
                &add(&tensor(&k, &f), &tensor(&k, &g))?,
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "tensor-zero-left",
                &tensor(&zero_m(&b, &c), &f),
                &zero_m(&Obj::prod(b.clone(), a.clone()), &Obj::prod(c.clone(), b.clone())),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
            salt += 1;
            tally.check(
                "tensor-zero-right",
                &tensor(&f, &zero_m(&b, &c)),
                &zero_m(&Obj::prod(a.clone(), b.clone()), &Obj::prod(b.clone(), c.clone())),
                &dom,
                tol,
                seed.wrapping_add(salt),
            )?;
        }
    }

    Ok((tally.reports(), drawn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::SpaceId;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn polar_space() -> SpaceId {
        SpaceId::new("polar", vec!["rho", "theta"])
    }

    fn t2() -> Obj {
        Obj::atom(&polar_space())
    }

    fn t3() -> Obj {
        Obj::atom(&SpaceId::new("three", vec!["x", "y", "z"]))
    }

    fn t4() -> Obj {
        Obj::atom(&SpaceId::new("four", vec!["t", "rho", "theta", "phi"]))
    }

    fn dom() -> Domain {
        Domain::new()
            .interval("rho", 0.5, 3.0)
            .interval("theta", 0.3, 2.8)
    }

    /// Random morphism with small symbolic entries `c0 + c1·rho + c2·sin θ`.
    fn random_prim(a: &Obj, b: &Obj, rng: &mut ChaCha8Rng) -> MatMorphism {
        MatMorphism::from_fn(a.clone(), b.clone(), |_, _| {
            let c0 = ScalarExpr::rat(rng.random_range(-3..=3), 1);
            let c1 = ScalarExpr::rat(rng.random_range(-2..=2), 1);
            let c2 = ScalarExpr::rat(rng.random_range(-2..=2), 1);
            c0 + c1 * ScalarExpr::var("rho") + c2 * ScalarExpr::var("theta").sin()
        })
    }

    fn num_mat(a: &Obj, b: &Obj, rows: &[&[i64]]) -> MatMorphism {
        let is = a.enumerate_indices();
        let js = b.enumerate_indices();
        let mut m = MatMorphism::zero(a.clone(), b.clone());
        for (r, i) in is.iter().enumerate() {
            for (c, j) in js.iter().enumerate() {
                m.set(i.clone(), j.clone(), ScalarExpr::int(rows[r][c]));
            }
        }
        m
    }

    fn assert_eq_num(f: &MatMorphism, g: &MatMorphism) {
        assert!(
            equal_num(f, g, &dom(), 30, 1e-9, 11).unwrap(),
            "morphisms differ:\n{}\nvs\n{}",
            f.table(),
            g.table()
        );
    }

    #[test]
    fn identity_and_units() {
        let t = t2();
        let id = identity(&t);
        assert_eq!(id.entry(&Ix::AtomIx("rho".into()), &Ix::AtomIx("rho".into())), ScalarExpr::one());
        assert_eq!(id.entry(&Ix::AtomIx("rho".into()), &Ix::AtomIx("theta".into())), ScalarExpr::zero());
        let one = identity(&Obj::Unit);
        assert_eq!(one.entry(&Ix::UnitIx, &Ix::UnitIx), ScalarExpr::one());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_prim(&t, &t, &mut rng);
        assert_eq!(compose(&identity(&t), &f).unwrap(), f);
        assert_eq!(compose(&f, &identity(&t)).unwrap(), f);
    }

    #[test]
    fn compose_matches_brute_force() {
        let t = t2();
        let f = num_mat(&t, &t, &[&[1, 2], &[3, 4]]);
        let g = num_mat(&t, &t, &[&[0, 1], &[1, 0]]);
        let fg = compose(&g, &f).unwrap();
        assert_eq!(fg, num_mat(&t, &t, &[&[2, 1], &[4, 3]]));
    }

    #[test]
    fn compose_type_mismatch() {
        let f = identity(&t2());
        let g = identity(&t3());
        assert_eq!(compose(&g, &f).unwrap_err().code(), "E_TYPE_MISMATCH");
    }

    #[test]
    fn compose_with_zero_is_zero() {
        let t = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_prim(&t, &t, &mut rng);
        let z = zero_m(&t, &t);
        assert_eq!(compose(&z, &f).unwrap(), z);
        assert_eq!(compose(&f, &z).unwrap(), z);
    }

    #[test]
    fn compose_associativity() {
        let t = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f = random_prim(&t, &t, &mut rng);
            let g = random_prim(&t, &t, &mut rng);
            let h = random_prim(&t, &t, &mut rng);
            let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
            let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
            assert_eq_num(&left, &right);
        }
    }

    #[test]
    fn tensor_kronecker() {
        let t = t2();
        let id2 = identity(&t);
        let tt = Obj::prod(t.clone(), t.clone());
        assert_eq!(tensor(&id2, &id2), identity(&tt));
        let three = t3();
        assert_eq!(tensor(&identity(&t), &identity(&three)).dom().dim(), 6);
        // Jacobian functoriality: J(V⊗W) = J(V)⊗J(W) commutes with compose.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let j1 = random_prim(&t, &t, &mut rng);
            let j2 = random_prim(&t, &t, &mut rng);
            let k1 = random_prim(&t, &t, &mut rng);
            let k2 = random_prim(&t, &t, &mut rng);
            let lhs = tensor(&compose(&j1, &k1).unwrap(), &compose(&j2, &k2).unwrap());
            let rhs = compose(&tensor(&j1, &j2), &tensor(&k1, &k2)).unwrap();
            assert_eq_num(&lhs, &rhs);
        }
    }

    #[test]
    fn structural_isomorphisms() {
        let a = t2();
        let b = t3();
        let ss = compose(&sigma(&b, &a), &sigma(&a, &b)).unwrap();
        assert_eq!(ss, identity(&Obj::prod(a.clone(), b.clone())));
        let ii = compose(&rho_elim(&a), &rho_intro(&a)).unwrap();
        assert_eq!(ii, identity(&a));
        let aa = compose(&alpha_inv(&a, &b, &a), &alpha(&a, &b, &a)).unwrap();
        assert_eq!(aa, identity(&Obj::prod(Obj::prod(a.clone(), b), a.clone())));
    }

    #[test]
    fn sigma_naturality() {
        let a = t2();
        let b = t3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_prim(&a, &a, &mut rng);
        let g = random_prim(&b, &b, &mut rng);
        let lhs = compose(&sigma(&a, &b), &tensor(&f, &g)).unwrap();
        let rhs = compose(&tensor(&g, &f), &sigma(&a, &b)).unwrap();
        assert_eq_num(&lhs, &rhs);
    }

    #[test]
    fn snake_laws() {
        for a in [t2(), t3(), t4()] {
            let ad = a.clone().dual();
            // (ϵ⊗id) ∘ ᾱ ∘ (id⊗η) = σ_{a,1}
            let lhs = compose(
                &compose(
                    &tensor(&eps(&a), &identity(&a)),
                    &alpha_inv(&a, &ad, &a),
                )
                .unwrap(),
                &tensor(&identity(&a), &eta(&a)),
            )
            .unwrap();
            assert_eq!(lhs, sigma(&a, &Obj::Unit));
            // symmetric counterpart: (id⊗ϵ) ∘ α ∘ (η⊗id) = σ_{1,a*}
            let rhs = compose(
                &compose(&tensor(&identity(&ad), &eps(&a)), &alpha(&ad, &a, &ad)).unwrap(),
                &tensor(&eta(&a), &identity(&ad)),
            )
            .unwrap();
            assert_eq!(rhs, sigma(&Obj::Unit, &ad));
        }
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        for (a, n) in [(t2(), 2), (t3(), 3), (t4(), 4)] {
            let ad = a.clone().dual();
            let tr = compose(
                &compose(&eps(&a), &sigma(&ad, &a)).unwrap(),
                &eta(&a),
            )
            .unwrap();
            assert_eq!(tr.entry(&Ix::UnitIx, &Ix::UnitIx), ScalarExpr::int(n));
        }
    }

    #[test]
    fn additive_bilinearity_eight_equations() {
        let t = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let al = ScalarExpr::rat(3, 2);
        for _ in 0..5 {
            let f = random_prim(&t, &t, &mut rng);
            let u = random_prim(&t, &t, &mut rng);
            let v = random_prim(&t, &t, &mut rng);
            // composition against sums, both sides
            assert_eq_num(
                &compose(&f, &add(&u, &v).unwrap()).unwrap(),
                &add(&compose(&f, &u).unwrap(), &compose(&f, &v).unwrap()).unwrap(),
            );
            assert_eq_num(
                &compose(&add(&u, &v).unwrap(), &f).unwrap(),
                &add(&compose(&u, &f).unwrap(), &compose(&v, &f).unwrap()).unwrap(),
            );
            // composition against scaling, both sides
            assert_eq_num(
                &compose(&scale(&al, &f), &u).unwrap(),
                &scale(&al, &compose(&f, &u).unwrap()),
            );
            assert_eq_num(
                &compose(&f, &scale(&al, &u)).unwrap(),
                &scale(&al, &compose(&f, &u).unwrap()),
            );
            // tensor against sums, both sides
            assert_eq_num(
                &tensor(&f, &add(&u, &v).unwrap()),
                &add(&tensor(&f, &u), &tensor(&f, &v)).unwrap(),
            );
            assert_eq_num(
                &tensor(&add(&u, &v).unwrap(), &f),
                &add(&tensor(&u, &f), &tensor(&v, &f)).unwrap(),
            );
            // tensor against scaling, both sides
            assert_eq_num(&tensor(&scale(&al, &f), &u), &scale(&al, &tensor(&f, &u)));
            assert_eq_num(&tensor(&f, &scale(&al, &u)), &scale(&al, &tensor(&f, &u)));
        }
    }

    #[test]
    fn add_requires_same_type() {
        let bad = add(&identity(&t2()), &identity(&t3()));
        assert_eq!(bad.unwrap_err().code(), "E_TYPE_MISMATCH");
        let f = identity(&t2());
        assert_eq!(add(&f, &zero_m(&t2(), &t2())).unwrap(), f);
        let half = scale(&ScalarExpr::rat(1, 2), &f);
        assert_eq!(
            half.entry(&Ix::AtomIx("rho".into()), &Ix::AtomIx("rho".into())),
            ScalarExpr::rat(1, 2)
        );
    }

    #[test]
    fn antisym_properties() {
        let t = t2();
        let anti = antisym(&t);
        // (id − σ)² = 2(id − σ)
        let sq = compose(&anti, &anti).unwrap();
        assert_eq_num(&sq, &scale(&ScalarExpr::int(2), &anti));
        // symmetric state annihilated: polar metric reshaped to 1 ⤳ T⊗T
        let tt = Obj::prod(t.clone(), t.clone());
        let mut g_state = MatMorphism::zero(Obj::Unit, tt);
        let rho = || Ix::AtomIx("rho".to_string());
        let th = || Ix::AtomIx("theta".to_string());
        g_state.set(Ix::UnitIx, Ix::pair(rho(), rho()), ScalarExpr::one());
        g_state.set(
            Ix::UnitIx,
            Ix::pair(th(), th()),
            ScalarExpr::var("rho").int_pow(2),
        );
        let hit = compose(&anti, &g_state).unwrap();
        assert_eq!(hit.entries().count(), 0);
        // one-dimensional atom: id = σ
        let one = Obj::atom(&SpaceId::new("line", vec!["x"]));
        assert_eq!(antisym(&one).entries().count(), 0);
    }

    #[test]
    fn eval_term_structural() {
        let t = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_prim(&t, &t, &mut rng);
        let term = Term::comp(Term::Id(t.clone()), Term::prim("f", f.clone())).unwrap();
        assert_eq!(eval_term(&term).unwrap(), f);
        let z = Term::ZeroM(t.clone(), t.clone());
        let s = Term::sum(vec![Term::prim("f", f.clone()), z]).unwrap();
        assert_eq!(eval_term(&s).unwrap(), f);
    }

    #[test]
    fn four_wire_permutation_example() {
        // (id⊗σ) ∘ ᾱ ∘ (id⊗(α∘(σ⊗id)∘ᾱ)) ∘ α ∘ α  on ((T⊗T)⊗T)⊗T
        // permutes inputs (i,j,k,l) to outputs (i,k,l,j).
        let t = t2();
        let tt = Obj::prod(t.clone(), t.clone());
        let inner = Term::pipeline(vec![
            Term::AlphaInv(t.clone(), t.clone(), t.clone()),
            Term::ten(Term::Sigma(t.clone(), t.clone()), Term::Id(t.clone())),
            Term::Alpha(t.clone(), t.clone(), t.clone()),
        ])
        .unwrap();
        let ex = Term::pipeline(vec![
            Term::Alpha(tt.clone(), t.clone(), t.clone()),
            Term::Alpha(t.clone(), t.clone(), tt.clone()),
            Term::ten(Term::Id(t.clone()), inner),
            Term::AlphaInv(t.clone(), t.clone(), tt.clone()),
            Term::ten(Term::Id(tt.clone()), Term::Sigma(t.clone(), t.clone())),
        ])
        .unwrap();
        let m = eval_term(&ex).unwrap();
        let idx = t.enumerate_indices();
        for i in &idx {
            for j in &idx {
                for k in &idx {
                    for l in &idx {
                        let from = Ix::pair(
                            Ix::pair(Ix::pair(i.clone(), j.clone()), k.clone()),
                            l.clone(),
                        );
                        let to = Ix::pair(
                            Ix::pair(i.clone(), k.clone()),
                            Ix::pair(l.clone(), j.clone()),
                        );
                        assert_eq!(m.entry(&from, &to), ScalarExpr::one());
                    }
                }
            }
        }
        assert_eq!(m.entries().count(), 16);
    }

    fn polar_metric() -> MatMorphism {
        let t = t2();
        let tt = Obj::prod(t.clone(), t.clone());
        let mut g = MatMorphism::zero(tt, Obj::Unit);
        let rho = || Ix::AtomIx("rho".to_string());
        let th = || Ix::AtomIx("theta".to_string());
        g.set(Ix::pair(rho(), rho()), Ix::UnitIx, ScalarExpr::one());
        g.set(
            Ix::pair(th(), th()),
            Ix::UnitIx,
            ScalarExpr::var("rho").int_pow(2),
        );
        g
    }

    fn polar_cometric() -> MatMorphism {
        let t = t2();
        let tt = Obj::prod(t.clone(), t.clone());
        let mut g = MatMorphism::zero(Obj::Unit, tt);
        let rho = || Ix::AtomIx("rho".to_string());
        let th = || Ix::AtomIx("theta".to_string());
        g.set(Ix::UnitIx, Ix::pair(rho(), rho()), ScalarExpr::one());
        g.set(
            Ix::UnitIx,
            Ix::pair(th(), th()),
            ScalarExpr::var("rho").int_pow(-2),
        );
        g
    }

    #[test]
    fn juggle_polar() {
        let t = t2();
        let up = juggle_up(&t, &polar_metric()).unwrap();
        let rho = || Ix::AtomIx("rho".to_string());
        let th = || Ix::AtomIx("theta".to_string());
        assert_eq!(up.entry(&rho(), &rho().dual()), ScalarExpr::one());
        assert_eq!(
            up.entry(&th(), &th().dual()),
            ScalarExpr::var("rho").int_pow(2)
        );
        let down = juggle_down(&t, &polar_cometric()).unwrap();
        let round = compose(&down, &up).unwrap();
        assert_eq_num(&round, &identity(&t));
    }

    #[test]
    fn juggle_euclidean_is_dual_wrapper() {
        let t = t2();
        let tt = Obj::prod(t.clone(), t.clone());
        let mut g = MatMorphism::zero(tt, Obj::Unit);
        for i in t.enumerate_indices() {
            g.set(Ix::pair(i.clone(), i), Ix::UnitIx, ScalarExpr::one());
        }
        let up = juggle_up(&t, &g).unwrap();
        for i in t.enumerate_indices() {
            assert_eq!(up.entry(&i, &i.clone().dual()), ScalarExpr::one());
        }
        assert_eq!(up.entries().count(), 2);
    }

    #[test]
    fn equal_num_basics() {
        let t = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_prim(&t, &t, &mut rng);
        assert!(equal_num(&f, &f, &dom(), 20, 1e-9, 0).unwrap());
        let id = identity(&t);
        let sg = sigma(&t, &t);
        assert!(!equal_num(&identity(&Obj::prod(t.clone(), t.clone())), &sg, &dom(), 20, 1e-9, 0).unwrap());
        assert_eq!(
            equal_num(&f, &id, &dom(), 20, 1e-9, 0).is_ok(),
            true
        );
        let wrong = equal_num(&f, &identity(&t3()), &dom(), 20, 1e-9, 0);
        assert_eq!(wrong.unwrap_err().code(), "E_TYPE_MISMATCH");
    }

    #[test]
    fn table_dump_readable() {
        let t = t2();
        let table = identity(&t).table();
        assert!(table.contains("rho"));
        assert!(table.contains("theta"));
        assert!(table.lines().count() == 3);
    }

    #[test]
    fn law_suite_passes_on_small_dimensions() {
        let (reports, drawn) = law_suite(&[2, 3], 4, 1e-9, 7).unwrap();
        assert_eq!(drawn, 32);
        let names: Vec<&str> = reports.iter().map(|r| r.name).collect();
        for expected in [
            "snake-right",
            "snake-left",
            "swap-involution",
            "associator-inverse",
            "unitor-inverse",
            "loop-dimension",
            "compose-sum-left",
            "compose-sum-right",
            "compose-zero-left",
            "compose-zero-right",
            "tensor-sum-left",
            "tensor-sum-right",
            "tensor-zero-left",
            "tensor-zero-right",
        ] {
            assert!(names.contains(&expected), "missing law {expected}");
        }
        for r in &reports {
            assert_eq!(r.failures, 0, "law {} failed {} times", r.name, r.failures);
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn law_suite_is_deterministic_in_the_seed() {
        let (a, n1) = law_suite(&[2], 3, 1e-9, 42).unwrap();
        let (b, n2) = law_suite(&[2], 3, 1e-9, 42).unwrap();
        assert_eq!(n1, n2);
        let fmt = |rs: &[LawReport]| {
            rs.iter()
                .map(|r| format!("{}:{}:{}", r.name, r.checked, r.failures))
                .collect::<Vec<_>>()
                .join(",")
        };
        assert_eq!(fmt(&a), fmt(&b));
    }
}
