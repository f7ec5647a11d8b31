//! Structural-isomorphism synthesis for tensor-network extraction.
//!
//! Builds terms out of associators, swaps and identities that reshape one
//! product tree into another with the same leaf sequence, and realizes leaf
//! permutations as adjacent-transposition networks on left combs. Trees are
//! described by an explicit [`Shape`] so that a single leaf may itself carry
//! a composite object without being torn apart.

use crate::objects::Obj;
use crate::roger::Term;

/// A product tree with an explicit leaf segmentation. A `Leaf` is treated as
/// atomic even when its object is a product.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    Leaf(Obj),
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub(crate) fn node(a: Shape, b: Shape) -> Shape {
        Shape::Node(Box::new(a), Box::new(b))
    }

    /// Left-nested tree over a nonempty leaf list.
    pub(crate) fn comb(ls: &[Obj]) -> Shape {
        let mut it = ls.iter();
        let first = Shape::Leaf(it.next().expect("comb needs a leaf").clone());
        it.fold(first, |acc, o| Shape::node(acc, Shape::Leaf(o.clone())))
    }

    pub(crate) fn obj(&self) -> Obj {
        match self {
            Shape::Leaf(o) => o.clone(),
            Shape::Node(a, b) => Obj::prod(a.obj(), b.obj()),
        }
    }

    pub(crate) fn leaves(&self) -> Vec<Obj> {
        match self {
            Shape::Leaf(o) => vec![o.clone()],
            Shape::Node(a, b) => {
                let mut out = a.leaves();
                out.extend(b.leaves());
                out
            }
        }
    }
}

/// Left-nested product of a leaf list; empty list is the unit.
pub(crate) fn left_comb(ls: &[Obj]) -> Obj {
    let mut it = ls.iter();
    let Some(first) = it.next() else {
        return Obj::Unit;
    };
    it.fold(first.clone(), |acc, o| Obj::prod(acc, o.clone()))
}

/// Structural iso `shape.obj() ⤳ left_comb(shape.leaves())` from associators.
pub(crate) fn to_left_comb(s: &Shape) -> Term {
    match s {
        Shape::Leaf(o) => Term::Id(o.clone()),
        Shape::Node(a, b) => Term::pipeline(vec![
            Term::ten(to_left_comb(a), to_left_comb(b)),
            merge_combs(&a.leaves(), &b.leaves()),
        ])
        .expect("structural composition"),
    }
}

/// `left_comb(l) ⊗ left_comb(r) ⤳ left_comb(l ++ r)` for nonempty `r`.
fn merge_combs(l: &[Obj], r: &[Obj]) -> Term {
    let lc_l = left_comb(l);
    match r {
        [single] => Term::Id(Obj::prod(lc_l, single.clone())),
        [init @ .., last] => Term::pipeline(vec![
            Term::AlphaInv(lc_l, left_comb(init), last.clone()),
            Term::ten(merge_combs(l, init), Term::Id(last.clone())),
        ])
        .expect("structural composition"),
        [] => unreachable!("merge with empty right comb"),
    }
}

/// Inverse of a term built solely from structural isomorphisms.
pub(crate) fn invert_structural(t: &Term) -> Term {
    match t {
        Term::Id(o) => Term::Id(o.clone()),
        Term::Comp(g, f) => Term::Comp(
            Box::new(invert_structural(f)),
            Box::new(invert_structural(g)),
        ),
        Term::Ten(f, g) => Term::ten(invert_structural(f), invert_structural(g)),
        Term::Sigma(a, b) => Term::Sigma(b.clone(), a.clone()),
        Term::Alpha(a, b, c) => Term::AlphaInv(a.clone(), b.clone(), c.clone()),
        Term::AlphaInv(a, b, c) => Term::Alpha(a.clone(), b.clone(), c.clone()),
        Term::RhoIntro(a) => Term::RhoElim(a.clone()),
        Term::RhoElim(a) => Term::RhoIntro(a.clone()),
        _ => unreachable!("not a structural term"),
    }
}

/// Swap leaves `i` and `i+1` of the left comb over `ls`.
fn adjacent_swap(ls: &[Obj], i: usize) -> Term {
    let n = ls.len();
    assert!(i + 1 < n);
    if i + 2 < n {
        return Term::ten(adjacent_swap(&ls[..n - 1], i), Term::Id(ls[n - 1].clone()));
    }
    if n == 2 {
        return Term::Sigma(ls[0].clone(), ls[1].clone());
    }
    let a = left_comb(&ls[..n - 2]);
    let x = ls[n - 2].clone();
    let y = ls[n - 1].clone();
    Term::pipeline(vec![
        Term::Alpha(a.clone(), x.clone(), y.clone()),
        Term::ten(Term::Id(a.clone()), Term::Sigma(x.clone(), y.clone())),
        Term::AlphaInv(a, y, x),
    ])
    .expect("structural composition")
}

/// Permutation on a left comb: a term `left_comb(src) ⤳ left_comb(dst)`
/// where `dst[j] = src[source_of[j]]`, realized by bubbling adjacent swaps.
pub(crate) fn permute_left_comb(src: &[Obj], source_of: &[usize]) -> Term {
    let n = src.len();
    assert_eq!(source_of.len(), n);
    let mut arrangement: Vec<usize> = (0..n).collect();
    let mut objs: Vec<Obj> = src.to_vec();
    let mut stages: Vec<Term> = vec![Term::Id(left_comb(src))];
    for j in 0..n {
        let p = arrangement
            .iter()
            .position(|&s| s == source_of[j])
            .expect("source index out of range");
        for q in (j..p).rev() {
            stages.push(adjacent_swap(&objs, q));
            arrangement.swap(q, q + 1);
            objs.swap(q, q + 1);
        }
    }
    Term::pipeline(stages).expect("structural composition")
}
