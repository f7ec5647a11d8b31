//! Shared randomized generators for the integration suites: smooth scalar
//! expressions, well-formed tensor networks, and well-typed combinator
//! terms. Everything is driven by a caller-supplied seeded generator so
//! every suite is reproducible.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tensorcat::albert::{canonical_order, contract, embed, fresh_port, multiply, nest_obj, Net, Port};
use tensorcat::objects::{Obj, SpaceId};
use tensorcat::roger::{MatMorphism, Term};
use tensorcat::scalar::ScalarExpr;

/// Random expression over the given variables built from sums, products,
/// negation, sine, cosine, and squares, with small integer leaves. Every
/// operation is smooth on all of ℝ, so finite-difference comparisons stay
/// well conditioned at any sample point.
pub fn random_expr(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> ScalarExpr {
    if depth == 0 || rng.random_range(0..4) == 0 {
        return if rng.random_bool(0.6) {
            ScalarExpr::var(vars[rng.random_range(0..vars.len())])
        } else {
            ScalarExpr::int(rng.random_range(-2..=2))
        };
    }
    match rng.random_range(0..6) {
        0 => random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1),
        1 => random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1),
        2 => random_expr(rng, vars, depth - 1).neg(),
        3 => random_expr(rng, vars, depth - 1).sin(),
        4 => random_expr(rng, vars, depth - 1).cos(),
        _ => random_expr(rng, vars, depth - 1).int_pow(2),
    }
}

/// A deterministic coordinate space of the given dimension for random nets.
pub fn net_space(dim: usize) -> SpaceId {
    let names: Vec<String> = (0..dim).map(|k| format!("c{k}")).collect();
    SpaceId::new(&format!("net{dim}"), names.iter().map(String::as_str).collect())
}

/// Random well-formed flat network: up to `max_nodes` generator nodes with
/// integer entries over ports on the space or its dual (at most
/// `max_ports` ports in total), then up to `max_edges` contraction edges
/// between free dual pairs.
pub fn random_net(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_nodes: usize,
    max_ports: usize,
    max_edges: usize,
) -> Net {
    let space = net_space(dim);
    let t = Obj::atom(&space);
    let n_nodes = rng.random_range(1..=max_nodes);
    let mut budget = max_ports;
    let mut net: Option<Net> = None;
    for k in 0..n_nodes {
        let n_ports = rng.random_range(0..=budget.min(3));
        budget -= n_ports;
        let ports: Vec<Port> = (0..n_ports)
            .map(|_| {
                let o = if rng.random_bool(0.5) {
                    t.clone()
                } else {
                    t.clone().dual()
                };
                fresh_port(&o)
            })
            .collect();
        let objs: Vec<Obj> = ports.iter().map(|p| p.obj().clone()).collect();
        let prim = MatMorphism::from_fn(nest_obj(&objs), Obj::Unit, |_, _| {
            ScalarExpr::int(rng.random_range(-3..=3))
        });
        let node = embed(&format!("p{k}"), &prim, &ports).unwrap();
        net = Some(match net {
            None => node,
            Some(acc) => multiply(acc, node).unwrap(),
        });
    }
    let mut net = net.unwrap();
    for _ in 0..max_edges {
        let free = canonical_order(&net).unwrap();
        let td = t.clone().dual();
        let primal: Vec<&Port> = free.iter().filter(|p| p.obj() == &t).collect();
        let dual: Vec<&Port> = free.iter().filter(|p| p.obj() == &td).collect();
        if primal.is_empty() || dual.is_empty() {
            break;
        }
        let lo = primal[rng.random_range(0..primal.len())].clone();
        let hi = dual[rng.random_range(0..dual.len())].clone();
        net = contract(net, &hi, &lo).unwrap();
    }
    net
}

fn small_obj(rng: &mut ChaCha8Rng, t: &Obj) -> Obj {
    match rng.random_range(0..4) {
        0 => t.clone(),
        1 => t.clone().dual(),
        2 => Obj::prod(t.clone(), t.clone().dual()),
        _ => Obj::Unit,
    }
}

fn rand_prim(rng: &mut ChaCha8Rng, fresh: &mut usize, dom: &Obj, cod: &Obj) -> Term {
    let name = format!("p{}", *fresh);
    *fresh += 1;
    let m = MatMorphism::from_fn(dom.clone(), cod.clone(), |_, _| {
        ScalarExpr::int(rng.random_range(-3..=3))
    });
    Term::prim(&name, m)
}

/// Random well-typed combinator term over the space, with at most about
/// `2 * budget` nodes: primitives, structural cells, composition against
/// shape-compatible primitives, tensor, binary sums, and scalings.
pub fn random_term(rng: &mut ChaCha8Rng, space: &SpaceId, budget: usize) -> Term {
    let t = Obj::atom(space);
    let mut fresh = 0usize;
    build_term(rng, &t, budget.max(1), &mut fresh)
}

fn build_term(rng: &mut ChaCha8Rng, t: &Obj, budget: usize, fresh: &mut usize) -> Term {
    if budget <= 1 {
        let dom = small_obj(rng, t);
        let cod = small_obj(rng, t);
        return rand_prim(rng, fresh, &dom, &cod);
    }
    match rng.random_range(0..8) {
        0 => {
            let f = build_term(rng, t, budget - 2, fresh);
            let cod = small_obj(rng, t);
            let g = rand_prim(rng, fresh, &f.cod(), &cod);
            Term::comp(g, f).unwrap()
        }
        1 => {
            let half = (budget / 2).max(1);
            let f = build_term(rng, t, half, fresh);
            let g = build_term(rng, t, (budget - half).max(1), fresh);
            Term::ten(f, g)
        }
        2 => {
            let dom = small_obj(rng, t);
            let cod = small_obj(rng, t);
            Term::sum(vec![
                rand_prim(rng, fresh, &dom, &cod),
                rand_prim(rng, fresh, &dom, &cod),
            ])
            .unwrap()
        }
        3 => Term::scale(
            ScalarExpr::int(rng.random_range(-3..=3)),
            build_term(rng, t, budget - 1, fresh),
        ),
        4 => Term::Sigma(small_obj(rng, t), small_obj(rng, t)),
        5 => Term::Eta(t.clone()),
        6 => Term::Eps(t.clone()),
        _ => Term::Id(small_obj(rng, t)),
    }
}
