//! Index-notation tensor networks with a use-exactly-once port discipline.
//!
//! A [`Net`] is a bag of generator nodes whose slots are [`Port`]s, plus
//! contraction edges tying a port over `a*` to a port over `a`. Ports are
//! minted by [`fresh_port`] and may be consumed exactly once, either by
//! appearing in one node or by being closed over by one edge; [`check_linear`]
//! enforces this discipline at runtime. Networks may branch into formal sums
//! (all branches exposing the same free ports) and may wrap sub-networks in
//! derivative boxes that consume a direction port over the atomic space.
//!
//! Two consumers give the representation its meaning:
//! - [`eval_einsum`] evaluates a network directly: for every assignment of
//!   the free indices it sums, over all assignments of the edge indices, the
//!   product of the generator entries. Partial-derivative boxes apply symbolic
//!   differentiation to the value of their body.
//! - [`to_morphism`] extracts an equivalent categorical [`Term`] built from
//!   generators and structural wiring only: one `Eta` per contraction edge,
//!   swap networks for port reorderings, and unitors for the bookkeeping.
//!   The defining contract is that `eval_term(to_morphism(n, σ))` equals
//!   `eval_einsum(n, σ)` for every admissible port order `σ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::extract::{self, Shape};
use crate::objects::{Ix, Obj};
use crate::roger::{eps, zero_m, MatMorphism, Term};
use crate::scalar::ScalarExpr;

/// Opaque identity of a port; unique per process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(u64);

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A port token: an identity together with the object it carries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Port {
    id: PortId,
    obj: Obj,
}

impl Port {
    pub fn id(&self) -> PortId {
        self.id
    }

    pub fn obj(&self) -> &Obj {
        &self.obj
    }
}

static NEXT_PORT: AtomicU64 = AtomicU64::new(1);

/// Mint a globally fresh free port carrying `obj`.
pub fn fresh_port(obj: &Obj) -> Port {
    Port {
        id: PortId(NEXT_PORT.fetch_add(1, Ordering::Relaxed)),
        obj: obj.clone(),
    }
}

/// A contraction edge; `hi` runs over the dual of `lo`'s object.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub hi: Port,
    pub lo: Port,
}

/// Derivative-box flavor: connection-respecting or plain coordinate partials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxKind {
    Covariant,
    Partial,
}

/// One node of a network.
#[derive(Debug, Clone, PartialEq)]
pub enum NetNode {
    /// A generator consuming its ports; `prim` has type `⊗ports ⤳ 1`.
    Gen {
        name: String,
        prim: MatMorphism,
        ports: Vec<Port>,
    },
    /// A derivative box consuming `direction` and wrapping a sub-network.
    DBox {
        kind: BoxKind,
        direction: Port,
        body: Box<Net>,
    },
}

/// A tensor network: a flat bag of nodes and edges, or a formal sum of
/// networks exposing identical free ports.
#[derive(Debug, Clone, PartialEq)]
pub enum Net {
    Flat { nodes: Vec<NetNode>, edges: Vec<Edge> },
    Sum(Vec<Net>),
}

/// Left-nested product of a list of objects; the empty list is the unit.
pub fn nest_obj(objs: &[Obj]) -> Obj {
    let mut it = objs.iter();
    let Some(first) = it.next() else {
        return Obj::Unit;
    };
    it.fold(first.clone(), |acc, o| Obj::prod(acc, o.clone()))
}

/// Left-nested pairing of a list of indices; the empty list is the unit index.
pub fn nest_ix(ixs: &[Ix]) -> Ix {
    let mut it = ixs.iter();
    let Some(first) = it.next() else {
        return Ix::UnitIx;
    };
    it.fold(first.clone(), |acc, i| Ix::pair(acc, i.clone()))
}

/// Split a left-nested pairing back into `k` components.
pub fn unnest_ix(ix: &Ix, k: usize) -> Vec<Ix> {
    if k == 0 {
        return vec![];
    }
    if k == 1 {
        return vec![ix.clone()];
    }
    let Ix::PairIx(a, b) = ix else {
        panic!("expected a pair index");
    };
    let mut out = unnest_ix(a, k - 1);
    out.push((**b).clone());
    out
}

/// Reshape `m : a ⤳ b` into the state `a ⊗ b* ⤳ 1` by dualizing the output.
pub fn state_form(m: &MatMorphism) -> MatMorphism {
    let b = m.cod().clone();
    let bd = b.clone().dual();
    let dom = Obj::prod(m.dom().clone(), bd.clone());
    let b_enum = b.enumerate_indices();
    let bd_enum = bd.enumerate_indices();
    let mut out = MatMorphism::zero(dom, Obj::Unit);
    for ((i, j), s) in m.entries() {
        let pos = b_enum
            .iter()
            .position(|x| x == j)
            .expect("codomain index enumerates");
        out.set(Ix::pair(i.clone(), bd_enum[pos].clone()), Ix::UnitIx, s.clone());
    }
    out
}

/// Wrap a single generator around the given ports. The ports' objects must
/// assemble, left-nested, to the generator's domain, and the generator must
/// land in the unit.
pub fn embed(name: &str, prim: &MatMorphism, ports: &[Port]) -> Result<Net> {
    let mut seen = BTreeSet::new();
    for p in ports {
        if !seen.insert(p.id()) {
            return Err(Error::PortReused(format!(
                "port {} listed twice in embed of `{name}`",
                p.id()
            )));
        }
    }
    let objs: Vec<Obj> = ports.iter().map(|p| p.obj().clone()).collect();
    let dom = nest_obj(&objs);
    if prim.dom() != &dom || prim.cod() != &Obj::Unit {
        return Err(Error::TypeMismatch(format!(
            "embed of `{name}`: ports assemble to {dom} but the generator has type {} ⤳ {}",
            prim.dom(),
            prim.cod()
        )));
    }
    Ok(Net::Flat {
        nodes: vec![NetNode::Gen {
            name: name.to_string(),
            prim: prim.clone(),
            ports: ports.to_vec(),
        }],
        edges: vec![],
    })
}

/// The Kronecker generator consuming a port over `a` and one over `a*`.
pub fn delta(i: &Port, j: &Port) -> Result<Net> {
    if j.obj() != &i.obj().clone().dual() {
        return Err(Error::TypeMismatch(format!(
            "delta needs dual ports, got {} and {}",
            i.obj(),
            j.obj()
        )));
    }
    let prim = eps(i.obj());
    Ok(Net::Flat {
        nodes: vec![NetNode::Gen {
            name: "δ".to_string(),
            prim,
            ports: vec![i.clone(), j.clone()],
        }],
        edges: vec![],
    })
}

/// A generator with all-zero entries over the given free ports.
pub fn zero_tensor(sig: &[Port]) -> Result<Net> {
    let objs: Vec<Obj> = sig.iter().map(|p| p.obj().clone()).collect();
    embed("0", &zero_m(&nest_obj(&objs), &Obj::Unit), sig)
}

/// A closed scalar factor (no ports).
pub fn constant(name: &str, s: ScalarExpr) -> Net {
    let mut prim = MatMorphism::zero(Obj::Unit, Obj::Unit);
    prim.set(Ix::UnitIx, Ix::UnitIx, s);
    Net::Flat {
        nodes: vec![NetNode::Gen {
            name: name.to_string(),
            prim,
            ports: vec![],
        }],
        edges: vec![],
    }
}

fn collect_attached(n: &Net, out: &mut BTreeSet<PortId>) {
    match n {
        Net::Flat { nodes, .. } => {
            for node in nodes {
                match node {
                    NetNode::Gen { ports, .. } => out.extend(ports.iter().map(Port::id)),
                    NetNode::DBox { direction, body, .. } => {
                        out.insert(direction.id());
                        collect_attached(body, out);
                    }
                }
            }
        }
        Net::Sum(bs) => {
            for b in bs {
                collect_attached(b, out);
            }
        }
    }
}

fn attached_ids(n: &Net) -> BTreeSet<PortId> {
    let mut out = BTreeSet::new();
    collect_attached(n, &mut out);
    out
}

fn mul_raw(a: Net, b: Net) -> Net {
    match (a, b) {
        (Net::Sum(xs), c) => Net::Sum(xs.into_iter().map(|x| mul_raw(x, c.clone())).collect()),
        (c, Net::Sum(xs)) => Net::Sum(xs.into_iter().map(|x| mul_raw(c.clone(), x)).collect()),
        (
            Net::Flat {
                nodes: mut n1,
                edges: mut e1,
            },
            Net::Flat { nodes: n2, edges: e2 },
        ) => {
            n1.extend(n2);
            e1.extend(e2);
            Net::Flat { nodes: n1, edges: e1 }
        }
    }
}

/// Tensor product of networks: a disjoint union of nodes and edges,
/// distributing over formal sums.
pub fn multiply(n1: Net, n2: Net) -> Result<Net> {
    let a = attached_ids(&n1);
    let b = attached_ids(&n2);
    if let Some(shared) = a.intersection(&b).next() {
        return Err(Error::PortReused(format!(
            "port {shared} attached in both factors of a product"
        )));
    }
    Ok(mul_raw(n1, n2))
}

fn add_edge(n: Net, hi: &Port, lo: &Port) -> Net {
    match n {
        Net::Sum(bs) => Net::Sum(bs.into_iter().map(|b| add_edge(b, hi, lo)).collect()),
        Net::Flat { nodes, mut edges } => {
            edges.push(Edge {
                hi: hi.clone(),
                lo: lo.clone(),
            });
            Net::Flat { nodes, edges }
        }
    }
}

/// Close two free ports of dual objects with a contraction edge.
pub fn contract(n: Net, hi: &Port, lo: &Port) -> Result<Net> {
    if hi.obj() != &lo.obj().clone().dual() {
        return Err(Error::TypeMismatch(format!(
            "contraction needs dual ports, got {} and {}",
            hi.obj(),
            lo.obj()
        )));
    }
    let free = free_ports(&n)?;
    for p in [hi, lo] {
        if free.get(&p.id()) != Some(p.obj()) {
            return Err(Error::PortNotFree(format!(
                "port {} is not free in the network",
                p.id()
            )));
        }
    }
    Ok(add_edge(n, hi, lo))
}

/// Formal sum of networks exposing identical free ports.
pub fn plus(branches: Vec<Net>) -> Result<Net> {
    if branches.len() < 2 {
        return Err(Error::SignatureMismatch(
            "a sum needs at least two branches".to_string(),
        ));
    }
    let sig0 = free_ports(&branches[0])?;
    for (k, b) in branches.iter().enumerate().skip(1) {
        if free_ports(b)? != sig0 {
            return Err(Error::SignatureMismatch(format!(
                "sum branch {k} exposes different free ports than branch 0"
            )));
        }
    }
    Ok(Net::Sum(branches))
}

/// Route a port through a morphism `m : a ⤳ b`: inserts a generator node for
/// `m` (in state form) consuming `p`, and exposes a fresh port over `b` wired
/// to the node by a contraction edge. The caller attaches the returned port.
pub fn encode(name: &str, m: &MatMorphism, p: &Port) -> Result<(Net, Port)> {
    if m.dom() != p.obj() {
        return Err(Error::TypeMismatch(format!(
            "encode of `{name}`: port carries {} but the morphism expects {}",
            p.obj(),
            m.dom()
        )));
    }
    let q = fresh_port(m.cod());
    let h = fresh_port(&m.cod().clone().dual());
    let node = NetNode::Gen {
        name: name.to_string(),
        prim: state_form(m),
        ports: vec![p.clone(), h.clone()],
    };
    let edge = Edge { hi: h, lo: q.clone() };
    Ok((
        Net::Flat {
            nodes: vec![node],
            edges: vec![edge],
        },
        q,
    ))
}

/// Lower-to-upper index move: routes a port over the atomic space through the
/// metric juggle `T ⤳ T*`, exposing a fresh dual port.
pub fn raise(p: &Port, juggle_up: &MatMorphism) -> Result<(Net, Port)> {
    if !matches!(p.obj(), Obj::Atom(_)) {
        return Err(Error::TypeMismatch(format!(
            "raise expects a port over the atomic space, got {}",
            p.obj()
        )));
    }
    encode("raise", juggle_up, p)
}

/// Upper-to-lower index move: routes a port over the dual space through the
/// cometric juggle `T* ⤳ T`, exposing a fresh primal port.
pub fn lower(p: &Port, juggle_down: &MatMorphism) -> Result<(Net, Port)> {
    let dual_of_atom = matches!(p.obj(), Obj::Dual(inner) if matches!(**inner, Obj::Atom(_)));
    if !dual_of_atom {
        return Err(Error::TypeMismatch(format!(
            "lower expects a port over the dual of the atomic space, got {}",
            p.obj()
        )));
    }
    encode("lower", juggle_down, p)
}

fn make_box(kind: BoxKind, direction: &Port, n: Net) -> Result<Net> {
    if !matches!(direction.obj(), Obj::Atom(_)) {
        return Err(Error::TypeMismatch(format!(
            "derivative direction must be over the atomic space, got {}",
            direction.obj()
        )));
    }
    match n {
        Net::Sum(bs) => Ok(Net::Sum(
            bs.into_iter()
                .map(|b| make_box(kind, direction, b))
                .collect::<Result<Vec<_>>>()?,
        )),
        flat => Ok(Net::Flat {
            nodes: vec![NetNode::DBox {
                kind,
                direction: direction.clone(),
                body: Box::new(flat),
            }],
            edges: vec![],
        }),
    }
}

/// Wrap a network in a connection-respecting derivative box. Distributes over
/// formal sums, keeping the same direction port in every branch.
pub fn deriv_box(direction: &Port, n: Net) -> Result<Net> {
    make_box(BoxKind::Covariant, direction, n)
}

/// Wrap a network in a plain coordinate-derivative box.
pub fn partial_box(direction: &Port, n: Net) -> Result<Net> {
    make_box(BoxKind::Partial, direction, n)
}

fn attach(map: &mut BTreeMap<PortId, Obj>, p: &Port) -> Result<()> {
    if map.insert(p.id(), p.obj().clone()).is_some() {
        return Err(Error::PortReused(format!(
            "port {} consumed by more than one node",
            p.id()
        )));
    }
    Ok(())
}

/// The free ports of a network, validating linearity along the way: every
/// referenced port is consumed exactly once, edge endpoints are attached and
/// dual, and sum branches agree on their free ports.
pub fn free_ports(n: &Net) -> Result<BTreeMap<PortId, Obj>> {
    match n {
        Net::Flat { nodes, edges } => {
            let mut attached: BTreeMap<PortId, Obj> = BTreeMap::new();
            for node in nodes {
                match node {
                    NetNode::Gen { ports, .. } => {
                        for p in ports {
                            attach(&mut attached, p)?;
                        }
                    }
                    NetNode::DBox { direction, body, .. } => {
                        attach(&mut attached, direction)?;
                        for (id, obj) in free_ports(body)? {
                            if attached.insert(id, obj).is_some() {
                                return Err(Error::PortReused(format!(
                                    "port {id} consumed by more than one node"
                                )));
                            }
                        }
                    }
                }
            }
            let mut spent: BTreeSet<PortId> = BTreeSet::new();
            for e in edges {
                if e.hi.obj() != &e.lo.obj().clone().dual() {
                    return Err(Error::TypeMismatch(format!(
                        "edge endpoints carry {} and {}, which are not dual",
                        e.hi.obj(),
                        e.lo.obj()
                    )));
                }
                for p in [&e.hi, &e.lo] {
                    if spent.contains(&p.id()) {
                        return Err(Error::PortReused(format!(
                            "port {} contracted twice",
                            p.id()
                        )));
                    }
                    if attached.remove(&p.id()).is_none() {
                        return Err(Error::PortUnused(format!(
                            "edge references port {} which no node consumes",
                            p.id()
                        )));
                    }
                    spent.insert(p.id());
                }
            }
            Ok(attached)
        }
        Net::Sum(branches) => {
            let mut it = branches.iter();
            let first = free_ports(it.next().ok_or_else(|| {
                Error::SignatureMismatch("a sum needs at least one branch".to_string())
            })?)?;
            for b in it {
                if free_ports(b)? != first {
                    return Err(Error::SignatureMismatch(
                        "sum branches expose different free ports".to_string(),
                    ));
                }
            }
            Ok(first)
        }
    }
}

/// Validate the use-exactly-once port discipline.
pub fn check_linear(n: &Net) -> Result<()> {
    free_ports(n).map(|_| ())
}

/// The free ports in creation order (ascending port id).
pub fn canonical_order(n: &Net) -> Result<Vec<Port>> {
    Ok(free_ports(n)?
        .into_iter()
        .map(|(id, obj)| Port { id, obj })
        .collect())
}

/// Deep port substitution; ids absent from the map are kept.
pub(crate) fn rename_ports(n: &Net, map: &BTreeMap<PortId, Port>) -> Net {
    let rp = |p: &Port| map.get(&p.id()).cloned().unwrap_or_else(|| p.clone());
    match n {
        Net::Flat { nodes, edges } => Net::Flat {
            nodes: nodes
                .iter()
                .map(|node| match node {
                    NetNode::Gen { name, prim, ports } => NetNode::Gen {
                        name: name.clone(),
                        prim: prim.clone(),
                        ports: ports.iter().map(&rp).collect(),
                    },
                    NetNode::DBox {
                        kind,
                        direction,
                        body,
                    } => NetNode::DBox {
                        kind: *kind,
                        direction: rp(direction),
                        body: Box::new(rename_ports(body, map)),
                    },
                })
                .collect(),
            edges: edges
                .iter()
                .map(|e| Edge {
                    hi: rp(&e.hi),
                    lo: rp(&e.lo),
                })
                .collect(),
        },
        Net::Sum(bs) => Net::Sum(bs.iter().map(|b| rename_ports(b, map)).collect()),
    }
}

fn index_combos(lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &len in lens {
        let mut next = Vec::with_capacity(out.len() * len);
        for prefixix in &out {
            for i in 0..len {
                let mut row = prefixix.clone();
                row.push(i);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn validate_order(free: &BTreeMap<PortId, Obj>, order: &[Port]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in order {
        if !seen.insert(p.id()) {
            return Err(Error::SignatureMismatch(format!(
                "port {} listed twice in the evaluation order",
                p.id()
            )));
        }
        match free.get(&p.id()) {
            Some(obj) if obj == p.obj() => {}
            _ => {
                return Err(Error::PortNotFree(format!(
                    "port {} is not free in the network",
                    p.id()
                )))
            }
        }
    }
    if order.len() != free.len() {
        return Err(Error::SignatureMismatch(format!(
            "order lists {} ports but the network has {} free ports",
            order.len(),
            free.len()
        )));
    }
    Ok(())
}

fn node_value(node: &NetNode, asg: &BTreeMap<PortId, Ix>) -> Result<ScalarExpr> {
    match node {
        NetNode::Gen { prim, ports, .. } => {
            let ixs: Vec<Ix> = ports
                .iter()
                .map(|p| {
                    asg.get(&p.id())
                        .cloned()
                        .expect("port assignment missing despite linearity check")
                })
                .collect();
            Ok(prim.entry(&nest_ix(&ixs), &Ix::UnitIx))
        }
        NetNode::DBox {
            kind,
            direction,
            body,
        } => {
            if *kind == BoxKind::Covariant {
                return Err(Error::TypeMismatch(
                    "covariant derivative box must be expanded before evaluation".to_string(),
                ));
            }
            let inner = net_value(body, asg)?;
            let ix = asg
                .get(&direction.id())
                .expect("direction assignment missing despite linearity check");
            let coord = ix.atom_name().expect("direction index over atomic space");
            Ok(inner.diff(coord))
        }
    }
}

fn net_value(n: &Net, asg: &BTreeMap<PortId, Ix>) -> Result<ScalarExpr> {
    match n {
        Net::Sum(bs) => {
            let mut terms = Vec::with_capacity(bs.len());
            for b in bs {
                terms.push(net_value(b, asg)?);
            }
            Ok(ScalarExpr::add(terms))
        }
        Net::Flat { nodes, edges } => {
            let lo_enums: Vec<Vec<Ix>> = edges
                .iter()
                .map(|e| e.lo.obj().enumerate_indices())
                .collect();
            let hi_enums: Vec<Vec<Ix>> = edges
                .iter()
                .map(|e| e.hi.obj().enumerate_indices())
                .collect();
            let lens: Vec<usize> = lo_enums.iter().map(Vec::len).collect();
            let mut terms = vec![];
            for combo in index_combos(&lens) {
                let mut full = asg.clone();
                for (k, e) in edges.iter().enumerate() {
                    full.insert(e.lo.id(), lo_enums[k][combo[k]].clone());
                    full.insert(e.hi.id(), hi_enums[k][combo[k]].clone());
                }
                let mut factors = Vec::with_capacity(nodes.len());
                for node in nodes {
                    factors.push(node_value(node, &full)?);
                }
                terms.push(ScalarExpr::mul(factors));
            }
            Ok(ScalarExpr::add(terms))
        }
    }
}

/// Direct evaluation: the matrix `⊗order ⤳ 1` whose entry at each assignment
/// of the free indices is the edge-summed product of generator entries.
pub fn eval_einsum(n: &Net, order: &[Port]) -> Result<MatMorphism> {
    let free = free_ports(n)?;
    validate_order(&free, order)?;
    let objs: Vec<Obj> = order.iter().map(|p| p.obj().clone()).collect();
    let enums: Vec<Vec<Ix>> = objs.iter().map(Obj::enumerate_indices).collect();
    let lens: Vec<usize> = enums.iter().map(Vec::len).collect();
    let mut out = MatMorphism::zero(nest_obj(&objs), Obj::Unit);
    for combo in index_combos(&lens) {
        let ixs: Vec<Ix> = combo
            .iter()
            .enumerate()
            .map(|(k, &i)| enums[k][i].clone())
            .collect();
        let mut asg = BTreeMap::new();
        for (p, ix) in order.iter().zip(&ixs) {
            asg.insert(p.id(), ix.clone());
        }
        let v = net_value(n, &asg)?.simplify();
        out.set(nest_ix(&ixs), Ix::UnitIx, v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LeafLabel {
    Free(PortId),
    EdgeHi(usize),
    EdgeLo(usize),
    Pad(usize),
}

fn partial_prim(space: &Obj, body_m: &MatMorphism, arity: usize) -> MatMorphism {
    let Obj::Atom(sp) = space else {
        unreachable!("direction over atomic space");
    };
    let mut objs = vec![space.clone()];
    objs.extend(extract_port_objs(body_m.dom(), arity));
    let mut out = MatMorphism::zero(nest_obj(&objs), Obj::Unit);
    for v in sp.coords() {
        for bix in body_m.dom().enumerate_indices() {
            let val = body_m.entry(&bix, &Ix::UnitIx).diff(v);
            let mut parts = vec![Ix::AtomIx(v.clone())];
            parts.extend(unnest_ix(&bix, arity));
            out.set(nest_ix(&parts), Ix::UnitIx, val);
        }
    }
    out
}

fn extract_port_objs(dom: &Obj, arity: usize) -> Vec<Obj> {
    if arity == 0 {
        return vec![];
    }
    if arity == 1 {
        return vec![dom.clone()];
    }
    let Obj::Prod(a, b) = dom else {
        unreachable!("left-nested domain");
    };
    let mut out = extract_port_objs(a, arity - 1);
    out.push((**b).clone());
    out
}

fn unit_intro_chain(k: usize) -> Term {
    let mut stages = vec![Term::Id(Obj::Unit)];
    for i in 1..k {
        stages.push(Term::RhoIntro(extract::left_comb(&vec![Obj::Unit; i])));
    }
    Term::pipeline(stages).expect("unit chain")
}

fn unit_elim_chain(k: usize) -> Term {
    extract::invert_structural(&unit_intro_chain(k))
}

fn build_term(n: &Net, order: &[Port]) -> Result<Term> {
    match n {
        Net::Sum(bs) => Term::sum(
            bs.iter()
                .map(|b| build_term(b, order))
                .collect::<Result<Vec<_>>>()?,
        ),
        Net::Flat { nodes, edges } => {
            if nodes.is_empty() {
                return Ok(Term::Id(Obj::Unit));
            }
            let free_ids: BTreeSet<PortId> = order.iter().map(Port::id).collect();
            let mut edge_of: BTreeMap<PortId, LeafLabel> = BTreeMap::new();
            for (k, e) in edges.iter().enumerate() {
                edge_of.insert(e.hi.id(), LeafLabel::EdgeHi(k));
                edge_of.insert(e.lo.id(), LeafLabel::EdgeLo(k));
            }
            let label_of = |id: PortId| -> LeafLabel {
                if free_ids.contains(&id) {
                    LeafLabel::Free(id)
                } else {
                    edge_of.get(&id).cloned().expect("port is free or contracted")
                }
            };

            // generator block and its (segmented) domain tree
            let mut node_terms: Vec<Term> = vec![];
            let mut node_shapes: Vec<Shape> = vec![];
            let mut target_labels: Vec<LeafLabel> = vec![];
            let mut pad_count = 0usize;
            for node in nodes {
                match node {
                    NetNode::Gen { name, prim, ports } => {
                        node_terms.push(Term::prim(name, prim.clone()));
                        if ports.is_empty() {
                            node_shapes.push(Shape::Leaf(Obj::Unit));
                            target_labels.push(LeafLabel::Pad(pad_count));
                            pad_count += 1;
                        } else {
                            let objs: Vec<Obj> =
                                ports.iter().map(|p| p.obj().clone()).collect();
                            node_shapes.push(Shape::comb(&objs));
                            for p in ports {
                                target_labels.push(label_of(p.id()));
                            }
                        }
                    }
                    NetNode::DBox {
                        kind,
                        direction,
                        body,
                    } => {
                        if *kind == BoxKind::Covariant {
                            return Err(Error::TypeMismatch(
                                "covariant derivative box must be expanded before extraction"
                                    .to_string(),
                            ));
                        }
                        let body_order = canonical_order(body)?;
                        let body_m = eval_einsum(body, &body_order)?;
                        let prim = partial_prim(direction.obj(), &body_m, body_order.len());
                        node_terms.push(Term::prim("∂", prim));
                        let mut objs = vec![direction.obj().clone()];
                        objs.extend(body_order.iter().map(|p| p.obj().clone()));
                        node_shapes.push(Shape::comb(&objs));
                        target_labels.push(label_of(direction.id()));
                        for p in &body_order {
                            target_labels.push(label_of(p.id()));
                        }
                    }
                }
            }
            let block = {
                let mut it = node_terms.into_iter();
                let first = it.next().expect("nonempty node list");
                it.fold(first, Term::ten)
            };
            let target_shape = {
                let mut it = node_shapes.into_iter();
                let first = it.next().expect("nonempty node list");
                it.fold(first, Shape::node)
            };
            let unit_collapse = unit_elim_chain(nodes.len());

            // source tree: free ports in order, then an Eta pair per edge and
            // a unit leaf per port-less generator
            let mut item_terms: Vec<Term> = vec![];
            let mut item_shapes: Vec<Shape> = vec![];
            let mut source_labels: Vec<LeafLabel> =
                order.iter().map(|p| LeafLabel::Free(p.id())).collect();
            for (k, e) in edges.iter().enumerate() {
                item_terms.push(Term::Eta(e.lo.obj().clone()));
                item_shapes.push(Shape::node(
                    Shape::Leaf(e.hi.obj().clone()),
                    Shape::Leaf(e.lo.obj().clone()),
                ));
                source_labels.push(LeafLabel::EdgeHi(k));
                source_labels.push(LeafLabel::EdgeLo(k));
            }
            for i in 0..pad_count {
                item_terms.push(Term::Id(Obj::Unit));
                item_shapes.push(Shape::Leaf(Obj::Unit));
                source_labels.push(LeafLabel::Pad(i));
            }
            let order_objs: Vec<Obj> = order.iter().map(|p| p.obj().clone()).collect();
            let order_shape = if order.is_empty() {
                None
            } else {
                Some(Shape::comb(&order_objs))
            };
            let extras = if item_terms.is_empty() {
                None
            } else {
                let m = item_terms.len();
                let mut it = item_terms.into_iter();
                let first = it.next().expect("nonempty item list");
                let item_block = it.fold(first, Term::ten);
                let shape = {
                    let mut it = item_shapes.into_iter();
                    let first = it.next().expect("nonempty item list");
                    it.fold(first, Shape::node)
                };
                Some((
                    Term::pipeline(vec![unit_intro_chain(m), item_block])?,
                    shape,
                ))
            };
            let (wiring_intro, source_shape) = match (order_shape, extras) {
                (Some(os), None) => (Term::Id(os.obj()), os),
                (None, Some((c, es))) => (c, es),
                (Some(os), Some((c, es))) => {
                    let oo = os.obj();
                    (
                        Term::pipeline(vec![
                            Term::RhoIntro(oo.clone()),
                            Term::ten(Term::Id(oo), c),
                        ])?,
                        Shape::node(os, es),
                    )
                }
                (None, None) => unreachable!("nonempty node list yields leaves"),
            };

            // leaf permutation from the source arrangement to the node block
            let source_leaves = source_shape.leaves();
            let source_of: Vec<usize> = target_labels
                .iter()
                .map(|l| {
                    source_labels
                        .iter()
                        .position(|s| s == l)
                        .expect("label bijection")
                })
                .collect();
            let perm = extract::permute_left_comb(&source_leaves, &source_of);
            let reshuffle = Term::pipeline(vec![
                extract::to_left_comb(&source_shape),
                perm,
                extract::invert_structural(&extract::to_left_comb(&target_shape)),
            ])?;
            Term::pipeline(vec![wiring_intro, reshuffle, block, unit_collapse])
        }
    }
}

/// Extract an equivalent categorical term of type `⊗order ⤳ 1`, built from
/// the generator prims and structural wiring only: one `Eta` per contraction
/// edge and swap networks for the port arrangement. Partial-derivative boxes
/// become derived generators (the differentiated value of their body).
pub fn to_morphism(n: &Net, order: &[Port]) -> Result<Term> {
    let free = free_ports(n)?;
    validate_order(&free, order)?;
    build_term(n, order)
}
