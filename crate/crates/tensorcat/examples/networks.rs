//! Tensor networks: state-form generators attached to ports, a contraction
//! edge implementing matrix product, numeric evaluation over an index
//! order, and extraction of an equivalent combinator term.

use tensorcat::albert::{
    canonical_order, contract, embed, eval_einsum, fresh_port, multiply, nest_obj, to_morphism,
    Net,
};
use tensorcat::objects::{Ix, Obj, SpaceId};
use tensorcat::roger::{self, MatMorphism};
use tensorcat::scalar::{Domain, ScalarExpr};

fn position(ix: &Ix) -> usize {
    match ix.atom_name() {
        Some("e1") => 0,
        Some("e2") => 1,
        other => panic!("unexpected index {other:?}"),
    }
}

fn state_matrix(t: &Obj, rows: [[i64; 2]; 2]) -> MatMorphism {
    let shape = nest_obj(&[t.clone(), t.clone().dual()]);
    MatMorphism::from_fn(shape, Obj::Unit, |ix, _| {
        let Ix::PairIx(r, c) = ix else {
            panic!("expected a pair index")
        };
        ScalarExpr::int(rows[position(r)][position(c)])
    })
}

fn main() -> tensorcat::Result<()> {
    let space = SpaceId::new("v", vec!["e1", "e2"]);
    let t = Obj::atom(&space);

    let i = fresh_port(&t);
    let k_out = fresh_port(&t.clone().dual());
    let k_in = fresh_port(&t);
    let j = fresh_port(&t.clone().dual());

    let a = embed(
        "a",
        &state_matrix(&t, [[1, 2], [3, 4]]),
        &[i.clone(), k_out.clone()],
    )?;
    let b = embed(
        "b",
        &state_matrix(&t, [[5, 6], [7, 8]]),
        &[k_in.clone(), j.clone()],
    )?;
    let product: Net = contract(multiply(a, b)?, &k_out, &k_in)?;

    let order = canonical_order(&product)?;
    println!("free ports after contraction: {}", order.len());
    let m = eval_einsum(&product, &order)?;
    println!("matrix product a * b:");
    println!("{}", m.table());

    let term = to_morphism(&product, &order)?;
    let replayed = roger::eval_term(&term)?;
    let same = roger::equal_num(&m, &replayed, &Domain::new(), 2, 1e-12, 0)?;
    println!("extracted combinator term evaluates to the same matrix: {same}");
    Ok(())
}
