//! Index juggling: the metric and cometric as explicit conversion
//! morphisms, their round trip collapsing to the identity, and a network
//! whose contravariant slot is filled by raising a covariant index token.

use tensorcat::albert::{embed, eval_einsum, fresh_port, multiply};
use tensorcat::geometry::{juggle_down_matrix, juggle_up_matrix, polar, raise_index};
use tensorcat::objects::{Ix, Obj};
use tensorcat::roger::{self, MatMorphism};
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let cs = polar();
    let t = cs.atom();

    let up = juggle_up_matrix(&cs)?;
    let down = juggle_down_matrix(&cs)?;
    println!("metric conversion (covariant slot to contravariant slot):");
    println!("{}", up.table());
    println!("cometric conversion (the other way):");
    println!("{}", down.table());

    let round_trip = roger::compose(&down, &up)?;
    let same = roger::equal_num(
        &round_trip,
        &roger::identity(&t),
        cs.domain(),
        16,
        1e-10,
        3,
    )?;
    println!("cometric after metric is the identity: {same}");

    // the vector field u = (rho, sin(theta)), stored with one
    // contravariant slot
    let u_state = MatMorphism::from_fn(t.clone().dual(), Obj::Unit, |i, _| {
        match i.atom_name() {
            Some("rho") => ScalarExpr::var("rho"),
            Some("theta") => ScalarExpr::sin(ScalarExpr::var("theta")),
            _ => ScalarExpr::zero(),
        }
    });

    let token = fresh_port(&t);
    let (frag, slot) = raise_index(&cs, &token)?;
    let net = multiply(frag, embed("u", &u_state, &[slot])?)?;
    let m = eval_einsum(&net, &[token])?;
    println!("components of u seen through the raised covariant token:");
    for c in cs.coords() {
        let e = m.entry(&Ix::AtomIx(c.clone()), &Ix::UnitIx).simplify();
        println!("  u_{c} = {e}");
    }
    Ok(())
}
