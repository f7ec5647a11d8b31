//! The textual front end: parse an expression, elaborate it over a
//! coordinate system into a tensor network, and evaluate. Shows the
//! built-in metric tensors, a registered scalar potential, connection
//! derivative boxes, and index juggling inside an expression.

use tensorcat::albert::eval_einsum;
use tensorcat::geometry::{expand_derivatives, polar};
use tensorcat::objects::{Ix, Obj};
use tensorcat::parse::{parse, Elaborator};
use tensorcat::roger::MatMorphism;
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let cs = polar();
    let mut el = Elaborator::new(&cs);
    el.register(
        "P",
        MatMorphism::from_fn(Obj::Unit, Obj::Unit, |_, _| {
            ScalarExpr::var("rho").log().neg()
        }),
    )?;

    // the metric contracted with its inverse is the identity tensor
    let src = "(contract k (mul (tensor metric _i _k) (tensor cometric ^k ^j)))";
    println!("> {src}");
    let ast = parse(src)?;
    let out = el.elaborate(&ast)?;
    let order = vec![out.free["i"].clone(), out.free["j"].clone()];
    let m = eval_einsum(&out.net, &order)?;
    println!("{}", m.table());

    // the Laplacian of the potential: the inner derivative slot is filled
    // by lowering a contravariant token, which the contraction then pairs
    // with the outer covariant derivative; derivative boxes are expanded
    // over the connection before evaluation
    let src = "(contract i (deriv _i (deriv (lower ^i) (tensor P))))";
    println!("> {src}");
    let ast = parse(src)?;
    let expanded = expand_derivatives(&cs, &el.elaborate(&ast)?.net)?;
    let m = eval_einsum(&expanded, &[])?;
    println!("laplacian of P = {}", m.entry(&Ix::UnitIx, &Ix::UnitIx).simplify());
    Ok(())
}
