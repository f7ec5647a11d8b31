//! Covariant calculus in flat polar coordinates: gradient and second
//! covariant derivative of the potential `-log(rho)`, and its vanishing
//! divergence. The correction terms from the connection are what make the
//! divergence cancel symbolically.

use tensorcat::geometry::{cometric, covariant_derivative, polar};
use tensorcat::objects::{Ix, Obj};
use tensorcat::roger::MatMorphism;
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let cs = polar();
    let potential = ScalarExpr::var("rho").log().neg();
    println!("coordinates ({}), potential P = {potential}", cs.coords().join(", "));

    let p = MatMorphism::from_fn(Obj::Unit, Obj::Unit, |_, _| potential.clone());
    let grad = covariant_derivative(&cs, &p)?;
    let hess = covariant_derivative(&cs, &grad)?;

    let at1 = |m: &MatMorphism, c: &str| {
        m.entry(&Ix::pair(Ix::AtomIx(c.to_string()), Ix::UnitIx), &Ix::UnitIx)
            .simplify()
    };
    let at2 = |m: &MatMorphism, v: &str, w: &str| {
        m.entry(
            &Ix::pair(
                Ix::AtomIx(v.to_string()),
                Ix::pair(Ix::AtomIx(w.to_string()), Ix::UnitIx),
            ),
            &Ix::UnitIx,
        )
        .simplify()
    };

    let coords = cs.coords();
    let row: Vec<String> = coords.iter().map(|c| at1(&grad, c).to_string()).collect();
    println!("grad P = [{}]", row.join(", "));

    println!("second covariant derivative:");
    for v in coords {
        let row: Vec<String> = coords.iter().map(|w| at2(&hess, v, w).to_string()).collect();
        println!("  [{}]", row.join(", "));
    }

    let inverse_metric = cometric(&cs)?;
    let mut terms = Vec::new();
    for (i, v) in coords.iter().enumerate() {
        for (j, w) in coords.iter().enumerate() {
            terms.push(inverse_metric[i][j].clone() * at2(&hess, v, w));
        }
    }
    println!("divergence = {}", ScalarExpr::add(terms).simplify());
    Ok(())
}
