//! Changing charts: the polar-to-Cartesian Jacobian pair, the worked
//! gradient covector carried across, and the object-level transform whose
//! shape follows the tensor structure.

use tensorcat::geometry::{jacobian_polar_to_cartesian, transform_covector, transform_morphism};
use tensorcat::objects::{Ix, Obj};
use tensorcat::roger::{self, MatMorphism};
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let jac = jacobian_polar_to_cartesian();
    println!(
        "from {} ({}) to {} ({})",
        jac.source.name(),
        jac.source.coords().join(", "),
        jac.target.name(),
        jac.target.coords().join(", ")
    );

    let fmt = |xs: &[ScalarExpr]| {
        xs.iter()
            .map(|e| e.simplify().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };

    // gradient of -log(rho), written in polar components
    let v = vec![ScalarExpr::var("rho").recip().neg(), ScalarExpr::zero()];
    let w = transform_covector(&jac, &v)?;
    println!("polar covector     [{}]", fmt(&v));
    println!("cartesian covector [{}]", fmt(&w));

    let t = jac.source.atom();
    println!("vector transform on the tangent atom:");
    println!("{}", transform_morphism(&jac, &t)?.table());
    println!("covector transform on its dual:");
    println!("{}", transform_morphism(&jac, &t.clone().dual())?.table());

    // the identity tensor has one slot of each kind, so its components
    // must survive any change of chart
    let shape = Obj::prod(t.clone(), t.dual());
    let p = transform_morphism(&jac, &shape)?;
    let delta = MatMorphism::from_fn(shape, Obj::Unit, |ix, _| {
        let Ix::PairIx(a, b) = ix else {
            panic!("expected a pair index")
        };
        if a.atom_name() == b.atom_name() {
            ScalarExpr::one()
        } else {
            ScalarExpr::zero()
        }
    });
    let pulled = roger::compose(&delta, &p)?;
    let same = roger::equal_num(&pulled, &delta, jac.source.domain(), 16, 1e-10, 5)?;
    println!("identity tensor is invariant under the change of chart: {same}");
    Ok(())
}
