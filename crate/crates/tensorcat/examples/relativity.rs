//! Numeric verification that the Schwarzschild metric solves the vacuum
//! field equations: every entry of its Einstein tensor is checked against
//! zero by randomized sampling over the chart domain.

use tensorcat::geometry::{einstein_tensor, schwarzschild_with, verify_ricci_identity};
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let cs = schwarzschild_with(1.0, 1.0);
    println!(
        "system {}, coordinates ({})",
        cs.name(),
        cs.coords().join(", ")
    );

    let g = einstein_tensor(&cs)?;
    let coords = cs.coords();
    let mut all_zero = true;
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let zero = e.is_zero(cs.domain(), 100, 1e-8, 7)?;
            all_zero &= zero;
            let verdict = if zero { "vanishes" } else { "NONZERO" };
            println!("  G[{}][{}] {verdict}", coords[i], coords[j]);
        }
    }
    println!(
        "einstein tensor {}",
        if all_zero { "vanishes: vacuum solution" } else { "does not vanish" }
    );

    let u = vec![
        ScalarExpr::zero(),
        ScalarExpr::var("rho"),
        ScalarExpr::zero(),
        ScalarExpr::zero(),
    ];
    let holds = verify_ricci_identity(&cs, &u, 32, 1e-7)?;
    println!("commutator of covariant derivatives matches curvature: {holds}");
    Ok(())
}
