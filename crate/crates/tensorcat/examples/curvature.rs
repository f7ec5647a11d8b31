//! Curvature from a metric: connection coefficients, the Riemann tensor,
//! Ricci contraction, and the curvature scalar, side by side for a flat
//! chart (polar) and a genuinely curved one (Schwarzschild).

use tensorcat::geometry::{christoffel, curvature, gaussian_curvature, polar, ricci, schwarzschild, CoordSystem};

fn survey(cs: &CoordSystem) -> tensorcat::Result<()> {
    println!("== {} ==", cs.name());
    let coords = cs.coords();
    let n = cs.dim();

    let gamma = christoffel(cs)?;
    let mut nonzero = 0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let e = gamma.entry(i, j, k).simplify();
                if !e.is_const_zero() {
                    nonzero += 1;
                    println!(
                        "  Gamma^{}[{}][{}] = {e}",
                        coords[k], coords[i], coords[j]
                    );
                }
            }
        }
    }
    if nonzero == 0 {
        println!("  connection coefficients all vanish");
    }

    let riemann = curvature(cs)?;
    let mut curved = 0;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let seed = ((l * n + i) * n + j) as u64 * n as u64 + k as u64;
                    if !riemann[l][i][j][k].is_zero(cs.domain(), 48, 1e-8, seed)? {
                        curved += 1;
                    }
                }
            }
        }
    }
    println!("  nonzero Riemann components: {curved} of {}", n * n * n * n);

    // the simplifier leaves large-but-zero trig combinations alone, so
    // vanishing is decided by randomized sampling over the chart domain
    let ric = ricci(cs)?;
    let mut ricci_flat = true;
    for row in &ric {
        for e in row {
            ricci_flat &= e.is_zero(cs.domain(), 64, 1e-8, 11)?;
        }
    }
    println!("  Ricci tensor vanishes: {ricci_flat}");
    let scalar = gaussian_curvature(cs)?;
    if scalar.is_zero(cs.domain(), 64, 1e-8, 13)? {
        println!("  curvature scalar = 0");
    } else {
        println!("  curvature scalar = {}", scalar.simplify());
    }
    Ok(())
}

fn main() -> tensorcat::Result<()> {
    survey(&polar())?;
    survey(&schwarzschild())?;
    Ok(())
}
