//! String diagrams: lay out a combinator term as layered boxes and wires,
//! check that the picture routes every wire exactly as the term does, and
//! render it to an SVG file.

use tensorcat::diagram::{layout, layout_wiring, term_wiring, to_svg, StyleConfig};
use tensorcat::objects::{Obj, SpaceId};
use tensorcat::roger::{MatMorphism, Term};
use tensorcat::scalar::ScalarExpr;

fn main() -> tensorcat::Result<()> {
    let space = SpaceId::new("v", vec!["e1", "e2"]);
    let t = Obj::atom(&space);
    let td = t.clone().dual();

    // a snake with a generator box threaded onto the incoming wire
    let g = Term::prim(
        "g",
        MatMorphism::from_fn(t.clone(), t.clone(), |_, _| ScalarExpr::one()),
    );
    let cap = Term::comp(
        Term::Eps(t.clone()),
        Term::ten(g, Term::Id(td.clone())),
    )?;
    let term = Term::pipeline(vec![
        Term::RhoIntro(t.clone()),
        Term::ten(Term::Id(t.clone()), Term::Eta(t.clone())),
        Term::AlphaInv(t.clone(), td.clone(), t.clone()),
        Term::ten(cap, Term::Id(t.clone())),
        Term::Sigma(Obj::Unit, t.clone()),
        Term::RhoElim(t.clone()),
    ])?;

    let picture = layout(&term);
    println!(
        "layout: {} layers, {:.0} x {:.0} units",
        picture.layers.len(),
        picture.width,
        picture.height
    );
    println!("term wiring   {}", term_wiring(&term));
    println!("layout wiring {}", layout_wiring(&picture));
    println!(
        "wire routing matches the term: {}",
        term_wiring(&term) == layout_wiring(&picture)
    );

    let svg = to_svg(&picture, &StyleConfig::default());
    let path = std::env::temp_dir().join("tensorcat_snake.svg");
    std::fs::write(&path, &svg).map_err(|e| tensorcat::Error::Parse {
        msg: e.to_string(),
        line: 1,
        col: 1,
    })?;
    println!("wrote {} ({} bytes)", path.display(), svg.len());
    Ok(())
}
