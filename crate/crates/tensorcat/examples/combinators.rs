//! The point-free combinator language and its matrix semantics: a closed
//! loop evaluating to the space dimension, the snake composite collapsing
//! to the identity, and the randomized equation suite.

use tensorcat::objects::{Obj, SpaceId};
use tensorcat::roger::{self, law_suite, Term};
use tensorcat::scalar::Domain;

fn main() -> tensorcat::Result<()> {
    let space = SpaceId::new("v", vec!["e1", "e2", "e3"]);
    let t = Obj::atom(&space);
    let td = t.clone().dual();

    let loop_term = Term::pipeline(vec![
        Term::Eta(t.clone()),
        Term::Sigma(td.clone(), t.clone()),
        Term::Eps(t.clone()),
    ])?;
    println!("closed loop (unit in, unit out):");
    println!("{}", roger::eval_term(&loop_term)?.table());

    let snake = Term::pipeline(vec![
        Term::RhoIntro(t.clone()),
        Term::ten(Term::Id(t.clone()), Term::Eta(t.clone())),
        Term::AlphaInv(t.clone(), td.clone(), t.clone()),
        Term::ten(Term::Eps(t.clone()), Term::Id(t.clone())),
        Term::Sigma(Obj::Unit, t.clone()),
        Term::RhoElim(t.clone()),
    ])?;
    let collapsed = roger::eval_term(&snake)?;
    let same = roger::equal_num(
        &collapsed,
        &roger::identity(&t),
        &Domain::new(),
        4,
        1e-12,
        0,
    )?;
    println!("snake composite equals the identity: {same}");

    let (reports, drawn) = law_suite(&[2, 3], 8, 1e-9, 42)?;
    println!("equation suite on {drawn} random morphisms:");
    for r in &reports {
        println!("  {:<22} {:>3} checked, {} failures", r.name, r.checked, r.failures);
    }
    Ok(())
}
