//! Command-line driver over the library pipelines.
//!
//! Subcommands print connection and curvature tables, verify that the
//! Einstein tensor of a metric vanishes, run the worked flat-space example,
//! evaluate and render expression files, transform covector components
//! between coordinate systems, and check the structural equations of the
//! matrix category. Exit codes: 0 success, 2 parse or type error, 3
//! verification failure, 4 numeric singularity. All randomness is seeded:
//! `--seed` wins over the `TENSORCAT_SEED` environment variable, which wins
//! over a fixed default, so identical invocations print identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::albert::{eval_einsum, to_morphism, Port};
use crate::diagram::{layout, to_svg, StyleConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    cartesian, christoffel, cometric, covariant_derivative, curvature, einstein_tensor,
    expand_derivatives, gaussian_curvature, jacobian_polar_to_cartesian, polar, ricci,
    schwarzschild_with, transform_covector, CoordSystem,
};
use crate::objects::{Ix, Obj};
use crate::parse::{parse, Elaborated, Elaborator};
use crate::roger::{law_suite, MatMorphism};
use crate::scalar::{parse_point, ScalarExpr};

const DEFAULT_SEED: u64 = 17;

#[derive(Parser)]
#[command(
    name = "tensorcat",
    version,
    about = "Symbolic tensor algebra over coordinate geometries"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the connection coefficient tables of a coordinate system.
    Christoffel(SystemArgs),
    /// Print nonzero curvature components, the Ricci matrix, and the
    /// curvature scalar.
    Curvature(SystemArgs),
    /// Check numerically that the Einstein tensor of a system vanishes.
    VerifyGr(VerifyGrArgs),
    /// Gradient, second derivative, and divergence of P = -log(rho) in
    /// polar coordinates.
    PolarDemo,
    /// Evaluate an expression file over a system, symbolically or at a
    /// numeric point.
    Eval(EvalArgs),
    /// Render an expression file as an SVG wiring diagram.
    Diagram(DiagramArgs),
    /// Transform the worked polar gradient covector to Cartesian components.
    TransformDemo,
    /// Check the structural equations of the matrix category on randomized
    /// morphisms.
    Laws(LawsArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Coordinate system: polar, cartesian, or schwarzschild.
    #[arg(long)]
    system: String,
    /// Sampling value of the symbol r_s (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    rs: f64,
    /// Sampling value of the symbol c (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args)]
struct VerifyGrArgs {
    /// Coordinate system: polar, cartesian, or schwarzschild.
    #[arg(long, default_value = "schwarzschild")]
    system: String,
    /// Sampling value of the symbol r_s.
    #[arg(long, default_value_t = 1.0)]
    rs: f64,
    /// Sampling value of the symbol c.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Sample points per tensor entry.
    #[arg(long, default_value_t = 100)]
    samples: u32,
    /// Numeric tolerance for each sampled entry.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Sampling seed; falls back to TENSORCAT_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Expression file in the s-expression syntax.
    #[arg(long)]
    expr: PathBuf,
    /// Coordinate system: polar, cartesian, or schwarzschild.
    #[arg(long)]
    system: String,
    /// Comma-separated free index names fixing the component order.
    #[arg(long)]
    order: Option<String>,
    /// Numeric point such as `rho=2,theta=0.3`; omit for symbolic output.
    #[arg(long)]
    at: Option<String>,
    /// Sampling value of the symbol r_s (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    rs: f64,
    /// Sampling value of the symbol c (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args)]
struct DiagramArgs {
    /// Expression file in the s-expression syntax.
    #[arg(long)]
    expr: PathBuf,
    /// Coordinate system: polar, cartesian, or schwarzschild.
    #[arg(long)]
    system: String,
    /// Output SVG path.
    #[arg(short, long)]
    out: PathBuf,
    /// Style file with `key = value` lines.
    #[arg(long)]
    style: Option<PathBuf>,
    /// Sampling value of the symbol r_s (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    rs: f64,
    /// Sampling value of the symbol c (schwarzschild only).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args)]
struct LawsArgs {
    /// Comma-separated space dimensions to test over.
    #[arg(long, default_value = "2,3")]
    dims: String,
    /// Randomized rounds per dimension.
    #[arg(long, default_value_t = 63)]
    rounds: usize,
    /// Numeric tolerance for each equation instance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Sampling seed; falls back to TENSORCAT_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parse the arguments, execute the selected subcommand, print its output,
/// and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Christoffel(a) => cmd_christoffel(a),
        Command::Curvature(a) => cmd_curvature(a),
        Command::VerifyGr(a) => cmd_verify_gr(a),
        Command::PolarDemo => cmd_polar_demo(),
        Command::Eval(a) => cmd_eval(a),
        Command::Diagram(a) => cmd_diagram(a),
        Command::TransformDemo => cmd_transform_demo(),
        Command::Laws(a) => cmd_laws(a),
    }
}

fn system(name: &str, rs: f64, c: f64) -> Result<CoordSystem> {
    match name {
        "polar" => Ok(polar()),
        "cartesian" => Ok(cartesian()),
        "schwarzschild" => Ok(schwarzschild_with(rs, c)),
        other => Err(Error::TypeMismatch(format!(
            "unknown coordinate system `{other}` (expected polar, cartesian, or schwarzschild)"
        ))),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("TENSORCAT_SEED") {
        Ok(v) => v.trim().parse::<u64>().map_err(|_| Error::Parse {
            msg: format!("TENSORCAT_SEED must be an unsigned integer, got `{v}`"),
            line: 1,
            col: 1,
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse {
        msg: format!("cannot read {}: {e}", path.display()),
        line: 1,
        col: 1,
    })
}

fn header(cs: &CoordSystem) -> String {
    format!("system {}, coordinates ({})\n", cs.name(), cs.coords().join(", "))
}

fn push_matrix(out: &mut String, rows: &[Vec<ScalarExpr>]) {
    for row in rows {
        let cells: Vec<String> = row.iter().map(|e| e.simplify().to_string()).collect();
        let _ = writeln!(out, "  [{}]", cells.join(", "));
    }
}

fn cmd_christoffel(a: &SystemArgs) -> Result<(String, i32)> {
    let cs = system(&a.system, a.rs, a.c)?;
    let ga = christoffel(&cs)?;
    let d = cs.dim();
    let mut out = header(&cs);
    for k in 0..d {
        let _ = writeln!(out, "Gamma^{}", cs.coords()[k]);
        let rows: Vec<Vec<ScalarExpr>> = (0..d)
            .map(|i| (0..d).map(|j| ga.entry(i, j, k).clone()).collect())
            .collect();
        push_matrix(&mut out, &rows);
    }
    Ok((out, 0))
}

fn cmd_curvature(a: &SystemArgs) -> Result<(String, i32)> {
    let cs = system(&a.system, a.rs, a.c)?;
    let r = curvature(&cs)?;
    let d = cs.dim();
    let x = cs.coords();
    let mut out = header(&cs);
    let _ = writeln!(out, "nonzero curvature components");
    let mut any = false;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let e = r[l][i][j][k].simplify();
                    if !e.is_const_zero() {
                        any = true;
                        let _ = writeln!(
                            out,
                            "  R[{}][{}][{}][{}] = {e}",
                            x[l], x[i], x[j], x[k]
                        );
                    }
                }
            }
        }
    }
    if !any {
        let _ = writeln!(out, "  (all vanish)");
    }
    let _ = writeln!(out, "Ricci");
    push_matrix(&mut out, &ricci(&cs)?);
    let _ = writeln!(out, "curvature scalar = {}", gaussian_curvature(&cs)?.simplify());
    Ok((out, 0))
}

fn cmd_verify_gr(a: &VerifyGrArgs) -> Result<(String, i32)> {
    let cs = system(&a.system, a.rs, a.c)?;
    let seed = resolve_seed(a.seed)?;
    let g = einstein_tensor(&cs)?;
    let x = cs.coords();
    let d = cs.dim();
    let mut out = header(&cs);
    let mut fails = 0usize;
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let ok = e.is_zero(
                cs.domain(),
                a.samples,
                a.tol,
                seed.wrapping_add((i * d + j) as u64),
            )?;
            if !ok {
                fails += 1;
            }
            let _ = writeln!(out, "G[{}][{}] {}", x[i], x[j], if ok { "pass" } else { "FAIL" });
        }
    }
    if fails == 0 {
        let _ = writeln!(out, "einstein tensor vanishes: {}/{} entries", d * d, d * d);
        Ok((out, 0))
    } else {
        let _ = writeln!(out, "VERIFICATION FAILED: {fails}/{} entries nonzero", d * d);
        Ok((out, 3))
    }
}

fn cmd_polar_demo() -> Result<(String, i32)> {
    let cs = polar();
    let p = MatMorphism::from_fn(Obj::Unit, Obj::Unit, |_, _| {
        ScalarExpr::var("rho").log().neg()
    });
    let grad = covariant_derivative(&cs, &p)?;
    let hess = covariant_derivative(&cs, &grad)?;
    let x = cs.coords();
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
    let mut out = header(&cs);
    let _ = writeln!(out, "potential P = {}", ScalarExpr::var("rho").log().neg());
    let gradv: Vec<String> = x.iter().map(|c| at1(&grad, c).to_string()).collect();
    let _ = writeln!(out, "grad P = [{}]", gradv.join(", "));
    let _ = writeln!(out, "second derivative");
    for v in x {
        let row: Vec<String> = x.iter().map(|w| at2(&hess, v, w).to_string()).collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
    let gp = cometric(&cs)?;
    let mut terms = Vec::new();
    for (i, vn) in x.iter().enumerate() {
        for (j, wn) in x.iter().enumerate() {
            terms.push(gp[i][j].clone() * at2(&hess, vn, wn));
        }
    }
    let _ = writeln!(out, "divergence = {}", ScalarExpr::add(terms).simplify());
    Ok((out, 0))
}

fn load_net(expr: &Path, cs: &CoordSystem) -> Result<Elaborated> {
    let src = read_text(expr)?;
    let ast = parse(&src)?;
    let el = Elaborator::new(cs);
    el.elaborate(&ast)
}

/// Resolve the free-port evaluation order: an explicit comma-separated name
/// list must cover every free index exactly; the default is name order.
fn port_order(
    free: &BTreeMap<String, Port>,
    requested: Option<&str>,
) -> Result<Vec<(String, Port)>> {
    match requested {
        None => Ok(free.iter().map(|(n, p)| (n.clone(), p.clone())).collect()),
        Some(s) => {
            let names: Vec<&str> = s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect();
            if names.len() != free.len() {
                return Err(Error::TypeMismatch(format!(
                    "order lists {} indices but the expression has {} free",
                    names.len(),
                    free.len()
                )));
            }
            names
                .into_iter()
                .map(|n| {
                    free.get(n)
                        .map(|p| (n.to_string(), p.clone()))
                        .ok_or_else(|| {
                            Error::UnboundIndex(format!(
                                "`{n}` is not a free index of the expression"
                            ))
                        })
                })
                .collect()
        }
    }
}

fn cmd_eval(a: &EvalArgs) -> Result<(String, i32)> {
    let cs = system(&a.system, a.rs, a.c)?;
    let el = load_net(&a.expr, &cs)?;
    let net = expand_derivatives(&cs, &el.net)?;
    let ordered = port_order(&el.free, a.order.as_deref())?;
    let ports: Vec<Port> = ordered.iter().map(|(_, p)| p.clone()).collect();
    let m = eval_einsum(&net, &ports)?;
    let mut out = String::new();
    if !ordered.is_empty() {
        let names: Vec<&str> = ordered.iter().map(|(n, _)| n.as_str()).collect();
        let _ = writeln!(out, "free indices: {}", names.join(", "));
    }
    match &a.at {
        None => {
            if ports.is_empty() {
                let _ = writeln!(out, "value = {}", m.entry(&Ix::UnitIx, &Ix::UnitIx).simplify());
            } else {
                out.push_str(&m.table());
            }
        }
        Some(point) => {
            let mut env = parse_point(point)?;
            if a.system == "schwarzschild" {
                env.entry("r_s".to_string()).or_insert(a.rs);
                env.entry("c".to_string()).or_insert(a.c);
            }
            for ix in m.dom().enumerate_indices() {
                let v = m.entry(&ix, &Ix::UnitIx).eval_num(&env)?;
                let _ = writeln!(out, "{ix} = {v}");
            }
        }
    }
    Ok((out, 0))
}

fn cmd_diagram(a: &DiagramArgs) -> Result<(String, i32)> {
    let cs = system(&a.system, a.rs, a.c)?;
    let el = load_net(&a.expr, &cs)?;
    let net = expand_derivatives(&cs, &el.net)?;
    let ordered = port_order(&el.free, None)?;
    let ports: Vec<Port> = ordered.iter().map(|(_, p)| p.clone()).collect();
    let term = to_morphism(&net, &ports)?;
    let style = match &a.style {
        None => StyleConfig::default(),
        Some(p) => StyleConfig::parse(&read_text(p)?)?,
    };
    let svg = to_svg(&layout(&term), &style);
    fs::write(&a.out, &svg).map_err(|e| Error::Parse {
        msg: format!("cannot write {}: {e}", a.out.display()),
        line: 1,
        col: 1,
    })?;
    Ok((format!("wrote {} ({} bytes)\n", a.out.display(), svg.len()), 0))
}

fn cmd_transform_demo() -> Result<(String, i32)> {
    let v = vec![ScalarExpr::var("rho").recip().neg(), ScalarExpr::zero()];
    let j = jacobian_polar_to_cartesian();
    let w = transform_covector(&j, &v)?;
    let fmt = |xs: &[ScalarExpr]| {
        xs.iter()
            .map(|e| e.simplify().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "polar components     [{}]", fmt(&v));
    let _ = writeln!(out, "cartesian components [{}]", fmt(&w));
    Ok((out, 0))
}

fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let mut dims = Vec::new();
    for part in s.split(',') {
        let t = part.trim();
        if t.is_empty() {
            continue;
        }
        let d: usize = t.parse().map_err(|_| Error::Parse {
            msg: format!("bad dimension `{t}`"),
            line: 1,
            col: 1,
        })?;
        if d == 0 || d > 6 {
            return Err(Error::TypeMismatch(format!(
                "dimension {d} out of range 1..=6"
            )));
        }
        dims.push(d);
    }
    if dims.is_empty() {
        return Err(Error::TypeMismatch("no dimensions given".to_string()));
    }
    Ok(dims)
}

fn cmd_laws(a: &LawsArgs) -> Result<(String, i32)> {
    let seed = resolve_seed(a.seed)?;
    let dims = parse_dims(&a.dims)?;
    let (reports, drawn) = law_suite(&dims, a.rounds, a.tol, seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "seed {seed}, dimensions {dims:?}, {drawn} random morphisms");
    let w = reports
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(0)
        .max("law".len());
    let _ = writeln!(out, "{:<w$}  checked  failures", "law");
    let mut fails = 0usize;
    for r in &reports {
        fails += r.failures;
        let _ = writeln!(out, "{:<w$}  {:>7}  {:>8}", r.name, r.checked, r.failures);
    }
    if fails == 0 {
        let _ = writeln!(out, "all laws hold");
        Ok((out, 0))
    } else {
        let _ = writeln!(out, "LAW FAILURES: {fails}");
        Ok((out, 3))
    }
}
