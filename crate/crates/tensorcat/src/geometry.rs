//! Coordinate differential geometry on top of the symbolic matrix layer.
//!
//! A [`CoordSystem`] couples a named coordinate space with a symbolic metric
//! and a sampling [`Domain`] that stays away from the metric's singular loci.
//! From that single input the module derives the whole classical tower:
//!
//! * [`cometric`]: the inverse metric, by symbolic Gauss-Jordan elimination
//!   with numerically validated pivots;
//! * [`christoffel`]: the Levi-Civita connection coefficients;
//! * [`affinity`]: connection coefficients reshaped to act on an arbitrary
//!   tensor object, including duals and products;
//! * [`partial_derivative`] and [`covariant_derivative`] on symbolic matrix
//!   morphisms, satisfying the expected product rules;
//! * [`expand_derivatives`], which rewrites connection-respecting derivative
//!   boxes in a tensor network into coordinate-derivative boxes plus
//!   correction generators, without changing the network's value;
//! * [`curvature`], [`ricci`], [`gaussian_curvature`] and
//!   [`einstein_tensor`], culminating in the vacuum field check; and
//! * [`Jacobian`] transforms between coordinate systems, with component
//!   transforms for covectors and for arbitrary composite objects.
//!
//! Built-in systems: the flat plane in Cartesian ([`cartesian`]) and polar
//! ([`polar`]) coordinates, and the Schwarzschild exterior
//! ([`schwarzschild`]) with symbolic radius `r_s` and light speed `c`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::albert::{
    canonical_order, constant, fresh_port, nest_ix, nest_obj, rename_ports, unnest_ix, BoxKind,
    Edge, Net, NetNode, Port, PortId,
};
use crate::error::{Error, Result};
use crate::objects::{Ix, Obj, SpaceId};
use crate::roger::{self, MatMorphism};
use crate::scalar::{Domain, ScalarExpr};

/// Trials, tolerance and seed used for the module's internal consistency
/// checks (metric symmetry, pivot validation).
const CHECK_TRIALS: u32 = 32;
const CHECK_TOL: f64 = 1e-9;
const CHECK_SEED: u64 = 0x1799_25F1;
const PIVOT_SAMPLES: u32 = 6;
const PIVOT_TOL: f64 = 1e-8;

/// A named coordinate chart with a symbolic metric and a sampling domain.
///
/// The metric is a symmetric `d x d` array of scalar expressions over the
/// coordinate symbols (plus any named constants). The domain binds every
/// symbol appearing in the metric so that numeric checks can draw points
/// where the chart is regular.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordSystem {
    space: SpaceId,
    metric: Vec<Vec<ScalarExpr>>,
    domain: Domain,
}

impl CoordSystem {
    /// Build a system from parts, validating shape and metric symmetry.
    pub fn new(space: SpaceId, metric: Vec<Vec<ScalarExpr>>, domain: Domain) -> Result<Self> {
        let d = space.dim();
        if metric.len() != d || metric.iter().any(|row| row.len() != d) {
            return Err(Error::TypeMismatch(format!(
                "metric for {} must be {d} x {d}",
                space.name()
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let diff = (metric[i][j].clone() - metric[j][i].clone()).simplify();
                if !diff.is_zero(&domain, CHECK_TRIALS, CHECK_TOL, CHECK_SEED)? {
                    return Err(Error::TypeMismatch(format!(
                        "metric for {} is not symmetric at ({i}, {j})",
                        space.name()
                    )));
                }
            }
        }
        Ok(Self {
            space,
            metric,
            domain,
        })
    }

    pub fn name(&self) -> &str {
        self.space.name()
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn coords(&self) -> &[String] {
        self.space.coords()
    }

    /// The tangent object of this chart.
    pub fn atom(&self) -> Obj {
        Obj::atom(&self.space)
    }

    pub fn metric(&self) -> &Vec<Vec<ScalarExpr>> {
        &self.metric
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The metric as a state `(T (x) T) -> 1` with entry `g[i][j]`.
    pub fn metric_state(&self) -> MatMorphism {
        let t = self.atom();
        MatMorphism::from_fn(Obj::prod(t.clone(), t), Obj::Unit, |ij, _| {
            let Ix::PairIx(i, j) = ij else {
                unreachable!("metric state domain is a pair");
            };
            self.metric[pos_of(&self.space, i)][pos_of(&self.space, j)].clone()
        })
    }
}

/// Position of an atomic (or dualized atomic) index within its space.
fn pos_of(space: &SpaceId, ix: &Ix) -> usize {
    let name = match ix {
        Ix::DualIx(inner) => inner.atom_name(),
        other => other.atom_name(),
    }
    .expect("index over an atomic space");
    space
        .position(name)
        .expect("coordinate name belongs to this space")
}

/// The flat plane in axis-aligned coordinates; its metric is the identity.
pub fn cartesian() -> CoordSystem {
    let space = SpaceId::new("cartesian", vec!["x", "y"]);
    let metric = vec![
        vec![ScalarExpr::one(), ScalarExpr::zero()],
        vec![ScalarExpr::zero(), ScalarExpr::one()],
    ];
    let domain = Domain::new().interval("x", -5.0, 5.0).interval("y", -5.0, 5.0);
    CoordSystem {
        space,
        metric,
        domain,
    }
}

/// The flat plane in polar coordinates `(rho, theta)` with metric
/// `diag(1, rho^2)`; the domain keeps clear of the origin and the axis.
pub fn polar() -> CoordSystem {
    let space = SpaceId::new("polar", vec!["rho", "theta"]);
    let rho = ScalarExpr::var("rho");
    let metric = vec![
        vec![ScalarExpr::one(), ScalarExpr::zero()],
        vec![ScalarExpr::zero(), rho.int_pow(2)],
    ];
    let domain = Domain::new()
        .interval("rho", 0.1, 10.0)
        .interval("theta", 0.05, std::f64::consts::PI - 0.05);
    CoordSystem {
        space,
        metric,
        domain,
    }
}

/// The Schwarzschild exterior in coordinates `(t, rho, theta, phi)`, with the
/// horizon radius `r_s` and light speed `c` kept as named symbols. Sampling
/// pins both constants and draws the radius from `(1.5 r_s, 20 r_s)`.
pub fn schwarzschild() -> CoordSystem {
    schwarzschild_with(1.0, 1.0)
}

/// Schwarzschild exterior with explicit sampling values for `r_s` and `c`.
pub fn schwarzschild_with(rs: f64, c: f64) -> CoordSystem {
    let space = SpaceId::new("schwarzschild", vec!["t", "rho", "theta", "phi"]);
    let rho = ScalarExpr::var("rho");
    let theta = ScalarExpr::var("theta");
    let rs_sym = ScalarExpr::var("r_s");
    let c_sym = ScalarExpr::var("c");
    let zero = ScalarExpr::zero;
    let lapse = ScalarExpr::add(vec![
        ScalarExpr::one(),
        (rs_sym * rho.clone().recip()).neg(),
    ]);
    let metric = vec![
        vec![
            (lapse.clone() * c_sym.int_pow(2)).neg(),
            zero(),
            zero(),
            zero(),
        ],
        vec![zero(), lapse.recip(), zero(), zero()],
        vec![zero(), zero(), rho.clone().int_pow(2), zero()],
        vec![zero(), zero(), zero(), (rho * theta.clone().sin()).int_pow(2)],
    ];
    let domain = Domain::new()
        .interval("t", -5.0, 5.0)
        .interval("rho", 1.5 * rs, 20.0 * rs)
        .interval("theta", 0.05, std::f64::consts::PI - 0.05)
        .interval("phi", 0.05, 2.0 * std::f64::consts::PI - 0.05)
        .fixed("r_s", rs)
        .fixed("c", c);
    CoordSystem {
        space,
        metric,
        domain,
    }
}

/// Invert a symbolic square matrix by Gauss-Jordan elimination. Pivot
/// candidates are validated numerically on the sampling domain before any
/// symbolic division, so a singular matrix fails cleanly instead of
/// producing an expression that blows up everywhere.
fn invert_symbolic(m: &[Vec<ScalarExpr>], domain: &Domain) -> Result<Vec<Vec<ScalarExpr>>> {
    let d = m.len();
    let mut a: Vec<Vec<ScalarExpr>> = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut v = row.clone();
            for c in 0..d {
                v.push(if r == c {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                });
            }
            v
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    let samples: Vec<_> = (0..PIVOT_SAMPLES).map(|_| domain.sample(&mut rng)).collect();
    for col in 0..d {
        let mut pivot_row = None;
        'rows: for r in col..d {
            for env in &samples {
                let v = a[r][col].eval_num(env)?;
                if !v.is_finite() || v.abs() <= PIVOT_TOL {
                    continue 'rows;
                }
            }
            pivot_row = Some(r);
            break;
        }
        let Some(r) = pivot_row else {
            return Err(Error::SingularMetric(format!(
                "no usable pivot in column {col}"
            )));
        };
        a.swap(col, r);
        let inv_piv = a[col][col].clone().recip();
        for c in 0..2 * d {
            a[col][c] = (a[col][c].clone() * inv_piv.clone()).simplify();
        }
        for r2 in 0..d {
            if r2 == col {
                continue;
            }
            let f = a[r2][col].clone();
            if f.is_const_zero() {
                continue;
            }
            for c in 0..2 * d {
                a[r2][c] = (a[r2][c].clone() - f.clone() * a[col][c].clone()).simplify();
            }
        }
    }
    Ok(a.into_iter().map(|row| row[d..].to_vec()).collect())
}

/// The inverse metric `g'` with `g . g' = delta`.
pub fn cometric(cs: &CoordSystem) -> Result<Vec<Vec<ScalarExpr>>> {
    invert_symbolic(&cs.metric, &cs.domain)
}

/// The cometric as a costate `1 -> (T (x) T)` with entry `g'[i][j]`.
pub fn cometric_costate(cs: &CoordSystem) -> Result<MatMorphism> {
    let gp = cometric(cs)?;
    let t = cs.atom();
    Ok(MatMorphism::from_fn(
        Obj::Unit,
        Obj::prod(t.clone(), t),
        |_, ij| {
            let Ix::PairIx(i, j) = ij else {
                unreachable!("cometric costate codomain is a pair");
            };
            gp[pos_of(cs.space(), i)][pos_of(cs.space(), j)].clone()
        },
    ))
}

/// Connection coefficients `Gamma[i][j][k]`: the first two slots are
/// covariant and symmetric, the last is contravariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    entries: Vec<Vec<Vec<ScalarExpr>>>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize, k: usize) -> &ScalarExpr {
        &self.entries[i][j][k]
    }

    pub fn entries(&self) -> &Vec<Vec<Vec<ScalarExpr>>> {
        &self.entries
    }
}

/// The Levi-Civita connection of the metric:
/// `Gamma[i][j][k] = 1/2 g'[l][k] (d_j g[i][l] + d_i g[j][l] - d_l g[j][i])`,
/// summed over `l`, with every entry simplified.
pub fn christoffel(cs: &CoordSystem) -> Result<Christoffel> {
    let d = cs.dim();
    let gp = cometric(cs)?;
    let g = &cs.metric;
    let x = cs.coords();
    let half = ScalarExpr::rat(1, 2);
    let mut entries = vec![vec![vec![ScalarExpr::zero(); d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut terms = Vec::with_capacity(3 * d);
                for l in 0..d {
                    terms.push(half.clone() * gp[l][k].clone() * g[i][l].diff(&x[j]));
                    terms.push(half.clone() * gp[l][k].clone() * g[j][l].diff(&x[i]));
                    terms.push((half.clone() * gp[l][k].clone() * g[j][i].diff(&x[l])).neg());
                }
                entries[i][j][k] = ScalarExpr::add(terms).simplify();
            }
        }
    }
    Ok(Christoffel { entries })
}

/// Connection coefficients acting on an arbitrary object `a`, as a matrix
/// `(T (x) a) -> a`. The tangent slot carries the derivative direction.
///
/// * on the unit object the coefficients vanish;
/// * on the tangent atom they are the plain Christoffel symbols;
/// * on a dual they act by the negated transpose;
/// * on a product they act factor-by-factor, leaving the other factor alone.
pub fn affinity(cs: &CoordSystem, a: &Obj) -> Result<MatMorphism> {
    let t = cs.atom();
    let dom = Obj::prod(t.clone(), a.clone());
    match a {
        Obj::Unit => Ok(roger::zero_m(&dom, &Obj::Unit)),
        Obj::Atom(sp) => {
            if sp != cs.space() {
                return Err(Error::TypeMismatch(format!(
                    "affinity for space {} applied to space {}",
                    cs.name(),
                    sp.name()
                )));
            }
            let ga = christoffel(cs)?;
            Ok(MatMorphism::from_fn(dom, a.clone(), |vi, k| {
                let Ix::PairIx(v, i) = vi else {
                    unreachable!("affinity domain is a pair");
                };
                ga.entry(
                    pos_of(cs.space(), v),
                    pos_of(cs.space(), i),
                    pos_of(cs.space(), k),
                )
                .clone()
            }))
        }
        Obj::Dual(inner) => {
            let base = affinity(cs, inner)?;
            Ok(MatMorphism::from_fn(dom, a.clone(), |vj, kd| {
                let Ix::PairIx(v, jd) = vj else {
                    unreachable!("affinity domain is a pair");
                };
                let j = jd.undual().expect("index over a dual object");
                let k = kd.undual().expect("index over a dual object");
                base.entry(&Ix::pair((**v).clone(), k.clone()), j).neg()
            }))
        }
        Obj::Prod(b, c) => {
            let ab = affinity(cs, b)?;
            let ac = affinity(cs, c)?;
            Ok(MatMorphism::from_fn(dom, a.clone(), |vjk, lm| {
                let Ix::PairIx(v, jk) = vjk else {
                    unreachable!("affinity domain is a pair");
                };
                let Ix::PairIx(j, k) = &**jk else {
                    unreachable!("product index is a pair");
                };
                let Ix::PairIx(l, m) = lm else {
                    unreachable!("product index is a pair");
                };
                let mut terms = Vec::new();
                if k == m {
                    terms.push(ab.entry(&Ix::pair((**v).clone(), (**j).clone()), l));
                }
                if j == l {
                    terms.push(ac.entry(&Ix::pair((**v).clone(), (**k).clone()), m));
                }
                ScalarExpr::add(terms)
            }))
        }
    }
}

/// Coordinate derivative of a symbolic matrix `t : a -> b`, returned as
/// `(T (x) a) -> b` with entry `((v, i), j) = d_v t[i][j]`.
pub fn partial_derivative(cs: &CoordSystem, t: &MatMorphism) -> MatMorphism {
    let tangent = cs.atom();
    MatMorphism::from_fn(
        Obj::prod(tangent, t.dom().clone()),
        t.cod().clone(),
        |vi, j| {
            let Ix::PairIx(v, i) = vi else {
                unreachable!("partial derivative domain is a pair");
            };
            let coord = v.atom_name().expect("direction over the tangent atom");
            t.entry(i, j).diff(coord)
        },
    )
}

/// Covariant derivative of `t : a -> b` as `(T (x) a) -> b`:
/// the coordinate derivative, minus `t` composed with the affinity of `a`,
/// plus the affinity of `b` composed with `id_T (x) t`.
pub fn covariant_derivative(cs: &CoordSystem, t: &MatMorphism) -> Result<MatMorphism> {
    let pd = partial_derivative(cs, t);
    let aff_dom = affinity(cs, t.dom())?;
    let aff_cod = affinity(cs, t.cod())?;
    let minus_one = ScalarExpr::int(-1);
    let dom_term = roger::scale(&minus_one, &roger::compose(t, &aff_dom)?);
    let id_t = roger::identity(&cs.atom());
    let cod_term = roger::compose(&aff_cod, &roger::tensor(&id_t, t))?;
    let total = roger::add(&roger::add(&pd, &dom_term)?, &cod_term)?;
    Ok(total.map_entries(|e| e.simplify()))
}

/// The curvature array `R[l][i][j][k]`: `l` is contravariant, `i` and `j`
/// are the antisymmetric derivative slots, `k` is the remaining input slot.
pub type RiemannTensor = Vec<Vec<Vec<Vec<ScalarExpr>>>>;

/// Curvature of the connection:
/// `R[l][i][j][k] = d_i Gamma[j][k][l] - d_j Gamma[i][k][l]
///  + Gamma[i][m][l] Gamma[j][k][m] - Gamma[j][n][l] Gamma[i][k][n]`.
pub fn curvature(cs: &CoordSystem) -> Result<RiemannTensor> {
    let ga = christoffel(cs)?;
    let d = cs.dim();
    let x = cs.coords();
    let mut r = vec![vec![vec![vec![ScalarExpr::zero(); d]; d]; d]; d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut terms = vec![
                        ga.entry(j, k, l).diff(&x[i]),
                        ga.entry(i, k, l).diff(&x[j]).neg(),
                    ];
                    for m in 0..d {
                        terms.push(ga.entry(i, m, l).clone() * ga.entry(j, k, m).clone());
                        terms.push((ga.entry(j, m, l).clone() * ga.entry(i, k, m).clone()).neg());
                    }
                    r[l][i][j][k] = ScalarExpr::add(terms).simplify();
                }
            }
        }
    }
    Ok(r)
}

fn ricci_of(r: &RiemannTensor) -> Vec<Vec<ScalarExpr>> {
    let d = r.len();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    ScalarExpr::add((0..d).map(|i| r[i][j][i][k].clone()).collect()).simplify()
                })
                .collect()
        })
        .collect()
}

/// Ricci array: the trace `ricci[j][k] = sum_i R[i][j][i][k]`.
pub fn ricci(cs: &CoordSystem) -> Result<Vec<Vec<ScalarExpr>>> {
    Ok(ricci_of(&curvature(cs)?))
}

fn gaussian_of(cs: &CoordSystem, ric: &[Vec<ScalarExpr>]) -> Result<ScalarExpr> {
    let gp = cometric(cs)?;
    let d = cs.dim();
    let half = ScalarExpr::rat(1, 2);
    let mut terms = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            terms.push(half.clone() * gp[j][k].clone() * ric[j][k].clone());
        }
    }
    Ok(ScalarExpr::add(terms).simplify())
}

/// Half the cometric trace of the Ricci array; on a surface this is the
/// Gaussian curvature of the metric.
pub fn gaussian_curvature(cs: &CoordSystem) -> Result<ScalarExpr> {
    let ric = ricci(cs)?;
    gaussian_of(cs, &ric)
}

/// The combination `ricci[i][j] + gaussian . g[i][j]` whose vanishing
/// characterizes vacuum solutions of the field equations.
pub fn einstein_tensor(cs: &CoordSystem) -> Result<Vec<Vec<ScalarExpr>>> {
    let ric = ricci(cs)?;
    let ga = gaussian_of(cs, &ric)?;
    let g = &cs.metric;
    let d = cs.dim();
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| (ric[i][j].clone() + ga.clone() * g[i][j].clone()).simplify())
                .collect()
        })
        .collect())
}

/// Check the commutator identity for a vector field `u`: the antisymmetrized
/// second covariant derivative of `u` must equal the curvature contracted
/// with `u`, componentwise, as a probabilistic zero test on the domain.
pub fn verify_ricci_identity(
    cs: &CoordSystem,
    u: &[ScalarExpr],
    trials: u32,
    tol: f64,
) -> Result<bool> {
    let d = cs.dim();
    if u.len() != d {
        return Err(Error::TypeMismatch(format!(
            "vector field has {} components, system {} needs {d}",
            u.len(),
            cs.name()
        )));
    }
    let ga = christoffel(cs)?;
    let r = curvature(cs)?;
    let x = cs.coords();
    let mut a = vec![vec![ScalarExpr::zero(); d]; d];
    for j in 0..d {
        for k in 0..d {
            let mut terms = vec![u[k].diff(&x[j])];
            for l in 0..d {
                terms.push(ga.entry(j, l, k).clone() * u[l].clone());
            }
            a[j][k] = ScalarExpr::add(terms).simplify();
        }
    }
    let b = |i: usize, j: usize, k: usize| {
        let mut terms = vec![a[j][k].diff(&x[i])];
        for m in 0..d {
            terms.push((ga.entry(i, j, m).clone() * a[m][k].clone()).neg());
            terms.push(ga.entry(i, m, k).clone() * a[j][m].clone());
        }
        ScalarExpr::add(terms)
    };
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut rhs = Vec::with_capacity(d);
                for l in 0..d {
                    rhs.push(r[k][i][j][l].clone() * u[l].clone());
                }
                let delta = (b(i, j, k) - b(j, i, k) - ScalarExpr::add(rhs)).simplify();
                let seed = CHECK_SEED ^ (((i * d + j) * d + k) as u64);
                if !delta.is_zero(&cs.domain, trials, tol, seed)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The index-lowering matrix `T -> T*` induced by the metric.
pub fn juggle_up_matrix(cs: &CoordSystem) -> Result<MatMorphism> {
    roger::juggle_up(&cs.atom(), &cs.metric_state())
}

/// The index-raising matrix `T* -> T` induced by the cometric.
pub fn juggle_down_matrix(cs: &CoordSystem) -> Result<MatMorphism> {
    roger::juggle_down(&cs.atom(), &cometric_costate(cs)?)
}

/// Move a low network index high through this system's metric.
pub fn raise_index(cs: &CoordSystem, p: &Port) -> Result<(Net, Port)> {
    crate::albert::raise(p, &juggle_up_matrix(cs)?)
}

/// Move a high network index low through this system's cometric.
pub fn lower_index(cs: &CoordSystem, p: &Port) -> Result<(Net, Port)> {
    crate::albert::lower(p, &juggle_down_matrix(cs)?)
}

/// State form of a component array over the given port objects, for use as a
/// network generator: the entry at nested index `(i_1, ..., i_k)` is
/// `f([i_1, ..., i_k])`.
fn state_over(objs: &[Obj], f: impl Fn(&[Ix]) -> ScalarExpr) -> MatMorphism {
    let k = objs.len();
    MatMorphism::from_fn(nest_obj(objs), Obj::Unit, |ix, _| {
        let parts = unnest_ix(ix, k);
        f(&parts)
    })
}

/// The cometric as a generator with two contravariant slots:
/// `(T* (x) T*) -> 1` with entry `g'[i][j]`.
pub fn cometric_generator(cs: &CoordSystem) -> Result<MatMorphism> {
    let gp = cometric(cs)?;
    let td = cs.atom().dual();
    let sp = cs.space().clone();
    Ok(state_over(&[td.clone(), td], move |p| {
        gp[pos_of(&sp, &p[0])][pos_of(&sp, &p[1])].clone()
    }))
}

/// The connection coefficients as a generator `((T (x) T) (x) T*) -> 1`
/// with entry `Gamma[i][j][k]` at `((i, j), k-high)`.
pub fn christoffel_generator(cs: &CoordSystem) -> Result<MatMorphism> {
    let ga = christoffel(cs)?;
    let t = cs.atom();
    let td = t.clone().dual();
    let sp = cs.space().clone();
    Ok(state_over(&[t.clone(), t, td], move |p| {
        ga.entry(pos_of(&sp, &p[0]), pos_of(&sp, &p[1]), pos_of(&sp, &p[2]))
            .clone()
    }))
}

/// The curvature as a generator `(((T* (x) T) (x) T) (x) T) -> 1` with entry
/// `R[l][i][j][k]` at `(l-high, i, j, k)`.
pub fn curvature_generator(cs: &CoordSystem) -> Result<MatMorphism> {
    let r = curvature(cs)?;
    let t = cs.atom();
    let td = t.clone().dual();
    let sp = cs.space().clone();
    Ok(state_over(&[td, t.clone(), t.clone(), t], move |p| {
        r[pos_of(&sp, &p[0])][pos_of(&sp, &p[1])][pos_of(&sp, &p[2])][pos_of(&sp, &p[3])].clone()
    }))
}

/// The Ricci array as a generator `(T (x) T) -> 1`.
pub fn ricci_generator(cs: &CoordSystem) -> Result<MatMorphism> {
    let ric = ricci(cs)?;
    let t = cs.atom();
    let sp = cs.space().clone();
    Ok(state_over(&[t.clone(), t], move |p| {
        ric[pos_of(&sp, &p[0])][pos_of(&sp, &p[1])].clone()
    }))
}

/// Rewrite every connection-respecting derivative box in the network into
/// coordinate-derivative boxes plus affinity correction generators, working
/// from the outermost box inward and distributing the resulting sums
/// outward. The rewritten network has the same free ports and the same
/// value as the original; a box around a closed body needs no correction.
pub fn expand_derivatives(cs: &CoordSystem, n: &Net) -> Result<Net> {
    match n {
        Net::Sum(bs) => Ok(Net::Sum(
            bs.iter()
                .map(|b| expand_derivatives(cs, b))
                .collect::<Result<Vec<_>>>()?,
        )),
        Net::Flat { nodes, edges } => expand_flat(cs, nodes, edges),
    }
}

fn expand_flat(cs: &CoordSystem, nodes: &[NetNode], edges: &[Edge]) -> Result<Net> {
    if let Some(idx) = nodes
        .iter()
        .position(|nd| matches!(nd, NetNode::DBox { kind: BoxKind::Covariant, .. }))
    {
        let NetNode::DBox {
            direction, body, ..
        } = &nodes[idx]
        else {
            unreachable!("position matched a derivative box");
        };
        let mut partial_nodes = nodes.to_vec();
        partial_nodes[idx] = NetNode::DBox {
            kind: BoxKind::Partial,
            direction: direction.clone(),
            body: body.clone(),
        };
        let coordinate_term = expand_flat(cs, &partial_nodes, edges)?;
        let body_free = canonical_order(body)?;
        if body_free.is_empty() {
            return Ok(coordinate_term);
        }
        let (aff_nodes, aff_edges) = affinity_correction(cs, direction, body, &body_free)?;
        let mut rest_nodes = nodes.to_vec();
        rest_nodes.remove(idx);
        rest_nodes.extend(aff_nodes);
        let mut all_edges = edges.to_vec();
        all_edges.extend(aff_edges);
        let correction_term = expand_flat(cs, &rest_nodes, &all_edges)?;
        return Ok(Net::Sum(vec![coordinate_term, correction_term]));
    }
    for (idx, nd) in nodes.iter().enumerate() {
        if let NetNode::DBox {
            kind: BoxKind::Partial,
            direction,
            body,
        } = nd
        {
            let expanded = expand_derivatives(cs, body)?;
            match expanded {
                Net::Sum(bs) => {
                    let mut out = Vec::with_capacity(bs.len());
                    for b in bs {
                        let mut branch_nodes = nodes.to_vec();
                        branch_nodes[idx] = NetNode::DBox {
                            kind: BoxKind::Partial,
                            direction: direction.clone(),
                            body: Box::new(b),
                        };
                        out.push(expand_flat(cs, &branch_nodes, edges)?);
                    }
                    return Ok(Net::Sum(out));
                }
                flat => {
                    if *body.as_ref() != flat {
                        let mut new_nodes = nodes.to_vec();
                        new_nodes[idx] = NetNode::DBox {
                            kind: BoxKind::Partial,
                            direction: direction.clone(),
                            body: Box::new(flat),
                        };
                        return expand_flat(cs, &new_nodes, edges);
                    }
                }
            }
        }
    }
    Ok(Net::Flat {
        nodes: nodes.to_vec(),
        edges: edges.to_vec(),
    })
}

/// Build the correction branch for one derivative box: an affinity generator
/// wired to a renamed copy of the body, scaled by `-1`. The generator keeps
/// the box's direction port and the body's original free ports, so the
/// branch exposes exactly the same signature as the box it replaces.
fn affinity_correction(
    cs: &CoordSystem,
    direction: &Port,
    body: &Net,
    body_free: &[Port],
) -> Result<(Vec<NetNode>, Vec<Edge>)> {
    let objs: Vec<Obj> = body_free.iter().map(|p| p.obj().clone()).collect();
    let aff = affinity(cs, &nest_obj(&objs))?;
    let prim = affinity_state(cs, &aff, &objs);
    let fresh_duals: Vec<Port> = objs
        .iter()
        .map(|o| fresh_port(&o.clone().dual()))
        .collect();
    let renamed: Vec<Port> = objs.iter().map(fresh_port).collect();
    let map: BTreeMap<PortId, Port> = body_free
        .iter()
        .map(|p| p.id())
        .zip(renamed.iter().cloned())
        .collect();
    let renamed_body = rename_ports(body, &map);
    let mut ports = vec![direction.clone()];
    ports.extend(body_free.iter().cloned());
    ports.extend(fresh_duals.iter().cloned());
    let mut nodes = vec![NetNode::Gen {
        name: "affinity".to_string(),
        prim,
        ports,
    }];
    let Net::Flat {
        nodes: neg_nodes, ..
    } = constant("-1", ScalarExpr::int(-1))
    else {
        unreachable!("constants are flat networks");
    };
    nodes.extend(neg_nodes);
    let mut new_edges: Vec<Edge> = fresh_duals
        .iter()
        .zip(&renamed)
        .map(|(hi, lo)| Edge {
            hi: hi.clone(),
            lo: lo.clone(),
        })
        .collect();
    let Net::Flat {
        nodes: body_nodes,
        edges: body_edges,
    } = renamed_body
    else {
        return Err(Error::TypeMismatch(
            "derivative-box bodies must be flat networks".to_string(),
        ));
    };
    nodes.extend(body_nodes);
    new_edges.extend(body_edges);
    Ok((nodes, new_edges))
}

/// Reshape the affinity `(T (x) a) -> a` into a generator state over
/// `[T, b_1, ..., b_k, b_1*, ..., b_k*]`, pairing each output slot with the
/// dual index at the same enumeration position.
fn affinity_state(cs: &CoordSystem, aff: &MatMorphism, objs: &[Obj]) -> MatMorphism {
    let k = objs.len();
    let mut all = vec![cs.atom()];
    all.extend(objs.iter().cloned());
    all.extend(objs.iter().map(|o| o.clone().dual()));
    let mut out = roger::zero_m(&nest_obj(&all), &Obj::Unit);
    for ((din, cout), s) in aff.entries() {
        let Ix::PairIx(v, jn) = din else {
            unreachable!("affinity domain is a pair");
        };
        let mut parts = vec![(**v).clone()];
        parts.extend(unnest_ix(jn, k));
        for (l, o) in unnest_ix(cout, k).iter().zip(objs) {
            parts.push(o.dual_index_of(l));
        }
        out.set(nest_ix(&parts), Ix::UnitIx, s.clone());
    }
    out
}

/// A change of chart: the stored `matrix` transforms covector components
/// (row convention), and `inverse` transforms vector components (column
/// convention); the two are mutually inverse matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub source: CoordSystem,
    pub target: CoordSystem,
    pub matrix: Vec<Vec<ScalarExpr>>,
    pub inverse: Vec<Vec<ScalarExpr>>,
}

/// The change of chart from polar to Cartesian coordinates on the plane,
/// with both matrices in closed form over the polar symbols.
pub fn jacobian_polar_to_cartesian() -> Jacobian {
    let rho = ScalarExpr::var("rho");
    let theta = ScalarExpr::var("theta");
    let matrix = vec![
        vec![theta.clone().cos(), theta.clone().sin()],
        vec![
            rho.clone().recip() * theta.clone().sin(),
            (rho.clone().recip() * theta.clone().cos()).neg(),
        ],
    ];
    let inverse = vec![
        vec![theta.clone().cos(), rho.clone() * theta.clone().sin()],
        vec![theta.clone().sin(), (rho * theta.cos()).neg()],
    ];
    Jacobian {
        source: polar(),
        target: cartesian(),
        matrix,
        inverse,
    }
}

/// Transform covector components into the target chart:
/// `out[i] = sum_j v[j] . matrix[j][i]`.
pub fn transform_covector(j: &Jacobian, v: &[ScalarExpr]) -> Result<Vec<ScalarExpr>> {
    let d = j.source.dim();
    if v.len() != d {
        return Err(Error::TypeMismatch(format!(
            "covector has {} components, system {} needs {d}",
            v.len(),
            j.source.name()
        )));
    }
    Ok((0..d)
        .map(|i| {
            ScalarExpr::add(
                (0..d)
                    .map(|jj| v[jj].clone() * j.matrix[jj][i].clone())
                    .collect(),
            )
            .simplify()
        })
        .collect())
}

/// Component transform for an arbitrary object built from the source chart's
/// tangent atom: the identity on the unit, the vector matrix on the atom,
/// the covector matrix on its dual, and the tensor product on products.
pub fn transform_morphism(jac: &Jacobian, a: &Obj) -> Result<MatMorphism> {
    match a {
        Obj::Unit => Ok(roger::identity(&Obj::Unit)),
        Obj::Atom(sp) => {
            if sp != jac.source.space() {
                return Err(Error::TypeMismatch(format!(
                    "transform from {} applied to space {}",
                    jac.source.name(),
                    sp.name()
                )));
            }
            let sp = sp.clone();
            Ok(MatMorphism::from_fn(a.clone(), a.clone(), |ci, cj| {
                jac.inverse[pos_of(&sp, cj)][pos_of(&sp, ci)].clone()
            }))
        }
        Obj::Dual(inner) => match inner.as_ref() {
            Obj::Atom(sp) => {
                if sp != jac.source.space() {
                    return Err(Error::TypeMismatch(format!(
                        "transform from {} applied to space {}",
                        jac.source.name(),
                        sp.name()
                    )));
                }
                let sp = sp.clone();
                Ok(MatMorphism::from_fn(a.clone(), a.clone(), |di, dj| {
                    jac.matrix[pos_of(&sp, di)][pos_of(&sp, dj)].clone()
                }))
            }
            _ => Err(Error::TypeMismatch(
                "transform of a non-normalized dual object".to_string(),
            )),
        },
        Obj::Prod(x, y) => Ok(roger::tensor(
            &transform_morphism(jac, x)?,
            &transform_morphism(jac, y)?,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::albert::{deriv_box, embed, eval_einsum, multiply, state_form};

    fn assert_sym_zero(e: &ScalarExpr, dom: &Domain) {
        assert!(
            e.is_zero(dom, 64, 1e-9, 0xD1FF).unwrap(),
            "expected zero, got {e}"
        );
    }

    fn assert_sym_eq(e: &ScalarExpr, expected: &ScalarExpr, dom: &Domain) {
        assert_sym_zero(&(e.clone() - expected.clone()).simplify(), dom);
    }

    fn rho() -> ScalarExpr {
        ScalarExpr::var("rho")
    }

    #[test]
    fn polar_christoffel_matches_closed_form() {
        let cs = polar();
        let ga = christoffel(&cs).unwrap();
        let dom = cs.domain();
        let expected = |i: usize, j: usize, k: usize| -> ScalarExpr {
            match (i, j, k) {
                (1, 1, 0) => rho().neg(),
                (0, 1, 1) | (1, 0, 1) => rho().recip(),
                _ => ScalarExpr::zero(),
            }
        };
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_sym_eq(ga.entry(i, j, k), &expected(i, j, k), dom);
                }
            }
        }
        assert!(ga.entry(1, 1, 0).to_string().contains("rho"));
    }

    #[test]
    fn cartesian_christoffel_vanishes() {
        let cs = cartesian();
        let ga = christoffel(&cs).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(ga.entry(i, j, k).is_const_zero());
                }
            }
        }
    }

    #[test]
    fn schwarzschild_christoffel_is_symmetric() {
        let cs = schwarzschild();
        let ga = christoffel(&cs).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let diff =
                        (ga.entry(i, j, k).clone() - ga.entry(j, i, k).clone()).simplify();
                    assert_sym_zero(&diff, cs.domain());
                }
            }
        }
    }

    #[test]
    fn cometric_inverts_both_built_in_metrics() {
        for cs in [polar(), schwarzschild()] {
            let gp = cometric(&cs).unwrap();
            let d = cs.dim();
            for i in 0..d {
                for j in 0..d {
                    let mut terms = Vec::new();
                    for k in 0..d {
                        terms.push(cs.metric()[i][k].clone() * gp[k][j].clone());
                    }
                    let prod = ScalarExpr::add(terms).simplify();
                    let expected = if i == j {
                        ScalarExpr::one()
                    } else {
                        ScalarExpr::zero()
                    };
                    assert_sym_eq(&prod, &expected, cs.domain());
                }
            }
        }
        let gp = cometric(&polar()).unwrap();
        assert_sym_eq(&gp[1][1], &rho().int_pow(-2), polar().domain());
    }

    #[test]
    fn cometric_rejects_singular_metric() {
        let space = SpaceId::new("degenerate", vec!["a", "b"]);
        let one = ScalarExpr::one;
        let metric = vec![vec![one(), one()], vec![one(), one()]];
        let domain = Domain::new().interval("a", 0.1, 1.0).interval("b", 0.1, 1.0);
        let cs = CoordSystem::new(space, metric, domain).unwrap();
        let err = cometric(&cs).unwrap_err();
        assert!(matches!(err, Error::SingularMetric(_)), "got {err}");
    }

    #[test]
    fn coord_system_rejects_asymmetric_metric() {
        let space = SpaceId::new("skew", vec!["a", "b"]);
        let metric = vec![
            vec![ScalarExpr::one(), ScalarExpr::var("a")],
            vec![ScalarExpr::zero(), ScalarExpr::one()],
        ];
        let domain = Domain::new().interval("a", 0.1, 1.0).interval("b", 0.1, 1.0);
        let err = CoordSystem::new(space, metric, domain).unwrap_err();
        assert!(matches!(err, Error::TypeMismatch(_)), "got {err}");
    }

    #[test]
    fn affinity_on_atom_matches_christoffel() {
        let cs = polar();
        let t = cs.atom();
        let aff = affinity(&cs, &t).unwrap();
        let ga = christoffel(&cs).unwrap();
        let coords = cs.coords();
        for (v, vn) in coords.iter().enumerate() {
            for (i, inn) in coords.iter().enumerate() {
                for (k, kn) in coords.iter().enumerate() {
                    let got = aff.entry(
                        &Ix::pair(Ix::AtomIx(vn.clone()), Ix::AtomIx(inn.clone())),
                        &Ix::AtomIx(kn.clone()),
                    );
                    assert_sym_eq(&got, ga.entry(v, i, k), cs.domain());
                }
            }
        }
    }

    #[test]
    fn affinity_on_dual_is_negated_transpose() {
        let cs = polar();
        let t = cs.atom();
        let td = t.clone().dual();
        let aff_t = affinity(&cs, &t).unwrap();
        let aff_d = affinity(&cs, &td).unwrap();
        for v in t.enumerate_indices() {
            for j in t.enumerate_indices() {
                for k in t.enumerate_indices() {
                    let got = aff_d.entry(
                        &Ix::pair(v.clone(), j.clone().dual()),
                        &k.clone().dual(),
                    );
                    let base = aff_t.entry(&Ix::pair(v.clone(), k.clone()), &j);
                    assert_sym_eq(&got, &base.neg(), cs.domain());
                }
            }
        }
    }

    #[test]
    fn affinity_on_product_acts_factor_by_factor() {
        let cs = polar();
        let t = cs.atom();
        let tt = Obj::prod(t.clone(), t.clone());
        let aff_p = affinity(&cs, &tt).unwrap();
        let aff_t = affinity(&cs, &t).unwrap();
        for v in t.enumerate_indices() {
            for j in t.enumerate_indices() {
                for k in t.enumerate_indices() {
                    for l in t.enumerate_indices() {
                        for m in t.enumerate_indices() {
                            let got = aff_p.entry(
                                &Ix::pair(v.clone(), Ix::pair(j.clone(), k.clone())),
                                &Ix::pair(l.clone(), m.clone()),
                            );
                            let mut expect = Vec::new();
                            if k == m {
                                expect.push(
                                    aff_t.entry(&Ix::pair(v.clone(), j.clone()), &l),
                                );
                            }
                            if j == l {
                                expect.push(
                                    aff_t.entry(&Ix::pair(v.clone(), k.clone()), &m),
                                );
                            }
                            assert_sym_eq(&got, &ScalarExpr::add(expect), cs.domain());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn affinity_on_unit_vanishes() {
        let cs = polar();
        let aff = affinity(&cs, &Obj::Unit).unwrap();
        assert_eq!(aff.entries().count(), 0);
    }

    fn potential() -> MatMorphism {
        MatMorphism::from_fn(Obj::Unit, Obj::Unit, |_, _| {
            ScalarExpr::var("rho").log().neg()
        })
    }

    #[test]
    fn gradient_of_log_potential() {
        let cs = polar();
        let grad = covariant_derivative(&cs, &potential()).unwrap();
        let dom = cs.domain();
        let at = |c: &str| {
            grad.entry(
                &Ix::pair(Ix::AtomIx(c.to_string()), Ix::UnitIx),
                &Ix::UnitIx,
            )
        };
        assert_sym_eq(&at("rho"), &rho().recip().neg(), dom);
        assert!(at("theta").is_const_zero());
    }

    #[test]
    fn hessian_of_log_potential() {
        let cs = polar();
        let grad = covariant_derivative(&cs, &potential()).unwrap();
        let hess = covariant_derivative(&cs, &grad).unwrap();
        let dom = cs.domain();
        let at = |v: &str, w: &str| {
            hess.entry(
                &Ix::pair(
                    Ix::AtomIx(v.to_string()),
                    Ix::pair(Ix::AtomIx(w.to_string()), Ix::UnitIx),
                ),
                &Ix::UnitIx,
            )
        };
        assert_sym_eq(&at("rho", "rho"), &rho().int_pow(-2), dom);
        assert_sym_eq(&at("theta", "theta"), &ScalarExpr::int(-1), dom);
        assert_sym_zero(&at("rho", "theta"), dom);
        assert_sym_zero(&at("theta", "rho"), dom);
    }

    #[test]
    fn divergence_of_gradient_vanishes() {
        let cs = polar();
        let grad = covariant_derivative(&cs, &potential()).unwrap();
        let hess = covariant_derivative(&cs, &grad).unwrap();
        let gp = cometric(&cs).unwrap();
        let coords = cs.coords();
        let mut terms = Vec::new();
        for (i, inn) in coords.iter().enumerate() {
            for (j, jn) in coords.iter().enumerate() {
                let h = hess.entry(
                    &Ix::pair(
                        Ix::AtomIx(inn.clone()),
                        Ix::pair(Ix::AtomIx(jn.clone()), Ix::UnitIx),
                    ),
                    &Ix::UnitIx,
                );
                terms.push(gp[i][j].clone() * h);
            }
        }
        assert_sym_zero(&ScalarExpr::add(terms).simplify(), cs.domain());
    }

    #[test]
    fn metric_is_covariantly_constant() {
        for cs in [polar(), schwarzschild()] {
            let nabla_g = covariant_derivative(&cs, &cs.metric_state()).unwrap();
            for ((_, _), e) in nabla_g.entries() {
                assert_sym_zero(e, cs.domain());
            }
            let nabla_gp = covariant_derivative(&cs, &cometric_costate(&cs).unwrap()).unwrap();
            for ((_, _), e) in nabla_gp.entries() {
                assert_sym_zero(e, cs.domain());
            }
        }
    }

    fn random_matrix(seed: u64) -> MatMorphism {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = polar().atom();
        MatMorphism::from_fn(t.clone(), t.clone(), |_, _| {
            let c0 = ScalarExpr::int(rng.random_range(-3..=3));
            let c1 = ScalarExpr::int(rng.random_range(-3..=3));
            let c2 = ScalarExpr::int(rng.random_range(-3..=3));
            c0 + c1 * ScalarExpr::var("rho") + c2 * ScalarExpr::var("theta").sin()
        })
    }

    #[test]
    fn covariant_derivative_satisfies_composition_product_rule() {
        let cs = polar();
        let t = random_matrix(11);
        let u = random_matrix(12);
        let lhs = covariant_derivative(&cs, &roger::compose(&t, &u).unwrap()).unwrap();
        let term1 = roger::compose(&t, &covariant_derivative(&cs, &u).unwrap()).unwrap();
        let id_t = roger::identity(&cs.atom());
        let term2 = roger::compose(
            &covariant_derivative(&cs, &t).unwrap(),
            &roger::tensor(&id_t, &u),
        )
        .unwrap();
        let rhs = roger::add(&term1, &term2).unwrap();
        assert!(roger::equal_num(&lhs, &rhs, cs.domain(), 48, 1e-8, 77).unwrap());
    }

    #[test]
    fn covariant_derivative_satisfies_tensor_product_rule() {
        let cs = polar();
        let tan = cs.atom();
        let t = random_matrix(21);
        let u = random_matrix(22);
        let lhs = covariant_derivative(&cs, &roger::tensor(&t, &u)).unwrap();
        let term1 = roger::compose(
            &roger::tensor(&covariant_derivative(&cs, &t).unwrap(), &u),
            &roger::alpha_inv(&tan, t.dom(), u.dom()),
        )
        .unwrap();
        let swap_in = roger::tensor(&roger::sigma(&tan, t.dom()), &roger::identity(u.dom()));
        let term2 = roger::compose(
            &roger::tensor(&t, &covariant_derivative(&cs, &u).unwrap()),
            &roger::compose(
                &roger::alpha(t.dom(), &tan, u.dom()),
                &roger::compose(&swap_in, &roger::alpha_inv(&tan, t.dom(), u.dom())).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        let rhs = roger::add(&term1, &term2).unwrap();
        assert!(roger::equal_num(&lhs, &rhs, cs.domain(), 48, 1e-8, 78).unwrap());
    }

    #[test]
    fn polar_curvature_is_flat() {
        let cs = polar();
        let r = curvature(&cs).unwrap();
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        assert_sym_zero(&r[l][i][j][k], cs.domain());
                    }
                }
            }
        }
    }

    #[test]
    fn schwarzschild_curvature_is_antisymmetric_and_nonzero() {
        let cs = schwarzschild();
        let r = curvature(&cs).unwrap();
        for l in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        let sum = (r[l][i][j][k].clone() + r[l][j][i][k].clone()).simplify();
                        assert_sym_zero(&sum, cs.domain());
                    }
                }
            }
        }
        let witness = &r[1][0][1][0];
        assert!(!witness.is_zero(cs.domain(), 16, 1e-9, 5).unwrap());
    }

    #[test]
    fn schwarzschild_satisfies_vacuum_field_equations() {
        let cs = schwarzschild();
        let lhs = einstein_tensor(&cs).unwrap();
        for row in &lhs {
            for e in row {
                assert!(
                    e.is_zero(cs.domain(), 48, 1e-8, 0xE1).unwrap(),
                    "vacuum equations fail: {e}"
                );
            }
        }
    }

    #[test]
    fn ricci_identity_holds_for_sample_fields() {
        let cs = polar();
        let u = vec![rho(), ScalarExpr::var("theta").sin()];
        assert!(verify_ricci_identity(&cs, &u, 32, 1e-7).unwrap());
        let zero_field = vec![ScalarExpr::zero(), ScalarExpr::zero()];
        assert!(verify_ricci_identity(&cs, &zero_field, 8, 1e-7).unwrap());
        let sch = schwarzschild();
        let u4 = vec![
            ScalarExpr::zero(),
            ScalarExpr::var("rho"),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
        ];
        assert!(verify_ricci_identity(&sch, &u4, 24, 1e-7).unwrap());
    }

    #[test]
    fn juggling_through_metric_round_trips() {
        let cs = polar();
        let up = juggle_up_matrix(&cs).unwrap();
        let down = juggle_down_matrix(&cs).unwrap();
        let round = roger::compose(&down, &up).unwrap();
        let id = roger::identity(&cs.atom());
        assert!(roger::equal_num(&round, &id, cs.domain(), 32, 1e-9, 9).unwrap());
    }

    #[test]
    fn expansion_of_closed_body_is_a_coordinate_box() {
        let cs = polar();
        let d = fresh_port(&cs.atom());
        let p_node = constant("P", ScalarExpr::var("rho").log().neg());
        let boxed = deriv_box(&d, p_node).unwrap();
        let expanded = expand_derivatives(&cs, &boxed).unwrap();
        let Net::Flat { ref nodes, .. } = expanded else {
            panic!("closed body must not produce a sum");
        };
        assert!(matches!(
            nodes[0],
            NetNode::DBox {
                kind: BoxKind::Partial,
                ..
            }
        ));
        let value = eval_einsum(&expanded, &[d]).unwrap();
        let got = value.entry(&Ix::AtomIx("rho".to_string()), &Ix::UnitIx);
        assert_sym_eq(&got, &rho().recip().neg(), cs.domain());
    }

    fn vector_state(cs: &CoordSystem) -> MatMorphism {
        MatMorphism::from_fn(cs.atom(), Obj::Unit, |i, _| match i.atom_name().unwrap() {
            "rho" => ScalarExpr::var("rho"),
            _ => ScalarExpr::var("theta").sin(),
        })
    }

    #[test]
    fn expansion_of_open_body_matches_covariant_derivative() {
        let cs = polar();
        let u = vector_state(&cs);
        let q = fresh_port(&cs.atom());
        let body = embed("u", &u, &[q.clone()]).unwrap();
        let d = fresh_port(&cs.atom());
        let boxed = deriv_box(&d, body).unwrap();
        let expanded = expand_derivatives(&cs, &boxed).unwrap();
        let Net::Sum(ref branches) = expanded else {
            panic!("open body must expand to a sum");
        };
        assert_eq!(branches.len(), 2);
        let value = eval_einsum(&expanded, &[d, q]).unwrap();
        let by_formula = covariant_derivative(&cs, &u).unwrap();
        for (ix, _) in value
            .dom()
            .enumerate_indices()
            .iter()
            .zip(std::iter::repeat(()))
        {
            let diff =
                (value.entry(ix, &Ix::UnitIx) - by_formula.entry(ix, &Ix::UnitIx)).simplify();
            assert_sym_zero(&diff, cs.domain());
        }
    }

    #[test]
    fn expansion_of_two_port_body_matches_reassociated_derivative() {
        let cs = polar();
        let g = cs.metric_state();
        let q1 = fresh_port(&cs.atom());
        let q2 = fresh_port(&cs.atom());
        let body = embed("g", &g, &[q1.clone(), q2.clone()]).unwrap();
        let d = fresh_port(&cs.atom());
        let boxed = deriv_box(&d, body).unwrap();
        let expanded = expand_derivatives(&cs, &boxed).unwrap();
        let value = eval_einsum(&expanded, &[d.clone(), q1, q2]).unwrap();
        let by_formula = covariant_derivative(&cs, &g).unwrap();
        let t = cs.atom();
        for v in t.enumerate_indices() {
            for i in t.enumerate_indices() {
                for j in t.enumerate_indices() {
                    let net_ix = nest_ix(&[v.clone(), i.clone(), j.clone()]);
                    let formula_ix = Ix::pair(v.clone(), Ix::pair(i.clone(), j.clone()));
                    let diff = (value.entry(&net_ix, &Ix::UnitIx)
                        - by_formula.entry(&formula_ix, &Ix::UnitIx))
                    .simplify();
                    assert_sym_zero(&diff, cs.domain());
                }
            }
        }
    }

    #[test]
    fn nested_expansion_reproduces_hessian() {
        let cs = polar();
        let p_node = constant("P", ScalarExpr::var("rho").log().neg());
        let v = fresh_port(&cs.atom());
        let inner = deriv_box(&v, p_node).unwrap();
        let w = fresh_port(&cs.atom());
        let outer = deriv_box(&w, inner).unwrap();
        let expanded = expand_derivatives(&cs, &outer).unwrap();
        fn has_covariant(n: &Net) -> bool {
            match n {
                Net::Sum(bs) => bs.iter().any(has_covariant),
                Net::Flat { nodes, .. } => nodes.iter().any(|nd| match nd {
                    NetNode::DBox { kind, body, .. } => {
                        *kind == BoxKind::Covariant || has_covariant(body)
                    }
                    NetNode::Gen { .. } => false,
                }),
            }
        }
        assert!(!has_covariant(&expanded));
        let value = eval_einsum(&expanded, &[w, v]).unwrap();
        let grad = covariant_derivative(&cs, &potential()).unwrap();
        let hess = covariant_derivative(&cs, &grad).unwrap();
        let t = cs.atom();
        for wv in t.enumerate_indices() {
            for vv in t.enumerate_indices() {
                let got = value.entry(&Ix::pair(wv.clone(), vv.clone()), &Ix::UnitIx);
                let expect = hess.entry(
                    &Ix::pair(wv.clone(), Ix::pair(vv.clone(), Ix::UnitIx)),
                    &Ix::UnitIx,
                );
                assert_sym_eq(&got, &expect, cs.domain());
            }
        }
    }

    #[test]
    fn expansion_preserves_values_inside_larger_nets() {
        let cs = polar();
        let u = vector_state(&cs);
        let q = fresh_port(&cs.atom());
        let body = embed("u", &u, &[q.clone()]).unwrap();
        let d = fresh_port(&cs.atom());
        let boxed = deriv_box(&d, body).unwrap();
        let scaled = multiply(boxed, constant("2", ScalarExpr::int(2))).unwrap();
        let expanded = expand_derivatives(&cs, &scaled).unwrap();
        let value = eval_einsum(&expanded, &[d, q]).unwrap();
        let by_formula = covariant_derivative(&cs, &u).unwrap();
        for ix in value.dom().enumerate_indices() {
            let expect =
                (ScalarExpr::int(2) * by_formula.entry(&ix, &Ix::UnitIx)).simplify();
            assert_sym_eq(&value.entry(&ix, &Ix::UnitIx), &expect, cs.domain());
        }
    }

    #[test]
    fn covector_transform_matches_worked_gradient() {
        let jac = jacobian_polar_to_cartesian();
        let v = vec![rho().recip().neg(), ScalarExpr::zero()];
        let out = transform_covector(&jac, &v).unwrap();
        let theta = ScalarExpr::var("theta");
        let dom = jac.source.domain().clone();
        assert_sym_eq(
            &out[0],
            &(rho().recip() * theta.clone().cos()).neg(),
            &dom,
        );
        assert_sym_eq(&out[1], &(rho().recip() * theta.sin()).neg(), &dom);
    }

    #[test]
    fn jacobian_matrices_are_mutually_inverse() {
        let jac = jacobian_polar_to_cartesian();
        let dom = jac.source.domain();
        for i in 0..2 {
            for j in 0..2 {
                let mut terms = Vec::new();
                for k in 0..2 {
                    terms.push(jac.matrix[i][k].clone() * jac.inverse[k][j].clone());
                }
                let expected = if i == j {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                };
                assert_sym_eq(&ScalarExpr::add(terms).simplify(), &expected, dom);
            }
        }
    }

    #[test]
    fn identity_jacobian_fixes_components() {
        let cs = polar();
        let eye = |d: usize| -> Vec<Vec<ScalarExpr>> {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            if i == j {
                                ScalarExpr::one()
                            } else {
                                ScalarExpr::zero()
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let jac = Jacobian {
            source: cs.clone(),
            target: cs,
            matrix: eye(2),
            inverse: eye(2),
        };
        let v = vec![rho().recip().neg(), ScalarExpr::var("theta")];
        let out = transform_covector(&jac, &v).unwrap();
        for (got, expect) in out.iter().zip(&v) {
            assert_sym_eq(got, expect, jac.source.domain());
        }
    }

    #[test]
    fn composite_transform_factors_through_products_and_duals() {
        let jac = jacobian_polar_to_cartesian();
        let t = jac.source.atom();
        let td = t.clone().dual();
        let dom = jac.source.domain().clone();
        let vec_m = transform_morphism(&jac, &t).unwrap();
        let cov_m = transform_morphism(&jac, &td).unwrap();
        let paired = roger::tensor(&vec_m, &cov_m);
        let composite = transform_morphism(&jac, &Obj::prod(t.clone(), td)).unwrap();
        assert!(roger::equal_num(&paired, &composite, &dom, 32, 1e-9, 31).unwrap());
        let w = vec![ScalarExpr::var("theta"), rho()];
        let u = vec![rho().int_pow(2), ScalarExpr::var("theta").cos()];
        let w_new = transform_covector(&jac, &w).unwrap();
        let u_new: Vec<ScalarExpr> = (0..2)
            .map(|r| {
                ScalarExpr::add(
                    (0..2)
                        .map(|c| jac.inverse[r][c].clone() * u[c].clone())
                        .collect(),
                )
                .simplify()
            })
            .collect();
        let before = ScalarExpr::add(vec![
            w[0].clone() * u[0].clone(),
            w[1].clone() * u[1].clone(),
        ]);
        let after = ScalarExpr::add(vec![
            w_new[0].clone() * u_new[0].clone(),
            w_new[1].clone() * u_new[1].clone(),
        ]);
        assert_sym_zero(&(after - before).simplify(), &dom);
    }

    #[test]
    fn generator_states_expose_component_arrays() {
        let cs = polar();
        let t = cs.atom();
        let gp = cometric(&cs).unwrap();
        let cg = cometric_generator(&cs).unwrap();
        for (i, ixa) in t.enumerate_indices().iter().enumerate() {
            for (j, ixb) in t.enumerate_indices().iter().enumerate() {
                let got = cg.entry(
                    &Ix::pair(ixa.clone().dual(), ixb.clone().dual()),
                    &Ix::UnitIx,
                );
                assert_sym_eq(&got, &gp[i][j], cs.domain());
            }
        }
        let chr = christoffel(&cs).unwrap();
        let cgen = christoffel_generator(&cs).unwrap();
        let coords = cs.coords();
        for (i, inn) in coords.iter().enumerate() {
            for (j, jn) in coords.iter().enumerate() {
                for (k, kn) in coords.iter().enumerate() {
                    let got = cgen.entry(
                        &nest_ix(&[
                            Ix::AtomIx(inn.clone()),
                            Ix::AtomIx(jn.clone()),
                            Ix::AtomIx(kn.clone()).dual(),
                        ]),
                        &Ix::UnitIx,
                    );
                    assert_sym_eq(&got, chr.entry(i, j, k), cs.domain());
                }
            }
        }
        let state = state_form(&roger::identity(&t));
        assert_eq!(state.cod(), &Obj::Unit);
    }
}
