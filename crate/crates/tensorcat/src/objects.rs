//! Object grammar of the tensor category and basis-index enumeration.
//!
//! Objects are generated by the unit, one atomic space per coordinate system,
//! duals, and binary tensor products. Every object knows how to enumerate its
//! basis indices in a deterministic order; that enumeration is what the matrix
//! backend sums over.

use std::fmt;
use std::sync::Arc;

use crate::scalar::VarName;

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct SpaceData {
    name: String,
    coords: Vec<VarName>,
}

/// The atomic local space of a coordinate system: its name and the ordered
/// coordinate names that label its basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpaceId(Arc<SpaceData>);

impl SpaceId {
    pub fn new(name: &str, coords: Vec<&str>) -> Self {
        assert!(!coords.is_empty(), "atomic space needs at least one coordinate");
        SpaceId(Arc::new(SpaceData {
            name: name.to_string(),
            coords: coords.into_iter().map(str::to_string).collect(),
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    /// Coordinate names in declaration order.
    pub fn coords(&self) -> &[VarName] {
        &self.0.coords
    }

    /// Position of a coordinate name within the declaration order.
    pub fn position(&self, coord: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == coord)
    }
}

/// An object of the tensor category: `1`, `T`, `a*`, or `a⊗b`.
///
/// Duals are kept normalized: `a** = a`, `1* = 1`, `(a⊗b)* = a*⊗b*`. Use
/// [`Obj::dual`] and [`Obj::prod`] rather than building variants directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Obj {
    Unit,
    Atom(SpaceId),
    Dual(Box<Obj>),
    Prod(Box<Obj>, Box<Obj>),
}

impl Obj {
    pub fn atom(space: &SpaceId) -> Self {
        Obj::Atom(space.clone())
    }

    pub fn prod(a: Obj, b: Obj) -> Self {
        Obj::Prod(Box::new(a), Box::new(b))
    }

    /// Normalized dual: involutive, transparent on the unit, and distributed
    /// over products so only atoms ever sit under a `Dual`.
    pub fn dual(self) -> Self {
        match self {
            Obj::Unit => Obj::Unit,
            Obj::Dual(inner) => *inner,
            Obj::Prod(a, b) => Obj::prod(a.dual(), b.dual()),
            atom @ Obj::Atom(_) => Obj::Dual(Box::new(atom)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Obj::Unit => 1,
            Obj::Atom(s) => s.dim(),
            Obj::Dual(a) => a.dim(),
            Obj::Prod(a, b) => a.dim() * b.dim(),
        }
    }

    /// All basis indices in deterministic order: coordinate declaration order
    /// for atoms, left-major pair order for products.
    pub fn enumerate_indices(&self) -> Vec<Ix> {
        match self {
            Obj::Unit => vec![Ix::UnitIx],
            Obj::Atom(s) => s.coords().iter().map(|c| Ix::AtomIx(c.clone())).collect(),
            Obj::Dual(a) => a
                .enumerate_indices()
                .into_iter()
                .map(|i| Ix::DualIx(Box::new(i)))
                .collect(),
            Obj::Prod(a, b) => {
                let bs = b.enumerate_indices();
                let mut out = Vec::with_capacity(self.dim());
                for ia in a.enumerate_indices() {
                    for ib in &bs {
                        out.push(Ix::PairIx(Box::new(ia.clone()), Box::new(ib.clone())));
                    }
                }
                out
            }
        }
    }

    /// ASCII rendering: `(a x b)` instead of `(a⊗b)`, `*` for duals.
    pub fn ascii(&self) -> String {
        match self {
            Obj::Unit => "1".to_string(),
            Obj::Atom(_) => "T".to_string(),
            Obj::Dual(a) => format!("{}*", a.ascii()),
            Obj::Prod(a, b) => format!("({} x {})", a.ascii(), b.ascii()),
        }
    }

    /// The index of the dual object sitting at the same enumeration position
    /// as `ix` does in this object.
    pub fn dual_index_of(&self, ix: &Ix) -> Ix {
        let pos = self
            .enumerate_indices()
            .iter()
            .position(|i| i == ix)
            .expect("index must belong to this object");
        self.clone().dual().enumerate_indices()[pos].clone()
    }
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obj::Unit => write!(f, "1"),
            Obj::Atom(_) => write!(f, "T"),
            Obj::Dual(a) => write!(f, "{a}*"),
            Obj::Prod(a, b) => write!(f, "({a}⊗{b})"),
        }
    }
}

/// A basis index, shaped like its object: unit index, coordinate name,
/// dual-wrapped index, or pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ix {
    UnitIx,
    AtomIx(VarName),
    DualIx(Box<Ix>),
    PairIx(Box<Ix>, Box<Ix>),
}

impl Ix {
    pub fn pair(a: Ix, b: Ix) -> Self {
        Ix::PairIx(Box::new(a), Box::new(b))
    }

    pub fn dual(self) -> Self {
        Ix::DualIx(Box::new(self))
    }

    /// Strip one `Dual` wrapper; identity shape change for pairing logic.
    pub fn undual(&self) -> Option<&Ix> {
        match self {
            Ix::DualIx(i) => Some(i),
            _ => None,
        }
    }

    /// The coordinate name, if this is an atomic index (possibly dualized).
    pub fn atom_name(&self) -> Option<&str> {
        match self {
            Ix::AtomIx(n) => Some(n),
            Ix::DualIx(i) => i.atom_name(),
            _ => None,
        }
    }
}

impl fmt::Display for Ix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ix::UnitIx => write!(f, "()"),
            Ix::AtomIx(n) => write!(f, "{n}"),
            Ix::DualIx(i) => write!(f, "{i}*"),
            Ix::PairIx(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar() -> SpaceId {
        SpaceId::new("polar", vec!["rho", "theta"])
    }

    fn spherical() -> SpaceId {
        SpaceId::new("spherical", vec!["t", "rho", "theta", "phi"])
    }

    #[test]
    fn dims() {
        assert_eq!(Obj::Unit.dim(), 1);
        assert_eq!(Obj::atom(&polar()).dim(), 2);
        let o = Obj::prod(Obj::atom(&spherical()), Obj::atom(&spherical()).dual());
        assert_eq!(o.dim(), 16);
    }

    #[test]
    fn enumerate_polar_pairs() {
        let t = Obj::atom(&polar());
        let names: Vec<String> = t.enumerate_indices().iter().map(|i| i.to_string()).collect();
        assert_eq!(names, vec!["rho", "theta"]);
        let tt = Obj::prod(t.clone(), t);
        let pairs: Vec<String> = tt.enumerate_indices().iter().map(|i| i.to_string()).collect();
        assert_eq!(
            pairs,
            vec!["(rho,rho)", "(rho,theta)", "(theta,rho)", "(theta,theta)"]
        );
    }

    #[test]
    fn unit_enumeration() {
        assert_eq!(Obj::Unit.enumerate_indices(), vec![Ix::UnitIx]);
    }

    #[test]
    fn dual_normalization() {
        let t = Obj::atom(&polar());
        assert_eq!(t.clone().dual().dual(), t);
        assert_eq!(Obj::Unit.dual(), Obj::Unit);
        let ab = Obj::prod(t.clone(), Obj::Unit);
        assert_eq!(ab.dual(), Obj::prod(t.clone().dual(), Obj::Unit));
        let deep = Obj::prod(t.clone(), t.clone().dual()).dual();
        assert_eq!(deep, Obj::prod(t.clone().dual(), t));
    }

    #[test]
    fn enumeration_length_matches_dim() {
        // Every object shape up to depth 4 over the 2D and 4D atoms.
        fn depth(o: &Obj) -> usize {
            match o {
                Obj::Unit | Obj::Atom(_) => 1,
                Obj::Dual(a) => 1 + depth(a),
                Obj::Prod(a, b) => 1 + depth(a).max(depth(b)),
            }
        }
        let mut layer = vec![Obj::Unit, Obj::atom(&polar()), Obj::atom(&spherical())];
        for _ in 0..3 {
            let mut next = layer.clone();
            for o in &layer {
                next.push(o.clone().dual());
            }
            for a in &layer {
                for b in &layer {
                    let p = Obj::prod(a.clone(), b.clone());
                    if depth(&p) <= 4 && p.dim() <= 256 {
                        next.push(p);
                    }
                }
            }
            next.sort();
            next.dedup();
            next.truncate(400);
            layer = next;
        }
        assert!(layer.len() > 100);
        for o in &layer {
            assert_eq!(o.enumerate_indices().len(), o.dim(), "object {o}");
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let o = Obj::prod(
            Obj::atom(&polar()).dual(),
            Obj::prod(Obj::atom(&polar()), Obj::Unit),
        );
        assert_eq!(o.enumerate_indices(), o.enumerate_indices());
    }

    #[test]
    fn display_syntax() {
        let t = Obj::atom(&polar());
        let o = Obj::prod(t.clone(), t.clone().dual());
        assert_eq!(o.to_string(), "(T⊗T*)");
        assert_eq!(o.ascii(), "(T x T*)");
        assert_eq!(Obj::Unit.to_string(), "1");
    }
}
