use std::fmt;
use std::str::FromStr;

use super::{EmbeddedTarget, Equivariance, MapKind, SmoothMap};
use crate::deformations::DilationMap;
use crate::geometry::{SpherePoint, StereographicChart};
use crate::{Error, Matrix, Result, Vector};

/// Catalog identifiers, as accepted on the command line.
///
/// String forms: `identity`, `constant`, `inclusion:K`, `retraction`,
/// `dilation:T`, `polar_warp[:P]`, `graph:R` (graph of the identity of `S²`)
/// and `graph:R:<inner id>`.
#[derive(Debug, Clone, PartialEq)]
pub enum MapId {
    Identity,
    Constant,
    /// Totally geodesic `S^k ⊂ S^n`.
    Inclusion { k: usize },
    Retraction,
    Dilation { t: f64 },
    PolarWarp { exponent: f64 },
    Graph { r: f64, inner: Box<MapId> },
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapId::Identity => write!(f, "identity"),
            MapId::Constant => write!(f, "constant"),
            MapId::Inclusion { k } => write!(f, "inclusion:{k}"),
            MapId::Retraction => write!(f, "retraction"),
            MapId::Dilation { t } => write!(f, "dilation:{t}"),
            MapId::PolarWarp { exponent } => write!(f, "polar_warp:{exponent}"),
            MapId::Graph { r, inner } if **inner == MapId::Identity => write!(f, "graph:{r}"),
            MapId::Graph { r, inner } => write!(f, "graph:{r}:{inner}"),
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::arg(format!("invalid {what} `{s}`")))
}

impl FromStr for MapId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match (head, rest) {
            ("identity", None) => Ok(MapId::Identity),
            ("constant", None) => Ok(MapId::Constant),
            ("inclusion", Some(k)) => Ok(MapId::Inclusion { k: parse_num(k, "inclusion dimension")? }),
            ("retraction", None) => Ok(MapId::Retraction),
            ("dilation", Some(t)) => Ok(MapId::Dilation { t: parse_num(t, "dilation factor")? }),
            ("polar_warp", None) => Ok(MapId::PolarWarp { exponent: 2.0 }),
            ("polar_warp", Some(p)) => Ok(MapId::PolarWarp { exponent: parse_num(p, "exponent")? }),
            ("graph", Some(rest)) => {
                let (r, inner) = match rest.split_once(':') {
                    Some((r, inner)) => (r, inner.parse()?),
                    None => (rest, MapId::Identity),
                };
                Ok(MapId::Graph { r: parse_num(r, "graph scale")?, inner: Box::new(inner) })
            }
            _ => Err(Error::arg(format!("unknown map `{s}`"))),
        }
    }
}

/// Builds a catalog map. `n` is the domain dimension, except for
/// `inclusion:k` where it is the target dimension.
pub fn catalog(id: &MapId, n: usize) -> Result<SmoothMap> {
    match id {
        MapId::Identity => identity(n),
        MapId::Constant => constant(n),
        MapId::Inclusion { k } => inclusion(*k, n),
        MapId::Retraction => retraction_to_hyperplane(n),
        MapId::Dilation { t } => dilation(n, *t),
        MapId::PolarWarp { exponent } => polar_warp(n, *exponent),
        MapId::Graph { r, inner } => graph(&catalog(inner, n)?, *r),
    }
}

fn require_dim(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::arg(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

/// The identity of `S^n`, descending to the identity of `RP^n`.
pub fn identity(n: usize) -> Result<SmoothMap> {
    require_dim(n, 1, "identity")?;
    Ok(SmoothMap::build(
        n,
        EmbeddedTarget::sphere(n),
        Equivariance::Antipodal,
        MapKind::Identity,
        format!("identity({n})"),
    ))
}

/// Constant map onto `e_0 ∈ S^n`.
pub fn constant(n: usize) -> Result<SmoothMap> {
    require_dim(n, 1, "constant")?;
    Ok(constant_value(n, EmbeddedTarget::sphere(n), SpherePoint::basis(n, 0).into_coords()))
}

pub(crate) fn constant_value(n: usize, target: EmbeddedTarget, value: Vector) -> SmoothMap {
    SmoothMap::build(n, target, Equivariance::Invariant, MapKind::Constant(value), format!("constant({n})"))
}

/// Totally geodesic inclusion `S^k ⊂ S^n` onto the first `k+1` coordinates.
pub fn inclusion(k: usize, n: usize) -> Result<SmoothMap> {
    if k < 1 || k > n {
        return Err(Error::arg(format!("inclusion needs 1 <= k <= n, got k={k}, n={n}")));
    }
    let a = Matrix::identity(n + 1, k + 1);
    Ok(SmoothMap::linear(a)?.renamed(format!("inclusion({k},{n})")))
}

/// Nearest-point retraction of `S^n ∖ {±e_0}` onto the equator `e_0^⊥`,
/// expressed as a map into `S^{n-1}`.
pub fn retraction_to_hyperplane(n: usize) -> Result<SmoothMap> {
    require_dim(n, 2, "retraction")?;
    let pole = SpherePoint::basis(n, 0);
    let basis = StereographicChart::new(&pole).basis().clone();
    Ok(SmoothMap::build(
        n,
        EmbeddedTarget::sphere(n - 1),
        Equivariance::Antipodal,
        MapKind::Retract { pole, basis: Some(basis) },
        format!("retraction({n})"),
    ))
}

/// The same retraction with values left in `S^n`.
pub(crate) fn retraction_in_sphere(pole: &SpherePoint) -> SmoothMap {
    let n = pole.dim();
    SmoothMap::build(
        n,
        EmbeddedTarget::sphere(n),
        Equivariance::Antipodal,
        MapKind::Retract { pole: pole.clone(), basis: None },
        format!("retraction_in_sphere({n})"),
    )
}

/// Conformal dilation `θ_t` of `S^n` fixing `e_0`.
pub fn dilation(n: usize, t: f64) -> Result<SmoothMap> {
    require_dim(n, 1, "dilation")?;
    Ok(dilation_map(DilationMap::new(t, &SpherePoint::basis(n, 0))?))
}

pub(crate) fn dilation_map(d: DilationMap) -> SmoothMap {
    let n = d.n();
    let name = format!("dilation({n},{})", d.t());
    SmoothMap::build(n, EmbeddedTarget::sphere(n), Equivariance::None, MapKind::Dilation(d), name)
}

/// `(r, v) ↦ (φ(r), v)` in Fermi coordinates about the equator `e_0^⊥`,
/// with `φ(r) = (π/2)(2r/π)^p` extended oddly. Not conformal unless `p = 1`.
pub fn polar_warp(n: usize, exponent: f64) -> Result<SmoothMap> {
    require_dim(n, 1, "polar warp")?;
    if !(exponent >= 1.0) || !exponent.is_finite() {
        return Err(Error::arg(format!("polar warp exponent must be >= 1, got {exponent}")));
    }
    Ok(SmoothMap::build(
        n,
        EmbeddedTarget::sphere(n),
        Equivariance::Antipodal,
        MapKind::PolarWarp { pole: SpherePoint::basis(n, 0), exponent },
        format!("polar_warp({n},{exponent})"),
    ))
}

/// Graph map `f_r = (f, homothety)` into `M × (S², r g₀)`; the second
/// factor is the sphere of radius `√r`.
pub fn graph(f: &SmoothMap, r: f64) -> Result<SmoothMap> {
    if f.domain_dim() != 2 {
        return Err(Error::arg("graph maps are defined for surface domains"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::arg(format!("graph scale must be positive, got {r}")));
    }
    let scale = r.sqrt();
    let (head, eq) = match f.equivariance() {
        Equivariance::Antipodal => (f.target().clone(), Equivariance::Antipodal),
        Equivariance::Invariant => (f.target().with_deck(false), Equivariance::Antipodal),
        Equivariance::None => (f.target().clone(), Equivariance::None),
    };
    let target = head.product(&EmbeddedTarget::round_sphere(2, scale));
    let name = format!("graph({},{r})", f.name());
    Ok(SmoothMap::build(2, target, eq, MapKind::Graph { inner: f.clone(), scale }, name))
}
