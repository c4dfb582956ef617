//! Smooth maps from `S^n` (or `RP^n`, through antipodal symmetry) into
//! embedded targets, with analytic or finite-difference differentials.

mod catalog;
mod differential;
mod target;

pub use catalog::{
    catalog, constant, dilation, graph, identity, inclusion, polar_warp, retraction_to_hyperplane,
    MapId,
};
pub(crate) use catalog::{dilation_map, retraction_in_sphere};
pub use differential::{
    area_density_2d, conformal_defect_2d, conformal_residual, differential, directional,
    energy_density, tension_field, MapDifferential, FD_STEP, SECOND_FD_STEP,
};
pub use target::{EmbeddedTarget, SphereFactor};

use std::fmt;
use std::sync::Arc;

use crate::deformations::DilationMap;
use crate::geometry::{sample_uniform_sphere, SpherePoint};
use crate::{Error, Matrix, Result, Vector};

/// Behaviour of a map under the antipodal map `x ↦ -x` of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivariance {
    /// `F(-x) = F(x)`: descends to a map of `RP^n` into the target.
    Invariant,
    /// `F(-x) = deck(F(x))`: descends to a map of `RP^n` into the quotient of
    /// the target by its deck involution.
    Antipodal,
    None,
}

impl Equivariance {
    /// Whether the energy density is antipodally symmetric, so that the map
    /// defines a map of `RP^n`.
    pub fn descends(self) -> bool {
        !matches!(self, Equivariance::None)
    }

    /// Flag of `outer ∘ inner` when `inner` maps into the unit sphere.
    fn compose(outer: Self, inner: Self) -> Self {
        match inner {
            Equivariance::Invariant => Equivariance::Invariant,
            Equivariance::Antipodal => outer,
            Equivariance::None => Equivariance::None,
        }
    }
}

/// How differentials are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DifferentialMode {
    Analytic,
    /// Central differences along domain geodesics with step `h`.
    FiniteDifference { h: f64 },
}

#[derive(Debug)]
enum MapKind {
    Identity,
    Constant(Vector),
    /// `x ↦ A x` with `A` having orthonormal columns.
    Linear(Matrix),
    /// Nearest-point retraction onto the equator `pole^⊥`; with a basis the
    /// foot is expressed in equator coordinates.
    Retract { pole: SpherePoint, basis: Option<Matrix> },
    Dilation(DilationMap),
    /// `(r, v) ↦ (φ(r), v)` in Fermi coordinates about the equator, with
    /// `φ(r) = sign(r)·(π/2)·(2|r|/π)^p`.
    PolarWarp { pole: SpherePoint, exponent: f64 },
    /// `x ↦ (f(x), scale·x)`.
    Graph { inner: SmoothMap, scale: f64 },
    Compose { outer: SmoothMap, inner: SmoothMap },
}

/// A smooth map `S^n → M` into an [`EmbeddedTarget`].
#[derive(Debug, Clone)]
pub struct SmoothMap {
    domain_dim: usize,
    target: EmbeddedTarget,
    equivariance: Equivariance,
    mode: DifferentialMode,
    kind: Arc<MapKind>,
    name: String,
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl SmoothMap {
    fn build(
        domain_dim: usize,
        target: EmbeddedTarget,
        equivariance: Equivariance,
        kind: MapKind,
        name: impl Into<String>,
    ) -> Self {
        SmoothMap {
            domain_dim,
            target,
            equivariance,
            mode: DifferentialMode::Analytic,
            kind: Arc::new(kind),
            name: name.into(),
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn target(&self) -> &EmbeddedTarget {
        &self.target
    }

    pub fn equivariance(&self) -> Equivariance {
        self.equivariance
    }

    pub fn mode(&self) -> DifferentialMode {
        self.mode
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_mode(mut self, mode: DifferentialMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `x ↦ A x` for a matrix with orthonormal columns, `S^k → S^n`.
    pub fn linear(a: Matrix) -> Result<Self> {
        let cols = a.ncols();
        if cols < 2 || a.nrows() < cols {
            return Err(Error::arg("linear isometric map needs rows >= cols >= 2"));
        }
        let defect = (a.transpose() * &a - Matrix::identity(cols, cols)).abs().max();
        if defect > 1e-10 {
            return Err(Error::arg(format!("columns not orthonormal (defect {defect:e})")));
        }
        let target = EmbeddedTarget::sphere(a.nrows() - 1);
        let name = format!("linear({}->{})", cols - 1, a.nrows() - 1);
        Ok(Self::build(cols - 1, target, Equivariance::Antipodal, MapKind::Linear(a), name))
    }

    /// `self ∘ inner`; `inner` must map into the unit sphere of dimension
    /// `self.domain_dim()`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<Self> {
        if !inner.target.is_unit_sphere(self.domain_dim) {
            return Err(Error::arg(format!(
                "cannot compose {} after {}: target is not the unit {}-sphere",
                self.name, inner.name, self.domain_dim
            )));
        }
        let eq = Equivariance::compose(self.equivariance, inner.equivariance);
        let name = format!("{}∘{}", self.name, inner.name);
        let kind = MapKind::Compose { outer: self.clone(), inner: inner.clone() };
        let mut map = Self::build(inner.domain_dim, self.target.clone(), eq, kind, name);
        map.mode = self.mode;
        Ok(map)
    }

    /// Restriction to the totally geodesic subsphere spanned by `frame`
    /// (orthonormal columns), parametrized isometrically.
    pub fn restrict(&self, frame: &Matrix) -> Result<Self> {
        if frame.nrows() != self.domain_dim + 1 {
            return Err(Error::arg("restriction frame lives in the wrong ambient space"));
        }
        self.compose(&SmoothMap::linear(frame.clone())?)
    }

    /// Ambient value `F(x)`.
    pub fn eval(&self, x: &SpherePoint) -> Vector {
        match &*self.kind {
            MapKind::Identity => x.coords().clone(),
            MapKind::Constant(c) => c.clone(),
            MapKind::Linear(a) => a * x.coords(),
            MapKind::Retract { pole, basis } => {
                let foot = equator_foot(x, pole);
                match basis {
                    Some(b) => b.tr_mul(&foot),
                    None => foot,
                }
            }
            MapKind::Dilation(d) => d.apply(x).into_coords(),
            MapKind::PolarWarp { pole, exponent } => {
                let p = pole.coords();
                let s = x.dot(pole);
                let w = x.coords() - p * s;
                let c = w.norm();
                if c < 1e-300 {
                    return p * s.signum();
                }
                let r = s.atan2(c);
                let phi = warp_profile(r, *exponent);
                w * (phi.cos() / c) + p * phi.sin()
            }
            MapKind::Graph { inner, scale } => {
                let head = inner.eval(x);
                let mut out = Vector::zeros(head.len() + x.coords().len());
                out.rows_mut(0, head.len()).copy_from(&head);
                out.rows_mut(head.len(), x.coords().len()).copy_from(&(x.coords() * *scale));
                out
            }
            MapKind::Compose { outer, inner } => {
                outer.eval(&SpherePoint::from_unit_unchecked(inner.eval(x)))
            }
        }
    }

    /// Analytic differential `dF_x(v)` for a tangent vector `v` at `x`.
    pub fn push(&self, x: &SpherePoint, v: &Vector) -> Vector {
        match &*self.kind {
            MapKind::Identity => v.clone(),
            MapKind::Constant(c) => Vector::zeros(c.len()),
            MapKind::Linear(a) => a * v,
            MapKind::Retract { pole, basis } => {
                let d = equator_foot_push(x, pole, v);
                match basis {
                    Some(b) => b.tr_mul(&d),
                    None => d,
                }
            }
            MapKind::Dilation(d) => d.push(x, v),
            MapKind::PolarWarp { pole, exponent } => {
                let p = pole.coords();
                let s = x.dot(pole);
                let w = x.coords() - p * s;
                let c = w.norm();
                if c < 1e-300 {
                    // radial derivative at the poles is φ'(π/2)
                    return v * warp_slope(std::f64::consts::FRAC_PI_2, *exponent);
                }
                let r = s.atan2(c);
                let foot = &w / c;
                let ds = v.dot(p);
                let dr = ds / c;
                let dw = v - p * ds;
                let dfoot = (&dw - &foot * foot.dot(&dw)) / c;
                let phi = warp_profile(r, *exponent);
                let dphi = warp_slope(r, *exponent) * dr;
                let mut out = dfoot * phi.cos();
                out.axpy(-phi.sin() * dphi, &foot, 1.0);
                out.axpy(phi.cos() * dphi, p, 1.0);
                out
            }
            MapKind::Graph { inner, scale } => {
                let head = inner.push(x, v);
                let mut out = Vector::zeros(head.len() + v.len());
                out.rows_mut(0, head.len()).copy_from(&head);
                out.rows_mut(head.len(), v.len()).copy_from(&(v * *scale));
                out
            }
            MapKind::Compose { outer, inner } => {
                let y = SpherePoint::from_unit_unchecked(inner.eval(x));
                outer.push(&y, &inner.push(x, v))
            }
        }
    }

    /// Checks the declared equivariance flag on `probes` random points.
    pub fn check_equivariance(&self, probes: u64, seed: u64) -> Result<()> {
        for i in 0..probes {
            let x = sample_uniform_sphere(self.domain_dim, seed, i);
            let fx = self.eval(&x);
            let fmx = self.eval(&x.antipode());
            let expected = match self.equivariance {
                Equivariance::Invariant => fx,
                Equivariance::Antipodal => self.target.deck(&fx),
                Equivariance::None => return Ok(()),
            };
            let gap = (fmx - expected).norm();
            if gap > 1e-8 {
                return Err(Error::Equivariance(format!(
                    "{} violates its {:?} flag by {gap:e}",
                    self.name, self.equivariance
                )));
            }
        }
        Ok(())
    }
}

/// Odd power profile `φ(r) = sign(r)·(π/2)·(2|r|/π)^p`, fixing `0` and `±π/2`.
fn warp_profile(r: f64, exponent: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    r.signum() * half_pi * (r.abs() / half_pi).powf(exponent)
}

fn warp_slope(r: f64, exponent: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    exponent * (r.abs() / half_pi).powf(exponent - 1.0)
}

fn equator_foot(x: &SpherePoint, pole: &SpherePoint) -> Vector {
    let p = pole.coords();
    let w = x.coords() - p * x.dot(pole);
    let c = w.norm();
    if c < 1e-300 {
        // measure-zero singular set: any equator point
        return crate::geometry::TangentFrame::standard(pole).vectors()[0].clone();
    }
    w / c
}

fn equator_foot_push(x: &SpherePoint, pole: &SpherePoint, v: &Vector) -> Vector {
    let p = pole.coords();
    let w = x.coords() - p * x.dot(pole);
    let c = w.norm();
    if c < 1e-300 {
        return Vector::zeros(v.len());
    }
    let foot = &w / c;
    let dw = v - p * v.dot(p);
    (&dw - &foot * foot.dot(&dw)) / c
}
