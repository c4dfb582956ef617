//! Round-sphere and projective-space primitives.
//!
//! Points of `RP^n` are represented by unit vectors in `R^{n+1}` (lifts to the
//! covering sphere). All samplers are counter based: see [`rng`].

mod chart;
pub mod quadrature;
pub mod rng;
mod sampling;

pub use chart::StereographicChart;
pub use sampling::{
    gaussian_vector, random_isometry, sample_grassmann, sample_in_band, sample_uniform_sphere,
    sample_unit_tangent, sample_unit_tangent_at, uniform_sphere_point,
};

use std::f64::consts::PI;

use crate::{Error, Matrix, Result, Vector};

/// Volume of the unit `n`-sphere, `σ(n)`.
///
/// Computed by the recurrence `σ(n) = 2π/(n-1) σ(n-2)` from `σ(0) = 2` and
/// `σ(1) = 2π`; no Gamma function is evaluated.
pub fn sphere_volume(n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::arg(format!("sphere dimension must be >= 0, got {n}")));
    }
    Ok(sigma(n as usize))
}

/// Infallible form of [`sphere_volume`] for unsigned dimensions.
pub fn sigma(n: usize) -> f64 {
    let mut even = 2.0;
    let mut odd = 2.0 * PI;
    if n == 0 {
        return even;
    }
    if n == 1 {
        return odd;
    }
    for m in 2..=n {
        let next = 2.0 * PI / (m - 1) as f64 * if m % 2 == 0 { even } else { odd };
        if m % 2 == 0 {
            even = next;
        } else {
            odd = next;
        }
    }
    if n % 2 == 0 {
        even
    } else {
        odd
    }
}

/// A point of the unit sphere `S^n ⊂ R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vector,
}

impl SpherePoint {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: Vector) -> Result<Self> {
        let norm = coords.norm();
        if coords.is_empty() || (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Domain(format!("vector of norm {norm} is not on the unit sphere")));
        }
        Ok(SpherePoint { coords })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn normalize(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(SpherePoint { coords: v / norm })
    }

    pub(crate) fn from_unit_unchecked(coords: Vector) -> Self {
        SpherePoint { coords }
    }

    /// The `i`-th standard basis vector of `R^{n+1}`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Vector::zeros(n + 1);
        v[i] = 1.0;
        SpherePoint { coords: v }
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn antipode(&self) -> Self {
        SpherePoint { coords: -&self.coords }
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords.dot(&other.coords)
    }

    /// Geodesic distance on the sphere.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let cross = (&self.coords - &other.coords).norm();
        let sum = (&self.coords + &other.coords).norm();
        2.0 * cross.atan2(sum)
    }

    /// Point at arclength `s` along the unit-speed geodesic with initial
    /// velocity `dir` (assumed unit and tangent).
    pub fn geodesic(&self, dir: &Vector, s: f64) -> SpherePoint {
        SpherePoint { coords: &self.coords * s.cos() + dir * s.sin() }
    }
}

/// An orthonormal frame of the tangent space `T_x S^n`.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    base: SpherePoint,
    vectors: Vec<Vector>,
}

impl TangentFrame {
    pub const TOL: f64 = 1e-10;

    pub fn new(base: SpherePoint, vectors: Vec<Vector>) -> Result<Self> {
        let n = base.dim();
        if vectors.len() != n {
            return Err(Error::arg(format!("frame needs {n} vectors, got {}", vectors.len())));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != n + 1 {
                return Err(Error::arg("frame vector has wrong ambient length"));
            }
            if v.dot(base.coords()).abs() > Self::TOL {
                return Err(Error::Domain(format!("frame vector {i} is not tangent")));
            }
            for (j, w) in vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (v.dot(w) - target).abs() > Self::TOL {
                    return Err(Error::Domain(format!("frame vectors {i},{j} not orthonormal")));
                }
            }
        }
        Ok(TangentFrame { base, vectors })
    }

    /// Deterministic frame at `base`, taken from the columns of the
    /// Householder reflection exchanging `e_0` and `±base`.
    pub fn standard(base: &SpherePoint) -> Self {
        let x = base.coords();
        let dim = x.len();
        let mut u = -x.clone();
        let sign = if x[0] > 0.0 { -1.0 } else { 1.0 };
        u *= sign;
        u[0] += 1.0;
        // u = e_0 - x (x_0 <= 0) or e_0 + x (x_0 > 0); |u|² >= 2
        let scale = 2.0 / u.norm_squared();
        let vectors = (1..dim)
            .map(|j| {
                let mut col = &u * (-scale * u[j]);
                col[j] += 1.0;
                col
            })
            .collect();
        TangentFrame { base: base.clone(), vectors }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// Frame `v'_i = Σ_j q_{ij} v_j` for an orthogonal `n × n` matrix `q`.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        let n = self.vectors.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::arg("rotation has wrong size for frame"));
        }
        let vectors = (0..n)
            .map(|i| {
                let mut acc = Vector::zeros(n + 1);
                for (j, v) in self.vectors.iter().enumerate() {
                    acc.axpy(q[(i, j)], v, 1.0);
                }
                acc
            })
            .collect();
        TangentFrame::new(self.base.clone(), vectors)
    }

    /// Ambient matrix whose columns are the frame vectors.
    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.vectors)
    }
}

/// A point of the unit tangent bundle.
#[derive(Debug, Clone)]
pub struct UnitTangentSample {
    pub base: SpherePoint,
    pub direction: Vector,
}

/// Lift of a totally geodesic `RP^k ⊂ RP^n`: an orthonormal `(k+1)`-frame of
/// `R^{n+1}` spanning the linear subspace that covers it.
#[derive(Debug, Clone)]
pub struct GrassmannPlane {
    frame: Matrix,
    k: usize,
}

impl GrassmannPlane {
    pub fn new(frame: Matrix) -> Result<Self> {
        let cols = frame.ncols();
        let ambient = frame.nrows();
        if cols < 2 || cols + 1 > ambient {
            return Err(Error::arg(format!(
                "plane of {cols} columns in R^{ambient} is not a proper RP^k with k >= 1"
            )));
        }
        let gram = frame.transpose() * &frame;
        let defect = (gram - Matrix::identity(cols, cols)).abs().max();
        if defect > 1e-10 {
            return Err(Error::Domain(format!("frame not orthonormal (defect {defect:e})")));
        }
        Ok(GrassmannPlane { frame, k: cols - 1 })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension `n` of the ambient projective space.
    pub fn n(&self) -> usize {
        self.frame.nrows() - 1
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    /// Squared norm of the orthogonal projection of `v` onto the plane.
    pub fn projection_norm_squared(&self, v: &Vector) -> f64 {
        (self.frame.transpose() * v).norm_squared()
    }

    /// Image of the plane under an orthogonal transformation.
    pub fn transformed(&self, m: &Matrix) -> GrassmannPlane {
        GrassmannPlane { frame: m * &self.frame, k: self.k }
    }
}

/// Representative of `±x` in the closed hemisphere centred at `pole`.
///
/// Equatorial points (`⟨x, pole⟩ = 0`) are resolved by making the first
/// nonzero coordinate positive.
pub fn lift(x: &SpherePoint, pole: &SpherePoint) -> SpherePoint {
    let s = x.dot(pole);
    if s > 0.0 {
        return x.clone();
    }
    if s < 0.0 {
        return x.antipode();
    }
    match x.coords().iter().find(|c| **c != 0.0) {
        Some(c) if *c < 0.0 => x.antipode(),
        _ => x.clone(),
    }
}

/// Fermi coordinates about the equator `pole^⊥`.
///
/// Returns `(r, foot)` with `r ∈ [0, π/2]` the distance from `x` to the
/// equator and `foot` its nearest equatorial point, so that
/// `x = cos(r)·foot + sin(r)·pole`. The input must satisfy the lift
/// convention `⟨x, pole⟩ >= 0`.
pub fn fermi_split(x: &SpherePoint, pole: &SpherePoint) -> Result<(f64, SpherePoint)> {
    if x.dim() != pole.dim() {
        return Err(Error::arg("point and pole live on different spheres"));
    }
    let s = x.dot(pole);
    if s < -1e-12 {
        return Err(Error::Domain(format!(
            "point violates the lift convention (<x, pole> = {s:e})"
        )));
    }
    let w = x.coords() - pole.coords() * s;
    let c = w.norm();
    if c < 1e-12 {
        return Err(Error::PoleSingularity("foot point undefined at the pole".into()));
    }
    let r = s.max(0.0).atan2(c);
    Ok((r, SpherePoint::from_unit_unchecked(w / c)))
}
