//! Monte Carlo estimators of the energy `E(F) = 1/2 ∫ |dF|²`.
//!
//! Three routes are provided and cross-checked against each other: the
//! pointwise density ([`direct_energy`]), the unit tangent bundle average
//! ([`croke_energy`]) and the average of energies of restrictions to random
//! totally geodesic subspaces ([`slice_energy`]). Surface maps additionally get
//! the area functional and the semiconformality defect.
//!
//! Every estimate is a pure function of its inputs and seed: samples are
//! drawn from counter-based streams and reduced in index order.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::geometry::rng::{derive_seed, stream};
use crate::geometry::{
    quadrature::band_volume, sample_grassmann, sample_in_band, sample_uniform_sphere,
    sample_unit_tangent, sigma, SpherePoint, TangentFrame,
};
use crate::maps::{differential, directional, SmoothMap};
use crate::{Error, Result};

const TAG_DIRECT: u64 = 1;
const TAG_CROKE: u64 = 2;
const TAG_SLICE_PLANES: u64 = 3;
const TAG_SLICE_POINTS: u64 = 4;
const TAG_BANDS: u64 = 0x100;

/// Which estimator produced an [`EnergyEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Croke,
    Slice(usize),
    Area,
    Defect,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Direct => write!(f, "direct"),
            Method::Croke => write!(f, "croke"),
            Method::Slice(k) => write!(f, "slice({k})"),
            Method::Area => write!(f, "area"),
            Method::Defect => write!(f, "defect"),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: Method,
}

impl EnergyEstimate {
    /// `scale` times the sample mean, with standard error
    /// `scale · sd / sqrt(N)`.
    pub fn from_samples(values: &[f64], scale: f64, method: Method) -> Self {
        let (mean, sd) = mean_and_sd(values);
        let n = values.len() as f64;
        EnergyEstimate {
            value: scale * mean,
            std_error: scale.abs() * sd / n.sqrt(),
            samples: values.len() as u64,
            method,
        }
    }

    pub fn zero(method: Method) -> Self {
        EnergyEstimate { value: 0.0, std_error: 0.0, samples: 0, method }
    }

    pub fn scaled(&self, c: f64) -> Self {
        EnergyEstimate { value: c * self.value, std_error: c.abs() * self.std_error, ..*self }
    }

    /// Sum of two independent estimates.
    pub fn plus(&self, other: &EnergyEstimate) -> Self {
        EnergyEstimate {
            value: self.value + other.value,
            std_error: self.std_error.hypot(other.std_error),
            samples: self.samples + other.samples,
            method: self.method,
        }
    }

    pub fn combined_se(&self, other: &EnergyEstimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }

    /// `|self - other| <= k · combined SE`, with a relative floor of `1e-9`
    /// for estimates whose integrand is (numerically) constant.
    pub fn agrees_with(&self, other: &EnergyEstimate, k: f64) -> bool {
        within(self.value, other.value, k * self.combined_se(other))
    }

    /// `|self - exact| <= k · SE` with the same floor as
    /// [`agrees_with`](Self::agrees_with).
    pub fn matches(&self, exact: f64, k: f64) -> bool {
        within(self.value, exact, k * self.std_error)
    }
}

/// `|a - b| <= tol + 1e-9 · max(|a|, |b|, 1)`.
pub fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub(crate) fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Evaluates `f(i)` for `i in 0..samples` in parallel, keeping index order.
pub(crate) fn sample_values<F>(samples: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..samples).into_par_iter().map(f).collect()
}

/// Integration domain: the sphere itself or its antipodal quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Sphere,
    Projective,
}

impl Domain {
    pub fn volume(self, n: usize) -> f64 {
        match self {
            Domain::Sphere => sigma(n),
            Domain::Projective => sigma(n) / 2.0,
        }
    }

    fn check(self, f: &SmoothMap) -> Result<()> {
        if self == Domain::Projective && !f.equivariance().descends() {
            return Err(Error::Equivariance(format!(
                "{} does not descend to real projective space",
                f.name()
            )));
        }
        Ok(())
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    Ok(())
}

fn density_at(f: &SmoothMap, x: &SpherePoint) -> Result<f64> {
    Ok(differential(f, x, &TangentFrame::standard(x))?.energy_density())
}

/// `Vol(domain) · mean(|dF_x|²/2)` over uniform points.
///
/// Projective domains are integrated over the covering sphere with the
/// halved volume, which is exact for maps whose density is antipodally
/// symmetric.
pub fn direct_energy(f: &SmoothMap, domain: Domain, samples: u64, seed: u64) -> Result<EnergyEstimate> {
    check_samples(samples)?;
    domain.check(f)?;
    let n = f.domain_dim();
    let s = derive_seed(seed, TAG_DIRECT);
    let values = sample_values(samples, |i| density_at(f, &sample_uniform_sphere(n, s, i)))?;
    Ok(EnergyEstimate::from_samples(&values, domain.volume(n), Method::Direct))
}

/// Energy as `n / (2σ(n-1)) · ∫_{U(N)} |dF(u)|² du` over the unit tangent
/// bundle, with `Vol(U(N)) = Vol(N) · σ(n-1)`.
pub fn croke_energy(f: &SmoothMap, domain: Domain, samples: u64, seed: u64) -> Result<EnergyEstimate> {
    check_samples(samples)?;
    domain.check(f)?;
    let n = f.domain_dim();
    let s = derive_seed(seed, TAG_CROKE);
    let values = sample_values(samples, |i| {
        let u = sample_unit_tangent(n, s, i);
        Ok(directional(f, &u.base, &u.direction)?.norm_squared())
    })?;
    let bundle_volume = domain.volume(n) * sigma(n - 1);
    let scale = n as f64 / (2.0 * sigma(n - 1)) * bundle_volume;
    Ok(EnergyEstimate::from_samples(&values, scale, Method::Croke))
}

/// Energy as the integral of `E(F|_Q)` over totally geodesic `RP^k ⊂ RP^n`
/// against the invariant measure of total mass `nσ(n) / (kσ(k))`.
///
/// Each `E(F|_Q)` is a direct estimate over `RP^k` with `samples_per_plane`
/// points; the standard error is the spread of the per-plane estimates, so
/// it carries both the between-plane and the within-plane variance.
pub fn slice_energy(
    f: &SmoothMap,
    k: usize,
    planes: u64,
    samples_per_plane: u64,
    seed: u64,
) -> Result<EnergyEstimate> {
    check_samples(planes)?;
    check_samples(samples_per_plane)?;
    let n = f.domain_dim();
    if k < 1 || k + 1 > n {
        return Err(Error::arg(format!("slice dimension must satisfy 1 <= k <= n-1, got k={k}, n={n}")));
    }
    Domain::Projective.check(f)?;
    let plane_seed = derive_seed(seed, TAG_SLICE_PLANES);
    let point_seed = derive_seed(seed, TAG_SLICE_POINTS);
    let per_plane: Vec<EnergyEstimate> = (0..planes)
        .into_par_iter()
        .map(|p| {
            let plane = sample_grassmann(n, k, plane_seed, p)?;
            let restricted = f.restrict(plane.frame())?;
            direct_energy(&restricted, Domain::Projective, samples_per_plane, derive_seed(point_seed, p))
        })
        .collect::<Result<_>>()?;
    let mass = n as f64 * sigma(n) / (k as f64 * sigma(k));
    let energies: Vec<f64> = per_plane.iter().map(|e| e.value).collect();
    let mut est = EnergyEstimate::from_samples(&energies, mass, Method::Slice(k));
    if planes == 1 {
        est.std_error = mass * per_plane[0].std_error;
    }
    est.samples = planes * samples_per_plane;
    Ok(est)
}

fn surface_values<G>(f: &SmoothMap, domain: Domain, samples: u64, seed: u64, g: G) -> Result<Vec<f64>>
where
    G: Fn(&crate::maps::MapDifferential) -> Result<f64> + Sync + Send,
{
    check_samples(samples)?;
    if f.domain_dim() != 2 {
        return Err(Error::arg(format!("surface functional needs a 2-dimensional domain, got {}", f.domain_dim())));
    }
    domain.check(f)?;
    // same points as direct_energy, so that area and defect are coupled to it
    let s = derive_seed(seed, TAG_DIRECT);
    sample_values(samples, |i| {
        let x = sample_uniform_sphere(2, s, i);
        g(&differential(f, &x, &TangentFrame::standard(&x))?)
    })
}

/// Area of the image, `Vol(domain) · mean(sqrt(det(dfᵀ df)))`.
pub fn area_2d(f: &SmoothMap, domain: Domain, samples: u64, seed: u64) -> Result<EnergyEstimate> {
    let values = surface_values(f, domain, samples, seed, |d| d.area_density())?;
    Ok(EnergyEstimate::from_samples(&values, domain.volume(2), Method::Area))
}

/// Energy minus area, estimated on shared sample points; zero exactly when
/// `f` is semiconformal almost everywhere.
pub fn total_conformal_defect(f: &SmoothMap, domain: Domain, samples: u64, seed: u64) -> Result<EnergyEstimate> {
    let values = surface_values(f, domain, samples, seed, |d| d.conformal_defect())?;
    Ok(EnergyEstimate::from_samples(&values, domain.volume(2), Method::Defect))
}

/// Energy of `f` over a union of latitude bands about `pole`, each band
/// sampled separately and weighted by its exact volume.
///
/// Bands are `(lo, hi)` angles from `pole`; each must lie in one closed
/// hemisphere. Used for integrands that are concentrated or discontinuous
/// across latitudes.
pub fn banded_energy(
    f: &SmoothMap,
    pole: &SpherePoint,
    bands: &[(f64, f64)],
    samples_per_band: u64,
    seed: u64,
) -> Result<EnergyEstimate> {
    check_samples(samples_per_band)?;
    let n = f.domain_dim();
    if pole.dim() != n {
        return Err(Error::arg("pole does not match the map's domain"));
    }
    let mut total = EnergyEstimate::zero(Method::Direct);
    for (b, &(lo, hi)) in bands.iter().enumerate() {
        if hi <= lo {
            continue;
        }
        let s = derive_seed(seed, TAG_BANDS + b as u64);
        let values = sample_values(samples_per_band, |i| {
            let x = sample_in_band(pole, lo, hi, &mut stream(s, i))?;
            density_at(f, &x)
        })?;
        let band = EnergyEstimate::from_samples(&values, band_volume(n, lo, hi), Method::Direct);
        total = total.plus(&band);
    }
    Ok(total)
}
