//! Energy-manipulating deformations: the conformal dilation `θ_t` of `S^n`,
//! the projective deformation `Θ_t` of `RP^n`, its retraction limit, and the
//! graph inflation `f_r` of surface maps.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::estimators::{
    area_2d, banded_energy, direct_energy, sample_values, Domain, EnergyEstimate, Method,
};
use crate::geometry::quadrature::adaptive_simpson;
use crate::geometry::rng::{derive_seed, stream};
use crate::geometry::{fermi_split, lift, sigma, uniform_sphere_point, SpherePoint, StereographicChart, TangentFrame};
use crate::maps::{differential, graph, retraction_to_hyperplane, SmoothMap};
use crate::maps::{dilation_map, retraction_in_sphere};
use crate::{Error, Matrix, Result, Vector};

const TAG_CURVE: u64 = 0x200;
const TAG_CAP: u64 = 0x300;
const TAG_RETRACT: u64 = 0x400;
const TAG_LIMIT: u64 = 0x500;

/// `θ_t = ξ⁻¹ ∘ (t·) ∘ ξ`, the conformal dilation of `S^n` about a fixed point.
#[derive(Debug, Clone)]
pub struct DilationMap {
    t: f64,
    chart: StereographicChart,
}

impl DilationMap {
    pub fn new(t: f64, fixed_point: &SpherePoint) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::arg(format!("dilation factor must be positive, got {t}")));
        }
        Ok(DilationMap { t, chart: StereographicChart::new(fixed_point) })
    }

    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn fixed_point(&self) -> &SpherePoint {
        self.chart.pole()
    }

    /// `θ_t(x)`; points within `1e-8` of the antipode of the fixed point are
    /// sent to that antipode.
    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        match self.chart.forward(x) {
            Ok(y) => self.chart.inverse(&(y * self.t)),
            Err(_) => self.fixed_point().antipode(),
        }
    }

    /// `dθ_t(x)·v`.
    pub fn push(&self, x: &SpherePoint, v: &Vector) -> Vector {
        match self.chart.forward(x) {
            Ok(y) => {
                let w = self.chart.forward_push(x, v) * self.t;
                self.chart.inverse_push(&(y * self.t), &w)
            }
            Err(_) => v / self.t,
        }
    }

    /// Conformal factor `λ` with `|dθ_t(v)| = λ|v|`.
    pub fn conformal_factor(&self, x: &SpherePoint) -> f64 {
        match self.chart.forward(x) {
            Ok(y) => {
                let rho2 = y.norm_squared();
                self.t * (1.0 + rho2) / (1.0 + self.t * self.t * rho2)
            }
            Err(_) => 1.0 / self.t,
        }
    }

    /// `θ_{t₁} ∘ θ_{t₂} = θ_{t₁t₂}`.
    pub fn then(&self, other: &DilationMap) -> DilationMap {
        DilationMap { t: self.t * other.t, chart: self.chart.clone() }
    }
}

/// `Θ_t` on `RP^n`: the dilation on the cap `{|ξ(x̃)| < 1/t}` of the upper
/// hemisphere and the nearest-point retraction onto the equator `Q₀`
/// elsewhere.
#[derive(Debug, Clone)]
pub struct ProjectiveDeformation {
    dilation: DilationMap,
}

impl ProjectiveDeformation {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        Self::with_pole(t, &SpherePoint::basis(n, 0))
    }

    pub fn with_pole(t: f64, pole: &SpherePoint) -> Result<Self> {
        if pole.dim() < 2 {
            return Err(Error::arg("projective deformation needs n >= 2"));
        }
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::arg(format!("deformation parameter must be >= 1, got {t}")));
        }
        Ok(ProjectiveDeformation { dilation: DilationMap::new(t, pole)? })
    }

    pub fn t(&self) -> f64 {
        self.dilation.t
    }

    pub fn pole(&self) -> &SpherePoint {
        self.dilation.fixed_point()
    }

    pub fn dilation(&self) -> &DilationMap {
        &self.dilation
    }

    /// Polar angle `2·atan(1/t)` of the cap boundary.
    pub fn cap_angle(&self) -> f64 {
        2.0 * (1.0 / self.t()).atan()
    }

    /// Chart radius `|ξ(x̃)|` of the upper lift of `x`.
    pub fn chart_radius(&self, x: &SpherePoint) -> f64 {
        let x = lift(x, self.pole());
        self.dilation.chart.forward(&x).map(|y| y.norm()).unwrap_or(f64::INFINITY)
    }

    pub fn in_cap(&self, x: &SpherePoint) -> bool {
        self.chart_radius(x) < 1.0 / self.t()
    }

    /// `Θ_t(x)`, returned as the lift in the closed upper hemisphere.
    /// Accepts either lift of `x`.
    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        let x = lift(x, self.pole());
        if self.in_cap(&x) {
            return self.dilation.apply(&x);
        }
        match fermi_split(&x, self.pole()) {
            Ok((_, foot)) => foot,
            Err(_) => x,
        }
    }
}

/// `ρ = tan(φ/2)`, the chart radius at polar angle `φ`.
fn angle_of_radius(rho: f64) -> f64 {
    2.0 * rho.atan()
}

/// Latitude bands adapted to `θ_t`: chart radii `0, 1/(2t), 1/t, 2/t, …, 1`
/// in the upper hemisphere, then the lower hemisphere.
fn dilation_bands(t: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0, 0.5 / t];
    let mut rho = 1.0 / t;
    while rho < 1.0 {
        edges.push(rho);
        rho *= 2.0;
    }
    edges.push(1.0);
    let mut bands: Vec<(f64, f64)> =
        edges.windows(2).map(|w| (angle_of_radius(w[0]), angle_of_radius(w[1]))).collect();
    bands.push((FRAC_PI_2, PI));
    bands
}

fn split_samples(samples: u64, bands: usize) -> Result<u64> {
    if samples == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    Ok((samples / bands.max(1) as u64).max(1))
}

/// `E(θ_t)` over `S^n` for each `t` in the grid, by stratified sampling in
/// latitude bands about the fixed point.
pub fn dilation_energy_curve(n: usize, t_grid: &[f64], samples: u64, seed: u64) -> Result<Vec<EnergyEstimate>> {
    if t_grid.is_empty() {
        return Err(Error::arg("t grid is empty"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 1.0) || !t.is_finite()) {
        return Err(Error::arg(format!("t grid entries must be >= 1, got {t}")));
    }
    let pole = SpherePoint::basis(n, 0);
    t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = dilation_map(DilationMap::new(t, &pole)?);
            let bands = dilation_bands(t);
            let per_band = split_samples(samples, bands.len())?;
            banded_energy(&f, &pole, &bands, per_band, derive_seed(seed, TAG_CURVE + i as u64))
        })
        .collect()
}

/// `E(F∘Θ_t)` split into the cap and retraction regions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeformedEnergy {
    pub t: f64,
    pub total: EnergyEstimate,
    pub cap: EnergyEstimate,
    pub retract: EnergyEstimate,
}

/// Energy of `F∘Θ_t` over `RP^n`.
///
/// Both regions are integrated over the upper hemisphere of the covering
/// sphere, stratified in latitude bands with exact band volumes; the density
/// jumps across the cap boundary, so the boundary is always a band edge.
pub fn deformed_energy(f: &SmoothMap, t: f64, samples: u64, seed: u64) -> Result<DeformedEnergy> {
    let n = f.domain_dim();
    if !f.equivariance().descends() {
        return Err(Error::Equivariance(format!("{} does not descend to real projective space", f.name())));
    }
    let deformation = ProjectiveDeformation::new(n, t)?;
    let pole = deformation.pole().clone();
    let alpha = deformation.cap_angle();

    let cap_bands = [(0.0, angle_of_radius(0.5 / t)), (angle_of_radius(0.5 / t), alpha)];
    let mut retract_bands = Vec::new();
    let mut lo = alpha;
    while lo < FRAC_PI_2 {
        let hi = (2.0 * lo).min(FRAC_PI_2);
        retract_bands.push((lo, hi));
        lo = hi;
    }
    let per_band = split_samples(samples, cap_bands.len() + retract_bands.len())?;

    let on_cap = f.compose(&dilation_map(deformation.dilation().clone()))?;
    let cap = banded_energy(&on_cap, &pole, &cap_bands, per_band, derive_seed(seed, TAG_CAP))?;
    let retract = if retract_bands.is_empty() {
        EnergyEstimate::zero(Method::Direct)
    } else {
        let on_rest = f.compose(&retraction_in_sphere(&pole))?;
        banded_energy(&on_rest, &pole, &retract_bands, per_band, derive_seed(seed, TAG_RETRACT))?
    };
    Ok(DeformedEnergy { t, total: cap.plus(&retract), cap, retract })
}

/// `σ(n-2)/σ(n-3)`, equal to `2∫₀^{π/2} cos^{n-3}(r) dr`.
pub fn limit_factor(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::arg(format!("retraction limit needs n >= 3, got {n}")));
    }
    Ok(sigma(n - 2) / sigma(n - 3))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RetractionLimit {
    pub factor: f64,
    /// `factor · E(F′)`, with `E(F′)` estimated directly.
    pub closed_form: EnergyEstimate,
    /// Energy of `F′ ∘ (retraction onto Q₀)` over `RP^n`.
    pub numeric: EnergyEstimate,
}

/// Limiting energy of `F∘Θ_t` as `t → ∞`, where `F′ = F|_{Q₀}`.
///
/// The numeric value integrates in Fermi coordinates `x = cos(r)·v + sin(r)·p`
/// with `r` uniform on `[0, π/2)` and `v` uniform on the equator, weighted by
/// the volume element `cos^{n-1}(r)`; uniform sampling on the sphere would
/// have infinite variance near the pole.
pub fn retraction_limit_energy(f_prime: &SmoothMap, n: usize, samples: u64, seed: u64) -> Result<RetractionLimit> {
    let factor = limit_factor(n)?;
    if f_prime.domain_dim() != n - 1 {
        return Err(Error::arg(format!(
            "F′ must be defined on RP^{}, got dimension {}",
            n - 1,
            f_prime.domain_dim()
        )));
    }
    let closed_form = direct_energy(f_prime, Domain::Projective, samples, seed)?.scaled(factor);

    let g = f_prime.compose(&retraction_to_hyperplane(n)?)?;
    let s = derive_seed(seed, TAG_LIMIT);
    let weight_scale = FRAC_PI_2 * sigma(n - 1);
    let values = sample_values(samples, |i| {
        let mut rng = stream(s, i);
        let r = FRAC_PI_2 * rand::Rng::random::<f64>(&mut rng);
        let v = uniform_sphere_point(n - 1, &mut rng);
        let mut coords = Vector::zeros(n + 1);
        coords.rows_mut(1, n).copy_from(&(v.coords() * r.cos()));
        coords[0] = r.sin();
        let x = SpherePoint::normalize(coords)?;
        let d = differential(&g, &x, &TangentFrame::standard(&x))?.energy_density();
        Ok(r.cos().powi(n as i32 - 1) * d)
    })?;
    let numeric = EnergyEstimate::from_samples(&values, weight_scale, Method::Direct);
    Ok(RetractionLimit { factor, closed_form, numeric })
}

/// The restriction `F|_{Q₀}` of a map on `RP^n` to the equator `e_0^⊥`.
pub fn equator_restriction(f: &SmoothMap) -> Result<SmoothMap> {
    let n = f.domain_dim();
    let mut frame = Matrix::zeros(n + 1, n);
    for j in 0..n {
        frame[(j + 1, j)] = 1.0;
    }
    f.restrict(&frame)
}

/// `(2∫₀^{π/2} cos^{n-3}(r) dr, σ(n-2)/σ(n-3))`.
pub fn quadrature_identity_check(n: usize) -> Result<(f64, f64)> {
    let rhs = limit_factor(n)?;
    let p = (n - 3) as i32;
    let lhs = 2.0 * adaptive_simpson(|r| r.cos().powi(p), 0.0, FRAC_PI_2, 1e-13);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GraphInflationRow {
    pub r: f64,
    pub energy: EnergyEstimate,
    pub area: EnergyEstimate,
}

/// Energy and area of the graph maps `f_r` over a grid of scales.
pub fn graph_inflation_report(
    f: &SmoothMap,
    domain: Domain,
    r_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<GraphInflationRow>> {
    if f.domain_dim() != 2 {
        return Err(Error::arg(format!("graph inflation needs a surface domain, got dimension {}", f.domain_dim())));
    }
    if r_grid.is_empty() {
        return Err(Error::arg("r grid is empty"));
    }
    r_grid
        .iter()
        .map(|&r| {
            let fr = graph(f, r)?;
            Ok(GraphInflationRow {
                r,
                energy: direct_energy(&fr, domain, samples, seed)?,
                area: area_2d(&fr, domain, samples, seed)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::within;
    use crate::geometry::sample_uniform_sphere;
    use crate::maps::{constant, identity, polar_warp};

    fn pole(n: usize) -> SpherePoint {
        SpherePoint::basis(n, 0)
    }

    /// `E(θ_t)` on `S^n` by radial quadrature of `(n/2)λ²` with
    /// `λ = t(1+ρ²)/(1+t²ρ²)`, `ρ = tan(φ/2)`.
    fn dilation_energy_oracle(n: usize, t: f64) -> f64 {
        let density = |phi: f64| {
            let rho = (phi / 2.0).tan();
            let lambda = t * (1.0 + rho * rho) / (1.0 + t * t * rho * rho);
            0.5 * n as f64 * lambda * lambda * phi.sin().powi(n as i32 - 1)
        };
        let mut breaks = vec![0.0];
        let mut rho = 0.25 / t;
        while rho < 1.0 {
            breaks.push(2.0 * rho.atan());
            rho *= 2.0;
        }
        breaks.push(PI);
        let total: f64 = breaks.windows(2).map(|w| adaptive_simpson(density, w[0], w[1], 1e-12)).sum();
        sigma(n - 1) * total
    }

    #[test]
    fn dilation_fixes_poles_and_is_identity_at_one() {
        let d = DilationMap::new(3.0, &pole(3)).unwrap();
        assert!((d.apply(&pole(3)).coords() - pole(3).coords()).norm() < 1e-15);
        assert!((d.apply(&pole(3).antipode()).coords() + pole(3).coords()).norm() < 1e-15);
        let id = DilationMap::new(1.0, &pole(3)).unwrap();
        for i in 0..100 {
            let x = sample_uniform_sphere(3, 1, i);
            assert!((id.apply(&x).coords() - x.coords()).norm() < 1e-12);
        }
        assert!(DilationMap::new(0.0, &pole(2)).is_err());
    }

    #[test]
    fn equator_is_pushed_towards_the_antipode() {
        let d = DilationMap::new(10.0, &pole(2)).unwrap();
        let x = SpherePoint::basis(2, 1);
        assert!(d.apply(&x).dot(&pole(2)) < -0.9);
        // polar angle 2·atan(10)
        let expected = (2.0 * 10f64.atan()).cos();
        assert!((d.apply(&x).dot(&pole(2)) - expected).abs() < 1e-12);
    }

    #[test]
    fn dilations_form_a_group() {
        let p = SpherePoint::normalize(Vector::from_vec(vec![0.3, -0.5, 0.2, 0.7])).unwrap();
        let a = DilationMap::new(2.5, &p).unwrap();
        let b = DilationMap::new(0.7, &p).unwrap();
        let ab = a.then(&b);
        for i in 0..1000 {
            let x = sample_uniform_sphere(3, 2, i);
            assert!((a.apply(&b.apply(&x)).coords() - ab.apply(&x).coords()).norm() < 1e-9);
        }
    }

    #[test]
    fn dilation_is_conformal_with_closed_form_factor() {
        let d = DilationMap::new(4.0, &pole(3)).unwrap();
        let f = dilation_map(d.clone());
        for i in 0..200 {
            let x = sample_uniform_sphere(3, 3, i);
            let sv = differential(&f, &x, &TangentFrame::standard(&x)).unwrap().singular_values();
            let lambda = d.conformal_factor(&x);
            for s in sv {
                assert!((s - lambda).abs() < 1e-9 * lambda.max(1.0), "{s} vs {lambda}");
            }
        }
    }

    #[test]
    fn deformation_fixes_equator_and_pole() {
        let theta = ProjectiveDeformation::new(3, 5.0).unwrap();
        assert!((theta.apply(&pole(3)).coords() - pole(3).coords()).norm() < 1e-15);
        for i in 0..50 {
            let mut v = sample_uniform_sphere(3, 4, i).into_coords();
            v[0] = 0.0;
            let x = SpherePoint::normalize(v).unwrap();
            let y = theta.apply(&x);
            assert!((y.coords() - x.coords()).norm() < 1e-12 || (y.coords() + x.coords()).norm() < 1e-12);
        }
        assert!(ProjectiveDeformation::new(3, 0.5).is_err());
    }

    #[test]
    fn deformation_accepts_either_lift() {
        let theta = ProjectiveDeformation::new(4, 2.0).unwrap();
        for i in 0..100 {
            let x = sample_uniform_sphere(4, 5, i);
            let a = theta.apply(&x);
            let b = theta.apply(&x.antipode());
            assert!((a.coords() - b.coords()).norm() < 1e-14);
            assert!(a.dot(&pole(4)) >= -1e-15);
        }
    }

    #[test]
    fn deformation_is_continuous_across_the_cap_boundary() {
        let t = 7.0;
        let theta = ProjectiveDeformation::new(3, t).unwrap();
        let chart = StereographicChart::new(&pole(3));
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let dir = crate::geometry::gaussian_vector(3, &mut stream(6, i));
            let dir = &dir / dir.norm();
            let inner = chart.inverse(&(&dir * (1.0 / t - 1e-6)));
            let outer = chart.inverse(&(&dir * (1.0 / t + 1e-6)));
            assert!(theta.in_cap(&inner) && !theta.in_cap(&outer));
            worst = worst.max((theta.apply(&inner).coords() - theta.apply(&outer).coords()).norm());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn dilation_oracle_reproduces_known_values() {
        assert!((dilation_energy_oracle(2, 7.0) - 4.0 * PI).abs() < 1e-8);
        assert!((dilation_energy_oracle(3, 1.0) - 3.0 * PI * PI).abs() < 1e-8);
        assert!(dilation_energy_oracle(3, 100.0) < 0.05 * 3.0 * PI * PI);
    }

    #[test]
    fn dilation_curve_matches_radial_quadrature() {
        let grid = [1.0, 2.0, 10.0, 100.0];
        for n in [2, 3, 4] {
            let curve = dilation_energy_curve(n, &grid, 20_000, 8).unwrap();
            for (e, &t) in curve.iter().zip(&grid) {
                let exact = dilation_energy_oracle(n, t);
                assert!(e.matches(exact, 3.0), "n={n} t={t}: {e:?} vs {exact}");
            }
        }
        assert!(dilation_energy_curve(3, &[], 10, 0).is_err());
        assert!(dilation_energy_curve(3, &[0.5], 10, 0).is_err());
    }

    #[test]
    fn quadrature_identity_holds() {
        for n in 3..=12 {
            let (lhs, rhs) = quadrature_identity_check(n).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "n={n}");
        }
        let (l3, _) = quadrature_identity_check(3).unwrap();
        let (l4, _) = quadrature_identity_check(4).unwrap();
        let (l5, _) = quadrature_identity_check(5).unwrap();
        assert!((l3 - PI).abs() < 1e-10 && (l4 - 2.0).abs() < 1e-10 && (l5 - PI / 2.0).abs() < 1e-10);
        assert!(quadrature_identity_check(2).is_err());
    }

    #[test]
    fn deformation_at_one_is_the_identity() {
        let f = polar_warp(3, 2.0).unwrap();
        let d = deformed_energy(&f, 1.0, 40_000, 9).unwrap();
        assert_eq!(d.retract.samples, 0);
        let direct = direct_energy(&f, Domain::Projective, 40_000, 9).unwrap();
        assert!(d.total.agrees_with(&direct, 3.0), "{d:?} {direct:?}");
    }

    #[test]
    fn deformed_identity_approaches_the_limit() {
        let f = identity(3).unwrap();
        let d = deformed_energy(&f, 50.0, 40_000, 10).unwrap();
        let limit = 2.0 * PI * PI;
        assert!(d.cap.value < 0.05 * 3.0 * sigma(3) / 4.0);
        assert!((d.total.value - limit).abs() / limit < 0.05, "{d:?}");
        let noninvariant = crate::maps::dilation(3, 2.0).unwrap();
        assert!(matches!(deformed_energy(&noninvariant, 2.0, 10, 0), Err(Error::Equivariance(_))));
    }

    #[test]
    fn retraction_limit_closed_form_and_numeric_agree() {
        let rl = retraction_limit_energy(&identity(2).unwrap(), 3, 20_000, 11).unwrap();
        assert!((rl.factor - PI).abs() < 1e-14);
        assert!(within(rl.closed_form.value, 2.0 * PI * PI, 0.0));
        for n in [3, 4, 5] {
            let rl = retraction_limit_energy(&identity(n - 1).unwrap(), n, 40_000, 12).unwrap();
            assert!(rl.numeric.agrees_with(&rl.closed_form, 3.0), "n={n}: {rl:?}");
        }
        let zero = retraction_limit_energy(&constant(3).unwrap(), 4, 100, 0).unwrap();
        assert_eq!((zero.closed_form.value, zero.numeric.value), (0.0, 0.0));
        assert!(retraction_limit_energy(&identity(1).unwrap(), 2, 10, 0).is_err());
        assert!(retraction_limit_energy(&identity(3).unwrap(), 3, 10, 0).is_err());
    }

    #[test]
    fn equator_restriction_of_identity_is_identity_of_the_equator() {
        let f = equator_restriction(&identity(4).unwrap()).unwrap();
        assert_eq!(f.domain_dim(), 3);
        let e = direct_energy(&f, Domain::Projective, 100, 0).unwrap();
        assert!(e.matches(3.0 * sigma(3) / 4.0, 0.0));
    }

    #[test]
    fn graph_inflation_of_the_round_sphere() {
        let id = identity(2).unwrap();
        let rows = graph_inflation_report(&id, Domain::Sphere, &[0.1, 0.01], 5000, 13).unwrap();
        for row in &rows {
            let exact = 4.0 * PI * (1.0 + row.r);
            assert!(row.energy.matches(exact, 3.0));
            assert!(row.area.matches(exact, 3.0));
            assert!(row.area.value - 4.0 * PI < 4.0 * PI * row.r + 3.0 * row.area.std_error + 1e-9);
        }
        let half = graph_inflation_report(&id, Domain::Projective, &[0.1], 5000, 13).unwrap();
        assert!(half[0].area.matches(2.0 * PI * 1.1, 3.0));
        assert!(graph_inflation_report(&identity(3).unwrap(), Domain::Sphere, &[0.1], 10, 0).is_err());
    }
}
