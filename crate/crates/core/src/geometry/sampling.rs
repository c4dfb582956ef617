use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::stream;
use super::{GrassmannPlane, SpherePoint, UnitTangentSample};
use crate::{Error, Matrix, Result, Vector};

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Uniform point of `S^n` from a normalized Gaussian vector.
pub fn uniform_sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let g = gaussian_vector(n + 1, rng);
        if let Ok(p) = SpherePoint::normalize(g) {
            return p;
        }
    }
}

pub fn sample_uniform_sphere(n: usize, seed: u64, index: u64) -> SpherePoint {
    uniform_sphere_point(n, &mut stream(seed, index))
}

/// Uniform unit vector of the tangent space at `base`.
fn tangent_direction<R: Rng + ?Sized>(base: &SpherePoint, rng: &mut R) -> Vector {
    let x = base.coords();
    loop {
        let mut g = gaussian_vector(x.len(), rng);
        let s = g.dot(x);
        g.axpy(-s, x, 1.0);
        let norm = g.norm();
        if norm > 1e-8 {
            return g / norm;
        }
    }
}

/// Invariant (uniform) sample of the unit tangent bundle of `S^n`.
pub fn sample_unit_tangent(n: usize, seed: u64, index: u64) -> UnitTangentSample {
    let mut rng = stream(seed, index);
    let base = uniform_sphere_point(n, &mut rng);
    let direction = tangent_direction(&base, &mut rng);
    UnitTangentSample { base, direction }
}

/// Uniform unit tangent vector at a fixed base point.
pub fn sample_unit_tangent_at(base: &SpherePoint, seed: u64, index: u64) -> Vector {
    tangent_direction(base, &mut stream(seed, index))
}

/// Modified Gram–Schmidt, applied twice for orthogonality to rounding.
fn orthonormalize(mut cols: Vec<Vector>) -> Option<Vec<Vector>> {
    for _pass in 0..2 {
        for i in 0..cols.len() {
            let (done, rest) = cols.split_at_mut(i);
            let v = &mut rest[0];
            for q in done.iter() {
                let c = q.dot(v);
                v.axpy(-c, q, 1.0);
            }
            let norm = v.norm();
            if norm < 1e-10 {
                return None;
            }
            *v /= norm;
        }
    }
    Some(cols)
}

/// Totally geodesic `RP^k ⊂ RP^n` drawn from the isometry-invariant
/// probability measure on the Grassmannian of `(k+1)`-planes in `R^{n+1}`.
pub fn sample_grassmann(n: usize, k: usize, seed: u64, index: u64) -> Result<GrassmannPlane> {
    if k < 1 || k + 1 > n {
        return Err(Error::arg(format!("need 1 <= k <= n-1, got k={k}, n={n}")));
    }
    let mut rng = stream(seed, index);
    loop {
        let cols = (0..=k).map(|_| gaussian_vector(n + 1, &mut rng)).collect();
        if let Some(cols) = orthonormalize(cols) {
            return GrassmannPlane::new(Matrix::from_columns(&cols));
        }
    }
}

/// Haar-distributed element of `O(n+1)`: QR of a Gaussian matrix with the
/// signs of `diag(R)` absorbed into `Q`.
pub fn random_isometry(n: usize, seed: u64, index: u64) -> Matrix {
    let dim = n + 1;
    let mut rng = stream(seed, index);
    let g = Matrix::from_iterator(dim, dim, (0..dim * dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let (mut q, r) = g.qr().unpack();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Point of the latitude band `{lo <= angle(x, pole) <= hi}` drawn from the
/// restriction of the uniform measure.
///
/// The band must lie in one closed hemisphere (`hi <= π/2` or `lo >= π/2`).
pub fn sample_in_band<R: Rng + ?Sized>(
    pole: &SpherePoint,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<SpherePoint> {
    const EPS: f64 = 1e-12;
    if !(0.0..=PI).contains(&lo) || !(lo..=PI).contains(&hi) {
        return Err(Error::arg(format!("invalid band [{lo}, {hi}]")));
    }
    let reflected = if hi <= FRAC_PI_2 + EPS {
        false
    } else if lo >= FRAC_PI_2 - EPS {
        true
    } else {
        return Err(Error::arg("band straddles the equator"));
    };
    let (a, b) = if reflected { (PI - hi, PI - lo) } else { (lo, hi) };
    let n = pole.dim();
    let power = (n - 1) as i32;
    // proposal density ∝ ψ^{n-1}, accepted with probability (sin ψ / ψ)^{n-1}
    let psi = loop {
        let u: f64 = rng.random();
        let psi = if n == 1 {
            a + u * (b - a)
        } else {
            let (an, bn) = (a.powi(n as i32), b.powi(n as i32));
            (an + u * (bn - an)).powf(1.0 / n as f64)
        };
        if psi <= 0.0 {
            break psi;
        }
        let accept = (psi.sin() / psi).powi(power);
        if rng.random::<f64>() < accept {
            break psi;
        }
    };
    let phi = if reflected { PI - psi } else { psi };
    let dir = tangent_direction(pole, rng);
    let x = pole.coords() * phi.cos() + dir * phi.sin();
    SpherePoint::normalize(x)
}
