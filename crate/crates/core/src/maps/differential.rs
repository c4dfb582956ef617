use nalgebra::SymmetricEigen;

use super::{DifferentialMode, SmoothMap};
use crate::geometry::{SpherePoint, TangentFrame};
use crate::{Error, Matrix, Result, Vector};

/// Default first-derivative step.
pub const FD_STEP: f64 = 1e-4;
/// Default second-derivative step for the tension field.
pub const SECOND_FD_STEP: f64 = 1e-3;

const TARGET_TOL: f64 = 1e-8;
const CONFORMAL_SPREAD_TOL: f64 = 1e-3;

/// `dF_x` expressed on a tangent frame: column `j` is `dF(e_j)`.
#[derive(Debug, Clone)]
pub struct MapDifferential {
    pub base: SpherePoint,
    pub frame: TangentFrame,
    pub matrix: Matrix,
}

impl MapDifferential {
    /// `|dF_x|² / 2`.
    pub fn energy_density(&self) -> f64 {
        0.5 * self.matrix.norm_squared()
    }

    /// Singular values in decreasing order, from the Gram matrix `dFᵀ dF`.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = self.matrix.tr_mul(&self.matrix);
        let mut vals = if gram.nrows() == 2 {
            let (a, b, d) = (gram[(0, 0)], gram[(0, 1)], gram[(1, 1)]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mid + rad, mid - rad]
        } else {
            SymmetricEigen::new(gram).eigenvalues.iter().copied().collect()
        };
        vals.iter_mut().for_each(|v| *v = v.max(0.0).sqrt());
        vals.sort_by(|a, b| b.total_cmp(a));
        vals
    }

    fn require_surface(&self) -> Result<()> {
        if self.matrix.ncols() != 2 {
            return Err(Error::arg(format!(
                "area density needs a 2-dimensional domain, got {}",
                self.matrix.ncols()
            )));
        }
        Ok(())
    }

    /// `sqrt(det(dFᵀ dF))` for surface domains.
    pub fn area_density(&self) -> Result<f64> {
        self.require_surface()?;
        let gram = self.matrix.tr_mul(&self.matrix);
        let det = gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)];
        Ok(det.max(0.0).sqrt())
    }

    /// Energy density minus area density, `(s₁ - s₂)²/2`.
    pub fn conformal_defect(&self) -> Result<f64> {
        self.require_surface()?;
        let s = self.singular_values();
        Ok(0.5 * (s[0] - s[1]).powi(2))
    }
}

fn check_on_target(f: &SmoothMap, y: &Vector) -> Result<()> {
    let gap = f.target().distance_to_manifold(y);
    if !(gap <= TARGET_TOL) {
        return Err(Error::TargetConsistency(format!(
            "{} evaluates {gap:e} off its target",
            f.name()
        )));
    }
    Ok(())
}

/// `dF_x(v)` in the map's differential mode, without the target check.
fn derivative(f: &SmoothMap, x: &SpherePoint, fx: &Vector, v: &Vector) -> Vector {
    match f.mode() {
        DifferentialMode::Analytic => f.push(x, v),
        DifferentialMode::FiniteDifference { h } => {
            let len = v.norm();
            if len == 0.0 {
                return Vector::zeros(fx.len());
            }
            let dir = v / len;
            let fwd = f.eval(&x.geodesic(&dir, h));
            let bwd = f.eval(&x.geodesic(&dir, -h));
            f.target().project_tangent(fx, &((fwd - bwd) * (len / (2.0 * h))))
        }
    }
}

/// Differential of `f` at `x` on `frame`.
pub fn differential(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame) -> Result<MapDifferential> {
    if x.dim() != f.domain_dim() || frame.base().dim() != f.domain_dim() {
        return Err(Error::arg("point or frame does not match the map's domain"));
    }
    let fx = f.eval(x);
    check_on_target(f, &fx)?;
    let cols: Vec<Vector> = frame.vectors().iter().map(|v| derivative(f, x, &fx, v)).collect();
    Ok(MapDifferential { base: x.clone(), frame: frame.clone(), matrix: Matrix::from_columns(&cols) })
}

/// `dF_x(u)` for a single tangent vector.
pub fn directional(f: &SmoothMap, x: &SpherePoint, u: &Vector) -> Result<Vector> {
    let fx = f.eval(x);
    check_on_target(f, &fx)?;
    Ok(derivative(f, x, &fx, u))
}

pub fn energy_density(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame) -> Result<f64> {
    Ok(differential(f, x, frame)?.energy_density())
}

pub fn area_density_2d(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame) -> Result<f64> {
    if f.domain_dim() != 2 {
        return Err(Error::arg("area density requires a 2-dimensional domain"));
    }
    differential(f, x, frame)?.area_density()
}

pub fn conformal_defect_2d(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame) -> Result<f64> {
    if f.domain_dim() != 2 {
        return Err(Error::arg("conformal defect requires a 2-dimensional domain"));
    }
    differential(f, x, frame)?.conformal_defect()
}

/// Tension field `Tr(α_F)` at `x`: the tangential part of the summed
/// second derivatives of `F` along the frame geodesics, by second central
/// differences with step `h2`.
pub fn tension_field(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame, h2: f64) -> Result<Vector> {
    let fx = f.eval(x);
    check_on_target(f, &fx)?;
    let mut acc = Vector::zeros(fx.len());
    for e in frame.vectors() {
        let fwd = f.eval(&x.geodesic(e, h2));
        let bwd = f.eval(&x.geodesic(e, -h2));
        acc += (fwd + bwd - &fx * 2.0) / (h2 * h2);
    }
    Ok(f.target().project_tangent(&fx, &acc))
}

/// Log of the common singular value, from the energy density.
fn log_conformal_factor(f: &SmoothMap, x: &SpherePoint) -> Result<f64> {
    let e = energy_density(f, x, &TangentFrame::standard(x))?;
    Ok(0.5 * (2.0 * e / f.domain_dim() as f64).ln())
}

/// Norm of `Tr(α_F) - (2 - n)·F_*(∇η)` for a conformal map with
/// `F*g = e^{2η} h` whose image fills the target (vanishing mean curvature).
pub fn conformal_residual(f: &SmoothMap, x: &SpherePoint, frame: &TangentFrame) -> Result<f64> {
    let d = differential(f, x, frame)?;
    let s = d.singular_values();
    let spread = s[0] - s[s.len() - 1];
    if spread > CONFORMAL_SPREAD_TOL {
        return Err(Error::Precondition(format!("map is not conformal at the probe (spread {spread:e})")));
    }
    let n = f.domain_dim() as f64;
    let h = FD_STEP;
    let mut grad_push = Vector::zeros(d.matrix.nrows());
    for (j, e) in frame.vectors().iter().enumerate() {
        let deta = (log_conformal_factor(f, &x.geodesic(e, h))?
            - log_conformal_factor(f, &x.geodesic(e, -h))?)
            / (2.0 * h);
        grad_push.axpy(deta, &d.matrix.column(j).into_owned(), 1.0);
    }
    let tension = tension_field(f, x, frame, SECOND_FD_STEP)?;
    Ok((tension - grad_push * (2.0 - n)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{random_isometry, sample_uniform_sphere};
    use crate::maps::{constant, dilation, graph, identity, inclusion, polar_warp};

    fn probe(n: usize, seed: u64, i: u64) -> (SpherePoint, TangentFrame) {
        let x = sample_uniform_sphere(n, seed, i);
        let frame = TangentFrame::standard(&x);
        (x, frame)
    }

    #[test]
    fn identity_differential_is_isometric() {
        let f = identity(2).unwrap().with_mode(DifferentialMode::FiniteDifference { h: FD_STEP });
        for i in 0..50 {
            let (x, frame) = probe(2, 1, i);
            let s = differential(&f, &x, &frame).unwrap().singular_values();
            assert!((s[0] - 1.0).abs() < 1e-7 && (s[1] - 1.0).abs() < 1e-7, "{s:?}");
        }
    }

    #[test]
    fn constant_map_has_zero_differential() {
        for mode in [DifferentialMode::Analytic, DifferentialMode::FiniteDifference { h: FD_STEP }] {
            let f = constant(3).unwrap().with_mode(mode);
            let (x, frame) = probe(3, 2, 0);
            let d = differential(&f, &x, &frame).unwrap();
            assert!(d.matrix.abs().max() < 1e-7);
            assert_eq!(energy_density(&f, &x, &frame).unwrap(), 0.0);
        }
    }

    #[test]
    fn dilation_at_fixed_point_scales_by_t() {
        let pole = SpherePoint::basis(2, 0);
        let frame = TangentFrame::standard(&pole);
        for mode in [DifferentialMode::Analytic, DifferentialMode::FiniteDifference { h: FD_STEP }] {
            let f = dilation(2, 2.0).unwrap().with_mode(mode);
            let d = differential(&f, &pole, &frame).unwrap();
            let s = d.singular_values();
            assert!((s[0] - 2.0).abs() < 1e-6 && (s[1] - 2.0).abs() < 1e-6, "{s:?}");
            // t² with t = 2
            assert!((d.energy_density() - 4.0).abs() < 1e-6);
        }
    }

    #[test]
    fn energy_density_examples() {
        let f = identity(3).unwrap();
        let (x, frame) = probe(3, 3, 0);
        assert!((energy_density(&f, &x, &frame).unwrap() - 1.5).abs() < 1e-12);
        let g = graph(&identity(2).unwrap(), 0.4).unwrap();
        let (x, frame) = probe(2, 3, 1);
        assert!((energy_density(&g, &x, &frame).unwrap() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn energy_density_is_frame_independent() {
        let f = polar_warp(3, 2.0).unwrap();
        for i in 0..100 {
            let (x, frame) = probe(3, 4, i);
            let q = random_isometry(2, 5, i);
            let rotated = frame.rotated(&q).unwrap();
            let a = energy_density(&f, &x, &frame).unwrap();
            let b = energy_density(&f, &x, &rotated).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn area_density_examples() {
        let (x, frame) = probe(2, 6, 0);
        assert!((area_density_2d(&identity(2).unwrap(), &x, &frame).unwrap() - 1.0).abs() < 1e-12);
        let degenerate = MapDifferential {
            base: x.clone(),
            frame: frame.clone(),
            matrix: Matrix::from_columns(&[
                Vector::from_vec(vec![0.0, 2.0, 0.0]),
                Vector::zeros(3),
            ]),
        };
        assert_eq!(degenerate.area_density().unwrap(), 0.0);
        assert!((degenerate.energy_density() - 2.0).abs() < 1e-15);
        assert!((degenerate.conformal_defect().unwrap() - 2.0).abs() < 1e-15);
        let (y, yframe) = probe(3, 6, 1);
        assert!(matches!(
            area_density_2d(&identity(3).unwrap(), &y, &yframe),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn area_never_exceeds_energy_on_surfaces() {
        let maps = [
            identity(2).unwrap(),
            polar_warp(2, 2.0).unwrap(),
            dilation(2, 5.0).unwrap(),
            inclusion(2, 4).unwrap(),
            graph(&polar_warp(2, 2.0).unwrap(), 0.3).unwrap(),
        ];
        for f in &maps {
            for i in 0..500 {
                let (x, frame) = probe(2, 7, i);
                let d = differential(f, &x, &frame).unwrap();
                assert!(d.area_density().unwrap() <= d.energy_density() + 1e-8);
                assert!(d.conformal_defect().unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn isometric_inclusion_is_conformal() {
        let f = inclusion(2, 5).unwrap();
        for i in 0..100 {
            let (x, frame) = probe(2, 8, i);
            assert!(conformal_defect_2d(&f, &x, &frame).unwrap() < 1e-12);
        }
    }

    #[test]
    fn harmonic_maps_have_vanishing_tension() {
        let maps = [identity(3).unwrap(), inclusion(1, 2).unwrap(), dilation(2, 2.0).unwrap()];
        for f in &maps {
            for i in 0..100 {
                let (x, frame) = probe(f.domain_dim(), 9, i);
                let tau = tension_field(f, &x, &frame, SECOND_FD_STEP).unwrap();
                assert!(tau.norm() < 1e-4, "{}: {:e}", f.name(), tau.norm());
            }
        }
        // a polar warp is not harmonic
        let w = polar_warp(2, 2.0).unwrap();
        let (x, frame) = probe(2, 9, 0);
        assert!(tension_field(&w, &x, &frame, SECOND_FD_STEP).unwrap().norm() > 1e-2);
    }

    #[test]
    fn strong_dilations_need_a_finer_second_difference() {
        // truncation error grows like h²t⁴ near the fixed point
        let f = dilation(2, 10.0).unwrap();
        let worst = |h: f64| {
            (0..200)
                .map(|i| {
                    let (x, frame) = probe(2, 12, i);
                    tension_field(&f, &x, &frame, h).unwrap().norm()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (worst(SECOND_FD_STEP), worst(1e-4));
        assert!(fine < 1e-4, "{fine:e}");
        assert!(coarse > 10.0 * fine);
    }

    #[test]
    fn conformal_residual_vanishes_for_dilations() {
        let f = dilation(3, 2.0).unwrap();
        for i in 0..50 {
            let (x, frame) = probe(3, 10, i);
            assert!(conformal_residual(&f, &x, &frame).unwrap() < 1e-3);
            // the gradient term is genuinely nonzero in dimension 3
            assert!(tension_field(&f, &x, &frame, SECOND_FD_STEP).unwrap().norm() > 1e-3);
        }
        let (x, frame) = probe(3, 10, 99);
        assert!(conformal_residual(&identity(3).unwrap(), &x, &frame).unwrap() < 1e-6);
        let (x, frame) = probe(2, 10, 7);
        assert!(conformal_residual(&dilation(2, 2.0).unwrap(), &x, &frame).unwrap() < 1e-3);
        let w = polar_warp(3, 2.0).unwrap();
        assert!(matches!(conformal_residual(&w, &x_off_equator(), &TangentFrame::standard(&x_off_equator())),
            Err(Error::Precondition(_))));
    }

    fn x_off_equator() -> SpherePoint {
        SpherePoint::normalize(Vector::from_vec(vec![0.5, 0.5, 0.5, 0.5])).unwrap()
    }

    #[test]
    fn off_target_evaluation_is_reported() {
        use crate::maps::{catalog::constant_value, EmbeddedTarget};
        let bad = constant_value(2, EmbeddedTarget::sphere(2), Vector::from_vec(vec![2.0, 0.0, 0.0]));
        let (x, frame) = probe(2, 11, 0);
        assert!(matches!(differential(&bad, &x, &frame), Err(Error::TargetConsistency(_))));
        assert!(SmoothMap::linear(Matrix::identity(3, 3) * 2.0).is_err());
    }
}
