use super::{SpherePoint, TangentFrame};
use crate::{Error, Matrix, Result, Vector};

/// Stereographic chart of `S^n` centred at `pole`, projecting from `-pole`.
///
/// Normalized so that `pole ↦ 0` and the equator `⟨x, pole⟩ = 0` maps onto
/// the unit sphere of `R^n`. Chart coordinates are taken in a fixed
/// orthonormal basis of `pole^⊥` (the [`TangentFrame::standard`] frame).
#[derive(Debug, Clone)]
pub struct StereographicChart {
    pole: SpherePoint,
    basis: Matrix,
}

impl StereographicChart {
    /// Inputs closer than this to `-pole` are outside the chart.
    pub const ANTIPODE_TOL: f64 = 1e-8;

    pub fn new(pole: &SpherePoint) -> Self {
        let basis = TangentFrame::standard(pole).as_matrix();
        StereographicChart { pole: pole.clone(), basis }
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    /// Columns form an orthonormal basis of `pole^⊥`.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_antipodal(&self, x: &SpherePoint) -> bool {
        (x.coords() + self.pole.coords()).norm() < Self::ANTIPODE_TOL
    }

    pub fn forward(&self, x: &SpherePoint) -> Result<Vector> {
        if x.dim() != self.dim() {
            return Err(Error::arg("point dimension does not match chart"));
        }
        if self.is_antipodal(x) {
            return Err(Error::Domain("stereographic projection undefined at -pole".into()));
        }
        let s = x.dot(&self.pole);
        Ok(self.basis.tr_mul(x.coords()) / (1.0 + s))
    }

    pub fn inverse(&self, y: &Vector) -> SpherePoint {
        let rho2 = y.norm_squared();
        let mut x = &self.basis * y * 2.0;
        x.axpy(1.0 - rho2, self.pole.coords(), 1.0);
        x /= 1.0 + rho2;
        // renormalize away rounding
        let norm = x.norm();
        SpherePoint::from_unit_unchecked(x / norm)
    }

    /// Differential of [`forward`](Self::forward) at `x` applied to the
    /// tangent vector `v`.
    pub fn forward_push(&self, x: &SpherePoint, v: &Vector) -> Vector {
        let s = x.dot(&self.pole);
        let ds = v.dot(self.pole.coords());
        let denom = 1.0 + s;
        let mut out = self.basis.tr_mul(v) / denom;
        out.axpy(-ds / (denom * denom), &self.basis.tr_mul(x.coords()), 1.0);
        out
    }

    /// Differential of [`inverse`](Self::inverse) at `y` applied to `w`.
    pub fn inverse_push(&self, y: &Vector, w: &Vector) -> Vector {
        let rho2 = y.norm_squared();
        let d = 1.0 + rho2;
        let yw = y.dot(w);
        let by = &self.basis * y;
        let bw = &self.basis * w;
        let p = self.pole.coords();
        // numerator N = (1-ρ²)p + 2By, dN = -2<y,w>p + 2Bw
        let mut out = bw * (2.0 / d);
        out.axpy(-2.0 * yw / d, p, 1.0);
        let scale = -2.0 * yw / (d * d);
        out.axpy(scale * (1.0 - rho2), p, 1.0);
        out.axpy(scale * 2.0, &by, 1.0);
        out
    }
}
