use crate::{Matrix, Vector};

/// One round-sphere factor `S^dim(radius) ⊂ R^{dim+1}` of a target.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFactor {
    pub dim: usize,
    pub radius: f64,
    /// Whether the deck involution of the target negates this factor.
    pub deck_negates: bool,
}

/// A Riemannian target embedded isometrically in Euclidean space as a
/// product of round spheres.
///
/// All curvature information enters through [`project_to_manifold`] and the
/// tangent projector. The deck involution (negation on the flagged factors)
/// is the fixed-point-free isometry used to describe maps that descend to
/// projective domains.
///
/// [`project_to_manifold`]: EmbeddedTarget::project_to_manifold
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedTarget {
    factors: Vec<SphereFactor>,
}

impl EmbeddedTarget {
    /// Unit sphere `S^dim`, deck involution `y ↦ -y`.
    pub fn sphere(dim: usize) -> Self {
        Self::round_sphere(dim, 1.0)
    }

    pub fn round_sphere(dim: usize, radius: f64) -> Self {
        EmbeddedTarget { factors: vec![SphereFactor { dim, radius, deck_negates: true }] }
    }

    pub fn from_factors(factors: Vec<SphereFactor>) -> Self {
        EmbeddedTarget { factors }
    }

    /// Euclidean product embedding `self × other`.
    pub fn product(&self, other: &EmbeddedTarget) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        EmbeddedTarget { factors }
    }

    pub fn factors(&self) -> &[SphereFactor] {
        &self.factors
    }

    /// The same manifold with a different deck involution.
    pub fn with_deck(&self, negates: bool) -> Self {
        let factors =
            self.factors.iter().map(|f| SphereFactor { deck_negates: negates, ..f.clone() }).collect();
        EmbeddedTarget { factors }
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim + 1).sum()
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).sum()
    }

    /// Is this the unit sphere with antipodal deck map?
    pub fn is_unit_sphere(&self, dim: usize) -> bool {
        matches!(self.factors.as_slice(),
            [f] if f.dim == dim && f.radius == 1.0 && f.deck_negates)
    }

    fn ranges(&self) -> impl Iterator<Item = (usize, &SphereFactor)> {
        self.factors.iter().scan(0usize, |start, f| {
            let s = *start;
            *start += f.dim + 1;
            Some((s, f))
        })
    }

    /// Nearest point of the manifold (factorwise radial projection).
    pub fn project_to_manifold(&self, y: &Vector) -> Vector {
        let mut out = y.clone();
        for (start, f) in self.ranges() {
            let mut block = out.rows_mut(start, f.dim + 1);
            let norm = block.norm();
            if norm > 0.0 {
                block *= f.radius / norm;
            }
        }
        out
    }

    pub fn distance_to_manifold(&self, y: &Vector) -> f64 {
        (self.project_to_manifold(y) - y).norm()
    }

    /// Orthogonal projector onto `T_p M` as a dense matrix.
    pub fn tangent_projector(&self, p: &Vector) -> Matrix {
        let dim = self.ambient_dim();
        let mut proj = Matrix::identity(dim, dim);
        for (start, f) in self.ranges() {
            let block = p.rows(start, f.dim + 1);
            let unit = block / block.norm();
            let mut sub = proj.view_mut((start, start), (f.dim + 1, f.dim + 1));
            sub -= &unit * unit.transpose();
        }
        proj
    }

    /// Applies the tangent projector at `p` to `v` without forming it.
    pub fn project_tangent(&self, p: &Vector, v: &Vector) -> Vector {
        let mut out = v.clone();
        for (start, f) in self.ranges() {
            let block = p.rows(start, f.dim + 1);
            let norm2 = block.norm_squared();
            if norm2 == 0.0 {
                continue;
            }
            let c = block.dot(&v.rows(start, f.dim + 1)) / norm2;
            out.rows_mut(start, f.dim + 1).axpy(-c, &block, 1.0);
        }
        out
    }

    /// Deck involution.
    pub fn deck(&self, y: &Vector) -> Vector {
        let mut out = y.clone();
        for (start, f) in self.ranges() {
            if f.deck_negates {
                out.rows_mut(start, f.dim + 1).neg_mut();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_target() -> EmbeddedTarget {
        EmbeddedTarget::sphere(2).product(&EmbeddedTarget::round_sphere(1, 0.5))
    }

    #[test]
    fn projection_is_idempotent() {
        let t = product_target();
        let y = Vector::from_vec(vec![1.0, 2.0, -0.5, 3.0, 0.1]);
        let p = t.project_to_manifold(&y);
        assert!((p.rows(0, 3).norm() - 1.0).abs() < 1e-15);
        assert!((p.rows(3, 2).norm() - 0.5).abs() < 1e-15);
        assert!((t.project_to_manifold(&p) - &p).norm() < 1e-10);
        assert!(t.distance_to_manifold(&p) < 1e-15);
    }

    #[test]
    fn tangent_projector_is_symmetric_idempotent() {
        let t = product_target();
        let p = t.project_to_manifold(&Vector::from_vec(vec![0.3, -0.2, 0.9, 0.4, 0.4]));
        let proj = t.tangent_projector(&p);
        assert!((&proj - proj.transpose()).abs().max() < 1e-8);
        assert!((&proj * &proj - &proj).abs().max() < 1e-8);
        assert!((&proj * &p).norm() < 1e-12);
        let v = Vector::from_vec(vec![1.0, 0.0, 2.0, -1.0, 0.5]);
        assert!((&proj * &v - t.project_tangent(&p, &v)).norm() < 1e-12);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.ambient_dim(), 5);
    }

    #[test]
    fn deck_negates_flagged_factors() {
        let t = EmbeddedTarget::sphere(1).with_deck(false).product(&EmbeddedTarget::sphere(1));
        let y = Vector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(t.deck(&y), Vector::from_vec(vec![1.0, 0.0, 0.0, -1.0]));
    }
}
