//! Points and rotations on the unit sphere.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point on S² in standard spherical coordinates.
///
/// `theta` is the colatitude in `[0, pi]`, `phi` the longitude canonicalized
/// to `[-pi, pi)`.  At the poles the longitude is fixed to `0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitPoint {
    theta: f64,
    phi: f64,
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_phi(phi: f64) -> f64 {
    let mut p = (phi + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2*pi for inputs just below -pi due to rounding
    if p >= PI {
        p -= 2.0 * PI;
    }
    p
}

impl UnitPoint {
    /// Creates a canonicalized point. `theta` outside `[0, pi]` by more than
    /// 1e-12 or non-finite input is rejected.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite point ({theta}, {phi})"
            )));
        }
        if theta < -1e-12 || theta > PI + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "colatitude {theta} outside [0, pi]"
            )));
        }
        let theta = theta.clamp(0.0, PI);
        let phi = if theta == 0.0 || theta == PI {
            0.0
        } else {
            wrap_phi(phi)
        };
        Ok(Self { theta, phi })
    }

    pub fn north_pole() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn south_pole() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_pole(&self) -> bool {
        self.theta == 0.0 || self.theta == PI
    }

    /// Cartesian coordinates (x, y, z) of the point.
    pub fn to_vec(&self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [st * cp, st * sp, ct]
    }

    /// Point from a (not necessarily normalized) direction vector.
    pub fn from_vec(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("zero or non-finite direction".into()));
        }
        let z = (v[2] / n).clamp(-1.0, 1.0);
        let rho = (v[0] * v[0] + v[1] * v[1]).sqrt() / n;
        let theta = rho.atan2(z);
        let phi = if rho == 0.0 { 0.0 } else { v[1].atan2(v[0]) };
        Self::new(theta, phi)
    }
}

/// Geodesic (great-circle) distance between two points, in `[0, pi]`.
///
/// Uses the atan2 form, which stays accurate for nearly coincident and
/// nearly antipodal pairs.
pub fn geodesic_distance(p: &UnitPoint, q: &UnitPoint) -> f64 {
    let a = p.to_vec();
    let b = q.to_vec();
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    cross.atan2(dot)
}

/// A rotation of S², stored as a 3x3 special orthogonal matrix (row major).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Builds a rotation from a matrix, verifying `R^T R = I` and `det R = 1`
    /// to 1e-12.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Self { m };
        let mut max_dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for k in 0..3 {
                    dot += m[k][i] * m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((dot - target).abs());
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if max_dev > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not special orthogonal (orthogonality defect {max_dev:.2e}, det {det})"
            )));
        }
        Ok(r)
    }

    /// Rotation from z-y-z Euler angles: `R = Rz(alpha) Ry(beta) Rz(gamma)`.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        let (sg, cg) = gamma.sin_cos();
        Self {
            m: [
                [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
                [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
                [-sb * cg, sb * sg, cb],
            ],
        }
    }

    /// z-y-z Euler angles `(alpha, beta, gamma)` with `beta` in `[0, pi]`.
    pub fn euler_zyz(&self) -> (f64, f64, f64) {
        let m = &self.m;
        let cb = m[2][2].clamp(-1.0, 1.0);
        let sb = (m[0][2] * m[0][2] + m[1][2] * m[1][2]).sqrt();
        if sb < 1e-14 {
            // beta ~ 0 or pi: alpha and gamma degenerate, fold into alpha
            if cb > 0.0 {
                (m[1][0].atan2(m[0][0]), 0.0, 0.0)
            } else {
                (m[1][0].atan2(m[0][0]), PI, 0.0)
            }
        } else {
            let beta = sb.atan2(cb);
            let alpha = m[1][2].atan2(m[0][2]);
            let gamma = m[2][1].atan2(-m[2][0]);
            (alpha, beta, gamma)
        }
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += self.m[i][k] * other.m[k][j];
                }
            }
        }
        Self { m: out }
    }

    pub fn apply_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

/// Applies a rotation to a point and canonicalizes the result.
pub fn rotate_point(r: &Rotation, p: &UnitPoint) -> UnitPoint {
    // from_vec cannot fail on a rotated unit vector
    UnitPoint::from_vec(r.apply_vec(p.to_vec())).expect("rotation of a unit vector is a unit vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> UnitPoint {
        // area-uniform sampling
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(-PI..PI);
        UnitPoint::new(z.acos(), phi).unwrap()
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
        Rotation::from_euler_zyz(
            rng.gen_range(-PI..PI),
            rng.gen_range(0.0..PI),
            rng.gen_range(-PI..PI),
        )
    }

    #[test]
    fn antipodal_distance_is_pi() {
        let d = geodesic_distance(&UnitPoint::north_pole(), &UnitPoint::south_pole());
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn coincident_distance_is_zero() {
        let p = UnitPoint::new(1.1, 0.4).unwrap();
        assert_eq!(geodesic_distance(&p, &p), 0.0);
    }

    #[test]
    fn equator_to_pole_is_quarter_circle() {
        let p = UnitPoint::new(PI / 2.0, 0.0).unwrap();
        let d = geodesic_distance(&p, &UnitPoint::north_pole());
        assert!((d - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let r = random_point(&mut rng);
            let pq = geodesic_distance(&p, &q);
            let pr = geodesic_distance(&p, &r);
            let rq = geodesic_distance(&r, &q);
            assert!(pq <= pr + rq + 1e-12);
            assert!((pq - geodesic_distance(&q, &p)).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_rotation_fixes_points() {
        let p = UnitPoint::new(0.8, -2.1).unwrap();
        let q = rotate_point(&Rotation::identity(), &p);
        assert!((p.theta() - q.theta()).abs() < 1e-15);
        assert!((p.phi() - q.phi()).abs() < 1e-15);
    }

    #[test]
    fn half_turn_about_z_shifts_longitude() {
        let r = Rotation::from_euler_zyz(PI, 0.0, 0.0);
        let p = UnitPoint::new(PI / 2.0, 0.0).unwrap();
        let q = rotate_point(&r, &p);
        assert!((q.theta() - PI / 2.0).abs() < 1e-12);
        // pi wraps to -pi under the [-pi, pi) canonicalization
        assert!((q.phi() - (-PI)).abs() < 1e-12);
    }

    #[test]
    fn rotations_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rot = random_rotation(&mut rng);
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let before = geodesic_distance(&p, &q);
            let after = geodesic_distance(&rotate_point(&rot, &p), &rotate_point(&rot, &q));
            assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let r = random_rotation(&mut rng);
            let (a, b, g) = r.euler_zyz();
            let r2 = Rotation::from_euler_zyz(a, b, g);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r.matrix()[i][j] - r2.matrix()[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn from_matrix_rejects_non_orthogonal() {
        let m = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Rotation::from_matrix(m).is_err());
    }

    #[test]
    fn poles_canonicalize_longitude() {
        let p = UnitPoint::new(0.0, 2.3).unwrap();
        assert_eq!(p.phi(), 0.0);
        let p = UnitPoint::new(PI, -1.0).unwrap();
        assert_eq!(p.phi(), 0.0);
    }
}
