//! The unitary SO(3) action on spin fields, realized on coefficients.
//!
//! The rotate of a field, `(f^R)(p) = f(Rp)` in the scalar case, acts on
//! each degree-l coefficient block by the same Wigner matrix for every spin:
//! the raising operator is diagonal with an m-independent constant on each
//! block and commutes with the action, so the matrix is fixed by the s = 0
//! case.  Only chart-independent quantities (coefficients, moduli) are
//! exposed; chart phase bookkeeping is deliberately avoided.

use num_complex::Complex64;

use crate::harmonics::field::SpinField;
use crate::harmonics::wigner::wigner_d_matrices;
use crate::sphere::Rotation;

/// Coefficients of the rotate `f^R` (values of `f^R` at `p` match values of
/// `f` at `Rp` up to chart phase; moduli match exactly).
pub fn rotate_field(rotation: &Rotation, field: &SpinField) -> SpinField {
    if field.coeffs().is_empty() {
        return field.clone();
    }
    let (alpha, beta, gamma) = rotation.euler_zyz();
    let mats = wigner_d_matrices(field.lmax() as i64, beta);
    let mut out = SpinField::zero(field.spin(), field.lmax());
    let lmin = field.lmin();
    for l in lmin..=field.lmax() {
        let li = l as i64;
        let n = 2 * l + 1;
        let d = &mats[l];
        // a'_{m'} = e^{i m' gamma} sum_m d^l_{m, m'} e^{i m alpha} a_m
        let pre: Vec<Complex64> = (-li..=li)
            .map(|m| field.get(l, m) * Complex64::new(0.0, m as f64 * alpha).exp())
            .collect();
        for mp in -li..=li {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in -li..=li {
                let dv = d[(m + li) as usize * n + (mp + li) as usize];
                acc += pre[(m + li) as usize] * dv;
            }
            acc *= Complex64::new(0.0, mp as f64 * gamma).exp();
            out.set(l, mp, acc).expect("in range");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::eth::eth_spectral;
    use crate::harmonics::sylm::eval_field_at;
    use crate::sphere::{rotate_point, UnitPoint};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn identity_rotation_is_identity_on_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let f = SpinField::random(2, 8, &mut rng);
        let g = rotate_field(&Rotation::identity(), &f);
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn action_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for spin in [-2i32, 0, 1] {
            let f = SpinField::random(spin, 10, &mut rng);
            let r = Rotation::from_euler_zyz(0.7, 1.9, -2.2);
            let g = rotate_field(&r, &f);
            assert!((f.norm() - g.norm()).abs() < 1e-12 * f.norm());
        }
    }

    #[test]
    fn scalar_rotation_matches_pointwise_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let f = SpinField::random(0, 8, &mut rng);
        let r = Rotation::from_euler_zyz(-1.2, 0.8, 0.3);
        let g = rotate_field(&r, &f);
        for _ in 0..20 {
            let p = UnitPoint::new(rng.gen_range(0.1..PI - 0.1), rng.gen_range(-PI..PI)).unwrap();
            let lhs = eval_field_at(&g, &p).unwrap();
            let rhs = eval_field_at(&f, &rotate_point(&r, &p)).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn moduli_are_chart_independent_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for spin in [1i32, 2, -2] {
            let f = SpinField::random(spin, 8, &mut rng);
            let r = Rotation::from_euler_zyz(0.9, 1.1, 2.4);
            let g = rotate_field(&r, &f);
            for _ in 0..20 {
                let p =
                    UnitPoint::new(rng.gen_range(0.1..PI - 0.1), rng.gen_range(-PI..PI)).unwrap();
                let rp = rotate_point(&r, &p);
                if rp.is_pole() {
                    continue;
                }
                let lhs = eval_field_at(&g, &p).unwrap().norm();
                let rhs = eval_field_at(&f, &rp).unwrap().norm();
                assert!((lhs - rhs).abs() < 1e-8, "spin {spin}: |{lhs}| vs |{rhs}|");
            }
        }
    }

    #[test]
    fn raising_commutes_with_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for spin in [0i32, 1, -2] {
            let f = SpinField::random(spin, 9, &mut rng);
            let r = Rotation::from_euler_zyz(2.0, 0.6, -0.4);
            let a = eth_spectral(&rotate_field(&r, &f));
            let b = rotate_field(&r, &eth_spectral(&f));
            let mut diff: f64 = 0.0;
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                diff += (x - y).norm_sqr();
            }
            assert!(diff.sqrt() < 1e-10, "spin {spin}: {}", diff.sqrt());
        }
    }
}
