//! Dual-frame reconstruction by preconditioned conjugate gradients.
//!
//! Given coefficients `beta = <F, phi_{j,k}>`, the field is recovered from
//! `S F = sum beta phi_{j,k}`: the right-hand side is assembled by
//! coefficient synthesis, and `S` (Hermitian, positive definite on the
//! band-limited null complement when the lower frame bound is positive) is
//! inverted by CG with the diagonal spectral preconditioner `1/q_l`, `q_l`
//! the truncated scale sum (exactly the multiplier of `Q`, for which `S` is
//! a perturbation).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::operator::{coefficient_synthesis, frame_operator_apply, FrameCoefficients};
use crate::frames::spec::FrameSpec;
use crate::harmonics::eth::project_null_complement;
use crate::harmonics::field::SpinField;

/// Outcome of a reconstruction solve.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub field: SpinField,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn precondition(residual: &SpinField, spec: &FrameSpec) -> SpinField {
    let lmin = spec.lmin();
    residual.apply_degree_multiplier(|l| {
        let q = spec.q_multiplier()[l - lmin];
        if q > 0.0 {
            1.0 / q
        } else {
            0.0
        }
    })
}

/// Solves `S F = sum_{j,k} beta_{j,k} phi_{j,k}` to relative residual `tol`.
pub fn reconstruct(
    coeffs: &FrameCoefficients,
    spec: &FrameSpec,
    tol: f64,
    max_iter: usize,
) -> Result<Reconstruction> {
    let rhs = project_null_complement(&coefficient_synthesis(coeffs, spec)?);
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(Reconstruction {
            field: SpinField::zero(spec.spin(), spec.lmax()),
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut x = SpinField::zero(spec.spin(), spec.lmax());
    let mut r = rhs.clone();
    let mut z = precondition(&r, spec);
    let mut p = z.clone();
    let mut rz = r.inner(&z)?.re;
    let mut rel = 1.0;
    for it in 0..max_iter {
        let ap = project_null_complement(&frame_operator_apply(&p, spec)?);
        let pap = p.inner(&ap)?.re;
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.axpy(Complex64::new(alpha, 0.0), &p);
        r.axpy(Complex64::new(-alpha, 0.0), &ap);
        rel = r.norm() / rhs_norm;
        if rel <= tol {
            return Ok(Reconstruction {
                field: x,
                iterations: it + 1,
                relative_residual: rel,
            });
        }
        z = precondition(&r, spec);
        let rz_new = r.inner(&z)?.re;
        let beta = rz_new / rz;
        rz = rz_new;
        let mut p_next = z.clone();
        p_next.axpy(Complex64::new(beta, 0.0), &p);
        p = p_next;
    }
    // condition estimate from the spectral multiplier spread
    let lmin = spec.lmin();
    let qs: Vec<f64> = spec.q_multiplier()[1..].to_vec();
    let qmin = qs.iter().cloned().fold(f64::INFINITY, f64::min);
    let qmax = qs.iter().cloned().fold(0.0f64, f64::max);
    let _ = lmin;
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: rel,
        condition: if qmin > 0.0 { qmax / qmin } else { f64::INFINITY },
    })
}
