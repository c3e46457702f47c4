//! Pointwise evaluation of spin-weighted spherical harmonics.
//!
//! The working convention, pinned here and enforced by the operator tests:
//!
//! `sYlm(theta, phi) = (-1)^m sqrt((2l+1)/(4 pi)) d^l_{-m,s}(theta) e^{i m phi}`
//!
//! With this normalization the family is orthonormal, `0Ylm` is the standard
//! Condon–Shortley `Ylm`, the spin-raising operator acts as
//! `eth sYlm = +sqrt((l-s)(l+s+1)) (s+1)Ylm`, and spin lowering as
//! `ethbar sYlm = -sqrt((l+s)(l-s+1)) (s-1)Ylm`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::field::SpinField;
use crate::harmonics::wigner::wigner_d_column;
use crate::sphere::UnitPoint;

#[inline]
pub fn sylm_normalization(l: usize) -> f64 {
    ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt()
}

fn check_pole(spin: i32, p: &UnitPoint) -> Result<()> {
    if spin != 0 && p.is_pole() {
        return Err(Error::PoleEvaluation {
            spin,
            theta: p.theta(),
        });
    }
    Ok(())
}

/// Fills `out[l - l0]` with the theta-dependent real factor
/// `(-1)^m sqrt((2l+1)/4pi) d^l_{-m,s}(theta)` for
/// `l = l0 ..= lmax`, `l0 = max(|m|, |s|)`.
pub fn sylm_theta_column(spin: i32, m: i64, lmax: usize, theta: f64, out: &mut Vec<f64>) {
    wigner_d_column(-m, spin as i64, lmax as i64, theta, out);
    let l0 = m.unsigned_abs().max(spin.unsigned_abs() as u64) as usize;
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    for (i, v) in out.iter_mut().enumerate() {
        *v *= sign * sylm_normalization(l0 + i);
    }
}

/// Value of the fixed-chart trivialization of `sYlm` at a point.
///
/// Errors on `l < |s|` or `|m| > l`, and on pole evaluation for `s != 0`
/// (the fixed chart excludes the poles for nonzero spin).
pub fn eval_sylm(spin: i32, l: usize, m: i64, p: &UnitPoint) -> Result<Complex64> {
    if l < spin.unsigned_abs() as usize || m.unsigned_abs() as usize > l {
        return Err(Error::IndexOutOfRange {
            l: l as i64,
            m,
            spin,
        });
    }
    check_pole(spin, p)?;
    let mut col = Vec::new();
    sylm_theta_column(spin, m, l, p.theta(), &mut col);
    let theta_part = *col.last().expect("l >= l0 guarantees a value");
    let phase = Complex64::new(0.0, m as f64 * p.phi()).exp();
    Ok(theta_part * phase)
}

/// Pointwise synthesis `sum_{l,m} a_{lm} sYlm(p)` of a spectral field.
pub fn eval_field_at(field: &SpinField, p: &UnitPoint) -> Result<Complex64> {
    check_pole(field.spin(), p)?;
    if field.coeffs().is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lmax = field.lmax() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut col = Vec::new();
    for m in -lmax..=lmax {
        let l0 = m.unsigned_abs().max(field.spin().unsigned_abs() as u64) as usize;
        sylm_theta_column(field.spin(), m, field.lmax(), p.theta(), &mut col);
        let mut g = Complex64::new(0.0, 0.0);
        for (i, v) in col.iter().enumerate() {
            g += field.get(l0 + i, m) * v;
        }
        acc += g * Complex64::new(0.0, m as f64 * p.phi()).exp();
    }
    Ok(acc)
}
