//! Spin raising/lowering operators, the spin Laplacian, and the null-space
//! projector.
//!
//! Spectrally, with the convention fixed in `sylm`:
//! raising multiplies `(l, m)` by `+sqrt((l-s)(l+s+1))` and shifts the spin
//! to `s+1`; lowering multiplies by `-sqrt((l+s)(l-s+1))` and shifts to
//! `s-1`.  The signs make `Delta_s = -ethbar eth` (s >= 0) positive
//! semidefinite with eigenvalues `lambda_ls`.

use num_complex::Complex64;

use crate::error::Result;
use crate::harmonics::field::{SampledField, SpinField};
use crate::harmonics::transform::analyze;

/// Eigenvalue of the spin Laplacian on degree `l`:
/// `(l-s)(l+s+1)` for `s >= 0`, `(l+s)(l-s+1)` for `s < 0`.
/// Exact in f64 (integer-valued product of small integers).
pub fn lambda_ls(l: usize, spin: i32) -> f64 {
    let l = l as i64;
    let s = spin as i64;
    let v = if s >= 0 {
        (l - s) * (l + s + 1)
    } else {
        (l + s) * (l - s + 1)
    };
    v as f64
}

/// Spin-raising multiplier at degree `l`, spin `s`.
pub fn eth_factor(l: usize, spin: i32) -> f64 {
    let l = l as i64;
    let s = spin as i64;
    (((l - s) * (l + s + 1)) as f64).sqrt()
}

/// Spin-lowering multiplier at degree `l`, spin `s` (sign included).
pub fn eth_bar_factor(l: usize, spin: i32) -> f64 {
    let l = l as i64;
    let s = spin as i64;
    -(((l + s) * (l - s + 1)) as f64).sqrt()
}

/// Spectral spin raising: output spin `s+1`; degrees below `|s+1|` drop out.
pub fn eth_spectral(field: &SpinField) -> SpinField {
    let spin = field.spin();
    let mut out = SpinField::zero(spin + 1, field.lmax());
    let lmin_out = out.lmin();
    for (l, m, c) in field.iter() {
        if l < lmin_out {
            continue;
        }
        out.set(l, m, c * eth_factor(l, spin)).expect("in range");
    }
    out
}

/// Spectral spin lowering: output spin `s-1`; degrees below `|s-1|` drop out.
pub fn eth_bar_spectral(field: &SpinField) -> SpinField {
    let spin = field.spin();
    let mut out = SpinField::zero(spin - 1, field.lmax());
    let lmin_out = out.lmin();
    for (l, m, c) in field.iter() {
        if l < lmin_out {
            continue;
        }
        out.set(l, m, c * eth_bar_factor(l, spin)).expect("in range");
    }
    out
}

/// Applies a spectral multiplier `g(lambda_ls)` coefficient-wise.  Calling
/// with `u -> f(t^2 u)` realizes the operator `f(t^2 Delta_s)`.
pub fn laplacian_apply<G: Fn(f64) -> f64>(field: &SpinField, g: G) -> SpinField {
    let spin = field.spin();
    field.apply_degree_multiplier(|l| g(lambda_ls(l, spin)))
}

/// Projection onto the null space of the spin Laplacian: keeps the `l = |s|`
/// coefficients only.
pub fn project_null(field: &SpinField) -> SpinField {
    let lmin = field.lmin();
    field.apply_degree_multiplier(|l| if l == lmin { 1.0 } else { 0.0 })
}

/// Complement `I - P`: zeroes the `l = |s|` coefficients.
pub fn project_null_complement(field: &SpinField) -> SpinField {
    let lmin = field.lmin();
    field.apply_degree_multiplier(|l| if l == lmin { 0.0 } else { 1.0 })
}

/// Dimension of the null space of the spin Laplacian.
pub fn null_space_dim(spin: i32) -> usize {
    2 * spin.unsigned_abs() as usize + 1
}

// 8th-order centered first-derivative stencil, spacing 1.
const FD9: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];

/// Numerical spin raising from grid samples via the coordinate formula
/// `eth f = -(sin t)^s (d/dt + (i/sin t) d/dphi) (sin t)^{-s} f`
/// `      = -d f/dt + s cot(t) f - (i/sin t) df/dphi`.
///
/// The phi derivative is exact through the per-ring Fourier factors; the
/// theta derivative uses an 8th-order centered difference on a local ring
/// oversampling (stencil spacing `0.3/(L+1)`, well inside the pole-free
/// zone of the grid).  The input must sample a field band-limited at the
/// grid bandlimit, so off-node ring values are recovered by synthesis of
/// the analyzed coefficients; the spin-raising algebra itself is never
/// consulted, which is what makes this an independent check of
/// `eth_spectral`.
pub fn eth_numeric(field: &SampledField) -> Result<SampledField> {
    let grid = field.grid().clone();
    let lmax = grid.bandlimit();
    let spin = field.spin();
    let coeffs = analyze(field, lmax)?;
    let li = lmax as i64;
    let n_phi = grid.n_phi();
    let h = 0.3 / (lmax as f64 + 1.0);
    let s_f = spin as f64;

    let mut values = vec![Complex64::new(0.0, 0.0); grid.sample_count()];
    let mut col = Vec::new();
    for t in 0..grid.n_theta() {
        let theta = grid.theta_nodes()[t];
        debug_assert!(theta - 4.0 * h > 0.0 && theta + 4.0 * h < std::f64::consts::PI);
        let cot = theta.cos() / theta.sin();
        let inv_sin = 1.0 / theta.sin();
        // per-order ring profiles: value, theta-derivative (FD), phi factor
        for m in -li..=li {
            let l0 = m.unsigned_abs().max(spin.unsigned_abs() as u64) as usize;
            if l0 > lmax {
                continue;
            }
            let mut g_center = Complex64::new(0.0, 0.0);
            let mut g_deriv = Complex64::new(0.0, 0.0);
            for (k, w) in FD9.iter().enumerate() {
                let th = theta + (k as f64 - 4.0) * h;
                crate::harmonics::sylm::sylm_theta_column(spin, m, lmax, th, &mut col);
                let mut g = Complex64::new(0.0, 0.0);
                for (i, v) in col.iter().enumerate() {
                    g += coeffs.get(l0 + i, m) * *v;
                }
                if k == 4 {
                    g_center = g;
                }
                if *w != 0.0 {
                    g_deriv += g * (*w / h);
                }
            }
            // eth f = -df/dtheta + s cot f - (i/sin) (im) f, per Fourier order
            let combined = -g_deriv + g_center * (s_f * cot)
                - Complex64::new(0.0, 1.0) * inv_sin * Complex64::new(0.0, m as f64) * g_center;
            for p in 0..n_phi {
                let phase = Complex64::new(0.0, m as f64 * grid.phi_nodes()[p]).exp();
                values[t * n_phi + p] += combined * phase;
            }
        }
    }
    SampledField::new(spin + 1, grid, values)
}

/// `sum_l |g(lambda_ls)|^2 (2l+1)/(4 pi)`: the squared L2 norm of a
/// spectral-multiplier kernel row (equals `K(x,x)` for `|g|^2`); used for
/// tail sizing and as the norm of the wavelet at a point.
pub fn multiplier_row_norm_sq<G: Fn(f64) -> f64>(spin: i32, lmax: usize, g: G) -> f64 {
    let lmin = spin.unsigned_abs() as usize;
    let mut acc = 0.0;
    for l in lmin..=lmax {
        let gl = g(lambda_ls(l, spin));
        acc += gl * gl * (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI);
    }
    acc
}
