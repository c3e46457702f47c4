//! The admissibility scale sum `S_f(u) = sum_j |f(a^{2j} u)|^2` and its
//! extremal bounds `0 < A_a <= S_f <= B_a < infinity`.
//!
//! The sum is invariant under `u -> a^2 u`, so the bounds are the extrema of
//! `S_f` over one multiplicative period `[1, a^2)`.  Truncated tails are
//! certified from the profile's decay metadata: the dropped terms are
//! dominated by geometric series on both ends.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::profile::FilterProfile;
use crate::sphere::quadrature::pairwise_sum;

/// Result of a truncated scale sum with a certified bound on what was
/// dropped.
#[derive(Clone, Copy, Debug)]
pub struct ScaleSum {
    pub value: f64,
    pub tail_bound: f64,
    pub j_lo: i64,
    pub j_hi: i64,
}

/// Extremal bounds of the scale sum for base `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DaubechiesBounds {
    pub a: f64,
    pub lower: f64,
    pub upper: f64,
    pub scan_resolution: usize,
    pub j_lo: i64,
    pub j_hi: i64,
}

impl DaubechiesBounds {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

/// Default truncation range: every dropped term is below 1e-16.
pub fn default_j_range(f: &FilterProfile, a: f64, u_min: f64, u_max: f64) -> (i64, i64) {
    let term = 1e-8; // |f| threshold; squared term then below 1e-16
    let lo_supp = f.support_lo(term);
    let hi_supp = f.support_hi(term);
    let a2 = a * a;
    let j_lo = log_base(lo_supp / u_max, a2).floor() as i64;
    let j_hi = log_base(hi_supp / u_min, a2).ceil() as i64;
    (j_lo, j_hi)
}

/// Certified bound on `sum_{j > j_hi} f(a^{2j} u)^2 + sum_{j < j_lo} ...`.
fn tail_bound(f: &FilterProfile, a: f64, u: f64, j_lo: i64, j_hi: i64) -> f64 {
    let d = f.decay();
    let a2 = a * a;
    // upper tail: |f(v)| <= coeff (1+v)^{-N} <= coeff v^{-N}
    let v_hi = crate::sphere::partition::powi_f(a2, j_hi + 1) * u;
    let n2 = 2 * d.order as i32;
    let ratio_hi = a2.powi(-n2);
    let hi = if d.support_end.is_some_and(|end| v_hi >= end) {
        0.0
    } else if v_hi > 1.0 {
        d.coeff * d.coeff * v_hi.powi(-n2) / (1.0 - ratio_hi)
    } else {
        f64::INFINITY
    };
    // lower tail: |f(v)| <= vanish_coeff v^p, certified for v <= 1
    let v_lo = crate::sphere::partition::powi_f(a2, j_lo - 1) * u;
    let p2 = 2 * d.vanish_order as i32;
    let ratio_lo = a2.powi(-p2);
    let lo = if v_lo <= 1.0 {
        d.vanish_coeff * d.vanish_coeff * v_lo.powi(p2) / (1.0 - ratio_lo)
    } else {
        f64::INFINITY
    };
    hi + lo
}

/// Truncated scale sum over `j in [j_lo, j_hi]` with certified tails.
/// Errors when the certificate exceeds 1e-14.
pub fn squared_scale_sum(
    f: &FilterProfile,
    a: f64,
    u: f64,
    j_lo: i64,
    j_hi: i64,
) -> Result<ScaleSum> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("base a={a} must exceed 1")));
    }
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("u={u} must be positive")));
    }
    let tail = tail_bound(f, a, u, j_lo, j_hi);
    if !(tail < 1e-14) {
        return Err(Error::TailNotCertifiable {
            j_lo,
            j_hi,
            bound: tail,
            required: 1e-14,
        });
    }
    let a2 = a * a;
    let terms: Vec<f64> = (j_lo..=j_hi)
        .map(|j| {
            let v = crate::sphere::partition::powi_f(a2, j) * u;
            let fv = f.eval(v);
            fv * fv
        })
        .collect();
    Ok(ScaleSum {
        value: pairwise_sum(&terms),
        tail_bound: tail,
        j_lo,
        j_hi,
    })
}

/// Convenience: scale sum with the default certified range.
pub fn scale_sum_auto(f: &FilterProfile, a: f64, u: f64) -> Result<ScaleSum> {
    let (j_lo, j_hi) = default_j_range(f, a, u, u);
    squared_scale_sum(f, a, u, j_lo, j_hi)
}

/// Computes `A_a` and `B_a` by a log-uniform scan of one period `[1, a^2)`
/// refined by golden-section search near each extremum.  Errors when the
/// scanned minimum drops below 1e-12 (the profile fails admissibility
/// numerically for this base).
pub fn daubechies_bounds(
    f: &FilterProfile,
    a: f64,
    resolution: usize,
) -> Result<DaubechiesBounds> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("base a={a} must exceed 1")));
    }
    let resolution = resolution.max(8);
    let a2 = a * a;
    // one shared range covers u in [1/a^2, a^4] for scan + refinement
    let (j_lo, j_hi) = default_j_range(f, a, 1.0 / a2, a2 * a2);
    let ln_a2 = a2.ln();
    let values: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let u = (ln_a2 * i as f64 / resolution as f64).exp();
            squared_scale_sum(f, a, u, j_lo, j_hi)
                .map(|s| s.value)
                .unwrap_or(f64::NAN)
        })
        .collect();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::TailNotCertifiable {
            j_lo,
            j_hi,
            bound: f64::NAN,
            required: 1e-14,
        });
    }
    let (mut i_min, mut i_max) = (0usize, 0usize);
    for (i, v) in values.iter().enumerate() {
        if *v < values[i_min] {
            i_min = i;
        }
        if *v > values[i_max] {
            i_max = i;
        }
    }

    // golden-section refinement in log u around a bracket; the function is
    // evaluated directly (periodicity keeps out-of-period arguments valid)
    let eval = |x: f64| -> f64 {
        let u = x.exp();
        squared_scale_sum(f, a, u, j_lo, j_hi)
            .map(|s| s.value)
            .unwrap_or(f64::NAN)
    };
    let refine = |idx: usize, want_max: bool| -> f64 {
        let step = ln_a2 / resolution as f64;
        let center = step * idx as f64;
        let mut lo = center - step;
        let mut hi = center + step;
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - gr * (hi - lo);
        let mut d = lo + gr * (hi - lo);
        let mut fc = eval(c);
        let mut fd = eval(d);
        for _ in 0..120 {
            let (vc, vd) = if want_max { (-fc, -fd) } else { (fc, fd) };
            if vc < vd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = eval(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = eval(d);
            }
        }
        let mid = eval(0.5 * (lo + hi));
        if want_max {
            mid.max(fc).max(fd)
        } else {
            mid.min(fc).min(fd)
        }
    };
    let lower = refine(i_min, false).min(values[i_min]);
    let upper = refine(i_max, true).max(values[i_max]);
    if !(lower >= 1e-12) {
        return Err(Error::AdmissibilityFailure {
            min: lower,
            threshold: 1e-12,
        });
    }
    Ok(DaubechiesBounds {
        a,
        lower,
        upper,
        scan_resolution: resolution,
        j_lo,
        j_hi,
    })
}
