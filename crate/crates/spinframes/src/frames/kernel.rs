//! Spectral kernels `K_t` of filtered spin Laplacians, the wavelets they
//! generate, and the frame elements built on a partition.
//!
//! With per-degree weights `w_l = f(t^2 lambda_l)`,
//!
//! `K_t(x, y) = sum_l w_l sum_m sYlm(x) conj(sYlm(y))
//!            = sum_m e^{i m (phi_x - phi_y)} sum_l w_l (2l+1)/(4 pi)
//!              d^l_{-m,s}(theta_x) d^l_{-m,s}(theta_y)`
//!
//! in the fixed chart.  The wavelet `W_{x,t}` is the field whose
//! coefficients are `conj(w_l) conj(sYlm(x))`, so its trivialization is the
//! conjugated kernel column at `x`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::FilterProfile;
use crate::frames::spec::FrameSpec;
use crate::harmonics::eth::lambda_ls;
use crate::harmonics::field::SpinField;
use crate::harmonics::sylm::sylm_normalization;
use crate::harmonics::wigner::wigner_d_column;
use crate::sphere::UnitPoint;

/// A kernel fixed by per-degree weights `w_l`, `lmin <= l <= lmax`.
#[derive(Clone, Debug)]
pub struct SpectralKernel {
    spin: i32,
    lmax: usize,
    weights: Vec<f64>,
}

impl SpectralKernel {
    /// Kernel of `f(t^2 Delta_s)` truncated at `lmax`.
    pub fn new(filter: &FilterProfile, t: f64, spin: i32, lmax: usize) -> Self {
        let lmin = spin.unsigned_abs() as usize;
        let weights = (lmin..=lmax)
            .map(|l| filter.eval(t * t * lambda_ls(l, spin)))
            .collect();
        Self { spin, lmax, weights }
    }

    pub fn from_weights(spin: i32, lmax: usize, weights: Vec<f64>) -> Result<Self> {
        let lmin = spin.unsigned_abs() as usize;
        if weights.len() != lmax + 1 - lmin {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                lmax + 1 - lmin,
                weights.len()
            )));
        }
        Ok(Self { spin, lmax, weights })
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn lmin(&self) -> usize {
        self.spin.unsigned_abs() as usize
    }

    fn check_pole(&self, p: &UnitPoint) -> Result<()> {
        if self.spin != 0 && p.is_pole() {
            return Err(Error::PoleEvaluation {
                spin: self.spin,
                theta: p.theta(),
            });
        }
        Ok(())
    }

    /// Pointwise kernel value `K(x, y)` in the fixed chart.
    pub fn eval(&self, x: &UnitPoint, y: &UnitPoint) -> Result<Complex64> {
        self.check_pole(x)?;
        self.check_pole(y)?;
        let li = self.lmax as i64;
        let si = self.spin as i64;
        let lmin = self.lmin();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut col_x = Vec::new();
        let mut col_y = Vec::new();
        for m in -li..=li {
            let l0 = m.unsigned_abs().max(si.unsigned_abs()) as usize;
            wigner_d_column(-m, si, li, x.theta(), &mut col_x);
            wigner_d_column(-m, si, li, y.theta(), &mut col_y);
            let mut radial = 0.0;
            for (i, (dx, dy)) in col_x.iter().zip(&col_y).enumerate() {
                let l = l0 + i;
                let n = sylm_normalization(l);
                radial += self.weights[l - lmin] * n * n * dx * dy;
            }
            acc += radial * Complex64::new(0.0, m as f64 * (x.phi() - y.phi())).exp();
        }
        Ok(acc)
    }

    /// Diagonal value `K(x, x) = sum_l w_l (2l+1)/(4 pi)`, independent of x.
    pub fn diagonal(&self) -> f64 {
        let lmin = self.lmin();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let l = lmin + i;
            acc += w * (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI);
        }
        acc
    }

    /// The wavelet `W_{x,t}` as a spectral field:
    /// coefficient `(l, m) = conj(w_l) conj(sYlm(x))`.
    pub fn wavelet_at(&self, x: &UnitPoint) -> Result<SpinField> {
        self.check_pole(x)?;
        let li = self.lmax as i64;
        let si = self.spin as i64;
        let lmin = self.lmin();
        let mut out = SpinField::zero(self.spin, self.lmax);
        let mut col = Vec::new();
        for m in -li..=li {
            let l0 = m.unsigned_abs().max(si.unsigned_abs()) as usize;
            crate::harmonics::sylm::sylm_theta_column(self.spin, m, self.lmax, x.theta(), &mut col);
            let phase = Complex64::new(0.0, -(m as f64) * x.phi()).exp();
            for (i, v) in col.iter().enumerate() {
                let l = l0 + i;
                out.set(l, m, self.weights[l - lmin] * v * phase)
                    .expect("in range");
            }
        }
        Ok(out)
    }

    /// Squared L2 norm of any wavelet of this kernel: `sum_l w_l^2 (2l+1)/(4 pi)`.
    pub fn wavelet_norm_sq(&self) -> f64 {
        let lmin = self.lmin();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let l = lmin + i;
            acc += w * w * (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI);
        }
        acc
    }
}

/// Certified bound on the part of `K_t(x, x)` lost to the bandlimit:
/// `sum_{l > lmax} |f(t^2 lambda_l)| (2l+1)/(4 pi)` from the decay metadata.
pub fn kernel_truncation_tail(filter: &FilterProfile, t: f64, spin: i32, lmax: usize) -> f64 {
    let d = filter.decay();
    let mut total = 0.0;
    let mut l = lmax + 1;
    loop {
        let v = t * t * lambda_ls(l, spin);
        if let Some(end) = d.support_end {
            if v >= end {
                return total;
            }
        }
        let bound = d.coeff * (1.0 + v).powi(-(d.order as i32));
        let term = bound * (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI);
        total += term;
        if term < 1e-18 * total.max(1e-300) || l > lmax + 100_000 {
            // terms decay like l^{1-2N}; by here the remainder is dominated
            return total * 1.05;
        }
        l += 1;
    }
}

/// Pointwise kernel of `f(t^2 Delta_s)` without precomputing a spec.
pub fn kernel_eval(
    filter: &FilterProfile,
    t: f64,
    spin: i32,
    lmax: usize,
    x: &UnitPoint,
    y: &UnitPoint,
) -> Result<Complex64> {
    SpectralKernel::new(filter, t, spin, lmax).eval(x, y)
}

/// The wavelet `W_{x, t}` of the spec's filter at bandlimit `spec.lmax()`.
pub fn wavelet(spec: &FrameSpec, x: &UnitPoint, t: f64) -> Result<SpinField> {
    SpectralKernel::new(spec.filter(), t, spec.spin(), spec.lmax()).wavelet_at(x)
}

/// One frame element `phi_{j,k} = sqrt(mu(E_{j,k})) W_{x_{j,k}, a^j}`.
pub fn frame_element(spec: &FrameSpec, j: i64, k: u64) -> Result<SpinField> {
    let partition = spec
        .partition(j)
        .ok_or_else(|| Error::InvalidArgument(format!("level {j} outside the spec range")))?;
    let cell = partition
        .cell(k)
        .ok_or_else(|| Error::InvalidArgument(format!("cell {k} outside level {j}")))?;
    let kernel = SpectralKernel::from_weights(
        spec.spin(),
        spec.lmax(),
        spec.level_weights(j).to_vec(),
    )?;
    let mut w = kernel.wavelet_at(&cell.center)?;
    w.scale(cell.area.sqrt());
    Ok(w)
}

/// Lazily materialized frame elements, level by level in k order.
pub fn frame_elements<'a>(
    spec: &'a FrameSpec,
) -> impl Iterator<Item = (i64, u64, Result<SpinField>)> + 'a {
    spec.levels().flat_map(move |j| {
        let total = spec.partition(j).map(|p| p.total_cells).unwrap_or(0);
        (1..=total).map(move |k| (j, k, frame_element(spec, j, k)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterProfile;
    use crate::frames::spec::LevelPolicy;
    use crate::harmonics::eth::{lambda_ls, laplacian_apply, project_null};
    use crate::harmonics::field::SpinField;
    use crate::harmonics::sylm::{eval_field_at, eval_sylm};
    use crate::sphere::quadrature::legendre_upto;
    use crate::sphere::{geodesic_distance, rotate_point, Rotation};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn small_spec() -> FrameSpec {
        FrameSpec::new(
            2,
            10,
            FilterProfile::mexican(1).unwrap(),
            1.5,
            0.4,
            0.05,
            crate::sphere::partition::DELTA0_DEFAULT,
            LevelPolicy::Auto {
                u_lo: 0.05,
                hi_threshold: 1e-18,
            },
        )
        .unwrap()
    }

    #[test]
    fn scalar_single_degree_kernel_is_legendre() {
        // an indicator filter passing only degree l0 turns the kernel into
        // the Legendre reproducing kernel (2 l0 + 1)/(4 pi) P_{l0}(cos d)
        let l0 = 5usize;
        let lmax = 10usize;
        let lam: Vec<f64> = (0..=lmax).map(|l| lambda_ls(l, 0)).collect();
        let mut pts = vec![(0.0, 0.0)];
        for l in 1..=lmax {
            pts.push((lam[l], if l == l0 { 1.0 } else { 0.0 }));
        }
        let filter = FilterProfile::tabulated(&pts).unwrap();
        let kernel = SpectralKernel::new(&filter, 1.0, 0, lmax);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..12 {
            let x = UnitPoint::new(rng.gen_range(0.2..PI - 0.2), rng.gen_range(-PI..PI)).unwrap();
            let y = UnitPoint::new(rng.gen_range(0.2..PI - 0.2), rng.gen_range(-PI..PI)).unwrap();
            let d = geodesic_distance(&x, &y);
            let want = (2.0 * l0 as f64 + 1.0) / (4.0 * PI) * legendre_upto(l0, d.cos())[l0];
            let got = kernel.eval(&x, &y).unwrap();
            assert!((got.re - want).abs() < 1e-10, "{} vs {want}", got.re);
            assert!(got.im.abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_matches_bruteforce_order_sum() {
        let filter = FilterProfile::mexican(1).unwrap();
        let t = 0.35;
        let kernel = SpectralKernel::new(&filter, t, 2, 12);
        let x = UnitPoint::new(1.1, 0.7).unwrap();
        // brute force through the full double sum over (l, m)
        let mut brute = Complex64::new(0.0, 0.0);
        for l in 2..=12usize {
            let w = filter.eval(t * t * lambda_ls(l, 2));
            for m in -(l as i64)..=l as i64 {
                let v = eval_sylm(2, l, m, &x).unwrap();
                brute += w * v * v.conj();
            }
        }
        let direct = kernel.eval(&x, &x).unwrap();
        assert!((direct - brute).norm() < 1e-10);
        assert!((direct.re - kernel.diagonal()).abs() < 1e-10);
        assert!(direct.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_modulus_is_rotation_covariant() {
        let filter = FilterProfile::mexican(1).unwrap();
        let kernel = SpectralKernel::new(&filter, 0.5, 2, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..10 {
            let x = UnitPoint::new(rng.gen_range(0.3..PI - 0.3), rng.gen_range(-PI..PI)).unwrap();
            let y = UnitPoint::new(rng.gen_range(0.3..PI - 0.3), rng.gen_range(-PI..PI)).unwrap();
            let r = Rotation::from_euler_zyz(
                rng.gen_range(-PI..PI),
                rng.gen_range(0.2..2.9),
                rng.gen_range(-PI..PI),
            );
            let (rx, ry) = (rotate_point(&r, &x), rotate_point(&r, &y));
            if rx.is_pole() || ry.is_pole() {
                continue;
            }
            let before = kernel.eval(&x, &y).unwrap().norm();
            let after = kernel.eval(&rx, &ry).unwrap().norm();
            assert!((before - after).abs() < 1e-9, "{before} vs {after}");
        }
    }

    #[test]
    fn wavelet_coefficients_follow_the_construction() {
        let spec = small_spec();
        let x = UnitPoint::new(1.3, -0.4).unwrap();
        let t = spec.scale(spec.j_min() + 1);
        let w = wavelet(&spec, &x, t).unwrap();
        for (l, m, c) in w.iter() {
            let want = spec.filter().eval(t * t * lambda_ls(l, 2))
                * eval_sylm(2, l, m, &x).unwrap().conj();
            assert!((c - want).norm() < 1e-14);
        }
        // evaluating the wavelet field reproduces the conjugate kernel column
        let kernel = SpectralKernel::new(spec.filter(), t, 2, spec.lmax());
        let y = UnitPoint::new(0.9, 1.9).unwrap();
        let lhs = eval_field_at(&w, &y).unwrap();
        let rhs = kernel.eval(&x, &y).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn wavelet_pairing_equals_filtered_field_value() {
        // <F, W_{x,t}> = (f(t^2 Delta) F)(x)
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let f = SpinField::random(2, spec.lmax(), &mut rng);
        let x = UnitPoint::new(2.0, 0.3).unwrap();
        let t = spec.scale(spec.j_min());
        let w = wavelet(&spec, &x, t).unwrap();
        let lhs = f.inner(&w).unwrap();
        let filtered = laplacian_apply(&f, |u| spec.filter().eval(t * t * u));
        let rhs = eval_field_at(&filtered, &x).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn wavelets_have_no_null_space_content() {
        let spec = small_spec();
        let x = UnitPoint::new(0.8, 2.2).unwrap();
        let w = wavelet(&spec, &x, spec.scale(0.min(spec.j_max()))).unwrap();
        let p = project_null(&w);
        assert!(p.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn frame_element_norm_matches_closed_form() {
        let spec = small_spec();
        let j = spec.j_max() - 1;
        let partition = spec.partition(j).unwrap();
        let kernel =
            SpectralKernel::from_weights(2, spec.lmax(), spec.level_weights(j).to_vec()).unwrap();
        for k in [1u64, partition.total_cells / 2 + 1, partition.total_cells] {
            let el = frame_element(&spec, j, k).unwrap();
            let cell = partition.cell(k).unwrap();
            let want = cell.area * kernel.wavelet_norm_sq();
            assert!(
                (el.norm_sq() - want).abs() < 1e-10 * want.max(1e-12),
                "k={k}: {} vs {want}",
                el.norm_sq()
            );
        }
    }

    #[test]
    fn element_count_matches_partition() {
        let spec = small_spec();
        let mut per_level = std::collections::HashMap::new();
        for (j, _, el) in frame_elements(&spec) {
            el.unwrap();
            *per_level.entry(j).or_insert(0u64) += 1;
        }
        for j in spec.levels() {
            assert_eq!(per_level[&j], spec.partition(j).unwrap().total_cells);
        }
    }

    #[test]
    fn truncation_tail_bounds_the_dropped_diagonal() {
        let filter = FilterProfile::mexican(1).unwrap();
        for (t, lmax) in [(1.0f64, 8usize), (0.5, 16), (0.25, 32)] {
            let tail = kernel_truncation_tail(&filter, t, 2, lmax);
            // compare against a long explicit sum
            let mut explicit = 0.0;
            for l in lmax + 1..lmax + 4000 {
                explicit += filter.eval(t * t * lambda_ls(l, 2)).abs()
                    * (2.0 * l as f64 + 1.0)
                    / (4.0 * PI);
            }
            assert!(explicit <= tail, "t={t}: explicit {explicit} vs tail {tail}");
        }
    }
}
