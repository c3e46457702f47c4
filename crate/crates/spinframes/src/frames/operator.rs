//! The frame analysis map, the summation (frame) operator `S`, and its
//! spectral counterpart `Q`.
//!
//! `S F = sum_{j,k} mu(E_{j,k}) <F, W_{j,k}> W_{j,k}` is evaluated level by
//! level and ring by ring.  Within one ring the cell centers sit at equally
//! spaced longitudes, so the sums over sectors reduce exactly to folded
//! Fourier sums over the ring profile `g_m(theta)`: with `n` sectors and
//! center offset `phi_0`,
//!
//! `sum_i |sum_m g_m e^{i m phi_i}|^2 = n sum_r |h_r|^2`,
//! `sum_i (sum_m' g_m' e^{i m' phi_i}) e^{-i m phi_i} = n e^{-i m phi_0} h_{m mod n}`,
//!
//! where `h_r = sum_{m = r mod n} g_m e^{i m phi_0}`.  No cell is ever
//! enumerated by the operator; all discretization effects (longitude
//! aliasing on coarse rings, latitude midpoint displacement) are captured
//! exactly by the fold.  Cells are enumerated only when per-cell
//! coefficients are materialized.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::spec::FrameSpec;
use crate::harmonics::field::SpinField;
use crate::harmonics::sylm::sylm_normalization;
use crate::harmonics::wigner::wigner_d_column;
use crate::sphere::partition::PartitionRing;
use crate::sphere::quadrature::{pairwise_sum, pairwise_sum_complex};
use std::f64::consts::PI;

/// Wavelet coefficients `beta_{j,k} = <F, phi_{j,k}>`, materialized per cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameCoefficients {
    pub spec_hash: String,
    pub spin: i32,
    pub levels: Vec<LevelCoefficients>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelCoefficients {
    pub j: i64,
    /// `beta[k - 1]` is the coefficient of cell `k`.
    pub beta: Vec<Complex64>,
}

impl FrameCoefficients {
    /// Total weighted energy `sum |beta|^2` (the frame-side quadratic form).
    pub fn energy(&self) -> f64 {
        let per_level: Vec<f64> = self
            .levels
            .iter()
            .map(|lc| {
                let sq: Vec<f64> = lc.beta.iter().map(|b| b.norm_sqr()).collect();
                pairwise_sum(&sq)
            })
            .collect();
        pairwise_sum(&per_level)
    }

    pub fn total_count(&self) -> usize {
        self.levels.iter().map(|l| l.beta.len()).sum()
    }
}

fn check_spin(field: &SpinField, spec: &FrameSpec) -> Result<()> {
    if field.spin() != spec.spin() {
        return Err(Error::SpinMismatch {
            expected: spec.spin(),
            got: field.spin(),
        });
    }
    Ok(())
}

/// Zero-extends a field to the spec bandlimit; content above it is refused.
fn embed(field: &SpinField, spec: &FrameSpec) -> Result<SpinField> {
    check_spin(field, spec)?;
    if field.lmax() > spec.lmax() {
        return Err(Error::GridTooCoarse {
            grid: spec.lmax(),
            requested: field.lmax(),
        });
    }
    if field.lmax() == spec.lmax() {
        return Ok(field.clone());
    }
    let mut out = SpinField::zero(field.spin(), spec.lmax());
    for (l, m, c) in field.iter() {
        out.set(l, m, c).expect("in range");
    }
    Ok(out)
}

/// Ring profile `g_m = sum_l a_{lm} (-1)^m N_l d^l_{-m,s}(theta)` of an
/// (already filtered) field; `scratch` avoids reallocating the degree column.
fn ring_profile(
    coeffs: &SpinField,
    theta: f64,
    g: &mut [Complex64],
    scratch: &mut Vec<f64>,
) {
    let lmax = coeffs.lmax() as i64;
    let lmin = coeffs.lmin();
    let spin = coeffs.spin() as i64;
    for m in -lmax..=lmax {
        let l0 = m.unsigned_abs().max(spin.unsigned_abs()) as usize;
        wigner_d_column(-m, spin, lmax, theta, scratch);
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, d) in scratch.iter().enumerate() {
            let l = l0 + i;
            let idx = l * l - lmin * lmin + (m + l as i64) as usize;
            acc += coeffs.coeffs()[idx] * (sign * sylm_normalization(l) * d);
        }
        g[(m + lmax) as usize] = acc;
    }
}

/// Folded sector sums of one ring: returns `mu * n * sum_r |h_r|^2` (the
/// ring's contribution to `<SF, F>`) and fills `h_by_m[m + L]` with
/// `H_m / w-side factors = mu n e^{-i m phi_0} h_{m mod n}` when requested.
fn ring_fold(
    ring: &PartitionRing,
    lmax: i64,
    g: &[Complex64],
    h_by_m: Option<&mut [Complex64]>,
) -> f64 {
    let n = ring.n_sectors;
    let mu = ring.cell_area;
    let phi0 = -PI + PI / n as f64;
    let nf = n as f64;
    if n as i64 >= 2 * lmax + 1 {
        // no aliasing: h is a relabeling of g
        let mut sum = 0.0;
        for v in g {
            sum += v.norm_sqr();
        }
        if let Some(h) = h_by_m {
            for (i, v) in g.iter().enumerate() {
                h[i] = mu * nf * v;
            }
        }
        mu * nf * sum
    } else {
        let mut folded = vec![Complex64::new(0.0, 0.0); n as usize];
        for m in -lmax..=lmax {
            let r = (m.rem_euclid(n as i64)) as usize;
            let phase = Complex64::new(0.0, m as f64 * phi0).exp();
            folded[r] += g[(m + lmax) as usize] * phase;
        }
        let mut sum = 0.0;
        for v in &folded {
            sum += v.norm_sqr();
        }
        if let Some(h) = h_by_m {
            for m in -lmax..=lmax {
                let r = (m.rem_euclid(n as i64)) as usize;
                let phase = Complex64::new(0.0, -(m as f64) * phi0).exp();
                h[(m + lmax) as usize] = mu * nf * phase * folded[r];
            }
        }
        mu * nf * sum
    }
}

/// Scatters a ring's folded sums back onto coefficients:
/// `out_{lm} += w_l (-1)^m N_l d^l_{-m,s}(theta) H_m`.
fn ring_adjoint(
    out: &mut [Complex64],
    weights: &[f64],
    spin: i32,
    lmax: usize,
    lmin: usize,
    theta: f64,
    h_by_m: &[Complex64],
    scratch: &mut Vec<f64>,
) {
    let li = lmax as i64;
    for m in -li..=li {
        let l0 = m.unsigned_abs().max(spin.unsigned_abs() as u64) as usize;
        wigner_d_column(-m, spin as i64, li, theta, scratch);
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let hm = h_by_m[(m + li) as usize];
        for (i, d) in scratch.iter().enumerate() {
            let l = l0 + i;
            let idx = l * l - lmin * lmin + (m + l as i64) as usize;
            out[idx] += hm * (weights[l - lmin] * sign * sylm_normalization(l) * d);
        }
    }
}

/// Fixed chunking of a ring list: the chunk count is independent of the
/// thread count, so parallel results combine in a reproducible order.
fn ring_chunks(n_rings: usize) -> usize {
    n_rings.div_ceil(64).max(1)
}

/// `<S_j F, F>` for one level, batched over several fields sharing the spec.
fn level_quadratic_forms(
    filtered: &[SpinField],
    spec: &FrameSpec,
    j: i64,
) -> Vec<f64> {
    let partition = spec.partition(j).expect("level in range");
    let lmax = spec.lmax() as i64;
    let n_m = (2 * lmax + 1) as usize;
    let chunk = ring_chunks(partition.rings.len());
    let partials: Vec<Vec<f64>> = partition
        .rings
        .par_chunks(chunk)
        .map(|rings| {
            let mut acc = vec![0.0f64; filtered.len()];
            let mut g = vec![Complex64::new(0.0, 0.0); n_m];
            let mut scratch = Vec::new();
            for ring in rings {
                for (fi, field) in filtered.iter().enumerate() {
                    ring_profile(field, ring.center_theta, &mut g, &mut scratch);
                    acc[fi] += ring_fold(ring, lmax, &g, None);
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0f64; filtered.len()];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// One level's contribution to `S F`, added into `out`.
fn level_apply(filtered: &SpinField, spec: &FrameSpec, j: i64, out: &mut SpinField) {
    let partition = spec.partition(j).expect("level in range");
    let weights = spec.level_weights(j);
    let lmax = spec.lmax() as i64;
    let lmin = spec.lmin();
    let n_m = (2 * lmax + 1) as usize;
    let n_coeffs = out.coeffs().len();
    let chunk = ring_chunks(partition.rings.len());
    let partials: Vec<Vec<Complex64>> = partition
        .rings
        .par_chunks(chunk)
        .map(|rings| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_coeffs];
            let mut g = vec![Complex64::new(0.0, 0.0); n_m];
            let mut h = vec![Complex64::new(0.0, 0.0); n_m];
            let mut scratch = Vec::new();
            for ring in rings {
                ring_profile(filtered, ring.center_theta, &mut g, &mut scratch);
                ring_fold(ring, lmax, &g, Some(&mut h));
                ring_adjoint(
                    &mut acc,
                    weights,
                    spec.spin(),
                    spec.lmax(),
                    lmin,
                    ring.center_theta,
                    &h,
                    &mut scratch,
                );
            }
            acc
        })
        .collect();
    for p in partials {
        for (o, v) in out.coeffs_mut().iter_mut().zip(p) {
            *o += v;
        }
    }
}

/// Wavelet coefficients of `F` against every frame element, materialized.
///
/// Cost is `O(levels * rings * L^2 + cells * L)`; intended for specs whose
/// total cell count fits in memory.
pub fn analyze_coeffs(field: &SpinField, spec: &FrameSpec) -> Result<FrameCoefficients> {
    let work = embed(field, spec)?;
    let lmax = spec.lmax() as i64;
    let n_m = (2 * lmax + 1) as usize;
    let mut levels = Vec::with_capacity(spec.n_levels());
    for j in spec.levels() {
        let partition = spec.partition(j).unwrap();
        let filtered = work.apply_degree_multiplier(|l| spec.level_weights(j)[l - spec.lmin()]);
        let chunk = ring_chunks(partition.rings.len());
        let per_ring: Vec<Vec<Complex64>> = partition
            .rings
            .par_chunks(chunk)
            .map(|rings| {
                let mut out = Vec::new();
                let mut g = vec![Complex64::new(0.0, 0.0); n_m];
                let mut scratch = Vec::new();
                for ring in rings {
                    ring_profile(&filtered, ring.center_theta, &mut g, &mut scratch);
                    let n = ring.n_sectors;
                    let sqrt_mu = ring.cell_area.sqrt();
                    let phi0 = -PI + PI / n as f64;
                    let step = 2.0 * PI / n as f64;
                    // beta(x_i) = sqrt(mu) sum_m g_m e^{i m phi_i}, phi_i = phi0 + i step
                    let mut phases: Vec<Complex64> = (-lmax..=lmax)
                        .map(|m| Complex64::new(0.0, m as f64 * phi0).exp())
                        .collect();
                    let rotors: Vec<Complex64> = (-lmax..=lmax)
                        .map(|m| Complex64::new(0.0, m as f64 * step).exp())
                        .collect();
                    for _ in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (gm, ph) in g.iter().zip(&phases) {
                            acc += gm * ph;
                        }
                        out.push(acc * sqrt_mu);
                        for (ph, rot) in phases.iter_mut().zip(&rotors) {
                            *ph *= rot;
                        }
                    }
                }
                out
            })
            .collect();
        let beta: Vec<Complex64> = per_ring.into_iter().flatten().collect();
        debug_assert_eq!(beta.len() as u64, partition.total_cells);
        levels.push(LevelCoefficients { j, beta });
    }
    Ok(FrameCoefficients {
        spec_hash: spec.spec_hash(),
        spin: spec.spin(),
        levels,
    })
}

/// The summation (frame) operator `S F`, self-adjoint and positive
/// semidefinite, vanishing on the null degrees.
pub fn frame_operator_apply(field: &SpinField, spec: &FrameSpec) -> Result<SpinField> {
    let work = embed(field, spec)?;
    let mut out = SpinField::zero(spec.spin(), spec.lmax());
    for j in spec.levels() {
        if spec.level_negligible(j) {
            continue;
        }
        let filtered = work.apply_degree_multiplier(|l| spec.level_weights(j)[l - spec.lmin()]);
        level_apply(&filtered, spec, j, &mut out);
    }
    Ok(out)
}

/// `<S F, F>` for a batch of fields (shared spec, one pass over rings).
pub fn frame_quadratic_forms(fields: &[SpinField], spec: &FrameSpec) -> Result<Vec<f64>> {
    let mut works = Vec::with_capacity(fields.len());
    for f in fields {
        works.push(embed(f, spec)?);
    }
    let mut out = vec![0.0f64; fields.len()];
    for j in spec.levels() {
        if spec.level_negligible(j) {
            continue;
        }
        let filtered: Vec<SpinField> = works
            .iter()
            .map(|w| w.apply_degree_multiplier(|l| spec.level_weights(j)[l - spec.lmin()]))
            .collect();
        let level = level_quadratic_forms(&filtered, spec, j);
        for (o, v) in out.iter_mut().zip(level) {
            *o += v;
        }
    }
    Ok(out)
}

/// `<S F, F>` for a single field.
pub fn frame_quadratic_form(field: &SpinField, spec: &FrameSpec) -> Result<f64> {
    Ok(frame_quadratic_forms(std::slice::from_ref(field), spec)?[0])
}

/// The spectral operator `Q = sum_j |f|^2(a^{2j} Delta_s)` truncated to the
/// spec's level range: a diagonal degree multiplier.
pub fn spectral_q_apply(field: &SpinField, spec: &FrameSpec) -> Result<SpinField> {
    let work = embed(field, spec)?;
    Ok(work.apply_degree_multiplier(|l| spec.q_multiplier()[l - spec.lmin()]))
}

/// `<Q F, F>`, diagonal in the coefficient basis.
pub fn q_quadratic_form(field: &SpinField, spec: &FrameSpec) -> Result<f64> {
    let work = embed(field, spec)?;
    let lmin = spec.lmin();
    let per_degree: Vec<f64> = (lmin..=spec.lmax())
        .map(|l| {
            let mut s = 0.0;
            for m in -(l as i64)..=l as i64 {
                s += work.get(l, m).norm_sqr();
            }
            s * spec.q_multiplier()[l - lmin]
        })
        .collect();
    Ok(pairwise_sum(&per_degree))
}

/// Right-hand side of dual-frame reconstruction:
/// `sum_{j,k} beta_{j,k} phi_{j,k}` assembled from materialized coefficients.
pub fn coefficient_synthesis(coeffs: &FrameCoefficients, spec: &FrameSpec) -> Result<SpinField> {
    if coeffs.spin != spec.spin() {
        return Err(Error::SpinMismatch {
            expected: spec.spin(),
            got: coeffs.spin,
        });
    }
    if coeffs.spec_hash != spec.spec_hash() {
        return Err(Error::Format(format!(
            "coefficients belong to spec {} but were applied to {}",
            coeffs.spec_hash,
            spec.spec_hash()
        )));
    }
    let lmax = spec.lmax() as i64;
    let lmin = spec.lmin();
    let n_m = (2 * lmax + 1) as usize;
    let mut out = SpinField::zero(spec.spin(), spec.lmax());
    for lc in &coeffs.levels {
        let partition = spec
            .partition(lc.j)
            .ok_or_else(|| Error::Format(format!("level {} not in spec", lc.j)))?;
        if lc.beta.len() as u64 != partition.total_cells {
            return Err(Error::Format(format!(
                "level {}: {} coefficients for {} cells",
                lc.j,
                lc.beta.len(),
                partition.total_cells
            )));
        }
        let weights = spec.level_weights(lc.j);
        let chunk = ring_chunks(partition.rings.len());
        let n_coeffs = out.coeffs().len();
        let partials: Vec<Vec<Complex64>> = partition
            .rings
            .par_chunks(chunk)
            .map(|rings| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n_coeffs];
                let mut h = vec![Complex64::new(0.0, 0.0); n_m];
                let mut scratch = Vec::new();
                for ring in rings {
                    let n = ring.n_sectors;
                    let sqrt_mu = ring.cell_area.sqrt();
                    let phi0 = -PI + PI / n as f64;
                    let step = 2.0 * PI / n as f64;
                    let base = ring.k_offset as usize;
                    // H_m = sqrt(mu) sum_i beta_i e^{-i m phi_i}
                    let mut phases: Vec<Complex64> = (-lmax..=lmax)
                        .map(|m| Complex64::new(0.0, -(m as f64) * phi0).exp())
                        .collect();
                    let rotors: Vec<Complex64> = (-lmax..=lmax)
                        .map(|m| Complex64::new(0.0, -(m as f64) * step).exp())
                        .collect();
                    h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                    for i in 0..n as usize {
                        let b = lc.beta[base + i] * sqrt_mu;
                        for (hm, ph) in h.iter_mut().zip(&phases) {
                            *hm += b * *ph;
                        }
                        for (ph, rot) in phases.iter_mut().zip(&rotors) {
                            *ph *= rot;
                        }
                    }
                    ring_adjoint(
                        &mut acc,
                        weights,
                        spec.spin(),
                        spec.lmax(),
                        lmin,
                        ring.center_theta,
                        &h,
                        &mut scratch,
                    );
                }
                acc
            })
            .collect();
        for p in partials {
            for (o, v) in out.coeffs_mut().iter_mut().zip(p) {
                *o += v;
            }
        }
    }
    Ok(out)
}

/// Direct (per-element) evaluation of `S F`, enumerating cells; the oracle
/// counterpart of `frame_operator_apply` for small specs.
pub fn frame_operator_apply_direct(field: &SpinField, spec: &FrameSpec) -> Result<SpinField> {
    let coeffs = analyze_coeffs(field, spec)?;
    coefficient_synthesis(&coeffs, spec)
}

/// Inner product of coefficient families, `sum beta conj(beta')`.
pub fn coefficients_inner(a: &FrameCoefficients, b: &FrameCoefficients) -> Complex64 {
    let mut per_level = Vec::with_capacity(a.levels.len());
    for (la, lb) in a.levels.iter().zip(&b.levels) {
        let prods: Vec<Complex64> = la
            .beta
            .iter()
            .zip(&lb.beta)
            .map(|(x, y)| x * y.conj())
            .collect();
        per_level.push(pairwise_sum_complex(&prods));
    }
    pairwise_sum_complex(&per_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterProfile;
    use crate::frames::kernel::frame_element;
    use crate::frames::spec::LevelPolicy;
    use crate::harmonics::eth::{project_null, project_null_complement};
    use crate::harmonics::rotate::rotate_field;
    use crate::sphere::Rotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_spec(spin: i32, lmax: usize, b: f64, u_lo: f64) -> FrameSpec {
        FrameSpec::new(
            spin,
            lmax,
            FilterProfile::mexican(1).unwrap(),
            1.5,
            b,
            0.05,
            crate::sphere::partition::DELTA0_DEFAULT,
            LevelPolicy::Auto {
                u_lo,
                hi_threshold: 1e-18,
            },
        )
        .unwrap()
    }

    #[test]
    fn null_space_fields_have_exactly_zero_coefficients() {
        let spec = test_spec(2, 8, 0.4, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let f = project_null(&SpinField::random(2, 8, &mut rng));
        let coeffs = analyze_coeffs(&f, &spec).unwrap();
        for lc in &coeffs.levels {
            for b in &lc.beta {
                assert_eq!(*b, Complex64::new(0.0, 0.0));
            }
        }
        // and S annihilates them, exactly
        let sf = frame_operator_apply(&f, &spec).unwrap();
        assert!(sf.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn coefficients_match_direct_inner_products() {
        let spec = test_spec(2, 8, 0.45, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let f = SpinField::random(2, 8, &mut rng);
        let coeffs = analyze_coeffs(&f, &spec).unwrap();
        // twenty cells spread across levels
        use rand::Rng;
        for _ in 0..20 {
            let j = rng.gen_range(spec.j_min()..=spec.j_max());
            let total = spec.partition(j).unwrap().total_cells;
            let k = rng.gen_range(1..=total);
            let el = frame_element(&spec, j, k).unwrap();
            let want = f.inner(&el).unwrap();
            let got = coeffs.levels[(j - spec.j_min()) as usize].beta[(k - 1) as usize];
            assert!(
                (want - got).norm() < 1e-9 * f.norm().max(1.0),
                "j={j} k={k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn single_harmonic_coefficients_follow_closed_form() {
        let spec = test_spec(2, 6, 0.5, 0.1);
        let (l, m) = (4usize, -2i64);
        let f = SpinField::basis(2, 6, l, m).unwrap();
        let coeffs = analyze_coeffs(&f, &spec).unwrap();
        for j in spec.levels() {
            let w = spec.level_weights(j)[l - spec.lmin()];
            let partition = spec.partition(j).unwrap();
            let lc = &coeffs.levels[(j - spec.j_min()) as usize];
            for k in [1u64, partition.total_cells / 3 + 1, partition.total_cells] {
                let cell = partition.cell(k).unwrap();
                let want = cell.area.sqrt()
                    * w
                    * crate::harmonics::sylm::eval_sylm(2, l, m, &cell.center).unwrap();
                let got = lc.beta[(k - 1) as usize];
                assert!(
                    (want - got).norm() < 1e-10,
                    "j={j} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn operator_is_self_adjoint_and_positive() {
        let spec = test_spec(1, 8, 0.4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..4 {
            let f = SpinField::random(1, 8, &mut rng);
            let g = SpinField::random(1, 8, &mut rng);
            let sf = frame_operator_apply(&f, &spec).unwrap();
            let sg = frame_operator_apply(&g, &spec).unwrap();
            let lhs = sf.inner(&g).unwrap();
            let rhs = f.inner(&sg).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-10 * f.norm() * g.norm(),
                "{lhs} vs {rhs}"
            );
            let quad = sf.inner(&f).unwrap();
            assert!(quad.re >= 0.0 && quad.im.abs() < 1e-10 * f.norm_sq());
        }
    }

    #[test]
    fn quadratic_form_matches_apply_and_coefficient_energy() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let f = SpinField::random(2, 8, &mut rng);
        let qf = frame_quadratic_form(&f, &spec).unwrap();
        let via_apply = frame_operator_apply(&f, &spec)
            .unwrap()
            .inner(&f)
            .unwrap()
            .re;
        assert!((qf - via_apply).abs() < 1e-10 * qf.max(1.0));
        let energy = analyze_coeffs(&f, &spec).unwrap().energy();
        assert!(
            (qf - energy).abs() < 1e-10 * qf.max(1.0),
            "{qf} vs {energy}"
        );
    }

    #[test]
    fn collapsed_operator_agrees_with_per_cell_route() {
        // ring-folded apply vs literal sum over materialized elements
        let spec = test_spec(2, 6, 0.5, 0.15);
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let f = SpinField::random(2, 6, &mut rng);
        let fast = frame_operator_apply(&f, &spec).unwrap();
        let slow = frame_operator_apply_direct(&f, &spec).unwrap();
        for (a, b) in fast.coeffs().iter().zip(slow.coeffs()) {
            assert!((a - b).norm() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn q_is_diagonal_and_annihilates_null_degrees() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let f = SpinField::basis(2, 8, 2, 1).unwrap();
        let qf = spectral_q_apply(&f, &spec).unwrap();
        assert!(qf.coeffs().iter().all(|c| c.norm() == 0.0));
        let g = SpinField::basis(2, 8, 5, -3).unwrap();
        let qg = spectral_q_apply(&g, &spec).unwrap();
        let expect = spec.q_multiplier()[5 - 2];
        assert_eq!(qg.get(5, -3).re, expect);
    }

    #[test]
    fn q_commutes_with_rotations() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let f = SpinField::random(2, 8, &mut rng);
        let r = Rotation::from_euler_zyz(0.4, 1.2, -0.9);
        let a = spectral_q_apply(&rotate_field(&r, &f), &spec).unwrap();
        let b = rotate_field(&r, &spectral_q_apply(&f, &spec).unwrap());
        let mut diff: f64 = 0.0;
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            diff += (x - y).norm_sqr();
        }
        assert!(diff.sqrt() < 1e-10 * f.norm());
    }

    #[test]
    fn s_projects_through_the_null_complement() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let f = SpinField::random(2, 8, &mut rng);
        let sf = frame_operator_apply(&f, &spec).unwrap();
        // P S F = 0
        let p_sf = project_null(&sf);
        assert!(p_sf.coeffs().iter().all(|c| c.norm() == 0.0));
        // S F = S (I - P) F
        let s_comp = frame_operator_apply(&project_null_complement(&f), &spec).unwrap();
        for (a, b) in sf.coeffs().iter().zip(s_comp.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn batched_forms_match_singles_bitwise() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let fields: Vec<SpinField> = (0..3).map(|_| SpinField::random(2, 8, &mut rng)).collect();
        let batch = frame_quadratic_forms(&fields, &spec).unwrap();
        for (f, b) in fields.iter().zip(&batch) {
            assert_eq!(frame_quadratic_form(f, &spec).unwrap(), *b);
        }
    }

    #[test]
    fn spin_mismatch_is_rejected() {
        let spec = test_spec(2, 8, 0.4, 0.08);
        let f = SpinField::zero(1, 8);
        assert!(analyze_coeffs(&f, &spec).is_err());
        assert!(frame_operator_apply(&f, &spec).is_err());
    }
}
