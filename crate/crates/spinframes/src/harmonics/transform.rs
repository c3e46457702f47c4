//! Forward and inverse spin spherical harmonic transforms on quadrature
//! grids.
//!
//! Both directions work ring by ring: the longitude dependence is handled by
//! direct Fourier sums (exact on the uniform phi grid), the colatitude
//! dependence through a `WignerTable`.  Rings are processed in parallel and
//! combined in a fixed order, so results are bitwise reproducible for any
//! thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::field::{SampledField, SpinField};
use crate::harmonics::sylm::sylm_normalization;
use crate::harmonics::wigner::WignerTable;
use crate::sphere::QuadratureGrid;

/// Precomputed `e^{i m phi_p}` factors of a grid, indexed `p * (2L+1) + (m+L)`.
struct PhaseTable {
    lmax: i64,
    phases: Vec<Complex64>,
}

impl PhaseTable {
    fn new(grid: &QuadratureGrid, lmax: usize) -> Self {
        let li = lmax as i64;
        let n_m = 2 * lmax + 1;
        let mut phases = Vec::with_capacity(grid.n_phi() * n_m);
        for &phi in grid.phi_nodes() {
            for m in -li..=li {
                phases.push(Complex64::new(0.0, m as f64 * phi).exp());
            }
        }
        Self { lmax: li, phases }
    }

    #[inline]
    fn get(&self, p: usize, m: i64) -> Complex64 {
        self.phases[p * (2 * self.lmax + 1) as usize + (m + self.lmax) as usize]
    }
}

fn check_table(table: &WignerTable, grid: &QuadratureGrid, spin: i32, lmax: usize) -> Result<()> {
    if table.spin() != spin {
        return Err(Error::SpinMismatch {
            expected: spin,
            got: table.spin(),
        });
    }
    if table.lmax() < lmax || table.theta_nodes() != grid.theta_nodes() {
        return Err(Error::InvalidArgument(
            "Wigner table does not match grid and bandlimit".into(),
        ));
    }
    Ok(())
}

/// Evaluates a spectral field on a grid.  Requires `grid.bandlimit() >= F.lmax()`.
pub fn synthesize(field: &SpinField, grid: &QuadratureGrid) -> Result<SampledField> {
    let table = WignerTable::for_grid(grid, field.lmax().min(grid.bandlimit()), field.spin());
    synthesize_with(field, grid, &table)
}

/// Synthesis with a caller-provided Wigner table (must match the grid).
pub fn synthesize_with(
    field: &SpinField,
    grid: &QuadratureGrid,
    table: &WignerTable,
) -> Result<SampledField> {
    if grid.bandlimit() < field.lmax() {
        return Err(Error::GridTooCoarse {
            grid: grid.bandlimit(),
            requested: field.lmax(),
        });
    }
    if field.coeffs().is_empty() {
        return Ok(SampledField::zero(field.spin(), grid.clone()));
    }
    check_table(table, grid, field.spin(), field.lmax())?;
    let lmax = field.lmax() as i64;
    let lmin = field.lmin();
    let n_phi = grid.n_phi();
    let phases = PhaseTable::new(grid, field.lmax());

    let rings: Vec<Vec<Complex64>> = (0..grid.n_theta())
        .into_par_iter()
        .map(|t| {
            let mut ring = vec![Complex64::new(0.0, 0.0); n_phi];
            for m in -lmax..=lmax {
                let col = table.column(t, m);
                let l0 = m.unsigned_abs().max(lmin as u64) as usize;
                let mut g = Complex64::new(0.0, 0.0);
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                for (i, d) in col.iter().enumerate() {
                    let l = l0 + i;
                    g += field.get(l, m) * (sign * sylm_normalization(l) * d);
                }
                for (p, out) in ring.iter_mut().enumerate() {
                    *out += g * phases.get(p, m);
                }
            }
            ring
        })
        .collect();

    let mut values = Vec::with_capacity(grid.sample_count());
    for ring in rings {
        values.extend(ring);
    }
    SampledField::new(field.spin(), grid.clone(), values)
}

/// Projects grid samples onto the spin harmonic basis up to `lmax` using the
/// grid quadrature; exact (to roundoff) for fields band-limited at `lmax`.
/// Requires `grid.bandlimit() >= lmax`.
pub fn analyze(field: &SampledField, lmax: usize) -> Result<SpinField> {
    let table = WignerTable::for_grid(field.grid(), lmax, field.spin());
    analyze_with(field, lmax, &table)
}

/// Analysis with a caller-provided Wigner table (must match the grid).
pub fn analyze_with(field: &SampledField, lmax: usize, table: &WignerTable) -> Result<SpinField> {
    let grid = field.grid();
    if grid.bandlimit() < lmax {
        return Err(Error::GridTooCoarse {
            grid: grid.bandlimit(),
            requested: lmax,
        });
    }
    let spin = field.spin();
    let mut out = SpinField::zero(spin, lmax);
    if out.coeffs().is_empty() {
        return Ok(out);
    }
    check_table(table, grid, spin, lmax)?;
    let li = lmax as i64;
    let lmin = out.lmin();
    let n_phi = grid.n_phi();
    let phases = PhaseTable::new(grid, lmax);
    let n_coeffs = out.coeffs().len();

    let ring_contribs: Vec<Vec<Complex64>> = (0..grid.n_theta())
        .into_par_iter()
        .map(|t| {
            let w = grid.weight(t);
            let mut contrib = vec![Complex64::new(0.0, 0.0); n_coeffs];
            for m in -li..=li {
                // F_m = sum_p f(t, p) e^{-i m phi_p}
                let mut fm = Complex64::new(0.0, 0.0);
                for p in 0..n_phi {
                    fm += field.values()[t * n_phi + p] * phases.get(p, m).conj();
                }
                fm *= w;
                let col = table.column(t, m);
                let l0 = m.unsigned_abs().max(lmin as u64) as usize;
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                for (i, d) in col.iter().enumerate() {
                    let l = l0 + i;
                    let idx = l * l - lmin * lmin + (m + l as i64) as usize;
                    contrib[idx] += fm * (sign * sylm_normalization(l) * d);
                }
            }
            contrib
        })
        .collect();

    // fixed-order accumulation over rings
    for contrib in ring_contribs {
        for (a, b) in out.coeffs_mut().iter_mut().zip(contrib) {
            *a += b;
        }
    }
    Ok(out)
}
