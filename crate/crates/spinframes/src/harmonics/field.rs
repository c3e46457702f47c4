//! Spectral and sampled representations of spin-weighted fields.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::quadrature::pairwise_sum;
use crate::sphere::QuadratureGrid;

/// A spin-`s` field in the orthonormal spin spherical harmonic basis:
/// one complex amplitude per `(l, m)` with `|s| <= l <= lmax`, `|m| <= l`.
///
/// Fields with `lmax < |s|` are legal and identically zero (empty
/// coefficient vector).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinField {
    spin: i32,
    lmax: usize,
    coeffs: Vec<Complex64>,
}

/// Number of `(l, m)` pairs with `|s| <= l <= lmax`.
pub fn coeff_count(spin: i32, lmax: usize) -> usize {
    let s = spin.unsigned_abs() as usize;
    if lmax < s {
        0
    } else {
        (lmax + 1) * (lmax + 1) - s * s
    }
}

impl SpinField {
    pub fn zero(spin: i32, lmax: usize) -> Self {
        Self {
            spin,
            lmax,
            coeffs: vec![Complex64::new(0.0, 0.0); coeff_count(spin, lmax)],
        }
    }

    /// Field with a single unit coefficient at `(l, m)`.
    pub fn basis(spin: i32, lmax: usize, l: usize, m: i64) -> Result<Self> {
        let mut f = Self::zero(spin, lmax);
        f.set(l, m, Complex64::new(1.0, 0.0))?;
        Ok(f)
    }

    /// Seeded random field with unit-variance complex Gaussian coefficients.
    pub fn random<R: Rng>(spin: i32, lmax: usize, rng: &mut R) -> Self {
        let mut f = Self::zero(spin, lmax);
        for c in &mut f.coeffs {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *c = Complex64::new(re, im);
        }
        f
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn lmin(&self) -> usize {
        self.spin.unsigned_abs() as usize
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    #[inline]
    fn index(&self, l: usize, m: i64) -> Option<usize> {
        let s = self.lmin();
        if l < s || l > self.lmax || m.unsigned_abs() as usize > l {
            return None;
        }
        Some(l * l - s * s + (m + l as i64) as usize)
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.index(l, m)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, l: usize, m: i64, value: Complex64) -> Result<()> {
        let idx = self.index(l, m).ok_or(Error::IndexOutOfRange {
            l: l as i64,
            m,
            spin: self.spin,
        })?;
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Iterates `(l, m, coefficient)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        let s = self.lmin();
        (s..=self.lmax).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.get(l, m)))
        })
    }

    /// Parseval norm squared: sum of |coefficient|².
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&sq)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Hermitian inner product `<self, other> = sum a * conj(b)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.spin != other.spin {
            return Err(Error::SpinMismatch {
                expected: self.spin,
                got: other.spin,
            });
        }
        if self.lmax != other.lmax {
            return Err(Error::GridTooCoarse {
                grid: other.lmax,
                requested: self.lmax,
            });
        }
        let prod: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .collect();
        Ok(crate::sphere::quadrature::pairwise_sum_complex(&prod))
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// `self += factor * other`; shapes must match.
    pub fn axpy(&mut self, factor: Complex64, other: &Self) {
        assert_eq!(self.spin, other.spin);
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }

    /// Applies a per-degree real multiplier `g(l)` to all coefficients.
    pub fn apply_degree_multiplier<G: Fn(usize) -> f64>(&self, g: G) -> Self {
        let mut out = self.clone();
        let s = self.lmin();
        for l in s..=self.lmax {
            let f = g(l);
            let base = l * l - s * s;
            for idx in base..base + 2 * l + 1 {
                out.coeffs[idx] *= f;
            }
        }
        out
    }
}

/// Values of a spin-`s` field's fixed-chart trivialization on a quadrature
/// grid, ordered theta-major (`t * n_phi + p`).
#[derive(Clone, Debug)]
pub struct SampledField {
    spin: i32,
    grid: QuadratureGrid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(spin: i32, grid: QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.sample_count() {
            return Err(Error::Format(format!(
                "value count {} does not match grid sample count {}",
                values.len(),
                grid.sample_count()
            )));
        }
        Ok(Self { spin, grid, values })
    }

    pub fn zero(spin: i32, grid: QuadratureGrid) -> Self {
        let n = grid.sample_count();
        Self {
            spin,
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Grid quadrature of |f|² over the sphere.
    pub fn norm_sq(&self) -> f64 {
        self.grid.integrate(|i| self.values[i].norm_sqr())
    }

    /// Maximum absolute difference of sample values.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
