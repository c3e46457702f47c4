//! Frame specification: filter, scale lattice, per-level partitions, and the
//! certified spectral truncation of the level range.
//!
//! A frame is indexed by levels `j` with scale `t = a^j` and per-level
//! partitions of cell diameter at most `b a^j`.  At bandlimit `L` only
//! finitely many levels act: levels with `a^{2j} lambda_max` below the
//! filter's numerical support contribute provably negligible coefficients,
//! and similarly above.  The dropped part of the scale sum is certified per
//! occupied eigenvalue and carried into every bound report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::FilterProfile;
use crate::harmonics::eth::lambda_ls;
use crate::sphere::partition::{build_partition, powi_f, Partition};

/// How the finite level range is chosen.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum LevelPolicy {
    /// Derive `[j_min, j_max]` from the filter support: keep levels while
    /// `a^{2j} lambda_max >= u_lo` and `a^{2j} lambda_min <= u_hi`, where
    /// `u_hi` is the point past which `f^2` is below `hi_threshold`.
    Auto { u_lo: f64, hi_threshold: f64 },
    /// Fixed range.
    Explicit { j_min: i64, j_max: i64 },
}

impl Default for LevelPolicy {
    fn default() -> Self {
        // u_lo = 1e-3 keeps the certified dropped scale-sum weight below
        // ~1e-6 for profiles vanishing linearly at zero
        LevelPolicy::Auto {
            u_lo: 1e-3,
            hi_threshold: 1e-18,
        }
    }
}

/// Everything needed to realize the frame `{phi_{j,k}}` at a bandlimit.
#[derive(Clone, Debug)]
pub struct FrameSpec {
    spin: i32,
    lmax: usize,
    filter: FilterProfile,
    a: f64,
    b: f64,
    c0: f64,
    delta0: f64,
    j_min: i64,
    j_max: i64,
    partitions: Vec<Partition>,
    /// `level_weights[level][l - lmin] = f(a^{2j} lambda_l)`.
    level_weights: Vec<Vec<f64>>,
    /// Per-level flag: all weights below 1e-14 (level provably negligible).
    negligible: Vec<bool>,
    /// `q_multiplier[l - lmin] = sum_j f(a^{2j} lambda_l)^2`.
    q_multiplier: Vec<f64>,
    /// Certified bound on `max_l sum_{j < j_min} f(a^{2j} lambda_l)^2`.
    trunc_low: f64,
    /// Certified bound on `max_l sum_{j > j_max} f(a^{2j} lambda_l)^2`.
    trunc_high: f64,
}

impl FrameSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spin: i32,
        lmax: usize,
        filter: FilterProfile,
        a: f64,
        b: f64,
        c0: f64,
        delta0: f64,
        policy: LevelPolicy,
    ) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::InvalidArgument(format!("scale base a={a} must exceed 1")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidArgument(format!("fineness b={b} must lie in (0,1)")));
        }
        let lmin = spin.unsigned_abs() as usize;
        if lmax < lmin + 1 {
            return Err(Error::InvalidArgument(format!(
                "bandlimit {lmax} leaves no oscillating degrees for spin {spin}"
            )));
        }
        let lambda_min = lambda_ls(lmin + 1, spin);
        let lambda_max = lambda_ls(lmax, spin);
        let (j_min, j_max) = match policy {
            LevelPolicy::Explicit { j_min, j_max } => (j_min, j_max),
            LevelPolicy::Auto { u_lo, hi_threshold } => {
                let u_hi = filter.support_hi(hi_threshold.sqrt());
                let a2 = a * a;
                let j_min = ((u_lo / lambda_max).ln() / a2.ln()).ceil() as i64;
                let j_max = ((u_hi / lambda_min).ln() / a2.ln()).floor() as i64;
                (j_min, j_max)
            }
        };
        if j_min > j_max {
            return Err(Error::InvalidArgument(format!(
                "empty level range [{j_min}, {j_max}]"
            )));
        }

        let n_levels = (j_max - j_min + 1) as usize;
        let mut partitions = Vec::with_capacity(n_levels);
        let mut level_weights = Vec::with_capacity(n_levels);
        let mut negligible = Vec::with_capacity(n_levels);
        let mut q_multiplier = vec![0.0f64; lmax - lmin + 1];
        let a2 = a * a;
        for level in 0..n_levels {
            let j = j_min + level as i64;
            partitions.push(build_partition(j, a, b, c0, delta0)?);
            let scale2 = powi_f(a2, j);
            let mut w = Vec::with_capacity(lmax - lmin + 1);
            let mut sup = 0.0f64;
            for l in lmin..=lmax {
                let v = filter.eval(scale2 * lambda_ls(l, spin));
                sup = sup.max(v.abs());
                q_multiplier[l - lmin] += v * v;
                w.push(v);
            }
            level_weights.push(w);
            negligible.push(sup < 1e-14);
        }

        // certified dropped scale-sum weight, per occupied eigenvalue
        let trunc_low = (lmin..=lmax)
            .map(|l| dropped_low(&filter, a, lambda_ls(l, spin), j_min))
            .fold(0.0, f64::max);
        let trunc_high = (lmin..=lmax)
            .map(|l| dropped_high(&filter, a, lambda_ls(l, spin), j_max))
            .fold(0.0, f64::max);

        Ok(Self {
            spin,
            lmax,
            filter,
            a,
            b,
            c0,
            delta0,
            j_min,
            j_max,
            partitions,
            level_weights,
            negligible,
            q_multiplier,
            trunc_low,
            trunc_high,
        })
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

    pub fn filter(&self) -> &FilterProfile {
        &self.filter
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn n_levels(&self) -> usize {
        self.partitions.len()
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        self.j_min..=self.j_max
    }

    pub fn partition(&self, j: i64) -> Option<&Partition> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        Some(&self.partitions[(j - self.j_min) as usize])
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Scale `t = a^j`.
    pub fn scale(&self, j: i64) -> f64 {
        powi_f(self.a, j)
    }

    /// `f(a^{2j} lambda_l)` for all degrees of level `j`.
    pub fn level_weights(&self, j: i64) -> &[f64] {
        &self.level_weights[(j - self.j_min) as usize]
    }

    /// Whether all of level `j`'s weights are below 1e-14.
    pub fn level_negligible(&self, j: i64) -> bool {
        self.negligible[(j - self.j_min) as usize]
    }

    /// Truncated scale sum `sum_{j in range} f(a^{2j} lambda_l)^2` per degree.
    pub fn q_multiplier(&self) -> &[f64] {
        &self.q_multiplier
    }

    /// Certified bound on the scale-sum weight lost to the finite level
    /// range, uniform over the occupied spectrum.
    pub fn truncation_bound(&self) -> f64 {
        self.trunc_low + self.trunc_high
    }

    pub fn total_cells(&self) -> u64 {
        self.partitions.iter().map(|p| p.total_cells).sum()
    }

    /// Deterministic identifier tying coefficient files to the spec that
    /// produced them.
    pub fn spec_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        let desc = format!(
            "spin={};lmax={};filter={};a={:e};b={:e};c0={:e};delta0={:e};j=[{},{}]",
            self.spin,
            self.lmax,
            self.filter.descriptor(),
            self.a,
            self.b,
            self.c0,
            self.delta0,
            self.j_min,
            self.j_max
        );
        h.update(desc.as_bytes());
        let d = h.finalize();
        d[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Validates every level partition.
    pub fn validate(&self) -> Result<()> {
        for p in &self.partitions {
            p.validate()?;
        }
        Ok(())
    }
}

/// Certified bound on `sum_{j < j_min} f(a^{2j} lambda)^2`: explicit terms
/// plus a geometric remainder from the vanishing certificate.
fn dropped_low(filter: &FilterProfile, a: f64, lambda: f64, j_min: i64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let a2 = a * a;
    let d = filter.decay();
    let mut total = 0.0;
    let mut j = j_min - 1;
    // explicit terms until the vanishing certificate takes over
    for _ in 0..200 {
        let v = powi_f(a2, j) * lambda;
        if v <= 0.5 {
            let p2 = 2 * d.vanish_order as i32;
            let geo = d.vanish_coeff * d.vanish_coeff * v.powi(p2) / (1.0 - a2.powi(-p2));
            return total + geo;
        }
        let fv = filter.eval(v);
        total += fv * fv;
        j -= 1;
    }
    f64::INFINITY
}

/// Certified bound on `sum_{j > j_max} f(a^{2j} lambda)^2` from the decay
/// certificate.
fn dropped_high(filter: &FilterProfile, a: f64, lambda: f64, j_max: i64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let a2 = a * a;
    let d = filter.decay();
    let mut total = 0.0;
    let mut j = j_max + 1;
    for _ in 0..200 {
        let v = powi_f(a2, j) * lambda;
        if let Some(end) = d.support_end {
            if v >= end {
                return total;
            }
        }
        if v >= 1.0 {
            let n2 = 2 * d.order as i32;
            let geo = d.coeff * d.coeff * v.powi(-n2) / (1.0 - a2.powi(-n2));
            return total + geo;
        }
        let fv = filter.eval(v);
        total += fv * fv;
        j += 1;
    }
    f64::INFINITY
}
