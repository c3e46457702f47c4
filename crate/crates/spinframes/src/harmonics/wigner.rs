//! Wigner small-d evaluation by stable three-term recurrences in the degree.
//!
//! Convention: `d^l_{m1,m2}(beta) = <l m1| exp(-i beta J_y) |l m2>`, so that
//! `d^1_{1,0}(beta) = -sin(beta)/sqrt(2)` and `d^l_{0,0} = P_l(cos beta)`.
//!
//! For fixed `(m1, m2)` the degree recurrence is seeded at
//! `l0 = max(|m1|, |m2|)` with the closed-form boundary value (computed in
//! log space to avoid factorial overflow) and iterated upward:
//!
//! `d^l = l(2l-1)/sqrt((l^2-m1^2)(l^2-m2^2)) * [ (cos b - m1 m2/(l(l-1))) d^{l-1}
//!        - sqrt(((l-1)^2-m1^2)((l-1)^2-m2^2))/((l-1)(2l-1)) d^{l-2} ]`
//!
//! The recurrence is forward-stable in the regimes used here (l up to a few
//! thousand); very high m at colatitudes extremely close to a pole underflows
//! to zero, which is also where the true values are far below f64 range.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::Result;
use crate::sphere::QuadratureGrid;

const LN_FACT_MAX: usize = 16384;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_MAX + 1);
        t.push(0.0);
        let mut acc = 0.0f64;
        for k in 1..=LN_FACT_MAX {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

fn ln_fact(n: i64) -> f64 {
    assert!(
        (0..=LN_FACT_MAX as i64).contains(&n),
        "factorial argument {n} out of supported range"
    );
    ln_factorials()[n as usize]
}

/// Closed-form seed `d^{l0}_{m1,m2}(beta)` at `l0 = max(|m1|, |m2|)`.
fn seed(m1: i64, m2: i64, beta: f64) -> f64 {
    let l0 = m1.abs().max(m2.abs());
    if l0 == 0 {
        return 1.0;
    }
    // (sign, cos exponent, sin exponent, binomial lower index)
    let (sign, pc, ps, choose) = if m2 == l0 {
        (1.0, l0 + m1, l0 - m1, l0 + m1)
    } else if m2 == -l0 {
        (if (l0 + m1) % 2 == 0 { 1.0 } else { -1.0 }, l0 - m1, l0 + m1, l0 + m1)
    } else if m1 == l0 {
        (if (l0 - m2) % 2 == 0 { 1.0 } else { -1.0 }, l0 + m2, l0 - m2, l0 + m2)
    } else {
        // m1 == -l0
        (1.0, l0 - m2, l0 + m2, l0 + m2)
    };
    let c = (beta / 2.0).cos();
    let s = (beta / 2.0).sin();
    if (c == 0.0 && pc > 0) || (s == 0.0 && ps > 0) {
        return 0.0;
    }
    let mut ln = 0.5 * (ln_fact(2 * l0) - ln_fact(choose) - ln_fact(2 * l0 - choose));
    if pc > 0 {
        ln += pc as f64 * c.abs().ln();
    }
    if ps > 0 {
        ln += ps as f64 * s.abs().ln();
    }
    // c >= 0 and s >= 0 for beta in [0, pi]; carry signs for outside range
    let mut sgn = sign;
    if c < 0.0 && pc % 2 != 0 {
        sgn = -sgn;
    }
    if s < 0.0 && ps % 2 != 0 {
        sgn = -sgn;
    }
    sgn * ln.exp()
}

/// Fills `out` with `d^l_{m1,m2}(beta)` for `l = max(|m1|,|m2|) ..= l_max`.
/// `out` is cleared first; it stays empty when `l_max < max(|m1|,|m2|)`.
pub fn wigner_d_column(m1: i64, m2: i64, l_max: i64, beta: f64, out: &mut Vec<f64>) {
    out.clear();
    let l0 = m1.abs().max(m2.abs());
    if l_max < l0 {
        return;
    }
    out.reserve((l_max - l0 + 1) as usize);
    let cos_b = beta.cos();
    let mut prev2 = 0.0f64;
    let mut prev = seed(m1, m2, beta);
    out.push(prev);
    let fm1 = (m1 * m1) as f64;
    let fm2 = (m2 * m2) as f64;
    let fmm = (m1 * m2) as f64;
    for l in (l0 + 1)..=l_max {
        let lf = l as f64;
        let l1 = lf - 1.0;
        let denom = ((lf * lf - fm1) * (lf * lf - fm2)).sqrt();
        let sub = ((l1 * l1 - fm1) * (l1 * l1 - fm2)).sqrt();
        // at l = 1 the previous degree is 0 and m1 = m2 = 0, so both the
        // m1 m2 shift and the d^{l-2} coupling vanish; avoid the 0/0
        let middle = if fmm == 0.0 { cos_b } else { cos_b - fmm / (lf * l1) };
        let correction = if sub == 0.0 {
            0.0
        } else {
            sub / (l1 * (2.0 * lf - 1.0)) * prev2
        };
        let val = lf * (2.0 * lf - 1.0) / denom * (middle * prev - correction);
        prev2 = prev;
        prev = val;
        out.push(val);
    }
}

/// Single value `d^l_{m1,m2}(beta)`.
pub fn wigner_d(l: i64, m1: i64, m2: i64, beta: f64) -> f64 {
    let mut col = Vec::new();
    wigner_d_column(m1, m2, l, beta, &mut col);
    col.last().copied().unwrap_or(0.0)
}

/// Full rotation matrices `d^l` for `l = 0 ..= l_max` at one angle.
/// `matrices[l]` is a `(2l+1) x (2l+1)` row-major matrix indexed by
/// `(m1 + l, m2 + l)`.
pub fn wigner_d_matrices(l_max: i64, beta: f64) -> Vec<Vec<f64>> {
    let mut mats: Vec<Vec<f64>> = (0..=l_max)
        .map(|l| vec![0.0; ((2 * l + 1) * (2 * l + 1)) as usize])
        .collect();
    let mut col = Vec::new();
    for m1 in -l_max..=l_max {
        for m2 in -l_max..=l_max {
            let l0 = m1.abs().max(m2.abs());
            wigner_d_column(m1, m2, l_max, beta, &mut col);
            for (i, v) in col.iter().enumerate() {
                let l = l0 + i as i64;
                let n = 2 * l + 1;
                mats[l as usize][((m1 + l) * n + (m2 + l)) as usize] = *v;
            }
        }
    }
    mats
}

/// Per-ring table of the Wigner values entering spin-weighted harmonics.
///
/// For spin `s` and bandlimit `L`, stores `d^l_{-m, s}(theta)` for every grid
/// colatitude, every order `|m| <= L` and every degree
/// `max(|m|, |s|) <= l <= L`.
#[derive(Clone, Debug)]
pub struct WignerTable {
    lmax: usize,
    spin: i32,
    theta_nodes: Vec<f64>,
    /// Start of order m's run inside one ring's slab; index by `m + lmax`.
    offsets: Vec<usize>,
    ring_len: usize,
    /// One slab per ring, each of length `ring_len`.
    data: Vec<Vec<f64>>,
}

const CACHE_MAGIC: &[u8; 4] = b"SPWD";
const CACHE_VERSION: u32 = 1;

impl WignerTable {
    pub fn build(lmax: usize, spin: i32, theta_nodes: &[f64]) -> Self {
        let li = lmax as i64;
        let si = spin as i64;
        let mut offsets = Vec::with_capacity(2 * lmax + 1);
        let mut acc = 0usize;
        for m in -li..=li {
            offsets.push(acc);
            let l0 = m.abs().max(si.abs());
            if li >= l0 {
                acc += (li - l0 + 1) as usize;
            }
        }
        let ring_len = acc;
        let data: Vec<Vec<f64>> = theta_nodes
            .par_iter()
            .map(|&theta| {
                let mut slab = vec![0.0; ring_len];
                let mut col = Vec::new();
                for m in -li..=li {
                    let l0 = m.abs().max(si.abs());
                    if li < l0 {
                        continue;
                    }
                    wigner_d_column(-m, si, li, theta, &mut col);
                    let off = offsets[(m + li) as usize];
                    slab[off..off + col.len()].copy_from_slice(&col);
                }
                slab
            })
            .collect();
        Self {
            lmax,
            spin,
            theta_nodes: theta_nodes.to_vec(),
            offsets,
            ring_len,
            data,
        }
    }

    pub fn for_grid(grid: &QuadratureGrid, lmax: usize, spin: i32) -> Self {
        Self::build(lmax, spin, grid.theta_nodes())
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn spin(&self) -> i32 {
        self.spin
    }

    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    /// Slice of `d^l_{-m,s}(theta_t)` over `l = max(|m|,|s|) ..= L`.
    #[inline]
    pub fn column(&self, theta_idx: usize, m: i64) -> &[f64] {
        let li = self.lmax as i64;
        let off = self.offsets[(m + li) as usize];
        let l0 = m.abs().max(self.spin.abs() as i64);
        let len = if li >= l0 { (li - l0 + 1) as usize } else { 0 };
        &self.data[theta_idx][off..off + len]
    }

    /// D-matrix unitarity per (l, theta): `sum_m d^l_{-m,s}^2 = 1`.
    pub fn max_unitarity_defect(&self) -> f64 {
        let li = self.lmax as i64;
        let sa = self.spin.abs() as i64;
        let mut worst = 0.0f64;
        for t in 0..self.n_theta() {
            for l in sa..=li {
                let mut sum = 0.0;
                for m in -l..=l {
                    let col = self.column(t, m);
                    let l0 = m.abs().max(sa);
                    sum += col[(l - l0) as usize].powi(2);
                }
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    fn cache_file(dir: &Path, lmax: usize, spin: i32, grid_hash: u64) -> PathBuf {
        dir.join(format!("wigner_L{lmax}_s{spin}_{grid_hash:016x}.bin"))
    }

    /// Writes a versioned binary cache of the table.
    pub fn save_cache(&self, dir: &Path, grid_hash: u64) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = Self::cache_file(dir, self.lmax, self.spin, grid_hash);
        let tmp = path.with_extension("bin.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(CACHE_MAGIC)?;
            f.write_all(&CACHE_VERSION.to_le_bytes())?;
            f.write_all(&(self.lmax as u64).to_le_bytes())?;
            f.write_all(&self.spin.to_le_bytes())?;
            f.write_all(&(self.n_theta() as u64).to_le_bytes())?;
            f.write_all(&grid_hash.to_le_bytes())?;
            let mut buf = Vec::with_capacity(8 * (self.n_theta() + self.n_theta() * self.ring_len));
            for t in &self.theta_nodes {
                buf.extend_from_slice(&t.to_le_bytes());
            }
            for slab in &self.data {
                for v in slab {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            f.write_all(&buf)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads a cached table if a file with matching key exists and parses
    /// cleanly; any mismatch or corruption yields `None` so the caller
    /// recomputes.
    pub fn load_cache(dir: &Path, lmax: usize, spin: i32, grid_hash: u64) -> Option<Self> {
        let path = Self::cache_file(dir, lmax, spin, grid_hash);
        let bytes = fs::read(path).ok()?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Option<&[u8]> {
            let s = bytes.get(*pos..*pos + n)?;
            *pos += n;
            Some(s)
        };
        if take(&mut pos, 4)? != CACHE_MAGIC {
            return None;
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().ok()?);
        if version != CACHE_VERSION {
            return None;
        }
        let file_lmax = u64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?) as usize;
        let file_spin = i32::from_le_bytes(take(&mut pos, 4)?.try_into().ok()?);
        let n_theta = u64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?) as usize;
        let file_hash = u64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?);
        if file_lmax != lmax || file_spin != spin || file_hash != grid_hash {
            return None;
        }
        let mut theta_nodes = Vec::with_capacity(n_theta);
        for _ in 0..n_theta {
            theta_nodes.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?));
        }
        // reconstruct layout, then bulk-read slabs
        let li = lmax as i64;
        let si = spin as i64;
        let mut offsets = Vec::with_capacity(2 * lmax + 1);
        let mut acc = 0usize;
        for m in -li..=li {
            offsets.push(acc);
            let l0 = m.abs().max(si.abs());
            if li >= l0 {
                acc += (li - l0 + 1) as usize;
            }
        }
        let ring_len = acc;
        let mut data = Vec::with_capacity(n_theta);
        for _ in 0..n_theta {
            let mut slab = Vec::with_capacity(ring_len);
            for _ in 0..ring_len {
                slab.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?));
            }
            data.push(slab);
        }
        if pos != bytes.len() {
            return None;
        }
        Some(Self {
            lmax,
            spin,
            theta_nodes,
            offsets,
            ring_len,
            data,
        })
    }

    /// Loads from cache or builds and writes the cache. IO failures while
    /// writing are ignored; the freshly built table is returned regardless.
    pub fn load_or_build(dir: &Path, grid: &QuadratureGrid, lmax: usize, spin: i32) -> Self {
        let hash = grid.geometry_hash();
        if let Some(t) = Self::load_cache(dir, lmax, spin, hash) {
            if t.theta_nodes == grid.theta_nodes() {
                return t;
            }
        }
        let t = Self::for_grid(grid, lmax, spin);
        let _ = t.save_cache(dir, hash);
        t
    }
}
