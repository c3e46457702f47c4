//! Band-limited quadrature on S².
//!
//! The grid is a tensor product of Gauss–Legendre nodes in cos(theta) with a
//! uniform longitude grid, sized so that every integrand of the form
//! `p(cos theta) e^{i m phi}` with `deg p <= 2L`, `|m| <= 2L` is integrated
//! exactly.  This is the discretization backing all transforms; nothing in
//! the library integrates on the sphere any other way.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sphere::point::{wrap_phi, UnitPoint};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence; nodes accurate to ~1e-15
/// for n up to a few thousand.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pair(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomial values `P_0(x) ... P_n(x)`.
pub fn legendre_upto(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 2..=n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

/// Quadrature grid exact for products of spherical polynomials up to
/// degree 2L.
///
/// Samples are ordered theta-major: sample index `t * n_phi + p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    bandlimit: usize,
    /// Colatitudes of the Gauss–Legendre rings (ascending theta).
    theta_nodes: Vec<f64>,
    /// Gauss–Legendre weights in cos(theta), one per ring.
    theta_weights: Vec<f64>,
    /// Longitudes, canonicalized to [-pi, pi); uniform spacing 2 pi / (2L+1).
    phi_nodes: Vec<f64>,
}

impl QuadratureGrid {
    /// Builds the grid for bandlimit `L >= 1`: `L+1` rings times `2L+1`
    /// longitudes.
    pub fn new(bandlimit: usize) -> Result<Self> {
        if bandlimit < 1 {
            return Err(Error::InvalidArgument("bandlimit must be >= 1".into()));
        }
        let n_theta = bandlimit + 1;
        let n_phi = 2 * bandlimit + 1;
        let (x, w) = gauss_legendre(n_theta);
        // Gauss-Legendre nodes are interior, so no ring sits on a pole.
        // acos of descending x gives ascending theta.
        let mut theta_nodes = Vec::with_capacity(n_theta);
        let mut theta_weights = Vec::with_capacity(n_theta);
        for i in (0..n_theta).rev() {
            theta_nodes.push(x[i].acos());
            theta_weights.push(w[i]);
        }
        let phi_nodes = (0..n_phi)
            .map(|i| wrap_phi(2.0 * PI * i as f64 / n_phi as f64))
            .collect();
        Ok(Self {
            bandlimit,
            theta_nodes,
            theta_weights,
            phi_nodes,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_nodes.len()
    }

    pub fn sample_count(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi_nodes
    }

    /// Combined quadrature weight of one (theta, phi) sample.
    pub fn weight(&self, theta_idx: usize) -> f64 {
        self.theta_weights[theta_idx] * 2.0 * PI / self.n_phi() as f64
    }

    pub fn point(&self, theta_idx: usize, phi_idx: usize) -> UnitPoint {
        UnitPoint::new(self.theta_nodes[theta_idx], self.phi_nodes[phi_idx])
            .expect("grid nodes are valid points")
    }

    /// Integrates a sampled function over S² (values ordered theta-major).
    pub fn integrate<F: Fn(usize) -> f64>(&self, value: F) -> f64 {
        let n_phi = self.n_phi();
        let mut ring_sums = Vec::with_capacity(self.n_theta());
        for t in 0..self.n_theta() {
            let mut s = 0.0;
            for p in 0..n_phi {
                s += value(t * n_phi + p);
            }
            ring_sums.push(s * self.weight(t));
        }
        pairwise_sum(&ring_sums)
    }

    /// Deterministic content hash of the grid geometry, used to key caches.
    pub fn geometry_hash(&self) -> u64 {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(u64::try_from(self.bandlimit).unwrap().to_le_bytes());
        for v in &self.theta_nodes {
            h.update(v.to_le_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }
}

/// Fixed-order pairwise summation; bitwise deterministic for a given input
/// order and length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Pairwise summation for complex values.
pub fn pairwise_sum_complex(values: &[num_complex::Complex64]) -> num_complex::Complex64 {
    match values.len() {
        0 => num_complex::Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
        }
    }
}
