//! Latitude-band partitions of S² with certified cell diameters.
//!
//! A partition at level `j` covers the sphere by two polar caps and a stack
//! of latitude rings, each ring split into equal longitude sectors.  Every
//! cell carries a certified upper bound on its geodesic diameter, and the
//! construction guarantees `diameter <= target_diam = b * a^j` for every
//! cell, plus the area lower bound `area >= c0 * target_diam^2` whenever
//! `target_diam < delta0`.
//!
//! Cells are *derived*, not stored: a ring descriptor fixes every one of its
//! sectors, so partitions with hundreds of millions of cells stay a few
//! kilobytes.  `cell(k)` materializes a single cell on demand.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sphere::point::{geodesic_distance, UnitPoint};

/// Largest measure constant `c0` this construction can promise for every
/// admissible `target_diam`; callers must request `c0` at or below it.
pub const C0_ACHIEVABLE: f64 = 0.1;

/// Default measure threshold `delta0`.
pub const DELTA0_DEFAULT: f64 = PI / 10.0;

/// One latitude ring of a partition: `n_sectors` congruent cells between two
/// colatitudes.  Polar caps and full annuli are rings with a single sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionRing {
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Colatitude of the cell centers: area-weighted midpoint of the band.
    pub center_theta: f64,
    pub n_sectors: u64,
    /// Area of each cell in the ring (steradians).
    pub cell_area: f64,
    /// Certified upper bound on the geodesic diameter of each cell.
    pub diameter_cert: f64,
    /// Number of cells in all preceding rings; cell `k` (1-based) of the
    /// partition lives in this ring iff `k_offset < k <= k_offset + n_sectors`.
    pub k_offset: u64,
}

impl PartitionRing {
    pub fn delta_phi(&self) -> f64 {
        2.0 * PI / self.n_sectors as f64
    }

    /// Longitude of the center of sector `i` (0-based).
    pub fn center_phi(&self, i: u64) -> f64 {
        -PI + (i as f64 + 0.5) * self.delta_phi()
    }

    pub fn is_full_circle(&self) -> bool {
        self.n_sectors == 1
    }
}

/// A single materialized partition cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub j: i64,
    pub k: u64,
    /// Closed-open colatitude interval.
    pub theta: [f64; 2],
    /// Closed-open longitude interval; `[-pi, pi)` for caps and annuli.
    pub phi: [f64; 2],
    pub center: UnitPoint,
    pub area: f64,
    pub diameter_bound: f64,
}

/// A level-`j` partition of the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub j: i64,
    pub target_diam: f64,
    pub c0: f64,
    pub delta0: f64,
    pub rings: Vec<PartitionRing>,
    pub total_cells: u64,
}

/// Geodesic diameter certificate for the spherical rectangle
/// `[theta_lo, theta_hi] x [0, delta_phi]`.
///
/// For cells whose extent stays within a quarter circle the bound is the
/// exact diameter (attained at corners or at the same-latitude pair closest
/// to the equator); beyond that regime a meridian-plus-parallel path bound
/// is used instead.
pub fn band_diameter_cert(theta_lo: f64, theta_hi: f64, delta_phi: f64) -> f64 {
    let g = delta_phi.min(PI);
    let half = (g / 2.0).sin();
    // latitude of maximal circumference inside the band
    let theta_star = (PI / 2.0).clamp(theta_lo, theta_hi);
    let c1 = theta_hi - theta_lo;
    let c2 = 2.0 * (theta_star.sin() * half).min(1.0).asin();
    let diag = (theta_lo.cos() * theta_hi.cos()
        + theta_lo.sin() * theta_hi.sin() * g.cos())
    .clamp(-1.0, 1.0)
    .acos();
    let m = c1.max(c2).max(diag);
    if m <= PI / 2.0 {
        m
    } else {
        (c1 + c2).min(PI)
    }
}

fn cap_center_theta(radius: f64, north: bool) -> f64 {
    // half the cap area lies above the center latitude
    let c = (1.0 + radius.cos()) / 2.0;
    if north {
        c.acos()
    } else {
        PI - c.acos()
    }
}

fn band_center_theta(theta_lo: f64, theta_hi: f64) -> f64 {
    ((theta_lo.cos() + theta_hi.cos()) / 2.0).clamp(-1.0, 1.0).acos()
}

/// Builds the level-`j` partition with `target_diam = b * a^j`.
pub fn build_partition(j: i64, a: f64, b: f64, c0: f64, delta0: f64) -> Result<Partition> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("scale base a={a} must exceed 1")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidArgument(format!("fineness b={b} must lie in (0, 1)")));
    }
    if !(delta0 > 0.0) {
        return Err(Error::InvalidArgument(format!("delta0={delta0} must be positive")));
    }
    if !(c0 > 0.0) {
        return Err(Error::InvalidArgument(format!("c0={c0} must be positive")));
    }
    if c0 > C0_ACHIEVABLE {
        return Err(Error::MeasureConstant {
            requested: c0,
            achievable: C0_ACHIEVABLE,
        });
    }
    let target_diam = b * powi_f(a, j);
    if !target_diam.is_finite() || target_diam <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target diameter b*a^j = {target_diam} is not a positive finite number"
        )));
    }

    let mut rings = Vec::new();
    let mut offset = 0u64;

    if target_diam >= PI {
        // the whole sphere is one cell: its diameter is pi
        rings.push(PartitionRing {
            theta_lo: 0.0,
            theta_hi: PI,
            center_theta: PI / 2.0,
            n_sectors: 1,
            cell_area: 4.0 * PI,
            diameter_cert: PI,
            k_offset: 0,
        });
        return finish_partition(j, target_diam, c0, delta0, rings, 1);
    }

    let cap_radius = target_diam / 2.0;
    let band_height = target_diam / std::f64::consts::SQRT_2;
    let band_span = PI - 2.0 * cap_radius;
    let n_rings = (band_span / band_height).ceil().max(1.0) as u64;
    let ring_height = band_span / n_rings as f64;

    // north cap: diameter is exactly 2 * cap_radius
    rings.push(PartitionRing {
        theta_lo: 0.0,
        theta_hi: cap_radius,
        center_theta: cap_center_theta(cap_radius, true),
        n_sectors: 1,
        cell_area: 2.0 * PI * (1.0 - cap_radius.cos()),
        diameter_cert: 2.0 * cap_radius,
        k_offset: offset,
    });
    offset += 1;

    for i in 0..n_rings {
        let theta_lo = cap_radius + i as f64 * ring_height;
        let theta_hi = if i + 1 == n_rings {
            PI - cap_radius
        } else {
            cap_radius + (i + 1) as f64 * ring_height
        };
        let theta_mid = 0.5 * (theta_lo + theta_hi);
        let mut n = ((2.0 * PI * theta_mid.sin() * std::f64::consts::SQRT_2 / target_diam).ceil()
            as u64)
            .max(1);
        let mut cert = band_diameter_cert(theta_lo, theta_hi, 2.0 * PI / n as f64);
        // The seed count keeps the mid-latitude arc at target/sqrt(2); rings whose
        // widest latitude sits away from the midpoint may need a few more sectors
        // to certify.  The loop terminates because the certificate tends to the
        // band height as n grows.
        while cert > target_diam {
            n += 1;
            cert = band_diameter_cert(theta_lo, theta_hi, 2.0 * PI / n as f64);
        }
        let delta_phi = 2.0 * PI / n as f64;
        rings.push(PartitionRing {
            theta_lo,
            theta_hi,
            center_theta: band_center_theta(theta_lo, theta_hi),
            n_sectors: n,
            cell_area: delta_phi * (theta_lo.cos() - theta_hi.cos()),
            diameter_cert: cert,
            k_offset: offset,
        });
        offset += n;
    }

    // south cap
    rings.push(PartitionRing {
        theta_lo: PI - cap_radius,
        theta_hi: PI,
        center_theta: cap_center_theta(cap_radius, false),
        n_sectors: 1,
        cell_area: 2.0 * PI * (1.0 - cap_radius.cos()),
        diameter_cert: 2.0 * cap_radius,
        k_offset: offset,
    });
    offset += 1;

    finish_partition(j, target_diam, c0, delta0, rings, offset)
}

fn finish_partition(
    j: i64,
    target_diam: f64,
    c0: f64,
    delta0: f64,
    rings: Vec<PartitionRing>,
    total_cells: u64,
) -> Result<Partition> {
    let p = Partition {
        j,
        target_diam,
        c0,
        delta0,
        rings,
        total_cells,
    };
    if p.target_diam < p.delta0 {
        let bound = c0 * target_diam * target_diam;
        let min_area = p
            .rings
            .iter()
            .map(|r| r.cell_area)
            .fold(f64::INFINITY, f64::min);
        if min_area < bound {
            return Err(Error::MeasureConstant {
                requested: c0,
                achievable: min_area / (target_diam * target_diam),
            });
        }
    }
    Ok(p)
}

/// Integer power that stays exact for moderate exponents.
pub fn powi_f(a: f64, j: i64) -> f64 {
    if j >= 0 {
        a.powi(j.min(i32::MAX as i64) as i32)
    } else {
        a.powi(j.max(i32::MIN as i64) as i32)
    }
}

impl Partition {
    /// Ring index and sector index of cell `k` (1-based).
    pub fn locate(&self, k: u64) -> Option<(usize, u64)> {
        if k == 0 || k > self.total_cells {
            return None;
        }
        let idx = self
            .rings
            .partition_point(|r| r.k_offset < k)
            .checked_sub(1)?;
        Some((idx, k - 1 - self.rings[idx].k_offset))
    }

    /// Materializes cell `k` (1-based).
    pub fn cell(&self, k: u64) -> Option<Cell> {
        let (ridx, sector) = self.locate(k)?;
        let ring = &self.rings[ridx];
        let (phi_lo, phi_hi) = if ring.is_full_circle() {
            (-PI, PI)
        } else {
            let dphi = ring.delta_phi();
            (-PI + sector as f64 * dphi, -PI + (sector + 1) as f64 * dphi)
        };
        let center_phi = if ring.is_full_circle() && (ring.theta_lo == 0.0 || ring.theta_hi == PI) {
            0.0
        } else {
            ring.center_phi(sector)
        };
        Some(Cell {
            j: self.j,
            k,
            theta: [ring.theta_lo, ring.theta_hi],
            phi: [phi_lo, phi_hi],
            center: UnitPoint::new(ring.center_theta, center_phi).expect("valid center"),
            area: ring.cell_area,
            diameter_bound: ring.diameter_cert,
        })
    }

    /// Iterates over all cells in k order.  Intended for modest partitions;
    /// deep levels should work ring-by-ring instead.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (1..=self.total_cells).map(move |k| self.cell(k).expect("k in range"))
    }

    pub fn total_area(&self) -> f64 {
        let areas: Vec<f64> = self
            .rings
            .iter()
            .map(|r| r.cell_area * r.n_sectors as f64)
            .collect();
        crate::sphere::quadrature::pairwise_sum(&areas)
    }

    /// Checks every partition invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        if (self.total_area() - 4.0 * PI).abs() > 1e-9 {
            return Err(Error::PartitionConstraint(format!(
                "areas sum to {} instead of 4*pi",
                self.total_area()
            )));
        }
        let mut expected_offset = 0u64;
        let mut prev_hi = 0.0f64;
        for (i, r) in self.rings.iter().enumerate() {
            if r.k_offset != expected_offset {
                return Err(Error::PartitionConstraint(format!(
                    "ring {i} has k_offset {} (expected {expected_offset})",
                    r.k_offset
                )));
            }
            expected_offset += r.n_sectors;
            if i == 0 && r.theta_lo != 0.0 {
                return Err(Error::PartitionConstraint("first ring must start at the pole".into()));
            }
            if i > 0 && (r.theta_lo - prev_hi).abs() > 1e-12 {
                return Err(Error::PartitionConstraint(format!(
                    "ring {i} is not contiguous with its predecessor"
                )));
            }
            prev_hi = r.theta_hi;
            if r.diameter_cert > self.target_diam * (1.0 + 1e-12) {
                return Err(Error::PartitionConstraint(format!(
                    "ring {i} diameter certificate {} exceeds target {}",
                    r.diameter_cert, self.target_diam
                )));
            }
            if !(r.cell_area > 0.0) {
                return Err(Error::PartitionConstraint(format!("ring {i} has non-positive cell area")));
            }
            let analytic = if r.is_full_circle() {
                2.0 * PI * (r.theta_lo.cos() - r.theta_hi.cos())
            } else {
                r.delta_phi() * (r.theta_lo.cos() - r.theta_hi.cos())
            };
            if (r.cell_area - analytic).abs() > 1e-12 {
                return Err(Error::PartitionConstraint(format!(
                    "ring {i} area {} deviates from analytic {}",
                    r.cell_area, analytic
                )));
            }
            if !(r.center_theta >= r.theta_lo && r.center_theta <= r.theta_hi) {
                return Err(Error::PartitionConstraint(format!("ring {i} center leaves the band")));
            }
            if self.target_diam < self.delta0
                && r.cell_area < self.c0 * self.target_diam * self.target_diam
            {
                return Err(Error::PartitionConstraint(format!(
                    "ring {i} cell area {} below measure bound",
                    r.cell_area
                )));
            }
        }
        if (self.rings.last().unwrap().theta_hi - PI).abs() > 1e-12 {
            return Err(Error::PartitionConstraint("last ring must end at the pole".into()));
        }
        if expected_offset != self.total_cells {
            return Err(Error::PartitionConstraint("cell count mismatch".into()));
        }
        Ok(())
    }
}

/// Exhaustive diameter estimate from dense boundary sampling, used to
/// validate the closed-form certificate.
pub fn sampled_cell_diameter(cell: &Cell, samples_per_edge: usize) -> f64 {
    let mut pts = Vec::new();
    let n = samples_per_edge.max(2);
    let full = cell.phi[1] - cell.phi[0] >= 2.0 * PI - 1e-12;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let theta = cell.theta[0] + t * (cell.theta[1] - cell.theta[0]);
        let phi = cell.phi[0] + t * (cell.phi[1] - cell.phi[0]);
        let phi = phi.min(cell.phi[1] - 1e-15);
        // the two latitude edges
        for edge_theta in [cell.theta[0], cell.theta[1]] {
            if edge_theta == 0.0 || edge_theta == PI {
                continue;
            }
            pts.push(UnitPoint::new(edge_theta, phi).unwrap());
        }
        // the two meridian edges (coincide for full circles)
        if !full {
            pts.push(UnitPoint::new(theta, cell.phi[0]).unwrap());
            pts.push(UnitPoint::new(theta, cell.phi[1]).unwrap());
        } else {
            pts.push(UnitPoint::new(theta, cell.phi[0] + t).unwrap());
        }
    }
    if cell.theta[0] == 0.0 {
        pts.push(UnitPoint::north_pole());
    }
    if cell.theta[1] >= PI {
        pts.push(UnitPoint::south_pole());
    }
    let mut max = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            max = max.max(geodesic_distance(&pts[i], &pts[j]));
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sized_target_gives_single_cell() {
        let p = build_partition(0, 2.0, 0.999, 0.05, DELTA0_DEFAULT).unwrap();
        // b * a^0 < pi, so force via large j instead
        let p2 = build_partition(3, 2.0, 0.5, 0.05, DELTA0_DEFAULT).unwrap();
        assert!(p.total_cells > 1);
        assert_eq!(p2.total_cells, 1);
        assert_eq!(p2.rings[0].diameter_cert, PI);
        p2.validate().unwrap();
    }

    #[test]
    fn cells_pass_certificate_and_measure_bound() {
        // target_diam 0.1 via j = 0, a = 2, b = 0.1
        let p = build_partition(0, 2.0, 0.1, 0.05, DELTA0_DEFAULT).unwrap();
        p.validate().unwrap();
        let bound = 0.05 * 0.1 * 0.1;
        for r in &p.rings {
            assert!(r.diameter_cert <= 0.1 + 1e-15);
            assert!(r.cell_area >= bound);
        }
    }

    #[test]
    fn certificate_upper_bounds_sampled_diameter() {
        for (j, b) in [(0i64, 0.9f64), (0, 0.3), (-2, 0.7), (-4, 0.9), (1, 0.9)] {
            let p = build_partition(j, 1.7, b, 0.05, DELTA0_DEFAULT).unwrap();
            // check a spread of rings including caps
            let step = (p.rings.len() / 7).max(1);
            for r_idx in (0..p.rings.len()).step_by(step) {
                let ring = &p.rings[r_idx];
                let k = ring.k_offset + 1;
                let cell = p.cell(k).unwrap();
                let sampled = sampled_cell_diameter(&cell, 48);
                assert!(
                    sampled <= cell.diameter_bound + 1e-9,
                    "j={j} b={b} ring={r_idx}: sampled {sampled} > cert {}",
                    cell.diameter_bound
                );
                // the certificate should be tight, not a gross overestimate
                assert!(
                    cell.diameter_bound <= sampled + 0.35 * cell.diameter_bound + 1e-9,
                    "j={j} b={b} ring={r_idx}: cert {} vs sampled {sampled}",
                    cell.diameter_bound
                );
            }
        }
    }

    #[test]
    fn areas_sum_to_full_sphere_across_levels() {
        for j in -5..=0 {
            let p = build_partition(j, 2.0, 0.3, 0.05, DELTA0_DEFAULT).unwrap();
            assert!(
                (p.total_area() - 4.0 * PI).abs() < 1e-9,
                "level {j}: area {}",
                p.total_area()
            );
            p.validate().unwrap();
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let p1 = build_partition(-3, 1.5, 0.2, 0.05, DELTA0_DEFAULT).unwrap();
        let p2 = build_partition(-3, 1.5, 0.2, 0.05, DELTA0_DEFAULT).unwrap();
        let b1 = serde_json::to_vec(&p1).unwrap();
        let b2 = serde_json::to_vec(&p2).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn oversized_measure_constant_is_rejected() {
        let err = build_partition(0, 2.0, 0.1, 0.2, DELTA0_DEFAULT).unwrap_err();
        match err {
            Error::MeasureConstant { achievable, .. } => {
                assert!((achievable - C0_ACHIEVABLE).abs() < 1e-15)
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn centers_lie_inside_cells() {
        let p = build_partition(-1, 2.0, 0.4, 0.05, DELTA0_DEFAULT).unwrap();
        for k in 1..=p.total_cells.min(500) {
            let c = p.cell(k).unwrap();
            assert!(c.center.theta() >= c.theta[0] && c.center.theta() <= c.theta[1]);
            if c.phi[1] - c.phi[0] < 2.0 * PI {
                assert!(c.center.phi() >= c.phi[0] && c.center.phi() < c.phi[1]);
            }
            // cap centers must avoid the exact pole
            assert!(!c.center.is_pole());
        }
    }

    #[test]
    fn locate_roundtrips() {
        let p = build_partition(-2, 2.0, 0.3, 0.05, DELTA0_DEFAULT).unwrap();
        assert!(p.cell(0).is_none());
        assert!(p.cell(p.total_cells + 1).is_none());
        for k in 1..=p.total_cells {
            let (r, s) = p.locate(k).unwrap();
            assert_eq!(p.rings[r].k_offset + s + 1, k);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(build_partition(0, 1.0, 0.5, 0.05, DELTA0_DEFAULT).is_err());
        assert!(build_partition(0, 2.0, 0.0, 0.05, DELTA0_DEFAULT).is_err());
        assert!(build_partition(0, 2.0, 1.0, 0.05, DELTA0_DEFAULT).is_err());
        assert!(build_partition(0, 2.0, 0.5, -0.1, DELTA0_DEFAULT).is_err());
    }
}
