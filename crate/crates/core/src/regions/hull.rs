use serde::Serialize;

/// Convexified, down-closed set of achievable rate pairs. Construction clamps
/// negative coordinates to zero (raw bound values may be negative; the region
/// itself lives in the nonnegative quadrant) and always contains the origin.
#[derive(Debug, Clone, Serialize)]
pub struct RateRegion {
    /// Pareto frontier of the convex hull: R1 strictly increasing, R2 strictly
    /// decreasing. A single entry means a rectangle.
    frontier: Vec<(f64, f64)>,
}

const GEOM_TOL: f64 = 1e-12;

pub fn region_hull(points: &[(f64, f64)]) -> RateRegion {
    RateRegion::from_points(points)
}

impl RateRegion {
    pub fn from_points(points: &[(f64, f64)]) -> RateRegion {
        let mut pts: Vec<(f64, f64)> = points
            .iter()
            .map(|&(a, b)| (a.max(0.0), b.max(0.0)))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect();
        pts.push((0.0, 0.0));
        let max_r1 = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        let max_r2 = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        // Axis projections realize the down-closure before hulling.
        pts.push((max_r1, 0.0));
        pts.push((0.0, max_r2));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (a.0 - b.0).abs() <= GEOM_TOL && (a.1 - b.1).abs() <= GEOM_TOL);

        // Upper convex chain over increasing R1 (Andrew's monotone chain, top
        // half). Points are already sorted by (R1, R2).
        let mut chain: Vec<(f64, f64)> = Vec::new();
        for &p in &pts {
            while chain.len() >= 2 {
                let a = chain[chain.len() - 2];
                let b = chain[chain.len() - 1];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                // Keep only left turns as seen from below, i.e. concave top.
                if cross >= -GEOM_TOL {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(p);
        }
        // Drop chain vertices dominated by another vertex (e.g. the artificial
        // (0, max_r2) when some point attains max_r2 at positive R1).
        let frontier: Vec<(f64, f64)> = chain
            .iter()
            .filter(|&&(a, b)| {
                !chain
                    .iter()
                    .any(|&(c, d)| c >= a + GEOM_TOL && d >= b - GEOM_TOL
                        || c >= a - GEOM_TOL && d >= b + GEOM_TOL)
            })
            .cloned()
            .collect();
        if frontier.is_empty() {
            return RateRegion {
                frontier: vec![(0.0, 0.0)],
            };
        }
        RateRegion { frontier }
    }

    pub fn frontier(&self) -> &[(f64, f64)] {
        &self.frontier
    }

    pub fn max_r1(&self) -> f64 {
        self.frontier.last().map(|p| p.0).unwrap_or(0.0)
    }

    pub fn max_r2(&self) -> f64 {
        self.frontier.first().map(|p| p.1).unwrap_or(0.0)
    }

    pub fn sum_rate_max(&self) -> f64 {
        self.frontier
            .iter()
            .map(|p| p.0 + p.1)
            .fold(0.0, f64::max)
    }

    /// Largest achievable R2 at the given R1 (piecewise linear along the
    /// frontier, flat at max_r2 left of the first vertex). None when r1
    /// exceeds the region.
    pub fn max_r2_at(&self, r1: f64) -> Option<f64> {
        if r1 > self.max_r1() + GEOM_TOL {
            return None;
        }
        let f = &self.frontier;
        if r1 <= f[0].0 {
            return Some(f[0].1);
        }
        for w in f.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if r1 <= x1 {
                let t = if x1 > x0 { (r1 - x0) / (x1 - x0) } else { 1.0 };
                return Some(y0 + t * (y1 - y0));
            }
        }
        Some(f.last().unwrap().1)
    }

    pub fn contains(&self, r1: f64, r2: f64, tol: f64) -> bool {
        if r1 <= tol && r2 <= tol {
            return true;
        }
        match self.max_r2_at(r1.max(0.0)) {
            Some(cap) => r2 <= cap + tol,
            None => false,
        }
    }
}
