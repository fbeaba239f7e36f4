//! Mapping the mean-square-stable set of `(σ₁, σ₂)` for two uncertain links.
//!
//! The region is star-shaped around the origin, so it is sampled ray by
//! ray: for each angle `θ` the radius `r` at which `r (cos θ, sin θ)` leaves
//! the stable set is found by bisection. Rectangles inscribed in the region
//! are then read off by intersecting weighted rays with the boundary polyline.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{AssembledNetwork, LinkId};
use crate::sensitivity::{self, SensitivityReport};

use super::operator::LoopGain;

/// Ray count used when the caller has no preference.
pub const DEFAULT_ANGLES: usize = 181;
/// Bisection tolerance on the boundary radius.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// One sampled boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayPoint {
    pub angle: f64,
    pub radius: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// An axis-aligned rectangle `[0, σ₁*] × [0, σ₂*]` with its corner on the
/// boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub corner: (f64, f64),
    pub area: f64,
}

/// The sampled region plus the three reference rectangles.
#[derive(Clone, Debug)]
pub struct RegionResult {
    pub links: (LinkId, LinkId),
    pub rays: Vec<RayPoint>,
    /// Stable bound of each link when the other is certain.
    pub siso_bounds: (f64, f64),
    /// Corner on the diagonal `σ₁ = σ₂`.
    pub uniform_square: Rectangle,
    /// Corner along `(F₁, F₂)`.
    pub f_scaled: Rectangle,
    /// Corner along `(S₁, S₂)`.
    pub s_scaled: Rectangle,
    pub sensitivity: SensitivityReport,
}

impl RegionResult {
    /// `(σ₁, σ₂)` boundary points in angle order.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        self.rays.iter().map(|r| (r.sigma1, r.sigma2)).collect()
    }
}

/// Samples the boundary of the stable set on `n_angles` rays uniformly
/// spaced over `[0, π/2]`, bisecting each radius to within `tol`.
pub fn feasibility_boundary(net: &AssembledNetwork, n_angles: usize, tol: f64) -> Result<RegionResult> {
    if net.links().len() != 2 {
        return Err(Error::Validation(format!(
            "region mapping needs exactly two uncertain links, found {}",
            net.links().len()
        )));
    }
    if n_angles < 8 {
        return Err(Error::Validation(format!("need at least 8 angles, got {n_angles}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Validation(format!("bisection tolerance must be positive, got {tol}")));
    }
    // LoopGain needs the Gramians, which fail on an unstable nominal map
    let gain = LoopGain::new(net).map_err(|e| match e {
        Error::Unstable { radius } => Error::Validation(format!(
            "nominal system is not stable (radius {radius}); the stable region is empty"
        )),
        other => other,
    })?;
    let sensitivity = sensitivity::analyze(net)?;
    let siso = (sensitivity.s[0].1, sensitivity.s[1].1);
    let upper = 10.0 * siso.0.max(siso.1);

    let rays: Vec<RayPoint> = (0..n_angles)
        .into_par_iter()
        .map(|i| {
            let angle = if i + 1 == n_angles {
                FRAC_PI_2
            } else {
                FRAC_PI_2 * i as f64 / (n_angles - 1) as f64
            };
            let (dir1, dir2) = ray_direction(angle);
            let radius = bisect_radius(|r| gain.is_mss(&[r * dir1, r * dir2]), upper, tol);
            RayPoint { angle, radius, sigma1: radius * dir1, sigma2: radius * dir2 }
        })
        .collect();

    let ids = net.link_ids();
    let mut result = RegionResult {
        links: (ids[0].clone(), ids[1].clone()),
        rays,
        siso_bounds: siso,
        uniform_square: Rectangle { corner: (0.0, 0.0), area: 0.0 },
        f_scaled: Rectangle { corner: (0.0, 0.0), area: 0.0 },
        s_scaled: Rectangle { corner: (0.0, 0.0), area: 0.0 },
        sensitivity,
    };
    result.uniform_square = scaled_rectangle(&result, (1.0, 1.0))?;
    result.f_scaled = scaled_rectangle(&result, (result.sensitivity.f[0].1, result.sensitivity.f[1].1))?;
    result.s_scaled = scaled_rectangle(&result, (result.sensitivity.s[0].1, result.sensitivity.s[1].1))?;
    Ok(result)
}

fn ray_direction(angle: f64) -> (f64, f64) {
    // exact zeros on the axes keep the axis rays single-link
    if angle == 0.0 {
        (1.0, 0.0)
    } else if angle == FRAC_PI_2 {
        (0.0, 1.0)
    } else {
        (angle.cos(), angle.sin())
    }
}

/// Largest `r` in `[0, upper]` with `stable(r)`, assuming `stable` holds on
/// an initial segment only.
pub(crate) fn bisect_radius(stable: impl Fn(f64) -> bool, upper: f64, tol: f64) -> f64 {
    if stable(upper) {
        return upper;
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rectangle whose corner is where the ray along `(w₁, w₂)` meets the
/// boundary polyline (linear interpolation between adjacent rays), so that
/// `σ₁ / w₁ = σ₂ / w₂` at the corner.
pub fn scaled_rectangle(region: &RegionResult, weights: (f64, f64)) -> Result<Rectangle> {
    let (w1, w2) = weights;
    if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
        return Err(Error::Validation(format!("rectangle weights must be positive, got ({w1}, {w2})")));
    }
    let phi = w2.atan2(w1);
    let rays = &region.rays;
    let seg = rays
        .windows(2)
        .position(|w| w[0].angle <= phi && phi <= w[1].angle)
        .ok_or_else(|| Error::Validation("weight ray outside the sampled angle range".into()))?;
    let (p, q) = (rays[seg], rays[seg + 1]);
    // intersect t (cos φ, sin φ) with p + s (q − p)
    let (dx, dy) = (phi.cos(), phi.sin());
    let (ex, ey) = (q.sigma1 - p.sigma1, q.sigma2 - p.sigma2);
    let denom = dx * ey - dy * ex;
    let t = if denom.abs() < 1e-300 {
        p.radius
    } else {
        (p.sigma1 * ey - p.sigma2 * ex) / denom
    };
    let corner = (t * dx, t * dy);
    Ok(Rectangle { corner, area: corner.0 * corner.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::network::{network_from_directions, Direction};
    use approx::assert_abs_diff_eq;

    fn scalar_two_link(a: f64, (b1, c1): (f64, f64), (b2, c2): (f64, f64)) -> AssembledNetwork {
        network_from_directions(
            DenseMatrix::from_row_slice(1, 1, &[a]).unwrap(),
            vec![Direction::new("L1", vec![b1], vec![c1], 1.0), Direction::new("L2", vec![b2], vec![c2], 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn scalar_region_is_an_ellipse_arc() {
        let (a, g1, g2) = (0.6, 2.0 * 0.5, 1.5 * 2.0);
        let net = scalar_two_link(a, (2.0, 0.5), (1.5, 2.0));
        let region = feasibility_boundary(&net, 37, 1e-9).unwrap();
        assert_eq!(region.rays.len(), 37);
        for ray in &region.rays {
            let lhs = (ray.sigma1 * g1).powi(2) + (ray.sigma2 * g2).powi(2);
            assert_abs_diff_eq!(lhs, 1.0 - a * a, epsilon = 1e-8);
        }
        let s1 = (1.0f64 - a * a).sqrt() / g1;
        assert_abs_diff_eq!(region.rays[0].sigma1, s1, epsilon = 1e-8);
        assert_abs_diff_eq!(region.siso_bounds.0, s1, epsilon = 1e-12);
        assert_eq!(region.rays[0].sigma2, 0.0);
        assert_eq!(region.rays.last().unwrap().sigma1, 0.0);
    }

    #[test]
    fn symmetric_region_gives_square() {
        let net = scalar_two_link(0.5, (1.0, 1.0), (1.0, 1.0));
        let region = feasibility_boundary(&net, 181, 1e-9).unwrap();
        let sq = region.uniform_square;
        assert_abs_diff_eq!(sq.corner.0, sq.corner.1, epsilon = 1e-12);
        // corner on sigma1^2 + sigma2^2 = 0.75
        assert_abs_diff_eq!(2.0 * sq.corner.0 * sq.corner.0, 0.75, epsilon = 1e-7);
        assert_abs_diff_eq!(sq.area, 0.375, epsilon = 1e-7);
    }

    #[test]
    fn interpolated_corner_between_rays() {
        // few rays: the corner must sit on the chord, not on the true curve
        let net = scalar_two_link(0.0, (1.0, 1.0), (1.0, 1.0));
        let region = feasibility_boundary(&net, 8, 1e-12).unwrap();
        let r = scaled_rectangle(&region, (1.0, 1.0)).unwrap();
        let radius = (r.corner.0.powi(2) + r.corner.1.powi(2)).sqrt();
        assert!(radius <= 1.0 + 1e-9 && radius > 0.97, "{radius}");
    }

    #[test]
    fn argument_validation() {
        let one = network_from_directions(
            DenseMatrix::from_row_slice(1, 1, &[0.5]).unwrap(),
            vec![Direction::new("L1", vec![1.0], vec![1.0], 1.0)],
        )
        .unwrap();
        assert!(feasibility_boundary(&one, 16, 1e-6).is_err());
        let two = scalar_two_link(0.5, (1.0, 1.0), (1.0, 1.0));
        assert!(feasibility_boundary(&two, 4, 1e-6).is_err());
        assert!(feasibility_boundary(&two, 16, 0.0).is_err());
        let unstable = scalar_two_link(1.2, (1.0, 1.0), (1.0, 1.0));
        assert!(matches!(feasibility_boundary(&unstable, 16, 1e-6), Err(Error::Validation(_))));
        let region = feasibility_boundary(&two, 16, 1e-6).unwrap();
        assert!(scaled_rectangle(&region, (0.0, 1.0)).is_err());
        assert!(scaled_rectangle(&region, (-1.0, 1.0)).is_err());
    }

    #[test]
    fn bisection_finds_threshold() {
        let r = bisect_radius(|r| r < 0.3, 1.0, 1e-10);
        assert_abs_diff_eq!(r, 0.3, epsilon = 1e-10);
        assert_eq!(bisect_radius(|_| true, 2.0, 1e-6), 2.0);
    }
}
