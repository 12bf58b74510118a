//! Observation windows, point clouds and radius-selection rules.

use crate::error::{Error, Result};

/// Relative tolerance for the unit-volume invariant of a window.
const VOLUME_TOL: f64 = 1e-12;

/// Volume of the d-dimensional unit ball, `pi^(d/2) / Gamma(d/2 + 1)`.
///
/// The gamma factor is evaluated exactly for half-integer arguments by
/// multiplying up from `Gamma(1)` (even d) or `Gamma(1/2) = sqrt(pi)`
/// (odd d).
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut gamma = if d.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    // Gamma(z + 1) = z * Gamma(z), stepping z = d/2, d/2 - 1, ... down to
    // 1 (even d) or 1/2 (odd d).
    let mut z = d as f64 / 2.0;
    while z >= 0.5 {
        gamma *= z;
        z -= 1.0;
    }
    Ok(std::f64::consts::PI.powf(d as f64 / 2.0) / gamma)
}

/// Radius rule targeting a limiting expected average degree of `k`:
/// `r_n = (k / (n * kappa_d))^(1/d)`.
pub fn radius_exact_regime(n: usize, d: usize, k: f64) -> Result<f64> {
    radius_from_denominator(n, d, k, n as f64)
}

/// Radius rule for the asymptotic-centering statistic,
/// `r_n = (k / (n^(3/2) * kappa_d))^(1/d)`, which additionally satisfies
/// `n^2 r_n^(d+2) -> 0` for d in {2, 3}.
pub fn radius_asymptotic_regime(n: usize, d: usize, k: f64) -> Result<f64> {
    radius_from_denominator(n, d, k, (n as f64).powf(1.5))
}

fn radius_from_denominator(n: usize, d: usize, k: f64, n_pow: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewPoints(n, 2));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    let kappa = unit_ball_volume(d)?;
    let r = (k / (n_pow * kappa)).powf(1.0 / d as f64);
    // The closed-form null means hold only for r <= 1.
    if r > 1.0 {
        return Err(Error::RadiusOutOfRange { r, max: 1.0 });
    }
    Ok(r)
}

/// A unit-volume observation window: the unit cube, or an axis-aligned box
/// rescaled isotropically so that its volume is 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    UnitCube(usize),
    Box {
        /// Normalized side lengths, with product 1.
        sides: Vec<f64>,
        /// Side lengths before normalization.
        original: Vec<f64>,
        /// Isotropic factor applied to the original sides (and to any data).
        scale: f64,
    },
}

impl Window {
    pub fn unit_cube(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        Ok(Window::UnitCube(d))
    }

    /// Normalizes a box to unit volume with a single isotropic scale
    /// `s = volume^(-1/d)`, preserving the shape. The same scale must be
    /// applied to every data coordinate.
    pub fn normalize_box(side_lengths: &[f64]) -> Result<Self> {
        let d = side_lengths.len();
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        for &s in side_lengths {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidSideLength(s));
            }
        }
        let volume: f64 = side_lengths.iter().product();
        let scale = volume.powf(-1.0 / d as f64);
        let sides: Vec<f64> = side_lengths.iter().map(|&s| s * scale).collect();
        let normalized_volume: f64 = sides.iter().product();
        if (normalized_volume - 1.0).abs() > VOLUME_TOL {
            return Err(Error::NotUnitVolume(normalized_volume));
        }
        Ok(Window::Box {
            sides,
            original: side_lengths.to_vec(),
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::UnitCube(d) => *d,
            Window::Box { sides, .. } => sides.len(),
        }
    }

    /// Normalized side lengths.
    pub fn sides(&self) -> Vec<f64> {
        match self {
            Window::UnitCube(d) => vec![1.0; *d],
            Window::Box { sides, .. } => sides.clone(),
        }
    }

    pub fn min_side(&self) -> f64 {
        match self {
            Window::UnitCube(_) => 1.0,
            Window::Box { sides, .. } => sides.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// Isotropic factor that was applied to normalize the volume (1 for the
    /// unit cube).
    pub fn scale(&self) -> f64 {
        match self {
            Window::UnitCube(_) => 1.0,
            Window::Box { scale, .. } => *scale,
        }
    }

    /// Closed containment check in normalized coordinates.
    pub fn contains(&self, point: &[f64]) -> bool {
        match self {
            Window::UnitCube(d) => {
                point.len() == *d && point.iter().all(|&x| (0.0..=1.0).contains(&x))
            }
            Window::Box { sides, .. } => {
                point.len() == sides.len()
                    && point.iter().zip(sides).all(|(&x, &s)| x >= 0.0 && x <= s)
            }
        }
    }
}

/// An ordered list of `n` points in dimension `d`, stored flat for locality.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from flat coordinates (`coords.len()` must be a
    /// multiple of `dim`); every coordinate must be finite.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "coordinate count {} is not a multiple of dimension {}",
                coords.len(),
                dim
            )));
        }
        for (i, &c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoordinate {
                    index: i / dim,
                    value: c,
                });
            }
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "point has {} coordinates, expected {}",
                    p.len(),
                    dim
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Verifies that every point lies inside `window` (closed containment).
    pub fn validate_in_window(&self, window: &Window) -> Result<()> {
        if window.dim() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "cloud dimension {} does not match window dimension {}",
                self.dim,
                window.dim()
            )));
        }
        for (i, p) in self.iter_points().enumerate() {
            if !window.contains(p) {
                return Err(Error::PointOutsideWindow { index: i });
            }
        }
        Ok(())
    }

    /// Multiplies every coordinate by `s` (the window normalization factor).
    pub fn scaled(&self, s: f64) -> PointCloud {
        PointCloud {
            dim: self.dim,
            coords: self.coords.iter().map(|&c| c * s).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(0).unwrap_err(), Error::InvalidDimension);
        assert!((unit_ball_volume(1).unwrap() - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        // Gamma(5/2) = 3/2 * 1/2 * sqrt(pi), evaluated independently.
        let gamma_5_2 = 1.5 * 0.5 * PI.sqrt();
        let kappa3 = PI.powf(1.5) / gamma_5_2;
        assert!((unit_ball_volume(3).unwrap() - kappa3).abs() < 1e-14);
        assert!((kappa3 - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_ball_volume_recurrence() {
        // kappa_d = kappa_{d-2} * 2 pi / d
        for d in 3..=10 {
            let lhs = unit_ball_volume(d).unwrap();
            let rhs = unit_ball_volume(d - 2).unwrap() * 2.0 * PI / d as f64;
            assert!((lhs - rhs).abs() / rhs < 1e-14, "recurrence fails at d={d}");
        }
    }

    #[test]
    fn radius_rules_match_arithmetic() {
        // Independent arithmetic evaluations of the two rules.
        let r = radius_exact_regime(100, 2, 5.0).unwrap();
        assert!((r - (5.0 / (100.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((r - 0.126157).abs() < 1e-6);

        let r = radius_exact_regime(100, 2, 1.0).unwrap();
        assert!((r - 0.0564190).abs() < 1e-7);

        let r = radius_asymptotic_regime(100, 2, 1.0).unwrap();
        assert!((r - (1.0 / (1000.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((r - 0.0178412).abs() < 1e-7);

        let r = radius_asymptotic_regime(100, 3, 1.0).unwrap();
        assert!((r - (1.0 / (1000.0 * 4.0 * PI / 3.0)).powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((r - 0.0620351).abs() < 1e-7);
    }

    #[test]
    fn radius_rules_shrink_with_k_and_n() {
        let mut prev = 0.0;
        for k in [0.01, 0.1, 1.0, 5.0, 25.0] {
            let r = radius_exact_regime(100, 2, k).unwrap();
            assert!(r > prev);
            prev = r;
        }
        for d in [2, 3] {
            let mut prev = f64::INFINITY;
            for n in [50, 100, 200, 500] {
                let re = radius_exact_regime(n, d, 2.0).unwrap();
                let ra = radius_asymptotic_regime(n, d, 2.0).unwrap();
                assert!(ra < re, "asymptotic rule must give the smaller radius");
                assert!(re < prev);
                prev = re;
            }
        }
        // k -> 0+ forces r -> 0.
        assert!(radius_exact_regime(100, 2, 1e-12).unwrap() < 1e-6);
    }

    #[test]
    fn radius_too_large_rejected() {
        // k = n * kappa_d makes r_n = 1; anything above must error.
        let err = radius_exact_regime(10, 2, 10.0 * PI * 1.1).unwrap_err();
        assert!(matches!(err, Error::RadiusOutOfRange { .. }));
        assert!(radius_exact_regime(10, 2, 10.0 * PI).is_ok());
    }

    #[test]
    fn window_normalization() {
        // Square of side 2: scale 1/2, unit square.
        let w = Window::normalize_box(&[2.0, 2.0]).unwrap();
        assert!((w.scale() - 0.5).abs() < 1e-15);
        assert_eq!(w.sides(), vec![1.0, 1.0]);

        // Already unit volume: scale 1.
        let w = Window::normalize_box(&[2.0, 0.5]).unwrap();
        assert!((w.scale() - 1.0).abs() < 1e-15);

        // Box 4x1: s = 1/2, window 2 x 0.5.
        let w = Window::normalize_box(&[4.0, 1.0]).unwrap();
        assert!((w.scale() - 0.5).abs() < 1e-15);
        assert_eq!(w.sides(), vec![2.0, 0.5]);

        // Idempotent: normalizing a unit-volume box returns scale 1.
        let w2 = Window::normalize_box(&w.sides()).unwrap();
        assert!((w2.scale() - 1.0).abs() < 1e-12);

        assert!(matches!(
            Window::normalize_box(&[1.0, 0.0]),
            Err(Error::InvalidSideLength(_))
        ));
        assert!(matches!(
            Window::normalize_box(&[1.0, -2.0]),
            Err(Error::InvalidSideLength(_))
        ));
    }

    #[test]
    fn cloud_validation() {
        let cloud = PointCloud::new(2, vec![0.1, 0.2, 0.9, 0.95]).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.point(1), &[0.9, 0.95]);

        let w = Window::unit_cube(2).unwrap();
        cloud.validate_in_window(&w).unwrap();

        let outside = PointCloud::new(2, vec![0.1, 1.2]).unwrap();
        assert!(matches!(
            outside.validate_in_window(&w),
            Err(Error::PointOutsideWindow { index: 0 })
        ));

        assert!(matches!(
            PointCloud::new(2, vec![0.1, f64::NAN]),
            Err(Error::NonFiniteCoordinate { .. })
        ));
    }
}
