//! Samplers for the null and the alternative models of the power study.
//!
//! All samplers return exactly `n` points inside `[0,1]^d` and are pure
//! functions of the supplied generator, so a fixed `(seed, stream)` pair
//! reproduces a cloud bit for bit.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::special::normal_quantile;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;
use std::sync::Arc;

/// Attempt cap for rejection loops; exceeding it signals degenerate
/// parameters (for example a Gaussian component far outside the cube).
const MAX_REJECTION_ATTEMPTS: u64 = 1_000_000;

/// Uniform sample on `[0,1]^d`.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<PointCloud> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        coords.push(rng.random::<f64>());
    }
    PointCloud::new(d, coords)
}

/// Uniform sample on a box `[0, l_1] x ... x [0, l_d]` (used to simulate the
/// null on normalized box windows).
pub fn sample_uniform_box<R: Rng + ?Sized>(
    n: usize,
    sides: &[f64],
    rng: &mut R,
) -> Result<PointCloud> {
    let d = sides.len();
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        for &side in sides {
            coords.push(rng.random::<f64>() * side);
        }
    }
    PointCloud::new(d, coords)
}

/// Parameters of the two-component Gaussian contamination mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ConParams {
    pub q1: f64,
    pub q2: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl ConParams {
    /// The simulation-study configuration: q1 = 0.135, q2 = 0.24, centers
    /// (0.25,...,0.25) and (0.7,...,0.7), and standard deviations
    /// `0.15 / Phi^{-1}(0.9^{1/d})` and `0.2 / Phi^{-1}(0.9^{1/d})`, i.e.
    /// scaled so each component concentrates 90% of its mass in a box
    /// around its centre. (Dividing, not multiplying, by the quantile is
    /// what reproduces the reference rejection rates.)
    pub fn defaults(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        let q = normal_quantile(0.9f64.powf(1.0 / d as f64));
        Ok(ConParams {
            q1: 0.135,
            q2: 0.24,
            c1: vec![0.25; d],
            c2: vec![0.7; d],
            sigma1: 0.15 / q,
            sigma2: 0.2 / q,
        })
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.q1 < 0.0 || self.q2 < 0.0 || self.q1 + self.q2 > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must be nonnegative with q1 + q2 <= 1, got {} and {}",
                self.q1, self.q2
            )));
        }
        if self.c1.len() != d || self.c2.len() != d {
            return Err(Error::InvalidParameter(
                "mixture centers must match the dimension".into(),
            ));
        }
        for c in self.c1.iter().chain(&self.c2) {
            if !(0.0..=1.0).contains(c) {
                return Err(Error::InvalidParameter(format!(
                    "mixture center coordinate {c} outside the unit cube"
                )));
            }
        }
        if !(self.sigma1 > 0.0) || !(self.sigma2 > 0.0) {
            return Err(Error::InvalidParameter(
                "mixture standard deviations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a d-dimensional Gaussian at `center` with isotropic standard
/// deviation `sigma`, resampling the whole vector until it lands in the
/// unit cube.
fn truncated_gaussian<R: Rng + ?Sized>(
    center: &[f64],
    sigma: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    let start = out.len();
    for attempt in 0.. {
        if attempt >= MAX_REJECTION_ATTEMPTS {
            return Err(Error::RejectionOverflow(MAX_REJECTION_ATTEMPTS));
        }
        out.truncate(start);
        for &c in center {
            let z: f64 = StandardNormal.sample(rng);
            out.push(c + sigma * z);
        }
        if out[start..].iter().all(|&x| (0.0..=1.0).contains(&x)) {
            return Ok(());
        }
    }
    unreachable!()
}

/// Contamination alternative: each point independently uniform with
/// probability `1 - q1 - q2`, else one of two cube-truncated Gaussians.
pub fn sample_con<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    params: &ConParams,
) -> Result<PointCloud> {
    Ok(sample_con_labeled(n, d, rng, params)?.0)
}

/// As [`sample_con`], also reporting which component produced each point
/// (0 = uniform, 1, 2 = Gaussian components).
pub fn sample_con_labeled<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    params: &ConParams,
) -> Result<(PointCloud, Vec<u8>)> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    params.validate(d)?;
    let mut coords = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        if u < params.q1 {
            truncated_gaussian(&params.c1, params.sigma1, rng, &mut coords)?;
            labels.push(1);
        } else if u < params.q1 + params.q2 {
            truncated_gaussian(&params.c2, params.sigma2, rng, &mut coords)?;
            labels.push(2);
        } else {
            for _ in 0..d {
                coords.push(rng.random::<f64>());
            }
            labels.push(0);
        }
    }
    Ok((PointCloud::new(d, coords)?, labels))
}

/// Clustering alternative: `n/5` cluster centres uniform on
/// `[-r_clu, 1 + r_clu]^d` (not part of the sample), five points per centre
/// uniform in the ball of radius `r_clu`, each out-of-cube point replaced by
/// a single uniform draw on the cube.
pub fn sample_clu<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    r_clu: f64,
) -> Result<PointCloud> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    if !n.is_multiple_of(5) {
        return Err(Error::InvalidParameter(format!(
            "cluster model needs n divisible by 5, got {n}"
        )));
    }
    if !(r_clu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster radius must be positive, got {r_clu}"
        )));
    }
    let mut coords = Vec::with_capacity(n * d);
    let mut center = vec![0.0f64; d];
    let mut candidate = vec![0.0f64; d];
    for _ in 0..n / 5 {
        for c in center.iter_mut() {
            *c = -r_clu + rng.random::<f64>() * (1.0 + 2.0 * r_clu);
        }
        for _ in 0..5 {
            ball_point(&center, r_clu, rng, &mut candidate);
            if candidate.iter().all(|&x| (0.0..=1.0).contains(&x)) {
                coords.extend_from_slice(&candidate);
            } else {
                // replaced by one uniform draw, no further rejection
                for _ in 0..d {
                    coords.push(rng.random::<f64>());
                }
            }
        }
    }
    PointCloud::new(d, coords)
}

/// Uniform point in the closed ball around `center`: a normalized Gaussian
/// direction scaled by `radius * U^(1/d)`.
fn ball_point<R: Rng + ?Sized>(center: &[f64], radius: f64, rng: &mut R, out: &mut [f64]) {
    let d = center.len();
    loop {
        let mut norm_sq = 0.0;
        for o in out.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *o = z;
            norm_sq += z * z;
        }
        if norm_sq > 1e-300 {
            let u: f64 = rng.random();
            let scale = radius * u.powf(1.0 / d as f64) / norm_sq.sqrt();
            for (o, &c) in out.iter_mut().zip(center) {
                *o = c + *o * scale;
            }
            return;
        }
    }
}

/// Single-point-source alternative: with probability `p` a cube-truncated
/// Gaussian at `center` with standard deviation `sigma`, otherwise uniform.
pub fn sample_sps<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    center: &[f64],
    sigma: f64,
    p: f64,
) -> Result<PointCloud> {
    Ok(sample_sps_labeled(n, d, rng, center, sigma, p)?.0)
}

/// As [`sample_sps`], with a flag per point marking the contaminated draws.
pub fn sample_sps_labeled<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    center: &[f64],
    sigma: f64,
    p: f64,
) -> Result<(PointCloud, Vec<bool>)> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "contamination probability must lie in [0,1], got {p}"
        )));
    }
    if center.len() != d {
        return Err(Error::InvalidParameter(
            "point-source center must match the dimension".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "point-source sigma must be positive, got {sigma}"
        )));
    }
    let mut coords = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let contaminated = rng.random::<f64>() < p;
        if contaminated {
            truncated_gaussian(center, sigma, rng, &mut coords)?;
        } else {
            for _ in 0..d {
                coords.push(rng.random::<f64>());
            }
        }
        labels.push(contaminated);
    }
    Ok((PointCloud::new(d, coords)?, labels))
}

/// Standard parameters of the point-source alternative: center of the cube,
/// `sigma = 0.01`, contamination probability 5%.
pub fn sps_defaults(d: usize) -> (Vec<f64>, f64, f64) {
    (vec![0.5; d], 0.01, 0.05)
}

/// Shared evaluator for a perturbation function on the cube.
pub type PerturbationFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded zero-mean perturbation `g` defining the contiguous density
/// `1 + a g` on the unit cube.
#[derive(Clone)]
pub struct ContiguousSpec {
    g: PerturbationFn,
    /// Amplitude `a`; the density is valid when `a * sup|g| <= 1`.
    pub amplitude: f64,
    /// Declared bound on `|g|`.
    pub bound: f64,
    /// `∫ g^2` over the cube when known (needed by the drift prediction).
    pub l2_sq: Option<f64>,
    /// Human-readable tag for tables and files.
    pub name: String,
}

impl fmt::Debug for ContiguousSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContiguousSpec")
            .field("name", &self.name)
            .field("amplitude", &self.amplitude)
            .field("bound", &self.bound)
            .field("l2_sq", &self.l2_sq)
            .finish()
    }
}

impl ContiguousSpec {
    pub fn new(
        g: PerturbationFn,
        amplitude: f64,
        bound: f64,
        l2_sq: Option<f64>,
        name: impl Into<String>,
    ) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "perturbation bound must be positive and finite, got {bound}"
            )));
        }
        if !(amplitude >= 0.0) || amplitude * bound > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "amplitude {amplitude} with bound {bound} violates 1 + a g >= 0"
            )));
        }
        Ok(ContiguousSpec {
            g,
            amplitude,
            bound,
            l2_sq,
            name: name.into(),
        })
    }

    /// `g(x) = cos(2 pi x_1)`: bounded by 1, zero mean, `∫ g^2 = 1/2`.
    pub fn cos_first_coord(amplitude: f64) -> Result<Self> {
        Self::new(
            Arc::new(|x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).cos()),
            amplitude,
            1.0,
            Some(0.5),
            "cos2pix1",
        )
    }

    /// Same perturbation at a different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(
            self.g.clone(),
            amplitude,
            self.bound,
            self.l2_sq,
            self.name.clone(),
        )
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }
}

/// Sample from the density `1 + a g` by rejection against the constant
/// envelope `1 + a sup|g|`.
pub fn sample_contiguous<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    spec: &ContiguousSpec,
) -> Result<PointCloud> {
    Ok(sample_contiguous_counted(n, d, rng, spec)?.0)
}

/// As [`sample_contiguous`], also returning the number of proposals used
/// (for acceptance-rate diagnostics).
pub fn sample_contiguous_counted<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    spec: &ContiguousSpec,
) -> Result<(PointCloud, u64)> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let envelope = 1.0 + spec.amplitude * spec.bound;
    let mut coords = Vec::with_capacity(n * d);
    let mut proposal = vec![0.0f64; d];
    let mut proposals = 0u64;
    for _ in 0..n {
        let mut attempts = 0u64;
        loop {
            attempts += 1;
            if attempts > MAX_REJECTION_ATTEMPTS {
                return Err(Error::RejectionOverflow(MAX_REJECTION_ATTEMPTS));
            }
            proposals += 1;
            for p in proposal.iter_mut() {
                *p = rng.random::<f64>();
            }
            let gval = spec.eval(&proposal);
            if gval.abs() > spec.bound * (1.0 + 1e-12) {
                return Err(Error::PerturbationOutOfBound {
                    value: gval,
                    bound: spec.bound,
                });
            }
            let density = 1.0 + spec.amplitude * gval;
            if rng.random::<f64>() * envelope <= density {
                coords.extend_from_slice(&proposal);
                break;
            }
        }
    }
    Ok((PointCloud::new(d, coords)?, proposals))
}
