//! The two test statistic families and their calibration helpers.
//!
//! Both statistics square the edge power sum after centering and scaling:
//! the exact variant centers with the closed-form null mean of the window,
//! the asymptotic variant with the small-radius approximation (and is
//! therefore window-shape free). Under the null each converges to
//! chi-squared with one degree of freedom; rejection is for large values.

use crate::edges::edge_power_sum;
use crate::error::{Error, Result};
use crate::geom::{radius_asymptotic_regime, radius_exact_regime, PointCloud, Window};
use crate::moments::{asymptotic_mean, exact_mean_box, null_std};
use crate::special::{erfc, normal_cdf};
use serde::{Deserialize, Serialize};

/// Which centering the statistic uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Exact null mean of the observation window.
    Exact,
    /// Small-radius approximation of the null mean.
    Asymptotic,
}

impl Variant {
    pub fn short(&self) -> &'static str {
        match self {
            Variant::Exact => "e",
            Variant::Asymptotic => "a",
        }
    }
}

/// How the graph radius is chosen for sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadiusRule {
    /// `r = (k / (n kappa_d))^(1/d)`; the expected average degree tends to `k`.
    ExactRegime { k: f64 },
    /// `r = (k / (n^(3/2) kappa_d))^(1/d)`; needed side conditions for the
    /// asymptotic centering.
    AsymptoticRegime { k: f64 },
    /// A fixed radius, taken as-is.
    Fixed { r: f64 },
}

impl RadiusRule {
    pub fn resolve(&self, n: usize, d: usize) -> Result<f64> {
        match *self {
            RadiusRule::ExactRegime { k } => radius_exact_regime(n, d, k),
            RadiusRule::AsymptoticRegime { k } => radius_asymptotic_regime(n, d, k),
            RadiusRule::Fixed { r } => {
                if !(r > 0.0) || r > 1.0 {
                    Err(Error::RadiusOutOfRange { r, max: 1.0 })
                } else {
                    Ok(r)
                }
            }
        }
    }
}

/// Full configuration of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub beta: f64,
    pub radius: RadiusRule,
    pub variant: Variant,
    pub dim: usize,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        let min = -(self.dim as f64) / 2.0;
        if !(self.beta > min) {
            return Err(Error::BetaOutOfRange {
                beta: self.beta,
                min,
            });
        }
        if self.dim == 0 {
            return Err(Error::InvalidDimension);
        }
        Ok(())
    }

    pub fn resolve_radius(&self, n: usize) -> Result<f64> {
        self.validate()?;
        self.radius.resolve(n, self.dim)
    }
}

/// Result of one test evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_asymptotic: f64,
    pub p_empirical: Option<f64>,
    /// (level, reject) pairs filled in once a decision rule is applied.
    pub reject_at: Vec<(f64, bool)>,
    pub radius: f64,
    pub variant: Variant,
}

/// Precomputed centering and scale for repeated evaluation at fixed `n`.
#[derive(Debug, Clone, Copy)]
pub struct StatContext {
    pub beta: f64,
    pub r: f64,
    pub mean: f64,
    pub sd: f64,
}

impl StatContext {
    /// Resolves the radius and null moments. `window` is required for the
    /// exact variant and must have `r` no larger than its shortest side.
    pub fn prepare(cfg: &TestConfig, n: usize, window: &Window) -> Result<Self> {
        cfg.validate()?;
        if n < 2 {
            return Err(Error::TooFewPoints(n, 2));
        }
        if window.dim() != cfg.dim {
            return Err(Error::InvalidParameter(format!(
                "window dimension {} does not match configured dimension {}",
                window.dim(),
                cfg.dim
            )));
        }
        let r = cfg.resolve_radius(n)?;
        let mean = match cfg.variant {
            Variant::Exact => exact_mean_box(window, n, r, cfg.beta)?,
            Variant::Asymptotic => asymptotic_mean(n, r, cfg.beta, cfg.dim)?,
        };
        let sd = null_std(n, r, cfg.beta, cfg.dim)?;
        Ok(StatContext {
            beta: cfg.beta,
            r,
            mean,
            sd,
        })
    }

    /// The squared standardized statistic for one cloud.
    pub fn evaluate(&self, cloud: &PointCloud) -> Result<f64> {
        let l = edge_power_sum(cloud, self.r, self.beta)?;
        Ok(standardize_and_square(l, self.mean, self.sd))
    }
}

#[inline]
pub(crate) fn standardize_and_square(l: f64, mean: f64, sd: f64) -> f64 {
    let z = (l - mean) / sd;
    z * z
}

/// Exact-centering statistic on a unit-volume window.
pub fn t_exact(cloud: &PointCloud, cfg: &TestConfig, window: &Window) -> Result<TestOutcome> {
    if cfg.variant != Variant::Exact {
        return Err(Error::InvalidParameter(
            "configuration variant is not `exact`".into(),
        ));
    }
    cloud.validate_in_window(window)?;
    let ctx = StatContext::prepare(cfg, cloud.len(), window)?;
    let statistic = ctx.evaluate(cloud)?;
    Ok(TestOutcome {
        statistic,
        p_asymptotic: chi2_1_pvalue(statistic)?,
        p_empirical: None,
        reject_at: Vec::new(),
        radius: ctx.r,
        variant: Variant::Exact,
    })
}

/// Asymptotic-centering statistic; only unit volume of the window is
/// assumed, its shape never enters.
pub fn t_asym(cloud: &PointCloud, cfg: &TestConfig) -> Result<TestOutcome> {
    if cfg.variant != Variant::Asymptotic {
        return Err(Error::InvalidParameter(
            "configuration variant is not `asymptotic`".into(),
        ));
    }
    // the cube stands in for any unit-volume window: only its dimension is used
    let window = Window::unit_cube(cfg.dim)?;
    let ctx = StatContext::prepare(cfg, cloud.len(), &window)?;
    if cloud.dim() != cfg.dim {
        return Err(Error::InvalidParameter(format!(
            "cloud dimension {} does not match configured dimension {}",
            cloud.dim(),
            cfg.dim
        )));
    }
    let statistic = ctx.evaluate(cloud)?;
    Ok(TestOutcome {
        statistic,
        p_asymptotic: chi2_1_pvalue(statistic)?,
        p_empirical: None,
        reject_at: Vec::new(),
        radius: ctx.r,
        variant: Variant::Asymptotic,
    })
}

/// Survival function of chi-squared with one degree of freedom,
/// `p = erfc(sqrt(t/2))`, clamped away from an exact zero so a valid
/// p-value is always returned.
pub fn chi2_1_pvalue(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chi-squared statistic must be nonnegative, got {t}"
        )));
    }
    Ok(erfc((t / 2.0).sqrt()).max(f64::MIN_POSITIVE))
}

/// CDF of `(Z + mu)^2` with `Z` standard normal; `mu = 0` recovers the
/// chi-squared(1) distribution function.
pub fn shifted_normal_squared_cdf(t: f64, mu: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = t.sqrt();
    normal_cdf(s - mu) - normal_cdf(-s - mu)
}

/// Empirical p-value with the add-one convention,
/// `(1 + #{draws >= observed}) / (1 + #draws)`, so that 0 is never reported.
pub fn empirical_pvalue(observed: f64, null_draws: &[f64]) -> Result<f64> {
    if null_draws.is_empty() {
        return Err(Error::EmptySample("empirical p-value needs draws".into()));
    }
    let count = null_draws.iter().filter(|&&v| v >= observed).count();
    Ok((1.0 + count as f64) / (1.0 + null_draws.len() as f64))
}

/// Empirical quantile: the order statistic at 1-based index
/// `ceil(level * m)` of the sorted sample.
pub fn empirical_quantile(samples: &[f64], level: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample("empirical quantile needs samples".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0,1), got {level}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN samples"));
    let m = sorted.len();
    let idx = ((level * m as f64).ceil() as usize).clamp(1, m);
    Ok(sorted[idx - 1])
}

/// One-sample Kolmogorov-Smirnov distance between `samples` and the
/// distribution function `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample("KS distance needs samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN samples"));
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / m).max((i as f64 + 1.0) / m - f);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    #[test]
    fn statistic_assembly_matches_arithmetic() {
        // Components evaluated by independent literal arithmetic:
        // L = 150, d=2, beta=0, n=100, r=0.1.
        let mean = 4950.0 * (0.01 * PI - 0.008 / 3.0 + 5e-5);
        let sd = (PI / 2.0).sqrt() * 10.0;
        let t = standardize_and_square(150.0, mean, sd);
        let by_hand = ((150.0 - mean) / sd).powi(2);
        assert!((t - by_hand).abs() < 1e-15);
        assert!((t - 0.3527).abs() < 1e-3);

        // asymptotic variant: L = 40, r = 0.05
        let mean = PI / 2.0 * 9900.0 * 0.0025;
        let sd = (PI / 2.0).sqrt() * 100.0 * 0.05;
        let t = standardize_and_square(40.0, mean, sd);
        assert!((t - ((40.0 - mean) / sd).powi(2)).abs() < 1e-15);
        assert!((t - 0.0321).abs() < 1e-4);

        // centered exactly: statistic 0
        assert_eq!(standardize_and_square(mean, mean, sd), 0.0);
    }

    #[test]
    fn t_exact_on_a_two_point_cloud() {
        // Two points at distance 0.05 with beta=1: L = 0.05 exactly.
        let cloud = PointCloud::new(2, vec![0.4, 0.4, 0.45, 0.4]).unwrap();
        let window = Window::unit_cube(2).unwrap();
        let cfg = TestConfig {
            beta: 1.0,
            radius: RadiusRule::Fixed { r: 0.1 },
            variant: Variant::Exact,
            dim: 2,
        };
        let out = t_exact(&cloud, &cfg, &window).unwrap();
        let mean = crate::moments::exact_mean_unit_cube(2, 0.1, 1.0, 2).unwrap();
        let sd = crate::moments::null_std(2, 0.1, 1.0, 2).unwrap();
        let expected = ((0.05 - mean) / sd).powi(2);
        assert!((out.statistic - expected).abs() <= 1e-12 * expected.max(1.0));
        assert!((out.radius - 0.1).abs() < 1e-15);
        assert!(out.statistic >= 0.0);
        assert!((out.p_asymptotic - chi2_1_pvalue(out.statistic).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn variant_mismatch_and_small_samples_rejected() {
        let cloud = PointCloud::new(2, vec![0.4, 0.4, 0.45, 0.4]).unwrap();
        let window = Window::unit_cube(2).unwrap();
        let mut cfg = TestConfig {
            beta: 0.0,
            radius: RadiusRule::Fixed { r: 0.1 },
            variant: Variant::Asymptotic,
            dim: 2,
        };
        assert!(t_exact(&cloud, &cfg, &window).is_err());
        cfg.variant = Variant::Exact;
        assert!(t_asym(&cloud, &cfg).is_err());

        let single = PointCloud::new(2, vec![0.5, 0.5]).unwrap();
        cfg.variant = Variant::Exact;
        assert!(matches!(
            t_exact(&single, &cfg, &window),
            Err(Error::TooFewPoints(1, 2))
        ));
    }

    #[test]
    fn beta_range_is_the_test_range() {
        let cfg = TestConfig {
            beta: -1.0,
            radius: RadiusRule::Fixed { r: 0.1 },
            variant: Variant::Exact,
            dim: 2,
        };
        assert!(matches!(cfg.validate(), Err(Error::BetaOutOfRange { .. })));
        let cfg = TestConfig { beta: -0.99, ..cfg };
        cfg.validate().unwrap();
    }

    #[test]
    fn chi2_survival_reference_values() {
        assert_eq!(chi2_1_pvalue(0.0).unwrap(), 1.0);
        assert!((chi2_1_pvalue(3.8415).unwrap() - 0.05).abs() < 1e-4);
        assert!((chi2_1_pvalue(6.6349).unwrap() - 0.01).abs() < 1e-4);
        assert!(chi2_1_pvalue(-0.1).is_err());
        // strictly decreasing
        let mut prev = 1.1;
        for t in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 30.0] {
            let p = chi2_1_pvalue(t).unwrap();
            assert!(p < prev);
            prev = p;
        }
        assert!(chi2_1_pvalue(2000.0).unwrap() > 0.0);
    }

    #[test]
    fn pvalues_of_null_draws_are_uniform() {
        let mut rng = RngStream::new(77, 0).rng();
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                chi2_1_pvalue(z * z).unwrap()
            })
            .collect();
        let d = ks_distance(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn empirical_pvalue_conventions() {
        let draws: Vec<f64> = (0..9999).map(|i| i as f64).collect();
        // observed above every draw: the add-one floor
        let p = empirical_pvalue(1e9, &draws).unwrap();
        assert!((p - 1.0 / 10_000.0).abs() < 1e-15);
        // observed below every draw
        let p = empirical_pvalue(-1.0, &draws).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(empirical_pvalue(0.0, &[]).is_err());

        // at the median of the null draws the p-value is about 1/2
        let mut rng = RngStream::new(78, 0).rng();
        let null: Vec<f64> = (0..10_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * z
            })
            .collect();
        let median = empirical_quantile(&null, 0.5).unwrap();
        let p = empirical_pvalue(median, &null).unwrap();
        assert!((p - 0.5).abs() < 0.02, "p at median {p}");
    }

    #[test]
    fn empirical_quantile_conventions() {
        let samples: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(empirical_quantile(&samples, 0.95).unwrap(), 95.0);
        assert_eq!(empirical_quantile(&[42.0], 0.31).unwrap(), 42.0);
        assert!(empirical_quantile(&samples, 0.0).is_err());
        assert!(empirical_quantile(&samples, 1.0).is_err());
        assert!(empirical_quantile(&[], 0.5).is_err());

        // 100k chi-squared(1) draws: 95% quantile near 3.8415
        let mut rng = RngStream::new(79, 0).rng();
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * z
            })
            .collect();
        let q = empirical_quantile(&draws, 0.95).unwrap();
        assert!((q - 3.8415).abs() < 0.08, "quantile {q}");
    }

    #[test]
    fn shifted_square_cdf_reduces_to_chi2() {
        for t in [0.1, 1.0, 3.8415, 9.0] {
            let cdf = shifted_normal_squared_cdf(t, 0.0);
            let p = chi2_1_pvalue(t).unwrap();
            assert!((cdf + p - 1.0).abs() < 1e-12);
        }
        assert_eq!(shifted_normal_squared_cdf(-1.0, 0.5), 0.0);
    }

    #[test]
    fn statistics_permutation_invariant_and_deterministic() {
        let mut rng = RngStream::new(80, 0).rng();
        let cloud = crate::alternatives::sample_uniform(60, 2, &mut rng).unwrap();
        let cfg = TestConfig {
            beta: -0.5,
            radius: RadiusRule::ExactRegime { k: 3.0 },
            variant: Variant::Asymptotic,
            dim: 2,
        };
        let a = t_asym(&cloud, &cfg).unwrap();
        let b = t_asym(&cloud, &cfg).unwrap();
        assert_eq!(a.statistic.to_bits(), b.statistic.to_bits());

        let rev: Vec<Vec<f64>> = (0..cloud.len())
            .rev()
            .map(|i| cloud.point(i).to_vec())
            .collect();
        let reversed = PointCloud::from_points(2, &rev).unwrap();
        let c = t_asym(&reversed, &cfg).unwrap();
        assert!((a.statistic - c.statistic).abs() <= 1e-9 * a.statistic.max(1.0));
    }
}
