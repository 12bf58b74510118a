//! Null means and variances of the edge power sum.
//!
//! For axis-aligned boxes the mean has a closed form: writing the pair
//! integral through the covariogram `Vol(W ∩ (W + y)) = prod_j (L_j - |y_j|)`
//! and integrating the angular part of `||y||^beta prod_j (L_j - |y_j|)`
//! analytically leaves a polynomial in the radius. On the unit cube this
//! reduces to the familiar two- and three-dimensional four-term formulas.

use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, Window};
use crate::rng::RngStream;
use rand::Rng;
use rayon::prelude::*;

/// Which formula produced a reported moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    ExactClosedForm,
    ExactIntegralMc,
    Asymptotic,
}

/// Mean (and optionally variance) of the edge power sum under the null,
/// tagged with the regime that produced each value.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub mean: f64,
    pub mean_method: MomentMethod,
    pub variance: Option<f64>,
    pub variance_method: Option<MomentMethod>,
}

/// Closed-form `E L_n(beta)` for a unit-volume box with the given side
/// lengths, valid for `r <= min side` and `beta > -d`. Supports d in
/// {1, 2, 3}.
pub fn exact_mean_box(window: &Window, n: usize, r: f64, beta: f64) -> Result<f64> {
    let sides = window.sides();
    let d = sides.len();
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidDimension);
    }
    if !(beta > -(d as f64)) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -(d as f64),
        });
    }
    let min_side = window.min_side();
    if !(r > 0.0) || r > min_side {
        return Err(Error::RadiusOutOfRange { r, max: min_side });
    }
    let pairs = 0.5 * n as f64 * (n as f64 - 1.0);
    let pi = std::f64::consts::PI;
    // One power of r per term: integral of rho^{beta+d-1+k} over (0, r].
    let term = |k: u32| r.powf(beta + d as f64 + k as f64) / (beta + d as f64 + k as f64);
    let integral = match d {
        1 => {
            let l1 = sides[0];
            2.0 * l1 * term(0) - 2.0 * term(1)
        }
        2 => {
            let area = sides[0] * sides[1];
            let perim = sides[0] + sides[1];
            2.0 * pi * area * term(0) - 4.0 * perim * term(1) + 2.0 * term(2)
        }
        3 => {
            let volume: f64 = sides.iter().product();
            let s2 = sides[0] * sides[1] + sides[0] * sides[2] + sides[1] * sides[2];
            let s1: f64 = sides.iter().sum();
            4.0 * pi * volume * term(0) - 2.0 * pi * s2 * term(1) + (8.0 / 3.0) * s1 * term(2)
                - term(3)
        }
        _ => unreachable!(),
    };
    Ok(pairs * integral)
}

/// Closed-form `E L_n(beta)` on the unit cube `[0,1]^d`, d in {2, 3},
/// for `r <= 1` and `beta > -d`.
pub fn exact_mean_unit_cube(n: usize, r: f64, beta: f64, d: usize) -> Result<f64> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidDimension);
    }
    exact_mean_box(&Window::unit_cube(d)?, n, r, beta)
}

/// Small-radius approximation of the null mean,
/// `d kappa_d / (2 (beta + d)) * n (n-1) r^(beta+d)`.
pub fn asymptotic_mean(n: usize, r: f64, beta: f64, d: usize) -> Result<f64> {
    let kappa = unit_ball_volume(d)?;
    if !(beta > -(d as f64)) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -(d as f64),
        });
    }
    let df = d as f64;
    Ok(df * kappa / (2.0 * (beta + df)) * n as f64 * (n as f64 - 1.0) * r.powf(beta + df))
}

/// Null standard deviation used to scale both test statistics,
/// `sqrt(d kappa_d / (2 (2 beta + d))) * n * r^(beta + d/2)`.
pub fn null_std(n: usize, r: f64, beta: f64, d: usize) -> Result<f64> {
    let kappa = unit_ball_volume(d)?;
    let df = d as f64;
    if !(beta > -df / 2.0) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -df / 2.0,
        });
    }
    Ok((df * kappa / (2.0 * (2.0 * beta + df))).sqrt() * n as f64 * r.powf(beta + df / 2.0))
}

/// Leading variance coefficients under a general density, from its second
/// and third moments `int_f2 = ∫ f^2` and `int_f3 = ∫ f^3`:
///
/// * `sigma1 = d kappa_d / (2 (2 beta + d)) * int_f2`
/// * `sigma2 = d^2 kappa_d^2 / (beta + d)^2 * (int_f3 - int_f2^2)`
///
/// `sigma2` vanishes exactly when the density is uniform.
pub fn asymptotic_variance_coeffs(
    int_f2: f64,
    int_f3: f64,
    beta: f64,
    d: usize,
) -> Result<(f64, f64)> {
    const TOL: f64 = 1e-9;
    if int_f2 < 1.0 - TOL || int_f3 < int_f2 * int_f2 - TOL {
        return Err(Error::InvalidMoments(format!(
            "need int_f3 >= int_f2^2 >= 1, got int_f2={int_f2}, int_f3={int_f3}"
        )));
    }
    let kappa = unit_ball_volume(d)?;
    let df = d as f64;
    if !(beta > -df / 2.0) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -df / 2.0,
        });
    }
    let sigma1 = df * kappa / (2.0 * (2.0 * beta + df)) * int_f2;
    let sigma2 = (df * kappa / (beta + df)).powi(2) * (int_f3 - int_f2 * int_f2).max(0.0);
    Ok((sigma1, sigma2))
}

/// Assembles the variance approximation
/// `sigma1 n^2 r^(2 beta + d) + sigma2 n^3 r^(2 beta + 2d)`.
pub fn assemble_variance(sigma1: f64, sigma2: f64, n: usize, r: f64, beta: f64, d: usize) -> f64 {
    let nf = n as f64;
    let df = d as f64;
    sigma1 * nf * nf * r.powf(2.0 * beta + df) + sigma2 * nf * nf * nf * r.powf(2.0 * beta + 2.0 * df)
}

/// Monte Carlo evaluation of the exact three-term null variance on the unit
/// cube, with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMcReport {
    pub variance: f64,
    pub se: f64,
    /// The middle-term integral `∫_W (∫_W 1{||x-y|| <= r} ||x-y||^beta dy)^2 dx`.
    pub term2_integral: f64,
    pub term2_integral_se: f64,
}

/// Estimates `Var L_n(beta)` under the null on `[0,1]^d`, d in {1, 2, 3}.
///
/// The first and third terms of the exact expression are pair integrals and
/// come from the closed-form mean (with exponents `2 beta` and `beta`); only
/// the middle term needs Monte Carlo. Writing it as
/// `∫ h(x)^2 dx` with `h(x) = ∫ 1{||x-y|| <= r} ||x-y||^beta dy`, an
/// unbiased sample is `g(x, y1) g(x, y2)` with `x, y1, y2` independent
/// uniform, which is averaged over `budget` draws, in parallel over
/// deterministic substreams.
pub fn exact_variance_mc(
    n: usize,
    r: f64,
    beta: f64,
    d: usize,
    budget: u64,
    seed: u64,
) -> Result<VarianceMcReport> {
    if budget < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "budget must be at least 10000, got {budget}"
        )));
    }
    let df = d as f64;
    if !(beta > -df / 2.0) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -df / 2.0,
        });
    }
    let window = match d {
        1 => Window::normalize_box(&[1.0])?,
        2 | 3 => Window::unit_cube(d)?,
        _ => return Err(Error::InvalidDimension),
    };
    let nf = n as f64;
    let pairs = 0.5 * nf * (nf - 1.0);
    let term1 = exact_mean_box(&window, n, r, 2.0 * beta)?;
    let pair_integral = exact_mean_box(&window, n, r, beta)? / pairs;

    const CHUNK: u64 = 8192;
    let chunks = budget.div_ceil(CHUNK);
    let r2 = r * r;
    let g = |x: &[f64], y: &[f64]| -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        if d2 > r2 || d2 == 0.0 {
            if d2 == 0.0 && beta == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (0.5 * beta * d2.ln()).exp()
        }
    };

    // (sum, sum of squares, count) per chunk, reduced in chunk order.
    let partials: Vec<(f64, f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c).rng();
            let m = CHUNK.min(budget - c * CHUNK);
            let mut x = vec![0.0f64; d];
            let mut y1 = vec![0.0f64; d];
            let mut y2 = vec![0.0f64; d];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..m {
                for a in 0..d {
                    x[a] = rng.random::<f64>();
                    y1[a] = rng.random::<f64>();
                    y2[a] = rng.random::<f64>();
                }
                let v = g(&x, &y1) * g(&x, &y2);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq, m)
        })
        .collect();

    let (sum, sum_sq, m) = partials
        .iter()
        .fold((0.0, 0.0, 0u64), |(s, q, c), &(ps, pq, pc)| {
            (s + ps, q + pq, c + pc)
        });
    let mf = m as f64;
    let j_hat = sum / mf;
    let j_var = (sum_sq / mf - j_hat * j_hat).max(0.0) / mf;
    let j_se = j_var.sqrt();

    let c2 = nf * (nf - 1.0) * (nf - 2.0);
    let c3 = nf * (nf - 1.0) * (nf - 1.5);
    let variance = term1 + c2 * j_hat - c3 * pair_integral * pair_integral;
    Ok(VarianceMcReport {
        variance,
        se: c2 * j_se,
        term2_integral: j_hat,
        term2_integral_se: j_se,
    })
}

/// Null moments for a test configuration: closed-form exact mean (or its
/// asymptotic approximation) plus the squared null scale as the variance.
pub fn null_moments(
    window: &Window,
    n: usize,
    r: f64,
    beta: f64,
    exact: bool,
) -> Result<MomentReport> {
    let d = window.dim();
    let (mean, mean_method) = if exact {
        (
            exact_mean_box(window, n, r, beta)?,
            MomentMethod::ExactClosedForm,
        )
    } else {
        (asymptotic_mean(n, r, beta, d)?, MomentMethod::Asymptotic)
    };
    let sd = null_std(n, r, beta, d)?;
    Ok(MomentReport {
        mean,
        mean_method,
        variance: Some(sd * sd),
        variance_method: Some(MomentMethod::Asymptotic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternatives::sample_uniform;
    use crate::edges::edge_power_sum;
    use std::f64::consts::PI;

    #[test]
    fn unit_cube_mean_d2_reference() {
        // n=100, beta=0, r=0.1: independent arithmetic evaluation of the
        // two-dimensional polynomial.
        let expected = 4950.0 * (PI * 0.01 - (8.0 / 3.0) * 0.001 + 0.5 * 1e-4);
        let got = exact_mean_unit_cube(100, 0.1, 0.0, 2).unwrap();
        assert!((got - expected).abs() < 1e-10);
        assert!((got - 142.5563).abs() < 1e-3);
    }

    #[test]
    fn unit_cube_mean_d2_polynomial_coefficients() {
        // Coefficient-level check: evaluate the literal polynomial for a few
        // (beta, r) pairs and compare.
        for &beta in &[-0.5f64, 0.0, 1.0, 5.0] {
            for &r in &[0.05f64, 0.3, 1.0] {
                let n = 37;
                let pairs = 0.5 * 37.0 * 36.0;
                let lit = pairs
                    * (2.0 * PI / (beta + 2.0) * r.powf(beta + 2.0)
                        - 8.0 / (beta + 3.0) * r.powf(beta + 3.0)
                        + 2.0 / (beta + 4.0) * r.powf(beta + 4.0));
                let got = exact_mean_unit_cube(n, r, beta, 2).unwrap();
                assert!((got - lit).abs() <= 1e-12 * lit.abs());
            }
        }
    }

    #[test]
    fn unit_cube_mean_d3_matches_literal_polynomial() {
        for &beta in &[-0.5f64, 0.0, 2.0] {
            for &r in &[0.1f64, 0.6] {
                let n = 20;
                let pairs = 0.5 * 20.0 * 19.0;
                let lit = pairs
                    * (4.0 * PI / (beta + 3.0) * r.powf(beta + 3.0)
                        - 6.0 * PI / (beta + 4.0) * r.powf(beta + 4.0)
                        + 8.0 / (beta + 5.0) * r.powf(beta + 5.0)
                        - 1.0 / (beta + 6.0) * r.powf(beta + 6.0));
                let got = exact_mean_unit_cube(n, r, beta, 3).unwrap();
                assert!((got - lit).abs() <= 1e-12 * lit.abs());
            }
        }
    }

    #[test]
    fn mean_vanishes_with_radius_and_validates() {
        assert!(exact_mean_unit_cube(2, 1e-9, 0.0, 2).unwrap() < 1e-15);
        assert!(matches!(
            exact_mean_unit_cube(10, 1.2, 0.0, 2),
            Err(Error::RadiusOutOfRange { .. })
        ));
        assert!(matches!(
            exact_mean_unit_cube(10, 0.5, 0.0, 4),
            Err(Error::InvalidDimension)
        ));
        // box: radius capped by the shortest side
        let w = Window::normalize_box(&[2.0, 0.5]).unwrap();
        assert!(matches!(
            exact_mean_box(&w, 10, 0.6, 0.0),
            Err(Error::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn box_reduces_to_unit_cube() {
        let w = Window::normalize_box(&[1.0, 1.0]).unwrap();
        let a = exact_mean_box(&w, 50, 0.2, -0.5).unwrap();
        let b = exact_mean_unit_cube(50, 0.2, -0.5, 2).unwrap();
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }

    /// MC pair-indicator oracle: average of 1{||X-X'|| <= r} ||X-X'||^beta
    /// over uniform pairs in the box, scaled by n(n-1)/2.
    fn mc_mean_oracle(
        sides: &[f64],
        n: usize,
        r: f64,
        beta: f64,
        reps: usize,
        seed: u64,
    ) -> (f64, f64) {
        use rand::Rng;
        let mut rng = RngStream::new(seed, 0).rng();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..reps {
            let mut d2 = 0.0;
            for &side in sides {
                let x: f64 = rng.random::<f64>() * side;
                let y: f64 = rng.random::<f64>() * side;
                d2 += (x - y) * (x - y);
            }
            let v = if d2 <= r * r { d2.sqrt().powf(beta) } else { 0.0 };
            sum += v;
            sum_sq += v * v;
        }
        let m = reps as f64;
        let mean = sum / m;
        let se = ((sum_sq / m - mean * mean).max(0.0) / m).sqrt();
        let pairs = 0.5 * n as f64 * (n as f64 - 1.0);
        (pairs * mean, pairs * se)
    }

    #[test]
    fn closed_form_matches_mc_oracle() {
        // d=2 unit cube
        let (mc, se) = mc_mean_oracle(&[1.0, 1.0], 100, 0.1, 0.0, 400_000, 11);
        let exact = exact_mean_unit_cube(100, 0.1, 0.0, 2).unwrap();
        assert!((exact - mc).abs() <= 3.0 * se, "{exact} vs {mc} +- {se}");

        // d=3 unit cube
        let (mc, se) = mc_mean_oracle(&[1.0, 1.0, 1.0], 100, 0.1, 0.0, 400_000, 12);
        let exact = exact_mean_unit_cube(100, 0.1, 0.0, 3).unwrap();
        assert!((exact - mc).abs() <= 3.0 * se, "{exact} vs {mc} +- {se}");

        // 2 x 0.5 box
        let w = Window::normalize_box(&[2.0, 0.5]).unwrap();
        let (mc, se) = mc_mean_oracle(&[2.0, 0.5], 50, 0.05, 0.0, 600_000, 13);
        let exact = exact_mean_box(&w, 50, 0.05, 0.0).unwrap();
        assert!((exact - mc).abs() <= 3.0 * se, "{exact} vs {mc} +- {se}");
    }

    #[test]
    fn asymptotic_mean_reference_and_limit() {
        // (pi / 2) * 9900 * 0.0025
        let got = asymptotic_mean(100, 0.05, 0.0, 2).unwrap();
        assert!((got - PI / 2.0 * 9900.0 * 0.0025).abs() < 1e-10);
        assert!((got - 38.8773).abs() < 1e-4);
        assert_eq!(asymptotic_mean(100, 0.0, 0.0, 2).unwrap(), 0.0);

        // exact/asymptotic -> 1 as r -> 0, monotone across the checked radii
        for d in [2usize, 3] {
            let mut prev = f64::INFINITY;
            for r in [1e-2, 1e-3, 1e-4] {
                let ratio = exact_mean_unit_cube(100, r, 0.5, d).unwrap()
                    / asymptotic_mean(100, r, 0.5, d).unwrap();
                let gap = (ratio - 1.0).abs();
                assert!(gap < prev, "gap should shrink with r");
                prev = gap;
            }
            assert!(prev < 1e-3);
        }
    }

    #[test]
    fn exact_mean_below_asymptotic_for_uniform() {
        for d in [2usize, 3] {
            for &beta in &[-0.5, 0.0, 1.0, 5.0] {
                for &r in &[0.05, 0.2, 0.8] {
                    let e = exact_mean_unit_cube(60, r, beta, d).unwrap();
                    let a = asymptotic_mean(60, r, beta, d).unwrap();
                    assert!(e <= a * (1.0 + 1e-12), "boundary loss only subtracts");
                }
            }
        }
    }

    #[test]
    fn null_std_reference() {
        let got = null_std(100, 0.1, 0.0, 2).unwrap();
        assert!((got - (PI / 2.0).sqrt() * 10.0).abs() < 1e-12);
        assert!((got - 12.5331).abs() < 1e-4);
        assert_eq!(null_std(0, 0.1, 0.0, 2).unwrap(), 0.0);
        assert!(matches!(
            null_std(10, 0.1, -1.0, 2),
            Err(Error::BetaOutOfRange { .. })
        ));
    }

    #[test]
    fn null_std_tracks_simulated_variance_in_three_dimensions() {
        // d=3, beta=1, asymptotic-regime radii: the squared null scale is
        // within 10% of the simulated variance of L_n at n=500.
        let n = 500;
        let d = 3;
        let beta = 1.0;
        let r = crate::geom::radius_asymptotic_regime(n, d, 5.0).unwrap();
        let reps = 4000;
        let mut vals = Vec::with_capacity(reps);
        for i in 0..reps {
            let mut rng = RngStream::new(909, i as u64).rng();
            let cloud = sample_uniform(n, d, &mut rng).unwrap();
            vals.push(edge_power_sum(&cloud, r, beta).unwrap());
        }
        let m = reps as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        let sd = null_std(n, r, beta, d).unwrap();
        assert!(
            (sd * sd / var - 1.0).abs() < 0.10,
            "null variance {} vs simulated {var}",
            sd * sd
        );
    }

    #[test]
    fn variance_coeffs() {
        // uniform: sigma2 = 0
        let (_, s2) = asymptotic_variance_coeffs(1.0, 1.0, 0.3, 2).unwrap();
        assert_eq!(s2, 0.0);

        // int f^2 = 2, int f^3 = 5, d=2, beta=0
        let (s1, s2) = asymptotic_variance_coeffs(2.0, 5.0, 0.0, 2).unwrap();
        assert!((s1 - PI).abs() < 1e-14);
        assert!((s2 - PI * PI).abs() < 1e-12);

        assert!(matches!(
            asymptotic_variance_coeffs(2.0, 3.0, 0.0, 2),
            Err(Error::InvalidMoments(_))
        ));
        assert!(matches!(
            asymptotic_variance_coeffs(0.5, 1.0, 0.0, 2),
            Err(Error::InvalidMoments(_))
        ));

        // definitional assembly
        let v = assemble_variance(s1, s2, 10, 0.1, 0.0, 2);
        let by_hand = s1 * 100.0 * 0.01 + s2 * 1000.0 * 1e-4;
        assert!((v - by_hand).abs() < 1e-12);
    }

    #[test]
    fn variance_mc_term2_matches_univariate_worked_example() {
        // d=1, beta=0, r < 1/2: the middle-term integral is 4r^2 - 10r^3/3.
        let r = 0.3;
        let report = exact_variance_mc(10, r, 0.0, 1, 400_000, 21).unwrap();
        let expected = 4.0 * r * r - 10.0 / 3.0 * r * r * r;
        assert!(
            (report.term2_integral - expected).abs() <= 3.0 * report.term2_integral_se,
            "{} vs {expected} +- {}",
            report.term2_integral,
            report.term2_integral_se
        );
    }

    #[test]
    fn variance_mc_vanishes_with_radius() {
        let report = exact_variance_mc(50, 1e-4, 0.0, 2, 20_000, 22).unwrap();
        assert!(report.variance.abs() < 1e-3);
    }

    #[test]
    fn variance_mc_matches_empirical_variance() {
        // n=100, d=2, beta=0, k=5 exact-regime radius.
        let n = 100;
        let d = 2;
        let r = crate::geom::radius_exact_regime(n, d, 5.0).unwrap();
        let reps = 10_000usize;
        let mut vals = Vec::with_capacity(reps);
        for i in 0..reps {
            let mut rng = RngStream::new(4242, i as u64).rng();
            let cloud = sample_uniform(n, d, &mut rng).unwrap();
            vals.push(edge_power_sum(&cloud, r, 0.0).unwrap());
        }
        let m = reps as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        // standard error of a sample variance, normal approximation
        let se_var = var * (2.0 / (m - 1.0)).sqrt();

        let report = exact_variance_mc(n, r, 0.0, d, 5_000_000, 23).unwrap();
        let tol = 3.0 * (se_var * se_var + report.se * report.se).sqrt();
        assert!(
            (report.variance - var).abs() <= tol,
            "mc {} +- {} vs empirical {var} +- {se_var}",
            report.variance,
            report.se
        );
    }

    #[test]
    fn null_moment_report() {
        let w = Window::unit_cube(2).unwrap();
        let rep = null_moments(&w, 100, 0.1, 0.0, true).unwrap();
        assert_eq!(rep.mean_method, MomentMethod::ExactClosedForm);
        assert!((rep.mean - 142.5563).abs() < 1e-3);
        let sd = null_std(100, 0.1, 0.0, 2).unwrap();
        assert!((rep.variance.unwrap() - sd * sd).abs() < 1e-10);

        let rep = null_moments(&w, 100, 0.1, 0.0, false).unwrap();
        assert_eq!(rep.mean_method, MomentMethod::Asymptotic);
    }
}
