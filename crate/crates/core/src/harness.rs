//! Reproducible parallel Monte Carlo: critical values, power studies,
//! limit-law diagnostics and empirical p-values for observed data.
//!
//! Every replicate draws from its own substream `(seed, space | replicate)`
//! and results are collected into a replicate-indexed buffer, so a plan
//! yields byte-identical tables at any worker-thread count. Critical-value,
//! power and data runs live in disjoint stream spaces to keep their draws
//! independent of one another.

use crate::alternatives::{
    sample_clu, sample_con, sample_contiguous, sample_sps, sample_uniform_box, ConParams,
    ContiguousSpec,
};
use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, PointCloud, Window};
use crate::rng::RngStream;
use crate::special::normal_cdf;
use crate::stats::{
    empirical_pvalue, empirical_quantile, ks_distance, shifted_normal_squared_cdf, RadiusRule,
    StatContext, TestConfig, Variant,
};
use crate::table::{ResultTable, Row};
use rand::Rng;
use rayon::prelude::*;

/// Disjoint stream-index spaces for the different kinds of runs (replicate
/// indices occupy the low 48 bits).
pub mod seed_space {
    pub const CRITICAL: u64 = 0;
    pub const POWER: u64 = 1 << 48;
    pub const DATA: u64 = 2 << 48;
    pub const BR: u64 = 3 << 48;
    pub const DIAGNOSTIC: u64 = 4 << 48;
}

/// Data-generating model for a Monte Carlo run.
#[derive(Debug, Clone)]
pub enum Model {
    H0,
    Con(ConParams),
    Clu { r_clu: f64 },
    Sps { center: Vec<f64>, sigma: f64, p: f64 },
    Contiguous(ContiguousSpec),
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::H0 => "h0".into(),
            Model::Con(_) => "con".into(),
            Model::Clu { .. } => "clu".into(),
            Model::Sps { .. } => "sps".into(),
            Model::Contiguous(spec) => format!("contiguous-{}", spec.name),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        window: &Window,
        rng: &mut R,
    ) -> Result<PointCloud> {
        let d = window.dim();
        match self {
            Model::H0 => sample_uniform_box(n, &window.sides(), rng),
            Model::Con(params) => sample_con(n, d, rng, params),
            Model::Clu { r_clu } => sample_clu(n, d, rng, *r_clu),
            Model::Sps { center, sigma, p } => sample_sps(n, d, rng, center, *sigma, *p),
            Model::Contiguous(spec) => sample_contiguous(n, d, rng, spec),
        }
    }

    fn validate(&self, n: usize, window: &Window) -> Result<()> {
        match self {
            Model::H0 => Ok(()),
            Model::Clu { r_clu } => {
                require_cube(window)?;
                if !n.is_multiple_of(5) {
                    return Err(Error::InvalidParameter(format!(
                        "cluster model needs n divisible by 5, got {n}"
                    )));
                }
                if !(*r_clu > 0.0) {
                    return Err(Error::InvalidParameter(
                        "cluster radius must be positive".into(),
                    ));
                }
                Ok(())
            }
            _ => require_cube(window),
        }
    }
}

fn require_cube(window: &Window) -> Result<()> {
    match window {
        Window::UnitCube(_) => Ok(()),
        Window::Box { .. } => Err(Error::InvalidParameter(
            "alternative models are defined on the unit cube".into(),
        )),
    }
}

/// A full simulation plan. The same plan (including seed) always produces
/// the same table.
#[derive(Debug, Clone)]
pub struct MCPlan {
    pub reps: u64,
    pub seed: u64,
    pub n: usize,
    pub config: TestConfig,
    pub model: Model,
    pub window: Window,
    /// Quantile level for critical values / rejection rates.
    pub level: f64,
}

impl MCPlan {
    pub fn h0(n: usize, config: TestConfig, reps: u64, seed: u64) -> Result<Self> {
        Ok(MCPlan {
            reps,
            seed,
            n,
            config,
            model: Model::H0,
            window: Window::unit_cube(config.dim)?,
            level: 0.95,
        })
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        self.config.validate()?;
        self.model.validate(self.n, &self.window)
    }

    fn key_k(&self) -> f64 {
        match self.config.radius {
            RadiusRule::ExactRegime { k } | RadiusRule::AsymptoticRegime { k } => k,
            RadiusRule::Fixed { r } => r,
        }
    }
}

/// Simulates the squared standardized statistic once per replicate; the
/// output is ordered by replicate index.
pub fn simulate_statistics(plan: &MCPlan, space: u64) -> Result<Vec<f64>> {
    plan.validate()?;
    let ctx = StatContext::prepare(&plan.config, plan.n, &plan.window)?;
    (0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(plan.seed, space | rep).rng();
            let cloud = plan.model.sample(plan.n, &plan.window, &mut rng)?;
            ctx.evaluate(&cloud)
        })
        .collect()
}

/// Standard error of an empirical quantile from the order-statistic
/// binomial band (None when the sample is too small to resolve it).
pub fn quantile_se(samples: &[f64], level: f64) -> Option<f64> {
    let m = samples.len();
    if m < 100 {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN draws"));
    let z = 1.959963984540054;
    let half = z * (level * (1.0 - level) / m as f64).sqrt();
    let lo = (((level - half) * m as f64).ceil() as usize).clamp(1, m) - 1;
    let hi = (((level + half) * m as f64).ceil() as usize).clamp(1, m) - 1;
    if hi <= lo {
        return None;
    }
    Some((sorted[hi] - sorted[lo]) / (2.0 * z))
}

/// Monte Carlo critical values under the null: the empirical `level`
/// quantile of the statistic over `reps` replications.
pub fn simulate_critical_values(plan: &MCPlan) -> Result<ResultTable> {
    if !matches!(plan.model, Model::H0) {
        return Err(Error::InvalidParameter(
            "critical values are simulated under the null model".into(),
        ));
    }
    let draws = simulate_statistics(plan, seed_space::CRITICAL)?;
    let value = empirical_quantile(&draws, plan.level)?;
    let mut table = ResultTable::new("critical-values", plan.seed, plan.reps, plan.level);
    table.rows.push(Row {
        model: plan.model.name(),
        variant: plan.config.variant.short().into(),
        beta: Some(plan.config.beta),
        d: plan.config.dim,
        n: plan.n,
        k: Some(plan.key_k()),
        value,
        se: quantile_se(&draws, plan.level),
        reps: plan.reps,
        seed: plan.seed,
    });
    Ok(table)
}

/// Empirical rejection rate of the plan's statistic against the matching
/// critical value (strict `>`), with a binomial standard error.
pub fn empirical_power(plan: &MCPlan, critical_values: &ResultTable) -> Result<ResultTable> {
    let crit = critical_values
        .lookup(
            plan.config.variant.short(),
            plan.config.beta,
            plan.config.dim,
            plan.n,
            plan.key_k(),
        )
        .ok_or_else(|| {
            Error::MissingCriticalValue(format!(
                "variant={} beta={} d={} n={} k={}",
                plan.config.variant.short(),
                plan.config.beta,
                plan.config.dim,
                plan.n,
                plan.key_k()
            ))
        })?;
    let draws = simulate_statistics(plan, seed_space::POWER)?;
    let rejected = draws.iter().filter(|&&t| t > crit).count();
    let rate = rejected as f64 / plan.reps as f64;
    let se = (rate * (1.0 - rate) / plan.reps as f64).sqrt();
    let mut table = ResultTable::new("rejection-rates", plan.seed, plan.reps, plan.level);
    table.rows.push(Row {
        model: plan.model.name(),
        variant: plan.config.variant.short().into(),
        beta: Some(plan.config.beta),
        d: plan.config.dim,
        n: plan.n,
        k: Some(plan.key_k()),
        value: rate,
        se: Some(se),
        reps: plan.reps,
        seed: plan.seed,
    });
    Ok(table)
}

/// Builds a test configuration for a grid cell, binding the radius rule to
/// the variant the way the simulation study does.
pub fn grid_config(variant: Variant, d: usize, beta: f64, k: f64) -> TestConfig {
    let radius = match variant {
        Variant::Exact => RadiusRule::ExactRegime { k },
        Variant::Asymptotic => RadiusRule::AsymptoticRegime { k },
    };
    TestConfig {
        beta,
        radius,
        variant,
        dim: d,
    }
}

/// Critical values over a `beta x n x k` grid. Cells are simulated one at
/// a time and `checkpoint` is called with the table so far after each one,
/// so long grids can persist partial results.
#[allow(clippy::too_many_arguments)]
pub fn critical_value_grid_with<F>(
    variant: Variant,
    d: usize,
    betas: &[f64],
    ns: &[usize],
    ks: &[f64],
    reps: u64,
    seed: u64,
    level: f64,
    mut checkpoint: F,
) -> Result<ResultTable>
where
    F: FnMut(&ResultTable) -> Result<()>,
{
    let mut table = ResultTable::new("critical-values", seed, reps, level);
    for &beta in betas {
        for &n in ns {
            for &k in ks {
                let mut plan = MCPlan::h0(n, grid_config(variant, d, beta, k), reps, seed)?;
                plan.level = level;
                let cell = simulate_critical_values(&plan)?;
                table.rows.extend(cell.rows);
                checkpoint(&table)?;
            }
        }
    }
    Ok(table)
}

/// [`critical_value_grid_with`] without checkpointing.
#[allow(clippy::too_many_arguments)]
pub fn critical_value_grid(
    variant: Variant,
    d: usize,
    betas: &[f64],
    ns: &[usize],
    ks: &[f64],
    reps: u64,
    seed: u64,
    level: f64,
) -> Result<ResultTable> {
    critical_value_grid_with(variant, d, betas, ns, ks, reps, seed, level, |_| Ok(()))
}

/// Rejection rates over a `beta x n x k` grid against a critical-value
/// table (every cell must be present there), with per-cell checkpointing.
#[allow(clippy::too_many_arguments)]
pub fn power_grid_with<F>(
    model: &Model,
    variant: Variant,
    d: usize,
    betas: &[f64],
    ns: &[usize],
    ks: &[f64],
    reps: u64,
    seed: u64,
    critical_values: &ResultTable,
    mut checkpoint: F,
) -> Result<ResultTable>
where
    F: FnMut(&ResultTable) -> Result<()>,
{
    let mut table = ResultTable::new("rejection-rates", seed, reps, critical_values.meta.level);
    for &beta in betas {
        for &n in ns {
            for &k in ks {
                let mut plan = MCPlan::h0(n, grid_config(variant, d, beta, k), reps, seed)?;
                plan.model = model.clone();
                let cell = empirical_power(&plan, critical_values)?;
                table.rows.extend(cell.rows);
                checkpoint(&table)?;
            }
        }
    }
    Ok(table)
}

/// [`power_grid_with`] without checkpointing.
#[allow(clippy::too_many_arguments)]
pub fn power_grid(
    model: &Model,
    variant: Variant,
    d: usize,
    betas: &[f64],
    ns: &[usize],
    ks: &[f64],
    reps: u64,
    seed: u64,
    critical_values: &ResultTable,
) -> Result<ResultTable> {
    power_grid_with(
        model,
        variant,
        d,
        betas,
        ns,
        ks,
        reps,
        seed,
        critical_values,
        |_| Ok(()),
    )
}

/// Normality diagnostic for the standardized edge power sum under the null.
#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub ks_distance: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub reps: u64,
}

/// Simulates `(L_n - mean) / sd` under the null and measures its distance
/// to the standard normal law. The centering follows the plan's variant
/// (exact closed form or asymptotic approximation).
pub fn clt_diagnostic(plan: &MCPlan) -> Result<CltReport> {
    if !matches!(plan.model, Model::H0) {
        return Err(Error::InvalidParameter(
            "the normality diagnostic runs under the null model".into(),
        ));
    }
    plan.validate()?;
    let ctx = StatContext::prepare(&plan.config, plan.n, &plan.window)?;
    let draws: Vec<f64> = (0..plan.reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = RngStream::new(plan.seed, seed_space::DIAGNOSTIC | rep).rng();
            let cloud = plan.model.sample(plan.n, &plan.window, &mut rng)?;
            let l = crate::edges::edge_power_sum(&cloud, ctx.r, ctx.beta)?;
            Ok((l - ctx.mean) / ctx.sd)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let variance = draws.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (m - 1.0);
    let ks = ks_distance(&draws, normal_cdf)?;
    Ok(CltReport {
        ks_distance: ks,
        sample_mean: mean,
        sample_variance: variance,
        reps: plan.reps,
    })
}

/// One cell of the contiguous-alternative diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct ContigReport {
    pub n: usize,
    pub amplitude: f64,
    /// Drift of the limiting `(Z + mu)^2` law.
    pub mu: f64,
    pub mean_statistic: f64,
    pub se_mean: f64,
    /// `1 + mu^2`, the mean of the limit law.
    pub predicted_mean: f64,
    pub ks_to_limit: f64,
}

/// Simulates the exact-centering statistic under the local alternative
/// `1 + a_n g` with the amplitude schedule `a_n = sqrt(gamma / (n r^{d/2}))`
/// (so `n r^{d/2} a_n^2 = gamma` exactly), and compares against the
/// noncentral limit `(Z + mu)^2` with
/// `mu = sqrt(d kappa_d (2 beta + d)) / (sqrt(2) (beta + d)) * ∫g^2 * gamma`.
pub fn contiguity_diagnostic(
    n_schedule: &[usize],
    perturbation: &ContiguousSpec,
    gamma: f64,
    config: &TestConfig,
    reps: u64,
    seed: u64,
) -> Result<Vec<ContigReport>> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    let l2_sq = perturbation.l2_sq.ok_or_else(|| {
        Error::InvalidParameter("perturbation must declare its squared L2 norm".into())
    })?;
    let d = config.dim;
    let df = d as f64;
    let kappa = unit_ball_volume(d)?;
    let mu = (df * kappa * (2.0 * config.beta + df)).sqrt()
        / (std::f64::consts::SQRT_2 * (config.beta + df))
        * l2_sq
        * gamma;
    let limit_cdf = move |t: f64| shifted_normal_squared_cdf(t, mu);

    let mut out = Vec::with_capacity(n_schedule.len());
    for &n in n_schedule {
        let r = config.resolve_radius(n)?;
        let amplitude = (gamma / (n as f64 * r.powf(df / 2.0))).sqrt();
        if amplitude * perturbation.bound > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "amplitude {amplitude} at n={n} violates 1 + a g >= 0"
            )));
        }
        let spec_n = perturbation.with_amplitude(amplitude)?;
        let mut plan = MCPlan::h0(n, *config, reps, seed)?;
        plan.model = Model::Contiguous(spec_n);
        let draws = simulate_statistics(&plan, seed_space::DIAGNOSTIC)?;
        let m = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / m;
        let var = draws.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (m - 1.0);
        out.push(ContigReport {
            n,
            amplitude,
            mu,
            mean_statistic: mean,
            se_mean: (var / m).sqrt(),
            predicted_mean: 1.0 + mu * mu,
            ks_to_limit: ks_distance(&draws, limit_cdf)?,
        });
    }
    Ok(out)
}

/// Empirical p-values of an observed cloud over a `(beta, k)` grid: the
/// observed statistic is compared against `reps` null replications on the
/// same window, with the add-one convention.
#[allow(clippy::too_many_arguments)]
pub fn batch_pvalues(
    cloud: &PointCloud,
    window: &Window,
    variant: Variant,
    betas: &[f64],
    ks: &[f64],
    reps: u64,
    seed: u64,
) -> Result<ResultTable> {
    cloud.validate_in_window(window)?;
    let n = cloud.len();
    let mut table = ResultTable::new("empirical-pvalues", seed, reps, 0.95);
    for &beta in betas {
        for &k in ks {
            let config = grid_config(variant, window.dim(), beta, k);
            let ctx = StatContext::prepare(&config, n, window)?;
            let observed = ctx.evaluate(cloud)?;
            let plan = MCPlan {
                reps,
                seed,
                n,
                config,
                model: Model::H0,
                window: window.clone(),
                level: 0.95,
            };
            plan.validate()?;
            let draws = simulate_statistics(&plan, seed_space::DATA)?;
            let p = empirical_pvalue(observed, &draws)?;
            table.rows.push(Row {
                model: "data".into(),
                variant: variant.short().into(),
                beta: Some(beta),
                d: window.dim(),
                n,
                k: Some(k),
                value: p,
                se: None,
                reps,
                seed,
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternatives::sample_uniform;

    fn quick_cfg(variant: Variant, beta: f64, k: f64) -> TestConfig {
        grid_config(variant, 2, beta, k)
    }

    #[test]
    fn single_replicate_quantile_is_the_draw() {
        let plan = MCPlan::h0(50, quick_cfg(Variant::Exact, 0.0, 3.0), 1, 5).unwrap();
        let draws = simulate_statistics(&plan, seed_space::CRITICAL).unwrap();
        let table = simulate_critical_values(&plan).unwrap();
        assert_eq!(draws.len(), 1);
        assert_eq!(table.rows[0].value, draws[0]);
    }

    #[test]
    fn tables_are_reproducible_and_thread_count_independent() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                critical_value_grid(
                    Variant::Exact,
                    2,
                    &[-0.5, 1.0],
                    &[50],
                    &[1.0, 5.0],
                    400,
                    1234,
                    0.95,
                )
                .unwrap()
                .to_csv_string()
            })
        };
        let a = run(1);
        let b = run(4);
        let c = run(1);
        assert_eq!(a, b, "thread count changed the table");
        assert_eq!(a, c, "rerun changed the table");
    }

    #[test]
    fn critical_value_reference_cell_d3() {
        // Asymptotic variant, d=3, beta=1, n=100, k=2: the reference table
        // gives 3.5733; 50k replications resolve the quantile to about
        // +-0.03, well inside the +-0.1 band.
        let plan = MCPlan::h0(
            100,
            grid_config(Variant::Asymptotic, 3, 1.0, 2.0),
            50_000,
            0xACC3,
        )
        .unwrap();
        let got = simulate_critical_values(&plan).unwrap().rows[0].value;
        assert!((got - 3.5733).abs() <= 0.1, "critical value {got}");
    }

    #[test]
    fn crit_and_power_draws_are_disjoint() {
        let plan = MCPlan::h0(50, quick_cfg(Variant::Exact, 0.0, 3.0), 64, 5).unwrap();
        let crit = simulate_statistics(&plan, seed_space::CRITICAL).unwrap();
        let power = simulate_statistics(&plan, seed_space::POWER).unwrap();
        assert_ne!(crit, power);
    }

    #[test]
    fn power_level_roughly_nominal_and_lookup_errors() {
        // small smoke check; the acceptance suite runs the calibrated version
        let cfg = quick_cfg(Variant::Exact, 0.0, 3.0);
        let mut plan = MCPlan::h0(50, cfg, 4000, 77).unwrap();
        let crit = simulate_critical_values(&plan).unwrap();
        plan.reps = 2000;
        let power = empirical_power(&plan, &crit).unwrap();
        let rate = power.rows[0].value;
        assert!((rate - 0.05).abs() < 0.02, "null rejection rate {rate}");

        plan.n = 60; // no matching cell
        assert!(matches!(
            empirical_power(&plan, &crit),
            Err(Error::MissingCriticalValue(_))
        ));
    }

    #[test]
    fn clu_power_is_high_at_moderate_sizes() {
        let cfg = quick_cfg(Variant::Exact, -0.5, 2.0);
        let mut plan = MCPlan::h0(50, cfg, 4000, 99).unwrap();
        let crit = simulate_critical_values(&plan).unwrap();
        plan.reps = 500;
        plan.model = Model::Clu { r_clu: 0.1 };
        let power = empirical_power(&plan, &crit).unwrap();
        assert!(
            power.rows[0].value > 0.85,
            "clustered power {}",
            power.rows[0].value
        );
    }

    #[test]
    fn clt_diagnostic_close_to_normal() {
        // modest n and reps here; the full-size check is an acceptance criterion
        let plan = MCPlan::h0(200, quick_cfg(Variant::Exact, 0.0, 5.0), 2000, 11).unwrap();
        let report = clt_diagnostic(&plan).unwrap();
        assert!(report.ks_distance < 0.05, "KS {}", report.ks_distance);
        assert!(report.sample_mean.abs() < 0.1);
        assert!((report.sample_variance - 1.0).abs() < 0.2);
    }

    #[test]
    fn contiguity_zero_gamma_recovers_the_null() {
        let spec = ContiguousSpec::cos_first_coord(0.0).unwrap();
        let cfg = quick_cfg(Variant::Exact, 0.0, 1.0);
        let reports = contiguity_diagnostic(&[200], &spec, 0.0, &cfg, 2000, 13).unwrap();
        assert_eq!(reports[0].mu, 0.0);
        assert!((reports[0].mean_statistic - 1.0).abs() < 0.15);
        assert!(reports[0].ks_to_limit < 0.06);
    }

    #[test]
    fn contiguity_mean_increases_with_gamma() {
        let spec = ContiguousSpec::cos_first_coord(0.0).unwrap();
        let cfg = quick_cfg(Variant::Exact, 0.0, 1.0);
        let mut prev = 0.0;
        for gamma in [0.0, 1.0, 2.0] {
            let rep = &contiguity_diagnostic(&[300], &spec, gamma, &cfg, 2000, 17).unwrap()[0];
            assert!(
                rep.mean_statistic > prev,
                "mean not increasing at gamma={gamma}: {} after {prev}",
                rep.mean_statistic
            );
            prev = rep.mean_statistic;
        }
    }

    #[test]
    fn batch_pvalues_on_null_and_clustered_clouds() {
        let window = Window::unit_cube(2).unwrap();
        let betas = [-0.5, 0.0];
        let ks = [1.0, 3.0];

        // single replication: p in {1/2, 1} under the add-one convention
        let mut rng = RngStream::new(19, 0).rng();
        let cloud = sample_uniform(50, 2, &mut rng).unwrap();
        let table = batch_pvalues(&cloud, &window, Variant::Exact, &betas, &ks, 1, 19).unwrap();
        for row in &table.rows {
            assert!(row.value == 0.5 || row.value == 1.0, "p = {}", row.value);
        }

        // a strongly clustered cloud yields a tiny minimum p-value
        let mut rng = RngStream::new(19, 1).rng();
        let cloud = sample_clu(100, 2, &mut rng, 0.1).unwrap();
        let table =
            batch_pvalues(&cloud, &window, Variant::Exact, &betas, &ks, 400, 23).unwrap();
        let min_p = table.rows.iter().map(|r| r.value).fold(1.0, f64::min);
        assert!(min_p <= 0.01, "minimum grid p-value {min_p}");
    }

    #[test]
    fn batch_pvalues_uniform_over_independent_clouds() {
        // Across independent null clouds the p-values are about uniform:
        // the pooled fraction below 0.05 stays near 5%.
        let window = Window::unit_cube(2).unwrap();
        let betas = [-0.5, 1.0];
        let ks = [1.0, 4.0];
        let mut below = 0usize;
        let mut total = 0usize;
        for cloud_idx in 0..30u64 {
            let mut rng = RngStream::new(303, cloud_idx).rng();
            let cloud = sample_uniform(50, 2, &mut rng).unwrap();
            let table = batch_pvalues(
                &cloud,
                &window,
                Variant::Exact,
                &betas,
                &ks,
                400,
                40_000 + cloud_idx,
            )
            .unwrap();
            for row in &table.rows {
                total += 1;
                if row.value < 0.05 {
                    below += 1;
                }
            }
        }
        let fraction = below as f64 / total as f64;
        assert!(
            (0.0..=0.12).contains(&fraction),
            "fraction of p < 0.05 under the null: {fraction} ({below}/{total})"
        );
    }

    #[test]
    fn batch_pvalues_requires_contained_cloud() {
        let window = Window::unit_cube(2).unwrap();
        let cloud = PointCloud::new(2, vec![0.5, 1.5, 0.1, 0.1]).unwrap();
        assert!(matches!(
            batch_pvalues(&cloud, &window, Variant::Exact, &[0.0], &[1.0], 10, 1),
            Err(Error::PointOutsideWindow { .. })
        ));
    }
}
