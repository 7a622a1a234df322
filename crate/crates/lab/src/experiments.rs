use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use shc_core::asymptotics::{
    fit_loglog, large_time_constant, moment_asymptote, small_time_asymptote, tail_decay_probe,
    GeometryInput, Regime, RegimeTag,
};
use shc_core::heat_content::{q_monte_carlo, q_subordinate, q_time_changed, McOptions, TimeChange, TimeStep};
use shc_core::rng::derive_seed;
use shc_core::special_fn::{laplace_invert, mittag_leffler, InversionOptions};
use shc_core::spectral::{bm_interval_eigensystem, EigenSystem, SeriesOptions};
use shc_core::stable_motion::sup_constant_exact;
use shc_core::subordinator::{expected_functional, FunctionalOptions, InverseTimeTransform, Kind};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub t: f64,
    pub computed: f64,
    pub reference: f64,
    /// `computed / reference`; absent when the reference is zero.
    pub ratio: Option<f64>,
    pub error_bound: f64,
    pub method: String,
}

impl Row {
    fn new(t: f64, computed: f64, reference: f64, error_bound: f64, method: &str) -> Self {
        Self {
            t,
            computed,
            reference,
            ratio: (reference != 0.0).then(|| computed / reference),
            error_bound,
            method: method.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    pub summary: BTreeMap<String, Value>,
    pub wall_clock_seconds: f64,
}

/// Run an experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, LabError> {
    let start = Instant::now();
    let mut summary = BTreeMap::new();
    let mut rows = match cfg.experiment {
        ExperimentKind::LargeTime => large_time(cfg, &mut summary)?,
        ExperimentKind::SubordinateRate => subordinate_rate(cfg, &mut summary)?,
        ExperimentKind::SmallTimeMc => small_time_mc(cfg, &mut summary)?,
        ExperimentKind::TransformConsistency => transform_consistency(cfg, &mut summary)?,
        ExperimentKind::MomentLaws => moment_laws(cfg, &mut summary)?,
        ExperimentKind::TailProbe => tail_probe(cfg, &mut summary)?,
    };
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(ExperimentResult {
        experiment: cfg.experiment.name().to_string(),
        config: cfg.echo.clone(),
        rows,
        summary,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run on a dedicated pool of `workers` threads.
pub fn run_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult, LabError> {
    if workers == 0 {
        return Err(LabError::Validation("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Validation(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

fn eigen_system(cfg: &ExperimentConfig) -> Result<EigenSystem, LabError> {
    match &cfg.eigen_table {
        Some(path) => EigenSystem::read_table(path).map_err(|e| LabError::Validation(format!("{}: {e}", path.display()))),
        None => {
            if cfg.alpha != 2.0 {
                return Err(LabError::Validation(
                    "exact eigenpairs are built in only for alpha = 2; supply eigen_table".into(),
                ));
            }
            bm_interval_eigensystem(&cfg.domain, cfg.eigen_terms).map_err(|e| LabError::Validation(e.to_string()))
        }
    }
}

fn series_opts(cfg: &ExperimentConfig) -> SeriesOptions {
    SeriesOptions {
        abs_tol: 0.0,
        rel_tol: cfg.tolerance,
    }
}

fn stable_beta(cfg: &ExperimentConfig) -> Result<f64, LabError> {
    match cfg.subordinator.kind() {
        Kind::Stable { beta } => Ok(beta),
        _ => Err(LabError::Validation(format!(
            "{} needs subordinator = stable",
            cfg.experiment.name()
        ))),
    }
}

fn fit_summary(summary: &mut BTreeMap<String, Value>, points: &[(f64, f64)], expected: f64) -> Result<(), LabError> {
    let fit = fit_loglog(points).map_err(|e| LabError::NumericalSummary(format!("log-log fit: {e}")))?;
    summary.insert("slope".into(), json!(fit.slope));
    summary.insert("intercept".into(), json!(fit.intercept));
    summary.insert("r_squared".into(), json!(fit.r_squared));
    summary.insert("slope_se".into(), finite(fit.slope_se));
    summary.insert("low_confidence".into(), json!(fit.low_confidence));
    summary.insert("expected_slope".into(), json!(expected));
    Ok(())
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn large_time(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let eig = eigen_system(cfg)?;
    let spec = &cfg.subordinator;
    let opts = series_opts(cfg);
    let c = large_time_constant(&eig, spec.index_at_zero(), &opts).map_err(|e| LabError::at_row(0, f64::NAN, e))?;
    let mut rows = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let q = q_time_changed(&eig, spec, t, &opts).map_err(|e| LabError::at_row(i, t, e))?;
        let reference = spec.phi(1.0 / t).map_err(|e| LabError::at_row(i, t, e))? * c.value;
        rows.push(Row::new(t, q.value, reference, q.error_bound, q.method.as_str()));
    }
    summary.insert("large_time_constant".into(), json!(c.value));
    let dev: Vec<f64> = rows.iter().filter_map(|r| r.ratio).map(|r| (r - 1.0).abs()).collect();
    summary.insert("ratio_monotone_to_one".into(), json!(dev.windows(2).all(|w| w[1] <= w[0])));
    summary.insert("final_ratio".into(), rows.last().and_then(|r| r.ratio).map_or(Value::Null, |r| json!(r)));
    if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.computed)).collect();
        fit_summary(summary, &pts, -spec.index_at_zero())?;
    }
    Ok(rows)
}

fn subordinate_rate(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let eig = eigen_system(cfg)?;
    let spec = &cfg.subordinator;
    let l1 = eig.lambda1();
    let phi1 = spec.phi(l1).map_err(|e| LabError::at_row(0, f64::NAN, e))?;
    let mut rows = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let q = q_subordinate(&eig, spec, t, &series_opts(cfg)).map_err(|e| LabError::at_row(i, t, e))?;
        if q.value <= 0.0 {
            return Err(LabError::Numerical {
                row: i,
                t,
                source: shc_core::Error::Domain("heat content underflowed to zero".into()),
            });
        }
        let rate = -q.value.ln() / t;
        rows.push(Row::new(t, rate, phi1, q.error_bound / q.value / t, q.method.as_str()));
    }
    summary.insert("lambda1".into(), json!(l1));
    summary.insert("phi_lambda1".into(), json!(phi1));
    summary.insert("final_ratio".into(), rows.last().and_then(|r| r.ratio).map_or(Value::Null, |r| json!(r)));
    // -ln Q(t)/t carries ln(m_1²)/t; the slope between the last two rows does not
    if let [.., p, q] = rows.as_slice() {
        summary.insert("secant_rate".into(), json!((q.computed * q.t - p.computed * p.t) / (q.t - p.t)));
    }
    Ok(rows)
}

fn small_time_mc(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let tag = RegimeTag::new(cfg.alpha).map_err(|e| LabError::Validation(e.to_string()))?;
    let spec = &cfg.subordinator;
    let geometry = GeometryInput::interval(&cfg.domain);
    let sup = match (tag.regime, cfg.sup_constant) {
        (Regime::Supercritical, None) => Some(sup_constant_exact(cfg.alpha).map_err(|e| LabError::Validation(e.to_string()))?),
        (_, s) => s,
    };
    let step = match cfg.dt {
        Some(dt) => TimeStep::Fixed(dt),
        None => TimeStep::Steps(cfg.steps_per_path),
    };
    let vol = cfg.domain.length();
    let beta = spec.index_at_infinity();
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let opts = McOptions {
            n_paths: cfg.n_paths,
            step,
            delta_u: cfg.delta_u,
            seed: derive_seed(cfg.seed, i as u64),
        };
        let q = q_monte_carlo(cfg.alpha, &cfg.domain, &TimeChange::Inverse(*spec), t, &opts)
            .map_err(|e| LabError::at_row(i, t, e))?;
        let reference = small_time_asymptote(cfg.alpha, spec, &geometry, t, sup).map_err(|e| LabError::at_row(i, t, e))?;
        let deficit = vol - q.value;
        rows.push(Row::new(t, deficit, reference, q.error_bound, q.method.as_str()));
        let x = match tag.regime {
            // log correction moved into the abscissa: φ(1/t)^{-1} ln φ(1/t)
            Regime::Critical => {
                let p = spec.phi(1.0 / t).map_err(|e| LabError::at_row(i, t, e))?;
                p.ln() / p
            }
            _ => t,
        };
        pts.push((x, deficit));
    }
    let (abscissa, expected) = match tag.regime {
        Regime::Supercritical => ("t", beta / cfg.alpha),
        Regime::Critical => ("ln(phi(1/t))/phi(1/t)", 1.0),
        Regime::Subcritical => ("t", beta),
    };
    summary.insert("abscissa".into(), json!(abscissa));
    if let Some(s) = sup {
        summary.insert("sup_constant".into(), json!(s));
    }
    if pts.len() >= 2 {
        fit_summary(summary, &pts, expected)?;
    }
    Ok(rows)
}

fn transform_consistency(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let beta = stable_beta(cfg)?;
    let opts = InversionOptions::default();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        for &a in &cfg.a_values {
            let tr = InverseTimeTransform {
                spec: cfg.subordinator,
                a,
            };
            let inv = laplace_invert(&tr, t, &opts).map_err(|e| LabError::at_row(i, t, e))?;
            let ml = mittag_leffler(beta, -a * t.powf(beta)).map_err(|e| LabError::at_row(i, t, e))?;
            worst = worst.max((inv.value - ml).abs());
            rows.push(Row::new(t, inv.value, ml, inv.gap, "transform"));
        }
    }
    summary.insert("max_abs_diff".into(), json!(worst));
    Ok(rows)
}

fn moment_laws(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let beta = stable_beta(cfg)?;
    let fopts = FunctionalOptions {
        tolerance: cfg.tolerance,
        breakpoints: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        for &p in &cfg.moments {
            let q = expected_functional(beta, t, |x| x.powf(p), &fopts).map_err(|e| LabError::at_row(i, t, e))?;
            let reference = moment_asymptote(p, &cfg.subordinator, t).map_err(|e| LabError::at_row(i, t, e))?;
            worst = worst.max((q.value / reference - 1.0).abs());
            rows.push(Row::new(t, q.value, reference, q.error, "quadrature"));
        }
    }
    summary.insert("max_rel_diff".into(), json!(worst));
    Ok(rows)
}

fn tail_probe(cfg: &ExperimentConfig, summary: &mut BTreeMap<String, Value>) -> Result<Vec<Row>, LabError> {
    let beta = stable_beta(cfg)?;
    let fit = tail_decay_probe(beta, &cfg.deltas, &cfg.t_grid, cfg.n_samples, cfg.seed)
        .map_err(|e| LabError::at_row(0, cfg.t_grid[0], e))?;
    let gamma_exp = beta / (1.0 - beta);
    let k = (1.0 - beta) * beta.powf(gamma_exp);
    let n = cfg.n_samples as f64;
    let rows = fit
        .points
        .iter()
        .map(|p| {
            let eps = p.t * p.delta.powf(-1.0 / beta);
            let reference = k * eps.powf(-gamma_exp);
            let (computed, err) = if p.hits > 0 {
                (-p.probability.ln(), ((1.0 - p.probability) / (n * p.probability)).sqrt())
            } else {
                (f64::INFINITY, f64::INFINITY)
            };
            Row::new(p.t, computed, reference, err, "monte_carlo")
        })
        .collect();
    summary.insert("slope".into(), json!(fit.slope));
    summary.insert("slope_se".into(), finite(fit.slope_se));
    summary.insert("r_squared".into(), json!(fit.r_squared));
    summary.insert("expected_slope".into(), json!(-gamma_exp));
    Ok(rows)
}
