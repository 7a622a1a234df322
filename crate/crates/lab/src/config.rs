//! Flat `key=value` experiment configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use shc_core::spectral::IntervalDomain;
use shc_core::subordinator::LaplaceExponentSpec;

use crate::error::LabError;

/// Experiment kinds understood by [`crate::run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    LargeTime,
    SubordinateRate,
    SmallTimeMc,
    TransformConsistency,
    MomentLaws,
    TailProbe,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::LargeTime,
        ExperimentKind::SubordinateRate,
        ExperimentKind::SmallTimeMc,
        ExperimentKind::TransformConsistency,
        ExperimentKind::MomentLaws,
        ExperimentKind::TailProbe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LargeTime => "large_time",
            ExperimentKind::SubordinateRate => "subordinate_rate",
            ExperimentKind::SmallTimeMc => "small_time_mc",
            ExperimentKind::TransformConsistency => "transform_consistency",
            ExperimentKind::MomentLaws => "moment_laws",
            ExperimentKind::TailProbe => "tail_probe",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::LargeTime => {
                "time-changed heat content vs its large-time power law (eigen series)"
            }
            ExperimentKind::SubordinateRate => {
                "-ln Q(t)/t for the subordinate process vs phi(lambda_1)"
            }
            ExperimentKind::SmallTimeMc => {
                "Monte Carlo heat loss |Omega| - Q(t) vs the small-time law, with log-log slope"
            }
            ExperimentKind::TransformConsistency => {
                "Laplace inversion of the inverse-time transform vs Mittag-Leffler"
            }
            ExperimentKind::MomentLaws => "E[E_t^p] by quadrature vs the moment law",
            ExperimentKind::TailProbe => "-ln P(E_t > delta) vs the small-ball law, with fitted exponent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub alpha: f64,
    pub subordinator: LaplaceExponentSpec,
    pub domain: IntervalDomain,
    /// Eigen table file; the exact Brownian eigenpairs are used otherwise.
    pub eigen_table: Option<PathBuf>,
    pub eigen_terms: usize,
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    /// Fixed walk step; when absent, `steps_per_path` steps per walk.
    pub dt: Option<f64>,
    pub steps_per_path: usize,
    pub delta_u: f64,
    pub tolerance: f64,
    pub sup_constant: Option<f64>,
    pub a_values: Vec<f64>,
    pub moments: Vec<f64>,
    pub deltas: Vec<f64>,
    pub n_samples: usize,
    pub output: String,
    /// Every key as finally resolved, for the result echo.
    pub echo: BTreeMap<String, String>,
}

/// Parse `key=value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, LabError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_pair(line)
            .ok_or_else(|| LabError::Validation(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(LabError::Validation(format!("line {}: duplicate key {k:?}", i + 1)));
        }
    }
    Ok(out)
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// Apply `--set key=value` overrides on top of the file.
pub fn apply_overrides(map: &mut BTreeMap<String, String>, sets: &[String]) -> Result<(), LabError> {
    for s in sets {
        let (k, v) = split_pair(s).ok_or_else(|| LabError::Validation(format!("--set expects key=value, got {s:?}")))?;
        map.insert(k, v);
    }
    Ok(())
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "alpha",
    "subordinator",
    "beta",
    "kappa",
    "a",
    "b",
    "domain_a",
    "domain_b",
    "eigen_table",
    "eigen_terms",
    "t_min",
    "t_max",
    "t_points",
    "n_paths",
    "dt",
    "steps_per_path",
    "delta_u",
    "tolerance",
    "sup_constant",
    "a_values",
    "moments",
    "deltas",
    "n_samples",
    "output",
];

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if let Some(v) = &v {
            self.echo.insert(key.into(), v.clone());
        }
        v
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, LabError>
    where
        T: ToString,
    {
        match self.raw(key) {
            Some(v) => v
                .parse::<T>()
                .map_err(|_| LabError::Validation(format!("{key}: cannot parse {v:?}"))),
            None => {
                let d = default.ok_or_else(|| LabError::Validation(format!("missing required key {key:?}")))?;
                self.echo.insert(key.into(), d.to_string());
                Ok(d)
            }
        }
    }

    /// A real number; `pi` and `k*pi` are accepted.
    fn real(&mut self, key: &str, default: Option<f64>) -> Result<f64, LabError> {
        match self.raw(key) {
            Some(v) => parse_real(&v).ok_or_else(|| LabError::Validation(format!("{key}: cannot parse {v:?}"))),
            None => {
                let d = default.ok_or_else(|| LabError::Validation(format!("missing required key {key:?}")))?;
                self.echo.insert(key.into(), d.to_string());
                Ok(d)
            }
        }
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, LabError> {
        match self.raw(key) {
            Some(v) => v
                .split(',')
                .map(|s| parse_real(s.trim()).ok_or_else(|| LabError::Validation(format!("{key}: cannot parse {s:?}"))))
                .collect(),
            None => {
                let s: Vec<String> = default.iter().map(|x| x.to_string()).collect();
                self.echo.insert(key.into(), s.join(","));
                Ok(default.to_vec())
            }
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if s == "pi" {
        return Some(PI);
    }
    if let Some(k) = s.strip_suffix("*pi") {
        return k.trim().parse::<f64>().ok().map(|k| k * PI);
    }
    s.parse().ok()
}

fn positive(key: &str, v: f64) -> Result<f64, LabError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Validation(format!("{key} must be positive, got {v}")))
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive; decades land exactly
/// on powers of ten.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, LabError> {
        for k in map.keys() {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(LabError::Validation(format!("unknown key {k:?}")));
            }
        }
        let mut r = Reader {
            map,
            echo: BTreeMap::new(),
        };
        let name = r
            .raw("experiment")
            .ok_or_else(|| LabError::Validation("missing required key \"experiment\"".into()))?;
        let experiment = ExperimentKind::parse(&name)
            .ok_or_else(|| LabError::Validation(format!("unknown experiment {name:?}")))?;
        let seed: u64 = r.num("seed", None)?;
        let alpha = r.real("alpha", Some(2.0))?;
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(LabError::Validation(format!("alpha must lie in (0, 2], got {alpha}")));
        }

        let sub = r.raw("subordinator").unwrap_or_else(|| {
            r.echo.insert("subordinator".into(), "stable".into());
            "stable".into()
        });
        let subordinator = match sub.as_str() {
            "stable" => LaplaceExponentSpec::stable(r.real("beta", Some(0.5))?),
            "tempered_stable" => {
                let beta = r.real("beta", Some(0.5))?;
                LaplaceExponentSpec::tempered_stable(beta, r.real("kappa", None)?)
            }
            "sum_of_stables" => {
                let a = r.real("a", None)?;
                LaplaceExponentSpec::sum_of_stables(a, r.real("b", None)?)
            }
            "drift" => Ok(LaplaceExponentSpec::drift()),
            other => return Err(LabError::Validation(format!("unknown subordinator {other:?}"))),
        }
        .map_err(|e| LabError::Validation(e.to_string()))?;

        let domain = IntervalDomain::new(r.real("domain_a", Some(0.0))?, r.real("domain_b", Some(PI))?)
            .map_err(|e| LabError::Validation(e.to_string()))?;
        let eigen_table = r.raw("eigen_table").map(PathBuf::from);
        let eigen_terms: usize = r.num("eigen_terms", Some(100_000))?;

        let t_min = positive("t_min", r.real("t_min", None)?)?;
        let t_max = positive("t_max", r.real("t_max", None)?)?;
        let t_points: usize = r.num("t_points", Some(5))?;
        if t_points == 0 {
            return Err(LabError::Validation("t grid is empty (t_points = 0)".into()));
        }
        if t_max < t_min || (t_points > 1 && t_max == t_min) {
            return Err(LabError::Validation(format!("t grid [{t_min}, {t_max}] is empty")));
        }
        let t_grid = log_grid(t_min, t_max, t_points);

        let n_paths: usize = r.num("n_paths", Some(100_000))?;
        let dt = match r.raw("dt") {
            Some(v) => Some(positive("dt", parse_real(&v).ok_or_else(|| LabError::Validation(format!("dt: cannot parse {v:?}")))?)?),
            None => None,
        };
        let steps_per_path: usize = r.num("steps_per_path", Some(100))?;
        let delta_u = positive("delta_u", r.real("delta_u", Some(1e-4))?)?;
        let tolerance = positive("tolerance", r.real("tolerance", Some(1e-12))?)?;
        let sup_constant = match r.raw("sup_constant") {
            Some(v) => Some(positive("sup_constant", parse_real(&v).ok_or_else(|| LabError::Validation(format!("sup_constant: cannot parse {v:?}")))?)?),
            None => None,
        };
        let a_values = r.list("a_values", &[0.5, 1.0, 5.0])?;
        let moments = r.list("moments", &[1.0])?;
        let deltas = r.list("deltas", &[1.0])?;
        for (key, xs) in [("a_values", &a_values), ("moments", &moments), ("deltas", &deltas)] {
            if xs.is_empty() {
                return Err(LabError::Validation(format!("{key} is empty")));
            }
            for &x in xs.iter() {
                positive(key, x)?;
            }
        }
        let n_samples: usize = r.num("n_samples", Some(10_000_000))?;
        if n_paths == 0 || n_samples == 0 || steps_per_path == 0 || eigen_terms == 0 {
            return Err(LabError::Validation("sample sizes and term counts must be positive".into()));
        }
        let output = r.raw("output").unwrap_or_else(|| name.clone());
        if output.is_empty() || output.contains('/') {
            return Err(LabError::Validation(format!("output must be a plain file stem, got {output:?}")));
        }
        r.echo.insert("output".into(), output.clone());

        Ok(Self {
            experiment,
            seed,
            alpha,
            subordinator,
            domain,
            eigen_table,
            eigen_terms,
            t_grid,
            n_paths,
            dt,
            steps_per_path,
            delta_u,
            tolerance,
            sup_constant,
            a_values,
            moments,
            deltas,
            n_samples,
            output,
            echo: r.echo,
        })
    }

    /// Parse file text plus overrides.
    pub fn from_text(text: &str, sets: &[String]) -> Result<Self, LabError> {
        let mut map = parse_pairs(text)?;
        apply_overrides(&mut map, sets)?;
        Self::from_map(&map)
    }
}
