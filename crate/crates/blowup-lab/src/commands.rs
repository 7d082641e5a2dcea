//! Config-driven entry points behind the `blowup-lab` binary: single runs,
//! parameter sweeps, property-suite verification, and the stored-trace
//! kernel oracle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::analyze::{
    check_boundary_blowup, envelope_from_spec, estimate_blowup_time, fit_rate,
    verify_supersolution_pde, Verdict,
};
use crate::config::ExperimentConfig;
use crate::discretize::RadialGrid;
use crate::integrate::{run, SnapshotPolicy, Trace};
use crate::kernel::{integral_identity_residual, PotentialQuadrature};
use crate::model::{check_hypotheses, HypothesisReport, ProblemSpec};
use crate::report::{
    self, MonitorsBlock, RunReport, Theorem4Block,
};
use crate::verify::{self, Check, Suite};
use crate::{Error, Result};

/// Builds the full report from a trace. Every quantity is derived from the
/// sample columns, the snapshots, and the config, so re-running this on a
/// trace reloaded from `trace.csv` + `snapshots.csv` reproduces `report.json`
/// byte for byte.
pub fn analyze_trace(
    config: &ExperimentConfig,
    spec: &ProblemSpec,
    grid: RadialGrid,
    trace: &Trace,
    hypotheses: &HypothesisReport,
) -> RunReport {
    let tol = 10.0 * grid.spacing() * grid.spacing();
    let q = spec.flux_exponent;
    let alpha = spec.dominant_exponent();

    let mut min_slope = f64::INFINITY;
    let mut min_boundary_rate = f64::INFINITY;
    let mut min_j_lower = f64::INFINITY;
    let mut min_j_upper = f64::INFINITY;
    let mut max_ratio_lower = f64::NEG_INFINITY;
    let mut min_ratio_upper = f64::INFINITY;
    for s in &trace.samples {
        min_slope = min_slope.min(s.min_slope);
        min_boundary_rate = min_boundary_rate.min(s.boundary_rate);
        min_j_lower = min_j_lower.min(s.min_j_lower);
        min_j_upper = min_j_upper.min(s.min_j_upper);
        max_ratio_lower =
            max_ratio_lower.max(s.boundary_rate / (2.0 * alpha * s.boundary_value).exp());
        min_ratio_upper = min_ratio_upper.min(s.boundary_rate / (q * s.boundary_value).exp());
    }

    let lemma1_verdict =
        Verdict::from_bool(min_slope >= -tol && min_boundary_rate >= -tol);
    let j_lower_verdict = if q < 1.0 || !hypotheses.flux_ordering.ok {
        Verdict::NotApplicable
    } else {
        Verdict::from_bool(min_j_lower >= -tol)
    };
    let j_upper_verdict = if !hypotheses.positive_margin_ok {
        Verdict::NotApplicable
    } else {
        Verdict::from_bool(min_j_upper >= -tol)
    };
    let monitors = MonitorsBlock {
        lemma1_verdict,
        lemma1_min_slope: min_slope,
        lemma1_min_boundary_rate: min_boundary_rate,
        j_lower_verdict,
        j_lower_min: min_j_lower,
        j_lower_max_ratio: max_ratio_lower,
        j_upper_verdict,
        j_upper_min: min_j_upper,
        j_upper_min_ratio: min_ratio_upper,
        j_upper_epsilon: trace.j_upper_epsilon,
    };

    let estimate = estimate_blowup_time(trace, config.beta(spec));
    let (estimate, rate, rate_reason, verdict_rate) = match estimate {
        Ok(est) => match fit_rate(trace, spec, &est, config.fit_window()) {
            Ok(rate) => (Some(est), Some(rate), None, rate.verdict),
            Err(e) => (Some(est), None, Some(e.to_string()), Verdict::NotApplicable),
        },
        Err(e) => (None, None, Some(e.to_string()), Verdict::NotApplicable),
    };

    let theorem4 = match envelope_from_spec(
        spec,
        grid,
        config.analysis.comparison_horizon,
        config.analysis.upper_constant,
    ) {
        Err(e @ (Error::NotApplicable(_) | Error::SmallnessViolated { .. })) => Theorem4Block {
            verdict: Verdict::NotApplicable,
            reason: Some(e.to_string()),
            envelope: None,
            pde_min_residual: None,
            boundary: None,
        },
        Err(e) => Theorem4Block {
            verdict: Verdict::NotApplicable,
            reason: Some(e.to_string()),
            envelope: None,
            pde_min_residual: None,
            boundary: None,
        },
        Ok(env) => {
            let pde_min = verify_supersolution_pde(&env, spec, grid, 64);
            match &estimate {
                Some(est) => {
                    match check_boundary_blowup(
                        trace,
                        &env,
                        est,
                        config.analysis.interior_fraction,
                    ) {
                        Ok(boundary) => Theorem4Block {
                            verdict: Verdict::from_bool(
                                !boundary.verdict.failed() && pde_min >= 0.0,
                            ),
                            reason: None,
                            envelope: Some(env),
                            pde_min_residual: Some(pde_min),
                            boundary: Some(boundary),
                        },
                        Err(e) => Theorem4Block {
                            verdict: Verdict::NotApplicable,
                            reason: Some(e.to_string()),
                            envelope: Some(env),
                            pde_min_residual: Some(pde_min),
                            boundary: None,
                        },
                    }
                }
                None => Theorem4Block {
                    verdict: Verdict::NotApplicable,
                    reason: Some("no blow-up time estimate for the comparison".into()),
                    envelope: Some(env),
                    pde_min_residual: Some(pde_min),
                    boundary: None,
                },
            }
        }
    };

    RunReport {
        config: config.clone(),
        hypotheses: *hypotheses,
        outcome: trace.outcome,
        estimate,
        rate,
        rate_reason,
        verdict_rate,
        theorem4,
        monitors,
        tol_mono: tol,
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub steps: usize,
    pub wall_seconds: f64,
    pub out_dir: PathBuf,
}

impl RunArtifacts {
    pub fn all_gates_pass(&self) -> bool {
        self.report.all_gates_pass()
    }
}

/// Runs one experiment and persists `trace.csv`, `snapshots.csv`,
/// `report.json`, `meta.json` and `plot.gp` into `out_dir`.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let (artifacts, _) = run_with_policy(config, out_dir, &SnapshotPolicy::default())?;
    Ok(artifacts)
}

pub fn run_with_policy(
    config: &ExperimentConfig,
    out_dir: &Path,
    policy: &SnapshotPolicy,
) -> Result<(RunArtifacts, Trace)> {
    config.validate()?;
    let (spec, grid) = config.build()?;
    let hypotheses = check_hypotheses(
        &spec,
        grid,
        config.analysis.comparison_horizon,
        config.analysis.upper_constant,
    )?;
    let params = config.monitor_params(&spec, grid)?;
    let ctl = config.step_control();
    ctl.validate(&spec).map_err(|e| match e {
        // A threshold below the initial profile is a configuration mistake.
        Error::InvalidControl(msg) => Error::Config(msg),
        other => other,
    })?;

    let start = Instant::now();
    let trace = run(&spec, grid, &ctl, params.epsilon, policy)?;
    let wall = start.elapsed().as_secs_f64();

    let report = analyze_trace(config, &spec, grid, &trace, &hypotheses);

    std::fs::create_dir_all(out_dir)?;
    report::write_trace_csv(&out_dir.join("trace.csv"), &trace)?;
    report::write_snapshots_csv(&out_dir.join("snapshots.csv"), &trace)?;
    report::write_report_json(&out_dir.join("report.json"), &report)?;
    report::write_meta_json(&out_dir.join("meta.json"), trace.outcome, trace.samples.len() - 1, wall)?;
    report::write_plot_script(&out_dir.join("plot.gp"), &report)?;

    let artifacts = RunArtifacts {
        report,
        steps: trace.samples.len() - 1,
        wall_seconds: wall,
        out_dir: out_dir.to_path_buf(),
    };
    Ok((artifacts, trace))
}

/// Re-analyzes a stored run directory; the result renders to the same
/// `report.json` the run wrote.
pub fn reanalyze(config: &ExperimentConfig, dir: &Path) -> Result<RunReport> {
    let samples = report::read_trace_csv(&dir.join("trace.csv"))?;
    let snapshots = report::read_snapshots_csv(&dir.join("snapshots.csv"))?;
    let trace = report::reload_trace(config, samples, snapshots)?;
    let (spec, grid) = config.build()?;
    let hypotheses = check_hypotheses(
        &spec,
        grid,
        config.analysis.comparison_horizon,
        config.analysis.upper_constant,
    )?;
    Ok(analyze_trace(config, &spec, grid, &trace, &hypotheses))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ReactionExponent,
    FluxExponent,
    ReactionCoeff,
    GridCells,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ReactionExponent => "p",
            Self::FluxExponent => "q",
            Self::ReactionCoeff => "lambda",
            Self::GridCells => "N",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Self::ReactionExponent),
            "q" => Ok(Self::FluxExponent),
            "lambda" => Ok(Self::ReactionCoeff),
            "N" => Ok(Self::GridCells),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected p, q, lambda or N)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub t_hat: f64,
    pub slope: f64,
    pub window: (f64, f64),
    pub verdict: String,
}

fn apply_axis(config: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut c = config.clone();
    match axis {
        SweepAxis::ReactionExponent => c.spec.p = value,
        SweepAxis::FluxExponent => c.spec.q = value,
        SweepAxis::ReactionCoeff => c.spec.lambda = value,
        SweepAxis::GridCells => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::Config(format!("N must be a positive integer, got {value}")));
            }
            c.grid.cells = value as usize;
        }
    }
    Ok(c)
}

fn sweep_threads(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = std::env::var("BLOWUP_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available);
    cap.min(jobs).max(1)
}

/// One independent run per value (concurrently, capped by
/// `BLOWUP_LAB_THREADS`), each in its own subdirectory; per-run failures are
/// recorded in the summary without aborting siblings. Writes `summary.csv`.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep requires at least one value".into()));
    }
    std::fs::create_dir_all(out_dir)?;

    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; values.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = sweep_threads(values.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= values.len() {
                    break;
                }
                let value = values[i];
                let row = match apply_axis(config, axis, value)
                    .and_then(|c| cmd_run(&c, &out_dir.join(format!("{}-{}", axis.label(), value))))
                {
                    Ok(artifacts) => {
                        let r = &artifacts.report;
                        SweepRow {
                            value,
                            t_hat: r.estimate.map(|e| e.t_hat).unwrap_or(f64::NAN),
                            slope: r.rate.map(|f| f.slope).unwrap_or(f64::NAN),
                            window: r
                                .rate
                                .map(|f| f.window)
                                .unwrap_or((f64::NAN, f64::NAN)),
                            verdict: r.verdict_rate.label().to_string(),
                        }
                    }
                    Err(e) => SweepRow {
                        value,
                        t_hat: f64::NAN,
                        slope: f64::NAN,
                        window: (f64::NAN, f64::NAN),
                        verdict: format!("error: {e}"),
                    },
                };
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });

    let rows: Vec<SweepRow> =
        rows.into_inner().unwrap().into_iter().map(|r| r.expect("worker filled row")).collect();

    let mut csv = String::from("value,T_hat,slope,window_lo,window_hi,verdict\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.value, row.t_hat, row.slope, row.window.0, row.window.1, row.verdict
        )
        .expect("string write");
    }
    std::fs::write(out_dir.join("summary.csv"), csv)?;
    Ok(rows)
}

/// Runs one named property suite and returns its checks.
pub fn cmd_verify(suite: Suite) -> Vec<Check> {
    verify::run_suite(suite)
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOutcome {
    pub residual: f64,
    pub threshold: f64,
    pub window: (f64, f64),
    pub pass: bool,
}

/// Integrates the configured problem with snapshots recorded densely over
/// the requested window, stores the trace, and evaluates the heat-potential
/// identity residual on it at field radii up to `0.9R`. The pass threshold
/// is `1e-2 · max|u|` over the window.
pub fn cmd_oracle(
    config: &ExperimentConfig,
    window: (f64, f64),
    out_dir: &Path,
) -> Result<OracleOutcome> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::Config(format!(
            "oracle window must satisfy 0 < t0 < t1, got ({t0}, {t1})"
        )));
    }
    let mut config = config.clone();
    // Stop shortly after the window: the oracle only needs the early trace.
    let margin = 0.02 * (t1 - t0);
    config.control.t_max = config.control.t_max.min(t1 + 4.0 * margin);

    let (spec, grid) = config.build()?;
    // Keep at most ~4000 snapshots in the window, assuming the parabolic cap.
    let cap = config.control.cfl_safety * grid.spacing() * grid.spacing() / (2.0 * spec.dim as f64);
    let expected_steps = ((t1 - t0) / cap).ceil() as usize;
    let policy = SnapshotPolicy {
        amplitude_step: 1.0,
        dense_window: Some((t0 - margin, t1 + margin)),
        dense_every: (expected_steps / 4000).max(1),
    };

    let (_, trace) = run_with_policy(&config, out_dir, &policy)?;

    let pick = |t: f64| -> Result<usize> {
        trace
            .snapshots
            .iter()
            .enumerate()
            .filter(|(_, s)| (s.t - t).abs() <= margin + 1e-12)
            .min_by(|a, b| (a.1.t - t).abs().total_cmp(&(b.1.t - t).abs()))
            .map(|(i, _)| i)
            .ok_or_else(|| {
                Error::InsufficientSnapshots(format!("no snapshot near t = {t} (run too short?)"))
            })
    };
    let base = pick(t0)?;
    let test = pick(t1)?;
    if base >= test {
        return Err(Error::InsufficientSnapshots(
            "oracle window collapsed to a single snapshot".into(),
        ));
    }

    let radius = grid.radius();
    let radii: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 0.9].iter().map(|f| f * radius).collect();
    let quad = PotentialQuadrature::default();
    let residual =
        integral_identity_residual(&trace, &spec, base, test, &radii, &quad)?;

    let mut sup = 0.0f64;
    for snap in &trace.snapshots[base..=test] {
        for &v in snap.field.values() {
            sup = sup.max(v.abs());
        }
    }
    let threshold = 1e-2 * sup;
    Ok(OracleOutcome {
        residual,
        threshold,
        window: (trace.snapshots[base].t, trace.snapshots[test].t),
        pass: residual < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig::parse(
            r#"
[spec]
n = 1
R = 1.0
p = 1.0
q = 1.0
lambda = 1.0
[spec.u0]
family = "quadratic"
a = -1.0
[grid]
N = 48
[control]
u_stop = 6.0
t_max = 10.0
[analysis]
fit_window = [2.0, 4.0]
"#,
        )
        .unwrap()
    }

    #[test]
    fn run_writes_all_artifacts_and_reanalysis_matches() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        let artifacts = cmd_run(&config, dir.path()).unwrap();
        for name in ["trace.csv", "snapshots.csv", "report.json", "meta.json", "plot.gp"] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
        let stored = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        let re = reanalyze(&config, dir.path()).unwrap();
        assert_eq!(report::render_report_json(&re), stored);
        assert!(artifacts.report.estimate.is_some());
    }

    #[test]
    fn run_rejects_bad_stop_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config();
        config.control.u_stop = -10.0;
        assert!(matches!(cmd_run(&config, dir.path()), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_produces_ordered_rows_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config();
        config.grid.cells = 32;
        config.control.u_stop = 4.0;
        config.analysis.fit_window = Some([1.5, 3.0]);
        let rows = cmd_sweep(&config, SweepAxis::FluxExponent, &[1.0, 1.5], dir.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, 1.0);
        assert_eq!(rows[1].value, 1.5);
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with("value,T_hat,slope,window_lo,window_hi,verdict\n"));
        assert_eq!(summary.lines().count(), 3);
        assert!(dir.path().join("q-1.5").join("report.json").exists());
    }

    #[test]
    fn sweep_records_errors_without_aborting() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        // N = 5 is below the minimum resolution and must fail; the sibling
        // still completes.
        let rows = cmd_sweep(&config, SweepAxis::GridCells, &[5.0, 32.0], dir.path()).unwrap();
        assert!(rows[0].verdict.starts_with("error"));
        assert!(!rows[1].verdict.starts_with("error"));
    }

    #[test]
    fn sweep_rejects_empty_values() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        assert!(matches!(
            cmd_sweep(&config, SweepAxis::FluxExponent, &[], dir.path()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn oracle_on_small_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config();
        config.grid.cells = 64;
        let outcome = cmd_oracle(&config, (0.02, 0.05), dir.path()).unwrap();
        assert!(
            outcome.pass,
            "residual {} vs threshold {}",
            outcome.residual, outcome.threshold
        );
    }
}
