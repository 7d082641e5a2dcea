//! Persistence of runs: `trace.csv`, `snapshots.csv`, `report.json`,
//! `meta.json` and the emitted plot script, plus the loaders used for
//! offline re-analysis.
//!
//! Data files are deterministic for a fixed config: floats are written with
//! Rust's shortest round-tripping form in CSV and with 17 significant digits
//! in JSON, key order is fixed, timestamps live only in `meta.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analyze::{
    BlowupTime, BoundaryBlowupReport, RateReport, SupersolutionEnvelope, Verdict,
};
use crate::config::ExperimentConfig;
use crate::discretize::{RadialField, RadialGrid};
use crate::integrate::{MonitorSummary, Sample, Snapshot, StopReason, Trace};
use crate::model::HypothesisReport;
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "t,M,ut_R,min_ur,min_J2,min_J3,dt";
pub const SNAPSHOT_HEADER: &str = "t,r,u";

pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<()> {
    let mut out = String::with_capacity(64 * trace.samples.len() + 32);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.t, s.boundary_value, s.boundary_rate, s.min_slope, s.min_j_lower, s.min_j_upper, s.dt
        )
        .expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_snapshots_csv(path: &Path, trace: &Trace) -> Result<()> {
    let mut out = String::new();
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for snap in &trace.snapshots {
        let grid = snap.field.grid();
        for (i, &u) in snap.field.values().iter().enumerate() {
            writeln!(out, "{},{},{}", snap.t, grid.node(i), u).expect("string write");
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_f64(token: &str, path: &Path) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("bad float `{token}` in {}", path.display())))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected trace header {other:?} in {}",
                path.display()
            )))
        }
    }
    let mut samples = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Config(format!("bad trace row in {}", path.display())));
        }
        samples.push(Sample {
            t: parse_f64(cols[0], path)?,
            boundary_value: parse_f64(cols[1], path)?,
            boundary_rate: parse_f64(cols[2], path)?,
            min_slope: parse_f64(cols[3], path)?,
            min_j_lower: parse_f64(cols[4], path)?,
            min_j_upper: parse_f64(cols[5], path)?,
            dt: parse_f64(cols[6], path)?,
        });
    }
    Ok(samples)
}

pub fn read_snapshots_csv(path: &Path) -> Result<Vec<Snapshot>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SNAPSHOT_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected snapshot header {other:?} in {}",
                path.display()
            )))
        }
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!("bad snapshot row in {}", path.display())));
        }
        rows.push((
            parse_f64(cols[0], path)?,
            parse_f64(cols[1], path)?,
            parse_f64(cols[2], path)?,
        ));
    }
    // Blocks share a time stamp and walk the grid from r = 0 to r = R.
    let mut snapshots = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].0;
        let mut values = Vec::new();
        let mut radius = 0.0f64;
        while i < rows.len() && rows[i].0 == t {
            radius = radius.max(rows[i].1);
            values.push(rows[i].2);
            i += 1;
        }
        let grid = RadialGrid::new(values.len() - 1, radius)?;
        snapshots.push(Snapshot { t, field: RadialField::new(grid, values)? });
    }
    Ok(snapshots)
}

/// Rebuilds a [`Trace`] from stored CSV data. Quantities that the columns do
/// not carry (grid-interior value and rate minima, positivity tracking) are
/// left at their vacuous values; the report builder only consumes
/// column-derivable data, so re-analysis of stored runs is exact.
pub fn reload_trace(config: &ExperimentConfig, samples: Vec<Sample>, snapshots: Vec<Snapshot>) -> Result<Trace> {
    if samples.is_empty() {
        return Err(Error::Config("stored trace has no samples".into()));
    }
    let (spec, grid) = config.build()?;
    let params = config.monitor_params(&spec, grid)?;
    let last = samples.last().unwrap();
    let outcome = if last.boundary_value >= config.control.u_stop {
        StopReason::AmplitudeThreshold
    } else if last.t >= config.control.t_max {
        StopReason::TimeHorizon
    } else {
        StopReason::StepUnderflow
    };
    let nondecreasing = samples.windows(2).all(|w| w[1].boundary_value >= w[0].boundary_value);
    let fold = |f: fn(&Sample) -> f64| samples.iter().map(f).fold(f64::INFINITY, f64::min);
    let monitors = MonitorSummary {
        boundary_nondecreasing: nondecreasing,
        min_value: f64::NAN,
        min_slope: fold(|s| s.min_slope),
        min_rate: f64::NAN,
        min_j_lower: fold(|s| s.min_j_lower),
        min_j_upper: fold(|s| s.min_j_upper),
        positivity_preserved: true,
        first_nonnegative_time: None,
        max_rate_ratio_lower: f64::NAN,
        min_rate_ratio_upper: f64::NAN,
    };
    Ok(Trace {
        initial_boundary_value: samples[0].boundary_value,
        j_upper_epsilon: params.epsilon,
        monitor_tol: params.tol_mono,
        samples,
        snapshots,
        outcome,
        monitors,
    })
}

/// Everything `report.json` carries; assembled by `commands::analyze_trace`.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub hypotheses: HypothesisReport,
    pub outcome: StopReason,
    pub estimate: Option<BlowupTime>,
    pub rate: Option<RateReport>,
    pub rate_reason: Option<String>,
    pub verdict_rate: Verdict,
    pub theorem4: Theorem4Block,
    pub monitors: MonitorsBlock,
    pub tol_mono: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem4Block {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub envelope: Option<SupersolutionEnvelope>,
    pub pde_min_residual: Option<f64>,
    pub boundary: Option<BoundaryBlowupReport>,
}

#[derive(Debug, Clone, Copy)]
pub struct MonitorsBlock {
    pub lemma1_verdict: Verdict,
    pub lemma1_min_slope: f64,
    pub lemma1_min_boundary_rate: f64,
    pub j_lower_verdict: Verdict,
    pub j_lower_min: f64,
    pub j_lower_max_ratio: f64,
    pub j_upper_verdict: Verdict,
    pub j_upper_min: f64,
    pub j_upper_min_ratio: f64,
    pub j_upper_epsilon: f64,
}

impl RunReport {
    /// True when no applicable gate failed.
    pub fn all_gates_pass(&self) -> bool {
        !(self.verdict_rate.failed()
            || self.theorem4.verdict.failed()
            || self.monitors.lemma1_verdict.failed()
            || self.monitors.j_lower_verdict.failed()
            || self.monitors.j_upper_verdict.failed())
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => num(v),
        None => "null".into(),
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                write!(out, "\\u{:04x}", c as u32).expect("string write");
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn pair(lo: f64, hi: f64) -> String {
    format!("[{}, {}]", num(lo), num(hi))
}

/// Renders `report.json` with stable key order and 17-significant-digit
/// floats. The verdicts are fully determined by the file: re-running the
/// analyzer offline on the stored CSVs reproduces it byte for byte.
pub fn render_report_json(report: &RunReport) -> String {
    let c = &report.config;
    let h = &report.hypotheses;
    let m = &report.monitors;
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str("  \"config_echo\": {\n");
    s.push_str(&format!(
        "    \"spec\": {{\"n\": {}, \"R\": {}, \"p\": {}, \"q\": {}, \"lambda\": {}, \"u0\": {{\"family\": {}, \"a\": {}, \"b_max\": {}}}}},\n",
        c.spec.n,
        num(c.spec.radius),
        num(c.spec.p),
        num(c.spec.q),
        num(c.spec.lambda),
        quoted(&c.spec.u0.family),
        num(c.spec.u0.a),
        num(c.spec.u0.b_max),
    ));
    s.push_str(&format!("    \"grid\": {{\"N\": {}}},\n", c.grid.cells));
    s.push_str(&format!(
        "    \"control\": {{\"cfl_safety\": {}, \"delta_max\": {}, \"u_stop\": {}, \"t_max\": {}}},\n",
        num(c.control.cfl_safety),
        num(c.control.delta_max),
        num(c.control.u_stop),
        num(c.control.t_max),
    ));
    let fit_window = match c.analysis.fit_window {
        Some([lo, hi]) => pair(lo, hi),
        None => "null".into(),
    };
    s.push_str(&format!(
        "    \"analysis\": {{\"beta\": {}, \"fit_window\": {}, \"epsilon_fraction\": {}, \"interior_fraction\": {}, \"T_cmp\": {}, \"C_up\": {}}},\n",
        opt_num(c.analysis.beta),
        fit_window,
        num(c.analysis.epsilon_fraction),
        num(c.analysis.interior_fraction),
        num(c.analysis.comparison_horizon),
        num(c.analysis.upper_constant),
    ));
    let dir = match &c.output.dir {
        Some(d) => quoted(&d.display().to_string()),
        None => "null".into(),
    };
    s.push_str(&format!("    \"output\": {{\"dir\": {dir}}}\n"));
    s.push_str("  },\n");

    s.push_str("  \"hypotheses\": {\n");
    s.push_str(&format!(
        "    \"compat\": {{\"ok\": {}, \"residual\": {}}},\n",
        h.compat.ok,
        num(h.compat.value)
    ));
    s.push_str(&format!(
        "    \"subsol\": {{\"ok\": {}, \"min\": {}}},\n",
        h.subsol.ok,
        num(h.subsol.value)
    ));
    s.push_str(&format!("    \"monotone_ok\": {},\n", h.monotone_ok));
    s.push_str(&format!(
        "    \"flux_ordering\": {{\"ok\": {}, \"min\": {}}},\n",
        h.flux_ordering.ok,
        num(h.flux_ordering.value)
    ));
    s.push_str(&format!(
        "    \"positive_margin\": {{\"ok\": {}, \"value\": {}}},\n",
        h.positive_margin_ok,
        num(h.positive_margin)
    ));
    s.push_str(&format!(
        "    \"smallness\": {{\"ok\": {}, \"lhs\": {}, \"rhs\": {}}},\n",
        h.smallness.ok,
        num(h.smallness.lhs),
        num(h.smallness.rhs)
    ));
    s.push_str(&format!("    \"sup_norm_u0\": {}\n", num(h.sup_norm_initial)));
    s.push_str("  },\n");

    s.push_str(&format!("  \"outcome\": {},\n", quoted(report.outcome.label())));
    s.push_str(&format!(
        "  \"T_hat\": {},\n",
        opt_num(report.estimate.map(|e| e.t_hat))
    ));
    s.push_str(&format!(
        "  \"T_hat_spread\": {},\n",
        opt_num(report.estimate.map(|e| e.spread))
    ));
    s.push_str(&format!("  \"slope\": {},\n", opt_num(report.rate.map(|r| r.slope))));
    s.push_str(&format!(
        "  \"intercept\": {},\n",
        opt_num(report.rate.map(|r| r.intercept))
    ));
    let window = match &report.rate {
        Some(r) => pair(r.window.0, r.window.1),
        None => "null".into(),
    };
    s.push_str(&format!("  \"window\": {window},\n"));
    let fit_window = match &report.rate {
        Some(r) => pair(r.fit_window.0, r.fit_window.1),
        None => "null".into(),
    };
    s.push_str(&format!("  \"fit_window\": {fit_window},\n"));
    s.push_str(&format!(
        "  \"verdict_rate\": {},\n",
        quoted(report.verdict_rate.label())
    ));
    s.push_str(&format!(
        "  \"verdict_theorem4\": {},\n",
        quoted(report.theorem4.verdict.label())
    ));

    s.push_str("  \"monitors\": {\n");
    s.push_str(&format!(
        "    \"lemma1\": {{\"verdict\": {}, \"min_ur\": {}, \"min_ut_boundary\": {}}},\n",
        quoted(m.lemma1_verdict.label()),
        num(m.lemma1_min_slope),
        num(m.lemma1_min_boundary_rate)
    ));
    s.push_str(&format!(
        "    \"J2\": {{\"verdict\": {}, \"min\": {}, \"max_boundary_ratio\": {}}},\n",
        quoted(m.j_lower_verdict.label()),
        num(m.j_lower_min),
        num(m.j_lower_max_ratio)
    ));
    s.push_str(&format!(
        "    \"J3\": {{\"verdict\": {}, \"min\": {}, \"epsilon\": {}, \"min_boundary_ratio\": {}}}\n",
        quoted(m.j_upper_verdict.label()),
        num(m.j_upper_min),
        num(m.j_upper_epsilon),
        num(m.j_upper_min_ratio)
    ));
    s.push_str("  },\n");

    let t4 = &report.theorem4;
    s.push_str("  \"theorem4\": {\n");
    s.push_str(&format!("    \"verdict\": {},\n", quoted(t4.verdict.label())));
    let reason = match &t4.reason {
        Some(r) => quoted(r),
        None => "null".into(),
    };
    s.push_str(&format!("    \"reason\": {reason},\n"));
    s.push_str(&format!(
        "    \"A\": {},\n    \"B\": {},\n",
        opt_num(t4.envelope.map(|e| e.amplitude)),
        opt_num(t4.envelope.map(|e| e.temporal))
    ));
    s.push_str(&format!(
        "    \"pde_min_residual\": {},\n",
        opt_num(t4.pde_min_residual)
    ));
    s.push_str(&format!(
        "    \"envelope_margin\": {},\n    \"interior_margin\": {},\n    \"hypothesis_margin\": {},\n    \"comparison_tol\": {}\n",
        opt_num(t4.boundary.map(|b| b.envelope_margin)),
        opt_num(t4.boundary.map(|b| b.interior_margin)),
        opt_num(t4.boundary.map(|b| b.hypothesis_margin)),
        opt_num(t4.boundary.map(|b| b.tol))
    ));
    s.push_str("  },\n");
    s.push_str(&format!("  \"tol_mono\": {}\n", num(report.tol_mono)));
    s.push_str("}\n");
    s
}

pub fn write_report_json(path: &Path, report: &RunReport) -> Result<()> {
    fs::write(path, render_report_json(report))?;
    Ok(())
}

/// Run metadata (timestamps, wall time) kept out of the data files so those
/// stay bit-reproducible.
pub fn write_meta_json(
    path: &Path,
    outcome: StopReason,
    steps: usize,
    wall_seconds: f64,
) -> Result<()> {
    let unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let body = format!(
        "{{\n  \"tool\": \"blowup-lab\",\n  \"version\": {},\n  \"created_unix\": {unix},\n  \"outcome\": {},\n  \"steps\": {steps},\n  \"wall_seconds\": {}\n}}\n",
        quoted(env!("CARGO_PKG_VERSION")),
        quoted(outcome.label()),
        num(wall_seconds),
    );
    fs::write(path, body)?;
    Ok(())
}

/// Emits a gnuplot script next to the data files; plots are generated
/// scripts rather than rendered images.
pub fn write_plot_script(path: &Path, report: &RunReport) -> Result<()> {
    let mut s = String::new();
    s.push_str("# gnuplot script generated by blowup-lab\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 1400,900\n");
    s.push_str("set output 'overview.png'\n");
    s.push_str("set multiplot layout 2,2\n");
    s.push_str("set title 'boundary value M(t)'\n");
    s.push_str("plot 'trace.csv' using 1:2 with lines lw 2\n");
    if let Some(est) = &report.estimate {
        s.push_str(&format!("T_hat = {}\n", num(est.t_hat)));
        s.push_str("set title 'M against -log(T_hat - t)'\n");
        s.push_str("plot 'trace.csv' using (-log(T_hat - $1)):2 with lines lw 2\n");
    } else {
        s.push_str("set title 'rate view unavailable (no blow-up estimate)'\n");
        s.push_str("plot 'trace.csv' using 1:2 with lines\n");
    }
    s.push_str("set title 'monitor minima'\n");
    s.push_str(
        "plot 'trace.csv' using 1:4 with lines, '' using 1:5 with lines, '' using 1:6 with lines\n",
    );
    s.push_str("set title 'stored profiles u(r)'\n");
    s.push_str("plot 'snapshots.csv' using 2:3 with dots\n");
    s.push_str("unset multiplot\n");
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::SnapshotPolicy;

    fn tiny_trace() -> (ExperimentConfig, Trace) {
        let config = ExperimentConfig::parse(
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
N = 32
[control]
u_stop = 0.5
"#,
        )
        .unwrap();
        let (spec, grid) = config.build().unwrap();
        let params = config.monitor_params(&spec, grid).unwrap();
        let trace = crate::integrate::run(
            &spec,
            grid,
            &config.step_control(),
            params.epsilon,
            &SnapshotPolicy::default(),
        )
        .unwrap();
        (config, trace)
    }

    #[test]
    fn trace_csv_round_trips_exactly() {
        let (_, trace) = tiny_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let samples = read_trace_csv(&path).unwrap();
        assert_eq!(samples, trace.samples);
    }

    #[test]
    fn snapshot_csv_round_trips_exactly() {
        let (_, trace) = tiny_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshots.csv");
        write_snapshots_csv(&path, &trace).unwrap();
        let snapshots = read_snapshots_csv(&path).unwrap();
        assert_eq!(snapshots, trace.snapshots);
    }

    #[test]
    fn reload_reconstructs_outcome_and_epsilon() {
        let (config, trace) = tiny_trace();
        let dir = tempfile::tempdir().unwrap();
        write_trace_csv(&dir.path().join("trace.csv"), &trace).unwrap();
        write_snapshots_csv(&dir.path().join("snapshots.csv"), &trace).unwrap();
        let samples = read_trace_csv(&dir.path().join("trace.csv")).unwrap();
        let snapshots = read_snapshots_csv(&dir.path().join("snapshots.csv")).unwrap();
        let reloaded = reload_trace(&config, samples, snapshots).unwrap();
        assert_eq!(reloaded.outcome, trace.outcome);
        assert_eq!(reloaded.j_upper_epsilon, trace.j_upper_epsilon);
        assert_eq!(reloaded.initial_boundary_value, trace.initial_boundary_value);
        assert_eq!(reloaded.monitors.min_slope, trace.monitors.min_slope);
    }

    #[test]
    fn csv_floats_use_lf_and_header() {
        let (_, trace) = tiny_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,M,ut_R,min_ur,min_J2,min_J3,dt\n"));
        assert!(!text.contains('\r'));
    }
}
