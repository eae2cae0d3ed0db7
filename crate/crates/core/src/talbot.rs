//! Talbot lengths and collapse/revival detection on ⟨x(t)⟩.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::dispersive::DispersiveCoefficients;
use crate::error::{Error, Result};
use crate::propagation::ObservableSeries;

/// Default collapse threshold, as a fraction of the initial amplitude.
pub const DEFAULT_COLLAPSE_THRESHOLD: f64 = 0.1;
/// Default revival threshold, as a fraction of the initial amplitude.
pub const DEFAULT_REVIVAL_THRESHOLD: f64 = 0.5;
/// Minimum samples per fast oscillation period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;

/// T = 2πm/a₂.
pub fn talbot_length(a2: f64, m: u32) -> Result<f64> {
    if !(a2 > 0.0) || !a2.is_finite() {
        return Err(Error::Domain(format!(
            "a2 = {a2}: the harmonic limit has no finite Talbot length"
        )));
    }
    if m == 0 {
        return Err(Error::Domain("Talbot order m must be positive".into()));
    }
    Ok(2.0 * PI * m as f64 / a2)
}

/// Piecewise-linear envelope through the local maxima of |series|, held
/// constant before the first and after the last maximum.
///
/// `fast_frequency` is the angular frequency of the carrier oscillation (a₁);
/// the series must resolve it with at least 20 samples per period.
pub fn envelope(series: &ObservableSeries, fast_frequency: f64) -> Result<ObservableSeries> {
    let t = &series.t_grid;
    if t.len() >= 2 {
        let max_step = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let limit = 2.0 * PI / (MIN_SAMPLES_PER_PERIOD * fast_frequency.abs());
        if max_step > limit {
            return Err(Error::Config(format!(
                "sampling step {max_step} is coarser than {limit} (20 samples per carrier period)"
            )));
        }
    }
    let knots = envelope_knots(&series.values);
    let abs: Vec<f64> = series.values.iter().map(|v| v.abs()).collect();
    let values = match knots.len() {
        // nothing oscillates: the envelope is the magnitude itself
        0 => abs,
        _ => {
            let mut out = Vec::with_capacity(t.len());
            let mut seg = 0;
            for (i, &ti) in t.iter().enumerate() {
                if i <= knots[0] {
                    out.push(abs[knots[0]]);
                    continue;
                }
                while seg + 1 < knots.len() && knots[seg + 1] < i {
                    seg += 1;
                }
                if seg + 1 >= knots.len() {
                    out.push(abs[*knots.last().unwrap()]);
                    continue;
                }
                let (k0, k1) = (knots[seg], knots[seg + 1]);
                if i == k1 {
                    out.push(abs[k1]);
                    continue;
                }
                let w = (ti - t[k0]) / (t[k1] - t[k0]);
                out.push(abs[k0] + w * (abs[k1] - abs[k0]));
            }
            out
        }
    };
    ObservableSeries::new(t.clone(), values)
}

/// Indices of local maxima of |v| (rising-or-flat on the left, strictly
/// falling on the right).
fn envelope_knots(values: &[f64]) -> Vec<usize> {
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    (1..abs.len().saturating_sub(1))
        .filter(|&i| abs[i] > 0.0 && abs[i] >= abs[i - 1] && abs[i] > abs[i + 1])
        .collect()
}

/// Conditions the detector reports instead of failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// The envelope never fell below the collapse threshold.
    NoCollapse,
    /// A collapse was found but no later revival crossed the threshold.
    NoRevival,
    /// The series is shorter than 1.5 predicted revival periods.
    ShortSpan,
    /// The series has no oscillation to measure.
    NoOscillation,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Diagnostic::NoCollapse => "no-collapse",
            Diagnostic::NoRevival => "no-revival",
            Diagnostic::ShortSpan => "short-span",
            Diagnostic::NoOscillation => "no-oscillation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalThresholds {
    pub collapse: f64,
    pub revival: f64,
}

impl Default for RevivalThresholds {
    fn default() -> Self {
        RevivalThresholds {
            collapse: DEFAULT_COLLAPSE_THRESHOLD,
            revival: DEFAULT_REVIVAL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalReport {
    /// Initial oscillation amplitude of ⟨x(t)⟩.
    pub amplitude0: f64,
    /// First maximal interval with envelope below the collapse threshold.
    pub collapse_window: Option<(f64, f64)>,
    /// Envelope peak times of the revivals, ascending.
    pub revival_times: Vec<f64>,
    /// Peak envelope over `amplitude0` for each revival.
    pub revival_fidelities: Vec<f64>,
    /// 2π/a₂ from the dispersive model.
    pub predicted_t_rev: Option<f64>,
    pub thresholds: RevivalThresholds,
    pub diagnostics: Vec<Diagnostic>,
}

impl RevivalReport {
    pub fn first_revival(&self) -> Option<f64> {
        self.revival_times.first().copied()
    }

    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
        let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "amplitude0 = {}", fmt_f64(self.amplitude0));
        match self.collapse_window {
            Some((a, b)) => {
                let _ = writeln!(s, "collapse_start = {}", fmt_f64(a));
                let _ = writeln!(s, "collapse_end = {}", fmt_f64(b));
            }
            None => {
                let _ = writeln!(s, "collapse_start = none");
                let _ = writeln!(s, "collapse_end = none");
            }
        }
        let _ = writeln!(s, "revival_times = {}", list(&self.revival_times));
        let _ = writeln!(s, "revival_fidelities = {}", list(&self.revival_fidelities));
        let _ = writeln!(s, "first_revival = {}", fmt_opt(self.first_revival()));
        let _ = writeln!(s, "predicted_t_rev = {}", fmt_opt(self.predicted_t_rev));
        let _ = writeln!(s, "collapse_threshold = {}", fmt_f64(self.thresholds.collapse));
        let _ = writeln!(s, "revival_threshold = {}", fmt_f64(self.thresholds.revival));
        let diags: Vec<String> = self.diagnostics.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "diagnostics = {}", diags.join(","));
        s
    }

    /// Rows of (event, t, value) for CSV output.
    pub fn csv_rows(&self) -> Vec<(String, f64, f64)> {
        let mut rows = vec![("amplitude0".to_string(), 0.0, self.amplitude0)];
        if let Some((a, b)) = self.collapse_window {
            rows.push(("collapse_start".into(), a, 0.0));
            rows.push(("collapse_end".into(), b, 0.0));
        }
        for (t, f) in self.revival_times.iter().zip(&self.revival_fidelities) {
            rows.push(("revival".into(), *t, *f));
        }
        if let Some(p) = self.predicted_t_rev {
            rows.push(("predicted_t_rev".into(), p, 0.0));
        }
        rows
    }
}

/// Shortest round-trip decimal for report values.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Finds the first collapse of the ⟨x(t)⟩ envelope and the revivals that
/// follow it.
///
/// The initial amplitude is the larger of the first two envelope knots. A
/// revival is a maximal run with envelope ≥ `revival · amplitude0` starting
/// after the collapse began; its time is the envelope peak within the run.
pub fn detect_revival(
    series: &ObservableSeries,
    coeffs: &DispersiveCoefficients,
    thresholds: RevivalThresholds,
) -> Result<RevivalReport> {
    if !(thresholds.collapse > 0.0 && thresholds.collapse < thresholds.revival) {
        return Err(Error::Config(format!(
            "thresholds must satisfy 0 < collapse < revival (got {} and {})",
            thresholds.collapse, thresholds.revival
        )));
    }
    let env = envelope(series, coeffs.a1)?;
    let predicted_t_rev = coeffs.revival_period();
    let mut report = RevivalReport {
        amplitude0: 0.0,
        collapse_window: None,
        revival_times: Vec::new(),
        revival_fidelities: Vec::new(),
        predicted_t_rev,
        thresholds,
        diagnostics: Vec::new(),
    };
    let t = &series.t_grid;
    if let (Some(p), Some(first), Some(last)) = (predicted_t_rev, t.first(), t.last()) {
        if last - first < 1.5 * p {
            report.diagnostics.push(Diagnostic::ShortSpan);
        }
    }

    let knots = envelope_knots(&series.values);
    report.amplitude0 = knots
        .iter()
        .take(2)
        .map(|&k| series.values[k].abs())
        .fold(0.0, f64::max);
    if report.amplitude0 == 0.0 {
        report.diagnostics.push(Diagnostic::NoOscillation);
        return Ok(report);
    }
    let low = thresholds.collapse * report.amplitude0;
    let high = thresholds.revival * report.amplitude0;
    let e = &env.values;

    let Some(start) = e.iter().position(|&v| v < low) else {
        report.diagnostics.push(Diagnostic::NoCollapse);
        return Ok(report);
    };
    let end = e[start..].iter().position(|&v| v >= low).map_or(e.len(), |k| start + k);
    report.collapse_window = Some((t[start], t[end - 1]));

    let mut i = end;
    while i < e.len() {
        if e[i] < high {
            i += 1;
            continue;
        }
        let run_end = e[i..].iter().position(|&v| v < high).map_or(e.len(), |k| i + k);
        let mut peak = i;
        for j in i..run_end {
            if e[j] > e[peak] {
                peak = j;
            }
        }
        report.revival_times.push(t[peak]);
        report.revival_fidelities.push(e[peak] / report.amplitude0);
        i = run_end;
    }
    if report.revival_times.is_empty() {
        report.diagnostics.push(Diagnostic::NoRevival);
    }
    Ok(report)
}

/// Least-squares fit of T(λ) = c/λ in relative error. Returns `c` and the
/// largest relative residual |c/(λT) − 1|.
pub fn fit_inverse_lambda(lambdas: &[f64], times: &[f64]) -> Result<(f64, f64)> {
    if lambdas.len() != times.len() || lambdas.is_empty() {
        return Err(Error::Config("need equal, non-empty lambda and time lists".into()));
    }
    if lambdas.iter().chain(times).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("lambdas and times must be positive".into()));
    }
    let u: Vec<f64> = lambdas.iter().zip(times).map(|(l, t)| 1.0 / (l * t)).collect();
    let c = u.iter().sum::<f64>() / u.iter().map(|x| x * x).sum::<f64>();
    let worst = u.iter().map(|x| (c * x - 1.0).abs()).fold(0.0, f64::max);
    Ok((c, worst))
}
