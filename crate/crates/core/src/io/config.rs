//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments run to end of line
//! lambda = 0.01
//! alpha  = 0+4i
//! n_max  = auto        # converge the basis instead of fixing it
//! ```

use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{check_lambda, MIN_N_MAX};
use crate::propagation::Normalization;
use crate::spectral::DEFAULT_TOL;
use crate::talbot::RevivalThresholds;

/// Every key accepted by [`parse_config`], with its default.
pub const KEYS: &[(&str, &str)] = &[
    ("lambda", "0.01"),
    ("alpha", "0+4i"),
    ("n_max", "128"),
    ("tol", "1e-9"),
    ("spatial_extent", "12"),
    ("spatial_points", "512"),
    ("phase_points", "512"),
    ("t_max", "600"),
    ("dt", "0.05"),
    ("lambda_max", "0.5"),
    ("lambda_steps", "51"),
    ("levels", "12"),
    ("modes", "0,1,2,3"),
    ("normalization", "per-frame"),
    ("collapse_threshold", "0.1"),
    ("revival_threshold", "0.5"),
    ("polar_size", "1024"),
    ("out", "out"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: f64,
    pub alpha: Complex64,
    /// Fixed basis size; `None` converges the spectrum to `tol`.
    pub n_max: Option<usize>,
    pub tol: f64,
    /// Spatial grid covers [−extent, extent].
    pub spatial_extent: f64,
    pub spatial_points: usize,
    pub phase_points: usize,
    pub t_max: f64,
    pub dt: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub levels: usize,
    pub modes: Vec<usize>,
    pub normalization: Normalization,
    pub thresholds: RevivalThresholds,
    pub polar_size: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 0.01,
            alpha: Complex64::new(0.0, 4.0),
            n_max: Some(128),
            tol: DEFAULT_TOL,
            spatial_extent: 12.0,
            spatial_points: 512,
            phase_points: 512,
            t_max: 600.0,
            dt: 0.05,
            lambda_max: 0.5,
            lambda_steps: 51,
            levels: 12,
            modes: vec![0, 1, 2, 3],
            normalization: Normalization::PerFrame,
            thresholds: RevivalThresholds::default(),
            polar_size: 1024,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Sets one field from its textual value. Errors carry only the message;
    /// callers attach the location.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "lambda" => self.lambda = parse_f64(value)?,
            "alpha" => self.alpha = parse_complex(value)?,
            "n_max" => {
                self.n_max = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_usize(value)?)
                }
            }
            "tol" => self.tol = parse_f64(value)?,
            "spatial_extent" => self.spatial_extent = parse_f64(value)?,
            "spatial_points" => self.spatial_points = parse_usize(value)?,
            "phase_points" => self.phase_points = parse_usize(value)?,
            "t_max" => self.t_max = parse_f64(value)?,
            "dt" => self.dt = parse_f64(value)?,
            "lambda_max" => self.lambda_max = parse_f64(value)?,
            "lambda_steps" => self.lambda_steps = parse_usize(value)?,
            "levels" => self.levels = parse_usize(value)?,
            "modes" => {
                self.modes = value
                    .split(',')
                    .map(|s| parse_usize(s.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "normalization" => self.normalization = value.parse()?,
            "collapse_threshold" => self.thresholds.collapse = parse_f64(value)?,
            "revival_threshold" => self.thresholds.revival = parse_f64(value)?,
            "polar_size" => self.polar_size = parse_usize(value)?,
            "out" => {
                if value.is_empty() {
                    return Err("empty path".into());
                }
                self.out = PathBuf::from(value)
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Checks every invariant; the offending key is named in the error.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Parse {
                line: 0,
                key: key.into(),
                message,
            })
        };
        if let Err(e) = check_lambda(self.lambda) {
            return bad("lambda", e.to_string());
        }
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return bad("alpha", "must be finite".into());
        }
        if let Some(n) = self.n_max {
            if n < MIN_N_MAX {
                return bad("n_max", format!("must be at least {MIN_N_MAX}"));
            }
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive".into());
        }
        if !(self.spatial_extent > 0.0 && self.spatial_extent.is_finite()) {
            return bad("spatial_extent", "must be positive".into());
        }
        if self.spatial_points < 2 {
            return bad("spatial_points", "need at least 2 points".into());
        }
        if self.phase_points < 2 {
            return bad("phase_points", "need at least 2 points".into());
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad("t_max", "must be finite and non-negative".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", "must be positive".into());
        }
        if !(self.lambda_max >= 0.0 && self.lambda_max.is_finite()) {
            return bad("lambda_max", "must be finite and non-negative".into());
        }
        if self.lambda_steps < 2 {
            return bad("lambda_steps", "need at least 2 points".into());
        }
        if self.levels == 0 {
            return bad("levels", "must be positive".into());
        }
        let RevivalThresholds { collapse, revival } = self.thresholds;
        if !(collapse > 0.0 && collapse < 1.0) {
            return bad("collapse_threshold", "must lie in (0, 1)".into());
        }
        if !(revival > collapse && revival.is_finite()) {
            return bad("revival_threshold", "must exceed collapse_threshold".into());
        }
        if self.polar_size < 2 {
            return bad("polar_size", "must be at least 2".into());
        }
        Ok(())
    }
}

/// Parses and validates a configuration; blank input yields the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Parse {
                line,
                key: body.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let err = |message: String| Error::Parse {
            line,
            key: key.to_string(),
            message,
        };
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            return Err(err(format!("duplicate key (first set on line {first})")));
        }
        cfg.set(key, value).map_err(err)?;
        seen.push((key.to_string(), line));
        // invariant violations point at the line that caused them
        if let Err(Error::Parse { key: k, message, .. }) = cfg.validate() {
            if k == key {
                return Err(Error::Parse { line, key: k, message });
            }
        }
    }
    cfg.validate().map_err(|e| match e {
        Error::Parse { key, message, .. } => {
            let line = seen.iter().find(|(k, _)| *k == key).map_or(0, |(_, l)| *l);
            Error::Parse { line, key, message }
        }
        other => other,
    })?;
    Ok(cfg)
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

/// Accepts `a`, `bi`, `a+bi`, `a-bi` (also with `j`), e.g. `0+4i`, `-1.5e-2i`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let err = || format!("`{s}` is not a complex number (expected e.g. 0+4i)");
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(err());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return parse_f64(&t).map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |p: &str| match p {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        p => parse_f64(p).map_err(|_| err()),
    };
    let (re, im) = match split {
        Some(k) => (parse_f64(&body[..k]).map_err(|_| err())?, imag(&body[k..])?),
        None => (0.0, imag(body)?),
    };
    Ok(Complex64::new(re, im))
}
