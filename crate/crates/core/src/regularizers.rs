//! Strongly convex, permutation-invariant regularizers on the simplex and solvers for the
//! FTRL subproblem argmax_x ⟨x, U⟩ − R(x)/η.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::games::NormFamily;

/// Coordinate floor of the truncated simplex on which the log regularizer's range is measured.
pub const LOG_FLOOR: f64 = 1e-9;
/// Required simplex-sum residual of the bisection solvers.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RegularizerSpec {
    /// Σ x log x; FTRL is multiplicative weights.
    #[default]
    Entropy,
    /// ½‖x‖²; FTRL is projected cumulative gradient.
    Euclidean,
    /// −Σ log x.
    Log,
    /// −(1/(q(1−q))) Σ x^q with q ∈ (0, 1).
    Tsallis { q: f64 },
}

impl RegularizerSpec {
    pub fn tsallis(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(RegularizerSpec::Tsallis { q })
        } else {
            Err(Error::InvalidArgument(format!("tsallis q must lie in (0, 1), got {q}")))
        }
    }

    /// Norm w.r.t. which the regularizer is 1-strongly convex on the simplex.
    pub fn norm(&self) -> NormFamily {
        match self {
            RegularizerSpec::Euclidean => NormFamily::L2,
            _ => NormFamily::L1,
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        reg_value(self, x)
    }

    pub fn range(&self, m: usize) -> f64 {
        reg_range(self, m)
    }
}

impl fmt::Display for RegularizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizerSpec::Entropy => write!(f, "entropy"),
            RegularizerSpec::Euclidean => write!(f, "euclidean"),
            RegularizerSpec::Log => write!(f, "log"),
            RegularizerSpec::Tsallis { q } => write!(f, "tsallis:q={q}"),
        }
    }
}

impl FromStr for RegularizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "entropy" => return Ok(RegularizerSpec::Entropy),
            "euclidean" => return Ok(RegularizerSpec::Euclidean),
            "log" => return Ok(RegularizerSpec::Log),
            _ => {}
        }
        let q = t
            .strip_prefix("tsallis:q=")
            .ok_or_else(|| Error::Config(format!("unknown regularizer {s:?}")))?
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad tsallis parameter in {s:?}")))?;
        RegularizerSpec::tsallis(q).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Serialize for RegularizerSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RegularizerSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub fn reg_value(spec: &RegularizerSpec, x: &[f64]) -> Result<f64> {
    Ok(match *spec {
        RegularizerSpec::Entropy => x.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum(),
        RegularizerSpec::Euclidean => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
        RegularizerSpec::Log => {
            if x.iter().any(|&v| v <= 0.0) {
                return Err(Error::Domain("log regularizer is undefined on the simplex boundary".into()));
            }
            -x.iter().map(|v| v.ln()).sum::<f64>()
        }
        RegularizerSpec::Tsallis { q } => -x.iter().map(|v| v.powf(q)).sum::<f64>() / (q * (1.0 - q)),
    })
}

pub fn reg_gradient(spec: &RegularizerSpec, x: &[f64]) -> Result<Vec<f64>> {
    if !matches!(spec, RegularizerSpec::Euclidean) && x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain(format!("{spec} gradient is unbounded on the simplex boundary")));
    }
    Ok(x.iter()
        .map(|&v| match *spec {
            RegularizerSpec::Entropy => 1.0 + v.ln(),
            RegularizerSpec::Euclidean => v,
            RegularizerSpec::Log => -1.0 / v,
            RegularizerSpec::Tsallis { q } => -v.powf(q - 1.0) / (1.0 - q),
        })
        .collect())
}

/// max − min of the regularizer over the simplex (truncated simplex for `Log`).
pub fn reg_range(spec: &RegularizerSpec, m: usize) -> f64 {
    let mf = m as f64;
    match *spec {
        RegularizerSpec::Entropy => mf.ln(),
        RegularizerSpec::Euclidean => 0.5 * (1.0 - 1.0 / mf),
        RegularizerSpec::Log => {
            let k = mf - 1.0;
            let top = -k * LOG_FLOOR.ln() - (1.0 - k * LOG_FLOOR).ln();
            top - mf * mf.ln()
        }
        RegularizerSpec::Tsallis { q } => (mf.powf(1.0 - q) - 1.0) / (q * (1.0 - q)),
    }
}

/// FTRL objective ⟨x, U⟩ − R(x)/η.
pub fn ftrl_objective(spec: &RegularizerSpec, cumulative: &[f64], eta: f64, x: &[f64]) -> Result<f64> {
    let lin: f64 = x.iter().zip(cumulative).map(|(a, b)| a * b).sum();
    Ok(lin - reg_value(spec, x)? / eta)
}

pub fn ftrl_argmax(spec: &RegularizerSpec, cumulative: &[f64], eta: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cumulative.len()];
    ftrl_argmax_into(spec, cumulative, eta, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`ftrl_argmax`]; all solvers work on gaps max U − U[a] to stay
/// accurate when cumulative utilities are large.
pub fn ftrl_argmax_into(spec: &RegularizerSpec, cumulative: &[f64], eta: f64, out: &mut [f64]) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("learning rate must be positive and finite, got {eta}")));
    }
    if cumulative.is_empty() || cumulative.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("cumulative utilities must be finite and non-empty".into()));
    }
    let umax = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = cumulative.len();
    match *spec {
        RegularizerSpec::Entropy => {
            let mut z = 0.0;
            for (o, &u) in out.iter_mut().zip(cumulative) {
                *o = (-eta * (umax - u)).exp();
                z += *o;
            }
            out.iter_mut().for_each(|o| *o /= z);
        }
        RegularizerSpec::Euclidean => {
            for (o, &u) in out.iter_mut().zip(cumulative) {
                *o = -eta * (umax - u);
            }
            project_in_place(out);
        }
        RegularizerSpec::Log => {
            // x[a] = 1/(s + η·gap[a]); the largest coordinate lies in [1/m, 1] ⇔ s ∈ [1, m].
            bisect(cumulative, umax, eta, 1.0, m as f64, out, |s, eg| 1.0 / (s + eg))?;
        }
        RegularizerSpec::Tsallis { q } => {
            // x[a] = (c + (1−q)·η·gap[a])^(−1/(1−q)) with c ∈ [1, m^(1−q)].
            let p = -1.0 / (1.0 - q);
            let hi = (m as f64).powf(1.0 - q);
            bisect(cumulative, umax, eta, 1.0, hi, out, |c, eg| (c + (1.0 - q) * eg).powf(p))?;
        }
    }
    Ok(())
}

/// Solves Σ_a f(s, η·gap[a]) = 1 for s in [lo, hi], f decreasing in s, then renormalizes.
fn bisect(
    cumulative: &[f64],
    umax: f64,
    eta: f64,
    mut lo: f64,
    mut hi: f64,
    out: &mut [f64],
    f: impl Fn(f64, f64) -> f64,
) -> Result<()> {
    let fill = |s: f64, out: &mut [f64]| -> f64 {
        let mut total = 0.0;
        for (o, &u) in out.iter_mut().zip(cumulative) {
            *o = f(s, eta * (umax - u));
            total += *o;
        }
        total - 1.0
    };
    let mut residual = fill(lo, out);
    let mut iterations = 0;
    while residual.abs() > BISECTION_TOL && iterations < BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        residual = fill(mid, out);
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    if residual.abs() > BISECTION_TOL {
        residual = fill(lo, out);
        if residual.abs() > BISECTION_TOL.sqrt() || !residual.is_finite() {
            return Err(Error::NonConvergent { iterations, residual });
        }
    }
    let total = residual + 1.0;
    out.iter_mut().for_each(|o| *o /= total);
    Ok(())
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn simplex_project(y: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    project_in_place(&mut out);
    out
}

fn project_in_place(v: &mut [f64]) {
    // Translation invariance: shift so the largest entry is 0 before thresholding.
    let vmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.iter_mut().for_each(|x| *x -= vmax);
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (j + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
        total += *x;
    }
    if total != 1.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
}
