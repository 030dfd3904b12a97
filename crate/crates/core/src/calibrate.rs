//! Threshold calibration from the asymptotic false-alarm bound
//!
//! `E_∞[τ] ≳ e^λ / (M √λ C)`, with `C = ∫₀^∞ x g(x)² dx / √π` and
//! `g(x) = 2x⁻² exp[−2 Σ_{n≥1} n⁻¹ Φ(−x√n/2)]`.
//!
//! `g` is bounded near zero (it tends to 1) and equals `2/x²` to double
//! precision once `x ≳ 20`, where every `Φ` term underflows relative to 1.
//! The integral is split accordingly:
//!
//! - `(0, x_lo]`: `g²` is fitted linearly through `x_lo` and `2·x_lo` and
//!   integrated in closed form; the gap to a constant fit is reported as error.
//! - `[x_lo, x_hi]`: composite Simpson in `u = ln x`, halving the step until
//!   successive estimates agree.
//! - `[x_hi, ∞)`: `∫ 4/x³ dx = 2/x_hi²`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series terms below this size end the `g` summation.
pub const SERIES_TOLERANCE: f64 = 1e-12;
/// Hard cap on `g` series terms.
pub const DEFAULT_TERM_CAP: u64 = 10_000_000;
pub const X_LO: f64 = 1e-2;
pub const X_HI: f64 = 30.0;

const MIN_LEVEL_PANELS: usize = 64;
const MAX_LEVEL_PANELS: usize = 1 << 15;
const CONVERGED_REL_CHANGE: f64 = 1e-10;
const FAILED_REL_CHANGE: f64 = 1e-4;

/// Standard normal lower tail `Φ(−z)`.
#[inline]
fn normal_lower_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// `g(x)` with the default term cap.
pub fn g_function(x: f64) -> Result<f64> {
    g_function_with_cap(x, DEFAULT_TERM_CAP)
}

pub fn g_function_with_cap(x: f64, term_cap: u64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("g(x) needs finite x > 0, got {x}")));
    }
    let mut series = 0.0;
    for n in 1..=term_cap {
        let nf = n as f64;
        let term = normal_lower_tail(0.5 * x * nf.sqrt()) / nf;
        series += term;
        if term < SERIES_TOLERANCE {
            break;
        }
    }
    Ok(2.0 / (x * x) * (-2.0 * series).exp())
}

/// Breakdown of one evaluation of `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CConstant {
    pub value: f64,
    pub error_estimate: f64,
    /// Estimates of `C` after each step halving, coarsest first.
    pub refinements: Vec<f64>,
    pub panels: usize,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// Evaluate `C` with explicit integration limits.
pub fn c_constant_with_limits(x_lo: f64, x_hi: f64) -> Result<CConstant> {
    if !(x_lo > 0.0 && x_hi > x_lo && x_hi.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < x_lo < x_hi < inf, got [{x_lo}, {x_hi}]"
        )));
    }
    let (u_lo, u_hi) = (x_lo.ln(), x_hi.ln());
    // dx = x du, so x g(x)² dx = x² g(x)² du.
    let integrand = |u: f64| -> Result<f64> {
        let x = u.exp();
        let g = g_function(x)?;
        Ok(x * x * g * g)
    };

    let g1 = g_function(x_lo)?.powi(2);
    let g2 = g_function(2.0 * x_lo)?.powi(2);
    let slope = (g2 - g1) / x_lo;
    let intercept = g1 - slope * x_lo;
    let lower_linear = intercept * x_lo * x_lo / 2.0 + slope * x_lo.powi(3) / 3.0;
    let lower_constant = g1 * x_lo * x_lo / 2.0;
    let lower_uncertainty = (lower_linear - lower_constant).abs();
    let upper_tail = 2.0 / (x_hi * x_hi);
    let scale = PI.sqrt();

    // Simpson bookkeeping: endpoint sum, sum at even interior nodes, sum at odd nodes.
    let mut panels = MIN_LEVEL_PANELS;
    let ends = integrand(u_lo)? + integrand(u_hi)?;
    let mut even = 0.0;
    let mut odd = 0.0;
    let h0 = (u_hi - u_lo) / panels as f64;
    for i in 1..panels {
        let v = integrand(u_lo + i as f64 * h0)?;
        if i % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    let simpson = |h: f64, even: f64, odd: f64| h / 3.0 * (ends + 2.0 * even + 4.0 * odd);
    let to_c = |body: f64| (lower_linear + body + upper_tail) / scale;

    let mut refinements = vec![to_c(simpson(h0, even, odd))];
    loop {
        if panels >= MAX_LEVEL_PANELS {
            let k = refinements.len();
            let rel = ((refinements[k - 1] - refinements[k - 2]) / refinements[k - 1]).abs();
            if rel > FAILED_REL_CHANGE {
                return Err(Error::Numerical(format!(
                    "C quadrature did not converge: relative change {rel:e} at {panels} panels"
                )));
            }
            break;
        }
        // Old nodes all become even nodes; new midpoints are the odd ones.
        even += odd;
        panels *= 2;
        let h = (u_hi - u_lo) / panels as f64;
        odd = 0.0;
        for i in (1..panels).step_by(2) {
            odd += integrand(u_lo + i as f64 * h)?;
        }
        let estimate = to_c(simpson(h, even, odd));
        let prev = *refinements.last().expect("at least one level");
        refinements.push(estimate);
        if ((estimate - prev) / estimate).abs() < CONVERGED_REL_CHANGE {
            break;
        }
    }

    let k = refinements.len();
    let value = refinements[k - 1];
    let richardson = (refinements[k - 1] - refinements[k - 2]).abs() / 15.0;
    Ok(CConstant {
        value,
        error_estimate: richardson + lower_uncertainty / scale,
        refinements,
        panels,
        x_lo,
        x_hi,
    })
}

static C_CONSTANT: OnceLock<Result<CConstant>> = OnceLock::new();

/// `C` and its error estimate at the default limits, computed once per process.
pub fn compute_c_constant() -> Result<(f64, f64)> {
    c_constant_details().map(|c| (c.value, c.error_estimate))
}

/// Cached full breakdown behind [`compute_c_constant`].
pub fn c_constant_details() -> Result<&'static CConstant> {
    C_CONSTANT
        .get_or_init(|| c_constant_with_limits(X_LO, X_HI))
        .as_ref()
        .map_err(Clone::clone)
}

/// Asymptotic ARL lower bound `e^λ / (M √λ C)`.
pub fn arl_lower_bound(lambda: f64, n_streams: usize, c: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    if n_streams == 0 || c.is_nan() || c <= 0.0 {
        return Err(Error::Domain("need M ≥ 1 and C > 0".into()));
    }
    let log_bound = lambda - (n_streams as f64).ln() - 0.5 * lambda.ln() - c.ln();
    let bound = log_bound.exp();
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(Error::Range(format!(
            "ARL bound overflows for λ = {lambda}"
        )))
    }
}

/// Threshold `λ = log(C·M·γ)` targeting an ARL of at least `γ`.
///
/// The `½ log λ` correction of the bound is not included. Fails when the
/// logarithm's argument is not positive or the resulting λ is not positive.
pub fn calibrate_threshold(gamma: f64, n_streams: usize, c: f64) -> Result<f64> {
    let arg = c * n_streams as f64 * gamma;
    if !arg.is_finite() || arg <= 0.0 {
        return Err(Error::Domain(format!(
            "log argument C·M·γ must be positive and finite, got {arg}"
        )));
    }
    let lambda = arg.ln();
    if lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "γ = {gamma} gives non-positive threshold {lambda}; need γ > 1/(C·M)"
        )));
    }
    Ok(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c_constant: f64,
    pub threshold: f64,
    pub target_arl: f64,
    pub n_streams: usize,
    pub quadrature_error_estimate: f64,
}

impl CalibrationResult {
    /// Threshold for target ARL `γ` on `M` streams using the cached `C`.
    pub fn for_target(target_arl: f64, n_streams: usize) -> Result<Self> {
        let (c, err) = compute_c_constant()?;
        Ok(Self {
            c_constant: c,
            threshold: calibrate_threshold(target_arl, n_streams, c)?,
            target_arl,
            n_streams,
            quadrature_error_estimate: err,
        })
    }
}
