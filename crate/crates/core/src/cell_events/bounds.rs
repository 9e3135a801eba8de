//! Closed-form probability bounds and the hypothesis check for the
//! existence of Lipschitz surfaces. The constants are only known to exist,
//! so they are plain inputs here.

use crate::error::{param, Result};

/// Inputs to the bound evaluators. Constants default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub rho: f64,
    pub lambda: f64,
    pub ell: f64,
    pub beta: f64,
    pub eta_overlap: f64,
    pub d: u32,
    pub c1: f64,
    pub c2: f64,
    pub c_acc: f64,
    pub c_good: f64,
    pub alpha0: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        BoundInputs {
            rho: 1.0,
            lambda: 0.0,
            ell: 8.0,
            beta: 1.0,
            eta_overlap: 1.0,
            d: 1,
            c1: 1.0,
            c2: 1.0,
            c_acc: 1.0,
            c_good: 1.0,
            alpha0: 1.0,
        }
    }
}

/// Probability that a space-time point has a jumper in each of the `2d`
/// directions and at least two stayers during the next unit of time:
/// `(1 - e^{-a} - a e^{-a}) (1 - e^{-b})^{2d}` with `a = ρ/e`, `b = (1 - 1/e) ρ / (2d)`.
pub fn good_point_probability(rho: f64, d: u32) -> f64 {
    let a = rho * (-1.0f64).exp();
    let b = (1.0 - (-1.0f64).exp()) / (2.0 * d as f64) * rho;
    let stay = -(-a).exp_m1() - a * (-a).exp();
    // -expm1(-b) = 1 - e^{-b} without cancellation for small b.
    stay * (-(-b).exp_m1()).powi(2 * d as i32)
}

/// Acceptable-cell lower bound `1 - exp(-c_acc ρ e^{-λβ} ℓ^{1/3})`.
pub fn bound_acceptable(inp: &BoundInputs) -> f64 {
    let decay = (-inp.lambda * inp.beta).exp();
    1.0 - (-inp.c_acc * inp.rho * decay * inp.ell.cbrt()).exp()
}

/// Good-cell lower bound
/// `1 - 5 ℓ^{2d} (β+d+1) exp(-c_good min{1,ρ,λ} e^{-λβ} ℓ^{1/6}) - 2 exp(-min{λ,1} β)`.
/// Can be negative for small `ℓ`; returned as is.
pub fn bound_good(inp: &BoundInputs) -> f64 {
    let d = inp.d as f64;
    let m = 1f64.min(inp.rho).min(inp.lambda);
    let decay = (-inp.lambda * inp.beta).exp();
    let front = 5.0 * inp.ell.powf(2.0 * d) * (inp.beta + d + 1.0);
    1.0 - front * (-inp.c_good * m * decay * inp.ell.powf(1.0 / 6.0)).exp()
        - 2.0 * (-inp.lambda.min(1.0) * inp.beta).exp()
}

/// Union bound on the probability that some point of a super cell is not good:
/// `((2η+1)ℓ)^d ηβ (1 - P[good point])`.
pub fn bound_e_tilde_complement(inp: &BoundInputs) -> f64 {
    let side = (2.0 * inp.eta_overlap + 1.0) * inp.ell;
    side.powi(inp.d as i32) * inp.eta_overlap * inp.beta * (1.0 - good_point_probability(inp.rho, inp.d))
}

/// Smallest admissible `ω`: `sqrt(ηβ / (c2 ℓ²) · log(8 c1 / ε))`, or 0 when the
/// logarithm is negative.
pub fn omega_lower_bound(eta_overlap: f64, beta: f64, ell: f64, epsilon: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return param(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if !(eta_overlap > 0.0 && beta > 0.0 && ell > 0.0 && c1 > 0.0 && c2 > 0.0) {
        return param("omega bound inputs must be positive");
    }
    let arg = eta_overlap * beta / (c2 * ell * ell) * (8.0 * c1 / epsilon).ln();
    Ok(arg.max(0.0).sqrt())
}

/// The two quantities compared against `α₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCheck {
    pub density_term: f64,
    pub event_term: f64,
    pub passes: bool,
}

/// `min{ε ρ ℓ^d, log(1/(1 - ν̂))} >= α₀`, with `ν̂ = 1` giving `+∞`.
pub fn check_hypotheses(epsilon: f64, rho: f64, ell: f64, d: u32, nu_hat: f64, alpha0: f64) -> Result<HypothesisCheck> {
    if !(0.0..=1.0).contains(&nu_hat) {
        return param(format!("event probability must lie in [0, 1], got {nu_hat}"));
    }
    let density_term = epsilon * rho * ell.powi(d as i32);
    let event_term = if nu_hat >= 1.0 {
        f64::INFINITY
    } else {
        -(-nu_hat).ln_1p()
    };
    Ok(HypothesisCheck {
        density_term,
        event_term,
        passes: density_term.min(event_term) >= alpha0,
    })
}
