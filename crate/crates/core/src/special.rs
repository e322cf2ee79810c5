//! Special functions and the operator's dimensional constants.
//!
//! Everything here is implemented in-house (Lanczos approximation for Γ,
//! recurrence plus asymptotic series for ψ) so the crate carries no numerical
//! dependencies. Target accuracy is 1e-12 relative on the range the operator
//! uses, x in [0.5, 10].

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Euler–Mascheroni constant γ = -Γ'(1).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) = π / (sin(πx) Γ(1-x))
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// Digamma function ψ(x) = Γ'(x)/Γ(x) for x > 0.
///
/// Uses the recurrence ψ(x) = ψ(x+1) - 1/x to push the argument above 10,
/// then the asymptotic series in 1/x².
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut t = x;
    while t < 10.0 {
        shift -= 1.0 / t;
        t += 1.0;
    }
    let inv2 = 1.0 / (t * t);
    // ψ(t) ~ ln t - 1/(2t) - Σ B_{2k}/(2k t^{2k})
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    Ok(shift + t.ln() - 0.5 / t - series)
}

/// Surface measure of the unit sphere S^{n-1} in dimension n.
pub fn unit_sphere_measure(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("sphere measure needs n >= 1".into()));
    }
    // |S^{n-1}| = 2 π^{n/2} / Γ(n/2); for n = 1 this gives 2 (two points).
    Ok(2.0 * PI.powf(n as f64 / 2.0) / gamma_fn(n as f64 / 2.0)?)
}

/// Dimension-indexed constants of the operator.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Constants {
    /// Spatial dimension n >= 1.
    pub n: usize,
    /// Kernel normalization C_n = π^{-n/2} Γ(n/2) = 2/|S^{n-1}|.
    pub c_n: f64,
    /// Zero-order coefficient ρ_n = 2 ln 2 + ψ(n/2) - γ.
    pub rho_n: f64,
    /// Euler–Mascheroni constant.
    pub gamma_euler: f64,
    /// ψ(n/2).
    pub psi_half_n: f64,
}

/// Build the constants bundle for dimension n.
///
/// ρ_1 = -2γ is negative and reported verbatim; callers that require
/// ρ_n > 0 (the ball maximum principle, the eigenproblem) gate on it
/// themselves.
pub fn constants_for(n: usize) -> Result<Constants> {
    if n == 0 {
        return Err(Error::Domain("constants_for requires n >= 1".into()));
    }
    let half = n as f64 / 2.0;
    let psi_half_n = digamma(half)?;
    let c_n = PI.powf(-half) * gamma_fn(half)?;
    let rho_n = 2.0 * std::f64::consts::LN_2 + psi_half_n - EULER_GAMMA;
    Ok(Constants {
        n,
        c_n,
        rho_n,
        gamma_euler: EULER_GAMMA,
        psi_half_n,
    })
}
