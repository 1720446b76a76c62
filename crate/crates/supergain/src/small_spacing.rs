//! Closed-form d -> 0 asymptotics: the DPSS spectra converge to Legendre
//! polynomials P_k(f/d) and the coupling eigenvalues to rho + 1/(2k+1),
//! which turns the supergain sum into explicit Legendre series with separate
//! small-loss and loss-dominated endfire expansions and a broadside sum
//! approaching 2/pi.

use crate::error::{Error, Result};
use crate::numerics::legendre::{legendre, legendre_even_at_zero_sq};
use crate::numerics::sum::NeumaierSum;

/// Validity-window policy for the two endfire expansions: rho N below this
/// counts as "small loss" for the first-order expansion.
pub const SMALL_RHO_N: f64 = 0.1;
/// rho N above this counts as "loss dominated" for the saturation expansion.
pub const LARGE_RHO_N: f64 = 10.0;

/// Which small-spacing expression produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// First-order expansion in rho N (small-loss endfire).
    SmallRhoN,
    /// Saturation expansion in 1/(rho N) (loss-dominated endfire).
    LargeRhoN,
    /// Exact Legendre sum (no expansion).
    ExactSum,
}

/// A small-spacing asymptotic value with its provenance and validity flag.
#[derive(Debug, Clone, Copy)]
pub struct LegendreRegimeResult {
    pub value: f64,
    pub regime: Regime,
    /// False when the requested (N, rho) falls outside the expansion's
    /// validity window; the value is still returned.
    pub within_window: bool,
    /// Order of the error term carried from the expansion.
    pub error_order: &'static str,
}

/// Limiting lossy coupling eigenvalue lambda_k -> rho + 1/(2k+1) as d -> 0.
pub fn legendre_eigenvalue_limit(k: usize, rho: f64) -> f64 {
    rho + 1.0 / (2 * k + 1) as f64
}

/// Exact small-spacing supergain at normalized steering y = f'/d in [-1, 1]:
/// (1/N) sum_k (2k+1)/(2 rho k + 1) P_k(y)^2.
pub fn supergain_smallspacing(n: usize, rho: f64, y: f64) -> Result<f64> {
    if y.abs() > 1.0 {
        return Err(Error::domain(format!(
            "normalized steering must lie in [-1, 1], got {y}"
        )));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain(format!("loss factor must be >= 0, got {rho}")));
    }
    if n == 0 {
        return Err(Error::domain("antenna count must be >= 1"));
    }
    let mut acc = NeumaierSum::new();
    for k in 0..n {
        let p = legendre(k, y);
        acc.add((2 * k + 1) as f64 / (2.0 * rho * k as f64 + 1.0) * p * p);
    }
    Ok(acc.value() / n as f64)
}

/// Small-loss endfire expansion N - (rho/3)(N-1)(4N+1), valid for rho N << 1.
pub fn endfire_smallrho(n: usize, rho: f64) -> LegendreRegimeResult {
    let nf = n as f64;
    LegendreRegimeResult {
        value: nf - rho / 3.0 * (nf - 1.0) * (4.0 * nf + 1.0),
        regime: Regime::SmallRhoN,
        within_window: rho * nf < SMALL_RHO_N,
        error_order: "O(rho N)",
    }
}

/// Loss-dominated endfire expansion 1/rho - (1-rho)/(2 rho^2) ln(N)/N,
/// valid for rho N >> 1.
pub fn endfire_largerho(n: usize, rho: f64) -> LegendreRegimeResult {
    let nf = n as f64;
    LegendreRegimeResult {
        value: 1.0 / rho - (1.0 - rho) / (2.0 * rho * rho) * nf.ln() / nf,
        regime: Regime::LargeRhoN,
        within_window: rho * nf > LARGE_RHO_N,
        error_order: "O(1/N)",
    }
}

/// Broadside small-spacing supergain
/// (1/N) sum_n (4n+1)/(4 rho n + 1) P_{2n}(0)^2, which approaches 2/pi for
/// lossless arrays as N grows.
pub fn broadside_smallspacing(n: usize, rho: f64) -> Result<f64> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::domain(format!("antenna count must be odd, got {n}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain(format!("loss factor must be >= 0, got {rho}")));
    }
    let mut acc = NeumaierSum::new();
    for m in 0..=(n - 1) / 2 {
        let p_sq = legendre_even_at_zero_sq(m);
        acc.add((4 * m + 1) as f64 / (4.0 * rho * m as f64 + 1.0) * p_sq);
    }
    Ok(acc.value() / n as f64)
}
