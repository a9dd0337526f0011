//! Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt` and
//! `S(x) = ∫₀ˣ sin(πt²/2) dt`.
//!
//! Three regimes keep the absolute error far below 1e−9 over the whole real
//! line: a power series near the origin, composite Gauss–Legendre panels on
//! the oscillatory mid-range, and the optimally truncated asymptotic
//! auxiliary series for large argument (first omitted term ≲ 4e−14 at the
//! switch point).

use std::f64::consts::{FRAC_PI_2, PI};

/// Upper edge of the power-series regime.
const SERIES_EDGE: f64 = 1.6;
/// Lower edge of the asymptotic regime.
const ASYMPTOTIC_EDGE: f64 = 4.5;

/// Both Fresnel integrals at `x`: `(C(x), S(x))`. Odd in `x`.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= SERIES_EDGE {
        fresnel_series(ax)
    } else if ax < ASYMPTOTIC_EDGE {
        fresnel_panels(ax)
    } else {
        fresnel_asymptotic(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Cosine Fresnel integral `C(x)`.
pub fn fresnel_c(x: f64) -> f64 {
    fresnel(x).0
}

/// Sine Fresnel integral `S(x)`.
pub fn fresnel_s(x: f64) -> f64 {
    fresnel(x).1
}

/// Power series about 0:
/// `C(x) = Σ (−1)^k (π/2)^{2k} x^{4k+1} / ((2k)!·(4k+1))`,
/// `S(x) = Σ (−1)^k (π/2)^{2k+1} x^{4k+3} / ((2k+1)!·(4k+3))`.
fn fresnel_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let w = FRAC_PI_2 * x2; // (π/2)·x²
    // C: term_k = (−1)^k w^{2k}/(2k)! · x/(4k+1)
    let mut c = 0.0;
    let mut coef = 1.0; // w^{2k}/(2k)!
    for k in 0..40 {
        let term = coef * x / (4 * k + 1) as f64;
        c += term;
        if term.abs() < 1e-18 {
            break;
        }
        coef *= -w * w / (((2 * k + 1) * (2 * k + 2)) as f64);
    }
    // S: term_k = (−1)^k w^{2k+1}/(2k+1)! · x/(4k+3)
    let mut s = 0.0;
    let mut coef = w; // w^{2k+1}/(2k+1)!
    for k in 0..40 {
        let term = coef * x / (4 * k + 3) as f64;
        s += term;
        if term.abs() < 1e-18 {
            break;
        }
        coef *= -w * w / (((2 * k + 2) * (2 * k + 3)) as f64);
    }
    (c, s)
}

/// Mid-range: series anchor at the regime edge plus composite 20-point
/// Gauss–Legendre panels on the remaining oscillatory stretch, one panel
/// per π of phase.
fn fresnel_panels(x: f64) -> (f64, f64) {
    let (c0, s0) = fresnel_series(SERIES_EDGE);
    let span = FRAC_PI_2 * (x * x - SERIES_EDGE * SERIES_EDGE);
    let panels = (span / PI).ceil() as usize + 1;
    let c = crate::math::integrate_gl(|t| (FRAC_PI_2 * t * t).cos(), SERIES_EDGE, x, panels);
    let s = crate::math::integrate_gl(|t| (FRAC_PI_2 * t * t).sin(), SERIES_EDGE, x, panels);
    (c0 + c, s0 + s)
}

/// Large argument: `C(x) = 1/2 + f(x)·sin(πx²/2) − g(x)·cos(πx²/2)`,
/// `S(x) = 1/2 − f(x)·cos(πx²/2) − g(x)·sin(πx²/2)` with the auxiliary
/// asymptotic series for `f`, `g`, truncated at the smallest term.
fn fresnel_asymptotic(x: f64) -> (f64, f64) {
    let z = PI * x * x; // πx²
    let z2 = z * z;
    // f(x) = (1/πx)·Σ (−1)^m (4m−1)!!/z^{2m}
    let mut f_sum = 0.0;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    let mut m = 0usize;
    loop {
        f_sum += if m % 2 == 0 { term } else { -term };
        let next = term * ((4 * m + 3) * (4 * m + 1)) as f64 / z2;
        if next.abs() >= prev.abs() || next.abs() < 1e-18 {
            break;
        }
        prev = term;
        term = next;
        m += 1;
    }
    let f = f_sum / (PI * x);
    // g(x) = (1/πx)·Σ (−1)^m (4m+1)!!/z^{2m+1}
    let mut g_sum = 0.0;
    let mut term = 1.0 / z;
    let mut prev = f64::INFINITY;
    let mut m = 0usize;
    loop {
        g_sum += if m % 2 == 0 { term } else { -term };
        let next = term * ((4 * m + 5) * (4 * m + 3)) as f64 / z2;
        if next.abs() >= prev.abs() || next.abs() < 1e-18 {
            break;
        }
        prev = term;
        term = next;
        m += 1;
    }
    let g = g_sum / (PI * x);
    let half = 0.5 * z; // πx²/2
    let (sh, ch) = half.sin_cos();
    (0.5 + f * sh - g * ch, 0.5 - f * ch - g * sh)
}
