//! Brute-force reference for `Γ(Δ)`: the half-range Fourier transform is
//! regularized with a damping `e^{−ετ}`, which turns the delta function and
//! principal value into Lorentzians, integrated numerically and then
//! extrapolated to ε → 0⁺.

use num_complex::Complex64 as C64;

use super::quadrature::{integrate, Quadrature};
use super::BathSpec;
use crate::error::Result;

/// Damping ladder as fractions of Ω.
pub const DEFAULT_EPS_LADDER: [f64; 6] = [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125];

#[derive(Clone, Debug)]
pub struct OracleEstimate {
    pub value: C64,
    /// Difference between the full extrapolation and the one that drops
    /// the largest ε.
    pub error: f64,
    pub ladder: Vec<(f64, C64)>,
}

/// `Γ_ε(Δ) = ∫₀^∞ dω J(ω)[(1+N)(ε + i(Δ−ω))/(ε² + (Δ−ω)²) + N(ε + i(Δ+ω))/(ε² + (Δ+ω)²)]`.
pub fn gamma_damped(spec: &BathSpec, delta: f64, eps: f64) -> Result<Quadrature> {
    let kt = spec.kt();
    let integrand = |w: f64| -> C64 {
        let j = spec.spectral_density(w);
        let n = 1.0 / (w / kt).exp_m1();
        let a = delta - w;
        let b = delta + w;
        let da = eps * eps + a * a;
        let db = eps * eps + b * b;
        let one_plus_n = 1.0 + n;
        C64::new(
            j * (one_plus_n * eps / da + n * eps / db),
            j * (one_plus_n * a / da + n * b / db),
        )
    };

    let x = 50.0 * spec.omega_c().max(kt).max(delta.abs());
    let peak = delta.abs();
    let mut breaks = vec![0.0];
    for k in [-20.0, -1.0, 0.0, 1.0, 20.0] {
        let p = peak + k * eps;
        if p > 0.0 && p < x {
            breaks.push(p);
        }
    }
    breaks.push(x);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let scale = spec.eta().max(f64::MIN_POSITIVE);
    let abs_tol = 1e-13 * scale;
    let head = integrate(integrand, &breaks, abs_tol, 1e-12, 20_000)?;
    // [x, ∞) with ω = x/u
    let tail = integrate(
        |u: f64| integrand(x / u) * (x / (u * u)),
        &[0.0, 0.5, 1.0],
        abs_tol,
        1e-12,
        20_000,
    )?;
    Ok(Quadrature {
        value: head.value + tail.value,
        error: head.error + tail.error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// Neville extrapolation of `(x_k, y_k)` to `x = 0`.
fn extrapolate_to_zero(points: &[(f64, C64)]) -> C64 {
    let mut p: Vec<C64> = points.iter().map(|&(_, y)| y).collect();
    let x: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..(n - m) {
            p[i] = (p[i + 1] * x[i] - p[i] * x[i + m]) / (x[i] - x[i + m]);
        }
    }
    p[0]
}

pub fn gamma_quadrature_oracle(spec: &BathSpec, delta: f64) -> Result<OracleEstimate> {
    gamma_quadrature_oracle_with(spec, delta, &DEFAULT_EPS_LADDER)
}

/// Oracle with a custom damping ladder (fractions of Ω, at least two).
pub fn gamma_quadrature_oracle_with(
    spec: &BathSpec,
    delta: f64,
    ladder: &[f64],
) -> Result<OracleEstimate> {
    assert!(
        ladder.len() >= 2,
        "extrapolation needs at least two damping values"
    );
    let mut points = Vec::with_capacity(ladder.len());
    for &frac in ladder {
        let eps = frac * spec.omega_c();
        points.push((eps, gamma_damped(spec, delta, eps)?.value));
    }
    let value = extrapolate_to_zero(&points);
    let reduced = extrapolate_to_zero(&points[1..]);
    Ok(OracleEstimate {
        value,
        error: (value - reduced).norm(),
        ladder: points,
    })
}
