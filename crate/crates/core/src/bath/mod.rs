//! Drude bath and its spectral correlation tensor.
//!
//! Two representations of `Γ(Δ) = ∫₀^∞ dτ e^{iΔτ} W(τ)` are provided:
//!
//! * [`TensorVariant::Gamma1`]: the delta-function limit, real valued,
//!   `πJ(Δ)(1+N(Δ))` for `Δ > 0` and `πJ(−Δ)N(−Δ)` for `Δ < 0`.
//! * [`TensorVariant::Gamma2`]: the full complex value
//!   `(D̄ + γ̄) + i(f̄ − κ̄)` from the half-range cosine/sine transforms of
//!   the symmetrized and antisymmetrized correlation functions, with the
//!   Matsubara sums truncated at `N` terms.
//!
//! All frequencies are rad·ps⁻¹. The coupling strength `η` is given in cm⁻¹
//! and scales `J(ω) = ηΩω/(ω² + Ω²)`, so `Γ` is a rate in rad·ps⁻¹.

mod convergence;
mod oracle;
pub mod quadrature;
mod tensor;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{cm_to_rad_ps, thermal_rad_ps};

pub use convergence::{matsubara_convergence, ConvergenceReport};
pub use oracle::{
    gamma_damped, gamma_quadrature_oracle, gamma_quadrature_oracle_with, OracleEstimate,
    DEFAULT_EPS_LADDER,
};
pub use tensor::SpectralTensor;

/// Relative window within which `Ω = 2kπk_BT` is treated as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorVariant {
    Gamma1,
    Gamma2,
}

impl TensorVariant {
    pub fn name(self) -> &'static str {
        match self {
            TensorVariant::Gamma1 => "gamma1",
            TensorVariant::Gamma2 => "gamma2",
        }
    }
}

impl std::str::FromStr for TensorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma1" => Ok(TensorVariant::Gamma1),
            "gamma2" => Ok(TensorVariant::Gamma2),
            other => Err(Error::config(
                "variant",
                format!("expected gamma1 or gamma2, got {other:?}"),
            )),
        }
    }
}

/// Individual closed-form pieces of `Γ⁽²⁾(Δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gamma2Terms {
    pub dbar: f64,
    pub fbar: f64,
    pub kappabar: f64,
    pub gammabar: f64,
}

impl Gamma2Terms {
    pub fn value(&self) -> C64 {
        C64::new(self.dbar + self.gammabar, self.fbar - self.kappabar)
    }
}

/// Drude bath parameters. User-facing values are kept in cm⁻¹ and K; the
/// rad·ps⁻¹ equivalents are derived once.
#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    eta_cm: f64,
    omega_c_cm: f64,
    temperature_k: f64,
    matsubara_n: usize,
    variant: TensorVariant,
    eta: f64,
    omega: f64,
    kt: f64,
}

impl BathSpec {
    pub fn new(
        eta_cm: f64,
        omega_c_cm: f64,
        temperature_k: f64,
        matsubara_n: usize,
        variant: TensorVariant,
    ) -> Result<Self> {
        // η = 0 is accepted as the decoupled limit
        if !(eta_cm >= 0.0 && eta_cm.is_finite()) {
            return Err(Error::config(
                "bath.eta",
                format!("must be >= 0, got {eta_cm}"),
            ));
        }
        if !(omega_c_cm > 0.0 && omega_c_cm.is_finite()) {
            return Err(Error::config(
                "bath.omega_c",
                format!("must be > 0, got {omega_c_cm}"),
            ));
        }
        if !(temperature_k > 0.0 && temperature_k.is_finite()) {
            return Err(Error::config(
                "bath.temperature",
                format!("must be > 0, got {temperature_k}"),
            ));
        }
        if matsubara_n == 0 {
            return Err(Error::config("bath.matsubara_n", "must be >= 1"));
        }
        Ok(BathSpec {
            eta_cm,
            omega_c_cm,
            temperature_k,
            matsubara_n,
            variant,
            eta: cm_to_rad_ps(eta_cm),
            omega: cm_to_rad_ps(omega_c_cm),
            kt: thermal_rad_ps(temperature_k),
        })
    }

    pub fn with_variant(&self, variant: TensorVariant) -> Self {
        BathSpec {
            variant,
            ..self.clone()
        }
    }

    pub fn with_matsubara_n(&self, n: usize) -> Result<Self> {
        Self::new(
            self.eta_cm,
            self.omega_c_cm,
            self.temperature_k,
            n,
            self.variant,
        )
    }

    pub fn with_temperature(&self, temperature_k: f64) -> Result<Self> {
        Self::new(
            self.eta_cm,
            self.omega_c_cm,
            temperature_k,
            self.matsubara_n,
            self.variant,
        )
    }

    pub fn with_eta(&self, eta_cm: f64) -> Result<Self> {
        Self::new(
            eta_cm,
            self.omega_c_cm,
            self.temperature_k,
            self.matsubara_n,
            self.variant,
        )
    }

    pub fn eta_cm(&self) -> f64 {
        self.eta_cm
    }

    pub fn omega_c_cm(&self) -> f64 {
        self.omega_c_cm
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn matsubara_n(&self) -> usize {
        self.matsubara_n
    }

    pub fn variant(&self) -> TensorVariant {
        self.variant
    }

    /// η in rad·ps⁻¹.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Ω in rad·ps⁻¹.
    pub fn omega_c(&self) -> f64 {
        self.omega
    }

    /// k_B T in rad·ps⁻¹.
    pub fn kt(&self) -> f64 {
        self.kt
    }

    /// Drude spectral density `J(ω) = ηΩω/(ω² + Ω²)`, meant for `ω ≥ 0`.
    /// The formula is odd in ω and is evaluated as such for negative input.
    pub fn spectral_density(&self, w: f64) -> f64 {
        self.eta * self.omega * w / (w * w + self.omega * self.omega)
    }

    /// Bose-Einstein occupation `1/(e^{ω/k_BT} − 1)`.
    pub fn bose(&self, w: f64) -> Result<f64> {
        if w == 0.0 {
            return Err(Error::Domain("Bose occupation is singular at ω = 0".into()));
        }
        Ok(1.0 / (w / self.kt).exp_m1())
    }

    /// Traditional real tensor value.
    pub fn gamma1(&self, delta: f64) -> f64 {
        if delta > 0.0 {
            // 1 + N(Δ) = −1/expm1(−Δ/kT)
            let one_plus_n = -1.0 / (-delta / self.kt).exp_m1();
            PI * self.spectral_density(delta) * one_plus_n
        } else if delta < 0.0 {
            let w = -delta;
            PI * self.spectral_density(w) / (w / self.kt).exp_m1()
        } else {
            PI * self.eta * self.kt / self.omega
        }
    }

    /// Matsubara frequency `ω̄_j = 2jπk_BT`.
    pub fn matsubara_frequency(&self, j: usize) -> f64 {
        2.0 * j as f64 * PI * self.kt
    }

    /// The `k` for which `Ω = ω̄_k` within [`RESONANCE_TOLERANCE`], if any.
    pub fn resonance(&self) -> Option<usize> {
        let k = (self.omega / (2.0 * PI * self.kt)).round();
        if k < 1.0 {
            return None;
        }
        let k = k as usize;
        let rel = (self.matsubara_frequency(k) - self.omega).abs() / self.omega;
        (rel < RESONANCE_TOLERANCE).then_some(k)
    }

    /// Terms `j = N, …, 1` of a Matsubara sum, skipping `skip`.
    fn matsubara_sum(&self, skip: Option<usize>, term: impl Fn(usize, f64) -> f64) -> f64 {
        (1..=self.matsubara_n)
            .rev()
            .filter(|&j| Some(j) != skip)
            .map(|j| term(j, self.matsubara_frequency(j)))
            .sum()
    }

    /// `D̄(Δ) = ∫₀^∞ dτ ν(τ) cos Δτ`.
    pub fn dbar(&self, delta: f64) -> f64 {
        let (eta, om, kt) = (self.eta, self.omega, self.kt);
        if delta != 0.0 {
            let w = delta.abs();
            return 0.5 * PI * self.spectral_density(w) / (w / (2.0 * kt)).tanh();
        }
        let term = |_j: usize, wj: f64| 2.0 * PI * eta * om * kt / (wj * wj - om * om);
        match self.resonance() {
            None => 0.5 * PI * eta / (om / (2.0 * kt)).tan() + self.matsubara_sum(None, term),
            Some(k) => -kt * eta * PI / (2.0 * om) + self.matsubara_sum(Some(k), term),
        }
    }

    /// `f̄(Δ) = ∫₀^∞ dτ ν(τ) sin Δτ`.
    pub fn fbar(&self, delta: f64) -> f64 {
        let (eta, om, kt) = (self.eta, self.omega, self.kt);
        let d = delta;
        let term = |j: usize, wj: f64| {
            let wj2 = wj * wj;
            eta * om * wj2 * d / (j as f64 * (wj2 - om * om) * (wj2 + d * d))
        };
        match self.resonance() {
            None => {
                PI * eta * om * d / (2.0 * (om * om + d * d)) / (om / (2.0 * kt)).tan()
                    + self.matsubara_sum(None, term)
            }
            Some(k) => {
                let s = d * d + om * om;
                0.5 * eta * PI * kt * (d * d * d - 3.0 * d * om * om) / (s * s)
                    + self.matsubara_sum(Some(k), term)
            }
        }
    }

    /// `κ̄(Δ) = ∫₀^∞ dτ μ(τ) cos Δτ = ηπΩ²/(2(Ω² + Δ²))`.
    pub fn kappabar(&self, delta: f64) -> f64 {
        let om2 = self.omega * self.omega;
        self.eta * PI * om2 / (2.0 * (om2 + delta * delta))
    }

    /// `γ̄(Δ) = ∫₀^∞ dτ μ(τ) sin Δτ = (π/2)J(Δ)`, zero at `Δ = 0`.
    pub fn gammabar(&self, delta: f64) -> f64 {
        if delta == 0.0 {
            0.0
        } else {
            0.5 * PI * self.spectral_density(delta)
        }
    }

    pub fn gamma2_terms(&self, delta: f64) -> Gamma2Terms {
        Gamma2Terms {
            dbar: self.dbar(delta),
            fbar: self.fbar(delta),
            kappabar: self.kappabar(delta),
            gammabar: self.gammabar(delta),
        }
    }

    /// Complex tensor value `D̄ + if̄ − iκ̄ + γ̄`.
    pub fn gamma2(&self, delta: f64) -> C64 {
        self.gamma2_terms(delta).value()
    }

    /// Tensor value for the configured variant.
    pub fn gamma(&self, delta: f64) -> C64 {
        match self.variant {
            TensorVariant::Gamma1 => C64::new(self.gamma1(delta), 0.0),
            TensorVariant::Gamma2 => self.gamma2(delta),
        }
    }
}
