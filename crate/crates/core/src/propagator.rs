//! Time evolution under a fixed generator.

use ndarray::{Array1, Axis};
use ndarray_linalg::{Eig, Inverse, Norm, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operators::{
    devectorize, hermiticity_error, hermitize, min_eigenvalue, trace, vectorize, CMatrix,
    DensityMatrix, Superoperator,
};

/// Eigenvector matrices with `‖V‖₁‖V⁻¹‖₁` at or above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e8;
/// RK4 aborts once `|Tr ρ − 1|` exceeds this.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Eigenvalues with `|Re λ| ≤ ZERO_RELATIVE·‖L‖_max` count as stationary.
pub const ZERO_RELATIVE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Rk4 => "rk4",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CMatrix>,
    method: Method,
    step: Option<f64>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// RK4 step size; `None` for exact propagation.
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn last(&self) -> Option<&CMatrix> {
        self.states.last()
    }

    /// Population `ρ_ii(t)` at every sample.
    pub fn population(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|r| r[(i, i)].re).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.states
            .iter()
            .map(|r| (trace(r) - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.states
            .iter()
            .map(hermiticity_error)
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part over all samples.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.states
            .iter()
            .map(min_eigenvalue)
            .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
    }

    pub fn max_abs_diff(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::Dimension(format!(
                "trajectories have {} and {} samples",
                self.times.len(),
                other.times.len()
            )));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| crate::operators::max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }
}

/// `times` evenly spaced samples from 0 to `t_final` inclusive.
pub fn uniform_grid(t_final: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|k| t_final * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::config(
            "time",
            "sample times must be finite and non-negative",
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "time",
            "sample times must be strictly ascending",
        ));
    }
    Ok(())
}

fn check_state(l: &Superoperator, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != l.dim() {
        return Err(Error::Dimension(format!(
            "initial state of dimension {} for generator of dimension {}",
            rho0.dim(),
            l.dim()
        )));
    }
    Ok(())
}

/// `L = V Λ V⁻¹`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Array1<C64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    pub condition: f64,
}

pub fn spectral_decomposition(l: &Superoperator) -> Result<SpectralDecomposition> {
    let (values, vectors) = l.matrix().eig()?;
    let inverse = vectors.inv()?;
    let condition = norm_one(&vectors) * norm_one(&inverse);
    if condition.is_nan() || condition >= CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    Ok(SpectralDecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

fn norm_one(m: &CMatrix) -> f64 {
    m.axis_iter(Axis(1))
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `ρ(t) = devec(V e^{Λt} V⁻¹ vec ρ₀)` on the given grid.
pub fn propagate_exact(
    l: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Trajectory> {
    check_state(l, rho0)?;
    check_grid(times)?;
    let sd = spectral_decomposition(l)?;
    let c = sd.inverse.dot(&vectorize(rho0.matrix()));
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            states.push(rho0.matrix().clone());
            continue;
        }
        let weighted = Array1::from_shape_fn(c.len(), |k| (sd.values[k] * t).exp() * c[k]);
        states.push(devectorize(&sd.vectors.dot(&weighted))?);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        method: Method::Exact,
        step: None,
    })
}

/// Suggested RK4 step, `0.1/‖L‖_max`.
pub fn default_rk4_step(l: &Superoperator) -> f64 {
    0.1 / l.norm_max().max(f64::MIN_POSITIVE)
}

/// Fixed-step RK4 sampled every `dt` from 0 to `t_final`.
pub fn propagate_rk4(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("time.dt", format!("must be > 0, got {dt}")));
    }
    let steps = (t_final / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    propagate_rk4_on(l, rho0, &times, dt)
}

/// RK4 with steps no longer than `max_dt`, landing exactly on each sample.
pub fn propagate_rk4_on(
    l: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
    max_dt: f64,
) -> Result<Trajectory> {
    check_state(l, rho0)?;
    check_grid(times)?;
    if !(max_dt > 0.0 && max_dt.is_finite()) {
        return Err(Error::config(
            "time.dt",
            format!("must be > 0, got {max_dt}"),
        ));
    }
    let m = l.matrix();
    let d = l.dim();
    let trace_of = |v: &Array1<C64>| (0..d).map(|i| v[i + i * d]).sum::<C64>();
    let mut y = vectorize(rho0.matrix());
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut used = 0.0_f64;
    for &target in times {
        let span = target - t;
        let n = (span / max_dt)
            .ceil()
            .max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
        if n > 0 {
            let h = span / n as f64;
            used = used.max(h);
            for k in 0..n {
                let k1 = m.dot(&y);
                let k2 = m.dot(&(&y + &(&k1 * C64::new(0.5 * h, 0.0))));
                let k3 = m.dot(&(&y + &(&k2 * C64::new(0.5 * h, 0.0))));
                let k4 = m.dot(&(&y + &(&k3 * C64::new(h, 0.0))));
                y = &y
                    + &((k1 + &k2 * C64::new(2.0, 0.0) + &k3 * C64::new(2.0, 0.0) + k4)
                        * C64::new(h / 6.0, 0.0));
                let drift = (trace_of(&y) - C64::new(1.0, 0.0)).norm();
                if drift.is_nan() || drift > TRACE_DRIFT_LIMIT {
                    return Err(Error::TraceDrift {
                        drift,
                        time: t + (k + 1) as f64 * h,
                        dt: h,
                    });
                }
            }
        }
        t = target;
        states.push(devectorize(&y)?);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        method: Method::Rk4,
        step: Some(if used > 0.0 { used } else { max_dt }),
    })
}

/// Exact propagation, falling back to RK4 with step `rk4_dt` when the
/// eigenvectors are ill-conditioned.
pub fn propagate(
    l: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
    rk4_dt: f64,
) -> Result<Trajectory> {
    match propagate_exact(l, rho0, times) {
        Err(Error::IllConditioned { .. }) => propagate_rk4_on(l, rho0, times, rk4_dt),
        other => other,
    }
}

/// Threshold below which `Re λ` counts as zero.
fn zero_threshold(l: &Superoperator) -> f64 {
    ZERO_RELATIVE * l.norm_max()
}

/// Unique normalized null vector of `L`.
pub fn stationary_state(l: &Superoperator) -> Result<DensityMatrix> {
    let (_, s, vt) = l.matrix().svd(false, true)?;
    let vt = vt.expect("right singular vectors requested");
    let tol = zero_threshold(l);
    let multiplicity = s.iter().filter(|&&x| x <= tol).count();
    if multiplicity != 1 {
        return Err(Error::DegenerateNullSpace { multiplicity });
    }
    let null: Array1<C64> = vt.row(vt.nrows() - 1).mapv(|z| z.conj());
    let raw = devectorize(&null)?;
    let tr = trace(&raw);
    if tr.norm() == 0.0 {
        return Err(Error::Consistency("stationary vector is traceless".into()));
    }
    let rho = hermitize(&raw.mapv(|z| z / tr));
    let residual = l.matrix().dot(&vectorize(&rho)).norm_l2();
    if residual > tol {
        return Err(Error::Consistency(format!(
            "stationary residual {residual:.3e} exceeds {tol:.3e}"
        )));
    }
    DensityMatrix::new(rho)
}

/// `1/gap`, with the gap the slowest decay rate among modes with
/// `Re λ < −1e-9‖L‖_max`.
pub fn relaxation_timescale(l: &Superoperator) -> Result<f64> {
    let (values, _) = l.matrix().eig()?;
    timescale_from_eigenvalues(values.as_slice().unwrap(), zero_threshold(l))
}

fn timescale_from_eigenvalues(values: &[C64], threshold: f64) -> Result<f64> {
    values
        .iter()
        .filter(|v| v.re < -threshold)
        .map(|v| -v.re)
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.min(g)))
        })
        .map(|gap| 1.0 / gap)
        .ok_or(Error::NoDecayingMode)
}

#[derive(Clone, Debug)]
pub struct SpectralSummary {
    /// Eigenvalues sorted by real part, slowest first.
    pub eigenvalues: Vec<C64>,
    pub gap: Option<f64>,
    /// Eigenvalues with `Re λ` above the zero threshold.
    pub growing: usize,
    pub stationary: Option<DensityMatrix>,
    pub null_multiplicity: usize,
}

impl SpectralSummary {
    pub fn relaxation_timescale(&self) -> Option<f64> {
        self.gap.map(|g| 1.0 / g)
    }
}

pub fn spectral_summary(l: &Superoperator) -> Result<SpectralSummary> {
    let (values, _) = l.matrix().eig()?;
    let threshold = zero_threshold(l);
    let mut eigenvalues = values.to_vec();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re));
    let gap = timescale_from_eigenvalues(&eigenvalues, threshold)
        .ok()
        .map(|t| 1.0 / t);
    let growing = eigenvalues.iter().filter(|v| v.re > threshold).count();
    let (stationary, null_multiplicity) = match stationary_state(l) {
        Ok(s) => (Some(s), 1),
        Err(Error::DegenerateNullSpace { multiplicity }) => (None, multiplicity),
        Err(e) => return Err(e),
    };
    Ok(SpectralSummary {
        eigenvalues,
        gap,
        growing,
        stationary,
        null_multiplicity,
    })
}
