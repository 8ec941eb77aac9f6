use super::BathSpec;
use crate::error::Result;

/// Sensitivity of the truncated Matsubara sums to doubling `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub matsubara_n: usize,
    /// max over the grid of `|D̄_N − D̄_2N| / |Γ⁽²⁾_2N|`.
    pub dbar_max_rel_change: f64,
    /// max over the grid of `|f̄_N − f̄_2N| / |Γ⁽²⁾_2N|`.
    pub fbar_max_rel_change: f64,
    pub worst_delta: f64,
}

impl ConvergenceReport {
    pub fn max_rel_change(&self) -> f64 {
        self.dbar_max_rel_change.max(self.fbar_max_rel_change)
    }

    pub fn converged(&self, threshold: f64) -> bool {
        self.max_rel_change() < threshold
    }
}

/// Compares `N` against `2N` on `grid` (rad·ps⁻¹).
pub fn matsubara_convergence(spec: &BathSpec, grid: &[f64]) -> Result<ConvergenceReport> {
    let doubled = spec.with_matsubara_n(2 * spec.matsubara_n())?;
    let mut report = ConvergenceReport {
        matsubara_n: spec.matsubara_n(),
        dbar_max_rel_change: 0.0,
        fbar_max_rel_change: 0.0,
        worst_delta: grid.first().copied().unwrap_or(0.0),
    };
    let mut worst = -1.0;
    for &d in grid {
        let scale = doubled.gamma2(d).norm();
        if scale == 0.0 {
            continue;
        }
        let dd = (spec.dbar(d) - doubled.dbar(d)).abs() / scale;
        let df = (spec.fbar(d) - doubled.fbar(d)).abs() / scale;
        report.dbar_max_rel_change = report.dbar_max_rel_change.max(dd);
        report.fbar_max_rel_change = report.fbar_max_rel_change.max(df);
        if dd.max(df) > worst {
            worst = dd.max(df);
            report.worst_delta = d;
        }
    }
    Ok(report)
}
