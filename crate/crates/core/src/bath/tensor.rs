use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{BathSpec, TensorVariant};
use crate::error::{Error, Result};
use crate::operators::BohrFrequencyTable;

/// `Γ_αα(ω)` for every site α and every Bohr-frequency cluster ω.
/// Off-diagonal entries `Γ_αβ`, α ≠ β, are identically zero.
#[derive(Clone, Debug)]
pub struct SpectralTensor {
    variant: Option<TensorVariant>,
    frequencies: Vec<f64>,
    values: Array2<C64>,
}

impl SpectralTensor {
    /// Evaluates the bath on every cluster; all sites see the same bath.
    pub fn from_bath(spec: &BathSpec, bohr: &BohrFrequencyTable, sites: usize) -> Self {
        let row: Vec<C64> = bohr.frequencies().iter().map(|&w| spec.gamma(w)).collect();
        let values = Array2::from_shape_fn((sites, row.len()), |(_, c)| row[c]);
        SpectralTensor {
            variant: Some(spec.variant()),
            frequencies: bohr.frequencies().to_vec(),
            values,
        }
    }

    /// Arbitrary per-site values, indexed `[site, cluster]`.
    pub fn from_values(frequencies: Vec<f64>, values: Array2<C64>) -> Result<Self> {
        if values.ncols() != frequencies.len() {
            return Err(Error::Dimension(format!(
                "{} tensor columns for {} frequencies",
                values.ncols(),
                frequencies.len()
            )));
        }
        Ok(SpectralTensor {
            variant: None,
            frequencies,
            values,
        })
    }

    pub fn zeros(bohr: &BohrFrequencyTable, sites: usize) -> Self {
        SpectralTensor {
            variant: None,
            frequencies: bohr.frequencies().to_vec(),
            values: Array2::zeros((sites, bohr.len())),
        }
    }

    pub fn variant(&self) -> Option<TensorVariant> {
        self.variant
    }

    pub fn sites(&self) -> usize {
        self.values.nrows()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    /// `Γ_αβ(ω_c)`.
    pub fn get(&self, alpha: usize, beta: usize, cluster: usize) -> C64 {
        if alpha == beta {
            self.values[(alpha, cluster)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `γ_αα(ω_c) = 2 Re Γ_αα(ω_c)`.
    pub fn rate(&self, alpha: usize, cluster: usize) -> f64 {
        2.0 * self.values[(alpha, cluster)].re
    }

    /// `T_αα(ω_c) = Im Γ_αα(ω_c)`.
    pub fn shift(&self, alpha: usize, cluster: usize) -> f64 {
        self.values[(alpha, cluster)].im
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpectralTensor {
            variant: self.variant,
            frequencies: self.frequencies.clone(),
            values: self.values.mapv(|z| z * factor),
        }
    }

    /// Checks that the tensor was evaluated on exactly the clusters of `bohr`.
    pub fn check_covers(&self, bohr: &BohrFrequencyTable) -> Result<()> {
        if self.frequencies.len() != bohr.len() {
            return Err(Error::config(
                "tensor",
                format!(
                    "tensor holds {} frequencies but the system has {} Bohr clusters",
                    self.frequencies.len(),
                    bohr.len()
                ),
            ));
        }
        for (c, (&a, &b)) in self.frequencies.iter().zip(bohr.frequencies()).enumerate() {
            if (a - b).abs() > bohr.tolerance() {
                return Err(Error::config(
                    "tensor",
                    format!("missing Bohr frequency {b:.6e} (cluster {c}, tensor has {a:.6e})"),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{eigendecompose, SiteHamiltonian};

    #[test]
    fn identical_sites_and_zero_off_diagonal() {
        let h = SiteHamiltonian::from_cm_real(&ndarray::array![
            [0.0, 0.67, 0.0],
            [0.67, -2.67, 0.67],
            [0.0, 0.67, -3.67]
        ])
        .unwrap();
        let eig = eigendecompose(&h, None).unwrap();
        let spec = BathSpec::new(0.125, 100.0, 300.0, 100, TensorVariant::Gamma2).unwrap();
        let t = SpectralTensor::from_bath(&spec, eig.bohr(), 3);
        assert_eq!(t.variant(), Some(TensorVariant::Gamma2));
        t.check_covers(eig.bohr()).unwrap();
        for c in 0..t.frequencies().len() {
            assert!(t.rate(0, c) >= 0.0);
            assert_eq!(t.get(0, 1, c), C64::new(0.0, 0.0));
            assert_eq!(t.get(1, 1, c), t.get(2, 2, c));
            assert_eq!(t.rate(1, c), 2.0 * t.get(1, 1, c).re);
            assert_eq!(t.shift(1, c), t.get(1, 1, c).im);
        }
    }

    #[test]
    fn coverage_mismatch_is_a_configuration_error() {
        let h2 = SiteHamiltonian::from_cm_real(&ndarray::array![[0.0, 1.0], [1.0, 3.0]]).unwrap();
        let h3 = SiteHamiltonian::from_cm_real(&ndarray::array![
            [0.0, 1.0, 0.0],
            [1.0, 3.0, 0.0],
            [0.0, 0.0, 7.0]
        ])
        .unwrap();
        let e2 = eigendecompose(&h2, None).unwrap();
        let e3 = eigendecompose(&h3, None).unwrap();
        let spec = BathSpec::new(1.0, 100.0, 300.0, 10, TensorVariant::Gamma1).unwrap();
        let t = SpectralTensor::from_bath(&spec, e2.bohr(), 2);
        assert!(matches!(
            t.check_covers(e3.bohr()),
            Err(Error::Config { .. })
        ));
    }
}
