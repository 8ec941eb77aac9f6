//! Built-in systems with their default bath and run parameters.

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, TensorVariant};
use crate::error::{Error, Result};
use crate::operators::SiteHamiltonian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinModel {
    ThreeLevel,
    Pe545,
}

impl BuiltinModel {
    pub const ALL: [BuiltinModel; 2] = [BuiltinModel::ThreeLevel, BuiltinModel::Pe545];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinModel::ThreeLevel => "three_level",
            BuiltinModel::Pe545 => "pe545",
        }
    }

    pub fn model(self) -> Model {
        match self {
            BuiltinModel::ThreeLevel => three_level(),
            BuiltinModel::Pe545 => pe545(),
        }
    }
}

impl std::str::FromStr for BuiltinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three_level" => Ok(BuiltinModel::ThreeLevel),
            "pe545" => Ok(BuiltinModel::Pe545),
            other => Err(Error::config(
                "model.name",
                format!("unknown model {other:?}; expected three_level or pe545"),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub name: &'static str,
    /// Matrix as printed, cm⁻¹.
    pub printed_cm: Array2<f64>,
    pub hamiltonian: SiteHamiltonian,
    pub bath: BathSpec,
    pub t_final_ps: f64,
    pub samples: usize,
    /// 0-based site initially occupied.
    pub initial_site: usize,
}

/// Chain `E₁ = 0, E₂ = −2.67, E₃ = −3.67` with nearest-neighbour coupling 0.67 cm⁻¹.
pub fn three_level() -> Model {
    let printed = array![[0.0, 0.67, 0.0], [0.67, -2.67, 0.67], [0.0, 0.67, -3.67]];
    Model {
        name: "three_level",
        hamiltonian: SiteHamiltonian::from_cm_real(&printed).expect("valid built-in matrix"),
        printed_cm: printed,
        bath: BathSpec::new(0.125, 100.0, 300.0, 100, TensorVariant::Gamma2).expect("valid bath"),
        t_final_ps: 5.0,
        samples: 500,
        initial_site: 0,
    }
}

/// Eight-site phycoerythrin 545 exciton Hamiltonian. The printed matrix has
/// one asymmetric pair, (2, 5) = −35.9 against (5, 2) = −35.4; the upper
/// triangle is used.
pub fn pe545() -> Model {
    let printed = array![
        [18008.0, -4.1, -31.9, 2.8, 2.1, -37.1, -10.5, 45.9],
        [-4.1, 17973.0, -2.9, 30.9, -35.9, 2.5, -45.5, 11.0],
        [-31.9, -2.9, 18711.0, -5.6, -19.6, -16.1, 6.7, 6.8],
        [2.8, 30.9, -5.6, 18960.0, 11.5, 25.5, 5.1, 7.4],
        [2.1, -35.4, -19.6, 11.5, 18532.0, 101.5, 36.3, 16.0],
        [-37.1, 2.5, -16.1, 25.5, 101.5, 19574.0, 17.6, -38.6],
        [-10.5, -45.5, 6.7, 5.1, 36.3, 17.6, 18040.0, 2.6],
        [45.9, 11.0, 6.8, 7.4, 16.0, -38.6, 2.6, 19050.0]
    ];
    let complex = printed.mapv(|x| C64::new(x, 0.0));
    Model {
        name: "pe545",
        hamiltonian: SiteHamiltonian::from_cm_upper(&complex).expect("valid built-in matrix"),
        printed_cm: printed,
        bath: BathSpec::new(12.5, 1000.0, 300.0, 10000, TensorVariant::Gamma2).expect("valid bath"),
        t_final_ps: 2.0,
        samples: 500,
        initial_site: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{eigendecompose, hermiticity_error};
    use crate::units::rad_ps_to_cm;

    #[test]
    fn three_level_spectrum() {
        let m = three_level();
        assert_eq!(m.hamiltonian.max_asymmetry_cm(), 0.0);
        let eig = eigendecompose(&m.hamiltonian, None).unwrap();
        let e: Vec<f64> = eig.energies().iter().map(|&x| rad_ps_to_cm(x)).collect();
        let tr: f64 = e.iter().sum();
        assert!((tr - (-6.34)).abs() < 1e-12);
        let det: f64 = e.iter().product();
        // det [[0, v, 0], [v, b, v], [0, v, c]] = −v²c
        let expect_det = -0.67 * 0.67 * -3.67;
        assert!((det - expect_det).abs() < 1e-12);
        assert_eq!(eig.bohr().len(), 7);
    }

    #[test]
    fn pe545_upper_triangle_is_authoritative() {
        let m = pe545();
        assert!((m.hamiltonian.max_asymmetry_cm() - 0.5).abs() < 1e-12);
        let h = m.hamiltonian.matrix();
        assert_eq!(hermiticity_error(h), 0.0);
        assert!((rad_ps_to_cm(h[(4, 1)].re) - -35.9).abs() < 1e-12);
        assert!((rad_ps_to_cm(h[(0, 2)].re) - -31.9).abs() < 1e-12);
        let eig = eigendecompose(&m.hamiltonian, None).unwrap();
        assert_eq!(eig.groups().len(), 8);
        assert_eq!(eig.bohr().len(), 57);
    }

    #[test]
    fn names_round_trip() {
        for m in BuiltinModel::ALL {
            assert_eq!(m.name().parse::<BuiltinModel>().unwrap(), m);
            assert_eq!(m.model().name, m.name());
        }
        assert!("fmo".parse::<BuiltinModel>().is_err());
    }
}
