//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! name = "three_level"        # or "pe545", or "inline" with `matrix`
//!
//! [bath]
//! eta = 0.125                 # cm⁻¹
//! omega_c = 100.0             # cm⁻¹
//! temperature = 300.0         # K
//! matsubara_n = 100
//!
//! [method]
//! form = "lindblad"           # or "redfield"
//! secular = false
//! variant = "gamma2"          # or "gamma1"
//! propagator = "exact"        # or "rk4"
//!
//! [initial_state]
//! basis_state = 1             # 1-based site index
//!
//! [time]
//! t_final = 5.0               # ps
//! samples = 500
//!
//! [output]
//! path = "out"
//! elements = "upper"          # "populations", or [[1, 1], [1, 2]]
//! ```
//!
//! Omitted keys take the defaults of the chosen built-in model.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, TensorVariant};
use crate::error::{Error, Result};
use crate::generators::{Form, GeneratorKind};
use crate::models::{three_level, BuiltinModel};
use crate::operators::{CMatrix, DensityMatrix, SiteHamiltonian};
use crate::propagator::uniform_grid;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default)]
    pub initial_state: InitialSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Real part of an inline site Hamiltonian, cm⁻¹.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matsubara_n: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secular: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagator: Option<String>,
    /// RK4 step in ps; defaults to `0.1/‖L‖_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk4_dt: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_state: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<ElementsValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementsValue {
    Named(String),
    Pairs(Vec<[i64; 2]>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelChoice {
    Builtin(BuiltinModel),
    /// Site Hamiltonian in cm⁻¹ as given.
    Inline(CMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorChoice {
    Exact,
    Rk4,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// 0-based site index.
    Basis(usize),
    Matrix(CMatrix),
}

/// Which density-matrix elements are written, as 0-based `(i, j)` with `i ≤ j`.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementSelection {
    Upper,
    Populations,
    Pairs(Vec<(usize, usize)>),
}

impl ElementSelection {
    pub fn pairs(&self, dim: usize) -> Vec<(usize, usize)> {
        match self {
            ElementSelection::Upper => (0..dim)
                .flat_map(|i| (i..dim).map(move |j| (i, j)))
                .collect(),
            ElementSelection::Populations => (0..dim).map(|i| (i, i)).collect(),
            ElementSelection::Pairs(p) => p.clone(),
        }
    }
}

/// Fully resolved and validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: ModelChoice,
    pub hamiltonian: SiteHamiltonian,
    pub bath: BathSpec,
    pub form: Form,
    pub secular: bool,
    pub propagator: PropagatorChoice,
    pub rk4_dt: Option<f64>,
    pub initial: InitialState,
    pub t_final: f64,
    pub samples: usize,
    pub output_dir: PathBuf,
    pub elements: ElementSelection,
}

fn from_toml(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| {
        let key = e
            .message()
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "config".into());
        Error::config(key, e.to_string().trim_end())
    })
}

fn real_matrix(rows: &[Vec<f64>], key: &str) -> Result<Array2<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::config(
            key,
            "must be a non-empty square array of rows",
        ));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

fn complex_matrix(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>, key: &str) -> Result<CMatrix> {
    let re = real_matrix(re, key)?;
    let im = match im {
        Some(rows) => {
            let key_im = format!("{key}_im");
            let m = real_matrix(rows, &key_im)?;
            if m.dim() != re.dim() {
                return Err(Error::config(
                    key_im,
                    "must have the same shape as the real part",
                ));
            }
            m
        }
        None => Array2::zeros(re.dim()),
    };
    Ok(Array2::from_shape_fn(re.dim(), |ij| {
        C64::new(re[ij], im[ij])
    }))
}

fn positive(v: f64, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        from_toml(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn for_model(model: BuiltinModel) -> Self {
        let mut c = ConfigFile::default();
        c.model.name = Some(model.name().into());
        c
    }

    pub fn resolve(&self) -> Result<SimConfig> {
        let name = self.model.name.as_deref();
        let (model, defaults) = match (name, &self.model.matrix) {
            (Some("inline") | None, Some(rows)) => {
                let m = complex_matrix(rows, self.model.matrix_im.as_ref(), "model.matrix")?;
                (ModelChoice::Inline(m), None)
            }
            (Some("inline"), None) => {
                return Err(Error::config(
                    "model.matrix",
                    "required when model.name = \"inline\"",
                ))
            }
            (Some(other), Some(_)) => {
                return Err(Error::config(
                    "model.matrix",
                    format!("not allowed with built-in model {other:?}; use name = \"inline\""),
                ))
            }
            (Some(other), None) => {
                let b: BuiltinModel = other.parse()?;
                (ModelChoice::Builtin(b), Some(b.model()))
            }
            (None, None) => (
                ModelChoice::Builtin(BuiltinModel::ThreeLevel),
                Some(three_level()),
            ),
        };
        if self.model.matrix.is_none() && self.model.matrix_im.is_some() {
            return Err(Error::config(
                "model.matrix_im",
                "given without model.matrix",
            ));
        }
        let hamiltonian = match &model {
            ModelChoice::Builtin(_) => defaults.as_ref().unwrap().hamiltonian.clone(),
            ModelChoice::Inline(m) => SiteHamiltonian::from_cm(m)
                .map_err(|e| Error::config("model.matrix", e.to_string()))?,
        };
        let dim = hamiltonian.dim();

        let fallback = defaults.clone().unwrap_or_else(three_level);
        let base = &fallback.bath;
        let default_n = match defaults {
            Some(_) => base.matsubara_n(),
            None if dim <= 4 => 100,
            None => 10000,
        };
        let variant: TensorVariant = match &self.method.variant {
            Some(v) => v.parse().map_err(|_| {
                Error::config(
                    "method.variant",
                    format!("expected gamma1 or gamma2, got {v:?}"),
                )
            })?,
            None => TensorVariant::Gamma2,
        };
        let n = match self.bath.matsubara_n {
            Some(n) if n >= 1 => n as usize,
            Some(n) => {
                return Err(Error::config(
                    "bath.matsubara_n",
                    format!("must be >= 1, got {n}"),
                ))
            }
            None => default_n,
        };
        let bath = BathSpec::new(
            self.bath.eta.unwrap_or(base.eta_cm()),
            self.bath.omega_c.unwrap_or(base.omega_c_cm()),
            self.bath.temperature.unwrap_or(base.temperature_k()),
            n,
            variant,
        )?;

        let form: Form = match &self.method.form {
            Some(f) => f.parse().map_err(|_| {
                Error::config(
                    "method.form",
                    format!("expected lindblad or redfield, got {f:?}"),
                )
            })?,
            None => Form::Lindblad,
        };
        let propagator = match self.method.propagator.as_deref() {
            None | Some("exact") => PropagatorChoice::Exact,
            Some("rk4") => PropagatorChoice::Rk4,
            Some(other) => {
                return Err(Error::config(
                    "method.propagator",
                    format!("expected exact or rk4, got {other:?}"),
                ))
            }
        };
        let rk4_dt = self
            .method
            .rk4_dt
            .map(|v| positive(v, "method.rk4_dt"))
            .transpose()?;

        let initial = match (&self.initial_state.basis_state, &self.initial_state.matrix) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "initial_state",
                    "give either basis_state or matrix, not both",
                ))
            }
            (Some(k), None) => {
                if *k < 1 || *k as usize > dim {
                    return Err(Error::config(
                        "initial_state.basis_state",
                        format!("must be in 1..={dim}, got {k}"),
                    ));
                }
                InitialState::Basis(*k as usize - 1)
            }
            (None, Some(rows)) => {
                let m = complex_matrix(
                    rows,
                    self.initial_state.matrix_im.as_ref(),
                    "initial_state.matrix",
                )?;
                if m.nrows() != dim {
                    return Err(Error::config(
                        "initial_state.matrix",
                        format!("is {0}x{0}, model dimension is {dim}", m.nrows()),
                    ));
                }
                DensityMatrix::new_initial(m.clone())
                    .map_err(|e| Error::config("initial_state.matrix", e.to_string()))?;
                InitialState::Matrix(m)
            }
            (None, None) => InitialState::Basis(fallback.initial_site.min(dim - 1)),
        };
        if self.initial_state.matrix.is_none() && self.initial_state.matrix_im.is_some() {
            return Err(Error::config(
                "initial_state.matrix_im",
                "given without initial_state.matrix",
            ));
        }

        let t_final = positive(
            self.time.t_final.unwrap_or(fallback.t_final_ps),
            "time.t_final",
        )?;
        let samples = match self.time.samples {
            Some(s) if s >= 2 => s as usize,
            Some(s) => {
                return Err(Error::config(
                    "time.samples",
                    format!("must be >= 2, got {s}"),
                ))
            }
            None => fallback.samples,
        };

        let elements = match &self.output.elements {
            None => ElementSelection::Upper,
            Some(ElementsValue::Named(s)) => match s.as_str() {
                "upper" => ElementSelection::Upper,
                "populations" => ElementSelection::Populations,
                other => {
                    return Err(Error::config(
                        "output.elements",
                        format!("expected \"upper\", \"populations\" or a list of [i, j] pairs, got {other:?}"),
                    ))
                }
            },
            Some(ElementsValue::Pairs(p)) => {
                let mut out = Vec::with_capacity(p.len());
                for &[i, j] in p {
                    if i < 1 || j < 1 || i as usize > dim || j as usize > dim || i > j {
                        return Err(Error::config(
                            "output.elements",
                            format!("pair [{i}, {j}] must satisfy 1 <= i <= j <= {dim}"),
                        ));
                    }
                    out.push((i as usize - 1, j as usize - 1));
                }
                ElementSelection::Pairs(out)
            }
        };

        Ok(SimConfig {
            model,
            hamiltonian,
            bath,
            form,
            secular: self.method.secular.unwrap_or(false),
            propagator,
            rk4_dt,
            initial,
            t_final,
            samples,
            output_dir: self
                .output
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
            elements,
        })
    }
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        ConfigFile::parse(text)?.resolve()
    }

    pub fn for_model(model: BuiltinModel) -> Self {
        ConfigFile::for_model(model)
            .resolve()
            .expect("built-in defaults are valid")
    }

    pub fn model_name(&self) -> &'static str {
        match self.model {
            ModelChoice::Builtin(b) => b.name(),
            ModelChoice::Inline(_) => "inline",
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn variant(&self) -> TensorVariant {
        self.bath.variant()
    }

    pub fn kind(&self) -> GeneratorKind {
        GeneratorKind {
            form: self.form,
            secular: self.secular,
            variant: self.variant(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_final, self.samples)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        match &self.initial {
            InitialState::Basis(k) => DensityMatrix::basis_state(self.dim(), *k),
            InitialState::Matrix(m) => DensityMatrix::new_initial(m.clone()),
        }
    }

    /// Explicit form of every setting; parses back to an equal config.
    pub fn to_file(&self) -> ConfigFile {
        let rows = |m: &CMatrix, f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            m.rows()
                .into_iter()
                .map(|r| r.iter().map(f).collect())
                .collect()
        };
        let has_imag = |m: &CMatrix| m.iter().any(|z| z.im != 0.0);
        let model = match &self.model {
            ModelChoice::Builtin(b) => ModelSection {
                name: Some(b.name().into()),
                ..Default::default()
            },
            ModelChoice::Inline(m) => ModelSection {
                name: Some("inline".into()),
                matrix: Some(rows(m, |z| z.re)),
                matrix_im: has_imag(m).then(|| rows(m, |z| z.im)),
            },
        };
        let initial_state = match &self.initial {
            InitialState::Basis(k) => InitialSection {
                basis_state: Some(*k as i64 + 1),
                ..Default::default()
            },
            InitialState::Matrix(m) => InitialSection {
                basis_state: None,
                matrix: Some(rows(m, |z| z.re)),
                matrix_im: has_imag(m).then(|| rows(m, |z| z.im)),
            },
        };
        let elements = match &self.elements {
            ElementSelection::Upper => ElementsValue::Named("upper".into()),
            ElementSelection::Populations => ElementsValue::Named("populations".into()),
            ElementSelection::Pairs(p) => ElementsValue::Pairs(
                p.iter()
                    .map(|&(i, j)| [i as i64 + 1, j as i64 + 1])
                    .collect(),
            ),
        };
        ConfigFile {
            model,
            bath: BathSection {
                eta: Some(self.bath.eta_cm()),
                omega_c: Some(self.bath.omega_c_cm()),
                temperature: Some(self.bath.temperature_k()),
                matsubara_n: Some(self.bath.matsubara_n() as i64),
            },
            method: MethodSection {
                form: Some(self.form.name().into()),
                secular: Some(self.secular),
                variant: Some(self.variant().name().into()),
                propagator: Some(
                    match self.propagator {
                        PropagatorChoice::Exact => "exact",
                        PropagatorChoice::Rk4 => "rk4",
                    }
                    .into(),
                ),
                rk4_dt: self.rk4_dt,
            },
            initial_state,
            time: TimeSection {
                t_final: Some(self.t_final),
                samples: Some(self.samples as i64),
            },
            output: OutputSection {
                path: Some(self.output_dir.clone()),
                elements: Some(elements),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match SimConfig::parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_is_three_level_defaults() {
        let c = SimConfig::parse("").unwrap();
        assert_eq!(c.model, ModelChoice::Builtin(BuiltinModel::ThreeLevel));
        assert_eq!(c.bath.matsubara_n(), 100);
        assert_eq!(c.bath.eta_cm(), 0.125);
        assert_eq!(c.initial, InitialState::Basis(0));
        assert_eq!(c.t_final, 5.0);
        assert_eq!(c.samples, 500);
        assert_eq!(c.form, Form::Lindblad);
        assert!(!c.secular);
        assert_eq!(c.variant(), TensorVariant::Gamma2);
    }

    #[test]
    fn pe545_defaults() {
        let c = SimConfig::parse("[model]\nname = \"pe545\"\n").unwrap();
        assert_eq!(c.dim(), 8);
        assert_eq!(c.bath.matsubara_n(), 10000);
        assert_eq!(c.bath.omega_c_cm(), 1000.0);
        assert_eq!(c.t_final, 2.0);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of("[bath]\neta = -1.0\n"), "bath.eta");
        assert_eq!(key_of("[bath]\ntemperature = 0.0\n"), "bath.temperature");
        assert_eq!(key_of("[bath]\nmatsubara_n = 0\n"), "bath.matsubara_n");
        assert_eq!(key_of("[model]\nname = \"fmo\"\n"), "model.name");
        assert_eq!(key_of("[method]\nform = \"bloch\"\n"), "method.form");
        assert_eq!(key_of("[method]\nvariant = \"gamma3\"\n"), "method.variant");
        assert_eq!(
            key_of("[initial_state]\nbasis_state = 4\n"),
            "initial_state.basis_state"
        );
        assert_eq!(key_of("[time]\nsamples = 1\n"), "time.samples");
        assert_eq!(key_of("[time]\nt_final = -2.0\n"), "time.t_final");
        assert_eq!(key_of("[output]\nelements = [[2, 1]]\n"), "output.elements");
        assert_eq!(key_of("[bath]\netaa = 1.0\n"), "etaa");
        assert_eq!(key_of("[model]\nname = \"inline\"\n"), "model.matrix");
        assert_eq!(key_of("[model]\nmatrix = [[1.0, 2.0]]\n"), "model.matrix");
    }

    #[test]
    fn inline_model_and_matrix_state() {
        let text = r#"
            [model]
            name = "inline"
            matrix = [[0.0, 5.0], [5.0, 40.0]]
            [initial_state]
            matrix = [[0.5, 0.5], [0.5, 0.5]]
            [output]
            elements = [[1, 2]]
        "#;
        let c = SimConfig::parse(text).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.bath.matsubara_n(), 100);
        assert_eq!(c.elements.pairs(2), vec![(0, 1)]);
        assert!(c.initial_state().is_ok());

        let bad = text.replace("[[0.5, 0.5], [0.5, 0.5]]", "[[1.5, 0.0], [0.0, -0.5]]");
        assert_eq!(key_of(&bad), "initial_state.matrix");
    }

    #[test]
    fn printed_config_round_trips() {
        let texts = [
            "",
            "[model]\nname = \"pe545\"\n[method]\nsecular = true\nvariant = \"gamma1\"\nform = \"redfield\"\n",
            "[model]\nmatrix = [[0.0, 1.0], [1.0, 2.0]]\nmatrix_im = [[0.0, 0.5], [-0.5, 0.0]]\n[method]\npropagator = \"rk4\"\nrk4_dt = 0.001\n[output]\nelements = \"populations\"\n",
        ];
        for t in texts {
            let c = SimConfig::parse(t).unwrap();
            let again = SimConfig::parse(&c.to_toml()).unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn element_selections() {
        assert_eq!(ElementSelection::Upper.pairs(3).len(), 6);
        assert_eq!(
            ElementSelection::Populations.pairs(3),
            vec![(0, 0), (1, 1), (2, 2)]
        );
    }
}
