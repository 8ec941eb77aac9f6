//! The four Born–Markov generators: Lindblad and Redfield form, each with
//! or without the secular approximation.

mod jump;
mod lindblad;
mod redfield;

use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, SpectralTensor, TensorVariant};
use crate::error::{Error, Result};
use crate::operators::{EigenSystem, Superoperator};

pub use jump::{build_jump_operators, JumpOperatorSet};
pub use lindblad::{
    build_coefficients, build_lamb_shift, build_lindblad, build_lindblad_with,
    lindblad_from_coefficients, CoefficientTables,
};
pub use redfield::{
    build_redfield, build_redfield_for, build_redfield_with, redfield_site_superoperator,
    redfield_to_superoperator, RedfieldTensor,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Lindblad,
    Redfield,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Lindblad => "lindblad",
            Form::Redfield => "redfield",
        }
    }
}

impl std::str::FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lindblad" => Ok(Form::Lindblad),
            "redfield" => Ok(Form::Redfield),
            other => Err(Error::config(
                "form",
                format!("expected lindblad or redfield, got {other:?}"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorKind {
    pub form: Form,
    pub secular: bool,
    pub variant: TensorVariant,
}

impl GeneratorKind {
    /// e.g. `lindblad/nonsecular/gamma2`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}",
            self.form.name(),
            if self.secular {
                "secular"
            } else {
                "nonsecular"
            },
            self.variant.name()
        )
    }
}

/// Site-basis generator of the requested kind; the variant in `kind`
/// overrides the one in `bath`.
pub fn build_generator(
    eig: &EigenSystem,
    bath: &BathSpec,
    kind: GeneratorKind,
) -> Result<Superoperator> {
    let spec = bath.with_variant(kind.variant);
    let tensor = SpectralTensor::from_bath(&spec, eig.bohr(), eig.dim());
    build_generator_from_tensor(eig, &tensor, kind.form, kind.secular)
}

pub fn build_generator_from_tensor(
    eig: &EigenSystem,
    tensor: &SpectralTensor,
    form: Form,
    secular: bool,
) -> Result<Superoperator> {
    match form {
        Form::Lindblad => build_lindblad(eig, tensor, secular),
        Form::Redfield => {
            let r = build_redfield(eig, tensor, secular)?;
            redfield_site_superoperator(&r, eig)
        }
    }
}
