use ndarray::Array4;
use num_complex::Complex64 as C64;

use super::jump::JumpOperatorSet;
use crate::bath::SpectralTensor;
use crate::error::{Error, Result};
use crate::operators::{site_projector, Basis, CMatrix, EigenSystem, Superoperator};

/// Relaxation tensor `R[s′, s, m, n]` in the eigenbasis, with
/// `dρ_{s′s}/dt = −iω_{s′s}ρ_{s′s} − Σ_{mn} R_{s′smn} ρ_{mn}`.
#[derive(Clone, Debug)]
pub struct RedfieldTensor {
    r: Array4<C64>,
}

impl RedfieldTensor {
    pub fn dim(&self) -> usize {
        self.r.shape()[0]
    }

    pub fn get(&self, sp: usize, s: usize, m: usize, n: usize) -> C64 {
        self.r[(sp, s, m, n)]
    }

    pub fn as_array(&self) -> &Array4<C64> {
        &self.r
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Largest `|R_{ss′nm} − conj(R_{s′smn})|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for sp in 0..d {
            for s in 0..d {
                for m in 0..d {
                    for n in 0..d {
                        let diff = self.r[(s, sp, n, m)] - self.r[(sp, s, m, n)].conj();
                        err = err.max(diff.norm());
                    }
                }
            }
        }
        err
    }

    /// Largest `|Σ_s R_{ssmn}|`.
    pub fn trace_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for m in 0..d {
            for n in 0..d {
                let sum: C64 = (0..d).map(|s| self.r[(s, s, m, n)]).sum();
                err = err.max(sum.norm());
            }
        }
        err
    }
}

/// Redfield tensor for site-projector couplings.
pub fn build_redfield(
    eig: &EigenSystem,
    tensor: &SpectralTensor,
    secular: bool,
) -> Result<RedfieldTensor> {
    let couplings: Vec<CMatrix> = (0..eig.dim())
        .map(|a| site_projector(a, eig.dim()))
        .collect::<Result<_>>()?;
    build_redfield_with(eig, &couplings, tensor, secular)
}

pub fn build_redfield_with(
    eig: &EigenSystem,
    couplings: &[CMatrix],
    tensor: &SpectralTensor,
    secular: bool,
) -> Result<RedfieldTensor> {
    let bohr = eig.bohr();
    tensor.check_covers(bohr)?;
    if couplings.len() != tensor.sites() {
        return Err(Error::Dimension(format!(
            "{} coupling operators for a tensor over {} sites",
            couplings.len(),
            tensor.sites()
        )));
    }
    let d = eig.dim();
    let s_eig: Vec<CMatrix> = couplings.iter().map(|s| eig.to_eigen(s)).collect();

    // Γ⁺_{abcd} = Σ_α S_ab S_cd Γ_α(ω_d − ω_c), Γ⁻_{abcd} = Σ_α S_ab S_cd Γ*_α(ω_c − ω_d)
    let mut gp = Array4::<C64>::zeros((d, d, d, d));
    let mut gm = Array4::<C64>::zeros((d, d, d, d));
    for (alpha, s) in s_eig.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let sab = s[(a, b)];
                if sab == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    for e in 0..d {
                        let w = sab * s[(c, e)];
                        gp[(a, b, c, e)] += w * tensor.get(alpha, alpha, bohr.cluster_of(e, c));
                        gm[(a, b, c, e)] +=
                            w * tensor.get(alpha, alpha, bohr.cluster_of(c, e)).conj();
                    }
                }
            }
        }
    }

    let mut r = Array4::<C64>::zeros((d, d, d, d));
    for sp in 0..d {
        for s in 0..d {
            for m in 0..d {
                for n in 0..d {
                    if secular && bohr.cluster_of(sp, s) != bohr.cluster_of(m, n) {
                        continue;
                    }
                    let mut v = -gp[(n, s, sp, m)] - gm[(sp, m, n, s)];
                    if s == n {
                        v += (0..d).map(|k| gp[(sp, k, k, m)]).sum::<C64>();
                    }
                    if sp == m {
                        v += (0..d).map(|k| gm[(k, s, n, k)]).sum::<C64>();
                    }
                    r[(sp, s, m, n)] = v;
                }
            }
        }
    }
    Ok(RedfieldTensor { r })
}

/// Eigenbasis superoperator of `−iω_{s′s}ρ_{s′s} − Σ R_{s′smn}ρ_{mn}`.
pub fn redfield_to_superoperator(r: &RedfieldTensor, eig: &EigenSystem) -> Result<Superoperator> {
    let d = eig.dim();
    if r.dim() != d {
        return Err(Error::Dimension(format!(
            "Redfield tensor of dimension {} for system of dimension {d}",
            r.dim()
        )));
    }
    let e = eig.energies();
    let mut l = CMatrix::zeros((d * d, d * d));
    for sp in 0..d {
        for s in 0..d {
            let row = sp + s * d;
            for m in 0..d {
                for n in 0..d {
                    l[(row, m + n * d)] = -r.r[(sp, s, m, n)];
                }
            }
            l[(row, row)] += C64::new(0.0, -(e[sp] - e[s]));
        }
    }
    Superoperator::new(l, Basis::Eigen)
}

/// The same generator expressed in the site basis.
pub fn redfield_site_superoperator(r: &RedfieldTensor, eig: &EigenSystem) -> Result<Superoperator> {
    let adj = crate::operators::dagger(eig.vectors());
    redfield_to_superoperator(r, eig)?.transform(&adj, Basis::Site)
}

/// Tensor from the jump-operator couplings, for callers holding a
/// [`JumpOperatorSet`].
pub fn build_redfield_for(
    eig: &EigenSystem,
    jumps: &JumpOperatorSet,
    tensor: &SpectralTensor,
    secular: bool,
) -> Result<RedfieldTensor> {
    build_redfield_with(eig, jumps.couplings(), tensor, secular)
}
