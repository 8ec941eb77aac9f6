use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::jump::{build_jump_operators, JumpOperatorSet};
use crate::bath::SpectralTensor;
use crate::error::{Error, Result};
use crate::operators::{
    dagger, hermiticity_error, left, max_abs, right, sandwich, Basis, BohrFrequencyTable, CMatrix,
    EigenSystem, Superoperator,
};

/// Tolerance for the Hermiticity check on the Lamb shift, relative to the
/// largest coefficient.
const LAMB_SHIFT_HERMITICITY: f64 = 1e-10;

/// `χ_αα(ω, ω′) = Γ*(ω) + Γ(ω′)` and `Θ_αα(ω, ω′) = Γ*(ω) − Γ(ω′)`,
/// indexed `[site][(ω, ω′)]`. Off-diagonal sites vanish.
#[derive(Clone, Debug)]
pub struct CoefficientTables {
    chi: Vec<Array2<C64>>,
    theta: Vec<Array2<C64>>,
}

pub fn build_coefficients(
    tensor: &SpectralTensor,
    bohr: &BohrFrequencyTable,
) -> Result<CoefficientTables> {
    tensor.check_covers(bohr)?;
    let nc = bohr.len();
    let mut chi = Vec::with_capacity(tensor.sites());
    let mut theta = Vec::with_capacity(tensor.sites());
    for a in 0..tensor.sites() {
        let g = tensor.values().row(a);
        chi.push(Array2::from_shape_fn((nc, nc), |(w, v)| g[w].conj() + g[v]));
        theta.push(Array2::from_shape_fn((nc, nc), |(w, v)| g[w].conj() - g[v]));
    }
    Ok(CoefficientTables { chi, theta })
}

impl CoefficientTables {
    pub fn sites(&self) -> usize {
        self.chi.len()
    }

    pub fn clusters(&self) -> usize {
        self.chi.first().map_or(0, |c| c.nrows())
    }

    pub fn chi(&self, alpha: usize) -> &Array2<C64> {
        &self.chi[alpha]
    }

    pub fn theta(&self, alpha: usize) -> &Array2<C64> {
        &self.theta[alpha]
    }

    /// Keeps only the diagonal pairs ω′ = ω.
    pub fn secular_restriction(&self) -> Self {
        let keep = |m: &Array2<C64>| {
            Array2::from_shape_fn(m.dim(), |(w, v)| {
                if w == v {
                    m[(w, v)]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        };
        CoefficientTables {
            chi: self.chi.iter().map(keep).collect(),
            theta: self.theta.iter().map(keep).collect(),
        }
    }

    pub fn scaled_theta(&self, factor: f64) -> Self {
        CoefficientTables {
            chi: self.chi.clone(),
            theta: self.theta.iter().map(|t| t.mapv(|z| z * factor)).collect(),
        }
    }

    fn check_shape(&self, jumps: &JumpOperatorSet) -> Result<()> {
        if self.sites() != jumps.sites() || self.clusters() != jumps.clusters() {
            return Err(Error::Dimension(format!(
                "coefficients for {} sites x {} clusters, jump operators for {} x {}",
                self.sites(),
                self.clusters(),
                jumps.sites(),
                jumps.clusters()
            )));
        }
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        self.chi
            .iter()
            .chain(&self.theta)
            .flat_map(|m| m.iter())
            .fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// `Σ_ω′ c(ω, ω′) F_α(ω′)` for one α and ω, skipping zero coefficients.
fn contract(jumps: &JumpOperatorSet, coeff: &Array2<C64>, alpha: usize, w: usize) -> CMatrix {
    let dim = jumps.coupling(alpha).nrows();
    let mut acc = CMatrix::zeros((dim, dim));
    for v in 0..coeff.ncols() {
        let c = coeff[(w, v)];
        if c != C64::new(0.0, 0.0) {
            acc.scaled_add(c, jumps.get(alpha, v));
        }
    }
    acc
}

/// `H_ls = (i/2) Σ Θ(ω, ω′) F†(ω) F(ω′)`; fails if the result is not
/// Hermitian.
pub fn build_lamb_shift(jumps: &JumpOperatorSet, coeffs: &CoefficientTables) -> Result<CMatrix> {
    coeffs.check_shape(jumps)?;
    let dim = jumps.couplings().first().map_or(0, |s| s.nrows());
    let mut h = CMatrix::zeros((dim, dim));
    for a in 0..jumps.sites() {
        for w in 0..jumps.clusters() {
            let b = contract(jumps, coeffs.theta(a), a, w);
            h = h + dagger(jumps.get(a, w)).dot(&b);
        }
    }
    h.mapv_inplace(|z| z * C64::new(0.0, 0.5));
    let err = hermiticity_error(&h);
    let scale = coeffs.max_abs().max(max_abs(&h)).max(f64::MIN_POSITIVE);
    if err > LAMB_SHIFT_HERMITICITY * scale {
        return Err(Error::Consistency(format!(
            "Lamb shift is not Hermitian (deviation {err:.3e})"
        )));
    }
    Ok(h)
}

/// `Lρ = −i[H_s + H_ls, ρ] + Σ χ(ω, ω′)[F(ω′)ρF†(ω) − ½{F†(ω)F(ω′), ρ}]`
/// in the site basis, summing over every pair present in `coeffs`.
pub fn lindblad_from_coefficients(
    eig: &EigenSystem,
    jumps: &JumpOperatorSet,
    coeffs: &CoefficientTables,
) -> Result<Superoperator> {
    coeffs.check_shape(jumps)?;
    let dim = eig.dim();
    let h_ls = build_lamb_shift(jumps, coeffs)?;
    let h_s = eig.to_site(&CMatrix::from_diag(
        &eig.energies().mapv(|e| C64::new(e, 0.0)),
    ));
    let h_eff = h_s + &h_ls;

    let mut d = CMatrix::zeros((dim * dim, dim * dim));
    let mut k = CMatrix::zeros((dim, dim));
    for a in 0..jumps.sites() {
        for w in 0..jumps.clusters() {
            let f = jumps.get(a, w);
            let amat = contract(jumps, coeffs.chi(a), a, w);
            d = d + sandwich(&amat, &dagger(f));
            k = k + dagger(f).dot(&amat);
        }
    }
    let mi = C64::new(0.0, -1.0);
    let mut l = (left(&h_eff) - right(&h_eff)).mapv(|z| z * mi) + d;
    l = l - (left(&k) + right(&k)).mapv(|z| z * 0.5);
    Superoperator::new(l, Basis::Site)
}

/// Lindblad generator for site-projector couplings.
pub fn build_lindblad(
    eig: &EigenSystem,
    tensor: &SpectralTensor,
    secular: bool,
) -> Result<Superoperator> {
    let jumps = build_jump_operators(eig);
    build_lindblad_with(eig, &jumps, tensor, secular)
}

pub fn build_lindblad_with(
    eig: &EigenSystem,
    jumps: &JumpOperatorSet,
    tensor: &SpectralTensor,
    secular: bool,
) -> Result<Superoperator> {
    let coeffs = build_coefficients(tensor, eig.bohr())?;
    let coeffs = if secular {
        coeffs.secular_restriction()
    } else {
        coeffs
    };
    lindblad_from_coefficients(eig, jumps, &coeffs)
}
