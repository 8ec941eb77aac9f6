use ndarray::Array2;

use crate::error::{Error, Result};
use crate::operators::{site_projector, CMatrix, EigenSystem};

/// `F_α(ω)` for every coupling operator `S_α` and every Bohr cluster ω,
/// in the site basis. In the eigenbasis `F_α(ω)` keeps the entries
/// `⟨n|S_α|m⟩` with `ω_m − ω_n` in the cluster.
#[derive(Clone, Debug)]
pub struct JumpOperatorSet {
    couplings: Vec<CMatrix>,
    ops: Vec<Vec<CMatrix>>,
}

/// Jump operators for the site projectors `|α⟩⟨α|`, one bath per site.
pub fn build_jump_operators(eig: &EigenSystem) -> JumpOperatorSet {
    let couplings = (0..eig.dim())
        .map(|a| site_projector(a, eig.dim()).expect("index within dimension"))
        .collect();
    JumpOperatorSet::from_couplings(eig, couplings).expect("projectors match dimension")
}

impl JumpOperatorSet {
    pub fn from_couplings(eig: &EigenSystem, couplings: Vec<CMatrix>) -> Result<Self> {
        let dim = eig.dim();
        let bohr = eig.bohr();
        let mut ops = Vec::with_capacity(couplings.len());
        for s in &couplings {
            if s.dim() != (dim, dim) {
                return Err(Error::Dimension(format!(
                    "coupling operator is {}x{}, system dimension is {dim}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            let se = eig.to_eigen(s);
            let mut per_cluster = vec![CMatrix::zeros((dim, dim)); bohr.len()];
            for n in 0..dim {
                for m in 0..dim {
                    per_cluster[bohr.cluster_of(m, n)][(n, m)] = se[(n, m)];
                }
            }
            ops.push(per_cluster.iter().map(|f| eig.to_site(f)).collect());
        }
        Ok(JumpOperatorSet { couplings, ops })
    }

    pub fn sites(&self) -> usize {
        self.ops.len()
    }

    pub fn clusters(&self) -> usize {
        self.ops.first().map_or(0, Vec::len)
    }

    pub fn coupling(&self, alpha: usize) -> &CMatrix {
        &self.couplings[alpha]
    }

    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }

    /// `F_α(ω_c)` in the site basis.
    pub fn get(&self, alpha: usize, cluster: usize) -> &CMatrix {
        &self.ops[alpha][cluster]
    }

    /// Largest `|Σ_ω F_α(ω) − S_α|` over α.
    pub fn completeness_error(&self) -> f64 {
        self.ops
            .iter()
            .zip(&self.couplings)
            .map(|(fs, s)| {
                let sum = fs.iter().fold(Array2::zeros(s.dim()), |acc, f| acc + f);
                crate::operators::max_abs_diff(&sum, s)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{dagger, identity, max_abs, max_abs_diff, SiteHamiltonian};
    use ndarray::array;
    use num_complex::Complex64 as C64;

    fn three_level() -> EigenSystem {
        let h = SiteHamiltonian::from_cm_real(&array![
            [0.0, 0.67, 0.0],
            [0.67, -2.67, 0.67],
            [0.0, 0.67, -3.67]
        ])
        .unwrap();
        crate::operators::eigendecompose(&h, None).unwrap()
    }

    /// Taylor series with scaling and squaring.
    fn expm(a: &CMatrix) -> CMatrix {
        let norm = max_abs(a) * a.nrows() as f64;
        let s = norm.log2().ceil().max(0.0) as i32 + 1;
        let scaled = a.mapv(|z| z / 2f64.powi(s));
        let mut term = identity(a.nrows());
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.dot(&scaled).mapv(|z| z / k as f64);
            sum += &term;
        }
        for _ in 0..s {
            sum = sum.dot(&sum);
        }
        sum
    }

    #[test]
    fn diagonal_hamiltonian_commuting_coupling() {
        let h = SiteHamiltonian::from_cm_real(&array![[0.0, 0.0], [0.0, 5.0]]).unwrap();
        let eig = crate::operators::eigendecompose(&h, None).unwrap();
        let f = build_jump_operators(&eig);
        let zero = eig.bohr().zero_cluster();
        for c in 0..f.clusters() {
            if c == zero {
                assert!(max_abs_diff(f.get(0, c), f.coupling(0)) < 1e-15);
            } else {
                assert_eq!(max_abs(f.get(0, c)), 0.0);
            }
        }
    }

    #[test]
    fn completeness_and_conjugation() {
        let eig = three_level();
        let f = build_jump_operators(&eig);
        assert_eq!(f.sites(), 3);
        assert!(f.clusters() <= 9);
        assert!(f.completeness_error() < 1e-12);
        for a in 0..3 {
            for c in 0..f.clusters() {
                let mirror = eig.bohr().mirror(c);
                assert!(max_abs_diff(&dagger(f.get(a, c)), f.get(a, mirror)) < 1e-12);
            }
        }
    }

    #[test]
    fn single_element_per_nonzero_frequency() {
        let eig = three_level();
        let f = build_jump_operators(&eig);
        for a in 0..3 {
            for c in 0..f.clusters() {
                if c == eig.bohr().zero_cluster() {
                    continue;
                }
                let fe = eig.to_eigen(f.get(a, c));
                let count = fe.iter().filter(|z| z.norm() > 1e-12).count();
                assert!(count <= 1, "cluster {c} has {count} entries");
            }
        }
    }

    #[test]
    fn interaction_picture_expansion() {
        let eig = three_level();
        let f = build_jump_operators(&eig);
        let h = eig.to_site(&CMatrix::from_diag(
            &eig.energies().mapv(|e| C64::new(e, 0.0)),
        ));
        for t in [0.013, 0.37, 2.9] {
            let fwd = expm(&h.mapv(|z| z * C64::new(0.0, t)));
            let back = expm(&h.mapv(|z| z * C64::new(0.0, -t)));
            for a in 0..3 {
                let lhs = fwd.dot(f.coupling(a)).dot(&back);
                let mut rhs = CMatrix::zeros((3, 3));
                for c in 0..f.clusters() {
                    let phase = C64::new(0.0, -eig.bohr().frequency(c) * t).exp();
                    rhs = rhs + f.get(a, c).mapv(|z| z * phase);
                }
                assert!(max_abs_diff(&lhs, &rhs) < 1e-11);
            }
        }
    }

    #[test]
    fn rejects_mismatched_coupling() {
        let eig = three_level();
        assert!(JumpOperatorSet::from_couplings(&eig, vec![identity(2)]).is_err());
    }
}
