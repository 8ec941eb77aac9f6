//! Dense complex operators: site Hamiltonians, their eigen systems, density
//! matrices and superoperators acting on column-major vectorized matrices.

use ndarray::{linalg::kron, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::units::cm_to_rad_ps;

pub type CMatrix = Array2<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn identity(dim: usize) -> CMatrix {
    Array2::eye(dim)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diag().sum()
}

/// Largest entry of `m − m†`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// System Hamiltonian in the site basis, stored in rad·ps⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteHamiltonian {
    matrix: CMatrix,
    max_asymmetry_cm: f64,
}

impl SiteHamiltonian {
    /// Builds from a matrix in cm⁻¹, replacing it by `(M + M†)/2`.
    pub fn from_cm(matrix_cm: &CMatrix) -> Result<Self> {
        let dim = Self::validate_input(matrix_cm)?;
        let asym = hermiticity_error(matrix_cm);
        let mut sym = matrix_cm.clone();
        for i in 0..dim {
            for j in 0..dim {
                sym[(i, j)] = (matrix_cm[(i, j)] + matrix_cm[(j, i)].conj()) * 0.5;
            }
        }
        Ok(Self::finish(sym, asym))
    }

    /// Builds from a matrix in cm⁻¹, taking the upper triangle as
    /// authoritative and mirroring it into the lower one.
    pub fn from_cm_upper(matrix_cm: &CMatrix) -> Result<Self> {
        let dim = Self::validate_input(matrix_cm)?;
        let asym = hermiticity_error(matrix_cm);
        let mut sym = matrix_cm.clone();
        for i in 0..dim {
            sym[(i, i)] = C64::new(matrix_cm[(i, i)].re, 0.0);
            for j in (i + 1)..dim {
                sym[(j, i)] = matrix_cm[(i, j)].conj();
            }
        }
        Ok(Self::finish(sym, asym))
    }

    pub fn from_cm_real(matrix_cm: &Array2<f64>) -> Result<Self> {
        Self::from_cm(&matrix_cm.mapv(|x| C64::new(x, 0.0)))
    }

    /// Builds from a matrix already in rad·ps⁻¹ (symmetrized the same way).
    pub fn from_rad_ps(matrix: &CMatrix) -> Result<Self> {
        let dim = Self::validate_input(matrix)?;
        let asym = hermiticity_error(matrix);
        let mut sym = matrix.clone();
        for i in 0..dim {
            for j in 0..dim {
                sym[(i, j)] = (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5;
            }
        }
        Ok(SiteHamiltonian {
            matrix: sym,
            max_asymmetry_cm: crate::units::rad_ps_to_cm(asym),
        })
    }

    fn validate_input(m: &CMatrix) -> Result<usize> {
        let dim = check_square(m, "Hamiltonian")?;
        if dim < 2 {
            return Err(Error::Dimension(format!(
                "Hamiltonian dimension must be at least 2, got {dim}"
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("Hamiltonian has non-finite entries".into()));
        }
        Ok(dim)
    }

    fn finish(sym_cm: CMatrix, asym_cm: f64) -> Self {
        SiteHamiltonian {
            matrix: sym_cm.mapv(|z| z * cm_to_rad_ps(1.0)),
            max_asymmetry_cm: asym_cm,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix in rad·ps⁻¹.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Largest `|M_ij − conj(M_ji)|` of the input, in cm⁻¹.
    pub fn max_asymmetry_cm(&self) -> f64 {
        self.max_asymmetry_cm
    }
}

/// `|α⟩⟨α|` in a `dim`-dimensional site basis.
pub fn site_projector(alpha: usize, dim: usize) -> Result<CMatrix> {
    if alpha >= dim {
        return Err(Error::IndexOutOfRange { index: alpha, dim });
    }
    let mut p = CMatrix::zeros((dim, dim));
    p[(alpha, alpha)] = ONE;
    Ok(p)
}

pub fn default_degeneracy_tolerance(energies: &[f64]) -> f64 {
    let scale = energies.iter().fold(1.0_f64, |acc, e| acc.max(e.abs()));
    1e-9 * scale
}

/// Distinct Bohr frequencies `ω_m − ω_n`, clustered with the degeneracy
/// tolerance. Cluster values are exactly antisymmetric and include 0.
#[derive(Clone, Debug)]
pub struct BohrFrequencyTable {
    frequencies: Vec<f64>,
    pair_cluster: Array2<usize>,
    zero: usize,
    tol: f64,
}

impl BohrFrequencyTable {
    fn build(group_energies: &[f64], group_of: &[usize], tol: f64) -> Self {
        let ng = group_energies.len();
        let mut gaps: Vec<(f64, usize, usize)> = Vec::new();
        for g in 0..ng {
            for h in 0..g {
                gaps.push((group_energies[g] - group_energies[h], g, h));
            }
        }
        gaps.sort_by(|a, b| a.0.total_cmp(&b.0));

        // chain clustering of the positive gaps
        let mut reps: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut acc: Vec<f64> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &(gap, g, h) in &gaps {
            if gap - last > tol || members.is_empty() {
                if !acc.is_empty() {
                    reps.push(acc.iter().sum::<f64>() / acc.len() as f64);
                    acc.clear();
                }
                members.push(Vec::new());
            }
            acc.push(gap);
            members.last_mut().unwrap().push((g, h));
            last = gap;
        }
        if !acc.is_empty() {
            reps.push(acc.iter().sum::<f64>() / acc.len() as f64);
        }

        let npos = reps.len();
        let zero = npos;
        let mut frequencies: Vec<f64> = reps.iter().rev().map(|w| -w).collect();
        frequencies.push(0.0);
        frequencies.extend(reps.iter().copied());

        let mut group_cluster = Array2::from_elem((ng, ng), zero);
        for (i, m) in members.iter().enumerate() {
            for &(g, h) in m {
                group_cluster[(g, h)] = zero + 1 + i;
                group_cluster[(h, g)] = zero - 1 - i;
            }
        }
        let dim = group_of.len();
        let pair_cluster = Array2::from_shape_fn((dim, dim), |(m, n)| {
            group_cluster[(group_of[m], group_of[n])]
        });

        BohrFrequencyTable {
            frequencies,
            pair_cluster,
            zero,
            tol,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Cluster representatives, ascending.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency(&self, cluster: usize) -> f64 {
        self.frequencies[cluster]
    }

    /// Cluster containing `ω_m − ω_n`.
    pub fn cluster_of(&self, m: usize, n: usize) -> usize {
        self.pair_cluster[(m, n)]
    }

    pub fn zero_cluster(&self) -> usize {
        self.zero
    }

    /// Cluster holding the negated frequency.
    pub fn mirror(&self, cluster: usize) -> usize {
        self.frequencies.len() - 1 - cluster
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn find(&self, omega: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .position(|w| (w - omega).abs() <= self.tol)
    }
}

/// Eigen decomposition of a site Hamiltonian with degeneracy bookkeeping.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    energies: Array1<f64>,
    vectors: CMatrix,
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    tol_deg: f64,
    bohr: BohrFrequencyTable,
}

/// Diagonalizes `h`. Eigenvalues ascend; each eigenvector is phased so its
/// largest-magnitude component is real and positive.
pub fn eigendecompose(h: &SiteHamiltonian, tol_deg: Option<f64>) -> Result<EigenSystem> {
    let hm = h.matrix();
    let dim = h.dim();
    // column-major copy; the solver misreads row-major complex input as its conjugate
    let mut fm = CMatrix::zeros((dim, dim).f());
    fm.assign(hm);
    let (w, mut u) = fm
        .eigh(UPLO::Upper)
        .map_err(|e| Error::Linalg(format!("Hermitian eigen solver failed: {e}")))?;

    for n in 0..dim {
        let col = u.column(n);
        let max = col.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max * (1.0 - 1e-12))
            .unwrap_or(0);
        let z = col[pivot];
        let phase = z.conj() / z.norm();
        u.column_mut(n).mapv_inplace(|x| x * phase);
        u[(pivot, n)] = C64::new(u[(pivot, n)].norm(), 0.0);
    }

    let orth = max_abs_diff(&dagger(&u).dot(&u), &identity(dim));
    if orth > 1e-12 {
        return Err(Error::Linalg(format!(
            "eigenvectors not orthonormal to 1e-12 (error {orth:.3e})"
        )));
    }
    let lam = CMatrix::from_diag(&w.mapv(|x| C64::new(x, 0.0)));
    let resid = max_abs_diff(&hm.dot(&u), &u.dot(&lam));
    let scale = max_abs(hm).max(f64::MIN_POSITIVE);
    if resid > 1e-10 * scale {
        return Err(Error::Linalg(format!(
            "eigen residual {resid:.3e} exceeds 1e-10 relative"
        )));
    }

    let tol = tol_deg.unwrap_or_else(|| default_degeneracy_tolerance(w.as_slice().unwrap()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![0; dim];
    for n in 0..dim {
        if n == 0 || w[n] - w[n - 1] > tol {
            groups.push(Vec::new());
        }
        groups.last_mut().unwrap().push(n);
        group_of[n] = groups.len() - 1;
    }
    let group_energies: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().map(|&n| w[n]).sum::<f64>() / g.len() as f64)
        .collect();
    let bohr = BohrFrequencyTable::build(&group_energies, &group_of, tol);

    Ok(EigenSystem {
        energies: w,
        vectors: u,
        groups,
        group_of,
        tol_deg: tol,
        bohr,
    })
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvalues in rad·ps⁻¹, ascending.
    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_of(&self, n: usize) -> usize {
        self.group_of[n]
    }

    pub fn tolerance(&self) -> f64 {
        self.tol_deg
    }

    pub fn bohr(&self) -> &BohrFrequencyTable {
        &self.bohr
    }

    /// Projector onto degeneracy group `g`.
    pub fn projector(&self, g: usize) -> CMatrix {
        let dim = self.dim();
        let mut p = CMatrix::zeros((dim, dim));
        for &n in &self.groups[g] {
            let v = self.vectors.column(n);
            for i in 0..dim {
                for j in 0..dim {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }

    /// `U† A U`: site basis to eigenbasis.
    pub fn to_eigen(&self, a: &CMatrix) -> CMatrix {
        dagger(&self.vectors).dot(a).dot(&self.vectors)
    }

    /// `U A U†`: eigenbasis to site basis.
    pub fn to_site(&self, a: &CMatrix) -> CMatrix {
        self.vectors.dot(a).dot(&dagger(&self.vectors))
    }
}

/// Density matrix, Hermitian with unit trace.
#[derive(Clone, Debug)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "density matrix")?;
        let herm = hermiticity_error(&m);
        if herm > 1e-10 {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (error {herm:.3e})"
            )));
        }
        let tr = trace(&m);
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::Domain(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(DensityMatrix(m))
    }

    /// As [`DensityMatrix::new`], additionally requiring positive semidefiniteness.
    pub fn new_initial(m: CMatrix) -> Result<Self> {
        let rho = Self::new(m)?;
        let min = rho.min_eigenvalue()?;
        if min < -1e-12 {
            return Err(Error::Domain(format!(
                "initial state is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(rho)
    }

    /// `|index⟩⟨index|`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        Ok(DensityMatrix(site_projector(index, dim)?))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.0)
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (w, _) = hermitize(m).eigh(UPLO::Upper)?;
    Ok(w.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Column-major stacking: `vec([[a, c], [b, d]]) = (a, b, c, d)`.
pub fn vectorize(m: &CMatrix) -> Array1<C64> {
    m.t().iter().copied().collect()
}

pub fn devectorize(v: &Array1<C64>) -> Result<CMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::Dimension(format!(
            "vector length {} is not a perfect square",
            v.len()
        )));
    }
    Ok(Array2::from_shape_vec((d, d).f(), v.to_vec()).expect("shape checked"))
}

/// Superoperator of `ρ ↦ AρB`, i.e. `Bᵀ ⊗ A`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron(&b.t().to_owned(), a)
}

/// Superoperator of `ρ ↦ Aρ`.
pub fn left(a: &CMatrix) -> CMatrix {
    kron(&identity(a.nrows()), a)
}

/// Superoperator of `ρ ↦ ρB`.
pub fn right(b: &CMatrix) -> CMatrix {
    kron(&b.t().to_owned(), &identity(b.nrows()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Site,
    Eigen,
}

/// Linear map on vectorized `dim × dim` matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    matrix: CMatrix,
    dim: usize,
    basis: Basis,
}

impl Superoperator {
    pub fn new(matrix: CMatrix, basis: Basis) -> Result<Self> {
        let n = check_square(&matrix, "superoperator")?;
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::Dimension(format!(
                "superoperator size {n} is not a perfect square"
            )));
        }
        Ok(Superoperator { matrix, dim, basis })
    }

    pub fn zeros(dim: usize, basis: Basis) -> Self {
        Superoperator {
            matrix: CMatrix::zeros((dim * dim, dim * dim)),
            dim,
            basis,
        }
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn commutator(h: &CMatrix, basis: Basis) -> Self {
        let mi = C64::new(0.0, -1.0);
        let m = (left(h) - right(h)).mapv(|z| z * mi);
        Superoperator {
            dim: h.nrows(),
            matrix: m,
            basis,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "superoperator of dimension {} applied to {}x{} matrix",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        devectorize(&self.matrix.dot(&vectorize(rho)))
    }

    /// Largest entry of `vec(I)† L`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        let mut err: f64 = 0.0;
        for col in 0..n {
            let mut s = ZERO;
            for i in 0..d {
                s += self.matrix[(i + i * d, col)];
            }
            err = err.max(s.norm());
        }
        err
    }

    /// Largest anti-Hermitian part of `L(X)` over the standard basis of
    /// Hermitian matrices `X`.
    pub fn hermiticity_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let mut x = CMatrix::zeros((d, d));
                x[(i, j)] = ONE;
                x[(j, i)] = ONE;
                err = err.max(hermiticity_error(&self.apply(&x).unwrap()));
                if i != j {
                    let mut y = CMatrix::zeros((d, d));
                    y[(i, j)] = C64::new(0.0, 1.0);
                    y[(j, i)] = C64::new(0.0, -1.0);
                    err = err.max(hermiticity_error(&self.apply(&y).unwrap()));
                }
            }
        }
        err
    }

    /// Re-expresses the map in the basis `ρ' = U† ρ U`:
    /// `L' vec(ρ') = vec(U† L(U ρ' U†) U)`.
    pub fn transform(&self, u: &CMatrix, basis: Basis) -> Result<Superoperator> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "basis change of dimension {} for superoperator of dimension {}",
                u.nrows(),
                self.dim
            )));
        }
        let ud = dagger(u);
        let into_old = sandwich(u, &ud);
        let out_of_old = sandwich(&ud, u);
        Ok(Superoperator {
            matrix: out_of_old.dot(&self.matrix).dot(&into_old),
            dim: self.dim,
            basis,
        })
    }
}
