use ndarray::array;
use num_complex::Complex64 as C64;
use openq::bath::{SpectralTensor, TensorVariant};
use openq::error::Error;
use openq::generators::{build_generator, build_lindblad, Form, GeneratorKind};
use openq::models::three_level;
use openq::operators::{
    eigendecompose, max_abs_diff, Basis, CMatrix, DensityMatrix, EigenSystem, Superoperator,
};
use openq::propagator::*;

fn setup() -> (EigenSystem, openq::bath::BathSpec) {
    let m = three_level();
    (eigendecompose(&m.hamiltonian, None).unwrap(), m.bath)
}

fn generator(form: Form, secular: bool, variant: TensorVariant) -> Superoperator {
    let (eig, bath) = setup();
    build_generator(
        &eig,
        &bath,
        GeneratorKind {
            form,
            secular,
            variant,
        },
    )
    .unwrap()
}

fn rho0() -> DensityMatrix {
    DensityMatrix::basis_state(3, 0).unwrap()
}

#[test]
fn starts_exactly_at_initial_state() {
    let l = generator(Form::Lindblad, false, TensorVariant::Gamma2);
    let traj = propagate_exact(&l, &rho0(), &[0.0, 1.0]).unwrap();
    assert_eq!(&traj.states()[0], rho0().matrix());
    assert_eq!(traj.method(), Method::Exact);
}

#[test]
fn eigenstate_is_stationary_under_commutator() {
    let (eig, _) = setup();
    let h = eig.to_site(&CMatrix::from_diag(
        &eig.energies().mapv(|e| C64::new(e, 0.0)),
    ));
    let l = Superoperator::commutator(&h, Basis::Site);
    let p = eig.projector(1);
    let traj = propagate_exact(
        &l,
        &DensityMatrix::new(p.clone()).unwrap(),
        &uniform_grid(5.0, 11),
    )
    .unwrap();
    for s in traj.states() {
        assert!(max_abs_diff(s, &p) < 1e-12);
    }
}

#[test]
fn semigroup_property() {
    let l = generator(Form::Redfield, false, TensorVariant::Gamma2);
    let (t1, t2) = (0.7, 1.9);
    let direct = propagate_exact(&l, &rho0(), &[t1 + t2]).unwrap();
    let half = propagate_exact(&l, &rho0(), &[t1]).unwrap();
    let mid = DensityMatrix::new(half.states()[0].clone()).unwrap();
    let two_step = propagate_exact(&l, &mid, &[t2]).unwrap();
    assert!(max_abs_diff(&direct.states()[0], &two_step.states()[0]) < 1e-10);
}

#[test]
fn rk4_agrees_with_exact_and_is_fourth_order() {
    let l = generator(Form::Lindblad, false, TensorVariant::Gamma2);
    let grid = uniform_grid(5.0, 51);
    let exact = propagate_exact(&l, &rho0(), &grid).unwrap();
    let dt0 = default_rk4_step(&l);
    let rk = propagate_rk4_on(&l, &rho0(), &grid, dt0).unwrap();
    assert!(exact.max_abs_diff(&rk).unwrap() < 1e-7);

    let errs: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01]
        .iter()
        .map(|&dt| {
            let rk = propagate_rk4(&l, &rho0(), 5.0, dt).unwrap();
            let ex = propagate_exact(&l, &rho0(), rk.times()).unwrap();
            (dt, ex.max_abs_diff(&rk).unwrap())
        })
        .collect();
    let order = (errs[0].1 / errs[3].1).log10() / (errs[0].0 / errs[3].0).log10();
    assert!(
        (3.7..=4.3).contains(&order),
        "order {order}, errors {errs:?}"
    );
}

#[test]
fn rk4_zero_generator_is_constant() {
    let l = Superoperator::zeros(3, Basis::Site);
    let traj = propagate_rk4(&l, &rho0(), 1.0, 0.1).unwrap();
    assert_eq!(traj.len(), 11);
    for s in traj.states() {
        assert_eq!(s, rho0().matrix());
    }
}

#[test]
fn rk4_preserves_spectrum_under_commutator() {
    let (eig, _) = setup();
    let h = eig.to_site(&CMatrix::from_diag(
        &eig.energies().mapv(|e| C64::new(e, 0.0)),
    ));
    let l = Superoperator::commutator(&h, Basis::Site);
    let mixed = DensityMatrix::new(array![
        [C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.0, 0.0)],
        [C64::new(0.1, -0.2), C64::new(0.3, 0.0), C64::new(0.05, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.05, 0.0), C64::new(0.2, 0.0)]
    ])
    .unwrap();
    use ndarray_linalg::{EigValsh, UPLO};
    let before = mixed.matrix().eigvalsh(UPLO::Upper).unwrap();
    let traj = propagate_rk4(&l, &mixed, 5.0, 0.01).unwrap();
    let after = traj.last().unwrap().eigvalsh(UPLO::Upper).unwrap();
    for (a, b) in before.iter().zip(after.iter()) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn rk4_aborts_on_trace_drift() {
    // a generator that leaks trace
    let mut m = CMatrix::zeros((4, 4));
    m[(0, 0)] = C64::new(-1.0, 0.0);
    let l = Superoperator::new(m, Basis::Site).unwrap();
    let r = propagate_rk4(&l, &DensityMatrix::basis_state(2, 0).unwrap(), 1.0, 0.01);
    assert!(matches!(r, Err(Error::TraceDrift { .. })));
}

#[test]
fn trajectory_invariants_for_all_generators() {
    for form in [Form::Lindblad, Form::Redfield] {
        for secular in [false, true] {
            for variant in [TensorVariant::Gamma1, TensorVariant::Gamma2] {
                let l = generator(form, secular, variant);
                let traj =
                    propagate(&l, &rho0(), &uniform_grid(5.0, 500), default_rk4_step(&l)).unwrap();
                assert!(traj.max_trace_error() <= 1e-8);
                assert!(traj.max_hermiticity_error() <= 1e-10);
                if secular && form == Form::Lindblad {
                    assert!(traj.min_eigenvalue().unwrap() >= -1e-8);
                }
            }
        }
    }
}

#[test]
fn stationary_state_of_secular_lindblad() {
    let (eig, bath) = setup();
    let t = SpectralTensor::from_bath(&bath.with_variant(TensorVariant::Gamma1), eig.bohr(), 3);
    let l = build_lindblad(&eig, &t, true).unwrap();
    let ss = stationary_state(&l).unwrap();
    assert!(
        max_abs_diff(&l.apply(ss.matrix()).unwrap(), &CMatrix::zeros((3, 3))) < 1e-9 * l.norm_max()
    );

    // Boltzmann populations in the eigenbasis
    let pe = eig.to_eigen(ss.matrix());
    let e = eig.energies();
    for n in 1..3 {
        let ratio = pe[(n, n)].re / pe[(0, 0)].re;
        let expect = (-(e[n] - e[0]) / bath.kt()).exp();
        assert!(
            (ratio - expect).abs() < 1e-8 * expect,
            "{ratio} vs {expect}"
        );
    }

    let tau = relaxation_timescale(&l).unwrap();
    let late = propagate_exact(&l, &rho0(), &[200.0 * tau]).unwrap();
    assert!(max_abs_diff(&late.states()[0], ss.matrix()) < 1e-6);
}

#[test]
fn closed_system_has_degenerate_null_space() {
    let (eig, _) = setup();
    let t = SpectralTensor::zeros(eig.bohr(), 3);
    let l = build_lindblad(&eig, &t, false).unwrap();
    assert!(matches!(
        stationary_state(&l),
        Err(Error::DegenerateNullSpace { multiplicity: 3 })
    ));
    assert!(matches!(
        relaxation_timescale(&l),
        Err(Error::NoDecayingMode)
    ));
}

#[test]
fn single_decay_channel_timescale() {
    // |1⟩ → |0⟩ at rate γ; coherences decay at γ/2
    let gamma = 0.37;
    let mut m = CMatrix::zeros((4, 4));
    m[(0, 3)] = C64::new(gamma, 0.0);
    m[(3, 3)] = C64::new(-gamma, 0.0);
    m[(1, 1)] = C64::new(-gamma / 2.0, 0.0);
    m[(2, 2)] = C64::new(-gamma / 2.0, 0.0);
    let l = Superoperator::new(m, Basis::Site).unwrap();
    let summary = spectral_summary(&l).unwrap();
    assert!((relaxation_timescale(&l).unwrap() - 2.0 / gamma).abs() < 1e-12);
    let mut rates = CMatrix::zeros((4, 4));
    rates[(0, 3)] = C64::new(gamma, 0.0);
    rates[(3, 3)] = C64::new(-gamma, 0.0);
    let pops = Superoperator::new(rates, Basis::Site).unwrap();
    assert!((relaxation_timescale(&pops).unwrap() - 1.0 / gamma).abs() < 1e-12);
    assert_eq!(summary.null_multiplicity, 1);
    assert_eq!(summary.growing, 0);
}

#[test]
fn timescale_is_basis_independent() {
    let (eig, _) = setup();
    let l = generator(Form::Lindblad, true, TensorVariant::Gamma2);
    let le = l.transform(eig.vectors(), Basis::Eigen).unwrap();
    let (a, b) = (
        relaxation_timescale(&l).unwrap(),
        relaxation_timescale(&le).unwrap(),
    );
    assert!((a - b).abs() < 1e-8 * a);
}

#[test]
fn uniform_grid_endpoints() {
    let g = uniform_grid(5.0, 500);
    assert_eq!(g.len(), 500);
    assert_eq!(g[0], 0.0);
    assert_eq!(g[499], 5.0);
    assert!(uniform_grid(1.0, 0).is_empty());
}
