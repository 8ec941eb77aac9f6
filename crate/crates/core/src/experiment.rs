//! Run orchestration shared by the command line tool and the test suites.

use crate::bath::{
    gamma_quadrature_oracle, matsubara_convergence, BathSpec, SpectralTensor, TensorVariant,
};
use crate::config::{PropagatorChoice, SimConfig};
use crate::error::{Error, Result};
use crate::generators::{
    build_coefficients, build_generator, build_jump_operators, Form, GeneratorKind,
};
use crate::operators::{
    eigendecompose, max_abs, max_abs_diff, CMatrix, DensityMatrix, EigenSystem, Superoperator,
};
use crate::output::{trajectory_csv, Manifest, PanelEntry, Ratios, TensorRow};
use crate::propagator::{
    default_rk4_step, propagate, propagate_rk4_on, relaxation_timescale, Trajectory,
};
use crate::units::{cm_to_rad_ps, rad_ps_to_cm};

pub struct Setup {
    pub eig: EigenSystem,
    pub rho0: DensityMatrix,
    pub times: Vec<f64>,
}

pub fn setup(cfg: &SimConfig) -> Result<Setup> {
    Ok(Setup {
        eig: eigendecompose(&cfg.hamiltonian, None)?,
        rho0: cfg.initial_state()?,
        times: cfg.times(),
    })
}

/// Propagates with the configured method.
pub fn run_generator(cfg: &SimConfig, s: &Setup, l: &Superoperator) -> Result<Trajectory> {
    let dt = cfg.rk4_dt.unwrap_or_else(|| default_rk4_step(l));
    match cfg.propagator {
        PropagatorChoice::Exact => propagate(l, &s.rho0, &s.times, dt),
        PropagatorChoice::Rk4 => propagate_rk4_on(l, &s.rho0, &s.times, dt),
    }
}

pub struct Simulation {
    pub kind: GeneratorKind,
    pub generator: Superoperator,
    pub trajectory: Trajectory,
}

pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    let s = setup(cfg)?;
    let kind = cfg.kind();
    let generator = build_generator(&s.eig, &cfg.bath, kind)?;
    let trajectory = run_generator(cfg, &s, &generator)?;
    Ok(Simulation {
        kind,
        generator,
        trajectory,
    })
}

/// File stem such as `three_level_lindblad_nonsecular_gamma2`.
pub fn run_stem(cfg: &SimConfig, kind: GeneratorKind) -> String {
    format!("{}_{}", cfg.model_name(), kind.label().replace('/', "_"))
}

pub fn generator_for(cfg: &SimConfig) -> Result<Superoperator> {
    let eig = eigendecompose(&cfg.hamiltonian, None)?;
    build_generator(&eig, &cfg.bath, cfg.kind())
}

const fn panel(form: Form, secular: bool, variant: TensorVariant) -> GeneratorKind {
    GeneratorKind {
        form,
        secular,
        variant,
    }
}

/// Comparison panels a–h.
pub const PANELS: [(&str, GeneratorKind); 8] = [
    ("a", panel(Form::Lindblad, false, TensorVariant::Gamma2)),
    ("b", panel(Form::Redfield, false, TensorVariant::Gamma2)),
    ("c", panel(Form::Lindblad, false, TensorVariant::Gamma1)),
    ("d", panel(Form::Redfield, false, TensorVariant::Gamma1)),
    ("e", panel(Form::Lindblad, true, TensorVariant::Gamma2)),
    ("f", panel(Form::Redfield, true, TensorVariant::Gamma2)),
    ("g", panel(Form::Lindblad, true, TensorVariant::Gamma1)),
    ("h", panel(Form::Redfield, true, TensorVariant::Gamma1)),
];

pub struct PanelData {
    pub trajectory: Trajectory,
    pub timescale: Option<f64>,
}

pub struct PanelRun {
    pub label: &'static str,
    pub kind: GeneratorKind,
    pub outcome: Result<PanelData>,
}

pub struct CompareRun {
    pub panels: Vec<PanelRun>,
    pub ratios: Ratios,
}

impl CompareRun {
    pub fn panel(&self, label: &str) -> Option<&PanelData> {
        self.panels
            .iter()
            .find(|p| p.label == label)
            .and_then(|p| p.outcome.as_ref().ok())
    }

    pub fn timescale(&self, label: &str) -> Option<f64> {
        self.panel(label).and_then(|p| p.timescale)
    }

    pub fn all_succeeded(&self) -> bool {
        self.panels.iter().all(|p| p.outcome.is_ok())
    }
}

fn run_panel(cfg: &SimConfig, s: &Setup, kind: GeneratorKind) -> Result<PanelData> {
    let l = build_generator(&s.eig, &cfg.bath, kind)?;
    let trajectory = run_generator(cfg, s, &l)?;
    let timescale = match relaxation_timescale(&l) {
        Ok(t) => Some(t),
        Err(Error::NoDecayingMode) => None,
        Err(e) => return Err(e),
    };
    Ok(PanelData {
        trajectory,
        timescale,
    })
}

/// Runs all eight panels; a failing panel does not stop the others.
pub fn compare(cfg: &SimConfig) -> Result<CompareRun> {
    let s = setup(cfg)?;
    let panels: Vec<PanelRun> = PANELS
        .iter()
        .map(|&(label, kind)| PanelRun {
            label,
            kind,
            outcome: run_panel(cfg, &s, kind),
        })
        .collect();
    let mut run = CompareRun {
        panels,
        ratios: Ratios::default(),
    };
    let (a, c, e) = (run.timescale("a"), run.timescale("c"), run.timescale("e"));
    run.ratios = Ratios {
        secular_slowdown: a.zip(e).map(|(a, e)| e / a),
        gamma1_compression: a.zip(c).map(|(a, c)| a / c),
    };
    Ok(run)
}

pub fn panel_file(label: &str) -> String {
    format!("panel_{label}.csv")
}

/// CSV contents per panel file plus the manifest describing them.
pub fn compare_outputs(cfg: &SimConfig, run: &CompareRun) -> (Vec<(String, String)>, Manifest) {
    let pairs = cfg.elements.pairs(cfg.dim());
    let mut files = Vec::new();
    let mut panels = std::collections::BTreeMap::new();
    for p in &run.panels {
        let file = panel_file(p.label);
        let entry = match &p.outcome {
            Ok(d) => {
                files.push((file.clone(), trajectory_csv(&d.trajectory, &pairs)));
                PanelEntry {
                    file,
                    form: p.kind.form.name().into(),
                    secular: p.kind.secular,
                    variant: p.kind.variant.name().into(),
                    status: "ok".into(),
                    timescale_ps: d.timescale,
                    method: Some(d.trajectory.method().name().into()),
                    error: None,
                }
            }
            Err(e) => PanelEntry {
                file,
                form: p.kind.form.name().into(),
                secular: p.kind.secular,
                variant: p.kind.variant.name().into(),
                status: "failed".into(),
                timescale_ps: None,
                method: None,
                error: Some(e.to_string()),
            },
        };
        panels.insert(p.label.to_string(), entry);
    }
    let manifest = Manifest {
        model: cfg.model_name().into(),
        dim: cfg.dim(),
        t_final_ps: cfg.t_final,
        samples: cfg.samples,
        max_asymmetry_cm: cfg.hamiltonian.max_asymmetry_cm(),
        ratios: run.ratios.clone(),
        panels,
    };
    (files, manifest)
}

/// 25 detunings in `[−3Ω, 3Ω]` (rad·ps⁻¹): the 24 nonzero points of a
/// uniform 25-point grid plus `Ω/100`, the edge of the excluded band.
pub fn comparison_grid(omega_c: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..25)
        .map(|k| omega_c * (-3.0 + 6.0 * k as f64 / 24.0))
        .filter(|d| d.abs() >= omega_c / 100.0)
        .collect();
    grid.push(omega_c / 100.0);
    grid.sort_by(f64::total_cmp);
    grid
}

/// Default `tensor` grid in cm⁻¹: the comparison grid plus Δ = 0.
pub fn default_tensor_grid_cm(spec: &BathSpec) -> Vec<f64> {
    let mut g: Vec<f64> = comparison_grid(spec.omega_c())
        .into_iter()
        .map(rad_ps_to_cm)
        .collect();
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g
}

fn relative_to(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Both variants against the quadrature oracle at each `Δ` (cm⁻¹). Errors
/// are normalized by `|Γ_oracle|`.
pub fn tensor_table(spec: &BathSpec, grid_cm: &[f64]) -> Result<Vec<TensorRow>> {
    let mut rows = Vec::with_capacity(2 * grid_cm.len());
    for &d_cm in grid_cm {
        let d = cm_to_rad_ps(d_cm);
        let oracle = gamma_quadrature_oracle(spec, d)?.value;
        let scale = oracle.norm();
        for variant in [TensorVariant::Gamma1, TensorVariant::Gamma2] {
            let g = spec.with_variant(variant).gamma(d);
            rows.push(TensorRow {
                delta_cm: d_cm,
                variant: variant.name(),
                re: rad_ps_to_cm(g.re),
                im: rad_ps_to_cm(g.im),
                oracle_re: rad_ps_to_cm(oracle.re),
                oracle_im: rad_ps_to_cm(oracle.im),
                rel_err_re: relative_to((g.re - oracle.re).abs(), scale),
                rel_err_im: relative_to((g.im - oracle.im).abs(), scale),
            });
        }
    }
    Ok(rows)
}

/// Closed-form value and oracle estimate of one term.
#[derive(Clone, Copy, Debug)]
pub struct TermPair {
    pub closed: f64,
    pub oracle: f64,
}

impl TermPair {
    pub fn relative_error(&self, scale: f64) -> f64 {
        relative_to((self.closed - self.oracle).abs(), scale)
    }
}

/// D̄, f̄, κ̄, γ̄ at `Δ`, each recovered from the oracle through its parity:
/// D̄ and κ̄ are even, f̄ and γ̄ odd.
#[derive(Clone, Copy, Debug)]
pub struct TermComparison {
    pub delta: f64,
    pub dbar: TermPair,
    pub fbar: TermPair,
    pub kappabar: TermPair,
    pub gammabar: TermPair,
}

pub fn term_comparison(spec: &BathSpec, delta: f64) -> Result<TermComparison> {
    let plus = gamma_quadrature_oracle(spec, delta)?.value;
    let minus = gamma_quadrature_oracle(spec, -delta)?.value;
    let t = spec.gamma2_terms(delta);
    Ok(TermComparison {
        delta,
        dbar: TermPair {
            closed: t.dbar,
            oracle: 0.5 * (plus.re + minus.re),
        },
        gammabar: TermPair {
            closed: t.gammabar,
            oracle: 0.5 * (plus.re - minus.re),
        },
        fbar: TermPair {
            closed: t.fbar,
            oracle: 0.5 * (plus.im - minus.im),
        },
        kappabar: TermPair {
            closed: t.kappabar,
            oracle: -0.5 * (plus.im + minus.im),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    /// The tolerance is a lower bound rather than an upper one.
    pub lower_bound: bool,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Check {
            name,
            measured,
            tolerance,
            lower_bound: false,
            status: if measured <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            note: String::new(),
        }
    }

    fn at_least(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Check {
            lower_bound: true,
            status: if measured >= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            ..Check::at_most(name, measured, tolerance)
        }
    }

    fn skipped(name: &'static str, tolerance: f64, note: &str) -> Self {
        Check {
            name,
            measured: f64::NAN,
            tolerance,
            lower_bound: false,
            status: Status::Skipped,
            note: note.into(),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = note;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let cmp = if c.lower_bound { ">=" } else { "<=" };
            let measured = match c.status {
                Status::Skipped => "-".to_string(),
                _ => format!("{:.3e}", c.measured),
            };
            out.push_str(&format!(
                "{tag} {:<34} {measured:>11} {cmp} {:.1e}",
                c.name, c.tolerance
            ));
            if !c.note.is_empty() {
                out.push_str("  ");
                out.push_str(&c.note);
            }
            out.push('\n');
        }
        out
    }
}

fn rel_max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    relative_to(max_abs_diff(a, b), max_abs(a).max(max_abs(b)))
}

/// Bath checks for one bath; dissipative checks are skipped when η = 0.
pub fn bath_checks(spec: &BathSpec) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let grid = comparison_grid(spec.omega_c());
    if spec.eta() == 0.0 {
        for (name, tol) in [
            ("real_part_identity", 1e-8),
            ("detailed_balance", 1e-8),
            ("closed_form_vs_oracle", 1e-3),
            ("matsubara_convergence", 1e-6),
        ] {
            checks.push(Check::skipped(name, tol, "no coupling"));
        }
        return Ok(checks);
    }

    let mut identity: f64 = 0.0;
    let mut balance: f64 = 0.0;
    for &d in &grid {
        let g1 = rad_ps_to_cm(spec.gamma1(d));
        let g2 = rad_ps_to_cm(spec.gamma2(d).re);
        identity = identity.max((g2 - g1).abs() / g1.abs().max(1.0));
        if d > 0.0 {
            let expect = (d / spec.kt()).exp();
            for v in [TensorVariant::Gamma1, TensorVariant::Gamma2] {
                let s = spec.with_variant(v);
                let ratio = s.gamma(d).re / s.gamma(-d).re;
                balance = balance.max((ratio - expect).abs() / expect);
            }
        }
    }
    checks.push(Check::at_most("real_part_identity", identity, 1e-8));
    checks.push(Check::at_most("detailed_balance", balance, 1e-8));

    let mut worst: f64 = 0.0;
    let mut worst_delta = grid[0];
    for &d in &grid {
        let o = gamma_quadrature_oracle(spec, d)?.value;
        let g = spec.gamma2(d);
        let e = ((g.re - o.re).abs().max((g.im - o.im).abs())) / o.norm();
        if e > worst {
            worst = e;
            worst_delta = d;
        }
    }
    let mut oracle_check = Check::at_most("closed_form_vs_oracle", worst, 1e-3);
    if oracle_check.status == Status::Fail {
        let t = term_comparison(spec, worst_delta)?;
        let scale = spec.gamma2(worst_delta).norm();
        oracle_check = oracle_check.with_note(format!(
            "at {:.4} cm^-1: dbar {:.2e} fbar {:.2e} kappabar {:.2e} gammabar {:.2e}",
            rad_ps_to_cm(worst_delta),
            t.dbar.relative_error(scale),
            t.fbar.relative_error(scale),
            t.kappabar.relative_error(scale),
            t.gammabar.relative_error(scale)
        ));
    }
    checks.push(oracle_check);

    let mut mgrid = grid.clone();
    mgrid.push(0.0);
    let conv = matsubara_convergence(spec, &mgrid)?;
    checks.push(
        Check::at_most("matsubara_convergence", conv.max_rel_change(), 1e-6).with_note(format!(
            "N = {} -> {}, worst at {:.4} cm^-1",
            spec.matsubara_n(),
            2 * spec.matsubara_n(),
            rad_ps_to_cm(conv.worst_delta)
        )),
    );
    Ok(checks)
}

/// Bath and generator checks for the configured system.
pub fn validate(cfg: &SimConfig) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let s = setup(cfg)?;
    let eig = &s.eig;
    let dissipative = cfg.bath.eta() > 0.0;

    // coherent checks
    let h = cfg.hamiltonian.matrix();
    let u = eig.vectors();
    let lam = CMatrix::from_diag(&eig.energies().mapv(|e| num_complex::Complex64::new(e, 0.0)));
    report.checks.push(Check::at_most(
        "eigen_residual",
        relative_to(max_abs_diff(&h.dot(u), &u.dot(&lam)), max_abs(h)),
        1e-10,
    ));
    let jumps = build_jump_operators(eig);
    report.checks.push(Check::at_most(
        "jump_operator_completeness",
        jumps.completeness_error(),
        1e-12,
    ));

    report.checks.extend(bath_checks(&cfg.bath)?);

    let mut equiv = [0.0_f64; 2];
    let mut secular_equiv: f64 = 0.0;
    let mut trace: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for (i, variant) in [TensorVariant::Gamma1, TensorVariant::Gamma2]
        .into_iter()
        .enumerate()
    {
        for secular in [false, true] {
            let l = build_generator(eig, &cfg.bath, panel(Form::Lindblad, secular, variant))?;
            let r = build_generator(eig, &cfg.bath, panel(Form::Redfield, secular, variant))?;
            let d = rel_max_diff(l.matrix(), r.matrix());
            if secular {
                secular_equiv = secular_equiv.max(d);
                if dissipative {
                    let traj = run_generator(cfg, &s, &l)?;
                    min_eig = min_eig.min(traj.min_eigenvalue()?);
                }
            } else {
                equiv[i] = d;
            }
            for g in [&l, &r] {
                let scale = g.norm_max();
                trace = trace.max(g.trace_preservation_error() / scale);
                herm = herm.max(g.hermiticity_preservation_error() / scale);
            }
        }
    }
    report.checks.push(Check::at_most(
        "equivalence_nonsecular_gamma1",
        equiv[0],
        1e-10,
    ));
    report.checks.push(Check::at_most(
        "equivalence_nonsecular_gamma2",
        equiv[1],
        1e-10,
    ));
    report
        .checks
        .push(Check::at_most("equivalence_secular", secular_equiv, 1e-10));
    report
        .checks
        .push(Check::at_most("trace_preservation", trace, 1e-10));
    report
        .checks
        .push(Check::at_most("hermiticity_preservation", herm, 1e-10));

    if dissipative {
        let tensor = SpectralTensor::from_bath(&cfg.bath, eig.bohr(), eig.dim());
        let coeffs = build_coefficients(&tensor, eig.bohr())?.secular_restriction();
        let min_rate = (0..eig.dim())
            .flat_map(|a| (0..eig.bohr().len()).map(move |w| (a, w)))
            .map(|(a, w)| coeffs.chi(a)[(w, w)].re)
            .fold(f64::INFINITY, f64::min);
        report
            .checks
            .push(Check::at_least("gksl_rates_nonnegative", min_rate, 0.0));
        report.checks.push(Check::at_least(
            "min_eigenvalue_secular_lindblad",
            min_eig,
            -1e-8,
        ));
    } else {
        report
            .checks
            .push(Check::skipped("gksl_rates_nonnegative", 0.0, "no coupling"));
        report.checks.push(Check::skipped(
            "min_eigenvalue_secular_lindblad",
            -1e-8,
            "no coupling",
        ));
        for c in report.checks.iter_mut().rev().take(2) {
            c.lower_bound = true;
        }
    }
    Ok(report)
}
