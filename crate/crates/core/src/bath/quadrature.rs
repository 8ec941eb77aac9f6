//! Globally adaptive Gauss–Legendre quadrature for complex integrands.
//!
//! Each panel is integrated with a 20-point rule; the difference to the
//! 10-point rule on the same panel is the error estimate. The panel with the
//! largest estimate is bisected until the total estimate meets the tolerance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Nodes and weights on [−1, 1] by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(20)))
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Panel {
    let (coarse, fine) = rules();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let apply = |r: &Rule| -> C64 {
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| f(mid + half * x) * w)
            .sum::<C64>()
            * half
    };
    let lo = apply(coarse);
    let hi = apply(fine);
    Panel {
        a,
        b,
        value: hi,
        error: (hi - lo).norm(),
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// delimited by `breaks` (ascending).
pub fn integrate<F: Fn(f64) -> C64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| panel(&f, w[0], w[1]))
        .collect();
    let per_panel = 30;
    let mut evaluations = panels.len() * per_panel;
    loop {
        let total: C64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if error <= target {
            return Ok(Quadrature {
                value: total,
                error,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // panel cannot be split any further in floating point
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        panels.push(panel(&f, p.a, mid));
        panels.push(panel(&f, mid, p.b));
        evaluations += 2 * per_panel;
    }
}
