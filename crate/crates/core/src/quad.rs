//! Quadrature and root-finding helpers shared by the physics modules.

use crate::error::{Error, Result};
use gauss_quad::legendre::GaussLegendre;
use roots::{find_root_brent, SimpleConvergency};
use std::num::NonZeroUsize;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(order.max(1)).unwrap();
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels of the given order.
pub fn composite_nodes(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * rule.len());
    let mut w = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(xi, wi) in &rule {
            x.push(lo + 0.5 * h * (xi + 1.0));
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}

/// Adaptive Gauss-Legendre integration comparing a 10- and 20-point rule with bisection.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    adaptive_rec(f, a, b, tol, &lo, &hi, 0)
}

fn rule_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    lo: &[(f64, f64)],
    hi: &[(f64, f64)],
    depth: usize,
) -> Result<f64> {
    let coarse = rule_sum(f, a, b, lo);
    let fine = rule_sum(f, a, b, hi);
    if !fine.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    let tiny = (b - a).abs() <= 1e-12 * (1.0 + a.abs() + b.abs());
    if (fine - coarse).abs() <= tol.max(1e-15 * fine.abs()) || tiny {
        return Ok(fine);
    }
    if depth >= 60 {
        return Err(Error::Quadrature { a, b });
    }
    let m = 0.5 * (a + b);
    Ok(adaptive_rec(f, a, m, 0.5 * tol, lo, hi, depth + 1)?
        + adaptive_rec(f, m, b, 0.5 * tol, lo, hi, depth + 1)?)
}

/// Brent root search on a bracket with absolute tolerance `tol`.
pub fn brent<F: FnMut(f64) -> f64>(lo: f64, hi: f64, tol: f64, f: F) -> Result<f64> {
    let mut conv = SimpleConvergency {
        eps: tol,
        max_iter: 200,
    };
    find_root_brent(lo, hi, f, &mut conv)
        .map_err(|e| Error::Root(format!("{e} on bracket [{lo:.12e}, {hi:.12e}]")))
}
