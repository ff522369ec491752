use super::QuadraticSystem;
use crate::error::{Error, Result};
use crate::linalg::symplectic_defect;
use nalgebra::{DMatrix, SymmetricEigen};

/// Phase-space propagator (X, P)(t_start) -> (X, P)(t_end).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPropagator {
    pub matrix: DMatrix<f64>,
    pub t_start: f64,
    pub t_end: f64,
}

impl SymplecticPropagator {
    pub fn identity(n: usize, t: f64) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n, 2 * n),
            t_start: t,
            t_end: t,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// max |S^T J S - J|
    pub fn defect(&self) -> f64 {
        symplectic_defect(&self.matrix)
    }

    /// Propagator for t_start -> other.t_end, `other` following `self`.
    pub fn then(&self, other: &SymplecticPropagator) -> SymplecticPropagator {
        SymplecticPropagator {
            matrix: &other.matrix * &self.matrix,
            t_start: self.t_start,
            t_end: other.t_end,
        }
    }
}

impl SymplecticPropagator {
    /// `count` repetitions of this propagator, for a stiffness periodic with
    /// period t_end - t_start.
    pub fn power(&self, count: usize) -> SymplecticPropagator {
        let n = self.matrix.nrows();
        let mut acc = DMatrix::identity(n, n);
        let mut base = self.matrix.clone();
        let mut k = count;
        while k > 0 {
            if k & 1 == 1 {
                acc = &base * &acc;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        SymplecticPropagator {
            matrix: acc,
            t_start: self.t_start,
            t_end: self.t_start + count as f64 * (self.t_end - self.t_start),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Fourth-order commutator-free Magnus with step-doubling error control.
    AdaptiveMagnus,
    /// Yoshida fourth-order composition of leapfrog, fixed step.
    FixedYoshida { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub method: Method,
    /// Local relative error target per accepted step.
    pub rel_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Largest accepted symplectic defect of the result.
    pub symplectic_tol: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveMagnus,
            rel_tol: 1e-10,
            min_step: 1e-10,
            max_step: f64::INFINITY,
            symplectic_tol: 1e-8,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            method: Method::FixedYoshida { step },
            ..Self::default()
        }
    }
}

/// Exact flow of the static Hamiltonian P^2/2m + X^T K X/2 over time `tau`.
/// Negative eigenvalues give hyperbolic blocks.
pub fn harmonic_flow(k: &DMatrix<f64>, mass: f64, tau: f64) -> DMatrix<f64> {
    let n = k.nrows();
    let eig = SymmetricEigen::new(0.5 * (k + k.transpose()));
    let g = &eig.eigenvectors;
    let mut cx = Vec::with_capacity(n);
    let mut sx = Vec::with_capacity(n);
    let mut sp = Vec::with_capacity(n);
    for &lam in eig.eigenvalues.iter() {
        let w2 = lam / mass;
        let th2 = w2 * tau * tau;
        let (c, s1, s2) = if th2.abs() < 1e-4 {
            // series shared by the oscillating and hyperbolic branches
            let c = 1.0 - th2 / 2.0 + th2 * th2 / 24.0 - th2 * th2 * th2 / 720.0;
            let sinc = 1.0 - th2 / 6.0 + th2 * th2 / 120.0 - th2 * th2 * th2 / 5040.0;
            (c, tau / mass * sinc, -mass * w2 * tau * sinc)
        } else if w2 > 0.0 {
            let w = w2.sqrt();
            let (s, c) = (w * tau).sin_cos();
            (c, s / (mass * w), -mass * w * s)
        } else {
            let kappa = (-w2).sqrt();
            let (s, c) = ((kappa * tau).sinh(), (kappa * tau).cosh());
            (c, s / (mass * kappa), mass * kappa * s)
        };
        cx.push(c);
        sx.push(s1);
        sp.push(s2);
    }
    let block = |d: &[f64]| {
        let mut gd = g.clone();
        for (j, &v) in d.iter().enumerate() {
            gd.column_mut(j).scale_mut(v);
        }
        gd * g.transpose()
    };
    let xx = block(&cx);
    let xp = block(&sx);
    let px = block(&sp);
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&xx);
    s.view_mut((0, n), (n, n)).copy_from(&xp);
    s.view_mut((n, 0), (n, n)).copy_from(&px);
    s.view_mut((n, n), (n, n)).copy_from(&xx);
    s
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// One commutator-free Magnus step of order four on [t, t+h].
fn cf4_step(sys: &QuadraticSystem, t: f64, h: f64) -> DMatrix<f64> {
    let c1 = 0.5 - SQRT3 / 6.0;
    let c2 = 0.5 + SQRT3 / 6.0;
    let a1 = 0.25 + SQRT3 / 6.0;
    let a2 = 0.25 - SQRT3 / 6.0;
    let k1 = sys.stiffness(t + c1 * h);
    let k2 = sys.stiffness(t + c2 * h);
    let first = harmonic_flow(&((&k1 * a1 + &k2 * a2) * 2.0), sys.mass(), 0.5 * h);
    let second = harmonic_flow(&((&k1 * a2 + &k2 * a1) * 2.0), sys.mass(), 0.5 * h);
    second * first
}

/// Solve dX/dt = P/m, dP/dt = -K(t) X for the full fundamental matrix.
pub fn propagate(
    sys: &QuadraticSystem,
    t_start: f64,
    t_end: f64,
    control: &StepControl,
) -> Result<SymplecticPropagator> {
    if !(t_end >= t_start) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "propagation interval [{t_start}, {t_end}] is not ordered"
        )));
    }
    let n = sys.n_modes();
    let mut out = SymplecticPropagator::identity(n, t_start);
    out.t_end = t_end;
    if t_end == t_start {
        return Ok(out);
    }
    let mut cuts = vec![t_start];
    if let Some(p) = sys.protocol() {
        for b in [p.t1, p.t2] {
            if b > t_start && b < t_end {
                cuts.push(b);
            }
        }
    }
    cuts.push(t_end);

    let mut s = DMatrix::identity(2 * n, 2 * n);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg = if sys.is_static_on(a, b) {
            let k = sys.stiffness(0.5 * (a + b));
            harmonic_flow(&k, sys.mass(), b - a)
        } else {
            match control.method {
                Method::AdaptiveMagnus => adaptive_segment(sys, a, b, control)?,
                Method::FixedYoshida { step } => yoshida_segment(sys, a, b, step)?,
            }
        };
        s = seg * s;
    }
    out.matrix = s;
    let defect = out.defect();
    if !(defect <= control.symplectic_tol) {
        return Err(Error::SymplecticDefect {
            defect,
            tolerance: control.symplectic_tol,
        });
    }
    Ok(out)
}

fn adaptive_segment(sys: &QuadraticSystem, a: f64, b: f64, control: &StepControl) -> Result<DMatrix<f64>> {
    let n = sys.n_modes();
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let mut t = a;
    // slivers shorter than the minimum step are taken in one step
    let mut h = ((b - a) / 8.0).min(1.0).min(control.max_step).max((b - a).min(control.min_step));
    while t < b {
        let last = t + h >= b;
        let step = if last { b - t } else { h };
        let full = cf4_step(sys, t, step);
        let half = cf4_step(sys, t + 0.5 * step, 0.5 * step) * cf4_step(sys, t, 0.5 * step);
        let err = (&half - &full).amax() / 15.0;
        let scale = half.amax().max(1.0);
        let ratio = err / (control.rel_tol * scale);
        if !ratio.is_finite() {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite propagator".into(),
            });
        }
        if ratio <= 1.0 {
            // local extrapolation is not symplectic; keep the doubled step
            s = half * s;
            t = if last { b } else { t + step };
        }
        let factor = (0.9 * ratio.max(1e-12).powf(-0.2)).clamp(0.2, 4.0);
        h = (step * factor).min(control.max_step);
        if h < control.min_step && b - t <= control.min_step {
            h = b - t;
        } else if h < control.min_step && t < b {
            return Err(Error::Integration {
                time: t,
                reason: format!("step size {h:.3e} below minimum {:.3e}", control.min_step),
            });
        }
    }
    Ok(s)
}

fn yoshida_segment(sys: &QuadraticSystem, a: f64, b: f64, step: f64) -> Result<DMatrix<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("fixed step must be positive, got {step}")));
    }
    let n = sys.n_modes();
    let m = sys.mass();
    let steps = ((b - a) / step).ceil().max(1.0) as usize;
    let h = (b - a) / steps as f64;
    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 * w1;
    let weights = [w1, w0, w1];
    let mut x = DMatrix::<f64>::zeros(n, 2 * n);
    let mut p = DMatrix::<f64>::zeros(n, 2 * n);
    for i in 0..n {
        x[(i, i)] = 1.0;
        p[(i, n + i)] = 1.0;
    }
    let mut t = a;
    for _ in 0..steps {
        for &w in &weights {
            let dt = w * h;
            x += &p * (0.5 * dt / m);
            t += 0.5 * dt;
            p -= sys.stiffness(t) * &x * dt;
            x += &p * (0.5 * dt / m);
            t += 0.5 * dt;
        }
        if !x.iter().chain(p.iter()).all(|v| v.is_finite()) {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite propagator".into(),
            });
        }
    }
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, 2 * n)).copy_from(&x);
    s.view_mut((n, 0), (n, 2 * n)).copy_from(&p);
    Ok(s)
}
