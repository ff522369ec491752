//! Ideal moving-mirror cavity solved through the Moore function R.
//!
//! The right mirror is fixed at r0 and the left one follows l(t). With the
//! distance x = r0 - z from the fixed mirror, the in-modes are
//! A_k = i/sqrt(2 pi k) [exp(-i pi k R(t + x)) - exp(-i pi k R(t - x))],
//! where R(u) = u/L0 before the drive and R(t + L(t)) = R(t - L(t)) + 2.

use crate::dynamics::StageProtocol;
use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::linalg::{cmax, complex_identity};
use crate::quad::{brent, composite_nodes};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Left mirror l(t) = l0 + delta sin^2(omega_D (t - t1)/2) on stage II,
/// frozen afterwards; right mirror fixed at r0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorTrajectory {
    pub l0: f64,
    pub r0: f64,
    pub delta: f64,
    pub omega_d: f64,
    pub protocol: StageProtocol,
}

impl MirrorTrajectory {
    pub fn new(l0: f64, r0: f64, delta: f64, omega_d: f64, protocol: StageProtocol) -> Result<Self> {
        let traj = Self {
            l0,
            r0,
            delta,
            omega_d,
            protocol,
        };
        traj.validate()?;
        Ok(traj)
    }

    /// Static cavity [l0, r0].
    pub fn fixed(l0: f64, r0: f64, protocol: StageProtocol) -> Result<Self> {
        Self::new(l0, r0, 0.0, 1.0, protocol)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0 > self.l0) {
            return Err(Error::InvalidParameter(format!("need r0 > l0, got {} and {}", self.r0, self.l0)));
        }
        if !(self.delta >= 0.0) || !(self.omega_d > 0.0) {
            return Err(Error::InvalidParameter("need delta >= 0 and omega_D > 0".into()));
        }
        let per_period = 1000.0;
        let period = 2.0 * PI / self.omega_d;
        let samples = ((self.protocol.duration() / period * per_period).ceil() as usize).max(1000);
        for k in 0..=samples {
            let t = self.protocol.t1 + self.protocol.duration() * k as f64 / samples as f64;
            if !(self.left(t) < self.r0) {
                return Err(Error::InvalidParameter(format!("mirrors cross at t = {t}")));
            }
        }
        if self.max_speed() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mirror speed {:.3} reaches the speed of light",
                self.max_speed()
            )));
        }
        Ok(())
    }

    pub fn max_speed(&self) -> f64 {
        0.5 * self.delta * self.omega_d
    }

    pub fn left(&self, t: f64) -> f64 {
        if t < self.protocol.t1 {
            return self.l0;
        }
        let tt = t.min(self.protocol.t2);
        let s = (0.5 * self.omega_d * (tt - self.protocol.t1)).sin();
        self.l0 + self.delta * s * s
    }

    pub fn left_velocity(&self, t: f64) -> f64 {
        if t < self.protocol.t1 || t >= self.protocol.t2 {
            return 0.0;
        }
        0.5 * self.delta * self.omega_d * (self.omega_d * (t - self.protocol.t1)).sin()
    }

    pub fn right(&self, _t: f64) -> f64 {
        self.r0
    }

    pub fn length(&self, t: f64) -> f64 {
        self.r0 - self.left(t)
    }

    pub fn initial_length(&self) -> f64 {
        self.r0 - self.l0
    }

    /// Same motion with the mirror stopped at `t_stop`.
    pub fn truncated(&self, t_stop: f64) -> Result<Self> {
        let p = self.protocol;
        let t2 = t_stop.min(p.t2);
        if !(t2 > p.t1) {
            return Err(Error::InvalidParameter(format!("stop time {t_stop} precedes the drive")));
        }
        Ok(Self {
            protocol: StageProtocol::new(p.t0, p.t1, t2)?,
            ..*self
        })
    }
}

/// Tabulated Moore function with exact values at the nodes.
#[derive(Debug, Clone)]
pub struct MooreFunction {
    traj: MirrorTrajectory,
    affine_end: f64,
    table: Option<Hermite>,
}

fn trace(traj: &MirrorTrajectory, u: f64) -> Result<(f64, f64)> {
    let l0 = traj.initial_length();
    let affine_end = traj.protocol.t1 + l0;
    let lmin = traj.r0 - (traj.l0 + traj.delta);
    let mut u = u;
    let mut n = 0.0;
    let mut slope = 1.0;
    while u >= affine_end {
        // reflection off the moving mirror: t + L(t) = u
        let (lo, hi) = (u - l0, u - lmin);
        let t = if hi - lo < 1e-14 * (1.0 + u.abs()) {
            lo
        } else {
            brent(lo, hi, 1e-12, |t| t + traj.length(t) - u)
                .map_err(|e| Error::Root(format!("ray u = {u}: {e}")))?
        };
        let lp = -traj.left_velocity(t);
        slope *= (1.0 - lp) / (1.0 + lp);
        u = t - traj.length(t);
        n += 2.0;
    }
    Ok((u / l0 + n, slope / l0))
}

impl MooreFunction {
    /// (R(u), R'(u)).
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        if u < self.affine_end {
            let l0 = self.traj.initial_length();
            return Ok((u / l0, 1.0 / l0));
        }
        match &self.table {
            Some(h) if u <= h.x_range().1 => Ok(h.eval(u)),
            _ => trace(&self.traj, u),
        }
    }

    /// Exact ray tracing, bypassing the table.
    pub fn exact(&self, u: f64) -> Result<(f64, f64)> {
        trace(&self.traj, u)
    }

    pub fn trajectory(&self) -> &MirrorTrajectory {
        &self.traj
    }
}

/// Tabulate R on [t1 + L0, u_max] with `resolution` nodes per unit of u.
pub fn build_moore_function(traj: &MirrorTrajectory, resolution: usize, u_max: f64) -> Result<MooreFunction> {
    let affine_end = traj.protocol.t1 + traj.initial_length();
    if traj.delta == 0.0 || u_max <= affine_end {
        return Ok(MooreFunction {
            traj: *traj,
            affine_end: if traj.delta == 0.0 { f64::INFINITY } else { affine_end },
            table: None,
        });
    }
    let nodes = (((u_max - affine_end) * resolution.max(1) as f64).ceil() as usize).max(2);
    let mut x = Vec::with_capacity(nodes + 1);
    let mut y = Vec::with_capacity(nodes + 1);
    let mut dy = Vec::with_capacity(nodes + 1);
    for k in 0..=nodes {
        let u = affine_end + (u_max - affine_end) * k as f64 / nodes as f64;
        let (r, dr) = trace(traj, u)?;
        x.push(u);
        y.push(r);
        dy.push(dr);
    }
    Ok(MooreFunction {
        traj: *traj,
        affine_end,
        table: Some(Hermite::new(x, y, dy)?),
    })
}

/// Evaluator of the k-th in-mode.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumMode<'a> {
    pub index: usize,
    pub mf: &'a MooreFunction,
}

impl ContinuumMode<'_> {
    pub fn eval(&self, t: f64, z: f64) -> Result<(Complex64, Complex64)> {
        mode_function(self.mf, self.index, t, z)
    }
}

/// (A_k, dA_k/dt) at (t, z).
pub fn mode_function(mf: &MooreFunction, k: usize, t: f64, z: f64) -> Result<(Complex64, Complex64)> {
    let traj = mf.trajectory();
    let (left, right) = (traj.left(t), traj.right(t));
    let slack = 1e-12 * (1.0 + left.abs().max(right.abs()));
    if k == 0 || z < left - slack || z > right + slack {
        return Err(Error::OutsideCavity { t, z, left, right });
    }
    let x = right - z;
    let (rp, dp) = mf.eval(t + x)?;
    let (rm, dm) = mf.eval(t - x)?;
    let kf = k as f64;
    let pre = Complex64::new(0.0, 1.0 / (2.0 * PI * kf).sqrt());
    let ep = Complex64::from_polar(1.0, -PI * kf * rp);
    let em = Complex64::from_polar(1.0, -PI * kf * rm);
    let a = pre * (ep - em);
    let da = pre * Complex64::new(0.0, -PI * kf) * (ep * dp - em * dm);
    Ok((a, da))
}

/// Composite Gauss-Legendre rule used for overlaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub panels: usize,
    pub order: usize,
}

/// {f1|f2} = integral of (f2 d_t f1 - f1 d_t f2) over [a, b] for real
/// fields given as z -> (value, time derivative).
pub fn symplectic_form<F1, F2>(f1: F1, f2: F2, interval: (f64, f64), quad: Quadrature) -> Result<f64>
where
    F1: Fn(f64) -> Result<(f64, f64)>,
    F2: Fn(f64) -> Result<(f64, f64)>,
{
    let (x, w) = composite_nodes(interval.0, interval.1, quad.panels, quad.order);
    let mut acc = 0.0;
    for (z, wz) in x.iter().zip(&w) {
        let (a, da) = f1(*z)?;
        let (b, db) = f2(*z)?;
        acc += wz * (b * da - a * db);
    }
    if !acc.is_finite() {
        return Err(Error::Quadrature {
            a: interval.0,
            b: interval.1,
        });
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MooreOptions {
    /// Out-modes reported.
    pub n_modes: usize,
    /// In-modes summed over; defaults to four times `n_modes`.
    pub in_modes: usize,
    /// Table nodes per unit of the null coordinate.
    pub resolution: usize,
    /// Gauss-Legendre panels per unit cavity length and per in-mode.
    pub panels_per_mode: usize,
    pub completeness_threshold: f64,
}

impl MooreOptions {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            in_modes: 4 * n_modes,
            resolution: 128,
            panels_per_mode: 4,
            completeness_threshold: 1e-3,
        }
    }
}

impl Default for MooreOptions {
    fn default() -> Self {
        Self::new(30)
    }
}

#[derive(Debug, Clone)]
pub struct MooreResult {
    pub t: f64,
    pub occupations: DVector<f64>,
    pub alpha: DMatrix<Complex64>,
    pub beta: DMatrix<Complex64>,
    /// max |aa^+ - bb^+ - I| over the reported modes.
    pub completeness_defect: f64,
    /// The same defect restricted to each out-mode's row.
    pub mode_defects: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Overlaps of the in-modes with the static modes of the instantaneous
/// cavity at time `t`. `beta` is the coefficient of the creation operators.
pub fn moore_bogoliubov(mf: &MooreFunction, t: f64, opts: &MooreOptions) -> Result<MooreResult> {
    if opts.n_modes == 0 || opts.in_modes == 0 {
        return Err(Error::InvalidParameter("need at least one mode".into()));
    }
    let traj = mf.trajectory();
    let len = traj.length(t);
    let panels = opts.panels_per_mode * opts.in_modes.max(opts.n_modes) + 16;
    let (xs, ws) = composite_nodes(0.0, len, panels, 8);
    let nq = xs.len();
    let nin = opts.in_modes;
    let nout = opts.n_modes;

    // e^{-i pi R(t +- x)} and R' at every node
    let mut bp = Vec::with_capacity(nq);
    let mut bm = Vec::with_capacity(nq);
    for &x in &xs {
        let (rp, dp) = mf.eval(t + x)?;
        let (rm, dm) = mf.eval(t - x)?;
        bp.push((Complex64::from_polar(1.0, -PI * rp), dp));
        bm.push((Complex64::from_polar(1.0, -PI * rm), dm));
    }
    let mut a = DMatrix::<Complex64>::zeros(nin, nq);
    let mut da = DMatrix::<Complex64>::zeros(nin, nq);
    for q in 0..nq {
        let (ep1, dp) = bp[q];
        let (em1, dm) = bm[q];
        let (mut ep, mut em) = (ep1, em1);
        for k in 0..nin {
            let kf = (k + 1) as f64;
            let pre = Complex64::new(0.0, 1.0 / (2.0 * PI * kf).sqrt());
            a[(k, q)] = pre * (ep - em);
            da[(k, q)] = pre * Complex64::new(0.0, -PI * kf) * (ep * dp - em * dm);
            ep *= ep1;
            em *= em1;
        }
    }
    // static out-modes B = sqrt(2/L) sin(pi l x/L)/sqrt(w), dB/dt = -i w B
    let mut b = DMatrix::<f64>::zeros(nout, nq);
    let mut omega = Vec::with_capacity(nout);
    for l in 0..nout {
        let w = PI * (l + 1) as f64 / len;
        omega.push(w);
        let c = (2.0 / len).sqrt() / w.sqrt();
        for q in 0..nq {
            b[(l, q)] = c * (PI * (l + 1) as f64 * xs[q] / len).sin() * ws[q];
        }
    }
    // alpha = (B, A)/2, beta = (B, A*)/2 with (f, g) = i int (f* g_t - f*_t g);
    // B is real, so the A* overlaps are conjugates of the A overlaps
    let bc = b.map(|v| Complex64::new(v, 0.0));
    let p = &bc * da.transpose();
    let q = &bc * a.transpose();
    let half_i = Complex64::new(0.0, 0.5);
    let mut alpha = DMatrix::<Complex64>::zeros(nout, nin);
    let mut beta = DMatrix::<Complex64>::zeros(nout, nin);
    for l in 0..nout {
        let iw = Complex64::new(0.0, omega[l]);
        for k in 0..nin {
            alpha[(l, k)] = half_i * (p[(l, k)] - iw * q[(l, k)]);
            beta[(l, k)] = half_i * (p[(l, k)].conj() - iw * q[(l, k)].conj());
        }
    }
    let occupations = DVector::from_iterator(
        nout,
        beta.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>()),
    );
    let unit = &alpha * alpha.adjoint() - &beta * beta.adjoint() - complex_identity(nout);
    let completeness_defect = cmax(&unit);
    let mode_defects = unit.row_iter().map(|r| r.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let mut warnings = Vec::new();
    if completeness_defect > opts.completeness_threshold {
        warnings.push(format!(
            "Moore completeness defect {completeness_defect:.3e} at t = {t:.6} exceeds {:.1e}; raise in_modes",
            opts.completeness_threshold
        ));
    }
    Ok(MooreResult {
        t,
        occupations,
        alpha,
        beta,
        completeness_defect,
        mode_defects,
        warnings,
    })
}

fn table_for(traj: &MirrorTrajectory, t_last: f64, opts: &MooreOptions) -> Result<MooreFunction> {
    build_moore_function(traj, opts.resolution, t_last + traj.initial_length() + 1.0)
}

/// Photon numbers after the drive (at t2) in the static modes of the final cavity.
pub fn moore_occupations(traj: &MirrorTrajectory, opts: &MooreOptions) -> Result<MooreResult> {
    let t = traj.protocol.t2;
    let mf = table_for(traj, t, opts)?;
    moore_bogoliubov(&mf, t, opts)
}

/// Photon numbers as if the mirror stopped at each sample time.
pub fn moore_timeseries(traj: &MirrorTrajectory, times: &[f64], opts: &MooreOptions) -> Result<Vec<MooreResult>> {
    let t_last = times.iter().copied().fold(traj.protocol.t0, f64::max);
    let mf = table_for(traj, t_last, opts)?;
    times.iter().map(|&t| moore_bogoliubov(&mf, t, opts)).collect()
}

/// One-period average of pi l / (r - l(t)) by the trapezoid rule.
pub fn average_frequency(traj: &MirrorTrajectory, l: usize, samples: usize) -> f64 {
    let n = samples.max(1000);
    let period = 2.0 * PI / traj.omega_d;
    let t1 = traj.protocol.t1;
    let f = |t: f64| {
        let s = (0.5 * traj.omega_d * (t - t1)).sin();
        PI * l as f64 / (traj.r0 - traj.l0 - traj.delta * s * s)
    };
    let h = period / n as f64;
    let mut acc = 0.5 * (f(t1) + f(t1 + period));
    for k in 1..n {
        acc += f(t1 + k as f64 * h);
    }
    acc * h / period
}
