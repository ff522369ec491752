//! Independent reference solvers used only by tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Classical RK4 for Y' = A(t) Y.
pub fn rk4_matrix<F>(a: F, y0: DMatrix<f64>, t0: f64, t1: f64, steps: usize) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let am = a(t + 0.5 * h);
        let k1 = a(t) * &y;
        let k2 = &am * (&y + &k1 * (0.5 * h));
        let k3 = &am * (&y + &k2 * (0.5 * h));
        let k4 = a(t + h) * (&y + &k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

/// Cavity x in [0, L(t)] with the wall at x = L(t) following
/// L(t) = L0 - delta sin^2(omega_d t / 2) for 0 <= t <= t_end.
pub struct GalerkinCavity {
    pub l0: f64,
    pub delta: f64,
    pub omega_d: f64,
    pub modes: usize,
}

impl GalerkinCavity {
    fn length(&self, t: f64) -> (f64, f64) {
        let s = (0.5 * self.omega_d * t).sin();
        let l = self.l0 - self.delta * s * s;
        let dl = -0.5 * self.delta * self.omega_d * (self.omega_d * t).sin();
        (l, dl)
    }

    /// g_nk = L int phi_n d_L phi_k over the instantaneous sine basis, by
    /// composite Simpson quadrature in s = x / L.
    fn coupling(&self) -> DMatrix<f64> {
        let m = self.modes;
        let panels = 8000;
        let h = 1.0 / panels as f64;
        DMatrix::from_fn(m, m, |n, k| {
            let (nf, kf) = ((n + 1) as f64, (k + 1) as f64);
            let f = |s: f64| {
                -(nf * PI * s).sin() * (kf * PI * s).sin() - 2.0 * kf * PI * s * (nf * PI * s).sin() * (kf * PI * s).cos()
            };
            let mut acc = f(0.0) + f(1.0);
            for j in 1..panels {
                acc += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        })
    }

    /// Occupations of the first `report` modes after `t_end`, which must be a
    /// whole number of drive periods so the cavity returns to L0.
    pub fn occupations(&self, t_end: f64, steps: usize, report: usize) -> Vec<f64> {
        let m = self.modes;
        let g = self.coupling();
        let gt = g.transpose();
        let gen = |t: f64| {
            let (l, dl) = self.length(t);
            let lam = dl / l;
            let mut a = DMatrix::zeros(2 * m, 2 * m);
            a.view_mut((0, 0), (m, m)).copy_from(&(&g * -lam));
            a.view_mut((m, m), (m, m)).copy_from(&(&gt * lam));
            for n in 0..m {
                let w = (n + 1) as f64 * PI / l;
                a[(n, m + n)] = 1.0;
                a[(m + n, n)] = -w * w;
            }
            a
        };
        let y = rk4_matrix(gen, DMatrix::identity(2 * m, 2 * m), 0.0, t_end, steps);
        let i = Complex64::i();
        (0..report)
            .map(|l| {
                let wl = (l + 1) as f64 * PI / self.l0;
                (0..m)
                    .map(|k| {
                        let wk = (k + 1) as f64 * PI / self.l0;
                        // Q_in = (a + a^+)/sqrt(2w), P_in = -i sqrt(w/2)(a - a^+): a^+ coefficients
                        let q = Complex64::new(1.0 / (2.0 * wk).sqrt(), 0.0);
                        let p = i * (wk / 2.0).sqrt();
                        let qo = y[(l, k)] * q + y[(l, m + k)] * p;
                        let po = y[(m + l, k)] * q + y[(m + l, m + k)] * p;
                        ((wl / 2.0).sqrt() * qo + i * po / (2.0 * wl).sqrt()).norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }
}

/// Two-mode Schroedinger evolution in a truncated Fock space for
/// H = p^2/2 + x^T K(t) x / 2 (unit mass), starting in the ground state of
/// K(0). Occupations are measured in the normal modes of K(0).
pub struct FockTwoMode {
    pub n_max: usize,
}

impl FockTwoMode {
    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.n_max + 1) + b
    }

    /// (a + a^+) on mode `l`.
    fn quad(&self, l: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.n_max;
        let mut out = DVector::zeros(v.len());
        for a in 0..=n {
            for b in 0..=n {
                let c = v[self.idx(a, b)];
                let k = if l == 0 { a } else { b };
                let lower = |k2: usize| if l == 0 { self.idx(k2, b) } else { self.idx(a, k2) };
                if k > 0 {
                    out[lower(k - 1)] += c * (k as f64).sqrt();
                }
                if k < n {
                    out[lower(k + 1)] += c * ((k + 1) as f64).sqrt();
                }
            }
        }
        out
    }

    pub fn evolve<F>(&self, k: F, t_samples: &[f64], steps_per_unit: usize) -> Vec<[f64; 2]>
    where
        F: Fn(f64) -> DMatrix<f64>,
    {
        let eig = k(0.0).symmetric_eigen();
        let mut order = [0usize, 1];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let w = [eig.eigenvalues[order[0]].sqrt(), eig.eigenvalues[order[1]].sqrt()];
        let g = DMatrix::from_fn(2, 2, |r, c| eig.eigenvectors[(r, order[c])]);
        let dim = (self.n_max + 1).pow(2);
        let n = self.n_max;
        let diag = DVector::from_fn(dim, |j, _| {
            let (a, b) = (j / (n + 1), j % (n + 1));
            Complex64::new(w[0] * (a as f64 + 0.5) + w[1] * (b as f64 + 0.5), 0.0)
        });
        let h_apply = |t: f64, v: &DVector<Complex64>| -> DVector<Complex64> {
            let dk = g.transpose() * k(t) * &g - DMatrix::from_diagonal(&DVector::from_vec(vec![w[0] * w[0], w[1] * w[1]]));
            let mut out = diag.component_mul(v);
            let y = [self.quad(0, v) * Complex64::new(1.0 / (2.0 * w[0]).sqrt(), 0.0), self.quad(1, v) * Complex64::new(1.0 / (2.0 * w[1]).sqrt(), 0.0)];
            for i in 0..2 {
                for j in 0..2 {
                    if dk[(i, j)] != 0.0 {
                        out += self.quad(i, &y[j]) * Complex64::new(0.5 * dk[(i, j)] / (2.0 * w[i]).sqrt(), 0.0);
                    }
                }
            }
            out * Complex64::new(0.0, -1.0)
        };
        let mut psi = DVector::zeros(dim);
        psi[0] = Complex64::new(1.0, 0.0);
        let mut t = 0.0;
        let mut out = Vec::new();
        for &ts in t_samples {
            let steps = ((ts - t) * steps_per_unit as f64).ceil().max(1.0) as usize;
            let h = (ts - t) / steps as f64;
            for _ in 0..steps {
                let k1 = h_apply(t, &psi);
                let k2 = h_apply(t + 0.5 * h, &(&psi + &k1 * Complex64::new(0.5 * h, 0.0)));
                let k3 = h_apply(t + 0.5 * h, &(&psi + &k2 * Complex64::new(0.5 * h, 0.0)));
                let k4 = h_apply(t + h, &(&psi + &k3 * Complex64::new(h, 0.0)));
                psi += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
                t += h;
            }
            let mut occ = [0.0; 2];
            for j in 0..dim {
                let p = psi[j].norm_sqr();
                occ[0] += p * (j / (n + 1)) as f64;
                occ[1] += p * (j % (n + 1)) as f64;
            }
            out.push(occ);
        }
        out
    }
}
