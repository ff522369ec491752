use super::electrostatics::dc_potential;
use super::{coulomb_strength, radial, Species, TrapConfig, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

const LENGTH_UNIT: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEquilibrium {
    /// Sorted axial positions, m.
    pub positions: Vec<f64>,
    /// Infinity norm of the gradient in units of (Z e)^2/(4 pi eps0 um^2).
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl ChainEquilibrium {
    /// Mean nearest-neighbour distance (R_N - R_1)/(N - 1).
    pub fn mean_spacing(&self) -> Option<f64> {
        let n = self.positions.len();
        (n >= 2).then(|| (self.positions[n - 1] - self.positions[0]) / (n - 1) as f64)
    }
}

/// Coulomb couplings k_ij and the unit k-bar (both N/m).
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub k: DMatrix<f64>,
    pub kbar: f64,
}

impl Couplings {
    /// Copy with all couplings beyond nearest neighbours removed.
    pub fn nearest_neighbor(&self) -> Self {
        let mut k = self.k.clone();
        let n = k.nrows();
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 {
                    k[(i, j)] = 0.0;
                }
            }
        }
        Self { k, kbar: self.kbar }
    }
}

struct AxialEnergy<'a> {
    config: &'a TrapConfig,
    e0: f64,
    q: f64,
}

impl AxialEnergy<'_> {
    // external energy, force term and curvature per ion in scaled units
    fn external(&self, zeta: f64) -> (f64, f64, f64) {
        let z = zeta * LENGTH_UNIT;
        let p = dc_potential(self.config, z, self.config.height);
        let kap = self.config.axial_aux_curvature;
        let e = (self.q * p.phi + 0.5 * kap * z * z) / self.e0;
        let g = (self.q * p.phi_z + kap * z) * LENGTH_UNIT / self.e0;
        let h = (self.q * p.phi_zz + kap) * LENGTH_UNIT * LENGTH_UNIT / self.e0;
        (e, g, h)
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        let n = x.len();
        let mut u = 0.0;
        for i in 0..n {
            u += self.external(x[i]).0;
            for j in i + 1..n {
                u += 1.0 / (x[j] - x[i]).abs();
            }
        }
        u
    }

    fn gradient_hessian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let (_, gi, hi) = self.external(x[i]);
            g[i] += gi;
            h[(i, i)] += hi;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = x[i] - x[j];
                let r = d.abs();
                g[i] -= d.signum() / (r * r);
                let c = 2.0 / (r * r * r);
                h[(i, i)] += c;
                h[(i, j)] -= c;
            }
        }
        (g, h)
    }
}

fn initial_guess(config: &TrapConfig, energy: &AxialEnergy) -> Result<DVector<f64>> {
    let n = config.n_ions;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in &config.electrodes {
        if e.z_min.is_finite() {
            lo = lo.min(e.z_min);
        }
        if e.z_max.is_finite() {
            hi = hi.max(e.z_max);
        }
    }
    if !(lo < hi) {
        lo = -100e-6;
        hi = 100e-6;
    }
    let (lo, hi) = (lo / LENGTH_UNIT, hi / LENGTH_UNIT);
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=2000 {
        let z = lo + (hi - lo) * k as f64 / 2000.0;
        let e = energy.external(z).0;
        if e < best.0 {
            best = (e, z);
        }
    }
    let center = best.1;
    if n == 1 {
        return Ok(DVector::from_element(1, center));
    }
    let curv = energy.external(center).2;
    if !(curv > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "axial potential is not confining near z = {:.3} um (curvature {curv:.3e})",
            center
        )));
    }
    // harmonic-chain length scale in scaled units
    let ell = curv.powf(-1.0 / 3.0);
    let spacing = 2.0 * ell * (n as f64).powf(-0.56);
    Ok(DVector::from_fn(n, |i, _| center + spacing * (i as f64 - 0.5 * (n - 1) as f64)))
}

/// Minimize the axial energy (Coulomb plus DC plus optional auxiliary term)
/// by damped Newton iteration. Also rejects configurations whose radial
/// Hessian is not positive definite (zigzag).
pub fn equilibrium_positions(config: &TrapConfig) -> Result<ChainEquilibrium> {
    config.validate()?;
    let q = config.species.charge as f64 * ELEMENTARY_CHARGE;
    let energy = AxialEnergy {
        config,
        e0: coulomb_strength(config.species.charge) / LENGTH_UNIT,
        q,
    };
    let mut x = initial_guess(config, &energy)?;
    let n = x.len();
    let max_iter = 200;
    let mut iterations = 0;
    let (mut g, mut h) = energy.gradient_hessian(&x);
    while g.amax() > GRADIENT_TOL {
        if iterations >= max_iter {
            return Err(Error::Equilibrium {
                iterations,
                gradient: g.amax(),
                last: x.iter().map(|v| v * LENGTH_UNIT).collect(),
            });
        }
        iterations += 1;
        let mut shift = 0.0;
        let dx = loop {
            let mut hs = h.clone();
            for i in 0..n {
                hs[(i, i)] += shift;
            }
            match hs.cholesky() {
                Some(c) => break -c.solve(&g),
                None => shift = if shift == 0.0 { 1e-3 * h.amax().max(1e-12) } else { 10.0 * shift },
            }
        };
        let u0 = energy.energy(&x);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + &dx * step;
            let ordered = trial.as_slice().windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let u = energy.energy(&trial);
                let (gt, _) = energy.gradient_hessian(&trial);
                if u <= u0 + 1e-14 * u0.abs() || gt.amax() < g.amax() {
                    x = trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Equilibrium {
                iterations,
                gradient: g.amax(),
                last: x.iter().map(|v| v * LENGTH_UNIT).collect(),
            });
        }
        (g, h) = energy.gradient_hessian(&x);
    }
    if h.clone().cholesky().is_none() {
        return Err(Error::Equilibrium {
            iterations,
            gradient: g.amax(),
            last: x.iter().map(|v| v * LENGTH_UNIT).collect(),
        });
    }
    let eq = ChainEquilibrium {
        positions: x.iter().map(|v| v * LENGTH_UNIT).collect(),
        gradient_norm: g.amax(),
        iterations,
    };
    let c = couplings(&eq, &config.species, config.height);
    let chi = radial::static_chis(config, &eq, &c);
    let k = radial::staggered_stiffness(&chi, &c.k);
    let eig = k.symmetric_eigen();
    if let Some((i, v)) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, v)| !(**v > 0.0))
    {
        return Err(Error::Zigzag { index: i + 1, value: *v });
    }
    Ok(eq)
}

/// k_ij = (Z e)^2 / (4 pi eps0 |R_i - R_j|^3), k-bar from the mean spacing.
/// A single ion has no spacing; `fallback_spacing` (the trap height) is used.
pub fn couplings(eq: &ChainEquilibrium, species: &Species, fallback_spacing: f64) -> Couplings {
    let n = eq.positions.len();
    let kc = coulomb_strength(species.charge);
    let k = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            kc / (eq.positions[i] - eq.positions[j]).abs().powi(3)
        }
    });
    let dr = eq.mean_spacing().unwrap_or(fallback_spacing);
    Couplings { k, kbar: kc / dr.powi(3) }
}
