//! Experimental backgrounds and readout: electric-field-noise heating,
//! blue-sideband excitation, recovery of phonon distributions and the Fock
//! statistics of a single mode after a Bogoliubov transformation.

use crate::dynamics::BogoliubovMap;
use crate::error::{Error, Result};
use crate::trap::{Species, ELEMENTARY_CHARGE, HBAR};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseScaling {
    /// S_E(w) w held constant.
    InverseFrequency,
    /// S_E independent of w.
    Flat,
}

/// Electric field noise spectral density, V^2/(m^2 Hz), referenced at omega_ref (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub s_e_ref: f64,
    pub omega_ref: f64,
    pub scaling: NoiseScaling,
}

impl NoiseModel {
    pub fn spectral_density(&self, omega: f64) -> f64 {
        match self.scaling {
            NoiseScaling::InverseFrequency => self.s_e_ref * self.omega_ref / omega,
            NoiseScaling::Flat => self.s_e_ref,
        }
    }
}

/// Heating rate in quanta per second: e^2 Z^2 S_E(w) / (4 m hbar w).
pub fn heating_rate(noise: &NoiseModel, species: &Species, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !(noise.s_e_ref >= 0.0) || !(noise.omega_ref > 0.0) {
        return Err(Error::InvalidParameter(
            "heating rate needs omega > 0, omega_ref > 0 and S_E >= 0".into(),
        ));
    }
    let q = species.charge as f64 * ELEMENTARY_CHARGE;
    Ok(q * q * noise.spectral_density(omega) / (4.0 * species.mass * HBAR * omega))
}

/// p(n) for n = 0..=n_max. `tail` is the probability beyond n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDistribution {
    p: Vec<f64>,
    tail: f64,
}

impl PhononDistribution {
    /// Complete distribution: nonnegative and summing to one within 1e-9.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let d = Self::with_tail(p, 0.0)?;
        Ok(d)
    }

    fn with_tail(p: Vec<f64>, tail: f64) -> Result<Self> {
        if p.is_empty() || p.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be nonnegative".into()));
        }
        let s: f64 = p.iter().sum::<f64>() + tail;
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {s}")));
        }
        Ok(Self { p, tail })
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        Self { p, tail: 0.0 }
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidParameter(format!("Fock state {n} beyond n_max {n_max}")));
        }
        let mut p = vec![0.0; n_max + 1];
        p[n] = 1.0;
        Ok(Self { p, tail: 0.0 })
    }

    /// Thermal state with mean `nbar`, truncated where the tail drops below 1e-10.
    pub fn thermal(nbar: f64) -> Self {
        let q = nbar / (1.0 + nbar);
        let mut p = Vec::new();
        let mut v = 1.0 / (1.0 + nbar);
        let mut tail = 1.0;
        while tail >= 1e-10 {
            p.push(v);
            tail -= v;
            v *= q;
        }
        let s: f64 = p.iter().sum();
        Self {
            p,
            tail: (1.0 - s).max(0.0),
        }
    }

    /// Single-mode squeezed vacuum with squeezing parameter r.
    pub fn squeezed_vacuum(r: f64, n_max: usize) -> Result<Self> {
        let t = r.tanh();
        let mut p = vec![0.0; n_max + 1];
        let mut c = 1.0 / r.cosh();
        for k in 0..=n_max / 2 {
            if k > 0 {
                c *= t * t * (2 * k - 1) as f64 / (2 * k) as f64;
            }
            p[2 * k] = c;
        }
        let s: f64 = p.iter().sum();
        Self::with_tail(p, (1.0 - s).max(0.0))
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.p.get(n).copied().unwrap_or(0.0)
    }

    /// Half the l1 distance, restricted to n <= n_max when given.
    pub fn total_variation(&self, other: &Self, n_max: Option<usize>) -> f64 {
        let top = n_max.unwrap_or(self.p.len().max(other.p.len()) - 1);
        0.5 * (0..=top).map(|n| (self.get(n) - other.get(n)).abs()).sum::<f64>()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "p"])?;
        for (n, p) in self.p.iter().enumerate() {
            w.write_record([n.to_string(), format!("{p:.14e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows: Vec<(usize, f64)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let n = rec[0].trim().parse().map_err(|_| Error::InvalidParameter(format!("bad n {:?}", &rec[0])))?;
            let p = rec[1].trim().parse().map_err(|_| Error::InvalidParameter(format!("bad p {:?}", &rec[1])))?;
            rows.push((n, p));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(Error::InvalidParameter("n must run 0..=n_max without gaps".into()));
        }
        Self::new(rows.into_iter().map(|r| r.1).collect())
    }
}

/// Blue-sideband excitation probability on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSignal {
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    /// Vacuum blue-sideband Rabi frequency, rad/s.
    pub rabi: f64,
}

/// P_e(t) = sum_n p(n) sin^2(sqrt(n+1) Omega t).
pub fn sideband_signal(p: &PhononDistribution, rabi: f64, times: &[f64]) -> SidebandSignal {
    let pe = times
        .iter()
        .map(|&t| {
            let v: f64 = p
                .probabilities()
                .iter()
                .enumerate()
                .map(|(n, pn)| pn * (((n + 1) as f64).sqrt() * rabi * t).sin().powi(2))
                .sum();
            v.clamp(0.0, 1.0)
        })
        .collect();
    SidebandSignal {
        times: times.to_vec(),
        pe,
        rabi,
    }
}

/// Add N(0, sigma^2) sampling noise, clipped to [0, 1].
pub fn add_sampling_noise<R: Rng + ?Sized>(signal: &SidebandSignal, sigma: f64, rng: &mut R) -> Result<SidebandSignal> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("noise sigma: {e}")))?;
    let pe = signal.pe.iter().map(|v| (v + normal.sample(rng)).clamp(0.0, 1.0)).collect();
    Ok(SidebandSignal { pe, ..signal.clone() })
}

/// Shortest uniform window that separates the two lowest sideband frequencies
/// by four beat periods.
pub fn required_window(rabi: f64) -> f64 {
    let beat = 2.0 * (2f64.sqrt() - 1.0) * rabi;
    4.0 * 2.0 * PI / beat
}

/// Least-squares fit of p(n), n <= n_max, to the sideband signal with the
/// normalization constraint; negative weights are clipped afterwards.
pub fn invert_sideband(signal: &SidebandSignal, n_max: usize) -> Result<PhononDistribution> {
    let m = signal.times.len();
    if m < n_max + 2 || signal.pe.len() != m {
        return Err(Error::InvalidParameter(format!(
            "need more than {} samples for n_max = {n_max}",
            n_max + 1
        )));
    }
    let dt = signal.times[1] - signal.times[0];
    if signal.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300)) || !(dt > 0.0) {
        return Err(Error::InvalidParameter("sideband samples must be uniform and increasing".into()));
    }
    let window = signal.times[m - 1] - signal.times[0];
    let required = required_window(signal.rabi);
    if window < required {
        return Err(Error::IllConditionedWindow { required, actual: window });
    }
    let f_top = 2.0 * ((n_max + 1) as f64).sqrt() * signal.rabi;
    if dt * f_top >= PI {
        return Err(Error::InvalidParameter(format!(
            "sampling step {dt:.3e} aliases the highest sideband frequency {f_top:.3e}"
        )));
    }
    let n = n_max + 1;
    let design = DMatrix::from_fn(m, n, |i, k| (((k + 1) as f64).sqrt() * signal.rabi * signal.times[i]).sin().powi(2));
    let y = DVector::from_column_slice(&signal.pe);
    let gram = design.transpose() * &design;
    let sv = gram.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo > 1e-12 * hi) {
        // adjacent frequencies at the top of the range are closest
        let gap = 2.0 * (((n_max + 1) as f64).sqrt() - (n_max as f64).sqrt()) * signal.rabi;
        return Err(Error::IllConditionedWindow {
            required: 4.0 * 2.0 * PI / gap,
            actual: window,
        });
    }
    let lambda = 1e-12 * hi;
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(&gram);
    for k in 0..n {
        kkt[(k, k)] += lambda;
        kkt[(k, n)] = 1.0;
        kkt[(n, k)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&(design.transpose() * y));
    rhs[n] = 1.0;
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditionedWindow { required, actual: window })?;
    let mut p: Vec<f64> = sol.rows(0, n).iter().map(|v| v.max(0.0)).collect();
    let s: f64 = p.iter().sum();
    if !(s > 0.0) {
        return Err(Error::InvalidParameter("fit produced no positive weight".into()));
    }
    p.iter_mut().for_each(|v| *v /= s);
    PhononDistribution::new(p)
}

/// Fock statistics of mode `mode` (0-based) for a vacuum input, from the
/// reduced Gaussian state: thermal occupation squeezed by r.
pub fn photon_statistics(map: &BogoliubovMap, mode: usize, n_max: usize) -> Result<PhononDistribution> {
    if mode >= map.alpha.nrows() {
        return Err(Error::Dimension(format!("mode {mode} outside {} modes", map.alpha.nrows())));
    }
    let a = map.alpha.row(mode);
    let b = map.beta.row(mode);
    let nbar: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let m = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<num_complex::Complex64>().norm();
    let h = nbar + 0.5;
    let nth = ((h * h - m * m).max(0.25)).sqrt() - 0.5;
    let cosh2r = (h / (nth + 0.5)).max(1.0);
    let r = 0.5 * cosh2r.acosh();
    squeezed_thermal(r, nth.max(0.0), n_max)
}

/// p(n) of a squeezed thermal state.
pub fn squeezed_thermal(r: f64, nth: f64, n_max: usize) -> Result<PhononDistribution> {
    let q = nth / (1.0 + nth);
    // thermal weights until the remaining mass is negligible
    let mut weights = Vec::new();
    let mut w = 1.0 / (1.0 + nth);
    let mut rest = 1.0;
    while rest > 1e-16 && weights.len() < 100_000 {
        weights.push(w);
        rest -= w;
        w *= q;
        if q == 0.0 {
            break;
        }
    }
    let s = squeeze_matrix(r, n_max, weights.len() - 1);
    let mut p = vec![0.0; n_max + 1];
    for (k, wk) in weights.iter().enumerate() {
        for (nn, pn) in p.iter_mut().enumerate() {
            *pn += wk * s[(nn, k)] * s[(nn, k)];
        }
    }
    let total: f64 = p.iter().sum();
    let tail = (1.0 - total).max(0.0);
    if tail > 1e-6 {
        return Err(Error::Truncation { n_max, tail });
    }
    PhononDistribution::with_tail(p, tail)
}

/// <m|S(r)|n> for m <= rows, n <= cols with S(r) = exp(r (a^2 - a^+2)/2).
fn squeeze_matrix(r: f64, rows: usize, cols: usize) -> DMatrix<f64> {
    let (mu, nu) = (r.cosh(), r.sinh());
    let t = r.tanh();
    let mut s = DMatrix::zeros(rows + 1, cols + 1);
    let mut c = 1.0 / mu.sqrt();
    for k in 0..=rows / 2 {
        if k > 0 {
            c *= -t * (((2 * k - 1) as f64) / ((2 * k) as f64)).sqrt();
        }
        s[(2 * k, 0)] = c;
    }
    for n in 0..cols {
        for m in 0..=rows {
            let mut v = 0.0;
            if m > 0 {
                v += (m as f64).sqrt() * s[(m - 1, n)];
            }
            if n > 0 {
                v += nu * (n as f64).sqrt() * s[(m, n - 1)];
            }
            s[(m, n + 1)] = v / (mu * ((n + 1) as f64).sqrt());
        }
    }
    s
}
