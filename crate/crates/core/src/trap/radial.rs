use super::chain::{couplings, equilibrium_positions, ChainEquilibrium, Couplings};
use super::electrostatics::dc_potential;
use super::{RfConfinement, Species, TrapConfig, ELEMENTARY_CHARGE};
use crate::dynamics::{normal_modes, QuadraticSystem, StageProtocol};
use crate::error::{Error, Result};
use crate::interp::Hermite;
use nalgebra::{DMatrix, DVector};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum DriveForm {
    /// omega_O^2 = alpha sin^2(omega_D (t - t1) / 2), in units of k-bar/m.
    Sine { alpha: f64 },
    /// Monotone cubic through tabulated (t, omega_O^2) samples.
    Tabulated(Hermite),
}

/// Optical-tweezer modulation of the radial stiffness of selected ions.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    /// 1-based ion indices.
    pub target_ions: Vec<usize>,
    pub t1: f64,
    pub t2: f64,
    pub omega_d: f64,
    pub form: DriveForm,
}

impl DriveSchedule {
    pub fn sine(target_ions: Vec<usize>, alpha: f64, omega_d: f64, t1: f64, t2: f64) -> Self {
        Self {
            target_ions,
            t1,
            t2,
            omega_d,
            form: DriveForm::Sine { alpha },
        }
    }

    /// Drive over an integer number of periods starting at t1.
    pub fn periods(target_ions: Vec<usize>, alpha: f64, omega_d: f64, t1: f64, periods: f64) -> Self {
        let t2 = t1 + periods * 2.0 * std::f64::consts::PI / omega_d;
        Self::sine(target_ions, alpha, omega_d, t1, t2)
    }

    /// omega_O^2(t) in units of k-bar/m; zero before t1, frozen after t2.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.t1 {
            return 0.0;
        }
        let tt = t.min(self.t2);
        match &self.form {
            DriveForm::Sine { alpha } => {
                let s = (0.5 * self.omega_d * (tt - self.t1)).sin();
                alpha * s * s
            }
            DriveForm::Tabulated(h) => h.eval(tt).0,
        }
    }

    /// Time at which the drive phase omega_D (t - t1) equals `phase`.
    pub fn time_at_phase(&self, phase: f64) -> f64 {
        self.t1 + phase / self.omega_d
    }

    /// Copy of the schedule that stops at `t_stop` instead of t2.
    pub fn truncated(&self, t_stop: f64) -> Self {
        Self {
            t2: t_stop.min(self.t2),
            ..self.clone()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.target_ions.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::InvalidParameter(format!(
                "drive targets {:?} outside ions 1..={n}",
                self.target_ions
            )));
        }
        if !(self.t2 > self.t1) || !(self.omega_d > 0.0) {
            return Err(Error::InvalidParameter("drive needs t2 > t1 and omega_D > 0".into()));
        }
        Ok(())
    }
}

/// chi(t) and couplings in units of k-bar (simulation units).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoefficients {
    pub chi_static: DVector<f64>,
    pub couplings: DMatrix<f64>,
    pub drive: Option<DriveSchedule>,
}

impl RadialCoefficients {
    pub fn new(chi_static: DVector<f64>, couplings: DMatrix<f64>, drive: Option<DriveSchedule>) -> Result<Self> {
        let n = chi_static.len();
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::Dimension(format!("{n} chi values but {}x{} couplings", couplings.nrows(), couplings.ncols())));
        }
        if let Some(d) = &drive {
            d.validate(n)?;
        }
        Ok(Self {
            chi_static,
            couplings,
            drive,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.chi_static.len()
    }

    pub fn with_drive(&self, drive: Option<DriveSchedule>) -> Result<Self> {
        Self::new(self.chi_static.clone(), self.couplings.clone(), drive)
    }

    /// chi with `extra` added on the drive targets.
    pub fn chi_with(&self, extra: f64) -> DVector<f64> {
        let mut chi = self.chi_static.clone();
        if let Some(d) = &self.drive {
            for &i in &d.target_ions {
                chi[i - 1] += extra;
            }
        }
        chi
    }

    pub fn chi(&self, t: f64) -> DVector<f64> {
        match &self.drive {
            Some(d) => self.chi_with(d.value(t)),
            None => self.chi_static.clone(),
        }
    }

    pub fn stiffness(&self, t: f64) -> DMatrix<f64> {
        staggered_stiffness(&self.chi(t), &self.couplings)
    }

    pub fn stiffness_with(&self, extra: f64) -> DMatrix<f64> {
        staggered_stiffness(&self.chi_with(extra), &self.couplings)
    }

    /// Lowest chain frequency with `extra` tweezer stiffness on the targets.
    pub fn lowest_frequency(&self, extra: f64) -> Result<f64> {
        Ok(normal_modes(&self.stiffness_with(extra), 1.0)?.frequencies[0])
    }
}

/// K_ij = (-1)^(i-j) k_ij, K_ii = chi_i - sum_j (-1)^(i-j) k_ij.
pub fn staggered_stiffness(chi: &DVector<f64>, k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = chi.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = chi[i];
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[(i, j)] = s * k[(i, j)];
            diag -= s * k[(i, j)];
        }
        out[(i, i)] = diag;
    }
    out
}

fn rf_curvature(config: &TrapConfig, kbar: f64) -> f64 {
    match config.rf {
        RfConfinement::Frequency(w) => config.species.mass * w * w,
        RfConfinement::RelativeToKbar(r) => r * kbar,
    }
}

pub(super) fn static_chis(config: &TrapConfig, eq: &ChainEquilibrium, c: &Couplings) -> DVector<f64> {
    let q = config.species.charge as f64 * ELEMENTARY_CHARGE;
    let rf = rf_curvature(config, c.kbar);
    let n = eq.positions.len();
    DVector::from_fn(n, |i, _| {
        let p = dc_potential(config, eq.positions[i], config.height);
        let mut chi = q * p.phi_xx + rf;
        for j in 0..n {
            if j != i && (i + j) % 2 == 1 {
                chi -= 2.0 * c.k[(i, j)];
            }
        }
        chi
    })
}

/// chi_i(t) in N/m: DC curvature, RF pseudopotential, Coulomb correction and
/// the tweezer term on its targets.
pub fn radial_chis(
    config: &TrapConfig,
    eq: &ChainEquilibrium,
    c: &Couplings,
    drive: Option<&DriveSchedule>,
    t: f64,
) -> DVector<f64> {
    let mut chi = static_chis(config, eq, c);
    if let Some(d) = drive {
        let w = d.value(t) * c.kbar;
        for &i in &d.target_ions {
            if (1..=chi.len()).contains(&i) {
                chi[i - 1] += w;
            }
        }
    }
    chi
}

/// Quadratic system in simulation units; static stages must be stable.
pub fn to_quadratic(rc: &RadialCoefficients, protocol: Option<StageProtocol>) -> Result<QuadraticSystem> {
    let probe = protocol.map_or(0.0, |p| p.t0);
    normal_modes(&rc.stiffness(probe), 1.0)?;
    if let Some(p) = protocol {
        normal_modes(&rc.stiffness(p.t2), 1.0)?;
    }
    let rc = rc.clone();
    let n = rc.n_ions();
    QuadraticSystem::new(n, 1.0, move |t| rc.stiffness(t), protocol)
}

/// Trap-derived chain: equilibrium, couplings and static chi in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct IonChain {
    pub species: Species,
    pub equilibrium: Option<ChainEquilibrium>,
    pub couplings: Couplings,
    pub chi_static: DVector<f64>,
    pub rf_curvature: f64,
}

impl IonChain {
    pub fn build(config: &TrapConfig) -> Result<Self> {
        let eq = equilibrium_positions(config)?;
        let c = couplings(&eq, &config.species, config.height);
        let chi = static_chis(config, &eq, &c);
        Ok(Self {
            species: config.species,
            rf_curvature: rf_curvature(config, c.kbar),
            equilibrium: Some(eq),
            couplings: c,
            chi_static: chi,
        })
    }

    /// Chain given directly by chi/k-bar with equidistant couplings k-bar/|i-j|^3.
    pub fn from_chi_profile(chi_over_kbar: &[f64], species: Species, kbar: f64) -> Self {
        let n = chi_over_kbar.len();
        let k = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                kbar / (i.abs_diff(j) as f64).powi(3)
            }
        });
        Self {
            species,
            equilibrium: None,
            couplings: Couplings { k, kbar },
            chi_static: DVector::from_iterator(n, chi_over_kbar.iter().map(|c| c * kbar)),
            rf_curvature: f64::NAN,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.chi_static.len()
    }

    /// sqrt(k-bar/m), rad/s: the simulation frequency unit.
    pub fn frequency_unit(&self) -> f64 {
        (self.couplings.kbar / self.species.mass).sqrt()
    }

    pub fn coefficients(&self, drive: Option<DriveSchedule>) -> Result<RadialCoefficients> {
        let kb = self.couplings.kbar;
        RadialCoefficients::new(&self.chi_static / kb, &self.couplings.k / kb, drive)
    }
}

pub fn write_chi_csv<W: Write>(writer: W, chi_over_kbar: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["ion_index", "chi_over_kbar"])?;
    for (i, c) in chi_over_kbar.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{c:.14e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_chi_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["ion_index", "chi_over_kbar"] {
        return Err(Error::InvalidParameter(format!("unexpected chi header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let idx: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad ion index {:?}", &rec[0])))?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad chi value {:?}", &rec[1])))?;
        rows.push((idx, v));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i + 1) {
        return Err(Error::InvalidParameter("ion indices must run 1..=N without gaps".into()));
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::reference_trap;

    #[test]
    fn drive_is_zero_before_and_frozen_after() {
        let d = DriveSchedule::sine(vec![5], 0.6, 2.0, 1.0, 4.0);
        assert_eq!(d.value(0.5), 0.0);
        assert!((d.value(d.time_at_phase(std::f64::consts::PI)) - 0.6).abs() < 1e-15);
        assert_eq!(d.value(10.0), d.value(4.0));
    }

    #[test]
    fn staggering_preserves_spectrum() {
        let n = 6;
        let k = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 / (i.abs_diff(j) as f64).powi(3) });
        let chi = DVector::from_fn(n, |i, _| 3.0 + 0.1 * i as f64);
        let ks = staggered_stiffness(&chi, &k);
        let mut plain = ks.clone();
        for i in 0..n {
            for j in 0..n {
                if (i + j) % 2 == 1 {
                    plain[(i, j)] = -plain[(i, j)];
                }
            }
        }
        let mut a: Vec<f64> = ks.symmetric_eigenvalues().iter().copied().collect();
        let mut b: Vec<f64> = plain.symmetric_eigenvalues().iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn single_ion_is_single_oscillator() {
        let rc = RadialCoefficients::new(DVector::from_element(1, 2.5), DMatrix::zeros(1, 1), None).unwrap();
        let sys = to_quadratic(&rc, None).unwrap();
        let b = sys.modes_at(0.0).unwrap();
        assert!((b.frequencies[0] - 2.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn uniform_chain_interior_chis_are_equal() {
        let mut cfg = reference_trap();
        cfg.electrodes.clear();
        let eq = ChainEquilibrium {
            positions: (0..12).map(|i| i as f64 * 4e-6).collect(),
            gradient_norm: 0.0,
            iterations: 0,
        };
        let c = couplings(&eq, &cfg.species, cfg.height);
        let chi = radial_chis(&cfg, &eq, &c, None, 0.0);
        // translation symmetry broken only by the finite ends
        assert!((chi[5] - chi[6]).abs() / c.kbar < 2e-2);
        assert!((chi[0] - chi[11]).abs() / c.kbar < 1e-12);
    }

    #[test]
    fn tweezer_shifts_target_by_alpha() {
        let chain = IonChain::from_chi_profile(&[1.0; 8], Species::calcium40(), 1.0);
        let d = DriveSchedule::sine(vec![5], 0.6, 1.0, 0.0, 10.0);
        let rc = chain.coefficients(Some(d.clone())).unwrap();
        let chi = rc.chi(d.time_at_phase(std::f64::consts::PI));
        assert!((chi[4] - 1.6).abs() < 1e-14);
        assert_eq!(chi[3], 1.0);
    }

    #[test]
    fn bad_target_rejected() {
        let chain = IonChain::from_chi_profile(&[1.0; 4], Species::calcium40(), 1.0);
        assert!(chain.coefficients(Some(DriveSchedule::sine(vec![5], 0.6, 1.0, 0.0, 1.0))).is_err());
    }

    #[test]
    fn chi_csv_round_trip() {
        let chi = vec![3.5, -0.025, 1.0 / 3.0];
        let mut buf = Vec::new();
        write_chi_csv(&mut buf, &chi).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ion_index,chi_over_kbar\n1,"));
        let back = read_chi_csv(buf.as_slice()).unwrap();
        for (a, b) in chi.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13 * a.abs().max(1.0));
        }
    }
}
