//! Orchestration of the ion-chain and moving-mirror calculations in
//! simulation units (m = 1, k-bar = 1, ion spacing d = 1).

use casimir_core::dynamics::{
    bogoliubov, occupation_timeseries, occupations, propagate, BogoliubovMap, Method, StageProtocol, StepControl,
};
use casimir_core::moore::{moore_occupations, moore_timeseries, MirrorTrajectory, MooreOptions};
use casimir_core::trap::{
    average_frequencies, match_cavity, optimize_drive, to_quadratic, CavityMatch, DriveSchedule, IonChain,
    RadialCoefficients,
};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Quantities shared by every drive frequency.
#[derive(Debug, Clone)]
pub struct Setup {
    pub chain: IonChain,
    pub rest: RadialCoefficients,
    pub omega1: f64,
    /// Period-averaged chain frequencies under the configured drive depth.
    pub averages: Vec<f64>,
    pub matching: CavityMatch,
    pub length: f64,
    pub delta: f64,
    pub targets: Vec<usize>,
    pub alpha: f64,
    pub periods: f64,
    pub t0: f64,
    pub control: StepControl,
    pub moore: MooreOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega_ratio: f64,
    pub ion: [f64; 2],
    pub moore: [f64; 2],
    pub completeness_defect: f64,
    /// Defect of the rows of modes 1 and 2 only.
    pub reported_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeseriesRow {
    pub t: f64,
    pub ion: f64,
    pub moore: f64,
    pub analytic: f64,
    pub optimized: f64,
}

#[derive(Debug, Clone)]
pub struct Timeseries {
    pub omega_d: f64,
    pub rows: Vec<TimeseriesRow>,
    pub warnings: Vec<String>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let chain = cfg.chain()?;
        Self::from_chain(cfg, chain)
    }

    pub fn from_chain(cfg: &ExperimentConfig, chain: IonChain) -> Result<Self, CliError> {
        let rest = chain.coefficients(None)?;
        let omega1 = rest.lowest_frequency(0.0)?;
        let d = &cfg.drive;
        // drive frequency is irrelevant for matching and period averages
        let probe = rest.with_drive(Some(DriveSchedule::sine(d.target_ions.clone(), d.alpha_over_kbar, 1.0, 0.0, 2.0 * PI)))?;
        let matching = match_cavity(&probe)?;
        let averages = average_frequencies(&probe, 2000)?;
        let m = &cfg.moore;
        let (length, delta) = if m.derive_from_matching {
            (matching.length, matching.delta)
        } else {
            (m.length_d.unwrap_or(matching.length), m.delta_d.unwrap_or(matching.delta))
        };
        let n = &cfg.numerics;
        let mut control = StepControl::with_tolerance(n.rel_tol);
        control.symplectic_tol = n.symplectic_tol;
        control.min_step = n.min_step_sim;
        if let Some(h) = n.fixed_step_sim {
            control.method = Method::FixedYoshida { step: h };
        }
        let mut moore = MooreOptions::new(m.n_modes);
        moore.in_modes = m.in_modes.unwrap_or(4 * m.n_modes);
        moore.resolution = m.resolution_per_d;
        moore.panels_per_mode = m.panels_per_mode;
        moore.completeness_threshold = m.completeness_threshold;
        Ok(Self {
            chain,
            rest,
            omega1,
            averages,
            matching,
            length,
            delta,
            targets: d.target_ions.clone(),
            alpha: d.alpha_over_kbar,
            periods: d.periods,
            t0: -d.stage_one_duration_sim,
            control,
            moore,
        })
    }

    /// Twice the period-averaged lowest frequency.
    pub fn resonance(&self) -> f64 {
        2.0 * self.averages[0]
    }

    pub fn protocol(&self, omega_d: f64) -> Result<StageProtocol, CliError> {
        Ok(StageProtocol::new(self.t0, 0.0, self.periods * 2.0 * PI / omega_d)?)
    }

    pub fn drive(&self, omega_d: f64) -> DriveSchedule {
        DriveSchedule::periods(self.targets.clone(), self.alpha, omega_d, 0.0, self.periods)
    }

    pub fn trajectory(&self, omega_d: f64) -> Result<MirrorTrajectory, CliError> {
        Ok(MirrorTrajectory::new(0.0, self.length, self.delta, omega_d, self.protocol(omega_d)?)?)
    }

    /// Bogoliubov map of the driven chain between the stage-I and stage-III modes.
    pub fn ion_map(&self, omega_d: f64) -> Result<BogoliubovMap, CliError> {
        let p = self.protocol(omega_d)?;
        let rc = self.rest.with_drive(Some(self.drive(omega_d)))?;
        let sys = to_quadratic(&rc, Some(p))?;
        // stage II is periodic: evolve whole periods once and repeat
        let whole = self.periods.floor() as usize;
        let period = 2.0 * PI / omega_d;
        let t_whole = p.t1 + whole as f64 * period;
        let mut s = propagate(&sys, p.t0, p.t1, &self.control)?;
        if whole > 0 {
            s = s.then(&propagate(&sys, p.t1, p.t1 + period, &self.control)?.power(whole));
        }
        s = s.then(&propagate(&sys, t_whole.min(p.t2), p.t2, &self.control)?);
        if !(s.defect() <= self.control.symplectic_tol) {
            return Err(casimir_core::Error::SymplecticDefect {
                defect: s.defect(),
                tolerance: self.control.symplectic_tol,
            }
            .into());
        }
        Ok(bogoliubov(&s, &sys.modes_at(p.t0)?, &sys.modes_at(p.t2)?, self.control.symplectic_tol)?)
    }

    pub fn sweep_point(&self, omega_ratio: f64) -> Result<SweepRow, CliError> {
        let omega_d = omega_ratio * self.omega1;
        let ion = occupations(&self.ion_map(omega_d)?);
        let m = moore_occupations(&self.trajectory(omega_d)?, &self.moore)?;
        Ok(SweepRow {
            omega_ratio,
            ion: [ion[0], ion.get(1).copied().unwrap_or(0.0)],
            moore: [m.occupations[0], m.occupations.get(1).copied().unwrap_or(0.0)],
            completeness_defect: m.completeness_defect,
            reported_defect: m.mode_defects.iter().take(2).copied().fold(0.0, f64::max),
        })
    }

    /// Sweep in grid order; with `threads = None` rayon's global pool is used.
    pub fn sweep(&self, grid: &[f64], threads: Option<usize>) -> Result<Vec<Result<SweepRow, CliError>>, CliError> {
        let run = || grid.par_iter().map(|&w| self.sweep_point(w)).collect::<Vec<_>>();
        match threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }

    /// Occupation of mode 1 over the drive at omega_D: ion chain under the
    /// sine schedule, Moore cavity, the short-time sinh^2 law and the chain
    /// under the tweezer schedule optimized against the mirror trajectory.
    pub fn timeseries(&self, omega_d: f64, samples_per_period: usize, optimize_samples: usize) -> Result<Timeseries, CliError> {
        let p = self.protocol(omega_d)?;
        let n = (self.periods * samples_per_period as f64).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| p.t1 + p.duration() * k as f64 / n as f64).collect();
        let traj = self.trajectory(omega_d)?;

        let rc = self.rest.with_drive(Some(self.drive(omega_d)))?;
        let sys = to_quadratic(&rc, Some(p))?;
        let ion = occupation_timeseries(&sys, &p, None, &times, &self.control)?;

        let opt = optimize_drive(&rc, &traj, optimize_samples)?;
        let rc_opt = self.rest.with_drive(Some(opt))?;
        let sys_opt = to_quadratic(&rc_opt, Some(p))?;
        let optimized = occupation_timeseries(&sys_opt, &p, None, &times, &self.control)?;

        let mut warnings = Vec::new();
        let mut moore = Vec::with_capacity(times.len());
        let late: Vec<f64> = times.iter().copied().filter(|&t| t > p.t1).collect();
        let results = moore_timeseries(&traj, &late, &self.moore)?;
        let mut it = results.into_iter();
        for &t in &times {
            if t > p.t1 {
                let r = it.next().expect("one result per late sample");
                warnings.extend(r.warnings);
                moore.push(r.occupations[0]);
            } else {
                moore.push(0.0);
            }
        }
        let rate = self.averages[0] * self.delta / (4.0 * self.length);
        let rows = times
            .iter()
            .enumerate()
            .map(|(k, &t)| TimeseriesRow {
                t,
                ion: ion[k].occupations[0],
                moore: moore[k],
                analytic: (rate * (t - p.t1)).sinh().powi(2),
                optimized: optimized[k].occupations[0],
            })
            .collect();
        Ok(Timeseries { omega_d, rows, warnings })
    }
}

/// Uniform grid of drive frequencies in units of omega_1.
pub fn sweep_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| min + (max - min) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Interior local maxima (index) of a sampled curve.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1])
        .collect()
}
