//! Experiment configuration: one TOML document, physical units in key names,
//! unknown keys rejected.

use casimir_core::readout::{NoiseModel, NoiseScaling};
use casimir_core::trap::{
    read_chi_csv, IonChain, RfConfinement, Species, SurfaceLayout, TrapConfig, ATOMIC_MASS_UNIT, ELECTRON_MASS,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Reference configuration reproducing the published parameter set.
pub const PAPER_CFG: &str = include_str!("../paper.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trap: TrapSection,
    pub drive: DriveSection,
    #[serde(default)]
    pub moore: MooreSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub timeseries: TimeseriesSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub readout: ReadoutSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub n_ions: usize,
    /// Neutral atomic mass; one electron mass is removed per unit charge.
    pub atomic_mass_amu: f64,
    pub charge_number: i32,
    pub height_um: f64,
    pub electrode_width_um: f64,
    pub rf_gap_um: f64,
    /// Pairs across the RF gap, ordered along the chain axis.
    pub dc_voltages_v: [f64; 6],
    /// Pseudopotential curvature as omega_RF^2 / (k-bar/m).
    pub rf_omega_sq_over_kbar: Option<f64>,
    /// Alternative: absolute omega_RF / 2 pi.
    pub rf_frequency_mhz: Option<f64>,
    #[serde(default)]
    pub axial_aux_curvature_n_per_m: f64,
    /// chi profile (ion_index, chi_over_kbar) replacing the electrostatics.
    pub chi_profile_csv: Option<PathBuf>,
    /// k-bar for a tabulated chi profile.
    pub kbar_n_per_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// 1-based ion indices.
    pub target_ions: Vec<usize>,
    /// Peak tweezer stiffness in units of k-bar.
    pub alpha_over_kbar: f64,
    pub periods: f64,
    /// Drive frequency over the rest frequency omega_1; omitted means
    /// twice the period-averaged omega_1.
    pub omega_d_over_omega1: Option<f64>,
    /// Length of stage I in units of 1/sqrt(k-bar/m).
    #[serde(default = "default_stage_one")]
    pub stage_one_duration_sim: f64,
}

fn default_stage_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MooreSection {
    /// Take r0 - l0 and delta from the chain; otherwise use the values below.
    pub derive_from_matching: bool,
    pub length_d: Option<f64>,
    pub delta_d: Option<f64>,
    pub n_modes: usize,
    pub in_modes: Option<usize>,
    pub resolution_per_d: usize,
    pub panels_per_mode: usize,
    pub completeness_threshold: f64,
}

impl Default for MooreSection {
    fn default() -> Self {
        Self {
            derive_from_matching: true,
            length_d: None,
            delta_d: None,
            n_modes: 30,
            in_modes: None,
            resolution_per_d: 128,
            panels_per_mode: 4,
            completeness_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_d_min_over_omega1: f64,
    pub omega_d_max_over_omega1: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            omega_d_min_over_omega1: 0.5,
            omega_d_max_over_omega1: 4.5,
            points: 161,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeseriesSection {
    pub samples_per_period: usize,
    /// Table density of the optimized tweezer schedule.
    pub optimize_samples_per_period: usize,
}

impl Default for TimeseriesSection {
    fn default() -> Self {
        Self {
            samples_per_period: 16,
            optimize_samples_per_period: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub rel_tol: f64,
    pub symplectic_tol: f64,
    pub min_step_sim: f64,
    /// Fixed Yoshida step instead of the adaptive integrator.
    pub fixed_step_sim: Option<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            symplectic_tol: 1e-8,
            min_step_sim: 1e-10,
            fixed_step_sim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub s_e_ref_v2_per_m2_hz: f64,
    pub reference_frequency_mhz: f64,
    /// "inverse_frequency" (S_E omega constant) or "flat".
    pub scaling: String,
    /// Mode frequency / 2 pi; omitted means the computed omega_1.
    pub mode_frequency_mhz: Option<f64>,
    pub run_duration_ms: f64,
    /// Constant laser-scatter budget, reported alongside.
    #[serde(default)]
    pub scatter_rate_per_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    /// 1-based mode index.
    pub mode: usize,
    pub n_max: usize,
    /// Fock cutoff for the true distribution.
    pub truth_n_max: usize,
    pub rabi_khz: f64,
    /// Window length in units of the minimal four-beat window.
    pub window_factor: f64,
    /// Samples per period of the fastest fitted sideband line.
    pub samples_per_fast_period: usize,
    pub noise_sigma: f64,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            mode: 1,
            n_max: 10,
            truth_n_max: 80,
            rabi_khz: 10.0,
            window_factor: 1.5,
            samples_per_fast_period: 8,
            noise_sigma: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Copy plotting scripts next to the CSVs.
    pub plot_scripts: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            plot_scripts: true,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // relative data paths are taken from the config's directory
        if let (Some(csv), Some(dir)) = (&cfg.trap.chi_profile_csv, path.parent()) {
            if csv.is_relative() {
                cfg.trap.chi_profile_csv = Some(dir.join(csv));
            }
        }
        Ok(cfg)
    }

    pub fn paper() -> Self {
        Self::parse(PAPER_CFG).expect("bundled configuration is valid")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let t = &self.trap;
        if t.n_ions == 0 {
            return bad("trap.n_ions must be positive".into());
        }
        if t.rf_omega_sq_over_kbar.is_some() == t.rf_frequency_mhz.is_some() {
            return bad("set exactly one of trap.rf_omega_sq_over_kbar and trap.rf_frequency_mhz".into());
        }
        if t.chi_profile_csv.is_some() != t.kbar_n_per_m.is_some() {
            return bad("trap.chi_profile_csv and trap.kbar_n_per_m go together".into());
        }
        for v in [t.atomic_mass_amu, t.height_um, t.electrode_width_um, t.rf_gap_um] {
            if !(v > 0.0 && v.is_finite()) {
                return bad("trap lengths and mass must be positive and finite".into());
            }
        }
        if t.dc_voltages_v.iter().any(|v| !v.is_finite()) {
            return bad("trap.dc_voltages_v must be finite".into());
        }
        let d = &self.drive;
        if d.target_ions.is_empty() || d.target_ions.iter().any(|&i| i == 0 || i > t.n_ions) {
            return bad(format!("drive.target_ions must lie in 1..={}", t.n_ions));
        }
        if !(d.periods > 0.0) || !(d.stage_one_duration_sim > 0.0) || !d.alpha_over_kbar.is_finite() {
            return bad("drive.periods and drive.stage_one_duration_sim must be positive".into());
        }
        if matches!(d.omega_d_over_omega1, Some(w) if !(w > 0.0)) {
            return bad("drive.omega_d_over_omega1 must be positive".into());
        }
        let m = &self.moore;
        if !m.derive_from_matching && (m.length_d.is_none() || m.delta_d.is_none()) {
            return bad("moore.length_d and moore.delta_d are required without matching".into());
        }
        if m.n_modes == 0 || m.resolution_per_d < 4 || m.panels_per_mode == 0 {
            return bad("moore truncation parameters must be positive".into());
        }
        let s = &self.sweep;
        if !(s.omega_d_min_over_omega1 > 0.0 && s.omega_d_max_over_omega1 > s.omega_d_min_over_omega1) || s.points < 2 {
            return bad("sweep needs 0 < min < max and at least 2 points".into());
        }
        if self.timeseries.samples_per_period == 0 || self.timeseries.optimize_samples_per_period < 4 {
            return bad("timeseries sampling must be positive".into());
        }
        let n = &self.numerics;
        if !(n.rel_tol > 0.0 && n.symplectic_tol > 0.0 && n.min_step_sim > 0.0) {
            return bad("numerics tolerances must be positive".into());
        }
        if let Some(noise) = &self.noise {
            noise.model()?;
            if !(noise.run_duration_ms >= 0.0) {
                return bad("noise.run_duration_ms must be nonnegative".into());
            }
        }
        let r = &self.readout;
        if r.mode == 0 || r.mode > t.n_ions || r.n_max == 0 || r.truth_n_max < r.n_max || !(r.rabi_khz > 0.0) {
            return bad("readout.mode, n_max, truth_n_max or rabi_khz out of range".into());
        }
        if !(r.window_factor >= 1.0) || r.samples_per_fast_period < 3 || !(r.noise_sigma >= 0.0) {
            return bad("readout.window_factor >= 1, samples_per_fast_period >= 3, noise_sigma >= 0".into());
        }
        Ok(())
    }

    pub fn species(&self) -> Species {
        let z = self.trap.charge_number;
        Species {
            mass: self.trap.atomic_mass_amu * ATOMIC_MASS_UNIT - z as f64 * ELECTRON_MASS,
            charge: z,
        }
    }

    pub fn trap_config(&self) -> TrapConfig {
        let t = &self.trap;
        let layout = SurfaceLayout {
            width: t.electrode_width_um * 1e-6,
            gap: t.rf_gap_um * 1e-6,
            voltages: t.dc_voltages_v,
        };
        let rf = match (t.rf_omega_sq_over_kbar, t.rf_frequency_mhz) {
            (Some(r), _) => RfConfinement::RelativeToKbar(r),
            (None, Some(f)) => RfConfinement::Frequency(2.0 * PI * f * 1e6),
            (None, None) => RfConfinement::RelativeToKbar(0.0),
        };
        TrapConfig {
            n_ions: t.n_ions,
            species: self.species(),
            electrodes: layout.electrodes(),
            height: t.height_um * 1e-6,
            rf,
            axial_aux_curvature: t.axial_aux_curvature_n_per_m,
        }
    }

    /// Chain from the electrostatics, or from the tabulated chi profile.
    pub fn chain(&self) -> Result<IonChain, CliError> {
        match (&self.trap.chi_profile_csv, self.trap.kbar_n_per_m) {
            (Some(path), Some(kbar)) => {
                let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let chi = read_chi_csv(file).map_err(|e| CliError::Config(e.to_string()))?;
                if chi.len() != self.trap.n_ions {
                    return Err(CliError::Config(format!(
                        "chi profile has {} ions, trap.n_ions is {}",
                        chi.len(),
                        self.trap.n_ions
                    )));
                }
                Ok(IonChain::from_chi_profile(&chi, self.species(), kbar))
            }
            _ => Ok(IonChain::build(&self.trap_config())?),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

impl NoiseSection {
    pub fn model(&self) -> Result<NoiseModel, CliError> {
        let scaling = match self.scaling.as_str() {
            "inverse_frequency" => NoiseScaling::InverseFrequency,
            "flat" => NoiseScaling::Flat,
            other => return Err(CliError::Config(format!("noise.scaling {other:?} is not inverse_frequency or flat"))),
        };
        if !(self.s_e_ref_v2_per_m2_hz >= 0.0) || !(self.reference_frequency_mhz > 0.0) {
            return Err(CliError::Config("noise spectral density and reference frequency out of range".into()));
        }
        Ok(NoiseModel {
            s_e_ref: self.s_e_ref_v2_per_m2_hz,
            omega_ref: 2.0 * PI * self.reference_frequency_mhz * 1e6,
            scaling,
        })
    }
}
