//! Ion-chain realization: surface-trap electrostatics, chain equilibrium,
//! radial couplings, the tweezer drive and cavity matching.
//!
//! Correspondence with the lattice field (simulation units, m = 1, k-bar = 1):
//! the staggered radial displacement of ion i plays A_i, its momentum Pi_i,
//! the coupling k_{i,i+1}/m plays d^-2 and the on-site chi_i/m plays the mirror
//! mass term c1_i.

mod chain;
mod electrostatics;
mod matching;
mod radial;

pub use chain::{couplings, equilibrium_positions, ChainEquilibrium, Couplings};
pub use electrostatics::{dc_potential, rectangle_potential, DcPotential};
pub use matching::{average_frequencies, match_cavity, optimize_drive, CavityMatch};
pub use radial::{
    radial_chis, read_chi_csv, staggered_stiffness, to_quadratic, write_chi_csv, DriveForm, DriveSchedule, IonChain,
    RadialCoefficients,
};

use crate::error::{Error, Result};

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Coulomb constant times (Z e)^2.
pub fn coulomb_strength(charge: i32) -> f64 {
    let q = charge as f64 * ELEMENTARY_CHARGE;
    q * q / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Species {
    /// kg
    pub mass: f64,
    pub charge: i32,
}

impl Species {
    /// Singly ionized calcium-40.
    pub fn calcium40() -> Self {
        Self {
            mass: 39.962_590_863 * ATOMIC_MASS_UNIT - ELECTRON_MASS,
            charge: 1,
        }
    }
}

/// Rectangular DC electrode in the trap plane; coordinates in metres, x
/// transverse and z along the chain. Infinite extents are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Electrode {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub voltage: f64,
}

impl Electrode {
    fn overlaps(&self, other: &Electrode) -> bool {
        self.x_min < other.x_max && other.x_min < self.x_max && self.z_min < other.z_max && other.z_min < self.z_max
    }
}

/// Radial pseudopotential confinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RfConfinement {
    /// omega_RF in rad/s.
    Frequency(f64),
    /// omega_RF^2 in units of k-bar/m.
    RelativeToKbar(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    pub n_ions: usize,
    pub species: Species,
    pub electrodes: Vec<Electrode>,
    /// Ion height above the electrode plane, m.
    pub height: f64,
    pub rf: RfConfinement,
    /// Optional extra axial curvature (N/m) added to the DC solution.
    pub axial_aux_curvature: f64,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
        }
        if !(self.height > 0.0) || !self.height.is_finite() {
            return Err(Error::InvalidParameter(format!("height must be positive, got {}", self.height)));
        }
        if !(self.species.mass > 0.0) || self.species.charge == 0 {
            return Err(Error::InvalidParameter("species needs positive mass and nonzero charge".into()));
        }
        for (i, e) in self.electrodes.iter().enumerate() {
            if !e.voltage.is_finite() {
                return Err(Error::InvalidParameter(format!("electrode {} voltage is not finite", i + 1)));
            }
            if !(e.x_min < e.x_max && e.z_min < e.z_max) {
                return Err(Error::InvalidParameter(format!("electrode {} has an empty extent", i + 1)));
            }
            for (j, f) in self.electrodes.iter().enumerate().skip(i + 1) {
                if e.overlaps(f) {
                    return Err(Error::InvalidParameter(format!("electrodes {} and {} overlap", i + 1, j + 1)));
                }
            }
        }
        match self.rf {
            RfConfinement::Frequency(w) | RfConfinement::RelativeToKbar(w) if !(w >= 0.0) => {
                Err(Error::InvalidParameter("RF confinement must be nonnegative".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Two rows of three contiguous DC electrodes flanking the RF gap.
///
/// Each row starts at |x| = gap/2 and extends to infinity in x; the
/// electrodes have width `width` along z and are centred at -width, 0, +width.
/// Voltages are numbered in pairs across the gap: (1, 2) at z = -width,
/// (3, 4) at z = 0, (5, 6) at z = +width, odd numbers on the -x side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLayout {
    pub width: f64,
    pub gap: f64,
    pub voltages: [f64; 6],
}

impl SurfaceLayout {
    pub fn electrodes(&self) -> Vec<Electrode> {
        let mut out = Vec::with_capacity(6);
        for (k, zc) in [-self.width, 0.0, self.width].into_iter().enumerate() {
            let (z_min, z_max) = (zc - 0.5 * self.width, zc + 0.5 * self.width);
            out.push(Electrode {
                x_min: f64::NEG_INFINITY,
                x_max: -0.5 * self.gap,
                z_min,
                z_max,
                voltage: self.voltages[2 * k],
            });
            out.push(Electrode {
                x_min: 0.5 * self.gap,
                x_max: f64::INFINITY,
                z_min,
                z_max,
                voltage: self.voltages[2 * k + 1],
            });
        }
        out
    }
}

/// Reference layout: 20 Ca-40 ions at 80 um height over 80 um electrodes.
pub fn reference_trap() -> TrapConfig {
    let layout = SurfaceLayout {
        width: 80e-6,
        gap: 230e-6,
        voltages: [-5.61, -5.61, 1.75, 1.75, -5.61, -5.61],
    };
    TrapConfig {
        n_ions: 20,
        species: Species::calcium40(),
        electrodes: layout.electrodes(),
        height: 80e-6,
        rf: RfConfinement::RelativeToKbar(7.40),
        axial_aux_curvature: 0.0,
    }
}
