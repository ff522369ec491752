use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable static configuration: eigenvalue {index} is {value:.6e}")]
    Unstable { index: usize, value: f64 },

    #[error("stiffness matrix is not symmetric (relative defect {0:.3e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("symplectic defect {defect:.3e} exceeds tolerance {tolerance:.1e}")]
    SymplecticDefect { defect: f64, tolerance: f64 },

    #[error("root search failed: {0}")]
    Root(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("point z = {z} lies outside the cavity [{left}, {right}] at t = {t}")]
    OutsideCavity { t: f64, z: f64, left: f64, right: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("equilibrium search did not converge after {iterations} iterations (gradient {gradient:.3e}); last iterate {last:?}")]
    Equilibrium {
        iterations: usize,
        gradient: f64,
        last: Vec<f64>,
    },

    #[error("linear chain is unstable towards a zigzag: radial eigenvalue {index} is {value:.6e}")]
    Zigzag { index: usize, value: f64 },

    #[error("target frequency {target:.6e} unreachable at t = {time} within drive bracket [{lo:.3e}, {hi:.3e}]")]
    Unreachable {
        time: f64,
        target: f64,
        lo: f64,
        hi: f64,
    },

    #[error("sampling window {actual:.4e} cannot resolve the Rabi frequencies; need at least {required:.4e}")]
    IllConditionedWindow { required: f64, actual: f64 },

    #[error("Fock truncation n_max = {n_max} leaves tail mass {tail:.3e}; increase n_max")]
    Truncation { n_max: usize, tail: f64 },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
