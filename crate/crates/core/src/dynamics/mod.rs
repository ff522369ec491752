//! Time-dependent quadratic Hamiltonians H = P^2/2m + X^T K(t) X / 2.
//!
//! Everything here works in simulation units (m = 1, k-bar = 1 for the ion
//! chain). Phase-space vectors are ordered `(X_1..X_N, P_1..P_N)`; dense
//! matrices are nalgebra column-major, row-major only at the CSV boundary.

mod bogoliubov;
mod propagate;

pub use bogoliubov::{bogoliubov, occupation_timeseries, occupations, BogoliubovMap, TimeSample};
pub use propagate::{harmonic_flow, propagate, Method, StepControl, SymplecticPropagator};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::fmt;
use std::sync::Arc;

pub type StiffnessFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Stage boundaries: I = [t0, t1), II = [t1, t2), III = [t2, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageProtocol {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
}

impl StageProtocol {
    pub fn new(t0: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(t0 < t1 && t1 < t2) || !t2.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stage times must satisfy t0 < t1 < t2, got {t0}, {t1}, {t2}"
            )));
        }
        Ok(Self { t0, t1, t2 })
    }

    pub fn duration(&self) -> f64 {
        self.t2 - self.t1
    }
}

/// N oscillators of common mass with stiffness matrix K(t).
#[derive(Clone)]
pub struct QuadraticSystem {
    n: usize,
    mass: f64,
    stiffness: StiffnessFn,
    protocol: Option<StageProtocol>,
    constant: bool,
}

impl fmt::Debug for QuadraticSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticSystem")
            .field("n", &self.n)
            .field("mass", &self.mass)
            .field("protocol", &self.protocol)
            .field("constant", &self.constant)
            .finish()
    }
}

impl QuadraticSystem {
    /// Time-dependent system. When a protocol is given, K is taken to be
    /// constant outside stage II and those stretches are propagated exactly.
    pub fn new<F>(n: usize, mass: f64, stiffness: F, protocol: Option<StageProtocol>) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::InvalidParameter("system needs at least one mode".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        let sys = Self {
            n,
            mass,
            stiffness: Arc::new(stiffness),
            protocol,
            constant: false,
        };
        let t_probe = protocol.map_or(0.0, |p| p.t0);
        let k = sys.stiffness(t_probe);
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::Dimension(format!(
                "stiffness is {}x{}, expected {n}x{n}",
                k.nrows(),
                k.ncols()
            )));
        }
        check_symmetric(&k)?;
        Ok(sys)
    }

    /// Time-independent system.
    pub fn constant(k: DMatrix<f64>, mass: f64) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(Error::Dimension(format!("stiffness is {}x{}", k.nrows(), k.ncols())));
        }
        check_symmetric(&k)?;
        let mut sys = Self::new(n, mass, move |_| k.clone(), None)?;
        sys.constant = true;
        Ok(sys)
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn protocol(&self) -> Option<StageProtocol> {
        self.protocol
    }

    pub fn stiffness(&self, t: f64) -> DMatrix<f64> {
        (self.stiffness)(t)
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// True if K is known to be constant on [a, b].
    pub fn is_static_on(&self, a: f64, b: f64) -> bool {
        if self.constant {
            return true;
        }
        match self.protocol {
            Some(p) => b <= p.t1 || a >= p.t2,
            None => false,
        }
    }

    /// Instantaneous normal modes at time t.
    pub fn modes_at(&self, t: f64) -> Result<ModeBasis> {
        normal_modes(&self.stiffness(t), self.mass)
    }
}

/// Relative symmetry check at 1e-12.
pub fn check_symmetric(k: &DMatrix<f64>) -> Result<()> {
    let scale = k.amax().max(f64::MIN_POSITIVE);
    let defect = (k - k.transpose()).amax() / scale;
    if defect > 1e-12 {
        return Err(Error::NotSymmetric(defect));
    }
    Ok(())
}

/// Instantaneous eigenmodes: K g = m w^2 g.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub frequencies: DVector<f64>,
    pub vectors: DMatrix<f64>,
    pub mass: f64,
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Diagonalize K/m. Eigenvectors get their largest-magnitude entry positive;
/// degenerate groups are ordered lexicographically.
pub fn normal_modes(k: &DMatrix<f64>, mass: f64) -> Result<ModeBasis> {
    if k.nrows() != k.ncols() || k.nrows() == 0 {
        return Err(Error::Dimension(format!("stiffness is {}x{}", k.nrows(), k.ncols())));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    check_symmetric(k)?;
    let n = k.nrows();
    let sym = 0.5 * (k + k.transpose());
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vals = Vec::with_capacity(n);
    let mut vecs: Vec<DVector<f64>> = Vec::with_capacity(n);
    for &i in &order {
        vals.push(eig.eigenvalues[i]);
        vecs.push(fix_sign(eig.eigenvectors.column(i).into_owned()));
    }
    for (i, &v) in vals.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::Unstable { index: i + 1, value: v });
        }
    }

    // lexicographic order inside (numerically) degenerate groups
    let scale = vals[n - 1].abs().max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end] - vals[end - 1]).abs() <= 1e-10 * scale {
            end += 1;
        }
        if end - start > 1 {
            vecs[start..end].sort_by(|a, b| lex_cmp(b, a));
        }
        start = end;
    }

    let frequencies = DVector::from_iterator(n, vals.iter().map(|v| (v / mass).sqrt()));
    let vectors = DMatrix::from_columns(&vecs);
    Ok(ModeBasis {
        frequencies,
        vectors,
        mass,
    })
}

fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let amax = v.amax();
    // first component within rounding of the maximum decides
    let pivot = v.iter().position(|x| x.abs() >= amax * (1.0 - 1e-12)).unwrap_or(0);
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
    v
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-12 {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_oscillator() {
        let b = normal_modes(&DMatrix::from_element(1, 1, 2.0 * 9.0), 2.0).unwrap();
        assert!((b.frequencies[0] - 3.0).abs() < 1e-14);
        assert_eq!(b.vectors[(0, 0)], 1.0);
    }

    #[test]
    fn two_coupled_oscillators() {
        let (a, c, m) = (1.3, 0.4, 1.7);
        let k = DMatrix::from_row_slice(2, 2, &[a + c, -c, -c, a + c]) * m;
        let b = normal_modes(&k, m).unwrap();
        assert!((b.frequencies[0] - a.sqrt()).abs() < 1e-13);
        assert!((b.frequencies[1] - (a + 2.0 * c).sqrt()).abs() < 1e-13);
        let s = 0.5f64.sqrt();
        assert!((b.vectors[(0, 0)] - s).abs() < 1e-13 && (b.vectors[(1, 0)] - s).abs() < 1e-13);
        assert!((b.vectors[(0, 1)].abs() - s).abs() < 1e-13);
        assert!((b.vectors[(0, 1)] + b.vectors[(1, 1)]).abs() < 1e-13);
    }

    #[test]
    fn negative_eigenvalue_names_index() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        match normal_modes(&k, 1.0) {
            Err(Error::Unstable { index, value }) => {
                assert_eq!(index, 1);
                assert_eq!(value, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_rejected() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(normal_modes(&k, 1.0), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn degenerate_basis_is_deterministic() {
        let k = DMatrix::<f64>::identity(3, 3) * 4.0;
        let b = normal_modes(&k, 1.0).unwrap();
        for i in 0..3 {
            let col = b.vectors.column(i);
            assert!(col.amax() > 0.0);
            let p = col.iter().position(|x| x.abs() == col.amax()).unwrap();
            assert!(col[p] > 0.0);
        }
        let again = normal_modes(&k, 1.0).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn stage_protocol_validation() {
        assert!(StageProtocol::new(0.0, 1.0, 1.0).is_err());
        assert!(StageProtocol::new(0.0, 1.0, 2.0).is_ok());
    }
}
