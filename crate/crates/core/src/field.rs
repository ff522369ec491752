//! Lattice discretization of the field with a mirror mass term c1(t, z).
//!
//! On cells of widths d_i with bond lengths b between neighbouring cell
//! centres, the rescaled amplitudes Q_i = sqrt(d_i) A_i have unit mass and
//! K_ii = c1_i + (1/b_left + 1/b_right)/d_i, K_ij = -1/(b sqrt(d_i d_j)).
//! On an equidistant grid this is 2/d^2 + c1_i on the diagonal and -1/d^2
//! between neighbours.

use crate::dynamics::{QuadraticSystem, StageProtocol};
use crate::error::{Error, Result};
use crate::moore::MirrorTrajectory;
use crate::quad::adaptive;
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

type C1Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type CavityFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// c1(t, z): zero on the cavity [l(t), r(t)], positive in the walls.
#[derive(Clone)]
pub struct WallProfile {
    c1: C1Fn,
    cavity: CavityFn,
}

impl fmt::Debug for WallProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WallProfile")
    }
}

impl WallProfile {
    /// The cavity function supplies the interval where c1 vanishes; it is
    /// also used to split quadrature at the edges.
    pub fn new<F, G>(c1: F, cavity: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            c1: Arc::new(c1),
            cavity: Arc::new(cavity),
        }
    }

    /// Constant walls of height `wall` outside the mirrors of `traj`.
    pub fn step(traj: MirrorTrajectory, wall: f64) -> Self {
        Self::new(
            move |t, z| {
                if z < traj.left(t) || z > traj.right(t) {
                    wall
                } else {
                    0.0
                }
            },
            move |t| (traj.left(t), traj.right(t)),
        )
    }

    pub fn value(&self, t: f64, z: f64) -> f64 {
        (self.c1)(t, z)
    }

    pub fn cavity(&self, t: f64) -> (f64, f64) {
        (self.cavity)(t)
    }

    /// Check c1 = 0 inside and c1 >= 0 on `samples` points of [a, b].
    pub fn check(&self, t: f64, a: f64, b: f64, samples: usize) -> Result<()> {
        let (l, r) = self.cavity(t);
        for k in 0..=samples {
            let z = a + (b - a) * k as f64 / samples as f64;
            let v = self.value(t, z);
            if !(v >= 0.0) || (z > l && z < r && v != 0.0) {
                return Err(Error::InvalidParameter(format!("c1({t}, {z}) = {v} violates the wall profile")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Field pinned to zero one cell beyond each end.
    #[default]
    Fixed,
    /// No bond beyond the ends.
    Free,
}

/// Cell edges z_0 < z_1 < ... < z_n.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    edges: Vec<f64>,
}

impl Grid {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid edges must increase strictly".into()));
        }
        Ok(Self { edges })
    }

    pub fn equidistant(start: f64, spacing: f64, cells: usize) -> Result<Self> {
        Self::new((0..=cells).map(|i| start + spacing * i as f64).collect())
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }
}

/// c1_i = (1/d_i) * integral of c1(t, z) over cell i.
pub fn coarse_grain(profile: &WallProfile, grid: &Grid, t: f64) -> Result<DVector<f64>> {
    let (l, r) = profile.cavity(t);
    let mut out = DVector::zeros(grid.cells());
    for i in 0..grid.cells() {
        let (a, b) = (grid.edges[i], grid.edges[i + 1]);
        let mut cuts = vec![a];
        for e in [l, r] {
            if e > a && e < b {
                cuts.push(e);
            }
        }
        cuts.push(b);
        let f = |z: f64| profile.value(t, z);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            acc += adaptive(&f, w[0], w[1], 1e-13 * (b - a)).map_err(|_| Error::Quadrature { a, b })?;
        }
        out[i] = acc / (b - a);
    }
    Ok(out)
}

/// Unit-mass stiffness for on-site terms `c1` on `grid`.
pub fn lattice_stiffness(grid: &Grid, c1: &DVector<f64>, boundary: Boundary) -> DMatrix<f64> {
    let n = grid.cells();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let di = grid.width(i);
        let mut diag = c1[i];
        if i + 1 < n {
            let b = grid.center(i + 1) - grid.center(i);
            let dj = grid.width(i + 1);
            let off = -1.0 / (b * (di * dj).sqrt());
            k[(i, i + 1)] = off;
            k[(i + 1, i)] = off;
            diag += 1.0 / (b * di);
        } else if boundary == Boundary::Fixed {
            diag += 1.0 / (di * di);
        }
        if i > 0 {
            let b = grid.center(i) - grid.center(i - 1);
            diag += 1.0 / (b * di);
        } else if boundary == Boundary::Fixed {
            diag += 1.0 / (di * di);
        }
        k[(i, i)] = diag;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDependence {
    /// Freeze the profile at this time.
    Static(f64),
    /// Follow the profile through the protocol.
    Dynamic(StageProtocol),
}

#[derive(Debug, Clone)]
pub struct DiscreteFieldSystem {
    pub grid: Grid,
    pub boundary: Boundary,
    pub profile: WallProfile,
    pub system: QuadraticSystem,
}

impl DiscreteFieldSystem {
    pub fn coefficients(&self, t: f64) -> Result<DVector<f64>> {
        coarse_grain(&self.profile, &self.grid, t)
    }
}

/// Discretized Hamiltonian H^d as a quadratic system.
pub fn build_hd(
    profile: &WallProfile,
    grid: &Grid,
    boundary: Boundary,
    time: TimeDependence,
) -> Result<DiscreteFieldSystem> {
    if grid.cells() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 cells, got {}", grid.cells())));
    }
    let system = match time {
        TimeDependence::Static(t) => {
            let c1 = coarse_grain(profile, grid, t)?;
            QuadraticSystem::constant(lattice_stiffness(grid, &c1, boundary), 1.0)?
        }
        TimeDependence::Dynamic(p) => {
            coarse_grain(profile, grid, p.t0)?;
            let (pr, g) = (profile.clone(), grid.clone());
            let n = g.cells();
            QuadraticSystem::new(
                n,
                1.0,
                move |t| match coarse_grain(&pr, &g, t) {
                    Ok(c1) => lattice_stiffness(&g, &c1, boundary),
                    Err(_) => DMatrix::from_element(n, n, f64::NAN),
                },
                Some(p),
            )?
        }
    };
    Ok(DiscreteFieldSystem {
        grid: grid.clone(),
        boundary,
        profile: profile.clone(),
        system,
    })
}

/// Lattice for a moving-mirror cavity: spacing L0/cells_per_length, the
/// initial mirrors on cell edges and `wall_cells` wall cells beyond the
/// farthest mirror excursion on each side.
pub fn cavity_lattice(traj: &MirrorTrajectory, cells_per_length: usize, wall: f64, wall_cells: usize) -> Result<DiscreteFieldSystem> {
    let d = traj.initial_length() / cells_per_length as f64;
    let inner = cells_per_length + (traj.delta / d).ceil() as usize;
    let cells = inner + 2 * wall_cells;
    let grid = Grid::equidistant(traj.l0 - wall_cells as f64 * d, d, cells)?;
    let profile = WallProfile::step(*traj, wall);
    build_hd(&profile, &grid, Boundary::Fixed, TimeDependence::Dynamic(traj.protocol))
}
