//! Gapless-plane potentials of rectangular electrodes.
//!
//! A rectangle [x1, x2] x [z1, z2] held at V contributes
//! V/(2 pi) * sum over corners of +-F(a, b) with a = x_c - x, b = z_c - z and
//! F(a, b) = atan(a b / (h sqrt(a^2 + b^2 + h^2))).

use super::{Electrode, TrapConfig};

/// Potential and derivatives at a point above the plane (SI units).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcPotential {
    pub phi: f64,
    pub phi_z: f64,
    pub phi_zz: f64,
    pub phi_xx: f64,
}

impl std::ops::AddAssign for DcPotential {
    fn add_assign(&mut self, o: Self) {
        self.phi += o.phi;
        self.phi_z += o.phi_z;
        self.phi_zz += o.phi_zz;
        self.phi_xx += o.phi_xx;
    }
}

// F and its partial derivatives (F, F_b, F_aa, F_bb) with infinite limits.
fn corner(a: f64, b: f64, h: f64) -> [f64; 4] {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => [a.signum() * b.signum() * std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0],
        (true, false) => {
            let s = a.signum();
            let q = b * b + h * h;
            [s * (b / h).atan(), s * h / q, 0.0, -s * 2.0 * b * h / (q * q)]
        }
        (false, true) => {
            let s = b.signum();
            let p = a * a + h * h;
            [s * (a / h).atan(), 0.0, -s * 2.0 * a * h / (p * p), 0.0]
        }
        (false, false) => {
            let rho = a * a + b * b + h * h;
            let sr = rho.sqrt();
            let p = a * a + h * h;
            let q = b * b + h * h;
            let f = (a * b / (h * sr)).atan();
            let fb = h * a / (q * sr);
            let faa = h * b * (-2.0 * a / (p * p * sr) - a / (p * rho * sr));
            let fbb = h * a * (-2.0 * b / (q * q * sr) - b / (q * rho * sr));
            [f, fb, faa, fbb]
        }
    }
}

/// Potential of one electrode at (x, height, z).
pub fn rectangle_potential(e: &Electrode, x: f64, height: f64, z: f64) -> DcPotential {
    let mut acc = [0.0; 4];
    for (xc, sx) in [(e.x_max, 1.0), (e.x_min, -1.0)] {
        for (zc, sz) in [(e.z_max, 1.0), (e.z_min, -1.0)] {
            let c = corner(xc - x, zc - z, height);
            for k in 0..4 {
                acc[k] += sx * sz * c[k];
            }
        }
    }
    let s = e.voltage / (2.0 * std::f64::consts::PI);
    // d/dz = -d/db, d2/dx2 = d2/da2
    DcPotential {
        phi: s * acc[0],
        phi_z: -s * acc[1],
        phi_zz: s * acc[3],
        phi_xx: s * acc[2],
    }
}

/// Summed DC potential on the trap axis (x = 0) at axial position z.
pub fn dc_potential(config: &TrapConfig, z: f64, height: f64) -> DcPotential {
    let mut out = DcPotential::default();
    for e in &config.electrodes {
        out += rectangle_potential(e, 0.0, height, z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::reference_trap;
    use proptest::prelude::*;

    fn plane(v: f64) -> Electrode {
        Electrode {
            x_min: f64::NEG_INFINITY,
            x_max: f64::INFINITY,
            z_min: f64::NEG_INFINITY,
            z_max: f64::INFINITY,
            voltage: v,
        }
    }

    #[test]
    fn whole_plane_gives_its_voltage() {
        let p = rectangle_potential(&plane(3.2), 0.4, 1.7, -2.0);
        assert!((p.phi - 3.2).abs() < 1e-14);
        assert_eq!(p.phi_xx, 0.0);
    }

    #[test]
    fn strip_matches_closed_form() {
        let (a, h, v) = (2.0, 0.7, 1.5);
        let strip = Electrode {
            x_min: f64::NEG_INFINITY,
            x_max: f64::INFINITY,
            z_min: -a / 2.0,
            z_max: a / 2.0,
            voltage: v,
        };
        let p = rectangle_potential(&strip, 0.0, h, 0.0);
        let want = 2.0 * v / std::f64::consts::PI * (a / (2.0 * h)).atan();
        assert!((p.phi - want).abs() < 1e-14);
    }

    #[test]
    fn splitting_an_electrode_is_additive() {
        let whole = Electrode { x_min: -1.0, x_max: 2.0, z_min: -0.5, z_max: 1.5, voltage: 2.0 };
        let left = Electrode { x_max: 0.3, ..whole };
        let right = Electrode { x_min: 0.3, ..whole };
        let (x, h, z) = (0.1, 0.8, 0.2);
        let w = rectangle_potential(&whole, x, h, z);
        let mut s = rectangle_potential(&left, x, h, z);
        s += rectangle_potential(&right, x, h, z);
        assert!((w.phi - s.phi).abs() < 1e-14);
        assert!((w.phi_xx - s.phi_xx).abs() < 1e-13);
        assert!((w.phi_zz - s.phi_zz).abs() < 1e-13);
    }

    #[test]
    fn reference_layout_is_mirror_symmetric() {
        let cfg = reference_trap();
        let a = dc_potential(&cfg, 23e-6, cfg.height);
        let b = dc_potential(&cfg, -23e-6, cfg.height);
        assert!((a.phi - b.phi).abs() < 1e-12);
        assert!((a.phi_z + b.phi_z).abs() < 1e-6);
        assert!(dc_potential(&cfg, 0.0, cfg.height).phi_zz > 0.0);
    }

    proptest! {
        #[test]
        fn analytic_derivatives_match_differences(
            x1 in -2.0f64..0.0, w in 0.2f64..2.0, z1 in -2.0f64..0.0, l in 0.2f64..2.0,
            x in -1.0f64..1.0, z in -1.0f64..1.0, h in 0.3f64..1.5, inf in 0usize..3,
        ) {
            let mut e = Electrode { x_min: x1, x_max: x1 + w, z_min: z1, z_max: z1 + l, voltage: 1.3 };
            if inf == 1 { e.x_max = f64::INFINITY; }
            if inf == 2 { e.z_min = f64::NEG_INFINITY; }
            let p = rectangle_potential(&e, x, h, z);
            let d = 1e-4;
            let f = |x: f64, z: f64| rectangle_potential(&e, x, h, z).phi;
            let fz = (f(x, z + d) - f(x, z - d)) / (2.0 * d);
            let fzz = (f(x, z + d) - 2.0 * f(x, z) + f(x, z - d)) / (d * d);
            let fxx = (f(x + d, z) - 2.0 * f(x, z) + f(x - d, z)) / (d * d);
            prop_assert!((p.phi_z - fz).abs() < 1e-6);
            prop_assert!((p.phi_zz - fzz).abs() < 1e-4);
            prop_assert!((p.phi_xx - fxx).abs() < 1e-4);
        }
    }
}
