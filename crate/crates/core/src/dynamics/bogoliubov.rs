use super::{propagate, ModeBasis, QuadraticSystem, StageProtocol, StepControl, SymplecticPropagator};
use crate::error::{Error, Result};
use crate::linalg::{cmax, complex_identity};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// b_l = sum_k alpha_lk a_k + beta_lk a_k^dagger, with a the stage-I and b the
/// stage-III annihilation operators (hbar = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    pub alpha: DMatrix<Complex64>,
    pub beta: DMatrix<Complex64>,
}

impl BogoliubovMap {
    /// (max |aa^+ - bb^+ - I|, max |ab^T - (ab^T)^T|)
    pub fn identity_defects(&self) -> (f64, f64) {
        let n = self.alpha.nrows();
        let unit = &self.alpha * self.alpha.adjoint() - &self.beta * self.beta.adjoint() - complex_identity(n);
        let ab = &self.alpha * self.beta.transpose();
        (cmax(&unit), cmax(&(&ab - ab.transpose())))
    }
}

/// Bogoliubov coefficients of `s` between the canonical modes of two stages.
pub fn bogoliubov(
    s: &SymplecticPropagator,
    basis_in: &ModeBasis,
    basis_out: &ModeBasis,
    symplectic_tol: f64,
) -> Result<BogoliubovMap> {
    let n = s.n_modes();
    if basis_in.len() != n || basis_out.len() != n {
        return Err(Error::Dimension(format!(
            "propagator has {n} modes but bases have {} and {}",
            basis_in.len(),
            basis_out.len()
        )));
    }
    let defect = s.defect();
    if !(defect <= symplectic_tol) {
        return Err(Error::SymplecticDefect {
            defect,
            tolerance: symplectic_tol,
        });
    }
    let c = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let i = Complex64::i();

    // X0 = Xa (a + a^+), P0 = -i Pa (a - a^+)
    let mut xa = basis_in.vectors.clone();
    let mut pa = basis_in.vectors.clone();
    for k in 0..n {
        let mw = basis_in.mass * basis_in.frequencies[k];
        xa.column_mut(k).scale_mut(1.0 / (2.0 * mw).sqrt());
        pa.column_mut(k).scale_mut((0.5 * mw).sqrt());
    }
    // b = U X + i V P
    let mut u = basis_out.vectors.transpose();
    let mut v = basis_out.vectors.transpose();
    for l in 0..n {
        let mw = basis_out.mass * basis_out.frequencies[l];
        u.row_mut(l).scale_mut((0.5 * mw).sqrt());
        v.row_mut(l).scale_mut(1.0 / (2.0 * mw).sqrt());
    }
    let m = &s.matrix;
    let sxx = m.view((0, 0), (n, n)).into_owned();
    let sxp = m.view((0, n), (n, n)).into_owned();
    let spx = m.view((n, 0), (n, n)).into_owned();
    let spp = m.view((n, n), (n, n)).into_owned();

    let (xa, pa) = (c(&xa), c(&pa));
    let (sxx, sxp, spx, spp) = (c(&sxx), c(&sxp), c(&spx), c(&spp));
    let (u, v) = (c(&u), c(&v));

    let x_a = &sxx * &xa - (&sxp * &pa) * i;
    let x_ad = &sxx * &xa + (&sxp * &pa) * i;
    let p_a = &spx * &xa - (&spp * &pa) * i;
    let p_ad = &spx * &xa + (&spp * &pa) * i;

    let alpha = &u * x_a + (&v * p_a) * i;
    let beta = &u * x_ad + (&v * p_ad) * i;
    Ok(BogoliubovMap { alpha, beta })
}

/// Vacuum occupations <n_l> = sum_k |beta_lk|^2.
pub fn occupations(map: &BogoliubovMap) -> DVector<f64> {
    DVector::from_iterator(
        map.beta.nrows(),
        map.beta.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    pub occupations: DVector<f64>,
}

/// Occupations at each sample time as if the drive stopped there. With
/// `basis_out = None` the instantaneous eigenbasis of K(t) is used.
pub fn occupation_timeseries(
    sys: &QuadraticSystem,
    protocol: &StageProtocol,
    basis_out: Option<&ModeBasis>,
    sample_times: &[f64],
    control: &StepControl,
) -> Result<Vec<TimeSample>> {
    let basis_in = sys.modes_at(protocol.t0)?;
    let mut order: Vec<usize> = (0..sample_times.len()).collect();
    order.sort_by(|&a, &b| sample_times[a].total_cmp(&sample_times[b]));
    let mut results = vec![None; sample_times.len()];
    let mut s = SymplecticPropagator::identity(sys.n_modes(), protocol.t0);
    for idx in order {
        let t = sample_times[idx];
        if !(t >= protocol.t0) {
            return Err(Error::InvalidParameter(format!(
                "sample time {t} precedes t0 = {}",
                protocol.t0
            )));
        }
        if t > s.t_end {
            let step = propagate(sys, s.t_end, t, control)?;
            s = s.then(&step);
        }
        let occ = if t <= protocol.t1 {
            DVector::zeros(sys.n_modes())
        } else {
            let out = match basis_out {
                Some(b) => b.clone(),
                None => sys.modes_at(t)?,
            };
            occupations(&bogoliubov(&s, &basis_in, &out, control.symplectic_tol)?)
        };
        results[idx] = Some(TimeSample { t, occupations: occ });
    }
    Ok(results.into_iter().map(|r| r.unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::normal_modes;

    fn single(omega: f64) -> ModeBasis {
        normal_modes(&DMatrix::from_element(1, 1, omega * omega), 1.0).unwrap()
    }

    #[test]
    fn identity_map() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -0.3, -0.3, 1.0]);
        let b = normal_modes(&k, 1.0).unwrap();
        let map = bogoliubov(&SymplecticPropagator::identity(2, 0.0), &b, &b, 1e-8).unwrap();
        assert!(cmax(&(&map.alpha - complex_identity(2))) < 1e-14);
        assert!(cmax(&map.beta) < 1e-14);
    }

    #[test]
    fn sudden_quench() {
        let (wa, wb) = (0.7, 1.9);
        let map = bogoliubov(&SymplecticPropagator::identity(1, 0.0), &single(wa), &single(wb), 1e-8).unwrap();
        let want = (wa - wb).powi(2) / (4.0 * wa * wb);
        assert!((map.beta[(0, 0)].norm_sqr() - want).abs() < 1e-14);
        let (d1, d2) = map.identity_defects();
        assert!(d1 < 1e-14 && d2 < 1e-14);
    }

    #[test]
    fn quench_to_four_times_frequency() {
        let map = bogoliubov(&SymplecticPropagator::identity(1, 0.0), &single(1.0), &single(4.0), 1e-8).unwrap();
        assert!((occupations(&map)[0] - 9.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn static_evolution_is_a_phase() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -0.3, -0.3, 1.0]);
        let sys = QuadraticSystem::constant(k.clone(), 1.0).unwrap();
        let t = 3.7;
        let s = propagate(&sys, 0.0, t, &StepControl::default()).unwrap();
        let b = normal_modes(&k, 1.0).unwrap();
        let map = bogoliubov(&s, &b, &b, 1e-8).unwrap();
        for l in 0..2 {
            let want = Complex64::from_polar(1.0, -b.frequencies[l] * t);
            assert!((map.alpha[(l, l)] - want).norm() < 1e-12);
        }
        assert!(cmax(&map.beta) < 1e-12);
    }

    #[test]
    fn refuses_non_symplectic() {
        let mut s = SymplecticPropagator::identity(1, 0.0);
        s.matrix[(0, 0)] = 2.0;
        assert!(matches!(
            bogoliubov(&s, &single(1.0), &single(1.0), 1e-8),
            Err(Error::SymplecticDefect { .. })
        ));
    }

    #[test]
    fn samples_in_stage_one_are_zero() {
        let p = StageProtocol::new(0.0, 5.0, 9.0).unwrap();
        let sys = QuadraticSystem::new(
            1,
            1.0,
            move |t: f64| DMatrix::from_element(1, 1, 1.0 + 0.3 * (t.clamp(5.0, 9.0) - 5.0).sin().powi(2)),
            Some(p),
        )
        .unwrap();
        let ts = occupation_timeseries(&sys, &p, None, &[1.0, 0.0, 4.9], &StepControl::default()).unwrap();
        assert!(ts.iter().all(|s| s.occupations[0] == 0.0));
        assert_eq!(ts[0].t, 1.0);
    }
}
