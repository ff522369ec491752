use super::radial::{DriveForm, DriveSchedule, RadialCoefficients};
use crate::dynamics::normal_modes;
use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::moore::MirrorTrajectory;
use crate::quad::brent;
use std::f64::consts::PI;

/// Cavity equivalent of a driven chain, lengths in units of d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMatch {
    /// r0 - l0
    pub length: f64,
    pub delta: f64,
    pub omega1_rest: f64,
    pub omega1_compressed: f64,
}

/// Cavity length and depth whose lowest mode pi/(r - l) equals the chain's
/// lowest frequency at drive phases 0 and pi.
pub fn match_cavity(rc: &RadialCoefficients) -> Result<CavityMatch> {
    let w0 = rc.lowest_frequency(0.0)?;
    let peak = match &rc.drive {
        Some(d) => d.value(d.time_at_phase(PI)),
        None => 0.0,
    };
    let wpi = rc.lowest_frequency(peak)?;
    let length = PI / w0;
    Ok(CavityMatch {
        length,
        delta: length - PI / wpi,
        omega1_rest: w0,
        omega1_compressed: wpi,
    })
}

/// One-period averages of every chain frequency under the drive.
pub fn average_frequencies(rc: &RadialCoefficients, samples: usize) -> Result<Vec<f64>> {
    let n = samples.max(1000);
    let drive = rc
        .drive
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("average frequencies need a drive".into()))?;
    let mut acc = vec![0.0; rc.n_ions()];
    // periodic integrand: the trapezoid rule reduces to the plain mean
    for k in 0..n {
        let t = drive.time_at_phase(2.0 * PI * k as f64 / n as f64);
        let b = normal_modes(&rc.stiffness_with(drive.value(t)), 1.0)?;
        for (a, w) in acc.iter_mut().zip(b.frequencies.iter()) {
            *a += w / n as f64;
        }
    }
    Ok(acc)
}

/// Tabulated tweezer schedule that makes the chain's lowest frequency follow
/// pi/(r(t) - l(t)) of the given trajectory.
pub fn optimize_drive(
    rc: &RadialCoefficients,
    traj: &MirrorTrajectory,
    samples_per_period: usize,
) -> Result<DriveSchedule> {
    let template = rc
        .drive
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("drive optimization needs target ions".into()))?;
    let p = traj.protocol;
    let period = 2.0 * PI / traj.omega_d;
    let n = ((p.duration() / period * samples_per_period.max(4) as f64).ceil() as usize).max(2);
    let (lo, hi) = (-1.0, 20.0);
    let f = |w: f64, target: f64| match normal_modes(&rc.stiffness_with(w), 1.0) {
        Ok(b) => b.frequencies[0] - target,
        Err(_) => -target,
    };
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = p.t1 + p.duration() * k as f64 / n as f64;
        let target = PI / traj.length(t);
        let (flo, fhi) = (f(lo, target), f(hi, target));
        if flo * fhi > 0.0 {
            return Err(Error::Unreachable { time: t, target, lo, hi });
        }
        let w = if traj.delta == 0.0 {
            0.0
        } else {
            brent(lo, hi, 1e-13, |w| f(w, target))?
        };
        times.push(t);
        values.push(w);
    }
    Ok(DriveSchedule {
        target_ions: template.target_ions.clone(),
        t1: p.t1,
        t2: p.t2,
        omega_d: traj.omega_d,
        form: DriveForm::Tabulated(Hermite::pchip(times, values)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StageProtocol;
    use crate::trap::{IonChain, Species};

    fn toy() -> IonChain {
        let chi = [3.0, 1.5, 0.5, 0.1, 0.0, 0.0, 0.1, 0.5, 1.5, 3.0];
        IonChain::from_chi_profile(&chi, Species::calcium40(), 1.0)
    }

    #[test]
    fn zero_depth_gives_zero_delta() {
        let rc = toy().coefficients(Some(DriveSchedule::sine(vec![3], 0.0, 1.0, 0.0, 5.0))).unwrap();
        assert_eq!(match_cavity(&rc).unwrap().delta, 0.0);
    }

    #[test]
    fn optimized_schedule_hits_sine_endpoints() {
        let rc = toy().coefficients(Some(DriveSchedule::sine(vec![3], 0.6, 1.0, 0.0, 5.0))).unwrap();
        let m = match_cavity(&rc).unwrap();
        let wd = 0.7;
        let proto = StageProtocol::new(-1.0, 0.0, 2.0 * 2.0 * PI / wd).unwrap();
        let traj = MirrorTrajectory::new(0.0, m.length, m.delta, wd, proto).unwrap();
        let opt = optimize_drive(&rc, &traj, 32).unwrap();
        assert!(opt.value(0.0).abs() < 1e-10);
        assert!((opt.value(PI / wd) - 0.6).abs() < 1e-9);
        assert!((opt.value(2.0 * PI / wd)).abs() < 1e-10);
    }

    #[test]
    fn static_trajectory_needs_no_drive() {
        let rc = toy().coefficients(Some(DriveSchedule::sine(vec![3], 0.6, 1.0, 0.0, 5.0))).unwrap();
        let m = match_cavity(&rc).unwrap();
        let proto = StageProtocol::new(-1.0, 0.0, 10.0).unwrap();
        let traj = MirrorTrajectory::fixed(0.0, m.length, proto).unwrap();
        let opt = optimize_drive(&rc, &traj, 16).unwrap();
        for k in 0..50 {
            assert_eq!(opt.value(0.2 * k as f64), 0.0);
        }
    }

    #[test]
    fn unreachable_target_reported() {
        let rc = toy().coefficients(Some(DriveSchedule::sine(vec![3], 0.6, 1.0, 0.0, 5.0))).unwrap();
        let m = match_cavity(&rc).unwrap();
        let proto = StageProtocol::new(-1.0, 0.0, 10.0).unwrap();
        let traj = MirrorTrajectory::new(0.0, m.length, 0.9 * m.length, 0.1, proto).unwrap();
        assert!(matches!(optimize_drive(&rc, &traj, 16), Err(Error::Unreachable { .. })));
    }
}
