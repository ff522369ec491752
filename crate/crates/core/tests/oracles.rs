mod support;

use casimir_core::dynamics::{occupation_timeseries, QuadraticSystem, StageProtocol, StepControl};
use casimir_core::moore::{moore_occupations, MirrorTrajectory, MooreOptions};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use support::{FockTwoMode, GalerkinCavity};

#[test]
fn moore_matches_fixed_domain_galerkin() {
    let (l0, delta) = (2.0, 0.1);
    let wd = 2.0 * PI / l0;
    let periods = 3.0;
    let t_end = periods * 2.0 * PI / wd;
    let proto = StageProtocol::new(-1.0, 0.0, t_end).unwrap();
    let traj = MirrorTrajectory::new(0.0, l0, delta, wd, proto).unwrap();
    let moore = moore_occupations(&traj, &MooreOptions::new(8)).unwrap();
    let oracle = GalerkinCavity {
        l0,
        delta,
        omega_d: wd,
        modes: 32,
    }
    .occupations(t_end, 4000, 3);
    println!("moore {:?} oracle {oracle:?}", &moore.occupations.as_slice()[..3]);
    for l in 0..3 {
        assert!((moore.occupations[l] - oracle[l]).abs() <= 1e-4, "mode {}", l + 1);
    }
}

fn two_mode(alpha: f64, wd: f64) -> impl Fn(f64) -> DMatrix<f64> + Clone {
    move |t: f64| {
        let s = (0.5 * wd * t.max(0.0)).sin();
        DMatrix::from_row_slice(2, 2, &[1.3 + alpha * s * s, -0.3, -0.3, 1.3])
    }
}

#[test]
fn occupations_match_truncated_fock_space() {
    let (alpha, wd) = (0.12, 2.0);
    let period = 2.0 * PI / wd;
    let t2 = 6.0 * period;
    let k = two_mode(alpha, wd);
    let k2 = k.clone();
    let proto = StageProtocol::new(-1.0, 0.0, t2).unwrap();
    let sys = QuadraticSystem::new(2, 1.0, move |t| k2(t.min(t2)), Some(proto)).unwrap();
    let basis = sys.modes_at(-1.0).unwrap();
    let times: Vec<f64> = (1..=6).map(|p| p as f64 * period).collect();
    let exact = occupation_timeseries(&sys, &proto, Some(&basis), &times, &StepControl::default()).unwrap();
    let fock = FockTwoMode { n_max: 40 }.evolve(k, &times, 400);
    for (e, f) in exact.iter().zip(fock.iter()) {
        println!("t {:.3} symplectic {:?} fock {f:?}", e.t, e.occupations.as_slice());
        for l in 0..2 {
            assert!((e.occupations[l] - f[l]).abs() <= 1e-3);
        }
    }
    assert!(exact[5].occupations[0] > 1e-2);
}
