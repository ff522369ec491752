use casimir_core::dynamics::{
    bogoliubov, occupation_timeseries, occupations, propagate, QuadraticSystem, StageProtocol, StepControl,
};
use casimir_core::readout::photon_statistics;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::PI;

fn three_mode(alpha: f64, wd: f64) -> impl Fn(f64) -> DMatrix<f64> + Clone + Send + Sync + 'static {
    move |t: f64| {
        let s = (0.5 * wd * t.max(0.0)).sin();
        let mut k = DMatrix::from_row_slice(3, 3, &[2.0, -0.4, 0.1, -0.4, 1.5, -0.3, 0.1, -0.3, 1.1]);
        k[(0, 0)] += alpha * s * s;
        k[(1, 2)] += 0.5 * alpha * s;
        k[(2, 1)] += 0.5 * alpha * s;
        k
    }
}

fn reflect(n: usize) -> DMatrix<f64> {
    let mut r = DMatrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        r[(i, i)] = -1.0;
    }
    r
}

#[test]
fn forward_then_reversed_drive_restores_vacuum() {
    let (alpha, wd) = (0.3, 2.4);
    let t_end = 5.0 * 2.0 * PI / wd;
    let k = three_mode(alpha, wd);
    let k_rev = k.clone();
    let fwd = QuadraticSystem::new(3, 1.0, k, None).unwrap();
    let mirror = QuadraticSystem::new(3, 1.0, move |t| k_rev(t_end - t), None).unwrap();
    let control = StepControl::default();
    let s_fwd = propagate(&fwd, 0.0, t_end, &control).unwrap();
    let s_mirror = propagate(&mirror, 0.0, t_end, &control).unwrap();
    // the backward evolution is R S_mirror R with R flipping the momenta
    let r = reflect(3);
    let mut round = s_fwd.clone();
    round.matrix = &r * &s_mirror.matrix * &r * &s_fwd.matrix;
    round.t_end = round.t_start;
    assert!((&round.matrix - DMatrix::identity(6, 6)).amax() < 1e-8);

    let basis = fwd.modes_at(0.0).unwrap();
    let there = bogoliubov(&s_fwd, &basis, &basis, 1e-8).unwrap();
    let back = bogoliubov(&round, &basis, &basis, 1e-8).unwrap();
    println!("forward n {:?} round trip n {:?}", occupations(&there).as_slice(), occupations(&back).as_slice());
    assert!(occupations(&there)[0] > 1e-3);
    assert!(back.beta.iter().all(|b| b.norm() < 1e-8));
}

#[test]
fn static_chain_produces_nothing() {
    let k = three_mode(0.0, 1.0)(0.0);
    let proto = StageProtocol::new(-2.0, 0.0, 40.0).unwrap();
    let k2 = k.clone();
    // the same constant stiffness, but presented as time dependent so the
    // adaptive integrator runs through stage II
    let sys = QuadraticSystem::new(3, 1.0, move |_| k2.clone(), Some(proto)).unwrap();
    let times: Vec<f64> = (1..=8).map(|i| 5.0 * i as f64).collect();
    let out = occupation_timeseries(&sys, &proto, None, &times, &StepControl::default()).unwrap();
    for sample in &out {
        assert!(sample.occupations.amax() <= 1e-10, "t {} n {:?}", sample.t, sample.occupations);
    }
}

fn mode_energies(sys: &QuadraticSystem, state: &DVector<f64>) -> DVector<f64> {
    let b = sys.modes_at(0.0).unwrap();
    let n = sys.n_modes();
    let x = b.vectors.transpose() * state.rows(0, n);
    let p = b.vectors.transpose() * state.rows(n, n);
    DVector::from_fn(n, |l, _| 0.5 * (p[l] * p[l] + (b.frequencies[l] * x[l]).powi(2)))
}

#[test]
fn static_segment_conserves_mode_energies() {
    let k = three_mode(0.0, 1.0)(0.0);
    let k2 = k.clone();
    let exact = QuadraticSystem::constant(k, 1.0).unwrap();
    let stepped = QuadraticSystem::new(3, 1.0, move |_| k2.clone(), None).unwrap();
    let x0 = DVector::from_vec(vec![0.3, -0.7, 0.2, 0.5, 0.1, -0.4]);
    let e0 = mode_energies(&exact, &x0);
    for sys in [&exact, &stepped] {
        for t in [0.7, 13.0, 55.5] {
            let s = propagate(sys, 0.0, t, &StepControl::default()).unwrap();
            let e = mode_energies(sys, &(&s.matrix * &x0));
            let rel = (&e - &e0).amax() / e0.amax();
            assert!(rel < 1e-8, "t {t} relative change {rel:e}");
        }
    }
}

#[test]
fn long_drive_stays_symplectic() {
    let wd = 2.0 * 1.2;
    let period = 2.0 * PI / wd;
    let k = three_mode(0.2, wd);
    let sys = QuadraticSystem::new(3, 1.0, k, None).unwrap();
    let basis = sys.modes_at(0.0).unwrap();
    let mut s = propagate(&sys, 0.0, 0.0, &StepControl::default()).unwrap();
    for p in 1..=20 {
        let step = propagate(&sys, s.t_end, p as f64 * period, &StepControl::default()).unwrap();
        s = s.then(&step);
        assert!(s.defect() <= 1e-8, "period {p} defect {:e}", s.defect());
        let map = bogoliubov(&s, &basis, &sys.modes_at(s.t_end).unwrap(), 1e-8).unwrap();
        let (unit, sym) = map.identity_defects();
        assert!(unit <= 1e-8 && sym <= 1e-8, "period {p}: {unit:e} {sym:e}");
    }
}

#[test]
fn photon_statistics_mean_matches_occupation() {
    let wd = 2.0 * 1.05;
    let t2 = 4.0 * 2.0 * PI / wd;
    let k = three_mode(0.15, wd);
    let sys = QuadraticSystem::new(3, 1.0, move |t| k(t.clamp(0.0, t2)), None).unwrap();
    let s = propagate(&sys, 0.0, t2, &StepControl::default()).unwrap();
    let map = bogoliubov(&s, &sys.modes_at(0.0).unwrap(), &sys.modes_at(t2).unwrap(), 1e-8).unwrap();
    let n = occupations(&map);
    for l in 0..3 {
        let dist = photon_statistics(&map, l, 60).unwrap();
        assert!(dist.probabilities().iter().sum::<f64>() >= 1.0 - 1e-6);
        assert!((dist.mean() - n[l]).abs() <= 1e-8, "mode {l}: {} vs {}", dist.mean(), n[l]);
    }
}

fn spd(entries: &[f64], n: usize, shift: f64) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_drives_satisfy_bogoliubov_identities(
        n in 1usize..=3,
        base in prop::collection::vec(-1.0f64..1.0, 9),
        pert in prop::collection::vec(-1.0f64..1.0, 9),
        wd in 0.5f64..4.0,
        alpha in 0.0f64..0.3,
        t_end in 0.5f64..8.0,
    ) {
        let k0 = spd(&base, n, 0.5);
        let k1 = spd(&pert, n, 0.0);
        let sys = QuadraticSystem::new(n, 1.0, move |t| &k0 + &k1 * (alpha * (0.5 * wd * t).sin().powi(2)), None).unwrap();
        let s = propagate(&sys, 0.0, t_end, &StepControl::default()).unwrap();
        prop_assert!(s.defect() <= 1e-8);
        let map = bogoliubov(&s, &sys.modes_at(0.0).unwrap(), &sys.modes_at(t_end).unwrap(), 1e-8).unwrap();
        let (unit, sym) = map.identity_defects();
        prop_assert!(unit <= 1e-8, "unitarity defect {:e}", unit);
        prop_assert!(sym <= 1e-8, "symmetry defect {:e}", sym);
        prop_assert!(occupations(&map).iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn period_power_equals_repeated_periods(
        wd in 0.8f64..3.0,
        alpha in 0.0f64..0.4,
        count in 1usize..12,
    ) {
        let period = 2.0 * PI / wd;
        let k = three_mode(alpha, wd);
        let sys = QuadraticSystem::new(3, 1.0, k, None).unwrap();
        let one = propagate(&sys, 0.0, period, &StepControl::default()).unwrap();
        let mut direct = one.clone();
        for _ in 1..count {
            direct = direct.then(&one);
        }
        let pow = one.power(count);
        let scale = direct.matrix.amax().max(1.0);
        prop_assert!((&pow.matrix - &direct.matrix).amax() <= 1e-12 * scale * count as f64);
        prop_assert!((pow.t_end - count as f64 * period).abs() < 1e-9);
    }
}
