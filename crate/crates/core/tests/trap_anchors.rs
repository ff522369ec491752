use casimir_core::trap::{average_frequencies, match_cavity, reference_trap, DriveSchedule, IonChain};
use std::f64::consts::PI;

fn chain() -> IonChain {
    IonChain::build(&reference_trap()).unwrap()
}

#[test]
fn reference_chain_anchors() {
    let c = chain();
    let eq = c.equilibrium.as_ref().unwrap();
    let dr = eq.mean_spacing().unwrap();
    let unit = c.frequency_unit() / (2.0 * PI);
    let rc = c.coefficients(None).unwrap();
    let w1 = rc.lowest_frequency(0.0).unwrap();
    println!("spacing {dr:e} unit {unit:e} w1 {w1}");
    assert!((dr / 4.00e-6 - 1.0).abs() < 0.01);
    assert!((unit / 1.17e6 - 1.0).abs() < 0.01);
    assert!((w1 / 0.21 - 1.0).abs() < 0.10);
    let p = &eq.positions;
    for i in 0..p.len() {
        assert!((p[i] + p[p.len() - 1 - i]).abs() < 1e-10 * 1e-6);
    }
}

#[test]
fn reference_chi_profile_shape() {
    let c = chain();
    let chi: Vec<f64> = (&c.chi_static / c.couplings.kbar).iter().copied().collect();
    println!("{chi:?}");
    for i in 4..16 {
        assert!(chi[i].abs() < 0.25, "ion {} chi {}", i + 1, chi[i]);
    }
    for i in (0..4).chain(16..20) {
        assert!(chi[i] > 0.5);
    }
}

#[test]
fn reference_matching() {
    let c = chain();
    let rc = c.coefficients(Some(DriveSchedule::sine(vec![5], 0.6, 1.0, 0.0, 10.0))).unwrap();
    let m = match_cavity(&rc).unwrap();
    let avg = average_frequencies(&rc, 2000).unwrap();
    println!("{m:?} avg ratio {}", avg[0] / m.omega1_rest);
    assert!((m.length / 15.22 - 1.0).abs() < 0.05);
    assert!((m.delta / 0.72 - 1.0).abs() < 0.10);
    assert!((avg[0] / m.omega1_rest / 1.028 - 1.0).abs() < 0.01);
}
