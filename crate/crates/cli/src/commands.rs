//! One function per subcommand. Each writes its CSVs and a manifest into the
//! output directory and returns a short text report.

use casimir_core::dynamics::normal_modes;
use casimir_core::readout::{
    add_sampling_noise, heating_rate, invert_sideband, photon_statistics, required_window, sideband_signal,
    PhononDistribution,
};
use casimir_core::trap::{DriveSchedule, RfConfinement};
use rand::SeedableRng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::experiment::{local_maxima, sweep_grid, Setup};
use crate::record::{Cell, RunRecord, Table};
use crate::CliError;

const PLOTS: [(&str, &str); 4] = [
    ("plots/chi_profile.py", include_str!("../plots/chi_profile.py")),
    ("plots/sweep.py", include_str!("../plots/sweep.py")),
    ("plots/timeseries.py", include_str!("../plots/timeseries.py")),
    ("plots/readout.py", include_str!("../plots/readout.py")),
];

pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: Option<PathBuf>, threads: Option<usize>, seed: u64) -> Self {
        let out = out.unwrap_or_else(|| config.output.directory.clone());
        Self {
            config,
            out,
            threads,
            seed,
        }
    }

    fn record(&self, command: &str) -> RunRecord {
        RunRecord::new(command, &self.config.to_toml(), self.threads, self.seed)
    }

    fn finish(&self, mut rec: RunRecord) -> Result<(), CliError> {
        if self.config.output.plot_scripts {
            for (name, body) in PLOTS {
                rec.write_file(&self.out, name, body)?;
            }
        }
        rec.finish(&self.out)
    }
}

pub fn chain_info(ctx: &Context) -> Result<String, CliError> {
    let mut rec = ctx.record("chain-info");
    let chain = ctx.config.chain()?;
    let unit = chain.frequency_unit();
    let rc = chain.coefficients(None)?;
    let modes = normal_modes(&rc.stiffness(0.0), 1.0)?;

    let mut t = Table::new(&["ion_index", "position_um", "chi_over_kbar"]);
    for i in 0..chain.n_ions() {
        let pos = chain.equilibrium.as_ref().map_or(f64::NAN, |e| e.positions[i] * 1e6);
        t.row(&[Cell::Int(i + 1), Cell::Num(pos), Cell::Num(rc.chi_static[i])]);
    }
    rec.write_file(&ctx.out, "chain.csv", &t.into_string())?;
    let mut s = Table::new(&["mode", "omega_over_unit", "frequency_mhz"]);
    for (l, w) in modes.frequencies.iter().enumerate() {
        s.row(&[Cell::Int(l + 1), Cell::Num(*w), Cell::Num(w * unit / (2.0 * PI) * 1e-6)]);
    }
    rec.write_file(&ctx.out, "spectrum.csv", &s.into_string())?;

    let mut r = String::new();
    if let Some(dr) = chain.equilibrium.as_ref().and_then(|e| e.mean_spacing()) {
        writeln!(r, "mean spacing          {:.4} um", dr * 1e6).unwrap();
    }
    writeln!(r, "k-bar                 {:.6e} N/m", chain.couplings.kbar).unwrap();
    writeln!(r, "sqrt(k-bar/m) / 2pi   {:.4} MHz", unit / (2.0 * PI) * 1e-6).unwrap();
    if chain.equilibrium.is_some() {
        let rf = match ctx.config.trap_config().rf {
            RfConfinement::Frequency(w) => w,
            RfConfinement::RelativeToKbar(x) => x.sqrt() * unit,
        };
        writeln!(r, "omega_RF / 2pi        {:.4} MHz", rf / (2.0 * PI) * 1e-6).unwrap();
    }
    writeln!(r, "omega_1 / unit        {:.6}", modes.frequencies[0]).unwrap();
    writeln!(r, "omega_1 / 2pi         {:.4} MHz", modes.frequencies[0] * unit / (2.0 * PI) * 1e-6).unwrap();
    ctx.finish(rec)?;
    Ok(r)
}

/// chi at simulation time `time`, or at drive phase `phase` (radians).
pub fn chi_profile(ctx: &Context, time: Option<f64>, phase: Option<f64>) -> Result<String, CliError> {
    let mut rec = ctx.record("chi-profile");
    let setup = Setup::new(&ctx.config)?;
    let omega_d = drive_frequency(&ctx.config, &setup);
    let drive = setup.drive(omega_d);
    let t = match (time, phase) {
        (Some(t), _) => t,
        (None, Some(ph)) => drive.time_at_phase(ph),
        (None, None) => setup.t0,
    };
    let rc = setup.rest.with_drive(Some(drive))?;
    let chi = rc.chi(t);
    let mut tab = Table::new(&["ion_index", "chi_over_kbar"]);
    for (i, c) in chi.iter().enumerate() {
        tab.row(&[Cell::Int(i + 1), Cell::Num(*c)]);
    }
    rec.write_file(&ctx.out, "chi.csv", &tab.into_string())?;
    ctx.finish(rec)?;
    let list: Vec<String> = chi.iter().map(|c| format!("{c:.3}")).collect();
    Ok(format!("chi/k-bar at t = {t:.6}: [{}]\n", list.join(", ")))
}

fn drive_frequency(cfg: &ExperimentConfig, setup: &Setup) -> f64 {
    cfg.drive
        .omega_d_over_omega1
        .map_or(setup.resonance(), |r| r * setup.omega1)
}

pub fn sweep(ctx: &Context, points: Option<usize>) -> Result<String, CliError> {
    let mut rec = ctx.record("sweep");
    let setup = Setup::new(&ctx.config)?;
    let s = &ctx.config.sweep;
    let grid = sweep_grid(s.omega_d_min_over_omega1, s.omega_d_max_over_omega1, points.unwrap_or(s.points));
    let results = setup.sweep(&grid, ctx.threads)?;
    let mut tab = Table::new(&["omega_d_over_omega1", "n1_ion", "n2_ion", "n1_moore", "n2_moore"]);
    let mut failed = 0;
    let mut n1 = Vec::with_capacity(grid.len());
    for (w, res) in grid.iter().zip(results) {
        match res {
            Ok(row) => {
                if row.completeness_defect > ctx.config.moore.completeness_threshold {
                    rec.warnings.push(format!(
                        "omega_D/omega_1 = {w:.4}: Moore completeness defect {:.3e} over all modes, {:.3e} for modes 1-2",
                        row.completeness_defect, row.reported_defect
                    ));
                }
                tab.row(&[
                    Cell::Num(*w),
                    Cell::Num(row.ion[0]),
                    Cell::Num(row.ion[1]),
                    Cell::Num(row.moore[0]),
                    Cell::Num(row.moore[1]),
                ]);
                n1.push(row.ion[0]);
            }
            Err(e) => {
                failed += 1;
                rec.warnings.push(format!("omega_D/omega_1 = {w:.4}: {e}"));
                tab.row(&[Cell::Num(*w), Cell::Num(f64::NAN), Cell::Num(f64::NAN), Cell::Num(f64::NAN), Cell::Num(f64::NAN)]);
                n1.push(f64::NAN);
            }
        }
    }
    rec.write_file(&ctx.out, "sweep.csv", &tab.into_string())?;
    let mut r = format!(
        "{} points, 2<omega_1>_T/omega_1 = {:.4}\n",
        grid.len(),
        setup.resonance() / setup.omega1
    );
    for k in local_maxima(&n1) {
        writeln!(r, "ion n1 local maximum {:.4e} at omega_D/omega_1 = {:.4}", n1[k], grid[k]).unwrap();
    }
    for w in &rec.warnings {
        writeln!(r, "warning: {w}").unwrap();
    }
    ctx.finish(rec)?;
    if failed > 0 {
        eprint!("{r}");
        return Err(CliError::PartialFailure {
            failed,
            total: grid.len(),
        });
    }
    Ok(r)
}

pub fn timeseries(ctx: &Context) -> Result<String, CliError> {
    let mut rec = ctx.record("timeseries");
    let setup = Setup::new(&ctx.config)?;
    let omega_d = drive_frequency(&ctx.config, &setup);
    let ts = &ctx.config.timeseries;
    let res = setup.timeseries(omega_d, ts.samples_per_period, ts.optimize_samples_per_period)?;
    let period = 2.0 * PI / omega_d;
    let mut tab = Table::new(&["t_sim", "drive_periods", "n1_ion", "n1_moore", "n1_analytic", "n1_ion_optimized"]);
    for row in &res.rows {
        tab.row(&[
            Cell::Num(row.t),
            Cell::Num(row.t / period),
            Cell::Num(row.ion),
            Cell::Num(row.moore),
            Cell::Num(row.analytic),
            Cell::Num(row.optimized),
        ]);
    }
    rec.write_file(&ctx.out, "timeseries.csv", &tab.into_string())?;
    rec.warnings.extend(res.warnings.iter().cloned());
    let last = res.rows.last().expect("nonempty series");
    let r = format!(
        "omega_D/omega_1 = {:.4}, {} samples\nfinal n1: ion {:.5e}, moore {:.5e}, analytic {:.5e}, optimized {:.5e}\n",
        omega_d / setup.omega1,
        res.rows.len(),
        last.ion,
        last.moore,
        last.analytic,
        last.optimized
    );
    ctx.finish(rec)?;
    Ok(r)
}

pub fn matching(ctx: &Context) -> Result<String, CliError> {
    let mut rec = ctx.record("match");
    let setup = Setup::new(&ctx.config)?;
    let m = setup.matching;
    let mut tab = Table::new(&["quantity", "value"]);
    let mut rows = vec![
        ("length_d", m.length),
        ("delta_d", m.delta),
        ("omega1_rest", m.omega1_rest),
        ("omega1_compressed", m.omega1_compressed),
    ];
    let names: Vec<String> = (1..=setup.averages.len().min(4)).map(|l| format!("avg_omega{l}_over_omega1")).collect();
    for (l, name) in names.iter().enumerate() {
        rows.push((name.as_str(), setup.averages[l] / setup.omega1));
    }
    for (k, v) in &rows {
        tab.row(&[Cell::Text(k), Cell::Num(*v)]);
    }
    rec.write_file(&ctx.out, "match.csv", &tab.into_string())?;
    ctx.finish(rec)?;
    Ok(format!(
        "r0 - l0 = {:.4} d\ndelta   = {:.4} d\n<omega_1>_T / omega_1 = {:.5}\n",
        m.length,
        m.delta,
        setup.averages[0] / setup.omega1
    ))
}

pub fn heating(ctx: &Context) -> Result<String, CliError> {
    let mut rec = ctx.record("heating");
    let noise = ctx
        .config
        .noise
        .as_ref()
        .ok_or_else(|| CliError::Config("the heating command needs a [noise] section".into()))?;
    let model = noise.model()?;
    let species = ctx.config.species();
    let omega = match noise.mode_frequency_mhz {
        Some(f) => 2.0 * PI * f * 1e6,
        None => {
            let chain = ctx.config.chain()?;
            chain.coefficients(None)?.lowest_frequency(0.0)? * chain.frequency_unit()
        }
    };
    let rate = heating_rate(&model, &species, omega)? * 1e-3;
    let added = rate * noise.run_duration_ms;
    let rate2 = heating_rate(&model, &species, 2.0 * omega)? * 1e-3;
    let mut tab = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("mode_frequency_mhz", omega / (2.0 * PI) * 1e-6),
        ("heating_rate_per_ms", rate),
        ("run_duration_ms", noise.run_duration_ms),
        ("added_quanta", added),
        ("rate_ratio_double_frequency", rate2 / rate),
        ("scatter_rate_per_ms", noise.scatter_rate_per_ms),
        ("scatter_quanta", noise.scatter_rate_per_ms * noise.run_duration_ms),
    ] {
        tab.row(&[Cell::Text(k), Cell::Num(v)]);
    }
    rec.write_file(&ctx.out, "heating.csv", &tab.into_string())?;
    ctx.finish(rec)?;
    Ok(format!(
        "heating rate {rate:.4} quanta/ms at {:.4} MHz\nadded over {} ms: {added:.4} quanta\n",
        omega / (2.0 * PI) * 1e-6,
        noise.run_duration_ms
    ))
}

/// Outcome of a simulated blue-sideband readout.
#[derive(Debug, Clone)]
pub struct ReadoutOutcome {
    pub truth: PhononDistribution,
    pub recovered: PhononDistribution,
    pub noisy: PhononDistribution,
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub pe_noisy: Vec<f64>,
    pub tv_clean: f64,
    pub tv_noisy: f64,
}

/// Fock statistics of `mode` (1-based) after the resonant drive, pushed
/// through the sideband signal and back.
pub fn simulate_readout(cfg: &ExperimentConfig, setup: &Setup, mode: usize, seed: u64) -> Result<ReadoutOutcome, CliError> {
    let r = &cfg.readout;
    let omega_d = drive_frequency(cfg, setup);
    let map = setup.ion_map(omega_d)?;
    let truth = photon_statistics(&map, mode - 1, r.truth_n_max)?;
    let rabi = 2.0 * PI * r.rabi_khz * 1e3;
    let window = r.window_factor * required_window(rabi);
    let fast = 2.0 * ((r.n_max + 1) as f64).sqrt() * rabi;
    let dt = 2.0 * PI / fast / r.samples_per_fast_period as f64;
    let n = (window / dt).ceil() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let signal = sideband_signal(&truth, rabi, &times);
    let recovered = invert_sideband(&signal, r.n_max)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noisy_signal = add_sampling_noise(&signal, r.noise_sigma, &mut rng)?;
    let noisy = invert_sideband(&noisy_signal, r.n_max)?;
    Ok(ReadoutOutcome {
        tv_clean: recovered.total_variation(&truth, Some(r.n_max)),
        tv_noisy: noisy.total_variation(&truth, Some(5.min(r.n_max))),
        truth,
        recovered,
        noisy,
        times,
        pe: signal.pe,
        pe_noisy: noisy_signal.pe,
    })
}

pub fn readout_sim(ctx: &Context, mode: Option<usize>) -> Result<String, CliError> {
    let mut rec = ctx.record("readout-sim");
    let mode = mode.unwrap_or(ctx.config.readout.mode);
    if mode == 0 || mode > ctx.config.trap.n_ions {
        return Err(CliError::Config(format!("mode {mode} outside 1..={}", ctx.config.trap.n_ions)));
    }
    let setup = Setup::new(&ctx.config)?;
    let out = simulate_readout(&ctx.config, &setup, mode, ctx.seed)?;
    let mut tab = Table::new(&["n", "p_truth", "p_recovered", "p_recovered_noisy"]);
    for n in 0..=ctx.config.readout.n_max {
        tab.row(&[
            Cell::Int(n),
            Cell::Num(out.truth.get(n)),
            Cell::Num(out.recovered.get(n)),
            Cell::Num(out.noisy.get(n)),
        ]);
    }
    rec.write_file(&ctx.out, "readout.csv", &tab.into_string())?;
    let mut sig = Table::new(&["t_us", "pe", "pe_noisy"]);
    for k in 0..out.times.len() {
        sig.row(&[Cell::Num(out.times[k] * 1e6), Cell::Num(out.pe[k]), Cell::Num(out.pe_noisy[k])]);
    }
    rec.write_file(&ctx.out, "sideband.csv", &sig.into_string())?;
    ctx.finish(rec)?;
    Ok(format!(
        "mode {mode}: mean {:.5e}, tail beyond n = {}: {:.2e}\nTV recovered {:.3e} (n <= {}), noisy {:.3e} (n <= 5)\n",
        out.truth.mean(),
        out.truth.n_max(),
        out.truth.tail(),
        out.tv_clean,
        ctx.config.readout.n_max,
        out.tv_noisy
    ))
}

/// Drive schedule used by the chi-profile command, exposed for tests.
pub fn configured_drive(cfg: &ExperimentConfig, setup: &Setup) -> DriveSchedule {
    setup.drive(drive_frequency(cfg, setup))
}
