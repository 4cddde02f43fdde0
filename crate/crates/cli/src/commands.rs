use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use catloop_core::classical::{integrate_on, regenerate_empirics, return_time, EmpiricsGrid, Trajectory, DEFAULT_TOL, PUBLISHED_CUBIC};
use catloop_core::fock::{thermal_weights, MotionalState};
use catloop_core::interferometry::{
    analyze_scans, motional_overlaps, synthesize_scans, FringePoint, FringeScan, InferenceOptions, SeparationEngine, TableRow,
    REFERENCE_ETA, REFERENCE_TRAP_KHZ,
};
use catloop_core::phase_space::{quadrature_moments, squeezing_ratio, wigner, PhaseSpaceGrid, WignerField};
use catloop_core::quantum::{centroid_trajectory, evolve_cat, evolve_cat_on, thermal_branch_overlap, BranchEvolution, PropagationMode, PropagatorConfig};
use catloop_core::units::{khz_to_rad_s, rad_s_to_khz, DriveParams, Spin};
use catloop_core::C64;
use catloop_repro::{fig1, table1};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{read_toml, FittedFile, Mode, Outputs, RunConfig, SweepFile};
use crate::output::{finite, num, Sink};
use crate::Common;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn numerical(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, error: e.into() })
    }

    fn numerical(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 3, error: e.into() })
    }
}

fn load_run_config(path: &Path, common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg: RunConfig = read_toml(path).usage()?;
    if let Some(m) = common.mode {
        cfg.sim.mode = m;
    }
    cfg.validate().usage()?;
    Ok(cfg)
}

fn open_sink(outputs: &Outputs, common: &Common) -> Result<Sink, Failure> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&outputs.directory));
    let formats = if common.format.is_empty() { outputs.formats.clone() } else { common.format.clone() };
    Sink::create(&dir, &formats).usage()
}

fn default_propagator(common: &Common) -> PropagatorConfig {
    let mut p = PropagatorConfig::default();
    if common.mode == Some(Mode::Sideband) {
        p.mode = PropagationMode::Sideband(3);
    }
    p
}

fn us(t: f64) -> String {
    num(t * 1e6)
}

fn derived(p: &DriveParams) -> serde_json::Value {
    json!({
        "omega0_rad_per_s": p.units.omega0,
        "x0_m": p.units.x0,
        "delta_rad_per_s": p.delta,
        "Omega_rad_per_s": p.omega_rabi,
        "Delta_pi_rad_per_s": p.delta_pi,
        "phi_w": p.phi_w(),
        "alpha0": p.alpha0(),
        "loop_period_us": finite(p.loop_period() * 1e6),
    })
}

fn classical_table(sink: &mut Sink, trajs: &[Trajectory]) -> anyhow::Result<()> {
    let rows = trajs.iter().flat_map(|tr| {
        tr.times.iter().zip(&tr.alphas).map(move |(t, a)| vec![us(*t), tr.spin.label().to_string(), num(a.re), num(a.im), num(a.norm())])
    });
    sink.table("classical.csv", &["t_us", "spin", "re_alpha", "im_alpha", "abs_alpha"], rows)
}

fn evolution_tables(sink: &mut Sink, ev: &BranchEvolution, overlaps: &[C64]) -> anyhow::Result<()> {
    let centroid_rows = [(Spin::Up, &ev.centroids_up), (Spin::Down, &ev.centroids_down)].into_iter().flat_map(|(spin, c)| {
        ev.times.iter().zip(c.iter()).map(move |(t, a)| vec![us(*t), spin.label().to_string(), num(a.re), num(a.im), num(a.norm())])
    });
    sink.table("centroids.csv", &["t_us", "spin", "re_alpha", "im_alpha", "abs_alpha"], centroid_rows)?;
    let overlap_rows = ev.times.iter().zip(overlaps).map(|(t, o)| vec![us(*t), num(o.re), num(o.im), num(o.norm())]);
    sink.table("overlap.csv", &["tau_us", "re_overlap", "im_overlap", "abs_overlap"], overlap_rows)?;
    let sq_rows = [(Spin::Up, &ev.up), (Spin::Down, &ev.down)]
        .into_iter()
        .flat_map(|(spin, states)| ev.times.iter().zip(states.iter()).map(move |(t, s)| vec![us(*t), spin.label().to_string(), num(squeezing_ratio(s))]));
    sink.table("squeezing.csv", &["tau_us", "spin", "squeezing_ratio"], sq_rows)
}

fn wigner_table(sink: &mut Sink, snaps: &[(f64, Spin, &WignerField)]) -> anyhow::Result<()> {
    if snaps.is_empty() {
        return Ok(());
    }
    let rows = snaps.iter().flat_map(|(t, spin, f)| {
        let np = f.grid.p.len();
        f.values.iter().enumerate().map(move |(k, w)| vec![num(*t), spin.label().to_string(), num(f.grid.x[k / np]), num(f.grid.p[k % np]), num(*w)])
    });
    sink.table("wigner.csv", &["t_us", "spin", "x", "p", "w"], rows)
}

fn ok_or_null<T: Serialize>(r: catloop_core::Result<T>) -> serde_json::Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => {
            log::info!("metric unavailable: {e}");
            serde_json::Value::Null
        }
    }
}

pub fn simulate(config: &Path, common: &Common) -> CmdResult {
    let cfg = load_run_config(config, common)?;
    let p = cfg.params().usage()?;
    let prop = cfg.propagator();
    let mut sink = open_sink(&cfg.outputs, common)?;

    let psi0 = MotionalState::vacuum(prop.n_max);
    let ev = evolve_cat(&psi0, &p, cfg.t_end(&p), &prop).numerical()?;
    let zero = C64::new(0.0, 0.0);
    let classical = [integrate_on(zero, Spin::Up, &p, &ev.times, DEFAULT_TOL).numerical()?, integrate_on(zero, Spin::Down, &p, &ev.times, DEFAULT_TOL).numerical()?];
    let overlaps = if cfg.sim.nbar0 > 0.0 {
        let ens = thermal_weights(cfg.sim.nbar0, 1e-9).usage()?;
        thermal_branch_overlap(&ens, &p, &ev.times, &prop).numerical()?
    } else {
        ev.overlaps.clone()
    };

    classical_table(&mut sink, &classical).usage()?;
    evolution_tables(&mut sink, &ev, &overlaps).usage()?;
    let mut snaps = Vec::new();
    if !cfg.sim.wigner_times_us.is_empty() {
        let mut times: Vec<f64> = cfg.sim.wigner_times_us.iter().map(|t| t / 1e6).collect();
        times.sort_by(f64::total_cmp);
        let at = evolve_cat_on(&psi0, &p, &times, &prop).numerical()?;
        for (i, t) in times.iter().enumerate() {
            for (spin, s) in [(Spin::Up, &at.up[i]), (Spin::Down, &at.down[i])] {
                let m = quadrature_moments(s);
                let grid = PhaseSpaceGrid::centered(m.mean_x, m.mean_p, cfg.sim.wigner_half_width, cfg.sim.wigner_points);
                snaps.push((t * 1e6, spin, wigner(s, &grid).numerical()?));
            }
        }
        let view: Vec<(f64, Spin, &WignerField)> = snaps.iter().map(|(t, s, f)| (*t, *s, f)).collect();
        wigner_table(&mut sink, &view).usage()?;
    }

    let alpha_max = classical[0].max_abs();
    let t_r = return_time(&classical[0]);
    let closure = t_r.as_ref().ok().and_then(|&t| finite(classical[0].alpha_at(t).norm() / alpha_max));
    let (cu, cd) = centroid_trajectory(&ev);
    let tu = return_time(&cu);
    let return_overlap = match &tu {
        Ok(t) => json!(evolve_cat_on(&psi0, &p, &[0.0, *t], &prop).numerical()?.overlaps[1].norm()),
        Err(_) => serde_json::Value::Null,
    };
    let metrics = json!({
        "classical_t_r_us": ok_or_null(t_r.map(|t| t * 1e6)),
        "alpha_max": alpha_max,
        "closure": closure,
        "quantum_t_r_up_us": ok_or_null(tu.map(|t| t * 1e6)),
        "quantum_t_r_down_us": ok_or_null(return_time(&cd).map(|t| t * 1e6)),
        "return_overlap": return_overlap,
        "squeezing_peak": ev.up.iter().map(squeezing_ratio).fold(f64::NAN, f64::max),
        "norm_drift": ev.norm_drift,
    });
    println!("{}", serde_json::to_string_pretty(&metrics).unwrap_or_default());
    let files = sink.written().to_vec();
    sink.summary(&json!({ "command": "simulate", "config": cfg, "derived": derived(&p), "metrics": metrics, "files": files })).usage()
}

pub fn reproduce_fig1(common: &Common) -> CmdResult {
    let opts = fig1::Fig1Options { propagator: default_propagator(common), ..Default::default() };
    let mut sink = open_sink(&Outputs { directory: "fig1-out".into(), ..Default::default() }, common)?;
    let b = fig1::reproduce(&opts).numerical()?;
    classical_table(&mut sink, &b.classical).usage()?;
    evolution_tables(&mut sink, &b.evolution, &b.evolution.overlaps).usage()?;
    let view: Vec<(f64, Spin, &WignerField)> = b.wigner.iter().map(|w| (w.t_us, w.spin, &w.field)).collect();
    wigner_table(&mut sink, &view).usage()?;
    let m = b.metrics;
    println!("classical t_r        {:.1} us", m.classical_t_r_us);
    println!("centroid t_r (up/dn) {:.1} / {:.1} us", m.quantum_t_r_up_us, m.quantum_t_r_down_us);
    println!("alpha_max            {:.3}", m.alpha_max);
    println!("closure              {:.4}", m.closure);
    println!("squeezing at {:.0} us  {:.3} (peak {:.3} at {:.0} us)", fig1::HALF_RETURN_US, m.squeezing_half_return, m.squeezing_peak, m.squeezing_peak_us);
    println!("|O(t_r)|             {:.4}", m.return_overlap);
    let inputs = json!({
        "omega0_kHz": fig1::TRAP_KHZ, "eta": fig1::ETA, "Omega_kHz": fig1::OMEGA_KHZ, "delta_kHz": fig1::DELTA_KHZ,
        "phi_w": fig1::PHI_W, "t_end_us": fig1::T_END_US, "wigner_times_us": opts.wigner_times_us,
    });
    let files = sink.written().to_vec();
    sink.summary(&json!({ "command": "reproduce-fig1", "inputs": inputs, "propagator": opts.propagator, "derived": derived(&b.params), "metrics": m, "files": files }))
        .usage()
}

fn trap_note(row: &TableRow) -> String {
    if row.eta == REFERENCE_ETA {
        format!("omega0/2pi = {REFERENCE_TRAP_KHZ} kHz (reference trap, eta = {REFERENCE_ETA})")
    } else {
        format!("omega0/2pi scaled from {REFERENCE_TRAP_KHZ} kHz at eta = {REFERENCE_ETA} by (eta_ref/eta)^2 = {}", REFERENCE_TRAP_KHZ * (REFERENCE_ETA / row.eta).powi(2))
    }
}

pub fn reproduce_table1(set: Option<u8>, config: Option<&Path>, common: &Common) -> CmdResult {
    let rows: Vec<(String, TableRow)> = match config {
        Some(path) => {
            let f: FittedFile = read_toml(path).usage()?;
            if f.fitted.is_empty() {
                return Err(Failure { code: 2, error: anyhow!("{}: no [[fitted]] entries", path.display()) });
            }
            f.fitted.iter().enumerate().map(|(i, s)| s.to_row().map(|r| (format!("entry-{}", i + 1), r))).collect::<anyhow::Result<_>>().usage()?
        }
        None => catloop_core::interferometry::TABLE
            .iter()
            .filter(|r| set.is_none_or(|s| r.set == s))
            .map(|r| (format!("set-{}", r.set), *r))
            .collect(),
    };
    let prop = default_propagator(common);
    let mut sink = open_sink(&Outputs { directory: "table1-out".into(), ..Default::default() }, common)?;

    let mut reports = Vec::new();
    let mut csv_rows = Vec::new();
    let mut failed = 0;
    for (label, row) in &rows {
        match table1::reproduce_row(row, &prop) {
            Ok(r) => {
                println!("{label}  (omega0/2pi = {:.1} kHz)", r.omega0_khz);
                for c in &r.comparisons {
                    let dev = if c.rel_dev.is_finite() { format!("{:+.1}%", 100.0 * c.rel_dev) } else { "-".into() };
                    println!("  {:<16} {:>10.4} {:>10} {:>8}", c.column, c.inferred, if c.published.is_finite() { format!("{:.4}", c.published) } else { "-".into() }, dev);
                    csv_rows.push(vec![label.clone(), c.column.clone(), num(c.inferred), num(c.published), num(100.0 * c.rel_dev)]);
                }
                reports.push(json!({
                    "label": label,
                    "status": "ok",
                    "trap": trap_note(row),
                    "omega0_kHz": r.omega0_khz,
                    "eta": r.eta,
                    "delta_kHz": r.delta_khz,
                    "alpha0": r.inferred.alpha0,
                    "alpha_max": r.inferred.alpha_max,
                    "delta_alpha_max": r.inferred.delta_alpha_max,
                    "R": r.inferred.r,
                    "ldr": r.inferred.ldr,
                    "simulated_t_r_us": r.simulated_t_r * 1e6,
                    "return_overlap": r.return_overlap,
                    "gamma_m_per_ms": r.budget.gamma_m * 1e-3,
                    "t2_us": finite(r.budget.t2 * 1e6).filter(|_| !r.budget.flagged),
                    "budget_flagged": r.budget.flagged,
                    "nbar": r.cat.nbar,
                    "separation_nm": r.cat.x_s * 1e9,
                    "comparisons": r.comparisons,
                    "tolerance": r.tolerance,
                }));
            }
            Err(e) => {
                failed += 1;
                eprintln!("{label}: {e}");
                reports.push(json!({ "label": label, "status": "error", "trap": trap_note(row), "error": e.to_string() }));
            }
        }
    }
    sink.table("table1.csv", &["set", "column", "inferred", "published", "deviation_percent"], csv_rows).usage()?;
    let files = sink.written().to_vec();
    sink.summary(&json!({ "command": "reproduce-table1", "source": config.map(|p| p.display().to_string()), "propagator": prop, "sets": reports, "files": files }))
        .usage()?;
    if failed > 0 {
        return Err(Failure { code: 3, error: anyhow!("{failed} of {} sets failed", rows.len()) });
    }
    Ok(())
}

pub fn sweep_empirics(config: Option<&Path>, common: &Common) -> CmdResult {
    let grid = match config {
        Some(path) => {
            let f: SweepFile = read_toml(path).usage()?;
            let g = f.grid;
            EmpiricsGrid { etas: g.etas, alpha0s: g.alpha0s, omega0: khz_to_rad_s(g.omega0_khz), delta: khz_to_rad_s(g.delta_khz), tol: g.tol }
        }
        None => EmpiricsGrid::default(),
    };
    if grid.etas.is_empty() || grid.alpha0s.is_empty() {
        return Err(Failure { code: 2, error: anyhow!("empty empirics grid") });
    }
    if grid.etas.len() * grid.alpha0s.len() < 6 {
        return Err(Failure { code: 2, error: anyhow!("empirics grid needs at least 6 points") });
    }
    let mut sink = open_sink(&Outputs { directory: "empirics-out".into(), ..Default::default() }, common)?;
    let fit = regenerate_empirics(&grid).numerical()?;
    let rows = fit.points.iter().map(|p| vec![num(p.eta), num(p.alpha0), num(p.x), num(p.alpha_max), num(p.r), us(p.t_r)]);
    sink.table("empirics.csv", &["eta", "alpha0", "x", "alpha_max", "R", "t_r_us"], rows).usage()?;
    println!("points {} (failures {})", fit.points.len(), fit.failures.len());
    println!("cubic  {:?}  rms {:.3}%  holdout {:.3}%", fit.cubic, 100.0 * fit.cubic_rms, 100.0 * fit.holdout_rms);
    println!("slope  {:.4} (intercept {:.4}; through origin {:.4})", fit.slope, fit.intercept, fit.slope_through_origin);
    println!("published cubic rms on x in [0.3, 1.8]  {:.3}%", 100.0 * fit.published_cubic_rms);
    let failures: Vec<_> = fit.failures.iter().map(|(eta, a0, msg)| json!({ "eta": eta, "alpha0": a0, "error": msg })).collect();
    let files = sink.written().to_vec();
    sink.summary(&json!({
        "command": "sweep-empirics",
        "grid": { "etas": grid.etas, "alpha0s": grid.alpha0s, "omega0_kHz": rad_s_to_khz(grid.omega0), "delta_kHz": rad_s_to_khz(grid.delta), "tol": grid.tol },
        "cubic": fit.cubic,
        "cubic_rms": fit.cubic_rms,
        "holdout_rms": fit.holdout_rms,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "slope_through_origin": fit.slope_through_origin,
        "linear_rms": fit.linear_rms,
        "published_cubic": PUBLISHED_CUBIC,
        "published_cubic_rms": fit.published_cubic_rms,
        "failures": failures,
        "files": files,
    }))
    .usage()
}

pub fn synth(config: &Path, seed: Option<u64>, common: &Common) -> CmdResult {
    let mut cfg = load_run_config(config, common)?;
    if let Some(s) = seed {
        cfg.scan.seed = s;
    }
    let p = cfg.params().usage()?;
    let prop = cfg.propagator();
    let taus = cfg.taus(&p);
    let phis = cfg.phis();
    let gamma = cfg.scan.gamma_per_ms * 1e3;
    let overlaps: Vec<C64> = motional_overlaps(&p, &taus, cfg.sim.nbar0, &prop)
        .numerical()?
        .into_iter()
        .zip(&taus)
        .map(|(o, t)| o * (-gamma * t).exp())
        .collect();
    let scans = synthesize_scans(&overlaps, p.delta_pi, &taus, &phis, cfg.scan.shots, cfg.scan.seed).numerical()?;

    let mut sink = open_sink(&cfg.outputs, common)?;
    let rows = scans.iter().flat_map(|s| s.points.iter().map(move |pt| vec![us(s.tau), num(pt.phi), pt.shots.to_string(), num(pt.p_hat)]));
    sink.table("scans.csv", &["tau_us", "phi_rad", "shots", "p_hat"], rows).usage()?;
    let truth = taus.iter().zip(&overlaps).map(|(t, o)| vec![us(*t), num(o.re), num(o.im), num(o.norm())]);
    sink.table("truth.csv", &["tau_us", "re_overlap", "im_overlap", "abs_overlap"], truth).usage()?;
    let files = sink.written().to_vec();
    sink.summary(&json!({ "command": "synth", "config": cfg, "derived": derived(&p), "scan_count": scans.len(), "files": files })).usage()
}

#[derive(Deserialize)]
struct ScanRecord {
    tau_us: f64,
    phi_rad: f64,
    shots: u64,
    p_hat: f64,
}

fn read_scans(path: &Path) -> anyhow::Result<Vec<FringeScan>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut by_tau: BTreeMap<u64, Vec<FringePoint>> = BTreeMap::new();
    let mut taus = BTreeMap::new();
    for rec in rdr.deserialize() {
        let r: ScanRecord = rec.with_context(|| format!("parsing {}", path.display()))?;
        if !r.tau_us.is_finite() || r.tau_us < 0.0 {
            bail!("bad tau_us {} in {}", r.tau_us, path.display());
        }
        let key = r.tau_us.to_bits();
        taus.insert(key, r.tau_us);
        by_tau.entry(key).or_default().push(FringePoint { phi: r.phi_rad, p_hat: r.p_hat, shots: r.shots });
    }
    let mut scans: Vec<FringeScan> = by_tau.into_iter().map(|(k, points)| FringeScan { tau: taus[&k] / 1e6, points }).collect();
    scans.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    if scans.is_empty() {
        bail!("{} holds no scan rows", path.display());
    }
    Ok(scans)
}

pub fn fit(config: &Path, input: &Path, common: &Common) -> CmdResult {
    let cfg = load_run_config(config, common)?;
    let p = cfg.params().usage()?;
    let scans = read_scans(input).usage()?;
    for s in &scans {
        s.validate().usage()?;
    }
    let opts = InferenceOptions { detuning_sign: p.delta.signum(), units: p.units, engine: SeparationEngine::Quantum(cfg.propagator()) };
    let an = analyze_scans(&scans, p.phi_w(), cfg.sim.nbar0, p.delta_pi, &opts).numerical()?;

    let mut sink = open_sink(&cfg.outputs, common)?;
    let rows = scans.iter().zip(&an.fits).map(|(s, f)| vec![us(s.tau), num(f.a), num(f.sigma_a), num(f.phi0), num(f.sigma_phi0), num(f.offset)]);
    sink.table("sinusoids.csv", &["tau_us", "A", "sigma_A", "phi0_rad", "sigma_phi0_rad", "offset"], rows).usage()?;
    let (a, ph, inf) = (&an.amplitude, &an.phase, &an.inferred);
    let delta_khz = rad_s_to_khz(inf.delta);
    println!("D = {:.4}  t_r = {:.2} us  gamma = {:.3} /ms", a.d, a.t_r * 1e6, a.gamma * 1e-3);
    println!("B = {:.4}  Delta_pi = {:.4} kHz  t_r = {:.2} us", ph.b, rad_s_to_khz(ph.delta_pi), ph.t_r * 1e6);
    println!("alpha0 = {:.4} (config {:.4})  delta = {:.4} kHz (config {})", inf.alpha0, p.alpha0(), delta_khz, cfg.drive.delta_khz);
    let files = sink.written().to_vec();
    sink.summary(&json!({
        "command": "fit",
        "config": cfg,
        "input": input.display().to_string(),
        "amplitude": {
            "D": a.d, "sigma_D": finite(a.sigma_d),
            "t_r_us": a.t_r * 1e6, "sigma_t_r_us": finite(a.sigma_t_r * 1e6),
            "gamma_per_ms": a.gamma * 1e-3, "sigma_gamma_per_ms": finite(a.sigma_gamma * 1e-3),
            "residual": a.residual, "chi2": a.chi2, "converged": a.converged,
        },
        "phase": {
            "constant_rad": ph.constant, "Delta_pi_kHz": rad_s_to_khz(ph.delta_pi), "sigma_Delta_pi_kHz": finite(rad_s_to_khz(ph.sigma_delta_pi)),
            "B": ph.b, "sigma_B": finite(ph.sigma_b), "t_r_us": ph.t_r * 1e6, "sigma_t_r_us": finite(ph.sigma_t_r * 1e6),
            "residual": ph.residual, "chi2": ph.chi2, "converged": ph.converged, "unwrap_ambiguous": ph.unwrap_ambiguous,
        },
        "inferred": {
            "alpha0": inf.alpha0, "alpha_max": inf.alpha_max, "R": inf.r, "R_alpha0": inf.r_alpha0,
            "delta_kHz": delta_khz, "t_r_us": inf.t_r * 1e6, "delta_alpha_max": finite(inf.delta_alpha_max), "ldr": inf.ldr,
        },
        "config_drive": { "alpha0": p.alpha0(), "delta_kHz": cfg.drive.delta_khz },
        "files": files,
    }))
    .usage()
}

impl crate::config::FittedSet {
    /// Published columns are unknown, so comparisons come out as NaN.
    fn to_row(&self) -> anyhow::Result<TableRow> {
        if self.detuning_sign.abs() != 1.0 {
            bail!("detuning_sign must be +1 or -1");
        }
        let nan = f64::NAN;
        Ok(TableRow {
            set: 0,
            d: self.d,
            t_r_us: self.t_r_us,
            gamma_per_ms: self.gamma_per_ms,
            b: self.b,
            delta_pi_khz: self.delta_pi_khz,
            nbar0: self.nbar0,
            eta: self.eta,
            omega_c_khz: (nan, nan),
            delta_khz: (self.detuning_sign, nan),
            alpha0: (nan, nan),
            alpha_max: nan,
            delta_alpha_max: nan,
        })
    }
}
