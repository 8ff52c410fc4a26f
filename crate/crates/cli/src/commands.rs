//! Subcommand implementations. Each returns its report; writing to stdout
//! is left to `main`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use lsl_core::classify::{
    catalog_with, render_table, reproduce_scenarios, RunOptions, SymmetryContext, TableReport, TABLE,
};
use lsl_core::linalg::{frobenius, ComplexMatrix};
use lsl_core::lindblad::{
    block_identity_test, evolve_expm, evolve_rk4, subspace_block_direct, uniform_times, Integrator, LindbladSystem,
    Trajectory, TrajectoryMeta,
};
use lsl_core::observables::{coherence_verdict, subspace_series, Coherence, EntropySeries};
use lsl_core::operators::{
    build_coupling, build_hamiltonian, spin_matrices, CouplingName, OperatorSpec, SpinTriple,
};
use lsl_core::response::{delta_rho, first_order_residual, loglog_slope};
use lsl_core::spectra::{ground_subspace, subspace_density, Subspace};
use lsl_core::symmetry::{
    antiunitary_residual, commutes_with_antiunitary, max_group_commutator, quaternion_group, schur_test,
    time_reversal, ProportionalityReport,
};
use lsl_core::tolerance::Tolerances;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{csv_line, AtomicBatch};

pub const CSV_HEADER: &str = "t,gamma_t,s_v,trace_g,re_rho_pp,re_rho_pm,im_rho_pm,re_rho_mm\n";
pub const SWEEP_HEADER: &str = "gamma,gamma_t,s_v,discrepancy,full_residual\n";

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub integrator: Option<Integrator>,
    /// `γt` horizon; replaces `t_max`.
    pub horizon: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Usage(format!("--gamma must be finite and non-negative, got {g}")));
            }
            cfg.gamma = g;
        }
        if let Some(i) = self.integrator {
            cfg.integrator = i;
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) || cfg.gamma == 0.0 {
                return Err(CliError::Usage("--horizon needs a positive value and a positive gamma".into()));
            }
            cfg.t_max = Some(h / cfg.gamma);
        }
        Ok(())
    }
}

/// Hamiltonian, coupling and ground subspace of a config.
pub struct Model {
    pub spins: SpinTriple,
    pub system: LindbladSystem,
    pub subspace: Subspace,
    pub rho0: ComplexMatrix,
}

impl Model {
    pub fn build(cfg: &RunConfig, gamma: f64, tol: &Tolerances) -> Result<Self> {
        let spins = spin_matrices(cfg.spin)?;
        let h_spec = cfg.hamiltonian.clone().with_scale(cfg.hamiltonian.scale * cfg.e_g);
        let h = build_hamiltonian(&h_spec, &spins)?;
        let o = build_coupling(&cfg.coupling, &spins)?;
        let t = time_reversal(&spins)?;
        let pairing = (spins.is_half_integer() && commutes_with_antiunitary(&h, &t, tol.symmetry)?).then_some(&t);
        let subspace = ground_subspace(&h, tol.degeneracy, pairing)?;
        if subspace.dim() != 2 {
            return Err(CliError::Usage(format!(
                "the ground level of this Hamiltonian is {}-fold degenerate; a doublet is required",
                subspace.dim()
            )));
        }
        let v = subspace.state(&[cfg.alpha, cfg.beta])?;
        let rho0 = &v * v.adjoint();
        Ok(Self { spins, system: LindbladSystem::new(h, o, gamma)?, subspace, rho0 })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub spin: f64,
    pub hamiltonian: String,
    pub coupling: String,
    pub gamma: f64,
    pub e_g: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub ground_energy: f64,
    pub samples: usize,
    pub terminal_entropy: f64,
    pub max_entropy: f64,
    pub terminal_trace_g: f64,
    pub verdict: Coherence,
    pub block_identity: ProportionalityReport,
    pub schur: ProportionalityReport,
    pub trajectory: TrajectoryMeta,
}

pub struct Simulation {
    pub summary: SimulationSummary,
    pub csv: String,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn propagate(cfg: &RunConfig, model: &Model) -> Result<Trajectory> {
    let t_max = cfg.t_max();
    Ok(match cfg.integrator {
        Integrator::Expm => evolve_expm(&model.rho0, &model.system, &uniform_times(t_max, cfg.samples))?,
        Integrator::Rk4 => {
            let dt = cfg.dt.unwrap_or_else(|| model.system.default_dt());
            let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
            let every = steps.div_ceil(cfg.samples).max(1);
            evolve_rk4(&model.rho0, &model.system, dt, t_max, every)?
        }
    })
}

pub fn simulate(cfg: &RunConfig, tol: &Tolerances) -> Result<Simulation> {
    let model = Model::build(cfg, cfg.gamma, tol)?;
    let traj = propagate(cfg, &model)?;
    let densities = subspace_series(&traj, &model.subspace, tol.trace_floor)?;
    let entropy = EntropySeries::from_trajectory(&traj, &model.subspace, tol.trace_floor)?;

    let mut csv = String::from(CSV_HEADER);
    for (k, d) in densities.iter().enumerate() {
        let m = &d.matrix;
        csv.push_str(&csv_line(&[
            traj.times[k],
            cfg.gamma * traj.times[k],
            entropy.s_v[k],
            entropy.trace_g[k],
            m[(0, 0)].re,
            m[(0, 1)].re,
            m[(0, 1)].im,
            m[(1, 1)].re,
        ]));
    }

    let block = subspace_block_direct(&model.system, &model.subspace)?;
    let summary = SimulationSummary {
        spin: cfg.spin,
        hamiltonian: cfg.hamiltonian.label(),
        coupling: cfg.coupling.label(),
        gamma: cfg.gamma,
        e_g: cfg.e_g,
        t_max: cfg.t_max(),
        integrator: cfg.integrator,
        alpha: pair(cfg.alpha),
        beta: pair(cfg.beta),
        ground_energy: model.subspace.energy,
        samples: traj.len(),
        terminal_entropy: entropy.terminal_entropy().unwrap_or(0.0),
        max_entropy: entropy.max_entropy(),
        terminal_trace_g: *entropy.trace_g.last().unwrap_or(&1.0),
        verdict: coherence_verdict(&entropy, tol.coherent, tol.decoherent),
        block_identity: block_identity_test(&block, tol.symmetry),
        schur: schur_test(model.system.o(), &model.subspace.projector, tol.symmetry)?,
        trajectory: traj.meta.clone(),
    };
    Ok(Simulation { summary, csv })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Output paths: `<out>/<stem>.csv` and `<out>/<stem>.summary.json` when
/// `out` is given, else the paths named in the config.
pub fn simulation_paths(cfg: &RunConfig, out: Option<&Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
    match (out, &cfg.csv, &cfg.summary) {
        (Some(dir), _, _) => Ok((dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.summary.json")))),
        (None, Some(csv), Some(summary)) => Ok((csv.clone(), summary.clone())),
        _ => Err(CliError::Usage("give --out DIR or both outputs.csv and outputs.summary in the config".into())),
    }
}

pub fn write_simulation(sim: &Simulation, csv: &Path, summary: &Path) -> Result<Vec<PathBuf>> {
    let mut batch = AtomicBatch::new();
    batch.stage(csv, sim.csv.as_bytes())?;
    batch.stage(summary, json(&sim.summary).as_bytes())?;
    batch.commit()
}

/// Runs the classification table. With `inject_mismatch`, the expected
/// coherence of the first row is inverted so the comparison must fail.
pub fn table(gamma: f64, horizon: f64, opts: &RunOptions, inject_mismatch: bool) -> Result<TableReport> {
    let ctx = SymmetryContext::spin_three_halves()?;
    let mut scenarios = catalog_with(&ctx, &opts.tolerances)?;
    if inject_mismatch {
        let first = &mut scenarios[0];
        first.expected_coherence = match first.expected_coherence {
            Coherence::Coherent => Coherence::Decoherent,
            _ => Coherence::Coherent,
        };
        first.expected_block_identity = !first.expected_block_identity;
    }
    Ok(reproduce_scenarios(&scenarios, &ctx, gamma, horizon, opts)?)
}

pub fn write_table(report: &TableReport, out: &Path) -> Result<Vec<PathBuf>> {
    let mut batch = AtomicBatch::new();
    batch.stage(&out.join("table.json"), json(report).as_bytes())?;
    batch.stage(&out.join("table.txt"), render_table(report).as_bytes())?;
    batch.commit()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub gamma_t: f64,
    /// Subspace entropy of the Lindblad state at the probe time.
    pub s_v: f64,
    /// `‖ρ̃_G − ρ̃_G^(1)‖` between the normalized subspace states of the
    /// Lindblad run and the first-order prediction.
    pub discrepancy: f64,
    /// `‖ρ(t) − ρ₀(t) − δρ(t)‖` in the full space, interaction frame.
    pub full_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub hamiltonian: String,
    pub coupling: String,
    pub probe_time: f64,
    pub quadrature_panels: usize,
    pub rows: Vec<SweepRow>,
    /// Log-log slope of `discrepancy` against γ; `null` when some
    /// discrepancy is at the round-off floor.
    pub discrepancy_exponent: Option<f64>,
    pub full_residual_exponent: Option<f64>,
}

pub struct Sweep {
    pub summary: SweepSummary,
    pub csv: String,
}

/// Discrepancies at or below this are treated as round-off.
pub const SWEEP_FLOOR: f64 = 1e-13;

fn sweep_point(cfg: &RunConfig, gamma: f64, probe_time: f64, n_quad: usize, tol: &Tolerances) -> Result<SweepRow> {
    let model = Model::build(cfg, gamma, tol)?;
    let sys = &model.system;
    let lindblad = evolve_expm(&model.rho0, sys, &[0.0, probe_time])?;
    let rho_t = lindblad.last().expect("two samples");
    let delta = delta_rho(&model.rho0, sys.o(), sys.h(), gamma, probe_time, n_quad)?;
    let full_residual = first_order_residual(rho_t, &model.rho0, &delta, sys.h(), probe_time)?;

    let normalized = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        let sd = subspace_density(m, &model.subspace)?;
        Ok(lsl_core::spectra::normalize_subspace(&sd, tol.trace_floor)?.matrix)
    };
    // The ground level only picks up a global phase under H, so subspace
    // quantities are the same in either frame.
    let first_order = normalized(&(&model.rho0 + &delta))?;
    let exact = normalized(rho_t)?;
    Ok(SweepRow {
        gamma,
        gamma_t: gamma * probe_time,
        s_v: lsl_core::observables::von_neumann_entropy(&exact)?,
        discrepancy: frobenius(&(exact - first_order)),
        full_residual,
    })
}

fn exponent(gammas: &[f64], values: &[f64]) -> Option<f64> {
    if values.iter().all(|&v| v > SWEEP_FLOOR) {
        loglog_slope(gammas, values).ok()
    } else {
        None
    }
}

pub fn sweep(cfg: &RunConfig, gammas: &[f64], probe_time: f64, n_quad: usize, tol: &Tolerances) -> Result<Sweep> {
    if gammas.len() < 2 {
        return Err(CliError::Core(lsl_core::Error::InvalidArgument(
            "a sweep needs at least two gamma values".into(),
        )));
    }
    if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(CliError::Usage("sweep gammas must be positive".into()));
    }
    if !(probe_time > 0.0 && probe_time.is_finite()) {
        return Err(CliError::Usage(format!("--probe-time must be positive, got {probe_time}")));
    }
    let rows = gammas
        .par_iter()
        .map(|&g| sweep_point(cfg, g, probe_time, n_quad, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    for r in &rows {
        csv.push_str(&csv_line(&[r.gamma, r.gamma_t, r.s_v, r.discrepancy, r.full_residual]));
    }
    let disc: Vec<f64> = rows.iter().map(|r| r.discrepancy).collect();
    let full: Vec<f64> = rows.iter().map(|r| r.full_residual).collect();
    let summary = SweepSummary {
        hamiltonian: cfg.hamiltonian.label(),
        coupling: cfg.coupling.label(),
        probe_time,
        quadrature_panels: n_quad,
        discrepancy_exponent: exponent(gammas, &disc),
        full_residual_exponent: exponent(gammas, &full),
        rows,
    };
    Ok(Sweep { summary, csv })
}

pub fn write_sweep(sweep: &Sweep, out: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let mut batch = AtomicBatch::new();
    batch.stage(&out.join(format!("{stem}.sweep.csv")), sweep.csv.as_bytes())?;
    batch.stage(&out.join(format!("{stem}.sweep.json")), json(&sweep.summary).as_bytes())?;
    batch.commit()
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorReport {
    pub operator: String,
    pub spin: f64,
    pub hermitian: bool,
    pub hermiticity_residual: f64,
    pub time_reversal: bool,
    pub time_reversal_residual: f64,
    /// Only defined for spin 3/2.
    pub quaternion: Option<bool>,
    pub quaternion_residual: Option<f64>,
    /// Table rows (1-based) whose operator columns this signature fits.
    pub table_rows: Vec<usize>,
}

pub fn classify_operator(spec: &OperatorSpec, spin: f64, tol: &Tolerances) -> Result<OperatorReport> {
    let spins = spin_matrices(spin)?;
    let o = build_coupling(spec, &spins)?;
    let herm_res = lsl_core::linalg::hermiticity_residual(&o);
    let t = time_reversal(&spins)?;
    let t_res = antiunitary_residual(&o, &t)?;
    let (quaternion, q_res) = if spins.dim() == 4 {
        let q = quaternion_group(&spins)?;
        let r = max_group_commutator(&o, &q.group)?;
        (Some(r < tol.symmetry), Some(r))
    } else {
        (None, None)
    };
    let hermitian = herm_res < tol.symmetry;
    let time_reversal = t_res < tol.symmetry;
    let table_rows = match quaternion {
        Some(q) => {
            let sig = lsl_core::symmetry::OperatorSignature { hermitian, time_reversal, quaternion: q };
            TABLE
                .iter()
                .enumerate()
                .filter(|(_, row)| row.matches(row.hamiltonian, &sig))
                .map(|(k, _)| k + 1)
                .collect()
        }
        None => Vec::new(),
    };
    Ok(OperatorReport {
        operator: spec.label(),
        spin,
        hermitian,
        hermiticity_residual: herm_res,
        time_reversal,
        time_reversal_residual: t_res,
        quaternion,
        quaternion_residual: q_res,
        table_rows,
    })
}

pub fn render_operator_report(r: &OperatorReport) -> String {
    let yn = |b: bool| if b { "yes" } else { "no" };
    let mut s = format!("operator: {} (spin {})\n", r.operator, r.spin);
    s.push_str(&format!("hermitian: {} (residual {:.3e})\n", yn(r.hermitian), r.hermiticity_residual));
    s.push_str(&format!("[O,T]=0: {} (residual {:.3e})\n", yn(r.time_reversal), r.time_reversal_residual));
    match (r.quaternion, r.quaternion_residual) {
        (Some(q), Some(res)) => s.push_str(&format!("[O,Q]=0: {} (max residual {:.3e})\n", yn(q), res)),
        _ => s.push_str("[O,Q]=0: n/a (quaternion group needs spin 3/2)\n"),
    }
    if !r.table_rows.is_empty() {
        let rows: Vec<String> = r.table_rows.iter().map(|k| k.to_string()).collect();
        s.push_str(&format!("table rows: {}\n", rows.join(", ")));
    }
    s
}

/// Catalog names with their formulas, for `--help` style listings.
pub fn coupling_names() -> String {
    CouplingName::ALL.iter().map(|c| format!("{} = {}", c.as_str(), c.formula())).collect::<Vec<_>>().join(", ")
}
