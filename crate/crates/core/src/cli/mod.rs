//! Command-line entry points: `run`, `check-mesh`, `stability`, `convergence`.

mod config;
mod output;

pub use config::{
    ConfigError, ConvergenceSpec, InitialCondition, KeyValues, MaterialSpec, OutputSpec, Region, RunConfig,
    StabilitySpec,
};
pub use output::{field_csv, vtk_snapshot, whitney_barycenter_vectors, ProbeSet, RunOutput, RunStatus};

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    convergence_study, default_k_grid, stability_sweep, CavityMode, ConvergenceReport, ConvergenceStudy,
    GrowthFactorReport,
};
use crate::mesh::{compute_dual_metrics, load_obj, survey_dual_metrics, DualMetrics, SimplicialSurface};
use crate::solver::{
    field_energy, gauss_residuals, FieldState, ImplicitStepper, LinearSolver, MaterialParams, StepperOptions,
};

/// Growth factors above `1 + XI_TOLERANCE` fail the stability command.
pub const XI_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "idec", version, about = "Implicit DEC Maxwell solver on triangulated surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a time-domain simulation.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Report mesh topology and dual-mesh quality.
    CheckMesh {
        mesh: PathBuf,
        #[arg(long)]
        allow_non_well_centered: bool,
    },
    /// Growth-factor sweep plus an empirical energy check.
    Stability {
        config: PathBuf,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Cavity-mode convergence study.
    Convergence {
        config: PathBuf,
        #[command(flatten)]
        flags: Overrides,
    },
}

#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Accept obtuse faces (signed dual lengths, possibly indefinite systems).
    #[arg(long)]
    pub allow_non_well_centered: bool,
    /// Accept negative star1 entries (unpreconditioned CG or LU).
    #[arg(long)]
    pub allow_indefinite: bool,
    /// Use a dense factorization instead of CG.
    #[arg(long)]
    pub direct_solver: bool,
    /// Write outputs here instead of the configured directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.allow_non_well_centered |= self.allow_non_well_centered;
        cfg.allow_indefinite |= self.allow_indefinite;
        if self.direct_solver {
            cfg.solver = LinearSolver::Direct;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output.dir = dir.clone();
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, flags } => {
            let cfg = load_config(&config, &flags)?;
            cmd_run(&cfg, &mut std::io::stdout().lock())?;
            Ok(0)
        }
        Command::CheckMesh {
            mesh,
            allow_non_well_centered,
        } => {
            let report = cmd_check_mesh(&mesh)?;
            print!("{report}");
            let ok = report.passes() || (allow_non_well_centered && report.zero_dual_edges.is_empty());
            Ok(if ok { 0 } else { 1 })
        }
        Command::Stability { config, flags } => {
            let cfg = load_config(&config, &flags)?;
            let report = cmd_stability(&cfg)?;
            print!("{}", report.summary());
            Ok(if report.is_stable(XI_TOLERANCE) { 0 } else { 1 })
        }
        Command::Convergence { config, flags } => {
            let cfg = load_config(&config, &flags)?;
            let report = cmd_convergence(&cfg)?;
            print!("{}", report.summary());
            Ok(0)
        }
    }
}

fn load_config(path: &Path, flags: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    flags.apply(&mut cfg);
    Ok(cfg)
}

fn stepper_options(cfg: &RunConfig) -> StepperOptions {
    StepperOptions {
        solver: cfg.solver,
        boundary: cfg.boundary,
        allow_indefinite: cfg.allow_indefinite,
        jm_sign: cfg.jm_sign,
    }
}

struct Prepared {
    surface: SimplicialSurface,
    metrics: DualMetrics,
    materials: MaterialParams,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let surface = load_obj(&cfg.mesh_path).with_context(|| format!("loading {}", cfg.mesh_path.display()))?;
    cfg.validate_against(&surface)?;
    let metrics = compute_dual_metrics(&surface, cfg.allow_non_well_centered)?;
    let [eps, mu, sigma, sigma_m] = cfg.materials.face_values(surface.n_faces());
    let materials = MaterialParams::from_face_values(cfg.mode, &surface, &eps, &mu, &sigma, &sigma_m);
    materials.validate(&surface)?;
    cfg.source.validate(cfg.mode, &surface)?;
    Ok(Prepared {
        surface,
        metrics,
        materials,
    })
}

fn initial_state(cfg: &RunConfig, p: &Prepared) -> FieldState {
    let mut state = FieldState::zeros(cfg.mode, &p.surface);
    if let InitialCondition::Gaussian {
        amplitude,
        center,
        width,
    } = cfg.initial
    {
        let c = crate::mesh::Point3::new(center[0], center[1], center[2]);
        *state.face_field_mut() = p
            .metrics
            .face_circumcenters
            .iter()
            .map(|x| amplitude * (-(x - c).norm_squared() / (width * width)).exp())
            .collect();
    }
    state
}

/// Load, assemble, step, record. Progress lines go to `log` at every
/// snapshot. On a stepping failure the outputs written so far stay on disk
/// and the manifest is marked incomplete.
pub fn cmd_run(cfg: &RunConfig, log: &mut dyn Write) -> Result<RunSummary> {
    let p = prepare(cfg)?;
    let stepper = ImplicitStepper::assemble(cfg.mode, &p.surface, &p.metrics, &p.materials, cfg.dt, stepper_options(cfg))?;
    let probes = ProbeSet::new(cfg.mode, &cfg.probes_e, &cfg.probes_h);
    let mut out = RunOutput::create(&cfg.output.dir, cfg.output.vtk, cfg.output.csv, &probes.header(cfg.mode))
        .with_context(|| format!("creating {}", cfg.output.dir.display()))?;
    if p.metrics.signed {
        out.warn("mesh is not well-centered; dual lengths are signed");
    }
    if stepper.is_indefinite() {
        out.warn("negative Hodge star entries; the linear system is indefinite");
    }
    for w in out.warnings() {
        writeln!(log, "warning: {w}")?;
    }
    let sources = [cfg.source.clone()];
    let gauss = |s: &FieldState| gauss_residuals(s, &p.surface, &p.metrics, &p.materials, None).max_abs();
    let progress = |log: &mut dyn Write, s: &FieldState, energy: f64, residual: f64| {
        writeln!(
            log,
            "step {:>8}  t = {:.6e}  energy = {:.9e}  max gauss residual = {:.3e}",
            s.n, s.t, energy, residual
        )
    };

    // the scheme needs one previous level; keep the last two states
    let mut ring: VecDeque<FieldState> = VecDeque::with_capacity(2);
    ring.push_back(initial_state(cfg, &p));
    let first = &ring[0];
    let (e0, g0) = (field_energy(first, &p.materials, &p.metrics), gauss(first));
    out.record(&probes.row(first), first, e0, g0)?;
    out.snapshot(&p.surface, first)?;
    progress(log, first, e0, g0)?;
    out.checkpoint(RunStatus::Running, 0, cfg.steps, "")?;

    let mut max_energy = e0;
    for _ in 0..cfg.steps {
        let current = ring.back().expect("ring holds the current state");
        let next = match stepper.step(current, &sources) {
            Ok(s) if s.is_finite() => s,
            Ok(s) => {
                let msg = format!("non-finite field values at step {}", s.n);
                out.checkpoint(RunStatus::Failed, current.n, cfg.steps, &msg)?;
                bail!(msg);
            }
            Err(err) => {
                out.checkpoint(RunStatus::Failed, current.n, cfg.steps, &err.to_string())?;
                return Err(err.into());
            }
        };
        let energy = field_energy(&next, &p.materials, &p.metrics);
        let residual = gauss(&next);
        max_energy = max_energy.max(energy);
        out.record(&probes.row(&next), &next, energy, residual)?;
        if next.n % cfg.output.cadence as u64 == 0 {
            out.snapshot(&p.surface, &next)?;
            progress(log, &next, energy, residual)?;
            out.checkpoint(RunStatus::Running, next.n, cfg.steps, "")?;
        }
        if ring.len() == 2 {
            ring.pop_front();
        }
        ring.push_back(next);
    }
    let last = ring.back().expect("ring holds the current state");
    out.checkpoint(RunStatus::Complete, last.n, cfg.steps, "")?;
    let summary = RunSummary {
        steps: last.n,
        initial_energy: e0,
        final_energy: field_energy(last, &p.materials, &p.metrics),
        max_energy,
        final_gauss_residual: gauss(last),
    };
    writeln!(
        log,
        "completed {} steps; energy {:.9e} -> {:.9e} (max {:.9e}); outputs in {}",
        summary.steps,
        summary.initial_energy,
        summary.final_energy,
        summary.max_energy,
        out.dir().display()
    )?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_energy: f64,
    pub final_gauss_residual: f64,
}

/// Topology and dual-mesh quality summary.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_edges: usize,
    pub euler_characteristic: i64,
    pub min_edge_len: f64,
    pub max_edge_len: f64,
    pub min_dual_edge_len: f64,
    pub non_well_centered: Vec<usize>,
    pub zero_dual_edges: Vec<usize>,
}

impl MeshReport {
    pub fn passes(&self) -> bool {
        self.non_well_centered.is_empty() && self.zero_dual_edges.is_empty()
    }
}

impl fmt::Display for MeshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertices)?;
        writeln!(f, "edges: {} ({} boundary)", self.edges, self.boundary_edges)?;
        writeln!(f, "faces: {}", self.faces)?;
        writeln!(f, "euler characteristic: {}", self.euler_characteristic)?;
        writeln!(f, "edge length: min {:.6e}, max {:.6e}", self.min_edge_len, self.max_edge_len)?;
        writeln!(f, "min dual edge length: {:.6e}", self.min_dual_edge_len)?;
        writeln!(f, "non-well-centered faces: {}", self.non_well_centered.len())?;
        writeln!(f, "zero dual edges: {}", self.zero_dual_edges.len())?;
        if let Some(e) = self.zero_dual_edges.first() {
            writeln!(f, "FAIL: zero dual edge on interior edge {e}")?;
        }
        if let Some(face) = self.non_well_centered.first() {
            writeln!(f, "FAIL: face {face} is not well-centered")?;
        }
        if self.passes() {
            writeln!(f, "PASS")?;
        }
        Ok(())
    }
}

pub fn cmd_check_mesh(path: &Path) -> Result<MeshReport> {
    let surface = load_obj(path).with_context(|| format!("loading {}", path.display()))?;
    let metrics = survey_dual_metrics(&surface)?;
    Ok(MeshReport {
        vertices: surface.n_vertices(),
        edges: surface.n_edges(),
        faces: surface.n_faces(),
        boundary_edges: surface.boundary_edges().len(),
        euler_characteristic: surface.euler_characteristic(),
        min_edge_len: metrics.min_edge_len(),
        max_edge_len: metrics.max_edge_len(),
        min_dual_edge_len: metrics.min_dual_edge_len(),
        non_well_centered: metrics.non_well_centered_faces(),
        zero_dual_edges: metrics.zero_dual_edges(&surface),
    })
}

/// Writes `growth.csv` and `stability_summary.txt` into the output directory.
pub fn cmd_stability(cfg: &RunConfig) -> Result<GrowthFactorReport> {
    let p = prepare(cfg)?;
    let c = p.materials.max_wave_speed(&p.surface);
    let min_dual = p
        .metrics
        .dual_edge_len
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    let dts: Vec<f64> = cfg.stability.dt_factors.iter().map(|f| f * min_dual / c).collect();
    let k_grid = default_k_grid(&p.metrics, cfg.stability.k_samples);
    let report = stability_sweep(
        &p.surface,
        &p.metrics,
        &p.materials,
        &dts,
        &k_grid,
        cfg.stability.empirical_steps,
    )?;
    fs::create_dir_all(&cfg.output.dir)?;
    fs::write(cfg.output.dir.join("growth.csv"), report.to_csv())?;
    fs::write(cfg.output.dir.join("stability_summary.txt"), report.summary())?;
    Ok(report)
}

/// Writes `convergence.csv` and `convergence_summary.txt`.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let Some(spec) = &cfg.convergence else {
        bail!("config has no convergence.meshes");
    };
    let meshes = spec
        .meshes
        .iter()
        .map(|m| load_obj(m).with_context(|| format!("loading {}", m.display())))
        .collect::<Result<Vec<_>>>()?;
    let mut cavity = CavityMode::new(cfg.mode, spec.m, spec.n);
    cavity.eps = cfg.materials.eps;
    cavity.mu = cfg.materials.mu;
    let study = ConvergenceStudy {
        meshes,
        cavity,
        final_time: spec.final_time,
        dt_per_h: spec.dt_per_h,
        temporal_dts: spec.temporal_dts.clone(),
        options: stepper_options(cfg),
    };
    let report = convergence_study(&study)?;
    fs::create_dir_all(&cfg.output.dir)?;
    fs::write(cfg.output.dir.join("convergence.csv"), report.to_csv())?;
    fs::write(cfg.output.dir.join("convergence_summary.txt"), report.summary())?;
    Ok(report)
}
