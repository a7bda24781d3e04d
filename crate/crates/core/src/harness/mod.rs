//! Experiment driver: presets, trajectories, reference solutions,
//! convergence sweeps, invariant tracking and filament output.

pub mod filament;
pub mod output;
pub mod presets;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{l2_frame_error, max_relative_drift, order_estimate, ConservedReport};
use crate::error::{Error, Result};
use crate::flowrh::scheme_b_run;
use crate::frame::{initial_data, Frame, InitialData};
use crate::lowreg::LowRegConfig;
use crate::magnus::scheme_a_run;
use crate::par;
use crate::spectral::{SpectralField, TorusGrid, VectorField3};
use crate::splitting::{self, run_splitting_substeps};

pub use filament::{reconstruct_filament, FilamentCurve};
pub use output::{content_hash, FileEntry, Manifest, OutputFormat, Table};
pub use presets::{load_tangent_file, preset_circle, preset_rough, preset_smooth, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Strang splitting with second-order Magnus.
    #[serde(rename = "scheme_a_2")]
    SchemeA2,
    /// Fourth-order triple-jump splitting with fourth-order Magnus.
    #[serde(rename = "scheme_a_4")]
    SchemeA4,
    /// Low-regularity NLS with the FLowRH frame update.
    SchemeB,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::SchemeA2 => "scheme_a_2",
            SchemeKind::SchemeA4 => "scheme_a_4",
            SchemeKind::SchemeB => "scheme_b",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scheme_a_2" => Ok(SchemeKind::SchemeA2),
            "scheme_a_4" => Ok(SchemeKind::SchemeA4),
            "scheme_b" => Ok(SchemeKind::SchemeB),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Simulate,
    Converge,
    Conserve,
    Filament,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Converge => "converge",
            Mode::Conserve => "conserve",
            Mode::Filament => "filament",
        }
    }
}

/// How the reference solution of a convergence sweep is produced. Unset
/// fields fall back to: `scheme_a_4` (smooth data) or `scheme_b` (rough data),
/// step `h_min/16`, the sweep's own grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSpec {
    pub scheme: Option<SchemeKind>,
    pub step: Option<f64>,
    pub n_modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub preset: Preset,
    /// Tangent samples for `preset = "file"`.
    pub input_file: Option<PathBuf>,
    pub scheme: SchemeKind,
    pub n_modes: usize,
    /// Time step; in converge mode the largest step of the sweep.
    pub step: f64,
    /// Number of step sizes `step, step/2, …` in a convergence sweep.
    pub sweep: usize,
    pub t_end: f64,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub reference: ReferenceSpec,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// Keep every `stride`-th time level in time-series output.
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Simulate,
            preset: Preset::Smooth,
            input_file: None,
            scheme: SchemeKind::SchemeA4,
            n_modes: 128,
            step: 1.0 / 200.0,
            sweep: 6,
            t_end: 1.0,
            fp_tol: LowRegConfig::default().fp_tolerance,
            fp_max_iters: LowRegConfig::default().fp_max_iters,
            reference: ReferenceSpec::default(),
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
            stride: 1,
        }
    }
}

/// `round(t_end / h)`.
pub fn step_count(t_end: f64, h: f64) -> usize {
    (t_end / h).round() as usize
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.t_end > 0.0 && self.step > self.t_end * (1.0 + 1e-12) {
            return bad(format!("step {} exceeds t_end {}", self.step, self.t_end));
        }
        if self.preset == Preset::File && self.input_file.is_none() {
            return bad("preset `file` needs input_file".into());
        }
        if self.mode == Mode::Converge {
            if self.sweep < 2 {
                return bad("a convergence sweep needs at least two step sizes".into());
            }
            if self.t_end == 0.0 {
                return bad("a convergence sweep needs t_end > 0".into());
            }
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if let Some(h) = self.reference.step {
            if !(h > 0.0) {
                return bad(format!("reference step must be positive, got {h}"));
            }
        }
        self.lowreg().validate()?;
        let m = self.t_end / self.step;
        if (m - m.round()).abs() > 1e-9 * m.max(1.0) {
            warn!(
                "t_end/step = {m} is not an integer; running {} steps of {}",
                m.round(),
                self.step
            );
        }
        Ok(())
    }

    pub fn lowreg(&self) -> LowRegConfig {
        LowRegConfig {
            fp_tolerance: self.fp_tol,
            fp_max_iters: self.fp_max_iters,
            ..LowRegConfig::default()
        }
    }

    /// `step · 2^{−j}` for `j < sweep`.
    pub fn sweep_steps(&self) -> Vec<f64> {
        (0..self.sweep)
            .map(|j| self.step / f64::powi(2.0, j as i32))
            .collect()
    }

    /// Initial tangent field on `n` nodes together with its sampling offset.
    pub fn tangent(&self, n: usize) -> Result<(VectorField3, f64)> {
        match self.preset {
            Preset::File => {
                let path = self.input_file.as_ref().expect("validated");
                let t = load_tangent_file(path)?;
                if t.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "{} holds {} samples but n_modes = {n}",
                        path.display(),
                        t.len()
                    )));
                }
                Ok((t, 0.0))
            }
            p => Ok((p.tangent(n)?, p.sample_offset(n))),
        }
    }

    fn resolved_reference(&self) -> (SchemeKind, f64, usize) {
        let h_min = self.sweep_steps().last().copied().unwrap_or(self.step);
        let scheme = self.reference.scheme.unwrap_or(match self.preset {
            Preset::Rough => SchemeKind::SchemeB,
            _ => SchemeKind::SchemeA4,
        });
        (
            scheme,
            self.reference.step.unwrap_or(h_min / 16.0),
            self.reference.n_modes.unwrap_or(self.n_modes),
        )
    }
}

/// Frames and NLS states at `t_m = mh`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Frame>,
    pub states: Vec<SpectralField>,
    /// Fixed-point iteration counts per step (Scheme B only).
    pub iterations: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn final_frame(&self) -> &Frame {
        self.frames
            .last()
            .expect("trajectory holds the initial frame")
    }
}

/// Runs `scheme` for `n_steps` steps of size `h`.
pub fn simulate(
    data: &InitialData,
    scheme: SchemeKind,
    h: f64,
    n_steps: usize,
    lowreg: &LowRegConfig,
) -> Result<Trajectory> {
    let times: Vec<f64> = (0..=n_steps).map(|m| m as f64 * h).collect();
    match scheme {
        SchemeKind::SchemeA2 | SchemeKind::SchemeA4 => {
            let (order, split) = if scheme == SchemeKind::SchemeA2 {
                (2, splitting::preset("strang")?)
            } else {
                (4, splitting::preset("yoshida4")?)
            };
            let run = scheme_a_run(&data.frame, &data.u0, h, n_steps, order, &split)?;
            // Frame updates only consume the node states; the grid-time
            // states are reported separately.
            let states = run_splitting_substeps(&data.u0, &times, &split, Some(h))?;
            Ok(Trajectory {
                times,
                frames: run.frames,
                states,
                iterations: None,
            })
        }
        SchemeKind::SchemeB => {
            let run = scheme_b_run(&data.frame, &data.u0, h, n_steps, lowreg)?;
            Ok(Trajectory {
                times,
                frames: run.frames,
                states: run.states,
                iterations: Some(run.iterations),
            })
        }
    }
}

/// Translate a real field by `delta`: returns `x ↦ f(x + delta)`.
fn translate(t: &VectorField3, delta: f64) -> VectorField3 {
    if delta == 0.0 {
        return t.clone();
    }
    let grid = t.grid();
    let comp = |j: usize| -> Vec<f64> {
        SpectralField::from_real_values(grid, t.component(j))
            .expect("same grid")
            .apply_multiplier(|k| Complex64::from_polar(1.0, k as f64 * delta))
            .to_values()
            .into_iter()
            .map(|z| z.re)
            .collect()
    };
    VectorField3::new(grid, [comp(0), comp(1), comp(2)]).expect("same grid")
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub step: f64,
    pub n_steps: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log step`.
    pub slope: f64,
    pub reference_scheme: SchemeKind,
    pub reference_step: f64,
    pub reference_modes: usize,
}

/// Final-time `L²` tangent errors against a self-generated reference,
/// compared on the sweep grid after Fourier truncation.
pub fn convergence_study(cfg: &RunConfig) -> Result<ConvergenceStudy> {
    let (ref_scheme, ref_step, ref_n) = cfg.resolved_reference();
    let lowreg = cfg.lowreg();
    let (t0, offset) = cfg.tangent(cfg.n_modes)?;
    let data = initial_data(&t0, cfg.preset.frame_route())?;

    let (ref_t0, ref_offset) = cfg.tangent(ref_n)?;
    let ref_data = initial_data(&ref_t0, cfg.preset.frame_route())?;
    let hs = cfg.sweep_steps();
    let n_ref_steps = step_count(cfg.t_end, ref_step);
    info!("reference: {ref_scheme} with h = {ref_step:e}, N = {ref_n}, {n_ref_steps} steps");

    // The reference and the sweep cells are independent; run them together.
    enum Job {
        Reference,
        Cell(f64),
    }
    let jobs: Vec<Job> = std::iter::once(Job::Reference)
        .chain(hs.iter().map(|&h| Job::Cell(h)))
        .collect();
    let finals = par::map_items(&jobs, |job| -> Result<VectorField3> {
        let traj = match *job {
            Job::Reference => simulate(&ref_data, ref_scheme, ref_step, n_ref_steps, &lowreg)?,
            Job::Cell(h) => simulate(&data, cfg.scheme, h, step_count(cfg.t_end, h), &lowreg)?,
        };
        Ok(traj.final_frame().t.clone())
    });
    let mut finals = finals.into_iter();
    let reference = finals.next().expect("reference job")?;
    // Node x_j of a grid with offset δ carries the solution at x_j + δ.
    let reference = translate(
        &reference.resample(TorusGrid::new(cfg.n_modes)?),
        offset - ref_offset,
    );

    let mut rows = Vec::with_capacity(hs.len());
    for (&h, fin) in hs.iter().zip(finals) {
        rows.push(ConvergenceRow {
            step: h,
            n_steps: step_count(cfg.t_end, h),
            error: l2_frame_error(&fin?, &reference)?,
        });
    }
    let slope = order_estimate(
        &rows.iter().map(|r| r.step).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.error).collect::<Vec<_>>(),
    )?;
    Ok(ConvergenceStudy {
        rows,
        slope,
        reference_scheme: ref_scheme,
        reference_step: ref_step,
        reference_modes: ref_n,
    })
}

/// Trajectory of the configured run.
pub fn run_trajectory(cfg: &RunConfig) -> Result<Trajectory> {
    let (t0, _) = cfg.tangent(cfg.n_modes)?;
    let data = initial_data(&t0, cfg.preset.frame_route())?;
    simulate(
        &data,
        cfg.scheme,
        cfg.step,
        step_count(cfg.t_end, cfg.step),
        &cfg.lowreg(),
    )
}

fn strided<T>(items: &[T], stride: usize) -> Vec<usize> {
    let last = items.len().saturating_sub(1);
    let mut idx: Vec<usize> = (0..items.len()).step_by(stride).collect();
    if idx.last() != Some(&last) && !items.is_empty() {
        idx.push(last);
    }
    idx
}

fn conserved_table(traj: &Trajectory, stride: usize) -> Result<(Table, ConservedReport)> {
    let idx = strided(&traj.times, stride);
    let times: Vec<f64> = idx.iter().map(|&i| traj.times[i]).collect();
    let frames: Vec<Frame> = idx.iter().map(|&i| traj.frames[i].clone()).collect();
    let states: Vec<SpectralField> = idx.iter().map(|&i| traj.states[i].clone()).collect();
    let report = ConservedReport::from_trajectory(&times, &frames, Some(&states))?;
    let mut table = Table::new(
        "conserved",
        &[
            "t",
            "energy_e",
            "action_i",
            "nls_mass",
            "unit_defect",
            "frame_defect",
        ],
    );
    let mass = report.nls_mass.as_ref().expect("states supplied");
    for i in 0..times.len() {
        table.push(vec![
            report.times[i],
            report.energy_e[i],
            report.action_i[i],
            mass[i],
            report.unit_defect[i],
            report.frame_defect[i],
        ]);
    }
    Ok((table, report))
}

fn final_state_table(traj: &Trajectory) -> Table {
    let frame = traj.final_frame();
    let u = traj.states.last().expect("nonempty").to_values();
    let mut table = Table::new(
        "final_state",
        &[
            "x", "t_x", "t_y", "t_z", "e1_x", "e1_y", "e1_z", "e2_x", "e2_y", "e2_z", "u_re",
            "u_im",
        ],
    );
    let grid = frame.grid();
    for i in 0..grid.n_modes() {
        let [t, e1, e2] = frame.rows(i);
        table.push(vec![
            grid.node(i),
            t[0],
            t[1],
            t[2],
            e1[0],
            e1[1],
            e1[2],
            e2[0],
            e2[1],
            e2[2],
            u[i].re,
            u[i].im,
        ]);
    }
    table
}

fn convergence_table(study: &ConvergenceStudy) -> Table {
    let mut table = Table::new(
        "convergence",
        &["h", "steps", "error", "local_slope", "slope"],
    );
    for (i, r) in study.rows.iter().enumerate() {
        let local = if i == 0 {
            f64::NAN
        } else {
            let p = &study.rows[i - 1];
            (r.error / p.error).ln() / (r.step / p.step).ln()
        };
        table.push(vec![r.step, r.n_steps as f64, r.error, local, study.slope]);
    }
    table
}

fn filament_tables(traj: &Trajectory, stride: usize) -> Result<Vec<Table>> {
    let tangents: Vec<&VectorField3> = traj.frames.iter().map(|f| &f.t).collect();
    let curves = reconstruct_filament(&tangents, &traj.times)?;
    let mut pts = Table::new("filament", &["t", "x", "X", "Y", "Z"]);
    let mut base = Table::new("base_point", &["t", "X", "Y", "Z", "closure_gap"]);
    for i in strided(&curves, stride) {
        let c = &curves[i];
        let grid = traj.frames[i].grid();
        for (j, p) in c.points.iter().enumerate() {
            pts.push(vec![c.time, grid.node(j), p[0], p[1], p[2]]);
        }
        base.push(vec![
            c.time,
            c.base_point[0],
            c.base_point[1],
            c.base_point[2],
            c.closure_error(),
        ]);
    }
    Ok(vec![pts, base])
}

/// What a run wrote and its headline numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub manifest_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

/// Runs the configured experiment and writes its tables plus `manifest.json`
/// into `cfg.out`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let mut tables = Vec::new();
    let summary = match cfg.mode {
        Mode::Simulate | Mode::Conserve | Mode::Filament => {
            let traj = run_trajectory(cfg)?;
            let (conserved, report) = conserved_table(&traj, cfg.stride)?;
            let mut s = serde_json::json!({
                "final_time": traj.times.last(),
                "steps": traj.times.len() - 1,
                "energy_drift": max_relative_drift(&report.energy_e),
                "action_drift": max_relative_drift(&report.action_i),
                "mass_drift": max_relative_drift(report.nls_mass.as_deref().unwrap_or(&[])),
                "max_unit_defect": report.unit_defect.iter().copied().fold(0.0, f64::max),
                "max_frame_defect": report.frame_defect.iter().copied().fold(0.0, f64::max),
            });
            if let Some(it) = &traj.iterations {
                s["max_fp_iterations"] = serde_json::json!(it.iter().max());
            }
            match cfg.mode {
                Mode::Simulate => {
                    tables.push(final_state_table(&traj));
                    tables.push(conserved);
                }
                Mode::Conserve => tables.push(conserved),
                _ => tables.extend(filament_tables(&traj, cfg.stride)?),
            }
            s
        }
        Mode::Converge => {
            let study = convergence_study(cfg)?;
            tables.push(convergence_table(&study));
            serde_json::to_value(&study)?
        }
    };
    write_run(&cfg.out, cfg, &tables, summary)
}

fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    tables: &[Table],
    summary: serde_json::Value,
) -> Result<RunSummary> {
    let written = output::write_tables(dir, tables, cfg.format)?;
    let config = serde_json::to_value(cfg)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: content_hash(serde_json::to_string(&config)?.as_bytes()),
        config,
        files: written.iter().map(|(_, e)| e.clone()).collect(),
        summary,
    };
    let manifest_path = dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(RunSummary {
        manifest_path,
        files: written.into_iter().map(|(p, _)| p).collect(),
        manifest,
    })
}
