//! Benchmark cases: configuration, runs, and output files.

mod config;
mod surface;
mod vtk;

pub use config::{parse_config, CaseConfig, Geometry, Loading};
pub use surface::{activation_along, sample_strength_surface, surface_csv, Slice, SurfacePoint};
pub use vtk::{parse_vtk, read_vtk, vtk_text, write_vtk, Snapshot};

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::assembly::Discretization;
use crate::constitutive::MaterialParams;
use crate::error::Error;
use crate::mesh::{generate_dynamic_plate, generate_plate_with_hole, generate_sent, Mesh};
use crate::solver::{
    DirichletCondition, InvariantReport, LoadProgram, Simulation, StepRecord, TractionCondition,
};

/// `∫ (φ² + ℓ²|∇φ|²)/(2ℓ) dΩ`, m.
pub fn crack_length(disc: &Discretization, phi: &[f64], params: &MaterialParams) -> f64 {
    let ell = params.length_scale;
    let mut total = 0.0;
    for (e, geom) in disc.geometry.iter().enumerate() {
        let phi_el = disc.gather_phi(e, phi);
        for ip in geom {
            let mut value = 0.0;
            let mut grad = [0.0; 2];
            for (k, p) in phi_el.iter().enumerate() {
                value += ip.n[k] * p;
                grad[0] += ip.grad[k][0] * p;
                grad[1] += ip.grad[k][1] * p;
            }
            total += (value * value + ell * ell * (grad[0] * grad[0] + grad[1] * grad[1]))
                / (2.0 * ell)
                * ip.dv;
        }
    }
    total
}

pub fn build_mesh(config: &CaseConfig) -> Result<Mesh, Error> {
    Ok(match config.geometry {
        Geometry::PlateHole => generate_plate_with_hole(config.dx)?,
        Geometry::Sent => generate_sent(config.dx)?,
        Geometry::DynamicPlate => {
            let [w, h, notch] = config.plate;
            generate_dynamic_plate(config.dx, w, h, notch)?
        }
    })
}

pub fn load_program(config: &CaseConfig) -> LoadProgram {
    let bc = |set: &str, component, rate| DirichletCondition {
        set: set.into(),
        component,
        rate,
    };
    match config.loading {
        Loading::Tension | Loading::Compression => LoadProgram {
            dirichlet: vec![
                bc("bottom", 0, 0.0),
                bc("bottom", 1, 0.0),
                bc("top", 1, config.rate),
            ],
            tractions: Vec::new(),
            reaction: Some(("top".into(), 1)),
        },
        Loading::Shear => LoadProgram {
            dirichlet: vec![
                bc("bottom", 0, 0.0),
                bc("bottom", 1, 0.0),
                bc("top", 1, 0.0),
                bc("top", 0, config.rate),
            ],
            tractions: Vec::new(),
            reaction: Some(("top".into(), 0)),
        },
        Loading::Traction => LoadProgram {
            dirichlet: Vec::new(),
            tractions: vec![
                TractionCondition {
                    set: "top".into(),
                    traction: [0.0, config.traction],
                },
                TractionCondition {
                    set: "bottom".into(),
                    traction: [0.0, -config.traction],
                },
            ],
            reaction: None,
        },
    }
}

pub fn build_simulation(config: &CaseConfig) -> Result<Simulation, Error> {
    Simulation::new(
        build_mesh(config)?,
        config.material.clone(),
        config.solver.clone(),
        load_program(config),
    )
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub records: Vec<StepRecord>,
    pub invariants: InvariantReport,
    /// Solver abort message; the records stop at the last good step.
    pub aborted: Option<String>,
    pub wall_time: f64,
}

impl CaseOutcome {
    pub fn peak_reaction(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.reaction)
            .fold(0.0, |m, r| if r.abs() > m.abs() { r } else { m })
    }
}

/// The applied column: driven strain for displacement loading, traction
/// (Pa) otherwise.
fn applied_column(config: &CaseConfig, record: &StepRecord) -> f64 {
    if config.is_dynamic() {
        record.applied
    } else {
        record.applied / config.height()
    }
}

pub fn load_displacement_csv(config: &CaseConfig, records: &[StepRecord]) -> String {
    let mut s = String::from("step,time_s,applied,reaction_n_per_m\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.9e},{:.9e},{:.9e}",
            r.step,
            r.time,
            applied_column(config, r),
            r.reaction
        );
    }
    s
}

pub fn crack_length_csv(records: &[StepRecord]) -> String {
    let mut s = String::from("step,time_s,crack_length_m\n");
    for r in records {
        let _ = writeln!(s, "{},{:.9e},{:.9e}", r.step, r.time, r.crack_length);
    }
    s
}

fn summary_text(config: &CaseConfig, sim: &Simulation, outcome: &CaseOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "geometry: {:?}", config.geometry);
    let _ = writeln!(s, "loading: {:?}", config.loading);
    let _ = writeln!(s, "criterion: {}", config.material.criterion.name());
    let _ = writeln!(s, "elements: {}", sim.disc.mesh.element_count());
    let _ = writeln!(s, "nodes: {}", sim.disc.mesh.node_count());
    let _ = writeln!(s, "steps: {}", outcome.records.len());
    let passes: usize = outcome.records.iter().map(|r| r.passes).sum();
    let iterations: usize = outcome.records.iter().map(|r| r.newton_iterations).sum();
    let cutbacks: usize = outcome.records.iter().map(|r| r.cutbacks).sum();
    let max_passes = outcome.records.iter().map(|r| r.passes).max().unwrap_or(0);
    let _ = writeln!(s, "passes: {passes} (max per step {max_passes})");
    let _ = writeln!(s, "newton_iterations: {iterations}");
    let _ = writeln!(s, "cutbacks: {cutbacks}");
    let _ = writeln!(s, "peak_reaction_n_per_m: {:.9e}", outcome.peak_reaction());
    if let Some(last) = outcome.records.last() {
        let _ = writeln!(s, "final_crack_length_m: {:.9e}", last.crack_length);
    }
    let inv = &outcome.invariants;
    let _ = writeln!(s, "phi_range: [{:.9e}, {:.9e}]", inv.phi_min, inv.phi_max);
    let _ = writeln!(s, "history_decreases: {}", inv.history_decreases);
    let _ = writeln!(
        s,
        "max_surface_excess_over_ft: {:.3e}",
        inv.max_surface_excess
    );
    let _ = writeln!(
        s,
        "min_eigenstrain_trace: {:.3e}",
        inv.min_eigenstrain_trace
    );
    let _ = writeln!(
        s,
        "status: {}",
        outcome.aborted.as_deref().unwrap_or("completed")
    );
    let _ = writeln!(s, "wall_time_s: {:.2}", outcome.wall_time);
    s
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn snapshot(sim: &Simulation, dir: &Path) -> Result<(), Error> {
    let path = dir.join(format!("snapshot_{:05}.vtk", sim.step));
    write_vtk(
        &path,
        &sim.disc.mesh,
        &sim.state.u,
        &sim.state.phi,
        sim.params.length_scale,
        sim.time,
    )
}

/// Runs `sim` for `config.solver.n_steps` steps (or until the reaction falls
/// below `stop_ratio` of its peak), writing outputs to `out` if given.
pub fn run_simulation(
    sim: &mut Simulation,
    config: &CaseConfig,
    out: Option<&Path>,
) -> Result<CaseOutcome, Error> {
    let start = Instant::now();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut records = Vec::new();
    let mut aborted = None;
    let mut peak = 0.0f64;
    for _ in 0..config.solver.n_steps {
        match sim.advance() {
            Ok(r) => {
                log::info!(
                    "step {} t={:.4e} applied={:.4e} reaction={:.4e} passes={} its={} L={:.4e}",
                    r.step,
                    r.time,
                    r.applied,
                    r.reaction,
                    r.passes,
                    r.newton_iterations,
                    r.crack_length
                );
                peak = peak.max(r.reaction.abs());
                let stop = config.stop_ratio > 0.0 && r.reaction.abs() < config.stop_ratio * peak;
                records.push(r);
                if let Some(dir) = out {
                    if config.snapshot_stride > 0 && sim.step.is_multiple_of(config.snapshot_stride)
                    {
                        snapshot(sim, dir)?;
                    }
                }
                if stop {
                    break;
                }
            }
            Err(e) => {
                log::error!("{e}");
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    let outcome = CaseOutcome {
        records,
        invariants: sim.invariants,
        aborted,
        wall_time: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        write(
            &dir.join("load_displacement.csv"),
            &load_displacement_csv(config, &outcome.records),
        )?;
        write(
            &dir.join("crack_length.csv"),
            &crack_length_csv(&outcome.records),
        )?;
        let stride_hit =
            config.snapshot_stride > 0 && sim.step.is_multiple_of(config.snapshot_stride);
        if !stride_hit {
            snapshot(sim, dir)?;
        }
        write(
            &dir.join("summary.txt"),
            &summary_text(config, sim, &outcome),
        )?;
    }
    Ok(outcome)
}

pub fn run_case(config: &CaseConfig, out: &Path) -> Result<CaseOutcome, Error> {
    let mut sim = build_simulation(config)?;
    run_simulation(&mut sim, config, Some(out))
}
