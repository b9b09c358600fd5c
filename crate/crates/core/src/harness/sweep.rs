use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::plot::write_plot_script;
use crate::circulant::{GeneratorLaw, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::model::{generate_signal, SignalSpec, SparsityClass};
use crate::quantize::{draw_dither, DitherKind, DitherSpec, QuantizedObservation};
use crate::recover::{Method, RecoveryProblem, RecoveryResult};
use crate::seeding::{derive_seed, stream, stream_rng};
use crate::SQRT_HALF_PI;

pub const SWEEP_COLUMNS: &str =
    "trial,N,m_expected,m_realized,s,method,delta,R,l2_error,direction_error,consistency_ok,status,iterations,runtime_ms,seed";

/// One grid cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ambient_dim: usize,
    pub expected_rows: usize,
    pub sparsity: usize,
    pub method: Method,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub trial: usize,
    pub cell: Cell,
    pub realized_rows: Option<usize>,
    pub energy_bound: Option<f64>,
    pub l2_error: Option<f64>,
    pub direction_error: Option<f64>,
    pub consistency_ok: Option<bool>,
    pub status: String,
    pub iterations: Option<usize>,
    pub runtime_ms: u64,
    pub seed: u64,
    /// `|‖x̂‖₂ − ‖x‖₂|`; not part of the CSV schema.
    pub energy_error: Option<f64>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        !self.status.starts_with("error")
    }

    pub fn to_csv(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let c = &self.cell;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            c.ambient_dim,
            c.expected_rows,
            opt(self.realized_rows),
            c.sparsity,
            c.method,
            opt(c.delta),
            opt(self.energy_bound),
            opt(self.l2_error),
            opt(self.direction_error),
            opt(self.consistency_ok.map(u8::from)),
            self.status,
            opt(self.iterations),
            self.runtime_ms,
            self.seed
        )
    }
}

/// Cells in deterministic order: N, m, s, method, δ.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &n in &cfg.ambient_dims {
        for &m in &cfg.expected_rows {
            for &s in &cfg.sparsities {
                for &method in &cfg.methods {
                    let deltas: Vec<Option<f64>> = if method.needs_resolution() {
                        cfg.deltas.iter().map(|d| Some(*d)).collect()
                    } else {
                        vec![None]
                    };
                    for delta in deltas {
                        out.push(Cell {
                            ambient_dim: n,
                            expected_rows: m,
                            sparsity: s,
                            method,
                            delta,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Trial seed shared by every method and resolution on the same `(N, m, s)`,
/// so methods are compared on identical ensembles and signals.
pub fn trial_seed(master: u64, cell: &Cell, trial: usize) -> u64 {
    derive_seed(
        master,
        &[
            cell.ambient_dim as u64,
            cell.expected_rows as u64,
            cell.sparsity as u64,
            trial as u64,
        ],
    )
}

fn error_status(e: &Error) -> &'static str {
    match e {
        Error::EmptyMeasurement => "error_empty_measurement",
        Error::DegenerateEstimate => "error_degenerate_estimate",
        _ => "error_other",
    }
}

/// Perturbation for ℓ1-BPDN trials: `±magnitude` outliers on
/// `round(fraction·m)` random rows plus dense Gaussian noise rescaled to
/// ℓ1 mass `dense_l1`.
pub fn perturbation(m: usize, fraction: f64, magnitude: f64, dense_l1: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream::NOISE);
    let k = ((fraction * m as f64).round() as usize).min(m);
    let mut out = vec![0.0; m];
    for i in index::sample(&mut rng, m, k) {
        out[i] = if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        };
    }
    if dense_l1 > 0.0 {
        let g: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let scale = dense_l1 / g.iter().map(|v| v.abs()).sum::<f64>();
        out.iter_mut().zip(&g).for_each(|(o, v)| *o += scale * v);
    }
    out
}

/// Measures a signal and quantizes it as `method` expects, returning the
/// observation and the ℓ1-BPDN budget.
pub fn observe(
    cfg: &ExperimentConfig,
    cell: &Cell,
    e: &MeasurementEnsemble,
    x: &[f64],
    seed: u64,
) -> Result<(QuantizedObservation, f64)> {
    let m = e.realized_rows();
    let ax = e.apply(x, false)?;
    let r = cfg.energy_bound;
    let gaussian = DitherSpec::new(DitherKind::GaussianThreshold { scale: r }, seed);
    Ok(match cell.method {
        Method::HardThreshold | Method::OneBitLp => {
            (QuantizedObservation::one_bit(&ax, vec![0.0; m])?, 0.0)
        }
        Method::OneBitCp => (
            QuantizedObservation::one_bit(&ax, draw_dither(&gaussian, m)?)?,
            0.0,
        ),
        Method::DitheredScalarCp => {
            let delta = cell.delta.expect("scalar cell has a resolution");
            let tau = draw_dither(&gaussian, m)?;
            let u = draw_dither(
                &DitherSpec::new(DitherKind::UniformInCell { resolution: delta }, seed),
                m,
            )?;
            let v: Vec<f64> = ax.iter().map(|a| SQRT_HALF_PI * a).collect();
            (QuantizedObservation::scalar(&v, delta, tau, u)?, 0.0)
        }
        Method::LinfBp => {
            let delta = cell.delta.expect("scalar cell has a resolution");
            (
                QuantizedObservation::scalar(&ax, delta, vec![0.0; m], vec![0.0; m])?,
                0.0,
            )
        }
        Method::L1Bpdn => {
            let noise = perturbation(
                m,
                cfg.outlier_fraction,
                cfg.outlier_magnitude,
                cfg.noise_budget,
                seed,
            );
            let eps = noise.iter().map(|v| v.abs()).sum::<f64>();
            let y: Vec<f64> = ax.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let obs = QuantizedObservation {
                codes: y,
                tau: vec![0.0; m],
                uniform: vec![0.0; m],
                resolution: None,
                program: crate::quantize::ProgramTag::Scalar,
            };
            (obs, eps)
        }
    })
}

/// One trial of one cell, run end to end.
pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> SweepRow {
    let seed = trial_seed(cfg.master_seed, cell, trial);
    let mut row = SweepRow {
        trial,
        cell: *cell,
        realized_rows: None,
        energy_bound: cell.method.needs_energy_bound().then_some(cfg.energy_bound),
        l2_error: None,
        direction_error: None,
        consistency_ok: None,
        status: String::new(),
        iterations: None,
        runtime_ms: 0,
        seed,
        energy_error: None,
    };
    let start = Instant::now();
    match solve_trial(cfg, cell, seed) {
        Ok((result, realized, truth_norm)) => {
            row.realized_rows = Some(realized);
            row.l2_error = result.l2_error;
            row.direction_error = result.direction_error;
            row.consistency_ok = Some(result.consistency_ok);
            row.status = result.report.status.to_string();
            row.iterations = Some(result.report.iterations);
            row.energy_error = Some((crate::model::norm2(&result.estimate) - truth_norm).abs());
        }
        Err((e, realized)) => {
            row.realized_rows = realized;
            row.status = error_status(&e).to_string();
        }
    }
    if cfg.record_runtime {
        row.runtime_ms = start.elapsed().as_millis() as u64;
    }
    row
}

type TrialFailure = (Error, Option<usize>);

fn solve_trial(
    cfg: &ExperimentConfig,
    cell: &Cell,
    seed: u64,
) -> std::result::Result<(RecoveryResult, usize, f64), TrialFailure> {
    let n = cell.ambient_dim;
    let e = MeasurementEnsemble::sample(n, cell.expected_rows, GeneratorLaw::Gaussian, false, seed)
        .map_err(|e| (e, None))?;
    let realized = e.realized_rows();
    let spec = match cfg.signal_class {
        SparsityClass::ExactSparse => SignalSpec::exact(n, cell.sparsity, cfg.signal_norm),
        SparsityClass::EffectivelySparse => {
            SignalSpec::effective(n, cell.sparsity, cfg.signal_norm)
        }
    };
    let wrap = |e: Error| (e, Some(realized));
    let x = generate_signal(&spec, seed).map_err(wrap)?;
    let (obs, eps) = observe(cfg, cell, &e, &x, seed).map_err(wrap)?;
    let mut problem = RecoveryProblem::new(cell.method, &e, &obs);
    if cell.method.needs_sparsity() {
        problem.sparsity = Some(cell.sparsity);
    }
    if cell.method.needs_energy_bound() {
        problem.energy_bound = Some(cfg.energy_bound);
    }
    if cell.method.needs_resolution() {
        problem.resolution = cell.delta;
    }
    if cell.method.needs_noise_budget() {
        problem.noise_budget = Some(eps);
    }
    let mut result = problem.solve().map_err(wrap)?;
    result.score(&x);
    Ok((result, realized, cfg.signal_norm))
}

/// Worker count: `ONEBIT_WORKERS` beats the config; 0 means all cores.
pub fn worker_count(configured: usize) -> usize {
    std::env::var("ONEBIT_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(configured)
}

/// Runs every (cell, trial) pair on a pool of `workers` threads; rows come
/// back in cell-major, trial-minor order regardless of scheduling.
pub fn run_sweep_with(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let jobs: Vec<(Cell, usize)> = cells(cfg)
        .into_iter()
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(c, t)| run_trial(cfg, c, *t))
            .collect()
    }))
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(cfg, worker_count(cfg.workers))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{SWEEP_COLUMNS}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

/// Path of the plotting script written next to a CSV.
pub fn plot_script_path(csv: &Path) -> PathBuf {
    csv.with_extension("plot.py")
}

/// Runs the sweep, writes the CSV to `cfg.output` and a plotting script next to it.
pub fn run_sweep_to_file(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let file = File::create(&cfg.output)?;
    let rows = run_sweep(cfg)?;
    let mut w = BufWriter::new(file);
    write_sweep_csv(&rows, &mut w)?;
    w.flush()?;
    let script = plot_script_path(&cfg.output);
    write_plot_script(&cfg.output, BufWriter::new(File::create(script)?))?;
    Ok(rows)
}

/// Median of the finite values.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}
