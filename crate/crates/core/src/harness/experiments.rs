use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use super::config::{
    ConcentrationConfig, CounterexampleConfig, DumpConfig, ExperimentConfig, RecoverConfig,
    RipConfig, RipMethodKind, RipTarget,
};
use super::sweep::{observe, Cell};
use crate::circulant::{
    read_binary, read_csv, write_binary, write_csv, GeneratorLaw, MeasurementEnsemble,
};
use crate::error::{Error, Result};
use crate::model::{generate_signal, SignalSpec};
use crate::quantize::{ProgramTag, QuantizedObservation};
use crate::recover::{counterexample_check, RecoveryProblem, RecoveryResult};
use crate::rip::{
    concentration_trial, estimate_l2_upper, estimate_rip12, estimate_rip12_extended,
    ConcentrationTable, RipEstimate, RipMethod,
};
use crate::seeding::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRow {
    pub ambient_dim: usize,
    pub lambda: f64,
    pub law: GeneratorLaw,
    pub seeds: usize,
    /// Fraction of seeds where `sign(Ax₊) = sign(Ax₋)` entrywise.
    pub identical_fraction: f64,
}

fn law_index(law: GeneratorLaw) -> u64 {
    match law {
        GeneratorLaw::Gaussian => 0,
        GeneratorLaw::Rademacher => 1,
    }
}

/// For each `(N, law, λ)`, the fraction of seeds whose two sign vectors coincide.
pub fn run_counterexample(cfg: &CounterexampleConfig) -> Result<Vec<CounterexampleRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.ambient_dims {
        for &law in &cfg.laws {
            for &lambda in &cfg.lambdas {
                let hits = (0..cfg.seeds)
                    .into_par_iter()
                    .map(|k| {
                        let seed =
                            derive_seed(cfg.master_seed, &[n as u64, law_index(law), k as u64]);
                        counterexample_check(n, lambda, law, seed)
                    })
                    .collect::<Result<Vec<bool>>>()?;
                rows.push(CounterexampleRow {
                    ambient_dim: n,
                    lambda,
                    law,
                    seeds: cfg.seeds,
                    identical_fraction: hits.iter().filter(|h| **h).count() as f64
                        / cfg.seeds as f64,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_counterexample_csv<W: Write>(rows: &[CounterexampleRow], mut w: W) -> Result<()> {
    writeln!(w, "N,lambda,law,seeds,identical_fraction")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.ambient_dim,
            r.lambda,
            r.law.name(),
            r.seeds,
            r.identical_fraction
        )?;
    }
    Ok(())
}

/// Concentration tables for `y` flat on the first `s` coordinates.
pub fn run_concentration(cfg: &ConcentrationConfig) -> Result<Vec<ConcentrationTable>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &n in &cfg.ambient_dims {
        for &s in &cfg.sparsities {
            let mut y = vec![0.0; n];
            let level = 1.0 / (s as f64).sqrt();
            y[..s].iter_mut().for_each(|v| *v = level);
            let seed = derive_seed(cfg.master_seed, &[n as u64, s as u64]);
            out.push(concentration_trial(
                &y,
                s as f64,
                cfg.draws,
                &cfg.thresholds,
                seed,
            )?);
        }
    }
    Ok(out)
}

fn rip_method(cfg: &RipConfig) -> RipMethod {
    match cfg.method {
        RipMethodKind::Random => RipMethod::RandomSample(cfg.resolution),
        RipMethodKind::Grid => RipMethod::GridOverSupports(cfg.resolution),
        RipMethodKind::Exact => RipMethod::ExactSupportEnum,
    }
}

/// Samples one ensemble and estimates the configured property at every sparsity.
pub fn run_rip(cfg: &RipConfig) -> Result<Vec<RipEstimate>> {
    let extended = cfg.target == RipTarget::Rip12Extended;
    let e = MeasurementEnsemble::sample(
        cfg.ambient_dim,
        cfg.expected_rows,
        GeneratorLaw::Gaussian,
        extended,
        cfg.master_seed,
    )?;
    let method = rip_method(cfg);
    let budget = u128::from(cfg.budget);
    cfg.sparsities
        .iter()
        .map(|&s| {
            let seed = derive_seed(cfg.master_seed, &[s as u64]);
            match cfg.target {
                RipTarget::Rip12 => estimate_rip12(&e, s, cfg.effective, method, budget, seed),
                RipTarget::Rip12Extended => {
                    estimate_rip12_extended(&e, s, cfg.effective, method, budget, seed)
                }
                RipTarget::L2Upper => estimate_l2_upper(&e, s, method, budget, seed),
            }
        })
        .collect()
}

/// Samples the configured ensemble and writes it as CSV or binary.
pub fn run_dump<W: Write>(cfg: &DumpConfig, w: W) -> Result<MeasurementEnsemble> {
    let e = MeasurementEnsemble::sample(
        cfg.ambient_dim,
        cfg.expected_rows,
        cfg.law,
        cfg.extra_column,
        cfg.seed,
    )?;
    if cfg.binary {
        write_binary(&e, w)?;
    } else {
        write_csv(&e, w)?;
    }
    Ok(e)
}

/// Loads an ensemble dump, sniffing the binary magic.
pub fn read_ensemble(path: &Path) -> Result<MeasurementEnsemble> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"OBCSENS1") {
        read_binary(bytes.as_slice())
    } else {
        read_csv(bytes.as_slice())
    }
}

/// Reads `index,code,tau_or_u` rows; the offset is returned as the threshold.
pub fn read_observation_csv<R: BufRead>(
    r: R,
    resolution: Option<f64>,
) -> Result<QuantizedObservation> {
    let mut codes = Vec::new();
    let mut tau = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("line {}: expected 3 fields", k + 1)));
        }
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", k + 1)))
        };
        if fields[0].parse::<usize>().ok() != Some(codes.len()) {
            return Err(Error::Format(format!(
                "line {}: indices must run 0, 1, ...",
                k + 1
            )));
        }
        codes.push(parse(fields[1])?);
        tau.push(parse(fields[2])?);
    }
    if codes.is_empty() {
        return Err(Error::Format("observation has no rows".into()));
    }
    let m = codes.len();
    Ok(QuantizedObservation {
        codes,
        tau,
        uniform: vec![0.0; m],
        resolution,
        program: if resolution.is_some() {
            ProgramTag::DitheredScalar
        } else {
            ProgramTag::ThresholdedOneBit
        },
    })
}

fn solve_with(
    cfg: &RecoverConfig,
    e: &MeasurementEnsemble,
    obs: &QuantizedObservation,
    eps: f64,
) -> Result<RecoveryResult> {
    let method = cfg.method;
    let mut p = RecoveryProblem::new(method, e, obs);
    p.sparsity = method.needs_sparsity().then_some(cfg.sparsity);
    p.energy_bound = method.needs_energy_bound().then_some(cfg.energy_bound);
    p.resolution = method.needs_resolution().then_some(cfg.delta);
    p.noise_budget = method.needs_noise_budget().then_some(eps);
    p.solve()
}

/// Runs one recovery; simulated runs are scored against the drawn signal.
pub fn run_recover(cfg: &RecoverConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    if let (Some(ens), Some(obs)) = (&cfg.ensemble, &cfg.observation) {
        let e = read_ensemble(ens)?;
        let resolution = cfg.method.needs_resolution().then_some(cfg.delta);
        let file = std::io::BufReader::new(std::fs::File::open(obs)?);
        let o = read_observation_csv(file, resolution)?;
        return solve_with(cfg, &e, &o, cfg.noise_budget);
    }
    let e = MeasurementEnsemble::sample(
        cfg.ambient_dim,
        cfg.expected_rows,
        GeneratorLaw::Gaussian,
        false,
        cfg.seed,
    )?;
    let x = generate_signal(
        &SignalSpec::exact(cfg.ambient_dim, cfg.sparsity, cfg.signal_norm),
        cfg.seed,
    )?;
    let sweep = ExperimentConfig {
        energy_bound: cfg.energy_bound,
        noise_budget: cfg.noise_budget,
        ..ExperimentConfig::default()
    };
    let cell = Cell {
        ambient_dim: cfg.ambient_dim,
        expected_rows: cfg.expected_rows,
        sparsity: cfg.sparsity,
        method: cfg.method,
        delta: cfg.method.needs_resolution().then_some(cfg.delta),
    };
    let (obs, eps) = observe(&sweep, &cell, &e, &x, cfg.seed)?;
    let mut result = solve_with(cfg, &e, &obs, eps)?;
    result.score(&x);
    Ok(result)
}

pub fn write_estimate_csv<W: Write>(result: &RecoveryResult, mut w: W) -> Result<()> {
    writeln!(w, "index,estimate")?;
    for (i, v) in result.estimate.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_table_shape() {
        let cfg = CounterexampleConfig {
            ambient_dims: vec![16],
            lambdas: vec![0.5],
            laws: vec![GeneratorLaw::Rademacher],
            seeds: 5,
            ..CounterexampleConfig::default()
        };
        let rows = run_counterexample(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].identical_fraction, 1.0);
    }

    #[test]
    fn dump_roundtrip() {
        let cfg = DumpConfig::default();
        let mut buf = Vec::new();
        let e = run_dump(&cfg, &mut buf).unwrap();
        let back = crate::circulant::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.index_set(), e.index_set());
    }

    #[test]
    fn recover_from_files_matches_simulation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RecoverConfig {
            method: crate::recover::Method::OneBitCp,
            ..RecoverConfig::default()
        };
        let simulated = run_recover(&cfg).unwrap();
        let e = MeasurementEnsemble::sample(
            cfg.ambient_dim,
            cfg.expected_rows,
            GeneratorLaw::Gaussian,
            false,
            cfg.seed,
        )
        .unwrap();
        let x = generate_signal(
            &SignalSpec::exact(cfg.ambient_dim, cfg.sparsity, cfg.signal_norm),
            cfg.seed,
        )
        .unwrap();
        let cell = Cell {
            ambient_dim: cfg.ambient_dim,
            expected_rows: cfg.expected_rows,
            sparsity: cfg.sparsity,
            method: cfg.method,
            delta: None,
        };
        let sweep = ExperimentConfig {
            energy_bound: cfg.energy_bound,
            ..ExperimentConfig::default()
        };
        let (obs, _) = observe(&sweep, &cell, &e, &x, cfg.seed).unwrap();
        let ens_path = dir.path().join("e.bin");
        let obs_path = dir.path().join("o.csv");
        write_binary(&e, std::fs::File::create(&ens_path).unwrap()).unwrap();
        obs.write_csv(std::fs::File::create(&obs_path).unwrap())
            .unwrap();
        let loaded = run_recover(&RecoverConfig {
            ensemble: Some(ens_path),
            observation: Some(obs_path),
            ..cfg
        })
        .unwrap();
        assert_eq!(loaded.estimate, simulated.estimate);
    }
}
