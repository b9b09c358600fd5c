//! Memoryless quantizers: thresholded sign and the dithered uniform scalar
//! quantizer `Q_δ(z) = δ⌊z/δ⌋ + δ/2`.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, param, Result};
use crate::seeding::{stream, stream_rng};

/// The law of a dither vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DitherKind {
    None,
    /// `τ_i ~ N(0, πR²/2)` for energy bound `R`.
    GaussianThreshold {
        scale: f64,
    },
    /// `u_i ~ Uniform[0, δ]`.
    UniformInCell {
        resolution: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherSpec {
    pub kind: DitherKind,
    pub seed: u64,
}

impl DitherSpec {
    pub fn new(kind: DitherKind, seed: u64) -> Self {
        DitherSpec { kind, seed }
    }
}

/// Draws a dither vector; deterministic in the spec's seed.
pub fn draw_dither(spec: &DitherSpec, length: usize) -> Result<Vec<f64>> {
    if length == 0 {
        return param("dither length must be positive");
    }
    match spec.kind {
        DitherKind::None => Ok(vec![0.0; length]),
        DitherKind::GaussianThreshold { scale } => {
            if !(scale.is_finite() && scale > 0.0) {
                return param("threshold scale R must be positive");
            }
            let sd = (std::f64::consts::PI * scale * scale / 2.0).sqrt();
            let law = Normal::new(0.0, sd).map_err(|e| crate::Error::Parameter(e.to_string()))?;
            let mut rng = stream_rng(spec.seed, stream::THRESHOLD);
            Ok((0..length).map(|_| law.sample(&mut rng)).collect())
        }
        DitherKind::UniformInCell { resolution } => {
            if !(resolution.is_finite() && resolution > 0.0) {
                return param("resolution must be positive");
            }
            let mut rng = stream_rng(spec.seed, stream::UNIFORM_DITHER);
            Ok((0..length)
                .map(|_| rng.random::<f64>() * resolution)
                .collect())
        }
    }
}

/// Draws i.i.d. standard normals on the noise stream of `seed`.
pub fn standard_normals(seed: u64, length: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream::NOISE);
    (0..length).map(|_| rng.sample(StandardNormal)).collect()
}

/// `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Component-wise `sign(v_i + τ_i)`.
pub fn sign_quantize(v: &[f64], tau: &[f64]) -> Result<Vec<f64>> {
    check_len(v.len(), tau.len())?;
    Ok(v.iter().zip(tau).map(|(a, t)| sign(a + t)).collect())
}

/// Cell index `⌊z/δ⌋` under IEEE floor; cell boundaries belong to the upper cell.
#[inline]
pub fn cell_index(z: f64, delta: f64) -> f64 {
    (z / delta).floor()
}

#[inline]
pub fn quantize_scalar(z: f64, delta: f64) -> f64 {
    delta * cell_index(z, delta) + delta / 2.0
}

/// `Q_δ(v + u)`; a missing dither is treated as zero.
pub fn scalar_quantize(v: &[f64], delta: f64, dither: Option<&[f64]>) -> Result<Vec<f64>> {
    if !(delta.is_finite() && delta > 0.0) {
        return param(format!("resolution must be positive, got {delta}"));
    }
    match dither {
        Some(u) => {
            check_len(v.len(), u.len())?;
            Ok(v.iter()
                .zip(u)
                .map(|(a, b)| quantize_scalar(a + b, delta))
                .collect())
        }
        None => Ok(v.iter().map(|&a| quantize_scalar(a, delta)).collect()),
    }
}

/// Which downstream program a code vector feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramTag {
    OneBit,
    ThresholdedOneBit,
    DitheredScalar,
    Scalar,
}

/// Quantized measurements together with the realized dither.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedObservation {
    pub codes: Vec<f64>,
    /// Threshold `τ` (zeros when absent).
    pub tau: Vec<f64>,
    /// Uniform dither `u` (zeros when absent).
    pub uniform: Vec<f64>,
    pub resolution: Option<f64>,
    pub program: ProgramTag,
}

impl QuantizedObservation {
    /// `sign(v + τ)`.
    pub fn one_bit(v: &[f64], tau: Vec<f64>) -> Result<Self> {
        let codes = sign_quantize(v, &tau)?;
        let program = if tau.iter().all(|t| *t == 0.0) {
            ProgramTag::OneBit
        } else {
            ProgramTag::ThresholdedOneBit
        };
        Ok(QuantizedObservation {
            uniform: vec![0.0; v.len()],
            codes,
            tau,
            resolution: None,
            program,
        })
    }

    /// `Q_δ(v + τ + u)`.
    pub fn scalar(v: &[f64], delta: f64, tau: Vec<f64>, uniform: Vec<f64>) -> Result<Self> {
        check_len(v.len(), tau.len())?;
        let offset: Vec<f64> = tau.iter().zip(&uniform).map(|(a, b)| a + b).collect();
        let codes = scalar_quantize(v, delta, Some(&offset))?;
        let dithered = tau.iter().chain(&uniform).any(|t| *t != 0.0);
        Ok(QuantizedObservation {
            codes,
            tau,
            uniform,
            resolution: Some(delta),
            program: if dithered {
                ProgramTag::DitheredScalar
            } else {
                ProgramTag::Scalar
            },
        })
    }

    /// CSV with columns `index,code,tau_or_u`; the last column is the total
    /// offset `τ + u` added before quantization.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,code,tau_or_u")?;
        for (i, c) in self.codes.iter().enumerate() {
            writeln!(w, "{},{},{}", i, c, self.tau[i] + self.uniform[i])?;
        }
        Ok(())
    }
}
