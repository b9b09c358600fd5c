use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CirculantOperator;
use crate::error::{check_len, ensure_finite, param, Error, Result};
use crate::operator::LinearMap;
use crate::seeding::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorLaw {
    Gaussian,
    /// ±1 entries; only used to exhibit the Bernoulli counterexample.
    Rademacher,
}

impl GeneratorLaw {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorLaw::Gaussian => "gaussian",
            GeneratorLaw::Rademacher => "rademacher",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(GeneratorLaw::Gaussian),
            "rademacher" => Ok(GeneratorLaw::Rademacher),
            other => param(format!("unknown generator law `{other}`")),
        }
    }

    fn draw<R: Rng>(self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            GeneratorLaw::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            GeneratorLaw::Rademacher => (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        }
    }
}

/// A randomly subsampled circulant matrix `A = R_I Γ_g`, optionally with an
/// extra column `h` forming `B = R_I [Γ_g h]`.
///
/// Normalization constants are left to callers.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    expected_rows: usize,
    selector: Vec<bool>,
    rows: Vec<usize>,
    generator: CirculantOperator,
    extra_column: Option<Vec<f64>>,
    law: GeneratorLaw,
    seed: u64,
}

impl MeasurementEnsemble {
    /// Draws `θ_i ~ Bernoulli(m/N)`, `g` and optionally `h` from independent
    /// substreams of `seed`.
    pub fn sample(
        n: usize,
        m: usize,
        law: GeneratorLaw,
        with_extra_column: bool,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return param(format!("need 1 <= m <= N, got m={m}, N={n}"));
        }
        let p = m as f64 / n as f64;
        let draw_mask = |stream_id| {
            let mut rng = stream_rng(seed, stream_id);
            (0..n)
                .map(|_| rng.random::<f64>() < p)
                .collect::<Vec<bool>>()
        };
        let mut selector = draw_mask(stream::SELECTOR);
        if !selector.iter().any(|&b| b) {
            selector = draw_mask(stream::RESAMPLE);
            if !selector.iter().any(|&b| b) {
                return Err(Error::EmptyMeasurement);
            }
        }
        let generator = law.draw(n, &mut stream_rng(seed, stream::GENERATOR));
        let extra =
            with_extra_column.then(|| law.draw(n, &mut stream_rng(seed, stream::EXTRA_COLUMN)));
        Self::from_parts(generator, selector, extra, m, law, seed)
    }

    /// Builds an ensemble from explicit parts (fixed subsampling sets,
    /// replayed dumps, hand-made test matrices).
    pub fn from_parts(
        generator: Vec<f64>,
        selector: Vec<bool>,
        extra_column: Option<Vec<f64>>,
        expected_rows: usize,
        law: GeneratorLaw,
        seed: u64,
    ) -> Result<Self> {
        let n = generator.len();
        check_len(n, selector.len())?;
        if let Some(h) = &extra_column {
            check_len(n, h.len())?;
            ensure_finite(h)?;
        }
        let rows: Vec<usize> = (0..n).filter(|&i| selector[i]).collect();
        if rows.is_empty() {
            return Err(Error::EmptyMeasurement);
        }
        Ok(MeasurementEnsemble {
            expected_rows,
            selector,
            rows,
            generator: CirculantOperator::new(generator)?,
            extra_column,
            law,
            seed,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.generator.dim()
    }

    /// `m`, the mean of `|I|`.
    pub fn expected_rows(&self) -> usize {
        self.expected_rows
    }

    /// `|I|`.
    pub fn realized_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn selector(&self) -> &[bool] {
        &self.selector
    }

    /// The realized index set `I` (0-based, increasing).
    pub fn index_set(&self) -> &[usize] {
        &self.rows
    }

    pub fn generator(&self) -> &CirculantOperator {
        &self.generator
    }

    pub fn extra_column(&self) -> Option<&[f64]> {
        self.extra_column.as_deref()
    }

    pub fn law(&self) -> GeneratorLaw {
        self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn require_extra(&self) -> Result<&[f64]> {
        self.extra_column
            .as_deref()
            .ok_or_else(|| Error::Parameter("ensemble has no extra column".into()))
    }

    /// `R_I Γ_g z`, or `R_I (Γ_g z_[N] + z_{N+1} h)` when `extended`.
    pub fn apply(&self, z: &[f64], extended: bool) -> Result<Vec<f64>> {
        let n = self.ambient_dim();
        if extended {
            let h = self.require_extra()?;
            check_len(n + 1, z.len())?;
            let full = self.generator.apply(&z[..n])?;
            let last = z[n];
            Ok(self.rows.iter().map(|&i| full[i] + last * h[i]).collect())
        } else {
            check_len(n, z.len())?;
            let full = self.generator.apply(z)?;
            Ok(self.rows.iter().map(|&i| full[i]).collect())
        }
    }

    /// Adjoint of [`apply`](Self::apply): zero-fill by `R_Iᵀ`, then `Γ_gᵀ`
    /// (and `⟨R_I h, w⟩` as the last entry when `extended`).
    pub fn adjoint(&self, w: &[f64], extended: bool) -> Result<Vec<f64>> {
        check_len(self.rows.len(), w.len())?;
        let n = self.ambient_dim();
        let mut filled = vec![0.0; n];
        for (&i, &v) in self.rows.iter().zip(w) {
            filled[i] = v;
        }
        let mut out = self.generator.adjoint_apply(&filled)?;
        if extended {
            let h = self.require_extra()?;
            out.push(self.rows.iter().zip(w).map(|(&i, v)| h[i] * v).sum());
        }
        Ok(out)
    }

    /// `A` as a [`LinearMap`].
    pub fn measurement_map(&self) -> EnsembleMap<'_> {
        EnsembleMap {
            ensemble: self,
            extended: false,
        }
    }

    /// `B = R_I [Γ_g h]` as a [`LinearMap`]; fails without an extra column.
    pub fn extended_map(&self) -> Result<EnsembleMap<'_>> {
        self.require_extra()?;
        Ok(EnsembleMap {
            ensemble: self,
            extended: true,
        })
    }
}

/// Borrowed view of an ensemble as `A` or `B`.
#[derive(Clone, Copy)]
pub struct EnsembleMap<'a> {
    ensemble: &'a MeasurementEnsemble,
    extended: bool,
}

impl LinearMap for EnsembleMap<'_> {
    fn rows(&self) -> usize {
        self.ensemble.realized_rows()
    }

    fn cols(&self) -> usize {
        self.ensemble.ambient_dim() + usize::from(self.extended)
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.ensemble.apply(z, self.extended)
    }

    fn adjoint(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.ensemble.adjoint(w, self.extended)
    }
}
