//! Circulant operators and the randomly subsampled circulant ensemble.

mod dump;
mod ensemble;
mod operator;

pub use dump::{read_binary, read_csv, write_binary, write_csv};
pub use ensemble::{EnsembleMap, GeneratorLaw, MeasurementEnsemble};
pub use operator::{CirculantOperator, DEFAULT_FAST_THRESHOLD};
